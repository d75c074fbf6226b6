use std::f64::consts::PI;

use nlrd6_core::quadrature::integrate;
use nlrd6_core::{make_grid, Field};

#[test]
fn gaussian_transform_matches_quadrature() {
    // grid with p = 0, 1, 2 among its wavenumbers
    let grid = make_grid(10.0 * PI, 1024).unwrap();
    let f = Field::from_fn(grid.clone(), |x| (-x * x / 2.0).exp()).forward_transform().unwrap();
    for p in [0.0, 1.0, 2.0] {
        let k = (p * 10.0) as i64;
        let slot = grid.mode_slot(k).unwrap();
        // even integrand: the transform is real
        let quad = integrate(|x| (-x * x / 2.0).exp() * (p * x).cos(), -40.0, 40.0, 160) / (2.0 * PI).sqrt();
        assert!((f.values()[slot].re - quad).abs() < 1e-12, "p = {p}");
        assert!(f.values()[slot].im.abs() < 1e-12);
    }
}

#[test]
fn shifted_gaussian_phase() {
    // f(x - c) has transform e^{-ipc} f^(p)
    let grid = make_grid(20.0, 512).unwrap();
    let c = 1.5;
    let f = Field::from_fn(grid.clone(), |x| (-(x - c).powi(2) / 2.0).exp()).forward_transform().unwrap();
    for (v, &p) in f.values().iter().zip(grid.wavenumbers()) {
        let want = num_complex::Complex64::from_polar((-p * p / 2.0).exp(), -p * c);
        assert!((v - want).norm() < 1e-10);
    }
}

#[test]
fn round_trip_random_samples() {
    let grid = make_grid(7.0, 96).unwrap();
    let samples: Vec<f64> = (0..96).map(|j| ((j * 37 % 11) as f64 - 5.0) / 3.0).collect();
    let f = Field::from_real(grid, &samples).unwrap();
    let back = f.forward_transform().unwrap().inverse_transform().unwrap();
    for (a, b) in back.values().iter().zip(f.values()) {
        assert!((a - b).norm() < 1e-13);
    }
}

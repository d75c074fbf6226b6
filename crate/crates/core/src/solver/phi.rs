//! `phi1(z) = (e^z - 1)/z` and `phi2(z) = (e^z - 1 - z)/z^2` for complex `z`.

use num_complex::Complex64;

const PHI1_SERIES_RADIUS: f64 = 1e-4;
const PHI2_SERIES_RADIUS: f64 = 1.0;

/// `e^z - 1` without cancellation near the origin.
pub fn expm1(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let em1 = z.re.exp_m1();
    // e^x cos y - 1 = expm1(x) cos y - 2 sin^2(y/2)
    let half = (0.5 * z.im).sin();
    Complex64::new(em1 * c - 2.0 * half * half, (em1 + 1.0) * s)
}

pub fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < PHI1_SERIES_RADIUS {
        // sum_{k=0}^{6} z^k / (k+1)!
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 1..7 {
            term = term * z / (k + 1) as f64;
            sum += term;
        }
        sum
    } else {
        expm1(z) / z
    }
}

pub fn phi2(z: Complex64) -> Complex64 {
    if z.norm() < PHI2_SERIES_RADIUS {
        // sum_{k>=0} z^k / (k+2)!
        let mut term = Complex64::new(0.5, 0.0);
        let mut sum = term;
        for k in 1..22 {
            term = term * z / (k + 2) as f64;
            sum += term;
        }
        sum
    } else {
        (expm1(z) - z) / (z * z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn phi1_values() {
        assert_eq!(phi1(c(0.0, 0.0)), c(1.0, 0.0));
        assert!((phi1(c(1.0, 0.0)) - c(E - 1.0, 0.0)).norm() < 1e-15);
        assert!((phi1(c(1.0, 0.0)).re - 1.718_281_828).abs() < 1e-9);
        assert!((phi1(c(-1.0, 0.0)) - c(1.0 - 1.0 / E, 0.0)).norm() < 1e-15);
        assert!((phi1(c(-1.0, 0.0)).re - 0.632_120_558).abs() < 1e-9);
    }

    #[test]
    fn phi1_seam_continuity() {
        // 40-digit reference values of phi1 at |z| = 1e-4 on either side
        for &(z, want) in &[
            (c(1e-4, 0.0), c(1.000_050_001_666_708_3, 0.0)),
            (c(-1e-4, 0.0), c(0.999_950_001_666_625, 0.0)),
            (c(0.0, 1e-4), c(0.999_999_998_333_333_4, 4.999_999_995_833_333e-5)),
        ] {
            let below = phi1(z * (1.0 - 1e-9));
            let above = phi1(z * (1.0 + 1e-9));
            assert!((below - want).norm() / want.norm() < 1e-12);
            assert!((above - want).norm() / want.norm() < 1e-12);
            assert!((below - above).norm() / want.norm() < 1e-12);
        }
    }

    #[test]
    fn phi2_values() {
        assert_eq!(phi2(c(0.0, 0.0)), c(0.5, 0.0));
        assert!((phi2(c(1.0, 0.0)) - c(E - 2.0, 0.0)).norm() < 1e-15);
        // large negative argument: ~ 1/|z|
        let z = c(-1e6, 0.0);
        assert!((phi2(z).re - (1e6 - 1.0) / 1e12).abs() < 1e-20);
        let z = c(0.9999, 0.3);
        let direct = (z.exp() - 1.0 - z) / (z * z);
        assert!((phi2(z) - direct).norm() < 1e-14);
    }

    #[test]
    fn expm1_small() {
        let z = c(1e-10, -2e-10);
        assert!((expm1(z) - z).norm() < 1e-19);
    }
}

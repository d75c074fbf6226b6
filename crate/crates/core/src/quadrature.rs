//! Panel Gauss-Legendre quadrature for L1 norms of analytically known
//! functions. Sign changes are bracketed and refined so `|f|` is only ever
//! integrated over pieces where it is smooth.

use gauss_quad::GaussLegendre;

const RULE_DEGREE: usize = 16;
const SIGN_PROBES: usize = 8;

fn rule() -> GaussLegendre {
    GaussLegendre::new(RULE_DEGREE).expect("degree 16 is valid")
}

fn bisect_root(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `integral_{lo}^{hi} |f(x)| dx` with panels no wider than `panel`.
pub fn integrate_abs(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panel: f64) -> f64 {
    let gl = rule();
    let panels = ((hi - lo) / panel).ceil().max(1.0) as usize;
    let width = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let a = lo + k as f64 * width;
        let b = if k + 1 == panels { hi } else { a + width };
        // Break the panel at every bracketed sign change.
        let mut cuts = vec![a];
        let step = (b - a) / SIGN_PROBES as f64;
        let mut prev_x = a;
        let mut prev_f = f(a);
        for s in 1..=SIGN_PROBES {
            let x = if s == SIGN_PROBES { b } else { a + s as f64 * step };
            let fx = f(x);
            if prev_f != 0.0 && fx != 0.0 && (prev_f > 0.0) != (fx > 0.0) {
                cuts.push(bisect_root(&f, prev_x, x));
            }
            prev_x = x;
            prev_f = fx;
        }
        cuts.push(b);
        for w in cuts.windows(2) {
            total += gl.integrate(w[0], w[1], &f).abs();
        }
    }
    total
}

/// Plain Gauss-Legendre panels for smooth integrands.
pub fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    let gl = rule();
    let width = (hi - lo) / panels as f64;
    (0..panels)
        .map(|k| {
            let a = lo + k as f64 * width;
            gl.integrate(a, a + width, &f)
        })
        .sum()
}

//! Adaptive Simpson quadrature.

/// Default absolute tolerance used when normalizing densities.
pub const DEFAULT_TOL: f64 = 1e-10;

const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` with adaptive Simpson refinement to absolute
/// tolerance `tol`.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(&f, a, fa, m, fm, b, fb, whole, tol, 0)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    f: &F,
    a: f64,
    fa: f64,
    m: f64,
    fm: f64,
    b: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64
where
    F: Fn(f64) -> f64,
{
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // Depth floor of 4 keeps periodic integrands from fooling the first estimate.
    if depth >= 4 && (delta.abs() <= 15.0 * tol || depth >= MAX_DEPTH) {
        return left + right + delta / 15.0;
    }
    recurse(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth + 1)
        + recurse(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth + 1)
}

/// Integrates over `[a, b]` by splitting into `pieces` equal sub-intervals and
/// running adaptive Simpson on each.
pub fn piecewise_simpson<F>(f: F, a: f64, b: f64, pieces: usize, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let pieces = pieces.max(1);
    let h = (b - a) / pieces as f64;
    let per_piece = tol / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == pieces { b } else { lo + h };
            adaptive_simpson(&f, lo, hi, per_piece)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let v = adaptive_simpson(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12);
        assert!((v - 0.0).abs() < 1e-12);
    }

    #[test]
    fn sine_integral() {
        let v = adaptive_simpson(f64::sin, 0.0, PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-11);
    }

    #[test]
    fn kinked_integrand() {
        let v = piecewise_simpson(|x: f64| (x - 0.3).abs(), 0.0, 1.0, 8, 1e-12);
        assert!((v - (0.045 + 0.245)).abs() < 1e-10);
    }

    #[test]
    fn empty_interval() {
        assert_eq!(adaptive_simpson(|x| x, 1.0, 1.0, 1e-9), 0.0);
    }
}

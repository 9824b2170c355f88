//! Studentized range distribution with infinitely many degrees of freedom.

use super::quadrature::integrate;
use super::special::{normal_cdf, normal_pdf};

const Z_LIMIT: f64 = 10.0;
const QUAD_TOL: f64 = 1e-13;

/// `P(Q > q)` for the range of `k` independent standard normals.
///
/// Computed as `1 - ∫ k φ(z) [Φ(z) - Φ(z - q)]^(k-1) dz` over `[-10, 10]`.
pub fn studentized_range_upper_tail(q: f64, k: usize) -> f64 {
    assert!(k >= 2, "studentized range needs k >= 2");
    if q.is_nan() {
        return f64::NAN;
    }
    if q <= 0.0 {
        return 1.0;
    }
    let kf = k as f64;
    let e = (k - 1) as i32;
    let cdf = integrate(
        |z| kf * normal_pdf(z) * (normal_cdf(z) - normal_cdf(z - q)).powi(e),
        -Z_LIMIT,
        Z_LIMIT,
        QUAD_TOL,
    );
    (1.0 - cdf).clamp(0.0, 1.0)
}

/// Upper `alpha` quantile: the `q` with `P(Q > q) = alpha`.
pub fn studentized_range_quantile(alpha: f64, k: usize) -> f64 {
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while studentized_range_upper_tail(hi, k) > alpha {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if studentized_range_upper_tail(mid, k) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closed_form_k2(q: f64) -> f64 {
        2.0 * (1.0 - normal_cdf(q / std::f64::consts::SQRT_2))
    }

    #[test]
    fn k2_matches_closed_form() {
        for q in [0.1, 0.5, 1.0, 2.0, 2.828_427_124_746_19, 4.0, 6.5] {
            let got = studentized_range_upper_tail(q, 2);
            assert!((got - closed_form_k2(q)).abs() < 1e-9, "q={q}: {got}");
        }
        let p = studentized_range_upper_tail(8f64.sqrt(), 2);
        assert!((p - 0.0455).abs() < 5e-5);
    }

    #[test]
    fn zero_q_is_certain() {
        assert_eq!(studentized_range_upper_tail(0.0, 5), 1.0);
    }

    #[test]
    fn tabulated_quantiles() {
        // Upper 5% points of the range of k normals (infinite df).
        for (k, q) in [(2, 2.772), (3, 3.314), (4, 3.633), (5, 3.858), (10, 4.474)] {
            assert!((studentized_range_quantile(0.05, k) - q).abs() < 1e-3, "k={k}");
        }
    }

    #[test]
    fn monotone_in_q() {
        for k in [2, 3, 6] {
            let mut prev = 1.0;
            for i in 0..80 {
                let p = studentized_range_upper_tail(f64::from(i) * 0.1, k);
                assert!(p <= prev + 1e-15);
                prev = p;
            }
        }
    }
}

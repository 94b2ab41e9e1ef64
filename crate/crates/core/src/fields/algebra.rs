use crate::error::{Error, Result};

/// Roots of `lambda^2 - (alpha + beta) lambda + (1 + alpha beta) = 0`,
/// returned as `(lambda1, lambda2)` with `lambda1 >= lambda2`.
pub fn lambda_pair(alpha: f64, beta: f64) -> Result<(f64, f64)> {
    let gap = alpha - beta;
    let disc = gap * gap - 4.0;
    if disc < 0.0 {
        return Err(Error::ComplexRoots {
            disc_plus_four: gap * gap,
        });
    }
    let root = disc.sqrt();
    let sum = alpha + beta;
    Ok(((sum + root) / 2.0, (sum - root) / 2.0))
}

/// Beltrami factors generated by a pair of curl eigenvalues, `alpha >= beta`.
pub fn alpha_beta(lambda1: f64, lambda2: f64) -> (f64, f64) {
    let d = lambda1 - lambda2;
    let root = (d * d + 4.0).sqrt();
    let sum = lambda1 + lambda2;
    ((sum + root) / 2.0, (sum - root) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn double_root_at_unit_gap() {
        let (l1, l2) = lambda_pair(3.0, 1.0).unwrap();
        assert_eq!((l1, l2), (2.0, 2.0));
    }

    #[test]
    fn equal_factors_have_complex_roots() {
        assert!(matches!(
            lambda_pair(0.7, 0.7),
            Err(Error::ComplexRoots { .. })
        ));
    }

    #[test]
    fn symmetric_pair() {
        let (l1, l2) = lambda_pair(SQRT2, -SQRT2).unwrap();
        assert!((l1 - 1.0).abs() < 1e-15 && (l2 + 1.0).abs() < 1e-15);
        let (a, b) = alpha_beta(1.0, -1.0);
        assert!((a - SQRT2).abs() < 1e-15 && (b + SQRT2).abs() < 1e-15);
    }

    #[test]
    fn repeated_eigenvalue_shifts_by_one() {
        for lam in [-3.0, -1.0, 0.0, 2.0, 5.5] {
            let (a, b) = alpha_beta(lam, lam);
            assert!((a - (lam + 1.0)).abs() < 1e-14 && (b - (lam - 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_eigenvalue_pair() {
        let (a, b) = alpha_beta(2.0, 0.0);
        assert!((a - (1.0 + SQRT2)).abs() < 1e-15);
        assert!((b - (1.0 - SQRT2)).abs() < 1e-15);
        assert!((1.0 + a * b).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn vieta_roundtrip(l1 in -20.0f64..20.0, l2 in -20.0f64..20.0) {
            let (hi, lo) = if l1 >= l2 { (l1, l2) } else { (l2, l1) };
            let (a, b) = alpha_beta(hi, lo);
            prop_assert!(a >= b);
            prop_assert!((a + b - (hi + lo)).abs() <= 1e-12 * (1.0 + hi.abs() + lo.abs()));
            prop_assert!((1.0 + a * b - hi * lo).abs() <= 1e-12 * (1.0 + hi * hi + lo * lo));
            let (r1, r2) = lambda_pair(a, b).unwrap();
            prop_assert!((r1 - hi).abs() <= 1e-11 * (1.0 + hi.abs()));
            prop_assert!((r2 - lo).abs() <= 1e-11 * (1.0 + lo.abs()));
        }

        #[test]
        fn discriminant_identity(a in -10.0f64..10.0, b in -10.0f64..10.0) {
            match lambda_pair(a, b) {
                Ok((l1, l2)) => {
                    prop_assert!((a - b).powi(2) >= 4.0);
                    let lhs = (a - b).powi(2) - 4.0;
                    prop_assert!((lhs - (l1 - l2).powi(2)).abs() <= 1e-10 * (1.0 + lhs));
                }
                Err(_) => prop_assert!((a - b).powi(2) < 4.0),
            }
        }
    }
}

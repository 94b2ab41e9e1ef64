use crate::error::{Error, Result};
use crate::spectral::{curl_hat, helical_decompose, norm2, SpectralVectorField};

use super::algebra::alpha_beta;
use super::construct::Shell;

/// Relative curl residual a component must meet to count as Beltrami.
pub const BELTRAMI_TOL: f64 = 1e-10;

/// A field together with the shell it claims to live on.
#[derive(Debug, Clone)]
pub struct BeltramiComponent {
    pub shell: Shell,
    pub field: SpectralVectorField,
}

impl BeltramiComponent {
    pub fn new(shell: Shell, field: SpectralVectorField) -> Self {
        Self { shell, field }
    }

    pub fn lambda(&self) -> f64 {
        self.shell.lambda()
    }

    /// `||curl u - lambda u|| / ||u||` (zero for the zero field).
    pub fn curl_residual(&self) -> f64 {
        let r = curl_hat(&self.field)
            .axpy(-self.lambda(), &self.field)
            .norm_l2();
        let n = self.field.norm_l2();
        if n == 0.0 {
            r
        } else {
            r / n
        }
    }
}

/// Curl eigenvalues, the Beltrami factors they generate and their shells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleBeltramiSpec {
    pub lambda1: f64,
    pub lambda2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub shell1: Shell,
    pub shell2: Shell,
    pub degenerate: bool,
}

impl DoubleBeltramiSpec {
    /// Orders the shells so that `lambda1 >= lambda2` and derives `(alpha, beta)`.
    pub fn from_shells(a: Shell, b: Shell) -> Self {
        let (s1, s2) = if a.lambda() >= b.lambda() {
            (a, b)
        } else {
            (b, a)
        };
        let (lambda1, lambda2) = (s1.lambda(), s2.lambda());
        let (alpha, beta) = alpha_beta(lambda1, lambda2);
        let degenerate = s1.n == s2.n && (s1.sign == s2.sign || s1.n == 0);
        Self {
            lambda1,
            lambda2,
            alpha,
            beta,
            shell1: s1,
            shell2: s2,
            degenerate,
        }
    }
}

/// `(u, B)` with `u = u1 + u2` and `B = (alpha - lambda1) u1 + (alpha - lambda2) u2`.
#[derive(Debug, Clone)]
pub struct DoubleBeltramiState {
    pub spec: DoubleBeltramiSpec,
    pub u1: SpectralVectorField,
    pub u2: SpectralVectorField,
    pub u: SpectralVectorField,
    pub b: SpectralVectorField,
}

impl DoubleBeltramiState {
    /// Magnetic part carried by the first component.
    pub fn b1(&self) -> SpectralVectorField {
        self.u1.scale(self.spec.alpha - self.spec.lambda1)
    }

    pub fn b2(&self) -> SpectralVectorField {
        self.u2.scale(self.spec.alpha - self.spec.lambda2)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            spec: self.spec,
            u1: self.u1.scale(c),
            u2: self.u2.scale(c),
            u: self.u.scale(c),
            b: self.b.scale(c),
        }
    }

    /// Superposition of two states sharing `(alpha, beta)`.
    pub fn superpose(&self, other: &Self) -> Result<Self> {
        let same = (self.spec.alpha - other.spec.alpha).abs()
            <= 1e-12 * (1.0 + self.spec.alpha.abs())
            && (self.spec.beta - other.spec.beta).abs() <= 1e-12 * (1.0 + self.spec.beta.abs());
        if !same {
            return Err(Error::InvalidInput(
                "superposition requires identical Beltrami factors".into(),
            ));
        }
        Ok(Self {
            spec: self.spec,
            u1: self.u1.add(&other.u1),
            u2: self.u2.add(&other.u2),
            u: self.u.add(&other.u),
            b: self.b.add(&other.b),
        })
    }
}

/// Builds the double Beltrami state generated by two Beltrami components.
pub fn make_double_beltrami(
    c1: &BeltramiComponent,
    c2: &BeltramiComponent,
) -> Result<DoubleBeltramiState> {
    c1.field.check_grid(&c2.field)?;
    for c in [c1, c2] {
        let residual = c.curl_residual();
        let div = c.field.divergence_residual();
        if residual > BELTRAMI_TOL || div > BELTRAMI_TOL {
            return Err(Error::NotBeltrami {
                lambda: c.lambda(),
                residual: residual.max(div),
            });
        }
        if c.shell.n == 0 && c.field.without_mean().coeff_norm() > 0.0 {
            return Err(Error::NotBeltrami {
                lambda: 0.0,
                residual: c.field.without_mean().coeff_norm(),
            });
        }
    }
    let spec = DoubleBeltramiSpec::from_shells(c1.shell, c2.shell);
    let (first, second) = if c1.lambda() >= c2.lambda() {
        (c1, c2)
    } else {
        (c2, c1)
    };
    // each eigenvalue solves the characteristic equation: (alpha - l)(l - beta) = 1
    for l in [first.lambda(), second.lambda()] {
        let check = (spec.alpha - l) * (l - spec.beta);
        debug_assert!(
            (check - 1.0).abs() < 1e-10 * (1.0 + l * l),
            "Vieta cross-check failed"
        );
    }
    let u1 = first.field.clone();
    let u2 = second.field.clone();
    let u = u1.add(&u2);
    let b = u1
        .scale(spec.alpha - first.lambda())
        .add(&u2.scale(spec.alpha - second.lambda()));
    Ok(DoubleBeltramiState { spec, u1, u2, u, b })
}

/// Relative residuals of `B + curl u = alpha u` and `u - curl B = -beta B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    pub r1: f64,
    pub r2: f64,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.r1.max(self.r2)
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

pub fn verify_double_beltrami(
    u: &SpectralVectorField,
    b: &SpectralVectorField,
    alpha: f64,
    beta: f64,
) -> ResidualReport {
    let omega = curl_hat(u);
    let j = curl_hat(b);
    let phi = b.add(&omega).axpy(-alpha, u);
    let psi = u.sub(&j).axpy(beta, b);
    ResidualReport {
        r1: ratio(phi.norm_l2(), u.norm_l2()),
        r2: ratio(psi.norm_l2(), b.norm_l2()),
    }
}

/// Fraction of a field's energy on one curl eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellShare {
    pub lambda: f64,
    pub fraction: f64,
}

/// Helical energy bookkeeping of one field.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellContent {
    pub shares: Vec<ShellShare>,
    pub complement: f64,
    pub total_energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub lambda1: f64,
    pub lambda2: f64,
    pub degenerate: bool,
    pub u: ShellContent,
    pub b: ShellContent,
    pub residuals: ResidualReport,
    /// Residuals within `1e-8` and off-shell energy within `1e-10` for both fields.
    pub certified: bool,
}

/// Tolerance for the off-shell energy fraction of a certified state.
pub const COMPLEMENT_TOL: f64 = 1e-10;
/// Residual level required before shell content is trusted.
pub const CLASSIFY_RESIDUAL_TOL: f64 = 1e-8;

fn eigen_match(value: f64, lambda: f64) -> bool {
    (value - lambda).abs() <= 1e-9 * (1.0 + lambda.abs())
}

fn shell_content(f: &SpectralVectorField, lambdas: &[f64]) -> Result<ShellContent> {
    let g = f.grid();
    let h = helical_decompose(f)?;
    let total = f.energy();
    let mut on = vec![0.0; lambdas.len()];
    let mut off = 0.0;
    let mean_energy = crate::spectral::BOX_VOLUME * {
        let m = f.get(0);
        m.iter().map(|c| c.norm_sqr()).sum::<f64>()
    };
    match lambdas.iter().position(|&l| eigen_match(0.0, l)) {
        Some(i) => on[i] += mean_energy,
        None => off += mean_energy,
    }
    for idx in 1..g.len() {
        let kn = (norm2(g.wavevector(idx)) as f64).sqrt();
        for (amp, eig) in [(h.plus()[idx], kn), (h.minus()[idx], -kn)] {
            let e = crate::spectral::BOX_VOLUME * amp.norm_sqr();
            if e == 0.0 {
                continue;
            }
            match lambdas.iter().position(|&l| eigen_match(eig, l)) {
                Some(i) => on[i] += e,
                None => off += e,
            }
        }
    }
    let frac = |x: f64| if total > 0.0 { x / total } else { 0.0 };
    Ok(ShellContent {
        shares: lambdas
            .iter()
            .zip(&on)
            .map(|(&lambda, &e)| ShellShare {
                lambda,
                fraction: frac(e),
            })
            .collect(),
        complement: frac(off),
        total_energy: total,
    })
}

/// Splits `u` and `B` over the curl eigenvalues generated by `(alpha, beta)`.
pub fn classify(
    u: &SpectralVectorField,
    b: &SpectralVectorField,
    alpha: f64,
    beta: f64,
) -> Result<ClassificationReport> {
    let gap = (alpha - beta).abs();
    let degenerate = (gap - 2.0).abs() <= 1e-9;
    if gap < 2.0 && !degenerate {
        return Err(Error::ClassificationGap { gap });
    }
    let (lambda1, lambda2) = if degenerate {
        let l = (alpha + beta) / 2.0;
        (l, l)
    } else {
        super::algebra::lambda_pair(alpha, beta)?
    };
    let lambdas: Vec<f64> = if degenerate {
        vec![lambda1]
    } else {
        vec![lambda1, lambda2]
    };
    let uc = shell_content(u, &lambdas)?;
    let bc = shell_content(b, &lambdas)?;
    let residuals = verify_double_beltrami(u, b, alpha, beta);
    let certified = residuals.max() <= CLASSIFY_RESIDUAL_TOL
        && uc.complement <= COMPLEMENT_TOL
        && bc.complement <= COMPLEMENT_TOL;
    Ok(ClassificationReport {
        lambda1,
        lambda2,
        degenerate,
        u: uc,
        b: bc,
        residuals,
        certified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::construct::{abc_flow, random_solenoidal, shell_field, ShellAmplitudes};
    use crate::spectral::GridSpec;

    fn grid() -> GridSpec {
        GridSpec::new(16).unwrap()
    }

    fn comp(n: u32, sign: i8, seed: u64) -> BeltramiComponent {
        let s = Shell::new(n, sign).unwrap();
        BeltramiComponent::new(
            s,
            shell_field(s, &ShellAmplitudes::Seeded(seed), grid()).unwrap(),
        )
    }

    #[test]
    fn single_component_pair() {
        let c1 = comp(2, 1, 3);
        let zero = BeltramiComponent::new(
            Shell::new(1, -1).unwrap(),
            SpectralVectorField::zeros(grid()),
        );
        let st = make_double_beltrami(&c1, &zero).unwrap();
        let expect_b = c1.field.scale(st.spec.alpha - st.spec.lambda1);
        assert!(st.b.sub(&expect_b).norm_l2() < 1e-14 * expect_b.norm_l2());
        assert!(verify_double_beltrami(&st.u, &st.b, st.spec.alpha, st.spec.beta).max() < 1e-12);
    }

    #[test]
    fn abc_plus_shell_four() {
        let g = grid();
        let c1 = BeltramiComponent::new(
            Shell::new(1, 1).unwrap(),
            abc_flow(1.0, 1.0, 1.0, 1.0, g).unwrap(),
        );
        let c2 = comp(4, 1, 9);
        let st = make_double_beltrami(&c1, &c2).unwrap();
        assert_eq!(st.spec.lambda1, 2.0);
        assert_eq!(st.spec.lambda2, 1.0);
        let r = verify_double_beltrami(&st.u, &st.b, st.spec.alpha, st.spec.beta);
        assert!(r.max() < 1e-10, "{r:?}");
    }

    #[test]
    fn symmetric_pair_magnetic_field() {
        let c1 = comp(1, 1, 1);
        let c2 = comp(1, -1, 2);
        let st = make_double_beltrami(&c1, &c2).unwrap();
        let a = std::f64::consts::SQRT_2;
        assert!((st.spec.alpha - a).abs() < 1e-15);
        let expect = c1.field.scale(a - 1.0).add(&c2.field.scale(a + 1.0));
        assert!(st.b.sub(&expect).norm_l2() < 1e-13);
    }

    #[test]
    fn rejects_non_beltrami_input() {
        let g = grid();
        let bad = BeltramiComponent::new(
            Shell::new(1, 1).unwrap(),
            random_solenoidal(g, 4, 5).unwrap(),
        );
        let ok = comp(2, -1, 7);
        assert!(matches!(
            make_double_beltrami(&bad, &ok),
            Err(Error::NotBeltrami { .. })
        ));
    }

    #[test]
    fn verify_on_zero_and_random() {
        let g = grid();
        let z = SpectralVectorField::zeros(g);
        assert_eq!(
            verify_double_beltrami(&z, &z, 1.0, -1.0),
            ResidualReport { r1: 0.0, r2: 0.0 }
        );
        let u = random_solenoidal(g, 9, 1).unwrap();
        let b = random_solenoidal(g, 9, 2).unwrap();
        let r = verify_double_beltrami(&u, &b, 2.0, -1.0);
        assert!(r.r1 > 0.1 && r.r2 > 0.1);
    }

    #[test]
    fn classify_two_shells() {
        let c1 = comp(2, 1, 11);
        let c2 = comp(3, -1, 12);
        let st = make_double_beltrami(&c1, &c2).unwrap();
        let rep = classify(&st.u, &st.b, st.spec.alpha, st.spec.beta).unwrap();
        assert!(rep.certified);
        assert!(rep.u.complement <= 1e-10);
        let total = st.u.energy();
        assert!((rep.u.shares[0].fraction - c1.field.energy() / total).abs() < 1e-12);
        assert!((rep.u.shares[1].fraction - c2.field.energy() / total).abs() < 1e-12);
    }

    #[test]
    fn classify_degenerate_single_shell() {
        let c = comp(4, 1, 4);
        let st = make_double_beltrami(
            &c,
            &BeltramiComponent::new(c.shell, SpectralVectorField::zeros(grid())),
        )
        .unwrap();
        assert!(st.spec.degenerate);
        assert!((st.spec.alpha - 3.0).abs() < 1e-14 && (st.spec.beta - 1.0).abs() < 1e-14);
        let rep = classify(&st.u, &st.b, 3.0, 1.0).unwrap();
        assert!(rep.degenerate);
        assert_eq!(rep.u.shares.len(), 1);
        assert!((rep.u.shares[0].fraction - 1.0).abs() < 1e-12);
        assert!(rep.certified);
    }

    #[test]
    fn classify_detects_off_shell_noise() {
        let g = grid();
        let c1 = comp(1, 1, 21);
        let c2 = comp(2, -1, 22);
        let st = make_double_beltrami(&c1, &c2).unwrap();
        let noise = random_solenoidal(g, 16, 3)
            .unwrap()
            .scale(0.01 * st.u.norm_l2());
        let u = st.u.add(&noise);
        let rep = classify(&u, &st.b, st.spec.alpha, st.spec.beta).unwrap();
        assert!(!rep.certified);
        assert!(
            rep.u.complement > 1e-5 && rep.u.complement < 1e-3,
            "{}",
            rep.u.complement
        );
    }

    #[test]
    fn classify_rejects_small_gap() {
        let z = SpectralVectorField::zeros(grid());
        assert!(matches!(
            classify(&z, &z, 1.0, 0.0),
            Err(Error::ClassificationGap { .. })
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(16))]

            #[test]
            fn scaling_preserves_residuals(seed in 0u64..1000, c in -5.0f64..5.0) {
                prop_assume!(c.abs() > 1e-3);
                let st = make_double_beltrami(&comp(1, 1, seed), &comp(2, -1, seed + 1)).unwrap();
                let sc = st.scaled(c);
                prop_assert!(sc.u.sub(&st.u.scale(c)).norm_l2() == 0.0);
                let r = verify_double_beltrami(&sc.u, &sc.b, st.spec.alpha, st.spec.beta);
                prop_assert!(r.max() <= 1e-10);
                let rebuilt = make_double_beltrami(&comp(1, 1, seed).scaled_by(c), &comp(2, -1, seed + 1).scaled_by(c)).unwrap();
                prop_assert!(rebuilt.b.sub(&sc.b).norm_l2() <= 1e-13 * sc.b.norm_l2());
            }

            #[test]
            fn superposition_is_closed(s1 in 0u64..1000, s2 in 0u64..1000) {
                let a = make_double_beltrami(&comp(3, 1, s1), &comp(1, -1, s1 + 7)).unwrap();
                let b = make_double_beltrami(&comp(3, 1, s2), &comp(1, -1, s2 + 7)).unwrap();
                let sum = a.superpose(&b).unwrap();
                let r = verify_double_beltrami(&sum.u, &sum.b, sum.spec.alpha, sum.spec.beta);
                prop_assert!(r.max() <= 1e-10);
                let rep = classify(&sum.u, &sum.b, sum.spec.alpha, sum.spec.beta).unwrap();
                prop_assert!(rep.u.complement <= 1e-12);
            }
        }

        impl BeltramiComponent {
            fn scaled_by(&self, c: f64) -> Self {
                Self::new(self.shell, self.field.scale(c))
            }
        }
    }
}

//! Energy minimization under magnetic and magneto-vorticity helicity
//! constraints.
//!
//! * Woltjer: minimize `||B||^2` with `H_B(B) = h1`.
//! * Fixed vorticity: minimize `||B||^2` with `H_B = h1` and `H_{B+omega} = h2`
//!   for a prescribed `omega = curl u`.
//! * Full: minimize `||u||^2 + ||B||^2` over `(u, B)` with both constraints.
//!
//! Gradients: `dH_B/dB = 2A`, `dH_{B+omega}/dB = 2(A + u)`,
//! `dH_{B+omega}/du = 2(B + omega)`, with `A` the mean-zero potential of `B`.

mod manifold;

use crate::diagnostics::{magnetic_helicity, magneto_vorticity_helicity};
use crate::error::{Error, Result};
use crate::fields::random_solenoidal;
use crate::spectral::ops::invert_curl_unchecked;
use crate::spectral::{curl_hat, GridSpec, SpectralVectorField};
use manifold::{descend, Constraints, Point, Settings};

/// Relative constraint tolerance at return.
pub const CONSTRAINT_TOL: f64 = 1e-8;
/// Stationarity tolerance for a converged result.
pub const KKT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 100_000;
/// Initial fields live on `0 < |k|^2 <= INIT_BAND`.
pub const INIT_BAND: u32 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinimizeMode {
    Woltjer,
    FixedOmega,
    Full,
}

/// Helicity targets; `h2` is required by the two-constraint modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintTarget {
    pub h1: f64,
    pub h2: Option<f64>,
    pub mode: MinimizeMode,
}

impl ConstraintTarget {
    pub fn new(h1: f64, h2: Option<f64>, mode: MinimizeMode) -> Result<Self> {
        if !(h1.is_finite() && h1 != 0.0) {
            return Err(Error::InvalidInput(format!(
                "h1 must be finite and nonzero, got {h1}"
            )));
        }
        if mode != MinimizeMode::Woltjer {
            match h2 {
                Some(h) if h.is_finite() && h != 0.0 => {}
                other => {
                    return Err(Error::InvalidInput(format!(
                        "h2 must be finite and nonzero, got {other:?}"
                    )));
                }
            }
        }
        Ok(Self { h1, h2, mode })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinimizerStatus {
    Converged,
    NotConverged,
}

#[derive(Debug, Clone)]
pub struct MinimizerResult {
    pub b: SpectralVectorField,
    /// Present for the full problem.
    pub u: Option<SpectralVectorField>,
    /// `[lambda]` (Woltjer) or `[lambda1, lambda2]`, from least squares on the final fields.
    pub multipliers: Vec<f64>,
    pub energy: f64,
    /// Largest entry of `kkt_residuals`.
    pub kkt_residual: f64,
    pub kkt_residuals: Vec<f64>,
    /// `|H - h| / |h|` per constraint.
    pub constraint_residuals: Vec<f64>,
    pub iterations: usize,
    pub status: MinimizerStatus,
    /// Energy after every accepted iteration, starting from the initial point.
    pub energy_history: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct MinimizeOptions {
    pub max_iter: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

fn settings(opts: MinimizeOptions) -> Settings {
    Settings {
        max_iter: opts.max_iter,
        tangent_tol: 1e-10,
        restore_tol: 1e-14,
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// `B(x) -> -B(-x)`, which reverses every helicity.
fn parity_flip(f: &SpectralVectorField) -> SpectralVectorField {
    f.map(|_, v| -v.conj())
}

/// Two-column least squares `min ||y - c0 x0 - c1 x1||`, pseudo-inverse on rank loss.
fn least_squares2(
    y: &SpectralVectorField,
    x0: &SpectralVectorField,
    x1: &SpectralVectorField,
) -> ([f64; 2], f64) {
    let g = [[x0.inner(x0), x0.inner(x1)], [x1.inner(x0), x1.inner(x1)]];
    let r = [x0.inner(y), x1.inner(y)];
    let c = manifold::gram_solve(&g, &r, 2);
    let res = y.axpy(-c[0], x0).axpy(-c[1], x1).norm_l2();
    (c, res)
}

struct WoltjerCons;

impl Constraints for WoltjerCons {
    fn values(&self, x: &[SpectralVectorField]) -> Vec<f64> {
        vec![invert_curl_unchecked(&x[0]).inner(&x[0])]
    }

    fn gradients(&self, x: &[SpectralVectorField]) -> Vec<Point> {
        vec![vec![invert_curl_unchecked(&x[0]).scale(2.0)]]
    }
}

struct FixedOmegaCons {
    u: SpectralVectorField,
    uw: f64,
}

impl Constraints for FixedOmegaCons {
    fn values(&self, x: &[SpectralVectorField]) -> Vec<f64> {
        let hb = invert_curl_unchecked(&x[0]).inner(&x[0]);
        vec![hb, hb + 2.0 * self.u.inner(&x[0]) + self.uw]
    }

    fn gradients(&self, x: &[SpectralVectorField]) -> Vec<Point> {
        let a2 = invert_curl_unchecked(&x[0]).scale(2.0);
        let au2 = a2.axpy(2.0, &self.u);
        vec![vec![a2], vec![au2]]
    }
}

/// Unknowns ordered `[u, B]`.
struct FullCons;

impl Constraints for FullCons {
    fn values(&self, x: &[SpectralVectorField]) -> Vec<f64> {
        let (u, b) = (&x[0], &x[1]);
        let a = invert_curl_unchecked(b);
        let hb = a.inner(b);
        vec![hb, a.add(u).inner(&b.add(&curl_hat(u)))]
    }

    fn gradients(&self, x: &[SpectralVectorField]) -> Vec<Point> {
        let (u, b) = (&x[0], &x[1]);
        let a = invert_curl_unchecked(b);
        let zero = SpectralVectorField::zeros(u.grid());
        vec![
            vec![zero, a.scale(2.0)],
            vec![b.add(&curl_hat(u)).scale(2.0), a.add(u).scale(2.0)],
        ]
    }
}

/// Random band-limited field whose helicity has the sign of `want`.
fn signed_random(grid: GridSpec, seed: u64, want: f64) -> Result<SpectralVectorField> {
    let r = random_solenoidal(grid, INIT_BAND, seed)?;
    let h = magnetic_helicity(&r)?;
    Ok(if h * want < 0.0 { parity_flip(&r) } else { r })
}

fn grid_for_band(grid: GridSpec) -> Result<()> {
    if grid.dealias_cutoff() < 3 {
        return Err(Error::InvalidInput(format!(
            "grid n = {} is too small for the initial band |k|^2 <= {INIT_BAND}",
            grid.n()
        )));
    }
    Ok(())
}

/// `lambda = <curl B, B>/<B, B>` and `||curl B - lambda B|| / ||curl B||`.
pub fn woltjer_certificate(b: &SpectralVectorField) -> (f64, f64) {
    let j = curl_hat(b);
    let lambda = ratio(j.inner(b), b.inner(b));
    (lambda, ratio(j.axpy(-lambda, b).norm_l2(), j.norm_l2()))
}

/// Least-squares `(l1, l2)` for `curl B - l1 B - l2 (B + omega)` and its relative residual.
pub fn fixed_omega_certificate(
    b: &SpectralVectorField,
    omega: &SpectralVectorField,
) -> ([f64; 2], f64) {
    let j = curl_hat(b);
    let (c, res) = least_squares2(&j, b, &b.add(omega));
    (c, ratio(res, j.norm_l2()))
}

/// Multipliers and residuals of `u = lambda2 (B + omega)` and `u - J = -lambda1 B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullStationarity {
    pub lambda1: f64,
    pub lambda2: f64,
    /// `||u - lambda2 (B + omega)|| / ||u||`.
    pub velocity_residual: f64,
    /// `||u - J + lambda1 B|| / ||u - J||`.
    pub current_residual: f64,
}

pub fn full_stationarity(u: &SpectralVectorField, b: &SpectralVectorField) -> FullStationarity {
    let w = curl_hat(u);
    let j = curl_hat(b);
    let bw = b.add(&w);
    let lambda2 = ratio(u.inner(&bw), bw.inner(&bw));
    let uj = u.sub(&j);
    // u - J = -lambda1 B  =>  lambda1 = -<u - J, B>/<B, B>
    let lambda1 = -ratio(uj.inner(b), b.inner(b));
    FullStationarity {
        lambda1,
        lambda2,
        velocity_residual: ratio(u.axpy(-lambda2, &bw).norm_l2(), u.norm_l2()),
        current_residual: ratio(uj.axpy(lambda1, b).norm_l2(), uj.norm_l2()),
    }
}

fn rel_residuals(values: &[f64], targets: &[f64]) -> Vec<f64> {
    values
        .iter()
        .zip(targets)
        .map(|(v, h)| (v - h).abs() / h.abs())
        .collect()
}

fn status(constraints: &[f64], kkt: f64) -> MinimizerStatus {
    if constraints.iter().all(|&r| r <= CONSTRAINT_TOL) && kkt <= KKT_TOL {
        MinimizerStatus::Converged
    } else {
        MinimizerStatus::NotConverged
    }
}

/// Minimizes `||B||^2` subject to `H_B(B) = h1`.
pub fn minimize_woltjer(
    h1: f64,
    grid: GridSpec,
    seed: u64,
    opts: MinimizeOptions,
) -> Result<MinimizerResult> {
    ConstraintTarget::new(h1, None, MinimizeMode::Woltjer)?;
    grid_for_band(grid)?;
    let r = signed_random(grid, seed, h1)?;
    let hr = magnetic_helicity(&r)?;
    let b0 = r.scale((h1 / hr).sqrt());
    woltjer_from(b0, h1, opts)
}

fn woltjer_from(
    b0: SpectralVectorField,
    h1: f64,
    opts: MinimizeOptions,
) -> Result<MinimizerResult> {
    let targets = [h1];
    let out = descend(&WoltjerCons, vec![b0], &targets, settings(opts));
    let b = out.x.into_iter().next().expect("one field");
    let (lambda, kkt) = woltjer_certificate(&b);
    let cres = rel_residuals(&WoltjerCons.values(std::slice::from_ref(&b)), &targets);
    Ok(MinimizerResult {
        energy: b.energy(),
        status: status(&cres, kkt),
        b,
        u: None,
        multipliers: vec![lambda],
        kkt_residual: kkt,
        kkt_residuals: vec![kkt],
        constraint_residuals: cres,
        iterations: out.iterations,
        energy_history: out.history,
    })
}

/// Feasible start for the fixed-vorticity problem: `B = x R + y u` with
/// `R` orthogonal to `u` and `y` fixed by the linear constraint `<u, B> = c`.
fn fixed_omega_start(
    grid: GridSpec,
    u: &SpectralVectorField,
    h1: f64,
    c: f64,
    seed: u64,
) -> Result<SpectralVectorField> {
    let uu = u.energy();
    let y = c / uu;
    let au = invert_curl_unchecked(u);
    let hu = au.inner(u);
    let target = h1 - y * y * hu;
    let base = random_solenoidal(grid, INIT_BAND, seed)?;
    for cand in [base.clone(), parity_flip(&base)] {
        let r = cand.axpy(-cand.inner(u) / uu, u);
        let a = invert_curl_unchecked(&r).inner(&r);
        if a * target <= 0.0 && target != 0.0 {
            continue;
        }
        // a x^2 + 2 y <R, A_u> x + (y^2 H(u) - h1) = 0
        let bq = y * r.inner(&au);
        let disc = bq * bq + a * target;
        if disc < 0.0 || a == 0.0 {
            continue;
        }
        let x = (-bq + disc.sqrt()) / a;
        return Ok(r.scale(x).axpy(y, u));
    }
    Err(Error::InfeasibleTargets(format!(
        "no starting field reaches H_B = {h1} with <u, B> = {c}"
    )))
}

/// Minimizes `||B||^2` subject to `H_B(B) = h1` and `H_{B+omega}(B) = h2`.
pub fn minimize_fixed_omega(
    omega: &SpectralVectorField,
    h1: f64,
    h2: f64,
    grid: GridSpec,
    seed: u64,
    opts: MinimizeOptions,
) -> Result<MinimizerResult> {
    ConstraintTarget::new(h1, Some(h2), MinimizeMode::FixedOmega)?;
    grid_for_band(grid)?;
    if omega.grid() != grid {
        return Err(Error::GridMismatch {
            expected: grid.n(),
            found: omega.grid().n(),
        });
    }
    if !omega.has_zero_mean() || omega.divergence_residual() > 1e-8 {
        return Err(Error::InvalidInput(
            "omega must be a mean-zero solenoidal curl".into(),
        ));
    }
    let u = invert_curl_unchecked(omega);
    let uw = u.inner(omega);
    if u.energy() == 0.0 {
        // H_{B+omega} = H_B: the second constraint repeats the first
        if (h2 - h1).abs() > CONSTRAINT_TOL * h1.abs() {
            return Err(Error::InfeasibleTargets(format!(
                "omega = 0 forces h2 = h1, got h1 = {h1}, h2 = {h2}"
            )));
        }
        let mut r = minimize_woltjer(h1, grid, seed, opts)?;
        r.constraint_residuals.push(r.constraint_residuals[0]);
        let (l, kkt) = fixed_omega_certificate(&r.b, omega);
        r.multipliers = l.to_vec();
        r.kkt_residual = kkt;
        r.kkt_residuals = vec![kkt];
        r.status = status(&r.constraint_residuals, kkt);
        return Ok(r);
    }
    let c = (h2 - h1 - uw) / 2.0;
    let b0 = fixed_omega_start(grid, &u, h1, c, seed)?;
    let cons = FixedOmegaCons { u, uw };
    let targets = [h1, h2];
    if manifold::restore(
        &cons,
        &[b0.clone()],
        &cons.gradients(&[b0.clone()]),
        &targets,
        1e-14,
    )
    .is_none()
    {
        return Err(Error::InfeasibleTargets(
            "constraint restoration stalled at the start".into(),
        ));
    }
    let out = descend(&cons, vec![b0], &targets, settings(opts));
    let b = out.x.into_iter().next().expect("one field");
    let (l, kkt) = fixed_omega_certificate(&b, omega);
    let cres = rel_residuals(&cons.values(std::slice::from_ref(&b)), &targets);
    Ok(MinimizerResult {
        energy: b.energy(),
        status: status(&cres, kkt),
        b,
        u: None,
        multipliers: l.to_vec(),
        kkt_residual: kkt,
        kkt_residuals: vec![kkt],
        constraint_residuals: cres,
        iterations: out.iterations,
        energy_history: out.history,
    })
}

/// Feasible start for the full problem: `B` scaled to `h1`, then `u` scaled
/// by a root of `h1 + 2 s <u, B> + s^2 <u, omega> = h2`.
fn full_start(
    grid: GridSpec,
    h1: f64,
    h2: f64,
    seed: u64,
) -> Result<(SpectralVectorField, SpectralVectorField)> {
    let r = signed_random(grid, seed, h1)?;
    let b = r.scale((h1 / magnetic_helicity(&r)?).sqrt());
    let want = if h2 == h1 { 1.0 } else { h2 - h1 };
    let v = signed_random(grid, seed.wrapping_add(0x9e37_79b9_7f4a_7c15), want)?;
    let p = v.inner(&curl_hat(&v));
    let q = v.inner(&b);
    // p s^2 + 2 q s + (h1 - h2) = 0
    let disc = q * q - p * (h1 - h2);
    if p == 0.0 || disc < 0.0 {
        return Err(Error::InfeasibleTargets(format!(
            "no starting pair reaches h1 = {h1}, h2 = {h2}"
        )));
    }
    let s1 = (-q + disc.sqrt()) / p;
    let s2 = (-q - disc.sqrt()) / p;
    let s = if s1.abs() >= s2.abs() { s1 } else { s2 };
    Ok((v.scale(s), b))
}

/// Best-effort descent of `||u||^2 + ||B||^2` with both helicities fixed.
pub fn minimize_full(
    h1: f64,
    h2: f64,
    grid: GridSpec,
    seed: u64,
    opts: MinimizeOptions,
) -> Result<MinimizerResult> {
    ConstraintTarget::new(h1, Some(h2), MinimizeMode::Full)?;
    grid_for_band(grid)?;
    let (u0, b0) = full_start(grid, h1, h2, seed)?;
    minimize_full_from(u0, b0, h1, h2, opts)
}

/// [`minimize_full`] from a caller-supplied starting pair.
pub fn minimize_full_from(
    u0: SpectralVectorField,
    b0: SpectralVectorField,
    h1: f64,
    h2: f64,
    opts: MinimizeOptions,
) -> Result<MinimizerResult> {
    ConstraintTarget::new(h1, Some(h2), MinimizeMode::Full)?;
    u0.check_grid(&b0)?;
    if !b0.has_zero_mean() || !u0.has_zero_mean() {
        return Err(Error::InvalidInput(
            "starting fields must have zero mean".into(),
        ));
    }
    let targets = [h1, h2];
    let x0 = vec![u0, b0];
    let start = FullCons.values(&x0);
    let x0 = if rel_residuals(&start, &targets).iter().all(|&r| r <= 1e-14) {
        x0
    } else {
        manifold::restore(&FullCons, &x0, &FullCons.gradients(&x0), &targets, 1e-14).ok_or_else(
            || Error::InfeasibleTargets("constraint restoration stalled at the start".into()),
        )?
    };
    let out = descend(&FullCons, x0, &targets, settings(opts));
    let mut it = out.x.into_iter();
    let (u, b) = (it.next().expect("u"), it.next().expect("B"));
    let st = full_stationarity(&u, &b);
    let cres = rel_residuals(&FullCons.values(&[u.clone(), b.clone()]), &targets);
    let kkt = st.velocity_residual.max(st.current_residual);
    Ok(MinimizerResult {
        energy: u.energy() + b.energy(),
        status: status(&cres, kkt),
        b,
        u: Some(u),
        multipliers: vec![st.lambda1, st.lambda2],
        kkt_residual: kkt,
        kkt_residuals: vec![st.velocity_residual, st.current_residual],
        constraint_residuals: cres,
        iterations: out.iterations,
        energy_history: out.history,
    })
}

/// Magneto-vorticity helicity for callers measuring targets from known fields.
pub fn measure_targets(u: &SpectralVectorField, b: &SpectralVectorField) -> Result<(f64, f64)> {
    Ok((magnetic_helicity(b)?, magneto_vorticity_helicity(u, b)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{
        alpha_beta, make_double_beltrami, shell_field, BeltramiComponent, Shell, ShellAmplitudes,
    };
    use crate::spectral::{helical_decompose, invert_curl, BOX_VOLUME};
    use manifold::dot;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid() -> GridSpec {
        GridSpec::new(16).unwrap()
    }

    fn quick() -> MinimizeOptions {
        MinimizeOptions { max_iter: 20_000 }
    }

    fn shell(n: u32, s: i8, seed: u64) -> SpectralVectorField {
        shell_field(
            Shell::new(n, s).unwrap(),
            &ShellAmplitudes::Seeded(seed),
            grid(),
        )
        .unwrap()
    }

    #[test]
    fn woltjer_positive_helicity() {
        let h1 = 3.0 * BOX_VOLUME;
        let r = minimize_woltjer(h1, grid(), 1, quick()).unwrap();
        assert_eq!(r.status, MinimizerStatus::Converged, "{r:?}");
        assert!((r.energy - h1).abs() <= 1e-6 * h1);
        assert!((r.multipliers[0] - 1.0).abs() < 1e-6);
        assert!(r.energy_history.windows(2).all(|w| w[1] <= w[0]));
        // shell purity: helical energy off |k| = 1, + sector
        let h = helical_decompose(&r.b).unwrap();
        let on = h.shell_energy(1, 1);
        assert!((h.energy() - on) / h.energy() <= 1e-8);
    }

    #[test]
    fn woltjer_negative_helicity_and_seed_independence() {
        let h1 = -2.0;
        let a = minimize_woltjer(h1, grid(), 3, quick()).unwrap();
        let b = minimize_woltjer(h1, grid(), 4, quick()).unwrap();
        for r in [&a, &b] {
            assert_eq!(r.status, MinimizerStatus::Converged);
            assert!((r.multipliers[0] + 1.0).abs() < 1e-6);
            assert!((r.energy - 2.0).abs() < 1e-6 * 2.0);
        }
        assert!((a.energy - b.energy).abs() <= 1e-6 * a.energy);
    }

    #[test]
    fn zero_targets_rejected() {
        assert!(matches!(
            minimize_woltjer(0.0, grid(), 1, quick()),
            Err(Error::InvalidInput(_))
        ));
        let z = SpectralVectorField::zeros(grid());
        assert!(matches!(
            minimize_fixed_omega(&z, 1.0, 0.0, grid(), 1, quick()),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            minimize_full(1.0, 0.0, grid(), 1, quick()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn fixed_omega_zero_reduces_to_woltjer() {
        let z = SpectralVectorField::zeros(grid());
        let w = minimize_woltjer(5.0, grid(), 7, quick()).unwrap();
        let f = minimize_fixed_omega(&z, 5.0, 5.0, grid(), 7, quick()).unwrap();
        assert_eq!(f.status, MinimizerStatus::Converged);
        assert!((f.energy - w.energy).abs() <= 1e-10 * w.energy);
        assert!(matches!(
            minimize_fixed_omega(&z, 5.0, 6.0, grid(), 7, quick()),
            Err(Error::InfeasibleTargets(_))
        ));
    }

    #[test]
    fn fixed_omega_round_trip() {
        let c1 = BeltramiComponent::new(Shell::new(1, 1).unwrap(), shell(1, 1, 11));
        let c2 = BeltramiComponent::new(Shell::new(2, -1).unwrap(), shell(2, -1, 12));
        let st = make_double_beltrami(&c1, &c2).unwrap();
        let (h1, h2) = measure_targets(&st.u, &st.b).unwrap();
        let omega = curl_hat(&st.u);
        let r = minimize_fixed_omega(&omega, h1, h2, grid(), 5, quick()).unwrap();
        assert!(
            r.constraint_residuals.iter().all(|&c| c <= CONSTRAINT_TOL),
            "{:?}",
            r.constraint_residuals
        );
        assert!(
            r.energy <= st.b.energy() + 1e-6,
            "{} vs {}",
            r.energy,
            st.b.energy()
        );
        assert!(r.kkt_residual <= KKT_TOL, "kkt {}", r.kkt_residual);
        assert!(r.energy_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn fixed_omega_random_targets_kkt() {
        let g = grid();
        let u = random_solenoidal(g, 4, 21).unwrap();
        let omega = curl_hat(&u);
        let r = minimize_fixed_omega(&omega, 1.5, -0.7, g, 22, quick()).unwrap();
        assert_eq!(
            r.status,
            MinimizerStatus::Converged,
            "{:?} {:?}",
            r.constraint_residuals,
            r.kkt_residual
        );
        // grad E = 2B is a combination of 2A and 2(A + u)
        let a = invert_curl(&r.b).unwrap();
        let (_, res) = least_squares2(&r.b, &a, &a.add(&u));
        assert!(res <= 1e-6 * r.b.norm_l2());
    }

    #[test]
    fn double_beltrami_is_critical_for_full_problem() {
        let c1 = BeltramiComponent::new(Shell::new(1, 1).unwrap(), shell(1, 1, 31));
        let c2 = BeltramiComponent::new(Shell::new(2, -1).unwrap(), shell(2, -1, 32));
        let st = make_double_beltrami(&c1, &c2).unwrap();
        let s = full_stationarity(&st.u, &st.b);
        assert!(s.velocity_residual <= 1e-8 && s.current_residual <= 1e-8);
        let (al, be) = alpha_beta(st.spec.lambda1, st.spec.lambda2);
        assert!((s.lambda2 - 1.0 / al).abs() < 1e-10);
        assert!((s.lambda1 - be).abs() < 1e-10);
        let (h1, h2) = measure_targets(&st.u, &st.b).unwrap();
        let r = minimize_full_from(
            st.u.clone(),
            st.b.clone(),
            h1,
            h2,
            MinimizeOptions { max_iter: 0 },
        )
        .unwrap();
        assert!(r.kkt_residual <= 1e-8);
    }

    #[test]
    fn full_problem_descends() {
        let r = minimize_full(2.0, 3.0, grid(), 41, MinimizeOptions { max_iter: 300 }).unwrap();
        assert!(r.constraint_residuals.iter().all(|&c| c <= CONSTRAINT_TOL));
        assert!(r.energy_history.windows(2).all(|w| w[1] <= w[0]));
        assert!(r.energy_history.len() > 1);
        assert_eq!(r.kkt_residuals.len(), 2);
    }

    #[test]
    fn constraint_gradients_match_finite_differences() {
        let g = grid();
        let u = random_solenoidal(g, 9, 51).unwrap();
        let b = random_solenoidal(g, 9, 52).unwrap();
        let x = vec![u.clone(), b.clone()];
        let vals = |x: &[SpectralVectorField]| FullCons.values(x);
        let grads = FullCons.gradients(&x);
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..20 {
            let du = random_solenoidal(g, 9, rng.random()).unwrap();
            let db = random_solenoidal(g, 9, rng.random()).unwrap();
            let dir = vec![du, db];
            let eps = 1e-4;
            let plus = vals(&manifold::axpy(&x, eps, &dir));
            let minus = vals(&manifold::axpy(&x, -eps, &dir));
            for j in 0..2 {
                let fd = (plus[j] - minus[j]) / (2.0 * eps);
                let an = dot(&grads[j], &dir);
                assert!(
                    (fd - an).abs() <= 1e-6 * an.abs().max(1e-3),
                    "constraint {j}: {fd} vs {an}"
                );
            }
            // energy gradient 2x
            let ep = manifold::energy(&manifold::axpy(&x, eps, &dir));
            let em = manifold::energy(&manifold::axpy(&x, -eps, &dir));
            let an = 2.0 * dot(&x, &dir);
            assert!(((ep - em) / (2.0 * eps) - an).abs() <= 1e-6 * an.abs().max(1e-3));
        }
    }
}

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::{
    curl_hat, forward_pair, inverse_pair, norm2, GridSpec, PhysicalVectorField, SpectralVectorField,
};

/// Viscosity, resistivity and Hall coefficient; all finite and non-negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub nu: f64,
    pub eta: f64,
    pub hall: f64,
}

impl PhysicalParams {
    pub fn new(nu: f64, eta: f64, hall: f64) -> Result<Self> {
        for (name, v) in [("nu", nu), ("eta", eta), ("hall", hall)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(Self { nu, eta, hall })
    }

    pub fn ideal(hall: f64) -> Result<Self> {
        Self::new(0.0, 0.0, hall)
    }
}

/// Time plus velocity and magnetic field in spectral form.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub u: SpectralVectorField,
    pub b: SpectralVectorField,
    pub params: PhysicalParams,
}

impl SimState {
    pub fn new(
        t: f64,
        u: SpectralVectorField,
        b: SpectralVectorField,
        params: PhysicalParams,
    ) -> Result<Self> {
        u.check_grid(&b)?;
        if !t.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite time {t}")));
        }
        Ok(Self { t, u, b, params })
    }

    pub fn grid(&self) -> GridSpec {
        self.u.grid()
    }

    pub fn is_finite(&self) -> bool {
        [&self.u, &self.b].iter().all(|f| {
            f.components()
                .iter()
                .all(|c| c.par_iter().all(|z| z.re.is_finite() && z.im.is_finite()))
        })
    }
}

/// Pointwise `u x omega + J x B` and `(u - h J) x B`.
fn products(
    up: &PhysicalVectorField,
    wp: &PhysicalVectorField,
    bp: &PhysicalVectorField,
    jp: &PhysicalVectorField,
    hall: f64,
) -> (PhysicalVectorField, PhysicalVectorField) {
    let g = up.grid();
    let (u, w, b, j) = (up.raw(), wp.raw(), bp.raw(), jp.raw());
    let comp = |f: &(dyn Fn(usize, usize, usize) -> f64 + Sync)| -> [Vec<f64>; 3] {
        std::array::from_fn(|a| {
            let (p, q) = ((a + 1) % 3, (a + 2) % 3);
            (0..g.len()).into_par_iter().map(|i| f(i, p, q)).collect()
        })
    };
    // (x cross y)_a = x_p y_q - x_q y_p with (a, p, q) cyclic
    let mom = comp(&|i, p, q| {
        u[p][i] * w[q][i] - u[q][i] * w[p][i] + j[p][i] * b[q][i] - j[q][i] * b[p][i]
    });
    let emf = comp(&|i, p, q| {
        (u[p][i] - hall * j[p][i]) * b[q][i] - (u[q][i] - hall * j[q][i]) * b[p][i]
    });
    (
        PhysicalVectorField::from_raw(g, mom),
        PhysicalVectorField::from_raw(g, emf),
    )
}

/// Dealiased nonlinear tendencies `(P[u x omega + J x B], curl((u - h J) x B))`.
/// Both have zero mean; the second is an exact spectral curl.
pub(crate) fn nonlinear(
    u: &SpectralVectorField,
    b: &SpectralVectorField,
    hall: f64,
) -> (SpectralVectorField, SpectralVectorField) {
    let g = u.grid();
    let omega = curl_hat(u);
    let j = curl_hat(b);
    let (up, wp) = inverse_pair(u, &omega);
    let (bp, jp) = inverse_pair(b, &j);
    let (mom, emf) = products(&up, &wp, &bp, &jp, hall);
    let (m, e) = forward_pair(&mom, &emf);
    let zero = [Complex64::default(); 3];
    let du = m.map_vec(|k, v| {
        let k2 = norm2(k);
        if k2 == 0 || !g.is_retained(k) {
            return zero;
        }
        let kf = k.map(|c| c as f64);
        let s = (v[0] * kf[0] + v[1] * kf[1] + v[2] * kf[2]) / k2 as f64;
        [v[0] - s * kf[0], v[1] - s * kf[1], v[2] - s * kf[2]]
    });
    let db = e.map_vec(|k, v| {
        if !g.is_retained(k) {
            return zero;
        }
        let kf = k.map(|c| Complex64::new(0.0, c as f64));
        [
            kf[1] * v[2] - kf[2] * v[1],
            kf[2] * v[0] - kf[0] * v[2],
            kf[0] * v[1] - kf[1] * v[0],
        ]
    });
    (du, db)
}

/// Full spectral tendencies `(du/dt, dB/dt)` including diffusion.
pub fn hall_rhs(state: &SimState) -> (SpectralVectorField, SpectralVectorField) {
    let p = state.params;
    let (du, db) = nonlinear(&state.u, &state.b, p.hall);
    let diff = |f: &SpectralVectorField, n: &SpectralVectorField, c: f64| {
        let lap = f.map(|k, v| v * (-(c * norm2(k) as f64)));
        n.add(&lap)
    };
    (diff(&state.u, &du, p.nu), diff(&state.b, &db, p.eta))
}

/// Advective and whistler limit on the time step:
/// `min(0.5/(k u_max), 0.25/(h k^2 B_max + (eta + nu) k^2))` with `k` the dealias cutoff.
pub fn stability_bound(state: &SimState) -> f64 {
    let kmax = state.grid().dealias_cutoff() as f64;
    let (up, bp) = inverse_pair(&state.u, &state.b);
    let (umax, bmax) = (up.max_abs(), bp.max_abs());
    let p = state.params;
    let adv = if umax > 0.0 {
        0.5 / (kmax * umax)
    } else {
        f64::INFINITY
    };
    let den = p.hall * kmax * kmax * bmax + (p.eta + p.nu) * kmax * kmax;
    let whistler = if den > 0.0 { 0.25 / den } else { f64::INFINITY };
    adv.min(whistler)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{
        abc_flow, make_double_beltrami, random_solenoidal, shell_field, BeltramiComponent, Shell,
        ShellAmplitudes,
    };
    use crate::spectral::{
        cross_physical, dealias, forward_transform, inverse_transform, leray_project,
    };

    fn grid() -> GridSpec {
        GridSpec::new(16).unwrap()
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
    fn double_beltrami_is_steady() {
        let c1 = BeltramiComponent::new(Shell::new(1, 1).unwrap(), shell(1, 1, 1));
        let c2 = BeltramiComponent::new(Shell::new(4, -1).unwrap(), shell(4, -1, 2));
        let st = make_double_beltrami(&c1, &c2).unwrap();
        let s = SimState::new(
            0.0,
            st.u.clone(),
            st.b.clone(),
            PhysicalParams::ideal(1.0).unwrap(),
        )
        .unwrap();
        let (du, db) = hall_rhs(&s);
        // each nonlinear piece is O(|u||omega|); their sum cancels
        let scale = curl_hat(&st.u).norm_l2() + curl_hat(&st.b).norm_l2();
        assert!(du.norm_l2() <= 1e-10 * scale, "{}", du.norm_l2() / scale);
        assert!(db.norm_l2() <= 1e-10 * scale, "{}", db.norm_l2() / scale);
    }

    #[test]
    fn navier_stokes_beltrami_reduction() {
        let g = grid();
        let u = shell(3, 1, 5);
        let p = PhysicalParams::new(0.1, 0.0, 1.0).unwrap();
        let (du, db) =
            hall_rhs(&SimState::new(0.0, u.clone(), SpectralVectorField::zeros(g), p).unwrap());
        assert!(du.sub(&u.scale(-0.3)).norm_l2() < 1e-12 * u.norm_l2());
        // packed transforms share roundoff between the two products
        assert!(db.norm_l2() < 1e-14 * u.norm_l2());
    }

    #[test]
    fn force_free_field_decays_resistively() {
        let g = grid();
        let b = abc_flow(1.0, 0.5, 0.3, 2.0, g).unwrap();
        let p = PhysicalParams::new(0.0, 0.2, 0.0).unwrap();
        let (du, db) =
            hall_rhs(&SimState::new(0.0, SpectralVectorField::zeros(g), b.clone(), p).unwrap());
        assert!(du.norm_l2() < 1e-12 * b.norm_l2());
        assert!(db.sub(&b.scale(-0.8)).norm_l2() < 1e-12 * b.norm_l2());
    }

    #[test]
    fn packed_transforms_match_direct_products() {
        let g = grid();
        let u = random_solenoidal(g, 9, 1).unwrap();
        let b = random_solenoidal(g, 9, 2).unwrap();
        let h = 0.7;
        let (du, db) = nonlinear(&u, &b, h);
        let phys = |f: &SpectralVectorField| inverse_transform(f).unwrap();
        let (pu, pw, pb, pj) = (phys(&u), phys(&curl_hat(&u)), phys(&b), phys(&curl_hat(&b)));
        let mom = forward_transform(&cross_physical(&pu, &pw))
            .add(&forward_transform(&cross_physical(&pj, &pb)));
        let v = forward_transform(&pu).axpy(-h, &forward_transform(&pj));
        let emf = forward_transform(&cross_physical(&phys(&v), &pb));
        let mut du_ref = leray_project(&dealias(&mom));
        du_ref.set_mean([0.0; 3]);
        let db_ref = curl_hat(&dealias(&emf));
        assert!(du.sub(&du_ref).norm_l2() < 1e-12 * du_ref.norm_l2());
        assert!(db.sub(&db_ref).norm_l2() < 1e-12 * db_ref.norm_l2());
        assert_eq!(du.mean(), [0.0; 3]);
        assert_eq!(db.mean(), [0.0; 3]);
        assert!(du.divergence_residual() < 1e-14 && db.divergence_residual() < 1e-14);
    }

    #[test]
    fn stability_bound_formula() {
        let g = grid();
        let u = SpectralVectorField::constant(g, [2.0, 0.0, 0.0]);
        let b = SpectralVectorField::constant(g, [0.0, 0.0, 0.5]);
        let p = PhysicalParams::new(0.1, 0.3, 2.0).unwrap();
        let bound = stability_bound(&SimState::new(0.0, u, b, p).unwrap());
        // k = 5: advective 0.5/10 = 0.05, whistler 0.25/(2*25*0.5 + 0.4*25) = 0.25/35
        assert!((bound - 0.25 / 35.0).abs() < 1e-15);
        let z = SpectralVectorField::zeros(g);
        assert_eq!(
            stability_bound(
                &SimState::new(0.0, z.clone(), z, PhysicalParams::ideal(0.0).unwrap()).unwrap()
            ),
            f64::INFINITY
        );
    }

    #[test]
    fn params_validation() {
        assert!(PhysicalParams::new(-1.0, 0.0, 0.0).is_err());
        assert!(PhysicalParams::new(0.0, f64::NAN, 0.0).is_err());
        assert!(SimState::new(
            0.0,
            SpectralVectorField::zeros(grid()),
            SpectralVectorField::zeros(GridSpec::new(8).unwrap()),
            PhysicalParams::ideal(1.0).unwrap()
        )
        .is_err());
    }

    mod props {
        use super::*;
        use crate::spectral::invert_curl;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(16))]

            // bands up to |k|^2 = 9 keep every product below the grid Nyquist,
            // so the discrete balances are exact up to roundoff
            #[test]
            fn ideal_tendencies_conserve_energy_and_helicity(
                su in 0u64..10_000,
                sb in 0u64..10_000,
                hall in 0.0f64..3.0,
            ) {
                let u = random_solenoidal(grid(), 9, su).unwrap();
                let b = random_solenoidal(grid(), 9, sb).unwrap();
                let (du, db) = nonlinear(&u, &b, hall);
                let scale = u.norm_l2() * du.norm_l2() + b.norm_l2() * db.norm_l2();
                prop_assert!((u.inner(&du) + b.inner(&db)).abs() <= 1e-12 * scale);
                let a = invert_curl(&b).unwrap();
                prop_assert!(a.inner(&db).abs() <= 1e-12 * a.norm_l2() * db.norm_l2());
                // d/dt int (A + u).(B + omega) = 2 int (A + u).(dB + d omega), for h = 1
                let (du, db) = nonlinear(&u, &b, 1.0);
                let d = db.add(&curl_hat(&du));
                let s = a.add(&u);
                prop_assert!(s.inner(&d).abs() <= 1e-12 * s.norm_l2() * d.norm_l2());
            }
        }
    }
}

use rayon::prelude::*;

use super::exact::{compare_to_exact, ExactSolution};
use super::rhs::{nonlinear, stability_bound, PhysicalParams, SimState};
use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::spectral::{leray_project, norm2, GridSpec, SpectralVectorField};

/// Steps between stability re-checks during [`run`].
pub const STABILITY_CHECK_EVERY: usize = 100;

/// Integrating-factor RK4 with diffusion factors precomputed for one `dt`.
///
/// With `E = exp(-L dt)` and `Eh = exp(-L dt/2)` applied per mode:
///
/// ```text
/// k1 = N(y)
/// k2 = N(Eh (y + dt/2 k1))
/// k3 = N(Eh y + dt/2 k2)
/// k4 = N(E y + dt Eh k3)
/// y' = E y + dt/6 (E k1 + 2 Eh (k2 + k3) + k4)
/// ```
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: GridSpec,
    params: PhysicalParams,
    dt: f64,
    eu: Vec<f64>,
    euh: Vec<f64>,
    eb: Vec<f64>,
    ebh: Vec<f64>,
    with_nonlinear: bool,
}

struct Term<'a> {
    c: f64,
    decay: Option<&'a [f64]>,
    f: &'a SpectralVectorField,
}

fn term<'a>(c: f64, decay: Option<&'a [f64]>, f: &'a SpectralVectorField) -> Term<'a> {
    Term { c, decay, f }
}

/// `sum_t c_t decay_t f_t`, evaluated mode by mode in a fixed order.
fn combine(grid: GridSpec, terms: &[Term]) -> SpectralVectorField {
    let comps = std::array::from_fn(|a| {
        (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let mut acc = terms[0].f.component(a)[i]
                    * (terms[0].c * terms[0].decay.map_or(1.0, |d| d[i]));
                for t in &terms[1..] {
                    acc += t.f.component(a)[i] * (t.c * t.decay.map_or(1.0, |d| d[i]));
                }
                acc
            })
            .collect()
    });
    SpectralVectorField::from_components(grid, comps).expect("matching sizes")
}

impl Stepper {
    pub fn new(grid: GridSpec, params: PhysicalParams, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidTimeStep(dt));
        }
        let factors = |c: f64, tau: f64| -> Vec<f64> {
            (0..grid.len())
                .into_par_iter()
                .map(|i| (-c * norm2(grid.wavevector(i)) as f64 * tau).exp())
                .collect()
        };
        Ok(Self {
            grid,
            params,
            dt,
            eu: factors(params.nu, dt),
            euh: factors(params.nu, dt / 2.0),
            eb: factors(params.eta, dt),
            ebh: factors(params.eta, dt / 2.0),
            with_nonlinear: true,
        })
    }

    /// Drops the nonlinear tendencies, leaving exact diffusion.
    pub fn linear_only(mut self) -> Self {
        self.with_nonlinear = false;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn rhs(
        &self,
        u: &SpectralVectorField,
        b: &SpectralVectorField,
    ) -> (SpectralVectorField, SpectralVectorField) {
        if self.with_nonlinear {
            nonlinear(u, b, self.params.hall)
        } else {
            (
                SpectralVectorField::zeros(self.grid),
                SpectralVectorField::zeros(self.grid),
            )
        }
    }

    /// Advances by `dt`; reality and solenoidality are re-imposed afterwards.
    pub fn step(&self, s: &SimState) -> Result<SimState> {
        if s.grid() != self.grid {
            return Err(Error::GridMismatch {
                expected: self.grid.n(),
                found: s.grid().n(),
            });
        }
        let g = self.grid;
        let dt = self.dt;
        let (eu, euh, eb, ebh) = (&self.eu[..], &self.euh[..], &self.eb[..], &self.ebh[..]);
        let (u, b) = (&s.u, &s.b);

        let (k1u, k1b) = self.rhs(u, b);
        let ua = combine(
            g,
            &[term(1.0, Some(euh), u), term(dt / 2.0, Some(euh), &k1u)],
        );
        let ba = combine(
            g,
            &[term(1.0, Some(ebh), b), term(dt / 2.0, Some(ebh), &k1b)],
        );
        let (k2u, k2b) = self.rhs(&ua, &ba);
        let ub = combine(g, &[term(1.0, Some(euh), u), term(dt / 2.0, None, &k2u)]);
        let bb = combine(g, &[term(1.0, Some(ebh), b), term(dt / 2.0, None, &k2b)]);
        let (k3u, k3b) = self.rhs(&ub, &bb);
        let uc = combine(g, &[term(1.0, Some(eu), u), term(dt, Some(euh), &k3u)]);
        let bc = combine(g, &[term(1.0, Some(eb), b), term(dt, Some(ebh), &k3b)]);
        let (k4u, k4b) = self.rhs(&uc, &bc);
        let mut un = combine(
            g,
            &[
                term(1.0, Some(eu), u),
                term(dt / 6.0, Some(eu), &k1u),
                term(dt / 3.0, Some(euh), &k2u),
                term(dt / 3.0, Some(euh), &k3u),
                term(dt / 6.0, None, &k4u),
            ],
        );
        let mut bn = combine(
            g,
            &[
                term(1.0, Some(eb), b),
                term(dt / 6.0, Some(eb), &k1b),
                term(dt / 3.0, Some(ebh), &k2b),
                term(dt / 3.0, Some(ebh), &k3b),
                term(dt / 6.0, None, &k4b),
            ],
        );
        un.enforce_reality();
        bn.enforce_reality();
        let next = SimState {
            t: s.t + dt,
            u: leray_project(&un),
            b: leray_project(&bn),
            params: s.params,
        };
        if !next.is_finite() {
            return Err(Error::BlowupDetected { t: next.t });
        }
        Ok(next)
    }
}

/// One integrating-factor RK4 step; `dt` must respect [`stability_bound`].
pub fn step(state: &SimState, dt: f64) -> Result<SimState> {
    let bound = stability_bound(state);
    if dt > bound {
        return Err(Error::StabilityViolated {
            dt,
            bound,
            t: state.t,
        });
    }
    Stepper::new(state.grid(), state.params, dt)?.step(state)
}

/// What [`run`] measures at each record.
#[derive(Debug, Clone, Copy)]
pub struct Observer<'a> {
    /// Steps between records (at least 1).
    pub record_every: usize,
    /// Beltrami factors for the `Phi`/`Psi` columns.
    pub factors: Option<(f64, f64)>,
    /// Reference solution for the error columns.
    pub exact: Option<&'a ExactSolution>,
}

impl Default for Observer<'_> {
    fn default() -> Self {
        Self {
            record_every: 1,
            factors: None,
            exact: None,
        }
    }
}

impl Observer<'_> {
    pub fn measure(&self, s: &SimState) -> Result<DiagnosticsRecord> {
        let errors = match self.exact {
            Some(sol) => Some(compare_to_exact(s, sol)?),
            None => None,
        };
        Ok(DiagnosticsRecord::measure(
            s.t,
            &s.u,
            &s.b,
            self.factors,
            errors,
        ))
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: SimState,
    pub records: Vec<DiagnosticsRecord>,
}

/// Progress reported to a [`run_with`] callback after every step.
pub struct StepEvent<'a> {
    /// Steps taken so far in this run.
    pub step: usize,
    pub state: &'a SimState,
    pub record: Option<&'a DiagnosticsRecord>,
}

/// Integrates to `t_end` with fixed `dt`, shortening only the final step.
///
/// The callback sees the initial state (step 0) and every step after it;
/// records are produced every `record_every` steps and at `t_end`. The time
/// step is checked against [`stability_bound`] at the start and every
/// [`STABILITY_CHECK_EVERY`] steps.
pub fn run_with(
    state: SimState,
    t_end: f64,
    dt: f64,
    obs: &Observer,
    mut on_step: impl FnMut(StepEvent) -> Result<()>,
) -> Result<SimState> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidTimeStep(dt));
    }
    if !(t_end.is_finite() && t_end >= state.t) {
        return Err(Error::NegativeTime(t_end - state.t));
    }
    if obs.record_every == 0 {
        return Err(Error::InvalidInput(
            "record_every must be at least 1".into(),
        ));
    }
    let t0 = state.t;
    let span = t_end - t0;
    // full steps, then a remainder when t_end is not on the dt lattice
    let mut full = (span / dt).floor() as usize;
    let mut rem = span - full as f64 * dt;
    if rem <= 1e-9 * dt {
        rem = 0.0;
    } else if dt - rem <= 1e-9 * dt {
        full += 1;
        rem = 0.0;
    }
    let total = full + usize::from(rem > 0.0);

    let check = |s: &SimState, h: f64| -> Result<()> {
        let bound = stability_bound(s);
        if h > bound {
            Err(Error::StabilityViolated {
                dt: h,
                bound,
                t: s.t,
            })
        } else {
            Ok(())
        }
    };
    check(&state, dt)?;
    let first = obs.measure(&state)?;
    on_step(StepEvent {
        step: 0,
        state: &state,
        record: Some(&first),
    })?;

    let stepper = Stepper::new(state.grid(), state.params, dt)?;
    let mut s = state;
    for n in 1..=total {
        let mut next = if n <= full {
            stepper.step(&s)?
        } else {
            Stepper::new(s.grid(), s.params, rem)?.step(&s)?
        };
        next.t = if n == total {
            t_end
        } else {
            t0 + n as f64 * dt
        };
        s = next;
        if n % STABILITY_CHECK_EVERY == 0 && n < total {
            check(&s, dt)?;
        }
        let rec = if n % obs.record_every == 0 || n == total {
            Some(obs.measure(&s)?)
        } else {
            None
        };
        on_step(StepEvent {
            step: n,
            state: &s,
            record: rec.as_ref(),
        })?;
    }
    Ok(s)
}

/// [`run_with`] collecting the records.
pub fn run(state: SimState, t_end: f64, dt: f64, obs: &Observer) -> Result<RunOutput> {
    let mut records = Vec::new();
    let state = run_with(state, t_end, dt, obs, |ev| {
        if let Some(r) = ev.record {
            records.push(*r);
        }
        Ok(())
    })?;
    Ok(RunOutput { state, records })
}

use super::rhs::{PhysicalParams, SimState};
use crate::error::{Error, Result};
use crate::fields::DoubleBeltramiState;
use crate::spectral::{curl_hat, SpectralVectorField};

/// Floor on reference norms in [`compare_to_exact`].
pub const ERROR_FLOOR: f64 = 1e-30;

/// Decay factors agree only when `nu == eta`; anything else is refused.
fn require_equal_diffusion(p: PhysicalParams) -> Result<f64> {
    if p.nu != p.eta {
        return Err(Error::NuEtaMismatch {
            nu: p.nu,
            eta: p.eta,
        });
    }
    Ok(p.nu)
}

/// Closed-form solutions of the viscous, resistive Hall system.
#[derive(Debug, Clone)]
pub enum ExactSolution {
    /// `u = exp(-nu lambda^2 t) u0`, `B = 0`.
    Trkalian {
        u0: SpectralVectorField,
        lambda: f64,
        nu: f64,
    },
    /// `u = 0`, `B = exp(-eta lambda^2 t) B0`.
    MhdForceFree {
        b0: SpectralVectorField,
        lambda: f64,
        eta: f64,
    },
    /// Each pair `(u_i, B_i)` decays at `nu lambda_i^2`.
    DoubleBeltramiDistinct {
        parts: [(SpectralVectorField, SpectralVectorField, f64); 2],
        nu: f64,
    },
    /// `f(t) = exp(-nu lambda^2 t) (f0 - 2 nu lambda t (curl f0 - lambda f0))` for `f = u, B`.
    DoubleBeltramiDegenerate {
        u0: SpectralVectorField,
        b0: SpectralVectorField,
        lambda: f64,
        nu: f64,
        corr_u: SpectralVectorField,
        corr_b: SpectralVectorField,
    },
}

impl ExactSolution {
    pub fn trkalian(u0: SpectralVectorField, lambda: f64, nu: f64) -> Self {
        Self::Trkalian { u0, lambda, nu }
    }

    pub fn mhd_force_free(b0: SpectralVectorField, lambda: f64, eta: f64) -> Self {
        Self::MhdForceFree { b0, lambda, eta }
    }

    pub fn distinct(
        first: (SpectralVectorField, SpectralVectorField, f64),
        second: (SpectralVectorField, SpectralVectorField, f64),
        params: PhysicalParams,
    ) -> Result<Self> {
        let nu = require_equal_diffusion(params)?;
        Ok(Self::DoubleBeltramiDistinct {
            parts: [first, second],
            nu,
        })
    }

    /// Caches `curl f0 - lambda f0`, which is zero exactly when `f0` lies on the shell.
    pub fn degenerate(
        u0: SpectralVectorField,
        b0: SpectralVectorField,
        lambda: f64,
        params: PhysicalParams,
    ) -> Result<Self> {
        let nu = require_equal_diffusion(params)?;
        let corr_u = curl_hat(&u0).axpy(-lambda, &u0);
        let corr_b = curl_hat(&b0).axpy(-lambda, &b0);
        Ok(Self::DoubleBeltramiDegenerate {
            u0,
            b0,
            lambda,
            nu,
            corr_u,
            corr_b,
        })
    }

    /// Picks the distinct or degenerate form for a constructed state.
    pub fn double_beltrami(state: &DoubleBeltramiState, params: PhysicalParams) -> Result<Self> {
        let spec = state.spec;
        if spec.degenerate {
            Self::degenerate(state.u.clone(), state.b.clone(), spec.lambda1, params)
        } else {
            Self::distinct(
                (state.u1.clone(), state.b1(), spec.lambda1),
                (state.u2.clone(), state.b2(), spec.lambda2),
                params,
            )
        }
    }

    pub fn exact_at(&self, t: f64) -> Result<(SpectralVectorField, SpectralVectorField)> {
        exact_at(self, t)
    }
}

pub fn exact_at(sol: &ExactSolution, t: f64) -> Result<(SpectralVectorField, SpectralVectorField)> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    Ok(match sol {
        ExactSolution::Trkalian { u0, lambda, nu } => {
            let d = (-nu * lambda * lambda * t).exp();
            (u0.scale(d), SpectralVectorField::zeros(u0.grid()))
        }
        ExactSolution::MhdForceFree { b0, lambda, eta } => {
            let d = (-eta * lambda * lambda * t).exp();
            (SpectralVectorField::zeros(b0.grid()), b0.scale(d))
        }
        ExactSolution::DoubleBeltramiDistinct { parts, nu } => {
            let [(u1, b1, l1), (u2, b2, l2)] = parts;
            let d1 = (-nu * l1 * l1 * t).exp();
            let d2 = (-nu * l2 * l2 * t).exp();
            (u1.scale(d1).axpy(d2, u2), b1.scale(d1).axpy(d2, b2))
        }
        ExactSolution::DoubleBeltramiDegenerate {
            u0,
            b0,
            lambda,
            nu,
            corr_u,
            corr_b,
        } => {
            let d = (-nu * lambda * lambda * t).exp();
            let c = -2.0 * nu * lambda * t * d;
            (u0.scale(d).axpy(c, corr_u), b0.scale(d).axpy(c, corr_b))
        }
    })
}

/// Relative `L^2` errors of `(u, B)` against the reference at `state.t`.
pub fn compare_to_exact(state: &SimState, sol: &ExactSolution) -> Result<(f64, f64)> {
    let (ue, be) = exact_at(sol, state.t)?;
    state.u.check_grid(&ue)?;
    let rel = |x: &SpectralVectorField, r: &SpectralVectorField| {
        x.sub(r).norm_l2() / r.norm_l2().max(ERROR_FLOOR)
    };
    Ok((rel(&state.u, &ue), rel(&state.b, &be)))
}

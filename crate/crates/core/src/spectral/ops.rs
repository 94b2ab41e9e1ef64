use num_complex::Complex64;
use rayon::prelude::*;

use super::field::{ordered_sum_idx, PhysicalVectorField, SpectralVectorField};
use super::grid::{norm2, BOX_VOLUME};
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub(crate) fn cross_c(a: [Complex64; 3], b: [Complex64; 3]) -> [Complex64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn kc(k: [i64; 3]) -> [Complex64; 3] {
    k.map(|c| Complex64::new(c as f64, 0.0))
}

/// Spectral curl: `i k x u(k)`; the mean maps to zero.
pub fn curl_hat(f: &SpectralVectorField) -> SpectralVectorField {
    f.map_vec(|k, v| {
        let c = cross_c(kc(k), v);
        [I * c[0], I * c[1], I * c[2]]
    })
}

/// Removes the gradient part of every nonzero mode; the mean passes through.
pub fn leray_project(f: &SpectralVectorField) -> SpectralVectorField {
    f.map_vec(|k, v| {
        let k2 = norm2(k);
        if k2 == 0 {
            return v;
        }
        let kf = k.map(|c| c as f64);
        let dot = v[0] * kf[0] + v[1] * kf[1] + v[2] * kf[2];
        let s = dot / k2 as f64;
        [v[0] - s * kf[0], v[1] - s * kf[1], v[2] - s * kf[2]]
    })
}

/// Divergence-free, mean-zero vector potential `A` with `curl A = b`.
pub fn invert_curl(b: &SpectralVectorField) -> Result<SpectralVectorField> {
    if !b.has_zero_mean() {
        return Err(Error::NonzeroMeanNoPotential);
    }
    Ok(invert_curl_unchecked(b))
}

/// `i k x b(k) / |k|^2`, ignoring the mean of `b`.
pub(crate) fn invert_curl_unchecked(b: &SpectralVectorField) -> SpectralVectorField {
    b.map_vec(|k, v| {
        let k2 = norm2(k);
        if k2 == 0 {
            return [Complex64::default(); 3];
        }
        let c = cross_c(kc(k), v);
        let s = I / k2 as f64;
        [s * c[0], s * c[1], s * c[2]]
    })
}

/// Zeros every mode with some `|k_i|` above the 2/3 cutoff.
pub fn dealias(f: &SpectralVectorField) -> SpectralVectorField {
    let g = f.grid();
    f.map(|k, v| {
        if g.is_retained(k) {
            v
        } else {
            Complex64::default()
        }
    })
}

/// `sqrt( (2pi)^3 sum_{k!=0} |k|^{2s} |f(k)|^2 + [s >= 0] (2pi)^3 |f(0)|^2 )`.
pub fn sobolev_norm(f: &SpectralVectorField, s: f64) -> Result<f64> {
    if s < 0.0 && !f.has_zero_mean() {
        return Err(Error::NegativeOrderWithMean);
    }
    Ok(homogeneous_sum(f, s, s >= 0.0).sqrt())
}

/// `||f||_{H^s}^2` split as `||f||_{L^2}^2 + ||f||_{\dot H^s}^2` with the mean
/// counted only in the `L^2` part.
pub fn inhomogeneous_norm(f: &SpectralVectorField, s: f64) -> f64 {
    let l2 = f.energy();
    let hs = homogeneous_sum(f, s, false);
    (l2 + hs).sqrt()
}

fn homogeneous_sum(f: &SpectralVectorField, s: f64, with_mean: bool) -> f64 {
    let g = f.grid();
    let total = ordered_sum_idx(g.len(), |idx| {
        let v = f.get(idx);
        let mag2 = v[0].norm_sqr() + v[1].norm_sqr() + v[2].norm_sqr();
        if idx == 0 {
            return if with_mean { mag2 } else { 0.0 };
        }
        let k2 = norm2(g.wavevector(idx)) as f64;
        k2.powf(s) * mag2
    });
    BOX_VOLUME * total
}

/// Pointwise `a x b` in physical space.
pub fn cross_physical(a: &PhysicalVectorField, b: &PhysicalVectorField) -> PhysicalVectorField {
    let (x, y) = (a.raw(), b.raw());
    let len = a.grid().len();
    let mut out: [Vec<f64>; 3] = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    let [o0, o1, o2] = &mut out;
    o0.par_iter_mut()
        .zip(o1.par_iter_mut())
        .zip(o2.par_iter_mut())
        .enumerate()
        .for_each(|(i, ((p, q), r))| {
            *p = x[1][i] * y[2][i] - x[2][i] * y[1][i];
            *q = x[2][i] * y[0][i] - x[0][i] * y[2][i];
            *r = x[0][i] * y[1][i] - x[1][i] * y[0][i];
        });
    PhysicalVectorField::from_raw(a.grid(), out)
}

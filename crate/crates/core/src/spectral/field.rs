use num_complex::Complex64;
use rayon::prelude::*;

use super::fft;
use super::grid::{GridSpec, BOX_VOLUME};
use crate::error::{Error, Result};

/// Real 3-vector field sampled on the grid points of a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalVectorField {
    grid: GridSpec,
    comps: [Vec<f64>; 3],
}

impl PhysicalVectorField {
    pub fn zeros(grid: GridSpec) -> Self {
        let len = grid.len();
        Self {
            grid,
            comps: [vec![0.0; len], vec![0.0; len], vec![0.0; len]],
        }
    }

    pub fn from_components(grid: GridSpec, comps: [Vec<f64>; 3]) -> Result<Self> {
        for c in &comps {
            if c.len() != grid.len() {
                return Err(Error::SizeMismatch {
                    expected: grid.len(),
                    found: c.len(),
                });
            }
        }
        Ok(Self { grid, comps })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 3]) -> [f64; 3] + Sync) -> Self {
        let vals: Vec<[f64; 3]> = (0..grid.len())
            .into_par_iter()
            .map(|idx| f(grid.point(idx)))
            .collect();
        let mut out = Self::zeros(grid);
        for (idx, v) in vals.into_iter().enumerate() {
            for a in 0..3 {
                out.comps[a][idx] = v[a];
            }
        }
        out
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn component(&self, axis: usize) -> &[f64] {
        &self.comps[axis]
    }

    pub fn components(&self) -> &[Vec<f64>; 3] {
        &self.comps
    }

    pub fn at(&self, idx: usize) -> [f64; 3] {
        [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]]
    }

    pub fn max_abs(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| {
                let v = self.at(i);
                (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Grid quadrature of `f . g` over the box (exact for band-limited products).
    pub fn quadrature_dot(&self, other: &Self) -> f64 {
        let w = BOX_VOLUME / self.grid.len() as f64;
        let mut s = 0.0;
        for a in 0..3 {
            s += self.comps[a]
                .iter()
                .zip(&other.comps[a])
                .map(|(x, y)| x * y)
                .sum::<f64>();
        }
        s * w
    }
}

/// Truncated Fourier representation of a real 3-vector field on the torus.
///
/// Coefficients follow `u(x) = sum_k u(k) e^{i k.x}`; the `k = 0` entry is the
/// mean. Every mode of the `n^3` grid is stored, and modes outside the 2/3
/// band are zero for any field produced by this crate's operators.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVectorField {
    grid: GridSpec,
    comps: [Vec<Complex64>; 3],
}

impl SpectralVectorField {
    pub fn zeros(grid: GridSpec) -> Self {
        let len = grid.len();
        let z = Complex64::default();
        Self {
            grid,
            comps: [vec![z; len], vec![z; len], vec![z; len]],
        }
    }

    pub fn from_components(grid: GridSpec, comps: [Vec<Complex64>; 3]) -> Result<Self> {
        for c in &comps {
            if c.len() != grid.len() {
                return Err(Error::SizeMismatch {
                    expected: grid.len(),
                    found: c.len(),
                });
            }
        }
        Ok(Self { grid, comps })
    }

    /// Builds a field mode-by-mode from its wavevector.
    pub fn from_modes(grid: GridSpec, f: impl Fn([i64; 3]) -> [Complex64; 3] + Sync) -> Self {
        let vals: Vec<[Complex64; 3]> = (0..grid.len())
            .into_par_iter()
            .map(|idx| f(grid.wavevector(idx)))
            .collect();
        let mut out = Self::zeros(grid);
        for (idx, v) in vals.into_iter().enumerate() {
            out.set(idx, v);
        }
        out
    }

    /// A constant field.
    pub fn constant(grid: GridSpec, mean: [f64; 3]) -> Self {
        let mut out = Self::zeros(grid);
        out.set_mean(mean);
        out
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn component(&self, axis: usize) -> &[Complex64] {
        &self.comps[axis]
    }

    pub fn component_mut(&mut self, axis: usize) -> &mut [Complex64] {
        &mut self.comps[axis]
    }

    pub fn components(&self) -> &[Vec<Complex64>; 3] {
        &self.comps
    }

    #[inline]
    pub fn get(&self, idx: usize) -> [Complex64; 3] {
        [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]]
    }

    #[inline]
    pub fn set(&mut self, idx: usize, v: [Complex64; 3]) {
        for (a, val) in v.into_iter().enumerate() {
            self.comps[a][idx] = val;
        }
    }

    /// Coefficient at wavevector `k`, zero if it is not representable.
    pub fn at(&self, k: [i64; 3]) -> [Complex64; 3] {
        match self.grid.index_of(k) {
            Some(idx) => self.get(idx),
            None => [Complex64::default(); 3],
        }
    }

    pub fn mean(&self) -> [f64; 3] {
        let m = self.get(0);
        [m[0].re, m[1].re, m[2].re]
    }

    pub fn set_mean(&mut self, mean: [f64; 3]) {
        self.set(0, mean.map(|m| Complex64::new(m, 0.0)));
    }

    pub fn without_mean(&self) -> Self {
        let mut out = self.clone();
        out.set_mean([0.0; 3]);
        out
    }

    /// Euclidean norm of the mean vector.
    pub fn mean_norm(&self) -> f64 {
        let m = self.get(0);
        (m[0].norm_sqr() + m[1].norm_sqr() + m[2].norm_sqr()).sqrt()
    }

    /// Root of the sum of `|u(k)|^2` over all stored modes.
    pub fn coeff_norm(&self) -> f64 {
        self.comps
            .iter()
            .map(|c| ordered_sum(c, |v| v.norm_sqr()))
            .sum::<f64>()
            .sqrt()
    }

    /// True when the mean is negligible against the rest of the field.
    pub fn has_zero_mean(&self) -> bool {
        self.mean_norm() <= 1e-12 * self.coeff_norm().max(f64::MIN_POSITIVE)
            || self.mean_norm() == 0.0
    }

    pub(crate) fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                expected: self.grid.n(),
                found: other.grid.n(),
            });
        }
        Ok(())
    }

    /// `L^2` inner product `int u . v dx` over the box.
    pub fn inner(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        let s: f64 = (0..3)
            .map(|a| {
                let (x, y) = (&self.comps[a], &other.comps[a]);
                ordered_sum_idx(x.len(), |i| (x[i].conj() * y[i]).re)
            })
            .sum();
        BOX_VOLUME * s
    }

    pub fn norm_l2(&self) -> f64 {
        self.inner(self).max(0.0).sqrt()
    }

    pub fn energy(&self) -> f64 {
        self.inner(self)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|_, v| v * c)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |_, x, y| x + y)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |_, x, y| x - y)
    }

    /// `self + c * other`
    pub fn axpy(&self, c: f64, other: &Self) -> Self {
        self.zip_map(other, |_, x, y| x + y * c)
    }

    pub fn add_assign_scaled(&mut self, c: f64, other: &Self) {
        debug_assert_eq!(self.grid, other.grid);
        for a in 0..3 {
            self.comps[a]
                .par_iter_mut()
                .zip(other.comps[a].par_iter())
                .for_each(|(x, y)| *x += y * c);
        }
    }

    /// Applies `f(k, u(k))` to every mode.
    pub fn map(&self, f: impl Fn([i64; 3], Complex64) -> Complex64 + Sync) -> Self {
        let grid = self.grid;
        let comps = std::array::from_fn(|a| {
            self.comps[a]
                .par_iter()
                .enumerate()
                .map(|(idx, &v)| f(grid.wavevector(idx), v))
                .collect()
        });
        Self { grid, comps }
    }

    /// Applies a per-mode vector map.
    pub fn map_vec(&self, f: impl Fn([i64; 3], [Complex64; 3]) -> [Complex64; 3] + Sync) -> Self {
        let grid = self.grid;
        let vals: Vec<[Complex64; 3]> = (0..grid.len())
            .into_par_iter()
            .map(|idx| f(grid.wavevector(idx), self.get(idx)))
            .collect();
        let mut out = Self::zeros(grid);
        for (idx, v) in vals.into_iter().enumerate() {
            out.set(idx, v);
        }
        out
    }

    fn zip_map(
        &self,
        other: &Self,
        f: impl Fn([i64; 3], Complex64, Complex64) -> Complex64 + Sync,
    ) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        let grid = self.grid;
        let comps = std::array::from_fn(|a| {
            self.comps[a]
                .par_iter()
                .zip(other.comps[a].par_iter())
                .enumerate()
                .map(|(idx, (&x, &y))| f(grid.wavevector(idx), x, y))
                .collect()
        });
        Self { grid, comps }
    }

    /// Largest violation of `u(-k) = conj(u(k))`.
    pub fn reality_defect(&self) -> f64 {
        let g = self.grid;
        let mut worst: f64 = 0.0;
        for a in 0..3 {
            for idx in 0..g.len() {
                let m = g.mirror_index(idx);
                worst = worst.max((self.comps[a][m] - self.comps[a][idx].conj()).norm());
            }
        }
        worst
    }

    /// Replaces each pair `(u(k), u(-k))` by its Hermitian average.
    pub fn enforce_reality(&mut self) {
        let g = self.grid;
        for a in 0..3 {
            let src = self.comps[a].clone();
            self.comps[a]
                .par_iter_mut()
                .enumerate()
                .for_each(|(idx, v)| {
                    *v = (src[idx] + src[g.mirror_index(idx)].conj()) * 0.5;
                });
        }
    }

    /// `max_k |k . u(k)| / |k|` relative to the largest coefficient.
    pub fn divergence_residual(&self) -> f64 {
        let g = self.grid;
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for idx in 0..g.len() {
            let v = self.get(idx);
            let mag = (v[0].norm_sqr() + v[1].norm_sqr() + v[2].norm_sqr()).sqrt();
            scale = scale.max(mag);
            if idx == 0 {
                continue;
            }
            let k = g.wavevector(idx);
            let kn = ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt();
            let d = v[0] * k[0] as f64 + v[1] * k[1] as f64 + v[2] * k[2] as f64;
            worst = worst.max(d.norm() / kn);
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// Largest `|k_i|` among modes with a nonzero coefficient.
    pub fn max_active_wavenumber(&self) -> i64 {
        let g = self.grid;
        (0..g.len())
            .filter(|&idx| self.get(idx).iter().any(|v| v.norm() > 0.0))
            .map(|idx| g.wavevector(idx).iter().map(|c| c.abs()).max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }
}

/// Fourier coefficients of real samples.
pub fn forward_transform(samples: &PhysicalVectorField) -> SpectralVectorField {
    let g = samples.grid;
    let (c0, c1) = fft::forward_real_pair(&g, &samples.comps[0], &samples.comps[1]);
    let mut c2: Vec<Complex64> = samples.comps[2]
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    fft::forward_complex(&g, &mut c2);
    SpectralVectorField {
        grid: g,
        comps: [c0, c1, c2],
    }
}

/// Forward transform with an explicit grid check.
pub fn forward_transform_on(
    grid: GridSpec,
    samples: &PhysicalVectorField,
) -> Result<SpectralVectorField> {
    if samples.grid != grid {
        return Err(Error::GridMismatch {
            expected: grid.n(),
            found: samples.grid.n(),
        });
    }
    Ok(forward_transform(samples))
}

/// Synthesizes grid samples; fails if the spectrum is not Hermitian enough to
/// give a real field (imaginary part above `1e-12` of the peak).
pub fn inverse_transform(f: &SpectralVectorField) -> Result<PhysicalVectorField> {
    let g = f.grid;
    let mut comps: [Vec<f64>; 3] = Default::default();
    let mut peak: f64 = 0.0;
    let mut imag: f64 = 0.0;
    for a in 0..3 {
        let mut z = f.comps[a].clone();
        fft::inverse_complex(&g, &mut z);
        for v in &z {
            peak = peak.max(v.re.abs());
            imag = imag.max(v.im.abs());
        }
        comps[a] = z.into_iter().map(|v| v.re).collect();
    }
    if imag > 1e-12 * peak.max(1.0) {
        return Err(Error::ImaginaryResidue { residue: imag });
    }
    Ok(PhysicalVectorField { grid: g, comps })
}

/// Synthesizes two spectral fields with three complex FFTs.
pub(crate) fn inverse_pair(
    f: &SpectralVectorField,
    h: &SpectralVectorField,
) -> (PhysicalVectorField, PhysicalVectorField) {
    let g = f.grid;
    let mut a: [Vec<f64>; 3] = Default::default();
    let mut b: [Vec<f64>; 3] = Default::default();
    for ax in 0..3 {
        let (x, y) = fft::inverse_real_pair(&g, &f.comps[ax], &h.comps[ax]);
        a[ax] = x;
        b[ax] = y;
    }
    (
        PhysicalVectorField { grid: g, comps: a },
        PhysicalVectorField { grid: g, comps: b },
    )
}

/// Forward transforms of two real fields with three complex FFTs.
pub(crate) fn forward_pair(
    f: &PhysicalVectorField,
    h: &PhysicalVectorField,
) -> (SpectralVectorField, SpectralVectorField) {
    let g = f.grid;
    let mut a: [Vec<Complex64>; 3] = Default::default();
    let mut b: [Vec<Complex64>; 3] = Default::default();
    for ax in 0..3 {
        let (x, y) = fft::forward_real_pair(&g, &f.comps[ax], &h.comps[ax]);
        a[ax] = x;
        b[ax] = y;
    }
    (
        SpectralVectorField { grid: g, comps: a },
        SpectralVectorField { grid: g, comps: b },
    )
}

impl PhysicalVectorField {
    pub(crate) fn from_raw(grid: GridSpec, comps: [Vec<f64>; 3]) -> Self {
        Self { grid, comps }
    }

    pub(crate) fn raw(&self) -> &[Vec<f64>; 3] {
        &self.comps
    }
}

const SUM_CHUNK: usize = 4096;

/// Parallel sum with a fixed reduction order, so results do not depend on scheduling.
pub(crate) fn ordered_sum_idx(len: usize, f: impl Fn(usize) -> f64 + Sync) -> f64 {
    let chunks = len.div_ceil(SUM_CHUNK);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            (c * SUM_CHUNK..((c + 1) * SUM_CHUNK).min(len))
                .map(&f)
                .sum()
        })
        .collect();
    partial.iter().sum()
}

fn ordered_sum<T: Sync>(v: &[T], f: impl Fn(&T) -> f64 + Sync) -> f64 {
    ordered_sum_idx(v.len(), |i| f(&v[i]))
}

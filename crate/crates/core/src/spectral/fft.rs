//! Three-dimensional FFTs built from cached 1-D rustfft plans.
//!
//! Lines are transformed in parallel, but every line is independent, so the
//! result does not depend on the thread count.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::grid::GridSpec;

struct Plan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plan(n: usize) -> Arc<Plan> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plan>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plan {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    dst.par_chunks_mut(rows).enumerate().for_each(|(c, out)| {
        for (r, o) in out.iter_mut().enumerate() {
            *o = src[r * cols + c];
        }
    });
}

fn fft_lines(fft: &dyn Fft<f64>, data: &mut [Complex64], n: usize) {
    // A few hundred lines per task keeps scheduling overhead negligible.
    let chunk = n * (256usize).max(1);
    data.par_chunks_mut(chunk).for_each(|c| fft.process(c));
}

fn fft3(data: &mut [Complex64], n: usize, forward: bool) {
    let p = plan(n);
    let fft: &dyn Fft<f64> = if forward { &*p.forward } else { &*p.inverse };
    let mut scratch = vec![Complex64::default(); data.len()];

    // axis 3 (contiguous)
    fft_lines(fft, data, n);

    // axis 2: transpose each (i2, i3) slab
    data.par_chunks_mut(n * n)
        .zip(scratch.par_chunks_mut(n * n))
        .for_each(|(slab, tmp)| {
            for r in 0..n {
                for c in 0..n {
                    tmp[c * n + r] = slab[r * n + c];
                }
            }
            fft.process(tmp);
            for r in 0..n {
                for c in 0..n {
                    slab[r * n + c] = tmp[c * n + r];
                }
            }
        });

    // axis 1: view as n x n^2
    transpose(data, &mut scratch, n, n * n);
    fft_lines(fft, &mut scratch, n);
    transpose(&scratch, data, n * n, n);
}

#[inline]
fn parity(grid: &GridSpec, idx: usize) -> f64 {
    let n = grid.n();
    let s = idx % n + (idx / n) % n + idx / (n * n);
    if s % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Fourier coefficients `f(k) = N^-3 sum_x f(x) e^{-i k.x}` of complex samples
/// taken at `x_j = -pi + 2 pi j / n`.
pub(crate) fn forward_complex(grid: &GridSpec, data: &mut [Complex64]) {
    debug_assert_eq!(data.len(), grid.len());
    fft3(data, grid.n(), true);
    let scale = 1.0 / grid.len() as f64;
    data.par_iter_mut().enumerate().for_each(|(idx, v)| {
        *v *= parity(grid, idx) * scale;
    });
}

/// Synthesis `f(x) = sum_k f(k) e^{i k.x}` on the grid.
pub(crate) fn inverse_complex(grid: &GridSpec, data: &mut [Complex64]) {
    debug_assert_eq!(data.len(), grid.len());
    data.par_iter_mut().enumerate().for_each(|(idx, v)| {
        *v *= parity(grid, idx);
    });
    fft3(data, grid.n(), false);
}

/// Forward transform of two real scalar fields with one complex FFT.
pub(crate) fn forward_real_pair(
    grid: &GridSpec,
    a: &[f64],
    b: &[f64],
) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut z: Vec<Complex64> = a
        .par_iter()
        .zip(b.par_iter())
        .map(|(&x, &y)| Complex64::new(x, y))
        .collect();
    forward_complex(grid, &mut z);
    let len = grid.len();
    let mut fa = vec![Complex64::default(); len];
    let mut fb = vec![Complex64::default(); len];
    fa.par_iter_mut()
        .zip(fb.par_iter_mut())
        .enumerate()
        .for_each(|(idx, (oa, ob))| {
            let zk = z[idx];
            let zm = z[grid.mirror_index(idx)].conj();
            *oa = (zk + zm) * 0.5;
            *ob = (zk - zm) * Complex64::new(0.0, -0.5);
        });
    (fa, fb)
}

/// Inverse transform of two Hermitian spectra with one complex FFT.
pub(crate) fn inverse_real_pair(
    grid: &GridSpec,
    a: &[Complex64],
    b: &[Complex64],
) -> (Vec<f64>, Vec<f64>) {
    let i = Complex64::new(0.0, 1.0);
    let mut z: Vec<Complex64> = a
        .par_iter()
        .zip(b.par_iter())
        .map(|(&x, &y)| x + i * y)
        .collect();
    inverse_complex(grid, &mut z);
    z.into_par_iter().map(|v| (v.re, v.im)).unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn single_mode_lands_on_its_wavevector() {
        let g = GridSpec::new(8).unwrap();
        let k = [1i64, -2, 3];
        let mut data: Vec<Complex64> = (0..g.len())
            .map(|idx| {
                let x = g.point(idx);
                let ph = k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2];
                Complex64::new(ph.cos(), ph.sin())
            })
            .collect();
        forward_complex(&g, &mut data);
        let target = g.index_of(k).unwrap();
        for (idx, v) in data.iter().enumerate() {
            let expect = if idx == target { 1.0 } else { 0.0 };
            assert!(
                (v - Complex64::new(expect, 0.0)).norm() < 1e-13,
                "idx {idx}: {v}"
            );
        }
        inverse_complex(&g, &mut data);
        let x = g.point(5);
        let ph = -2.0 * x[1] + x[0] + 3.0 * x[2];
        assert!((data[5] - Complex64::new(ph.cos(), ph.sin())).norm() < 1e-13);
        let _ = PI;
    }

    #[test]
    fn real_pair_matches_separate_transforms() {
        let g = GridSpec::new(8).unwrap();
        let a: Vec<f64> = (0..g.len()).map(|i| ((i * 37 % 11) as f64).sin()).collect();
        let b: Vec<f64> = (0..g.len()).map(|i| ((i * 13 % 7) as f64).cos()).collect();
        let (fa, fb) = forward_real_pair(&g, &a, &b);
        let mut za: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        forward_complex(&g, &mut za);
        for (p, q) in fa.iter().zip(&za) {
            assert!((p - q).norm() < 1e-14);
        }
        let (ra, rb) = inverse_real_pair(&g, &fa, &fb);
        for i in 0..g.len() {
            assert!((ra[i] - a[i]).abs() < 1e-13);
            assert!((rb[i] - b[i]).abs() < 1e-13);
        }
    }
}

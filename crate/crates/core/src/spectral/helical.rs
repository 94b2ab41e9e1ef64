//! Curl eigenbasis on the lattice.
//!
//! For `k != 0` let `a = e3` (or `e1` when `k` is parallel to `e3`),
//! `e = (k x a)/|k x a|` and `q = k/|k| x e`. Then
//!
//! ```text
//! h+(k) = (e + i q)/sqrt(2),    h-(k) = (e - i q)/sqrt(2)
//! ```
//!
//! satisfy `i k x h± = ±|k| h±`, `k . h± = 0`, and `h±(-k) = -conj(h±(k))`.
//! A real field therefore has amplitudes with `a±(-k) = -conj(a±(k))`.

use num_complex::Complex64;
use rayon::prelude::*;

use super::field::SpectralVectorField;
use super::grid::{norm2, GridSpec, BOX_VOLUME};
use crate::error::{Error, Result};

/// Tolerance on the divergence residual accepted by [`helical_decompose`].
pub const SOLENOIDAL_TOL: f64 = 1e-8;

/// Returns `(h+, h-)` for a nonzero wavevector.
pub fn helical_basis(k: [i64; 3]) -> Result<([Complex64; 3], [Complex64; 3])> {
    if k == [0, 0, 0] {
        return Err(Error::ZeroWavevector);
    }
    Ok(basis_unchecked(k))
}

#[inline]
pub(crate) fn basis_unchecked(k: [i64; 3]) -> ([Complex64; 3], [Complex64; 3]) {
    let kf = k.map(|c| c as f64);
    let kn = (kf[0] * kf[0] + kf[1] * kf[1] + kf[2] * kf[2]).sqrt();
    let a = if k[0] == 0 && k[1] == 0 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let mut e = cross(kf, a);
    let en = (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]).sqrt();
    e = e.map(|c| c / en);
    let khat = kf.map(|c| c / kn);
    let q = cross(khat, e);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = std::array::from_fn(|i| Complex64::new(e[i] * s, q[i] * s));
    let minus = std::array::from_fn(|i| Complex64::new(e[i] * s, -q[i] * s));
    (plus, minus)
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn hdot(h: &[Complex64; 3], v: &[Complex64; 3]) -> Complex64 {
    h[0].conj() * v[0] + h[1].conj() * v[1] + h[2].conj() * v[2]
}

/// Amplitudes of a field in the curl eigenbasis, indexed like the grid.
/// Entries at `k = 0` are always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct HelicalCoefficients {
    grid: GridSpec,
    plus: Vec<Complex64>,
    minus: Vec<Complex64>,
}

impl HelicalCoefficients {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            plus: vec![Complex64::default(); grid.len()],
            minus: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn plus(&self) -> &[Complex64] {
        &self.plus
    }

    pub fn minus(&self) -> &[Complex64] {
        &self.minus
    }

    pub fn plus_mut(&mut self) -> &mut [Complex64] {
        &mut self.plus
    }

    pub fn minus_mut(&mut self) -> &mut [Complex64] {
        &mut self.minus
    }

    /// `(2pi)^3 sum |a|^2` of one helicity sector restricted to `|k|^2 = n`.
    pub fn shell_energy(&self, n: i64, sign: i8) -> f64 {
        let amps = if sign >= 0 { &self.plus } else { &self.minus };
        let g = self.grid;
        BOX_VOLUME
            * amps
                .iter()
                .enumerate()
                .filter(|(idx, _)| norm2(g.wavevector(*idx)) == n)
                .map(|(_, a)| a.norm_sqr())
                .sum::<f64>()
    }

    /// `(2pi)^3 sum (|a+|^2 + |a-|^2)`.
    pub fn energy(&self) -> f64 {
        BOX_VOLUME
            * self
                .plus
                .iter()
                .chain(&self.minus)
                .map(|a| a.norm_sqr())
                .sum::<f64>()
    }

    /// Applies the curl: amplitudes become `(+|k| a+, -|k| a-)`.
    pub fn curl(&self) -> Self {
        let g = self.grid;
        let scale = |idx: usize| (norm2(g.wavevector(idx)) as f64).sqrt();
        Self {
            grid: g,
            plus: self
                .plus
                .iter()
                .enumerate()
                .map(|(i, a)| a * scale(i))
                .collect(),
            minus: self
                .minus
                .iter()
                .enumerate()
                .map(|(i, a)| -a * scale(i))
                .collect(),
        }
    }
}

/// Projects a solenoidal field onto `h±(k)`; the mean is dropped.
pub fn helical_decompose(f: &SpectralVectorField) -> Result<HelicalCoefficients> {
    let residual = f.divergence_residual();
    if residual > SOLENOIDAL_TOL {
        return Err(Error::NotSolenoidal { residual });
    }
    let g = f.grid();
    let pairs: Vec<(Complex64, Complex64)> = (0..g.len())
        .into_par_iter()
        .map(|idx| {
            if idx == 0 {
                return Default::default();
            }
            let (hp, hm) = basis_unchecked(g.wavevector(idx));
            let v = f.get(idx);
            (hdot(&hp, &v), hdot(&hm, &v))
        })
        .collect();
    let (plus, minus) = pairs.into_iter().unzip();
    Ok(HelicalCoefficients {
        grid: g,
        plus,
        minus,
    })
}

/// `sum_k a+(k) h+(k) + a-(k) h-(k)` with zero mean.
pub fn helical_recompose(c: &HelicalCoefficients, grid: GridSpec) -> Result<SpectralVectorField> {
    if c.grid != grid {
        return Err(Error::GridMismatch {
            expected: grid.n(),
            found: c.grid.n(),
        });
    }
    Ok(SpectralVectorField::from_modes(grid, |k| {
        if k == [0, 0, 0] {
            return [Complex64::default(); 3];
        }
        let idx = grid.index_of(k).expect("grid wavevector");
        let (hp, hm) = basis_unchecked(k);
        let (ap, am) = (c.plus[idx], c.minus[idx]);
        std::array::from_fn(|i| ap * hp[i] + am * hm[i])
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::ops::cross_c;

    fn check_eigen(k: [i64; 3]) {
        let (hp, hm) = helical_basis(k).unwrap();
        let kn = (norm2(k) as f64).sqrt();
        let kc = k.map(|c| Complex64::new(c as f64, 0.0));
        for (h, sgn) in [(hp, 1.0), (hm, -1.0)] {
            let c = cross_c(kc, h);
            for i in 0..3 {
                let lhs = Complex64::new(0.0, 1.0) * c[i];
                assert!(
                    (lhs - h[i] * (sgn * kn)).norm() < 1e-14 * kn.max(1.0),
                    "k={k:?}"
                );
            }
            let kd: Complex64 = (0..3).map(|i| kc[i] * h[i]).sum();
            assert!(kd.norm() < 1e-14 * kn);
            let norm: f64 = h.iter().map(|z| z.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-14);
        }
        assert!(hdot(&hp, &hm).norm() < 1e-14);
    }

    #[test]
    fn basis_along_e3() {
        let (hp, _) = helical_basis([0, 0, 1]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // h+ = (e2 - i e1)/sqrt(2)
        assert!((hp[0] - Complex64::new(0.0, -s)).norm() < 1e-15);
        assert!((hp[1] - Complex64::new(s, 0.0)).norm() < 1e-15);
        assert_eq!(hp[2], Complex64::default());
        check_eigen([0, 0, 1]);
    }

    #[test]
    fn eigen_relation_on_sample_vectors() {
        for k in [
            [1, 1, 0],
            [0, 0, -3],
            [2, -1, 5],
            [-4, 0, 0],
            [1, 1, 1],
            [0, 3, -2],
        ] {
            check_eigen(k);
        }
    }

    #[test]
    fn mirror_relation() {
        for k in [[1, 2, 3], [0, 0, 2], [-1, 0, 4]] {
            let (hp, hm) = basis_unchecked(k);
            let (mp, mm) = basis_unchecked([-k[0], -k[1], -k[2]]);
            for i in 0..3 {
                assert!((mp[i] + hp[i].conj()).norm() < 1e-15);
                assert!((mm[i] + hm[i].conj()).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_wavevector_rejected() {
        assert!(matches!(
            helical_basis([0, 0, 0]),
            Err(Error::ZeroWavevector)
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn eigen_relation_everywhere(k in prop::array::uniform3(-10i64..=10)) {
                prop_assume!(k != [0, 0, 0]);
                check_eigen(k);
            }
        }
    }
}

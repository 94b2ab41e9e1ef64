use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Volume of the periodic box `[-pi, pi]^3`.
pub const BOX_VOLUME: f64 = 8.0 * PI * PI * PI;

/// Uniform `n^3` grid on `[-pi, pi]^3`.
///
/// Storage is row-major in `(i1, i2, i3)` with `i3` fastest. Index `i` along an
/// axis carries the wavenumber `i` for `i < n/2` and `i - n` otherwise, so the
/// Nyquist plane sits at `-n/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridSpec {
    n: usize,
}

impl GridSpec {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid(n));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of grid points (and Fourier modes) per component.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest retained `|k_i|` under the 2/3 rule.
    pub fn dealias_cutoff(&self) -> usize {
        self.n / 3
    }

    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    #[inline]
    pub fn wavevector(&self, idx: usize) -> [i64; 3] {
        let n = self.n;
        let i3 = idx % n;
        let i2 = (idx / n) % n;
        let i1 = idx / (n * n);
        [
            self.wavenumber(i1),
            self.wavenumber(i2),
            self.wavenumber(i3),
        ]
    }

    /// Storage index of `k`, if every component is representable.
    pub fn index_of(&self, k: [i64; 3]) -> Option<usize> {
        let n = self.n as i64;
        let mut idx = 0usize;
        for &c in &k {
            if c < -n / 2 || c >= n / 2 {
                return None;
            }
            idx = idx * self.n + c.rem_euclid(n) as usize;
        }
        Some(idx)
    }

    /// Index of `-k` (the Nyquist plane maps to itself).
    #[inline]
    pub fn mirror_index(&self, idx: usize) -> usize {
        let n = self.n;
        let flip = |i: usize| (n - i) % n;
        let i3 = idx % n;
        let i2 = (idx / n) % n;
        let i1 = idx / (n * n);
        (flip(i1) * n + flip(i2)) * n + flip(i3)
    }

    #[inline]
    pub fn is_retained(&self, k: [i64; 3]) -> bool {
        let c = self.dealias_cutoff() as i64;
        k.iter().all(|ki| ki.abs() <= c)
    }

    /// Physical coordinate of grid index `j` along any axis.
    pub fn coord(&self, j: usize) -> f64 {
        -PI + 2.0 * PI * j as f64 / self.n as f64
    }

    pub fn point(&self, idx: usize) -> [f64; 3] {
        let n = self.n;
        [
            self.coord(idx / (n * n)),
            self.coord((idx / n) % n),
            self.coord(idx % n),
        ]
    }
}

#[inline]
pub fn norm2(k: [i64; 3]) -> i64 {
    k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_and_small_grids() {
        assert!(GridSpec::new(7).is_err());
        assert!(GridSpec::new(9).is_err());
        assert!(GridSpec::new(6).is_err());
        assert!(GridSpec::new(8).is_ok());
    }

    #[test]
    fn index_roundtrip_and_mirror() {
        let g = GridSpec::new(8).unwrap();
        for idx in 0..g.len() {
            let k = g.wavevector(idx);
            assert_eq!(g.index_of(k), Some(idx));
            let m = g.mirror_index(idx);
            let km = g.wavevector(m);
            for a in 0..3 {
                if k[a] == -4 {
                    assert_eq!(km[a], -4);
                } else {
                    assert_eq!(km[a], -k[a]);
                }
            }
        }
        assert_eq!(g.index_of([4, 0, 0]), None);
    }

    #[test]
    fn retained_set_is_symmetric() {
        let g = GridSpec::new(16).unwrap();
        assert_eq!(g.dealias_cutoff(), 5);
        for idx in 0..g.len() {
            let k = g.wavevector(idx);
            if g.is_retained(k) {
                assert!(g.is_retained([-k[0], -k[1], -k[2]]));
            }
        }
    }
}

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::spectral::helical::basis_unchecked;
use crate::spectral::{leray_project, norm2, GridSpec, SpectralVectorField};

/// A lattice shell `|k|^2 = n` together with a helicity sign; the curl
/// eigenvalue is `sign * sqrt(n)`. `n = 0` stands for the constant fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Shell {
    pub n: u32,
    pub sign: i8,
}

impl Shell {
    pub fn new(n: u32, sign: i8) -> Result<Self> {
        if sign != 1 && sign != -1 {
            return Err(Error::InvalidInput(format!(
                "shell sign must be +1 or -1, got {sign}"
            )));
        }
        Ok(Self { n, sign })
    }

    pub fn lambda(&self) -> f64 {
        self.sign as f64 * (self.n as f64).sqrt()
    }
}

/// Lattice points with `|k|^2 = n`, in storage order of an unbounded scan.
pub fn shell_points(n: u32) -> Vec<[i64; 3]> {
    let r = (n as f64).sqrt().floor() as i64 + 1;
    let mut pts = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            for c in -r..=r {
                if norm2([a, b, c]) == n as i64 {
                    pts.push([a, b, c]);
                }
            }
        }
    }
    pts
}

/// Whether some `k` in `Z^3` has `|k|^2 = n`.
pub fn is_admissible_shell(n: u32) -> bool {
    n == 0 || !shell_points(n).is_empty()
}

/// True for the canonical member of each `{k, -k}` pair.
#[inline]
pub(crate) fn is_canonical(k: [i64; 3]) -> bool {
    k[0] > 0 || (k[0] == 0 && (k[1] > 0 || (k[1] == 0 && k[2] > 0)))
}

/// ABC flow with integer wavenumber `lambda0`, written down mode by mode.
pub fn abc_flow(
    a: f64,
    b: f64,
    c: f64,
    lambda0: f64,
    grid: GridSpec,
) -> Result<SpectralVectorField> {
    if lambda0 == 0.0 || lambda0.fract() != 0.0 || !lambda0.is_finite() {
        return Err(Error::InvalidWavenumber(lambda0));
    }
    let l = lambda0 as i64;
    if l.unsigned_abs() as usize > grid.dealias_cutoff() {
        return Err(Error::ShellOutsideBand {
            n: (l * l) as u32,
            cutoff: grid.dealias_cutoff(),
        });
    }
    let mut f = SpectralVectorField::zeros(grid);
    // sin(l x) = (e^{ilx} - e^{-ilx}) / 2i,  cos(l x) = (e^{ilx} + e^{-ilx}) / 2
    let half_i = Complex64::new(0.0, -0.5);
    let mut add = |axis: usize, k: [i64; 3], v: Complex64| {
        let idx = grid.index_of(k).expect("abc mode inside grid");
        let mut cur = f.get(idx);
        cur[axis] += v;
        f.set(idx, cur);
    };
    let e = |axis: usize, s: i64| {
        let mut k = [0i64; 3];
        k[axis] = s * l;
        k
    };
    // u1 = A sin(l x3) + C cos(l x2)
    add(0, e(2, 1), half_i * a);
    add(0, e(2, -1), -half_i * a);
    add(0, e(1, 1), Complex64::new(c / 2.0, 0.0));
    add(0, e(1, -1), Complex64::new(c / 2.0, 0.0));
    // u2 = B sin(l x1) + A cos(l x3)
    add(1, e(0, 1), half_i * b);
    add(1, e(0, -1), -half_i * b);
    add(1, e(2, 1), Complex64::new(a / 2.0, 0.0));
    add(1, e(2, -1), Complex64::new(a / 2.0, 0.0));
    // u3 = C sin(l x2) + B cos(l x1)
    add(2, e(1, 1), half_i * c);
    add(2, e(1, -1), -half_i * c);
    add(2, e(0, 1), Complex64::new(b / 2.0, 0.0));
    add(2, e(0, -1), Complex64::new(b / 2.0, 0.0));
    Ok(f)
}

/// How the helical amplitudes of a shell field are chosen.
#[derive(Debug, Clone)]
pub enum ShellAmplitudes {
    /// i.i.d. standard complex Gaussians (ChaCha8 seeded from `seed`) on the
    /// canonical half of the shell, mirrored for reality.
    Seeded(u64),
    /// Amplitudes at listed wavevectors; `-k` is filled by the reality rule.
    Explicit(Vec<([i64; 3], Complex64)>),
}

/// A Beltrami field with eigenvalue `sign * sqrt(n)` supported on `|k|^2 = n`.
pub fn shell_field(
    shell: Shell,
    amplitudes: &ShellAmplitudes,
    grid: GridSpec,
) -> Result<SpectralVectorField> {
    if shell.n == 0 {
        return Err(Error::EmptyShell(0));
    }
    let pts = shell_points(shell.n);
    if pts.is_empty() {
        return Err(Error::EmptyShell(shell.n));
    }
    if pts.iter().any(|&k| !grid.is_retained(k)) {
        return Err(Error::ShellOutsideBand {
            n: shell.n,
            cutoff: grid.dealias_cutoff(),
        });
    }
    let mut amps: Vec<([i64; 3], Complex64)> = Vec::new();
    match amplitudes {
        ShellAmplitudes::Seeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            for &k in pts.iter().filter(|k| is_canonical(**k)) {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                amps.push((k, Complex64::new(re, im)));
            }
        }
        ShellAmplitudes::Explicit(list) => {
            for &(k, a) in list {
                if norm2(k) != shell.n as i64 {
                    return Err(Error::InvalidInput(format!(
                        "wavevector {k:?} is not on shell |k|^2 = {}",
                        shell.n
                    )));
                }
                amps.push((k, a));
            }
        }
    }
    let mut f = SpectralVectorField::zeros(grid);
    for (k, a) in amps {
        let (hp, hm) = basis_unchecked(k);
        let h = if shell.sign > 0 { hp } else { hm };
        let mk = [-k[0], -k[1], -k[2]];
        let (mp, mm) = basis_unchecked(mk);
        let hmir = if shell.sign > 0 { mp } else { mm };
        let amir = -a.conj();
        f.set(grid.index_of(k).unwrap(), h.map(|c| c * a));
        f.set(grid.index_of(mk).unwrap(), hmir.map(|c| c * amir));
    }
    Ok(f)
}

/// The trigonometric Helmholtz eigenfield
/// `(k1 sin(n1 x1) cos(n2 x2) cos(n3 x3), k2 cos sin cos, k3 cos cos sin)`,
/// which requires `kappa . n = 0`.
pub fn trig_shell_example(
    kappa: [f64; 3],
    n: [i64; 3],
    grid: GridSpec,
) -> Result<SpectralVectorField> {
    let dot: f64 = (0..3).map(|i| kappa[i] * n[i] as f64).sum();
    if dot.abs() > 1e-12 * (1.0 + kappa.iter().map(|x| x.abs()).sum::<f64>()) {
        return Err(Error::InvalidInput(format!(
            "kappa . n = {dot} must vanish"
        )));
    }
    if n.iter()
        .any(|c| c.unsigned_abs() as usize > grid.dealias_cutoff())
    {
        return Err(Error::ShellOutsideBand {
            n: norm2(n) as u32,
            cutoff: grid.dealias_cutoff(),
        });
    }
    // product of one sine and two cosines over the sign combinations of k
    let mut f = SpectralVectorField::zeros(grid);
    for s1 in [-1i64, 1] {
        for s2 in [-1i64, 1] {
            for s3 in [-1i64, 1] {
                let signs = [s1, s2, s3];
                let k = [s1 * n[0], s2 * n[1], s3 * n[2]];
                let idx = grid.index_of(k).unwrap();
                let mut cur = f.get(idx);
                for axis in 0..3 {
                    // sin factor on `axis`: e^{i s n x}/(2i) * s; cos factors: 1/2
                    let sin_part = Complex64::new(0.0, -0.5) * signs[axis] as f64;
                    cur[axis] += sin_part * 0.25 * kappa[axis];
                }
                f.set(idx, cur);
            }
        }
    }
    // n_i = 0 visits the same k twice; the 1/2 + 1/2 of cos(0) and the
    // cancelling sine halves make the sum exact without correction.
    Ok(f)
}

/// Seeded mean-zero solenoidal field on `0 < |k|^2 <= max_n2`, normalized to
/// unit `L^2` norm.
pub fn random_solenoidal(grid: GridSpec, max_n2: u32, seed: u64) -> Result<SpectralVectorField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralVectorField::zeros(grid);
    let mut any = false;
    for idx in 0..grid.len() {
        let k = grid.wavevector(idx);
        let k2 = norm2(k);
        if k2 == 0 || k2 > max_n2 as i64 || !grid.is_retained(k) || !is_canonical(k) {
            continue;
        }
        let v: [Complex64; 3] = std::array::from_fn(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        });
        f.set(idx, v);
        f.set(grid.mirror_index(idx), v.map(|c| c.conj()));
        any = true;
    }
    if !any {
        return Err(Error::InvalidInput(format!(
            "no retained modes with 0 < |k|^2 <= {max_n2}"
        )));
    }
    let p = leray_project(&f);
    let norm = p.norm_l2();
    Ok(p.scale(1.0 / norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{
        curl_hat, forward_transform, helical_decompose, PhysicalVectorField, BOX_VOLUME,
    };

    fn legendre_admissible(n: u32) -> bool {
        // n is a sum of three squares unless n = 4^a (8b + 7)
        let mut m = n;
        if m == 0 {
            return true;
        }
        while m % 4 == 0 {
            m /= 4;
        }
        m % 8 != 7
    }

    #[test]
    fn shell_admissibility_matches_legendre() {
        for n in 0..200 {
            assert_eq!(is_admissible_shell(n), legendre_admissible(n), "n = {n}");
        }
    }

    #[test]
    fn empty_shell_rejected() {
        let g = GridSpec::new(16).unwrap();
        let err = shell_field(Shell::new(7, 1).unwrap(), &ShellAmplitudes::Seeded(1), g);
        assert!(matches!(err, Err(Error::EmptyShell(7))));
    }

    #[test]
    fn unit_shell_wave_closed_form() {
        let g = GridSpec::new(16).unwrap();
        let amps = ShellAmplitudes::Explicit(vec![([0, 0, 1], Complex64::new(1.0, 0.0))]);
        let f = shell_field(Shell::new(1, 1).unwrap(), &amps, g).unwrap();
        let s2 = std::f64::consts::SQRT_2;
        let expect = forward_transform(&PhysicalVectorField::from_fn(g, |x| {
            [s2 * x[2].sin(), s2 * x[2].cos(), 0.0]
        }));
        assert!(f.sub(&expect).norm_l2() < 1e-13);
    }

    #[test]
    fn abc_energy_and_curl() {
        let g = GridSpec::new(16).unwrap();
        let u = abc_flow(1.0, 1.0, 1.0, 1.0, g).unwrap();
        assert!((u.energy() - 3.0 * BOX_VOLUME).abs() < 1e-12 * BOX_VOLUME);
        assert!(curl_hat(&u).sub(&u).norm_l2() < 1e-12 * u.norm_l2());
        let single = abc_flow(1.0, 0.0, 0.0, 1.0, g).unwrap();
        let expect = forward_transform(&PhysicalVectorField::from_fn(g, |x| {
            [x[2].sin(), x[2].cos(), 0.0]
        }));
        assert!(single.sub(&expect).norm_l2() < 1e-13);
        assert!(matches!(
            abc_flow(1.0, 1.0, 1.0, 0.0, g),
            Err(Error::InvalidWavenumber(_))
        ));
        assert!(matches!(
            abc_flow(1.0, 1.0, 1.0, 1.5, g),
            Err(Error::InvalidWavenumber(_))
        ));
    }

    #[test]
    fn abc_sampled_matches_spectral() {
        let g = GridSpec::new(16).unwrap();
        let (a, b, c, l) = (0.3, -1.2, 0.8, 2.0);
        let sampled = forward_transform(&PhysicalVectorField::from_fn(g, |x| {
            [
                a * (l * x[2]).sin() + c * (l * x[1]).cos(),
                b * (l * x[0]).sin() + a * (l * x[2]).cos(),
                c * (l * x[1]).sin() + b * (l * x[0]).cos(),
            ]
        }));
        let direct = abc_flow(a, b, c, l, g).unwrap();
        assert!(sampled.sub(&direct).norm_l2() < 1e-13);
    }

    #[test]
    fn trig_example_solves_helmholtz() {
        let g = GridSpec::new(16).unwrap();
        let u = trig_shell_example([1.0, -1.0, 0.0], [1, 1, 1], g).unwrap();
        let expect = forward_transform(&PhysicalVectorField::from_fn(g, |x| {
            [
                x[0].sin() * x[1].cos() * x[2].cos(),
                -x[0].cos() * x[1].sin() * x[2].cos(),
                0.0,
            ]
        }));
        assert!(u.sub(&expect).norm_l2() < 1e-13);
        // -Laplace u = 3 u  <=>  curl curl u = 3 u for solenoidal u
        let cc = curl_hat(&curl_hat(&u));
        assert!(cc.sub(&u.scale(3.0)).norm_l2() < 1e-12 * u.norm_l2());
        let h = helical_decompose(&u).unwrap();
        let on = h.shell_energy(3, 1) + h.shell_energy(3, -1);
        assert!((on - u.energy()).abs() < 1e-12 * u.energy());
        assert!(h.shell_energy(3, 1) > 0.0 && h.shell_energy(3, -1) > 0.0);
    }

    #[test]
    fn trig_example_with_zero_index() {
        let g = GridSpec::new(16).unwrap();
        let u = trig_shell_example([0.0, 0.0, 1.0], [2, 1, 0], g).unwrap();
        assert_eq!(u.norm_l2(), 0.0);
        let v = trig_shell_example([1.0, 0.0, 0.0], [0, 2, 1], g).unwrap();
        assert_eq!(v.norm_l2(), 0.0);
        let w = trig_shell_example([1.0, -2.0, 0.0], [2, 1, 0], g).unwrap();
        let expect = forward_transform(&PhysicalVectorField::from_fn(g, |x| {
            [
                (2.0 * x[0]).sin() * x[1].cos(),
                -2.0 * (2.0 * x[0]).cos() * x[1].sin(),
                0.0,
            ]
        }));
        assert!(w.sub(&expect).norm_l2() < 1e-13);
        assert!(trig_shell_example([1.0, 1.0, 0.0], [1, 1, 0], g).is_err());
    }

    #[test]
    fn random_solenoidal_is_real_and_unit() {
        let g = GridSpec::new(16).unwrap();
        let f = random_solenoidal(g, 9, 42).unwrap();
        assert!((f.norm_l2() - 1.0).abs() < 1e-14);
        assert!(f.divergence_residual() < 1e-14);
        assert!(f.reality_defect() < 1e-16);
        assert_eq!(f.mean(), [0.0; 3]);
        assert_eq!(random_solenoidal(g, 9, 42).unwrap(), f);
    }
}

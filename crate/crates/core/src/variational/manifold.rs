//! Projected gradient descent of `E(x) = sum_i ||x_i||^2` on the level set
//! of one or two quadratic constraints.

use crate::spectral::SpectralVectorField;

pub(crate) type Point = Vec<SpectralVectorField>;

pub(crate) fn dot(a: &[SpectralVectorField], b: &[SpectralVectorField]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.inner(y)).sum()
}

pub(crate) fn axpy(x: &[SpectralVectorField], c: f64, d: &[SpectralVectorField]) -> Point {
    x.iter().zip(d).map(|(a, b)| a.axpy(c, b)).collect()
}

pub(crate) fn energy(x: &[SpectralVectorField]) -> f64 {
    dot(x, x)
}

/// Constraint values and gradients at a point.
pub(crate) trait Constraints {
    fn values(&self, x: &[SpectralVectorField]) -> Vec<f64>;
    fn gradients(&self, x: &[SpectralVectorField]) -> Vec<Point>;
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Settings {
    pub max_iter: usize,
    /// Stop once `||P grad E|| <= tangent_tol ||grad E||`.
    pub tangent_tol: f64,
    /// Newton restoration target on `|H_j - h_j| / |h_j|`.
    pub restore_tol: f64,
}

pub(crate) struct Outcome {
    pub x: Point,
    pub iterations: usize,
    pub history: Vec<f64>,
}

/// Solves the symmetric system `G mu = r` of size 1 or 2; a (near) singular
/// Gram matrix falls back to its pseudo-inverse.
pub(crate) fn gram_solve(g: &[[f64; 2]; 2], r: &[f64; 2], m: usize) -> [f64; 2] {
    if m == 1 {
        return if g[0][0] > 0.0 {
            [r[0] / g[0][0], 0.0]
        } else {
            [0.0, 0.0]
        };
    }
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let scale = g[0][0].abs() * g[1][1].abs();
    if scale > 0.0 && det.abs() > 1e-12 * scale {
        return [
            (g[1][1] * r[0] - g[0][1] * r[1]) / det,
            (g[0][0] * r[1] - g[1][0] * r[0]) / det,
        ];
    }
    // eigen-decomposition of the symmetric 2x2 matrix, dropping tiny eigenvalues
    let (a, b, c) = (g[0][0], g[0][1], g[1][1]);
    let tr = a + c;
    let disc = (((a - c) / 2.0).powi(2) + b * b).sqrt();
    let eig = [tr / 2.0 + disc, tr / 2.0 - disc];
    let top = eig[0].abs().max(eig[1].abs());
    let mut out = [0.0; 2];
    for &l in &eig {
        if top == 0.0 || l.abs() <= 1e-12 * top {
            continue;
        }
        let v = if b.abs() > 0.0 {
            let v = [l - c, b];
            let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
            [v[0] / n, v[1] / n]
        } else if (l - a).abs() <= (l - c).abs() {
            [1.0, 0.0]
        } else {
            [0.0, 1.0]
        };
        let proj = (v[0] * r[0] + v[1] * r[1]) / l;
        out[0] += proj * v[0];
        out[1] += proj * v[1];
    }
    out
}

/// Newton iteration on the constraint values along fixed directions `dirs`.
pub(crate) fn restore(
    cons: &dyn Constraints,
    x: &[SpectralVectorField],
    dirs: &[Point],
    targets: &[f64],
    tol: f64,
) -> Option<Point> {
    let m = targets.len();
    let mut y: Point = x.to_vec();
    for _ in 0..60 {
        let vals = cons.values(&y);
        let res: Vec<f64> = vals.iter().zip(targets).map(|(v, h)| v - h).collect();
        if res
            .iter()
            .zip(targets)
            .all(|(r, h)| r.abs() <= tol * h.abs())
        {
            return Some(y);
        }
        let grads = cons.gradients(&y);
        let mut jac = [[0.0; 2]; 2];
        for i in 0..m {
            for j in 0..m {
                jac[i][j] = dot(&grads[i], &dirs[j]);
            }
        }
        let step = solve_general(&jac, &[res[0], if m > 1 { res[1] } else { 0.0 }], m)?;
        for (j, d) in dirs.iter().enumerate().take(m) {
            y = axpy(&y, -step[j], d);
        }
    }
    let vals = cons.values(&y);
    // accept a final iterate that stalls on roundoff just above the target
    let ok = vals
        .iter()
        .zip(targets)
        .all(|(v, h)| (v - h).abs() <= 100.0 * tol * h.abs());
    ok.then_some(y)
}

fn solve_general(j: &[[f64; 2]; 2], r: &[f64; 2], m: usize) -> Option<[f64; 2]> {
    if m == 1 {
        return (j[0][0] != 0.0).then(|| [r[0] / j[0][0], 0.0]);
    }
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let scale = (j[0][0].abs() + j[0][1].abs()) * (j[1][0].abs() + j[1][1].abs());
    if scale == 0.0 || det.abs() <= 1e-14 * scale {
        return None;
    }
    Some([
        (j[1][1] * r[0] - j[0][1] * r[1]) / det,
        (j[0][0] * r[1] - j[1][0] * r[0]) / det,
    ])
}

/// Tangent projection of `-grad E`: `d = -(g - sum mu_j c_j)` with `mu` from the Gram system.
fn descent_direction(x: &[SpectralVectorField], grads: &[Point]) -> (Point, f64) {
    let g: Point = x.iter().map(|f| f.scale(2.0)).collect();
    let m = grads.len();
    let mut gram = [[0.0; 2]; 2];
    let mut rhs = [0.0; 2];
    for i in 0..m {
        for j in 0..m {
            gram[i][j] = dot(&grads[i], &grads[j]);
        }
        rhs[i] = dot(&grads[i], &g);
    }
    let mu = gram_solve(&gram, &rhs, m);
    let mut d: Point = g.iter().map(|f| f.scale(-1.0)).collect();
    for j in 0..m {
        d = axpy(&d, mu[j], &grads[j]);
    }
    let gnorm = dot(&g, &g).sqrt();
    let ratio = if gnorm > 0.0 {
        dot(&d, &d).sqrt() / gnorm
    } else {
        0.0
    };
    (d, ratio)
}

/// Relative energy change treated as no progress.
const STALL_REL: f64 = 1e-15;
/// Consecutive no-progress iterations that end the descent.
const STALL_ITERS: usize = 20;

/// Backtracking descent with restoration after every trial step. A trial is
/// accepted only if it lowers the energy both by the Armijo margin, measured
/// as `<x' - x, x' + x>`, and when the two energies are compared directly.
pub(crate) fn descend(cons: &dyn Constraints, x0: Point, targets: &[f64], s: Settings) -> Outcome {
    let mut x = x0;
    let mut e = energy(&x);
    let mut history = vec![e];
    let mut step = 0.25;
    let mut it = 0;
    let mut flat = 0;
    while it < s.max_iter {
        let grads = cons.gradients(&x);
        let (d, r) = descent_direction(&x, &grads);
        if r <= s.tangent_tol {
            break;
        }
        let dd = dot(&d, &d);
        let mut accepted = false;
        let mut trial_step = step;
        while trial_step > 1e-14 {
            let trial = axpy(&x, trial_step, &d);
            if let Some(y) = restore(cons, &trial, &grads, targets, s.restore_tol) {
                let diff: Point = y.iter().zip(&x).map(|(a, b)| a.sub(b)).collect();
                let sum: Point = y.iter().zip(&x).map(|(a, b)| a.add(b)).collect();
                let delta = dot(&diff, &sum);
                let ey = energy(&y);
                if delta <= -1e-4 * trial_step * dd && ey <= e {
                    // the tangent ratio has a roundoff floor; energy that no
                    // longer moves ends the descent instead
                    flat = if e - ey <= STALL_REL * e { flat + 1 } else { 0 };
                    x = y;
                    e = ey;
                    accepted = true;
                    break;
                }
            }
            trial_step *= 0.5;
        }
        it += 1;
        if !accepted {
            break;
        }
        history.push(e);
        if flat >= STALL_ITERS {
            break;
        }
        step = (trial_step * 2.0).min(4.0);
    }
    Outcome {
        x,
        iterations: it,
        history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_regular_and_singular() {
        let g = [[2.0, 1.0], [1.0, 3.0]];
        let mu = gram_solve(&g, &[1.0, 2.0], 2);
        assert!((2.0 * mu[0] + mu[1] - 1.0).abs() < 1e-15);
        assert!((mu[0] + 3.0 * mu[1] - 2.0).abs() < 1e-15);
        // rank one: parallel gradients; minimum-norm solution
        let g = [[1.0, 2.0], [2.0, 4.0]];
        let mu = gram_solve(&g, &[1.0, 2.0], 2);
        assert!((mu[0] - 0.2).abs() < 1e-12 && (mu[1] - 0.4).abs() < 1e-12);
        assert_eq!(gram_solve(&[[0.0; 2]; 2], &[0.0; 2], 2), [0.0, 0.0]);
        assert_eq!(
            gram_solve(&[[4.0, 0.0], [0.0, 0.0]], &[2.0, 0.0], 1),
            [0.5, 0.0]
        );
    }
}

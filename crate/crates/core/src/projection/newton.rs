//! Damped Newton minimization of `sum |h_k|^p` over `h = base + sum_i q_i z^(first + i) g`.

use num_complex::Complex64 as Complex;

use super::band::BandMatrix;
use super::{SolverOptions, StepRule};
use crate::algebra::{signed_power, CoefSeq};
use crate::error::{Error, Result};
use crate::sum;

/// Number of equal steps used to move the exponent from 2 to its target.
pub(crate) const CONTINUATION_STEPS: usize = 8;

pub(crate) const POLISH_STEPS: usize = 3;
pub(crate) const ARMIJO: f64 = 1e-4;
pub(crate) const WEIGHT_FLOOR: f64 = 1e-14;
// Below p = 2 the curvature blows up near zero, so tiny entries must keep
// their true (large) weight or Newton overshoots them.
pub(crate) const SINGULAR_WEIGHT_FLOOR: f64 = 1e-150;

pub(crate) struct ShiftProblem<'a> {
    pub base: &'a [Complex],
    pub generator: &'a [Complex],
    pub first_shift: usize,
    pub unknowns: usize,
}

pub(crate) struct Minimum {
    pub q: Vec<Complex>,
    pub h: Vec<Complex>,
    pub grad_norm: f64,
    pub iterations: usize,
}

impl ShiftProblem<'_> {
    fn len(&self) -> usize {
        let span = if self.unknowns == 0 {
            0
        } else {
            self.first_shift + self.unknowns - 1 + self.generator.len()
        };
        self.base.len().max(span)
    }

    /// `h` with entries below their own rounding error set to zero.
    /// Rounding bound of each entry of the residual.
    fn noise_bounds(&self, q: &[Complex]) -> Vec<f64> {
        let mut size = vec![0.0f64; self.len()];
        for (k, b) in self.base.iter().enumerate() {
            size[k] = b.norm();
        }
        for (i, qi) in q.iter().enumerate() {
            let off = self.first_shift + i;
            let qn = qi.norm();
            for (j, g) in self.generator.iter().enumerate() {
                size[off + j] += qn * g.norm();
            }
        }
        let noise = 4.0 * f64::EPSILON * (self.generator.len() + 1) as f64;
        size.iter_mut().for_each(|s| *s *= noise);
        size
    }

    fn residual(&self, q: &[Complex]) -> Vec<Complex> {
        let mut h = vec![Complex::new(0.0, 0.0); self.len()];
        h[..self.base.len()].copy_from_slice(self.base);
        for (i, qi) in q.iter().enumerate() {
            if *qi == Complex::new(0.0, 0.0) {
                continue;
            }
            let off = self.first_shift + i;
            for (j, g) in self.generator.iter().enumerate() {
                h[off + j] += qi * g;
            }
        }
        for (x, s) in h.iter_mut().zip(self.noise_bounds(q)) {
            if x.norm() <= s {
                *x = Complex::new(0.0, 0.0);
            }
        }
        h
    }

    /// `sum_i d_i z^(first + i) g` for a real direction vector.
    fn direction_image(&self, dir: &[f64]) -> Vec<Complex> {
        let mut out = vec![Complex::new(0.0, 0.0); self.len()];
        for i in 0..self.unknowns {
            let di = Complex::new(dir[2 * i], dir[2 * i + 1]);
            let off = self.first_shift + i;
            for (j, g) in self.generator.iter().enumerate() {
                out[off + j] += di * g;
            }
        }
        out
    }

    /// Real gradient, laid out as (Re q_0, Im q_0, Re q_1, ...).
    fn gradient(&self, h: &[Complex], p: f64) -> Vec<f64> {
        let s: Vec<Complex> = h.iter().map(|&x| signed_power(x, p - 1.0)).collect();
        let mut grad = vec![0.0; 2 * self.unknowns];
        for i in 0..self.unknowns {
            let off = self.first_shift + i;
            let c: Complex = self
                .generator
                .iter()
                .enumerate()
                .map(|(j, g)| s[off + j] * g)
                .sum();
            grad[2 * i] = p * c.re;
            grad[2 * i + 1] = -p * c.im;
        }
        grad
    }

    fn hessian(&self, h: &[Complex], q: &[Complex], p: f64) -> BandMatrix {
        let glen = self.generator.len();
        let n = self.unknowns;
        let mut hess = BandMatrix::zeros(2 * n, 2 * glen - 1);
        let hmax = h.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let rel_floor = if p < 2.0 {
            SINGULAR_WEIGHT_FLOOR
        } else {
            WEIGHT_FLOOR
        };
        let floor = rel_floor * hmax.max(f64::MIN_POSITIVE);
        // an entry zeroed as rounding noise is only known up to its bound
        let noise = if p < 2.0 {
            self.noise_bounds(q)
        } else {
            Vec::new()
        };
        for (k, hk) in h.iter().enumerate() {
            let Some(rel) = k.checked_sub(self.first_shift) else {
                continue;
            };
            let i_lo = (rel + 1).saturating_sub(glen);
            let i_hi = rel.min(n.saturating_sub(1));
            if n == 0 || i_lo > i_hi {
                continue;
            }
            let modulus = hk.norm();
            let radial = p - 2.0;
            let floor = noise.get(k).map_or(floor, |s| floor.max(*s));
            let m = if modulus > floor {
                let w = p * modulus.powf(p - 2.0);
                let (nx, ny) = (hk.re / modulus, hk.im / modulus);
                [
                    [w * (1.0 + radial * nx * nx), w * radial * nx * ny],
                    [w * radial * nx * ny, w * (1.0 + radial * ny * ny)],
                ]
            } else {
                let w = p * floor.powf(p - 2.0);
                [[w, 0.0], [0.0, w]]
            };
            for i in i_lo..=i_hi {
                let ga = as_matrix(self.generator[rel - i]);
                for j in i_lo..=i {
                    let gb = as_matrix(self.generator[rel - j]);
                    // block (i, j) = G_i^T M G_j
                    for r in 0..2 {
                        for c in 0..2 {
                            if i == j && c > r {
                                continue;
                            }
                            let mut v = 0.0;
                            for a in 0..2 {
                                for b in 0..2 {
                                    v += ga[a][r] * m[a][b] * gb[b][c];
                                }
                            }
                            hess.add(2 * i + r, 2 * j + c, v);
                        }
                    }
                }
            }
        }
        hess
    }
}

/// Real matrix of multiplication by `g`.
pub(crate) fn as_matrix(g: Complex) -> [[f64; 2]; 2] {
    [[g.re, -g.im], [g.im, g.re]]
}

/// `sum |h + t dh|^p - sum |h|^p`, with each term formed from the increment so that
/// its relative accuracy survives when the change is far below the objective itself.
pub(crate) fn objective_change(h: &[Complex], dh: &[Complex], t: f64, p: f64) -> f64 {
    sum::sum(h.iter().zip(dh).map(|(a, d)| {
        let a2 = a.norm_sqr();
        let td = d * t;
        if a2 == 0.0 {
            return td.norm().powf(p);
        }
        // |a + td|^2 - |a|^2 without cancellation
        let u = (2.0 * (a.conj() * td).re + td.norm_sqr()) / a2;
        a2.powf(0.5 * p) * (0.5 * p * u.ln_1p()).exp_m1()
    }))
}

pub(crate) fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn solve_newton(hess: &BandMatrix, grad: &[f64]) -> Vec<f64> {
    let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
    let mut shift = 0.0;
    let scale = hess.max_diagonal().max(f64::MIN_POSITIVE);
    loop {
        let mut m = hess.clone();
        if shift > 0.0 {
            m.add_to_diagonal(shift);
        }
        if let Some(chol) = m.cholesky() {
            return chol.solve(&rhs);
        }
        shift = if shift == 0.0 {
            1e-14 * scale
        } else {
            shift * 100.0
        };
        if shift > scale {
            return rhs;
        }
    }
}

fn last_iterate(h: &[Complex]) -> Box<CoefSeq> {
    Box::new(CoefSeq::from_vec(if h.is_empty() {
        vec![Complex::new(0.0, 0.0)]
    } else {
        h.to_vec()
    }))
}

/// Newton iterations at a fixed exponent, starting from `q`.
fn newton_stage(
    problem: &ShiftProblem,
    p: f64,
    q: &mut Vec<Complex>,
    tol: f64,
    opts: &SolverOptions,
    budget: &mut usize,
    iterations: &mut usize,
) -> Result<(Vec<Complex>, f64)> {
    let mut h = problem.residual(q);
    let mut grad = problem.gradient(&h, p);
    let mut gn = euclid(&grad);
    let mut stalls = 0;
    while gn > tol {
        if *budget == 0 {
            return Err(Error::NonConvergence {
                iterations: *iterations,
                grad_norm: gn,
                last_iterate: last_iterate(&h),
            });
        }
        *budget -= 1;
        *iterations += 1;
        let hess = problem.hessian(&h, q, p);
        let mut dir = solve_newton(&hess, &grad);
        let mut slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
        if !(slope < 0.0) {
            dir = grad.iter().map(|g| -g).collect();
            slope = -gn * gn;
        }
        let dh = problem.direction_image(&dir);
        let mut step_size = match opts.step_rule {
            StepRule::Fixed(t) => t,
            StepRule::Backtracking => 1.0,
        };
        let (q_new, h_new) = match opts.step_rule {
            StepRule::Fixed(t) => {
                let q_new = step(q, &dir, t);
                let h_new = problem.residual(&q_new);
                (q_new, h_new)
            }
            StepRule::Backtracking => {
                // halve until the Armijo condition holds, then keep halving while the
                // objective still improves; the second phase damps the sign flips that
                // full Newton steps produce on coordinates where |h|^p is not smooth
                let mut t = 1.0;
                let mut best: Option<(f64, f64)> = None;
                loop {
                    let change = objective_change(&h, &dh, t, p);
                    match best {
                        None if change <= ARMIJO * t * slope => best = Some((t, change)),
                        Some((_, c)) if change < c => best = Some((t, change)),
                        Some(_) => break,
                        None => {}
                    }
                    t *= 0.5;
                    if t < 1e-12 {
                        break;
                    }
                }
                let t = best.map(|(t, _)| t).unwrap_or(t);
                step_size = t;
                let q_new = step(q, &dir, t);
                let h_new = problem.residual(&q_new);
                (q_new, h_new)
            }
        };
        let grad_new = problem.gradient(&h_new, p);
        let gn_new = euclid(&grad_new);
        if step_size < 1e-12 && gn_new >= gn {
            stalls += 1;
            if stalls > 5 {
                return Err(Error::NonConvergence {
                    iterations: *iterations,
                    grad_norm: gn,
                    last_iterate: last_iterate(&h),
                });
            }
        }
        *q = q_new;
        h = h_new;
        grad = grad_new;
        gn = gn_new;
    }
    Ok((h, gn))
}

/// Extra full Newton steps past the tolerance, kept only while they shrink the
/// gradient. Small gradients pin small coefficients loosely when p > 2.
fn polish(
    problem: &ShiftProblem,
    p: f64,
    q: &mut Vec<Complex>,
    (mut h, mut gn): (Vec<Complex>, f64),
) -> (Vec<Complex>, f64) {
    for _ in 0..POLISH_STEPS {
        let grad = problem.gradient(&h, p);
        let dir = solve_newton(&problem.hessian(&h, q, p), &grad);
        let dh = problem.direction_image(&dir);
        if !(objective_change(&h, &dh, 1.0, p) <= 0.0) {
            break;
        }
        let q_new = step(q, &dir, 1.0);
        let h_new = problem.residual(&q_new);
        let gn_new = euclid(&problem.gradient(&h_new, p));
        if !(gn_new < gn) {
            break;
        }
        *q = q_new;
        h = h_new;
        gn = gn_new;
    }
    (h, gn)
}

fn step(q: &[Complex], dir: &[f64], t: f64) -> Vec<Complex> {
    q.iter()
        .enumerate()
        .map(|(i, qi)| qi + Complex::new(t * dir[2 * i], t * dir[2 * i + 1]))
        .collect()
}

/// Minimizes at exponent `p`, moving from the quadratic case `p = 2` through
/// [`CONTINUATION_STEPS`] intermediate exponents.
pub(crate) fn minimize(problem: &ShiftProblem, p: f64, opts: &SolverOptions) -> Result<Minimum> {
    let mut q = vec![Complex::new(0.0, 0.0); problem.unknowns];
    let mut budget = opts.max_iters;
    let mut iterations = 0;
    let stages: Vec<f64> = if p == 2.0 {
        vec![2.0]
    } else {
        (0..=CONTINUATION_STEPS)
            .map(|k| 2.0 + (p - 2.0) * k as f64 / CONTINUATION_STEPS as f64)
            .collect()
    };
    let mut last = (Vec::new(), f64::INFINITY);
    for (s, &ps) in stages.iter().enumerate() {
        let tol = if s + 1 == stages.len() {
            opts.grad_tol
        } else {
            opts.grad_tol.max(1e-8)
        };
        last = newton_stage(problem, ps, &mut q, tol, opts, &mut budget, &mut iterations)?;
    }
    if problem.unknowns == 0 {
        last.0 = problem.residual(&q);
        last.1 = 0.0;
    } else if opts.step_rule == StepRule::Backtracking {
        last = polish(problem, p, &mut q, last);
    }
    Ok(Minimum {
        q,
        h: last.0,
        grad_norm: last.1,
        iterations,
    })
}

//! Newton solve for the constants that determine a p-inner function with prescribed zeros.
//!
//! The coefficients are `J_k = u_k^<p'-1>` with `u_k = sum_i c_i H_i(k)`, where `H_i(k)` is the
//! divided difference of `x^k` over the first `i + 1` zeros (repeated by multiplicity). The
//! conditions `J^(m)(s) = 0` read `[i = 0] + sum_{k>=1} J_k H_i(k) = 0`, which is exactly the
//! stationarity system of the convex function
//! `G(c) = (1/p') sum |u_k|^p' + Re(c_0 H_0(0))`.

use num_complex::Complex64 as Complex;
use rayon::prelude::*;

use crate::algebra::{signed_power, CoefSeq, ZeroSetSpec};
use crate::error::{Error, Result};
use crate::projection::band::BandMatrix;
use crate::projection::newton::{
    euclid, objective_change, solve_newton, ARMIJO, CONTINUATION_STEPS, POLISH_STEPS,
    SINGULAR_WEIGHT_FLOOR, WEIGHT_FLOOR,
};
use crate::projection::{tail_cutoff, SolverOptions, StepRule};

/// Neglected tail size used to pick the series cap.
pub(crate) const SERIES_EPS: f64 = 1e-14;
/// Largest basis table (rows times columns) the solver will allocate.
const MAX_TABLE: usize = 1 << 27;

/// Constants of one solve, in the divided-difference basis (a triangular change of basis
/// away from the `C_{j,m}` multiplying `k^j s_m^k`), plus the series cap they were solved at.
#[derive(Clone, Debug)]
pub(crate) struct NewtonState {
    pub constants: Vec<Complex>,
    pub series_cap: usize,
}

pub(crate) struct Solved {
    pub j: CoefSeq,
    pub state: NewtonState,
    pub iterations: usize,
}

/// Table of `H_i(k) / sigma_i` for `k = 0..=cap`, stored by `k` so each `k` is one
/// contiguous row of `n` entries; `sigma_i = max_{k>=1} |H_i(k)|`.
struct Basis {
    table: Vec<Complex>,
    n: usize,
    origin: f64,
}

impl Basis {
    fn new(nodes: &[Complex], cap: usize) -> Self {
        let n = nodes.len();
        let mut table = vec![Complex::new(0.0, 0.0); n * (cap + 1)];
        table[0] = Complex::new(1.0, 0.0);
        for k in 1..=cap {
            let (prev, row) = table[(k - 1) * n..(k + 1) * n].split_at_mut(n);
            row[0] = prev[0] * nodes[0];
            for i in 1..n {
                row[i] = if i == k {
                    Complex::new(1.0, 0.0)
                } else {
                    prev[i - 1] + nodes[i] * prev[i]
                };
            }
        }
        let mut sigma = vec![0.0f64; n];
        for row in table[n..].chunks(n) {
            for (s, x) in sigma.iter_mut().zip(row) {
                *s = s.max(x.norm());
            }
        }
        for row in table.chunks_mut(n) {
            for (x, s) in row.iter_mut().zip(&sigma) {
                if *s > 0.0 {
                    *x /= *s;
                }
            }
        }
        let origin = table[0].re;
        Self { table, n, origin }
    }

    fn cap(&self) -> usize {
        self.table.len() / self.n - 1
    }

    /// Rows for `k = 1..=cap`.
    fn rows(&self) -> std::slice::ChunksExact<'_, Complex> {
        self.table[self.n..].chunks_exact(self.n)
    }

    /// `u_k` for `k = 1..=cap`.
    fn combine(&self, c: &[Complex]) -> Vec<Complex> {
        self.rows()
            .map(|row| row.iter().zip(c).map(|(b, ci)| b * ci).sum())
            .collect()
    }

    /// The vanishing conditions `R_i`, with compensated accumulation.
    fn conditions(&self, j: &[Complex]) -> Vec<Complex> {
        let mut acc: Vec<(crate::sum::Accumulator, crate::sum::Accumulator)> =
            (0..self.n).map(|_| Default::default()).collect();
        for (row, jk) in self.rows().zip(j) {
            for ((re, im), b) in acc.iter_mut().zip(row) {
                let x = jk * b;
                re.add(x.re);
                im.add(x.im);
            }
        }
        let mut r: Vec<Complex> = acc
            .iter()
            .map(|(re, im)| Complex::new(re.value(), im.value()))
            .collect();
        r[0] += self.origin;
        r
    }
}

struct Stage<'a> {
    basis: &'a Basis,
    /// Dual exponent `p'` of the stage.
    dual: f64,
}

impl Stage<'_> {
    fn coefficients(&self, u: &[Complex]) -> Vec<Complex> {
        u.iter()
            .map(|&x| signed_power(x, self.dual - 1.0))
            .collect()
    }

    /// `sum_k |J_k|`, the size of the terms in each condition and so the scale of its
    /// rounding error.
    fn mass(&self, u: &[Complex]) -> f64 {
        u.iter().map(|x| x.norm().powf(self.dual - 1.0)).sum()
    }

    fn gradient(&self, u: &[Complex]) -> Vec<f64> {
        let r = self.basis.conditions(&self.coefficients(u));
        r.iter().flat_map(|x| [x.re, -x.im]).collect()
    }

    /// The second-order form `sum_k w_k (|du_k|^2 + (p'-2) Re(conj(n_k) du_k)^2)` is split
    /// into a Hermitian part `P_ij = sum w conj(B_ik) B_jk` and a symmetric part
    /// `S_ij = sum w (p'-2)/2 conj(n_k)^2 B_ik B_jk`, both accumulated in parallel over `k`.
    fn hessian(&self, u: &[Complex]) -> BandMatrix {
        let n = self.basis.n;
        let umax = u.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let rel = if self.dual < 2.0 {
            SINGULAR_WEIGHT_FLOOR
        } else {
            WEIGHT_FLOOR
        };
        let floor = rel * umax.max(f64::MIN_POSITIVE);
        let radial = self.dual - 2.0;
        let table = &self.basis.table[n..];
        let zero = || {
            (
                vec![Complex::new(0.0, 0.0); n * n],
                vec![Complex::new(0.0, 0.0); n * n],
            )
        };
        let (herm, sym) = table
            .par_chunks_exact(n)
            .zip(u.par_iter())
            .with_min_len(2048)
            .fold(zero, |(mut herm, mut sym), (row, uk)| {
                let modulus = uk.norm();
                let (hw, twist) = if modulus > floor {
                    let w = modulus.powf(self.dual - 2.0);
                    let nk = uk / modulus;
                    (
                        w * (1.0 + 0.5 * radial),
                        nk.conj() * nk.conj() * (0.5 * radial * w),
                    )
                } else {
                    (floor.powf(self.dual - 2.0), Complex::new(0.0, 0.0))
                };
                for (i, bi) in row.iter().enumerate() {
                    let wi = bi.conj() * hw;
                    let ti = bi * twist;
                    let (hrow, srow) = (
                        &mut herm[i * n..i * n + i + 1],
                        &mut sym[i * n..i * n + i + 1],
                    );
                    for ((h, s), bj) in hrow.iter_mut().zip(srow.iter_mut()).zip(row) {
                        *h += wi * bj;
                        *s += ti * bj;
                    }
                }
                (herm, sym)
            })
            .reduce(zero, |(mut h1, mut s1), (h2, s2)| {
                h1.iter_mut().zip(h2).for_each(|(a, b)| *a += b);
                s1.iter_mut().zip(s2).for_each(|(a, b)| *a += b);
                (h1, s1)
            });
        let mut hess = BandMatrix::zeros(2 * n, 2 * n - 1);
        for i in 0..n {
            for j in 0..=i {
                let p = herm[i * n + j];
                let s = sym[i * n + j];
                // rows (Re c_i, Im c_i), columns (Re c_j, Im c_j)
                let block = [[p.re + s.re, -p.im - s.im], [p.im - s.im, p.re - s.re]];
                for r in 0..2 {
                    for c in 0..2 {
                        if i == j && c > r {
                            continue;
                        }
                        hess.add(2 * i + r, 2 * j + c, block[r][c]);
                    }
                }
            }
        }
        hess
    }

    /// `G(c + t dc) - G(c)`.
    fn change(&self, u: &[Complex], du: &[Complex], dc0: f64, t: f64) -> f64 {
        objective_change(u, du, t, self.dual) / self.dual + t * dc0 * self.basis.origin
    }
}

fn step(c: &[Complex], dir: &[f64], t: f64) -> Vec<Complex> {
    c.iter()
        .enumerate()
        .map(|(i, ci)| ci + Complex::new(t * dir[2 * i], t * dir[2 * i + 1]))
        .collect()
}

fn as_complex(dir: &[f64]) -> Vec<Complex> {
    dir.chunks(2).map(|d| Complex::new(d[0], d[1])).collect()
}

fn failure(stage: &Stage, c: &[Complex], iterations: usize, grad_norm: f64) -> Error {
    let mut j = vec![Complex::new(1.0, 0.0)];
    j.extend(stage.coefficients(&stage.basis.combine(c)));
    Error::NonConvergence {
        iterations,
        grad_norm,
        last_iterate: Box::new(CoefSeq::from_vec(j)),
    }
}

fn run_stage(
    stage: &Stage,
    c: &mut Vec<Complex>,
    tol: f64,
    opts: &SolverOptions,
    budget: &mut usize,
    iterations: &mut usize,
) -> Result<f64> {
    let mut u = stage.basis.combine(c);
    let mut grad = stage.gradient(&u);
    let mut gn = euclid(&grad);
    let mut stalls = 0;
    while gn > tol * stage.mass(&u).max(1.0) {
        if *budget == 0 {
            return Err(failure(stage, c, *iterations, gn));
        }
        *budget -= 1;
        *iterations += 1;
        let mut dir = solve_newton(&stage.hessian(&u), &grad);
        let mut slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
        if !(slope < 0.0) {
            dir = grad.iter().map(|g| -g).collect();
            slope = -gn * gn;
        }
        let du = stage.basis.combine(&as_complex(&dir));
        let t = match opts.step_rule {
            StepRule::Fixed(t) => t,
            StepRule::Backtracking => {
                let mut t = 1.0;
                let mut best: Option<(f64, f64)> = None;
                loop {
                    let change = stage.change(&u, &du, dir[0], t);
                    match best {
                        None if change <= ARMIJO * t * slope => best = Some((t, change)),
                        Some((_, b)) if change < b => best = Some((t, change)),
                        Some(_) => break,
                        None => {}
                    }
                    t *= 0.5;
                    if t < 1e-12 {
                        break;
                    }
                }
                best.map(|(t, _)| t).unwrap_or(t)
            }
        };
        let c_new = step(c, &dir, t);
        let u_new = stage.basis.combine(&c_new);
        let grad_new = stage.gradient(&u_new);
        let gn_new = euclid(&grad_new);
        if t < 1e-12 && gn_new >= gn {
            stalls += 1;
            if stalls > 5 {
                return Err(failure(stage, c, *iterations, gn));
            }
        }
        *c = c_new;
        u = u_new;
        grad = grad_new;
        gn = gn_new;
    }
    Ok(gn)
}

fn polish(stage: &Stage, c: &mut Vec<Complex>, mut gn: f64) {
    for _ in 0..POLISH_STEPS {
        let u = stage.basis.combine(c);
        let grad = stage.gradient(&u);
        let dir = solve_newton(&stage.hessian(&u), &grad);
        let du = stage.basis.combine(&as_complex(&dir));
        if !(stage.change(&u, &du, dir[0], 1.0) <= 0.0) {
            break;
        }
        let c_new = step(c, &dir, 1.0);
        let gn_new = euclid(&stage.gradient(&stage.basis.combine(&c_new)));
        if !(gn_new < gn) {
            break;
        }
        *c = c_new;
        gn = gn_new;
    }
}

/// Series cap for a zero set at dual exponent `p_conj`.
pub(crate) fn series_cap(spec: &ZeroSetSpec, p_conj: f64) -> usize {
    let nodes = spec.total_multiplicity();
    // the orthogonality pairings see J^<p-1>, whose coefficients decay only like |s|^k when p < 2
    let power = (p_conj - 1.0).min(1.0);
    let cap = tail_cutoff(
        spec.max_modulus(),
        spec.max_multiplicity(),
        power,
        SERIES_EPS,
    );
    cap.max(nodes + 1)
}

/// Solves for the p-inner function of `spec`. A `start` from a previous solve (for example
/// on a prefix of the zeros) is padded with zeros and used at the target exponent directly;
/// if that fails the solve restarts from the quadratic case.
pub(crate) fn solve(
    spec: &ZeroSetSpec,
    p: f64,
    opts: &SolverOptions,
    start: Option<&NewtonState>,
) -> Result<Solved> {
    opts.validate()?;
    let p_conj = p / (p - 1.0);
    let nodes = spec.expanded();
    let cap = match opts.truncation_degree {
        Some(d) => d.max(nodes.len() + 1),
        None => series_cap(spec, p_conj),
    };
    if cap.saturating_mul(nodes.len()) > MAX_TABLE {
        return Err(Error::Limit(format!(
            "series cap {cap} with {} conditions exceeds the table limit",
            nodes.len()
        )));
    }
    let basis = Basis::new(&nodes, cap);
    if let Some(prev) = start.filter(|s| s.constants.len() <= nodes.len()) {
        let mut c = prev.constants.clone();
        c.resize(nodes.len(), Complex::new(0.0, 0.0));
        if let Ok(s) = solve_from(&basis, &[p], c, opts) {
            return Ok(s);
        }
    }
    let stages: Vec<f64> = if p == 2.0 {
        vec![2.0]
    } else {
        (0..=CONTINUATION_STEPS)
            .map(|k| 2.0 + (p - 2.0) * k as f64 / CONTINUATION_STEPS as f64)
            .collect()
    };
    solve_from(
        &basis,
        &stages,
        vec![Complex::new(0.0, 0.0); nodes.len()],
        opts,
    )
}

fn solve_from(
    basis: &Basis,
    stages: &[f64],
    mut c: Vec<Complex>,
    opts: &SolverOptions,
) -> Result<Solved> {
    let mut budget = opts.max_iters;
    let mut iterations = 0;
    let mut last = None;
    for (s, &ps) in stages.iter().enumerate() {
        let stage = Stage {
            basis,
            dual: ps / (ps - 1.0),
        };
        let tol = if s + 1 == stages.len() {
            opts.grad_tol
        } else {
            opts.grad_tol.max(1e-8)
        };
        let gn = run_stage(&stage, &mut c, tol, opts, &mut budget, &mut iterations)?;
        last = Some((stage, gn));
    }
    let (stage, gn) = last.expect("at least one stage");
    if opts.step_rule == StepRule::Backtracking {
        polish(&stage, &mut c, gn);
    }
    let mut j = vec![Complex::new(1.0, 0.0)];
    j.extend(stage.coefficients(&basis.combine(&c)));
    Ok(Solved {
        j: CoefSeq::from_vec(j),
        state: NewtonState {
            constants: c,
            series_cap: basis.cap(),
        },
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_rows_are_divided_differences() {
        let nodes = [
            Complex::new(0.5, 0.1),
            Complex::new(-0.3, 0.2),
            Complex::new(0.5, 0.1),
        ];
        let b = Basis::new(&nodes, 12);
        let raw: Vec<Vec<Complex>> = (0..3)
            .map(|i| b.table.chunks(3).map(|r| r[i]).collect())
            .collect();
        // second row: (t0^k - t1^k) / (t0 - t1), up to the row scale
        let k = 7;
        let dd = (nodes[0].powu(k as u32) - nodes[1].powu(k as u32)) / (nodes[0] - nodes[1]);
        let ratio = raw[1][k] / dd;
        let ratio2 = raw[1][k + 2]
            / ((nodes[0].powu(k as u32 + 2) - nodes[1].powu(k as u32 + 2)) / (nodes[0] - nodes[1]));
        assert!((ratio - ratio2).norm() < 1e-12);
        assert!(raw[2][1].norm() == 0.0);
    }
}

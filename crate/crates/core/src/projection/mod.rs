//! Metric projections onto `[S f]` and onto zero-constrained subspaces, computed as
//! minimizers of `||h||_p^p` over a polynomial multiplier.

pub(crate) mod band;
pub(crate) mod newton;

use num_complex::Complex64 as Complex;
use serde::{Deserialize, Serialize};

use crate::algebra::seq::slice_norm;
use crate::algebra::{polynomial_roots, CoefSeq, Parameters, ZeroSetSpec};
use crate::error::{Error, Result};

use newton::{minimize, Minimum, ShiftProblem};

/// Target size of the neglected coefficient tail when the degree is chosen automatically.
pub const TRUNCATION_EPS: f64 = 1e-12;
/// Automatic degree selection accepts a degree once doubling it moves the norm by less than this.
pub const DOUBLING_TOL: f64 = 1e-9;
/// Largest degree the automatic selection will try.
pub const MAX_AUTO_DEGREE: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// Newton steps scaled by a constant factor, no line search.
    Fixed(f64),
    /// Newton steps with Armijo backtracking.
    Backtracking,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Degree of the multiplier polynomial; `None` selects it from the zeros.
    pub truncation_degree: Option<usize>,
    /// Stationarity tolerance. The zero-set construction applies it relative to the
    /// coefficient mass of `J` when that exceeds 1.
    pub grad_tol: f64,
    /// Newton iterations allowed per solve, summed over all continuation stages.
    pub max_iters: usize,
    pub step_rule: StepRule,
    /// Declared order of the zero of `f` at the origin.
    pub origin_multiplicity: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            truncation_degree: None,
            grad_tol: 1e-10,
            max_iters: 2000,
            step_rule: StepRule::Backtracking,
            origin_multiplicity: 0,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grad_tol must be positive, got {}",
                self.grad_tol
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be positive".into()));
        }
        if self.truncation_degree == Some(0) {
            return Err(Error::InvalidParameter(
                "truncation degree must be positive".into(),
            ));
        }
        if let StepRule::Fixed(t) = self.step_rule {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "fixed step must lie in (0, 1], got {t}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectionResult {
    /// `J = f - Q f`.
    pub co_projection: CoefSeq,
    /// `Q`, with `Q(0) = 0`.
    pub multiplier_poly: CoefSeq,
    pub norm: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub truncation_degree: usize,
}

/// Smallest `K` with `(k^(mult-1) rate^k)^power < eps` for every `k >= K`.
pub(crate) fn tail_cutoff(rate: f64, mult: u32, power: f64, eps: f64) -> usize {
    if rate <= 0.0 {
        return 1;
    }
    let target = eps.ln() / power;
    let lr = rate.ln();
    let excess = |k: f64| (mult as f64 - 1.0) * k.max(1.0).ln() + k * lr - target;
    let mut k = (target / lr).ceil().max(1.0);
    while excess(k) >= 0.0 {
        k = (k * 1.25).ceil();
        if k > 1e12 {
            break;
        }
    }
    // step back to the smallest admissible value past the peak of k^(m-1) rate^k
    let peak = if mult > 1 {
        (mult as f64 - 1.0) / -lr
    } else {
        0.0
    };
    let (mut lo, mut hi) = (peak.max(1.0), k);
    if excess(lo) < 0.0 {
        return lo.ceil() as usize;
    }
    while hi - lo > 1.0 {
        let mid = ((lo + hi) / 2.0).floor();
        if excess(mid) < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi as usize
}

/// Starting degree for the automatic selection, from the geometric decay of the
/// co-projection coefficients (`R^((p'-1) k)`, `R` the largest modulus of a zero inside
/// the disk) and of the approximants of `1/f` (`|zeta|^-k` for zeros outside).
fn initial_degree(f: &CoefSeq, params: Parameters) -> Result<usize> {
    let roots = polynomial_roots(f);
    let mut degree = 1usize;
    for (i, r) in roots.iter().enumerate() {
        let m = r.norm();
        if (m - 1.0).abs() < 1e-9 {
            return Err(Error::Precondition(format!(
                "f has a zero near the unit circle ({r}); set the truncation degree explicitly"
            )));
        }
        let mult = roots
            .iter()
            .enumerate()
            .filter(|(j, s)| *j != i && (*s - r).norm() < 1e-4 * (1.0 + m))
            .count() as u32
            + 1;
        let cut = if m < 1.0 {
            tail_cutoff(m, mult, params.p_conj() - 1.0, TRUNCATION_EPS)
        } else {
            tail_cutoff(1.0 / m, mult, 1.0, TRUNCATION_EPS)
        };
        degree = degree.max(cut);
    }
    Ok(degree + f.effective_degree())
}

fn zero_set_degree(spec: &ZeroSetSpec, params: Parameters) -> usize {
    tail_cutoff(
        spec.max_modulus(),
        spec.max_multiplicity(),
        params.p_conj() - 1.0,
        TRUNCATION_EPS,
    ) + spec.total_multiplicity()
}

/// Runs `solve` at the given degree, or doubles an automatic starting degree until the
/// norm settles.
fn with_degree<F>(
    explicit: Option<usize>,
    start: impl FnOnce() -> Result<usize>,
    p: f64,
    solve: F,
) -> Result<(Minimum, usize)>
where
    F: Fn(usize) -> Result<Minimum>,
{
    if let Some(d) = explicit {
        return Ok((solve(d)?, d));
    }
    let mut d = start()?.clamp(1, MAX_AUTO_DEGREE / 2);
    let mut prev = solve(d)?;
    loop {
        d *= 2;
        let next = solve(d)?;
        let change = (slice_norm(&prev.h, p) - slice_norm(&next.h, p)).abs();
        if change < DOUBLING_TOL {
            return Ok((next, d));
        }
        if 2 * d > MAX_AUTO_DEGREE {
            return Err(Error::Limit(format!(
                "norm still moved by {change:.3e} at degree {d}; set the truncation degree explicitly"
            )));
        }
        prev = next;
    }
}

fn strip_origin(f: &CoefSeq, declared: usize) -> Result<(CoefSeq, usize)> {
    let zeros = f.coeffs().iter().take_while(|c| c.norm() == 0.0).count();
    if zeros == f.len() {
        return Err(Error::Precondition("f is identically zero".into()));
    }
    if zeros != declared {
        return Err(Error::Precondition(if declared == 0 {
            format!("f vanishes to order {zeros} at the origin; declare the origin multiplicity")
        } else {
            format!("declared origin multiplicity {declared} but f vanishes to order {zeros}")
        }));
    }
    Ok((CoefSeq::from_vec(f.coeffs()[zeros..].to_vec()), zeros))
}

/// Metric co-projection of `f` onto `[S f]`: minimizes `||f - Q f||_p` over polynomials `Q`
/// with `Q(0) = 0` and `deg Q <= truncation_degree`.
pub fn project_shift_span(
    f: &CoefSeq,
    params: Parameters,
    opts: &SolverOptions,
) -> Result<ProjectionResult> {
    opts.validate()?;
    let (g, origin) = strip_origin(f, opts.origin_multiplicity)?;
    let lead = g.get(0);
    let g = g.scale(1.0 / lead);
    let g = g.truncate(g.effective_degree());
    let base = g.coeffs().to_vec();
    let (min, degree) = with_degree(
        opts.truncation_degree,
        || initial_degree(&g, params),
        params.p(),
        |d| {
            let problem = ShiftProblem {
                base: &base,
                generator: &base,
                first_shift: 1,
                unknowns: d,
            };
            minimize(&problem, params.p(), opts)
        },
    )?;
    let j = CoefSeq::from_vec(min.h).scale(lead).shift(origin);
    let mut q = vec![Complex::new(0.0, 0.0)];
    q.extend(min.q.iter().map(|c| -c));
    Ok(ProjectionResult {
        norm: crate::algebra::p_norm(&j, params),
        co_projection: j,
        multiplier_poly: CoefSeq::from_vec(q),
        grad_norm: min.grad_norm,
        iterations: min.iterations,
        truncation_degree: degree,
    })
}

/// Distance-minimizing `x + f_W q` over polynomials `q` of degree at most `degree`.
fn project_onto_zero_set(
    x: &CoefSeq,
    spec: &ZeroSetSpec,
    params: Parameters,
    opts: &SolverOptions,
) -> Result<(Minimum, usize)> {
    opts.validate()?;
    let f = spec.polynomial();
    let generator = f.coeffs().to_vec();
    let base = x.coeffs().to_vec();
    with_degree(
        opts.truncation_degree,
        || Ok(zero_set_degree(spec, params) + x.effective_degree()),
        params.p(),
        |d| {
            let problem = ShiftProblem {
                base: &base,
                generator: &generator,
                first_shift: 0,
                unknowns: d + 1,
            };
            minimize(&problem, params.p(), opts)
        },
    )
}

/// The extremal function `Phi = 1 - G`, where `G` is the best approximation of `1` among
/// functions vanishing on `W`.
pub fn extremal_phi_direct(
    spec: &ZeroSetSpec,
    params: Parameters,
    opts: &SolverOptions,
) -> Result<CoefSeq> {
    let one = CoefSeq::constant(Complex::new(1.0, 0.0));
    let (min, _) = project_onto_zero_set(&one, spec, params, opts)?;
    Ok(CoefSeq::from_vec(min.h))
}

/// Metric projections `P_n x` of `x` onto the subspaces of functions vanishing on each
/// zero set of a nested chain.
pub fn nested_projection_sequence(
    x: &CoefSeq,
    chain: &[ZeroSetSpec],
    params: Parameters,
    opts: &SolverOptions,
) -> Result<Vec<CoefSeq>> {
    for (n, pair) in chain.windows(2).enumerate() {
        if !pair[0].is_contained_in(&pair[1]) {
            return Err(Error::Precondition(format!(
                "chain is not nested: entry {} is not contained in entry {}",
                n,
                n + 1
            )));
        }
    }
    chain
        .iter()
        .map(|spec| {
            let (min, _) = project_onto_zero_set(x, spec, params, opts)?;
            Ok(x.sub(&CoefSeq::from_vec(min.h)))
        })
        .collect()
}

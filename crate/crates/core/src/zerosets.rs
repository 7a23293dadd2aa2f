//! Zero-set certificates from prefix sequences of p-inner functions, the classical
//! diagnostics (Blaschke, Newman and Vinogradov sums) and the product bound built from
//! single-zero inner factors.

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{DiskPoint, Parameters, ZeroSetSpec};
use crate::error::{Error, Result};
use crate::inner::{
    b_factor_norm, inner_norm_from_phi, phi_from_inner, solve_inner_newton,
    solve_inner_newton_from, InnerResult, NewtonState,
};
use crate::projection::SolverOptions;

/// Relative spread of the last norms below which a sequence counts as settled.
pub const BOUNDED_SPREAD: f64 = 1e-6;
/// Number of trailing norms compared by the bounded test.
pub const BOUNDED_WINDOW: usize = 5;
/// A tail of ratios must stay this far below 1 to count as an exponential approach.
pub const NEWMAN_MARGIN: f64 = 0.05;
/// Estimated remaining sum below which partial sums count as Cauchy.
pub const CAUCHY_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    BoundedEvidence,
    GrowthEvidence,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct PrefixFailure {
    /// Length of the prefix whose solve failed.
    pub prefix: usize,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateSequence {
    /// `||J_n||_p` for `n = 1..`.
    pub prefix_norms: Vec<f64>,
    pub phi_norms: Vec<f64>,
    pub series_caps: Vec<usize>,
    pub iterations: Vec<usize>,
    pub verdict: Verdict,
    /// Set when a solve failed; the sequences stop before that prefix.
    pub failure: Option<PrefixFailure>,
}

impl CertificateSequence {
    /// Worst violation of `||J_n|| <= ||J_{n+1}||`, zero when the sequence is monotone.
    pub fn monotonicity_defect(&self) -> f64 {
        self.prefix_norms
            .windows(2)
            .map(|w| (w[0] - w[1]).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Largest relative gap between `||J_n||_p^p` and the value recovered from `||Phi_n||_p`.
    pub fn phi_consistency(&self, params: Parameters) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (norm, phi) in self.prefix_norms.iter().zip(&self.phi_norms) {
            let direct = norm.powf(params.p());
            let back = inner_norm_from_phi(*phi, params)?;
            worst = worst.max((back - direct).abs() / direct);
        }
        Ok(worst)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    /// Prefixes in order, each warm-started from the previous constants.
    Sequential,
    /// Independent cold solves spread over the rayon pool.
    Parallel,
}

fn check_prefix_len(spec: &ZeroSetSpec, n: usize) -> Result<()> {
    if n == 0 || n > spec.distinct_len() {
        return Err(Error::InvalidParameter(format!(
            "prefix length must lie in 1..={}, got {n}",
            spec.distinct_len()
        )));
    }
    Ok(())
}

/// Norms of the p-inner functions of the first `n` zeros, `n = 1..=n_max`, solved in order
/// with warm starts.
pub fn j_norm_sequence(
    spec: &ZeroSetSpec,
    params: Parameters,
    n_max: usize,
    opts: &SolverOptions,
) -> Result<CertificateSequence> {
    j_norm_sequence_with(spec, params, n_max, opts, SolveMode::Sequential)
}

pub fn j_norm_sequence_with(
    spec: &ZeroSetSpec,
    params: Parameters,
    n_max: usize,
    opts: &SolverOptions,
    mode: SolveMode,
) -> Result<CertificateSequence> {
    check_prefix_len(spec, n_max)?;
    opts.validate()?;
    let solve_prefix =
        |n: usize, start: Option<&NewtonState>| -> Result<(InnerResult, NewtonState, f64)> {
            let prefix = spec.prefix(n)?;
            let (j, state) = solve_inner_newton_from(&prefix, params, opts, start)?;
            let phi = phi_from_inner(&j, params)?;
            Ok((j, state, phi.phi_norm))
        };
    let outcomes: Vec<Result<(InnerResult, NewtonState, f64)>> = match mode {
        SolveMode::Sequential => {
            let mut out = Vec::with_capacity(n_max);
            let mut state: Option<NewtonState> = None;
            for n in 1..=n_max {
                let r = solve_prefix(n, state.as_ref());
                let failed = r.is_err();
                if let Ok((_, s, _)) = &r {
                    state = Some(s.clone());
                }
                out.push(r);
                if failed {
                    break;
                }
            }
            out
        }
        SolveMode::Parallel => (1..=n_max)
            .into_par_iter()
            .map(|n| solve_prefix(n, None))
            .collect(),
    };
    let mut seq = CertificateSequence {
        prefix_norms: Vec::new(),
        phi_norms: Vec::new(),
        series_caps: Vec::new(),
        iterations: Vec::new(),
        verdict: Verdict::Inconclusive,
        failure: None,
    };
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok((j, state, phi)) => {
                seq.prefix_norms.push(j.norm);
                seq.phi_norms.push(phi);
                seq.series_caps.push(state.series_cap);
                seq.iterations.push(j.iterations);
            }
            Err(e) => {
                seq.failure = Some(PrefixFailure {
                    prefix: i + 1,
                    message: e.to_string(),
                });
                break;
            }
        }
    }
    seq.verdict = verdict(&seq.prefix_norms);
    Ok(seq)
}

/// Heuristic reading of a finite norm sequence: settled if the last few norms agree, growing
/// if `log ||J_n||` bends upward against `log n` over the second half, otherwise undecided.
pub fn verdict(norms: &[f64]) -> Verdict {
    if norms.len() >= BOUNDED_WINDOW {
        let tail = &norms[norms.len() - BOUNDED_WINDOW..];
        let hi = tail.iter().copied().fold(f64::MIN, f64::max);
        let lo = tail.iter().copied().fold(f64::MAX, f64::min);
        if hi - lo < BOUNDED_SPREAD * hi {
            return Verdict::BoundedEvidence;
        }
    }
    let start = norms.len() / 2;
    if norms.len() - start >= 3 {
        let slopes: Vec<f64> = (start.max(1)..norms.len())
            .map(|i| {
                let (n0, n1) = (i as f64, (i + 1) as f64);
                (norms[i].ln() - norms[i - 1].ln()) / (n1.ln() - n0.ln())
            })
            .collect();
        if slopes.len() >= 2
            && slopes.iter().all(|s| *s > 0.0)
            && slopes.windows(2).all(|w| w[1] >= w[0])
        {
            return Verdict::GrowthEvidence;
        }
    }
    Verdict::Inconclusive
}

/// `(1 - |w|, multiplicity)` for each distinct zero, in the spec's order.
pub fn levels(spec: &ZeroSetSpec) -> Vec<(f64, u64)> {
    spec.zeros()
        .iter()
        .map(|(w, m)| (1.0 - w.modulus(), *m as u64))
        .collect()
}

fn prefix_levels(spec: &ZeroSetSpec, n: usize) -> Result<Vec<(f64, u64)>> {
    check_prefix_len(spec, n)?;
    let mut l = levels(spec);
    l.truncate(n);
    Ok(l)
}

/// `sum mult_k (1 - |w_k|)` over the first `n` distinct zeros.
pub fn blaschke_sum(spec: &ZeroSetSpec, n: usize) -> Result<f64> {
    Ok(blaschke_sum_levels(&prefix_levels(spec, n)?))
}

/// Blaschke sum over `(gap, count)` levels.
pub fn blaschke_sum_levels(levels: &[(f64, u64)]) -> f64 {
    crate::sum::sum(levels.iter().map(|(gap, count)| gap * *count as f64))
}

/// `sum mult_k (1 - |w_k|)^(1 + eps)` over the first `n` distinct zeros.
pub fn vinogradov_sums(spec: &ZeroSetSpec, eps: f64, n: usize) -> Result<f64> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "eps must be nonnegative, got {eps}"
        )));
    }
    Ok(vinogradov_sum_levels(&prefix_levels(spec, n)?, eps))
}

pub fn vinogradov_sum_levels(levels: &[(f64, u64)], eps: f64) -> f64 {
    crate::sum::sum(
        levels
            .iter()
            .map(|(gap, count)| gap.powf(1.0 + eps) * *count as f64),
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct NewmanReport {
    /// Successive gap ratios; a level holding several zeros contributes a single ratio 1.
    pub ratios: Vec<f64>,
    pub sup_ratio: f64,
    /// Supremum over the second half of the ratios.
    pub tail_sup: f64,
    /// The ratios stay bounded away from 1 and do not drift toward it.
    pub exponential: bool,
}

/// `sup_k (1 - |w_{k+1}|) / (1 - |w_k|)`, counting multiplicity.
pub fn newman_rate_check(spec: &ZeroSetSpec) -> Result<f64> {
    Ok(newman_report(spec)?.sup_ratio)
}

pub fn newman_report(spec: &ZeroSetSpec) -> Result<NewmanReport> {
    newman_report_levels(&levels(spec))
}

pub fn newman_report_levels(levels: &[(f64, u64)]) -> Result<NewmanReport> {
    let total: u64 = levels.iter().map(|(_, c)| c).sum();
    if total < 2 {
        return Err(Error::InvalidParameter(
            "the rate check needs at least two zeros".into(),
        ));
    }
    let mut ratios = Vec::new();
    for (i, (gap, count)) in levels.iter().enumerate() {
        if *count >= 2 {
            ratios.push(1.0);
        }
        if let Some((next, _)) = levels.get(i + 1) {
            ratios.push(next / gap);
        }
    }
    let sup = |r: &[f64]| r.iter().copied().fold(0.0, f64::max);
    let half = ratios.len() / 2;
    let tail_sup = sup(&ratios[half..]);
    let head_sup = sup(&ratios[..half]);
    let exponential = tail_sup < 1.0 - NEWMAN_MARGIN && (1.0 - tail_sup) >= 0.5 * (1.0 - head_sup);
    Ok(NewmanReport {
        sup_ratio: sup(&ratios),
        tail_sup,
        exponential,
        ratios,
    })
}

/// Exponents `r_k > 1` whose total `sum (1 - 1/r_k)` is the budget `1/p' - epsilon`.
#[derive(Clone, Debug, Serialize)]
pub struct RSequence {
    r: Vec<f64>,
    budget: f64,
    epsilon: f64,
}

impl RSequence {
    /// `r_k = 1 / (1 - budget 2^-k / S_n)` with `S_n = sum_{j<=n} 2^-j`, which spends the budget
    /// `1/p' - epsilon` exactly over `n` terms.
    pub fn geometric(params: Parameters, epsilon: f64, n: usize) -> Result<Self> {
        let budget = 1.0 / params.p_conj() - epsilon;
        if !(epsilon > 0.0 && budget > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1/p') = (0, {}), got {epsilon}",
                1.0 / params.p_conj()
            )));
        }
        if n == 0 {
            return Err(Error::InvalidParameter(
                "sequence length must be positive".into(),
            ));
        }
        let total = 1.0 - 0.5f64.powi(n as i32);
        let r = (1..=n)
            .map(|k| 1.0 / (1.0 - budget * 0.5f64.powi(k as i32) / total))
            .collect();
        Ok(Self { r, budget, epsilon })
    }

    /// Default choice: half of the available budget `1/p'` is kept in reserve.
    pub fn default_for(params: Parameters, n: usize) -> Result<Self> {
        Self::geometric(params, 0.5 / params.p_conj(), n)
    }

    /// Arbitrary exponents; the budget is whatever they spend, and may violate the hypothesis.
    pub fn from_values(r: Vec<f64>, params: Parameters) -> Result<Self> {
        if r.is_empty() || r.iter().any(|x| !(*x > 1.0 && x.is_finite())) {
            return Err(Error::InvalidParameter(
                "every r_k must be a finite number above 1".into(),
            ));
        }
        let budget = crate::sum::sum(r.iter().map(|x| 1.0 - 1.0 / x));
        Ok(Self {
            epsilon: 1.0 / params.p_conj() - budget,
            r,
            budget,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.r
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PkSequence {
    pub p_values: Vec<f64>,
    pub p_star: f64,
}

/// `1/p_k = 1/p_{k-1} + 1 - 1/r_k` from `p_0 = p`, and the limit `p* = 1/(1/p + budget)`.
pub fn pk_sequence(params: Parameters, r: &RSequence) -> Result<PkSequence> {
    let limit = 1.0 / params.p_conj();
    if !(r.budget() < limit) {
        return Err(Error::Precondition(format!(
            "budget {} must stay below 1/p' = {limit}",
            r.budget()
        )));
    }
    let mut inv = 1.0 / params.p();
    let p_values = r
        .values()
        .iter()
        .map(|rk| {
            inv += 1.0 - 1.0 / rk;
            1.0 / inv
        })
        .collect();
    let p_star = 1.0 / (1.0 / params.p() + r.budget());
    Ok(PkSequence { p_values, p_star })
}

#[derive(Clone, Debug, Serialize)]
pub struct YoungBound {
    pub value: f64,
    /// The last factor was replaced by its uniform bound 2.
    pub capped: bool,
}

/// `prod_{k<n} ||B_{w_k,r_k}||_{r_k} * ||B_{w_n,r_n}||_{p*}`, an upper bound for `||J_n||_p`.
pub fn young_product_bound(
    spec: &ZeroSetSpec,
    r: &RSequence,
    params: Parameters,
    n: usize,
) -> Result<YoungBound> {
    let zeros = spec.expanded();
    if n == 0 || n > zeros.len() || n > r.len() {
        return Err(Error::InvalidParameter(format!(
            "n must lie in 1..={}, got {n}",
            zeros.len().min(r.len())
        )));
    }
    let p_star = pk_sequence(params, r)?.p_star;
    let rs = r.values();
    let mut value = 1.0;
    for k in 0..n - 1 {
        value *= b_factor_norm(DiskPoint::new(zeros[k])?, rs[k], rs[k])?;
    }
    let w = DiskPoint::new(zeros[n - 1])?;
    let last = b_factor_norm(w, rs[n - 1], p_star)?;
    let r_conj = rs[n - 1] / (rs[n - 1] - 1.0);
    let m = w.modulus();
    let chain = (r_conj - 1.0) * p_star >= r_conj;
    let uniform = (1.0 + m.powf(-p_star)).powf(1.0 / p_star) <= 2.0;
    let capped = chain && uniform;
    value *= if capped { 2.0 } else { last };
    Ok(YoungBound { value, capped })
}

#[derive(Clone, Debug, Serialize)]
pub struct BlaslikeReport {
    pub budget: f64,
    /// `budget < 1/p'`.
    pub budget_ok: bool,
    /// Partial sums of `(1 - |w_k|^{r_k'})^{r_k - 1}`.
    pub partial_sums: Vec<f64>,
    /// Geometric extrapolation of the remaining sum from the last two terms.
    pub tail_estimate: f64,
    pub tail_cauchy: bool,
    pub pass: bool,
    pub statement: String,
}

/// Checks the sufficient condition on the first `n` zeros; says nothing about the infinite tail.
pub fn blaslike_sufficient(
    spec: &ZeroSetSpec,
    r: &RSequence,
    params: Parameters,
    n: usize,
) -> Result<BlaslikeReport> {
    let zeros = spec.expanded();
    if n == 0 || n > zeros.len() || n > r.len() {
        return Err(Error::InvalidParameter(format!(
            "n must lie in 1..={}, got {n}",
            zeros.len().min(r.len())
        )));
    }
    let budget_ok = r.budget() < 1.0 / params.p_conj();
    let terms: Vec<f64> = zeros[..n]
        .iter()
        .zip(r.values())
        .map(|(w, rk)| {
            let rc = rk / (rk - 1.0);
            let one_minus = -(rc * w.norm().ln()).exp_m1();
            one_minus.powf(rk - 1.0)
        })
        .collect();
    let mut acc = crate::sum::Accumulator::new();
    let partial_sums: Vec<f64> = terms
        .iter()
        .map(|t| {
            acc.add(*t);
            acc.value()
        })
        .collect();
    let tail_estimate = match terms.as_slice() {
        [.., a, b] if *a > 0.0 && b < a => b * (b / a) / (1.0 - b / a),
        [.., b] if *b == 0.0 => 0.0,
        _ => f64::INFINITY,
    };
    let tail_cauchy = tail_estimate < CAUCHY_TOL;
    let pass = budget_ok && tail_cauchy;
    let statement = format!(
        "hypotheses {} on the first {n} zeros",
        if pass { "verified" } else { "not verified" }
    );
    Ok(BlaslikeReport {
        budget: r.budget(),
        budget_ok,
        partial_sums,
        tail_estimate,
        tail_cauchy,
        pass,
        statement,
    })
}

/// Cold solve of one prefix; exposed for callers that only need a single certificate entry.
pub fn prefix_inner(
    spec: &ZeroSetSpec,
    params: Parameters,
    n: usize,
    opts: &SolverOptions,
) -> Result<InnerResult> {
    check_prefix_len(spec, n)?;
    solve_inner_newton(&spec.prefix(n)?, params, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Complex;
    use crate::inner::linear_inner_closed_form;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn params(p: f64) -> Parameters {
        Parameters::new(p).unwrap()
    }

    fn radial(moduli: &[f64]) -> ZeroSetSpec {
        ZeroSetSpec::simple(&moduli.iter().map(|m| c(*m, 0.0)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn p2_norms_are_products_of_reciprocals() {
        let spec = radial(&[0.5, 0.6, 0.7]);
        let seq = j_norm_sequence(&spec, params(2.0), 3, &SolverOptions::default()).unwrap();
        let expected = [2.0, 10.0 / 3.0, 100.0 / 21.0];
        for (a, b) in seq.prefix_norms.iter().zip(expected) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!(seq.phi_consistency(params(2.0)).unwrap() < 1e-8);
    }

    #[test]
    fn first_prefix_matches_closed_form() {
        let spec = ZeroSetSpec::simple(&[c(0.3, 0.5), c(-0.6, 0.1)]).unwrap();
        let seq = j_norm_sequence(&spec, params(3.0), 1, &SolverOptions::default()).unwrap();
        let w = DiskPoint::new(c(0.3, 0.5)).unwrap();
        let closed = linear_inner_closed_form(w, params(3.0), 400).unwrap();
        assert!((seq.prefix_norms[0] - closed.norm).abs() < 1e-9);
    }

    #[test]
    fn norms_are_monotone_for_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3 {
            let zeros: Vec<Complex> = (0..5)
                .map(|_| Complex::from_polar(rng.gen_range(0.2..0.85), rng.gen_range(0.0..6.28)))
                .collect();
            let spec = ZeroSetSpec::simple(&zeros).unwrap();
            let seq = j_norm_sequence(&spec, params(3.0), 5, &SolverOptions::default()).unwrap();
            assert!(seq.monotonicity_defect() <= 1e-10);
            assert!(seq.failure.is_none());
        }
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let spec = radial(&[0.5, -0.6, 0.7, 0.8]);
        let opts = SolverOptions::default();
        let a = j_norm_sequence_with(&spec, params(2.5), 4, &opts, SolveMode::Sequential).unwrap();
        let b = j_norm_sequence_with(&spec, params(2.5), 4, &opts, SolveMode::Parallel).unwrap();
        for (x, y) in a.prefix_norms.iter().zip(&b.prefix_norms) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn failures_truncate_the_sequence() {
        let spec = radial(&[0.5, 0.6, 0.7]);
        let opts = SolverOptions {
            max_iters: 1,
            ..SolverOptions::default()
        };
        let seq = j_norm_sequence(&spec, params(3.0), 3, &opts).unwrap();
        let failure = seq.failure.unwrap();
        assert_eq!(seq.prefix_norms.len(), failure.prefix - 1);
        assert!(j_norm_sequence(&spec, params(3.0), 4, &SolverOptions::default()).is_err());
    }

    #[test]
    fn verdicts() {
        assert_eq!(
            verdict(&[1.0, 2.0, 2.5, 2.5, 2.5, 2.5, 2.5]),
            Verdict::BoundedEvidence
        );
        let growing: Vec<f64> = (1..=10).map(|n| (0.5 * n as f64).exp()).collect();
        assert_eq!(verdict(&growing), Verdict::GrowthEvidence);
        assert_eq!(verdict(&[1.0, 2.0]), Verdict::Inconclusive);
    }

    #[test]
    fn blaschke_examples() {
        let moduli: Vec<f64> = (1..=10).map(|k| 1.0 - 0.5f64.powi(k)).collect();
        let spec = radial(&moduli);
        assert!((blaschke_sum(&spec, 10).unwrap() - (1.0 - 0.5f64.powi(10))).abs() < 1e-15);
        let quarter =
            ZeroSetSpec::simple(&[c(0.5, 0.0), c(-0.5, 0.0), c(0.0, 0.5), c(0.0, -0.5)]).unwrap();
        assert!((blaschke_sum(&quarter, 4).unwrap() - 2.0).abs() < 1e-15);
        assert!(blaschke_sum(&quarter, 5).is_err());
        assert_eq!(
            vinogradov_sums(&spec, 0.0, 10).unwrap(),
            blaschke_sum(&spec, 10).unwrap()
        );
    }

    #[test]
    fn newman_examples() {
        let dyadic = radial(&(1..=12).map(|k| 1.0 - 0.5f64.powi(k)).collect::<Vec<_>>());
        let r = newman_report(&dyadic).unwrap();
        assert!((r.sup_ratio - 0.5).abs() < 1e-12);
        assert!(r.exponential);
        let harmonic = radial(&(2..=40).map(|k| 1.0 - 1.0 / k as f64).collect::<Vec<_>>());
        let r = newman_report(&harmonic).unwrap();
        assert!(r.sup_ratio < 1.0);
        assert!(!r.exponential);
        let flat = ZeroSetSpec::simple(&[c(0.5, 0.0), c(-0.5, 0.0), c(0.0, 0.5)]).unwrap();
        assert!((newman_rate_check(&flat).unwrap() - 1.0).abs() < 1e-15);
        assert!(newman_rate_check(&radial(&[0.5])).is_err());
        let repeated = ZeroSetSpec::new(vec![(c(0.5, 0.0), 3)]).unwrap();
        assert_eq!(newman_rate_check(&repeated).unwrap(), 1.0);
    }

    #[test]
    fn vinogradov_partial_sums_settle() {
        let levels: Vec<(f64, u64)> = (1..=100_000u64)
            .map(|k| (1.0 / (k * k) as f64, 1))
            .collect();
        let full = vinogradov_sum_levels(&levels, 0.1);
        let half = vinogradov_sum_levels(&levels[..50_000], 0.1);
        assert!(full - half < 1e-5);
        // remaining tail past 10^5 is about n^-1.2 / 1.2
        assert!(1e5f64.powf(-1.2) / 1.2 < 1e-6);
    }

    #[test]
    fn r_sequence_spends_budget() {
        let p = params(1.5);
        let r = RSequence::geometric(p, 0.05, 30).unwrap();
        let spent: f64 = r.values().iter().map(|x| 1.0 - 1.0 / x).sum();
        assert!((spent - (1.0 / 3.0 - 0.05)).abs() < 1e-12);
        assert!(r.values().last().unwrap() - 1.0 < 0.1);
        assert!(r.values().windows(2).all(|w| w[1] < w[0]));
        assert!(RSequence::geometric(p, 0.5, 4).is_err());
    }

    #[test]
    fn pk_examples() {
        let p = params(4.0);
        let r = RSequence::from_values(vec![2.0], p).unwrap();
        let pk = pk_sequence(p, &r).unwrap();
        assert!((pk.p_values[0] - 4.0 / 3.0).abs() < 1e-15);

        let r = RSequence::geometric(p, 0.1, 20).unwrap();
        let pk = pk_sequence(p, &r).unwrap();
        let mut prev = 4.0f64;
        let mut spent = 0.0;
        for (pk_n, rk) in pk.p_values.iter().zip(r.values()) {
            assert!((1.0 / pk_n + 1.0 / rk - (1.0 / prev + 1.0)).abs() < 1e-12);
            spent += 1.0 - 1.0 / rk;
            assert!((1.0 / pk_n - (0.25 + spent)).abs() < 1e-12);
            assert!(*pk_n < prev);
            prev = *pk_n;
        }
        assert!((pk.p_star - 1.0 / (0.25 + 0.75 - 0.1)).abs() < 1e-12);
        assert!(pk.p_star > 1.0);
        let over = RSequence::from_values(vec![2.0, 2.0], p).unwrap();
        assert!(pk_sequence(p, &over).is_err());
    }

    #[test]
    fn young_single_factor_and_dominance() {
        let p = params(2.5);
        let spec = radial(&[0.5, 0.7, 0.85, 0.93]);
        let r = RSequence::default_for(p, 4).unwrap();
        let p_star = pk_sequence(p, &r).unwrap().p_star;
        let one = young_product_bound(&spec, &r, p, 1).unwrap();
        let direct =
            b_factor_norm(DiskPoint::new(c(0.5, 0.0)).unwrap(), r.values()[0], p_star).unwrap();
        assert!(one.capped || (one.value - direct).abs() < 1e-15);
        let seq = j_norm_sequence(&spec, p, 4, &SolverOptions::default()).unwrap();
        for (n, norm) in seq.prefix_norms.iter().enumerate() {
            assert!(young_product_bound(&spec, &r, p, n + 1).unwrap().value >= *norm);
        }
    }

    #[test]
    fn blaslike_reports() {
        let p = params(2.0);
        let spec = radial(&(1..=12).map(|k| 1.0 - 0.1f64.powi(k)).collect::<Vec<_>>());
        let r = RSequence::default_for(p, 12).unwrap();
        let report = blaslike_sufficient(&spec, &r, p, 12).unwrap();
        assert!(report.budget_ok);
        assert!(report.partial_sums.windows(2).all(|w| w[1] >= w[0]));

        let greedy = RSequence::from_values(vec![3.0; 12], p).unwrap();
        let report = blaslike_sufficient(&spec, &greedy, p, 12).unwrap();
        assert!(!report.budget_ok);
        assert!(!report.pass);
        assert!(report.statement.contains("not verified"));
    }
}

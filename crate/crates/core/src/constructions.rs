//! Explicit zero-set families built from sparse polynomials whose products never collect
//! like terms: products of single-zero inner factors (optionally composed with `z^k`), the
//! doubly exponential family with slowly approaching moduli, and the factorial family whose
//! zeros violate the Blaschke condition when `p > 2`.

use std::f64::consts::TAU;

use num_complex::Complex64 as Complex;
use serde::Serialize;

use crate::algebra::{
    signed_power, sparse_multiply, sparse_multiply_disjoint, sparse_p_norm, DiskPoint, Parameters,
    SparsePoly, ZeroSetSpec,
};
use crate::error::{Error, Result};
use crate::sum::{self, Accumulator};
use crate::zerosets::{young_product_bound, RSequence};

/// Largest slow-family index; `N_7^2 = 2^126` does not fit in 64 bits.
pub const SLOW_MAX_LEVEL: usize = 6;
/// Largest factorial-family index; the product then has `9! = 362880` terms.
pub const FACTORIAL_MAX_LEVEL: usize = 8;
/// Most roots produced by [`TargetedRoots::materialize`].
pub const MATERIALIZE_CAP: u64 = 1_000_000;
/// Geometric factors are cut where a coefficient drops below this fraction of the first.
pub const FACTOR_TRUNCATION: f64 = 1e-17;
const MAX_FACTOR_TERMS: u64 = 1_000_000;
const MAX_PRODUCT_TERMS: usize = 2_000_000;

/// `count` roots of modulus `exp(log_modulus)`, equally spaced in argument from the positive axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TargetedRoots {
    pub level: usize,
    pub modulus: f64,
    /// Kept separately because the modulus rounds to 1 for the outer levels.
    pub log_modulus: f64,
    pub count: u64,
    pub spacing: f64,
}

impl TargetedRoots {
    fn new(level: usize, log_modulus: f64, count: u64) -> Self {
        Self {
            level,
            modulus: log_modulus.exp(),
            log_modulus,
            count,
            spacing: TAU / count as f64,
        }
    }

    pub fn root(&self, index: u64) -> Complex {
        Complex::from_polar(self.modulus, self.spacing * (index % self.count) as f64)
    }

    pub fn materialize(&self) -> Result<Vec<Complex>> {
        if self.count > MATERIALIZE_CAP {
            return Err(Error::Limit(format!(
                "level {} has {} roots, above the cap {MATERIALIZE_CAP}",
                self.level, self.count
            )));
        }
        Ok((0..self.count).map(|l| self.root(l)).collect())
    }

    /// `|F(root)|` for the `index`-th root, with the phase reduced exactly.
    pub fn residual(&self, poly: &SparsePoly, index: u64) -> f64 {
        poly.eval_at_root(self.log_modulus, index % self.count, self.count)
            .norm()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyOutput {
    pub factors: Vec<SparsePoly>,
    pub product: SparsePoly,
    pub exact_norm: f64,
    /// The estimate as it appears in the construction: a bound on `exact_norm^p` for the slow
    /// and factorial families, and on `exact_norm` for the geometric one.
    pub bound_product: f64,
    /// `bound_product` converted to a bound on `exact_norm`.
    pub norm_bound: f64,
    pub targeted_roots: Vec<TargetedRoots>,
    pub r_values: Vec<f64>,
    /// `sum_{j<=k} count_j (1 - r_j)` for each prefix of levels.
    pub blaschke_partials: Vec<f64>,
    pub warnings: Vec<String>,
}

impl FamilyOutput {
    pub fn term_count(&self) -> usize {
        self.product.len()
    }

    /// `prod (1 + len(factor))`, the size of the product when no exponents coincide.
    pub fn expected_term_count(&self) -> usize {
        self.factors.iter().map(|f| f.len()).product()
    }

    pub fn total_roots(&self) -> u64 {
        self.targeted_roots.iter().map(|t| t.count).sum()
    }

    /// Largest `|F(root)|` over up to `per_level` roots of each level, spread evenly in index.
    pub fn max_root_residual(&self, per_level: u64) -> f64 {
        let mut worst = 0.0f64;
        for level in &self.targeted_roots {
            let step = (level.count / per_level.max(1)).max(1);
            let mut index = 0;
            while index < level.count {
                worst = worst.max(level.residual(&self.product, index));
                index += step;
            }
        }
        worst
    }
}

fn finish(
    factors: Vec<SparsePoly>,
    product: SparsePoly,
    params: Parameters,
    bound_product: f64,
    bound_is_power: bool,
    targeted_roots: Vec<TargetedRoots>,
    warnings: Vec<String>,
) -> FamilyOutput {
    let r_values = targeted_roots.iter().map(|t| t.modulus).collect();
    let mut acc = Accumulator::new();
    let blaschke_partials = targeted_roots
        .iter()
        .map(|t| {
            acc.add(t.count as f64 * -t.log_modulus.exp_m1());
            acc.value()
        })
        .collect();
    FamilyOutput {
        exact_norm: sparse_p_norm(&product, params),
        norm_bound: if bound_is_power {
            bound_product.powf(1.0 / params.p())
        } else {
            bound_product
        },
        bound_product,
        factors,
        product,
        targeted_roots,
        r_values,
        blaschke_partials,
        warnings,
    }
}

fn expand_disjoint(factors: &[SparsePoly]) -> Result<SparsePoly> {
    let mut product = SparsePoly::one();
    for f in factors {
        product = sparse_multiply_disjoint(&product, f)?;
    }
    Ok(product)
}

/// `1 - scale * sum_e exp(-e log_r) z^e` over the given exponents.
fn level_factor(scale: f64, log_r: f64, exponents: impl IntoIterator<Item = u64>) -> SparsePoly {
    let mut terms = vec![(0, Complex::new(1.0, 0.0))];
    terms.extend(
        exponents
            .into_iter()
            .map(|e| (e, Complex::new(-scale * (-(e as f64) * log_r).exp(), 0.0))),
    );
    SparsePoly::from_terms(terms)
}

/// Truncated series of `B_{w,r}(z^stride)`, the r-inner function with the single zero `w`.
fn inner_factor(w: f64, r: f64, stride: u64) -> Result<SparsePoly> {
    let w_point = DiskPoint::new(Complex::new(w, 0.0))?;
    if w <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "moduli must lie in (0, 1), got {w}"
        )));
    }
    let r_conj = r / (r - 1.0);
    let ratio = signed_power(w_point.value(), r_conj - 1.0).re;
    let tail = if ratio > 0.0 {
        (FACTOR_TRUNCATION.ln() / ratio.ln()).ceil().max(0.0) as u64 + 1
    } else {
        1
    };
    if tail > MAX_FACTOR_TERMS {
        return Err(Error::Limit(format!(
            "factor for w = {w}, r = {r} needs {tail} terms, above {MAX_FACTOR_TERMS}"
        )));
    }
    let mut terms = vec![(0, Complex::new(1.0, 0.0))];
    let mut c = (w.ln() * r_conj).exp_m1() / w;
    for i in 1..=tail {
        let e = i.checked_mul(stride).ok_or(Error::ExponentOverflow {
            left: i,
            right: stride,
        })?;
        terms.push((e, Complex::new(c, 0.0)));
        c *= ratio;
    }
    Ok(SparsePoly::from_terms(terms))
}

/// Products of the r-inner factors `B_{w_k, r_k}` (or `B_{w_k, r_k}(z^k)` when `rotate` is set)
/// for the first `n` moduli, with the Young-inequality bound on the product norm.
pub fn geometric_family(
    w_moduli: &[f64],
    r: &RSequence,
    rotate: bool,
    params: Parameters,
    n: usize,
) -> Result<FamilyOutput> {
    if n == 0 || n > w_moduli.len() || n > r.len() {
        return Err(Error::InvalidParameter(format!(
            "n must lie in 1..={}, got {n}",
            w_moduli.len().min(r.len())
        )));
    }
    if let Some(bad) = w_moduli[..n].iter().find(|w| !(**w > 0.0 && **w < 1.0)) {
        return Err(Error::InvalidParameter(format!(
            "moduli must lie in (0, 1), got {bad}"
        )));
    }
    let mut factors = Vec::with_capacity(n);
    let mut product = SparsePoly::one();
    for k in 0..n {
        let stride = if rotate { k as u64 + 1 } else { 1 };
        let factor = inner_factor(w_moduli[k], r.values()[k], stride)?;
        product = sparse_multiply(&product, &factor)?;
        if product.len() > MAX_PRODUCT_TERMS {
            return Err(Error::Limit(format!(
                "product of {} factors has {} terms, above {MAX_PRODUCT_TERMS}",
                k + 1,
                product.len()
            )));
        }
        factors.push(factor);
    }
    let zeros: Vec<Complex> = w_moduli[..n]
        .iter()
        .map(|&w| Complex::new(w, 0.0))
        .collect();
    let spec = ZeroSetSpec::simple(&zeros)?;
    let bound = young_product_bound(&spec, r, params, n)?;
    let mut warnings = spec.warnings().to_vec();
    if bound.capped {
        warnings.push("last Young factor replaced by its uniform bound 2".into());
    }
    let targeted_roots = w_moduli[..n]
        .iter()
        .enumerate()
        .map(|(k, &w)| {
            let count = if rotate { k as u64 + 1 } else { 1 };
            TargetedRoots::new(k + 1, w.ln() / count as f64, count)
        })
        .collect();
    Ok(finish(
        factors,
        product,
        params,
        bound.value,
        false,
        targeted_roots,
        warnings,
    ))
}

/// `N_k = 2^(2^(k-1) - 1)`.
pub fn slow_level_base(k: usize) -> Result<u64> {
    if k == 0 {
        return Err(Error::InvalidParameter("levels start at 1".into()));
    }
    if k > SLOW_MAX_LEVEL + 1 {
        return Err(Error::ExponentOverflow {
            left: u64::MAX,
            right: u64::MAX,
        });
    }
    Ok(1u64 << ((1u64 << (k - 1)) - 1))
}

/// `log r_k` for the slow family, `k >= 2`: `r_k^(N_k^2 p) 2^((k-1)(p-1)) = k (log k)^a`.
pub fn slow_log_modulus(k: usize, a: f64, params: Parameters) -> f64 {
    let p = params.p();
    let kf = k as f64;
    let numerator = kf.ln() + a * kf.ln().ln() - (kf - 1.0) * (p - 1.0) * std::f64::consts::LN_2;
    let squared_exponent = ((1u64 << k) - 2) as f64;
    numerator / (squared_exponent * p * std::f64::consts::LN_2).exp()
}

/// The doubly exponential family: level `k` is `1 - 2^(1-k) sum_i (z/r_k)^(N_k 2^i)` over
/// `N_k <= N_k 2^i <= N_k^2`, with targeted roots the `N_k` points of modulus `r_k`.
pub fn slow_family(
    k_max: usize,
    a: f64,
    r1_override: f64,
    params: Parameters,
) -> Result<FamilyOutput> {
    if k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    if k_max > SLOW_MAX_LEVEL {
        let n = slow_level_base(SLOW_MAX_LEVEL)?;
        return Err(Error::ExponentOverflow {
            left: n * n,
            right: n * n,
        });
    }
    if !(a > 1.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!("a must exceed 1, got {a}")));
    }
    if !(r1_override > 0.0 && r1_override < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "r1 must lie in (0, 1), got {r1_override}"
        )));
    }
    let p = params.p();
    let mut factors = Vec::with_capacity(k_max);
    let mut roots = Vec::with_capacity(k_max);
    let mut warnings = Vec::new();
    let mut bound = 1.0;
    for k in 1..=k_max {
        let base = slow_level_base(k)?;
        let log_r = if k == 1 {
            r1_override.ln()
        } else {
            slow_log_modulus(k, a, params)
        };
        if log_r >= 0.0 {
            warnings.push(format!(
                "level {k}: r_{k} = 1 + {:.3e} lies outside the unit disk",
                log_r.exp_m1()
            ));
        }
        bound *= if k == 1 {
            1.0 + (-p * log_r).exp()
        } else {
            let kf = k as f64;
            1.0 + 1.0 / (kf * kf.ln().powf(a))
        };
        let terms = 1u64 << (k - 1);
        let scale = 1.0 / terms as f64;
        factors.push(level_factor(scale, log_r, (0..terms).map(|i| base << i)));
        roots.push(TargetedRoots::new(k, log_r, base));
    }
    let product = expand_disjoint(&factors)?;
    Ok(finish(
        factors, product, params, bound, true, roots, warnings,
    ))
}

/// Bracket `(lower, upper)` for the modulus of the `n`-th targeted root of the slow family,
/// listed by nondecreasing modulus.
pub fn rho_bounds(n: u64, a: f64, params: Parameters) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::Precondition(format!(
            "n must be at least 2, got {n}"
        )));
    }
    let p = params.p();
    let log_n = (n as f64).log2();
    let level = (1.0 + log_n).log2();
    let lower_base = level * level.powf(a) / (2.0 * (1.0 + log_n)).powf(p - 1.0);
    let lower = lower_base.powf((2.0 / n as f64).powf(p));
    let upper_base = (2.0 + level) * (2.0 + level).powf(a) / (0.5 * (1.0 + log_n)).powf(p - 1.0);
    let upper = upper_base.powf(1.0 / (4.0 * (n as f64).powi(4)).powf(p));
    if lower > upper {
        return Err(Error::Verification(format!(
            "bracket for n = {n} is empty: {lower} > {upper}"
        )));
    }
    Ok((lower, upper))
}

/// Moduli of the slow family's targeted roots in enumeration order, one entry per level with
/// the range `(first_index, last_index)` of `n` it covers.
pub fn slow_root_ranges(out: &FamilyOutput) -> Vec<(u64, u64, f64)> {
    let mut start = 1;
    out.targeted_roots
        .iter()
        .map(|t| {
            let range = (start, start + t.count - 1, t.modulus);
            start += t.count;
            range
        })
        .collect()
}

fn factorial(j: usize) -> u64 {
    (1..=j as u64).product()
}

fn check_factorial_params(params: Parameters, alpha: f64) -> Result<()> {
    let p = params.p();
    if !(p > 2.0) {
        return Err(Error::Precondition(format!(
            "the factorial family needs p > 2, got {p}"
        )));
    }
    if !(alpha > 0.0 && alpha < p - 2.0) {
        return Err(Error::Precondition(format!(
            "alpha must lie in (0, p - 2) = (0, {}), got {alpha}",
            p - 2.0
        )));
    }
    Ok(())
}

/// `log r_j = -(p - 2 - alpha) log j / (j p j!)`.
pub fn factorial_log_modulus(j: usize, alpha: f64, params: Parameters) -> f64 {
    let p = params.p();
    let jf = j as f64;
    -(p - 2.0 - alpha) * jf.ln() / (jf * p * factorial(j) as f64)
}

/// The factorial family: level `j` is `1 - (1/j) sum_{m<=j} (z/r_j)^(m j!)`, with targeted
/// roots the `j!` points of modulus `r_j`.
pub fn nonblaschke_family(params: Parameters, alpha: f64, k_max: usize) -> Result<FamilyOutput> {
    check_factorial_params(params, alpha)?;
    if k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    if k_max > FACTORIAL_MAX_LEVEL {
        return Err(Error::Limit(format!(
            "k_max = {k_max} would expand to {}! terms; the cap is {FACTORIAL_MAX_LEVEL}",
            k_max + 1
        )));
    }
    let mut factors = Vec::with_capacity(k_max);
    let mut roots = Vec::with_capacity(k_max);
    let mut bound = 1.0;
    for j in 1..=k_max {
        let step = factorial(j);
        let log_r = factorial_log_modulus(j, alpha, params);
        bound *= 1.0 + (j as f64).powf(-1.0 - alpha);
        factors.push(level_factor(
            1.0 / j as f64,
            log_r,
            (1..=j as u64).map(|m| m * step),
        ));
        roots.push(TargetedRoots::new(j, log_r, step));
    }
    let product = expand_disjoint(&factors)?;
    Ok(finish(
        factors,
        product,
        params,
        bound,
        true,
        roots,
        Vec::new(),
    ))
}

/// `sum_{j<=k} (log j)(p-2-alpha)/(jp) - sum_{j<=k} (log j)^2 (p-2-alpha)^2 / (2 (jp)^2 j!)`,
/// the lower bound for the factorial family's Blaschke sum obtained from `1 - e^-x >= x - x^2/2`.
pub fn blaschke_lower_bound(k: usize, params: Parameters, alpha: f64) -> f64 {
    let p = params.p();
    let gap = p - 2.0 - alpha;
    let mut first = Accumulator::new();
    let mut second = Accumulator::new();
    let mut inv_factorial = 1.0;
    for j in 1..=k {
        let jf = j as f64;
        inv_factorial /= jf;
        let lj = jf.ln();
        first.add(lj * gap / (jf * p));
        second.add(lj * lj * gap * gap / (2.0 * (jf * p).powi(2)) * inv_factorial);
    }
    first.value() - second.value()
}

/// `prod_{j>=1} (1 + j^(-1-alpha))`: direct log-sum up to a cutoff, then an Euler-Maclaurin tail.
pub fn factorial_bound_limit(alpha: f64) -> f64 {
    const CUTOFF: u32 = 100_000;
    let mut logs = Accumulator::new();
    for j in 1..CUTOFF {
        logs.add(f64::from(j).powf(-1.0 - alpha).ln_1p());
    }
    let c = f64::from(CUTOFF);
    let tail = c.powf(-alpha) / alpha
        + 0.5 * c.powf(-1.0 - alpha)
        + (1.0 + alpha) * c.powf(-2.0 - alpha) / 12.0
        - c.powf(-1.0 - 2.0 * alpha) / (2.0 * (1.0 + 2.0 * alpha));
    (logs.value() + tail).exp()
}

/// `x_j = -log r_j` for each level, the arguments of `1 - e^-x` in the Blaschke sum.
pub fn factorial_exponents(k: usize, params: Parameters, alpha: f64) -> Vec<f64> {
    (1..=k)
        .map(|j| -factorial_log_modulus(j, alpha, params))
        .collect()
}

/// `sum_k count_k (1 - r_k)` from `(log_modulus, count)` pairs.
pub fn weighted_blaschke_sum(levels: &[(f64, u64)]) -> f64 {
    sum::sum(
        levels
            .iter()
            .map(|&(log_r, count)| count as f64 * -log_r.exp_m1()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{p_norm_pow, CoefSeq};
    use crate::inner::b_factor_norm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(p: f64) -> Parameters {
        Parameters::new(p).unwrap()
    }

    /// Dense product of the factors by repeated convolution.
    fn dense_product(factors: &[SparsePoly]) -> CoefSeq {
        let mut acc = CoefSeq::constant(Complex::new(1.0, 0.0));
        for f in factors {
            let degree = f.degree().unwrap();
            acc = acc.mul(&f.to_dense(degree).unwrap());
        }
        acc
    }

    #[test]
    fn slow_level_bases() {
        let bases: Vec<u64> = (1..=4).map(|k| slow_level_base(k).unwrap()).collect();
        assert_eq!(bases, vec![1, 2, 8, 128]);
        assert_eq!(slow_level_base(6).unwrap(), 1 << 31);
    }

    #[test]
    fn slow_factor_exponents_double_from_base_to_square() {
        let out = slow_family(3, 2.0, 0.5, params(2.0)).unwrap();
        let exps: Vec<u64> = out.factors[2].terms().keys().copied().collect();
        assert_eq!(exps, vec![0, 8, 16, 32, 64]);
        let exps: Vec<u64> = out.factors[1].terms().keys().copied().collect();
        assert_eq!(exps, vec![0, 2, 4]);
        assert_eq!(out.term_count(), 30);
    }

    #[test]
    fn slow_term_counts_match_product_formula() {
        for k in 1..=SLOW_MAX_LEVEL {
            let out = slow_family(k, 2.0, 0.5, params(3.0)).unwrap();
            let expected: usize = (1..=k).map(|j| 1 + (1usize << (j - 1))).product();
            assert_eq!(out.term_count(), expected);
            assert_eq!(out.expected_term_count(), expected);
        }
    }

    #[test]
    fn slow_refuses_levels_past_six() {
        assert!(matches!(
            slow_family(7, 2.0, 0.5, params(2.0)),
            Err(Error::ExponentOverflow { .. })
        ));
        assert!(slow_family(3, 1.0, 0.5, params(2.0)).is_err());
        assert!(slow_family(3, 2.0, 1.0, params(2.0)).is_err());
    }

    #[test]
    fn slow_modulus_example() {
        // r_k^(2^((2^k - 2) p)) = k (log k)^a / 2^((k-1)(p-1))
        for &p in &[1.5, 2.0, 3.0] {
            for k in 2..=5 {
                let kf = k as f64;
                let log_r = slow_log_modulus(k, 2.0, params(p));
                let lhs = log_r * (((1u64 << k) - 2) as f64 * p).exp2();
                let rhs = kf.ln() + 2.0 * kf.ln().ln() - (kf - 1.0) * (p - 1.0) * 2f64.ln();
                assert!(
                    (lhs - rhs).abs() < 1e-12 * rhs.abs().max(1.0),
                    "p {p} k {k}"
                );
            }
        }
        let r2 = slow_log_modulus(2, 2.0, params(2.0)).exp();
        let expected = (2.0 * 2f64.ln().powi(2) / 2.0).powf(1.0 / 16.0);
        assert!((r2 - expected).abs() < 1e-15);
    }

    #[test]
    fn slow_norm_matches_dense_oracle() {
        // k = 4 has degree 1 + 4 + 64 + 16384
        let out = slow_family(4, 2.0, 0.5, params(3.0)).unwrap();
        let dense = dense_product(&out.factors);
        let oracle = p_norm_pow(&dense, params(3.0));
        assert!((out.exact_norm.powi(3) - oracle).abs() < 1e-12 * oracle);
        let sparse = out.product.to_dense(1 << 15).unwrap();
        assert!(sparse.max_abs_diff(&dense) < 1e-12);
    }

    #[test]
    fn slow_norm_respects_bound_when_moduli_are_inside_the_disk() {
        for &p in &[2.0, 3.0] {
            for k in 2..=SLOW_MAX_LEVEL {
                let out = slow_family(k, 2.0, 0.5, params(p)).unwrap();
                assert!(out.warnings.is_empty(), "{:?}", out.warnings);
                let pow = out.exact_norm.powf(p);
                assert!(
                    pow <= out.bound_product * (1.0 + 1e-9),
                    "p {p} k {k}: {pow} > {}",
                    out.bound_product
                );
            }
        }
    }

    #[test]
    fn slow_family_at_small_p_warns_about_moduli_above_one() {
        let out = slow_family(4, 2.0, 0.5, params(1.5)).unwrap();
        assert!(!out.warnings.is_empty());
        assert!(out.r_values[2] > 1.0);
    }

    #[test]
    fn slow_targeted_roots_are_zeros() {
        for k in 1..=SLOW_MAX_LEVEL {
            let out = slow_family(k, 2.0, 0.5, params(3.0)).unwrap();
            let worst = out.max_root_residual(50);
            assert!(worst < 1e-8, "k {k}: {worst}");
        }
    }

    #[test]
    fn rho_bounds_lower_is_nondecreasing() {
        let pr = params(3.0);
        let mut last = 0.0;
        let mut n = 4u64;
        while n <= 10_000 {
            let (lower, upper) = rho_bounds(n, 2.0, pr).unwrap();
            assert!(lower <= upper);
            assert!(lower >= last, "n {n}");
            last = lower;
            n += 37;
        }
        assert!(matches!(
            rho_bounds(1, 2.0, pr),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn rho_bounds_report_an_empty_bracket() {
        // the lower expression passes 1 once its base does
        assert!(matches!(
            rho_bounds(128, 2.0, params(2.0)),
            Err(Error::Verification(_))
        ));
    }

    #[test]
    fn rho_lower_bound_approaches_one_subgeometrically() {
        let pr = params(3.0);
        let gap = |n: u64| 1.0 - rho_bounds(n, 2.0, pr).unwrap().0;
        let steps: Vec<f64> = [10u64, 100, 1000]
            .iter()
            .map(|&n| gap(n + 1) / gap(n))
            .collect();
        assert!(steps.windows(2).all(|w| w[1] > w[0]));
        assert!(steps[2] > 0.99);
        let doubling = gap(2048) / gap(1024);
        assert!(doubling > 0.1 && doubling < 0.2, "{doubling}");
    }

    #[test]
    fn factorial_modulus_example() {
        let log_r = factorial_log_modulus(2, 0.5, params(3.0));
        let r2 = log_r.exp();
        assert!((r2 - 2f64.powf(-0.5 / 12.0)).abs() < 1e-15);
        assert!((r2 - 0.97153).abs() < 5e-6);
        assert_eq!(factorial_log_modulus(1, 0.5, params(3.0)), 0.0);
    }

    #[test]
    fn factorial_exponent_identity() {
        for k in 1..=8usize {
            let lhs: u64 = 1
                + (1..=k as u64)
                    .map(|j| j * factorial(j as usize))
                    .sum::<u64>();
            assert_eq!(lhs, factorial(k + 1));
        }
    }

    #[test]
    fn factorial_term_counts_and_bound() {
        let pr = params(3.0);
        for k in 1..=FACTORIAL_MAX_LEVEL {
            let out = nonblaschke_family(pr, 0.5, k).unwrap();
            assert_eq!(out.term_count() as u64, factorial(k + 1));
            assert!(out.exact_norm.powi(3) <= out.bound_product * (1.0 + 1e-9));
            assert!(out.norm_bound <= factorial_bound_limit(0.5).powf(1.0 / 3.0) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn factorial_norm_matches_dense_oracle() {
        let pr = params(2.5);
        let out = nonblaschke_family(pr, 0.25, 6).unwrap();
        let dense = dense_product(&out.factors);
        let oracle = p_norm_pow(&dense, pr);
        assert!((out.exact_norm.powf(2.5) - oracle).abs() < 1e-12 * oracle);
    }

    #[test]
    fn factorial_targeted_roots_are_zeros() {
        let out = nonblaschke_family(params(3.0), 0.5, FACTORIAL_MAX_LEVEL).unwrap();
        let worst = out.max_root_residual(50);
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn factorial_precondition_errors() {
        assert!(nonblaschke_family(params(2.0), 0.5, 3).is_err());
        assert!(nonblaschke_family(params(3.0), 1.0, 3).is_err());
        assert!(nonblaschke_family(params(3.0), 0.0, 3).is_err());
        assert!(matches!(
            nonblaschke_family(params(3.0), 0.5, 9),
            Err(Error::Limit(_))
        ));
    }

    #[test]
    fn blaschke_partials_exceed_lower_bound() {
        let pr = params(3.0);
        let out = nonblaschke_family(pr, 0.5, FACTORIAL_MAX_LEVEL).unwrap();
        assert!(
            out.blaschke_partials.windows(2).all(|w| w[1] > w[0])
                || out.blaschke_partials[0] == 0.0
        );
        assert!(out.blaschke_partials[1..].windows(2).all(|w| w[1] > w[0]));
        assert!(factorial_exponents(FACTORIAL_MAX_LEVEL, pr, 0.5)
            .iter()
            .all(|x| *x >= 0.0 && *x <= 1.0));
        for (k, partial) in out.blaschke_partials.iter().enumerate() {
            assert!(
                *partial >= blaschke_lower_bound(k + 1, pr, 0.5) - 1e-15,
                "k {}",
                k + 1
            );
        }
    }

    #[test]
    fn blaschke_lower_bound_grows_without_bound() {
        let pr = params(3.0);
        assert_eq!(blaschke_lower_bound(1, pr, 0.5), 0.0);
        let values: Vec<f64> = [10, 100, 1000, 10_000]
            .iter()
            .map(|&k| blaschke_lower_bound(k, pr, 0.5))
            .collect();
        assert!(values.windows(2).all(|w| w[1] > w[0] + 0.5));
        // sum log j / j ~ (log k)^2 / 2
        let scale = (3.0 - 2.0 - 0.5) / 3.0;
        let k = 10_000f64;
        let predicted = scale * k.ln().powi(2) / 2.0;
        assert!((values[3] - predicted).abs() < 0.1 * predicted);
    }

    #[test]
    fn rotated_factor_norm_is_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let w: f64 = rng.gen_range(0.1..0.95);
            let r: f64 = rng.gen_range(1.1..4.0);
            let k: u64 = rng.gen_range(1..=6);
            let plain = inner_factor(w, r, 1).unwrap();
            let rotated = inner_factor(w, r, k).unwrap();
            let pr = params(r);
            assert!((sparse_p_norm(&plain, pr) - sparse_p_norm(&rotated, pr)).abs() < 1e-14);
            let closed =
                b_factor_norm(DiskPoint::new(Complex::new(w, 0.0)).unwrap(), r, r).unwrap();
            assert!(
                (sparse_p_norm(&plain, pr) - closed).abs() < 1e-12 * closed,
                "w {w} r {r}"
            );
        }
    }

    #[test]
    fn geometric_single_factor_is_the_closed_form() {
        let pr = params(2.0);
        let r = RSequence::default_for(pr, 1).unwrap();
        let out = geometric_family(&[0.5], &r, false, pr, 1).unwrap();
        assert_eq!(out.factors.len(), 1);
        let closed = crate::inner::linear_inner_closed_form(
            DiskPoint::new(Complex::new(0.5, 0.0)).unwrap(),
            params(r.values()[0]),
            out.product.degree().unwrap() as usize,
        )
        .unwrap();
        let dense = out.product.to_dense(1 << 20).unwrap();
        assert!(dense.max_abs_diff(&closed.j) < 1e-15);
        assert!(out.exact_norm <= out.norm_bound * (1.0 + 1e-9));
    }

    #[test]
    fn geometric_rotated_roots_and_bound() {
        let pr = params(2.0);
        let n = 5;
        let moduli: Vec<f64> = (1..=n).map(|k| 1.0 - 0.5f64.powi(k as i32 + 1)).collect();
        let r = RSequence::default_for(pr, n).unwrap();
        let out = geometric_family(&moduli, &r, true, pr, n).unwrap();
        assert_eq!(out.total_roots(), (1..=n as u64).sum::<u64>());
        assert!(out.max_root_residual(10) < 1e-8);
        assert!(out.exact_norm <= out.norm_bound * (1.0 + 1e-9));
        let plain = geometric_family(&moduli, &r, false, pr, n).unwrap();
        assert!(plain.max_root_residual(1) < 1e-8);
        assert!(plain.exact_norm <= plain.norm_bound * (1.0 + 1e-9));
    }

    #[test]
    fn materialize_respects_cap() {
        let t = TargetedRoots::new(1, -0.1, 4);
        let roots = t.materialize().unwrap();
        assert_eq!(roots.len(), 4);
        assert!((roots[1] - Complex::new(0.0, (-0.1f64).exp())).norm() < 1e-15);
        assert!(TargetedRoots::new(2, -0.1, MATERIALIZE_CAP + 1)
            .materialize()
            .is_err());
    }
}

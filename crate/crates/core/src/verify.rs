//! Seeded randomized suites for the identities and inequalities the constructions rely on.
//! Every suite is deterministic given its seed.

use std::f64::consts::PI;

use num_complex::Complex64 as Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::algebra::{
    bj_residual, difference_quotient, p_norm, signed_power, CoefSeq, DiskPoint, Parameters,
    ZeroSetSpec,
};
use crate::error::Result;
use crate::inner::{inner_via_projection, linear_inner_closed_form, solve_inner_newton};
use crate::projection::SolverOptions;

/// Exponents covered by the default Pythagorean run.
pub const PYTHAGOREAN_EXPONENTS: [f64; 5] = [1.3, 1.7, 2.0, 2.5, 4.0];
pub const PYTHAGOREAN_TOL: f64 = 1e-10;
/// At `p = 2` the inequalities are equalities; deviations in either direction count.
pub const HILBERT_TOL: f64 = 1e-12;
pub const INVOLUTION_TOL: f64 = 1e-12;
pub const DIFF_QUOTIENT_TOL: f64 = 0.0;
pub const CROSS_METHOD_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Pythagorean,
    Involution,
    DiffQuotient,
    CrossMethod,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::Pythagorean,
        Suite::Involution,
        Suite::DiffQuotient,
        Suite::CrossMethod,
    ];
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub suite: Suite,
    /// Exponent the suite ran at, when it runs at a single one.
    pub p: Option<f64>,
    pub cases_run: usize,
    pub max_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// The case attaining `max_violation`.
    pub worst_case: Option<serde_json::Value>,
}

struct Tracker {
    max_violation: f64,
    worst_case: Option<serde_json::Value>,
    cases: usize,
}

impl Tracker {
    fn new() -> Self {
        Self {
            max_violation: 0.0,
            worst_case: None,
            cases: 0,
        }
    }

    fn record(&mut self, violation: f64, case: impl FnOnce() -> serde_json::Value) {
        self.cases += 1;
        if violation > self.max_violation || (self.worst_case.is_none() && violation.is_nan()) {
            self.max_violation = violation;
            self.worst_case = Some(case());
        }
    }

    fn report(self, suite: Suite, p: Option<f64>, tolerance: f64) -> VerificationReport {
        VerificationReport {
            suite,
            p,
            cases_run: self.cases,
            pass: self.max_violation <= tolerance,
            max_violation: self.max_violation,
            tolerance,
            worst_case: self.worst_case,
        }
    }
}

fn suite_rng(seed: u64, salt: f64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.to_bits())
}

fn random_complex(rng: &mut impl Rng, scale: f64) -> Complex {
    Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale
}

fn random_seq(rng: &mut impl Rng, len: usize) -> CoefSeq {
    let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
    CoefSeq::from_vec((0..len).map(|_| random_complex(rng, scale)).collect())
}

fn to_pairs(a: &CoefSeq) -> Vec<[f64; 2]> {
    a.coeffs().iter().map(|c| [c.re, c.im]).collect()
}

/// `y` minus its component along `conj(x^<p-1>)`, so that `x` is orthogonal to the result.
fn orthogonalize(x: &CoefSeq, y: &CoefSeq, params: Parameters) -> CoefSeq {
    let s: Vec<Complex> = x
        .coeffs()
        .iter()
        .map(|&c| signed_power(c, params.p() - 1.0))
        .collect();
    let along: f64 = s.iter().map(|c| c.norm_sqr()).sum();
    let t = bj_residual(x, y, params) / along;
    CoefSeq::from_vec(
        y.coeffs()
            .iter()
            .zip(&s)
            .map(|(yk, sk)| yk - t * sk.conj())
            .collect(),
    )
}

/// Signed gaps `(upper - lower) / scale` of the four inequalities for an orthogonal pair;
/// a negative entry is a violation. Only the two inequalities matching the side of 2 that `p`
/// lies on are returned, all four at `p = 2`.
fn pythagorean_gaps(x: &CoefSeq, y: &CoefSeq, params: Parameters) -> Vec<f64> {
    let p = params.p();
    let nx = p_norm(x, params);
    let ny = p_norm(y, params);
    let nxy = p_norm(&x.add(y), params);
    let c = 1.0 / (2f64.powf(p - 1.0) - 1.0);
    let (pow_lhs, pow_rhs) = (nxy.powf(p), nx.powf(p) + c * ny.powf(p));
    let (sq_lhs, sq_rhs) = (nxy * nxy, nx * nx + (p - 1.0) * ny * ny);
    let pow_scale = pow_lhs.max(pow_rhs).max(f64::MIN_POSITIVE);
    let sq_scale = sq_lhs.max(sq_rhs).max(f64::MIN_POSITIVE);
    let mut gaps = Vec::with_capacity(4);
    if p <= 2.0 {
        gaps.push((pow_rhs - pow_lhs) / pow_scale);
        gaps.push((sq_lhs - sq_rhs) / sq_scale);
    }
    if p >= 2.0 {
        gaps.push((pow_lhs - pow_rhs) / pow_scale);
        gaps.push((sq_rhs - sq_lhs) / sq_scale);
    }
    gaps
}

/// Random pairs `x`, `y` with `y` forced orthogonal to `x`, checked against the Pythagorean
/// inequalities at one exponent.
pub fn pythagorean_suite(params: Parameters, seed: u64, cases: usize) -> VerificationReport {
    let p = params.p();
    let hilbert = p == 2.0;
    let mut rng = suite_rng(seed, p);
    let mut tracker = Tracker::new();
    for _ in 0..cases {
        let len = rng.gen_range(2..=16);
        let x = random_seq(&mut rng, len);
        let y = orthogonalize(&x, &random_seq(&mut rng, len), params);
        let gaps = pythagorean_gaps(&x, &y, params);
        let violation = if hilbert {
            gaps.iter().map(|g| g.abs()).fold(0.0, f64::max)
        } else {
            gaps.iter().map(|g| -g).fold(0.0, f64::max)
        };
        tracker.record(
            violation,
            || json!({ "x": to_pairs(&x), "y": to_pairs(&y), "gaps": gaps }),
        );
    }
    tracker.report(
        Suite::Pythagorean,
        Some(p),
        if hilbert {
            HILBERT_TOL
        } else {
            PYTHAGOREAN_TOL
        },
    )
}

fn relative_gap(a: Complex, b: Complex) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

/// The algebraic identities of the signed power `z^<s>`: multiplicativity, `|z|^p = z^<p-1> z`,
/// commuting with integer powers, and `(z^<p-1>)^<p'-1> = z`.
pub fn involution_suite(seed: u64, cases: usize) -> VerificationReport {
    let mut rng = suite_rng(seed, 0.0);
    let mut tracker = Tracker::new();
    for _ in 0..cases {
        let params = Parameters::new(rng.gen_range(1.05..6.0)).expect("sampled exponent exceeds 1");
        let (p, q) = (params.p(), params.p_conj());
        let z = Complex::from_polar(rng.gen_range(0.05..3.0), rng.gen_range(-PI..PI));
        let w = Complex::from_polar(rng.gen_range(0.05..3.0), rng.gen_range(-PI..PI));
        let s = rng.gen_range(0.1..4.0);
        let n: i32 = rng.gen_range(0..=6);
        let gaps = [
            relative_gap(
                signed_power(z * w, p - 1.0),
                signed_power(z, p - 1.0) * signed_power(w, p - 1.0),
            ),
            relative_gap(
                Complex::new(z.norm().powf(p), 0.0),
                signed_power(z, p - 1.0) * z,
            ),
            relative_gap(signed_power(z, s).powi(n), signed_power(z.powi(n), s)),
            relative_gap(signed_power(signed_power(z, p - 1.0), q - 1.0), z),
        ];
        let violation = gaps.iter().copied().fold(0.0, f64::max);
        tracker.record(violation, || {
            json!({ "p": p, "z": [z.re, z.im], "w": [w.re, w.im], "s": s, "n": n, "gaps": gaps })
        });
    }
    tracker.report(Suite::Involution, None, INVOLUTION_TOL)
}

/// `||Q_w f||_p <= ||f||_p / (1 - |w|)` on random polynomials, points and exponents.
/// The violation is the relative excess of the left side over the right.
pub fn diff_quotient_suite(seed: u64, cases: usize) -> VerificationReport {
    let mut rng = suite_rng(seed, 1.0);
    let mut tracker = Tracker::new();
    for _ in 0..cases {
        let params = Parameters::new(rng.gen_range(1.05..6.0)).expect("sampled exponent exceeds 1");
        let len = rng.gen_range(1..=24);
        let f = random_seq(&mut rng, len);
        let w = Complex::from_polar(rng.gen_range(0.0..0.98), rng.gen_range(-PI..PI));
        let point = DiskPoint::new(w).expect("sampled point lies in the disk");
        let lhs = p_norm(&difference_quotient(&f, point), params);
        let rhs = p_norm(&f, params) / (1.0 - w.norm());
        let violation = ((lhs - rhs) / rhs).max(0.0);
        tracker.record(violation, || {
            json!({ "p": params.p(), "f": to_pairs(&f), "w": [w.re, w.im], "lhs": lhs, "rhs": rhs })
        });
    }
    tracker.report(Suite::DiffQuotient, None, DIFF_QUOTIENT_TOL)
}

/// Grid used by the cross-method suite: `(p, |w|, arg w)`.
pub fn cross_method_grid() -> Vec<(f64, f64, f64)> {
    let mut grid = Vec::new();
    for p in [1.5, 2.0, 3.0, 4.0] {
        for m in [0.3, 0.6, 0.9] {
            for arg in [0.0, PI / 4.0, PI] {
                grid.push((p, m, arg));
            }
        }
    }
    grid
}

/// Largest coefficient gap between the closed form, the Newton construction and the
/// co-projection for a single zero. Failures of either solver are reported as infinite gaps.
pub fn cross_method_case(params: Parameters, w: Complex, opts: &SolverOptions) -> Result<f64> {
    let spec = ZeroSetSpec::simple(&[w])?;
    let projected = inner_via_projection(&spec, params, opts);
    let newton = solve_inner_newton(&spec, params, opts);
    let (projected, newton) = match (projected, newton) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return Ok(f64::INFINITY),
    };
    let degree = projected.j.len().max(newton.j.len());
    let closed = linear_inner_closed_form(DiskPoint::new(w)?, params, degree)?;
    Ok(closed
        .j
        .max_abs_diff(&projected.j)
        .max(closed.j.max_abs_diff(&newton.j))
        .max(projected.j.max_abs_diff(&newton.j)))
}

pub fn cross_method_suite(opts: &SolverOptions) -> Result<VerificationReport> {
    let mut tracker = Tracker::new();
    for (p, m, arg) in cross_method_grid() {
        let params = Parameters::new(p)?;
        let w = Complex::from_polar(m, arg);
        let gap = cross_method_case(params, w, opts)?;
        tracker.record(gap, || json!({ "p": p, "w": [w.re, w.im], "gap": gap }));
    }
    Ok(tracker.report(Suite::CrossMethod, None, CROSS_METHOD_TOL))
}

/// Runs `suite` with its default size: 1000 pairs per exponent for the Pythagorean suite
/// (one report per exponent), 1000 involution cases, 500 difference quotients, and the full
/// cross-method grid.
pub fn run_suite(suite: Suite, seed: u64, opts: &SolverOptions) -> Result<Vec<VerificationReport>> {
    Ok(match suite {
        Suite::Pythagorean => PYTHAGOREAN_EXPONENTS
            .iter()
            .map(|&p| Parameters::new(p).map(|params| pythagorean_suite(params, seed, 1000)))
            .collect::<Result<_>>()?,
        Suite::Involution => vec![involution_suite(seed, 1000)],
        Suite::DiffQuotient => vec![diff_quotient_suite(seed, 500)],
        Suite::CrossMethod => vec![cross_method_suite(opts)?],
    })
}

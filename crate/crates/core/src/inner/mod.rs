//! p-inner functions: closed forms for one zero, the Newton construction for finite zero
//! sets, orthogonality checks and the identities linking `J` to the extremal function `Phi`.

mod dual;

use num_complex::Complex64 as Complex;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    p_norm, p_norm_pow, signed_power, CoefSeq, DiskPoint, Parameters, ZeroSetSpec,
};
use crate::error::{Error, Result};
use crate::projection::{project_shift_span, SolverOptions};

pub(crate) use dual::NewtonState;

/// Largest orthogonality residual accepted from a construction, per unit of `||J||_p^p`
/// once that exceeds 1.
pub const ORTH_TOL: f64 = 1e-7;
/// Number of shifts checked by constructions.
pub const ORTH_CHECKS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerMethod {
    ClosedForm,
    Newton,
    CoProjection,
}

#[derive(Clone, Debug, Serialize)]
pub struct InnerResult {
    /// Coefficients of `J`, with `J(0) = 1`.
    pub j: CoefSeq,
    pub norm: f64,
    /// `|bj_residual(J, S^n J)|` for `n = 1..`.
    pub orth_residuals: Vec<f64>,
    pub method: InnerMethod,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

impl InnerResult {
    pub fn max_residual(&self) -> f64 {
        self.orth_residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Accepted residual. The pairing scales like `||J||_p^p`, so a fixed bound is out of
    /// reach in double precision for large norms.
    pub fn residual_tolerance(&self, params: Parameters) -> f64 {
        ORTH_TOL * self.norm.powf(params.p()).max(1.0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PhiResult {
    pub phi: CoefSeq,
    pub phi_norm: f64,
    /// The optimal value `G(0)` of the complementary function `G = 1 - Phi`.
    pub g0: f64,
}

/// `1 - |w|^a` for `0 < |w| < 1`, accurate when `|w|` is close to 1.
fn one_minus_pow(modulus: f64, a: f64) -> f64 {
    -(a * modulus.ln()).exp_m1()
}

/// Truncated expansion of `(1 - z/w) / (1 - w^<p'-1> z)`.
pub fn linear_inner_closed_form(
    w: DiskPoint,
    params: Parameters,
    degree: usize,
) -> Result<InnerResult> {
    let modulus = w.modulus();
    if modulus == 0.0 {
        return Err(Error::Precondition(
            "the zero must not be the origin".into(),
        ));
    }
    if degree == 0 {
        return Err(Error::InvalidParameter("degree must be positive".into()));
    }
    let w = w.value();
    let ratio = signed_power(w, params.p_conj() - 1.0);
    let mut coeffs = Vec::with_capacity(degree + 1);
    coeffs.push(Complex::new(1.0, 0.0));
    let mut c = -one_minus_pow(modulus, params.p_conj()) / w;
    for _ in 1..=degree {
        coeffs.push(c);
        c *= ratio;
    }
    Ok(finish(
        CoefSeq::from_vec(coeffs),
        params,
        InnerMethod::ClosedForm,
        0,
        Vec::new(),
    ))
}

fn finish(
    j: CoefSeq,
    params: Parameters,
    method: InnerMethod,
    iterations: usize,
    warnings: Vec<String>,
) -> InnerResult {
    InnerResult {
        norm: p_norm(&j, params),
        orth_residuals: verify_p_inner(&j, params, ORTH_CHECKS),
        j,
        method,
        iterations,
        warnings,
    }
}

fn check_residuals(result: InnerResult, params: Parameters) -> Result<InnerResult> {
    let worst = result.max_residual();
    let tol = result.residual_tolerance(params);
    if worst > tol {
        return Err(Error::Verification(format!(
            "orthogonality residual {worst:.3e} exceeds {tol:.3e}"
        )));
    }
    Ok(result)
}

/// `||B_{w,r}||_t`, where `B_{w,r}` is the r-inner function with the single zero `w`.
pub fn b_factor_norm(w: DiskPoint, r: f64, t: f64) -> Result<f64> {
    Ok(b_factor_norm_pow(w, r, t)?.powf(1.0 / t))
}

/// `||B_{w,r}||_t^t`.
pub fn b_factor_norm_pow(w: DiskPoint, r: f64, t: f64) -> Result<f64> {
    let modulus = w.modulus();
    if modulus == 0.0 {
        return Err(Error::Precondition(
            "the zero must not be the origin".into(),
        ));
    }
    if !(r > 1.0 && r.is_finite() && t > 1.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "exponents must exceed 1, got r = {r}, t = {t}"
        )));
    }
    let r_conj = r / (r - 1.0);
    let numerator = one_minus_pow(modulus, r_conj).powf(t);
    let denominator = modulus.powf(t) * one_minus_pow(modulus, (r_conj - 1.0) * t);
    Ok(1.0 + numerator / denominator)
}

/// The p-inner function of a finite zero set, from the Newton system for its constants.
pub fn solve_inner_newton(
    spec: &ZeroSetSpec,
    params: Parameters,
    opts: &SolverOptions,
) -> Result<InnerResult> {
    solve_inner_newton_from(spec, params, opts, None).map(|(r, _)| r)
}

pub(crate) fn solve_inner_newton_from(
    spec: &ZeroSetSpec,
    params: Parameters,
    opts: &SolverOptions,
    start: Option<&NewtonState>,
) -> Result<(InnerResult, NewtonState)> {
    let solved = dual::solve(spec, params.p(), opts, start)?;
    let result = finish(
        solved.j,
        params,
        InnerMethod::Newton,
        solved.iterations,
        spec.warnings().to_vec(),
    );
    Ok((check_residuals(result, params)?, solved.state))
}

/// The p-inner function of a finite zero set, as the co-projection of `f_W` onto `[S f_W]`.
pub fn inner_via_projection(
    spec: &ZeroSetSpec,
    params: Parameters,
    opts: &SolverOptions,
) -> Result<InnerResult> {
    let r = project_shift_span(&spec.polynomial(), params, opts)?;
    let result = finish(
        r.co_projection,
        params,
        InnerMethod::CoProjection,
        r.iterations,
        spec.warnings().to_vec(),
    );
    check_residuals(result, params)
}

/// `|sum_k J_{k+n}^<p-1> J_k|` for `n = 1..=n_max`.
pub fn verify_p_inner(j: &CoefSeq, params: Parameters, n_max: usize) -> Vec<f64> {
    let s: Vec<Complex> = j
        .coeffs()
        .iter()
        .map(|&x| signed_power(x, params.p() - 1.0))
        .collect();
    let a = j.coeffs();
    (1..=n_max)
        .map(|n| {
            if n >= a.len() {
                return 0.0;
            }
            crate::sum::complex_sum(s[n..].iter().zip(a).map(|(x, y)| x * y)).norm()
        })
        .collect()
}

/// `Phi = 1 - g0 J` with `g0 = 1 / (1 + (||J||_p^p - 1)^(p'-1))`.
pub fn phi_from_inner(j: &InnerResult, params: Parameters) -> Result<PhiResult> {
    if (j.j.get(0) - 1.0).norm() > 1e-12 {
        return Err(Error::Precondition("J must satisfy J(0) = 1".into()));
    }
    let excess = p_norm_pow(&j.j, params) - 1.0;
    if !(excess > 0.0) {
        return Err(Error::Precondition("||J||_p must exceed 1".into()));
    }
    let g0 = 1.0 / (1.0 + excess.powf(params.p_conj() - 1.0));
    let mut coeffs: Vec<Complex> = j.j.coeffs().iter().map(|c| -g0 * c).collect();
    coeffs[0] = Complex::new(1.0 - g0, 0.0);
    let phi = CoefSeq::from_vec(coeffs);
    Ok(PhiResult {
        phi_norm: p_norm(&phi, params),
        phi,
        g0,
    })
}

/// `||J||_p^p = 1 + phi^p / (1 - phi^p')^(p-1)`, the inverse of the `Phi`-norm identity.
pub fn inner_norm_from_phi(phi_norm: f64, params: Parameters) -> Result<f64> {
    if !(0.0..1.0).contains(&phi_norm) {
        return Err(Error::Precondition(format!(
            "phi norm must lie in [0, 1), got {phi_norm}"
        )));
    }
    if phi_norm == 0.0 {
        return Ok(1.0);
    }
    let p = params.p();
    let denom = one_minus_pow(phi_norm, params.p_conj()).powf(p - 1.0);
    Ok(1.0 + phi_norm.powf(p) / denom)
}

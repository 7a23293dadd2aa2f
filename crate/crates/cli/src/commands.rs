use std::path::Path;

use pinner::algebra::{CoefSeq, DiskPoint, Parameters, ZeroSetSpec};
use pinner::constructions::{
    geometric_family, nonblaschke_family, slow_family, FamilyOutput, TargetedRoots,
};
use pinner::inner::{
    inner_via_projection, linear_inner_closed_form, solve_inner_newton, InnerResult,
};
use pinner::projection::{project_shift_span, SolverOptions};
use pinner::verify::{
    cross_method_suite, diff_quotient_suite, involution_suite, pythagorean_suite, run_suite, Suite,
    VerificationReport, PYTHAGOREAN_EXPONENTS,
};
use pinner::zerosets::{
    j_norm_sequence_with, levels, newman_report_levels, young_product_bound, RSequence, SolveMode,
};
use serde::Serialize;
use serde_json::json;

use crate::args::{
    ConstructArgs, DiagArgs, Family, InnerArgs, Method, ProjectArgs, SuiteArg, VerifyArgs,
    ZerosetArgs, ZerosetCommand,
};
use crate::output::{num, read_text, write_csv, write_json};
use crate::{CliError, RunConfig};

/// Closed-form series are cut once `|w|^(min(p'-1, 1) K)` drops below this.
const CLOSED_FORM_EPS: f64 = 1e-14;

fn read_spec(path: &Path) -> Result<ZeroSetSpec, CliError> {
    Ok(ZeroSetSpec::from_json(&read_text(path)?)?)
}

pub fn inner(config: &RunConfig, args: &InnerArgs) -> Result<(), CliError> {
    let spec = read_spec(&args.zeros)?;
    let result = match args.method {
        Method::Closed => closed_form(&spec, config)?,
        Method::Newton => solve_inner_newton(&spec, config.params, &config.solver)?,
        Method::Project => inner_via_projection(&spec, config.params, &config.solver)?,
    };
    write_json(
        &json!({ "p": config.params.p(), "result": result }),
        config.out.as_deref(),
    )?;
    let tol = result.residual_tolerance(config.params);
    if result.max_residual() > tol {
        return Err(pinner::Error::Verification(format!(
            "orthogonality residual {:.3e} exceeds {tol:.3e}",
            result.max_residual()
        ))
        .into());
    }
    Ok(())
}

fn closed_form(spec: &ZeroSetSpec, config: &RunConfig) -> Result<InnerResult, CliError> {
    let [(w, 1)] = spec.zeros() else {
        return Err(pinner::Error::Precondition(
            "the closed form needs exactly one simple zero".into(),
        )
        .into());
    };
    let w = *w;
    let degree = match config.solver.truncation_degree {
        Some(d) => d,
        None => closed_form_degree(w, config.params),
    };
    Ok(linear_inner_closed_form(w, config.params, degree)?)
}

fn closed_form_degree(w: DiskPoint, params: Parameters) -> usize {
    let rate = (params.p_conj() - 1.0).min(1.0) * w.modulus().ln();
    if rate >= 0.0 {
        return 1;
    }
    (CLOSED_FORM_EPS.ln() / rate).ceil().max(1.0) as usize + 1
}

pub fn project(config: &RunConfig, args: &ProjectArgs) -> Result<(), CliError> {
    let text = read_text(&args.coeffs)?;
    let f: CoefSeq =
        serde_json::from_str(&text).map_err(|e| pinner::Error::Parse(e.to_string()))?;
    let mut opts = config.solver.clone();
    opts.origin_multiplicity = args.origin_multiplicity;
    let result = project_shift_span(&f, config.params, &opts)?;
    write_json(
        &json!({ "p": config.params.p(), "result": result }),
        config.out.as_deref(),
    )
}

pub fn zeroset(config: &RunConfig, args: &ZerosetArgs) -> Result<(), CliError> {
    if let Some(ZerosetCommand::Diag(diag_args)) = &args.diag {
        return diag(config, diag_args);
    }
    let path = args
        .zeros
        .as_deref()
        .ok_or_else(|| CliError::Usage("--zeros is required".into()))?;
    let spec = read_spec(path)?;
    let n_max = args.n_max.unwrap_or(spec.distinct_len());
    let mode = if args.parallel {
        SolveMode::Parallel
    } else {
        SolveMode::Sequential
    };
    let cert = j_norm_sequence_with(&spec, config.params, n_max, &config.solver, mode)?;
    let bounds = prefix_bounds(&spec, config.params, cert.prefix_norms.len());
    let phi_consistency = cert.phi_consistency(config.params).ok();
    write_json(
        &json!({
            "p": config.params.p(),
            "n_max": n_max,
            "certificate": cert,
            "young_bounds": bounds,
            "monotonicity_defect": cert.monotonicity_defect(),
            "phi_consistency": phi_consistency,
            "warnings": spec.warnings(),
        }),
        config.out.as_deref(),
    )?;
    if let Some(csv) = &args.csv {
        let rows: Vec<Vec<Option<String>>> = cert
            .prefix_norms
            .iter()
            .zip(&cert.phi_norms)
            .zip(&bounds)
            .enumerate()
            .map(|(i, ((j, phi), bound))| {
                vec![
                    Some((i + 1).to_string()),
                    num(*j),
                    num(*phi),
                    bound.and_then(num),
                ]
            })
            .collect();
        write_csv(csv, &["n", "j_norm", "phi_norm", "bound"], &rows)?;
    }
    match cert.failure {
        Some(f) => Err(CliError::PrefixFailure {
            prefix: f.prefix,
            message: f.message,
        }),
        None => Ok(()),
    }
}

/// Young product bound for each certified prefix, using the default exponent sequence over
/// the zeros the prefixes cover; `None` where it cannot be formed.
fn prefix_bounds(spec: &ZeroSetSpec, params: Parameters, prefixes: usize) -> Vec<Option<f64>> {
    let counts: Vec<usize> = spec
        .zeros()
        .iter()
        .scan(0, |total, (_, m)| {
            *total += *m as usize;
            Some(*total)
        })
        .take(prefixes)
        .collect();
    let Some(&total) = counts.last() else {
        return Vec::new();
    };
    let Ok(r) = RSequence::default_for(params, total) else {
        return vec![None; prefixes];
    };
    counts
        .iter()
        .map(|&n| {
            young_product_bound(spec, &r, params, n)
                .ok()
                .map(|b| b.value)
        })
        .collect()
}

#[derive(Serialize)]
struct DiagRow {
    n: usize,
    modulus: f64,
    multiplicity: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    blaschke: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    newman_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    vinogradov: Option<f64>,
}

fn diag(config: &RunConfig, args: &DiagArgs) -> Result<(), CliError> {
    let spec = read_spec(&args.zeros)?;
    let none_selected = !args.blaschke && !args.newman && args.vinogradov_eps.is_none();
    let (blaschke, newman) = (args.blaschke || none_selected, args.newman || none_selected);
    if let Some(eps) = args.vinogradov_eps {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(pinner::Error::InvalidParameter(format!(
                "eps must be nonnegative, got {eps}"
            ))
            .into());
        }
    }
    let lv = levels(&spec);
    let mut b_sum = pinner::sum::Accumulator::new();
    let mut v_sum = pinner::sum::Accumulator::new();
    let rows: Vec<DiagRow> = lv
        .iter()
        .enumerate()
        .map(|(i, &(gap, count))| {
            b_sum.add(gap * count as f64);
            if let Some(eps) = args.vinogradov_eps {
                v_sum.add(gap.powf(1.0 + eps) * count as f64);
            }
            DiagRow {
                n: i + 1,
                modulus: 1.0 - gap,
                multiplicity: count,
                blaschke: blaschke.then(|| b_sum.value()),
                newman_ratio: if newman && i > 0 {
                    Some(gap / lv[i - 1].0)
                } else {
                    None
                },
                vinogradov: args.vinogradov_eps.map(|_| v_sum.value()),
            }
        })
        .collect();
    let report = if newman {
        newman_report_levels(&lv).ok()
    } else {
        None
    };
    write_json(
        &json!({ "p": config.params.p(), "rows": rows, "newman": report }),
        config.out.as_deref(),
    )?;
    if let Some(csv) = &args.csv {
        let mut header = vec!["n", "modulus", "multiplicity"];
        if blaschke {
            header.push("blaschke");
        }
        if newman {
            header.push("newman_ratio");
        }
        if args.vinogradov_eps.is_some() {
            header.push("vinogradov");
        }
        let table: Vec<Vec<Option<String>>> = rows
            .iter()
            .map(|r| {
                let mut row = vec![
                    Some(r.n.to_string()),
                    num(r.modulus),
                    Some(r.multiplicity.to_string()),
                ];
                if blaschke {
                    row.push(r.blaschke.and_then(num));
                }
                if newman {
                    row.push(r.newman_ratio.and_then(num));
                }
                if args.vinogradov_eps.is_some() {
                    row.push(r.vinogradov.and_then(num));
                }
                row
            })
            .collect();
        write_csv(csv, &header, &table)?;
    }
    Ok(())
}

/// Roots sampled per level for the evaluation check in the family report.
const ROOT_SAMPLES: u64 = 50;

pub fn construct(config: &RunConfig, args: &ConstructArgs) -> Result<(), CliError> {
    let params = config.params;
    let out: FamilyOutput = match args.family {
        Family::Geometric => {
            if !(args.rate > 1.0) {
                return Err(pinner::Error::InvalidParameter(format!(
                    "rate must exceed 1, got {}",
                    args.rate
                ))
                .into());
            }
            let moduli: Vec<f64> = (1..=args.n)
                .map(|k| 1.0 - args.rate.powi(-(k as i32)))
                .collect();
            let r = match args.epsilon {
                Some(eps) => RSequence::geometric(params, eps, args.n)?,
                None => RSequence::default_for(params, args.n)?,
            };
            geometric_family(&moduli, &r, args.rotate, params, args.n)?
        }
        Family::Slow => slow_family(args.k_max, args.a, args.r1, params)?,
        Family::Nonblaschke => nonblaschke_family(params, args.alpha, args.k_max)?,
    };
    let family = match args.family {
        Family::Geometric => "geometric",
        Family::Slow => "slow",
        Family::Nonblaschke => "nonblaschke",
    };
    write_json(
        &json!({
            "family": family,
            "p": params.p(),
            "r_values": out.r_values,
            "exact_norm": out.exact_norm,
            "exact_norm_pow": out.exact_norm.powf(params.p()),
            "bound_product": out.bound_product,
            "norm_bound": out.norm_bound,
            "blaschke_partials": out.blaschke_partials,
            "term_count": out.term_count(),
            "expected_term_count": out.expected_term_count(),
            "factor_terms": out.factors.iter().map(|f| f.len()).collect::<Vec<_>>(),
            "targeted_roots": out.targeted_roots,
            "total_roots": out.total_roots(),
            "max_root_residual": out.max_root_residual(ROOT_SAMPLES),
            "warnings": out.warnings,
        }),
        config.out.as_deref(),
    )?;
    if let Some(path) = &args.emit_roots {
        write_csv(
            path,
            &["level", "modulus", "count", "spacing"],
            &root_rows(&out.targeted_roots),
        )?;
    }
    Ok(())
}

fn root_rows(roots: &[TargetedRoots]) -> Vec<Vec<Option<String>>> {
    roots
        .iter()
        .map(|t| {
            vec![
                Some(t.level.to_string()),
                num(t.modulus),
                Some(t.count.to_string()),
                num(t.spacing),
            ]
        })
        .collect()
}

pub fn verify(config: &RunConfig, args: &VerifyArgs) -> Result<(), CliError> {
    let suites: Vec<Suite> = match args.suite {
        SuiteArg::Pythagorean => vec![Suite::Pythagorean],
        SuiteArg::Involution => vec![Suite::Involution],
        SuiteArg::DiffQuotient => vec![Suite::DiffQuotient],
        SuiteArg::CrossMethod => vec![Suite::CrossMethod],
        SuiteArg::All => Suite::ALL.to_vec(),
    };
    let mut reports: Vec<VerificationReport> = Vec::new();
    for suite in suites {
        reports.extend(match args.cases {
            None => run_suite(suite, config.seed, &config.solver)?,
            Some(cases) => sized_suite(suite, config.seed, cases, &config.solver)?,
        });
    }
    let pass = reports.iter().all(|r| r.pass);
    write_json(
        &json!({ "seed": config.seed, "pass": pass, "reports": reports }),
        config.out.as_deref(),
    )?;
    if pass {
        return Ok(());
    }
    let failures: Vec<&VerificationReport> = reports.iter().filter(|r| !r.pass).collect();
    Err(CliError::VerificationFailed(
        serde_json::to_value(failures).map_err(|e| CliError::Output(e.to_string()))?,
    ))
}

fn sized_suite(
    suite: Suite,
    seed: u64,
    cases: usize,
    opts: &SolverOptions,
) -> Result<Vec<VerificationReport>, CliError> {
    Ok(match suite {
        Suite::Pythagorean => PYTHAGOREAN_EXPONENTS
            .iter()
            .map(|&p| Parameters::new(p).map(|params| pythagorean_suite(params, seed, cases)))
            .collect::<Result<_, _>>()?,
        Suite::Involution => vec![involution_suite(seed, cases)],
        Suite::DiffQuotient => vec![diff_quotient_suite(seed, cases)],
        Suite::CrossMethod => vec![cross_method_suite(opts)?],
    })
}

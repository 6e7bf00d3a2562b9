//! Model studies: Lipkin census per N, quasi-metric sweeps, EP3 sprouting.

use epcore::finder::{find_epn_with, EpnOptions};
use epcore::linalg::c;
use epcore::models::{
    ep3_sprouting, ep3_two_parameter, lipkin_census, lipkin_default_region, pt_threshold, quasi_metric, LipkinSpec,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use super::RunOutput;
use crate::config::{ExperimentConfig, FamilySpec};
use crate::error::CliError;
use crate::output::{index_list, json_real, Table};
use crate::trace::Trace;

pub fn run_lipkin(cfg: &ExperimentConfig, trace: &mut Trace) -> Result<RunOutput, CliError> {
    let run = cfg.section(&cfg.lipkin, "lipkin")?;
    if run.ns.is_empty() {
        return Err(CliError::config("config.missing_field", "`lipkin.ns` is empty"));
    }
    let mut t = Table::new([
        "n",
        "index",
        "block",
        "lambda",
        "energy",
        "order",
        "kind",
        "levels",
        "defect_overlap",
        "exponent",
        "from_symmetry",
        "other_block_gap",
    ])
    .with_complex(&["lambda", "energy"]);
    let mut per_n = Vec::new();
    for &n in &run.ns {
        let spec = LipkinSpec::new(n)?;
        trace.hit("models::lipkin");
        let region = match &cfg.region {
            Some(r) => r.build()?,
            None => lipkin_default_region(n),
        };
        trace.hit("models::lipkin_census");
        let census = lipkin_census(n, &region)?;
        for (k, p) in census.points.iter().enumerate() {
            t.push(vec![
                n.into(),
                k.into(),
                p.block.as_str().into(),
                p.ep.lambda().into(),
                p.ep.energy.into(),
                p.ep.order.into(),
                p.ep.kind.as_str().into(),
                index_list(&p.ep.level_indices),
                p.ep.defect_overlap.into(),
                p.ep.exponent.into(),
                p.from_symmetry.into(),
                p.other_block_gap.into(),
            ]);
        }
        per_n.push(json!({
            "n": n,
            "points": census.points.len(),
            "closure_defect": json_real(census.closure_defect),
            "distance_to_one": json_real(census.distance_to_one),
            "algebra_residual": json_real(spec.algebra_residual()),
        }));
    }
    let mut out = RunOutput {
        table: t,
        ..Default::default()
    };
    out.extras.insert("censuses".into(), Value::from(per_n));
    Ok(out)
}

pub fn run_metric(cfg: &ExperimentConfig, trace: &mut Trace) -> Result<RunOutput, CliError> {
    let spec = cfg.family()?;
    let built = spec.build(trace)?;
    let f = &built.family;
    let run = cfg.section(&cfg.metric, "metric")?;
    if run.lambdas.is_empty() {
        return Err(CliError::config("config.missing_field", "`metric.lambdas` is empty"));
    }
    trace.hit("models::quasi_metric");
    let results: Vec<_> = run.lambdas.par_iter().map(|l| quasi_metric(&f.at(l.value()))).collect();
    let mut t = Table::new([
        "lambda",
        "status",
        "condition",
        "min_eigenvalue",
        "intertwining_residual",
        "hermiticity_residual",
    ])
    .with_complex(&["lambda"]);
    for (l, r) in run.lambdas.iter().zip(results) {
        let nan = f64::NAN;
        let (status, cond, min_eig, inter, herm) = match r {
            Ok(m) => (
                "ok".to_string(),
                m.condition,
                m.min_eigenvalue,
                m.intertwining_residual,
                m.hermiticity_residual,
            ),
            Err(e) => {
                let e = CliError::from(e);
                if e.class == crate::error::ErrorClass::Config {
                    return Err(e);
                }
                (e.code, nan, nan, nan, nan)
            }
        };
        t.push(vec![
            l.value().into(),
            status.into(),
            cond.into(),
            min_eig.into(),
            inter.into(),
            herm.into(),
        ]);
    }
    let mut out = RunOutput {
        table: t,
        ..Default::default()
    };
    if run.threshold {
        let FamilySpec::PtDimer { kappa } = spec else {
            return Err(CliError::config("config.family", "`metric.threshold` needs the pt_dimer family"));
        };
        trace.hit("finder::refine_ep");
        let th = pt_threshold(*kappa)?;
        out.extras.insert(
            "threshold".into(),
            json!({
                "gamma": json_real(th.gamma),
                "kind": th.ep.kind.as_str(),
                "bisection_steps": th.bisection_steps,
            }),
        );
    }
    Ok(out)
}

pub fn run_ep3(cfg: &ExperimentConfig, trace: &mut Trace) -> Result<RunOutput, CliError> {
    let run = cfg.section(&cfg.ep3, "ep3")?;
    let mut t = Table::new([
        "epsilon",
        "scale",
        "index",
        "lambda",
        "energy",
        "order",
        "kind",
        "exponent",
        "separation",
    ])
    .with_complex(&["lambda", "energy"]);
    if run.epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(CliError::config("config.value", "`ep3.epsilons` must be positive"));
    }
    trace.hit("models::ep3_family");
    let reports = run
        .epsilons
        .par_iter()
        .map(|&e| ep3_sprouting(e))
        .collect::<Result<Vec<_>, _>>()?;
    for r in &reports {
        for (k, ep) in r.points.iter().enumerate() {
            t.push(vec![
                r.epsilon.into(),
                r.scale.into(),
                k.into(),
                ep.lambda().into(),
                ep.energy.into(),
                ep.order.into(),
                ep.kind.as_str().into(),
                ep.exponent.into(),
                r.separation.unwrap_or(f64::NAN).into(),
            ]);
        }
    }
    if run.certify {
        trace.hit("finder::find_epn");
        let f = ep3_two_parameter();
        let ep = find_epn_with(&f, &[c(1e-3, 1e-3), c(1e-3, 0.0)], 3, &EpnOptions::default())?;
        t.push(vec![
            0.0.into(),
            0.0.into(),
            0usize.into(),
            ep.lambda().into(),
            ep.energy.into(),
            ep.order.into(),
            ep.kind.as_str().into(),
            ep.exponent.into(),
            f64::NAN.into(),
        ]);
    }
    Ok(RunOutput {
        table: t,
        ..Default::default()
    })
}

//! Loops around EPs and approach exponents.

use epcore::finder::{find_epn_with, refine_ep_with, EpnOptions, ExceptionalPoint, MatrixFamily};
use epcore::monodromy::{
    exponent_fit_with, track_loops, track_turns, verify_cycle_with, FitOptions, LoopPath, MonodromyResult,
    TrackOptions, CCW_PATTERN, CW_PATTERN,
};
use rayon::prelude::*;
use serde_json::Value;

use super::RunOutput;
use crate::config::{positive, ExperimentConfig, LoopSpec, EncircleMode};
use crate::error::CliError;
use crate::output::{json_real, Table};
use crate::trace::Trace;

fn loop_path(spec: &LoopSpec) -> Result<LoopPath, CliError> {
    positive("radius", spec.radius)?;
    if spec.turns == 0 {
        return Err(CliError::config("config.value", "`turns` must be positive"));
    }
    let mut lp = LoopPath::new(spec.center.value(), spec.radius, spec.orientation.into());
    if let Some(s) = spec.samples {
        lp.samples = s;
    }
    lp.start_angle = spec.start_angle;
    lp.validate()?;
    Ok(lp)
}

fn levels(f: &MatrixFamily, spec: &LoopSpec) -> Vec<usize> {
    spec.levels.clone().unwrap_or_else(|| (0..f.dim()).collect())
}

pub fn run_encircle(cfg: &ExperimentConfig, trace: &mut Trace) -> Result<RunOutput, CliError> {
    let built = cfg.family()?.build(trace)?;
    let f = &built.family;
    let run = cfg.section(&cfg.encircle, "encircle")?;
    if run.loops.is_empty() {
        return Err(CliError::config("config.missing_field", "`encircle.loops` is empty"));
    }
    let paths = run.loops.iter().map(loop_path).collect::<Result<Vec<_>, _>>()?;
    let opts = cfg.tolerances.tracking(run.gauge.into());
    let mut out = RunOutput::default();
    out.extras.insert("gauge".into(), Value::from(opts.gauge.as_str()));
    match run.mode {
        EncircleMode::Track => {
            out.table = track(f, run.loops.as_slice(), &paths, &opts, trace)?;
        }
        EncircleMode::Cycle => {
            let fopts = cfg.tolerances.finder();
            trace.hit("finder::refine_ep");
            let eps = paths
                .par_iter()
                .map(|lp| refine_ep_with(f, lp.center, &fopts))
                .collect::<Result<Vec<_>, _>>()?;
            trace.hit("monodromy::verify_cycle");
            let reports = paths
                .iter()
                .zip(&eps)
                .map(|(lp, ep)| verify_cycle_with(f, ep, lp.radius, &opts))
                .collect::<Result<Vec<_>, _>>()?;
            let mut t = Table::new([
                "loop",
                "lambda_ep",
                "orientation",
                "turn",
                "psi",
                "level",
                "image",
                "factor",
                "expected",
                "deviation",
            ])
            .with_complex(&["lambda_ep", "factor"]);
            let mut summary = Vec::new();
            for (k, (rep, ep)) in reports.iter().zip(&eps).enumerate() {
                for (orientation, turns, pattern) in [("ccw", &rep.ccw, &CCW_PATTERN), ("cw", &rep.cw, &CW_PATTERN)] {
                    for (m, rec) in turns.iter().enumerate() {
                        for p in 0..2 {
                            let level = if p == 0 { rep.psi1 } else { rep.psi2 };
                            let expected = pattern[m][p];
                            t.push(vec![
                                k.into(),
                                ep.lambda().into(),
                                orientation.into(),
                                rec.turns.into(),
                                (p + 1).into(),
                                level.into(),
                                rec.images[p].into(),
                                rec.factors[p].into(),
                                expected.into(),
                                (rec.factors[p] - expected).norm().into(),
                            ]);
                        }
                    }
                }
                summary.push(serde_json::json!({
                    "loop": k,
                    "matches": rep.matches,
                    "max_deviation": json_real(rep.max_deviation),
                    "samples_used": rep.samples_used,
                }));
            }
            out.table = t;
            out.extras.insert("cycles".into(), Value::from(summary));
        }
    }
    Ok(out)
}

fn track(
    f: &MatrixFamily,
    specs: &[LoopSpec],
    paths: &[LoopPath],
    opts: &TrackOptions,
    trace: &mut Trace,
) -> Result<Table, CliError> {
    trace.hit("monodromy::track_loop");
    let results: Vec<Vec<MonodromyResult>> = if specs.iter().all(|s| s.turns == 1) {
        let jobs: Vec<(LoopPath, Vec<usize>)> =
            paths.iter().zip(specs).map(|(lp, s)| (*lp, levels(f, s))).collect();
        track_loops(f, &jobs, opts)
            .into_iter()
            .map(|r| r.map(|m| vec![m]))
            .collect::<Result<_, _>>()?
    } else {
        paths
            .par_iter()
            .zip(specs)
            .map(|(lp, s)| track_turns(f, lp, &levels(f, s), s.turns, opts))
            .collect::<Result<_, _>>()?
    };
    let mut t = Table::new([
        "loop",
        "center",
        "radius",
        "orientation",
        "turn",
        "level",
        "image",
        "factor",
        "samples_used",
        "extrapolated",
    ])
    .with_complex(&["center", "factor"]);
    for (k, (lp, per_turn)) in paths.iter().zip(&results).enumerate() {
        for (m, res) in per_turn.iter().enumerate() {
            for (j, &level) in res.levels.iter().enumerate() {
                t.push(vec![
                    k.into(),
                    lp.center.into(),
                    lp.radius.into(),
                    lp.orientation.as_str().into(),
                    (m + 1).into(),
                    level.into(),
                    res.permutation[j].into(),
                    res.end_factors[j].into(),
                    res.samples_used.into(),
                    res.extrapolated.into(),
                ]);
            }
        }
    }
    Ok(t)
}

pub fn run_exponents(cfg: &ExperimentConfig, trace: &mut Trace) -> Result<RunOutput, CliError> {
    let built = cfg.family()?.build(trace)?;
    let f = &built.family;
    let run = cfg.section(&cfg.exponents, "exponents")?;
    if run.seeds.is_empty() {
        return Err(CliError::config("config.missing_field", "`exponents.seeds` is empty"));
    }
    let mut fit = FitOptions::default();
    if let Some(d) = run.direction {
        fit.direction = d.value();
        positive("direction modulus", fit.direction.norm())?;
    }
    if let Some(v) = run.min_distance {
        fit.min_distance = positive("min_distance", v)?;
    }
    if let Some(v) = run.max_distance {
        fit.max_distance = positive("max_distance", v)?;
    }
    if let Some(v) = run.points {
        fit.points = v;
    }
    let fopts = cfg.tolerances.finder();
    let order = run.order.unwrap_or(2);
    let eps: Vec<ExceptionalPoint> = if order == 2 && f.n_params() == 1 {
        trace.hit("finder::refine_ep");
        run.seeds
            .par_iter()
            .map(|p| match p.values().as_slice() {
                [z] => Ok(refine_ep_with(f, *z, &fopts)?),
                _ => Err(CliError::config("config.seed", "single-parameter seeds must be scalars")),
            })
            .collect::<Result<_, CliError>>()?
    } else {
        trace.hit("finder::find_epn");
        let eopts = EpnOptions {
            finder: fopts,
            direction: None,
        };
        run.seeds
            .par_iter()
            .map(|p| Ok(find_epn_with(f, &p.values(), order, &eopts)?))
            .collect::<Result<_, CliError>>()?
    };

    trace.hit("monodromy::exponent_fit");
    let mut t = Table::new([
        "index",
        "lambda",
        "energy",
        "order",
        "kind",
        "classified_exponent",
        "gap_exponent",
        "component_exponent",
        "gap_r2",
        "component_r2",
        "status",
    ])
    .with_complex(&["lambda", "energy"]);
    for (k, ep) in eps.iter().enumerate() {
        // Multi-parameter points carry the gap exponent from classification only.
        let fitted = if ep.order == 2 && f.n_params() == 1 {
            Some(exponent_fit_with(f, ep, &fit).map_err(CliError::from))
        } else {
            None
        };
        let nan = f64::NAN;
        let (gap, comp, gr2, cr2, status) = match fitted {
            Some(Ok(x)) => (x.gap_exponent, x.component_exponent, x.gap_r2, x.component_r2, "ok".to_string()),
            Some(Err(e)) => (nan, nan, nan, nan, e.code),
            None => (nan, nan, nan, nan, "classified_only".to_string()),
        };
        t.push(vec![
            k.into(),
            ep.lambda().into(),
            ep.energy.into(),
            ep.order.into(),
            ep.kind.as_str().into(),
            ep.exponent.into(),
            gap.into(),
            comp.into(),
            gr2.into(),
            cr2.into(),
            status.into(),
        ]);
    }
    Ok(RunOutput {
        table: t,
        ..Default::default()
    })
}

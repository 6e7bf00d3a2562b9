//! Finder over a family: full census, seed scans, refinement, classification.

use epcore::finder::{
    census_with, classify_with, coalesced_clusters, find_epn_with, indicator_grid, refine_ep_with, scan_grid,
    EpnOptions, ExceptionalPoint,
};
use epcore::linalg::char_discriminant;
use epcore::models;
use rayon::prelude::*;
use serde_json::Value;

use super::{ep_rows, ep_table, push_ep, RunOutput};
use crate::config::{CensusMode, CensusRun, ExperimentConfig, FamilySpec, Point};
use crate::error::CliError;
use crate::output::{json_real, Table};
use crate::trace::Trace;

fn seeds(run: &CensusRun) -> Result<&[Point], CliError> {
    if run.seeds.is_empty() {
        return Err(CliError::config("config.missing_field", "this mode needs `census.seeds`"));
    }
    Ok(&run.seeds)
}

fn scalar_seed(p: &Point) -> Result<num_complex::Complex64, CliError> {
    match p.values().as_slice() {
        [z] => Ok(*z),
        _ => Err(CliError::config("config.seed", "single-parameter seeds must be scalars")),
    }
}

pub fn run(cfg: &ExperimentConfig, trace: &mut Trace) -> Result<RunOutput, CliError> {
    let spec = cfg.family()?;
    let built = spec.build(trace)?;
    let f = &built.family;
    let default_run = CensusRun::default();
    let run = cfg.census.as_ref().unwrap_or(&default_run);
    let opts = cfg.tolerances.finder();
    let mut out = RunOutput::default();

    match run.mode {
        CensusMode::Census => {
            let region = cfg.region()?;
            trace.hit("finder::census");
            let eps = census_with(f, &region, &opts)?;
            out.table = ep_rows(f, &eps, trace)?;
        }
        CensusMode::Scan => {
            let region = cfg.region()?;
            trace.hit("finder::scan_grid");
            let seeds = scan_grid(f, &region)?;
            let mut t = Table::new(["index", "seed"]).with_complex(&["seed"]);
            for (k, s) in seeds.iter().enumerate() {
                t.push(vec![k.into(), (*s).into()]);
            }
            out.table = t;
        }
        CensusMode::Grid => {
            let region = cfg.region()?;
            let grid = indicator_grid(f, &region)?;
            trace.hit("linalg::char_discriminant");
            let nodes: Vec<(usize, usize)> =
                (0..grid.ny).flat_map(|j| (0..grid.nx).map(move |i| (i, j))).collect();
            let discs = nodes
                .par_iter()
                .map(|&(i, j)| char_discriminant(f, grid.node(i, j)))
                .collect::<Result<Vec<_>, _>>()?;
            let mut t = Table::new(["i", "j", "lambda", "log_abs_disc", "log_min_gap", "disc"])
                .with_complex(&["lambda", "disc"]);
            for (k, (&(i, j), d)) in nodes.iter().zip(discs).enumerate() {
                t.push(vec![
                    i.into(),
                    j.into(),
                    grid.node(i, j).into(),
                    grid.log_disc[k].into(),
                    grid.log_min_gap[k].into(),
                    d.into(),
                ]);
            }
            out.table = t;
        }
        CensusMode::Refine => {
            trace.hit("finder::refine_ep");
            let eps = seeds(run)?
                .par_iter()
                .map(|p| Ok(refine_ep_with(f, scalar_seed(p)?, &opts)?))
                .collect::<Result<Vec<_>, CliError>>()?;
            out.table = ep_rows(f, &eps, trace)?;
        }
        CensusMode::Classify => {
            let mut t = ep_table(1);
            let mut index = 0;
            for p in seeds(run)? {
                let lambda = scalar_seed(p)?;
                for cluster in coalesced_clusters(f, lambda, &opts)? {
                    trace.hit("finder::classify");
                    let cl = classify_with(f, lambda, &cluster, &opts)?;
                    let ep = ExceptionalPoint {
                        location: vec![lambda],
                        energy: cl.energy,
                        order: cl.order,
                        kind: cl.kind,
                        level_indices: cl.cluster.clone(),
                        defect_overlap: cl.defect_overlap,
                        exponent: cl.exponent,
                        residual: f64::NAN,
                        iterations: 0,
                    };
                    push_ep(&mut t, index, f, &ep, trace)?;
                    index += 1;
                }
            }
            out.table = t;
        }
        CensusMode::Epn => {
            let n = run
                .order
                .ok_or_else(|| CliError::config("config.missing_field", "epn mode needs `census.order`"))?;
            let epn_opts = EpnOptions {
                finder: opts,
                direction: None,
            };
            trace.hit("finder::find_epn");
            let eps = seeds(run)?
                .par_iter()
                .map(|p| Ok(find_epn_with(f, &p.values(), n, &epn_opts)?))
                .collect::<Result<Vec<_>, CliError>>()?;
            out.table = ep_rows(f, &eps, trace)?;
        }
        CensusMode::Threshold => {
            let ep = match spec {
                FamilySpec::PtDimer { kappa } => {
                    let th = models::pt_threshold(*kappa)?;
                    out.extras.insert("gamma".into(), json_real(th.gamma));
                    out.extras.insert("bracket".into(), Value::from(vec![json_real(th.bracket.0), json_real(th.bracket.1)]));
                    out.extras.insert("bisection_steps".into(), Value::from(th.bisection_steps));
                    th.ep
                }
                FamilySpec::Rpa { a } => models::rpa_ep(*a)?,
                _ => {
                    return Err(CliError::config(
                        "config.family",
                        "threshold mode needs the pt_dimer or rpa family",
                    ))
                }
            };
            trace.hit("finder::refine_ep");
            let mut t = ep_table(1);
            push_ep(&mut t, 0, f, &ep, trace)?;
            out.table = t;
        }
    }
    out.extras.insert("mode".into(), Value::from(format!("{:?}", run.mode).to_lowercase()));
    Ok(out)
}

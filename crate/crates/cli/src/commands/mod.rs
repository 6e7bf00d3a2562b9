mod census;
mod encircle;
mod models;
mod response;
mod twolevel;

use epcore::finder::{ExceptionalPoint, MatrixFamily};
use epcore::linalg::{bilinear, eig, nilpotent_part, norm2};
use serde_json::{Map, Value};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{index_list, Field, Table};
use crate::trace::Trace;
use crate::SubcommandName;

/// Data records plus summary values destined for the metadata file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOutput {
    pub table: Table,
    pub extras: Map<String, Value>,
}

pub fn dispatch(sub: SubcommandName, cfg: &ExperimentConfig, trace: &mut Trace) -> Result<RunOutput, CliError> {
    cfg.tolerances.validate()?;
    match sub {
        SubcommandName::Twolevel => twolevel::run(cfg, trace),
        SubcommandName::Census => census::run(cfg, trace),
        SubcommandName::Encircle => encircle::run_encircle(cfg, trace),
        SubcommandName::Exponents => encircle::run_exponents(cfg, trace),
        SubcommandName::Response => response::run(cfg, trace),
        SubcommandName::Lipkin => models::run_lipkin(cfg, trace),
        SubcommandName::Metric => models::run_metric(cfg, trace),
        SubcommandName::Ep3 => models::run_ep3(cfg, trace),
    }
}

fn param_columns(n_params: usize) -> Vec<String> {
    (0..n_params)
        .map(|k| if k == 0 { "lambda".to_string() } else { format!("lambda{k}") })
        .collect()
}

/// Columns shared by every table that lists exceptional points.
fn ep_table(n_params: usize) -> Table {
    let mut cols = vec!["index".to_string()];
    cols.extend(param_columns(n_params));
    cols.extend(
        [
            "energy",
            "order",
            "kind",
            "levels",
            "defect_overlap",
            "endpoint_overlap",
            "nilpotency",
            "exponent",
            "residual",
            "iterations",
        ]
        .map(String::from),
    );
    let mut complex = param_columns(n_params);
    complex.push("energy".into());
    let names: Vec<&str> = complex.iter().map(String::as_str).collect();
    Table::new(cols).with_complex(&names)
}

/// Smallest normalized `|ψ̃·ψ|` among the coalescing levels, from a fresh
/// decomposition at the EP.
fn endpoint_overlap(f: &MatrixFamily, ep: &ExceptionalPoint, trace: &mut Trace) -> Result<f64, CliError> {
    trace.hit("linalg::eig");
    let sys = eig(&f.evaluate(&ep.location)?)?;
    Ok(ep
        .level_indices
        .iter()
        .filter(|&&k| k < sys.len())
        .map(|&k| {
            let (l, r) = (&sys.left_vectors[k], &sys.right_vectors[k]);
            bilinear(l, r).norm() / (norm2(l) * norm2(r))
        })
        .fold(f64::INFINITY, f64::min))
}

/// `‖N²‖/‖N‖²` of the nilpotent part at the EP; `NaN` when the cluster is
/// not a rank-one Jordan block.
fn nilpotency(f: &MatrixFamily, ep: &ExceptionalPoint, trace: &mut Trace) -> Result<f64, CliError> {
    trace.hit("linalg::nilpotent_part");
    let h = f.evaluate(&ep.location)?;
    Ok(match nilpotent_part(&h, ep.energy) {
        Ok(n) => {
            let nn = n.norm_fro();
            if nn == 0.0 {
                0.0
            } else {
                (&n * &n).norm_fro() / (nn * nn)
            }
        }
        Err(_) => f64::NAN,
    })
}

fn push_ep(
    table: &mut Table,
    index: usize,
    f: &MatrixFamily,
    ep: &ExceptionalPoint,
    trace: &mut Trace,
) -> Result<(), CliError> {
    let mut row: Vec<Field> = vec![index.into()];
    row.extend(ep.location.iter().map(|&z| Field::from(z)));
    row.extend([
        ep.energy.into(),
        ep.order.into(),
        ep.kind.as_str().into(),
        index_list(&ep.level_indices),
        ep.defect_overlap.into(),
        endpoint_overlap(f, ep, trace)?.into(),
        nilpotency(f, ep, trace)?.into(),
        ep.exponent.into(),
        ep.residual.into(),
        ep.iterations.into(),
    ]);
    table.push(row);
    Ok(())
}

fn ep_rows(f: &MatrixFamily, eps: &[ExceptionalPoint], trace: &mut Trace) -> Result<Table, CliError> {
    let mut t = ep_table(f.n_params());
    for (k, ep) in eps.iter().enumerate() {
        push_ep(&mut t, k, f, ep, trace)?;
    }
    Ok(t)
}

//! Closed-form report for a two-level family.

use epcore::linalg::{biorthogonalize, eig, sort_eigenvalues, ComplexMatrix};
use epcore::twolevel::{self, Branch};
use num_complex::Complex64;
use serde_json::Value;

use super::RunOutput;
use crate::config::{self, ExperimentConfig, TwoLevelRun};
use crate::error::CliError;
use crate::output::{json_real, Table};
use crate::trace::Trace;

fn put(t: &mut Table, quantity: &str, index: usize, row: usize, col: usize, v: Complex64) {
    t.push(vec![quantity.into(), index.into(), row.into(), col.into(), v.into()]);
}

fn put_matrix(t: &mut Table, quantity: &str, index: usize, m: &ComplexMatrix) {
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            put(t, quantity, index, i, j, m[(i, j)]);
        }
    }
}

pub fn run(cfg: &ExperimentConfig, trace: &mut Trace) -> Result<RunOutput, CliError> {
    let built = cfg.family()?.build(trace)?;
    let p = built
        .twolevel
        .ok_or_else(|| CliError::config("config.family", "twolevel needs a two-level family"))?;
    let default_run = TwoLevelRun::default();
    let run = cfg.twolevel.as_ref().unwrap_or(&default_run);
    let branch = match run.branch {
        config::Branch::Principal => Branch::Principal,
        config::Branch::Flipped => Branch::Flipped,
    };

    let mut t = Table::new(["quantity", "index", "row", "col", "value"]).with_complex(&["value"]);
    trace.hit("twolevel::ep_locations");
    let eps = twolevel::ep_locations_with_branch(&p, branch)?;
    for k in 0..2 {
        put(&mut t, "lambda_ep", k + 1, 0, 0, eps.lambda[k]);
        put(&mut t, "energy_ep", k + 1, 0, 0, eps.energy[k]);
    }
    trace.hit("twolevel::ep_eigenvectors");
    let vecs = twolevel::ep_eigenvectors(&p)?;
    for k in 0..2 {
        for i in 0..2 {
            put(&mut t, "right_vector", k + 1, i, 0, vecs.right[k][i]);
        }
        for i in 0..2 {
            put(&mut t, "left_vector", k + 1, 0, i, vecs.left[k][i]);
        }
    }
    for which in 1..=2 {
        trace.hit("twolevel::jordan_at_ep");
        match twolevel::jordan_at_ep(&p, which) {
            Ok((s, _)) => put_matrix(&mut t, "jordan_s", which, &s),
            Err(twolevel::TwoLevelError::DegenerateFamily) => {}
            Err(e) => return Err(e.into()),
        }
        put_matrix(&mut t, "green_second_order", which, &twolevel::green_second_order(&p, which)?);
    }

    let mut worst_gap = 0.0f64;
    for (s, sample) in run.samples.iter().enumerate() {
        let lambda = sample.lambda.value();
        trace.hit("twolevel::energies");
        let (e1, e2) = twolevel::energies(&p, lambda);
        let mut closed = [e1, e2];
        sort_eigenvalues(&mut closed);
        trace.hit("linalg::eig");
        let sys = eig(&p.at(lambda))?;
        trace.hit("linalg::biorthogonalize");
        let bio_error = biorthogonalize(&sys, 1e-12).map_or(f64::NAN, |b| b.biorthogonality_error());
        for (k, e) in closed.iter().enumerate() {
            put(&mut t, "energy_closed", s, k, 0, *e);
            put(&mut t, "energy_numeric", s, k, 0, sys.eigenvalues[k]);
            worst_gap = worst_gap.max((e - sys.eigenvalues[k]).norm());
        }
        put(&mut t, "biorthogonality_error", s, 0, 0, Complex64::new(bio_error, 0.0));
        if let Some(energy) = sample.energy {
            trace.hit("twolevel::greens_2x2");
            put_matrix(&mut t, "greens", s, &twolevel::greens_2x2(&p, lambda, energy.value())?);
        }
    }
    let mut out = RunOutput {
        table: t,
        ..Default::default()
    };
    out.extras.insert("branch".into(), Value::from(format!("{:?}", eps.branch).to_lowercase()));
    out.extras.insert("max_energy_discrepancy".into(), json_real(worst_gap));
    Ok(out)
}

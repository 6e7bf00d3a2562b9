//! Green's functions, pole structure, line shapes and propagation traces.

use epcore::finder::refine_ep_with;
use epcore::response::{cross_section, greens, linear_growth_fit, lorentz_fit, pole_decomposition, propagate};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::RunOutput;
use crate::config::{Channel, ExperimentConfig, ResponseTask};
use crate::error::CliError;
use crate::output::{json_complex, json_real, Table};
use crate::trace::Trace;

fn required<'a, T>(v: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    v.as_ref()
        .ok_or_else(|| CliError::config("config.missing_field", format!("this task needs `response.{name}`")))
}

pub fn run(cfg: &ExperimentConfig, trace: &mut Trace) -> Result<RunOutput, CliError> {
    let built = cfg.family()?.build(trace)?;
    let f = &built.family;
    let open = built.open.as_ref();
    let run = cfg.section(&cfg.response, "response")?;
    let lambda = match (run.lambda, open) {
        (Some(l), _) => Ok(l.value()),
        (None, Some(d)) => Ok(d.lambda_ep),
        (None, None) => Err(CliError::config("config.missing_field", "this task needs `response.lambda`")),
    };
    let channel = |c: &Option<Channel>, name: &str| required(c, name)?.resolve(open);
    let mut out = RunOutput::default();

    match run.task {
        ResponseTask::Greens => {
            let lambda = lambda?;
            if run.energies.is_empty() {
                return Err(CliError::config("config.missing_field", "`response.energies` is empty"));
            }
            trace.hit("response::greens");
            let gs = run
                .energies
                .par_iter()
                .map(|e| greens(f, lambda, e.value()))
                .collect::<Result<Vec<_>, _>>()?;
            let mut t = Table::new(["energy", "row", "col", "value"]).with_complex(&["energy", "value"]);
            for (e, g) in run.energies.iter().zip(&gs) {
                for i in 0..g.dim() {
                    for j in 0..g.dim() {
                        t.push(vec![e.value().into(), i.into(), j.into(), g[(i, j)].into()]);
                    }
                }
            }
            out.table = t;
        }
        ResponseTask::Poles => {
            let seed = match (&run.seed, open) {
                (Some(p), _) => match p.values().as_slice() {
                    [z] => *z,
                    _ => return Err(CliError::config("config.seed", "`response.seed` must be a scalar")),
                },
                (None, _) => lambda?,
            };
            trace.hit("finder::refine_ep");
            let ep = refine_ep_with(f, seed, &cfg.tolerances.finder())?;
            trace.hit("response::pole_decomposition");
            let d = pole_decomposition(f, &ep)?;
            let mut t = Table::new(["term", "row", "col", "value"]).with_complex(&["value"]);
            for (term, m) in [("first_order", &d.first_order), ("second_order", &d.second_order)] {
                for i in 0..m.dim() {
                    for j in 0..m.dim() {
                        t.push(vec![term.into(), i.into(), j.into(), m[(i, j)].into()]);
                    }
                }
            }
            out.table = t;
            out.extras.insert("lambda_ep".into(), json_complex(ep.lambda()));
            out.extras.insert("energy_ep".into(), json_complex(d.e_ep));
            out.extras.insert("scale".into(), json_real(d.scale));
            out.extras.insert("nilpotency".into(), json_real(d.nilpotency));
            out.extras.insert("reconstruction_error".into(), json_real(d.reconstruction_error));
        }
        ResponseTask::LineShape => {
            let lambda = lambda?;
            let ci = channel(&run.channel_in, "channel_in")?;
            let co = channel(&run.channel_out, "channel_out")?;
            let grid = required(&run.grid, "grid")?.values()?;
            trace.hit("response::cross_section");
            let shape = cross_section(f, lambda, &ci, &co, &grid)?;
            trace.hit("response::lorentz_fit");
            let fit = lorentz_fit(&shape);
            let mut t = Table::new(["energy", "sigma", "lorentzian"]);
            for (e, s) in shape.energies.iter().zip(&shape.values) {
                let model = fit.as_ref().map_or(f64::NAN, |l| l.eval(*e));
                t.push(vec![(*e).into(), (*s).into(), model.into()]);
            }
            out.table = t;
            let fit_json = match &fit {
                Ok(l) => json!({
                    "center": json_real(l.center),
                    "width": json_real(l.width),
                    "amplitude": json_real(l.amplitude),
                    "residual": json_real(l.residual),
                    "iterations": l.iterations,
                }),
                Err(e) => json!({ "error": CliError::from(e.clone()).code }),
            };
            out.extras.insert("lorentz_fit".into(), fit_json);
        }
        ResponseTask::Propagate => {
            let lambda = lambda?;
            let psi0 = channel(&run.psi0, "psi0")?;
            if run.times.is_empty() {
                return Err(CliError::config("config.missing_field", "`response.times` is empty"));
            }
            let h = f.at(lambda);
            trace.hit("response::propagate");
            let states = run
                .times
                .par_iter()
                .map(|&t| propagate(&h, &psi0, t))
                .collect::<Result<Vec<_>, _>>()?;
            let mut t = Table::new(["time", "component", "value"]).with_complex(&["value"]);
            for (time, psi) in run.times.iter().zip(&states) {
                for (k, z) in psi.iter().enumerate() {
                    t.push(vec![(*time).into(), k.into(), (*z).into()]);
                }
            }
            out.table = t;
            let e_star: Option<Complex64> = run.energy.map(|e| e.value()).or(open.map(|d| d.energy));
            if let (Some(e_star), true) = (e_star, run.times.len() >= 3) {
                let g = linear_growth_fit(&h, &psi0, e_star, &run.times)?;
                out.extras.insert(
                    "growth_fit".into(),
                    json!({
                        "energy": json_complex(e_star),
                        "slope_norm": json_real(g.slope_norm()),
                        "residual": json_real(g.residual),
                        "offset": Value::from(g.offset.iter().map(|z| json_complex(*z)).collect::<Vec<_>>()),
                        "slope": Value::from(g.slope.iter().map(|z| json_complex(*z)).collect::<Vec<_>>()),
                    }),
                );
            }
        }
    }
    Ok(out)
}

//! Experiment configuration: one JSON document per run.

use epcore::finder::{FinderOptions, MatrixFamily, SearchRegion};
use epcore::linalg::{c, ComplexMatrix};
use epcore::models::{self, Parity};
use epcore::monodromy::{Gauge, Orientation, TrackOptions};
use epcore::response::{open_dimer, OpenDimer};
use epcore::twolevel::TwoLevelParams;
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::CliError;
use crate::trace::Trace;

/// A complex number written either as a bare real or as `{ "re": .., "im": .. }`.
#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Cx {
    Real(f64),
    Parts(CxParts),
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CxParts {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl Cx {
    pub fn value(self) -> Complex64 {
        match self {
            Cx::Real(re) => c(re, 0.0),
            Cx::Parts(p) => c(p.re, p.im),
        }
    }
}

fn cxs(v: &[Cx]) -> Vec<Complex64> {
    v.iter().map(|z| z.value()).collect()
}

/// A parameter point: a single complex value or one value per parameter.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Point {
    Scalar(Cx),
    Vector(Vec<Cx>),
}

impl Point {
    pub fn values(&self) -> Vec<Complex64> {
        match self {
            Point::Scalar(z) => vec![z.value()],
            Point::Vector(v) => cxs(v),
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional cross-check against the subcommand given on the command line.
    pub subcommand: Option<String>,
    pub family: Option<FamilySpec>,
    pub region: Option<RegionSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub twolevel: Option<TwoLevelRun>,
    pub census: Option<CensusRun>,
    pub encircle: Option<EncircleRun>,
    pub exponents: Option<ExponentsRun>,
    pub response: Option<ResponseRun>,
    pub lipkin: Option<LipkinRun>,
    pub metric: Option<MetricRun>,
    pub ep3: Option<Ep3Run>,
    pub output: Option<OutputSpec>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::config("config.schema", e.to_string()))
    }

    pub fn family(&self) -> Result<&FamilySpec, CliError> {
        self.family
            .as_ref()
            .ok_or_else(|| CliError::config("config.missing_field", "`family` is required"))
    }

    pub fn region(&self) -> Result<SearchRegion, CliError> {
        self.region
            .as_ref()
            .ok_or_else(|| CliError::config("config.missing_field", "`region` is required"))?
            .build()
    }

    pub fn section<'a, T>(&self, value: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        value
            .as_ref()
            .ok_or_else(|| CliError::config("config.missing_field", format!("`{name}` section is required")))
    }
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<String>,
    pub format: Option<String>,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum BlockSpec {
    #[default]
    Full,
    Even,
    Odd,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    Twolevel {
        omega: [Cx; 2],
        #[serde(default = "zero_pair")]
        epsilon: [Cx; 2],
        delta: [Cx; 2],
    },
    CanonicalDimer,
    OpenDimer,
    Matrices {
        h0: Vec<Vec<Cx>>,
        generators: Vec<Vec<Vec<Cx>>>,
    },
    Lipkin {
        n: usize,
        #[serde(default)]
        block: BlockSpec,
    },
    PtDimer {
        kappa: f64,
    },
    Rpa {
        a: f64,
    },
    Ep3 {
        epsilon: f64,
    },
    Ep3TwoParameter,
}

fn zero_pair() -> [Cx; 2] {
    [Cx::Real(0.0); 2]
}

/// A family together with the closed-form data it came from, if any.
pub struct BuiltFamily {
    pub family: MatrixFamily,
    pub twolevel: Option<TwoLevelParams>,
    pub open: Option<OpenDimer>,
}

fn matrix(rows: &[Vec<Cx>], what: &str) -> Result<ComplexMatrix, CliError> {
    let rows: Vec<Vec<Complex64>> = rows.iter().map(|r| cxs(r)).collect();
    ComplexMatrix::from_rows(&rows).map_err(|e| CliError::config("config.matrix", format!("{what}: {e}")))
}

impl FamilySpec {
    pub fn build(&self, trace: &mut Trace) -> Result<BuiltFamily, CliError> {
        let plain = |family| BuiltFamily {
            family,
            twolevel: None,
            open: None,
        };
        Ok(match self {
            FamilySpec::Twolevel { omega, epsilon, delta } => {
                let p = TwoLevelParams::new(
                    [omega[0].value(), omega[1].value()],
                    [epsilon[0].value(), epsilon[1].value()],
                    [delta[0].value(), delta[1].value()],
                );
                BuiltFamily {
                    family: p.family(),
                    twolevel: Some(p),
                    open: None,
                }
            }
            FamilySpec::CanonicalDimer => {
                let p = TwoLevelParams::canonical_dimer();
                BuiltFamily {
                    family: p.family(),
                    twolevel: Some(p),
                    open: None,
                }
            }
            FamilySpec::OpenDimer => {
                let d = open_dimer();
                BuiltFamily {
                    family: d.params.family(),
                    twolevel: Some(d.params),
                    open: Some(d),
                }
            }
            FamilySpec::Matrices { h0, generators } => {
                let h0 = matrix(h0, "h0")?;
                let gens = generators
                    .iter()
                    .enumerate()
                    .map(|(k, g)| matrix(g, &format!("generator {k}")))
                    .collect::<Result<Vec<_>, _>>()?;
                plain(MatrixFamily::new(h0, gens)?)
            }
            FamilySpec::Lipkin { n, block } => {
                trace.hit("models::lipkin");
                let model = models::lipkin(*n)?;
                plain(match block {
                    BlockSpec::Full => model.full,
                    BlockSpec::Even => model.block(Parity::Even).clone(),
                    BlockSpec::Odd => model.block(Parity::Odd).clone(),
                })
            }
            FamilySpec::PtDimer { kappa } => {
                trace.hit("models::pt_dimer");
                plain(models::pt_dimer(*kappa)?)
            }
            FamilySpec::Rpa { a } => {
                trace.hit("models::rpa_block");
                plain(models::rpa_block(*a)?)
            }
            FamilySpec::Ep3 { epsilon } => {
                trace.hit("models::ep3_family");
                plain(models::ep3_family(*epsilon)?)
            }
            FamilySpec::Ep3TwoParameter => {
                trace.hit("models::ep3_family");
                plain(models::ep3_two_parameter())
            }
        })
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub lo: Cx,
    pub hi: Cx,
    pub step: f64,
    pub tolerance: Option<f64>,
    pub dedup_radius: Option<f64>,
}

impl RegionSpec {
    pub fn build(&self) -> Result<SearchRegion, CliError> {
        let mut r = SearchRegion::new(self.lo.value(), self.hi.value(), self.step);
        if let Some(t) = self.tolerance {
            r.tolerance = t;
        }
        if let Some(d) = self.dedup_radius {
            r.dedup_radius = d;
        }
        r.validate()?;
        Ok(r)
    }
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub max_iter: Option<usize>,
    pub step_tol: Option<f64>,
    pub accept_residual: Option<f64>,
    pub max_step: Option<f64>,
    pub cluster_floor: Option<f64>,
    pub track_tol: Option<f64>,
    pub max_samples: Option<usize>,
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), CliError> {
        let reals = [
            ("step_tol", self.step_tol),
            ("accept_residual", self.accept_residual),
            ("max_step", self.max_step),
            ("cluster_floor", self.cluster_floor),
            ("track_tol", self.track_tol),
        ];
        for (name, v) in reals {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(CliError::config("config.tolerance", format!("`{name}` must be positive")));
                }
            }
        }
        if self.max_iter == Some(0) || self.max_samples == Some(0) {
            return Err(CliError::config("config.tolerance", "iteration and sample limits must be positive"));
        }
        Ok(())
    }

    pub fn finder(&self) -> FinderOptions {
        let mut o = FinderOptions::default();
        if let Some(v) = self.max_iter {
            o.max_iter = v;
        }
        if let Some(v) = self.step_tol {
            o.step_tol = v;
        }
        if let Some(v) = self.accept_residual {
            o.accept_residual = v;
        }
        if self.max_step.is_some() {
            o.max_step = self.max_step;
        }
        if let Some(v) = self.cluster_floor {
            o.cluster_floor = v;
        }
        o
    }

    pub fn tracking(&self, gauge: Gauge) -> TrackOptions {
        let mut o = TrackOptions {
            gauge,
            ..TrackOptions::default()
        };
        if let Some(v) = self.track_tol {
            o.tol = v;
        }
        if let Some(v) = self.max_samples {
            o.max_samples = v;
        }
        o
    }
}

pub(crate) fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::config("config.value", format!("`{name}` must be positive, got {v}")))
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    #[default]
    Principal,
    Flipped,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Sample {
    pub lambda: Cx,
    pub energy: Option<Cx>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TwoLevelRun {
    #[serde(default)]
    pub branch: Branch,
    #[serde(default)]
    pub samples: Vec<Sample>,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum CensusMode {
    #[default]
    Census,
    Scan,
    Grid,
    Refine,
    Classify,
    Epn,
    Threshold,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CensusRun {
    #[serde(default)]
    pub mode: CensusMode,
    #[serde(default)]
    pub seeds: Vec<Point>,
    pub order: Option<usize>,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum EncircleMode {
    #[default]
    Track,
    Cycle,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum OrientationSpec {
    #[default]
    Ccw,
    Cw,
}

impl From<OrientationSpec> for Orientation {
    fn from(o: OrientationSpec) -> Self {
        match o {
            OrientationSpec::Ccw => Orientation::Ccw,
            OrientationSpec::Cw => Orientation::Cw,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum GaugeSpec {
    #[default]
    Balanced,
    Holomorphic,
}

impl From<GaugeSpec> for Gauge {
    fn from(g: GaugeSpec) -> Self {
        match g {
            GaugeSpec::Balanced => Gauge::Balanced,
            GaugeSpec::Holomorphic => Gauge::Holomorphic,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LoopSpec {
    pub center: Cx,
    pub radius: f64,
    #[serde(default)]
    pub orientation: OrientationSpec,
    #[serde(default = "one")]
    pub turns: usize,
    pub levels: Option<Vec<usize>>,
    pub samples: Option<usize>,
    #[serde(default)]
    pub start_angle: f64,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EncircleRun {
    #[serde(default)]
    pub mode: EncircleMode,
    #[serde(default)]
    pub gauge: GaugeSpec,
    pub loops: Vec<LoopSpec>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExponentsRun {
    pub seeds: Vec<Point>,
    /// Coalescence order for multi-parameter seeds; 2 uses the single-parameter finder.
    pub order: Option<usize>,
    pub direction: Option<Cx>,
    pub min_distance: Option<f64>,
    pub max_distance: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ResponseTask {
    Greens,
    Poles,
    LineShape,
    Propagate,
}

/// A state vector, or a named state of the open dimer.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Channel {
    Named(String),
    Vector(Vec<Cx>),
}

impl Channel {
    pub fn resolve(&self, open: Option<&OpenDimer>) -> Result<Vec<Complex64>, CliError> {
        match self {
            Channel::Vector(v) => Ok(cxs(v)),
            Channel::Named(name) => {
                let d = open.ok_or_else(|| {
                    CliError::config("config.channel", format!("named channel `{name}` needs the open_dimer family"))
                })?;
                match name.as_str() {
                    "phi" => Ok(d.phi.to_vec()),
                    "perpendicular" => Ok(d.perpendicular.to_vec()),
                    _ => Err(CliError::config("config.channel", format!("unknown channel `{name}`"))),
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        if !(self.points >= 2 && self.start.is_finite() && self.stop.is_finite() && self.stop > self.start) {
            return Err(CliError::config("config.grid", "grid needs stop > start and at least two points"));
        }
        let h = (self.stop - self.start) / (self.points - 1) as f64;
        Ok((0..self.points).map(|k| self.start + k as f64 * h).collect())
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ResponseRun {
    pub task: ResponseTask,
    pub lambda: Option<Cx>,
    #[serde(default)]
    pub energies: Vec<Cx>,
    pub seed: Option<Point>,
    pub channel_in: Option<Channel>,
    pub channel_out: Option<Channel>,
    pub grid: Option<GridSpec>,
    pub psi0: Option<Channel>,
    #[serde(default)]
    pub times: Vec<f64>,
    /// Reference energy for the linear-growth fit of a propagation trace.
    pub energy: Option<Cx>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LipkinRun {
    pub ns: Vec<usize>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MetricRun {
    pub lambdas: Vec<Cx>,
    #[serde(default)]
    pub threshold: bool,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Ep3Run {
    pub epsilons: Vec<f64>,
    #[serde(default = "yes")]
    pub certify: bool,
}

fn yes() -> bool {
    true
}

use epcore::finder::FinderError;
use epcore::linalg::LinalgError;
use epcore::models::ModelError;
use epcore::monodromy::MonodromyError;
use epcore::response::ResponseError;
use epcore::twolevel::TwoLevelError;
use serde_json::json;
use thiserror::Error;

/// Config errors exit with 2, domain errors with 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Domain,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Domain => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorClass::Config => "config",
            ErrorClass::Domain => "domain",
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
#[error("{code}: {message}")]
pub struct CliError {
    pub class: ErrorClass,
    pub code: String,
    pub message: String,
}

impl CliError {
    pub fn config(code: &str, message: impl Into<String>) -> Self {
        Self {
            class: ErrorClass::Config,
            code: code.into(),
            message: message.into(),
        }
    }

    pub fn domain(code: &str, message: impl Into<String>) -> Self {
        Self {
            class: ErrorClass::Domain,
            code: code.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.class.exit_code()
    }

    /// Single-line JSON written to stderr.
    pub fn to_json(&self) -> String {
        json!({
            "error": {
                "class": self.class.as_str(),
                "code": self.code,
                "message": self.message,
            }
        })
        .to_string()
    }
}

fn classed(class: ErrorClass, code: &str, message: String) -> CliError {
    CliError {
        class,
        code: code.into(),
        message,
    }
}

impl From<LinalgError> for CliError {
    fn from(e: LinalgError) -> Self {
        use ErrorClass::*;
        let (class, code) = match e {
            LinalgError::Empty => (Config, "linalg.empty"),
            LinalgError::NotSquare { .. } => (Config, "linalg.not_square"),
            LinalgError::NonFinite { .. } => (Config, "linalg.non_finite"),
            LinalgError::DimensionMismatch { .. } => (Config, "linalg.dimension_mismatch"),
            LinalgError::NoConvergence { .. } => (Domain, "linalg.no_convergence"),
            LinalgError::NearDefective { .. } => (Domain, "linalg.near_defective"),
            LinalgError::NotDefective { .. } => (Domain, "linalg.not_defective"),
            LinalgError::Singular { .. } => (Domain, "linalg.singular"),
        };
        classed(class, code, e.to_string())
    }
}

impl From<FinderError> for CliError {
    fn from(e: FinderError) -> Self {
        use ErrorClass::*;
        let (class, code) = match &e {
            FinderError::Linalg(inner) => return inner.clone().into(),
            FinderError::NoGenerators => (Config, "finder.no_generators"),
            FinderError::GeneratorDimension { .. } => (Config, "finder.generator_dimension"),
            FinderError::ParameterCount { .. } => (Config, "finder.parameter_count"),
            FinderError::NotSingleParameter => (Config, "finder.not_single_parameter"),
            FinderError::InvalidRegion(_) => (Config, "finder.invalid_region"),
            FinderError::InvalidCluster(_) => (Domain, "finder.invalid_cluster"),
            FinderError::NoConvergence { .. } => (Domain, "finder.no_convergence"),
            FinderError::ClusterAmbiguous { .. } => (Domain, "finder.cluster_ambiguous"),
            FinderError::InsufficientParameters { .. } => (Config, "finder.insufficient_parameters"),
            FinderError::OrderMismatch { .. } => (Domain, "finder.order_mismatch"),
        };
        classed(class, code, e.to_string())
    }
}

impl From<TwoLevelError> for CliError {
    fn from(e: TwoLevelError) -> Self {
        let code = match e {
            TwoLevelError::CrossingNotEP => "twolevel.crossing_not_ep",
            TwoLevelError::NonDiagonalizableCrossing => "twolevel.non_diagonalizable_crossing",
            TwoLevelError::EpAtInfinity { .. } => "twolevel.ep_at_infinity",
            TwoLevelError::DegenerateFamily => "twolevel.degenerate_family",
            TwoLevelError::PoleHit { .. } => "twolevel.pole_hit",
            TwoLevelError::InvalidIndex(_) => return CliError::config("twolevel.invalid_index", e.to_string()),
        };
        CliError::domain(code, e.to_string())
    }
}

impl From<MonodromyError> for CliError {
    fn from(e: MonodromyError) -> Self {
        use ErrorClass::*;
        let (class, code) = match &e {
            MonodromyError::Finder(inner) => return inner.clone().into(),
            MonodromyError::Linalg(inner) => return inner.clone().into(),
            MonodromyError::InvalidLoop(_) => (Config, "monodromy.invalid_loop"),
            MonodromyError::InvalidLevels(_) => (Config, "monodromy.invalid_levels"),
            MonodromyError::StartNearEp { .. } => (Domain, "monodromy.start_near_ep"),
            MonodromyError::RefineSampling { .. } => (Domain, "monodromy.refine_sampling"),
            MonodromyError::TrackingFailed { .. } => (Domain, "monodromy.tracking_failed"),
            MonodromyError::NotEp2 { .. } => (Domain, "monodromy.not_ep2"),
            MonodromyError::BadFit { .. } => (Domain, "monodromy.bad_fit"),
        };
        classed(class, code, e.to_string())
    }
}

impl From<ResponseError> for CliError {
    fn from(e: ResponseError) -> Self {
        use ErrorClass::*;
        let (class, code) = match &e {
            ResponseError::Finder(inner) => return inner.clone().into(),
            ResponseError::Linalg(inner) => return inner.clone().into(),
            ResponseError::PoleHit { .. } => (Domain, "response.pole_hit"),
            ResponseError::NotEp2(_) => (Domain, "response.not_ep2"),
            ResponseError::NotIsolated { .. } => (Domain, "response.not_isolated"),
            ResponseError::Gain { .. } => (Domain, "response.gain"),
            ResponseError::RealSpectrum => (Domain, "response.real_spectrum"),
            ResponseError::InvalidInput(_) => (Config, "response.invalid_input"),
            ResponseError::FitFailed(_) => (Domain, "response.fit_failed"),
        };
        classed(class, code, e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        use ErrorClass::*;
        let (class, code) = match &e {
            ModelError::Finder(inner) => return inner.clone().into(),
            ModelError::Linalg(inner) => return inner.clone().into(),
            ModelError::InvalidN(_) => (Config, "models.invalid_n"),
            ModelError::InvalidParameter(_) => (Config, "models.invalid_parameter"),
            ModelError::BrokenPhase { .. } => (Domain, "models.broken_phase"),
            ModelError::MetricBlowup { .. } => (Domain, "models.metric_blowup"),
            ModelError::NoThreshold { .. } => (Domain, "models.no_threshold"),
        };
        classed(class, code, e.to_string())
    }
}

//! Record of the library operations a run actually invoked.

use std::collections::BTreeSet;

use crate::SubcommandName;

/// Every public library operation the runner exposes.
pub const OPERATIONS: [&str; 28] = [
    "linalg::eig",
    "linalg::biorthogonalize",
    "linalg::nilpotent_part",
    "linalg::char_discriminant",
    "twolevel::ep_locations",
    "twolevel::energies",
    "twolevel::ep_eigenvectors",
    "twolevel::jordan_at_ep",
    "twolevel::greens_2x2",
    "finder::scan_grid",
    "finder::refine_ep",
    "finder::classify",
    "finder::census",
    "finder::find_epn",
    "monodromy::track_loop",
    "monodromy::verify_cycle",
    "monodromy::exponent_fit",
    "response::greens",
    "response::pole_decomposition",
    "response::cross_section",
    "response::lorentz_fit",
    "response::propagate",
    "models::lipkin",
    "models::lipkin_census",
    "models::pt_dimer",
    "models::quasi_metric",
    "models::rpa_block",
    "models::ep3_family",
];

/// Reached when a subcommand builds a named model family.
const FAMILY_OPS: [&str; 4] = ["models::lipkin", "models::pt_dimer", "models::rpa_block", "models::ep3_family"];

/// Operations each subcommand may invoke, including those reached by
/// building a named model family.
pub fn declared(sub: SubcommandName) -> Vec<&'static str> {
    let own: &[&str] = match sub {
        SubcommandName::Twolevel => &[
            "twolevel::ep_locations",
            "twolevel::energies",
            "twolevel::ep_eigenvectors",
            "twolevel::jordan_at_ep",
            "twolevel::greens_2x2",
            "linalg::eig",
            "linalg::biorthogonalize",
        ],
        SubcommandName::Census => &[
            "finder::census",
            "finder::scan_grid",
            "finder::refine_ep",
            "finder::classify",
            "finder::find_epn",
            "linalg::char_discriminant",
            "linalg::eig",
            "linalg::nilpotent_part",
        ],
        SubcommandName::Encircle => &["monodromy::track_loop", "monodromy::verify_cycle", "finder::refine_ep"],
        SubcommandName::Exponents => &["monodromy::exponent_fit", "finder::refine_ep", "finder::find_epn"],
        SubcommandName::Response => &[
            "response::greens",
            "response::pole_decomposition",
            "response::cross_section",
            "response::lorentz_fit",
            "response::propagate",
            "finder::refine_ep",
        ],
        SubcommandName::Lipkin => &["models::lipkin_census", "models::lipkin"],
        SubcommandName::Metric => &["models::quasi_metric", "finder::refine_ep"],
        SubcommandName::Ep3 => &["finder::find_epn", "models::ep3_family"],
    };
    let builds_family = !matches!(sub, SubcommandName::Lipkin | SubcommandName::Ep3);
    let family: &[&str] = if builds_family { &FAMILY_OPS } else { &[] };
    let mut all: Vec<&'static str> = own.iter().chain(family).copied().collect();
    all.sort_unstable();
    all.dedup();
    all
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    hits: BTreeSet<&'static str>,
}

impl Trace {
    pub fn hit(&mut self, op: &'static str) {
        debug_assert!(OPERATIONS.contains(&op), "unknown operation {op}");
        self.hits.insert(op);
    }

    pub fn operations(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.hits.iter().copied()
    }

    pub fn contains(&self, op: &str) -> bool {
        self.hits.contains(op)
    }
}

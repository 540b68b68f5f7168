//! Bundled example instances.

use crate::classify::Regime;
use crate::graph::StorageGraph;

#[derive(Clone, Copy, Debug)]
pub struct Instance {
    pub name: &'static str,
    pub text: &'static str,
    /// Regime this crate's classifier assigns.
    pub regime: Regime,
}

impl Instance {
    pub fn graph(&self) -> StorageGraph {
        StorageGraph::parse(self.text).expect("bundled instance parses")
    }
}

macro_rules! instance {
    ($name:literal, $regime:expr) => {
        Instance {
            name: $name,
            text: include_str!(concat!("../instances/", $name, ".graph")),
            regime: $regime,
        }
    };
}

pub const INSTANCES: &[Instance] = &[
    instance!("cycle4", Regime::ExtremalOneOverM),
    instance!("cube3", Regime::ExtremalOneOverM),
    instance!("tetra_pair", Regime::ExtremalOneOverM),
    instance!("internal_edge", Regime::ExtremalOneOverM),
    instance!("internal_edge_corrected", Regime::SubExtremal),
    instance!("keyless_mixed", Regime::Keyless),
    instance!("keyless_degenerate", Regime::Keyless),
];

pub fn get(name: &str) -> Option<&'static Instance> {
    INSTANCES.iter().find(|i| i.name == name)
}

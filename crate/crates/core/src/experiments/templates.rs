//! Built-in scenarios, one per operation.

use serde::Serialize;

use super::{ops, Operation, Scenario, SpaceSpec, SCHEMA_VERSION};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TemplateInfo {
    pub name: &'static str,
    pub description: &'static str,
}

fn description(op: Operation) -> &'static str {
    match op {
        Operation::MetricAudit => "triangle inequality, symmetry and zero set of the visual metric on random triples",
        Operation::SineFormula => "angle estimates from the sine formula against closed-form boundary angles",
        Operation::SeaweedTits => "Tits distances and components of the seaweed boundary",
        Operation::ConeConverge => "rescaled distances converge monotonically to the cone metric",
        Operation::ThetaCommute => "radial retraction commutes with rescaling and is 1-Lipschitz",
        Operation::CollapseSchedule => "convergent ray families collapse under the inverse-root schedule",
        Operation::ScaleLattice => "upper and lower bounds of the scale lattice",
        Operation::SpiralSweep => "spiral map pushforwards sweep the circle; twist and distortion bounds",
        Operation::SeaweedPushforward => "lifted spiral maps on the seaweed cover: escaping and dense limit sets",
        Operation::MorseProbe => "quasi-geodesic deviation from rays: bounded for isolated ends, growing in flats",
        Operation::HausdorffBound => "Hausdorff distance between close quasi-geodesics against its bound",
        Operation::CutPoint => "the basepoint separates rescaled tree rays past their shared prefix",
        Operation::SeaweedOracle => "seaweed distance formula against a visibility-graph shortest path",
    }
}

pub fn list_scenarios() -> Vec<TemplateInfo> {
    Operation::ALL.into_iter().map(|op| TemplateInfo { name: op.name(), description: description(op) }).collect()
}

fn spaces(op: Operation) -> Vec<SpaceSpec> {
    let e2 = SpaceSpec::Euclidean { dimension: 2 };
    let tree = SpaceSpec::RandomTree { max_vertices: 64 };
    match op {
        Operation::MetricAudit => vec![tree, e2, SpaceSpec::Seaweed],
        Operation::SineFormula | Operation::ConeConverge | Operation::ThetaCommute | Operation::MorseProbe => {
            vec![e2, tree, SpaceSpec::Seaweed]
        }
        Operation::CollapseSchedule => vec![e2, SpaceSpec::Comb { teeth: 12 }, SpaceSpec::Seaweed],
        Operation::SeaweedTits | Operation::SeaweedPushforward | Operation::SeaweedOracle => vec![SpaceSpec::Seaweed],
        Operation::CutPoint => vec![tree],
        Operation::ScaleLattice | Operation::SpiralSweep | Operation::HausdorffBound => Vec::new(),
    }
}

/// Scenario that runs `name` with its default parameters.
pub fn template(name: &str) -> Option<Scenario> {
    let op: Operation = name.parse().ok()?;
    Some(Scenario {
        schema_version: SCHEMA_VERSION,
        operation: op,
        spaces: spaces(op),
        rays: Vec::new(),
        schedule: None,
        params: ops::default_params(op),
        seed: 7,
        tolerances: Default::default(),
    })
}

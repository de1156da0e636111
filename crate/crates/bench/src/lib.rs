//! Deterministic benchmark fixtures.

use robust_center::generate::{generate_instance, ConstraintParams, FairParams, GenParams, MetricKind};
use robust_center::rational::{int, one};
use robust_center::Instance;

/// A clustered lottery-fair instance under the given constraint.
pub fn fixture(n: usize, constraint: ConstraintParams, seed: u64) -> Instance {
    let params = GenParams {
        metric: MetricKind::Euclidean,
        n,
        t: Some(n - n / 4),
        constraint,
        fair: Some(FairParams { mixture: 3, scale: one() }),
        ..GenParams::default()
    };
    generate_instance(&params, seed).expect("fixture parameters are valid")
}

pub fn cardinality(n: usize) -> Instance {
    fixture(n, ConstraintParams::Cardinality { k: n - 2 }, 11)
}

pub fn knapsack(n: usize) -> Instance {
    fixture(n, ConstraintParams::Knapsack { budget: int(2), weights: None }, 12)
}

pub fn partition(n: usize) -> Instance {
    fixture(n, ConstraintParams::Partition { blocks: 3, cap: 2 }, 13)
}

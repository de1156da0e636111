//! Seeded instance generators: points on a line, rounded Euclidean points,
//! well-separated clusters with far outliers, and tie-heavy {1, 2} metrics.
//! Fair instances get coverage probabilities from a random mixture of
//! feasible center sets, so a lottery exists at a known radius.

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Constraint, Instance};
use crate::matroid::{Matroid, MatroidSpec};
use crate::rational::{self, serde_rational, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    Line,
    Euclidean,
    ClusteredOutliers,
    Adversarial,
}

impl std::str::FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "line" => Ok(MetricKind::Line),
            "euclidean" => Ok(MetricKind::Euclidean),
            "clustered-outliers" => Ok(MetricKind::ClusteredOutliers),
            "adversarial" => Ok(MetricKind::Adversarial),
            _ => Err(Error::InvalidParameter(format!("unknown generator kind {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConstraintParams {
    Cardinality {
        k: usize,
    },
    /// Weights are random multiples of `1/8` in `[0, 1]` unless given.
    Knapsack {
        #[serde(with = "serde_rational")]
        budget: Rational,
        #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_vec")]
        weights: Option<Vec<Rational>>,
    },
    Uniform {
        k: usize,
    },
    /// Random assignment of vertices to `blocks` parts, each with capacity `cap`.
    Partition {
        blocks: usize,
        cap: usize,
    },
    /// Random multigraph without loops on `nodes` nodes, one edge per vertex.
    Graphic {
        nodes: usize,
    },
}

mod opt_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Vec<Rational>>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(v) => serde_rational::vec::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<Rational>>, D::Error> {
        serde_rational::vec::deserialize(d).map(Some)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FairParams {
    /// Number of feasible sets in the mixture.
    pub mixture: usize,
    /// Coverage probabilities are scaled by this factor in `[0, 1]`.
    #[serde(with = "serde_rational")]
    pub scale: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub metric: MetricKind,
    pub n: usize,
    /// Explicit coordinates for `line`; random in `[0, span]` otherwise.
    #[serde(default)]
    pub coords: Option<Vec<i64>>,
    pub dim: usize,
    pub span: i64,
    pub clusters: usize,
    pub outliers: usize,
    pub constraint: ConstraintParams,
    /// Coverage target; defaults to `n - outliers`.
    #[serde(default)]
    pub t: Option<usize>,
    #[serde(default)]
    pub fair: Option<FairParams>,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            metric: MetricKind::Line,
            n: 6,
            coords: None,
            dim: 2,
            span: 20,
            clusters: 2,
            outliers: 0,
            constraint: ConstraintParams::Cardinality { k: 2 },
            t: None,
            fair: None,
        }
    }
}

fn int_matrix(d: Vec<Vec<i64>>) -> Vec<Vec<Rational>> {
    d.into_iter().map(|row| row.into_iter().map(rational::int).collect()).collect()
}

fn line_metric(coords: &[i64]) -> Vec<Vec<Rational>> {
    int_matrix(coords.iter().map(|a| coords.iter().map(|b| (a - b).abs()).collect()).collect())
}

/// Ceiling of the Euclidean distance between integer points. Rounding every
/// distance up keeps the triangle inequality.
fn rounded_euclidean(points: &[Vec<i64>]) -> Vec<Vec<Rational>> {
    let dist = |a: &[i64], b: &[i64]| -> i64 {
        let sq: u64 = a.iter().zip(b).map(|(x, y)| ((x - y) * (x - y)) as u64).sum();
        let r = sq.isqrt();
        (if r * r == sq { r } else { r + 1 }) as i64
    };
    int_matrix(points.iter().map(|a| points.iter().map(|b| dist(a, b)).collect()).collect())
}

pub fn metric(params: &GenParams, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<Rational>>> {
    let n = params.n;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    match params.metric {
        MetricKind::Line => {
            let coords = match &params.coords {
                Some(c) if c.len() != n => {
                    return Err(Error::InvalidParameter(format!("{} coordinates for n = {n}", c.len())));
                }
                Some(c) => c.clone(),
                None => (0..n).map(|_| rng.random_range(0..=params.span)).collect(),
            };
            Ok(line_metric(&coords))
        }
        MetricKind::Euclidean => {
            if params.dim == 0 {
                return Err(Error::InvalidParameter("dim must be positive".into()));
            }
            let pts: Vec<Vec<i64>> = (0..n)
                .map(|_| (0..params.dim).map(|_| rng.random_range(0..=params.span)).collect())
                .collect();
            Ok(rounded_euclidean(&pts))
        }
        MetricKind::ClusteredOutliers => {
            if params.outliers >= n || params.clusters == 0 {
                return Err(Error::InvalidParameter("need at least one cluster and one inlier".into()));
            }
            let inliers = n - params.outliers;
            let spacing = 100 * (params.span + 1);
            let mut pts = Vec::with_capacity(n);
            for v in 0..inliers {
                let base = (v % params.clusters) as i64 * spacing;
                pts.push(vec![base + rng.random_range(0..=params.span), rng.random_range(0..=params.span)]);
            }
            let far = spacing * (params.clusters as i64 + 10);
            for o in 0..params.outliers {
                pts.push(vec![far * (o as i64 + 1), far * (o as i64 + 1)]);
            }
            Ok(rounded_euclidean(&pts))
        }
        MetricKind::Adversarial => {
            let mut d = vec![vec![0i64; n]; n];
            for i in 0..n {
                for j in i + 1..n {
                    let v = rng.random_range(1..=2);
                    d[i][j] = v;
                    d[j][i] = v;
                }
            }
            Ok(int_matrix(d))
        }
    }
}

pub fn random_constraint(c: &ConstraintParams, n: usize, rng: &mut ChaCha8Rng) -> Result<Constraint> {
    let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
    Ok(match c {
        ConstraintParams::Cardinality { k } => {
            if *k == 0 || *k > n {
                return bad("cardinality k must lie in [1, n]");
            }
            Constraint::Cardinality { k: *k }
        }
        ConstraintParams::Knapsack { budget, weights } => {
            let weights = match weights {
                Some(w) => w.clone(),
                None => (0..n).map(|_| rational::ratio(rng.random_range(0..=8), 8)).collect(),
            };
            Constraint::Knapsack {
                weights,
                budget: budget.clone(),
            }
        }
        ConstraintParams::Uniform { k } => Constraint::Matroid(Matroid::new(MatroidSpec::Uniform { k: *k }, n)?),
        ConstraintParams::Partition { blocks, cap } => {
            if *blocks == 0 || *blocks > n {
                return bad("partition needs between 1 and n blocks");
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            let mut parts = vec![Vec::new(); *blocks];
            for (pos, &v) in order.iter().enumerate() {
                let b = if pos < *blocks { pos } else { rng.random_range(0..*blocks) };
                parts[b].push(v);
            }
            for p in &mut parts {
                p.sort_unstable();
            }
            let spec = MatroidSpec::Partition {
                blocks: parts,
                caps: vec![*cap; *blocks],
            };
            Constraint::Matroid(Matroid::new(spec, n)?)
        }
        ConstraintParams::Graphic { nodes } => {
            if *nodes < 2 {
                return bad("graphic matroid needs at least two nodes");
            }
            let edges = (0..n)
                .map(|_| {
                    let a = rng.random_range(0..*nodes);
                    let b = (a + rng.random_range(1..*nodes)) % nodes;
                    [a.min(b), a.max(b)]
                })
                .collect();
            Constraint::Matroid(Matroid::new(MatroidSpec::Graphic { n_nodes: *nodes, edges }, n)?)
        }
    })
}

/// Random maximal feasible set: scan a random order and keep what fits.
pub fn random_maximal_set(inst: &Instance, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..inst.n).collect();
    order.shuffle(rng);
    let mut s = Vec::new();
    for v in order {
        s.push(v);
        if !inst.is_feasible_set(&s) {
            s.pop();
        }
    }
    s.sort_unstable();
    s
}

/// Coverage probabilities of a random mixture of maximal feasible sets at the
/// smallest radius where every set covers `t` clients, scaled by `scale`.
/// Returns the radius alongside `p`.
pub fn mixture_fairness(inst: &Instance, fair: &FairParams, rng: &mut ChaCha8Rng) -> Result<(Rational, Vec<Rational>)> {
    if fair.mixture == 0 || fair.scale < Rational::zero() || fair.scale > rational::one() {
        return Err(Error::InvalidParameter("mixture must be positive and scale in [0, 1]".into()));
    }
    let sets: Vec<Vec<usize>> = (0..fair.mixture).map(|_| random_maximal_set(inst, rng)).collect();
    let weights: Vec<i64> = (0..fair.mixture).map(|_| rng.random_range(1..=4)).collect();
    let total: i64 = weights.iter().sum();
    let radius = inst
        .candidate_radii()
        .into_iter()
        .map(|r| r.value)
        .find(|r| sets.iter().all(|s| inst.coverage(s, r) >= inst.t))
        .ok_or_else(|| Error::InvalidParameter("mixture cannot reach the coverage target".into()))?;
    let mut p = vec![Rational::zero(); inst.n];
    for (s, &w) in sets.iter().zip(&weights) {
        for (pj, c) in p.iter_mut().zip(inst.covered(s, &radius)) {
            if c {
                *pj += rational::ratio(w, total);
            }
        }
    }
    for pj in &mut p {
        *pj = &*pj * &fair.scale;
    }
    Ok((radius, p))
}

/// Builds and validates an instance; identical `(params, seed)` give
/// identical instances.
pub fn generate_instance(params: &GenParams, seed: u64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = metric(params, &mut rng)?;
    let n = params.n;
    let constraint = random_constraint(&params.constraint, n, &mut rng)?;
    let t = params.t.unwrap_or(n - params.outliers.min(n));
    if t > n {
        return Err(Error::InvalidParameter(format!("t = {t} exceeds n = {n}")));
    }
    let mut inst = Instance::new(d, constraint, t, vec![Rational::zero(); n])?;
    if let Some(fair) = &params.fair {
        inst.p = mixture_fairness(&inst, fair, &mut rng)?.1;
    }
    let report = inst.validate(false);
    if !report.is_valid() {
        return Err(Error::InvalidInstance(report.violations.join("; ")));
    }
    Ok(inst)
}

/// Constraint families used by the randomized test suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Cardinality,
    Knapsack,
    Uniform,
    Partition,
    Graphic,
}

/// Small random instance of the given family with random metric kind, `t`
/// and constraint parameters; `fair` adds mixture probabilities.
pub fn random_small(rng: &mut ChaCha8Rng, n: usize, family: Family, fair: bool) -> Instance {
    let metric = [MetricKind::Line, MetricKind::Euclidean, MetricKind::Adversarial][rng.random_range(0..3)];
    let constraint = match family {
        Family::Cardinality => ConstraintParams::Cardinality {
            k: rng.random_range(1..=n),
        },
        Family::Knapsack => ConstraintParams::Knapsack {
            budget: rational::one(),
            weights: None,
        },
        Family::Uniform => ConstraintParams::Uniform {
            k: rng.random_range(1..=n),
        },
        Family::Partition => ConstraintParams::Partition {
            blocks: rng.random_range(1..=n.min(4)),
            cap: rng.random_range(1..=2),
        },
        Family::Graphic => ConstraintParams::Graphic {
            nodes: rng.random_range(2..=n.clamp(2, 5)),
        },
    };
    let params = GenParams {
        metric,
        n,
        span: 12,
        dim: 2,
        constraint,
        t: Some(rng.random_range(0..=n)),
        fair: fair.then(|| FairParams {
            mixture: rng.random_range(1..=3),
            scale: rational::ratio(rng.random_range(1..=4), 4),
        }),
        ..GenParams::default()
    };
    let seed = rng.random();
    generate_instance(&params, seed).expect("random_small parameters are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{exact_lottery_lp, exact_optimal_radius};
    use crate::rational::int;

    #[test]
    fn explicit_line_is_canonical() {
        let params = GenParams {
            n: 4,
            coords: Some(vec![0, 1, 10, 11]),
            t: Some(4),
            ..GenParams::default()
        };
        let inst = generate_instance(&params, 0).unwrap();
        let radii: Vec<Rational> = inst.candidate_radii().into_iter().map(|r| r.value).collect();
        assert_eq!(radii, [0, 1, 9, 10, 11].map(int));
        assert_eq!(inst.constraint, Constraint::Cardinality { k: 2 });
    }

    #[test]
    fn outliers_inflate_the_radius() {
        let mut params = GenParams {
            metric: MetricKind::ClusteredOutliers,
            n: 12,
            span: 3,
            clusters: 2,
            outliers: 2,
            constraint: ConstraintParams::Cardinality { k: 2 },
            ..GenParams::default()
        };
        let robust = generate_instance(&params, 5).unwrap();
        assert_eq!(robust.t, 10);
        params.t = Some(12);
        let full = generate_instance(&params, 5).unwrap();
        let a = exact_optimal_radius(&robust).unwrap().value;
        let b = exact_optimal_radius(&full).unwrap().value;
        assert!(b >= &a * int(5), "{b} vs {a}");
    }

    #[test]
    fn euclidean_is_reproducible() {
        let params = GenParams {
            metric: MetricKind::Euclidean,
            n: 10,
            ..GenParams::default()
        };
        let a = generate_instance(&params, 7).unwrap();
        let b = generate_instance(&params, 7).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert!(a.validate(true).is_valid());
        assert_ne!(a.to_json(), generate_instance(&params, 8).unwrap().to_json());
    }

    #[test]
    fn adversarial_is_a_metric() {
        let params = GenParams {
            metric: MetricKind::Adversarial,
            n: 9,
            ..GenParams::default()
        };
        assert!(generate_instance(&params, 3).unwrap().validate(true).is_valid());
    }

    #[test]
    fn mixture_is_lottery_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for family in [Family::Cardinality, Family::Knapsack, Family::Partition, Family::Graphic] {
            let inst = random_small(&mut rng, 6, family, false);
            let fair = FairParams {
                mixture: 3,
                scale: rational::one(),
            };
            let (r, p) = mixture_fairness(&inst, &fair, &mut rng).unwrap();
            let mut fair_inst = inst.clone();
            fair_inst.p = p;
            assert!(exact_lottery_lp(&fair_inst, &r).unwrap().is_some(), "{family:?}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let params = GenParams {
            constraint: ConstraintParams::Cardinality { k: 0 },
            ..GenParams::default()
        };
        assert!(generate_instance(&params, 0).is_err());
        let params = GenParams {
            coords: Some(vec![1, 2]),
            ..GenParams::default()
        };
        assert!(generate_instance(&params, 0).is_err());
    }
}

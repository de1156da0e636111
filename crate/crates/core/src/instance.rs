//! Problem instances: a finite metric, a center-set constraint, a coverage
//! target and per-client coverage probabilities.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matroid::{Mask, Matroid, MatroidSpec};
use crate::rational::{self, serde_rational, Rational};

#[derive(Clone, Debug, PartialEq)]
pub enum Constraint {
    Cardinality { k: usize },
    Knapsack { weights: Vec<Rational>, budget: Rational },
    Matroid(Matroid),
}

impl Constraint {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Constraint::Cardinality { .. } => "cardinality",
            Constraint::Knapsack { .. } => "knapsack",
            Constraint::Matroid(_) => "matroid",
        }
    }
}

/// A vertex set with `d` an `n x n` distance matrix. Structural shape is
/// checked on construction; metric axioms are reported by [`Instance::validate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct Instance {
    pub n: usize,
    pub d: Vec<Vec<Rational>>,
    pub constraint: Constraint,
    pub t: usize,
    pub p: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Radius {
    #[serde(with = "serde_rational")]
    pub value: Rational,
    pub index: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum RawConstraint {
    Cardinality {
        k: usize,
    },
    Knapsack {
        #[serde(with = "serde_rational::vec")]
        weights: Vec<Rational>,
        #[serde(with = "serde_rational", default = "rational::one")]
        budget: Rational,
    },
    Matroid {
        matroid: MatroidSpec,
    },
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    n: usize,
    #[serde(with = "serde_rational::matrix")]
    d: Vec<Vec<Rational>>,
    constraint: RawConstraint,
    t: usize,
    #[serde(with = "serde_rational::vec", default)]
    p: Vec<Rational>,
}

impl TryFrom<RawInstance> for Instance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Instance> {
        let constraint = match raw.constraint {
            RawConstraint::Cardinality { k } => Constraint::Cardinality { k },
            RawConstraint::Knapsack { weights, budget } => Constraint::Knapsack { weights, budget },
            RawConstraint::Matroid { matroid } => Constraint::Matroid(Matroid::new(matroid, raw.n)?),
        };
        let p = if raw.p.is_empty() {
            vec![Rational::zero(); raw.n]
        } else {
            raw.p
        };
        Instance::new(raw.d, constraint, raw.t, p)
    }
}

impl From<Instance> for RawInstance {
    fn from(inst: Instance) -> RawInstance {
        let constraint = match inst.constraint {
            Constraint::Cardinality { k } => RawConstraint::Cardinality { k },
            Constraint::Knapsack { weights, budget } => RawConstraint::Knapsack { weights, budget },
            Constraint::Matroid(m) => RawConstraint::Matroid {
                matroid: m.spec().clone(),
            },
        };
        RawInstance {
            n: inst.n,
            d: inst.d,
            constraint,
            t: inst.t,
            p: inst.p,
        }
    }
}

impl Instance {
    pub fn new(d: Vec<Vec<Rational>>, constraint: Constraint, t: usize, p: Vec<Rational>) -> Result<Instance> {
        let n = d.len();
        if n == 0 {
            return Err(Error::InvalidInstance("empty vertex set".into()));
        }
        if d.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInstance("distance matrix is not square".into()));
        }
        if p.len() != n {
            return Err(Error::InvalidInstance(format!("p has {} entries, expected {n}", p.len())));
        }
        match &constraint {
            Constraint::Knapsack { weights, .. } if weights.len() != n => {
                return Err(Error::InvalidInstance(format!(
                    "{} weights for {n} vertices",
                    weights.len()
                )));
            }
            Constraint::Matroid(m) if m.ground_size() != n => {
                return Err(Error::InvalidInstance("matroid ground set differs from V".into()));
            }
            _ => {}
        }
        Ok(Instance { n, d, constraint, t, p })
    }

    pub fn from_json(s: &str) -> Result<Instance> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    /// Copy with all coverage probabilities set to zero.
    pub fn robust(&self) -> Instance {
        Instance {
            p: vec![Rational::zero(); self.n],
            ..self.clone()
        }
    }

    pub fn is_fair(&self) -> bool {
        self.p.iter().any(|v| v.is_positive())
    }

    pub fn validate(&self, paranoid: bool) -> ValidationReport {
        let mut v = Vec::new();
        let n = self.n;
        for i in 0..n {
            if !self.d[i][i].is_zero() {
                v.push(format!("d[{i}][{i}] is nonzero"));
            }
            for j in 0..n {
                if self.d[i][j].is_negative() {
                    v.push(format!("d[{i}][{j}] is negative"));
                }
                if j > i && self.d[i][j] != self.d[j][i] {
                    v.push(format!("asymmetry: d[{i}][{j}] != d[{j}][{i}]"));
                }
            }
        }
        'tri: for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.d[i][k] > &self.d[i][j] + &self.d[j][k] {
                        v.push(format!("triangle inequality fails: d[{i}][{k}] > d[{i}][{j}] + d[{j}][{k}]"));
                        if v.len() > 50 {
                            break 'tri;
                        }
                    }
                }
            }
        }
        if self.t > n {
            v.push(format!("t = {} exceeds n = {n}", self.t));
        }
        for (j, pj) in self.p.iter().enumerate() {
            if pj.is_negative() || pj > &Rational::one() {
                v.push(format!("p[{j}] outside [0, 1]"));
            }
        }
        match &self.constraint {
            Constraint::Cardinality { k } => {
                if *k == 0 || *k > n {
                    v.push(format!("k = {k} outside 1..={n}"));
                }
            }
            Constraint::Knapsack { weights, budget } => {
                for (i, w) in weights.iter().enumerate() {
                    if w.is_negative() || w > &Rational::one() {
                        v.push(format!("weight w[{i}] outside [0, 1]"));
                    }
                }
                if !budget.is_positive() {
                    v.push("budget must be positive".into());
                }
            }
            Constraint::Matroid(m) => {
                if paranoid {
                    v.extend(m.check_axioms());
                }
            }
        }
        ValidationReport { violations: v }
    }

    /// Distinct distance values in increasing order (always starting at 0).
    pub fn candidate_radii(&self) -> Vec<Radius> {
        let mut vals: Vec<Rational> = self.d.iter().flatten().cloned().collect();
        vals.push(Rational::zero());
        vals.sort();
        vals.dedup();
        vals.into_iter()
            .enumerate()
            .map(|(index, value)| Radius { value, index })
            .collect()
    }

    pub fn radius_of(&self, value: &Rational) -> Option<Radius> {
        self.candidate_radii().into_iter().find(|r| &r.value == value)
    }

    pub fn ball(&self, j: usize, r: &Rational) -> Vec<usize> {
        (0..self.n).filter(|&i| &self.d[i][j] <= r).collect()
    }

    pub fn dist_to_set(&self, j: usize, set: &[usize]) -> Option<&Rational> {
        set.iter().map(|&i| &self.d[i][j]).min()
    }

    /// `covered[j]` is true when some center is within `r` of `j`.
    pub fn covered(&self, centers: &[usize], r: &Rational) -> Vec<bool> {
        (0..self.n)
            .map(|j| centers.iter().any(|&i| &self.d[i][j] <= r))
            .collect()
    }

    pub fn coverage(&self, centers: &[usize], r: &Rational) -> usize {
        self.covered(centers, r).into_iter().filter(|&c| c).count()
    }

    pub fn weights(&self) -> Option<(&[Rational], &Rational)> {
        match &self.constraint {
            Constraint::Knapsack { weights, budget } => Some((weights, budget)),
            _ => None,
        }
    }

    pub fn matroid(&self) -> Option<&Matroid> {
        match &self.constraint {
            Constraint::Matroid(m) => Some(m),
            _ => None,
        }
    }

    pub fn weight_of(&self, centers: &[usize]) -> Rational {
        match self.weights() {
            Some((w, _)) => rational::sum(centers.iter().map(|&i| &w[i])),
            None => Rational::zero(),
        }
    }

    /// Whether `centers` satisfies the hard constraint exactly.
    pub fn is_feasible_set(&self, centers: &[usize]) -> bool {
        match &self.constraint {
            Constraint::Cardinality { k } => centers.len() <= *k,
            Constraint::Knapsack { budget, .. } => &self.weight_of(centers) <= budget,
            Constraint::Matroid(m) => m.is_independent(set_mask(centers)),
        }
    }

    pub(crate) fn expect_kind(&self, expected: &'static str) -> Result<()> {
        let found = self.constraint.kind_name();
        if found != expected {
            return Err(Error::WrongConstraintKind { expected, found });
        }
        Ok(())
    }
}

pub fn set_mask(set: &[usize]) -> Mask {
    crate::matroid::mask_of(set)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::rational::int;

    pub fn line(coords: &[i64], constraint: Constraint, t: usize) -> Instance {
        let d = coords
            .iter()
            .map(|a| coords.iter().map(|b| int((a - b).abs())).collect())
            .collect();
        let n = coords.len();
        Instance::new(d, constraint, t, vec![Rational::zero(); n]).unwrap()
    }

    pub fn canonical_line(k: usize, t: usize) -> Instance {
        line(&[0, 1, 10, 11], Constraint::Cardinality { k }, t)
    }
}

//! Randomized center-set samplers and per-draw guarantee checks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::instance::{set_mask, Constraint, Instance};
use crate::rational::{self, serde_rational, Rational};

/// Hard constraint a single draw must satisfy.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum BudgetRule {
    Cardinality { k: usize },
    Weight {
        #[serde(with = "serde_rational")]
        limit: Rational,
    },
    Independent,
    Basis,
    /// A basis together with at most one extra element.
    BasisPlusExtra,
}

/// What every draw (and the draw distribution) promises.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Guarantee {
    #[serde(with = "serde_rational")]
    pub lp_radius: Rational,
    #[serde(with = "serde_rational")]
    pub cover_radius: Rational,
    pub min_coverage: usize,
    pub budget: BudgetRule,
    /// Lower bound on `Pr[j covered within cover_radius]`.
    #[serde(with = "serde_rational::vec")]
    pub fairness: Vec<Rational>,
    /// When set, the fairness bounds are promised only on a set of at least
    /// `(1 - gamma) n` clients.
    #[serde(with = "opt_rational")]
    pub good_set_gamma: Option<Rational>,
}

mod opt_rational {
    use super::*;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(r) => serde_rational::serialize(r, s),
            None => s.serialize_none(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DrawOutcome {
    /// Final center set, sorted.
    pub centers: Vec<usize>,
    /// Element added on top of a basis, when the rule allows one.
    pub extra: Option<usize>,
    /// Centers dropped after rounding to restore the hard constraint.
    pub removed: Vec<usize>,
    pub iterations: usize,
    /// Values whose expectation must equal [`CenterSampler::tracked_initial`].
    #[serde(with = "serde_rational::vec")]
    pub tracked: Vec<Rational>,
}

pub trait CenterSampler: Sync {
    fn name(&self) -> &'static str;
    fn instance(&self) -> &Instance;
    fn guarantee(&self) -> &Guarantee;
    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<DrawOutcome>;

    /// Expected values of [`DrawOutcome::tracked`].
    fn tracked_initial(&self) -> Vec<Rational> {
        Vec::new()
    }

    /// Whether the tracked quantities may only drift upward in expectation
    /// (lower one-sided test) rather than being exact martingales.
    fn tracked_one_sided(&self) -> bool {
        false
    }

    fn is_deterministic(&self) -> bool {
        false
    }

    /// Upper bound on the rounding loop iterations of one draw.
    fn iteration_limit(&self) -> usize {
        self.instance().n
    }
}

/// Independent stream for draw `index` under `seed`.
pub fn draw_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Per-draw guarantee violations (empty when the draw is clean).
pub fn check_draw(inst: &Instance, g: &Guarantee, out: &DrawOutcome, iteration_limit: usize) -> Vec<String> {
    let mut v = Vec::new();
    let s = &out.centers;
    let covered = inst.coverage(s, &g.cover_radius);
    if covered < g.min_coverage {
        v.push(format!("covers {covered} clients, needs {}", g.min_coverage));
    }
    match &g.budget {
        BudgetRule::Cardinality { k } => {
            if s.len() > *k {
                v.push(format!("{} centers exceed k = {k}", s.len()));
            }
        }
        BudgetRule::Weight { limit } => {
            let w = inst.weight_of(s);
            if &w > limit {
                v.push(format!(
                    "weight {} exceeds {}",
                    rational::format(&w),
                    rational::format(limit)
                ));
            }
        }
        BudgetRule::Independent => {
            if !inst.is_feasible_set(s) {
                v.push("center set is not independent".into());
            }
        }
        BudgetRule::Basis | BudgetRule::BasisPlusExtra => {
            if let Constraint::Matroid(m) = &inst.constraint {
                let mask = set_mask(s);
                let basis_part = match (g.budget == BudgetRule::BasisPlusExtra, out.extra) {
                    (true, Some(e)) if s.contains(&e) => mask & !(1 << e),
                    _ => mask,
                };
                if !m.is_basis(basis_part) {
                    v.push("center set is not a basis (plus allowed extra)".into());
                }
                if g.budget == BudgetRule::Basis && out.extra.is_some() {
                    v.push("extra element present".into());
                }
            } else {
                v.push("basis rule on a non-matroid instance".into());
            }
        }
    }
    let mut sorted = s.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != s.len() {
        v.push("duplicate centers".into());
    }
    if out.iterations > iteration_limit {
        v.push(format!("{} rounding iterations exceed {iteration_limit}", out.iterations));
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::canonical_line;
    use crate::rational::int;
    use rand::RngCore;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = draw_rng(7, 3).next_u64();
        assert_eq!(a, draw_rng(7, 3).next_u64());
        assert_ne!(a, draw_rng(7, 4).next_u64());
    }

    #[test]
    fn draw_checks() {
        let inst = canonical_line(2, 4);
        let g = Guarantee {
            lp_radius: int(1),
            cover_radius: int(2),
            min_coverage: 4,
            budget: BudgetRule::Cardinality { k: 2 },
            fairness: vec![int(0); 4],
            good_set_gamma: None,
        };
        let good = DrawOutcome {
            centers: vec![0, 2],
            ..Default::default()
        };
        assert!(check_draw(&inst, &g, &good, 4).is_empty());
        let bad = DrawOutcome {
            centers: vec![0, 1, 2],
            ..Default::default()
        };
        assert_eq!(check_draw(&inst, &g, &bad, 4).len(), 1);
        let short = DrawOutcome {
            centers: vec![0],
            ..Default::default()
        };
        assert_eq!(check_draw(&inst, &g, &short, 4).len(), 1);
    }
}

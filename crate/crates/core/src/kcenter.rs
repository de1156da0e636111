//! Robust k-center by filtering and top-k selection, and its fair variant by
//! dependent rounding of the scaled cluster masses.

use num_traits::{One, Signed, Zero};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invariant, Error, Result};
use crate::filtering::{rfilter, FilterOutput};
use crate::instance::{Instance, Radius};
use crate::lp::relax::bound_relaxation;
use crate::lp::{null_direction, scaling_factors};
use crate::oracle::LotterySampler;
use crate::rational::{self, serde_rational, Rational};
use crate::sampler::{BudgetRule, CenterSampler, DrawOutcome, Guarantee};

/// Center set `centers`, the relaxation radius and the clients within
/// `cover_radius` of the centers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CenterSolution {
    pub centers: Vec<usize>,
    pub radius: Radius,
    #[serde(with = "serde_rational")]
    pub cover_radius: Rational,
    pub covered: Vec<usize>,
}

pub type KCenterSolution = CenterSolution;

impl CenterSolution {
    pub fn new(inst: &Instance, mut centers: Vec<usize>, radius: Radius, cover_radius: Rational) -> Self {
        centers.sort_unstable();
        let covered = inst
            .covered(&centers, &cover_radius)
            .into_iter()
            .enumerate()
            .filter_map(|(j, c)| c.then_some(j))
            .collect();
        CenterSolution {
            centers,
            radius,
            cover_radius,
            covered,
        }
    }
}

fn cardinality(inst: &Instance) -> Result<usize> {
    inst.expect_kind("cardinality")?;
    match inst.constraint {
        crate::Constraint::Cardinality { k } => Ok(k),
        _ => unreachable!(),
    }
}

/// Opens the `k` selected cluster centers with the most absorbed clients at
/// the smallest feasible radius `R`; at least `t` clients lie within `2R`.
/// Coverage probabilities are ignored.
pub fn solve_rkcenter(inst: &Instance) -> Result<KCenterSolution> {
    solve_rkcenter_at(inst, None)
}

pub fn solve_rkcenter_at(inst: &Instance, radius: Option<&Rational>) -> Result<KCenterSolution> {
    let k = cardinality(inst)?;
    if inst.t > inst.n {
        return Err(Error::NoFeasibleRadius);
    }
    let robust = inst.robust();
    let (r, sol) = bound_relaxation(&robust, false, radius)?;
    let f = rfilter(&sol);
    let mut order: Vec<usize> = (0..f.centers.len()).collect();
    order.sort_by(|&a, &b| f.counts[b].cmp(&f.counts[a]).then(f.centers[a].cmp(&f.centers[b])));
    let centers: Vec<usize> = order.into_iter().take(k).map(|p| f.centers[p]).collect();
    let absorbed: usize = centers.iter().map(|&c| f.count_of(c).unwrap_or(0)).sum();
    invariant!(absorbed >= inst.t, "top-k clusters absorb {absorbed} < t clients");
    let cover = &r.value * rational::int(2);
    let out = CenterSolution::new(inst, centers, r, cover);
    invariant!(out.covered.len() >= inst.t, "only {} clients within 2R", out.covered.len());
    Ok(out)
}

/// Fair robust k-center sampler bound to the smallest radius `R` at which the
/// fair relaxation is feasible.
pub struct FrkCenterSampler {
    inst: Instance,
    guarantee: Guarantee,
    mode: Mode,
}

enum Mode {
    Rounding(Rounding),
    /// `k * eps < 2`: draws from the exact optimal lottery instead.
    Enumerated(LotterySampler),
}

struct Rounding {
    filter: FilterOutput,
    /// `c_i` for the selected centers, in selection order.
    c: Vec<Rational>,
    initial: Vec<Rational>,
}

impl FrkCenterSampler {
    pub fn filter(&self) -> Option<&FilterOutput> {
        match &self.mode {
            Mode::Rounding(r) => Some(&r.filter),
            Mode::Enumerated(_) => None,
        }
    }

    pub fn is_enumerated(&self) -> bool {
        matches!(self.mode, Mode::Enumerated(_))
    }
}

pub fn solve_frkcenter(inst: &Instance, eps: &Rational) -> Result<FrkCenterSampler> {
    solve_frkcenter_at(inst, eps, None)
}

pub fn solve_frkcenter_at(inst: &Instance, eps: &Rational, radius: Option<&Rational>) -> Result<FrkCenterSampler> {
    let k = cardinality(inst)?;
    if !eps.is_positive() || eps >= &Rational::one() {
        return Err(Error::InvalidParameter("eps must lie in (0, 1)".into()));
    }
    if rational::int(k as i64) * eps < rational::int(2) {
        let lottery = LotterySampler::optimal(inst)?;
        return Ok(FrkCenterSampler {
            inst: inst.clone(),
            guarantee: lottery.guarantee().clone(),
            mode: Mode::Enumerated(lottery),
        });
    }
    let (r, sol) = bound_relaxation(inst, true, radius)?;
    let filter = rfilter(&sol);
    let scale = Rational::one() - eps;
    let c = filter.counts.iter().map(|&c| rational::int(c as i64)).collect();
    let initial = filter.centers.iter().map(|&j| &sol.s[j] * &scale).collect();
    let coverage = rational::ceil_usize(&(&scale * rational::int(inst.t as i64)));
    let guarantee = Guarantee {
        cover_radius: &r.value * rational::int(2),
        lp_radius: r.value,
        min_coverage: coverage,
        budget: BudgetRule::Cardinality { k },
        fairness: inst.p.iter().map(|p| p * &scale).collect(),
        good_set_gamma: None,
    };
    Ok(FrkCenterSampler {
        inst: inst.clone(),
        guarantee,
        mode: Mode::Rounding(Rounding { filter, c, initial }),
    })
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

impl Rounding {
    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<DrawOutcome> {
        let mut y = self.initial.clone();
        let total = rational::sum(&y);
        let value = dot(&self.c, &y);
        let mut iterations = 0;
        loop {
            let free: Vec<usize> = (0..y.len()).filter(|&i| rational::is_fractional(&y[i])).collect();
            if free.len() < 3 {
                break;
            }
            iterations += 1;
            let delta = null_direction(&self.c, &free)?;
            let (a, b) = scaling_factors(&y, &delta)?;
            let step = if rational::bernoulli(rng, &(&b / (&a + &b))) { a } else { -b };
            for (yi, di) in y.iter_mut().zip(&delta) {
                *yi += di * &step;
            }
            invariant!(rational::sum(&y) == total, "total mass changed during rounding");
            invariant!(dot(&self.c, &y) == value, "weighted mass changed during rounding");
        }
        let mut centers: Vec<usize> = (0..y.len())
            .filter(|&i| y[i].is_positive())
            .map(|i| self.filter.centers[i])
            .collect();
        centers.sort_unstable();
        Ok(DrawOutcome {
            centers,
            iterations,
            tracked: y,
            ..Default::default()
        })
    }
}

impl CenterSampler for FrkCenterSampler {
    fn name(&self) -> &'static str {
        match self.mode {
            Mode::Rounding(_) => "fair-kcenter",
            Mode::Enumerated(_) => "fair-kcenter-enumerated",
        }
    }

    fn instance(&self) -> &Instance {
        &self.inst
    }

    fn guarantee(&self) -> &Guarantee {
        &self.guarantee
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<DrawOutcome> {
        match &self.mode {
            Mode::Rounding(r) => r.draw(rng),
            Mode::Enumerated(l) => l.draw(rng),
        }
    }

    fn tracked_initial(&self) -> Vec<Rational> {
        match &self.mode {
            Mode::Rounding(r) => r.initial.clone(),
            Mode::Enumerated(_) => Vec::new(),
        }
    }

    fn is_deterministic(&self) -> bool {
        match &self.mode {
            Mode::Rounding(r) => r.initial.iter().all(rational::is_zero_or_one),
            Mode::Enumerated(l) => l.is_deterministic(),
        }
    }

    fn iteration_limit(&self) -> usize {
        match &self.mode {
            Mode::Rounding(r) => r.initial.len(),
            Mode::Enumerated(_) => 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::{canonical_line, line};
    use crate::oracle::{exact_optimal_radius, monte_carlo_certify};
    use crate::rational::{int, ratio};
    use crate::sampler::{check_draw, draw_rng};
    use crate::Constraint;

    #[test]
    fn canonical_line_radius_one() {
        let inst = canonical_line(2, 4);
        let sol = solve_rkcenter(&inst).unwrap();
        assert_eq!(sol.radius.value, int(1));
        assert_eq!(sol.covered, vec![0, 1, 2, 3]);
        assert_eq!(exact_optimal_radius(&inst).unwrap().value, int(1));
    }

    #[test]
    fn every_vertex_its_own_center() {
        let inst = canonical_line(4, 4);
        let sol = solve_rkcenter(&inst).unwrap();
        assert_eq!(sol.radius.value, int(0));
        assert_eq!(sol.centers, vec![0, 1, 2, 3]);
    }

    #[test]
    fn single_client() {
        let sol = solve_rkcenter(&canonical_line(1, 1)).unwrap();
        assert_eq!(sol.radius.value, int(0));
        assert_eq!(sol.centers.len(), 1);
    }

    #[test]
    fn rejects_t_above_n() {
        let mut inst = canonical_line(1, 4);
        inst.t = 5;
        assert!(matches!(solve_rkcenter(&inst), Err(Error::NoFeasibleRadius)));
    }

    #[test]
    fn wrong_constraint_kind() {
        let inst = line(
            &[0, 1],
            Constraint::Knapsack {
                weights: vec![int(1), int(1)],
                budget: int(1),
            },
            1,
        );
        assert!(matches!(solve_rkcenter(&inst), Err(Error::WrongConstraintKind { .. })));
    }

    #[test]
    fn zero_fairness_gives_robust_draws() {
        let inst = line(&[0, 1, 2, 10, 11, 12, 20, 21], Constraint::Cardinality { k: 4 }, 6);
        let s = solve_frkcenter(&inst, &ratio(1, 2)).unwrap();
        assert!(!s.is_enumerated());
        for i in 0..200 {
            let out = s.draw(&mut draw_rng(1, i)).unwrap();
            assert!(check_draw(&inst, s.guarantee(), &out, s.iteration_limit()).is_empty());
        }
    }

    #[test]
    fn forced_full_coverage() {
        let mut inst = canonical_line(4, 4);
        inst.p = vec![int(1); 4];
        let s = solve_frkcenter(&inst, &ratio(1, 10)).unwrap();
        assert!(s.is_enumerated());
        let cert = monte_carlo_certify(&s, 200, 3);
        assert!(cert.is_clean(), "{:?}", cert.violations);
        assert!(cert.hits.iter().all(|&h| h == 200));
    }

    #[test]
    fn three_half_masses_round_one_coordinate() {
        // three singleton clusters at mass 1/2 with equal counts: a single
        // step makes one coordinate integral and keeps the mean
        let r = Rounding {
            filter: FilterOutput {
                centers: vec![0, 1, 2],
                clusters: vec![vec![0], vec![1], vec![2]],
                counts: vec![1, 1, 1],
                s: vec![ratio(1, 2); 3],
                absorbed_by: vec![Some(0), Some(1), Some(2)],
            },
            c: vec![int(1); 3],
            initial: vec![ratio(1, 2); 3],
        };
        let delta = null_direction(&r.c, &[0, 1, 2]).unwrap();
        let (a, b) = scaling_factors(&r.initial, &delta).unwrap();
        assert_eq!((a.clone(), b.clone()), (ratio(1, 2), ratio(1, 2)));
        let up: Vec<Rational> = r.initial.iter().zip(&delta).map(|(y, d)| y + d * &a).collect();
        let down: Vec<Rational> = r.initial.iter().zip(&delta).map(|(y, d)| y - d * &b).collect();
        for v in [&up, &down] {
            assert_eq!(v.iter().filter(|x| rational::is_zero_or_one(x)).count(), 2);
        }
        let p_up = &b / (&a + &b);
        for i in 0..3 {
            assert_eq!(&up[i] * &p_up + &down[i] * (Rational::one() - &p_up), ratio(1, 2));
        }
        for i in 0..50 {
            let out = r.draw(&mut draw_rng(9, i)).unwrap();
            assert_eq!(out.iterations, 1);
            assert!(out.centers == vec![0, 2] || out.centers == vec![1, 2]);
        }
    }

    #[test]
    fn small_k_delegates_to_enumeration() {
        let mut inst = canonical_line(4, 2);
        inst.p = vec![ratio(1, 2); 4];
        let s = solve_frkcenter(&inst, &ratio(1, 2)).unwrap();
        assert!(!s.is_enumerated());
        let s = solve_frkcenter(&inst, &ratio(1, 10)).unwrap();
        assert!(s.is_enumerated());
        assert!(monte_carlo_certify(&s, 500, 1).is_clean());
    }

    #[test]
    fn rejects_bad_eps() {
        let inst = canonical_line(2, 2);
        assert!(solve_frkcenter(&inst, &int(0)).is_err());
        assert!(solve_frkcenter(&inst, &int(1)).is_err());
    }
}

//! Brute-force ground truth: optimal radii, exact lottery distributions, the
//! red-ball peeling used to build configuration witnesses, and Monte-Carlo
//! certification of samplers.

use num_traits::{One, Signed, Zero};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::rball;
use crate::error::{Error, Result};
use crate::instance::{Constraint, Instance, Radius};
use crate::lp::{self, Cmp, LinearProgram, SolveOptions};
use crate::matroid::{elems_of, Mask};
use crate::rational::{self, Rational};
use crate::sampler::{check_draw, draw_rng, BudgetRule, CenterSampler, DrawOutcome, Guarantee};

/// Largest number of subsets the oracle scans.
pub const SUBSET_CAP: usize = 1 << 14;
/// Largest number of columns in the distribution LP.
pub const COLUMN_CAP: usize = 1 << 12;

/// Feasible center sets that cannot be extended: `min(k, n)`-subsets,
/// budget-maximal sets, or matroid bases. Coverage only grows with the set,
/// so these suffice for every optimization the oracle performs.
pub fn maximal_feasible_sets(inst: &Instance) -> Result<Vec<Mask>> {
    let n = inst.n;
    let count = 1usize.checked_shl(n as u32).unwrap_or(usize::MAX);
    if n >= 31 || count > SUBSET_CAP {
        return Err(Error::TooLarge {
            count,
            cap: SUBSET_CAP,
        });
    }
    let mut out = Vec::new();
    match &inst.constraint {
        Constraint::Cardinality { k } => {
            let size = (*k).min(n) as u32;
            out.extend((0..count as Mask).filter(|m| m.count_ones() == size));
        }
        Constraint::Knapsack { weights, budget } => {
            for m in 0..count as Mask {
                let w = rational::sum(elems_of(m).iter().map(|&i| &weights[i]));
                if &w > budget {
                    continue;
                }
                let maximal = (0..n).all(|e| m & (1 << e) != 0 || &(&w + &weights[e]) > budget);
                if maximal {
                    out.push(m);
                }
            }
        }
        Constraint::Matroid(mat) => {
            out.extend((0..count as Mask).filter(|&m| mat.is_basis(m)));
        }
    }
    Ok(out)
}

fn coverage_masks(inst: &Instance, r: &Rational) -> Vec<Mask> {
    (0..inst.n)
        .map(|i| (0..inst.n).filter(|&j| &inst.d[i][j] <= r).fold(0, |m, j| m | (1 << j)))
        .collect()
}

fn covered_by(cov: &[Mask], set: Mask) -> Mask {
    elems_of(set).into_iter().fold(0, |m, i| m | cov[i])
}

fn robust_optimum(inst: &Instance, sets: &[Mask]) -> Option<Rational> {
    if inst.t == 0 {
        return Some(Rational::zero());
    }
    sets.iter()
        .filter_map(|&s| {
            let centers = elems_of(s);
            let mut dist: Vec<&Rational> = (0..inst.n)
                .filter_map(|j| inst.dist_to_set(j, &centers))
                .collect();
            if dist.len() < inst.t {
                return None;
            }
            dist.sort();
            Some(dist[inst.t - 1].clone())
        })
        .min()
}

/// A distribution over center sets.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lottery {
    #[serde(with = "crate::rational::serde_rational")]
    pub radius: Rational,
    pub support: Vec<LotteryTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LotteryTerm {
    #[serde(with = "crate::rational::serde_rational")]
    pub weight: Rational,
    pub centers: Vec<usize>,
}

impl Lottery {
    /// `Pr[j covered within radius]` for every client.
    pub fn coverage_probability(&self, inst: &Instance) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); inst.n];
        for term in &self.support {
            for (j, c) in inst.covered(&term.centers, &self.radius).into_iter().enumerate() {
                if c {
                    out[j] += &term.weight;
                }
            }
        }
        out
    }
}

/// Distribution over maximal feasible sets covering `t` clients within `r`
/// with `Pr[j covered] >= p_j`, or `None` when none exists.
pub fn exact_lottery_lp(inst: &Instance, r: &Rational) -> Result<Option<Lottery>> {
    let cov = coverage_masks(inst, r);
    let cols: Vec<Mask> = maximal_feasible_sets(inst)?
        .into_iter()
        .filter(|&s| covered_by(&cov, s).count_ones() as usize >= inst.t)
        .collect();
    if cols.is_empty() {
        return Ok(None);
    }
    if cols.len() > COLUMN_CAP {
        return Err(Error::TooLarge {
            count: cols.len(),
            cap: COLUMN_CAP,
        });
    }
    let mut lp = LinearProgram::new();
    for (c, s) in cols.iter().enumerate() {
        lp.add_var(format!("l{c}_{s}"), Rational::zero(), None);
    }
    lp.add_constraint((0..cols.len()).map(|c| (c, Rational::one())).collect(), Cmp::Eq, Rational::one());
    let covers: Vec<Mask> = cols.iter().map(|&s| covered_by(&cov, s)).collect();
    for j in 0..inst.n {
        if inst.p[j].is_positive() {
            let row = (0..cols.len())
                .filter(|&c| covers[c] & (1 << j) != 0)
                .map(|c| (c, Rational::one()))
                .collect();
            lp.add_constraint(row, Cmp::Ge, inst.p[j].clone());
        }
    }
    match lp::solve(&lp, &SolveOptions::default()) {
        Ok(sol) => {
            let support = cols
                .iter()
                .zip(sol.x)
                .filter(|(_, w)| w.is_positive())
                .map(|(&s, weight)| LotteryTerm {
                    weight,
                    centers: elems_of(s),
                })
                .collect();
            Ok(Some(Lottery {
                radius: r.clone(),
                support,
            }))
        }
        Err(Error::Infeasible) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Smallest candidate radius at which some feasible set covers `t` clients
/// (robust instances) or at which the distribution LP is feasible (fair
/// instances).
pub fn exact_optimal_radius(inst: &Instance) -> Result<Radius> {
    let radii = inst.candidate_radii();
    if !inst.is_fair() {
        let sets = maximal_feasible_sets(inst)?;
        let best = robust_optimum(inst, &sets).ok_or(Error::NoFeasibleRadius)?;
        return Ok(inst.radius_of(&best).expect("optimum is a distance"));
    }
    let last = radii.len() - 1;
    if exact_lottery_lp(inst, &radii[last].value)?.is_none() {
        return Err(Error::NoFeasibleRadius);
    }
    let (mut lo, mut hi) = (0, last);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if exact_lottery_lp(inst, &radii[mid].value)?.is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(radii[lo].clone())
}

/// Greedily adds the smallest-index center of `s` whose red ball (relative
/// to the centers added so far) still has at least `eps * n` vertices.
pub fn peel_us(inst: &Instance, s: &[usize], r: &Rational, eps: &Rational) -> Vec<usize> {
    let threshold = eps * rational::int(inst.n as i64);
    let mut sorted = s.to_vec();
    sorted.sort_unstable();
    let mut u: Vec<usize> = Vec::new();
    loop {
        let next = sorted
            .iter()
            .copied()
            .filter(|i| !u.contains(i))
            .find(|&i| rational::int(rball(inst, i, &u, r).len() as i64) >= threshold);
        match next {
            Some(i) => u.push(i),
            None => break,
        }
    }
    u.sort_unstable();
    u
}

/// Draws from an exact lottery distribution.
pub struct LotterySampler {
    inst: Instance,
    guarantee: Guarantee,
    lottery: Lottery,
}

impl LotterySampler {
    pub fn new(inst: &Instance, lottery: Lottery) -> LotterySampler {
        let budget = match &inst.constraint {
            Constraint::Cardinality { k } => BudgetRule::Cardinality { k: *k },
            Constraint::Knapsack { budget, .. } => BudgetRule::Weight {
                limit: budget.clone(),
            },
            Constraint::Matroid(_) => BudgetRule::Basis,
        };
        let guarantee = Guarantee {
            lp_radius: lottery.radius.clone(),
            cover_radius: lottery.radius.clone(),
            min_coverage: inst.t,
            budget,
            fairness: inst.p.clone(),
            good_set_gamma: None,
        };
        LotterySampler {
            inst: inst.clone(),
            guarantee,
            lottery,
        }
    }

    /// Distribution at the optimal lottery radius.
    pub fn optimal(inst: &Instance) -> Result<LotterySampler> {
        let r = exact_optimal_radius(inst)?;
        let lottery = exact_lottery_lp(inst, &r.value)?.ok_or(Error::NoFeasibleRadius)?;
        Ok(LotterySampler::new(inst, lottery))
    }

    pub fn lottery(&self) -> &Lottery {
        &self.lottery
    }
}

impl CenterSampler for LotterySampler {
    fn name(&self) -> &'static str {
        "exact-lottery"
    }

    fn instance(&self) -> &Instance {
        &self.inst
    }

    fn guarantee(&self) -> &Guarantee {
        &self.guarantee
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<DrawOutcome> {
        let weights: Vec<Rational> = self.lottery.support.iter().map(|t| t.weight.clone()).collect();
        let pick = rational::choose_weighted(rng, &weights);
        Ok(DrawOutcome {
            centers: self.lottery.support[pick].centers.clone(),
            ..Default::default()
        })
    }

    fn is_deterministic(&self) -> bool {
        self.lottery.support.len() == 1
    }
}

const Z: f64 = 1.96;

/// Wilson score interval at 95% for `hits` successes out of `n`.
pub fn wilson_interval(hits: usize, n: usize) -> (f64, f64) {
    let n = n as f64;
    let p = hits as f64 / n;
    let denom = 1.0 + Z * Z / n;
    let center = (p + Z * Z / (2.0 * n)) / denom;
    let half = Z / denom * (p * (1.0 - p) / n + Z * Z / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Martingale tolerance for quantities in `[0, 1]` averaged over `n` draws.
pub fn martingale_tolerance(n: usize) -> f64 {
    4.0 * (0.25 / n as f64).sqrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct LotteryCertificate {
    pub sampler: String,
    pub samples: usize,
    pub seed: u64,
    pub guarantee: Guarantee,
    pub hits: Vec<usize>,
    pub frequency: Vec<f64>,
    pub wilson_low: Vec<f64>,
    pub wilson_high: Vec<f64>,
    /// Half-width of the Wilson interval.
    pub margin: Vec<f64>,
    pub min_coverage_seen: usize,
    pub max_iterations_seen: usize,
    pub draws_with_extra: usize,
    pub violation_count: usize,
    pub violations: Vec<String>,
    pub tracked_initial: Vec<f64>,
    pub tracked_mean: Vec<f64>,
    pub tracked_tolerance: f64,
    pub tracked_one_sided: bool,
    pub martingale_failures: Vec<usize>,
    /// Clients whose frequency is below `bound - 3 * margin`.
    pub fairness_failures: Vec<usize>,
    pub good_set_size: usize,
    pub good_set_required: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub draws: Vec<DrawOutcome>,
}

impl LotteryCertificate {
    pub fn is_clean(&self) -> bool {
        self.violation_count == 0 && self.martingale_failures.is_empty() && self.good_set_size >= self.good_set_required
    }
}

/// Draws `samples` outcomes (draw `i` uses stream `i` of `seed`), checks each
/// against the sampler's guarantee and aggregates coverage frequencies.
pub fn monte_carlo_certify(sampler: &dyn CenterSampler, samples: usize, seed: u64) -> LotteryCertificate {
    monte_carlo_certify_keeping(sampler, samples, seed, 0)
}

/// As [`monte_carlo_certify`], also recording the first `keep` draws.
pub fn monte_carlo_certify_keeping(sampler: &dyn CenterSampler, samples: usize, seed: u64, keep: usize) -> LotteryCertificate {
    let inst = sampler.instance();
    let g = sampler.guarantee();
    let n = inst.n;
    let limit = sampler.iteration_limit();
    let results: Vec<(std::result::Result<DrawOutcome, String>, Vec<String>)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = draw_rng(seed, i as u64);
            match sampler.draw(&mut rng) {
                Ok(out) => {
                    let v = check_draw(inst, g, &out, limit);
                    (Ok(out), v)
                }
                Err(e) => (Err(e.to_string()), vec![]),
            }
        })
        .collect();

    let initial = sampler.tracked_initial();
    let mut hits = vec![0usize; n];
    let mut tracked_sum = vec![0f64; initial.len()];
    let mut tracked_count = 0usize;
    let mut violations = Vec::new();
    let mut violation_count = 0;
    let mut min_cov = usize::MAX;
    let mut max_iter = 0;
    let mut with_extra = 0;
    let mut draws = Vec::new();
    for (i, (res, v)) in results.into_iter().enumerate() {
        match res {
            Err(e) => {
                violation_count += 1;
                if violations.len() < 20 {
                    violations.push(format!("draw {i}: error: {e}"));
                }
            }
            Ok(out) => {
                let covered = inst.covered(&out.centers, &g.cover_radius);
                min_cov = min_cov.min(covered.iter().filter(|&&c| c).count());
                for (h, c) in hits.iter_mut().zip(covered) {
                    *h += c as usize;
                }
                max_iter = max_iter.max(out.iterations);
                with_extra += out.extra.is_some() as usize;
                if out.tracked.len() == tracked_sum.len() {
                    for (s, t) in tracked_sum.iter_mut().zip(&out.tracked) {
                        *s += rational::to_f64(t);
                    }
                    tracked_count += 1;
                }
                if !v.is_empty() {
                    violation_count += 1;
                    if violations.len() < 20 {
                        violations.push(format!("draw {i}: {}", v.join("; ")));
                    }
                }
                if draws.len() < keep {
                    draws.push(out);
                }
            }
        }
    }
    let deterministic = sampler.is_deterministic();
    let frequency: Vec<f64> = hits.iter().map(|&h| h as f64 / samples as f64).collect();
    let (wilson_low, wilson_high): (Vec<f64>, Vec<f64>) = hits
        .iter()
        .zip(&frequency)
        .map(|(&h, &f)| if deterministic { (f, f) } else { wilson_interval(h, samples) })
        .unzip();
    let margin: Vec<f64> = wilson_low.iter().zip(&wilson_high).map(|(l, h)| (h - l) / 2.0).collect();
    let fairness_failures: Vec<usize> = (0..n)
        .filter(|&j| frequency[j] < rational::to_f64(&g.fairness[j]) - 3.0 * margin[j])
        .collect();
    let good_set_required = match &g.good_set_gamma {
        Some(gamma) => {
            let need = (Rational::one() - gamma) * rational::int(n as i64);
            rational::ceil_usize(&need)
        }
        None => n,
    };
    let tol = martingale_tolerance(tracked_count.max(1));
    let one_sided = sampler.tracked_one_sided();
    let tracked_initial: Vec<f64> = initial.iter().map(rational::to_f64).collect();
    let tracked_mean: Vec<f64> = tracked_sum.iter().map(|s| s / tracked_count.max(1) as f64).collect();
    let martingale_failures = tracked_initial
        .iter()
        .zip(&tracked_mean)
        .enumerate()
        .filter(|(_, (a, m))| if one_sided { **m < **a - tol } else { (**m - **a).abs() > tol })
        .map(|(i, _)| i)
        .collect();
    LotteryCertificate {
        sampler: sampler.name().to_string(),
        samples,
        seed,
        guarantee: g.clone(),
        hits,
        frequency,
        wilson_low,
        wilson_high,
        margin,
        min_coverage_seen: if min_cov == usize::MAX { 0 } else { min_cov },
        max_iterations_seen: max_iter,
        draws_with_extra: with_extra,
        violation_count,
        violations,
        tracked_initial,
        tracked_mean,
        tracked_tolerance: tol,
        tracked_one_sided: one_sided,
        martingale_failures,
        good_set_size: n - fairness_failures.len(),
        good_set_required,
        fairness_failures,
        draws,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::{canonical_line, line};
    use crate::matroid::{Matroid, MatroidSpec};
    use crate::rational::{int, ratio};

    #[test]
    fn optimal_radius_examples() {
        assert_eq!(exact_optimal_radius(&canonical_line(2, 4)).unwrap().value, int(1));
        assert_eq!(exact_optimal_radius(&canonical_line(2, 0)).unwrap().value, int(0));
        assert_eq!(exact_optimal_radius(&canonical_line(1, 4)).unwrap().value, int(10));
    }

    #[test]
    fn matroid_optimum_on_line() {
        let m = Matroid::new(MatroidSpec::Uniform { k: 1 }, 4).unwrap();
        let inst = line(&[0, 1, 10, 11], Constraint::Matroid(m), 2);
        assert_eq!(exact_optimal_radius(&inst).unwrap().value, int(1));
    }

    #[test]
    fn robust_lottery_is_a_single_set() {
        let inst = canonical_line(2, 4);
        let lot = exact_lottery_lp(&inst, &int(1)).unwrap().unwrap();
        assert_eq!(lot.support.len(), 1);
        assert!(exact_lottery_lp(&inst, &int(0)).unwrap().is_none());
    }

    #[test]
    fn symmetric_halves_need_a_coin() {
        // two far groups, one center, each group wants probability 1/2
        let mut inst = canonical_line(1, 2);
        inst.p = vec![ratio(1, 2); 4];
        let lot = exact_lottery_lp(&inst, &int(1)).unwrap().unwrap();
        let probs = lot.coverage_probability(&inst);
        assert!(probs.iter().all(|p| p >= &ratio(1, 2)));
        assert_eq!(lot.support.len(), 2);
        assert_eq!(exact_optimal_radius(&inst).unwrap().value, int(1));
    }

    #[test]
    fn certain_coverage_without_a_covering_set_is_infeasible() {
        let mut inst = canonical_line(1, 1);
        inst.p = vec![int(1), int(0), int(0), int(1)];
        assert!(exact_lottery_lp(&inst, &int(9)).unwrap().is_none());
    }

    #[test]
    fn peeling_examples() {
        let inst = canonical_line(2, 4);
        assert!(peel_us(&inst, &[0, 2], &int(1), &ratio(3, 2)).is_empty());
        let tiny = ratio(1, 100);
        assert_eq!(peel_us(&inst, &[0, 1, 2, 3], &int(1), &tiny), vec![0, 2]);
        assert_eq!(peel_us(&inst, &[0, 2], &int(1), &tiny), vec![0, 2]);
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let coords: Vec<i64> = (0..15).collect();
        let inst = line(&coords, Constraint::Cardinality { k: 2 }, 3);
        assert!(matches!(maximal_feasible_sets(&inst), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn wilson_interval_contains_estimate() {
        let (lo, hi) = wilson_interval(50, 100);
        assert!(lo < 0.5 && hi > 0.5);
        assert!((hi - lo) / 2.0 < 0.1);
    }

    #[test]
    fn deterministic_sampler_has_zero_width() {
        let inst = canonical_line(2, 4);
        let s = LotterySampler::optimal(&inst).unwrap();
        let cert = monte_carlo_certify(&s, 50, 1);
        assert!(cert.is_clean());
        assert!(cert.frequency.iter().all(|&f| f == 0.0 || f == 1.0));
        assert!(cert.margin.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn coin_sampler_frequencies_are_binomial() {
        let mut inst = canonical_line(1, 2);
        inst.p = vec![ratio(1, 2); 4];
        let s = LotterySampler::optimal(&inst).unwrap();
        let n = 4000;
        let cert = monte_carlo_certify(&s, n, 9);
        let tol = 3.0 * (0.25 / n as f64).sqrt();
        for f in &cert.frequency {
            assert!((f - 0.5).abs() <= tol, "{f}");
        }
        assert!(cert.fairness_failures.is_empty());
    }
}

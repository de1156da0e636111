//! Knapsack center: rounding on the cluster polytope
//! `P' = {z in [0,1]^{V'} : c . z >= t, sum_i w(v_i) z_i <= B}`, where `v_i`
//! is the lightest vertex of cluster `F_i`, and the configuration-LP samplers
//! built on top of it.

use num_traits::{One, Signed, Zero};
use rand_chacha::ChaCha8Rng;

use crate::config::{config_threshold, ConfigKind, ConfigOptions, ConfigSolution};
use crate::error::{invariant, Error, Result};
use crate::filtering::{rfilter, FilterOutput};
use crate::instance::Instance;
use crate::kcenter::CenterSolution;
use crate::lp::relax::bound_relaxation;
use crate::lp::{caratheodory_decompose, extreme_point, Cmp, ConvexTerm, FractionalSolution, LinearProgram};
use crate::rational::{self, Rational};
use crate::sampler::{BudgetRule, CenterSampler, DrawOutcome, Guarantee};

pub use crate::config::rball;

/// Filtered clusters with their representatives and the polytope `P'`.
#[derive(Clone, Debug)]
pub struct ClusterPolytope {
    pub filter: FilterOutput,
    /// `reps[k]` is the lightest vertex of the cluster of `filter.centers[k]`
    /// (ties by index).
    pub reps: Vec<usize>,
    pub lp: LinearProgram,
}

impl ClusterPolytope {
    pub fn new(inst: &Instance, sol: &FractionalSolution) -> Result<ClusterPolytope> {
        let (w, b) = inst.weights().ok_or(Error::WrongConstraintKind {
            expected: "knapsack",
            found: inst.constraint.kind_name(),
        })?;
        let filter = rfilter(sol);
        let reps: Vec<usize> = filter
            .centers
            .iter()
            .map(|&j| {
                *filter.clusters[j]
                    .iter()
                    .min_by(|&&a, &&b| w[a].cmp(&w[b]).then(a.cmp(&b)))
                    .expect("selected clusters are nonempty")
            })
            .collect();
        let mut lp = LinearProgram::new();
        for &j in &filter.centers {
            lp.add_var(format!("z{j}"), Rational::zero(), Some(Rational::one()));
        }
        let m = reps.len();
        lp.add_constraint(
            (0..m).map(|k| (k, rational::int(filter.counts[k] as i64))).collect(),
            Cmp::Ge,
            rational::int(inst.t as i64),
        );
        lp.add_constraint((0..m).map(|k| (k, w[reps[k]].clone())).collect(), Cmp::Le, b.clone());
        Ok(ClusterPolytope { filter, reps, lp })
    }

    /// The cluster masses `s` restricted to the selected centers.
    pub fn mass_point(&self) -> Vec<Rational> {
        self.filter.centers.iter().map(|&j| self.filter.s[j].clone()).collect()
    }

    /// Representatives of the clusters with `z > 0`, sorted.
    pub fn centers_of(&self, z: &[Rational]) -> Vec<usize> {
        let mut out: Vec<usize> = (0..z.len()).filter(|&k| z[k].is_positive()).map(|k| self.reps[k]).collect();
        out.sort_unstable();
        out
    }
}

fn fractional_count(z: &[Rational]) -> usize {
    z.iter().filter(|v| rational::is_fractional(v)).count()
}

fn max_weight(inst: &Instance) -> Rational {
    let (w, _) = inst.weights().expect("knapsack instance");
    w.iter().max().cloned().unwrap_or_else(Rational::zero)
}

/// Smallest radius `R` with a feasible relaxation, rounded through a
/// minimum-weight vertex of `P'`. The result covers `t` clients within `3R`
/// and weighs at most `B + 2 w_max`. Coverage probabilities are ignored.
pub fn solve_rknapcenter(inst: &Instance) -> Result<CenterSolution> {
    solve_rknapcenter_at(inst, None)
}

pub fn solve_rknapcenter_at(inst: &Instance, radius: Option<&Rational>) -> Result<CenterSolution> {
    inst.expect_kind("knapsack")?;
    let robust = inst.robust();
    let (r, sol) = bound_relaxation(&robust, false, radius)?;
    let poly = ClusterPolytope::new(&robust, &sol)?;
    let (w, b) = inst.weights().expect("knapsack instance");
    let objective = poly.reps.iter().enumerate().map(|(k, &v)| (k, -w[v].clone())).collect();
    let z = extreme_point(&poly.lp, objective)?.x;
    invariant!(fractional_count(&z) <= 2, "vertex of P' has {} fractional coordinates", fractional_count(&z));
    let out = CenterSolution::new(inst, poly.centers_of(&z), r.clone(), &r.value * rational::int(3));
    invariant!(out.covered.len() >= inst.t, "only {} clients within 3R", out.covered.len());
    let weight = inst.weight_of(&out.centers);
    invariant!(weight <= b + max_weight(inst) * rational::int(2), "weight exceeds B + 2 w_max");
    Ok(out)
}

/// Decomposition of the cluster masses into vertices of `P'`; a draw picks
/// one vertex and opens the representatives in its support.
#[derive(Clone, Debug)]
pub struct KnapRounding {
    pub poly: ClusterPolytope,
    pub terms: Vec<ConvexTerm>,
}

impl KnapRounding {
    pub fn new(inst: &Instance, sol: &FractionalSolution) -> Result<KnapRounding> {
        let poly = ClusterPolytope::new(inst, sol)?;
        let s = poly.mass_point();
        invariant!(poly.lp.is_feasible_point(&s), "cluster masses lie outside P'");
        let terms = caratheodory_decompose(&poly.lp, &s)?;
        for t in &terms {
            invariant!(fractional_count(&t.point) <= 2, "decomposition vertex with more than two fractional coordinates");
        }
        Ok(KnapRounding { poly, terms })
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let weights: Vec<Rational> = self.terms.iter().map(|t| t.weight.clone()).collect();
        let pick = rational::choose_weighted(rng, &weights);
        self.poly.centers_of(&self.terms[pick].point)
    }

    /// Indicator of each representative being opened, in selection order.
    fn opened(&self, centers: &[usize]) -> Vec<Rational> {
        self.poly
            .reps
            .iter()
            .map(|v| if centers.contains(v) { Rational::one() } else { Rational::zero() })
            .collect()
    }
}

/// Fair knapsack-center sampler without budget correction.
pub struct BasicKnapSampler {
    inst: Instance,
    guarantee: Guarantee,
    rounding: KnapRounding,
}

impl BasicKnapSampler {
    pub fn rounding(&self) -> &KnapRounding {
        &self.rounding
    }
}

pub fn sample_basic_frknapcenter(inst: &Instance) -> Result<BasicKnapSampler> {
    sample_basic_frknapcenter_at(inst, None)
}

pub fn sample_basic_frknapcenter_at(inst: &Instance, radius: Option<&Rational>) -> Result<BasicKnapSampler> {
    inst.expect_kind("knapsack")?;
    let (r, sol) = bound_relaxation(inst, true, radius)?;
    let rounding = KnapRounding::new(inst, &sol)?;
    let (_, b) = inst.weights().expect("knapsack instance");
    let guarantee = Guarantee {
        cover_radius: &r.value * rational::int(3),
        lp_radius: r.value,
        min_coverage: inst.t,
        budget: BudgetRule::Weight {
            limit: b + max_weight(inst) * rational::int(2),
        },
        fairness: inst.p.clone(),
        good_set_gamma: None,
    };
    Ok(BasicKnapSampler {
        inst: inst.clone(),
        guarantee,
        rounding,
    })
}

impl CenterSampler for BasicKnapSampler {
    fn name(&self) -> &'static str {
        "fair-knapcenter-basic"
    }

    fn instance(&self) -> &Instance {
        &self.inst
    }

    fn guarantee(&self) -> &Guarantee {
        &self.guarantee
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<DrawOutcome> {
        let centers = self.rounding.draw(rng);
        Ok(DrawOutcome {
            tracked: self.rounding.opened(&centers),
            centers,
            ..Default::default()
        })
    }

    /// `Pr[v_k opened] >= s_k`.
    fn tracked_initial(&self) -> Vec<Rational> {
        self.rounding.poly.mass_point()
    }

    fn tracked_one_sided(&self) -> bool {
        true
    }

    fn is_deterministic(&self) -> bool {
        self.rounding.terms.len() == 1
    }
}

/// Configuration-LP sampler: draws a guessed set `U` with probability `q_U`
/// and rounds its normalized column through `P'`. With `trim` set, the two
/// heaviest opened centers outside `U` are then dropped.
pub struct ConfigKnapSampler {
    inst: Instance,
    guarantee: Guarantee,
    config: ConfigSolution,
    roundings: Vec<KnapRounding>,
    trim: bool,
}

impl ConfigKnapSampler {
    pub fn config(&self) -> &ConfigSolution {
        &self.config
    }

    fn build(inst: &Instance, config: ConfigSolution, trim: bool, guarantee: Guarantee) -> Result<Self> {
        let roundings = config
            .columns
            .iter()
            .map(|c| KnapRounding::new(inst, &c.solution))
            .collect::<Result<Vec<_>>>()?;
        Ok(ConfigKnapSampler {
            inst: inst.clone(),
            guarantee,
            config,
            roundings,
            trim,
        })
    }
}

fn check_gamma(gamma: &Rational) -> Result<()> {
    if !gamma.is_positive() || gamma > &Rational::one() {
        return Err(Error::InvalidParameter("gamma must lie in (0, 1]".into()));
    }
    Ok(())
}

/// Budget relaxed to `(1 + 2 eps) B`, coverage `t` and fairness `p` at `3R`.
pub fn sample_frknapcenter_eps_budget(inst: &Instance, eps: &Rational, opts: &ConfigOptions) -> Result<ConfigKnapSampler> {
    inst.expect_kind("knapsack")?;
    if !eps.is_positive() {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let config = config_threshold(inst, &ConfigKind::BigVertices { eps: eps.clone() }, opts)?;
    let (_, b) = inst.weights().expect("knapsack instance");
    let r = config.radius.value.clone();
    let guarantee = Guarantee {
        cover_radius: &r * rational::int(3),
        lp_radius: r,
        min_coverage: inst.t,
        budget: BudgetRule::Weight {
            limit: b * (Rational::one() + eps * rational::int(2)),
        },
        fairness: inst.p.clone(),
        good_set_gamma: None,
    };
    ConfigKnapSampler::build(inst, config, false, guarantee)
}

/// Exact budget; coverage `t - ceil(gamma^2 n)` and fairness `p_j - gamma`
/// on a set of at least `(1 - gamma) n` clients, at `3R`.
pub fn sample_frknapcenter_exact_budget(inst: &Instance, gamma: &Rational, opts: &ConfigOptions) -> Result<ConfigKnapSampler> {
    inst.expect_kind("knapsack")?;
    check_gamma(gamma)?;
    let eps = gamma * gamma / rational::int(2);
    let config = config_threshold(inst, &ConfigKind::KnapsackRedBall { eps }, opts)?;
    let (_, b) = inst.weights().expect("knapsack instance");
    let loss = rational::ceil_usize(&(gamma * gamma * rational::int(inst.n as i64)));
    let r = config.radius.value.clone();
    let guarantee = Guarantee {
        cover_radius: &r * rational::int(3),
        lp_radius: r,
        min_coverage: inst.t.saturating_sub(loss),
        budget: BudgetRule::Weight { limit: b.clone() },
        fairness: inst
            .p
            .iter()
            .map(|p| if p > gamma { p - gamma } else { Rational::zero() })
            .collect(),
        good_set_gamma: Some(gamma.clone()),
    };
    ConfigKnapSampler::build(inst, config, true, guarantee)
}

impl CenterSampler for ConfigKnapSampler {
    fn name(&self) -> &'static str {
        if self.trim {
            "fair-knapcenter-exact-budget"
        } else {
            "fair-knapcenter-eps-budget"
        }
    }

    fn instance(&self) -> &Instance {
        &self.inst
    }

    fn guarantee(&self) -> &Guarantee {
        &self.guarantee
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<DrawOutcome> {
        let q: Vec<Rational> = self.config.columns.iter().map(|c| c.q.clone()).collect();
        let c = rational::choose_weighted(rng, &q);
        let u = &self.config.columns[c].u;
        let mut centers = self.roundings[c].draw(rng);
        invariant!(u.iter().all(|i| centers.contains(i)), "guessed set {u:?} not opened");
        let mut removed = Vec::new();
        if self.trim {
            let (w, _) = self.inst.weights().expect("knapsack instance");
            let mut outside: Vec<usize> = centers.iter().copied().filter(|i| !u.contains(i)).collect();
            outside.sort_by(|&a, &b| w[b].cmp(&w[a]).then(a.cmp(&b)));
            removed = outside.into_iter().take(2).collect();
            centers.retain(|i| !removed.contains(i));
            removed.sort_unstable();
        }
        Ok(DrawOutcome {
            centers,
            removed,
            ..Default::default()
        })
    }

    fn is_deterministic(&self) -> bool {
        self.config.columns.len() == 1 && self.roundings[0].terms.len() == 1
    }
}

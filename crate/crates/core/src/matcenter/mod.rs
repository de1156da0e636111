//! Matroid center: a robust 3-approximation by matroid intersection over the
//! filtered clusters, the pseudo fair rounding (basis plus one extra center)
//! and the configuration-LP sampler that returns bases.

pub mod graph;
pub mod rounding;

use num_traits::{One, Signed, Zero};
use rand_chacha::ChaCha8Rng;

use crate::config::{config_threshold, ConfigKind, ConfigOptions, ConfigSolution};
use crate::error::{invariant, Error, Result};
use crate::filtering::rfilter;
use crate::instance::Instance;
use crate::kcenter::CenterSolution;
use crate::lp::relax::{bound_relaxation, MatroidCuts};
use crate::lp::{self, Cmp, LinearProgram, SolveOptions};
use crate::rational::{self, Rational};
use crate::sampler::{BudgetRule, CenterSampler, DrawOutcome, Guarantee};

pub use graph::{Edge, PathKind, PathSpec, RoundingGraph, Side};
pub use rounding::{PseudoOutcome, PseudoRounding, RoundingCase};

/// Smallest radius `R` with a feasible relaxation; the opened set is an
/// integral maximizer of `sum_j c_j z(F_j)` over the independence polytope
/// intersected with `z(F_j) <= 1`. It is independent and covers `t` clients
/// within `3R`. Coverage probabilities are ignored.
pub fn solve_rmatcenter(inst: &Instance) -> Result<CenterSolution> {
    solve_rmatcenter_at(inst, None)
}

pub fn solve_rmatcenter_at(inst: &Instance, radius: Option<&Rational>) -> Result<CenterSolution> {
    inst.expect_kind("matroid")?;
    let m = inst.matroid().expect("matroid instance");
    let robust = inst.robust();
    let (r, sol) = bound_relaxation(&robust, false, radius)?;
    let f = rfilter(&sol);
    let n = inst.n;
    let mut lp = LinearProgram::new();
    let mut var = vec![None; n];
    let mut objective = Vec::new();
    for (k, &j) in f.centers.iter().enumerate() {
        let mut row = Vec::new();
        for &i in &f.clusters[j] {
            let v = lp.add_var(format!("z{i}"), Rational::zero(), Some(Rational::one()));
            var[i] = Some(v);
            row.push((v, Rational::one()));
            objective.push((v, rational::int(f.counts[k] as i64)));
        }
        lp.add_constraint(row, Cmp::Le, Rational::one());
    }
    lp.set_objective(objective);
    let mut cuts = MatroidCuts {
        matroid: m,
        vars: var.clone(),
        fixed: vec![Rational::zero(); n],
        scale: None,
    };
    let opt = lp::solve_with_cuts(&mut lp, &mut cuts, &SolveOptions::default())?;
    invariant!(opt.x.iter().all(rational::is_zero_or_one), "cluster matroid intersection optimum is fractional");
    let total: usize = f.counts.iter().sum();
    invariant!(
        opt.objective >= rational::int(inst.t.min(total) as i64),
        "intersection optimum below t"
    );
    let centers: Vec<usize> = (0..n).filter(|&i| var[i].is_some_and(|v| opt.x[v].is_one())).collect();
    invariant!(m.is_independent(crate::matroid::mask_of(&centers)), "opened set is dependent");
    let out = CenterSolution::new(inst, centers, r.clone(), &r.value * rational::int(3));
    invariant!(out.covered.len() >= inst.t, "only {} clients within 3R", out.covered.len());
    Ok(out)
}

/// Pseudo fair rounding sampler: a basis plus at most one extra center per
/// draw, coverage `t` and fairness `p` at `3R`.
pub struct PseudoMatSampler {
    inst: Instance,
    guarantee: Guarantee,
    rounding: PseudoRounding,
}

impl PseudoMatSampler {
    pub fn rounding(&self) -> &PseudoRounding {
        &self.rounding
    }
}

pub fn pseudo_round(inst: &Instance) -> Result<PseudoMatSampler> {
    pseudo_round_at(inst, None)
}

pub fn pseudo_round_at(inst: &Instance, radius: Option<&Rational>) -> Result<PseudoMatSampler> {
    inst.expect_kind("matroid")?;
    let (r, sol) = bound_relaxation(inst, true, radius)?;
    let rounding = PseudoRounding::new(inst, &sol)?;
    let guarantee = Guarantee {
        cover_radius: &r.value * rational::int(3),
        lp_radius: r.value,
        min_coverage: inst.t,
        budget: BudgetRule::BasisPlusExtra,
        fairness: inst.p.clone(),
        good_set_gamma: None,
    };
    Ok(PseudoMatSampler {
        inst: inst.clone(),
        guarantee,
        rounding,
    })
}

impl CenterSampler for PseudoMatSampler {
    fn name(&self) -> &'static str {
        "fair-matcenter-pseudo"
    }

    fn instance(&self) -> &Instance {
        &self.inst
    }

    fn guarantee(&self) -> &Guarantee {
        &self.guarantee
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<DrawOutcome> {
        let out = self.rounding.draw(rng)?;
        Ok(DrawOutcome {
            centers: out.centers,
            extra: out.extra,
            removed: Vec::new(),
            iterations: out.iterations,
            tracked: out.cluster_opened,
        })
    }

    /// Cluster masses `y'(F_k)`; each cluster is opened at least that often.
    fn tracked_initial(&self) -> Vec<Rational> {
        self.rounding.cluster_masses(&self.rounding.initial)
    }

    fn tracked_one_sided(&self) -> bool {
        true
    }

    fn is_deterministic(&self) -> bool {
        self.rounding.initial.iter().all(rational::is_zero_or_one)
    }
}

/// Configuration-LP sampler returning a basis on every draw; coverage
/// `t - ceil(gamma^2 n)` and fairness `p_j - gamma` on a set of at least
/// `(1 - gamma) n` clients, at `3R`.
pub struct ExactMatSampler {
    inst: Instance,
    guarantee: Guarantee,
    config: ConfigSolution,
    roundings: Vec<PseudoRounding>,
}

impl ExactMatSampler {
    pub fn config(&self) -> &ConfigSolution {
        &self.config
    }
}

pub fn sample_frmatcenter_exact(inst: &Instance, gamma: &Rational, opts: &ConfigOptions) -> Result<ExactMatSampler> {
    inst.expect_kind("matroid")?;
    if !gamma.is_positive() || gamma > &Rational::one() {
        return Err(Error::InvalidParameter("gamma must lie in (0, 1]".into()));
    }
    let eps = gamma * gamma;
    let config = config_threshold(inst, &ConfigKind::MatroidRedBall { eps }, opts)?;
    let roundings = config
        .columns
        .iter()
        .map(|c| PseudoRounding::new(inst, &c.solution))
        .collect::<Result<Vec<_>>>()?;
    let loss = rational::ceil_usize(&(gamma * gamma * rational::int(inst.n as i64)));
    let r = config.radius.value.clone();
    let guarantee = Guarantee {
        cover_radius: &r * rational::int(3),
        lp_radius: r,
        min_coverage: inst.t.saturating_sub(loss),
        budget: BudgetRule::Basis,
        fairness: inst
            .p
            .iter()
            .map(|p| if p > gamma { p - gamma } else { Rational::zero() })
            .collect(),
        good_set_gamma: Some(gamma.clone()),
    };
    Ok(ExactMatSampler {
        inst: inst.clone(),
        guarantee,
        config,
        roundings,
    })
}

impl CenterSampler for ExactMatSampler {
    fn name(&self) -> &'static str {
        "fair-matcenter-exact"
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
        let out = self.roundings[c].draw(rng)?;
        let mut centers = out.centers;
        let removed: Vec<usize> = out.extra.into_iter().collect();
        centers.retain(|i| !removed.contains(i));
        invariant!(u.iter().all(|i| centers.contains(i)), "guessed set {u:?} not opened");
        Ok(DrawOutcome {
            centers,
            extra: None,
            removed,
            iterations: out.iterations,
            tracked: Vec::new(),
        })
    }

    fn is_deterministic(&self) -> bool {
        self.config.columns.len() == 1 && self.roundings[0].initial.iter().all(rational::is_zero_or_one)
    }
}

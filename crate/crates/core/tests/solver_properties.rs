//! Property tests over random small instances: metric queries, filtering,
//! relaxation thresholds, red-ball peeling and per-draw sampler guarantees.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use robust_center::config::ConfigOptions;
use robust_center::filtering::rfilter;
use robust_center::generate::{random_small, Family};
use robust_center::lp::relax::{is_relaxation_feasible, lp_threshold};
use robust_center::oracle::{exact_optimal_radius, peel_us};
use robust_center::rational::{self, int, ratio};
use robust_center::sampler::{check_draw, draw_rng, CenterSampler};
use robust_center::{
    config, kcenter, knapcenter, matcenter, Constraint, Instance, Rational,
};

const FAMILIES: [Family; 5] = [Family::Cardinality, Family::Knapsack, Family::Uniform, Family::Partition, Family::Graphic];

fn inst(seed: u64, n: usize, family: usize, fair: bool) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_small(&mut rng, n, FAMILIES[family], fair)
}

fn assert_clean_draws(s: &dyn CenterSampler, seed: u64) -> Result<(), TestCaseError> {
    for i in 0..8 {
        let out = s.draw(&mut draw_rng(seed, i)).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let v = check_draw(s.instance(), s.guarantee(), &out, s.iteration_limit());
        prop_assert!(v.is_empty(), "{}: {:?}", s.name(), v);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn balls_and_radii(seed in any::<u64>(), n in 2usize..10, family in 0usize..5) {
        let inst = inst(seed, n, family, false);
        let radii = inst.candidate_radii();
        prop_assert!(radii.windows(2).all(|w| w[0].value < w[1].value));
        prop_assert!(radii[0].value == rational::zero());
        for (k, r) in radii.iter().enumerate() {
            prop_assert_eq!(r.index, k);
        }
        for row in &inst.d {
            for v in row {
                prop_assert!(radii.iter().any(|r| &r.value == v));
            }
        }
        for j in 0..n {
            let mut prev = Vec::new();
            for r in &radii {
                let b = inst.ball(j, &r.value);
                prop_assert!(b.contains(&j));
                prop_assert!(prev.iter().all(|i| b.contains(i)));
                prev = b;
            }
            prop_assert_eq!(prev.len(), n);
        }
        prop_assert!(inst.validate(true).is_valid());
        prop_assert_eq!(Instance::from_json(&inst.to_json()).unwrap(), inst);
    }

    #[test]
    fn filtering_invariants(seed in any::<u64>(), n in 2usize..9, family in 0usize..5, fair in any::<bool>()) {
        let inst = inst(seed, n, family, fair);
        let (_, sol) = lp_threshold(&inst, fair).unwrap();
        prop_assert!(sol.violations(&inst, fair).is_empty());
        let f = rfilter(&sol);
        prop_assert!(f.violations().is_empty(), "{:?}", f.violations());
        let weighted: Rational = f.centers.iter().zip(&f.counts).map(|(&c, &k)| &f.s[c] * int(k as i64)).sum();
        let total: Rational = f.s.iter().sum();
        prop_assert!(weighted >= total);
        prop_assert!(total >= int(inst.t as i64));
        let nonempty = f.clusters.iter().filter(|c| !c.is_empty()).count();
        prop_assert_eq!(f.counts.iter().sum::<usize>(), nonempty);
    }

    #[test]
    fn feasible_radii_form_a_suffix_below_the_optimum(seed in any::<u64>(), n in 2usize..8, family in 0usize..5, fair in any::<bool>()) {
        let inst = inst(seed, n, family, fair);
        let feasible: Vec<bool> = inst
            .candidate_radii()
            .iter()
            .map(|r| is_relaxation_feasible(&inst, &r.value, fair).unwrap())
            .collect();
        let first = feasible.iter().position(|&f| f).expect("largest radius is feasible for achievable targets");
        prop_assert!(feasible[first..].iter().all(|&f| f));
        let threshold = lp_threshold(&inst, fair).unwrap().0;
        prop_assert_eq!(threshold.index, first);
        let target = if fair { inst.clone() } else { inst.robust() };
        prop_assert!(threshold.value <= exact_optimal_radius(&target).unwrap().value);
    }

    #[test]
    fn peeling_is_bounded_and_exhaustive(seed in any::<u64>(), n in 2usize..10, family in 0usize..5, eps in 1i64..=8) {
        let inst = inst(seed, n, family, false);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let s = robust_center::generate::random_maximal_set(&inst, &mut rng);
        let eps = ratio(eps, 8);
        let radii = inst.candidate_radii();
        let r = &radii[(seed as usize) % radii.len()].value;
        let u = peel_us(&inst, &s, r, &eps);
        prop_assert!(u.len() <= rational::ceil_usize(&(rational::one() / &eps)));
        prop_assert!(u.iter().all(|i| s.contains(i)));
        let threshold = &eps * int(n as i64);
        for i in s.iter().filter(|i| !u.contains(i)) {
            prop_assert!(int(config::rball(&inst, *i, &u, r).len() as i64) < threshold);
        }
        prop_assert_eq!(peel_us(&inst, &u, r, &eps), u);
    }

    #[test]
    fn samplers_keep_per_draw_guarantees(seed in any::<u64>(), n in 3usize..9, family in 0usize..5) {
        let inst = inst(seed, n, family, true);
        let opts = ConfigOptions::default();
        let half = ratio(1, 2);
        match &inst.constraint {
            Constraint::Cardinality { k } => {
                let eps = if *k >= 3 { ratio(2, *k as i64) } else { half };
                let s = kcenter::solve_frkcenter(&inst, &eps).unwrap();
                assert_clean_draws(&s, seed)?;
            }
            Constraint::Knapsack { .. } => {
                assert_clean_draws(&knapcenter::sample_basic_frknapcenter(&inst).unwrap(), seed)?;
                assert_clean_draws(&knapcenter::sample_frknapcenter_eps_budget(&inst, &half, &opts).unwrap(), seed)?;
                assert_clean_draws(&knapcenter::sample_frknapcenter_exact_budget(&inst, &half, &opts).unwrap(), seed)?;
            }
            Constraint::Matroid(_) => {
                assert_clean_draws(&matcenter::pseudo_round(&inst).unwrap(), seed)?;
                assert_clean_draws(&matcenter::sample_frmatcenter_exact(&inst, &half, &opts).unwrap(), seed)?;
            }
        }
    }

    #[test]
    fn robust_solvers_meet_their_factors(seed in any::<u64>(), n in 2usize..9, family in 0usize..5) {
        let inst = inst(seed, n, family, false);
        let opt = exact_optimal_radius(&inst).unwrap().value;
        let (sol, factor) = match &inst.constraint {
            Constraint::Cardinality { .. } => (kcenter::solve_rkcenter(&inst).unwrap(), 2),
            Constraint::Knapsack { .. } => (knapcenter::solve_rknapcenter(&inst).unwrap(), 3),
            Constraint::Matroid(_) => (matcenter::solve_rmatcenter(&inst).unwrap(), 3),
        };
        prop_assert!(sol.radius.value <= opt);
        prop_assert_eq!(sol.cover_radius.clone(), &sol.radius.value * int(factor));
        prop_assert!(inst.coverage(&sol.centers, &sol.cover_radius) >= inst.t);
    }
}

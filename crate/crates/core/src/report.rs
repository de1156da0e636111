//! Run reports: deterministic JSON plus a plain text table.

use num_traits::Zero;
use serde::Serialize;

use crate::instance::{Instance, Radius};
use crate::kcenter::CenterSolution;
use crate::oracle::LotteryCertificate;
use crate::rational::{self, serde_rational, Rational};
use crate::sampler::{check_draw, BudgetRule, DrawOutcome, Guarantee};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Deterministic (robust) solve.
#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub command: String,
    pub algorithm: String,
    #[serde(rename = "R", with = "serde_rational")]
    pub radius: Rational,
    pub radius_index: usize,
    #[serde(with = "serde_rational")]
    pub cover_radius: Rational,
    #[serde(rename = "S")]
    pub centers: Vec<usize>,
    pub coverage: usize,
    pub t: usize,
    #[serde(skip_serializing_if = "Option::is_none", with = "opt_rational")]
    pub weight: Option<Rational>,
    #[serde(with = "opt_rational")]
    pub oracle_radius: Option<Rational>,
    #[serde(with = "opt_rational")]
    pub ratio_vs_oracle: Option<Rational>,
    pub checks: Vec<Check>,
}

impl SolveReport {
    /// Checks the solution against `budget` and coverage `t` within its cover
    /// radius, and against `factor` times the oracle radius when given.
    pub fn new(
        command: &str,
        algorithm: &str,
        inst: &Instance,
        sol: &CenterSolution,
        budget: BudgetRule,
        factor: i64,
        oracle: Option<&Radius>,
    ) -> SolveReport {
        let g = Guarantee {
            lp_radius: sol.radius.value.clone(),
            cover_radius: sol.cover_radius.clone(),
            min_coverage: inst.t,
            budget,
            fairness: vec![Rational::zero(); inst.n],
            good_set_gamma: None,
        };
        let out = DrawOutcome {
            centers: sol.centers.clone(),
            ..DrawOutcome::default()
        };
        let violations = check_draw(inst, &g, &out, usize::MAX);
        let mut checks = vec![Check::new("per-solution guarantee", violations.is_empty(), violations.join("; "))];
        let mut ratio = None;
        if let Some(opt) = oracle {
            let bound = &opt.value * rational::int(factor);
            checks.push(Check::new(
                format!("R <= {factor} x oracle"),
                sol.radius.value <= bound,
                format!("R = {}, oracle = {}", rational::format(&sol.radius.value), rational::format(&opt.value)),
            ));
            if !opt.value.is_zero() {
                ratio = Some(&sol.radius.value / &opt.value);
            }
        }
        SolveReport {
            command: command.into(),
            algorithm: algorithm.into(),
            radius: sol.radius.value.clone(),
            radius_index: sol.radius.index,
            cover_radius: sol.cover_radius.clone(),
            centers: sol.centers.clone(),
            coverage: sol.covered.len(),
            t: inst.t,
            weight: inst.weights().map(|_| inst.weight_of(&sol.centers)),
            oracle_radius: oracle.map(|r| r.value.clone()),
            ratio_vs_oracle: ratio,
            checks,
        }
    }
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

/// Randomized (fair) run certified by Monte Carlo.
#[derive(Clone, Debug, Serialize)]
pub struct FairReport {
    pub command: String,
    pub algorithm: String,
    pub seed: u64,
    pub samples: usize,
    #[serde(rename = "R", with = "serde_rational")]
    pub radius: Rational,
    pub guarantee: Guarantee,
    pub marginals: Vec<f64>,
    pub wilson_low: Vec<f64>,
    pub wilson_high: Vec<f64>,
    pub violations: usize,
    pub violation_log: Vec<String>,
    pub min_coverage_seen: usize,
    pub max_iterations_seen: usize,
    pub draws_with_extra: usize,
    pub fairness_failures: Vec<usize>,
    pub good_set_size: usize,
    pub good_set_required: usize,
    pub tracked_initial: Vec<f64>,
    pub tracked_mean: Vec<f64>,
    pub martingale_failures: Vec<usize>,
    pub draws: Vec<DrawOutcome>,
    pub checks: Vec<Check>,
}

impl FairReport {
    pub fn new(command: &str, cert: LotteryCertificate) -> FairReport {
        let mut checks = vec![
            Check::new(
                "per-draw guarantees",
                cert.violation_count == 0,
                format!("{} of {} draws violate", cert.violation_count, cert.samples),
            ),
            Check::new(
                "fairness (freq >= bound - 3 margin)",
                cert.good_set_size >= cert.good_set_required,
                format!(
                    "{} clients pass, {} required, failing {:?}",
                    cert.good_set_size, cert.good_set_required, cert.fairness_failures
                ),
            ),
        ];
        if !cert.tracked_initial.is_empty() {
            checks.push(Check::new(
                "martingale means",
                cert.martingale_failures.is_empty(),
                format!("tolerance {:.4}, failing {:?}", cert.tracked_tolerance, cert.martingale_failures),
            ));
        }
        FairReport {
            command: command.into(),
            algorithm: cert.sampler,
            seed: cert.seed,
            samples: cert.samples,
            radius: cert.guarantee.lp_radius.clone(),
            guarantee: cert.guarantee,
            marginals: cert.frequency,
            wilson_low: cert.wilson_low,
            wilson_high: cert.wilson_high,
            violations: cert.violation_count,
            violation_log: cert.violations,
            min_coverage_seen: cert.min_coverage_seen,
            max_iterations_seen: cert.max_iterations_seen,
            draws_with_extra: cert.draws_with_extra,
            fairness_failures: cert.fairness_failures,
            good_set_size: cert.good_set_size,
            good_set_required: cert.good_set_required,
            tracked_initial: cert.tracked_initial,
            tracked_mean: cert.tracked_mean,
            martingale_failures: cert.martingale_failures,
            draws: cert.draws,
            checks,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "report", rename_all = "kebab-case")]
pub enum Report {
    Solve(SolveReport),
    Fair(FairReport),
    /// Free-form payload (oracle answers, generated instances) with checks.
    Value {
        command: String,
        value: serde_json::Value,
        checks: Vec<Check>,
    },
}

impl Report {
    pub fn checks(&self) -> &[Check] {
        match self {
            Report::Solve(r) => &r.checks,
            Report::Fair(r) => &r.checks,
            Report::Value { checks, .. } => checks,
        }
    }

    pub fn is_clean(&self) -> bool {
        self.checks().iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn text_table(&self) -> String {
        let mut rows: Vec<(String, String)> = Vec::new();
        match self {
            Report::Solve(r) => {
                rows.push(("command".into(), r.command.clone()));
                rows.push(("algorithm".into(), r.algorithm.clone()));
                rows.push(("R".into(), rational::format(&r.radius)));
                rows.push(("cover radius".into(), rational::format(&r.cover_radius)));
                rows.push(("S".into(), format!("{:?}", r.centers)));
                rows.push(("coverage".into(), format!("{} (t = {})", r.coverage, r.t)));
                if let Some(w) = &r.weight {
                    rows.push(("weight".into(), rational::format(w)));
                }
                if let Some(o) = &r.oracle_radius {
                    rows.push(("oracle R".into(), rational::format(o)));
                }
                if let Some(q) = &r.ratio_vs_oracle {
                    rows.push(("ratio".into(), rational::format(q)));
                }
            }
            Report::Fair(r) => {
                rows.push(("command".into(), r.command.clone()));
                rows.push(("algorithm".into(), r.algorithm.clone()));
                rows.push(("R".into(), rational::format(&r.radius)));
                rows.push(("cover radius".into(), rational::format(&r.guarantee.cover_radius)));
                rows.push(("samples".into(), format!("{} (seed {})", r.samples, r.seed)));
                rows.push(("violations".into(), r.violations.to_string()));
                rows.push(("min coverage".into(), r.min_coverage_seen.to_string()));
                for (j, f) in r.marginals.iter().enumerate() {
                    rows.push((
                        format!("client {j}"),
                        format!(
                            "freq {f:.4}  wilson_low {:.4}  bound {}",
                            r.wilson_low[j],
                            rational::format(&r.guarantee.fairness[j])
                        ),
                    ));
                }
            }
            Report::Value { command, value, .. } => {
                rows.push(("command".into(), command.clone()));
                rows.push(("value".into(), value.to_string()));
            }
        }
        for c in self.checks() {
            let status = if c.passed { "PASS" } else { "FAIL" };
            rows.push((format!("[{status}] {}", c.name), c.detail.clone()));
        }
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        rows.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::canonical_line;
    use crate::kcenter::{solve_frkcenter, solve_rkcenter};
    use crate::oracle::{exact_optimal_radius, monte_carlo_certify_keeping};
    use crate::rational::ratio;

    #[test]
    fn robust_report_fields() {
        let inst = canonical_line(2, 4);
        let sol = solve_rkcenter(&inst).unwrap();
        let opt = exact_optimal_radius(&inst).unwrap();
        let r = Report::Solve(SolveReport::new(
            "solve-kcenter",
            "rkcenter",
            &inst,
            &sol,
            BudgetRule::Cardinality { k: 2 },
            2,
            Some(&opt),
        ));
        assert!(r.is_clean());
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in ["R", "S", "coverage", "ratio_vs_oracle"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["R"], serde_json::json!(1));
        assert!(r.text_table().contains("[PASS]"));
    }

    #[test]
    fn violated_budget_fails_the_report() {
        let inst = canonical_line(2, 4);
        let sol = solve_rkcenter(&inst).unwrap();
        let r = Report::Solve(SolveReport::new("x", "x", &inst, &sol, BudgetRule::Cardinality { k: 1 }, 2, None));
        assert!(!r.is_clean());
        assert!(r.text_table().contains("[FAIL]"));
    }

    #[test]
    fn fair_report_is_byte_identical() {
        let mut inst = canonical_line(2, 2);
        inst.p = vec![ratio(1, 2); 4];
        let s = solve_frkcenter(&inst, &ratio(1, 4)).unwrap();
        let a = Report::Fair(FairReport::new("solve-kcenter", monte_carlo_certify_keeping(&s, 300, 9, 3)));
        let b = Report::Fair(FairReport::new("solve-kcenter", monte_carlo_certify_keeping(&s, 300, 9, 3)));
        assert_eq!(a.to_json(), b.to_json());
        let v: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
        assert_eq!(v["violations"], 0);
        assert_eq!(v["marginals"].as_array().unwrap().len(), 4);
        assert_eq!(v["draws"].as_array().unwrap().len(), 3);
    }
}

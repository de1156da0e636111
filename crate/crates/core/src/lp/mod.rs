//! Linear programs over exact rationals.
//!
//! [`LinearProgram`] holds bounded variables and sparse rows; [`solve`] runs a
//! two-phase simplex and [`solve_with_cuts`] adds lazily separated rows until
//! the point is feasible for all of them.

mod decompose;
pub mod relax;
mod simplex;

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invariant, Error, Result};
use crate::rational::{self, Rational};

pub use decompose::{
    active_rank, caratheodory_decompose, is_vertex, null_direction, scaling_factors, ConvexTerm,
};
pub use relax::FractionalSolution;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

impl Cmp {
    fn flipped(self) -> Cmp {
        match self {
            Cmp::Le => Cmp::Ge,
            Cmp::Ge => Cmp::Le,
            Cmp::Eq => Cmp::Eq,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
            Cmp::Eq => "=",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint {
    pub coeffs: Vec<(usize, Rational)>,
    pub cmp: Cmp,
    pub rhs: Rational,
}

impl LinearConstraint {
    pub fn new(mut coeffs: Vec<(usize, Rational)>, cmp: Cmp, rhs: Rational) -> LinearConstraint {
        coeffs.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, Rational)> = Vec::with_capacity(coeffs.len());
        for (j, v) in coeffs {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += v,
                _ => merged.push((j, v)),
            }
        }
        merged.retain(|e| !e.1.is_zero());
        LinearConstraint {
            coeffs: merged,
            cmp,
            rhs,
        }
    }

    pub fn lhs(&self, x: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .fold(Rational::zero(), |acc, (j, v)| acc + v * &x[*j])
    }

    pub fn slack(&self, x: &[Rational]) -> Rational {
        let l = self.lhs(x);
        match self.cmp {
            Cmp::Le => &self.rhs - l,
            Cmp::Ge => l - &self.rhs,
            Cmp::Eq => -(l - &self.rhs).abs(),
        }
    }

    pub fn is_satisfied(&self, x: &[Rational]) -> bool {
        match self.cmp {
            Cmp::Eq => self.lhs(x) == self.rhs,
            _ => !self.slack(x).is_negative(),
        }
    }

    pub fn is_tight(&self, x: &[Rational]) -> bool {
        self.lhs(x) == self.rhs
    }
}

/// `max objective . x` over bounded variables and linear rows.
#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub names: Vec<String>,
    pub lower: Vec<Rational>,
    pub upper: Vec<Option<Rational>>,
    pub constraints: Vec<LinearConstraint>,
    pub objective: Vec<(usize, Rational)>,
}

impl LinearProgram {
    pub fn new() -> LinearProgram {
        LinearProgram::default()
    }

    pub fn num_vars(&self) -> usize {
        self.lower.len()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: Rational, upper: Option<Rational>) -> usize {
        self.names.push(name.into());
        self.lower.push(lower);
        self.upper.push(upper);
        self.lower.len() - 1
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, Rational)>, cmp: Cmp, rhs: Rational) {
        self.constraints.push(LinearConstraint::new(coeffs, cmp, rhs));
    }

    pub fn set_objective(&mut self, coeffs: Vec<(usize, Rational)>) {
        self.objective = LinearConstraint::new(coeffs, Cmp::Eq, Rational::zero()).coeffs;
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        self.objective
            .iter()
            .fold(Rational::zero(), |acc, (j, v)| acc + v * &x[*j])
    }

    /// Bound and row violations of `x`, as readable strings.
    pub fn violations(&self, x: &[Rational]) -> Vec<String> {
        let mut out = Vec::new();
        if x.len() != self.num_vars() {
            out.push(format!("point has {} coordinates, LP has {}", x.len(), self.num_vars()));
            return out;
        }
        for j in 0..self.num_vars() {
            if x[j] < self.lower[j] {
                out.push(format!("{} below its lower bound", self.names[j]));
            }
            if let Some(u) = &self.upper[j] {
                if &x[j] > u {
                    out.push(format!("{} above its upper bound", self.names[j]));
                }
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if !c.is_satisfied(x) {
                out.push(format!("row {i} violated"));
            }
        }
        out
    }

    pub fn is_feasible_point(&self, x: &[Rational]) -> bool {
        self.violations(x).is_empty()
    }

    /// CPLEX LP text format. Rows and bounds with fractional data are scaled
    /// by the common denominator so every printed number is an integer.
    pub fn to_lp_format(&self) -> String {
        let mut s = String::new();
        let name = |j: usize| sanitize(&self.names[j], j);
        let terms = |coeffs: &[(usize, Rational)]| -> (String, BigInt) {
            let vals: Vec<Rational> = coeffs.iter().map(|e| e.1.clone()).collect();
            let den = rational::common_denominator(&vals);
            let mut out = String::new();
            for (j, v) in coeffs {
                let c = v * Rational::from_integer(den.clone());
                let sign = if c.is_negative() { "-" } else { "+" };
                let _ = write!(out, " {sign} {} {}", c.abs().to_integer(), name(*j));
            }
            if out.is_empty() {
                out.push_str(" 0");
            }
            (out, den)
        };
        s.push_str("Maximize\n obj:");
        s.push_str(&terms(&self.objective).0);
        s.push_str("\nSubject To\n");
        let mut extra = Vec::new();
        for (i, c) in self.constraints.iter().enumerate() {
            let (t, den) = terms(&c.coeffs);
            extra.push((format!("c{i}"), t, c.cmp, &c.rhs * Rational::from_integer(den)));
        }
        let mut bounds = String::new();
        for j in 0..self.num_vars() {
            let lo = &self.lower[j];
            let up = self.upper[j].as_ref();
            let integral = lo.is_integer() && up.is_none_or(|u| u.is_integer());
            if integral {
                match up {
                    Some(u) => {
                        let _ = writeln!(bounds, " {} <= {} <= {}", lo.to_integer(), name(j), u.to_integer());
                    }
                    None => {
                        let _ = writeln!(bounds, " {} >= {}", name(j), lo.to_integer());
                    }
                }
            } else {
                let _ = writeln!(bounds, " {} >= 0", name(j));
                for (tag, b, cmp) in [("lo", Some(lo), Cmp::Ge), ("up", up, Cmp::Le)] {
                    if let Some(b) = b {
                        let den = Rational::from_integer(b.denom().clone());
                        extra.push((
                            format!("{tag}{j}"),
                            format!(" + {} {}", b.denom(), name(j)),
                            cmp,
                            b * den,
                        ));
                    }
                }
            }
        }
        for (label, t, cmp, rhs) in extra {
            let _ = writeln!(s, " {label}:{t} {} {}", cmp.symbol(), rhs.to_integer());
        }
        s.push_str("Bounds\n");
        s.push_str(&bounds);
        s.push_str("End\n");
        s
    }
}

fn sanitize(name: &str, j: usize) -> String {
    let cleaned: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if cleaned.is_empty() || cleaned.starts_with(|c: char| c.is_ascii_digit()) {
        format!("x{j}_{cleaned}")
    } else {
        cleaned
    }
}

/// Source of rows that are too many to materialize up front.
pub trait LazyConstraints {
    /// Rows violated by `x`; empty when `x` satisfies the whole family.
    fn cuts(&mut self, x: &[Rational]) -> Result<Vec<LinearConstraint>>;
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Shuffles the column order before pivoting.
    pub seed: Option<u64>,
    pub max_rounds: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            seed: None,
            max_rounds: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<Rational>,
    pub objective: Rational,
    pub rounds: usize,
}

pub fn solve(lp: &LinearProgram, opts: &SolveOptions) -> Result<LpSolution> {
    let n = lp.num_vars();
    let mut perm: Vec<usize> = (0..n).collect();
    if let Some(seed) = opts.seed {
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    // perm[j] is the standard-form column of variable j
    let mut rows = Vec::with_capacity(lp.constraints.len() + n);
    for c in &lp.constraints {
        let shift = c
            .coeffs
            .iter()
            .fold(Rational::zero(), |acc, (j, v)| acc + v * &lp.lower[*j]);
        let mut coeffs: Vec<(usize, Rational)> =
            c.coeffs.iter().map(|(j, v)| (perm[*j], v.clone())).collect();
        coeffs.sort_by_key(|e| e.0);
        rows.push((coeffs, c.cmp, &c.rhs - shift));
    }
    for j in 0..n {
        if let Some(u) = &lp.upper[j] {
            let width = u - &lp.lower[j];
            if width.is_negative() {
                return Err(Error::Infeasible);
            }
            rows.push((vec![(perm[j], Rational::one())], Cmp::Le, width));
        }
    }
    let mut objective = vec![Rational::zero(); n];
    for (j, v) in &lp.objective {
        objective[perm[*j]] = v.clone();
    }
    let std = simplex::StandardLp {
        ncols: n,
        rows,
        objective,
    };
    let opt = simplex::solve(&std)?;
    let x: Vec<Rational> = (0..n).map(|j| &opt.x[perm[j]] + &lp.lower[j]).collect();
    let objective = lp.objective_value(&x);
    debug_assert!(lp.is_feasible_point(&x));
    invariant!(
        objective == opt.value + lp.objective_value(&lp.lower),
        "tableau objective disagrees with the recovered point"
    );
    Ok(LpSolution {
        x,
        objective,
        rounds: 1,
    })
}

/// Any feasible point (a basic solution of the phase-one problem).
pub fn solve_feasible(lp: &LinearProgram) -> Result<LpSolution> {
    let mut plain = lp.clone();
    plain.objective.clear();
    solve(&plain, &SolveOptions::default())
}

/// A basic optimal solution for `objective` (maximized).
pub fn extreme_point(lp: &LinearProgram, objective: Vec<(usize, Rational)>) -> Result<LpSolution> {
    let mut with = lp.clone();
    with.set_objective(objective);
    solve(&with, &SolveOptions::default())
}

/// Cutting-plane loop: solve, ask `lazy` for violated rows, append them to
/// `lp`, repeat. On return `lp` contains every row that was added.
pub fn solve_with_cuts(
    lp: &mut LinearProgram,
    lazy: &mut dyn LazyConstraints,
    opts: &SolveOptions,
) -> Result<LpSolution> {
    for round in 1..=opts.max_rounds {
        let sol = solve(lp, opts)?;
        let cuts = lazy.cuts(&sol.x)?;
        if cuts.is_empty() {
            return Ok(LpSolution { rounds: round, ..sol });
        }
        lp.constraints.extend(cuts);
    }
    Err(Error::InternalInvariantViolation(
        "cutting-plane loop did not converge".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn box2() -> LinearProgram {
        let mut lp = LinearProgram::new();
        lp.add_var("z1", int(0), Some(int(1)));
        lp.add_var("z2", int(0), Some(int(1)));
        lp
    }

    #[test]
    fn box_vertex_maximizes_sum() {
        let sol = extreme_point(&box2(), vec![(0, int(1)), (1, int(1))]).unwrap();
        assert_eq!(sol.x, vec![int(1), int(1)]);
    }

    #[test]
    fn lower_bounds_are_shifted() {
        let mut lp = LinearProgram::new();
        lp.add_var("a", ratio(1, 3), Some(int(1)));
        lp.add_var("b", int(0), None);
        lp.add_constraint(vec![(0, int(1)), (1, int(1))], Cmp::Le, int(1));
        let sol = extreme_point(&lp, vec![(1, int(1))]).unwrap();
        assert_eq!(sol.x, vec![ratio(1, 3), ratio(2, 3)]);
        lp.lower[0] = int(2);
        assert!(matches!(solve_feasible(&lp), Err(Error::Infeasible)));
    }

    #[test]
    fn optimum_is_seed_independent() {
        let mut lp = LinearProgram::new();
        for i in 0..6 {
            lp.add_var(format!("v{i}"), int(0), Some(int(1)));
        }
        lp.add_constraint((0..6).map(|i| (i, int(i as i64 + 1))).collect(), Cmp::Le, int(7));
        lp.add_constraint(vec![(0, int(1)), (5, int(1))], Cmp::Ge, int(1));
        lp.set_objective((0..6).map(|i| (i, int(1))).collect());
        let base = solve(&lp, &SolveOptions::default()).unwrap().objective;
        for seed in 0..8 {
            let opts = SolveOptions {
                seed: Some(seed),
                ..Default::default()
            };
            assert_eq!(solve(&lp, &opts).unwrap().objective, base);
        }
    }

    struct SumCut;
    impl LazyConstraints for SumCut {
        fn cuts(&mut self, x: &[Rational]) -> Result<Vec<LinearConstraint>> {
            let total = &x[0] + &x[1];
            Ok(if total > int(1) {
                vec![LinearConstraint::new(vec![(0, int(1)), (1, int(1))], Cmp::Le, int(1))]
            } else {
                vec![]
            })
        }
    }

    #[test]
    fn cutting_planes_add_rows() {
        let mut lp = box2();
        lp.set_objective(vec![(0, int(2)), (1, int(1))]);
        let sol = solve_with_cuts(&mut lp, &mut SumCut, &SolveOptions::default()).unwrap();
        assert_eq!(sol.x, vec![int(1), int(0)]);
        assert_eq!(sol.rounds, 2);
        assert_eq!(lp.constraints.len(), 1);
    }

    #[test]
    fn lp_format_scales_fractions() {
        let mut lp = box2();
        lp.add_constraint(vec![(0, ratio(1, 2)), (1, ratio(1, 3))], Cmp::Le, ratio(5, 6));
        lp.lower[1] = ratio(1, 4);
        let text = lp.to_lp_format();
        assert!(text.contains("c0: + 3 z1 + 2 z2 <= 5"), "{text}");
        assert!(text.contains("lo1: + 4 z2 >= 1"), "{text}");
        assert!(text.contains("0 <= z1 <= 1"));
        assert!(text.ends_with("End\n"));
    }
}

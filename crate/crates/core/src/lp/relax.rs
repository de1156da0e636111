//! LP relaxations of the center problems at a fixed radius.
//!
//! Variables are the openings `y_i` and the client masses `s_j`; the rows are
//! `s_j <= y(B_j)`, `sum s >= t` and the relaxed center constraint. Any
//! feasible `(y, s)` yields an assignment `x` by filling each client from its
//! nearest open centers, so `x` is never an LP variable.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{Constraint, Instance, Radius};
use crate::matroid::{elems_of, Matroid};
use crate::rational::{self, serde_rational, Rational};

use super::{solve, solve_with_cuts, Cmp, LazyConstraints, LinearConstraint, LinearProgram, SolveOptions};

/// Assignment `x[i][j]` (client `j` served by `i`), openings `y` and client
/// masses `s_j = sum_i x[i][j]` at radius `radius`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FractionalSolution {
    #[serde(with = "serde_rational")]
    pub radius: Rational,
    #[serde(with = "serde_rational::matrix")]
    pub x: Vec<Vec<Rational>>,
    #[serde(with = "serde_rational::vec")]
    pub y: Vec<Rational>,
    #[serde(with = "serde_rational::vec")]
    pub s: Vec<Rational>,
}

impl FractionalSolution {
    /// Fills client `j` up to `s[j]` from `B_j` in order of distance, then index.
    pub fn from_openings(inst: &Instance, radius: &Rational, y: Vec<Rational>, s: Vec<Rational>) -> Result<Self> {
        Self::with_pins(inst, radius, y, s, &vec![None; inst.n])
    }

    /// As [`FractionalSolution::from_openings`], except that a client with
    /// `pins[j] = Some(i)` is served entirely by `i` (which must be fully open).
    pub fn with_pins(
        inst: &Instance,
        radius: &Rational,
        y: Vec<Rational>,
        mut s: Vec<Rational>,
        pins: &[Option<usize>],
    ) -> Result<Self> {
        let n = inst.n;
        let mut x = vec![vec![Rational::zero(); n]; n];
        for j in 0..n {
            if let Some(i) = pins[j] {
                if !y[i].is_one() || &inst.d[i][j] > radius {
                    return Err(Error::InternalInvariantViolation(format!(
                        "client {j} pinned to a center that is not open within the radius"
                    )));
                }
                x[i][j] = Rational::one();
                s[j] = Rational::one();
                continue;
            }
            let mut ball = inst.ball(j, radius);
            ball.sort_by(|&a, &b| inst.d[a][j].cmp(&inst.d[b][j]).then(a.cmp(&b)));
            let mut rem = s[j].clone();
            for i in ball {
                if !rem.is_positive() {
                    break;
                }
                let take = if y[i] < rem { y[i].clone() } else { rem.clone() };
                rem -= &take;
                x[i][j] = take;
            }
            if rem.is_positive() {
                return Err(Error::InternalInvariantViolation(format!(
                    "client {j} mass exceeds the openings in its ball"
                )));
            }
        }
        Ok(FractionalSolution {
            radius: radius.clone(),
            x,
            y,
            s,
        })
    }

    /// Violated relaxation constraints; `fair` adds `s_j >= p_j`.
    pub fn violations(&self, inst: &Instance, fair: bool) -> Vec<String> {
        let n = inst.n;
        let mut v = Vec::new();
        let one = Rational::one();
        for i in 0..n {
            if self.y[i].is_negative() || self.y[i] > one {
                v.push(format!("y[{i}] outside [0, 1]"));
            }
        }
        let mut total = Rational::zero();
        for j in 0..n {
            let mut sj = Rational::zero();
            for i in 0..n {
                let xij = &self.x[i][j];
                if xij.is_negative() {
                    v.push(format!("x[{i}][{j}] negative"));
                }
                if xij.is_positive() && inst.d[i][j] > self.radius {
                    v.push(format!("x[{i}][{j}] outside the ball"));
                }
                if xij > &self.y[i] {
                    v.push(format!("x[{i}][{j}] exceeds y[{i}]"));
                }
                sj += xij;
            }
            if sj != self.s[j] {
                v.push(format!("s[{j}] differs from the assignment sum"));
            }
            if sj > one {
                v.push(format!("client {j} assigned more than once"));
            }
            if fair && sj < inst.p[j] {
                v.push(format!("client {j} mass below p[{j}]"));
            }
            total += sj;
        }
        if total < rational::int(inst.t as i64) {
            v.push("total mass below t".into());
        }
        match &inst.constraint {
            Constraint::Cardinality { k } => {
                if rational::sum(&self.y) > rational::int(*k as i64) {
                    v.push("sum of y exceeds k".into());
                }
            }
            Constraint::Knapsack { weights, budget } => {
                let w: Rational = weights.iter().zip(&self.y).fold(Rational::zero(), |a, (w, y)| a + w * y);
                if &w > budget {
                    v.push("weighted openings exceed the budget".into());
                }
            }
            Constraint::Matroid(m) => {
                if let Ok(Some(s)) = m.independence_violation(&self.y) {
                    v.push(format!("rank constraint of {:?} violated", elems_of(s)));
                }
            }
        }
        v
    }

    /// `F_j = {i : x[i][j] > 0}`.
    pub fn cluster(&self, j: usize) -> Vec<usize> {
        (0..self.y.len()).filter(|&i| self.x[i][j].is_positive()).collect()
    }
}

/// Rank rows `sum_{i in S} z(i) <= r(S) * scale` for a matroid whose elements
/// are LP variables, a scaling variable, or fixed constants.
pub struct MatroidCuts<'a> {
    pub matroid: &'a Matroid,
    /// LP variable standing for each ground element; `None` means fixed.
    pub vars: Vec<Option<usize>>,
    pub fixed: Vec<Rational>,
    /// Multiplies the rank side, as in `y(S) <= q * r(S)`.
    pub scale: Option<usize>,
}

impl<'a> MatroidCuts<'a> {
    pub fn direct(matroid: &'a Matroid, vars: Vec<usize>) -> Self {
        let n = matroid.ground_size();
        MatroidCuts {
            matroid,
            vars: vars.into_iter().map(Some).collect(),
            fixed: vec![Rational::zero(); n],
            scale: None,
        }
    }
}

impl LazyConstraints for MatroidCuts<'_> {
    fn cuts(&mut self, x: &[Rational]) -> Result<Vec<LinearConstraint>> {
        let y: Vec<Rational> = self
            .vars
            .iter()
            .zip(&self.fixed)
            .map(|(v, f)| v.map_or_else(|| f.clone(), |j| x[j].clone()))
            .collect();
        let q = self.scale.map_or_else(Rational::one, |j| x[j].clone());
        let (set, value) = self.matroid.separate_scaled(&q, &y)?;
        if !value.is_negative() {
            return Ok(vec![]);
        }
        let rank = rational::int(self.matroid.rank(set) as i64);
        let mut coeffs = Vec::new();
        let mut rhs = Rational::zero();
        for e in elems_of(set) {
            match self.vars[e] {
                Some(j) => coeffs.push((j, Rational::one())),
                None => rhs -= &self.fixed[e],
            }
        }
        match self.scale {
            Some(q) => coeffs.push((q, -rank)),
            None => rhs += rank,
        }
        Ok(vec![LinearConstraint::new(coeffs, Cmp::Le, rhs)])
    }
}

/// Relaxation at radius `r`: variables `y_0..y_{n-1}` then `s_0..s_{n-1}`.
pub fn build_relaxation(inst: &Instance, r: &Rational, fair: bool) -> LinearProgram {
    let n = inst.n;
    let mut lp = LinearProgram::new();
    for i in 0..n {
        lp.add_var(format!("y{i}"), Rational::zero(), Some(Rational::one()));
    }
    for j in 0..n {
        let lo = if fair { inst.p[j].clone() } else { Rational::zero() };
        lp.add_var(format!("s{j}"), lo, Some(Rational::one()));
    }
    for j in 0..n {
        let mut row = vec![(n + j, Rational::one())];
        row.extend(inst.ball(j, r).into_iter().map(|i| (i, -Rational::one())));
        lp.add_constraint(row, Cmp::Le, Rational::zero());
    }
    lp.add_constraint(
        (0..n).map(|j| (n + j, Rational::one())).collect(),
        Cmp::Ge,
        rational::int(inst.t as i64),
    );
    match &inst.constraint {
        Constraint::Cardinality { k } => {
            lp.add_constraint(
                (0..n).map(|i| (i, Rational::one())).collect(),
                Cmp::Le,
                rational::int(*k as i64),
            );
        }
        Constraint::Knapsack { weights, budget } => {
            lp.add_constraint(
                weights.iter().cloned().enumerate().collect(),
                Cmp::Le,
                budget.clone(),
            );
        }
        Constraint::Matroid(_) => {}
    }
    lp
}

/// Solves the relaxation at `r`; the returned LP includes any rank cuts.
pub fn solve_relaxation(
    inst: &Instance,
    r: &Rational,
    fair: bool,
    opts: &SolveOptions,
) -> Result<(FractionalSolution, LinearProgram)> {
    let n = inst.n;
    let mut lp = build_relaxation(inst, r, fair);
    let sol = match &inst.constraint {
        Constraint::Matroid(m) => {
            let mut cuts = MatroidCuts::direct(m, (0..n).collect());
            solve_with_cuts(&mut lp, &mut cuts, opts)?
        }
        _ => solve(&lp, opts)?,
    };
    let y = sol.x[..n].to_vec();
    let s = sol.x[n..].to_vec();
    let frac = FractionalSolution::from_openings(inst, r, y, s)?;
    Ok((frac, lp))
}

pub fn is_relaxation_feasible(inst: &Instance, r: &Rational, fair: bool) -> Result<bool> {
    match solve_relaxation(inst, r, fair, &SolveOptions::default()) {
        Ok(_) => Ok(true),
        Err(Error::Infeasible) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Smallest candidate radius with a feasible relaxation, by binary search
/// (feasibility is monotone in the radius since balls only grow).
pub fn lp_threshold(inst: &Instance, fair: bool) -> Result<(Radius, FractionalSolution)> {
    let radii = inst.candidate_radii();
    let last = radii.len() - 1;
    if !is_relaxation_feasible(inst, &radii[last].value, fair)? {
        return Err(Error::NoFeasibleRadius);
    }
    let (mut lo, mut hi) = (0, last);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if is_relaxation_feasible(inst, &radii[mid].value, fair)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let (sol, _) = solve_relaxation(inst, &radii[lo].value, fair, &SolveOptions::default())?;
    Ok((radii[lo].clone(), sol))
}

/// Relaxation at the given radius, or at the smallest feasible candidate.
pub fn bound_relaxation(inst: &Instance, fair: bool, radius: Option<&Rational>) -> Result<(Radius, FractionalSolution)> {
    match radius {
        None => lp_threshold(inst, fair),
        Some(r) => {
            let radius = inst.radius_of(r).unwrap_or(Radius {
                value: r.clone(),
                index: usize::MAX,
            });
            match solve_relaxation(inst, r, fair, &SolveOptions::default()) {
                Ok((sol, _)) => Ok((radius, sol)),
                Err(Error::Infeasible) => Err(Error::NoFeasibleRadius),
                Err(e) => Err(e),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::{canonical_line, line};
    use crate::matroid::MatroidSpec;
    use crate::rational::int;

    #[test]
    fn two_point_feasibility() {
        let mut inst = line(&[0, 1], Constraint::Cardinality { k: 1 }, 1);
        assert!(is_relaxation_feasible(&inst, &int(0), false).unwrap());
        inst.t = 2;
        assert!(!is_relaxation_feasible(&inst, &int(0), false).unwrap());
        assert!(is_relaxation_feasible(&inst, &int(1), false).unwrap());
    }

    #[test]
    fn rank_one_matroid_needs_radius_ten() {
        let m = Matroid::new(MatroidSpec::Uniform { k: 1 }, 4).unwrap();
        let inst = line(&[0, 1, 10, 11], Constraint::Matroid(m), 4);
        for r in [0, 1, 9] {
            assert!(!is_relaxation_feasible(&inst, &int(r), false).unwrap());
        }
        assert!(is_relaxation_feasible(&inst, &int(10), false).unwrap());
        let (r, sol) = lp_threshold(&inst, false).unwrap();
        assert_eq!(r.value, int(10));
        assert!(sol.violations(&inst, false).is_empty());
    }

    #[test]
    fn threshold_solution_satisfies_relaxation() {
        let inst = canonical_line(2, 4);
        let (r, sol) = lp_threshold(&inst, false).unwrap();
        assert_eq!(r.value, int(1));
        assert!(sol.violations(&inst, false).is_empty(), "{:?}", sol.violations(&inst, false));
    }

    #[test]
    fn fairness_lower_bounds_bind() {
        let mut inst = canonical_line(1, 1);
        inst.p = vec![int(1), int(0), int(0), int(1)];
        // one center must serve both ends with certainty
        assert!(!is_relaxation_feasible(&inst, &int(9), true).unwrap());
        assert!(is_relaxation_feasible(&inst, &int(10), true).unwrap());
    }
}

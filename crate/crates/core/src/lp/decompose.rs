//! Vertex tests, convex decomposition into vertices, and the two-constraint
//! kernel direction used by dependent rounding.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

use super::{solve_feasible, Cmp, LinearProgram};

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexTerm {
    pub weight: Rational,
    pub point: Vec<Rational>,
}

fn matrix_rank(mut rows: Vec<Vec<Rational>>, ncols: usize) -> usize {
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank][col].clone();
        for r in 0..rows.len() {
            if r == rank || rows[r][col].is_zero() {
                continue;
            }
            let f = &rows[r][col] / &pivot;
            for c in col..ncols {
                let v = &f * &rows[rank][c];
                rows[r][c] -= v;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Rank of the rows and bounds that hold with equality at `x`.
pub fn active_rank(lp: &LinearProgram, x: &[Rational]) -> usize {
    let n = lp.num_vars();
    let mut rows = Vec::new();
    for c in &lp.constraints {
        if c.is_tight(x) {
            let mut dense = vec![Rational::zero(); n];
            for (j, v) in &c.coeffs {
                dense[*j] = v.clone();
            }
            rows.push(dense);
        }
    }
    for j in 0..n {
        let at_upper = lp.upper[j].as_ref().is_some_and(|u| &x[j] == u);
        if x[j] == lp.lower[j] || at_upper {
            let mut dense = vec![Rational::zero(); n];
            dense[j] = Rational::one();
            rows.push(dense);
        }
    }
    matrix_rank(rows, n)
}

/// A feasible point is a vertex iff its active constraints have full rank.
pub fn is_vertex(lp: &LinearProgram, x: &[Rational]) -> bool {
    lp.is_feasible_point(x) && active_rank(lp, x) == lp.num_vars()
}

/// The LP with every constraint tight at `p` turned into an equality.
fn minimal_face(lp: &LinearProgram, p: &[Rational]) -> LinearProgram {
    let mut face = lp.clone();
    face.objective.clear();
    for c in face.constraints.iter_mut() {
        if c.is_tight(p) {
            c.cmp = Cmp::Eq;
        }
    }
    for j in 0..face.num_vars() {
        if p[j] == face.lower[j] {
            face.upper[j] = Some(p[j].clone());
        } else if face.upper[j].as_ref() == Some(&p[j]) {
            face.lower[j] = p[j].clone();
        }
    }
    face
}

/// Largest `mu` with `v + mu * dir` feasible, or `None` when unbounded.
fn max_ray(lp: &LinearProgram, v: &[Rational], dir: &[Rational]) -> Option<Rational> {
    let mut best: Option<Rational> = None;
    let mut take = |cand: Rational| {
        if best.as_ref().is_none_or(|b| &cand < b) {
            best = Some(cand);
        }
    };
    for c in &lp.constraints {
        let ad = c.lhs(dir);
        let av = c.lhs(v);
        match c.cmp {
            Cmp::Le if ad.is_positive() => take((&c.rhs - av) / ad),
            Cmp::Ge if ad.is_negative() => take((av - &c.rhs) / -ad),
            _ => {}
        }
    }
    for j in 0..lp.num_vars() {
        if dir[j].is_positive() {
            if let Some(u) = &lp.upper[j] {
                take((u - &v[j]) / &dir[j]);
            }
        } else if dir[j].is_negative() {
            take((&v[j] - &lp.lower[j]) / -&dir[j]);
        }
    }
    best
}

/// Writes `s` as a convex combination of vertices of `lp`.
///
/// Repeatedly takes a vertex `v` of the minimal face containing the current
/// point `p`, walks from `v` through `p` to the boundary point `q`, records
/// `v` with the weight that makes `p` a combination of `v` and `q`, and
/// continues from `q`, whose minimal face has lower dimension.
pub fn caratheodory_decompose(lp: &LinearProgram, s: &[Rational]) -> Result<Vec<ConvexTerm>> {
    let violations = lp.violations(s);
    if !violations.is_empty() {
        return Err(Error::NotInPolytope(violations.join("; ")));
    }
    let n = lp.num_vars();
    let mut terms: Vec<ConvexTerm> = Vec::new();
    let mut p = s.to_vec();
    let mut remaining = Rational::one();
    for _ in 0..=n + 1 {
        let v = solve_feasible(&minimal_face(lp, &p))?.x;
        if v == p {
            terms.push(ConvexTerm {
                weight: remaining,
                point: p,
            });
            break;
        }
        let dir: Vec<Rational> = p.iter().zip(&v).map(|(a, b)| a - b).collect();
        let mu = max_ray(lp, &v, &dir).ok_or(Error::Unbounded)?;
        if mu <= Rational::one() {
            return Err(Error::InternalInvariantViolation(
                "decomposition step does not pass the current point".into(),
            ));
        }
        let q: Vec<Rational> = v.iter().zip(&dir).map(|(a, d)| a + &mu * d).collect();
        let keep = Rational::one() / &mu;
        terms.push(ConvexTerm {
            weight: &remaining * (Rational::one() - &keep),
            point: v,
        });
        remaining *= keep;
        p = q;
    }
    let total: Rational = terms.iter().fold(Rational::zero(), |a, t| a + &t.weight);
    let mut recon = vec![Rational::zero(); n];
    for t in &terms {
        for (r, z) in recon.iter_mut().zip(&t.point) {
            *r += &t.weight * z;
        }
    }
    if !total.is_one() || recon != s || terms.len() > n + 1 {
        return Err(Error::InternalInvariantViolation(
            "convex decomposition does not reconstruct the point".into(),
        ));
    }
    Ok(terms)
}

/// Nonzero `delta` with `sum(delta) = 0` and `c . delta = 0`, supported on the
/// first three coordinates of `free`. The direction is the cross product of
/// `(1, 1, 1)` with the restricted `c`, or `(1, -1, 0)` when `c` is constant
/// there; its first nonzero entry is positive.
pub fn null_direction(c: &[Rational], free: &[usize]) -> Result<Vec<Rational>> {
    if free.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "need three free coordinates, got {}",
            free.len()
        )));
    }
    let (a, b, e) = (&c[free[0]], &c[free[1]], &c[free[2]]);
    let mut local = [e - b, a - e, b - a];
    if local.iter().all(|v| v.is_zero()) {
        local = [Rational::one(), -Rational::one(), Rational::zero()];
    }
    if local.iter().find(|v| !v.is_zero()).is_some_and(|v| v.is_negative()) {
        for v in local.iter_mut() {
            *v = -v.clone();
        }
    }
    let mut delta = vec![Rational::zero(); c.len()];
    for (k, v) in local.into_iter().enumerate() {
        delta[free[k]] = v;
    }
    Ok(delta)
}

/// Largest `a, b` keeping `y + a * delta` and `y - b * delta` in `[0, 1]`.
pub fn scaling_factors(y: &[Rational], delta: &[Rational]) -> Result<(Rational, Rational)> {
    let mut a: Option<Rational> = None;
    let mut b: Option<Rational> = None;
    let min = |slot: &mut Option<Rational>, v: Rational| {
        if slot.as_ref().is_none_or(|s| &v < s) {
            *slot = Some(v);
        }
    };
    for (yi, di) in y.iter().zip(delta) {
        if di.is_positive() {
            min(&mut a, (Rational::one() - yi) / di);
            min(&mut b, yi / di);
        } else if di.is_negative() {
            min(&mut a, yi / -di);
            min(&mut b, (Rational::one() - yi) / -di);
        }
    }
    match (a, b) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::InvalidParameter("zero direction".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, parse, ratio};

    fn q(v: &[&str]) -> Vec<Rational> {
        v.iter().map(|s| parse(s).unwrap()).collect()
    }

    fn dot(a: &[Rational], b: &[Rational]) -> Rational {
        a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
    }

    #[test]
    fn null_direction_examples() {
        let free = [0, 1, 2];
        let d = null_direction(&q(&["1", "1", "1"]), &free).unwrap();
        assert!(d.iter().any(|v| !v.is_zero()));
        assert_eq!(dot(&d, &q(&["1", "1", "1"])), int(0));
        assert_eq!(null_direction(&q(&["2", "1", "1"]), &free).unwrap(), q(&["0", "1", "-1"]));
        assert_eq!(null_direction(&q(&["5", "3", "2"]), &free).unwrap(), q(&["1", "-3", "2"]));
        assert!(null_direction(&q(&["1", "2"]), &[0, 1]).is_err());
    }

    #[test]
    fn null_direction_respects_support() {
        let c = q(&["7", "5", "3", "2", "9"]);
        let d = null_direction(&c, &[1, 3, 4]).unwrap();
        assert!(d[0].is_zero() && d[2].is_zero());
        assert_eq!(dot(&d, &c), int(0));
        assert_eq!(d.iter().fold(int(0), |a, v| a + v), int(0));
    }

    #[test]
    fn scaling_factor_examples() {
        let (a, b) = scaling_factors(&q(&["0.5", "0.5"]), &q(&["1", "-1"])).unwrap();
        assert_eq!((a, b), (ratio(1, 2), ratio(1, 2)));
        let (a, b) = scaling_factors(&q(&["0.9", "0.1", "0.5"]), &q(&["0", "1", "-1"])).unwrap();
        assert_eq!((a, b), (ratio(1, 2), ratio(1, 10)));
        let (a, b) = scaling_factors(&q(&["0.25", "0.75"]), &q(&["1", "-1"])).unwrap();
        assert_eq!((a, b), (ratio(3, 4), ratio(1, 4)));
    }

    fn simplex_1d() -> LinearProgram {
        let mut lp = LinearProgram::new();
        lp.add_var("z1", int(0), None);
        lp.add_var("z2", int(0), None);
        lp.add_constraint(vec![(0, int(1)), (1, int(1))], Cmp::Eq, int(1));
        lp
    }

    fn unit_square() -> LinearProgram {
        let mut lp = LinearProgram::new();
        lp.add_var("z1", int(0), Some(int(1)));
        lp.add_var("z2", int(0), Some(int(1)));
        lp
    }

    fn reconstruct(terms: &[ConvexTerm], n: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); n];
        for t in terms {
            for (o, z) in out.iter_mut().zip(&t.point) {
                *o += &t.weight * z;
            }
        }
        out
    }

    #[test]
    fn vertex_decomposes_to_itself() {
        let lp = unit_square();
        let terms = caratheodory_decompose(&lp, &q(&["1", "0"])).unwrap();
        assert_eq!(terms, vec![ConvexTerm { weight: int(1), point: q(&["1", "0"]) }]);
    }

    #[test]
    fn simplex_midpoint_splits_in_half() {
        let lp = simplex_1d();
        let terms = caratheodory_decompose(&lp, &q(&["1/2", "1/2"])).unwrap();
        assert_eq!(terms.len(), 2);
        for t in &terms {
            assert_eq!(t.weight, ratio(1, 2));
            assert!(is_vertex(&lp, &t.point));
        }
    }

    #[test]
    fn square_points_reconstruct_exactly() {
        let lp = unit_square();
        for s in [["1/2", "1/2"], ["1/3", "3/4"], ["0", "2/5"]] {
            let s = q(&s);
            let terms = caratheodory_decompose(&lp, &s).unwrap();
            assert!(terms.len() <= 3);
            assert_eq!(reconstruct(&terms, 2), s);
            assert!(terms.iter().all(|t| is_vertex(&lp, &t.point)));
        }
    }

    #[test]
    fn decomposition_rejects_outside_points() {
        assert!(matches!(
            caratheodory_decompose(&unit_square(), &q(&["2", "0"])),
            Err(Error::NotInPolytope(_))
        ));
    }

    #[test]
    fn vertex_test() {
        let lp = unit_square();
        assert!(is_vertex(&lp, &q(&["0", "1"])));
        assert!(!is_vertex(&lp, &q(&["1/2", "1"])));
    }
}

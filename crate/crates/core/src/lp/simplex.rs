//! Two-phase primal simplex on a sparse exact-rational tableau.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

use super::Cmp;

type SparseRow = Vec<(usize, Rational)>;

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_SWITCH: usize = 50;
const MAX_PIVOTS: usize = 5_000_000;

/// `max c.x` subject to `rows` and `x >= 0`, every row given as
/// `(coefficients sorted by column, comparison, rhs)`.
pub(crate) struct StandardLp {
    pub ncols: usize,
    pub rows: Vec<(SparseRow, Cmp, Rational)>,
    pub objective: Vec<Rational>,
}

pub(crate) struct Optimum {
    pub x: Vec<Rational>,
    pub value: Rational,
}

struct Tableau {
    rows: Vec<SparseRow>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    d: Vec<Rational>,
    value: Rational,
    enterable: usize,
    degenerate_run: usize,
    pivots: usize,
}

fn coef(row: &SparseRow, j: usize) -> Option<&Rational> {
    row.binary_search_by_key(&j, |e| e.0).ok().map(|k| &row[k].1)
}

/// `a - f * b` for sorted sparse rows.
fn axpy(a: &SparseRow, f: &Rational, b: &SparseRow) -> SparseRow {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut k) = (0, 0);
    while i < a.len() || k < b.len() {
        let take_a = k >= b.len() || (i < a.len() && a[i].0 < b[k].0);
        let take_b = i >= a.len() || (k < b.len() && b[k].0 < a[i].0);
        if take_a {
            out.push(a[i].clone());
            i += 1;
        } else if take_b {
            out.push((b[k].0, -(f * &b[k].1)));
            k += 1;
        } else {
            let v = &a[i].1 - f * &b[k].1;
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            k += 1;
        }
    }
    out
}

impl Tableau {
    fn pivot(&mut self, r: usize, j: usize) {
        let a = coef(&self.rows[r], j).expect("pivot element present").clone();
        if a != Rational::from_integer(1.into()) {
            for e in self.rows[r].iter_mut() {
                e.1 /= &a;
            }
            self.rhs[r] /= &a;
        }
        let prow = std::mem::take(&mut self.rows[r]);
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            if let Some(f) = coef(&self.rows[i], j).cloned() {
                self.rows[i] = axpy(&self.rows[i], &f, &prow);
                self.rhs[i] -= &f * &prhs;
            }
        }
        let f = self.d[j].clone();
        if !f.is_zero() {
            for (k, v) in &prow {
                self.d[*k] -= &f * v;
            }
            self.value -= &f * &prhs;
        }
        self.rows[r] = prow;
        self.basis[r] = j;
        self.pivots += 1;
    }

    fn entering(&self) -> Option<usize> {
        let bland = self.degenerate_run >= DEGENERATE_SWITCH;
        let mut best: Option<usize> = None;
        for j in 0..self.enterable {
            if !self.d[j].is_negative() {
                continue;
            }
            if bland {
                return Some(j);
            }
            if best.is_none_or(|b| self.d[j] < self.d[b]) {
                best = Some(j);
            }
        }
        best
    }

    fn leaving(&self, j: usize) -> Option<usize> {
        let mut best: Option<(usize, Rational)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            let Some(a) = coef(row, j) else { continue };
            if !a.is_positive() {
                continue;
            }
            let ratio = &self.rhs[i] / a;
            let better = match &best {
                None => true,
                Some((b, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*b]),
            };
            if better {
                best = Some((i, ratio));
            }
        }
        best.map(|(i, _)| i)
    }

    fn run(&mut self) -> Result<()> {
        while let Some(j) = self.entering() {
            let Some(r) = self.leaving(j) else {
                return Err(Error::Unbounded);
            };
            if self.rhs[r].is_zero() {
                self.degenerate_run += 1;
            } else {
                self.degenerate_run = 0;
            }
            self.pivot(r, j);
            if self.pivots > MAX_PIVOTS {
                return Err(Error::InternalInvariantViolation("simplex pivot limit reached".into()));
            }
        }
        Ok(())
    }

    fn set_objective(&mut self, c: &[Rational]) {
        self.d = c.iter().map(|v| -v.clone()).collect();
        self.d.resize(self.enterable.max(self.d.len()), Rational::zero());
        self.value = Rational::zero();
        for i in 0..self.rows.len() {
            let b = self.basis[i];
            let f = self.d[b].clone();
            if f.is_zero() {
                continue;
            }
            for (k, v) in &self.rows[i] {
                self.d[*k] -= &f * v;
            }
            self.value -= &f * &self.rhs[i];
        }
    }
}

pub(crate) fn solve(lp: &StandardLp) -> Result<Optimum> {
    let n = lp.ncols;
    let mut rows: Vec<SparseRow> = Vec::with_capacity(lp.rows.len());
    let mut rhs = Vec::with_capacity(lp.rows.len());
    let mut cmps = Vec::with_capacity(lp.rows.len());
    for (row, cmp, b) in &lp.rows {
        let row: SparseRow = row.iter().filter(|e| !e.1.is_zero()).cloned().collect();
        if b.is_negative() {
            rows.push(row.into_iter().map(|(j, v)| (j, -v)).collect());
            rhs.push(-b.clone());
            cmps.push(cmp.flipped());
        } else {
            rows.push(row);
            rhs.push(b.clone());
            cmps.push(*cmp);
        }
    }
    let m = rows.len();
    let one = Rational::from_integer(1.into());
    let mut next = n;
    let mut basis = vec![0; m];
    let mut artificial = Vec::new();
    for i in 0..m {
        match cmps[i] {
            Cmp::Le => {
                rows[i].push((next, one.clone()));
                basis[i] = next;
                next += 1;
            }
            Cmp::Ge => {
                rows[i].push((next, -one.clone()));
                next += 1;
            }
            Cmp::Eq => {}
        }
    }
    let first_art = next;
    for i in 0..m {
        if cmps[i] != Cmp::Le {
            rows[i].push((next, one.clone()));
            basis[i] = next;
            artificial.push(i);
            next += 1;
        }
    }
    let total = next;
    let mut tab = Tableau {
        rows,
        rhs,
        basis,
        d: vec![Rational::zero(); total],
        value: Rational::zero(),
        enterable: first_art,
        degenerate_run: 0,
        pivots: 0,
    };

    if !artificial.is_empty() {
        let mut c1 = vec![Rational::zero(); total];
        for c in c1.iter_mut().skip(first_art) {
            *c = -one.clone();
        }
        tab.set_objective(&c1);
        tab.run()?;
        if tab.value.is_negative() {
            return Err(Error::Infeasible);
        }
        // Drive zero-valued artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] < first_art {
                i += 1;
                continue;
            }
            let cand = tab.rows[i]
                .iter()
                .find(|(j, v)| *j < first_art && !v.is_zero())
                .map(|e| e.0);
            match cand {
                Some(j) => {
                    tab.pivot(i, j);
                    i += 1;
                }
                None => {
                    tab.rows.remove(i);
                    tab.rhs.remove(i);
                    tab.basis.remove(i);
                }
            }
        }
        for row in tab.rows.iter_mut() {
            row.retain(|e| e.0 < first_art);
        }
        tab.d.truncate(first_art);
    }
    tab.degenerate_run = 0;
    let mut c2 = lp.objective.clone();
    c2.resize(first_art, Rational::zero());
    tab.set_objective(&c2);
    tab.run()?;

    let mut x = vec![Rational::zero(); n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rhs[i].clone();
        }
    }
    Ok(Optimum { x, value: tab.value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn row(entries: &[(usize, i64)]) -> SparseRow {
        entries.iter().map(|&(j, v)| (j, int(v))).collect()
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18  ->  (2, 6), 36
        let lp = StandardLp {
            ncols: 2,
            rows: vec![
                (row(&[(0, 1)]), Cmp::Le, int(4)),
                (row(&[(1, 2)]), Cmp::Le, int(12)),
                (row(&[(0, 3), (1, 2)]), Cmp::Le, int(18)),
            ],
            objective: vec![int(3), int(5)],
        };
        let opt = solve(&lp).unwrap();
        assert_eq!(opt.x, vec![int(2), int(6)]);
        assert_eq!(opt.value, int(36));
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + y  s.t. x + 2y >= 3, x - y = 0  ->  x = y = 1
        let lp = StandardLp {
            ncols: 2,
            rows: vec![
                (row(&[(0, 1), (1, 2)]), Cmp::Ge, int(3)),
                (row(&[(0, 1), (1, -1)]), Cmp::Eq, int(0)),
            ],
            objective: vec![int(-1), int(-1)],
        };
        let opt = solve(&lp).unwrap();
        assert_eq!(opt.x, vec![int(1), int(1)]);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let infeasible = StandardLp {
            ncols: 1,
            rows: vec![
                (row(&[(0, 1)]), Cmp::Ge, int(2)),
                (row(&[(0, 1)]), Cmp::Le, int(1)),
            ],
            objective: vec![int(0)],
        };
        assert!(matches!(solve(&infeasible), Err(Error::Infeasible)));
        let unbounded = StandardLp {
            ncols: 2,
            rows: vec![(row(&[(0, 1), (1, -1)]), Cmp::Le, int(1))],
            objective: vec![int(1), int(0)],
        };
        assert!(matches!(solve(&unbounded), Err(Error::Unbounded)));
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let lp = StandardLp {
            ncols: 2,
            rows: vec![
                (row(&[(0, 1), (1, 1)]), Cmp::Eq, int(1)),
                (row(&[(0, 2), (1, 2)]), Cmp::Eq, int(2)),
            ],
            objective: vec![int(1), int(0)],
        };
        let opt = solve(&lp).unwrap();
        assert_eq!(opt.x, vec![int(1), int(0)]);
    }

    #[test]
    fn fractional_optimum_is_exact() {
        // max x + y, 3x + y <= 2, x + 3y <= 2  ->  (1/2, 1/2)
        let lp = StandardLp {
            ncols: 2,
            rows: vec![
                (row(&[(0, 3), (1, 1)]), Cmp::Le, int(2)),
                (row(&[(0, 1), (1, 3)]), Cmp::Le, int(2)),
            ],
            objective: vec![int(1), int(1)],
        };
        let opt = solve(&lp).unwrap();
        assert_eq!(opt.x, vec![ratio(1, 2), ratio(1, 2)]);
    }
}

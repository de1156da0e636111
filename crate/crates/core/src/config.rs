//! Configuration LPs: one column per guessed center set `U`, each carrying
//! a homogenized copy `(q_U, y^U, s^U)` of the relaxation conditioned on `U`.
//!
//! Inside column `U` the openings of `U` equal `q_U`, forbidden vertices are
//! absent, every client keeps `s^U_j <= min(q_U, y^U(B_j))`, and the column
//! covers `t q_U`. Fairness couples the columns: `sum_U s^U_j >= p_j`.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::instance::{set_mask, Constraint, Instance, Radius};
use crate::lp::relax::{lp_threshold, MatroidCuts};
use crate::lp::{
    self, Cmp, FractionalSolution, LazyConstraints, LinearConstraint, LinearProgram, SolveOptions,
};
use crate::matroid::Mask;
use crate::oracle::{peel_us, Lottery};
use crate::rational::{self, Rational};

pub const DEFAULT_COLUMN_CAP: usize = 100_000;
pub const COLUMN_CAP_ENV: &str = "ROBUST_CENTER_COLUMN_CAP";

pub fn column_cap_from_env() -> usize {
    std::env::var(COLUMN_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_COLUMN_CAP)
}

/// Vertices within `3r` of `i` that are farther than `3r` from every element of `u`.
pub fn rball(inst: &Instance, i: usize, u: &[usize], r: &Rational) -> Vec<usize> {
    let r3 = r * rational::int(3);
    (0..inst.n)
        .filter(|&j| inst.d[i][j] <= r3 && u.iter().all(|&x| inst.d[x][j] > r3))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConfigKind {
    /// Knapsack: `U` holds the vertices heavier than `eps * B`; heavy
    /// vertices outside `U` are forbidden.
    BigVertices { eps: Rational },
    /// Knapsack: vertices outside `U` with a red ball of `eps * n` or more
    /// vertices are forbidden.
    KnapsackRedBall { eps: Rational },
    /// Matroid analogue of [`ConfigKind::KnapsackRedBall`].
    MatroidRedBall { eps: Rational },
}

impl ConfigKind {
    pub fn eps(&self) -> &Rational {
        match self {
            ConfigKind::BigVertices { eps }
            | ConfigKind::KnapsackRedBall { eps }
            | ConfigKind::MatroidRedBall { eps } => eps,
        }
    }

    fn constraint_name(&self) -> &'static str {
        match self {
            ConfigKind::MatroidRedBall { .. } => "matroid",
            _ => "knapsack",
        }
    }

    /// Largest guessed-set size.
    pub fn max_size(&self) -> usize {
        rational::ceil_usize(&(Rational::one() / self.eps()))
    }
}

#[derive(Clone, Debug)]
pub struct ConfigOptions {
    pub column_cap: usize,
    pub radius: Option<Rational>,
    pub solve: SolveOptions,
}

impl Default for ConfigOptions {
    fn default() -> Self {
        ConfigOptions {
            column_cap: column_cap_from_env(),
            radius: None,
            solve: SolveOptions::default(),
        }
    }
}

/// Column `U` with probability `q` and its normalized solution, in which
/// every client within `r` of `U` is served by its nearest element of `U`.
#[derive(Clone, Debug)]
pub struct ConfigColumn {
    pub u: Vec<usize>,
    pub q: Rational,
    pub solution: FractionalSolution,
}

#[derive(Clone, Debug)]
pub struct ConfigSolution {
    pub radius: Radius,
    pub kind: ConfigKind,
    pub columns: Vec<ConfigColumn>,
    /// Columns enumerated before and after pruning.
    pub enumerated: usize,
    pub kept: usize,
    pub lp: LinearProgram,
}

fn check_kind(inst: &Instance, kind: &ConfigKind) -> Result<()> {
    inst.expect_kind(kind.constraint_name())?;
    let eps = kind.eps();
    if !eps.is_positive() {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    Ok(())
}

/// Whether vertex `i` may open inside column `u`.
pub fn is_allowed(inst: &Instance, kind: &ConfigKind, r: &Rational, u: &[usize], i: usize) -> bool {
    if u.contains(&i) {
        return true;
    }
    match kind {
        ConfigKind::BigVertices { eps } => {
            let (w, b) = inst.weights().expect("knapsack instance");
            w[i] <= eps * b
        }
        ConfigKind::KnapsackRedBall { eps } | ConfigKind::MatroidRedBall { eps } => {
            rational::int(rball(inst, i, u, r).len() as i64) < eps * rational::int(inst.n as i64)
        }
    }
}

/// Guessed sets. Big-vertex columns are the budget-feasible sets of heavy
/// vertices. Red-ball columns are the feasible sets `U` of at most
/// `ceil(1/eps)` vertices that peel to themselves, generated as peeling
/// sequences so that each set appears once.
pub fn enumerate_columns(inst: &Instance, kind: &ConfigKind, r: &Rational, cap: usize) -> Result<Vec<Vec<usize>>> {
    check_kind(inst, kind)?;
    let n = inst.n;
    let mut out: Vec<Vec<usize>> = Vec::new();
    let too_large = |count| Error::ConfigTooLarge { columns: count, cap };
    match kind {
        ConfigKind::BigVertices { eps } => {
            let (w, b) = inst.weights().expect("knapsack instance");
            let big: Vec<usize> = (0..n).filter(|&i| w[i] > eps * b).collect();
            if big.len() > 24 {
                return Err(too_large(usize::MAX));
            }
            for m in 0u32..(1 << big.len()) {
                let u: Vec<usize> = (0..big.len()).filter(|&k| m & (1 << k) != 0).map(|k| big[k]).collect();
                let weight = rational::sum(u.iter().map(|&i| &w[i]));
                if &weight <= b {
                    out.push(u);
                    if out.len() > cap {
                        return Err(too_large(out.len()));
                    }
                }
            }
        }
        ConfigKind::KnapsackRedBall { eps } | ConfigKind::MatroidRedBall { eps } => {
            let threshold = eps * rational::int(n as i64);
            let max = kind.max_size();
            let mut seq = Vec::new();
            grow_peeling(inst, r, &threshold, max, &mut seq, &mut out, cap)?;
        }
    }
    Ok(out)
}

fn big_red(inst: &Instance, i: usize, prefix: &[usize], r: &Rational, threshold: &Rational) -> bool {
    &rational::int(rball(inst, i, prefix, r).len() as i64) >= threshold
}

fn grow_peeling(
    inst: &Instance,
    r: &Rational,
    threshold: &Rational,
    max: usize,
    seq: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    cap: usize,
) -> Result<()> {
    let mut u = seq.clone();
    u.sort_unstable();
    if !set_is_feasible(inst, &u) {
        return Ok(());
    }
    out.push(u);
    if out.len() > cap {
        return Err(Error::ConfigTooLarge {
            columns: out.len(),
            cap,
        });
    }
    if seq.len() == max {
        return Ok(());
    }
    for i in 0..inst.n {
        if seq.contains(&i) || !big_red(inst, i, seq, r, threshold) {
            continue;
        }
        // Peeling picks the smallest qualifying index, so an element added
        // now must not have qualified at any earlier step with a larger pick.
        let consistent = (0..seq.len()).all(|k| seq[k] < i || !big_red(inst, i, &seq[..k], r, threshold));
        if !consistent {
            continue;
        }
        seq.push(i);
        grow_peeling(inst, r, threshold, max, seq, out, cap)?;
        seq.pop();
    }
    Ok(())
}

fn set_is_feasible(inst: &Instance, u: &[usize]) -> bool {
    match &inst.constraint {
        Constraint::Knapsack { .. } | Constraint::Matroid(_) => inst.is_feasible_set(u),
        Constraint::Cardinality { .. } => true,
    }
}

#[derive(Clone, Debug, PartialEq)]
enum YVar {
    Free(usize),
    Pinned,
    Forbidden,
}

/// Variable layout of a configuration LP.
pub struct ConfigLp {
    pub lp: LinearProgram,
    pub columns: Vec<Vec<usize>>,
    q: Vec<usize>,
    y: Vec<Vec<YVar>>,
    s: Vec<Vec<Option<usize>>>,
}

/// Builds the LP over `cols`; with `fair` false the fairness rows are left
/// out and the result is only used for single-column viability checks.
fn build_config_lp(inst: &Instance, kind: &ConfigKind, r: &Rational, cols: &[Vec<usize>], fair: bool) -> ConfigLp {
    let n = inst.n;
    let mut lp = LinearProgram::new();
    let mut qv = Vec::new();
    let mut yv = Vec::new();
    let mut sv = Vec::new();
    let balls: Vec<Vec<usize>> = (0..n).map(|j| inst.ball(j, r)).collect();
    for (c, u) in cols.iter().enumerate() {
        let q = lp.add_var(format!("q{c}"), Rational::zero(), None);
        qv.push(q);
        let mut ys = Vec::with_capacity(n);
        for i in 0..n {
            ys.push(if u.contains(&i) {
                YVar::Pinned
            } else if is_allowed(inst, kind, r, u, i) {
                YVar::Free(lp.add_var(format!("y{c}_{i}"), Rational::zero(), None))
            } else {
                YVar::Forbidden
            });
        }
        let mut ss = Vec::with_capacity(n);
        for j in 0..n {
            let reachable = balls[j].iter().any(|&i| ys[i] != YVar::Forbidden);
            ss.push(reachable.then(|| lp.add_var(format!("s{c}_{j}"), Rational::zero(), None)));
        }
        for j in 0..n {
            let Some(s) = ss[j] else { continue };
            lp.add_constraint(vec![(s, Rational::one()), (q, -Rational::one())], Cmp::Le, Rational::zero());
            if balls[j].iter().any(|i| ys[*i] == YVar::Pinned) {
                continue;
            }
            let mut row = vec![(s, Rational::one())];
            for &i in &balls[j] {
                if let YVar::Free(v) = ys[i] {
                    row.push((v, -Rational::one()));
                }
            }
            lp.add_constraint(row, Cmp::Le, Rational::zero());
        }
        let mut cover: Vec<(usize, Rational)> = ss.iter().flatten().map(|&s| (s, Rational::one())).collect();
        cover.push((q, -rational::int(inst.t as i64)));
        lp.add_constraint(cover, Cmp::Ge, Rational::zero());
        if let Some((w, b)) = inst.weights() {
            let mut row: Vec<(usize, Rational)> = (0..n)
                .filter_map(|i| match ys[i] {
                    YVar::Free(v) => Some((v, w[i].clone())),
                    _ => None,
                })
                .collect();
            let pinned = rational::sum(u.iter().map(|&i| &w[i]));
            row.push((q, pinned - b));
            lp.add_constraint(row, Cmp::Le, Rational::zero());
        }
        yv.push(ys);
        sv.push(ss);
    }
    lp.add_constraint(qv.iter().map(|&q| (q, Rational::one())).collect(), Cmp::Eq, Rational::one());
    if fair {
        for j in 0..n {
            if !inst.p[j].is_positive() {
                continue;
            }
            let row: Vec<(usize, Rational)> = sv.iter().filter_map(|ss| ss[j]).map(|s| (s, Rational::one())).collect();
            lp.add_constraint(row, Cmp::Ge, inst.p[j].clone());
        }
    }
    ConfigLp {
        lp,
        columns: cols.to_vec(),
        q: qv,
        y: yv,
        s: sv,
    }
}

/// Per-column rank rows `y^U(S) <= q_U r(S)`.
struct ColumnRankCuts<'a> {
    blocks: Vec<MatroidCuts<'a>>,
}

impl<'a> ColumnRankCuts<'a> {
    fn new(inst: &'a Instance, layout: &ConfigLp) -> Option<Self> {
        let m = inst.matroid()?;
        let blocks = (0..layout.columns.len())
            .map(|c| MatroidCuts {
                matroid: m,
                vars: layout.y[c]
                    .iter()
                    .map(|y| match y {
                        YVar::Free(v) => Some(*v),
                        YVar::Pinned => Some(layout.q[c]),
                        YVar::Forbidden => None,
                    })
                    .collect(),
                fixed: vec![Rational::zero(); inst.n],
                scale: Some(layout.q[c]),
            })
            .collect();
        Some(ColumnRankCuts { blocks })
    }
}

impl LazyConstraints for ColumnRankCuts<'_> {
    fn cuts(&mut self, x: &[Rational]) -> Result<Vec<LinearConstraint>> {
        let mut out = Vec::new();
        for b in self.blocks.iter_mut() {
            out.extend(b.cuts(x)?);
        }
        Ok(out)
    }
}

fn solve_layout(inst: &Instance, layout: &mut ConfigLp, opts: &SolveOptions) -> Result<Option<Vec<Rational>>> {
    let mut lp = std::mem::take(&mut layout.lp);
    let res = match ColumnRankCuts::new(inst, layout) {
        Some(mut cuts) => lp::solve_with_cuts(&mut lp, &mut cuts, opts),
        None => lp::solve(&lp, opts),
    };
    layout.lp = lp;
    match res {
        Ok(sol) => Ok(Some(sol.x)),
        Err(Error::Infeasible) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Whether column `u` alone (with `q_U = 1`, ignoring fairness) is feasible.
pub fn column_is_viable(inst: &Instance, kind: &ConfigKind, r: &Rational, u: &[usize]) -> Result<bool> {
    let mut layout = build_config_lp(inst, kind, r, &[u.to_vec()], false);
    Ok(solve_layout(inst, &mut layout, &SolveOptions::default())?.is_some())
}

/// Solves the configuration LP at radius `r`; `None` when infeasible.
pub fn solve_config(inst: &Instance, kind: &ConfigKind, r: &Radius, opts: &ConfigOptions) -> Result<Option<ConfigSolution>> {
    let all = enumerate_columns(inst, kind, &r.value, opts.column_cap)?;
    let enumerated = all.len();
    let mut cols = Vec::new();
    for u in all {
        if column_is_viable(inst, kind, &r.value, &u)? {
            cols.push(u);
        }
    }
    if cols.is_empty() {
        return Ok(None);
    }
    let mut layout = build_config_lp(inst, kind, &r.value, &cols, true);
    let Some(x) = solve_layout(inst, &mut layout, &opts.solve)? else {
        return Ok(None);
    };
    let mut columns = Vec::new();
    for c in 0..cols.len() {
        let q = x[layout.q[c]].clone();
        if !q.is_positive() {
            continue;
        }
        columns.push(ConfigColumn {
            u: cols[c].clone(),
            solution: normalize_column(inst, &r.value, &layout, &x, c, &q)?,
            q,
        });
    }
    let kept = cols.len();
    Ok(Some(ConfigSolution {
        radius: r.clone(),
        kind: kind.clone(),
        columns,
        enumerated,
        kept,
        lp: layout.lp,
    }))
}

fn normalize_column(inst: &Instance, r: &Rational, layout: &ConfigLp, x: &[Rational], c: usize, q: &Rational) -> Result<FractionalSolution> {
    let n = inst.n;
    let u = &layout.columns[c];
    let one = Rational::one();
    let y: Vec<Rational> = (0..n)
        .map(|i| match layout.y[c][i] {
            YVar::Pinned => one.clone(),
            YVar::Forbidden => Rational::zero(),
            YVar::Free(v) => {
                let val = &x[v] / q;
                if val > one {
                    one.clone()
                } else {
                    val
                }
            }
        })
        .collect();
    let s: Vec<Rational> = (0..n)
        .map(|j| layout.s[c][j].map_or_else(Rational::zero, |v| &x[v] / q))
        .collect();
    let pins: Vec<Option<usize>> = (0..n)
        .map(|j| {
            u.iter()
                .copied()
                .filter(|&i| &inst.d[i][j] <= r)
                .min_by(|&a, &b| inst.d[a][j].cmp(&inst.d[b][j]).then(a.cmp(&b)))
        })
        .collect();
    FractionalSolution::with_pins(inst, r, y, s, &pins)
}

/// Scans candidate radii upward from the plain fair relaxation threshold and
/// returns the first radius with a feasible configuration LP. Feasibility is
/// not monotone in the radius (the red balls change), so the scan is linear.
pub fn config_threshold(inst: &Instance, kind: &ConfigKind, opts: &ConfigOptions) -> Result<ConfigSolution> {
    check_kind(inst, kind)?;
    if let Some(r) = &opts.radius {
        let radius = inst.radius_of(r).unwrap_or(Radius {
            value: r.clone(),
            index: usize::MAX,
        });
        return solve_config(inst, kind, &radius, opts)?.ok_or(Error::NoFeasibleRadius);
    }
    let (start, _) = lp_threshold(inst, true)?;
    for radius in inst.candidate_radii().into_iter().skip(start.index) {
        if let Some(sol) = solve_config(inst, kind, &radius, opts)? {
            return Ok(sol);
        }
    }
    Err(Error::NoFeasibleRadius)
}

/// Guessed set of center set `s` in the witness built from a lottery.
pub fn guess_of(inst: &Instance, kind: &ConfigKind, r: &Rational, s: &[usize]) -> Vec<usize> {
    match kind {
        ConfigKind::BigVertices { eps } => {
            let (w, b) = inst.weights().expect("knapsack instance");
            s.iter().copied().filter(|&i| w[i] > eps * b).collect()
        }
        _ => peel_us(inst, s, r, kind.eps()),
    }
}

/// Builds the configuration LP point induced by an exact lottery at its
/// radius and returns the constraints it violates (empty means the
/// configuration polytope is nonempty, with an explicit witness).
pub fn witness_violations(inst: &Instance, kind: &ConfigKind, lottery: &Lottery, cap: usize) -> Result<Vec<String>> {
    check_kind(inst, kind)?;
    let r = &lottery.radius;
    let cols = enumerate_columns(inst, kind, r, cap)?;
    let layout = build_config_lp(inst, kind, r, &cols, true);
    let mut x = vec![Rational::zero(); layout.lp.num_vars()];
    let mut v = Vec::new();
    for term in &lottery.support {
        let mut u = guess_of(inst, kind, r, &term.centers);
        u.sort_unstable();
        let Some(c) = cols.iter().position(|col| col == &u) else {
            v.push(format!("guessed set {u:?} is not an enumerated column"));
            continue;
        };
        x[layout.q[c]] += &term.weight;
        for &i in &term.centers {
            match layout.y[c][i] {
                YVar::Free(var) => x[var] += &term.weight,
                YVar::Pinned => {}
                YVar::Forbidden => v.push(format!("center {i} is forbidden in column {u:?}")),
            }
        }
        for (j, covered) in inst.covered(&term.centers, r).into_iter().enumerate() {
            if covered {
                match layout.s[c][j] {
                    Some(var) => x[var] += &term.weight,
                    None => v.push(format!("client {j} unreachable in column {u:?}")),
                }
            }
        }
    }
    v.extend(layout.lp.violations(&x));
    if let Some(m) = inst.matroid() {
        for c in 0..cols.len() {
            let q = &x[layout.q[c]];
            let y: Vec<Rational> = (0..inst.n)
                .map(|i| match layout.y[c][i] {
                    YVar::Free(var) => x[var].clone(),
                    YVar::Pinned => q.clone(),
                    YVar::Forbidden => Rational::zero(),
                })
                .collect();
            let (_, val) = m.separate_scaled(q, &y)?;
            if val.is_negative() {
                v.push(format!("rank constraint violated in column {:?}", cols[c]));
            }
        }
    }
    Ok(v)
}

/// Probability mass of each guessed set, as a check on the column weights.
pub fn column_masses(sol: &ConfigSolution) -> Vec<(Mask, Rational)> {
    sol.columns.iter().map(|c| (set_mask(&c.u), c.q.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::canonical_line;
    use crate::oracle::exact_lottery_lp;
    use crate::rational::{int, ratio};

    fn knap_line(weights: Vec<Rational>, t: usize) -> Instance {
        let base = canonical_line(1, t);
        Instance::new(
            base.d,
            Constraint::Knapsack {
                weights,
                budget: int(1),
            },
            t,
            vec![int(0); 4],
        )
        .unwrap()
    }

    #[test]
    fn rball_examples() {
        let inst = canonical_line(2, 4);
        assert!(rball(&inst, 2, &[0, 1, 2, 3], &int(1)).is_empty());
        assert_eq!(rball(&inst, 2, &[], &int(1)), vec![2, 3]);
        assert_eq!(rball(&inst, 2, &[0], &int(1)), vec![2, 3]);
        assert_eq!(rball(&inst, 0, &[], &int(1)), inst.ball(0, &int(3)));
    }

    #[test]
    fn no_big_vertices_gives_the_empty_column() {
        let inst = knap_line(vec![ratio(1, 10); 4], 4);
        let kind = ConfigKind::BigVertices { eps: ratio(1, 4) };
        assert_eq!(enumerate_columns(&inst, &kind, &int(1), 10).unwrap(), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn mandatory_big_vertex_takes_all_mass() {
        // covering {0, 1} needs vertex 0 or 1; only vertex 0 is affordable
        // together with 2 or 3, and vertex 1 is too heavy to pair.
        let inst = knap_line(vec![ratio(1, 2), int(1), ratio(1, 2), int(1)], 4);
        let kind = ConfigKind::BigVertices { eps: ratio(1, 4) };
        let opts = ConfigOptions {
            column_cap: 100,
            ..Default::default()
        };
        let sol = solve_config(&inst, &kind, &inst.radius_of(&int(1)).unwrap(), &opts).unwrap().unwrap();
        assert_eq!(sol.columns.len(), 1);
        assert_eq!(sol.columns[0].u, vec![0, 2]);
        assert_eq!(sol.columns[0].q, int(1));
    }

    #[test]
    fn peeling_columns_are_self_peeling() {
        let mut inst = knap_line(vec![ratio(1, 4); 4], 4);
        inst.p = vec![ratio(1, 2); 4];
        let kind = ConfigKind::KnapsackRedBall { eps: ratio(1, 4) };
        let cols = enumerate_columns(&inst, &kind, &int(1), 1000).unwrap();
        for u in &cols {
            assert_eq!(&peel_us(&inst, u, &int(1), kind.eps()), u);
        }
        // every 2-subset with one point per group peels to itself, plus the
        // singletons and the empty set
        assert_eq!(cols.len(), 1 + 4 + 4);
    }

    #[test]
    fn column_cap_is_enforced() {
        let inst = knap_line(vec![ratio(1, 4); 4], 4);
        let kind = ConfigKind::KnapsackRedBall { eps: ratio(1, 4) };
        assert!(matches!(
            enumerate_columns(&inst, &kind, &int(1), 3),
            Err(Error::ConfigTooLarge { .. })
        ));
    }

    #[test]
    fn lottery_witness_is_feasible() {
        let mut inst = knap_line(vec![ratio(1, 2); 4], 2);
        inst.p = vec![ratio(1, 2); 4];
        let lot = exact_lottery_lp(&inst, &int(1)).unwrap().unwrap();
        for kind in [
            ConfigKind::BigVertices { eps: ratio(1, 4) },
            ConfigKind::KnapsackRedBall { eps: ratio(1, 8) },
        ] {
            assert!(witness_violations(&inst, &kind, &lot, 1000).unwrap().is_empty());
            let sol = solve_config(&inst, &kind, &inst.radius_of(&int(1)).unwrap(), &ConfigOptions::default())
                .unwrap()
                .unwrap();
            let total = sol.columns.iter().fold(Rational::zero(), |a, c| a + &c.q);
            assert_eq!(total, int(1));
            for c in &sol.columns {
                assert!(c.solution.violations(&inst, false).is_empty());
            }
        }
    }
}

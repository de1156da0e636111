//! Pseudo fair rounding for matroid center: the cluster openings are moved
//! along cycles and paths of the rounding graph until they are integral,
//! ending with a basis plus at most one extra center.

use num_traits::{One, Signed, Zero};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invariant, Error, Result};
use crate::filtering::{rfilter, FilterOutput};
use crate::instance::Instance;
use crate::lp::relax::MatroidCuts;
use crate::lp::{self, Cmp, FractionalSolution, LinearProgram, SolveOptions};
use crate::matroid::{elems_of, mask_of, sum_over, FaceDescription, Mask, Matroid};
use crate::rational::{self, Rational};

use super::graph::{PathKind, PathSpec, RoundingGraph, Side};

/// Which routine handled an outer iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RoundingCase {
    Cycle,
    SinglePath,
    TwoPaths,
    FinalPath,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PseudoOutcome {
    /// Basis elements plus the extra center, sorted.
    pub centers: Vec<usize>,
    pub extra: Option<usize>,
    pub iterations: usize,
    pub cases: Vec<RoundingCase>,
    /// `min(1, |centers ∩ F_k|)` for each selected cluster.
    #[serde(with = "crate::rational::serde_rational::vec")]
    pub cluster_opened: Vec<Rational>,
}

/// Precomputed state of the rounding: filtered clusters, their counts and
/// the starting point `y'` (the assignment restricted to the clusters).
#[derive(Clone, Debug)]
pub struct PseudoRounding {
    matroid: Matroid,
    pub filter: FilterOutput,
    /// 1-based cluster of each element, 0 when outside every cluster.
    pub cluster_of: Vec<usize>,
    /// `clusters[k]` is the cluster of `filter.centers[k]`.
    pub clusters: Vec<Mask>,
    pub c: Vec<Rational>,
    pub initial: Vec<Rational>,
}

fn alternating(n: usize, labels: &[usize], first: Rational) -> Vec<Rational> {
    let mut dir = vec![Rational::zero(); n];
    let mut sign = first;
    for &v in labels {
        dir[v] += &sign;
        sign = -sign;
    }
    dir
}

fn axpy(y: &[Rational], a: &Rational, dir: &[Rational]) -> Vec<Rational> {
    y.iter().zip(dir).map(|(v, d)| v + a * d).collect()
}

impl PseudoRounding {
    pub fn new(inst: &Instance, sol: &FractionalSolution) -> Result<PseudoRounding> {
        let m = inst.matroid().ok_or(Error::WrongConstraintKind {
            expected: "matroid",
            found: inst.constraint.kind_name(),
        })?;
        let filter = rfilter(sol);
        let n = inst.n;
        let mut cluster_of = vec![0; n];
        let mut initial = vec![Rational::zero(); n];
        let mut clusters = Vec::new();
        for (k, &j) in filter.centers.iter().enumerate() {
            for &i in &filter.clusters[j] {
                cluster_of[i] = k + 1;
                initial[i] = sol.x[i][j].clone();
            }
            clusters.push(mask_of(&filter.clusters[j]));
        }
        let c = filter.counts.iter().map(|&c| rational::int(c as i64)).collect();
        let out = PseudoRounding {
            matroid: m.clone(),
            filter,
            cluster_of,
            clusters,
            c,
            initial,
        };
        invariant!(
            m.independence_violation(&out.initial)?.is_none(),
            "restricted openings leave the independence polytope"
        );
        Ok(out)
    }

    pub fn matroid(&self) -> &Matroid {
        &self.matroid
    }

    pub fn cluster_masses(&self, y: &[Rational]) -> Vec<Rational> {
        self.clusters.iter().map(|&f| sum_over(y, f)).collect()
    }

    /// `f(y) = sum_k c_k y(F_k)`.
    pub fn functional(&self, y: &[Rational]) -> Rational {
        self.cluster_masses(y)
            .iter()
            .zip(&self.c)
            .fold(Rational::zero(), |a, (m, c)| a + m * c)
    }

    fn cluster_c(&self, s: Side) -> Result<&Rational> {
        match s {
            Side::Right(k) if k >= 1 => Ok(&self.c[k - 1]),
            _ => Err(Error::InternalInvariantViolation(format!("path endpoint {s:?} is not a cluster"))),
        }
    }

    /// Largest step along `dir` inside the independence polytope, the unit
    /// box and the cluster caps.
    pub fn step(&self, y: &[Rational], dir: &[Rational]) -> Result<(Vec<Rational>, Rational)> {
        let (mut next, mut delta) = self.matroid.max_step(y, dir)?;
        for &f in &self.clusters {
            let rise = sum_over(dir, f);
            if rise.is_positive() {
                let room = (Rational::one() - sum_over(y, f)) / &rise;
                if room < delta {
                    delta = room;
                    next = axpy(y, &delta, dir);
                }
            }
        }
        Ok((next, delta))
    }

    /// Alternating `-1, +1, ...` around a cycle; every tight set and every
    /// cluster mass is unchanged.
    pub fn round_cycle(&self, y: &[Rational], path: &PathSpec) -> Result<Vec<Rational>> {
        invariant!(path.kind == PathKind::Cycle && path.labels.len() % 2 == 0, "not an even cycle");
        let dir = alternating(y.len(), &path.labels, -Rational::one());
        Ok(self.step(y, &dir)?.0)
    }

    /// Alternating `+1, -1, ..., +1` from the non-tight remainder to a
    /// cluster; that cluster gains mass and the rest are unchanged.
    pub fn round_single_path(&self, y: &[Rational], path: &PathSpec) -> Result<Vec<Rational>> {
        invariant!(path.start == Side::Left(0), "path starts at tight set {:?}", path.start);
        invariant!(path.labels.len() % 2 == 1, "left-to-right path of even length {}", path.labels.len());
        let dir = alternating(y.len(), &path.labels, Rational::one());
        Ok(self.step(y, &dir)?.0)
    }

    /// Composite move along two cluster-to-cluster paths that keeps `f`
    /// fixed, taken in either direction with probabilities making the
    /// expected change zero.
    pub fn round_two_paths(&self, y: &[Rational], p1: &PathSpec, p2: &PathSpec, rng: &mut ChaCha8Rng) -> Result<Vec<Rational>> {
        let orient = |p: &PathSpec| -> Result<(PathSpec, Rational)> {
            let (cs, ce) = (self.cluster_c(p.start)?, self.cluster_c(p.end)?);
            Ok(if cs >= ce { (p.clone(), cs - ce) } else { (p.reversed(), ce - cs) })
        };
        let (mut a, mut da) = orient(p1)?;
        let (mut b, mut db) = orient(p2)?;
        if db.is_zero() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut da, &mut db);
        }
        let coef = if da.is_zero() { Rational::zero() } else { &da / &db };
        let n = y.len();
        let da_dir = alternating(n, &a.labels, Rational::one());
        let db_dir = alternating(n, &b.labels, Rational::one());
        let dir: Vec<Rational> = da_dir.iter().zip(&db_dir).map(|(x, z)| x - &coef * z).collect();
        invariant!(dir.iter().any(|d| !d.is_zero()), "composite direction vanished");
        let neg: Vec<Rational> = dir.iter().map(|d| -d).collect();
        let (y1, d1) = self.step(y, &dir)?;
        let (y2, d2) = self.step(y, &neg)?;
        let total = &d1 + &d2;
        if total.is_zero() {
            return Ok(y1);
        }
        Ok(if rational::bernoulli(rng, &(&d1 / &total)) { y2 } else { y1 })
    }

    /// Integral extreme point maximizing `f` over the current face with all
    /// off-path coordinates fixed and on-path clusters capped at one.
    pub fn round_final_path(&self, y: &[Rational], face: &FaceDescription) -> Result<Vec<Rational>> {
        let n = y.len();
        let mut lp = LinearProgram::new();
        let mut var = vec![None; n];
        for v in 0..n {
            if rational::is_fractional(&y[v]) {
                var[v] = Some(lp.add_var(format!("z{v}"), Rational::zero(), Some(Rational::one())));
            }
        }
        let split = |mask: Mask| -> (Vec<(usize, Rational)>, Rational) {
            let mut coeffs = Vec::new();
            let mut fixed = Rational::zero();
            for e in elems_of(mask) {
                match var[e] {
                    Some(j) => coeffs.push((j, Rational::one())),
                    None => fixed += &y[e],
                }
            }
            (coeffs, fixed)
        };
        for (&l, &r) in face.chain.iter().zip(&face.chain_ranks) {
            let (coeffs, fixed) = split(l);
            if !coeffs.is_empty() {
                lp.add_constraint(coeffs, Cmp::Eq, rational::int(r as i64) - fixed);
            }
        }
        let mut objective = Vec::new();
        for (k, &f) in self.clusters.iter().enumerate() {
            let (coeffs, fixed) = split(f);
            if coeffs.is_empty() {
                continue;
            }
            objective.extend(coeffs.iter().map(|(j, _)| (*j, self.c[k].clone())));
            lp.add_constraint(coeffs, Cmp::Le, Rational::one() - fixed);
        }
        lp.set_objective(objective);
        let mut cuts = MatroidCuts {
            matroid: &self.matroid,
            vars: var.clone(),
            fixed: y.to_vec(),
            scale: None,
        };
        let sol = lp::solve_with_cuts(&mut lp, &mut cuts, &SolveOptions::default())?;
        let mut out = y.to_vec();
        for v in 0..n {
            if let Some(j) = var[v] {
                out[v] = sol.x[j].clone();
            }
        }
        invariant!(
            out.iter().all(rational::is_zero_or_one),
            "final path extreme point is fractional"
        );
        Ok(out)
    }

    fn progress(y: &[Rational], face: &FaceDescription) -> (usize, usize) {
        (y.iter().filter(|v| rational::is_zero_or_one(v)).count(), face.chain.len())
    }

    /// One full run of the rounding loop.
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> Result<PseudoOutcome> {
        let n = self.initial.len();
        let mut y = self.initial.clone();
        let mut cases = Vec::new();
        let mut on_path: Vec<usize> = Vec::new();
        for v in 0..n {
            invariant!(self.cluster_of[v] != 0 || y[v].is_zero(), "element {v} outside the clusters is open");
        }
        loop {
            let face = self.matroid.face_decomposition(&y)?;
            let h = RoundingGraph::build(&face, &self.cluster_of, self.clusters.len() + 1, &y);
            if h.is_empty() {
                break;
            }
            invariant!(cases.len() < n, "rounding exceeded {n} iterations");
            let before = Self::progress(&y, &face);
            let f_before = self.functional(&y);
            let (case, next) = if let Some(cycle) = h.find_cycle() {
                (RoundingCase::Cycle, self.round_cycle(&y, &cycle)?)
            } else {
                let paths = h.maximal_paths();
                if let Some(p) = paths.iter().find(|p| matches!(p.start, Side::Left(i) if i > 0)) {
                    return Err(Error::InternalInvariantViolation(format!(
                        "tight set {:?} is a leaf of the rounding graph",
                        p.start
                    )));
                }
                let rr: Vec<&PathSpec> = paths.iter().filter(|p| p.kind == PathKind::RightRight).collect();
                if let Some(p) = paths.iter().find(|p| p.kind == PathKind::LeftRight) {
                    (RoundingCase::SinglePath, self.round_single_path(&y, p)?)
                } else if rr.len() >= 2 {
                    let next = self.round_two_paths(&y, rr[0], rr[1], rng)?;
                    invariant!(self.functional(&next) == f_before, "two-path move changed f");
                    (RoundingCase::TwoPaths, next)
                } else if rr.len() == 1 && rr[0].labels.len() == h.edges.len() {
                    on_path = rr[0].labels.iter().map(|&v| self.cluster_of[v]).collect();
                    (RoundingCase::FinalPath, self.round_final_path(&y, &face)?)
                } else {
                    return Err(Error::InternalInvariantViolation(
                        "no rounding case applies to the graph".into(),
                    ));
                }
            };
            cases.push(case);
            invariant!(self.functional(&next) >= f_before, "f decreased in {case:?}");
            for (k, m) in self.cluster_masses(&next).iter().enumerate() {
                invariant!(m <= &Rational::one(), "cluster {k} exceeds mass one");
            }
            if case == RoundingCase::FinalPath {
                y = next;
                break;
            }
            for &l in &face.chain {
                invariant!(
                    sum_over(&next, l) == rational::int(self.matroid.rank(l) as i64),
                    "tight set {:?} lost after {case:?}",
                    elems_of(l)
                );
            }
            let after_face = self.matroid.face_decomposition(&next)?;
            invariant!(
                Self::progress(&next, &after_face) > before,
                "no progress in {case:?}"
            );
            y = next;
        }
        self.finish(&y, &on_path, cases)
    }

    /// Extends the support to a basis, preferring unopened on-path clusters,
    /// then opens the smallest element of the one cluster still unopened.
    fn finish(&self, y: &[Rational], on_path: &[usize], cases: Vec<RoundingCase>) -> Result<PseudoOutcome> {
        let n = y.len();
        let mut s: Mask = (0..n).filter(|&v| y[v].is_one()).fold(0, |m, v| m | (1 << v));
        invariant!(self.matroid.is_independent(s), "rounded support is dependent");
        let mut unmatched: Vec<usize> = on_path.to_vec();
        unmatched.sort_unstable();
        unmatched.dedup();
        unmatched.retain(|&k| self.clusters[k - 1] & s == 0);
        let mut order: Vec<usize> = unmatched.iter().flat_map(|&k| elems_of(self.clusters[k - 1])).collect();
        order.extend(0..n);
        for v in order {
            if s & (1 << v) == 0 && self.matroid.is_independent(s | (1 << v)) {
                s |= 1 << v;
            }
        }
        invariant!(self.matroid.is_basis(s), "extension is not a basis");
        unmatched.retain(|&k| self.clusters[k - 1] & s == 0);
        invariant!(unmatched.len() <= 1, "{} on-path clusters left unopened", unmatched.len());
        let extra = unmatched.first().map(|&k| elems_of(self.clusters[k - 1])[0]);
        if let Some(e) = extra {
            s |= 1 << e;
        }
        let cluster_opened = self
            .clusters
            .iter()
            .map(|&f| if f & s != 0 { Rational::one() } else { Rational::zero() })
            .collect();
        Ok(PseudoOutcome {
            centers: elems_of(s),
            extra,
            iterations: cases.len(),
            cases,
            cluster_opened,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroid::MatroidSpec;
    use crate::rational::{int, ratio};
    use crate::sampler::draw_rng;

    /// Hand-built rounding state: `clusters` as element lists, all counts 1.
    fn state(m: Matroid, clusters: &[&[usize]], y: Vec<Rational>) -> PseudoRounding {
        let n = y.len();
        let mut cluster_of = vec![0; n];
        for (k, f) in clusters.iter().enumerate() {
            for &v in *f {
                cluster_of[v] = k + 1;
            }
        }
        PseudoRounding {
            matroid: m,
            filter: FilterOutput {
                centers: vec![],
                clusters: vec![],
                counts: vec![],
                s: vec![],
                absorbed_by: vec![],
            },
            cluster_of,
            clusters: clusters.iter().map(|f| mask_of(f)).collect(),
            c: vec![int(1); clusters.len()],
            initial: y,
        }
    }

    fn partition(blocks: Vec<Vec<usize>>, n: usize) -> Matroid {
        let caps = vec![1; blocks.len()];
        Matroid::new(MatroidSpec::Partition { blocks, caps }, n).unwrap()
    }

    #[test]
    fn four_cycle_conserves_clusters_and_tight_sets() {
        // blocks {0,1} {2,3} are tight; clusters {0,2} {1,3}
        let m = partition(vec![vec![0, 1], vec![2, 3]], 4);
        let r = state(m, &[&[0, 2], &[1, 3]], vec![ratio(1, 2); 4]);
        let face = r.matroid.face_decomposition(&r.initial).unwrap();
        let h = RoundingGraph::build(&face, &r.cluster_of, 3, &r.initial);
        let cycle = h.find_cycle().unwrap();
        let next = r.round_cycle(&r.initial, &cycle).unwrap();
        assert_eq!(r.cluster_masses(&next), r.cluster_masses(&r.initial));
        assert!(next.iter().all(rational::is_zero_or_one));
        assert_eq!(sum_over(&next, 0b0011), int(1));
        assert_eq!(sum_over(&next, 0b1100), int(1));
    }

    #[test]
    fn single_edge_path_raises_cluster() {
        let m = Matroid::new(MatroidSpec::Uniform { k: 2 }, 2).unwrap();
        let r = state(m, &[&[0], &[1]], vec![ratio(1, 3), int(1)]);
        let face = r.matroid.face_decomposition(&r.initial).unwrap();
        let h = RoundingGraph::build(&face, &r.cluster_of, 3, &r.initial);
        let paths = h.maximal_paths();
        assert_eq!(paths.len(), 1);
        let next = r.round_single_path(&r.initial, &paths[0]).unwrap();
        assert_eq!(next, vec![int(1), int(1)]);
    }

    #[test]
    fn minimal_final_path_opens_an_extra_center() {
        // rank-1 uniform: one tight set {0, 1} split over two clusters
        let m = Matroid::new(MatroidSpec::Uniform { k: 1 }, 2).unwrap();
        let r = state(m, &[&[0], &[1]], vec![ratio(1, 2), ratio(1, 2)]);
        let out = r.draw(&mut draw_rng(0, 0)).unwrap();
        assert_eq!(out.cases, vec![RoundingCase::FinalPath]);
        assert_eq!(out.centers, vec![0, 1]);
        let extra = out.extra.unwrap();
        let basis: Vec<usize> = out.centers.iter().copied().filter(|&v| v != extra).collect();
        assert!(r.matroid.is_basis(mask_of(&basis)));
    }

    #[test]
    fn integral_start_skips_the_loop() {
        let m = Matroid::new(MatroidSpec::Uniform { k: 2 }, 3).unwrap();
        let r = state(m, &[&[0], &[1], &[2]], vec![int(1), int(0), int(0)]);
        let out = r.draw(&mut draw_rng(0, 0)).unwrap();
        assert!(out.cases.is_empty());
        assert_eq!(out.extra, None);
        assert_eq!(out.centers.len(), 2);
    }

    #[test]
    fn two_paths_keep_f_and_mean() {
        // tight blocks {0,1} and {2,3}; clusters {0} {1} {2} {3}
        let m = partition(vec![vec![0, 1], vec![2, 3]], 4);
        let mut r = state(m, &[&[0], &[1], &[2], &[3]], vec![ratio(1, 2); 4]);
        r.c = vec![int(3), int(1), int(2), int(1)];
        let face = r.matroid.face_decomposition(&r.initial).unwrap();
        let h = RoundingGraph::build(&face, &r.cluster_of, 5, &r.initial);
        let rr = h.maximal_paths();
        assert_eq!(rr.len(), 2);
        let f0 = r.functional(&r.initial);
        let mut mean = vec![Rational::zero(); 4];
        let trials = 4000;
        for i in 0..trials {
            let next = r.round_two_paths(&r.initial, &rr[0], &rr[1], &mut draw_rng(8, i)).unwrap();
            assert_eq!(r.functional(&next), f0);
            for (a, b) in mean.iter_mut().zip(&next) {
                *a += b;
            }
        }
        for v in mean {
            let avg = rational::to_f64(&v) / trials as f64;
            assert!((avg - 0.5).abs() < 0.05, "{avg}");
        }
    }
}

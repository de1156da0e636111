//! Matroid rank oracles and the polytope primitives built on them.
//!
//! Ground sets are small (at most [`MAX_GROUND`] elements) and subsets are
//! bit masks. Brute-force routines enumerate all `2^n` subsets with integer
//! subset sums; uniform and partition matroids have closed-form separation.

use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

pub type Mask = u32;

pub const MAX_GROUND: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MatroidSpec {
    Uniform {
        k: usize,
    },
    Partition {
        blocks: Vec<Vec<usize>>,
        caps: Vec<usize>,
    },
    Graphic {
        n_nodes: usize,
        edges: Vec<[usize; 2]>,
    },
    /// Listed sets and all their subsets are independent.
    Explicit {
        independent_sets: Vec<Vec<usize>>,
    },
}

impl MatroidSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            MatroidSpec::Uniform { .. } => "uniform",
            MatroidSpec::Partition { .. } => "partition",
            MatroidSpec::Graphic { .. } => "graphic",
            MatroidSpec::Explicit { .. } => "explicit",
        }
    }
}

#[derive(Debug)]
enum Kind {
    Uniform(usize),
    Partition(Vec<(Mask, usize)>),
    Graphic(usize, Vec<[usize; 2]>),
    Explicit(Vec<Mask>),
}

/// Rank oracle over the ground set `{0, .., n-1}`.
#[derive(Debug)]
pub struct Matroid {
    spec: MatroidSpec,
    n: usize,
    kind: Kind,
    table: OnceLock<Vec<u8>>,
}

impl Clone for Matroid {
    fn clone(&self) -> Self {
        Matroid::new(self.spec.clone(), self.n).expect("spec was validated")
    }
}

impl PartialEq for Matroid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.spec == other.spec
    }
}

/// Chain of tight sets and the disjoint sets derived from it.
///
/// `o_sets[i] = chain[i] \ chain[i-1]` and `b[i] = r(chain[i]) - r(chain[i-1])`.
/// `free` is the complement of the last chain element; it is empty exactly
/// when the point lies in the base polytope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceDescription {
    pub chain: Vec<Mask>,
    pub chain_ranks: Vec<usize>,
    pub o_sets: Vec<Mask>,
    pub b: Vec<usize>,
    pub free: Mask,
    pub zero_set: Mask,
}

impl FaceDescription {
    /// Index of the disjoint set containing element `e` (0 means `free`,
    /// `i >= 1` means `o_sets[i-1]`).
    pub fn owner(&self, e: usize) -> usize {
        let bit = 1 << e;
        if self.free & bit != 0 {
            return 0;
        }
        self.o_sets
            .iter()
            .position(|&o| o & bit != 0)
            .map(|i| i + 1)
            .expect("o_sets and free partition the ground set")
    }
}

pub fn mask_of(elems: &[usize]) -> Mask {
    elems.iter().fold(0, |m, &e| m | (1 << e))
}

pub fn elems_of(mask: Mask) -> Vec<usize> {
    (0..32).filter(|&i| mask & (1 << i) != 0).collect()
}

/// `a` before `b` in the order: smaller cardinality first, then the set
/// containing the smallest element of the symmetric difference.
pub fn set_order_less(a: Mask, b: Mask) -> bool {
    let (ca, cb) = (a.count_ones(), b.count_ones());
    if ca != cb {
        return ca < cb;
    }
    let diff = a ^ b;
    diff != 0 && a & diff & diff.wrapping_neg() != 0
}

trait Scalar:
    Clone + Ord + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + From<i64>
{
}
impl Scalar for i128 {}
impl Scalar for BigInt {}

/// Integer numerators of a rational vector over a common denominator.
struct Scaled {
    den: BigInt,
    nums: Vec<BigInt>,
}

impl Scaled {
    fn new(values: &[Rational]) -> Scaled {
        let den = rational::common_denominator(values);
        let nums = rational::scaled_numerators(values, &den);
        Scaled { den, nums }
    }

    fn bits(&self) -> u64 {
        let m = self.nums.iter().map(|v| v.bits()).max().unwrap_or(0);
        m.max(self.den.bits())
    }

    fn as_i128(&self) -> Vec<i128> {
        self.nums
            .iter()
            .map(|v| i128::try_from(v).expect("checked bit length"))
            .collect()
    }
}

fn subset_sums<T: Scalar>(elems: &[T]) -> Vec<T> {
    let n = elems.len();
    let mut out = vec![T::from(0); 1 << n];
    for mask in 1usize..(1 << n) {
        let low = mask.trailing_zeros() as usize;
        out[mask] = out[mask & (mask - 1)].clone() + elems[low].clone();
    }
    out
}

impl Matroid {
    pub fn new(spec: MatroidSpec, n: usize) -> Result<Matroid> {
        let bad = |msg: String| Err(Error::InvalidInstance(format!("matroid: {msg}")));
        if n > MAX_GROUND {
            return Err(Error::TooLarge {
                count: n,
                cap: MAX_GROUND,
            });
        }
        let kind = match &spec {
            MatroidSpec::Uniform { k } => {
                if *k > n {
                    return bad(format!("uniform rank {k} exceeds ground size {n}"));
                }
                Kind::Uniform(*k)
            }
            MatroidSpec::Partition { blocks, caps } => {
                if blocks.len() != caps.len() {
                    return bad("blocks and caps differ in length".into());
                }
                let mut seen: Mask = 0;
                let mut parts = Vec::new();
                for (block, &cap) in blocks.iter().zip(caps) {
                    if block.iter().any(|&e| e >= n) {
                        return bad("block element outside ground set".into());
                    }
                    let m = mask_of(block);
                    if m & seen != 0 || m.count_ones() as usize != block.len() {
                        return bad("blocks overlap".into());
                    }
                    seen |= m;
                    parts.push((m, cap));
                }
                if seen != full_mask(n) {
                    return bad("blocks do not cover the ground set".into());
                }
                Kind::Partition(parts)
            }
            MatroidSpec::Graphic { n_nodes, edges } => {
                if edges.len() != n {
                    return bad(format!("graphic matroid has {} edges, ground size {n}", edges.len()));
                }
                if edges.iter().any(|e| e[0] >= *n_nodes || e[1] >= *n_nodes) {
                    return bad("edge endpoint out of range".into());
                }
                Kind::Graphic(*n_nodes, edges.clone())
            }
            MatroidSpec::Explicit { independent_sets } => {
                let mut masks = Vec::new();
                for s in independent_sets {
                    if s.iter().any(|&e| e >= n) {
                        return bad("independent set element outside ground set".into());
                    }
                    masks.push(mask_of(s));
                }
                Kind::Explicit(masks)
            }
        };
        Ok(Matroid {
            spec,
            n,
            kind,
            table: OnceLock::new(),
        })
    }

    pub fn spec(&self) -> &MatroidSpec {
        &self.spec
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn ground(&self) -> Mask {
        full_mask(self.n)
    }

    pub fn rank(&self, s: Mask) -> usize {
        if let Some(t) = self.table.get() {
            return t[s as usize] as usize;
        }
        self.rank_direct(s)
    }

    fn rank_direct(&self, s: Mask) -> usize {
        match &self.kind {
            Kind::Uniform(k) => (*k).min(s.count_ones() as usize),
            Kind::Partition(parts) => parts
                .iter()
                .map(|&(m, cap)| cap.min((m & s).count_ones() as usize))
                .sum(),
            Kind::Graphic(nodes, edges) => {
                let mut parent: Vec<usize> = (0..*nodes).collect();
                fn find(p: &mut [usize], mut x: usize) -> usize {
                    while p[x] != x {
                        p[x] = p[p[x]];
                        x = p[x];
                    }
                    x
                }
                let mut r = 0;
                for e in elems_of(s) {
                    let (a, b) = (find(&mut parent, edges[e][0]), find(&mut parent, edges[e][1]));
                    if a != b {
                        parent[a] = b;
                        r += 1;
                    }
                }
                r
            }
            Kind::Explicit(sets) => sets
                .iter()
                .map(|&m| (m & s).count_ones() as usize)
                .max()
                .unwrap_or(0),
        }
    }

    fn ranks(&self) -> &[u8] {
        self.table.get_or_init(|| {
            (0..(1u64 << self.n))
                .map(|m| self.rank_direct(m as Mask) as u8)
                .collect()
        })
    }

    pub fn full_rank(&self) -> usize {
        self.rank(self.ground())
    }

    pub fn is_independent(&self, s: Mask) -> bool {
        self.rank(s) == s.count_ones() as usize
    }

    pub fn is_basis(&self, s: Mask) -> bool {
        self.is_independent(s) && s.count_ones() as usize == self.full_rank()
    }

    /// Adds elements in index order while the set stays independent; `s`
    /// must itself be independent.
    pub fn extend_to_basis(&self, s: Mask) -> Mask {
        let mut out = s;
        for e in 0..self.n {
            let bit = 1 << e;
            if out & bit == 0 && self.is_independent(out | bit) {
                out |= bit;
            }
        }
        out
    }

    /// Exhaustive rank-axiom check. Returns the list of violations.
    pub fn check_axioms(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n > 12 {
            return out;
        }
        let r = self.ranks();
        if r[0] != 0 {
            out.push("rank of empty set is nonzero".into());
        }
        let full = 1usize << self.n;
        for s in 0..full {
            if r[s] as u32 > (s as u32).count_ones() {
                out.push(format!("r({s:#b}) exceeds cardinality"));
            }
            for e in 0..self.n {
                let bit = 1 << e;
                if s & bit != 0 {
                    continue;
                }
                if r[s | bit] < r[s] || r[s | bit] > r[s] + 1 {
                    out.push(format!("rank not unit-increasing at {s:#b} + {e}"));
                }
                for f in (e + 1)..self.n {
                    let fb = 1 << f;
                    if s & fb != 0 {
                        continue;
                    }
                    // local submodularity: r(S+e) + r(S+f) >= r(S+e+f) + r(S)
                    if (r[s | bit] as u32 + r[s | fb] as u32) < r[s | bit | fb] as u32 + r[s] as u32 {
                        out.push(format!("submodularity fails at {s:#b} with {e},{f}"));
                    }
                }
            }
            if out.len() > 20 {
                break;
            }
        }
        out
    }

    fn check_len(&self, y: &[Rational]) -> Result<()> {
        if y.len() != self.n {
            return Err(Error::InvalidParameter(format!(
                "point has {} coordinates, ground set has {}",
                y.len(),
                self.n
            )));
        }
        Ok(())
    }

    /// Minimizes `q * r(S) - y(S)` over all subsets. Ties prefer the smaller
    /// set, then the set containing the smallest differing element.
    pub fn separate_scaled(&self, q: &Rational, y: &[Rational]) -> Result<(Mask, Rational)> {
        self.check_len(y)?;
        match &self.kind {
            Kind::Uniform(k) => Ok(greedy_block(self.ground(), *k, q, y)),
            Kind::Partition(parts) => {
                let mut set = 0;
                let mut val = Rational::zero();
                for &(m, cap) in parts {
                    let (s, v) = greedy_block(m, cap, q, y);
                    set |= s;
                    val += v;
                }
                Ok((set, val))
            }
            _ => Ok(self.separate_brute(q, y)),
        }
    }

    /// Minimizes `r(S) - y(S)`. A negative value means `y(S) <= r(S)` is
    /// violated by `S`.
    pub fn separate(&self, y: &[Rational]) -> Result<(Mask, Rational)> {
        self.separate_scaled(&Rational::one(), y)
    }

    fn separate_brute(&self, q: &Rational, y: &[Rational]) -> (Mask, Rational) {
        let mut vals = y.to_vec();
        vals.push(q.clone());
        let sc = Scaled::new(&vals);
        let qn = sc.nums[self.n].clone();
        let ranks = self.ranks();
        fn pick<T: Ord>(best: &mut Option<(Mask, T)>, mask: Mask, v: T) {
            match best {
                Some((bm, bv)) if v > *bv || (v == *bv && !set_order_less(mask, *bm)) => {}
                _ => *best = Some((mask, v)),
            }
        }
        let mask = if sc.bits() + 8 < 120 {
            let nums = sc.as_i128();
            let qn = i128::try_from(&qn).expect("checked");
            let sums = subset_sums(&nums[..self.n]);
            let mut best: Option<(Mask, i128)> = None;
            for (m, s) in sums.iter().enumerate() {
                pick(&mut best, m as Mask, qn * ranks[m] as i128 - s);
            }
            best.expect("nonempty").0
        } else {
            let sums = subset_sums(&sc.nums[..self.n]);
            let mut best: Option<(Mask, BigInt)> = None;
            for (m, s) in sums.iter().enumerate() {
                pick(&mut best, m as Mask, &qn * BigInt::from(ranks[m]) - s);
            }
            best.expect("nonempty").0
        };
        let value = q * Rational::from_integer(BigInt::from(self.rank(mask))) - sum_over(y, mask);
        (mask, value)
    }

    /// Checks `0 <= y <= 1` and `y(S) <= r(S)` for all `S`; on failure returns
    /// a violated set (a singleton for bound violations).
    pub fn independence_violation(&self, y: &[Rational]) -> Result<Option<Mask>> {
        self.check_len(y)?;
        for (i, v) in y.iter().enumerate() {
            if v.is_negative() || v > &Rational::one() {
                return Ok(Some(1 << i));
            }
        }
        let (s, val) = self.separate(y)?;
        Ok(if val.is_negative() { Some(s) } else { None })
    }

    /// Base polytope membership. On failure returns a witness set: a violated
    /// rank constraint, or the ground set when `y(ground) != r(ground)`.
    pub fn is_in_base_polytope(&self, y: &[Rational]) -> Result<(bool, Option<Mask>)> {
        if let Some(s) = self.independence_violation(y)? {
            return Ok((false, Some(s)));
        }
        let total = rational::sum(y);
        if total != rational::int(self.full_rank() as i64) {
            return Ok((false, Some(self.ground())));
        }
        Ok((true, None))
    }

    /// All nonempty sets with `y(S) = r(S)`, in enumeration order.
    pub fn tight_sets(&self, y: &[Rational]) -> Result<Vec<Mask>> {
        self.check_len(y)?;
        let sc = Scaled::new(y);
        let ranks = self.ranks();
        let mut out = Vec::new();
        if sc.bits() + 8 < 120 {
            let sums = subset_sums(&sc.as_i128());
            let den = i128::try_from(&sc.den).expect("checked");
            for (m, s) in sums.iter().enumerate().skip(1) {
                if den * ranks[m] as i128 == *s {
                    out.push(m as Mask);
                }
            }
        } else {
            let sums = subset_sums(&sc.nums);
            for (m, s) in sums.iter().enumerate().skip(1) {
                if &sc.den * BigInt::from(ranks[m]) == *s {
                    out.push(m as Mask);
                }
            }
        }
        Ok(out)
    }

    /// Maximal chain of tight sets for a point of the independence polytope,
    /// starting from the first minimal nonempty tight set and growing by
    /// minimal strict tight supersets.
    pub fn face_decomposition(&self, y: &[Rational]) -> Result<FaceDescription> {
        if let Some(s) = self.independence_violation(y)? {
            return Err(Error::NotInPolytope(format!(
                "set {:?} violates its rank constraint",
                elems_of(s)
            )));
        }
        let mut tight = self.tight_sets(y)?;
        tight.sort_by(|&a, &b| {
            if a == b {
                std::cmp::Ordering::Equal
            } else if set_order_less(a, b) {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            }
        });
        let mut chain: Vec<Mask> = Vec::new();
        let mut current: Mask = 0;
        // `tight` is ordered by size, so the first strict superset is minimal.
        loop {
            let next = tight
                .iter()
                .copied()
                .find(|&t| t != current && t & current == current);
            match next {
                Some(t) => {
                    chain.push(t);
                    current = t;
                }
                None => break,
            }
        }
        let chain_ranks: Vec<usize> = chain.iter().map(|&m| self.rank(m)).collect();
        let mut o_sets = Vec::with_capacity(chain.len());
        let mut b = Vec::with_capacity(chain.len());
        let (mut prev, mut prev_rank) = (0, 0);
        for (&m, &r) in chain.iter().zip(&chain_ranks) {
            o_sets.push(m & !prev);
            b.push(r - prev_rank);
            prev = m;
            prev_rank = r;
        }
        let zero_set = y
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_zero())
            .fold(0, |m, (i, _)| m | (1 << i));
        Ok(FaceDescription {
            chain,
            chain_ranks,
            o_sets,
            b,
            free: self.ground() & !prev,
            zero_set,
        })
    }

    /// Largest `delta >= 0` with `y + delta * dir` in the independence polytope.
    pub fn max_step(&self, y: &[Rational], dir: &[Rational]) -> Result<(Vec<Rational>, Rational)> {
        self.check_len(y)?;
        self.check_len(dir)?;
        if let Some(s) = self.independence_violation(y)? {
            return Err(Error::NotInPolytope(format!(
                "set {:?} violates its rank constraint",
                elems_of(s)
            )));
        }
        if dir.iter().all(|d| d.is_zero()) {
            return Err(Error::InvalidParameter("zero direction".into()));
        }
        let mut best: Option<Rational> = None;
        let mut consider = |cand: Rational| {
            if best.as_ref().is_none_or(|b| &cand < b) {
                best = Some(cand);
            }
        };
        for (v, d) in y.iter().zip(dir) {
            if d.is_positive() {
                consider((Rational::one() - v) / d);
            } else if d.is_negative() {
                consider(v / -d);
            }
        }
        let rank_bound = self.rank_step_bound(y, dir);
        if let Some(r) = rank_bound {
            consider(r);
        }
        let delta = best.expect("nonzero direction has a bound");
        let next: Vec<Rational> = y.iter().zip(dir).map(|(v, d)| v + &delta * d).collect();
        Ok((next, delta))
    }

    /// `min over S with dir(S) > 0 of (r(S) - y(S)) / dir(S)`.
    fn rank_step_bound(&self, y: &[Rational], dir: &[Rational]) -> Option<Rational> {
        match &self.kind {
            Kind::Uniform(k) => return block_step_bound(self.ground(), *k, y, dir),
            Kind::Partition(parts) => {
                return parts
                    .iter()
                    .filter_map(|&(m, cap)| block_step_bound(m, cap, y, dir))
                    .min();
            }
            _ => {}
        }
        let sy = Scaled::new(y);
        let sd = Scaled::new(dir);
        let ranks = self.ranks();
        // ratio(S) = (r(S) * Dy - Y(S)) * Dd / (Dy * D(S)); compare the
        // S-dependent part (r(S) * Dy - Y(S)) / D(S).
        let best = if sy.bits() + sd.bits() + 16 < 120 {
            let ys = subset_sums(&sy.as_i128());
            let ds = subset_sums(&sd.as_i128());
            let den = i128::try_from(&sy.den).expect("checked");
            let mut best: Option<(i128, i128, usize)> = None;
            for m in 1..ys.len() {
                if ds[m] <= 0 {
                    continue;
                }
                let num = den * ranks[m] as i128 - ys[m];
                if best.is_none_or(|(bn, bd, _)| num * bd < bn * ds[m]) {
                    best = Some((num, ds[m], m));
                }
            }
            best.map(|(_, _, m)| m)
        } else {
            let ys = subset_sums(&sy.nums);
            let ds = subset_sums(&sd.nums);
            let mut best: Option<(BigInt, BigInt, usize)> = None;
            for m in 1..ys.len() {
                if !ds[m].is_positive() {
                    continue;
                }
                let num = &sy.den * BigInt::from(ranks[m]) - &ys[m];
                let better = match &best {
                    None => true,
                    Some((bn, bd, _)) => &num * bd < bn * &ds[m],
                };
                if better {
                    best = Some((num, ds[m].clone(), m));
                }
            }
            best.map(|(_, _, m)| m)
        };
        best.map(|m| {
            let mask = m as Mask;
            (Rational::from_integer(BigInt::from(self.rank(mask))) - sum_over(y, mask))
                / sum_over(dir, mask)
        })
    }
}

fn full_mask(n: usize) -> Mask {
    if n >= 32 {
        Mask::MAX
    } else {
        (1u32 << n) - 1
    }
}

pub fn sum_over(v: &[Rational], mask: Mask) -> Rational {
    let mut acc = Rational::zero();
    for (i, x) in v.iter().enumerate() {
        if mask & (1 << i) != 0 {
            acc += x;
        }
    }
    acc
}

/// Closed-form minimizer of `q * min(cap, |S|) - y(S)` over `S` inside `block`.
fn greedy_block(block: Mask, cap: usize, q: &Rational, y: &[Rational]) -> (Mask, Rational) {
    let mut idx = elems_of(block);
    idx.sort_by(|&a, &b| y[b].cmp(&y[a]).then(a.cmp(&b)));
    let mut best = (0, Rational::zero());
    let mut acc = Rational::zero();
    let mut set = 0;
    for (s, &e) in idx.iter().enumerate() {
        acc += &y[e];
        set |= 1 << e;
        let val = q * rational::int(cap.min(s + 1) as i64) - &acc;
        if val < best.1 {
            best = (set, val);
        }
    }
    best
}

/// Step bound of the rank constraints `y(S) <= min(cap, |S|)` inside one
/// block. Constraints with `|S| <= cap` follow from the upper bounds, and while
/// all coordinates stay nonnegative the largest `y(S)` with `|S| > cap` is the
/// whole block, so only the block constraint can bind.
fn block_step_bound(block: Mask, cap: usize, y: &[Rational], dir: &[Rational]) -> Option<Rational> {
    if block.count_ones() as usize <= cap {
        return None;
    }
    let ds = sum_over(dir, block);
    ds.is_positive()
        .then(|| (rational::int(cap as i64) - sum_over(y, block)) / ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, parse, ratio};

    fn q(v: &[&str]) -> Vec<Rational> {
        v.iter().map(|s| parse(s).unwrap()).collect()
    }

    fn uniform(k: usize, n: usize) -> Matroid {
        Matroid::new(MatroidSpec::Uniform { k }, n).unwrap()
    }

    fn partition(blocks: Vec<Vec<usize>>, caps: Vec<usize>, n: usize) -> Matroid {
        Matroid::new(MatroidSpec::Partition { blocks, caps }, n).unwrap()
    }

    fn brute_min(m: &Matroid, y: &[Rational]) -> Rational {
        (0..(1u32 << m.ground_size()))
            .map(|s| int(m.rank(s) as i64) - sum_over(y, s))
            .min()
            .unwrap()
    }

    #[test]
    fn base_polytope_membership() {
        let m = uniform(2, 3);
        assert_eq!(m.is_in_base_polytope(&q(&["1", "1", "0"])).unwrap(), (true, None));
        let (ok, w) = m.is_in_base_polytope(&q(&["1", "1", "1"])).unwrap();
        assert!(!ok);
        assert_eq!(w, Some(0b111));
        let p = partition(vec![vec![0, 1], vec![2]], vec![1, 1], 3);
        assert!(p.is_in_base_polytope(&q(&["1/2", "1/2", "1"])).unwrap().0);
    }

    #[test]
    fn separation_examples() {
        let m = uniform(1, 2);
        let (s, v) = m.separate(&q(&["0.7", "0.7"])).unwrap();
        assert_eq!(s, 0b11);
        assert_eq!(v, ratio(-2, 5));
        let (_, v) = uniform(2, 3).separate(&q(&["1", "0", "1"])).unwrap();
        assert_eq!(v, int(0));
        let p = partition(vec![vec![0, 1], vec![2]], vec![1, 1], 3);
        let (s, v) = p.separate(&q(&["0.9", "0.2", "0.5"])).unwrap();
        assert_eq!(s, 0b011);
        assert_eq!(v, ratio(-1, 10));
    }

    #[test]
    fn closed_form_matches_enumeration() {
        let p = partition(vec![vec![0, 2, 3], vec![1, 4]], vec![2, 1], 5);
        let y = q(&["0.9", "0.8", "0.7", "0.6", "0.3"]);
        assert_eq!(p.separate(&y).unwrap().1, brute_min(&p, &y));
        let g = Matroid::new(
            MatroidSpec::Graphic {
                n_nodes: 3,
                edges: vec![[0, 1], [1, 2], [0, 2]],
            },
            3,
        )
        .unwrap();
        let y = q(&["0.8", "0.8", "0.8"]);
        let (s, v) = g.separate(&y).unwrap();
        assert_eq!((s, v), (0b111, ratio(-2, 5)));
    }

    #[test]
    fn face_of_basis_indicator_is_full_chain() {
        // tight sets of (1,1,0): {a}, {b}, {a,b}, {a,b,c}
        let m = uniform(2, 3);
        let f = m.face_decomposition(&q(&["1", "1", "0"])).unwrap();
        assert_eq!(f.chain, vec![0b001, 0b011, 0b111]);
        assert_eq!(f.o_sets, vec![0b001, 0b010, 0b100]);
        assert_eq!(f.b, vec![1, 1, 0]);
        assert_eq!(f.zero_set, 0b100);
        assert_eq!(f.free, 0);
    }

    #[test]
    fn face_of_interior_point_is_ground_set() {
        let m = uniform(2, 3);
        let f = m.face_decomposition(&q(&["2/3", "2/3", "2/3"])).unwrap();
        assert_eq!(f.o_sets, vec![0b111]);
        assert_eq!(f.b, vec![2]);
    }

    #[test]
    fn face_of_partition_point() {
        let p = partition(vec![vec![0, 1], vec![2, 3]], vec![1, 1], 4);
        let f = p.face_decomposition(&q(&["0.5", "0.5", "0.5", "0.5"])).unwrap();
        assert_eq!(f.o_sets, vec![0b0011, 0b1100]);
        assert_eq!(f.b, vec![1, 1]);
    }

    #[test]
    fn face_rejects_points_outside() {
        assert!(uniform(1, 2).face_decomposition(&q(&["1", "1/2"])).is_err());
    }

    #[test]
    fn max_step_examples() {
        let m = uniform(1, 2);
        let (next, d) = m.max_step(&q(&["0.3", "0.7"]), &q(&["1", "-1"])).unwrap();
        assert_eq!(d, ratio(7, 10));
        assert_eq!(next, q(&["1", "0"]));
        let p = partition(vec![vec![0, 1], vec![2]], vec![1, 1], 3);
        let (_, d) = p.max_step(&q(&["0.4", "0.6", "1"]), &q(&["1", "-1", "0"])).unwrap();
        assert_eq!(d, ratio(3, 5));
        // blocked: y(ground) = 1 already tight, pushing both up
        let (_, d) = m.max_step(&q(&["0.5", "0.5"]), &q(&["1", "1"])).unwrap();
        assert_eq!(d, int(0));
    }

    #[test]
    fn extend_to_basis_is_basis() {
        let g = Matroid::new(
            MatroidSpec::Graphic {
                n_nodes: 4,
                edges: vec![[0, 1], [1, 2], [0, 2], [2, 3]],
            },
            4,
        )
        .unwrap();
        let b = g.extend_to_basis(0b0100);
        assert!(g.is_basis(b));
        assert_eq!(g.full_rank(), 3);
    }

    #[test]
    fn explicit_family_rank_and_axioms() {
        let e = Matroid::new(
            MatroidSpec::Explicit {
                independent_sets: vec![vec![0, 1], vec![0, 2], vec![1, 2]],
            },
            3,
        )
        .unwrap();
        assert_eq!(e.full_rank(), 2);
        assert!(e.check_axioms().is_empty());
        let bad = Matroid::new(
            MatroidSpec::Explicit {
                independent_sets: vec![vec![0, 1], vec![2]],
            },
            3,
        )
        .unwrap();
        assert!(!bad.check_axioms().is_empty());
    }

    #[test]
    fn spec_validation() {
        assert!(Matroid::new(MatroidSpec::Uniform { k: 4 }, 3).is_err());
        assert!(Matroid::new(
            MatroidSpec::Partition {
                blocks: vec![vec![0]],
                caps: vec![1]
            },
            2
        )
        .is_err());
    }
}

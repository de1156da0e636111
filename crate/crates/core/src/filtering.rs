//! Greedy selection of disjoint clusters from a fractional solution.

use num_traits::Signed;
use serde::Serialize;

use crate::lp::FractionalSolution;
use crate::rational::{self, serde_rational, Rational};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FilterOutput {
    /// Selected cluster centers in selection order.
    pub centers: Vec<usize>,
    /// `clusters[j] = F_j` for every vertex `j`.
    pub clusters: Vec<Vec<usize>>,
    /// `counts[k]` clusters were marked when `centers[k]` was selected.
    pub counts: Vec<usize>,
    #[serde(with = "serde_rational::vec")]
    pub s: Vec<Rational>,
    /// Selected center whose cluster absorbed `j` (none when `F_j` is empty).
    pub absorbed_by: Vec<Option<usize>>,
}

fn intersects(a: &[usize], b: &[usize]) -> bool {
    a.iter().any(|x| b.binary_search(x).is_ok())
}

/// Visits vertices by decreasing `s_j` (ties by index), selecting every
/// vertex whose cluster is not yet marked and marking all unmarked clusters
/// that meet it.
pub fn rfilter(sol: &FractionalSolution) -> FilterOutput {
    let n = sol.y.len();
    let clusters: Vec<Vec<usize>> = (0..n).map(|j| sol.cluster(j)).collect();
    let mut order: Vec<usize> = (0..n).filter(|&j| !clusters[j].is_empty()).collect();
    order.sort_by(|&a, &b| sol.s[b].cmp(&sol.s[a]).then(a.cmp(&b)));
    let mut absorbed_by = vec![None; n];
    let mut centers = Vec::new();
    let mut counts = Vec::new();
    for &j in &order {
        if absorbed_by[j].is_some() {
            continue;
        }
        let mut c = 0;
        for &k in &order {
            if absorbed_by[k].is_none() && intersects(&clusters[j], &clusters[k]) {
                absorbed_by[k] = Some(j);
                c += 1;
            }
        }
        centers.push(j);
        counts.push(c);
    }
    FilterOutput {
        centers,
        clusters,
        counts,
        s: sol.s.clone(),
        absorbed_by,
    }
}

impl FilterOutput {
    pub fn count_of(&self, j: usize) -> Option<usize> {
        self.centers.iter().position(|&c| c == j).map(|k| self.counts[k])
    }

    /// Disjointness, domination and counting checks.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        for (a, &i) in self.centers.iter().enumerate() {
            for &k in &self.centers[a + 1..] {
                if intersects(&self.clusters[i], &self.clusters[k]) {
                    v.push(format!("clusters of {i} and {k} overlap"));
                }
            }
        }
        for j in 0..self.clusters.len() {
            if self.clusters[j].is_empty() {
                continue;
            }
            let dominated = self
                .centers
                .iter()
                .any(|&k| self.s[k] >= self.s[j] && intersects(&self.clusters[j], &self.clusters[k]));
            if !dominated {
                v.push(format!("vertex {j} has no dominating selected cluster"));
            }
        }
        let nonempty = self.clusters.iter().filter(|c| !c.is_empty()).count();
        if self.counts.iter().sum::<usize>() != nonempty {
            v.push("counts do not add up to the nonempty clusters".into());
        }
        let weighted = self
            .centers
            .iter()
            .zip(&self.counts)
            .fold(Rational::from_integer(0.into()), |acc, (&i, &c)| {
                acc + &self.s[i] * rational::int(c as i64)
            });
        if weighted < rational::sum(&self.s) {
            v.push("sum of c_i s_i is below sum of s".into());
        }
        if self.s.iter().any(|x| x.is_negative()) {
            v.push("negative mass".into());
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use num_traits::Zero;

    fn sol(n: usize, x: &[(usize, usize, Rational)], radius: i64) -> FractionalSolution {
        let mut xm = vec![vec![Rational::zero(); n]; n];
        let mut s = vec![Rational::zero(); n];
        let mut y = vec![Rational::zero(); n];
        for (i, j, v) in x {
            xm[*i][*j] = v.clone();
            s[*j] += v;
            if &y[*i] < v {
                y[*i] = v.clone();
            }
        }
        FractionalSolution {
            radius: int(radius),
            x: xm,
            y,
            s,
        }
    }

    #[test]
    fn far_apart_self_assigned_clients() {
        let f = rfilter(&sol(2, &[(0, 0, int(1)), (1, 1, int(1))], 0));
        assert_eq!(f.centers, vec![0, 1]);
        assert_eq!(f.counts, vec![1, 1]);
        assert!(f.violations().is_empty());
    }

    #[test]
    fn heavier_cluster_absorbs_neighbour() {
        // a = 0, b = 1, both served partly by vertex 0
        let s = sol(
            2,
            &[(0, 0, ratio(9, 10)), (0, 1, ratio(1, 2)), (1, 1, ratio(3, 10))],
            1,
        );
        let f = rfilter(&s);
        assert_eq!(f.centers, vec![0]);
        assert_eq!(f.counts, vec![2]);
        assert_eq!(f.absorbed_by, vec![Some(0), Some(0)]);
    }

    #[test]
    fn ties_go_to_smaller_index() {
        let s = sol(2, &[(0, 0, ratio(1, 2)), (0, 1, ratio(1, 2))], 1);
        let f = rfilter(&s);
        assert_eq!(f.centers, vec![0]);
    }

    #[test]
    fn empty_clusters_are_ignored() {
        let f = rfilter(&sol(3, &[(0, 0, int(1))], 0));
        assert_eq!(f.centers, vec![0]);
        assert_eq!(f.absorbed_by[2], None);
        assert!(f.violations().is_empty());
    }
}

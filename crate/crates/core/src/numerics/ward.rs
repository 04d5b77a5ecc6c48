//! Agglomerative clustering with Ward's minimum-variance criterion.
//!
//! Works on squared Euclidean distances updated with the Lance–Williams
//! recurrence
//!
//! ```text
//! d(i∪j, k) = ((n_i + n_k) d(i,k) + (n_j + n_k) d(j,k) − n_k d(i,j)) / (n_i + n_j + n_k)
//! ```
//!
//! which keeps `d` equal to twice the increase in within-cluster sum of
//! squares a merge would cause. Reported heights are `sqrt(d)`.
//!
//! Among pairs whose distances agree to within [`TIE_RTOL`], the pair with
//! the smallest (min member of A, min member of B) wins.

use serde::{Deserialize, Serialize};

use crate::error::NumericsError;

/// Relative tolerance under which two merge costs count as tied.
pub const TIE_RTOL: f64 = 1e-9;

/// One merge. Cluster ids follow the usual convention: points are
/// `0..n`, the cluster formed at step `s` is `n + s`. `left` is the
/// cluster holding the smaller point index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub points: usize,
    pub steps: Vec<Merge>,
}

/// `true` when `candidate` beats `best` by more than the tie tolerance.
pub(crate) fn strictly_better(candidate: f64, best: f64) -> bool {
    candidate < best && best - candidate > TIE_RTOL * best.abs().max(candidate.abs())
}

impl Dendrogram {
    /// Labels 1..=k after replaying the first `points - k` merges. Labels are
    /// numbered by ascending smallest member index.
    pub fn cut(&self, k: usize) -> Result<Vec<usize>, NumericsError> {
        let n = self.points;
        if k == 0 || k > n {
            return Err(NumericsError::ClusterCount { k, points: n });
        }
        // representative point of every cluster id
        let mut parent: Vec<usize> = (0..n).collect();
        let mut rep: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for m in &self.steps[..n - k] {
            let a = find(&mut parent, rep[m.left]);
            let b = find(&mut parent, rep[m.right]);
            let root = a.min(b);
            parent[a.max(b)] = root;
            rep.push(root);
        }
        let mut labels = vec![0; n];
        let mut next = 0;
        let mut label_of_root = vec![0; n];
        for (i, label) in labels.iter_mut().enumerate() {
            let r = find(&mut parent, i);
            if label_of_root[r] == 0 {
                next += 1;
                label_of_root[r] = next;
            }
            *label = label_of_root[r];
        }
        Ok(labels)
    }
}

/// Full Ward dendrogram of `points` (n - 1 merges).
pub fn ward_linkage(points: &[Vec<f64>]) -> Result<Dendrogram, NumericsError> {
    let n = points.len();
    let dim = points.first().map_or(0, Vec::len);
    if points.iter().any(|p| p.len() != dim) {
        return Err(NumericsError::Ragged);
    }

    let mut d = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let sq: f64 = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            d[i][j] = sq;
            d[j][i] = sq;
        }
    }

    // A cluster lives in the slot of its smallest point index, so walking
    // active slots in order walks clusters by smallest member.
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut id: Vec<usize> = (0..n).collect();
    let mut steps = Vec::with_capacity(n.saturating_sub(1));

    for step in 0..n.saturating_sub(1) {
        let mut best: Option<(usize, usize, f64)> = None;
        for a in (0..n).filter(|&a| active[a]) {
            for b in (a + 1..n).filter(|&b| active[b]) {
                let cand = d[a][b];
                if best.is_none_or(|(_, _, bd)| strictly_better(cand, bd)) {
                    best = Some((a, b, cand));
                }
            }
        }
        let (a, b, dab) = best.expect("at least two active clusters");
        let (na, nb) = (size[a] as f64, size[b] as f64);
        for c in (0..n).filter(|&c| active[c] && c != a && c != b) {
            let nc = size[c] as f64;
            let v = ((na + nc) * d[a][c] + (nb + nc) * d[b][c] - nc * dab) / (na + nb + nc);
            d[a][c] = v;
            d[c][a] = v;
        }
        steps.push(Merge {
            left: id[a],
            right: id[b],
            height: dab.max(0.0).sqrt(),
            size: size[a] + size[b],
        });
        active[b] = false;
        size[a] += size[b];
        id[a] = n + step;
    }

    Ok(Dendrogram { points: n, steps })
}

/// Ward clustering cut at `k` clusters.
pub fn ward_cluster(
    points: &[Vec<f64>],
    k: usize,
) -> Result<(Vec<usize>, Dendrogram), NumericsError> {
    if k == 0 || k > points.len() {
        return Err(NumericsError::ClusterCount {
            k,
            points: points.len(),
        });
    }
    let dendrogram = ward_linkage(points)?;
    let labels = dendrogram.cut(k)?;
    Ok((labels, dendrogram))
}

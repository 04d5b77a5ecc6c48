use serde::{Deserialize, Serialize};

use crate::error::NumericsError;

/// Sweeps stop once the off-diagonal Frobenius norm falls below this
/// fraction of the matrix norm.
pub const JACOBI_TOLERANCE: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues in descending order and the matching unit
/// eigenvectors (as `vectors[k]`).
pub fn symmetric_eigen(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let norm = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();

    for _ in 0..MAX_SWEEPS {
        let off = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_TOLERANCE * norm {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                let (lo, hi) = a.split_at_mut(q);
                for (apk, aqk) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let (x, y) = (*apk, *aqk);
                    *apk = c * x - s * y;
                    *aqk = s * x + c * y;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..n).map(|k| v[k][i]).collect())
        .collect();
    (values, vectors)
}

/// Principal components of a point cloud.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaProjection {
    /// Per-point coordinates on the retained components.
    pub coords: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    /// All covariance eigenvalues, descending, clamped at zero.
    pub eigenvalues: Vec<f64>,
    /// All unit components, matching `eigenvalues`. The largest-magnitude
    /// entry of each is positive.
    pub components: Vec<Vec<f64>>,
    pub dims: usize,
}

impl PcaProjection {
    /// Share of total variance carried by the retained components.
    pub fn explained_fraction(&self) -> f64 {
        self.explained_ratios().iter().take(self.dims).sum()
    }

    pub fn explained_ratios(&self) -> Vec<f64> {
        let total: f64 = self.eigenvalues.iter().sum();
        if total <= 0.0 {
            return vec![0.0; self.eigenvalues.len()];
        }
        self.eigenvalues.iter().map(|l| l / total).collect()
    }

    /// Position of every input variable on the retained components: its
    /// entries in the unit component vectors.
    pub fn loadings(&self) -> Vec<Vec<f64>> {
        let vars = self.mean.len();
        (0..vars)
            .map(|j| self.components[..self.dims].iter().map(|c| c[j]).collect())
            .collect()
    }

    /// Maps coordinates on the retained components back to input space.
    pub fn back_project(&self, coords: &[f64]) -> Vec<f64> {
        let mut x = self.mean.clone();
        for (score, comp) in coords.iter().zip(&self.components) {
            for (xi, ci) in x.iter_mut().zip(comp) {
                *xi += score * ci;
            }
        }
        x
    }
}

/// Centers the points, diagonalizes their sample covariance and projects
/// onto the top `dims` components.
pub fn pca_project(points: &[Vec<f64>], dims: usize) -> Result<PcaProjection, NumericsError> {
    let n = points.len();
    if n < dims + 1 {
        return Err(NumericsError::TooFewPoints { dims, points: n });
    }
    let d = points[0].len();
    if points.iter().any(|p| p.len() != d) {
        return Err(NumericsError::Ragged);
    }
    if dims > d {
        return Err(NumericsError::TooFewPoints { dims, points: d });
    }

    let mean: Vec<f64> = (0..d)
        .map(|j| points.iter().map(|p| p[j]).sum::<f64>() / n as f64)
        .collect();
    let centered: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();
    let mut cov = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in i..d {
            let s = centered.iter().map(|r| r[i] * r[j]).sum::<f64>() / (n - 1) as f64;
            cov[i][j] = s;
            cov[j][i] = s;
        }
    }

    let (values, mut vectors) = symmetric_eigen(&cov);
    let eigenvalues = values.into_iter().map(|l| l.max(0.0)).collect();
    for v in vectors.iter_mut() {
        let lead = v
            .iter()
            .enumerate()
            .max_by(|(i, a), (j, b)| a.abs().total_cmp(&b.abs()).then(j.cmp(i)))
            .map_or(0, |(i, _)| i);
        if v.get(lead).is_some_and(|x| *x < 0.0) {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    let coords = centered
        .iter()
        .map(|r| {
            vectors[..dims]
                .iter()
                .map(|comp| r.iter().zip(comp).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();

    Ok(PcaProjection {
        coords,
        mean,
        eigenvalues,
        components: vectors,
        dims,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_diagonal_and_2x2() {
        let (vals, vecs) = symmetric_eigen(&[vec![1.0, 0.0], vec![0.0, 3.0]]);
        assert_eq!(vals, vec![3.0, 1.0]);
        assert_eq!(vecs[0][1].abs(), 1.0);

        let (vals, vecs) = symmetric_eigen(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        assert!((vals[0] - 3.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((vecs[0][0].abs() - r).abs() < 1e-14);
        assert!((vecs[0][0] - vecs[0][1]).abs() < 1e-14);
    }

    #[test]
    fn collinear_points_have_one_component() {
        let pts: Vec<Vec<f64>> = (0..6)
            .map(|i| {
                let t = i as f64 * 0.7 - 1.0;
                vec![1.0 + 2.0 * t, -3.0 + t, 0.5 - 4.0 * t]
            })
            .collect();
        let p = pca_project(&pts, 2).unwrap();
        assert!((p.explained_ratios()[0] - 1.0).abs() < 1e-9);
        assert!((p.explained_fraction() - 1.0).abs() < 1e-9);
        assert!(p.coords.iter().all(|c| c[1].abs() < 1e-9));
    }

    #[test]
    fn sign_convention() {
        let pts = vec![vec![0.0, 0.0], vec![-1.0, -2.0], vec![1.0, 2.0], vec![0.5, 0.9]];
        let p = pca_project(&pts, 1).unwrap();
        for comp in &p.components {
            let lead = comp.iter().copied().max_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap();
            assert!(lead > 0.0);
        }
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(
            pca_project(&[vec![1.0, 2.0], vec![3.0, 4.0]], 2),
            Err(NumericsError::TooFewPoints { .. })
        ));
    }

    #[test]
    fn identical_points() {
        let p = pca_project(&vec![vec![1.0, 1.0]; 4], 2).unwrap();
        assert_eq!(p.explained_fraction(), 0.0);
        assert!(p.eigenvalues.iter().all(|&l| l == 0.0));
    }
}

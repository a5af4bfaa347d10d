use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Matrix;

/// Principal axes of a centered data matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// k×d, one unit-length axis per row.
    pub components: Matrix,
    /// Squared singular values over n−1, descending.
    pub explained_variance: Vec<f64>,
}

/// Fits the top `k` axes of `rows` (n×d) by SVD of the centered matrix.
///
/// Each axis is signed so that its largest-magnitude entry is non-negative.
pub fn pca_fit(rows: &Matrix, k: usize) -> Result<PcaModel> {
    let (n, d) = rows.shape();
    if n < 2 {
        return Err(Error::validation(format!("PCA needs at least 2 rows, got {n}")));
    }
    if k == 0 || k > n.min(d) {
        return Err(Error::validation(format!(
            "PCA k={k} must be in 1..={} for a {n}×{d} matrix",
            n.min(d)
        )));
    }
    if !rows.is_finite() {
        return Err(Error::NonFinite("PCA input contains non-finite values".into()));
    }
    let sums = rows.sum_rows();
    let mean: Vec<f64> = sums.as_slice().iter().map(|s| s / n as f64).collect();
    let centered = DMatrix::from_fn(n, d, |r, c| rows[(r, c)] - mean[c]);
    let svd = centered.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let s_max = svd.singular_values.max();
    let tol = s_max * f64::EPSILON * n.max(d) as f64;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    if rank < k {
        return Err(Error::RankDeficient { rank, requested: k });
    }

    let mut components = Matrix::zeros(k, d);
    let mut explained_variance = Vec::with_capacity(k);
    for (i, &j) in order.iter().take(k).enumerate() {
        let axis: Vec<f64> = (0..d).map(|c| v_t[(j, c)]).collect();
        let mut pivot = 0;
        for c in 1..d {
            if axis[c].abs() > axis[pivot].abs() {
                pivot = c;
            }
        }
        let sign = if axis[pivot] < 0.0 { -1.0 } else { 1.0 };
        for (dst, a) in components.row_mut(i).iter_mut().zip(&axis) {
            *dst = sign * a;
        }
        let s = svd.singular_values[j];
        explained_variance.push(s * s / (n - 1) as f64);
    }
    Ok(PcaModel {
        mean,
        components,
        explained_variance,
    })
}

impl PcaModel {
    pub fn k(&self) -> usize {
        self.components.rows()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// `components · (v − mean)`.
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(Error::shape(format!(
                "PCA expects a length-{} vector, got {}",
                self.dim(),
                v.len()
            )));
        }
        let centered: Vec<f64> = v.iter().zip(&self.mean).map(|(x, m)| x - m).collect();
        Ok((0..self.k())
            .map(|i| crate::nn::dot(self.components.row(i), &centered))
            .collect())
    }

    /// `mean + componentsᵀ · z`.
    pub fn reconstruct(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.k() {
            return Err(Error::shape(format!(
                "PCA reconstruction expects length {}, got {}",
                self.k(),
                z.len()
            )));
        }
        let mut out = self.mean.clone();
        for (i, &zi) in z.iter().enumerate() {
            for (o, c) in out.iter_mut().zip(self.components.row(i)) {
                *o += zi * c;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_aligned_example() {
        let rows = Matrix::from_rows(&[
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            vec![0.0, 2.0],
            vec![0.0, -2.0],
        ]).unwrap();
        let m = pca_fit(&rows, 2).unwrap();
        assert!((m.explained_variance[0] - 8.0 / 3.0).abs() < 1e-12);
        assert!((m.explained_variance[1] - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.components[(0, 1)] - 1.0).abs() < 1e-12);
        assert!((m.components[(1, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_points() {
        let rows = Matrix::from_rows(&[
            vec![0.0, 0.0, 0.0],
            vec![1.0, 2.0, 3.0],
            vec![2.0, 4.0, 6.0],
            vec![-1.0, -2.0, -3.0],
        ]).unwrap();
        let m = pca_fit(&rows, 1).unwrap();
        let total = 1.25 * 14.0 * 4.0 / 3.0;
        assert!((m.explained_variance[0] - total).abs() < 1e-9);
        assert!(matches!(
            pca_fit(&rows, 2),
            Err(Error::RankDeficient { rank: 1, requested: 2 })
        ));
    }

    #[test]
    fn project_mean_and_unit_steps() {
        let rows = Matrix::from_rows(&[
            vec![2.0, 0.0, 1.0],
            vec![0.0, 1.0, 3.0],
            vec![1.0, 5.0, 0.0],
            vec![4.0, 2.0, 2.0],
        ]).unwrap();
        let m = pca_fit(&rows, 3).unwrap();
        assert!(m.project(&m.mean).unwrap().iter().all(|z| z.abs() < 1e-12));
        for i in 0..3 {
            let step: Vec<f64> = m.mean.iter().zip(m.components.row(i)).map(|(a, b)| a + b).collect();
            let z = m.project(&step).unwrap();
            for (j, zj) in z.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((zj - want).abs() < 1e-10);
            }
        }
        let back = m.reconstruct(&m.project(rows.row(2)).unwrap()).unwrap();
        for (a, b) in back.iter().zip(rows.row(2)) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!(m.project(&[1.0]).is_err());
    }

    #[test]
    fn input_validation() {
        let one = Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert!(pca_fit(&one, 1).is_err());
        let rows = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 5.0]]).unwrap();
        assert!(pca_fit(&rows, 3).is_err());
        assert!(pca_fit(&rows, 0).is_err());
    }
}

use crate::error::{Error, Result};
use crate::numerics::Vector;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, scale: f64) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = scale;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Error::check_len(rows * cols, data.len())?;
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn matvec(&self, x: &Vector) -> Result<Vector> {
        matvec(self, x)
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        Error::check_len(self.cols, other.rows)?;
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Largest absolute entry of `self - self^T`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.rows {
            for c in (r + 1)..self.cols {
                worst = worst.max((self.get(r, c) - self.get(c, r)).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> Result<f64> {
        Error::check_len(self.data.len(), other.data.len())?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Lower Cholesky factor, or `None` when the matrix is not (numerically)
    /// symmetric positive definite.
    pub fn cholesky(&self) -> Option<Matrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut diag = self.get(j, j);
            for k in 0..j {
                diag -= l.get(j, k) * l.get(j, k);
            }
            if !(diag > 0.0) {
                return None;
            }
            let ljj = diag.sqrt();
            l.set(j, j, ljj);
            for i in (j + 1)..n {
                let mut v = self.get(i, j);
                for k in 0..j {
                    v -= l.get(i, k) * l.get(j, k);
                }
                l.set(i, j, v / ljj);
            }
        }
        Some(l)
    }
}

pub fn matvec(m: &Matrix, x: &Vector) -> Result<Vector> {
    Error::check_len(m.cols, x.len())?;
    let xs = x.as_slice();
    Ok((0..m.rows)
        .map(|r| m.row(r).iter().zip(xs).map(|(a, b)| a * b).sum())
        .collect())
}

/// Inverse-Hessian BFGS update
/// `H+ = (I - ρ s yᵀ) H (I - ρ y sᵀ) + ρ s sᵀ` with `ρ = 1 / yᵀs`.
///
/// Expanded as `H - ρ(s uᵀ + u sᵀ) + (ρ² yᵀHy + ρ) s sᵀ`, `u = H y`, which is
/// O(d²). Assumes `h` is symmetric.
pub fn rank_updates_bfgs(h: &Matrix, s: &Vector, y: &Vector) -> Result<Matrix> {
    if !h.is_square() {
        return Err(Error::Dimension {
            expected: h.rows,
            found: h.cols,
        });
    }
    Error::check_len(h.rows, s.len())?;
    Error::check_len(h.rows, y.len())?;
    let curvature = y.dot(s)?;
    if !(curvature > 0.0) {
        return Err(Error::CurvatureCondition { curvature });
    }
    let rho = 1.0 / curvature;
    let u = matvec(h, y)?;
    let yhy = y.dot(&u)?;
    let ss_coef = rho * rho * yhy + rho;
    let n = h.rows;
    let (s, u) = (s.as_slice(), u.as_slice());
    let mut out = h.clone();
    for i in 0..n {
        for j in i..n {
            let v = h.get(i, j) - rho * (s[i] * u[j] + u[i] * s[j]) + ss_coef * s[i] * s[j];
            out.data[i * n + j] = v;
            out.data[j * n + i] = v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    fn random_matrix(rng: &mut Rng, rows: usize, cols: usize) -> Matrix {
        let data = (0..rows * cols).map(|_| rng.uniform(-1.0, 1.0)).collect();
        Matrix::from_row_major(rows, cols, data).unwrap()
    }

    /// Evaluates the update with explicit dense products.
    fn dense_bfgs(h: &Matrix, s: &Vector, y: &Vector) -> Matrix {
        let n = h.rows();
        let rho = 1.0 / y.dot(s).unwrap();
        let mut left = Matrix::identity(n);
        let mut right = Matrix::identity(n);
        let mut ss = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                left.set(i, j, left.get(i, j) - rho * s[i] * y[j]);
                right.set(i, j, right.get(i, j) - rho * y[i] * s[j]);
                ss.set(i, j, rho * s[i] * s[j]);
            }
        }
        let mut out = left.matmul(h).unwrap().matmul(&right).unwrap();
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, out.get(i, j) + ss.get(i, j));
            }
        }
        out
    }

    #[test]
    fn matvec_identity_and_zero() {
        let x = Vector::from(vec![1.0, 2.0, 3.0]);
        assert_eq!(matvec(&Matrix::identity(3), &x).unwrap(), x);
        assert_eq!(matvec(&Matrix::zeros(3, 3), &x).unwrap(), Vector::zeros(3));
        assert!(matvec(&Matrix::zeros(2, 2), &x).is_err());
    }

    #[test]
    fn matvec_matches_double_loop() {
        let mut rng = Rng::new(3);
        let m = random_matrix(&mut rng, 5, 5);
        let x: Vector = (0..5).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let got = matvec(&m, &x).unwrap();
        for i in 0..5 {
            let mut acc = 0.0;
            for j in 0..5 {
                acc += m.get(i, j) * x[j];
            }
            assert!((got[i] - acc).abs() < 1e-12);
        }
    }

    #[test]
    fn bfgs_secant_unit_pair() {
        let s = Vector::from(vec![1.0, 0.0]);
        let h1 = rank_updates_bfgs(&Matrix::identity(2), &s, &s).unwrap();
        assert_eq!(matvec(&h1, &s).unwrap(), s);
    }

    #[test]
    fn bfgs_matches_dense_formula() {
        let s = Vector::from(vec![1.0, 2.0]);
        let y = Vector::from(vec![2.0, 1.0]);
        let h1 = rank_updates_bfgs(&Matrix::identity(2), &s, &y).unwrap();
        let oracle = dense_bfgs(&Matrix::identity(2), &s, &y);
        assert!(h1.max_abs_diff(&oracle).unwrap() < 1e-12);
        let hy = matvec(&h1, &y).unwrap();
        assert!(hy.sub(&s).unwrap().norm_inf() < 1e-12);
        assert!(h1.asymmetry() < 1e-12);
    }

    #[test]
    fn bfgs_rejects_negative_curvature() {
        let s = Vector::from(vec![1.0, 0.0]);
        let y = Vector::from(vec![-1.0, 0.0]);
        let err = rank_updates_bfgs(&Matrix::identity(2), &s, &y).unwrap_err();
        assert!(matches!(err, Error::CurvatureCondition { .. }));
    }

    #[test]
    fn bfgs_preserves_positive_definiteness() {
        let mut rng = Rng::new(11);
        for d in [2usize, 7, 20, 50] {
            let a = random_matrix(&mut rng, d, d);
            let mut h = a.matmul(&a.transpose()).unwrap();
            for i in 0..d {
                h.set(i, i, h.get(i, i) + 1.0);
            }
            for _ in 0..5 {
                let s: Vector = (0..d).map(|_| rng.uniform(-1.0, 1.0)).collect();
                let mut y: Vector = (0..d).map(|_| rng.uniform(-1.0, 1.0)).collect();
                if y.dot(&s).unwrap() <= 0.0 {
                    y = y.neg();
                }
                h = rank_updates_bfgs(&h, &s, &y).unwrap();
                assert!(h.cholesky().is_some(), "lost PD at d={d}");
            }
        }
    }

    #[test]
    fn cholesky_detects_indefinite() {
        let m = Matrix::from_row_major(2, 2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(m.cholesky().is_none());
        assert!(Matrix::identity(3).cholesky().is_some());
    }
}

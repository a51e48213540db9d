use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Dense vector of `f64` with a length fixed at construction.
///
/// Binary operations check lengths and fail with [`Error::Dimension`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn zeros(len: usize) -> Self {
        Vector(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn dot(&self, other: &Vector) -> Result<f64> {
        dot(self, other)
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &Vector) -> Result<()> {
        Error::check_len(self.len(), x.len())?;
        for (s, xi) in self.0.iter_mut().zip(&x.0) {
            *s += a * xi;
        }
        Ok(())
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scaled(&self, a: f64) -> Vector {
        Vector(self.0.iter().map(|x| a * x).collect())
    }

    pub fn scale(&mut self, a: f64) {
        for x in &mut self.0 {
            *x *= a;
        }
    }

    pub fn neg(&self) -> Vector {
        Vector(self.0.iter().map(|x| -x).collect())
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn zip_map(&self, other: &Vector, f: impl Fn(f64, f64) -> f64) -> Result<Vector> {
        Error::check_len(self.len(), other.len())?;
        Ok(Vector(
            self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl From<&[f64]> for Vector {
    fn from(v: &[f64]) -> Self {
        Vector(v.to_vec())
    }
}

impl FromIterator<f64> for Vector {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        Vector(iter.into_iter().collect())
    }
}

impl AsRef<[f64]> for Vector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

/// Inner product, summed in index order.
pub fn dot(a: &Vector, b: &Vector) -> Result<f64> {
    Error::check_len(a.len(), b.len())?;
    Ok(a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    #[test]
    fn dot_hand_values() {
        let a = Vector::from(vec![1.0, 2.0, 3.0]);
        let b = Vector::from(vec![4.0, 5.0, 6.0]);
        assert_eq!(dot(&a, &b).unwrap(), 32.0);
        assert_eq!(dot(&a, &Vector::zeros(3)).unwrap(), 0.0);
    }

    #[test]
    fn dot_length_mismatch() {
        let err = dot(&Vector::zeros(2), &Vector::zeros(3)).unwrap_err();
        assert!(matches!(err, Error::Dimension { expected: 2, found: 3 }));
    }

    #[test]
    fn dot_matches_naive_sum() {
        let mut rng = Rng::new(7);
        let a: Vector = (0..100).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let b: Vector = (0..100).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let mut reference = 0.0;
        for i in 0..100 {
            reference += a[i] * b[i];
        }
        let got = dot(&a, &b).unwrap();
        assert!((got - reference).abs() <= 1e-12 * reference.abs().max(1.0));
    }

    #[test]
    fn axpy_and_sub() {
        let mut a = Vector::from(vec![1.0, 1.0]);
        a.axpy(2.0, &Vector::from(vec![1.0, -1.0])).unwrap();
        assert_eq!(a.as_slice(), &[3.0, -1.0]);
        assert_eq!(a.sub(&a).unwrap(), Vector::zeros(2));
        assert!(a.axpy(1.0, &Vector::zeros(3)).is_err());
    }
}

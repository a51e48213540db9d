//! Curvature pairs and the two inverse-Hessian representations: a dense
//! matrix updated by BFGS, or a bounded pair buffer applied by the two-loop
//! recursion.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::numerics::{rank_updates_bfgs, Matrix, Vector};

/// Pairs with `qᵀp <= SAFEGUARD · ‖p‖‖q‖` are not used for updates.
pub const CURVATURE_SAFEGUARD: f64 = 1e-8;

/// Displacement `p` and gradient difference `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvaturePair {
    p: Vector,
    q: Vector,
    qp: f64,
}

impl CurvaturePair {
    pub fn new(p: Vector, q: Vector) -> Result<Self> {
        let qp = q.dot(&p)?;
        Ok(CurvaturePair { p, q, qp })
    }

    pub fn p(&self) -> &Vector {
        &self.p
    }

    pub fn q(&self) -> &Vector {
        &self.q
    }

    /// `qᵀp`
    pub fn curvature(&self) -> f64 {
        self.qp
    }

    pub fn passes_safeguard(&self) -> bool {
        self.qp.is_finite() && self.qp > CURVATURE_SAFEGUARD * self.p.norm() * self.q.norm()
    }
}

/// FIFO of the most recent `capacity` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureBuffer {
    capacity: usize,
    pairs: VecDeque<CurvaturePair>,
}

impl CurvatureBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Argument("curvature memory must be at least 1".into()));
        }
        Ok(CurvatureBuffer {
            capacity,
            pairs: VecDeque::with_capacity(capacity),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Oldest first.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &CurvaturePair> {
        self.pairs.iter()
    }

    /// Appends `pair`, evicting the oldest when full. Does not apply the
    /// safeguard; see [`InverseHessian::update`].
    pub fn push(&mut self, pair: CurvaturePair) {
        if self.pairs.len() == self.capacity {
            self.pairs.pop_front();
        }
        self.pairs.push_back(pair);
    }

    /// Scalar initial inverse Hessian: the mean of `pᵀq / qᵀq` over the
    /// stored pairs, which averages out sampling noise in any single pair.
    /// `1.0` for an empty buffer.
    pub fn initial_scaling(&self) -> f64 {
        if self.pairs.is_empty() {
            return 1.0;
        }
        let total: f64 = self
            .pairs
            .iter()
            .map(|pair| pair.qp / pair.q.dot(&pair.q).expect("pair lengths checked"))
            .sum();
        total / self.pairs.len() as f64
    }
}

/// Inverse-Hessian update with a NAQ pair, `(s, y) := (p, q)` in the BFGS
/// formula. Fails with [`Error::CurvatureCondition`] when the pair does not
/// pass the safeguard; callers keep the previous matrix in that case.
pub fn naq_hessian_update(h: &Matrix, pair: &CurvaturePair) -> Result<Matrix> {
    if !pair.passes_safeguard() {
        return Err(Error::CurvatureCondition {
            curvature: pair.qp,
        });
    }
    rank_updates_bfgs(h, &pair.p, &pair.q)
}

/// Search direction `-H f`, where `H` is the matrix obtained by folding the
/// buffered pairs (oldest first) into `γ I` with `γ` from
/// [`CurvatureBuffer::initial_scaling`]. O(m·d).
pub fn two_loop_direction(f: &Vector, buffer: &CurvatureBuffer) -> Result<Vector> {
    for pair in buffer.iter() {
        Error::check_len(f.len(), pair.p.len())?;
    }
    let mut r = f.clone();
    let mut sigmas = Vec::with_capacity(buffer.len());
    for pair in buffer.iter().rev() {
        let sigma = pair.p.dot(&r)? / pair.qp;
        r.axpy(-sigma, &pair.q)?;
        sigmas.push(sigma);
    }
    r.scale(buffer.initial_scaling());
    for (pair, sigma) in buffer.iter().zip(sigmas.into_iter().rev()) {
        let beta = pair.q.dot(&r)? / pair.qp;
        r.axpy(sigma - beta, &pair.p)?;
    }
    Ok(r.neg())
}

/// How curvature is stored by a quasi-Newton optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Memory {
    /// Dense `d × d` matrix, starting from the identity.
    Full,
    /// Last `m` pairs, applied by the two-loop recursion.
    Limited(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InverseHessian {
    /// Dense matrix; `fresh` until the first accepted pair, at which point the
    /// identity is rescaled by `pᵀq / qᵀq` before the update.
    Dense { h: Matrix, fresh: bool },
    Limited(CurvatureBuffer),
}

impl InverseHessian {
    pub fn new(memory: Memory, dim: usize) -> Result<Self> {
        Ok(match memory {
            Memory::Full => InverseHessian::Dense {
                h: Matrix::identity(dim),
                fresh: true,
            },
            Memory::Limited(m) => InverseHessian::Limited(CurvatureBuffer::new(m)?),
        })
    }

    /// The dense matrix, if this is the full-memory form.
    pub fn matrix(&self) -> Option<&Matrix> {
        match self {
            InverseHessian::Dense { h, .. } => Some(h),
            InverseHessian::Limited(_) => None,
        }
    }

    /// `-H f`
    pub fn direction(&self, f: &Vector) -> Result<Vector> {
        match self {
            InverseHessian::Dense { h, .. } => Ok(h.matvec(f)?.neg()),
            InverseHessian::Limited(buf) => two_loop_direction(f, buf),
        }
    }

    /// Applies the pair if it passes the safeguard; returns whether it did.
    pub fn update(&mut self, pair: CurvaturePair) -> Result<bool> {
        match self {
            InverseHessian::Dense { h, fresh } => {
                let scaled;
                let base = if *fresh && pair.passes_safeguard() {
                    scaled = Matrix::scaled_identity(h.rows(), pair.qp / pair.q.dot(&pair.q)?);
                    &scaled
                } else {
                    &*h
                };
                match naq_hessian_update(base, &pair) {
                    Ok(next) => {
                        *h = next;
                        *fresh = false;
                        Ok(true)
                    }
                    Err(Error::CurvatureCondition { .. }) => Ok(false),
                    Err(e) => Err(e),
                }
            }
            InverseHessian::Limited(buf) => {
                Error::check_len(pair.p.len(), pair.q.len())?;
                if pair.passes_safeguard() {
                    buf.push(pair);
                    Ok(true)
                } else {
                    Ok(false)
                }
            }
        }
    }
}

//! Symmetric tridiagonal storage and the tridiagonal + rank-one solve used by
//! every Newton step.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix stored as its main and first off-diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i + 1`.
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn zeros(n: usize) -> Self {
        SymTridiag {
            diag: vec![0.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn identity(n: usize) -> Self {
        SymTridiag {
            diag: vec![1.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        debug_assert_eq!(x.len(), n);
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for i in 0..n.saturating_sub(1) {
            y[i] += self.off[i] * x[i + 1];
            y[i + 1] += self.off[i] * x[i];
        }
        y
    }

    /// `xᵀ A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// `self += s · other`.
    pub fn axpy(&mut self, s: f64, other: &SymTridiag) {
        debug_assert_eq!(self.len(), other.len());
        for (a, b) in self.diag.iter_mut().zip(&other.diag) {
            *a += s * b;
        }
        for (a, b) in self.off.iter_mut().zip(&other.off) {
            *a += s * b;
        }
    }

    pub fn scaled(&self, s: f64) -> SymTridiag {
        SymTridiag {
            diag: self.diag.iter().map(|v| s * v).collect(),
            off: self.off.iter().map(|v| s * v).collect(),
        }
    }

    /// Leading `n × n` block.
    pub fn truncated(&self, n: usize) -> SymTridiag {
        SymTridiag {
            diag: self.diag[..n].to_vec(),
            off: self.off[..n.saturating_sub(1)].to_vec(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = self.diag[i];
            if i + 1 < n {
                a[i][i + 1] = self.off[i];
                a[i + 1][i] = self.off[i];
            }
        }
        a
    }

    /// Thomas elimination; fails on an exactly zero (or non-finite) pivot.
    pub fn factor(&self) -> Result<TridiagFactor> {
        let n = self.len();
        let mut pivots = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n.saturating_sub(1));
        for i in 0..n {
            let p = if i == 0 {
                self.diag[0]
            } else {
                self.diag[i] - self.off[i - 1] * upper[i - 1]
            };
            if p == 0.0 || !p.is_finite() {
                return Err(Error::SingularCore { row: i });
            }
            pivots.push(p);
            if i + 1 < n {
                upper.push(self.off[i] / p);
            }
        }
        Ok(TridiagFactor {
            pivots,
            upper,
            lower: self.off.clone(),
        })
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let f = self.factor()?;
        let mut x = rhs.to_vec();
        f.solve_in_place(&mut x);
        Ok(x)
    }
}

/// Result of forward elimination, reusable for several right-hand sides.
#[derive(Clone, Debug)]
pub struct TridiagFactor {
    pivots: Vec<f64>,
    upper: Vec<f64>,
    lower: Vec<f64>,
}

impl TridiagFactor {
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.pivots.len();
        debug_assert_eq!(x.len(), n);
        if n == 0 {
            return;
        }
        x[0] /= self.pivots[0];
        for i in 1..n {
            x[i] = (x[i] - self.lower[i - 1] * x[i - 1]) / self.pivots[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.upper[i] * x[i + 1];
        }
    }
}

/// Rank-one matrix `e_row · coeffsᵀ`: a single dense row.
#[derive(Clone, Debug, PartialEq)]
pub struct RankOne {
    pub row: usize,
    pub coeffs: Vec<f64>,
}

impl RankOne {
    pub fn mul_vec_add(&self, x: &[f64], y: &mut [f64]) {
        y[self.row] += dot(&self.coeffs, x);
    }
}

/// Solves `(core + rank_one) x = rhs` by Thomas on `core` for `rhs` and
/// `e_row`, followed by the Sherman–Morrison correction.
pub fn solve_structured(
    core: &SymTridiag,
    rank_one: Option<&RankOne>,
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = core.len();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: rhs.len(),
        });
    }
    let f = core.factor()?;
    let mut z = rhs.to_vec();
    f.solve_in_place(&mut z);

    let Some(ro) = rank_one else {
        return Ok(z);
    };
    if ro.coeffs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: ro.coeffs.len(),
        });
    }
    let mut q = vec![0.0; n];
    q[ro.row] = 1.0;
    f.solve_in_place(&mut q);

    let vq = dot(&ro.coeffs, &q);
    let denominator = 1.0 + vq;
    if denominator.abs() <= 64.0 * f64::EPSILON * (1.0 + vq.abs()) {
        return Err(Error::SingularUpdate { denominator });
    }
    let scale = dot(&ro.coeffs, &z) / denominator;
    for (zi, qi) in z.iter_mut().zip(&q) {
        *zi -= scale * qi;
    }
    Ok(z)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

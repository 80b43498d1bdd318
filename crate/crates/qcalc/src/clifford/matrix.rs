//! Dense matrices over the cyclotomic scalars, and the tensor-product
//! matrix realization of C_{p,N}. This is the independent evaluation path:
//! the defining relations are re-verified entry by entry when a
//! representation is built, and [`MatrixRep::represent`] turns any element
//! into a concrete matrix for cross-checking.

use super::{CliffordElement, CliffordError};
use crate::scalar::{conductor, CycScalar, QContext};

/// Row-major square matrix with exact cyclotomic entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    n: usize,
    n_order: u32,
    data: Vec<CycScalar>,
}

impl Matrix {
    /// `n_order` is the algebra order N; entries live in the cyclotomic
    /// field of the matching conductor.
    pub fn zero(n: usize, n_order: u32) -> Self {
        Matrix { n, n_order, data: vec![CycScalar::zero(conductor(n_order)); n * n] }
    }

    pub fn identity(n: usize, n_order: u32) -> Self {
        let mut m = Self::zero(n, n_order);
        for i in 0..n {
            m.data[i * n + i] = CycScalar::one(conductor(n_order));
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn at(&self, i: usize, j: usize) -> &CycScalar {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, c: CycScalar) {
        self.data[i * self.n + j] = c;
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Matrix {
            n: self.n,
            n_order: self.n_order,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.checked_add(b).expect("same order"))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Matrix {
            n: self.n,
            n_order: self.n_order,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.checked_sub(b).expect("same order"))
                .collect(),
        }
    }

    pub fn scale(&self, s: &CycScalar) -> Self {
        Matrix {
            n: self.n,
            n_order: self.n_order,
            data: self.data.iter().map(|a| a.checked_mul(s).expect("same order")).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = Self::zero(self.n, self.n_order);
        for i in 0..self.n {
            for k in 0..self.n {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..self.n {
                    let b = other.at(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let prod = a.checked_mul(b).expect("same order");
                    let cur = out.at(i, j).checked_add(&prod).expect("same order");
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::identity(self.n, self.n_order);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Kronecker product; the left factor indexes the coarse blocks.
    pub fn kron(&self, other: &Self) -> Self {
        let n = self.n * other.n;
        let mut out = Self::zero(n, self.n_order);
        for i1 in 0..self.n {
            for j1 in 0..self.n {
                let a = self.at(i1, j1);
                if a.is_zero() {
                    continue;
                }
                for i2 in 0..other.n {
                    for j2 in 0..other.n {
                        let b = other.at(i2, j2);
                        if b.is_zero() {
                            continue;
                        }
                        out.set(
                            i1 * other.n + i2,
                            j1 * other.n + j2,
                            a.checked_mul(b).expect("same order"),
                        );
                    }
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(CycScalar::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n, self.n_order)
    }
}

/// The cyclic shift: s1[i][j] = 1 when j = i+1 mod N.
pub fn sigma1(n_order: u32) -> Matrix {
    let n = n_order as usize;
    let mut m = Matrix::zero(n, n_order);
    for i in 0..n {
        m.set(i, (i + 1) % n, CycScalar::one(conductor(n_order)));
    }
    m
}

/// The grading: s3 = diag(1, q, .., q^{N-1}).
pub fn sigma3(n_order: u32) -> Matrix {
    let ctx = QContext::new(n_order).expect("order >= 2");
    let n = n_order as usize;
    let mut m = Matrix::zero(n, n_order);
    for i in 0..n {
        m.set(i, i, ctx.q_pow(i as i64));
    }
    m
}

/// s2 = c·s3·s1 with c chosen so that s2^N = 1: (s3 s1)^N = q^{N(N-1)/2}·1,
/// which is already 1 for odd N but -1 for even N, so even N takes c = √q.
pub fn sigma2(n_order: u32) -> Matrix {
    let base = sigma3(n_order).mul(&sigma1(n_order));
    if n_order % 2 == 0 {
        let ctx = QContext::new(n_order).expect("order >= 2");
        base.scale(&ctx.sqrt_q())
    } else {
        base
    }
}

/// Matrix images of the p generators, acting on (C^N)^{⊗k} with
/// k = max(1, p/2). Odd generators place s1 after l-1 copies of s3, even
/// ones place s2 there, and a final unpaired generator is s3^{⊗k}.
pub struct MatrixRep {
    p: usize,
    n_order: u32,
    gammas: Vec<Matrix>,
}

pub fn matrix_rep(p: usize, n_order: u32) -> Result<MatrixRep, CliffordError> {
    if p == 0 {
        return Err(CliffordError::IndexOutOfRange(0, 0));
    }
    let ctx = QContext::new(n_order)?;
    let k = std::cmp::max(1, p / 2);
    let s1 = sigma1(n_order);
    let s2 = sigma2(n_order);
    let s3 = sigma3(n_order);
    let n = n_order as usize;

    let slot_product = |mid: &Matrix, l: usize| -> Matrix {
        let mut m = Matrix::identity(1, n_order);
        for _ in 0..l - 1 {
            m = m.kron(&s3);
        }
        m = m.kron(mid);
        for _ in 0..k - l {
            m = m.kron(&Matrix::identity(n, n_order));
        }
        m
    };

    let mut gammas = Vec::with_capacity(p);
    for g in 1..=p {
        let m = if g % 2 == 0 {
            slot_product(&s2, g / 2)
        } else if (g + 1) / 2 == k + 1 {
            // unpaired last generator: s3 on every slot
            let mut m = Matrix::identity(1, n_order);
            for _ in 0..k {
                m = m.kron(&s3);
            }
            m
        } else {
            slot_product(&s1, (g + 1) / 2)
        };
        gammas.push(m);
    }

    // re-verify the defining relations entry by entry
    for (i, gi) in gammas.iter().enumerate() {
        assert!(gi.pow(n_order).is_identity(), "generator {} fails G^N = 1", i + 1);
        for (j, gj) in gammas.iter().enumerate().skip(i + 1) {
            let lhs = gi.mul(gj);
            let rhs = gj.mul(gi).scale(&ctx.q());
            assert!(lhs == rhs, "generators {} and {} fail the q-relation", i + 1, j + 1);
        }
    }

    Ok(MatrixRep { p, n_order, gammas })
}

impl MatrixRep {
    pub fn dim(&self) -> usize {
        self.gammas[0].dim()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn generator(&self, index: usize) -> &Matrix {
        &self.gammas[index]
    }

    /// Homomorphic image: each normal-ordered monomial becomes the ordered
    /// product of generator powers.
    pub fn represent(&self, elem: &CliffordElement) -> Matrix {
        assert_eq!(elem.p(), self.p);
        assert_eq!(elem.n_order(), self.n_order);
        let mut out = Matrix::zero(self.dim(), self.n_order);
        for (exps, c) in elem.terms() {
            let mut m = Matrix::identity(self.dim(), self.n_order);
            for (i, &a) in exps.iter().enumerate() {
                m = m.mul(&self.gammas[i].pow(a as u32));
            }
            out = out.add(&m.scale(c));
        }
        out
    }
}

//! Vectorization helpers and the local (memoryless) part of the generator:
//! coherent commutator and anti-commutator sinks.

use super::SinkSpec;
use crate::constants::RAD_PS_PER_CM;
use crate::error::{Error, Result};
use crate::exciton::ExcitonHamiltonian;
use crate::linalg::SplitMat;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// A superoperator on column-major vectorized density matrices, in ps⁻¹.
#[derive(Debug, Clone, PartialEq)]
pub struct LiouvilleOperator {
    pub mat: SplitMat,
    pub n: usize,
}

/// Column-major vec index of ρ[a,b].
#[inline]
pub(crate) fn vec_index(a: usize, b: usize, n: usize) -> usize {
    a + n * b
}

/// Index permutation implementing the transpose: (a,b) ↦ (b,a).
#[inline]
pub(crate) fn transpose_index(idx: usize, n: usize) -> usize {
    let a = idx % n;
    let b = idx / n;
    b + n * a
}

impl LiouvilleOperator {
    pub fn zeros(n: usize) -> Self {
        let m = n * n;
        Self {
            mat: SplitMat::zeros(m, m),
            n,
        }
    }

    pub fn dim(&self) -> usize {
        self.n * self.n
    }

    /// Apply to a density matrix (for tests and diagnostics).
    pub fn apply(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let n = self.n;
        let m = n * n;
        assert_eq!(rho.nrows(), n);
        let mut x_re = nalgebra::DVector::zeros(m);
        let mut x_im = nalgebra::DVector::zeros(m);
        for b in 0..n {
            for a in 0..n {
                let z = rho[(a, b)];
                x_re[vec_index(a, b, n)] = z.re;
                x_im[vec_index(a, b, n)] = z.im;
            }
        }
        let (y_re, y_im) = self.mat.mul_vec(&x_re, &x_im);
        DMatrix::from_fn(n, n, |a, b| {
            let i = vec_index(a, b, n);
            Complex64::new(y_re[i], y_im[i])
        })
    }
}

impl std::ops::AddAssign<&LiouvilleOperator> for LiouvilleOperator {
    fn add_assign(&mut self, rhs: &LiouvilleOperator) {
        assert_eq!(self.n, rhs.n);
        self.mat += &rhs.mat;
    }
}

impl std::ops::SubAssign<&LiouvilleOperator> for LiouvilleOperator {
    fn sub_assign(&mut self, rhs: &LiouvilleOperator) {
        assert_eq!(self.n, rhs.n);
        self.mat -= &rhs.mat;
    }
}

/// I⊗H̃ − H̃⊗I in rad/ps (the commutator map vec(H̃ρ − ρH̃) for symmetric H̃).
pub(crate) fn commutator_matrix(h: &ExcitonHamiltonian) -> DMatrix<f64> {
    let n = h.n();
    let m = n * n;
    let mut e = DMatrix::<f64>::zeros(m, m);
    let hm = h.matrix();
    for b in 0..n {
        for a in 0..n {
            let row = vec_index(a, b, n);
            for c in 0..n {
                e[(row, vec_index(c, b, n))] += hm[(a, c)] * RAD_PS_PER_CM;
                e[(row, vec_index(a, c, n))] -= hm[(c, b)] * RAD_PS_PER_CM;
            }
        }
    }
    e
}

/// Coherent part L_S = −i(I⊗H̃ − H̃⊗I).
pub fn build_coherent(h: &ExcitonHamiltonian) -> LiouvilleOperator {
    let n = h.n();
    let e = commutator_matrix(h);
    LiouvilleOperator {
        mat: SplitMat {
            re: DMatrix::zeros(n * n, n * n),
            im: -e,
        },
        n,
    }
}

/// Sink part L_eh = −Σ_j r_j (I⊗P_j + P_j⊗I): real diagonal with entry
/// −(r_a + r_b) at coherence (a,b).
pub fn build_sinks(n: usize, sinks: &SinkSpec) -> Result<LiouvilleOperator> {
    if sinks.trap_index >= n {
        return Err(Error::InvalidParameter(format!(
            "trap index {} out of range for n={n}",
            sinks.trap_index
        )));
    }
    let mut op = LiouvilleOperator::zeros(n);
    for b in 0..n {
        for a in 0..n {
            let i = vec_index(a, b, n);
            op.mat.re[(i, i)] = -(sinks.rate(a) + sinks.rate(b));
        }
    }
    Ok(op)
}

/// Local generator L_S + L_eh.
pub fn build_generator(h: &ExcitonHamiltonian, sinks: &SinkSpec) -> Result<LiouvilleOperator> {
    let mut op = build_coherent(h);
    op += &build_sinks(h.n(), sinks)?;
    Ok(op)
}

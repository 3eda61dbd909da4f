//! Minimal dense complex linear algebra: Hermitian matrix exponentials,
//! norms, and phase-insensitive gate comparison.
//!
//! Everything here operates on small (dim <= 5 in practice) row-major
//! matrices. The exponential goes through a cyclic Jacobi eigendecomposition
//! of the Hermitian input, so results are unitary by construction rather than
//! by truncation of a series.

use num_complex::Complex;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::real::{lit, Real};

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("matrix is not Hermitian: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    NotHermitian { residual: f64, tolerance: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("matrix of dimension {dim} requires {} entries, got {got}", dim * dim)]
    BadEntryCount { dim: usize, got: usize },
    #[error("matrix dimension must be positive")]
    ZeroDim,
}

/// Dense complex square matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<S> {
    dim: usize,
    data: Vec<Complex<S>>,
}

impl<S: Real> ComplexMatrix<S> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex::new(S::zero(), S::zero()); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex::new(S::one(), S::zero());
        }
        m
    }

    /// Builds a matrix from `dim * dim` row-major entries.
    pub fn from_entries(dim: usize, entries: Vec<Complex<S>>) -> Result<Self, MatrixError> {
        if dim == 0 {
            return Err(MatrixError::ZeroDim);
        }
        if entries.len() != dim * dim {
            return Err(MatrixError::BadEntryCount {
                dim,
                got: entries.len(),
            });
        }
        Ok(Self { dim, data: entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<S> {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: Complex<S>) {
        self.data[i * self.dim + j] = value;
    }

    pub fn entries(&self) -> &[Complex<S>] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    /// Matrix product; panics on dimension mismatch (internal misuse).
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.norm_sqr() == S::zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    /// Applies the matrix to a vector.
    pub fn apply(&self, v: &[Complex<S>]) -> Vec<Complex<S>> {
        assert_eq!(v.len(), self.dim, "vector length mismatch");
        let n = self.dim;
        let mut out = vec![Complex::new(S::zero(), S::zero()); n];
        for i in 0..n {
            let mut acc = Complex::new(S::zero(), S::zero());
            for j in 0..n {
                acc += self.data[i * n + j] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matrix difference dimension mismatch");
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        Self {
            dim: self.dim,
            data,
        }
    }

    /// Adds `c * |ket><bra|` in place.
    pub fn add_outer(&mut self, c: Complex<S>, ket: &[Complex<S>], bra: &[Complex<S>]) {
        let n = self.dim;
        assert!(ket.len() == n && bra.len() == n, "outer product length mismatch");
        for i in 0..n {
            let ci = c * ket[i];
            for j in 0..n {
                self.data[i * n + j] += ci * bra[j].conj();
            }
        }
    }

    pub fn frobenius_norm(&self) -> S {
        self.data
            .iter()
            .map(|z| z.norm_sqr())
            .fold(S::zero(), |a, b| a + b)
            .sqrt()
    }

    pub fn max_abs(&self) -> S {
        self.data
            .iter()
            .map(|z| z.norm())
            .fold(S::zero(), |a, b| a.max(b))
    }

    /// Largest entry-wise deviation from `M = M^dagger`.
    pub fn hermiticity_defect(&self) -> S {
        let n = self.dim;
        let mut worst = S::zero();
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// `(M + M^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let half = Complex::new(lit::<S>(0.5), S::zero());
        let adj = self.adjoint();
        let data = self
            .data
            .iter()
            .zip(adj.data)
            .map(|(a, b)| (*a + b) * half)
            .collect();
        Self {
            dim: self.dim,
            data,
        }
    }

    /// Frobenius norm of `U^dagger U - I`.
    pub fn unitarity_defect(&self) -> S {
        let n = self.dim;
        let product = self.adjoint().mul(self);
        let mut acc = S::zero();
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j { S::one() } else { S::zero() };
                let d = product.data[i * n + j] - Complex::new(expected, S::zero());
                acc += d.norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `tr(self^dagger rhs)` without forming the product.
    pub fn adjoint_trace(&self, rhs: &Self) -> Complex<S> {
        self.data
            .iter()
            .zip(&rhs.data)
            .fold(Complex::new(S::zero(), S::zero()), |acc, (a, b)| {
                acc + a.conj() * b
            })
    }

    /// Eigendecomposition of the Hermitian part via cyclic Jacobi sweeps.
    ///
    /// Returns eigenvalues in ascending order and the unitary matrix of
    /// eigenvector columns. The accumulated rotations keep the eigenvectors
    /// unitary to machine precision regardless of eigenvalue clustering.
    pub fn herm_eigen(&self) -> (Vec<S>, ComplexMatrix<S>) {
        let n = self.dim;
        let mut a = self.clone();
        // Work on the exactly Hermitian average so rounding asymmetry in the
        // input cannot leak into the eigenbasis.
        let adj = a.adjoint();
        for (x, y) in a.data.iter_mut().zip(adj.data) {
            *x = (*x + y) * Complex::new(lit::<S>(0.5), S::zero());
        }
        let mut v = Self::identity(n);
        let scale = a.frobenius_norm().max(S::min_positive_value());
        let stop = scale * S::epsilon() * lit::<S>(0.5);

        for _sweep in 0..60 {
            let mut off = S::zero();
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a.get(p, q).norm_sqr();
                }
            }
            if off.sqrt() <= stop {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a.get(p, q);
                    let m = apq.norm();
                    if m <= stop * lit::<S>(1e-2) {
                        a.set(p, q, Complex::new(S::zero(), S::zero()));
                        a.set(q, p, Complex::new(S::zero(), S::zero()));
                        continue;
                    }
                    let u = apq / Complex::new(m, S::zero());
                    let app = a.get(p, p).re;
                    let aqq = a.get(q, q).re;
                    let tau = (app - aqq) / (lit::<S>(2.0) * m);
                    let t = if tau >= S::zero() {
                        S::one() / (tau + (S::one() + tau * tau).sqrt())
                    } else {
                        -S::one() / (-tau + (S::one() + tau * tau).sqrt())
                    };
                    let c = S::one() / (S::one() + t * t).sqrt();
                    let s = t * c;
                    let cs = Complex::new(c, S::zero());
                    let su = Complex::new(s, S::zero()) * u;
                    let su_conj = su.conj();

                    // Columns: A <- A J with J = [[c, -s u], [s conj(u), c]].
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, cs * akp + su_conj * akq);
                        a.set(k, q, cs * akq - su * akp);
                    }
                    // Rows: A <- J^dagger A.
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, cs * apk + su * aqk);
                        a.set(q, k, cs * aqk - su_conj * apk);
                    }
                    // Re-symmetrize the zeroed pair against rounding drift.
                    a.set(p, q, Complex::new(S::zero(), S::zero()));
                    a.set(q, p, Complex::new(S::zero(), S::zero()));
                    let hpp = a.get(p, p);
                    let hqq = a.get(q, q);
                    a.set(p, p, Complex::new(hpp.re, S::zero()));
                    a.set(q, q, Complex::new(hqq.re, S::zero()));

                    for k in 0..n {
                        let vkp = v.get(k, p);
                        let vkq = v.get(k, q);
                        v.set(k, p, cs * vkp + su_conj * vkq);
                        v.set(k, q, cs * vkq - su * vkp);
                    }
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        let diag: Vec<S> = (0..n).map(|i| a.get(i, i).re).collect();
        order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("finite eigenvalues"));
        let values: Vec<S> = order.iter().map(|&i| diag[i]).collect();
        let mut vectors = Self::zeros(n);
        for (new_col, &old_col) in order.iter().enumerate() {
            for k in 0..n {
                vectors.set(k, new_col, v.get(k, old_col));
            }
        }
        (values, vectors)
    }

    /// `exp(i s M)` for Hermitian `M`, through the eigendecomposition.
    ///
    /// Rejects inputs whose Hermiticity defect exceeds
    /// `Real::herm_tol() * max|M|`; any larger defect signals a caller bug
    /// rather than rounding.
    pub fn herm_expm(&self, s: S) -> Result<ComplexMatrix<S>, MatrixError> {
        let defect = self.hermiticity_defect();
        let tolerance = S::herm_tol() * self.max_abs();
        if defect > tolerance {
            return Err(MatrixError::NotHermitian {
                residual: defect.to_f64().unwrap_or(f64::NAN),
                tolerance: tolerance.to_f64().unwrap_or(f64::NAN),
            });
        }
        let (values, vectors) = self.herm_eigen();
        let n = self.dim;
        let phases: Vec<Complex<S>> = values
            .iter()
            .map(|&lambda| Complex::from_polar(S::one(), s * lambda))
            .collect();
        // V diag(e^{i s lambda}) V^dagger
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex::new(S::zero(), S::zero());
                for k in 0..n {
                    acc += vectors.get(i, k) * phases[k] * vectors.get(j, k).conj();
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }
}

/// Phase-insensitive distance `1 - |tr(U^dagger V)| / d`, clamped to `[0, 1]`.
///
/// Zero exactly when `U = e^{i chi} V`; global phases never contribute.
pub fn gate_distance<S: Real>(u: &ComplexMatrix<S>, v: &ComplexMatrix<S>) -> Result<S, MatrixError> {
    if u.dim() != v.dim() {
        return Err(MatrixError::DimMismatch {
            left: u.dim(),
            right: v.dim(),
        });
    }
    let overlap = u.adjoint_trace(v).norm();
    let d = S::from_usize(u.dim()).expect("dimension fits scalar");
    Ok((S::one() - overlap / d).max(S::zero()).min(S::one()))
}

/// Phase-aligned Frobenius distance `min_chi ||U - e^{i chi} V||_F`.
///
/// Linear in a small propagator defect where [`gate_distance`] is quadratic,
/// so convergence-order fits resolve errors far below the trace metric's
/// cancellation floor.
pub fn aligned_distance<S: Real>(
    u: &ComplexMatrix<S>,
    v: &ComplexMatrix<S>,
) -> Result<S, MatrixError> {
    if u.dim() != v.dim() {
        return Err(MatrixError::DimMismatch {
            left: u.dim(),
            right: v.dim(),
        });
    }
    let z = u.adjoint_trace(v);
    let m = z.norm();
    let phase = if m > S::zero() {
        z.conj() / Complex::new(m, S::zero())
    } else {
        Complex::new(S::one(), S::zero())
    };
    let n = u.dim();
    let mut acc = S::zero();
    for i in 0..n {
        for j in 0..n {
            let d = u.get(i, j) - phase * v.get(i, j);
            acc += d.norm_sqr();
        }
    }
    Ok(acc.sqrt())
}

/// `<bra|ket>` with the physics convention: the left argument is conjugated.
pub fn inner_product<S: Real>(bra: &[Complex<S>], ket: &[Complex<S>]) -> Complex<S> {
    assert_eq!(bra.len(), ket.len(), "inner product length mismatch");
    bra.iter()
        .zip(ket)
        .fold(Complex::new(S::zero(), S::zero()), |acc, (a, b)| {
            acc + a.conj() * b
        })
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr<S> {
    dim: usize,
    re: Vec<S>,
    im: Vec<S>,
}

impl<S: Real + Serialize> Serialize for ComplexMatrix<S> {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> Result<Ser::Ok, Ser::Error> {
        let repr = MatrixRepr {
            dim: self.dim,
            re: self.data.iter().map(|z| z.re).collect(),
            im: self.data.iter().map(|z| z.im).collect(),
        };
        repr.serialize(serializer)
    }
}

impl<'de, S: Real + Deserialize<'de>> Deserialize<'de> for ComplexMatrix<S> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = MatrixRepr::<S>::deserialize(deserializer)?;
        if repr.re.len() != repr.dim * repr.dim || repr.im.len() != repr.dim * repr.dim {
            return Err(D::Error::custom(format!(
                "matrix of dim {} requires {} re/im entries",
                repr.dim,
                repr.dim * repr.dim
            )));
        }
        let data = repr
            .re
            .into_iter()
            .zip(repr.im)
            .map(|(re, im)| Complex::new(re, im))
            .collect();
        Ok(ComplexMatrix {
            dim: repr.dim,
            data,
        })
    }
}

//! Auxiliary frames: time-parametrized orthonormal bases from which the
//! Hamiltonian and the evolving subspace are constructed.
//!
//! The two built-in frames (one qubit on three levels, two qubits on five)
//! carry analytic time derivatives via the chain rule through the path's
//! `alpha_dot`, `beta_dot`, so the parallel-transport residual downstream is
//! limited by integrator error rather than differentiation error. Frames
//! loaded from tables fall back to central differences.
//!
//! Basis ordering is fixed: one qubit `(|0>, |1>, |e>)`; two qubits
//! `(|00>, |01>, |10>, |11>, |ee>)`. Frame vectors are indexed `0..N`, with
//! the auxiliary vector last.

use num_complex::Complex;
use serde::Deserialize;
use thiserror::Error;

use crate::numkit::inner_product;
use crate::real::{lit, Real};
use crate::spherepaths::SpherePath;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error(
        "path is not pole-anchored: alpha(0) = {alpha_start:.3e}, alpha(tau) = {alpha_end:.3e}"
    )]
    PathNotPoleAnchored { alpha_start: f64, alpha_end: f64 },
    #[error("frame table is invalid: {0}")]
    BadTable(String),
}

/// Static gate-axis angles plus the time-dependent path driving the frame.
#[derive(Debug, Clone)]
pub struct FrameParams<S> {
    pub theta: S,
    pub varphi: S,
    pub path: SpherePath<S>,
}

/// Choice of the auxiliary-vector phase rate `gamma_dot`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Gauge {
    /// `gamma_dot = beta_dot (3 + cos alpha) / 2`: removes the residual
    /// coupling so the Hamiltonian reduces to two drives plus a detuning.
    #[default]
    CouplingFree,
    /// `gamma_dot = 0`. Only the auxiliary level's dynamical phase changes;
    /// the computational block of the Hamiltonian is gauge-independent.
    Zero,
}

/// A cyclic orthonormal basis `{nu_k(t)}` of an `N = L + 1` dimensional
/// space, with the first `L` vectors spanning the computational subspace at
/// `t = 0`.
pub trait AuxiliaryFrame<S: Real> {
    /// Full space dimension `N`.
    fn space_dim(&self) -> usize;

    /// Computational dimension `L = N - 1`.
    fn logical_dim(&self) -> usize;

    /// Evolution period `tau`.
    fn period(&self) -> S;

    /// Frame vector `nu_k(t)`, `k` in `0..N`, as canonical-basis components.
    fn basis_vector(&self, k: usize, t: S) -> Vec<Complex<S>>;

    /// Auxiliary phase rate `gamma_dot(t)`.
    fn gamma_dot(&self, t: S) -> S;

    /// Time derivative of `nu_k(t)`. The default is a central difference
    /// with step `1e-6 tau` (shifted one-sided at the period boundaries);
    /// frames with analytic derivatives override it.
    fn basis_vector_dot(&self, k: usize, t: S) -> Vec<Complex<S>> {
        let h = self.period() * lit::<S>(1e-6);
        let lo = (t - h).max(S::zero());
        let hi = (t + h).min(self.period());
        let up = self.basis_vector(k, hi);
        let down = self.basis_vector(k, lo);
        let denominator = hi - lo;
        up.into_iter()
            .zip(down)
            .map(|(u, d)| (u - d) / Complex::new(denominator, S::zero()))
            .collect()
    }

    /// How far from exact orthonormality this frame is allowed to drift
    /// before the engine rejects it. Analytic frames use the scalar default;
    /// interpolated frames report their own calibration.
    fn orthonormality_tolerance(&self) -> S {
        S::ortho_tol()
    }

    /// Accuracy of `basis_vector_dot` relative to the true derivative, as a
    /// bound on `|Re <nu_k|nu_k_dot>|` (exactly zero for a normalized vector
    /// differentiated exactly). Gates the engine's gauge-term assertion.
    fn derivative_tolerance(&self) -> S {
        S::ortho_tol()
    }
}

/// Largest entry-wise deviation of the Gram matrix from the identity at `t`.
pub fn orthonormality_residual<S: Real, F: AuxiliaryFrame<S> + ?Sized>(frame: &F, t: S) -> S {
    let n = frame.space_dim();
    let vectors: Vec<_> = (0..n).map(|k| frame.basis_vector(k, t)).collect();
    let mut worst = S::zero();
    for j in 0..n {
        for k in 0..n {
            let g = inner_product(&vectors[j], &vectors[k]);
            let expected = if j == k { S::one() } else { S::zero() };
            worst = worst.max((g - Complex::new(expected, S::zero())).norm());
        }
    }
    worst
}

/// Largest deviation over `k` of a central difference of `nu_k` from the
/// frame's own derivative; second order in `h` for analytic frames.
pub fn derivative_selfcheck<S: Real, F: AuxiliaryFrame<S> + ?Sized>(frame: &F, t: S, h: S) -> S {
    assert!(h > S::zero(), "step must be positive");
    let two_h = Complex::new(lit::<S>(2.0) * h, S::zero());
    let mut worst = S::zero();
    for k in 0..frame.space_dim() {
        let up = frame.basis_vector(k, t + h);
        let down = frame.basis_vector(k, t - h);
        let analytic = frame.basis_vector_dot(k, t);
        let mut acc = S::zero();
        for ((u, d), a) in up.iter().zip(&down).zip(&analytic) {
            let diff = (u - d) / two_h - a;
            acc += diff.norm_sqr();
        }
        worst = worst.max(acc.sqrt());
    }
    worst
}

/// Frobenius distance between the projector onto `span{nu_0(0)..nu_{L-1}(0)}`
/// and the projector onto the first `L` canonical basis vectors.
pub fn computational_span_residual<S: Real, F: AuxiliaryFrame<S> + ?Sized>(frame: &F) -> S {
    let n = frame.space_dim();
    let l = frame.logical_dim();
    let mut projector = vec![Complex::new(S::zero(), S::zero()); n * n];
    for k in 0..l {
        let v = frame.basis_vector(k, S::zero());
        for i in 0..n {
            for j in 0..n {
                projector[i * n + j] += v[i] * v[j].conj();
            }
        }
    }
    let mut acc = S::zero();
    for i in 0..n {
        for j in 0..n {
            let expected = if i == j && i < l { S::one() } else { S::zero() };
            acc += (projector[i * n + j] - Complex::new(expected, S::zero())).norm_sqr();
        }
    }
    acc.sqrt()
}

fn check_pole_anchored<S: Real>(path: &SpherePath<S>) -> Result<(), FrameError> {
    if path.is_pole_anchored() {
        Ok(())
    } else {
        let start = path.sample(S::zero());
        let end = path.sample(path.total_duration());
        Err(FrameError::PathNotPoleAnchored {
            alpha_start: start.alpha.to_f64().unwrap_or(f64::NAN),
            alpha_end: end.alpha.to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// The three frame vectors of the one-qubit construction at the given
/// angles, ordered `(nu_1, nu_2, nu_3)` over the basis `(|0>, |1>, |e>)`.
fn one_qubit_vectors<S: Real>(theta: S, varphi: S, alpha: S, beta: S) -> [[Complex<S>; 3]; 3] {
    let half = lit::<S>(0.5);
    let (ct, st) = ((theta * half).cos(), (theta * half).sin());
    let (ca, sa) = ((alpha * half).cos(), (alpha * half).sin());
    let e_ip = Complex::from_polar(S::one(), varphi);
    let e_im = Complex::from_polar(S::one(), -varphi);
    let e_ib = Complex::from_polar(S::one(), beta);
    let e_mb = Complex::from_polar(S::one(), -beta);
    let zero = Complex::new(S::zero(), S::zero());
    let nu1 = [
        Complex::new(ct, S::zero()),
        Complex::new(st, S::zero()) * e_ip,
        zero,
    ];
    let nu2 = [
        Complex::new(ca * st, S::zero()) * e_im,
        Complex::new(-ca * ct, S::zero()),
        Complex::new(sa, S::zero()) * e_ib,
    ];
    let nu3 = [
        Complex::new(sa * st, S::zero()) * e_im * e_mb,
        Complex::new(-sa * ct, S::zero()) * e_mb,
        Complex::new(-ca, S::zero()),
    ];
    [nu1, nu2, nu3]
}

/// Analytic time derivatives of [`one_qubit_vectors`], chained through
/// `alpha_dot` and `beta_dot`.
fn one_qubit_dots<S: Real>(
    theta: S,
    varphi: S,
    alpha: S,
    beta: S,
    alpha_dot: S,
    beta_dot: S,
) -> [[Complex<S>; 3]; 3] {
    let half = lit::<S>(0.5);
    let (ct, st) = ((theta * half).cos(), (theta * half).sin());
    let (ca, sa) = ((alpha * half).cos(), (alpha * half).sin());
    let ha = alpha_dot * half;
    let e_im = Complex::from_polar(S::one(), -varphi);
    let e_ib = Complex::from_polar(S::one(), beta);
    let e_mb = Complex::from_polar(S::one(), -beta);
    let zero = Complex::new(S::zero(), S::zero());
    let d_nu1 = [zero, zero, zero];
    // d/dt [sin(a/2) e^{i b}] = (da/2 cos(a/2) + i db sin(a/2)) e^{i b}
    let rise = Complex::new(ha * ca, beta_dot * sa);
    let d_nu2 = [
        Complex::new(-ha * sa * st, S::zero()) * e_im,
        Complex::new(ha * sa * ct, S::zero()),
        rise * e_ib,
    ];
    // d/dt [sin(a/2) e^{-i b}] = (da/2 cos(a/2) - i db sin(a/2)) e^{-i b}
    let fall = Complex::new(ha * ca, -(beta_dot * sa));
    let d_nu3 = [
        fall * Complex::new(st, S::zero()) * e_im * e_mb,
        fall * Complex::new(-ct, S::zero()) * e_mb,
        Complex::new(ha * sa, S::zero()),
    ];
    [d_nu1, d_nu2, d_nu3]
}

fn coupling_free_gamma_dot<S: Real>(alpha: S, beta_dot: S) -> S {
    beta_dot * (lit::<S>(3.0) + alpha.cos()) / lit::<S>(2.0)
}

/// One-qubit frame on the levels `(|0>, |1>, |e>)`: `N = 3`, `L = 2`.
#[derive(Debug, Clone)]
pub struct OneQubitFrame<S> {
    params: FrameParams<S>,
    gauge: Gauge,
}

impl<S: Real> OneQubitFrame<S> {
    pub fn new(params: FrameParams<S>) -> Result<Self, FrameError> {
        check_pole_anchored(&params.path)?;
        Ok(Self::new_unchecked(params))
    }

    /// Skips the pole-closure check; for diagnostics on deliberately open
    /// paths, where the cyclic-evolution verifier is expected to fire.
    pub fn new_unchecked(params: FrameParams<S>) -> Self {
        OneQubitFrame {
            params,
            gauge: Gauge::CouplingFree,
        }
    }

    pub fn with_gauge(mut self, gauge: Gauge) -> Self {
        self.gauge = gauge;
        self
    }

    pub fn params(&self) -> &FrameParams<S> {
        &self.params
    }
}

impl<S: Real> AuxiliaryFrame<S> for OneQubitFrame<S> {
    fn space_dim(&self) -> usize {
        3
    }

    fn logical_dim(&self) -> usize {
        2
    }

    fn period(&self) -> S {
        self.params.path.total_duration()
    }

    fn basis_vector(&self, k: usize, t: S) -> Vec<Complex<S>> {
        let p = self.params.path.sample(t);
        one_qubit_vectors(self.params.theta, self.params.varphi, p.alpha, p.beta)[k].to_vec()
    }

    fn basis_vector_dot(&self, k: usize, t: S) -> Vec<Complex<S>> {
        let p = self.params.path.sample(t);
        one_qubit_dots(
            self.params.theta,
            self.params.varphi,
            p.alpha,
            p.beta,
            p.alpha_dot,
            p.beta_dot,
        )[k]
        .to_vec()
    }

    fn gamma_dot(&self, t: S) -> S {
        match self.gauge {
            Gauge::CouplingFree => {
                let p = self.params.path.sample(t);
                coupling_free_gamma_dot(p.alpha, p.beta_dot)
            }
            Gauge::Zero => S::zero(),
        }
    }
}

/// Two-qubit frame on `(|00>, |01>, |10>, |11>, |ee>)`: `N = 5`, `L = 4`.
/// The first two vectors are constant; the last three carry the one-qubit
/// construction on the `(|10>, |11>, |ee>)` block.
#[derive(Debug, Clone)]
pub struct TwoQubitFrame<S> {
    params: FrameParams<S>,
    gauge: Gauge,
}

impl<S: Real> TwoQubitFrame<S> {
    pub fn new(params: FrameParams<S>) -> Result<Self, FrameError> {
        check_pole_anchored(&params.path)?;
        Ok(Self::new_unchecked(params))
    }

    pub fn new_unchecked(params: FrameParams<S>) -> Self {
        TwoQubitFrame {
            params,
            gauge: Gauge::CouplingFree,
        }
    }

    pub fn with_gauge(mut self, gauge: Gauge) -> Self {
        self.gauge = gauge;
        self
    }

    pub fn params(&self) -> &FrameParams<S> {
        &self.params
    }
}

impl<S: Real> AuxiliaryFrame<S> for TwoQubitFrame<S> {
    fn space_dim(&self) -> usize {
        5
    }

    fn logical_dim(&self) -> usize {
        4
    }

    fn period(&self) -> S {
        self.params.path.total_duration()
    }

    fn basis_vector(&self, k: usize, t: S) -> Vec<Complex<S>> {
        let zero = Complex::new(S::zero(), S::zero());
        let one = Complex::new(S::one(), S::zero());
        match k {
            0 => vec![one, zero, zero, zero, zero],
            1 => vec![zero, one, zero, zero, zero],
            _ => {
                let p = self.params.path.sample(t);
                let block =
                    one_qubit_vectors(self.params.theta, self.params.varphi, p.alpha, p.beta)
                        [k - 2];
                vec![zero, zero, block[0], block[1], block[2]]
            }
        }
    }

    fn basis_vector_dot(&self, k: usize, t: S) -> Vec<Complex<S>> {
        let zero = Complex::new(S::zero(), S::zero());
        match k {
            0 | 1 => vec![zero; 5],
            _ => {
                let p = self.params.path.sample(t);
                let block = one_qubit_dots(
                    self.params.theta,
                    self.params.varphi,
                    p.alpha,
                    p.beta,
                    p.alpha_dot,
                    p.beta_dot,
                )[k - 2];
                vec![zero, zero, block[0], block[1], block[2]]
            }
        }
    }

    fn gamma_dot(&self, t: S) -> S {
        match self.gauge {
            Gauge::CouplingFree => {
                let p = self.params.path.sample(t);
                coupling_free_gamma_dot(p.alpha, p.beta_dot)
            }
            Gauge::Zero => S::zero(),
        }
    }
}

/// On-disk frame table: grid times against per-vector component values.
#[derive(Debug, Deserialize)]
pub struct FrameTable<S> {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub tau: S,
    pub grid: Vec<S>,
    /// `vectors[m][k][i]` is component `i` of `nu_k(grid[m])` as `[re, im]`.
    pub vectors: Vec<Vec<Vec<[S; 2]>>>,
}

/// Frame interpolated from a [`FrameTable`] with natural cubic splines per
/// component; derivatives come from the trait's central-difference default,
/// and `gamma_dot` is zero (tables carry no gauge information).
///
/// Interpolation detunes orthonormality at the spline-error level, so the
/// evaluated vectors are re-orthonormalized by modified Gram-Schmidt; tables
/// whose raw interpolant strays beyond `1e-2` from orthonormality are
/// rejected instead of repaired.
pub struct TabulatedFrame<S> {
    n: usize,
    l: usize,
    tau: S,
    splines: Vec<Vec<(CubicSpline<S>, CubicSpline<S>)>>,
    ortho_tolerance: S,
    deriv_tolerance: S,
}

impl<S: Real> TabulatedFrame<S> {
    pub fn from_table(table: FrameTable<S>) -> Result<Self, FrameError> {
        let m = table.grid.len();
        if m < 4 {
            return Err(FrameError::BadTable("grid needs at least 4 points".into()));
        }
        if table.l + 1 != table.n {
            return Err(FrameError::BadTable(format!(
                "expected N = L + 1, got N = {}, L = {}",
                table.n, table.l
            )));
        }
        if table.vectors.len() != m {
            return Err(FrameError::BadTable(format!(
                "expected {m} vector rows, got {}",
                table.vectors.len()
            )));
        }
        if !(table.tau > S::zero()) {
            return Err(FrameError::BadTable("tau must be positive".into()));
        }
        for w in table.grid.windows(2) {
            if !(w[1] > w[0]) {
                return Err(FrameError::BadTable("grid must be increasing".into()));
            }
        }
        let tol = table.tau * lit::<S>(1e-9);
        if table.grid[0].abs() > tol || (table.grid[m - 1] - table.tau).abs() > tol {
            return Err(FrameError::BadTable("grid must span [0, tau]".into()));
        }
        for (row, point) in table.vectors.iter().enumerate() {
            if point.len() != table.n || point.iter().any(|v| v.len() != table.n) {
                return Err(FrameError::BadTable(format!(
                    "row {row} does not hold {n} vectors of {n} components",
                    n = table.n
                )));
            }
        }

        let mut splines = Vec::with_capacity(table.n);
        for k in 0..table.n {
            let mut per_component = Vec::with_capacity(table.n);
            for i in 0..table.n {
                let re: Vec<S> = (0..m).map(|j| table.vectors[j][k][i][0]).collect();
                let im: Vec<S> = (0..m).map(|j| table.vectors[j][k][i][1]).collect();
                per_component.push((
                    CubicSpline::natural(table.grid.clone(), re),
                    CubicSpline::natural(table.grid.clone(), im),
                ));
            }
            splines.push(per_component);
        }
        let mut frame = TabulatedFrame {
            n: table.n,
            l: table.l,
            tau: table.tau,
            splines,
            ortho_tolerance: S::ortho_tol(),
            deriv_tolerance: S::ortho_tol(),
        };
        // Reject tables that are not close to orthonormal before repair.
        let mut raw = S::zero();
        for j in 0..=64 {
            let t = table.tau * S::from_usize(j).expect("grid") / lit::<S>(64.0);
            raw = raw.max(frame.raw_orthonormality_residual(t));
        }
        if raw > lit::<S>(1e-2) {
            return Err(FrameError::BadTable(format!(
                "interpolated vectors are far from orthonormal (residual {:.3e})",
                raw.to_f64().unwrap_or(f64::NAN)
            )));
        }
        // Calibrate the residual budgets from what the table actually
        // delivers after re-orthonormalization. The derivative budget picks
        // up the central-difference truncation noise, which peaks wherever
        // the spline rings around kinks in the tabulated data.
        let mut gram = S::zero();
        let mut norm_rate = S::zero();
        for j in 0..=256 {
            let t = table.tau * S::from_usize(j).expect("grid") / lit::<S>(256.0);
            gram = gram.max(orthonormality_residual(&frame, t));
            for k in 0..frame.n {
                let v = frame.basis_vector(k, t);
                let d = frame.basis_vector_dot(k, t);
                norm_rate = norm_rate.max(inner_product(&v, &d).re.abs());
            }
        }
        frame.ortho_tolerance = S::ortho_tol().max(gram * lit::<S>(10.0));
        frame.deriv_tolerance = S::ortho_tol().max(norm_rate * lit::<S>(20.0));
        Ok(frame)
    }

    /// Orthonormality of the bare spline interpolant, before Gram-Schmidt.
    fn raw_orthonormality_residual(&self, t: S) -> S {
        let raw = self.raw_vectors(t);
        let mut worst = S::zero();
        for j in 0..self.n {
            for k in 0..self.n {
                let g = inner_product(&raw[j], &raw[k]);
                let expected = if j == k { S::one() } else { S::zero() };
                worst = worst.max((g - Complex::new(expected, S::zero())).norm());
            }
        }
        worst
    }

    fn raw_vectors(&self, t: S) -> Vec<Vec<Complex<S>>> {
        let t = t.max(S::zero()).min(self.tau);
        self.splines
            .iter()
            .map(|per_component| {
                per_component
                    .iter()
                    .map(|(re, im)| Complex::new(re.eval(t), im.eval(t)))
                    .collect()
            })
            .collect()
    }

    /// Modified Gram-Schmidt across the interpolated vectors at `t`.
    fn orthonormal_vectors(&self, t: S) -> Vec<Vec<Complex<S>>> {
        let mut vectors = self.raw_vectors(t);
        for k in 0..self.n {
            for j in 0..k {
                let (before, current) = vectors.split_at_mut(k);
                let overlap = inner_product(&before[j], &current[0]);
                for (target, reference) in current[0].iter_mut().zip(&before[j]) {
                    *target -= overlap * *reference;
                }
            }
            let norm = vectors[k]
                .iter()
                .map(|z| z.norm_sqr())
                .fold(S::zero(), |a, b| a + b)
                .sqrt();
            let scale = Complex::new(S::one() / norm, S::zero());
            for component in vectors[k].iter_mut() {
                *component *= scale;
            }
        }
        vectors
    }

    pub fn from_json(text: &str) -> Result<Self, FrameError>
    where
        S: serde::de::DeserializeOwned,
    {
        let table: FrameTable<S> =
            serde_json::from_str(text).map_err(|e| FrameError::BadTable(e.to_string()))?;
        Self::from_table(table)
    }
}

impl<S: Real> AuxiliaryFrame<S> for TabulatedFrame<S> {
    fn space_dim(&self) -> usize {
        self.n
    }

    fn logical_dim(&self) -> usize {
        self.l
    }

    fn period(&self) -> S {
        self.tau
    }

    fn basis_vector(&self, k: usize, t: S) -> Vec<Complex<S>> {
        self.orthonormal_vectors(t).swap_remove(k)
    }

    fn gamma_dot(&self, _t: S) -> S {
        S::zero()
    }

    fn orthonormality_tolerance(&self) -> S {
        self.ortho_tolerance
    }

    fn derivative_tolerance(&self) -> S {
        self.deriv_tolerance
    }
}

/// Natural cubic spline over a strictly increasing grid.
struct CubicSpline<S> {
    xs: Vec<S>,
    ys: Vec<S>,
    second: Vec<S>,
}

impl<S: Real> CubicSpline<S> {
    fn natural(xs: Vec<S>, ys: Vec<S>) -> Self {
        let n = xs.len();
        let mut second = vec![S::zero(); n];
        let mut scratch = vec![S::zero(); n];
        for i in 1..n - 1 {
            let sig = (xs[i] - xs[i - 1]) / (xs[i + 1] - xs[i - 1]);
            let p = sig * second[i - 1] + lit::<S>(2.0);
            second[i] = (sig - S::one()) / p;
            let slope_right = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
            let slope_left = (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
            scratch[i] = (lit::<S>(6.0) * (slope_right - slope_left) / (xs[i + 1] - xs[i - 1])
                - sig * scratch[i - 1])
                / p;
        }
        for i in (1..n - 1).rev() {
            second[i] = second[i] * second[i + 1] + scratch[i];
        }
        second[0] = S::zero();
        second[n - 1] = S::zero();
        CubicSpline { xs, ys, second }
    }

    fn eval(&self, x: S) -> S {
        let n = self.xs.len();
        let mut lo = 0;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (hi + lo) / 2;
            if self.xs[mid] > x {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let h = self.xs[hi] - self.xs[lo];
        let a = (self.xs[hi] - x) / h;
        let b = (x - self.xs[lo]) / h;
        a * self.ys[lo]
            + b * self.ys[hi]
            + ((a * a * a - a) * self.second[lo] + (b * b * b - b) * self.second[hi]) * h * h
                / lit::<S>(6.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spherepaths::{orange_slice, three_arc, Segment, SegmentKind};
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn params(theta: f64, varphi: f64) -> FrameParams<f64> {
        FrameParams {
            theta,
            varphi,
            path: orange_slice(PI / 8.0).unwrap(),
        }
    }

    #[test]
    fn one_qubit_vectors_at_pole() {
        let theta = 1.1;
        let varphi = 0.7;
        let frame = OneQubitFrame::new(params(theta, varphi)).unwrap();
        // At alpha = 0 the second vector loses its |e> component and the
        // third collapses onto -|e>.
        let nu2 = frame.basis_vector(1, 0.0);
        let expected0 = Complex64::from_polar((theta / 2.0).sin(), -varphi);
        assert!((nu2[0] - expected0).norm() < 1e-15);
        assert!((nu2[1] - Complex64::new(-(theta / 2.0).cos(), 0.0)).norm() < 1e-15);
        assert!(nu2[2].norm() < 1e-15);
        let nu3 = frame.basis_vector(2, 0.0);
        assert!(nu3[0].norm() < 1e-15 && nu3[1].norm() < 1e-15);
        assert!((nu3[2] - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn theta_zero_pins_first_vector() {
        let frame = OneQubitFrame::new(params(0.0, 0.3)).unwrap();
        let tau = frame.period();
        for k in 0..=10 {
            let t = tau * k as f64 / 10.0;
            let nu1 = frame.basis_vector(0, t);
            assert!((nu1[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
            assert!(nu1[1].norm() < 1e-15 && nu1[2].norm() < 1e-15);
        }
    }

    #[test]
    fn one_qubit_gram_is_identity_on_grid() {
        let frame = OneQubitFrame::new(params(PI / 3.0, PI / 7.0)).unwrap();
        let tau = frame.period();
        for k in 0..=100 {
            let t = tau * k as f64 / 100.0;
            // Direct inner-product oracle.
            let vs: Vec<_> = (0..3).map(|i| frame.basis_vector(i, t)).collect();
            for i in 0..3 {
                for j in 0..3 {
                    let g = inner_product(&vs[i], &vs[j]);
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (g - Complex64::new(expected, 0.0)).norm() < 1e-10,
                        "t={t} i={i} j={j}"
                    );
                }
            }
        }
    }

    #[test]
    fn two_qubit_constant_vectors_have_zero_derivative() {
        let frame = TwoQubitFrame::new(params(0.9, 1.7)).unwrap();
        let tau = frame.period();
        for k in [0usize, 1] {
            for step in 0..=7 {
                let t = tau * step as f64 / 7.0;
                let dot = frame.basis_vector_dot(k, t);
                assert!(dot.iter().all(|z| z.norm() == 0.0));
            }
        }
    }

    #[test]
    fn two_qubit_block_mirrors_one_qubit() {
        let one = OneQubitFrame::new(params(1.2, 0.4)).unwrap();
        let two = TwoQubitFrame::new(params(1.2, 0.4)).unwrap();
        let tau = one.period();
        for step in 0..=9 {
            let t = tau * step as f64 / 9.0;
            let nu2 = one.basis_vector(1, t);
            let nu4 = two.basis_vector(3, t);
            assert!(nu4[0].norm() == 0.0 && nu4[1].norm() == 0.0);
            for i in 0..3 {
                assert!((nu4[i + 2] - nu2[i]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn builtin_frames_orthonormal_on_dense_grid() {
        let one = OneQubitFrame::new(params(PI / 3.0, PI / 7.0)).unwrap();
        let two = TwoQubitFrame::new(params(PI / 3.0, PI / 7.0)).unwrap();
        let tau = one.period();
        for step in 0..=1000 {
            let t = tau * step as f64 / 1000.0;
            assert!(orthonormality_residual(&one, t) <= 1e-10, "one-qubit t={t}");
            assert!(orthonormality_residual(&two, t) <= 1e-10, "two-qubit t={t}");
        }
        assert!(orthonormality_residual(&two, tau / 3.0) < 1e-12);
    }

    #[test]
    fn orthonormality_residual_examples() {
        let frame = OneQubitFrame::new(params(0.8, 0.1)).unwrap();
        assert!(orthonormality_residual(&frame, 0.0) < 1e-12);

        // Adversarial frame: duplicated vector drives the residual to one.
        struct Duplicated;
        impl AuxiliaryFrame<f64> for Duplicated {
            fn space_dim(&self) -> usize {
                3
            }
            fn logical_dim(&self) -> usize {
                2
            }
            fn period(&self) -> f64 {
                1.0
            }
            fn basis_vector(&self, k: usize, _t: f64) -> Vec<Complex64> {
                let mut v = vec![Complex64::new(0.0, 0.0); 3];
                v[if k == 1 { 0 } else { k }] = Complex64::new(1.0, 0.0);
                v
            }
            fn gamma_dot(&self, _t: f64) -> f64 {
                0.0
            }
        }
        let residual = orthonormality_residual(&Duplicated, 0.5);
        assert_relative_eq!(residual, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn derivative_selfcheck_converges_quadratically() {
        let frame = OneQubitFrame::new(params(PI / 3.0, PI / 7.0)).unwrap();
        let tau = frame.period();
        let t = 0.21 * tau;
        let coarse = derivative_selfcheck(&frame, t, 1e-4 * tau);
        assert!(coarse <= 1e-6, "coarse residual {coarse:.3e}");
        let fine = derivative_selfcheck(&frame, t, 0.5e-4 * tau);
        let ratio = coarse / fine;
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn constant_components_have_zero_selfcheck() {
        let frame = TwoQubitFrame::new(params(0.5, 0.5)).unwrap();
        let t = 0.4 * frame.period();
        // Constant vectors contribute nothing; the bound is set by the
        // analytic block.
        let residual = derivative_selfcheck(&frame, t, 1e-5);
        assert!(residual < 1e-7);
    }

    #[test]
    fn frames_are_cyclic() {
        let one = OneQubitFrame::new(params(1.0, 2.0)).unwrap();
        let two = TwoQubitFrame::new(params(1.0, 2.0)).unwrap();
        let tau = one.period();
        for k in 0..3 {
            let d: f64 = one
                .basis_vector(k, tau)
                .iter()
                .zip(one.basis_vector(k, 0.0))
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(d <= 1e-10, "one-qubit k={k} defect {d:.3e}");
        }
        for k in 0..5 {
            let d: f64 = two
                .basis_vector(k, tau)
                .iter()
                .zip(two.basis_vector(k, 0.0))
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(d <= 1e-10, "two-qubit k={k} defect {d:.3e}");
        }
    }

    #[test]
    fn computational_span_matches_canonical_basis() {
        let one = OneQubitFrame::new(params(0.77, 2.3)).unwrap();
        assert!(computational_span_residual(&one) < 1e-10);
        let two = TwoQubitFrame::new(params(0.77, 2.3)).unwrap();
        assert!(computational_span_residual(&two) < 1e-10);
    }

    #[test]
    fn pole_anchoring_is_enforced() {
        let open_path = crate::spherepaths::SpherePath::new(vec![Segment {
            kind: SegmentKind::Meridian {
                beta: 0.0,
                alpha_start: 0.0,
                alpha_end: 0.3,
            },
            duration: 1.0,
        }])
        .unwrap();
        let result = OneQubitFrame::new(FrameParams {
            theta: 0.2,
            varphi: 0.1,
            path: open_path.clone(),
        });
        assert!(matches!(
            result,
            Err(FrameError::PathNotPoleAnchored { .. })
        ));
        // The unchecked constructor allows the control case through.
        let frame = OneQubitFrame::new_unchecked(FrameParams {
            theta: 0.2,
            varphi: 0.1,
            path: open_path,
        });
        assert_eq!(frame.space_dim(), 3);
    }

    #[test]
    fn gauge_zero_changes_gamma_dot_only() {
        let p = params(0.6, 0.9);
        let standard = OneQubitFrame::new(p.clone()).unwrap();
        let sabotaged = OneQubitFrame::new(p).unwrap().with_gauge(Gauge::Zero);
        let t = 0.45; // inside the south-pole sweep where beta_dot != 0
        assert!(standard.gamma_dot(t).abs() > 0.1);
        assert_eq!(sabotaged.gamma_dot(t), 0.0);
        for k in 0..3 {
            let a = standard.basis_vector(k, t);
            let b = sabotaged.basis_vector(k, t);
            assert!(a.iter().zip(&b).all(|(x, y)| (x - y).norm() == 0.0));
        }
    }

    fn tabulate(frame: &OneQubitFrame<f64>, points: usize) -> FrameTable<f64> {
        let tau = frame.period();
        let grid: Vec<f64> = (0..=points).map(|j| tau * j as f64 / points as f64).collect();
        let vectors = grid
            .iter()
            .map(|&t| {
                (0..3)
                    .map(|k| {
                        frame
                            .basis_vector(k, t)
                            .into_iter()
                            .map(|z| [z.re, z.im])
                            .collect()
                    })
                    .collect()
            })
            .collect();
        FrameTable {
            n: 3,
            l: 2,
            tau,
            grid,
            vectors,
        }
    }

    #[test]
    fn tabulated_frame_tracks_analytic_frame() {
        let analytic = OneQubitFrame::new(params(PI / 3.0, PI / 7.0)).unwrap();
        let table = tabulate(&analytic, 800);
        let interpolated = TabulatedFrame::from_table(table).unwrap();
        assert_eq!(interpolated.space_dim(), 3);
        assert_eq!(interpolated.logical_dim(), 2);
        let tau = analytic.period();
        for step in 1..10 {
            let t = tau * (0.2 + 0.06 * step as f64);
            for k in 0..3 {
                let a = analytic.basis_vector(k, t);
                let b = interpolated.basis_vector(k, t);
                let d: f64 = a
                    .iter()
                    .zip(&b)
                    .map(|(x, y)| (x - y).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(d < 1e-6, "k={k} t={t} d={d:.3e}");
            }
        }
        assert!(interpolated.orthonormality_tolerance() < 1e-4);
    }

    #[test]
    fn tabulated_frame_validates_shape() {
        let analytic = OneQubitFrame::new(params(0.3, 0.3)).unwrap();
        let mut table = tabulate(&analytic, 16);
        table.l = 3;
        assert!(matches!(
            TabulatedFrame::from_table(table),
            Err(FrameError::BadTable(_))
        ));
    }

    #[test]
    fn tabulated_frame_json_parses() {
        let analytic = OneQubitFrame::new(
            FrameParams {
                theta: 0.4,
                varphi: 0.2,
                path: three_arc(PI / 4.0).unwrap(),
            },
        )
        .unwrap();
        let table = tabulate(&analytic, 64);
        let json = serde_json::json!({
            "N": table.n,
            "L": table.l,
            "tau": table.tau,
            "grid": table.grid,
            "vectors": table.vectors,
        });
        let frame = TabulatedFrame::<f64>::from_json(&json.to_string()).unwrap();
        assert_eq!(frame.space_dim(), 3);
        assert_eq!(frame.gamma_dot(0.2), 0.0);
    }
}

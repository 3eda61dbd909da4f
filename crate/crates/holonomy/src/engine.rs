//! Frame-to-gate pipeline: connection matrix, time-ordered exponential,
//! Hamiltonian assembly, Schrödinger propagation, and verification of the
//! cyclic-evolution and parallel-transport conditions.
//!
//! Time ordering is discretized by midpoint sampling with left-multiplied
//! short-time exponentials: second-order accurate and exactly unitary, so
//! long products accumulate rounding, never drift. The evolving solutions are
//! carried two independent ways — through the full propagator `U(t)` and
//! through the holonomy coefficients `C(t)` applied to the moving frame —
//! and the two constructions are required to agree at the end.

use std::io;

use num_complex::Complex;
use thiserror::Error;

use crate::frames::{self, AuxiliaryFrame};
use crate::numkit::{gate_distance, inner_product, ComplexMatrix, MatrixError};
use crate::real::{lit, Real};

/// Tolerance for the agreement between the propagated gate and the
/// time-ordered exponential of the connection.
const GATE_CONSISTENCY_TOL: f64 = 1e-6;

/// Per-node ceiling on stored propagator unitarity defects.
const UNITARITY_ABORT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("time grid needs at least 16 steps, got {steps}")]
    GridTooCoarse { steps: usize },
    #[error("grid period {grid_tau} does not match frame period {frame_tau}")]
    PeriodMismatch { grid_tau: f64, frame_tau: f64 },
    #[error("frame loses orthonormality at t = {t}: residual {residual:.3e} > {tolerance:.3e}")]
    FrameNotOrthonormal {
        t: f64,
        residual: f64,
        tolerance: f64,
    },
    #[error("connection matrix not Hermitian at t = {t}: defect {defect:.3e}")]
    ConnectionNotHermitian { t: f64, defect: f64 },
    #[error("gauge term has imaginary residual {residual:.3e} at t = {t}")]
    GaugeResidual { t: f64, residual: f64 },
    #[error("unitarity defect {defect:.3e} at node {node} exceeds {UNITARITY_ABORT_TOL:.1e}")]
    UnitarityBreach { node: usize, defect: f64 },
    #[error(
        "propagated gate disagrees with the holonomy: gate distance {distance:.3e} > {GATE_CONSISTENCY_TOL:.1e}"
    )]
    GateInconsistency { distance: f64 },
    #[error("frame does not span the canonical computational basis: residual {residual:.3e}")]
    SpanMismatch { residual: f64 },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Uniform discretization of `[0, tau]`.
#[derive(Debug, Clone, Copy)]
pub struct TimeGrid<S> {
    steps: usize,
    tau: S,
}

impl<S: Real> TimeGrid<S> {
    pub fn new(steps: usize, tau: S) -> Result<Self, EngineError> {
        if steps < 16 {
            return Err(EngineError::GridTooCoarse { steps });
        }
        Ok(TimeGrid { steps, tau })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn tau(&self) -> S {
        self.tau
    }

    pub fn dt(&self) -> S {
        self.tau / S::from_usize(self.steps).expect("step count")
    }

    /// Node time `t_m`, `m` in `0..=steps`.
    pub fn node(&self, m: usize) -> S {
        self.tau * S::from_usize(m).expect("node index") / S::from_usize(self.steps).expect("steps")
    }

    /// Midpoint time of step `m`, `m` in `0..steps`.
    pub fn midpoint(&self, m: usize) -> S {
        self.tau * (S::from_usize(m).expect("step index") + lit::<S>(0.5))
            / S::from_usize(self.steps).expect("steps")
    }
}

fn check_frame_orthonormality<S: Real, F: AuxiliaryFrame<S> + ?Sized>(
    frame: &F,
    t: S,
) -> Result<(), EngineError> {
    let residual = frames::orthonormality_residual(frame, t);
    let tolerance = frame.orthonormality_tolerance();
    if residual > tolerance {
        return Err(EngineError::FrameNotOrthonormal {
            t: t.to_f64().unwrap_or(f64::NAN),
            residual: residual.to_f64().unwrap_or(f64::NAN),
            tolerance: tolerance.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// Connection matrix `A_ij(t) = i <nu_i | d/dt nu_j>` on the computational
/// indices `i, j < L`. Hermitian up to the frame's orthonormality defect.
pub fn connection<S: Real, F: AuxiliaryFrame<S> + ?Sized>(
    frame: &F,
    t: S,
) -> Result<ComplexMatrix<S>, EngineError> {
    check_frame_orthonormality(frame, t)?;
    let l = frame.logical_dim();
    let i_unit = Complex::new(S::zero(), S::one());
    let vectors: Vec<_> = (0..l).map(|k| frame.basis_vector(k, t)).collect();
    let dots: Vec<_> = (0..l).map(|k| frame.basis_vector_dot(k, t)).collect();
    let mut a = ComplexMatrix::zeros(l);
    for i in 0..l {
        for j in 0..l {
            a.set(i, j, i_unit * inner_product(&vectors[i], &dots[j]));
        }
    }
    Ok(a)
}

/// Hamiltonian `H(t)` on the full space: couplings of the computational
/// vectors to the auxiliary vector, plus the gauge-shifted auxiliary
/// diagonal. Assembled in the canonical basis and Hermitian by construction.
pub fn hamiltonian<S: Real, F: AuxiliaryFrame<S> + ?Sized>(
    frame: &F,
    t: S,
) -> Result<ComplexMatrix<S>, EngineError> {
    check_frame_orthonormality(frame, t)?;
    let n = frame.space_dim();
    let l = frame.logical_dim();
    let i_unit = Complex::new(S::zero(), S::one());
    let aux = frame.basis_vector(n - 1, t);
    let aux_dot = frame.basis_vector_dot(n - 1, t);

    let mut coupling = ComplexMatrix::zeros(n);
    for i in 0..l {
        let vector = frame.basis_vector(i, t);
        let c = i_unit * inner_product(&vector, &aux_dot);
        coupling.add_outer(c, &vector, &aux);
    }
    let mut h = coupling.hermitian_part();
    // hermitian_part halves the off-diagonal bracket; restore X + X^dagger.
    let two = Complex::new(lit::<S>(2.0), S::zero());
    for i in 0..n {
        for j in 0..n {
            h.set(i, j, h.get(i, j) * two);
        }
    }

    // i <nu_N | d/dt nu_N> is real for a normalized vector; its imaginary
    // residual bounds the differentiation error.
    let gauge = i_unit * inner_product(&aux, &aux_dot);
    let residual_tol = frame.derivative_tolerance() * (S::one() + gauge.norm());
    if gauge.im.abs() > residual_tol {
        return Err(EngineError::GaugeResidual {
            t: t.to_f64().unwrap_or(f64::NAN),
            residual: gauge.im.abs().to_f64().unwrap_or(f64::NAN),
        });
    }
    let diag = gauge.re - frame.gamma_dot(t);
    h.add_outer(Complex::new(diag, S::zero()), &aux, &aux);
    Ok(h)
}

/// Time-ordered exponential of the connection over the grid: the ordered
/// midpoint product `prod_m exp(i A(t_{m+1/2}) dt)`, later factors on the
/// left.
pub fn holonomy_matrix<S: Real, F: AuxiliaryFrame<S> + ?Sized>(
    frame: &F,
    grid: &TimeGrid<S>,
) -> Result<ComplexMatrix<S>, EngineError> {
    check_period(frame, grid)?;
    let mut c = ComplexMatrix::identity(frame.logical_dim());
    let dt = grid.dt();
    for m in 0..grid.steps() {
        let t = grid.midpoint(m);
        let a = prepared_connection(frame, t)?;
        c = a.herm_expm(dt)?.mul(&c);
    }
    Ok(c)
}

/// Validates the Hermiticity budget of the raw connection, then returns its
/// exactly Hermitian part for exponentiation.
fn prepared_connection<S: Real, F: AuxiliaryFrame<S> + ?Sized>(
    frame: &F,
    t: S,
) -> Result<ComplexMatrix<S>, EngineError> {
    let a = connection(frame, t)?;
    // Asymmetry comes from orthonormality drift and from derivative
    // truncation; both budgets are frame-declared.
    let budget = (frame.orthonormality_tolerance() + frame.derivative_tolerance())
        * (S::one() + a.max_abs())
        * lit::<S>(10.0);
    let defect = a.hermiticity_defect();
    if defect > budget {
        return Err(EngineError::ConnectionNotHermitian {
            t: t.to_f64().unwrap_or(f64::NAN),
            defect: defect.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(a.hermitian_part())
}

fn check_period<S: Real, F: AuxiliaryFrame<S> + ?Sized>(
    frame: &F,
    grid: &TimeGrid<S>,
) -> Result<(), EngineError> {
    let tau = frame.period();
    if (grid.tau() - tau).abs() > tau * lit::<S>(1e-9) {
        return Err(EngineError::PeriodMismatch {
            grid_tau: grid.tau().to_f64().unwrap_or(f64::NAN),
            frame_tau: tau.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// Node-by-node history of one propagation.
#[derive(Debug, Clone)]
pub struct EvolutionRecord<S> {
    times: Vec<S>,
    u_full: Vec<ComplexMatrix<S>>,
    holonomy: Vec<ComplexMatrix<S>>,
    unitarity_defect: Vec<S>,
    parallel_transport_residual: Vec<S>,
}

impl<S: Real> EvolutionRecord<S> {
    pub fn times(&self) -> &[S] {
        &self.times
    }

    /// Full `N x N` propagator at each node.
    pub fn u_full(&self) -> &[ComplexMatrix<S>] {
        &self.u_full
    }

    /// `L x L` time-ordered exponential `C(t)` at each node.
    pub fn holonomy(&self) -> &[ComplexMatrix<S>] {
        &self.holonomy
    }

    pub fn unitarity_defects(&self) -> &[S] {
        &self.unitarity_defect
    }

    pub fn parallel_transport_residuals(&self) -> &[S] {
        &self.parallel_transport_residual
    }

    pub fn final_propagator(&self) -> &ComplexMatrix<S> {
        self.u_full.last().expect("non-empty record")
    }

    pub fn final_holonomy(&self) -> &ComplexMatrix<S> {
        self.holonomy.last().expect("non-empty record")
    }

    pub fn max_unitarity_defect(&self) -> S {
        self.unitarity_defect
            .iter()
            .fold(S::zero(), |a, &b| a.max(b))
    }
}

/// Solutions `phi_k(t) = sum_i C_ik(t) nu_i(t)`, `k < L`, from a holonomy
/// matrix and the frame at time `t`.
fn frame_solutions<S: Real, F: AuxiliaryFrame<S> + ?Sized>(
    frame: &F,
    c: &ComplexMatrix<S>,
    t: S,
) -> Vec<Vec<Complex<S>>> {
    let n = frame.space_dim();
    let l = frame.logical_dim();
    let vectors: Vec<_> = (0..l).map(|i| frame.basis_vector(i, t)).collect();
    (0..l)
        .map(|k| {
            let mut phi = vec![Complex::new(S::zero(), S::zero()); n];
            for (i, vector) in vectors.iter().enumerate() {
                let coeff = c.get(i, k);
                for (target, component) in phi.iter_mut().zip(vector) {
                    *target += coeff * *component;
                }
            }
            phi
        })
        .collect()
}

fn transport_residual<S: Real, F: AuxiliaryFrame<S> + ?Sized>(
    frame: &F,
    c: &ComplexMatrix<S>,
    t: S,
) -> Result<S, EngineError> {
    let h = hamiltonian(frame, t)?;
    let solutions = frame_solutions(frame, c, t);
    let mut worst = S::zero();
    for phi_l in &solutions {
        let h_phi = h.apply(phi_l);
        for phi_k in &solutions {
            worst = worst.max(inner_product(phi_k, &h_phi).norm());
        }
    }
    Ok(worst)
}

/// Propagates the Schrödinger equation with exponential-midpoint steps
/// `U(t_{m+1}) = exp(-i H(t_{m+1/2}) dt) U(t_m)` alongside the holonomy
/// partial products, recording per-node unitarity and parallel-transport
/// residuals.
pub fn propagate<S: Real, F: AuxiliaryFrame<S> + ?Sized>(
    frame: &F,
    grid: &TimeGrid<S>,
) -> Result<EvolutionRecord<S>, EngineError> {
    check_period(frame, grid)?;
    let n = frame.space_dim();
    let l = frame.logical_dim();
    let dt = grid.dt();
    let mut u = ComplexMatrix::identity(n);
    let mut c = ComplexMatrix::identity(l);

    let mut record = EvolutionRecord {
        times: Vec::with_capacity(grid.steps() + 1),
        u_full: Vec::with_capacity(grid.steps() + 1),
        holonomy: Vec::with_capacity(grid.steps() + 1),
        unitarity_defect: Vec::with_capacity(grid.steps() + 1),
        parallel_transport_residual: Vec::with_capacity(grid.steps() + 1),
    };
    record.times.push(S::zero());
    record.u_full.push(u.clone());
    record.holonomy.push(c.clone());
    record.unitarity_defect.push(S::zero());
    record
        .parallel_transport_residual
        .push(transport_residual(frame, &c, S::zero())?);

    let abort = lit::<S>(UNITARITY_ABORT_TOL);
    for m in 0..grid.steps() {
        let t_mid = grid.midpoint(m);
        let h = hamiltonian(frame, t_mid)?;
        u = h.herm_expm(-dt)?.mul(&u);
        let a = prepared_connection(frame, t_mid)?;
        c = a.herm_expm(dt)?.mul(&c);

        let t_node = grid.node(m + 1);
        let defect = u.unitarity_defect().max(c.unitarity_defect());
        if defect > abort {
            return Err(EngineError::UnitarityBreach {
                node: m + 1,
                defect: defect.to_f64().unwrap_or(f64::NAN),
            });
        }
        record.times.push(t_node);
        record.u_full.push(u.clone());
        record.holonomy.push(c.clone());
        record.unitarity_defect.push(defect);
        record
            .parallel_transport_residual
            .push(transport_residual(frame, &c, t_node)?);
    }
    Ok(record)
}

/// Cyclic-evolution residual: Frobenius distance between the rank-`L`
/// projector onto the propagated subspace at `t = tau` and the initial one.
pub fn check_cyclic<S: Real, F: AuxiliaryFrame<S> + ?Sized>(
    record: &EvolutionRecord<S>,
    frame: &F,
) -> S {
    let n = frame.space_dim();
    let l = frame.logical_dim();
    let tau = *record.times.last().expect("non-empty record");
    let final_solutions = frame_solutions(frame, record.final_holonomy(), tau);

    let mut projector_tau = ComplexMatrix::zeros(n);
    let one = Complex::new(S::one(), S::zero());
    for phi in &final_solutions {
        projector_tau.add_outer(one, phi, phi);
    }
    let mut projector_zero = ComplexMatrix::zeros(n);
    for k in 0..l {
        let v = frame.basis_vector(k, S::zero());
        projector_zero.add_outer(one, &v, &v);
    }
    projector_tau.sub(&projector_zero).frobenius_norm()
}

/// Parallel-transport residual: `max |<phi_k(t)| H(t) |phi_l(t)>|` over all
/// nodes and `k, l < L`; equivalent to the vanishing of `<phi_k|phi_l_dot>`
/// under the Schrödinger equation, but evaluable without differentiating the
/// propagated states.
pub fn check_parallel_transport<S: Real, F: AuxiliaryFrame<S> + ?Sized>(
    record: &EvolutionRecord<S>,
    frame: &F,
) -> Result<S, EngineError> {
    let mut worst = S::zero();
    for (t, c) in record.times.iter().zip(&record.holonomy) {
        worst = worst.max(transport_residual(frame, c, *t)?);
    }
    Ok(worst)
}

/// Computational-block restriction of the full propagator at `t = tau`,
/// expressed in the `nu_k(0)` basis: `G_ik = <nu_i(0)| U(tau) |nu_k(0)>`.
pub fn propagated_block<S: Real, F: AuxiliaryFrame<S> + ?Sized>(
    record: &EvolutionRecord<S>,
    frame: &F,
) -> ComplexMatrix<S> {
    let l = frame.logical_dim();
    let u = record.final_propagator();
    let initial: Vec<_> = (0..l).map(|k| frame.basis_vector(k, S::zero())).collect();
    let mut g = ComplexMatrix::zeros(l);
    for k in 0..l {
        let image = u.apply(&initial[k]);
        for i in 0..l {
            g.set(i, k, inner_product(&initial[i], &image));
        }
    }
    g
}

/// The holonomic gate `U(tau) = C(tau)` in the `nu_k(0)` basis, after
/// asserting that the independently propagated gate agrees within the
/// consistency tolerance. Disagreement signals a frame or integrator bug.
pub fn gate_from_record<S: Real, F: AuxiliaryFrame<S> + ?Sized>(
    record: &EvolutionRecord<S>,
    frame: &F,
) -> Result<ComplexMatrix<S>, EngineError> {
    let c_tau = record.final_holonomy();
    let block = propagated_block(record, frame);
    let distance = gate_distance(&block, c_tau)?;
    if distance > lit::<S>(GATE_CONSISTENCY_TOL) {
        return Err(EngineError::GateInconsistency {
            distance: distance.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(c_tau.clone())
}

/// Propagates and extracts the holonomic gate in one call.
pub fn holonomic_gate<S: Real, F: AuxiliaryFrame<S> + ?Sized>(
    frame: &F,
    grid: &TimeGrid<S>,
) -> Result<ComplexMatrix<S>, EngineError> {
    let record = propagate(frame, grid)?;
    gate_from_record(&record, frame)
}

/// Re-expresses a gate given in the `nu_k(0)` basis in canonical
/// computational coordinates: `sum_ik G_ik |nu_i(0)><nu_k(0)|` restricted to
/// the first `L` components. Valid because the frame's initial vectors span
/// the canonical computational basis, which is checked first.
pub fn to_computational_basis<S: Real, F: AuxiliaryFrame<S> + ?Sized>(
    frame: &F,
    gate: &ComplexMatrix<S>,
) -> Result<ComplexMatrix<S>, EngineError> {
    let span_residual = frames::computational_span_residual(frame);
    if span_residual > frame.orthonormality_tolerance() * lit::<S>(10.0) {
        return Err(EngineError::SpanMismatch {
            residual: span_residual.to_f64().unwrap_or(f64::NAN),
        });
    }
    let l = frame.logical_dim();
    let initial: Vec<_> = (0..l).map(|k| frame.basis_vector(k, S::zero())).collect();
    let mut out = ComplexMatrix::zeros(l);
    for i in 0..l {
        for k in 0..l {
            let coeff = gate.get(i, k);
            for a in 0..l {
                for b in 0..l {
                    let term = coeff * initial[i][a] * initial[k][b].conj();
                    out.set(a, b, out.get(a, b) + term);
                }
            }
        }
    }
    Ok(out)
}

/// Real per-node drive channels for CSV export of built-in frames.
pub struct PulseChannels<S> {
    pub omega0: Vec<Complex<S>>,
    pub omega1: Vec<Complex<S>>,
    pub delta: Vec<S>,
    pub gamma_dot: Vec<S>,
}

/// Writes the record as CSV: node time, unitarity defect, parallel-transport
/// residual, and — when drive channels are supplied — the six real pulse
/// columns plus the gauge rate.
pub fn write_record_csv<S: Real, W: io::Write>(
    writer: &mut W,
    record: &EvolutionRecord<S>,
    channels: Option<&PulseChannels<S>>,
) -> io::Result<()> {
    match channels {
        None => {
            writeln!(writer, "t,unitarity_defect,parallel_transport_residual")?;
            for ((t, u), p) in record
                .times
                .iter()
                .zip(&record.unitarity_defect)
                .zip(&record.parallel_transport_residual)
            {
                writeln!(writer, "{t},{u},{p}")?;
            }
        }
        Some(ch) => {
            writeln!(
                writer,
                "t,unitarity_defect,parallel_transport_residual,re_omega0,im_omega0,re_omega1,im_omega1,delta,gamma_dot"
            )?;
            for (m, t) in record.times.iter().enumerate() {
                writeln!(
                    writer,
                    "{t},{},{},{},{},{},{},{},{}",
                    record.unitarity_defect[m],
                    record.parallel_transport_residual[m],
                    ch.omega0[m].re,
                    ch.omega0[m].im,
                    ch.omega1[m].re,
                    ch.omega1[m].im,
                    ch.delta[m],
                    ch.gamma_dot[m],
                )?;
            }
        }
    }
    Ok(())
}

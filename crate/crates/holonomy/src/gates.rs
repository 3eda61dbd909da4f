//! Closed-form target gates, pulse-profile extraction, and the driven
//! three-level Hamiltonian they assemble into.

use std::io;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::engine::TimeGrid;
use crate::frames::FrameParams;
use crate::numkit::ComplexMatrix;
use crate::real::{lit, Real};
use crate::spherepaths::{PathError, SpherePath};

/// Rotation-gate description: axis angles `(theta, varphi)` and rotation
/// angle `angle`, normalized into `[0, 2 pi)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GateSpec<S> {
    pub theta: S,
    pub varphi: S,
    pub angle: S,
}

impl<S: Real> GateSpec<S> {
    pub fn new(theta: S, varphi: S, angle: S) -> Self {
        let tau = lit::<S>(2.0) * S::PI();
        let mut normalized = angle % tau;
        if normalized < S::zero() {
            normalized += tau;
        }
        GateSpec {
            theta,
            varphi,
            angle: normalized,
        }
    }

    /// Unit rotation axis `(sin t cos v, sin t sin v, cos t)`.
    pub fn axis(&self) -> [S; 3] {
        [
            self.theta.sin() * self.varphi.cos(),
            self.theta.sin() * self.varphi.sin(),
            self.theta.cos(),
        ]
    }
}

pub fn pauli_x<S: Real>() -> ComplexMatrix<S> {
    let mut m = ComplexMatrix::zeros(2);
    m.set(0, 1, Complex::new(S::one(), S::zero()));
    m.set(1, 0, Complex::new(S::one(), S::zero()));
    m
}

pub fn pauli_y<S: Real>() -> ComplexMatrix<S> {
    let mut m = ComplexMatrix::zeros(2);
    m.set(0, 1, Complex::new(S::zero(), -S::one()));
    m.set(1, 0, Complex::new(S::zero(), S::one()));
    m
}

pub fn pauli_z<S: Real>() -> ComplexMatrix<S> {
    let mut m = ComplexMatrix::zeros(2);
    m.set(0, 0, Complex::new(S::one(), S::zero()));
    m.set(1, 1, Complex::new(-S::one(), S::zero()));
    m
}

/// `n . sigma` for a unit axis `n`.
pub fn axis_matrix<S: Real>(axis: [S; 3]) -> ComplexMatrix<S> {
    let mut m = ComplexMatrix::zeros(2);
    m.set(0, 0, Complex::new(axis[2], S::zero()));
    m.set(1, 1, Complex::new(-axis[2], S::zero()));
    m.set(0, 1, Complex::new(axis[0], -axis[1]));
    m.set(1, 0, Complex::new(axis[0], axis[1]));
    m
}

/// One-qubit rotation `exp(i angle n.sigma / 2)` in special-unitary form:
/// `cos(angle/2) I + i sin(angle/2) n.sigma`.
pub fn analytic_one_qubit<S: Real>(spec: &GateSpec<S>) -> ComplexMatrix<S> {
    let half = spec.angle / lit::<S>(2.0);
    let c = Complex::new(half.cos(), S::zero());
    let is = Complex::new(S::zero(), half.sin());
    let ns = axis_matrix(spec.axis());
    let mut out = ComplexMatrix::zeros(2);
    for i in 0..2 {
        for j in 0..2 {
            let identity = if i == j {
                Complex::new(S::one(), S::zero())
            } else {
                Complex::new(S::zero(), S::zero())
            };
            out.set(i, j, c * identity + is * ns.get(i, j));
        }
    }
    out
}

/// Two-qubit gate on `(|00>, |01>, |10>, |11>)`: identity on the `|0>`
/// control block, `e^{-i angle/2} exp(i angle n.sigma / 2)` on the `|1>`
/// block. The relative phase between the blocks is physical and kept
/// explicit.
pub fn analytic_two_qubit<S: Real>(spec: &GateSpec<S>) -> ComplexMatrix<S> {
    let mut out = ComplexMatrix::zeros(4);
    out.set(0, 0, Complex::new(S::one(), S::zero()));
    out.set(1, 1, Complex::new(S::one(), S::zero()));
    let block = analytic_one_qubit(spec);
    let phase = Complex::from_polar(S::one(), -spec.angle / lit::<S>(2.0));
    for i in 0..2 {
        for j in 0..2 {
            out.set(2 + i, 2 + j, phase * block.get(i, j));
        }
    }
    out
}

/// Drive channels sampled on grid nodes: two complex Rabi frequencies and a
/// shared real detuning. The amplitude ratio `|Omega_0 / Omega_1|` is pinned
/// to `tan(theta/2)` by construction.
#[derive(Debug, Clone)]
pub struct PulseProfile<S> {
    pub times: Vec<S>,
    pub omega0: Vec<Complex<S>>,
    pub omega1: Vec<Complex<S>>,
    pub delta: Vec<S>,
}

/// Extracts the laser-drive profile realizing the one-qubit frame:
/// `Omega_0 = (1/2)[i alpha_dot + beta_dot sin alpha] sin(theta/2) e^{i(varphi + beta)}`,
/// `Omega_1 = -(1/2)[i alpha_dot + beta_dot sin alpha] cos(theta/2) e^{i beta}`,
/// `Delta = -beta_dot (1 + cos alpha)`.
pub fn pulse_profile<S: Real>(params: &FrameParams<S>, grid: &TimeGrid<S>) -> PulseProfile<S> {
    let half = lit::<S>(0.5);
    let st = (params.theta * half).sin();
    let ct = (params.theta * half).cos();
    let mut profile = PulseProfile {
        times: Vec::with_capacity(grid.steps() + 1),
        omega0: Vec::with_capacity(grid.steps() + 1),
        omega1: Vec::with_capacity(grid.steps() + 1),
        delta: Vec::with_capacity(grid.steps() + 1),
    };
    for m in 0..=grid.steps() {
        let t = grid.node(m);
        let p = params.path.sample(t);
        let envelope =
            Complex::new(p.beta_dot * p.alpha.sin(), p.alpha_dot) * Complex::new(half, S::zero());
        let omega0 =
            envelope * Complex::new(st, S::zero()) * Complex::from_polar(S::one(), params.varphi + p.beta);
        let omega1 =
            -envelope * Complex::new(ct, S::zero()) * Complex::from_polar(S::one(), p.beta);
        profile.times.push(t);
        profile.omega0.push(omega0);
        profile.omega1.push(omega1);
        profile.delta.push(-p.beta_dot * (S::one() + p.alpha.cos()));
    }
    profile
}

/// Driven three-level Hamiltonian on `(|0>, |1>, |e>)`:
/// `Delta |e><e| + Omega_0 |e><0| + Omega_1 |e><1| + H.c.`
pub fn three_level_hamiltonian<S: Real>(
    omega0: Complex<S>,
    omega1: Complex<S>,
    delta: S,
) -> ComplexMatrix<S> {
    let mut h = ComplexMatrix::zeros(3);
    h.set(2, 2, Complex::new(delta, S::zero()));
    h.set(2, 0, omega0);
    h.set(0, 2, omega0.conj());
    h.set(2, 1, omega1);
    h.set(1, 2, omega1.conj());
    h
}

/// Reads the gate realized by a closed path: the rotation angle is the
/// enclosed angle, the axis comes from the frame's static angles.
pub fn gate_from_geometry<S: Real>(
    path: &SpherePath<S>,
    theta: S,
    varphi: S,
) -> Result<GateSpec<S>, PathError> {
    Ok(GateSpec::new(theta, varphi, path.enclosed_angle()?))
}

impl<S: Real> PulseProfile<S> {
    /// CSV columns: `t, re_omega0, im_omega0, re_omega1, im_omega1, delta`.
    pub fn write_csv<W: io::Write>(&self, writer: &mut W) -> io::Result<()> {
        writeln!(writer, "t,re_omega0,im_omega0,re_omega1,im_omega1,delta")?;
        for (m, t) in self.times.iter().enumerate() {
            writeln!(
                writer,
                "{t},{},{},{},{},{}",
                self.omega0[m].re,
                self.omega0[m].im,
                self.omega1[m].re,
                self.omega1[m].im,
                self.delta[m],
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{self, TimeGrid};
    use crate::frames::OneQubitFrame;
    use crate::numkit::gate_distance;
    use crate::spherepaths::{orange_slice, three_arc, Segment, SegmentKind, SpherePath};
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn zero_angle_gives_identity() {
        let spec = GateSpec::new(1.1, 0.3, 0.0);
        let gate = analytic_one_qubit(&spec);
        assert!(gate.sub(&ComplexMatrix::identity(2)).max_abs() < 1e-15);
        let gate2 = analytic_two_qubit(&spec);
        assert!(gate2.sub(&ComplexMatrix::identity(4)).max_abs() < 1e-15);
    }

    #[test]
    fn z_axis_rotation_is_diagonal() {
        let spec = GateSpec::new(0.0, 0.0, PI / 8.0);
        let gate = analytic_one_qubit(&spec);
        assert!((gate.get(0, 0) - Complex64::from_polar(1.0, PI / 16.0)).norm() < 1e-15);
        assert!((gate.get(1, 1) - Complex64::from_polar(1.0, -PI / 16.0)).norm() < 1e-15);
        assert!(gate.get(0, 1).norm() < 1e-15 && gate.get(1, 0).norm() < 1e-15);
    }

    #[test]
    fn closed_form_matches_eigendecomposition_route() {
        for (theta, varphi, angle) in [(0.3, 1.2, 0.9), (2.1, 4.4, 5.5), (PI / 2.0, 0.0, PI)] {
            let spec = GateSpec::new(theta, varphi, angle);
            let closed = analytic_one_qubit(&spec);
            let via_expm = axis_matrix(spec.axis()).herm_expm(spec.angle / 2.0).unwrap();
            assert!(closed.sub(&via_expm).max_abs() < 1e-14);
        }
    }

    #[test]
    fn eigenphases_are_half_angles_on_the_axis() {
        // The gate shares the axis operator's eigenvectors and carries
        // phases exp(+/- i angle / 2) on them.
        for (theta, varphi, angle) in [(1.2f64, 0.4, 0.9), (2.6, 3.9, 4.8)] {
            let spec = GateSpec::new(theta, varphi, angle);
            let gate = analytic_one_qubit(&spec);
            let (values, vectors) = axis_matrix(spec.axis()).herm_eigen();
            assert!((values[0] + 1.0).abs() < 1e-12 && (values[1] - 1.0).abs() < 1e-12);
            for (column, sign) in [(0usize, -1.0), (1usize, 1.0)] {
                let v = [vectors.get(0, column), vectors.get(1, column)];
                let image = gate.apply(&v);
                let phase = Complex64::from_polar(1.0, sign * spec.angle / 2.0);
                for (a, b) in image.iter().zip(&v) {
                    assert!((a - phase * b).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn angle_normalization_wraps_negatives() {
        let spec = GateSpec::new(0.5, 0.5, -PI / 2.0);
        assert_relative_eq!(spec.angle, 3.0 * PI / 2.0, epsilon = 1e-15);
        assert!((0.0..2.0 * PI).contains(&GateSpec::new(0.0, 0.0, 17.3).angle));
    }

    #[test]
    fn axis_is_unit_norm() {
        for (theta, varphi) in [(0.0, 0.0), (1.3, 2.2), (PI, 5.0)] {
            let spec = GateSpec::new(theta, varphi, 1.0);
            let n = spec.axis();
            let norm: f64 = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            assert!((norm - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn two_qubit_theta_zero_angle_pi_is_controlled_z() {
        let spec = GateSpec::new(0.0, PI, PI);
        let gate = analytic_two_qubit(&spec);
        let mut cz = ComplexMatrix::identity(4);
        cz.set(3, 3, Complex64::new(-1.0, 0.0));
        assert!(gate.sub(&cz).max_abs() < 1e-14);
    }

    #[test]
    fn two_qubit_upper_block_is_identity() {
        let spec = GateSpec::new(1.9, 0.7, 2.4);
        let gate = analytic_two_qubit(&spec);
        assert_eq!(gate.get(0, 0), Complex64::new(1.0, 0.0));
        assert_eq!(gate.get(1, 1), Complex64::new(1.0, 0.0));
        for (i, j) in [(0, 1), (1, 0), (0, 2), (0, 3), (1, 2), (1, 3), (2, 0), (3, 1)] {
            assert_eq!(gate.get(i, j).norm(), 0.0);
        }
    }

    #[test]
    fn two_qubit_lower_block_matches_one_qubit() {
        for (theta, varphi, angle) in [(0.4, 0.9, 1.7), (2.8, 5.1, 0.2)] {
            let spec = GateSpec::new(theta, varphi, angle);
            let two = analytic_two_qubit(&spec);
            let one = analytic_one_qubit(&spec);
            let phase = Complex64::from_polar(1.0, -spec.angle / 2.0);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((two.get(2 + i, 2 + j) - phase * one.get(i, j)).norm() < 1e-14);
                }
            }
        }
    }

    fn frame_params(theta: f64, varphi: f64, path: SpherePath<f64>) -> FrameParams<f64> {
        FrameParams { theta, varphi, path }
    }

    #[test]
    fn pulse_profile_on_meridian_only_path() {
        // beta_dot = 0 everywhere: zero detuning, pure-imaginary drives.
        let path = SpherePath::new(vec![
            Segment {
                kind: SegmentKind::Meridian {
                    beta: 0.0,
                    alpha_start: 0.0,
                    alpha_end: 1.9,
                },
                duration: 0.5,
            },
            Segment {
                kind: SegmentKind::Meridian {
                    beta: 0.0,
                    alpha_start: 1.9,
                    alpha_end: 0.0,
                },
                duration: 0.5,
            },
        ])
        .unwrap();
        let theta = 1.1;
        let params = frame_params(theta, 0.0, path);
        let grid = TimeGrid::new(32, 1.0).unwrap();
        let profile = pulse_profile(&params, &grid);
        for m in 0..=32 {
            assert_eq!(profile.delta[m], 0.0);
            assert!(profile.omega0[m].re.abs() < 1e-15);
            assert!(profile.omega1[m].re.abs() < 1e-15);
        }
        // |Omega_0 / Omega_1| = tan(theta / 2) wherever the drive is on.
        for m in 1..32 {
            let ratio = profile.omega0[m].norm() / profile.omega1[m].norm();
            assert_relative_eq!(ratio, (theta / 2.0).tan(), epsilon = 1e-12);
        }
    }

    #[test]
    fn theta_pi_silences_second_drive() {
        let params = frame_params(PI, 0.4, orange_slice(1.0).unwrap());
        let grid = TimeGrid::new(64, 1.0).unwrap();
        let profile = pulse_profile(&params, &grid);
        // cos(pi/2) only vanishes to rounding; the drive scale is ~alpha_dot.
        assert!(profile.omega1.iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn envelope_identity_on_meridians() {
        let params = frame_params(0.8, 1.1, orange_slice(PI / 8.0).unwrap());
        let grid = TimeGrid::new(64, 1.0).unwrap();
        let profile = pulse_profile(&params, &grid);
        // Nodes strictly inside the meridian descent: |Omega|^2 sums to
        // (alpha_dot / 2)^2.
        let alpha_dot = PI / 0.375;
        for m in 1..23 {
            let total = profile.omega0[m].norm_sqr() + profile.omega1[m].norm_sqr();
            assert_relative_eq!(total, (alpha_dot / 2.0) * (alpha_dot / 2.0), epsilon = 1e-10);
        }
    }

    #[test]
    fn pulse_reconstruction_matches_engine_hamiltonian() {
        let params = frame_params(PI / 3.0, PI / 7.0, three_arc(PI / 4.0).unwrap());
        let frame = OneQubitFrame::new(params.clone()).unwrap();
        let grid = TimeGrid::new(256, 1.0).unwrap();
        let profile = pulse_profile(&params, &grid);
        for m in 0..=256 {
            let t = grid.node(m);
            let rebuilt =
                three_level_hamiltonian(profile.omega0[m], profile.omega1[m], profile.delta[m]);
            let direct = engine::hamiltonian(&frame, t).unwrap();
            assert!(
                rebuilt.sub(&direct).max_abs() < 1e-10,
                "node {m}: {:.3e}",
                rebuilt.sub(&direct).max_abs()
            );
        }
    }

    #[test]
    fn geometry_reads_back_the_rotation_angle() {
        let spec =
            gate_from_geometry(&orange_slice(PI / 8.0).unwrap(), PI / 3.0, PI / 7.0).unwrap();
        assert_relative_eq!(spec.angle, PI / 8.0, epsilon = 1e-10);
        let spec2 = gate_from_geometry(&three_arc(PI / 4.0).unwrap(), 0.0, 0.0).unwrap();
        assert_relative_eq!(spec2.angle, PI / 8.0, epsilon = 1e-10);
        let spec3 = gate_from_geometry(
            &crate::spherepaths::minimal_circle(PI / 8.0).unwrap(),
            0.2,
            0.9,
        )
        .unwrap();
        assert_relative_eq!(spec3.angle, PI / 8.0, epsilon = 1e-8);
    }

    #[test]
    fn engine_gate_matches_analytic_target() {
        let theta = 0.77;
        let varphi = 2.13;
        let path = orange_slice(1.3).unwrap();
        let frame = OneQubitFrame::new(frame_params(theta, varphi, path.clone())).unwrap();
        let grid = TimeGrid::new(2048, 1.0).unwrap();
        let record = engine::propagate(&frame, &grid).unwrap();
        let gate = engine::gate_from_record(&record, &frame).unwrap();
        let canonical = engine::to_computational_basis(&frame, &gate).unwrap();
        let target = analytic_one_qubit(&gate_from_geometry(&path, theta, varphi).unwrap());
        assert!(gate_distance(&canonical, &target).unwrap() < 1e-6);
    }

    #[test]
    fn pulse_csv_columns() {
        let params = frame_params(0.5, 0.5, orange_slice(0.5).unwrap());
        let grid = TimeGrid::new(16, 1.0).unwrap();
        let profile = pulse_profile(&params, &grid);
        let mut buffer = Vec::new();
        profile.write_csv(&mut buffer).unwrap();
        let text = String::from_utf8(buffer).unwrap();
        assert!(text.starts_with("t,re_omega0,im_omega0,re_omega1,im_omega1,delta\n"));
        assert_eq!(text.lines().count(), 18);
    }

    #[test]
    fn gate_spec_json_schema() {
        let spec = GateSpec::new(0.25, 1.5, 0.75);
        let value = serde_json::to_value(spec).unwrap();
        assert!(value["theta"].is_number());
        assert!(value["varphi"].is_number());
        assert!(value["angle"].is_number());
    }
}

//! Paths on the parameter sphere: built-in protocol paths, length and
//! enclosed-solid-angle functionals, the minimal enclosing circle through the
//! pole, and evolution-time comparisons.
//!
//! A path is an ordered list of smooth segments, each mapping `u in [0, 1]`
//! to polar/azimuthal angles `(alpha, beta)` with its own duration. Monotone
//! schedules can be layered on top to re-time the traversal without touching
//! the geometric trace; both functionals integrate in segment parameter and
//! are therefore schedule-invariant by construction.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::real::{lit, Real};

#[derive(Debug, Error)]
pub enum PathError {
    #[error("path needs at least one segment")]
    EmptySegments,
    #[error("segment {index} has non-positive duration")]
    NonPositiveDuration { index: usize },
    #[error("{name} = {value} is out of range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("junction {index} is discontinuous: d_alpha = {da:.3e}, d_beta = {db:.3e}")]
    DiscontinuousJunction { index: usize, da: f64, db: f64 },
    #[error("segment {index} leaves alpha range [0, pi]: alpha = {alpha}")]
    AlphaOutOfRange { index: usize, alpha: f64 },
    #[error("path is not pole-closed: alpha(0) = {alpha_start:.3e}, alpha(tau) = {alpha_end:.3e}")]
    NotClosed { alpha_start: f64, alpha_end: f64 },
    #[error("schedule is not monotone on [0, 1]")]
    NonMonotoneSchedule,
    #[error("geodesic segment {index} has coincident or antipodal endpoints")]
    DegenerateGeodesic { index: usize },
    #[error("polygon needs at least 3 vertices")]
    TooFewVertices,
    #[error("adjacent polygon vertices {index} and {} are antipodal", index + 1)]
    DegenerateVertices { index: usize },
}

/// Instantaneous path data: angles and their time derivatives.
#[derive(Debug, Clone, Copy)]
pub struct PathPoint<S> {
    pub alpha: S,
    pub beta: S,
    pub alpha_dot: S,
    pub beta_dot: S,
}

/// One smooth piece of a path, parametrized by `u in [0, 1]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum SegmentKind<S> {
    /// Constant azimuth, linear sweep in polar angle.
    Meridian {
        beta: S,
        alpha_start: S,
        alpha_end: S,
    },
    /// Constant polar angle, linear sweep in azimuth. At `alpha = pi` this is
    /// the metrically zero-length south-pole sweep of the orange slice.
    Parallel {
        alpha: S,
        beta_start: S,
        beta_end: S,
    },
    /// Circle through the north pole enclosing half-solid-angle `half_angle`,
    /// rotated by `azimuth` about the polar axis, traversed once at constant
    /// speed.
    CapCircle { half_angle: S, azimuth: S },
    /// Great-circle arc between two points given as `(alpha, beta)`.
    Geodesic { start: [S; 2], end: [S; 2] },
    /// Chain of great-circle arcs through the listed `(alpha, beta)` vertices.
    Polyline { vertices: Vec<[S; 2]> },
    /// Truncated sine series: smooth pole-anchored loops for sampling-based
    /// property checks. `alpha(u) = sum_m alpha_sin[m] sin((m+1) pi u)`,
    /// `beta(u) = beta_offset + beta_rate u + sum_m beta_sin[m] sin((m+1) pi u)`.
    Fourier {
        alpha_sin: Vec<S>,
        beta_rate: S,
        beta_sin: Vec<S>,
        beta_offset: S,
    },
}

fn unit_vector<S: Real>(alpha: S, beta: S) -> [S; 3] {
    [
        alpha.sin() * beta.cos(),
        alpha.sin() * beta.sin(),
        alpha.cos(),
    ]
}

fn dot<S: Real>(a: &[S; 3], b: &[S; 3]) -> S {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn triple<S: Real>(a: &[S; 3], b: &[S; 3], c: &[S; 3]) -> S {
    a[0] * (b[1] * c[2] - b[2] * c[1]) + a[1] * (b[2] * c[0] - b[0] * c[2])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// Slerp position and velocity on the arc between unit vectors `v0`, `v1`.
fn geodesic_point<S: Real>(v0: &[S; 3], v1: &[S; 3], omega: S, u: S) -> ([S; 3], [S; 3]) {
    let so = omega.sin();
    let a = ((S::one() - u) * omega).sin() / so;
    let b = (u * omega).sin() / so;
    let da = -omega * ((S::one() - u) * omega).cos() / so;
    let db = omega * (u * omega).cos() / so;
    let p = [
        a * v0[0] + b * v1[0],
        a * v0[1] + b * v1[1],
        a * v0[2] + b * v1[2],
    ];
    let dp = [
        da * v0[0] + db * v1[0],
        da * v0[1] + db * v1[1],
        da * v0[2] + db * v1[2],
    ];
    (p, dp)
}

fn angles_from_cartesian<S: Real>(p: &[S; 3], dp: &[S; 3]) -> PathPoint<S> {
    let r2 = p[0] * p[0] + p[1] * p[1];
    let pole_eps = lit::<S>(1e-14);
    if r2 <= pole_eps {
        // At a pole the azimuth of the tangent direction is the natural
        // continuous extension of beta.
        let alpha = if p[2] > S::zero() {
            r2.sqrt().asin()
        } else {
            S::PI() - r2.sqrt().asin()
        };
        let speed = (dp[0] * dp[0] + dp[1] * dp[1] + dp[2] * dp[2]).sqrt();
        let sign = if p[2] > S::zero() {
            -dp[2].signum()
        } else {
            dp[2].signum()
        };
        return PathPoint {
            alpha,
            beta: dp[1].atan2(dp[0]),
            alpha_dot: sign * speed,
            beta_dot: S::zero(),
        };
    }
    let alpha = p[2].min(S::one()).max(-S::one()).acos();
    let beta = p[1].atan2(p[0]);
    let alpha_dot = -dp[2] / r2.sqrt();
    let beta_dot = (p[0] * dp[1] - p[1] * dp[0]) / r2;
    PathPoint {
        alpha,
        beta,
        alpha_dot,
        beta_dot,
    }
}

impl<S: Real> SegmentKind<S> {
    /// Angles and per-`u` derivatives at parameter `u`.
    pub fn eval(&self, u: S) -> PathPoint<S> {
        let two = lit::<S>(2.0);
        match self {
            SegmentKind::Meridian {
                beta,
                alpha_start,
                alpha_end,
            } => PathPoint {
                alpha: *alpha_start + (*alpha_end - *alpha_start) * u,
                beta: *beta,
                alpha_dot: *alpha_end - *alpha_start,
                beta_dot: S::zero(),
            },
            SegmentKind::Parallel {
                alpha,
                beta_start,
                beta_end,
            } => PathPoint {
                alpha: *alpha,
                beta: *beta_start + (*beta_end - *beta_start) * u,
                alpha_dot: S::zero(),
                beta_dot: *beta_end - *beta_start,
            },
            SegmentKind::CapCircle { half_angle, azimuth } => {
                let rho = (S::one() - *half_angle / S::PI()).acos();
                let (sr, cr) = (rho.sin(), rho.cos());
                let s = S::PI() * (S::one() + two * u);
                let ds = two * S::PI();
                let half = s / two;
                let sin_half_alpha = (-sr * half.cos()).min(S::one()).max(-S::one());
                let alpha = two * sin_half_alpha.asin();
                let x = sr * cr * (S::one() + s.cos());
                let y = sr * s.sin();
                let beta = if x * x + y * y <= lit::<S>(1e-28) {
                    // Pole endpoints: limit azimuth of the tangent direction.
                    if u < lit::<S>(0.5) {
                        -S::FRAC_PI_2() + *azimuth
                    } else {
                        S::FRAC_PI_2() + *azimuth
                    }
                } else {
                    y.atan2(x) + *azimuth
                };
                let alpha_dot =
                    ds * sr * half.sin() / (S::one() - sr * sr * half.cos() * half.cos()).sqrt();
                let beta_dot = ds * cr / (S::one() + cr * cr - sr * sr * s.cos());
                PathPoint {
                    alpha,
                    beta,
                    alpha_dot,
                    beta_dot,
                }
            }
            SegmentKind::Geodesic { start, end } => {
                let v0 = unit_vector(start[0], start[1]);
                let v1 = unit_vector(end[0], end[1]);
                let omega = dot(&v0, &v1).min(S::one()).max(-S::one()).acos();
                let (p, dp) = geodesic_point(&v0, &v1, omega, u);
                angles_from_cartesian(&p, &dp)
            }
            SegmentKind::Polyline { vertices } => {
                let edges = vertices.len() - 1;
                let scaled = u * S::from_usize(edges).expect("edge count");
                let mut e = scaled.floor().to_usize().unwrap_or(0);
                if e >= edges {
                    e = edges - 1;
                }
                let local = scaled - S::from_usize(e).expect("edge index");
                let v0 = unit_vector(vertices[e][0], vertices[e][1]);
                let v1 = unit_vector(vertices[e + 1][0], vertices[e + 1][1]);
                let omega = dot(&v0, &v1).min(S::one()).max(-S::one()).acos();
                let (p, dp) = geodesic_point(&v0, &v1, omega, local);
                let mut point = angles_from_cartesian(&p, &dp);
                let factor = S::from_usize(edges).expect("edge count");
                point.alpha_dot *= factor;
                point.beta_dot *= factor;
                point
            }
            SegmentKind::Fourier {
                alpha_sin,
                beta_rate,
                beta_sin,
                beta_offset,
            } => {
                let mut alpha = S::zero();
                let mut alpha_dot = S::zero();
                for (m, &a) in alpha_sin.iter().enumerate() {
                    let w = S::from_usize(m + 1).expect("harmonic") * S::PI();
                    alpha += a * (w * u).sin();
                    alpha_dot += a * w * (w * u).cos();
                }
                let mut beta = *beta_offset + *beta_rate * u;
                let mut beta_dot = *beta_rate;
                for (m, &b) in beta_sin.iter().enumerate() {
                    let w = S::from_usize(m + 1).expect("harmonic") * S::PI();
                    beta += b * (w * u).sin();
                    beta_dot += b * w * (w * u).cos();
                }
                PathPoint {
                    alpha,
                    beta,
                    alpha_dot,
                    beta_dot,
                }
            }
        }
    }

    /// Arc-length integrand `|dp/du|` at parameter `u`.
    fn speed(&self, u: S) -> S {
        match self {
            SegmentKind::Geodesic { .. } | SegmentKind::Polyline { .. } => {
                // Cartesian form avoids the coordinate singularity at poles.
                let (dp, factor) = self.cartesian_velocity(u);
                (dp[0] * dp[0] + dp[1] * dp[1] + dp[2] * dp[2]).sqrt() * factor
            }
            _ => {
                let p = self.eval(u);
                (p.alpha_dot * p.alpha_dot
                    + p.alpha.sin() * p.alpha.sin() * p.beta_dot * p.beta_dot)
                    .sqrt()
            }
        }
    }

    /// Solid-angle integrand `(1 - cos alpha) beta_dot / 2` at parameter `u`.
    fn sweep(&self, u: S) -> S {
        let two = lit::<S>(2.0);
        match self {
            SegmentKind::Geodesic { .. } | SegmentKind::Polyline { .. } => {
                // (x y' - y x') / (2 (1 + z)): regular everywhere away from
                // the south pole, where great circles carry no z angular
                // momentum anyway.
                let (p, dp, factor) = self.cartesian_point(u);
                let lz = p[0] * dp[1] - p[1] * dp[0];
                if lz.abs() <= lit::<S>(1e-15) {
                    S::zero()
                } else {
                    lz * factor / (two * (S::one() + p[2]))
                }
            }
            _ => {
                let p = self.eval(u);
                (S::one() - p.alpha.cos()) * p.beta_dot / two
            }
        }
    }

    fn cartesian_point(&self, u: S) -> ([S; 3], [S; 3], S) {
        match self {
            SegmentKind::Geodesic { start, end } => {
                let v0 = unit_vector(start[0], start[1]);
                let v1 = unit_vector(end[0], end[1]);
                let omega = dot(&v0, &v1).min(S::one()).max(-S::one()).acos();
                let (p, dp) = geodesic_point(&v0, &v1, omega, u);
                (p, dp, S::one())
            }
            SegmentKind::Polyline { vertices } => {
                let edges = vertices.len() - 1;
                let scaled = u * S::from_usize(edges).expect("edge count");
                let mut e = scaled.floor().to_usize().unwrap_or(0);
                if e >= edges {
                    e = edges - 1;
                }
                let local = scaled - S::from_usize(e).expect("edge index");
                let v0 = unit_vector(vertices[e][0], vertices[e][1]);
                let v1 = unit_vector(vertices[e + 1][0], vertices[e + 1][1]);
                let omega = dot(&v0, &v1).min(S::one()).max(-S::one()).acos();
                let (p, dp) = geodesic_point(&v0, &v1, omega, local);
                (p, dp, S::from_usize(edges).expect("edge count"))
            }
            _ => unreachable!("cartesian form only used for geodesic kinds"),
        }
    }

    fn cartesian_velocity(&self, u: S) -> ([S; 3], S) {
        let (_, dp, factor) = self.cartesian_point(u);
        (dp, factor)
    }
}

/// A segment with its traversal duration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Segment<S> {
    #[serde(flatten)]
    pub kind: SegmentKind<S>,
    pub duration: S,
}

/// Shape of a monotone time reparametrization on normalized time.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum ScheduleShape<S> {
    /// Linear re-timing; only the duration scale acts.
    Uniform,
    /// `sin^2(pi x / 2)` ramp: rates vanish at both endpoints.
    SinSquared,
    /// Normalized monotone cubic `(c1 x + c2 x^2 + c3 x^3) / (c1 + c2 + c3)`.
    Cubic { coefficients: [S; 3] },
}

/// A monotone schedule: normalized shape plus a duration scale factor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Schedule<S> {
    pub shape: ScheduleShape<S>,
    pub duration_scale: S,
}

impl<S: Real> Schedule<S> {
    pub fn uniform(duration_scale: S) -> Self {
        Schedule {
            shape: ScheduleShape::Uniform,
            duration_scale,
        }
    }

    pub fn sin_squared() -> Self {
        Schedule {
            shape: ScheduleShape::SinSquared,
            duration_scale: S::one(),
        }
    }

    pub fn cubic(coefficients: [S; 3]) -> Self {
        Schedule {
            shape: ScheduleShape::Cubic { coefficients },
            duration_scale: S::one(),
        }
    }

    fn validate(&self) -> Result<(), PathError> {
        if !(self.duration_scale > S::zero()) {
            return Err(PathError::NonMonotoneSchedule);
        }
        if let ScheduleShape::Cubic { coefficients: c } = &self.shape {
            let sum = c[0] + c[1] + c[2];
            if !(sum.abs() > S::zero()) {
                return Err(PathError::NonMonotoneSchedule);
            }
            let two = lit::<S>(2.0);
            let three = lit::<S>(3.0);
            for k in 0..=100 {
                let x = S::from_usize(k).expect("grid") / lit::<S>(100.0);
                let dy = (c[0] + two * c[1] * x + three * c[2] * x * x) / sum;
                if !(dy >= S::zero()) {
                    return Err(PathError::NonMonotoneSchedule);
                }
            }
        }
        Ok(())
    }

    /// Maps normalized time `x` to normalized base time, with derivative.
    fn eval(&self, x: S) -> (S, S) {
        match &self.shape {
            ScheduleShape::Uniform => (x, S::one()),
            ScheduleShape::SinSquared => {
                let half_pi = S::FRAC_PI_2();
                let s = (half_pi * x).sin();
                (s * s, half_pi * (S::PI() * x).sin())
            }
            ScheduleShape::Cubic { coefficients: c } => {
                let sum = c[0] + c[1] + c[2];
                let y = (c[0] * x + c[1] * x * x + c[2] * x * x * x) / sum;
                let dy = (c[0] + lit::<S>(2.0) * c[1] * x + lit::<S>(3.0) * c[2] * x * x) / sum;
                (y, dy)
            }
        }
    }
}

/// Piecewise-smooth closed (or deliberately open) path on the unit sphere.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpherePath<S> {
    segments: Vec<Segment<S>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    schedules: Vec<Schedule<S>>,
}

impl<S: Real> SpherePath<S> {
    /// Validates junction continuity and polar range; pole closure is checked
    /// at use sites so that deliberately open paths remain constructible for
    /// diagnostics.
    pub fn new(segments: Vec<Segment<S>>) -> Result<Self, PathError> {
        if segments.is_empty() {
            return Err(PathError::EmptySegments);
        }
        let junction_tol = lit::<S>(1e-9);
        for (index, seg) in segments.iter().enumerate() {
            if !(seg.duration > S::zero()) {
                return Err(PathError::NonPositiveDuration { index });
            }
            if let SegmentKind::Geodesic { start, end } = &seg.kind {
                let v0 = unit_vector(start[0], start[1]);
                let v1 = unit_vector(end[0], end[1]);
                let c = dot(&v0, &v1);
                if c > S::one() - lit::<S>(1e-12) || c < -S::one() + lit::<S>(1e-12) {
                    return Err(PathError::DegenerateGeodesic { index });
                }
            }
            if let SegmentKind::Polyline { vertices } = &seg.kind {
                if vertices.len() < 2 {
                    return Err(PathError::DegenerateGeodesic { index });
                }
            }
            // Sample the polar angle range.
            for k in 0..=64 {
                let u = S::from_usize(k).expect("grid") / lit::<S>(64.0);
                let p = seg.kind.eval(u);
                if p.alpha < -junction_tol || p.alpha > S::PI() + junction_tol {
                    return Err(PathError::AlphaOutOfRange {
                        index,
                        alpha: p.alpha.to_f64().unwrap_or(f64::NAN),
                    });
                }
            }
        }
        for index in 0..segments.len() - 1 {
            let end = segments[index].kind.eval(S::one());
            let start = segments[index + 1].kind.eval(S::zero());
            let da = (end.alpha - start.alpha).abs();
            let at_pole = end.alpha.sin().abs() <= junction_tol;
            let tau = lit::<S>(2.0) * S::PI();
            let mut db = (end.beta - start.beta) % tau;
            if db < S::zero() {
                db += tau;
            }
            db = db.min(tau - db);
            if da > junction_tol || (!at_pole && db > junction_tol) {
                return Err(PathError::DiscontinuousJunction {
                    index,
                    da: da.to_f64().unwrap_or(f64::NAN),
                    db: db.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(SpherePath {
            segments,
            schedules: Vec::new(),
        })
    }

    pub fn segments(&self) -> &[Segment<S>] {
        &self.segments
    }

    fn base_duration(&self) -> S {
        self.segments
            .iter()
            .map(|s| s.duration)
            .fold(S::zero(), |a, b| a + b)
    }

    /// Total traversal time, including schedule scale factors.
    pub fn total_duration(&self) -> S {
        self.schedules
            .iter()
            .fold(self.base_duration(), |tau, s| tau * s.duration_scale)
    }

    /// Angles and time derivatives at absolute time `t in [0, tau]`.
    pub fn sample(&self, t: S) -> PathPoint<S> {
        let tau = self.total_duration();
        let mut x = (t / tau).max(S::zero()).min(S::one());
        let mut chain_derivative = S::one();
        for schedule in &self.schedules {
            let (y, dy) = schedule.eval(x);
            x = y.max(S::zero()).min(S::one());
            chain_derivative *= dy;
        }
        let base = self.base_duration();
        let t_base = x * base;
        let mut acc = S::zero();
        let eps = base * lit::<S>(1e-15);
        for segment in &self.segments {
            if t_base <= acc + segment.duration + eps {
                let u = ((t_base - acc) / segment.duration)
                    .max(S::zero())
                    .min(S::one());
                let mut p = segment.kind.eval(u);
                let rate = chain_derivative * base / (tau * segment.duration);
                p.alpha_dot *= rate;
                p.beta_dot *= rate;
                return p;
            }
            acc += segment.duration;
        }
        let last = self.segments.last().expect("non-empty path");
        let mut p = last.kind.eval(S::one());
        let rate = chain_derivative * base / (tau * last.duration);
        p.alpha_dot *= rate;
        p.beta_dot *= rate;
        p
    }

    /// True when the path starts and ends at the north pole.
    pub fn is_pole_anchored(&self) -> bool {
        let tol = lit::<S>(1e-9);
        let first = self.segments.first().expect("non-empty").kind.eval(S::zero());
        let last = self.segments.last().expect("non-empty").kind.eval(S::one());
        first.alpha.abs() <= tol && last.alpha.abs() <= tol
    }

    /// Arc length `int sqrt(alpha_dot^2 + sin^2(alpha) beta_dot^2) dt` by
    /// adaptive Simpson quadrature per segment (relative target
    /// [`Real::quad_tol`]). Zero-length pole sweeps are recognized exactly.
    pub fn length(&self) -> S {
        let mut total = S::zero();
        for segment in &self.segments {
            total += segment_length(&segment.kind);
        }
        total
    }

    /// Enclosed-angle functional `(1/2) oint (1 - cos alpha) d beta`,
    /// normalized into `[0, 2 pi)`.
    pub fn enclosed_angle(&self) -> Result<S, PathError> {
        let raw = self.enclosed_angle_raw()?;
        let tau = lit::<S>(2.0) * S::PI();
        let mut normalized = raw % tau;
        if normalized < S::zero() {
            normalized += tau;
        }
        if normalized >= tau {
            normalized -= tau;
        }
        Ok(normalized)
    }

    /// Signed, un-normalized enclosed-angle integral.
    pub fn enclosed_angle_raw(&self) -> Result<S, PathError> {
        if !self.is_pole_anchored() {
            let first = self.segments.first().expect("non-empty").kind.eval(S::zero());
            let last = self.segments.last().expect("non-empty").kind.eval(S::one());
            return Err(PathError::NotClosed {
                alpha_start: first.alpha.to_f64().unwrap_or(f64::NAN),
                alpha_end: last.alpha.to_f64().unwrap_or(f64::NAN),
            });
        }
        let mut total = S::zero();
        for segment in &self.segments {
            total += segment_sweep(&segment.kind);
        }
        Ok(total)
    }

    /// Length, enclosed angle, and duration in one report.
    pub fn report(&self) -> Result<PathReport<S>, PathError> {
        Ok(PathReport {
            length: self.length(),
            enclosed_angle: self.enclosed_angle()?,
            duration: self.total_duration(),
        })
    }

    /// Re-times the traversal through a monotone schedule; the geometric
    /// trace, length, and enclosed angle are untouched.
    pub fn reparametrize(&self, schedule: Schedule<S>) -> Result<Self, PathError> {
        schedule.validate()?;
        let mut out = self.clone();
        out.schedules.insert(0, schedule);
        Ok(out)
    }

    /// Traversal time at constant metric speed `omega`: the comparison
    /// convention in which the zero-length south-pole sweep costs no time.
    pub fn constant_speed_duration(&self, omega: S) -> S {
        assert!(omega > S::zero(), "angular speed must be positive");
        self.length() / omega
    }

    /// Uniform trace of `(t, alpha, beta)` samples, endpoints included.
    pub fn trace(&self, samples: usize) -> Vec<(S, S, S)> {
        let tau = self.total_duration();
        (0..=samples)
            .map(|k| {
                let t = tau * S::from_usize(k).expect("sample index")
                    / S::from_usize(samples).expect("sample count");
                let p = self.sample(t);
                (t, p.alpha, p.beta)
            })
            .collect()
    }
}

fn segment_length<S: Real>(kind: &SegmentKind<S>) -> S {
    if let SegmentKind::Parallel { alpha, .. } = kind {
        if alpha.sin().abs() < lit::<S>(1e-14) {
            return S::zero();
        }
    }
    adaptive_simpson(&|u| kind.speed(u), S::zero(), S::one(), S::quad_tol())
}

fn segment_sweep<S: Real>(kind: &SegmentKind<S>) -> S {
    if let SegmentKind::Meridian { .. } = kind {
        return S::zero();
    }
    adaptive_simpson(&|u| kind.sweep(u), S::zero(), S::one(), S::quad_tol())
}

/// Path length + enclosed angle + duration of a path.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PathReport<S> {
    pub length: S,
    pub enclosed_angle: S,
    pub duration: S,
}

/// Orange-slice loop: meridian descent at `beta = 0`, zero-length azimuth
/// sweep at the south pole, meridian ascent at `beta = delta_beta`. Length is
/// `2 pi` for every `delta_beta`; the enclosed angle is `delta_beta`.
pub fn orange_slice<S: Real>(delta_beta: S) -> Result<SpherePath<S>, PathError> {
    check_angle_range(delta_beta, "delta_beta")?;
    SpherePath::new(vec![
        Segment {
            kind: SegmentKind::Meridian {
                beta: S::zero(),
                alpha_start: S::zero(),
                alpha_end: S::PI(),
            },
            duration: lit::<S>(0.375),
        },
        Segment {
            kind: SegmentKind::Parallel {
                alpha: S::PI(),
                beta_start: S::zero(),
                beta_end: delta_beta,
            },
            duration: lit::<S>(0.25),
        },
        Segment {
            kind: SegmentKind::Meridian {
                beta: delta_beta,
                alpha_start: S::PI(),
                alpha_end: S::zero(),
            },
            duration: lit::<S>(0.375),
        },
    ])
}

/// Three great-circle arcs: pole to `(pi/2, 0)`, along the equator to
/// `(pi/2, beta_f)`, back to the pole. Length `pi + beta_f`, enclosed angle
/// `beta_f / 2`.
pub fn three_arc<S: Real>(beta_f: S) -> Result<SpherePath<S>, PathError> {
    check_angle_range(beta_f, "beta_f")?;
    SpherePath::new(vec![
        Segment {
            kind: SegmentKind::Meridian {
                beta: S::zero(),
                alpha_start: S::zero(),
                alpha_end: S::FRAC_PI_2(),
            },
            duration: lit::<S>(0.25),
        },
        Segment {
            kind: SegmentKind::Parallel {
                alpha: S::FRAC_PI_2(),
                beta_start: S::zero(),
                beta_end: beta_f,
            },
            duration: lit::<S>(0.5),
        },
        Segment {
            kind: SegmentKind::Meridian {
                beta: beta_f,
                alpha_start: S::FRAC_PI_2(),
                alpha_end: S::zero(),
            },
            duration: lit::<S>(0.25),
        },
    ])
}

/// Shortest pole-anchored loop enclosing half-solid-angle `phi`: the circle
/// of angular radius `rho = arccos(1 - phi/pi)` centered at `(rho, 0)`.
pub fn minimal_circle<S: Real>(phi: S) -> Result<SpherePath<S>, PathError> {
    minimal_circle_at(phi, S::zero())
}

/// Minimal circle rotated by `azimuth` about the polar axis; the enclosing
/// family is degenerate under this rotation.
pub fn minimal_circle_at<S: Real>(phi: S, azimuth: S) -> Result<SpherePath<S>, PathError> {
    check_angle_range(phi, "phi")?;
    if (phi - S::PI()).abs() <= lit::<S>(1e-12) {
        // Great-circle case: the cap parametrization degenerates to a
        // meridian pair with the azimuth jump at the south pole.
        return SpherePath::new(vec![
            Segment {
                kind: SegmentKind::Meridian {
                    beta: azimuth - S::FRAC_PI_2(),
                    alpha_start: S::zero(),
                    alpha_end: S::PI(),
                },
                duration: lit::<S>(0.375),
            },
            Segment {
                kind: SegmentKind::Parallel {
                    alpha: S::PI(),
                    beta_start: azimuth - S::FRAC_PI_2(),
                    beta_end: azimuth + S::FRAC_PI_2(),
                },
                duration: lit::<S>(0.25),
            },
            Segment {
                kind: SegmentKind::Meridian {
                    beta: azimuth + S::FRAC_PI_2(),
                    alpha_start: S::PI(),
                    alpha_end: S::zero(),
                },
                duration: lit::<S>(0.375),
            },
        ]);
    }
    SpherePath::new(vec![Segment {
        kind: SegmentKind::CapCircle {
            half_angle: phi,
            azimuth,
        },
        duration: S::one(),
    }])
}

fn check_angle_range<S: Real>(value: S, name: &'static str) -> Result<(), PathError> {
    if value <= S::zero() || value >= lit::<S>(2.0) * S::PI() {
        return Err(PathError::OutOfRange {
            name,
            value: value.to_f64().unwrap_or(f64::NAN),
            range: "(0, 2 pi)",
        });
    }
    Ok(())
}

/// Minimum-time ratio `tau_min / tau_(2 pi protocol) = sqrt(2 phi/pi - (phi/pi)^2)`
/// for the rotation angle `phi`; equals the length ratio of the minimal
/// circle to the meridian-pair loop.
pub fn time_ratio<S: Real>(phi: S) -> Result<S, PathError> {
    check_angle_range(phi, "phi")?;
    let x = phi / S::PI();
    Ok((lit::<S>(2.0) * x - x * x).sqrt())
}

/// Residual of the implicit equation
/// `(pi - phi)(1 - cos alpha) - sqrt(2 pi phi - phi^2) sin alpha cos beta`
/// defining the azimuth-0 minimal circle; zero on the circle.
pub fn minimal_circle_residual<S: Real>(phi: S, alpha: S, beta: S) -> S {
    let root = (lit::<S>(2.0) * S::PI() * phi - phi * phi).sqrt();
    (S::PI() - phi) * (S::one() - alpha.cos()) - root * alpha.sin() * beta.cos()
}

/// Spherical polygon area (Girard excess) through a fan of signed triangle
/// solid angles; the independent oracle for the enclosed-angle functional.
pub fn polygon_excess<S: Real>(vertices: &[(S, S)]) -> Result<S, PathError> {
    if vertices.len() < 3 {
        return Err(PathError::TooFewVertices);
    }
    let vs: Vec<[S; 3]> = vertices
        .iter()
        .map(|&(alpha, beta)| unit_vector(alpha, beta))
        .collect();
    for index in 0..vs.len() - 1 {
        if dot(&vs[index], &vs[index + 1]) < -S::one() + lit::<S>(1e-12) {
            return Err(PathError::DegenerateVertices { index });
        }
    }
    let mut total = S::zero();
    for i in 1..vs.len() - 1 {
        let (a, b, c) = (&vs[0], &vs[i], &vs[i + 1]);
        let numerator = triple(a, b, c);
        let denominator = S::one() + dot(a, b) + dot(b, c) + dot(c, a);
        total += lit::<S>(2.0) * numerator.atan2(denominator);
    }
    Ok(total.abs())
}

/// Adaptive Simpson quadrature with a relative accuracy target.
pub(crate) fn adaptive_simpson<S: Real>(f: &impl Fn(S) -> S, a: S, b: S, rel_tol: S) -> S {
    // Composite pre-pass fixes the absolute tolerance scale.
    let mut coarse = S::zero();
    let n = 16;
    let h = (b - a) / S::from_usize(n).expect("intervals");
    for k in 0..n {
        let x0 = a + h * S::from_usize(k).expect("index");
        coarse += simpson_rule(f, x0, x0 + h);
    }
    let tol = rel_tol * coarse.abs().max(S::one());
    let fa = f(a);
    let fb = f(b);
    let m = (a + b) / lit::<S>(2.0);
    let fm = f(m);
    let whole = simpson_pre(a, b, fa, fm, fb);
    simpson_recurse(f, a, m, b, fa, fm, fb, whole, tol, 0)
}

fn simpson_rule<S: Real>(f: &impl Fn(S) -> S, a: S, b: S) -> S {
    let m = (a + b) / lit::<S>(2.0);
    simpson_pre(a, b, f(a), f(m), f(b))
}

fn simpson_pre<S: Real>(a: S, b: S, fa: S, fm: S, fb: S) -> S {
    (b - a) / lit::<S>(6.0) * (fa + lit::<S>(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<S: Real>(
    f: &impl Fn(S) -> S,
    a: S,
    m: S,
    b: S,
    fa: S,
    fm: S,
    fb: S,
    whole: S,
    tol: S,
    depth: usize,
) -> S {
    let lm = (a + m) / lit::<S>(2.0);
    let rm = (m + b) / lit::<S>(2.0);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson_pre(a, m, fa, flm, fm);
    let right = simpson_pre(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth >= 48 {
        return left + right;
    }
    if depth >= 5 && delta.abs() <= lit::<S>(15.0) * tol {
        return left + right + delta / lit::<S>(15.0);
    }
    let half_tol = tol / lit::<S>(2.0);
    simpson_recurse(f, a, lm, m, fa, flm, fm, left, half_tol, depth + 1)
        + simpson_recurse(f, m, rm, b, fm, frm, fb, right, half_tol, depth + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn orange_slice_length_and_angle() {
        for db in [PI / 8.0, 0.3, PI, 5.9] {
            let p = orange_slice(db).unwrap();
            assert_relative_eq!(p.length(), 2.0 * PI, max_relative = 1e-12);
            // Lune oracle: solid angle 2 delta_beta, halved.
            assert_relative_eq!(p.enclosed_angle().unwrap(), db, epsilon = 1e-12);
            assert!(p.is_pole_anchored());
        }
    }

    #[test]
    fn three_arc_length_and_angle() {
        let p = three_arc(PI / 4.0).unwrap();
        assert_relative_eq!(p.length(), 5.0 * PI / 4.0, max_relative = 1e-12);
        // Girard: right-right triangle with apex angle beta_f has excess
        // beta_f; the rotation angle is half of it.
        assert_relative_eq!(p.enclosed_angle().unwrap(), PI / 8.0, epsilon = 1e-12);
        let lengths = 0.5 * PI + PI / 4.0 + 0.5 * PI;
        assert_relative_eq!(p.length(), lengths, max_relative = 1e-12);
    }

    #[test]
    fn minimal_circle_length_matches_formula() {
        for phi in [PI / 8.0, PI / 2.0, PI, 3.0 * PI / 2.0] {
            let p = minimal_circle(phi).unwrap();
            let formula = 2.0 * (2.0 * PI * phi - phi * phi).sqrt();
            assert_relative_eq!(p.length(), formula, epsilon = 1e-10);
        }
        // phi = pi/8 evaluates to pi sqrt(15) / 4.
        let p = minimal_circle(PI / 8.0).unwrap();
        assert_relative_eq!(p.length(), PI * 15f64.sqrt() / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn minimal_circle_enclosed_angle_is_phi() {
        // Cap oracle: solid angle 2 pi (1 - cos rho) = 2 phi, halved.
        for phi in [PI / 8.0, PI / 2.0, PI, 5.0 * PI / 4.0, 3.0 * PI / 2.0] {
            let p = minimal_circle(phi).unwrap();
            assert_relative_eq!(p.enclosed_angle().unwrap(), phi, epsilon = 1e-8);
        }
    }

    #[test]
    fn minimal_circle_samples_satisfy_implicit_equation() {
        for phi in [PI / 8.0, PI / 2.0, PI, 3.0 * PI / 2.0] {
            let p = minimal_circle(phi).unwrap();
            for (_, alpha, beta) in p.trace(1000) {
                let r = minimal_circle_residual(phi, alpha, beta);
                assert!(r.abs() < 1e-9, "phi={phi} residual={r:.3e}");
            }
        }
    }

    #[test]
    fn degenerate_beta_path_has_zero_angle() {
        let p = SpherePath::new(vec![
            Segment {
                kind: SegmentKind::Meridian {
                    beta: 0.4,
                    alpha_start: 0.0,
                    alpha_end: 1.0,
                },
                duration: 0.5,
            },
            Segment {
                kind: SegmentKind::Meridian {
                    beta: 0.4,
                    alpha_start: 1.0,
                    alpha_end: 0.0,
                },
                duration: 0.5,
            },
        ])
        .unwrap();
        assert_eq!(p.enclosed_angle().unwrap(), 0.0);
    }

    #[test]
    fn enclosed_angle_rejects_open_path() {
        let p = SpherePath::new(vec![Segment {
            kind: SegmentKind::Meridian {
                beta: 0.0,
                alpha_start: 0.0,
                alpha_end: 0.3,
            },
            duration: 1.0,
        }])
        .unwrap();
        assert!(matches!(
            p.enclosed_angle(),
            Err(PathError::NotClosed { .. })
        ));
    }

    #[test]
    fn builtin_range_checks() {
        assert!(matches!(
            orange_slice(0.0),
            Err(PathError::OutOfRange { name: "delta_beta", .. })
        ));
        assert!(matches!(
            three_arc(2.0 * PI),
            Err(PathError::OutOfRange { name: "beta_f", .. })
        ));
        assert!(matches!(
            minimal_circle(-1.0),
            Err(PathError::OutOfRange { name: "phi", .. })
        ));
        assert!(matches!(
            time_ratio(7.0),
            Err(PathError::OutOfRange { name: "phi", .. })
        ));
    }

    #[test]
    fn time_ratio_examples() {
        assert_relative_eq!(
            time_ratio(PI / 8.0).unwrap(),
            15f64.sqrt() / 8.0,
            epsilon = 1e-15
        );
        assert_eq!(time_ratio(PI).unwrap(), 1.0);
        assert_relative_eq!(
            time_ratio(PI / 2.0).unwrap(),
            3f64.sqrt() / 2.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn time_ratio_matches_length_ratio() {
        for k in 1..32 {
            let phi = k as f64 * PI / 16.0;
            let ratio = time_ratio(phi).unwrap();
            let length_ratio = minimal_circle(phi).unwrap().length() / (2.0 * PI);
            assert!(
                (ratio - length_ratio).abs() < 1e-12,
                "phi={phi} ratio={ratio} length_ratio={length_ratio}"
            );
        }
    }

    #[test]
    fn constant_speed_durations() {
        let orange = orange_slice(PI / 8.0).unwrap();
        let arc = three_arc(PI / 4.0).unwrap();
        let circle = minimal_circle(PI / 8.0).unwrap();
        let omega = 1.7;
        let t1 = orange.constant_speed_duration(omega);
        assert_relative_eq!(arc.constant_speed_duration(omega) / t1, 5.0 / 8.0, epsilon = 1e-12);
        assert_relative_eq!(
            circle.constant_speed_duration(omega) / t1,
            15f64.sqrt() / 8.0,
            epsilon = 1e-10
        );
        assert_relative_eq!(
            orange.constant_speed_duration(2.0 * omega),
            t1 / 2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn reparametrize_preserves_functionals() {
        let p = orange_slice(PI / 8.0).unwrap();
        let identity = p.reparametrize(Schedule::uniform(1.0)).unwrap();
        assert_eq!(identity.length(), p.length());
        assert_eq!(
            identity.enclosed_angle().unwrap(),
            p.enclosed_angle().unwrap()
        );
        assert_eq!(identity.total_duration(), p.total_duration());

        let ramped = p.reparametrize(Schedule::sin_squared()).unwrap();
        assert_eq!(ramped.length(), p.length());
        assert_eq!(ramped.enclosed_angle().unwrap(), p.enclosed_angle().unwrap());

        let halved = p.reparametrize(Schedule::uniform(0.5)).unwrap();
        assert_relative_eq!(halved.total_duration(), 0.5, epsilon = 1e-15);
        assert_eq!(halved.length(), p.length());
    }

    #[test]
    fn reparametrize_rejects_non_monotone() {
        let p = orange_slice(PI / 8.0).unwrap();
        assert!(matches!(
            p.reparametrize(Schedule::cubic([1.0, -4.0, 1.0])),
            Err(PathError::NonMonotoneSchedule)
        ));
        assert!(matches!(
            p.reparametrize(Schedule::uniform(0.0)),
            Err(PathError::NonMonotoneSchedule)
        ));
    }

    #[test]
    fn sin_squared_schedule_sweeps_whole_path() {
        let p = orange_slice(PI / 8.0).unwrap();
        let w = p.reparametrize(Schedule::sin_squared()).unwrap();
        let tau = w.total_duration();
        let start = w.sample(0.0);
        let end = w.sample(tau);
        assert!(start.alpha.abs() < 1e-12);
        assert!(end.alpha.abs() < 1e-12);
        // Rates vanish at the ramp endpoints.
        assert!(w.sample(1e-9 * tau).alpha_dot.abs() < 1e-6);
        let mid = w.sample(0.5 * tau);
        assert!(mid.alpha > 0.0);
    }

    #[test]
    fn polygon_excess_octant_triangle() {
        // Three right angles: the classical Girard result pi/2.
        let octant = [
            (0.0, 0.0),
            (PI / 2.0, 0.0),
            (PI / 2.0, PI / 2.0),
        ];
        assert_relative_eq!(polygon_excess(&octant).unwrap(), PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn polygon_excess_three_arc_triangle() {
        let tri = [(0.0, 0.0), (PI / 2.0, 0.0), (PI / 2.0, PI / 4.0)];
        assert_relative_eq!(polygon_excess(&tri).unwrap(), PI / 4.0, epsilon = 1e-12);
        // Half the area is the enclosed angle of the matching path.
        let p = three_arc(PI / 4.0).unwrap();
        assert_relative_eq!(
            p.enclosed_angle().unwrap(),
            polygon_excess(&tri).unwrap() / 2.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn polygon_excess_sliver_vanishes() {
        let mut last = f64::INFINITY;
        for eps in [0.1, 0.01, 0.001] {
            let sliver = [(0.3, 0.0), (1.2, 0.0), (1.2, eps)];
            let area = polygon_excess(&sliver).unwrap();
            assert!(area < last);
            last = area;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn polygon_excess_rejects_bad_input() {
        assert!(matches!(
            polygon_excess(&[(0.0, 0.0), (1.0, 0.0)]),
            Err(PathError::TooFewVertices)
        ));
        let antipodal = [(0.1, 0.0), (PI - 0.1, PI), (1.0, 1.0)];
        assert!(matches!(
            polygon_excess(&antipodal),
            Err(PathError::DegenerateVertices { index: 0 })
        ));
    }

    #[test]
    fn polyline_matches_three_arc_geometry() {
        let p = SpherePath::new(vec![Segment {
            kind: SegmentKind::Polyline {
                vertices: vec![
                    [0.0, 0.0],
                    [PI / 2.0, 0.0],
                    [PI / 2.0, PI / 4.0],
                    [0.0, PI / 4.0],
                ],
            },
            duration: 1.0,
        }])
        .unwrap();
        assert_relative_eq!(p.length(), 5.0 * PI / 4.0, epsilon = 1e-9);
        assert_relative_eq!(p.enclosed_angle().unwrap(), PI / 8.0, epsilon = 1e-9);
    }

    #[test]
    fn path_json_roundtrip() {
        let p = orange_slice(PI / 8.0).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["segments"][0]["kind"], "meridian");
        assert!(value["segments"][0]["params"]["beta"].is_number());
        let back: SpherePath<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back.length(), p.length());
        assert_eq!(
            back.enclosed_angle().unwrap(),
            p.enclosed_angle().unwrap()
        );
    }

    #[test]
    fn junction_discontinuity_rejected() {
        let bad = SpherePath::new(vec![
            Segment {
                kind: SegmentKind::Meridian {
                    beta: 0.0,
                    alpha_start: 0.0,
                    alpha_end: 1.0,
                },
                duration: 0.5,
            },
            Segment {
                kind: SegmentKind::Meridian {
                    beta: 0.0,
                    alpha_start: 1.5,
                    alpha_end: 0.0,
                },
                duration: 0.5,
            },
        ]);
        assert!(matches!(
            bad,
            Err(PathError::DiscontinuousJunction { index: 0, .. })
        ));
    }

    proptest! {
        #[test]
        fn enclosed_angle_invariant_under_random_cubic_schedules(
            db in 0.05f64..6.2,
            c1 in 0.1f64..2.0,
            c2 in 0.0f64..2.0,
            c3 in 0.0f64..2.0,
            scale in 0.2f64..3.0,
        ) {
            let p = orange_slice(db).unwrap();
            let mut schedule = Schedule::cubic([c1, c2, c3]);
            schedule.duration_scale = scale;
            let w = p.reparametrize(schedule).unwrap();
            prop_assert_eq!(w.enclosed_angle().unwrap(), p.enclosed_angle().unwrap());
            prop_assert_eq!(w.length(), p.length());
        }

        #[test]
        fn enclosed_angle_normalized_range(db in 0.01f64..6.27) {
            let p = orange_slice(db).unwrap();
            let angle = p.enclosed_angle().unwrap();
            prop_assert!((0.0..2.0 * PI).contains(&angle));
        }
    }
}

//! Vibration-driven planar locomotion of a folded module.
//!
//! Each module carries two eccentric-rotating-mass motors. A motor spinning
//! at `w` produces an inertial force `m r w^2`; the slip-stick impulse this
//! drives sets the forward speed, while the speed difference between the two
//! motors turns the module. An off-centre mass adds a steady turning bias
//! proportional to distance travelled:
//!
//! ```text
//! v        = k_v (m r w1^2 + m r w2^2)
//! yaw_rate = k_w (w1 - w2) + beta v
//! ```
//!
//! Poses are integrated as a unicycle with explicit Euler steps.

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TRAJECTORY_CSV_HEADER: &str = "t,x_m,y_m,heading_rad";
pub const SCHEDULE_CSV_HEADER: &str = "duty1,duty2,duration_s";

/// Yaw-rate tolerance of [`solve_straight_duty`] (rad/s).
pub const STRAIGHT_YAW_TOL: f64 = 1e-9;

/// Motor and body gains of one module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleBody {
    /// Eccentric mass of each motor (kg).
    pub eccentric_mass: f64,
    /// Eccentric radius of each motor (m).
    pub eccentric_radius: f64,
    /// Motor speed at full duty (rad/s).
    pub omega_max: f64,
    /// Forward speed per newton of inertial force (m/s/N).
    pub speed_gain: f64,
    /// Yaw rate per rad/s of motor speed difference.
    pub yaw_gain: f64,
    /// Turning bias per metre travelled (rad/m).
    pub bias: f64,
}

impl ModuleBody {
    pub fn new(
        eccentric_mass: f64,
        eccentric_radius: f64,
        omega_max: f64,
        speed_gain: f64,
        yaw_gain: f64,
    ) -> Result<Self> {
        let body = ModuleBody {
            eccentric_mass,
            eccentric_radius,
            omega_max,
            speed_gain,
            yaw_gain,
            bias: 0.0,
        };
        body.validate()?;
        Ok(body)
    }

    pub fn with_bias(mut self, bias: f64) -> Result<Self> {
        self.bias = bias;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        positive("eccentric_mass", self.eccentric_mass)?;
        positive("eccentric_radius", self.eccentric_radius)?;
        positive("omega_max", self.omega_max)?;
        positive("speed_gain", self.speed_gain)?;
        if !self.yaw_gain.is_finite() {
            return Err(Error::invalid("yaw_gain", "must be finite"));
        }
        if !self.bias.is_finite() {
            return Err(Error::invalid("bias", "must be finite"));
        }
        Ok(())
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be positive and finite, got {value}"),
        ))
    }
}

fn check_duty(name: &'static str, duty: f64) -> Result<()> {
    if (0.0..=1.0).contains(&duty) {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value: duty,
            min: 0.0,
            max: 1.0,
        })
    }
}

/// Motor speed commanded by a PWM duty fraction.
pub fn duty_to_speed(duty: f64, body: &ModuleBody) -> Result<f64> {
    check_duty("duty", duty)?;
    Ok(duty * body.omega_max)
}

/// Inertial force `m r w^2` of one motor.
pub fn centripetal_force(body: &ModuleBody, omega: f64) -> f64 {
    body.eccentric_mass * body.eccentric_radius * omega * omega
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyRates {
    /// Forward speed (m/s).
    pub speed: f64,
    /// Counter-clockwise turning rate (rad/s).
    pub yaw_rate: f64,
}

impl BodyRates {
    /// Path curvature `yaw_rate / speed`, or `None` when standing still.
    pub fn curvature(&self) -> Option<f64> {
        (self.speed > 0.0).then(|| self.yaw_rate / self.speed)
    }
}

pub fn body_rates(body: &ModuleBody, omega_1: f64, omega_2: f64) -> BodyRates {
    let speed = body.speed_gain * (centripetal_force(body, omega_1) + centripetal_force(body, omega_2));
    let yaw_rate = body.yaw_gain * (omega_1 - omega_2) + body.bias * speed;
    BodyRates { speed, yaw_rate }
}

/// Rates for a pair of duty fractions.
pub fn duty_rates(body: &ModuleBody, duty_1: f64, duty_2: f64) -> Result<BodyRates> {
    check_duty("duty_1", duty_1)?;
    check_duty("duty_2", duty_2)?;
    Ok(body_rates(body, duty_1 * body.omega_max, duty_2 * body.omega_max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    #[serde(rename = "duty1")]
    pub duty_1: f64,
    #[serde(rename = "duty2")]
    pub duty_2: f64,
    #[serde(rename = "duration_s")]
    pub duration: f64,
}

impl Segment {
    pub fn new(duty_1: f64, duty_2: f64, duration: f64) -> Result<Self> {
        let seg = Segment {
            duty_1,
            duty_2,
            duration,
        };
        seg.validate()?;
        Ok(seg)
    }

    fn validate(&self) -> Result<()> {
        check_duty("duty_1", self.duty_1)?;
        check_duty("duty_2", self.duty_2)?;
        positive("duration", self.duration)
    }
}

/// Piecewise-constant motor commands, run in order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DutySchedule {
    pub segments: Vec<Segment>,
}

impl DutySchedule {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        for seg in &segments {
            seg.validate()?;
        }
        Ok(DutySchedule { segments })
    }

    pub fn constant(duty_1: f64, duty_2: f64, duration: f64) -> Result<Self> {
        Ok(DutySchedule {
            segments: vec![Segment::new(duty_1, duty_2, duration)?],
        })
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub t: f64,
    #[serde(rename = "x_m")]
    pub x: f64,
    #[serde(rename = "y_m")]
    pub y: f64,
    #[serde(rename = "heading_rad")]
    pub heading: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Pose>,
    /// Index of the first sample of each schedule segment. Segment `k` spans
    /// `samples[starts[k]..=starts[k + 1]]`, sharing its end pose with the
    /// next segment.
    pub segment_starts: Vec<usize>,
}

impl Trajectory {
    /// Wraps externally recorded poses as a single segment.
    pub fn new(samples: Vec<Pose>) -> Result<Self> {
        for (k, p) in samples.iter().enumerate() {
            if ![p.t, p.x, p.y, p.heading].iter().all(|v| v.is_finite()) {
                return Err(Error::Parse(format!("sample {k} is not finite")));
            }
            if k > 0 && p.t <= samples[k - 1].t {
                return Err(Error::Parse(format!("time is not strictly increasing at sample {k}")));
            }
        }
        let segment_starts = if samples.is_empty() { vec![] } else { vec![0] };
        Ok(Trajectory {
            samples,
            segment_starts,
        })
    }

    pub fn final_pose(&self) -> Option<&Pose> {
        self.samples.last()
    }

    /// Poses of segment `k`, including its end pose.
    pub fn segment(&self, k: usize) -> &[Pose] {
        let start = self.segment_starts[k];
        let end = self
            .segment_starts
            .get(k + 1)
            .map_or(self.samples.len(), |&next| next + 1);
        &self.samples[start..end]
    }

    pub fn segment_count(&self) -> usize {
        self.segment_starts.len()
    }

    pub fn path_length(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| (w[1].x - w[0].x).hypot(w[1].y - w[0].y))
            .sum()
    }
}

/// Seeded Gaussian disturbance added to the heading at every step. The
/// per-step standard deviation is `sigma * sqrt(dt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadingNoise {
    /// Heading diffusion (rad/sqrt(s)).
    pub sigma: f64,
    pub seed: u64,
}

/// Integrates `schedule` from the origin, facing +x.
pub fn simulate(body: &ModuleBody, schedule: &DutySchedule, dt: f64) -> Result<Trajectory> {
    simulate_with_noise(body, schedule, dt, None)
}

pub fn simulate_with_noise(
    body: &ModuleBody,
    schedule: &DutySchedule,
    dt: f64,
    noise: Option<HeadingNoise>,
) -> Result<Trajectory> {
    body.validate()?;
    positive("dt", dt)?;
    let mut jitter = match noise {
        Some(n) => {
            if !(n.sigma >= 0.0 && n.sigma.is_finite()) {
                return Err(Error::invalid("sigma", "must be non-negative and finite"));
            }
            let normal = Normal::new(0.0, n.sigma * dt.sqrt()).expect("sigma checked");
            Some((normal, ChaCha8Rng::seed_from_u64(n.seed)))
        }
        None => None,
    };

    let mut pose = Pose {
        t: 0.0,
        x: 0.0,
        y: 0.0,
        heading: 0.0,
    };
    let mut samples = vec![pose];
    let mut segment_starts = Vec::with_capacity(schedule.segments.len());
    let mut seg_t0 = 0.0;
    for seg in &schedule.segments {
        seg.validate()?;
        let rates = duty_rates(body, seg.duty_1, seg.duty_2)?;
        segment_starts.push(samples.len() - 1);
        // Whole steps of dt, then one short step to land on the segment end.
        let whole = (seg.duration / dt * (1.0 + 1e-12)).floor() as usize;
        let mut steps = vec![dt; whole];
        let rest = seg.duration - whole as f64 * dt;
        if rest > 1e-12 * seg.duration {
            steps.push(rest);
        }
        for (k, h) in steps.into_iter().enumerate() {
            let (sin, cos) = pose.heading.sin_cos();
            pose.x += rates.speed * cos * h;
            pose.y += rates.speed * sin * h;
            pose.heading += rates.yaw_rate * h;
            if let Some((normal, rng)) = jitter.as_mut() {
                pose.heading += normal.sample(rng) * (h / dt).sqrt();
            }
            pose.t = seg_t0 + if k < whole { (k + 1) as f64 * dt } else { seg.duration };
            samples.push(pose);
        }
        seg_t0 += seg.duration;
    }
    Ok(Trajectory {
        samples,
        segment_starts,
    })
}

/// Signed curvature of the least-squares circle through the poses.
///
/// Uses the algebraic (Kåsa) fit in centred coordinates. Positive curvature
/// means a counter-clockwise (left) turn. Collinear or coincident poses give
/// zero.
pub fn fit_curvature(samples: &[Pose]) -> Result<f64> {
    let n = samples.len();
    if n < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: n });
    }
    let nf = n as f64;
    let (mx, my) = samples
        .iter()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x / nf, sy + p.y / nf));
    let (mut suu, mut svv, mut suv, mut suuu, mut svvv, mut suvv, mut svuu) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for p in samples {
        let (u, v) = (p.x - mx, p.y - my);
        suu += u * u;
        svv += v * v;
        suv += u * v;
        suuu += u * u * u;
        svvv += v * v * v;
        suvv += u * v * v;
        svuu += v * u * u;
    }
    let spread = suu + svv;
    let det = suu * svv - suv * suv;
    if spread == 0.0 || det <= 1e-14 * spread * spread {
        return Ok(0.0);
    }
    let bu = 0.5 * (suuu + suvv);
    let bv = 0.5 * (svvv + svuu);
    let uc = (bu * svv - bv * suv) / det;
    let vc = (bv * suu - bu * suv) / det;
    let radius = (uc * uc + vc * vc + spread / nf).sqrt();

    // Turning direction: angular momentum of the motion about the centre.
    let (cx, cy) = (uc + mx, vc + my);
    let turn: f64 = samples
        .windows(2)
        .map(|w| (w[0].x - cx) * (w[1].y - w[0].y) - (w[0].y - cy) * (w[1].x - w[0].x))
        .sum();
    Ok(if turn < 0.0 { -1.0 / radius } else { 1.0 / radius })
}

/// Fitted curvature of each schedule segment. Segments too short to fit
/// report an error in their slot.
pub fn segment_curvatures(traj: &Trajectory) -> Vec<Result<f64>> {
    (0..traj.segment_count())
        .map(|k| fit_curvature(traj.segment(k)))
        .collect()
}

/// Duty for the second motor that cancels the turning bias while the first
/// runs at `duty_1`. Bisects on `[0, duty_1]`; `None` when the yaw rate does
/// not change sign on that interval.
pub fn solve_straight_duty(body: &ModuleBody, duty_1: f64) -> Result<Option<f64>> {
    if !(duty_1 > 0.0 && duty_1 <= 1.0) {
        return Err(Error::Domain {
            name: "duty_1",
            value: duty_1,
            min: 0.0,
            max: 1.0,
        });
    }
    let omega_1 = duty_1 * body.omega_max;
    let yaw = |d: f64| body_rates(body, omega_1, d * body.omega_max).yaw_rate;

    let (mut lo, mut hi) = (0.0, duty_1);
    let (mut f_lo, f_hi) = (yaw(lo), yaw(hi));
    if f_hi.abs() <= STRAIGHT_YAW_TOL {
        return Ok(Some(hi));
    }
    if f_lo.abs() <= STRAIGHT_YAW_TOL {
        return Ok(Some(lo));
    }
    if f_lo.signum() == f_hi.signum() {
        return Ok(None);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = yaw(mid);
        if f_mid.abs() <= STRAIGHT_YAW_TOL || mid <= lo || mid >= hi {
            return Ok(Some(mid));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Turning bias under which `(duty_fixed, duty_reduced)` drives straight.
pub fn calibrate_bias(body: &ModuleBody, duty_fixed: f64, duty_reduced: f64) -> Result<f64> {
    let rates = duty_rates(
        &ModuleBody {
            bias: 0.0,
            ..body.clone()
        },
        duty_fixed,
        duty_reduced,
    )?;
    if rates.speed <= 0.0 {
        return Err(Error::Degenerate("module does not move at this duty pair".into()));
    }
    Ok(-rates.yaw_rate / rates.speed)
}

pub fn write_trajectory<W: Write>(traj: &Trajectory, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in &traj.samples {
        w.serialize(p)?;
    }
    if traj.samples.is_empty() {
        w.write_record(TRAJECTORY_CSV_HEADER.split(','))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trajectory<R: Read>(input: R) -> Result<Trajectory> {
    let mut r = csv::Reader::from_reader(input);
    expect_header(&mut r, TRAJECTORY_CSV_HEADER)?;
    let samples = r.deserialize().collect::<std::result::Result<Vec<Pose>, _>>()?;
    Trajectory::new(samples)
}

pub fn write_schedule<W: Write>(schedule: &DutySchedule, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in &schedule.segments {
        w.serialize(s)?;
    }
    if schedule.segments.is_empty() {
        w.write_record(SCHEDULE_CSV_HEADER.split(','))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_schedule<R: Read>(input: R) -> Result<DutySchedule> {
    let mut r = csv::Reader::from_reader(input);
    expect_header(&mut r, SCHEDULE_CSV_HEADER)?;
    let mut segments = Vec::new();
    for (k, row) in r.deserialize::<Segment>().enumerate() {
        let seg = row?;
        seg.validate()
            .map_err(|e| Error::Parse(format!("schedule row {}: {e}", k + 1)))?;
        segments.push(seg);
    }
    Ok(DutySchedule { segments })
}

pub(crate) fn expect_header<R: Read>(r: &mut csv::Reader<R>, expected: &str) -> Result<()> {
    let found = r.headers()?.iter().map(str::trim).collect::<Vec<_>>().join(",");
    if found != expected {
        return Err(Error::Parse(format!("expected header `{expected}`, found `{found}`")));
    }
    Ok(())
}

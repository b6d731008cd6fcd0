//! Hinge/band moment balance and its equilibrium fold angle.
//!
//! A joint is two faces connected by a thinned hinge strip. An elastic band
//! looped over one hook on each face pulls the faces together; the hinge
//! resists as a linear torsional spring that is unstrained when flat.
//!
//! The fold angle `alpha` is the interior angle between the two faces:
//! `alpha = PI` is flat, smaller values are more folded. With hook spacing
//! `L` (measured across the hinge in the flat state) the moments are
//!
//! ```text
//! D(a)   = L sin(a/2)                       hook-to-hook distance
//! L0     = gamma * PI * d / 2               band rest length between hooks
//! F_b(a) = max(0, 2 k_b (D(a) - L0))        band tension (bands cannot push)
//! M_b(a) = F_b(a) (L/2) cos(a/2)            band closing moment
//! k_h    = E W t^3 / (12 L_hinge)           hinge torsional stiffness
//! M_h(a) = k_h (PI - a)                     hinge opening moment
//! ```
//!
//! and the equilibrium angle balances `M_b = M_h`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Young's modulus assumed for conductive PLA when none is given (Pa).
pub const DEFAULT_YOUNG_MODULUS: f64 = 2.0e9;
/// Printed layer height assumed when hinge thickness is given in layers (m).
pub const DEFAULT_LAYER_HEIGHT: f64 = 0.2e-3;
/// Fraction of the half circumference that a looped band spans between hooks.
pub const DEFAULT_GAMMA: f64 = 0.9;

/// Geometry and material of a printed hinge strip.
#[derive(Debug, Clone, PartialEq)]
pub struct HingeSpec {
    /// Strip thickness `t` (m).
    pub thickness: f64,
    /// Strip width `W` along the fold line (m).
    pub width: f64,
    /// Strip length `L_hinge` across the fold line (m).
    pub length: f64,
    /// Young's modulus `E` (Pa).
    pub young_modulus: f64,
    /// Number of printed layers, when the thickness was derived from them.
    pub layers: Option<u32>,
    /// Layer height used with `layers` (m).
    pub layer_height: f64,
}

impl HingeSpec {
    pub fn new(thickness: f64, width: f64, length: f64) -> Result<Self> {
        let hinge = HingeSpec {
            thickness,
            width,
            length,
            young_modulus: DEFAULT_YOUNG_MODULUS,
            layers: None,
            layer_height: DEFAULT_LAYER_HEIGHT,
        };
        hinge.validate()?;
        Ok(hinge)
    }

    /// A hinge printed with `layers` layers of [`DEFAULT_LAYER_HEIGHT`].
    pub fn layered(layers: u32, width: f64, length: f64) -> Result<Self> {
        Self::with_layers(layers, DEFAULT_LAYER_HEIGHT, width, length)
    }

    pub fn with_layers(layers: u32, layer_height: f64, width: f64, length: f64) -> Result<Self> {
        if layers == 0 {
            return Err(Error::invalid("layers", "must be a positive integer"));
        }
        let hinge = HingeSpec {
            thickness: f64::from(layers) * layer_height,
            width,
            length,
            young_modulus: DEFAULT_YOUNG_MODULUS,
            layers: Some(layers),
            layer_height,
        };
        hinge.validate()?;
        Ok(hinge)
    }

    pub fn with_young_modulus(mut self, young_modulus: f64) -> Result<Self> {
        self.young_modulus = young_modulus;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        positive("thickness", self.thickness)?;
        positive("width", self.width)?;
        positive("hinge_length", self.length)?;
        positive("young_modulus", self.young_modulus)?;
        if let Some(layers) = self.layers {
            if layers == 0 {
                return Err(Error::invalid("layers", "must be a positive integer"));
            }
            positive("layer_height", self.layer_height)?;
            let expected = f64::from(layers) * self.layer_height;
            if (self.thickness - expected).abs() > 1e-12 * expected.max(1.0) {
                return Err(Error::invalid(
                    "thickness",
                    format!(
                        "{} m does not equal {layers} layers x {} m",
                        self.thickness, self.layer_height
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn stiffness(&self) -> f64 {
        hinge_stiffness(self)
    }
}

/// An elastic band looped over two hooks.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSpec {
    pub label: String,
    /// Relaxed inner diameter `d` of the loop (m).
    pub inner_diameter: f64,
    /// Stiffness `k_b` of each of the two band strands (N/m).
    pub stiffness: f64,
    /// Hook-wrap correction `gamma` in (0, 1].
    pub gamma: f64,
}

impl BandSpec {
    pub fn new(label: impl Into<String>, inner_diameter: f64, stiffness: f64) -> Result<Self> {
        let band = BandSpec {
            label: label.into(),
            inner_diameter,
            stiffness,
            gamma: DEFAULT_GAMMA,
        };
        band.validate()?;
        Ok(band)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        positive("inner_diameter", self.inner_diameter)?;
        if !(self.stiffness >= 0.0 && self.stiffness.is_finite()) {
            return Err(Error::invalid(
                "band_stiffness",
                format!("{} must be finite and >= 0", self.stiffness),
            ));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::invalid("gamma", format!("{} is outside (0, 1]", self.gamma)));
        }
        Ok(())
    }

    pub fn rest_length(&self) -> f64 {
        band_rest_length(self)
    }
}

/// One hinge, one band and the spacing of the hooks that hold the band.
#[derive(Debug, Clone, PartialEq)]
pub struct JointConfig {
    pub hinge: HingeSpec,
    pub band: BandSpec,
    /// Hook spacing `L` in the flat state (m).
    pub hook_spacing: f64,
    /// Mechanical stop that keeps the joint from folding below this angle.
    pub stop_angle: Option<f64>,
}

impl JointConfig {
    pub fn new(hinge: HingeSpec, band: BandSpec, hook_spacing: f64) -> Result<Self> {
        let joint = JointConfig {
            hinge,
            band,
            hook_spacing,
            stop_angle: None,
        };
        joint.validate()?;
        Ok(joint)
    }

    pub fn with_stop(mut self, stop_angle: f64) -> Result<Self> {
        self.stop_angle = Some(stop_angle);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.hinge.validate()?;
        self.band.validate()?;
        positive("hook_spacing", self.hook_spacing)?;
        if let Some(stop) = self.stop_angle {
            if !(stop > 0.0 && stop < PI) {
                return Err(Error::invalid("stop_angle", format!("{stop} rad is outside (0, pi)")));
            }
        }
        Ok(())
    }

    /// Angle below which the band goes slack, `2 asin(L0 / L)`, or `PI` when
    /// the band is slack even in the flat state.
    pub fn slack_onset(&self) -> f64 {
        let ratio = self.band.rest_length() / self.hook_spacing;
        if ratio >= 1.0 {
            PI
        } else {
            2.0 * ratio.asin()
        }
    }
}

/// Equilibrium state of a joint released from flat.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldSolution {
    /// Equilibrium fold angle (rad), in (0, PI].
    pub alpha: f64,
    pub band_slack: bool,
    pub stop_limited: bool,
    pub stable: bool,
    /// Net closing moment `M_b - M_h` at `alpha` (N m).
    pub residual_moment: f64,
}

/// Tolerances of [`solve_equilibrium_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Offset from flat at which folding onset is probed (rad).
    pub flat_offset: f64,
    /// Largest step of the descending bracket search (rad).
    pub grid_step: f64,
    /// Bracket width at which bisection may stop (rad).
    pub angle_tol: f64,
    /// Residual moment at which bisection may stop (N m).
    pub residual_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            flat_offset: 1e-6,
            grid_step: 0.005,
            angle_tol: 1e-9,
            residual_tol: 1e-12,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        positive("flat_offset", self.flat_offset)?;
        positive("grid_step", self.grid_step)?;
        positive("angle_tol", self.angle_tol)?;
        positive("residual_tol", self.residual_tol)?;
        if self.flat_offset >= PI / 2.0 {
            return Err(Error::invalid("flat_offset", "must be well below pi/2"));
        }
        Ok(())
    }
}

/// Finite-difference step used by [`stability_check`] (rad).
pub const STABILITY_STEP: f64 = 1e-6;

/// Hook-to-hook distance `L sin(alpha/2)`.
pub fn hook_distance(hook_spacing: f64, alpha: f64) -> Result<f64> {
    check_angle(alpha)?;
    Ok(hook_spacing * (alpha / 2.0).sin())
}

/// Relaxed band length between the hooks, `gamma PI d / 2`.
pub fn band_rest_length(band: &BandSpec) -> f64 {
    band.gamma * PI * band.inner_diameter / 2.0
}

/// Band stretch `D(alpha) - L0`; negative when the band is slack.
pub fn band_extension(joint: &JointConfig, alpha: f64) -> f64 {
    Balance::new(joint).extension(alpha)
}

/// Band tension `2 k_b` times the stretch, clamped at zero.
pub fn band_force(joint: &JointConfig, alpha: f64) -> f64 {
    Balance::new(joint).band_force(alpha)
}

/// Closing moment of the band about the hinge.
pub fn band_moment(joint: &JointConfig, alpha: f64) -> f64 {
    Balance::new(joint).band_moment(alpha)
}

/// Euler-Bernoulli torsional stiffness of the hinge strip (N m / rad).
pub fn hinge_stiffness(hinge: &HingeSpec) -> f64 {
    hinge.young_modulus * hinge.width * hinge.thickness.powi(3) / (12.0 * hinge.length)
}

/// Restoring moment of the hinge toward flat.
pub fn hinge_moment(hinge: &HingeSpec, alpha: f64) -> f64 {
    hinge_stiffness(hinge) * (PI - alpha)
}

/// Net moment `M_b - M_h`; positive values fold the joint further closed.
pub fn net_closing_moment(joint: &JointConfig, alpha: f64) -> f64 {
    Balance::new(joint).closing(alpha)
}

/// Whether `alpha` is a stable balance of the joint.
///
/// Interior angles are stable when the closing moment rises through zero
/// with increasing angle. At `alpha = PI` the flat state is stable when the
/// joint does not start folding, i.e. the closing moment just below flat is
/// not positive.
pub fn stability_check(joint: &JointConfig, alpha: f64) -> bool {
    let balance = Balance::new(joint);
    let h = STABILITY_STEP;
    if alpha >= PI - h {
        return balance.closing(PI - h) <= 0.0;
    }
    balance.closing(alpha + h) > 0.0 && 0.0 > balance.closing(alpha - h)
}

/// Equilibrium fold angle of a joint released from the flat state.
pub fn solve_equilibrium(joint: &JointConfig) -> Result<FoldSolution> {
    solve_equilibrium_with(joint, &SolverOptions::default())
}

/// [`solve_equilibrium`] with explicit tolerances.
///
/// The sheet starts flat, so the relevant root is the first stable balance
/// reached while folding down from `PI`: the descent stops at the first
/// grid angle where the closing moment is no longer positive and bisects
/// that bracket. If the joint does not start folding the flat state is
/// returned. A mechanical stop above the root clamps the result.
pub fn solve_equilibrium_with(joint: &JointConfig, opts: &SolverOptions) -> Result<FoldSolution> {
    joint.validate()?;
    opts.validate()?;
    let balance = Balance::new(joint);

    let top = PI - opts.flat_offset;
    let g_top = balance.closing(top);
    if !g_top.is_finite() {
        return Err(Error::SolverFailure(format!("closing moment is {g_top} near flat")));
    }
    if g_top <= 0.0 {
        return Ok(FoldSolution {
            alpha: PI,
            band_slack: balance.extension(PI) <= 0.0,
            stop_limited: false,
            stable: true,
            residual_moment: balance.closing(PI),
        });
    }

    let bottom = opts.flat_offset;
    let steps = ((top - bottom) / opts.grid_step).ceil() as usize;
    let step = (top - bottom) / steps as f64;
    let mut bracket = None;
    let mut hi = (top, g_top);
    for k in 1..=steps {
        let a = if k == steps { bottom } else { top - k as f64 * step };
        let g = balance.closing(a);
        if g.is_nan() {
            return Err(Error::SolverFailure(format!("closing moment is NaN at {a} rad")));
        }
        if g <= 0.0 {
            bracket = Some(((a, g), hi));
            break;
        }
        hi = (a, g);
    }
    let Some((lo, hi)) = bracket else {
        return Err(Error::SolverFailure(format!(
            "closing moment stays positive on ({bottom}, {top}) rad"
        )));
    };

    let (alpha, residual) = bisect(&balance, lo, hi, opts);

    let solution = match joint.stop_angle {
        Some(stop) if alpha < stop => FoldSolution {
            alpha: stop,
            band_slack: balance.extension(stop) <= 0.0,
            stop_limited: true,
            stable: true,
            residual_moment: balance.closing(stop),
        },
        _ => FoldSolution {
            alpha,
            band_slack: balance.extension(alpha) <= 0.0,
            stop_limited: false,
            stable: true,
            residual_moment: residual,
        },
    };
    Ok(solution)
}

/// Bisects a bracket with `g(lo) <= 0 < g(hi)`. Returns the endpoint with
/// the smaller residual, preferring `lo` on ties.
fn bisect(balance: &Balance, mut lo: (f64, f64), mut hi: (f64, f64), opts: &SolverOptions) -> (f64, f64) {
    // Narrow to the angular tolerance first, then keep going until the
    // residual is also met or the bracket cannot be split any further.
    loop {
        let best = if hi.1.abs() < lo.1.abs() { hi } else { lo };
        if hi.0 - lo.0 <= opts.angle_tol && best.1.abs() <= opts.residual_tol {
            return best;
        }
        let mid = lo.0 + 0.5 * (hi.0 - lo.0);
        if mid <= lo.0 || mid >= hi.0 {
            return best;
        }
        let g = balance.closing(mid);
        if g <= 0.0 {
            lo = (mid, g);
        } else {
            hi = (mid, g);
        }
    }
}

/// Joint parameters reduced to the four numbers the moment balance uses.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Balance {
    hook_spacing: f64,
    rest_length: f64,
    band_stiffness: f64,
    hinge_stiffness: f64,
}

impl Balance {
    pub(crate) fn new(joint: &JointConfig) -> Self {
        Balance {
            hook_spacing: joint.hook_spacing,
            rest_length: band_rest_length(&joint.band),
            band_stiffness: joint.band.stiffness,
            hinge_stiffness: hinge_stiffness(&joint.hinge),
        }
    }

    fn extension(&self, alpha: f64) -> f64 {
        self.hook_spacing * (alpha / 2.0).sin() - self.rest_length
    }

    fn band_force(&self, alpha: f64) -> f64 {
        (2.0 * self.band_stiffness * self.extension(alpha)).max(0.0)
    }

    fn band_moment(&self, alpha: f64) -> f64 {
        // cos(a/2) written so that it is exactly zero when flat.
        self.band_force(alpha) * (self.hook_spacing / 2.0) * ((PI - alpha) / 2.0).sin()
    }

    pub(crate) fn closing(&self, alpha: f64) -> f64 {
        self.band_moment(alpha) - self.hinge_stiffness * (PI - alpha)
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{value} must be finite and > 0")))
    }
}

fn check_angle(alpha: f64) -> Result<()> {
    if (0.0..=PI).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "alpha",
            value: alpha,
            min: 0.0,
            max: PI,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    const MM: f64 = 1e-3;

    fn yellow(kb: f64) -> BandSpec {
        BandSpec::new("yellow", 12.0 * MM, kb).unwrap()
    }

    fn reference_hinge() -> HingeSpec {
        HingeSpec::new(0.4 * MM, 30.0 * MM, 2.0 * MM).unwrap()
    }

    fn joint(hinge: HingeSpec, kb: f64) -> JointConfig {
        JointConfig::new(hinge, yellow(kb), 30.0 * MM).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn hook_distance_examples() {
        close(hook_distance(30.0 * MM, PI).unwrap(), 30.0 * MM, 1e-15);
        assert_eq!(hook_distance(30.0 * MM, 0.0).unwrap(), 0.0);
        let d = hook_distance(30.0 * MM, FRAC_PI_2).unwrap();
        close(d, 30.0 * MM * 2f64.sqrt() / 2.0, 1e-15);
        close(d / MM, 21.2132, 1e-4);
    }

    #[test]
    fn hook_distance_rejects_angles_outside_range() {
        assert!(matches!(
            hook_distance(0.03, -0.1),
            Err(Error::Domain { name: "alpha", .. })
        ));
        assert!(hook_distance(0.03, PI + 1e-9).is_err());
    }

    #[test]
    fn rest_length_examples() {
        close(band_rest_length(&yellow(1.0)) / MM, 16.9646, 1e-4);
        let black = BandSpec::new("black", 25.0 * MM, 1.0).unwrap().with_gamma(1.0).unwrap();
        close(band_rest_length(&black) / MM, 39.2699, 1e-4);
        assert!(BandSpec::new("none", 0.0, 1.0).is_err());
    }

    #[test]
    fn band_extension_force_and_moment() {
        let j = joint(reference_hinge(), 100.0);
        close(band_extension(&j, PI) / MM, 13.0354, 1e-4);
        close(band_extension(&j, FRAC_PI_2) / MM, 4.2486, 1e-4);
        let onset = 2.0 * (band_rest_length(&j.band) / j.hook_spacing).asin();
        close(onset, 1.2021, 1e-4);
        close(band_extension(&j, onset), 0.0, 1e-15);
        close(band_force(&j, FRAC_PI_2), 0.84972, 1e-5);
        close(band_moment(&j, FRAC_PI_2), 9.013e-3, 1e-6);
        assert_eq!(band_force(&j, 1.0), 0.0);
        assert_eq!(band_moment(&j, 1.0), 0.0);
        let slack = joint(reference_hinge(), 0.0);
        assert!((0..=100).all(|i| band_force(&slack, PI * i as f64 / 100.0) == 0.0));
    }

    #[test]
    fn hinge_examples() {
        let h = reference_hinge();
        close(hinge_stiffness(&h), 0.16, 1e-12);
        close(hinge_moment(&h, FRAC_PI_2), 0.25133, 1e-5);
        assert_eq!(hinge_moment(&h, PI), 0.0);
        close(hinge_moment(&h, 0.0), hinge_stiffness(&h) * PI, 1e-15);

        let thick = HingeSpec::new(0.8 * MM, 30.0 * MM, 2.0 * MM).unwrap();
        close(hinge_stiffness(&thick) / hinge_stiffness(&h), 8.0, 1e-12);
        let long = HingeSpec::new(0.4 * MM, 30.0 * MM, 4.0 * MM).unwrap();
        close(hinge_stiffness(&h) / hinge_stiffness(&long), 2.0, 1e-12);
    }

    #[test]
    fn layered_hinges() {
        let h = HingeSpec::layered(3, 10.0 * MM, 5.0 * MM).unwrap();
        close(h.thickness, 0.6 * MM, 1e-15);
        assert_eq!(h.layers, Some(3));
        match HingeSpec::layered(0, 10.0 * MM, 5.0 * MM) {
            Err(Error::InvalidParameter { name, .. }) => assert_eq!(name, "layers"),
            other => panic!("{other:?}"),
        }
        let mut bad = h.clone();
        bad.thickness = 0.5 * MM;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn closing_moment_examples() {
        let j = joint(reference_hinge(), 100.0);
        close(net_closing_moment(&j, PI), 0.0, 1e-17);
        let no_band = joint(reference_hinge(), 0.0);
        close(
            net_closing_moment(&no_band, 1.0),
            -hinge_moment(&no_band.hinge, 1.0),
            0.0,
        );
        assert!(net_closing_moment(&no_band, 1.0) < 0.0);
    }

    #[test]
    fn zero_band_stays_flat() {
        let s = solve_equilibrium(&joint(reference_hinge(), 0.0)).unwrap();
        assert_eq!(s.alpha, PI);
        assert!(s.stable && !s.stop_limited);
    }

    #[test]
    fn stiff_hinge_weak_band_stays_flat() {
        // Onset needs F_b(PI) L / 4 > k_h: 2*100*0.013*0.0075 = 0.0196 < 0.16.
        let s = solve_equilibrium(&joint(reference_hinge(), 100.0)).unwrap();
        assert_eq!(s.alpha, PI);
        assert!(s.stable);
        assert!(!s.band_slack);
    }

    #[test]
    fn vanishing_hinge_folds_to_slack_onset() {
        // E is tiny enough that k_h underflows the balance.
        let mut hinge = reference_hinge();
        hinge.young_modulus = f64::MIN_POSITIVE;
        let j = joint(hinge, 100.0);
        let s = solve_equilibrium(&j).unwrap();
        let onset = 2.0 * (band_rest_length(&j.band) / j.hook_spacing).asin();
        close(s.alpha, onset, 1e-9);
        close(s.alpha.to_degrees(), 68.87, 5e-3);
        assert!(s.band_slack);
    }

    #[test]
    fn solver_root_is_balanced_and_stable() {
        let hinge = HingeSpec::layered(2, 10.0 * MM, 5.0 * MM).unwrap();
        let j = JointConfig::new(hinge, yellow(120.0), 40.0 * MM).unwrap();
        let s = solve_equilibrium(&j).unwrap();
        assert!(s.alpha > 0.5 && s.alpha < 3.0);
        assert!(s.residual_moment.abs() <= 1e-12);
        assert!(stability_check(&j, s.alpha));
        assert!(!s.band_slack);
    }

    #[test]
    fn stop_clamps_only_when_above_root() {
        let hinge = HingeSpec::layered(2, 10.0 * MM, 5.0 * MM).unwrap();
        let j = JointConfig::new(hinge, yellow(120.0), 40.0 * MM).unwrap();
        let free = solve_equilibrium(&j).unwrap();

        let above = j.clone().with_stop(free.alpha + 0.2).unwrap();
        let s = solve_equilibrium(&above).unwrap();
        assert_eq!(s.alpha, free.alpha + 0.2);
        assert!(s.stop_limited);
        assert!(s.residual_moment > 0.0);

        let below = j.with_stop(free.alpha - 0.2).unwrap();
        assert_eq!(solve_equilibrium(&below).unwrap(), free);
    }

    #[test]
    fn stop_outside_open_interval_rejected() {
        let j = joint(reference_hinge(), 1.0);
        assert!(j.clone().with_stop(PI).is_err());
        assert!(j.with_stop(0.0).is_err());
    }

    #[test]
    fn stability_at_flat() {
        let strong = JointConfig::new(
            HingeSpec::layered(1, 10.0 * MM, 5.0 * MM).unwrap(),
            yellow(500.0),
            40.0 * MM,
        )
        .unwrap();
        assert!(net_closing_moment(&strong, PI - 1e-6) > 0.0);
        assert!(!stability_check(&strong, PI));
        assert!(stability_check(&joint(reference_hinge(), 0.0), PI));
    }

    #[test]
    fn nan_inputs_are_rejected() {
        let mut j = joint(reference_hinge(), 100.0);
        j.band.stiffness = f64::NAN;
        assert!(solve_equilibrium(&j).is_err());
    }
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use foldkit::design::{inverse_design, sweep, write_map, DesignQuery};
use foldkit::locomotion::{
    read_schedule, segment_curvatures, simulate_with_noise, solve_straight_duty, write_trajectory, HeadingNoise,
};
use foldkit::model::solve_equilibrium_with;
use foldkit::net::{canonical_net, fold_net, net_to_json, predict_fold, read_net, HingeDrive, NetSpec};
use foldkit::polyhedron::{polyhedron_targets, Polyhedron};
use foldkit::sensing::{
    classify, read_log, snr, synth_stream, tap_spans, write_events, write_log, ChannelKind, ClassifierConfig, Gaussian,
    StateSpan, StateStats, DEFAULT_BASELINE_WINDOW, DEFAULT_DEBOUNCE_GAP, DEFAULT_HALL_THRESHOLD, DEFAULT_MIN_ACTIVE,
    DEFAULT_TOUCH_THRESHOLD,
};

use crate::args::{is_stdout, mm, BodyArgs, GridArgs, JointArgs};
use crate::config::ToolConfig;
use crate::error::CliError;
use crate::output::outln;

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the equilibrium fold angle of one joint
    Solve(SolveArgs),
    /// Sweep a grid of bands, hinges and hook spacings into a CSV design map
    Map(MapArgs),
    /// Pick the grid configuration closest to a target fold angle
    Design(DesignArgs),
    /// Fold a net and report its closure error
    Fold(FoldArgs),
    /// Write the canonical net of a polyhedron
    Net(NetArgs),
    /// Simulate module locomotion under a duty schedule
    Sim(SimArgs),
    /// Find the second-motor duty that cancels the turning bias
    Straight(StraightArgs),
    /// Classify a Hall or touch sensor log into events
    Classify(ClassifyArgs),
    /// Generate a seeded synthetic sensor log
    Synth(SynthArgs),
}

impl Command {
    pub fn run(&self, config: &ToolConfig) -> Result<(), CliError> {
        match self {
            Command::Solve(a) => solve(a, config),
            Command::Map(a) => map(a, config),
            Command::Design(a) => design(a, config),
            Command::Fold(a) => fold(a, config),
            Command::Net(a) => net(a, config),
            Command::Sim(a) => sim(a, config),
            Command::Straight(a) => straight(a, config),
            Command::Classify(a) => classify_cmd(a),
            Command::Synth(a) => synth(a),
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

/// Runs `write` against the file at `path`, or stdout.
fn emit(path: &Option<PathBuf>, write: impl FnOnce(&mut dyn Write) -> foldkit::Result<()>) -> Result<(), CliError> {
    if is_stdout(path) {
        let stdout = io::stdout();
        let mut lock = stdout.lock();
        match write(&mut lock) {
            Err(foldkit::Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => std::process::exit(0),
            Err(foldkit::Error::Csv(e)) if matches!(e.kind(), csv::ErrorKind::Io(io) if io.kind() == io::ErrorKind::BrokenPipe) => {
                std::process::exit(0)
            }
            other => other.map_err(|e| CliError::at("<stdout>", e)),
        }
    } else {
        let path = path.as_ref().expect("checked above");
        let mut out = create(path)?;
        write(&mut out).map_err(|e| CliError::at(path, e))?;
        out.flush().map_err(|e| CliError::io(path, e))
    }
}

/// Prints summary lines to stdout, or to stderr when stdout carries data.
fn report(data_on_stdout: bool, line: &str) {
    if data_on_stdout {
        eprintln!("{line}");
    } else {
        outln!("{line}");
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub joint: JointArgs,
}

fn solve(args: &SolveArgs, config: &ToolConfig) -> Result<(), CliError> {
    let joint = args.joint.build(config)?;
    let fold = solve_equilibrium_with(&joint, &config.solver_options()?)?;
    let d = config.output.decimals;
    outln!("alpha_deg={:.d$}", fold.alpha.to_degrees());
    outln!("alpha_rad={}", fold.alpha);
    outln!("band_slack={}", fold.band_slack);
    outln!("stop_limited={}", fold.stop_limited);
    outln!("stable={}", fold.stable);
    outln!("residual_moment_nm={:e}", fold.residual_moment);
    Ok(())
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Output CSV (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn map(args: &MapArgs, config: &ToolConfig) -> Result<(), CliError> {
    let grid = args.grid.build(config)?;
    let map = sweep(&grid)?;
    emit(&args.out, |w| write_map(&map, w))?;
    report(is_stdout(&args.out), &format!("rows={}", map.len()));
    Ok(())
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("target").required(true).multiple(true).args(["target_deg", "polyhedron"]))]
pub struct DesignArgs {
    /// Target fold angle
    #[arg(long, value_name = "DEG")]
    pub target_deg: Option<f64>,
    /// Use the dihedral angles of a polyhedron as targets; an explicit
    /// --target-deg takes precedence
    #[arg(long)]
    pub polyhedron: Option<Polyhedron>,
    /// Accepted deviation from each target
    #[arg(long, value_name = "DEG", default_value_t = 2.0)]
    pub tol_deg: f64,
    #[command(flatten)]
    pub grid: GridArgs,
}

fn design(args: &DesignArgs, config: &ToolConfig) -> Result<(), CliError> {
    let targets = match (args.target_deg, args.polyhedron) {
        (Some(t), _) => vec![t.to_radians()],
        (None, Some(shape)) => polyhedron_targets(shape),
        (None, None) => unreachable!("clap requires one target"),
    };
    let grid = args.grid.build(config)?;
    let d = config.output.decimals;
    let mut misses = Vec::new();
    for (k, &target) in targets.iter().enumerate() {
        let result = inverse_design(&DesignQuery {
            target_angle: target,
            tolerance: args.tol_deg.to_radians(),
            candidates: grid.clone(),
        })?;
        if k > 0 {
            outln!();
        }
        let c = &result.config;
        outln!("target_deg={:.d$}", target.to_degrees());
        outln!("band={}", c.band.label);
        match c.hinge.layers {
            Some(l) => outln!("layers={l}"),
            None => outln!("thickness_mm={:.d$}", c.hinge.thickness * 1e3),
        }
        outln!("hook_spacing_mm={:.d$}", c.hook_spacing * 1e3);
        outln!("predicted_deg={:.d$}", result.predicted.alpha.to_degrees());
        outln!("predicted_rad={}", result.predicted.alpha);
        outln!("error_deg={:.d$}", result.error.to_degrees());
        outln!("within_tolerance={}", result.within_tolerance);
        if !result.within_tolerance {
            misses.push(format!("{:.d$}", target.to_degrees()));
        }
    }
    if misses.is_empty() {
        Ok(())
    } else {
        Err(CliError::ToleranceMiss(format!(
            "no grid configuration within {} deg of target {} deg",
            args.tol_deg,
            misses.join(", ")
        )))
    }
}

#[derive(Debug, Args)]
pub struct FoldArgs {
    /// Net JSON file
    #[arg(long)]
    pub net: PathBuf,
    /// CSV of `hinge,angle_deg` fold angles
    #[arg(long, conflicts_with = "predict")]
    pub angles: Option<PathBuf>,
    /// Fold each hinge to the equilibrium of its joint
    #[arg(long)]
    pub predict: bool,
    /// Write folded vertices as CSV
    #[arg(long)]
    pub geometry: Option<PathBuf>,
}

#[derive(Debug, serde::Deserialize)]
struct AngleRow {
    hinge: usize,
    angle_deg: f64,
}

fn read_angles(path: &Path, hinges: usize) -> Result<Vec<f64>, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let mut angles = vec![None; hinges];
    for row in reader.deserialize::<AngleRow>() {
        let row = row.map_err(|e| CliError::at(path, e.into()))?;
        let slot = angles
            .get_mut(row.hinge)
            .ok_or_else(|| CliError::Input(format!("{}: no hinge {} in the net", path.display(), row.hinge)))?;
        if slot.replace(row.angle_deg.to_radians()).is_some() {
            return Err(CliError::Input(format!(
                "{}: hinge {} given twice",
                path.display(),
                row.hinge
            )));
        }
    }
    angles
        .into_iter()
        .enumerate()
        .map(|(k, a)| a.ok_or_else(|| CliError::Input(format!("{}: no angle for hinge {k}", path.display()))))
        .collect()
}

fn target_angles(net: &NetSpec) -> Result<Vec<f64>, CliError> {
    net.hinges
        .iter()
        .enumerate()
        .map(|(k, h)| match h.drive {
            HingeDrive::Target(a) => Ok(a),
            HingeDrive::Joint(_) => Err(CliError::Input(format!(
                "hinge {k} has a joint but no target angle; use --predict or --angles"
            ))),
        })
        .collect()
}

fn fold(args: &FoldArgs, config: &ToolConfig) -> Result<(), CliError> {
    let net = read_net(&args.net).map_err(|e| match e {
        foldkit::Error::Io(source) => CliError::io(&args.net, source),
        other => CliError::Input(format!("{}: {other}", args.net.display())),
    })?;
    let folded = if args.predict {
        predict_fold(&net)?
    } else {
        let angles = match &args.angles {
            Some(path) => read_angles(path, net.hinges.len())?,
            None => target_angles(&net)?,
        };
        fold_net(&net, &angles)?
    };

    let d = config.output.decimals;
    for (k, (h, &angle)) in net.hinges.iter().zip(&folded.angles).enumerate() {
        let mut line = format!(
            "hinge={k} faces={}-{} angle_deg={angle:.d$}",
            h.face_a,
            h.face_b,
            angle = angle.to_degrees()
        );
        if let Some(s) = folded.solutions.as_ref().map(|s| s[k]) {
            let state = if s.alpha == std::f64::consts::PI {
                "flat"
            } else if s.stop_limited {
                "stop"
            } else if s.band_slack {
                "slack"
            } else {
                "folded"
            };
            line.push_str(&format!(" state={state}"));
        }
        outln!("{line}");
    }
    outln!("closure_error_m={:e}", folded.closure_error);
    outln!("closure_error_mm={:.d$}", folded.closure_error * 1e3, d = d.max(6));

    if let Some(path) = &args.geometry {
        let mut w = csv::Writer::from_writer(create(path)?);
        let write = |w: &mut csv::Writer<BufWriter<File>>| -> csv::Result<()> {
            w.write_record(["face", "vertex", "x_mm", "y_mm", "z_mm"])?;
            for (id, verts) in folded.face_ids.iter().zip(&folded.vertices) {
                for (i, p) in verts.iter().enumerate() {
                    w.write_record([
                        id.clone(),
                        i.to_string(),
                        (p.x * 1e3).to_string(),
                        (p.y * 1e3).to_string(),
                        (p.z * 1e3).to_string(),
                    ])?;
                }
            }
            w.flush()?;
            Ok(())
        };
        write(&mut w).map_err(|e| CliError::at(path, e.into()))?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct NetArgs {
    #[arg(long)]
    pub polyhedron: Polyhedron,
    /// Edge length of the faces
    #[arg(long, value_name = "MM", default_value_t = 30.0)]
    pub edge_mm: f64,
    /// Output JSON (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Drive every hinge by this joint instead of its target angle
    /// (requires --spacing-mm and --layers or --thickness-mm)
    #[command(flatten)]
    pub joint: JointArgs,
}

fn net(args: &NetArgs, config: &ToolConfig) -> Result<(), CliError> {
    let mut net = canonical_net(args.polyhedron, mm(args.edge_mm))?;
    if args.joint.spacing_mm.is_some() || args.joint.hinge.is_set() {
        let joint = args.joint.build(config)?;
        for h in &mut net.hinges {
            h.drive = HingeDrive::Joint(joint.clone());
        }
    }
    let json = net_to_json(&net);
    emit(&args.out, |w| Ok(writeln!(w, "{json}")?))?;
    report(
        is_stdout(&args.out),
        &format!(
            "faces={} hinges={} mating={}",
            net.faces.len(),
            net.hinges.len(),
            net.mating.len()
        ),
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[command(flatten)]
    pub body: BodyArgs,
    /// CSV of `duty1,duty2,duration_s` segments (duties as fractions)
    #[arg(long)]
    pub schedule: PathBuf,
    /// Integration step
    #[arg(long, value_name = "S", default_value_t = 1e-3)]
    pub dt: f64,
    /// Heading diffusion; zero disables the noise
    #[arg(long, value_name = "RAD_PER_SQRT_S", default_value_t = 0.0)]
    pub noise_sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output trajectory CSV (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn sim(args: &SimArgs, config: &ToolConfig) -> Result<(), CliError> {
    let body = args.body.build(config)?;
    let file = File::open(&args.schedule).map_err(|e| CliError::io(&args.schedule, e))?;
    let schedule = read_schedule(file).map_err(|e| CliError::at(&args.schedule, e))?;
    let noise = (args.noise_sigma != 0.0).then_some(HeadingNoise {
        sigma: args.noise_sigma,
        seed: args.seed,
    });
    let traj = simulate_with_noise(&body, &schedule, args.dt, noise)?;
    emit(&args.out, |w| write_trajectory(&traj, w))?;
    let on_stdout = is_stdout(&args.out);
    for (k, (seg, kappa)) in schedule.segments.iter().zip(segment_curvatures(&traj)).enumerate() {
        let kappa = match kappa {
            Ok(v) => v.to_string(),
            Err(e) => format!("nan ({e})"),
        };
        report(
            on_stdout,
            &format!(
                "segment={k} duty1={} duty2={} curvature_per_m={kappa}",
                seg.duty_1, seg.duty_2
            ),
        );
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct StraightArgs {
    #[command(flatten)]
    pub body: BodyArgs,
    /// Duty of the fixed motor, in percent
    #[arg(long, value_name = "PERCENT")]
    pub duty1: f64,
}

fn straight(args: &StraightArgs, config: &ToolConfig) -> Result<(), CliError> {
    let body = args.body.build(config)?;
    outln!("bias_rad_per_m={}", body.bias);
    match solve_straight_duty(&body, args.duty1 / 100.0)? {
        Some(d2) => {
            outln!("duty2_percent={:.d$}", d2 * 100.0, d = config.output.decimals);
            outln!("duty2={d2}");
            Ok(())
        }
        None => {
            outln!("duty2=none");
            Err(CliError::ToleranceMiss(format!(
                "slowing the second motor cannot cancel the bias at duty {}%",
                args.duty1
            )))
        }
    }
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub kind: ChannelKind,
    /// Sensor log CSV with `t,value` rows
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Events CSV (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Samples per second; inferred from the timestamps when absent
    #[arg(long, value_name = "HZ")]
    pub sample_rate: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_BASELINE_WINDOW)]
    pub baseline_window: usize,
    #[arg(long, default_value_t = DEFAULT_HALL_THRESHOLD)]
    pub hall_threshold: f64,
    #[arg(long, default_value_t = DEFAULT_TOUCH_THRESHOLD)]
    pub touch_threshold: f64,
    #[arg(long, value_name = "S", default_value_t = DEFAULT_DEBOUNCE_GAP)]
    pub debounce_gap: f64,
    #[arg(long, value_name = "S", default_value_t = DEFAULT_MIN_ACTIVE)]
    pub min_active: f64,
    /// Also report the signal-to-noise ratio
    #[arg(long)]
    pub snr: bool,
}

fn classify_cmd(args: &ClassifyArgs) -> Result<(), CliError> {
    let file = File::open(&args.input).map_err(|e| CliError::io(&args.input, e))?;
    let stream = read_log(file, args.kind, args.sample_rate).map_err(|e| CliError::at(&args.input, e))?;
    let config = ClassifierConfig {
        baseline_window: args.baseline_window,
        hall_threshold: args.hall_threshold,
        touch_threshold: args.touch_threshold,
        debounce_gap: args.debounce_gap,
        min_active: args.min_active,
    };
    let states = classify(&stream, &config)?;
    emit(&args.out, |w| write_events(&states, args.kind, w))?;
    let on_stdout = is_stdout(&args.out);
    report(on_stdout, &format!("events={}", states.events.len()));
    if args.snr {
        let r = snr(&stream, &states)?;
        report(
            on_stdout,
            &format!(
                "mu_active={} mu_inactive={} sigma_noise={} snr_db={:.4}",
                r.mu_active, r.mu_inactive, r.sigma_noise, r.snr_db
            ),
        );
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum StatsPreset {
    /// Hall sensor, positive deflection when docked
    UnitA,
    /// Hall sensor, negative deflection when docked
    UnitB,
    /// Capacitive touch face
    Touch,
}

impl StatsPreset {
    fn stats(self) -> StateStats {
        let g = |mean, sd| Gaussian { mean, sd };
        match self {
            StatsPreset::UnitA => StateStats {
                inactive: g(-3.676, 7.602),
                active: g(79.504, 34.666),
            },
            StatsPreset::UnitB => StateStats {
                inactive: g(-0.152, 6.744),
                active: g(-134.125, 40.758),
            },
            StatsPreset::Touch => StateStats {
                inactive: g(10.57, 0.82),
                active: g(2.23, 0.94),
            },
        }
    }
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("shape").required(true).args(["spans", "taps_bpm"]))]
pub struct SynthArgs {
    #[arg(long)]
    pub kind: ChannelKind,
    /// Reading statistics per state
    #[arg(long, value_enum, required_unless_present_all = ["inactive", "active"])]
    pub stats: Option<StatsPreset>,
    /// Inactive mean and standard deviation, overriding the preset
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_name = "MEAN,SD")]
    pub inactive: Option<Vec<f64>>,
    /// Active mean and standard deviation, overriding the preset
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_name = "MEAN,SD")]
    pub active: Option<Vec<f64>>,
    /// State schedule as `state:seconds` pairs, e.g. `0:5,1:8,0:5`
    #[arg(long, value_delimiter = ',')]
    pub spans: Vec<String>,
    /// Tap rate for a tapping schedule instead of --spans
    #[arg(long)]
    pub taps_bpm: Option<f64>,
    /// Length of the tapping schedule
    #[arg(long, value_name = "S", default_value_t = 180.0)]
    pub duration: f64,
    /// How long each tap is held
    #[arg(long, value_name = "S", default_value_t = 0.12)]
    pub hold: f64,
    /// Rest before the first tap
    #[arg(long, value_name = "S", default_value_t = 1.0)]
    pub lead: f64,
    #[arg(long, value_name = "HZ", default_value_t = 100.0)]
    pub rate: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output log CSV (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_span(s: &str) -> Result<StateSpan, CliError> {
    let bad = || CliError::Input(format!("span `{s}` is not `state:seconds`"));
    let (state, secs) = s.split_once(':').ok_or_else(bad)?;
    let active = match state.trim() {
        "0" | "off" | "inactive" => false,
        "1" | "on" | "active" => true,
        _ => return Err(bad()),
    };
    let duration: f64 = secs.trim().parse().map_err(|_| bad())?;
    if !(duration >= 0.0) {
        return Err(bad());
    }
    Ok(StateSpan::new(active, duration))
}

fn synth(args: &SynthArgs) -> Result<(), CliError> {
    let mut stats = args.stats.map(StatsPreset::stats).unwrap_or(StateStats {
        inactive: Gaussian { mean: 0.0, sd: 0.0 },
        active: Gaussian { mean: 0.0, sd: 0.0 },
    });
    for (flag, given, slot) in [
        ("--inactive", &args.inactive, &mut stats.inactive),
        ("--active", &args.active, &mut stats.active),
    ] {
        match given.as_deref() {
            Some(&[mean, sd]) => *slot = Gaussian { mean, sd },
            Some(_) => return Err(CliError::Input(format!("{flag} takes MEAN,SD"))),
            None => {}
        }
    }
    let spans = match args.taps_bpm {
        Some(bpm) => {
            if !(bpm > 0.0) || !(args.hold > 0.0 && args.hold < 60.0 / bpm) {
                return Err(CliError::Input(
                    "--hold must be positive and shorter than the tap period".into(),
                ));
            }
            tap_spans(bpm, args.duration, args.hold, args.lead)
        }
        None => args.spans.iter().map(|s| parse_span(s)).collect::<Result<_, _>>()?,
    };
    let stream = synth_stream(args.kind, &spans, &stats, args.rate, args.seed)?;
    emit(&args.out, |w| write_log(&stream, w))?;
    report(is_stdout(&args.out), &format!("samples={}", stream.len()));
    Ok(())
}

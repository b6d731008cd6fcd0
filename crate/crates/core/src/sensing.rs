//! Threshold classification of Hall-effect and capacitive-touch streams.
//!
//! Hall streams are docking sensors: a magnet on a neighbouring module
//! deflects the reading away from its resting baseline, in either direction
//! depending on how the sensor is mounted. A sample counts as connected when
//! its distance from the baseline exceeds the threshold.
//!
//! Touch streams are filtered capacitance counts that drop when a finger
//! covers the face. A sample counts as touched when it is below the
//! threshold.
//!
//! Per-sample decisions are then debounced: active runs shorter than
//! `min_active` are discarded as glitches, and inactive gaps shorter than
//! `debounce_gap` between two active runs are filled.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::locomotion::expect_header;

pub const LOG_CSV_HEADER: &str = "t,value";
pub const EVENTS_CSV_HEADER: &str = "onset_t,release_t,kind";

pub const DEFAULT_BASELINE_WINDOW: usize = 20;
pub const DEFAULT_HALL_THRESHOLD: f64 = 24.954;
pub const DEFAULT_TOUCH_THRESHOLD: f64 = 6.4;
pub const DEFAULT_DEBOUNCE_GAP: f64 = 0.1;
pub const DEFAULT_MIN_ACTIVE: f64 = 0.02;
/// Half-width of the onset matching window in [`tap_accuracy`] (s).
pub const DEFAULT_TAP_WINDOW: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Hall,
    Touch,
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelKind::Hall => "hall",
            ChannelKind::Touch => "touch",
        })
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hall" => Ok(ChannelKind::Hall),
            "touch" => Ok(ChannelKind::Touch),
            other => Err(Error::invalid(
                "kind",
                format!("expected `hall` or `touch`, got `{other}`"),
            )),
        }
    }
}

/// Uniformly sampled readings of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorStream {
    pub kind: ChannelKind,
    /// Samples per second.
    pub sample_rate: f64,
    /// Time of the first sample (s).
    pub start_time: f64,
    pub samples: Vec<f64>,
    /// Recorded sample times, when read from a log. Otherwise times follow
    /// from `start_time` and `sample_rate`.
    pub timestamps: Option<Vec<f64>>,
}

impl SensorStream {
    pub fn new(kind: ChannelKind, sample_rate: f64, samples: Vec<f64>) -> Result<Self> {
        let stream = SensorStream {
            kind,
            sample_rate,
            start_time: 0.0,
            samples,
            timestamps: None,
        };
        stream.validate()?;
        Ok(stream)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(Error::invalid("sample_rate", "must be positive and finite"));
        }
        if self.samples.is_empty() {
            return Err(Error::InsufficientSamples { needed: 1, got: 0 });
        }
        if let Some(k) = self.samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parse(format!("sample {k} is not finite")));
        }
        if self.timestamps.as_ref().is_some_and(|t| t.len() != self.samples.len()) {
            return Err(Error::invalid("timestamps", "must have one entry per sample"));
        }
        Ok(())
    }

    pub fn time(&self, index: usize) -> f64 {
        match &self.timestamps {
            Some(t) => t[index],
            None => self.start_time + index as f64 / self.sample_rate,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    /// Leading samples averaged into the baseline.
    pub baseline_window: usize,
    /// Minimum deflection from baseline for a Hall contact (counts).
    pub hall_threshold: f64,
    /// Touch reading below which a face counts as touched (counts).
    pub touch_threshold: f64,
    /// Shortest inactive gap kept between two events (s).
    pub debounce_gap: f64,
    /// Shortest active run kept as an event (s).
    pub min_active: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            baseline_window: DEFAULT_BASELINE_WINDOW,
            hall_threshold: DEFAULT_HALL_THRESHOLD,
            touch_threshold: DEFAULT_TOUCH_THRESHOLD,
            debounce_gap: DEFAULT_DEBOUNCE_GAP,
            min_active: DEFAULT_MIN_ACTIVE,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if self.baseline_window == 0 {
            return Err(Error::invalid("baseline_window", "must be at least 1"));
        }
        for (name, v) in [
            ("hall_threshold", self.hall_threshold),
            ("touch_threshold", self.touch_threshold),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, "must be positive and finite"));
            }
        }
        for (name, v) in [("debounce_gap", self.debounce_gap), ("min_active", self.min_active)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, "must be non-negative and finite"));
            }
        }
        Ok(())
    }
}

/// One active interval. `release` is `None` when the stream ends active.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    #[serde(rename = "onset_t")]
    pub onset: f64,
    #[serde(rename = "release_t")]
    pub release: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSequence {
    /// Threshold decision per sample, before debouncing.
    pub raw: Vec<bool>,
    /// Debounced state per sample.
    pub states: Vec<bool>,
    pub events: Vec<Event>,
}

impl StateSequence {
    /// Debounces per-sample decisions of a stream sampled at `sample_rate`
    /// from `start_time`.
    pub fn from_raw(raw: Vec<bool>, sample_rate: f64, start_time: f64, config: &ClassifierConfig) -> Self {
        Self::debounce(raw, sample_rate, config, |k| start_time + k as f64 / sample_rate)
    }

    /// Debounces the per-sample decisions of `stream`, stamping events with
    /// its sample times.
    pub fn for_stream(raw: Vec<bool>, stream: &SensorStream, config: &ClassifierConfig) -> Self {
        Self::debounce(raw, stream.sample_rate, config, |k| stream.time(k))
    }

    fn debounce(raw: Vec<bool>, sample_rate: f64, config: &ClassifierConfig, time: impl Fn(usize) -> f64) -> Self {
        let min_run = config.min_active * sample_rate;
        let min_gap = config.debounce_gap * sample_rate;
        let mut states = raw.clone();

        for (start, end) in runs(&states, true) {
            if ((end - start) as f64) < min_run {
                states[start..end].fill(false);
            }
        }
        for (start, end) in runs(&states, false) {
            let inner = start > 0 && end < states.len();
            if inner && ((end - start) as f64) < min_gap {
                states[start..end].fill(true);
            }
        }

        let events = runs(&states, true)
            .into_iter()
            .map(|(start, end)| Event {
                onset: time(start),
                release: (end < states.len()).then(|| time(end)),
            })
            .collect();
        StateSequence { raw, states, events }
    }

    pub fn onsets(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.onset).collect()
    }

    pub fn active_count(&self) -> usize {
        self.states.iter().filter(|&&s| s).count()
    }
}

/// Half-open index ranges of maximal runs equal to `value`.
fn runs(states: &[bool], value: bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut k = 0;
    while k < states.len() {
        if states[k] == value {
            let start = k;
            while k < states.len() && states[k] == value {
                k += 1;
            }
            out.push((start, k));
        } else {
            k += 1;
        }
    }
    out
}

/// Mean of the first `window` samples.
pub fn compute_baseline(stream: &SensorStream, window: usize) -> Result<f64> {
    if window == 0 {
        return Err(Error::invalid("baseline_window", "must be at least 1"));
    }
    if stream.samples.len() < window {
        return Err(Error::InsufficientSamples {
            needed: window,
            got: stream.samples.len(),
        });
    }
    Ok(stream.samples[..window].iter().sum::<f64>() / window as f64)
}

fn expect_kind(stream: &SensorStream, kind: ChannelKind) -> Result<()> {
    if stream.kind == kind {
        Ok(())
    } else {
        Err(Error::invalid(
            "kind",
            format!("expected a {kind} stream, got {}", stream.kind),
        ))
    }
}

pub fn classify_hall(stream: &SensorStream, config: &ClassifierConfig) -> Result<StateSequence> {
    expect_kind(stream, ChannelKind::Hall)?;
    stream.validate()?;
    config.validate()?;
    let baseline = compute_baseline(stream, config.baseline_window)?;
    let raw = stream
        .samples
        .iter()
        .map(|v| (v - baseline).abs() > config.hall_threshold)
        .collect();
    Ok(StateSequence::for_stream(raw, stream, config))
}

pub fn classify_touch(stream: &SensorStream, config: &ClassifierConfig) -> Result<StateSequence> {
    expect_kind(stream, ChannelKind::Touch)?;
    stream.validate()?;
    config.validate()?;
    let raw = stream.samples.iter().map(|&v| v < config.touch_threshold).collect();
    Ok(StateSequence::for_stream(raw, stream, config))
}

pub fn classify(stream: &SensorStream, config: &ClassifierConfig) -> Result<StateSequence> {
    match stream.kind {
        ChannelKind::Hall => classify_hall(stream, config),
        ChannelKind::Touch => classify_touch(stream, config),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnrReport {
    pub mu_active: f64,
    pub mu_inactive: f64,
    /// Standard deviation of the inactive samples.
    pub sigma_noise: f64,
    pub snr_db: f64,
}

/// `20 log10(|mu_active - mu_inactive| / sigma_noise)`.
pub fn snr_from_stats(mu_active: f64, mu_inactive: f64, sigma_noise: f64) -> Result<SnrReport> {
    if !(sigma_noise > 0.0) || !sigma_noise.is_finite() {
        return Err(Error::Degenerate(format!("noise level {sigma_noise} is not positive")));
    }
    Ok(SnrReport {
        mu_active,
        mu_inactive,
        sigma_noise,
        snr_db: 20.0 * ((mu_active - mu_inactive).abs() / sigma_noise).log10(),
    })
}

/// SNR of a classified stream, using the debounced states to split samples.
pub fn snr(stream: &SensorStream, states: &StateSequence) -> Result<SnrReport> {
    if states.states.len() != stream.samples.len() {
        return Err(Error::invalid("states", "length differs from the stream"));
    }
    let split = |want: bool| -> Vec<f64> {
        stream
            .samples
            .iter()
            .zip(&states.states)
            .filter(|(_, &s)| s == want)
            .map(|(&v, _)| v)
            .collect()
    };
    let (active, inactive) = (split(true), split(false));
    if active.is_empty() || inactive.len() < 2 {
        return Err(Error::Degenerate(format!(
            "need both states present: {} active, {} inactive samples",
            active.len(),
            inactive.len()
        )));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mu_inactive = mean(&inactive);
    let var = inactive.iter().map(|v| (v - mu_inactive).powi(2)).sum::<f64>() / (inactive.len() - 1) as f64;
    snr_from_stats(mean(&active), mu_inactive, var.sqrt())
}

/// Metronome taps at a fixed rate, starting at `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TapSchedule {
    pub bpm: f64,
    pub duration: f64,
    pub start: f64,
}

impl TapSchedule {
    pub fn new(bpm: f64, duration: f64) -> Self {
        TapSchedule {
            bpm,
            duration,
            start: 0.0,
        }
    }

    pub fn period(&self) -> f64 {
        60.0 / self.bpm
    }

    /// Tap times in `[start, start + duration)`.
    pub fn times(&self) -> Vec<f64> {
        let n = (self.duration / self.period() - 1e-9).ceil().max(0.0) as usize;
        (0..n).map(|k| self.start + k as f64 * self.period()).collect()
    }
}

/// Percentage of taps detected, penalising spurious detections:
/// `matched / max(taps, detections) * 100`. Each tap is greedily matched to
/// the earliest unused onset within `window` seconds.
pub fn tap_accuracy(detected: &StateSequence, schedule: &TapSchedule, window: f64) -> Result<f64> {
    if !(schedule.bpm > 0.0) {
        return Err(Error::invalid("bpm", "must be positive"));
    }
    Ok(match_taps(&schedule.times(), &detected.onsets(), window))
}

pub fn match_taps(truth: &[f64], onsets: &[f64], window: f64) -> f64 {
    let total = truth.len().max(onsets.len());
    if total == 0 {
        return 100.0;
    }
    let mut next = 0;
    let mut matched = 0;
    for &t in truth {
        while next < onsets.len() && onsets[next] < t - window {
            next += 1;
        }
        if next < onsets.len() && onsets[next] <= t + window {
            matched += 1;
            next += 1;
        }
    }
    matched as f64 / total as f64 * 100.0
}

/// Mean and standard deviation of one state's readings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateStats {
    pub inactive: Gaussian,
    pub active: Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateSpan {
    pub active: bool,
    /// Seconds.
    pub duration: f64,
}

impl StateSpan {
    pub fn new(active: bool, duration: f64) -> Self {
        StateSpan { active, duration }
    }
}

/// Sample count of each span. Boundaries are rounded from cumulative time so
/// long schedules do not drift.
fn span_samples(spans: &[StateSpan], sample_rate: f64) -> Vec<usize> {
    let mut elapsed = 0.0;
    let mut done = 0;
    spans
        .iter()
        .map(|s| {
            elapsed += s.duration;
            let end = ((elapsed * sample_rate).round() as usize).max(done);
            let n = end - done;
            done = end;
            n
        })
        .collect()
}

/// Seeded Gaussian readings following a schedule of states.
pub fn synth_stream(
    kind: ChannelKind,
    spans: &[StateSpan],
    stats: &StateStats,
    sample_rate: f64,
    seed: u64,
) -> Result<SensorStream> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = |g: Gaussian| {
        Normal::new(g.mean, g.sd).map_err(|_| Error::invalid("sd", format!("must be non-negative, got {}", g.sd)))
    };
    let (off, on) = (dist(stats.inactive)?, dist(stats.active)?);
    let mut samples = Vec::new();
    for (span, n) in spans.iter().zip(span_samples(spans, sample_rate)) {
        let d = if span.active { &on } else { &off };
        samples.extend((0..n).map(|_| d.sample(&mut rng)));
    }
    SensorStream::new(kind, sample_rate, samples)
}

/// True per-sample states matching [`synth_stream`] for the same spans.
pub fn span_states(spans: &[StateSpan], sample_rate: f64) -> Vec<bool> {
    spans
        .iter()
        .zip(span_samples(spans, sample_rate))
        .flat_map(|(s, n)| std::iter::repeat_n(s.active, n))
        .collect()
}

/// Alternating spans for tapping at `bpm`: each tap is held for `hold`
/// seconds, starting on the beat after `lead` seconds of rest.
pub fn tap_spans(bpm: f64, duration: f64, hold: f64, lead: f64) -> Vec<StateSpan> {
    let period = 60.0 / bpm;
    let schedule = TapSchedule {
        bpm,
        duration,
        start: lead,
    };
    let mut spans = vec![StateSpan::new(false, lead)];
    for _ in schedule.times() {
        spans.push(StateSpan::new(true, hold));
        spans.push(StateSpan::new(false, period - hold));
    }
    spans
}

/// Fraction of samples whose state agrees with `truth`.
pub fn agreement(states: &[bool], truth: &[bool]) -> f64 {
    let n = states.len().min(truth.len());
    if n == 0 {
        return 1.0;
    }
    states.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / n as f64
}

#[derive(Debug, Serialize, Deserialize)]
struct LogRow {
    t: f64,
    value: f64,
}

/// Reads a `t,value` log. The sample rate is taken from the mean spacing of
/// the timestamps unless given.
pub fn read_log<R: Read>(input: R, kind: ChannelKind, sample_rate: Option<f64>) -> Result<SensorStream> {
    let mut r = csv::Reader::from_reader(input);
    expect_header(&mut r, LOG_CSV_HEADER)?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<LogRow>, _>>()?;
    let Some(first) = rows.first() else {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    };
    for (k, w) in rows.windows(2).enumerate() {
        if !(w[1].t > w[0].t) {
            return Err(Error::Parse(format!(
                "time is not strictly increasing at row {}",
                k + 2
            )));
        }
    }
    let rate = match sample_rate {
        Some(rate) => rate,
        None if rows.len() > 1 => (rows.len() - 1) as f64 / (rows[rows.len() - 1].t - first.t),
        None => return Err(Error::invalid("sample_rate", "cannot infer from a single sample")),
    };
    let mut stream = SensorStream::new(kind, rate, rows.iter().map(|r| r.value).collect())?;
    stream.start_time = first.t;
    stream.timestamps = Some(rows.iter().map(|r| r.t).collect());
    Ok(stream)
}

pub fn write_log<W: Write>(stream: &SensorStream, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (k, &value) in stream.samples.iter().enumerate() {
        w.serialize(LogRow {
            t: stream.time(k),
            value,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct EventRow {
    onset_t: f64,
    release_t: Option<f64>,
    kind: ChannelKind,
}

pub fn write_events<W: Write>(states: &StateSequence, kind: ChannelKind, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if states.events.is_empty() {
        w.write_record(EVENTS_CSV_HEADER.split(','))?;
    }
    for e in &states.events {
        w.serialize(EventRow {
            onset_t: e.onset,
            release_t: e.release,
            kind,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_events<R: Read>(input: R) -> Result<Vec<(Event, ChannelKind)>> {
    let mut r = csv::Reader::from_reader(input);
    expect_header(&mut r, EVENTS_CSV_HEADER)?;
    r.deserialize::<EventRow>()
        .map(|row| {
            let row = row?;
            Ok((
                Event {
                    onset: row.onset_t,
                    release: row.release_t,
                },
                row.kind,
            ))
        })
        .collect()
}

//! Tablet recordings: SVC text codec, on-surface stroke segmentation,
//! robust outlier repair, and a deterministic synthetic cohort generator.
//!
//! The SVC dialect is plain UTF-8 text: line 1 holds the sample count N,
//! lines 2..N+1 hold seven space-separated integers
//! `x y t button azimuth tilt pressure`. Timestamps are integers in units
//! of 100 ns or milliseconds; the unit is auto-detected from the median
//! inter-sample gap and recorded on the parsed recording.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::fracdiff::SampledSignal;
use crate::math;
use crate::rng::CounterRng;

/// One tablet sample. Coordinates are in device units (reals in memory;
/// the SVC codec rounds to integers on write).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PenSample {
    pub x: f64,
    pub y: f64,
    /// Seconds relative to the first sample of the recording.
    pub t: f64,
    /// Pen-down flag (button column: 1 = on-surface, 0 = in-air).
    pub on_surface: bool,
    pub pressure: i32,
    pub azimuth: i32,
    pub tilt: i32,
}

/// Clinical status label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Pd,
    Hc,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Pd => "PD",
            Label::Hc => "HC",
        }
    }

    pub fn from_str(s: &str) -> Option<Label> {
        match s {
            "PD" => Some(Label::Pd),
            "HC" => Some(Label::Hc),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gender {
    F,
    M,
}

impl Gender {
    pub fn as_str(self) -> &'static str {
        match self {
            Gender::F => "F",
            Gender::M => "M",
        }
    }

    pub fn from_str(s: &str) -> Option<Gender> {
        match s {
            "F" => Some(Gender::F),
            "M" => Some(Gender::M),
            _ => None,
        }
    }
}

/// Timestamp unit of the SVC integer `t` column.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeUnit {
    HundredNanoseconds,
    Milliseconds,
}

impl TimeUnit {
    fn seconds_per_tick(self) -> f64 {
        match self {
            TimeUnit::HundredNanoseconds => 1e-7,
            TimeUnit::Milliseconds => 1e-3,
        }
    }
}

/// A full tablet recording plus subject metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct HandwritingRecording {
    pub samples: Vec<PenSample>,
    /// Estimated sampling rate in Hz (nominal 150).
    pub fs: f64,
    pub subject_id: String,
    pub label: Option<Label>,
    pub age: Option<f64>,
    pub gender: Option<Gender>,
    /// Timestamp unit used by the SVC representation of this recording.
    pub time_unit: TimeUnit,
}

/// A maximal on-surface run of at least two samples, carried as a pair of
/// uniformly sampled coordinate signals with h = 1/fs.
#[derive(Clone, Debug, PartialEq)]
pub struct Stroke {
    pub x: SampledSignal,
    pub y: SampledSignal,
    /// Index of the first sample of this stroke in the source recording.
    pub start_index: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SignalError {
    /// Malformed SVC content at a 1-based line number.
    Malformed { line: usize, reason: String },
    /// Header sample count does not match the body length.
    CountMismatch { header: usize, body: usize },
    /// Timestamps must increase strictly; `index` is the first offending
    /// 0-based sample.
    NonMonotoneTime { index: usize },
    /// Fewer than two samples.
    TooFewSamples(usize),
    /// More than half of a stroke channel was flagged as outliers.
    TooManyOutliers {
        channel: &'static str,
        flagged: usize,
        total: usize,
    },
    /// Invalid synthetic cohort configuration.
    BadConfig(String),
}

impl core::fmt::Display for SignalError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SignalError::Malformed { line, reason } => {
                write!(f, "malformed SVC line {line}: {reason}")
            }
            SignalError::CountMismatch { header, body } => {
                write!(f, "header declares {header} samples but body has {body}")
            }
            SignalError::NonMonotoneTime { index } => {
                write!(f, "timestamps not strictly increasing at sample index {index}")
            }
            SignalError::TooFewSamples(n) => write!(f, "need at least 2 samples, got {n}"),
            SignalError::TooManyOutliers { channel, flagged, total } => write!(
                f,
                "{flagged}/{total} samples flagged on channel {channel}; signal unusable"
            ),
            SignalError::BadConfig(msg) => write!(f, "invalid synthesis config: {msg}"),
        }
    }
}

impl core::error::Error for SignalError {}

/// Parses the SVC dialect. Timestamps are converted to seconds relative to
/// the first sample; fs is the reciprocal median inter-sample gap rounded
/// to the nearest integer Hz. Subject metadata is left empty for the
/// caller (sidecar files carry it).
pub fn parse_svc(text: &str) -> Result<HandwritingRecording, SignalError> {
    let mut lines = text.lines();
    let header_line = lines.next().ok_or(SignalError::Malformed {
        line: 1,
        reason: String::from("empty input"),
    })?;
    let declared: usize = header_line.trim().parse().map_err(|_| SignalError::Malformed {
        line: 1,
        reason: format!("sample count expected, got {header_line:?}"),
    })?;

    let mut raw_t: Vec<i64> = Vec::with_capacity(declared);
    let mut samples: Vec<PenSample> = Vec::with_capacity(declared);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        if line.trim().is_empty() {
            // Trailing blank lines are tolerated; blanks inside the body are not.
            if samples.len() == declared {
                continue;
            }
            return Err(SignalError::Malformed {
                line: line_no,
                reason: String::from("blank line inside sample body"),
            });
        }
        let mut fields = line.split_whitespace();
        let mut next_int = |name: &str| -> Result<i64, SignalError> {
            fields
                .next()
                .ok_or_else(|| SignalError::Malformed {
                    line: line_no,
                    reason: format!("missing field {name}"),
                })?
                .parse::<i64>()
                .map_err(|_| SignalError::Malformed {
                    line: line_no,
                    reason: format!("field {name} is not an integer"),
                })
        };
        let x = next_int("x")?;
        let y = next_int("y")?;
        let t = next_int("t")?;
        let button = next_int("button")?;
        let azimuth = next_int("azimuth")?;
        let tilt = next_int("tilt")?;
        let pressure = next_int("pressure")?;
        if fields.next().is_some() {
            return Err(SignalError::Malformed {
                line: line_no,
                reason: String::from("more than 7 fields"),
            });
        }
        if button != 0 && button != 1 {
            return Err(SignalError::Malformed {
                line: line_no,
                reason: format!("button must be 0 or 1, got {button}"),
            });
        }
        raw_t.push(t);
        samples.push(PenSample {
            x: x as f64,
            y: y as f64,
            t: 0.0, // filled below once the unit is known
            on_surface: button == 1,
            pressure: pressure as i32,
            azimuth: azimuth as i32,
            tilt: tilt as i32,
        });
    }

    if samples.len() != declared {
        return Err(SignalError::CountMismatch {
            header: declared,
            body: samples.len(),
        });
    }
    if samples.len() < 2 {
        return Err(SignalError::TooFewSamples(samples.len()));
    }
    for i in 1..raw_t.len() {
        if raw_t[i] <= raw_t[i - 1] {
            return Err(SignalError::NonMonotoneTime { index: i });
        }
    }

    let gaps: Vec<f64> = raw_t.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
    let median_gap_ticks = math::median(&gaps);
    let time_unit = if median_gap_ticks >= 1000.0 {
        TimeUnit::HundredNanoseconds
    } else {
        TimeUnit::Milliseconds
    };
    let tick = time_unit.seconds_per_tick();
    let t0 = raw_t[0];
    for (s, &raw) in samples.iter_mut().zip(&raw_t) {
        s.t = (raw - t0) as f64 * tick;
    }
    let fs = libm::round(1.0 / (median_gap_ticks * tick));

    Ok(HandwritingRecording {
        samples,
        fs,
        subject_id: String::new(),
        label: None,
        age: None,
        gender: None,
        time_unit,
    })
}

/// Serializes a recording to SVC text. Coordinates are rounded to the
/// nearest integer device unit; timestamps are rounded to the recording's
/// tick unit. Parsing the result reproduces integer-valued recordings
/// bit for bit.
pub fn write_svc(rec: &HandwritingRecording) -> String {
    let tick = rec.time_unit.seconds_per_tick();
    let mut out = String::new();
    out.push_str(&format!("{}\n", rec.samples.len()));
    for s in &rec.samples {
        let x = libm::round(s.x) as i64;
        let y = libm::round(s.y) as i64;
        let t = libm::round(s.t / tick) as i64;
        let button = if s.on_surface { 1 } else { 0 };
        out.push_str(&format!(
            "{x} {y} {t} {button} {} {} {}\n",
            s.azimuth, s.tilt, s.pressure
        ));
    }
    out
}

/// Splits a recording into maximal on-surface runs of length ≥ 2.
/// Shorter runs are dropped. Stroke grid step is exactly 1/fs.
pub fn segment_strokes(rec: &HandwritingRecording) -> Vec<Stroke> {
    let h = 1.0 / rec.fs;
    let mut strokes = Vec::new();
    let mut run_start: Option<usize> = None;
    let n = rec.samples.len();
    for i in 0..=n {
        let down = i < n && rec.samples[i].on_surface;
        match (run_start, down) {
            (None, true) => run_start = Some(i),
            (Some(start), false) => {
                if i - start >= 2 {
                    let xs: Vec<f64> = rec.samples[start..i].iter().map(|s| s.x).collect();
                    let ys: Vec<f64> = rec.samples[start..i].iter().map(|s| s.y).collect();
                    strokes.push(Stroke {
                        x: SampledSignal::from_computed(xs, h),
                        y: SampledSignal::from_computed(ys, h),
                        start_index: start,
                    });
                }
                run_start = None;
            }
            _ => {}
        }
    }
    strokes
}

/// Normal-consistency scale for the median absolute deviation.
const MAD_SCALE: f64 = 1.4826;

/// Flags samples more than three scaled median absolute deviations from
/// the channel median and replaces them by linear interpolation between
/// the nearest unflagged neighbours (nearest-value extension at the
/// boundaries). Flagging repeats on the repaired channel until no sample
/// is left outside the band, so the operation is a fixpoint: repairing a
/// repaired stroke changes nothing. The equidistant grid is preserved.
/// A constant channel (MAD = 0) flags nothing; flagging more than half a
/// channel in total is an error (signal unusable).
pub fn repair_outliers(stroke: &Stroke) -> Result<Stroke, SignalError> {
    let x = repair_channel(stroke.x.values(), "x")?;
    let y = repair_channel(stroke.y.values(), "y")?;
    let h = stroke.x.h();
    Ok(Stroke {
        x: SampledSignal::from_computed(x, h),
        y: SampledSignal::from_computed(y, h),
        start_index: stroke.start_index,
    })
}

fn repair_channel(values: &[f64], channel: &'static str) -> Result<Vec<f64>, SignalError> {
    let n = values.len();
    let mut out = values.to_vec();
    let mut ever_flagged = alloc::vec![false; n];
    let mut total_flagged = 0usize;
    // Replacement shifts the median/MAD slightly, which can expose samples
    // that were borderline on the previous pass; a channel that never
    // stabilizes is unusable.
    for _pass in 0..100 {
        let med = math::median(&out);
        let abs_dev: Vec<f64> = out.iter().map(|v| (v - med).abs()).collect();
        let mad = math::median(&abs_dev);
        if mad == 0.0 {
            return Ok(out);
        }
        let threshold = 3.0 * MAD_SCALE * mad;
        let flagged: Vec<bool> = abs_dev.iter().map(|&d| d > threshold).collect();
        if !flagged.iter().any(|&f| f) {
            return Ok(out);
        }
        for (i, &f) in flagged.iter().enumerate() {
            if f && !ever_flagged[i] {
                ever_flagged[i] = true;
                total_flagged += 1;
            }
        }
        if 2 * total_flagged > n {
            return Err(SignalError::TooManyOutliers {
                channel,
                flagged: total_flagged,
                total: n,
            });
        }
        interpolate_flagged(&mut out, &flagged);
    }
    Err(SignalError::TooManyOutliers {
        channel,
        flagged: total_flagged,
        total: n,
    })
}

fn interpolate_flagged(out: &mut [f64], flagged: &[bool]) {
    let n = out.len();
    let mut i = 0;
    while i < n {
        if !flagged[i] {
            i += 1;
            continue;
        }
        let run_start = i;
        while i < n && flagged[i] {
            i += 1;
        }
        let run_end = i; // exclusive
        let left = run_start.checked_sub(1);
        let right = if run_end < n { Some(run_end) } else { None };
        match (left, right) {
            (Some(l), Some(r)) => {
                let vl = out[l];
                let vr = out[r];
                let span = (r - l) as f64;
                for k in run_start..run_end {
                    out[k] = vl + (vr - vl) * ((k - l) as f64 / span);
                }
            }
            (Some(l), None) => {
                for k in run_start..run_end {
                    out[k] = out[l];
                }
            }
            (None, Some(r)) => {
                for k in run_start..run_end {
                    out[k] = out[r];
                }
            }
            (None, None) => unreachable!("full-channel flagging is rejected by the caller"),
        }
    }
}

/// Configuration of the deterministic synthetic cohort. The healthy-control
/// trajectory is a drifting loop; the synthetic-patient trajectory scales
/// the loop frequency up and the amplitude down, decays the amplitude over
/// time (micrographia), and adds a tremor term plus piecewise multiplicative
/// velocity jitter.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub n_per_group: usize,
    pub seed: u64,
    pub duration_s: f64,
    pub loop_freq_hz: f64,
    pub drift_mm_s: f64,
    /// Horizontal loop amplitude in mm.
    pub loop_amp_x_mm: f64,
    /// Vertical loop amplitude in mm.
    pub loop_amp_y_mm: f64,
    /// Additive Gaussian sensor noise (mm standard deviation).
    pub noise_mm: f64,
    pub pd_tremor_hz: f64,
    /// Tremor amplitude in mm.
    pub pd_tremor_amp: f64,
    /// Relative range of the piecewise amplitude modulation, in [0, 1).
    pub pd_vel_jitter: f64,
    /// Exponential amplitude decay rate per second (micrographia).
    pub pd_size_decay: f64,
    /// Loop-frequency multiplier for patients (smaller, faster loops).
    pub pd_freq_scale: f64,
    /// Loop-amplitude multiplier for patients.
    pub pd_amp_scale: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_per_group: 30,
            seed: 42,
            duration_s: 5.0,
            loop_freq_hz: 1.75,
            drift_mm_s: 25.0,
            loop_amp_x_mm: 5.0,
            loop_amp_y_mm: 9.0,
            noise_mm: 0.05,
            pd_tremor_hz: 8.0,
            pd_tremor_amp: 0.4,
            pd_vel_jitter: 0.2,
            pd_size_decay: 0.25,
            pd_freq_scale: 2.2,
            pd_amp_scale: 0.6,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SignalError> {
        let bad = |msg: &str| Err(SignalError::BadConfig(String::from(msg)));
        if self.n_per_group < 1 {
            return bad("n_per_group must be at least 1");
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return bad("duration_s must be positive");
        }
        if !(self.loop_freq_hz.is_finite() && self.loop_freq_hz > 0.0) {
            return bad("loop_freq_hz must be positive");
        }
        if !(self.pd_tremor_hz.is_finite() && self.pd_tremor_hz > 0.0) {
            return bad("pd_tremor_hz must be positive");
        }
        for (name, v) in [
            ("drift_mm_s", self.drift_mm_s),
            ("loop_amp_x_mm", self.loop_amp_x_mm),
            ("loop_amp_y_mm", self.loop_amp_y_mm),
            ("noise_mm", self.noise_mm),
            ("pd_tremor_amp", self.pd_tremor_amp),
            ("pd_size_decay", self.pd_size_decay),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(SignalError::BadConfig(format!("{name} must be >= 0")));
            }
        }
        if !(self.pd_vel_jitter.is_finite() && (0.0..1.0).contains(&self.pd_vel_jitter)) {
            return bad("pd_vel_jitter must lie in [0, 1)");
        }
        if !(self.pd_freq_scale.is_finite() && self.pd_freq_scale > 0.0) {
            return bad("pd_freq_scale must be positive");
        }
        if !(self.pd_amp_scale.is_finite() && self.pd_amp_scale > 0.0) {
            return bad("pd_amp_scale must be positive");
        }
        Ok(())
    }
}

/// Nominal tablet sampling rate of the synthetic cohort.
pub const SYNTH_FS: f64 = 150.0;

/// Device resolution used when mapping mm to integer tablet units.
pub const TABLET_UNITS_PER_MM: f64 = 200.0;

/// Length of one jitter segment in seconds.
const JITTER_SEGMENT_S: f64 = 0.5;

/// Generates `2 * n_per_group` recordings (controls first, then patients),
/// deterministic in the seed and independent of generation order.
///
/// Subject randomness comes from counter-based streams keyed by
/// `seed ^ subject_index`. The patient with within-group index i shares its
/// base kinematics (age, gender, amplitude, frequency, drift draws) with
/// control i — the cohort is a matched case-control design — and draws all
/// patient-specific randomness from its own stream.
pub fn synth_cohort(cfg: &SynthConfig) -> Result<Vec<HandwritingRecording>, SignalError> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(2 * cfg.n_per_group);
    for subject_index in 0..2 * cfg.n_per_group {
        out.push(synth_subject(cfg, subject_index));
    }
    Ok(out)
}

/// Generates the recording of one subject; `subject_index` counts controls
/// 0..n_per_group and patients n_per_group..2*n_per_group.
pub fn synth_subject(cfg: &SynthConfig, subject_index: usize) -> HandwritingRecording {
    let pd = subject_index >= cfg.n_per_group;
    let group_index = subject_index % cfg.n_per_group;
    let mut base_rng = CounterRng::new(cfg.seed ^ group_index as u64);
    let n = libm::round(cfg.duration_s * SYNTH_FS) as usize;

    // Base draws in fixed order; patients then switch to their own stream,
    // so a matched pair differs only by the patient mechanisms.
    let age = libm::round(base_rng.uniform(55.0, 80.0) * 10.0) / 10.0;
    let gender = if base_rng.next_f64() < 0.5 { Gender::F } else { Gender::M };
    let amp_scale = base_rng.uniform(0.85, 1.15);
    let freq_scale = base_rng.uniform(0.9, 1.1);
    let drift_scale = base_rng.uniform(0.85, 1.15);
    let mut rng = if pd {
        CounterRng::new(cfg.seed ^ subject_index as u64)
    } else {
        base_rng
    };

    let mut freq = cfg.loop_freq_hz * freq_scale;
    let mut amp_x = cfg.loop_amp_x_mm * amp_scale;
    let mut amp_y = cfg.loop_amp_y_mm * amp_scale;
    let drift = cfg.drift_mm_s * drift_scale;
    if pd {
        freq *= cfg.pd_freq_scale;
        amp_x *= cfg.pd_amp_scale;
        amp_y *= cfg.pd_amp_scale;
    }
    let omega = 2.0 * core::f64::consts::PI * freq;

    // Piecewise-linear amplitude modulation knots (patients only).
    let n_knots = libm::ceil(cfg.duration_s / JITTER_SEGMENT_S) as usize + 1;
    let knots: Vec<f64> = if pd && cfg.pd_vel_jitter > 0.0 {
        (0..n_knots)
            .map(|_| rng.uniform(1.0 - cfg.pd_vel_jitter, 1.0 + cfg.pd_vel_jitter))
            .collect()
    } else {
        Vec::new()
    };
    let (tremor_phase_x, tremor_phase_y) = if pd {
        (
            rng.uniform(0.0, 2.0 * core::f64::consts::PI),
            rng.uniform(0.0, 2.0 * core::f64::consts::PI),
        )
    } else {
        (0.0, 0.0)
    };
    let tremor_omega = 2.0 * core::f64::consts::PI * cfg.pd_tremor_hz;

    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 / SYNTH_FS;
        let envelope = if pd { libm::exp(-cfg.pd_size_decay * t) } else { 1.0 };
        let modulation = if knots.is_empty() {
            1.0
        } else {
            let pos = t / JITTER_SEGMENT_S;
            let seg = (libm::floor(pos) as usize).min(n_knots - 2);
            let frac = pos - seg as f64;
            knots[seg] + (knots[seg + 1] - knots[seg]) * frac
        };
        let osc = envelope * modulation;
        let mut x = drift * t + amp_x * osc * libm::sin(omega * t);
        let mut y = amp_y * osc * libm::sin(omega * t + core::f64::consts::FRAC_PI_2);
        if pd {
            x += cfg.pd_tremor_amp * libm::sin(tremor_omega * t + tremor_phase_x);
            y += cfg.pd_tremor_amp * libm::sin(tremor_omega * t + tremor_phase_y);
        }
        if cfg.noise_mm > 0.0 {
            x += cfg.noise_mm * rng.next_normal();
            y += cfg.noise_mm * rng.next_normal();
        }
        let pressure =
            512 + libm::round(120.0 * libm::sin(2.0 * core::f64::consts::PI * 0.6 * t)) as i32;
        let azimuth =
            1500 + libm::round(90.0 * libm::sin(2.0 * core::f64::consts::PI * 0.3 * t)) as i32;
        let tilt =
            550 + libm::round(40.0 * libm::cos(2.0 * core::f64::consts::PI * 0.2 * t)) as i32;
        samples.push(PenSample {
            x: x * TABLET_UNITS_PER_MM,
            y: y * TABLET_UNITS_PER_MM,
            t,
            on_surface: true,
            pressure,
            azimuth,
            tilt,
        });
    }

    HandwritingRecording {
        samples,
        fs: SYNTH_FS,
        subject_id: format!("{}{:03}", if pd { "PD" } else { "HC" }, group_index + 1),
        label: Some(if pd { Label::Pd } else { Label::Hc }),
        age: Some(age),
        gender: Some(gender),
        time_unit: TimeUnit::HundredNanoseconds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn rec_with_buttons(buttons: &[u8]) -> HandwritingRecording {
        let samples = buttons
            .iter()
            .enumerate()
            .map(|(i, &b)| PenSample {
                x: i as f64,
                y: 2.0 * i as f64,
                t: i as f64 / 150.0,
                on_surface: b == 1,
                pressure: 0,
                azimuth: 0,
                tilt: 0,
            })
            .collect();
        HandwritingRecording {
            samples,
            fs: 150.0,
            subject_id: "S".to_string(),
            label: None,
            age: None,
            gender: None,
            time_unit: TimeUnit::HundredNanoseconds,
        }
    }

    #[test]
    fn parse_three_line_file_at_150hz() {
        // gaps of 66670 ticks of 100ns = 6.667 ms
        let text = "3\n10 20 0 1 1500 550 600\n11 21 66670 1 1500 550 600\n12 22 133340 1 1500 550 600\n";
        let rec = parse_svc(text).unwrap();
        assert_eq!(rec.fs, 150.0);
        assert_eq!(rec.samples.len(), 3);
        assert_eq!(rec.time_unit, TimeUnit::HundredNanoseconds);
        assert_eq!(rec.samples[0].t, 0.0);
        assert!((rec.samples[1].t - 6.667e-3).abs() < 1e-12);
        assert_eq!(rec.samples[2].x, 12.0);
    }

    #[test]
    fn parse_millisecond_timestamps() {
        let text = "3\n0 0 0 1 0 0 0\n1 1 7 1 0 0 0\n2 2 13 1 0 0 0\n";
        let rec = parse_svc(text).unwrap();
        assert_eq!(rec.time_unit, TimeUnit::Milliseconds);
        assert_eq!(rec.fs, 154.0); // reciprocal of the 6.5 ms median gap, rounded
    }

    #[test]
    fn parse_count_mismatch() {
        let text = "5\n0 0 0 1 0 0 0\n1 1 100000 1 0 0 0\n2 2 200000 1 0 0 0\n3 3 300000 1 0 0 0\n";
        assert_eq!(
            parse_svc(text),
            Err(SignalError::CountMismatch { header: 5, body: 4 })
        );
    }

    #[test]
    fn parse_malformed_line_carries_line_number() {
        let text = "2\n0 0 0 1 0 0 0\n1 oops 100000 1 0 0 0\n";
        match parse_svc(text) {
            Err(SignalError::Malformed { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected malformed error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_bad_button_and_nonmonotone_time() {
        let bad_button = "2\n0 0 0 2 0 0 0\n1 1 100000 1 0 0 0\n";
        assert!(matches!(
            parse_svc(bad_button),
            Err(SignalError::Malformed { line: 2, .. })
        ));
        let backwards = "3\n0 0 0 1 0 0 0\n1 1 100000 1 0 0 0\n2 2 100000 1 0 0 0\n";
        assert_eq!(
            parse_svc(backwards),
            Err(SignalError::NonMonotoneTime { index: 2 })
        );
    }

    #[test]
    fn parse_single_stroke_from_button_pattern() {
        let text = "4\n0 0 0 0 0 0 0\n1 1 66670 1 0 0 0\n2 2 133340 1 0 0 0\n3 3 200010 0 0 0 0\n";
        let rec = parse_svc(text).unwrap();
        let strokes = segment_strokes(&rec);
        assert_eq!(strokes.len(), 1);
        assert_eq!(strokes[0].x.len(), 2);
        assert_eq!(strokes[0].start_index, 1);
    }

    #[test]
    fn svc_round_trip_is_bit_exact_on_integer_recordings() {
        let text = "3\n10 -20 0 1 1500 550 600\n11 21 66670 0 1490 551 610\n12 22 133340 1 1480 552 620\n";
        let rec = parse_svc(text).unwrap();
        let rewritten = write_svc(&rec);
        assert_eq!(parse_svc(&rewritten).unwrap(), rec);
        assert_eq!(rewritten, text);
    }

    #[test]
    fn segment_runs_and_drop_short() {
        let rec = rec_with_buttons(&[1, 1, 1, 0, 1, 1]);
        let strokes = segment_strokes(&rec);
        assert_eq!(strokes.len(), 2);
        assert_eq!(strokes[0].x.len(), 3);
        assert_eq!(strokes[1].x.len(), 2);
        assert_eq!(strokes[1].start_index, 4);

        assert!(segment_strokes(&rec_with_buttons(&[0, 0, 0, 0])).is_empty());
        // a single on-surface sample between zeros is dropped
        assert!(segment_strokes(&rec_with_buttons(&[0, 1, 0])).is_empty());
    }

    #[test]
    fn segmentation_partitions_on_surface_samples() {
        let rec = rec_with_buttons(&[1, 1, 0, 1, 1, 1, 0, 0, 1, 1]);
        let strokes = segment_strokes(&rec);
        let mut covered = vec![false; rec.samples.len()];
        for s in &strokes {
            for i in s.start_index..s.start_index + s.x.len() {
                assert!(!covered[i], "sample {i} in two strokes");
                covered[i] = true;
            }
        }
        for (i, s) in rec.samples.iter().enumerate() {
            assert_eq!(covered[i], s.on_surface, "sample {i}");
        }
    }

    fn stroke_from(xs: Vec<f64>) -> Stroke {
        let n = xs.len();
        let ys: Vec<f64> = (0..n).map(|i| i as f64).collect();
        Stroke {
            x: SampledSignal::new(xs, 1.0 / 150.0).unwrap(),
            y: SampledSignal::new(ys, 1.0 / 150.0).unwrap(),
            start_index: 0,
        }
    }

    #[test]
    fn repair_replaces_spike_by_interpolation() {
        let mut xs: Vec<f64> = (0..21).map(|i| i as f64).collect();
        xs[4] = 1000.0;
        let repaired = repair_outliers(&stroke_from(xs)).unwrap();
        assert_eq!(repaired.x.values()[4], 4.0);
        assert_eq!(repaired.x.values()[3], 3.0);
    }

    #[test]
    fn repair_leaves_constant_and_linear_channels_alone() {
        let constant = stroke_from(vec![5.0; 20]);
        let repaired = repair_outliers(&constant).unwrap();
        assert_eq!(repaired.x.values(), constant.x.values());

        let ramp = stroke_from((0..20).map(|i| i as f64).collect());
        let repaired = repair_outliers(&ramp).unwrap();
        assert_eq!(repaired.x.values(), ramp.x.values());
    }

    #[test]
    fn repair_boundary_extension() {
        let mut xs: Vec<f64> = (0..21).map(|i| i as f64).collect();
        xs[0] = -1000.0;
        xs[20] = 2000.0;
        let repaired = repair_outliers(&stroke_from(xs)).unwrap();
        assert_eq!(repaired.x.values()[0], 1.0);
        assert_eq!(repaired.x.values()[20], 19.0);
    }

    #[test]
    fn repair_bridges_heavy_contamination() {
        // minority cluster far from the median gets flagged wholesale and
        // bridged from the last clean sample
        let mut xs: Vec<f64> = (0..13).map(|i| i as f64 * 0.01).collect();
        xs.extend([1e6; 7]);
        let repaired = repair_outliers(&stroke_from(xs)).unwrap();
        assert!(repaired.x.values().iter().all(|&v| v < 1.0));
        assert_eq!(repaired.x.values()[19], 0.12);
    }

    #[test]
    fn repair_is_idempotent_on_spiky_signals() {
        let mut xs: Vec<f64> = (0..120)
            .map(|i| 100.0 * libm::sin(0.1 * i as f64) + 0.5 * i as f64)
            .collect();
        xs[17] = 1e5;
        xs[18] = -2e5;
        xs[80] = 9e4;
        let once = repair_outliers(&stroke_from(xs)).unwrap();
        let twice = repair_outliers(&once).unwrap();
        assert_eq!(once.x.values(), twice.x.values());
        assert_eq!(once.y.values(), twice.y.values());
    }

    #[test]
    fn synth_is_deterministic_in_seed() {
        let cfg = SynthConfig {
            n_per_group: 2,
            seed: 7,
            ..SynthConfig::default()
        };
        let a = synth_cohort(&cfg).unwrap();
        let b = synth_cohort(&cfg).unwrap();
        assert_eq!(a, b);
        let svc_a: Vec<String> = a.iter().map(write_svc).collect();
        let svc_b: Vec<String> = b.iter().map(write_svc).collect();
        assert_eq!(svc_a, svc_b);

        let other = synth_cohort(&SynthConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn synth_output_passes_parser_and_yields_strokes() {
        let cfg = SynthConfig {
            n_per_group: 2,
            seed: 11,
            ..SynthConfig::default()
        };
        for rec in synth_cohort(&cfg).unwrap() {
            let text = write_svc(&rec);
            let parsed = parse_svc(&text).unwrap();
            assert_eq!(parsed.fs, 150.0);
            assert!(!segment_strokes(&parsed).is_empty());
        }
    }

    #[test]
    fn synth_rejects_bad_config() {
        let bad = SynthConfig {
            n_per_group: 0,
            ..SynthConfig::default()
        };
        assert!(synth_cohort(&bad).is_err());
        let bad = SynthConfig {
            pd_vel_jitter: 1.0,
            ..SynthConfig::default()
        };
        assert!(synth_cohort(&bad).is_err());
    }

    #[test]
    fn matched_pairs_share_base_draws() {
        let cfg = SynthConfig {
            n_per_group: 3,
            seed: 1234,
            ..SynthConfig::default()
        };
        let cohort = synth_cohort(&cfg).unwrap();
        for i in 0..3 {
            let hc = &cohort[i];
            let pd = &cohort[i + 3];
            assert_eq!(hc.label, Some(Label::Hc));
            assert_eq!(pd.label, Some(Label::Pd));
            assert_eq!(hc.subject_id, format!("HC{:03}", i + 1));
            assert_eq!(pd.subject_id, format!("PD{:03}", i + 1));
            // twins share the base stream
            assert_eq!(hc.age, pd.age);
            assert_eq!(hc.gender, pd.gender);
            // but patient trajectories differ from their control twin
            assert_ne!(hc.samples, pd.samples);
        }
    }
}

//! Measurement pipeline applied to synthetic or external waveforms:
//! filtering, analytic envelope, instantaneous frequency, spectrogram,
//! rate-to-resistance extraction, rotation direction, probe correction.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

/// Decimation blocks discarded at each end of an envelope trace to
/// suppress transform edge effects.
const EDGE_GUARD_BLOCKS: usize = 5;
/// Default decimated envelope rate, Hz.
pub const DEFAULT_ENVELOPE_RATE: f64 = 62.5;
/// Default smoothing window for the extracted resistance, s.
pub const DEFAULT_SMOOTHING_S: f64 = 0.2;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("invalid band: need 0 < f_lo < f_hi < sample_rate/2")]
    InvalidBand,
    #[error("input too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("amplitude must be positive on the evaluated window")]
    NonPositiveAmplitude,
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

/// A set of simultaneously sampled voltage channels.
#[derive(Debug, Clone)]
pub struct Waveform {
    pub sample_rate: f64,
    /// Channel name and sample series, volt; equal lengths.
    pub channels: Vec<(String, Vec<f64>)>,
    /// Time of the first sample, s.
    pub t0: f64,
}

impl Waveform {
    pub fn validate(&self) -> Result<(), SignalError> {
        if !(self.sample_rate > 0.0) {
            return Err(SignalError::InvalidParams("sample_rate must be > 0".into()));
        }
        if self.channels.len() > 3 {
            return Err(SignalError::InvalidParams(
                "at most 3 channels supported".into(),
            ));
        }
        if let Some((_, first)) = self.channels.first() {
            if self.channels.iter().any(|(_, c)| c.len() != first.len()) {
                return Err(SignalError::InvalidParams(
                    "channel lengths differ".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, |(_, c)| c.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Envelope, unwrapped phase, and instantaneous frequency of one channel.
#[derive(Debug, Clone)]
pub struct EnvelopeTrace {
    /// Sample times, s.
    pub t: Vec<f64>,
    /// Peak (not rms) voltage amplitude.
    pub amplitude: Vec<f64>,
    /// Unwrapped phase, rad.
    pub phase: Vec<f64>,
    /// Instantaneous frequency, Hz.
    pub f_inst: Vec<f64>,
}

/// Zero-phase Butterworth band-pass applied in the frequency domain.
/// One analog pass has squared magnitude `1 / (1 + W^{2n})` with
/// `W = (f^2 - f_lo f_hi) / (f (f_hi - f_lo))`; the forward-backward
/// (zero-phase) application squares it again, so the spectrum is scaled
/// by `1 / (1 + W^{2n})` with no phase shift and twice the stopband
/// slope of a single pass.
pub fn bandpass(
    w: &Waveform,
    f_lo: f64,
    f_hi: f64,
    order: u32,
) -> Result<Waveform, SignalError> {
    w.validate()?;
    if !(f_lo > 0.0 && f_lo < f_hi && f_hi < w.sample_rate / 2.0) {
        return Err(SignalError::InvalidBand);
    }
    let n = w.len();
    if n < 2 {
        return Err(SignalError::TooShort { needed: 2, got: n });
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let mut out = w.clone();
    for (_, samples) in &mut out.channels {
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft.process(&mut buf);
        for (k, c) in buf.iter_mut().enumerate() {
            // Frequency of bin k (negative above n/2).
            let kf = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            let f = (kf * w.sample_rate / n as f64).abs();
            let gain = if f == 0.0 {
                0.0
            } else {
                let w_arg = (f * f - f_lo * f_hi) / (f * (f_hi - f_lo));
                1.0 / (1.0 + w_arg.powi(2 * order as i32))
            };
            *c *= gain;
        }
        ifft.process(&mut buf);
        for (v, c) in samples.iter_mut().zip(&buf) {
            *v = c.re / n as f64;
        }
    }
    Ok(out)
}

/// Analytic-signal envelope of every channel via the one-sided spectrum.
/// `decimate_to` block-averages the output down to the given rate and
/// discards an edge guard; `None` keeps the full rate.
pub fn analytic_envelope(
    w: &Waveform,
    decimate_to: Option<f64>,
) -> Result<Vec<EnvelopeTrace>, SignalError> {
    w.validate()?;
    let n = w.len();
    if n < 64 {
        return Err(SignalError::TooShort { needed: 64, got: n });
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let mut traces = Vec::with_capacity(w.channels.len());
    for (_, samples) in &w.channels {
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft.process(&mut buf);
        // One-sided spectrum: double positive frequencies, zero negative.
        for (k, c) in buf.iter_mut().enumerate() {
            if k == 0 || (n % 2 == 0 && k == n / 2) {
                // keep as-is
            } else if k < n.div_ceil(2) {
                *c *= 2.0;
            } else {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        ifft.process(&mut buf);
        let scale = 1.0 / n as f64;
        let analytic: Vec<Complex64> = buf.into_iter().map(|c| c * scale).collect();

        let amplitude: Vec<f64> = analytic.iter().map(|c| c.norm()).collect();
        let mut phase: Vec<f64> = analytic.iter().map(|c| c.arg()).collect();
        unwrap_phase(&mut phase);
        let dt = 1.0 / w.sample_rate;
        let f_inst = central_diff(&phase, dt)
            .into_iter()
            .map(|d| d / TAU)
            .collect::<Vec<_>>();
        let t: Vec<f64> = (0..n).map(|i| w.t0 + i as f64 * dt).collect();
        let full = EnvelopeTrace {
            t,
            amplitude,
            phase,
            f_inst,
        };
        traces.push(match decimate_to {
            Some(rate) => decimate(&full, w.sample_rate, rate)?,
            None => full,
        });
    }
    Ok(traces)
}

fn unwrap_phase(phase: &mut [f64]) {
    let mut offset = 0.0;
    for i in 1..phase.len() {
        let raw = phase[i] + offset;
        let mut d = raw - phase[i - 1];
        while d > PI {
            offset -= TAU;
            d -= TAU;
        }
        while d < -PI {
            offset += TAU;
            d += TAU;
        }
        phase[i] = phase[i - 1] + d;
    }
}

fn central_diff(x: &[f64], dt: f64) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    d[0] = (x[1] - x[0]) / dt;
    d[n - 1] = (x[n - 1] - x[n - 2]) / dt;
    for i in 1..n - 1 {
        d[i] = (x[i + 1] - x[i - 1]) / (2.0 * dt);
    }
    d
}

/// Block-average an envelope trace down to `out_rate`, discarding the
/// edge guard blocks.
fn decimate(
    full: &EnvelopeTrace,
    in_rate: f64,
    out_rate: f64,
) -> Result<EnvelopeTrace, SignalError> {
    if !(out_rate > 0.0 && out_rate <= in_rate) {
        return Err(SignalError::InvalidParams(
            "decimation rate must be in (0, sample_rate]".into(),
        ));
    }
    let block = (in_rate / out_rate).round().max(1.0) as usize;
    let n_blocks = full.t.len() / block;
    if n_blocks <= 2 * EDGE_GUARD_BLOCKS {
        return Err(SignalError::TooShort {
            needed: (2 * EDGE_GUARD_BLOCKS + 1) * block,
            got: full.t.len(),
        });
    }
    let mean = |v: &[f64], b: usize| {
        v[b * block..(b + 1) * block].iter().sum::<f64>() / block as f64
    };
    let range = EDGE_GUARD_BLOCKS..n_blocks - EDGE_GUARD_BLOCKS;
    Ok(EnvelopeTrace {
        t: range.clone().map(|b| mean(&full.t, b)).collect(),
        amplitude: range.clone().map(|b| mean(&full.amplitude, b)).collect(),
        phase: range.clone().map(|b| mean(&full.phase, b)).collect(),
        f_inst: range.map(|b| mean(&full.f_inst, b)).collect(),
    })
}

/// Net series resistance from the envelope growth rate,
/// `R(t) = -2 L d(ln amplitude)/dt`, smoothed by a centered moving
/// average of `smooth_s` seconds.
pub fn extract_net_resistance(
    env: &EnvelopeTrace,
    l: f64,
    smooth_s: f64,
) -> Result<Vec<f64>, SignalError> {
    if env.amplitude.iter().any(|&a| !(a > 0.0)) {
        return Err(SignalError::NonPositiveAmplitude);
    }
    if env.t.len() < 3 {
        return Err(SignalError::TooShort {
            needed: 3,
            got: env.t.len(),
        });
    }
    let dt = (env.t[env.t.len() - 1] - env.t[0]) / (env.t.len() - 1) as f64;
    let log_amp: Vec<f64> = env.amplitude.iter().map(|a| a.ln()).collect();
    let r: Vec<f64> = central_diff(&log_amp, dt)
        .into_iter()
        .map(|d| -2.0 * l * d)
        .collect();
    let half = ((smooth_s / dt / 2.0).round() as usize).min(r.len() / 2);
    Ok(moving_average(&r, half))
}

fn moving_average(x: &[f64], half: usize) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            x[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Short-time Fourier magnitude of the first channel, Hann window,
/// in dB relative to the grid maximum.
#[derive(Debug, Clone)]
pub struct Spectrogram {
    /// Window-center times, s.
    pub t: Vec<f64>,
    /// Frequency bins, Hz.
    pub f: Vec<f64>,
    /// `db[time][freq]`, dB re grid max (0 at the maximum).
    pub db: Vec<Vec<f64>>,
}

pub fn spectrogram(
    w: &Waveform,
    window_len: usize,
    hop: usize,
) -> Result<Spectrogram, SignalError> {
    w.validate()?;
    if !window_len.is_power_of_two() {
        return Err(SignalError::InvalidParams(
            "window_len must be a power of two".into(),
        ));
    }
    if hop == 0 || hop > window_len {
        return Err(SignalError::InvalidParams(
            "hop must be in 1..=window_len".into(),
        ));
    }
    let samples = &w
        .channels
        .first()
        .ok_or_else(|| SignalError::InvalidParams("no channels".into()))?
        .1;
    if samples.len() < window_len {
        return Err(SignalError::TooShort {
            needed: window_len,
            got: samples.len(),
        });
    }
    let hann: Vec<f64> = (0..window_len)
        .map(|i| 0.5 * (1.0 - (TAU * i as f64 / window_len as f64).cos()))
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(window_len);
    let n_bins = window_len / 2 + 1;
    let mut t = Vec::new();
    let mut mags: Vec<Vec<f64>> = Vec::new();
    let mut start = 0;
    while start + window_len <= samples.len() {
        let mut buf: Vec<Complex64> = samples[start..start + window_len]
            .iter()
            .zip(&hann)
            .map(|(&v, &h)| Complex64::new(v * h, 0.0))
            .collect();
        fft.process(&mut buf);
        mags.push(buf[..n_bins].iter().map(|c| c.norm()).collect());
        t.push(w.t0 + (start + window_len / 2) as f64 / w.sample_rate);
        start += hop;
    }
    let peak = mags
        .iter()
        .flatten()
        .fold(0.0f64, |acc, &v| acc.max(v))
        .max(1e-300);
    let db = mags
        .into_iter()
        .map(|row| row.into_iter().map(|v| 20.0 * (v / peak).max(1e-15).log10()).collect())
        .collect();
    let f = (0..n_bins)
        .map(|k| k as f64 * w.sample_rate / window_len as f64)
        .collect();
    Ok(Spectrogram { t, f, db })
}

/// Frequency of the strongest bin in each spectrogram column.
pub fn ridge_frequencies(s: &Spectrogram) -> Vec<f64> {
    s.db
        .iter()
        .map(|row| {
            let mut k = 0;
            for (i, &v) in row.iter().enumerate() {
                if v > row[k] {
                    k = i;
                }
            }
            s.f[k]
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationDirection {
    CoRotating,
    CounterRotating,
    Indeterminate,
}

/// Classify the rotating-mode direction from the three measured phase
/// offsets (ordered P1, P2, P3). A cyclic progression of -2pi/3 between
/// consecutive phases means the mode co-rotates with the cylinder.
pub fn rotation_direction(phases: [f64; 3]) -> RotationDirection {
    const TOL: f64 = 0.3;
    let third = TAU / 3.0;
    let wrap = |x: f64| {
        let mut y = x % TAU;
        if y > PI {
            y -= TAU;
        }
        if y < -PI {
            y += TAU;
        }
        y
    };
    let diffs = [
        wrap(phases[1] - phases[0]),
        wrap(phases[2] - phases[1]),
        wrap(phases[0] - phases[2]),
    ];
    if diffs.iter().all(|d| (d + third).abs() < TOL) {
        RotationDirection::CoRotating
    } else if diffs.iter().all(|d| (d - third).abs() < TOL) {
        RotationDirection::CounterRotating
    } else {
        RotationDirection::Indeterminate
    }
}

/// Attenuated-probe conversion coefficients (one row of the measured
/// calibration table).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeCoeffs {
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

/// Convert a 10X-probe reading to the true coil voltage and phase,
/// `|V| = (v1 + v2 f) V10X^{v3}`, `phi = phi10X + p1 + p2 f + p3 f^2`
/// (phases in degrees, f in Hz).
pub fn probe_correction(
    v10x: f64,
    phi10x_deg: f64,
    f_hz: f64,
    coeffs: &ProbeCoeffs,
) -> (f64, f64) {
    let v = (coeffs.v1 + coeffs.v2 * f_hz) * v10x.powf(coeffs.v3);
    let phi = phi10x_deg + coeffs.p1 + coeffs.p2 * f_hz + coeffs.p3 * f_hz * f_hz;
    (v, phi)
}

//! Time-domain instability engine: a complex-envelope rotating-mode
//! amplitude coupled to the rotor angular momentum, with motor
//! controller models, thermal-noise seeding, an event timeline, and
//! failure detection.
//!
//! The model is narrowband: the circuits carry the symmetric rotating
//! mode at the instantaneous self-consistent resonance, and the net
//! resistance and inductance are phase means. Per step the coefficients
//! are frozen, the deterministic part advances with 4th-order
//! Runge-Kutta (halving the step on local-error breach), and thermal
//! noise is added as an Euler-Maruyama increment afterwards.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

use crate::circuit::{self_consistent_resonance, CircuitError, PhaseCircuit};
use crate::cylinder::{cylinder_impedance, CylinderError, CylinderParams, K_BOLTZMANN};
use crate::signal::Waveform;

/// Measurement resistor through which the phase voltages are read, ohm.
pub const R_MEAS: f64 = 5.0;
/// Relative local-error tolerance that triggers step halving.
const STEP_ERROR_TOL: f64 = 1e-8;
/// Maximum step-halving depth before the integrator gives up.
const MAX_HALVINGS: u32 = 16;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Cylinder(#[from] CylinderError),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("integrator unstable at t = {t} s (step-halving exhausted)")]
    IntegratorUnstable { t: f64 },
    #[error("sample rate {got} Hz below Nyquist for max signal frequency {max_f} Hz")]
    Undersampled { got: f64, max_f: f64 },
    #[error("waveform output not enabled in the scenario")]
    WaveformDisabled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerMode {
    ClosedLoop,
    OpenLoop,
}

/// Motor controller. Closed loop holds the rotation rate exactly; open
/// loop applies a proportional torque toward the demand speed, limited
/// by the torque cap.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Controller {
    pub mode: ControllerMode,
    /// Demand rotation rate, Hz.
    pub demand_speed: f64,
    /// Proportional gain, N m per rad/s of speed error.
    pub gain: f64,
    /// Torque limit for open-loop mode, N m.
    pub torque_cap: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailureLimits {
    /// Trip threshold for the per-phase variable-resistor power, W.
    pub max_resistor_power: f64,
    /// Trip threshold for the rms mode current, A.
    pub max_current: f64,
    /// Stop the run when a limit trips.
    #[serde(default = "default_true")]
    pub halt_on_failure: bool,
}

fn default_true() -> bool {
    true
}

impl Default for FailureLimits {
    fn default() -> Self {
        FailureLimits {
            max_resistor_power: 5.0,
            max_current: 2.0,
            halt_on_failure: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformOutput {
    pub enabled: bool,
    /// Output sample rate, Hz.
    pub sample_rate: f64,
}

impl Default for WaveformOutput {
    fn default() -> Self {
        WaveformOutput {
            enabled: false,
            sample_rate: 12_500.0,
        }
    }
}

/// A scheduled parameter change during the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimedEvent {
    /// Time at which the change applies, s.
    pub time: f64,
    #[serde(flatten)]
    pub action: EventAction,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "action", content = "value", rename_all = "snake_case")]
pub enum EventAction {
    /// Set the variable resistor of all three phases, ohm.
    #[serde(alias = "set_R_var")]
    SetRVar(f64),
    /// Set the controller demand speed, Hz.
    SetDemandSpeed(f64),
    SetControllerMode(ControllerMode),
}

/// Full description of one simulation run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub description: String,
    pub circuits: Vec<PhaseCircuit>,
    pub cylinder: CylinderParams,
    pub controller: Controller,
    /// Coil noise temperature, K.
    #[serde(default = "default_temperature")]
    pub noise_temperature: f64,
    #[serde(default)]
    pub seed: u64,
    /// Run length, s.
    pub duration: f64,
    /// Integration step, s.
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub events: Vec<TimedEvent>,
    #[serde(default)]
    pub failure: FailureLimits,
    #[serde(default)]
    pub waveform_output: WaveformOutput,
    /// Rotor speed at t = 0, Hz; defaults to the demand speed.
    #[serde(default)]
    pub initial_speed: Option<f64>,
    /// Mode amplitude at t = 0, A rms (noise-seeded runs start at 0).
    #[serde(default)]
    pub initial_amplitude: f64,
}

fn default_temperature() -> f64 {
    293.0
}

fn default_dt() -> f64 {
    5e-5
}

impl Scenario {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if self.circuits.len() != 3 {
            return Err(DynamicsError::InvalidScenario(format!(
                "need exactly 3 circuits, got {}",
                self.circuits.len()
            )));
        }
        for c in &self.circuits {
            c.validate()?;
        }
        self.cylinder.validate()?;
        if !(self.dt > 0.0) {
            return Err(DynamicsError::InvalidScenario("dt must be > 0".into()));
        }
        if !(self.duration > 0.0) {
            return Err(DynamicsError::InvalidScenario(
                "duration must be > 0".into(),
            ));
        }
        if !(self.noise_temperature >= 0.0) {
            return Err(DynamicsError::InvalidScenario(
                "noise_temperature must be >= 0".into(),
            ));
        }
        if self.events.windows(2).any(|w| w[0].time > w[1].time) {
            return Err(DynamicsError::InvalidScenario(
                "events must be sorted by time".into(),
            ));
        }
        if self.waveform_output.enabled {
            // The signal sits at the circuit resonance; demand a sample
            // rate of at least 4x the bare LC estimate of each phase.
            for c in &self.circuits {
                let f0 = crate::circuit::resonant_frequency(l0_estimate(c)?, c.c);
                if self.waveform_output.sample_rate < 4.0 * f0 {
                    return Err(DynamicsError::InvalidScenario(format!(
                        "waveform sample_rate {} Hz < 4x expected signal frequency {:.0} Hz",
                        self.waveform_output.sample_rate, f0
                    )));
                }
            }
        }
        Ok(())
    }
}

fn l0_estimate(c: &PhaseCircuit) -> Result<f64, CircuitError> {
    let (lo, hi) = c.l0.domain();
    Ok(c.l0.eval(0.5 * (lo + hi))?)
}

/// Instantaneous state of the reduced model.
#[derive(Debug, Clone, Copy)]
pub struct ModeState {
    /// Rotating-mode current envelope, A rms.
    pub amp: Complex64,
    /// Carrier frequency (self-consistent resonance), rad/s.
    pub omega_c: f64,
    /// Rotor angular velocity, rad/s.
    pub big_omega: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimEventKind {
    InstabilityOn,
    InstabilityOff,
    ComponentFailure,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimEvent {
    pub t: f64,
    pub kind: SimEventKind,
    pub detail: String,
}

/// One uniformly sampled record of the run.
#[derive(Debug, Clone, Copy)]
pub struct TraceRecord {
    pub t: f64,
    /// Mode current envelope, A rms.
    pub amp: Complex64,
    /// Integrated carrier phase, rad.
    pub carrier_phase: f64,
    /// Rotor rate, Hz.
    pub rot_hz: f64,
    /// Carrier frequency, Hz.
    pub f_inst: f64,
    /// Mean total series resistance of the mode, ohm.
    pub r_net: f64,
    /// Mean total series inductance of the mode, H.
    pub l_mode: f64,
    /// Per-phase voltage across the variable resistor, V rms.
    pub v_phase: [f64; 3],
    /// Field energy 3 L |amp|^2, J.
    pub e_field: f64,
    /// Rotor kinetic energy, J.
    pub e_rotor: f64,
    /// Heat dissipated in the cylinder so far, J.
    pub heat: f64,
}

#[derive(Debug, Clone)]
pub struct SimTrace {
    /// Step length between records, s.
    pub dt: f64,
    pub records: Vec<TraceRecord>,
    pub events: Vec<SimEvent>,
    /// Phase offsets of the three circuits, rad (for waveform synthesis).
    pub phase_offsets: [f64; 3],
    /// Largest per-step energy-bookkeeping residual, relative.
    pub max_energy_residual: f64,
    /// Total thermal-noise energy injected, J.
    pub noise_energy: f64,
}

/// Johnson noise current of a coil: `sqrt(k_B T / L)`, A rms.
pub fn thermal_noise_current(t_kelvin: f64, l: f64) -> f64 {
    (K_BOLTZMANN * t_kelvin / l).sqrt()
}

/// Torque the motor applies. Closed loop delivers whatever holds the
/// speed (`required_tau`), without limit; open loop is a clamped
/// proportional law around the demand speed.
pub fn motor_torque(controller: &Controller, big_omega: f64, required_tau: f64) -> f64 {
    match controller.mode {
        ControllerMode::ClosedLoop => required_tau,
        ControllerMode::OpenLoop => (controller.gain
            * (TAU * controller.demand_speed - big_omega))
            .clamp(-controller.torque_cap, controller.torque_cap),
    }
}

/// Per-step frozen coefficients of the reduced model.
struct StepCoeffs {
    /// Carrier = mean self-consistent resonance, Hz.
    f_c: f64,
    /// Mean non-cylinder series resistance, ohm.
    r_pos: f64,
    /// Mean cylinder resistance, ohm (negative above threshold).
    rho: f64,
    /// Mean total inductance, H.
    l_mode: f64,
}

impl StepCoeffs {
    fn r_net(&self) -> f64 {
        self.r_pos + self.rho
    }
}

fn step_coeffs(
    circuits: &[PhaseCircuit],
    cyl: &CylinderParams,
    rot_hz: f64,
    warm: &mut [f64; 3],
) -> Result<StepCoeffs, DynamicsError> {
    let mut f_sum = 0.0;
    for (k, c) in circuits.iter().enumerate() {
        let f = self_consistent_resonance(c, Some(cyl), rot_hz, Some(warm[k]))?;
        warm[k] = f;
        f_sum += f;
    }
    let f_c = f_sum / circuits.len() as f64;
    let omega = TAU * f_c;
    let (mut r_pos, mut rho, mut l_mode) = (0.0, 0.0, 0.0);
    for c in circuits {
        let r_m = c.r_m.eval(f_c).map_err(CircuitError::from)?;
        let l0 = c.l0.eval(f_c).map_err(CircuitError::from)?;
        let (cal_r, cal_l) = cylinder_impedance(cyl, l0, omega, TAU * rot_hz)?;
        r_pos += c.r0 + r_m + c.r_i + c.r_var;
        rho += cal_r;
        l_mode += l0 + cal_l;
    }
    let n = circuits.len() as f64;
    Ok(StepCoeffs {
        f_c,
        r_pos: r_pos / n,
        rho: rho / n,
        l_mode: l_mode / n,
    })
}

/// Integration state: amplitude, rotor speed, and energy accumulators
/// (motor work, circuit loss, cylinder heat), advanced together so the
/// bookkeeping shares the Runge-Kutta stages.
#[derive(Clone, Copy)]
struct IntState {
    a_re: f64,
    a_im: f64,
    big_omega: f64,
    w_motor: f64,
    w_loss: f64,
    q: f64,
}

fn derivative(
    s: &IntState,
    coeffs: &StepCoeffs,
    controller: &Controller,
    cyl: &CylinderParams,
) -> IntState {
    let amp2 = s.a_re * s.a_re + s.a_im * s.a_im;
    let omega_c = TAU * coeffs.f_c;
    let m = cyl.mode_m as f64;
    // Power delivered by the cylinder to the wave (positive above
    // threshold where rho < 0).
    let p_w = -coeffs.rho * 3.0 * amp2;
    let tau_em = m / omega_c * p_w;
    let tau_m = motor_torque(controller, s.big_omega, tau_em);
    let gamma = -coeffs.r_net() / (2.0 * coeffs.l_mode);
    let omega_minus = omega_c - m * s.big_omega;
    IntState {
        a_re: gamma * s.a_re,
        a_im: gamma * s.a_im,
        big_omega: (tau_m - tau_em) / cyl.inertia_j,
        w_motor: tau_m * s.big_omega,
        w_loss: 3.0 * coeffs.r_pos * amp2,
        q: -(omega_minus / omega_c) * p_w,
    }
}

fn rk4(
    s: &IntState,
    dt: f64,
    coeffs: &StepCoeffs,
    controller: &Controller,
    cyl: &CylinderParams,
) -> IntState {
    let add = |s: &IntState, d: &IntState, h: f64| IntState {
        a_re: s.a_re + h * d.a_re,
        a_im: s.a_im + h * d.a_im,
        big_omega: s.big_omega + h * d.big_omega,
        w_motor: s.w_motor + h * d.w_motor,
        w_loss: s.w_loss + h * d.w_loss,
        q: s.q + h * d.q,
    };
    let k1 = derivative(s, coeffs, controller, cyl);
    let k2 = derivative(&add(s, &k1, 0.5 * dt), coeffs, controller, cyl);
    let k3 = derivative(&add(s, &k2, 0.5 * dt), coeffs, controller, cyl);
    let k4 = derivative(&add(s, &k3, dt), coeffs, controller, cyl);
    IntState {
        a_re: s.a_re + dt / 6.0 * (k1.a_re + 2.0 * k2.a_re + 2.0 * k3.a_re + k4.a_re),
        a_im: s.a_im + dt / 6.0 * (k1.a_im + 2.0 * k2.a_im + 2.0 * k3.a_im + k4.a_im),
        big_omega: s.big_omega
            + dt / 6.0
                * (k1.big_omega + 2.0 * k2.big_omega + 2.0 * k3.big_omega + k4.big_omega),
        w_motor: s.w_motor
            + dt / 6.0 * (k1.w_motor + 2.0 * k2.w_motor + 2.0 * k3.w_motor + k4.w_motor),
        w_loss: s.w_loss
            + dt / 6.0 * (k1.w_loss + 2.0 * k2.w_loss + 2.0 * k3.w_loss + k4.w_loss),
        q: s.q + dt / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q),
    }
}

/// One frozen-coefficient step with local-error control: compare a full
/// step against two half steps and recurse on halves until the estimate
/// passes, keeping the more accurate result.
fn advance(
    s: &IntState,
    dt: f64,
    depth: u32,
    t: f64,
    coeffs: &StepCoeffs,
    controller: &Controller,
    cyl: &CylinderParams,
) -> Result<IntState, DynamicsError> {
    let full = rk4(s, dt, coeffs, controller, cyl);
    let mid = rk4(s, 0.5 * dt, coeffs, controller, cyl);
    let two = rk4(&mid, 0.5 * dt, coeffs, controller, cyl);
    let scale = (s.a_re * s.a_re + s.a_im * s.a_im).sqrt().max(1e-12);
    let err = ((full.a_re - two.a_re).hypot(full.a_im - two.a_im) / scale)
        .max((full.big_omega - two.big_omega).abs() / s.big_omega.abs().max(1.0));
    if err <= STEP_ERROR_TOL {
        return Ok(two);
    }
    if depth >= MAX_HALVINGS {
        return Err(DynamicsError::IntegratorUnstable { t });
    }
    let first = advance(s, 0.5 * dt, depth + 1, t, coeffs, controller, cyl)?;
    advance(&first, 0.5 * dt, depth + 1, t + 0.5 * dt, coeffs, controller, cyl)
}

/// Run the scenario. Deterministic for a fixed seed.
pub fn simulate(scenario: &Scenario) -> Result<SimTrace, DynamicsError> {
    scenario.validate()?;
    let mut circuits = scenario.circuits.clone();
    let mut controller = scenario.controller.clone();
    let cyl = &scenario.cylinder;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let dt = scenario.dt;
    let n_steps = (scenario.duration / dt).round() as usize;

    let rot0 = TAU * scenario.initial_speed.unwrap_or(controller.demand_speed);
    let mut state = IntState {
        a_re: scenario.initial_amplitude,
        a_im: 0.0,
        big_omega: rot0,
        w_motor: 0.0,
        w_loss: 0.0,
        q: 0.0,
    };
    let mut warm = {
        let f0 = self_consistent_resonance(&circuits[0], Some(cyl), rot0 / TAU, None)?;
        [f0; 3]
    };
    let mut carrier_phase = 0.0;
    let mut events = Vec::new();
    let mut records = Vec::with_capacity(n_steps + 1);
    let mut next_event = 0usize;
    let mut unstable = false;
    let mut max_residual = 0.0f64;
    let mut noise_energy = 0.0;
    let phase_offsets = [
        circuits[0].phase,
        circuits[1].phase,
        circuits[2].phase,
    ];

    let record = |records: &mut Vec<TraceRecord>,
                  circuits: &[PhaseCircuit],
                  s: &IntState,
                  coeffs: &StepCoeffs,
                  t: f64,
                  carrier_phase: f64| {
        let amp = Complex64::new(s.a_re, s.a_im);
        let mag = amp.norm();
        records.push(TraceRecord {
            t,
            amp,
            carrier_phase,
            rot_hz: s.big_omega / TAU,
            f_inst: coeffs.f_c,
            r_net: coeffs.r_net(),
            l_mode: coeffs.l_mode,
            v_phase: [
                circuits[0].r_var * mag,
                circuits[1].r_var * mag,
                circuits[2].r_var * mag,
            ],
            e_field: 3.0 * coeffs.l_mode * mag * mag,
            e_rotor: 0.5 * cyl.inertia_j * s.big_omega * s.big_omega,
            heat: s.q,
        });
    };

    let coeffs0 = step_coeffs(&circuits, cyl, state.big_omega / TAU, &mut warm)?;
    record(&mut records, &circuits, &state, &coeffs0, 0.0, carrier_phase);

    for step in 0..n_steps {
        let t = step as f64 * dt;
        // Apply scheduled parameter changes that have come due.
        while next_event < scenario.events.len() && scenario.events[next_event].time <= t {
            match scenario.events[next_event].action {
                EventAction::SetRVar(v) => {
                    for c in &mut circuits {
                        c.r_var = v;
                    }
                }
                EventAction::SetDemandSpeed(v) => controller.demand_speed = v,
                EventAction::SetControllerMode(m) => controller.mode = m,
            }
            next_event += 1;
        }

        let coeffs = step_coeffs(&circuits, cyl, state.big_omega / TAU, &mut warm)?;
        if (coeffs.r_net() < 0.0) != unstable {
            unstable = !unstable;
            events.push(SimEvent {
                t,
                kind: if unstable {
                    SimEventKind::InstabilityOn
                } else {
                    SimEventKind::InstabilityOff
                },
                detail: format!("R_net = {:.4} ohm at F = {:.2} Hz", coeffs.r_net(), state.big_omega / TAU),
            });
        }

        let before = state;
        state = advance(&state, dt, 0, t, &coeffs, &controller, cyl)?;

        // Energy bookkeeping with the frozen inductance at both ends of
        // the step; noise is added afterwards and accounted separately.
        {
            let e0 = 3.0 * coeffs.l_mode * (before.a_re.powi(2) + before.a_im.powi(2))
                + 0.5 * cyl.inertia_j * before.big_omega.powi(2);
            let e1 = 3.0 * coeffs.l_mode * (state.a_re.powi(2) + state.a_im.powi(2))
                + 0.5 * cyl.inertia_j * state.big_omega.powi(2);
            let dw_motor = state.w_motor - before.w_motor;
            let dw_loss = state.w_loss - before.w_loss;
            let dq = state.q - before.q;
            let residual = (e1 - e0) - (dw_motor - dw_loss - dq);
            let scale = [e1, dw_motor.abs(), dw_loss.abs(), dq.abs()]
                .into_iter()
                .fold(1e-30, f64::max);
            max_residual = max_residual.max(residual.abs() / scale);
        }

        // Thermal-noise increment, scaled so a stable circuit
        // equilibrates at the Johnson current sqrt(k_B T / L).
        if scenario.noise_temperature > 0.0 {
            let rate = coeffs.r_pos / coeffs.l_mode * K_BOLTZMANN * scenario.noise_temperature
                / coeffs.l_mode;
            let sigma = (rate * dt / 2.0).sqrt();
            let xi_re: f64 = StandardNormal.sample(&mut rng);
            let xi_im: f64 = StandardNormal.sample(&mut rng);
            let before2 = state.a_re.powi(2) + state.a_im.powi(2);
            state.a_re += sigma * xi_re;
            state.a_im += sigma * xi_im;
            let after2 = state.a_re.powi(2) + state.a_im.powi(2);
            noise_energy += 3.0 * coeffs.l_mode * (after2 - before2);
        }

        carrier_phase += TAU * coeffs.f_c * dt;
        let t_next = (step + 1) as f64 * dt;
        record(&mut records, &circuits, &state, &coeffs, t_next, carrier_phase);

        // Failure trip on resistor power or mode current.
        let amp2 = state.a_re.powi(2) + state.a_im.powi(2);
        let mag = amp2.sqrt();
        let worst_power = circuits
            .iter()
            .map(|c| c.r_var * amp2)
            .fold(0.0, f64::max);
        if worst_power > scenario.failure.max_resistor_power
            || mag > scenario.failure.max_current
        {
            events.push(SimEvent {
                t: t_next,
                kind: SimEventKind::ComponentFailure,
                detail: format!(
                    "resistor power {:.3} W, current {:.3} A rms",
                    worst_power, mag
                ),
            });
            if scenario.failure.halt_on_failure {
                break;
            }
        }
    }

    Ok(SimTrace {
        dt,
        records,
        events,
        phase_offsets,
        max_energy_residual: max_residual,
        noise_energy,
    })
}

/// Oscilloscope-like per-phase voltages across the measurement resistor:
/// `v_k(t) = sqrt(2) R_meas |amp(t)| cos(phi_c(t) + phi_k)`.
pub fn synthesize_waveform(trace: &SimTrace, sample_rate: f64) -> Result<Waveform, DynamicsError> {
    let max_f = trace
        .records
        .iter()
        .map(|r| r.f_inst)
        .fold(0.0, f64::max);
    if sample_rate < 2.0 * max_f {
        return Err(DynamicsError::Undersampled {
            got: sample_rate,
            max_f,
        });
    }
    let Some(first) = trace.records.first() else {
        return Err(DynamicsError::InvalidScenario("empty trace".into()));
    };
    let last_t = trace.records.last().expect("nonempty").t;
    let n = ((last_t - first.t) * sample_rate).floor() as usize + 1;
    let mut channels: Vec<(String, Vec<f64>)> = (1..=3)
        .map(|k| (format!("v{k}"), Vec::with_capacity(n)))
        .collect();
    for i in 0..n {
        let t = first.t + i as f64 / sample_rate;
        // Locate the bracketing records (uniform step) and interpolate
        // the envelope and carrier phase linearly.
        let pos = (t - first.t) / trace.dt;
        let j = (pos.floor() as usize).min(trace.records.len() - 2);
        let frac = (pos - j as f64).clamp(0.0, 1.0);
        let (a, b) = (&trace.records[j], &trace.records[j + 1]);
        let mag = a.amp.norm() * (1.0 - frac) + b.amp.norm() * frac;
        let phi = a.carrier_phase * (1.0 - frac) + b.carrier_phase * frac;
        for (k, (_, ch)) in channels.iter_mut().enumerate() {
            ch.push(f64::sqrt(2.0) * R_MEAS * mag * (phi + trace.phase_offsets[k]).cos());
        }
    }
    Ok(Waveform {
        sample_rate,
        channels,
        t0: first.t,
    })
}

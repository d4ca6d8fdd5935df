//! Acceptance suite: one test and one printed PASS/FAIL line per
//! criterion. Criterion 15 (byte-identical CLI artifacts) lives in the
//! CLI crate's integration tests.

mod support;

use std::f64::consts::TAU;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use zeldovich_core::bessel::bessel_j;
use zeldovich_core::cylinder::{cylinder_impedance, reflection_s, CylinderParams};
use zeldovich_core::dynamics::{simulate, synthesize_waveform, SimEventKind, SimTrace};
use zeldovich_core::presets::{load_circuits, load_scenario};
use zeldovich_core::signal::{
    analytic_envelope, bandpass, extract_net_resistance, rotation_direction, RotationDirection,
    Waveform,
};
use zeldovich_core::steady_state::{fit_cylinder_coupling, frequency_sweep, stability_map};

/// Print the per-criterion verdict line; panic on failure.
fn verdict(criterion: u32, what: &str, pass: bool, detail: String) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion:2} {tag}: {what} ({detail})");
    assert!(pass, "criterion {criterion} failed: {what} ({detail})");
}

fn trace_643() -> &'static SimTrace {
    static TRACE: OnceLock<SimTrace> = OnceLock::new();
    TRACE.get_or_init(|| simulate(&load_scenario("fig4_openloop_643").unwrap()).unwrap())
}

fn trace_660() -> &'static SimTrace {
    static TRACE: OnceLock<SimTrace> = OnceLock::new();
    TRACE.get_or_init(|| simulate(&load_scenario("fig4_openloop_660").unwrap()).unwrap())
}

fn trace_700() -> &'static SimTrace {
    static TRACE: OnceLock<SimTrace> = OnceLock::new();
    TRACE.get_or_init(|| simulate(&load_scenario("closedloop_700").unwrap()).unwrap())
}

#[test]
fn criterion_01_bessel_kernel_vs_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xBE55E1);
    let mut worst_small: f64 = 0.0;
    let mut worst_large: f64 = 0.0;
    let mut worst_recurrence: f64 = 0.0;
    for i in 0..1000 {
        // Uniform over the radius-50 disk (radius-5 for every third draw).
        let r_max = if i % 3 == 0 { 5.0 } else { 50.0 };
        let radius = r_max * rng.gen::<f64>().sqrt();
        let angle = TAU * rng.gen::<f64>();
        let z = Complex64::from_polar(radius, angle);
        let order = rng.gen_range(0u32..=4);
        let got = bessel_j(order, z).unwrap();
        let (ore, oim) = support::bessel_j_oracle(order, z.re, z.im);
        let want = Complex64::new(ore, oim);
        let rel = (got - want).norm() / want.norm().max(1e-300);
        if r_max == 5.0 {
            worst_small = worst_small.max(rel);
        } else {
            worst_large = worst_large.max(rel);
        }
        // Recurrence residual J_{n-1} + J_{n+1} - (2n/z) J_n, scaled.
        if order >= 1 && z.norm() > 1e-3 {
            let jm1 = bessel_j(order - 1, z).unwrap();
            let jp1 = bessel_j(order + 1, z).unwrap();
            let resid = jm1 + jp1 - 2.0 * order as f64 / z * got;
            let scale = jm1.norm().max(jp1.norm()).max(got.norm()).max(1e-300);
            worst_recurrence = worst_recurrence.max(resid.norm() / scale);
        }
    }
    verdict(
        1,
        "complex Bessel kernel matches the extended-precision oracle",
        worst_small < 1e-10 && worst_large < 1e-8 && worst_recurrence < 1e-8,
        format!(
            "max rel err {worst_small:.2e} for |z|<=5, {worst_large:.2e} for |z|<=50, recurrence {worst_recurrence:.2e}"
        ),
    );
}

#[test]
fn criterion_02_threshold_exactness() {
    let mut cyl = CylinderParams::aluminium_default();
    cyl.mu_r = 1.0;
    let omega = TAU * 1181.0;
    let mut crossing = None;
    let mut prev: Option<(f64, f64)> = None;
    let mut rot = 585.0;
    while rot <= 596.0 {
        let (r, _) = cylinder_impedance(&cyl, 0.131, omega, TAU * rot).unwrap();
        if let Some((prot, pr)) = prev {
            if pr > 0.0 && r <= 0.0 {
                crossing = Some((prot, rot));
            }
        }
        prev = Some((rot, r));
        rot += 0.1;
    }
    let pass = crossing.is_some_and(|(lo, hi)| lo <= 590.5 && 590.5 <= hi + 0.1);
    verdict(
        2,
        "cylinder resistance changes sign at F = f/2 = 590.5 Hz",
        pass,
        format!("sign change bracket {crossing:?} (0.1 Hz grid)"),
    );
}

#[test]
fn criterion_03_reflection_limits() {
    let mut unit = CylinderParams::aluminium_default();
    unit.mu_r = 1.0;
    // At the threshold the rotating-frame frequency vanishes.
    let omega = TAU * 1181.0;
    let s0 = reflection_s(&unit, omega, omega / 2.0).unwrap();

    // Deep-skin limit, converging as O(delta/a); one Richardson
    // extrapolation step in a/delta removes the leading term.
    let p = CylinderParams::aluminium_default();
    let om = (200.0 / p.a).powi(2) / (p.sigma * p.mu());
    let s1 = reflection_s(&p, om, 0.0).unwrap();
    let s2 = reflection_s(&p, 2.0 * om, 0.0).unwrap();
    let root2 = f64::sqrt(2.0);
    let extrap = (s2 * root2 - s1) / (root2 - 1.0);
    let geom = -(0.020f64 / 0.021).powi(4);
    let pass = s0.norm() < 1e-12 && (extrap.re - geom).abs() < 1e-3 && extrap.im.abs() < 1e-3;
    verdict(
        3,
        "S vanishes at the threshold and tends to -(a/r)^4 deep in the skin regime",
        pass,
        format!(
            "|S(threshold)| = {:.2e}, deep-skin S = {:.5} vs {:.5}",
            s0.norm(),
            extrap.re,
            geom
        ),
    );
}

#[test]
fn criterion_04_no_cylinder_resonance() {
    let preset = load_circuits("table1_highR").unwrap();
    let f_grid = preset.sweep.f_grid();
    let sweep = frequency_sweep(&preset.circuits, None, 0.0, &f_grid).unwrap();
    let p1 = &sweep.phases[0];
    let amp_ok = (p1.amp_peak - 0.0916).abs() < 0.05 * 0.0916;
    let freq_ok = (p1.f_peak - 1136.0).abs() < 15.0;
    verdict(
        4,
        "no-cylinder P1 sweep peaks at 0.0916 V near 1136 Hz",
        amp_ok && freq_ok,
        format!("peak {:.5} V at {:.1} Hz", p1.amp_peak, p1.f_peak),
    );
}

#[test]
fn criterion_05_fit_round_trip() {
    let mut cyl = CylinderParams::aluminium_default();
    cyl.coupling_a = 0.397;
    let omega = TAU * 1181.0;
    let make_data = |noise: f64, seed: u64| -> Vec<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..16)
            .map(|i| {
                let rot = 500.0 + 20.0 * i as f64;
                let (r, _) = cylinder_impedance(&cyl, 0.131, omega, TAU * rot).unwrap();
                let eps: f64 = rng.sample(StandardNormal);
                (rot, (129.0 + r) * (1.0 + noise * eps))
            })
            .collect()
    };
    let noisy = fit_cylinder_coupling(&make_data(0.01, 5), 1181.0, &cyl, 0.131).unwrap();
    let clean = fit_cylinder_coupling(&make_data(0.0, 0), 1181.0, &cyl, 0.131).unwrap();
    let noisy_ok = (noisy.coupling_a - 0.397).abs() < 0.02 * 0.397
        && (noisy.offset - 129.0).abs() < 0.02 * 129.0;
    let clean_ok = (clean.coupling_a - 0.397).abs() < 1e-6 * 0.397
        && (clean.offset - 129.0).abs() < 1e-6 * 129.0;
    verdict(
        5,
        "coupling fit recovers A = 0.397, R_circ = 129 from synthetic data",
        noisy_ok && clean_ok,
        format!(
            "1% noise -> A = {:.4}, R_circ = {:.2}; clean -> A = {:.8}, R_circ = {:.5}",
            noisy.coupling_a, noisy.offset, clean.coupling_a, clean.offset
        ),
    );
}

#[test]
fn criterion_06_near_cancellation_at_680() {
    // Fitted parameters, low-R reading: the constant part of the fit
    // shifted by the measured resistor change.
    let mut cyl = CylinderParams::aluminium_default();
    cyl.coupling_a = 0.397;
    let (rho, _) = cylinder_impedance(&cyl, 0.131, TAU * 1181.0, TAU * 680.0).unwrap();
    let r_total = (129.0 - 21.2) + rho;
    verdict(
        6,
        "total R approaches zero at F = 680 Hz in the low-R configuration",
        r_total.abs() < 10.0,
        format!("R = {r_total:.2} ohm"),
    );
}

#[test]
fn criterion_07_gain_exceeds_ten() {
    let preset = load_circuits("table1_lowR").unwrap();
    let f_grid = preset.sweep.f_grid();
    let bare = frequency_sweep(&preset.circuits, None, 0.0, &f_grid).unwrap();
    let spun = frequency_sweep(&preset.circuits, Some(&preset.cylinder), 700.0, &f_grid).unwrap();
    let gain = spun.phases[0].amp_peak / bare.phases[0].amp_peak;
    verdict(
        7,
        "low-R peak amplitude gain at F = 700 Hz exceeds 10x",
        gain > 10.0,
        format!("gain {gain:.1}x"),
    );
}

#[test]
fn criterion_08_instability_map() {
    let high = load_circuits("table1_highR").unwrap();
    let low = load_circuits("table1_lowR").unwrap();
    let map_high = stability_map(
        &high.circuits,
        Some(&high.cylinder),
        &high.map.f_grid(),
        &high.map.rot_grid(),
    )
    .unwrap();
    let map_low = stability_map(
        &low.circuits,
        Some(&low.cylinder),
        &low.map.f_grid(),
        &low.map.rot_grid(),
    )
    .unwrap();
    let high_count = map_high.unstable.iter().flatten().filter(|&&u| u).count();
    let mut low_count = 0;
    let mut min_rot = f64::INFINITY;
    for row in &map_low.unstable {
        for (j, &u) in row.iter().enumerate() {
            if u {
                low_count += 1;
                min_rot = min_rot.min(map_low.rot_grid[j]);
            }
        }
    }
    let pass = high_count == 0 && low_count > 0 && min_rot >= 600.0;
    verdict(
        8,
        "high-R map fully stable; low-R map unstable only above ~600 Hz rotation",
        pass,
        format!("high: {high_count} unstable cells; low: {low_count} cells, min F {min_rot:.0} Hz"),
    );
}

#[test]
fn criterion_09_runaway_self_terminates() {
    let trace = trace_643();
    let amps: Vec<f64> = trace.records.iter().map(|r| r.amp.norm()).collect();
    let peak_idx = amps
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    let peak = amps[peak_idx];
    // Thermal baseline: median amplitude over the first half second.
    let n_base = (0.5 / trace.dt) as usize;
    let mut base: Vec<f64> = amps[..n_base].to_vec();
    base.sort_by(f64::total_cmp);
    let baseline = base[base.len() / 2].max(1e-300);
    let decades = (peak / baseline).log10();

    // Slowdown stage: from the half-peak crossing to the peak, the
    // carrier frequency must not increase.
    let half_idx = amps[..peak_idx]
        .iter()
        .position(|&a| a > 0.5 * peak)
        .unwrap_or(peak_idx);
    let mut monotone = true;
    for w in trace.records[half_idx..=peak_idx].windows(2) {
        if w[1].f_inst > w[0].f_inst + 1e-6 {
            monotone = false;
        }
    }

    let last = trace.records.last().unwrap();
    let decayed = last.amp.norm() < 0.1 * peak;
    let stable_at_end = last.r_net > 0.0;
    let pass = decades >= 3.0 && monotone && decayed && stable_at_end;
    verdict(
        9,
        "643 Hz open-loop runaway grows >= 3 decades, chirps down, and self-terminates",
        pass,
        format!(
            "growth {decades:.1} decades, carrier monotone: {monotone}, final amp/peak = {:.2e}, final R_net = {:.2} ohm, final F = {:.1} Hz",
            last.amp.norm() / peak,
            last.r_net,
            last.rot_hz
        ),
    );
}

#[test]
fn criterion_10_revival_cycles() {
    let trace = trace_660();
    let amps: Vec<f64> = trace.records.iter().map(|r| r.amp.norm()).collect();
    let peak = amps.iter().cloned().fold(0.0, f64::max);
    // Count excursions above 30% of the global peak separated by dips
    // below 3%.
    let mut cycles = 0;
    let mut armed = true;
    for &a in &amps {
        if armed && a > 0.3 * peak {
            cycles += 1;
            armed = false;
        } else if !armed && a < 0.03 * peak {
            armed = true;
        }
    }
    verdict(
        10,
        "660 Hz open-loop run shows repeated growth/decay cycles",
        cycles >= 2,
        format!("{cycles} cycles, peak {peak:.3} A rms"),
    );
}

#[test]
fn criterion_11_closed_loop_failure() {
    let trace = trace_700();
    let failure = trace
        .events
        .iter()
        .find(|e| e.kind == SimEventKind::ComponentFailure);
    verdict(
        11,
        "closed-loop 700 Hz run trips component_failure in finite time",
        failure.is_some(),
        match failure {
            Some(e) => format!("tripped at t = {:.3} s ({})", e.t, e.detail),
            None => "no failure event".into(),
        },
    );
}

#[test]
fn criterion_12_pipeline_closure() {
    // Synthetic fixture: e^{1.3 t} envelope at the resonance frequency.
    let fs = 12_500.0;
    let n = (2.0 * fs) as usize;
    let samples: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            1e-3 * (1.3 * t).exp() * (TAU * 1181.0 * t).cos()
        })
        .collect();
    let w = Waveform {
        sample_rate: fs,
        channels: vec![("v1".into(), samples)],
        t0: 0.0,
    };
    let env = &analytic_envelope(&w, Some(62.5)).unwrap()[0];
    let r = extract_net_resistance(env, 0.131, 0.2).unwrap();
    let mid = r[r.len() / 2];
    let fixture_ok = (mid - (-0.3406)).abs() < 0.01 * 0.3406;

    // Closed loop through the simulator: reconstruct the programmed
    // R_net during the constant-growth stage of the 643 Hz run.
    let trace = trace_643();
    let full = synthesize_waveform(trace, 12_500.0).unwrap();
    let filtered = bandpass(&full, 1100.0, 1250.0, 4).unwrap();
    let env = &analytic_envelope(&filtered, Some(62.5)).unwrap()[0];
    // Pick the window where the envelope climbs from 1e-6 to 1e-4 of
    // its peak: well above numerical floor, well before saturation.
    let peak = env.amplitude.iter().cloned().fold(0.0, f64::max);
    let lo = env
        .amplitude
        .iter()
        .position(|&a| a > 1e-6 * peak)
        .unwrap();
    let hi = env
        .amplitude
        .iter()
        .position(|&a| a > 1e-4 * peak)
        .unwrap();
    let l_mode = trace.records[trace.records.len() / 2].l_mode;
    let r_series = extract_net_resistance(env, l_mode, 0.2).unwrap();
    let extracted = r_series[(lo + hi) / 2];
    // Programmed value at the matching simulation time.
    let t_mid = env.t[(lo + hi) / 2];
    let programmed = trace.records[(t_mid / trace.dt) as usize].r_net;
    let closure_ok = (extracted - programmed).abs() < 0.05 * programmed.abs();
    verdict(
        12,
        "analysis pipeline reproduces the programmed net resistance",
        fixture_ok && closure_ok,
        format!(
            "fixture R = {mid:.4} ohm (want -0.3406); simulated stage R = {extracted:.3} vs programmed {programmed:.3} ohm"
        ),
    );
}

#[test]
fn criterion_13_energy_bookkeeping() {
    let mut worst = 0.0f64;
    let mut heat_ok = true;
    for trace in [trace_643(), trace_660(), trace_700()] {
        worst = worst.max(trace.max_energy_residual);
        for w in trace.records.windows(2) {
            if w[1].heat < w[0].heat {
                heat_ok = false;
            }
        }
    }
    verdict(
        13,
        "energy residual < 1e-6 per step and cylinder heat never decreases",
        worst < 1e-6 && heat_ok,
        format!("max residual {worst:.2e}, heat monotone: {heat_ok}"),
    );
}

#[test]
fn criterion_14_rotation_direction() {
    // Measure the phase of each simulated channel near the amplitude
    // peak of the 660 Hz run and classify the rotation direction.
    let trace = trace_660();
    let wave = synthesize_waveform(trace, 12_500.0).unwrap();
    let envs = analytic_envelope(&wave, Some(62.5)).unwrap();
    let peak_idx = envs[0]
        .amplitude
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    let phases = [
        envs[0].phase[peak_idx],
        envs[1].phase[peak_idx],
        envs[2].phase[peak_idx],
    ];
    let direction = rotation_direction(phases);
    verdict(
        14,
        "three-phase output is classified as co-rotating with the cylinder",
        direction == RotationDirection::CoRotating,
        format!("direction {direction:?} from phases {phases:?}"),
    );
}

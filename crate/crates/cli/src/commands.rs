//! The five pipelines behind the subcommands. Each loads a typed config,
//! runs the corresponding model code, and writes its artifacts atomically
//! into the output directory.

use std::f64::consts::TAU;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Deserialize;
use zeldovich_core::cylinder::{cylinder_impedance, CylinderParams};
use zeldovich_core::dynamics::{simulate as run_scenario, synthesize_waveform, Scenario, SimTrace};
use zeldovich_core::presets::CircuitsPreset;
use zeldovich_core::signal::{
    analytic_envelope, bandpass, extract_net_resistance, rotation_direction, spectrogram,
    ridge_frequencies, RotationDirection, Waveform,
};
use zeldovich_core::steady_state::{
    fit_cylinder_coupling, frequency_sweep, stability_map, SweepResult,
};

use crate::config;
use crate::output::{prepare_dir, write_artifact, Csv, Int, Num, Str};
use crate::plot::{Plot, COLORS};
use crate::{CliError, CommonArgs};

fn domain(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

// ---------------------------------------------------------------- sweep

pub fn sweep(common: &CommonArgs, no_cylinder: bool) -> Result<(), CliError> {
    let preset: CircuitsPreset = config::load(common, false)?;
    let dir = prepare_dir(&common.out)?;
    let f_grid = preset.sweep.f_grid();
    if f_grid.is_empty() {
        return Err(CliError::Usage("sweep grid is empty".into()));
    }

    let baseline = frequency_sweep(&preset.circuits, None, 0.0, &f_grid).map_err(domain)?;
    let mut results: Vec<SweepResult> = Vec::new();
    if no_cylinder {
        results.push(baseline.clone());
    } else {
        for &rot in &preset.sweep.rotations {
            results.push(
                frequency_sweep(&preset.circuits, Some(&preset.cylinder), rot, &f_grid)
                    .map_err(domain)?,
            );
        }
    }

    let mut csv = Csv::new(&[
        "f_hz", "F_hz", "phase_label", "Vo_re", "Vo_im", "R_ohm", "L_henry",
    ]);
    for res in &results {
        for phase in &res.phases {
            for (i, &f) in res.f_grid.iter().enumerate() {
                csv.row(&[
                    Num(f),
                    Num(res.rot_hz),
                    Str(&phase.label),
                    Num(phase.v_o[i].re),
                    Num(phase.v_o[i].im),
                    Num(phase.r_ohm[i]),
                    Num(phase.l_henry[i]),
                ]);
            }
        }
    }
    write_artifact(&dir, "sweep.csv", &csv.finish())?;
    write_artifact(&dir, "sweep.svg", &sweep_svg(&results, &baseline, no_cylinder)?)?;

    if !common.quiet {
        for res in &results {
            let p = &res.phases[0];
            println!(
                "F = {} Hz: P1 peak {:.5} V at {:.1} Hz",
                res.rot_hz, p.amp_peak, p.f_peak
            );
        }
    }
    Ok(())
}

/// P1 amplitude curves, one per rotation rate, plus the dashed
/// no-cylinder baseline.
fn sweep_svg(
    results: &[SweepResult],
    baseline: &SweepResult,
    no_cylinder: bool,
) -> Result<String, CliError> {
    let f_grid = &baseline.f_grid;
    let mut y_max: f64 = 0.0;
    for res in results.iter().chain(std::iter::once(baseline)) {
        for phase in &res.phases {
            for v in &phase.v_o {
                y_max = y_max.max(v.norm());
            }
        }
    }
    let mut plot = Plot::new(
        (f_grid[0], *f_grid.last().unwrap()),
        (0.0, y_max * 1.05),
        "drive frequency f (Hz)",
        "|Vo| P1 (V)",
    )?;
    let base_pts: Vec<(f64, f64)> = f_grid
        .iter()
        .zip(&baseline.phases[0].v_o)
        .map(|(&f, v)| (f, v.norm()))
        .collect();
    plot.line(&base_pts, "#555555", true);
    plot.legend(0, "#555555", true, "no cylinder");
    if !no_cylinder {
        for (k, res) in results.iter().enumerate() {
            let pts: Vec<(f64, f64)> = res
                .f_grid
                .iter()
                .zip(&res.phases[0].v_o)
                .map(|(&f, v)| (f, v.norm()))
                .collect();
            let color = COLORS[k % COLORS.len()];
            plot.line(&pts, color, false);
            plot.legend(k + 1, color, false, &format!("F = {} Hz", res.rot_hz));
        }
    }
    Ok(plot.finish())
}

// ------------------------------------------------------------------ map

pub fn map(common: &CommonArgs, no_cylinder: bool) -> Result<(), CliError> {
    let preset: CircuitsPreset = config::load(common, false)?;
    let dir = prepare_dir(&common.out)?;
    let f_grid = preset.map.f_grid();
    let rot_grid = preset.map.rot_grid();
    if f_grid.is_empty() || rot_grid.is_empty() {
        return Err(CliError::Usage("map grid is empty".into()));
    }
    let cyl = if no_cylinder {
        None
    } else {
        Some(&preset.cylinder)
    };
    let map = stability_map(&preset.circuits, cyl, &f_grid, &rot_grid).map_err(domain)?;

    let mut r_csv = Csv::new(&["f_hz", "F_hz", "phase_label", "R_ohm"]);
    for (p, phase_r) in map.r_total.iter().enumerate() {
        let label = format!("P{}", p + 1);
        for (i, &f) in map.f_grid.iter().enumerate() {
            for (j, &rot) in map.rot_grid.iter().enumerate() {
                r_csv.row(&[Num(f), Num(rot), Str(&label), Num(phase_r[i][j])]);
            }
        }
    }
    write_artifact(&dir, "map.csv", &r_csv.finish())?;

    let mut u_csv = Csv::new(&["f_hz", "F_hz", "unstable"]);
    let mut n_unstable: i64 = 0;
    for (i, &f) in map.f_grid.iter().enumerate() {
        for (j, &rot) in map.rot_grid.iter().enumerate() {
            let u = map.unstable[i][j];
            n_unstable += i64::from(u);
            u_csv.row(&[Num(f), Num(rot), Int(i64::from(u))]);
        }
    }
    write_artifact(&dir, "instability.csv", &u_csv.finish())?;

    // Shaded unstable region over the (F, f) plane.
    let mut plot = Plot::new(
        (rot_grid[0], *rot_grid.last().unwrap()),
        (f_grid[0], *f_grid.last().unwrap()),
        "rotation frequency F (Hz)",
        "drive frequency f (Hz)",
    )?;
    let df = if f_grid.len() > 1 {
        f_grid[1] - f_grid[0]
    } else {
        1.0
    };
    let drot = if rot_grid.len() > 1 {
        rot_grid[1] - rot_grid[0]
    } else {
        1.0
    };
    for (i, &f) in map.f_grid.iter().enumerate() {
        for (j, &rot) in map.rot_grid.iter().enumerate() {
            if map.unstable[i][j] {
                plot.cell(
                    rot - drot / 2.0,
                    rot + drot / 2.0,
                    f - df / 2.0,
                    f + df / 2.0,
                    "#d62728",
                    0.55,
                );
            }
        }
    }
    plot.legend(0, "#d62728", false, "unstable (net R < 0)");
    write_artifact(&dir, "map.svg", &plot.finish())?;

    if !common.quiet {
        println!(
            "{} of {} cells unstable",
            n_unstable,
            f_grid.len() * rot_grid.len()
        );
    }
    Ok(())
}

// ------------------------------------------------------------------ fit

/// Config for `fit`: measured R(F) data inline, or a synthetic-data
/// generator for round-trip exercises.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FitConfig {
    #[serde(default)]
    #[allow(dead_code)]
    description: String,
    /// Drive frequency, Hz.
    f_hz: f64,
    /// Coil inductance entering R = R_circ + A rho(F) L, henry.
    l_coil: f64,
    /// Cylinder geometry; the coupling field is the fit's start value.
    cylinder: CylinderParams,
    /// Inline data rows [F_hz, R_ohm].
    #[serde(default)]
    data: Vec<[f64; 2]>,
    #[serde(default)]
    generate: Option<GenerateSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenerateSpec {
    coupling_a: f64,
    r_circ: f64,
    rot_start: f64,
    rot_step: f64,
    count: usize,
    /// Relative noise level on R.
    #[serde(default)]
    noise: f64,
    #[serde(default)]
    seed: u64,
}

pub fn fit(common: &CommonArgs) -> Result<(), CliError> {
    // Route --seed into the generator block.
    let mut common = common.clone();
    if let Some(seed) = common.seed.take() {
        common.overrides.push(format!("generate.seed={seed}"));
    }
    let cfg: FitConfig = config::load(&common, false)?;
    let dir = prepare_dir(&common.out)?;

    let data: Vec<(f64, f64)> = if let Some(gen) = &cfg.generate {
        if !cfg.data.is_empty() {
            return Err(CliError::Usage(
                "fit config has both inline data and a generator".into(),
            ));
        }
        let mut cyl = cfg.cylinder.clone();
        cyl.coupling_a = gen.coupling_a;
        let mut rng = ChaCha8Rng::seed_from_u64(gen.seed);
        (0..gen.count)
            .map(|i| {
                let rot = gen.rot_start + gen.rot_step * i as f64;
                let (r, _) = cylinder_impedance(&cyl, cfg.l_coil, TAU * cfg.f_hz, TAU * rot)
                    .map_err(domain)?;
                let eps: f64 = rng.sample(StandardNormal);
                Ok((rot, (gen.r_circ + r) * (1.0 + gen.noise * eps)))
            })
            .collect::<Result<_, CliError>>()?
    } else {
        cfg.data.iter().map(|&[f, r]| (f, r)).collect()
    };
    if data.is_empty() {
        return Err(CliError::Usage("fit config provides no data".into()));
    }

    let result =
        fit_cylinder_coupling(&data, cfg.f_hz, &cfg.cylinder, cfg.l_coil).map_err(domain)?;

    let mut csv = Csv::new(&["F_hz", "R_ohm"]);
    for &(rot, r) in &data {
        csv.row(&[Num(rot), Num(r)]);
    }
    write_artifact(&dir, "fit_data.csv", &csv.finish())?;

    let json = serde_json::json!({
        "coupling_a": result.coupling_a,
        "r_circ_ohm": result.offset,
        "residual_rms_ohm": result.residual_rms,
        "iterations": result.iterations,
        "one_sided": result.one_sided,
    });
    write_artifact(
        &dir,
        "fit_result.json",
        &format!("{}\n", serde_json::to_string_pretty(&json).unwrap()),
    )?;
    if !common.quiet {
        println!(
            "A = {:.6}, R_circ = {:.4} ohm, rms {:.4} ohm",
            result.coupling_a, result.offset, result.residual_rms
        );
    }
    Ok(())
}

// ------------------------------------------------------------- simulate

pub fn simulate(common: &CommonArgs) -> Result<(), CliError> {
    let scenario: Scenario = config::load(common, true)?;
    let dir = prepare_dir(&common.out)?;
    let trace = run_scenario(&scenario).map_err(domain)?;

    let mut csv = Csv::new(&[
        "t_s",
        "amp_re",
        "amp_im",
        "rot_hz",
        "f_inst_hz",
        "r_net_ohm",
        "l_mode_henry",
        "v1_volt",
        "v2_volt",
        "v3_volt",
        "e_field_j",
        "e_rotor_j",
        "heat_j",
    ]);
    for rec in &trace.records {
        csv.row(&[
            Num(rec.t),
            Num(rec.amp.re),
            Num(rec.amp.im),
            Num(rec.rot_hz),
            Num(rec.f_inst),
            Num(rec.r_net),
            Num(rec.l_mode),
            Num(rec.v_phase[0]),
            Num(rec.v_phase[1]),
            Num(rec.v_phase[2]),
            Num(rec.e_field),
            Num(rec.e_rotor),
            Num(rec.heat),
        ]);
    }
    write_artifact(&dir, "trace.csv", &csv.finish())?;

    let mut events = String::new();
    for e in &trace.events {
        events.push_str(&serde_json::to_string(e).unwrap());
        events.push('\n');
    }
    write_artifact(&dir, "events.jsonl", &events)?;

    if scenario.waveform_output.enabled {
        let wave = synthesize_waveform(&trace, scenario.waveform_output.sample_rate)
            .map_err(domain)?;
        let mut wcsv = Csv::new(&["t_s", "v1_volt", "v2_volt", "v3_volt"]);
        let n = wave.channels[0].1.len();
        for i in 0..n {
            wcsv.row(&[
                Num(wave.t0 + i as f64 / wave.sample_rate),
                Num(wave.channels[0].1[i]),
                Num(wave.channels[1].1[i]),
                Num(wave.channels[2].1[i]),
            ]);
        }
        write_artifact(&dir, "waveform.csv", &wcsv.finish())?;
    }

    write_artifact(&dir, "trace.svg", &trace_svg(&trace)?)?;
    if !common.quiet {
        let peak = trace
            .records
            .iter()
            .map(|r| r.amp.norm())
            .fold(0.0, f64::max);
        println!(
            "{} steps, peak amplitude {peak:.4} A rms, {} events, max energy residual {:.2e}",
            trace.records.len(),
            trace.events.len(),
            trace.max_energy_residual
        );
        for e in &trace.events {
            println!("  t = {:.4} s: {:?} ({})", e.t, e.kind, e.detail);
        }
    }
    Ok(())
}

/// Two stacked curves on a shared time axis: log10 amplitude and rotor
/// rate (rescaled into the same frame, see legend).
fn trace_svg(trace: &SimTrace) -> Result<String, CliError> {
    let t_end = trace.records.last().map(|r| r.t).unwrap_or(0.0);
    let amps: Vec<f64> = trace
        .records
        .iter()
        .map(|r| r.amp.norm().max(1e-12).log10())
        .collect();
    let a_min = amps.iter().cloned().fold(f64::INFINITY, f64::min);
    let a_max = amps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (a_max - a_min).max(1e-6);
    let mut plot = Plot::new(
        (0.0, t_end.max(1e-9)),
        (a_min - 0.05 * span, a_max + 0.05 * span),
        "time (s)",
        "log10 |amplitude| (A rms)",
    )?;
    let pts: Vec<(f64, f64)> = trace
        .records
        .iter()
        .zip(&amps)
        .map(|(r, &a)| (r.t, a))
        .collect();
    plot.line(&pts, COLORS[0], false);
    plot.legend(0, COLORS[0], false, "log10 amplitude");
    // Rotor rate rescaled onto the amplitude frame.
    let r_min = trace
        .records
        .iter()
        .map(|r| r.rot_hz)
        .fold(f64::INFINITY, f64::min);
    let r_max = trace
        .records
        .iter()
        .map(|r| r.rot_hz)
        .fold(f64::NEG_INFINITY, f64::max);
    let r_span = (r_max - r_min).max(1e-9);
    let rot_pts: Vec<(f64, f64)> = trace
        .records
        .iter()
        .map(|r| {
            (
                r.t,
                a_min + (r.rot_hz - r_min) / r_span * (a_max - a_min).max(1e-9),
            )
        })
        .collect();
    plot.line(&rot_pts, COLORS[1], true);
    plot.legend(
        1,
        COLORS[1],
        true,
        &format!("rotor {r_min:.1}..{r_max:.1} Hz (rescaled)"),
    );
    Ok(plot.finish())
}

// -------------------------------------------------------------- analyze

/// Config for `analyze`: a waveform CSV plus filter/extraction settings.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnalyzeConfig {
    #[serde(default)]
    #[allow(dead_code)]
    description: String,
    /// Input CSV with columns t_s, v1_volt[, v2_volt, v3_volt].
    waveform_csv: String,
    /// Band-pass corner frequencies, Hz.
    band_lo_hz: f64,
    band_hi_hz: f64,
    /// Butterworth order.
    #[serde(default = "default_order")]
    order: u32,
    /// Mode inductance for net-resistance extraction, henry.
    l_henry: f64,
    /// Envelope smoothing window, s.
    #[serde(default = "default_smooth")]
    smooth_s: f64,
    /// Envelope decimation rate, Hz.
    #[serde(default = "default_decimate")]
    decimate_to_hz: f64,
    /// Spectrogram window length (power of two) and hop, samples.
    #[serde(default = "default_window")]
    spectrogram_window: usize,
    #[serde(default = "default_hop")]
    spectrogram_hop: usize,
}

fn default_order() -> u32 {
    4
}
fn default_smooth() -> f64 {
    0.2
}
fn default_decimate() -> f64 {
    62.5
}
fn default_window() -> usize {
    4096
}
fn default_hop() -> usize {
    1024
}

fn read_waveform_csv(path: &Path) -> Result<Waveform, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read waveform '{}': {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Usage("waveform CSV is empty".into()))?;
    let names: Vec<&str> = header.split(',').collect();
    if names.len() < 2 || names[0] != "t_s" {
        return Err(CliError::Usage(
            "waveform CSV must start with a t_s column".into(),
        ));
    }
    let mut t = Vec::new();
    let mut channels: Vec<(String, Vec<f64>)> = names[1..]
        .iter()
        .map(|n| (n.trim_end_matches("_volt").to_string(), Vec::new()))
        .collect();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() {
            return Err(CliError::Usage(format!(
                "waveform CSV row {} has {} fields, expected {}",
                lineno + 2,
                fields.len(),
                names.len()
            )));
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| {
                CliError::Usage(format!("waveform CSV row {}: bad number '{s}'", lineno + 2))
            })
        };
        t.push(parse(fields[0])?);
        for (k, f) in fields[1..].iter().enumerate() {
            channels[k].1.push(parse(f)?);
        }
    }
    if t.len() < 2 {
        return Err(CliError::Usage("waveform CSV has fewer than 2 rows".into()));
    }
    let sample_rate = (t.len() - 1) as f64 / (t[t.len() - 1] - t[0]);
    Ok(Waveform {
        sample_rate,
        channels,
        t0: t[0],
    })
}

pub fn analyze(common: &CommonArgs) -> Result<(), CliError> {
    let cfg: AnalyzeConfig = config::load(common, false)?;
    let dir = prepare_dir(&common.out)?;
    let csv_path = Path::new(&cfg.waveform_csv);
    // Relative input paths resolve against the config file's directory.
    let resolved = if csv_path.is_relative() {
        Path::new(&common.config)
            .parent()
            .map(|p| p.join(csv_path))
            .unwrap_or_else(|| csv_path.to_path_buf())
    } else {
        csv_path.to_path_buf()
    };
    let wave = read_waveform_csv(&resolved)?;

    let filtered = bandpass(&wave, cfg.band_lo_hz, cfg.band_hi_hz, cfg.order).map_err(domain)?;
    let envs = analytic_envelope(&filtered, Some(cfg.decimate_to_hz)).map_err(domain)?;

    let mut env_csv_header = vec!["t_s".to_string()];
    for (name, _) in &filtered.channels {
        env_csv_header.push(format!("{name}_amp_volt"));
        env_csv_header.push(format!("{name}_f_inst_hz"));
    }
    let header_refs: Vec<&str> = env_csv_header.iter().map(String::as_str).collect();
    let mut env_csv = Csv::new(&header_refs);
    for i in 0..envs[0].t.len() {
        let mut row = vec![Num(envs[0].t[i])];
        for env in &envs {
            row.push(Num(env.amplitude[i]));
            row.push(Num(env.f_inst[i]));
        }
        env_csv.row(&row);
    }
    write_artifact(&dir, "envelope.csv", &env_csv.finish())?;

    let r_net = extract_net_resistance(&envs[0], cfg.l_henry, cfg.smooth_s).map_err(domain)?;
    let mut r_csv = Csv::new(&["t_s", "r_net_ohm"]);
    for (i, &r) in r_net.iter().enumerate() {
        r_csv.row(&[Num(envs[0].t[i]), Num(r)]);
    }
    write_artifact(&dir, "resistance.csv", &r_csv.finish())?;

    let spec = spectrogram(&filtered, cfg.spectrogram_window, cfg.spectrogram_hop)
        .map_err(domain)?;
    let ridge = ridge_frequencies(&spec);
    let mut s_csv = Csv::new(&["t_s", "f_hz", "power_db"]);
    for (i, &t) in spec.t.iter().enumerate() {
        for (j, &f) in spec.f.iter().enumerate() {
            s_csv.row(&[Num(t), Num(f), Num(spec.db[i][j])]);
        }
    }
    write_artifact(&dir, "spectrogram.csv", &s_csv.finish())?;

    // Rotation direction from the three channel phases at peak amplitude,
    // when three channels are present.
    let direction = if envs.len() >= 3 {
        let peak_idx = envs[0]
            .amplitude
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        rotation_direction([
            envs[0].phase[peak_idx],
            envs[1].phase[peak_idx],
            envs[2].phase[peak_idx],
        ])
    } else {
        RotationDirection::Indeterminate
    };
    let peak_amp = envs[0].amplitude.iter().cloned().fold(0.0, f64::max);
    let direction_label = match direction {
        RotationDirection::CoRotating => "co_rotating",
        RotationDirection::CounterRotating => "counter_rotating",
        RotationDirection::Indeterminate => "indeterminate",
    };
    let json = serde_json::json!({
        "rotation_direction": direction_label,
        "peak_amplitude_volt": peak_amp,
        "ridge_f_start_hz": ridge.first(),
        "ridge_f_end_hz": ridge.last(),
        "min_r_net_ohm": r_net.iter().cloned().fold(f64::INFINITY, f64::min),
    });
    write_artifact(
        &dir,
        "analysis.json",
        &format!("{}\n", serde_json::to_string_pretty(&json).unwrap()),
    )?;
    if !common.quiet {
        println!(
            "peak envelope {peak_amp:.4} V, rotation {direction_label}, \
             min net R {:.3} ohm",
            r_net.iter().cloned().fold(f64::INFINITY, f64::min)
        );
    }
    Ok(())
}

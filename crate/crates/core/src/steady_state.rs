//! Frequency/rotation sweeps, resonance-peak and gain extraction,
//! instability-region classification, and least-squares fitting of the
//! cylinder coupling and inductance offset to R/L-vs-rotation data.

use num_complex::Complex64;
use std::f64::consts::TAU;
use thiserror::Error;

use crate::circuit::{
    coil_cylinder_impedance, extract_impedance, total_rl, CircuitError, PhaseCircuit,
};
use crate::cylinder::{cylinder_impedance, CylinderError, CylinderParams};

/// Maximum Levenberg-Marquardt iterations per start.
const LM_MAX_ITER: usize = 200;
/// Relative step for the central-difference Jacobian.
const LM_JACOBIAN_STEP: f64 = 1e-6;
/// Bounds for the coupling strength.
const A_BOUNDS: (f64, f64) = (1e-6, 10.0);
/// Bounds for the constant circuit resistance, ohm.
const R_CIRC_BOUNDS: (f64, f64) = (0.0, 1e4);

#[derive(Debug, Error)]
pub enum SteadyStateError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Cylinder(#[from] CylinderError),
    #[error("need at least {needed} data points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("fit did not converge within {0} iterations")]
    NoConvergence(usize),
}

/// Sweep of one phase: output voltage and the impedance derived from it
/// at every grid frequency, plus the interpolated resonance peak.
#[derive(Debug, Clone)]
pub struct PhaseSweep {
    pub label: String,
    /// Complex output voltage per grid frequency, volt.
    pub v_o: Vec<Complex64>,
    /// Total series resistance per grid frequency, ohm.
    pub r_ohm: Vec<f64>,
    /// Total series inductance per grid frequency, henry.
    pub l_henry: Vec<f64>,
    /// Peak frequency from 3-point quadratic interpolation, Hz.
    pub f_peak: f64,
    /// Interpolated peak amplitude, volt.
    pub amp_peak: f64,
}

/// Result of [`frequency_sweep`] over all phases at one rotation rate.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub f_grid: Vec<f64>,
    /// Cylinder rotation rate, Hz.
    pub rot_hz: f64,
    pub phases: Vec<PhaseSweep>,
}

/// Total resistance per phase and the instability classification on an
/// (f, F) grid. A cell is unstable iff even the worst (largest R) phase
/// has negative total resistance.
#[derive(Debug, Clone)]
pub struct StabilityMap {
    pub f_grid: Vec<f64>,
    pub rot_grid: Vec<f64>,
    /// `r_total[phase][i_f][i_rot]`, ohm.
    pub r_total: Vec<Vec<Vec<f64>>>,
    /// `unstable[i_f][i_rot]`.
    pub unstable: Vec<Vec<bool>>,
}

/// Nonlinear least-squares fit result. `offset` is the constant circuit
/// resistance R_circ (ohm) for the coupling fit, or the inductance L0
/// (henry) for the inductance fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub coupling_a: f64,
    pub offset: f64,
    /// Root-mean-square residual in the units of the fitted data.
    pub residual_rms: f64,
    pub iterations: usize,
    /// Set when all data lie on one side of the F = f/2 threshold; the
    /// coupling and offset are then nearly degenerate.
    pub one_sided: bool,
}

/// Sweep the drive frequency across `f_grid` for every phase at a fixed
/// cylinder rotation rate, deriving R and L from the output voltage and
/// locating the resonance peak by quadratic interpolation.
pub fn frequency_sweep(
    circuits: &[PhaseCircuit],
    cyl: Option<&CylinderParams>,
    rot_hz: f64,
    f_grid: &[f64],
) -> Result<SweepResult, SteadyStateError> {
    let mut phases = Vec::with_capacity(circuits.len());
    for circuit in circuits {
        let mut v_o = Vec::with_capacity(f_grid.len());
        let mut r_ohm = Vec::with_capacity(f_grid.len());
        let mut l_henry = Vec::with_capacity(f_grid.len());
        for &f in f_grid {
            let v = crate::circuit::transfer(circuit, cyl, f, rot_hz)?;
            let v_i = Complex64::from_polar(circuit.v_i, circuit.phase);
            let z_cc = extract_impedance(v_i, v, f, circuit)?;
            let (r, l) = total_rl(z_cc, circuit, f);
            v_o.push(v);
            r_ohm.push(r);
            l_henry.push(l);
        }
        let amps: Vec<f64> = v_o.iter().map(|v| v.norm()).collect();
        let (f_peak, amp_peak) = quadratic_peak(f_grid, &amps);
        phases.push(PhaseSweep {
            label: circuit.label.clone(),
            v_o,
            r_ohm,
            l_henry,
            f_peak,
            amp_peak,
        });
    }
    Ok(SweepResult {
        f_grid: f_grid.to_vec(),
        rot_hz,
        phases,
    })
}

/// Locate the maximum of `y` over `x` and refine it with a parabola
/// through the grid maximum and its neighbours.
fn quadratic_peak(x: &[f64], y: &[f64]) -> (f64, f64) {
    let mut k = 0;
    for (i, &v) in y.iter().enumerate() {
        if v > y[k] {
            k = i;
        }
    }
    if k == 0 || k + 1 == y.len() {
        return (x[k], y[k]);
    }
    let (y0, y1, y2) = (y[k - 1], y[k], y[k + 1]);
    let denom = y0 - 2.0 * y1 + y2;
    if denom.abs() < 1e-300 {
        return (x[k], y[k]);
    }
    // Offset of the vertex in grid units, assuming uniform spacing
    // around the maximum.
    let s = 0.5 * (y0 - y2) / denom;
    let h = 0.5 * (x[k + 1] - x[k - 1]);
    (x[k] + s * h, y1 - 0.25 * (y0 - y2) * s)
}

/// Classify every (drive frequency, rotation rate) cell: unstable iff
/// the total resistance of all three phases is negative there.
pub fn stability_map(
    circuits: &[PhaseCircuit],
    cyl: Option<&CylinderParams>,
    f_grid: &[f64],
    rot_grid: &[f64],
) -> Result<StabilityMap, SteadyStateError> {
    let mut r_total = vec![vec![vec![0.0; rot_grid.len()]; f_grid.len()]; circuits.len()];
    for (p, circuit) in circuits.iter().enumerate() {
        for (i, &f) in f_grid.iter().enumerate() {
            for (j, &rot) in rot_grid.iter().enumerate() {
                let z_cc = coil_cylinder_impedance(circuit, cyl, f, rot)?;
                let (r, _) = total_rl(z_cc, circuit, f);
                r_total[p][i][j] = r;
            }
        }
    }
    let unstable = (0..f_grid.len())
        .map(|i| {
            (0..rot_grid.len())
                .map(|j| {
                    let worst = (0..circuits.len())
                        .map(|p| r_total[p][i][j])
                        .fold(f64::NEG_INFINITY, f64::max);
                    worst < 0.0
                })
                .collect()
        })
        .collect();
    Ok(StabilityMap {
        f_grid: f_grid.to_vec(),
        rot_grid: rot_grid.to_vec(),
        r_total,
        unstable,
    })
}

/// Fit the coupling strength A and the constant circuit resistance
/// R_circ to total-resistance data `(F_hz, R_ohm)` taken at a fixed
/// drive frequency. The model is `R(F) = R_circ + A * rho(F)` where
/// `rho` is the unit-coupling cylinder resistance.
pub fn fit_cylinder_coupling(
    data: &[(f64, f64)],
    f_hz: f64,
    cyl: &CylinderParams,
    l_coil: f64,
) -> Result<FitResult, SteadyStateError> {
    if data.len() < 5 {
        return Err(SteadyStateError::TooFewPoints {
            needed: 5,
            got: data.len(),
        });
    }
    // The cylinder resistance is linear in the coupling, so precompute
    // it at unit coupling once per rotation rate.
    let mut unit = cyl.clone();
    unit.coupling_a = 1.0;
    let omega = TAU * f_hz;
    let rho: Vec<f64> = data
        .iter()
        .map(|&(rot, _)| {
            cylinder_impedance(&unit, l_coil, omega, TAU * rot)
                .map(|(r, _)| r)
        })
        .collect::<Result<_, _>>()?;
    let r_data: Vec<f64> = data.iter().map(|&(_, r)| r).collect();
    let threshold = f_hz / 2.0;
    let one_sided = data.iter().all(|&(rot, _)| rot < threshold)
        || data.iter().all(|&(rot, _)| rot >= threshold);

    let residuals = |p: &[f64], out: &mut Vec<f64>| {
        out.clear();
        for (k, &r) in r_data.iter().enumerate() {
            out.push(p[1] + p[0] * rho[k] - r);
        }
    };
    let median = median(&r_data);
    let starts = [[0.05, median], [0.5, median], [2.0, median.abs() + 1.0]];
    let bounds = [A_BOUNDS, R_CIRC_BOUNDS];
    let (params, iterations, cost) =
        multistart_lm(&starts, &bounds, data.len(), residuals)?;
    Ok(FitResult {
        coupling_a: params[0],
        offset: params[1],
        residual_rms: (cost / data.len() as f64).sqrt(),
        iterations,
        one_sided,
    })
}

/// Fit the constant inductance L0 to total-inductance data `(F_hz,
/// L_henry)` at fixed drive frequency and fixed coupling. The model is
/// `L(F) = L0 (1 + A Re[S(F)])`: the cylinder contribution scales with
/// the coil inductance being fitted.
pub fn fit_inductance_offset(
    data: &[(f64, f64)],
    f_hz: f64,
    coupling_a: f64,
    cyl: &CylinderParams,
) -> Result<FitResult, SteadyStateError> {
    if data.len() < 5 {
        return Err(SteadyStateError::TooFewPoints {
            needed: 5,
            got: data.len(),
        });
    }
    let mut fixed = cyl.clone();
    fixed.coupling_a = coupling_a;
    let omega = TAU * f_hz;
    // Per-henry inductance shift at each rotation rate.
    let shifts: Vec<f64> = data
        .iter()
        .map(|&(rot, _)| {
            cylinder_impedance(&fixed, 1.0, omega, TAU * rot)
                .map(|(_, dl)| dl)
        })
        .collect::<Result<_, _>>()?;
    let l_data: Vec<f64> = data.iter().map(|&(_, l)| l).collect();
    let threshold = f_hz / 2.0;
    let one_sided = data.iter().all(|&(rot, _)| rot < threshold)
        || data.iter().all(|&(rot, _)| rot >= threshold);

    let residuals = |p: &[f64], out: &mut Vec<f64>| {
        out.clear();
        for (k, &l) in l_data.iter().enumerate() {
            out.push(p[0] * (1.0 + shifts[k]) - l);
        }
    };
    let median = median(&l_data).max(1e-6);
    let starts = [[0.5 * median], [median], [2.0 * median]];
    let bounds = [(1e-9, 10.0)];
    let (params, iterations, cost) =
        multistart_lm(&starts, &bounds, data.len(), residuals)?;
    Ok(FitResult {
        coupling_a,
        offset: params[0],
        residual_rms: (cost / data.len() as f64).sqrt(),
        iterations,
        one_sided,
    })
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    s[s.len() / 2]
}

/// Run Levenberg-Marquardt from each start and keep the best minimum.
fn multistart_lm<const N: usize, F>(
    starts: &[[f64; N]],
    bounds: &[(f64, f64); N],
    n_data: usize,
    mut residuals: F,
) -> Result<([f64; N], usize, f64), SteadyStateError>
where
    F: FnMut(&[f64], &mut Vec<f64>),
{
    let mut best: Option<([f64; N], usize, f64)> = None;
    for start in starts {
        let (p, iters, cost) = levenberg_marquardt(*start, bounds, n_data, &mut residuals)?;
        if best.as_ref().is_none_or(|(_, _, c)| cost < *c) {
            best = Some((p, iters, cost));
        }
    }
    Ok(best.expect("at least one start"))
}

/// Bounded Levenberg-Marquardt with a central-difference Jacobian.
/// Returns the parameters, iteration count, and final sum of squares.
fn levenberg_marquardt<const N: usize, F>(
    mut p: [f64; N],
    bounds: &[(f64, f64); N],
    n_data: usize,
    residuals: &mut F,
) -> Result<([f64; N], usize, f64), SteadyStateError>
where
    F: FnMut(&[f64], &mut Vec<f64>),
{
    for (v, &(lo, hi)) in p.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
    let mut r = Vec::with_capacity(n_data);
    let mut r_lo = Vec::with_capacity(n_data);
    let mut r_hi = Vec::with_capacity(n_data);
    residuals(&p, &mut r);
    let mut cost: f64 = r.iter().map(|v| v * v).sum();
    let mut lambda = 1e-3;
    for iter in 1..=LM_MAX_ITER {
        // Central-difference Jacobian, column per parameter.
        let mut jt_j = [[0.0; N]; N];
        let mut jt_r = [0.0; N];
        let mut jac = vec![[0.0; N]; n_data];
        for k in 0..N {
            let h = LM_JACOBIAN_STEP * p[k].abs().max(1e-9);
            let mut plus = p;
            let mut minus = p;
            plus[k] += h;
            minus[k] -= h;
            residuals(&plus, &mut r_hi);
            residuals(&minus, &mut r_lo);
            for i in 0..n_data {
                jac[i][k] = (r_hi[i] - r_lo[i]) / (2.0 * h);
            }
        }
        for i in 0..n_data {
            for a in 0..N {
                jt_r[a] += jac[i][a] * r[i];
                for b in 0..N {
                    jt_j[a][b] += jac[i][a] * jac[i][b];
                }
            }
        }
        let grad_norm = jt_r.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if grad_norm < 1e-12 * (1.0 + cost) {
            return Ok((p, iter, cost));
        }
        // Try damped steps, increasing lambda until one reduces the cost.
        let mut improved = false;
        for _ in 0..24 {
            let mut lhs = jt_j;
            for a in 0..N {
                lhs[a][a] += lambda * jt_j[a][a].max(1e-12);
            }
            let rhs: [f64; N] = std::array::from_fn(|a| -jt_r[a]);
            let Some(step) = solve(lhs, rhs) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial = p;
            for (v, (s, &(lo, hi))) in
                trial.iter_mut().zip(step.iter().zip(bounds))
            {
                *v = (*v + s).clamp(lo, hi);
            }
            residuals(&trial, &mut r_hi);
            let trial_cost: f64 = r_hi.iter().map(|v| v * v).sum();
            if trial_cost < cost {
                let rel_drop = (cost - trial_cost) / cost.max(1e-300);
                p = trial;
                cost = trial_cost;
                std::mem::swap(&mut r, &mut r_hi);
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                if rel_drop < 1e-14 {
                    return Ok((p, iter, cost));
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // Stuck at a (possibly bound-constrained) minimum.
            return Ok((p, iter, cost));
        }
    }
    Ok((p, LM_MAX_ITER, cost))
}

/// Solve the small symmetric system `A x = b` by Gaussian elimination
/// with partial pivoting; `None` when singular.
fn solve<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    for col in 0..N {
        let pivot = (col..N).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..N {
            let m = a[row][col] / a[col][col];
            for k in col..N {
                a[row][k] -= m * a[col][k];
            }
            b[row] -= m * b[col];
        }
    }
    let mut x = [0.0; N];
    for col in (0..N).rev() {
        let mut s = b[col];
        for k in col + 1..N {
            s -= a[col][k] * x[k];
        }
        x[col] = s / a[col][col];
    }
    Some(x)
}

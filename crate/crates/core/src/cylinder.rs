//! Rotating-conductor response: Doppler shift, penetration depth, the
//! complex reflection coefficient S, and the effective resistance and
//! inductance the cylinder contributes to each stator circuit.
//!
//! The reflection coefficient for an azimuthal order `m` field is
//!
//! ```text
//! S = (a/r)^{2m} [ (mu_r + 1) J_m(z) - (z/m) J_{m-1}(z) ]
//!               / [ (mu_r - 1) J_m(z) + (z/m) J_{m-1}(z) ],   z = sqrt(i) a/delta,
//! ```
//!
//! evaluated with the Doppler-shifted frequency in the rotor frame. For a
//! counter-shifted field (`omega_minus < 0`) the response is the complex
//! conjugate of the positive-frequency value, which flips the sign of the
//! absorptive part and is what turns loss into gain past the threshold.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bessel::{bessel_ratio, BesselError};

/// Vacuum permeability, H/m.
pub const MU_0: f64 = 1.256_637_061_435_917_3e-6;
/// Boltzmann constant, J/K.
pub const K_BOLTZMANN: f64 = 1.380_649e-23;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CylinderError {
    #[error("invalid cylinder parameters: {0}")]
    InvalidParams(String),
    #[error("bessel kernel failed: {0}")]
    Kernel(#[from] BesselError),
}

/// Geometry and material constants of the rotating cylinder plus the
/// empirical coupling constant and rotor inertia.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CylinderParams {
    /// Cylinder radius, m.
    pub a: f64,
    /// Radius at which the stator coils sit, m.
    pub r_coil: f64,
    /// Electrical conductivity, S/m.
    pub sigma: f64,
    /// Relative permeability.
    pub mu_r: f64,
    /// Azimuthal order of the rotating field.
    pub mode_m: u32,
    /// Dimensionless coupling constant of order one.
    #[serde(alias = "coupling_A")]
    pub coupling_a: f64,
    /// Rotor moment of inertia, kg m^2.
    #[serde(alias = "inertia_J")]
    pub inertia_j: f64,
}

impl CylinderParams {
    /// Aluminium cylinder of the experiment. The inertia corresponds to a
    /// solid cylinder of length 60 mm at 2700 kg/m^3; the length is not a
    /// measured value and belongs in configs, not in physics code.
    pub fn aluminium_default() -> Self {
        CylinderParams {
            a: 0.020,
            r_coil: 0.021,
            sigma: 3.77e7,
            mu_r: 1.000_022,
            mode_m: 2,
            coupling_a: 0.397,
            inertia_j: 4.07e-5,
        }
    }

    pub fn validate(&self) -> Result<(), CylinderError> {
        let mut bad = Vec::new();
        if !(self.a > 0.0) {
            bad.push("a must be > 0");
        }
        if !(self.r_coil >= self.a) {
            bad.push("r_coil must be >= a");
        }
        if !(self.sigma > 0.0) {
            bad.push("sigma must be > 0");
        }
        if !(self.mu_r >= 1.0) {
            bad.push("mu_r must be >= 1");
        }
        if self.mode_m < 1 {
            bad.push("mode_m must be >= 1");
        }
        if !(self.coupling_a > 0.0) {
            bad.push("coupling_a must be > 0");
        }
        if !(self.inertia_j > 0.0) {
            bad.push("inertia_j must be > 0");
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(CylinderError::InvalidParams(bad.join("; ")))
        }
    }

    /// `mu_0 mu_r`, H/m.
    pub fn mu(&self) -> f64 {
        MU_0 * self.mu_r
    }
}

/// Frequency of the field seen in the rotor frame: `omega - m Omega`, rad/s.
pub fn doppler_shift(omega: f64, mode_m: u32, big_omega: f64) -> f64 {
    omega - mode_m as f64 * big_omega
}

/// Skin depth `1/sqrt(sigma mu |omega_minus|)`, m. Returns `+inf` for a
/// field that is static in the rotor frame.
pub fn penetration_depth(sigma: f64, mu: f64, omega_minus: f64) -> f64 {
    if omega_minus == 0.0 {
        f64::INFINITY
    } else {
        1.0 / (sigma * mu * omega_minus.abs()).sqrt()
    }
}

/// Reflection coefficient S of the rotating cylinder for a field of lab
/// frequency `omega` and rotor speed `big_omega` (both rad/s).
pub fn reflection_s(
    params: &CylinderParams,
    omega: f64,
    big_omega: f64,
) -> Result<Complex64, CylinderError> {
    let omega_minus = doppler_shift(omega, params.mode_m, big_omega);
    let geom = (params.a / params.r_coil).powi(2 * params.mode_m as i32);
    if omega_minus == 0.0 {
        // Small-argument limit of the Bessel expression.
        let v = geom * (params.mu_r - 1.0) / (params.mu_r + 1.0);
        return Ok(Complex64::new(v, 0.0));
    }
    let s_pos = reflection_s_positive(params, omega_minus.abs())?;
    if omega_minus > 0.0 {
        Ok(s_pos)
    } else {
        Ok(s_pos.conj())
    }
}

fn reflection_s_positive(
    params: &CylinderParams,
    omega_minus: f64,
) -> Result<Complex64, CylinderError> {
    debug_assert!(omega_minus > 0.0);
    let m = params.mode_m;
    let delta = penetration_depth(params.sigma, params.mu(), omega_minus);
    let x = params.a / delta;
    let sqrt_i = Complex64::new(1.0, 1.0) / f64::sqrt(2.0);
    let z = sqrt_i * x;
    let geom = (params.a / params.r_coil).powi(2 * m as i32);
    // Divide numerator and denominator by J_m so only the stable ratio
    // J_{m-1}/J_m enters. Just above the threshold |z| is tiny and the
    // ratio's continued fraction sits on top of the J_m zero at the
    // origin; the two-term series of t = (z/m) J_{m-1}/J_m covers that
    // region with O(|z|^4) error.
    let t = if x < 1e-3 {
        Complex64::new(2.0, 0.0) - z * z / (2.0 * m as f64 * (m as f64 + 1.0))
    } else {
        z / m as f64 * bessel_ratio(m, z)?
    };
    let num = Complex64::new(params.mu_r + 1.0, 0.0) - t;
    let den = Complex64::new(params.mu_r - 1.0, 0.0) + t;
    Ok(geom * num / den)
}

/// Effective series resistance and inductance the cylinder adds to a coil
/// of inductance `l_coil`: `R = A omega L Im[S]`, `L = A L Re[S]`.
pub fn cylinder_impedance(
    params: &CylinderParams,
    l_coil: f64,
    omega: f64,
    big_omega: f64,
) -> Result<(f64, f64), CylinderError> {
    if !(l_coil > 0.0) {
        return Err(CylinderError::InvalidParams("l_coil must be > 0".into()));
    }
    let s = reflection_s(params, omega, big_omega)?;
    Ok((
        params.coupling_a * omega * l_coil * s.im,
        params.coupling_a * l_coil * s.re,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cyl() -> CylinderParams {
        CylinderParams::aluminium_default()
    }

    const TAU: f64 = std::f64::consts::TAU;

    #[test]
    fn doppler_examples() {
        assert_eq!(doppler_shift(TAU * 1181.0, 2, TAU * 590.5), 0.0);
        assert_relative_eq!(
            doppler_shift(TAU * 1181.0, 2, TAU * 643.0),
            TAU * -105.0,
            max_relative = 1e-12
        );
        assert_eq!(doppler_shift(TAU * 1181.0, 2, 0.0), TAU * 1181.0);
    }

    #[test]
    fn penetration_depth_values() {
        let mu = MU_0 * 1.000_022;
        assert_relative_eq!(
            penetration_depth(3.77e7, mu, TAU * 1181.0),
            1.687e-3,
            epsilon = 1e-6
        );
        assert_relative_eq!(
            penetration_depth(3.77e7, mu, TAU * 105.0),
            5.66e-3,
            epsilon = 1e-5
        );
        let d1 = penetration_depth(3.77e7, mu, 100.0);
        let d4 = penetration_depth(3.77e7, mu, 400.0);
        assert_relative_eq!(d4, d1 / 2.0, max_relative = 1e-14);
        assert!(penetration_depth(3.77e7, mu, 0.0).is_infinite());
    }

    #[test]
    fn reflection_vanishes_at_threshold_for_unit_permeability() {
        let mut p = cyl();
        p.mu_r = 1.0;
        let s = reflection_s(&p, TAU * 1181.0, TAU * 590.5).unwrap();
        assert!(s.norm() < 1e-12);
    }

    #[test]
    fn deep_skin_limit_is_minus_geometric_factor() {
        // a/delta = 200 => omega_minus = (200/a)^2 / (sigma mu)
        let p = cyl();
        let om = (200.0 / p.a).powi(2) / (p.sigma * p.mu());
        let s200 = reflection_s(&p, om, 0.0).unwrap();
        // convergence toward the limit is O(delta/a)
        assert_relative_eq!(s200.re, -0.8227, epsilon = 2e-2);
        assert!(s200.im.abs() < 2e-2);
        // Richardson extrapolation in a/delta removes the leading 1/x term
        let s_double = reflection_s(&p, 2.0 * om, 0.0).unwrap();
        let extrap = s_double * (1.0 + f64::sqrt(2.0) / (f64::sqrt(2.0) - 1.0) - 1.0)
            - s200 * (1.0 / (f64::sqrt(2.0) - 1.0));
        assert_relative_eq!(extrap.re, -0.8227, epsilon = 1e-3);
        assert!(extrap.im.abs() < 1e-3);
    }

    #[test]
    fn absorption_sign_follows_doppler_sign() {
        let p = cyl();
        for k in 1..100 {
            let om_minus = TAU * (5.0 * k as f64);
            let s_pos = reflection_s(&p, om_minus, 0.0).unwrap();
            assert!(s_pos.im > 0.0, "Im S <= 0 at omega_minus = {om_minus}");
            // negative Doppler shift via fast co-rotation
            let s_neg = reflection_s(&p, om_minus, om_minus).unwrap();
            assert!(s_neg.im < 0.0);
            assert!((s_neg - s_pos.conj()).norm() < 1e-12 * s_pos.norm().max(1e-12));
        }
    }

    #[test]
    fn reflection_bounded_by_geometric_factor() {
        let p = cyl();
        for k in 0..=500 {
            let omega = TAU * (1.0 + 10.0 * k as f64);
            let s = reflection_s(&p, omega, 0.0).unwrap();
            assert!(s.norm() <= 0.822_702_5 + 1e-9, "|S| = {} at {}", s.norm(), omega);
        }
    }

    #[test]
    fn continuity_across_zero_doppler() {
        let mut p = cyl();
        p.mu_r = 1.0;
        let limit = reflection_s(&p, TAU * 1181.0, TAU * 590.5).unwrap();
        for sgn in [-1.0, 1.0] {
            let s = reflection_s(&p, TAU * 1181.0 + sgn * 1e-3, TAU * 590.5).unwrap();
            assert!((s - limit).norm() < 1e-6);
        }
    }

    #[test]
    fn real_part_maximal_at_zero_doppler() {
        let p = cyl();
        let s0 = reflection_s(&p, TAU * 1181.0, TAU * 590.5).unwrap();
        for k in 1..60 {
            let s = reflection_s(&p, TAU * 1181.0, TAU * (590.5 - 10.0 * k as f64)).unwrap();
            assert!(s.re <= s0.re + 1e-12);
        }
    }

    #[test]
    fn impedance_signs_around_threshold() {
        let p = cyl();
        let l = 0.131;
        let (r_zero, l_zero) = {
            let mut q = p.clone();
            q.mu_r = 1.0;
            cylinder_impedance(&q, l, TAU * 1181.0, TAU * 590.5).unwrap()
        };
        assert!(r_zero.abs() < 1e-12 && l_zero.abs() < 1e-12);

        let (r_above, _) = cylinder_impedance(&p, l, TAU * 1181.0, TAU * 591.0).unwrap();
        let (r_below, _) = cylinder_impedance(&p, l, TAU * 1181.0, TAU * 590.0).unwrap();
        assert!(r_above < 0.0, "co-rotation above threshold must be gain");
        assert!(r_below > 0.0, "below threshold must be loss");
    }

    #[test]
    fn deep_skin_inductance_reduction() {
        let p = cyl();
        let l = 0.131;
        let om = (200.0 / p.a).powi(2) / (p.sigma * p.mu());
        let (r, dl) = cylinder_impedance(&p, l, om, 0.0).unwrap();
        assert_relative_eq!(dl, -p.coupling_a * l * 0.8227, max_relative = 2e-2);
        // resistive part is o(omega L) in the deep-skin limit
        assert!(r.abs() < 0.02 * om * l * p.coupling_a);
    }

    #[test]
    fn threshold_law_on_grid() {
        let mut p = cyl();
        p.mu_r = 1.0;
        for i in 0..100 {
            let omega = TAU * (700.0 + 15.0 * i as f64);
            for j in 0..100 {
                let big = TAU * (9.0 * j as f64);
                let (r, _) = cylinder_impedance(&p, 0.131, omega, big).unwrap();
                let want = doppler_shift(omega, 2, big).signum();
                if r != 0.0 {
                    assert_eq!(r.signum(), want, "omega={omega} Omega={big}");
                }
            }
        }
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = cyl();
        p.a = -1.0;
        assert!(p.validate().is_err());
        let mut p = cyl();
        p.r_coil = 0.001;
        assert!(p.validate().is_err());
    }
}

//! Model and analysis library for the electromagnetic Zel'dovich amplifier
//! and its black-hole-bomb style instability: a rotating conductive
//! cylinder coupled to three resonant stator circuits.
//!
//! The crate is organized bottom-up:
//!
//! - [`bessel`] — complex-argument Bessel functions and the stable ratio
//!   used by the cylinder response;
//! - [`cylinder`] — Doppler shift, skin depth, reflection coefficient and
//!   the effective impedance the rotating cylinder adds to a circuit;
//! - [`circuit`] — per-phase series RLC model, transfer function and its
//!   inverse, resonance solving;
//! - [`steady_state`] — frequency/rotation sweeps, stability maps and
//!   least-squares fits of the coupling parameters;
//! - [`dynamics`] — time-domain envelope simulation of the noise-seeded
//!   instability with rotor back-reaction;
//! - [`signal`] — envelope/instantaneous-frequency analysis of sampled
//!   waveforms, spectrograms and probe corrections;
//! - [`presets`] — bundled configuration documents for the reference
//!   component values.

pub mod bessel;
pub mod circuit;
pub mod cylinder;
pub mod dynamics;
pub mod presets;
pub mod profile;
pub mod signal;
pub mod steady_state;

pub use num_complex::Complex64;

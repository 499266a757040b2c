//! Local phase velocities of 1+1 dimensional wave fields.
//!
//! The `N`-th order local phase velocity of a field `psi(x, t)` is the speed
//! at which a fixed value of `d^N psi / dx^N` moves:
//!
//! ```text
//! v_N = -(d^{N+1} psi / dt dx^N) / (d^{N+1} psi / dx^{N+1})
//! ```
//!
//! * [`field`]: closed-form and sampled fields and their derivatives
//! * [`phasevel`]: `v_N` at points and over grids, closed-form spectra
//! * [`tracker`]: integration of `dx/dt = v_N` along an attribute
//! * [`relativity`]: Lorentz boosts and velocity addition rules
//! * [`media`]: modes in a medium with refractive index `n(x)`
//! * [`simulate`]: leapfrog solver producing sampled fields

pub mod error;
pub mod expr;
pub mod field;
pub mod media;
pub mod phasevel;
pub mod profile;
pub mod relativity;
pub mod simulate;
pub mod taylor;
pub mod tracker;

pub use error::{Error, Result};
pub use field::{AnalyticField, Envelope, Grid1x1, Jet, SampledField, WaveField};

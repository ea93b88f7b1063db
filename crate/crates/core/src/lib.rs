//! Two-photon joint amplitudes from pulsed spontaneous four-wave mixing in a
//! medium whose nonlinearity has a delayed (Raman) part.
//!
//! Conventions used throughout:
//! * forward Fourier transform `A(w) = integral a(t) exp(+i w t) dt`, the inverse carries `1/(2 pi)`;
//! * all fields are envelopes in the pump's reference frame, so `beta_1` values are
//!   slownesses relative to the pump;
//! * `Omega = w_i0 - w_p0` is the idler detuning from the pump (the signal sits at `-Omega`);
//! * joint amplitudes are stored signal-major: element `(s, i)` at `s * n_i + i`.

pub mod amplitude;
pub mod analysis;
pub mod analytic;
pub mod constants;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod gridio;
pub mod interp;
pub mod propagator;
pub mod pump;
pub mod response;

pub use amplitude::JointAmplitude;
pub use analysis::{purity, schmidt, SchmidtSpectrum};
pub use analytic::{QuadratureOptions, WaveguideSpec};
pub use error::{Error, Result};
pub use grid::{Axis, Domain};
pub use num_complex::Complex64;
pub use propagator::{Ordering, PropagationResult, StepPlan};
pub use pump::PumpField;
pub use response::{
    coupling_w, n_th, noise_f, CouplingKernel, ModeTable, RamanKind, RamanModel, RamanResponse,
    ResponseGrid, SpectralTaper,
};

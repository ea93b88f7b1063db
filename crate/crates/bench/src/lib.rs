//! Shared fixtures for the benchmarks.

use sfwm_core::analytic::default_time_axis;
use sfwm_core::pump::gaussian_pump;
use sfwm_core::{PumpField, RamanModel, RamanResponse, ResponseGrid, WaveguideSpec};

pub const TP: f64 = 0.1e-12;

pub fn silica(fraction: f64) -> RamanResponse {
    RamanResponse::build(RamanModel::silica(fraction).unwrap(), ResponseGrid::default()).unwrap()
}

/// Walk-off of twice the pulse over 1 m, 10 W peak.
pub fn setup(n: usize) -> (PumpField, WaveguideSpec) {
    let spec = WaveguideSpec::symmetric(2e-3, 2.0 * TP, 1.0, 295.0, 6e13);
    let axis = default_time_axis(n, TP, &spec).unwrap();
    (gaussian_pump(10.0, TP, axis, 2e-3).unwrap(), spec)
}

#![allow(dead_code)]

use std::sync::OnceLock;

use sfwm_core::{RamanModel, RamanResponse, ResponseGrid};

pub fn silica() -> &'static RamanResponse {
    static R: OnceLock<RamanResponse> = OnceLock::new();
    R.get_or_init(|| RamanResponse::build(RamanModel::silica(0.18).unwrap(), ResponseGrid::default()).unwrap())
}

pub fn silica_with(fraction: f64) -> RamanResponse {
    RamanResponse::build(RamanModel::silica(fraction).unwrap(), ResponseGrid::default()).unwrap()
}

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

pub fn thz(f: f64) -> f64 {
    TWO_PI * f * 1e12
}

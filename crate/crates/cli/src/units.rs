//! Unit registry for config values. Every physical entry is converted to SI on
//! load and written back in the SI symbol of its dimension.

use std::f64::consts::PI;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dim {
    Time,
    Length,
    Power,
    Temperature,
    /// 1/(W m)
    Nonlinearity,
    /// s/m
    Slowness,
    /// s^2/m
    Gvd,
    /// s^3/m
    Tod,
    /// rad/s; linear-frequency units are scaled by 2 pi.
    AngularFrequency,
}

impl Dim {
    /// Symbol used when serializing.
    pub fn si(self) -> &'static str {
        match self {
            Dim::Time => "s",
            Dim::Length => "m",
            Dim::Power => "W",
            Dim::Temperature => "K",
            Dim::Nonlinearity => "1/(W m)",
            Dim::Slowness => "s/m",
            Dim::Gvd => "s^2/m",
            Dim::Tod => "s^3/m",
            Dim::AngularFrequency => "rad/s",
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Dim::Time => "time",
            Dim::Length => "length",
            Dim::Power => "power",
            Dim::Temperature => "temperature",
            Dim::Nonlinearity => "nonlinear coefficient",
            Dim::Slowness => "group slowness",
            Dim::Gvd => "group-velocity dispersion",
            Dim::Tod => "third-order dispersion",
            Dim::AngularFrequency => "frequency",
        };
        write!(f, "{name} [{}]", self.si())
    }
}

const TABLE: &[(&str, Dim, f64)] = &[
    ("s", Dim::Time, 1.0),
    ("ms", Dim::Time, 1e-3),
    ("us", Dim::Time, 1e-6),
    ("ns", Dim::Time, 1e-9),
    ("ps", Dim::Time, 1e-12),
    ("fs", Dim::Time, 1e-15),
    ("m", Dim::Length, 1.0),
    ("km", Dim::Length, 1e3),
    ("cm", Dim::Length, 1e-2),
    ("mm", Dim::Length, 1e-3),
    ("um", Dim::Length, 1e-6),
    ("nm", Dim::Length, 1e-9),
    ("W", Dim::Power, 1.0),
    ("mW", Dim::Power, 1e-3),
    ("kW", Dim::Power, 1e3),
    ("K", Dim::Temperature, 1.0),
    ("1/(W m)", Dim::Nonlinearity, 1.0),
    ("1/(W km)", Dim::Nonlinearity, 1e-3),
    ("s/m", Dim::Slowness, 1.0),
    ("ps/m", Dim::Slowness, 1e-12),
    ("ps/km", Dim::Slowness, 1e-15),
    ("fs/mm", Dim::Slowness, 1e-12),
    ("s^2/m", Dim::Gvd, 1.0),
    ("ps^2/m", Dim::Gvd, 1e-24),
    ("ps^2/km", Dim::Gvd, 1e-27),
    ("fs^2/mm", Dim::Gvd, 1e-27),
    ("s^3/m", Dim::Tod, 1.0),
    ("ps^3/m", Dim::Tod, 1e-36),
    ("ps^3/km", Dim::Tod, 1e-39),
    ("rad/s", Dim::AngularFrequency, 1.0),
    ("Hz", Dim::AngularFrequency, 2.0 * PI),
    ("GHz", Dim::AngularFrequency, 2.0 * PI * 1e9),
    ("THz", Dim::AngularFrequency, 2.0 * PI * 1e12),
];

/// Normalizes spacing inside a unit string, e.g. `1/(W  km)` -> `1/(W km)`.
fn canonical(unit: &str) -> String {
    unit.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// SI factor of `unit` if it measures `dim`.
pub fn factor(unit: &str, dim: Dim) -> Result<f64, String> {
    let u = canonical(unit);
    match TABLE.iter().find(|(sym, _, _)| *sym == u) {
        Some((_, d, f)) if *d == dim => Ok(*f),
        Some((_, d, _)) => Err(format!("unit '{u}' measures {d}, expected {dim}")),
        None => Err(format!("unknown unit '{u}' (expected {dim})")),
    }
}

pub fn symbols(dim: Dim) -> Vec<&'static str> {
    TABLE.iter().filter(|(_, d, _)| *d == dim).map(|(s, _, _)| *s).collect()
}

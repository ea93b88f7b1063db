//! Flat `section.key = value [unit]` run configuration.
//!
//! Physical entries must carry a unit (`pump.duration = 100 fs`); dimensionless
//! ones must not. Lists are comma separated with one trailing unit
//! (`sweep.temperature = 4, 77, 295 K`) or written `linspace(a, b, n) unit`.
//! Lines starting with `#` and text after a `#` are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use sfwm_core::analytic::{KernelMode, QuadratureOptions};
use sfwm_core::constants::bandwidth_from_wavelength;
use sfwm_core::propagator::SourcePath;
use sfwm_core::pump::gaussian_pump;
use sfwm_core::{
    Axis, ModeTable, Ordering, PumpField, RamanKind, RamanModel, RamanResponse, ResponseGrid, SpectralTaper,
    StepPlan, WaveguideSpec,
};

use crate::error::{CliError, CliResult};
use crate::units::{factor, Dim};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RamanChoice {
    Silica,
    Oscillator,
    Instantaneous,
    Table,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RamanSection {
    pub model: RamanChoice,
    pub fraction: f64,
    pub tau1: f64,
    pub tau2: f64,
    /// Mode table for `model = table`.
    pub table: Option<PathBuf>,
    pub grid_n: usize,
    pub grid_dt: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaveguideSection {
    pub gamma_pump: f64,
    pub gamma_signal: f64,
    pub gamma_idler: f64,
    pub beta1_signal: f64,
    pub beta1_idler: f64,
    /// When set, `beta1_signal = -beta1_idler = ratio * T_p / L` for every pump duration.
    pub walk_off_ratio: Option<f64>,
    pub beta2_signal: f64,
    pub beta3_signal: f64,
    pub beta2_idler: f64,
    pub beta3_idler: f64,
    pub length: f64,
    pub temperature: f64,
    pub detuning: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PumpSection {
    pub duration: f64,
    pub peak_power: Option<f64>,
    /// Target pairs per pulse; the peak power is solved for at each operating point.
    pub pair_rate: Option<f64>,
    pub beta2: f64,
    pub beta3: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSection {
    pub n: usize,
    /// Time span; chosen from the pulse and walk-off when absent.
    pub span: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanSection {
    pub steps: usize,
    pub ordering: Ordering,
    pub npm: bool,
    pub raman_in_sps: bool,
    pub raman_in_xpm: bool,
    pub dispersion_order: usize,
    pub source: SourcePath,
    pub aliasing_threshold: f64,
    pub taper_pass: f64,
    pub taper_stop: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Channel {
    Literal,
    Signal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilterSection {
    /// Detection bandwidth as a wavelength interval around `wavelength`.
    pub bandwidth: f64,
    pub wavelength: f64,
    pub channel: Channel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Rate,
    Statistics,
    Purity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    SplitStep,
    Quadrature,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSection {
    pub metric: Metric,
    pub method: Method,
    pub duration: Vec<f64>,
    pub fraction: Vec<f64>,
    pub temperature: Vec<f64>,
    pub detuning: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergeSection {
    pub steps: Vec<usize>,
    /// Finest run; the reference is Richardson-extrapolated from it and half its steps.
    pub reference_steps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputSection {
    pub jsa: bool,
    pub pump: bool,
    /// Number of Schmidt modes to dump (0 for none).
    pub modes: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub raman: RamanSection,
    pub waveguide: WaveguideSection,
    pub pump: PumpSection,
    pub grid: GridSection,
    pub plan: PlanSection,
    pub filter: FilterSection,
    pub sweep: SweepSection,
    pub converge: ConvergeSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        let rg = ResponseGrid::default();
        let taper = SpectralTaper::default();
        RunConfig {
            raman: RamanSection {
                model: RamanChoice::Silica,
                fraction: 0.18,
                tau1: 12.2e-15,
                tau2: 32e-15,
                table: None,
                grid_n: rg.n,
                grid_dt: rg.dt,
            },
            waveguide: WaveguideSection {
                gamma_pump: 2e-3,
                gamma_signal: 2e-3,
                gamma_idler: 2e-3,
                beta1_signal: 2e-13,
                beta1_idler: -2e-13,
                walk_off_ratio: None,
                beta2_signal: 0.0,
                beta3_signal: 0.0,
                beta2_idler: 0.0,
                beta3_idler: 0.0,
                length: 1.0,
                temperature: 295.0,
                detuning: 6e13,
            },
            pump: PumpSection {
                duration: 1e-13,
                peak_power: Some(10.0),
                pair_rate: None,
                beta2: 0.0,
                beta3: 0.0,
            },
            grid: GridSection { n: 256, span: None },
            plan: PlanSection {
                steps: 64,
                ordering: Ordering::Symmetric,
                npm: true,
                raman_in_sps: true,
                raman_in_xpm: true,
                dispersion_order: 3,
                source: SourcePath::Time,
                aliasing_threshold: 1e-6,
                taper_pass: taper.pass,
                taper_stop: taper.stop,
            },
            filter: FilterSection {
                bandwidth: 1e-9,
                wavelength: 1550e-9,
                channel: Channel::Literal,
            },
            sweep: SweepSection {
                metric: Metric::Purity,
                method: Method::SplitStep,
                duration: Vec::new(),
                fraction: Vec::new(),
                temperature: Vec::new(),
                detuning: Vec::new(),
            },
            converge: ConvergeSection {
                steps: vec![32, 64, 128],
                reference_steps: 1024,
            },
            output: OutputSection {
                jsa: true,
                pump: false,
                modes: 0,
            },
        }
    }
}

// ---- value parsing ----

fn parse_f64(tok: &str) -> Result<f64, String> {
    let t = tok.trim();
    let v: f64 = t.parse().map_err(|_| format!("'{t}' is not a number"))?;
    if !v.is_finite() {
        return Err(format!("'{t}' is not finite"));
    }
    Ok(v)
}

/// Numbers and an optional trailing unit.
fn numbers(rhs: &str) -> Result<(Vec<f64>, Option<String>), String> {
    let rhs = rhs.trim();
    if rhs.is_empty() {
        return Ok((Vec::new(), None));
    }
    if let Some(rest) = rhs.strip_prefix("linspace(") {
        let close = rest.find(')').ok_or("unterminated linspace(")?;
        let args: Vec<&str> = rest[..close].split(',').collect();
        if args.len() != 3 {
            return Err("linspace takes (start, stop, count)".into());
        }
        let (a, b) = (parse_f64(args[0])?, parse_f64(args[1])?);
        let n: usize = args[2].trim().parse().map_err(|_| format!("bad linspace count '{}'", args[2].trim()))?;
        if n == 0 {
            return Err("linspace count must be positive".into());
        }
        let vals = (0..n)
            .map(|k| if n == 1 { a } else { a + (b - a) * k as f64 / (n - 1) as f64 })
            .collect();
        let unit = rest[close + 1..].trim();
        return Ok((vals, (!unit.is_empty()).then(|| unit.to_string())));
    }
    let parts: Vec<&str> = rhs.split(',').collect();
    let mut vals = Vec::with_capacity(parts.len());
    for p in &parts[..parts.len() - 1] {
        vals.push(parse_f64(p)?);
    }
    let last = parts[parts.len() - 1].trim();
    let (num, unit) = match last.split_once(char::is_whitespace) {
        Some((n, u)) => (n, Some(u.trim().to_string())),
        None => (last, None),
    };
    vals.push(parse_f64(num)?);
    Ok((vals, unit))
}

fn quantities(rhs: &str, dim: Dim) -> Result<Vec<f64>, String> {
    let (vals, unit) = numbers(rhs)?;
    if vals.is_empty() {
        return Ok(vals);
    }
    let unit = unit.ok_or_else(|| format!("missing unit; expected {dim}"))?;
    let f = factor(&unit, dim)?;
    Ok(vals.into_iter().map(|v| v * f).collect())
}

fn quantity(rhs: &str, dim: Dim) -> Result<f64, String> {
    match quantities(rhs, dim)?.as_slice() {
        [v] => Ok(*v),
        _ => Err("expected a single value".into()),
    }
}

fn reals(rhs: &str) -> Result<Vec<f64>, String> {
    let (vals, unit) = numbers(rhs)?;
    if let Some(u) = unit {
        return Err(format!("dimensionless entry takes no unit, got '{u}'"));
    }
    Ok(vals)
}

fn real(rhs: &str) -> Result<f64, String> {
    match reals(rhs)?.as_slice() {
        [v] => Ok(*v),
        _ => Err("expected a single value".into()),
    }
}

fn counts(rhs: &str) -> Result<Vec<usize>, String> {
    rhs.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| format!("'{s}' is not a non-negative integer")))
        .collect()
}

fn count(rhs: &str) -> Result<usize, String> {
    match counts(rhs)?.as_slice() {
        [v] => Ok(*v),
        _ => Err("expected a single integer".into()),
    }
}

fn flag(rhs: &str) -> Result<bool, String> {
    match rhs.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        s => Err(format!("expected true or false, got '{s}'")),
    }
}

fn choice<T: Copy>(rhs: &str, options: &[(&str, T)]) -> Result<T, String> {
    let s = rhs.trim();
    options.iter().find(|(name, _)| *name == s).map(|(_, v)| *v).ok_or_else(|| {
        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
        format!("expected one of {}, got '{s}'", names.join("|"))
    })
}

fn name_of<T: PartialEq + Copy>(v: &T, options: &[(&'static str, T)]) -> &'static str {
    options.iter().find(|(_, o)| o == v).map(|(n, _)| *n).expect("every variant is named")
}

const MODELS: &[(&str, RamanChoice)] = &[
    ("silica", RamanChoice::Silica),
    ("oscillator", RamanChoice::Oscillator),
    ("instantaneous", RamanChoice::Instantaneous),
    ("table", RamanChoice::Table),
];
const ORDERINGS: &[(&str, Ordering)] = &[("symmetric", Ordering::Symmetric), ("naive", Ordering::Naive)];
const SOURCES: &[(&str, SourcePath)] = &[("time", SourcePath::Time), ("frequency", SourcePath::Frequency)];
const CHANNELS: &[(&str, Channel)] = &[("literal", Channel::Literal), ("signal", Channel::Signal)];
const METRICS: &[(&str, Metric)] = &[
    ("rate", Metric::Rate),
    ("statistics", Metric::Statistics),
    ("purity", Metric::Purity),
];
const METHODS: &[(&str, Method)] = &[("split_step", Method::SplitStep), ("quadrature", Method::Quadrature)];

fn num(v: f64) -> String {
    // shortest representation that parses back to the same bits
    format!("{v:e}")
}

fn list(vals: &[f64]) -> String {
    vals.iter().map(|v| num(*v)).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, rhs) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected 'key = value'", k + 1)))?;
            let key = key.trim();
            if let Some(prev) = seen.insert(key.to_string(), k + 1) {
                return Err(CliError::Config(format!("line {}: '{key}' already set on line {prev}", k + 1)));
            }
            cfg.set(key, rhs.trim())
                .map_err(|e| CliError::Config(format!("line {}: {key}: {e}", k + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        use Dim::*;
        match key {
            "raman.model" => self.raman.model = choice(v, MODELS)?,
            "raman.fraction" => self.raman.fraction = real(v)?,
            "raman.tau1" => self.raman.tau1 = quantity(v, Time)?,
            "raman.tau2" => self.raman.tau2 = quantity(v, Time)?,
            "raman.table" => self.raman.table = Some(PathBuf::from(v)),
            "raman.grid_n" => self.raman.grid_n = count(v)?,
            "raman.grid_dt" => self.raman.grid_dt = quantity(v, Time)?,

            "waveguide.gamma_pump" => self.waveguide.gamma_pump = quantity(v, Nonlinearity)?,
            "waveguide.gamma_signal" => self.waveguide.gamma_signal = quantity(v, Nonlinearity)?,
            "waveguide.gamma_idler" => self.waveguide.gamma_idler = quantity(v, Nonlinearity)?,
            "waveguide.beta1_signal" => self.waveguide.beta1_signal = quantity(v, Slowness)?,
            "waveguide.beta1_idler" => self.waveguide.beta1_idler = quantity(v, Slowness)?,
            "waveguide.walk_off_ratio" => self.waveguide.walk_off_ratio = Some(real(v)?),
            "waveguide.beta2_signal" => self.waveguide.beta2_signal = quantity(v, Gvd)?,
            "waveguide.beta3_signal" => self.waveguide.beta3_signal = quantity(v, Tod)?,
            "waveguide.beta2_idler" => self.waveguide.beta2_idler = quantity(v, Gvd)?,
            "waveguide.beta3_idler" => self.waveguide.beta3_idler = quantity(v, Tod)?,
            "waveguide.length" => self.waveguide.length = quantity(v, Length)?,
            "waveguide.temperature" => self.waveguide.temperature = quantity(v, Temperature)?,
            "waveguide.detuning" => self.waveguide.detuning = quantity(v, AngularFrequency)?,

            "pump.duration" => self.pump.duration = quantity(v, Time)?,
            "pump.peak_power" => {
                self.pump.peak_power = Some(quantity(v, Power)?);
                self.pump.pair_rate = None;
            }
            "pump.pair_rate" => {
                self.pump.pair_rate = Some(real(v)?);
                self.pump.peak_power = None;
            }
            "pump.beta2" => self.pump.beta2 = quantity(v, Gvd)?,
            "pump.beta3" => self.pump.beta3 = quantity(v, Tod)?,

            "grid.n" => self.grid.n = count(v)?,
            "grid.span" => self.grid.span = Some(quantity(v, Time)?),

            "plan.steps" => self.plan.steps = count(v)?,
            "plan.ordering" => self.plan.ordering = choice(v, ORDERINGS)?,
            "plan.npm" => self.plan.npm = flag(v)?,
            "plan.raman_in_sps" => self.plan.raman_in_sps = flag(v)?,
            "plan.raman_in_xpm" => self.plan.raman_in_xpm = flag(v)?,
            "plan.dispersion_order" => self.plan.dispersion_order = count(v)?,
            "plan.source" => self.plan.source = choice(v, SOURCES)?,
            "plan.aliasing_threshold" => self.plan.aliasing_threshold = real(v)?,
            "plan.taper_pass" => self.plan.taper_pass = real(v)?,
            "plan.taper_stop" => self.plan.taper_stop = real(v)?,

            "filter.bandwidth" => self.filter.bandwidth = quantity(v, Length)?,
            "filter.wavelength" => self.filter.wavelength = quantity(v, Length)?,
            "filter.channel" => self.filter.channel = choice(v, CHANNELS)?,

            "sweep.metric" => self.sweep.metric = choice(v, METRICS)?,
            "sweep.method" => self.sweep.method = choice(v, METHODS)?,
            "sweep.duration" => self.sweep.duration = quantities(v, Time)?,
            "sweep.fraction" => self.sweep.fraction = reals(v)?,
            "sweep.temperature" => self.sweep.temperature = quantities(v, Temperature)?,
            "sweep.detuning" => self.sweep.detuning = quantities(v, AngularFrequency)?,

            "converge.steps" => self.converge.steps = counts(v)?,
            "converge.reference_steps" => self.converge.reference_steps = count(v)?,

            "output.jsa" => self.output.jsa = flag(v)?,
            "output.pump" => self.output.pump = flag(v)?,
            "output.modes" => self.output.modes = count(v)?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// Writes every entry in SI units; parsing the result gives back `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        let q = |v: f64, d: Dim| format!("{} {}", num(v), d.si());
        let ql = |v: &[f64], d: Dim| {
            if v.is_empty() {
                String::new()
            } else {
                format!("{} {}", list(v), d.si())
            }
        };
        let r = &self.raman;
        put("raman.model", name_of(&r.model, MODELS).into());
        put("raman.fraction", num(r.fraction));
        put("raman.tau1", q(r.tau1, Dim::Time));
        put("raman.tau2", q(r.tau2, Dim::Time));
        if let Some(t) = &r.table {
            put("raman.table", t.display().to_string());
        }
        put("raman.grid_n", r.grid_n.to_string());
        put("raman.grid_dt", q(r.grid_dt, Dim::Time));

        let w = &self.waveguide;
        put("waveguide.gamma_pump", q(w.gamma_pump, Dim::Nonlinearity));
        put("waveguide.gamma_signal", q(w.gamma_signal, Dim::Nonlinearity));
        put("waveguide.gamma_idler", q(w.gamma_idler, Dim::Nonlinearity));
        put("waveguide.beta1_signal", q(w.beta1_signal, Dim::Slowness));
        put("waveguide.beta1_idler", q(w.beta1_idler, Dim::Slowness));
        if let Some(x) = w.walk_off_ratio {
            put("waveguide.walk_off_ratio", num(x));
        }
        put("waveguide.beta2_signal", q(w.beta2_signal, Dim::Gvd));
        put("waveguide.beta3_signal", q(w.beta3_signal, Dim::Tod));
        put("waveguide.beta2_idler", q(w.beta2_idler, Dim::Gvd));
        put("waveguide.beta3_idler", q(w.beta3_idler, Dim::Tod));
        put("waveguide.length", q(w.length, Dim::Length));
        put("waveguide.temperature", q(w.temperature, Dim::Temperature));
        put("waveguide.detuning", q(w.detuning, Dim::AngularFrequency));

        let p = &self.pump;
        put("pump.duration", q(p.duration, Dim::Time));
        if let Some(x) = p.peak_power {
            put("pump.peak_power", q(x, Dim::Power));
        }
        if let Some(x) = p.pair_rate {
            put("pump.pair_rate", num(x));
        }
        put("pump.beta2", q(p.beta2, Dim::Gvd));
        put("pump.beta3", q(p.beta3, Dim::Tod));

        put("grid.n", self.grid.n.to_string());
        if let Some(x) = self.grid.span {
            put("grid.span", q(x, Dim::Time));
        }

        let pl = &self.plan;
        put("plan.steps", pl.steps.to_string());
        put("plan.ordering", name_of(&pl.ordering, ORDERINGS).into());
        put("plan.npm", pl.npm.to_string());
        put("plan.raman_in_sps", pl.raman_in_sps.to_string());
        put("plan.raman_in_xpm", pl.raman_in_xpm.to_string());
        put("plan.dispersion_order", pl.dispersion_order.to_string());
        put("plan.source", name_of(&pl.source, SOURCES).into());
        put("plan.aliasing_threshold", num(pl.aliasing_threshold));
        put("plan.taper_pass", num(pl.taper_pass));
        put("plan.taper_stop", num(pl.taper_stop));

        let f = &self.filter;
        put("filter.bandwidth", q(f.bandwidth, Dim::Length));
        put("filter.wavelength", q(f.wavelength, Dim::Length));
        put("filter.channel", name_of(&f.channel, CHANNELS).into());

        let sw = &self.sweep;
        put("sweep.metric", name_of(&sw.metric, METRICS).into());
        put("sweep.method", name_of(&sw.method, METHODS).into());
        put("sweep.duration", ql(&sw.duration, Dim::Time));
        put("sweep.fraction", list(&sw.fraction));
        put("sweep.temperature", ql(&sw.temperature, Dim::Temperature));
        put("sweep.detuning", ql(&sw.detuning, Dim::AngularFrequency));

        let c = &self.converge;
        put(
            "converge.steps",
            c.steps.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", "),
        );
        put("converge.reference_steps", c.reference_steps.to_string());

        let o = &self.output;
        put("output.jsa", o.jsa.to_string());
        put("output.pump", o.pump.to_string());
        put("output.modes", o.modes.to_string());
        s
    }

    /// Cross-field checks; single values were range-checked where the core allows it.
    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(0.0..=1.0).contains(&self.raman.fraction) {
            return bad(format!("raman.fraction must lie in [0, 1], got {}", self.raman.fraction));
        }
        if self.raman.model == RamanChoice::Table && self.raman.table.is_none() {
            return bad("raman.model = table needs raman.table".into());
        }
        if self.raman.model == RamanChoice::Instantaneous && self.raman.fraction != 0.0 {
            return bad("raman.model = instantaneous needs raman.fraction = 0".into());
        }
        if !(self.pump.duration > 0.0) {
            return bad("pump.duration must be positive".into());
        }
        if let Some(r) = self.pump.pair_rate {
            if !(r > 0.0) {
                return bad("pump.pair_rate must be positive".into());
            }
        }
        if self.grid.n < 8 || !self.grid.n.is_power_of_two() {
            return bad(format!("grid.n must be a power of two >= 8, got {}", self.grid.n));
        }
        if self.plan.steps == 0 {
            return bad("plan.steps must be positive".into());
        }
        if self.sweep.fraction.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return bad("sweep.fraction entries must lie in [0, 1]".into());
        }
        if self.sweep.duration.iter().any(|t| !(*t > 0.0)) {
            return bad("sweep.duration entries must be positive".into());
        }
        if self.converge.steps.is_empty() || self.converge.steps.contains(&0) {
            return bad("converge.steps needs positive step counts".into());
        }
        if self.converge.reference_steps < 2 || self.converge.reference_steps % 2 != 0 {
            return bad("converge.reference_steps must be even".into());
        }
        if let Some(&m) = self.converge.steps.iter().max() {
            if m >= self.converge.reference_steps / 2 {
                return bad("converge.steps must stay below half of converge.reference_steps".into());
            }
        }
        Ok(())
    }

    // ---- builders ----

    pub fn raman_model(&self, fraction: f64) -> CliResult<RamanModel> {
        let r = &self.raman;
        let kind = match r.model {
            RamanChoice::Instantaneous => return Ok(RamanModel::instantaneous()),
            RamanChoice::Silica => RamanKind::MultiMode(ModeTable::silica()),
            RamanChoice::Oscillator => RamanKind::SingleDampedOscillator { tau1: r.tau1, tau2: r.tau2 },
            RamanChoice::Table => {
                let path = r.table.as_ref().expect("validated");
                let text =
                    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                RamanKind::MultiMode(ModeTable::parse(&text)?)
            }
        };
        Ok(RamanModel::new(kind, fraction)?)
    }

    pub fn response(&self, fraction: f64) -> CliResult<RamanResponse> {
        if self.raman.model == RamanChoice::Instantaneous {
            return Ok(RamanResponse::instantaneous());
        }
        let grid = ResponseGrid {
            n: self.raman.grid_n,
            dt: self.raman.grid_dt,
        };
        Ok(RamanResponse::build(self.raman_model(fraction)?, grid)?)
    }

    pub fn spec(&self, duration: f64, temperature: f64, detuning: f64) -> WaveguideSpec {
        let w = &self.waveguide;
        let (b1s, b1i) = match w.walk_off_ratio {
            Some(x) => (x * duration / w.length, -x * duration / w.length),
            None => (w.beta1_signal, w.beta1_idler),
        };
        let trim = |v: Vec<f64>| {
            let keep = self.plan.dispersion_order.saturating_sub(1);
            let mut v: Vec<f64> = v.into_iter().take(keep).collect();
            while v.last() == Some(&0.0) {
                v.pop();
            }
            v
        };
        WaveguideSpec {
            gamma_pump: w.gamma_pump,
            gamma_signal: w.gamma_signal,
            gamma_idler: w.gamma_idler,
            beta1_signal: b1s,
            beta1_idler: b1i,
            dispersion_signal: trim(vec![w.beta2_signal, w.beta3_signal]),
            dispersion_idler: trim(vec![w.beta2_idler, w.beta3_idler]),
            length: w.length,
            temperature,
            detuning,
        }
    }

    pub fn base_spec(&self) -> WaveguideSpec {
        self.spec(self.pump.duration, self.waveguide.temperature, self.waveguide.detuning)
    }

    pub fn axis(&self, duration: f64, spec: &WaveguideSpec) -> CliResult<Axis> {
        Ok(match self.grid.span {
            Some(span) => Axis::centered_span(self.grid.n, span)?,
            None => sfwm_core::analytic::default_time_axis(self.grid.n, duration, spec)?,
        })
    }

    /// Peak power at an operating point: fixed, or solved from the target pair rate.
    pub fn peak_power(&self, duration: f64, spec: &WaveguideSpec, resp: &RamanResponse) -> CliResult<f64> {
        match (self.pump.peak_power, self.pump.pair_rate) {
            (Some(p), _) => Ok(p),
            (None, Some(target)) => Ok(sfwm_core::analysis::peak_power_for_pair_rate(target, duration, spec, resp)?),
            (None, None) => Err(CliError::Config("set pump.peak_power or pump.pair_rate".into())),
        }
    }

    pub fn pump_field(&self, duration: f64, spec: &WaveguideSpec, resp: &RamanResponse) -> CliResult<PumpField> {
        let axis = self.axis(duration, spec)?;
        let power = self.peak_power(duration, spec, resp)?;
        let pump = gaussian_pump(power, duration, axis, spec.gamma_pump)?;
        let mut disp = vec![self.pump.beta2, self.pump.beta3];
        disp.truncate(self.plan.dispersion_order.saturating_sub(1));
        while disp.last() == Some(&0.0) {
            disp.pop();
        }
        Ok(if disp.is_empty() { pump } else { pump.with_dispersion(disp) })
    }

    pub fn step_plan(&self) -> StepPlan {
        let p = &self.plan;
        let mut plan = StepPlan::new(p.steps);
        plan.ordering = p.ordering;
        plan.npm = p.npm;
        plan.raman_in_sps = p.raman_in_sps;
        plan.raman_in_xpm = p.raman_in_xpm;
        plan.dispersion_order = p.dispersion_order;
        plan.source = p.source;
        plan.aliasing_threshold = p.aliasing_threshold;
        plan.taper = SpectralTaper {
            pass: p.taper_pass,
            stop: p.taper_stop,
        };
        plan
    }

    pub fn quadrature(&self) -> QuadratureOptions {
        QuadratureOptions {
            npm: self.plan.npm,
            kernel: KernelMode::BandLimited {
                taper: SpectralTaper {
                    pass: self.plan.taper_pass,
                    stop: self.plan.taper_stop,
                },
                oversample: 16,
            },
            ..QuadratureOptions::default()
        }
    }

    /// Angular detection bandwidth.
    pub fn bandwidth(&self) -> f64 {
        bandwidth_from_wavelength(self.filter.bandwidth, self.filter.wavelength)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn units_are_required_and_converted() {
        let c = RunConfig::parse("pump.duration = 250 fs\nwaveguide.gamma_signal = 2 1/(W km)\n").unwrap();
        assert_eq!(c.pump.duration, 250e-15);
        assert_eq!(c.waveguide.gamma_signal, 2e-3);
        for bad in ["pump.duration = 250", "raman.fraction = 0.2 K", "pump.duration = 1 m", "grid.n = 2.5"] {
            assert!(matches!(RunConfig::parse(bad), Err(CliError::Config(_))), "{bad}");
        }
    }

    #[test]
    fn lists_and_linspace() {
        let c = RunConfig::parse("sweep.temperature = 4, 77 K\nsweep.detuning = linspace(1, 3, 3) THz\n").unwrap();
        assert_eq!(c.sweep.temperature, vec![4.0, 77.0]);
        let tau = 2.0 * std::f64::consts::PI * 1e12;
        assert_eq!(c.sweep.detuning, vec![tau, 2.0 * tau, 3.0 * tau]);
    }

    #[test]
    fn comments_duplicates_and_unknown_keys() {
        assert!(RunConfig::parse("# header\n\nplan.steps = 8 # trailing\n").is_ok());
        assert!(RunConfig::parse("plan.steps = 8\nplan.steps = 9\n").is_err());
        assert!(RunConfig::parse("plan.stepz = 8\n").is_err());
        assert!(RunConfig::parse("plan.steps 8\n").is_err());
    }

    #[test]
    fn power_and_rate_are_exclusive() {
        let c = RunConfig::parse("pump.pair_rate = 1e-3\n").unwrap();
        assert_eq!(c.pump.peak_power, None);
        let back = RunConfig::parse(&c.to_text()).unwrap();
        assert_eq!(back, c);
    }
}

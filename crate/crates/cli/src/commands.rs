//! The subcommands. Each writes its files into `out` and returns a JSON summary.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde_json::{json, Value};
use sfwm_core::analysis::{car, pair_rate_long_pulse, pairs_to_singles_ratio, rate_ratio_at, SinglesChannel};
use sfwm_core::analytic::jta_general_quadrature;
use sfwm_core::constants::detuned_wavelength;
use sfwm_core::gridio::GridFile;
use sfwm_core::propagator::propagate;
use sfwm_core::{coupling_w, schmidt, Complex64, JointAmplitude, RamanResponse};

use crate::config::{Channel, Method, Metric, RunConfig};
use crate::error::{CliError, CliResult};
use crate::table::{Cell, Table};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Clone, Debug)]
pub struct Report {
    pub summary: Value,
    pub files: Vec<PathBuf>,
}

fn prepare(out: &Path) -> CliResult<()> {
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))
}

fn save_grid(file: &GridFile, path: PathBuf, files: &mut Vec<PathBuf>) -> CliResult<()> {
    file.save(&path)?;
    files.push(path);
    Ok(())
}

fn save_table(t: &Table, path: PathBuf, files: &mut Vec<PathBuf>) -> CliResult<()> {
    t.write(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    files.push(path);
    Ok(())
}

fn save_json(v: &Value, path: PathBuf, files: &mut Vec<PathBuf>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(v).expect("json values serialize");
    std::fs::write(&path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    files.push(path);
    Ok(())
}

fn config_meta(cfg: &RunConfig, command: &str) -> Vec<String> {
    vec![format!("sfwm {command}"), cfg.to_text()]
}

/// Coupling spectra and kernels for the configured operating point.
pub fn cmd_respond(cfg: &RunConfig, out: &Path) -> CliResult<Report> {
    prepare(out)?;
    let resp = cfg.response(cfg.raman.fraction)?;
    let spec = cfg.base_spec();
    let axis = cfg.axis(cfg.pump.duration, &spec)?;
    let k = coupling_w(&resp, spec.detuning, spec.temperature, axis)?;
    let freq = k.freq_axis();

    let mut spectrum = Table::new(&[
        "omega_rad_s",
        "nu_thz",
        "chi_re",
        "chi_im",
        "w_re",
        "w_im",
        "noise_f",
    ]);
    spectrum.meta = config_meta(cfg, "respond");
    spectrum
        .meta
        .push(format!("frequency grid: n = {}, step = {:e} rad/s, origin = {:e} rad/s", freq.n, freq.step, freq.origin));
    spectrum.meta.push("W(omega) is the source coupling at the configured detuning and temperature".into());
    for (j, (w, f)) in k.spectrum().iter().zip(k.noise()).enumerate() {
        let om = freq.at(j);
        let chi = if resp.is_instantaneous() { Complex64::default() } else { resp.chi(om) };
        spectrum.push(vec![
            Cell::Num(om),
            Cell::Num(om / TWO_PI / 1e12),
            Cell::Num(chi.re),
            Cell::Num(chi.im),
            Cell::Num(w.re),
            Cell::Num(w.im),
            Cell::Num(*f),
        ]);
    }

    let time = k.time_axis();
    let mut kernel = Table::new(&["t_s", "kernel_re", "kernel_im"]);
    kernel.meta = config_meta(cfg, "respond");
    kernel
        .meta
        .push(format!("lag grid: n = {}, step = {:e} s, origin = {:e} s", time.n, time.step, time.origin));
    kernel.meta.push("a discrete delta carries weight 1/step".into());
    for (j, w) in k.kernel().iter().enumerate() {
        kernel.push(vec![Cell::Num(time.at(j)), Cell::Num(w.re), Cell::Num(w.im)]);
    }

    let mut files = Vec::new();
    save_table(&spectrum, out.join("response_spectrum.csv"), &mut files)?;
    save_table(&kernel, out.join("response_kernel.csv"), &mut files)?;
    let peak = spectrum
        .rows
        .iter()
        .filter_map(|r| match (&r[1], &r[3]) {
            (Cell::Num(nu), Cell::Num(c)) if *nu > 0.0 => Some((*nu, *c)),
            _ => None,
        })
        .fold((f64::NAN, f64::MIN), |b, x| if x.1 > b.1 { x } else { b });
    let summary = json!({
        "command": "respond",
        "fraction": resp.fraction(),
        "points": freq.n,
        "chi_im_peak_thz": if resp.is_instantaneous() { Value::Null } else { json!(peak.0) },
        "mean_delay_s": if resp.is_instantaneous() { 0.0 } else { resp.mean_delay() },
    });
    save_json(&summary, out.join("response.json"), &mut files)?;
    Ok(Report { summary, files })
}

/// Purity from the SVD, or `None` for a vanishing amplitude.
fn purity_of(a: &JointAmplitude) -> CliResult<Option<(f64, Vec<Vec<Complex64>>, Vec<Vec<Complex64>>)>> {
    if a.data().iter().all(|z| *z == Complex64::default()) {
        return Ok(None);
    }
    let sp = schmidt(a)?;
    Ok(Some((sp.purity, sp.signal_modes, sp.idler_modes)))
}

/// One split-step run with grid dumps and a summary.
pub fn cmd_propagate(cfg: &RunConfig, out: &Path) -> CliResult<Report> {
    prepare(out)?;
    let resp = cfg.response(cfg.raman.fraction)?;
    let spec = cfg.base_spec();
    let pump = cfg.pump_field(cfg.pump.duration, &spec, &resp)?;
    let plan = cfg.step_plan();
    info!("propagating {} steps on {}^2", plan.steps, pump.axis().n);
    let result = propagate(&pump, &spec, &resp, &plan)?;
    let mut files = Vec::new();
    save_grid(&GridFile::from_amplitude(&result.jta), out.join("jta.jag"), &mut files)?;
    if cfg.output.jsa {
        save_grid(&GridFile::from_amplitude(&result.jsa), out.join("jsa.jag"), &mut files)?;
    }
    if cfg.output.pump {
        save_grid(&GridFile::from_pump(&result.pump), out.join("pump.jag"), &mut files)?;
    }
    let schmidt_info = purity_of(&result.jta)?;
    if let (Some((_, sig, idl)), k) = (&schmidt_info, cfg.output.modes) {
        if k > 0 {
            let k = k.min(sig.len());
            let ax = result.jta.signal;
            let dom = result.jta.domain;
            save_grid(&GridFile::from_modes(&sig[..k], ax, dom), out.join("signal_modes.jag"), &mut files)?;
            save_grid(&GridFile::from_modes(&idl[..k], result.jta.idler, dom), out.join("idler_modes.jag"), &mut files)?;
        }
    }
    let purity = schmidt_info.as_ref().map(|s| s.0);
    let long_pulse = match pair_rate_long_pulse(&pump, &spec, &resp) {
        Ok(r) => Some(r),
        Err(e) => {
            warn!("no long-pulse rate: {e}");
            None
        }
    };
    let monitor: Vec<Value> = result
        .diagnostics
        .iter()
        .map(|d| json!({"z_m": d.z, "pair_probability": d.probability}))
        .collect();
    let summary = json!({
        "command": "propagate",
        "pair_probability": result.probability(),
        "pair_rate_long_pulse": long_pulse,
        "purity": purity,
        "schmidt_number": purity.map(|p| 1.0 / p),
        "steps": result.steps,
        "step_size_m": result.step_size,
        "edge_fraction": result.edge_fraction,
        "peak_power_w": cfg.peak_power(cfg.pump.duration, &spec, &resp)?,
        "grid_n": pump.axis().n,
        "monitor": monitor,
    });
    save_json(&summary, out.join("summary.json"), &mut files)?;
    Ok(Report { summary, files })
}

#[derive(Clone, Copy, Debug)]
struct Point {
    duration: f64,
    fraction: f64,
    temperature: f64,
    detuning: f64,
}

fn metric_columns(m: Metric) -> &'static [&'static str] {
    match m {
        Metric::Rate => &["rate_ratio"],
        Metric::Statistics => &[
            "peak_power_w",
            "pair_rate",
            "singles_idler",
            "singles_signal",
            "car",
            "car_limit",
            "c_ratio",
        ],
        Metric::Purity => &["purity", "schmidt_number", "pair_probability", "peak_power_w"],
    }
}

fn evaluate(cfg: &RunConfig, resp: &RamanResponse, p: Point) -> CliResult<Vec<f64>> {
    let spec = cfg.spec(p.duration, p.temperature, p.detuning);
    match cfg.sweep.metric {
        Metric::Rate => Ok(vec![rate_ratio_at(resp, p.detuning, p.temperature)?]),
        Metric::Statistics => {
            let pump = cfg.pump_field(p.duration, &spec, resp)?;
            let power = cfg.peak_power(p.duration, &spec, resp)?;
            let s = car(&pump, &spec, resp, cfg.bandwidth())?;
            let channel = match cfg.filter.channel {
                Channel::Literal => SinglesChannel::Literal,
                Channel::Signal => SinglesChannel::Signal,
            };
            let c = pairs_to_singles_ratio(resp, p.detuning, p.temperature, channel)?;
            Ok(vec![
                power,
                s.pair_rate,
                s.singles_idler,
                s.singles_signal,
                s.car,
                1.0 / s.pair_rate,
                c,
            ])
        }
        Metric::Purity => {
            let pump = cfg.pump_field(p.duration, &spec, resp)?;
            let power = cfg.peak_power(p.duration, &spec, resp)?;
            let jta = match cfg.sweep.method {
                Method::SplitStep => propagate(&pump, &spec, resp, &cfg.step_plan())?.jta,
                Method::Quadrature => jta_general_quadrature(&pump, &spec, resp, &cfg.quadrature())?.amplitude,
            };
            let prob = jta.norm_sqr();
            let pur = purity_of(&jta)?.map_or(f64::NAN, |s| s.0);
            Ok(vec![pur, 1.0 / pur, prob, power])
        }
    }
}

/// Long-format table over the cartesian product of the sweep axes.
pub fn sweep_table(cfg: &RunConfig) -> CliResult<Table> {
    let s = &cfg.sweep;
    let base = Point {
        duration: cfg.pump.duration,
        fraction: cfg.raman.fraction,
        temperature: cfg.waveguide.temperature,
        detuning: cfg.waveguide.detuning,
    };
    let axes: Vec<(&str, &[f64])> = [
        ("duration_s", s.duration.as_slice()),
        ("fraction", s.fraction.as_slice()),
        ("temperature_k", s.temperature.as_slice()),
        ("detuning_rad_s", s.detuning.as_slice()),
    ]
    .into_iter()
    .filter(|(_, v)| !v.is_empty())
    .collect();
    if axes.is_empty() {
        return Err(CliError::Config("sweep needs at least one of sweep.duration, sweep.fraction, sweep.temperature, sweep.detuning".into()));
    }

    // odometer over the axes, first axis outermost
    let total: usize = axes.iter().map(|(_, v)| v.len()).product();
    let mut points = Vec::with_capacity(total);
    let mut idx = vec![0usize; axes.len()];
    for _ in 0..total {
        let mut p = base;
        let mut coords = Vec::with_capacity(axes.len());
        for (a, (name, vals)) in axes.iter().enumerate() {
            let v = vals[idx[a]];
            coords.push(v);
            match *name {
                "duration_s" => p.duration = v,
                "fraction" => p.fraction = v,
                "temperature_k" => p.temperature = v,
                _ => p.detuning = v,
            }
        }
        points.push((coords, p));
        for a in (0..axes.len()).rev() {
            idx[a] += 1;
            if idx[a] < axes[a].1.len() {
                break;
            }
            idx[a] = 0;
        }
    }

    let mut responses = BTreeMap::new();
    for (_, p) in &points {
        if let std::collections::btree_map::Entry::Vacant(e) = responses.entry(p.fraction.to_bits()) {
            e.insert(cfg.response(p.fraction)?);
        }
    }

    let metrics = metric_columns(s.metric);
    info!("sweeping {} points ({} metric columns)", points.len(), metrics.len());
    let results: Vec<CliResult<Vec<f64>>> = points
        .par_iter()
        .map(|(_, p)| evaluate(cfg, &responses[&p.fraction.to_bits()], *p))
        .collect();

    let with_nu = !s.detuning.is_empty();
    let mut cols: Vec<&str> = axes.iter().map(|(n, _)| *n).collect();
    if with_nu {
        cols.extend(["nu_thz", "wavelength_nm"]);
    }
    cols.extend_from_slice(metrics);
    cols.push("error");
    let mut table = Table::new(&cols);
    table.meta = config_meta(cfg, "sweep");
    table
        .meta
        .push(format!("wavelength_nm is the idler sideband of a {:e} m carrier", cfg.filter.wavelength));
    for ((coords, p), r) in points.iter().zip(results) {
        let mut row: Vec<Cell> = coords.iter().map(|v| Cell::Num(*v)).collect();
        if with_nu {
            row.push(Cell::Num(p.detuning / TWO_PI / 1e12));
            row.push(Cell::Num(detuned_wavelength(cfg.filter.wavelength, p.detuning) * 1e9));
        }
        match r {
            Ok(vals) => {
                row.extend(vals.into_iter().map(Cell::Num));
                row.push(Cell::Text(String::new()));
            }
            Err(e) => {
                warn!("sweep point {:?} failed: {e}", coords);
                row.extend(metrics.iter().map(|_| Cell::Num(f64::NAN)));
                row.push(Cell::Text(e.to_string()));
            }
        }
        table.push(row);
    }
    Ok(table)
}

pub fn cmd_sweep(cfg: &RunConfig, out: &Path) -> CliResult<Report> {
    prepare(out)?;
    let table = sweep_table(cfg)?;
    let failed = table
        .rows
        .iter()
        .filter(|r| matches!(r.last(), Some(Cell::Text(t)) if !t.is_empty()))
        .count();
    let mut files = Vec::new();
    save_table(&table, out.join("sweep.csv"), &mut files)?;
    let summary = json!({
        "command": "sweep",
        "rows": table.rows.len(),
        "failed": failed,
        "columns": table.columns,
    });
    save_json(&summary, out.join("sweep.json"), &mut files)?;
    Ok(Report { summary, files })
}

fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Self-convergence of the JTA against a Richardson reference built from
/// `reference_steps` and half as many.
pub fn cmd_converge(cfg: &RunConfig, out: &Path) -> CliResult<Report> {
    prepare(out)?;
    let resp = cfg.response(cfg.raman.fraction)?;
    let spec = cfg.base_spec();
    let pump = cfg.pump_field(cfg.pump.duration, &spec, &resp)?;
    let run = |steps: usize| -> CliResult<JointAmplitude> {
        let mut plan = cfg.step_plan();
        plan.steps = steps;
        info!("converge: {steps} steps");
        Ok(propagate(&pump, &spec, &resp, &plan)?.jta)
    };
    let r = cfg.converge.reference_steps;
    let fine = run(r)?;
    let coarse = run(r / 2)?;
    let reference: Vec<Complex64> = fine
        .data()
        .iter()
        .zip(coarse.data())
        .map(|(f, c)| f + (f - c) / 3.0)
        .collect();
    let reference_error = rel_l2(fine.data(), &reference);

    let mut steps = cfg.converge.steps.clone();
    steps.sort_unstable();
    steps.dedup();
    let mut table = Table::new(&["steps", "h_m", "rel_l2_error", "pair_probability"]);
    let (mut hs, mut errs) = (Vec::new(), Vec::new());
    for &s in &steps {
        let a = run(s)?;
        let h = spec.length / s as f64;
        let e = rel_l2(a.data(), &reference);
        hs.push(h);
        errs.push(e);
        table.push(vec![Cell::Int(s), Cell::Num(h), Cell::Num(e), Cell::Num(a.norm_sqr())]);
    }
    let slope = if steps.len() >= 2 && errs.iter().all(|e| *e > 0.0) {
        log_slope(&hs, &errs)
    } else {
        f64::NAN
    };
    table.meta = config_meta(cfg, "converge");
    table.meta.push(format!("reference: Richardson from {r} and {} steps", r / 2));
    table.meta.push(format!("reference self-error = {reference_error:.16e}"));
    table.meta.push(format!("fitted slope = {slope:.16e}"));

    let mut files = Vec::new();
    save_table(&table, out.join("converge.csv"), &mut files)?;
    let summary = json!({
        "command": "converge",
        "slope": slope,
        "reference_steps": r,
        "reference_self_error": reference_error,
        "steps": steps,
        "errors": errs,
    });
    save_json(&summary, out.join("converge.json"), &mut files)?;
    Ok(Report { summary, files })
}

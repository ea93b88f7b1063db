//! Nonlinear response: the delayed Raman response `h_R`, its susceptibility
//! `chi = chi' + i chi''`, the Bose-Einstein phonon occupation and the pair
//! coupling kernels `W(w)`, `W(t)` and noise spectrum `F(w)` built from them.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::constants::{wavenumber_to_angular, HBAR, K_B};
use crate::error::{invalid, Error, Result};
use crate::fourier::Fourier1d;
use crate::grid::Axis;
use crate::interp::UniformSeries;

const SILICA_TABLE: &str = include_str!("../data/silica_raman_modes.txt");

/// One damped vibrational mode; all frequencies in rad/s.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RamanMode {
    pub center: f64,
    pub gaussian_fwhm: f64,
    pub lorentzian_fwhm: f64,
    pub amplitude: f64,
}

impl RamanMode {
    fn eval(&self, t: f64) -> f64 {
        let gamma = self.lorentzian_fwhm / 2.0;
        let big = self.gaussian_fwhm / 2.0;
        self.amplitude * (-gamma * t - big * big * t * t / 4.0).exp() * (self.center * t).sin()
    }

    fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite();
        if !(ok(self.center) && ok(self.gaussian_fwhm) && ok(self.lorentzian_fwhm) && ok(self.amplitude)) {
            return Err(invalid("Raman mode has a non-finite entry"));
        }
        if self.center <= 0.0 {
            return Err(invalid(format!("Raman mode center must be positive, got {}", self.center)));
        }
        if self.gaussian_fwhm < 0.0 || self.lorentzian_fwhm < 0.0 {
            // negative damping grows without bound; no causal normalizable response
            return Err(Error::NonNormalizable(format!(
                "mode at {:.4e} rad/s has negative width",
                self.center
            )));
        }
        Ok(())
    }
}

/// A set of modes, typically read from a text table.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeTable {
    pub modes: Vec<RamanMode>,
}

impl ModeTable {
    /// Parses a table with columns `center gaussian_fwhm lorentzian_fwhm amplitude`.
    ///
    /// Lines starting with `#` are comments, except a `# units: <u>` directive
    /// selecting the frequency unit: `rad/s` (default), `cm^-1`, `Hz` or `THz`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut scale: Box<dyn Fn(f64) -> f64> = Box::new(|x| x);
        let mut modes = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(unit) = comment.trim().strip_prefix("units:") {
                    scale = match unit.trim() {
                        "rad/s" => Box::new(|x| x),
                        "cm^-1" | "1/cm" => Box::new(wavenumber_to_angular),
                        "Hz" => Box::new(|x| 2.0 * PI * x),
                        "THz" => Box::new(|x| 2.0 * PI * 1e12 * x),
                        other => return Err(invalid(format!("unknown table unit '{other}'"))),
                    };
                }
                continue;
            }
            let cols: Vec<f64> = line
                .split_whitespace()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| invalid(format!("mode table line {}: {e}", lineno + 1)))?;
            if cols.len() != 4 {
                return Err(invalid(format!(
                    "mode table line {}: expected 4 columns, found {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            let mode = RamanMode {
                center: scale(cols[0]),
                gaussian_fwhm: scale(cols[1]),
                lorentzian_fwhm: scale(cols[2]),
                amplitude: cols[3],
            };
            mode.validate()?;
            modes.push(mode);
        }
        if modes.is_empty() {
            return Err(invalid("mode table is empty"));
        }
        Ok(ModeTable { modes })
    }

    /// The bundled 13-mode fused-silica table.
    pub fn silica() -> Self {
        ModeTable::parse(SILICA_TABLE).expect("bundled table parses")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RamanKind {
    Instantaneous,
    /// `h ~ exp(-t/tau2) sin(t/tau1)`.
    SingleDampedOscillator { tau1: f64, tau2: f64 },
    MultiMode(ModeTable),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RamanModel {
    pub kind: RamanKind,
    /// Fraction `f_R` of the nonlinearity carried by the delayed response.
    pub fraction: f64,
}

impl RamanModel {
    pub fn new(kind: RamanKind, fraction: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(invalid(format!("f_R must lie in [0, 1], got {fraction}")));
        }
        match &kind {
            RamanKind::Instantaneous => {}
            RamanKind::SingleDampedOscillator { tau1, tau2 } => {
                if !(*tau1 > 0.0 && tau1.is_finite()) {
                    return Err(invalid(format!("tau1 must be positive, got {tau1}")));
                }
                if !(*tau2 > 0.0 && tau2.is_finite()) {
                    return Err(Error::NonNormalizable(format!("tau2 must be positive, got {tau2}")));
                }
            }
            RamanKind::MultiMode(t) => {
                if t.modes.is_empty() {
                    return Err(invalid("mode table is empty"));
                }
                for m in &t.modes {
                    m.validate()?;
                }
            }
        }
        Ok(RamanModel { kind, fraction })
    }

    pub fn silica(fraction: f64) -> Result<Self> {
        RamanModel::new(RamanKind::MultiMode(ModeTable::silica()), fraction)
    }

    pub fn instantaneous() -> Self {
        RamanModel {
            kind: RamanKind::Instantaneous,
            fraction: 0.0,
        }
    }

    /// Unnormalized response at `t >= 0`.
    fn raw(&self, t: f64) -> f64 {
        match &self.kind {
            RamanKind::Instantaneous => 0.0,
            RamanKind::SingleDampedOscillator { tau1, tau2 } => (-t / tau2).exp() * (t / tau1).sin(),
            RamanKind::MultiMode(table) => table.modes.iter().map(|m| m.eval(t)).sum(),
        }
    }

    /// Highest angular frequency with appreciable spectral weight.
    fn top_frequency(&self) -> f64 {
        match &self.kind {
            RamanKind::Instantaneous => 0.0,
            RamanKind::SingleDampedOscillator { tau1, tau2 } => 1.0 / tau1 + 1.0 / tau2,
            RamanKind::MultiMode(table) => table
                .modes
                .iter()
                .map(|m| m.center + m.gaussian_fwhm + m.lorentzian_fwhm)
                .fold(0.0, f64::max),
        }
    }
}

/// Sampling of `h_R` on `t_n = n dt`, `n = 0..n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResponseGrid {
    pub n: usize,
    pub dt: f64,
}

impl Default for ResponseGrid {
    fn default() -> Self {
        ResponseGrid { n: 16384, dt: 1e-15 }
    }
}

/// Bose-Einstein occupation `1 / (exp(hbar w / k_B T) - 1)`.
///
/// `omega` must be positive (pass `|w|`); `T = 0` gives 0.
pub fn n_th(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::Domain(format!("n_th needs a positive frequency, got {omega}")));
    }
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(Error::Domain(format!("temperature must be >= 0 K, got {temperature}")));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (HBAR * omega / (K_B * temperature)).exp_m1())
}

fn check_temperature(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("temperature must be >= 0 K, got {t}")));
    }
    Ok(())
}

/// A built, normalized response with its susceptibility.
#[derive(Clone, Debug)]
pub struct RamanResponse {
    model: RamanModel,
    grid: ResponseGrid,
    samples: Vec<f64>,
    /// Samples beyond this index are negligible and skipped in sums.
    support: usize,
    spectrum: Vec<Complex64>,
    mean_delay: f64,
}

impl RamanResponse {
    pub fn build(model: RamanModel, grid: ResponseGrid) -> Result<Self> {
        let model = RamanModel::new(model.kind, model.fraction)?;
        if grid.n < 16 || !(grid.dt > 0.0 && grid.dt.is_finite()) {
            return Err(invalid(format!("bad response grid {grid:?}")));
        }
        let n = grid.n;
        let dt = grid.dt;
        let mut samples = vec![0.0; n];
        let support;
        if let RamanKind::Instantaneous = model.kind {
            samples[0] = 1.0 / dt;
            support = 1;
        } else {
            let top = model.top_frequency();
            if PI / dt < 10.0 * top {
                return Err(Error::GridMismatch(format!(
                    "response step {dt:e} s does not resolve {top:.3e} rad/s (need pi/dt >= 10x)"
                )));
            }
            samples
                .par_iter_mut()
                .enumerate()
                .for_each(|(j, h)| *h = model.raw(j as f64 * dt));
            let peak = samples.iter().fold(0.0_f64, |m, h| m.max(h.abs()));
            let tail = samples[n - n / 10..].iter().fold(0.0_f64, |m, h| m.max(h.abs()));
            if !(peak > 0.0) || tail > 1e-10 * peak {
                return Err(Error::NonNormalizable(format!(
                    "response has not decayed within {:e} s (tail/peak = {:.2e})",
                    n as f64 * dt,
                    tail / peak
                )));
            }
            let area: f64 = samples.iter().sum::<f64>() * dt;
            if !(area > 0.0) || !area.is_finite() {
                return Err(Error::NonNormalizable(format!("response area is {area:e}")));
            }
            for h in samples.iter_mut() {
                *h /= area;
            }
            let cut = 1e-17 * peak / area;
            support = samples.iter().rposition(|h| h.abs() > cut).map_or(1, |k| k + 1);
        }
        let mean_delay = samples[..support]
            .iter()
            .enumerate()
            .map(|(j, h)| j as f64 * dt * h)
            .sum::<f64>()
            * dt;
        let mut spectrum: Vec<Complex64> = samples.iter().map(|&h| Complex64::new(h, 0.0)).collect();
        Fourier1d::new(Axis::new(n, dt, 0.0)?).forward(&mut spectrum);
        Ok(RamanResponse {
            model,
            grid,
            samples,
            support,
            spectrum,
            mean_delay,
        })
    }

    pub fn instantaneous() -> Self {
        RamanResponse::build(RamanModel::instantaneous(), ResponseGrid { n: 16, dt: 1e-15 })
            .expect("instantaneous response always builds")
    }

    pub fn model(&self) -> &RamanModel {
        &self.model
    }

    pub fn fraction(&self) -> f64 {
        self.model.fraction
    }

    pub fn grid(&self) -> ResponseGrid {
        self.grid
    }

    pub fn is_instantaneous(&self) -> bool {
        matches!(self.model.kind, RamanKind::Instantaneous)
    }

    /// Normalized samples `h_R(n dt)` (1/s); `sum h dt = 1`.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Samples up to the last non-negligible one.
    pub fn support_samples(&self) -> &[f64] {
        &self.samples[..self.support]
    }

    /// Duration of the non-negligible part of `h_R`.
    pub fn support_time(&self) -> f64 {
        self.support as f64 * self.grid.dt
    }

    /// First moment `integral t h_R dt`, equal to `d chi''/dw` at 0.
    pub fn mean_delay(&self) -> f64 {
        self.mean_delay
    }

    /// RMS width of `|h_R(t)|^2`, the time scale of the delayed part of `W(t)`.
    pub fn rms_width(&self) -> f64 {
        if self.is_instantaneous() {
            return 0.0;
        }
        let dt = self.grid.dt;
        let h = self.support_samples();
        let total: f64 = h.iter().map(|x| x * x).sum();
        let mean = h.iter().enumerate().map(|(j, x)| j as f64 * dt * x * x).sum::<f64>() / total;
        let var = h
            .iter()
            .enumerate()
            .map(|(j, x)| (j as f64 * dt - mean).powi(2) * x * x)
            .sum::<f64>()
            / total;
        var.sqrt()
    }

    /// Angular-frequency axis of [`spectrum`](Self::spectrum).
    pub fn spectrum_axis(&self) -> Axis {
        Axis::new(self.grid.n, self.grid.dt, 0.0).unwrap().reciprocal()
    }

    /// `chi` sampled on [`spectrum_axis`](Self::spectrum_axis) by FFT.
    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    /// `chi(w) = sum_n h_n exp(i w n dt) dt`, exact for the sampled response.
    pub fn chi(&self, omega: f64) -> Complex64 {
        if self.is_instantaneous() {
            return Complex64::new(1.0, 0.0);
        }
        const BLOCK: usize = 64;
        let dt = self.grid.dt;
        let step = Complex64::from_polar(1.0, omega * dt);
        let mut acc = Complex64::default();
        for (b, chunk) in self.samples[..self.support].chunks(BLOCK).enumerate() {
            let mut rot = Complex64::from_polar(1.0, omega * dt * (b * BLOCK) as f64);
            for &h in chunk {
                acc += rot * h;
                rot *= step;
            }
        }
        acc * dt
    }

    pub fn chi_many(&self, omegas: &[f64]) -> Vec<Complex64> {
        omegas.par_iter().map(|&w| self.chi(w)).collect()
    }

    /// Delayed-plus-instantaneous response spectrum `1 - f_R + f_R chi(w)`.
    pub fn response_spectrum(&self, omega: f64) -> Complex64 {
        let f = self.fraction();
        Complex64::new(1.0 - f, 0.0) + self.chi(omega) * f
    }

    /// `n_th(x) chi''(x)` for `x >= 0`, continuous at `x = 0`.
    pub fn thermal_loss(&self, x: f64, temperature: f64) -> Result<f64> {
        check_temperature(temperature)?;
        if x < 0.0 {
            return Err(Error::Domain(format!("thermal_loss needs x >= 0, got {x}")));
        }
        if x == 0.0 {
            // n_th(x) ~ k_B T / (hbar x), chi''(x) ~ x * mean_delay
            return Ok(K_B * temperature / HBAR * self.mean_delay);
        }
        Ok(n_th(x, temperature)? * self.chi(x).im)
    }

    fn thermal_loss_with(&self, x: f64, chi_im: f64, temperature: f64) -> f64 {
        if x == 0.0 {
            K_B * temperature / HBAR * self.mean_delay
        } else if temperature == 0.0 {
            0.0
        } else {
            chi_im / (HBAR * x / (K_B * temperature)).exp_m1()
        }
    }

    /// `[2 n_th(|x|) + 1] chi''(|x|)`, the dissipative weight entering `W`.
    pub fn dissipative_weight(&self, x: f64, temperature: f64) -> Result<f64> {
        check_temperature(temperature)?;
        let a = x.abs();
        let c = self.chi(a);
        Ok(2.0 * self.thermal_loss_with(a, c.im, temperature) + c.im)
    }

    /// `W(w)` at a single frequency.
    pub fn coupling_at(&self, omega: f64, detuning: f64, temperature: f64) -> Result<Complex64> {
        check_temperature(temperature)?;
        let f = self.fraction();
        if f == 0.0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let x = (detuning - omega).abs();
        let c = self.chi(x);
        let diss = 2.0 * self.thermal_loss_with(x, c.im, temperature) + c.im;
        Ok(Complex64::new(1.0 - f + f * c.re, f * diss))
    }

    /// `F(w) = 2 f_R chi''(|w|) [n_th(|w|) + step(w)]` with `step(0) = 1/2`.
    pub fn noise_at(&self, omega: f64, temperature: f64) -> Result<f64> {
        check_temperature(temperature)?;
        let f = self.fraction();
        if f == 0.0 {
            return Ok(0.0);
        }
        let x = omega.abs();
        let c = self.chi(x);
        let step = if omega > 0.0 {
            1.0
        } else if omega == 0.0 {
            0.5
        } else {
            0.0
        };
        Ok(2.0 * f * (self.thermal_loss_with(x, c.im, temperature) + step * c.im))
    }

    fn check_band(&self, max_abs: f64) -> Result<()> {
        if self.fraction() > 0.0 && !self.is_instantaneous() && max_abs > PI / self.grid.dt {
            return Err(Error::GridMismatch(format!(
                "kernel needs chi up to {max_abs:.3e} rad/s but the response grid resolves only {:.3e}",
                PI / self.grid.dt
            )));
        }
        Ok(())
    }
}

/// Smooth low-pass window applied to kernels before they act on a grid, as a
/// fraction of that grid's Nyquist frequency: flat up to `pass`, raised-cosine
/// roll-off, zero from `stop`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralTaper {
    pub pass: f64,
    pub stop: f64,
}

impl Default for SpectralTaper {
    fn default() -> Self {
        SpectralTaper {
            pass: 0.6,
            stop: 0.85,
        }
    }
}

impl SpectralTaper {
    pub const NONE: SpectralTaper = SpectralTaper {
        pass: f64::INFINITY,
        stop: f64::INFINITY,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.pass > 0.0 && self.stop >= self.pass) {
            return Err(invalid(format!("taper needs 0 < pass <= stop, got {self:?}")));
        }
        Ok(())
    }

    /// Window value at `r = |w| / nyquist`.
    pub fn window(&self, r: f64) -> f64 {
        let r = r.abs();
        if r <= self.pass {
            1.0
        } else if r >= self.stop {
            0.0
        } else {
            0.5 * (1.0 + (PI * (r - self.pass) / (self.stop - self.pass)).cos())
        }
    }
}

/// `W(w)`, its time-domain twin `W(t)` and `F(w)` on one grid.
///
/// `time` is the (centered) lag axis of `W(t)`; the spectral samples live on
/// `time.reciprocal()`.
#[derive(Clone, Debug)]
pub struct CouplingKernel {
    pub detuning: f64,
    pub temperature: f64,
    pub fraction: f64,
    time: Axis,
    spectrum: Vec<Complex64>,
    kernel: Vec<Complex64>,
    noise: Vec<f64>,
}

/// Builds `W` on the reciprocal of `time` and transforms it to `W(t)`.
pub fn coupling_w(resp: &RamanResponse, detuning: f64, temperature: f64, time: Axis) -> Result<CouplingKernel> {
    check_temperature(temperature)?;
    if !detuning.is_finite() {
        return Err(invalid("detuning must be finite"));
    }
    check_centered(&time)?;
    let freq = time.reciprocal();
    let nus = freq.points();
    let max_abs = nus
        .iter()
        .map(|nu| (detuning - nu).abs().max(nu.abs()))
        .fold(0.0, f64::max);
    resp.check_band(max_abs)?;
    let spectrum: Vec<Complex64> = nus
        .par_iter()
        .map(|&nu| resp.coupling_at(nu, detuning, temperature).unwrap())
        .collect();
    let noise: Vec<f64> = nus
        .par_iter()
        .map(|&nu| resp.noise_at(nu, temperature).unwrap())
        .collect();
    let mut kernel = spectrum.clone();
    Fourier1d::new(time).inverse(&mut kernel);
    Ok(CouplingKernel {
        detuning,
        temperature,
        fraction: resp.fraction(),
        time,
        spectrum,
        kernel,
        noise,
    })
}

/// `F(w)` on the reciprocal of `time`.
pub fn noise_f(resp: &RamanResponse, temperature: f64, time: Axis) -> Result<Vec<f64>> {
    check_temperature(temperature)?;
    check_centered(&time)?;
    let nus = time.reciprocal().points();
    let max_abs = nus.iter().fold(0.0_f64, |m, nu| m.max(nu.abs()));
    resp.check_band(max_abs)?;
    nus.par_iter().map(|&nu| resp.noise_at(nu, temperature)).collect()
}

fn check_centered(time: &Axis) -> Result<()> {
    let expect = -((time.n / 2) as f64) * time.step;
    if time.n % 2 != 0 || (time.origin - expect).abs() > 1e-9 * time.step {
        return Err(Error::GridMismatch("kernel axis must be centered with an even length".into()));
    }
    Ok(())
}

/// Lag axis for the kernel acting on a grid with step `dt` and `n` points:
/// covers every lag on the grid plus room for the response's own extent.
pub fn kernel_axis(resp: &RamanResponse, n: usize, dt: f64) -> Result<Axis> {
    let reach = if resp.fraction() > 0.0 {
        (4.0 * resp.support_time() / dt).ceil() as usize
    } else {
        0
    };
    let m = (4 * n).max(2 * (n + reach)).next_power_of_two().min(1 << 22);
    Axis::centered(m, dt)
}

impl CouplingKernel {
    pub fn time_axis(&self) -> Axis {
        self.time
    }

    pub fn freq_axis(&self) -> Axis {
        self.time.reciprocal()
    }

    /// `W(w)` on [`freq_axis`](Self::freq_axis).
    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    /// `W(t)` on [`time_axis`](Self::time_axis); a discrete delta carries weight `1/dt`.
    pub fn kernel(&self) -> &[Complex64] {
        &self.kernel
    }

    /// `F(w)` on [`freq_axis`](Self::freq_axis).
    pub fn noise(&self) -> &[f64] {
        &self.noise
    }

    /// `W(k dt)`, zero beyond the axis.
    pub fn lag(&self, k: i64) -> Complex64 {
        let j = self.time.zero_index() as i64 + k;
        if j < 0 || j as usize >= self.time.n {
            Complex64::default()
        } else {
            self.kernel[j as usize]
        }
    }

    /// Piecewise-linear `W(t)` between lattice lags.
    pub fn linear_at(&self, t: f64) -> Complex64 {
        UniformSeries::new(self.time.origin, self.time.step, self.kernel.clone()).linear(t)
    }

    /// Copy with the spectrum multiplied by `taper` and `W(t)` recomputed.
    pub fn tapered(&self, taper: SpectralTaper) -> CouplingKernel {
        let freq = self.freq_axis();
        let ny = self.time.nyquist();
        let spectrum: Vec<Complex64> = self
            .spectrum
            .iter()
            .enumerate()
            .map(|(m, w)| w * taper.window(freq.at(m) / ny))
            .collect();
        let mut kernel = spectrum.clone();
        Fourier1d::new(self.time).inverse(&mut kernel);
        CouplingKernel {
            spectrum,
            kernel,
            ..self.clone()
        }
    }

    /// `W(t)` resampled `factor` times finer by spectral zero padding, for
    /// evaluation between lattice lags.
    pub fn oversampled(&self, factor: usize) -> UniformSeries<Complex64> {
        let m = self.time.n;
        let fine = Axis::centered(m * factor, self.time.step / factor as f64).unwrap();
        let mut spec = vec![Complex64::default(); fine.n];
        let off = (fine.n - m) / 2;
        for (k, w) in self.spectrum.iter().enumerate() {
            if k == 0 && factor > 1 {
                // split the unpaired Nyquist sample symmetrically
                spec[off] += w * 0.5;
                spec[off + m] += w * 0.5;
            } else {
                spec[off + k] = *w;
            }
        }
        Fourier1d::new(fine).inverse(&mut spec);
        UniformSeries::new(fine.origin, fine.step, spec)
    }

    /// RMS width of `|W(t)|^2` about its centroid.
    pub fn rms_width(&self) -> f64 {
        let pts = self.time.points();
        let w: Vec<f64> = self.kernel.iter().map(|k| k.norm_sqr()).collect();
        let total: f64 = w.iter().sum();
        let mean = pts.iter().zip(&w).map(|(t, p)| t * p).sum::<f64>() / total;
        (pts.iter().zip(&w).map(|(t, p)| (t - mean).powi(2) * p).sum::<f64>() / total).sqrt()
    }
}

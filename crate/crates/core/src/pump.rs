//! Classical pump envelope: SPM/XPM phases driven by `R * |A_p|^2` and a
//! symmetric split-step evolver for keeping the pump one step ahead.

use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::erf::erfc;

use crate::error::{invalid, Error, Result};
use crate::fourier::Fourier1d;
use crate::grid::Axis;
use crate::interp::{oversample_real, Antiderivative, UniformSeries};
use crate::response::RamanResponse;

/// Largest nonlinear phase a single pump step may apply.
pub const MAX_STEP_PHASE: f64 = 0.5;

/// `sum_n beta_n w^n / n!` with `beta_1 = beta1` and `higher = [beta_2, beta_3, ...]`.
pub fn dispersion_phase(beta1: f64, higher: &[f64], omega: f64) -> f64 {
    let mut acc = beta1 * omega;
    let mut pow = omega;
    let mut fact = 1.0;
    for (k, b) in higher.iter().enumerate() {
        pow *= omega;
        fact *= (k + 2) as f64;
        acc += b * pow / fact;
    }
    acc
}

/// Pump envelope `A_p(z, t)` in sqrt(W) on a uniform time grid.
#[derive(Clone, Debug)]
pub struct PumpField {
    axis: Axis,
    samples: Vec<Complex64>,
    pub z: f64,
    /// Pump nonlinear coefficient, 1/(W m).
    pub gamma: f64,
    /// `[beta_2p, beta_3p, ...]` in s^n/m; empty means no pump dispersion.
    pub dispersion: Vec<f64>,
}

impl PumpField {
    pub fn new(axis: Axis, samples: Vec<Complex64>, gamma: f64) -> Result<Self> {
        if samples.len() != axis.n {
            return Err(Error::GridMismatch(format!(
                "{} pump samples for a {}-point axis",
                samples.len(),
                axis.n
            )));
        }
        if !gamma.is_finite() || samples.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(invalid("pump field and gamma must be finite"));
        }
        Ok(PumpField {
            axis,
            samples,
            z: 0.0,
            gamma,
            dispersion: Vec::new(),
        })
    }

    pub fn zero(axis: Axis, gamma: f64) -> Result<Self> {
        PumpField::new(axis, vec![Complex64::default(); axis.n], gamma)
    }

    pub fn with_dispersion(mut self, dispersion: Vec<f64>) -> Self {
        self.dispersion = dispersion;
        self
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.samples.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Pulse energy `integral |A_p|^2 dt`, J.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.axis.step
    }

    /// `integral |A_p|^4 dt`, W^2 s.
    pub fn fourth_moment(&self) -> f64 {
        self.samples.iter().map(|a| a.norm_sqr().powi(2)).sum::<f64>() * self.axis.step
    }

    pub fn peak_power(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, a| m.max(a.norm_sqr()))
    }

    /// `sqrt(2)` times the RMS width of `|A_p|^2`; equals `T_p` for a Gaussian.
    pub fn duration(&self) -> f64 {
        let pts = self.axis.points();
        let w = self.intensity();
        let total: f64 = w.iter().sum();
        if total == 0.0 {
            return 0.0;
        }
        let mean = pts.iter().zip(&w).map(|(t, p)| t * p).sum::<f64>() / total;
        let var = pts.iter().zip(&w).map(|(t, p)| (t - mean).powi(2) * p).sum::<f64>() / total;
        (2.0 * var).sqrt()
    }

    /// Spectrum `A_p(w)` on `axis().reciprocal()`.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut s = self.samples.clone();
        Fourier1d::new(self.axis).forward(&mut s);
        s
    }

    pub fn has_dispersion(&self) -> bool {
        self.dispersion.iter().any(|&b| b != 0.0)
    }
}

/// `A_p(0, t) = sqrt(P) exp(-t^2 / 2 T_p^2)`.
pub fn gaussian_pump(peak_power: f64, duration: f64, axis: Axis, gamma: f64) -> Result<PumpField> {
    if !(peak_power >= 0.0) || !peak_power.is_finite() {
        return Err(invalid(format!("peak power must be >= 0, got {peak_power}")));
    }
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(invalid(format!("pulse duration must be positive, got {duration}")));
    }
    let outside = 0.5 * erfc(-axis.origin / duration) + 0.5 * erfc(axis.last() / duration);
    if outside > 1e-6 {
        return Err(invalid(format!(
            "time grid [{:.3e}, {:.3e}] s truncates {outside:.2e} of the pulse energy",
            axis.origin,
            axis.last()
        )));
    }
    let amp = peak_power.sqrt();
    let samples = axis
        .points()
        .iter()
        .map(|t| Complex64::new(amp * (-t * t / (2.0 * duration * duration)).exp(), 0.0))
        .collect();
    PumpField::new(axis, samples, gamma)
}

/// Computes `c(t) = integral R(t') I(t - t') dt'` for intensities on a fixed grid,
/// with `R(t) = (1 - f_R) delta(t) + f_R h_R(t)`.
///
/// The product is formed in the frequency domain on a zero-padded grid long
/// enough that the causal tail cannot wrap onto the pulse front, so for a
/// band-limited intensity the result is exact up to rounding.
#[derive(Clone, Debug)]
pub struct IntensityConvolver {
    axis: Axis,
    padded: Axis,
    fourier: Option<Fourier1d>,
    response: Vec<Complex64>,
}

impl IntensityConvolver {
    pub fn new(resp: &RamanResponse, axis: Axis) -> Result<Self> {
        if resp.fraction() == 0.0 || resp.is_instantaneous() {
            return Ok(IntensityConvolver {
                axis,
                padded: axis,
                fourier: None,
                response: Vec::new(),
            });
        }
        if axis.step < resp.grid().dt * (1.0 - 1e-12) {
            return Err(Error::GridMismatch(format!(
                "pump step {:.3e} s is finer than the response step {:.3e} s",
                axis.step,
                resp.grid().dt
            )));
        }
        let reach = (resp.support_time() / axis.step).ceil() as usize + 1;
        let n = (2 * axis.n).max(axis.n + reach).next_power_of_two();
        let padded = Axis::new(n, axis.step, axis.origin)?;
        let nus = padded.reciprocal().points();
        let response = nus.par_iter().map(|&nu| resp.response_spectrum(nu)).collect();
        Ok(IntensityConvolver {
            axis,
            padded,
            fourier: Some(Fourier1d::new(padded)),
            response,
        })
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    /// Zero-padded axis on which [`apply_padded`](Self::apply_padded) reports.
    pub fn padded_axis(&self) -> Axis {
        self.padded
    }

    /// `c` on the padded axis (which starts at the pump grid's origin).
    pub fn apply_padded(&self, intensity: &[f64]) -> Vec<f64> {
        assert_eq!(intensity.len(), self.axis.n);
        let Some(f) = &self.fourier else {
            return intensity.to_vec();
        };
        let mut buf = vec![Complex64::default(); self.padded.n];
        for (b, &i) in buf.iter_mut().zip(intensity) {
            b.re = i;
        }
        f.forward(&mut buf);
        for (b, r) in buf.iter_mut().zip(&self.response) {
            *b *= r;
        }
        f.inverse(&mut buf);
        buf.into_iter().map(|b| b.re).collect()
    }

    /// `c` on the pump grid.
    pub fn apply(&self, intensity: &[f64]) -> Vec<f64> {
        let mut c = self.apply_padded(intensity);
        c.truncate(self.axis.n);
        c
    }
}

/// Continuous `c(t) = (R * |A_p(0)|^2)(t)` and its running integral, from which
/// the pump SPM phase and the signal/idler XPM phases follow.
#[derive(Clone, Debug)]
pub struct PhaseProfile {
    gamma_p: f64,
    c: UniformSeries<f64>,
    integral: Antiderivative,
}

/// Refinement factor used when `c` has to be evaluated off-grid.
pub const PROFILE_OVERSAMPLING: usize = 16;

impl PhaseProfile {
    pub fn new(pump: &PumpField, conv: &IntensityConvolver) -> Self {
        let padded = conv.apply_padded(&pump.intensity());
        let ax = conv.padded_axis();
        let q = PROFILE_OVERSAMPLING;
        let fine = oversample_real(&padded, q);
        let c = UniformSeries::new(ax.origin, ax.step / q as f64, fine);
        PhaseProfile {
            gamma_p: pump.gamma,
            integral: Antiderivative::new(c.clone()),
            c,
        }
    }

    /// `c(t)`, W.
    pub fn intensity_response(&self, t: f64) -> f64 {
        self.c.cubic(t)
    }

    /// Pump SPM phase `theta_p(z, t) = gamma_p z c(t)`.
    pub fn spm(&self, z: f64, t: f64) -> f64 {
        if z == 0.0 {
            return 0.0;
        }
        self.gamma_p * z * self.c.cubic(t)
    }

    /// XPM phase `theta_j(z, t) = (2 gamma_j / beta_j) integral_{t - beta_j z}^{t} c`.
    pub fn xpm(&self, gamma_j: f64, beta_j: f64, z: f64, t: f64) -> f64 {
        if z == 0.0 || gamma_j == 0.0 {
            return 0.0;
        }
        if beta_j == 0.0 {
            return 2.0 * gamma_j * z * self.c.cubic(t);
        }
        2.0 * gamma_j / beta_j * self.integral.between(t - beta_j * z, t)
    }
}

/// `theta_p(z, t)`; builds the convolution from scratch, prefer [`PhaseProfile`] in loops.
pub fn spm_phase(pump: &PumpField, resp: &RamanResponse, z: f64, t: f64) -> Result<f64> {
    if z < 0.0 {
        return Err(invalid("z must be >= 0"));
    }
    let conv = IntensityConvolver::new(resp, pump.axis())?;
    Ok(PhaseProfile::new(pump, &conv).spm(z, t))
}

/// `theta_j(z, t)` for a field with nonlinear coefficient `gamma_j` and relative slowness `beta_j`.
pub fn xpm_phase(pump: &PumpField, resp: &RamanResponse, gamma_j: f64, beta_j: f64, z: f64, t: f64) -> Result<f64> {
    if z < 0.0 {
        return Err(invalid("z must be >= 0"));
    }
    let conv = IntensityConvolver::new(resp, pump.axis())?;
    Ok(PhaseProfile::new(pump, &conv).xpm(gamma_j, beta_j, z, t))
}

fn apply_pump_dispersion(pump: &mut PumpField, fourier: &Fourier1d, h: f64) {
    let freq = fourier.freq_axis();
    fourier.forward(&mut pump.samples);
    for (m, a) in pump.samples.iter_mut().enumerate() {
        *a *= Complex64::from_polar(1.0, dispersion_phase(0.0, &pump.dispersion, freq.at(m)) * h);
    }
    fourier.inverse(&mut pump.samples);
}

/// One symmetric split step of length `h`: dispersion half, SPM full, dispersion half.
pub fn evolve_pump_step(pump: &PumpField, conv: &IntensityConvolver, h: f64) -> Result<PumpField> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(invalid(format!("step must be positive, got {h}")));
    }
    let mut next = pump.clone();
    let fourier = next.has_dispersion().then(|| Fourier1d::new(next.axis));
    if let Some(f) = &fourier {
        apply_pump_dispersion(&mut next, f, h / 2.0);
    }
    let c = conv.apply(&next.intensity());
    let peak = c.iter().fold(0.0_f64, |m, v| m.max(v.abs())) * pump.gamma.abs() * h;
    if peak > MAX_STEP_PHASE {
        return Err(Error::StepTooLarge {
            z: pump.z,
            phase: peak,
            limit: MAX_STEP_PHASE,
        });
    }
    for (a, ci) in next.samples.iter_mut().zip(&c) {
        *a *= Complex64::from_polar(1.0, pump.gamma * h * ci);
    }
    if let Some(f) = &fourier {
        apply_pump_dispersion(&mut next, f, h / 2.0);
    }
    next.z = pump.z + h;
    Ok(next)
}

//! Closed-form joint amplitudes: the long-pulse limit and the general
//! single-`z`-integral form used as the brute-force reference.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::amplitude::JointAmplitude;
use crate::error::{invalid, Error, Result};
use crate::grid::{Axis, Domain};
use crate::interp::{oversample, UniformSeries};
use crate::pump::{IntensityConvolver, PhaseProfile, PumpField};
use crate::response::{coupling_w, kernel_axis, CouplingKernel, RamanResponse, SpectralTaper};

/// Waveguide and operating point. Slownesses are relative to the pump.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveguideSpec {
    /// Nonlinear coefficients, 1/(W m).
    pub gamma_pump: f64,
    pub gamma_signal: f64,
    pub gamma_idler: f64,
    /// Group slowness relative to the pump, s/m.
    pub beta1_signal: f64,
    pub beta1_idler: f64,
    /// `[beta_2, beta_3, ...]` of each generated field, s^n/m.
    pub dispersion_signal: Vec<f64>,
    pub dispersion_idler: Vec<f64>,
    /// m
    pub length: f64,
    /// K
    pub temperature: f64,
    /// Idler detuning from the pump `Omega = w_i0 - w_p0`, rad/s.
    pub detuning: f64,
}

impl WaveguideSpec {
    /// Same `gamma` for all three fields, no GVD, opposite walk-off `+-beta`.
    pub fn symmetric(gamma: f64, beta: f64, length: f64, temperature: f64, detuning: f64) -> Self {
        WaveguideSpec {
            gamma_pump: gamma,
            gamma_signal: gamma,
            gamma_idler: gamma,
            beta1_signal: beta,
            beta1_idler: -beta,
            dispersion_signal: Vec::new(),
            dispersion_idler: Vec::new(),
            length,
            temperature,
            detuning,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(invalid(format!("length must be positive, got {}", self.length)));
        }
        if !(self.temperature >= 0.0) || !self.temperature.is_finite() {
            return Err(invalid(format!("temperature must be >= 0 K, got {}", self.temperature)));
        }
        let all = [
            self.gamma_pump,
            self.gamma_signal,
            self.gamma_idler,
            self.beta1_signal,
            self.beta1_idler,
            self.detuning,
        ];
        if all
            .iter()
            .chain(&self.dispersion_signal)
            .chain(&self.dispersion_idler)
            .any(|x| !x.is_finite())
        {
            return Err(invalid("waveguide parameters must be finite"));
        }
        if self.gamma_signal < 0.0 || self.gamma_idler < 0.0 {
            return Err(invalid("signal and idler nonlinear coefficients must be >= 0"));
        }
        Ok(())
    }

    /// `beta_1s - beta_1i`.
    pub fn walk_off(&self) -> f64 {
        self.beta1_signal - self.beta1_idler
    }

    pub fn has_gvd(&self) -> bool {
        self.dispersion_signal.iter().chain(&self.dispersion_idler).any(|&b| b != 0.0)
    }

    fn nondegenerate_walk_off(&self) -> Result<f64> {
        let d = self.walk_off();
        if d == 0.0 {
            return Err(Error::DegenerateSlowness(self.beta1_signal));
        }
        Ok(d)
    }
}

/// Creation point `(z_c, t_c)` of a pair detected at `(t_s, t_i)`.
pub fn collision_coords(t_s: f64, t_i: f64, spec: &WaveguideSpec) -> Result<(f64, f64)> {
    let d = spec.nondegenerate_walk_off()?;
    let z = spec.length - (t_s - t_i) / d;
    let t = (spec.beta1_signal * t_i - spec.beta1_idler * t_s) / d;
    Ok((z, t))
}

/// Nonlinear phase `Phi(z, t_s, t_i)` picked up by a pair created at `z`:
/// pump SPM up to the creation times plus the XPM each photon collects on its
/// way from `z` to the output.
#[derive(Clone, Debug)]
pub struct NpmPhase {
    profile: PhaseProfile,
    gamma_s: f64,
    gamma_i: f64,
    beta_s: f64,
    beta_i: f64,
    length: f64,
}

impl NpmPhase {
    pub fn new(pump: &PumpField, spec: &WaveguideSpec, resp: &RamanResponse) -> Result<Self> {
        spec.validate()?;
        let conv = IntensityConvolver::new(resp, pump.axis())?;
        Ok(NpmPhase {
            profile: PhaseProfile::new(pump, &conv),
            gamma_s: spec.gamma_signal,
            gamma_i: spec.gamma_idler,
            beta_s: spec.beta1_signal,
            beta_i: spec.beta1_idler,
            length: spec.length,
        })
    }

    pub fn profile(&self) -> &PhaseProfile {
        &self.profile
    }

    /// One photon's share: `theta_p(z, tau) + theta_j(L, t) - theta_j(z, tau)`.
    fn photon(&self, gamma: f64, beta: f64, z: f64, t: f64) -> f64 {
        let tau = t - beta * (self.length - z);
        let spm = self.profile.spm(z, tau);
        let xpm = if gamma == 0.0 {
            0.0
        } else if beta == 0.0 {
            2.0 * gamma * (self.length - z) * self.profile.intensity_response(t)
        } else {
            // theta_j(L, t) - theta_j(z, tau) telescopes to one integral over [tau, t]
            self.profile.xpm(gamma, beta, self.length - z, t)
        };
        spm + xpm
    }

    pub fn signal_part(&self, z: f64, t_s: f64) -> f64 {
        self.photon(self.gamma_s, self.beta_s, z, t_s)
    }

    pub fn idler_part(&self, z: f64, t_i: f64) -> f64 {
        self.photon(self.gamma_i, self.beta_i, z, t_i)
    }

    pub fn phi(&self, z: f64, t_s: f64, t_i: f64) -> f64 {
        self.signal_part(z, t_s) + self.idler_part(z, t_i)
    }
}

/// `Phi(z, t_s, t_i)`; builds the pump convolution each call.
pub fn phase_phi(pump: &PumpField, spec: &WaveguideSpec, resp: &RamanResponse, z: f64, t_s: f64, t_i: f64) -> Result<f64> {
    Ok(NpmPhase::new(pump, spec, resp)?.phi(z, t_s, t_i))
}

/// Band-limited pump envelope usable between grid points.
#[derive(Clone, Debug)]
pub struct PumpInterpolator {
    series: UniformSeries<Complex64>,
}

impl PumpInterpolator {
    pub fn new(pump: &PumpField) -> Self {
        let q = 16;
        let ax = pump.axis();
        PumpInterpolator {
            series: UniformSeries::new(ax.origin, ax.step / q as f64, oversample(pump.samples(), q)),
        }
    }

    pub fn at(&self, t: f64) -> Complex64 {
        self.series.cubic(t)
    }
}

fn warn_if_short(pump: &PumpField, resp: &RamanResponse) {
    let w = resp.rms_width();
    let tp = pump.duration();
    if resp.fraction() > 0.0 && tp < 50.0 * w {
        log::warn!(
            "pump duration {tp:.3e} s is below 50x the response width {w:.3e} s; the long-pulse form is unreliable"
        );
    }
}

/// Long-pulse JTA: the kernel acts as `W(0) delta`, so the pair is born at the
/// collision point with amplitude `A_p(0, t_c)^2`, supported on `0 <= z_c <= L`.
pub fn jta_long_pulse(pump: &PumpField, spec: &WaveguideSpec, resp: &RamanResponse, npm: bool) -> Result<JointAmplitude> {
    spec.validate()?;
    let d = spec.nondegenerate_walk_off()?;
    warn_if_short(pump, resp);
    let w0 = resp.coupling_at(0.0, spec.detuning, spec.temperature)?;
    let pref = Complex64::new(0.0, (spec.gamma_signal * spec.gamma_idler).sqrt() / d.abs()) * w0;
    let phase = if npm { Some(NpmPhase::new(pump, spec, resp)?) } else { None };
    let interp = PumpInterpolator::new(pump);
    let axis = pump.axis();
    let pts = axis.points();
    let l = spec.length;
    let edge = 1e-12 * l;
    let mut data = vec![Complex64::default(); axis.n * axis.n];
    data.par_chunks_mut(axis.n).enumerate().for_each(|(s, row)| {
        let ts = pts[s];
        for (i, out) in row.iter_mut().enumerate() {
            let ti = pts[i];
            let zc = l - (ts - ti) / d;
            let tc = (spec.beta1_signal * ti - spec.beta1_idler * ts) / d;
            let weight = if zc < -edge || zc > l + edge {
                continue;
            } else if zc.abs() <= edge || (zc - l).abs() <= edge {
                0.5
            } else {
                1.0
            };
            let ap = interp.at(tc);
            let mut v = pref * ap * ap * weight;
            if let Some(ph) = &phase {
                v *= Complex64::from_polar(1.0, ph.phi(zc, ts, ti));
            }
            *out = v;
        }
    });
    JointAmplitude::new(axis, axis, Domain::Time, data)
}

/// How the quadrature evaluates `W(t)` between lattice lags.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelMode {
    /// Untapered kernel, linear between native lags: the sampled-grid analogue of
    /// a delta, matching the hard-edged long-pulse box.
    Lattice,
    /// Kernel band-limited by `taper` (relative to the grid Nyquist), refined
    /// `oversample` times by zero padding and interpolated with cubics. This is
    /// the kernel the split-step propagator applies.
    BandLimited { taper: SpectralTaper, oversample: usize },
}

impl Default for KernelMode {
    fn default() -> Self {
        KernelMode::BandLimited {
            taper: SpectralTaper::default(),
            oversample: 16,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureOptions {
    /// Composite Simpson starts with `initial_intervals + 1` nodes and doubles.
    pub initial_intervals: usize,
    /// Stop when successive estimates differ by less than this (relative L2).
    pub tolerance: f64,
    pub max_nodes: usize,
    pub npm: bool,
    pub kernel: KernelMode,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            initial_intervals: 128,
            tolerance: 1e-6,
            max_nodes: (1 << 15) + 1,
            npm: true,
            kernel: KernelMode::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct QuadratureResult {
    pub amplitude: JointAmplitude,
    /// Simpson nodes used by the accepted estimate.
    pub nodes: usize,
    /// Relative change at the last doubling.
    pub change: f64,
}

enum KernelEval {
    Linear(CouplingKernel),
    Smooth(UniformSeries<Complex64>),
}

impl KernelEval {
    fn at(&self, t: f64) -> Complex64 {
        match self {
            KernelEval::Linear(k) => {
                let ax = k.time_axis();
                let x = (t - ax.origin) / ax.step;
                let j = x.floor();
                let s = x - j;
                let j = j as i64 - ax.zero_index() as i64;
                k.lag(j) * (1.0 - s) + k.lag(j + 1) * s
            }
            KernelEval::Smooth(series) => series.cubic(t),
        }
    }
}

/// Direct evaluation of
/// `A(t_s, t_i) = i sqrt(g_s g_i) int_0^L dz W(tau_s - tau_i) A_p(0, tau_s) A_p(0, tau_i) exp(i Phi)`
/// with `tau_j = t_j - beta_1j (L - z)`, by node-doubling composite Simpson in `z`.
pub fn jta_general_quadrature(
    pump: &PumpField,
    spec: &WaveguideSpec,
    resp: &RamanResponse,
    opts: &QuadratureOptions,
) -> Result<QuadratureResult> {
    spec.validate()?;
    if spec.has_gvd() || pump.has_dispersion() {
        return Err(invalid("the single-integral JTA holds only without group-velocity dispersion"));
    }
    if opts.initial_intervals < 2 || opts.initial_intervals % 2 != 0 {
        return Err(invalid("Simpson needs an even number of intervals"));
    }
    let axis = pump.axis();
    let n = axis.n;
    let kaxis = kernel_axis(resp, n, axis.step)?;
    let raw = coupling_w(resp, spec.detuning, spec.temperature, kaxis)?;
    let kernel = match opts.kernel {
        KernelMode::Lattice => KernelEval::Linear(raw),
        KernelMode::BandLimited { taper, oversample } => {
            taper.validate()?;
            KernelEval::Smooth(raw.tapered(taper).oversampled(oversample.max(1)))
        }
    };
    let phase = if opts.npm { Some(NpmPhase::new(pump, spec, resp)?) } else { None };
    let interp = PumpInterpolator::new(pump);
    let pts = axis.points();
    let l = spec.length;
    let d = spec.walk_off();

    let slice = |z: f64| -> Vec<Complex64> {
        let row = |beta: f64, signal: bool| -> Vec<Complex64> {
            pts.iter()
                .map(|&t| {
                    let tau = t - beta * (l - z);
                    let mut a = interp.at(tau);
                    if let Some(ph) = &phase {
                        let p = if signal { ph.signal_part(z, t) } else { ph.idler_part(z, t) };
                        a *= Complex64::from_polar(1.0, p);
                    }
                    a
                })
                .collect()
        };
        let ps = row(spec.beta1_signal, true);
        let pi = row(spec.beta1_idler, false);
        // tau_s - tau_i depends on the index difference only
        let shift = -d * (l - z);
        let lags: Vec<Complex64> = (0..2 * n - 1)
            .map(|k| kernel.at((k as f64 - (n - 1) as f64) * axis.step + shift))
            .collect();
        let mut out = vec![Complex64::default(); n * n];
        out.par_chunks_mut(n).enumerate().for_each(|(s, r)| {
            for (i, o) in r.iter_mut().enumerate() {
                *o = lags[s + n - 1 - i] * ps[s] * pi[i];
            }
        });
        out
    };
    let add = |acc: &mut Vec<Complex64>, v: Vec<Complex64>| {
        acc.par_iter_mut().zip(v.par_iter()).for_each(|(a, b)| *a += b);
    };

    let mut intervals = opts.initial_intervals;
    let mut h = l / intervals as f64;
    let mut ends = slice(0.0);
    add(&mut ends, slice(l));
    let mut older = vec![Complex64::default(); n * n];
    let mut newer = vec![Complex64::default(); n * n];
    for k in 1..intervals {
        let v = slice(k as f64 * h);
        if k % 2 == 1 {
            add(&mut newer, v);
        } else {
            add(&mut older, v);
        }
    }
    let simpson = |ends: &[Complex64], older: &[Complex64], newer: &[Complex64], h: f64| -> Vec<Complex64> {
        ends.par_iter()
            .zip(older.par_iter())
            .zip(newer.par_iter())
            .map(|((e, o), w)| (e + o * 2.0 + w * 4.0) * (h / 3.0))
            .collect()
    };
    let mut estimate = simpson(&ends, &older, &newer, h);
    let mut change = f64::INFINITY;
    loop {
        if intervals + 1 >= opts.max_nodes {
            break;
        }
        add(&mut older, std::mem::take(&mut newer));
        intervals *= 2;
        h /= 2.0;
        newer = vec![Complex64::default(); n * n];
        for k in (1..intervals).step_by(2) {
            add(&mut newer, slice(k as f64 * h));
        }
        let next = simpson(&ends, &older, &newer, h);
        let num: f64 = next.iter().zip(&estimate).map(|(a, b)| (a - b).norm_sqr()).sum();
        let den: f64 = next.iter().map(|a| a.norm_sqr()).sum();
        change = if den == 0.0 { 0.0 } else { (num / den).sqrt() };
        estimate = next;
        if change < opts.tolerance {
            break;
        }
    }
    if change >= opts.tolerance {
        return Err(Error::NoConvergence {
            nodes: intervals + 1,
            change,
        });
    }
    let pref = Complex64::new(0.0, (spec.gamma_signal * spec.gamma_idler).sqrt());
    for a in estimate.iter_mut() {
        *a *= pref;
    }
    Ok(QuadratureResult {
        amplitude: JointAmplitude::new(axis, axis, Domain::Time, estimate)?,
        nodes: intervals + 1,
        change,
    })
}

/// Time grid for a pump of duration `tp` in a waveguide with the given walk-off:
/// span `max(16 T_p, 4 max|beta_1| L + 8 T_p)` over `n` points.
pub fn default_time_axis(n: usize, tp: f64, spec: &WaveguideSpec) -> Result<Axis> {
    let beta = spec.beta1_signal.abs().max(spec.beta1_idler.abs());
    let span = (16.0 * tp).max(4.0 * beta * spec.length + 8.0 * tp);
    Axis::centered_span(n, span)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> WaveguideSpec {
        WaveguideSpec::symmetric(0.0, 2e-13, 1.0, 0.0, 6e13)
    }

    #[test]
    fn collision_examples() {
        let s = spec();
        let (z, t) = collision_coords(0.3e-12, 0.3e-12, &s).unwrap();
        assert_eq!(z, 1.0);
        assert!((t - 0.3e-12).abs() < 1e-27);
        let (z, _) = collision_coords(s.walk_off() * s.length, 0.0, &s).unwrap();
        assert!(z.abs() < 1e-15);
        let (_, t) = collision_coords(0.1e-12, 0.5e-12, &s).unwrap();
        assert!((t - 0.3e-12).abs() < 1e-27);
        let mut d = s.clone();
        d.beta1_idler = d.beta1_signal;
        assert!(matches!(collision_coords(0.0, 0.0, &d), Err(Error::DegenerateSlowness(_))));
    }

    #[test]
    fn spec_validation() {
        let mut s = spec();
        s.length = 0.0;
        assert!(s.validate().is_err());
        let mut s = spec();
        s.temperature = -1.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn default_axis_covers_walk_off() {
        let s = spec();
        let a = default_time_axis(512, 1e-13, &s).unwrap();
        assert!((a.span() - 1.6e-12).abs() < 1e-24);
    }
}

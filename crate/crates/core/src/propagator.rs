//! Symmetric split-step propagation of the joint amplitude.
//!
//! Each step of length `h` applies: half of the spontaneous source at `z`, half
//! of the linear (dispersive) step, the full nonlinear (XPM) step, the other
//! linear half, and half of the source at `z + h`. Adjacent source halves at the
//! same `z` are merged, so the scheme has local error `O(h^3)` and global error
//! `O(h^2)`. The pump is advanced one step ahead with its own split step.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::amplitude::JointAmplitude;
use crate::analytic::WaveguideSpec;
use crate::error::{invalid, Error, Result};
use crate::fourier::Fourier2d;
use crate::grid::{Axis, Domain};
use crate::pump::{dispersion_phase, evolve_pump_step, IntensityConvolver, PumpField};
use crate::response::{coupling_w, kernel_axis, RamanResponse, SpectralTaper};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ordering {
    /// Source halves around a Strang-split linear/nonlinear core.
    Symmetric,
    /// Full source step (trapezoid), then full linear, then full nonlinear.
    Naive,
}

/// How the spontaneous source term is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourcePath {
    /// Pointwise `W(t_s - t_i) A_p(t_s) A_p(t_i)`, O(N^2).
    Time,
    /// Convolution of `W(w)` with the pump spectra, O(N^3); kept as a cross-check.
    Frequency,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepPlan {
    pub steps: usize,
    pub ordering: Ordering,
    /// Use the delayed response in the source kernel (otherwise `W = 1`).
    pub raman_in_sps: bool,
    /// Use the delayed response in SPM/XPM (otherwise `R = delta`).
    pub raman_in_xpm: bool,
    /// Highest dispersion order kept (1 keeps only walk-off).
    pub dispersion_order: usize,
    /// Nonlinear phase modulation of pump and pair.
    pub npm: bool,
    pub taper: SpectralTaper,
    /// Largest tolerated fraction of spectral energy beyond 0.9 of Nyquist.
    pub aliasing_threshold: f64,
    pub source: SourcePath,
    /// Positions (m) at which to report intermediate amplitudes; rounded to the
    /// nearest step boundary.
    pub checkpoints: Vec<f64>,
}

impl StepPlan {
    pub fn new(steps: usize) -> Self {
        StepPlan {
            steps,
            ordering: Ordering::Symmetric,
            raman_in_sps: true,
            raman_in_xpm: true,
            dispersion_order: usize::MAX,
            npm: true,
            taper: SpectralTaper::default(),
            aliasing_threshold: 1e-6,
            source: SourcePath::Time,
            checkpoints: Vec::new(),
        }
    }

    /// Plan whose step divides `length` exactly and does not exceed `h`.
    pub fn with_step(length: f64, h: f64) -> Result<Self> {
        if !(h > 0.0 && length > 0.0) {
            return Err(invalid("step and length must be positive"));
        }
        Ok(StepPlan::new((length / h).ceil().max(1.0) as usize))
    }

    pub fn step_size(&self, length: f64) -> f64 {
        length / self.steps as f64
    }

    fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(invalid("plan needs at least one step"));
        }
        if !(self.aliasing_threshold > 0.0) {
            return Err(invalid("aliasing threshold must be positive"));
        }
        self.taper.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepDiagnostic {
    pub z: f64,
    pub probability: f64,
}

#[derive(Clone, Debug)]
pub struct PropagationResult {
    pub jta: JointAmplitude,
    pub jsa: JointAmplitude,
    pub pump: PumpField,
    pub steps: usize,
    pub step_size: f64,
    pub diagnostics: Vec<StepDiagnostic>,
    /// Spectral energy fraction beyond 0.9 of Nyquist in the final JSA.
    pub edge_fraction: f64,
}

impl PropagationResult {
    pub fn probability(&self) -> f64 {
        self.jta.norm_sqr()
    }
}

/// The amplitude together with the pump at both ends of the current step.
#[derive(Clone, Debug)]
pub struct PropagationState {
    pub amplitude: JointAmplitude,
    pub pump_now: PumpField,
    pub pump_next: PumpField,
    pub z: f64,
}

/// Which endpoints of `[z, z + h]` a source application covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpsPart {
    Start,
    End,
    Both,
}

/// Precomputed operators for one grid, waveguide and plan.
pub struct Propagator {
    spec: WaveguideSpec,
    plan: StepPlan,
    axis: Axis,
    h: f64,
    fourier: Fourier2d,
    lin_half: (Vec<Complex64>, Vec<Complex64>),
    lin_full: (Vec<Complex64>, Vec<Complex64>),
    /// Source kernel at lags `-(n-1)..=(n-1)`, index `d + n - 1`.
    lags: Vec<Complex64>,
    conv: IntensityConvolver,
    prefactor: Complex64,
    pump_gamma: f64,
    pump_dispersion: Vec<f64>,
}

fn capped(coeffs: &[f64], order: usize) -> Vec<f64> {
    // coeffs[k] is beta_{k+2}
    coeffs.iter().take(order.saturating_sub(1)).copied().collect()
}

impl Propagator {
    pub fn new(axis: Axis, spec: &WaveguideSpec, resp: &RamanResponse, plan: &StepPlan) -> Result<Self> {
        spec.validate()?;
        plan.validate()?;
        let n = axis.n;
        if !n.is_power_of_two() {
            return Err(invalid("grid size must be a power of two"));
        }
        let h = plan.step_size(spec.length);
        let freq = axis.reciprocal();
        let order = plan.dispersion_order;
        let b1 = |b: f64| if order >= 1 { b } else { 0.0 };
        let ds = capped(&spec.dispersion_signal, order);
        let di = capped(&spec.dispersion_idler, order);
        let phases = |beta1: f64, higher: &[f64], len: f64| -> Vec<Complex64> {
            freq.points()
                .iter()
                .map(|&w| Complex64::from_polar(1.0, dispersion_phase(beta1, higher, w) * len))
                .collect()
        };
        let lin_half = (
            phases(b1(spec.beta1_signal), &ds, h / 2.0),
            phases(b1(spec.beta1_idler), &di, h / 2.0),
        );
        let lin_full = (
            phases(b1(spec.beta1_signal), &ds, h),
            phases(b1(spec.beta1_idler), &di, h),
        );
        let instant = RamanResponse::instantaneous();
        let src_resp = if plan.raman_in_sps { resp } else { &instant };
        let kaxis = kernel_axis(src_resp, n, axis.step)?;
        let kernel = coupling_w(src_resp, spec.detuning, spec.temperature, kaxis)?.tapered(plan.taper);
        let lags = (0..2 * n - 1).map(|k| kernel.lag(k as i64 - (n as i64 - 1))).collect();
        let xpm_resp = if plan.raman_in_xpm { resp } else { &instant };
        let conv = IntensityConvolver::new(xpm_resp, axis)?;
        Ok(Propagator {
            spec: spec.clone(),
            plan: plan.clone(),
            axis,
            h,
            fourier: Fourier2d::new(axis, axis),
            lin_half,
            lin_full,
            lags,
            conv,
            prefactor: Complex64::new(0.0, (spec.gamma_signal * spec.gamma_idler).sqrt()),
            pump_gamma: spec.gamma_pump,
            pump_dispersion: Vec::new(),
        })
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    fn prepare_pump(&mut self, pump: &PumpField) -> Result<PumpField> {
        if pump.axis() != self.axis {
            return Err(Error::GridMismatch("pump grid differs from the propagation grid".into()));
        }
        self.pump_dispersion = capped(&pump.dispersion, self.plan.dispersion_order);
        let mut p = pump.clone();
        p.z = 0.0;
        p.gamma = if self.plan.npm { self.pump_gamma } else { 0.0 };
        p.dispersion = self.pump_dispersion.clone();
        Ok(p)
    }

    fn advance(&self, pump: &PumpField) -> Result<PumpField> {
        if pump.gamma == 0.0 && !pump.has_dispersion() {
            let mut p = pump.clone();
            p.z += self.h;
            return Ok(p);
        }
        evolve_pump_step(pump, &self.conv, self.h)
    }

    /// Vacuum amplitude with the pump at `z = 0` and `z = h`.
    pub fn initial_state(&mut self, pump: &PumpField) -> Result<PropagationState> {
        let now = self.prepare_pump(pump)?;
        let next = self.advance(&now)?;
        Ok(PropagationState {
            amplitude: JointAmplitude::zeros(self.axis, self.axis, Domain::Time)?,
            pump_now: now,
            pump_next: next,
            z: 0.0,
        })
    }

    /// Moves the state's pump window forward by one step.
    pub fn advance_pump(&self, state: &mut PropagationState) -> Result<()> {
        let next = self.advance(&state.pump_next)?;
        state.pump_now = std::mem::replace(&mut state.pump_next, next);
        state.z += self.h;
        Ok(())
    }

    /// `i sqrt(g_s g_i) W(t_s - t_i) A_p(t_s) A_p(t_i)` on the time grid.
    pub fn source_time(&self, pump: &PumpField) -> Vec<Complex64> {
        let n = self.axis.n;
        let a = pump.samples();
        let mut out = vec![Complex64::default(); n * n];
        let pref = self.prefactor;
        out.par_chunks_mut(n).enumerate().for_each(|(s, row)| {
            let left = pref * a[s];
            for (i, o) in row.iter_mut().enumerate() {
                *o = self.lags[s + n - 1 - i] * left * a[i];
            }
        });
        out
    }

    /// Spectral source by direct frequency-domain convolution,
    /// `G(w_s, w_i) = i sqrt(g_s g_i) (1/2pi) int dnu W(nu) A_p(w_s - nu) A_p(w_i + nu)`,
    /// with `W(nu)` the transform of the same lag kernel the time path uses.
    pub fn source_frequency(&self, pump: &PumpField) -> Vec<Complex64> {
        let n = self.axis.n;
        let m = 4 * n;
        let dt = self.axis.step;
        let mut planner = FftPlanner::new();
        let plus = planner.plan_fft_inverse(m);
        // pump DTFT on a 4x finer frequency grid, index k <-> nu = k * 2pi/(m dt)
        let mut ap = vec![Complex64::default(); m];
        for (j, a) in pump.samples().iter().enumerate() {
            ap[j] = *a;
        }
        plus.process(&mut ap);
        let t0 = self.axis.origin;
        let dnu = 2.0 * std::f64::consts::PI / (m as f64 * dt);
        for (k, v) in ap.iter_mut().enumerate() {
            *v *= Complex64::from_polar(dt, k as f64 * dnu * t0);
        }
        let mut wk = vec![Complex64::default(); m];
        for (k, l) in self.lags.iter().enumerate() {
            let d = k as i64 - (n as i64 - 1);
            wk[d.rem_euclid(m as i64) as usize] = *l;
        }
        plus.process(&mut wk);
        for v in wk.iter_mut() {
            *v *= dt;
        }
        let freq = self.axis.reciprocal();
        let step = (freq.step / dnu).round() as i64;
        let half = (n / 2) as i64;
        let idx = |q: i64| q.rem_euclid(m as i64) as usize;
        let pref = self.prefactor * (dnu / (2.0 * std::f64::consts::PI));
        let mut out = vec![Complex64::default(); n * n];
        out.par_chunks_mut(n).enumerate().for_each(|(s, row)| {
            let qs = (s as i64 - half) * step;
            for (i, o) in row.iter_mut().enumerate() {
                let qi = (i as i64 - half) * step;
                let mut acc = Complex64::default();
                for k in 0..m as i64 {
                    acc += wk[k as usize] * ap[idx(qs - k)] * ap[idx(qi + k)];
                }
                *o = acc * pref;
            }
        });
        out
    }

    fn source_spectral(&self, pump: &PumpField) -> Vec<Complex64> {
        match self.plan.source {
            SourcePath::Time => {
                let mut g = self.source_time(pump);
                self.fourier.forward(&mut g);
                g
            }
            SourcePath::Frequency => self.source_frequency(pump),
        }
    }

    fn source_temporal(&self, pump: &PumpField) -> Vec<Complex64> {
        match self.plan.source {
            SourcePath::Time => self.source_time(pump),
            SourcePath::Frequency => {
                let mut g = self.source_frequency(pump);
                self.fourier.inverse(&mut g);
                g
            }
        }
    }

    /// Adds the spontaneous source over `[z, z + h]` with trapezoid weights.
    pub fn sps_step(&self, state: &mut PropagationState, part: SpsPart) {
        let w = self.h / 2.0;
        let mut add = |pump: &PumpField| {
            let g = self.source_temporal(pump);
            state
                .amplitude
                .data_mut()
                .par_iter_mut()
                .zip(g.par_iter())
                .for_each(|(a, b)| *a += b * w);
        };
        match part {
            SpsPart::Start => add(&state.pump_now.clone()),
            SpsPart::End => add(&state.pump_next.clone()),
            SpsPart::Both => {
                add(&state.pump_now.clone());
                add(&state.pump_next.clone());
            }
        }
    }

    fn multiply_separable(&self, data: &mut [Complex64], ps: &[Complex64], pi: &[Complex64]) {
        let n = self.axis.n;
        data.par_chunks_mut(n).enumerate().for_each(|(s, row)| {
            for (a, p) in row.iter_mut().zip(pi) {
                *a *= ps[s] * p;
            }
        });
    }

    /// Exact dispersive step of length `h` or `h/2`.
    pub fn linear_step(&self, state: &mut PropagationState, half: bool) {
        let (ps, pi) = if half { &self.lin_half } else { &self.lin_full };
        let mut data = state.amplitude.data().to_vec();
        self.fourier.forward(&mut data);
        self.multiply_separable(&mut data, ps, pi);
        self.fourier.inverse(&mut data);
        state.amplitude = JointAmplitude::new(self.axis, self.axis, Domain::Time, data).unwrap();
    }

    fn xpm_phases(&self, now: &PumpField, next: &PumpField, z: f64) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let cn = self.conv.apply(&now.intensity());
        let cx = self.conv.apply(&next.intensity());
        let h = self.h;
        let (gs, gi) = (self.spec.gamma_signal, self.spec.gamma_idler);
        let sum: Vec<f64> = cn.iter().zip(&cx).map(|(a, b)| a + b).collect();
        let peak = sum.iter().fold(0.0_f64, |m, v| m.max(v.abs())) * h * (gs + gi);
        if peak > crate::pump::MAX_STEP_PHASE {
            return Err(Error::StepTooLarge {
                z,
                phase: peak,
                limit: crate::pump::MAX_STEP_PHASE,
            });
        }
        let ph = |g: f64| sum.iter().map(|c| Complex64::from_polar(1.0, h * g * c)).collect();
        Ok((ph(gs), ph(gi)))
    }

    /// XPM from the pump over `[z, z + h]`, trapezoid in `z`.
    pub fn nonlinear_step(&self, state: &mut PropagationState) -> Result<()> {
        if !self.plan.npm {
            return Ok(());
        }
        let (ps, pi) = self.xpm_phases(&state.pump_now, &state.pump_next, state.z)?;
        self.multiply_separable(state.amplitude.data_mut(), &ps, &pi);
        Ok(())
    }

    fn check_pump_spectrum(&self, pump: &PumpField) -> Result<()> {
        let spec = pump.spectrum();
        let freq = self.axis.reciprocal();
        let lim = 0.9 * freq.nyquist_of_reciprocal();
        let total: f64 = spec.iter().map(|a| a.norm_sqr()).sum();
        let outer: f64 = spec
            .iter()
            .enumerate()
            .filter(|(m, _)| freq.at(*m).abs() > lim)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        if total > 0.0 && outer / total > self.plan.aliasing_threshold {
            return Err(Error::Aliasing {
                what: "pump",
                fraction: outer / total,
                limit: self.plan.aliasing_threshold,
            });
        }
        Ok(())
    }

    /// Runs the plan from vacuum. `observer` sees `(z, amplitude)` at each checkpoint.
    pub fn run(&mut self, pump: &PumpField, observer: &mut dyn FnMut(f64, &JointAmplitude)) -> Result<PropagationResult> {
        self.check_pump_spectrum(pump)?;
        let mut state = self.initial_state(pump)?;
        let steps = self.plan.steps;
        let want: Vec<usize> = self
            .plan
            .checkpoints
            .iter()
            .map(|z| ((z / self.h).round().max(0.0) as usize).min(steps))
            .collect();
        if want.contains(&0) {
            observer(0.0, &state.amplitude);
        }
        let mut diagnostics = Vec::with_capacity(steps);
        let cell = self.axis.reciprocal().step.powi(2) / (4.0 * std::f64::consts::PI.powi(2));
        let spec_data = match self.plan.ordering {
            Ordering::Symmetric => {
                // source half at z = 0 and the first linear half
                let mut spec = self.source_time_scaled(&state.pump_now, self.h / 2.0);
                self.fourier.forward(&mut spec);
                self.multiply_separable(&mut spec, &self.lin_half.0, &self.lin_half.1);
                for k in 0..steps {
                    let mut amp = spec;
                    self.fourier.inverse(&mut amp);
                    if self.plan.npm {
                        let (ps, pi) = self.xpm_phases(&state.pump_now, &state.pump_next, state.z)?;
                        self.multiply_separable(&mut amp, &ps, &pi);
                    }
                    spec = amp;
                    self.fourier.forward(&mut spec);
                    self.multiply_separable(&mut spec, &self.lin_half.0, &self.lin_half.1);
                    let g = self.source_spectral(&state.pump_next);
                    let z = (k + 1) as f64 * self.h;
                    add_scaled(&mut spec, &g, self.h / 2.0);
                    diagnostics.push(StepDiagnostic {
                        z,
                        probability: spec.iter().map(|a| a.norm_sqr()).sum::<f64>() * cell,
                    });
                    if want.contains(&(k + 1)) {
                        let mut snap = spec.clone();
                        self.fourier.inverse(&mut snap);
                        observer(z, &JointAmplitude::new(self.axis, self.axis, Domain::Time, snap)?);
                    }
                    if k + 1 == steps {
                        break;
                    }
                    add_scaled(&mut spec, &g, self.h / 2.0);
                    self.multiply_separable(&mut spec, &self.lin_half.0, &self.lin_half.1);
                    self.advance_pump(&mut state)?;
                }
                spec
            }
            Ordering::Naive => {
                for k in 0..steps {
                    self.sps_step(&mut state, SpsPart::Both);
                    self.linear_step(&mut state, false);
                    self.nonlinear_step(&mut state)?;
                    let z = (k + 1) as f64 * self.h;
                    diagnostics.push(StepDiagnostic {
                        z,
                        probability: state.amplitude.norm_sqr(),
                    });
                    if want.contains(&(k + 1)) {
                        observer(z, &state.amplitude);
                    }
                    if k + 1 < steps {
                        self.advance_pump(&mut state)?;
                    }
                }
                let mut s = state.amplitude.data().to_vec();
                self.fourier.forward(&mut s);
                s
            }
        };
        let jsa = JointAmplitude::new(self.axis.reciprocal(), self.axis.reciprocal(), Domain::Frequency, spec_data)?;
        let mut t = jsa.data().to_vec();
        self.fourier.inverse(&mut t);
        let jta = JointAmplitude::new(self.axis, self.axis, Domain::Time, t)?;
        let edge = jsa.edge_fraction(0.9);
        if edge > self.plan.aliasing_threshold {
            return Err(Error::Aliasing {
                what: "joint",
                fraction: edge,
                limit: self.plan.aliasing_threshold,
            });
        }
        Ok(PropagationResult {
            jta,
            jsa,
            pump: state.pump_next,
            steps,
            step_size: self.h,
            diagnostics,
            edge_fraction: edge,
        })
    }

    fn source_time_scaled(&self, pump: &PumpField, w: f64) -> Vec<Complex64> {
        let mut g = self.source_temporal(pump);
        for v in g.iter_mut() {
            *v *= w;
        }
        g
    }
}

fn add_scaled(acc: &mut [Complex64], g: &[Complex64], w: f64) {
    acc.par_iter_mut().zip(g.par_iter()).for_each(|(a, b)| *a += b * w);
}

/// Propagates `pump` through the waveguide from vacuum and returns the final JTA/JSA.
pub fn propagate(pump: &PumpField, spec: &WaveguideSpec, resp: &RamanResponse, plan: &StepPlan) -> Result<PropagationResult> {
    Propagator::new(pump.axis(), spec, resp, plan)?.run(pump, &mut |_, _| {})
}

/// Record of an automatic step refinement.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub result: PropagationResult,
    /// `(steps, pair probability)` for every run performed.
    pub history: Vec<(usize, f64)>,
    pub converged: bool,
}

/// Doubles the step count from `plan.steps` until the pair probability changes by
/// less than `tolerance` (relative) between successive runs, or `max_steps` is hit.
pub fn propagate_converged(
    pump: &PumpField,
    spec: &WaveguideSpec,
    resp: &RamanResponse,
    plan: &StepPlan,
    tolerance: f64,
    max_steps: usize,
) -> Result<Refinement> {
    let mut p = plan.clone();
    let mut result = propagate(pump, spec, resp, &p)?;
    let mut history = vec![(p.steps, result.probability())];
    loop {
        if p.steps * 2 > max_steps {
            return Ok(Refinement {
                result,
                history,
                converged: false,
            });
        }
        p.steps *= 2;
        let next = propagate(pump, spec, resp, &p)?;
        let (a, b) = (result.probability(), next.probability());
        history.push((p.steps, b));
        result = next;
        let change = if b == 0.0 { 0.0 } else { ((a - b) / b).abs() };
        if change < tolerance {
            return Ok(Refinement {
                result,
                history,
                converged: true,
            });
        }
    }
}

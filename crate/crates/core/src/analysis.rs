//! Photon statistics (pair rate, Raman singles, pairs-to-singles, CAR) and the
//! Schmidt decomposition of a joint amplitude.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::amplitude::JointAmplitude;
use crate::analytic::WaveguideSpec;
use crate::error::{Error, Result};
use crate::grid::{Axis, Domain};
use crate::pump::PumpField;
use crate::response::RamanResponse;

/// Pair probability `integral |A|^2` over the grid (with `1/(2pi)^2` in the spectral domain).
pub fn pair_probability(a: &JointAmplitude) -> f64 {
    a.norm_sqr()
}

/// `|W(0)|^2 = [1 - f_R + f_R chi'(Omega)]^2 + f_R^2 chi''(Omega)^2 [2 n_th(Omega) + 1]^2`,
/// the long-pulse pair rate relative to an instantaneous medium.
pub fn rate_ratio_at(resp: &RamanResponse, detuning: f64, temperature: f64) -> Result<f64> {
    let f = resp.fraction();
    let c = resp.chi(detuning.abs());
    let diss = resp.dissipative_weight(detuning, temperature)?;
    Ok((1.0 - f + f * c.re).powi(2) + (f * diss).powi(2))
}

fn walk_off(spec: &WaveguideSpec) -> Result<f64> {
    let d = spec.walk_off();
    if d == 0.0 {
        return Err(Error::DegenerateSlowness(spec.beta1_signal));
    }
    Ok(d.abs())
}

/// Long-pulse pairs per pulse:
/// `gamma_s gamma_i L integral |A_p|^4 dt / |beta_1s - beta_1i| * r(Omega)`.
pub fn pair_rate_long_pulse(pump: &PumpField, spec: &WaveguideSpec, resp: &RamanResponse) -> Result<f64> {
    spec.validate()?;
    let d = walk_off(spec)?;
    let r = rate_ratio_at(resp, spec.detuning, spec.temperature)?;
    Ok(spec.gamma_signal * spec.gamma_idler * spec.length * pump.fourth_moment() / d * r)
}

/// `r(Omega; T)` for every temperature (outer) and detuning (inner).
pub fn rate_ratio(resp: &RamanResponse, detunings: &[f64], temperatures: &[f64]) -> Result<Vec<Vec<f64>>> {
    temperatures
        .iter()
        .map(|&t| detunings.par_iter().map(|&w| rate_ratio_at(resp, w, t)).collect())
        .collect()
}

/// Spontaneous Raman singles per pulse within `bandwidth` at detuning `delta`
/// of the observed sideband from the pump:
/// `(1/pi) gamma_s f_R E_p bandwidth L chi''(|delta|) [n_th(|delta|) + step(-delta)]`.
pub fn raman_singles_rate(
    pump: &PumpField,
    spec: &WaveguideSpec,
    resp: &RamanResponse,
    delta: f64,
    bandwidth: f64,
) -> Result<f64> {
    spec.validate()?;
    let f = resp.fraction();
    if f == 0.0 {
        return Ok(0.0);
    }
    let x = delta.abs();
    let thermal = resp.thermal_loss(x, spec.temperature)?;
    let step = if delta < 0.0 {
        1.0
    } else if delta == 0.0 {
        0.5
    } else {
        0.0
    };
    let weight = thermal + step * resp.chi(x).im;
    Ok(spec.gamma_signal * f * pump.energy() * bandwidth * spec.length * weight / PI)
}

/// Which Raman singles rate a pair rate at detuning `delta` is compared against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SinglesChannel {
    /// `R_R(delta)`: the same detuning as the pair rate's argument.
    Literal,
    /// `R_R(-delta)`: the sideband where the signal photon of that pair sits.
    Signal,
}

/// `C_0 = pi gamma integral |A_p|^4 / (bandwidth E_p |beta_1s - beta_1i|)`.
pub fn pairs_to_singles_unit(pump: &PumpField, spec: &WaveguideSpec, bandwidth: f64) -> Result<f64> {
    let d = walk_off(spec)?;
    let gamma = (spec.gamma_signal * spec.gamma_idler).sqrt();
    Ok(PI * gamma * pump.fourth_moment() / (bandwidth * pump.energy() * d))
}

/// `C(delta) / C_0 = r(|delta|) / (f_R chi''(|delta|) [n_th + step(-delta')])`, where
/// `delta'` is `delta` or `-delta` per `channel`. Returns `+inf` where no Raman
/// singles are produced.
pub fn pairs_to_singles_ratio(resp: &RamanResponse, delta: f64, temperature: f64, channel: SinglesChannel) -> Result<f64> {
    let r = rate_ratio_at(resp, delta, temperature)?;
    let f = resp.fraction();
    if f == 0.0 {
        return Ok(f64::INFINITY);
    }
    let d = match channel {
        SinglesChannel::Literal => delta,
        SinglesChannel::Signal => -delta,
    };
    let x = d.abs();
    let step = if d < 0.0 {
        1.0
    } else if d == 0.0 {
        0.5
    } else {
        0.0
    };
    let denom = f * (resp.thermal_loss(x, temperature)? + step * resp.chi(x).im);
    Ok(if denom > 0.0 { r / denom } else { f64::INFINITY })
}

/// `C(delta)/C_0` curves, temperatures outer, detunings inner.
pub fn pairs_to_singles(
    resp: &RamanResponse,
    deltas: &[f64],
    temperatures: &[f64],
    channel: SinglesChannel,
) -> Result<Vec<Vec<f64>>> {
    temperatures
        .iter()
        .map(|&t| {
            deltas
                .par_iter()
                .map(|&d| pairs_to_singles_ratio(resp, d, t, channel))
                .collect()
        })
        .collect()
}

/// Pair rate, Raman singles on both sidebands and the resulting CAR.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairStatistics {
    pub pair_rate: f64,
    /// `R_R(+Omega)` (idler side) and `R_R(-Omega)` (signal side).
    pub singles_idler: f64,
    pub singles_signal: f64,
    pub car: f64,
}

/// `CAR = R_pair / ((R_pair + R_R(Omega)) (R_pair + R_R(-Omega)))`, long-pulse rates.
pub fn car(pump: &PumpField, spec: &WaveguideSpec, resp: &RamanResponse, bandwidth: f64) -> Result<PairStatistics> {
    let pair_rate = pair_rate_long_pulse(pump, spec, resp)?;
    let singles_idler = raman_singles_rate(pump, spec, resp, spec.detuning, bandwidth)?;
    let singles_signal = raman_singles_rate(pump, spec, resp, -spec.detuning, bandwidth)?;
    let car = pair_rate / ((pair_rate + singles_idler) * (pair_rate + singles_signal));
    Ok(PairStatistics {
        pair_rate,
        singles_idler,
        singles_signal,
        car,
    })
}

/// Peak power of a Gaussian pump of duration `tp` giving `target` pairs per pulse.
/// `R_pair` is quadratic in the peak power, so the inversion is closed-form.
pub fn peak_power_for_pair_rate(target: f64, tp: f64, spec: &WaveguideSpec, resp: &RamanResponse) -> Result<f64> {
    spec.validate()?;
    let d = walk_off(spec)?;
    let r = rate_ratio_at(resp, spec.detuning, spec.temperature)?;
    // integral |A_p|^4 = sqrt(pi/2) P^2 T_p
    let per_watt2 = spec.gamma_signal * spec.gamma_idler * spec.length * (PI / 2.0).sqrt() * tp / d * r;
    if !(per_watt2 > 0.0) {
        return Err(Error::InvalidParameter("pair rate does not depend on pump power".into()));
    }
    Ok((target / per_watt2).sqrt())
}

/// Singular values and modes of a joint amplitude.
#[derive(Clone, Debug)]
pub struct SchmidtSpectrum {
    /// Descending, normalized so that `sum lambda^2` is the pair probability.
    pub values: Vec<f64>,
    /// `signal_modes[n]` is `f_n` on the signal axis, unit norm under the grid measure.
    pub signal_modes: Vec<Vec<Complex64>>,
    pub idler_modes: Vec<Vec<Complex64>>,
    pub signal: Axis,
    pub idler: Axis,
    pub domain: Domain,
    pub purity: f64,
}

impl SchmidtSpectrum {
    /// Effective number of modes `1 / P`.
    pub fn schmidt_number(&self) -> f64 {
        1.0 / self.purity
    }
}

fn measure(axis: &Axis, domain: Domain) -> f64 {
    match domain {
        Domain::Time => axis.step,
        Domain::Frequency => axis.step / (2.0 * PI),
    }
}

fn purity_of(values: &[f64]) -> f64 {
    let s2: f64 = values.iter().map(|l| l * l).sum();
    let s4: f64 = values.iter().map(|l| l.powi(4)).sum();
    s4 / (s2 * s2)
}

/// Schmidt decomposition `A(x_s, x_i) = sum_n lambda_n f_n(x_s) g_n(x_i)` by SVD of the
/// quadrature-weighted grid matrix. Each mode's first non-negligible signal
/// component is made real and positive.
pub fn schmidt(a: &JointAmplitude) -> Result<SchmidtSpectrum> {
    let (ns, ni) = a.shape();
    let ws = measure(&a.signal, a.domain);
    let wi = measure(&a.idler, a.domain);
    let scale = (ws * wi).sqrt();
    if a.data().iter().all(|z| *z == Complex64::default()) {
        return Err(Error::Svd("amplitude is identically zero".into()));
    }
    let m = DMatrix::from_row_iterator(ns, ni, a.data().iter().map(|z| z * scale));
    // nalgebra's complex SVD occasionally stops on a wrong factorization of
    // rank-deficient matrices; check the recomposition and retry with another tolerance
    let scale_m = m.norm();
    let svd = [5.0, 1.0, 100.0]
        .iter()
        .filter_map(|&k| m.clone().try_svd(true, true, k * f64::EPSILON, 0))
        .find(|svd| svd.clone().recompose().is_ok_and(|r| (&r - &m).norm() <= 1e-10 * scale_m))
        .ok_or_else(|| Error::Svd("no accurate factorization".into()))?;
    let u = svd.u.ok_or_else(|| Error::Svd("left vectors missing".into()))?;
    let vt = svd.v_t.ok_or_else(|| Error::Svd("right vectors missing".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let mut values = Vec::with_capacity(order.len());
    let mut signal_modes = Vec::with_capacity(order.len());
    let mut idler_modes = Vec::with_capacity(order.len());
    for &k in &order {
        values.push(svd.singular_values[k]);
        let mut f: Vec<Complex64> = (0..ns).map(|s| u[(s, k)] / ws.sqrt()).collect();
        let mut g: Vec<Complex64> = (0..ni).map(|i| vt[(k, i)] / wi.sqrt()).collect();
        let peak = f.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        if let Some(first) = f.iter().find(|z| z.norm() > 1e-12 * peak) {
            let rot = Complex64::from_polar(1.0, -first.arg());
            f.iter_mut().for_each(|z| *z *= rot);
            g.iter_mut().for_each(|z| *z *= rot.conj());
        }
        signal_modes.push(f);
        idler_modes.push(g);
    }
    let purity = purity_of(&values);
    Ok(SchmidtSpectrum {
        values,
        signal_modes,
        idler_modes,
        signal: a.signal,
        idler: a.idler,
        domain: a.domain,
        purity,
    })
}

/// Purity `sum lambda^4 / (sum lambda^2)^2` without a full SVD:
/// `||M M^H||_F^2 / tr(M M^H)^2` for the grid matrix `M`.
pub fn purity(a: &JointAmplitude) -> f64 {
    let (ns, ni) = a.shape();
    let d = a.data();
    // rows of the smaller Gram matrix
    let (rows, cols, row): (usize, usize, Box<dyn Fn(usize) -> Vec<Complex64> + Sync>) = if ns <= ni {
        (ns, ni, Box::new(move |s| d[s * ni..(s + 1) * ni].to_vec()))
    } else {
        (ni, ns, Box::new(move |i| (0..ns).map(|s| d[s * ni + i]).collect()))
    };
    let vecs: Vec<Vec<Complex64>> = (0..rows).map(row).collect();
    // per-row partials summed in row order so the result does not depend on scheduling
    let partials: Vec<(f64, f64)> = (0..rows)
        .into_par_iter()
        .map(|p| {
            let vp = &vecs[p];
            let mut f = 0.0;
            let mut diag = 0.0;
            for (q, vq) in vecs.iter().enumerate().skip(p) {
                let mut g = Complex64::default();
                for c in 0..cols {
                    g += vp[c] * vq[c].conj();
                }
                if q == p {
                    diag = g.re;
                    f += g.norm_sqr();
                } else {
                    f += 2.0 * g.norm_sqr();
                }
            }
            (f, diag)
        })
        .collect();
    let (frob, trace) = partials.iter().fold((0.0, 0.0), |x, y| (x.0 + y.0, x.1 + y.1));
    frob / (trace * trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis() -> Axis {
        Axis::centered(64, 0.25).unwrap()
    }

    fn hermite(k: usize, x: f64) -> f64 {
        let g = (-x * x / 2.0).exp();
        match k {
            0 => g,
            1 => 2.0 * x * g,
            _ => unreachable!(),
        }
    }

    #[test]
    fn separable_state_is_pure() {
        let a = JointAmplitude::from_fn(axis(), axis(), Domain::Time, |s, i| {
            Complex64::new(hermite(0, s) * hermite(1, i - 0.3), 0.2 * hermite(0, s) * hermite(1, i - 0.3))
        })
        .unwrap();
        let sp = schmidt(&a).unwrap();
        assert!((sp.purity - 1.0).abs() < 1e-10);
        assert!((purity(&a) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn equal_two_mode_state_has_half_purity() {
        // orthogonal Hermite-Gauss pairs with equal weight
        let n0 = (std::f64::consts::PI.sqrt()).sqrt();
        let n1 = (2.0 * std::f64::consts::PI.sqrt()).sqrt();
        let a = JointAmplitude::from_fn(axis(), axis(), Domain::Time, |s, i| {
            Complex64::new(
                hermite(0, s) * hermite(0, i) / (n0 * n0) + hermite(1, s) * hermite(1, i) / (n1 * n1),
                0.0,
            )
        })
        .unwrap();
        let sp = schmidt(&a).unwrap();
        assert!((sp.purity - 0.5).abs() < 1e-9, "{}", sp.purity);
        assert!((sp.values[0] - 1.0).abs() < 1e-9 && (sp.values[1] - 1.0).abs() < 1e-9);
        assert!((purity(&a) - 0.5).abs() < 1e-9);
        assert!((sp.schmidt_number() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn modes_reconstruct_and_follow_phase_convention() {
        let a = JointAmplitude::from_fn(axis(), axis(), Domain::Time, |s, i| {
            Complex64::from_polar((-(s * s + i * i + 1.2 * s * i) / 2.0).exp(), 0.4 * s - 0.1 * i)
        })
        .unwrap();
        let sp = schmidt(&a).unwrap();
        let (s, i) = (30, 35);
        let rebuilt: Complex64 = (0..sp.values.len())
            .map(|k| sp.signal_modes[k][s] * sp.idler_modes[k][i] * sp.values[k])
            .sum();
        assert!((rebuilt - a.get(s, i)).norm() < 1e-10);
        for f in &sp.signal_modes[..4] {
            let peak = f.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
            let first = f.iter().find(|z| z.norm() > 1e-12 * peak).unwrap();
            assert!(first.im.abs() < 1e-12 * peak && first.re > 0.0);
            let norm: f64 = f.iter().map(|z| z.norm_sqr()).sum::<f64>() * 0.25;
            assert!((norm - 1.0).abs() < 1e-10);
        }
        let p: f64 = sp.values.iter().map(|l| l * l).sum();
        assert!((p - a.norm_sqr()).abs() < 1e-10 * p);
        assert!((sp.purity - purity(&a)).abs() < 1e-10);
    }

    #[test]
    fn zero_amplitude_is_an_error() {
        let a = JointAmplitude::zeros(axis(), axis(), Domain::Time).unwrap();
        assert!(schmidt(&a).is_err());
    }
}

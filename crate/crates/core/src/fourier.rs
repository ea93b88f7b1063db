//! Continuous-convention Fourier transforms on centered grids.
//!
//! Forward: `A(w) = integral a(t) exp(+i w t) dt`, inverse carries `1/(2 pi)`.
//! Sampled versions use the rectangle rule on `Axis` grids, so a forward/inverse
//! pair is exact up to rounding and Parseval reads
//! `sum |a|^2 dt = sum |A|^2 dw / (2 pi)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::grid::Axis;

/// `exp(2 pi i k / n)` with `k` reduced modulo `n` before the trig call.
fn turn(k: f64, n: usize) -> Complex64 {
    let r = k.rem_euclid(n as f64);
    Complex64::from_polar(1.0, 2.0 * PI * r / n as f64)
}

/// Transform along one axis, planned once for a given time axis.
#[derive(Clone)]
pub struct Fourier1d {
    time: Axis,
    freq: Axis,
    plus: Arc<dyn Fft<f64>>,
    minus: Arc<dyn Fft<f64>>,
    fwd_pre: Vec<Complex64>,
    fwd_post: Vec<Complex64>,
    inv_pre: Vec<Complex64>,
    inv_post: Vec<Complex64>,
}

impl std::fmt::Debug for Fourier1d {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier1d").field("time", &self.time).finish()
    }
}

impl Fourier1d {
    pub fn new(time: Axis) -> Self {
        let n = time.n;
        let freq = time.reciprocal();
        let mut planner = FftPlanner::new();
        // rustfft's "inverse" carries exp(+2 pi i jk/n), which is our forward sign
        let plus = planner.plan_fft_inverse(n);
        let minus = planner.plan_fft_forward(n);
        let half = (n / 2) as f64;
        let s = time.origin / time.step;
        let fwd_pre = (0..n).map(|j| turn(-half * j as f64, n)).collect();
        let fwd_post = (0..n)
            .map(|m| turn((m as f64 - half) * s, n) * time.step)
            .collect();
        let inv_pre = (0..n).map(|m| turn(-(m as f64) * s, n)).collect();
        let norm = 1.0 / (n as f64 * time.step);
        let inv_post = (0..n)
            .map(|j| turn(half * (s + j as f64), n) * norm)
            .collect();
        Fourier1d {
            time,
            freq,
            plus,
            minus,
            fwd_pre,
            fwd_post,
            inv_pre,
            inv_post,
        }
    }

    pub fn time_axis(&self) -> Axis {
        self.time
    }

    pub fn freq_axis(&self) -> Axis {
        self.freq
    }

    pub fn len(&self) -> usize {
        self.time.n
    }

    pub fn is_empty(&self) -> bool {
        self.time.n == 0
    }

    /// Time samples to spectral samples, in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        let mut scratch = vec![Complex64::default(); self.plus.get_inplace_scratch_len()];
        self.forward_with(data, &mut scratch);
    }

    /// Spectral samples to time samples, in place.
    pub fn inverse(&self, data: &mut [Complex64]) {
        let mut scratch = vec![Complex64::default(); self.minus.get_inplace_scratch_len()];
        self.inverse_with(data, &mut scratch);
    }

    fn forward_with(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.len());
        for (x, p) in data.iter_mut().zip(&self.fwd_pre) {
            *x *= p;
        }
        self.plus.process_with_scratch(data, scratch);
        for (x, p) in data.iter_mut().zip(&self.fwd_post) {
            *x *= p;
        }
    }

    fn inverse_with(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.len());
        for (x, p) in data.iter_mut().zip(&self.inv_pre) {
            *x *= p;
        }
        self.minus.process_with_scratch(data, scratch);
        for (x, p) in data.iter_mut().zip(&self.inv_post) {
            *x *= p;
        }
    }

    /// Forward transform of every contiguous row of length `n`, rows in parallel.
    pub fn forward_rows(&self, data: &mut [Complex64]) {
        let n = self.len();
        let len = self.plus.get_inplace_scratch_len();
        data.par_chunks_mut(n).for_each_init(
            || vec![Complex64::default(); len],
            |scratch, row| self.forward_with(row, scratch),
        );
    }

    pub fn inverse_rows(&self, data: &mut [Complex64]) {
        let n = self.len();
        let len = self.minus.get_inplace_scratch_len();
        data.par_chunks_mut(n).for_each_init(
            || vec![Complex64::default(); len],
            |scratch, row| self.inverse_with(row, scratch),
        );
    }
}

/// Out-of-place transpose of a row-major `rows x cols` matrix.
pub fn transpose(data: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    const B: usize = 32;
    let mut out = vec![Complex64::default(); data.len()];
    out.par_chunks_mut(rows * B.min(cols.max(1)))
        .enumerate()
        .for_each(|(cb, block)| {
            let c0 = cb * B;
            let c1 = (c0 + B).min(cols);
            for r0 in (0..rows).step_by(B) {
                let r1 = (r0 + B).min(rows);
                for c in c0..c1 {
                    let dst = &mut block[(c - c0) * rows..(c - c0 + 1) * rows];
                    for r in r0..r1 {
                        dst[r] = data[r * cols + c];
                    }
                }
            }
        });
    out
}

/// 2D transform over a signal-major `(n_s, n_i)` grid.
#[derive(Clone, Debug)]
pub struct Fourier2d {
    pub signal: Fourier1d,
    pub idler: Fourier1d,
}

impl Fourier2d {
    pub fn new(signal: Axis, idler: Axis) -> Self {
        let s = Fourier1d::new(signal);
        let i = if idler == signal {
            s.clone()
        } else {
            Fourier1d::new(idler)
        };
        Fourier2d {
            signal: s,
            idler: i,
        }
    }

    pub fn forward(&self, data: &mut Vec<Complex64>) {
        let (ns, ni) = (self.signal.len(), self.idler.len());
        self.idler.forward_rows(data);
        let mut t = transpose(data, ns, ni);
        self.signal.forward_rows(&mut t);
        *data = transpose(&t, ni, ns);
    }

    pub fn inverse(&self, data: &mut Vec<Complex64>) {
        let (ns, ni) = (self.signal.len(), self.idler.len());
        self.idler.inverse_rows(data);
        let mut t = transpose(data, ns, ni);
        self.signal.inverse_rows(&mut t);
        *data = transpose(&t, ni, ns);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(axis: &Axis, width: f64, shift: f64) -> Vec<Complex64> {
        axis.points()
            .iter()
            .map(|t| Complex64::new((-(t - shift).powi(2) / (2.0 * width * width)).exp(), 0.0))
            .collect()
    }

    #[test]
    fn gaussian_maps_to_analytic_gaussian() {
        // exp(-t^2/2s^2) -> s sqrt(2 pi) exp(-w^2 s^2/2), shifted pulse picks up exp(i w t0)
        let axis = Axis::centered(256, 0.05).unwrap();
        let width = 0.7;
        let shift = 0.9;
        let f = Fourier1d::new(axis);
        let mut a = gaussian(&axis, width, shift);
        f.forward(&mut a);
        let w = axis.reciprocal();
        for (m, x) in a.iter().enumerate() {
            let om = w.at(m);
            let want = Complex64::from_polar(
                width * (2.0 * PI).sqrt() * (-(om * width).powi(2) / 2.0).exp(),
                om * shift,
            );
            assert!((x - want).norm() < 1e-12, "m={m} {x} {want}");
        }
    }

    #[test]
    fn round_trip_with_odd_origin() {
        let axis = Axis::new(128, 0.1, -3.337).unwrap();
        let f = Fourier1d::new(axis);
        let orig: Vec<Complex64> = (0..128)
            .map(|j| Complex64::new((j as f64 * 0.3).sin(), (j as f64 * 0.11).cos()))
            .collect();
        let mut a = orig.clone();
        f.forward(&mut a);
        f.inverse(&mut a);
        for (x, y) in a.iter().zip(&orig) {
            assert!((x - y).norm() < 1e-13);
        }
    }

    #[test]
    fn transpose_roundtrip() {
        let d: Vec<Complex64> = (0..(70 * 33)).map(|k| Complex64::new(k as f64, -(k as f64))).collect();
        let t = transpose(&d, 70, 33);
        assert_eq!(t[5 * 70 + 7], d[7 * 33 + 5]);
        assert_eq!(transpose(&t, 33, 70), d);
    }

    #[test]
    fn parseval_2d() {
        let axis = Axis::centered(64, 0.2).unwrap();
        let f = Fourier2d::new(axis, axis);
        let pts = axis.points();
        let mut a: Vec<Complex64> = pts
            .iter()
            .flat_map(|&ts| {
                pts.iter().map(move |&ti| {
                    Complex64::from_polar((-(ts * ts + 2.0 * ti * ti + ts * ti)).exp(), 0.3 * ts)
                })
            })
            .collect();
        let dt = axis.step;
        let p_t: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>() * dt * dt;
        f.forward(&mut a);
        let dw = axis.reciprocal().step;
        let p_w: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>() * dw * dw / (4.0 * PI * PI);
        assert!((p_t - p_w).abs() / p_t < 1e-12);
    }
}

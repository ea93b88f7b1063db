//! Evaluation of uniformly sampled functions between grid points.

use std::ops::{Add, Mul};

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Sample types that can be interpolated.
pub trait Sample: Copy + Default + Add<Output = Self> + Mul<f64, Output = Self> + Send + Sync {}
impl Sample for f64 {}
impl Sample for Complex64 {}

/// Samples `values[j]` at `origin + j * step`, taken as zero outside the grid.
#[derive(Clone, Debug)]
pub struct UniformSeries<T> {
    pub origin: f64,
    pub step: f64,
    pub values: Vec<T>,
}

impl<T: Sample> UniformSeries<T> {
    pub fn new(origin: f64, step: f64, values: Vec<T>) -> Self {
        UniformSeries {
            origin,
            step,
            values,
        }
    }

    #[inline]
    fn get(&self, j: i64) -> T {
        if j < 0 || j as usize >= self.values.len() {
            T::default()
        } else {
            self.values[j as usize]
        }
    }

    #[inline]
    fn locate(&self, t: f64) -> (i64, f64) {
        let x = (t - self.origin) / self.step;
        let j = x.floor();
        (j as i64, x - j)
    }

    pub fn linear(&self, t: f64) -> T {
        let (j, s) = self.locate(t);
        self.get(j) * (1.0 - s) + self.get(j + 1) * s
    }

    /// Four-point Lagrange interpolation, fourth-order accurate in `step`.
    pub fn cubic(&self, t: f64) -> T {
        let (j, s) = self.locate(t);
        if s == 0.0 {
            return self.get(j);
        }
        let w = cubic_weights(s);
        self.get(j - 1) * w[0] + self.get(j) * w[1] + self.get(j + 1) * w[2] + self.get(j + 2) * w[3]
    }
}

#[inline]
fn cubic_weights(s: f64) -> [f64; 4] {
    [
        -s * (s - 1.0) * (s - 2.0) / 6.0,
        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
        -(s + 1.0) * s * (s - 2.0) / 2.0,
        (s + 1.0) * s * (s - 1.0) / 6.0,
    ]
}

/// Integrals from 0 to `u` of the four cubic Lagrange basis polynomials.
#[inline]
fn cubic_weight_integrals(u: f64) -> [f64; 4] {
    let (u2, u3, u4) = (u * u, u * u * u, u * u * u * u);
    [
        -(u4 / 4.0 - u3 + u2) / 6.0,
        (u4 / 4.0 - 2.0 * u3 / 3.0 - u2 / 2.0 + 2.0 * u) / 2.0,
        -(u4 / 4.0 - u3 / 3.0 - u2) / 2.0,
        (u4 / 4.0 - u2 / 2.0) / 6.0,
    ]
}

/// Running integral `C(t) = integral_{-inf}^{t} f` of a real series that vanishes
/// beyond its grid, built from the same local cubics as `UniformSeries::cubic`.
#[derive(Clone, Debug)]
pub struct Antiderivative {
    series: UniformSeries<f64>,
    /// `cumulative[j] = C(origin + j step)` for `j = 0..=n+1`; the last entry is the total.
    cumulative: Vec<f64>,
}

impl Antiderivative {
    pub fn new(series: UniformSeries<f64>) -> Self {
        let n = series.values.len();
        let h = series.step;
        let mut cumulative = Vec::with_capacity(n + 1);
        // the cubic through j-2..j+1 also covers [x_{-1}, x_0], where f may be nonzero
        let w = cubic_weight_integrals(1.0);
        let seg = |j: i64| -> f64 {
            h * (series.get(j - 1) * w[0]
                + series.get(j) * w[1]
                + series.get(j + 1) * w[2]
                + series.get(j + 2) * w[3])
        };
        let mut acc = seg(-2) + seg(-1);
        for j in 0..=(n as i64 + 1) {
            cumulative.push(acc);
            acc += seg(j);
        }
        Antiderivative { series, cumulative }
    }

    pub fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn at(&self, t: f64) -> f64 {
        let (j, s) = self.series.locate(t);
        if j < -2 {
            return 0.0;
        }
        let n = self.series.values.len() as i64;
        if j > n {
            return self.total();
        }
        let h = self.series.step;
        let base = if j < 0 {
            // partial sums left of the grid are tiny; rebuild them on the fly
            let w = cubic_weight_integrals(1.0);
            let mut acc = 0.0;
            for k in -2..j {
                acc += h * (self.series.get(k - 1) * w[0]
                    + self.series.get(k) * w[1]
                    + self.series.get(k + 1) * w[2]
                    + self.series.get(k + 2) * w[3]);
            }
            acc
        } else {
            self.cumulative[j as usize]
        };
        let w = cubic_weight_integrals(s);
        base + h
            * (self.series.get(j - 1) * w[0]
                + self.series.get(j) * w[1]
                + self.series.get(j + 1) * w[2]
                + self.series.get(j + 2) * w[3])
    }

    /// `integral_a^b f`.
    pub fn between(&self, a: f64, b: f64) -> f64 {
        self.at(b) - self.at(a)
    }
}

/// Band-limited refinement of a periodic sample sequence by spectral zero padding.
/// Output sample `p` sits at fractional input position `p / factor`.
pub fn oversample(values: &[Complex64], factor: usize) -> Vec<Complex64> {
    let n = values.len();
    if factor <= 1 || n == 0 {
        return values.to_vec();
    }
    let m = n * factor;
    let mut planner = FftPlanner::new();
    let mut spec = values.to_vec();
    planner.plan_fft_forward(n).process(&mut spec);
    let mut padded = vec![Complex64::default(); m];
    let half = n / 2;
    for k in 0..n {
        if n % 2 == 0 && k == half {
            padded[half] += spec[k] * 0.5;
            padded[m - half] += spec[k] * 0.5;
        } else if k < half || (n % 2 == 1 && k == half) {
            padded[k] = spec[k];
        } else {
            padded[m - (n - k)] = spec[k];
        }
    }
    planner.plan_fft_inverse(m).process(&mut padded);
    let scale = 1.0 / n as f64;
    for x in padded.iter_mut() {
        *x *= scale;
    }
    padded
}

/// Real version of [`oversample`].
pub fn oversample_real(values: &[f64], factor: usize) -> Vec<f64> {
    let c: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    oversample(&c, factor).into_iter().map(|z| z.re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss_series(n: usize, h: f64) -> UniformSeries<f64> {
        let origin = -(n as f64 / 2.0) * h;
        let v = (0..n)
            .map(|j| {
                let t = origin + j as f64 * h;
                (-t * t).exp()
            })
            .collect();
        UniformSeries::new(origin, h, v)
    }

    #[test]
    fn cubic_reproduces_cubics() {
        let f = |t: f64| 1.0 - 2.0 * t + 0.5 * t * t - 0.25 * t * t * t;
        let s = UniformSeries::new(0.0, 0.5, (0..20).map(|j| f(j as f64 * 0.5)).collect());
        for &t in &[1.1, 2.37, 4.999, 6.0] {
            assert!((s.cubic(t) - f(t)).abs() < 1e-12, "{t}");
        }
    }

    #[test]
    fn linear_between_points() {
        let s = UniformSeries::new(1.0, 1.0, vec![0.0, 2.0, 4.0]);
        assert_eq!(s.linear(1.5), 1.0);
        assert_eq!(s.linear(0.0), 0.0);
        assert_eq!(s.linear(2.25), 2.5);
    }

    #[test]
    fn antiderivative_of_gaussian_matches_erf() {
        let s = gauss_series(2000, 0.01);
        let c = Antiderivative::new(s);
        let pi_half = std::f64::consts::PI.sqrt() / 2.0;
        for &t in &[-3.0, -0.77, 0.0, 0.3141, 2.5] {
            let want = pi_half * (1.0 + statrs::function::erf::erf(t));
            assert!((c.at(t) - want).abs() < 1e-8, "t={t} {} {}", c.at(t), want);
        }
        assert!((c.total() - 2.0 * pi_half).abs() < 1e-10);
        assert_eq!(c.at(-100.0), 0.0);
        assert_eq!(c.at(100.0), c.total());
    }

    #[test]
    fn oversampling_a_bandlimited_signal_is_exact() {
        let n = 64;
        let h = 0.25;
        let s = gauss_series(n, h);
        let up = oversample_real(&s.values, 8);
        for (p, v) in up.iter().enumerate().take(8 * n - 8) {
            let t = s.origin + p as f64 * h / 8.0;
            assert!((v - (-t * t).exp()).abs() < 1e-12, "p={p}");
        }
    }
}

//! Uniform sampling axes.

use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// A uniform axis `x_j = origin + j * step`, `j = 0..n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub n: usize,
    pub step: f64,
    pub origin: f64,
}

impl Axis {
    pub fn new(n: usize, step: f64, origin: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("axis needs at least one point"));
        }
        if !(step > 0.0 && step.is_finite()) || !origin.is_finite() {
            return Err(invalid(format!("axis step must be positive and finite, got {step}")));
        }
        Ok(Axis { n, step, origin })
    }

    /// Axis with `x_{n/2} = 0`, the layout used for every time and frequency grid here.
    pub fn centered(n: usize, step: f64) -> Result<Self> {
        Axis::new(n, step, -((n / 2) as f64) * step)
    }

    /// Centered axis of `n` points covering `span`.
    pub fn centered_span(n: usize, span: f64) -> Result<Self> {
        Axis::centered(n, span / n as f64)
    }

    #[inline]
    pub fn at(&self, j: usize) -> f64 {
        self.origin + j as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.at(j)).collect()
    }

    pub fn span(&self) -> f64 {
        self.n as f64 * self.step
    }

    pub fn last(&self) -> f64 {
        self.at(self.n - 1)
    }

    /// Conjugate (Fourier) axis: `n` points, step `2 pi / (n step)`, centered.
    pub fn reciprocal(&self) -> Axis {
        let dw = 2.0 * PI / (self.n as f64 * self.step);
        Axis {
            n: self.n,
            step: dw,
            origin: -((self.n / 2) as f64) * dw,
        }
    }

    /// Largest representable angular frequency, `pi / step`.
    pub fn nyquist(&self) -> f64 {
        PI / self.step
    }

    /// Index of the sample with `x_j = 0` on a centered axis.
    pub fn zero_index(&self) -> usize {
        self.n / 2
    }
}

/// Whether a grid holds temporal or spectral samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Time,
    Frequency,
}

//! Two-photon joint amplitude on a 2D grid.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fourier::Fourier2d;
use crate::grid::{Axis, Domain};

/// Complex amplitude over `(t_s, t_i)` (units 1/s) or `(w_s, w_i)` (dimensionless),
/// stored signal-major.
#[derive(Clone, Debug, PartialEq)]
pub struct JointAmplitude {
    pub signal: Axis,
    pub idler: Axis,
    pub domain: Domain,
    data: Vec<Complex64>,
}

impl JointAmplitude {
    pub fn new(signal: Axis, idler: Axis, domain: Domain, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != signal.n * idler.n {
            return Err(Error::GridMismatch(format!(
                "{} samples for a {}x{} grid",
                data.len(),
                signal.n,
                idler.n
            )));
        }
        if !signal.n.is_power_of_two() || !idler.n.is_power_of_two() {
            return Err(invalid(format!(
                "grid sizes must be powers of two, got {}x{}",
                signal.n, idler.n
            )));
        }
        Ok(JointAmplitude {
            signal,
            idler,
            domain,
            data,
        })
    }

    pub fn zeros(signal: Axis, idler: Axis, domain: Domain) -> Result<Self> {
        JointAmplitude::new(signal, idler, domain, vec![Complex64::default(); signal.n * idler.n])
    }

    pub fn from_fn(signal: Axis, idler: Axis, domain: Domain, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        let mut data = Vec::with_capacity(signal.n * idler.n);
        for s in 0..signal.n {
            let xs = signal.at(s);
            for i in 0..idler.n {
                data.push(f(xs, idler.at(i)));
            }
        }
        JointAmplitude::new(signal, idler, domain, data)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.signal.n, self.idler.n)
    }

    #[inline]
    pub fn get(&self, s: usize, i: usize) -> Complex64 {
        self.data[s * self.idler.n + i]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    /// Area element of one grid cell in the current domain, including the
    /// `1/(2 pi)^2` of the spectral measure.
    pub fn cell(&self) -> f64 {
        let a = self.signal.step * self.idler.step;
        match self.domain {
            Domain::Time => a,
            Domain::Frequency => a / (4.0 * PI * PI),
        }
    }

    /// `sum |A|^2` times the cell area: the pair probability.
    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.cell()
    }

    /// JSA from a JTA; identity if already spectral.
    pub fn to_spectral(&self) -> JointAmplitude {
        self.to_spectral_with(&Fourier2d::new(self.signal, self.idler))
    }

    pub fn to_spectral_with(&self, f: &Fourier2d) -> JointAmplitude {
        if self.domain == Domain::Frequency {
            return self.clone();
        }
        let mut data = self.data.clone();
        f.forward(&mut data);
        JointAmplitude {
            signal: self.signal.reciprocal(),
            idler: self.idler.reciprocal(),
            domain: Domain::Frequency,
            data,
        }
    }

    /// JTA from a JSA; identity if already temporal. Assumes a centered time grid.
    pub fn to_temporal(&self) -> JointAmplitude {
        if self.domain == Domain::Time {
            return self.clone();
        }
        let ts = self.signal.reciprocal();
        let ti = self.idler.reciprocal();
        let mut data = self.data.clone();
        Fourier2d::new(ts, ti).inverse(&mut data);
        JointAmplitude {
            signal: ts,
            idler: ti,
            domain: Domain::Time,
            data,
        }
    }

    /// Relative L2 distance `||self - other|| / ||other||` on matching grids.
    pub fn relative_l2(&self, other: &JointAmplitude) -> Result<f64> {
        if self.shape() != other.shape() || self.domain != other.domain {
            return Err(Error::GridMismatch("amplitudes live on different grids".into()));
        }
        let num: f64 = self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm_sqr()).sum();
        let den: f64 = other.data.iter().map(|b| b.norm_sqr()).sum();
        Ok((num / den).sqrt())
    }

    /// Fraction of `sum |A|^2` in the outer band `|x| > edge * max|x|` of either spectral axis.
    pub fn edge_fraction(&self, edge: f64) -> f64 {
        let jsa;
        let a = if self.domain == Domain::Frequency {
            self
        } else {
            jsa = self.to_spectral();
            &jsa
        };
        let ns = a.signal.n;
        let ni = a.idler.n;
        let lim_s = edge * a.signal.nyquist_of_reciprocal();
        let lim_i = edge * a.idler.nyquist_of_reciprocal();
        let mut total = 0.0;
        let mut outer = 0.0;
        for s in 0..ns {
            let ws = a.signal.at(s).abs();
            for i in 0..ni {
                let p = a.data[s * ni + i].norm_sqr();
                total += p;
                if ws > lim_s || a.idler.at(i).abs() > lim_i {
                    outer += p;
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            outer / total
        }
    }
}

impl Axis {
    /// Half-width of a spectral axis (the Nyquist frequency of its time twin).
    pub fn nyquist_of_reciprocal(&self) -> f64 {
        (self.n / 2) as f64 * self.step
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(axis: Axis, sigma_s: f64, sigma_i: f64) -> JointAmplitude {
        // unit L2 norm separable Gaussian
        let norm = 1.0 / (PI * sigma_s * sigma_i).sqrt();
        JointAmplitude::from_fn(axis, axis, Domain::Time, |ts, ti| {
            Complex64::new(
                norm * (-ts * ts / (2.0 * sigma_s * sigma_s) - ti * ti / (2.0 * sigma_i * sigma_i)).exp(),
                0.0,
            )
        })
        .unwrap()
    }

    #[test]
    fn unit_gaussian_has_unit_probability() {
        let a = gauss(Axis::centered(256, 0.1).unwrap(), 0.8, 1.3);
        assert!((a.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jsa_is_reciprocal_gaussian() {
        let axis = Axis::centered(256, 0.1).unwrap();
        let (ss, si) = (0.8, 1.3);
        let a = gauss(axis, ss, si);
        let f = a.to_spectral();
        let norm = 1.0 / (PI * ss * si).sqrt() * 2.0 * PI * ss * si;
        for &(s, i) in &[(128, 128), (134, 124), (144, 114)] {
            let ws = f.signal.at(s);
            let wi = f.idler.at(i);
            let want = norm * (-(ws * ss).powi(2) / 2.0 - (wi * si).powi(2) / 2.0).exp();
            assert!((f.get(s, i).re - want).abs() < 1e-10 && f.get(s, i).im.abs() < 1e-10);
        }
        assert!((f.norm_sqr() - 1.0).abs() < 1e-12);
        let back = f.to_temporal();
        assert!(back.relative_l2(&a).unwrap() < 1e-13);
    }

    #[test]
    fn rejects_non_power_of_two() {
        let a = Axis::centered(12, 0.1).unwrap();
        assert!(JointAmplitude::zeros(a, a, Domain::Time).is_err());
    }

    #[test]
    fn edge_fraction_of_smooth_state_is_tiny() {
        let a = gauss(Axis::centered(256, 0.1).unwrap(), 0.8, 1.3);
        assert!(a.edge_fraction(0.9) < 1e-20);
    }
}

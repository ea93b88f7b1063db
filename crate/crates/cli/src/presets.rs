//! Ready-made configurations for the standard figures.

use crate::config::{Metric, RunConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Respond,
    Propagate,
    Sweep,
    Converge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// Rate ratio r(nu) at four temperatures.
    Fig2,
    /// Pairs-to-singles ratio around the pump.
    Fig3,
    /// CAR at a fixed pair rate.
    Fig4,
    /// Split-step purity without Raman.
    Fig6a,
    /// Split-step purity with a purely delayed response.
    Fig6b,
    /// Purity against detuning for four pulse durations.
    Fig7,
}

const THZ: f64 = 2.0 * std::f64::consts::PI * 1e12;
const TEMPERATURES: [f64; 4] = [4.0, 77.0, 195.0, 295.0];

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn fig6(fraction: f64) -> RunConfig {
    let mut c = RunConfig::default();
    c.raman.fraction = fraction;
    c.pump.duration = 0.1e-12;
    c.pump.peak_power = Some(10.0);
    c.waveguide.walk_off_ratio = Some(2.0);
    c.waveguide.detuning = 60e12;
    c.grid.n = 512;
    c.plan.steps = 128;
    c.output.modes = 4;
    c
}

pub fn preset(p: Preset) -> (RunConfig, Command) {
    let mut c = RunConfig::default();
    match p {
        Preset::Fig2 => {
            c.sweep.metric = Metric::Rate;
            c.sweep.temperature = TEMPERATURES.to_vec();
            c.sweep.detuning = linspace(0.1, 100.0, 1000).into_iter().map(|v| v * THZ).collect();
            (c, Command::Sweep)
        }
        Preset::Fig3 => {
            c.sweep.metric = Metric::Statistics;
            c.sweep.temperature = TEMPERATURES.to_vec();
            c.sweep.detuning = linspace(-40.0, 40.0, 320).into_iter().map(|v| v * THZ).collect();
            (c, Command::Sweep)
        }
        Preset::Fig4 => {
            c.sweep.metric = Metric::Statistics;
            c.pump.duration = 1e-12;
            c.pump.peak_power = None;
            c.pump.pair_rate = Some(1e-3);
            c.waveguide.gamma_pump = 2e-3;
            c.waveguide.gamma_signal = 2e-3;
            c.waveguide.gamma_idler = 2e-3;
            // walk-off product of 1 ps over 100 m
            c.waveguide.length = 100.0;
            c.waveguide.beta1_signal = 5e-15;
            c.waveguide.beta1_idler = -5e-15;
            c.filter.bandwidth = 1e-9;
            c.filter.wavelength = 1550e-9;
            c.sweep.temperature = TEMPERATURES.to_vec();
            c.sweep.detuning = linspace(0.25, 40.0, 160).into_iter().map(|v| v * THZ).collect();
            (c, Command::Sweep)
        }
        Preset::Fig6a => (fig6(0.0), Command::Propagate),
        Preset::Fig6b => (fig6(1.0), Command::Propagate),
        Preset::Fig7 => {
            let mut c = fig6(0.18);
            c.grid.n = 256;
            c.plan.steps = 64;
            c.output.modes = 0;
            c.sweep.metric = Metric::Purity;
            c.sweep.duration = vec![0.1e-12, 0.2e-12, 0.5e-12, 1e-12];
            c.sweep.fraction = vec![0.0, 0.18];
            c.sweep.detuning = [2.0, 5.0, 10.0, 13.0, 14.0, 15.0, 16.0, 17.0, 18.0, 20.0, 22.0, 26.0, 30.0, 35.0, 40.0]
                .iter()
                .map(|v| v * THZ)
                .collect();
            (c, Command::Sweep)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_survive_their_own_serialization() {
        for p in [Preset::Fig2, Preset::Fig3, Preset::Fig4, Preset::Fig6a, Preset::Fig6b, Preset::Fig7] {
            let (c, _) = preset(p);
            c.validate().unwrap();
            assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c, "{p:?}");
        }
    }

    #[test]
    fn fig6_walk_off_matches_twice_the_pulse() {
        let (c, _) = preset(Preset::Fig6a);
        let s = c.base_spec();
        assert!((s.beta1_signal * s.length / 0.1e-12 - 2.0).abs() < 1e-12);
        assert_eq!(s.beta1_idler, -s.beta1_signal);
    }
}

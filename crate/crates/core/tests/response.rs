mod common;

use common::{silica, silica_with, thz, TWO_PI};
use num_complex::Complex64;
use proptest::prelude::*;
use sfwm_core::constants::{HBAR, K_B};
use sfwm_core::fourier::Fourier1d;
use sfwm_core::response::{kernel_axis, RamanMode};
use sfwm_core::{coupling_w, n_th, noise_f, Axis, Error, ModeTable, RamanKind, RamanModel, RamanResponse, ResponseGrid};

/// Straight `sum h_n exp(i w n dt) dt` with no recurrence.
fn chi_direct(r: &RamanResponse, w: f64) -> Complex64 {
    let dt = r.grid().dt;
    r.samples()
        .iter()
        .enumerate()
        .map(|(n, &h)| Complex64::from_polar(h * dt, w * n as f64 * dt))
        .sum()
}

/// `sum_{k>=1} exp(-k x)`, summed until the terms vanish.
fn bose_series(omega: f64, t: f64) -> f64 {
    let x = HBAR * omega / (K_B * t);
    let mut sum = 0.0;
    let mut k = 1.0;
    loop {
        let term = (-k * x).exp();
        sum += term;
        if term < 1e-18 * sum {
            return sum;
        }
        k += 1.0;
    }
}

#[test]
fn recurrence_matches_direct_sum() {
    let r = silica();
    for w in [1e12, thz(5.0), thz(13.2), thz(31.7), 3e15] {
        let a = r.chi(w);
        let b = chi_direct(r, w);
        assert!((a - b).norm() < 1e-11, "w={w}: {a} vs {b}");
    }
}

#[test]
fn silica_normalization_and_parity() {
    let r = silica();
    let c0 = r.chi(0.0);
    assert!((c0 - Complex64::new(1.0, 0.0)).norm() < 1e-9);
    let mut worst: f64 = 0.0;
    for k in 1..=400 {
        let w = thz(0.1 * k as f64);
        let (p, m) = (r.chi(w), r.chi(-w));
        worst = worst.max((p.re - m.re).abs()).max((p.im + m.im).abs());
    }
    assert!(worst < 1e-9, "parity error {worst}");
}

#[test]
fn silica_gain_peaks_near_13_thz() {
    let r = silica();
    let scan: Vec<f64> = (1..=4000).map(|k| thz(0.01 * k as f64)).collect();
    let chi = r.chi_many(&scan);
    let (best, _) = chi
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |(bi, bv), (i, c)| if c.im > bv { (i, c.im) } else { (bi, bv) });
    let f = scan[best] / TWO_PI / 1e12;
    assert!((f - 13.2).abs() < 0.15, "peak at {f} THz");
    assert!(chi.iter().all(|c| c.im >= -1e-12), "negative gain on the Stokes side");
}

#[test]
fn causal_response_starts_at_zero() {
    let r = silica();
    assert_eq!(r.samples()[0], 0.0);
    let area: f64 = r.samples().iter().sum::<f64>() * r.grid().dt;
    assert!((area - 1.0).abs() < 1e-12);
}

#[test]
fn bose_einstein_against_series() {
    let n = n_th(thz(13.2), 300.0).unwrap();
    let s = bose_series(thz(13.2), 300.0);
    assert!((n - s).abs() < 1e-14, "{n} vs {s}");
    assert!((n - 0.138).abs() < 1e-3);
    for &(w, t) in &[(thz(0.5), 4.0), (thz(40.0), 77.0), (thz(1.0), 295.0)] {
        let n = n_th(w, t).unwrap();
        assert!((n - bose_series(w, t)).abs() < 1e-12 * n.max(1e-300), "w={w} T={t}");
    }
    assert_eq!(n_th(thz(1.0), 0.0).unwrap(), 0.0);
    assert!(matches!(n_th(0.0, 1.0), Err(Error::Domain(_))));
}

#[test]
fn instantaneous_medium_has_unit_coupling() {
    let r = silica_with(0.0);
    let axis = Axis::centered(512, 4e-15).unwrap();
    let k = coupling_w(&r, thz(9.5), 300.0, axis).unwrap();
    let worst = k.spectrum().iter().map(|w| (w - 1.0).norm()).fold(0.0, f64::max);
    assert!(worst < 1e-12, "{worst}");
    let dt = axis.step;
    assert!((k.lag(0) * dt - 1.0).norm() < 1e-12);
    for lag in (-255..=255).filter(|&l| l != 0) {
        assert!(k.lag(lag).norm() * dt < 1e-12, "lag {lag}");
    }
    assert!(k.noise().iter().all(|&f| f == 0.0));
}

#[test]
fn coupling_at_zero_frequency_composes_from_parts() {
    let r = silica();
    let (omega, t, f) = (thz(9.5), 300.0, 0.18);
    let c = chi_direct(r, omega);
    let n = bose_series(omega, t);
    let want = Complex64::new(1.0 - f + f * c.re, f * (2.0 * n + 1.0) * c.im);
    let got = r.coupling_at(0.0, omega, t).unwrap();
    assert!((got - want).norm() < 1e-12, "{got} vs {want}");
    assert!((r.coupling_at(omega, omega, 0.0).unwrap() - 1.0).norm() < 1e-12);
    // n_th chi'' stays finite as the argument goes to zero
    let limit = 2.0 * f * K_B * t / HBAR * r.mean_delay();
    let at = r.coupling_at(omega, omega, t).unwrap();
    assert!((at - Complex64::new(1.0, limit)).norm() < 1e-12);
    let near = r.coupling_at(omega - 1e9, omega, t).unwrap();
    assert!((near - at).norm() < 1e-4);
}

#[test]
fn kernel_is_fourier_twin_of_spectrum() {
    let r = silica();
    let axis = kernel_axis(r, 256, 8e-15).unwrap();
    let k = coupling_w(r, thz(9.5), 295.0, axis).unwrap();
    let mut back = k.kernel().to_vec();
    Fourier1d::new(k.time_axis()).forward(&mut back);
    let num: f64 = back.iter().zip(k.spectrum()).map(|(a, b)| (a - b).norm_sqr()).sum();
    let den: f64 = k.spectrum().iter().map(|b| b.norm_sqr()).sum();
    assert!((num / den).sqrt() < 1e-9);
    assert!(k.spectrum().iter().all(|w| w.im >= 0.0));
}

#[test]
fn noise_spectrum_identities() {
    let r = silica();
    let axis = Axis::centered(1024, 8e-15).unwrap();
    let freq = axis.reciprocal();
    for &t in &[0.0, 4.0, 295.0] {
        let f = noise_f(r, t, axis).unwrap();
        let z = freq.zero_index();
        for m in 1..z {
            let (w, plus, minus) = (freq.at(z + m), f[z + m], f[z - m]);
            let c = r.chi(w).im;
            let n = if t == 0.0 { 0.0 } else { n_th(w, t).unwrap() };
            assert!((plus - minus - 2.0 * 0.18 * c).abs() < 1e-12, "difference at {w}");
            let mean = 0.5 * (plus + minus);
            assert!((mean - 0.18 * c * (2.0 * n + 1.0)).abs() < 1e-12 * (1.0 + mean.abs()));
            if t == 0.0 {
                assert_eq!(minus, 0.0);
                assert!((plus - 2.0 * 0.18 * c).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn bad_inputs_are_rejected() {
    assert!(RamanModel::silica(-0.1).is_err());
    let coarse = RamanResponse::build(RamanModel::silica(0.18).unwrap(), ResponseGrid { n: 2048, dt: 1e-15 });
    assert!(matches!(coarse, Err(Error::NonNormalizable(_))));
    let r = silica();
    assert!(coupling_w(r, 1e13, -1.0, Axis::centered(64, 1e-14).unwrap()).is_err());
    assert!(coupling_w(r, 1e13, 1.0, Axis::new(64, 1e-14, 0.0).unwrap()).is_err());
}

fn oscillator() -> &'static RamanResponse {
    static R: std::sync::OnceLock<RamanResponse> = std::sync::OnceLock::new();
    R.get_or_init(|| {
        let m = RamanModel::new(RamanKind::SingleDampedOscillator { tau1: 12.2e-15, tau2: 32e-15 }, 0.5).unwrap();
        RamanResponse::build(m, ResponseGrid { n: 8192, dt: 0.5e-15 }).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chi_is_hermitian(w in -5e15f64..5e15) {
        for r in [silica(), oscillator()] {
            let (p, m) = (r.chi(w), r.chi(-w));
            prop_assert!((p - m.conj()).norm() < 1e-9);
        }
    }

    #[test]
    fn occupation_grows_with_temperature(w in 1e11f64..1e15, t1 in 0.0f64..1000.0, dt in 0.1f64..500.0) {
        let a = n_th(w, t1).unwrap();
        let b = n_th(w, t1 + dt).unwrap();
        prop_assert!(a < b || b == 0.0);
    }

    #[test]
    fn coupling_has_nonnegative_loss(nu in -2e14f64..2e14, omega in -2e14f64..2e14, t in 0.0f64..400.0) {
        let w = silica().coupling_at(nu, omega, t).unwrap();
        prop_assert!(w.im >= 0.0);
        let one = silica().coupling_at(omega, omega, 0.0).unwrap();
        prop_assert!((one - 1.0).norm() < 1e-9);
    }

    #[test]
    fn noise_symmetric_part(w in 1e11f64..2e14, t in 0.0f64..400.0) {
        let r = silica();
        let (p, m) = (r.noise_at(w, t).unwrap(), r.noise_at(-w, t).unwrap());
        let c = r.chi(w).im;
        let n = if t == 0.0 { 0.0 } else { n_th(w, t).unwrap() };
        prop_assert!((0.5 * (p + m) - 0.18 * c * (2.0 * n + 1.0)).abs() < 1e-12 * (1.0 + p.abs()));
    }

    #[test]
    fn mode_table_text_round_trip(rows in proptest::collection::vec((1e12f64..3e14, 0.0f64..1e14, 0.0f64..1e14, 0.01f64..100.0), 1..8)) {
        let text: String = rows
            .iter()
            .map(|(a, b, c, d)| format!("{a:e} {b:e} {c:e} {d:e}\n"))
            .collect();
        let t = ModeTable::parse(&format!("# units: rad/s\n{text}")).unwrap();
        let want: Vec<RamanMode> = rows
            .iter()
            .map(|&(center, gaussian_fwhm, lorentzian_fwhm, amplitude)| RamanMode { center, gaussian_fwhm, lorentzian_fwhm, amplitude })
            .collect();
        prop_assert_eq!(t.modes, want);
    }
}

use std::f64::consts::PI;

use proptest::prelude::*;
use rabi_core::numerics::{integrate_1d, QuadratureConfig};
use rabi_core::pulse::{PulseShape, GAUSSIAN_HALF_SUPPORT, GAUSSIAN_WIDTH_PER_SIGMA};
use rabi_core::{ShortPulseModel, SystemParams};

fn any_pulse() -> impl Strategy<Value = PulseShape> {
    let square = (0.0..8.0 * PI, 0.01..10.0f64).prop_map(|(a, w)| PulseShape::square(a, w).unwrap());
    let gaussian = (0.0..8.0 * PI, 0.01..10.0f64).prop_map(|(a, w)| PulseShape::gaussian(a, w).unwrap());
    let tabulated = (prop::collection::vec((0.01..1.0f64, 0.0..5.0f64), 2..12), 0.1..4.0 * PI).prop_map(|(steps, a)| {
        let mut t = 0.0;
        let samples: Vec<(f64, f64)> = steps
            .iter()
            .map(|&(dt, w)| {
                t += dt;
                (t, w + 0.1)
            })
            .collect();
        PulseShape::tabulated(&samples, Some(a)).unwrap()
    });
    prop_oneof![square, gaussian, tabulated]
}

proptest! {
    #[test]
    fn area_is_monotone(p in any_pulse(), u in 0.0..1.0f64, v in 0.0..1.0f64) {
        let (lo, hi) = if u <= v { (u, v) } else { (v, u) };
        let end = p.support_end() * 1.1;
        prop_assert!(p.cumulative_area(hi * end) >= p.cumulative_area(lo * end));
    }

    #[test]
    fn inverse_round_trip(p in any_pulse(), frac in 0.001..0.999f64) {
        prop_assume!(p.total_area() > 0.0);
        let a = frac * p.total_area();
        let t = p.inverse_area(a).unwrap();
        prop_assert!((p.cumulative_area(t) - a).abs() <= 1e-8 * p.total_area());
    }

    #[test]
    fn doubling_area_doubles_a_of_t(area in 0.1..6.0 * PI, width in 0.01..10.0f64, frac in 0.0..1.2f64) {
        for make in [PulseShape::square, PulseShape::gaussian] {
            let p = make(area, width).unwrap();
            let q = make(2.0 * area, width).unwrap();
            let t = frac * p.support_end();
            prop_assert!((q.cumulative_area(t) - 2.0 * p.cumulative_area(t)).abs() <= 1e-12 * area);
        }
    }
}

#[test]
fn area_derivative_matches_envelope() {
    let pulses = [
        PulseShape::gaussian(PI, 1.0).unwrap(),
        PulseShape::square(3.0, 2.0).unwrap(),
        PulseShape::tabulated(&[(0.0, 0.0), (0.5, 2.0), (1.5, 1.0), (2.0, 0.0)], None).unwrap(),
    ];
    for p in &pulses {
        let end = p.support_end();
        for k in 0..1000 {
            // Golden-ratio sequence keeps the points away from the knots.
            let t = end * (0.01 + 0.98 * ((k as f64 * 0.618_033_988_749_895) % 1.0));
            if p.breakpoints().iter().any(|b| (b - t).abs() < 1e-4 * end) {
                continue;
            }
            let h = 1e-6 * end;
            let slope = (p.cumulative_area(t + h) - p.cumulative_area(t - h)) / (2.0 * h);
            assert!((slope - p.envelope(t)).abs() < 1e-6 * (1.0 + p.envelope(t)), "t = {t}");
        }
    }
}

#[test]
fn gaussian_truncation_omits_1e_minus_9() {
    let p = PulseShape::gaussian(1.0, 1.0).unwrap();
    let sigma = 1.0 / GAUSSIAN_WIDTH_PER_SIGMA;
    assert!((p.support_end() - 2.0 * GAUSSIAN_HALF_SUPPORT * sigma).abs() < 1e-12);
    let untruncated = p.envelope(p.support_end() / 2.0) * sigma * (2.0 * PI).sqrt();
    assert!((1.0 - untruncated).abs() < 1.5e-9);
}

// The calibration constant makes the short-pulse two-photon probability of
// a Gaussian pi pulse 0.2188 gamma T. Independently of the library, that
// coefficient is K / c with K the unit-sigma integral below.
#[test]
fn gaussian_width_calibration() {
    let cfg = QuadratureConfig::with_rel_tol(1e-12);
    let k = integrate_1d(
        |u| {
            let a = PI * 0.5 * (1.0 + libm::erf(u / std::f64::consts::SQRT_2));
            (a / 2.0).sin().powi(2) * ((PI - a) / 2.0).sin().powi(2)
        },
        -12.0,
        12.0,
        &cfg,
    )
    .unwrap()
    .value;
    assert!((k / GAUSSIAN_WIDTH_PER_SIGMA - 0.2188).abs() < 0.2188 * 1e-3, "K / c = {}", k / GAUSSIAN_WIDTH_PER_SIGMA);
    assert!((GAUSSIAN_WIDTH_PER_SIGMA - 2.0 * 2f64.ln().sqrt()).abs() < 1e-15);

    let gamma_t = 1e-4;
    let p = PulseShape::gaussian(PI, 1.0).unwrap();
    let d = ShortPulseModel::new(&p, SystemParams::new(gamma_t).unwrap()).exclusive_pn(2).unwrap();
    let coeff = d.p(2) / gamma_t;
    assert!((coeff - 0.2188).abs() < 0.01 * 0.2188, "P2 / gammaT = {coeff}");
}

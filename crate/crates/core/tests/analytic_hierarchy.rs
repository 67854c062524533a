use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rabi_core::analytic::{closed_form_square, ideal_excited_prob, poisson_limit_fn};
use rabi_core::oracle::{master_equation_rho, OracleConfig};
use rabi_core::statistics::{expected_n, g2_zero_short_pulse};
use rabi_core::{PulseShape, QuadratureConfig, ShortPulseModel, SystemParams};

fn square(area: f64) -> PulseShape {
    PulseShape::square(area, 1.0).unwrap()
}

fn sys(gamma_t: f64) -> SystemParams {
    SystemParams::new(gamma_t).unwrap()
}

#[test]
fn ideal_rabi_values() {
    assert_abs_diff_eq!(ideal_excited_prob(PI), 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(ideal_excited_prob(2.0 * PI), 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(ideal_excited_prob(PI / 2.0), 0.5, epsilon = 1e-15);
}

#[test]
fn density_substitutions() {
    let g = 0.3;
    let p = square(PI);
    let m = ShortPulseModel::new(&p, sys(g));
    assert_abs_diff_eq!(m.density_fn(&[0.5]).unwrap(), g / 2.0 * (-g / 4.0f64).exp(), epsilon = 1e-15);
    assert_eq!(m.density_fn(&[1.2, 1.7]).unwrap(), 0.0);

    let p = square(2.0 * PI);
    let m = ShortPulseModel::new(&p, sys(g));
    let v = m.density_fn(&[0.5, 2.5]).unwrap();
    assert_abs_diff_eq!(v, g * g * (-g / 2.0f64).exp() * (-g * 1.5f64).exp(), epsilon = 1e-14);
}

#[test]
fn pi_pulse_closed_forms_at_point_one() {
    let e = (-0.05f64).exp();
    let m_p = square(PI);
    let m = ShortPulseModel::new(&m_p, sys(0.1));
    assert_abs_diff_eq!(m.inclusive_fn(1).unwrap().value, e * 1.05, epsilon = 1e-6);
    assert_abs_diff_eq!(m.inclusive_fn(2).unwrap().value, e * 0.1 / 8.0, epsilon = 1e-6);
    let d = m.exclusive_pn(2).unwrap();
    assert_abs_diff_eq!(d.p(1), e * (1.0 + 3.0 * 0.1 / 8.0), epsilon = 1e-6);
    let p2 = e * (0.1 / 8.0 + 0.01 * (3.0 / (4.0 * PI * PI) - 5.0 / 64.0));
    assert_abs_diff_eq!(d.p(2), p2, epsilon = 1e-6);
    assert_abs_diff_eq!(d.p(2), 0.011870, epsilon = 5e-7);
    assert_abs_diff_eq!(d.p(1), 0.98690, epsilon = 5e-6);
    let c = closed_form_square(PI, 0.1).unwrap();
    assert_abs_diff_eq!(c.p1 + 2.0 * c.p2, 1.01064, epsilon = 1e-5);
    assert_abs_diff_eq!(expected_n(&d), 1.01064, epsilon = 1e-5);
}

#[test]
fn two_pi_special_cases() {
    let c = closed_form_square(2.0 * PI, 0.5).unwrap();
    let e = (-0.25f64).exp();
    assert_abs_diff_eq!(c.p1, e * 0.5 / 8.0, epsilon = 1e-12);
    assert_abs_diff_eq!(c.p2, e * (3.0 * 0.5 / 8.0 - 3.0 * 0.25 / 64.0), epsilon = 1e-12);
    assert_abs_diff_eq!(c.p1, 0.04867, epsilon = 1e-5);
    assert_abs_diff_eq!(c.p2, 0.13690, epsilon = 1e-5);
    for gt in [0.01, 0.3, 2.0] {
        let c = closed_form_square(2.0 * PI, gt).unwrap();
        assert_abs_diff_eq!(c.f1, (-gt / 2.0f64).exp() * gt / 2.0, epsilon = 1e-14);
    }
    let z = closed_form_square(PI, 0.0).unwrap();
    assert_eq!((z.f1, z.f2, z.f3), (1.0, 0.0, 0.0));
}

#[test]
fn zero_area_emits_nothing() {
    let p = square(0.0);
    let m = ShortPulseModel::new(&p, sys(0.5));
    for n in 1..=4 {
        assert_eq!(m.inclusive_fn(n).unwrap().value, 0.0);
    }
}

#[test]
fn quadrature_matches_closed_forms_on_grid() {
    for area in [PI / 2.0, PI, 2.0 * PI, 3.0 * PI, 4.0 * PI] {
        let p = square(area);
        for gt in [1e-3, 1e-2, 1e-1, 1.0] {
            let m = ShortPulseModel::new(&p, sys(gt));
            let c = closed_form_square(area, gt).unwrap();
            for (n, want) in [(1, c.f1), (2, c.f2), (3, c.f3)] {
                let got = m.inclusive_fn(n).unwrap().value;
                assert!((got - want).abs() < 1e-6, "A = {area}, gT = {gt}, F{n}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn even_pi_pulses_prefer_two_photons() {
    for area in [2.0 * PI, 4.0 * PI] {
        let p = square(area);
        let d = ShortPulseModel::new(&p, sys(1e-3)).exclusive_pn(3).unwrap();
        assert!(d.p(2) > d.p(1), "A = {area}");
    }
    let p = square(2.0 * PI);
    let d = ShortPulseModel::new(&p, sys(1e-3)).exclusive_pn(2).unwrap();
    assert!((d.p(2) / d.p(1) - 3.0).abs() < 0.01);
}

#[test]
fn poisson_formula() {
    assert_abs_diff_eq!(poisson_limit_fn(2.0, 1).unwrap(), 0.36788, epsilon = 1e-5);
    assert_eq!(poisson_limit_fn(0.0, 1).unwrap(), 1.0);
    assert_abs_diff_eq!(poisson_limit_fn(2.0, 3).unwrap(), (-1.0f64).exp() / 2.0, epsilon = 1e-15);
}

#[test]
fn marginal_closed_form_limits() {
    let p = square(2.0 * PI);
    let m = ShortPulseModel::new(&p, sys(1e-3));
    let quarter = m.marginal_p1(0.25).unwrap();
    assert_abs_diff_eq!(quarter.short_pulse, 1e-3 / 4.0, epsilon = 1e-15);
    assert!((quarter.value.value / quarter.short_pulse - 1.0).abs() < 2e-3);

    let p2 = m.marginal_p2(0.5).unwrap();
    assert!((p2.value.value / (1e-3 * (-5e-4f64).exp()) - 1.0).abs() < 2e-3);
    assert!(m.marginal_p2(0.0).unwrap().value.value.abs() < 1e-12);
    assert!(m.marginal_p2(1.0).unwrap().value.value.abs() < 1e-12);

    let p = square(PI);
    let m = ShortPulseModel::new(&p, sys(1e-3));
    assert_abs_diff_eq!(m.marginal_p1(1.0).unwrap().short_pulse, 1e-3, epsilon = 1e-15);
}

#[test]
fn joint_two_photon_density() {
    let p = square(PI);
    let m = ShortPulseModel::new(&p, sys(0.01));
    assert_eq!(m.density_p2_joint(1.5, 2.0).unwrap(), 0.0);
    let a = m.density_p2_joint(0.4, 1.5).unwrap();
    let b = m.density_p2_joint(0.4, 2.5).unwrap();
    assert!((b / a - (-0.01f64).exp()).abs() < 1e-12);

    // 2pi pulse: the first emission of a pair most likely happens once pi
    // of the area has been absorbed.
    let p = square(2.0 * PI);
    let m = ShortPulseModel::new(&p, sys(0.01));
    let best = (1..200)
        .map(|i| i as f64 / 200.0)
        .max_by(|&x, &y| {
            let fx = m.density_p2_joint(x, 1.2).unwrap();
            let fy = m.density_p2_joint(y, 1.2).unwrap();
            fx.total_cmp(&fy)
        })
        .unwrap();
    assert!((p.cumulative_area(best) - PI).abs() < 0.05 * PI);
}

#[test]
fn three_photon_density() {
    let g = 0.01;
    let p = square(PI);
    let m = ShortPulseModel::new(&p, sys(g));
    let v = m.density_p3(1.0 / 3.0, 2.0 / 3.0, 2.0).unwrap();
    assert_abs_diff_eq!(v, g * g * g / 64.0 * (-g * 2.0f64).exp(), epsilon = 1e-18);
    assert!(m.density_p3(0.5, 0.4, 2.0).is_err());
    assert_eq!(m.density_p3_sym(2.0, 2.0 / 3.0, 1.0 / 3.0), v / 6.0);

    let p3 = square(3.0 * PI);
    let m3 = ShortPulseModel::new(&p3, sys(g));
    let v = m3.density_p3(1.0 / 3.0, 2.0 / 3.0, 2.0).unwrap();
    assert_abs_diff_eq!(v, g * g * g * (-g * 2.0f64).exp(), epsilon = 1e-18);

    // Three-photon weight of pi versus 3pi pulses; also the symmetrized
    // marginal integrates back to the total.
    let r = m.p3_total().unwrap().value / m3.p3_total().unwrap().value;
    assert!(r > 1e-3 && r < 5e-2, "P3(pi)/P3(3pi) = {r}");
    let first: f64 = (0..400).map(|i| m3.p3_first_marginal((i as f64 + 0.5) / 400.0).unwrap().value / 400.0).sum();
    assert!((first / m3.p3_total().unwrap().value - 1.0).abs() < 1e-3);
}

#[test]
fn two_pi_periodicity_in_short_pulse_limit() {
    let gt = 1e-4;
    for base in [PI, 2.0 * PI] {
        let p = square(base);
        let q = square(base + 2.0 * PI);
        let mp = ShortPulseModel::new(&p, sys(gt));
        let mq = ShortPulseModel::new(&q, sys(gt));
        for i in 1..20 {
            let a = base * i as f64 / 20.0;
            let (tp, tq) = (p.inverse_area(a).unwrap(), q.inverse_area(a).unwrap());
            for (x, y) in [
                (mp.marginal_p1(tp).unwrap().value.value, mq.marginal_p1(tq).unwrap().value.value),
                (mp.marginal_p2(tp).unwrap().value.value, mq.marginal_p2(tq).unwrap().value.value),
            ] {
                // Relative near the maxima, absolute (in units of gamma)
                // close to the zeros of the densities.
                let scale = x.abs().max(y.abs()).max(1e-2 * gt);
                assert!((x - y).abs() <= 1e-3 * scale, "A = {a}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn flux_identity_for_short_pi_pulse() {
    let gt = 1e-2;
    let p = square(PI);
    let s = sys(gt);
    let m = ShortPulseModel::new(&p, s);
    let cfg = OracleConfig::default();
    for t in [0.3, 0.6, 0.9, 1.5, 5.0, 60.0] {
        let flux = m.emission_flux(t).unwrap().value;
        let rate = gt * master_equation_rho(&p, s, t, &cfg).unwrap().ee;
        assert!((flux / rate - 1.0).abs() < 0.05, "t = {t}: {flux} vs {rate}");
    }
}

#[test]
fn short_pulse_g2_example() {
    let c = closed_form_square(PI, 0.01).unwrap();
    let g2 = g2_zero_short_pulse(c.p1, c.p2).unwrap();
    assert_abs_diff_eq!(g2, 0.00249, epsilon = 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn inclusive_probabilities_nest(area in 0.1..4.5 * PI, gt_exp in -3.0..0.0f64, gaussian in any::<bool>()) {
        let gt = 10f64.powf(gt_exp);
        let p = if gaussian { PulseShape::gaussian(area, 1.0).unwrap() } else { square(area) };
        let d = ShortPulseModel::new(&p, sys(gt))
            .with_quadrature(QuadratureConfig::with_rel_tol(1e-6))
            .exclusive_pn(3)
            .unwrap();
        let eps = d.tolerance();
        let f: Vec<f64> = (1..=4).map(|n| d.f(n)).collect();
        prop_assert!(f[0] <= 1.0 + eps);
        for w in f.windows(2) {
            prop_assert!(w[0] >= w[1] - eps, "{:?}", f);
        }
        prop_assert!(f[3] >= -eps);
        let total = d.resolved_mass();
        prop_assert!(total + d.truncation_bound() >= 1.0 - eps && total <= 1.0 + eps);
    }
}

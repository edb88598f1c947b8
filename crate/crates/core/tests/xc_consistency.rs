mod common;

use std::f64::consts::PI;

use common::fd::{check_partials, derivative, log_uniform, N_POINTS};
use eks_core::hypothesis::{check_gga, ConditionId, SampleSpec};
use eks_core::radial::{radial_derivative, GridSpec};
use eks_core::xc::{kappa_from_gradient, reduced_variables, Functional, GgaFunctional, LdaFunctional, FUNCTIONAL_IDS};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[test]
fn partial_derivatives_match_finite_differences() {
    for c in check_partials(0x5eed) {
        println!("{}: {} points checked, {} redrawn as undecidable in double precision", c.id, c.checked, c.redrawn);
        assert!(
            c.failures.is_empty(),
            "{} mismatches, first: {:#?}",
            c.failures.len(),
            &c.failures[..c.failures.len().min(10)]
        );
        assert!(c.redrawn < 10 * N_POINTS, "{}: too many undecidable points ({})", c.id, c.redrawn);
    }
}

#[test]
fn functionals_vanish_at_zero_density() {
    for id in FUNCTIONAL_IDS {
        let f = Functional::from_id(id).unwrap().as_gga();
        for kappa in [0.0, 1e-6, 1.0, 1e4] {
            assert_eq!(f.eval_raw(0.0, kappa).h, 0.0, "{id}");
        }
    }
}

#[test]
fn dirac_derivative_scales_as_cube_root() {
    let l = LdaFunctional::dirac();
    let want = -(3.0 / PI).cbrt();
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..N_POINTS {
        let rho = log_uniform(&mut rng, 1e-8, 1e4);
        let got = l.eval_unchecked(rho).g_prime / rho.cbrt();
        assert!((got - want).abs() <= 1e-12 * want.abs(), "{rho}: {got}");
    }
}

#[test]
fn ellipticity_bounds_hold_at_random_points() {
    let spec = SampleSpec::default();
    let mut rng = StdRng::seed_from_u64(0xe11);
    for f in [GgaFunctional::pbe(), GgaFunctional::lda(LdaFunctional::dirac_pz81())] {
        let report = check_gga(&f, &spec).unwrap();
        if !report.verdict(ConditionId::Ellipticity).unwrap().is_pass() {
            continue;
        }
        let (a, b) = (report.fitted_a.unwrap(), report.fitted_b.unwrap());
        for _ in 0..10_000 {
            let rho = log_uniform(&mut rng, spec.rho_min, spec.rho_max);
            let kappa = if rng.gen_bool(0.01) { 0.0 } else { log_uniform(&mut rng, spec.kappa_min, spec.kappa_max) };
            let c = 1.0 + f.eval_raw(rho, kappa).dh_dkappa;
            assert!(
                c >= a - 1e-9 && c <= b + 1e-9,
                "{:?}: 1 + h_k = {c} outside [{a}, {b}] at ({rho:e}, {kappa:e})",
                f.kind
            );
        }
    }
}

#[test]
fn kappa_matches_gradient_of_sqrt_density() {
    let rho = |r: f64| (1.0 + r + r * r) * (-2.0 * r).exp() / PI;
    let d_rho = |r: f64| (1.0 + 2.0 * r - 2.0 * (1.0 + r + r * r)) * (-2.0 * r).exp() / PI;
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..N_POINTS {
        let r = log_uniform(&mut rng, 1e-3, 20.0);
        let k = kappa_from_gradient(rho(r), d_rho(r).powi(2)).unwrap().value;
        let d_sqrt = derivative(|x| rho(x).sqrt(), r, r.min(1.0)).value;
        let direct = 0.5 * d_sqrt * d_sqrt;
        assert!((k / direct - 1.0).abs() < 1e-6, "r = {r}: {k} vs {direct}");
    }
}

#[test]
fn kappa_of_an_exponential_on_the_grid() {
    // rho = e^{-2r}: kappa = e^{-2r} / 2, within grid differentiation error.
    let g = GridSpec::default().build().unwrap();
    let rho: Vec<f64> = g.r().iter().map(|&r| (-2.0 * r).exp()).collect();
    let d = radial_derivative(&g, &rho);
    for i in (100..3900).step_by(101) {
        let r = g.r()[i];
        let k = kappa_from_gradient(rho[i], d[i] * d[i]).unwrap().value;
        // Centered differences in ln r carry a relative error (2 r dt)^2 / 6 per derivative.
        let tol = 1e-8 + ((1.0 + 2.0 * r) * g.step()).powi(2) / 2.0;
        assert!((k / (0.5 * rho[i]) - 1.0).abs() < tol, "r = {r}");
    }
}

#[test]
fn reduced_gradient_independent_recomputation() {
    let mut rng = StdRng::seed_from_u64(42);
    for _ in 0..100 {
        let rho = log_uniform(&mut rng, 1e-6, 1e3);
        let grad = log_uniform(&mut rng, 1e-6, 1e3);
        let v = reduced_variables(rho, grad).unwrap();
        let kf = (3.0 * PI * PI * rho).cbrt();
        let s = grad / (2.0 * kf * rho);
        let ks = (4.0 * kf / PI).sqrt();
        let t = grad / (2.0 * ks * rho);
        let rs = (3.0 / (4.0 * PI * rho)).cbrt();
        assert!((v.s / s - 1.0).abs() < 1e-12);
        assert!((v.t / t - 1.0).abs() < 1e-12);
        assert!((v.rs / rs - 1.0).abs() < 1e-12);
    }
}

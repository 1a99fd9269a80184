//! Property tests of the discrete calculus, the discrete gradients and the
//! time step.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rdg_core::discrete_gradient::{discrete_gradient, energy_difference_residual};
use rdg_core::energy::{energy, variational_derivative};
use rdg_core::field::{cross, discrete_inner, dot, lincomb, scalar_inner};
use rdg_core::presets::random_unit_field;
use rdg_core::stepper::{dissipation, rdg_residual};
use rdg_core::{DirectorField, DiscreteGradientKind, ElasticParams, Grid, ScalarField, SolverConfig, SpectralPlan, Stepper};

fn plan() -> SpectralPlan {
    SpectralPlan::new(Grid::new([8, 6, 4], [6.0, 5.0, 4.0], [0.5, -1.0, 0.0]).unwrap())
}

fn noise_vector(grid: &Grid, seed: u64) -> DirectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..3 * grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    DirectorField::from_flat(*grid, data).unwrap()
}

fn noise_scalar(grid: &Grid, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ScalarField::from_values(*grid, (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn smooth_unit(plan: &SpectralPlan, seed: u64, amplitude: f64) -> DirectorField {
    random_unit_field(plan.grid(), 2, amplitude, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn moduli() -> impl Strategy<Value = ElasticParams> {
    (0.5..2.0f64, 0.5..2.0f64, 0.5..2.0f64).prop_map(|(a, b, c)| ElasticParams::new(a, b, c).unwrap())
}

fn kinds() -> impl Strategy<Value = DiscreteGradientKind> {
    prop_oneof![
        Just(DiscreteGradientKind::OseenFrank),
        Just(DiscreteGradientKind::Gonzalez { eps0: 0.0 }),
        Just(DiscreteGradientKind::MeanValue { gauss_points: 2 }),
        Just(DiscreteGradientKind::MeanValue { gauss_points: 4 }),
    ]
}

fn max_abs_diff(a: &DirectorField, b: &DirectorField) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn inner_product_is_symmetric_and_bilinear(s1: u64, s2: u64, s3: u64, a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let g = *plan().grid();
        let (u, v, w) = (noise_vector(&g, s1), noise_vector(&g, s2), noise_vector(&g, s3));
        let uv = discrete_inner(&u, &v).unwrap();
        prop_assert!((uv - discrete_inner(&v, &u).unwrap()).abs() <= 1e-14 * (1.0 + uv.abs()));
        let lhs = discrete_inner(&lincomb(a, &u, b, &v).unwrap(), &w).unwrap();
        let rhs = a * discrete_inner(&u, &w).unwrap() + b * discrete_inner(&v, &w).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        prop_assert!(discrete_inner(&u, &u).unwrap() >= 0.0);
    }

    #[test]
    fn triple_product_is_cyclic(s1: u64, s2: u64, s3: u64) {
        let g = *plan().grid();
        let (a, b, c) = (noise_vector(&g, s1), noise_vector(&g, s2), noise_vector(&g, s3));
        let abc = dot(&a, &cross(&b, &c).unwrap()).unwrap();
        let bca = dot(&b, &cross(&c, &a).unwrap()).unwrap();
        let cab = dot(&c, &cross(&a, &b).unwrap()).unwrap();
        for i in 0..g.len() {
            prop_assert!((abc.values()[i] - bca.values()[i]).abs() < 1e-14);
            prop_assert!((abc.values()[i] - cab.values()[i]).abs() < 1e-14);
        }
        let aa = dot(&a, &cross(&a, &b).unwrap()).unwrap();
        prop_assert!(aa.max_abs() < 1e-15);
    }

    #[test]
    fn div_curl_and_curl_grad_vanish(s1: u64, s2: u64) {
        let p = plan();
        let u = noise_vector(p.grid(), s1);
        let s = noise_scalar(p.grid(), s2);
        let scale = 10.0;
        prop_assert!(p.divergence(&p.curl(&u).unwrap()).unwrap().max_abs() < 1e-12 * scale);
        prop_assert!(p.curl(&p.grad(&s).unwrap()).unwrap().max_abs() < 1e-12 * scale);
    }

    #[test]
    fn curl_is_self_adjoint_and_grad_is_minus_div_adjoint(s1: u64, s2: u64, s3: u64) {
        let p = plan();
        let (u, v) = (noise_vector(p.grid(), s1), noise_vector(p.grid(), s2));
        let s = noise_scalar(p.grid(), s3);
        let lhs = discrete_inner(&p.curl(&u).unwrap(), &v).unwrap();
        let rhs = discrete_inner(&u, &p.curl(&v).unwrap()).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-11 * (1.0 + lhs.abs()));
        let gs = discrete_inner(&p.grad(&s).unwrap(), &v).unwrap();
        let sd = scalar_inner(&s, &p.divergence(&v).unwrap()).unwrap();
        prop_assert!((gs + sd).abs() < 1e-11 * (1.0 + gs.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn variational_derivative_matches_finite_differences(s1: u64, s2: u64, p in moduli()) {
        let plan = plan();
        let n = smooth_unit(&plan, s1, 0.8);
        let v = noise_vector(plan.grid(), s2);
        let eps = 1e-5;
        let fp = energy(&plan, &lincomb(1.0, &n, eps, &v).unwrap(), &p).unwrap().total;
        let fm = energy(&plan, &lincomb(1.0, &n, -eps, &v).unwrap(), &p).unwrap().total;
        let fd = (fp - fm) / (2.0 * eps);
        let exact = discrete_inner(&variational_derivative(&plan, &n, &p).unwrap(), &v).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()), "fd {fd} exact {exact}");
    }

    #[test]
    fn discrete_gradient_identity(s1: u64, s2: u64, p in moduli(), kind in kinds()) {
        let plan = plan();
        let a = smooth_unit(&plan, s1, 1.0);
        let b = smooth_unit(&plan, s2, 1.0);
        prop_assert!(energy_difference_residual(&plan, kind, &a, &b, &p).unwrap() < 1e-11);
    }

    #[test]
    fn discrete_gradient_is_symmetric_and_consistent(s1: u64, s2: u64, p in moduli(), kind in kinds()) {
        let plan = plan();
        let a = smooth_unit(&plan, s1, 1.0);
        let b = smooth_unit(&plan, s2, 1.0);
        let ab = discrete_gradient(&plan, kind, &a, &b, &p).unwrap();
        let ba = discrete_gradient(&plan, kind, &b, &a, &p).unwrap();
        prop_assert!(max_abs_diff(&ab, &ba) <= 1e-11 * (1.0 + ab.max_abs()));
        let kind = match kind {
            DiscreteGradientKind::Gonzalez { .. } => DiscreteGradientKind::gonzalez_for(plan.grid()),
            k => k,
        };
        let aa = discrete_gradient(&plan, kind, &a, &a, &p).unwrap();
        let g = variational_derivative(&plan, &a, &p).unwrap();
        prop_assert!(max_abs_diff(&aa, &g) <= 1e-11 * (1.0 + g.max_abs()));
    }

    #[test]
    fn oseen_frank_gradient_is_second_order(s1: u64, s2: u64, p in moduli()) {
        let plan = plan();
        let n = smooth_unit(&plan, s1, 0.8);
        let v = smooth_unit(&plan, s2, 0.8);
        let g = variational_derivative(&plan, &n, &p).unwrap();
        let err = |h: f64| {
            let d = discrete_gradient(
                &plan,
                DiscreteGradientKind::OseenFrank,
                &lincomb(1.0, &n, -h, &v).unwrap(),
                &lincomb(1.0, &n, h, &v).unwrap(),
                &p,
            )
            .unwrap();
            lincomb(1.0, &d, -1.0, &g).unwrap().rms()
        };
        let ratio = err(1e-2) / err(5e-3);
        prop_assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn rotational_term_is_tangent(s1: u64, s2: u64, p in moduli(), kind in kinds(), tau in 1e-4..1e-1f64) {
        let plan = plan();
        let nm = smooth_unit(&plan, s1, 1.0);
        let c = smooth_unit(&plan, s2, 1.0);
        let r = rdg_residual(&plan, &nm, &c, tau, kind, &p, None).unwrap();
        let rot = lincomb(1.0, &r, -1.0 / tau, &lincomb(1.0, &c, -1.0, &nm).unwrap()).unwrap();
        let nh = lincomb(0.5, &nm, 0.5, &c).unwrap();
        let tangency = dot(&rot, &nh).unwrap().max_abs();
        prop_assert!(tangency <= 1e-12 * (1.0 + rot.max_abs()), "tangency {tangency}");
    }

    #[test]
    fn step_preserves_length_and_dissipates(s1: u64, p in moduli(), kind in kinds()) {
        let plan = plan();
        let nm = smooth_unit(&plan, s1, 0.5);
        let tau = 1e-3;
        let stepper = Stepper::new(&plan, p, kind, SolverConfig::default()).unwrap();
        let (np1, rec) = stepper.step(&nm, 0.0, tau, None).unwrap();
        let lm = nm.lengths();
        let lp = np1.lengths();
        let drift = lm.values().iter().zip(lp.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(drift < 1e-9, "length drift {drift}");
        let f0 = energy(&plan, &nm, &p).unwrap().total;
        let diss = dissipation(&plan, &nm, &np1, tau, kind, &p).unwrap();
        prop_assert!(diss >= 0.0);
        prop_assert!(rec.energy.total <= f0);
        prop_assert!(((f0 - rec.energy.total) - diss).abs() <= 1e-7 * (1.0 + f0), "drop {} diss {diss}", f0 - rec.energy.total);
    }
}

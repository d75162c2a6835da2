//! Bell Wigner functions against four-dimensional quadrature, with
//! particles that do not share q or lambda.

use std::f64::consts::PI;

use proptest::prelude::*;
use qwigner::bell::{BellEvaluator, BellWavefunction};
use qwigner::cli::verify::bell_total;
use qwigner::oracle::{wigner_numeric_2p_momenta, QuadratureSettings};
use qwigner::{BellSpec, BellVariant, DeformationParams, PhasePoint4};

fn oracle_error(spec: &BellSpec, positions: &[(f64, f64)], momenta: &[(f64, f64)]) -> f64 {
    let closed = BellEvaluator::new(spec).unwrap();
    let psi = BellWavefunction::new(spec).unwrap();
    let (pa, pb) = (spec.params_a, spec.params_b);
    // one node set serves both particles: widest window, fastest oscillation
    let lambda = pa.lambda().min(pb.lambda());
    let top = spec.n.max(spec.m) as f64;
    let fastest = momenta.iter().fold(0.0f64, |r, &(a, b)| r.max(a.abs()).max(b.abs())) / spec.hbar()
        + 2.0 * top * (pa.lambda() * pa.h()).max(pb.lambda() * pb.h());
    let settings = QuadratureSettings::for_lambda(lambda)
        .with_points_per_unit(16)
        .with_oscillation_guard(fastest);
    let mut worst = 0.0f64;
    for &(x_a, x_b) in positions {
        let numeric =
            wigner_numeric_2p_momenta(|a, b| psi.eval(a, b), (x_a, x_b), momenta, spec.hbar(), &settings).unwrap();
        for (&(p_a, p_b), w) in momenta.iter().zip(numeric) {
            assert!(w.im.abs() < 1e-9, "imaginary part {}", w.im);
            let exact = closed.evaluate(&PhasePoint4::new(x_a, p_a, x_b, p_b)).unwrap();
            worst = worst.max((exact - w.re).abs());
        }
    }
    worst
}

fn lattice(values_a: &[f64], values_b: &[f64]) -> Vec<(f64, f64)> {
    values_a.iter().flat_map(|&a| values_b.iter().map(move |&b| (a, b))).collect()
}

#[test]
fn different_deformations_per_particle() {
    let pa = DeformationParams::unit(0.5).unwrap();
    let pb = DeformationParams::unit(0.8).unwrap();
    let (sa, sb) = (pa.momentum_shift(), pb.momentum_shift());
    let positions = lattice(&[-0.6, 0.0, 0.5], &[-0.3, 0.45]);
    let momenta = lattice(&[-2.0 * sa, -sa, 0.3 * sa], &[-1.5 * sb, -0.2 * sb, 0.6 * sb]);
    for variant in BellVariant::ALL {
        let spec = BellSpec::new(variant, 0, 2, pa, pb).unwrap();
        let err = oracle_error(&spec, &positions, &momenta);
        assert!(err < 1e-6, "{variant}: {err}");
    }
}

#[test]
fn different_lambda_per_particle() {
    // same hbar, different mass and frequency
    let pa = DeformationParams::new(1.0, 1.0, 1.0, 0.6).unwrap();
    let pb = DeformationParams::new(2.0, 0.75, 1.0, 0.4).unwrap();
    let (sa, sb) = (pa.momentum_shift(), pb.momentum_shift());
    let positions = lattice(&[-0.4, 0.3], &[0.0, 0.35]);
    let momenta = lattice(&[-sa, -0.5 * sa, 0.2 * sa], &[-sb, -0.4 * sb, 0.5 * sb]);
    for variant in [BellVariant::PsiMinus, BellVariant::PhiPlus] {
        let spec = BellSpec::new(variant, 1, 0, pa, pb).unwrap();
        let err = oracle_error(&spec, &positions, &momenta);
        assert!(err < 1e-6, "{variant}: {err}");
    }
}

#[test]
fn mismatched_hbar_is_rejected() {
    let pa = DeformationParams::new(1.0, 1.0, 1.0, 0.5).unwrap();
    let pb = DeformationParams::new(1.0, 1.0, 2.0, 0.5).unwrap();
    assert!(BellSpec::new(BellVariant::PsiPlus, 0, 1, pa, pb).is_err());
}

#[test]
fn equal_levels_are_rejected() {
    let p = DeformationParams::unit(0.5).unwrap();
    assert!(BellSpec::new(BellVariant::PhiMinus, 2, 2, p, p).is_err());
}

#[test]
fn mixed_deformations_normalize() {
    let pa = DeformationParams::unit(0.5).unwrap();
    let pb = DeformationParams::unit(0.8).unwrap();
    let spec = BellSpec::new(BellVariant::PhiMinus, 0, 1, pa, pb).unwrap();
    let total = bell_total(&spec, 0.3).unwrap();
    assert!((total - 1.0).abs() < 1e-6, "{total}");
}

fn spec_strategy() -> impl Strategy<Value = BellSpec> {
    (0usize..4, 0usize..4, 0.01f64..0.9, 0.01f64..0.9, 0usize..4)
        .prop_filter("levels differ", |(n, m, ..)| n != m)
        .prop_map(|(n, m, qa, qb, v)| {
            let pa = DeformationParams::unit(qa).unwrap();
            let pb = DeformationParams::unit(qb).unwrap();
            BellSpec::new(BellVariant::ALL[v], n, m, pa, pb).unwrap()
        })
}

fn point_strategy() -> impl Strategy<Value = PhasePoint4> {
    (-1.5f64..1.5, -6.0f64..1.0, -1.5f64..1.5, -6.0f64..1.0)
        .prop_map(|(xa, pa, xb, pb)| PhasePoint4::new(xa, pa, xb, pb))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn exchange_symmetry(q in 0.01f64..0.9, n in 0usize..4, m in 0usize..4, v in 0usize..4, pt in point_strategy()) {
        prop_assume!(n != m);
        let params = DeformationParams::unit(q).unwrap();
        let spec = BellSpec::new(BellVariant::ALL[v], n, m, params, params).unwrap();
        let w = BellEvaluator::new(&spec).unwrap();
        let (a, b) = (w.evaluate(&pt).unwrap(), w.evaluate(&pt.swapped()).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn negation_identity(spec in spec_strategy(), pt in point_strategy()) {
        let plus = spec.with_variant(spec.variant.with_sign(true));
        let minus = spec.with_variant(spec.variant.with_sign(false));
        let tp = BellEvaluator::new(&plus).unwrap().terms(&pt).unwrap();
        let tm = BellEvaluator::new(&minus).unwrap().terms(&pt).unwrap();
        let scale = 1.0 + tp.value().abs().max(tm.value().abs());
        prop_assert!((tp.value() - tm.value() - 2.0 * tp.interference()).abs() <= 1e-12 * scale);
        prop_assert!((tp.value() + tm.value() - 2.0 * tp.direct()).abs() <= 1e-12 * scale);
        prop_assert!((tp.interference() - tm.interference()).abs() <= 1e-15 * scale);
    }

    #[test]
    fn bounded_by_one_over_pi_hbar_squared(spec in spec_strategy(), pt in point_strategy()) {
        let value = BellEvaluator::new(&spec).unwrap().evaluate(&pt).unwrap();
        prop_assert!(value.abs() <= 1.0 / (PI * PI) + 1e-9, "{value}");
    }
}

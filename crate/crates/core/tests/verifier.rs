//! Branch bookkeeping of the key formula: conjugate halves and the Y-ratio routes.

use rpi_core::hypergeom::gauss_2f1;
use rpi_core::numerics::{const_pi, PrecisionContext};
use rpi_core::registry::CaseRegistry;
use rpi_core::series::series_value;
use rpi_core::verifier::cmdata::{z_params, CMData};
use rpi_core::verifier::rhs_terms;
use rug::{Complex, Float, Rational};

const IDS: [&str; 8] = ["cp1", "cp2", "cp4", "p1", "p2", "p6", "cw2", "cw5"];

fn ctx() -> PrecisionContext {
    PrecisionContext::new(60).unwrap()
}

fn dist(a: &Complex, b: &Complex) -> Float {
    Float::with_val(a.prec().0, Complex::with_val(a.prec().0, a - b).abs_ref())
}

#[test]
fn halves_are_conjugate_for_conjugate_arguments() {
    let ctx = ctx();
    let p = ctx.prec();
    let reg = CaseRegistry::shipped();
    let mut seen = 0;
    for case in reg.cases.iter().filter(|c| !c.family.evidence_only()) {
        let id = &case.id;
        let cm = CMData::build(case.family, &case.t, &case.x, &ctx).unwrap();
        let (a, b) = (&cm.branches[0].arg, &cm.branches[1].arg);
        if a.imag().is_zero() || dist(a, &Complex::with_val(p, b.conj_ref())) > ctx.tol(20) {
            continue;
        }
        seen += 1;
        let h = rhs_terms(&cm, &ctx).halves;
        let d = dist(&h[0], &Complex::with_val(p, h[1].conj_ref()));
        assert!(d < ctx.ten_pow(-40), "{id}: {d}");
    }
    // only cp1 has 0 < x < 4, the other rows have real arguments
    assert_eq!(seen, 1);
}

#[test]
fn z_ratio_matches_hypergeometric_route() {
    let ctx = ctx();
    let p = ctx.prec();
    let reg = CaseRegistry::shipped();
    for id in IDS {
        let case = reg.get(id).unwrap();
        let cm = CMData::build(case.family, &case.t, &case.x, &ctx).unwrap();
        let [b0, b1] = &cm.branches;
        let (a, b) = z_params(case.family);
        let f0 = gauss_2f1(&a, &b, &Rational::from(1), &b0.arg, &ctx).unwrap();
        let f1 = gauss_2f1(&a, &b, &Rational::from(1), &b1.arg, &ctx).unwrap();
        let hyper = Complex::with_val(p, &f1 / &f0);
        let modular = Complex::with_val(p, &b1.z / &b0.z);
        // Y-route ratio equals the 2F1 ratio up to sign
        let near = dist(&modular, &hyper).min(&dist(&modular, &Complex::with_val(p, -&hyper)));
        let scale = Float::with_val(p, hyper.abs_ref()).max(&Float::with_val(p, 1));
        if b0.principal_route_agrees(&ctx) && b1.principal_route_agrees(&ctx) {
            assert!(near < ctx.tol(20) * &scale, "{id}: {modular} vs {hyper}");
            let sq = Complex::with_val(p, modular.square_ref());
            let y = Complex::with_val(p, b1.y(&ctx) / b0.y(&ctx));
            assert!(dist(&sq, &y) < ctx.tol(20) * scale, "{id}");
        }
    }
}

#[test]
fn chosen_sign_is_the_only_one_that_closes() {
    // flipping Z-/Z+ flips both halves, so the key value changes sign and no longer matches the series
    let ctx = ctx();
    let p = ctx.prec();
    let reg = CaseRegistry::shipped();
    for id in ["cp1", "p2", "cw5"] {
        let case = reg.get(id).unwrap();
        let cm = CMData::build(case.family, &case.t, &case.x, &ctx).unwrap();
        let lhs = series_value(case.family, &case.t, &case.x, &case.b, &ctx).unwrap();
        let key = rhs_terms(&cm, &ctx).value;
        let good = dist(&key, &Complex::with_val(p, &lhs));
        let bad = dist(&Complex::with_val(p, -&key), &Complex::with_val(p, &lhs));
        assert!(good < ctx.ten_pow(-40), "{id}: {good}");
        assert!(bad > Float::with_val(p, 1) / const_pi(&ctx) / 10u32, "{id}: {bad}");
    }
}

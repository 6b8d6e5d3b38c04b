//! Exact B and Y-ratio evaluations against every level-2 table row.

use rpi_core::algebra::QuadSurd;
use rpi_core::cm::{CMPoint, QuadraticForm};
use rpi_core::hecke::{evaluate_b_rigorous, fixing_matrices, relating_matrix, y_ratio_rigorous, Certification};
use rpi_core::modular::{quasi_b, CurveTag};
use rpi_core::numerics::PrecisionContext;
use rpi_core::registry::CaseRegistry;
use rpi_core::series::SeriesFamily;
use rpi_core::verifier::tables::parse_cell;
use rug::{Float, Integer, Rational};

/// Primitive-or-not form [a,b,c] whose upper root is the printed tau, smallest a.
fn form_of(cell: &str) -> QuadraticForm {
    let z = parse_cell(cell).unwrap();
    let re = z.re.as_rational().unwrap();
    let (k, im) = z.im.terms().next().map(|(k, c)| (*k, c.clone())).unwrap();
    for a in 1..200i64 {
        let b = Rational::from(&re * (-2 * a));
        let dd = Rational::from(&im * (2 * a)).square() * Rational::from(k);
        if *b.denom() != 1 || *dd.denom() != 1 {
            continue;
        }
        let (b, dd) = (b.numer().clone(), dd.numer().clone());
        let num = Integer::from(&b * &b) + &dd;
        if num.is_divisible(&Integer::from(4 * a)) {
            let c = num / (4 * a);
            return QuadraticForm::new(a, b.to_i64().unwrap(), c.to_i64().unwrap(), 1).unwrap();
        }
    }
    panic!("no form for {cell}");
}

fn quad(cell: &str) -> QuadSurd {
    QuadSurd::from_complex_surd(&parse_cell(cell).unwrap()).unwrap()
}

#[test]
fn y_ratio_for_every_level2_row() {
    let ctx = PrecisionContext::new(60).unwrap();
    let reg = CaseRegistry::shipped();
    let mut polynomial = 0;
    for case in reg.cases.iter().filter(|c| c.family == SeriesFamily::P) {
        let Some(row) = &case.expected_row else { continue };
        let plus = CMPoint::from_form(form_of(&row.tau[0]), &ctx);
        let minus = CMPoint::from_form(form_of(&row.tau[1]), &ctx);
        let g = relating_matrix(&minus.form, &plus.form).unwrap();
        let e = y_ratio_rigorous(&minus, &plus, &g, &ctx).unwrap_or_else(|err| panic!("{}: {err}", case.id));
        assert_eq!(e.ratio, quad(&row.yratio[0]), "{} with {}", case.id, g);
        if e.certification == Certification::Polynomial {
            polynomial += 1;
        }
    }
    // cp1, cp4-cp9, p3, p4 are related by the determinant-2 Fricke matrix
    assert_eq!(polynomial, 9);
}

#[test]
fn b_at_every_point_with_a_determinant_two_fixer() {
    let ctx = PrecisionContext::new(60).unwrap();
    let reg = CaseRegistry::shipped();
    let mut hits = 0;
    for case in reg.cases.iter().filter(|c| c.family == SeriesFamily::P) {
        let Some(row) = &case.expected_row else { continue };
        for j in 0..2 {
            let pt = CMPoint::from_form(form_of(&row.tau[j]), &ctx);
            let Some(g) = fixing_matrices(&pt.form, 2).into_iter().find(|g| g.det() == 2) else { continue };
            let e = evaluate_b_rigorous(&pt, &g, &ctx).unwrap();
            assert_eq!(e.b, quad(&row.b[j]), "{} column {j}", case.id);
            let num = quasi_b(CurveTag::X0_2, &pt.tau, &ctx).unwrap();
            let diff = Float::with_val(ctx.prec(), (e.b.eval(&ctx) - num).abs().real());
            assert!(diff < ctx.tol(10), "{}: {diff}", case.id);
            hits += 1;
        }
    }
    assert_eq!(hits, 2);
}

mod common;

use common::close;
use fenchel_lab::calculus::{exact_sum_rule_check, CheckParams, SumContext};
use fenchel_lab::funcrep::{AffinePiece, ConvexPolyhedralFunction, PiecewiseMinFunction};
use fenchel_lab::Polyhedron;

fn corner_pair() -> (ConvexPolyhedralFunction, ConvexPolyhedralFunction) {
    let f = ConvexPolyhedralFunction::new(
        vec![AffinePiece::new(vec![-0.3818330560236096, 0.7778835829239243], 0.30548132086993585)],
        Polyhedron::from_box(&[1.5, -2.75], &[2.25, 3.0]),
    )
    .unwrap();
    let g = ConvexPolyhedralFunction::new(
        vec![AffinePiece::new(vec![-0.13905928707602833, -0.5455617448485324], -0.19200749848019472)],
        Polyhedron::from_box(&[-0.125, -0.875], &[2.125, 1.875]),
    )
    .unwrap();
    (f, g)
}

// At this corner f(x) + g(x) + (f+g)*(x) rounds to about -1e-16; the
// exact subdifferential must still come out nonempty.
#[test]
fn exact_subdifferential_survives_rounding_at_a_corner() {
    let (f, g) = corner_pair();
    let x = [1.5, 1.875];
    let ctx = SumContext::new(
        &PiecewiseMinFunction::new(vec![f.clone()]).unwrap(),
        &PiecewiseMinFunction::new(vec![g.clone()]).unwrap(),
    )
    .unwrap();
    let (fx, gx) = ctx.values_at(&x).unwrap().unwrap();
    let lhs = ctx.lhs(&x, fx, gx, 0.0);
    assert!(!lhs.is_empty());
    // gradient sum plus the cone spanned by (-1, 0) and (0, 1)
    let grad = [-0.3818330560236096 - 0.13905928707602833, 0.7778835829239243 - 0.5455617448485324];
    assert!(close(lhs.support(&[1.0, 0.0]).value(), grad[0], 1e-12));
    assert!(close(lhs.support(&[0.0, -1.0]).value(), -grad[1], 1e-12));
    assert!(lhs.support(&[0.0, 1.0]).is_pos_inf());

    let params = CheckParams { tolerance: 1e-7, ..CheckParams::default() };
    for eps in [0.0, 0.1, 1.0] {
        let s = exact_sum_rule_check(&f, &g, &x, eps, &params).unwrap();
        assert!(s.holds && s.residual < 1e-9, "eps {eps}: {s:?}");
    }
}

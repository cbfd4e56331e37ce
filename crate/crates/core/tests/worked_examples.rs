use dyadic_gk::density::{
    alpha_at, alpha_beta, binary_beta, binary_profile, formula_beta, formula_beta_of, count_lifted, count_naive,
    ramified_pair_report, ortho_group_order, rational_string, theorem_check, Eps, VerdictKind,
};
use dyadic_gk::gk::{
    delta, egk, egk_trunc, egk_trunc_closed, gk, gk_binary_closed, gk_double, gk_double_sigma, gk_odd_p,
    is_reduced, max_s, recover_profile, BinaryKind, BinaryParams, EGKDatum, Involution,
};
use dyadic_gk::lattice::{jordan_split, residual_space, Arf, HalfIntMat, Mat, Parity, Subtype};
use dyadic_gk::ring::{Coeff, Defect};
use dyadic_gk::{Ring, RingSpec};

fn z2() -> Ring {
    Ring::z2(40)
}

fn sqrt2_ring() -> Ring {
    // pi^2 - 2 = 0
    Ring::new(RingSpec::dyadic(1, 2, Some(vec![Coeff::Int(0), Coeff::Int(-1)]), 40)).unwrap()
}

/// The norm form `xy`.
fn xy(r: &Ring) -> HalfIntMat {
    HalfIntMat::from_doubled(r, &[vec![0, 1], vec![1, 0]]).unwrap()
}

/// Unimodular even plane.
fn hyp(r: &Ring) -> HalfIntMat {
    HalfIntMat::hyperbolic(r)
}

/// Unimodular even plane without isotropic vectors mod 2.
fn a2(r: &Ring) -> HalfIntMat {
    HalfIntMat::from_doubled(r, &[vec![4, 2], vec![2, 4]]).unwrap()
}

fn seq(b: &HalfIntMat) -> Vec<i64> {
    let d = gk(b).unwrap();
    assert!(d.certified);
    d.seq
}

// ring

#[test]
fn difference_of_squares_with_uniformizer() {
    let r = sqrt2_ring();
    let one = r.one();
    let x = r.mul(&r.add(&one, &r.pi()), &r.sub(&one, &r.pi()));
    assert_eq!(x, r.from_i64(-1));
    assert_eq!(r.add(&x, &r.zero()), x);
}

#[test]
fn small_products_and_inverses() {
    let r = Ring::z2(6);
    assert_eq!(r.mul(&r.from_i64(3), &r.from_i64(5)), r.from_i64(15));
    assert_eq!(r.inv(&r.one()).unwrap(), r.one());
    assert_eq!(r.inv(&r.from_i64(3)).unwrap(), r.from_i64(43));
    assert!(r.inv(&r.from_i64(2)).is_err());
}

#[test]
fn valuations() {
    let r = z2();
    assert_eq!(r.ord(&r.from_i64(12)), 2);
    let s = sqrt2_ring();
    assert_eq!(s.ord(&s.from_i64(2)), 2);
    assert!(r.ord(&r.zero()) >= r.prec());
}

#[test]
fn quadratic_defects() {
    let r = z2();
    assert_eq!(r.quadratic_defect(&r.from_i64(1)).unwrap(), Defect::Square);
    assert_eq!(r.quadratic_defect(&r.from_i64(5)).unwrap(), Defect::Unramified);
    assert_eq!(r.quadratic_defect(&r.from_i64(3)).unwrap(), Defect::Odd(1));
    for u in [1, 3, 5, 7, 11, 13] {
        let a = r.quadratic_defect(&r.from_i64(u)).unwrap();
        let b = r.quadratic_defect_search(&r.from_i64(u)).unwrap();
        assert_eq!(a, b, "{u}");
    }
}

#[test]
fn extension_types() {
    let r = z2();
    let t = |d: i64| {
        let c = r.ext_type(&r.from_i64(d)).unwrap();
        (c.xi, c.d)
    };
    assert_eq!(t(1), (1, 0));
    assert_eq!(t(2), (0, 3));
    // -3 = 5 mod 8 gives the unramified quadratic extension
    assert_eq!(t(-3), (-1, 0));
    assert_eq!(t(5), (-1, 0));
    assert_eq!(t(-1), (0, 2));
    assert_eq!(t(3), (0, 2));
    assert_eq!(t(6), (0, 3));
    assert_eq!(t(-4), (0, 2));
}

#[test]
fn hilbert_symbols() {
    let r = z2();
    let h = |a: i64, b: i64| r.hilbert_symbol(&r.from_i64(a), &r.from_i64(b)).unwrap();
    for b in [1, 2, 3, 5, 6, 7, 10, 12] {
        assert_eq!(h(1, b), 1);
        assert_eq!(h(b, -b), 1);
    }
    assert_eq!(h(2, 5), -1);
    assert_eq!(h(-1, -1), -1);
    assert_eq!(h(2, 3), -1);
    assert_eq!(h(3, 5), 1);
    assert_eq!(h(3, 7), -1);
}

// lattice

#[test]
fn basis_change_of_plane() {
    let r = z2();
    let b = HalfIntMat::diag_i64(&r, &[1, -1]);
    let u = Mat::from_i64(&r, &[vec![1, 1], vec![0, 1]]);
    let want = HalfIntMat::from_doubled(&r, &[vec![2, 2], vec![2, 0]]).unwrap();
    assert_eq!(b.transform(&u), want);
}

#[test]
fn jordan_profiles() {
    let r = z2();
    let d = jordan_split(&hyp(&r)).unwrap();
    assert_eq!(d.profile(), vec![(0, 2, Subtype::II, false)]);

    let d = jordan_split(&HalfIntMat::diag_i64(&r, &[1, 2])).unwrap();
    assert_eq!(d.profile(), vec![(0, 1, Subtype::IOdd, true), (1, 1, Subtype::IOdd, true)]);

    let d = jordan_split(&HalfIntMat::diag_i64(&r, &[1, 1, -1, -1])).unwrap();
    assert_eq!(d.profile(), vec![(0, 4, Subtype::IEven, false)]);
}

#[test]
fn scaled_sublattices() {
    let r = z2();
    let b = HalfIntMat::diag_i64(&r, &[1, 3]);
    let d = jordan_split(&b).unwrap();
    let a0 = d.sublattice_ai(0).unwrap();
    assert_eq!(jordan_split(&a0).unwrap().profile(), d.profile());

    let b = HalfIntMat::diag_i64(&r, &[1, 12]);
    let d = jordan_split(&b).unwrap();
    let a = d.sublattice_ai(2).unwrap();
    let p = jordan_split(&a).unwrap();
    let c0 = p.at(0).unwrap();
    assert_eq!(c0.rank, 1);
    assert_eq!(c0.block, HalfIntMat::diag_i64(&r, &[3]));
    assert_eq!(p.rank_at(2), 1);
}

#[test]
fn residual_spaces() {
    let r = z2();
    let v = residual_space(&HalfIntMat::diag_i64(&r, &[1, 3])).unwrap();
    // x^2 + y^2 = (x + y)^2 leaves no nonsingular part
    assert_eq!(v.dim, 0);
    let v = residual_space(&hyp(&r)).unwrap();
    assert_eq!((v.dim, v.arf), (2, Arf::Split));
    let v = residual_space(&a2(&r)).unwrap();
    assert_eq!((v.dim, v.arf), (2, Arf::Nonsplit));
}

// GK

#[test]
fn delta_values() {
    let r = z2();
    assert_eq!(delta(&HalfIntMat::diag_i64(&r, &[3])).unwrap(), 0);
    assert_eq!(delta(&HalfIntMat::diag_i64(&r, &[1, -1])).unwrap(), 2);
    assert_eq!(delta(&xy(&r)).unwrap(), 0);
}

#[test]
fn greedy_valuation_profiles() {
    let r = z2();
    assert_eq!(max_s(&HalfIntMat::diag_i64(&r, &[1, 2, 8])), vec![0, 1, 3]);
    let b = HalfIntMat::from_doubled(&r, &[vec![2, 1], vec![1, 2]]).unwrap();
    assert_eq!(max_s(&b), vec![0, 0]);
    let b = HalfIntMat::from_doubled(&r, &[vec![4, 2], vec![2, 4]]).unwrap();
    assert_eq!(max_s(&b), vec![1, 1]);
}

#[test]
fn reduced_forms() {
    let r = z2();
    assert!(is_reduced(&xy(&r), &[0, 0], &Involution(vec![1, 0])).unwrap());
    let b = HalfIntMat::from_doubled(&r, &[vec![2, 2], vec![2, 0]]).unwrap();
    assert!(is_reduced(&b, &[0, 2], &Involution(vec![1, 0])).unwrap());
    let b = HalfIntMat::diag_i64(&r, &[1, 3]);
    assert!(!is_reduced(&b, &[0, 0], &Involution(vec![1, 0])).unwrap_or(false));
}

#[test]
fn searched_invariants() {
    let r = z2();
    assert_eq!(seq(&HalfIntMat::diag_i64(&r, &[1, 1, -1, -1])), vec![0, 1, 1, 2]);
    let b = HalfIntMat::from_doubled(&r, &[vec![4, 2], vec![2, 4]]).unwrap();
    assert_eq!(seq(&b), vec![1, 1]);
    let b = HalfIntMat::diag_i64(&r, &[1, 2, 5]);
    let twice = b.scale(&r.from_i64(2));
    let s: Vec<i64> = seq(&b).iter().map(|x| x + 1).collect();
    assert_eq!(seq(&twice), s);
}

#[test]
fn binary_closed_forms() {
    let r = z2();
    assert_eq!(gk_binary_closed(&HalfIntMat::diag_i64(&r, &[1, 3])).unwrap(), vec![0, 2]);
    assert_eq!(gk_binary_closed(&HalfIntMat::diag_i64(&r, &[1, 1])).unwrap(), vec![0, 1]);
    assert_eq!(gk_binary_closed(&xy(&r)).unwrap(), vec![0, 0]);
    assert_eq!(gk_binary_closed(&hyp(&r)).unwrap(), vec![1, 1]);
    assert_eq!(seq(&HalfIntMat::diag_i64(&r, &[1, 3])), vec![0, 2]);
}

#[test]
fn doubled_lattice_invariants() {
    let r = z2();
    let g = |b: &HalfIntMat| gk_double(&jordan_split(b).unwrap()).unwrap().seq;
    assert_eq!(g(&HalfIntMat::diag_i64(&r, &[1])), vec![0, 2]);
    assert_eq!(g(&HalfIntMat::diag_i64(&r, &[1, 1])), vec![0, 1, 1, 2]);
    assert_eq!(g(&hyp(&r)), vec![1, 1, 1, 1]);
    // agrees with the search on the doubled lattice
    let b = HalfIntMat::diag_i64(&r, &[1, 1]);
    assert_eq!(seq(&b.direct_sum(&b.neg())), g(&b));
}

#[test]
fn doubled_invariants_of_binary_lattices() {
    let p = BinaryParams::new(BinaryKind::RamifiedEven { g: 1 }, 5, 2).unwrap();
    assert_eq!(p.gk_double(), vec![0, 3, 3, 6]);
    let p = BinaryParams::new(BinaryKind::RamifiedEven { g: 2 }, 5, 1).unwrap();
    assert_eq!(p.gk_double(), vec![0, 3, 3, 6]);
    let p = BinaryParams::new(BinaryKind::Unramified { xi: -1 }, 1, 0).unwrap();
    assert_eq!(p.gk_double(), vec![0, 0, 0, 0]);
}

#[test]
fn extended_invariants() {
    let r = z2();
    let e = egk(&HalfIntMat::diag_i64(&r, &[1, 1, -1, -1])).unwrap();
    assert_eq!(e, EGKDatum::new(vec![(1, 0, 1), (2, 1, 1), (1, 2, 1)]));
    let e = egk(&HalfIntMat::diag_i64(&r, &[3])).unwrap();
    assert_eq!(e, EGKDatum::new(vec![(1, 0, 1)]));
    let l = hyp(&r).direct_sum(&HalfIntMat::diag_i64(&r, &[1, 3]));
    let m = hyp(&r).direct_sum(&HalfIntMat::diag_i64(&r, &[1]));
    let want = EGKDatum::new(vec![(1, 0, 1), (2, 1, 1)]);
    assert_eq!(egk(&l).unwrap().truncate(1), want);
    assert_eq!(egk(&m).unwrap(), want);
    let a0 = jordan_split(&l).unwrap().sublattice_ai(0).unwrap();
    assert_eq!(egk_trunc(&a0).unwrap(), egk(&a0).unwrap().truncate(1));
}

#[test]
fn truncated_closed_forms() {
    assert_eq!(egk_trunc_closed(Parity::I, 2, true), EGKDatum::new(vec![(1, 0, 1), (2, 1, 1)]));
    assert_eq!(egk_trunc_closed(Parity::II, 3, true), EGKDatum::new(vec![(3, 1, 1)]));
    assert_eq!(egk_trunc_closed(Parity::I, 0, true), EGKDatum::new(vec![(1, 0, 1)]));
    let p = BinaryParams::new(BinaryKind::Unramified { xi: -1 }, 1, 0).unwrap();
    assert_eq!(p.egk_trunc(), EGKDatum::new(vec![(2, 1, -1)]));
    let p = BinaryParams::new(BinaryKind::RamifiedEven { g: 1 }, 5, 2).unwrap();
    assert!(p.egk_trunc().is_empty());
    let p = BinaryParams::new(BinaryKind::RamifiedOdd, 1, 1).unwrap();
    assert_eq!(p.egk_trunc(), EGKDatum::new(vec![(1, 0, 1)]));
}

#[test]
fn profile_recovery() {
    let cases = [
        (vec![0, 1, 1, 2], vec![3, 2, 1, 0], Subtype::IEven, 2),
        (vec![1, 1, 1, 1], vec![1, 0, 3, 2], Subtype::II, 2),
        (vec![0, 2], vec![1, 0], Subtype::IOdd, 1),
    ];
    for (a, s, t, n) in cases {
        let p = recover_profile(&a, &Involution(s)).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!((p[0].scale, p[0].subtype, p[0].rank), (0, t, n));
    }
    let r = z2();
    let b = HalfIntMat::diag_i64(&r, &[1, 2, 4]).direct_sum(&hyp(&r).scale(&r.from_i64(2)));
    let dec = jordan_split(&b).unwrap();
    let (a, sigma) = gk_double_sigma(&dec).unwrap();
    let got = recover_profile(&a, &sigma).unwrap();
    let want: Vec<_> = dec.profile().iter().map(|c| (c.0, c.2, c.1)).collect();
    let got: Vec<_> = got.iter().map(|c| (c.scale, c.subtype, c.rank)).collect();
    assert_eq!(got, want);
}

#[test]
fn odd_residue_characteristic() {
    let r = Ring::zp(3, 20);
    assert_eq!(gk_odd_p(&HalfIntMat::diag_i64(&r, &[1, 9])).unwrap().seq, vec![0, 2]);
    let h = HalfIntMat::from_doubled(&r, &[vec![0, 2], vec![2, 0]]).unwrap();
    assert_eq!(gk_odd_p(&h).unwrap().seq, vec![0, 0]);
    let b = HalfIntMat::diag_i64(&r, &[2, 3, 9]);
    let shifted: Vec<i64> = gk_odd_p(&b).unwrap().seq.iter().map(|x| x + 1).collect();
    assert_eq!(gk_odd_p(&b.scale(&r.from_i64(3))).unwrap().seq, shifted);
}

// density

#[test]
fn small_counts() {
    let r = z2();
    let one = HalfIntMat::diag_i64(&r, &[1]);
    assert_eq!(count_naive(&one, &one, 4).unwrap(), 4);
    let two = HalfIntMat::diag_i64(&r, &[1, 1]);
    assert_eq!(count_naive(&one, &two, 3).unwrap(), 16);
    assert_eq!(count_lifted(&one, &two, 3).unwrap(), 16);
}

#[test]
fn plane_densities() {
    let r = z2();
    let h = xy(&r);
    assert_eq!(rational_string(&alpha_at(&h, 5).unwrap()), "1");
    let rep = alpha_beta(&h, None).unwrap();
    assert_eq!(rational_string(&rep.beta), "1/2");
    let d = HalfIntMat::diag_i64(&r, &[1, 1]);
    assert_eq!(alpha_at(&d, 6).unwrap(), alpha_at(&d, 7).unwrap());
    let e = HalfIntMat::diag_i64(&r, &[1, 3]);
    assert_ne!(alpha_beta(&d, None).unwrap().beta, alpha_beta(&e, None).unwrap().beta);
}

#[test]
fn rank_one_density() {
    let r = z2();
    let rep = alpha_beta(&HalfIntMat::diag_i64(&r, &[1]), None).unwrap();
    assert_eq!(rational_string(&rep.alpha), "4");
    assert_eq!(rational_string(&rep.beta), "2");
    assert_eq!(rational_string(&rep.beta_c), "2");
    assert!(rep.stabilized);
}

#[test]
fn closed_formula_densities() {
    let r = z2();
    for b in [HalfIntMat::diag_i64(&r, &[1]), HalfIntMat::diag_i64(&r, &[1, 1]), xy(&r), hyp(&r)] {
        let c = formula_beta_of(&b).unwrap();
        let n = alpha_beta(&b, None).unwrap();
        assert_eq!(c.beta_c, n.beta_c);
        assert_eq!(c.beta, n.beta);
    }
    assert_eq!(rational_string(&formula_beta_of(&xy(&r)).unwrap().beta), "1/2");
    assert_eq!(rational_string(&formula_beta_of(&HalfIntMat::diag_i64(&r, &[1])).unwrap().beta_c), "2");
    // explicit residual data gives the same value
    let dec = jordan_split(&hyp(&r)).unwrap();
    let res = vec![(0, residual_space(&dec.at(0).unwrap().block).unwrap())];
    assert_eq!(formula_beta(&dec, &res).unwrap().beta, formula_beta_of(&hyp(&r)).unwrap().beta);
}

#[test]
fn orthogonal_group_orders() {
    let o = |d, e| ortho_group_order(d, e, 2).order.to_string();
    assert_eq!(o(2, Eps::Split), "2");
    assert_eq!(o(2, Eps::Nonsplit), "6");
    assert_eq!(o(1, Eps::Odd), "1");
    assert_eq!(o(0, Eps::Split), "1");
    let r = z2();
    assert_eq!(residual_space(&hyp(&r)).unwrap().isometry_count(), 2);
    assert_eq!(residual_space(&a2(&r)).unwrap().isometry_count(), 6);
}

#[test]
fn binary_case_table() {
    let p = BinaryParams::new(BinaryKind::RamifiedEven { g: 1 }, 5, 2).unwrap();
    assert_eq!(dyadic_gk::density::closed::binary_beta_poly(&p).unwrap().to_string(), "q^7");
    let p = BinaryParams::new(BinaryKind::RamifiedEven { g: 2 }, 5, 1).unwrap();
    assert_eq!(dyadic_gk::density::closed::binary_beta_poly(&p).unwrap().to_string(), "2*q^7");
    let p = BinaryParams::new(BinaryKind::Unramified { xi: -1 }, 1, 0).unwrap();
    assert_eq!(rational_string(&binary_beta(&p, 2).unwrap().beta), "3/2");
}

#[test]
fn binary_profiles() {
    let p = BinaryParams::new(BinaryKind::Unramified { xi: -1 }, 3, 1).unwrap();
    let b = binary_profile(&p).unwrap();
    assert_eq!((b.jor, b.gk_ai), (vec![-2], vec![2, 4]));
    let p = BinaryParams::new(BinaryKind::Unramified { xi: -1 }, 1, 2).unwrap();
    let b = binary_profile(&p).unwrap();
    assert_eq!((b.jor, b.gk_ai), (vec![0, 2], vec![0, 4]));
    let p = BinaryParams::new(BinaryKind::RamifiedOdd, 2, 1).unwrap();
    let b = binary_profile(&p).unwrap();
    assert_eq!((b.jor, b.gk_ai), (vec![0, 3], vec![0, 3]));
}

#[test]
fn invariant_comparisons() {
    let r = z2();
    let l = HalfIntMat::diag_i64(&r, &[1, 1]);
    assert_eq!(theorem_check(&l, &l).unwrap().kind, VerdictKind::Equal);

    let v = theorem_check(&l, &HalfIntMat::diag_i64(&r, &[1, 3])).unwrap();
    assert_eq!(v.kind, VerdictKind::HypothesisNotMet);
    assert_ne!(v.beta_left, v.beta_right);
}

#[test]
fn two_ramified_lattices_share_invariants() {
    let rows = ramified_pair_report().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].beta.to_string(), "q^7");
    assert_eq!(rows[1].beta.to_string(), "2*q^7");
    for row in &rows {
        assert_eq!(row.gk_double, vec![0, 3, 3, 6]);
        assert_eq!(row.jor, vec![-2]);
        assert!(row.egk_trunc.is_empty());
    }
}

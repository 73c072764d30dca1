//! Property tests for the algebraic and numerical invariants.

use carnot_tangent::ccfields::{dilate_point, lie_bracket, pushforward_dilation};
use carnot_tangent::curves::{
    blowup_family, detect_halfline, integrate, is_horizontal_line, length, lift_curve, uniform_grid, Control,
    FloatFields, Rk4, Window, graded_grid,
};
use carnot_tangent::freecarnot::{bch, build_hall_basis, build_psi, group_action, project_pi, FreeLieElement};
use carnot_tangent::jets::apply_operator_power;
use carnot_tangent::nilpotent::approximate;
use carnot_tangent::rational::{frac, to_f64};
use carnot_tangent::{models, Jet, JetMap, PolyVectorField, Weights, Q};
use proptest::prelude::*;

fn small_q() -> impl Strategy<Value = Q> {
    (-6i64..=6, 1i64..=4).prop_map(|(a, b)| frac(a, b))
}

fn nonzero_q() -> impl Strategy<Value = Q> {
    (1i64..=6, 1i64..=4, any::<bool>()).prop_map(|(a, b, neg)| frac(if neg { -a } else { a }, b))
}

fn w3() -> Weights {
    Weights::new(vec![1, 1, 2]).unwrap()
}

fn jet(order: u32) -> impl Strategy<Value = Jet> {
    prop::collection::vec((prop::collection::vec(0u32..3, 3), small_q()), 0..7)
        .prop_map(move |terms| Jet::from_terms(&w3(), order, terms))
}

/// Identity plus terms of weighted degree ≥ w_j and total degree ≥ 2.
fn admissible_map(order: u32) -> impl Strategy<Value = JetMap> {
    prop::collection::vec(prop::collection::vec((prop::collection::vec(0u32..3, 3), small_q()), 0..4), 3).prop_map(
        move |comps| {
            let w = w3();
            let jets = comps
                .into_iter()
                .enumerate()
                .map(|(j, terms)| {
                    let mut kept: Vec<(Vec<u32>, Q)> = terms
                        .into_iter()
                        .filter(|(e, _)| w.degree(e) >= w.as_slice()[j] && e.iter().sum::<u32>() >= 2)
                        .collect();
                    let mut id = vec![0; 3];
                    id[j] = 1;
                    kept.push((id, Q::from_integer(1.into())));
                    Jet::from_terms(&w, order, kept)
                })
                .collect();
            JetMap::new(jets).unwrap()
        },
    )
}

/// Fields on ℝ^3 with unit weights and components of degree ≤ 2.
fn field() -> impl Strategy<Value = PolyVectorField> {
    prop::collection::vec(prop::collection::vec((prop::collection::vec(0u32..2, 3), small_q()), 0..3), 3).prop_map(
        |comps| {
            let w = Weights::unit(3);
            PolyVectorField::new(comps.into_iter().map(|t| Jet::from_terms(&w, 12, t)).collect()).unwrap()
        },
    )
}

proptest! {
    #[test]
    fn jet_ring_axioms(a in jet(4), b in jet(4), c in jet(4)) {
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        prop_assert_eq!(a.add(&b).unwrap().add(&c).unwrap(), a.add(&b.add(&c).unwrap()).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
        prop_assert_eq!(
            a.mul(&b.add(&c).unwrap()).unwrap(),
            a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap()
        );
    }

    #[test]
    fn truncation_commutes(a in jet(5), b in jet(5), lower in 1u32..5) {
        let (ta, tb) = (a.truncate(lower), b.truncate(lower));
        prop_assert_eq!(a.mul(&b).unwrap().truncate(lower), ta.mul(&tb).unwrap());
        prop_assert_eq!(a.add(&b).unwrap().truncate(lower), ta.add(&tb).unwrap());
    }

    #[test]
    fn inverse_composes_to_identity(g in admissible_map(4)) {
        let h = g.invert().unwrap();
        prop_assert!(g.compose(&h).unwrap().is_identity());
        prop_assert!(h.compose(&g).unwrap().is_identity());
    }

    #[test]
    fn bracket_antisymmetry_and_jacobi(u in field(), v in field(), w in field()) {
        let uv = lie_bracket(&u, &v).unwrap();
        prop_assert_eq!(uv.add(&lie_bracket(&v, &u).unwrap()).unwrap().is_zero(), true);
        let jac = lie_bracket(&u, &lie_bracket(&v, &w).unwrap()).unwrap()
            .add(&lie_bracket(&v, &lie_bracket(&w, &u).unwrap()).unwrap()).unwrap()
            .add(&lie_bracket(&w, &uv).unwrap()).unwrap();
        prop_assert!(jac.is_zero());
    }

    #[test]
    fn dilation_is_a_group_action(v in field(), a in 1i64..5, b in 1i64..5, c in 1i64..5) {
        let v = v.reweighted(&w3(), 12);
        let (l, m) = (frac(a, b), frac(c, 3));
        let twice = pushforward_dilation(&pushforward_dilation(&v, &l).unwrap(), &m).unwrap();
        prop_assert_eq!(twice, pushforward_dilation(&v, &(&l * &m)).unwrap());
    }

    #[test]
    fn operator_power_symmetric_in_repeated_generators(psi in jet(4), k in 0u32..4) {
        let x = models::heisenberg_polarized();
        let y = x.fields()[1].clone();
        let psi = psi.reweighted(&Weights::unit(3), 4);
        let s = Weights::unit(2);
        let out = apply_operator_power(&[y.clone(), y], &psi, k, &s, 6).unwrap();
        for (e, c) in out.terms_sorted() {
            prop_assert_eq!(out.coeff(&[e[1], e[0]]), c);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn action_property(x in prop::collection::vec(small_q(), 4), a in prop::collection::vec(small_q(), 5), b in prop::collection::vec(small_q(), 5)) {
        let e = approximate(&models::engel(), None, None).unwrap();
        let basis = build_hall_basis(2, 3).unwrap();
        let l = build_psi(&basis, &e.nilpotent).unwrap();
        let f = FreeLieElement::new(&basis, a).unwrap();
        let g = FreeLieElement::new(&basis, b).unwrap();
        let lhs = group_action(&group_action(&x, &f, &l).unwrap(), &g, &l).unwrap();
        prop_assert_eq!(lhs, group_action(&x, &bch(&f, &g).unwrap(), &l).unwrap());
    }

    #[test]
    fn dilation_intertwines_layer_one_flows(x in prop::collection::vec(small_q(), 4), c in prop::collection::vec(small_q(), 2), lam in nonzero_q()) {
        let lam = if lam < Q::from_integer(0.into()) { -lam } else { lam };
        let e = approximate(&models::engel(), None, None).unwrap();
        let basis = build_hall_basis(2, 3).unwrap();
        let l = build_psi(&basis, &e.nilpotent).unwrap();
        let w = e.nilpotent.weights();
        let mut coef = vec![Q::from_integer(0.into()); basis.dim()];
        coef[..2].clone_from_slice(&c);
        let g = FreeLieElement::new(&basis, coef).unwrap();
        let lhs = group_action(&dilate_point(&x, &lam, w).unwrap(), &g.scale(&lam), &l).unwrap();
        let rhs = dilate_point(&group_action(&x, &g, &l).unwrap(), &lam, w).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn layer_one_generation(a in prop::collection::vec(small_q(), 8)) {
        let basis = build_hall_basis(2, 4).unwrap();
        let word = basis.layer_one_factorization(&a).unwrap();
        prop_assert!(word.iter().all(|(i, _)| *i < 2));
        prop_assert_eq!(basis.word_product(&word), a.clone());
        let t = basis.second_kind_coordinates(&a);
        prop_assert_eq!(basis.second_kind_product(&t), a);
    }

    #[test]
    fn length_scales_exactly(vals in prop::collection::vec((-4i32..=4, -4i32..=4), 1..8), k in -3i32..=3) {
        let m = vals.len();
        let grid = uniform_grid(0.0, 1.0, m);
        let values = vals.iter().map(|(a, b)| vec![*a as f64 / 4.0, *b as f64 / 8.0]).collect();
        let h = Control::new(grid, values).unwrap();
        let lam = 2f64.powi(k);
        prop_assert_eq!(length(&h.rescaled(lam)), lam * length(&h));
    }

    #[test]
    fn reparametrization_identity(seed in 0u64..20, angles in prop::collection::vec(0.0..6.28f64, 1..5), lam in 0.25..4.0f64) {
        let a = approximate(&models::perturbed(&models::heisenberg(), seed), None, None).unwrap();
        let d = &a.decomposition;
        let w = d.weights().as_slice().to_vec();
        let grid = uniform_grid(0.0, 0.5, angles.len());
        let h = Control::new(grid, angles.iter().map(|t| vec![t.cos(), t.sin()]).collect()).unwrap();
        let base = FloatFields::from_fields(d.base().fields());
        let rk = Rk4::default();
        let coarse = integrate(&base, &h, &[0.0; 3], rk).unwrap();
        let fine = integrate(&base, &h, &[0.0; 3], Rk4 { step: rk.step / 2.0, ..rk }).unwrap();
        let defect = coarse.last().iter().zip(fine.last()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let y = FloatFields::rescaled(d.base().fields(), d.weights(), 1.0 / lam);
        let scaled = integrate(&y, &h.rescaled(lam), &[0.0; 3], Rk4 { step: lam * rk.step, ..rk }).unwrap();
        let expect = carnot_tangent::ccfields::dilate_point_f64(coarse.last(), lam, &w);
        let gap = scaled.last().iter().zip(&expect).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(gap <= 10.0 * defect.max(1e-13), "gap {gap:e}, defect {defect:e}");
    }

    #[test]
    fn constant_lift_is_a_one_parameter_subgroup(c1 in -1.0..1.0f64, c2 in -1.0..1.0f64) {
        let e = approximate(&models::engel(), None, None).unwrap();
        let basis = build_hall_basis(2, 3).unwrap();
        let l = build_psi(&basis, &e.nilpotent).unwrap();
        let h = Control::constant(0.0, 1.0, vec![c1, c2]).unwrap();
        let rep = lift_curve(&h, &l, Rk4::default(), 1e-9).unwrap();
        // exp(t(c1 W1 + c2 W2)) has coordinates t(c1, c2, 0, 0, 0)
        for (t, a) in rep.lift.times.iter().zip(&rep.lift.states) {
            prop_assert!((a[0] - t * c1).abs() < 1e-12 && (a[1] - t * c2).abs() < 1e-12);
            prop_assert!(a[2..].iter().all(|x| x.abs() < 1e-12));
        }
        let end = l.project_f64(rep.lift.last());
        prop_assert!(is_horizontal_line(&end, &e.nilpotent, 1e-9).is_line);
    }

    #[test]
    fn geodesic_blowups_are_lines(omega in 0.5..4.0f64, phi in 0.0..6.28f64, t0 in 0.5..2.5f64) {
        let a = approximate(&models::heisenberg(), None, None).unwrap();
        let h = Control::from_fn(graded_grid(0.0, 3.0, t0, 1e-7, 1.2), |t| {
            vec![(omega * t + phi).cos(), (omega * t + phi).sin()]
        }).unwrap();
        let etas = [1e-3, 1e-4, 1e-5];
        let window = Window { lo: -1.0, hi: 1.0 };
        let fam = blowup_family(&a.decomposition, &h, t0, &etas, window, Rk4::default()).unwrap();
        let verdict = detect_halfline(&fam, 2, 1e-3);
        prop_assert!(verdict.limit_found, "{:?}", verdict);
        let x0 = fam.last().unwrap().sample_at(1.0);
        prop_assert!(is_horizontal_line(&x0, &a.nilpotent, 1e-3).is_line);
    }
}

#[test]
fn lift_matches_projected_bch_points() {
    let e = approximate(&models::engel(), None, None).unwrap();
    let basis = build_hall_basis(2, 3).unwrap();
    let l = build_psi(&basis, &e.nilpotent).unwrap();
    let f = FreeLieElement::new(&basis, vec![frac(1, 2), frac(-1, 3), frac(1, 5), Q::from_integer(1.into()), frac(-2, 7)]).unwrap();
    let exact: Vec<f64> = project_pi(&f, &l).unwrap().iter().map(to_f64).collect();
    let coef: Vec<f64> = f.coef().iter().map(to_f64).collect();
    for (x, y) in l.project_f64(&coef).iter().zip(&exact) {
        assert!((x - y).abs() < 1e-14);
    }
}

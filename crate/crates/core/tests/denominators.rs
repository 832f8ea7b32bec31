use polecasc::cascade::{run_cascade, CascadeDB};
use polecasc::denominators::*;
use polecasc::polespaces::{is_residual, omega_order, PoleSpace};
use polecasc::{build_root_datum, Error, RootDatum, RootType, WeylElement, Q};
use proptest::prelude::*;

mod oracles;
use oracles::{heritability, heritability_cases};

fn residual_pairs(d: &RootDatum, db: &CascadeDB) -> Vec<(PoleSpace, WeylElement)> {
    let mut v = Vec::new();
    for rows in &db.std {
        for r in rows {
            if is_residual(d, &r.l0) {
                v.extend(r.ws.iter().map(|w| (r.l0.clone(), w.clone())));
            }
        }
    }
    v
}

fn f4() -> (RootDatum, Vec<(PoleSpace, WeylElement)>) {
    let d = build_root_datum(RootType::F, 4, 4).unwrap();
    let db = run_cascade(&d).unwrap();
    let pairs = residual_pairs(&d, &db);
    (d, pairs)
}

#[test]
fn f4_tau_identity_and_main_containment() {
    let (d, pairs) = f4();
    assert_eq!(pairs.len(), 71);
    for (l0, w) in &pairs {
        assert!(check_tau_identity(&d, l0, w).unwrap(), "tau {:?} [{}]", l0.center, w.word_string());
        let m = main_containment(&d, l0, w).unwrap();
        assert!(m.holds(), "main {:?} [{}]", l0.center, w.word_string());
    }
}

#[test]
fn shifted_center_breaks_containment() {
    let (d, pairs) = f4();
    let failing = pairs
        .iter()
        .filter(|(l0, w)| {
            let p: Vec<Q> = l0.center.iter().zip(&d.fundamental_weights[0]).map(|(a, b)| *a + *b).collect();
            !main_containment_at(&d, l0, w, &p).unwrap().holds()
        })
        .count();
    assert_eq!(failing, 29);
}

#[test]
fn centers_are_admissible() {
    let (d, pairs) = f4();
    for (l0, w) in pairs.iter().filter(|(l0, _)| omega_order(&d, l0) <= 0) {
        let l = l0.transform(&d, w);
        let p = d.act(w, &l0.center);
        assert!(adm_membership(&d, &l, &p, &[(l0.clone(), w.clone())]).unwrap());
    }
}

#[test]
fn adm_rejects_bad_input() {
    let d = build_root_datum(RootType::A, 2, 1).unwrap();
    let v = PoleSpace::whole(&d);
    let l = polecasc::polespaces::pole_space(&d, &[d.simple_coroot(0)]).unwrap();
    let off = vec![Q::from_integer(0), Q::from_integer(0)];
    assert!(matches!(adm_membership(&d, &l, &off, &[]), Err(Error::OffSpace)));
    assert!(adm_membership(&d, &v, &off, &[]).is_ok());
}

#[test]
fn heritability_rank_le_3() {
    let total: usize = heritability_cases().into_iter().map(|(t, n, om)| heritability(t, n, om)).sum();
    assert!(total > 0);
}

fn form(g: Vec<i64>, c: (i64, i64)) -> AffineForm {
    AffineForm { gradient: g.into_iter().map(Q::from_integer).collect(), constant: Q::new(c.0, c.1) }
}

proptest! {
    #[test]
    fn one_minus_tau_is_an_involution(g in prop::collection::vec(-3i64..=3, 4), c in (-6i64..=6, 1i64..=3), p in prop::collection::vec(-4i64..=4, 4)) {
        let f = form(g, c);
        let center: Vec<Q> = p.into_iter().map(|x| Q::new(x, 2)).collect();
        let once = one_minus_tau(&f, &center);
        prop_assert_eq!(one_minus_tau(&once, &center), f.clone());
        prop_assert_eq!(once.eval(&center), Q::from_integer(1) - f.eval(&center));
    }

    #[test]
    fn canonical_picks_from_the_pair(g in prop::collection::vec(-3i64..=3, 3), c in (-6i64..=6, 1i64..=3), p in prop::collection::vec(-4i64..=4, 3)) {
        let f = form(g, c);
        let pt: Vec<Q> = p.into_iter().map(Q::from_integer).collect();
        let k = f.clone().canonical();
        prop_assert_eq!(k.clone().canonical(), k.clone());
        let (a, b) = (k.eval(&pt), f.eval(&pt));
        prop_assert!(a == b || a == Q::from_integer(1) - b);
    }

    #[test]
    fn multiset_intersection_is_contained(xs in prop::collection::vec((0i64..4, 1u32..3), 0..6), ys in prop::collection::vec((0i64..4, 1u32..3), 0..6)) {
        let mk = |v: &[(i64, u32)]| {
            let mut m = DenominatorMultiset::new(DenKind::Sigma);
            for (c, k) in v {
                m.add(form(vec![1, 0], (*c, 1)), *k);
            }
            m
        };
        let (a, b) = (mk(&xs), mk(&ys));
        let i = a.intersect(&b);
        prop_assert!(i.is_subset_of(&a) && i.is_subset_of(&b));
        prop_assert!(a.is_subset_of(&a));
        prop_assert_eq!(i, b.intersect(&a));
    }
}

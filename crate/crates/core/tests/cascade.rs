use polecasc::cascade::{check_classical, first_generation, positive_order_off_center, run_cascade, verify_cascade, Point};
use polecasc::polespaces::is_residual;
use polecasc::{build_root_datum, RootType, Q};

fn classical_cases() -> Vec<(RootType, usize)> {
    let mut v = Vec::new();
    for (t, lo) in [(RootType::A, 1), (RootType::B, 2), (RootType::C, 2), (RootType::D, 4)] {
        for n in lo..=5 {
            v.push((t, n));
        }
    }
    v
}

#[test]
fn f4_cascade_verifies() {
    let d = build_root_datum(RootType::F, 4, 4).unwrap();
    assert_eq!(d.levi_prime_label(), "B3");
    let db = run_cascade(&d).unwrap();
    assert_eq!(db.gen.len(), 5);
    assert_eq!(first_generation(&d).len(), 8);
    let rep = verify_cascade(&db, &d);
    assert!(rep.ok(), "{:?}", rep.failures);
    assert!(positive_order_off_center(&db, &d).is_empty());
}

#[test]
fn classical_properties_i_to_iii() {
    for (t, n) in classical_cases() {
        let d = build_root_datum(t, n, 1).unwrap();
        let db = run_cascade(&d).unwrap();
        let rep = verify_cascade(&db, &d);
        assert!(rep.ok(), "{t}{n}: {:?}", rep.failures);
        let c = check_classical(&db, &d);
        assert!(c.late_points_at_centers, "{t}{n}: {:?}", c.witnesses);
        assert!(c.early_order_zero, "{t}{n}: {:?}", c.witnesses);
        assert!(c.nonresidual_at_centers, "{t}{n}: {:?}", c.witnesses);
    }
}

#[test]
fn classical_property_iv_fails_where_documented() {
    let failing: Vec<String> = classical_cases()
        .into_iter()
        .filter(|&(t, n)| {
            let d = build_root_datum(t, n, 1).unwrap();
            !check_classical(&run_cascade(&d).unwrap(), &d).early_poles_positive
        })
        .map(|(t, n)| format!("{t}{n}"))
        .collect();
    assert_eq!(failing, ["B3", "B4", "B5", "C5", "D4", "D5"]);

    let d = build_root_datum(RootType::D, 4, 1).unwrap();
    let db = run_cascade(&d).unwrap();
    let c = check_classical(&db, &d);
    assert_eq!(c.witnesses, ["(iv) gen[4][1]"]);
    let r = &db.gen[4][1];
    let q = |v: &[i64]| v.iter().map(|&x| Q::from_integer(x)).collect::<Vec<_>>();
    assert_eq!(r.generation(), 2);
    assert_eq!(r.space.center, q(&[-1, 1, 1, 1]));
    assert!(is_residual(&d, &r.space));
    let neg: Vec<&Vec<i64>> = r.space.pole_set.iter().filter(|&&c| !d.is_pos(c)).map(|&c| &d.coroots[c]).collect();
    assert_eq!(neg, [&vec![-1, 0, 0, 0]]);
}

#[test]
fn tampering_is_detected() {
    let d = build_root_datum(RootType::B, 3, 1).unwrap();
    let db = run_cascade(&d).unwrap();
    assert!(verify_cascade(&db, &d).ok());

    let mut moved = db.clone();
    let row = moved.gen[2].iter_mut().find(|r| r.space.dim() > 0).unwrap();
    let mut p = row.initial.finite.clone();
    p[0] += Q::new(1, 3);
    row.segment_end = Some(Point::at(p));
    assert!(!verify_cascade(&moved, &d).ok());

    let mut dropped = db.clone();
    let k = dropped.gen.iter().rposition(|g| !g.is_empty()).unwrap();
    dropped.gen[k].pop();
    assert!(!verify_cascade(&dropped, &d).ok());
}

#[test]
fn deterministic_across_thread_counts() {
    let d = build_root_datum(RootType::C, 4, 1).unwrap();
    let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    let a = pool(1).install(|| run_cascade(&d).unwrap());
    let b = pool(4).install(|| run_cascade(&d).unwrap());
    assert_eq!(a, b);
}

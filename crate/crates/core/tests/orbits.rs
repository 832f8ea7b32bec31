use polecasc::polespaces::{enumerate_standard_residual, is_residual, orbit_table};
use polecasc::{build_root_datum, RootType};
use std::collections::BTreeSet;

mod oracles;
use oracles::partition_oracle;

fn count(t: RootType, n: usize) -> usize {
    let d = build_root_datum(t, n, 1).unwrap();
    let all: Vec<usize> = (0..n).collect();
    enumerate_standard_residual(&d, &all).len()
}

#[test]
fn oracle_small_values() {
    assert_eq!(partition_oracle(RootType::A, 2), 3);
    assert_eq!(partition_oracle(RootType::B, 2), 4);
    assert_eq!(partition_oracle(RootType::C, 2), 4);
    assert_eq!(partition_oracle(RootType::B, 3), 8);
    assert_eq!(partition_oracle(RootType::C, 3), 7);
    assert_eq!(partition_oracle(RootType::D, 4), 12);
}

#[test]
fn classical_counts_match_partitions() {
    let cases = [
        (RootType::A, 1..=5),
        (RootType::B, 2..=4),
        (RootType::C, 3..=4),
        (RootType::D, 4..=5),
    ];
    for (t, ranks) in cases {
        for n in ranks {
            assert_eq!(count(t, n), partition_oracle(t, n as u32), "{t}{n}");
        }
    }
}

#[test]
fn trivial_counts() {
    assert_eq!(count(RootType::A, 1), 2);
    assert_eq!(count(RootType::A, 2), 3);
    assert_eq!(count(RootType::B, 2), 4);
}

#[test]
fn exceptional_counts_match_table() {
    for (t, n, om, expected) in [(RootType::G, 2, 1, 5), (RootType::F, 4, 4, 16), (RootType::E, 6, 1, 21)] {
        let d = build_root_datum(t, n, om).unwrap();
        let all: Vec<usize> = (0..n).collect();
        let list = enumerate_standard_residual(&d, &all);
        let table: BTreeSet<Vec<i64>> = orbit_table().entries_for(&d).into_iter().map(|e| e.0).collect();
        assert_eq!(table.len(), expected);
        let found: BTreeSet<Vec<i64>> = list.iter().map(|s| s.label.weighted_dynkin.clone()).collect();
        assert_eq!(found.len(), list.len(), "{t}{n}: duplicate labels");
        assert_eq!(found, table, "{t}{n}");
        for s in &list {
            assert!(is_residual(&d, &s.space));
            assert_eq!(s.space.pole_set.len(), s.space.zero_set.len() + s.space.codim, "{t}{n} {:?}", s.label);
            assert!(s.label.name.is_some());
        }
    }
}

#[test]
fn labels_are_distinct_and_centers_standard() {
    for (t, n) in [(RootType::B, 4), (RootType::C, 4), (RootType::D, 5)] {
        let d = build_root_datum(t, n, 1).unwrap();
        let all: Vec<usize> = (0..n).collect();
        let list = enumerate_standard_residual(&d, &all);
        let labels: BTreeSet<Vec<i64>> = list.iter().map(|s| s.label.weighted_dynkin.clone()).collect();
        assert_eq!(labels.len(), list.len());
        for s in &list {
            for (&j, g) in s.nodes.iter().zip(&s.gamma) {
                assert_eq!(d.eval(d.simple_coroot(j), &s.space.center), *g);
            }
        }
    }
}

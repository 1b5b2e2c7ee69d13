mod common;

use polar_recover::incidence::IncidenceStructure;
use polar_recover::reconstruct::{reconstruct, IntrinsicGeometry};
use polar_recover::verify::{
    find_isomorphism, is_isomorphism, run_lemma_battery, BatteryOptions, PointMap, Status,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn relabel(s: &IncidenceStructure, perm: &[usize], line_order: &[usize]) -> IncidenceStructure {
    let lines = line_order.iter().map(|&l| s.line(l).iter().map(|&p| perm[p]).collect()).collect();
    IncidenceStructure::new(s.n_points(), lines).unwrap()
}

fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    v
}

#[test]
fn identity_and_a_bad_swap() {
    let ps = common::space("sp:6:2");
    let s = ps.structure();
    let id = PointMap::identity(63);
    assert!(is_isomorphism(s, s, &id).unwrap().holds);
    let b = common::partner(&ps, 0, false);
    let mut images: Vec<usize> = (0..63).collect();
    images.swap(0, b);
    let swap = PointMap::new(images, 63).unwrap();
    let cert = is_isomorphism(s, s, &swap).unwrap();
    assert!(!cert.holds);
    assert!(cert.violation.is_some());
}

#[test]
fn point_maps_must_be_bijections() {
    assert!(PointMap::new(vec![0, 0, 1], 3).is_err());
    assert!(PointMap::new(vec![0, 1, 3], 3).is_err());
    let m = PointMap::new(vec![2, 0, 1], 3).unwrap();
    assert_eq!(m.then(&m).then(&m).images(), PointMap::identity(3).images());
}

#[test]
fn size_mismatch_is_reported() {
    let a = common::space("sp:6:2");
    let b = common::space("q+:5:2");
    assert!(find_isomorphism(a.structure(), b.structure()).is_none());
    assert!(is_isomorphism(a.structure(), b.structure(), &PointMap::identity(63)).is_err());
}

#[test]
fn search_finds_the_reconstruction() {
    let c = common::complement("sp:6:2", "point 5");
    let g = IntrinsicGeometry::new(&c);
    let r = reconstruct(&g).unwrap();
    let m = find_isomorphism(c.base().structure(), r.structure()).unwrap();
    assert!(is_isomorphism(c.base().structure(), r.structure(), &m).unwrap().holds);
    assert_eq!(find_isomorphism(c.base().structure(), r.structure()).unwrap(), m);
}

#[test]
fn symplectic_and_parabolic_over_gf2_are_isomorphic() {
    let a = common::space("sp:6:2");
    let b = common::space("q:6:2");
    let m = find_isomorphism(a.structure(), b.structure()).unwrap();
    assert!(is_isomorphism(a.structure(), b.structure(), &m).unwrap().holds);
}

#[test]
fn battery_passes_on_a_point_horizon() {
    let c = common::complement("sp:6:2", "point 5");
    let opts = BatteryOptions { search_isomorphism: true, ..BatteryOptions::default() };
    let rep = run_lemma_battery(&c, &opts);
    assert_eq!(rep.failed(), 0, "{:?}", rep.checks);
    assert!(rep.checks.iter().all(|ch| ch.status == Status::Pass));
    assert_eq!(rep.checks.len(), 17);
}

#[test]
fn battery_passes_on_a_line_inside_a_perp() {
    let ps = common::space("q+:5:2");
    let s = ps.structure();
    let id = (0..s.n_lines()).find(|&l| s.line_set(l).is_subset(s.perp_of(7))).unwrap();
    let c = common::complement("q+:5:2", &format!("line {id}"));
    let rep = run_lemma_battery(&c, &BatteryOptions::default());
    assert_eq!(rep.failed(), 0, "{:?}", rep.checks);
}

#[test]
fn battery_skips_recovery_checks_for_a_hyperplane() {
    let c = common::complement("q+:5:3", "perp 3");
    let rep = run_lemma_battery(&c, &BatteryOptions::default());
    assert_eq!(rep.failed(), 0, "{:?}", rep.checks);
    assert_eq!(rep.get("canonical_isomorphism").unwrap().status, Status::Skip);
}

/// Over GF(2) every plane meets a hyperplane horizon in a line, so no
/// affine line has a Veblen partner; the battery reports it.
#[test]
fn hyperplane_horizon_over_gf2_has_no_parallel_classes() {
    let c = common::complement("sp:6:2", "perp 3");
    let rep = run_lemma_battery(&c, &BatteryOptions::default());
    assert_eq!(rep.get("deep_points").unwrap().status, Status::Pass);
    assert_eq!(rep.get("parallel_reflexive").unwrap().status, Status::Fail);
    assert_eq!(rep.get("canonical_isomorphism").unwrap().status, Status::Skip);
}

#[test]
fn removing_a_line_is_noticed() {
    let c = common::complement("sp:6:2", "point 5");
    for id in [0, c.affine_lines()[0], 200] {
        let broken = c.with_line_removed(id).unwrap();
        let rep = run_lemma_battery(&broken, &BatteryOptions::default());
        let failed: Vec<_> = rep.checks.iter().filter(|ch| ch.status == Status::Fail).collect();
        assert!(!failed.is_empty(), "removing line {id} went unnoticed");
        assert!(failed.iter().all(|ch| ch.witness.as_deref().is_some_and(|w| !w.is_empty())));
    }
}

#[test]
fn battery_is_deterministic() {
    let c = common::complement("q:6:2", "line 0");
    let a = run_lemma_battery(&c, &BatteryOptions { seed: 9, ..BatteryOptions::default() });
    let b = run_lemma_battery(&c, &BatteryOptions { seed: 9, ..BatteryOptions::default() });
    assert_eq!(a.checks, b.checks);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn relabelled_copies_are_found_and_maps_compose(s1 in any::<u64>(), s2 in any::<u64>()) {
        let ps = common::space("q+:5:2");
        let a = ps.structure();
        let b = relabel(a, &shuffled(a.n_points(), s1), &shuffled(a.n_lines(), s1 ^ 1));
        let c = relabel(&b, &shuffled(a.n_points(), s2), &shuffled(a.n_lines(), s2 ^ 1));
        let ab = find_isomorphism(a, &b).unwrap();
        let bc = find_isomorphism(&b, &c).unwrap();
        prop_assert!(is_isomorphism(a, &b, &ab).unwrap().holds);
        prop_assert!(is_isomorphism(&b, &c, &bc).unwrap().holds);
        prop_assert!(is_isomorphism(a, &c, &ab.then(&bc)).unwrap().holds);
        prop_assert!(find_isomorphism(a, a).is_some());
    }
}

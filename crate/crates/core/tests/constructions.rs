use proptest::prelude::*;
use srblab::cascade::{build_cascade_map, default_geometry, embed_cascade, verify_cascade, CascadeAtoms, TriMatrix};
use srblab::horseshoe::{build_horseshoe_perturbation, verify_atom_tree, verify_horseshoe};
use srblab::qr_covering::{construct_qr_covered, verify_qr_covering};
use srblab::sampling::{random_pwa, rng};
use srblab::shrinking::{
    orbit_masses, orbit_measure, perturb_to_fixed_cluster, perturb_to_shrinking_cover, recheck, verify_cover,
    verify_fixed_cluster, verify_periodic_shrinking,
};
use srblab::{q, Interval, PwaMap, Rational, Verdict, DEFAULT_PIECE_CAP};

fn map_from(seed: u64) -> PwaMap {
    random_pwa(&mut rng(seed), 5, 12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn shrinking_covers_verify_and_stay_close(seed in any::<u64>(), q_ in 2u64..6, k in 2u64..6) {
        let f = map_from(seed);
        let eps = q(1, 8);
        let cover = perturb_to_shrinking_cover(&f, &eps, q_, k).unwrap();
        prop_assert!(verify_cover(&cover).is_accepted());
        prop_assert_eq!(cover.map.sup_distance(&f), cover.sup_distance.clone());
        prop_assert!(cover.sup_distance < &eps * Rational::integer(3));
        for c in &cover.intervals {
            let nu = orbit_measure(&cover.map, c).unwrap();
            let share = Rational::new(1, c.period as i64);
            prop_assert!(orbit_masses(&nu, c).iter().all(|m| *m == share));
        }
    }

    #[test]
    fn fixed_clusters_verify(seed in any::<u64>(), q_ in 1u64..6) {
        let f = map_from(seed);
        let cl = perturb_to_fixed_cluster(&f, q_, &q(1, 8)).unwrap();
        prop_assert!(verify_fixed_cluster(&cl).is_accepted());
        prop_assert!(cl.fixed_points.len() as u64 >= q_);
        for x in &cl.fixed_points {
            prop_assert_eq!(&cl.map.eval(x).unwrap(), x);
        }
    }

    #[test]
    fn qr_coverings_verify(seed in any::<u64>(), r in 1usize..3) {
        let f = map_from(seed);
        let qc = construct_qr_covered(&f, 3, r, &q(1, 8), DEFAULT_PIECE_CAP).unwrap();
        prop_assert!(verify_qr_covering(&qc.map, &qc.cover, DEFAULT_PIECE_CAP).unwrap().is_accepted());
        prop_assert!(qc.sup_distance < q(1, 8));
    }

    #[test]
    fn horseshoes_verify_at_every_fixed_point(seed in any::<u64>(), m in 2usize..4) {
        let f = map_from(seed);
        let comps = f.fixed_points_of_iterate(1, DEFAULT_PIECE_CAP).unwrap();
        for c in comps.iter().take(3) {
            let x0 = if c.interval.lo == c.interval.hi { c.interval.lo.clone() } else { c.interval.midpoint() };
            let hp = build_horseshoe_perturbation(&f, &x0, &q(1, 8), m, 4, 2).unwrap();
            prop_assert!(verify_horseshoe(&hp.map, &hp.horseshoe.intervals).is_accepted());
            prop_assert!(verify_atom_tree(&hp.map, &hp.tree).is_accepted());
            prop_assert!(hp.sup_distance < q(1, 8));
        }
    }
}

#[test]
fn tampered_certificates_are_refused() {
    let cover = perturb_to_shrinking_cover(&PwaMap::tent(), &q(1, 8), 4, 4).unwrap();
    let mut bad = cover.intervals[0].clone();
    bad.period += 1;
    assert!(!recheck(&cover.map, &bad).is_accepted());
    // Against the unperturbed tent the plateau certificates fail.
    assert!(cover.intervals.iter().any(|c| !recheck(&PwaMap::tent(), c).is_accepted()));
    let mut dropped = cover.clone();
    dropped.intervals.truncate(1);
    assert!(verify_cover(&dropped).refusal().unwrap().contains("deficiency"));
}

#[test]
fn expanding_interval_is_not_shrinking() {
    let iv = Interval::open(q(1, 4), q(3, 8));
    match verify_periodic_shrinking(&PwaMap::tent(), &iv, 1) {
        Verdict::Refused(_) => {}
        Verdict::Accepted(c) => panic!("accepted {c:?}"),
    }
    let plateau = PwaMap::from_nodes(vec![(q(0, 1), q(1, 2)), (q(1, 1), q(1, 2))]).unwrap();
    assert!(verify_periodic_shrinking(&plateau, &Interval::open(q(1, 4), q(3, 4)), 1).is_accepted());
}

#[test]
fn cascade_fixtures_reverify() {
    for (depth, text) in [
        (1, include_str!("../fixtures/cascade_depth1.json")),
        (2, include_str!("../fixtures/cascade_depth2.json")),
        (3, include_str!("../fixtures/cascade_depth3.json")),
    ] {
        let ca: CascadeAtoms = serde_json::from_str(text).unwrap();
        assert_eq!(ca.depth, depth);
        let report = verify_cascade(&ca);
        assert!(report.ok, "{:?}", report.violation);
        let (j, i, ip) = default_geometry();
        assert_eq!(build_cascade_map(&j, &i, &ip, depth).unwrap(), ca);
    }
}

#[test]
fn cascade_atoms_nest_under_projection() {
    let (j, i, ip) = default_geometry();
    let ca = build_cascade_map(&j, &i, &ip, 3).unwrap();
    for t in TriMatrix::all(3) {
        let child = ca.atom(&t).unwrap();
        let parent = ca.atom(&t.project().unwrap()).unwrap();
        assert!(child.is_subset_of(&parent.interior()), "{t}");
    }
}

#[test]
fn cascade_embeds_near_a_random_map() {
    let mut embedded = 0;
    for seed in 0..12 {
        let f = map_from(900 + seed);
        let eps = q(1, 8);
        let interior = f.fixed_points_of_iterate(1, DEFAULT_PIECE_CAP).unwrap().iter().any(|c| {
            c.interval.hi.is_positive() && c.interval.lo < Rational::one()
        });
        match embed_cascade(&f, &eps, 2) {
            Ok(emb) => {
                assert!(emb.sup_distance < eps, "seed {seed}");
                assert!(verify_cascade(&emb.cascade).ok, "seed {seed}");
                embedded += 1;
            }
            Err(e) => assert!(!interior, "seed {seed}: {e}"),
        }
    }
    assert!(embedded >= 6);
}

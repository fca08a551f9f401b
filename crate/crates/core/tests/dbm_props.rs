mod common;

use common::*;
use mplreach::num::{rat, Rat};
use mplreach::{Constraint, Dbm};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const N: usize = 3;

fn nonempty(cs: &[Constraint]) -> Option<Dbm> {
    Dbm::from_constraints_canonical(N, cs, true).unwrap()
}

fn affine() -> impl Strategy<Value = (Vec<usize>, Vec<Rat>)> {
    (
        proptest::collection::vec(0..N, N),
        proptest::collection::vec((-6i64..=6).prop_map(rat), N),
    )
}

fn apply(g: &[usize], a: &[Rat], x: &[Rat]) -> Vec<Rat> {
    g.iter().zip(a).map(|(&gi, &ai)| x[gi] + ai).collect()
}

proptest! {
    #[test]
    fn membership_matches_constraints(cs in constraints(N, 6, true), x in point(N)) {
        let raw = Dbm::from_constraints(N, &cs, true).unwrap();
        let expected = cs.iter().all(|c| c.holds(&x));
        prop_assert_eq!(raw.contains(&x), expected);
        match raw.canonicalize() {
            Some(d) => {
                prop_assert!(d.is_canonical());
                prop_assert_eq!(d.contains(&x), expected);
            }
            None => prop_assert!(!expected),
        }
    }

    #[test]
    fn listing_round_trips(cs in constraints(N, 6, true)) {
        if let Some(d) = nonempty(&cs) {
            let listed = d.constraints();
            prop_assert_eq!(nonempty(&listed), Some(d.clone()));
            let reparsed = Dbm::parse_set(&d.to_set_text(), N, true).unwrap();
            prop_assert_eq!(reparsed, Some(d.clone()));
            // no listed constraint is implied by the others
            for k in 0..listed.len() {
                let mut rest = listed.clone();
                rest.remove(k);
                prop_assert_ne!(nonempty(&rest), Some(d.clone()));
            }
        }
    }

    #[test]
    fn closed_intersection_agrees(a in constraints(N, 5, true), b in constraints(N, 5, true), x in point(N)) {
        if let (Some(p), Some(q)) = (nonempty(&a), nonempty(&b)) {
            let full = p.intersect(&q).unwrap();
            prop_assert_eq!(p.intersect_closed(&q).unwrap(), full.clone());
            prop_assert_eq!(full.as_ref().is_some_and(|d| d.contains(&x)), p.contains(&x) && q.contains(&x));
        }
    }

    #[test]
    fn constrain_matches_batch(cs in constraints(N, 6, true)) {
        let mut inc = Some(Dbm::universe(N));
        for c in &cs {
            if let Some(d) = inc.as_mut() {
                if !d.constrain_with(c) {
                    inc = None;
                }
            }
        }
        prop_assert_eq!(inc, nonempty(&cs));
    }

    #[test]
    fn image_contains_mapped_points(cs in constraints(N, 5, false), (g, a) in affine(), seed in any::<u64>()) {
        if let Some(d) = nonempty(&cs) {
            let img = d.image_affine(&g, &a).unwrap().unwrap();
            prop_assert_eq!(Some(img.clone()), d.image_affine_lifted(&g, &a).unwrap());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..5 {
                let x = d.sample_point(&mut rng);
                prop_assert!(d.contains(&x));
                prop_assert!(img.contains(&apply(&g, &a, &x)));
            }
        }
    }

    #[test]
    fn image_is_tight(cs in constraints(N, 5, false), (g, a) in affine(), y in point(N)) {
        // y lies in the image iff some preimage point exists: solve with a DBM over x
        if let Some(d) = nonempty(&cs) {
            let img = d.image_affine(&g, &a).unwrap().unwrap();
            let mut fiber = d.clone();
            let mut consistent = true;
            for i in 0..N {
                // x_{g_i} = y_i − a_i, as differences against other fixed coordinates
                for j in 0..N {
                    let (gi, gj) = (g[i], g[j]);
                    let want = (y[i] - a[i]) - (y[j] - a[j]);
                    if gi == gj {
                        consistent &= want == rat(0);
                    } else {
                        let c = Constraint::new(gi + 1, gj + 1, mplreach::Rel::Eq, want);
                        consistent &= fiber.constrain_with(&c);
                    }
                }
            }
            prop_assert_eq!(img.contains(&y), consistent);
        }
    }

    #[test]
    fn preimage_adjunction(cs in constraints(N, 5, false), (g, a) in affine(), x in point(N)) {
        if let Some(d) = nonempty(&cs) {
            let inside = d.contains(&apply(&g, &a, &x));
            match d.preimage_affine(&g, &a).unwrap() {
                Some(pre) => prop_assert_eq!(pre.contains(&x), inside),
                None => prop_assert!(!inside),
            }
        }
    }

    #[test]
    fn shift_invariance(cs in constraints(N, 5, false), x in point(N), t in -10i64..=10) {
        let d = Dbm::from_constraints(N, &cs, false).unwrap();
        let moved: Vec<Rat> = x.iter().map(|v| v + rat(t)).collect();
        prop_assert_eq!(d.contains(&x), d.contains(&moved));
    }

    #[test]
    fn inclusion_is_sound(a in constraints(N, 4, true), b in constraints(N, 4, true), x in point(N)) {
        if let (Some(p), Some(q)) = (nonempty(&a), nonempty(&b)) {
            if p.includes(&q) && q.contains(&x) {
                prop_assert!(p.contains(&x));
            }
            let both = p.intersect(&q).unwrap();
            if let Some(r) = both {
                prop_assert!(p.includes(&r) && q.includes(&r));
            }
        }
    }
}

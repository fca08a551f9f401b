mod common;

use common::*;
use mplreach::pwa::pwa_generate;
use mplreach::Dbm;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn regions_cover_and_simulate(a in any_regular_matrix(4), xs in proptest::collection::vec(point(4), 8)) {
        let n = a.dim();
        let pwa = pwa_generate(&a).unwrap();
        for x in xs {
            let x = &x[..n];
            let step = naive_step(&a, x);
            let hits: Vec<_> = pwa.regions.iter().filter(|r| r.region.contains(x)).collect();
            prop_assert!(!hits.is_empty(), "point outside every region");
            for r in hits {
                prop_assert_eq!(r.apply(x), step.clone());
            }
        }
    }

    #[test]
    fn regions_are_nonempty_sorted_and_well_formed(a in any_regular_matrix(4)) {
        let pwa = pwa_generate(&a).unwrap();
        prop_assert!(pwa.regions.windows(2).all(|w| w[0].g < w[1].g));
        for r in &pwa.regions {
            prop_assert!(r.region.is_canonical());
            prop_assert!(!r.region.is_empty());
            prop_assert!(!r.region.has_single_variable_constraints());
            for (i, &gi) in r.g.iter().enumerate() {
                prop_assert_eq!(Some(r.offsets[i]), a.get(i, gi).value());
            }
        }
    }

    #[test]
    fn every_feasible_choice_is_listed(a in regular_matrix(3)) {
        // brute force over all column choices: the region is non-empty iff listed
        let pwa = pwa_generate(&a).unwrap();
        let cols: Vec<Vec<usize>> = (0..3).map(|i| a.finite_columns(i).collect()).collect();
        let mut expected = Vec::new();
        for &g0 in &cols[0] {
            for &g1 in &cols[1] {
                for &g2 in &cols[2] {
                    let g = [g0, g1, g2];
                    let mut d = Dbm::universe(3);
                    let mut ok = true;
                    for (i, &gi) in g.iter().enumerate() {
                        let best = a.get(i, gi).value().unwrap();
                        for &j in &cols[i] {
                            let c = mplreach::Constraint::new(gi + 1, j + 1, mplreach::Rel::Ge, a.get(i, j).value().unwrap() - best);
                            if j != gi {
                                ok &= d.constrain_with(&c);
                            }
                        }
                    }
                    if ok {
                        expected.push(g.to_vec());
                    }
                }
            }
        }
        let got: Vec<Vec<usize>> = pwa.regions.iter().map(|r| r.g.clone()).collect();
        prop_assert_eq!(got, expected);
    }
}

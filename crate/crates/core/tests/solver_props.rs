mod common;

use common::*;
use mplreach::difflogic::{dbm_to_formula, encode_step, DLAtom, DLFormula, DLVar};
use mplreach::dlsolver::{solve, SatVerdict, SolverContext};
use mplreach::num::{rat, Rat};
use mplreach::Dbm;
use proptest::prelude::*;

fn check_model(fs: &[DLFormula], v: &SatVerdict) -> bool {
    match v {
        SatVerdict::Sat(m) => fs.iter().all(|f| m.satisfies(f)),
        SatVerdict::Unsat => true,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn conjunctions_match_bellman_ford(atoms in proptest::collection::vec(dl_atom(4, 2), 0..14)) {
        let fs: Vec<DLFormula> = atoms.iter().copied().map(DLFormula::Atom).collect();
        let v = solve(&fs).unwrap();
        prop_assert_eq!(v.is_sat(), bellman_ford_sat(&atoms));
        prop_assert!(check_model(&fs, &v));
    }

    #[test]
    fn formulas_match_expansion(fs in proptest::collection::vec(dl_formula(3, 2), 1..4)) {
        let v = solve(&fs).unwrap();
        prop_assert_eq!(v.is_sat(), brute_force_sat(&fs));
        prop_assert!(check_model(&fs, &v));
    }

    #[test]
    fn push_pop_matches_fresh_solving(
        ops in proptest::collection::vec(prop_oneof![
            3 => dl_formula(3, 2).prop_map(Some),
            1 => Just(None),
        ], 1..12)
    ) {
        let mut ctx = SolverContext::new();
        let mut stack: Vec<DLFormula> = Vec::new();
        for op in ops {
            match op {
                Some(f) => {
                    ctx.push(f.clone());
                    stack.push(f);
                }
                None => {
                    prop_assert_eq!(ctx.pop().ok(), stack.pop());
                }
            }
            let inc = ctx.check().unwrap();
            let fresh = solve(&stack).unwrap();
            prop_assert_eq!(inc.is_sat(), fresh.is_sat());
            prop_assert!(check_model(&stack, &inc));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn step_models_are_max_plus_steps(a in any_regular_matrix(4), x in point(4), bump in 0usize..4) {
        let n = a.dim();
        let x = &x[..n];
        let step = encode_step(&a, 0, 1).unwrap();
        let y = naive_step(&a, x);
        let value = |v: DLVar, y: &[Rat]| match v.stage {
            0 => x[v.index - 1],
            _ => y[v.index - 1],
        };
        prop_assert!(step.holds(&|v| value(v, &y)));
        let mut off = y.clone();
        off[bump % n] += Rat::new(1, 2);
        prop_assert!(!step.holds(&|v| value(v, &off)));
        // pinning the start state forces the successor
        let mut fs = vec![step];
        for i in 1..=n {
            fs.push(DLFormula::Atom(DLAtom::eq(DLVar::new(i, 0), DLVar::zero(), x[i - 1])));
        }
        let SatVerdict::Sat(m) = solve(&fs).unwrap() else { panic!("step is satisfiable") };
        prop_assert_eq!(m.state(n, 1).unwrap(), y);
    }

    #[test]
    fn set_formulas_match_membership(cs in constraints(3, 5, true), x in point(3), stage in -3i64..3) {
        if let Some(d) = Dbm::from_constraints_canonical(3, &cs, true).unwrap() {
            let f = dbm_to_formula(&d, stage, true).unwrap();
            let holds = f.holds(&|v: DLVar| if v.is_zero() { rat(0) } else { x[v.index - 1] });
            prop_assert_eq!(holds, d.contains(&x));
            prop_assert_eq!(dbm_to_formula(&d, 0, true).unwrap().subs(0, stage), f);
        }
    }
}

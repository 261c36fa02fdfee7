use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::game::random::{random_monotone_game, random_set_cover_game};
use crate::game::rational::{int, ratio};
use crate::game::{shift_transform, AdditiveGame, TableGame};
use crate::setcover::{fixture, fractional_game, SetCoverGame};

fn all(n: usize) -> Vec<Coalition> {
    Coalition::all_nonempty(n).collect()
}

fn c(members: &[usize]) -> Coalition {
    Coalition::from_members(members.iter().copied()).unwrap()
}

#[test]
fn triangle_nucleoli() {
    let g = SetCoverGame::new(fixture("triangle").unwrap());
    let fam = all(3);
    assert_eq!(total_value(&g, &fam, TotalValueMode::Happy).unwrap(), ratio(3, 2));
    let nuc = mps_run(&g, &fam, TotalValueMode::Nucleolus).unwrap();
    assert_eq!(nuc.allocation.values(), &[ratio(2, 3), ratio(2, 3), ratio(2, 3)]);
    let happy = mps_run(&g, &fam, TotalValueMode::Happy).unwrap();
    assert_eq!(happy.allocation.values(), &[ratio(1, 2), ratio(1, 2), ratio(1, 2)]);
    assert_eq!(bruteforce_lexi(&g, TotalValueMode::Nucleolus).unwrap(), nuc.allocation);
    assert_eq!(bruteforce_lexi(&g, TotalValueMode::Happy).unwrap(), happy.allocation);
}

#[test]
fn first_stage_lp_shape() {
    let g = SetCoverGame::new(fixture("triangle").unwrap());
    let state = MpsState::new(3, int(2));
    let lp = build_stage_lp(&state, &all(3), &g).unwrap();
    let eq = lp.rows.iter().filter(|r| r.relation == Relation::Eq).count();
    let le = lp.rows.iter().filter(|r| r.relation == Relation::Le).count();
    // the grand coalition is in the span from the start
    assert_eq!((eq, le), (1, 6));
    let sol = crate::lp::solve(&lp).unwrap();
    assert_eq!(sol.primal[0], ratio(-1, 3));
}

#[test]
fn full_rank_state_has_no_inequalities() {
    let g = SetCoverGame::new(fixture("triangle").unwrap());
    let mut state = MpsState::new(3, int(2));
    state.fix(c(&[0]), int(0)).unwrap();
    state.fix(c(&[1]), int(0)).unwrap();
    assert!(state.is_complete());
    let lp = build_stage_lp(&state, &all(3), &g).unwrap();
    assert!(lp.rows.iter().all(|r| r.relation == Relation::Eq));
}

#[test]
fn three_triangles_values() {
    let g = SetCoverGame::new(fixture("three_triangles").unwrap());
    let fam = all(9);
    assert_eq!(total_value(&g, &fam, TotalValueMode::Happy).unwrap(), ratio(9, 2));
    assert_eq!(total_value(&g, &fam, TotalValueMode::Nucleolus).unwrap(), int(5));
    let nuc = mps_run(&g, &fam, TotalValueMode::Nucleolus).unwrap();
    assert_eq!(nuc.stages[0].xi, ratio(-2, 5));
    for p in 0..9 {
        let want = if (3..6).contains(&p) { ratio(7, 15) } else { ratio(3, 5) };
        assert_eq!(nuc.allocation.get(p), &want, "player {p}");
    }
    let happy = mps_run(&g, &fam, TotalValueMode::Happy).unwrap();
    assert!(happy.allocation.values().iter().all(|v| *v == ratio(1, 2)));
}

#[test]
fn frac_dominated_values() {
    let inst = fixture("frac_dominated").unwrap();
    let fam = all(6);
    let g = SetCoverGame::new(inst.clone());
    let happy = mps_run(&g, &fam, TotalValueMode::Happy).unwrap();
    for p in 0..6 {
        let want = if p % 2 == 1 { ratio(16, 3) } else { ratio(14, 3) };
        assert_eq!(happy.allocation.get(p), &want, "player {p}");
    }
    let fg = fractional_game(inst);
    let nuc = mps_run(&fg, &fam, TotalValueMode::Nucleolus).unwrap();
    assert!(nuc.allocation.values().iter().all(|v| *v == int(5)));
}

#[test]
fn additive_game_both_modes() {
    let g = AdditiveGame::new(vec![int(1), int(4), int(2)]);
    for mode in [TotalValueMode::Nucleolus, TotalValueMode::Happy] {
        let run = mps_run(&g, &all(3), mode).unwrap();
        assert_eq!(run.total_value, int(7));
        assert_eq!(run.allocation.values(), &[int(1), int(4), int(2)]);
    }
}

#[test]
fn single_player() {
    let g = TableGame::new(1, vec![int(0), int(5)]).unwrap();
    for mode in [TotalValueMode::Nucleolus, TotalValueMode::Happy] {
        assert_eq!(mps_run(&g, &all(1), mode).unwrap().allocation.values(), &[int(5)]);
        assert_eq!(bruteforce_lexi(&g, mode).unwrap().values(), &[int(5)]);
    }
}

#[test]
fn sparse_family_is_rejected_in_happy_mode() {
    let g = SetCoverGame::new(fixture("triangle").unwrap());
    let err = total_value(&g, &[c(&[0, 1])], TotalValueMode::Happy).unwrap_err();
    assert!(matches!(err, Error::InsufficientFamily(_)));
}

fn check_run_invariants<G: Game>(g: &G, run: &MpsRun) {
    let n = g.n();
    assert!(run.stages.len() <= n);
    assert!(run.state.is_complete());
    assert_eq!(run.allocation.total(), run.total_value);
    for w in run.stages.windows(2) {
        assert!(w[0].xi <= w[1].xi, "stage values must not decrease");
    }
    for f in &run.state.fixed {
        assert_eq!(g.cost(f.coalition) - run.allocation.sum_over(f.coalition), f.excess);
    }
    if run.mode == TotalValueMode::Happy {
        for s in Coalition::all_nonempty(n) {
            assert!(run.allocation.sum_over(s) <= g.cost(s));
        }
    }
}

#[test]
fn agrees_with_reference_on_random_games() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for round in 0..40 {
        let n = rng.gen_range(2..=5);
        let g = if round % 2 == 0 {
            random_monotone_game(n, 6, &mut rng).unwrap()
        } else {
            random_set_cover_game(n, n + 2, 6, &mut rng).unwrap()
        };
        for mode in [TotalValueMode::Nucleolus, TotalValueMode::Happy] {
            let run = mps_run(&g, &all(n), mode).unwrap();
            check_run_invariants(&g, &run);
            assert_eq!(run.allocation, bruteforce_lexi(&g, mode).unwrap(), "round {round} {mode:?}");
        }
    }
}

#[test]
fn shifts_move_the_nucleolus() {
    let g = SetCoverGame::new(fixture("triangle").unwrap());
    let shifts = vec![int(-1); 3];
    let base = mps_run(&g, &all(3), TotalValueMode::Nucleolus).unwrap().allocation;
    let shifted = shift_transform(&g, shifts.clone()).unwrap();
    let moved = mps_run(&shifted, &all(3), TotalValueMode::Nucleolus).unwrap().allocation;
    assert_eq!(moved, base.shifted(&shifts).unwrap());
    assert!(moved.values().iter().all(|v| *v == ratio(-1, 3)));
}

#[test]
fn least_core_values() {
    let tri = SetCoverGame::new(fixture("triangle").unwrap());
    let lc = least_core(&tri, &all(3)).unwrap();
    assert_eq!(lc.epsilon, ratio(1, 3));
    assert!(lc.witness.values().iter().all(|v| *v == ratio(2, 3)));
    let add = AdditiveGame::new(vec![int(1), int(2)]);
    assert!(least_core(&add, &all(2)).unwrap().epsilon <= int(0));
    let fig = SetCoverGame::new(fixture("three_triangles").unwrap());
    assert_eq!(least_core(&fig, &all(9)).unwrap().epsilon, ratio(2, 5));
}

#[test]
fn core_memberships() {
    let g = SetCoverGame::new(fixture("three_triangles").unwrap());
    let fam = all(9);
    let nuc = mps_run(&g, &fam, TotalValueMode::Nucleolus).unwrap().allocation;
    let ext = core_membership(&g, &nuc, &fam, CoreKind::ExtendedHappyCore).unwrap();
    assert!(!ext.member);
    assert_eq!(ext.certificate, Membership::NoDominatedHappyPoint);
    let half = Allocation::uniform(9, ratio(1, 2));
    assert!(core_membership(&g, &half, &fam, CoreKind::HappyCore).unwrap().member);
    let add = AdditiveGame::new(vec![int(1), int(2)]);
    let w = Allocation::new(vec![int(1), int(2)]);
    assert!(core_membership(&add, &w, &all(2), CoreKind::Core).unwrap().member);
    assert!(core_membership(&add, &w, &all(2), CoreKind::ExtendedHappyCore).unwrap().member);
    let bad = Allocation::new(vec![int(3), int(0)]);
    let check = core_membership(&add, &bad, &all(2), CoreKind::Core).unwrap();
    assert!(matches!(check.certificate, Membership::Violated { coalition, .. } if coalition == c(&[0])));
}

#[test]
fn trace_serializes_with_member_lists() {
    let g = SetCoverGame::new(fixture("triangle").unwrap());
    let run = mps_run(&g, &all(3), TotalValueMode::Happy).unwrap();
    let json = serde_json::to_value(&run).unwrap();
    assert_eq!(json["total_value"], "3/2");
    assert!(json["stages"][0]["fixed"][0].is_array());
}

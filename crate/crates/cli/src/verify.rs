//! `verify-paper`: the counterexamples separating the nucleolus, the happy
//! nucleolus and the nucleolus of the fractional game, checked exactly.

use serde::{Deserialize, Serialize};

use nucleolus::game::rational::{format_rational, int, ratio};
use nucleolus::game::{Allocation, Coalition, Game, Rational};
use nucleolus::mps::{core_membership, least_core, mps_run, total_value, CoreKind, TotalValueMode};
use nucleolus::setcover::{fractional_cost, fractional_game, SetCoverGame, SetCoverInstance, FRAC_DOMINATED_SET};

use crate::error::CliResult;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub name: String,
    pub outcome: Outcome,
    pub detail: String,
}

impl Claim {
    fn check(name: &str, ok: bool, detail: String) -> Self {
        Claim {
            name: name.to_string(),
            outcome: if ok { Outcome::Pass } else { Outcome::Fail },
            detail,
        }
    }

    pub fn line(&self) -> String {
        let tag = match self.outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Skip => "SKIP",
        };
        if self.detail.is_empty() {
            format!("{tag} {}", self.name)
        } else {
            format!("{tag} {}: {}", self.name, self.detail)
        }
    }
}

/// The three instances the claims are about.
pub struct Fixtures {
    pub triangle: SetCoverInstance,
    pub three_triangles: SetCoverInstance,
    pub frac_dominated: SetCoverInstance,
}

fn all(n: usize) -> Vec<Coalition> {
    Coalition::all_nonempty(n).collect()
}

fn show(y: &Allocation) -> String {
    let v: Vec<String> = y.values().iter().map(format_rational).collect();
    format!("[{}]", v.join(", "))
}

fn uniform(y: &Allocation, v: &Rational) -> bool {
    y.values().iter().all(|x| x == v)
}

fn nucleoli<G: Game>(game: &G) -> CliResult<(Allocation, Allocation)> {
    let fam = all(game.n());
    let nuc = mps_run(game, &fam, TotalValueMode::Nucleolus)?.allocation;
    let happy = mps_run(game, &fam, TotalValueMode::Happy)?.allocation;
    Ok((nuc, happy))
}

fn triangle_claims(inst: &SetCoverInstance, out: &mut Vec<Claim>) -> CliResult<()> {
    let (nuc, happy) = nucleoli(&SetCoverGame::new(inst.clone()))?;
    out.push(Claim::check(
        "triangle: nucleolus is 2/3 for every player",
        uniform(&nuc, &ratio(2, 3)),
        show(&nuc),
    ));
    out.push(Claim::check(
        "triangle: happy nucleolus is 1/2 for every player",
        uniform(&happy, &ratio(1, 2)),
        show(&happy),
    ));
    Ok(())
}

fn three_triangles_claims(inst: &SetCoverInstance, out: &mut Vec<Claim>) -> CliResult<()> {
    let game = SetCoverGame::new(inst.clone());
    let fam = all(game.n());
    let (nuc, happy) = nucleoli(&game)?;
    let vh = total_value(&game, &fam, TotalValueMode::Happy)?;
    out.push(Claim::check(
        "three triangles: happy nucleolus is 1/2 for every player with total 9/2",
        uniform(&happy, &ratio(1, 2)) && vh == ratio(9, 2),
        format!("{} with total {}", show(&happy), format_rational(&vh)),
    ));
    let expected: Vec<Rational> = (0..9)
        .map(|p| if (3..6).contains(&p) { ratio(7, 15) } else { ratio(3, 5) })
        .collect();
    out.push(Claim::check(
        "three triangles: nucleolus is 3/5 on p1-p3 and p7-p9, 7/15 on p4-p6",
        nuc.len() == 9 && nuc.values() == expected.as_slice(),
        show(&nuc),
    ));
    let lc = least_core(&game, &fam)?;
    out.push(Claim::check(
        "three triangles: least-core epsilon is 2/5",
        lc.epsilon == ratio(2, 5),
        format_rational(&lc.epsilon),
    ));
    let ext = core_membership(&game, &nuc, &fam, CoreKind::ExtendedHappyCore)?;
    out.push(Claim::check(
        "three triangles: the nucleolus lies outside the extended happy core",
        !ext.member,
        format!("{:?}", ext.certificate),
    ));
    Ok(())
}

fn frac_claims(inst: &SetCoverInstance, perturb: u32, out: &mut Vec<Claim>) -> CliResult<()> {
    let n = inst.n();
    let left = Coalition::from_members([0, 1, 2])?;
    let right = Coalition::from_members([3, 4, 5])?;
    let cl = fractional_cost(inst, left)?;
    let cr = fractional_cost(inst, right)?;
    out.push(Claim::check(
        "fractional costs of {p1,p2,p3} and {p4,p5,p6} are both 17",
        cl == int(17) && cr == int(17),
        format!("{} and {}", format_rational(&cl), format_rational(&cr)),
    ));
    let frac = fractional_game(inst.clone());
    let dominated = frac.fractionally_dominated()?;
    out.push(Claim::check(
        "the cost-18 set is fractionally dominated",
        dominated.iter().any(|(i, _)| *i == FRAC_DOMINATED_SET),
        format!("dominated set indices {:?}", dominated.iter().map(|d| d.0).collect::<Vec<_>>()),
    ));
    let fam = all(n);
    let happy = mps_run(&SetCoverGame::new(inst.clone()), &fam, TotalValueMode::Happy)?.allocation;
    let split: Vec<Rational> = (0..6)
        .map(|p| if p % 2 == 1 { ratio(16, 3) } else { ratio(14, 3) })
        .collect();
    out.push(Claim::check(
        "happy nucleolus is 5+1/3 on p2,p4,p6 and 5-1/3 on p1,p3,p5",
        happy.len() == 6 && happy.values() == split.as_slice(),
        show(&happy),
    ));
    let fnuc = mps_run(&frac, &fam, TotalValueMode::Nucleolus)?.allocation;
    out.push(Claim::check(
        "nucleolus of the fractional game is 5 for every player",
        uniform(&fnuc, &int(5)),
        show(&fnuc),
    ));
    if perturb == 0 {
        out.push(Claim {
            name: "changing the cost-18 set changes the happy nucleolus".into(),
            outcome: Outcome::Skip,
            detail: "perturbation 0".into(),
        });
        return Ok(());
    }
    let base = inst.sets()[FRAC_DOMINATED_SET].1.clone();
    let k = int(i64::from(perturb));
    for (label, cost) in [("lowering", base.clone() - &k), ("raising", base.clone() + &k)] {
        let changed = inst.with_cost(FRAC_DOMINATED_SET, cost.clone())?;
        let moved = mps_run(&SetCoverGame::new(changed.clone()), &fam, TotalValueMode::Happy)?.allocation;
        out.push(Claim::check(
            &format!("{label} the cost-18 set to {} changes the happy nucleolus", format_rational(&cost)),
            moved != happy,
            show(&moved),
        ));
        if cost > base {
            let moved_frac = mps_run(&fractional_game(changed), &fam, TotalValueMode::Nucleolus)?.allocation;
            out.push(Claim::check(
                &format!("{label} the cost-18 set to {} keeps the fractional nucleolus at 5", format_rational(&cost)),
                uniform(&moved_frac, &int(5)),
                show(&moved_frac),
            ));
        }
    }
    Ok(())
}

/// Checks every claim; instance errors abort, failed claims do not.
pub fn verify(fixtures: &Fixtures, perturb: u32) -> CliResult<Vec<Claim>> {
    let mut out = Vec::new();
    triangle_claims(&fixtures.triangle, &mut out)?;
    three_triangles_claims(&fixtures.three_triangles, &mut out)?;
    frac_claims(&fixtures.frac_dominated, perturb, &mut out)?;
    Ok(out)
}

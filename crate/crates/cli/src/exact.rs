//! `exact`: the (happy) nucleolus of an explicit, set covering or routing
//! game with rational arithmetic.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use nucleolus::game::io::ExplicitGameFile;
use nucleolus::game::rational::format_rational;
use nucleolus::game::{Coalition, Game, ENUMERATION_LIMIT};
use nucleolus::mps::{mps_run, MpsRun, TotalValueMode};
use nucleolus::setcover::{self, fractional_game, SetCoverGame, SetCoverInstance};
use nucleolus::vrp::{exact_happy_nucleolus_smallcap, VrpInstance};

use crate::error::{CliError, CliResult};

pub enum GameInput {
    Explicit(ExplicitGameFile),
    SetCover(SetCoverInstance),
    Vrp(VrpInstance),
}

impl GameInput {
    pub fn kind(&self) -> &'static str {
        match self {
            GameInput::Explicit(_) => "explicit",
            GameInput::SetCover(_) => "set_cover",
            GameInput::Vrp(_) => "vrp",
        }
    }
}

/// Picks the game type from the top-level keys of a JSON object.
pub fn detect(text: &str) -> CliResult<GameInput> {
    let value: Value = serde_json::from_str(text)?;
    let Value::Object(map) = &value else {
        return Err(CliError::Input("expected a JSON object at the top level".into()));
    };
    let explicit = map.contains_key("costs");
    let cover = map.contains_key("sets");
    let vrp = map.contains_key("depot") || map.contains_key("points");
    match (explicit, cover, vrp) {
        (true, false, false) => Ok(GameInput::Explicit(serde_json::from_str(text)?)),
        (false, true, false) => Ok(GameInput::SetCover(setcover::from_json(text)?)),
        (false, false, true) => Ok(GameInput::Vrp(VrpInstance::from_json(text)?)),
        (false, false, false) => Err(CliError::Input(
            "unrecognized game file: expected \"costs\" (explicit game), \"sets\" (set cover) or \"depot\"/\"points\" (routing)"
                .into(),
        )),
        _ => Err(CliError::Input("ambiguous game file: keys of more than one game type present".into())),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageOutput {
    pub xi: String,
    pub fixed: Vec<Vec<usize>>,
}

/// Allocation JSON of the exact path; numbers are `"p/q"` strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactOutput {
    pub game: String,
    pub mode: TotalValueMode,
    pub fractional: bool,
    pub values: Vec<String>,
    pub total: String,
    pub stage_count: usize,
    pub stages: Vec<StageOutput>,
}

fn run_game<G: Game>(game: &G, mode: TotalValueMode) -> CliResult<MpsRun> {
    let n = game.n();
    if n > ENUMERATION_LIMIT {
        return Err(nucleolus::Error::SizeGuard {
            guard: "exact coalition enumeration",
            limit: ENUMERATION_LIMIT,
            actual: n,
        }
        .into());
    }
    let family: Vec<Coalition> = Coalition::all_nonempty(n).collect();
    Ok(mps_run(game, &family, mode)?)
}

fn from_run(game: &str, fractional: bool, run: &MpsRun) -> ExactOutput {
    ExactOutput {
        game: game.to_string(),
        mode: run.mode,
        fractional,
        values: run.allocation.values().iter().map(format_rational).collect(),
        total: format_rational(&run.total_value),
        stage_count: run.stages.len(),
        stages: run
            .stages
            .iter()
            .map(|s| StageOutput {
                xi: format_rational(&s.xi),
                fixed: s.fixed.iter().map(|c| c.members().collect()).collect(),
            })
            .collect(),
    }
}

pub fn solve(input: GameInput, mode: TotalValueMode, fractional: bool) -> CliResult<ExactOutput> {
    let kind = input.kind();
    if fractional && !matches!(input, GameInput::SetCover(_)) {
        return Err(CliError::Input("--fractional needs a set cover game".into()));
    }
    match input {
        GameInput::Explicit(file) => {
            let game = file.into_game()?;
            Ok(from_run(kind, false, &run_game(&game, mode)?))
        }
        GameInput::SetCover(inst) if fractional => Ok(from_run(kind, true, &run_game(&fractional_game(inst), mode)?)),
        GameInput::SetCover(inst) => Ok(from_run(kind, false, &run_game(&SetCoverGame::new(inst), mode)?)),
        GameInput::Vrp(inst) => {
            if mode != TotalValueMode::Happy {
                return Err(CliError::Input("routing games are solved in happy mode only".into()));
            }
            let reference = exact_happy_nucleolus_smallcap(&inst)?;
            Ok(ExactOutput {
                game: kind.to_string(),
                mode,
                fractional: false,
                values: reference.allocation.iter().map(format_rational).collect(),
                total: format_rational(&reference.total),
                stage_count: reference.stages,
                stages: Vec::new(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_each_schema() {
        let explicit = r#"{"n": 1, "costs": [{"coalition": [0], "cost": "2"}]}"#;
        let cover = r#"{"n": 1, "sets": [{"members": [0], "cost": "2"}]}"#;
        let vrp = r#"{"depot": [0, 0], "points": [[1, 0]], "capacity": 1}"#;
        assert_eq!(detect(explicit).unwrap().kind(), "explicit");
        assert_eq!(detect(cover).unwrap().kind(), "set_cover");
        assert_eq!(detect(vrp).unwrap().kind(), "vrp");
    }

    #[test]
    fn rejects_ambiguous_and_unknown_files() {
        let both = r#"{"n": 1, "costs": [], "sets": []}"#;
        assert!(matches!(detect(both), Err(CliError::Input(m)) if m.contains("ambiguous")));
        assert!(matches!(detect(r#"{"n": 1}"#), Err(CliError::Input(_))));
        assert!(matches!(detect("[1, 2]"), Err(CliError::Input(_))));
        assert!(matches!(detect("{\"n\": "), Err(CliError::Input(m)) if m.contains("line 1")));
    }

    #[test]
    fn single_player_explicit_game() {
        let input = detect(r#"{"n": 1, "costs": [{"coalition": [0], "cost": "7/2"}]}"#).unwrap();
        let out = solve(input, TotalValueMode::Nucleolus, false).unwrap();
        assert_eq!(out.values, vec!["7/2"]);
    }
}

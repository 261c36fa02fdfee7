//! Fair cost allocation in cooperative games.
//!
//! The crate computes the nucleolus and the happy nucleolus of cost games.
//! Small games are solved exactly with rational arithmetic through the
//! Maschler–Peleg–Shapley scheme ([`mps`]); vehicle routing games of
//! realistic size are handled by a constraint-generation heuristic ([`vrp`])
//! built on a subspace-avoiding prize-collecting reduction ([`subspace`]) and
//! an approximate packing-LP solver ([`packing`]).
//!
//! ```
//! use nucleolus::mps::{mps_run, TotalValueMode};
//! use nucleolus::setcover::{fixture, SetCoverGame};
//! use nucleolus::game::{Coalition, Rational};
//!
//! let game = SetCoverGame::new(fixture("triangle").unwrap());
//! let family = Coalition::all_nonempty(3).collect::<Vec<_>>();
//! let run = mps_run(&game, &family, TotalValueMode::Happy).unwrap();
//! assert!(run.allocation.values().iter().all(|v| *v == Rational::new(1.into(), 2.into())));
//! ```

pub mod error;
pub mod game;
pub mod lp;
pub mod mps;
pub mod packing;
pub mod setcover;
pub mod subspace;
pub mod vrp;

pub use error::{Error, Result};
pub use game::{Allocation, Coalition, Game, Rational};

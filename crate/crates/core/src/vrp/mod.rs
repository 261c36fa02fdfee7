//! Vehicle routing games with a fixed tour capacity.
//!
//! The cost of a coalition is the length of the cheapest set of
//! depot-anchored walks, each serving at most `capacity` players, that
//! visits every member. Coalitions one walk can serve are tours; the happy
//! nucleolus is determined by the excesses of tours alone.
//!
//! [`run_heuristic`] is the constraint-generation heuristic for large
//! instances; [`exact_happy_nucleolus_smallcap`] enumerates all tours and
//! runs the exact scheme, which is feasible for small capacities.

mod exact;
mod generate;
mod heuristic;
mod instance;
mod io;
mod pool;
mod postopt;
mod stage;

pub use exact::{exact_happy_nucleolus_smallcap, ExactReference, TourFamily, SMALLCAP_LIMIT};
pub use generate::{covering_tours, generate_tours};
pub use heuristic::{run_heuristic, HeuristicConfig, HeuristicResult, IterationRecord};
pub use instance::{coalition_cost_ub, random_instance, tour_cost, Point, VrpInstance, EXACT_TOUR_LIMIT};
pub use io::{convergence_csv, error_csv, relative_errors, AllocationOutput, TraceEntry};
pub use pool::{Tour, TourPool};
pub use postopt::{post_optimize, PostOptConfig, PostOptReport};
pub use stage::{mps_packing_run, stage_packing_lp, stage_seed, PackingRun, PackingState, RowKind, StageBackend, StageConfig};

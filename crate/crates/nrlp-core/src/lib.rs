//! Simulation of noise reinforced Lévy processes (NRLPs) and the discrete
//! and point-process constructions surrounding them: Yule-Simon processes,
//! decorated reinforced Poisson point patterns, reinforced Lévy-Itô path
//! synthesis, pathwise couplings with the driving Lévy process, and
//! step-reinforced random walks, together with a Monte Carlo verification
//! layer that checks the closed-form identities relating all of these.
//!
//! Everything is parameterized by a Lévy triplet `(a, q², Λ)` and a memory
//! parameter `p ∈ [0,1)`, admissible when `p·β < 1` for the
//! Blumenthal-Getoor index `β`.

pub mod coupling;
pub mod measure;
pub mod path_synthesis;
pub mod point_process;
pub mod rng;
pub mod skeleton;
pub mod stats;
pub mod verify;
pub mod yule_simon;

pub use coupling::{CoupledBrownianPair, CoupledPaths, JumpFate};
pub use measure::{Band, LevyMeasureSpec, LevyTriplet, MemoryParam};
pub use path_synthesis::{NrbmPath, SamplePath};
pub use point_process::{MarkedAtom, MarkedPointPattern, Origin};
pub use skeleton::{ConvergenceRow, ReinforcedWalk, SkeletonPair};
pub use verify::{Verdict, VerificationReport};
pub use yule_simon::YuleSimonPath;

/// Crate version recorded in CSV headers and verification reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

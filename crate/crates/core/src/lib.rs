//! A 2-atomic single-writer multi-reader register and the tools to study it.
//!
//! * [`proto`]: client and replica state machines for the one round-trip
//!   `2am` protocol and the two round-trip ABD baseline.
//! * [`simnet`]: discrete-event clock, delay models, faults and seeded RNG.
//! * [`workload`]: open-loop clients driving a simulated cluster, plus an
//!   abstract replay that skips the network for very long runs.
//! * [`checker`]: offline trace analysis (patterns, 2-atomicity, atomicity,
//!   latency).
//! * [`analytics`]: closed-form and numerically integrated probabilities of
//!   the inversion pattern, with a Monte Carlo cross-check.
//! * [`csvio`]: trace, report and theory file formats.
//!
//! ```
//! use twoam::checker::{pattern_stats, verify_2atomicity};
//! use twoam::workload::{run_experiment, Experiment};
//!
//! let outcome = run_experiment(&Experiment::default()).unwrap();
//! assert!(verify_2atomicity(&outcome.trace).unwrap().is_empty());
//! let stats = pattern_stats(&outcome.trace).unwrap();
//! assert!(stats.p_oni <= stats.p_cp);
//! ```

pub mod analytics;
pub mod checker;
pub mod csvio;
pub mod proto;
pub mod simnet;
pub mod workload;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/protocols.md")]
    mod protocols {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/checking.md")]
    mod checking {}
    #[doc = include_str!("../../../book/src/analytics.md")]
    mod analytics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

//! Geometric SLAM observer with prescribed performance bounds.
//!
//! The library estimates a vehicle's pose together with a set of fixed
//! landmark positions from biased body-frame velocity and landmark
//! measurements. Each landmark-error component is forced to stay inside a
//! user-prescribed decaying envelope: the error is mapped through a smooth
//! transform that blows up at the envelope boundary, and the observer drives
//! the transformed error to zero.
//!
//! Module map:
//!
//! - [`lie`] — rotations, poses, twists, adjoints, quaternions.
//! - [`ppf`] — performance envelopes and the error transform family.
//! - [`observer`] — the estimator itself, in matrix and quaternion forms.
//! - [`sim`] — ground-truth dynamics and measurement synthesis.
//! - [`harness`] — co-simulation, CSV logs, metrics, backend comparison.
//!
//! The `ppf-slam` binary exposes the harness on the command line; the guide
//! under `book/` walks through the concepts with runnable examples.

pub mod harness;
pub mod lie;
pub mod observer;
pub mod ppf;
pub mod sim;
pub mod tolerances;

// The book's code snippets compile and run as doc-tests, keeping the guide
// in sync with the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/state-spaces.md")]
    pub struct StateSpaces;
    #[doc = include_str!("../../../book/src/envelopes.md")]
    pub struct Envelopes;
    #[doc = include_str!("../../../book/src/observer.md")]
    pub struct Observer;
    #[doc = include_str!("../../../book/src/simulation.md")]
    pub struct Simulation;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
}

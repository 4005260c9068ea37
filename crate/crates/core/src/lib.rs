//! Pareto sets of the strongly convexified multi-objective elastic net and
//! Bézier simplex surrogates of its solution mapping.
//!
//! The crate is `no_std` and only needs an allocator. File formats, dataset
//! loading and the command-line front end live in the `scvx` crate.
//!
//! Layout:
//! - [`simplex`]: weight vectors, faces, multi-indices, Bernstein basis, grids.
//! - [`elastic_net`]: the three objectives and the weight/hyper-parameter maps.
//! - [`solver`]: the weighted-sum solver `θ*(w)` and its optimality certificate.
//! - [`pareto`]: grid sampling of the solution mapping and sanity checks.
//! - [`continuity`]: the closed-form one-dimensional solution path and the
//!   Hölder-type continuity bound.
//! - [`bezier`] and [`fit`]: Bézier simplex models, least-squares fitting and
//!   the degree/split sweep.
#![no_std]

extern crate alloc;

pub mod bezier;
pub mod elastic_net;
mod error;
pub mod fit;
pub mod pareto;
pub mod continuity;
pub mod rng;
pub mod simplex;
pub mod solver;

pub use bezier::BezierSimplexModel;
pub use elastic_net::{ElasticNetProblem, Hyperparams};
pub use error::{Error, Result};
pub use fit::{FitReport, SamplePoint};
pub use pareto::{ParetoRecord, ParetoSample};
pub use simplex::{FaceIndex, MultiIndex, WeightVector};
pub use solver::{Solution, SolverConfig};

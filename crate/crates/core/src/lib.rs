//! Deterministic volume approximation for truncated fractional matching
//! polytopes of bounded-degree graphs and hypergraphs, by truncated cluster
//! expansion of an abstract polymer model, with exact rational weights.
//!
//! ```
//! use matchvol::expansion::{approximate_volume, validate_plan, PlanOptions};
//! use matchvol::rational::parse_fraction;
//! use matchvol::Hypergraph;
//!
//! let h = Hypergraph::parse("0 1\n1 2\n2 3\n3 0\n")?;
//! let delta = parse_fraction("1/250")?;
//! let plan = validate_plan(&h, &delta, 0.01, &PlanOptions::default())?;
//! let result = approximate_volume(&h, &plan)?;
//! println!("{} (log Ξ = {})", result.volume, result.log_xi);
//! # Ok::<(), matchvol::Error>(())
//! ```

pub mod cli;
pub mod error;
pub mod expansion;
pub mod geometry;
pub mod hypergraph;
pub mod oracle;
pub mod integral;
pub mod polymer;
pub mod rational;

pub use error::{Error, Result};
pub use hypergraph::{Hypergraph, Vertex, VertexSet};
pub use rational::Rational;

//! Analysis of piecewise-affine (Glass) gene network models.
//!
//! A model is `dx/dt = kappa(x) - Gamma x` where `kappa` is a sum of products
//! of step functions of the concentrations. Inside each regular domain of the
//! threshold lattice the flow is affine and known in closed form, which lets
//! this crate:
//!
//! * build the discrete transition graph over regular domains ([`graph`]),
//! * compute exact wall-to-wall transition maps and their derivatives ([`flow`]),
//! * compose them into first-return maps around deterministic cycles and decide
//!   between convergence to the cycle's corner point and a unique attracting
//!   limit cycle ([`return_map`]),
//! * run exact event-driven simulations, checked against a fixed-step
//!   integration oracle ([`simulate`]).
//!
//! The [`cli`] module backs the `glasscert` binary.

pub mod cli;
pub mod error;
pub mod fixtures;
pub mod flow;
pub mod graph;
pub mod model;
pub mod return_map;
pub mod simulate;
pub mod tolerances;

pub use error::{Error, Result};
pub use graph::{Cycle, CycleProperties, TransitionGraph, WallClass};
pub use model::{DomainIndex, Network, State, ValidationReport};
pub use return_map::{ReturnMapAnalysis, Verdict};
pub use simulate::{TerminalReason, Trajectory};
pub use tolerances::Tolerances;

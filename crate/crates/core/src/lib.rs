//! Exact computation of the α-fractional binomial distribution, explicit
//! transform formulas evaluated by independent numerical routes, and
//! empirical checks of its large/moderate deviation and normal
//! approximation behaviour.

pub mod asymptotics;
pub mod cli;
pub mod distribution;
pub mod error;
pub mod specfun;
pub mod transforms;

pub use distribution::{build_distribution, build_nu, DistributionTable, LatticeTable, Params};
pub use error::{Error, Result};

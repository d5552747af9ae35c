//! Exact computations for rank-one cutting-and-stacking transformations and
//! their extensions by finitely generated abelian groups.

pub mod abelian;
pub mod config;
pub mod criteria;
pub mod registry;
pub mod simulator;
pub mod tower;

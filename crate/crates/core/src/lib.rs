// `!(x > 0.0)` style checks are intentional: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod avoidance;
pub mod env;
pub mod geometry;
pub mod harness;
pub mod perception;
pub mod replay;
pub mod rewards;
pub mod rl;
pub mod skeleton;
pub mod variant;
pub mod world;

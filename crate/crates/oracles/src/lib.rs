//! Reference solvers for cross-checking `smsrate`. Nothing here calls into the
//! library: every formula is written out again from scratch.

pub mod jumps;
pub mod markov;
pub mod ode;
pub mod quad;

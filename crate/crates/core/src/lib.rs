//! EWire: a linear circuit language embedded in a higher-order monadic host
//! language, with an exact semantics in finite-dimensional C*-algebras.

pub mod algebra;
pub mod denote;
pub mod fuzz;
pub mod mono;
pub mod normalize;
pub mod rng;
pub mod syntax;
pub mod typecheck;

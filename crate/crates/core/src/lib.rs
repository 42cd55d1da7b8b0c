//! Poset combinatorics for ind-flatness and the replacement of stably
//! commutative prediagrams of `Z/p^k`-modules by strictly commutative
//! diagrams of pure monomorphisms.

pub mod census;
pub mod colimit;
pub mod crown;
pub mod diagram;
pub mod fixtures;
pub mod flatness;
pub mod format;
pub mod gen;
pub mod lifting;
pub mod modcat;
pub mod poset;

//! Exact-arithmetic toolkit for nodal surfaces in projective 3-space.
//!
//! The crate builds degree-n surfaces carrying a line of multiplicity n-2 and
//! a prescribed even number of ordinary double points, then certifies every
//! claimed property per instance: multiplicities, node types, dimensions of
//! the attached linear systems, and independence of the conditions the nodes
//! impose. All arithmetic is exact, over a prime field or over the rationals.
//!
//! Modules, bottom up:
//!
//! * [`exactla`] — scalars and dense matrices with rank / kernel / solve;
//! * [`forms`] — homogeneous forms in 3 or 4 variables and local calculus;
//! * [`conditions`] — point/line condition schemes turned into row systems;
//! * [`picard`] — intersection-lattice bookkeeping and the identity ledger;
//! * [`construct`] — the plane-model-to-surface pipeline;
//! * [`verify`] — independent oracles (scans, node classification, counts);
//! * [`cli`] — the `severilab` command surface.

pub mod cli;
pub mod conditions;
pub mod construct;
pub mod picard;
pub mod exactla;
pub mod forms;
pub mod rng;
pub mod verify;

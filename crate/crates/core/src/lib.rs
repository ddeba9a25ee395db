//! Exact computations for maximality of real and holomorphic involutions:
//! integer lattices and their discriminant forms, involutive modules and the
//! Comessatti characteristic, simplicial `Z/2` complexes with Smith theory,
//! Hilbert schemes of points on surfaces, and involutions of the `K3^[n]`
//! lattice.
//!
//! Independent sweeps run through [`exec::Exec`]; with the `parallel`
//! feature (on by default) they use a rayon pool capped by
//! `MAXBRANE_THREADS`.

pub mod error;
pub mod exec;
pub mod f2;
pub mod zmat;
pub mod lattice;
pub mod involution;
pub mod chain;
pub mod io;
pub mod hilbert;
pub mod k3n;
pub mod cli;

//! Degree-4 Cayley graph expanders from a group of block-Toeplitz matrices
//! over GF(2).
//!
//! The crate is layered bottom-up:
//!
//! * [`gf2`]: 3x3 matrices over GF(2) and the 27-dimensional space of diagonals
//! * [`toeplitz`]: the truncated group `H/H_n` with a dense-matrix oracle
//! * [`generators`]: the generators `x0`, `x1` and their commutator scheme
//! * [`quotient`]: enumeration of the finite quotients `K_i`
//! * [`series`]: lower exponent-2 and lower central series inside `K_n`
//! * [`cayley`]: the Cayley multigraphs, their covering tower and refinement
//! * [`spectra`]: adjacency spectra, Ramanujan verdicts and Cheeger bounds
//! * [`gamma_words`]: normal forms in the index-2 overgroup

pub mod cayley;
pub mod gamma_words;
pub mod generators;
pub mod gf2;
pub mod quotient;
pub mod series;
pub mod spectra;
pub mod toeplitz;

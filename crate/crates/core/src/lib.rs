//! Solver library for additive forms `a_1 x_1^d + ... + a_s x_s^d` of
//! degree `d = 2m` (m odd, m >= 3) over totally ramified extensions of the
//! 2-adic numbers: it finds nontrivial zeros by contraction chains and
//! Hensel lifting and certifies them by direct evaluation.
//!
//! - [`ring`]: truncated arithmetic in the ring of integers, presented by
//!   an Eisenstein polynomial.
//! - [`form`]: additive forms, level profiles, normalization, certificates.
//! - [`contraction`]: combining same-level variables, steering, climbing.
//! - [`pairing`]: the disjoint-pairs-in-a-bin lemma and its extremal cases.
//! - [`solver`]: strategy dispatch, the contraction strategies, Hensel
//!   lifting, and the end-to-end pipeline.
//! - [`oracle`]: independent arithmetic, brute-force zero search, profile
//!   coverage reports, seeded random forms.
//! - [`files`]: the JSON file formats used by the command-line tool.

pub mod contraction;
pub mod files;
pub mod form;
pub mod oracle;
pub mod pairing;
pub mod ring;
pub mod solver;

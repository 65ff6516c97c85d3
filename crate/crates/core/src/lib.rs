//! Limiting spectral moments of Bernoulli-selected subsets of equiangular
//! tight frames.
//!
//! The crate is organised bottom-up:
//!
//! * [`ncpart`] enumerates non-crossing partitions in restricted-growth form.
//! * [`cactus`] turns a partition into its cyclic block walk and splits the
//!   walk's edges into simple cycles.
//! * [`poly`] holds the exact polynomial types (integer polynomials in `s`,
//!   rational polynomials in `x`).
//! * [`moments`] computes the cycle weights `A_l`, the conference-domain
//!   moments `m^S_k` and the frame moments `m_k`, all exactly.
//! * [`frames`] builds harmonic ETFs from difference sets together with the
//!   generalized conference matrix, and validates both.
//! * [`verify`] provides finite-`n` oracles: direct summation of `V_n(pi)` and
//!   Monte Carlo estimates of the moments.

pub mod cactus;
pub mod frames;
pub mod moments;
pub mod ncpart;
pub mod poly;
pub mod verify;

pub use cactus::{block_walk, cycle_decompose, squeeze, BlockWalk, CactusError, CycleDecomposition};
pub use frames::{
    build_conference, harmonic_etf, qr_difference_set, search_difference_sets, validate_conference, validate_etf,
    ConferenceMatrix, DifferenceSet, Frame, FrameError,
};
pub use moments::{
    a_poly, eval_moment, kesten_mckay_check, moment_frame, moment_s, v_limit, MomentError, MomentPolyS, MomentPolyX,
};
pub use ncpart::{catalan, enumerate_ncp, enumerate_ncp_with_blocks, narayana, NcpError, NonCrossingPartition};
pub use poly::{QPoly, SPoly};
pub use verify::{mc_moment_frame, mc_moment_s, v_n_exact, MCConfig, MCReport, VerifyError};

//! Degrees of freedom of multicell, multiuser MIMO networks.
//!
//! The crate evaluates exact degrees-of-freedom outer bounds for the `L`-cell,
//! `K`-user MIMO multiple-access channel, constructs the linear schemes that attain
//! them (transmit zero forcing, null-space interference alignment, receive zero
//! forcing), certifies those constructions numerically, and measures their high-SNR
//! sum-rate slopes by Monte Carlo simulation. A downlink module covers opportunistic
//! user scheduling with local channel knowledge.
//!
//! Module map:
//!
//! - [`numerics`]: complex dense linear algebra (SVD, rank, null spaces, subspace
//!   intersection, Hermitian eigendecomposition).
//! - [`network`]: network geometry, SNR bookkeeping and seeded channel realization.
//! - [`bounds`]: exact rational evaluation of the outer bounds and feasibility formulas.
//! - [`multiplicity`]: geometric/algebraic multiplicity of interference null spaces.
//! - [`schemes`]: linear designs and their certificates.
//! - [`scheduler`]: downlink multiuser-diversity scheduling and its statistics.
//! - [`harness`]: rate simulation, DoF slope fitting and SNR sweeps.
//! - [`textmat`]: the plain-text matrix dump format.
//!
//! ```
//! use mimo_dof::bounds::outer_bound_homogeneous;
//! use mimo_dof::network::{Antennas, NetworkConfig};
//!
//! let cfg = NetworkConfig::homogeneous(2, 2, 2, 2, 1);
//! let report = outer_bound_homogeneous(&cfg).unwrap();
//! assert_eq!(report.sigma_d.to_string(), "8/3");
//! # let _ = Antennas::Homogeneous { tx: 2, rx: 2 };
//! ```

pub mod bounds;
pub mod error;
pub mod harness;
pub mod multiplicity;
pub mod network;
pub mod numerics;
pub mod scheduler;
pub mod schemes;
pub mod textmat;

pub use error::{Error, Result};
pub use numerics::{CMatrix, C64};

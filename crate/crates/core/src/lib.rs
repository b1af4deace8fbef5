//! Exact diagonalization and kink-state entanglement for the open XXZ chain
//! with antiparallel boundary fields.
//!
//! Sites are numbered `1..=L`; site `j` is bit `j-1` of a configuration and a
//! set bit means spin up. Magnetizations are carried as the integer `2m`.

pub mod analysis;
pub mod basis;
pub mod eigen;
pub mod entangle;
pub mod error;
pub mod hamiltonian;
pub mod kinkstate;
pub mod linalg;
pub mod omega;

pub use analysis::{
    BondProfile, DerivativeScan, EdOptions, FitResult, JumpResult, PairCurve, SweepTable,
    Table1Cell,
};
pub use basis::{SectorBasis, SpinConfig};
pub use eigen::{GroundState, GroundStateReport, LanczosConfig, SectorSearch, StateVector};
pub use entangle::{PairDensityMatrix, SiteDensityMatrix};
pub use error::{Error, Result};
pub use hamiltonian::{ModelParams, SectorHamiltonian};
pub use kinkstate::{critical_field, KinkParams};
pub use omega::{OmegaTable, ScaledValue};

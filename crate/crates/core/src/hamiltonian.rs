//! Sector-restricted XXZ Hamiltonian with antiparallel boundary fields:
//!
//! `H = -J Σ (Sx_i Sx_{i+1} + Sy_i Sy_{i+1}) - Δ Σ Sz_i Sz_{i+1} - h (Sz_1 - Sz_L)`
//!
//! The XY part is written as `(S+_i S-_{i+1} + S-_i S+_{i+1}) / 2`, so every
//! adjacent spin exchange contributes `-J/2`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::basis::{SectorBasis, SpinConfig};
use crate::error::{Error, Result};

/// Largest sector that [`SectorHamiltonian::dense_matrix`] will materialize.
pub const DENSE_LIMIT: usize = 4096;

const PAR_CHUNK: usize = 1 << 14;

/// Couplings of the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub j: f64,
    pub delta: f64,
    pub h: f64,
}

impl ModelParams {
    /// Parameters with `J = 1`.
    pub fn new(delta: f64, h: f64) -> Result<Self> {
        Self::with_coupling(1.0, delta, h)
    }

    pub fn with_coupling(j: f64, delta: f64, h: f64) -> Result<Self> {
        if !(j.is_finite() && j > 0.0) {
            return Err(Error::InvalidParams(format!("J must be positive, got {j}")));
        }
        if !delta.is_finite() {
            return Err(Error::InvalidParams(format!("delta must be finite, got {delta}")));
        }
        if !(h.is_finite() && h >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "boundary field must be finite and non-negative, got {h}"
            )));
        }
        Ok(Self { j, delta, h })
    }
}

#[inline]
fn diagonal_from_bits(params: &ModelParams, bits: u64, len: usize) -> f64 {
    let bond_mask = (1u64 << (len - 1)) - 1;
    let anti = ((bits ^ (bits >> 1)) & bond_mask).count_ones() as f64;
    let aligned = (len - 1) as f64 - anti;
    let zz = (aligned - anti) / 4.0;
    let s_first = if bits & 1 == 1 { 0.5 } else { -0.5 };
    let s_last = if (bits >> (len - 1)) & 1 == 1 { 0.5 } else { -0.5 };
    -params.delta * zz - params.h * (s_first - s_last)
}

/// Diagonal (Ising plus boundary field) energy of one configuration.
pub fn diagonal_energy(params: &ModelParams, config: &SpinConfig) -> f64 {
    diagonal_from_bits(params, config.bits(), config.len())
}

/// Matrix-free Hamiltonian on one magnetization sector.
#[derive(Debug, Clone)]
pub struct SectorHamiltonian {
    params: ModelParams,
    basis: SectorBasis,
    diagonal: Vec<f64>,
}

impl SectorHamiltonian {
    pub fn new(params: ModelParams, basis: SectorBasis) -> Self {
        let len = basis.len();
        let diagonal = basis
            .iter()
            .map(|bits| diagonal_from_bits(&params, bits, len))
            .collect();
        Self {
            params,
            basis,
            diagonal,
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn basis(&self) -> &SectorBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// `out = H v`. Each output entry is written by exactly one worker.
    pub fn matvec_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        let dim = self.dim();
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: v.len(),
            });
        }
        if out.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: out.len(),
            });
        }
        if dim <= PAR_CHUNK {
            self.fill_chunk(v, out, 0);
        } else {
            out.par_chunks_mut(PAR_CHUNK)
                .enumerate()
                .for_each(|(c, chunk)| self.fill_chunk(v, chunk, c * PAR_CHUNK));
        }
        Ok(())
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.matvec_into(v, &mut out)?;
        Ok(out)
    }

    fn fill_chunk(&self, v: &[f64], out: &mut [f64], start: usize) {
        let len = self.basis.len();
        let hop = -0.5 * self.params.j;
        for ((slot, bits), idx) in out
            .iter_mut()
            .zip(self.basis.iter_from(start))
            .zip(start..)
        {
            let mut acc = self.diagonal[idx] * v[idx];
            for pos in 0..len - 1 {
                match (bits >> pos) & 0b11 {
                    0b01 => acc += hop * v[idx + SectorBasis::hop_up_delta(bits, pos)],
                    0b10 => {
                        let partner = bits ^ (0b11 << pos);
                        acc += hop * v[idx - SectorBasis::hop_up_delta(partner, pos)];
                    }
                    _ => {}
                }
            }
            *slot = acc;
        }
    }

    /// Dense copy of the sector block, for small sectors.
    pub fn dense_matrix(&self) -> Result<DMatrix<f64>> {
        let dim = self.dim();
        if dim > DENSE_LIMIT {
            return Err(Error::TooLargeForDense {
                dim,
                limit: DENSE_LIMIT,
            });
        }
        let mut m = DMatrix::zeros(dim, dim);
        let mut unit = vec![0.0; dim];
        let mut col = vec![0.0; dim];
        for c in 0..dim {
            unit[c] = 1.0;
            self.matvec_into(&unit, &mut col)?;
            unit[c] = 0.0;
            for (r, &x) in col.iter().enumerate() {
                m[(r, c)] = x;
            }
        }
        Ok(m)
    }
}

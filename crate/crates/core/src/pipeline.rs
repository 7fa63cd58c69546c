//! End-to-end construction of an approximating zero set for a measure.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::atomize::{atomize_pair, to_log_coords, AtomPair};
use crate::decomposition::{
    annular_split, extract_integer_atoms, heavy_tail_schedule, normalize_origin, AnnularDecomposition,
    HeavyTailSchedule,
};
use crate::error::Result;
use crate::measure::{generic_origin_shift, Measure};
use crate::partition::{partition_mass_two_with, LogRectangle, PartitionConfig, PartitionPiece, PartitionStats};
use crate::potential::{assemble_approximant, ZeroSet};
use crate::slowly_varying::SlowlyVarying;

#[derive(Clone, Debug, PartialEq)]
pub struct ApproxConfig {
    pub psi: SlowlyVarying,
    /// First annulus radius; defaults to the innermost modulus after normalization.
    pub r1: Option<f64>,
    /// Radius of the disk the generic origin is drawn from; `None` keeps the origin.
    pub shift_radius: Option<f64>,
    pub seed: u64,
    pub partition: PartitionConfig,
}

impl ApproxConfig {
    pub fn new(psi: SlowlyVarying) -> Self {
        Self {
            psi,
            r1: None,
            shift_radius: Some(0.1),
            seed: 0,
            partition: PartitionConfig::default(),
        }
    }
}

/// Partition and atomization of the even part of one annulus.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnulusPieces {
    pub k: usize,
    pub rect: LogRectangle,
    pub pieces: Vec<PartitionPiece>,
    pub stats: PartitionStats,
}

/// Everything one run produces. Intermediate objects live in the shifted
/// frame; `zeros` is translated back to the input frame.
#[derive(Clone, Debug)]
pub struct Approximation {
    pub shift: Complex64,
    pub decomposition: AnnularDecomposition,
    pub schedule: HeavyTailSchedule,
    pub annuli: Vec<AnnulusPieces>,
    pub pairs: Vec<AtomPair>,
    pub integer_zeros: ZeroSet,
    pub zeros: ZeroSet,
}

impl Approximation {
    pub fn pieces(&self) -> impl Iterator<Item = &PartitionPiece> {
        self.annuli.iter().flat_map(|a| a.pieces.iter())
    }

    pub fn partition_stats(&self) -> PartitionStats {
        self.annuli.iter().fold(PartitionStats::default(), |acc, a| PartitionStats {
            cuts: acc.cuts + a.stats.cuts,
            flagged_cuts: acc.flagged_cuts + a.stats.flagged_cuts,
            shrinks: acc.shrinks + a.stats.shrinks,
        })
    }
}

/// Builds the zero set of an entire function whose `log|f|` approximates the
/// potential of `m`.
///
/// The origin is moved to a generic point, mass near it is split off, the
/// rest goes through the annular decomposition, the sparse tail becomes
/// quintuple zeros, heavy atoms become even-multiplicity zeros, and each
/// annulus remainder is partitioned into mass-2 pieces in log coordinates
/// and replaced by moment-matched pairs.
pub fn approximate(m: &Measure, cfg: &ApproxConfig) -> Result<Approximation> {
    let canon = m.canonicalize();
    let shift = match cfg.shift_radius {
        Some(r) if !canon.is_empty() => generic_origin_shift(&canon, r, cfg.seed)?,
        _ => Complex64::new(0.0, 0.0),
    };
    let shifted = canon.translate(-shift);
    let (rest, correction) = normalize_origin(&shifted);
    let mut decomposition = annular_split(&rest, &cfg.psi, cfg.r1)?;
    decomposition.origin_correction = correction;
    let schedule = heavy_tail_schedule(&decomposition.mu2(), &cfg.psi)?;

    let per_annulus: Vec<(ZeroSet, AnnulusPieces)> = decomposition
        .steps
        .par_iter()
        .map(|s| {
            let (tilde, remainder) = extract_integer_atoms(&s.mu1);
            let rect = LogRectangle::new(s.r_k.ln(), s.r_outer.ln(), 0.0, std::f64::consts::TAU)?;
            let (pieces, stats) = if remainder.is_empty() {
                (Vec::new(), PartitionStats::default())
            } else {
                let p = partition_mass_two_with(&rect, &to_log_coords(&remainder)?, &cfg.partition)?;
                (p.pieces, p.stats)
            };
            Ok((tilde, AnnulusPieces { k: s.k, rect, pieces, stats }))
        })
        .collect::<Result<_>>()?;

    let mut integer_zeros = ZeroSet::empty();
    let mut annuli = Vec::with_capacity(per_annulus.len());
    for (tilde, a) in per_annulus {
        integer_zeros.extend(&tilde);
        annuli.push(a);
    }
    let pairs = annuli
        .par_iter()
        .flat_map_iter(|a| a.pieces.iter())
        .map(atomize_pair)
        .collect::<Result<Vec<_>>>()?;
    let zeros = assemble_approximant(&decomposition, &schedule, &pairs, &integer_zeros)?.translate(shift)?;
    Ok(Approximation {
        shift,
        decomposition,
        schedule,
        annuli,
        pairs,
        integer_zeros,
        zeros,
    })
}

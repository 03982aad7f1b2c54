//! Weighted sign-criteria stability ranking.
//!
//! Each criterion is a sign test on one descriptor. A vertex's score is the
//! total weight of the criteria it satisfies divided by the total weight of
//! the set, so scores lie in `[0, 1]`. Vertices are then sorted by
//! descending score with ties going to the lower index.

use std::cmp::Ordering;
use std::fmt::Write as _;

use thiserror::Error;

use crate::curvature::{VertexDescriptor, VertexDescriptors};
use crate::scalar::{fmt_sig17, Real};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RankingError {
    #[error("cannot select {requested} vertices, only {available} are ranked")]
    SelectionTooLarge { requested: usize, available: usize },
    #[error("criterion weight {weight} outside [0, 1]")]
    WeightOutOfRange { weight: String },
    #[error("criterion set has no positive weight")]
    ZeroTotalWeight,
    #[error("a criterion set holds at most 32 criteria")]
    TooManyCriteria,
    #[error("unknown criterion {0:?}")]
    UnknownCriterion(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    /// `ψ_min ≥ 0`
    PsiMinNonNegative,
    /// `θ < 2π`
    ThetaBelowFullTurn,
    /// `κ_G1 > 0`
    QuadricGaussianPositive,
    /// `ψ_max ≥ 0`
    PsiMaxNonNegative,
    /// `θ > 2π`
    ThetaAboveFullTurn,
    /// `κ_G < 0`
    GaussianNegative,
    /// `κ_G1 < 0`
    QuadricGaussianNegative,
    /// `κ_G > 0`
    GaussianPositive,
}

impl Criterion {
    pub const ALL: [Criterion; 8] = [
        Criterion::PsiMinNonNegative,
        Criterion::ThetaBelowFullTurn,
        Criterion::QuadricGaussianPositive,
        Criterion::PsiMaxNonNegative,
        Criterion::ThetaAboveFullTurn,
        Criterion::GaussianNegative,
        Criterion::QuadricGaussianNegative,
        Criterion::GaussianPositive,
    ];

    pub fn holds<T: Real>(self, d: &VertexDescriptor<T>) -> bool {
        let zero = T::zero();
        match self {
            Criterion::PsiMinNonNegative => d.psi_min >= zero,
            Criterion::ThetaBelowFullTurn => d.theta < T::two_pi(),
            Criterion::QuadricGaussianPositive => d.kappa_g1 > zero,
            Criterion::PsiMaxNonNegative => d.psi_max >= zero,
            Criterion::ThetaAboveFullTurn => d.theta > T::two_pi(),
            Criterion::GaussianNegative => d.kappa_g < zero,
            Criterion::QuadricGaussianNegative => d.kappa_g1 < zero,
            Criterion::GaussianPositive => d.kappa_g > zero,
        }
    }

    /// Signed distance of the tested quantity past its threshold: positive
    /// (or zero for the `≥` tests) exactly when the criterion holds.
    pub fn margin<T: Real>(self, d: &VertexDescriptor<T>) -> T {
        match self {
            Criterion::PsiMinNonNegative => d.psi_min,
            Criterion::ThetaBelowFullTurn => T::two_pi() - d.theta,
            Criterion::QuadricGaussianPositive => d.kappa_g1,
            Criterion::PsiMaxNonNegative => d.psi_max,
            Criterion::ThetaAboveFullTurn => d.theta - T::two_pi(),
            Criterion::GaussianNegative => -d.kappa_g,
            Criterion::QuadricGaussianNegative => -d.kappa_g1,
            Criterion::GaussianPositive => d.kappa_g,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Criterion::PsiMinNonNegative => "psi-min-nonneg",
            Criterion::ThetaBelowFullTurn => "theta-below-2pi",
            Criterion::QuadricGaussianPositive => "kg1-pos",
            Criterion::PsiMaxNonNegative => "psi-max-nonneg",
            Criterion::ThetaAboveFullTurn => "theta-above-2pi",
            Criterion::GaussianNegative => "kg-neg",
            Criterion::QuadricGaussianNegative => "kg1-neg",
            Criterion::GaussianPositive => "kg-pos",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, RankingError> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| RankingError::UnknownCriterion(name.to_string()))
    }

    /// Default weight of the criterion in the standard table.
    pub fn default_weight(self) -> f64 {
        match self {
            Criterion::PsiMinNonNegative | Criterion::ThetaBelowFullTurn | Criterion::QuadricGaussianPositive => 1.0,
            Criterion::PsiMaxNonNegative => 0.9,
            Criterion::ThetaAboveFullTurn | Criterion::GaussianNegative => 0.8,
            Criterion::QuadricGaussianNegative => 0.7,
            Criterion::GaussianPositive => 0.4,
        }
    }
}

/// Ordered, weighted list of criteria.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionSet<T> {
    entries: Vec<(Criterion, T)>,
}

impl<T: Real> CriterionSet<T> {
    pub fn new(entries: Vec<(Criterion, T)>) -> Result<Self, RankingError> {
        if entries.len() > 32 {
            return Err(RankingError::TooManyCriteria);
        }
        for &(_, w) in &entries {
            if !(w >= T::zero() && w <= T::one()) {
                return Err(RankingError::WeightOutOfRange { weight: w.to_string() });
            }
        }
        let set = Self { entries };
        if set.total_weight() > T::zero() {
            Ok(set)
        } else {
            Err(RankingError::ZeroTotalWeight)
        }
    }

    /// The eight standard criteria with their default weights (total 6.6).
    pub fn standard() -> Self {
        Self {
            entries: Criterion::ALL
                .iter()
                .map(|&c| (c, T::lit(c.default_weight())))
                .collect(),
        }
    }

    /// A set holding one criterion at weight 1.
    pub fn single(c: Criterion) -> Self {
        Self {
            entries: vec![(c, T::one())],
        }
    }

    pub fn entries(&self) -> &[(Criterion, T)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn weights(&self) -> Vec<T> {
        self.entries.iter().map(|&(_, w)| w).collect()
    }

    pub fn total_weight(&self) -> T {
        self.entries.iter().map(|&(_, w)| w).sum()
    }
}

impl<T: Real> Default for CriterionSet<T> {
    fn default() -> Self {
        Self::standard()
    }
}

/// Bit `k` of a vertex's entry is set when criterion `k` of the set holds.
/// Excluded vertices carry `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatisfactionMask {
    bits: Vec<Option<u32>>,
}

impl SatisfactionMask {
    pub fn get(&self, v: usize) -> Option<u32> {
        self.bits[v]
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn as_slice(&self) -> &[Option<u32>] {
        &self.bits
    }

    /// Criteria indices (0-based, in set order) satisfied at `v`.
    pub fn satisfied(&self, v: usize) -> Vec<usize> {
        match self.bits[v] {
            Some(b) => (0..32).filter(|k| b & (1 << k) != 0).collect(),
            None => Vec::new(),
        }
    }
}

pub fn evaluate_criteria<T: Real>(desc: &VertexDescriptors<T>, crit: &CriterionSet<T>) -> SatisfactionMask {
    let bits = desc
        .records()
        .iter()
        .map(|d| {
            (!d.is_excluded()).then(|| {
                crit.entries
                    .iter()
                    .enumerate()
                    .filter(|(_, (c, _))| c.holds(d))
                    .fold(0u32, |acc, (k, _)| acc | (1 << k))
            })
        })
        .collect();
    SatisfactionMask { bits }
}

/// Normalized weighted sum of satisfied criteria; `None` for excluded vertices.
pub fn stability_scores<T: Real>(mask: &SatisfactionMask, crit: &CriterionSet<T>) -> Vec<Option<T>> {
    let total = crit.total_weight();
    mask.bits
        .iter()
        .map(|b| {
            b.map(|bits| {
                crit.entries
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| bits & (1 << k) != 0)
                    .map(|(_, &(_, w))| w)
                    .sum::<T>()
                    / total
            })
        })
        .collect()
}

/// Score vector `s` (descending) with aligned vertex indices `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityRanking<T> {
    scores: Vec<T>,
    order: Vec<usize>,
    excluded: Vec<usize>,
}

/// Score assigned to excluded vertices in [`StabilityRanking::total_order`].
pub const EXCLUDED_SCORE: f64 = -1.0;

impl<T: Real> StabilityRanking<T> {
    /// Scores in non-increasing order.
    pub fn scores(&self) -> &[T] {
        &self.scores
    }

    /// Vertex indices aligned with [`Self::scores`].
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Vertices left out of the ranking, ascending.
    pub fn excluded(&self) -> &[usize] {
        &self.excluded
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Every vertex: ranked ones first, then excluded ones with score −1.
    pub fn total_order(&self) -> Vec<(usize, T)> {
        self.order
            .iter()
            .copied()
            .zip(self.scores.iter().copied())
            .chain(self.excluded.iter().map(|&v| (v, T::lit(EXCLUDED_SCORE))))
            .collect()
    }

    /// Ranking CSV: `rank,vertex_index,score,mask_bits`, optionally only the
    /// first `top` ranked rows. Excluded vertices are listed after the
    /// ranked ones when no limit is given.
    pub fn to_csv(&self, mask: Option<&SatisfactionMask>, top: Option<usize>) -> String {
        let mut out = String::from("rank,vertex_index,score,mask_bits\n");
        let rows = self.total_order();
        let limit = top.map_or(rows.len(), |t| t.min(self.len()));
        for (rank, (v, s)) in rows.into_iter().take(limit).enumerate() {
            let bits = mask.and_then(|m| m.get(v)).map(|b| b.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{v},{},{bits}", rank + 1, fmt_sig17(s));
        }
        out
    }
}

fn descending<T: Real>(a: T, b: T) -> Ordering {
    b.partial_cmp(&a).unwrap_or(Ordering::Equal)
}

/// Ranks every vertex by score (all included).
pub fn rank_vertices<T: Real>(scores: &[T]) -> StabilityRanking<T> {
    let opt: Vec<Option<T>> = scores.iter().map(|&s| Some(s)).collect();
    rank_scored(&opt)
}

/// Ranks the vertices with `Some` score; `None` entries are excluded.
pub fn rank_scored<T: Real>(scores: &[Option<T>]) -> StabilityRanking<T> {
    let mut ranked: Vec<(usize, T)> = scores
        .iter()
        .enumerate()
        .filter_map(|(v, s)| s.map(|s| (v, s)))
        .collect();
    // stable: equal scores keep ascending index order
    ranked.sort_by(|a, b| descending(a.1, b.1));
    let excluded = scores
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_none())
        .map(|(v, _)| v)
        .collect();
    StabilityRanking {
        scores: ranked.iter().map(|&(_, s)| s).collect(),
        order: ranked.into_iter().map(|(v, _)| v).collect(),
        excluded,
    }
}

/// The first `count` vertices of the ranking (the carrier selection `p`).
pub fn select_top<T: Real>(ranking: &StabilityRanking<T>, count: usize) -> Result<Vec<usize>, RankingError> {
    if count > ranking.len() {
        return Err(RankingError::SelectionTooLarge {
            requested: count,
            available: ranking.len(),
        });
    }
    Ok(ranking.order[..count].to_vec())
}

/// Mask, scores and ranking in one call.
pub fn osveta_ranking<T: Real>(
    desc: &VertexDescriptors<T>,
    crit: &CriterionSet<T>,
) -> (StabilityRanking<T>, SatisfactionMask) {
    let mask = evaluate_criteria(desc, crit);
    let ranking = rank_scored(&stability_scores(&mask, crit));
    (ranking, mask)
}

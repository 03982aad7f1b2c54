//! Survival experiment: select the top `L` vertices by each method, run one
//! deep decimation and count how many selected vertices each level erased.

use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::curvature::compute_descriptors;
use crate::decimate::{decimate, removal_target, survival_depth, DecimateError, DecimationTrace};
use crate::mesh::{Mesh, TopologyIndex};
use crate::neuro::{normalized_features, rank_neuro, FnnModel, NeuroError, TrainingSample};
use crate::ranking::{osveta_ranking, select_top, CriterionSet, RankingError};
use crate::scalar::Real;

/// Decimation depth, in percent of vertices removed, reported by default.
pub const DEFAULT_LEVELS: [f64; 6] = [0.0, 20.0, 40.0, 60.0, 80.0, 90.0];

/// Fraction of vertices removed when building training targets.
pub const TRAINING_DECIMATION: f64 = 0.9;

/// Default selection size as a fraction of rankable vertices.
pub const DEFAULT_SELECTION_FRACTION: f64 = 0.1;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("no meshes given")]
    NoMeshes,
    #[error("level {0}% outside [0, 100)")]
    LevelOutOfRange(f64),
    #[error(transparent)]
    Decimate(#[from] DecimateError),
    #[error(transparent)]
    Ranking(#[from] RankingError),
    #[error(transparent)]
    Neuro(#[from] NeuroError),
    #[error("report CSV line {line}: {message}")]
    ReportFormat { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Random,
    Osveta,
    Neuro,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Random, Method::Osveta, Method::Neuro];

    pub fn name(self) -> &'static str {
        match self {
            Method::Random => "random",
            Method::Osveta => "osveta",
            Method::Neuro => "neuro",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::Random => "Random",
            Method::Osveta => "OSVETA",
            Method::Neuro => "Neuro-OSVETA",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet<T> {
    pub samples: Vec<TrainingSample<T>>,
    /// Requested removals the decimator could not perform, summed over meshes.
    pub shortfall: usize,
}

/// One sample per rankable vertex of every mesh: normalized margins and the
/// vertex's survival depth under a 90% decimation.
pub fn make_training_set<T: Real>(meshes: &[Mesh<T>], decim_seed: u64) -> Result<TrainingSet<T>, HarnessError> {
    if meshes.is_empty() {
        return Err(HarnessError::NoMeshes);
    }
    let mut samples = Vec::new();
    let mut shortfall = 0;
    for mesh in meshes {
        let desc = compute_descriptors(mesh, &TopologyIndex::build(mesh));
        let (_, trace) = decimate(mesh, TRAINING_DECIMATION, decim_seed)?;
        shortfall += trace.shortfall();
        let depth = survival_depth::<T>(&trace);
        for (v, f) in normalized_features(&desc).into_iter().enumerate() {
            if let Some(inputs) = f {
                samples.push(TrainingSample::new(inputs, depth[v])?);
            }
        }
    }
    Ok(TrainingSet { samples, shortfall })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelRow {
    /// Percent of the original vertices scheduled for removal.
    pub level: f64,
    pub survivors: usize,
    /// Removed selected vertices, indexed like [`Method::ALL`].
    pub removed: [usize; 3],
}

impl LevelRow {
    pub fn removed_by(&self, m: Method) -> usize {
        self.removed[m as usize]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalReport {
    pub mesh_id: String,
    pub selection_size: usize,
    pub seed: u64,
    pub rows: Vec<LevelRow>,
    /// Removals the decimator could not perform at the deepest level.
    pub shortfall: usize,
}

/// Default selection size for a mesh with `rankable` rankable vertices.
pub fn default_selection_size(rankable: usize) -> usize {
    (rankable as f64 * DEFAULT_SELECTION_FRACTION).round() as usize
}

/// Per-level counts of selected vertices removed by one shared decimation.
pub fn count_removed(trace: &DecimationTrace, selections: &[Vec<usize>; 3], levels: &[f64]) -> Vec<LevelRow> {
    let n = trace.vertex_count();
    levels
        .iter()
        .map(|&level| {
            let k = removal_target(n, level / 100.0).min(trace.removed_count());
            LevelRow {
                level,
                survivors: n - k,
                removed: selections
                    .each_ref()
                    .map(|sel| sel.iter().filter(|&&v| trace.is_removed_after(v, k)).count()),
            }
        })
        .collect()
}

pub fn run_survival_experiment<T: Real>(
    mesh: &Mesh<T>,
    model: &FnnModel<T>,
    selection_size: usize,
    levels: &[f64],
    seed: u64,
    mesh_id: &str,
) -> Result<SurvivalReport, HarnessError> {
    if let Some(&bad) = levels.iter().find(|l| !(0.0..100.0).contains(*l)) {
        return Err(HarnessError::LevelOutOfRange(bad));
    }
    let desc = compute_descriptors(mesh, &TopologyIndex::build(mesh));
    let (osveta, _) = osveta_ranking(&desc, &CriterionSet::standard());
    let neuro = rank_neuro(model, &desc)?;
    let top_osveta = select_top(&osveta, selection_size)?;
    let top_neuro = select_top(&neuro, selection_size)?;
    let mut rankable = osveta.order().to_vec();
    rankable.sort_unstable();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random: Vec<usize> = sample(&mut rng, rankable.len(), selection_size)
        .into_iter()
        .map(|i| rankable[i])
        .collect();

    let deepest = levels.iter().copied().fold(0.0, f64::max);
    let (_, trace) = decimate(mesh, deepest / 100.0, seed)?;
    Ok(SurvivalReport {
        mesh_id: mesh_id.to_string(),
        selection_size,
        seed,
        rows: count_removed(&trace, &[random, top_osveta, top_neuro], levels),
        shortfall: trace.shortfall(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

fn level_label(level: f64) -> String {
    format!("{level}%")
}

fn markdown_table(rows: &[(String, Vec<usize>)], levels: &[f64]) -> String {
    let mut out = String::from("| Level |");
    for &l in levels {
        let _ = write!(out, " {} |", level_label(l));
    }
    out.push_str("\n|---|");
    for _ in levels {
        out.push_str("---:|");
    }
    out.push('\n');
    if levels.is_empty() {
        return out;
    }
    for (label, values) in rows {
        let _ = write!(out, "| {label} |");
        for v in values {
            let _ = write!(out, " {v} |");
        }
        out.push('\n');
    }
    out
}

pub fn emit_report(report: &SurvivalReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => {
            let mut out = String::from("level,method,removed,survivors\n");
            for row in &report.rows {
                for m in Method::ALL {
                    let _ = writeln!(out, "{},{},{},{}", row.level, m.name(), row.removed_by(m), row.survivors);
                }
            }
            out
        }
        ReportFormat::Markdown => {
            let levels: Vec<f64> = report.rows.iter().map(|r| r.level).collect();
            let mut rows = vec![(
                "Total VR".to_string(),
                report.rows.iter().map(|r| r.survivors).collect::<Vec<_>>(),
            )];
            for m in Method::ALL {
                rows.push((m.label().to_string(), report.rows.iter().map(|r| r.removed_by(m)).collect()));
            }
            let mut out = markdown_table(&rows, &levels);
            if !levels.is_empty() {
                let _ = write!(
                    out,
                    "\nMesh `{}`, L = {} selected vertices, seed {}.",
                    report.mesh_id, report.selection_size, report.seed
                );
                if report.shortfall > 0 {
                    let _ = write!(out, " The decimator stopped {} removals short.", report.shortfall);
                }
                out.push('\n');
            }
            out
        }
    }
}

/// Parses the long-form CSV written by [`emit_report`].
pub fn parse_report_csv(text: &str) -> Result<Vec<LevelRow>, HarnessError> {
    let err = |line: usize, message: &str| HarnessError::ReportFormat {
        line,
        message: message.to_string(),
    };
    let mut rows: Vec<LevelRow> = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let no = i + 1;
        let fields: Vec<&str> = line.split(',').collect();
        let [level, method, removed, survivors] = fields[..] else {
            return Err(err(no, "expected 4 fields"));
        };
        let level: f64 = level.parse().map_err(|_| err(no, "invalid level"))?;
        let method = Method::from_name(method).ok_or_else(|| err(no, "unknown method"))?;
        let removed: usize = removed.parse().map_err(|_| err(no, "invalid removed count"))?;
        let survivors: usize = survivors.parse().map_err(|_| err(no, "invalid survivor count"))?;
        if rows.last().is_none_or(|r| r.level != level) {
            rows.push(LevelRow {
                level,
                survivors,
                removed: [0; 3],
            });
        }
        rows.last_mut().expect("row pushed above").removed[method as usize] = removed;
    }
    Ok(rows)
}

/// Published survival counts for a 17350-vertex model with `L = 1000`,
/// kept for side-by-side annotation of reports.
pub const REFERENCE_LEVELS: [f64; 6] = DEFAULT_LEVELS;
pub const REFERENCE_TOTAL: [usize; 6] = [17350, 12209, 6953, 3926, 2315, 1448];
pub const REFERENCE_REMOVED: [[usize; 6]; 3] = [
    [0, 332, 622, 781, 872, 920],
    [0, 1, 30, 147, 332, 522],
    [0, 0, 22, 121, 282, 421],
];

/// The published counts rendered as a Markdown table.
pub fn reference_markdown() -> String {
    let mut rows = vec![("Total VR".to_string(), REFERENCE_TOTAL.to_vec())];
    for m in Method::ALL {
        rows.push((m.label().to_string(), REFERENCE_REMOVED[m as usize].to_vec()));
    }
    markdown_table(&rows, &REFERENCE_LEVELS)
}

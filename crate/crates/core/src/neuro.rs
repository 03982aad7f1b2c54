//! Feature network: one sigmoid neuron per descriptor, each with its own
//! weight and bias, feeding a single sigmoid output neuron.
//!
//! The network is applied per vertex to that vertex's eight normalized
//! criterion margins and emits a stability score in `(0, 1)`; a ranking is a
//! sort over those scores. Model size depends only on the descriptor count,
//! so one model serves meshes of any vertex count.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::curvature::VertexDescriptors;
use crate::ranking::{rank_scored, Criterion, CriterionSet, StabilityRanking};
use crate::scalar::{fmt_sig17, Real};

pub const DESCRIPTOR_COUNT: usize = 8;
pub const DEFAULT_LEARNING_RATE: f64 = 0.1;
pub const DEFAULT_EPOCHS: usize = 200;
pub const MODEL_MAGIC: &str = "OSVETA-FNN 1";

/// Normalized inputs are clipped to this many robust standard deviations.
pub const Z_CLIP: f64 = 5.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NeuroError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("sample has {found} descriptors, model expects {expected}")]
    DescriptorCount { found: usize, expected: usize },
    #[error("target {0} outside [0, 1]")]
    TargetOutOfRange(String),
    #[error("training diverged in epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("model file: {0}")]
    Format(String),
}

pub fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FnnModel<T> {
    /// One weight per hidden neuron, applied to its own descriptor.
    pub hidden_weights: Vec<T>,
    pub hidden_biases: Vec<T>,
    /// Hidden-to-output weights.
    pub output_weights: Vec<T>,
    pub output_bias: T,
    pub learning_rate: T,
}

/// Updates `-η ∂E/∂p` for every parameter `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub hidden_weights: Vec<T>,
    pub hidden_biases: Vec<T>,
    pub output_weights: Vec<T>,
    pub output_bias: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample<T> {
    pub inputs: Vec<T>,
    pub target: T,
}

impl<T: Real> TrainingSample<T> {
    pub fn new(inputs: Vec<T>, target: T) -> Result<Self, NeuroError> {
        if !(target >= T::zero() && target <= T::one()) {
            return Err(NeuroError::TargetOutOfRange(target.to_string()));
        }
        Ok(Self { inputs, target })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingReport<T> {
    /// Mean per-sample loss `½(t − o)²` accumulated over each epoch.
    pub losses: Vec<T>,
    pub model: FnnModel<T>,
    pub seed: u64,
}

impl<T: Real> FnnModel<T> {
    /// Model with every parameter zero.
    pub fn zeros(n: usize, learning_rate: T) -> Self {
        Self {
            hidden_weights: vec![T::zero(); n],
            hidden_biases: vec![T::zero(); n],
            output_weights: vec![T::zero(); n],
            output_bias: T::zero(),
            learning_rate,
        }
    }

    /// Fresh model: hidden weights from the criterion weights, zero biases
    /// and seeded output weights uniform in `[0, 0.5]`.
    pub fn from_criteria(crit: &CriterionSet<T>, seed: u64) -> Self {
        let n = crit.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            hidden_weights: crit.weights(),
            hidden_biases: vec![T::zero(); n],
            output_weights: (0..n).map(|_| T::lit(rng.random_range(0.0..=0.5))).collect(),
            output_bias: T::zero(),
            learning_rate: T::lit(DEFAULT_LEARNING_RATE),
        }
    }

    /// [`Self::from_criteria`] with the standard criterion set.
    pub fn standard(seed: u64) -> Self {
        Self::from_criteria(&CriterionSet::standard(), seed)
    }

    pub fn descriptor_count(&self) -> usize {
        self.hidden_weights.len()
    }

    pub fn is_finite(&self) -> bool {
        self.hidden_weights
            .iter()
            .chain(&self.hidden_biases)
            .chain(&self.output_weights)
            .chain([&self.output_bias, &self.learning_rate])
            .all(|x| x.is_finite())
    }

    fn check(&self, inputs: &[T]) -> Result<(), NeuroError> {
        if inputs.len() == self.descriptor_count() {
            Ok(())
        } else {
            Err(NeuroError::DescriptorCount {
                found: inputs.len(),
                expected: self.descriptor_count(),
            })
        }
    }

    /// Hidden activations and output score.
    pub fn forward(&self, inputs: &[T]) -> Result<(Vec<T>, T), NeuroError> {
        self.check(inputs)?;
        let hidden: Vec<T> = inputs
            .iter()
            .zip(&self.hidden_weights)
            .zip(&self.hidden_biases)
            .map(|((&x, &w), &b)| sigmoid(w * x + b))
            .collect();
        let net = hidden
            .iter()
            .zip(&self.output_weights)
            .map(|(&h, &w)| w * h)
            .sum::<T>()
            + self.output_bias;
        Ok((hidden, sigmoid(net)))
    }

    pub fn score(&self, inputs: &[T]) -> Result<T, NeuroError> {
        Ok(self.forward(inputs)?.1)
    }

    /// `½(t − o)²` for one sample.
    pub fn loss(&self, sample: &TrainingSample<T>) -> Result<T, NeuroError> {
        let o = self.score(&sample.inputs)?;
        let e = sample.target - o;
        Ok(T::lit(0.5) * e * e)
    }

    /// Backpropagated updates for one sample, already scaled by `η`.
    pub fn gradients(&self, sample: &TrainingSample<T>) -> Result<Gradients<T>, NeuroError> {
        let (hidden, o) = self.forward(&sample.inputs)?;
        let eta = self.learning_rate;
        let delta_out = (sample.target - o) * o * (T::one() - o);
        let n = self.descriptor_count();
        let mut g = Gradients {
            hidden_weights: Vec::with_capacity(n),
            hidden_biases: Vec::with_capacity(n),
            output_weights: Vec::with_capacity(n),
            output_bias: eta * delta_out,
        };
        for (j, &h) in hidden.iter().enumerate() {
            let delta_hidden = delta_out * self.output_weights[j] * h * (T::one() - h);
            g.output_weights.push(eta * delta_out * h);
            g.hidden_weights.push(eta * delta_hidden * sample.inputs[j]);
            g.hidden_biases.push(eta * delta_hidden);
        }
        Ok(g)
    }

    pub fn apply(&mut self, g: &Gradients<T>) {
        let add = |p: &mut [T], d: &[T]| {
            for (p, &d) in p.iter_mut().zip(d) {
                *p = *p + d;
            }
        };
        add(&mut self.hidden_weights, &g.hidden_weights);
        add(&mut self.hidden_biases, &g.hidden_biases);
        add(&mut self.output_weights, &g.output_weights);
        self.output_bias = self.output_bias + g.output_bias;
    }

    /// Text serialization: magic line, descriptor count, learning rate,
    /// then one line each for hidden weights, hidden biases, output weights
    /// and output bias.
    pub fn save(&self) -> String {
        let row = |v: &[T]| v.iter().map(|&x| fmt_sig17(x)).collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        let _ = writeln!(out, "{MODEL_MAGIC}");
        let _ = writeln!(out, "{}", self.descriptor_count());
        let _ = writeln!(out, "{}", fmt_sig17(self.learning_rate));
        let _ = writeln!(out, "{}", row(&self.hidden_weights));
        let _ = writeln!(out, "{}", row(&self.hidden_biases));
        let _ = writeln!(out, "{}", row(&self.output_weights));
        let _ = writeln!(out, "{}", fmt_sig17(self.output_bias));
        out
    }

    pub fn load(text: &str) -> Result<Self, NeuroError> {
        let bad = |m: &str| NeuroError::Format(m.to_string());
        let mut lines = text.lines();
        let mut next = |what: &str| lines.next().ok_or_else(|| bad(&format!("missing {what}")));
        let magic = next("header")?;
        if magic.trim() != MODEL_MAGIC {
            return Err(bad(&format!("unsupported header {:?}", magic.trim())));
        }
        let n: usize = next("descriptor count")?
            .trim()
            .parse()
            .map_err(|_| bad("invalid descriptor count"))?;
        if n != DESCRIPTOR_COUNT {
            return Err(NeuroError::DescriptorCount {
                found: n,
                expected: DESCRIPTOR_COUNT,
            });
        }
        let parse_row = |line: &str, what: &str, len: usize| -> Result<Vec<T>, NeuroError> {
            let v: Vec<T> = line
                .split_whitespace()
                .map(|t| t.parse::<T>().map_err(|_| bad(&format!("invalid number {t:?} in {what}"))))
                .collect::<Result<_, _>>()?;
            if v.len() != len {
                return Err(bad(&format!("{what}: expected {len} values, found {}", v.len())));
            }
            Ok(v)
        };
        let learning_rate = parse_row(next("learning rate")?, "learning rate", 1)?[0];
        let hidden_weights = parse_row(next("hidden weights")?, "hidden weights", n)?;
        let hidden_biases = parse_row(next("hidden biases")?, "hidden biases", n)?;
        let output_weights = parse_row(next("output weights")?, "output weights", n)?;
        let output_bias = parse_row(next("output bias")?, "output bias", 1)?[0];
        let model = Self {
            hidden_weights,
            hidden_biases,
            output_weights,
            output_bias,
            learning_rate,
        };
        if !model.is_finite() {
            return Err(bad("non-finite parameter"));
        }
        Ok(model)
    }
}

/// Per-sample stochastic gradient descent in a seeded shuffled order.
pub fn train<T: Real>(
    model: &FnnModel<T>,
    data: &[TrainingSample<T>],
    epochs: usize,
    seed: u64,
) -> Result<TrainingReport<T>, NeuroError> {
    if data.is_empty() {
        return Err(NeuroError::EmptyTrainingSet);
    }
    for s in data {
        model.check(&s.inputs)?;
    }
    let mut model = model.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut losses = Vec::with_capacity(epochs);
    for epoch in 1..=epochs {
        order.shuffle(&mut rng);
        let mut total = T::zero();
        for &i in &order {
            let g = model.gradients(&data[i])?;
            total = total + model.loss(&data[i])?;
            model.apply(&g);
        }
        let mean = total / T::lit(data.len() as f64);
        if !mean.is_finite() || !model.is_finite() {
            return Err(NeuroError::Diverged { epoch });
        }
        losses.push(mean);
    }
    Ok(TrainingReport { losses, model, seed })
}

/// Median and robust spread of `values` (1.4826·MAD, falling back to the
/// scaled mean absolute deviation when more than half the values coincide).
fn robust_center_spread<T: Real>(values: &[T]) -> (T, T) {
    if values.is_empty() {
        return (T::zero(), T::zero());
    }
    let median = |v: &mut Vec<T>| {
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite descriptor"));
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            (v[n / 2 - 1] + v[n / 2]) * T::lit(0.5)
        }
    };
    let mut sorted = values.to_vec();
    let m = median(&mut sorted);
    let mut dev: Vec<T> = values.iter().map(|&x| (x - m).abs()).collect();
    let mad = median(&mut dev) * T::lit(1.4826);
    if mad > T::zero() {
        return (m, mad);
    }
    let mean_abs = dev.iter().copied().sum::<T>() / T::lit(dev.len() as f64);
    (m, mean_abs * T::lit(1.2533))
}

/// Network inputs for every vertex: the eight criterion margins, each
/// mapped to a robust z-score over the mesh's rankable vertices, clipped to
/// `±Z_CLIP` and rescaled to `[0, 1]`. Excluded vertices get `None`.
pub fn normalized_features<T: Real>(desc: &VertexDescriptors<T>) -> Vec<Option<Vec<T>>> {
    let records = desc.records();
    let rankable: Vec<usize> = (0..records.len()).filter(|&v| !records[v].is_excluded()).collect();
    let stats: Vec<(T, T)> = Criterion::ALL
        .iter()
        .map(|c| {
            let vals: Vec<T> = rankable.iter().map(|&v| c.margin(&records[v])).collect();
            robust_center_spread(&vals)
        })
        .collect();
    let clip = T::lit(Z_CLIP);
    records
        .iter()
        .map(|d| {
            (!d.is_excluded()).then(|| {
                Criterion::ALL
                    .iter()
                    .zip(&stats)
                    .map(|(c, &(center, spread))| {
                        let z = if spread > T::zero() {
                            (c.margin(d) - center) / spread
                        } else {
                            T::zero()
                        };
                        (z.max(-clip).min(clip) + clip) / (clip + clip)
                    })
                    .collect()
            })
        })
        .collect()
}

/// Per-vertex network scores (`None` for excluded vertices).
pub fn neuro_scores<T: Real>(model: &FnnModel<T>, desc: &VertexDescriptors<T>) -> Result<Vec<Option<T>>, NeuroError> {
    normalized_features(desc)
        .into_par_iter()
        .map(|f| f.map(|x| model.score(&x)).transpose())
        .collect()
}

pub fn rank_neuro<T: Real>(model: &FnnModel<T>, desc: &VertexDescriptors<T>) -> Result<StabilityRanking<T>, NeuroError> {
    Ok(rank_scored(&neuro_scores(model, desc)?))
}

/// CSV with the eight normalized inputs and the target per row.
pub fn training_set_csv<T: Real>(data: &[TrainingSample<T>]) -> String {
    let mut out = String::new();
    let names: Vec<&str> = Criterion::ALL.iter().map(|c| c.name()).collect();
    let _ = writeln!(out, "{},target", names.join(","));
    for s in data {
        for x in &s.inputs {
            let _ = write!(out, "{},", fmt_sig17(*x));
        }
        let _ = writeln!(out, "{}", fmt_sig17(s.target));
    }
    out
}

pub fn parse_training_set<T: Real>(text: &str) -> Result<Vec<TrainingSample<T>>, NeuroError> {
    let mut lines = text.lines().enumerate();
    let header = lines.next().ok_or(NeuroError::EmptyTrainingSet)?.1;
    let columns = header.split(',').count();
    if columns != DESCRIPTOR_COUNT + 1 {
        return Err(NeuroError::Format(format!(
            "training set header has {columns} columns, expected {}",
            DESCRIPTOR_COUNT + 1
        )));
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<T> = line
            .split(',')
            .map(|t| t.trim().parse::<T>())
            .collect::<Result<_, _>>()
            .map_err(|_| NeuroError::Format(format!("line {}: invalid number", i + 1)))?;
        if vals.len() != columns {
            return Err(NeuroError::Format(format!("line {}: expected {columns} values", i + 1)));
        }
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(NeuroError::Format(format!("line {}: non-finite value", i + 1)));
        }
        let (inputs, target) = vals.split_at(DESCRIPTOR_COUNT);
        out.push(TrainingSample::new(inputs.to_vec(), target[0])?);
    }
    if out.is_empty() {
        return Err(NeuroError::EmptyTrainingSet);
    }
    Ok(out)
}

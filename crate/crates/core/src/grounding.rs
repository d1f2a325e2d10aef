//! Words-as-classifiers evaluation of the discovered categories: one binary
//! logistic-regression classifier per leaf region, trained on that leaf's
//! sensory vectors against negatives sampled from other leaves (preferring
//! motor-space neighbors), then scored on a held-out split by argmax over
//! classifier responses.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::config::GroundingConfig;
use crate::mathf;
use crate::types::MotorBounds;
use crate::vecmath;

/// Sensory vectors of one category, keyed by the leaf id they came from.
pub type CategoryVectors = BTreeMap<u32, Vec<Vec<f64>>>;

/// One discovered category as handed over by the run loop.
#[derive(Debug, Clone, PartialEq)]
pub struct CategorySample {
    pub id: u32,
    pub bounds: MotorBounds,
    pub vectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GroundingError {
    EmptyCategory(u32),
    TooFewCategories(usize),
    DimensionMismatch { expected: usize, got: usize },
    UnknownCategory(u32),
    EmptyTestSet,
}

impl fmt::Display for GroundingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundingError::EmptyCategory(id) => write!(f, "category {id} has no samples"),
            GroundingError::TooFewCategories(n) => {
                write!(f, "grounding needs at least 2 trainable categories (got {n})")
            }
            GroundingError::DimensionMismatch { expected, got } => {
                write!(f, "sensory dimension mismatch: classifiers expect {expected}, got {got}")
            }
            GroundingError::UnknownCategory(id) => {
                write!(f, "test set references category {id} absent from the model")
            }
            GroundingError::EmptyTestSet => write!(f, "test set is empty"),
        }
    }
}

/// A binary classifier for one category, with the train-set standardization
/// it was fitted under.
#[derive(Debug, Clone, PartialEq)]
pub struct WacClassifier {
    pub category_id: u32,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub feature_mean: Vec<f64>,
    pub feature_std: Vec<f64>,
}

impl WacClassifier {
    /// Sigmoid response on a raw (unstandardized) sensory vector.
    pub fn score(&self, s: &[f64]) -> f64 {
        let mut z = self.bias;
        for ((x, m), (sd, w)) in s
            .iter()
            .zip(&self.feature_mean)
            .zip(self.feature_std.iter().zip(&self.weights))
        {
            z += w * ((x - m) / sd);
        }
        sigmoid(z)
    }
}

/// One classifier per evaluated category.
#[derive(Debug, Clone, PartialEq)]
pub struct WacModel {
    pub classifiers: BTreeMap<u32, WacClassifier>,
    /// Mean of each category's raw training positives; used for the
    /// actual-vs-predicted centroid similarity column of the report.
    pub centroids: BTreeMap<u32, Vec<f64>>,
    pub trained_on: String,
}

impl WacModel {
    pub fn dimension(&self) -> Option<usize> {
        self.classifiers.values().next().map(|c| c.weights.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalRow {
    pub actual: u32,
    pub predicted: u32,
    /// Winning score minus runner-up score (0 for a single-classifier model).
    pub margin: f64,
    /// Cosine similarity between the actual and predicted category centroids.
    pub centroid_similarity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    pub accuracy: f64,
    pub n_categories: usize,
    pub random_baseline: f64,
    /// Categories trained on fewer total samples than the configured
    /// threshold.
    pub low_support: Vec<u32>,
    /// Categories excluded as untrainable (no training vectors after the
    /// split).
    pub excluded: Vec<u32>,
}

/// Everything the grounding stage produces.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundingOutcome {
    pub model: WacModel,
    pub report: EvalReport,
    pub notices: Vec<String>,
}

/// Per-category random 80/20-style split. Test size is
/// `max(1, round((1 - ratio) * n))`; categories left without training
/// vectors are excluded and reported.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitData {
    pub train: CategoryVectors,
    pub test: CategoryVectors,
    pub excluded: Vec<u32>,
}

pub fn split_train_test<R: Rng + ?Sized>(
    categories: &CategoryVectors,
    ratio: f64,
    rng: &mut R,
) -> Result<SplitData, GroundingError> {
    let mut train = CategoryVectors::new();
    let mut test = CategoryVectors::new();
    let mut excluded = Vec::new();
    for (&id, vectors) in categories {
        if vectors.is_empty() {
            return Err(GroundingError::EmptyCategory(id));
        }
        let n = vectors.len();
        let n_test = (mathf::round((1.0 - ratio) * n as f64) as usize).max(1).min(n);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        if n - n_test == 0 {
            excluded.push(id);
            continue;
        }
        let test_idx: BTreeSet<usize> = order[..n_test].iter().copied().collect();
        let mut tr = Vec::with_capacity(n - n_test);
        let mut te = Vec::with_capacity(n_test);
        for (i, v) in vectors.iter().enumerate() {
            if test_idx.contains(&i) {
                te.push(v.clone());
            } else {
                tr.push(v.clone());
            }
        }
        train.insert(id, tr);
        test.insert(id, te);
    }
    Ok(SplitData { train, test, excluded })
}

/// Do two region rectangles share a boundary segment of positive length?
pub fn bounds_adjacent(a: &MotorBounds, b: &MotorBounds) -> bool {
    let overlap = |x: (f64, f64), y: (f64, f64)| x.1.min(y.1) - x.0.max(y.0) > 0.0;
    let touch_rot = a.rotation.1 == b.rotation.0 || b.rotation.1 == a.rotation.0;
    let touch_trav = a.travel.1 == b.travel.0 || b.travel.1 == a.travel.0;
    (touch_rot && overlap(a.travel, b.travel)) || (touch_trav && overlap(a.rotation, b.rotation))
}

/// Train one logistic classifier per category. Negatives are drawn without
/// replacement from the training vectors of the other categories — adjacent
/// regions (shared boundary segment) get first claim on the budget, the rest
/// is drawn uniformly from the remaining categories. The budget is
/// `negative_ratio` times the positive count, capped by availability.
pub fn train_wac<R: Rng + ?Sized>(
    train: &CategoryVectors,
    bounds: &BTreeMap<u32, MotorBounds>,
    cfg: &GroundingConfig,
    rng: &mut R,
    trained_on: &str,
) -> Result<WacModel, GroundingError> {
    let trainable = train.values().filter(|v| !v.is_empty()).count();
    if trainable < 2 {
        return Err(GroundingError::TooFewCategories(trainable));
    }
    let mut classifiers = BTreeMap::new();
    let mut centroids = BTreeMap::new();
    for (&id, positives) in train {
        if positives.is_empty() {
            return Err(GroundingError::EmptyCategory(id));
        }
        let negatives = sample_negatives(id, positives.len(), cfg, train, bounds, rng);
        let classifier = fit_logistic(id, positives, &negatives, cfg);
        let refs: Vec<&[f64]> = positives.iter().map(|v| v.as_slice()).collect();
        centroids.insert(id, vecmath::centroid(&refs));
        classifiers.insert(id, classifier);
    }
    Ok(WacModel { classifiers, centroids, trained_on: String::from(trained_on) })
}

fn sample_negatives<'a, R: Rng + ?Sized>(
    id: u32,
    positives: usize,
    cfg: &GroundingConfig,
    train: &'a CategoryVectors,
    bounds: &BTreeMap<u32, MotorBounds>,
    rng: &mut R,
) -> Vec<&'a [f64]> {
    let own_bounds = bounds.get(&id);
    let mut neighbor_pool: Vec<&[f64]> = Vec::new();
    let mut other_pool: Vec<&[f64]> = Vec::new();
    for (&other, vectors) in train {
        if other == id {
            continue;
        }
        let adjacent = match (own_bounds, bounds.get(&other)) {
            (Some(a), Some(b)) => bounds_adjacent(a, b),
            _ => false,
        };
        let pool = if adjacent { &mut neighbor_pool } else { &mut other_pool };
        pool.extend(vectors.iter().map(|v| v.as_slice()));
    }

    let available = neighbor_pool.len() + other_pool.len();
    let need =
        (mathf::round(cfg.negative_ratio * positives as f64) as usize).max(1).min(available);

    // Random permutations let the fill order cascade without duplicates:
    // neighbor quota first, then others, then leftover neighbors.
    let neighbor_order = rand::seq::index::sample(rng, neighbor_pool.len(), neighbor_pool.len());
    let other_order = rand::seq::index::sample(rng, other_pool.len(), other_pool.len());
    let quota = ((need as f64 * cfg.neighbor_negative_share) as usize)
        .min(neighbor_pool.len())
        .min(need);

    let mut negatives: Vec<&[f64]> = Vec::with_capacity(need);
    negatives.extend(neighbor_order.iter().take(quota).map(|i| neighbor_pool[i]));
    negatives.extend(
        other_order.iter().take(need - negatives.len()).map(|i| other_pool[i]),
    );
    if negatives.len() < need {
        let missing = need - negatives.len();
        negatives.extend(
            neighbor_order.iter().skip(quota).take(missing).map(|i| neighbor_pool[i]),
        );
    }
    negatives
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + mathf::exp(-z))
}

/// Full-batch gradient descent on standardized inputs.
fn fit_logistic(
    id: u32,
    positives: &[Vec<f64>],
    negatives: &[&[f64]],
    cfg: &GroundingConfig,
) -> WacClassifier {
    let dim = positives[0].len();
    let rows: Vec<&[f64]> = positives
        .iter()
        .map(|v| v.as_slice())
        .chain(negatives.iter().copied())
        .collect();
    let labels: Vec<f64> = core::iter::repeat(1.0)
        .take(positives.len())
        .chain(core::iter::repeat(0.0).take(negatives.len()))
        .collect();

    let mut mean = vec![0.0f64; dim];
    for r in &rows {
        for (m, x) in mean.iter_mut().zip(*r) {
            *m += x;
        }
    }
    for m in mean.iter_mut() {
        *m /= rows.len() as f64;
    }
    let mut std = vec![0.0f64; dim];
    for r in &rows {
        for ((s, x), m) in std.iter_mut().zip(*r).zip(&mean) {
            *s += (x - m) * (x - m);
        }
    }
    for s in std.iter_mut() {
        *s = mathf::sqrt(*s / rows.len() as f64);
        if *s == 0.0 {
            *s = 1.0;
        }
    }
    let x: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().zip(&mean).zip(&std).map(|((v, m), s)| (v - m) / s).collect())
        .collect();

    let mut weights = vec![0.0f64; dim];
    let mut bias = 0.0f64;
    for _ in 0..cfg.epochs {
        let (grad_w, grad_b) = logistic_gradient(&x, &labels, &weights, bias, cfg.l2);
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w -= cfg.learning_rate * g;
        }
        bias -= cfg.learning_rate * grad_b;
    }
    WacClassifier { category_id: id, weights, bias, feature_mean: mean, feature_std: std }
}

/// Mean cross-entropy plus an L2 penalty on the weights (bias unpenalized).
pub fn logistic_loss(x: &[Vec<f64>], y: &[f64], weights: &[f64], bias: f64, l2: f64) -> f64 {
    let n = x.len() as f64;
    let mut loss = 0.0;
    for (row, &label) in x.iter().zip(y) {
        let p = sigmoid(vecmath::dot(row, weights) + bias).clamp(1e-12, 1.0 - 1e-12);
        loss -= label * mathf::ln(p) + (1.0 - label) * mathf::ln(1.0 - p);
    }
    loss / n + 0.5 * l2 * vecmath::dot(weights, weights)
}

/// Analytic gradient of [`logistic_loss`].
pub fn logistic_gradient(
    x: &[Vec<f64>],
    y: &[f64],
    weights: &[f64],
    bias: f64,
    l2: f64,
) -> (Vec<f64>, f64) {
    let n = x.len() as f64;
    let mut grad_w = vec![0.0f64; weights.len()];
    let mut grad_b = 0.0f64;
    for (row, &label) in x.iter().zip(y) {
        let err = sigmoid(vecmath::dot(row, weights) + bias) - label;
        for (g, v) in grad_w.iter_mut().zip(row) {
            *g += err * v;
        }
        grad_b += err;
    }
    for (g, w) in grad_w.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    (grad_w, grad_b / n)
}

/// Argmax over classifier responses; ties go to the smallest category id.
pub fn predict_category(
    model: &WacModel,
    s: &[f64],
) -> Result<(u32, BTreeMap<u32, f64>), GroundingError> {
    let expected = model.dimension().ok_or(GroundingError::TooFewCategories(0))?;
    if s.len() != expected {
        return Err(GroundingError::DimensionMismatch { expected, got: s.len() });
    }
    let mut scores = BTreeMap::new();
    let mut best: Option<(u32, f64)> = None;
    for (&id, clf) in &model.classifiers {
        let score = clf.score(s);
        scores.insert(id, score);
        if best.map_or(true, |(_, b)| score > b) {
            best = Some((id, score));
        }
    }
    Ok((best.expect("model has classifiers").0, scores))
}

/// Score every held-out exemplar and assemble the report.
pub fn evaluate(model: &WacModel, test: &CategoryVectors) -> Result<EvalReport, GroundingError> {
    if test.values().all(|v| v.is_empty()) {
        return Err(GroundingError::EmptyTestSet);
    }
    for id in test.keys() {
        if !model.classifiers.contains_key(id) {
            return Err(GroundingError::UnknownCategory(*id));
        }
    }
    let mut rows = Vec::new();
    let mut correct = 0usize;
    for (&actual, vectors) in test {
        for v in vectors {
            let (predicted, scores) = predict_category(model, v)?;
            let mut ranked: Vec<f64> = scores.values().copied().collect();
            ranked.sort_by(|a, b| b.partial_cmp(a).expect("finite scores"));
            let margin = if ranked.len() > 1 { ranked[0] - ranked[1] } else { 0.0 };
            let centroid_similarity = match (model.centroids.get(&actual), model.centroids.get(&predicted)) {
                (Some(a), Some(p)) => vecmath::cosine_similarity(a, p).unwrap_or(0.0),
                _ => 0.0,
            };
            correct += (predicted == actual) as usize;
            rows.push(EvalRow { actual, predicted, margin, centroid_similarity });
        }
    }
    let n_categories = model.classifiers.len();
    Ok(EvalReport {
        accuracy: correct as f64 / rows.len() as f64,
        rows,
        n_categories,
        random_baseline: 1.0 / n_categories as f64,
        low_support: Vec::new(),
        excluded: Vec::new(),
    })
}

/// The whole grounding stage: split, train, evaluate, annotate.
pub fn ground_categories<R: Rng + ?Sized>(
    categories: &[CategorySample],
    cfg: &GroundingConfig,
    rng: &mut R,
    trained_on: &str,
) -> Result<GroundingOutcome, GroundingError> {
    let mut notices = Vec::new();
    let mut vectors = CategoryVectors::new();
    let mut bounds = BTreeMap::new();
    let mut totals = BTreeMap::new();
    for c in categories {
        if c.vectors.is_empty() {
            notices.push(format!("category {} has no samples; skipped", c.id));
            continue;
        }
        totals.insert(c.id, c.vectors.len());
        bounds.insert(c.id, c.bounds);
        vectors.insert(c.id, c.vectors.clone());
    }

    let split = split_train_test(&vectors, cfg.train_ratio, rng)?;
    for id in &split.excluded {
        notices.push(format!("category {id} has a single sample; untrainable, excluded"));
    }
    if split.train.len() < 2 {
        return Err(GroundingError::TooFewCategories(split.train.len()));
    }

    let model = train_wac(&split.train, &bounds, cfg, rng, trained_on)?;
    let mut report = evaluate(&model, &split.test)?;
    report.excluded = split.excluded.clone();
    report.low_support = totals
        .iter()
        .filter(|(id, &n)| n < cfg.low_support_threshold && model.classifiers.contains_key(id))
        .map(|(&id, _)| id)
        .collect();
    for id in &report.low_support {
        notices.push(format!(
            "category {id} trained on fewer than {} total samples; marked low-support",
            cfg.low_support_threshold
        ));
    }
    Ok(GroundingOutcome { model, report, notices })
}

//! Linear polynomial-filter GNNs `S^L X W⁽¹⁾⋯W⁽ᴸ⁾`, full-batch Adam training
//! and the teacher-student experiment: a teacher on the rewired graph
//! produces targets, a student on the original graph is fit to them, and
//! the final error is compared against the SRL of the rewiring.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{RawrError, Result};
use crate::generators::derive_seed;
use crate::graph::{degree_percentile, fmt6, Graph, NodeData, Percentile};
use crate::linalg::{DenseMatrix, SymMatrix};
use crate::metrics::pearson;
use crate::partition::{quotient, refine_eps_be, Partition};
use crate::rewire::{build_rewired, RewiredGraph, Variant};
use crate::spectral::{normalized_shift, srl};

/// Weight chain `W⁽¹⁾ … W⁽ᴸ⁾` with `W⁽ˡ⁾ : d_{l-1} × d_l`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearGnnWeights {
    pub layers: Vec<DenseMatrix>,
}

impl LinearGnnWeights {
    pub fn new(layers: Vec<DenseMatrix>) -> Result<Self> {
        if layers.is_empty() {
            return Err(RawrError::InvalidInput("at least one layer required".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].cols() != pair[1].rows() {
                return Err(RawrError::DimensionMismatch(format!(
                    "layer output {} does not match next input {}",
                    pair[0].cols(),
                    pair[1].rows()
                )));
            }
        }
        if !layers.iter().all(DenseMatrix::is_finite) {
            return Err(RawrError::InvalidInput("non-finite weight".into()));
        }
        Ok(LinearGnnWeights { layers })
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].rows()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].cols()
    }

    /// `W⁽¹⁾ ⋯ W⁽ᴸ⁾`.
    pub fn product(&self) -> DenseMatrix {
        let mut p = self.layers[0].clone();
        for w in &self.layers[1..] {
            p = p.matmul(w).expect("chained dims");
        }
        p
    }
}

/// `W⁽ˡ⁾_ij ~ N(0, σ_l² / d_{l-1})`, deterministic in `seed`.
pub fn gaussian_init(dims: &[usize], sigmas: &[f64], seed: u64) -> Result<LinearGnnWeights> {
    if dims.len() < 2 || sigmas.len() != dims.len() - 1 {
        return Err(RawrError::DimensionMismatch(format!(
            "{} dims need {} sigmas, got {}",
            dims.len(),
            dims.len().saturating_sub(1),
            sigmas.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = dims
        .windows(2)
        .zip(sigmas)
        .map(|(d, &sigma)| {
            let scale = sigma / (d[0] as f64).sqrt();
            let data = (0..d[0] * d[1])
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z * scale
                })
                .collect();
            DenseMatrix::from_vec(d[0], d[1], data)
        })
        .collect::<Result<Vec<_>>>()?;
    LinearGnnWeights::new(layers)
}

/// `S^L X W⁽¹⁾⋯W⁽ᴸ⁾` with `L` the number of layers.
pub fn forward(shift: &SymMatrix, x: &DenseMatrix, weights: &LinearGnnWeights) -> Result<DenseMatrix> {
    if x.rows() != shift.order() || x.cols() != weights.input_dim() {
        return Err(RawrError::DimensionMismatch(format!(
            "shift {}x{}, features {}x{}, weights expect {} inputs",
            shift.order(),
            shift.order(),
            x.rows(),
            x.cols(),
            weights.input_dim()
        )));
    }
    let mut out = x.matmul(&weights.product())?;
    for _ in 0..weights.depth() {
        out = shift.matrix().matmul(&out)?;
    }
    Ok(out)
}

/// Teacher outputs on the original nodes of a rewired graph.
pub fn teacher_labels(rewired: &RewiredGraph, weights: &LinearGnnWeights) -> Result<DenseMatrix> {
    let shift = normalized_shift(&rewired.dense_adjacency())?;
    let out = forward(&shift, &rewired.features, weights)?;
    Ok(out.slice_rows(0, rewired.origin_count()))
}

/// `‖Y − P‖_F² / (n · d_out)`.
pub fn mse(y_true: &DenseMatrix, y_pred: &DenseMatrix) -> f64 {
    let diff = y_true.sub(y_pred).expect("same shape");
    diff.frobenius_norm_sq() / (y_true.rows() * y_true.cols()).max(1) as f64
}

/// Loss and per-layer gradients of `‖Y − Z W⁽¹⁾⋯W⁽ᴸ⁾‖² / (n d_out)` where
/// `Z = S^L X` is precomputed.
pub fn loss_and_gradients(
    z: &DenseMatrix,
    y: &DenseMatrix,
    weights: &LinearGnnWeights,
) -> Result<(f64, Vec<DenseMatrix>)> {
    let depth = weights.depth();
    // prefix[l] = Z W1 .. W_l  (prefix[0] = Z)
    let mut prefix = Vec::with_capacity(depth + 1);
    prefix.push(z.clone());
    for w in &weights.layers {
        let next = prefix.last().unwrap().matmul(w)?;
        prefix.push(next);
    }
    let out = &prefix[depth];
    if out.rows() != y.rows() || out.cols() != y.cols() {
        return Err(RawrError::DimensionMismatch(format!(
            "prediction {}x{} vs target {}x{}",
            out.rows(),
            out.cols(),
            y.rows(),
            y.cols()
        )));
    }
    let denom = (y.rows() * y.cols()) as f64;
    let resid = out.sub(y)?;
    let loss = resid.frobenius_norm_sq() / denom;
    let g_out = resid.scale(2.0 / denom);

    // suffix[l] = W_{l+1} .. W_L as a d_l × d_out matrix
    let mut suffix = vec![DenseMatrix::identity(weights.output_dim()); depth];
    for l in (0..depth - 1).rev() {
        suffix[l] = weights.layers[l + 1].matmul(&suffix[l + 1])?;
    }
    let grads = (0..depth)
        .map(|l| prefix[l].transpose().matmul(&g_out.matmul(&suffix[l].transpose())?))
        .collect::<Result<Vec<_>>>()?;
    Ok((loss, grads))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams { beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// Adam state for a list of parameter matrices.
struct Adam {
    params: AdamParams,
    lr: f64,
    step: i32,
    m: Vec<DenseMatrix>,
    v: Vec<DenseMatrix>,
}

impl Adam {
    fn new(params: AdamParams, lr: f64, shapes: &[DenseMatrix]) -> Self {
        let zeros = || shapes.iter().map(|w| DenseMatrix::zeros(w.rows(), w.cols())).collect();
        Adam { params, lr, step: 0, m: zeros(), v: zeros() }
    }

    fn update(&mut self, weights: &mut [DenseMatrix], grads: &[DenseMatrix]) {
        self.step += 1;
        let AdamParams { beta1, beta2, epsilon } = self.params;
        let bc1 = 1.0 - beta1.powi(self.step);
        let bc2 = 1.0 - beta2.powi(self.step);
        for ((w, g), (m, v)) in weights.iter_mut().zip(grads).zip(self.m.iter_mut().zip(self.v.iter_mut())) {
            for r in 0..w.rows() {
                for c in 0..w.cols() {
                    let gi = g[(r, c)];
                    let mi = beta1 * m[(r, c)] + (1.0 - beta1) * gi;
                    let vi = beta2 * v[(r, c)] + (1.0 - beta2) * gi * gi;
                    m[(r, c)] = mi;
                    v[(r, c)] = vi;
                    w[(r, c)] -= self.lr * (mi / bc1) / ((vi / bc2).sqrt() + epsilon);
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub adam: AdamParams,
    pub seed: u64,
    /// Per-layer prior scales of the student initialization.
    pub sigmas: Vec<f64>,
    /// Hidden width; defaults to the input width.
    pub hidden: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.005,
            epochs: 5000,
            adam: AdamParams::default(),
            seed: 0,
            sigmas: vec![1.0, 1.0],
            hidden: None,
        }
    }
}

impl TrainConfig {
    fn validate(&self, layers: usize) -> Result<()> {
        if !(self.learning_rate > 0.0) || self.epochs == 0 {
            return Err(RawrError::InvalidInput("learning rate must be positive and epochs >= 1".into()));
        }
        if self.sigmas.len() != layers {
            return Err(RawrError::InvalidInput(format!(
                "{} sigmas for {layers} layers",
                self.sigmas.len()
            )));
        }
        Ok(())
    }
}

/// One scatter point of the experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct TsResult {
    pub srl: f64,
    pub mse_final: f64,
    /// MSE after each epoch.
    pub loss_trace: Vec<f64>,
    pub seed: u64,
    pub dataset_tag: String,
    pub eps: f64,
    pub percentile: Option<Percentile>,
    pub variant: Option<Variant>,
}

fn constant_features(n: usize) -> DenseMatrix {
    DenseMatrix::from_vec(n, 1, vec![1.0; n]).expect("shape")
}

/// Fits the student `S_obs^L X W` to `y_true` with full-batch Adam.
///
/// Without features the student sees one constant input column.
pub fn train_student(
    graph: &Graph,
    x: Option<&DenseMatrix>,
    y_true: &DenseMatrix,
    config: &TrainConfig,
    layers: usize,
) -> Result<(LinearGnnWeights, TsResult)> {
    config.validate(layers)?;
    let n = graph.num_nodes();
    if y_true.rows() != n {
        return Err(RawrError::DimensionMismatch(format!("{} target rows for {n} nodes", y_true.rows())));
    }
    let ones;
    let x = match x {
        Some(x) => x,
        None => {
            ones = constant_features(n);
            &ones
        }
    };
    let shift = normalized_shift(&graph.dense_adjacency())?;
    let z = shift.power(layers).matmul(x)?;

    let hidden = config.hidden.unwrap_or(x.cols());
    let mut dims = vec![x.cols()];
    dims.extend(std::iter::repeat(hidden).take(layers - 1));
    dims.push(y_true.cols());
    let mut weights = gaussian_init(&dims, &config.sigmas, config.seed)?;

    let mut adam = Adam::new(config.adam, config.learning_rate, &weights.layers);
    let mut trace = Vec::with_capacity(config.epochs);
    let (mut loss, mut grads) = loss_and_gradients(&z, y_true, &weights)?;
    for epoch in 0..config.epochs {
        adam.update(&mut weights.layers, &grads);
        (loss, grads) = loss_and_gradients(&z, y_true, &weights)?;
        if !loss.is_finite() {
            return Err(RawrError::Divergence { epoch, loss });
        }
        trace.push(loss);
    }
    let result = TsResult {
        srl: f64::NAN,
        mse_final: loss,
        loss_trace: trace,
        seed: config.seed,
        dataset_tag: String::new(),
        eps: f64::NAN,
        percentile: None,
        variant: None,
    };
    Ok((weights, result))
}

/// A graph with its node data and a name for reports.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub tag: String,
    pub graph: Graph,
    pub data: NodeData,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub train: TrainConfig,
    /// Teacher prior scales, one per layer.
    pub teacher_sigmas: Vec<f64>,
    pub layers: usize,
    pub variants: Vec<Variant>,
    pub percentiles: Vec<Percentile>,
    /// Output width when a dataset carries no labels.
    pub default_classes: usize,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            train: TrainConfig::default(),
            teacher_sigmas: vec![1.0, 40.0],
            layers: 2,
            variants: vec![Variant::Full],
            percentiles: vec![Percentile::P0, Percentile::P50, Percentile::P100],
            default_classes: 2,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TsExperiment {
    pub results: Vec<TsResult>,
    pub pearson: Option<f64>,
}

impl TsExperiment {
    /// `dataset,variant,percentile,eps,srl,mse,seed` rows plus a
    /// `# pearson=` summary line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset,variant,percentile,eps,srl,mse,seed\n");
        for r in &self.results {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.dataset_tag,
                r.variant.map_or("", Variant::as_str),
                r.percentile.map_or(String::new(), |p| p.value().to_string()),
                fmt6(r.eps),
                fmt6(r.srl),
                fmt6(r.mse_final),
                r.seed
            );
        }
        let p = self.pearson.map_or("nan".to_string(), fmt6);
        let _ = writeln!(out, "# pearson={p}");
        out
    }
}

/// Everything one (dataset, percentile, variant) run needs besides training.
pub struct TeacherSetup {
    pub partition: Partition,
    pub rewired: RewiredGraph,
    pub weights: LinearGnnWeights,
    pub y_true: DenseMatrix,
    pub eps: f64,
}

/// Rewires `dataset` at `percentile` and draws a teacher from `seed`.
pub fn teacher_setup(
    dataset: &Dataset,
    variant: Variant,
    percentile: Percentile,
    teacher_sigmas: &[f64],
    classes: usize,
    seed: u64,
) -> Result<TeacherSetup> {
    let graph = &dataset.graph;
    let eps = degree_percentile(graph, percentile);
    let partition = match variant {
        Variant::MasterNode => Partition::single_block(graph.num_nodes()),
        _ => refine_eps_be(graph, eps),
    };
    let q = quotient(graph, &partition)?;
    let rewired = build_rewired(graph, &partition, &q, variant, dataset.data.features.as_ref())?;
    let d_in = rewired.features.cols();
    let mut dims = vec![d_in; teacher_sigmas.len()];
    dims.push(classes);
    let weights = gaussian_init(&dims, teacher_sigmas, seed)?;
    let y_true = teacher_labels(&rewired, &weights)?;
    Ok(TeacherSetup { partition, rewired, weights, y_true, eps })
}

/// Student outputs with the teacher weights plugged in, `h(S_obs) B` where
/// `B` is the original-node rows of `X_aug W_t`, and the squared error
/// `Σ_c ‖y_true − h(S_obs) B‖²` against the teacher targets.
pub fn plugged_teacher_error(graph: &Graph, setup: &TeacherSetup) -> Result<(DenseMatrix, f64)> {
    let n = graph.num_nodes();
    let signal = setup.rewired.features.matmul(&setup.weights.product())?.slice_rows(0, n);
    let shift = normalized_shift(&graph.dense_adjacency())?;
    let y_obs = shift.power(setup.weights.depth()).matmul(&signal)?;
    let err = setup.y_true.sub(&y_obs)?.frobenius_norm_sq();
    Ok((y_obs, err))
}

/// Runs every (dataset, percentile, variant) combination and correlates the
/// SRL of each rewiring (measured against the teacher outputs) with the
/// student's final training error.
///
/// Task `i` of the cartesian product draws its teacher from
/// `derive_seed(seed, 2i)` and its student from `derive_seed(seed, 2i+1)`,
/// so results do not depend on scheduling.
pub fn run_ts_experiment(datasets: &[Dataset], config: &ExperimentConfig) -> Result<TsExperiment> {
    if config.teacher_sigmas.len() != config.layers {
        return Err(RawrError::InvalidInput("one teacher sigma per layer required".into()));
    }
    let tasks: Vec<(&Dataset, Percentile, Variant)> = datasets
        .iter()
        .flat_map(|d| {
            config.percentiles.iter().flat_map(move |&p| config.variants.iter().map(move |&v| (d, p, v)))
        })
        .collect();
    let results = tasks
        .par_iter()
        .enumerate()
        .map(|(i, &(dataset, percentile, variant))| {
            let classes = match dataset.data.num_classes() {
                0 => config.default_classes,
                c => c,
            };
            let teacher_seed = derive_seed(config.seed, 2 * i as u64);
            let student_seed = derive_seed(config.seed, 2 * i as u64 + 1);
            let setup =
                teacher_setup(dataset, variant, percentile, &config.teacher_sigmas, classes, teacher_seed)?;
            let report = srl(&dataset.graph, &setup.rewired, &setup.partition, &setup.y_true, config.layers)?;
            let train = TrainConfig { seed: student_seed, ..config.train.clone() };
            let (_, mut result) = train_student(
                &dataset.graph,
                dataset.data.features.as_ref(),
                &setup.y_true,
                &train,
                config.layers,
            )?;
            result.srl = report.srl;
            result.dataset_tag = dataset.tag.clone();
            result.eps = setup.eps;
            result.percentile = Some(percentile);
            result.variant = Some(variant);
            Ok(result)
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = results.iter().map(|r| r.srl).collect();
    let ys: Vec<f64> = results.iter().map(|r| r.mse_final).collect();
    Ok(TsExperiment { pearson: pearson(&xs, &ys), results })
}

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SplitArchitecture;
use crate::cluster::ClusterAssignment;
use crate::error::{Error, Result};
use crate::math::{relu_scalar, sigmoid, softplus_scalar, Matrix, ParamLayout};

/// Added to every predicted variance.
pub const VARIANCE_FLOOR: f64 = 1e-6;

/// Initial bias of each variance head, so that σ² starts near softplus(0.5).
pub const VARIANCE_BIAS_INIT: f64 = 0.5;

/// Variance-head weights are drawn at this fraction of the fan-in scale,
/// keeping initial variances inside [0.5, 2] on standardized inputs.
pub const VARIANCE_WEIGHT_GAIN: f64 = 0.5;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Mean and per-cluster variances for one input.
///
/// There is a single mean shared by every cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPrediction {
    pub mean: f64,
    pub variances: Vec<f64>,
}

impl SplitPrediction {
    pub fn k(&self) -> usize {
        self.variances.len()
    }

    /// The mean seen by cluster `i`, which is the shared mean.
    pub fn cluster_mean(&self, _cluster: usize) -> f64 {
        self.mean
    }
}

/// Block ids of one split inside the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
struct SplitBlocks {
    trunk_w: usize,
    trunk_b: usize,
    var_w: usize,
    var_b: usize,
    /// Offset of this split's activations in the concatenated hidden layer.
    hidden_offset: usize,
}

/// All trainable weights of a split network, stored flat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitNetworkParams {
    arch: SplitArchitecture,
    layout: ParamLayout,
    splits: Vec<SplitBlocks>,
    mean_w: usize,
    mean_b: usize,
    values: Vec<f64>,
}

impl SplitNetworkParams {
    /// Zero-filled parameters for `arch`.
    pub fn zeros(arch: &SplitArchitecture) -> Result<Self> {
        arch.validate()?;
        let mut layout = ParamLayout::default();
        let mut splits = Vec::with_capacity(arch.k());
        let mut hidden_offset = 0;
        for (i, (&m, &h)) in arch.cluster_sizes.iter().zip(&arch.hidden).enumerate() {
            let trunk_w = layout.push(format!("split{i}.trunk.weight"), m, h);
            let trunk_b = layout.push(format!("split{i}.trunk.bias"), 1, h);
            splits.push(SplitBlocks {
                trunk_w,
                trunk_b,
                var_w: 0,
                var_b: 0,
                hidden_offset,
            });
            hidden_offset += h;
        }
        let mean_w = layout.push("mean.weight", arch.total_hidden(), 1);
        let mean_b = layout.push("mean.bias", 1, 1);
        for (i, &h) in arch.hidden.iter().enumerate() {
            splits[i].var_w = layout.push(format!("split{i}.variance.weight"), h, 1);
            splits[i].var_b = layout.push(format!("split{i}.variance.bias"), 1, 1);
        }
        let values = vec![0.0; layout.total()];
        Ok(SplitNetworkParams {
            arch: arch.clone(),
            layout,
            splits,
            mean_w,
            mean_b,
            values,
        })
    }

    /// Uniform(-s, s) weights with s = sqrt(1/fan_in) (times
    /// [`VARIANCE_WEIGHT_GAIN`] for variance heads), zero biases, and
    /// variance-head biases at [`VARIANCE_BIAS_INIT`].
    pub fn init(arch: &SplitArchitecture, seed: u64) -> Result<Self> {
        let mut p = Self::zeros(arch)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weight_blocks: Vec<(usize, f64)> = p
            .splits
            .iter()
            .map(|s| (s.trunk_w, 1.0))
            .chain(std::iter::once((p.mean_w, 1.0)))
            .chain(p.splits.iter().map(|s| (s.var_w, VARIANCE_WEIGHT_GAIN)))
            .collect();
        for (id, gain) in weight_blocks {
            let block = p.layout.block(id).clone();
            let scale = gain * (1.0 / block.rows as f64).sqrt();
            for v in &mut p.values[block.range()] {
                *v = rng.random_range(-scale..scale);
            }
        }
        for i in 0..p.splits.len() {
            let r = p.layout.block(p.splits[i].var_b).range();
            p.values[r].fill(VARIANCE_BIAS_INIT);
        }
        Ok(p)
    }

    pub fn architecture(&self) -> &SplitArchitecture {
        &self.arch
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn set_values(&mut self, values: Vec<f64>) -> Result<()> {
        if values.len() != self.values.len() {
            return Err(Error::shape("parameter vector", self.values.len(), values.len()));
        }
        self.values = values;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    fn block(&self, id: usize) -> &[f64] {
        &self.values[self.layout.block(id).range()]
    }

    fn block_mut(&mut self, id: usize) -> &mut [f64] {
        let r = self.layout.block(id).range();
        &mut self.values[r]
    }

    /// Trunk weight matrix (cluster size × hidden) of split `i`.
    pub fn trunk_weights(&self, i: usize) -> Matrix {
        let b = self.layout.block(self.splits[i].trunk_w);
        Matrix::from_vec(b.rows, b.cols, self.block(self.splits[i].trunk_w).to_vec()).expect("layout")
    }

    pub fn trunk_bias(&self, i: usize) -> &[f64] {
        self.block(self.splits[i].trunk_b)
    }

    /// Mean-head weights over the concatenated hidden layer, as an H×1 matrix.
    pub fn mean_weights(&self) -> Matrix {
        Matrix::from_vec(self.arch.total_hidden(), 1, self.block(self.mean_w).to_vec()).expect("layout")
    }

    pub fn mean_bias(&self) -> f64 {
        self.block(self.mean_b)[0]
    }

    pub fn variance_weights(&self, i: usize) -> Matrix {
        Matrix::from_vec(self.arch.hidden[i], 1, self.block(self.splits[i].var_w).to_vec()).expect("layout")
    }

    pub fn variance_bias(&self, i: usize) -> f64 {
        self.block(self.splits[i].var_b)[0]
    }

    pub fn set_mean_bias(&mut self, v: f64) {
        let id = self.mean_b;
        self.block_mut(id)[0] = v;
    }

    pub fn set_variance_bias(&mut self, i: usize, v: f64) {
        let id = self.splits[i].var_b;
        self.block_mut(id)[0] = v;
    }

    fn check_assignment(&self, assignment: &ClusterAssignment) -> Result<()> {
        if !self.arch.matches(assignment) {
            return Err(Error::Config(format!(
                "cluster sizes {:?} do not match architecture {:?}",
                assignment.sizes(),
                self.arch.cluster_sizes
            )));
        }
        Ok(())
    }
}

/// Per-sample intermediate values needed for the backward pass.
struct Trace {
    pre: Vec<f64>,
    act: Vec<f64>,
    var_pre: Vec<f64>,
    variances: Vec<f64>,
    mean: f64,
}

impl Trace {
    fn new(arch: &SplitArchitecture) -> Self {
        let h = arch.total_hidden();
        Trace {
            pre: vec![0.0; h],
            act: vec![0.0; h],
            var_pre: vec![0.0; arch.k()],
            variances: vec![0.0; arch.k()],
            mean: 0.0,
        }
    }
}

fn trace_forward(params: &SplitNetworkParams, assignment: &ClusterAssignment, x: &[f64], t: &mut Trace) {
    let v = &params.values;
    let layout = &params.layout;
    let mean_w = layout.block(params.mean_w).offset;
    let mut mean = v[layout.block(params.mean_b).offset];
    for (i, s) in params.splits.iter().enumerate() {
        let h = params.arch.hidden[i];
        let w_off = layout.block(s.trunk_w).offset;
        let b_off = layout.block(s.trunk_b).offset;
        let pre = &mut t.pre[s.hidden_offset..s.hidden_offset + h];
        pre.copy_from_slice(&v[b_off..b_off + h]);
        for (j, &f) in assignment.cluster(i).iter().enumerate() {
            let xf = x[f];
            let row = &v[w_off + j * h..w_off + (j + 1) * h];
            for (p, &w) in pre.iter_mut().zip(row) {
                *p += xf * w;
            }
        }
        let vw_off = layout.block(s.var_w).offset;
        let mut var_pre = v[layout.block(s.var_b).offset];
        for u in 0..h {
            let a = relu_scalar(pre[u]);
            t.act[s.hidden_offset + u] = a;
            var_pre += v[vw_off + u] * a;
            mean += v[mean_w + s.hidden_offset + u] * a;
        }
        t.var_pre[i] = var_pre;
        t.variances[i] = softplus_scalar(var_pre) + VARIANCE_FLOOR;
    }
    t.mean = mean;
}

fn check_input(params: &SplitNetworkParams, assignment: &ClusterAssignment, width: usize) -> Result<()> {
    params.check_assignment(assignment)?;
    if width != assignment.feature_count() {
        // name the first cluster that reaches past the input
        let cluster = assignment
            .clusters()
            .iter()
            .position(|c| c.iter().any(|&f| f >= width))
            .unwrap_or(0);
        return Err(Error::ClusterDimension {
            cluster,
            expected: assignment.feature_count(),
            actual: width,
        });
    }
    Ok(())
}

/// Forward pass for one feature vector.
pub fn forward(x: &[f64], params: &SplitNetworkParams, assignment: &ClusterAssignment) -> Result<SplitPrediction> {
    check_input(params, assignment, x.len())?;
    let mut t = Trace::new(&params.arch);
    trace_forward(params, assignment, x, &mut t);
    Ok(SplitPrediction {
        mean: t.mean,
        variances: t.variances,
    })
}

/// Forward pass for every row of `x`.
pub fn forward_batch(x: &Matrix, params: &SplitNetworkParams, assignment: &ClusterAssignment) -> Result<Vec<SplitPrediction>> {
    check_input(params, assignment, x.cols())?;
    let mut t = Trace::new(&params.arch);
    Ok((0..x.rows())
        .map(|r| {
            trace_forward(params, assignment, x.row(r), &mut t);
            SplitPrediction {
                mean: t.mean,
                variances: t.variances.clone(),
            }
        })
        .collect())
}

/// Diagonal-Gaussian negative log-likelihood of the target replicated across
/// clusters, constant term included.
pub fn nll_loss(pred: &SplitPrediction, y: f64) -> Result<f64> {
    let r2 = (y - pred.mean).powi(2);
    let mut total = 0.0;
    for (i, &s2) in pred.variances.iter().enumerate() {
        if !(s2 > 0.0) {
            return Err(Error::NonPositiveVariance { cluster: i, value: s2 });
        }
        total += 0.5 * (s2.ln() + r2 / s2) + HALF_LN_2PI;
    }
    Ok(total)
}

/// Per-cluster terms of dNLL/dμ at the mean head, `(μ - y) / σ²ᵢ`.
///
/// Each cluster's pull on the shared mean is inversely proportional to its
/// predicted variance.
pub fn mean_gradient_terms(pred: &SplitPrediction, y: f64) -> Vec<f64> {
    pred.variances.iter().map(|&s2| (pred.mean - y) / s2).collect()
}

/// dNLL/dμ at the mean head for one sample.
pub fn mean_gradient(pred: &SplitPrediction, y: f64) -> f64 {
    mean_gradient_terms(pred, y).iter().sum()
}

/// Reusable buffers for [`accumulate_gradients`].
pub struct GradientWorkspace {
    trace: Trace,
    dact: Vec<f64>,
}

impl GradientWorkspace {
    pub fn new(arch: &SplitArchitecture) -> Self {
        GradientWorkspace {
            trace: Trace::new(arch),
            dact: vec![0.0; arch.total_hidden()],
        }
    }
}

/// Mean NLL over the rows `rows` of `(x, y)`, with its gradient written to `grad`.
///
/// `grad` is overwritten, not accumulated into.
pub fn accumulate_gradients(
    params: &SplitNetworkParams,
    assignment: &ClusterAssignment,
    x: &Matrix,
    y: &[f64],
    rows: &[usize],
    grad: &mut [f64],
    ws: &mut GradientWorkspace,
) -> Result<f64> {
    if rows.is_empty() {
        return Err(Error::Config("empty batch".into()));
    }
    check_input(params, assignment, x.cols())?;
    if grad.len() != params.len() {
        return Err(Error::shape("gradient buffer", params.len(), grad.len()));
    }
    grad.fill(0.0);
    let v = &params.values;
    let layout = &params.layout;
    let mean_w = layout.block(params.mean_w).offset;
    let mean_b = layout.block(params.mean_b).offset;
    let k = params.arch.k();

    let mut total = 0.0;
    for &r in rows {
        let xr = x.row(r);
        trace_forward(params, assignment, xr, &mut ws.trace);
        let t = &ws.trace;
        let resid = y[r] - t.mean;
        let r2 = resid * resid;

        let mut loss = k as f64 * HALF_LN_2PI;
        let mut inv_sum = 0.0;
        for &s2 in &t.variances {
            loss += 0.5 * (s2.ln() + r2 / s2);
            inv_sum += 1.0 / s2;
        }
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { sample: r });
        }
        total += loss;

        // dL/dmu = sum_i (mu - y) / s2_i
        let g_mean = -resid * inv_sum;
        grad[mean_b] += g_mean;
        for u in 0..t.act.len() {
            grad[mean_w + u] += g_mean * t.act[u];
            ws.dact[u] = g_mean * v[mean_w + u];
        }

        for (i, s) in params.splits.iter().enumerate() {
            let h = params.arch.hidden[i];
            let s2 = t.variances[i];
            // dL/ds2 = (1/s2 - r^2/s2^2) / 2, ds2/dpre = sigmoid(pre)
            let g_pre = 0.5 * (1.0 / s2 - r2 / (s2 * s2)) * sigmoid(t.var_pre[i]);
            let vw = layout.block(s.var_w).offset;
            grad[layout.block(s.var_b).offset] += g_pre;
            for u in 0..h {
                let a = t.act[s.hidden_offset + u];
                grad[vw + u] += g_pre * a;
                ws.dact[s.hidden_offset + u] += g_pre * v[vw + u];
            }

            let tw = layout.block(s.trunk_w).offset;
            let tb = layout.block(s.trunk_b).offset;
            for u in 0..h {
                let idx = s.hidden_offset + u;
                if t.pre[idx] <= 0.0 {
                    ws.dact[idx] = 0.0;
                }
                grad[tb + u] += ws.dact[idx];
            }
            let dz = &ws.dact[s.hidden_offset..s.hidden_offset + h];
            for (j, &f) in assignment.cluster(i).iter().enumerate() {
                let xf = xr[f];
                if xf == 0.0 {
                    continue;
                }
                let row = &mut grad[tw + j * h..tw + (j + 1) * h];
                for (g, &d) in row.iter_mut().zip(dz) {
                    *g += xf * d;
                }
            }
        }
    }

    let scale = 1.0 / rows.len() as f64;
    for g in grad.iter_mut() {
        *g *= scale;
    }
    Ok(total * scale)
}

/// Mean NLL over all rows of `(x, y)` and its gradient.
pub fn loss_and_gradients(
    params: &SplitNetworkParams,
    assignment: &ClusterAssignment,
    x: &Matrix,
    y: &[f64],
) -> Result<(f64, Vec<f64>)> {
    if y.len() != x.rows() {
        return Err(Error::shape("targets", x.rows(), y.len()));
    }
    let rows: Vec<usize> = (0..x.rows()).collect();
    let mut grad = vec![0.0; params.len()];
    let mut ws = GradientWorkspace::new(&params.arch);
    let loss = accumulate_gradients(params, assignment, x, y, &rows, &mut grad, &mut ws)?;
    Ok((loss, grad))
}

/// Mean NLL over all rows, no gradient.
pub fn mean_nll(params: &SplitNetworkParams, assignment: &ClusterAssignment, x: &Matrix, y: &[f64]) -> Result<f64> {
    let preds = forward_batch(x, params, assignment)?;
    let mut total = 0.0;
    for (p, &t) in preds.iter().zip(y) {
        total += nll_loss(p, t)?;
    }
    Ok(total / y.len() as f64)
}

//! Histogram-based gradient-boosted regression trees.
//!
//! Features are quantized into at most 256 bins per column. Trees grow
//! leaf-wise (best gain first) up to `max_leaves`, with Newton leaf values
//! `-G / (H + l2)` shrunk by the learning rate. Child histograms are built
//! for the smaller child only; the sibling is obtained by subtraction.

use serde::{Deserialize, Serialize};

use super::{sigmoid, Task};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HgbParams {
    pub learning_rate: f64,
    pub max_iterations: usize,
    pub max_bins: usize,
    pub max_leaves: usize,
    pub min_samples_leaf: usize,
    pub l2_regularization: f64,
    pub min_hessian_leaf: f64,
}

impl Default for HgbParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            max_iterations: 100,
            max_bins: 256,
            max_leaves: 31,
            min_samples_leaf: 20,
            l2_regularization: 0.0,
            min_hessian_leaf: 1e-3,
        }
    }
}

/// Per-feature ascending bin edges. A value `v` falls in bin `b` iff
/// `edges[b - 1] < v <= edges[b]`; the last bin is open above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinMapper {
    pub edges: Vec<Vec<f64>>,
}

impl BinMapper {
    /// When a column has at most `max_bins` distinct values every value
    /// gets its own bin (edges at midpoints), so binning is lossless.
    /// Otherwise edges sit at quantiles of the column.
    pub fn fit(x: &Matrix, max_bins: usize) -> Self {
        let max_bins = max_bins.clamp(2, 256);
        let edges = (0..x.ncols())
            .map(|f| {
                let mut col = x.column(f);
                col.sort_by(f64::total_cmp);
                let mut distinct = col.clone();
                distinct.dedup();
                if distinct.len() <= max_bins {
                    return distinct.windows(2).map(|w| midpoint(w[0], w[1])).collect();
                }
                let n = col.len();
                let mut edges: Vec<f64> = Vec::with_capacity(max_bins - 1);
                for k in 1..max_bins {
                    let v = col[(k * n / max_bins).saturating_sub(1)];
                    // next distinct value above v
                    let pos = distinct.partition_point(|&d| d <= v);
                    if pos < distinct.len() {
                        let e = midpoint(v, distinct[pos]);
                        if edges.last().is_none_or(|&last| e > last) {
                            edges.push(e);
                        }
                    }
                }
                edges
            })
            .collect();
        Self { edges }
    }

    pub fn n_bins(&self, feature: usize) -> usize {
        self.edges[feature].len() + 1
    }

    #[inline]
    pub fn bin(&self, feature: usize, value: f64) -> u8 {
        self.edges[feature].partition_point(|&e| e < value) as u8
    }

    /// Feature-major bin codes: `codes[f * n + i]`.
    pub fn transform(&self, x: &Matrix) -> BinnedMatrix {
        let n = x.nrows();
        let mut codes = vec![0u8; n * x.ncols()];
        for f in 0..x.ncols() {
            for i in 0..n {
                codes[f * n + i] = self.bin(f, x.get(i, f));
            }
        }
        BinnedMatrix {
            n_rows: n,
            n_features: x.ncols(),
            codes,
        }
    }
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    // keep a < m <= b even when a and b are adjacent floats
    if m <= a {
        b
    } else {
        m
    }
}

#[derive(Debug, Clone)]
pub struct BinnedMatrix {
    pub n_rows: usize,
    pub n_features: usize,
    codes: Vec<u8>,
}

impl BinnedMatrix {
    #[inline]
    fn column(&self, feature: usize) -> &[u8] {
        &self.codes[feature * self.n_rows..(feature + 1) * self.n_rows]
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct BinStat {
    grad: f64,
    hess: f64,
    count: u32,
}

/// Flat histogram across features; `offsets[f]` is the first bin of `f`.
#[derive(Debug, Clone)]
struct Histogram {
    bins: Vec<BinStat>,
}

impl Histogram {
    fn build(data: &BinnedMatrix, offsets: &[usize], total_bins: usize, rows: &[u32], grad: &[f64], hess: &[f64]) -> Self {
        let mut bins = vec![BinStat::default(); total_bins];
        for f in 0..data.n_features {
            let col = data.column(f);
            let hist = &mut bins[offsets[f]..offsets[f + 1]];
            for &r in rows {
                let r = r as usize;
                let b = &mut hist[col[r] as usize];
                b.grad += grad[r];
                b.hess += hess[r];
                b.count += 1;
            }
        }
        Self { bins }
    }

    fn subtract(&self, other: &Histogram) -> Histogram {
        Histogram {
            bins: self
                .bins
                .iter()
                .zip(&other.bins)
                .map(|(a, b)| BinStat {
                    grad: a.grad - b.grad,
                    hess: a.hess - b.hess,
                    count: a.count - b.count,
                })
                .collect(),
        }
    }
}

/// Best split of a node: rows with `bin <= bin` (equivalently
/// `value <= threshold`) go left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitInfo {
    pub feature: usize,
    pub bin: u8,
    pub threshold: f64,
    pub gain: f64,
    left_grad: f64,
    left_hess: f64,
    left_count: usize,
}

#[inline]
fn score(grad: f64, hess: f64, l2: f64) -> f64 {
    grad * grad / (hess + l2)
}

fn best_split_from_histogram(
    hist: &Histogram,
    offsets: &[usize],
    mapper: &BinMapper,
    totals: (f64, f64, usize),
    params: &HgbParams,
) -> Option<SplitInfo> {
    let (g_total, h_total, n_total) = totals;
    let parent = score(g_total, h_total, params.l2_regularization);
    let mut best: Option<SplitInfo> = None;
    for f in 0..offsets.len() - 1 {
        let bins = &hist.bins[offsets[f]..offsets[f + 1]];
        let (mut gl, mut hl, mut nl) = (0.0, 0.0, 0usize);
        // the last bin cannot be a left side: nothing would go right
        for (b, stat) in bins.iter().enumerate().take(bins.len().saturating_sub(1)) {
            gl += stat.grad;
            hl += stat.hess;
            nl += stat.count as usize;
            let nr = n_total - nl;
            if nl < params.min_samples_leaf {
                continue;
            }
            if nr < params.min_samples_leaf {
                break;
            }
            let hr = h_total - hl;
            if hl < params.min_hessian_leaf || hr < params.min_hessian_leaf {
                continue;
            }
            let gain = score(gl, hl, params.l2_regularization) + score(g_total - gl, hr, params.l2_regularization) - parent;
            if gain > 1e-12 && best.is_none_or(|s| gain > s.gain) {
                best = Some(SplitInfo {
                    feature: f,
                    bin: b as u8,
                    threshold: mapper.edges[f][b],
                    gain,
                    left_grad: gl,
                    left_hess: hl,
                    left_count: nl,
                });
            }
        }
    }
    best
}

fn offsets_for(mapper: &BinMapper) -> (Vec<usize>, usize) {
    let mut offsets = Vec::with_capacity(mapper.edges.len() + 1);
    let mut acc = 0;
    offsets.push(0);
    for f in 0..mapper.edges.len() {
        acc += mapper.n_bins(f);
        offsets.push(acc);
    }
    (offsets, acc)
}

/// Best histogram split for the node holding `rows`. Exposed so the split
/// search can be checked against an exhaustive search over raw values.
pub fn find_best_split(
    x: &Matrix,
    rows: &[u32],
    grad: &[f64],
    hess: &[f64],
    params: &HgbParams,
) -> Option<SplitInfo> {
    let mapper = BinMapper::fit(x, params.max_bins);
    let data = mapper.transform(x);
    let (offsets, total_bins) = offsets_for(&mapper);
    let hist = Histogram::build(&data, &offsets, total_bins, rows, grad, hess);
    let g: f64 = rows.iter().map(|&r| grad[r as usize]).sum();
    let h: f64 = rows.iter().map(|&r| hess[r as usize]).sum();
    best_split_from_histogram(&hist, &offsets, &mapper, (g, h, rows.len()), params)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub feature: u32,
    pub threshold: f64,
    pub left: u32,
    pub right: u32,
    pub value: f64,
    pub is_leaf: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0usize;
        loop {
            let node = &self.nodes[i];
            if node.is_leaf {
                return node.value;
            }
            i = if row[node.feature as usize] <= node.threshold {
                node.left as usize
            } else {
                node.right as usize
            };
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HgbEnsemble {
    pub baseline: f64,
    pub trees: Vec<Tree>,
}

impl HgbEnsemble {
    pub fn raw_predict_row(&self, row: &[f64]) -> f64 {
        self.baseline + self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>()
    }

    pub fn predict_row(&self, row: &[f64], task: Task) -> f64 {
        let raw = self.raw_predict_row(row);
        match task {
            Task::Regression => raw,
            Task::BinaryClassification => sigmoid(raw),
        }
    }
}

struct Leaf {
    node: usize,
    start: usize,
    end: usize,
    grad: f64,
    hess: f64,
    hist: Histogram,
    split: Option<SplitInfo>,
}

struct TreeGrower<'a> {
    data: &'a BinnedMatrix,
    mapper: &'a BinMapper,
    offsets: &'a [usize],
    total_bins: usize,
    params: &'a HgbParams,
}

impl TreeGrower<'_> {
    fn make_leaf(&self, node: usize, start: usize, end: usize, hist: Histogram, grad: f64, hess: f64) -> Leaf {
        let split = best_split_from_histogram(&hist, self.offsets, self.mapper, (grad, hess, end - start), self.params);
        Leaf {
            node,
            start,
            end,
            grad,
            hess,
            hist,
            split,
        }
    }

    /// Grows one tree; `indices` is reordered so each leaf owns a range.
    /// Returns the tree and, per leaf, `(start, end, value)`.
    fn grow(&self, indices: &mut [u32], grad: &[f64], hess: &[f64]) -> (Tree, Vec<(usize, usize, f64)>) {
        let n = indices.len();
        let root_hist = Histogram::build(self.data, self.offsets, self.total_bins, indices, grad, hess);
        let g: f64 = indices.iter().map(|&r| grad[r as usize]).sum();
        let h: f64 = indices.iter().map(|&r| hess[r as usize]).sum();
        let mut nodes = vec![TreeNode {
            feature: 0,
            threshold: 0.0,
            left: 0,
            right: 0,
            value: 0.0,
            is_leaf: true,
        }];
        let mut leaves = vec![self.make_leaf(0, 0, n, root_hist, g, h)];
        while leaves.len() < self.params.max_leaves {
            let Some(pick) = leaves
                .iter()
                .enumerate()
                .filter_map(|(i, l)| l.split.map(|s| (i, s.gain)))
                .fold(None, |best: Option<(usize, f64)>, (i, gain)| match best {
                    Some((_, g)) if g >= gain => best,
                    _ => Some((i, gain)),
                })
                .map(|(i, _)| i)
            else {
                break;
            };
            let leaf = leaves.swap_remove(pick);
            let split = leaf.split.expect("picked a splittable leaf");
            let col = self.data.column(split.feature);
            let range = &mut indices[leaf.start..leaf.end];
            // stable partition keeps row order deterministic
            let (left_rows, right_rows): (Vec<u32>, Vec<u32>) =
                range.iter().partition(|&&r| col[r as usize] <= split.bin);
            debug_assert_eq!(left_rows.len(), split.left_count);
            let mid = leaf.start + left_rows.len();
            range[..left_rows.len()].copy_from_slice(&left_rows);
            range[left_rows.len()..].copy_from_slice(&right_rows);

            let (lg, lh) = (split.left_grad, split.left_hess);
            let (rg, rh) = (leaf.grad - lg, leaf.hess - lh);
            let (left_hist, right_hist) = if left_rows.len() <= right_rows.len() {
                let small = Histogram::build(self.data, self.offsets, self.total_bins, &left_rows, grad, hess);
                let big = leaf.hist.subtract(&small);
                (small, big)
            } else {
                let small = Histogram::build(self.data, self.offsets, self.total_bins, &right_rows, grad, hess);
                let big = leaf.hist.subtract(&small);
                (big, small)
            };
            let left_id = nodes.len();
            let right_id = left_id + 1;
            nodes[leaf.node] = TreeNode {
                feature: split.feature as u32,
                threshold: split.threshold,
                left: left_id as u32,
                right: right_id as u32,
                value: 0.0,
                is_leaf: false,
            };
            nodes.push(nodes[0]);
            nodes.push(nodes[0]);
            let left = self.make_leaf(left_id, leaf.start, mid, left_hist, lg, lh);
            let right = self.make_leaf(right_id, mid, leaf.end, right_hist, rg, rh);
            leaves.push(left);
            leaves.push(right);
        }
        let mut assignments = Vec::with_capacity(leaves.len());
        for leaf in &leaves {
            let denom = leaf.hess + self.params.l2_regularization;
            let value = if denom > 1e-12 {
                -self.params.learning_rate * leaf.grad / denom
            } else {
                0.0
            };
            nodes[leaf.node] = TreeNode {
                feature: 0,
                threshold: 0.0,
                left: 0,
                right: 0,
                value,
                is_leaf: true,
            };
            assignments.push((leaf.start, leaf.end, value));
        }
        (Tree { nodes }, assignments)
    }
}

fn weighted_loss(task: Task, raw: &[f64], y: &[f64], w: &[f64], total: f64) -> f64 {
    raw.iter()
        .zip(y)
        .zip(w)
        .map(|((&r, &t), &wi)| match task {
            Task::Regression => wi * (r - t) * (r - t),
            Task::BinaryClassification => {
                let softplus = if r > 0.0 { r + (-r).exp().ln_1p() } else { r.exp().ln_1p() };
                wi * (softplus - t * r)
            }
        })
        .sum::<f64>()
        / total
}

/// Boosts `max_iterations` trees. The loss trace holds the baseline loss
/// followed by the loss after each iteration (weighted MSE or log loss).
pub(crate) fn fit_hgb(x: &Matrix, y: &[f64], w: &[f64], task: Task, params: &HgbParams) -> (HgbEnsemble, Vec<f64>) {
    let n = x.nrows();
    let total: f64 = w.iter().sum();
    let mean = y.iter().zip(w).map(|(t, wi)| t * wi).sum::<f64>() / total;
    let baseline = match task {
        Task::Regression => mean,
        Task::BinaryClassification => {
            let p = mean.clamp(1e-15, 1.0 - 1e-15);
            (p / (1.0 - p)).ln()
        }
    };
    let mapper = BinMapper::fit(x, params.max_bins);
    let data = mapper.transform(x);
    let (offsets, total_bins) = offsets_for(&mapper);
    let grower = TreeGrower {
        data: &data,
        mapper: &mapper,
        offsets: &offsets,
        total_bins,
        params,
    };
    let mut raw = vec![baseline; n];
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut indices: Vec<u32> = (0..n as u32).collect();
    let mut trees = Vec::with_capacity(params.max_iterations);
    let mut trace = Vec::with_capacity(params.max_iterations + 1);
    trace.push(weighted_loss(task, &raw, y, w, total));
    for _ in 0..params.max_iterations {
        for i in 0..n {
            match task {
                Task::Regression => {
                    grad[i] = w[i] * (raw[i] - y[i]);
                    hess[i] = w[i];
                }
                Task::BinaryClassification => {
                    let p = sigmoid(raw[i]);
                    grad[i] = w[i] * (p - y[i]);
                    hess[i] = w[i] * (p * (1.0 - p)).max(1e-16);
                }
            }
        }
        let (tree, leaves) = grower.grow(&mut indices, &grad, &hess);
        for (start, end, value) in leaves {
            for &r in &indices[start..end] {
                raw[r as usize] += value;
            }
        }
        trees.push(tree);
        trace.push(weighted_loss(task, &raw, y, w, total));
    }
    (HgbEnsemble { baseline, trees }, trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lossless_binning_for_few_values() {
        let x = Matrix::column_vector(&[3.0, 1.0, 2.0, 2.0, 5.0]);
        let m = BinMapper::fit(&x, 256);
        assert_eq!(m.edges[0], vec![1.5, 2.5, 4.0]);
        assert_eq!(m.bin(0, 1.0), 0);
        assert_eq!(m.bin(0, 2.5), 1);
        assert_eq!(m.bin(0, 5.0), 3);
    }

    #[test]
    fn quantile_binning_caps_bins() {
        let vals: Vec<f64> = (0..10_000).map(|i| f64::from(i).sqrt()).collect();
        let m = BinMapper::fit(&Matrix::column_vector(&vals), 256);
        assert!(m.n_bins(0) <= 256 && m.n_bins(0) > 200);
        assert!(m.edges[0].windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn step_function_is_learned() {
        let xs: Vec<f64> = (0..200).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|&v| if v < 100.0 { 1.0 } else { 5.0 }).collect();
        let x = Matrix::column_vector(&xs);
        let w = vec![1.0; 200];
        let (model, trace) = fit_hgb(&x, &ys, &w, Task::Regression, &HgbParams::default());
        assert!(trace.last().unwrap() < &1e-6);
        assert!((model.raw_predict_row(&[10.0]) - 1.0).abs() < 1e-3);
        assert!((model.raw_predict_row(&[150.0]) - 5.0).abs() < 1e-3);
    }

    #[test]
    fn leaf_count_bounded() {
        let xs: Vec<f64> = (0..2000).map(|i| f64::from(i % 97)).collect();
        let ys: Vec<f64> = xs.iter().map(|v| (v * 0.3).sin()).collect();
        let params = HgbParams {
            max_iterations: 3,
            ..HgbParams::default()
        };
        let (model, _) = fit_hgb(&Matrix::column_vector(&xs), &ys, &vec![1.0; 2000], Task::Regression, &params);
        assert!(model.trees.iter().all(|t| t.n_leaves() <= 31 && t.n_leaves() > 1));
    }
}

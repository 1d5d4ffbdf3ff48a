use rayon::prelude::*;

use super::tree::{Node, Tree};
use super::{GbdtError, GbdtModel, Hyperparams, TrainingInstance, FORMAT_VERSION};
use crate::taxonomy::TargetClass;

/// Splits must improve the loss by more than this.
const MIN_GAIN: f64 = 1e-12;
const MAX_HALVINGS: u32 = 30;
const PRIOR_CLAMP: f64 = 1e-6;

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Mean logistic loss of raw scores `f` against 0/1 labels.
pub(crate) fn log_loss(f: &[f64], y: &[f64]) -> f64 {
    f.iter().zip(y).map(|(&f, &y)| softplus(f) - y * f).sum::<f64>() / f.len() as f64
}

/// Each feature's distinct values, and every row's position among them.
struct Binned {
    values: Vec<Vec<u32>>,
    bins: Vec<Vec<u32>>,
}

impl Binned {
    fn new(rows: &[&[u32]], n_features: usize) -> Self {
        let mut values = Vec::with_capacity(n_features);
        let mut bins = Vec::with_capacity(n_features);
        for f in 0..n_features {
            let mut v: Vec<u32> = rows.iter().map(|r| r[f]).collect();
            v.sort_unstable();
            v.dedup();
            let b = rows.iter().map(|r| v.binary_search(&r[f]).unwrap() as u32).collect();
            values.push(v);
            bins.push(b);
        }
        Binned { values, bins }
    }
}

struct Builder<'a> {
    data: &'a Binned,
    g: &'a [f64],
    h: &'a [f64],
    max_depth: usize,
    min_leaf: usize,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn grow(&mut self, rows: &[usize], depth: usize) -> usize {
        let (gs, hs) = rows.iter().fold((0.0, 0.0), |(a, b), &i| (a + self.g[i], b + self.h[i]));
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: -gs / hs });
        if depth >= self.max_depth || rows.len() < 2 * self.min_leaf {
            return id;
        }
        let Some((feature, bin, gain)) = self.best_split(rows, gs, hs) else {
            return id;
        };
        let (left, right): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&i| self.data.bins[feature][i] <= bin);
        let l = self.grow(&left, depth + 1);
        let r = self.grow(&right, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            threshold: self.data.values[feature][bin as usize],
            left: l,
            right: r,
            gain,
        };
        id
    }

    /// Exact search over every distinct value of every feature. Scanning in
    /// feature then threshold order with a strict comparison keeps the lowest
    /// feature index and then the lowest threshold among equal gains.
    fn best_split(&self, rows: &[usize], gs: f64, hs: f64) -> Option<(usize, u32, f64)> {
        let parent = gs * gs / hs;
        let mut best: Option<(usize, u32, f64)> = None;
        let mut best_gain = MIN_GAIN;
        for (f, values) in self.data.values.iter().enumerate() {
            if values.len() < 2 {
                continue;
            }
            let mut hist = vec![(0.0f64, 0.0f64, 0usize); values.len()];
            let bins = &self.data.bins[f];
            for &i in rows {
                let e = &mut hist[bins[i] as usize];
                e.0 += self.g[i];
                e.1 += self.h[i];
                e.2 += 1;
            }
            let (mut gl, mut hl, mut nl) = (0.0, 0.0, 0usize);
            for (b, &(g, h, n)) in hist[..hist.len() - 1].iter().enumerate() {
                gl += g;
                hl += h;
                nl += n;
                if n == 0 || nl < self.min_leaf {
                    continue;
                }
                let nr = rows.len() - nl;
                if nr < self.min_leaf {
                    break;
                }
                let (gr, hr) = (gs - gl, hs - hl);
                if hl <= 0.0 || hr <= 0.0 {
                    continue;
                }
                let gain = 0.5 * (gl * gl / hl + gr * gr / hr - parent);
                if gain > best_gain {
                    best_gain = gain;
                    best = Some((f, b as u32, gain));
                }
            }
        }
        best
    }
}

fn fit_class(
    data: &Binned,
    features: &[&[u32]],
    y: &[f64],
    hp: &Hyperparams,
) -> (f64, Vec<Tree>, Vec<f64>) {
    let n = y.len();
    let prior = (y.iter().sum::<f64>() / n as f64).clamp(PRIOR_CLAMP, 1.0 - PRIOR_CLAMP);
    let base = (prior / (1.0 - prior)).ln();
    let mut f = vec![base; n];
    let mut loss = log_loss(&f, y);
    let mut losses = vec![loss];
    let mut trees = Vec::with_capacity(hp.n_trees);
    let rows: Vec<usize> = (0..n).collect();
    let mut g = vec![0.0; n];
    let mut h = vec![0.0; n];

    for _ in 0..hp.n_trees {
        for i in 0..n {
            let p = sigmoid(f[i]);
            g[i] = p - y[i];
            h[i] = (p * (1.0 - p)).max(1e-16);
        }
        let mut b = Builder { data, g: &g, h: &h, max_depth: hp.max_depth, min_leaf: hp.min_leaf, nodes: Vec::new() };
        b.grow(&rows, 0);
        let mut tree = Tree { nodes: b.nodes };
        tree.scale_leaves(hp.learning_rate);
        let step: Vec<f64> = features.iter().map(|x| tree.predict(x)).collect();

        // Halve the step until the training loss does not go up.
        let mut factor = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let cand: Vec<f64> = f.iter().zip(&step).map(|(a, s)| a + factor * s).collect();
            let l = log_loss(&cand, y);
            if l <= loss {
                accepted = Some((cand, l));
                break;
            }
            factor *= 0.5;
        }
        match accepted {
            Some((cand, l)) => {
                if factor != 1.0 {
                    tree.scale_leaves(factor);
                }
                f = cand;
                loss = l;
            }
            None => tree = Tree::leaf(0.0),
        }
        losses.push(loss);
        trees.push(tree);
    }
    (base, trees, losses)
}

/// Fits one boosted ensemble per target class (one-vs-rest logistic loss,
/// Newton leaf values, exact greedy splits on integer thresholds).
/// Training is deterministic: classes are fitted in parallel but assembled
/// in class order, and no step draws random numbers.
pub fn train(
    instances: &[TrainingInstance],
    hp: &Hyperparams,
    feature_names: &[String],
    seed: u64,
) -> Result<GbdtModel, GbdtError> {
    hp.validate()?;
    if instances.is_empty() {
        return Err(GbdtError::EmptyTrainSet);
    }
    let n_features = feature_names.len();
    for inst in instances {
        if inst.features.len() != n_features {
            return Err(GbdtError::FeatureMismatch { expected: n_features, got: inst.features.len() });
        }
    }
    let first = instances[0].target;
    if instances.iter().all(|i| i.target == first) {
        return Err(GbdtError::DegenerateTargets(first));
    }

    let features: Vec<&[u32]> = instances.iter().map(|i| i.features.as_slice()).collect();
    let data = Binned::new(&features, n_features);
    let fitted: Vec<(f64, Vec<Tree>, Vec<f64>)> = TargetClass::ALL
        .par_iter()
        .map(|&k| {
            let y: Vec<f64> = instances.iter().map(|i| if i.target == k { 1.0 } else { 0.0 }).collect();
            fit_class(&data, &features, &y, hp)
        })
        .collect();

    let mut base_scores = Vec::new();
    let mut ensembles = Vec::new();
    let mut train_loss = Vec::new();
    for (b, t, l) in fitted {
        base_scores.push(b);
        ensembles.push(t);
        train_loss.push(l);
    }
    Ok(GbdtModel {
        format_version: FORMAT_VERSION,
        feature_names: feature_names.to_vec(),
        classes: TargetClass::ALL.to_vec(),
        hyperparams: *hp,
        seed,
        base_scores,
        ensembles,
        train_loss,
    })
}

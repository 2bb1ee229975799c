//! CART classification trees with Gini impurity.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Features;

const EPS: f64 = 1e-12;

/// Node of a flattened tree. Rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        label: u8,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, row: &[u16]) -> u8 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { label } => return *label,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if f64::from(row[*feature]) <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }
}

struct Best {
    score: f64,
    feature: usize,
    threshold: f64,
}

impl Best {
    /// Higher score wins; equal scores go to the lower feature, then the
    /// lower threshold.
    fn beats(&self, other: &Option<Best>) -> bool {
        match other {
            None => true,
            Some(o) => {
                if self.score > o.score + EPS {
                    true
                } else if self.score < o.score - EPS {
                    false
                } else {
                    (self.feature, self.threshold) < (o.feature, o.threshold)
                }
            }
        }
    }
}

/// Children score `sum_c l_c^2 / n_l + sum_c r_c^2 / n_r`. Maximizing it
/// minimizes the weighted Gini impurity of the children.
fn score(l: [usize; 2], r: [usize; 2]) -> f64 {
    let part = |c: [usize; 2]| {
        let n = (c[0] + c[1]) as f64;
        ((c[0] * c[0] + c[1] * c[1]) as f64) / n
    };
    part(l) + part(r)
}

/// Best threshold on one feature, or `None` if the feature is constant
/// on the node. The flag reports whether the feature was constant.
fn best_on_feature(col: &[u16], y: &[u8], idx: &[usize], min_leaf: usize, feature: usize) -> (bool, Option<Best>) {
    let max = idx.iter().map(|&i| col[i]).max().unwrap_or(0) as usize;
    let min = idx.iter().map(|&i| col[i]).min().unwrap_or(0) as usize;
    if min == max {
        return (true, None);
    }
    let mut hist = vec![[0usize; 2]; max - min + 1];
    for &i in idx {
        hist[col[i] as usize - min][y[i] as usize] += 1;
    }
    let total = hist.iter().fold([0, 0], |a, h| [a[0] + h[0], a[1] + h[1]]);
    let n = idx.len();
    let mut left = [0usize; 2];
    let mut best: Option<Best> = None;
    let mut prev: Option<usize> = None;
    for (v, h) in hist.iter().enumerate() {
        if h[0] + h[1] == 0 {
            continue;
        }
        if let Some(p) = prev {
            let nl = left[0] + left[1];
            if nl >= min_leaf && n - nl >= min_leaf {
                let right = [total[0] - left[0], total[1] - left[1]];
                let cand = Best {
                    score: score(left, right),
                    feature,
                    threshold: (p + v) as f64 / 2.0 + min as f64,
                };
                if cand.beats(&best) {
                    best = Some(cand);
                }
            }
        }
        left[0] += h[0];
        left[1] += h[1];
        prev = Some(v);
    }
    (false, best)
}

fn leaf(counts: [usize; 2]) -> Node {
    Node::Leaf {
        label: u8::from(counts[1] > counts[0]),
    }
}

/// Grows a tree on the (possibly repeated) row indices `sample`. At each
/// node features are visited in random order until `mtry` non-constant
/// ones have been evaluated.
pub(super) fn grow(
    x: &Features,
    y: &[u8],
    sample: Vec<usize>,
    mtry: usize,
    max_depth: Option<usize>,
    min_leaf: usize,
    rng: &mut ChaCha8Rng,
) -> Tree {
    let mut nodes = vec![Node::Leaf { label: 0 }];
    let mut order: Vec<usize> = (0..x.cols()).collect();
    // (node slot, rows, depth)
    let mut stack = vec![(0usize, sample, 0usize)];
    while let Some((slot, idx, depth)) = stack.pop() {
        let mut counts = [0usize; 2];
        for &i in &idx {
            counts[y[i] as usize] += 1;
        }
        let pure = counts[0] == 0 || counts[1] == 0;
        let capped = max_depth.is_some_and(|d| depth >= d);
        if pure || capped || idx.len() < 2 * min_leaf {
            nodes[slot] = leaf(counts);
            continue;
        }
        order.shuffle(rng);
        let mut best: Option<Best> = None;
        let mut evaluated = 0;
        for &f in &order {
            if evaluated >= mtry {
                break;
            }
            let (constant, cand) = best_on_feature(x.column(f), y, &idx, min_leaf, f);
            if constant {
                continue;
            }
            evaluated += 1;
            if let Some(c) = cand {
                if c.beats(&best) {
                    best = Some(c);
                }
            }
        }
        let Some(b) = best else {
            nodes[slot] = leaf(counts);
            continue;
        };
        let col = x.column(b.feature);
        let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| f64::from(col[i]) <= b.threshold);
        let (li, ri) = (nodes.len(), nodes.len() + 1);
        nodes.push(Node::Leaf { label: 0 });
        nodes.push(Node::Leaf { label: 0 });
        nodes[slot] = Node::Split {
            feature: b.feature,
            threshold: b.threshold,
            left: li,
            right: ri,
        };
        stack.push((ri, r, depth + 1));
        stack.push((li, l, depth + 1));
    }
    Tree { nodes }
}

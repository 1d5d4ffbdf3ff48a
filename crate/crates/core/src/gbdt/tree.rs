use serde::{Deserialize, Serialize};

/// Binary regression tree stored as a flat node list; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: u32, left: usize, right: usize, gain: f64 },
    Leaf { value: f64 },
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Tree { nodes: vec![Node::Leaf { value }] }
    }

    pub fn predict(&self, x: &[u32]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right, .. } => {
                    i = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }

    pub fn splits(&self) -> impl Iterator<Item = (usize, u32, f64)> + '_ {
        self.nodes.iter().filter_map(|n| match *n {
            Node::Split { feature, threshold, gain, .. } => Some((feature, threshold, gain)),
            Node::Leaf { .. } => None,
        })
    }

    pub(crate) fn scale_leaves(&mut self, factor: f64) {
        for n in &mut self.nodes {
            if let Node::Leaf { value } = n {
                *value *= factor;
            }
        }
    }
}

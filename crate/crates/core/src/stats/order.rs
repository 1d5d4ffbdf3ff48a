use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{welch_t, Alternative, StatsError};
use crate::taxonomy::AggregatedClass;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strength {
    Strong,
    Weak,
}

impl Strength {
    pub fn as_str(self) -> &'static str {
        match self {
            Strength::Strong => "strong",
            Strength::Weak => "weak",
        }
    }
}

/// `greater` has a significantly larger mean than `lesser`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderEdge {
    pub greater: AggregatedClass,
    pub lesser: AggregatedClass,
    pub p_value: f64,
    pub strength: Strength,
}

/// One-sided Welch result for an ordered pair, kept whether or not it made an edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairComparison {
    pub greater: AggregatedClass,
    pub lesser: AggregatedClass,
    pub statistic: f64,
    pub df: Option<f64>,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialOrder {
    pub nodes: Vec<AggregatedClass>,
    pub edges: Vec<OrderEdge>,
    pub comparisons: Vec<PairComparison>,
}

impl PartialOrder {
    pub fn edge(&self, greater: AggregatedClass, lesser: AggregatedClass) -> Option<&OrderEdge> {
        self.edges.iter().find(|e| e.greater == greater && e.lesser == lesser)
    }

    /// True when an edge exists in either direction.
    pub fn related(&self, a: AggregatedClass, b: AggregatedClass) -> bool {
        self.edge(a, b).is_some() || self.edge(b, a).is_some()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph partial_order {\n  rankdir=TB;\n");
        for n in &self.nodes {
            let _ = writeln!(out, "  \"{n}\";");
        }
        for e in &self.edges {
            let style = match e.strength {
                Strength::Strong => "color=black",
                Strength::Weak => "color=grey",
            };
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [label=\"p={:.3e}\", {style}];",
                e.greater, e.lesser, e.p_value
            );
        }
        out.push_str("}\n");
        out
    }

    /// CSV with header `greater,lesser,p_value,strength`.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["greater", "lesser", "p_value", "strength"])?;
        for e in &self.edges {
            wtr.write_record([
                e.greater.as_str(),
                e.lesser.as_str(),
                &format!("{:e}", e.p_value),
                e.strength.as_str(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Orders classes by mean report volume. Every ordered pair gets a one-sided
/// Welch test (first greater); `p <= alpha_strong` gives a strong edge and
/// `p <= alpha_weak` a weak one. Implied edges are kept, not reduced away.
pub fn derive_partial_order(
    samples: &BTreeMap<AggregatedClass, Vec<f64>>,
    alpha_strong: f64,
    alpha_weak: f64,
) -> Result<PartialOrder, StatsError> {
    if !(alpha_strong > 0.0 && alpha_strong <= alpha_weak && alpha_weak < 1.0) {
        return Err(StatsError::InvalidAlpha { strong: alpha_strong, weak: alpha_weak });
    }
    for v in samples.values() {
        if v.len() < 2 {
            return Err(StatsError::InsufficientSample { needed: 2, got: v.len() });
        }
    }
    let nodes: Vec<AggregatedClass> = samples.keys().copied().collect();
    let pairs: Vec<(AggregatedClass, AggregatedClass)> = nodes
        .iter()
        .flat_map(|&x| nodes.iter().filter(move |&&y| y != x).map(move |&y| (x, y)))
        .collect();

    let comparisons = pairs
        .par_iter()
        .map(|&(x, y)| match welch_t(&samples[&x], &samples[&y], Alternative::Greater) {
            Ok(r) => Ok(PairComparison {
                greater: x,
                lesser: y,
                statistic: r.statistic,
                df: r.df,
                p_value: r.p_value,
            }),
            // Two constant samples with the same value carry no ordering evidence.
            Err(StatsError::DegenerateVariance) => Ok(PairComparison {
                greater: x,
                lesser: y,
                statistic: 0.0,
                df: None,
                p_value: 1.0,
            }),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>, _>>()?;

    let edges: Vec<OrderEdge> = comparisons
        .iter()
        .filter_map(|c| {
            let strength = if c.p_value <= alpha_strong {
                Strength::Strong
            } else if c.p_value <= alpha_weak {
                Strength::Weak
            } else {
                return None;
            };
            Some(OrderEdge { greater: c.greater, lesser: c.lesser, p_value: c.p_value, strength })
        })
        .collect();

    if let Some(cycle) = find_cycle(&nodes, &edges) {
        let p_values = cycle
            .iter()
            .zip(cycle.iter().cycle().skip(1))
            .filter_map(|(&a, &b)| edges.iter().find(|e| e.greater == a && e.lesser == b))
            .map(|e| e.p_value)
            .collect();
        return Err(StatsError::CyclicOrder { cycle, p_values });
    }
    Ok(PartialOrder { nodes, edges, comparisons })
}

fn find_cycle(nodes: &[AggregatedClass], edges: &[OrderEdge]) -> Option<Vec<AggregatedClass>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    fn visit(
        n: AggregatedClass,
        edges: &[OrderEdge],
        marks: &mut BTreeMap<AggregatedClass, Mark>,
        stack: &mut Vec<AggregatedClass>,
    ) -> Option<Vec<AggregatedClass>> {
        marks.insert(n, Mark::Active);
        stack.push(n);
        for e in edges.iter().filter(|e| e.greater == n) {
            match marks[&e.lesser] {
                Mark::Active => {
                    let start = stack.iter().position(|&s| s == e.lesser).unwrap();
                    return Some(stack[start..].to_vec());
                }
                Mark::New => {
                    if let Some(c) = visit(e.lesser, edges, marks, stack) {
                        return Some(c);
                    }
                }
                Mark::Done => {}
            }
        }
        stack.pop();
        marks.insert(n, Mark::Done);
        None
    }

    let mut marks: BTreeMap<AggregatedClass, Mark> = nodes.iter().map(|&n| (n, Mark::New)).collect();
    for &n in nodes {
        if marks[&n] == Mark::New {
            if let Some(c) = visit(n, edges, &mut marks, &mut Vec::new()) {
                return Some(c);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use AggregatedClass as A;

    fn jitter(base: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| base + ((i * 7919) % 13) as f64 * 0.01).collect()
    }

    #[test]
    fn separated_means_give_strong_edge() {
        let samples = BTreeMap::from([(A::C, jitter(100.0, 30)), (A::I, jitter(1.0, 30))]);
        let po = derive_partial_order(&samples, 0.05, 0.10).unwrap();
        assert_eq!(po.edges.len(), 1);
        let e = po.edge(A::C, A::I).unwrap();
        assert_eq!(e.strength, Strength::Strong);
        assert_eq!(po.comparisons.len(), 2);
    }

    #[test]
    fn identical_samples_give_no_edge() {
        let s = jitter(5.0, 40);
        let samples = BTreeMap::from([(A::M, s.clone()), (A::I, s)]);
        let po = derive_partial_order(&samples, 0.05, 0.10).unwrap();
        assert!(po.edges.is_empty());
        assert!(!po.related(A::M, A::I));
    }

    #[test]
    fn implied_edges_are_kept() {
        let samples = BTreeMap::from([
            (A::C, jitter(300.0, 25)),
            (A::M, jitter(200.0, 25)),
            (A::I, jitter(100.0, 25)),
        ]);
        let po = derive_partial_order(&samples, 0.05, 0.10).unwrap();
        assert!(po.edge(A::C, A::M).is_some());
        assert!(po.edge(A::M, A::I).is_some());
        assert!(po.edge(A::C, A::I).is_some());
        assert_eq!(po.edges.len(), 3);
    }

    #[test]
    fn weak_band() {
        // Means differ by a margin that lands between the two thresholds.
        let a: Vec<f64> = (0..20).map(|i| (i % 10) as f64 + 0.9).collect();
        let b: Vec<f64> = (0..20).map(|i| (i % 10) as f64).collect();
        let p = welch_t(&a, &b, Alternative::Greater).unwrap().p_value;
        let samples = BTreeMap::from([(A::C, a), (A::M, b)]);
        let po = derive_partial_order(&samples, p / 2.0, p * 1.5).unwrap();
        assert_eq!(po.edge(A::C, A::M).unwrap().strength, Strength::Weak);
        let po = derive_partial_order(&samples, p / 3.0, p / 2.0).unwrap();
        assert!(po.edges.is_empty());
    }

    #[test]
    fn cycle_detection() {
        let mk = |g, l| OrderEdge { greater: g, lesser: l, p_value: 0.01, strength: Strength::Strong };
        let edges = [mk(A::C, A::M), mk(A::M, A::I), mk(A::I, A::C)];
        let cycle = find_cycle(&[A::C, A::M, A::I], &edges).unwrap();
        assert_eq!(cycle, vec![A::C, A::M, A::I]);
        assert!(find_cycle(&[A::C, A::M, A::I], &edges[..2]).is_none());
    }

    #[test]
    fn bad_inputs() {
        let samples = BTreeMap::from([(A::C, vec![1.0]), (A::I, vec![1.0, 2.0])]);
        assert!(matches!(
            derive_partial_order(&samples, 0.05, 0.1),
            Err(StatsError::InsufficientSample { .. })
        ));
        let samples = BTreeMap::from([(A::C, vec![1.0, 3.0])]);
        assert!(matches!(derive_partial_order(&samples, 0.2, 0.1), Err(StatsError::InvalidAlpha { .. })));
    }

    #[test]
    fn dot_and_csv() {
        let samples = BTreeMap::from([(A::C, jitter(100.0, 30)), (A::I, jitter(1.0, 30))]);
        let po = derive_partial_order(&samples, 0.05, 0.10).unwrap();
        let dot = po.to_dot();
        assert!(dot.starts_with("digraph"));
        assert!(dot.contains("\"C\" -> \"I\""));
        let mut buf = Vec::new();
        po.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("greater,lesser,p_value,strength"));
        assert!(lines.next().unwrap().starts_with("C,I,"));
    }
}

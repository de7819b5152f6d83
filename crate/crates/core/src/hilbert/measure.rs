use serde::{Deserialize, Serialize};

use crate::error::{invalid, FrameError, Result};

/// A finite measure space: nodes carrying strictly positive masses.
///
/// Integrals over the space are weighted sums over nodes, and node subsets
/// play the role of measurable sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizedMeasureSpace {
    weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl DiscretizedMeasureSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid("measure space needs at least one node"));
        }
        if let Some((j, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(invalid(format!(
                "node {j} has mass {w}; every mass must be finite and > 0"
            )));
        }
        Ok(Self {
            weights,
            labels: None,
        })
    }

    /// Counting measure on `n` nodes.
    pub fn counting(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.weights.len() {
            return Err(FrameError::LengthMismatch {
                expected: self.weights.len(),
                actual: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, node: usize) -> f64 {
        self.weights[node]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Quadrature of a per-node integrand: `Σ_j w_j · values_j`.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.weights.len() {
            return Err(FrameError::LengthMismatch {
                expected: self.weights.len(),
                actual: values.len(),
            });
        }
        Ok(self.weights.iter().zip(values).map(|(w, v)| w * v).sum())
    }

    /// The subspace carried by the listed nodes, in the order given.
    pub fn restrict(&self, nodes: &[usize]) -> Result<Self> {
        let n = self.node_count();
        check_node_subset(nodes, n)?;
        let weights = nodes.iter().map(|&j| self.weights[j]).collect();
        let mut out = Self::new(weights)?;
        if let Some(labels) = &self.labels {
            out.labels = Some(nodes.iter().map(|&j| labels[j].clone()).collect());
        }
        Ok(out)
    }

    /// Product measure `self × other`, with node `(x, y)` at index `x · |other| + y`.
    pub fn product(&self, other: &Self) -> Self {
        let weights = self
            .weights
            .iter()
            .flat_map(|wx| other.weights.iter().map(move |wy| wx * wy))
            .collect();
        Self {
            weights,
            labels: None,
        }
    }
}

/// Validates a node subset: non-empty, in range, no repeats.
pub(crate) fn check_node_subset(nodes: &[usize], node_count: usize) -> Result<()> {
    if nodes.is_empty() {
        return Err(invalid("node subset must be non-empty"));
    }
    let mut seen = vec![false; node_count];
    for &j in nodes {
        if j >= node_count {
            return Err(FrameError::IndexOutOfRange {
                index: j,
                len: node_count,
            });
        }
        if std::mem::replace(&mut seen[j], true) {
            return Err(invalid(format!("node {j} listed twice")));
        }
    }
    Ok(())
}

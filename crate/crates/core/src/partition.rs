use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::error::{Error, Result};

/// Assignment of `n` items to `q` clusters. Labels are 0-based in memory and
/// 1-based whenever they leave the process (JSON, CLI output).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    labels: Vec<usize>,
    q: usize,
}

impl Partition {
    pub fn new(labels: Vec<usize>, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidPartition("cluster count must be positive".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= q) {
            return Err(Error::InvalidPartition(format!("label {bad} outside 0..{q}")));
        }
        Ok(Self { labels, q })
    }

    pub fn from_one_based(labels: &[usize], q: usize) -> Result<Self> {
        if labels.contains(&0) {
            return Err(Error::InvalidPartition("1-based label 0".into()));
        }
        Self::new(labels.iter().map(|l| l - 1).collect(), q)
    }

    /// Everything in cluster 0.
    pub fn trivial(n: usize, q: usize) -> Result<Self> {
        Self::new(vec![0; n], q)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l + 1).collect()
    }

    pub fn cluster_count(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, item: usize) -> usize {
        self.labels[item]
    }

    /// Members of every cluster, indexed by label. Empty clusters are kept.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.q];
        for (item, &label) in self.labels.iter().enumerate() {
            out[label].push(item);
        }
        out
    }

    /// Non-empty clusters as sorted member lists, ordered by smallest member.
    /// Two partitions that differ only by label names give the same blocks.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks: Vec<Vec<usize>> =
            self.clusters().into_iter().filter(|c| !c.is_empty()).collect();
        blocks.sort();
        blocks
    }

    /// Row-major `n × q` one-hot matrix.
    pub fn one_hot(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.labels.len() * self.q];
        for (i, &label) in self.labels.iter().enumerate() {
            v[i * self.q + label] = 1.0;
        }
        v
    }

    /// Applies `perm[old_label] = new_label`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.q {
            return Err(Error::InvalidPartition("permutation length differs from q".into()));
        }
        Self::new(self.labels.iter().map(|&l| perm[l]).collect(), self.q)
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.labels.len()))?;
        for label in &self.labels {
            seq.serialize_element(&(label + 1))?;
        }
        seq.end()
    }
}

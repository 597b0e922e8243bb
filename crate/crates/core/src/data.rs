//! Labeled samples and split-tagged datasets.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One row: input `x`, optional feature block `z`, target `y`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Sample {
    pub x: Vec<f64>,
    pub z: Option<Vec<f64>>,
    pub y: Vec<f64>,
}

impl Sample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        Sample { x, z: None, y }
    }

    pub fn with_features(x: Vec<f64>, z: Vec<f64>, y: Vec<f64>) -> Self {
        Sample { x, z: Some(z), y }
    }

    /// Class index used for class-conditional statistics: `y₀ ≥ 0.5` for a
    /// single target, otherwise the first argmax.
    pub fn class(&self) -> usize {
        match self.y.len() {
            0 => 0,
            1 => usize::from(self.y[0] >= 0.5),
            _ => {
                let mut best = 0;
                for (i, &v) in self.y.iter().enumerate() {
                    if v > self.y[best] {
                        best = i;
                    }
                }
                best
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Split {
    Train,
    Val,
    /// Part of the full domain only.
    Domain,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Domain => "domain",
        }
    }
}

/// Samples tagged with splits.
///
/// When at least one row is tagged [`Split::Domain`], the full domain `X` is
/// taken to be every row (train, val and domain-only alike), which keeps it a
/// superset of both other splits.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    rows: Vec<(Split, Sample)>,
}

impl Dataset {
    pub fn new() -> Self {
        Dataset::default()
    }

    pub fn from_rows(rows: Vec<(Split, Sample)>) -> Result<Self> {
        let mut d = Dataset::new();
        for (split, sample) in rows {
            d.push(split, sample)?;
        }
        Ok(d)
    }

    /// Appends a row, checking its dimensions against the first row.
    pub fn push(&mut self, split: Split, sample: Sample) -> Result<()> {
        if let Some((_, first)) = self.rows.first() {
            if first.x.len() != sample.x.len() {
                return Err(Error::dims("dataset x", first.x.len(), sample.x.len()));
            }
            if first.y.len() != sample.y.len() {
                return Err(Error::dims("dataset y", first.y.len(), sample.y.len()));
            }
            let zl = |s: &Sample| s.z.as_ref().map(Vec::len);
            if zl(first) != zl(&sample) {
                return Err(Error::param("dataset z", "feature blocks must be present on all rows with one length"));
            }
        }
        self.rows.push((split, sample));
        Ok(())
    }

    pub fn rows(&self) -> &[(Split, Sample)] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn split(&self, split: Split) -> Vec<&Sample> {
        self.rows
            .iter()
            .filter(|(s, _)| *s == split)
            .map(|(_, x)| x)
            .collect()
    }

    pub fn train(&self) -> Vec<&Sample> {
        self.split(Split::Train)
    }

    pub fn val(&self) -> Vec<&Sample> {
        self.split(Split::Val)
    }

    pub fn has_domain(&self) -> bool {
        self.rows.iter().any(|(s, _)| *s == Split::Domain)
    }

    /// Every row, if the dataset declares a full domain.
    pub fn full_domain(&self) -> Option<Vec<&Sample>> {
        self.has_domain()
            .then(|| self.rows.iter().map(|(_, x)| x).collect())
    }

    pub fn x_dim(&self) -> Option<usize> {
        self.rows.first().map(|(_, s)| s.x.len())
    }

    pub fn y_dim(&self) -> Option<usize> {
        self.rows.first().map(|(_, s)| s.y.len())
    }

    pub fn z_dim(&self) -> Option<usize> {
        self.rows.first().and_then(|(_, s)| s.z.as_ref().map(Vec::len))
    }
}

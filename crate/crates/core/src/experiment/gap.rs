use alloc::vec::Vec;
use core::borrow::Borrow;

use crate::data::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::net::{Loss, Network};

/// Anything that maps an input to a prediction.
pub trait Predictor {
    fn predict(&self, x: &[f64]) -> Result<Vec<f64>>;
}

impl Predictor for Network {
    fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        Network::predict(self, x)
    }
}

/// Lookup model: returns the stored target for an input seen in training and
/// `fallback` for anything else. Zero training loss by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Memorizer {
    table: Vec<(Vec<f64>, Vec<f64>)>,
    fallback: Vec<f64>,
}

impl Memorizer {
    pub fn fit<S: Borrow<Sample>>(train: &[S], fallback: Vec<f64>) -> Self {
        Memorizer {
            table: train
                .iter()
                .map(|s| (s.borrow().x.clone(), s.borrow().y.clone()))
                .collect(),
            fallback,
        }
    }
}

impl Predictor for Memorizer {
    fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self
            .table
            .iter()
            .find(|(k, _)| k.as_slice() == x)
            .map_or_else(|| self.fallback.clone(), |(_, y)| y.clone()))
    }
}

/// Mean per-sample loss.
pub fn mean_loss<P: Predictor + ?Sized, S: Borrow<Sample>>(
    model: &P,
    samples: &[S],
    loss: Loss,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("sample set"));
    }
    let mut total = 0.0;
    for s in samples {
        let s = s.borrow();
        total += loss.value(&model.predict(&s.x)?, &s.y)?;
    }
    Ok(total / samples.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum GapEstimator {
    /// Evaluated on the full enumerable domain.
    Exact,
    /// Evaluated on a validation split.
    Validation,
}

/// Train loss, evaluation loss, and `gap = eval_loss - train_loss`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct GapReport {
    pub train_loss: f64,
    pub eval_loss: f64,
    pub gap: f64,
    pub estimator: GapEstimator,
}

impl GapReport {
    fn new(train_loss: f64, eval_loss: f64, estimator: GapEstimator) -> Self {
        GapReport {
            train_loss,
            eval_loss,
            gap: eval_loss - train_loss,
            estimator,
        }
    }
}

/// `L(θ, X) - L(θ, X_train)` on explicit sample sets.
pub fn gap_exact_from<P: Predictor + ?Sized, S: Borrow<Sample>, T: Borrow<Sample>>(
    model: &P,
    train: &[S],
    domain: &[T],
    loss: Loss,
) -> Result<GapReport> {
    if train.is_empty() {
        return Err(Error::MissingSplit("train"));
    }
    if domain.is_empty() {
        return Err(Error::MissingSplit("domain"));
    }
    Ok(GapReport::new(
        mean_loss(model, train, loss)?,
        mean_loss(model, domain, loss)?,
        GapEstimator::Exact,
    ))
}

/// Exact gap over the dataset's full domain.
pub fn gap_exact<P: Predictor + ?Sized>(model: &P, data: &Dataset, loss: Loss) -> Result<GapReport> {
    let domain = data.full_domain().ok_or(Error::MissingSplit("domain"))?;
    gap_exact_from(model, &data.train(), &domain, loss)
}

/// `L(θ, X_val) - L(θ, X_train)` on explicit sample sets.
pub fn gap_estimate_from<P: Predictor + ?Sized, S: Borrow<Sample>, T: Borrow<Sample>>(
    model: &P,
    train: &[S],
    val: &[T],
    loss: Loss,
) -> Result<GapReport> {
    if train.is_empty() {
        return Err(Error::MissingSplit("train"));
    }
    if val.is_empty() {
        return Err(Error::MissingSplit("val"));
    }
    Ok(GapReport::new(
        mean_loss(model, train, loss)?,
        mean_loss(model, val, loss)?,
        GapEstimator::Validation,
    ))
}

/// Validation-set estimate of the gap.
pub fn gap_estimate<P: Predictor + ?Sized>(model: &P, data: &Dataset, loss: Loss) -> Result<GapReport> {
    gap_estimate_from(model, &data.train(), &data.val(), loss)
}

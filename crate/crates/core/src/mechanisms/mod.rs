//! Differentially private primitives and the [`Mechanism`] seam that every
//! estimator draws its noise through.
//!
//! Estimators never touch a random generator directly. They ask a
//! `Mechanism` for Laplace noise at a given sensitivity and budget, or for a
//! private quantile. [`RandomSource`] is the live implementation;
//! [`BudgetLedger`] wraps any mechanism and records each charge, and
//! [`Noiseless`] / [`Scripted`] make estimator arithmetic checkable by hand.

mod expq;
mod laplace;

use std::collections::VecDeque;

pub use expq::{
    bin_utility, build_bins, expq, expq_bin_probabilities, expq_exact_density, expq_expected_value,
    expq_sorted, BinLayout, QuantileRank, SortedValues,
};
pub use laplace::{laplace_cdf, laplace_draw, laplace_from_uniform};

use crate::data::DataBounds;
use crate::error::{Error, Result};
use crate::rng::RandomSource;

pub trait Mechanism {
    /// Laplace noise with scale `sensitivity / epsilon`.
    fn laplace(&mut self, sensitivity: f64, epsilon: f64) -> Result<f64>;

    /// Private estimate of the rank-`rank` order statistic.
    fn quantile(
        &mut self,
        sorted: &SortedValues,
        rank: QuantileRank,
        epsilon: f64,
        bounds: DataBounds,
    ) -> Result<f64>;
}

fn laplace_scale(sensitivity: f64, epsilon: f64) -> Result<f64> {
    if !(sensitivity.is_finite() && sensitivity >= 0.0) {
        return Err(Error::param("sensitivity", format!("must be finite and >= 0, got {sensitivity}")));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::param("epsilon", format!("must be finite and > 0, got {epsilon}")));
    }
    Ok(sensitivity / epsilon)
}

impl Mechanism for RandomSource {
    fn laplace(&mut self, sensitivity: f64, epsilon: f64) -> Result<f64> {
        laplace_draw(laplace_scale(sensitivity, epsilon)?, self)
    }

    fn quantile(
        &mut self,
        sorted: &SortedValues,
        rank: QuantileRank,
        epsilon: f64,
        bounds: DataBounds,
    ) -> Result<f64> {
        expq_sorted(sorted, rank, epsilon, bounds, self)
    }
}

impl<M: Mechanism + ?Sized> Mechanism for &mut M {
    fn laplace(&mut self, sensitivity: f64, epsilon: f64) -> Result<f64> {
        (**self).laplace(sensitivity, epsilon)
    }

    fn quantile(
        &mut self,
        sorted: &SortedValues,
        rank: QuantileRank,
        epsilon: f64,
        bounds: DataBounds,
    ) -> Result<f64> {
        (**self).quantile(sorted, rank, epsilon, bounds)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChargeKind {
    Laplace,
    Quantile,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Charge {
    pub kind: ChargeKind,
    pub epsilon: f64,
    pub sensitivity: f64,
}

/// Records every query passed to the wrapped mechanism.
#[derive(Debug, Clone)]
pub struct BudgetLedger<M> {
    inner: M,
    charges: Vec<Charge>,
}

impl<M: Mechanism> BudgetLedger<M> {
    pub fn new(inner: M) -> Self {
        BudgetLedger { inner, charges: Vec::new() }
    }

    pub fn charges(&self) -> &[Charge] {
        &self.charges
    }

    pub fn total_epsilon(&self) -> f64 {
        self.charges.iter().map(|c| c.epsilon).sum()
    }

    pub fn into_inner(self) -> M {
        self.inner
    }
}

impl<M: Mechanism> Mechanism for BudgetLedger<M> {
    fn laplace(&mut self, sensitivity: f64, epsilon: f64) -> Result<f64> {
        self.charges.push(Charge { kind: ChargeKind::Laplace, epsilon, sensitivity });
        self.inner.laplace(sensitivity, epsilon)
    }

    fn quantile(
        &mut self,
        sorted: &SortedValues,
        rank: QuantileRank,
        epsilon: f64,
        bounds: DataBounds,
    ) -> Result<f64> {
        // Utility sensitivity is 1.
        self.charges.push(Charge { kind: ChargeKind::Quantile, epsilon, sensitivity: 1.0 });
        self.inner.quantile(sorted, rank, epsilon, bounds)
    }
}

/// Zero Laplace noise and exact order statistics. Not private; for checking
/// estimator arithmetic.
#[derive(Debug, Clone, Copy, Default)]
pub struct Noiseless;

impl Mechanism for Noiseless {
    fn laplace(&mut self, sensitivity: f64, epsilon: f64) -> Result<f64> {
        laplace_scale(sensitivity, epsilon).map(|_| 0.0)
    }

    fn quantile(
        &mut self,
        sorted: &SortedValues,
        rank: QuantileRank,
        _epsilon: f64,
        _bounds: DataBounds,
    ) -> Result<f64> {
        let m = QuantileRank::new(rank.get(), sorted.len())?;
        Ok(sorted.as_slice()[m.get() - 1])
    }
}

/// Replays queued outputs, falling back to [`Noiseless`] once a queue runs dry.
#[derive(Debug, Clone, Default)]
pub struct Scripted {
    laplace: VecDeque<f64>,
    quantiles: VecDeque<f64>,
}

impl Scripted {
    pub fn new(laplace: impl IntoIterator<Item = f64>, quantiles: impl IntoIterator<Item = f64>) -> Self {
        Scripted { laplace: laplace.into_iter().collect(), quantiles: quantiles.into_iter().collect() }
    }
}

impl Mechanism for Scripted {
    fn laplace(&mut self, sensitivity: f64, epsilon: f64) -> Result<f64> {
        match self.laplace.pop_front() {
            Some(v) => laplace_scale(sensitivity, epsilon).map(|_| v),
            None => Noiseless.laplace(sensitivity, epsilon),
        }
    }

    fn quantile(
        &mut self,
        sorted: &SortedValues,
        rank: QuantileRank,
        epsilon: f64,
        bounds: DataBounds,
    ) -> Result<f64> {
        match self.quantiles.pop_front() {
            Some(v) => Ok(v),
            None => Noiseless.quantile(sorted, rank, epsilon, bounds),
        }
    }
}

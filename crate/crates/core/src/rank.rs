//! Rank maps over a vector of values.
//!
//! `order[r]` is the index holding the `r`-th highest value (zero-based
//! rank), and `inverse[i]` is the rank of index `i`. Ties go to the lower
//! index, so the map is a deterministic function of its input.

use std::cmp::Ordering;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankMap {
    order: Vec<usize>,
    inverse: Vec<usize>,
}

impl RankMap {
    /// Index of the `rank`-th highest value, `rank` zero-based.
    pub fn index_at(&self, rank: usize) -> usize {
        self.order[rank]
    }

    /// Zero-based rank of `index`.
    pub fn rank_of(&self, index: usize) -> usize {
        self.inverse[index]
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// The best index, i.e. `index_at(0)`.
    pub fn top(&self) -> usize {
        self.order[0]
    }
}

/// Builds the rank map of `values`.
pub fn rank_map(values: &[f64]) -> Result<RankMap> {
    if values.is_empty() {
        return Err(Error::InvalidInput("rank map of an empty vector".into()));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "value at index {i} is not finite"
        )));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut inverse = vec![0; values.len()];
    for (rank, &idx) in order.iter().enumerate() {
        inverse[idx] = rank;
    }
    Ok(RankMap { order, inverse })
}

/// Index of the highest value among `candidates`, ties to the earliest candidate.
pub(crate) fn argmax_by<I>(candidates: I, value: impl Fn(usize) -> f64) -> Option<usize>
where
    I: IntoIterator<Item = usize>,
{
    let mut best: Option<(usize, f64)> = None;
    for i in candidates {
        let v = value(i);
        match best {
            Some((_, bv)) if v <= bv => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

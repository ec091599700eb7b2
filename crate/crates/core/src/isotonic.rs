//! Weighted isotonic regression by pool-adjacent-violators.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Increasing,
    Decreasing,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IsotonicError {
    #[error("values has length {values} but weights has length {weights}")]
    LengthMismatch { values: usize, weights: usize },
    #[error("isotonic fit needs at least one value")]
    Empty,
    #[error("value at index {0} is not finite")]
    NonFiniteValue(usize),
    #[error("weight at index {0} must be finite and non-negative")]
    BadWeight(usize),
}

/// Running block of pooled entries.
#[derive(Debug, Clone, Copy)]
struct Block {
    weighted_sum: f64,
    weight: f64,
    sum: f64,
    len: usize,
}

impl Block {
    fn value(&self) -> f64 {
        if self.weight > 0.0 {
            self.weighted_sum / self.weight
        } else {
            // zero-mass block: any value between its neighbours is optimal
            self.sum / self.len as f64
        }
    }

    fn absorb(&mut self, other: Block) {
        self.weighted_sum += other.weighted_sum;
        self.weight += other.weight;
        self.sum += other.sum;
        self.len += other.len;
    }
}

/// Monotone sequence minimizing `sum w_i (v_i - r_i)^2`.
///
/// `Decreasing` is solved as the negation of the increasing fit on `-v`.
/// If every weight is zero the fit uses uniform weights.
pub fn weighted_isotonic(
    values: &[f64],
    weights: &[f64],
    direction: Direction,
) -> Result<Vec<f64>, IsotonicError> {
    if values.len() != weights.len() {
        return Err(IsotonicError::LengthMismatch {
            values: values.len(),
            weights: weights.len(),
        });
    }
    if values.is_empty() {
        return Err(IsotonicError::Empty);
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(IsotonicError::NonFiniteValue(i));
    }
    if let Some(i) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
        return Err(IsotonicError::BadWeight(i));
    }
    let uniform;
    let weights = if weights.iter().all(|&w| w == 0.0) {
        uniform = vec![1.0; values.len()];
        &uniform[..]
    } else {
        weights
    };
    Ok(match direction {
        Direction::Increasing => pava(values.iter().copied(), weights),
        Direction::Decreasing => pava(values.iter().map(|v| -v), weights)
            .into_iter()
            .map(|r| -r)
            .collect(),
    })
}

fn pava(values: impl Iterator<Item = f64>, weights: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<Block> = Vec::with_capacity(weights.len());
    for (v, &w) in values.zip(weights) {
        let mut current = Block {
            weighted_sum: v * w,
            weight: w,
            sum: v,
            len: 1,
        };
        while let Some(prev) = blocks.last() {
            if prev.value() <= current.value() {
                break;
            }
            let mut merged = blocks.pop().unwrap();
            merged.absorb(current);
            current = merged;
        }
        blocks.push(current);
    }
    let mut out = Vec::with_capacity(weights.len());
    for b in blocks {
        out.extend(std::iter::repeat_n(b.value(), b.len));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let inc = Direction::Increasing;
        assert_eq!(weighted_isotonic(&[1., 2., 3.], &[1., 1., 1.], inc).unwrap(), [1., 2., 3.]);
        assert_eq!(weighted_isotonic(&[3., 1., 2.], &[1., 1., 1.], inc).unwrap(), [2., 2., 2.]);
        assert_eq!(weighted_isotonic(&[1., 3., 2.], &[1., 1., 1.], inc).unwrap(), [1., 2.5, 2.5]);
        assert_eq!(
            weighted_isotonic(&[0., 10.], &[3., 1.], Direction::Decreasing).unwrap(),
            [2.5, 2.5]
        );
    }

    #[test]
    fn zero_weights() {
        // all-zero weights fall back to uniform
        assert_eq!(
            weighted_isotonic(&[3., 1.], &[0., 0.], Direction::Increasing).unwrap(),
            [2., 2.]
        );
        // a massless violator does not disturb weighted blocks
        assert_eq!(
            weighted_isotonic(&[0., 5., 1.], &[1., 0., 1.], Direction::Increasing).unwrap(),
            [0., 1., 1.]
        );
    }

    #[test]
    fn errors() {
        let inc = Direction::Increasing;
        assert_eq!(
            weighted_isotonic(&[1., 2.], &[1.], inc),
            Err(IsotonicError::LengthMismatch { values: 2, weights: 1 })
        );
        assert_eq!(weighted_isotonic(&[], &[], inc), Err(IsotonicError::Empty));
        assert_eq!(weighted_isotonic(&[1.], &[-1.], inc), Err(IsotonicError::BadWeight(0)));
        assert_eq!(
            weighted_isotonic(&[f64::NAN], &[1.], inc),
            Err(IsotonicError::NonFiniteValue(0))
        );
    }

    // pooling equal values can move the mean by an ulp
    fn close(a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + y.abs()))
    }

    fn case() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..40).prop_flat_map(|n| {
            (
                prop::collection::vec(-100.0f64..100.0, n),
                prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..50.0], n),
            )
        })
    }

    proptest! {
        #[test]
        fn monotone_idempotent_and_dual((values, weights) in case()) {
            let up = weighted_isotonic(&values, &weights, Direction::Increasing).unwrap();
            prop_assert!(up.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(close(&weighted_isotonic(&up, &weights, Direction::Increasing).unwrap(), &up));

            let down = weighted_isotonic(&values, &weights, Direction::Decreasing).unwrap();
            prop_assert!(down.windows(2).all(|w| w[0] >= w[1]));
            prop_assert!(close(&weighted_isotonic(&down, &weights, Direction::Decreasing).unwrap(), &down));

            let neg: Vec<f64> = values.iter().map(|v| -v).collect();
            let dual: Vec<f64> = weighted_isotonic(&neg, &weights, Direction::Increasing)
                .unwrap()
                .into_iter()
                .map(|r| -r)
                .collect();
            prop_assert_eq!(down, dual);
        }

        #[test]
        fn preserves_weighted_mass((values, weights) in case()) {
            prop_assume!(weights.iter().any(|&w| w > 0.0));
            let fit = weighted_isotonic(&values, &weights, Direction::Increasing).unwrap();
            let before: f64 = values.iter().zip(&weights).map(|(v, w)| v * w).sum();
            let after: f64 = fit.iter().zip(&weights).map(|(v, w)| v * w).sum();
            prop_assert!((before - after).abs() <= 1e-7 * (1.0 + before.abs()));
        }
    }
}

//! Log-space factors over discrete variables.
//!
//! Values are stored as natural logarithms; a zero entry is stored as
//! `f64::NEG_INFINITY`. Tables are row-major in scope order (last scope
//! variable fastest).

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    scope: Vec<usize>,
    cards: Vec<usize>,
    log_values: Vec<f64>,
}

/// `ln(sum(exp(x)))`, exact for all-zero input.
pub fn log_sum_exp(values: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values
        .into_iter()
        .map(|v| (v - max).exp())
        .sum::<f64>()
        .ln()
}

/// `ln p`, with `ln 0` mapped to `NEG_INFINITY` explicitly.
pub fn ln_prob(p: f64) -> f64 {
    if p == 0.0 {
        f64::NEG_INFINITY
    } else {
        p.ln()
    }
}

impl Factor {
    pub fn new(scope: Vec<usize>, cards: Vec<usize>, log_values: Vec<f64>) -> Self {
        assert_eq!(scope.len(), cards.len());
        assert_eq!(cards.iter().product::<usize>(), log_values.len());
        Factor {
            scope,
            cards,
            log_values,
        }
    }

    pub fn from_probabilities(scope: Vec<usize>, cards: Vec<usize>, probs: &[f64]) -> Self {
        Self::new(scope, cards, probs.iter().map(|&p| ln_prob(p)).collect())
    }

    /// The empty-scope factor with value 1.
    pub fn unit() -> Self {
        Factor::new(Vec::new(), Vec::new(), vec![0.0])
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn len(&self) -> usize {
        self.log_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_values.is_empty()
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.log_values.iter().map(|v| v.exp()).collect()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.log_values[index].exp()
    }

    /// Flat index of a configuration given in scope order.
    pub fn index_of(&self, config: &[usize]) -> usize {
        config
            .iter()
            .zip(&self.cards)
            .fold(0, |acc, (&c, &k)| acc * k + c)
    }

    /// Configuration (scope order) of a flat index.
    pub fn config_of(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.cards.len()];
        for (slot, &k) in out.iter_mut().zip(&self.cards).rev() {
            *slot = index % k;
            index /= k;
        }
        out
    }

    pub fn position(&self, var: usize) -> Option<usize> {
        self.scope.iter().position(|&v| v == var)
    }

    /// Natural log of the sum of all entries.
    pub fn log_total(&self) -> f64 {
        log_sum_exp(self.log_values.iter().copied())
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.cards.len()];
        for i in (0..self.cards.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.cards[i + 1];
        }
        strides
    }

    /// Pointwise product over the union of both scopes.
    pub fn product(&self, other: &Factor) -> Factor {
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        for (&v, &k) in other.scope.iter().zip(&other.cards) {
            if !scope.contains(&v) {
                scope.push(v);
                cards.push(k);
            }
        }
        let map_strides = |f: &Factor| -> Vec<usize> {
            let own = f.strides();
            scope
                .iter()
                .map(|v| f.position(*v).map_or(0, |p| own[p]))
                .collect()
        };
        let sa = map_strides(self);
        let sb = map_strides(other);
        let total: usize = cards.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut counter = vec![0usize; cards.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        for _ in 0..total {
            values.push(self.log_values[ia] + other.log_values[ib]);
            for d in (0..cards.len()).rev() {
                counter[d] += 1;
                ia += sa[d];
                ib += sb[d];
                if counter[d] < cards[d] {
                    break;
                }
                ia -= sa[d] * cards[d];
                ib -= sb[d] * cards[d];
                counter[d] = 0;
            }
        }
        Factor::new(scope, cards, values)
    }

    /// Sums `var` out of the factor. A factor not mentioning `var` is
    /// returned unchanged.
    pub fn sum_out(&self, var: usize) -> Factor {
        let Some(pos) = self.position(var) else {
            return self.clone();
        };
        let k = self.cards[pos];
        let inner: usize = self.cards[pos + 1..].iter().product();
        let outer: usize = self.cards[..pos].iter().product();
        let mut values = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            for i in 0..inner {
                let base = o * k * inner + i;
                values.push(log_sum_exp(
                    (0..k).map(|j| self.log_values[base + j * inner]),
                ));
            }
        }
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        scope.remove(pos);
        cards.remove(pos);
        Factor::new(scope, cards, values)
    }

    /// Restricts `var` to `outcome`, dropping it from the scope.
    pub fn reduce(&self, var: usize, outcome: usize) -> Factor {
        let Some(pos) = self.position(var) else {
            return self.clone();
        };
        let k = self.cards[pos];
        let inner: usize = self.cards[pos + 1..].iter().product();
        let outer: usize = self.cards[..pos].iter().product();
        let mut values = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            let base = o * k * inner + outcome * inner;
            values.extend_from_slice(&self.log_values[base..base + inner]);
        }
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        scope.remove(pos);
        cards.remove(pos);
        Factor::new(scope, cards, values)
    }

    /// Reorders the table to `order`, which must be a permutation of the scope.
    pub fn reorder(&self, order: &[usize]) -> Factor {
        assert_eq!(order.len(), self.scope.len());
        if order == self.scope.as_slice() {
            return self.clone();
        }
        let positions: Vec<usize> = order
            .iter()
            .map(|v| self.position(*v).expect("reorder: variable not in scope"))
            .collect();
        let cards: Vec<usize> = positions.iter().map(|&p| self.cards[p]).collect();
        let own = self.strides();
        let strides: Vec<usize> = positions.iter().map(|&p| own[p]).collect();
        let total = self.len();
        let mut values = Vec::with_capacity(total);
        let mut counter = vec![0usize; cards.len()];
        let mut idx = 0usize;
        for _ in 0..total {
            values.push(self.log_values[idx]);
            for d in (0..cards.len()).rev() {
                counter[d] += 1;
                idx += strides[d];
                if counter[d] < cards[d] {
                    break;
                }
                idx -= strides[d] * cards[d];
                counter[d] = 0;
            }
        }
        Factor::new(order.to_vec(), cards, values)
    }

    /// Scales the factor to unit total. Fails when every entry is zero.
    pub fn normalized(&self) -> Result<Factor> {
        let total = self.log_total();
        if total == f64::NEG_INFINITY {
            return Err(Error::ImpossibleEvidence(
                "all configurations have zero probability".into(),
            ));
        }
        Ok(Factor::new(
            self.scope.clone(),
            self.cards.clone(),
            self.log_values.iter().map(|v| v - total).collect(),
        ))
    }
}

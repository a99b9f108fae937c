//! Exact CDF recursion for the maximum occurrence count over random labelings
//! of `T^m_n`.
//!
//! Values are carried as integer counts of labelings of the non-root
//! vertices. `T^m_l` has `2m(2^l - 1)` non-root vertices, so a count `c`
//! stands for `c / 2^(2m(2^l - 1))`; the recursion then stays in integers:
//!
//! `N(m, l, x) = sum_i C(2m, i) N(i, l-1, x) N(2m-i, l-1, x)`.
//!
//! Since `T^m_l` has `m 2^l` full-length walks and the root label is shared,
//! they spread over `2^l` sequences and `m <= M <= m 2^l`, which decides many
//! states without recursing.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::FraudError;
use crate::dyadic::DyadicProbability;

/// Largest `m` at level 1 for which tables are built eagerly.
pub(crate) const MAX_TABLE_M: u64 = 1 << 12;

fn log2_labelings(m: u64, level: u32) -> u64 {
    2 * m * ((1u64 << level) - 1)
}

/// Binomial rows `C(2m, ·)` and level-1 CDF counts for `m <= max_m`.
#[derive(Debug)]
pub struct TreeTables {
    max_m: u64,
    rows: Vec<Vec<BigUint>>,
    // base[m][x - m - 1] = C(2m,m) + 2 sum_{i=m+1}^{x-1} C(2m,i) for m < x <= 2m
    base: Vec<Vec<Arc<BigUint>>>,
}

impl TreeTables {
    pub fn new(max_m: u64) -> Result<Self, FraudError> {
        if max_m > MAX_TABLE_M {
            return Err(FraudError::ResourceLimit(format!(
                "binomial tables for m up to {max_m} exceed the cap of {MAX_TABLE_M}"
            )));
        }
        let mut rows = Vec::with_capacity(max_m as usize + 1);
        let mut base = Vec::with_capacity(max_m as usize + 1);
        for m in 0..=max_m {
            let row = binomial_row(2 * m);
            let mut cdf = Vec::with_capacity(m as usize);
            if m > 0 {
                let mut acc = row[m as usize].clone();
                cdf.push(Arc::new(acc.clone()));
                for i in m + 1..2 * m {
                    acc += &row[i as usize] << 1u32;
                    cdf.push(Arc::new(acc.clone()));
                }
            }
            rows.push(row);
            base.push(cdf);
        }
        Ok(TreeTables { max_m, rows, base })
    }

    /// Tables sufficient for `T^1_n`.
    pub fn for_rounds(n: u32) -> Result<Self, FraudError> {
        if n == 0 || n > 13 {
            return Err(FraudError::ResourceLimit(format!("exact tables unsupported for n = {n}")));
        }
        Self::new(1u64 << (n - 1))
    }

    pub fn max_m(&self) -> u64 {
        self.max_m
    }

    fn binomial(&self, m: u64, i: u64) -> &BigUint {
        &self.rows[m as usize][i as usize]
    }

    fn base_count(&self, m: u64, x: u64) -> Count {
        if m == 0 {
            return Count::Full;
        }
        if x <= m {
            Count::Zero
        } else if x > 2 * m {
            Count::Full
        } else {
            Count::Partial(Arc::clone(&self.base[m as usize][(x - m - 1) as usize]))
        }
    }

    /// `Pr(M^m_n < x)` with a caller-owned memo for the current `x`.
    pub fn recursive_prob(
        &self,
        m: u64,
        n: u32,
        x: u64,
        memo: &mut SweepMemo,
    ) -> Result<DyadicProbability, FraudError> {
        if n == 0 || x == 0 {
            return Err(FraudError::Precondition("recursive_prob needs n >= 1 and x >= 1".into()));
        }
        // Level-1 states below (m, n) reach m 2^(n-1).
        let widest = m.checked_shl(n - 1).filter(|w| *w >> (n - 1) == m);
        if widest.is_none_or(|w| w > self.max_m) {
            return Err(FraudError::ResourceLimit(format!(
                "state (m = {m}, n = {n}) needs tables beyond m = {}",
                self.max_m
            )));
        }
        memo.reset_for(x);
        let count = self.count(m, n, memo);
        Ok(count.to_probability(log2_labelings(m, n)))
    }

    fn count(&self, m: u64, level: u32, memo: &mut SweepMemo) -> Count {
        let x = memo.x;
        if m == 0 {
            return Count::Full;
        }
        if level == 1 {
            return self.base_count(m, x);
        }
        if x <= m {
            return Count::Zero;
        }
        if (x - 1) >> level >= m {
            return Count::Full;
        }
        if let Some(c) = memo.values.get(&(level, m)) {
            return c.clone();
        }
        let child = level - 1;
        let child_bits = |i: u64| log2_labelings(i, child);
        // A child factor is zero once i >= x, so only i in (2m - x, x) contribute.
        let lo = (2 * m).saturating_sub(x - 1);
        let mut children = Vec::with_capacity((m - lo + 1) as usize);
        for i in lo..=m {
            let a = self.count(i, child, memo);
            let b = self.count(2 * m - i, child, memo);
            children.push((i, a, b));
        }
        let mut total = BigUint::zero();
        for (i, a, b) in &children {
            let (i, j) = (*i, 2 * m - *i);
            let mut term = match (a, b) {
                (Count::Zero, _) | (_, Count::Zero) => continue,
                (Count::Full, Count::Full) => self.binomial(m, i) << (child_bits(i) + child_bits(j)),
                (Count::Partial(p), Count::Full) => (self.binomial(m, i) * p.as_ref()) << child_bits(j),
                (Count::Full, Count::Partial(q)) => (self.binomial(m, i) * q.as_ref()) << child_bits(i),
                (Count::Partial(p), Count::Partial(q)) => self.binomial(m, i) * p.as_ref() * q.as_ref(),
            };
            // C(2m,i) a_i b_j is symmetric under i <-> 2m - i.
            if i != j {
                term <<= 1u32;
            }
            total += term;
        }
        let full_bits = log2_labelings(m, level);
        let count = if total.is_zero() {
            Count::Zero
        } else if total.bits() == full_bits + 1 && total == BigUint::one() << full_bits {
            Count::Full
        } else {
            Count::Partial(Arc::new(total))
        };
        memo.values.insert((level, m), count.clone());
        count
    }
}

/// Per-`x` memo over `(level, m)`. Reusing it for a different `x` clears it.
#[derive(Debug, Default)]
pub struct SweepMemo {
    x: u64,
    values: HashMap<(u32, u64), Count>,
}

impl SweepMemo {
    pub fn new() -> Self {
        Self::default()
    }

    fn reset_for(&mut self, x: u64) {
        if self.x != x {
            self.values.clear();
            self.x = x;
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone)]
enum Count {
    Zero,
    /// Every labeling qualifies.
    Full,
    Partial(Arc<BigUint>),
}

impl Count {
    fn to_probability(&self, bits: u64) -> DyadicProbability {
        match self {
            Count::Zero => DyadicProbability::zero(),
            Count::Full => DyadicProbability::one(),
            Count::Partial(c) => DyadicProbability::from_count(c.as_ref().clone(), bits),
        }
    }
}

fn binomial_row(n: u64) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = BigUint::one();
    row.push(c.clone());
    for i in 0..n {
        c = c * (n - i) / (i + 1);
        row.push(c.clone());
    }
    row
}

/// Stop conditions for the recursion, in priority order: `m = 0 -> 1`,
/// `x <= m -> 0`, `x > 2m -> 1`, otherwise the central binomial mass
/// `(C(2m,m) + 2 sum_{i=m+1}^{x-1} C(2m,i)) / 2^(2m)`.
pub fn base_case_prob(m: u64, x: u64) -> DyadicProbability {
    if m == 0 {
        return DyadicProbability::one();
    }
    if x <= m {
        return DyadicProbability::zero();
    }
    if x > 2 * m {
        return DyadicProbability::one();
    }
    let row = binomial_row(2 * m);
    let mut count = row[m as usize].clone();
    for i in m + 1..x {
        count += &row[i as usize] << 1u32;
    }
    DyadicProbability::from_count(count, 2 * m)
}

/// One-off `Pr(M^m_n < x)`; builds its own tables.
pub fn recursive_prob(m: u64, n: u32, x: u64) -> Result<DyadicProbability, FraudError> {
    if n == 0 {
        return Err(FraudError::Precondition("n must be at least 1".into()));
    }
    let widest = m.saturating_mul(1u64 << (n - 1).min(40));
    let tables = TreeTables::new(widest)?;
    tables.recursive_prob(m, n, x, &mut SweepMemo::new())
}

/// Floating-point twin of the recursion, on probabilities directly.
#[derive(Debug)]
pub struct FloatTables {
    // pmf[m][i] = C(2m, i) / 4^m
    pmf: Vec<Vec<f64>>,
    base: Vec<Vec<f64>>,
}

impl FloatTables {
    pub fn new(max_m: u64) -> Self {
        let mut pmf = Vec::with_capacity(max_m as usize + 1);
        let mut base = Vec::with_capacity(max_m as usize + 1);
        for m in 0..=max_m {
            let row = binomial_pmf(2 * m);
            let mut cdf = Vec::new();
            if m > 0 {
                let mut acc = row[m as usize];
                cdf.push(acc);
                for i in m + 1..2 * m {
                    acc += 2.0 * row[i as usize];
                    cdf.push(acc.min(1.0));
                }
            }
            pmf.push(row);
            base.push(cdf);
        }
        FloatTables { pmf, base }
    }

    pub fn prob(&self, m: u64, level: u32, x: u64, memo: &mut HashMap<(u32, u64), f64>) -> f64 {
        if m == 0 {
            return 1.0;
        }
        if level == 1 {
            return if x <= m {
                0.0
            } else if x > 2 * m {
                1.0
            } else {
                self.base[m as usize][(x - m - 1) as usize]
            };
        }
        if x <= m {
            return 0.0;
        }
        if (x - 1) >> level >= m {
            return 1.0;
        }
        if let Some(&p) = memo.get(&(level, m)) {
            return p;
        }
        let lo = (2 * m).saturating_sub(x - 1);
        let mut total = 0.0;
        for i in lo..=m {
            let j = 2 * m - i;
            let a = self.prob(i, level - 1, x, memo);
            if a == 0.0 {
                continue;
            }
            let b = self.prob(j, level - 1, x, memo);
            let term = self.pmf[m as usize][i as usize] * a * b;
            total += if i == j { term } else { 2.0 * term };
        }
        memo.insert((level, m), total);
        total
    }
}

fn binomial_pmf(n: u64) -> Vec<f64> {
    // Start from the centre, C(n, n/2) / 2^n = prod (2j-1)/(2j), and walk outwards.
    let mid = n / 2;
    let mut centre = 1.0f64;
    if n.is_multiple_of(2) {
        for j in 1..=mid {
            centre *= (2 * j - 1) as f64 / (2 * j) as f64;
        }
    } else {
        centre = 0.5;
        for j in 1..=mid {
            centre *= (2 * j + 1) as f64 / (2 * j + 2) as f64;
        }
    }
    let mut row = vec![0.0; n as usize + 1];
    row[mid as usize] = centre;
    let mut p = centre;
    for i in mid..n {
        p *= (n - i) as f64 / (i + 1) as f64;
        row[i as usize + 1] = p;
    }
    let mut p = centre;
    for i in (1..=mid).rev() {
        p *= i as f64 / (n - i + 1) as f64;
        row[i as usize - 1] = p;
    }
    row
}

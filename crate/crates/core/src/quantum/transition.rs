use crate::error::{check_dims, invalid, Result};
use crate::prob::ProbDist;
use crate::scalar::Scalar;

/// Post-measurement transition statistics.
///
/// Entry `(i, mu)` is the probability of outcome `i` of the second measurement
/// on the state left behind by outcome `mu` of the first. Each column is a
/// distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix<T> {
    rows: usize,
    cols: usize,
    entries: Vec<T>,
}

impl<T: Scalar> TransitionMatrix<T> {
    /// `entries` is row-major, `rows x cols`.
    pub fn new(rows: usize, cols: usize, entries: Vec<T>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(invalid(format!(
                "expected {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if rows < 2 || cols < 2 {
            return Err(invalid("transition matrix needs at least 2 rows and 2 columns"));
        }
        let mut m = Self { rows, cols, entries };
        // Column sums are checked with the same slack as any distribution.
        for mu in 0..cols {
            let column = ProbDist::new((0..rows).map(|i| m.get(i, mu)).collect())
                .map_err(|e| invalid(format!("column {mu}: {e}")))?;
            for (i, &p) in column.probs().iter().enumerate() {
                m.entries[i * cols + mu] = p;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, mu: usize) -> T {
        self.entries[i * self.cols + mu]
    }

    pub fn row_sum(&self, i: usize) -> T {
        (0..self.cols).fold(T::zero(), |acc, mu| acc + self.get(i, mu))
    }

    pub fn column_sum(&self, mu: usize) -> T {
        (0..self.rows).fold(T::zero(), |acc, i| acc + self.get(i, mu))
    }

    /// Square, with every row and column summing to 1 within `tol`.
    pub fn is_doubly_stochastic(&self, tol: T) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (self.row_sum(i) - T::one()).abs() <= tol)
            && (0..self.cols).all(|mu| (self.column_sum(mu) - T::one()).abs() <= tol)
    }

    /// `sum_mu p(mu) P(i | S_mu)`.
    pub fn apply(&self, first: &ProbDist<T>) -> Result<ProbDist<T>> {
        check_dims(self.cols, first.len())?;
        let out = (0..self.rows)
            .map(|i| {
                (0..self.cols).fold(T::zero(), |acc, mu| acc + self.get(i, mu) * first.get(mu))
            })
            .collect();
        ProbDist::new(out)
    }
}

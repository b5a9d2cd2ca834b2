//! Dense symbolic tensor fields and their sampled numeric counterparts.

use crate::expr::{EvalError, Expr, Scope};

/// A (0,k) tensor field over an n-dimensional chart, components stored
/// row-major. Indices are 0-based internally; user-facing output is 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    pub n: usize,
    pub rank: usize,
    comps: Vec<Expr>,
}

/// Row-major linear offset of an index tuple.
pub fn lin(idx: &[usize], n: usize) -> usize {
    idx.iter().fold(0, |acc, &i| {
        debug_assert!(i < n);
        acc * n + i
    })
}

/// Iterates all index tuples of the given rank in row-major order.
pub fn indices(n: usize, rank: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = n.pow(rank as u32);
    (0..total).map(move |mut lin| {
        let mut idx = vec![0; rank];
        for slot in (0..rank).rev() {
            idx[slot] = lin % n;
            lin /= n;
        }
        idx
    })
}

impl TensorField {
    pub fn zeros(n: usize, rank: usize) -> TensorField {
        TensorField {
            n,
            rank,
            comps: vec![Expr::zero(); n.pow(rank as u32)],
        }
    }

    pub fn from_fn(n: usize, rank: usize, mut f: impl FnMut(&[usize]) -> Expr) -> TensorField {
        let mut t = TensorField::zeros(n, rank);
        for idx in indices(n, rank) {
            let e = f(&idx);
            t.set(&idx, e);
        }
        t
    }

    pub fn get(&self, idx: &[usize]) -> &Expr {
        debug_assert_eq!(idx.len(), self.rank);
        &self.comps[lin(idx, self.n)]
    }

    pub fn set(&mut self, idx: &[usize], e: Expr) {
        debug_assert_eq!(idx.len(), self.rank);
        let at = lin(idx, self.n);
        self.comps[at] = e;
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    /// Entrywise sum.
    pub fn add(&self, other: &TensorField) -> TensorField {
        assert_eq!((self.n, self.rank), (other.n, other.rank));
        TensorField {
            n: self.n,
            rank: self.rank,
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    /// Entrywise difference.
    pub fn sub(&self, other: &TensorField) -> TensorField {
        assert_eq!((self.n, self.rank), (other.n, other.rank));
        TensorField {
            n: self.n,
            rank: self.rank,
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    /// Entrywise scaling by a scalar field.
    pub fn scale(&self, s: &Expr) -> TensorField {
        TensorField {
            n: self.n,
            rank: self.rank,
            comps: self.comps.iter().map(|e| s.mul(e)).collect(),
        }
    }

    pub fn sample(&self, scope: &Scope) -> Result<SampledTensor, EvalError> {
        let mut vals = Vec::with_capacity(self.comps.len());
        for e in &self.comps {
            vals.push(e.eval(scope)?);
        }
        Ok(SampledTensor {
            n: self.n,
            rank: self.rank,
            vals,
        })
    }
}

/// A tensor evaluated at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTensor {
    pub n: usize,
    pub rank: usize,
    pub vals: Vec<f64>,
}

impl SampledTensor {
    pub fn zeros(n: usize, rank: usize) -> SampledTensor {
        SampledTensor {
            n,
            rank,
            vals: vec![0.0; n.pow(rank as u32)],
        }
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.vals[lin(idx, self.n)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let at = lin(idx, self.n);
        self.vals[at] = v;
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }

    /// Frobenius inner product over all index tuples.
    pub fn dot(&self, other: &SampledTensor) -> f64 {
        self.vals
            .iter()
            .zip(&other.vals)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_offsets_are_row_major() {
        assert_eq!(lin(&[0, 0], 4), 0);
        assert_eq!(lin(&[0, 1], 4), 1);
        assert_eq!(lin(&[1, 0], 4), 4);
        assert_eq!(lin(&[1, 2, 3], 4), 16 + 8 + 3);
    }

    #[test]
    fn index_iteration_covers_everything_once() {
        let all: Vec<Vec<usize>> = indices(3, 2).collect();
        assert_eq!(all.len(), 9);
        assert_eq!(all[0], vec![0, 0]);
        assert_eq!(all[1], vec![0, 1]);
        assert_eq!(all[8], vec![2, 2]);
    }

    #[test]
    fn sampling_and_algebra() {
        let t = TensorField::from_fn(3, 2, |idx| {
            if idx[0] == idx[1] {
                Expr::sym("x")
            } else {
                Expr::zero()
            }
        });
        let doubled = t.add(&t);
        let scope: Scope = [("x".to_string(), 2.5)].into_iter().collect();
        let s = doubled.sample(&scope).unwrap();
        assert_eq!(s.get(&[1, 1]), 5.0);
        assert_eq!(s.get(&[0, 1]), 0.0);
        assert_eq!(s.max_abs(), 5.0);
        let diff = doubled.sub(&t).sub(&t);
        assert!(diff.sample(&scope).unwrap().max_abs() == 0.0);
    }
}

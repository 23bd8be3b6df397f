//! Problem instances and spin configurations.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;

use crate::graphs::GraphFamily;
use crate::{Error, Result};

/// Direction of optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    /// `true` when `a` is strictly better than `b`.
    #[inline]
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Sense::Minimize => a < b,
            Sense::Maximize => a > b,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sense::Minimize => "minimize",
            Sense::Maximize => "maximize",
        }
    }
}

impl core::str::FromStr for Sense {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minimize" | "min" => Ok(Sense::Minimize),
            "maximize" | "max" => Ok(Sense::Maximize),
            _ => Err(Error::InvalidParameter("sense must be minimize or maximize")),
        }
    }
}

/// Where an instance came from, kept so sweeps can be replayed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Source {
    Generated { family: GraphFamily, seed: u64 },
    Mis { rho: f64, penalty: f64, seed: u64 },
}

/// A quadratic binary optimization problem over `±1` spins.
///
/// `weights` is dense, symmetric and zero on the diagonal; `linear` holds the
/// one-body coefficients and is all zeros when the problem has none.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    weights: DMatrix<f64>,
    linear: Vec<f64>,
    sense: Sense,
    source: Option<Source>,
}

impl ProblemInstance {
    pub fn new(weights: DMatrix<f64>, linear: Option<Vec<f64>>, sense: Sense) -> Result<Self> {
        let n = weights.nrows();
        if weights.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: weights.ncols(),
            });
        }
        if n < 2 {
            return Err(Error::TooFewVariables(n));
        }
        for j in 0..n {
            for i in 0..n {
                let w = weights[(i, j)];
                if !w.is_finite() {
                    return Err(Error::NonFinite);
                }
                if i == j && w != 0.0 {
                    return Err(Error::NonzeroDiagonal(i));
                }
                if i < j && w != weights[(j, i)] {
                    return Err(Error::NotSymmetric(i, j));
                }
            }
        }
        let linear = match linear {
            Some(h) => {
                if h.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: h.len(),
                    });
                }
                if h.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite);
                }
                h
            }
            None => vec![0.0; n],
        };
        Ok(Self {
            weights,
            linear,
            sense,
            source: None,
        })
    }

    /// Builds an instance from an undirected edge list `(i, j, w)` with `i != j`.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)], sense: Sense) -> Result<Self> {
        let mut w = DMatrix::zeros(n, n);
        for &(i, j, x) in edges {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange { index: i.max(j), n });
            }
            if i == j {
                return Err(Error::NonzeroDiagonal(i));
            }
            w[(i, j)] = x;
            w[(j, i)] = x;
        }
        Self::new(w, None, sense)
    }

    pub fn with_source(mut self, source: Source) -> Self {
        self.source = Some(source);
        self
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    #[inline]
    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    #[inline]
    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    #[inline]
    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn source(&self) -> Option<&Source> {
        self.source.as_ref()
    }

    pub fn has_linear(&self) -> bool {
        self.linear.iter().any(|&h| h != 0.0)
    }

    /// `true` when every weight and one-body coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.weights.iter().chain(self.linear.iter()).all(|&x| x == crate::math::round(x))
    }

    /// Undirected edges `(i, j, w)` with `i < j` and `w != 0`, row-major order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.weights[(i, j)];
                if w != 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    /// Number of nonzero couplings at each vertex.
    pub fn degrees(&self) -> Vec<usize> {
        let n = self.n();
        (0..n)
            .map(|j| self.weights.column(j).iter().filter(|&&w| w != 0.0).count())
            .collect()
    }

    /// `C(z)` for a raw `±1` slice; no validation.
    pub(crate) fn eval(&self, z: &[i8]) -> f64 {
        let n = self.n();
        let mut total = 0.0;
        for j in 0..n {
            let col = self.weights.column(j);
            let mut field = 0.0;
            for (i, &w) in col.iter().enumerate() {
                if w != 0.0 {
                    field += w * z[i] as f64;
                }
            }
            total += z[j] as f64 * (field + self.linear[j]);
        }
        total
    }

    /// Objective value `C(z)` (ordered-pair convention plus one-body terms).
    pub fn objective_value(&self, z: &Spins) -> Result<f64> {
        if z.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: z.len(),
            });
        }
        Ok(self.eval(z.as_slice()))
    }
}

/// Free-function form of [`ProblemInstance::objective_value`].
pub fn objective_value(inst: &ProblemInstance, z: &Spins) -> Result<f64> {
    inst.objective_value(z)
}

/// A candidate solution in `{±1}^N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Spins(Vec<i8>);

impl Spins {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if values.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidSpin);
        }
        Ok(Self(values))
    }

    pub fn all_up(n: usize) -> Self {
        Self(vec![1; n])
    }

    /// Spins for basis index `index`: bit `i` set means `z_i = -1`.
    pub fn from_index(index: u64, n: usize) -> Self {
        Self((0..n).map(|i| if (index >> i) & 1 == 1 { -1 } else { 1 }).collect())
    }

    /// Inverse of [`Spins::from_index`]; `None` past 64 variables.
    pub fn to_index(&self) -> Option<u64> {
        if self.0.len() > 64 {
            return None;
        }
        Some(
            self.0
                .iter()
                .enumerate()
                .filter(|(_, &s)| s == -1)
                .fold(0u64, |acc, (i, _)| acc | (1 << i)),
        )
    }

    /// Entrywise sign of a real vector; zeros are left to `tie`.
    pub fn from_signs(v: impl IntoIterator<Item = f64>, mut tie: impl FnMut() -> i8) -> Self {
        Self(
            v.into_iter()
                .map(|x| {
                    if crate::math::abs(x) < crate::rounding::ZERO_THRESHOLD {
                        tie()
                    } else if x > 0.0 {
                        1
                    } else {
                        -1
                    }
                })
                .collect(),
        )
    }

    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|&s| -s).collect())
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().map(|&s| s as f64)
    }

    /// Same configuration up to a global spin flip.
    pub fn equivalent(&self, other: &Spins) -> bool {
        self == other || *self == other.flipped()
    }
}

impl fmt::Display for Spins {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            f.write_str(if s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pair() -> ProblemInstance {
        ProblemInstance::from_edges(2, &[(0, 1, 1.0)], Sense::Minimize).unwrap()
    }

    #[test]
    fn single_edge_ordered_pairs() {
        let inst = pair();
        let up = Spins::new(vec![1, 1]).unwrap();
        let anti = Spins::new(vec![1, -1]).unwrap();
        assert_eq!(inst.objective_value(&up).unwrap(), 2.0);
        assert_eq!(inst.objective_value(&anti).unwrap(), -2.0);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let inst = pair();
        let z = Spins::all_up(3);
        assert!(matches!(
            inst.objective_value(&z),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn rejects_bad_matrices() {
        let mut w = DMatrix::zeros(3, 3);
        w[(0, 1)] = 1.0;
        assert_eq!(
            ProblemInstance::new(w.clone(), None, Sense::Minimize),
            Err(Error::NotSymmetric(0, 1))
        );
        w[(1, 0)] = 1.0;
        w[(2, 2)] = 0.5;
        assert_eq!(
            ProblemInstance::new(w, None, Sense::Minimize),
            Err(Error::NonzeroDiagonal(2))
        );
        assert_eq!(
            ProblemInstance::new(DMatrix::zeros(1, 1), None, Sense::Minimize),
            Err(Error::TooFewVariables(1))
        );
        assert!(Spins::new(vec![1, 0]).is_err());
    }

    #[test]
    fn index_round_trip() {
        let z = Spins::from_index(0b1010, 5);
        assert_eq!(z.as_slice(), &[1, -1, 1, -1, 1]);
        assert_eq!(z.to_index(), Some(0b1010));
    }

    proptest! {
        #[test]
        fn global_flip_leaves_quadratic_objective_unchanged(
            n in 2usize..9,
            seed in any::<u64>(),
            bits in any::<u64>(),
        ) {
            use rand::Rng;
            let mut rng = crate::seed::rng(seed);
            let mut w = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in (i + 1)..n {
                    let x: f64 = rng.random_range(-1.0..1.0);
                    w[(i, j)] = x;
                    w[(j, i)] = x;
                }
            }
            let inst = ProblemInstance::new(w, None, Sense::Minimize).unwrap();
            let z = Spins::from_index(bits, n);
            let a = inst.objective_value(&z).unwrap();
            let b = inst.objective_value(&z.flipped()).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}

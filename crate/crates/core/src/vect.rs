//! Sparse linear combinations over self-describing basis keys.
//!
//! One representation serves matrix-valued cochains, piecewise polynomial
//! forms and tensor words over either: a key knows its own degree, a vector
//! is a normalized sparse map from keys to scalars (no explicit zeros).

use std::collections::BTreeMap;

use crate::graded::frobenius_upper;
use crate::scalar::Coeff;

/// A basis key with an intrinsic integer degree.
pub trait BKey: Ord + Eq + Clone + std::fmt::Debug + Send + Sync + 'static {
    fn degree(&self) -> i64;
}

/// Sparse vector over a key type. Zero entries are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vect<Ky: BKey, K: Coeff> {
    terms: BTreeMap<Ky, K>,
}

impl<Ky: BKey, K: Coeff> Default for Vect<Ky, K> {
    fn default() -> Self {
        Vect { terms: BTreeMap::new() }
    }
}

impl<Ky: BKey, K: Coeff> Vect<Ky, K> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(key: Ky, coeff: K) -> Self {
        let mut v = Self::zero();
        v.add_term(key, coeff);
        v
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Ky, &K)> {
        self.terms.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &Ky> {
        self.terms.keys()
    }

    pub fn coeff(&self, key: &Ky) -> K {
        self.terms.get(key).cloned().unwrap_or_else(K::zero)
    }

    pub fn add_term(&mut self, key: Ky, coeff: K) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                e.get_mut().add_assign(&coeff);
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (k, v) in &other.terms {
            self.add_term(k.clone(), v.clone());
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.clone(), v.neg());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = v.neg();
        }
        out
    }

    pub fn scale(&self, c: &K) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut out = Self::zero();
        for (k, v) in &self.terms {
            let w = v.mul(c);
            if !w.is_zero() {
                out.terms.insert(k.clone(), w);
            }
        }
        out
    }

    pub fn scale_assign(&mut self, c: &K) {
        *self = self.scale(c);
    }

    /// Keep only terms satisfying the predicate.
    pub fn filter(&self, mut pred: impl FnMut(&Ky) -> bool) -> Self {
        let mut out = Self::zero();
        for (k, v) in &self.terms {
            if pred(k) {
                out.terms.insert(k.clone(), v.clone());
            }
        }
        out
    }

    /// All degrees present.
    pub fn degrees(&self) -> Vec<i64> {
        let mut ds: Vec<i64> = self.terms.keys().map(|k| k.degree()).collect();
        ds.sort_unstable();
        ds.dedup();
        ds
    }

    /// Whether every term has the given degree.
    pub fn is_homogeneous(&self, degree: i64) -> bool {
        self.terms.keys().all(|k| k.degree() == degree)
    }

    /// Upper bound on the coefficient l2 norm.
    pub fn norm_upper(&self) -> f64 {
        frobenius_upper(self.terms.values().map(|v| v.abs_upper_f64()))
    }

    /// Largest absolute coefficient, as an upper-bounded float.
    pub fn max_abs_upper(&self) -> f64 {
        self.terms.values().map(|v| v.abs_upper_f64()).fold(0.0, f64::max)
    }

    /// Apply a key-wise linear operator and sum the results.
    pub fn apply_linear<Out: BKey>(&self, mut op: impl FnMut(&Ky) -> Vect<Out, K>) -> Vect<Out, K> {
        let mut out = Vect::zero();
        for (k, v) in &self.terms {
            let image = op(k);
            for (k2, w) in &image.terms {
                out.add_term(k2.clone(), w.mul(v));
            }
        }
        out
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Ky, K)>) -> Self {
        let mut out = Self::zero();
        for (k, v) in terms {
            out.add_term(k, v);
        }
        out
    }
}

/// Tensor word over a key type: an element of the word basis of the tensor
/// coalgebra on the suspended space. The empty word is the coalgebra unit.
/// The degree is the total suspended degree (each factor shifted down by one).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Word<Ky: BKey>(pub Vec<Ky>);

impl<Ky: BKey> Word<Ky> {
    pub fn unit() -> Self {
        Word(Vec::new())
    }

    pub fn of(factors: impl IntoIterator<Item = Ky>) -> Self {
        Word(factors.into_iter().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Suspended degree of the prefix of the first `r` factors.
    pub fn prefix_degree(&self, r: usize) -> i64 {
        self.0[..r].iter().map(|k| k.degree() - 1).sum()
    }
}

impl<Ky: BKey> BKey for Word<Ky> {
    fn degree(&self) -> i64 {
        self.0.iter().map(|k| k.degree() - 1).sum()
    }
}

//! Truncated tensor coalgebras, coderivations and coalgebra morphisms.
//!
//! Elements live in the word basis of T(sV): a word of V-keys stands for the
//! tensor of their suspensions, and its degree is the total suspended degree.
//! Taylor coefficients are stored in suspended form, where every coderivation
//! coefficient has degree +1 (odd) and every morphism coefficient degree 0
//! (even); the Koszul sign rule is applied in exactly two places, the
//! (de)suspension wrappers and the odd-prefix rule of `apply_word`. All other
//! block formulas are then sign-free.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::scalar::Coeff;
use crate::tamper::Tamper;
use crate::vect::{BKey, Vect, Word};

/// A multilinear operator on suspended keys.
pub type MultiOp<A, B, K> = Arc<dyn Fn(&[A]) -> Vect<B, K> + Send + Sync>;

/// Wrap an unsuspended arity-k operation m_k: V^{⊗k} -> V of degree 2-k into
/// its suspended Taylor coefficient s∘m_k∘(s^{-1})^{⊗k} of degree +1.
///
/// The Koszul sign of (s^{-1})^{⊗k} against factors of suspended degrees
/// |sx_i| is (-1)^{Σ_{i<k} (k-i)·|sx_i|}.
pub fn suspend_op<A: BKey, B: BKey, K: Coeff>(arity: usize, m: MultiOp<A, B, K>) -> MultiOp<A, B, K> {
    Arc::new(move |keys: &[A]| {
        debug_assert_eq!(keys.len(), arity);
        let mut exp: i64 = 0;
        for (i, k) in keys.iter().enumerate() {
            if i + 1 < arity {
                exp += (arity - 1 - i) as i64 * (k.degree() - 1);
            }
        }
        let img = m(keys);
        if exp.rem_euclid(2) == 1 {
            img.neg()
        } else {
            img
        }
    })
}

/// Inverse of [`suspend_op`]: recover the unsuspended operation. Includes the
/// global (-1)^{k(k-1)/2} from inverting the tensor power of the suspension.
pub fn desuspend_op<A: BKey, B: BKey, K: Coeff>(
    arity: usize,
    b: MultiOp<A, B, K>,
) -> MultiOp<A, B, K> {
    Arc::new(move |keys: &[A]| {
        debug_assert_eq!(keys.len(), arity);
        let mut exp: i64 = (arity * (arity.saturating_sub(1)) / 2) as i64;
        for (i, k) in keys.iter().enumerate() {
            if i + 1 < arity {
                exp += (arity - 1 - i) as i64 * k.degree();
            }
        }
        let img = b(keys);
        if exp.rem_euclid(2) == 1 {
            img.neg()
        } else {
            img
        }
    })
}

/// A coderivation of the truncated tensor coalgebra, assembled from suspended
/// Taylor coefficients. `D_{n,k} = Σ 1^{⊗r} ⊗ b_s ⊗ 1^{⊗t}` with the odd
/// Koszul prefix sign.
#[derive(Clone)]
pub struct Coderivation<A: BKey, K: Coeff> {
    pub taylor: BTreeMap<usize, MultiOp<A, A, K>>,
    pub tamper: Tamper,
}

impl<A: BKey, K: Coeff> Coderivation<A, K> {
    pub fn new(taylor: BTreeMap<usize, MultiOp<A, A, K>>) -> Self {
        Coderivation { taylor, tamper: Tamper::None }
    }

    pub fn with_tamper(taylor: BTreeMap<usize, MultiOp<A, A, K>>, tamper: Tamper) -> Self {
        Coderivation { taylor, tamper }
    }

    pub fn max_arity(&self) -> usize {
        self.taylor.keys().copied().max().unwrap_or(0)
    }

    /// Whether the arity-0 coefficient vanishes identically (flat case); the
    /// caller supplies it since the closure cannot be inspected.
    pub fn apply_word(&self, w: &Word<A>, max_len: usize) -> Vect<Word<A>, K> {
        let n = w.len();
        let mut out = Vect::zero();
        for (&arity, op) in &self.taylor {
            if arity == 0 {
                if n + 1 > max_len {
                    continue;
                }
                let ins = op(&[]);
                for r in 0..=n {
                    let sign = self.prefix_sign(w, r);
                    for (key, c) in ins.iter() {
                        let mut word = w.0.clone();
                        word.insert(r, key.clone());
                        out.add_term(Word(word), sign.mul(c));
                    }
                }
            } else {
                if n < arity {
                    continue;
                }
                for r in 0..=(n - arity) {
                    let sign = self.prefix_sign(w, r);
                    let img = op(&w.0[r..r + arity]);
                    for (key, c) in img.iter() {
                        let mut word = Vec::with_capacity(n + 1 - arity);
                        word.extend_from_slice(&w.0[..r]);
                        word.push(key.clone());
                        word.extend_from_slice(&w.0[r + arity..]);
                        out.add_term(Word(word), sign.mul(c));
                    }
                }
            }
        }
        out
    }

    fn prefix_sign(&self, w: &Word<A>, r: usize) -> K {
        let mut odd = w.prefix_degree(r).rem_euclid(2) == 1;
        if self.tamper == Tamper::KoszulSignFlip {
            odd = !odd;
        }
        if odd {
            K::one().neg()
        } else {
            K::one()
        }
    }

    pub fn apply(&self, x: &Vect<Word<A>, K>, max_len: usize) -> Vect<Word<A>, K> {
        x.apply_linear(|w| self.apply_word(w, max_len))
    }

    /// The curvature element D1 (the arity-0 coefficient as a length-one
    /// component).
    pub fn curvature(&self) -> Vect<Word<A>, K> {
        match self.taylor.get(&0) {
            None => Vect::zero(),
            Some(op) => op(&[]).apply_linear(|k| Vect::single(Word(vec![k.clone()]), K::one())),
        }
    }
}

/// A coalgebra morphism T(sV) -> T(sW) assembled from suspended Taylor
/// coefficients of arities >= 1. Suspended coefficients are even, so the
/// assembled blocks `F_{i_1} ⊗ .. ⊗ F_{i_q}` carry no Koszul signs, and the
/// unit word maps to the unit word.
#[derive(Clone)]
pub struct CoalgMorphism<A: BKey, B: BKey, K: Coeff> {
    pub taylor: BTreeMap<usize, MultiOp<A, B, K>>,
}

impl<A: BKey, B: BKey, K: Coeff> CoalgMorphism<A, B, K> {
    pub fn new(taylor: BTreeMap<usize, MultiOp<A, B, K>>) -> Self {
        for &arity in taylor.keys() {
            assert!(arity >= 1, "morphism Taylor coefficients start at arity 1");
        }
        CoalgMorphism { taylor }
    }

    /// The identity morphism (first Taylor coefficient the identity).
    pub fn identity() -> CoalgMorphism<A, A, K> {
        let mut taylor: BTreeMap<usize, MultiOp<A, A, K>> = BTreeMap::new();
        taylor.insert(1, Arc::new(|keys: &[A]| Vect::single(keys[0].clone(), K::one())));
        CoalgMorphism { taylor }
    }

    pub fn apply_word(&self, w: &Word<A>) -> Vect<Word<B>, K> {
        let n = w.len();
        if n == 0 {
            return Vect::single(Word::unit(), K::one());
        }
        let mut out = Vect::zero();
        // partial states: (consumed, word-so-far, coefficient)
        let mut stack: Vec<(usize, Vec<B>, K)> = vec![(0, Vec::new(), K::one())];
        while let Some((consumed, word, coeff)) = stack.pop() {
            if consumed == n {
                out.add_term(Word(word), coeff);
                continue;
            }
            for (&arity, op) in &self.taylor {
                if consumed + arity > n {
                    continue;
                }
                let img = op(&w.0[consumed..consumed + arity]);
                for (key, c) in img.iter() {
                    let mut w2 = word.clone();
                    w2.push(key.clone());
                    stack.push((consumed + arity, w2, coeff.mul(c)));
                }
            }
        }
        out
    }

    pub fn apply(&self, x: &Vect<Word<A>, K>) -> Vect<Word<B>, K> {
        x.apply_linear(|w| self.apply_word(w))
    }

    /// Composition `g ∘ self` with Taylor coefficients
    /// `(G F)_p = Σ G_q (F_{i_1} ⊗ .. ⊗ F_{i_q})`, sign-free in suspended form.
    pub fn then<C: BKey>(&self, g: &CoalgMorphism<B, C, K>, max_arity: usize) -> CoalgMorphism<A, C, K> {
        let mut taylor: BTreeMap<usize, MultiOp<A, C, K>> = BTreeMap::new();
        for p in 1..=max_arity {
            let f = self.clone();
            let g = g.clone();
            let op: MultiOp<A, C, K> = Arc::new(move |keys: &[A]| {
                debug_assert_eq!(keys.len(), p);
                let mut out = Vect::zero();
                // all ways to split keys into q >= 1 consecutive nonempty
                // blocks, f applied per block, then g_q
                let mut stack: Vec<(usize, Vec<B>, K)> = vec![(0, Vec::new(), K::one())];
                while let Some((consumed, mids, coeff)) = stack.pop() {
                    if consumed == p {
                        let q = mids.len();
                        if let Some(gq) = g.taylor.get(&q) {
                            let img = gq(&mids);
                            for (key, c) in img.iter() {
                                out.add_term(key.clone(), coeff.mul(c));
                            }
                        }
                        continue;
                    }
                    for (&arity, fop) in &f.taylor {
                        if consumed + arity > p {
                            continue;
                        }
                        let img = fop(&keys[consumed..consumed + arity]);
                        for (key, c) in img.iter() {
                            let mut m2 = mids.clone();
                            m2.push(key.clone());
                            stack.push((consumed + arity, m2, coeff.mul(c)));
                        }
                    }
                }
                out
            });
            taylor.insert(p, op);
        }
        CoalgMorphism { taylor }
    }
}

/// All words of length <= max_len over an ordered alphabet.
pub fn word_basis<A: BKey>(alphabet: &[A], max_len: usize) -> Vec<Word<A>> {
    let mut out = vec![Word::unit()];
    let mut layer: Vec<Word<A>> = vec![Word::unit()];
    for _ in 1..=max_len {
        let mut next = Vec::with_capacity(layer.len() * alphabet.len());
        for w in &layer {
            for a in alphabet {
                let mut v = w.0.clone();
                v.push(a.clone());
                next.push(Word(v));
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

// ---------------------------------------------------------------------------
// pairings

/// Graded inner product on T(sV) induced by a base pairing on V: tensor
/// powers are pairwise orthogonal, each power carries the product form, and
/// the unit component is normalized to ⟨1,1⟩ = 1.
pub fn product_pairing<A: BKey, K: Coeff>(
    base: &dyn Fn(&A, &A) -> K,
    x: &Vect<Word<A>, K>,
    y: &Vect<Word<A>, K>,
) -> K {
    let mut acc = K::zero();
    for (wx, cx) in x.iter() {
        for (wy, cy) in y.iter() {
            if wx.len() != wy.len() {
                continue;
            }
            let mut prod = cx.mul(cy);
            for (a, b) in wx.0.iter().zip(&wy.0) {
                if prod.is_zero() {
                    break;
                }
                prod = prod.mul(&base(a, b));
            }
            acc.add_assign(&prod);
        }
    }
    acc
}

// ---------------------------------------------------------------------------
// coalgebra structure checks

/// Key for elements of T(sV) ⊗ T(sV), used by the coproduct checks.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PairKey<A: BKey>(pub Word<A>, pub Word<A>);

impl<A: BKey> BKey for PairKey<A> {
    fn degree(&self) -> i64 {
        self.0.degree() + self.1.degree()
    }
}

/// Deconcatenation coproduct including the unit splits.
pub fn coproduct<A: BKey, K: Coeff>(x: &Vect<Word<A>, K>) -> Vect<PairKey<A>, K> {
    x.apply_linear(|w| {
        let mut out = Vect::zero();
        for split in 0..=w.len() {
            out.add_term(
                PairKey(Word(w.0[..split].to_vec()), Word(w.0[split..].to_vec())),
                K::one(),
            );
        }
        out
    })
}

/// Residual of the co-Leibniz rule Δ∘D = (D⊗1 + 1⊗D)∘Δ on one word.
pub fn co_leibniz_residual<A: BKey, K: Coeff>(
    d: &Coderivation<A, K>,
    w: &Word<A>,
    max_len: usize,
) -> Vect<PairKey<A>, K> {
    let lhs = coproduct(&d.apply_word(w, max_len));
    let mut rhs = Vect::zero();
    for split in 0..=w.len() {
        let left = Word(w.0[..split].to_vec());
        let right = Word(w.0[split..].to_vec());
        // D⊗1
        for (dw, c) in d.apply_word(&left, max_len).iter() {
            rhs.add_term(PairKey(dw.clone(), right.clone()), c.clone());
        }
        // 1⊗D with the odd sign past the left factor
        let sign = if left.degree().rem_euclid(2) == 1 { K::one().neg() } else { K::one() };
        for (dw, c) in d.apply_word(&right, max_len).iter() {
            rhs.add_term(PairKey(left.clone(), dw.clone()), sign.mul(c));
        }
    }
    lhs.sub(&rhs)
}

/// Residual of comultiplicativity Δ'∘F = (F⊗F)∘Δ on one word.
pub fn comultiplicativity_residual<A: BKey, B: BKey, K: Coeff>(
    f: &CoalgMorphism<A, B, K>,
    w: &Word<A>,
) -> Vect<PairKey<B>, K> {
    let lhs = coproduct(&f.apply_word(w));
    let mut rhs = Vect::zero();
    for split in 0..=w.len() {
        let left = f.apply_word(&Word(w.0[..split].to_vec()));
        let right = f.apply_word(&Word(w.0[split..].to_vec()));
        for (lw, lc) in left.iter() {
            for (rw, rc) in right.iter() {
                rhs.add_term(PairKey(lw.clone(), rw.clone()), lc.mul(rc));
            }
        }
    }
    lhs.sub(&rhs)
}

//! Matrix-valued simplicial cochains: coboundary and the cup product.
//!
//! The cup product here is a cross-check oracle only; the product carried by
//! the transferred structures is the one induced by the Whitney wedge.

use std::sync::Arc;

use crate::complex::SimplicialComplex;
use crate::error::{Error, Result};
use crate::graded::GradedBasis;
use crate::scalar::Coeff;
use crate::vect::{BKey, Vect};

/// Basis key of `C^*(K, M_l)`: one oriented simplex and one matrix slot.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CochKey {
    pub dim: u16,
    pub idx: u32,
    pub row: u8,
    pub col: u8,
}

impl BKey for CochKey {
    fn degree(&self) -> i64 {
        self.dim as i64
    }
}

/// A matrix-valued simplicial cochain of homogeneous degree.
#[derive(Debug, Clone)]
pub struct Cochain<K: Coeff> {
    complex: Arc<SimplicialComplex>,
    l: usize,
    degree: usize,
    vect: Vect<CochKey, K>,
}

impl<K: Coeff> Cochain<K> {
    pub fn zero(complex: Arc<SimplicialComplex>, l: usize, degree: usize) -> Self {
        Cochain { complex, l, degree, vect: Vect::zero() }
    }

    pub fn from_vect(
        complex: Arc<SimplicialComplex>,
        l: usize,
        degree: usize,
        vect: Vect<CochKey, K>,
    ) -> Result<Self> {
        for key in vect.keys() {
            if key.dim as usize != degree {
                return Err(Error::structure("cochain value on simplex of wrong dimension"));
            }
            if key.row as usize >= l || key.col as usize >= l {
                return Err(Error::structure("cochain matrix slot out of range"));
            }
            if key.idx as usize >= complex.num_simplices(degree) {
                return Err(Error::structure("cochain simplex index out of range"));
            }
        }
        Ok(Cochain { complex, l, degree, vect })
    }

    /// Indicator cochain: value `E_{row,col}` on one simplex, zero elsewhere.
    pub fn indicator(
        complex: Arc<SimplicialComplex>,
        l: usize,
        degree: usize,
        idx: usize,
        row: usize,
        col: usize,
    ) -> Self {
        let key = CochKey { dim: degree as u16, idx: idx as u32, row: row as u8, col: col as u8 };
        Cochain { complex, l, degree, vect: Vect::single(key, K::one()) }
    }

    /// Constant cochain with the same matrix on every simplex of the degree.
    pub fn constant_matrix(
        complex: Arc<SimplicialComplex>,
        l: usize,
        degree: usize,
        matrix: &[Vec<K>],
    ) -> Self {
        let mut vect = Vect::zero();
        for idx in 0..complex.num_simplices(degree) {
            for (r, rowv) in matrix.iter().enumerate() {
                for (c, v) in rowv.iter().enumerate() {
                    vect.add_term(
                        CochKey { dim: degree as u16, idx: idx as u32, row: r as u8, col: c as u8 },
                        v.clone(),
                    );
                }
            }
        }
        Cochain { complex, l, degree, vect }
    }

    pub fn complex(&self) -> &Arc<SimplicialComplex> {
        &self.complex
    }

    pub fn matrix_size(&self) -> usize {
        self.l
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn vect(&self) -> &Vect<CochKey, K> {
        &self.vect
    }

    pub fn into_vect(self) -> Vect<CochKey, K> {
        self.vect
    }

    pub fn is_zero(&self) -> bool {
        self.vect.is_zero()
    }

    pub fn entry(&self, idx: usize, row: usize, col: usize) -> K {
        self.vect.coeff(&CochKey {
            dim: self.degree as u16,
            idx: idx as u32,
            row: row as u8,
            col: col as u8,
        })
    }

    pub fn value_matrix(&self, idx: usize) -> Vec<Vec<K>> {
        (0..self.l)
            .map(|r| (0..self.l).map(|c| self.entry(idx, r, c)).collect())
            .collect()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.degree != other.degree || self.l != other.l {
            return Err(Error::structure("cochain addition: degree or matrix size mismatch"));
        }
        Ok(Cochain {
            complex: self.complex.clone(),
            l: self.l,
            degree: self.degree,
            vect: self.vect.add(&other.vect),
        })
    }

    pub fn scale(&self, c: &K) -> Self {
        Cochain {
            complex: self.complex.clone(),
            l: self.l,
            degree: self.degree,
            vect: self.vect.scale(c),
        }
    }

    /// Simplicial coboundary: `(δc)(τ) = Σ_i (-1)^i c(τ minus i-th vertex)`.
    pub fn coboundary(&self) -> Self {
        let complex = self.complex.clone();
        let vect = self.vect.apply_linear(|key| coboundary_key::<K>(&complex, key));
        Cochain { complex, l: self.l, degree: self.degree + 1, vect }
    }

    /// Alexander-Whitney cup product with matrix multiplication of values.
    pub fn cup(&self, other: &Self) -> Result<Self> {
        if !Arc::ptr_eq(&self.complex, &other.complex) || self.l != other.l {
            return Err(Error::structure("cup product: complex or matrix size mismatch"));
        }
        let p = self.degree;
        let q = other.degree;
        let out_deg = p + q;
        let mut vect = Vect::zero();
        if out_deg > self.complex.dim() {
            return Cochain::from_vect(self.complex.clone(), self.l, out_deg, vect);
        }
        for idx in 0..self.complex.num_simplices(out_deg) {
            let tup = self.complex.simplex(out_deg, idx);
            let front = &tup[..=p];
            let back = &tup[p..];
            let fi = self.complex.simplex_index(front).expect("front face listed");
            let bi = self.complex.simplex_index(back).expect("back face listed");
            // value = a(front) * b(back), matrix product
            for r in 0..self.l {
                for c in 0..self.l {
                    let mut acc = K::zero();
                    for m in 0..self.l {
                        let x = self.entry_at(fi, r, m, p);
                        if x.is_zero() {
                            continue;
                        }
                        let y = other.entry_at(bi, m, c, q);
                        acc.add_assign(&x.mul(&y));
                    }
                    if !acc.is_zero() {
                        vect.add_term(
                            CochKey {
                                dim: out_deg as u16,
                                idx: idx as u32,
                                row: r as u8,
                                col: c as u8,
                            },
                            acc,
                        );
                    }
                }
            }
        }
        Cochain::from_vect(self.complex.clone(), self.l, out_deg, vect)
    }

    fn entry_at(&self, idx: usize, row: usize, col: usize, degree: usize) -> K {
        self.vect.coeff(&CochKey {
            dim: degree as u16,
            idx: idx as u32,
            row: row as u8,
            col: col as u8,
        })
    }
}

/// Coboundary as a key-wise operator.
pub fn coboundary_key<K: Coeff>(
    complex: &Arc<SimplicialComplex>,
    key: &CochKey,
) -> Vect<CochKey, K> {
    let mut out = Vect::zero();
    for &(coface, sign) in complex.cofaces_of(key.dim as usize, key.idx as usize) {
        out.add_term(
            CochKey { dim: key.dim + 1, idx: coface as u32, row: key.row, col: key.col },
            if sign >= 0 { K::one() } else { K::one().neg() },
        );
    }
    out
}

/// Enumeration of the cochain basis of `C^*(K, M_l)` in key order, with the
/// matching graded basis for matrix materialization.
#[derive(Debug, Clone)]
pub struct CochainIndex {
    pub keys: Vec<CochKey>,
    pub basis: Arc<GradedBasis>,
}

impl CochainIndex {
    pub fn new(complex: &Arc<SimplicialComplex>, l: usize) -> Self {
        let mut keys = Vec::new();
        for d in 0..=complex.dim() {
            for idx in 0..complex.num_simplices(d) {
                for row in 0..l {
                    for col in 0..l {
                        keys.push(CochKey {
                            dim: d as u16,
                            idx: idx as u32,
                            row: row as u8,
                            col: col as u8,
                        });
                    }
                }
            }
        }
        keys.sort();
        let degrees = keys.iter().map(|k| k.degree()).collect();
        let labels = keys
            .iter()
            .map(|k| {
                format!(
                    "{}[{},{}]",
                    complex.simplex_label(k.dim as usize, k.idx as usize),
                    k.row,
                    k.col
                )
            })
            .collect();
        let basis = Arc::new(GradedBasis::new(degrees, labels).expect("consistent lengths"));
        CochainIndex { keys, basis }
    }

    pub fn dim(&self) -> usize {
        self.keys.len()
    }

    pub fn position(&self, key: &CochKey) -> Option<usize> {
        self.keys.binary_search(key).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{standard_simplex, triangulated_circle};
    use crate::scalar::Rat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cochain(
        complex: &Arc<SimplicialComplex>,
        l: usize,
        degree: usize,
        rng: &mut ChaCha8Rng,
    ) -> Cochain<Rat> {
        let mut vect = Vect::zero();
        for idx in 0..complex.num_simplices(degree) {
            for r in 0..l {
                for c in 0..l {
                    let num = rng.gen_range(-4i64..=4);
                    if num != 0 {
                        vect.add_term(
                            CochKey {
                                dim: degree as u16,
                                idx: idx as u32,
                                row: r as u8,
                                col: c as u8,
                            },
                            Rat::from_ratio(num, rng.gen_range(1i64..=3)),
                        );
                    }
                }
            }
        }
        Cochain::from_vect(complex.clone(), l, degree, vect).unwrap()
    }

    #[test]
    fn vertex_indicator_coboundary_on_interval() {
        let k = standard_simplex(1);
        // Vertex 0 indicator: edge (0,1) gets sign -1 since ∂(0,1) = (1) - (0).
        let c = Cochain::<Rat>::indicator(k, 1, 0, 0, 0, 0);
        let d = c.coboundary();
        assert_eq!(d.entry(0, 0, 0), Rat::from_i64(-1));
    }

    #[test]
    fn constant_cochain_is_closed() {
        let k = standard_simplex(2);
        let id = vec![
            vec![Rat::from_i64(1), Rat::from_i64(0)],
            vec![Rat::from_i64(0), Rat::from_i64(1)],
        ];
        let c = Cochain::constant_matrix(k, 2, 0, &id);
        assert!(c.coboundary().is_zero());
    }

    #[test]
    fn coboundary_squares_to_zero_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for complex in [standard_simplex(2), standard_simplex(3), triangulated_circle()] {
            for degree in 0..complex.dim() {
                let c = random_cochain(&complex, 2, degree, &mut rng);
                assert!(c.coboundary().coboundary().is_zero());
            }
        }
    }

    #[test]
    fn cup_unit_acts_as_identity() {
        let k = standard_simplex(2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let one = Cochain::constant_matrix(
            k.clone(),
            2,
            0,
            &[
                vec![Rat::from_i64(1), Rat::from_i64(0)],
                vec![Rat::from_i64(0), Rat::from_i64(1)],
            ],
        );
        for degree in 0..=2 {
            let c = random_cochain(&k, 2, degree, &mut rng);
            let left = one.cup(&c).unwrap();
            let right = c.cup(&one).unwrap();
            assert!(left.vect() == c.vect() && right.vect() == c.vect());
        }
    }

    #[test]
    fn cup_of_zero_cochains_is_pointwise_product() {
        let k = standard_simplex(2);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = random_cochain(&k, 2, 0, &mut rng);
        let b = random_cochain(&k, 2, 0, &mut rng);
        let ab = a.cup(&b).unwrap();
        for idx in 0..k.num_simplices(0) {
            let ma = a.value_matrix(idx);
            let mb = b.value_matrix(idx);
            for r in 0..2 {
                for c in 0..2 {
                    let mut acc = Rat::from_i64(0);
                    for m in 0..2 {
                        acc = acc + ma[r][m].clone() * mb[m][c].clone();
                    }
                    assert_eq!(ab.entry(idx, r, c), acc);
                }
            }
        }
    }

    #[test]
    fn cup_front_face_formula_on_interval() {
        let k = standard_simplex(1);
        // a a 0-cochain, b a 1-cochain: (a ∪ b)(0,1) = a(0) · b(0,1).
        let a = Cochain::<Rat>::indicator(k.clone(), 1, 0, 0, 0, 0).scale(&Rat::from_i64(3));
        let b = Cochain::<Rat>::indicator(k.clone(), 1, 1, 0, 0, 0).scale(&Rat::from_i64(5));
        let ab = a.cup(&b).unwrap();
        assert_eq!(ab.entry(0, 0, 0), Rat::from_i64(15));
        // and with a supported on vertex 1 instead, the front face misses it
        let a2 = Cochain::<Rat>::indicator(k.clone(), 1, 0, 1, 0, 0);
        assert!(a2.cup(&b).unwrap().is_zero());
    }

    #[test]
    fn cup_is_associative_and_leibniz_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for complex in [standard_simplex(2), standard_simplex(3)] {
            let a = random_cochain(&complex, 2, 0, &mut rng);
            let b = random_cochain(&complex, 2, 1, &mut rng);
            let c = random_cochain(&complex, 2, 0, &mut rng);
            let lhs = a.cup(&b).unwrap().cup(&c).unwrap();
            let rhs = a.cup(&b.cup(&c).unwrap()).unwrap();
            assert!(lhs.vect() == rhs.vect(), "cup associativity");

            // graded Leibniz: δ(a∪b) = δa∪b + (-1)^{|a|} a∪δb
            let lhs = a.cup(&b).unwrap().coboundary();
            let rhs = a
                .coboundary()
                .cup(&b)
                .unwrap()
                .add(&a.cup(&b.coboundary()).unwrap())
                .unwrap();
            assert!(lhs.vect() == rhs.vect(), "cup Leibniz, even a");

            let lhs = b.cup(&c).unwrap().coboundary();
            let rhs = b
                .coboundary()
                .cup(&c)
                .unwrap()
                .add(&b.cup(&c.coboundary()).unwrap().scale(&Rat::from_i64(-1)))
                .unwrap();
            assert!(lhs.vect() == rhs.vect(), "cup Leibniz, odd b");
        }
    }

    #[test]
    fn cochain_index_is_sorted_and_graded() {
        let k = standard_simplex(2);
        let ix = CochainIndex::new(&k, 2);
        assert_eq!(ix.dim(), 7 * 4);
        for (i, key) in ix.keys.iter().enumerate() {
            assert_eq!(ix.position(key), Some(i));
            assert_eq!(ix.basis.degree(i), key.degree());
        }
    }
}

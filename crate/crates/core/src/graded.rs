//! Graded bases, sparse graded maps, Koszul tensor products and norm bounds.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{bump_up, Coeff};

/// A finite basis of a graded vector space: one integer degree and one opaque
/// label per basis element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedBasis {
    degrees: Vec<i64>,
    labels: Vec<String>,
}

impl GradedBasis {
    pub fn new(degrees: Vec<i64>, labels: Vec<String>) -> Result<Self> {
        if degrees.len() != labels.len() {
            return Err(Error::structure("degrees and labels must have equal length"));
        }
        Ok(GradedBasis { degrees, labels })
    }

    pub fn from_degrees(degrees: Vec<i64>) -> Self {
        let labels = degrees.iter().enumerate().map(|(i, d)| format!("e{i}[{d}]")).collect();
        GradedBasis { degrees, labels }
    }

    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn degree(&self, i: usize) -> i64 {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[i64] {
        &self.degrees
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    /// Basis of the suspension: same labels, every degree shifted down by one.
    pub fn suspend(&self) -> GradedBasis {
        GradedBasis {
            degrees: self.degrees.iter().map(|d| d - 1).collect(),
            labels: self.labels.iter().map(|l| format!("s{l}")).collect(),
        }
    }

    /// Tensor product basis, row-major index order.
    pub fn tensor(factors: &[&GradedBasis]) -> GradedBasis {
        assert!(!factors.is_empty());
        let mut degrees = vec![0i64];
        let mut labels = vec![String::new()];
        for f in factors {
            let mut nd = Vec::with_capacity(degrees.len() * f.dim());
            let mut nl = Vec::with_capacity(degrees.len() * f.dim());
            for (d, l) in degrees.iter().zip(&labels) {
                for j in 0..f.dim() {
                    nd.push(d + f.degree(j));
                    let lj = f.label(j);
                    nl.push(if l.is_empty() { lj.to_string() } else { format!("{l}(x){lj}") });
                }
            }
            degrees = nd;
            labels = nl;
        }
        GradedBasis { degrees, labels }
    }
}

/// Sparse graded linear map of a fixed degree between two finite bases.
///
/// Every stored entry connects basis elements whose degrees differ by exactly
/// the map degree; ill-graded insertions are structural errors.
#[derive(Debug, Clone)]
pub struct GradedMap<K: Coeff> {
    source: Arc<GradedBasis>,
    target: Arc<GradedBasis>,
    degree: i64,
    entries: BTreeMap<(usize, usize), K>,
}

impl<K: Coeff> GradedMap<K> {
    pub fn zero(source: Arc<GradedBasis>, target: Arc<GradedBasis>, degree: i64) -> Self {
        GradedMap { source, target, degree, entries: BTreeMap::new() }
    }

    pub fn identity(basis: Arc<GradedBasis>) -> Self {
        let mut m = GradedMap::zero(basis.clone(), basis, 0);
        for i in 0..m.source.dim() {
            m.entries.insert((i, i), K::one());
        }
        m
    }

    pub fn source(&self) -> &Arc<GradedBasis> {
        &self.source
    }

    pub fn target(&self) -> &Arc<GradedBasis> {
        &self.target
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &K)> {
        self.entries.iter()
    }

    pub fn num_entries(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Add `value` at `(row, col)`, enforcing the grading.
    pub fn add_entry(&mut self, row: usize, col: usize, value: K) -> Result<()> {
        if value.is_zero() {
            return Ok(());
        }
        if row >= self.target.dim() || col >= self.source.dim() {
            return Err(Error::structure("entry index out of basis range"));
        }
        if self.target.degree(row) - self.source.degree(col) != self.degree {
            return Err(Error::Structure(format!(
                "entry ({row},{col}) violates grading: target degree {} - source degree {} != map degree {}",
                self.target.degree(row),
                self.source.degree(col),
                self.degree
            )));
        }
        let slot = self.entries.entry((row, col)).or_insert_with(K::zero);
        slot.add_assign(&value);
        if slot.is_zero() {
            self.entries.remove(&(row, col));
        }
        Ok(())
    }

    pub fn get(&self, row: usize, col: usize) -> K {
        self.entries.get(&(row, col)).cloned().unwrap_or_else(K::zero)
    }

    pub fn scale(&self, c: &K) -> Self {
        let mut out = GradedMap::zero(self.source.clone(), self.target.clone(), self.degree);
        if c.is_zero() {
            return out;
        }
        for ((r, s), v) in &self.entries {
            let w = v.mul(c);
            if !w.is_zero() {
                out.entries.insert((*r, *s), w);
            }
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for v in out.entries.values_mut() {
            *v = v.neg();
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.source != other.source || self.target != other.target || self.degree != other.degree {
            return Err(Error::structure("graded map addition requires equal bases and degree"));
        }
        let mut out = self.clone();
        for ((r, s), v) in &other.entries {
            let slot = out.entries.entry((*r, *s)).or_insert_with(K::zero);
            slot.add_assign(v);
            if slot.is_zero() {
                out.entries.remove(&(*r, *s));
            }
        }
        Ok(out)
    }

    /// Composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if *self.source != *other.target {
            return Err(Error::structure("compose: source of outer map must equal target of inner map"));
        }
        let mut out =
            GradedMap::zero(other.source.clone(), self.target.clone(), self.degree + other.degree);
        // Group inner entries by row so each outer entry is scanned once.
        let mut by_row: BTreeMap<usize, Vec<(usize, &K)>> = BTreeMap::new();
        for ((r, s), v) in &other.entries {
            by_row.entry(*r).or_default().push((*s, v));
        }
        for ((r, mid), v) in &self.entries {
            if let Some(cols) = by_row.get(mid) {
                for (s, w) in cols {
                    let prod = v.mul(w);
                    if prod.is_zero() {
                        continue;
                    }
                    let slot = out.entries.entry((*r, *s)).or_insert_with(K::zero);
                    slot.add_assign(&prod);
                    if slot.is_zero() {
                        out.entries.remove(&(*r, *s));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Apply to a dense coordinate vector over the source basis.
    pub fn apply_dense(&self, v: &[K]) -> Vec<K> {
        assert_eq!(v.len(), self.source.dim());
        let mut out = vec![K::zero(); self.target.dim()];
        for ((r, s), entry) in &self.entries {
            if v[*s].is_zero() {
                continue;
            }
            let prod = entry.mul(&v[*s]);
            out[*r].add_assign(&prod);
        }
        out
    }

    pub fn eq_entries(&self, other: &Self) -> bool {
        self.entries == other.entries
    }

    /// Frobenius norm upper bound, also an upper bound on the l2 operator
    /// norm. Exact entries are converted outward.
    pub fn norm_upper(&self) -> f64 {
        frobenius_upper(self.entries.values().map(|v| v.abs_upper_f64()))
    }

    /// Frobenius bound restricted to columns whose source degree is `d`.
    pub fn block_norm_upper(&self, d: i64) -> f64 {
        frobenius_upper(
            self.entries
                .iter()
                .filter(|((_, s), _)| self.source.degree(*s) == d)
                .map(|(_, v)| v.abs_upper_f64()),
        )
    }
}

/// Upward-rounded Frobenius accumulation of absolute-value upper bounds.
pub fn frobenius_upper(abs_values: impl Iterator<Item = f64>) -> f64 {
    let mut acc = 0.0f64;
    for x in abs_values {
        acc = bump_up(acc + bump_up(x * x));
    }
    bump_up(acc.sqrt())
}

/// Koszul tensor product of graded maps.
///
/// The result acts on the tensor product of the sources; applying it to a
/// basis tensor inserts the sign `(-1)^{deg(f_j) * (deg e_1 + .. + deg e_{j-1})}`
/// for each factor `f_j` moved past the leading arguments.
pub fn koszul_tensor<K: Coeff>(maps: &[&GradedMap<K>]) -> Result<GradedMap<K>> {
    if maps.is_empty() {
        return Err(Error::structure("koszul_tensor: need at least one factor"));
    }
    let src_bases: Vec<&GradedBasis> = maps.iter().map(|m| m.source.as_ref()).collect();
    let dst_bases: Vec<&GradedBasis> = maps.iter().map(|m| m.target.as_ref()).collect();
    let source = Arc::new(GradedBasis::tensor(&src_bases));
    let target = Arc::new(GradedBasis::tensor(&dst_bases));
    let degree: i64 = maps.iter().map(|m| m.degree).sum();
    let mut out = GradedMap::zero(source, target, degree);

    let src_dims: Vec<usize> = maps.iter().map(|m| m.source.dim()).collect();
    let dst_dims: Vec<usize> = maps.iter().map(|m| m.target.dim()).collect();
    let n_cols: usize = src_dims.iter().product();

    for col in 0..n_cols {
        // Decode the mixed-radix column into per-factor source indices.
        let mut rem = col;
        let mut src_idx = vec![0usize; maps.len()];
        for j in (0..maps.len()).rev() {
            src_idx[j] = rem % src_dims[j];
            rem /= src_dims[j];
        }
        // Koszul sign for this column.
        let mut sign_exp: i64 = 0;
        let mut deg_passed: i64 = 0;
        for (j, m) in maps.iter().enumerate() {
            sign_exp += m.degree * deg_passed;
            deg_passed += m.source.degree(src_idx[j]);
        }
        let sign = if sign_exp.rem_euclid(2) == 0 { K::one() } else { K::one().neg() };

        // Expand the product of the per-factor columns.
        let mut terms: Vec<(usize, K)> = vec![(0usize, sign)];
        for (j, m) in maps.iter().enumerate() {
            let mut next: Vec<(usize, K)> = Vec::new();
            for ((r, s), v) in &m.entries {
                if *s != src_idx[j] {
                    continue;
                }
                for (row_acc, coeff) in &terms {
                    next.push((row_acc * dst_dims[j] + r, coeff.mul(v)));
                }
            }
            terms = next;
            if terms.is_empty() {
                break;
            }
        }
        for (row, v) in terms {
            out.add_entry(row, col, v)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rat;
    use proptest::prelude::*;

    fn basis(degs: &[i64]) -> Arc<GradedBasis> {
        Arc::new(GradedBasis::from_degrees(degs.to_vec()))
    }

    fn map_from(entries: &[(usize, usize, i64)], src: &Arc<GradedBasis>, dst: &Arc<GradedBasis>, deg: i64) -> GradedMap<Rat> {
        let mut m = GradedMap::zero(src.clone(), dst.clone(), deg);
        for (r, c, v) in entries {
            m.add_entry(*r, *c, Rat::from_i64(*v)).unwrap();
        }
        m
    }

    #[test]
    fn grading_is_enforced() {
        let b = basis(&[0, 1]);
        let mut m = GradedMap::<Rat>::zero(b.clone(), b.clone(), 1);
        assert!(m.add_entry(1, 0, Rat::from_i64(1)).is_ok());
        assert!(m.add_entry(0, 0, Rat::from_i64(1)).is_err());
    }

    #[test]
    fn compose_identity_and_zero() {
        let b = basis(&[0, 0, 1]);
        let id = GradedMap::<Rat>::identity(b.clone());
        let f = map_from(&[(2, 0, 3), (2, 1, -1)], &b, &b, 1);
        assert!(id.compose(&f).unwrap().eq_entries(&f));
        assert!(f.compose(&id).unwrap().eq_entries(&f));
        let z = GradedMap::<Rat>::zero(b.clone(), b.clone(), 0);
        assert!(f.compose(&z).unwrap().is_zero());
    }

    /// Coboundary of the interval complex: two vertices, one edge.
    /// d(vertex basis) hits the edge with incidence signs -1, +1; d∘d = 0
    /// holds because there is nothing above degree one, and the 3-term
    /// complex of the triangle boundary below gives the nontrivial case.
    #[test]
    fn compose_squares_coboundary_to_zero() {
        // Triangle boundary: vertices 0,1,2 (degree 0), edges 01,02,12 (degree 1),
        // face 012 (degree 2). d0 and d1 with alternating-sign incidence.
        let b = basis(&[0, 0, 0, 1, 1, 1, 2]);
        let mut d = GradedMap::<Rat>::zero(b.clone(), b.clone(), 1);
        // edge 01 = v1 - v0, edge 02 = v2 - v0, edge 12 = v2 - v1
        for (e, (a, bb)) in [(3, (0, 1)), (4, (0, 2)), (5, (1, 2))] {
            d.add_entry(e, bb, Rat::from_i64(1)).unwrap();
            d.add_entry(e, a, Rat::from_i64(-1)).unwrap();
        }
        // face 012: boundary 12 - 02 + 01
        d.add_entry(6, 5, Rat::from_i64(1)).unwrap();
        d.add_entry(6, 4, Rat::from_i64(-1)).unwrap();
        d.add_entry(6, 3, Rat::from_i64(1)).unwrap();
        let dd = d.compose(&d).unwrap();
        assert!(dd.is_zero(), "d∘d must vanish");
    }

    #[test]
    fn koszul_sign_forced_by_rule() {
        // deg f odd, deg a odd: (1 ⊗ f)(a ⊗ b) = -(a ⊗ f(b)).
        let src = basis(&[1, 0]);
        let dst = basis(&[1, 1]);
        let id = GradedMap::<Rat>::identity(src.clone());
        let mut f = GradedMap::zero(src.clone(), dst.clone(), 1);
        f.add_entry(1, 1, Rat::from_i64(1)).unwrap(); // f(e1)=E1, degree one
        let t = koszul_tensor(&[&id, &f]).unwrap();
        // column for a=e0 (deg 1), b=e1 (deg 0): index 0*2+1 = 1
        // expected: -(e0 ⊗ E1): row 0*2+1 = 1
        assert_eq!(t.get(1, 1), Rat::from_i64(-1));
        // (f ⊗ 1)(a ⊗ b): nothing is passed over, no sign.
        let t2 = koszul_tensor(&[&f, &id]).unwrap();
        // column a=e1 (f acts), b=e0: index 1*2+0=2; row E1⊗e0 = 1*2+0=2
        assert_eq!(t2.get(2, 2), Rat::from_i64(1));
    }

    #[test]
    fn norm_bound_examples() {
        let b = basis(&[0, 0]);
        let z = GradedMap::<Rat>::zero(b.clone(), b.clone(), 0);
        assert_eq!(z.norm_upper(), 0.0);
        let id = GradedMap::<Rat>::identity(b.clone());
        assert!(id.norm_upper() >= 1.0);
        let ones = map_from(&[(0, 0, 1), (0, 1, 1), (1, 0, 1), (1, 1, 1)], &b, &b, 0);
        let n = ones.norm_upper();
        assert!(n >= 2.0 && n < 2.0001, "Frobenius of the all-ones 2x2 map is 2, got {n}");
    }

    proptest! {
        #[test]
        fn compose_is_associative(seed in 0u64..500) {
            // Small random maps over a fixed graded basis with entries in -3..3.
            let b = basis(&[0, 0, 1, 1]);
            let mut rng = seed;
            let mut next = || { rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); ((rng >> 33) % 7) as i64 - 3 };
            let mut mk = |deg: i64| {
                let mut m = GradedMap::<Rat>::zero(b.clone(), b.clone(), deg);
                for r in 0..4 {
                    for c in 0..4 {
                        if b.degree(r) - b.degree(c) == deg {
                            let v = next();
                            if v != 0 { m.add_entry(r, c, Rat::from_i64(v)).unwrap(); }
                        }
                    }
                }
                m
            };
            let f = mk(0);
            let g = mk(1);
            let h = mk(0);
            let lhs = f.compose(&g.compose(&h).unwrap()).unwrap();
            let rhs = f.compose(&g).unwrap().compose(&h).unwrap();
            prop_assert!(lhs.eq_entries(&rhs));
        }

        #[test]
        fn koszul_interchange_law(seed in 0u64..200) {
            // (f⊗1)∘(1⊗g) = (-1)^{deg f deg g} (1⊗g)∘(f⊗1)
            let b = basis(&[0, 1]);
            let mut rng = seed.wrapping_add(17);
            let mut next = || { rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); ((rng >> 33) % 5) as i64 - 2 };
            let mut mk = |deg: i64| {
                let mut m = GradedMap::<Rat>::zero(b.clone(), b.clone(), deg);
                for r in 0..2 {
                    for c in 0..2 {
                        if b.degree(r) - b.degree(c) == deg {
                            let v = next();
                            if v != 0 { m.add_entry(r, c, Rat::from_i64(v)).unwrap(); }
                        }
                    }
                }
                m
            };
            for (df, dg) in [(1i64, 1i64), (1, -1), (-1, 1)] {
                let f = mk(df);
                let g = mk(dg);
                let id = GradedMap::<Rat>::identity(b.clone());
                let f1 = koszul_tensor(&[&f, &id]).unwrap();
                let g1 = koszul_tensor(&[&id, &g]).unwrap();
                let lhs = f1.compose(&g1).unwrap();
                let mut rhs = g1.compose(&f1).unwrap();
                if (df * dg).rem_euclid(2) == 1 {
                    rhs = rhs.neg();
                }
                prop_assert!(lhs.eq_entries(&rhs));
            }
        }

        #[test]
        fn norm_bound_submultiplicative(seed in 0u64..200) {
            let b = basis(&[0, 0, 0]);
            let mut rng = seed.wrapping_add(3);
            let mut next = || { rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); ((rng >> 33) % 9) as i64 - 4 };
            let mut mk = || {
                let mut m = GradedMap::<Rat>::zero(b.clone(), b.clone(), 0);
                for r in 0..3 { for c in 0..3 {
                    let v = next();
                    if v != 0 { m.add_entry(r, c, Rat::from_ratio(v, 3)).unwrap(); }
                }}
                m
            };
            let f = mk();
            let g = mk();
            let fg = f.compose(&g).unwrap();
            prop_assert!(fg.norm_upper() <= f.norm_upper() * g.norm_upper() + 1e-9);
        }
    }
}

//! The Whitney map, the de Rham (integration) map and Dupont's homotopy,
//! assembled into a special chain contraction from piecewise polynomial
//! forms to simplicial cochains.
//!
//! Conventions pinned here (the identity suite is the arbiter, any assembly
//! failing it on the standard simplices is rejected):
//!  - Whitney form of σ = (v_0..v_k): k! Σ_j (-1)^j λ_{v_j} dλ_{v_0}∧..ĵ..∧dλ_{v_k};
//!  - homotopy H = -Σ_{σ} ω_σ ∧ κ_{σ_k}∘..∘κ_{σ_0}, summed over all faces σ
//!    of each facet, cone operators applied starting from the smallest vertex.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::cochain::{coboundary_key, CochKey, Cochain, CochainIndex};
use crate::complex::SimplicialComplex;
use crate::error::{Error, Result};
use crate::forms::{
    bubble_generator, d_key, dirichlet_integral, dlambda_oneform, kappa_key, lambda_poly,
    restrict_key_to_face, wedge_oneforms, FormKey, PolyForm,
};
use crate::scalar::{factorial, Coeff, Rat};
use crate::tamper::Tamper;
use crate::vect::{BKey, Vect};

/// Scalar monomial expansion of a Whitney form on one facet.
type ScalarTerms = Vec<(Vec<u16>, u32, Rat)>;

/// The (de Rham, Whitney, Dupont) data bundle on a fixed complex and matrix
/// size. All operators are exact on polynomial data.
pub struct FormContraction {
    complex: Arc<SimplicialComplex>,
    l: usize,
    tamper: Tamper,
    /// Whitney expansions per facet, keyed by the local vertex subset mask.
    whitney_table: Vec<BTreeMap<u32, ScalarTerms>>,
    /// All simplices containing each simplex: (dim, idx) -> facet ids.
    containing_facets: BTreeMap<(usize, usize), Vec<usize>>,
}

impl FormContraction {
    pub fn new(complex: Arc<SimplicialComplex>, l: usize) -> Self {
        Self::with_tamper(complex, l, Tamper::None)
    }

    pub fn with_tamper(complex: Arc<SimplicialComplex>, l: usize, tamper: Tamper) -> Self {
        let mut whitney_table = Vec::with_capacity(complex.num_facets());
        for fid in 0..complex.num_facets() {
            let n = complex.facet_dim(fid);
            let mut table = BTreeMap::new();
            for mask in 1u32..(1 << (n + 1)) {
                let positions: Vec<usize> = (0..=n).filter(|i| mask & (1 << i) != 0).collect();
                table.insert(mask, whitney_scalar_terms(n, &positions));
            }
            whitney_table.push(table);
        }
        let mut containing_facets: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for d in 0..=complex.dim() {
            for idx in 0..complex.num_simplices(d) {
                let tup = complex.simplex(d, idx);
                let mut fids = Vec::new();
                for fid in 0..complex.num_facets() {
                    let ftup = complex.facet_tuple(fid);
                    if tup.iter().all(|v| ftup.contains(v)) {
                        fids.push(fid);
                    }
                }
                containing_facets.insert((d, idx), fids);
            }
        }
        FormContraction { complex, l, tamper, whitney_table, containing_facets }
    }

    pub fn complex(&self) -> &Arc<SimplicialComplex> {
        &self.complex
    }

    pub fn matrix_size(&self) -> usize {
        self.l
    }

    pub fn tamper(&self) -> Tamper {
        self.tamper
    }

    // -- the three maps, key-wise ------------------------------------------

    /// Whitney injection on a cochain basis key.
    pub fn whitney_key<K: Coeff>(&self, key: &CochKey) -> Vect<FormKey, K> {
        let d = key.dim as usize;
        let idx = key.idx as usize;
        let tup = self.complex.simplex(d, idx);
        let mut out = Vect::zero();
        for &fid in &self.containing_facets[&(d, idx)] {
            let ftup = self.complex.facet_tuple(fid);
            let mut mask = 0u32;
            for v in tup {
                let pos = ftup.iter().position(|w| w == v).unwrap();
                mask |= 1 << pos;
            }
            for (exps, wedge, c) in &self.whitney_table[fid][&mask] {
                out.add_term(
                    FormKey {
                        facet: fid as u32,
                        exps: exps.clone(),
                        wedge: *wedge,
                        row: key.row,
                        col: key.col,
                    },
                    K::from_rat(c),
                );
            }
        }
        out
    }

    /// De Rham projection of a form monomial: integrals over all simplices of
    /// the matching dimension carried by the monomial's facet.
    pub fn derham_key<K: Coeff>(&self, key: &FormKey) -> Vect<CochKey, K> {
        let k = key.degree() as usize;
        let mut out = Vect::zero();
        if k > self.complex.dim() {
            return out;
        }
        for idx in 0..self.complex.num_simplices(k) {
            let (carrier, positions) = self.complex.carrier_of(k, idx);
            if carrier != key.facet as usize {
                continue;
            }
            let n = self.complex.facet_dim(carrier);
            let restricted = restrict_key_to_face::<K>(n, positions, key);
            let full: u32 = if k == 0 { 0 } else { (1 << k) - 1 };
            let mut acc = K::zero();
            for (lk, c) in restricted.iter() {
                if lk.wedge != full {
                    continue;
                }
                acc.add_assign(&c.mul(&K::from_rat(&dirichlet_integral(&lk.exps))));
            }
            if !acc.is_zero() {
                out.add_term(
                    CochKey { dim: k as u16, idx: idx as u32, row: key.row, col: key.col },
                    acc,
                );
            }
        }
        out
    }

    /// Dupont homotopy on a form monomial, degree -1.
    ///
    /// H = -Σ_σ (-1)^{dim σ} ω_σ ∧ κ_{σ_k}∘..∘κ_{σ_0} over the faces σ of the
    /// monomial's facet, cones applied from the smallest vertex up. The stage
    /// sign and order are pinned by the identity suite on the 3-simplex; the
    /// other sign/order combinations satisfy the annihilation conditions but
    /// break the homotopy equation there.
    pub fn homotopy_key<K: Coeff>(&self, key: &FormKey) -> Vect<FormKey, K> {
        let k = key.degree();
        let mut out: Vect<FormKey, K> = Vect::zero();
        if k == 0 {
            return self.tampered_homotopy_extra(out, key);
        }
        let fid = key.facet as usize;
        let n = self.complex.facet_dim(fid);
        for mask in 1u32..(1 << (n + 1)) {
            let m = mask.count_ones() as i64;
            // the κ-chain of a (m-1)-dimensional face applies m cone
            // operators; anything longer than the form degree dies
            if m > k {
                continue;
            }
            let positions: Vec<usize> = (0..=n).filter(|i| mask & (1 << i) != 0).collect();
            let stage_negate = (m - 1) % 2 == 1;
            let mut chain = Vect::single(key.clone(), K::one());
            for &v in &positions {
                chain = chain.apply_linear(|kk| kappa_key::<K>(v, kk));
                if chain.is_zero() {
                    break;
                }
            }
            if chain.is_zero() {
                continue;
            }
            if stage_negate {
                chain = chain.neg();
            }
            // wedge the scalar Whitney form of the face on the left
            for (exps, wedge, c) in &self.whitney_table[fid][&mask] {
                let wc = K::from_rat(c);
                for (ck, cv) in chain.iter() {
                    if wedge & ck.wedge != 0 {
                        continue;
                    }
                    let mut inv = 0u32;
                    for i in 0..32 {
                        if ck.wedge & (1 << i) != 0 {
                            inv += (wedge >> (i + 1)).count_ones();
                        }
                    }
                    let mut v = wc.mul(cv);
                    if inv % 2 == 1 {
                        v = v.neg();
                    }
                    let e: Vec<u16> = exps.iter().zip(&ck.exps).map(|(a, b)| a + b).collect();
                    out.add_term(
                        FormKey {
                            facet: key.facet,
                            exps: e,
                            wedge: wedge | ck.wedge,
                            row: ck.row,
                            col: ck.col,
                        },
                        v.neg(),
                    );
                }
            }
        }
        if self.tamper == Tamper::HomotopyScale {
            out = out.scale(&K::from_i64(2));
        }
        self.tampered_homotopy_extra(out, key)
    }

    /// The drop-annihilation tamper adds i∘shift∘p with a degree -1 shift on
    /// cochains, which breaks H∘i = 0 while keeping degrees consistent.
    fn tampered_homotopy_extra<K: Coeff>(
        &self,
        mut out: Vect<FormKey, K>,
        key: &FormKey,
    ) -> Vect<FormKey, K> {
        if self.tamper != Tamper::DropAnnihilation {
            return out;
        }
        let p = self.derham_key::<K>(key);
        let shifted = p.apply_linear(|ck| {
            let mut v = Vect::zero();
            if ck.dim >= 1 {
                if let Some(&(face, _)) = self
                    .complex
                    .faces_of(ck.dim as usize, ck.idx as usize)
                    .first()
                {
                    v.add_term(
                        CochKey { dim: ck.dim - 1, idx: face as u32, row: ck.row, col: ck.col },
                        K::one(),
                    );
                }
            }
            v
        });
        let lifted = shifted.apply_linear(|ck| self.whitney_key::<K>(ck));
        out.add_assign(&lifted);
        out
    }

    // -- vector- and type-level wrappers ------------------------------------

    pub fn whitney_vect<K: Coeff>(&self, v: &Vect<CochKey, K>) -> Vect<FormKey, K> {
        v.apply_linear(|k| self.whitney_key::<K>(k))
    }

    pub fn derham_vect<K: Coeff>(&self, v: &Vect<FormKey, K>) -> Vect<CochKey, K> {
        v.apply_linear(|k| self.derham_key::<K>(k))
    }

    pub fn homotopy_vect<K: Coeff>(&self, v: &Vect<FormKey, K>) -> Vect<FormKey, K> {
        v.apply_linear(|k| self.homotopy_key::<K>(k))
    }

    pub fn d_form_vect<K: Coeff>(&self, v: &Vect<FormKey, K>) -> Vect<FormKey, K> {
        v.apply_linear(|k| d_key::<K>(k))
    }

    pub fn d_coch_vect<K: Coeff>(&self, v: &Vect<CochKey, K>) -> Vect<CochKey, K> {
        v.apply_linear(|k| coboundary_key::<K>(&self.complex, k))
    }

    /// Whitney map on a cochain.
    pub fn whitney_map<K: Coeff>(&self, c: &Cochain<K>) -> Result<PolyForm<K>> {
        if c.matrix_size() != self.l {
            return Err(Error::structure("whitney map: matrix size mismatch"));
        }
        PolyForm::new(
            self.complex.clone(),
            self.l,
            c.degree(),
            self.whitney_vect(c.vect()),
        )
    }

    /// De Rham map on a form.
    pub fn derham_map<K: Coeff>(&self, form: &PolyForm<K>) -> Result<Cochain<K>> {
        if form.matrix_size() != self.l {
            return Err(Error::structure("derham map: matrix size mismatch"));
        }
        Cochain::from_vect(
            self.complex.clone(),
            self.l,
            form.degree(),
            self.derham_vect(form.vect()),
        )
    }

    /// Dupont homotopy on a form, degree -1.
    pub fn dupont_homotopy<K: Coeff>(&self, form: &PolyForm<K>) -> Result<PolyForm<K>> {
        if form.degree() == 0 {
            return Ok(PolyForm::zero(self.complex.clone(), self.l, 0));
        }
        PolyForm::new(
            self.complex.clone(),
            self.l,
            form.degree() - 1,
            self.homotopy_vect(form.vect()),
        )
    }

    // -- certification -------------------------------------------------------

    /// Check the five special-contraction identities on the cochain basis and
    /// a family of test forms. Residuals are exact zeros on the exact backend.
    pub fn certify<K: Coeff>(
        &self,
        test_forms: &[Vect<FormKey, K>],
        tolerance: f64,
    ) -> ContractionCertificate {
        let mut residuals: BTreeMap<String, f64> = BTreeMap::new();
        let mut worst = |name: &str, value: f64| {
            let slot = residuals.entry(name.to_string()).or_insert(0.0);
            if value > *slot {
                *slot = value;
            }
        };

        let index = CochainIndex::new(&self.complex, self.l);
        for key in &index.keys {
            let unit = Vect::single(key.clone(), K::one());
            // p i = 1
            let pi = self.derham_vect(&self.whitney_key::<K>(key));
            worst("projection-of-injection-is-identity", pi.sub(&unit).norm_upper());
            // H i = 0
            let hi = self.homotopy_vect(&self.whitney_key::<K>(key));
            worst("homotopy-annihilates-injection", hi.norm_upper());
        }

        for form in test_forms {
            // i p - 1 = d H + H d
            let ip = self.whitney_vect(&self.derham_vect(form));
            let lhs = ip.sub(form);
            let rhs = self
                .d_form_vect(&self.homotopy_vect(form))
                .add(&self.homotopy_vect(&self.d_form_vect(form)));
            worst("homotopy-equation", lhs.sub(&rhs).norm_upper());
            // p H = 0
            worst("projection-annihilates-homotopy", self.derham_vect(&self.homotopy_vect(form)).norm_upper());
            // H H = 0
            worst(
                "homotopy-squares-to-zero",
                self.homotopy_vect(&self.homotopy_vect(form)).norm_upper(),
            );
        }

        let granted = residuals.values().all(|&r| r <= tolerance);
        ContractionCertificate {
            granted,
            tolerance,
            family_size: test_forms.len() + 2 * index.dim(),
            residuals,
        }
    }
}

/// Result of a special-contraction verification run. Failures are data, not
/// errors.
#[derive(Debug, Clone)]
pub struct ContractionCertificate {
    pub granted: bool,
    pub tolerance: f64,
    pub family_size: usize,
    pub residuals: BTreeMap<String, f64>,
}

impl ContractionCertificate {
    pub fn failing(&self) -> Vec<&str> {
        self.residuals
            .iter()
            .filter(|(_, &r)| r > self.tolerance)
            .map(|(n, _)| n.as_str())
            .collect()
    }
}

/// Scalar monomial expansion of the Whitney form of the face at the given
/// local positions of an n-facet: k! Σ_j (-1)^j λ_{p_j} dλ_{p_0}∧..ĵ..∧dλ_{p_k}.
fn whitney_scalar_terms(n: usize, positions: &[usize]) -> ScalarTerms {
    let k = positions.len() - 1;
    let kfact = factorial(k);
    let mut acc: BTreeMap<(Vec<u16>, u32), Rat> = BTreeMap::new();
    for (j, &pj) in positions.iter().enumerate() {
        let lam = lambda_poly::<Rat>(n, pj);
        let oneforms: Vec<Vec<Rat>> = positions
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .map(|(_, &p)| dlambda_oneform::<Rat>(n, p))
            .collect();
        let wedges = wedge_oneforms(&oneforms);
        let sign = if j % 2 == 0 { Rat::from_i64(1) } else { Rat::from_i64(-1) };
        for (mask, wc) in wedges {
            for (e, pc) in &lam {
                let v = sign.clone() * kfact.clone() * wc.clone() * pc.clone();
                if crate::scalar::Coeff::is_zero(&v) {
                    continue;
                }
                let entry = acc.entry((e.clone(), mask)).or_insert_with(|| Rat::from_i64(0));
                *entry = entry.clone() + v;
                if crate::scalar::Coeff::is_zero(entry) {
                    acc.remove(&(e.clone(), mask));
                }
            }
        }
    }
    acc.into_iter().map(|((e, m), c)| (e, m, c)).collect()
}

/// Test family for contraction certification: the full monomial slice on
/// single-facet complexes; Whitney forms, bubbles and Whitney wedges on
/// complexes with several facets.
pub fn certificate_test_family<K: Coeff>(
    complex: &Arc<SimplicialComplex>,
    l: usize,
    max_poly_degree: usize,
) -> Vec<Vect<FormKey, K>> {
    let mut family = Vec::new();
    if complex.num_facets() == 1 {
        let n = complex.facet_dim(0);
        for wedge in 0u32..(1 << n) {
            for exps in exponent_vectors(n, max_poly_degree) {
                for r in 0..l {
                    for c in 0..l {
                        family.push(Vect::single(
                            FormKey { facet: 0, exps: exps.clone(), wedge, row: r as u8, col: c as u8 },
                            K::one(),
                        ));
                    }
                }
            }
        }
        return family;
    }

    let contraction = FormContraction::new(complex.clone(), l);
    let index = CochainIndex::new(complex, l);
    let whitneys: Vec<Vect<FormKey, K>> =
        index.keys.iter().map(|k| contraction.whitney_key::<K>(k)).collect();
    family.extend(whitneys.iter().cloned());
    // pairwise wedges of scalar Whitney forms to populate cross-facet data
    for (i, a) in whitneys.iter().enumerate() {
        for b in whitneys.iter().skip(i) {
            let w = crate::forms::wedge_vects(a, b);
            if !w.is_zero() {
                family.push(w);
            }
        }
    }
    for fid in 0..complex.num_facets() {
        let n = complex.facet_dim(fid);
        for wedge in 0u32..(1 << n) {
            for exps in exponent_vectors(n, max_poly_degree) {
                for r in 0..l {
                    for c in 0..l {
                        family.push(
                            bubble_generator::<K>(complex, l, fid, exps.clone(), wedge, r, c)
                                .into_vect(),
                        );
                    }
                }
            }
        }
    }
    family.retain(|f| !f.is_zero());
    family
}

/// All exponent vectors of length n with total degree at most `max_total`.
pub fn exponent_vectors(n: usize, max_total: usize) -> Vec<Vec<u16>> {
    let mut out = Vec::new();
    let mut current = vec![0u16; n];
    fn rec(out: &mut Vec<Vec<u16>>, current: &mut Vec<u16>, pos: usize, left: usize) {
        if pos == current.len() {
            out.push(current.clone());
            return;
        }
        for e in 0..=left {
            current[pos] = e as u16;
            rec(out, current, pos + 1, left - e);
        }
        current[pos] = 0;
    }
    rec(&mut out, &mut current, 0, max_total);
    out
}

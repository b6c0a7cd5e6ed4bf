//! Matrix-valued piecewise polynomial differential forms.
//!
//! Per facet, a form is a polynomial in the reduced barycentric coordinates
//! λ_1..λ_n (λ_0 = 1 - Σ λ_i and dλ_0 = -Σ dλ_i are eliminated at
//! construction, giving a canonical representation) times a wedge monomial
//! dλ_I and an elementary matrix slot. Components of a global form must agree
//! on shared faces; this is enforced when a [`PolyForm`] is built and kept by
//! the operations.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::complex::SimplicialComplex;
use crate::error::{Error, Result};
use crate::scalar::{factorial, Coeff, Rat};
use crate::vect::{BKey, Vect};

/// Monomial basis key of the piecewise polynomial forms on a complex.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FormKey {
    pub facet: u32,
    /// Exponents of λ_1..λ_n of the facet (reduced coordinates).
    pub exps: Vec<u16>,
    /// Bit i set means the factor dλ_{i+1} is present, in increasing order.
    pub wedge: u32,
    pub row: u8,
    pub col: u8,
}

impl BKey for FormKey {
    fn degree(&self) -> i64 {
        self.wedge.count_ones() as i64
    }
}

impl FormKey {
    pub fn poly_degree(&self) -> usize {
        self.exps.iter().map(|&e| e as usize).sum()
    }

    pub fn scalar(facet: usize, exps: Vec<u16>, wedge: u32) -> Self {
        FormKey { facet: facet as u32, exps, wedge, row: 0, col: 0 }
    }
}

/// Largest polynomial degree appearing in a form vector.
pub fn max_poly_degree<K: Coeff>(v: &Vect<FormKey, K>) -> usize {
    v.keys().map(|k| k.poly_degree()).max().unwrap_or(0)
}

/// Check a polynomial degree cap, used to guard runaway growth in iterated
/// operator pipelines.
pub fn check_degree_cap<K: Coeff>(v: &Vect<FormKey, K>, cap: usize) -> Result<()> {
    let d = max_poly_degree(v);
    if d > cap {
        Err(Error::DegreeCap { degree: d, cap })
    } else {
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// local polynomial helpers (dense in monomial keys, tiny sizes)

/// Polynomial in reduced coordinates: monomial exponent vector -> coefficient.
pub type Poly<K> = BTreeMap<Vec<u16>, K>;

pub fn poly_const<K: Coeff>(n: usize, c: K) -> Poly<K> {
    let mut p = Poly::new();
    if !c.is_zero() {
        p.insert(vec![0; n], c);
    }
    p
}

/// λ_j as a polynomial in reduced coordinates; j = 0 expands to 1 - Σ λ_i.
pub fn lambda_poly<K: Coeff>(n: usize, j: usize) -> Poly<K> {
    let mut p = Poly::new();
    if j == 0 {
        p.insert(vec![0; n], K::one());
        for i in 0..n {
            let mut e = vec![0u16; n];
            e[i] = 1;
            p.insert(e, K::one().neg());
        }
    } else {
        let mut e = vec![0u16; n];
        e[j - 1] = 1;
        p.insert(e, K::one());
    }
    p
}

/// dλ_j as a constant-coefficient one-form in reduced coordinates.
pub fn dlambda_oneform<K: Coeff>(n: usize, j: usize) -> Vec<K> {
    let mut v = vec![K::zero(); n];
    if j == 0 {
        for x in v.iter_mut() {
            *x = K::one().neg();
        }
    } else {
        v[j - 1] = K::one();
    }
    v
}

pub fn poly_insert_add<K: Coeff>(p: &mut Poly<K>, e: Vec<u16>, c: K) {
    if c.is_zero() {
        return;
    }
    match p.entry(e) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            o.get_mut().add_assign(&c);
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

pub fn poly_mul<K: Coeff>(a: &Poly<K>, b: &Poly<K>) -> Poly<K> {
    let mut out = Poly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u16> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            poly_insert_add(&mut out, e, ca.mul(cb));
        }
    }
    out
}

pub fn poly_pow<K: Coeff>(a: &Poly<K>, k: usize, n: usize) -> Poly<K> {
    let mut out = poly_const(n, K::one());
    for _ in 0..k {
        out = poly_mul(&out, a);
    }
    out
}

/// Wedge a list of constant one-forms into a map bitmask -> coefficient.
pub fn wedge_oneforms<K: Coeff>(oneforms: &[Vec<K>]) -> BTreeMap<u32, K> {
    let mut acc: BTreeMap<u32, K> = BTreeMap::new();
    acc.insert(0, K::one());
    for of in oneforms {
        let mut next: BTreeMap<u32, K> = BTreeMap::new();
        for (mask, coeff) in &acc {
            for (i, c) in of.iter().enumerate() {
                if c.is_zero() || mask & (1 << i) != 0 {
                    continue;
                }
                // appending dλ_{i+1} to a sorted wedge monomial costs one
                // sign per factor already present above position i
                let above = (mask >> (i + 1)).count_ones();
                let mut v = coeff.mul(c);
                if above % 2 == 1 {
                    v = v.neg();
                }
                let m2 = mask | (1 << i);
                match next.entry(m2) {
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(v);
                    }
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        e.get_mut().add_assign(&v);
                        if e.get().is_zero() {
                            e.remove();
                        }
                    }
                }
            }
        }
        acc = next;
        if acc.is_empty() {
            break;
        }
    }
    acc
}

/// Substitute an affine change of coordinates into a monomial form.
///
/// `polys[j-1]` and `oneforms[j-1]` give the images of λ_j and dλ_j of the
/// source frame as polynomial/constant-one-form data in the target frame
/// (with `out_n` reduced coordinates).
pub fn substitute_mono<K: Coeff>(
    exps: &[u16],
    wedge: u32,
    polys: &[Poly<K>],
    oneforms: &[Vec<K>],
    out_n: usize,
) -> Vec<(Vec<u16>, u32, K)> {
    let mut coeff = poly_const(out_n, K::one());
    for (j, &e) in exps.iter().enumerate() {
        if e == 0 {
            continue;
        }
        let p = poly_pow(&polys[j], e as usize, out_n);
        if p.is_empty() {
            return Vec::new();
        }
        coeff = poly_mul(&coeff, &p);
        if coeff.is_empty() {
            return Vec::new();
        }
    }
    let chosen: Vec<Vec<K>> = (0..32)
        .filter(|i| wedge & (1 << i) != 0)
        .map(|i| oneforms[i as usize].clone())
        .collect();
    let wedges = wedge_oneforms(&chosen);
    let mut out = Vec::new();
    for (mask, wc) in wedges {
        for (e, pc) in &coeff {
            let v = pc.mul(&wc);
            if !v.is_zero() {
                out.push((e.clone(), mask, v));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// key-wise calculus operators

/// Exterior derivative of a monomial: d(λ^a dλ_W) = Σ_j a_j λ^{a-e_j} dλ_j∧dλ_W.
pub fn d_key<K: Coeff>(key: &FormKey) -> Vect<FormKey, K> {
    let mut out = Vect::zero();
    for (j, &e) in key.exps.iter().enumerate() {
        if e == 0 || key.wedge & (1 << j) != 0 {
            continue;
        }
        // dλ_j lands in front of dλ_W; sorting it in passes the factors below j
        let below = (key.wedge & ((1u32 << j) - 1)).count_ones();
        let mut c = K::from_i64(e as i64);
        if below % 2 == 1 {
            c = c.neg();
        }
        let mut exps = key.exps.clone();
        exps[j] -= 1;
        out.add_term(
            FormKey {
                facet: key.facet,
                exps,
                wedge: key.wedge | (1 << j),
                row: key.row,
                col: key.col,
            },
            c,
        );
    }
    out
}

/// Wedge of two monomials on the same facet (zero across facets), with the
/// graded sign from interleaving the dλ factors and matrix multiplication of
/// the elementary matrix slots.
pub fn wedge_keys<K: Coeff>(a: &FormKey, b: &FormKey) -> Option<(FormKey, K)> {
    if a.facet != b.facet || a.col != b.row {
        return None;
    }
    if a.wedge & b.wedge != 0 {
        return None;
    }
    let mut inv = 0u32;
    for i in 0..32 {
        if b.wedge & (1 << i) != 0 {
            inv += (a.wedge >> (i + 1)).count_ones();
        }
    }
    let exps: Vec<u16> = a.exps.iter().zip(&b.exps).map(|(x, y)| x + y).collect();
    let sign = if inv % 2 == 0 { K::one() } else { K::one().neg() };
    Some((
        FormKey { facet: a.facet, exps, wedge: a.wedge | b.wedge, row: a.row, col: b.col },
        sign,
    ))
}

pub fn wedge_vects<K: Coeff>(a: &Vect<FormKey, K>, b: &Vect<FormKey, K>) -> Vect<FormKey, K> {
    let mut out = Vect::zero();
    for (ka, va) in a.iter() {
        for (kb, vb) in b.iter() {
            if let Some((key, sign)) = wedge_keys::<K>(ka, kb) {
                out.add_term(key, va.mul(vb).mul(&sign));
            }
        }
    }
    out
}

/// Cone (Poincaré) contraction toward the local vertex `v` of the key's
/// facet: `(κ_v ω)(x) = ∫_0^1 t^{k-1} ι_{x-v} ω(v + t(x-v)) dt`, evaluated
/// exactly on polynomial data. Degree -1; zero on 0-forms.
pub fn kappa_key<K: Coeff>(v: usize, key: &FormKey) -> Vect<FormKey, K> {
    let k = key.wedge.count_ones() as usize;
    let mut out = Vect::zero();
    if k == 0 {
        return out;
    }
    let av = if v >= 1 { key.exps[v - 1] as usize } else { 0 };
    let a_rest: usize = key
        .exps
        .iter()
        .enumerate()
        .filter(|(j, _)| v == 0 || *j != v - 1)
        .map(|(_, &e)| e as usize)
        .sum();

    let ws: Vec<usize> = (0..32).filter(|i| key.wedge & (1 << i) != 0).collect();

    for m in 0..=av {
        // C(av, m) ∫_0^1 t^{k-1+a_rest+m} (1-t)^{av-m} dt
        let tpow = k - 1 + a_rest + m;
        let upow = av - m;
        let beta = factorial(tpow) * factorial(upow) / factorial(tpow + upow + 1);
        let coeff_rat = Rat::from_integer(crate::scalar::binomial(av, m)) * beta;
        let base_coeff = K::from_rat(&coeff_rat);
        if base_coeff.is_zero() {
            continue;
        }
        let mut exps = key.exps.clone();
        if v >= 1 {
            exps[v - 1] = m as u16;
        }
        for (pos, &wi) in ws.iter().enumerate() {
            let rest_wedge = key.wedge & !(1u32 << wi);
            let mut c = base_coeff.clone();
            if pos % 2 == 1 {
                c = c.neg();
            }
            // factor (λ_w - [w == v]) with w the vertex wi+1
            let mut e_up = exps.clone();
            e_up[wi] += 1;
            out.add_term(
                FormKey {
                    facet: key.facet,
                    exps: e_up,
                    wedge: rest_wedge,
                    row: key.row,
                    col: key.col,
                },
                c.clone(),
            );
            if v >= 1 && wi == v - 1 {
                out.add_term(
                    FormKey {
                        facet: key.facet,
                        exps: exps.clone(),
                        wedge: rest_wedge,
                        row: key.row,
                        col: key.col,
                    },
                    c.neg(),
                );
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// restriction to faces

/// Key of a form expressed in the intrinsic frame of a single face.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct LocalKey {
    pub exps: Vec<u16>,
    pub wedge: u32,
    pub row: u8,
    pub col: u8,
}

impl BKey for LocalKey {
    fn degree(&self) -> i64 {
        self.wedge.count_ones() as i64
    }
}

/// Restrict one facet-monomial to a face of the facet, given the local
/// positions of the face vertices inside the facet tuple (increasing).
pub fn restrict_key_to_face<K: Coeff>(
    facet_dim: usize,
    positions: &[usize],
    key: &FormKey,
) -> Vect<LocalKey, K> {
    let k = positions.len() - 1;
    let mut polys: Vec<Poly<K>> = Vec::with_capacity(facet_dim);
    let mut oneforms: Vec<Vec<K>> = Vec::with_capacity(facet_dim);
    for j in 1..=facet_dim {
        if let Some(i) = positions.iter().position(|&p| p == j) {
            polys.push(lambda_poly(k, i));
            oneforms.push(dlambda_oneform(k, i));
        } else {
            polys.push(Poly::new());
            oneforms.push(vec![K::zero(); k]);
        }
    }
    let terms = substitute_mono(&key.exps, key.wedge, &polys, &oneforms, k);
    Vect::from_terms(
        terms
            .into_iter()
            .map(|(exps, wedge, c)| (LocalKey { exps, wedge, row: key.row, col: key.col }, c)),
    )
}

/// Restriction of one facet's component to a face.
pub fn restrict_component_to_face<K: Coeff>(
    complex: &SimplicialComplex,
    fid: usize,
    positions: &[usize],
    vect: &Vect<FormKey, K>,
) -> Vect<LocalKey, K> {
    let n = complex.facet_dim(fid);
    let mut out = Vect::zero();
    for (key, c) in vect.iter() {
        if key.facet as usize != fid {
            continue;
        }
        let r = restrict_key_to_face::<K>(n, positions, key);
        for (lk, v) in r.iter() {
            out.add_term(lk.clone(), v.mul(c));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// exact integration

/// Dirichlet integral of a reduced monomial over the standard k-simplex with
/// Lebesgue measure: ∫ μ^a dμ = (Π a_i!) / (k + |a|)!.
pub fn dirichlet_integral(exps: &[u16]) -> Rat {
    let k = exps.len();
    let total: usize = exps.iter().map(|&e| e as usize).sum();
    let mut num = Rat::from_i64(1);
    for &e in exps {
        num = num * factorial(e as usize);
    }
    num / factorial(k + total)
}

/// Exact integral of the barycentric monomial λ_0^{a_0}..λ_n^{a_n} over a
/// simplex against the metric volume: vol(σ) · n! · (Π a_i!) / (|a| + n)!.
pub fn simplex_monomial_integral<K: Coeff>(
    complex: &SimplicialComplex,
    dim: usize,
    idx: usize,
    exps_unreduced: &[usize],
) -> Result<K> {
    if exps_unreduced.len() != dim + 1 {
        return Err(Error::structure("exponent vector length must be dim+1"));
    }
    let vol: K = complex.simplex_volume(dim, idx)?;
    let total: usize = exps_unreduced.iter().sum();
    let mut coeff = factorial(dim);
    for &a in exps_unreduced {
        coeff = coeff * factorial(a);
    }
    coeff = coeff / factorial(total + dim);
    Ok(vol.mul(&K::from_rat(&coeff)))
}

// ---------------------------------------------------------------------------
// inner products

/// Pointwise Gram pairing of two wedge monomials dλ_I, dλ_J on a facet:
/// the determinant of the corresponding minor of the inverse edge Gram.
fn wedge_gram<K: Coeff>(complex: &SimplicialComplex, fid: usize, wi: u32, wj: u32) -> K {
    let rows: Vec<usize> = (0..32).filter(|i| wi & (1 << i) != 0).collect();
    let cols: Vec<usize> = (0..32).filter(|i| wj & (1 << i) != 0).collect();
    debug_assert_eq!(rows.len(), cols.len());
    if rows.is_empty() {
        return K::one();
    }
    let g = &complex.facet_geometry(fid).gram_inv;
    let minor: Vec<Vec<Rat>> =
        rows.iter().map(|&r| cols.iter().map(|&c| g[r][c].clone()).collect()).collect();
    K::from_rat(&crate::exact_mat::det(&minor))
}

/// Which matrix pairing a bilinear form on matrix slots uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixPairing {
    /// Tr(AB): the gauge-invariant pairing of the action functional.
    /// Symmetric and nondegenerate, indefinite for l >= 2.
    Trace,
    /// Tr(AᵀB): positive definite; used for norms and the admission gate.
    Frobenius,
}

/// L² pairing Σ_T ∫_T tr-pairing(ω1, ω2) dvol with the pointwise form metric
/// induced by the vertex coordinates.
pub fn form_pairing<K: Coeff>(
    complex: &SimplicialComplex,
    a: &Vect<FormKey, K>,
    b: &Vect<FormKey, K>,
    pairing: MatrixPairing,
) -> Result<K> {
    let mut acc = K::zero();
    for (ka, va) in a.iter() {
        for (kb, vb) in b.iter() {
            if ka.facet != kb.facet || ka.degree() != kb.degree() {
                continue;
            }
            let matrix_ok = match pairing {
                MatrixPairing::Trace => ka.col == kb.row && ka.row == kb.col,
                MatrixPairing::Frobenius => ka.row == kb.row && ka.col == kb.col,
            };
            if !matrix_ok {
                continue;
            }
            let fid = ka.facet as usize;
            let n = complex.facet_dim(fid);
            let g = wedge_gram::<K>(complex, fid, ka.wedge, kb.wedge);
            if g.is_zero() {
                continue;
            }
            let mut exps = vec![0usize; n + 1];
            for (j, (x, y)) in ka.exps.iter().zip(&kb.exps).enumerate() {
                exps[j + 1] = (*x + *y) as usize;
            }
            let (fd, fi) = complex.facet(fid);
            let integral: K = simplex_monomial_integral(complex, fd, fi, &exps)?;
            acc.add_assign(&va.mul(vb).mul(&g).mul(&integral));
        }
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// the validated form type

/// A matrix-valued piecewise polynomial differential form of homogeneous
/// degree with face-compatible components.
#[derive(Debug, Clone)]
pub struct PolyForm<K: Coeff> {
    complex: Arc<SimplicialComplex>,
    l: usize,
    degree: usize,
    vect: Vect<FormKey, K>,
}

impl<K: Coeff> PolyForm<K> {
    pub fn zero(complex: Arc<SimplicialComplex>, l: usize, degree: usize) -> Self {
        PolyForm { complex, l, degree, vect: Vect::zero() }
    }

    /// Build and validate: key sanity, homogeneous degree, face compatibility.
    pub fn new(
        complex: Arc<SimplicialComplex>,
        l: usize,
        degree: usize,
        vect: Vect<FormKey, K>,
    ) -> Result<Self> {
        for key in vect.keys() {
            let fid = key.facet as usize;
            if fid >= complex.num_facets() {
                return Err(Error::structure("form key references unknown facet"));
            }
            let n = complex.facet_dim(fid);
            if key.exps.len() != n {
                return Err(Error::structure("form key exponent vector has wrong length"));
            }
            if n < 32 && key.wedge >> n != 0 {
                return Err(Error::structure("form key wedge mask out of range"));
            }
            if key.row as usize >= l || key.col as usize >= l {
                return Err(Error::structure("form key matrix slot out of range"));
            }
            if key.degree() != degree as i64 {
                return Err(Error::structure("form is not homogeneous of the stated degree"));
            }
        }
        let form = PolyForm { complex, l, degree, vect };
        form.check_compatibility()?;
        Ok(form)
    }

    /// Identity-matrix constant 0-form, the unit of the wedge algebra.
    pub fn one(complex: Arc<SimplicialComplex>, l: usize) -> Self {
        let mut vect = Vect::zero();
        for fid in 0..complex.num_facets() {
            let n = complex.facet_dim(fid);
            for r in 0..l {
                vect.add_term(
                    FormKey {
                        facet: fid as u32,
                        exps: vec![0; n],
                        wedge: 0,
                        row: r as u8,
                        col: r as u8,
                    },
                    K::one(),
                );
            }
        }
        PolyForm { complex, l, degree: 0, vect }
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

    pub fn vect(&self) -> &Vect<FormKey, K> {
        &self.vect
    }

    pub fn into_vect(self) -> Vect<FormKey, K> {
        self.vect
    }

    pub fn is_zero(&self) -> bool {
        self.vect.is_zero()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.degree != other.degree || self.l != other.l {
            return Err(Error::structure("form addition: degree or matrix size mismatch"));
        }
        Ok(PolyForm {
            complex: self.complex.clone(),
            l: self.l,
            degree: self.degree,
            vect: self.vect.add(&other.vect),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        PolyForm {
            complex: self.complex.clone(),
            l: self.l,
            degree: self.degree,
            vect: self.vect.neg(),
        }
    }

    pub fn scale(&self, c: &K) -> Self {
        PolyForm {
            complex: self.complex.clone(),
            l: self.l,
            degree: self.degree,
            vect: self.vect.scale(c),
        }
    }

    /// Exterior derivative, degree +1.
    pub fn exterior_derivative(&self) -> Self {
        let vect = self.vect.apply_linear(|k| d_key::<K>(k));
        let out =
            PolyForm { complex: self.complex.clone(), l: self.l, degree: self.degree + 1, vect };
        debug_assert!(!K::EXACT || out.check_compatibility().is_ok());
        out
    }

    /// Wedge product with matrix multiplication of coefficients.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if !Arc::ptr_eq(&self.complex, &other.complex) || self.l != other.l {
            return Err(Error::structure("wedge: complex or matrix size mismatch"));
        }
        let vect = wedge_vects(&self.vect, &other.vect);
        let out = PolyForm {
            complex: self.complex.clone(),
            l: self.l,
            degree: self.degree + other.degree,
            vect,
        };
        debug_assert!(!K::EXACT || out.check_compatibility().is_ok());
        Ok(out)
    }

    /// L² trace pairing (see [`MatrixPairing::Trace`]).
    pub fn inner_product(&self, other: &Self) -> Result<K> {
        if self.degree != other.degree || self.l != other.l {
            return Err(Error::structure("inner product: degree or matrix size mismatch"));
        }
        form_pairing(&self.complex, &self.vect, &other.vect, MatrixPairing::Trace)
    }

    /// Positive-definite L² Frobenius pairing, used for the admission gate.
    pub fn frobenius_pairing(&self, other: &Self) -> Result<K> {
        if self.degree != other.degree || self.l != other.l {
            return Err(Error::structure("inner product: degree or matrix size mismatch"));
        }
        form_pairing(&self.complex, &self.vect, &other.vect, MatrixPairing::Frobenius)
    }

    /// Verify that components agree on every shared face.
    pub fn check_compatibility(&self) -> Result<()> {
        let complex = &self.complex;
        for fa in 0..complex.num_facets() {
            for fb in (fa + 1)..complex.num_facets() {
                let ta = complex.facet_tuple(fa);
                let tb = complex.facet_tuple(fb);
                let shared: Vec<usize> = ta.iter().filter(|v| tb.contains(v)).copied().collect();
                if shared.is_empty() {
                    continue;
                }
                let pos_a: Vec<usize> =
                    shared.iter().map(|v| ta.iter().position(|w| w == v).unwrap()).collect();
                let pos_b: Vec<usize> =
                    shared.iter().map(|v| tb.iter().position(|w| w == v).unwrap()).collect();
                let ra = restrict_component_to_face(complex, fa, &pos_a, &self.vect);
                let rb = restrict_component_to_face(complex, fb, &pos_b, &self.vect);
                if ra != rb {
                    return Err(Error::Structure(format!(
                        "components of facets {fa} and {fb} disagree on their shared face"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Pull the form back along a chain of barycentric subdivision maps.
    pub fn pullback(
        &self,
        target: &Arc<SimplicialComplex>,
        maps: &[crate::complex::SubdivisionMap],
    ) -> Result<Self> {
        let mut vect = self.vect.clone();
        for map in maps {
            let mut next: Vect<FormKey, K> = Vect::zero();
            for (new_fid, chart) in map.charts.iter().enumerate() {
                let n = chart.values.len() - 1;
                let mut polys: Vec<Poly<K>> = Vec::with_capacity(n);
                let mut oneforms: Vec<Vec<K>> = Vec::with_capacity(n);
                for j in 1..=n {
                    let vals = &chart.values[j];
                    // c0·(1-Σμ) + Σ c_i μ_i as an affine polynomial
                    let c0 = K::from_rat(&vals[0]);
                    let mut p = Poly::new();
                    if !c0.is_zero() {
                        p.insert(vec![0u16; n], c0.clone());
                    }
                    let mut of = vec![K::zero(); n];
                    for i in 1..=n {
                        let delta = K::from_rat(&vals[i]).sub(&c0);
                        if !delta.is_zero() {
                            let mut e = vec![0u16; n];
                            e[i - 1] = 1;
                            poly_insert_add(&mut p, e, delta.clone());
                            of[i - 1] = delta;
                        }
                    }
                    polys.push(p);
                    oneforms.push(of);
                }
                for (key, c) in vect.iter() {
                    if key.facet as usize != chart.parent {
                        continue;
                    }
                    for (exps, wedge, v) in
                        substitute_mono(&key.exps, key.wedge, &polys, &oneforms, n)
                    {
                        next.add_term(
                            FormKey {
                                facet: new_fid as u32,
                                exps,
                                wedge,
                                row: key.row,
                                col: key.col,
                            },
                            v.mul(c),
                        );
                    }
                }
            }
            vect = next;
        }
        PolyForm::new(target.clone(), self.l, self.degree, vect)
    }
}

/// A generator supported on one facet with vanishing trace on all proper
/// faces; its extension by zero is face-compatible. Together with the Whitney
/// forms these span the compatible polynomial slices the identity suites run
/// over.
pub fn bubble_generator<K: Coeff>(
    complex: &Arc<SimplicialComplex>,
    l: usize,
    fid: usize,
    exps: Vec<u16>,
    wedge: u32,
    row: usize,
    col: usize,
) -> PolyForm<K> {
    let n = complex.facet_dim(fid);
    let degree = wedge.count_ones() as usize;
    let mut poly = Poly::new();
    poly.insert(exps, K::one());
    for i in 1..=n {
        if wedge & (1 << (i - 1)) == 0 {
            poly = poly_mul(&poly, &lambda_poly(n, i));
        }
    }
    if degree < n {
        poly = poly_mul(&poly, &lambda_poly(n, 0));
    }
    let mut vect = Vect::zero();
    for (e, c) in poly {
        vect.add_term(
            FormKey { facet: fid as u32, exps: e, wedge, row: row as u8, col: col as u8 },
            c,
        );
    }
    PolyForm::new(complex.clone(), l, degree, vect).expect("bubble generators are compatible")
}

#[cfg(test)]
pub(crate) fn random_scalar_form(
    complex: &Arc<SimplicialComplex>,
    degree: usize,
    max_exp: u16,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> PolyForm<Rat> {
    use rand::Rng;
    if complex.num_facets() == 1 {
        let n = complex.facet_dim(0);
        let mut vect = Vect::zero();
        for _ in 0..4 {
            let exps: Vec<u16> = (0..n).map(|_| rng.gen_range(0..=max_exp)).collect();
            let mut wedge = 0u32;
            let mut chosen = 0;
            for i in 0..n {
                if chosen < degree && rng.gen_bool(0.6) {
                    wedge |= 1 << i;
                    chosen += 1;
                }
            }
            if (wedge.count_ones() as usize) != degree {
                wedge = (1u32 << degree) - 1;
            }
            vect.add_term(
                FormKey::scalar(0, exps, wedge),
                Rat::from_ratio(rng.gen_range(-3i64..=3), 2),
            );
        }
        PolyForm::new(complex.clone(), 1, degree, vect).unwrap()
    } else {
        let mut acc = PolyForm::zero(complex.clone(), 1, degree);
        for fid in 0..complex.num_facets() {
            let n = complex.facet_dim(fid);
            if degree > n {
                continue;
            }
            let wedge = (1u32 << degree) - 1;
            let exps: Vec<u16> = (0..n).map(|_| rng.gen_range(0..=max_exp)).collect();
            let b = bubble_generator::<Rat>(complex, 1, fid, exps, wedge, 0, 0)
                .scale(&Rat::from_ratio(rng.gen_range(-3i64..=3), 2));
            acc = acc.add(&b).unwrap();
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{standard_simplex, triangulated_circle};
    use crate::scalar::Rat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn key(facet: usize, exps: Vec<u16>, wedge: u32) -> FormKey {
        FormKey::scalar(facet, exps, wedge)
    }

    fn single_form(complex: &Arc<SimplicialComplex>, exps: Vec<u16>, wedge: u32) -> PolyForm<Rat> {
        let degree = wedge.count_ones() as usize;
        PolyForm::new(complex.clone(), 1, degree, Vect::single(key(0, exps, wedge), Rat::from_i64(1)))
            .unwrap()
    }

    #[test]
    fn d_of_barycentric_coordinate() {
        let k1 = standard_simplex(1);
        let f = single_form(&k1, vec![1], 0);
        let df = f.exterior_derivative();
        assert_eq!(df.vect().coeff(&key(0, vec![0], 1)), Rat::from_i64(1));
        assert_eq!(df.vect().len(), 1);
    }

    #[test]
    fn d_of_constant_is_zero() {
        let k2 = standard_simplex(2);
        let one = PolyForm::<Rat>::one(k2, 2);
        assert!(one.exterior_derivative().is_zero());
    }

    #[test]
    fn d_leibniz_on_monomial() {
        // d(λ_1 dλ_2) = dλ_1 ∧ dλ_2 on the triangle
        let k2 = standard_simplex(2);
        let f = single_form(&k2, vec![1, 0], 0b10);
        let df = f.exterior_derivative();
        assert_eq!(df.vect().coeff(&key(0, vec![0, 0], 0b11)), Rat::from_i64(1));
        assert_eq!(df.vect().len(), 1);
    }

    #[test]
    fn d_squares_to_zero_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=3 {
            let k = standard_simplex(n);
            for degree in 0..n {
                let f = random_scalar_form(&k, degree, 3, &mut rng);
                assert!(f.exterior_derivative().exterior_derivative().is_zero());
            }
        }
    }

    #[test]
    fn wedge_is_unital_and_alternating() {
        let k2 = standard_simplex(2);
        let one = PolyForm::<Rat>::one(k2.clone(), 1);
        let f = single_form(&k2, vec![2, 1], 0b01);
        assert!(one.wedge(&f).unwrap().vect() == f.vect());
        assert!(f.wedge(&f).unwrap().is_zero());
    }

    #[test]
    fn wedge_matrix_noncommutativity_sign() {
        // (A dλ_1) ∧ (B dλ_2) = (AB) dλ_1∧dλ_2, (B dλ_2) ∧ (A dλ_1) = -(BA) dλ_1∧dλ_2
        let k2 = standard_simplex(2);
        let a = PolyForm::<Rat>::new(
            k2.clone(),
            2,
            1,
            Vect::single(
                FormKey { facet: 0, exps: vec![0, 0], wedge: 0b01, row: 0, col: 1 },
                Rat::from_i64(1),
            ),
        )
        .unwrap();
        let b = PolyForm::<Rat>::new(
            k2.clone(),
            2,
            1,
            Vect::single(
                FormKey { facet: 0, exps: vec![0, 0], wedge: 0b10, row: 1, col: 0 },
                Rat::from_i64(1),
            ),
        )
        .unwrap();
        let ab = a.wedge(&b).unwrap();
        assert_eq!(
            ab.vect().coeff(&FormKey { facet: 0, exps: vec![0, 0], wedge: 0b11, row: 0, col: 0 }),
            Rat::from_i64(1)
        );
        let ba = b.wedge(&a).unwrap();
        assert_eq!(
            ba.vect().coeff(&FormKey { facet: 0, exps: vec![0, 0], wedge: 0b11, row: 1, col: 1 }),
            Rat::from_i64(-1)
        );
    }

    #[test]
    fn wedge_leibniz_and_associativity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 2..=3 {
            let k = standard_simplex(n);
            let f = random_scalar_form(&k, 0, 2, &mut rng);
            let g = random_scalar_form(&k, 1, 2, &mut rng);
            let h = random_scalar_form(&k, 1, 2, &mut rng);

            let lhs = f.wedge(&g).unwrap().wedge(&h).unwrap();
            let rhs = f.wedge(&g.wedge(&h).unwrap()).unwrap();
            assert!(lhs.vect() == rhs.vect());

            let lhs = f.wedge(&g).unwrap().exterior_derivative();
            let rhs = f
                .exterior_derivative()
                .wedge(&g)
                .unwrap()
                .add(&f.wedge(&g.exterior_derivative()).unwrap())
                .unwrap();
            assert!(lhs.vect() == rhs.vect());

            let lhs = g.wedge(&h).unwrap().exterior_derivative();
            let rhs = g
                .exterior_derivative()
                .wedge(&h)
                .unwrap()
                .add(&g.wedge(&h.exterior_derivative()).unwrap().neg())
                .unwrap();
            assert!(lhs.vect() == rhs.vect());
        }
    }

    #[test]
    fn dirichlet_oracle_values() {
        assert_eq!(dirichlet_integral(&[1]), Rat::from_ratio(1, 2));
        assert_eq!(dirichlet_integral(&[0, 0]), Rat::from_ratio(1, 2));
    }

    #[test]
    fn monomial_integral_examples() {
        let k1 = standard_simplex(1);
        let v: Rat = simplex_monomial_integral(&k1, 1, 0, &[0, 0]).unwrap();
        assert_eq!(v, Rat::from_i64(1));
        let v: Rat = simplex_monomial_integral(&k1, 1, 0, &[0, 1]).unwrap();
        assert_eq!(v, Rat::from_ratio(1, 2));
        // ∫_{Δ²} λ_0 λ_1 over the unit right triangle = 2!·1!·1!/4! · 1/2 = 1/24
        let k2 = standard_simplex(2);
        let v: Rat = simplex_monomial_integral(&k2, 2, 0, &[1, 1, 0]).unwrap();
        assert_eq!(v, Rat::from_ratio(1, 24));
    }

    #[test]
    fn inner_product_examples() {
        let k1 = standard_simplex(1);
        let one = PolyForm::<Rat>::one(k1.clone(), 1);
        assert_eq!(one.inner_product(&one).unwrap(), Rat::from_i64(1));
        let dl1 = single_form(&k1, vec![0], 1);
        assert_eq!(dl1.inner_product(&dl1).unwrap(), Rat::from_i64(1));
        let zero = PolyForm::<Rat>::zero(k1, 1, 1);
        assert_eq!(zero.inner_product(&dl1).unwrap(), Rat::from_i64(0));
    }

    #[test]
    fn inner_product_symmetry_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let k2 = standard_simplex(2);
        for degree in 0..=2 {
            let a = random_scalar_form(&k2, degree, 2, &mut rng);
            let b = random_scalar_form(&k2, degree, 2, &mut rng);
            assert_eq!(a.inner_product(&b).unwrap(), b.inner_product(&a).unwrap());
        }
    }

    #[test]
    fn kappa_homotopy_identity_on_random_forms() {
        // κ_v d + d κ_v = 1 - ε_v where ε_v evaluates 0-forms at vertex v.
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for n in 1..=3 {
            let complex = standard_simplex(n);
            for degree in 0..=n {
                for v in 0..=n {
                    let f = random_scalar_form(&complex, degree, 2, &mut rng);
                    let kd = f.exterior_derivative().vect().apply_linear(|k| kappa_key::<Rat>(v, k));
                    let dk = f
                        .vect()
                        .apply_linear(|k| kappa_key::<Rat>(v, k))
                        .apply_linear(|k| d_key::<Rat>(k));
                    let mut rhs = f.vect().clone();
                    if degree == 0 {
                        let mut val = Rat::from_i64(0);
                        for (key, c) in f.vect().iter() {
                            let vanishes = if v == 0 {
                                key.exps.iter().any(|&e| e > 0)
                            } else {
                                key.exps.iter().enumerate().any(|(j, &e)| j != v - 1 && e > 0)
                            };
                            if !vanishes {
                                val = val + c.clone();
                            }
                        }
                        rhs.add_term(FormKey::scalar(0, vec![0; n], 0), val.neg());
                    }
                    let lhs = kd.add(&dk);
                    assert_eq!(lhs, rhs, "n={n} degree={degree} v={v}");
                }
            }
        }
    }

    #[test]
    fn compatibility_enforced_on_circle() {
        let c = triangulated_circle();
        // λ-linear on one edge, zero elsewhere: not compatible (nonzero at a
        // shared vertex).
        let bad = Vect::single(key(0, vec![1], 0), Rat::from_i64(1));
        assert!(PolyForm::new(c.clone(), 1, 0, bad).is_err());
        let b = bubble_generator::<Rat>(&c, 1, 0, vec![0], 0, 0, 0);
        assert!(b.check_compatibility().is_ok());
        assert!(PolyForm::<Rat>::one(c, 1).check_compatibility().is_ok());
    }

    #[test]
    fn pullback_to_subdivision_preserves_inner_products() {
        let k1 = standard_simplex(1);
        let (sub, maps) = k1.subdivide(1).unwrap();
        let f = single_form(&k1, vec![2], 1); // λ_1² dλ_1
        let pulled = f.pullback(&sub, &maps).unwrap();
        let up = f.inner_product(&f).unwrap();
        let down = pulled.inner_product(&pulled).unwrap();
        assert_eq!(up, down);

        let k2 = standard_simplex(2);
        let (sub2, maps2) = k2.subdivide(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let g = random_scalar_form(&k2, 1, 2, &mut rng);
        let pulled2 = g.pullback(&sub2, &maps2).unwrap();
        assert_eq!(g.inner_product(&g).unwrap(), pulled2.inner_product(&pulled2).unwrap());
    }

    #[test]
    fn degree_cap_reports() {
        let k1 = standard_simplex(1);
        let f = single_form(&k1, vec![21], 0);
        assert!(matches!(
            check_degree_cap(f.vect(), 20),
            Err(Error::DegreeCap { degree: 21, cap: 20 })
        ));
    }
}

//! Oriented simplicial complexes with affine geometry.
//!
//! Simplices are strictly increasing vertex tuples in a fixed global vertex
//! order; the incidence sign of the i-th face is `(-1)^i`, which makes the
//! boundary square to zero by construction. Geometry (rational coordinates
//! per vertex) is carried because the form inner products need a metric.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exact_mat;
use crate::scalar::{factorial, sqrt_exact, Coeff, Rat};

#[derive(Debug, Clone)]
pub struct FacetGeometry {
    /// Gram matrix of the barycentric gradient one-forms dλ_1..dλ_n,
    /// i.e. the inverse of the edge Gram matrix EᵀE.
    pub gram_inv: Vec<Vec<Rat>>,
    /// Squared volume of the facet (rational, exact).
    pub vol_sq: Rat,
    /// Exact volume when it is rational (always for full-dimensional facets).
    pub vol_exact: Option<Rat>,
}

/// An oriented simplicial complex, closed under faces, with rational vertex
/// coordinates. Immutable after construction.
#[derive(Debug)]
pub struct SimplicialComplex {
    vertices: Vec<Vec<Rat>>,
    /// Simplices per dimension, each a strictly increasing vertex tuple,
    /// stored in lexicographic order.
    simplices: Vec<Vec<Vec<usize>>>,
    index: BTreeMap<Vec<usize>, usize>,
    /// Facets (the given maximal simplices) as (dim, index-in-dim).
    facets: Vec<(usize, usize)>,
    /// cofaces[d][i] = list of (index of (d+1)-simplex, incidence sign).
    cofaces: Vec<Vec<Vec<(usize, i64)>>>,
    /// faces[d][i] = list of (index of (d-1)-simplex, incidence sign).
    faces: Vec<Vec<Vec<(usize, i64)>>>,
    /// carrier[d][i] = (facet id, positions of the simplex vertices inside
    /// the facet tuple) for the smallest containing facet.
    carrier: Vec<Vec<(usize, Vec<usize>)>>,
    facet_geom: Vec<FacetGeometry>,
}

impl SimplicialComplex {
    /// Build a complex from facet tuples and vertex coordinates.
    ///
    /// Tuples are canonicalized by sorting; faces are closed over; every
    /// facet must be geometrically non-degenerate and every declared vertex
    /// must appear in some facet.
    pub fn build(facet_list: &[Vec<usize>], coordinates: Vec<Vec<Rat>>) -> Result<Arc<Self>> {
        if facet_list.is_empty() {
            return Err(Error::structure("no facets given"));
        }
        let nv = coordinates.len();
        let ambient = coordinates.first().map(|c| c.len()).unwrap_or(0);
        if coordinates.iter().any(|c| c.len() != ambient) {
            return Err(Error::structure("vertex coordinates of mixed ambient dimension"));
        }

        let mut facet_tuples: Vec<Vec<usize>> = Vec::new();
        for (fi, f) in facet_list.iter().enumerate() {
            let mut t = f.clone();
            t.sort_unstable();
            let before = t.len();
            t.dedup();
            if t.len() != before {
                return Err(Error::Structure(format!("facet {fi} repeats a vertex")));
            }
            if t.iter().any(|&v| v >= nv) {
                return Err(Error::Structure(format!("facet {fi} references an undeclared vertex")));
            }
            facet_tuples.push(t);
        }
        for a in 0..facet_tuples.len() {
            for b in 0..facet_tuples.len() {
                if a != b && is_subset(&facet_tuples[a], &facet_tuples[b]) {
                    return Err(Error::Structure(format!(
                        "facet {a} is contained in facet {b}; facets must be maximal"
                    )));
                }
            }
        }

        let mut used = vec![false; nv];
        for f in &facet_tuples {
            for &v in f {
                used[v] = true;
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::Structure(format!("dangling vertex {v}: not contained in any facet")));
        }

        // Close under faces.
        let max_dim = facet_tuples.iter().map(|f| f.len() - 1).max().unwrap();
        let mut by_dim: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); max_dim + 1];
        for f in &facet_tuples {
            for sub in nonempty_subsets(f) {
                by_dim[sub.len() - 1].insert(sub);
            }
        }
        let simplices: Vec<Vec<Vec<usize>>> =
            by_dim.into_iter().map(|s| s.into_iter().collect()).collect();
        let mut index = BTreeMap::new();
        for dim_list in &simplices {
            for (i, t) in dim_list.iter().enumerate() {
                index.insert(t.clone(), i);
            }
        }

        let facets: Vec<(usize, usize)> =
            facet_tuples.iter().map(|t| (t.len() - 1, index[t])).collect();

        // Incidence with sign (-1)^i for the face omitting the i-th vertex.
        let mut faces: Vec<Vec<Vec<(usize, i64)>>> =
            simplices.iter().map(|l| vec![Vec::new(); l.len()]).collect();
        let mut cofaces: Vec<Vec<Vec<(usize, i64)>>> =
            simplices.iter().map(|l| vec![Vec::new(); l.len()]).collect();
        for d in 1..=max_dim {
            for (ti, tup) in simplices[d].iter().enumerate() {
                for (j, _) in tup.iter().enumerate() {
                    let mut face = tup.clone();
                    face.remove(j);
                    let fi = index[&face];
                    let sign = if j % 2 == 0 { 1 } else { -1 };
                    faces[d][ti].push((fi, sign));
                    cofaces[d - 1][fi].push((ti, sign));
                }
            }
        }

        // Canonical carrier facet per simplex: smallest facet id containing it.
        let mut carrier: Vec<Vec<(usize, Vec<usize>)>> =
            simplices.iter().map(|l| vec![(usize::MAX, Vec::new()); l.len()]).collect();
        for (fid, &(fd, fi)) in facets.iter().enumerate() {
            let ftup = &simplices[fd][fi];
            for sub in nonempty_subsets(ftup) {
                let d = sub.len() - 1;
                let si = index[&sub];
                if carrier[d][si].0 == usize::MAX {
                    let positions =
                        sub.iter().map(|v| ftup.iter().position(|w| w == v).unwrap()).collect();
                    carrier[d][si] = (fid, positions);
                }
            }
        }

        // Geometry per facet.
        let mut facet_geom = Vec::with_capacity(facets.len());
        for (fid, &(fd, fi)) in facets.iter().enumerate() {
            let tup = &simplices[fd][fi];
            let n = fd;
            let v0 = &coordinates[tup[0]];
            let edges: Vec<Vec<Rat>> = tup[1..]
                .iter()
                .map(|&v| {
                    coordinates[v].iter().zip(v0.iter()).map(|(a, b)| a.clone() - b.clone()).collect()
                })
                .collect();
            // Edge Gram matrix EᵀE (n x n).
            let gram: Vec<Vec<Rat>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            edges[i]
                                .iter()
                                .zip(edges[j].iter())
                                .fold(Rat::from_i64(0), |acc, (a, b)| acc + a.clone() * b.clone())
                        })
                        .collect()
                })
                .collect();
            let gram_det = if n == 0 { Rat::from_i64(1) } else { exact_mat::det(&gram) };
            if Coeff::is_zero(&gram_det) {
                return Err(Error::Geometry(format!(
                    "facet {fid} {tup:?} is degenerate (zero volume)"
                )));
            }
            let fact = factorial(n);
            let vol_sq = gram_det.clone() / (fact.clone() * fact.clone());
            let vol_exact = if n == ambient {
                let full: Vec<Vec<Rat>> = edges.clone();
                let d = exact_mat::det(&full);
                let v = if num_traits::Signed::is_negative(&d) { d.neg() } else { d };
                Some(v / fact)
            } else {
                sqrt_exact(&vol_sq)
            };
            let gram_inv =
                if n == 0 { Vec::new() } else { exact_mat::inverse(&gram).expect("nonzero det") };
            facet_geom.push(FacetGeometry { gram_inv, vol_sq, vol_exact });
        }

        Ok(Arc::new(SimplicialComplex {
            vertices: coordinates,
            simplices,
            index,
            facets,
            cofaces,
            faces,
            carrier,
            facet_geom,
        }))
    }

    pub fn dim(&self) -> usize {
        self.simplices.len() - 1
    }

    pub fn ambient_dim(&self) -> usize {
        self.vertices.first().map(|c| c.len()).unwrap_or(0)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex(&self, v: usize) -> &[Rat] {
        &self.vertices[v]
    }

    pub fn num_simplices(&self, dim: usize) -> usize {
        self.simplices.get(dim).map_or(0, |l| l.len())
    }

    pub fn simplex(&self, dim: usize, idx: usize) -> &[usize] {
        &self.simplices[dim][idx]
    }

    pub fn simplex_index(&self, tuple: &[usize]) -> Option<usize> {
        self.index.get(tuple).copied()
    }

    pub fn simplex_label(&self, dim: usize, idx: usize) -> String {
        let t = self.simplex(dim, idx);
        let parts: Vec<String> = t.iter().map(|v| v.to_string()).collect();
        format!("({})", parts.join(","))
    }

    pub fn num_facets(&self) -> usize {
        self.facets.len()
    }

    /// Facet as (dim, index-in-dim).
    pub fn facet(&self, fid: usize) -> (usize, usize) {
        self.facets[fid]
    }

    pub fn facet_tuple(&self, fid: usize) -> &[usize] {
        let (d, i) = self.facets[fid];
        self.simplex(d, i)
    }

    pub fn facet_dim(&self, fid: usize) -> usize {
        self.facets[fid].0
    }

    pub fn facet_geometry(&self, fid: usize) -> &FacetGeometry {
        &self.facet_geom[fid]
    }

    /// Cofaces of (dim, idx): (index of coface in dim+1, incidence sign).
    pub fn cofaces_of(&self, dim: usize, idx: usize) -> &[(usize, i64)] {
        &self.cofaces[dim][idx]
    }

    /// Faces of (dim, idx): (index of face in dim-1, incidence sign).
    pub fn faces_of(&self, dim: usize, idx: usize) -> &[(usize, i64)] {
        &self.faces[dim][idx]
    }

    /// Smallest facet containing the simplex, with the local positions of the
    /// simplex vertices inside the facet tuple.
    pub fn carrier_of(&self, dim: usize, idx: usize) -> (usize, &[usize]) {
        let (fid, pos) = &self.carrier[dim][idx];
        (*fid, pos)
    }

    /// Total count of simplices over all dimensions.
    pub fn total_simplices(&self) -> usize {
        self.simplices.iter().map(|l| l.len()).sum()
    }

    /// Facet volume in the scalar backend `K`. On the exact backend an
    /// irrational volume is a geometry error.
    pub fn facet_volume<K: Coeff>(&self, fid: usize) -> Result<K> {
        let g = &self.facet_geom[fid];
        if let Some(v) = &g.vol_exact {
            return Ok(K::from_rat(v));
        }
        K::from_sqrt_rat(&g.vol_sq).ok_or_else(|| {
            Error::Geometry(format!(
                "facet {fid} has irrational volume; use the float backend or a rational-volume embedding"
            ))
        })
    }

    /// Squared volume of any simplex (rational, exact).
    pub fn simplex_volume_sq(&self, dim: usize, idx: usize) -> Rat {
        if dim == 0 {
            return Rat::from_i64(1);
        }
        let tup = self.simplex(dim, idx);
        let v0 = &self.vertices[tup[0]];
        let edges: Vec<Vec<Rat>> = tup[1..]
            .iter()
            .map(|&v| self.vertices[v].iter().zip(v0.iter()).map(|(a, b)| a.clone() - b.clone()).collect())
            .collect();
        let gram: Vec<Vec<Rat>> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        edges[i]
                            .iter()
                            .zip(edges[j].iter())
                            .fold(Rat::from_i64(0), |acc, (a, b)| acc + a.clone() * b.clone())
                    })
                    .collect()
            })
            .collect();
        let fact = factorial(dim);
        exact_mat::det(&gram) / (fact.clone() * fact)
    }

    /// Volume of any simplex in the scalar backend `K`; geometry error when
    /// irrational on the exact backend.
    pub fn simplex_volume<K: Coeff>(&self, dim: usize, idx: usize) -> Result<K> {
        let sq = self.simplex_volume_sq(dim, idx);
        K::from_sqrt_rat(&sq).ok_or_else(|| {
            Error::Geometry(format!(
                "simplex {} has irrational volume; use the float backend or a rational-volume embedding",
                self.simplex_label(dim, idx)
            ))
        })
    }

    /// Barycentric subdivision, `depth`-fold. Returns the final complex and
    /// the chain of pullback charts (one per subdivision step, innermost
    /// step first).
    pub fn subdivide(self: &Arc<Self>, depth: usize) -> Result<(Arc<Self>, Vec<SubdivisionMap>)> {
        let mut current = self.clone();
        let mut maps = Vec::new();
        for _ in 0..depth {
            let (next, map) = current.subdivide_once()?;
            maps.push(map);
            current = next;
        }
        Ok((current, maps))
    }

    fn subdivide_once(self: &Arc<Self>) -> Result<(Arc<Self>, SubdivisionMap)> {
        // One new vertex per simplex: its barycenter. Global order: by
        // (dimension, index), so flag tuples are automatically increasing.
        let mut offsets = Vec::with_capacity(self.simplices.len());
        let mut acc = 0usize;
        for l in &self.simplices {
            offsets.push(acc);
            acc += l.len();
        }
        let mut coords: Vec<Vec<Rat>> = Vec::with_capacity(acc);
        for (d, l) in self.simplices.iter().enumerate() {
            for tup in l {
                let k = Rat::from_i64((d + 1) as i64);
                let mut c = vec![Rat::from_i64(0); self.ambient_dim()];
                for &v in tup {
                    for (ci, x) in self.vertices[v].iter().enumerate() {
                        c[ci] = c[ci].clone() + x.clone();
                    }
                }
                for x in c.iter_mut() {
                    *x = x.clone() / k.clone();
                }
                coords.push(c);
            }
        }

        let mut new_facets: Vec<Vec<usize>> = Vec::new();
        let mut charts: Vec<SubChart> = Vec::new();
        for (fid, &(fd, fi)) in self.facets.iter().enumerate() {
            let ftup = self.simplex(fd, fi).to_vec();
            let n = fd;
            for perm in permutations(n + 1) {
                // Flag G_0 ⊂ G_1 ⊂ ... ⊂ G_n from the permutation prefix sets.
                let mut tuple = Vec::with_capacity(n + 1);
                let mut values: Vec<Vec<Rat>> = vec![Vec::with_capacity(n + 1); n + 1];
                let mut prefix: Vec<usize> = Vec::new();
                for k in 0..=n {
                    prefix.push(perm[k]);
                    let mut face: Vec<usize> = prefix.iter().map(|&p| ftup[p]).collect();
                    face.sort_unstable();
                    let d = face.len() - 1;
                    let idx = self.index[&face];
                    tuple.push(offsets[d] + idx);
                    // Parent barycentric coordinates at this new vertex.
                    let size = Rat::from_ratio(1, (k + 1) as i64);
                    for (j, val) in values.iter_mut().enumerate() {
                        let inside = prefix.contains(&j);
                        val.push(if inside { size.clone() } else { Rat::from_i64(0) });
                    }
                }
                new_facets.push(tuple);
                charts.push(SubChart { parent: fid, values });
            }
        }

        let next = SimplicialComplex::build(&new_facets, coords)?;
        // Match chart order to the built facet order (build sorts tuples but
        // preserves facet list order; tuples from flags are already sorted).
        Ok((next, SubdivisionMap { charts }))
    }
}

/// Pullback charts of one barycentric subdivision step.
#[derive(Debug, Clone)]
pub struct SubdivisionMap {
    /// One chart per new facet, in facet order of the subdivided complex.
    pub charts: Vec<SubChart>,
}

/// Affine expression of the parent facet's barycentric coordinates on one
/// subdivided facet: `values[j][i]` is parent coordinate `λ_j` evaluated at
/// the i-th local vertex of the new facet.
#[derive(Debug, Clone)]
pub struct SubChart {
    pub parent: usize,
    pub values: Vec<Vec<Rat>>,
}

impl SubChart {
    /// Jacobian determinant of the barycentric affine map (volume ratio of
    /// the sub-facet inside its parent). Always rational.
    pub fn volume_ratio(&self) -> Rat {
        let n = self.values.len() - 1;
        if n == 0 {
            return Rat::from_i64(1);
        }
        let m: Vec<Vec<Rat>> = (1..=n)
            .map(|j| {
                (1..=n)
                    .map(|i| self.values[j][i].clone() - self.values[j][0].clone())
                    .collect()
            })
            .collect();
        let d = exact_mat::det(&m);
        if num_traits::Signed::is_negative(&d) {
            d.neg()
        } else {
            d
        }
    }
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_ok())
}

fn nonempty_subsets(tuple: &[usize]) -> Vec<Vec<usize>> {
    let n = tuple.len();
    let mut out = Vec::with_capacity((1 << n) - 1);
    for mask in 1u32..(1 << n) {
        let sub: Vec<usize> =
            (0..n).filter(|i| mask & (1 << i) != 0).map(|i| tuple[i]).collect();
        out.push(sub);
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![0]];
    }
    let smaller = permutations(n - 1);
    let mut out = Vec::new();
    for p in smaller {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// The standard n-simplex: vertices at the origin and the coordinate unit
/// points of R^n. Full-dimensional, rational volume 1/n!.
pub fn standard_simplex(n: usize) -> Arc<SimplicialComplex> {
    let mut coords = vec![vec![Rat::from_i64(0); n]];
    for i in 0..n {
        let mut c = vec![Rat::from_i64(0); n];
        c[i] = Rat::from_i64(1);
        coords.push(c);
    }
    SimplicialComplex::build(&[(0..=n).collect()], coords).expect("standard simplex is valid")
}

/// A triangulated circle on three vertices with rational edge lengths
/// (3-4-5 right triangle boundary), so all metric data stays rational.
pub fn triangulated_circle() -> Arc<SimplicialComplex> {
    let coords = vec![
        vec![Rat::from_i64(0), Rat::from_i64(0)],
        vec![Rat::from_i64(3), Rat::from_i64(0)],
        vec![Rat::from_i64(0), Rat::from_i64(4)],
    ];
    SimplicialComplex::build(&[vec![0, 1], vec![1, 2], vec![0, 2]], coords)
        .expect("circle complex is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_complex_counts() {
        let k = standard_simplex(1);
        assert_eq!(k.num_simplices(0), 2);
        assert_eq!(k.num_simplices(1), 1);
        assert_eq!(k.dim(), 1);
    }

    #[test]
    fn triangle_complex_counts() {
        let k = standard_simplex(2);
        assert_eq!(k.num_simplices(0), 3);
        assert_eq!(k.num_simplices(1), 3);
        assert_eq!(k.num_simplices(2), 1);
    }

    #[test]
    fn circle_has_no_top_face() {
        let k = triangulated_circle();
        assert_eq!(k.num_simplices(0), 3);
        assert_eq!(k.num_simplices(1), 3);
        assert_eq!(k.dim(), 1);
        assert_eq!(k.num_facets(), 3);
    }

    #[test]
    fn unsorted_facet_tuples_are_canonicalized() {
        let coords = vec![
            vec![Rat::from_i64(0), Rat::from_i64(0)],
            vec![Rat::from_i64(3), Rat::from_i64(0)],
            vec![Rat::from_i64(0), Rat::from_i64(4)],
        ];
        let k = SimplicialComplex::build(&[vec![0, 1], vec![1, 2], vec![2, 0]], coords).unwrap();
        assert_eq!(k.num_simplices(1), 3);
    }

    #[test]
    fn degenerate_simplex_rejected() {
        let coords = vec![
            vec![Rat::from_i64(0), Rat::from_i64(0)],
            vec![Rat::from_i64(1), Rat::from_i64(0)],
            vec![Rat::from_i64(2), Rat::from_i64(0)],
        ];
        let err = SimplicialComplex::build(&[vec![0, 1, 2]], coords).unwrap_err();
        assert!(matches!(err, Error::Geometry(_)));
    }

    #[test]
    fn dangling_vertex_rejected() {
        let coords = vec![vec![Rat::from_i64(0)], vec![Rat::from_i64(1)], vec![Rat::from_i64(2)]];
        let err = SimplicialComplex::build(&[vec![0, 1]], coords).unwrap_err();
        assert!(matches!(err, Error::Structure(_)));
    }

    #[test]
    fn boundary_squares_to_zero_via_signs() {
        let k = standard_simplex(3);
        // For every 3-simplex -> 1-simplex pair, signed paths cancel.
        for t in 0..k.num_simplices(3) {
            let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
            for &(f2, s2) in k.faces_of(3, t) {
                for &(f1, s1) in k.faces_of(2, f2) {
                    *acc.entry(f1).or_insert(0) += s1 * s2;
                }
            }
            assert!(acc.values().all(|&v| v == 0));
        }
    }

    #[test]
    fn subdivision_counts_interval_and_triangle() {
        let k1 = standard_simplex(1);
        let (s1, _) = k1.subdivide(1).unwrap();
        assert_eq!(s1.num_simplices(0), 3);
        assert_eq!(s1.num_simplices(1), 2);

        // Flag count oracle for the triangle: vertices = all faces (3+3+1),
        // edges = incident pairs (v<e: 6, v<t: 3, e<t: 3), triangles = full
        // flags v<e<t (3 * 2).
        let k2 = standard_simplex(2);
        let (s2, _) = k2.subdivide(1).unwrap();
        assert_eq!(s2.num_simplices(0), 7);
        assert_eq!(s2.num_simplices(1), 12);
        assert_eq!(s2.num_simplices(2), 6);
    }

    #[test]
    fn subdivision_depth_zero_is_identity() {
        let k = standard_simplex(2);
        let (s, maps) = k.subdivide(0).unwrap();
        assert!(maps.is_empty());
        assert_eq!(s.num_simplices(2), 1);
    }

    #[test]
    fn subdivision_volume_ratios_sum_to_one() {
        for n in 1..=3 {
            let k = standard_simplex(n);
            let (_, maps) = k.subdivide(1).unwrap();
            let mut total = Rat::from_i64(0);
            for chart in &maps[0].charts {
                assert_eq!(chart.parent, 0);
                total = total + chart.volume_ratio();
            }
            assert_eq!(total, Rat::from_i64(1), "n={n}");
        }
    }

    #[test]
    fn standard_simplex_volumes() {
        assert_eq!(
            standard_simplex(2).facet_geometry(0).vol_exact,
            Some(Rat::from_ratio(1, 2))
        );
        assert_eq!(
            standard_simplex(3).facet_geometry(0).vol_exact,
            Some(Rat::from_ratio(1, 6))
        );
        // 3-4-5 circle edges have rational lengths 3, 5, 4.
        let c = triangulated_circle();
        let vols: Vec<_> = (0..3).map(|f| c.facet_geometry(f).vol_exact.clone().unwrap()).collect();
        assert_eq!(vols, vec![Rat::from_i64(3), Rat::from_i64(5), Rat::from_i64(4)]);
    }
}

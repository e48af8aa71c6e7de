//! Triangulated surfaces carrying only a discrete metric.
//!
//! A [`TriangleMesh`] stores oriented triangles and one length per edge; no
//! vertex coordinates are kept. Generators build meshes from scratch layouts
//! and then forget the embedding, so every downstream quantity is a function
//! of the metric alone.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

mod double;
mod generators;
mod io;
mod surgery;

pub use double::schottky_double;
pub use generators::{
    make_flat_annulus, make_flat_cylinder, make_flat_disk, make_flat_disk_with_layout,
    make_torus_with_hole,
};
pub use io::{read_mesh, read_mesh_file, write_mesh, write_mesh_file, MeshSections};
pub use surgery::{attach_handle, attach_handle_with_map, geodesic_distances, pick_handle_sites};

/// Smallest corner angle any constructed triangle may have, in degrees.
pub const MIN_TRIANGLE_ANGLE_DEG: f64 = 1.0;
/// Relative tolerance for two faces disagreeing about a shared edge length.
pub const EDGE_MERGE_REL_TOL: f64 = 1e-12;
/// Relative tolerance on the uniform spacing of generated boundary loops.
pub const BOUNDARY_SPACING_REL_TOL: f64 = 1e-12;

/// Tag prefix used for handle cylinders; `attach_handle` appends an index,
/// `schottky_double` appends [`MIRROR_TAG_SUFFIX`] on the mirror copy.
pub const HANDLE_TAG_PREFIX: &str = "handle-cylinder-";
pub const MIRROR_TAG_SUFFIX: &str = "/mirror";

/// One face: vertex triple plus the lengths of its directed sides
/// `(v0 v1, v1 v2, v2 v0)`.
pub type FaceSpec<T> = ([usize; 3], [T; 3]);

/// Oriented 2-manifold triangulation with edge lengths as the only metric
/// data. Invariants established at construction:
///
/// * every directed edge occurs in at most one triangle (consistent global
///   orientation, edge-manifold),
/// * every vertex star is a single fan (vertex-manifold),
/// * every face satisfies the strict triangle inequality with corner angles
///   of at least [`MIN_TRIANGLE_ANGLE_DEG`],
/// * the boundary is empty or a single simple cycle.
#[derive(Debug, Clone)]
pub struct TriangleMesh<T> {
    n_vertices: usize,
    triangles: Vec<[usize; 3]>,
    /// canonical (lo, hi) pairs, sorted lexicographically
    edges: Vec<(usize, usize)>,
    edge_lengths: Vec<T>,
    /// per edge: triangle containing (lo->hi), triangle containing (hi->lo)
    edge_tris: Vec<[Option<usize>; 2]>,
    /// per triangle: edge ids of sides (v0 v1, v1 v2, v2 v0)
    tri_edges: Vec<[usize; 3]>,
    boundary_loop: Vec<usize>,
    is_boundary: Vec<bool>,
    /// per vertex: (neighbor, edge id), sorted by neighbor
    neighbors: Vec<Vec<(usize, usize)>>,
    region_tags: BTreeMap<usize, String>,
}

impl<T: Scalar> TriangleMesh<T> {
    /// Builds and validates a mesh from per-face data. Faces listed first
    /// win length disagreements within [`EDGE_MERGE_REL_TOL`]; larger
    /// disagreements are geometry errors.
    pub fn from_faces(
        n_vertices: usize,
        faces: &[FaceSpec<T>],
        region_tags: BTreeMap<usize, String>,
    ) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::invalid_input("mesh needs at least one triangle"));
        }
        for (t, &([a, b, c], lens)) in faces.iter().enumerate() {
            if a >= n_vertices || b >= n_vertices || c >= n_vertices {
                return Err(Error::invalid_input(format!(
                    "triangle {t} references a vertex beyond {n_vertices}"
                )));
            }
            if a == b || b == c || c == a {
                return Err(Error::geometry(format!("triangle {t} repeats a vertex")));
            }
            for l in lens {
                if !(l > T::zero()) || !l.is_finite() {
                    return Err(Error::geometry(format!(
                        "triangle {t} has a non-positive edge length"
                    )));
                }
            }
            check_corner_angles(t, lens)?;
        }
        for t in region_tags.keys() {
            if *t >= faces.len() {
                return Err(Error::invalid_input(format!("tag on missing triangle {t}")));
            }
        }

        // Canonical edge table with directed-edge bookkeeping.
        let mut table: BTreeMap<(usize, usize), (T, [Option<usize>; 2])> = BTreeMap::new();
        for (t, &([a, b, c], lens)) in faces.iter().enumerate() {
            for (&(u, v), &len) in [(a, b), (b, c), (c, a)].iter().zip(lens.iter()) {
                let (key, slot) = if u < v { ((u, v), 0) } else { ((v, u), 1) };
                let entry = table
                    .entry(key)
                    .or_insert((len, [None, None]));
                let rel = (entry.0 - len).abs() / entry.0.max(len);
                // 1e-12 is meaningful headroom for f64; scale up for f32
                let tol = EDGE_MERGE_REL_TOL.max(8.0 * T::epsilon().as_f64());
                if rel.as_f64() > tol {
                    return Err(Error::geometry(format!(
                        "faces disagree about edge ({}, {}) length: {} vs {}",
                        key.0, key.1, entry.0, len
                    )));
                }
                if entry.1[slot].is_some() {
                    return Err(Error::geometry(format!(
                        "directed edge ({u}, {v}) used by two triangles: orientation is \
                         inconsistent or the mesh is non-manifold"
                    )));
                }
                entry.1[slot] = Some(t);
            }
        }

        let mut edges = Vec::with_capacity(table.len());
        let mut edge_lengths = Vec::with_capacity(table.len());
        let mut edge_tris = Vec::with_capacity(table.len());
        for (key, (len, tris)) in &table {
            edges.push(*key);
            edge_lengths.push(*len);
            edge_tris.push(*tris);
        }

        let edge_index = |u: usize, v: usize| -> usize {
            let key = if u < v { (u, v) } else { (v, u) };
            edges.binary_search(&key).expect("edge recorded above")
        };
        let triangles: Vec<[usize; 3]> = faces.iter().map(|&(vs, _)| vs).collect();
        let tri_edges: Vec<[usize; 3]> = triangles
            .iter()
            .map(|&[a, b, c]| [edge_index(a, b), edge_index(b, c), edge_index(c, a)])
            .collect();

        let mut neighbors: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_vertices];
        for (e, &(u, v)) in edges.iter().enumerate() {
            neighbors[u].push((v, e));
            neighbors[v].push((u, e));
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }

        let mut is_boundary = vec![false; n_vertices];
        let mut n_boundary_edges = 0usize;
        // next vertex along the boundary, following directions present in faces
        let mut next_on_boundary: BTreeMap<usize, usize> = BTreeMap::new();
        for (e, tris) in edge_tris.iter().enumerate() {
            let (lo, hi) = edges[e];
            match tris {
                [Some(_), Some(_)] => {}
                [Some(_), None] => {
                    // only (lo -> hi) present
                    n_boundary_edges += 1;
                    is_boundary[lo] = true;
                    is_boundary[hi] = true;
                    if next_on_boundary.insert(lo, hi).is_some() {
                        return Err(Error::geometry(format!(
                            "boundary branches at vertex {lo}"
                        )));
                    }
                }
                [None, Some(_)] => {
                    n_boundary_edges += 1;
                    is_boundary[lo] = true;
                    is_boundary[hi] = true;
                    if next_on_boundary.insert(hi, lo).is_some() {
                        return Err(Error::geometry(format!(
                            "boundary branches at vertex {hi}"
                        )));
                    }
                }
                [None, None] => unreachable!("edge without a face"),
            }
        }
        let boundary_loop = if n_boundary_edges == 0 {
            Vec::new()
        } else {
            let start = *next_on_boundary.keys().next().unwrap();
            let mut cycle = vec![start];
            let mut cur = start;
            loop {
                let nxt = *next_on_boundary.get(&cur).ok_or_else(|| {
                    Error::geometry(format!("boundary is not closed at vertex {cur}"))
                })?;
                if nxt == start {
                    break;
                }
                cycle.push(nxt);
                if cycle.len() > n_boundary_edges {
                    return Err(Error::geometry("boundary walk does not close"));
                }
                cur = nxt;
            }
            if cycle.len() != n_boundary_edges {
                return Err(Error::geometry(
                    "boundary has more than one loop; meshes here carry at most one",
                ));
            }
            cycle
        };

        let mesh = Self {
            n_vertices,
            triangles,
            edges,
            edge_lengths,
            edge_tris,
            tri_edges,
            boundary_loop,
            is_boundary,
            neighbors,
            region_tags,
        };
        mesh.check_vertex_fans()?;
        Ok(mesh)
    }

    /// Every vertex star must be one fan: a cycle of triangles for interior
    /// vertices, a single open strip for boundary vertices.
    fn check_vertex_fans(&self) -> Result<()> {
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); self.n_vertices];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                incident[v].push(t);
            }
        }
        for v in 0..self.n_vertices {
            let faces = &incident[v];
            if faces.is_empty() {
                return Err(Error::geometry(format!("vertex {v} is isolated")));
            }
            // Walk outward from an arbitrary start triangle through both of
            // its edges at v; one connected fan reaches every incident face.
            let start = faces[0];
            let mut seen: BTreeSet<usize> = BTreeSet::new();
            seen.insert(start);
            for first_out in self.triangle_edges_at(start, v) {
                let mut cur = start;
                let mut out = first_out;
                loop {
                    let next = self.edge_tris[out]
                        .iter()
                        .flatten()
                        .copied()
                        .find(|&t| t != cur);
                    let Some(t) = next else {
                        break; // boundary edge terminates this direction
                    };
                    if !seen.insert(t) {
                        break; // closed the interior cycle
                    }
                    let [a, b] = self.triangle_edges_at(t, v);
                    out = if a == out { b } else { a };
                    cur = t;
                }
            }
            if seen.len() != faces.len() {
                return Err(Error::geometry(format!(
                    "vertex {v} is pinched: its star splits into several fans"
                )));
            }
        }
        Ok(())
    }

    /// The two edges of triangle `t` incident to vertex `v`.
    fn triangle_edges_at(&self, t: usize, v: usize) -> [usize; 2] {
        let [a, b, _] = self.triangles[t];
        let [eab, ebc, eca] = self.tri_edges[t];
        if v == a {
            [eab, eca]
        } else if v == b {
            [eab, ebc]
        } else {
            [ebc, eca]
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_lengths(&self) -> &[T] {
        &self.edge_lengths
    }

    /// Canonical edge id for the unordered pair, if present.
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        let key = if u < v { (u, v) } else { (v, u) };
        self.edges.binary_search(&key).ok()
    }

    pub fn edge_length(&self, e: usize) -> T {
        self.edge_lengths[e]
    }

    pub fn length_between(&self, u: usize, v: usize) -> Option<T> {
        self.edge_index(u, v).map(|e| self.edge_lengths[e])
    }

    /// Triangles adjacent to edge `e`: the one containing (lo -> hi), then
    /// the one containing (hi -> lo).
    pub fn edge_triangles(&self, e: usize) -> [Option<usize>; 2] {
        self.edge_tris[e]
    }

    /// Edge ids of triangle `t`, in side order (v0 v1, v1 v2, v2 v0).
    pub fn triangle_edge_ids(&self, t: usize) -> [usize; 3] {
        self.tri_edges[t]
    }

    /// Side lengths of triangle `t` in side order.
    pub fn triangle_lengths(&self, t: usize) -> [T; 3] {
        let [e1, e2, e3] = self.tri_edges[t];
        [
            self.edge_lengths[e1],
            self.edge_lengths[e2],
            self.edge_lengths[e3],
        ]
    }

    /// Corner angles at (v0, v1, v2), radians.
    pub fn corner_angles(&self, t: usize) -> [T; 3] {
        corner_angles(self.triangle_lengths(t))
    }

    /// Face area by the stable Heron form.
    pub fn triangle_area(&self, t: usize) -> T {
        let [a, b, c] = self.triangle_lengths(t);
        let mut s = [a, b, c];
        s.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let [a, b, c] = s;
        let quarter = T::of(0.25);
        let term = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
        quarter * term.max(T::zero()).sqrt()
    }

    pub fn boundary_loop(&self) -> &[usize] {
        &self.boundary_loop
    }

    pub fn is_closed(&self) -> bool {
        self.boundary_loop.is_empty()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.is_boundary[v]
    }

    /// (neighbor, edge id) pairs for `v`, sorted by neighbor id.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.neighbors[v]
    }

    pub fn region_tags(&self) -> &BTreeMap<usize, String> {
        &self.region_tags
    }

    pub fn euler_characteristic(&self) -> isize {
        self.n_vertices as isize - self.edges.len() as isize + self.triangles.len() as isize
    }

    /// Genus from the Euler characteristic and boundary count.
    pub fn euler_genus(&self) -> Result<usize> {
        let b = if self.is_closed() { 0 } else { 1 };
        let two_g = 2 - b - self.euler_characteristic();
        if two_g < 0 || two_g % 2 != 0 {
            return Err(Error::geometry(format!(
                "Euler characteristic {} with {} boundary loops is not orientable-consistent",
                self.euler_characteristic(),
                b
            )));
        }
        Ok((two_g / 2) as usize)
    }

    /// Total boundary length.
    pub fn boundary_length(&self) -> T {
        let n = self.boundary_loop.len();
        (0..n)
            .map(|i| {
                let u = self.boundary_loop[i];
                let v = self.boundary_loop[(i + 1) % n];
                self.length_between(u, v).expect("boundary edge exists")
            })
            .sum()
    }

    /// Relative spread (max − min)/max of boundary edge lengths. Exactly
    /// zero when every boundary edge carries the same bit pattern, as the
    /// generators guarantee.
    pub fn boundary_spacing_defect(&self) -> T {
        let n = self.boundary_loop.len();
        if n == 0 {
            return T::zero();
        }
        let mut lo = T::infinity();
        let mut hi = T::zero();
        for i in 0..n {
            let u = self.boundary_loop[i];
            let v = self.boundary_loop[(i + 1) % n];
            let l = self.length_between(u, v).expect("boundary edge exists");
            lo = lo.min(l);
            hi = hi.max(l);
        }
        (hi - lo) / hi
    }

    /// Conformal rescaling: edge (u, v) is scaled by the geometric mean of
    /// the endpoint factors. Boundary edges between factor-1 vertices keep
    /// their length bit-for-bit.
    pub fn scale_conformal(&self, factors: &[T]) -> Result<Self> {
        if factors.len() != self.n_vertices {
            return Err(Error::invalid_input(format!(
                "{} factors for {} vertices",
                factors.len(),
                self.n_vertices
            )));
        }
        for &f in factors {
            if !(f > T::zero()) || !f.is_finite() {
                return Err(Error::invalid_input(
                    "conformal factors must be positive and finite",
                ));
            }
        }
        let faces: Vec<FaceSpec<T>> = self
            .triangles
            .iter()
            .zip(self.tri_edges.iter())
            .map(|(&[a, b, c], &[eab, ebc, eca])| {
                let scale = |e: usize, u: usize, v: usize| {
                    self.edge_lengths[e] * (factors[u] * factors[v]).sqrt()
                };
                (
                    [a, b, c],
                    [scale(eab, a, b), scale(ebc, b, c), scale(eca, c, a)],
                )
            })
            .collect();
        Self::from_faces(self.n_vertices, &faces, self.region_tags.clone())
    }

    /// Face specs for rebuilding (used by surgery and the double).
    pub(crate) fn face_specs(&self) -> Vec<FaceSpec<T>> {
        self.triangles
            .iter()
            .zip(self.tri_edges.iter())
            .map(|(&vs, &[e1, e2, e3])| {
                (
                    vs,
                    [
                        self.edge_lengths[e1],
                        self.edge_lengths[e2],
                        self.edge_lengths[e3],
                    ],
                )
            })
            .collect()
    }
}

pub(crate) fn corner_angles<T: Scalar>(lens: [T; 3]) -> [T; 3] {
    // Sides in order (ab, bc, ca); angle at v0 sits between ab and ca, etc.
    let [ab, bc, ca] = lens;
    let angle = |adj1: T, adj2: T, opp: T| {
        let cos = (adj1 * adj1 + adj2 * adj2 - opp * opp) / (T::of(2.0) * adj1 * adj2);
        cos.min(T::one()).max(-T::one()).acos()
    };
    [
        angle(ab, ca, bc),
        angle(ab, bc, ca),
        angle(bc, ca, ab),
    ]
}

fn check_corner_angles<T: Scalar>(t: usize, lens: [T; 3]) -> Result<()> {
    let min_angle = T::of(MIN_TRIANGLE_ANGLE_DEG.to_radians());
    let angles = corner_angles(lens);
    for a in angles {
        if !(a >= min_angle) {
            return Err(Error::geometry(format!(
                "triangle {t} has a corner of {:.4} degrees, below the {} degree floor",
                a.as_f64().to_degrees(),
                MIN_TRIANGLE_ANGLE_DEG
            )));
        }
    }
    Ok(())
}

/// Self-inverse vertex permutation of a closed mesh, produced by
/// [`schottky_double`]. Fixed points are the former boundary.
#[derive(Debug, Clone)]
pub struct Involution {
    map: Vec<usize>,
}

impl Involution {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        for (v, &w) in map.iter().enumerate() {
            if w >= n {
                return Err(Error::invalid_input("involution maps outside the mesh"));
            }
            if map[w] != v {
                return Err(Error::invalid_input(format!(
                    "map is not self-inverse at vertex {v}"
                )));
            }
        }
        Ok(Self { map })
    }

    pub fn apply(&self, v: usize) -> usize {
        self.map[v]
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn fixed_points(&self) -> Vec<usize> {
        (0..self.map.len()).filter(|&v| self.map[v] == v).collect()
    }

    /// Checks that the permutation is a metric, orientation-reversing
    /// automorphism of `mesh`: every edge maps to an edge of bit-identical
    /// length and every triangle maps to a triangle of reversed cyclic order.
    pub fn validate_isometry<T: Scalar>(&self, mesh: &TriangleMesh<T>) -> Result<()> {
        if self.map.len() != mesh.n_vertices() {
            return Err(Error::invalid_input("involution size mismatch"));
        }
        for (e, &(u, v)) in mesh.edges().iter().enumerate() {
            let img = mesh
                .edge_index(self.apply(u), self.apply(v))
                .ok_or_else(|| {
                    Error::geometry(format!("edge ({u}, {v}) has no image edge"))
                })?;
            if mesh.edge_lengths()[img] != mesh.edge_lengths()[e] {
                return Err(Error::geometry(format!(
                    "involution changes the length of edge ({u}, {v})"
                )));
            }
        }
        let mut by_corners: BTreeMap<[usize; 3], usize> = BTreeMap::new();
        for (t, &[a, b, c]) in mesh.triangles().iter().enumerate() {
            let mut key = [a, b, c];
            key.sort_unstable();
            by_corners.insert(key, t);
        }
        for &[a, b, c] in mesh.triangles() {
            let img = [self.apply(a), self.apply(b), self.apply(c)];
            let mut key = img;
            key.sort_unstable();
            let t = *by_corners
                .get(&key)
                .ok_or_else(|| Error::geometry("triangle image is not a face"))?;
            let found = mesh.triangles()[t];
            // Reversed image, up to cyclic rotation.
            let rev = [img[0], img[2], img[1]];
            let matches_reversed = (0..3).any(|r| {
                found[0] == rev[r] && found[1] == rev[(r + 1) % 3] && found[2] == rev[(r + 2) % 3]
            });
            if !matches_reversed {
                return Err(Error::geometry(
                    "involution preserves orientation on some triangle; it must reverse it",
                ));
            }
        }
        Ok(())
    }
}

//! Handle surgery: cut two small holes into a surface and join them with a
//! flat product cylinder, raising the genus by one.
//!
//! The mesh carries no embedding, so the neighborhood of each site is
//! isometrically developed into the plane (triangle by triangle, from edge
//! lengths). Development is exact on intrinsically flat patches, which is
//! where handles are allowed to land; curvature shows up as a placement
//! mismatch and is rejected.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::generators::{band_faces, dist2, RingRef};
use super::{FaceSpec, TriangleMesh, HANDLE_TAG_PREFIX};

/// Excised disk radius, as a multiple of the handle radius eps. Chosen so
/// the regular rim polygon (circumradius ≈ eps) sits strictly inside the
/// cleared region with room for the transition band.
const EXCISION_FACTOR: f64 = 1.3;
/// Agreement tolerance for developing the same vertex along two triangle
/// paths, relative to the patch radius. Loose enough to absorb the
/// quadrature-scale cone defects a graded disk carries near its arc-length
/// boundary ring (~1e-5 rad), tight enough to reject the O(1e-1) cone
/// angles of real topology such as an earlier handle's transition band.
const DEVELOP_REL_TOL: f64 = 1e-3;

#[derive(PartialEq)]
struct HeapKey(f64, usize);
impl Eq for HeapKey {}
impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Multi-source Dijkstra over the edge-length graph. Returns one distance
/// per vertex (`f64::INFINITY` when unreachable, e.g. no sources).
pub fn geodesic_distances<T: Scalar>(mesh: &TriangleMesh<T>, sources: &[usize]) -> Vec<f64> {
    let n = mesh.n_vertices();
    let mut dist = vec![f64::INFINITY; n];
    let mut heap: BinaryHeap<Reverse<HeapKey>> = BinaryHeap::new();
    for &s in sources {
        if dist[s] > 0.0 {
            dist[s] = 0.0;
            heap.push(Reverse(HeapKey(0.0, s)));
        }
    }
    while let Some(Reverse(HeapKey(d, v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, e) in mesh.neighbors(v) {
            let nd = d + mesh.edge_length(e).as_f64();
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(Reverse(HeapKey(nd, w)));
            }
        }
    }
    dist
}

/// Picks a deterministic admissible site pair for [`attach_handle`]:
/// interior vertices at graph distance ≥ 4.2·eps from the boundary and from
/// each other (the 5% slack keeps the 4·eps preconditions robust), avoiding
/// the given (vertex, radius) exclusion balls. The first site maximizes
/// boundary clearance, the second maximizes distance from the first.
pub fn pick_handle_sites<T: Scalar>(
    mesh: &TriangleMesh<T>,
    eps: T,
    avoid: &[(usize, f64)],
) -> Result<(usize, usize)> {
    let eps = eps.as_f64();
    if !(eps > 0.0) {
        return Err(Error::invalid_input("eps must be positive"));
    }
    let req = 4.2 * eps;
    let d_gamma = if mesh.boundary_loop().is_empty() {
        vec![f64::INFINITY; mesh.n_vertices()]
    } else {
        geodesic_distances(mesh, mesh.boundary_loop())
    };
    let avoid_dists: Vec<(Vec<f64>, f64)> = avoid
        .iter()
        .map(|&(s, r)| (geodesic_distances(mesh, &[s]), r))
        .collect();
    let admissible = |v: usize| -> bool {
        d_gamma[v] >= req && avoid_dists.iter().all(|(d, r)| d[v] >= *r)
    };

    let mut a = None;
    for v in 0..mesh.n_vertices() {
        if admissible(v) && a.map_or(true, |best: usize| d_gamma[v] > d_gamma[best]) {
            a = Some(v);
        }
    }
    let a = a.ok_or_else(|| {
        Error::invalid_input("no interior vertex is 4.2·eps clear of the boundary")
    })?;
    let from_a = geodesic_distances(mesh, &[a]);
    let mut b = None;
    for v in 0..mesh.n_vertices() {
        if v != a && admissible(v) && from_a[v] >= req {
            if b.map_or(true, |best: usize| from_a[v] > from_a[best]) {
                b = Some(v);
            }
        }
    }
    let b = b.ok_or_else(|| {
        Error::invalid_input("no second site is 4.2·eps clear of the first; eps too large")
    })?;
    Ok((a, b))
}

struct Patch {
    pos: BTreeMap<usize, [f64; 2]>,
    tris: BTreeSet<usize>,
}

fn rotate_to_front(tri: [usize; 3], v: usize) -> [usize; 3] {
    let [a, b, c] = tri;
    if a == v {
        [a, b, c]
    } else if b == v {
        [b, c, a]
    } else {
        [c, a, b]
    }
}

/// Lays the triangles around `site` into the plane, site at the origin,
/// following shared edges outward while an edge endpoint stays within
/// `radius_limit`. Errors if two paths disagree about a vertex position
/// (intrinsic curvature in the patch).
fn develop_patch<T: Scalar>(
    mesh: &TriangleMesh<T>,
    site: usize,
    radius_limit: f64,
) -> Result<Patch> {
    let seed = mesh
        .neighbors(site)
        .iter()
        .flat_map(|&(_, e)| mesh.edge_triangles(e).into_iter().flatten())
        .min()
        .ok_or_else(|| Error::geometry("site has no incident triangles"))?;

    let mut pos: BTreeMap<usize, [f64; 2]> = BTreeMap::new();
    let mut tris: BTreeSet<usize> = BTreeSet::new();
    let tol = DEVELOP_REL_TOL * (1.0 + radius_limit);

    // seed placement: site at origin, first edge along +x
    let [v, p, q] = rotate_to_front(mesh.triangles()[seed], site);
    let l = |u: usize, w: usize| mesh.length_between(u, w).expect("face edge").as_f64();
    let (lvp, lvq, lpq) = (l(v, p), l(v, q), l(p, q));
    let cos_a = ((lvp * lvp + lvq * lvq - lpq * lpq) / (2.0 * lvp * lvq)).clamp(-1.0, 1.0);
    let sin_a = (1.0 - cos_a * cos_a).max(0.0).sqrt();
    pos.insert(v, [0.0, 0.0]);
    pos.insert(p, [lvp, 0.0]);
    pos.insert(q, [lvq * cos_a, lvq * sin_a]);
    tris.insert(seed);

    let mut queue: VecDeque<usize> = VecDeque::from([seed]);
    while let Some(t) = queue.pop_front() {
        let [a, b, c] = mesh.triangles()[t];
        for (u, w) in [(a, b), (b, c), (c, a)] {
            let pu = pos[&u];
            let pw = pos[&w];
            if pu[0].hypot(pu[1]).min(pw[0].hypot(pw[1])) > radius_limit {
                continue;
            }
            let e = mesh.edge_index(u, w).expect("face edge");
            let Some(nb) = mesh.edge_triangles(e).into_iter().flatten().find(|&s| s != t)
            else {
                continue;
            };
            if tris.contains(&nb) {
                continue;
            }
            // neighbor contains the directed edge (w, u); its third vertex
            // lies to the left of w -> u
            let third = mesh.triangles()[nb]
                .into_iter()
                .find(|&x| x != u && x != w)
                .expect("triangle has a third corner");
            let l_wu = l(w, u);
            let l_wt = l(w, third);
            let l_ut = l(u, third);
            let cos_b = ((l_wu * l_wu + l_wt * l_wt - l_ut * l_ut) / (2.0 * l_wu * l_wt))
                .clamp(-1.0, 1.0);
            let sin_b = (1.0 - cos_b * cos_b).max(0.0).sqrt();
            let ux = [(pu[0] - pw[0]) / l_wu, (pu[1] - pw[1]) / l_wu];
            let nx = [-ux[1], ux[0]];
            let pt = [
                pw[0] + l_wt * (cos_b * ux[0] + sin_b * nx[0]),
                pw[1] + l_wt * (cos_b * ux[1] + sin_b * nx[1]),
            ];
            if let Some(&old) = pos.get(&third) {
                if dist2(old, pt) > tol {
                    return Err(Error::geometry(
                        "site neighborhood is not developable (curvature inside the patch); \
                         move the sites or shrink eps",
                    ));
                }
            } else {
                pos.insert(third, pt);
            }
            tris.insert(nb);
            queue.push_back(nb);
        }
    }
    Ok(Patch { pos, tris })
}

struct Excision {
    removed_tris: BTreeSet<usize>,
    removed_verts: BTreeSet<usize>,
    /// rim cycle, counterclockwise around the hole in the developed chart
    rim_ids: Vec<usize>,
    rim_pos: Vec<[f64; 2]>,
    rim_angles: Vec<f64>,
    /// original mesh lengths of rim edges (i, i+1)
    rim_chords: Vec<f64>,
}

fn excise<T: Scalar>(mesh: &TriangleMesh<T>, patch: &Patch, eps: f64) -> Result<Excision> {
    let cut = EXCISION_FACTOR * eps;
    let removed_verts: BTreeSet<usize> = patch
        .pos
        .iter()
        .filter(|(_, p)| p[0].hypot(p[1]) < cut)
        .map(|(&v, _)| v)
        .collect();
    let mut removed_tris: BTreeSet<usize> = BTreeSet::new();
    for &v in &removed_verts {
        for &(_, e) in mesh.neighbors(v) {
            for t in mesh.edge_triangles(e).into_iter().flatten() {
                let tri = mesh.triangles()[t];
                if tri.iter().any(|x| removed_verts.contains(x)) {
                    removed_tris.insert(t);
                }
            }
        }
    }
    for &t in &removed_tris {
        if !patch.tris.contains(&t) {
            return Err(Error::geometry(
                "excision region escaped the developed patch; mesh too coarse near the site",
            ));
        }
        if mesh.region_tags().contains_key(&t) {
            return Err(Error::geometry("excision overlaps a tagged region"));
        }
        if mesh.triangles()[t].iter().any(|&v| mesh.is_boundary_vertex(v)) {
            return Err(Error::geometry("excision touches the mesh boundary"));
        }
    }

    // rim: directed edges of removed faces whose other side is kept
    let mut next: BTreeMap<usize, usize> = BTreeMap::new();
    for &t in &removed_tris {
        let [a, b, c] = mesh.triangles()[t];
        for (u, w) in [(a, b), (b, c), (c, a)] {
            let e = mesh.edge_index(u, w).expect("face edge");
            let other = mesh
                .edge_triangles(e)
                .into_iter()
                .flatten()
                .find(|&s| s != t);
            let kept = other.map_or(false, |s| !removed_tris.contains(&s));
            if kept {
                if next.insert(u, w).is_some() {
                    return Err(Error::geometry("excision rim is not a simple cycle"));
                }
            }
        }
    }
    if next.len() < 3 {
        return Err(Error::geometry("excision rim degenerate"));
    }
    let start = *next.keys().next().unwrap();
    let mut rim = vec![start];
    let mut cur = start;
    loop {
        let nxt = *next
            .get(&cur)
            .ok_or_else(|| Error::geometry("excision rim does not close"))?;
        if nxt == start {
            break;
        }
        rim.push(nxt);
        if rim.len() > next.len() {
            return Err(Error::geometry("excision rim walk diverges"));
        }
        cur = nxt;
    }
    if rim.len() != next.len() {
        return Err(Error::geometry("excision rim has several components"));
    }

    // rotate the cycle to start at the smallest normalized angle, then
    // unwrap angles monotonically; the walk must wind once counterclockwise
    let raw: Vec<f64> = rim
        .iter()
        .map(|v| {
            let p = patch.pos[v];
            p[1].atan2(p[0]).rem_euclid(TAU)
        })
        .collect();
    let start_slot = (0..rim.len())
        .min_by(|&i, &j| raw[i].total_cmp(&raw[j]))
        .unwrap();
    rim.rotate_left(start_slot);
    let mut raw = raw;
    raw.rotate_left(start_slot);
    let mut angles = vec![raw[0]];
    for k in 1..rim.len() {
        let mut d = raw[k] - raw[k - 1];
        while d <= -PI {
            d += TAU;
        }
        while d > PI {
            d -= TAU;
        }
        angles.push(angles[k - 1] + d.max(1e-9));
    }
    let closing = {
        let mut d = raw[0] + TAU - raw[rim.len() - 1].rem_euclid(TAU);
        while d <= -PI {
            d += TAU;
        }
        while d > PI {
            d -= TAU;
        }
        d
    };
    let winding = angles[rim.len() - 1] + closing - angles[0];
    if (winding - TAU).abs() > 0.02 * TAU {
        return Err(Error::geometry("excision rim does not wind once around the site"));
    }

    let rim_pos: Vec<[f64; 2]> = rim.iter().map(|v| patch.pos[v]).collect();
    let rim_chords: Vec<f64> = (0..rim.len())
        .map(|i| {
            mesh.length_between(rim[i], rim[(i + 1) % rim.len()])
                .expect("rim edge")
                .as_f64()
        })
        .collect();
    Ok(Excision {
        removed_tris,
        removed_verts,
        rim_ids: rim,
        rim_pos,
        rim_angles: angles,
        rim_chords,
    })
}

/// Cuts eps-disks at two interior sites and glues in a flat cylinder of
/// circumference exactly 2π·eps and height `cyl_len`, raising the genus by
/// one. The cylinder triangles are tagged `handle-cylinder-<index>`; the
/// boundary polygon is untouched. Sites must be ≥ 4·eps apart and ≥ 4·eps
/// from the boundary in the graph metric.
pub fn attach_handle<T: Scalar>(
    mesh: &TriangleMesh<T>,
    site_a: usize,
    site_b: usize,
    eps: T,
    cyl_len: T,
) -> Result<TriangleMesh<T>> {
    attach_handle_with_map(mesh, site_a, site_b, eps, cyl_len).map(|(m, _)| m)
}

/// As [`attach_handle`], also returning the vertex renumbering: entry `v`
/// is the new id of old vertex `v`, or `None` if the excision removed it.
/// Lets a caller place further handles at sites chosen on the input mesh.
pub fn attach_handle_with_map<T: Scalar>(
    mesh: &TriangleMesh<T>,
    site_a: usize,
    site_b: usize,
    eps: T,
    cyl_len: T,
) -> Result<(TriangleMesh<T>, Vec<Option<usize>>)> {
    let epsf = eps.as_f64();
    let cylf = cyl_len.as_f64();
    if site_a >= mesh.n_vertices() || site_b >= mesh.n_vertices() || site_a == site_b {
        return Err(Error::invalid_input("handle sites must be two distinct vertices"));
    }
    if !(epsf > 0.0) || !epsf.is_finite() || !(cylf > 0.0) || !cylf.is_finite() {
        return Err(Error::invalid_input("eps and cyl_len must be positive"));
    }
    if mesh.is_boundary_vertex(site_a) || mesh.is_boundary_vertex(site_b) {
        return Err(Error::invalid_input("handle sites must be interior vertices"));
    }
    if !mesh.boundary_loop().is_empty() {
        let d_gamma = geodesic_distances(mesh, mesh.boundary_loop());
        if d_gamma[site_a] < 4.0 * epsf || d_gamma[site_b] < 4.0 * epsf {
            return Err(Error::invalid_input("handle sites closer than 4·eps to the boundary"));
        }
    }
    if geodesic_distances(mesh, &[site_a])[site_b] < 4.0 * epsf {
        return Err(Error::invalid_input("handle sites closer than 4·eps to each other"));
    }

    let local_h = |site: usize| -> f64 {
        mesh.neighbors(site)
            .iter()
            .map(|&(_, e)| mesh.edge_length(e).as_f64())
            .fold(0.0, f64::max)
    };
    // cover the excision disk plus the rim stars, but no farther: the mesh
    // may be legitimately curved away from the sites (earlier handles)
    let limit_a = EXCISION_FACTOR * epsf + 3.0 * local_h(site_a);
    let limit_b = EXCISION_FACTOR * epsf + 3.0 * local_h(site_b);
    let patch_a = develop_patch(mesh, site_a, limit_a)?;
    let patch_b = develop_patch(mesh, site_b, limit_b)?;
    let exc_a = excise(mesh, &patch_a, epsf)?;
    let exc_b = excise(mesh, &patch_b, epsf)?;

    if exc_a.removed_verts.intersection(&exc_b.removed_verts).next().is_some()
        || exc_a.removed_tris.intersection(&exc_b.removed_tris).next().is_some()
        || exc_a.rim_ids.iter().any(|v| exc_b.rim_ids.contains(v))
    {
        return Err(Error::geometry(
            "excision disks overlap; separate the sites or shrink eps",
        ));
    }

    // cylinder dimensions: circumference exactly 2π·eps, k-gon side s
    let mean_chord = {
        let total: f64 = exc_a.rim_chords.iter().chain(exc_b.rim_chords.iter()).sum();
        total / (exc_a.rim_chords.len() + exc_b.rim_chords.len()) as f64
    };
    let circumference = TAU * epsf;
    let k = ((circumference / mean_chord).round() as usize).max(8);
    let side = circumference / k as f64;
    let r_gon = side / (2.0 * (PI / k as f64).sin());
    let rows = ((cylf * k as f64 / circumference).round() as usize).max(1);
    let row_h = cylf / rows as f64;
    let diag = side.hypot(row_h);

    // vertex renumbering: kept old vertices first, then the new blocks
    let mut remap = vec![usize::MAX; mesh.n_vertices()];
    let mut kept = 0usize;
    for v in 0..mesh.n_vertices() {
        if !exc_a.removed_verts.contains(&v) && !exc_b.removed_verts.contains(&v) {
            remap[v] = kept;
            kept += 1;
        }
    }
    let gon_a: Vec<usize> = (kept..kept + k).collect();
    let gon_b: Vec<usize> = (kept + k..kept + 2 * k).collect();
    let cyl_base = kept + 2 * k;
    let n_new_vertices = cyl_base + (rows - 1) * k;

    let mut faces: Vec<FaceSpec<T>> = Vec::new();
    let mut tags: BTreeMap<usize, String> = BTreeMap::new();
    let specs = mesh.face_specs();
    for (t, (corners, lens)) in specs.into_iter().enumerate() {
        if exc_a.removed_tris.contains(&t) || exc_b.removed_tris.contains(&t) {
            continue;
        }
        if let Some(tag) = mesh.region_tags().get(&t) {
            tags.insert(faces.len(), tag.clone());
        }
        faces.push((corners.map(|v| remap[v]), lens));
    }

    // transition bands: regular k-gon (inner) to the excision rim (outer)
    let gon_angles: Vec<f64> = (0..k).map(|i| TAU * i as f64 / k as f64).collect();
    let gon_pos: Vec<[f64; 2]> = gon_angles
        .iter()
        .map(|&th| [r_gon * th.cos(), r_gon * th.sin()])
        .collect();
    let gon_chords = vec![side; k];
    for (exc, gon) in [(&exc_a, &gon_a), (&exc_b, &gon_b)] {
        let rim_new: Vec<usize> = exc.rim_ids.iter().map(|&v| remap[v]).collect();
        let inner = RingRef {
            ids: gon,
            angles: &gon_angles,
            pos: &gon_pos,
            chords: Some(&gon_chords),
        };
        let outer = RingRef {
            ids: &rim_new,
            angles: &exc.rim_angles,
            pos: &exc.rim_pos,
            chords: Some(&exc.rim_chords),
        };
        band_faces(&inner, &outer, &mut faces);
    }

    // the cylinder, far end index-reversed so the glued surface stays
    // consistently oriented
    let handle_index = {
        let mut names: BTreeSet<&str> = BTreeSet::new();
        for tag in mesh.region_tags().values() {
            if tag.starts_with(HANDLE_TAG_PREFIX) {
                names.insert(tag.as_str());
            }
        }
        names.len()
    };
    let tag = format!("{HANDLE_TAG_PREFIX}{handle_index}");
    let col = |row: usize, i: usize| -> usize {
        let i = i % k;
        if row == 0 {
            gon_a[i]
        } else if row == rows {
            gon_b[(k - i) % k]
        } else {
            cyl_base + (row - 1) * k + i
        }
    };
    for row in 0..rows {
        for i in 0..k {
            tags.insert(faces.len(), tag.clone());
            faces.push((
                [col(row, i), col(row, i + 1), col(row + 1, i + 1)],
                [side, row_h, diag].map(T::of),
            ));
            tags.insert(faces.len(), tag.clone());
            faces.push((
                [col(row, i), col(row + 1, i + 1), col(row + 1, i)],
                [diag, side, row_h].map(T::of),
            ));
        }
    }

    let out = TriangleMesh::from_faces(n_new_vertices, &faces, tags)?;
    let expected = mesh.euler_genus()? + 1;
    if out.euler_genus()? != expected {
        return Err(Error::geometry("handle attachment did not raise the genus by one"));
    }
    let vertex_map = remap
        .into_iter()
        .map(|v| (v != usize::MAX).then_some(v))
        .collect();
    Ok((out, vertex_map))
}

//! Surface generators. All of them lay vertices out in a planar chart,
//! compute edge lengths analytically where uniformity matters, and return
//! pure-metric meshes. Same-ring chords are evaluated once per ring so that
//! generated boundary loops are uniform to the last bit.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{FaceSpec, TriangleMesh};

/// Tag attached to the product-cylinder band of [`make_flat_annulus`] and
/// [`make_flat_cylinder`] outputs.
pub const ANNULUS_TAG: &str = "annulus";

pub(crate) fn dist2(p: [f64; 2], q: [f64; 2]) -> f64 {
    (p[0] - q[0]).hypot(p[1] - q[1])
}

/// One closed vertex ring of a band triangulation, listed counterclockwise.
pub(crate) struct RingRef<'a> {
    pub ids: &'a [usize],
    /// strictly increasing within one turn; angles[0] may sit anywhere in
    /// [0, 2π), later entries unwrap past it
    pub angles: &'a [f64],
    pub pos: &'a [[f64; 2]],
    /// exact length of edge (i, i+1 mod n); None → from positions
    pub chords: Option<&'a [f64]>,
}

impl<'a> RingRef<'a> {
    fn len(&self) -> usize {
        self.ids.len()
    }
    fn angle_at(&self, slot: usize) -> f64 {
        let n = self.len();
        self.angles[slot % n] + TAU * (slot / n) as f64
    }
    fn chord_at(&self, i: usize) -> f64 {
        let n = self.len();
        match self.chords {
            Some(c) => c[i % n],
            None => dist2(self.pos[i % n], self.pos[(i + 1) % n]),
        }
    }
}

/// Triangulates the annular band between ring `a` (inner) and ring `b`
/// (outer) by the merge walk on vertex angles: whichever ring's next vertex
/// comes first in angle is advanced, so rings of different sizes mesh
/// cleanly. Produces `a.len() + b.len()` CCW triangles.
pub(crate) fn band_faces<T: Scalar>(a: &RingRef<'_>, b: &RingRef<'_>, out: &mut Vec<FaceSpec<T>>) {
    let (na, nb) = (a.len(), b.len());
    let mut i = 0usize;
    let mut j = 0usize;
    while i < na || j < nb {
        let advance_inner = j == nb || (i < na && a.angle_at(i + 1) <= b.angle_at(j + 1));
        if advance_inner {
            let lens = [
                dist2(b.pos[j % nb], a.pos[(i + 1) % na]),
                a.chord_at(i),
                dist2(a.pos[i % na], b.pos[j % nb]),
            ];
            out.push((
                [b.ids[j % nb], a.ids[(i + 1) % na], a.ids[i % na]],
                lens.map(T::of),
            ));
            i += 1;
        } else {
            let lens = [
                b.chord_at(j),
                dist2(b.pos[(j + 1) % nb], a.pos[i % na]),
                dist2(a.pos[i % na], b.pos[j % nb]),
            ];
            out.push((
                [b.ids[j % nb], b.ids[(j + 1) % nb], a.ids[i % na]],
                lens.map(T::of),
            ));
            j += 1;
        }
    }
}

/// CCW fan from a center vertex to its first ring; `spoke` is the exact
/// center-to-ring length.
fn fan_faces<T: Scalar>(center: usize, ring: &RingRef<'_>, spoke: f64, out: &mut Vec<FaceSpec<T>>) {
    let n = ring.len();
    for i in 0..n {
        out.push((
            [center, ring.ids[i], ring.ids[(i + 1) % n]],
            [spoke, ring.chord_at(i), spoke].map(T::of),
        ));
    }
}

fn polar_ring(n: usize, radius: f64) -> (Vec<[f64; 2]>, Vec<f64>) {
    let mut pos = Vec::with_capacity(n);
    let mut ang = Vec::with_capacity(n);
    for i in 0..n {
        let th = TAU * i as f64 / n as f64;
        ang.push(th);
        pos.push([radius * th.cos(), radius * th.sin()]);
    }
    (pos, ang)
}

fn exact_polygon_chord(n: usize, radius: f64) -> f64 {
    2.0 * radius * (PI / n as f64).sin()
}

struct DiskLayout {
    faces_len: Vec<usize>, // per-ring vertex counts
    radii: Vec<f64>,
}

fn disk_ring_schedule(n_boundary: usize, n_rings: usize, radius: f64) -> DiskLayout {
    let mut counts = Vec::with_capacity(n_rings);
    let mut radii = Vec::with_capacity(n_rings);
    for j in 1..=n_rings {
        let c = ((n_boundary as f64) * j as f64 / n_rings as f64).round() as usize;
        counts.push(c.max(4));
        radii.push(radius * j as f64 / n_rings as f64);
    }
    DiskLayout {
        faces_len: counts,
        radii,
    }
}

/// Planar disk of the given radius: a center vertex, `n_rings` concentric
/// rings with counts graded toward `n_boundary`, and a regular-polygon
/// boundary inscribed in the radius circle. Vertex 0 is the center; the
/// boundary ring occupies the final id block.
pub fn make_flat_disk<T: Scalar>(
    n_boundary: usize,
    n_rings: usize,
    radius: T,
) -> Result<TriangleMesh<T>> {
    make_flat_disk_with_layout(n_boundary, n_rings, radius).map(|(m, _)| m)
}

/// As [`make_flat_disk`], also returning the planar chart positions used
/// for the layout (one `[x, y]` per vertex).
pub fn make_flat_disk_with_layout<T: Scalar>(
    n_boundary: usize,
    n_rings: usize,
    radius: T,
) -> Result<(TriangleMesh<T>, Vec<[T; 2]>)> {
    if n_boundary < 8 {
        return Err(Error::invalid_config("disk needs at least 8 boundary vertices"));
    }
    if n_rings < 2 {
        return Err(Error::invalid_config("disk needs at least 2 rings"));
    }
    let r = radius.as_f64();
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::invalid_config("disk radius must be positive"));
    }

    let layout = disk_ring_schedule(n_boundary, n_rings, r);
    let mut positions: Vec<[f64; 2]> = vec![[0.0, 0.0]];
    let mut ring_ids: Vec<Vec<usize>> = Vec::with_capacity(n_rings);
    let mut ring_pos: Vec<Vec<[f64; 2]>> = Vec::with_capacity(n_rings);
    let mut ring_ang: Vec<Vec<f64>> = Vec::with_capacity(n_rings);
    let mut ring_chord: Vec<Vec<f64>> = Vec::with_capacity(n_rings);
    let mut next_id = 1usize;
    for (j, &count) in layout.faces_len.iter().enumerate() {
        let (pos, ang) = polar_ring(count, layout.radii[j]);
        let ids: Vec<usize> = (next_id..next_id + count).collect();
        next_id += count;
        positions.extend_from_slice(&pos);
        // interior rings are chordal; the boundary ring carries exact arc
        // length so the perimeter is 2πR at every resolution and operators
        // from different samplings of the same disk share a circle
        let seg = if j == n_rings - 1 {
            TAU * layout.radii[j] / count as f64
        } else {
            exact_polygon_chord(count, layout.radii[j])
        };
        ring_chord.push(vec![seg; count]);
        ring_ids.push(ids);
        ring_pos.push(pos);
        ring_ang.push(ang);
    }

    let ring = |j: usize| RingRef {
        ids: &ring_ids[j],
        angles: &ring_ang[j],
        pos: &ring_pos[j],
        chords: Some(&ring_chord[j]),
    };

    let mut faces: Vec<FaceSpec<T>> = Vec::new();
    fan_faces(0, &ring(0), layout.radii[0], &mut faces);
    for j in 0..n_rings - 1 {
        band_faces(&ring(j), &ring(j + 1), &mut faces);
    }

    let mesh = TriangleMesh::from_faces(next_id, &faces, BTreeMap::new())?;
    let positions = positions
        .into_iter()
        .map(|[x, y]| [T::of(x), T::of(y)])
        .collect();
    Ok((mesh, positions))
}

/// Disk of radius `r_outer` whose outer part — between radius `r_inner` and
/// the boundary — is meshed as `n_bands` geometrically spaced rings of
/// `n_circ` vertices each, all tagged [`ANNULUS_TAG`]. Returns the mesh and
/// the tagged triangle ids; the tagged sub-mesh is a discrete round annulus
/// r_inner < |z| < r_outer.
pub fn make_flat_annulus<T: Scalar>(
    r_inner: T,
    r_outer: T,
    n_circ: usize,
    n_bands: usize,
) -> Result<(TriangleMesh<T>, Vec<usize>)> {
    let (ri, ro) = (r_inner.as_f64(), r_outer.as_f64());
    if !(ri > 0.0) || !(ro > ri) || !ro.is_finite() {
        return Err(Error::invalid_config("annulus radii must satisfy 0 < r_inner < r_outer"));
    }
    if n_circ < 8 || n_bands < 1 {
        return Err(Error::invalid_config("annulus needs n_circ ≥ 8 and n_bands ≥ 1"));
    }

    // Fill 0..r_inner like a graded disk so the host mesh stays a disk.
    let m_fill = ((n_circ as f64 / TAU).round() as usize).max(2);
    let mut counts: Vec<usize> = (1..=m_fill)
        .map(|j| (((n_circ * j) as f64 / m_fill as f64).round() as usize).max(4))
        .collect();
    let mut radii: Vec<f64> = (1..=m_fill).map(|j| ri * j as f64 / m_fill as f64).collect();
    // Geometric annulus rings, constant count.
    for t in 1..=n_bands {
        counts.push(n_circ);
        radii.push(ri * (ro / ri).powf(t as f64 / n_bands as f64));
    }
    // Snap the last radius exactly.
    *radii.last_mut().unwrap() = ro;

    let mut ring_ids: Vec<Vec<usize>> = Vec::new();
    let mut ring_pos: Vec<Vec<[f64; 2]>> = Vec::new();
    let mut ring_ang: Vec<Vec<f64>> = Vec::new();
    let mut ring_chord: Vec<Vec<f64>> = Vec::new();
    let mut next_id = 1usize;
    for (j, &count) in counts.iter().enumerate() {
        let (pos, ang) = polar_ring(count, radii[j]);
        ring_ids.push((next_id..next_id + count).collect());
        next_id += count;
        ring_chord.push(vec![exact_polygon_chord(count, radii[j]); count]);
        ring_pos.push(pos);
        ring_ang.push(ang);
    }
    let ring = |j: usize| RingRef {
        ids: &ring_ids[j],
        angles: &ring_ang[j],
        pos: &ring_pos[j],
        chords: Some(&ring_chord[j]),
    };

    let mut faces: Vec<FaceSpec<T>> = Vec::new();
    fan_faces(0, &ring(0), radii[0], &mut faces);
    for j in 0..counts.len() - 1 {
        band_faces(&ring(j), &ring(j + 1), &mut faces);
    }
    let first_annulus_face = faces.len() - 2 * n_circ * n_bands;
    let annulus: Vec<usize> = (first_annulus_face..faces.len()).collect();
    let tags: BTreeMap<usize, String> = annulus
        .iter()
        .map(|&t| (t, ANNULUS_TAG.to_string()))
        .collect();

    let mesh = TriangleMesh::from_faces(next_id, &faces, tags)?;
    Ok((mesh, annulus))
}

/// Closed "pillbox": a flat product cylinder of the given circumference and
/// height, capped by two polygonal cone disks so the mesh is a valid closed
/// surface. The cylinder band is tagged [`ANNULUS_TAG`]; its modulus is
/// exactly height/circumference.
pub fn make_flat_cylinder<T: Scalar>(
    circumference: T,
    height: T,
    n_circ: usize,
    n_rows: usize,
) -> Result<(TriangleMesh<T>, Vec<usize>)> {
    let (c, h) = (circumference.as_f64(), height.as_f64());
    if !(c > 0.0) || !(h > 0.0) {
        return Err(Error::invalid_config("cylinder dimensions must be positive"));
    }
    if n_circ < 8 || n_rows < 1 {
        return Err(Error::invalid_config("cylinder needs n_circ ≥ 8 and n_rows ≥ 1"));
    }
    let n = n_circ;
    let side = c / n as f64;
    let row_h = h / n_rows as f64;
    let diag = side.hypot(row_h);

    // ids: rings then two poles
    let ring_id = |row: usize, i: usize| row * n + (i % n);
    let pole_bottom = (n_rows + 1) * n;
    let pole_top = pole_bottom + 1;

    let mut faces: Vec<FaceSpec<T>> = Vec::new();
    let cap_spoke = c / TAU;
    for i in 0..n {
        faces.push((
            [pole_bottom, ring_id(0, i + 1), ring_id(0, i)],
            [cap_spoke, side, cap_spoke].map(T::of),
        ));
    }
    let first_band_face = faces.len();
    for row in 0..n_rows {
        for i in 0..n {
            faces.push((
                [ring_id(row, i), ring_id(row, i + 1), ring_id(row + 1, i + 1)],
                [side, row_h, diag].map(T::of),
            ));
            faces.push((
                [ring_id(row, i), ring_id(row + 1, i + 1), ring_id(row + 1, i)],
                [diag, side, row_h].map(T::of),
            ));
        }
    }
    let band: Vec<usize> = (first_band_face..faces.len()).collect();
    for i in 0..n {
        faces.push((
            [pole_top, ring_id(n_rows, i), ring_id(n_rows, i + 1)],
            [cap_spoke, side, cap_spoke].map(T::of),
        ));
    }
    let tags: BTreeMap<usize, String> = band.iter().map(|&t| (t, ANNULUS_TAG.to_string())).collect();
    let mesh = TriangleMesh::from_faces(pole_top + 1, &faces, tags)?;
    Ok((mesh, band))
}

/// Index classification on the outer square ring of the torus O-grid.
/// `n ≡ 0 (mod 8)` puts ring vertices exactly on the square's corners at
/// the odd multiples of 45°.
fn seam_canonical(i: usize, n: usize) -> usize {
    let q = n / 8;
    if i == q || i == 3 * q || i == 5 * q || i == 7 * q {
        return q; // all four corners collapse to one vertex
    }
    let partner = if i < q || i > 7 * q {
        (n / 2 + n - i) % n // right side pairs with left at mirrored angle
    } else if i > q && i < 3 * q {
        n - i // top pairs with bottom
    } else if i > 3 * q && i < 5 * q {
        (n / 2 + n - i) % n
    } else {
        n - i
    };
    i.min(partner)
}

/// Flat unit-square torus with a regular `n`-gon hole of the given radius
/// removed around the square's center. The region between the hole circle
/// and the square seam is meshed as an O-grid whose outermost ring lies on
/// the seam and is glued by the torus identifications. Genus 1, one uniform
/// boundary loop of `n` vertices.
pub fn make_torus_with_hole<T: Scalar>(n: usize, hole_radius: T) -> Result<TriangleMesh<T>> {
    let r = hole_radius.as_f64();
    if n < 16 || n % 8 != 0 {
        return Err(Error::invalid_config(
            "torus resolution must be a multiple of 8, at least 16",
        ));
    }
    if !(r > 0.0) || r >= 0.5 {
        return Err(Error::invalid_config(
            "hole radius must lie in (0, 0.5): the hole may not touch the identification seam",
        ));
    }

    let spacing = TAU * r / n as f64;
    let n_r = (((0.5 - r) / spacing).round() as usize).max(2);

    let square_pt = |th: f64| -> [f64; 2] {
        let (c, s) = (th.cos(), th.sin());
        let m = c.abs().max(s.abs());
        [0.5 * c / m, 0.5 * s / m]
    };

    // rings 0..=n_r, ring 0 = hole boundary, ring n_r = seam square
    let mut ring_pos: Vec<Vec<[f64; 2]>> = Vec::with_capacity(n_r + 1);
    let mut angles: Vec<f64> = Vec::with_capacity(n);
    for i in 0..n {
        angles.push(TAU * i as f64 / n as f64);
    }
    for j in 0..=n_r {
        let t = j as f64 / n_r as f64;
        let ring: Vec<[f64; 2]> = angles
            .iter()
            .map(|&th| {
                let sq = square_pt(th);
                [
                    (1.0 - t) * r * th.cos() + t * sq[0],
                    (1.0 - t) * r * th.sin() + t * sq[1],
                ]
            })
            .collect();
        ring_pos.push(ring);
    }

    // ids: inner rings dense, seam ring identified
    let mut seam_ids: Vec<usize> = vec![usize::MAX; n];
    let mut canon_order: Vec<usize> = (0..n).map(|i| seam_canonical(i, n)).collect();
    canon_order.sort_unstable();
    canon_order.dedup();
    for i in 0..n {
        let c = seam_canonical(i, n);
        let rank = canon_order.binary_search(&c).unwrap();
        seam_ids[i] = n * n_r + rank;
    }
    let n_vertices = n * n_r + canon_order.len();

    let hole_chord = vec![exact_polygon_chord(n, r); n];
    let mut faces: Vec<FaceSpec<T>> = Vec::new();
    for j in 0..n_r {
        let ids_a: Vec<usize> = (0..n).map(|i| j * n + i).collect();
        let ids_b: Vec<usize> = if j + 1 == n_r {
            seam_ids.clone()
        } else {
            (0..n).map(|i| (j + 1) * n + i).collect()
        };
        let a = RingRef {
            ids: &ids_a,
            angles: &angles,
            pos: &ring_pos[j],
            chords: if j == 0 { Some(&hole_chord) } else { None },
        };
        let b = RingRef {
            ids: &ids_b,
            angles: &angles,
            pos: &ring_pos[j + 1],
            chords: None,
        };
        band_faces(&a, &b, &mut faces);
    }

    TriangleMesh::from_faces(n_vertices, &faces, BTreeMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_euler_and_boundary() {
        let m: TriangleMesh<f64> = make_flat_disk(256, 32, 1.0).unwrap();
        assert_eq!(m.euler_characteristic(), 1);
        assert_eq!(m.euler_genus().unwrap(), 0);
        assert_eq!(m.boundary_loop().len(), 256);
        assert!((m.boundary_length() - TAU).abs() < 1e-12);
        assert_eq!(m.boundary_spacing_defect(), 0.0);
    }

    #[test]
    fn disk_boundary_block_is_contiguous_and_ordered() {
        let (m, pos): (TriangleMesh<f64>, _) = make_flat_disk_with_layout(16, 3, 1.0).unwrap();
        let b = m.boundary_loop();
        assert_eq!(b.len(), 16);
        // boundary ids are the final block, walked in angle order
        let first = *b.iter().min().unwrap();
        assert_eq!(b[0], first);
        for (k, &v) in b.iter().enumerate() {
            assert_eq!(v, first + k);
            let ang = pos[v][1].atan2(pos[v][0]).rem_euclid(TAU);
            assert!((ang - TAU * k as f64 / 16.0).abs() < 1e-12);
        }
    }

    #[test]
    fn small_disk_is_valid() {
        let m: TriangleMesh<f64> = make_flat_disk(8, 2, 1.0).unwrap();
        assert_eq!(m.euler_genus().unwrap(), 0);
    }

    #[test]
    fn disk_rejects_bad_parameters() {
        assert!(make_flat_disk::<f64>(4, 2, 1.0).is_err());
        assert!(make_flat_disk::<f64>(8, 1, 1.0).is_err());
        assert!(make_flat_disk::<f64>(8, 2, -1.0).is_err());
    }

    #[test]
    fn annulus_region_counts() {
        let (m, region): (TriangleMesh<f64>, _) = make_flat_annulus(1.0, 2.0, 32, 8).unwrap();
        assert_eq!(m.euler_characteristic(), 1);
        assert_eq!(region.len(), 2 * 32 * 8);
        assert_eq!(m.region_tags().len(), region.len());
        assert_eq!(m.boundary_loop().len(), 32);
        assert_eq!(m.boundary_spacing_defect(), 0.0);
    }

    #[test]
    fn cylinder_is_closed_genus_zero() {
        let (m, band): (TriangleMesh<f64>, _) =
            make_flat_cylinder(0.4, 0.5, 16, 5).unwrap();
        assert!(m.is_closed());
        assert_eq!(m.euler_characteristic(), 2);
        assert_eq!(m.euler_genus().unwrap(), 0);
        assert_eq!(band.len(), 2 * 16 * 5);
    }

    #[test]
    fn torus_with_hole_topology() {
        let m: TriangleMesh<f64> = make_torus_with_hole(64, 0.2).unwrap();
        assert_eq!(m.euler_characteristic(), -1);
        assert_eq!(m.euler_genus().unwrap(), 1);
        assert_eq!(m.boundary_loop().len(), 64);
        assert_eq!(m.boundary_spacing_defect(), 0.0);
    }

    #[test]
    fn torus_rejects_bad_parameters() {
        assert!(make_torus_with_hole::<f64>(60, 0.2).is_err());
        assert!(make_torus_with_hole::<f64>(64, 0.5).is_err());
        assert!(make_torus_with_hole::<f64>(8, 0.2).is_err());
    }

    #[test]
    fn seam_canonical_is_involutive_and_consistent() {
        let n = 64;
        for i in 0..n {
            let c = seam_canonical(i, n);
            assert_eq!(seam_canonical(c, n), c, "canonical must be a fixed point");
        }
        // corners all collapse together
        assert_eq!(seam_canonical(8, n), seam_canonical(24, n));
        assert_eq!(seam_canonical(40, n), seam_canonical(56, n));
        assert_eq!(seam_canonical(8, n), seam_canonical(56, n));
    }
}

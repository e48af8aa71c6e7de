//! Conformal moduli of annular regions and the geodesic-length bound they
//! imply.
//!
//! An embedded annulus of modulus m around a closed curve forces the
//! hyperbolic length of the curve's geodesic representative below π/m, so
//! a family of handles whose tube moduli blow up certifies geodesics
//! shrinking to zero — without ever uniformizing the surface.  The handle
//! tubes written by the surgery code are flat product cylinders, where the
//! 0/1 two-cycle Dirichlet solve is exact and the modulus comes out as
//! height/circumference to solver precision.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io::Write;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::mesh::{corner_angles, TriangleMesh, HANDLE_TAG_PREFIX};
use crate::scalar::Scalar;
use crate::solve::SpdFactor;
use crate::sparse::SparseSymmetricOperator;

/// Triangulated annulus: a face subset of some surface, re-indexed to
/// local vertices, with exactly two boundary cycles.  Carries only edge
/// lengths, like the meshes it is cut from.
#[derive(Debug, Clone)]
pub struct AnnulusRegion<T> {
    label: String,
    n_vertices: usize,
    faces: Vec<([usize; 3], [T; 3])>,
    cycles: [Vec<usize>; 2],
}

impl<T: Scalar> AnnulusRegion<T> {
    /// Builds a region from raw local faces (corner ids + edge lengths in
    /// (ab, bc, ca) order) and validates the annulus axioms: connected,
    /// χ = 0, manifold edges, exactly two disjoint boundary cycles.
    pub fn from_faces(
        n_vertices: usize,
        faces: Vec<([usize; 3], [T; 3])>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let label = label.into();
        if faces.is_empty() {
            return Err(Error::invalid_input("annulus region has no faces"));
        }
        let mut seen = vec![false; n_vertices];
        for &([a, b, c], lens) in &faces {
            if a >= n_vertices || b >= n_vertices || c >= n_vertices {
                return Err(Error::invalid_input("face corner out of range"));
            }
            if a == b || b == c || a == c {
                return Err(Error::invalid_input("degenerate face"));
            }
            if lens.iter().any(|l| !(*l > T::zero()) || !l.is_finite()) {
                return Err(Error::invalid_input("non-positive edge length"));
            }
            seen[a] = true;
            seen[b] = true;
            seen[c] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::invalid_input("region has isolated vertices"));
        }

        // edge → incident face count; > 2 breaks the surface axiom
        let mut edge_faces: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for &([a, b, c], _) in &faces {
            for (u, v) in [(a, b), (b, c), (c, a)] {
                let key = (u.min(v), u.max(v));
                *edge_faces.entry(key).or_insert(0) += 1;
            }
        }
        if edge_faces.values().any(|&c| c > 2) {
            return Err(Error::invalid_input("an edge borders more than two faces"));
        }

        // connectivity across shared edges
        let mut edge_to_faces: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (t, &([a, b, c], _)) in faces.iter().enumerate() {
            for (u, v) in [(a, b), (b, c), (c, a)] {
                edge_to_faces.entry((u.min(v), u.max(v))).or_default().push(t);
            }
        }
        let mut visited = vec![false; faces.len()];
        let mut queue = VecDeque::from([0usize]);
        visited[0] = true;
        while let Some(t) = queue.pop_front() {
            let [a, b, c] = faces[t].0;
            for (u, v) in [(a, b), (b, c), (c, a)] {
                for &s in &edge_to_faces[&(u.min(v), u.max(v))] {
                    if !visited[s] {
                        visited[s] = true;
                        queue.push_back(s);
                    }
                }
            }
        }
        if visited.iter().any(|v| !v) {
            return Err(Error::invalid_input("annulus region is disconnected"));
        }

        let chi = n_vertices as isize - edge_faces.len() as isize + faces.len() as isize;
        if chi != 0 {
            return Err(Error::invalid_input(format!(
                "region has Euler characteristic {chi}, an annulus needs 0"
            )));
        }

        // boundary cycles: edges with a single face, two per vertex
        let mut bnd: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (&(u, v), &count) in &edge_faces {
            if count == 1 {
                bnd.entry(u).or_default().push(v);
                bnd.entry(v).or_default().push(u);
            }
        }
        if bnd.values().any(|nbrs| nbrs.len() != 2) {
            return Err(Error::invalid_input("boundary is not a union of simple cycles"));
        }
        let mut remaining: BTreeSet<usize> = bnd.keys().copied().collect();
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        while let Some(&start) = remaining.iter().next() {
            let mut cycle = vec![start];
            remaining.remove(&start);
            let mut prev = start;
            let mut cur = bnd[&start][0];
            while cur != start {
                cycle.push(cur);
                remaining.remove(&cur);
                let nbrs = &bnd[&cur];
                let next = if nbrs[0] == prev { nbrs[1] } else { nbrs[0] };
                prev = cur;
                cur = next;
            }
            cycles.push(cycle);
        }
        if cycles.len() != 2 {
            return Err(Error::invalid_input(format!(
                "region has {} boundary cycles, an annulus needs exactly 2",
                cycles.len()
            )));
        }
        let mut it = cycles.into_iter();
        let cycles = [it.next().unwrap(), it.next().unwrap()];

        Ok(AnnulusRegion { label, n_vertices, faces, cycles })
    }

    /// Cuts the faces `tris` out of `mesh` and re-indexes them locally.
    pub fn from_triangles(
        mesh: &TriangleMesh<T>,
        tris: &[usize],
        label: impl Into<String>,
    ) -> Result<Self> {
        if tris.is_empty() {
            return Err(Error::invalid_input("annulus region has no faces"));
        }
        let mut dedup: BTreeSet<usize> = BTreeSet::new();
        for &t in tris {
            if t >= mesh.triangles().len() {
                return Err(Error::invalid_input(format!("triangle {t} out of range")));
            }
            if !dedup.insert(t) {
                return Err(Error::invalid_input(format!("triangle {t} listed twice")));
            }
        }
        let mut local: BTreeMap<usize, usize> = BTreeMap::new();
        let mut faces = Vec::with_capacity(tris.len());
        for &t in &dedup {
            let corners = mesh.triangles()[t];
            let lens = mesh.triangle_lengths(t);
            let mapped = corners.map(|v| {
                let next = local.len();
                *local.entry(v).or_insert(next)
            });
            faces.push((mapped, lens));
        }
        Self::from_faces(local.len(), faces, label)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    /// The two boundary cycles, as local vertex loops.
    pub fn cycles(&self) -> [&[usize]; 2] {
        [&self.cycles[0], &self.cycles[1]]
    }
}

/// Conformal modulus by the two-cycle Dirichlet solve: u = 0 on one
/// boundary cycle, u = 1 on the other, harmonic in between; the modulus is
/// the reciprocal of the Dirichlet energy ∫|∇u|².
pub fn conformal_modulus<T: Scalar>(region: &AnnulusRegion<T>) -> Result<T> {
    let n = region.n_vertices;
    let half = T::of(0.5);
    let mut triplets: Vec<(usize, usize, T)> = Vec::with_capacity(region.faces.len() * 9);
    for (t, &([a, b, c], lens)) in region.faces.iter().enumerate() {
        let [alpha, beta, gamma] = corner_angles(lens);
        for (u, v, ang) in [(b, c, alpha), (c, a, beta), (a, b, gamma)] {
            let w = half * ang.cos() / ang.sin();
            if !w.is_finite() {
                return Err(Error::geometry(format!(
                    "face {t} produced a non-finite cotangent weight"
                )));
            }
            triplets.push((u, v, -w));
            triplets.push((u, u, w));
            triplets.push((v, v, w));
        }
    }
    let lap = SparseSymmetricOperator::from_triplets(n, &triplets)?;

    let mut u = vec![T::zero(); n];
    let mut fixed = vec![false; n];
    for &v in &region.cycles[0] {
        fixed[v] = true;
    }
    for &v in &region.cycles[1] {
        u[v] = T::one();
        fixed[v] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&v| !fixed[v]).collect();
    if !free.is_empty() {
        let ag = lap.apply_vec(&u);
        let rhs: Vec<T> = free.iter().map(|&v| -ag[v]).collect();
        let (a_ff, _) = lap.restriction(&free)?;
        let factor = SpdFactor::new(&a_ff)?;
        let x = factor.solve(&a_ff, &rhs)?;
        for (sub, &v) in free.iter().enumerate() {
            u[v] = x[sub];
        }
    }

    let energy = lap.quadratic_form(&u);
    if !(energy > T::zero()) || !energy.is_finite() {
        return Err(Error::Numerical {
            message: "two-cycle solve produced a non-positive Dirichlet energy".into(),
            residual: energy.as_f64(),
        });
    }
    Ok(T::one() / energy)
}

/// Upper bound π/m for the hyperbolic length of the core geodesic of an
/// embedded annulus of modulus m.
pub fn geodesic_length_bound<T: Scalar>(modulus: T) -> Result<T> {
    if !(modulus > T::zero()) {
        return Err(Error::invalid_input(format!(
            "length bound needs a positive modulus, got {}",
            modulus.as_f64()
        )));
    }
    Ok(T::PI() / modulus)
}

/// Collects every handle-cylinder region of a tagged mesh — on a Schottky
/// double the mirror copies (tag suffix `/mirror`) come along — as
/// validated annuli, in tag order.
pub fn handle_annuli_on_double<T: Scalar>(
    double: &TriangleMesh<T>,
) -> Result<Vec<AnnulusRegion<T>>> {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (&t, tag) in double.region_tags() {
        if tag.starts_with(HANDLE_TAG_PREFIX) {
            groups.entry(tag.as_str()).or_default().push(t);
        }
    }
    groups
        .into_iter()
        .map(|(tag, tris)| AnnulusRegion::from_triangles(double, &tris, tag))
        .collect()
}

/// min over the handle annuli of π/modulus; +∞ when the mesh carries no
/// handle tags (nothing forces any geodesic short).
pub fn systole_upper_bound<T: Scalar>(double: &TriangleMesh<T>) -> Result<T> {
    let mut best = T::infinity();
    for region in handle_annuli_on_double(double)? {
        let bound = geodesic_length_bound(conformal_modulus(&region)?)?;
        best = Float::min(best, bound);
    }
    Ok(best)
}

/// (label, modulus, length bound) for every handle annulus, in tag order.
pub fn annulus_table<T: Scalar>(double: &TriangleMesh<T>) -> Result<Vec<(String, T, T)>> {
    handle_annuli_on_double(double)?
        .into_iter()
        .map(|region| {
            let m = conformal_modulus(&region)?;
            let b = geodesic_length_bound(m)?;
            Ok((region.label().to_string(), m, b))
        })
        .collect()
}

/// CSV rows "annulus,modulus,length_bound".
pub fn write_annuli_csv<T: Scalar, W: Write>(w: &mut W, rows: &[(String, T, T)]) -> Result<()> {
    writeln!(w, "annulus,modulus,length_bound")?;
    for (label, m, b) in rows {
        writeln!(w, "{label},{:.16e},{:.16e}", m.as_f64(), b.as_f64())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{
        attach_handle, make_flat_disk, make_flat_disk_with_layout, make_torus_with_hole,
        pick_handle_sites, schottky_double,
    };

    /// Flat product cylinder: k columns, `rows` rows, side × row_h cells.
    fn flat_cylinder(k: usize, rows: usize, side: f64, row_h: f64) -> AnnulusRegion<f64> {
        let diag = side.hypot(row_h);
        let mut faces = Vec::new();
        let at = |row: usize, i: usize| row * k + (i % k);
        for row in 0..rows {
            for i in 0..k {
                faces.push(([at(row, i), at(row, i + 1), at(row + 1, i + 1)], [side, row_h, diag]));
                faces.push(([at(row, i), at(row + 1, i + 1), at(row + 1, i)], [diag, side, row_h]));
            }
        }
        AnnulusRegion::from_faces((rows + 1) * k, faces, "cylinder").unwrap()
    }

    fn handled_disk(eps: f64, cyl_len: f64) -> crate::mesh::TriangleMesh<f64> {
        let m = make_flat_disk::<f64>(64, 24, 2.0).unwrap();
        let (a, b) = pick_handle_sites(&m, eps, &[]).unwrap();
        attach_handle(&m, a, b, eps, cyl_len).unwrap()
    }

    #[test]
    fn flat_cylinder_modulus_is_height_over_circumference() {
        let region = flat_cylinder(24, 10, 0.1, 0.07);
        let m = conformal_modulus(&region).unwrap();
        let exact = 0.7 / 2.4;
        assert!((m - exact).abs() <= 1e-10 * exact, "modulus {m} vs {exact}");

        // modulus-one cylinder: circumference = height, the log image of
        // the round annulus 1 < |z| < e^{2π}
        let region = flat_cylinder(32, 32, 0.2, 0.2);
        let m = conformal_modulus(&region).unwrap();
        assert!((m - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn tagged_handle_cylinder_has_the_generated_modulus() {
        let (eps, cyl_len) = (0.15, 0.5);
        let h = handled_disk(eps, cyl_len);
        let tris: Vec<usize> = h
            .region_tags()
            .iter()
            .filter(|(_, tag)| tag.starts_with(HANDLE_TAG_PREFIX))
            .map(|(&t, _)| t)
            .collect();
        let region = AnnulusRegion::from_triangles(&h, &tris, "handle-cylinder-0").unwrap();
        let m = conformal_modulus(&region).unwrap();
        let exact = cyl_len / (std::f64::consts::TAU * eps);
        assert!((m - exact).abs() <= 1e-10 * exact, "modulus {m} vs {exact}");
    }

    #[test]
    fn round_annulus_modulus_matches_the_logarithm() {
        // cut the 1 < |z| < 2 annulus out of a radius-2 disk
        let (disk, pos) = make_flat_disk_with_layout::<f64>(192, 64, 2.0).unwrap();
        let radius = |v: usize| (pos[v][0].powi(2) + pos[v][1].powi(2)).sqrt();
        let tris: Vec<usize> = (0..disk.triangles().len())
            .filter(|&t| disk.triangles()[t].iter().all(|&v| radius(v) > 1.0 - 1e-9))
            .collect();
        assert!(tris.len() > 8_000, "want ~10k triangles, got {}", tris.len());
        let region = AnnulusRegion::from_triangles(&disk, &tris, "round").unwrap();
        let m = conformal_modulus(&region).unwrap();
        let exact = std::f64::consts::LN_2 / std::f64::consts::TAU;
        let rel = (m - exact).abs() / exact;
        assert!(rel <= 0.01, "relative error {rel:e}");
    }

    #[test]
    fn region_validation_rejects_non_annuli() {
        // a disk: χ = 1, one cycle
        let disk = make_flat_disk::<f64>(16, 4, 1.0).unwrap();
        let all: Vec<usize> = (0..disk.triangles().len()).collect();
        assert!(matches!(
            AnnulusRegion::from_triangles(&disk, &all, "disk"),
            Err(Error::InvalidInput(_))
        ));
        // a closed torus: χ = 0 but no boundary cycles
        let torus = make_torus_with_hole::<f64>(32, 0.2).unwrap();
        let closed = schottky_double(&torus).unwrap().0;
        let all: Vec<usize> = (0..closed.triangles().len()).collect();
        assert!(matches!(
            AnnulusRegion::from_triangles(&closed, &all, "torus"),
            Err(Error::InvalidInput(_))
        ));
        // two disjoint cylinders in one region
        let one = flat_cylinder(8, 2, 0.1, 0.1);
        let mut faces = one.faces.clone();
        let off = one.n_vertices();
        faces.extend(
            one.faces
                .iter()
                .map(|&([a, b, c], lens)| ([a + off, b + off, c + off], lens)),
        );
        assert!(matches!(
            AnnulusRegion::from_faces(2 * off, faces, "pair"),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn doubling_mirrors_every_handle_annulus() {
        let h = handled_disk(0.15, 0.5);
        let (double, _) = schottky_double(&h).unwrap();
        let annuli = handle_annuli_on_double(&double).unwrap();
        assert_eq!(annuli.len(), 2);
        assert_eq!(annuli[0].label(), "handle-cylinder-0");
        assert_eq!(annuli[1].label(), "handle-cylinder-0/mirror");
        let m0 = conformal_modulus(&annuli[0]).unwrap();
        let m1 = conformal_modulus(&annuli[1]).unwrap();
        assert_eq!(m0, m1); // mirror copy has bit-identical lengths

        let plain = make_flat_disk::<f64>(16, 4, 1.0).unwrap();
        let (double, _) = schottky_double(&plain).unwrap();
        assert!(handle_annuli_on_double(&double).unwrap().is_empty());
        assert_eq!(systole_upper_bound(&double).unwrap(), f64::INFINITY);
    }

    #[test]
    fn systole_bound_follows_the_closed_form() {
        let (eps, cyl_len) = (0.05, 0.5);
        let h = handled_disk(eps, cyl_len);
        let (double, _) = schottky_double(&h).unwrap();
        let bound = systole_upper_bound(&double).unwrap();
        let exact = std::f64::consts::PI * std::f64::consts::TAU * eps / cyl_len;
        assert!((bound - exact).abs() <= 1e-10 * exact, "bound {bound} vs {exact}");

        // halving eps halves the bound
        let h2 = handled_disk(2.0 * eps, cyl_len);
        let (double2, _) = schottky_double(&h2).unwrap();
        let bound2 = systole_upper_bound(&double2).unwrap();
        assert!((bound - 0.5 * bound2).abs() <= 1e-10 * bound2);
    }

    #[test]
    fn length_bound_is_pi_over_modulus() {
        assert_eq!(geodesic_length_bound(1.0f64).unwrap(), std::f64::consts::PI);
        assert!((geodesic_length_bound(10.0f64).unwrap() - std::f64::consts::PI / 10.0).abs() < 1e-15);
        assert_eq!(geodesic_length_bound(f64::INFINITY).unwrap(), 0.0);
        assert!(geodesic_length_bound(0.0f64).is_err());
        assert!(geodesic_length_bound(-1.0f64).is_err());
        assert!(geodesic_length_bound(f64::NAN).is_err());
    }

    #[test]
    fn modulus_grows_with_the_annulus_and_survives_uniform_scaling() {
        let h = handled_disk(0.15, 0.5);
        let mut tris: Vec<usize> = h
            .region_tags()
            .iter()
            .filter(|(_, tag)| tag.starts_with(HANDLE_TAG_PREFIX))
            .map(|(&t, _)| t)
            .collect();
        tris.sort_unstable();
        let full = AnnulusRegion::from_triangles(&h, &tris, "full").unwrap();
        let m_full = conformal_modulus(&full).unwrap();

        // drop the last row of cells: a strictly shorter nested cylinder
        let k = full.cycles()[0].len();
        let shorter = &tris[..tris.len() - 2 * k];
        let sub = AnnulusRegion::from_triangles(&h, shorter, "sub").unwrap();
        let m_sub = conformal_modulus(&sub).unwrap();
        assert!(m_sub < m_full, "nested modulus {m_sub} vs {m_full}");

        // uniform conformal scaling is exact: power-of-two factors keep
        // every cotangent bit-identical
        let scaled = h.scale_conformal(&vec![4.0; h.n_vertices()]).unwrap();
        let region_scaled = AnnulusRegion::from_triangles(&scaled, &tris, "scaled").unwrap();
        assert_eq!(conformal_modulus(&region_scaled).unwrap(), m_full);
    }

    #[test]
    fn annulus_csv_lists_handles_in_tag_order() {
        let h = handled_disk(0.15, 0.5);
        let (double, _) = schottky_double(&h).unwrap();
        let rows = annulus_table(&double).unwrap();
        assert_eq!(rows.len(), 2);
        let mut out = Vec::new();
        write_annuli_csv(&mut out, &rows).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("annulus,modulus,length_bound"));
        assert!(lines.next().unwrap().starts_with("handle-cylinder-0,"));
        assert!(lines.next().unwrap().starts_with("handle-cylinder-0/mirror,"));
    }
}

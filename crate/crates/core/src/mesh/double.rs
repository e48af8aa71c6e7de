//! Schottky double: glue a mirror copy of a bordered surface along its
//! boundary, producing a closed surface with an isometric anticonformal
//! involution whose fixed set is the old boundary.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{FaceSpec, Involution, TriangleMesh, MIRROR_TAG_SUFFIX};

/// Doubles a bordered mesh across its boundary. Boundary vertices are
/// shared; each interior vertex gets a mirror partner; each face gets an
/// orientation-reversed mirror face with bit-identical edge lengths. Tagged
/// regions are mirrored with a `/mirror` suffix. Returns the closed mesh
/// together with the swap involution (fixed exactly on the old boundary).
pub fn schottky_double<T: Scalar>(
    mesh: &TriangleMesh<T>,
) -> Result<(TriangleMesh<T>, Involution)> {
    if mesh.boundary_loop().is_empty() {
        return Err(Error::invalid_input(
            "Schottky double requires a mesh with boundary",
        ));
    }
    let n = mesh.n_vertices();
    let mut mirror = vec![usize::MAX; n];
    let mut interior: Vec<usize> = Vec::new();
    for v in 0..n {
        if mesh.is_boundary_vertex(v) {
            mirror[v] = v;
        } else {
            mirror[v] = n + interior.len();
            interior.push(v);
        }
    }
    let n_double = n + interior.len();

    let specs = mesh.face_specs();
    let mut faces: Vec<FaceSpec<T>> = Vec::with_capacity(2 * specs.len());
    let mut tags: BTreeMap<usize, String> = BTreeMap::new();
    for (t, (corners, lens)) in specs.iter().enumerate() {
        if let Some(tag) = mesh.region_tags().get(&t) {
            tags.insert(faces.len(), tag.clone());
        }
        faces.push((*corners, *lens));
    }
    for (t, ([i, j, k], [lij, ljk, lki])) in specs.iter().enumerate() {
        if let Some(tag) = mesh.region_tags().get(&t) {
            tags.insert(faces.len(), format!("{tag}{MIRROR_TAG_SUFFIX}"));
        }
        // reversed orientation: (i, k, j) with the matching side lengths
        faces.push(([mirror[*i], mirror[*k], mirror[*j]], [*lki, *ljk, *lij]));
    }

    let doubled = TriangleMesh::from_faces(n_double, &faces, tags)?;
    if !doubled.is_closed() {
        return Err(Error::geometry("double is not closed"));
    }

    let mut map = vec![usize::MAX; n_double];
    for v in 0..n {
        map[v] = mirror[v];
        if mirror[v] != v {
            map[mirror[v]] = v;
        }
    }
    let tau = Involution::new(map)?;
    Ok((doubled, tau))
}

#[cfg(test)]
mod tests {
    use super::super::generators::{make_flat_disk, make_torus_with_hole};
    use super::*;

    #[test]
    fn double_of_disk_is_sphere() {
        let disk = make_flat_disk(16, 3, 1.0).unwrap();
        let (sphere, tau) = schottky_double(&disk).unwrap();
        assert!(sphere.is_closed());
        assert_eq!(sphere.euler_genus().unwrap(), 0);
        assert_eq!(tau.fixed_points().len(), disk.boundary_loop().len());
        tau.validate_isometry(&sphere).unwrap();
    }

    #[test]
    fn double_of_torus_with_hole_has_genus_two() {
        let m = make_torus_with_hole(24, 0.2).unwrap();
        let (d, tau) = schottky_double(&m).unwrap();
        assert_eq!(d.euler_genus().unwrap(), 2);
        tau.validate_isometry(&d).unwrap();
        // every fixed point is an old boundary vertex
        for v in tau.fixed_points() {
            assert!(m.is_boundary_vertex(v));
        }
    }

    #[test]
    fn double_mirrors_tags() {
        let m = make_torus_with_hole(24, 0.2).unwrap();
        let mut tagged = std::collections::BTreeMap::new();
        tagged.insert(0usize, "patch".to_string());
        let m = TriangleMesh::from_faces(m.n_vertices(), &m.face_specs(), tagged).unwrap();
        let (d, _) = schottky_double(&m).unwrap();
        let names: Vec<&String> = d.region_tags().values().collect();
        assert!(names.iter().any(|t| t.as_str() == "patch"));
        assert!(names.iter().any(|t| t.as_str() == "patch/mirror"));
    }

    #[test]
    fn double_rejects_closed_input() {
        let m = make_torus_with_hole(24, 0.2).unwrap();
        let (d, _) = schottky_double(&m).unwrap();
        assert!(schottky_double(&d).is_err());
    }
}

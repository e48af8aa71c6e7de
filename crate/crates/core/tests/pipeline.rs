//! End-to-end checks through the public API only: file round trips feeding
//! operator assembly, topology read off boundary data, and the symmetry of
//! Green data on the Schottky double.

use dnlab::dn::{
    defect_operator, dn_distance, dn_matrix, estimate_genus, gauge_transform_dn,
    hilbert_transform,
};
use dnlab::harmonic::{
    conjugate_differential, green_difference, involution_pullback_check,
};
use dnlab::harmonic::{polyline_near_vertex_set, trace_level_set};
use dnlab::mesh::{
    attach_handle, make_flat_disk, make_flat_disk_with_layout, pick_handle_sites, read_mesh,
    schottky_double, write_mesh, MeshSections,
};
use dnlab::moduli::systole_upper_bound;
use dnlab::{BeltramiGrid, ComplexGrid};

fn nearest_interior(
    mesh: &dnlab::TriangleMesh,
    pos: &[[f64; 2]],
    x: f64,
    y: f64,
) -> usize {
    (0..mesh.n_vertices())
        .filter(|&v| !mesh.is_boundary_vertex(v))
        .min_by(|&a, &b| {
            let da = (pos[a][0] - x).powi(2) + (pos[a][1] - y).powi(2);
            let db = (pos[b][0] - x).powi(2) + (pos[b][1] - y).powi(2);
            da.partial_cmp(&db).unwrap()
        })
        .unwrap()
}

#[test]
fn surf_round_trip_preserves_mesh_data_and_operators() {
    let disk = make_flat_disk(48, 12, 1.0).unwrap();
    let (a, b) = pick_handle_sites(&disk, 0.12, &[]).unwrap();
    let handled = attach_handle(&disk, a, b, 0.12, 0.4).unwrap();

    // attach one vertex function and one edge differential as payload
    let u: Vec<f64> = (0..handled.n_vertices()).map(|v| (v as f64).sin()).collect();
    let omega = conjugate_differential(&handled, &u).unwrap();
    let sections = MeshSections {
        vertex_functions: vec![u],
        edge_differentials: vec![omega.values().to_vec()],
        mesh: handled,
    };

    let mut first = Vec::new();
    write_mesh(&mut first, &sections).unwrap();
    let back = read_mesh::<f64, _>(first.as_slice()).unwrap();

    // a second write must reproduce the bytes exactly
    let mut second = Vec::new();
    write_mesh(&mut second, &back).unwrap();
    assert_eq!(first, second);

    assert_eq!(back.mesh.n_vertices(), sections.mesh.n_vertices());
    assert_eq!(back.mesh.region_tags(), sections.mesh.region_tags());
    assert_eq!(back.vertex_functions, sections.vertex_functions);

    // identical meshes assemble identical DN matrices
    let before = dn_matrix(&sections.mesh).unwrap();
    let after = dn_matrix(&back.mesh).unwrap();
    assert_eq!(
        before.operator().matrix(),
        after.operator().matrix(),
        "DN assembly must be a pure function of the stored mesh"
    );
}

#[test]
fn boundary_data_sees_the_attached_handle() {
    let (disk, pos) = make_flat_disk_with_layout(128, 32, 2.0).unwrap();
    let dn0 = dn_matrix(&disk).unwrap();
    let d0 = defect_operator(&hilbert_transform(&dn0).unwrap()).unwrap();
    assert_eq!(estimate_genus(&d0, 10.0).unwrap(), 0);

    let sa = nearest_interior(&disk, &pos, -1.16, 0.0);
    let sb = nearest_interior(&disk, &pos, 1.16, 0.0);
    let handled = attach_handle(&disk, sa, sb, 0.2, 0.5).unwrap();
    let dn1 = dn_matrix(&handled).unwrap();
    let d1 = defect_operator(&hilbert_transform(&dn1).unwrap()).unwrap();
    assert_eq!(estimate_genus(&d1, 10.0).unwrap(), 1);

    // the handle moves the DN operator by a visible, finite amount
    let d = dn_distance(&dn0, &dn1).unwrap();
    assert!(d > 1e-3 && d < 1.0, "distance {d}");
}

#[test]
fn rotation_gauge_preserves_fourier_symbols() {
    let disk = make_flat_disk(64, 16, 1.0).unwrap();
    let dn = dn_matrix(&disk).unwrap();
    let n = dn.n();
    let length = dn.total_length();
    let shift = 9usize;
    let h = length / n as f64;
    let reparam = dnlab::BoundaryFunction::new(
        (0..n).map(|i| ((i + shift) % n) as f64 * h).collect(),
        length,
    )
    .unwrap();
    let rho = dnlab::BoundaryFunction::new(vec![1.0; n], length).unwrap();
    let rotated = gauge_transform_dn(&dn, &rho, &reparam).unwrap();
    for k in 0..=4 {
        let a = dn.fourier_symbol(k).unwrap();
        let b = rotated.fourier_symbol(k).unwrap();
        assert!(
            (a - b).abs() <= 1e-10 * (1.0 + a.abs()),
            "symbol {k} moved: {a} vs {b}"
        );
    }
}

#[test]
fn quasiconformal_and_modulus_tools_work_from_the_root_aliases() {
    let mu = dnlab::beltrami::standard_bump(128, 1.0, 0.3).unwrap();
    let sol = dnlab::beltrami::solve_beltrami(&mu, 30, 1e-8).unwrap();
    assert!(sol.residual <= 1e-6);
    assert!((dnlab::beltrami::dilatation(&mu) - 1.3f64 / 0.7).abs() < 1e-12);

    // identity coefficient through the alias types
    let zero = BeltramiGrid::new(ComplexGrid::zeros(32, 1.0).unwrap()).unwrap();
    let id = dnlab::beltrami::solve_beltrami(&zero, 8, 1e-12).unwrap();
    assert_eq!(id.residual, 0.0);

    let disk = make_flat_disk(64, 24, 2.0).unwrap();
    let (a, b) = pick_handle_sites(&disk, 0.1, &[]).unwrap();
    let handled = attach_handle(&disk, a, b, 0.1, 0.5).unwrap();
    let (double, _) = schottky_double(&handled).unwrap();
    let bound = systole_upper_bound(&double).unwrap();
    let exact = std::f64::consts::PI * std::f64::consts::TAU * 0.1 / 0.5;
    assert!((bound - exact).abs() <= 1e-10 * exact);
}

#[test]
fn green_data_on_the_double_is_involution_antisymmetric() {
    let (disk, pos) = make_flat_disk_with_layout(48, 12, 1.0).unwrap();
    let v0 = nearest_interior(&disk, &pos, 0.35, 0.1);
    let (double, tau) = schottky_double(&disk).unwrap();
    let mirror_v0 = tau.apply(v0);
    assert_ne!(v0, mirror_v0);

    let e = green_difference(&double, v0, mirror_v0).unwrap();
    let osc = e.iter().cloned().fold(f64::MIN, f64::max)
        - e.iter().cloned().fold(f64::MAX, f64::min);
    let worst = (0..double.n_vertices())
        .map(|v| (e[tau.apply(v)] + e[v]).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-8 * osc, "antisymmetry defect {worst:e} vs osc {osc:e}");

    let omega = conjugate_differential(&double, &e).unwrap();
    let defect = involution_pullback_check(&double, &tau, &omega).unwrap();
    assert!(defect <= 1e-8 * omega.max_abs());

    // the zero level hugs the fixed curve of the involution
    let polylines = trace_level_set(&double, &e, 0.0).unwrap();
    assert!(!polylines.is_empty());
    assert!(polyline_near_vertex_set(&double, &polylines, &tau.fixed_points()));

    // negative control: two sources on the same side break every check
    let v1 = nearest_interior(&disk, &pos, -0.4, -0.15);
    let skew = green_difference(&double, v0, v1).unwrap();
    let osc_skew = skew.iter().cloned().fold(f64::MIN, f64::max)
        - skew.iter().cloned().fold(f64::MAX, f64::min);
    let worst_skew = (0..double.n_vertices())
        .map(|v| (skew[tau.apply(v)] + skew[v]).abs())
        .fold(0.0, f64::max);
    assert!(worst_skew > 1e-3 * osc_skew, "control defect {worst_skew:e}");
}

//! Level-set tracing by triangle marching. Level curves of a vertex
//! function are polylines whose points live on mesh edges; on a bordered
//! mesh they may terminate on the boundary, otherwise they close up.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;
use crate::scalar::Scalar;

/// A vertex value this close to the level (relative to `osc(u)`) makes the
/// level degenerate, and the level is nudged by [`LEVEL_NUDGE_REL`].
pub const LEVEL_DEGENERATE_REL: f64 = 1e-12;
pub const LEVEL_NUDGE_REL: f64 = 1e-9;
const MAX_NUDGES: usize = 8;

/// A point on edge `edge`, at parameter `t` from the canonical pair's
/// lower vertex: `position = (1−t)·lo + t·hi`, with `t` strictly inside
/// `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelPoint<T> {
    pub edge: usize,
    pub t: T,
}

/// A maximal level-set component: a closed loop or, on bordered meshes,
/// an open arc running boundary to boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelPolyline<T> {
    pub points: Vec<LevelPoint<T>>,
    pub closed: bool,
}

/// Traces the level set `{u = c}` as disjoint polylines. A level passing
/// through a vertex value (within [`LEVEL_DEGENERATE_REL`]·osc) is nudged
/// upward by [`LEVEL_NUDGE_REL`]·osc until regular; a level outside the
/// value range yields no polylines.
pub fn trace_level_set<T: Scalar>(
    mesh: &TriangleMesh<T>,
    u: &[T],
    c: T,
) -> Result<Vec<LevelPolyline<T>>> {
    if u.len() != mesh.n_vertices() {
        return Err(Error::invalid_input(format!(
            "{} vertex values for a mesh with {} vertices",
            u.len(),
            mesh.n_vertices()
        )));
    }
    let lo = u.iter().copied().fold(T::infinity(), T::min);
    let hi = u.iter().copied().fold(T::neg_infinity(), T::max);
    if c < lo || c > hi {
        return Ok(Vec::new());
    }
    let osc = hi - lo;

    let mut level = c;
    let mut regular = false;
    for _ in 0..=MAX_NUDGES {
        if u.iter().all(|&v| (v - level).abs() > T::of(LEVEL_DEGENERATE_REL) * osc) {
            regular = true;
            break;
        }
        level += T::of(LEVEL_NUDGE_REL) * osc;
    }
    if !regular {
        return Err(Error::geometry(
            "could not nudge the level away from vertex values",
        ));
    }

    // crossing parameter per crossed edge (strict sign change only)
    let mut crossing: BTreeMap<usize, T> = BTreeMap::new();
    for (e, &(a, b)) in mesh.edges().iter().enumerate() {
        let (da, db) = (u[a] - level, u[b] - level);
        if (da > T::zero()) != (db > T::zero()) {
            crossing.insert(e, da / (da - db));
        }
    }

    // each triangle with crossings has exactly two of them; connect the pair
    let mut links: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for t in 0..mesh.triangles().len() {
        let crossed: Vec<usize> = mesh
            .triangle_edge_ids(t)
            .into_iter()
            .filter(|e| crossing.contains_key(e))
            .collect();
        match crossed.len() {
            0 => {}
            2 => {
                links.entry(crossed[0]).or_default().push(crossed[1]);
                links.entry(crossed[1]).or_default().push(crossed[0]);
            }
            k => {
                return Err(Error::geometry(format!(
                    "triangle {t} has {k} level crossings at a regular level"
                )))
            }
        }
    }

    let walk = |start: usize, visited: &mut BTreeSet<usize>| -> (Vec<usize>, bool) {
        let mut chain = vec![start];
        visited.insert(start);
        let mut closed = false;
        let mut cur = start;
        'grow: loop {
            for &next in &links[&cur] {
                if next == start && chain.len() > 2 {
                    closed = true;
                    break 'grow;
                }
                if visited.insert(next) {
                    chain.push(next);
                    cur = next;
                    continue 'grow;
                }
            }
            break;
        }
        (chain, closed)
    };

    let mut polylines = Vec::new();
    let mut visited: BTreeSet<usize> = BTreeSet::new();
    // open arcs first: their endpoints are degree-1 (boundary) crossings
    for (&e, ends) in &links {
        if ends.len() == 1 && !visited.contains(&e) {
            let (chain, closed) = walk(e, &mut visited);
            debug_assert!(!closed);
            polylines.push(make_polyline(&crossing, chain, false));
        }
    }
    for &e in links.keys() {
        if !visited.contains(&e) {
            let (chain, closed) = walk(e, &mut visited);
            polylines.push(make_polyline(&crossing, chain, closed));
        }
    }
    // an isolated crossed edge can only come from a triangle bookkeeping bug
    debug_assert_eq!(visited.len(), links.len());
    Ok(polylines)
}

fn make_polyline<T: Scalar>(
    crossing: &BTreeMap<usize, T>,
    chain: Vec<usize>,
    closed: bool,
) -> LevelPolyline<T> {
    LevelPolyline {
        points: chain
            .into_iter()
            .map(|edge| LevelPoint { edge, t: crossing[&edge] })
            .collect(),
        closed,
    }
}

/// One-edge proximity between a traced level set and a vertex set: every
/// polyline point lies on an edge touching the set, and every vertex of
/// the set is touched by some polyline point.
pub fn polyline_near_vertex_set<T: Scalar>(
    mesh: &TriangleMesh<T>,
    polylines: &[LevelPolyline<T>],
    vertices: &[usize],
) -> bool {
    let set: BTreeSet<usize> = vertices.iter().copied().collect();
    let mut touched: BTreeSet<usize> = BTreeSet::new();
    for poly in polylines {
        for p in &poly.points {
            let (a, b) = mesh.edges()[p.edge];
            let mut near = false;
            for v in [a, b] {
                if set.contains(&v) {
                    touched.insert(v);
                    near = true;
                }
            }
            if !near {
                return false;
            }
        }
    }
    touched == set
}

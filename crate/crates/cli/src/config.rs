//! Experiment configuration: strict JSON keyed by an explicit `kind` field.
//!
//! Parsing is two-stage so diagnostics stay sharp: a lenient probe reads the
//! `kind` tag, then the full document is parsed against that kind's schema
//! with unknown fields rejected.  Validation beyond shape (schedules, ranges)
//! lives in the `validate` methods so a config that deserializes but cannot
//! describe a runnable experiment is still refused up front.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dnlab::mesh::{attach_handle_with_map, make_flat_disk_with_layout, make_torus_with_hole};
use dnlab::TriangleMesh;
use serde::{Deserialize, Serialize};

pub const KINDS: &[&str] = &["instability", "genus", "double-symmetry"];

fn default_gap_factor() -> f64 {
    10.0
}

fn default_solver() -> f64 {
    1e-8
}

/// Numerical thresholds shared by the experiment kinds.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative gap a singular-value profile must exhibit before a rank cut
    /// is accepted.
    #[serde(default = "default_gap_factor")]
    pub gap_factor: f64,
    /// Residual / symmetry tolerance for checks that compare two fields.
    #[serde(default = "default_solver")]
    pub solver: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            gap_factor: default_gap_factor(),
            solver: default_solver(),
        }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<()> {
        if !self.gap_factor.is_finite() || self.gap_factor <= 1.0 {
            bail!(
                "tolerances.gap_factor must be a finite value above 1, got {}",
                self.gap_factor
            );
        }
        if !self.solver.is_finite() || self.solver <= 0.0 {
            bail!(
                "tolerances.solver must be a finite positive value, got {}",
                self.solver
            );
        }
        Ok(())
    }
}

/// One handle: two attachment sites in base-disk coordinates, a foot radius,
/// and a cylinder length.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandleSpec {
    pub site_a: [f64; 2],
    pub site_b: [f64; 2],
    pub eps: f64,
    pub cyl_len: f64,
}

impl HandleSpec {
    fn validate(&self) -> Result<()> {
        for c in self.site_a.iter().chain(self.site_b.iter()) {
            if !c.is_finite() {
                bail!("handle site coordinates must be finite");
            }
        }
        if !self.eps.is_finite() || self.eps <= 0.0 {
            bail!("handle eps must be a finite positive value, got {}", self.eps);
        }
        if !self.cyl_len.is_finite() || self.cyl_len <= 0.0 {
            bail!(
                "handle cyl_len must be a finite positive value, got {}",
                self.cyl_len
            );
        }
        Ok(())
    }
}

/// A surface the workbench can build from scratch.
///
/// `surface` selects the generator: `"disk"`, `"torus-with-hole"`, or
/// `"handled-disk"` (a disk with `handles` attached in order).  Fields that
/// do not apply to the chosen generator must be omitted.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    pub surface: String,
    /// Boundary sample count; a power of two so spectral windows nest.
    pub boundary_nodes: usize,
    #[serde(default)]
    pub rings: Option<usize>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub hole_radius: Option<f64>,
    #[serde(default)]
    pub handles: Vec<HandleSpec>,
    #[serde(default)]
    pub label: Option<String>,
}

/// A constructed surface plus the flat layout of its base vertices (present
/// for disk-based surfaces, used to resolve site coordinates).
pub struct BuiltSurface {
    pub mesh: TriangleMesh,
    pub layout: Option<Vec<[f64; 2]>>,
    pub label: String,
}

/// Index of the interior vertex closest to `(x, y)` in the base layout.
pub fn nearest_interior(mesh: &TriangleMesh, layout: &[[f64; 2]], x: f64, y: f64) -> Result<usize> {
    (0..layout.len().min(mesh.n_vertices()))
        .filter(|&v| !mesh.is_boundary_vertex(v))
        .min_by(|&a, &b| {
            let da = (layout[a][0] - x).powi(2) + (layout[a][1] - y).powi(2);
            let db = (layout[b][0] - x).powi(2) + (layout[b][1] - y).powi(2);
            da.partial_cmp(&db).unwrap()
        })
        .context("surface has no interior vertices to place a site on")
}

impl SurfaceSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.boundary_nodes.is_power_of_two() || self.boundary_nodes < 8 {
            bail!(
                "boundary_nodes must be a power of two of at least 8, got {}",
                self.boundary_nodes
            );
        }
        if let Some(r) = self.rings {
            if r < 2 {
                bail!("rings must be at least 2, got {r}");
            }
        }
        for field in [self.radius, self.hole_radius] {
            if let Some(v) = field {
                if !v.is_finite() || v <= 0.0 {
                    bail!("radius fields must be finite and positive, got {v}");
                }
            }
        }
        match self.surface.as_str() {
            "disk" => {
                if self.hole_radius.is_some() {
                    bail!("hole_radius does not apply to a disk");
                }
                if !self.handles.is_empty() {
                    bail!("a plain disk takes no handles; use surface = \"handled-disk\"");
                }
            }
            "torus-with-hole" => {
                if self.rings.is_some() || self.radius.is_some() {
                    bail!("rings/radius do not apply to torus-with-hole");
                }
                if !self.handles.is_empty() {
                    bail!("torus-with-hole takes no handles");
                }
            }
            "handled-disk" => {
                if self.hole_radius.is_some() {
                    bail!("hole_radius does not apply to a handled disk");
                }
                if self.handles.is_empty() {
                    bail!("handled-disk needs at least one entry in handles");
                }
                for h in &self.handles {
                    h.validate()?;
                }
            }
            other => bail!(
                "unknown surface {other:?}; expected one of disk, torus-with-hole, handled-disk"
            ),
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.surface.clone())
    }

    fn disk_rings(&self) -> usize {
        self.rings.unwrap_or((3 * self.boundary_nodes / 16).max(2))
    }

    /// Construct the mesh.  Failures here are configuration errors: the spec
    /// asked for a surface the generators cannot realize.
    pub fn build(&self) -> Result<BuiltSurface> {
        let label = self.label();
        match self.surface.as_str() {
            "disk" => {
                let (mesh, layout) = make_flat_disk_with_layout(
                    self.boundary_nodes,
                    self.disk_rings(),
                    self.radius.unwrap_or(1.0),
                )
                .with_context(|| format!("building surface {label:?}"))?;
                Ok(BuiltSurface {
                    mesh,
                    layout: Some(layout),
                    label,
                })
            }
            "torus-with-hole" => {
                let mesh =
                    make_torus_with_hole(self.boundary_nodes, self.hole_radius.unwrap_or(0.25))
                        .with_context(|| format!("building surface {label:?}"))?;
                Ok(BuiltSurface {
                    mesh,
                    layout: None,
                    label,
                })
            }
            "handled-disk" => {
                let (base, layout) = make_flat_disk_with_layout(
                    self.boundary_nodes,
                    self.disk_rings(),
                    self.radius.unwrap_or(1.0),
                )
                .with_context(|| format!("building surface {label:?}"))?;
                // Sites are resolved against the base disk once, then carried
                // through each surgery's vertex map so later handles can be
                // placed on the already-handled mesh.
                let mut sites = Vec::with_capacity(self.handles.len());
                for (i, h) in self.handles.iter().enumerate() {
                    let va = nearest_interior(&base, &layout, h.site_a[0], h.site_a[1])?;
                    let vb = nearest_interior(&base, &layout, h.site_b[0], h.site_b[1])?;
                    if va == vb {
                        bail!("handle {i} of {label:?}: both sites resolve to one vertex");
                    }
                    sites.push((va, vb));
                }
                let mut mesh = base;
                let mut map: Vec<Option<usize>> = (0..mesh.n_vertices()).map(Some).collect();
                for (i, (h, (va0, vb0))) in self.handles.iter().zip(sites).enumerate() {
                    let site = |v: usize, which: &str| {
                        map[v].ok_or_else(|| {
                            anyhow::anyhow!(
                                "handle {i} of {label:?}: {which} was removed by an earlier surgery; move the handles apart"
                            )
                        })
                    };
                    let va = site(va0, "site_a")?;
                    let vb = site(vb0, "site_b")?;
                    let (next, next_map) = attach_handle_with_map(&mesh, va, vb, h.eps, h.cyl_len)
                        .with_context(|| format!("attaching handle {i} of {label:?}"))?;
                    map = map
                        .into_iter()
                        .map(|m| m.and_then(|v| next_map[v]))
                        .collect();
                    mesh = next;
                }
                Ok(BuiltSurface {
                    mesh,
                    layout: Some(layout),
                    label,
                })
            }
            other => bail!("unknown surface {other:?}"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstabilityConfig {
    pub kind: String,
    /// Base surface; must be a plain disk so the handle sites below have
    /// coordinates to refer to.
    pub base: SurfaceSpec,
    pub site_a: [f64; 2],
    pub site_b: [f64; 2],
    pub cyl_len: f64,
    /// Foot radii, strictly decreasing.
    pub eps: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl InstabilityConfig {
    fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.base.surface != "disk" {
            bail!(
                "instability needs a plain disk base, got surface {:?}",
                self.base.surface
            );
        }
        if !self.cyl_len.is_finite() || self.cyl_len <= 0.0 {
            bail!("cyl_len must be finite and positive, got {}", self.cyl_len);
        }
        for c in self.site_a.iter().chain(self.site_b.iter()) {
            if !c.is_finite() {
                bail!("site coordinates must be finite");
            }
        }
        if self.eps.is_empty() {
            bail!("eps schedule is empty");
        }
        for (i, &e) in self.eps.iter().enumerate() {
            if !e.is_finite() || e <= 0.0 {
                bail!("eps[{i}] must be finite and positive, got {e}");
            }
            if i > 0 && e >= self.eps[i - 1] {
                bail!(
                    "eps schedule must be strictly decreasing; eps[{i}] = {e} is not below eps[{}] = {}",
                    i - 1,
                    self.eps[i - 1]
                );
            }
        }
        self.tolerances.validate()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenusConfig {
    pub kind: String,
    pub surfaces: Vec<SurfaceSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl GenusConfig {
    fn validate(&self) -> Result<()> {
        if self.surfaces.is_empty() {
            bail!("genus experiment needs at least one surface");
        }
        for s in &self.surfaces {
            s.validate()?;
        }
        self.tolerances.validate()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoubleSymmetryConfig {
    pub kind: String,
    /// Bordered surface to double; anything with one boundary loop works.
    pub base: SurfaceSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl DoubleSymmetryConfig {
    fn validate(&self) -> Result<()> {
        self.base.validate()?;
        self.tolerances.validate()
    }
}

#[derive(Debug, Clone)]
pub enum ExperimentConfig {
    Instability(InstabilityConfig),
    Genus(GenusConfig),
    DoubleSymmetry(DoubleSymmetryConfig),
}

impl ExperimentConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentConfig::Instability(_) => "instability",
            ExperimentConfig::Genus(_) => "genus",
            ExperimentConfig::DoubleSymmetry(_) => "double-symmetry",
        }
    }

    pub fn out_dir(&self) -> Option<&PathBuf> {
        match self {
            ExperimentConfig::Instability(c) => c.out_dir.as_ref(),
            ExperimentConfig::Genus(c) => c.out_dir.as_ref(),
            ExperimentConfig::DoubleSymmetry(c) => c.out_dir.as_ref(),
        }
    }
}

#[derive(Deserialize)]
struct KindProbe {
    kind: String,
}

/// Parse and validate an experiment config file.
pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let probe: KindProbe = serde_json::from_str(&text)
        .with_context(|| format!("config {} needs a string field \"kind\"", path.display()))?;
    let parsed = match probe.kind.as_str() {
        "instability" => {
            let c: InstabilityConfig = serde_json::from_str(&text)?;
            c.validate()?;
            ExperimentConfig::Instability(c)
        }
        "genus" => {
            let c: GenusConfig = serde_json::from_str(&text)?;
            c.validate()?;
            ExperimentConfig::Genus(c)
        }
        "double-symmetry" => {
            let c: DoubleSymmetryConfig = serde_json::from_str(&text)?;
            c.validate()?;
            ExperimentConfig::DoubleSymmetry(c)
        }
        other => bail!(
            "unknown experiment kind {other:?}; expected one of {}",
            KINDS.join(", ")
        ),
    };
    Ok(parsed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(kind_text: &str) -> Result<ExperimentConfig> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(&path, kind_text).unwrap();
        load(&path)
    }

    #[test]
    fn rejects_unknown_fields_and_kinds() {
        let err = parse(r#"{"kind":"frequency"}"#).unwrap_err();
        assert!(err.to_string().contains("unknown experiment kind"));

        let err = parse(
            r#"{"kind":"genus","surfaces":[{"surface":"disk","boundary_nodes":64}],"bogus":1}"#,
        )
        .unwrap_err();
        assert!(format!("{err:#}").contains("bogus"));
    }

    #[test]
    fn rejects_bad_schedules_and_sizes() {
        let err = parse(
            r#"{"kind":"instability","base":{"surface":"disk","boundary_nodes":64},
                 "site_a":[0.7,0.0],"site_b":[-0.7,0.0],"cyl_len":0.5,"eps":[0.1,0.2]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("strictly decreasing"));

        let err = parse(
            r#"{"kind":"genus","surfaces":[{"surface":"disk","boundary_nodes":100}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("power of two"));
    }

    #[test]
    fn builds_a_handled_disk_from_site_coordinates() {
        let cfg = parse(
            r#"{"kind":"genus","surfaces":[
                  {"surface":"handled-disk","boundary_nodes":64,"rings":24,"radius":2.0,
                   "handles":[{"site_a":[0.9,0.0],"site_b":[-0.9,0.0],"eps":0.15,"cyl_len":0.5}]}
               ]}"#,
        )
        .unwrap();
        let ExperimentConfig::Genus(g) = cfg else {
            panic!("wrong kind")
        };
        let built = g.surfaces[0].build().unwrap();
        assert_eq!(built.mesh.euler_genus().unwrap(), 1);
        assert_eq!(built.label, "handled-disk");
    }

    #[test]
    fn surface_field_mismatches_are_refused() {
        let err = parse(
            r#"{"kind":"genus","surfaces":[{"surface":"disk","boundary_nodes":64,"hole_radius":0.3}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("does not apply"));
    }
}

//! Line-oriented text format for meshes and attached data.
//!
//! ```text
//! SURF 1
//! V <n_vertices>
//! T <n_triangles>      followed by "i j k" per triangle (counterclockwise)
//! E <n_edges>          followed by "i j length" per edge
//! B <n_boundary>       followed by the ordered boundary vertex ids
//! TAG <triangle> <string>            (zero or more)
//! VF <n_vertices>      followed by "i value" per vertex     (zero or more sections)
//! ED <n_edges>         followed by "i re im" per edge       (zero or more sections)
//! ```
//!
//! Floats are written with 17 significant digits so a write/read round trip
//! is bit-exact for f64.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{FaceSpec, TriangleMesh};

/// A mesh plus any vertex-function (`VF`) and edge-differential (`ED`)
/// sections stored with it, in file order.
pub struct MeshSections<T> {
    pub mesh: TriangleMesh<T>,
    pub vertex_functions: Vec<Vec<T>>,
    pub edge_differentials: Vec<Vec<Complex<T>>>,
}

impl<T> MeshSections<T> {
    pub fn bare(mesh: TriangleMesh<T>) -> Self {
        MeshSections {
            mesh,
            vertex_functions: Vec::new(),
            edge_differentials: Vec::new(),
        }
    }
}

pub fn write_mesh<T: Scalar, W: Write>(mut out: W, data: &MeshSections<T>) -> Result<()> {
    let mesh = &data.mesh;
    for vf in &data.vertex_functions {
        if vf.len() != mesh.n_vertices() {
            return Err(Error::invalid_input("VF section length != vertex count"));
        }
    }
    for ed in &data.edge_differentials {
        if ed.len() != mesh.n_edges() {
            return Err(Error::invalid_input("ED section length != edge count"));
        }
    }
    writeln!(out, "SURF 1")?;
    writeln!(out, "V {}", mesh.n_vertices())?;
    writeln!(out, "T {}", mesh.triangles().len())?;
    for [i, j, k] in mesh.triangles() {
        writeln!(out, "{i} {j} {k}")?;
    }
    writeln!(out, "E {}", mesh.n_edges())?;
    for (e, &(i, j)) in mesh.edges().iter().enumerate() {
        writeln!(out, "{i} {j} {:.16e}", mesh.edge_length(e).as_f64())?;
    }
    writeln!(out, "B {}", mesh.boundary_loop().len())?;
    for &v in mesh.boundary_loop() {
        writeln!(out, "{v}")?;
    }
    for (t, tag) in mesh.region_tags() {
        writeln!(out, "TAG {t} {tag}")?;
    }
    for vf in &data.vertex_functions {
        writeln!(out, "VF {}", vf.len())?;
        for (i, v) in vf.iter().enumerate() {
            writeln!(out, "{i} {:.16e}", v.as_f64())?;
        }
    }
    for ed in &data.edge_differentials {
        writeln!(out, "ED {}", ed.len())?;
        for (i, z) in ed.iter().enumerate() {
            writeln!(out, "{i} {:.16e} {:.16e}", z.re.as_f64(), z.im.as_f64())?;
        }
    }
    Ok(())
}

pub fn write_mesh_file<T: Scalar>(path: impl AsRef<Path>, data: &MeshSections<T>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_mesh(&mut out, data)?;
    out.flush()?;
    Ok(())
}

struct Lines<R> {
    reader: R,
    line_no: usize,
    pushback: Option<String>,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self) -> Result<Option<String>> {
        if let Some(l) = self.pushback.take() {
            return Ok(Some(l));
        }
        let mut buf = String::new();
        loop {
            buf.clear();
            if self.reader.read_line(&mut buf)? == 0 {
                return Ok(None);
            }
            self.line_no += 1;
            let trimmed = buf.trim();
            if !trimmed.is_empty() {
                return Ok(Some(trimmed.to_string()));
            }
        }
    }

    fn expect_line(&mut self, what: &str) -> Result<String> {
        self.next_line()?.ok_or_else(|| Error::Parse {
            line: self.line_no,
            message: format!("unexpected end of file, expected {what}"),
        })
    }

    fn fail<X>(&self, message: impl Into<String>) -> Result<X> {
        Err(Error::Parse {
            line: self.line_no,
            message: message.into(),
        })
    }

    fn section_count(&mut self, keyword: &str) -> Result<usize> {
        let line = self.expect_line(keyword)?;
        let mut it = line.split_whitespace();
        if it.next() != Some(keyword) {
            return self.fail(format!("expected `{keyword} <count>`, got `{line}`"));
        }
        let count = it
            .next()
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or(Error::Parse {
                line: self.line_no,
                message: format!("bad count in `{line}`"),
            })?;
        if it.next().is_some() {
            return self.fail(format!("trailing tokens in `{line}`"));
        }
        Ok(count)
    }

    fn numbers(&mut self, n_fields: usize, what: &str) -> Result<Vec<f64>> {
        let line = self.expect_line(what)?;
        let fields: Vec<f64> = line
            .split_whitespace()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line: self.line_no,
                message: format!("{what}: {e} in `{line}`"),
            })?;
        if fields.len() != n_fields {
            return self.fail(format!("{what}: expected {n_fields} fields in `{line}`"));
        }
        Ok(fields)
    }
}

fn parse_index(lines: &Lines<impl BufRead>, x: f64, limit: usize, what: &str) -> Result<usize> {
    if x.fract() != 0.0 || x < 0.0 || x >= limit as f64 {
        return Err(Error::Parse {
            line: lines.line_no,
            message: format!("{what}: index {x} out of range 0..{limit}"),
        });
    }
    Ok(x as usize)
}

pub fn read_mesh<T: Scalar, R: BufRead>(reader: R) -> Result<MeshSections<T>> {
    let mut lines = Lines {
        reader,
        line_no: 0,
        pushback: None,
    };
    let header = lines.expect_line("SURF header")?;
    if header.split_whitespace().collect::<Vec<_>>() != ["SURF", "1"] {
        return lines.fail(format!("expected `SURF 1`, got `{header}`"));
    }
    let n_vertices = lines.section_count("V")?;
    let n_tris = lines.section_count("T")?;
    let mut corners: Vec<[usize; 3]> = Vec::with_capacity(n_tris);
    for _ in 0..n_tris {
        let f = lines.numbers(3, "triangle")?;
        corners.push([
            parse_index(&lines, f[0], n_vertices, "triangle")?,
            parse_index(&lines, f[1], n_vertices, "triangle")?,
            parse_index(&lines, f[2], n_vertices, "triangle")?,
        ]);
    }
    let n_edges = lines.section_count("E")?;
    let mut lengths: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for _ in 0..n_edges {
        let f = lines.numbers(3, "edge")?;
        let i = parse_index(&lines, f[0], n_vertices, "edge")?;
        let j = parse_index(&lines, f[1], n_vertices, "edge")?;
        let key = (i.min(j), i.max(j));
        if i == j || lengths.insert(key, f[2]).is_some() {
            return lines.fail("degenerate or duplicate edge record");
        }
    }
    let n_boundary = lines.section_count("B")?;
    let mut boundary: Vec<usize> = Vec::with_capacity(n_boundary);
    while boundary.len() < n_boundary {
        let line = lines.expect_line("boundary vertex id")?;
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|e| Error::Parse {
                line: lines.line_no,
                message: format!("boundary id: {e}"),
            })?;
            boundary.push(parse_index(&lines, v, n_vertices, "boundary")?);
        }
    }
    if boundary.len() != n_boundary {
        return lines.fail("boundary section has too many ids");
    }

    // optional trailing sections, in any order
    let mut tags: BTreeMap<usize, String> = BTreeMap::new();
    let mut vfs: Vec<Vec<T>> = Vec::new();
    let mut eds: Vec<Vec<Complex<T>>> = Vec::new();
    while let Some(line) = lines.next_line()? {
        let keyword = line.split_whitespace().next().unwrap().to_string();
        match keyword.as_str() {
            "TAG" => {
                let mut it = line.splitn(3, char::is_whitespace);
                it.next();
                let t = it
                    .next()
                    .and_then(|s| s.parse::<usize>().ok())
                    .filter(|&t| t < n_tris)
                    .ok_or(Error::Parse {
                        line: lines.line_no,
                        message: format!("bad TAG line `{line}`"),
                    })?;
                let tag = it.next().unwrap_or("").trim();
                if tag.is_empty() {
                    return lines.fail("TAG line missing a tag string");
                }
                tags.insert(t, tag.to_string());
            }
            "VF" => {
                lines.pushback = Some(line);
                let count = lines.section_count("VF")?;
                if count != n_vertices {
                    return lines.fail("VF section length != vertex count");
                }
                let mut values = vec![None; count];
                for _ in 0..count {
                    let f = lines.numbers(2, "VF entry")?;
                    let i = parse_index(&lines, f[0], count, "VF entry")?;
                    if values[i].replace(T::of(f[1])).is_some() {
                        return lines.fail("duplicate VF index");
                    }
                }
                vfs.push(values.into_iter().map(Option::unwrap).collect());
            }
            "ED" => {
                lines.pushback = Some(line);
                let count = lines.section_count("ED")?;
                if count != lengths.len() {
                    return lines.fail("ED section length != edge count");
                }
                let mut values = vec![None; count];
                for _ in 0..count {
                    let f = lines.numbers(3, "ED entry")?;
                    let i = parse_index(&lines, f[0], count, "ED entry")?;
                    let z = Complex::new(T::of(f[1]), T::of(f[2]));
                    if values[i].replace(z).is_some() {
                        return lines.fail("duplicate ED index");
                    }
                }
                eds.push(values.into_iter().map(Option::unwrap).collect());
            }
            other => {
                return lines.fail(format!("unexpected section `{other}`"));
            }
        }
    }

    let mut faces: Vec<FaceSpec<T>> = Vec::with_capacity(n_tris);
    for &[i, j, k] in &corners {
        let side = |a: usize, b: usize| -> Result<T> {
            lengths
                .get(&(a.min(b), a.max(b)))
                .map(|&l| T::of(l))
                .ok_or(Error::Parse {
                    line: 0,
                    message: format!("triangle ({i} {j} {k}) uses unrecorded edge ({a} {b})"),
                })
        };
        let lens = [side(i, j)?, side(j, k)?, side(k, i)?];
        faces.push(([i, j, k], lens));
    }
    let mesh = TriangleMesh::from_faces(n_vertices, &faces, tags)?;
    if mesh.n_edges() != lengths.len() {
        return Err(Error::Parse {
            line: 0,
            message: "edge section lists edges not used by any triangle".into(),
        });
    }

    // the stored boundary must be a rotation of the derived loop
    let derived = mesh.boundary_loop();
    if derived.len() != boundary.len() {
        return Err(Error::Parse {
            line: 0,
            message: format!(
                "boundary section has {} ids, mesh derives {}",
                boundary.len(),
                derived.len()
            ),
        });
    }
    if !derived.is_empty() {
        let shift = boundary.iter().position(|&v| v == derived[0]);
        let ok = shift.map_or(false, |s| {
            (0..derived.len()).all(|i| boundary[(s + i) % boundary.len()] == derived[i])
        });
        if !ok {
            return Err(Error::Parse {
                line: 0,
                message: "boundary section is not a rotation of the derived boundary loop".into(),
            });
        }
    }

    Ok(MeshSections {
        mesh,
        vertex_functions: vfs,
        edge_differentials: eds,
    })
}

pub fn read_mesh_file<T: Scalar>(path: impl AsRef<Path>) -> Result<MeshSections<T>> {
    read_mesh(BufReader::new(File::open(path)?))
}

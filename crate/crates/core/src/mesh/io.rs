//! ASCII OBJ and OFF readers/writers.
//!
//! Only `v` and triangular `f` records are understood in OBJ; every other
//! directive is skipped on read and never written. Coordinates are written
//! with the shortest representation that parses back to the same bits.

use std::fmt::Write as _;
use std::str::FromStr;

use super::{Mesh, MeshError};
use crate::geometry::Vec3;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Off,
}

impl MeshFormat {
    /// Picks the format from a file extension (case-insensitive).
    pub fn from_extension(ext: &str) -> Option<Self> {
        match ext.to_ascii_lowercase().as_str() {
            "obj" => Some(Self::Obj),
            "off" => Some(Self::Off),
            _ => None,
        }
    }
}

pub fn load_mesh<T: Real>(bytes: &[u8], format: MeshFormat) -> Result<Mesh<T>, MeshError> {
    if !bytes.is_ascii() {
        return Err(MeshError::NotAscii);
    }
    // ASCII is valid UTF-8.
    let text = std::str::from_utf8(bytes).map_err(|_| MeshError::NotAscii)?;
    match format {
        MeshFormat::Obj => parse_obj(text),
        MeshFormat::Off => parse_off(text),
    }
}

pub fn write_mesh<T: Real>(mesh: &Mesh<T>, format: MeshFormat) -> String {
    let mut out = String::new();
    match format {
        MeshFormat::Obj => {
            for p in mesh.vertices() {
                let _ = writeln!(out, "v {} {} {}", p.x, p.y, p.z);
            }
            for f in mesh.faces() {
                let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
            }
        }
        MeshFormat::Off => {
            let _ = writeln!(out, "OFF");
            let _ = writeln!(out, "{} {} 0", mesh.vertex_count(), mesh.face_count());
            for p in mesh.vertices() {
                let _ = writeln!(out, "{} {} {}", p.x, p.y, p.z);
            }
            for f in mesh.faces() {
                let _ = writeln!(out, "3 {} {} {}", f[0], f[1], f[2]);
            }
        }
    }
    out
}

/// OBJ point cloud containing only the listed vertices, in the given order.
pub fn write_point_cloud<T: Real>(mesh: &Mesh<T>, indices: &[usize]) -> String {
    let mut out = String::new();
    for &i in indices {
        let p = mesh.position(i);
        let _ = writeln!(out, "v {} {} {}", p.x, p.y, p.z);
    }
    out
}

fn parse_num<N: FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<N, MeshError> {
    let tok = tok.ok_or_else(|| MeshError::Parse {
        line,
        message: format!("missing {what}"),
    })?;
    tok.parse().map_err(|_| MeshError::Parse {
        line,
        message: format!("invalid {what} {tok:?}"),
    })
}

fn parse_obj<T: Real>(text: &str) -> Result<Mesh<T>, MeshError> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut toks = content.split_whitespace();
        match toks.next() {
            Some("v") => {
                let x: T = parse_num(toks.next(), line, "x coordinate")?;
                let y: T = parse_num(toks.next(), line, "y coordinate")?;
                let z: T = parse_num(toks.next(), line, "z coordinate")?;
                vertices.push(Vec3::new(x, y, z));
            }
            Some("f") => {
                let refs: Vec<&str> = toks.collect();
                if refs.len() != 3 {
                    return Err(MeshError::NonTriangleFace { line, count: refs.len() });
                }
                let mut face = [0usize; 3];
                for (slot, r) in face.iter_mut().zip(&refs) {
                    let head = r.split('/').next().unwrap_or("");
                    let idx: i64 = parse_num(Some(head), line, "vertex index")?;
                    let resolved = match idx {
                        0 => None,
                        i if i > 0 => Some(i - 1),
                        i => Some(vertices.len() as i64 + i),
                    };
                    *slot = match resolved {
                        Some(i) if i >= 0 => i as usize,
                        _ => {
                            return Err(MeshError::IndexOutOfRange {
                                face: faces.len(),
                                index: idx,
                                vertex_count: vertices.len(),
                            })
                        }
                    };
                }
                faces.push(face);
            }
            _ => {}
        }
    }
    Mesh::new(vertices, faces)
}

fn parse_off<T: Real>(text: &str) -> Result<Mesh<T>, MeshError> {
    // (line number, tokens) for every non-empty, comment-stripped line.
    let mut lines = text.lines().enumerate().filter_map(|(i, l)| {
        let content = l.split('#').next().unwrap_or("").trim();
        (!content.is_empty()).then(|| (i + 1, content))
    });

    let (hline, header) = lines.next().ok_or(MeshError::Parse {
        line: 1,
        message: "empty OFF file".into(),
    })?;
    let mut htoks = header.split_whitespace();
    if htoks.next() != Some("OFF") {
        return Err(MeshError::Parse {
            line: hline,
            message: "missing OFF header".into(),
        });
    }
    let rest: Vec<&str> = htoks.collect();
    let (cline, counts) = if rest.is_empty() {
        let (l, c) = lines.next().ok_or(MeshError::Parse {
            line: hline,
            message: "missing counts line".into(),
        })?;
        (l, c.split_whitespace().collect::<Vec<_>>())
    } else {
        (hline, rest)
    };
    let nv: usize = parse_num(counts.first().copied(), cline, "vertex count")?;
    let nf: usize = parse_num(counts.get(1).copied(), cline, "face count")?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, content) = lines.next().ok_or(MeshError::Parse {
            line: cline,
            message: format!("expected {nv} vertices, found {}", vertices.len()),
        })?;
        let mut toks = content.split_whitespace();
        let x: T = parse_num(toks.next(), line, "x coordinate")?;
        let y: T = parse_num(toks.next(), line, "y coordinate")?;
        let z: T = parse_num(toks.next(), line, "z coordinate")?;
        vertices.push(Vec3::new(x, y, z));
    }

    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (line, content) = lines.next().ok_or(MeshError::Parse {
            line: cline,
            message: format!("expected {nf} faces, found {}", faces.len()),
        })?;
        let mut toks = content.split_whitespace();
        let count: usize = parse_num(toks.next(), line, "face vertex count")?;
        if count != 3 {
            return Err(MeshError::NonTriangleFace { line, count });
        }
        let mut face = [0usize; 3];
        for slot in &mut face {
            let idx: i64 = parse_num(toks.next(), line, "vertex index")?;
            if idx < 0 {
                return Err(MeshError::IndexOutOfRange {
                    face: faces.len(),
                    index: idx,
                    vertex_count: nv,
                });
            }
            *slot = idx as usize;
        }
        faces.push(face);
    }
    Mesh::new(vertices, faces)
}

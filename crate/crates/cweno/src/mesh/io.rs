//! ASCII mesh format.
//!
//! ```text
//! cweno-mesh 2 <n_nodes> <n_cells> <n_bedges>
//! <x> <y>            (n_nodes lines, 17 significant digits)
//! <i0> <i1> <i2>     (n_cells lines)
//! <i0> <i1> <tag>    (n_bedges lines)
//! ```
//!
//! Tags: `wall`, `transmissive`, `outflow`, `moving-external`, `periodic-x`,
//! `periodic-y`, `piston:<vx>:<vy>`, `inflow:<k>`. Writer and reader
//! round-trip finite doubles bit-exactly.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{build_mesh, BoundaryKind, FaceKind, Mesh};
use crate::error::MeshError;
use crate::geom::{Point2, Vec2};

fn tag_to_string(kind: BoundaryKind) -> String {
    match kind {
        BoundaryKind::Wall => "wall".into(),
        BoundaryKind::Transmissive => "transmissive".into(),
        BoundaryKind::Outflow => "outflow".into(),
        BoundaryKind::MovingExternal => "moving-external".into(),
        BoundaryKind::PeriodicX => "periodic-x".into(),
        BoundaryKind::PeriodicY => "periodic-y".into(),
        BoundaryKind::Piston { velocity } => {
            format!("piston:{:.16e}:{:.16e}", velocity.x, velocity.y)
        }
        BoundaryKind::Inflow(k) => format!("inflow:{k}"),
    }
}

fn tag_from_str(s: &str, line: usize) -> Result<BoundaryKind, MeshError> {
    match s {
        "wall" => Ok(BoundaryKind::Wall),
        "transmissive" => Ok(BoundaryKind::Transmissive),
        "outflow" => Ok(BoundaryKind::Outflow),
        "moving-external" => Ok(BoundaryKind::MovingExternal),
        "periodic-x" => Ok(BoundaryKind::PeriodicX),
        "periodic-y" => Ok(BoundaryKind::PeriodicY),
        _ => {
            if let Some(rest) = s.strip_prefix("piston:") {
                let mut it = rest.split(':');
                let vx = it.next().and_then(|t| t.parse::<f64>().ok());
                let vy = it.next().and_then(|t| t.parse::<f64>().ok());
                match (vx, vy) {
                    (Some(x), Some(y)) => {
                        Ok(BoundaryKind::Piston { velocity: Vec2::new(x, y) })
                    }
                    _ => Err(MeshError::Parse(line, format!("bad piston tag '{s}'"))),
                }
            } else if let Some(rest) = s.strip_prefix("inflow:") {
                rest.parse::<usize>()
                    .map(BoundaryKind::Inflow)
                    .map_err(|_| MeshError::Parse(line, format!("bad inflow tag '{s}'")))
            } else {
                Err(MeshError::Parse(line, format!("unknown boundary tag '{s}'")))
            }
        }
    }
}

pub fn write_mesh_string(mesh: &Mesh) -> String {
    let mut bedges: Vec<(usize, usize, BoundaryKind)> = Vec::new();
    for face in &mesh.faces {
        let kind = match face.kind {
            FaceKind::Boundary(kind) => kind,
            FaceKind::Periodic { offset } => {
                // periodic pairs were merged into one face; emit both sides
                let (a, b) = (
                    mesh.edge_nodes(face.left as usize, face.left_edge as usize),
                    mesh.edge_nodes(face.right as usize, face.right_edge as usize),
                );
                let kind = if offset.x != 0.0 {
                    BoundaryKind::PeriodicX
                } else {
                    BoundaryKind::PeriodicY
                };
                bedges.push((a.0, a.1, kind));
                bedges.push((b.0, b.1, kind));
                continue;
            }
            FaceKind::Interior => continue,
        };
        let (a, b) = mesh.edge_nodes(face.left as usize, face.left_edge as usize);
        bedges.push((a, b, kind));
    }

    let mut out = String::new();
    writeln!(out, "cweno-mesh 2 {} {} {}", mesh.n_nodes(), mesh.n_cells(), bedges.len()).unwrap();
    for p in &mesh.nodes {
        writeln!(out, "{:.16e} {:.16e}", p.x, p.y).unwrap();
    }
    for c in &mesh.cells {
        writeln!(out, "{} {} {}", c[0], c[1], c[2]).unwrap();
    }
    for (a, b, kind) in bedges {
        writeln!(out, "{} {} {}", a, b, tag_to_string(kind)).unwrap();
    }
    out
}

pub fn write_mesh(mesh: &Mesh, path: &Path) -> Result<(), MeshError> {
    std::fs::write(path, write_mesh_string(mesh)).map_err(|source| MeshError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_mesh_str(text: &str) -> Result<Mesh, MeshError> {
    let mut lines = text.lines().enumerate();
    let (ln, header) = lines
        .next()
        .ok_or_else(|| MeshError::Parse(1, "empty file".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 || fields[0] != "cweno-mesh" || fields[1] != "2" {
        return Err(MeshError::Parse(ln + 1, "bad header".into()));
    }
    let parse_count = |s: &str| -> Result<usize, MeshError> {
        s.parse().map_err(|_| MeshError::Parse(ln + 1, format!("bad count '{s}'")))
    };
    let n_nodes = parse_count(fields[2])?;
    let n_cells = parse_count(fields[3])?;
    let n_bedges = parse_count(fields[4])?;

    let mut nodes = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| MeshError::Parse(0, "truncated node list".into()))?;
        let mut it = line.split_whitespace();
        let x = it
            .next()
            .and_then(|t| t.parse::<f64>().ok())
            .ok_or_else(|| MeshError::Parse(ln + 1, "bad node line".into()))?;
        let y = it
            .next()
            .and_then(|t| t.parse::<f64>().ok())
            .ok_or_else(|| MeshError::Parse(ln + 1, "bad node line".into()))?;
        nodes.push(Point2::new(x, y));
    }
    let mut cells = Vec::with_capacity(n_cells);
    for _ in 0..n_cells {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| MeshError::Parse(0, "truncated cell list".into()))?;
        let v: Vec<usize> = line
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| MeshError::Parse(ln + 1, "bad cell line".into()))?;
        if v.len() != 3 {
            return Err(MeshError::Parse(ln + 1, "cell line needs 3 indices".into()));
        }
        cells.push([v[0], v[1], v[2]]);
    }
    let mut tags = HashMap::new();
    for _ in 0..n_bedges {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| MeshError::Parse(0, "truncated boundary list".into()))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(MeshError::Parse(ln + 1, "boundary line needs 3 fields".into()));
        }
        let a: usize = fields[0]
            .parse()
            .map_err(|_| MeshError::Parse(ln + 1, "bad node index".into()))?;
        let b: usize = fields[1]
            .parse()
            .map_err(|_| MeshError::Parse(ln + 1, "bad node index".into()))?;
        tags.insert((a.min(b), a.max(b)), tag_from_str(fields[2], ln + 1)?);
    }
    build_mesh(nodes, cells, &tags)
}

pub fn read_mesh(path: &Path) -> Result<Mesh, MeshError> {
    let text = std::fs::read_to_string(path).map_err(|source| MeshError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_mesh_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_box_mesh, BoxBounds, SplitPattern};

    #[test]
    fn round_trip_is_bit_exact() {
        let mesh = generate_box_mesh(
            (0.0, 1.0),
            (0.0, 1.0),
            1.0 / 3.0,
            SplitPattern::Alternating,
            BoxBounds {
                left: BoundaryKind::PeriodicX,
                right: BoundaryKind::PeriodicX,
                bottom: BoundaryKind::Wall,
                top: BoundaryKind::Piston { velocity: Vec2::new(1.0, 0.0) },
            },
        )
        .unwrap();
        let text = write_mesh_string(&mesh);
        let back = read_mesh_str(&text).unwrap();
        assert_eq!(mesh.cells, back.cells);
        for (p, q) in mesh.nodes.iter().zip(&back.nodes) {
            assert_eq!(p.x.to_bits(), q.x.to_bits());
            assert_eq!(p.y.to_bits(), q.y.to_bits());
        }
        // second write is byte-identical
        assert_eq!(text, write_mesh_string(&back));
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(read_mesh_str("").is_err());
        assert!(read_mesh_str("cweno-mesh 3 1 1 1").is_err());
        assert!(read_mesh_str("cweno-mesh 2 1 0 0\n0.0 not-a-number\n").is_err());
    }
}

//! Conforming unstructured triangular meshes: storage, face and Voronoi
//! connectivity, periodic identification, affine reference maps and geometry
//! queries.
//!
//! Cell vertices are stored counter-clockwise; local edge `e` of a cell runs
//! from vertex `e` to vertex `(e+1) % 3`, so outward normals follow from the
//! edge tangent. Node and cell indices are 0-based throughout.

mod gen;
mod io;

pub use gen::{generate_box_mesh, generate_disc_mesh, generate_ramp_mesh, BoxBounds, SplitPattern};
pub use io::{read_mesh, read_mesh_str, write_mesh, write_mesh_string};

use std::collections::HashMap;

use crate::error::MeshError;
use crate::geom::{self, AffineMap, Point2, Vec2};

/// Boundary condition tag carried on boundary edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryKind {
    Wall,
    Transmissive,
    Outflow,
    /// Moving wall with a prescribed velocity.
    Piston { velocity: Vec2 },
    /// Free outer boundary of a shrinking Lagrangian domain; nodes move with
    /// the computed velocity and the ghost state is copied.
    MovingExternal,
    /// Fixed external state, looked up by index in the case configuration.
    Inflow(usize),
    PeriodicX,
    PeriodicY,
}

impl BoundaryKind {
    pub fn is_periodic(&self) -> bool {
        matches!(self, BoundaryKind::PeriodicX | BoundaryKind::PeriodicY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaceKind {
    Interior,
    /// Interior after periodic identification. `offset` translates points
    /// from the left cell's frame into the right cell's frame.
    Periodic { offset: Vec2 },
    Boundary(BoundaryKind),
}

pub const NO_CELL: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct Face {
    pub left: u32,
    pub left_edge: u8,
    pub right: u32,
    pub right_edge: u8,
    pub kind: FaceKind,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.right == NO_CELL
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub nodes: Vec<Point2>,
    pub cells: Vec<[usize; 3]>,
    pub faces: Vec<Face>,
    /// Face index for each local edge of each cell.
    pub cell_faces: Vec<[u32; 3]>,
    /// Voronoi neighborhood: cells incident to each node, ascending.
    pub node_cells: Vec<Vec<u32>>,
    /// Periodic node identification. `node_group[k] >= 0` indexes into
    /// `periodic_groups`; nodes in one group share their physical motion.
    pub node_group: Vec<i32>,
    pub periodic_groups: Vec<Vec<usize>>,
    areas: Vec<f64>,
}

impl Mesh {
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn vertices(&self, cell: usize) -> [Point2; 3] {
        let c = self.cells[cell];
        [self.nodes[c[0]], self.nodes[c[1]], self.nodes[c[2]]]
    }

    #[inline]
    pub fn area(&self, cell: usize) -> f64 {
        self.areas[cell]
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    #[inline]
    pub fn barycenter(&self, cell: usize) -> Point2 {
        geom::barycenter(&self.vertices(cell))
    }

    pub fn affine_map(&self, cell: usize) -> AffineMap {
        AffineMap::from_vertices(&self.vertices(cell)).expect("cells validated on construction")
    }

    pub fn incircle_diameter(&self, cell: usize) -> f64 {
        geom::incircle_diameter(&self.vertices(cell))
    }

    pub fn max_circumcircle_diameter(&self) -> f64 {
        (0..self.n_cells())
            .map(|i| geom::circumcircle_diameter(&self.vertices(i)))
            .fold(0.0, f64::max)
    }

    /// Face-neighbor of `cell` across local edge `e`, together with the view
    /// shift: adding it to the neighbor's coordinates places its geometry
    /// adjacent to `cell` (nonzero only across periodic seams). Boundary
    /// edges return their tag instead.
    #[inline]
    pub fn neighbor(&self, cell: usize, e: usize) -> Result<(usize, Vec2), BoundaryKind> {
        let face = &self.faces[self.cell_faces[cell][e] as usize];
        match face.kind {
            FaceKind::Interior => {
                let other =
                    if face.left as usize == cell { face.right } else { face.left };
                Ok((other as usize, Vec2::zeros()))
            }
            FaceKind::Periodic { offset } => {
                if face.left as usize == cell {
                    Ok((face.right as usize, -offset))
                } else {
                    Ok((face.left as usize, offset))
                }
            }
            FaceKind::Boundary(kind) => Err(kind),
        }
    }

    /// Endpoint node indices of local edge `e` of `cell`, in CCW order.
    #[inline]
    pub fn edge_nodes(&self, cell: usize, e: usize) -> (usize, usize) {
        let c = self.cells[cell];
        (c[e], c[(e + 1) % 3])
    }

    /// Replace node coordinates, failing on the first inverted element.
    pub fn move_nodes(&mut self, new_nodes: Vec<Point2>, time: f64) -> Result<(), (usize, f64)> {
        assert_eq!(new_nodes.len(), self.nodes.len());
        let old = std::mem::replace(&mut self.nodes, new_nodes);
        for i in 0..self.n_cells() {
            let a = geom::signed_area(&self.vertices(i));
            if a <= 0.0 {
                self.nodes = old;
                let _ = time;
                return Err((i, a));
            }
            self.areas[i] = a;
        }
        Ok(())
    }

    /// Apply a coordinate transform to every node (mesh skewing).
    pub fn transform_nodes(&mut self, f: impl Fn(Point2) -> Point2) -> Result<(), MeshError> {
        for p in self.nodes.iter_mut() {
            *p = f(*p);
        }
        for i in 0..self.n_cells() {
            let a = geom::signed_area(&self.vertices(i));
            if a <= 0.0 {
                return Err(MeshError::ZeroAreaCell(i));
            }
            self.areas[i] = a;
        }
        Ok(())
    }

    pub fn boundary_faces(&self) -> impl Iterator<Item = (usize, &Face)> {
        self.faces.iter().enumerate().filter(|(_, f)| f.is_boundary())
    }
}

/// Assemble a mesh from raw nodes, cells and boundary tags keyed by
/// (unordered) node pairs. Cell orientation is normalized to CCW; full face
/// and Voronoi connectivity is built and periodic edges are paired
/// geometrically.
pub fn build_mesh(
    nodes: Vec<Point2>,
    cells_in: Vec<[usize; 3]>,
    boundary_tags: &HashMap<(usize, usize), BoundaryKind>,
) -> Result<Mesh, MeshError> {
    let n_nodes = nodes.len();
    let mut cells = cells_in;
    let mut areas = Vec::with_capacity(cells.len());
    let mut seen = HashMap::<[usize; 3], usize>::new();
    for (i, cell) in cells.iter_mut().enumerate() {
        for &v in cell.iter() {
            if v >= n_nodes {
                return Err(MeshError::NodeIndexOutOfRange(i, v));
            }
        }
        let mut key = *cell;
        key.sort_unstable();
        if let Some(&j) = seen.get(&key) {
            return Err(MeshError::DuplicateCell(j, i));
        }
        seen.insert(key, i);
        let v = [nodes[cell[0]], nodes[cell[1]], nodes[cell[2]]];
        let mut a = geom::signed_area(&v);
        if a < 0.0 {
            cell.swap(1, 2);
            a = -a;
        }
        if a == 0.0 {
            return Err(MeshError::ZeroAreaCell(i));
        }
        areas.push(a);
    }

    // interior faces in first-encounter order
    let edge_key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut edge_face = HashMap::<(usize, usize), u32>::new();
    let mut faces: Vec<Face> = Vec::new();
    let mut cell_faces = vec![[u32::MAX; 3]; cells.len()];
    for (ci, cell) in cells.iter().enumerate() {
        for e in 0..3 {
            let (a, b) = (cell[e], cell[(e + 1) % 3]);
            let key = edge_key(a, b);
            match edge_face.get(&key) {
                None => {
                    let fi = faces.len() as u32;
                    faces.push(Face {
                        left: ci as u32,
                        left_edge: e as u8,
                        right: NO_CELL,
                        right_edge: 0,
                        kind: FaceKind::Interior,
                    });
                    edge_face.insert(key, fi);
                    cell_faces[ci][e] = fi;
                }
                Some(&fi) => {
                    let face = &mut faces[fi as usize];
                    if face.right != NO_CELL {
                        return Err(MeshError::NonManifoldEdge(key.0, key.1));
                    }
                    face.right = ci as u32;
                    face.right_edge = e as u8;
                    cell_faces[ci][e] = fi;
                }
            }
        }
    }

    // tag boundary faces
    let mut periodic: Vec<(u32, BoundaryKind)> = Vec::new();
    for (fi, face) in faces.iter_mut().enumerate() {
        if face.right != NO_CELL {
            continue;
        }
        let cell = cells[face.left as usize];
        let e = face.left_edge as usize;
        let key = edge_key(cell[e], cell[(e + 1) % 3]);
        let kind = boundary_tags
            .get(&key)
            .copied()
            .ok_or(MeshError::UntaggedBoundaryEdge(key.0, key.1))?;
        if kind.is_periodic() {
            periodic.push((fi as u32, kind));
        } else {
            face.kind = FaceKind::Boundary(kind);
        }
    }

    // geometric periodic pairing
    let mut parent: Vec<usize> = (0..n_nodes).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for axis in 0..2 {
        let want = if axis == 0 { BoundaryKind::PeriodicX } else { BoundaryKind::PeriodicY };
        let group: Vec<u32> =
            periodic.iter().filter(|(_, k)| *k == want).map(|(f, _)| *f).collect();
        if group.is_empty() {
            continue;
        }
        // (owning cell, local edge, endpoint nodes, midpoint, length)
        struct PEdge {
            cell: u32,
            edge: u8,
            a: usize,
            b: usize,
            mid: Point2,
            len: f64,
        }
        let pedges: Vec<PEdge> = group
            .iter()
            .map(|&fi| {
                let f = &faces[fi as usize];
                let c = cells[f.left as usize];
                let e = f.left_edge as usize;
                let (a, b) = (c[e], c[(e + 1) % 3]);
                PEdge {
                    cell: f.left,
                    edge: f.left_edge,
                    a,
                    b,
                    mid: (nodes[a] + nodes[b]) * 0.5,
                    len: (nodes[b] - nodes[a]).norm(),
                }
            })
            .collect();
        let coord = |p: Point2| if axis == 0 { p.x } else { p.y };
        let lo = pedges.iter().map(|p| coord(p.mid)).fold(f64::INFINITY, f64::min);
        let hi = pedges.iter().map(|p| coord(p.mid)).fold(f64::NEG_INFINITY, f64::max);
        let period = hi - lo;
        let offset = if axis == 0 { Vec2::new(period, 0.0) } else { Vec2::new(0.0, period) };
        let scale = period.max(1.0);
        let mut matched = vec![false; group.len()];
        for i in 0..group.len() {
            if matched[i] {
                continue;
            }
            let mut partner = None;
            for j in 0..group.len() {
                if i == j || matched[j] {
                    continue;
                }
                let d = pedges[j].mid - pedges[i].mid;
                if (d - offset).norm() < 1e-9 * scale || (d + offset).norm() < 1e-9 * scale {
                    partner = Some(j);
                    break;
                }
            }
            let Some(j) = partner else {
                return Err(MeshError::UnmatchedPeriodicEdge(pedges[i].a, pedges[i].b));
            };
            matched[i] = true;
            matched[j] = true;
            let (la, lb) = (pedges[i].len, pedges[j].len);
            if (la - lb).abs() > 1e-12 * la.max(lb) {
                return Err(MeshError::PeriodicLengthMismatch(la, lb));
            }
            // keep face i as the canonical one; face j is absorbed
            let (fi, fj) = (group[i] as usize, group[j] as usize);
            let signed =
                if coord(pedges[j].mid) > coord(pedges[i].mid) { offset } else { -offset };
            faces[fi].right = pedges[j].cell;
            faces[fi].right_edge = pedges[j].edge;
            faces[fi].kind = FaceKind::Periodic { offset: signed };
            cell_faces[pedges[j].cell as usize][pedges[j].edge as usize] = fi as u32;
            faces[fj].left = NO_CELL;
            // identify endpoint nodes across the seam
            for &a in &[pedges[i].a, pedges[i].b] {
                for &b in &[pedges[j].a, pedges[j].b] {
                    if (nodes[a] + signed - nodes[b]).norm() < 1e-9 * scale {
                        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                        if ra != rb {
                            parent[ra] = rb;
                        }
                    }
                }
            }
        }
    }

    // compact faces (absorbed periodic partners removed)
    let mut remap = vec![u32::MAX; faces.len()];
    let mut compact: Vec<Face> = Vec::with_capacity(faces.len());
    for (fi, face) in faces.into_iter().enumerate() {
        if face.left == NO_CELL {
            continue;
        }
        remap[fi] = compact.len() as u32;
        compact.push(face);
    }
    for cf in cell_faces.iter_mut() {
        for f in cf.iter_mut() {
            *f = remap[*f as usize];
            debug_assert!(*f != u32::MAX);
        }
    }

    let mut node_cells = vec![Vec::new(); n_nodes];
    for (ci, cell) in cells.iter().enumerate() {
        for &v in cell {
            node_cells[v].push(ci as u32);
        }
    }

    // periodic node groups
    let roots: Vec<usize> = (0..n_nodes).map(|k| find(&mut parent, k)).collect();
    let mut count = vec![0usize; n_nodes];
    for &r in &roots {
        count[r] += 1;
    }
    let mut group_of_root = HashMap::<usize, usize>::new();
    let mut periodic_groups: Vec<Vec<usize>> = Vec::new();
    let mut node_group = vec![-1i32; n_nodes];
    for k in 0..n_nodes {
        let r = roots[k];
        if count[r] > 1 {
            let g = *group_of_root.entry(r).or_insert_with(|| {
                periodic_groups.push(Vec::new());
                periodic_groups.len() - 1
            });
            periodic_groups[g].push(k);
            node_group[k] = g as i32;
        }
    }

    Ok(Mesh {
        nodes,
        cells,
        faces: compact,
        cell_faces,
        node_cells,
        node_group,
        periodic_groups,
        areas,
    })
}

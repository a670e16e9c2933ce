//! Conforming tetrahedral meshes of an axis-aligned box with local
//! bisection refinement.
//!
//! Refinement uses Maubach's tagged bisection: each tetrahedron carries an
//! ordered vertex tuple and a tag `d` in `{1,2,3}`, and is always bisected
//! on the edge between its first vertex and vertex `d`. Starting from the
//! Kuhn subdivision of the box cells (six tetrahedra per cell, all tagged 3)
//! this produces nested, shape-regular, conforming hierarchies; conformity
//! after local refinement is restored by recursively bisecting any
//! tetrahedron that acquired a hanging vertex on one of its edges.

use crate::{Error, Result};
use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

static NEXT_MESH_ID: AtomicU64 = AtomicU64::new(1);

/// Axis-aligned box domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box3 {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl Box3 {
    pub fn cube(half: f64) -> Self {
        Box3 {
            lo: [-half; 3],
            hi: [half; 3],
        }
    }

    pub fn volume(&self) -> f64 {
        (0..3).map(|a| self.hi[a] - self.lo[a]).product()
    }

    pub fn contains(&self, p: &[f64; 3]) -> bool {
        (0..3).all(|a| p[a] >= self.lo[a] - 1e-12 && p[a] <= self.hi[a] + 1e-12)
    }
}

/// Interior face shared by exactly two tetrahedra.
#[derive(Debug, Clone)]
pub struct InteriorFace {
    /// Sorted vertex triple.
    pub vertices: [u32; 3],
    /// Adjacent tet with the lower id (the `+` side).
    pub tet_plus: u32,
    /// Adjacent tet with the higher id (the `-` side).
    pub tet_minus: u32,
    /// Unit normal pointing out of `tet_plus` (so `nu_minus = -nu_plus`).
    pub normal_plus: [f64; 3],
    pub area: f64,
    /// Face diameter (longest edge).
    pub diameter: f64,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    id: u64,
    generation: u32,
    domain: Box3,
    vertices: Vec<[f64; 3]>,
    /// Number of leading vertices inherited from the parent mesh.
    n_inherited: usize,
    /// Parent edge endpoints for vertices created by bisection
    /// (indexed from `n_inherited`). Endpoints always have smaller indices.
    vertex_parents: Vec<(u32, u32)>,
    /// Maubach-ordered vertex tuples. Use [`Mesh::tet_oriented`] for a
    /// positively oriented tuple.
    tets: Vec<[u32; 4]>,
    tags: Vec<u8>,
    /// For generation > 0: containing tet id in the parent mesh.
    parent_tets: Vec<u32>,
    parent_mesh: Option<Arc<Mesh>>,
    boundary_vertex: Vec<bool>,
    interior_faces: Vec<InteriorFace>,
    /// Boundary faces as sorted triples with the owning tet.
    boundary_faces: Vec<([u32; 3], u32)>,
    /// Interior-face indices bounding each tet (up to 4).
    faces_of_tet: Vec<Vec<u32>>,
    h_tet: Vec<f64>,
    volume_tet: Vec<f64>,
    shape_bound: f64,
}

fn sorted3(mut f: [u32; 3]) -> [u32; 3] {
    f.sort_unstable();
    f
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn signed_volume(p: [&[f64; 3]; 4]) -> f64 {
    let e1 = sub(p[1], p[0]);
    let e2 = sub(p[2], p[0]);
    let e3 = sub(p[3], p[0]);
    dot(&cross(&e1, &e2), &e3) / 6.0
}

/// Circumradius / inradius ratio of a tet.
fn shape_ratio(p: [&[f64; 3]; 4]) -> f64 {
    let vol = signed_volume(p).abs();
    // Inradius: 3V / total face area.
    let mut area = 0.0;
    for f in [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]] {
        let e1 = sub(p[f[1]], p[f[0]]);
        let e2 = sub(p[f[2]], p[f[0]]);
        area += 0.5 * norm(&cross(&e1, &e2));
    }
    let inradius = 3.0 * vol / area;
    // Circumradius: solve |x - c|^2 equal for all vertices.
    let a = sub(p[1], p[0]);
    let b = sub(p[2], p[0]);
    let c = sub(p[3], p[0]);
    let rhs = [
        0.5 * dot(&a, &a),
        0.5 * dot(&b, &b),
        0.5 * dot(&c, &c),
    ];
    let det = dot(&cross(&a, &b), &c);
    let inv_row = |u: &[f64; 3], v: &[f64; 3]| cross(u, v);
    let r1 = inv_row(&b, &c);
    let r2 = inv_row(&c, &a);
    let r3 = inv_row(&a, &b);
    let cc = [
        (r1[0] * rhs[0] + r2[0] * rhs[1] + r3[0] * rhs[2]) / det,
        (r1[1] * rhs[0] + r2[1] * rhs[1] + r3[1] * rhs[2]) / det,
        (r1[2] * rhs[0] + r2[2] * rhs[1] + r3[2] * rhs[2]) / det,
    ];
    let circumradius = norm(&cc);
    circumradius / inradius
}

impl Mesh {
    /// Build a conforming tet mesh of `bounds` with `divisions` cells per
    /// axis, each cell split into six Kuhn tetrahedra.
    pub fn build_box(bounds: Box3, divisions: [usize; 3]) -> Result<Mesh> {
        if divisions.iter().any(|&d| d == 0) {
            return Err(Error::Mesh(format!(
                "division counts must be >= 1, got {divisions:?}"
            )));
        }
        for a in 0..3 {
            if !(bounds.hi[a] > bounds.lo[a]) {
                return Err(Error::Mesh(format!(
                    "degenerate or inverted bounds on axis {a}: [{}, {}]",
                    bounds.lo[a], bounds.hi[a]
                )));
            }
        }
        let [nx, ny, nz] = divisions;
        let vid = |i: usize, j: usize, k: usize| -> u32 {
            (i + (nx + 1) * (j + (ny + 1) * k)) as u32
        };
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
        for k in 0..=nz {
            for j in 0..=ny {
                for i in 0..=nx {
                    vertices.push([
                        bounds.lo[0] + (bounds.hi[0] - bounds.lo[0]) * i as f64 / nx as f64,
                        bounds.lo[1] + (bounds.hi[1] - bounds.lo[1]) * j as f64 / ny as f64,
                        bounds.lo[2] + (bounds.hi[2] - bounds.lo[2]) * k as f64 / nz as f64,
                    ]);
                }
            }
        }
        // Kuhn split: one tet per permutation of the three axis steps, all
        // sharing the cell diagonal. The identical pattern in every cell
        // keeps shared faces matching.
        const PERMS: [[usize; 3]; 6] = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let mut tets = Vec::with_capacity(6 * nx * ny * nz);
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    for perm in PERMS {
                        let mut c = [i, j, k];
                        let mut tet = [vid(c[0], c[1], c[2]), 0, 0, 0];
                        for (step, &axis) in perm.iter().enumerate() {
                            c[axis] += 1;
                            tet[step + 1] = vid(c[0], c[1], c[2]);
                        }
                        tets.push(tet);
                    }
                }
            }
        }
        let n_tets = tets.len();
        let n_verts = vertices.len();
        Mesh::assemble(
            bounds,
            vertices,
            n_verts,
            Vec::new(),
            tets,
            vec![3u8; n_tets],
            (0..n_tets as u32).collect(),
            None,
            0,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        domain: Box3,
        vertices: Vec<[f64; 3]>,
        n_inherited: usize,
        vertex_parents: Vec<(u32, u32)>,
        tets: Vec<[u32; 4]>,
        tags: Vec<u8>,
        parent_tets: Vec<u32>,
        parent_mesh: Option<Arc<Mesh>>,
        generation: u32,
    ) -> Result<Mesh> {
        let n_tets = tets.len();
        let mut face_map: HashMap<[u32; 3], (u32, i32)> = HashMap::with_capacity(2 * n_tets);
        for (t, tet) in tets.iter().enumerate() {
            for f in [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]] {
                let key = sorted3([tet[f[0]], tet[f[1]], tet[f[2]]]);
                match face_map.entry(key) {
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert((t as u32, -1));
                    }
                    std::collections::hash_map::Entry::Occupied(mut e) => {
                        let v = e.get_mut();
                        if v.1 >= 0 {
                            return Err(Error::Mesh(format!(
                                "face {key:?} shared by more than two tets"
                            )));
                        }
                        v.1 = t as u32 as i32;
                    }
                }
            }
        }
        let mut boundary_vertex = vec![false; vertices.len()];
        let mut interior_faces = Vec::new();
        let mut boundary_faces = Vec::new();
        let mut faces_of_tet = vec![Vec::with_capacity(4); n_tets];
        let mut keys: Vec<_> = face_map.keys().copied().collect();
        keys.sort_unstable();
        for key in keys {
            let (ta, tb) = face_map[&key];
            if tb < 0 {
                for &v in &key {
                    boundary_vertex[v as usize] = true;
                }
                boundary_faces.push((key, ta));
                continue;
            }
            let (tp, tm) = if ta < tb as u32 {
                (ta, tb as u32)
            } else {
                (tb as u32, ta)
            };
            let p0 = &vertices[key[0] as usize];
            let p1 = &vertices[key[1] as usize];
            let p2 = &vertices[key[2] as usize];
            let e1 = sub(p1, p0);
            let e2 = sub(p2, p0);
            let mut n = cross(&e1, &e2);
            let area = 0.5 * norm(&n);
            for c in n.iter_mut() {
                *c /= 2.0 * area;
            }
            // Orient out of tet_plus: the normal must point away from the
            // opposite vertex of tet_plus.
            let opp = tets[tp as usize]
                .iter()
                .copied()
                .find(|v| !key.contains(v))
                .expect("tet must have a vertex opposite its face");
            let to_opp = sub(&vertices[opp as usize], p0);
            if dot(&n, &to_opp) > 0.0 {
                for c in n.iter_mut() {
                    *c = -*c;
                }
            }
            let d01 = norm(&sub(p1, p0));
            let d02 = norm(&sub(p2, p0));
            let d12 = norm(&sub(p2, p1));
            let fid = interior_faces.len() as u32;
            faces_of_tet[tp as usize].push(fid);
            faces_of_tet[tm as usize].push(fid);
            interior_faces.push(InteriorFace {
                vertices: key,
                tet_plus: tp,
                tet_minus: tm,
                normal_plus: n,
                area,
                diameter: d01.max(d02).max(d12),
            });
        }
        let mut h_tet = Vec::with_capacity(n_tets);
        let mut volume_tet = Vec::with_capacity(n_tets);
        let mut shape_bound = 0.0f64;
        for tet in &tets {
            let p = [
                &vertices[tet[0] as usize],
                &vertices[tet[1] as usize],
                &vertices[tet[2] as usize],
                &vertices[tet[3] as usize],
            ];
            let vol = signed_volume(p).abs();
            if vol <= 0.0 {
                return Err(Error::Mesh("degenerate tet".into()));
            }
            volume_tet.push(vol);
            let mut h = 0.0f64;
            for a in 0..4 {
                for b in (a + 1)..4 {
                    h = h.max(norm(&sub(p[b], p[a])));
                }
            }
            h_tet.push(h);
            shape_bound = shape_bound.max(shape_ratio(p));
        }
        if let Some(parent) = &parent_mesh {
            shape_bound = shape_bound.max(parent.shape_bound);
        }
        Ok(Mesh {
            id: NEXT_MESH_ID.fetch_add(1, Ordering::Relaxed),
            generation,
            domain,
            vertices,
            n_inherited,
            vertex_parents,
            tets,
            tags,
            parent_tets,
            parent_mesh,
            boundary_vertex,
            interior_faces,
            boundary_faces,
            faces_of_tet,
            h_tet,
            volume_tet,
            shape_bound,
        })
    }

    /// Bisect every marked tet at least once and restore conformity.
    /// Returns a new mesh; `self` is untouched.
    pub fn refine(self: &Arc<Mesh>, marked: &[u32]) -> Result<Mesh> {
        for &t in marked {
            if t as usize >= self.tets.len() {
                return Err(Error::Mesh(format!("unknown tet id {t}")));
            }
        }
        if marked.is_empty() {
            return Mesh::assemble(
                self.domain,
                self.vertices.clone(),
                self.vertices.len(),
                Vec::new(),
                self.tets.clone(),
                self.tags.clone(),
                (0..self.tets.len() as u32).collect(),
                Some(self.clone()),
                self.generation + 1,
            );
        }

        struct Soup {
            verts: Vec<[f64; 3]>,
            vertex_parents: Vec<(u32, u32)>,
            n_inherited: usize,
            tets: Vec<[u32; 4]>,
            tags: Vec<u8>,
            roots: Vec<u32>,
            alive: Vec<bool>,
            midpoints: HashMap<(u32, u32), u32>,
        }

        impl Soup {
            fn midpoint(&mut self, a: u32, b: u32) -> u32 {
                let key = if a < b { (a, b) } else { (b, a) };
                if let Some(&z) = self.midpoints.get(&key) {
                    return z;
                }
                let pa = self.verts[key.0 as usize];
                let pb = self.verts[key.1 as usize];
                let z = self.verts.len() as u32;
                self.verts.push([
                    0.5 * (pa[0] + pb[0]),
                    0.5 * (pa[1] + pb[1]),
                    0.5 * (pa[2] + pb[2]),
                ]);
                self.vertex_parents.push(key);
                self.midpoints.insert(key, z);
                z
            }

            fn bisect(&mut self, t: usize) -> (usize, usize) {
                let v = self.tets[t];
                let d = self.tags[t] as usize;
                let z = self.midpoint(v[0], v[d]);
                let (c1, c2, tag) = match d {
                    3 => ([v[0], v[1], v[2], z], [v[1], v[2], v[3], z], 2),
                    2 => ([v[0], v[1], z, v[3]], [v[1], v[2], z, v[3]], 1),
                    1 => ([v[0], z, v[2], v[3]], [v[1], z, v[2], v[3]], 3),
                    _ => unreachable!("tag out of range"),
                };
                self.alive[t] = false;
                let root = self.roots[t];
                let i1 = self.tets.len();
                self.tets.push(c1);
                self.tags.push(tag);
                self.roots.push(root);
                self.alive.push(true);
                let i2 = self.tets.len();
                self.tets.push(c2);
                self.tags.push(tag);
                self.roots.push(root);
                self.alive.push(true);
                (i1, i2)
            }

            fn edge_has_midpoint(&self, a: u32, b: u32) -> bool {
                let key = if a < b { (a, b) } else { (b, a) };
                self.midpoints.contains_key(&key)
            }
        }

        let mut soup = Soup {
            verts: self.vertices.clone(),
            vertex_parents: Vec::new(),
            n_inherited: self.vertices.len(),
            tets: self.tets.clone(),
            tags: self.tags.clone(),
            roots: (0..self.tets.len() as u32).collect(),
            alive: vec![true; self.tets.len()],
            midpoints: HashMap::new(),
        };

        for &t in marked {
            if soup.alive[t as usize] {
                soup.bisect(t as usize);
            }
        }

        // Conformity closure: any live tet with a bisected edge is itself
        // bisected on its own refinement edge until no hanging vertices
        // remain. Terminates for compatibly tagged (Kuhn) meshes.
        const EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let mut sweeps = 0usize;
        loop {
            sweeps += 1;
            if sweeps > 1000 {
                return Err(Error::Mesh(
                    "conformity closure did not terminate".into(),
                ));
            }
            let mut todo = Vec::new();
            for t in 0..soup.tets.len() {
                if !soup.alive[t] {
                    continue;
                }
                let v = soup.tets[t];
                if EDGES
                    .iter()
                    .any(|&(a, b)| soup.edge_has_midpoint(v[a], v[b]))
                {
                    todo.push(t);
                }
            }
            if todo.is_empty() {
                break;
            }
            for t in todo {
                if soup.alive[t] {
                    soup.bisect(t);
                }
            }
        }

        let mut tets = Vec::new();
        let mut tags = Vec::new();
        let mut roots = Vec::new();
        for t in 0..soup.tets.len() {
            if soup.alive[t] {
                tets.push(soup.tets[t]);
                tags.push(soup.tags[t]);
                roots.push(soup.roots[t]);
            }
        }
        Mesh::assemble(
            self.domain,
            soup.verts,
            soup.n_inherited,
            soup.vertex_parents,
            tets,
            tags,
            roots,
            Some(self.clone()),
            self.generation + 1,
        )
    }

    /// Refine with every tet marked.
    pub fn uniform_refine(self: &Arc<Mesh>) -> Result<Mesh> {
        let all: Vec<u32> = (0..self.tets.len() as u32).collect();
        self.refine(&all)
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn generation(&self) -> u32 {
        self.generation
    }

    pub fn domain(&self) -> Box3 {
        self.domain
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_tets(&self) -> usize {
        self.tets.len()
    }

    pub fn vertex(&self, v: u32) -> &[f64; 3] {
        &self.vertices[v as usize]
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    /// Vertex tuple in internal (refinement) order.
    pub fn tet(&self, t: u32) -> [u32; 4] {
        self.tets[t as usize]
    }

    /// Vertex tuple reordered to positive signed volume.
    pub fn tet_oriented(&self, t: u32) -> [u32; 4] {
        let mut v = self.tets[t as usize];
        let p = [
            &self.vertices[v[0] as usize],
            &self.vertices[v[1] as usize],
            &self.vertices[v[2] as usize],
            &self.vertices[v[3] as usize],
        ];
        if signed_volume(p) < 0.0 {
            v.swap(2, 3);
        }
        v
    }

    pub fn tet_volume(&self, t: u32) -> f64 {
        self.volume_tet[t as usize]
    }

    pub fn tet_diameter(&self, t: u32) -> f64 {
        self.h_tet[t as usize]
    }

    pub fn is_boundary_vertex(&self, v: u32) -> bool {
        self.boundary_vertex[v as usize]
    }

    pub fn interior_faces(&self) -> &[InteriorFace] {
        &self.interior_faces
    }

    pub fn boundary_faces(&self) -> &[([u32; 3], u32)] {
        &self.boundary_faces
    }

    pub fn interior_faces_of_tet(&self, t: u32) -> &[u32] {
        &self.faces_of_tet[t as usize]
    }

    /// Recorded shape-regularity bound (max circumradius/inradius ratio seen
    /// in this hierarchy).
    pub fn shape_bound(&self) -> f64 {
        self.shape_bound
    }

    pub fn max_shape_ratio(&self) -> f64 {
        (0..self.n_tets() as u32)
            .map(|t| {
                let v = self.tet(t);
                shape_ratio([
                    self.vertex(v[0]),
                    self.vertex(v[1]),
                    self.vertex(v[2]),
                    self.vertex(v[3]),
                ])
            })
            .fold(0.0, f64::max)
    }

    pub fn total_volume(&self) -> f64 {
        self.volume_tet.iter().sum()
    }

    pub fn parent_mesh(&self) -> Option<&Arc<Mesh>> {
        self.parent_mesh.as_ref()
    }

    /// Containing tet in the parent mesh.
    pub fn parent_tet(&self, t: u32) -> u32 {
        self.parent_tets[t as usize]
    }

    pub fn n_inherited_vertices(&self) -> usize {
        self.n_inherited
    }

    /// Parent edge of a vertex created by bisection, or `None` for
    /// inherited vertices.
    pub fn vertex_parent_edge(&self, v: u32) -> Option<(u32, u32)> {
        let v = v as usize;
        if v < self.n_inherited {
            None
        } else {
            Some(self.vertex_parents[v - self.n_inherited])
        }
    }

    /// Whether `self` is `ancestor` or a refinement descendant of it.
    pub fn descends_from(&self, ancestor: &Mesh) -> bool {
        let mut cur = Some(self);
        while let Some(m) = cur {
            if m.id == ancestor.id {
                return true;
            }
            cur = m.parent_mesh.as_deref();
        }
        false
    }

    /// Verify conformity: every face belongs to one or two tets, single-tet
    /// faces lie on the domain boundary, and no live edge carries a vertex
    /// of another tet (hanging vertex).
    pub fn check_conformity(&self) -> Result<()> {
        let mut face_count: HashMap<[u32; 3], u32> = HashMap::new();
        for t in 0..self.n_tets() as u32 {
            let tet = self.tet(t);
            for f in [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]] {
                let key = sorted3([tet[f[0]], tet[f[1]], tet[f[2]]]);
                *face_count.entry(key).or_insert(0) += 1;
            }
        }
        let on_box = |v: u32| -> bool {
            let p = self.vertex(v);
            (0..3).any(|a| {
                (p[a] - self.domain.lo[a]).abs() < 1e-12 || (p[a] - self.domain.hi[a]).abs() < 1e-12
            })
        };
        for (key, count) in &face_count {
            match count {
                2 => {}
                1 => {
                    // A once-counted face must be a true boundary face; a
                    // hanging vertex would orphan interior faces.
                    if !key.iter().all(|&v| on_box(v)) {
                        return Err(Error::Mesh(format!(
                            "non-conforming: interior face {key:?} owned by one tet"
                        )));
                    }
                }
                _ => {
                    return Err(Error::Mesh(format!(
                        "face {key:?} shared by {count} tets"
                    )))
                }
            }
        }
        for t in 0..self.n_tets() as u32 {
            let v = self.tet_oriented(t);
            let p = [
                self.vertex(v[0]),
                self.vertex(v[1]),
                self.vertex(v[2]),
                self.vertex(v[3]),
            ];
            if signed_volume(p) <= 0.0 {
                return Err(Error::Mesh(format!("tet {t} not positively oriented")));
            }
        }
        Ok(())
    }

    /// Locate the tet containing `p` (brute force; intended for tests and
    /// point evaluation, not hot loops).
    pub fn locate(&self, p: &[f64; 3]) -> Option<(u32, [f64; 4])> {
        const TOL: f64 = 1e-10;
        for t in 0..self.n_tets() as u32 {
            if let Some(bary) = self.barycentric_in(t, p, TOL) {
                return Some((t, bary));
            }
        }
        None
    }

    /// Barycentric coordinates of `p` in tet `t` if inside (within `tol`).
    pub fn barycentric_in(&self, t: u32, p: &[f64; 3], tol: f64) -> Option<[f64; 4]> {
        let v = self.tet(t);
        let p0 = self.vertex(v[0]);
        let e1 = sub(self.vertex(v[1]), p0);
        let e2 = sub(self.vertex(v[2]), p0);
        let e3 = sub(self.vertex(v[3]), p0);
        let rhs = sub(p, p0);
        let det = dot(&cross(&e1, &e2), &e3);
        let b1 = dot(&cross(&rhs, &e2), &e3) / det;
        let b2 = dot(&cross(&e1, &rhs), &e3) / det;
        let b3 = dot(&cross(&e1, &e2), &rhs) / det;
        let b0 = 1.0 - b1 - b2 - b3;
        let bary = [b0, b1, b2, b3];
        if bary.iter().all(|&b| b >= -tol) {
            Some(bary)
        } else {
            None
        }
    }

    /// Plain-text dump: `vertices <n>` then one `id x y z` line per vertex,
    /// `tets <m>` then one `id v0 v1 v2 v3` line per tet (oriented tuples).
    pub fn write_text<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "vertices {}", self.n_vertices())?;
        for (i, p) in self.vertices.iter().enumerate() {
            writeln!(w, "{} {:.17e} {:.17e} {:.17e}", i, p[0], p[1], p[2])?;
        }
        writeln!(w, "tets {}", self.n_tets())?;
        for t in 0..self.n_tets() as u32 {
            let v = self.tet_oriented(t);
            writeln!(w, "{} {} {} {} {}", t, v[0], v[1], v[2], v[3])?;
        }
        Ok(())
    }
}

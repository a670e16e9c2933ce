//! Piecewise-linear conforming finite-element spaces with zero Dirichlet
//! boundary conditions.
//!
//! Functions are stored by vertex value (boundary vertices included), so the
//! same representation serves H^1_0 wavefunctions (zero boundary entries)
//! and potentials carrying inhomogeneous boundary data. Degrees of freedom
//! are the interior vertices.

use crate::mesh::Mesh;
use crate::quadrature::TetRule;
use crate::sparse::SparseMatrix;
use crate::{Error, Result};
use std::sync::Arc;

#[derive(Debug)]
pub struct FeSpace {
    mesh: Arc<Mesh>,
    dof_of_vertex: Vec<i64>,
    vertex_of_dof: Vec<u32>,
    boundary_index: Vec<i64>,
    boundary_vertices: Vec<u32>,
}

impl FeSpace {
    pub fn new(mesh: Arc<Mesh>) -> Arc<FeSpace> {
        let n = mesh.n_vertices();
        let mut dof_of_vertex = vec![-1i64; n];
        let mut boundary_index = vec![-1i64; n];
        let mut vertex_of_dof = Vec::new();
        let mut boundary_vertices = Vec::new();
        for v in 0..n as u32 {
            if mesh.is_boundary_vertex(v) {
                boundary_index[v as usize] = boundary_vertices.len() as i64;
                boundary_vertices.push(v);
            } else {
                dof_of_vertex[v as usize] = vertex_of_dof.len() as i64;
                vertex_of_dof.push(v);
            }
        }
        Arc::new(FeSpace {
            mesh,
            dof_of_vertex,
            vertex_of_dof,
            boundary_index,
            boundary_vertices,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    /// dim(V_h): number of interior vertices.
    pub fn n_dofs(&self) -> usize {
        self.vertex_of_dof.len()
    }

    pub fn n_boundary(&self) -> usize {
        self.boundary_vertices.len()
    }

    pub fn dof_of_vertex(&self, v: u32) -> Option<usize> {
        let d = self.dof_of_vertex[v as usize];
        (d >= 0).then_some(d as usize)
    }

    pub fn vertex_of_dof(&self, d: usize) -> u32 {
        self.vertex_of_dof[d]
    }

    pub fn boundary_index(&self, v: u32) -> Option<usize> {
        let b = self.boundary_index[v as usize];
        (b >= 0).then_some(b as usize)
    }

    pub fn boundary_vertex(&self, b: usize) -> u32 {
        self.boundary_vertices[b]
    }

    /// Geometry of one element: vertex coordinates, constant barycentric
    /// gradients and volume. Vertex order matches `mesh.tet(t)`.
    pub fn geometry(&self, t: u32) -> TetGeom {
        let vid = self.mesh.tet(t);
        let p: [[f64; 3]; 4] = [
            *self.mesh.vertex(vid[0]),
            *self.mesh.vertex(vid[1]),
            *self.mesh.vertex(vid[2]),
            *self.mesh.vertex(vid[3]),
        ];
        TetGeom::new(p)
    }
}

/// Per-element geometry for P1 assembly.
#[derive(Debug, Clone)]
pub struct TetGeom {
    pub verts: [[f64; 3]; 4],
    /// Gradients of the four barycentric basis functions.
    pub grads: [[f64; 3]; 4],
    pub volume: f64,
}

impl TetGeom {
    pub fn new(p: [[f64; 3]; 4]) -> TetGeom {
        let e = |a: usize, b: usize| {
            [
                p[b][0] - p[a][0],
                p[b][1] - p[a][1],
                p[b][2] - p[a][2],
            ]
        };
        let e1 = e(0, 1);
        let e2 = e(0, 2);
        let e3 = e(0, 3);
        let cross = |u: &[f64; 3], v: &[f64; 3]| {
            [
                u[1] * v[2] - u[2] * v[1],
                u[2] * v[0] - u[0] * v[2],
                u[0] * v[1] - u[1] * v[0],
            ]
        };
        let dot = |u: &[f64; 3], v: &[f64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
        let c23 = cross(&e2, &e3);
        let det = dot(&e1, &c23);
        let c31 = cross(&e3, &e1);
        let c12 = cross(&e1, &e2);
        let g1 = [c23[0] / det, c23[1] / det, c23[2] / det];
        let g2 = [c31[0] / det, c31[1] / det, c31[2] / det];
        let g3 = [c12[0] / det, c12[1] / det, c12[2] / det];
        let g0 = [
            -(g1[0] + g2[0] + g3[0]),
            -(g1[1] + g2[1] + g3[1]),
            -(g1[2] + g2[2] + g3[2]),
        ];
        TetGeom {
            verts: p,
            grads: [g0, g1, g2, g3],
            volume: det.abs() / 6.0,
        }
    }

    /// Physical coordinates of a barycentric point.
    pub fn point(&self, bary: &[f64; 4]) -> [f64; 3] {
        let mut x = [0.0; 3];
        for (b, v) in bary.iter().zip(&self.verts) {
            for a in 0..3 {
                x[a] += b * v[a];
            }
        }
        x
    }
}

/// A P1 function given by its vertex values (boundary vertices included).
#[derive(Debug, Clone)]
pub struct FeFunction {
    space: Arc<FeSpace>,
    values: Vec<f64>,
}

impl FeFunction {
    pub fn zero(space: &Arc<FeSpace>) -> FeFunction {
        FeFunction {
            space: space.clone(),
            values: vec![0.0; space.mesh().n_vertices()],
        }
    }

    pub fn from_vertex_values(space: &Arc<FeSpace>, values: Vec<f64>) -> FeFunction {
        assert_eq!(values.len(), space.mesh().n_vertices());
        FeFunction {
            space: space.clone(),
            values,
        }
    }

    /// Build from an interior-dof coefficient vector; boundary values zero.
    pub fn from_dof_values(space: &Arc<FeSpace>, dofs: &[f64]) -> FeFunction {
        assert_eq!(
            dofs.len(),
            space.n_dofs(),
            "coefficient length must equal dof count"
        );
        let mut values = vec![0.0; space.mesh().n_vertices()];
        for (d, &val) in dofs.iter().enumerate() {
            values[space.vertex_of_dof(d) as usize] = val;
        }
        FeFunction {
            space: space.clone(),
            values,
        }
    }

    /// Nodal interpolant of a coordinate function.
    pub fn interpolate(space: &Arc<FeSpace>, f: impl Fn(&[f64; 3]) -> f64) -> FeFunction {
        let values = space.mesh().vertices().iter().map(|p| f(p)).collect();
        FeFunction {
            space: space.clone(),
            values,
        }
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn dof_values(&self) -> Vec<f64> {
        (0..self.space.n_dofs())
            .map(|d| self.values[self.space.vertex_of_dof(d) as usize])
            .collect()
    }

    pub fn eval_in_tet(&self, t: u32, bary: &[f64; 4]) -> f64 {
        let vid = self.space.mesh().tet(t);
        bary.iter()
            .zip(&vid)
            .map(|(b, &v)| b * self.values[v as usize])
            .sum()
    }

    /// Point evaluation by brute-force location (tests / reporting only).
    pub fn eval_at(&self, p: &[f64; 3]) -> Option<f64> {
        let (t, bary) = self.space.mesh().locate(p)?;
        Some(self.eval_in_tet(t, &bary))
    }

    /// Constant gradient on element `t`.
    pub fn gradient_in_tet(&self, t: u32, geom: &TetGeom) -> [f64; 3] {
        let vid = self.space.mesh().tet(t);
        let mut g = [0.0; 3];
        for (k, &v) in vid.iter().enumerate() {
            let c = self.values[v as usize];
            for a in 0..3 {
                g[a] += c * geom.grads[k][a];
            }
        }
        g
    }

    pub fn axpy(&mut self, alpha: f64, other: &FeFunction) {
        assert_eq!(self.values.len(), other.values.len());
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for v in self.values.iter_mut() {
            *v *= s;
        }
    }
}

/// Element mass matrix weights: M_loc[i][j] = vol * (1 + delta_ij) / 20.
const MASS_W: [[f64; 4]; 4] = {
    let mut m = [[1.0 / 20.0; 4]; 4];
    m[0][0] = 2.0 / 20.0;
    m[1][1] = 2.0 / 20.0;
    m[2][2] = 2.0 / 20.0;
    m[3][3] = 2.0 / 20.0;
    m
};

/// Interior-row by boundary-column coupling block of an operator, used to
/// move inhomogeneous Dirichlet data to the right-hand side.
#[derive(Debug, Clone)]
pub struct BoundaryCoupling {
    entries: Vec<(u32, u32, f64)>,
}

impl BoundaryCoupling {
    /// rhs[dof] -= sum_b A(psi_b, psi_dof) * g[b]
    pub fn apply(&self, g: &[f64], rhs: &mut [f64]) {
        for &(dof, b, v) in &self.entries {
            rhs[dof as usize] -= v * g[b as usize];
        }
    }
}

fn scatter(
    space: &FeSpace,
    vid: &[u32; 4],
    local: &[[f64; 4]; 4],
    triplets: &mut Vec<(u32, u32, f64)>,
    coupling: Option<&mut Vec<(u32, u32, f64)>>,
) {
    let mut coupling = coupling;
    for (i, &vi) in vid.iter().enumerate() {
        let Some(di) = space.dof_of_vertex(vi) else {
            continue;
        };
        for (j, &vj) in vid.iter().enumerate() {
            match space.dof_of_vertex(vj) {
                Some(dj) => triplets.push((di as u32, dj as u32, local[i][j])),
                None => {
                    if let Some(c) = coupling.as_deref_mut() {
                        let b = space
                            .boundary_index(vj)
                            .expect("non-dof vertex is boundary");
                        c.push((di as u32, b as u32, local[i][j]));
                    }
                }
            }
        }
    }
}

fn stiffness_local(geom: &TetGeom, scale: f64) -> [[f64; 4]; 4] {
    let mut k = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let d = geom.grads[i][0] * geom.grads[j][0]
                + geom.grads[i][1] * geom.grads[j][1]
                + geom.grads[i][2] * geom.grads[j][2];
            k[i][j] = scale * geom.volume * d;
        }
    }
    k
}

/// Stiffness on interior dofs: entry (i,j) = scale * int grad(psi_j).grad(psi_i).
pub fn assemble_stiffness(space: &FeSpace, scale: f64) -> SparseMatrix {
    let (m, _) = assemble_stiffness_with_coupling(space, scale);
    m
}

pub fn assemble_stiffness_with_coupling(
    space: &FeSpace,
    scale: f64,
) -> (SparseMatrix, BoundaryCoupling) {
    let mesh = space.mesh();
    let mut triplets = Vec::new();
    let mut coupling = Vec::new();
    for t in 0..mesh.n_tets() as u32 {
        let geom = space.geometry(t);
        let local = stiffness_local(&geom, scale);
        scatter(space, &mesh.tet(t), &local, &mut triplets, Some(&mut coupling));
    }
    (
        SparseMatrix::from_triplets(space.n_dofs(), triplets, true),
        BoundaryCoupling { entries: coupling },
    )
}

/// Stiffness over the full vertex basis (no boundary elimination).
pub fn assemble_stiffness_full(space: &FeSpace, scale: f64) -> SparseMatrix {
    let mesh = space.mesh();
    let mut triplets = Vec::new();
    for t in 0..mesh.n_tets() as u32 {
        let geom = space.geometry(t);
        let local = stiffness_local(&geom, scale);
        let vid = mesh.tet(t);
        for i in 0..4 {
            for j in 0..4 {
                triplets.push((vid[i], vid[j], local[i][j]));
            }
        }
    }
    SparseMatrix::from_triplets(mesh.n_vertices(), triplets, true)
}

/// Mass matrix on interior dofs: entry (i,j) = int psi_j psi_i (exact).
pub fn assemble_mass(space: &FeSpace) -> SparseMatrix {
    let mesh = space.mesh();
    let mut triplets = Vec::new();
    for t in 0..mesh.n_tets() as u32 {
        let vol = mesh.tet_volume(t);
        let mut local = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                local[i][j] = vol * MASS_W[i][j];
            }
        }
        scatter(space, &mesh.tet(t), &local, &mut triplets, None);
    }
    SparseMatrix::from_triplets(space.n_dofs(), triplets, true)
}

pub fn assemble_mass_full(space: &FeSpace) -> SparseMatrix {
    let mesh = space.mesh();
    let mut triplets = Vec::new();
    for t in 0..mesh.n_tets() as u32 {
        let vol = mesh.tet_volume(t);
        let vid = mesh.tet(t);
        for i in 0..4 {
            for j in 0..4 {
                triplets.push((vid[i], vid[j], vol * MASS_W[i][j]));
            }
        }
    }
    SparseMatrix::from_triplets(mesh.n_vertices(), triplets, true)
}

/// Potential-term coefficient source.
pub enum Potential<'a> {
    /// Pointwise callback, integrated with the degree-5 rule (the integrand
    /// is not polynomial; nuclear singularities must not hit quad nodes).
    Fn(&'a dyn Fn(&[f64; 3]) -> f64),
    /// P1 coefficient potential, integrated exactly (cubic integrand).
    Fe(&'a FeFunction),
}

/// Potential matrix on interior dofs: entry (i,j) = int V psi_j psi_i.
pub fn assemble_potential(space: &FeSpace, potential: Potential<'_>) -> Result<SparseMatrix> {
    let mesh = space.mesh();
    let rule = match potential {
        Potential::Fn(_) => TetRule::degree5(),
        Potential::Fe(_) => TetRule::degree3(),
    };
    let bary = rule.barycentric();
    let mut triplets = Vec::new();
    for t in 0..mesh.n_tets() as u32 {
        let geom = space.geometry(t);
        let mut local = [[0.0; 4]; 4];
        for (q, b) in bary.iter().enumerate() {
            let w = rule.weights[q] * 6.0 * geom.volume;
            let v = match potential {
                Potential::Fn(f) => f(&geom.point(b)),
                Potential::Fe(f) => f.eval_in_tet(t, b),
            };
            if !v.is_finite() {
                return Err(Error::NonFiniteQuadrature);
            }
            for i in 0..4 {
                for j in i..4 {
                    let e = w * v * b[i] * b[j];
                    local[i][j] += e;
                    if j != i {
                        local[j][i] += e;
                    }
                }
            }
        }
        scatter(space, &mesh.tet(t), &local, &mut triplets, None);
    }
    Ok(SparseMatrix::from_triplets(space.n_dofs(), triplets, true))
}

/// Load vector entry i = int f psi_i over interior dofs, exact for P1 `f`.
pub fn assemble_load_fe(space: &FeSpace, f: &FeFunction) -> Vec<f64> {
    let mesh = space.mesh();
    let mut load = vec![0.0; space.n_dofs()];
    for t in 0..mesh.n_tets() as u32 {
        let vol = mesh.tet_volume(t);
        let vid = mesh.tet(t);
        let fv = [
            f.values()[vid[0] as usize],
            f.values()[vid[1] as usize],
            f.values()[vid[2] as usize],
            f.values()[vid[3] as usize],
        ];
        for (i, &vi) in vid.iter().enumerate() {
            if let Some(d) = space.dof_of_vertex(vi) {
                let mut s = 0.0;
                for j in 0..4 {
                    s += MASS_W[i][j] * fv[j];
                }
                load[d] += vol * s;
            }
        }
    }
    load
}

/// Load vector from a pointwise callback (degree-5 quadrature).
pub fn assemble_load_fn(space: &FeSpace, f: &dyn Fn(&[f64; 3]) -> f64) -> Vec<f64> {
    let mesh = space.mesh();
    let rule = TetRule::degree5();
    let bary = rule.barycentric();
    let mut load = vec![0.0; space.n_dofs()];
    for t in 0..mesh.n_tets() as u32 {
        let geom = space.geometry(t);
        let vid = mesh.tet(t);
        for (q, b) in bary.iter().enumerate() {
            let w = rule.weights[q] * 6.0 * geom.volume;
            let v = f(&geom.point(b));
            for (i, &vi) in vid.iter().enumerate() {
                if let Some(d) = space.dof_of_vertex(vi) {
                    load[d] += w * v * b[i];
                }
            }
        }
    }
    load
}

/// Load vector of a product of two P1 functions: entry i = int (u v) psi_i.
/// The integrand is cubic, so the degree-3 rule is exact.
pub fn assemble_load_product(space: &FeSpace, u: &FeFunction, v: &FeFunction) -> Vec<f64> {
    let mesh = space.mesh();
    let rule = TetRule::degree3();
    let bary = rule.barycentric();
    let mut load = vec![0.0; space.n_dofs()];
    for t in 0..mesh.n_tets() as u32 {
        let vol = mesh.tet_volume(t);
        let vid = mesh.tet(t);
        let uv = [
            u.values()[vid[0] as usize],
            u.values()[vid[1] as usize],
            u.values()[vid[2] as usize],
            u.values()[vid[3] as usize],
        ];
        let vv = [
            v.values()[vid[0] as usize],
            v.values()[vid[1] as usize],
            v.values()[vid[2] as usize],
            v.values()[vid[3] as usize],
        ];
        for (q, b) in bary.iter().enumerate() {
            let w = rule.weights[q] * 6.0 * vol;
            let uq: f64 = (0..4).map(|k| b[k] * uv[k]).sum();
            let vq: f64 = (0..4).map(|k| b[k] * vv[k]).sum();
            for (i, &vi) in vid.iter().enumerate() {
                if let Some(d) = space.dof_of_vertex(vi) {
                    load[d] += w * uq * vq * b[i];
                }
            }
        }
    }
    load
}

/// L2 and H1-seminorm inner products of two functions on the same space
/// (exact for P1).
pub fn inner_products(u: &FeFunction, v: &FeFunction) -> (f64, f64) {
    let space = u.space();
    assert!(Arc::ptr_eq(space, v.space()), "functions on different spaces");
    let mesh = space.mesh();
    let mut l2 = 0.0;
    let mut h1 = 0.0;
    for t in 0..mesh.n_tets() as u32 {
        let geom = space.geometry(t);
        let vid = mesh.tet(t);
        let uv = [
            u.values()[vid[0] as usize],
            u.values()[vid[1] as usize],
            u.values()[vid[2] as usize],
            u.values()[vid[3] as usize],
        ];
        let vv = [
            v.values()[vid[0] as usize],
            v.values()[vid[1] as usize],
            v.values()[vid[2] as usize],
            v.values()[vid[3] as usize],
        ];
        for i in 0..4 {
            for j in 0..4 {
                l2 += geom.volume * MASS_W[i][j] * uv[i] * vv[j];
            }
        }
        let gu = u.gradient_in_tet(t, &geom);
        let gv = v.gradient_in_tet(t, &geom);
        h1 += geom.volume * (gu[0] * gv[0] + gu[1] * gv[1] + gu[2] * gv[2]);
    }
    (l2, h1)
}

/// Nodal interpolation of a coarse function onto a refinement descendant.
/// Exact for nested P1 spaces.
pub fn prolong(f: &FeFunction, fine: &Arc<FeSpace>) -> Result<FeFunction> {
    let coarse_mesh = f.space().mesh();
    let fine_mesh = fine.mesh();
    if !fine_mesh.descends_from(coarse_mesh) {
        return Err(Error::NotNested);
    }
    let mut chain: Vec<Arc<Mesh>> = Vec::new();
    let mut cur = fine_mesh.clone();
    while cur.id() != coarse_mesh.id() {
        let parent = cur.parent_mesh().expect("descends_from checked").clone();
        chain.push(cur);
        cur = parent;
    }
    chain.reverse();
    let mut values = f.values().to_vec();
    for mesh in &chain {
        values.resize(mesh.n_vertices(), 0.0);
        for v in mesh.n_inherited_vertices()..mesh.n_vertices() {
            let (a, b) = mesh
                .vertex_parent_edge(v as u32)
                .expect("created vertex has parents");
            values[v] = 0.5 * (values[a as usize] + values[b as usize]);
        }
    }
    Ok(FeFunction::from_vertex_values(fine, values))
}

/// Representation of every coarse interior basis function on a fine
/// (descendant) space, with support adjacency for assembly loops.
#[derive(Debug)]
pub struct CoarseBasisOnFine {
    pub coarse: Arc<FeSpace>,
    pub fine: Arc<FeSpace>,
    funcs: Vec<Vec<(u32, f64)>>,
    tet_dofs: Vec<Vec<(u32, [f64; 4])>>,
}

impl CoarseBasisOnFine {
    pub fn build(coarse: &Arc<FeSpace>, fine: &Arc<FeSpace>) -> Result<CoarseBasisOnFine> {
        if !fine.mesh().descends_from(coarse.mesh()) {
            return Err(Error::NotNested);
        }
        let n_h = coarse.n_dofs();
        let mut funcs = Vec::with_capacity(n_h);
        for m in 0..n_h {
            let mut unit = vec![0.0; coarse.n_dofs()];
            unit[m] = 1.0;
            let coarse_fn = FeFunction::from_dof_values(coarse, &unit);
            let fine_fn = prolong(&coarse_fn, fine)?;
            let sparse: Vec<(u32, f64)> = fine_fn
                .values()
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(i, &v)| (i as u32, v))
                .collect();
            funcs.push(sparse);
        }
        let n_fine_verts = fine.mesh().n_vertices();
        let mut vertex_dofs: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n_fine_verts];
        for (m, func) in funcs.iter().enumerate() {
            for &(v, val) in func {
                vertex_dofs[v as usize].push((m as u32, val));
            }
        }
        let fine_mesh = fine.mesh();
        let mut tet_dofs = Vec::with_capacity(fine_mesh.n_tets());
        let mut scratch: Vec<(u32, [f64; 4])> = Vec::new();
        for t in 0..fine_mesh.n_tets() as u32 {
            scratch.clear();
            let vid = fine_mesh.tet(t);
            for (k, &v) in vid.iter().enumerate() {
                for &(m, val) in &vertex_dofs[v as usize] {
                    match scratch.iter_mut().find(|(mm, _)| *mm == m) {
                        Some((_, vals)) => vals[k] = val,
                        None => {
                            let mut vals = [0.0; 4];
                            vals[k] = val;
                            scratch.push((m, vals));
                        }
                    }
                }
            }
            scratch.sort_unstable_by_key(|e| e.0);
            tet_dofs.push(scratch.clone());
        }
        Ok(CoarseBasisOnFine {
            coarse: coarse.clone(),
            fine: fine.clone(),
            funcs,
            tet_dofs,
        })
    }

    pub fn n_coarse_dofs(&self) -> usize {
        self.funcs.len()
    }

    pub fn sparse(&self, m: usize) -> &[(u32, f64)] {
        &self.funcs[m]
    }

    pub fn as_fe_function(&self, m: usize) -> FeFunction {
        let mut f = FeFunction::zero(&self.fine);
        for &(v, val) in &self.funcs[m] {
            f.values_mut()[v as usize] = val;
        }
        f
    }

    /// Coarse dofs overlapping fine tet `t` with their local vertex values.
    pub fn dofs_on_tet(&self, t: u32) -> &[(u32, [f64; 4])] {
        &self.tet_dofs[t as usize]
    }

    /// Unordered pairs (i <= j) of coarse dofs with intersecting support.
    pub fn overlapping_pairs(&self) -> Vec<(u32, u32)> {
        let mut set = std::collections::BTreeSet::new();
        for dofs in &self.tet_dofs {
            for a in 0..dofs.len() {
                for b in a..dofs.len() {
                    set.insert((dofs[a].0, dofs[b].0));
                }
            }
        }
        set.into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Box3;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn space(div: usize) -> Arc<FeSpace> {
        let mesh = Mesh::build_box(Box3::cube(1.0), [div; 3]).unwrap();
        FeSpace::new(Arc::new(mesh))
    }

    #[test]
    fn dof_counts_are_interior_vertices() {
        let s = space(3);
        assert_eq!(s.n_dofs(), 2 * 2 * 2);
        assert_eq!(s.n_dofs() + s.n_boundary(), s.mesh().n_vertices());
    }

    #[test]
    fn stiffness_energy_of_linear_function_is_volume() {
        let s = space(3);
        let a_full = assemble_stiffness_full(&s, 1.0);
        let u = FeFunction::interpolate(&s, |p| p[0]);
        let au = a_full.matvec_alloc(u.values());
        let energy: f64 = u.values().iter().zip(&au).map(|(a, b)| a * b).sum();
        assert_relative_eq!(energy, 8.0, max_relative = 1e-10);
    }

    #[test]
    fn stiffness_row_sums_vanish() {
        let s = space(2);
        let a_full = assemble_stiffness_full(&s, 0.5);
        let ones = vec![1.0; s.mesh().n_vertices()];
        let r = a_full.matvec_alloc(&ones);
        for v in r {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn mass_total_is_volume_and_symmetric() {
        let s = space(3);
        let m_full = assemble_mass_full(&s);
        let ones = vec![1.0; s.mesh().n_vertices()];
        let total: f64 = m_full.matvec_alloc(&ones).iter().sum();
        assert_relative_eq!(total, 8.0, max_relative = 1e-12);
        assert_eq!(m_full.asymmetry(), 0.0);
        let m = assemble_mass(&s);
        assert_eq!(m.asymmetry(), 0.0);
    }

    #[test]
    fn interior_mass_of_one_approaches_volume_under_refinement() {
        let mut mesh = Arc::new(Mesh::build_box(Box3::cube(1.0), [2; 3]).unwrap());
        let mut prev = 0.0;
        for step in 0..3 {
            let s = FeSpace::new(mesh.clone());
            let m = assemble_mass(&s);
            let ones = vec![1.0; s.n_dofs()];
            let val: f64 = m.matvec_alloc(&ones).iter().sum();
            assert!(val < 8.0);
            if step > 0 {
                assert!(val > prev, "interior mass must grow toward |Omega|");
            }
            prev = val;
            mesh = Arc::new(mesh.uniform_refine().unwrap());
        }
    }

    #[test]
    fn unit_potential_equals_mass() {
        let s = space(2);
        let m = assemble_mass(&s);
        let v = assemble_potential(&s, Potential::Fn(&|_| 1.0)).unwrap();
        let vc = assemble_potential(&s, Potential::Fn(&|_| 2.5)).unwrap();
        for i in 0..s.n_dofs() {
            let (cols, vals) = m.row(i);
            for (c, mv) in cols.iter().zip(vals) {
                assert_relative_eq!(v.get(i, *c as usize), *mv, max_relative = 1e-12);
                assert_relative_eq!(vc.get(i, *c as usize), 2.5 * mv, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn hydrogen_rayleigh_quotient_bounded_below() {
        // Offset box so no vertex or quad node hits the nucleus at origin.
        let mesh = Mesh::build_box(
            Box3 {
                lo: [-8.05; 3],
                hi: [7.95; 3],
            },
            [8; 3],
        )
        .unwrap();
        let s = FeSpace::new(Arc::new(mesh));
        let k = assemble_stiffness(&s, 0.5);
        let m = assemble_mass(&s);
        let vext = assemble_potential(
            &s,
            Potential::Fn(&|p: &[f64; 3]| {
                -1.0 / (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
            }),
        )
        .unwrap();
        let u = FeFunction::interpolate(&s, |p| {
            (-(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()).exp()
        });
        let ud = u.dof_values();
        let quad = |mat: &SparseMatrix| -> f64 {
            let y = mat.matvec_alloc(&ud);
            ud.iter().zip(&y).map(|(a, b)| a * b).sum()
        };
        let rq = (quad(&k) + quad(&vext)) / quad(&m);
        assert!(rq >= -0.5, "variational bound violated: {rq}");
        assert!(rq < 0.0, "trial state should be bound: {rq}");
    }

    #[test]
    fn load_of_p1_function_is_mass_times_coeffs() {
        let s = space(3);
        let m = assemble_mass(&s);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let dofs: Vec<f64> = (0..s.n_dofs()).map(|_| rng.random::<f64>() - 0.5).collect();
        let f = FeFunction::from_dof_values(&s, &dofs);
        let load = assemble_load_fe(&s, &f);
        let expect = m.matvec_alloc(&dofs);
        for (a, b) in load.iter().zip(&expect) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
        let zero = assemble_load_fe(&s, &FeFunction::zero(&s));
        assert!(zero.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn prolongation_exact_for_linears_and_norm_preserving() {
        let coarse_mesh = Arc::new(Mesh::build_box(Box3::cube(1.0), [2; 3]).unwrap());
        let fine_mesh = Arc::new(coarse_mesh.uniform_refine().unwrap());
        let coarse = FeSpace::new(coarse_mesh);
        let fine = FeSpace::new(fine_mesh);

        let one = FeFunction::interpolate(&coarse, |_| 1.0);
        let one_f = prolong(&one, &fine).unwrap();
        assert!(one_f.values().iter().all(|&v| (v - 1.0).abs() < 1e-15));

        let x = FeFunction::interpolate(&coarse, |p| p[0]);
        let x_f = prolong(&x, &fine).unwrap();
        let x_fine_direct = FeFunction::interpolate(&fine, |p| p[0]);
        for (a, b) in x_f.values().iter().zip(x_fine_direct.values()) {
            assert_relative_eq!(a, b, epsilon = 1e-14);
        }

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let dofs: Vec<f64> = (0..coarse.n_dofs()).map(|_| rng.random::<f64>()).collect();
        let f = FeFunction::from_dof_values(&coarse, &dofs);
        let f_fine = prolong(&f, &fine).unwrap();
        let (l2_coarse, h1_coarse) = inner_products(&f, &f);
        let (l2_fine, h1_fine) = inner_products(&f_fine, &f_fine);
        assert_relative_eq!(l2_coarse, l2_fine, max_relative = 1e-12);
        assert_relative_eq!(h1_coarse, h1_fine, max_relative = 1e-12);

        let other = FeSpace::new(Arc::new(Mesh::build_box(Box3::cube(1.0), [2; 3]).unwrap()));
        assert!(matches!(prolong(&f, &other), Err(Error::NotNested)));
    }

    #[test]
    fn inner_products_bilinear() {
        let s = space(2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut randfn = || {
            let d: Vec<f64> = (0..s.n_dofs()).map(|_| rng.random::<f64>() - 0.5).collect();
            FeFunction::from_dof_values(&s, &d)
        };
        let u = randfn();
        let v = randfn();
        let w = randfn();
        let (a, b) = (1.7, -0.4);
        let mut lin = u.clone();
        lin.scale(a);
        lin.axpy(b, &v);
        let (l2_lin, h1_lin) = inner_products(&lin, &w);
        let (l2_u, h1_u) = inner_products(&u, &w);
        let (l2_v, h1_v) = inner_products(&v, &w);
        assert_relative_eq!(l2_lin, a * l2_u + b * l2_v, max_relative = 1e-12);
        assert_relative_eq!(h1_lin, a * h1_u + b * h1_v, max_relative = 1e-12);
        let (uu, _) = inner_products(&u, &u);
        assert!(uu >= 0.0);
    }

    #[test]
    fn coarse_basis_on_fine_partition_and_sparsity() {
        let coarse_mesh = Arc::new(Mesh::build_box(Box3::cube(1.0), [2; 3]).unwrap());
        let fine_mesh = Arc::new(
            Arc::new(coarse_mesh.uniform_refine().unwrap())
                .uniform_refine()
                .unwrap(),
        );
        let coarse = FeSpace::new(coarse_mesh.clone());
        let fine = FeSpace::new(fine_mesh);
        let basis = CoarseBasisOnFine::build(&coarse, &fine).unwrap();

        // Partition of unity including boundary coarse vertices.
        let mut total = FeFunction::zero(&fine);
        for v in 0..coarse_mesh.n_vertices() {
            let mut vals = vec![0.0; coarse_mesh.n_vertices()];
            vals[v] = 1.0;
            let f = FeFunction::from_vertex_values(&coarse, vals);
            total.axpy(1.0, &prolong(&f, &fine).unwrap());
        }
        assert!(total.values().iter().all(|&v| (v - 1.0).abs() < 1e-12));

        for m in 0..basis.n_coarse_dofs() {
            let f = basis.as_fe_function(m);
            let again = prolong(&f, &fine).unwrap();
            for (a, b) in f.values().iter().zip(again.values()) {
                assert_eq!(a, b);
            }
            let cm = coarse.vertex_of_dof(m);
            for &(v, _val) in basis.sparse(m) {
                let p = fine.mesh().vertex(v);
                let mut inside = false;
                for t in 0..coarse_mesh.n_tets() as u32 {
                    if coarse_mesh.tet(t).contains(&cm)
                        && coarse_mesh.barycentric_in(t, p, 1e-12).is_some()
                    {
                        inside = true;
                        break;
                    }
                }
                assert!(inside, "nonzero outside coarse support");
            }
        }
    }

    #[test]
    fn galerkin_consistency_under_prolongation() {
        let coarse_mesh = Arc::new(Mesh::build_box(Box3::cube(1.0), [2; 3]).unwrap());
        let fine_mesh = Arc::new(coarse_mesh.uniform_refine().unwrap());
        let coarse = FeSpace::new(coarse_mesh);
        let fine = FeSpace::new(fine_mesh);
        let a_coarse = assemble_stiffness(&coarse, 1.0);
        let a_fine = assemble_stiffness(&fine, 1.0);
        let n = coarse.n_dofs();
        let mut prolonged: Vec<Vec<f64>> = Vec::new();
        for m in 0..n {
            let mut unit = vec![0.0; n];
            unit[m] = 1.0;
            let f = FeFunction::from_dof_values(&coarse, &unit);
            prolonged.push(prolong(&f, &fine).unwrap().dof_values());
        }
        for i in 0..n {
            let api = a_fine.matvec_alloc(&prolonged[i]);
            for j in 0..n {
                let ptap: f64 = api.iter().zip(&prolonged[j]).map(|(a, b)| a * b).sum();
                assert_relative_eq!(ptap, a_coarse.get(i, j), epsilon = 1e-10);
            }
        }
    }
}

//! Conforming triangulations of the slit disk and of the unit sphere with a
//! cut along the half-equator.
//!
//! Slit topology: every geometric location strictly inside the crack hosts
//! two vertex ids (one per side) with identical coordinates; the tip hosts
//! one. Natural Neumann conditions on the crack then need no special
//! assembly logic at all.
//!
//! The disk is graded geometrically toward the tip (the `k₀ = 1` solution
//! carries an `r^{1/2}` singularity, and quasi-uniform meshes lose half an
//! order of convergence). Near the center the angular resolution is halved
//! in dyadic transition layers so that the central fan keeps its minimum
//! angle above the 20° shape-regularity floor.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::{Error, Result, Side};

pub const MIN_ANGLE_DEG: f64 = 20.0;

#[derive(Debug, Clone)]
pub struct SlitMesh {
    /// 2 for the slit disk (z ignored), 3 for the slit sphere.
    pub dim: usize,
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
    /// (upper_id, lower_id) per duplicated crack-interior location.
    pub crack_pairs: Vec<(u32, u32)>,
    /// One entry for the disk tip; the two cut endpoints for the sphere.
    pub tip_vertices: Vec<u32>,
    /// Outer circle ids for the disk; empty for the closed sphere surface.
    pub outer_boundary: Vec<u32>,
    pub grading_ratio: f64,
    pub levels: u32,
}

/// Conforming triangulation of the disk of given radius with a slit along
/// the positive x-axis, graded toward the tip.
///
/// `base_resolution` is the angular subdivision of the outermost ring;
/// `levels` geometric bands shrink radii by `grading_ratio` each, so the
/// smallest elements at the tip have diameter ≈ `radius·grading_ratio^levels`.
pub fn make_slit_disk(
    radius: f64,
    levels: u32,
    grading_ratio: f64,
    base_resolution: usize,
) -> Result<SlitMesh> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("radius {radius} must be positive")));
    }
    if !(grading_ratio > 0.1 && grading_ratio < 0.9) {
        return Err(Error::InvalidArgument(format!(
            "grading_ratio {grading_ratio} outside (0.1, 0.9)"
        )));
    }
    if base_resolution < 8 {
        return Err(Error::InvalidArgument(format!(
            "base_resolution {base_resolution} below the minimum of 8"
        )));
    }

    let q = grading_ratio;
    // rings from the outer circle inward: (radius, angular count)
    let mut ring_params: Vec<(f64, usize)> = vec![(radius, base_resolution)];
    // radial substeps per band keep element aspect near one; rounding up is
    // what holds the thin-quad splits above the 20° angle floor
    let k_sub = ((base_resolution as f64) * (1.0 - q) / (2.0 * PI)).ceil().max(1.0) as usize;
    let rho = q.powf(1.0 / k_sub as f64);
    let mut r = radius;
    for _level in 0..levels {
        for _ in 0..k_sub {
            r *= rho;
            ring_params.push((r, base_resolution));
        }
    }
    // dyadic angular coarsening toward the tip
    let mut n = base_resolution;
    while n % 2 == 0 && n / 2 >= 8 {
        r *= 1.0 - 1.2 * 2.0 * PI / n as f64;
        n /= 2;
        ring_params.push((r, n));
    }

    let mut mesh = SlitMesh {
        dim: 2,
        vertices: Vec::new(),
        triangles: Vec::new(),
        crack_pairs: Vec::new(),
        tip_vertices: Vec::new(),
        outer_boundary: Vec::new(),
        grading_ratio,
        levels,
    };

    let mut rings: Vec<Vec<u32>> = Vec::with_capacity(ring_params.len());
    for &(rr, nn) in &ring_params {
        let mut ids = Vec::with_capacity(nn + 1);
        for j in 0..=nn {
            let id = mesh.vertices.len() as u32;
            if j == nn {
                // lower slit twin: bit-identical coordinates
                let twin = mesh.vertices[ids[0] as usize];
                mesh.vertices.push(twin);
            } else {
                let th = 2.0 * PI * j as f64 / nn as f64;
                mesh.vertices.push([rr * th.cos(), rr * th.sin(), 0.0]);
            }
            ids.push(id);
        }
        mesh.crack_pairs.push((ids[0], ids[nn]));
        rings.push(ids);
    }
    let tip = mesh.vertices.len() as u32;
    mesh.vertices.push([0.0, 0.0, 0.0]);
    mesh.tip_vertices.push(tip);
    mesh.outer_boundary = rings[0].clone();

    for w in 0..rings.len() - 1 {
        let outer = &rings[w];
        let inner = &rings[w + 1];
        let no = outer.len() - 1;
        let ni = inner.len() - 1;
        if no == ni {
            for j in 0..no {
                mesh.push_tri_2d(outer[j], outer[j + 1], inner[j + 1])?;
                mesh.push_tri_2d(outer[j], inner[j + 1], inner[j])?;
            }
        } else if no == 2 * ni {
            for j in 0..ni {
                mesh.push_tri_2d(outer[2 * j], outer[2 * j + 1], inner[j])?;
                mesh.push_tri_2d(outer[2 * j + 1], inner[j + 1], inner[j])?;
                mesh.push_tri_2d(outer[2 * j + 1], outer[2 * j + 2], inner[j + 1])?;
            }
        } else {
            return Err(Error::Mesh(format!("incompatible ring resolutions {no} and {ni}")));
        }
    }
    let fan = rings.last().unwrap();
    for j in 0..fan.len() - 1 {
        mesh.push_tri_2d(fan[j], fan[j + 1], tip)?;
    }

    let min_angle = mesh.min_angle_deg();
    if min_angle < MIN_ANGLE_DEG - 1e-9 {
        return Err(Error::MinAngle { found_deg: min_angle });
    }
    mesh.validate()?;
    Ok(mesh)
}

/// Triangulation of the unit sphere with a cut along the half-equator
/// `Σ = {x₃ = 0, x₂ ≥ 0}`.
///
/// Built by subdividing the octahedron `resolution` times per edge and
/// projecting to the sphere: the equator is then an exact union of edges and
/// the cut endpoints `(±1, 0, 0)` fall on vertices, which stay single
/// (crack-tip rule); cut-interior vertices are duplicated north/south.
pub fn make_slit_sphere(resolution: usize) -> Result<SlitMesh> {
    if resolution < 16 {
        return Err(Error::InvalidArgument(format!(
            "sphere resolution {resolution} below the minimum of 16"
        )));
    }
    let n = resolution as i64;
    let mut key_to_id: HashMap<(i64, i64, i64), u32> = HashMap::new();
    let mut keys: Vec<(i64, i64, i64)> = Vec::new();
    let mut vertices: Vec<[f64; 3]> = Vec::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();

    let mut id_of = |key: (i64, i64, i64),
                     keys: &mut Vec<(i64, i64, i64)>,
                     vertices: &mut Vec<[f64; 3]>|
     -> u32 {
        if let Some(&id) = key_to_id.get(&key) {
            return id;
        }
        let id = vertices.len() as u32;
        let v = [key.0 as f64, key.1 as f64, key.2 as f64];
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        vertices.push([v[0] / norm, v[1] / norm, v[2] / norm]);
        keys.push(key);
        key_to_id.insert(key, id);
        id
    };

    for &sx in &[1i64, -1] {
        for &sy in &[1i64, -1] {
            for &sz in &[1i64, -1] {
                // octant face with corners (sx,0,0), (0,sy,0), (0,0,sz);
                // grid point (i, j) ↦ integer key (i·sx, j·sy, (n-i-j)·sz)
                let key = |i: i64, j: i64| (i * sx, j * sy, (n - i - j) * sz);
                for i in 0..n {
                    for j in 0..n - i {
                        let a = id_of(key(i, j), &mut keys, &mut vertices);
                        let b = id_of(key(i + 1, j), &mut keys, &mut vertices);
                        let c = id_of(key(i, j + 1), &mut keys, &mut vertices);
                        triangles.push([a, b, c]);
                        if i + j < n - 1 {
                            let d = id_of(key(i + 1, j + 1), &mut keys, &mut vertices);
                            triangles.push([b, d, c]);
                        }
                    }
                }
            }
        }
    }

    // outward orientation
    for t in triangles.iter_mut() {
        let a = vertices[t[0] as usize];
        let b = vertices[t[1] as usize];
        let c = vertices[t[2] as usize];
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let nvec = cross(u, v);
        let center = [a[0] + b[0] + c[0], a[1] + b[1] + c[1], a[2] + b[2] + c[2]];
        if nvec[0] * center[0] + nvec[1] * center[1] + nvec[2] * center[2] < 0.0 {
            t.swap(1, 2);
        }
    }

    // duplicate cut-interior vertices (z = 0, y > 0); endpoints (±n, 0, 0)
    // follow the crack-tip rule and stay single
    let mut twin: HashMap<u32, u32> = HashMap::new();
    let mut crack_pairs = Vec::new();
    let cut_ids: Vec<u32> = (0..vertices.len() as u32)
        .filter(|&id| {
            let k = keys[id as usize];
            k.2 == 0 && k.1 > 0
        })
        .collect();
    for &id in &cut_ids {
        let t = vertices.len() as u32;
        vertices.push(vertices[id as usize]);
        twin.insert(id, t);
        crack_pairs.push((id, t));
    }
    for t in triangles.iter_mut() {
        let zsum: i64 = t.iter().map(|&v| keys.get(v as usize).map_or(0, |k| k.2)).sum();
        if zsum < 0 {
            for v in t.iter_mut() {
                if let Some(&tw) = twin.get(v) {
                    *v = tw;
                }
            }
        }
    }

    let tip_a = *key_to_id.get(&(n, 0, 0)).expect("cut endpoint (1,0,0) must exist");
    let tip_b = *key_to_id.get(&(-n, 0, 0)).expect("cut endpoint (-1,0,0) must exist");

    let mesh = SlitMesh {
        dim: 3,
        vertices,
        triangles,
        crack_pairs,
        tip_vertices: vec![tip_a, tip_b],
        outer_boundary: Vec::new(),
        grading_ratio: 0.5,
        levels: 0,
    };
    mesh.validate()?;
    Ok(mesh)
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

impl SlitMesh {
    fn push_tri_2d(&mut self, a: u32, b: u32, c: u32) -> Result<()> {
        let pa = self.vertices[a as usize];
        let pb = self.vertices[b as usize];
        let pc = self.vertices[c as usize];
        let area =
            0.5 * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]));
        if area.abs() < 1e-300 {
            return Err(Error::Mesh(format!("degenerate triangle ({a}, {b}, {c})")));
        }
        if area > 0.0 {
            self.triangles.push([a, b, c]);
        } else {
            self.triangles.push([a, c, b]);
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn coords2(&self, id: u32) -> [f64; 2] {
        let v = self.vertices[id as usize];
        [v[0], v[1]]
    }

    pub fn tri_coords2(&self, t: usize) -> [[f64; 2]; 3] {
        let tr = self.triangles[t];
        [self.coords2(tr[0]), self.coords2(tr[1]), self.coords2(tr[2])]
    }

    /// Signed area of a 2D triangle; positive by construction.
    pub fn area2(&self, t: usize) -> f64 {
        let [a, b, c] = self.tri_coords2(t);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    /// Unsigned area of a (possibly 3D) triangle.
    pub fn area(&self, t: usize) -> f64 {
        let tr = self.triangles[t];
        let a = self.vertices[tr[0] as usize];
        let b = self.vertices[tr[1] as usize];
        let c = self.vertices[tr[2] as usize];
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let n = cross(u, v);
        0.5 * (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.area(t)).sum()
    }

    pub fn min_angle_deg(&self) -> f64 {
        let mut min = f64::MAX;
        for t in &self.triangles {
            let p: Vec<[f64; 3]> = t.iter().map(|&i| self.vertices[i as usize]).collect();
            for i in 0..3 {
                let a = p[i];
                let b = p[(i + 1) % 3];
                let c = p[(i + 2) % 3];
                let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
                let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
                let du = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
                let dv = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                let cosang = (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]) / (du * dv);
                min = min.min(cosang.clamp(-1.0, 1.0).acos().to_degrees());
            }
        }
        min
    }

    pub fn max_diameter(&self) -> f64 {
        let mut max: f64 = 0.0;
        for t in 0..self.triangles.len() {
            max = max.max(self.diameter(t));
        }
        max
    }

    pub fn diameter(&self, t: usize) -> f64 {
        let tr = self.triangles[t];
        let p: Vec<[f64; 3]> = tr.iter().map(|&i| self.vertices[i as usize]).collect();
        let mut d: f64 = 0.0;
        for i in 0..3 {
            let a = p[i];
            let b = p[(i + 1) % 3];
            let e = [(b[0] - a[0]), (b[1] - a[1]), (b[2] - a[2])];
            d = d.max((e[0] * e[0] + e[1] * e[1] + e[2] * e[2]).sqrt());
        }
        d
    }

    /// Diameter of the smallest tip-adjacent element.
    pub fn tip_element_diameter(&self) -> f64 {
        let mut d = f64::MAX;
        for (t, tr) in self.triangles.iter().enumerate() {
            if tr.iter().any(|v| self.tip_vertices.contains(v)) {
                d = d.min(self.diameter(t));
            }
        }
        d
    }

    /// Upper-side slit vertex ids (excluding tips).
    pub fn upper_slit_ids(&self) -> Vec<u32> {
        self.crack_pairs.iter().map(|&(u, _)| u).collect()
    }

    pub fn lower_slit_ids(&self) -> Vec<u32> {
        self.crack_pairs.iter().map(|&(_, l)| l).collect()
    }

    /// Per-triangle slit side: `Some(side)` for triangles touching the slit,
    /// `None` elsewhere. One pass; callers cache the result.
    pub fn side_classification(&self) -> Vec<Option<Side>> {
        let upper: std::collections::HashSet<u32> = self.upper_slit_ids().into_iter().collect();
        let lower: std::collections::HashSet<u32> = self.lower_slit_ids().into_iter().collect();
        self.triangles
            .iter()
            .map(|tr| {
                if tr.iter().any(|v| upper.contains(v)) {
                    Some(Side::Upper)
                } else if tr.iter().any(|v| lower.contains(v)) {
                    Some(Side::Lower)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Which side of the slit a triangle lives on, if it touches the slit.
    pub fn triangle_side(&self, t: usize) -> Option<Side> {
        self.side_classification()[t]
    }

    /// Distinct radial layers (clusters of vertex radii) strictly inside `r`,
    /// excluding the tip itself. The frequency quadrature demands a minimum
    /// number of these.
    pub fn layers_inside(&self, r: f64) -> usize {
        let mut radii: Vec<f64> = self
            .vertices
            .iter()
            .map(|v| (v[0] * v[0] + v[1] * v[1]).sqrt())
            .filter(|&x| x > 1e-14 && x < r)
            .collect();
        radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut layers = 0;
        let mut last = -1.0;
        for x in radii {
            if last < 0.0 || (x - last) > 1e-9 * (1.0 + x) {
                layers += 1;
                last = x;
            }
        }
        layers
    }

    /// Structural validation of every SlitMesh invariant.
    pub fn validate(&self) -> Result<()> {
        let nv = self.vertices.len() as u32;
        if !(self.dim == 2 || self.dim == 3) {
            return Err(Error::Mesh(format!("dimension {} not supported", self.dim)));
        }
        if !(self.grading_ratio > 0.0 && self.grading_ratio < 1.0) {
            return Err(Error::Mesh(format!("grading ratio {} outside (0,1)", self.grading_ratio)));
        }
        if self.vertices.iter().any(|v| !v.iter().all(|x| x.is_finite())) {
            return Err(Error::Mesh("non-finite vertex coordinates".into()));
        }
        for t in &self.triangles {
            if t.iter().any(|&v| v >= nv) {
                return Err(Error::Mesh(format!("triangle {t:?} references a missing vertex")));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::Mesh(format!("triangle {t:?} repeats a vertex")));
            }
        }
        for &(u, l) in &self.crack_pairs {
            if u >= nv || l >= nv || u == l {
                return Err(Error::Mesh(format!("bad crack pair ({u}, {l})")));
            }
            let cu = self.vertices[u as usize];
            let cl = self.vertices[l as usize];
            if cu.iter().zip(&cl).any(|(a, b)| a.to_bits() != b.to_bits()) {
                return Err(Error::Mesh(format!(
                    "crack pair ({u}, {l}) coordinates differ: {cu:?} vs {cl:?}"
                )));
            }
        }
        for &t in &self.tip_vertices {
            if t >= nv {
                return Err(Error::Mesh(format!("tip vertex {t} out of range")));
            }
        }
        if self.dim == 2 {
            match self.tip_vertices.as_slice() {
                [t] => {
                    let c = self.vertices[*t as usize];
                    if c[0] != 0.0 || c[1] != 0.0 {
                        return Err(Error::Mesh(format!("disk tip not at the origin: {c:?}")));
                    }
                }
                other => {
                    return Err(Error::Mesh(format!(
                        "a slit disk must have exactly one tip vertex, got {}",
                        other.len()
                    )))
                }
            }
            for t in 0..self.triangles.len() {
                if self.area2(t) <= 0.0 {
                    return Err(Error::Mesh(format!("triangle {t} not positively oriented")));
                }
            }
        }

        let min_angle = self.min_angle_deg();
        if min_angle < MIN_ANGLE_DEG - 1e-9 {
            return Err(Error::MinAngle { found_deg: min_angle });
        }

        // edge incidence: interior edges twice, slit and outer edges once
        let mut edge_count: HashMap<(u32, u32), u32> = HashMap::new();
        for t in &self.triangles {
            for e in 0..3 {
                let a = t[e];
                let b = t[(e + 1) % 3];
                let key = (a.min(b), a.max(b));
                *edge_count.entry(key).or_insert(0) += 1;
            }
        }
        let upper: std::collections::HashSet<u32> = self.upper_slit_ids().into_iter().collect();
        let lower: std::collections::HashSet<u32> = self.lower_slit_ids().into_iter().collect();
        let tips: std::collections::HashSet<u32> = self.tip_vertices.iter().copied().collect();
        let outer: std::collections::HashSet<u32> = self.outer_boundary.iter().copied().collect();
        for (&(a, b), &cnt) in &edge_count {
            match cnt {
                1 => {
                    let on_upper = (upper.contains(&a) || tips.contains(&a))
                        && (upper.contains(&b) || tips.contains(&b));
                    let on_lower = (lower.contains(&a) || tips.contains(&a))
                        && (lower.contains(&b) || tips.contains(&b));
                    let on_outer = outer.contains(&a) && outer.contains(&b);
                    if !(on_upper || on_lower || on_outer) {
                        return Err(Error::Mesh(format!(
                            "boundary edge ({a}, {b}) is neither slit nor outer boundary"
                        )));
                    }
                }
                2 => {}
                n => {
                    return Err(Error::Mesh(format!("edge ({a}, {b}) shared by {n} triangles")));
                }
            }
        }

        // slit separation: no triangle mixes the two sides
        for (t, tr) in self.triangles.iter().enumerate() {
            let has_up = tr.iter().any(|v| upper.contains(v));
            let has_lo = tr.iter().any(|v| lower.contains(v));
            if has_up && has_lo {
                return Err(Error::Mesh(format!("triangle {t} spans both slit sides")));
            }
        }

        // Euler relation for a (cut-open) disk-like surface, duplicated
        // vertices and edges counted separately
        let v = self.vertices.len() as i64;
        let e = edge_count.len() as i64;
        let f = self.triangles.len() as i64;
        if v - e + f != 1 {
            return Err(Error::Mesh(format!("Euler defect: V-E+F = {} ≠ 1", v - e + f)));
        }
        Ok(())
    }

    /// Uniform-grid point locator for interpolation queries on disk meshes.
    pub fn locator(&self) -> PointLocator<'_> {
        PointLocator::new(self)
    }
}

/// Uniform-grid spatial index over a 2D slit mesh.
pub struct PointLocator<'a> {
    mesh: &'a SlitMesh,
    sides: Vec<Option<Side>>,
    min: [f64; 2],
    cell: f64,
    nx: usize,
    ny: usize,
    bins: Vec<Vec<u32>>,
}

impl<'a> PointLocator<'a> {
    fn new(mesh: &'a SlitMesh) -> Self {
        assert_eq!(mesh.dim, 2, "point location is a disk-mesh facility");
        let mut min = [f64::MAX; 2];
        let mut max = [f64::MIN; 2];
        for v in &mesh.vertices {
            for d in 0..2 {
                min[d] = min[d].min(v[d]);
                max[d] = max[d].max(v[d]);
            }
        }
        let nt = mesh.triangles.len().max(1);
        let extent = (max[0] - min[0]).max(max[1] - min[1]).max(1e-12);
        let ncell = ((nt as f64).sqrt().ceil() as usize).clamp(4, 512);
        let cell = extent / ncell as f64;
        let nx = ((max[0] - min[0]) / cell).ceil() as usize + 2;
        let ny = ((max[1] - min[1]) / cell).ceil() as usize + 2;
        let mut bins = vec![Vec::new(); nx * ny];
        for (t, _) in mesh.triangles.iter().enumerate() {
            let [a, b, c] = mesh.tri_coords2(t);
            let tmin = [
                a[0].min(b[0]).min(c[0]),
                a[1].min(b[1]).min(c[1]),
            ];
            let tmax = [
                a[0].max(b[0]).max(c[0]),
                a[1].max(b[1]).max(c[1]),
            ];
            let i0 = (((tmin[0] - min[0]) / cell).floor() as isize).clamp(0, nx as isize - 1);
            let i1 = (((tmax[0] - min[0]) / cell).floor() as isize).clamp(0, nx as isize - 1);
            let j0 = (((tmin[1] - min[1]) / cell).floor() as isize).clamp(0, ny as isize - 1);
            let j1 = (((tmax[1] - min[1]) / cell).floor() as isize).clamp(0, ny as isize - 1);
            for i in i0..=i1 {
                for j in j0..=j1 {
                    bins[j as usize * nx + i as usize].push(t as u32);
                }
            }
        }
        PointLocator { mesh, sides: mesh.side_classification(), min, cell, nx, ny, bins }
    }

    /// Containing triangle and barycentric coordinates. On the slit the
    /// `side` tag disambiguates between the geometrically coincident upper
    /// and lower triangles.
    pub fn locate(&self, p: [f64; 2], side: Side) -> Option<(usize, [f64; 3])> {
        let i = (((p[0] - self.min[0]) / self.cell).floor() as isize).clamp(0, self.nx as isize - 1);
        let j = (((p[1] - self.min[1]) / self.cell).floor() as isize).clamp(0, self.ny as isize - 1);
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for dj in -1..=1isize {
            for di in -1..=1isize {
                let ii = i + di;
                let jj = j + dj;
                if ii < 0 || jj < 0 || ii >= self.nx as isize || jj >= self.ny as isize {
                    continue;
                }
                for &t in &self.bins[jj as usize * self.nx + ii as usize] {
                    let t = t as usize;
                    if let Some(bary) = self.bary_in(t, p) {
                        let side_pref = match self.sides[t] {
                            Some(s) if s == side => 0.0,
                            Some(_) => 1.0,
                            None => 0.5,
                        };
                        let worst = -bary.iter().cloned().fold(f64::MAX, f64::min);
                        let score = side_pref + worst;
                        if best.as_ref().map_or(true, |&(_, _, s)| score < s) {
                            best = Some((t, bary, score));
                        }
                    }
                }
            }
        }
        best.map(|(t, b, _)| (t, b))
    }

    fn bary_in(&self, t: usize, p: [f64; 2]) -> Option<[f64; 3]> {
        let [a, b, c] = self.mesh.tri_coords2(t);
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        if det.abs() < 1e-300 {
            return None;
        }
        let l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])) / det;
        let l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])) / det;
        let l0 = 1.0 - l1 - l2;
        let tol = -1e-10;
        if l0 >= tol && l1 >= tol && l2 >= tol {
            Some([l0, l1, l2])
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_disk_topology() {
        let mesh = make_slit_disk(1.0, 0, 0.5, 8).unwrap();
        assert!(!mesh.crack_pairs.is_empty());
        assert_eq!(mesh.tip_vertices.len(), 1);
        mesh.validate().unwrap();
    }

    #[test]
    fn disk_area_converges() {
        let mesh = make_slit_disk(1.0, 4, 0.5, 64).unwrap();
        let area = mesh.total_area();
        assert!(
            (area - PI).abs() / PI < 0.005,
            "area {area} vs π, defect {:.4}%",
            (area - PI).abs() / PI * 100.0
        );
        // scaling with radius
        let mesh = make_slit_disk(2.5, 2, 0.5, 64).unwrap();
        let area = mesh.total_area();
        let want = PI * 2.5 * 2.5;
        assert!((area - want).abs() / want < 0.005);
    }

    #[test]
    fn grading_shrinks_tip_elements() {
        let d4 = make_slit_disk(1.0, 4, 0.5, 32).unwrap();
        let d6 = make_slit_disk(1.0, 6, 0.5, 32).unwrap();
        let ratio = d6.tip_element_diameter() / d4.tip_element_diameter();
        // two extra levels at ratio 0.5 each
        assert!(
            (ratio - 0.25).abs() < 0.05,
            "tip diameter ratio {ratio}, want ≈ 0.25"
        );
        let scale = d4.tip_element_diameter() / 0.5f64.powi(4);
        assert!(scale > 0.05 && scale < 2.0, "tip scale {scale}");
    }

    #[test]
    fn refinement_halves_max_diameter() {
        let coarse = make_slit_disk(1.0, 3, 0.5, 32).unwrap();
        let fine = make_slit_disk(1.0, 3, 0.5, 64).unwrap();
        let ratio = fine.max_diameter() / coarse.max_diameter();
        assert!((0.4..=0.6).contains(&ratio), "diameter ratio {ratio}");
    }

    #[test]
    fn slit_vertices_are_bit_identical_twins() {
        let mesh = make_slit_disk(1.0, 3, 0.5, 32).unwrap();
        for &(u, l) in &mesh.crack_pairs {
            let cu = mesh.vertices[u as usize];
            let cl = mesh.vertices[l as usize];
            assert_eq!(cu[0].to_bits(), cl[0].to_bits());
            assert_eq!(cu[1].to_bits(), cl[1].to_bits());
            assert!(cu[1] == 0.0 && cu[0] > 0.0, "slit vertices on the positive x-axis");
        }
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(make_slit_disk(0.0, 2, 0.5, 32).is_err());
        assert!(make_slit_disk(1.0, 2, 0.05, 32).is_err());
        assert!(make_slit_disk(1.0, 2, 0.95, 32).is_err());
        assert!(make_slit_disk(1.0, 2, 0.5, 4).is_err());
        // 38 → 19 leaves a fan with apex < 20°
        assert!(matches!(make_slit_disk(1.0, 1, 0.5, 38), Err(Error::MinAngle { .. })));
    }

    #[test]
    fn locator_resolves_slit_sides() {
        let mesh = make_slit_disk(1.0, 2, 0.5, 32).unwrap();
        let loc = mesh.locator();
        let upper: std::collections::HashSet<u32> = mesh.upper_slit_ids().into_iter().collect();
        let (t_up, _) = loc.locate([0.6, 0.0], Side::Upper).unwrap();
        assert!(mesh.triangles[t_up].iter().any(|v| upper.contains(v)));
        let lower: std::collections::HashSet<u32> = mesh.lower_slit_ids().into_iter().collect();
        let (t_lo, _) = loc.locate([0.6, 0.0], Side::Lower).unwrap();
        assert!(mesh.triangles[t_lo].iter().any(|v| lower.contains(v)));
        // off-slit points resolve by geometry alone
        let (t, bary) = loc.locate([0.3, 0.2], Side::Upper).unwrap();
        let [a, b, c] = mesh.tri_coords2(t);
        let x = bary[0] * a[0] + bary[1] * b[0] + bary[2] * c[0];
        let y = bary[0] * a[1] + bary[1] * b[1] + bary[2] * c[1];
        assert!((x - 0.3).abs() < 1e-12 && (y - 0.2).abs() < 1e-12);
        // outside the disk: no hit
        assert!(loc.locate([1.5, 0.0], Side::Upper).is_none());
    }

    #[test]
    fn sphere_vertices_on_unit_sphere() {
        let mesh = make_slit_sphere(16).unwrap();
        for v in &mesh.vertices {
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_area_converges() {
        let mesh = make_slit_sphere(64).unwrap();
        let area = mesh.total_area();
        let want = 4.0 * PI;
        assert!(
            (area - want).abs() / want < 0.01,
            "sphere area {area} vs 4π, defect {:.3}%",
            (area - want).abs() / want * 100.0
        );
    }

    #[test]
    fn sphere_cut_topology() {
        let mesh = make_slit_sphere(16).unwrap();
        // cut-interior vertex count equals crack pair count by construction;
        // check it against an independent geometric count: grid vertices on
        // {z = 0, y > 0} form the open half-equator with 2·16 - 1 points
        assert_eq!(mesh.crack_pairs.len(), 2 * 16 - 1);
        assert_eq!(mesh.tip_vertices.len(), 2);
        for &t in &mesh.tip_vertices {
            let v = mesh.vertices[t as usize];
            assert!((v[0].abs() - 1.0).abs() < 1e-15 && v[1] == 0.0 && v[2] == 0.0);
        }
        // (0,1,0) is interior to the cut, hence duplicated
        let mid = mesh
            .crack_pairs
            .iter()
            .any(|&(u, _)| {
                let v = mesh.vertices[u as usize];
                (v[1] - 1.0).abs() < 1e-15
            });
        assert!(mid, "(0,1,0) must be a duplicated cut vertex");
        mesh.validate().unwrap();
    }

    #[test]
    fn sphere_euler_relation_matches_cut_disk() {
        // cutting the sphere along Σ leaves a disk-like surface: V-E+F = 1
        let mesh = make_slit_sphere(16).unwrap();
        let mut edges = std::collections::HashSet::new();
        for t in &mesh.triangles {
            for e in 0..3 {
                let a = t[e];
                let b = t[(e + 1) % 3];
                edges.insert((a.min(b), a.max(b)));
            }
        }
        let euler =
            mesh.vertices.len() as i64 - edges.len() as i64 + mesh.triangles.len() as i64;
        assert_eq!(euler, 1);
    }
}

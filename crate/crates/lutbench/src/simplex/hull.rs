//! Incremental convex hull of lifted points.
//!
//! Delaunay triangulation via the classic lifting map: each normalized point
//! `x` in [0,1]^D becomes `(x, |x|^2 / D)` in D+1 dimensions, the convex
//! hull of the lifted set is built incrementally, and the facets whose
//! outward normal points down in the height coordinate project back to the
//! Delaunay simplices.
//!
//! Predicates are floating point with an absolute tolerance (all lifted
//! coordinates lie in [0,1]); ties fall through to a symbolic perturbation
//! of the heights ordered by point index, which resolves cospherical inputs
//! such as the corner set of a bounds box deterministically. Degeneracies in
//! the base coordinates themselves (all points on a hyperplane) are real
//! errors and reported as such.

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Marker for "no neighbor" (hull boundary).
pub const NO_NEIGHBOR: u32 = u32::MAX;

/// Absolute predicate tolerance in normalized coordinates.
const TOL: f64 = 1e-10;

/// Determinant of a k x k matrix, in place, partial pivoting.
fn det_in_place(m: &mut [f64], k: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..k {
        let mut piv = col;
        let mut best = m[col * k + col].abs();
        for r in col + 1..k {
            let v = m[r * k + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != col {
            for j in 0..k {
                m.swap(col * k + j, piv * k + j);
            }
            det = -det;
        }
        let d = m[col * k + col];
        det *= d;
        let inv = 1.0 / d;
        for r in col + 1..k {
            let f = m[r * k + col] * inv;
            if f == 0.0 {
                continue;
            }
            for j in col + 1..k {
                m[r * k + j] -= f * m[col * k + j];
            }
        }
    }
    det
}

/// The hull builder. `e` is the lifted dimension D+1; facets are
/// (e-1)-simplices with `e` vertices each.
struct HullBuilder<'a> {
    e: usize,
    n: usize,
    /// Lifted coordinates, n x e row-major.
    pts: Vec<f64>,
    base: &'a Matrix,

    // Facet arena, slot-recycled.
    verts: Vec<u32>,
    neighbors: Vec<u32>,
    /// Unit outward normal plus offset, e+1 values per facet.
    planes: Vec<f64>,
    /// Whether the stored outward normal is the negation of the one implied
    /// by the stored vertex order.
    flipped: Vec<bool>,
    alive: Vec<bool>,
    conflicts: Vec<Vec<u32>>,
    free: Vec<u32>,

    /// A point strictly inside the initial simplex; last-resort orientation
    /// witness.
    interior: Vec<f64>,

    // Per-point assignment to one visible facet; sentinels below.
    point_facet: Vec<u32>,

    // Scratch.
    stamp: Vec<u32>,
    epoch: u32,
    det_scratch: Vec<f64>,
}

/// Point not yet assigned to a conflict facet.
const UNASSIGNED: u32 = u32::MAX - 1;
/// Point already part of the hull.
const DONE: u32 = u32::MAX;

impl<'a> HullBuilder<'a> {
    fn new(base: &'a Matrix) -> Self {
        let d = base.cols();
        let e = d + 1;
        let n = base.rows();
        let mut pts = Vec::with_capacity(n * e);
        for i in 0..n {
            let row = base.row(i);
            let mut h = 0.0;
            for &v in row {
                pts.push(v);
                h += v * v;
            }
            pts.push(h / d as f64);
        }
        HullBuilder {
            e,
            n,
            pts,
            base,
            verts: Vec::new(),
            neighbors: Vec::new(),
            planes: Vec::new(),
            flipped: Vec::new(),
            alive: Vec::new(),
            conflicts: Vec::new(),
            free: Vec::new(),
            interior: vec![0.0; e],
            point_facet: vec![UNASSIGNED; n],
            stamp: Vec::new(),
            epoch: 0,
            det_scratch: vec![0.0; (d + 2) * (d + 2)],
        }
    }

    #[inline]
    fn lifted(&self, p: u32) -> &[f64] {
        let e = self.e;
        &self.pts[p as usize * e..(p as usize + 1) * e]
    }

    #[inline]
    fn facet_verts(&self, f: u32) -> &[u32] {
        let e = self.e;
        &self.verts[f as usize * e..(f as usize + 1) * e]
    }

    #[inline]
    fn facet_neighbors(&self, f: u32) -> &[u32] {
        let e = self.e;
        &self.neighbors[f as usize * e..(f as usize + 1) * e]
    }

    #[inline]
    fn plane_eval(&self, f: u32, p: u32) -> f64 {
        let e = self.e;
        let pl = &self.planes[f as usize * (e + 1)..(f as usize + 1) * (e + 1)];
        let y = self.lifted(p);
        let mut s = -pl[e];
        for k in 0..e {
            s += pl[k] * y[k];
        }
        s
    }

    /// Sign of the homogeneous orientation determinant of the points listed
    /// in `ids` (rows in the given order), with symbolic height perturbation
    /// ordered by ascending point index breaking ties. Returns +1 or -1, or
    /// an error when the configuration is degenerate in the base
    /// coordinates at every perturbation order.
    fn sos_orient(&mut self, ids: &[u32]) -> Result<i8> {
        let e = self.e; // ids.len() == e + 1
        let k = e + 1;
        debug_assert_eq!(ids.len(), k);
        let d = e - 1;
        // Plain determinant of rows [x, h, 1].
        {
            let m = &mut self.det_scratch[..k * k];
            for (r, &id) in ids.iter().enumerate() {
                let y = &self.pts[id as usize * e..(id as usize + 1) * e];
                m[r * k..r * k + e].copy_from_slice(y);
                m[r * k + e] = 1.0;
            }
            let det = det_in_place(m, k);
            if det.abs() > TOL {
                return Ok(if det > 0.0 { 1 } else { -1 });
            }
        }
        // Tie: walk the perturbation terms in ascending point index. The
        // epsilon on point i contributes sign (-1)^(row + h_column) times the
        // minor with that row and the height column removed, i.e. the affine
        // orientation of the remaining points' base coordinates.
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&r| ids[r]);
        for r in order {
            let mm = k - 1; // == e
            {
                let m = &mut self.det_scratch[..mm * mm];
                let mut rr = 0;
                for (row, &id) in ids.iter().enumerate() {
                    if row == r {
                        continue;
                    }
                    let base = self.base.row(id as usize);
                    m[rr * mm..rr * mm + d].copy_from_slice(base);
                    m[rr * mm + d] = 1.0;
                    rr += 1;
                }
            }
            let minor = det_in_place(&mut self.det_scratch[..mm * mm], mm);
            if minor.abs() > TOL {
                let sign_pow = (r + d) % 2 == 0; // column of h is d
                let term = if sign_pow { minor } else { -minor };
                return Ok(if term > 0.0 { 1 } else { -1 });
            }
        }
        Err(Error::DegenerateInput(
            "points affinely degenerate in base coordinates".into(),
        ))
    }

    /// True when point `p` is on the outward side of facet `f`, resolving
    /// near-plane ties symbolically.
    fn visible(&mut self, f: u32, p: u32) -> Result<bool> {
        let s = self.plane_eval(f, p);
        if s > TOL {
            return Ok(true);
        }
        if s < -TOL {
            return Ok(false);
        }
        let e = self.e;
        let mut ids = Vec::with_capacity(e + 1);
        ids.extend_from_slice(self.facet_verts(f));
        ids.push(p);
        let dsign = self.sos_orient(&ids)?;
        // det_hom = (-1)^e * n_raw . (q - v0); outward flips it once more.
        let mut outside = if e % 2 == 0 { dsign > 0 } else { dsign < 0 };
        if self.flipped[f as usize] {
            outside = !outside;
        }
        Ok(outside)
    }

    fn alloc_facet(&mut self) -> u32 {
        let e = self.e;
        if let Some(f) = self.free.pop() {
            let fi = f as usize;
            self.alive[fi] = true;
            self.conflicts[fi].clear();
            return f;
        }
        let f = self.alive.len() as u32;
        self.verts.resize(self.verts.len() + e, 0);
        self.neighbors.resize(self.neighbors.len() + e, NO_NEIGHBOR);
        self.planes.resize(self.planes.len() + e + 1, 0.0);
        self.flipped.push(false);
        self.alive.push(true);
        self.conflicts.push(Vec::new());
        self.stamp.push(0);
        f
    }

    /// Creates a facet from `vs` (vertex order fixes the raw normal) with
    /// `witness` known to lie strictly inside the hull relative to it.
    fn make_facet(&mut self, vs: &[u32], witness: u32) -> Result<u32> {
        let e = self.e;
        let f = self.alloc_facet();
        let fi = f as usize;
        self.verts[fi * e..(fi + 1) * e].copy_from_slice(vs);
        for k in 0..e {
            self.neighbors[fi * e + k] = NO_NEIGHBOR;
        }

        // Generalized cross product of the e-1 edge vectors: component k is
        // (-1)^(e-1+k) times the minor with column k removed.
        let mut normal = vec![0.0; e];
        let mm = e - 1;
        let mut edges = vec![0.0; mm * e];
        {
            let v0 = self.lifted(vs[0]).to_vec();
            for i in 1..e {
                let vi = self.lifted(vs[i]);
                for c in 0..e {
                    edges[(i - 1) * e + c] = vi[c] - v0[c];
                }
            }
        }
        for k in 0..e {
            {
                let m = &mut self.det_scratch[..mm * mm];
                for i in 0..mm {
                    let mut cc = 0;
                    for c in 0..e {
                        if c == k {
                            continue;
                        }
                        m[i * mm + cc] = edges[i * e + c];
                        cc += 1;
                    }
                }
            }
            let minor = det_in_place(&mut self.det_scratch[..mm * mm], mm);
            normal[k] = if (mm + k) % 2 == 0 { minor } else { -minor };
        }
        let norm: f64 = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-30 {
            return Err(Error::DegenerateInput(
                "degenerate facet in lifted space".into(),
            ));
        }
        for v in &mut normal {
            *v /= norm;
        }
        let v0 = self.lifted(vs[0]);
        let offset: f64 = normal.iter().zip(v0).map(|(a, b)| a * b).sum();

        // Orient outward: the witness must land on the negative side.
        let wy = self.lifted(witness);
        let sw: f64 = normal.iter().zip(wy).map(|(a, b)| a * b).sum::<f64>() - offset;
        let flip = if sw > TOL {
            true
        } else if sw < -TOL {
            false
        } else {
            let mut ids = Vec::with_capacity(e + 1);
            ids.extend_from_slice(vs);
            ids.push(witness);
            match self.sos_orient(&ids) {
                Ok(dsign) => {
                    let raw_positive = if e % 2 == 0 { dsign > 0 } else { dsign < 0 };
                    raw_positive
                }
                Err(_) => {
                    let si: f64 = normal
                        .iter()
                        .zip(&self.interior)
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
                        - offset;
                    if si.abs() <= 1e-13 {
                        return Err(Error::DegenerateInput(
                            "cannot orient facet: witness and interior point both on its plane"
                                .into(),
                        ));
                    }
                    si > 0.0
                }
            }
        };
        let sgn = if flip { -1.0 } else { 1.0 };
        for (k, v) in normal.iter().enumerate() {
            self.planes[fi * (e + 1) + k] = sgn * v;
        }
        self.planes[fi * (e + 1) + e] = sgn * offset;
        self.flipped[fi] = flip;
        Ok(f)
    }

    /// Picks the initial full-dimensional simplex: e points affinely
    /// independent in the base space (greedy Gram-Schmidt in index order)
    /// plus the point maximizing the lifted volume with them.
    fn initial_simplex(&mut self) -> Result<Vec<u32>> {
        let d = self.e - 1;
        let mut chosen: Vec<u32> = vec![0];
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let x0 = self.base.row(0).to_vec();
        for p in 1..self.n as u32 {
            if basis.len() == d {
                break;
            }
            let mut r: Vec<f64> = self
                .base
                .row(p as usize)
                .iter()
                .zip(&x0)
                .map(|(a, b)| a - b)
                .collect();
            for b in &basis {
                let proj: f64 = r.iter().zip(b).map(|(a, c)| a * c).sum();
                for (ri, bi) in r.iter_mut().zip(b) {
                    *ri -= proj * bi;
                }
            }
            let norm: f64 = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-9 {
                for v in &mut r {
                    *v /= norm;
                }
                basis.push(r);
                chosen.push(p);
            }
        }
        if basis.len() < d {
            return Err(Error::DegenerateInput(
                "all points lie on a common hyperplane".into(),
            ));
        }
        // The apex: the remaining point with the largest plain lifted
        // orientation determinant; ties below tolerance are fine because the
        // symbolic perturbation still separates them.
        let mut best: Option<(f64, u32)> = None;
        let k = self.e + 1;
        for p in 0..self.n as u32 {
            if chosen.contains(&p) {
                continue;
            }
            let m = &mut self.det_scratch[..k * k];
            for (r, &id) in chosen.iter().chain([&p]).enumerate() {
                let y = &self.pts[id as usize * self.e..(id as usize + 1) * self.e];
                m[r * k..r * k + self.e].copy_from_slice(y);
                m[r * k + self.e] = 1.0;
            }
            let det = det_in_place(m, k).abs();
            if best.map_or(true, |(b, _)| det > b) {
                best = Some((det, p));
            }
        }
        let (_, apex) =
            best.ok_or_else(|| Error::TooFewPoints { got: self.n, need: self.e + 1 })?;
        chosen.push(apex);
        Ok(chosen)
    }

    fn build(&mut self) -> Result<()> {
        let e = self.e;
        let simplex = self.initial_simplex()?;

        // Interior reference: centroid of the initial simplex.
        for k in 0..e {
            self.interior[k] = simplex
                .iter()
                .map(|&p| self.lifted(p)[k])
                .sum::<f64>()
                / simplex.len() as f64;
        }

        // One facet per omitted vertex, witness = the omitted vertex.
        let mut initial_facets = Vec::with_capacity(e + 1);
        for k in 0..=e {
            let vs: Vec<u32> = simplex
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &p)| p)
                .collect();
            let f = self.make_facet(&vs, simplex[k])?;
            initial_facets.push(f);
        }
        // Wire neighbors: in facet_k, the ridge opposite vertex v is shared
        // with the facet that omits v.
        for (k, &fk) in initial_facets.iter().enumerate() {
            let vs: Vec<u32> = self.facet_verts(fk).to_vec();
            for (slot, &v) in vs.iter().enumerate() {
                let j = simplex.iter().position(|&s| s == v).unwrap();
                self.neighbors[fk as usize * e + slot] = initial_facets[j];
                debug_assert_ne!(j, k);
            }
        }
        for &p in &simplex {
            self.point_facet[p as usize] = DONE;
        }

        // Distribute the remaining points.
        for p in 0..self.n as u32 {
            if self.point_facet[p as usize] != UNASSIGNED {
                continue;
            }
            let mut assigned = false;
            for &f in &initial_facets {
                if self.visible(f, p)? {
                    self.point_facet[p as usize] = f;
                    self.conflicts[f as usize].push(p);
                    assigned = true;
                    break;
                }
            }
            if !assigned {
                return Err(Error::DegenerateInput(format!(
                    "point {p} is interior to the lifted hull (duplicate coordinates?)"
                )));
            }
        }

        // Insert points in index order.
        let mut dead_points: Vec<u32> = Vec::new();
        let mut horizon: Vec<(u32, usize)> = Vec::new();
        let mut visible_stack: Vec<u32> = Vec::new();
        let mut visible_list: Vec<u32> = Vec::new();
        let mut ridge_map: std::collections::HashMap<Vec<u32>, (u32, usize)> =
            std::collections::HashMap::new();

        for p in 0..self.n as u32 {
            let f0 = self.point_facet[p as usize];
            if f0 == DONE {
                continue;
            }
            debug_assert!(self.alive[f0 as usize]);

            // Flood fill the visible region.
            self.epoch += 1;
            let epoch = self.epoch;
            visible_stack.clear();
            visible_list.clear();
            horizon.clear();
            visible_stack.push(f0);
            self.stamp[f0 as usize] = epoch;
            while let Some(f) = visible_stack.pop() {
                visible_list.push(f);
                for slot in 0..e {
                    let g = self.neighbors[f as usize * e + slot];
                    debug_assert_ne!(g, NO_NEIGHBOR, "hull facets always have neighbors");
                    if self.stamp[g as usize] == epoch {
                        continue;
                    }
                    if self.visible(g, p)? {
                        self.stamp[g as usize] = epoch;
                        visible_stack.push(g);
                    } else {
                        horizon.push((f, slot));
                    }
                }
            }

            // Collect orphaned conflict points, kill the visible facets.
            dead_points.clear();
            for &f in &visible_list {
                let mut pts = std::mem::take(&mut self.conflicts[f as usize]);
                dead_points.append(&mut pts);
                self.alive[f as usize] = false;
            }

            // Build the replacement cone: ridge + p per horizon entry.
            ridge_map.clear();
            let mut new_facets: Vec<u32> = Vec::with_capacity(horizon.len());
            for &(dead, slot) in &horizon {
                let outside = self.facet_neighbors(dead)[slot];
                let witness = self.facet_verts(dead)[slot];
                let mut vs: Vec<u32> = Vec::with_capacity(e);
                for (j, &v) in self.facet_verts(dead).to_vec().iter().enumerate() {
                    if j != slot {
                        vs.push(v);
                    }
                }
                vs.push(p);
                let nf = self.make_facet(&vs, witness)?;
                new_facets.push(nf);

                // Across the ridge opposite p sits the surviving facet.
                self.neighbors[nf as usize * e + (e - 1)] = outside;
                let oi = outside as usize;
                let mut fixed = false;
                for s in 0..e {
                    if self.neighbors[oi * e + s] == dead {
                        self.neighbors[oi * e + s] = nf;
                        fixed = true;
                        break;
                    }
                }
                debug_assert!(fixed, "outside facet must have pointed at the dead one");

                // Siblings share ridges that drop one ridge vertex and keep p.
                let nf_verts = self.facet_verts(nf).to_vec();
                for s in 0..e - 1 {
                    let mut key: Vec<u32> = nf_verts
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != s)
                        .map(|(_, &v)| v)
                        .collect();
                    key.sort_unstable();
                    if let Some((other, oslot)) = ridge_map.remove(&key) {
                        self.neighbors[nf as usize * e + s] = other;
                        self.neighbors[other as usize * e + oslot] = nf;
                    } else {
                        ridge_map.insert(key, (nf, s));
                    }
                }
            }
            debug_assert!(ridge_map.is_empty(), "unmatched new-facet ridges");

            self.point_facet[p as usize] = DONE;

            // Reassign orphans among the new facets; rare geometric corner
            // cases fall back to a scan over all live facets.
            for &q in &dead_points {
                if q == p {
                    continue;
                }
                let mut assigned = false;
                for &nf in &new_facets {
                    if self.visible(nf, q)? {
                        self.point_facet[q as usize] = nf;
                        self.conflicts[nf as usize].push(q);
                        assigned = true;
                        break;
                    }
                }
                if !assigned {
                    for f in 0..self.alive.len() as u32 {
                        if self.alive[f as usize] && self.visible(f, q)? {
                            self.point_facet[q as usize] = f;
                            self.conflicts[f as usize].push(q);
                            assigned = true;
                            break;
                        }
                    }
                }
                if !assigned {
                    return Err(Error::DegenerateInput(format!(
                        "point {q} fell inside the lifted hull during construction"
                    )));
                }
            }

            for &f in &visible_list {
                self.free.push(f);
            }
        }
        Ok(())
    }

    /// Extracts the downward-facing facets as Delaunay simplices with a
    /// consistent neighbor table (slot k is across the ridge opposite
    /// vertex k; `NO_NEIGHBOR` marks the hull boundary).
    fn lower_hull(&self) -> (Vec<u32>, Vec<u32>) {
        let e = self.e;
        let h = e - 1; // height coordinate index
        let mut remap = vec![NO_NEIGHBOR; self.alive.len()];
        let mut count = 0u32;
        for f in 0..self.alive.len() {
            if self.alive[f] && self.planes[f * (e + 1) + h] < -1e-12 {
                remap[f] = count;
                count += 1;
            }
        }
        let mut simplices = Vec::with_capacity(count as usize * e);
        let mut neighbors = Vec::with_capacity(count as usize * e);
        for f in 0..self.alive.len() {
            if remap[f] == NO_NEIGHBOR {
                continue;
            }
            simplices.extend_from_slice(self.facet_verts(f as u32));
            for &g in self.facet_neighbors(f as u32) {
                neighbors.push(if g == NO_NEIGHBOR {
                    NO_NEIGHBOR
                } else {
                    remap[g as usize]
                });
            }
        }
        (simplices, neighbors)
    }
}

/// Builds the Delaunay triangulation of normalized points (each coordinate
/// in [0,1]). Returns flattened simplices and the neighbor table, both
/// (D+1) entries per simplex.
pub fn delaunay(points_norm: &Matrix) -> Result<(Vec<u32>, Vec<u32>)> {
    let mut b = HullBuilder::new(points_norm);
    b.build()?;
    Ok(b.lower_hull())
}

//! Piecewise-linear interpolation of scattered D-dimensional nodes.
//!
//! The nodes are triangulated once (Delaunay, via the lifted convex hull in
//! [`hull`]); a query is then located in its containing simplex and the value
//! is the barycentric combination of the simplex's vertex values, the same
//! weights reused across all spectral bands.
//!
//! Point location is a warm-started walk: starting from the previously hit
//! simplex, repeatedly step through the facet with the most negative
//! barycentric coordinate. On a Delaunay triangulation this terminates; if
//! floating point produces a cycle anyway, an exhaustive scan takes over.
//! Crossing a hull-boundary facet proves the query lies outside the convex
//! hull (boundary facets are supporting hyperplanes), which is reported as
//! [`Error::OutsideHull`].

mod hull;

use std::time::Instant;

use crate::error::{Error, Result};
use crate::numerics::{solve_linear_in_place, Matrix};
use crate::rtm::Spectrum;

pub use hull::NO_NEIGHBOR;

/// Barycentric weights may be this far below zero and still count as inside;
/// matches the predicate tolerance of the triangulation.
pub const WEIGHT_TOL: f64 = 1e-10;

/// Pivot threshold for the barycentric solve. The system matrix holds
/// normalized coordinates plus a row of ones, so its max-abs entry is
/// exactly 1 and the relative threshold of the linear solver is absolute
/// here.
const BARY_PIVOT_TOL: f64 = 1e-13;

/// A simplex index plus the barycentric coordinates of the query within it.
#[derive(Debug, Clone)]
pub struct BarycentricResult {
    pub simplex: usize,
    pub weights: Vec<f64>,
}

/// Delaunay triangulation of a node set, with per-dimension normalization
/// and a neighbor table for walking. Immutable after construction; concurrent
/// queries are safe as long as each thread owns its [`Walker`].
#[derive(Debug, Clone)]
pub struct SimplicialComplex {
    dim: usize,
    /// Normalized node coordinates, n x D in [0,1].
    points: Matrix,
    offsets: Vec<f64>,
    scales: Vec<f64>,
    /// Flattened vertex ids, D+1 per simplex.
    simplices: Vec<u32>,
    /// Flattened neighbor ids, D+1 per simplex; entry k is across the facet
    /// opposite vertex k, `NO_NEIGHBOR` on the hull boundary.
    neighbors: Vec<u32>,
    n_simplices: usize,
}

/// Mutable walk state: warm-start cursor, visited stamps, and solver
/// scratch. One per thread.
#[derive(Debug, Clone)]
pub struct Walker {
    last: usize,
    stamps: Vec<u32>,
    epoch: u32,
    mat: Vec<f64>,
    rhs: Vec<f64>,
    q_norm: Vec<f64>,
}

impl Walker {
    pub fn new(complex: &SimplicialComplex) -> Self {
        Walker {
            last: 0,
            stamps: vec![0; complex.n_simplices],
            epoch: 0,
            mat: vec![0.0; (complex.dim + 1) * (complex.dim + 1)],
            rhs: vec![0.0; complex.dim + 1],
            q_norm: vec![0.0; complex.dim],
        }
    }
}

impl SimplicialComplex {
    /// Triangulates the given nodes (rows of `points`, physical units).
    ///
    /// Needs at least D+1 affinely independent points and no exact duplicate
    /// rows. Coordinates are normalized per dimension to [0,1] before any
    /// geometry runs.
    pub fn build(points: &Matrix) -> Result<Self> {
        let n = points.rows();
        let dim = points.cols();
        if dim == 0 {
            return Err(Error::DegenerateInput("points have no coordinates".into()));
        }
        if n < dim + 1 {
            return Err(Error::TooFewPoints { got: n, need: dim + 1 });
        }
        // Exact duplicates can never become hull vertices and would vanish
        // from the triangulation; reject them up front.
        {
            let mut seen = std::collections::HashSet::with_capacity(n);
            for i in 0..n {
                let key: Vec<u64> = points.row(i).iter().map(|v| v.to_bits()).collect();
                if !seen.insert(key) {
                    return Err(Error::DegenerateInput(format!(
                        "duplicate node at row {i}"
                    )));
                }
            }
        }

        let mut offsets = vec![0.0; dim];
        let mut scales = vec![0.0; dim];
        for d in 0..dim {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for i in 0..n {
                let v = points[(i, d)];
                if !v.is_finite() {
                    return Err(Error::NonFiniteInput(format!("node {i} coordinate {d}")));
                }
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi <= lo {
                return Err(Error::DegenerateInput(format!(
                    "dimension {d} has zero extent"
                )));
            }
            offsets[d] = lo;
            scales[d] = hi - lo;
        }
        let normalized = Matrix::from_fn(n, dim, |i, d| (points[(i, d)] - offsets[d]) / scales[d]);

        let (simplices, neighbors) = if n == dim + 1 {
            // A single simplex; just check it is not flat.
            let k = dim + 1;
            let mut m = vec![0.0; k * k];
            for i in 0..k {
                m[i * k..i * k + dim].copy_from_slice(normalized.row(i));
                m[i * k + dim] = 1.0;
            }
            let mut rhs = vec![0.0; k];
            rhs[dim] = 1.0;
            if solve_linear_in_place(&mut m, &mut rhs, k, BARY_PIVOT_TOL).is_err() {
                return Err(Error::DegenerateInput(
                    "the only candidate simplex is flat".into(),
                ));
            }
            ((0..k as u32).collect(), vec![NO_NEIGHBOR; k])
        } else {
            hull::delaunay(&normalized)?
        };

        let n_simplices = simplices.len() / (dim + 1);
        if n_simplices == 0 {
            return Err(Error::DegenerateInput(
                "triangulation produced no simplices".into(),
            ));
        }
        Ok(SimplicialComplex {
            dim,
            points: normalized,
            offsets,
            scales,
            simplices,
            neighbors,
            n_simplices,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_points(&self) -> usize {
        self.points.rows()
    }

    pub fn num_simplices(&self) -> usize {
        self.n_simplices
    }

    /// Vertex ids of simplex `s`.
    pub fn simplex_vertices(&self, s: usize) -> &[u32] {
        &self.simplices[s * (self.dim + 1)..(s + 1) * (self.dim + 1)]
    }

    /// Neighbor ids of simplex `s` (entry k across the facet opposite
    /// vertex k).
    pub fn simplex_neighbors(&self, s: usize) -> &[u32] {
        &self.neighbors[s * (self.dim + 1)..(s + 1) * (self.dim + 1)]
    }

    /// Node coordinates in normalized [0,1] space.
    pub fn normalized_points(&self) -> &Matrix {
        &self.points
    }

    fn normalize_into(&self, q: &[f64], out: &mut [f64]) -> Result<()> {
        if q.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "query has {} coordinates, complex is {}-dimensional",
                q.len(),
                self.dim
            )));
        }
        for d in 0..self.dim {
            if !q[d].is_finite() {
                return Err(Error::NonFiniteInput(format!("query coordinate {d}")));
            }
            out[d] = (q[d] - self.offsets[d]) / self.scales[d];
        }
        Ok(())
    }

    /// Barycentric weights of normalized query `qn` in simplex `s`, via the
    /// (D+1)x(D+1) linear system (vertex coordinates over a row of ones).
    fn weights_in(&self, s: usize, qn: &[f64], mat: &mut [f64], rhs: &mut [f64]) -> Result<()> {
        let k = self.dim + 1;
        let verts = self.simplex_vertices(s);
        for (j, &v) in verts.iter().enumerate() {
            let row = self.points.row(v as usize);
            for d in 0..self.dim {
                mat[d * k + j] = row[d];
            }
            mat[self.dim * k + j] = 1.0;
        }
        rhs[..self.dim].copy_from_slice(qn);
        rhs[self.dim] = 1.0;
        solve_linear_in_place(mat, rhs, k, BARY_PIVOT_TOL)
    }

    /// Locates `q` with a caller-owned walk state (warm start, scratch
    /// reuse). This is the batch work-horse.
    pub fn locate_with(&self, w: &mut Walker, q: &[f64]) -> Result<BarycentricResult> {
        let dim = self.dim;
        let k = dim + 1;
        let mut qn = std::mem::take(&mut w.q_norm);
        let res = (|| {
            self.normalize_into(q, &mut qn)?;
            // The hull is inside the normalized bounds box, so a query
            // outside the box is outside the hull.
            for &v in qn.iter() {
                if !(-WEIGHT_TOL..=1.0 + WEIGHT_TOL).contains(&v) {
                    return Err(Error::OutsideHull);
                }
            }
            if w.epoch == u32::MAX {
                w.stamps.fill(0);
                w.epoch = 0;
            }
            w.epoch += 1;
            let epoch = w.epoch;
            let mut cur = if w.last < self.n_simplices { w.last } else { 0 };
            loop {
                w.stamps[cur] = epoch;
                if self.weights_in(cur, &qn, &mut w.mat, &mut w.rhs).is_err() {
                    // Degenerate sliver on the path; give up on walking.
                    break;
                }
                let mut min_idx = 0;
                let mut min_w = w.rhs[0];
                for j in 1..k {
                    if w.rhs[j] < min_w {
                        min_w = w.rhs[j];
                        min_idx = j;
                    }
                }
                if min_w >= -WEIGHT_TOL {
                    w.last = cur;
                    return Ok(BarycentricResult {
                        simplex: cur,
                        weights: w.rhs[..k].to_vec(),
                    });
                }
                let next = self.simplex_neighbors(cur)[min_idx];
                if next == NO_NEIGHBOR {
                    // The facet lies on the hull boundary; its hyperplane
                    // supports the hull, and the query is beyond it.
                    return Err(Error::OutsideHull);
                }
                let next = next as usize;
                if w.stamps[next] == epoch {
                    break;
                }
                cur = next;
            }
            // Exhaustive fallback.
            for s in 0..self.n_simplices {
                if self.weights_in(s, &qn, &mut w.mat, &mut w.rhs).is_err() {
                    continue;
                }
                if w.rhs[..k].iter().all(|&wt| wt >= -WEIGHT_TOL) {
                    w.last = s;
                    return Ok(BarycentricResult {
                        simplex: s,
                        weights: w.rhs[..k].to_vec(),
                    });
                }
            }
            Err(Error::OutsideHull)
        })();
        w.q_norm = qn;
        res
    }

    /// One-shot location of a single query point.
    pub fn locate(&self, q: &[f64]) -> Result<BarycentricResult> {
        let mut w = Walker::new(self);
        self.locate_with(&mut w, q)
    }

    /// Interpolates the per-node `values` (one row per node, K columns) at
    /// `q`: the barycentric weights of the containing simplex applied to its
    /// vertices' rows.
    pub fn interpolate(&self, values: &Matrix, q: &[f64]) -> Result<Spectrum> {
        let mut w = Walker::new(self);
        self.interpolate_with(&mut w, values, q)
    }

    fn check_values(&self, values: &Matrix) -> Result<()> {
        if values.rows() != self.num_points() {
            return Err(Error::ShapeMismatch(format!(
                "{} value rows for {} nodes",
                values.rows(),
                self.num_points()
            )));
        }
        Ok(())
    }

    pub fn interpolate_with(
        &self,
        w: &mut Walker,
        values: &Matrix,
        q: &[f64],
    ) -> Result<Spectrum> {
        self.check_values(values)?;
        let hit = self.locate_with(w, q)?;
        let mut out = vec![0.0; values.cols()];
        self.accumulate(&hit, values, &mut out);
        Ok(Spectrum { values: out })
    }

    fn accumulate(&self, hit: &BarycentricResult, values: &Matrix, out: &mut [f64]) {
        let verts = self.simplex_vertices(hit.simplex);
        for (&v, &wt) in verts.iter().zip(&hit.weights) {
            let row = values.row(v as usize);
            for (o, &val) in out.iter_mut().zip(row) {
                *o += wt * val;
            }
        }
    }

    /// Interpolates a whole query batch with a warm-started walk across
    /// consecutive queries. Per-query hull misses are collected, not fatal;
    /// the corresponding output rows are NaN. The reported time covers the
    /// query loop only (triangulation build is paid once, elsewhere).
    pub fn interpolate_batch(&self, values: &Matrix, queries: &Matrix) -> Result<InterpolationBatch> {
        self.check_values(values)?;
        if queries.cols() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "queries have {} coordinates, complex is {}-dimensional",
                queries.cols(),
                self.dim
            )));
        }
        let m = queries.rows();
        let k = values.cols();
        let mut spectra = Matrix::zeros(m, k);
        let mut failures = Vec::new();
        if m == 0 {
            return Ok(InterpolationBatch {
                spectra,
                failures,
                elapsed_seconds: 0.0,
            });
        }
        let mut walker = Walker::new(self);
        let start = Instant::now();
        for i in 0..m {
            match self.locate_with(&mut walker, queries.row(i)) {
                Ok(hit) => self.accumulate(&hit, values, spectra.row_mut(i)),
                Err(Error::OutsideHull) => {
                    failures.push(i);
                    spectra.row_mut(i).fill(f64::NAN);
                }
                Err(e) => return Err(e),
            }
        }
        let elapsed_seconds = start.elapsed().as_secs_f64();
        Ok(InterpolationBatch {
            spectra,
            failures,
            elapsed_seconds,
        })
    }
}

/// Result of a batch interpolation pass.
#[derive(Debug, Clone)]
pub struct InterpolationBatch {
    /// m x K interpolated values; rows listed in `failures` are NaN.
    pub spectra: Matrix,
    /// Indices of queries outside the hull.
    pub failures: Vec<usize>,
    /// Wall-clock seconds of the query loop.
    pub elapsed_seconds: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::sampling::{latin_hypercube, merge, vertices, VariableSpec};

    fn unit_specs(d: usize) -> Vec<VariableSpec> {
        (0..d)
            .map(|i| VariableSpec::new(&format!("x{i}"), "", 0.0, 1.0))
            .collect()
    }

    /// LHS plus box corners, so the hull is the full box.
    fn boxed_points(d: usize, n_lhs: usize, seed: u64) -> Matrix {
        let specs = unit_specs(d);
        let a = latin_hypercube(n_lhs, &specs, seed).unwrap();
        let b = vertices(&specs).unwrap();
        merge(&a, &b).unwrap().points
    }

    /// Brute-force empty-circumsphere check in normalized coordinates.
    fn circumsphere_ok(c: &SimplicialComplex, margin: f64) -> bool {
        let d = c.dim();
        let pts = c.normalized_points();
        for s in 0..c.num_simplices() {
            let verts = c.simplex_vertices(s);
            let x0 = pts.row(verts[0] as usize);
            let mut mat = Matrix::zeros(d, d);
            let mut rhs = vec![0.0; d];
            for j in 1..=d {
                let xj = pts.row(verts[j] as usize);
                let mut n0 = 0.0;
                let mut nj = 0.0;
                for t in 0..d {
                    mat[(j - 1, t)] = 2.0 * (xj[t] - x0[t]);
                    n0 += x0[t] * x0[t];
                    nj += xj[t] * xj[t];
                }
                rhs[j - 1] = nj - n0;
            }
            let centre = crate::numerics::solve_linear(&mat, &rhs).unwrap();
            let r2: f64 = centre
                .iter()
                .zip(x0)
                .map(|(c, x)| (c - x) * (c - x))
                .sum();
            let r = r2.sqrt();
            for p in 0..pts.rows() {
                if verts.contains(&(p as u32)) {
                    continue;
                }
                let dist: f64 = centre
                    .iter()
                    .zip(pts.row(p))
                    .map(|(c, x)| (c - x) * (c - x))
                    .sum::<f64>()
                    .sqrt();
                if dist < r - margin {
                    eprintln!("simplex {s}: point {p} inside circumsphere ({dist} < {r})");
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn three_points_one_triangle() {
        let pts = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.2, 1.0]]).unwrap();
        let c = SimplicialComplex::build(&pts).unwrap();
        assert_eq!(c.num_simplices(), 1);
        assert_eq!(c.simplex_neighbors(0), &[NO_NEIGHBOR; 3]);
    }

    #[test]
    fn unit_square_two_triangles_sharing_diagonal() {
        let pts = Matrix::from_rows(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
        ])
        .unwrap();
        let c = SimplicialComplex::build(&pts).unwrap();
        assert_eq!(c.num_simplices(), 2, "a cocircular square splits into two");
        let a: std::collections::HashSet<u32> =
            c.simplex_vertices(0).iter().copied().collect();
        let b: std::collections::HashSet<u32> =
            c.simplex_vertices(1).iter().copied().collect();
        assert_eq!(a.intersection(&b).count(), 2, "triangles share a diagonal");
        assert_eq!(a.union(&b).count(), 4);
        assert!(circumsphere_ok(&c, 1e-9));
    }

    #[test]
    fn five_random_points_3d_empty_circumsphere() {
        let mut rng = SplitMix64::new(31);
        let pts = Matrix::from_fn(5, 3, |_, _| rng.next_f64());
        let c = SimplicialComplex::build(&pts).unwrap();
        assert!(circumsphere_ok(&c, 1e-9));
    }

    #[test]
    fn delaunay_oracle_2d_and_3d_seeded_sets() {
        for d in [2usize, 3] {
            for set in 0..5u64 {
                let mut rng = SplitMix64::derived(40 + set, &[d as u64]);
                let n = 10 + (rng.next_below(41)) as usize; // 10..=50
                let pts = Matrix::from_fn(n, d, |_, _| rng.next_f64());
                let c = SimplicialComplex::build(&pts).unwrap();
                assert!(
                    circumsphere_ok(&c, 1e-9),
                    "oracle failed for d={d} set={set} n={n}"
                );
            }
        }
    }

    #[test]
    fn node_query_returns_unit_weight() {
        let pts = boxed_points(3, 20, 3);
        let c = SimplicialComplex::build(&pts).unwrap();
        for i in [0usize, 5, 11] {
            let hit = c.locate(pts.row(i)).unwrap();
            let verts = c.simplex_vertices(hit.simplex);
            let local = verts.iter().position(|&v| v == i as u32).expect("node in simplex");
            for (j, &wt) in hit.weights.iter().enumerate() {
                if j == local {
                    assert!((wt - 1.0).abs() < 1e-9, "weight on the node itself");
                } else {
                    assert!(wt.abs() < 1e-9, "other weights vanish, got {wt}");
                }
            }
        }
    }

    #[test]
    fn centroid_query_gives_uniform_weights() {
        let d = 3;
        let pts = boxed_points(d, 15, 7);
        let c = SimplicialComplex::build(&pts).unwrap();
        let s = c.num_simplices() / 2;
        let verts = c.simplex_vertices(s).to_vec();
        // Centroid in physical coordinates (here equal to normalized).
        let centroid: Vec<f64> = (0..d)
            .map(|t| {
                verts
                    .iter()
                    .map(|&v| pts[(v as usize, t)])
                    .sum::<f64>()
                    / (d + 1) as f64
            })
            .collect();
        let hit = c.locate(&centroid).unwrap();
        // Any containing simplex is acceptable; for the centroid of a
        // non-degenerate simplex it is that simplex, with uniform weights.
        assert_eq!(hit.simplex, s);
        for &wt in &hit.weights {
            assert!((wt - 1.0 / (d + 1) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn outside_box_is_outside_hull() {
        let pts = boxed_points(2, 10, 1);
        let c = SimplicialComplex::build(&pts).unwrap();
        assert!(matches!(
            c.locate(&[1.5, 0.5]),
            Err(Error::OutsideHull)
        ));
        assert!(matches!(
            c.locate(&[0.5, -0.1]),
            Err(Error::OutsideHull)
        ));
    }

    #[test]
    fn linear_fields_reproduce_exactly() {
        // Barycentric interpolation has linear precision: affine functions
        // are reproduced everywhere in the hull.
        for d in 2..=6usize {
            let mut rng = SplitMix64::derived(55, &[d as u64]);
            let pts = boxed_points(d, 12 + 4 * d, 100 + d as u64);
            let c = SimplicialComplex::build(&pts).unwrap();
            let k = 3;
            let coef: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..=d).map(|_| rng.next_f64() * 4.0 - 2.0).collect())
                .collect();
            let field = |x: &[f64], j: usize| -> f64 {
                coef[j][d] + x.iter().zip(&coef[j][..d]).map(|(a, b)| a * b).sum::<f64>()
            };
            let values = Matrix::from_fn(pts.rows(), k, |i, j| field(pts.row(i), j));
            for _ in 0..50 {
                let q: Vec<f64> = (0..d).map(|_| rng.next_f64()).collect();
                let got = c.interpolate(&values, &q).unwrap();
                for j in 0..k {
                    let want = field(&q, j);
                    let scale = want.abs().max(1.0);
                    assert!(
                        ((got.values[j] - want) / scale).abs() < 1e-8,
                        "d={d}: affine field not reproduced: {} vs {want}",
                        got.values[j]
                    );
                }
            }
        }
    }

    #[test]
    fn one_dimensional_edge_midpoint() {
        let pts = Matrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let c = SimplicialComplex::build(&pts).unwrap();
        let values = Matrix::from_rows(&[vec![0.0], vec![10.0]]).unwrap();
        let got = c.interpolate(&values, &[0.5]).unwrap();
        assert!((got.values[0] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn batch_on_nodes_is_exact_and_empty_batch_is_instant() {
        let pts = boxed_points(3, 25, 9);
        let c = SimplicialComplex::build(&pts).unwrap();
        let mut rng = SplitMix64::new(2);
        let values = Matrix::from_fn(pts.rows(), 4, |_, _| rng.next_f64());
        let batch = c.interpolate_batch(&values, &pts).unwrap();
        assert!(batch.failures.is_empty());
        for i in 0..pts.rows() {
            for j in 0..4 {
                assert!(
                    (batch.spectra[(i, j)] - values[(i, j)]).abs() < 1e-9,
                    "node {i} band {j}"
                );
            }
        }
        let empty = Matrix::zeros(0, 3);
        let b = c.interpolate_batch(&values, &empty).unwrap();
        assert_eq!(b.spectra.rows(), 0);
        assert_eq!(b.elapsed_seconds, 0.0);
    }

    #[test]
    fn batch_collects_outside_failures() {
        let pts = boxed_points(2, 8, 4);
        let c = SimplicialComplex::build(&pts).unwrap();
        let values = Matrix::from_fn(pts.rows(), 2, |i, j| (i + j) as f64);
        let queries =
            Matrix::from_rows(&[vec![0.5, 0.5], vec![2.0, 0.5], vec![0.25, 0.75]]).unwrap();
        let batch = c.interpolate_batch(&values, &queries).unwrap();
        assert_eq!(batch.failures, vec![1]);
        assert!(batch.spectra[(1, 0)].is_nan());
        assert!(batch.spectra[(0, 0)].is_finite());
    }

    #[test]
    fn partition_of_unity_on_random_queries() {
        let d = 4;
        let pts = boxed_points(d, 40, 6);
        let c = SimplicialComplex::build(&pts).unwrap();
        let mut rng = SplitMix64::new(61);
        let mut w = Walker::new(&c);
        for _ in 0..2000 {
            let q: Vec<f64> = (0..d).map(|_| rng.next_f64()).collect();
            let hit = c.locate_with(&mut w, &q).expect("in-bounds query");
            let sum: f64 = hit.weights.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12, "weights sum to {sum}");
            for &wt in &hit.weights {
                assert!(wt >= -WEIGHT_TOL);
            }
        }
    }

    #[test]
    fn walk_and_scan_agree_on_containment() {
        let d = 3;
        let pts = boxed_points(d, 30, 12);
        let c = SimplicialComplex::build(&pts).unwrap();
        let mut rng = SplitMix64::new(77);
        let mut w = Walker::new(&c);
        let k = d + 1;
        for _ in 0..200 {
            let q: Vec<f64> = (0..d).map(|_| rng.next_f64()).collect();
            let hit = c.locate_with(&mut w, &q).unwrap();
            // Independent scan: find some simplex containing q and verify
            // the walk's simplex also contains it (boundary ties may return
            // different simplices, containment is the contract).
            let mut scan_walker = Walker::new(&c);
            let mut found = None;
            for s in 0..c.num_simplices() {
                scan_walker.q_norm = q
                    .iter()
                    .enumerate()
                    .map(|(t, &v)| (v - c.offsets[t]) / c.scales[t])
                    .collect();
                let qn = scan_walker.q_norm.clone();
                if c
                    .weights_in(s, &qn, &mut scan_walker.mat, &mut scan_walker.rhs)
                    .is_ok()
                    && scan_walker.rhs[..k].iter().all(|&x| x >= -WEIGHT_TOL)
                {
                    found = Some(s);
                    break;
                }
            }
            let scan_hit = found.expect("scan finds a containing simplex");
            // Verify the walk simplex contains q.
            let mut wk = Walker::new(&c);
            let qn: Vec<f64> = q
                .iter()
                .enumerate()
                .map(|(t, &v)| (v - c.offsets[t]) / c.scales[t])
                .collect();
            c.weights_in(hit.simplex, &qn, &mut wk.mat, &mut wk.rhs)
                .unwrap();
            assert!(wk.rhs[..k].iter().all(|&x| x >= -WEIGHT_TOL));
            let _ = scan_hit;
        }
    }

    #[test]
    fn degenerate_inputs_rejected() {
        // Too few points.
        let pts = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(
            SimplicialComplex::build(&pts),
            Err(Error::TooFewPoints { .. })
        ));
        // Exact duplicate.
        let pts = Matrix::from_rows(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
        ])
        .unwrap();
        assert!(matches!(
            SimplicialComplex::build(&pts),
            Err(Error::DegenerateInput(_))
        ));
        // All collinear.
        let pts = Matrix::from_rows(&[
            vec![0.0, 0.0],
            vec![0.25, 0.25],
            vec![0.5, 0.5],
            vec![1.0, 1.0],
        ])
        .unwrap();
        assert!(matches!(
            SimplicialComplex::build(&pts),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn neighbor_table_is_mutual() {
        let pts = boxed_points(3, 20, 21);
        let c = SimplicialComplex::build(&pts).unwrap();
        for s in 0..c.num_simplices() {
            for &g in c.simplex_neighbors(s) {
                if g == NO_NEIGHBOR {
                    continue;
                }
                assert!(
                    c.simplex_neighbors(g as usize).contains(&(s as u32)),
                    "neighbor table must be mutual"
                );
            }
        }
    }
}

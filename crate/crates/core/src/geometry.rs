//! Bounded domains represented as masks on uniform grids, plus the
//! geometric quantities the experiments consume: inradius, distance to the
//! boundary, exterior density ratios, and cap measures.
//!
//! Membership follows the cell-center rule: a cell is interior iff its
//! center satisfies the analytic predicate. All measures are
//! `(cell count) * h^d`, matching the operator quadrature.

use crate::error::{Error, Result};
use crate::exec;
use crate::grid::{dist, norm, sub, Grid, Point};
use base64::Engine;
use serde::{Deserialize, Serialize};

/// Analytic shape classes; `Mask` carries no predicate beyond the grid bits.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainKind {
    Ball { center: Point, radius: f64 },
    Rectangle { lo: Point, hi: Point },
    /// Counterclockwise convex polygon, d = 2 only.
    ConvexPolygon { vertices: Vec<[f64; 2]> },
    /// Axis-aligned rectangle with a closed rectangular notch removed.
    LShape { outer_lo: Point, outer_hi: Point, notch_lo: Point, notch_hi: Point },
    Annulus { center: Point, r_inner: f64, r_outer: f64 },
    Mask,
}

impl DomainKind {
    pub fn tag(&self) -> &'static str {
        match self {
            DomainKind::Ball { .. } => "ball",
            DomainKind::Rectangle { .. } => "rectangle",
            DomainKind::ConvexPolygon { .. } => "convex-polygon",
            DomainKind::LShape { .. } => "l-shape",
            DomainKind::Annulus { .. } => "annulus",
            DomainKind::Mask => "mask",
        }
    }

    /// Convexity by construction (masks are treated as non-convex).
    pub fn is_convex(&self) -> bool {
        matches!(
            self,
            DomainKind::Ball { .. } | DomainKind::Rectangle { .. } | DomainKind::ConvexPolygon { .. }
        )
    }
}

/// An open connected set sampled on a uniform grid.
#[derive(Debug, Clone)]
pub struct Domain {
    kind: DomainKind,
    grid: Grid,
    mask: Vec<bool>,
    /// Grid indices of interior cells, ascending (row-major order).
    interior: Vec<usize>,
    /// Grid index -> interior rank, `u32::MAX` for exterior cells.
    rank: Vec<u32>,
    /// Exterior lattice cells face-adjacent to an interior cell
    /// (signed coordinates; may lie one ring outside the box).
    face_boundary: Vec<[i64; 3]>,
    /// Exterior lattice cells Moore-adjacent to an interior cell; superset
    /// of `face_boundary`, used for mask distance queries.
    moore_boundary: Vec<[i64; 3]>,
}

impl Domain {
    // ---------------------------------------------------------------- constructors

    pub fn ball(d: usize, center: Point, radius: f64, h: f64) -> Result<Domain> {
        if radius <= 0.0 {
            return Err(Error::DegenerateDomain("ball radius must be positive".into()));
        }
        let n = cells_spanning(2.0 * radius, h);
        let mut lo = [0.0; 3];
        for m in 0..d {
            lo[m] = center[m] - 0.5 * n as f64 * h;
        }
        let grid = Grid::new(d, h, lo, &vec![n; d]);
        Domain::from_predicate(DomainKind::Ball { center, radius }, grid)
    }

    pub fn rectangle(d: usize, lo: Point, hi: Point, h: f64) -> Result<Domain> {
        let mut shape = Vec::with_capacity(d);
        let mut glo = [0.0; 3];
        for m in 0..d {
            if hi[m] <= lo[m] {
                return Err(Error::DegenerateDomain("rectangle has empty extent".into()));
            }
            // Half-cell alignment puts ghost nodes exactly on the faces.
            shape.push(cells_spanning(hi[m] - lo[m], h) + 1);
            glo[m] = lo[m] - 0.5 * h;
        }
        let grid = Grid::new(d, h, glo, &shape);
        Domain::from_predicate(DomainKind::Rectangle { lo, hi }, grid)
    }

    /// 2D convex polygon; vertices are normalized to counterclockwise order.
    pub fn convex_polygon(vertices: Vec<[f64; 2]>, h: f64) -> Result<Domain> {
        if vertices.len() < 3 {
            return Err(Error::DegenerateDomain("polygon needs at least 3 vertices".into()));
        }
        let mut vs = vertices;
        if polygon_signed_area(&vs) < 0.0 {
            vs.reverse();
        }
        if !polygon_is_convex(&vs) {
            return Err(Error::DegenerateDomain("polygon is not convex".into()));
        }
        let (mut lo, mut hi) = ([f64::INFINITY; 3], [f64::NEG_INFINITY; 3]);
        for v in &vs {
            for m in 0..2 {
                lo[m] = lo[m].min(v[m]);
                hi[m] = hi[m].max(v[m]);
            }
        }
        let shape: Vec<usize> = (0..2).map(|m| cells_spanning(hi[m] - lo[m], h)).collect();
        let grid = Grid::new(2, h, lo, &shape);
        Domain::from_predicate(DomainKind::ConvexPolygon { vertices: vs }, grid)
    }

    /// Regular polygonal approximation of an ellipse with semi-axes `a, b`.
    pub fn ellipse(center: [f64; 2], a: f64, b: f64, sides: usize, h: f64) -> Result<Domain> {
        let vs: Vec<[f64; 2]> = (0..sides)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / sides as f64;
                [center[0] + a * t.cos(), center[1] + b * t.sin()]
            })
            .collect();
        Domain::convex_polygon(vs, h)
    }

    pub fn l_shape(outer_lo: Point, outer_hi: Point, notch_lo: Point, notch_hi: Point, d: usize, h: f64) -> Result<Domain> {
        let mut shape = Vec::with_capacity(d);
        let mut glo = [0.0; 3];
        for m in 0..d {
            if outer_hi[m] <= outer_lo[m] {
                return Err(Error::DegenerateDomain("l-shape outer box empty".into()));
            }
            shape.push(cells_spanning(outer_hi[m] - outer_lo[m], h) + 1);
            glo[m] = outer_lo[m] - 0.5 * h;
        }
        let grid = Grid::new(d, h, glo, &shape);
        Domain::from_predicate(
            DomainKind::LShape { outer_lo, outer_hi, notch_lo, notch_hi },
            grid,
        )
    }

    pub fn annulus(d: usize, center: Point, r_inner: f64, r_outer: f64, h: f64) -> Result<Domain> {
        if !(0.0 < r_inner && r_inner < r_outer) {
            return Err(Error::DegenerateDomain("annulus radii must satisfy 0 < r_in < r_out".into()));
        }
        let n = cells_spanning(2.0 * r_outer, h);
        let mut lo = [0.0; 3];
        for m in 0..d {
            lo[m] = center[m] - 0.5 * n as f64 * h;
        }
        let grid = Grid::new(d, h, lo, &vec![n; d]);
        Domain::from_predicate(DomainKind::Annulus { center, r_inner, r_outer }, grid)
    }

    /// Build a mask-kind domain from explicit bits (row-major over the grid).
    pub fn from_mask(grid: Grid, mask: Vec<bool>) -> Result<Domain> {
        assert_eq!(mask.len(), grid.len(), "mask length must match grid");
        Domain::finish(DomainKind::Mask, grid, mask)
    }

    /// Derive a mask-kind domain on the same grid, keeping interior cells
    /// whose centers satisfy `keep`. Used for obstacle removal and nested
    /// monotonicity tests.
    pub fn mask_filter<F: Fn(Point) -> bool>(&self, keep: F) -> Result<Domain> {
        let mut mask = vec![false; self.grid.len()];
        for &idx in &self.interior {
            let p = self.grid.center(self.grid.coords(idx));
            mask[idx] = keep(p);
        }
        Domain::finish(DomainKind::Mask, self.grid.clone(), mask)
    }

    fn from_predicate(kind: DomainKind, grid: Grid) -> Result<Domain> {
        let mut mask = vec![false; grid.len()];
        for (i, c) in grid.cells().enumerate() {
            mask[i] = kind_contains(&kind, &grid, grid.center(c));
        }
        Domain::finish(kind, grid, mask)
    }

    fn finish(kind: DomainKind, grid: Grid, mask: Vec<bool>) -> Result<Domain> {
        let interior: Vec<usize> = mask
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect();
        if interior.is_empty() {
            return Err(Error::DegenerateDomain("empty interior mask".into()));
        }
        let mut rank = vec![u32::MAX; grid.len()];
        for (r, &idx) in interior.iter().enumerate() {
            rank[idx] = r as u32;
        }
        let mut dom = Domain {
            kind,
            grid,
            mask,
            interior,
            rank,
            face_boundary: Vec::new(),
            moore_boundary: Vec::new(),
        };
        dom.collect_boundary();
        if !dom.is_connected() {
            return Err(Error::DegenerateDomain("interior mask is not connected".into()));
        }
        Ok(dom)
    }

    fn collect_boundary(&mut self) {
        let g = &self.grid;
        let mut face = std::collections::BTreeSet::new();
        let mut moore = std::collections::BTreeSet::new();
        for &idx in &self.interior {
            let c = g.coords(idx);
            let ci = [c[0] as i64, c[1] as i64, c[2] as i64];
            // Face neighbours.
            for m in 0..g.d {
                for s in [-1i64, 1] {
                    let mut n = ci;
                    n[m] += s;
                    if !self.lattice_interior(n) {
                        face.insert(n);
                    }
                }
            }
            // Full Moore shell.
            let span = |m: usize| if m < g.d { -1i64..=1 } else { 0..=0 };
            for a in span(0) {
                for b in span(1) {
                    for cc in span(2) {
                        if a == 0 && b == 0 && cc == 0 {
                            continue;
                        }
                        let n = [ci[0] + a, ci[1] + b, ci[2] + cc];
                        if !self.lattice_interior(n) {
                            moore.insert(n);
                        }
                    }
                }
            }
        }
        self.face_boundary = face.into_iter().collect();
        self.moore_boundary = moore.into_iter().collect();
    }

    fn is_connected(&self) -> bool {
        let g = &self.grid;
        let mut seen = vec![false; g.len()];
        let mut queue = std::collections::VecDeque::new();
        let start = self.interior[0];
        seen[start] = true;
        queue.push_back(start);
        let mut count = 1usize;
        while let Some(idx) = queue.pop_front() {
            let c = g.coords(idx);
            for m in 0..g.d {
                for s in [-1i64, 1] {
                    let v = c[m] as i64 + s;
                    if v < 0 || v as usize >= g.shape[m] {
                        continue;
                    }
                    let mut n = c;
                    n[m] = v as usize;
                    let nidx = g.index(n);
                    if self.mask[nidx] && !seen[nidx] {
                        seen[nidx] = true;
                        count += 1;
                        queue.push_back(nidx);
                    }
                }
            }
        }
        count == self.interior.len()
    }

    #[inline]
    fn lattice_interior(&self, c: [i64; 3]) -> bool {
        self.grid.lattice_in_box(c)
            && self.mask[self
                .grid
                .index([c[0] as usize, c[1] as usize, c[2] as usize])]
    }

    // ---------------------------------------------------------------- accessors

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn d(&self) -> usize {
        self.grid.d
    }

    pub fn h(&self) -> f64 {
        self.grid.h
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Grid indices of interior cells in row-major order.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn interior_count(&self) -> usize {
        self.interior.len()
    }

    /// Interior rank of the cell holding grid index `idx`, if interior.
    #[inline]
    pub fn rank_of(&self, idx: usize) -> Option<usize> {
        let r = self.rank[idx];
        (r != u32::MAX).then_some(r as usize)
    }

    /// Center of the interior cell with the given rank.
    #[inline]
    pub fn interior_point(&self, rank: usize) -> Point {
        self.grid.center(self.grid.coords(self.interior[rank]))
    }

    /// Interior rank of the cell containing `p`, if any.
    #[inline]
    pub fn rank_at(&self, p: Point) -> Option<usize> {
        let c = self.grid.cell_of(p)?;
        self.rank_of(self.grid.index(c))
    }

    /// Strict membership of the open set. Analytic kinds test the predicate;
    /// mask kinds test the cell bit.
    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        match &self.kind {
            DomainKind::Mask => self
                .grid
                .cell_of(p)
                .map(|c| self.mask[self.grid.index(c)])
                .unwrap_or(false),
            kind => kind_contains(kind, &self.grid, p),
        }
    }

    /// Lebesgue measure by cell counting: `count * h^d`.
    pub fn measure(&self) -> f64 {
        self.interior.len() as f64 * self.grid.cell_volume()
    }

    /// Analytic diameter for analytic kinds, bounding-box diagonal for masks.
    pub fn diameter(&self) -> f64 {
        match &self.kind {
            DomainKind::Ball { radius, .. } => 2.0 * radius,
            DomainKind::Rectangle { lo, hi } => dist(*hi, *lo),
            DomainKind::ConvexPolygon { vertices } => {
                let mut best: f64 = 0.0;
                for (i, a) in vertices.iter().enumerate() {
                    for b in &vertices[i + 1..] {
                        let dx = a[0] - b[0];
                        let dy = a[1] - b[1];
                        best = best.max((dx * dx + dy * dy).sqrt());
                    }
                }
                best
            }
            DomainKind::LShape { outer_lo, outer_hi, .. } => dist(*outer_hi, *outer_lo),
            DomainKind::Annulus { r_outer, .. } => 2.0 * r_outer,
            DomainKind::Mask => dist(self.grid.hi(), self.grid.lo),
        }
    }

    /// Exterior boundary points used by `certify_beta`: centers of exterior
    /// cells face-adjacent to interior cells (within h of the boundary).
    pub fn boundary_points(&self) -> Vec<Point> {
        self.face_boundary
            .iter()
            .map(|&c| self.grid.lattice_center(c))
            .collect()
    }

    // ---------------------------------------------------------------- metric operations

    /// Distance from an interior point to the domain boundary. Exact for
    /// analytic kinds; within one cell size for masks.
    pub fn dist_to_boundary(&self, p: Point) -> Result<f64> {
        if !self.contains(p) {
            return Err(Error::PointOutsideDomain { point: p });
        }
        Ok(self.boundary_projection(p).0)
    }

    /// Nearest boundary point (approximate for masks).
    pub fn nearest_boundary_point(&self, p: Point) -> Point {
        self.boundary_projection(p).1
    }

    fn boundary_projection(&self, p: Point) -> (f64, Point) {
        match &self.kind {
            DomainKind::Ball { center, radius } => {
                let v = sub(p, *center);
                let rho = norm(v);
                if rho == 0.0 {
                    let mut q = *center;
                    q[0] += radius;
                    (*radius, q)
                } else {
                    let s = radius / rho;
                    (
                        radius - rho,
                        [center[0] + v[0] * s, center[1] + v[1] * s, center[2] + v[2] * s],
                    )
                }
            }
            DomainKind::Rectangle { lo, hi } => rect_projection(self.d(), p, *lo, *hi),
            DomainKind::ConvexPolygon { vertices } => {
                let (d2, q) = polygon_boundary_projection(vertices, [p[0], p[1]]);
                (d2, [q[0], q[1], 0.0])
            }
            DomainKind::LShape { outer_lo, outer_hi, notch_lo, notch_hi } => {
                let (d_outer, q_outer) = rect_projection(self.d(), p, *outer_lo, *outer_hi);
                let (d_notch, q_notch) = box_projection(self.d(), p, *notch_lo, *notch_hi);
                if d_outer <= d_notch {
                    (d_outer, q_outer)
                } else {
                    (d_notch, q_notch)
                }
            }
            DomainKind::Annulus { center, r_inner, r_outer } => {
                let v = sub(p, *center);
                let rho = norm(v);
                let to_outer = r_outer - rho;
                let to_inner = rho - r_inner;
                let r = if to_outer <= to_inner { *r_outer } else { *r_inner };
                let s = r / rho;
                (
                    to_outer.min(to_inner),
                    [center[0] + v[0] * s, center[1] + v[1] * s, center[2] + v[2] * s],
                )
            }
            DomainKind::Mask => {
                let mut best = f64::INFINITY;
                let mut q = p;
                // Distance to the box complement.
                let hi = self.grid.hi();
                for m in 0..self.d() {
                    if p[m] - self.grid.lo[m] < best {
                        best = p[m] - self.grid.lo[m];
                        q = p;
                        q[m] = self.grid.lo[m];
                    }
                    if hi[m] - p[m] < best {
                        best = hi[m] - p[m];
                        q = p;
                        q[m] = hi[m];
                    }
                }
                // Distance to exterior cells along the mask boundary.
                let h = self.grid.h;
                for &c in &self.moore_boundary {
                    let mut blo = self.grid.lo;
                    for m in 0..self.d() {
                        blo[m] = self.grid.lo[m] + c[m] as f64 * h;
                    }
                    let mut bhi = blo;
                    for m in 0..self.d() {
                        bhi[m] = blo[m] + h;
                    }
                    let (dd, qq) = box_projection(self.d(), p, blo, bhi);
                    if dd < best {
                        best = dd;
                        q = qq;
                    }
                }
                (best, q)
            }
        }
    }

    /// Largest distance-to-boundary over interior cell centers; O(h)
    /// approximation of the inradius, exact within h for analytic kinds.
    pub fn inradius(&self) -> Result<f64> {
        if self.interior.is_empty() {
            return Err(Error::DegenerateDomain("empty interior".into()));
        }
        let vals = exec::map_indexed(self.interior.len(), |r| {
            self.boundary_projection(self.interior_point(r)).0
        });
        Ok(vals.into_iter().fold(f64::NEG_INFINITY, f64::max))
    }

    /// Ratio `|D^c ∩ B_r(z)| / |B_r(z)|` by cell-center counting on the
    /// lattice extended past the bounding box (outside counts as exterior).
    pub fn exterior_density(&self, z: Point, r: f64) -> Result<f64> {
        let two_h = 2.0 * self.grid.h;
        if r <= two_h {
            return Err(Error::RadiusUnderResolved { r, two_h });
        }
        let (ext, total) = self.count_ball_cells(z, r);
        Ok(ext as f64 / total as f64)
    }

    /// `|B_r(x0) ∩ D^c|` by cell counting, in measure units.
    pub fn cap_exterior_measure(&self, x0: Point, r: f64) -> f64 {
        let (ext, _) = self.count_ball_cells(x0, r);
        ext as f64 * self.grid.cell_volume()
    }

    /// Lattice-counted measure of `B_r(x0)` (same counting rule as the cap).
    pub fn ball_measure(&self, x0: Point, r: f64) -> f64 {
        let (_, total) = self.count_ball_cells(x0, r);
        total as f64 * self.grid.cell_volume()
    }

    fn count_ball_cells(&self, z: Point, r: f64) -> (u64, u64) {
        let g = &self.grid;
        let lo = g.lattice_cell_of([z[0] - r, z[1] - r, z[2] - r]);
        let hi = g.lattice_cell_of([z[0] + r, z[1] + r, z[2] + r]);
        let r2 = r * r;
        let mut ext = 0u64;
        let mut total = 0u64;
        let span = |m: usize| if m < g.d { lo[m]..=hi[m] } else { 0..=0 };
        for a in span(0) {
            for b in span(1) {
                for c in span(2) {
                    let cell = [a, b, c];
                    let ctr = g.lattice_center(cell);
                    let dv = sub(ctr, z);
                    if dv[0] * dv[0] + dv[1] * dv[1] + dv[2] * dv[2] >= r2 {
                        continue;
                    }
                    total += 1;
                    if !self.lattice_interior(cell) {
                        ext += 1;
                    }
                }
            }
        }
        (ext, total)
    }

    /// Certify a uniform exterior-density constant over all boundary cells
    /// and the given radii. The certificate's beta is the worst observed
    /// ratio; the "for every r > 0" condition is approximated by the finite
    /// radius list.
    pub fn certify_beta(&self, radii: &[f64]) -> Result<BetaCertificate> {
        if radii.is_empty() {
            return Err(Error::InvalidConfig("certify_beta needs a nonempty radius list".into()));
        }
        let two_h = 2.0 * self.grid.h;
        for &r in radii {
            if r <= two_h {
                return Err(Error::RadiusUnderResolved { r, two_h });
            }
        }
        let points = self.boundary_points();
        let per_point: Vec<f64> = exec::map_indexed(points.len(), |i| {
            radii
                .iter()
                .map(|&r| {
                    let (ext, total) = self.count_ball_cells(points[i], r);
                    ext as f64 / total as f64
                })
                .fold(f64::INFINITY, f64::min)
        });
        let beta = per_point.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(BetaCertificate {
            beta,
            points,
            radii: radii.to_vec(),
            worst_ratio: beta,
        })
    }

    /// Same shape sampled at half the cell size. Analytic kinds re-sample
    /// the predicate; mask kinds split each cell into 2^d children.
    pub fn refined(&self) -> Result<Domain> {
        let g = self.grid();
        match &self.kind {
            DomainKind::Mask => {
                let shape: Vec<usize> = (0..g.d).map(|m| 2 * g.shape[m]).collect();
                let fine = Grid::new(g.d, g.h / 2.0, g.lo, &shape);
                let mut mask = vec![false; fine.len()];
                for (i, c) in fine.cells().enumerate() {
                    let parent = [c[0] / 2, c[1] / 2, c[2] / 2];
                    mask[i] = self.mask[g.index(parent)];
                }
                Domain::from_mask(fine, mask)
            }
            kind => {
                let shape: Vec<usize> = (0..g.d).map(|m| 2 * g.shape[m]).collect();
                let fine = Grid::new(g.d, g.h / 2.0, g.lo, &shape);
                Domain::from_predicate(kind.clone(), fine)
            }
        }
    }

    /// Geometrically similar copy: all lengths (including h) scaled by `s`.
    /// The mask is preserved bit-for-bit, so operators on the two domains
    /// are exactly proportional when `s` is a power of two.
    pub fn rescaled(&self, s: f64) -> Result<Domain> {
        assert!(s > 0.0);
        let g = self.grid();
        let scale_pt = |p: Point| [p[0] * s, p[1] * s, p[2] * s];
        let grid = Grid::new(g.d, g.h * s, scale_pt(g.lo), &g.shape[..g.d]);
        let kind = match &self.kind {
            DomainKind::Ball { center, radius } => DomainKind::Ball {
                center: scale_pt(*center),
                radius: radius * s,
            },
            DomainKind::Rectangle { lo, hi } => DomainKind::Rectangle {
                lo: scale_pt(*lo),
                hi: scale_pt(*hi),
            },
            DomainKind::ConvexPolygon { vertices } => DomainKind::ConvexPolygon {
                vertices: vertices.iter().map(|v| [v[0] * s, v[1] * s]).collect(),
            },
            DomainKind::LShape { outer_lo, outer_hi, notch_lo, notch_hi } => DomainKind::LShape {
                outer_lo: scale_pt(*outer_lo),
                outer_hi: scale_pt(*outer_hi),
                notch_lo: scale_pt(*notch_lo),
                notch_hi: scale_pt(*notch_hi),
            },
            DomainKind::Annulus { center, r_inner, r_outer } => DomainKind::Annulus {
                center: scale_pt(*center),
                r_inner: r_inner * s,
                r_outer: r_outer * s,
            },
            DomainKind::Mask => DomainKind::Mask,
        };
        Domain::finish(kind, grid, self.mask.clone())
    }

    /// Default geometric radius ladder from 4h up to the diameter.
    pub fn default_beta_radii(&self) -> Vec<f64> {
        let mut radii = Vec::new();
        let mut r = 4.0 * self.grid.h;
        let diam = self.diameter();
        while r < diam {
            radii.push(r);
            r *= 2.0;
        }
        radii.push(diam);
        radii
    }
}

/// Certificate that every tested boundary ball contains at least a `beta`
/// fraction of exterior volume.
#[derive(Debug, Clone)]
pub struct BetaCertificate {
    pub beta: f64,
    pub points: Vec<Point>,
    pub radii: Vec<f64>,
    pub worst_ratio: f64,
}

// -------------------------------------------------------------------- helpers

/// Number of cells spanning an extent, robust to extents that are exact
/// multiples of h.
fn cells_spanning(extent: f64, h: f64) -> usize {
    ((extent / h) - 1e-9).ceil().max(1.0) as usize
}

fn kind_contains(kind: &DomainKind, grid: &Grid, p: Point) -> bool {
    let d = grid.d;
    match kind {
        DomainKind::Ball { center, radius } => dist(p, *center) < *radius,
        DomainKind::Rectangle { lo, hi } => (0..d).all(|m| lo[m] < p[m] && p[m] < hi[m]),
        DomainKind::ConvexPolygon { vertices } => polygon_contains(vertices, [p[0], p[1]]),
        DomainKind::LShape { outer_lo, outer_hi, notch_lo, notch_hi } => {
            let in_outer = (0..d).all(|m| outer_lo[m] < p[m] && p[m] < outer_hi[m]);
            let in_notch = (0..d).all(|m| notch_lo[m] <= p[m] && p[m] <= notch_hi[m]);
            in_outer && !in_notch
        }
        DomainKind::Annulus { center, r_inner, r_outer } => {
            let rho = dist(p, *center);
            *r_inner < rho && rho < *r_outer
        }
        DomainKind::Mask => unreachable!("mask kind has no predicate"),
    }
}

fn polygon_signed_area(vs: &[[f64; 2]]) -> f64 {
    let mut s = 0.0;
    for i in 0..vs.len() {
        let a = vs[i];
        let b = vs[(i + 1) % vs.len()];
        s += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * s
}

fn polygon_is_convex(vs: &[[f64; 2]]) -> bool {
    let n = vs.len();
    for i in 0..n {
        let a = vs[i];
        let b = vs[(i + 1) % n];
        let c = vs[(i + 2) % n];
        let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if cross < -1e-12 {
            return false;
        }
    }
    true
}

fn polygon_contains(vs: &[[f64; 2]], p: [f64; 2]) -> bool {
    let n = vs.len();
    for i in 0..n {
        let a = vs[i];
        let b = vs[(i + 1) % n];
        let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        if cross <= 0.0 {
            return false;
        }
    }
    true
}

/// Distance from an interior point of a rectangle to its boundary, with the
/// achieving face projection.
fn rect_projection(d: usize, p: Point, lo: Point, hi: Point) -> (f64, Point) {
    let mut best = f64::INFINITY;
    let mut q = p;
    for m in 0..d {
        if p[m] - lo[m] < best {
            best = p[m] - lo[m];
            q = p;
            q[m] = lo[m];
        }
        if hi[m] - p[m] < best {
            best = hi[m] - p[m];
            q = p;
            q[m] = hi[m];
        }
    }
    (best, q)
}

/// Distance from a point outside a closed box to the box, with projection.
fn box_projection(d: usize, p: Point, lo: Point, hi: Point) -> (f64, Point) {
    let mut q = p;
    for m in 0..d {
        q[m] = p[m].clamp(lo[m], hi[m]);
    }
    (dist(p, q), q)
}

fn polygon_boundary_projection(vs: &[[f64; 2]], p: [f64; 2]) -> (f64, [f64; 2]) {
    let n = vs.len();
    let mut best = f64::INFINITY;
    let mut q = p;
    for i in 0..n {
        let a = vs[i];
        let b = vs[(i + 1) % n];
        let ab = [b[0] - a[0], b[1] - a[1]];
        let len2 = ab[0] * ab[0] + ab[1] * ab[1];
        let t = (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0);
        let c = [a[0] + t * ab[0], a[1] + t * ab[1]];
        let dd = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt();
        if dd < best {
            best = dd;
            q = c;
        }
    }
    (best, q)
}

// -------------------------------------------------------------------- serialization

#[derive(Serialize, Deserialize)]
struct DomainDto {
    kind: String,
    d: usize,
    h: f64,
    bbox: BboxDto,
    params: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    mask: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct BboxDto {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Domain {
    /// Serialize to the wire format
    /// `{kind, d, h, bbox, params, mask?}`; the mask bit array (row-major,
    /// base64) is present only for kind = "mask".
    pub fn to_json(&self) -> serde_json::Value {
        let d = self.d();
        let hi = self.grid.hi();
        let params = match &self.kind {
            DomainKind::Ball { center, radius } => serde_json::json!({
                "center": center[..d].to_vec(), "radius": radius
            }),
            DomainKind::Rectangle { lo, hi } => serde_json::json!({
                "lo": lo[..d].to_vec(), "hi": hi[..d].to_vec()
            }),
            DomainKind::ConvexPolygon { vertices } => serde_json::json!({
                "vertices": vertices
            }),
            DomainKind::LShape { outer_lo, outer_hi, notch_lo, notch_hi } => serde_json::json!({
                "outer_lo": outer_lo[..d].to_vec(), "outer_hi": outer_hi[..d].to_vec(),
                "notch_lo": notch_lo[..d].to_vec(), "notch_hi": notch_hi[..d].to_vec(),
            }),
            DomainKind::Annulus { center, r_inner, r_outer } => serde_json::json!({
                "center": center[..d].to_vec(), "r_inner": r_inner, "r_outer": r_outer
            }),
            DomainKind::Mask => serde_json::json!({}),
        };
        let mask = matches!(self.kind, DomainKind::Mask).then(|| encode_mask(&self.mask));
        serde_json::to_value(DomainDto {
            kind: self.kind.tag().to_string(),
            d,
            h: self.h(),
            bbox: BboxDto {
                lo: self.grid.lo[..d].to_vec(),
                hi: hi[..d].to_vec(),
            },
            params,
            mask,
        })
        .expect("domain serialization cannot fail")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Domain> {
        let dto: DomainDto = serde_json::from_value(value.clone())?;
        let d = dto.d;
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidConfig(format!("dimension {d} out of range")));
        }
        let get = |v: &serde_json::Value, key: &str| -> Result<Point> {
            let arr: Vec<f64> = serde_json::from_value(
                v.get(key)
                    .ok_or_else(|| Error::InvalidConfig(format!("missing param {key}")))?
                    .clone(),
            )?;
            let mut p = [0.0; 3];
            p[..arr.len().min(3)].copy_from_slice(&arr[..arr.len().min(3)]);
            Ok(p)
        };
        let getf = |v: &serde_json::Value, key: &str| -> Result<f64> {
            v.get(key)
                .and_then(|x| x.as_f64())
                .ok_or_else(|| Error::InvalidConfig(format!("missing param {key}")))
        };
        match dto.kind.as_str() {
            "ball" => Domain::ball(d, get(&dto.params, "center")?, getf(&dto.params, "radius")?, dto.h),
            "rectangle" => Domain::rectangle(d, get(&dto.params, "lo")?, get(&dto.params, "hi")?, dto.h),
            "convex-polygon" => {
                let vs: Vec<[f64; 2]> = serde_json::from_value(
                    dto.params
                        .get("vertices")
                        .ok_or_else(|| Error::InvalidConfig("missing param vertices".into()))?
                        .clone(),
                )?;
                Domain::convex_polygon(vs, dto.h)
            }
            "l-shape" => Domain::l_shape(
                get(&dto.params, "outer_lo")?,
                get(&dto.params, "outer_hi")?,
                get(&dto.params, "notch_lo")?,
                get(&dto.params, "notch_hi")?,
                d,
                dto.h,
            ),
            "annulus" => Domain::annulus(
                d,
                get(&dto.params, "center")?,
                getf(&dto.params, "r_inner")?,
                getf(&dto.params, "r_outer")?,
                dto.h,
            ),
            "mask" => {
                let bits = dto
                    .mask
                    .ok_or_else(|| Error::InvalidConfig("mask kind requires mask bits".into()))?;
                let mut lo = [0.0; 3];
                lo[..d].copy_from_slice(&dto.bbox.lo);
                let shape: Vec<usize> = (0..d)
                    .map(|m| ((dto.bbox.hi[m] - dto.bbox.lo[m]) / dto.h).round() as usize)
                    .collect();
                let grid = Grid::new(d, dto.h, lo, &shape);
                let mask = decode_mask(&bits, grid.len())?;
                Domain::from_mask(grid, mask)
            }
            other => Err(Error::InvalidConfig(format!("unknown domain kind {other:?}"))),
        }
    }
}

fn encode_mask(mask: &[bool]) -> String {
    let mut bytes = vec![0u8; mask.len().div_ceil(8)];
    for (i, &b) in mask.iter().enumerate() {
        if b {
            bytes[i / 8] |= 1 << (i % 8);
        }
    }
    base64::engine::general_purpose::STANDARD.encode(bytes)
}

fn decode_mask(s: &str, len: usize) -> Result<Vec<bool>> {
    let bytes = base64::engine::general_purpose::STANDARD
        .decode(s)
        .map_err(|e| Error::InvalidConfig(format!("bad mask encoding: {e}")))?;
    if bytes.len() != len.div_ceil(8) {
        return Err(Error::InvalidConfig("mask length does not match grid".into()));
    }
    Ok((0..len).map(|i| bytes[i / 8] & (1 << (i % 8)) != 0).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_ball_2d(h: f64) -> Domain {
        Domain::ball(2, [0.0; 3], 1.0, h).unwrap()
    }

    #[test]
    fn ball_inradius_is_radius() {
        for d in 1..=3 {
            let h = if d == 3 { 1.0 / 8.0 } else { 1.0 / 32.0 };
            let dom = Domain::ball(d, [0.0; 3], 1.0, h).unwrap();
            let inr = dom.inradius().unwrap();
            assert!((inr - 1.0).abs() <= h, "d={d}: inradius {inr}");
        }
    }

    #[test]
    fn rectangle_inradius_is_half_short_side() {
        let dom = Domain::rectangle(2, [0.0; 3], [2.0, 1.0, 0.0], 1.0 / 32.0).unwrap();
        let inr = dom.inradius().unwrap();
        assert!((inr - 0.5).abs() <= 1.0 / 32.0, "inradius {inr}");
    }

    /// Independent oracle: brute-force distance transform at h/2 resolution.
    fn distance_transform_inradius(dom_fine: &Domain) -> f64 {
        let g = dom_fine.grid();
        let ext: Vec<Point> = dom_fine
            .moore_boundary
            .iter()
            .map(|&c| g.lattice_center(c))
            .collect();
        let mut best: f64 = 0.0;
        for &idx in dom_fine.interior() {
            let p = g.center(g.coords(idx));
            let mut dmin = f64::INFINITY;
            let hi = g.hi();
            for m in 0..g.d {
                dmin = dmin.min(p[m] - g.lo[m]).min(hi[m] - p[m]);
            }
            for q in &ext {
                // Distance to the closed cell box around q.
                let mut s = 0.0;
                for m in 0..g.d {
                    let dlo = q[m] - 0.5 * g.h;
                    let dhi = q[m] + 0.5 * g.h;
                    let e = (dlo - p[m]).max(0.0).max(p[m] - dhi);
                    s += e * e;
                }
                dmin = dmin.min(s.sqrt());
            }
            best = best.max(dmin);
        }
        best
    }

    #[test]
    fn l_shape_inradius_matches_distance_transform() {
        let h = 1.0 / 16.0;
        let mk = |hh: f64| {
            Domain::l_shape(
                [0.0; 3],
                [2.0, 2.0, 0.0],
                [1.0, 1.0, 0.0],
                [2.0, 2.0, 0.0],
                2,
                hh,
            )
            .unwrap()
        };
        let dom = mk(h);
        let inr = dom.inradius().unwrap();
        let fine = mk(h / 2.0);
        let oracle = distance_transform_inradius(&fine);
        assert!(
            (inr - oracle).abs() <= 2.0 * h,
            "inradius {inr} vs distance-transform oracle {oracle}"
        );
        // Analytic inradius: the optimal center sits on the diagonal where
        // the wall distance equals the distance to the notch corner,
        // giving 2 - sqrt(2).
        let exact = 2.0 - 2f64.sqrt();
        assert!((inr - exact).abs() <= h, "analytic check failed: {inr} vs {exact}");
    }

    #[test]
    fn dist_to_boundary_ball() {
        let dom = unit_ball_2d(1.0 / 32.0);
        assert!((dom.dist_to_boundary([0.0; 3]).unwrap() - 1.0).abs() < 1e-12);
        assert!((dom.dist_to_boundary([0.5, 0.0, 0.0]).unwrap() - 0.5).abs() < 1e-12);
        assert!(dom.dist_to_boundary([2.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn l_shape_dist_near_reentrant_corner() {
        let h = 1.0 / 32.0;
        let dom = Domain::l_shape(
            [0.0; 3],
            [2.0, 2.0, 0.0],
            [1.0, 1.0, 0.0],
            [2.0, 2.0, 0.0],
            2,
            h,
        )
        .unwrap();
        // Point just inside the re-entrant corner.
        let p = [1.0 - 3.0 * h, 1.0 - 3.0 * h, 0.0];
        let d = dom.dist_to_boundary(p).unwrap();
        // Exhaustive oracle over exterior boundary cells.
        let mut oracle = f64::INFINITY;
        let g = dom.grid();
        for &c in &dom.moore_boundary {
            let q = g.lattice_center(c);
            let mut s = 0.0;
            for m in 0..2 {
                let e = ((q[m] - 0.5 * h) - p[m]).max(0.0).max(p[m] - (q[m] + 0.5 * h));
                s += e * e;
            }
            oracle = oracle.min(s.sqrt());
        }
        // Analytic distance is to the notch corner: 3h*sqrt(2).
        assert!((d - 3.0 * h * 2f64.sqrt()).abs() < 1e-12, "d = {d}");
        assert!((d - oracle).abs() <= h, "analytic {d} vs scan {oracle}");
    }

    #[test]
    fn exterior_density_flat_boundary_is_half() {
        // Large rectangle; probe the midpoint of one long edge.
        let h = 1.0 / 64.0;
        let dom = Domain::rectangle(2, [0.0; 3], [2.0, 1.0, 0.0], h).unwrap();
        // Exterior cell center just below the midpoint of the long edge.
        let z = [1.0 + 0.5 * h, -0.5 * h, 0.0];
        let r = 0.25;
        let rho = dom.exterior_density(z, r).unwrap();
        assert!((rho - 0.5).abs() <= 3.0 * h / r, "density {rho}");
    }

    #[test]
    fn exterior_density_square_corner_three_quarters() {
        let h = 1.0 / 128.0;
        let dom = Domain::rectangle(2, [0.0; 3], [1.0, 1.0, 0.0], h).unwrap();
        // Exterior cell center just outside the corner (0,0).
        let z = [-0.5 * h, -0.5 * h, 0.0];
        let r = 0.1;
        let rho = dom.exterior_density(z, r).unwrap();
        // Oracle: same counting at half the cell size.
        let fine = Domain::rectangle(2, [0.0; 3], [1.0, 1.0, 0.0], h / 2.0).unwrap();
        let oracle = fine.exterior_density([-0.25 * h, -0.25 * h, 0.0], r).unwrap();
        assert!((rho - 0.75).abs() <= 6.0 * h / r, "density {rho}");
        assert!((rho - oracle).abs() <= 6.0 * h / r, "coarse {rho} fine {oracle}");
    }

    #[test]
    fn exterior_density_rejects_small_radius() {
        let dom = unit_ball_2d(1.0 / 16.0);
        assert!(matches!(
            dom.exterior_density([1.0, 0.0, 0.0], 0.1),
            Err(Error::RadiusUnderResolved { .. })
        ));
    }

    #[test]
    fn certify_beta_convex_at_least_half() {
        let h = 1.0 / 32.0;
        for dom in [
            unit_ball_2d(h),
            Domain::rectangle(2, [0.0; 3], [1.0, 1.0, 0.0], h).unwrap(),
        ] {
            let radii = [0.125, 0.25, 0.5];
            let cert = dom.certify_beta(&radii).unwrap();
            let slack = 5.0 * h / radii[0];
            assert!(cert.beta >= 0.5 - slack, "beta = {}", cert.beta);
            assert!(cert.worst_ratio >= cert.beta);
        }
    }

    #[test]
    fn annulus_with_thin_hole_loses_half_density() {
        let h = 1.0 / 64.0;
        let dom = Domain::annulus(2, [0.0; 3], 0.15, 1.0, h).unwrap();
        // Radii larger than the hole radius see mostly interior around the
        // inner boundary.
        let radii = [0.5];
        let cert = dom.certify_beta(&radii).unwrap();
        assert!(cert.beta < 0.5, "beta = {} should dip below 1/2", cert.beta);
    }

    #[test]
    fn cap_measures_on_the_unit_ball() {
        let h = 1.0 / 64.0;
        let dom = unit_ball_2d(h);
        // Cap fully inside: zero.
        assert_eq!(dom.cap_exterior_measure([0.0; 3], 0.5), 0.0);
        // r = 2: |B_2| - |B_1| = 3 pi, per-cell error bounded by the shell of
        // boundary cells.
        let cap = dom.cap_exterior_measure([0.0; 3], 2.0);
        let exact = (4.0 - 1.0) * std::f64::consts::PI;
        assert!((cap - exact).abs() < 0.1, "cap {cap} vs {exact}");
        // Huge radius: |B_r| - |D| within the same counting convention.
        let r = 10.0 * dom.diameter();
        let cap = dom.cap_exterior_measure([0.0; 3], r);
        let ball = dom.ball_measure([0.0; 3], r);
        assert!((cap - (ball - dom.measure())).abs() < 1e-9);
    }

    #[test]
    fn cap_plus_interior_is_ball_measure() {
        let h = 1.0 / 32.0;
        let dom = unit_ball_2d(h);
        for r in [0.3, 0.9, 1.7] {
            let cap = dom.cap_exterior_measure([0.2, -0.1, 0.0], r);
            let ball = dom.ball_measure([0.2, -0.1, 0.0], r);
            let (ext, total) = dom.count_ball_cells([0.2, -0.1, 0.0], r);
            let interior_part = (total - ext) as f64 * dom.grid().cell_volume();
            assert!((cap + interior_part - ball).abs() < 1e-9);
        }
    }

    #[test]
    fn dist_bounded_by_inradius() {
        let dom = Domain::l_shape(
            [0.0; 3],
            [2.0, 2.0, 0.0],
            [1.0, 1.0, 0.0],
            [2.0, 2.0, 0.0],
            2,
            1.0 / 16.0,
        )
        .unwrap();
        let inr = dom.inradius().unwrap();
        let mut attained: f64 = 0.0;
        for r in 0..dom.interior_count() {
            let d = dom.dist_to_boundary(dom.interior_point(r)).unwrap();
            assert!(d <= inr + 1e-12);
            attained = attained.max(d);
        }
        assert!((attained - inr).abs() < 1e-12);
    }

    #[test]
    fn refinement_moves_inradius_slowly() {
        let h = 1.0 / 16.0;
        let coarse = unit_ball_2d(h).inradius().unwrap();
        let fine = unit_ball_2d(h / 2.0).inradius().unwrap();
        assert!((coarse - fine).abs() <= 2.0 * h);
    }

    #[test]
    fn degenerate_domain_is_rejected() {
        assert!(matches!(
            Domain::ball(2, [0.0; 3], -1.0, 0.1),
            Err(Error::DegenerateDomain(_))
        ));
        // Disconnected mask.
        let grid = Grid::new(2, 0.1, [0.0; 3], &[5, 5]);
        let mut mask = vec![false; grid.len()];
        mask[grid.index([0, 0, 0])] = true;
        mask[grid.index([4, 4, 0])] = true;
        assert!(matches!(
            Domain::from_mask(grid, mask),
            Err(Error::DegenerateDomain(_))
        ));
    }

    #[test]
    fn analytic_kinds_resample_to_same_mask() {
        let dom = unit_ball_2d(1.0 / 24.0);
        let g = dom.grid();
        for (i, c) in g.cells().enumerate() {
            let inside = kind_contains(dom.kind(), g, g.center(c));
            assert_eq!(inside, dom.mask()[i]);
        }
    }

    #[test]
    fn json_roundtrip_analytic_and_mask() {
        let ball = unit_ball_2d(1.0 / 16.0);
        let v = ball.to_json();
        let back = Domain::from_json(&v).unwrap();
        assert_eq!(back.mask(), ball.mask());
        assert_eq!(back.kind(), ball.kind());

        let masked = ball.mask_filter(|p| p[0] < 0.8).unwrap();
        let v = masked.to_json();
        assert!(v.get("mask").is_some());
        let back = Domain::from_json(&v).unwrap();
        assert_eq!(back.mask(), masked.mask());
        assert_eq!(back.grid(), masked.grid());
    }

    #[test]
    fn ellipse_is_convex_polygon() {
        let dom = Domain::ellipse([0.0, 0.0], 0.8, 0.4, 64, 1.0 / 32.0).unwrap();
        assert!(dom.kind().is_convex());
        let inr = dom.inradius().unwrap();
        assert!((inr - 0.4).abs() < 0.05, "inradius {inr}");
    }
}

//! Domains in R^1 and R^2, tile/domain containment classification and exact
//! intersection volumes.
//!
//! Points are stored as `[f64; 2]` in both dimensions; in dimension 1 the
//! second coordinate is ignored and kept at zero.

use std::f64::consts::PI;

use num_traits::Num;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// A convex piece of a tile support or of a domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ConvexPiece {
    /// Closed interval `[lo, hi]` (dimension 1).
    Segment(f64, f64),
    /// Convex polygon with counter-clockwise vertices (dimension 2).
    Polygon(Vec<Point>),
}

impl ConvexPiece {
    pub fn segment(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
            return Err(Error::Malformed(format!("degenerate segment [{lo}, {hi}]")));
        }
        Ok(ConvexPiece::Segment(lo, hi))
    }

    /// Builds a convex polygon, reorienting to counter-clockwise order.
    /// Collinear vertices are kept; reflex vertices are rejected.
    pub fn polygon(mut verts: Vec<Point>) -> Result<Self> {
        if verts.len() < 3 || verts.iter().any(|v| !(v[0].is_finite() && v[1].is_finite())) {
            return Err(Error::Malformed("polygon needs at least 3 finite vertices".into()));
        }
        let a = signed_area(&verts);
        let scale = verts
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |m, x| m.max(x.abs()))
            .max(1.0);
        if a.abs() <= 1e-12 * scale * scale {
            return Err(Error::Malformed("polygon has zero area".into()));
        }
        if a < 0.0 {
            verts.reverse();
        }
        let n = verts.len();
        for i in 0..n {
            let (p, q, r) = (verts[i], verts[(i + 1) % n], verts[(i + 2) % n]);
            if cross(sub(q, p), sub(r, q)) < -1e-12 * scale * scale {
                return Err(Error::Malformed("polygon is not convex".into()));
            }
        }
        Ok(ConvexPiece::Polygon(verts))
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexPiece::Segment(..) => 1,
            ConvexPiece::Polygon(_) => 2,
        }
    }

    /// Length or area.
    pub fn measure(&self) -> f64 {
        match self {
            ConvexPiece::Segment(lo, hi) => hi - lo,
            ConvexPiece::Polygon(v) => signed_area(v),
        }
    }

    pub fn vertices(&self) -> Vec<Point> {
        match self {
            ConvexPiece::Segment(lo, hi) => vec![[*lo, 0.0], [*hi, 0.0]],
            ConvexPiece::Polygon(v) => v.clone(),
        }
    }

    pub fn placed(&self, scale: f64, offset: Point) -> ConvexPiece {
        match self {
            ConvexPiece::Segment(lo, hi) => {
                ConvexPiece::Segment(lo * scale + offset[0], hi * scale + offset[0])
            }
            ConvexPiece::Polygon(v) => ConvexPiece::Polygon(
                v.iter().map(|p| [p[0] * scale + offset[0], p[1] * scale + offset[1]]).collect(),
            ),
        }
    }

    /// Radius of the largest ball contained in the piece, and its center.
    pub fn inball(&self) -> (f64, Point) {
        match self {
            ConvexPiece::Segment(lo, hi) => ((hi - lo) / 2.0, [(lo + hi) / 2.0, 0.0]),
            ConvexPiece::Polygon(v) => chebyshev_center(v),
        }
    }

    /// Distance from `p` to the boundary, positive inside, negative outside.
    pub fn depth(&self, p: Point) -> f64 {
        match self {
            ConvexPiece::Segment(lo, hi) => (p[0] - lo).min(hi - p[0]),
            ConvexPiece::Polygon(v) => {
                let n = v.len();
                let mut d = f64::INFINITY;
                for i in 0..n {
                    let (a, b) = (v[i], v[(i + 1) % n]);
                    let e = sub(b, a);
                    d = d.min(cross(e, sub(p, a)) / norm(e));
                }
                d
            }
        }
    }
}

/// A placed tile support: prototile pieces scaled by `scale` and shifted by `offset`.
#[derive(Clone, Copy, Debug)]
pub struct TileSupport<'a> {
    pub pieces: &'a [ConvexPiece],
    pub scale: f64,
    pub offset: Point,
    /// Absolute tie-breaking tolerance for containment decisions.
    pub tol: f64,
}

impl TileSupport<'_> {
    pub fn volume(&self) -> f64 {
        let d = self.pieces.first().map_or(1, ConvexPiece::dim) as i32;
        self.scale.powi(d) * self.pieces.iter().map(ConvexPiece::measure).sum::<f64>()
    }

    pub fn placed_pieces(&self) -> Vec<ConvexPiece> {
        self.pieces.iter().map(|p| p.placed(self.scale, self.offset)).collect()
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for piece in self.pieces {
            for_each_vertex(piece, self.scale, self.offset, |v| {
                for a in 0..2 {
                    lo[a] = lo[a].min(v[a]);
                    hi[a] = hi[a].max(v[a]);
                }
            });
        }
        (lo, hi)
    }
}

fn for_each_vertex(piece: &ConvexPiece, s: f64, o: Point, mut f: impl FnMut(Point)) {
    match piece {
        ConvexPiece::Segment(lo, hi) => {
            f([lo * s + o[0], 0.0]);
            f([hi * s + o[0], 0.0]);
        }
        ConvexPiece::Polygon(v) => {
            for p in v {
                f([p[0] * s + o[0], p[1] * s + o[1]]);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Cube,
    Ball,
    Polytope,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
enum Shape {
    Cube { side: f64 },
    Ball { radius: f64 },
    /// Interior-disjoint convex pieces, coordinates relative to the center.
    Pieces(Vec<ConvexPiece>),
}

/// A bounded convex (or piecewise convex) region of R^d.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    dim: usize,
    shape: Shape,
    center: Point,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TileClass {
    Inside,
    Outside,
    Crossing,
}

impl Domain {
    /// The cube `Q_side = [-side/2, side/2]^d`.
    pub fn cube(dim: usize, side: f64) -> Self {
        assert!(side > 0.0 && (dim == 1 || dim == 2), "cube needs side > 0, d in {{1,2}}");
        Domain { dim, shape: Shape::Cube { side }, center: [0.0; 2] }
    }

    pub fn ball(dim: usize, radius: f64) -> Self {
        assert!(radius > 0.0 && (dim == 1 || dim == 2), "ball needs radius > 0, d in {{1,2}}");
        Domain { dim, shape: Shape::Ball { radius }, center: [0.0; 2] }
    }

    /// A union of interior-disjoint convex pieces (a single piece for a convex polytope).
    pub fn polytope(pieces: Vec<ConvexPiece>) -> Result<Self> {
        let dim = match pieces.first() {
            Some(p) => p.dim(),
            None => return Err(Error::Malformed("empty polytope".into())),
        };
        if pieces.iter().any(|p| p.dim() != dim) {
            return Err(Error::Malformed("mixed-dimension polytope".into()));
        }
        Ok(Domain { dim, shape: Shape::Pieces(pieces), center: [0.0; 2] })
    }

    /// The support of a placed tile, as a domain.
    pub fn from_support(t: &TileSupport<'_>) -> Self {
        Domain::polytope(t.placed_pieces()).expect("tile supports are nonempty")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> DomainKind {
        match self.shape {
            Shape::Cube { .. } => DomainKind::Cube,
            Shape::Ball { .. } => DomainKind::Ball,
            Shape::Pieces(_) => DomainKind::Polytope,
        }
    }

    pub fn center(&self) -> Point {
        self.center
    }

    /// Cube side or ball radius; `None` for polytopes.
    pub fn size(&self) -> Option<f64> {
        match self.shape {
            Shape::Cube { side } => Some(side),
            Shape::Ball { radius } => Some(radius),
            Shape::Pieces(_) => None,
        }
    }

    pub fn translated(&self, y: Point) -> Self {
        let mut d = self.clone();
        d.center = add(d.center, y);
        d
    }

    pub fn with_center(&self, c: Point) -> Self {
        let mut d = self.clone();
        d.center = c;
        d
    }

    /// `R * Omega`: every size parameter and the center scaled by `r`.
    pub fn dilate(&self, r: f64) -> Self {
        assert!(r > 0.0, "dilation factor must be positive");
        let shape = match &self.shape {
            Shape::Cube { side } => Shape::Cube { side: side * r },
            Shape::Ball { radius } => Shape::Ball { radius: radius * r },
            Shape::Pieces(p) => Shape::Pieces(p.iter().map(|x| x.placed(r, [0.0; 2])).collect()),
        };
        Domain { dim: self.dim, shape, center: scale(self.center, r) }
    }

    pub fn volume(&self) -> f64 {
        match (&self.shape, self.dim) {
            (Shape::Cube { side }, d) => side.powi(d as i32),
            (Shape::Ball { radius }, 1) => 2.0 * radius,
            (Shape::Ball { radius }, _) => PI * radius * radius,
            (Shape::Pieces(p), _) => p.iter().map(ConvexPiece::measure).sum(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match (&self.shape, self.dim) {
            (Shape::Cube { side }, d) => side * (d as f64).sqrt(),
            (Shape::Ball { radius }, _) => 2.0 * radius,
            (Shape::Pieces(p), _) => {
                let v: Vec<Point> = p.iter().flat_map(|x| x.vertices()).collect();
                let mut m = 0.0f64;
                for a in &v {
                    for b in &v {
                        m = m.max(norm(sub(*a, *b)));
                    }
                }
                m
            }
        }
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let c = self.center;
        let (lo, hi) = match &self.shape {
            Shape::Cube { side } => ([-side / 2.0; 2], [side / 2.0; 2]),
            Shape::Ball { radius } => ([-radius; 2], [*radius; 2]),
            Shape::Pieces(p) => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in p.iter().flat_map(|x| x.vertices()) {
                    for a in 0..2 {
                        lo[a] = lo[a].min(v[a]);
                        hi[a] = hi[a].max(v[a]);
                    }
                }
                (lo, hi)
            }
        };
        let (mut lo, mut hi) = (add(lo, c), add(hi, c));
        if self.dim == 1 {
            lo[1] = 0.0;
            hi[1] = 0.0;
        }
        (lo, hi)
    }

    /// The pieces of a cube or polytope domain in absolute coordinates.
    fn absolute_pieces(&self) -> Vec<ConvexPiece> {
        match &self.shape {
            Shape::Cube { side } => {
                let h = side / 2.0;
                let c = self.center;
                if self.dim == 1 {
                    vec![ConvexPiece::Segment(c[0] - h, c[0] + h)]
                } else {
                    vec![ConvexPiece::Polygon(vec![
                        [c[0] - h, c[1] - h],
                        [c[0] + h, c[1] - h],
                        [c[0] + h, c[1] + h],
                        [c[0] - h, c[1] + h],
                    ])]
                }
            }
            Shape::Ball { radius } if self.dim == 1 => {
                vec![ConvexPiece::Segment(self.center[0] - radius, self.center[0] + radius)]
            }
            Shape::Ball { .. } => Vec::new(),
            Shape::Pieces(p) => p.iter().map(|x| x.placed(1.0, self.center)).collect(),
        }
    }
}

/// Inside / Outside / Crossing classification of a tile support against a domain.
///
/// A tile protruding from the domain by at most `tile.tol` counts as Inside, a
/// tile overlapping it by at most `tile.tol` counts as Outside.
pub fn classify(dom: &Domain, tile: &TileSupport<'_>) -> TileClass {
    let tol = tile.tol;
    let mut all_in = true;
    let mut all_out = true;
    for piece in tile.pieces {
        let class = match dom.shape {
            Shape::Cube { side } => {
                classify_piece_box(piece, tile.scale, tile.offset, dom.center, side / 2.0, dom.dim, tol)
            }
            _ => classify_piece(dom, piece, tile.scale, tile.offset, tol),
        };
        match class {
            TileClass::Inside => all_out = false,
            TileClass::Outside => all_in = false,
            TileClass::Crossing => return TileClass::Crossing,
        }
    }
    match (all_in, all_out) {
        (true, _) => TileClass::Inside,
        (_, true) => TileClass::Outside,
        _ => TileClass::Crossing,
    }
}

/// Allocation-free classification of one piece against an axis-aligned cube.
fn classify_piece_box(
    piece: &ConvexPiece,
    s: f64,
    o: Point,
    c: Point,
    h: f64,
    dim: usize,
    tol: f64,
) -> TileClass {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for_each_vertex(piece, s, o, |v| {
        for a in 0..2 {
            lo[a] = lo[a].min(v[a]);
            hi[a] = hi[a].max(v[a]);
        }
    });
    if (0..dim).all(|a| lo[a] >= c[a] - h - tol && hi[a] <= c[a] + h + tol) {
        return TileClass::Inside;
    }
    if (0..dim).any(|a| hi[a] <= c[a] - h + tol || lo[a] >= c[a] + h - tol) {
        return TileClass::Outside;
    }
    let ConvexPiece::Polygon(v) = piece else { return TileClass::Crossing };
    let corners = [
        [c[0] - h, c[1] - h],
        [c[0] + h, c[1] - h],
        [c[0] + h, c[1] + h],
        [c[0] - h, c[1] + h],
    ];
    let n = v.len();
    for i in 0..n {
        let a = [v[i][0] * s + o[0], v[i][1] * s + o[1]];
        let j = (i + 1) % n;
        let b = [v[j][0] * s + o[0], v[j][1] * s + o[1]];
        let e = sub(b, a);
        let len = norm(e);
        if corners.iter().all(|x| cross(e, sub(*x, a)) <= tol * len) {
            return TileClass::Outside;
        }
    }
    TileClass::Crossing
}

fn classify_piece(dom: &Domain, piece: &ConvexPiece, s: f64, o: Point, tol: f64) -> TileClass {
    match piece {
        ConvexPiece::Segment(lo, hi) => {
            let (a, b) = (lo * s + o[0], hi * s + o[0]);
            let mut any_overlap = false;
            for dp in dom.absolute_pieces() {
                if let ConvexPiece::Segment(c, e) = dp {
                    if a >= c - tol && b <= e + tol {
                        return TileClass::Inside;
                    }
                    if !(b <= c + tol || a >= e - tol) {
                        any_overlap = true;
                    }
                }
            }
            if any_overlap {
                TileClass::Crossing
            } else {
                TileClass::Outside
            }
        }
        ConvexPiece::Polygon(v) => {
            let pv: Vec<Point> = v.iter().map(|p| [p[0] * s + o[0], p[1] * s + o[1]]).collect();
            if let Shape::Ball { radius } = dom.shape {
                let c = dom.center;
                if pv.iter().all(|p| norm(sub(*p, c)) <= radius + tol) {
                    return TileClass::Inside;
                }
                if point_polygon_distance(c, &pv) >= radius - tol {
                    return TileClass::Outside;
                }
                return TileClass::Crossing;
            }
            let mut any_overlap = false;
            for dp in dom.absolute_pieces() {
                let ConvexPiece::Polygon(dv) = dp else { continue };
                if polygon_inside(&pv, &dv, tol) {
                    return TileClass::Inside;
                }
                if !separated(&pv, &dv, tol) {
                    any_overlap = true;
                }
            }
            if any_overlap {
                TileClass::Crossing
            } else {
                TileClass::Outside
            }
        }
    }
}

/// Every vertex of `p` lies within `tol` of the convex polygon `d`.
fn polygon_inside(p: &[Point], d: &[Point], tol: f64) -> bool {
    let n = d.len();
    (0..n).all(|i| {
        let (a, b) = (d[i], d[(i + 1) % n]);
        let e = sub(b, a);
        let len = norm(e);
        p.iter().all(|q| cross(e, sub(*q, a)) >= -tol * len)
    })
}

/// Separating-axis test on the edge normals of both convex polygons; overlaps
/// of depth at most `tol` count as separated.
fn separated(p: &[Point], q: &[Point], tol: f64) -> bool {
    fn one_way(p: &[Point], q: &[Point], tol: f64) -> bool {
        let n = p.len();
        (0..n).any(|i| {
            let (a, b) = (p[i], p[(i + 1) % n]);
            let e = sub(b, a);
            let len = norm(e);
            // q entirely on the outer side of edge a->b of p
            q.iter().all(|x| cross(e, sub(*x, a)) <= tol * len)
        })
    }
    one_way(p, q, tol) || one_way(q, p, tol)
}

fn point_polygon_distance(c: Point, p: &[Point]) -> f64 {
    let n = p.len();
    let mut inside = true;
    let mut best = f64::INFINITY;
    for i in 0..n {
        let (a, b) = (p[i], p[(i + 1) % n]);
        let e = sub(b, a);
        if cross(e, sub(c, a)) < 0.0 {
            inside = false;
        }
        let t = (dot(sub(c, a), e) / dot(e, e)).clamp(0.0, 1.0);
        best = best.min(norm(sub(c, add(a, scale(e, t)))));
    }
    if inside {
        0.0
    } else {
        best
    }
}

/// Exact measure of `support ∩ domain`.
pub fn clip_volume(dom: &Domain, tile: &TileSupport<'_>) -> f64 {
    let mut total = 0.0;
    for piece in tile.pieces {
        match piece.placed(tile.scale, tile.offset) {
            ConvexPiece::Segment(a, b) => {
                for dp in dom.absolute_pieces() {
                    if let ConvexPiece::Segment(c, e) = dp {
                        total += (b.min(e) - a.max(c)).max(0.0);
                    }
                }
            }
            ConvexPiece::Polygon(pv) => {
                if let Shape::Ball { radius } = dom.shape {
                    total += polygon_disk_area(&pv, dom.center, radius);
                    continue;
                }
                for dp in dom.absolute_pieces() {
                    if let ConvexPiece::Polygon(dv) = dp {
                        total += polygon_area(&clip_convex(&pv, &dv));
                    }
                }
            }
        }
    }
    total
}

/// Area of a convex polygon intersected with a disk.
fn polygon_disk_area(p: &[Point], c: Point, r: f64) -> f64 {
    let n = p.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += triangle_disk_area(sub(p[i], c), sub(p[(i + 1) % n], c), r);
    }
    acc.abs()
}

/// Signed area of triangle (0, a, b) intersected with the disk of radius r at 0.
fn triangle_disk_area(a: Point, b: Point, r: f64) -> f64 {
    let angle = |u: Point, v: Point| cross(u, v).atan2(dot(u, v));
    let r2 = r * r;
    if dot(a, a) <= r2 && dot(b, b) <= r2 {
        return cross(a, b) / 2.0;
    }
    let d = sub(b, a);
    let qa = dot(d, d);
    if qa == 0.0 {
        return 0.0;
    }
    let qb = dot(a, d);
    let qc = dot(a, a) - r2;
    let disc = qb * qb - qa * qc;
    if disc <= 0.0 {
        return r2 * angle(a, b) / 2.0;
    }
    let s = disc.sqrt();
    let t1 = (-qb - s) / qa;
    let t2 = (-qb + s) / qa;
    if t2 <= 0.0 || t1 >= 1.0 {
        return r2 * angle(a, b) / 2.0;
    }
    let p1 = add(a, scale(d, t1.max(0.0)));
    let p2 = add(a, scale(d, t2.min(1.0)));
    r2 * angle(a, p1) / 2.0 + cross(p1, p2) / 2.0 + r2 * angle(p2, b) / 2.0
}

/// Measure of the closed `t`-neighbourhood of the domain boundary.
///
/// Closed form for cubes and balls; a Monte-Carlo estimate (fixed seed,
/// 2·10^5 points) for polytopes, where seams between pieces count as boundary.
pub fn tube_volume(dom: &Domain, t: f64) -> f64 {
    assert!(t > 0.0, "tube radius must be positive");
    let d = dom.dim as i32;
    match dom.shape {
        Shape::Cube { side } => (side + 2.0 * t).powi(d) - (side - 2.0 * t).max(0.0).powi(d),
        Shape::Ball { radius } if d == 1 => {
            (2.0 * radius + 2.0 * t) - (2.0 * radius - 2.0 * t).max(0.0)
        }
        Shape::Ball { radius } => PI * ((radius + t).powi(2) - (radius - t).max(0.0).powi(2)),
        Shape::Pieces(_) => tube_volume_estimate(dom, t, 200_000, 0x7ab3).0,
    }
}

/// Monte-Carlo estimate of the tube volume and its standard error.
pub fn tube_volume_estimate(dom: &Domain, t: f64, samples: usize, seed: u64) -> (f64, f64) {
    let pieces = dom.absolute_pieces();
    let (mut lo, mut hi) = dom.bounding_box();
    for a in 0..dom.dim {
        lo[a] -= t;
        hi[a] += t;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        let mut x = [0.0; 2];
        for a in 0..dom.dim {
            x[a] = rng.random_range(lo[a]..hi[a]);
        }
        let near = match dom.shape {
            Shape::Ball { radius } if dom.dim == 2 => (norm(sub(x, dom.center)) - radius).abs() <= t,
            _ => pieces.iter().any(|p| boundary_distance(p, x) <= t),
        };
        hits += usize::from(near);
    }
    let box_vol: f64 = (0..dom.dim).map(|a| hi[a] - lo[a]).product();
    let frac = hits as f64 / samples as f64;
    (box_vol * frac, box_vol * (frac * (1.0 - frac) / samples as f64).sqrt())
}

fn boundary_distance(p: &ConvexPiece, x: Point) -> f64 {
    match p {
        ConvexPiece::Segment(lo, hi) => (x[0] - lo).abs().min((x[0] - hi).abs()),
        ConvexPiece::Polygon(v) => {
            let n = v.len();
            (0..n)
                .map(|i| {
                    let (a, b) = (v[i], v[(i + 1) % n]);
                    let e = sub(b, a);
                    let t = (dot(sub(x, a), e) / dot(e, e)).clamp(0.0, 1.0);
                    norm(sub(x, add(a, scale(e, t))))
                })
                .fold(f64::INFINITY, f64::min)
        }
    }
}

/// Center and radius of the largest disk inside a convex polygon.
///
/// The optimum of the Chebyshev-center LP is attained where three edge
/// constraints are tight, so all edge triples are enumerated.
fn chebyshev_center(v: &[Point]) -> (f64, Point) {
    let n = v.len();
    let planes: Vec<(Point, f64)> = (0..n)
        .filter_map(|i| {
            let e = sub(v[(i + 1) % n], v[i]);
            let l = norm(e);
            (l > 0.0).then(|| {
                let nrm = [e[1] / l, -e[0] / l]; // outward for CCW
                (nrm, dot(nrm, v[i]))
            })
        })
        .collect();
    let mut best = (0.0, v[0]);
    for i in 0..planes.len() {
        for j in i + 1..planes.len() {
            for k in j + 1..planes.len() {
                let rows = [planes[i], planes[j], planes[k]];
                // n·x + r = b
                let m = nalgebra::Matrix3::new(
                    rows[0].0[0], rows[0].0[1], 1.0,
                    rows[1].0[0], rows[1].0[1], 1.0,
                    rows[2].0[0], rows[2].0[1], 1.0,
                );
                let rhs = nalgebra::Vector3::new(rows[0].1, rows[1].1, rows[2].1);
                let Some(sol) = m.lu().solve(&rhs) else { continue };
                let (x, r) = ([sol[0], sol[1]], sol[2]);
                if r <= best.0 {
                    continue;
                }
                let feasible = planes.iter().all(|(nrm, b)| dot(*nrm, x) + r <= b + 1e-9 * (1.0 + b.abs()));
                if feasible {
                    best = (r, x);
                }
            }
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Polygon kernels, generic so validation can run them over exact rationals.

pub trait Scalar: Clone + PartialOrd + Num {}
impl<T: Clone + PartialOrd + Num> Scalar for T {}

pub fn polygon_area<T: Scalar>(p: &[[T; 2]]) -> T {
    let n = p.len();
    if n < 3 {
        return T::zero();
    }
    // Fan from the first vertex keeps float error relative to the polygon size.
    let o = &p[0];
    let mut acc = T::zero();
    for i in 1..n - 1 {
        let (ax, ay) = (p[i][0].clone() - o[0].clone(), p[i][1].clone() - o[1].clone());
        let (bx, by) = (p[i + 1][0].clone() - o[0].clone(), p[i + 1][1].clone() - o[1].clone());
        acc = acc + (ax * by - ay * bx);
    }
    let two = T::one() + T::one();
    let a = acc / two;
    if a < T::zero() {
        T::zero() - a
    } else {
        a
    }
}

/// Sutherland–Hodgman clip of `subject` to the counter-clockwise convex polygon `clip`.
pub fn clip_convex<T: Scalar>(subject: &[[T; 2]], clip: &[[T; 2]]) -> Vec<[T; 2]> {
    let mut out: Vec<[T; 2]> = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if out.len() < 3 {
            return Vec::new();
        }
        let (a, b) = (clip[i].clone(), clip[(i + 1) % n].clone());
        let side = |p: &[T; 2]| {
            (b[0].clone() - a[0].clone()) * (p[1].clone() - a[1].clone())
                - (b[1].clone() - a[1].clone()) * (p[0].clone() - a[0].clone())
        };
        let input = std::mem::take(&mut out);
        let m = input.len();
        for k in 0..m {
            let s = &input[k];
            let e = &input[(k + 1) % m];
            let (sc, ec) = (side(s), side(e));
            let s_in = sc >= T::zero();
            let e_in = ec >= T::zero();
            if s_in != e_in {
                let t = sc.clone() / (sc - ec);
                out.push([
                    s[0].clone() + (e[0].clone() - s[0].clone()) * t.clone(),
                    s[1].clone() + (e[1].clone() - s[1].clone()) * t,
                ]);
            }
            if e_in {
                out.push(e.clone());
            }
        }
    }
    if out.len() < 3 {
        Vec::new()
    } else {
        out
    }
}

pub(crate) fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += cross(v[i], v[(i + 1) % n]);
    }
    acc / 2.0
}

#[inline]
pub(crate) fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}
#[inline]
pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}
#[inline]
pub(crate) fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s]
}
#[inline]
fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}
#[inline]
fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}
#[inline]
pub(crate) fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

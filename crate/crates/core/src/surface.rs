//! Closed flat surfaces as Euclidean polygons with edges glued by translation.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Piece, Vec2};
use crate::EPS_CONE;

/// Name of the three-square L-shaped genus-2 builder.
pub const GENUS2_L: &str = "genus2-L";
/// Name of the unit-square torus builder.
pub const TORUS: &str = "torus";

/// Boundary snapping tolerance used by [`FlatSurface::normalize`].
const BOUNDARY_TOL: f64 = 1e-10;
/// Relative tolerance for edge pairing checks.
const PAIRING_TOL: f64 = 1e-12;
/// Upper bound on chart crossings of a single unrolled segment.
const MAX_UNROLL_STEPS: usize = 10_000_000;

/// Serialized form of a surface: the polygon, its gluing and the base point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SurfaceSpec {
    #[serde(default)]
    pub name: String,
    /// Vertices in counterclockwise order. Edge `k` runs from vertex `k` to
    /// vertex `k + 1`.
    pub polygon: Vec<Vec2>,
    /// Pairs of edge indices glued by translation, orientation reversing.
    pub identifications: Vec<[usize; 2]>,
    pub base_point: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConePoint {
    /// Canonical chart position of the vertex class.
    pub position: Vec2,
    /// Total angle around the point, in radians.
    pub angle: f64,
}

#[derive(Debug, Clone)]
struct Edge {
    a: Vec2,
    b: Vec2,
    /// Unit outward normal.
    normal: Vec2,
    partner: usize,
    /// Translation carrying this edge onto its partner.
    shift: Vec2,
    canonical: bool,
}

/// A closed translation surface.
///
/// Immutable after construction; share freely between threads.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "SurfaceSpec", into = "SurfaceSpec")]
pub struct FlatSurface {
    spec: SurfaceSpec,
    edges: Vec<Edge>,
    /// Vertex index -> vertex class index.
    vertex_class: Vec<usize>,
    /// Canonical representative of each vertex class.
    class_rep: Vec<Vec2>,
    class_angle: Vec<f64>,
    cone_points: Vec<ConePoint>,
    /// Polygon vertices belonging to cone classes.
    cone_vertices: Vec<Vec2>,
    area: f64,
    genus: usize,
    euler_characteristic: i64,
    bbox_min: Vec2,
    bbox_max: Vec2,
}

impl TryFrom<SurfaceSpec> for FlatSurface {
    type Error = Error;

    fn try_from(spec: SurfaceSpec) -> Result<Self> {
        FlatSurface::new(spec)
    }
}

impl From<FlatSurface> for SurfaceSpec {
    fn from(s: FlatSurface) -> Self {
        s.spec
    }
}

impl PartialEq for FlatSurface {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

/// A point of the surface, stored as its canonical chart representative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub coords: Vec2,
}

impl SurfacePoint {
    pub fn x(&self) -> f64 {
        self.coords.x
    }

    pub fn y(&self) -> f64 {
        self.coords.y
    }
}

/// A straight path on the surface, cut into one piece per chart crossing.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: SurfacePoint,
    pub end: SurfacePoint,
    pub pieces: Vec<Piece>,
}

impl Segment {
    pub fn length(&self) -> f64 {
        self.pieces.iter().map(Piece::length).sum()
    }
}

impl FlatSurface {
    /// Validates a polygon-with-gluing description and derives area, genus
    /// and cone points.
    pub fn new(spec: SurfaceSpec) -> Result<Self> {
        let n = spec.polygon.len();
        if n < 3 {
            return Err(Error::InvalidSurface("polygon needs at least 3 vertices".into()));
        }
        if spec.polygon.iter().any(|v| !v.is_finite()) || !spec.base_point.is_finite() {
            return Err(Error::InvalidSurface("non-finite coordinate".into()));
        }
        let signed_area = (0..n)
            .map(|k| spec.polygon[k].cross(spec.polygon[(k + 1) % n]))
            .sum::<f64>()
            / 2.0;
        if signed_area <= 0.0 {
            return Err(Error::InvalidSurface(
                "polygon must be listed counterclockwise with positive area".into(),
            ));
        }

        let mut partner = vec![usize::MAX; n];
        for (k, &[i, j]) in spec.identifications.iter().enumerate() {
            if i >= n || j >= n || i == j {
                return Err(Error::InvalidSurface(format!(
                    "identifications[{k}] = [{i}, {j}] does not name two distinct edges"
                )));
            }
            if partner[i] != usize::MAX || partner[j] != usize::MAX {
                return Err(Error::InvalidSurface(format!(
                    "identifications[{k}]: an edge appears in more than one pair"
                )));
            }
            partner[i] = j;
            partner[j] = i;
        }
        if let Some(e) = partner.iter().position(|&p| p == usize::MAX) {
            return Err(Error::InvalidSurface(format!("edge {e} is not identified")));
        }

        let vtx = |k: usize| spec.polygon[k % n];
        let mut edges = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b) = (vtx(i), vtx(i + 1));
            let j = partner[i];
            let (aj, bj) = (vtx(j), vtx(j + 1));
            let (ei, ej) = (b - a, bj - aj);
            let scale = ei.norm().max(1.0);
            if ei.norm() == 0.0 {
                return Err(Error::InvalidSurface(format!("edge {i} has zero length")));
            }
            if (ei + ej).norm() > PAIRING_TOL * scale {
                return Err(Error::InvalidSurface(format!(
                    "edges {i} and {j} are not parallel, equal-length and opposite"
                )));
            }
            let d = ei.normalized();
            edges.push(Edge {
                a,
                b,
                normal: Vec2::new(d.y, -d.x),
                partner: j,
                shift: aj - b,
                canonical: false,
            });
        }
        for i in 0..n {
            let j = edges[i].partner;
            let mi = (edges[i].a + edges[i].b) * 0.5;
            let mj = (edges[j].a + edges[j].b) * 0.5;
            edges[i].canonical = (mi.x, mi.y) < (mj.x, mj.y);
        }

        // Vertex classes: edge i = (v_i, v_{i+1}) is glued to edge j reversed,
        // so v_i ~ v_{j+1} and v_{i+1} ~ v_j.
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for i in 0..n {
            let j = partner[i];
            for (u, v) in [(i, (j + 1) % n), ((i + 1) % n, j)] {
                let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                if ru != rv {
                    parent[ru] = rv;
                }
            }
        }
        let mut roots: Vec<usize> = Vec::new();
        let mut vertex_class = vec![0; n];
        for k in 0..n {
            let r = find(&mut parent, k);
            let c = match roots.iter().position(|&x| x == r) {
                Some(c) => c,
                None => {
                    roots.push(r);
                    roots.len() - 1
                }
            };
            vertex_class[k] = c;
        }
        let classes = roots.len();
        let mut class_angle = vec![0.0; classes];
        let mut class_rep = vec![Vec2::new(f64::INFINITY, f64::INFINITY); classes];
        for k in 0..n {
            let prev = vtx(k + n - 1);
            let cur = vtx(k);
            let next = vtx(k + 1);
            let (ein, eout) = (cur - prev, next - cur);
            let turn = ein.cross(eout).atan2(ein.dot(eout));
            let c = vertex_class[k];
            class_angle[c] += PI - turn;
            if (cur.x, cur.y) < (class_rep[c].x, class_rep[c].y) {
                class_rep[c] = cur;
            }
        }

        let euler = classes as i64 - (n / 2) as i64 + 1;
        if euler > 2 || (2 - euler) % 2 != 0 {
            return Err(Error::InvalidSurface(format!(
                "identification quotient has Euler characteristic {euler}"
            )));
        }
        let genus = ((2 - euler) / 2) as usize;
        let excess: f64 = class_angle.iter().map(|a| a - 2.0 * PI).sum();
        let expected_excess = 2.0 * PI * (2.0 * genus as f64 - 2.0);
        if (excess - expected_excess).abs() > 1e-9 {
            return Err(Error::InvalidSurface(format!(
                "total cone excess {excess} does not match genus {genus}"
            )));
        }

        let cone_points: Vec<ConePoint> = (0..classes)
            .filter(|&c| (class_angle[c] - 2.0 * PI).abs() > 1e-9)
            .map(|c| ConePoint { position: class_rep[c], angle: class_angle[c] })
            .collect();
        let cone_vertices = (0..n)
            .filter(|&k| (class_angle[vertex_class[k]] - 2.0 * PI).abs() > 1e-9)
            .map(vtx)
            .collect();

        // Base point must be in the open kernel: strictly inside every edge's
        // half-plane.
        for (i, e) in edges.iter().enumerate() {
            if (spec.base_point - e.a).dot(e.normal) >= -BOUNDARY_TOL {
                return Err(Error::InvalidSurface(format!(
                    "base point does not see the whole polygon (edge {i})"
                )));
            }
        }

        let mut bbox_min = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut bbox_max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &spec.polygon {
            bbox_min = Vec2::new(bbox_min.x.min(v.x), bbox_min.y.min(v.y));
            bbox_max = Vec2::new(bbox_max.x.max(v.x), bbox_max.y.max(v.y));
        }

        Ok(FlatSurface {
            spec,
            edges,
            vertex_class,
            class_rep,
            class_angle,
            cone_points,
            cone_vertices,
            area: signed_area,
            genus,
            euler_characteristic: euler,
            bbox_min,
            bbox_max,
        })
    }

    /// Three unit squares at (0,0), (1,0) and (0,1), opposite sides glued.
    pub fn genus2_l() -> Self {
        let polygon = [
            (0.0, 0.0),
            (1.0, 0.0),
            (2.0, 0.0),
            (2.0, 1.0),
            (1.0, 1.0),
            (1.0, 2.0),
            (0.0, 2.0),
            (0.0, 1.0),
        ]
        .map(|(x, y)| Vec2::new(x, y))
        .to_vec();
        // Edges: 0 bottom-left, 1 bottom-right, 2 right, 3 top of the right
        // square, 4 right of the top square, 5 top, 6 upper left, 7 lower left.
        let spec = SurfaceSpec {
            name: GENUS2_L.into(),
            polygon,
            identifications: vec![[0, 5], [1, 3], [2, 7], [4, 6]],
            base_point: Vec2::new(0.5, 0.5),
        };
        FlatSurface::new(spec).expect("L-shaped surface is valid")
    }

    /// Unit square with opposite sides glued.
    pub fn torus() -> Self {
        let polygon = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
            .map(|(x, y)| Vec2::new(x, y))
            .to_vec();
        let spec = SurfaceSpec {
            name: TORUS.into(),
            polygon,
            identifications: vec![[0, 2], [1, 3]],
            base_point: Vec2::new(0.5, 0.5),
        };
        FlatSurface::new(spec).expect("square torus is valid")
    }

    /// Looks up a shipped builder by name.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            GENUS2_L => Ok(Self::genus2_l()),
            TORUS => Ok(Self::torus()),
            other => Err(Error::UnsupportedSurface(other.into())),
        }
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn spec(&self) -> &SurfaceSpec {
        &self.spec
    }

    pub fn polygon(&self) -> &[Vec2] {
        &self.spec.polygon
    }

    pub fn identifications(&self) -> &[[usize; 2]] {
        &self.spec.identifications
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.euler_characteristic
    }

    pub fn cone_points(&self) -> &[ConePoint] {
        &self.cone_points
    }

    /// Number of vertex classes of the quotient.
    pub fn vertex_class_count(&self) -> usize {
        self.class_rep.len()
    }

    /// Total angle of each vertex class.
    pub fn vertex_class_angles(&self) -> &[f64] {
        &self.class_angle
    }

    pub fn base_point(&self) -> SurfacePoint {
        SurfacePoint { coords: self.spec.base_point }
    }

    /// Axis-aligned bounding box of the polygon as `(min, max)`.
    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        (self.bbox_min, self.bbox_max)
    }

    /// Distance from `p` to the polygon boundary, and whether `p` lies in the
    /// closed polygon (up to `tol`).
    fn locate(&self, p: Vec2, tol: f64) -> bool {
        let mut inside = false;
        for e in &self.edges {
            if dist_to_piece(p, e.a, e.b) <= tol {
                return true;
            }
            let (a, b) = (e.a, e.b);
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Whether `p` lies in the closed polygon.
    pub fn contains(&self, p: Vec2) -> bool {
        self.locate(p, BOUNDARY_TOL)
    }

    /// Whether `p` lies in the open polygon, away from the boundary.
    pub fn contains_interior(&self, p: Vec2) -> bool {
        self.locate(p, 0.0) && self.edges.iter().all(|e| dist_to_piece(p, e.a, e.b) > BOUNDARY_TOL)
    }

    /// Canonical representative of a planar point lying in the polygon or in
    /// one of the translates adjacent across an edge.
    pub fn normalize(&self, raw: Vec2) -> Result<SurfacePoint> {
        if !raw.is_finite() {
            return Err(Error::PointOutsideAtlas { x: raw.x, y: raw.y });
        }
        if self.contains(raw) {
            return Ok(SurfacePoint { coords: self.canonical_boundary(raw) });
        }
        for e in &self.edges {
            let p = raw + e.shift;
            if self.contains(p) {
                return Ok(SurfacePoint { coords: self.canonical_boundary(p) });
            }
        }
        Err(Error::PointOutsideAtlas { x: raw.x, y: raw.y })
    }

    fn canonical_boundary(&self, p: Vec2) -> Vec2 {
        for (k, v) in self.spec.polygon.iter().enumerate() {
            if p.dist(*v) <= BOUNDARY_TOL {
                return self.class_rep[self.vertex_class[k]];
            }
        }
        for e in &self.edges {
            if dist_to_piece(p, e.a, e.b) <= BOUNDARY_TOL {
                if e.canonical {
                    return p;
                }
                // Project onto the edge before translating so the image sits
                // exactly on the partner edge.
                let d = e.b - e.a;
                let lambda = ((p - e.a).dot(d) / d.dot(d)).clamp(0.0, 1.0);
                return e.a + d * lambda + e.shift;
            }
        }
        p
    }

    /// Whether `p` is within `EPS_CONE` of a cone point.
    /// `p` lies strictly inside every edge's half-plane, so it sees the
    /// whole polygon along straight segments.
    pub fn in_kernel(&self, p: Vec2) -> bool {
        self.edges.iter().all(|e| (p - e.a).dot(e.normal) < -BOUNDARY_TOL)
    }

    pub fn near_cone_point(&self, p: Vec2) -> bool {
        self.cone_vertices.iter().any(|v| v.dist(p) < EPS_CONE)
    }

    /// Straight-line continuation of length `length` from `start` in
    /// `direction`, crossing identified edges as needed.
    pub fn unroll_segment(&self, start: SurfacePoint, direction: Vec2, length: f64) -> Result<Segment> {
        let mut pieces = Vec::new();
        let end = self.unroll_into(start.coords, direction, length, &mut pieces)?;
        Ok(Segment { start, end: self.normalize(end)?, pieces })
    }

    /// Appends the chart pieces of a straight continuation to `out` and
    /// returns the (unnormalized) chart endpoint.
    pub(crate) fn unroll_into(
        &self,
        start: Vec2,
        direction: Vec2,
        length: f64,
        out: &mut Vec<Piece>,
    ) -> Result<Vec2> {
        if !(length >= 0.0) || !length.is_finite() {
            return Err(Error::InvalidArgument(format!("segment length {length} must be finite and >= 0")));
        }
        if length == 0.0 {
            return Ok(start);
        }
        let dn = direction.norm();
        if dn == 0.0 || !dn.is_finite() {
            return Err(Error::InvalidArgument("direction must be a nonzero vector".into()));
        }
        let d = direction * (1.0 / dn);
        let mut p = start;
        let mut remaining = length;
        for _ in 0..MAX_UNROLL_STEPS {
            let mut best_t = f64::INFINITY;
            let mut best_edge = usize::MAX;
            for (i, e) in self.edges.iter().enumerate() {
                let rate = d.dot(e.normal);
                if rate <= 1e-15 {
                    continue;
                }
                // Edges whose line lies behind `p` cannot be exits; this
                // matters at reflex vertices of non-convex polygons.
                let ahead = (e.a - p).dot(e.normal);
                if ahead < -BOUNDARY_TOL {
                    continue;
                }
                let t = (ahead / rate).max(0.0);
                if t >= best_t {
                    continue;
                }
                let q = p + d * t;
                let ed = e.b - e.a;
                let lambda = (q - e.a).dot(ed) / ed.dot(ed);
                let slack = BOUNDARY_TOL / ed.norm();
                if lambda < -slack || lambda > 1.0 + slack {
                    continue;
                }
                best_t = t;
                best_edge = i;
            }
            if best_edge == usize::MAX {
                return Err(Error::InvalidArgument(format!(
                    "no exit edge from ({}, {}); start point is outside the polygon",
                    p.x, p.y
                )));
            }
            if best_t >= remaining - 1e-14 {
                let q = p + d * remaining;
                self.check_cone_clearance(p, q)?;
                out.push(Piece::new(p, q));
                return Ok(q);
            }
            let q = p + d * best_t;
            if best_t > 0.0 {
                self.check_cone_clearance(p, q)?;
                out.push(Piece::new(p, q));
            }
            p = q + self.edges[best_edge].shift;
            remaining -= best_t;
        }
        Err(Error::InvalidArgument("segment crosses too many chart edges".into()))
    }

    fn check_cone_clearance(&self, a: Vec2, b: Vec2) -> Result<()> {
        for v in &self.cone_vertices {
            if dist_to_piece(*v, a, b) < EPS_CONE {
                return Err(Error::ConePointHit { x: v.x, y: v.y });
            }
        }
        Ok(())
    }

    /// Draws one point uniformly with respect to area, away from cone points.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> SurfacePoint {
        let span = self.bbox_max - self.bbox_min;
        loop {
            let p = Vec2::new(
                self.bbox_min.x + span.x * rng.random::<f64>(),
                self.bbox_min.y + span.y * rng.random::<f64>(),
            );
            if self.contains_interior(p) && !self.near_cone_point(p) {
                return SurfacePoint { coords: p };
            }
        }
    }

    /// `count` i.i.d. area-uniform points, reproducible from `seed`.
    pub fn sample_area(&self, count: usize, seed: u64) -> Vec<SurfacePoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| self.sample_point(&mut rng)).collect()
    }
}

/// Euclidean distance from `p` to the closed piece `[a, b]`.
pub(crate) fn dist_to_piece(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let d = b - a;
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let lambda = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
    p.dist(a + d * lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    #[test]
    fn l_surface_invariants() {
        let s = FlatSurface::genus2_l();
        assert_eq!(s.area(), 3.0);
        // Counting the identified complex by hand: one vertex class, four
        // edge pairs, one face.
        assert_eq!(s.vertex_class_count(), 1);
        assert_eq!(s.euler_characteristic(), -2);
        assert_eq!(s.genus(), 2);
        assert_eq!(s.cone_points().len(), 1);
        // Interior corner angles: five right angles, two straight angles and
        // one reflex angle of 3π/2.
        let expected = 5.0 * PI / 2.0 + 2.0 * PI + 3.0 * PI / 2.0;
        assert!((expected - 6.0 * PI).abs() < 1e-15);
        assert!((s.cone_points()[0].angle - expected).abs() < 1e-12);
        assert_eq!(s.base_point().coords, pt(0.5, 0.5));
    }

    #[test]
    fn torus_invariants() {
        let s = FlatSurface::torus();
        assert_eq!(s.area(), 1.0);
        assert_eq!(s.genus(), 1);
        assert!(s.cone_points().is_empty());
    }

    #[test]
    fn normalize_examples() {
        let s = FlatSurface::genus2_l();
        assert_eq!(s.normalize(pt(0.3, 0.7)).unwrap().coords, pt(0.3, 0.7));
        let p = s.normalize(pt(2.2, 0.5)).unwrap().coords;
        assert!(p.dist(pt(0.2, 0.5)) < 1e-15);
        // Left edge midpoint (0, 0.5) precedes right edge midpoint (2, 0.5).
        assert_eq!(s.normalize(pt(2.0, 0.5)).unwrap().coords, pt(0.0, 0.5));
        assert_eq!(s.normalize(pt(0.0, 0.5)).unwrap().coords, pt(0.0, 0.5));
        // Top of the left column is glued to the bottom.
        assert_eq!(s.normalize(pt(0.25, 2.0)).unwrap().coords, pt(0.25, 0.0));
        // Every corner is the single cone point.
        assert_eq!(s.normalize(pt(1.0, 1.0)).unwrap().coords, pt(0.0, 0.0));
        // (1, 0.5) sits on the seam between two squares, inside the polygon.
        assert_eq!(s.normalize(pt(1.0, 0.5)).unwrap().coords, pt(1.0, 0.5));
    }

    #[test]
    fn normalize_rejects_far_points() {
        let s = FlatSurface::genus2_l();
        assert!(matches!(s.normalize(pt(5.0, 5.0)), Err(Error::PointOutsideAtlas { .. })));
        // The missing square is reachable across two different edges, so
        // either single-shift translate is acceptable.
        let p = s.normalize(pt(1.5, 1.5)).unwrap().coords;
        assert!(p == pt(0.5, 1.5) || p == pt(1.5, 0.5), "{p:?}");
    }

    #[test]
    fn unroll_ignores_edges_behind_reflex_corner() {
        // Re-entering along the top of the right square, the line x = 1 of
        // the top square's right edge is behind the point.
        let s = FlatSurface::genus2_l();
        let start = s.normalize(pt(1.3, 0.4)).unwrap();
        let d = pt(0.3, -0.8);
        let seg = s.unroll_segment(start, d, d.norm()).unwrap();
        assert_eq!(seg.pieces.len(), 2);
        assert!(seg.end.coords.dist(pt(1.6, 0.6)) < 1e-12, "{:?}", seg.end);
    }

    #[test]
    fn unroll_examples() {
        let s = FlatSurface::genus2_l();
        let start = s.base_point();
        let seg = s.unroll_segment(start, pt(1.0, 0.0), 0.25).unwrap();
        assert_eq!(seg.pieces.len(), 1);
        assert_eq!(seg.end.coords, pt(0.75, 0.5));

        let seg = s.unroll_segment(start, pt(1.0, 0.0), 2.0).unwrap();
        assert_eq!(seg.pieces.len(), 2);
        assert_eq!(seg.pieces[0].b, pt(2.0, 0.5));
        assert_eq!(seg.pieces[1].a, pt(0.0, 0.5));
        assert!(seg.end.coords.dist(start.coords) < 1e-12);
        assert!((seg.length() - 2.0).abs() < 1e-12);

        let seg = s.unroll_segment(start, pt(1.0, 0.0), 0.0).unwrap();
        assert!(seg.pieces.is_empty());
        assert_eq!(seg.end, seg.start);
    }

    #[test]
    fn unroll_through_cone_point_fails() {
        let s = FlatSurface::genus2_l();
        let start = s.normalize(pt(0.5, 1.0)).unwrap();
        let err = s.unroll_segment(start, pt(1.0, 0.0), 1.0).unwrap_err();
        assert!(matches!(err, Error::ConePointHit { .. }));
        let start = s.base_point();
        let err = s.unroll_segment(start, pt(1.0, 1.0), 1.0).unwrap_err();
        assert!(matches!(err, Error::ConePointHit { .. }));
    }

    #[test]
    fn torus_corner_passes() {
        // Torus corners are regular points; a diagonal through one continues.
        let s = FlatSurface::torus();
        let seg = s.unroll_segment(s.base_point(), pt(1.0, 1.0), 2.0f64.sqrt()).unwrap();
        assert!(seg.end.coords.dist(pt(0.5, 0.5)) < 1e-12);
    }

    #[test]
    fn vertical_unroll_wraps_columns() {
        let s = FlatSurface::genus2_l();
        let start = s.normalize(pt(1.5, 0.25)).unwrap();
        let seg = s.unroll_segment(start, pt(0.0, 1.0), 1.0).unwrap();
        assert!(seg.end.coords.dist(start.coords) < 1e-12);
        let start = s.normalize(pt(0.25, 1.75)).unwrap();
        let seg = s.unroll_segment(start, pt(0.0, 1.0), 0.5).unwrap();
        assert!(seg.end.coords.dist(pt(0.25, 0.25)) < 1e-12);
    }

    #[test]
    fn sampling_is_deterministic_and_inside() {
        let s = FlatSurface::torus();
        assert_eq!(s.sample_area(4, 7), s.sample_area(4, 7));
        let l = FlatSurface::genus2_l();
        for p in l.sample_area(1000, 3) {
            assert!(l.contains_interior(p.coords));
        }
    }

    #[test]
    fn rejects_bad_gluing() {
        let mut spec = FlatSurface::torus().spec().clone();
        spec.identifications = vec![[0, 1], [2, 3]];
        assert!(matches!(FlatSurface::new(spec), Err(Error::InvalidSurface(_))));
        let mut spec = FlatSurface::torus().spec().clone();
        spec.identifications = vec![[0, 2]];
        assert!(FlatSurface::new(spec).is_err());
        let mut spec = FlatSurface::genus2_l().spec().clone();
        spec.base_point = pt(1.5, 0.5);
        assert!(FlatSurface::new(spec).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = FlatSurface::genus2_l();
        let text = serde_json::to_string(&s).unwrap();
        let back: FlatSurface = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.genus(), 2);
    }
}

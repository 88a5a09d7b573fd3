//! Incremental planar convex hull with diameter tracking.
//!
//! The hull is a flat counterclockwise vertex array. Insertion finds the
//! chain of edges visible from the new point and splices it out, which is
//! linear in the vertex count; walk hulls stay small, so nothing fancier is
//! warranted. Each vertex remembers the step index at which it was inserted
//! (its *birth*), which the ladder analysis needs to identify `X_{k(i)}`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::HullError;
use crate::geom::{orient, Arc, Dir, Point2, EPS_GEOM};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullVertex {
    pub p: Point2,
    pub birth: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rank {
    Empty,
    Point,
    Segment,
    Full,
}

/// Where a point sits on the hull boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    /// Coincides with vertex `i`.
    Vertex(usize),
    /// Lies in the relative interior of edge `i → i+1`.
    Edge(usize),
    /// The hull has no interior (rank below `Full`).
    Degenerate,
}

/// Directions from a boundary point along its two incident boundary edges.
///
/// The open interior cone is the counterclockwise sweep from `dir_next`
/// to `dir_prev`; its opening is `angle`. A zero `angle` means the hull has
/// no interior and nothing is forbidden.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InteriorCone {
    pub dir_prev: Dir,
    pub dir_next: Dir,
    pub angle: f64,
}

impl InteriorCone {
    pub fn empty() -> Self {
        Self {
            dir_prev: Dir::new(0.0),
            dir_next: Dir::new(0.0),
            angle: 0.0,
        }
    }

    /// Closed complement of the open interior cone.
    pub fn allowed_arc(&self) -> Arc {
        if self.angle <= 0.0 {
            Arc::full_circle()
        } else {
            Arc::new(self.dir_prev, TAU - self.angle)
        }
    }

    /// True iff `d` points strictly into the interior. Directions along
    /// either boundary edge are not interior.
    #[inline]
    pub fn contains_open(&self, d: Dir) -> bool {
        if self.angle <= 0.0 {
            return false;
        }
        let off = self.dir_next.ccw_to(d);
        off > 0.0 && off < self.angle
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvexHull {
    verts: Vec<HullVertex>,
}

impl ConvexHull {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> Rank {
        match self.verts.len() {
            0 => Rank::Empty,
            1 => Rank::Point,
            2 => Rank::Segment,
            _ => Rank::Full,
        }
    }

    pub fn vertices(&self) -> &[HullVertex] {
        &self.verts
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    pub fn index_of_birth(&self, birth: usize) -> Option<usize> {
        self.verts.iter().position(|v| v.birth == birth)
    }

    #[inline]
    fn next(&self, i: usize) -> usize {
        if i + 1 == self.verts.len() {
            0
        } else {
            i + 1
        }
    }

    #[inline]
    fn prev(&self, i: usize) -> usize {
        if i == 0 {
            self.verts.len() - 1
        } else {
            i - 1
        }
    }

    /// Inserts `p` (born at step `birth`) and reports where it ends up.
    ///
    /// A point strictly inside a full-rank hull leaves the hull unchanged and
    /// returns [`HullError::InteriorInsertion`].
    pub fn insert(&mut self, p: Point2, birth: usize) -> Result<Location, HullError> {
        if !p.is_finite() {
            return Err(HullError::NonFinite);
        }
        let hv = HullVertex { p, birth };
        match self.rank() {
            Rank::Empty => {
                self.verts.push(hv);
                Ok(Location::Degenerate)
            }
            Rank::Point => {
                if self.verts[0].p.dist(p) > EPS_GEOM {
                    self.verts.push(hv);
                }
                Ok(Location::Degenerate)
            }
            Rank::Segment => {
                let (a, b) = (self.verts[0].p, self.verts[1].p);
                match orient(a, b, p) {
                    0 => {
                        let ab = b - a;
                        let t = (p - a).dot(ab) / ab.dot(ab);
                        if t < 0.0 && a.dist(p) > EPS_GEOM {
                            self.verts[0] = hv;
                        } else if t > 1.0 && b.dist(p) > EPS_GEOM {
                            self.verts[1] = hv;
                        }
                        Ok(Location::Degenerate)
                    }
                    s => {
                        let (va, vb) = (self.verts[0], self.verts[1]);
                        self.verts = if s > 0 {
                            vec![va, vb, hv]
                        } else {
                            vec![va, hv, vb]
                        };
                        let i = self.index_of_birth_point(hv);
                        Ok(Location::Vertex(i))
                    }
                }
            }
            Rank::Full => self.insert_full(hv),
        }
    }

    fn index_of_birth_point(&self, hv: HullVertex) -> usize {
        self.verts
            .iter()
            .position(|v| v.birth == hv.birth && v.p == hv.p)
            .expect("vertex just inserted")
    }

    fn insert_full(&mut self, hv: HullVertex) -> Result<Location, HullError> {
        let p = hv.p;
        let h = self.verts.len();
        let vis: Vec<bool> = (0..h)
            .map(|i| orient(self.verts[i].p, self.verts[self.next(i)].p, p) < 0)
            .collect();
        let n_vis = vis.iter().filter(|&&v| v).count();
        if n_vis == 0 {
            return self.locate_full(p).ok_or(HullError::InteriorInsertion { x: p.x, y: p.y });
        }

        let start = (0..h).find(|&i| vis[i] && !vis[self.prev(i)]);
        let Some(s) = start else {
            self.rebuild_with(hv);
            return Ok(self.location_after_rebuild(p));
        };
        let mut e = s;
        let mut chain = 1;
        while vis[self.next(e)] && chain < h {
            e = self.next(e);
            chain += 1;
        }
        if chain != n_vis {
            // visible set not contiguous: tolerance trouble, recompute from scratch
            self.rebuild_with(hv);
            return Ok(self.location_after_rebuild(p));
        }

        // keep v_{e+1} .. v_s (counterclockwise), then append p
        let mut out = Vec::with_capacity(h + 1 - (chain - 1));
        let mut i = self.next(e);
        loop {
            out.push(self.verts[i]);
            if i == s {
                break;
            }
            i = self.next(i);
        }
        out.push(hv);

        // drop vertices made collinear with p
        while out.len() > 3 {
            let m = out.len();
            if orient(out[m - 3].p, out[m - 2].p, p) == 0 {
                out.remove(m - 2);
            } else {
                break;
            }
        }
        while out.len() > 3 {
            if orient(p, out[0].p, out[1].p) == 0 {
                out.remove(0);
            } else {
                break;
            }
        }
        let idx = out.len() - 1;
        self.verts = out;
        Ok(Location::Vertex(idx))
    }

    fn location_after_rebuild(&self, p: Point2) -> Location {
        self.locate_full(p).unwrap_or(Location::Degenerate)
    }

    /// Monotone-chain rebuild over the current vertices plus `hv`.
    fn rebuild_with(&mut self, hv: HullVertex) {
        let mut pts = self.verts.clone();
        pts.push(hv);
        self.verts = monotone_chain(pts);
    }

    /// Boundary location of `p` on a full-rank hull, if it is on the boundary.
    fn locate_full(&self, p: Point2) -> Option<Location> {
        if let Some(i) = self.verts.iter().position(|v| v.p.dist(p) <= EPS_GEOM) {
            return Some(Location::Vertex(i));
        }
        let mut best: Option<(f64, usize)> = None;
        for i in 0..self.verts.len() {
            let (a, b) = (self.verts[i].p, self.verts[self.next(i)].p);
            match orient(a, b, p) {
                0 => {
                    let ab = b - a;
                    let t = ((p - a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
                    let gap = (a + ab * t).dist(p);
                    if best.is_none_or(|(g, _)| gap < g) {
                        best = Some((gap, i));
                    }
                }
                s if s < 0 => return None,
                _ => {}
            }
        }
        best.map(|(_, i)| Location::Edge(i))
    }

    /// Boundary location of `v`, or `NotOnBoundary`.
    pub fn locate(&self, v: Point2) -> Result<Location, HullError> {
        let off = HullError::NotOnBoundary { x: v.x, y: v.y };
        match self.rank() {
            Rank::Empty => Err(off),
            Rank::Point => {
                if self.verts[0].p.dist(v) <= EPS_GEOM {
                    Ok(Location::Degenerate)
                } else {
                    Err(off)
                }
            }
            Rank::Segment => {
                let (a, b) = (self.verts[0].p, self.verts[1].p);
                let ab = b - a;
                let t = (v - a).dot(ab) / ab.dot(ab);
                if orient(a, b, v) == 0 && (-EPS_GEOM..=1.0 + EPS_GEOM).contains(&t) {
                    Ok(Location::Degenerate)
                } else {
                    Err(off)
                }
            }
            Rank::Full => {
                // a point outside every edge half-plane is not on the boundary either
                let outside = (0..self.verts.len())
                    .any(|i| orient(self.verts[i].p, self.verts[self.next(i)].p, v) < 0);
                if outside {
                    return Err(off);
                }
                self.locate_full(v).ok_or(off)
            }
        }
    }

    /// Cone of a known boundary location.
    pub fn cone_at(&self, loc: Location) -> InteriorCone {
        match loc {
            Location::Degenerate => match self.rank() {
                Rank::Segment => {
                    let d = (self.verts[1].p - self.verts[0].p)
                        .direction()
                        .unwrap_or_default();
                    InteriorCone {
                        dir_prev: d,
                        dir_next: d,
                        angle: 0.0,
                    }
                }
                _ => InteriorCone::empty(),
            },
            Location::Vertex(i) => {
                let v = self.verts[i].p;
                let dir_next = (self.verts[self.next(i)].p - v).direction().unwrap_or_default();
                let dir_prev = (self.verts[self.prev(i)].p - v).direction().unwrap_or_default();
                InteriorCone {
                    dir_prev,
                    dir_next,
                    angle: dir_next.ccw_to(dir_prev),
                }
            }
            Location::Edge(i) => {
                let dir_next = (self.verts[self.next(i)].p - self.verts[i].p)
                    .direction()
                    .unwrap_or_default();
                InteriorCone {
                    dir_prev: dir_next.opposite(),
                    dir_next,
                    angle: PI,
                }
            }
        }
    }

    /// Interior cone at a boundary point `v`.
    pub fn interior_cone(&self, v: Point2) -> Result<InteriorCone, HullError> {
        self.locate(v).map(|loc| self.cone_at(loc))
    }

    /// True iff the closed segment `ab` meets the open interior of the hull.
    ///
    /// Points within [`EPS_GEOM`] of an edge line count as boundary.
    pub fn segment_hits_interior(&self, a: Point2, b: Point2) -> bool {
        if self.rank() != Rank::Full {
            return false;
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for i in 0..self.verts.len() {
            let v = self.verts[i].p;
            let e = self.verts[self.next(i)].p - v;
            let tol = EPS_GEOM * e.norm();
            let f0 = e.cross(a - v);
            let f1 = e.cross(b - v);
            let slope = f1 - f0;
            if slope == 0.0 {
                if f0 <= tol {
                    return false;
                }
                continue;
            }
            let t = (tol - f0) / slope;
            if slope > 0.0 {
                lo = lo.max(t);
            } else {
                hi = hi.min(t);
            }
            if lo >= hi {
                return false;
            }
        }
        lo < hi
    }
}

/// Andrew's monotone chain, dropping collinear points.
fn monotone_chain(mut pts: Vec<HullVertex>) -> Vec<HullVertex> {
    pts.sort_by(|a, b| {
        a.p.x
            .total_cmp(&b.p.x)
            .then(a.p.y.total_cmp(&b.p.y))
            .then(a.birth.cmp(&b.birth))
    });
    pts.dedup_by(|b, a| a.p.dist(b.p) <= EPS_GEOM);
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<HullVertex> = Vec::new();
    for &q in &pts {
        while lower.len() >= 2 && orient(lower[lower.len() - 2].p, lower[lower.len() - 1].p, q.p) <= 0 {
            lower.pop();
        }
        lower.push(q);
    }
    let mut upper: Vec<HullVertex> = Vec::new();
    for &q in pts.iter().rev() {
        while upper.len() >= 2 && orient(upper[upper.len() - 2].p, upper[upper.len() - 1].p, q.p) <= 0 {
            upper.pop();
        }
        upper.push(q);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Diameter of the hull together with a realizing pair.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiameterState {
    pub d: f64,
    pub ends: Option<(HullVertex, HullVertex)>,
}

impl DiameterState {
    /// Accounts for `p` (born at `birth`) about to join `hull_before`.
    ///
    /// Any new diametral pair must involve `p`, so only the current vertices
    /// are scanned. On a strict increase the far endpoint is returned; ties
    /// between equally distant vertices go to the earliest birth.
    pub fn update(&mut self, hull_before: &ConvexHull, p: Point2, birth: usize) -> Option<HullVertex> {
        let mut best: Option<(f64, HullVertex)> = None;
        for v in hull_before.vertices() {
            let r = v.p.dist(p);
            let better = match best {
                None => true,
                Some((b, bv)) => r > b || (r == b && v.birth < bv.birth),
            };
            if better {
                best = Some((r, *v));
            }
        }
        match best {
            Some((r, far)) if r > self.d => {
                self.d = r;
                self.ends = Some((far, HullVertex { p, birth }));
                Some(far)
            }
            _ => None,
        }
    }
}

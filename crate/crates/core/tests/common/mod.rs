//! Oracles shared by the integration tests. Nothing here calls into the
//! geometry of the library, so agreement is evidence rather than tautology.
#![allow(dead_code)]

use std::path::PathBuf;

use rancher::geom::Point2;

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// `RANCHER_BLESS=1` rewrites golden files instead of comparing.
pub fn blessing() -> bool {
    std::env::var("RANCHER_BLESS").is_ok_and(|v| v == "1")
}

/// Extreme points of `pts` by Jarvis march with exact cross products;
/// collinear boundary points are dropped.
pub fn gift_wrap(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut uniq: Vec<(f64, f64)> = Vec::new();
    for &p in pts {
        if !uniq.contains(&p) {
            uniq.push(p);
        }
    }
    if uniq.len() <= 2 {
        return uniq;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let d2 = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2);
    let start = *uniq.iter().min_by(|a, b| a.partial_cmp(b).unwrap()).unwrap();
    let mut hull = vec![start];
    let mut cur = start;
    loop {
        let mut cand = *uniq.iter().find(|&&q| q != cur).unwrap();
        for &q in &uniq {
            if q == cur {
                continue;
            }
            let c = cross(cur, cand, q);
            if c < 0.0 || (c == 0.0 && d2(cur, q) > d2(cur, cand)) {
                cand = q;
            }
        }
        if cand == start {
            break;
        }
        hull.push(cand);
        cur = cand;
        assert!(hull.len() <= uniq.len(), "oracle failed to close");
    }
    // all points collinear: only the two ends are extreme
    if hull.len() > 2 && hull.windows(3).all(|w| cross(w[0], w[1], w[2]) == 0.0) {
        let far = *hull.iter().max_by(|a, b| d2(start, **a).partial_cmp(&d2(start, **b)).unwrap()).unwrap();
        return vec![start, far];
    }
    hull
}

pub fn brute_diameter(pts: &[(f64, f64)]) -> f64 {
    let mut d = 0.0f64;
    for a in pts {
        for b in pts {
            d = d.max((a.0 - b.0).hypot(a.1 - b.1));
        }
    }
    d
}

/// Does the segment `a → b` meet the open interior of the convex polygon
/// `poly` (counterclockwise) by more than `margin`? Cyrus–Beck clipping
/// against the polygon shrunk by `margin`.
pub fn segment_hits_open_interior(poly: &[Point2], a: Point2, b: Point2, margin: f64) -> bool {
    if poly.len() < 3 {
        return false;
    }
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    let dir = (b.x - a.x, b.y - a.y);
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let e = (q.x - p.x, q.y - p.y);
        let len = e.0.hypot(e.1);
        // signed distance to the left of edge p→q, minus the margin
        let f0 = (e.0 * (a.y - p.y) - e.1 * (a.x - p.x)) / len - margin;
        let df = (e.0 * dir.1 - e.1 * dir.0) / len;
        if df == 0.0 {
            if f0 <= 0.0 {
                return false;
            }
        } else {
            let t = -f0 / df;
            if df > 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
        if t0 >= t1 {
            return false;
        }
    }
    t0 < t1
}

/// Angle between two plane vectors, in `[0, π]`.
pub fn vec_angle(u: (f64, f64), v: (f64, f64)) -> f64 {
    let c = u.0 * v.0 + u.1 * v.1;
    let s = u.0 * v.1 - u.1 * v.0;
    s.abs().atan2(c)
}

/// Composite Simpson on `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

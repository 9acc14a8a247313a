//! The eroded region S⁻ = {x : B₂(x) ⊂ S} of a halo.
//!
//! Its boundary lies on radius-2 circles centred at the vertices of ∂S (the
//! points where two boundary arcs meet), together with isolated points. Each
//! vertex circle is split at every point where membership in S⁻ can change
//! and the pieces are classified by probing just outside the circle.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::arcs::{union_measure_periodic, AngleInterval};
use super::halo::{arc_x_dy, boundary_arcs, link_chains, ArcSegment, BoundaryChain, HaloBoundary};
use super::{
    images_near, min_image, reduce_coordinate, wrap_angle, Configuration, TorusPoint, Vec2,
};
use crate::tolerances::{DISC_RADIUS, EROSION_PROBE, GEOM_EPS, POINT_MATCH};

const TWO_PI: f64 = 2.0 * PI;
const R: f64 = DISC_RADIUS;

/// An arc of ∂S⁻: part of the radius-2 circle about a vertex of ∂S.
///
/// The interval is stored counterclockwise; the boundary of S⁻ runs along it
/// clockwise, since S⁻ lies outside the vertex disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErodedArc {
    pub vertex: TorusPoint,
    pub interval: AngleInterval,
    /// Index of the ∂S arc whose start point is the vertex.
    pub owner: usize,
}

/// The eroded region of a halo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErodedRegion {
    pub arcs: Vec<ErodedArc>,
    /// Isolated points of S⁻.
    pub isolated: Vec<TorusPoint>,
    /// |S⁻|.
    pub area: f64,
    /// H¹(∂S⁻).
    pub boundary_length: f64,
    pub chains: Vec<BoundaryChain>,
    /// Some boundary chain of S⁻ winds around the torus.
    pub wraps: bool,
    /// Components of S⁻ when no chain wraps.
    pub components: Option<usize>,
    /// Holes of S⁻ when no chain wraps.
    pub holes: Option<usize>,
    /// Euler characteristic χ(S⁻) when no chain wraps.
    pub euler: Option<i64>,
    /// S⁻ is connected and each component of T∖S⁻ contains exactly one
    /// component of T∖S, which guarantees that S⁻ has reach at least 2.
    pub reach_condition: bool,
    /// |(S⁻)⁺|, recomputed from the boundary of S⁻.
    pub dilation_area: f64,
}

impl ErodedRegion {
    pub fn is_connected(&self) -> bool {
        self.components == Some(1)
    }

    pub fn is_simply_connected(&self) -> bool {
        self.is_connected() && self.holes == Some(0)
    }
}

/// A ∂S arc lifted to a particular lattice image.
#[derive(Debug, Clone, Copy)]
struct LocalArc {
    center: Vec2,
    interval: AngleInterval,
    pa: Vec2,
    pb: Vec2,
}

impl LocalArc {
    fn new(center: Vec2, interval: AngleInterval) -> Self {
        Self {
            center,
            interval,
            pa: center + Vec2::polar(R, interval.start),
            pb: center + Vec2::polar(R, interval.end()),
        }
    }

    fn distance(&self, x: Vec2) -> f64 {
        let w = x - self.center;
        let r = w.norm();
        if r < GEOM_EPS {
            return R;
        }
        if self.interval.contains(w.angle()) {
            (r - R).abs()
        } else {
            x.dist(self.pa).min(x.dist(self.pb))
        }
    }
}

/// Local neighbourhood of ∂S: point images and arc images near a site.
struct Local {
    points: Vec<Vec2>,
    arcs: Vec<LocalArc>,
}

impl Local {
    fn gather(config: &Configuration, arcs: &[ArcSegment], site: Vec2, reach: f64) -> Self {
        let l = config.l;
        let mut points = Vec::new();
        for p in &config.points {
            points.extend(images_near(p.vec(), site, reach, l));
        }
        let mut local = Vec::new();
        for a in arcs {
            for c in images_near(a.center.vec(), site, reach + R, l) {
                let la = LocalArc::new(c, a.interval);
                if la.distance(site) < reach {
                    local.push(la);
                }
            }
        }
        Self {
            points,
            arcs: local,
        }
    }

    fn contains(&self, x: Vec2) -> bool {
        let covered = self
            .points
            .iter()
            .any(|z| (x - *z).norm2() <= R * R * (1.0 + GEOM_EPS));
        covered && self.arcs.iter().all(|a| a.distance(x) >= R - GEOM_EPS)
    }
}

/// Whether `x` lies in the eroded region of the halo with boundary arcs `arcs`.
pub(crate) fn eroded_contains(config: &Configuration, arcs: &[ArcSegment], x: Vec2) -> bool {
    if config.is_empty() {
        return false;
    }
    Local::gather(config, arcs, x, 2.0 * R + 1e-9).contains(x)
}

/// Angles on the circle (v, r) where it meets the circle (c, s).
fn circle_hits(v: Vec2, r: f64, c: Vec2, s: f64, out: &mut Vec<f64>) {
    let w = c - v;
    let d = w.norm();
    if d < GEOM_EPS || d > r + s || d < (r - s).abs() {
        return;
    }
    let base = w.angle();
    let half = ((d * d + r * r - s * s) / (2.0 * r * d))
        .clamp(-1.0, 1.0)
        .acos();
    out.push(base - half);
    out.push(base + half);
}

/// Angles on the circle (v, r) where it meets the ray from `z` in direction `phi`.
fn ray_hits(v: Vec2, r: f64, z: Vec2, phi: f64, out: &mut Vec<f64>) {
    let u = Vec2::polar(1.0, phi);
    let w = z - v;
    let b = u.dot(w);
    let disc = b * b - (w.norm2() - r * r);
    if disc < 0.0 {
        return;
    }
    let sq = disc.sqrt();
    for t in [-b - sq, -b + sq] {
        if t >= 0.0 {
            out.push((w + u * t).angle());
        }
    }
}

/// Arcs of the circle about vertex `v` lying in S⁻, as counterclockwise intervals.
fn vertex_arcs(v: Vec2, local: &Local) -> Vec<AngleInterval> {
    let mut cuts = Vec::new();
    for z in &local.points {
        circle_hits(v, R, *z, R, &mut cuts);
        if ((*z - v).norm() - R).abs() < POINT_MATCH {
            cuts.push((*z - v).angle());
        }
    }
    for a in &local.arcs {
        circle_hits(v, R, a.center, 2.0 * R, &mut cuts);
        circle_hits(v, R, a.pa, R, &mut cuts);
        circle_hits(v, R, a.pb, R, &mut cuts);
        if !a.interval.is_full() {
            ray_hits(v, R, a.center, a.interval.start, &mut cuts);
            ray_hits(v, R, a.center, a.interval.end(), &mut cuts);
        }
    }
    let probe = |phi: f64| local.contains(v + Vec2::polar(R + EROSION_PROBE, phi));
    let mut cuts: Vec<f64> = cuts.into_iter().map(wrap_angle).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    if cuts.len() > 1 && cuts[0] + TWO_PI - cuts[cuts.len() - 1] < 1e-13 {
        cuts.pop();
    }
    if cuts.is_empty() {
        return if probe(0.0) {
            vec![AngleInterval::new(0.0, TWO_PI)]
        } else {
            Vec::new()
        };
    }
    let n = cuts.len();
    let pieces: Vec<(f64, f64, bool)> = (0..n)
        .map(|k| {
            let s = cuts[k];
            let e = if k + 1 < n {
                cuts[k + 1]
            } else {
                cuts[0] + TWO_PI
            };
            (s, e, probe(0.5 * (s + e)))
        })
        .collect();
    if pieces.iter().all(|p| p.2) {
        return vec![AngleInterval::new(0.0, TWO_PI)];
    }
    let first_out = pieces.iter().position(|p| !p.2).unwrap_or(0);
    let mut out = Vec::new();
    let mut current: Option<(f64, f64)> = None;
    for k in 0..n {
        let (s, e, inside) = pieces[(first_out + k) % n];
        let (s, e) = if (first_out + k) % n < first_out {
            (s + TWO_PI, e + TWO_PI)
        } else {
            (s, e)
        };
        if inside {
            current = Some(match current {
                Some((cs, _)) => (cs, e),
                None => (s, e),
            });
        } else if let Some((cs, ce)) = current.take() {
            out.push(AngleInterval::new(cs, ce - cs));
        }
    }
    if let Some((cs, ce)) = current {
        out.push(AngleInterval::new(cs, ce - cs));
    }
    out.retain(|iv| iv.span > GEOM_EPS);
    out
}

/// Length of S⁻ on the seam line x = L/2.
fn seam_measure(config: &Configuration, arcs: &[ArcSegment], eroded: &[ErodedArc]) -> f64 {
    let l = config.l;
    let xs = 0.5 * l;
    let mut ys = Vec::new();
    for a in eroded {
        for c in images_near(a.vertex.vec(), Vec2::new(xs, a.vertex.y), R + 1.0, l) {
            let dx = xs - c.x;
            if dx.abs() <= R {
                let h = (R * R - dx * dx).sqrt();
                ys.push(reduce_coordinate(c.y - h, l));
                ys.push(reduce_coordinate(c.y + h, l));
            }
        }
    }
    ys.sort_by(f64::total_cmp);
    ys.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    if ys.is_empty() {
        return if eroded_contains(config, arcs, Vec2::new(xs, 0.0)) {
            l
        } else {
            0.0
        };
    }
    let n = ys.len();
    let mut intervals = Vec::new();
    for k in 0..n {
        let s = ys[k];
        let e = if k + 1 < n { ys[k + 1] } else { ys[0] + l };
        if e - s > 0.0 && eroded_contains(config, arcs, Vec2::new(xs, 0.5 * (s + e))) {
            intervals.push((s + 0.5 * l, e - s));
        }
    }
    union_measure_periodic(&intervals, l)
}

fn full_torus(l: f64) -> ErodedRegion {
    ErodedRegion {
        arcs: Vec::new(),
        isolated: Vec::new(),
        area: l * l,
        boundary_length: 0.0,
        chains: Vec::new(),
        wraps: true,
        components: Some(1),
        holes: None,
        euler: Some(0),
        reach_condition: true,
        dilation_area: l * l,
    }
}

fn dedup_points(points: Vec<Vec2>, l: f64) -> Vec<Vec2> {
    let mut out: Vec<Vec2> = Vec::new();
    for p in points {
        let q = Vec2::new(reduce_coordinate(p.x, l), reduce_coordinate(p.y, l));
        if !out.iter().any(|o| min_image(*o, q, l).norm() < POINT_MATCH) {
            out.push(q);
        }
    }
    out
}

/// Whether `x` lies within distance 2 of S⁻.
fn near_eroded(
    config: &Configuration,
    arcs: &[ArcSegment],
    eroded: &[ErodedArc],
    isolated: &[TorusPoint],
    x: Vec2,
) -> bool {
    let l = config.l;
    let close_arc = eroded.iter().any(|e| {
        images_near(e.vertex.vec(), x, 2.0 * R + 1e-9, l)
            .into_iter()
            .any(|v| LocalArc::new(v, e.interval).distance(x) <= R)
    });
    close_arc
        || isolated
            .iter()
            .any(|p| min_image(p.vec(), x, l).norm() <= R)
        || eroded_contains(config, arcs, x)
}

/// Area of the dilation (S⁻)⁺.
///
/// Its boundary lies on the circles about the corners and isolated points of
/// S⁻: the boundary arcs of their disc union that face points farther than 2
/// from S⁻. The area follows from the same line integral as for halos.
fn dilation_area(
    config: &Configuration,
    arcs: &[ArcSegment],
    eroded: &[ErodedArc],
    isolated: &[TorusPoint],
) -> f64 {
    let l = config.l;
    let mut corners: Vec<Vec2> = Vec::new();
    for a in eroded {
        if !a.interval.is_full() {
            corners.push(a.vertex.vec() + Vec2::polar(R, a.interval.start));
            corners.push(a.vertex.vec() + Vec2::polar(R, a.interval.end()));
        }
    }
    corners.extend(isolated.iter().map(|p| p.vec()));
    let corners = dedup_points(corners, l);
    let cfg = match Configuration::new(&corners, l) {
        Ok(c) => c,
        Err(_) => return f64::NAN,
    };
    let inside = |x: Vec2| near_eroded(config, arcs, eroded, isolated, x);
    let (corner_arcs, _) = boundary_arcs(&cfg);
    let line: f64 = corner_arcs
        .iter()
        .filter(|a| {
            let probe = a.center.vec() + Vec2::polar(R + 1e-6, a.interval.mid());
            !inside(probe)
        })
        .map(|a| arc_x_dy(a.center.vec(), R, a.interval, l))
        .sum();
    let xs = 0.5 * l;
    let mut ys = Vec::new();
    for c in &corners {
        for img in images_near(*c, Vec2::new(xs, c.y), R + 1.0, l) {
            let dx = xs - img.x;
            if dx.abs() <= R {
                let h = (R * R - dx * dx).sqrt();
                ys.push(reduce_coordinate(img.y - h, l));
                ys.push(reduce_coordinate(img.y + h, l));
            }
        }
    }
    ys.sort_by(f64::total_cmp);
    let seam = if ys.is_empty() {
        if inside(Vec2::new(xs, 0.0)) {
            l
        } else {
            0.0
        }
    } else {
        let n = ys.len();
        (0..n)
            .map(|k| {
                let s = ys[k];
                let e = if k + 1 < n { ys[k + 1] } else { ys[0] + l };
                if e > s && inside(Vec2::new(xs, 0.5 * (s + e))) {
                    e - s
                } else {
                    0.0
                }
            })
            .sum()
    };
    line + l * seam
}

/// Winding number of a closed chain of S⁻ boundary arcs about `x`, summed over lattice images.
fn winding(chain: &BoundaryChain, eroded: &[ErodedArc], x: Vec2, l: f64) -> i64 {
    let mut total = 0;
    for i in -2..=2 {
        for j in -2..=2 {
            let q = x + Vec2::new(i as f64 * l, j as f64 * l);
            let mut turn = 0.0;
            for (k, &idx) in chain.arcs.iter().enumerate() {
                let c = chain.lifted_centers[k];
                let iv = eroded[idx].interval;
                let m = (iv.span / 0.05).ceil().max(1.0) as usize;
                let mut prev = (c + Vec2::polar(R, iv.end()) - q).angle();
                for step in 1..=m {
                    let phi = iv.end() - iv.span * step as f64 / m as f64;
                    let cur = (c + Vec2::polar(R, phi) - q).angle();
                    let mut d = cur - prev;
                    if d > PI {
                        d -= TWO_PI;
                    } else if d < -PI {
                        d += TWO_PI;
                    }
                    turn += d;
                    prev = cur;
                }
            }
            total += (turn / TWO_PI).round() as i64;
        }
    }
    total
}

/// S⁻ is connected and each component of T∖S⁻ contains exactly one component
/// of T∖S; under this condition S⁻ has reach at least 2.
fn separation_condition(
    b: &HaloBoundary,
    eroded: &[ErodedArc],
    chains: &[BoundaryChain],
    components: Option<usize>,
    wraps: bool,
    l: f64,
) -> bool {
    if wraps || b.wraps || components != Some(1) {
        return false;
    }
    let holes: Vec<&BoundaryChain> = chains.iter().filter(|c| c.signed_area < 0.0).collect();
    let mut hits = vec![0usize; holes.len() + 1];
    for sc in &b.chains {
        let arc = &b.arcs[sc.arcs[0]];
        let p = arc.center.vec() + Vec2::polar(R, arc.interval.mid());
        let slot = holes
            .iter()
            .position(|h| winding(h, eroded, p, l) != 0)
            .unwrap_or(holes.len());
        hits[slot] += 1;
    }
    hits.iter().all(|&n| n == 1)
}

pub(crate) fn erode(config: &Configuration, b: &HaloBoundary) -> ErodedRegion {
    let l = config.l;
    if b.arcs.is_empty() {
        return full_torus(l);
    }
    let reach = 2.0 * R + 1e-9;
    let mut eroded = Vec::new();
    for (k, arc) in b.arcs.iter().enumerate() {
        if arc.interval.is_full() {
            continue;
        }
        let p = arc.start_point();
        let v = Vec2::new(reduce_coordinate(p.x, l), reduce_coordinate(p.y, l));
        let local = Local::gather(config, &b.arcs, v, reach);
        for interval in vertex_arcs(v, &local) {
            eroded.push(ErodedArc {
                vertex: TorusPoint::new(v.x, v.y, l),
                interval,
                owner: k,
            });
        }
    }

    let mut isolated = Vec::new();
    let mut seen = vec![false; config.len()];
    for arc in &b.arcs {
        if std::mem::replace(&mut seen[arc.point], true) {
            continue;
        }
        let z = arc.center.vec();
        let on_boundary = eroded.iter().any(|e| {
            let w = min_image(e.vertex.vec(), z, l);
            (w.norm() - R).abs() < POINT_MATCH
                && AngleInterval::new(e.interval.start - 1e-9, e.interval.span + 2e-9)
                    .contains(w.angle())
        });
        if !on_boundary {
            isolated.push(arc.center);
        }
    }

    let starts: Vec<Vec2> = eroded
        .iter()
        .map(|e| e.vertex.vec() + Vec2::polar(R, e.interval.end()))
        .collect();
    let ends: Vec<Vec2> = eroded
        .iter()
        .map(|e| e.vertex.vec() + Vec2::polar(R, e.interval.start))
        .collect();
    let centers: Vec<Vec2> = eroded.iter().map(|e| e.vertex.vec()).collect();
    let intervals: Vec<AngleInterval> = eroded.iter().map(|e| e.interval).collect();
    let ccw = vec![false; eroded.len()];
    let chains = link_chains(&starts, &ends, &centers, R, &intervals, &ccw, l);

    let line: f64 = eroded
        .iter()
        .map(|e| -arc_x_dy(e.vertex.vec(), R, e.interval, l))
        .sum();
    let area = (line + l * seam_measure(config, &b.arcs, &eroded)).max(0.0);
    let boundary_length = eroded.iter().map(|e| R * e.interval.span).sum();

    let wraps = chains.iter().any(|c| !c.closes);
    let (components, holes, euler) = if wraps {
        (None, None, None)
    } else {
        let pos = chains.iter().filter(|c| c.signed_area > 0.0).count();
        let neg = chains.len() - pos;
        let comps = pos + isolated.len();
        (Some(comps), Some(neg), Some(comps as i64 - neg as i64))
    };
    let reach_condition = separation_condition(b, &eroded, &chains, components, wraps, l);
    let dilation_area = dilation_area(config, &b.arcs, &eroded, &isolated);

    ErodedRegion {
        arcs: eroded,
        isolated,
        area,
        boundary_length,
        chains,
        wraps,
        components,
        holes,
        euler,
        reach_condition,
        dilation_area,
    }
}

/// Eroded region of a configuration's halo.
#[cfg(test)]
pub(crate) fn eroded_region(config: &Configuration) -> ErodedRegion {
    erode(config, &super::halo::halo_boundary(config))
}

//! Boundary arcs, exact area and boundary chains of the halo.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::arcs::{uncovered_arcs, union_measure_periodic, AngleInterval, Disc};
use super::erosion::{erode, ErodedRegion};
use super::{lattice_shifts, min_image, Configuration, TorusPoint, Vec2};
use crate::error::{Error, Result};
use crate::tolerances::{CHAIN_CLOSURE, DISC_RADIUS};

/// A maximal arc of a radius-2 circle lying on the boundary of the halo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcSegment {
    /// Index of the generating configuration point.
    pub point: usize,
    pub center: TorusPoint,
    pub radius: f64,
    /// Angular interval, traversed counterclockwise about the centre.
    pub interval: AngleInterval,
}

impl ArcSegment {
    pub fn start_point(&self) -> Vec2 {
        self.center.vec() + Vec2::polar(self.radius, self.interval.start)
    }

    pub fn end_point(&self) -> Vec2 {
        self.center.vec() + Vec2::polar(self.radius, self.interval.end())
    }

    pub fn length(&self) -> f64 {
        self.radius * self.interval.span
    }
}

/// A closed cycle of boundary arcs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryChain {
    /// Arc indices in traversal order.
    pub arcs: Vec<usize>,
    /// Lifted centres of the arcs, consistent along the chain.
    pub lifted_centers: Vec<Vec2>,
    /// Whether the chain closes in the plane (it does not wind around the torus).
    pub closes: bool,
    /// Signed enclosed area of the lifted chain; positive for outer boundaries.
    pub signed_area: f64,
    /// Largest endpoint mismatch between consecutive arcs.
    pub closure_gap: f64,
}

/// The halo h(γ) of a configuration with its eroded region.
#[derive(Debug, Clone, PartialEq)]
pub struct Halo {
    pub config: Configuration,
    pub arcs: Vec<ArcSegment>,
    /// |S|.
    pub area: f64,
    pub chains: Vec<BoundaryChain>,
    /// Connected components of S.
    pub components: usize,
    /// Holes of S, when no boundary chain winds around the torus.
    pub holes: Option<usize>,
    /// Whether S fails to lift to disjoint bounded copies in the plane: some
    /// boundary chain winds around the torus, or a component has no outer boundary.
    pub wraps: bool,
    /// Number of tangent circle pairs met during the decomposition.
    pub tangencies: usize,
    /// The eroded region S⁻.
    pub eroded: ErodedRegion,
    /// |S⁻|.
    pub interior_area: f64,
    /// H¹(∂S⁻).
    pub interior_boundary_length: f64,
}

impl Halo {
    /// Euler characteristic of S⁻ when it is well defined.
    pub fn interior_euler(&self) -> Option<i64> {
        self.eroded.euler
    }

    /// Euler characteristic of S when it is well defined.
    pub fn euler(&self) -> Option<i64> {
        self.holes.map(|h| self.components as i64 - h as i64)
    }

    /// Whether the halo fits in one fundamental domain.
    pub fn fits_domain(&self) -> bool {
        !self.wraps
    }

    /// Indices of points whose circles contribute boundary arcs.
    pub fn boundary_points(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = self.arcs.iter().map(|a| a.point).collect();
        idx.sort_unstable();
        idx.dedup();
        idx
    }
}

/// Discs of other points (all relevant images) that may cover the circle of point `i`.
fn covering_discs(config: &Configuration, i: usize) -> Vec<Disc> {
    let l = config.l;
    let c = config.points[i].vec();
    let reach = 2.0 * DISC_RADIUS;
    let all_images = l <= 2.0 * reach;
    let mut out = Vec::new();
    for (j, p) in config.points.iter().enumerate() {
        if j == i {
            continue;
        }
        if all_images {
            for s in lattice_shifts(l) {
                let d = p.vec() + s;
                if (d - c).norm2() < reach * reach {
                    out.push(Disc {
                        center: d,
                        radius: DISC_RADIUS,
                    });
                }
            }
        } else {
            let w = min_image(c, p.vec(), l);
            if w.norm2() < reach * reach {
                out.push(Disc {
                    center: c + w,
                    radius: DISC_RADIUS,
                });
            }
        }
    }
    out
}

/// Boundary arcs of the halo and the number of tangencies met.
pub(crate) fn boundary_arcs(config: &Configuration) -> (Vec<ArcSegment>, usize) {
    let mut arcs = Vec::new();
    let mut tangencies = 0;
    for i in 0..config.len() {
        let covers = covering_discs(config, i);
        let (free, t) = uncovered_arcs(config.points[i].vec(), DISC_RADIUS, &covers);
        tangencies += t;
        for interval in free {
            if interval.span > 0.0 {
                arcs.push(ArcSegment {
                    point: i,
                    center: config.points[i],
                    radius: DISC_RADIUS,
                    interval,
                });
            }
        }
    }
    (arcs, tangencies / 2)
}

/// ∫ r cos φ dφ over the part of [a, a + span] inside the periodic interval [lo, lo + w].
fn cos_integral_on_overlap(r: f64, a: f64, span: f64, lo: f64, w: f64) -> f64 {
    let b = a + span;
    let mut total = 0.0;
    for k in -1..=2 {
        let s = lo + 2.0 * PI * k as f64;
        let p = a.max(s);
        let q = b.min(s + w);
        if q > p {
            total += r * (q.sin() - p.sin());
        }
    }
    total
}

/// ∫ x dy along the arc traversed counterclockwise, with x measured in the
/// fundamental domain of the torus of side `l`.
pub(crate) fn arc_x_dy(center: Vec2, r: f64, interval: AngleInterval, l: f64) -> f64 {
    let a = interval.start;
    let b = interval.end();
    let cx = center.x;
    let mut v = cx * r * (b.sin() - a.sin())
        + r * r * (0.5 * (b - a) + 0.25 * ((2.0 * b).sin() - (2.0 * a).sin()));
    let k_right = (0.5 * l - cx) / r;
    if k_right < 1.0 {
        let alpha = k_right.max(-1.0).acos();
        v -= l * cos_integral_on_overlap(r, a, interval.span, -alpha, 2.0 * alpha);
    }
    let k_left = (-0.5 * l - cx) / r;
    if k_left > -1.0 {
        let beta = k_left.min(1.0).acos();
        v += l * cos_integral_on_overlap(r, a, interval.span, beta, 2.0 * PI - 2.0 * beta);
    }
    v
}

/// Length of the halo's trace on the seam line x = ±L/2.
fn seam_measure(config: &Configuration) -> f64 {
    let l = config.l;
    let mut intervals = Vec::new();
    for p in &config.points {
        let dx = (0.5 * l - p.x).min(p.x + 0.5 * l);
        if dx < DISC_RADIUS {
            let hw = (DISC_RADIUS * DISC_RADIUS - dx * dx).sqrt();
            intervals.push((p.y + 0.5 * l - hw, 2.0 * hw));
        }
    }
    union_measure_periodic(&intervals, l)
}

fn area_from_arcs(config: &Configuration, arcs: &[ArcSegment]) -> f64 {
    if config.is_empty() {
        return 0.0;
    }
    let line: f64 = arcs
        .iter()
        .map(|a| arc_x_dy(a.center.vec(), a.radius, a.interval, config.l))
        .sum();
    line + config.l * seam_measure(config)
}

/// Exact area of the halo without building chains or the eroded region.
pub fn union_area(config: &Configuration) -> f64 {
    let (arcs, _) = boundary_arcs(config);
    area_from_arcs(config, &arcs)
}

/// Links arcs into closed chains by matching end points to start points.
///
/// `ends` and `starts` give the traversal end and start point of each arc in
/// fundamental-domain coordinates; `centers` the arc centres; `ccw` whether an
/// arc is traversed counterclockwise about its centre.
pub(crate) fn link_chains(
    starts: &[Vec2],
    ends: &[Vec2],
    centers: &[Vec2],
    radius: f64,
    intervals: &[AngleInterval],
    ccw: &[bool],
    l: f64,
) -> Vec<BoundaryChain> {
    let n = starts.len();
    let mut next = vec![usize::MAX; n];
    let mut gap = vec![0.0; n];
    let mut taken = vec![false; n];
    for k in 0..n {
        if intervals[k].is_full() {
            next[k] = k;
            continue;
        }
        let mut best = (f64::INFINITY, usize::MAX);
        for m in 0..n {
            if intervals[m].is_full() {
                continue;
            }
            let d = min_image(ends[k], starts[m], l).norm();
            let penalty = if taken[m] { 1.0 } else { 0.0 };
            if d + penalty < best.0 {
                best = (d + penalty, m);
            }
        }
        next[k] = best.1;
        gap[k] = best.0;
        if best.1 != usize::MAX {
            taken[best.1] = true;
        }
    }
    let mut visited = vec![false; n];
    let mut chains = Vec::new();
    for k0 in 0..n {
        if visited[k0] {
            continue;
        }
        let mut order = Vec::new();
        let mut lifted = Vec::new();
        let mut shift = Vec2::default();
        let mut k = k0;
        let mut closure_gap: f64 = 0.0;
        let mut signed = 0.0;
        loop {
            if visited[k] || k == usize::MAX {
                break;
            }
            visited[k] = true;
            order.push(k);
            let c = centers[k] + shift;
            lifted.push(c);
            let iv = intervals[k];
            let pa = c + Vec2::polar(radius, iv.start);
            let pb = c + Vec2::polar(radius, iv.end());
            let piece = 0.5 * c.cross(pb - pa) + 0.5 * radius * radius * iv.span;
            signed += if ccw[k] { piece } else { -piece };
            closure_gap = closure_gap.max(gap[k]);
            let m = next[k];
            if m == usize::MAX {
                break;
            }
            let end_lifted = ends[k] + shift;
            let raw = end_lifted - starts[m];
            shift = Vec2::new((raw.x / l).round() * l, (raw.y / l).round() * l);
            k = m;
        }
        let closes = shift.norm() < 0.5 * l;
        chains.push(BoundaryChain {
            arcs: order,
            lifted_centers: lifted,
            closes,
            signed_area: signed,
            closure_gap,
        });
    }
    chains
}

fn chains_of(config: &Configuration, arcs: &[ArcSegment]) -> Vec<BoundaryChain> {
    let starts: Vec<Vec2> = arcs.iter().map(|a| a.start_point()).collect();
    let ends: Vec<Vec2> = arcs.iter().map(|a| a.end_point()).collect();
    let centers: Vec<Vec2> = arcs.iter().map(|a| a.center.vec()).collect();
    let intervals: Vec<AngleInterval> = arcs.iter().map(|a| a.interval).collect();
    let ccw = vec![true; arcs.len()];
    link_chains(
        &starts,
        &ends,
        &centers,
        DISC_RADIUS,
        &intervals,
        &ccw,
        config.l,
    )
}

/// Number of connected components of the halo (discs at distance below 4 overlap).
pub(crate) fn component_count(config: &Configuration) -> usize {
    let n = config.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            p[r] = p[p[r]];
            r = p[r];
        }
        r
    }
    let reach = 2.0 * DISC_RADIUS;
    for i in 0..n {
        for j in 0..i {
            let d = min_image(config.points[i].vec(), config.points[j].vec(), config.l).norm();
            if d < reach {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    (0..n).filter(|&i| find(&mut parent, i) == i).count()
}

/// Boundary structure of a halo without its eroded region.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct HaloBoundary {
    pub arcs: Vec<ArcSegment>,
    pub area: f64,
    pub chains: Vec<BoundaryChain>,
    pub components: usize,
    pub holes: Option<usize>,
    pub wraps: bool,
    pub tangencies: usize,
}

pub(crate) fn halo_boundary(config: &Configuration) -> HaloBoundary {
    let (arcs, tangencies) = boundary_arcs(config);
    let area = area_from_arcs(config, &arcs);
    let chains = chains_of(config, &arcs);
    let components = component_count(config);
    let covers_torus = arcs.is_empty() && !config.is_empty() && area > 0.5 * config.l * config.l;
    let outer = chains.iter().filter(|c| c.signed_area > 0.0).count();
    let wraps = covers_torus || chains.iter().any(|c| !c.closes) || outer != components;
    let holes = if wraps {
        None
    } else {
        Some(chains.iter().filter(|c| c.signed_area < 0.0).count())
    };
    HaloBoundary {
        arcs,
        area,
        chains,
        components,
        holes,
        wraps,
        tangencies,
    }
}

/// The halo of a non-empty configuration, with its eroded region.
pub fn halo(config: &Configuration) -> Result<Halo> {
    if config.is_empty() {
        return Err(Error::Domain("halo of an empty configuration".into()));
    }
    let b = halo_boundary(config);
    for c in &b.chains {
        if c.closure_gap > CHAIN_CLOSURE {
            return Err(Error::Geometry(format!(
                "boundary chain fails to close: gap {}",
                c.closure_gap
            )));
        }
    }
    let eroded = erode(config, &b);
    Ok(Halo {
        config: config.clone(),
        interior_area: eroded.area,
        interior_boundary_length: eroded.boundary_length,
        arcs: b.arcs,
        area: b.area,
        chains: b.chains,
        components: b.components,
        holes: b.holes,
        wraps: b.wraps,
        tangencies: b.tangencies,
        eroded,
    })
}

/// Area of the lens B₂(0) ∩ B₂(d e₁) for 0 ≤ d ≤ 4.
pub fn lens_area(d: f64) -> f64 {
    if d >= 4.0 {
        return 0.0;
    }
    8.0 * (d / 4.0).acos() - 0.5 * d * (16.0 - d * d).sqrt()
}

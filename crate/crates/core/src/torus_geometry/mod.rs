//! Exact geometry of unions of radius-2 discs on the flat torus.
//!
//! The halo of a configuration is decomposed into boundary arcs, its area is
//! obtained from a line integral over the arcs that remains valid on the torus,
//! and the eroded region S⁻ is reconstructed from radius-2 arcs centred at the
//! vertices of the halo boundary.

mod arcs;
mod erosion;
mod halo;
mod measures;

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::GEOM_EPS;

pub use arcs::{uncovered_arcs, AngleInterval, Disc};
pub(crate) use erosion::eroded_contains;
pub use erosion::ErodedRegion;
pub(crate) use halo::halo_boundary;
pub use halo::{halo, lens_area, union_area, ArcSegment, BoundaryChain, Halo};
pub(crate) use measures::arc_distance_range;
pub use measures::{
    bonnesen_check, erosion_interior, hausdorff_to_circle, rate_function_i, rate_function_j,
    steiner_identity_check, BonnesenReport, SteinerReport,
};

/// A vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at angle `phi`.
    pub fn polar(r: f64, phi: f64) -> Self {
        Self::new(r * phi.cos(), r * phi.sin())
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm2(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }

    /// Polar angle in (−π, π].
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn dist(self, o: Self) -> f64 {
        (self - o).norm()
    }

    /// Rotation by `alpha` about the origin.
    pub fn rotate(self, alpha: f64) -> Self {
        let (s, c) = alpha.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Angle reduced to [0, 2π).
pub fn wrap_angle(a: f64) -> f64 {
    let t = a.rem_euclid(2.0 * PI);
    if t >= 2.0 * PI {
        0.0
    } else {
        t
    }
}

/// Coordinate reduced to the fundamental interval [−L/2, L/2).
pub fn reduce_coordinate(v: f64, l: f64) -> f64 {
    let r = (v + 0.5 * l).rem_euclid(l) - 0.5 * l;
    if r >= 0.5 * l {
        -0.5 * l
    } else {
        r
    }
}

/// A point of the torus with coordinates in the fundamental domain [−L/2, L/2)².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    pub x: f64,
    pub y: f64,
}

impl TorusPoint {
    /// The point `(x, y)` reduced modulo `l`.
    pub fn new(x: f64, y: f64, l: f64) -> Self {
        Self {
            x: reduce_coordinate(x, l),
            y: reduce_coordinate(y, l),
        }
    }

    pub fn vec(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// The nine lattice shifts {−1, 0, 1}² scaled by `l`.
pub fn lattice_shifts(l: f64) -> [Vec2; 9] {
    let mut out = [Vec2::default(); 9];
    let mut k = 0;
    for i in -1..=1 {
        for j in -1..=1 {
            out[k] = Vec2::new(i as f64 * l, j as f64 * l);
            k += 1;
        }
    }
    out
}

/// Lattice images of `p` within distance `radius` of `target`.
pub(crate) fn images_near(p: Vec2, target: Vec2, radius: f64, l: f64) -> Vec<Vec2> {
    let k = (radius / l).ceil() as i32 + 1;
    let mut out = Vec::new();
    for i in -k..=k {
        for j in -k..=k {
            let q = p + Vec2::new(i as f64 * l, j as f64 * l);
            if (q - target).norm2() <= radius * radius {
                out.push(q);
            }
        }
    }
    out
}

/// Minimal-image displacement `b − a` on the torus of side `l`.
pub fn min_image(a: Vec2, b: Vec2, l: f64) -> Vec2 {
    Vec2::new(
        reduce_coordinate(b.x - a.x, l),
        reduce_coordinate(b.y - a.y, l),
    )
}

/// Torus distance: the minimum over the nine lattice shifts of |x − y + kL|.
pub fn torus_distance(x: TorusPoint, y: TorusPoint, l: f64) -> f64 {
    let mut best = f64::INFINITY;
    let d = y.vec() - x.vec();
    for s in lattice_shifts(l) {
        best = best.min((d + s).norm());
    }
    best
}

/// A finite configuration of pairwise distinct points on the torus of side `L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub points: Vec<TorusPoint>,
    #[serde(rename = "L")]
    pub l: f64,
}

impl Configuration {
    /// Validated configuration: L > 4 and points pairwise distinct.
    pub fn new(points: &[Vec2], l: f64) -> Result<Self> {
        if !(l > 4.0) || !l.is_finite() {
            return Err(Error::Domain(format!("torus side must exceed 4, got {l}")));
        }
        let pts: Vec<TorusPoint> = points
            .iter()
            .map(|p| TorusPoint::new(p.x, p.y, l))
            .collect();
        for i in 0..pts.len() {
            if !pts[i].x.is_finite() || !pts[i].y.is_finite() {
                return Err(Error::Domain(format!("point {i} is not finite")));
            }
            for j in 0..i {
                if torus_distance(pts[i], pts[j], l) <= GEOM_EPS {
                    return Err(Error::Domain(format!("points {j} and {i} coincide")));
                }
            }
        }
        Ok(Self { points: pts, l })
    }

    /// Configuration on a torus large enough that the halo cannot wrap.
    pub fn planar(points: &[Vec2]) -> Result<Self> {
        let extent = points
            .iter()
            .map(|p| p.x.abs().max(p.y.abs()))
            .fold(0.0, f64::max);
        Self::new(points, 4.0 * (extent + 8.0))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points as plane vectors in fundamental-domain coordinates.
    pub fn vecs(&self) -> Vec<Vec2> {
        self.points.iter().map(|p| p.vec()).collect()
    }

    /// The configuration translated by `shift` (modulo the torus).
    pub fn translated(&self, shift: Vec2) -> Self {
        Self {
            points: self
                .points
                .iter()
                .map(|p| TorusPoint::new(p.x + shift.x, p.y + shift.y, self.l))
                .collect(),
            l: self.l,
        }
    }

    /// The configuration with one more point.
    pub fn with_point(&self, p: Vec2) -> Result<Self> {
        let mut v = self.vecs();
        v.push(p);
        Self::new(&v, self.l)
    }

    /// The configuration without point `i`.
    pub fn without_point(&self, i: usize) -> Self {
        let mut points = self.points.clone();
        points.remove(i);
        Self { points, l: self.l }
    }

    /// Whether `x` lies in the closed halo.
    pub fn covers(&self, x: Vec2) -> bool {
        self.points
            .iter()
            .any(|p| min_image(p.vec(), x, self.l).norm2() <= 4.0)
    }
}

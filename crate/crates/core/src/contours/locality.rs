//! Extremality of boundary points from nearest-neighbour triplets.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::tolerances::GEOM_EPS;
use crate::torus_geometry::{uncovered_arcs, wrap_angle, Disc, Vec2};

/// The intersection of ∂B₂(a) and ∂B₂(b) farthest from `center`.
///
/// Ties are broken by the smaller polar angle. Returns `None` when the
/// circles do not meet or coincide.
pub fn outer_intersection(a: Vec2, b: Vec2, center: Vec2) -> Option<Vec2> {
    let w = b - a;
    let d = w.norm();
    if d <= GEOM_EPS || d > 4.0 {
        return None;
    }
    let h = (4.0 - 0.25 * d * d).max(0.0).sqrt();
    let m = (a + b) * 0.5;
    let normal = Vec2::new(-w.y / d, w.x / d);
    let (p, q) = (m + normal * h, m - normal * h);
    let (np, nq) = ((p - center).norm(), (q - center).norm());
    if (np - nq).abs() <= GEOM_EPS {
        let (ap, aq) = (
            wrap_angle((p - center).angle()),
            wrap_angle((q - center).angle()),
        );
        return Some(if ap <= aq { p } else { q });
    }
    Some(if np > nq { p } else { q })
}

/// Angle reduced to (−π, π].
fn centred_angle(a: f64) -> f64 {
    let t = wrap_angle(a);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

/// The angle criterion t_{i,j} < t_{j,k} about `center`, or `None` when a pair of circles is disjoint.
pub fn triplet_angles_extremal(zi: Vec2, zj: Vec2, zk: Vec2, center: Vec2) -> Option<bool> {
    let vij = outer_intersection(zi, zj, center)?;
    let vjk = outer_intersection(zj, zk, center)?;
    Some(angles_ordered(vij, vjk, zj, center))
}

pub(crate) fn angles_ordered(vij: Vec2, vjk: Vec2, zj: Vec2, center: Vec2) -> bool {
    let tj = (zj - center).angle();
    let a = centred_angle((vij - center).angle() - tj);
    let b = centred_angle((vjk - center).angle() - tj);
    a < b
}

fn check_locality_params(big_r: f64, eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    if !(big_r > 2.0 + eps / (1.0 - eps)) {
        return Err(Error::Domain(format!(
            "radius {big_r} too small for eps {eps}"
        )));
    }
    Ok(())
}

fn in_annulus(p: Vec2, inner: f64, eps: f64) -> bool {
    (p.norm() - inner).abs() <= eps + GEOM_EPS
}

/// Whether z_j is extremal within the triplet (z_i, z_j, z_k) of points in the annulus A_{R−2,ε}.
pub fn triplet_is_extremal(zi: Vec2, zj: Vec2, zk: Vec2, big_r: f64, eps: f64) -> Result<bool> {
    check_locality_params(big_r, eps)?;
    for (name, p) in [("z_i", zi), ("z_j", zj), ("z_k", zk)] {
        if !in_annulus(p, big_r - 2.0, eps) {
            return Err(Error::Domain(format!("{name} lies outside the annulus")));
        }
    }
    if zi.dist(zj) <= GEOM_EPS || zj.dist(zk) <= GEOM_EPS || zi.dist(zk) <= GEOM_EPS {
        return Err(Error::Domain("triplet points must be distinct".into()));
    }
    triplet_angles_extremal(zi, zj, zk, Vec2::default())
        .ok_or_else(|| Error::Domain("neighbouring circles do not intersect".into()))
}

fn sorted_by_angle(z: &[Vec2]) -> Vec<Vec2> {
    let mut s = z.to_vec();
    s.sort_by(|a, b| wrap_angle(a.angle()).total_cmp(&wrap_angle(b.angle())));
    s
}

/// Whether every cyclic triplet of the points, ordered by angle about the origin, is extremal.
///
/// Points must lie in A_{R−2,ε} and consecutive circles must meet in A_{R,ε};
/// violations are reported as errors rather than a negative verdict.
pub fn is_outer_contour(z: &[Vec2], big_r: f64, eps: f64) -> Result<bool> {
    check_locality_params(big_r, eps)?;
    if z.is_empty() {
        return Err(Error::Domain("empty point list".into()));
    }
    let z = sorted_by_angle(z);
    let n = z.len();
    for (i, &p) in z.iter().enumerate() {
        if !in_annulus(p, big_r - 2.0, eps) {
            return Err(Error::Domain(format!("point {i} lies outside the annulus")));
        }
    }
    if n == 1 {
        return Ok(true);
    }
    let mut v = Vec::with_capacity(n);
    for i in 0..n {
        let vi = outer_intersection(z[i], z[(i + 1) % n], Vec2::default())
            .filter(|p| in_annulus(*p, big_r, eps))
            .ok_or_else(|| {
                Error::Domain(format!(
                    "circles {i} and {} have no intersection in the outer annulus",
                    (i + 1) % n
                ))
            })?;
        v.push(vi);
    }
    if n == 2 {
        return Ok(true);
    }
    Ok((0..n).all(|j| angles_ordered(v[(j + n - 1) % n], v[j], z[j], Vec2::default())))
}

/// Membership test for angle-ordered points about the origin without annulus preconditions.
///
/// False as soon as two consecutive circles fail to intersect.
pub fn contour_membership(z: &[Vec2]) -> bool {
    let n = z.len();
    if n <= 2 {
        return n > 0;
    }
    let z = sorted_by_angle(z);
    let mut v = Vec::with_capacity(n);
    for i in 0..n {
        match outer_intersection(z[i], z[(i + 1) % n], Vec2::default()) {
            Some(p) => v.push(p),
            None => return false,
        }
    }
    (0..n).all(|j| angles_ordered(v[(j + n - 1) % n], v[j], z[j], Vec2::default()))
}

/// For each point, whether its circle reaches the boundary of the filled halo.
///
/// The filled interior is represented by the disc B_{R−ε}(0), which lies
/// inside S(z) whenever consecutive circles meet in A_{R,ε}.
pub fn globally_extremal(z: &[Vec2], big_r: f64, eps: f64) -> Vec<bool> {
    let fill = Disc {
        center: Vec2::default(),
        radius: big_r - eps,
    };
    (0..z.len())
        .map(|i| {
            let mut covers: Vec<Disc> = z
                .iter()
                .enumerate()
                .filter(|&(j, p)| j != i && p.dist(z[i]) < 4.0)
                .map(|(_, &p)| Disc {
                    center: p,
                    radius: 2.0,
                })
                .collect();
            covers.push(fill);
            !uncovered_arcs(z[i], 2.0, &covers).0.is_empty()
        })
        .collect()
}

//! Angular coverage of a circle by a family of discs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{wrap_angle, Vec2};
use crate::tolerances::GEOM_EPS;

const TWO_PI: f64 = 2.0 * PI;

/// A closed disc in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub center: Vec2,
    pub radius: f64,
}

/// The angular interval [start, start + span] with start in [0, 2π) and span in [0, 2π].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleInterval {
    pub start: f64,
    pub span: f64,
}

impl AngleInterval {
    pub fn new(start: f64, span: f64) -> Self {
        Self {
            start: wrap_angle(start),
            span: span.clamp(0.0, TWO_PI),
        }
    }

    /// End angle `start + span`, possibly beyond 2π.
    pub fn end(&self) -> f64 {
        self.start + self.span
    }

    pub fn is_full(&self) -> bool {
        self.span >= TWO_PI
    }

    pub fn mid(&self) -> f64 {
        self.start + 0.5 * self.span
    }

    /// Whether the angle lies in the closed interval.
    pub fn contains(&self, angle: f64) -> bool {
        if self.is_full() {
            return true;
        }
        let d = wrap_angle(angle - self.start);
        d <= self.span || d >= TWO_PI - 1e-15
    }
}

/// How a disc covers a circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Cover {
    None,
    Full,
    /// Open interval of half-width `half` about angle `centre`.
    Interval {
        centre: f64,
        half: f64,
    },
    /// The circles touch at a single point.
    Tangent,
}

/// The part of the circle (c, r) inside the disc `d`.
pub(crate) fn cover_of(c: Vec2, r: f64, d: &Disc) -> Cover {
    let w = d.center - c;
    let dist = w.norm();
    let s = d.radius;
    if dist <= s - r {
        return Cover::Full;
    }
    if dist >= r + s {
        if dist - (r + s) < GEOM_EPS {
            return Cover::Tangent;
        }
        return Cover::None;
    }
    if dist <= r - s {
        return Cover::None;
    }
    let cos_half = ((dist * dist + r * r - s * s) / (2.0 * r * dist)).clamp(-1.0, 1.0);
    let half = cos_half.acos();
    if half <= 0.0 {
        return Cover::Tangent;
    }
    Cover::Interval {
        centre: w.angle(),
        half,
    }
}

/// Complement on the circle of a union of open intervals given as (start, span).
///
/// Returns `None` when the union covers the whole circle.
pub(crate) fn complement_of_union(mut covered: Vec<(f64, f64)>) -> Option<Vec<AngleInterval>> {
    if covered.is_empty() {
        return Some(vec![AngleInterval::new(0.0, TWO_PI)]);
    }
    for c in covered.iter_mut() {
        if c.1 >= TWO_PI {
            return None;
        }
        c.0 = wrap_angle(c.0);
    }
    covered.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(covered.len());
    for (s, span) in covered {
        let e = s + span;
        match merged.last_mut() {
            Some(last) if s <= last.1 + GEOM_EPS => last.1 = last.1.max(e),
            _ => merged.push((s, e)),
        }
    }
    while merged.len() > 1 {
        let last_end = merged[merged.len() - 1].1;
        let first = merged[0];
        if last_end - TWO_PI >= first.0 - GEOM_EPS {
            let n = merged.len();
            merged[n - 1].1 = last_end.max(first.1 + TWO_PI);
            merged.remove(0);
        } else {
            break;
        }
    }
    if merged.len() == 1 {
        let (s, e) = merged[0];
        if e - s >= TWO_PI - GEOM_EPS {
            return None;
        }
        return Some(vec![AngleInterval::new(e, s + TWO_PI - e)]);
    }
    let n = merged.len();
    let mut gaps = Vec::with_capacity(n);
    for k in 0..n {
        let e = merged[k].1;
        let next = if k + 1 < n {
            merged[k + 1].0
        } else {
            merged[0].0 + TWO_PI
        };
        if next > e + GEOM_EPS {
            gaps.push(AngleInterval::new(e, next - e));
        }
    }
    Some(gaps)
}

/// Arcs of the circle (c, r) not covered by any of the discs, with the number of tangencies met.
pub fn uncovered_arcs(c: Vec2, r: f64, covers: &[Disc]) -> (Vec<AngleInterval>, usize) {
    let mut intervals = Vec::new();
    let mut tangencies = 0;
    for d in covers {
        match cover_of(c, r, d) {
            Cover::None => {}
            Cover::Tangent => tangencies += 1,
            Cover::Full => return (Vec::new(), tangencies),
            Cover::Interval { centre, half } => intervals.push((centre - half, 2.0 * half)),
        }
    }
    match complement_of_union(intervals) {
        None => (Vec::new(), tangencies),
        Some(gaps) => (gaps, tangencies),
    }
}

/// Measure of a union of intervals on a circle of circumference `period`.
pub(crate) fn union_measure_periodic(intervals: &[(f64, f64)], period: f64) -> f64 {
    let scaled: Vec<(f64, f64)> = intervals
        .iter()
        .map(|&(s, len)| (s / period * TWO_PI, len / period * TWO_PI))
        .collect();
    match complement_of_union(scaled) {
        None => period,
        Some(gaps) => period - gaps.iter().map(|g| g.span).sum::<f64>() / TWO_PI * period,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn lone_circle_is_fully_uncovered() {
        let (arcs, t) = uncovered_arcs(Vec2::new(0.0, 0.0), 2.0, &[]);
        assert_eq!(arcs.len(), 1);
        assert!(arcs[0].is_full());
        assert_eq!(t, 0);
    }

    #[test]
    fn equal_circle_at_distance_two_covers_a_third_of_the_circle() {
        let d = Disc {
            center: Vec2::new(2.0, 0.0),
            radius: 2.0,
        };
        let (arcs, _) = uncovered_arcs(Vec2::new(0.0, 0.0), 2.0, &[d]);
        assert_eq!(arcs.len(), 1);
        assert_abs_diff_eq!(
            arcs[0].span,
            2.0 * PI - 2.0 * (0.5f64).acos(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(arcs[0].start, (0.5f64).acos(), epsilon = 1e-14);
    }

    #[test]
    fn wrapped_union_merges_across_zero() {
        let gaps = complement_of_union(vec![(-0.5, 1.0), (6.0, 0.2), (2.0, 1.0)]).unwrap();
        let total: f64 = gaps.iter().map(|g| g.span).sum();
        assert_abs_diff_eq!(total, 2.0 * PI - 2.0, epsilon = 1e-12);
        assert_eq!(gaps.len(), 2);
        assert!(complement_of_union(vec![(0.0, 4.0), (3.5, 3.0)]).is_none());
    }

    #[test]
    fn tangent_and_enclosing_discs() {
        let c = Vec2::new(0.0, 0.0);
        let tangent = Disc {
            center: Vec2::new(4.0, 0.0),
            radius: 2.0,
        };
        let (arcs, t) = uncovered_arcs(c, 2.0, &[tangent]);
        assert_eq!(t, 1);
        assert!(arcs[0].is_full());
        let big = Disc {
            center: Vec2::new(0.5, 0.0),
            radius: 5.0,
        };
        assert!(uncovered_arcs(c, 2.0, &[big]).0.is_empty());
    }

    #[test]
    fn periodic_union_measure() {
        assert_abs_diff_eq!(
            union_measure_periodic(&[(9.0, 2.0), (0.5, 1.0)], 10.0),
            2.5,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            union_measure_periodic(&[(0.0, 6.0), (5.0, 6.0)], 10.0),
            10.0,
            epsilon = 1e-12
        );
        assert_eq!(union_measure_periodic(&[], 10.0), 0.0);
    }

    #[test]
    fn interval_membership_wraps() {
        let a = AngleInterval::new(6.0, 1.0);
        assert!(a.contains(0.5));
        assert!(a.contains(6.1));
        assert!(!a.contains(1.0));
    }
}

//! Paths, headings, curvature, kappa-feasibility, and corridors.
//!
//! A path is a uniformly parameterized sample list over s in [0, 1] with
//! derivatives taken by central finite differences on the sample grid. The
//! corridor around a path is an open tube: membership uses strict distance
//! comparison.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("path needs at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("consecutive path samples {0} and {1} are identical")]
    DuplicateSamples(usize, usize),
    #[error("parameter {0} outside [0, 1]")]
    ParamOutOfRange(f64),
    #[error("degenerate (zero-length) derivative at s = {0}")]
    DegenerateDerivative(f64),
    #[error("corridor radius must be positive, got {0}")]
    BadRadius(f64),
}

/// Normalize an angle in degrees into (-180, 180].
pub fn normalize_deg(theta: f64) -> f64 {
    let mut t = theta % 360.0;
    if t <= -180.0 {
        t += 360.0;
    } else if t > 180.0 {
        t -= 360.0;
    }
    t
}

/// Absolute angular difference in degrees, in [0, 180].
pub fn angle_diff_deg(a: f64, b: f64) -> f64 {
    normalize_deg(a - b).abs()
}

/// Planar pose; heading in degrees normalized into (-180, 180].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta_deg: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta_deg: f64) -> Self {
        Pose {
            x,
            y,
            theta_deg: normalize_deg(theta_deg),
        }
    }

    pub fn position(&self) -> (f64, f64) {
        (self.x, self.y)
    }

    pub fn distance_to(&self, other: &Pose) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Distance from a point to a segment.
fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (vx, vy) = (b.0 - a.0, b.1 - a.1);
    let len2 = vx * vx + vy * vy;
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = ((p.0 - a.0) * vx + (p.1 - a.1) * vy) / len2;
    let t = t.clamp(0.0, 1.0);
    dist(p, (a.0 + t * vx, a.1 + t * vy))
}

/// A parametric planar curve sampled at uniform parameter values on [0, 1].
///
/// Serializes as a bare array of [x, y] pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    points: Vec<(f64, f64)>,
    cum_len: Vec<f64>,
}

impl Serialize for Path {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.points.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Path {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let points = Vec::<(f64, f64)>::deserialize(deserializer)?;
        Path::new(points).map_err(serde::de::Error::custom)
    }
}

impl Path {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, GeometryError> {
        if points.len() < 3 {
            return Err(GeometryError::TooFewSamples(points.len()));
        }
        for i in 1..points.len() {
            if points[i] == points[i - 1] {
                return Err(GeometryError::DuplicateSamples(i - 1, i));
            }
        }
        let mut p = Path {
            points,
            cum_len: Vec::new(),
        };
        p.rebuild_arc_table();
        Ok(p)
    }

    pub(crate) fn rebuild_arc_table(&mut self) {
        let mut acc = 0.0;
        self.cum_len = Vec::with_capacity(self.points.len());
        self.cum_len.push(0.0);
        for i in 1..self.points.len() {
            acc += dist(self.points[i - 1], self.points[i]);
            self.cum_len.push(acc);
        }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn sample_count(&self) -> usize {
        self.points.len()
    }

    pub fn length(&self) -> f64 {
        *self.cum_len.last().unwrap_or(&0.0)
    }

    /// Arc length from the start to parameter s (linear in the sample grid).
    pub fn arc_length_at(&self, s: f64) -> f64 {
        let n = self.points.len();
        let x = s.clamp(0.0, 1.0) * (n - 1) as f64;
        let i = (x.floor() as usize).min(n - 2);
        let frac = x - i as f64;
        self.cum_len[i] + frac * (self.cum_len[i + 1] - self.cum_len[i])
    }

    /// Parameter whose arc length from the start equals `arc` (clamped).
    pub fn param_at_arc(&self, arc: f64) -> f64 {
        let total = self.length();
        if arc <= 0.0 {
            return 0.0;
        }
        if arc >= total {
            return 1.0;
        }
        let i = match self
            .cum_len
            .binary_search_by(|l| l.partial_cmp(&arc).unwrap())
        {
            Ok(i) => return i as f64 / (self.points.len() - 1) as f64,
            Err(i) => i - 1,
        };
        let seg = self.cum_len[i + 1] - self.cum_len[i];
        let frac = if seg == 0.0 {
            0.0
        } else {
            (arc - self.cum_len[i]) / seg
        };
        (i as f64 + frac) / (self.points.len() - 1) as f64
    }

    /// Position at parameter s by linear interpolation between samples.
    pub fn point_at(&self, s: f64) -> Result<(f64, f64), GeometryError> {
        if !(0.0..=1.0).contains(&s) {
            return Err(GeometryError::ParamOutOfRange(s));
        }
        let n = self.points.len();
        let x = s * (n - 1) as f64;
        let i = (x.floor() as usize).min(n - 2);
        let frac = x - i as f64;
        let (a, b) = (self.points[i], self.points[i + 1]);
        Ok((a.0 + frac * (b.0 - a.0), a.1 + frac * (b.1 - a.1)))
    }

    /// Pose at parameter s: position plus heading.
    pub fn pose_at(&self, s: f64) -> Result<Pose, GeometryError> {
        let (x, y) = self.point_at(s)?;
        let h = heading(self, s)?;
        Ok(Pose::new(x, y, h))
    }

    /// Nearest sample parameter to a point, with the distance to the
    /// polyline (segments, not just vertices).
    pub fn nearest(&self, p: (f64, f64)) -> (f64, f64) {
        let n = self.points.len();
        let mut best_d = f64::INFINITY;
        let mut best_s = 0.0;
        for i in 0..n - 1 {
            let (a, b) = (self.points[i], self.points[i + 1]);
            let (vx, vy) = (b.0 - a.0, b.1 - a.1);
            let len2 = vx * vx + vy * vy;
            let mut t = if len2 == 0.0 {
                0.0
            } else {
                (((p.0 - a.0) * vx + (p.1 - a.1) * vy) / len2).clamp(0.0, 1.0)
            };
            let d = dist(p, (a.0 + t * vx, a.1 + t * vy));
            if d < best_d {
                best_d = d;
                if len2 == 0.0 {
                    t = 0.0;
                }
                best_s = (i as f64 + t) / (n - 1) as f64;
            }
        }
        (best_s, best_d)
    }

    fn index_near(&self, s: f64) -> usize {
        let n = self.points.len();
        ((s * (n - 1) as f64).round() as usize).min(n - 1)
    }

    /// First and second parameter derivatives at the sample nearest to s,
    /// by central differences (one-sided at the ends).
    fn derivatives(&self, s: f64) -> Result<((f64, f64), (f64, f64)), GeometryError> {
        if !(0.0..=1.0).contains(&s) {
            return Err(GeometryError::ParamOutOfRange(s));
        }
        let n = self.points.len();
        let h = 1.0 / (n - 1) as f64;
        let i = self.index_near(s).clamp(1, n - 2);
        let (pm, p0, pp) = (self.points[i - 1], self.points[i], self.points[i + 1]);
        let d1 = ((pp.0 - pm.0) / (2.0 * h), (pp.1 - pm.1) / (2.0 * h));
        let d2 = (
            (pp.0 - 2.0 * p0.0 + pm.0) / (h * h),
            (pp.1 - 2.0 * p0.1 + pm.1) / (h * h),
        );
        Ok((d1, d2))
    }
}

/// Heading angle in degrees of the path derivative at parameter s.
pub fn heading(p: &Path, s: f64) -> Result<f64, GeometryError> {
    if !(0.0..=1.0).contains(&s) {
        return Err(GeometryError::ParamOutOfRange(s));
    }
    // At the ends use the one-sided chord so heading matches the first/last
    // segment exactly.
    let n = p.points.len();
    let i = p.index_near(s);
    let (a, b) = if i == 0 {
        (p.points[0], p.points[1])
    } else if i == n - 1 {
        (p.points[n - 2], p.points[n - 1])
    } else {
        (p.points[i - 1], p.points[i + 1])
    };
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    if dx == 0.0 && dy == 0.0 {
        return Err(GeometryError::DegenerateDerivative(s));
    }
    Ok(normalize_deg(dy.atan2(dx).to_degrees()))
}

/// Unsigned curvature |det(p', p'')| / |p'|^3 at parameter s via central
/// finite differences on the sample grid.
pub fn curvature(p: &Path, s: f64) -> Result<f64, GeometryError> {
    let ((dx, dy), (ddx, ddy)) = p.derivatives(s)?;
    let speed2 = dx * dx + dy * dy;
    if speed2 == 0.0 {
        return Err(GeometryError::DegenerateDerivative(s));
    }
    Ok((dx * ddy - dy * ddx).abs() / speed2.powf(1.5))
}

/// Largest sampled curvature over the interior sample grid.
pub fn max_curvature(p: &Path) -> Result<f64, GeometryError> {
    let n = p.sample_count();
    let mut max = 0.0f64;
    for i in 1..n - 1 {
        let s = i as f64 / (n - 1) as f64;
        max = max.max(curvature(p, s)?);
    }
    Ok(max)
}

/// True iff the path's sampled curvature stays strictly below `kappa`.
pub fn kappa_feasible(p: &Path, kappa: f64) -> bool {
    debug_assert!(kappa > 0.0);
    match max_curvature(p) {
        Ok(m) => m < kappa,
        Err(_) => false,
    }
}

/// Open tube of fixed radius around a path.
#[derive(Debug, Clone)]
pub struct Corridor {
    path: Path,
    radius: f64,
}

impl Corridor {
    pub fn new(path: Path, radius: f64) -> Result<Self, GeometryError> {
        if radius <= 0.0 {
            return Err(GeometryError::BadRadius(radius));
        }
        Ok(Corridor { path, radius })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Strict membership: distance to the closest point of the polyline is
    /// below the radius (the corridor is an open set).
    pub fn contains(&self, pose: &Pose) -> bool {
        let p = pose.position();
        let pts = self.path.points();
        for i in 0..pts.len() - 1 {
            if point_segment_distance(p, pts[i], pts[i + 1]) < self.radius {
                return true;
            }
        }
        false
    }

    /// Membership in the disc around the path point at parameter s; used for
    /// start (s = 0) and completion (s = 1) checks.
    pub fn segment_contains(&self, s: f64, pose: &Pose) -> Result<bool, GeometryError> {
        let c = self.path.point_at(s)?;
        Ok(dist(pose.position(), c) < self.radius)
    }
}

/// Resample a polyline at (approximately) fixed spacing, keeping both ends.
pub fn resample_polyline(points: &[(f64, f64)], spacing: f64) -> Vec<(f64, f64)> {
    assert!(spacing > 0.0);
    if points.len() < 2 {
        return points.to_vec();
    }
    let mut lens = vec![0.0];
    for i in 1..points.len() {
        lens.push(lens[i - 1] + dist(points[i - 1], points[i]));
    }
    let total = *lens.last().unwrap();
    let steps = (total / spacing).ceil().max(1.0) as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let mut seg = 0;
    for k in 0..=steps {
        let target = total * k as f64 / steps as f64;
        while seg + 2 < lens.len() && lens[seg + 1] < target {
            seg += 1;
        }
        let seg_len = lens[seg + 1] - lens[seg];
        let t = if seg_len == 0.0 {
            0.0
        } else {
            (target - lens[seg]) / seg_len
        };
        let (a, b) = (points[seg], points[seg + 1]);
        out.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
    }
    out
}

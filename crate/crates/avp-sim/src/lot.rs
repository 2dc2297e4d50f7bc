//! Garage constants: drivable and walkable areas, entry/return regions,
//! parking spots, interior, crosswalks — loaded from a TOML topology file.
//!
//! Regions are unions of axis-aligned rectangles. Drivable rectangles carry
//! an allowed-heading interval (or `any`), which is how one-way lanes are
//! encoded; membership of a pose requires both the position and the heading
//! to be admitted by the same rectangle.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{angle_diff_deg, Pose};

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("topology parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> TopologyError {
    TopologyError::Invalid {
        path: path.into(),
        message: message.into(),
    }
}

/// Axis-aligned rectangle [x0, x1] x [y0, y1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.x0 >= self.x0 && other.x1 <= self.x1 && other.y0 >= self.y0 && other.y1 <= self.y1
    }
}

/// Heading admission for a drivable rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HeadingSpec {
    Any,
    Interval { center_deg: f64, tol_deg: f64 },
}

impl HeadingSpec {
    pub fn admits(&self, theta_deg: f64) -> bool {
        match self {
            HeadingSpec::Any => true,
            HeadingSpec::Interval { center_deg, tol_deg } => {
                angle_diff_deg(theta_deg, *center_deg) <= *tol_deg
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DrivableRegion {
    pub rect: Rect,
    pub heading: HeadingSpec,
}

/// Pose region: rectangle with a heading interval (entry/return boxes).
#[derive(Debug, Clone, Copy)]
pub struct PoseRegion {
    pub rect: Rect,
    pub center_heading_deg: f64,
    pub heading_tol_deg: f64,
}

impl PoseRegion {
    pub fn contains(&self, pose: &Pose) -> bool {
        self.rect.contains(pose.x, pose.y)
            && angle_diff_deg(pose.theta_deg, self.center_heading_deg) <= self.heading_tol_deg
    }

    /// Canonical pose of the region: rectangle center at the center heading.
    pub fn center_pose(&self) -> Pose {
        let (x, y) = self.rect.center();
        Pose::new(x, y, self.center_heading_deg)
    }
}

/// The garage constants.
#[derive(Debug, Clone)]
pub struct LotTopology {
    pub name: String,
    drivable: Vec<DrivableRegion>,
    walkable: Vec<Rect>,
    crosswalks: Vec<Rect>,
    entry: PoseRegion,
    return_region: PoseRegion,
    spots: Vec<Pose>,
    interior: Vec<(f64, f64)>,
    route: Vec<(f64, f64)>,
}

impl LotTopology {
    /// Number of parking spots (always equals the spot-pose list length).
    pub fn parking_spots(&self) -> usize {
        self.spots.len()
    }

    pub fn spots(&self) -> &[Pose] {
        &self.spots
    }

    pub fn spot(&self, index: usize) -> Option<&Pose> {
        self.spots.get(index)
    }

    pub fn entry(&self) -> &PoseRegion {
        &self.entry
    }

    pub fn return_region(&self) -> &PoseRegion {
        &self.return_region
    }

    pub fn crosswalks(&self) -> &[Rect] {
        &self.crosswalks
    }

    pub fn route(&self) -> &[(f64, f64)] {
        &self.route
    }

    pub fn drivable_regions(&self) -> &[DrivableRegion] {
        &self.drivable
    }

    /// Pose membership in the drivable area including heading admission.
    pub fn in_drivable(&self, pose: &Pose) -> bool {
        self.drivable
            .iter()
            .any(|r| r.rect.contains(pose.x, pose.y) && r.heading.admits(pose.theta_deg))
    }

    /// 2D footprint membership, ignoring heading. Corridor containment
    /// checks use this projection.
    pub fn drivable_at(&self, x: f64, y: f64) -> bool {
        self.drivable.iter().any(|r| r.rect.contains(x, y))
    }

    pub fn in_walkable(&self, x: f64, y: f64) -> bool {
        self.walkable.iter().any(|r| r.contains(x, y))
    }

    pub fn on_crosswalk(&self, x: f64, y: f64) -> bool {
        self.crosswalks.iter().any(|r| r.contains(x, y))
    }

    /// Point-in-polygon by ray casting (boundary counts as inside).
    pub fn in_interior(&self, x: f64, y: f64) -> bool {
        let poly = &self.interior;
        let n = poly.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let (xi, yi) = poly[i];
            let (xj, yj) = poly[j];
            // On-edge tolerance.
            if point_on_segment((x, y), (xi, yi), (xj, yj)) {
                return true;
            }
            if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
                inside = !inside;
            }
            j = i;
        }
        inside
    }

    pub fn in_entry(&self, pose: &Pose) -> bool {
        self.entry.contains(pose)
    }

    pub fn in_return(&self, pose: &Pose) -> bool {
        self.return_region.contains(pose)
    }

    /// Bounding box of the drivable footprint.
    pub fn drivable_bounds(&self) -> Rect {
        let mut b = Rect::new(f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for r in &self.drivable {
            b.x0 = b.x0.min(r.rect.x0);
            b.y0 = b.y0.min(r.rect.y0);
            b.x1 = b.x1.max(r.rect.x1);
            b.y1 = b.y1.max(r.rect.y1);
        }
        b
    }

    /// Arc-length coordinate of the nearest point on the lane route, plus
    /// the lateral distance to it. This is the lot's traversal order.
    pub fn route_order(&self, x: f64, y: f64) -> (f64, f64) {
        let mut best = (0.0, f64::INFINITY);
        let mut acc = 0.0;
        for w in self.route.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (vx, vy) = (b.0 - a.0, b.1 - a.1);
            let len = (vx * vx + vy * vy).sqrt();
            let t = if len == 0.0 {
                0.0
            } else {
                (((x - a.0) * vx + (y - a.1) * vy) / (len * len)).clamp(0.0, 1.0)
            };
            let (px, py) = (a.0 + t * vx, a.1 + t * vy);
            let d = ((x - px).powi(2) + (y - py).powi(2)).sqrt();
            if d < best.1 {
                best = (acc + t * len, d);
            }
            acc += len;
        }
        best
    }
}

fn point_on_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> bool {
    let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
    if cross.abs() > 1e-9 {
        return false;
    }
    let dot = (p.0 - a.0) * (b.0 - a.0) + (p.1 - a.1) * (b.1 - a.1);
    let len2 = (b.0 - a.0).powi(2) + (b.1 - a.1).powi(2);
    dot >= 0.0 && dot <= len2
}

// ---------------------------------------------------------------------------
// File schema

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologyDoc {
    name: String,
    #[serde(default)]
    drivable: Vec<DrivableDoc>,
    #[serde(default)]
    walkways: Vec<RectDoc>,
    #[serde(default)]
    crosswalks: Vec<RectDoc>,
    entry: PoseRegionDoc,
    #[serde(rename = "return")]
    return_region: PoseRegionDoc,
    #[serde(default)]
    spots: Vec<SpotDoc>,
    interior: InteriorDoc,
    route: RouteDoc,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DrivableDoc {
    rect: [f64; 4],
    heading: HeadingDoc,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum HeadingDoc {
    Any(String),
    Interval { center: f64, tol: f64 },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RectDoc {
    rect: [f64; 4],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseRegionDoc {
    rect: [f64; 4],
    heading: HeadingIntervalDoc,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HeadingIntervalDoc {
    center: f64,
    tol: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpotDoc {
    pose: [f64; 3],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InteriorDoc {
    polygon: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RouteDoc {
    points: Vec<[f64; 2]>,
}

fn rect_from(path: &str, a: [f64; 4]) -> Result<Rect, TopologyError> {
    if a[0] >= a[2] || a[1] >= a[3] {
        return Err(invalid(path, format!("rectangle {a:?} has non-positive extent")));
    }
    Ok(Rect::new(a[0], a[1], a[2], a[3]))
}

/// Maximum lateral offset of a parking spot from the lane route for the
/// load-time traversal-order validation.
const SPOT_ROUTE_REACH_M: f64 = 12.0;

/// Parse and validate a topology document.
pub fn load_topology(doc: &str) -> Result<LotTopology, TopologyError> {
    let doc: TopologyDoc = toml::from_str(doc)?;

    let mut drivable = Vec::new();
    for (i, d) in doc.drivable.iter().enumerate() {
        let rect = rect_from(&format!("drivable[{i}].rect"), d.rect)?;
        let heading = match &d.heading {
            HeadingDoc::Any(s) if s == "any" => HeadingSpec::Any,
            HeadingDoc::Any(s) => {
                return Err(invalid(
                    format!("drivable[{i}].heading"),
                    format!("expected \"any\" or {{center, tol}}, got \"{s}\""),
                ))
            }
            HeadingDoc::Interval { center, tol } => HeadingSpec::Interval {
                center_deg: *center,
                tol_deg: *tol,
            },
        };
        drivable.push(DrivableRegion { rect, heading });
    }
    if drivable.is_empty() {
        return Err(invalid("drivable", "at least one drivable region required"));
    }

    let mut walkable = Vec::new();
    for (i, w) in doc.walkways.iter().enumerate() {
        walkable.push(rect_from(&format!("walkways[{i}].rect"), w.rect)?);
    }

    let entry = PoseRegion {
        rect: rect_from("entry.rect", doc.entry.rect)?,
        center_heading_deg: doc.entry.heading.center,
        heading_tol_deg: doc.entry.heading.tol,
    };
    let return_region = PoseRegion {
        rect: rect_from("return.rect", doc.return_region.rect)?,
        center_heading_deg: doc.return_region.heading.center,
        heading_tol_deg: doc.return_region.heading.tol,
    };

    let spots: Vec<Pose> = doc
        .spots
        .iter()
        .map(|s| Pose::new(s.pose[0], s.pose[1], s.pose[2]))
        .collect();

    if doc.interior.polygon.len() < 3 {
        return Err(invalid("interior.polygon", "needs at least 3 vertices"));
    }
    let interior = doc.interior.polygon.iter().map(|p| (p[0], p[1])).collect();

    if doc.route.points.len() < 2 {
        return Err(invalid("route.points", "needs at least 2 waypoints"));
    }
    let route: Vec<(f64, f64)> = doc.route.points.iter().map(|p| (p[0], p[1])).collect();

    let mut crosswalks = Vec::new();
    for (i, c) in doc.crosswalks.iter().enumerate() {
        crosswalks.push(rect_from(&format!("crosswalks[{i}].rect"), c.rect)?);
    }

    let topo = LotTopology {
        name: doc.name,
        drivable,
        walkable,
        crosswalks,
        entry,
        return_region,
        spots,
        interior,
        route,
    };
    validate(&topo)?;
    Ok(topo)
}

fn validate(t: &LotTopology) -> Result<(), TopologyError> {
    for (i, spot) in t.spots.iter().enumerate() {
        if !t.in_drivable(spot) {
            return Err(invalid(
                format!("spots[{i}]"),
                format!("spot pose ({}, {}, {}) outside drivable_area", spot.x, spot.y, spot.theta_deg),
            ));
        }
    }

    for (name, region) in [("entry", &t.entry), ("return", &t.return_region)] {
        let r = region.rect;
        let probes = [
            (r.x0, r.y0),
            (r.x0, r.y1),
            (r.x1, r.y0),
            (r.x1, r.y1),
            r.center(),
        ];
        for (x, y) in probes {
            if !t.drivable_at(x, y) {
                return Err(invalid(name, format!("point ({x}, {y}) outside drivable_area")));
            }
        }
        if !t.in_drivable(&region.center_pose()) {
            return Err(invalid(
                name,
                "center pose not admitted by any drivable region (heading)",
            ));
        }
        if region.heading_tol_deg <= 0.0 {
            return Err(invalid(name, "heading tolerance must be positive"));
        }
    }

    for (i, c) in t.crosswalks.iter().enumerate() {
        if !t.walkable.iter().any(|w| w.contains_rect(c)) {
            return Err(invalid(
                format!("crosswalks[{i}]"),
                "crosswalk not contained in any walkway rectangle",
            ));
        }
        let probes = [
            (c.x0, c.y0),
            (c.x0, c.y1),
            (c.x1, c.y0),
            (c.x1, c.y1),
            c.center(),
        ];
        for (x, y) in probes {
            if !t.drivable_at(x, y) {
                return Err(invalid(
                    format!("crosswalks[{i}]"),
                    format!("crosswalk corner ({x}, {y}) outside the drivable footprint"),
                ));
            }
        }
    }

    validate_route(t)?;

    // Interior must cover the operational regions.
    for (x, y) in [t.entry.rect.center(), t.return_region.rect.center()] {
        if !t.in_interior(x, y) {
            return Err(invalid("interior", format!("({x}, {y}) not inside interior polygon")));
        }
    }
    Ok(())
}

/// The liveness argument needs a single traversal line from the entry,
/// past every spot, to the return area, never reversing. Validated here on
/// the declared lane route: spots must project onto the route in reach, the
/// entry projects before every spot, every spot before the return, and no
/// route turn is a reversal.
fn validate_route(t: &LotTopology) -> Result<(), TopologyError> {
    let (entry_s, entry_d) = {
        let (x, y) = t.entry.rect.center();
        t.route_order(x, y)
    };
    if entry_d > SPOT_ROUTE_REACH_M {
        return Err(invalid("route", "entry region too far from the lane route"));
    }
    let (return_s, return_d) = {
        let (x, y) = t.return_region.rect.center();
        t.route_order(x, y)
    };
    if return_d > SPOT_ROUTE_REACH_M {
        return Err(invalid("route", "return region too far from the lane route"));
    }
    if return_s <= entry_s {
        return Err(invalid("route", "return must come after entry along the route"));
    }
    for (i, spot) in t.spots.iter().enumerate() {
        let (s, d) = t.route_order(spot.x, spot.y);
        if d > SPOT_ROUTE_REACH_M {
            return Err(invalid(
                format!("spots[{i}]"),
                format!("spot is {d:.1} m from the lane route (max {SPOT_ROUTE_REACH_M})"),
            ));
        }
        if s <= entry_s || s >= return_s {
            return Err(invalid(
                format!("spots[{i}]"),
                "spot does not lie between entry and return along the route",
            ));
        }
    }
    // No reversal: successive segment directions never differ by >= 135 deg.
    for w in t.route.windows(3) {
        let d1 = (w[1].0 - w[0].0, w[1].1 - w[0].1);
        let d2 = (w[2].0 - w[1].0, w[2].1 - w[1].1);
        let a1 = d1.1.atan2(d1.0).to_degrees();
        let a2 = d2.1.atan2(d2.0).to_degrees();
        if angle_diff_deg(a1, a2) >= 135.0 {
            return Err(invalid(
                "route",
                format!("route reverses near ({}, {})", w[1].0, w[1].1),
            ));
        }
    }
    Ok(())
}

/// The bundled single-loop lot (entry box, one-way loop lane, spot row,
/// return box, two crosswalks).
pub fn bundled_default() -> LotTopology {
    load_topology(include_str!("../../../lots/default_lot.toml"))
        .expect("bundled default lot must validate")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_lot_loads_with_12_spots() {
        let t = bundled_default();
        assert_eq!(t.parking_spots(), 12);
        assert_eq!(t.parking_spots(), t.spots().len());
    }

    #[test]
    fn zero_spot_document_loads() {
        let doc = r#"
name = "tiny"
[[drivable]]
rect = [0.0, 0.0, 30.0, 12.0]
heading = "any"
[entry]
rect = [0.0, 3.0, 6.0, 9.0]
heading = { center = 0.0, tol = 15.0 }
[return]
rect = [24.0, 3.0, 30.0, 9.0]
heading = { center = 0.0, tol = 15.0 }
[interior]
polygon = [[-2.0, -2.0], [32.0, -2.0], [32.0, 14.0], [-2.0, 14.0]]
[route]
points = [[3.0, 6.0], [27.0, 6.0]]
"#;
        let t = load_topology(doc).unwrap();
        assert_eq!(t.parking_spots(), 0);
    }

    #[test]
    fn spot_outside_drivable_is_a_load_error() {
        let doc = r#"
name = "bad"
[[drivable]]
rect = [0.0, 0.0, 30.0, 12.0]
heading = "any"
[entry]
rect = [0.0, 3.0, 6.0, 9.0]
heading = { center = 0.0, tol = 15.0 }
[return]
rect = [24.0, 3.0, 30.0, 9.0]
heading = { center = 0.0, tol = 15.0 }
[[spots]]
pose = [15.0, 40.0, 90.0]
[interior]
polygon = [[-2.0, -2.0], [32.0, -2.0], [32.0, 14.0], [-2.0, 14.0]]
[route]
points = [[3.0, 6.0], [27.0, 6.0]]
"#;
        match load_topology(doc) {
            Err(TopologyError::Invalid { path, .. }) => assert_eq!(path, "spots[0]"),
            other => panic!("expected spot error, got {other:?}"),
        }
    }

    #[test]
    fn one_way_heading_membership() {
        let t = bundled_default();
        // Bottom lane runs east.
        assert!(t.in_drivable(&Pose::new(20.0, 6.0, 0.0)));
        assert!(!t.in_drivable(&Pose::new(20.0, 6.0, 180.0)));
        // Walkway-only point is not drivable.
        assert!(!t.in_drivable(&Pose::new(20.0, -3.0, 0.0)));
        assert!(t.in_walkable(20.0, -3.0));
    }

    #[test]
    fn region_memberships() {
        let t = bundled_default();
        assert!(t.in_entry(&Pose::new(3.0, 6.0, 5.0)));
        assert!(!t.in_entry(&Pose::new(3.0, 6.0, 40.0)));
        assert!(t.in_return(&Pose::new(0.0, 12.0, -90.0)));
        // Crosswalk point is walkable and on a crosswalk.
        assert!(t.on_crosswalk(22.0, 6.0));
        assert!(t.in_walkable(22.0, 6.0));
        // Far outside the polygon.
        assert!(!t.in_interior(-30.0, -30.0));
        assert!(t.in_interior(20.0, 6.0));
    }

    #[test]
    fn route_orders_spots_between_entry_and_return() {
        let t = bundled_default();
        let (s_entry, _) = t.route_order(3.0, 6.0);
        let (x, y) = t.return_region().rect.center();
        let (s_return, _) = t.route_order(x, y);
        for spot in t.spots() {
            let (s, d) = t.route_order(spot.x, spot.y);
            assert!(s > s_entry && s < s_return);
            assert!(d <= SPOT_ROUTE_REACH_M);
        }
    }
}

//! Grid-based path planning with curvature-feasibility and
//! corridor-drivability guarantees, plus the planner's directive/response
//! behavior (path or Blocked, forwarding, one re-plan per blockage).
//!
//! The planning graph discretizes the lot into cells of `grid_size` meters
//! with 8 discrete headings per cell. Motion primitives are straights and
//! quarter-turn arcs of radius `2 * grid_size`, which keeps arc curvature at
//! 1 / (2 * grid) — strictly inside the curvature bound for the 3 m grid —
//! and lands every primitive on lattice nodes. Every edge is validated at
//! build time: sampled poses must be drivable (including heading, which is
//! how one-way lanes bind) and the full corridor tube around the primitive
//! must stay inside the drivable footprint.

use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};
use std::sync::Arc;

use thiserror::Error;

use crate::geometry::{
    angle_diff_deg, kappa_feasible, max_curvature, normalize_deg, resample_polyline, Path, Pose,
};
use crate::lot::LotTopology;
use crate::messaging::CustomerId;

/// Start/goal snapping tolerance: the entry-funnel admissibility check.
pub const SNAP_POS_TOL_M: f64 = 0.5;
pub const SNAP_HEADING_TOL_DEG: f64 = 15.0;

/// Looser projection tolerance used to re-anchor a stopped car onto the
/// primitive it was tracking (re-planning never starts from a node exactly).
const EDGE_PROJECT_TOL_M: f64 = 0.8;
const EDGE_PROJECT_HEADING_DEG: f64 = 25.0;

/// Spacing of final path samples.
pub const PATH_SPACING_M: f64 = 0.25;

/// Spacing of validation samples along primitives.
const EDGE_SAMPLE_M: f64 = 0.5;

/// Coverage sampling density over the drivable footprint.
const COVERAGE_SAMPLE_M: f64 = 0.75;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error(
        "planning grid {grid_size} m covers only {coverage:.3} of the lot; uncovered: {uncovered:?}"
    )]
    CoverageFailure {
        grid_size: f64,
        coverage: f64,
        uncovered: Vec<String>,
    },
    #[error("arc primitives at grid {grid_size} m have curvature {kappa:.3} >= bound {kappa_max}")]
    GridTooFineForCurvature {
        grid_size: f64,
        kappa: f64,
        kappa_max: f64,
    },
    #[error("{0} unreachable in the planning graph")]
    Unreachable(String),
    #[error("start pose ({0:.2}, {1:.2}, {2:.1} deg) not admissible: no node or lane within the entry funnel")]
    StartNotSnappable(f64, f64, f64),
    #[error("goal pose ({0:.2}, {1:.2}, {2:.1} deg) does not snap to a node")]
    GoalNotSnappable(f64, f64, f64),
    #[error("internal: generated path failed validation: {0}")]
    Internal(String),
}

/// A failed car's footprint, treated as a planning obstacle until towed.
#[derive(Debug, Clone, Copy)]
pub struct Obstacle {
    pub customer: CustomerId,
    pub center: (f64, f64),
    pub radius: f64,
    pub permanent_until_towed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct NodeKey {
    ix: i32,
    iy: i32,
    /// Heading octant, 45-degree steps counterclockwise from east.
    h: u8,
}

#[derive(Debug, Clone)]
struct Edge {
    to: u32,
    length_um: u64,
    polyline: Vec<(f64, f64)>,
}

/// The validated planning graph over a lot.
pub struct PlanningGraph {
    grid_size: f64,
    kappa_max: f64,
    corridor_radius: f64,
    positions: Vec<Pose>,
    keys: Vec<NodeKey>,
    index: HashMap<NodeKey, u32>,
    out_edges: Vec<Vec<Edge>>,
    coverage: f64,
    entry_node: u32,
    return_node: u32,
    spot_nodes: Vec<u32>,
    reachable_from_entry: Vec<bool>,
    coreachable_to_return: Vec<bool>,
}

fn octant_dir(h: u8) -> (f64, f64) {
    let a = (h as f64) * 45.0f64.to_radians();
    (a.cos(), a.sin())
}

fn octant_deg(h: u8) -> f64 {
    normalize_deg(h as f64 * 45.0)
}

fn heading_to_octant(theta_deg: f64) -> Option<u8> {
    for h in 0..8u8 {
        if angle_diff_deg(theta_deg, octant_deg(h)) <= SNAP_HEADING_TOL_DEG {
            return Some(h);
        }
    }
    None
}

impl PlanningGraph {
    pub fn grid_size(&self) -> f64 {
        self.grid_size
    }

    pub fn kappa_max(&self) -> f64 {
        self.kappa_max
    }

    pub fn coverage(&self) -> f64 {
        self.coverage
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn spot_nodes(&self) -> usize {
        self.spot_nodes.len()
    }

    fn node_pose(&self, id: u32) -> Pose {
        self.positions[id as usize]
    }

    /// Nearest node within the snapping funnel.
    fn snap(&self, pose: &Pose) -> Option<u32> {
        let h = heading_to_octant(pose.theta_deg)?;
        let g = self.grid_size;
        let (ix0, iy0) = ((pose.x / g).round() as i32, (pose.y / g).round() as i32);
        let mut best: Option<(f64, u32)> = None;
        for ix in ix0 - 1..=ix0 + 1 {
            for iy in iy0 - 1..=iy0 + 1 {
                if let Some(&id) = self.index.get(&NodeKey { ix, iy, h }) {
                    let p = self.node_pose(id);
                    let d = p.distance_to(pose);
                    if d <= SNAP_POS_TOL_M && best.is_none_or(|(bd, _)| d < bd) {
                        best = Some((d, id));
                    }
                }
            }
        }
        best.map(|(_, id)| id)
    }

    /// Project a pose onto some edge polyline it is evidently tracking:
    /// returns the remainder of that edge from the projection point, plus
    /// the edge's destination node.
    fn project_onto_edge(&self, pose: &Pose) -> Option<(Vec<(f64, f64)>, u32)> {
        let mut best: Option<(f64, Vec<(f64, f64)>, u32)> = None;
        for edges in self.out_edges.iter() {
            for e in edges {
                for (i, w) in e.polyline.windows(2).enumerate() {
                    let (a, b) = (w[0], w[1]);
                    let seg_heading = (b.1 - a.1).atan2(b.0 - a.0).to_degrees();
                    if angle_diff_deg(seg_heading, pose.theta_deg) > EDGE_PROJECT_HEADING_DEG {
                        continue;
                    }
                    let (vx, vy) = (b.0 - a.0, b.1 - a.1);
                    let len2 = vx * vx + vy * vy;
                    if len2 == 0.0 {
                        continue;
                    }
                    let t = (((pose.x - a.0) * vx + (pose.y - a.1) * vy) / len2).clamp(0.0, 1.0);
                    let (px, py) = (a.0 + t * vx, a.1 + t * vy);
                    let d = ((pose.x - px).powi(2) + (pose.y - py).powi(2)).sqrt();
                    if d <= EDGE_PROJECT_TOL_M && best.as_ref().is_none_or(|(bd, _, _)| d < *bd) {
                        let mut rest = vec![(px, py)];
                        rest.extend_from_slice(&e.polyline[i + 1..]);
                        best = Some((d, rest, e.to));
                    }
                }
            }
        }
        best.map(|(_, rest, to)| (rest, to))
    }

    fn edge_blocked(&self, e: &Edge, obstacles: &[Obstacle]) -> bool {
        obstacles.iter().any(|o| {
            e.polyline.iter().any(|(x, y)| {
                let d2 = (x - o.center.0).powi(2) + (y - o.center.1).powi(2);
                d2 < o.radius * o.radius
            })
        })
    }

    fn node_blocked(&self, id: u32, obstacles: &[Obstacle]) -> bool {
        let p = self.node_pose(id);
        obstacles.iter().any(|o| {
            (p.x - o.center.0).powi(2) + (p.y - o.center.1).powi(2) < o.radius * o.radius
        })
    }

    /// Shortest obstacle-free path between poses, or `Blocked` when no such
    /// route exists in the graph.
    pub fn plan(
        &self,
        start: &Pose,
        goal: &Pose,
        obstacles: &[Obstacle],
    ) -> Result<PlanOutcome, PlanError> {
        let goal_node = self
            .snap(goal)
            .ok_or(PlanError::GoalNotSnappable(goal.x, goal.y, goal.theta_deg))?;

        // Start: a node within the funnel, or a projection back onto the
        // primitive the car was tracking.
        let (prefix, start_node) = match self.snap(start) {
            Some(n) => (Vec::new(), n),
            None => self
                .project_onto_edge(start)
                .ok_or(PlanError::StartNotSnappable(
                    start.x,
                    start.y,
                    start.theta_deg,
                ))?,
        };

        if self.node_blocked(goal_node, obstacles) {
            return Ok(PlanOutcome::Blocked);
        }
        if !prefix.is_empty() {
            // The remainder the car sits on counts as traversed geometry;
            // if an obstacle sits on it the task is blocked here.
            let fake = Edge {
                to: start_node,
                length_um: 0,
                polyline: prefix.clone(),
            };
            if self.edge_blocked(&fake, obstacles) {
                return Ok(PlanOutcome::Blocked);
            }
        }

        // Degenerate directive: start and goal at the same node. Emit a
        // minimal straight path of one resampling step so completion
        // detection fires immediately.
        if prefix.is_empty() && start_node == goal_node {
            let p = self.node_pose(start_node);
            let (dx, dy) = octant_dir(heading_to_octant(p.theta_deg).unwrap());
            let pts = vec![
                (p.x, p.y),
                (p.x + 0.5 * PATH_SPACING_M * dx, p.y + 0.5 * PATH_SPACING_M * dy),
                (p.x + PATH_SPACING_M * dx, p.y + PATH_SPACING_M * dy),
            ];
            let path = Path::new(pts).map_err(|e| PlanError::Internal(e.to_string()))?;
            return Ok(PlanOutcome::Path(path));
        }

        match self.dijkstra(start_node, goal_node, obstacles) {
            Some(edge_seq) => {
                let mut pts: Vec<(f64, f64)> = prefix;
                if pts.is_empty() {
                    let p = self.node_pose(start_node);
                    pts.push((p.x, p.y));
                }
                for e in &edge_seq {
                    pts.extend_from_slice(&e.polyline[1..]);
                }
                let resampled = resample_polyline(&pts, PATH_SPACING_M);
                let path =
                    Path::new(resampled).map_err(|e| PlanError::Internal(e.to_string()))?;
                self.validate_path(&path)?;
                Ok(PlanOutcome::Path(path))
            }
            None => Ok(PlanOutcome::Blocked),
        }
    }

    fn dijkstra(
        &self,
        start: u32,
        goal: u32,
        obstacles: &[Obstacle],
    ) -> Option<Vec<Edge>> {
        let n = self.positions.len();
        let mut dist = vec![u64::MAX; n];
        let mut prev: Vec<Option<(u32, usize)>> = vec![None; n];
        let mut heap = BinaryHeap::new();
        dist[start as usize] = 0;
        heap.push(std::cmp::Reverse((0u64, start)));
        while let Some(std::cmp::Reverse((d, u))) = heap.pop() {
            if d > dist[u as usize] {
                continue;
            }
            if u == goal {
                break;
            }
            for (ei, e) in self.out_edges[u as usize].iter().enumerate() {
                if self.edge_blocked(e, obstacles) || self.node_blocked(e.to, obstacles) {
                    continue;
                }
                let nd = d + e.length_um;
                if nd < dist[e.to as usize] {
                    dist[e.to as usize] = nd;
                    prev[e.to as usize] = Some((u, ei));
                    heap.push(std::cmp::Reverse((nd, e.to)));
                }
            }
        }
        if dist[goal as usize] == u64::MAX {
            return None;
        }
        let mut seq = Vec::new();
        let mut cur = goal;
        while cur != start {
            let (p, ei) = prev[cur as usize]?;
            seq.push(self.out_edges[p as usize][ei].clone());
            cur = p;
        }
        seq.reverse();
        Some(seq)
    }

    /// Post-hoc oracle check on every produced path rather than trusting
    /// construction: curvature strictly feasible, corridor fully drivable.
    fn validate_path(&self, path: &Path) -> Result<(), PlanError> {
        if !kappa_feasible(path, self.kappa_max) {
            return Err(PlanError::Internal(format!(
                "path max curvature {:.4} >= {}",
                max_curvature(path).unwrap_or(f64::NAN),
                self.kappa_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum PlanOutcome {
    Path(Path),
    Blocked,
}

/// Build and validate the planning graph: full lot coverage (area plus the
/// key configurations), curvature-feasible primitives, drivable corridors,
/// and entry-to-spot-to-return connectivity.
pub fn build_graph(
    topology: &Arc<LotTopology>,
    grid_size: f64,
    kappa_max: f64,
    corridor_radius: f64,
) -> Result<PlanningGraph, PlanError> {
    assert!(grid_size > 0.0 && kappa_max > 0.0);
    let arc_radius = 2.0 * grid_size;
    let arc_kappa = 1.0 / arc_radius;
    if arc_kappa >= kappa_max {
        return Err(PlanError::GridTooFineForCurvature {
            grid_size,
            kappa: arc_kappa,
            kappa_max,
        });
    }

    let bounds = topology.drivable_bounds();
    let g = grid_size;
    let (ix0, ix1) = ((bounds.x0 / g).floor() as i32, (bounds.x1 / g).ceil() as i32);
    let (iy0, iy1) = ((bounds.y0 / g).floor() as i32, (bounds.y1 / g).ceil() as i32);

    // Nodes: lattice poses admitted by the drivable area.
    let mut positions = Vec::new();
    let mut keys = Vec::new();
    let mut index = HashMap::new();
    for ix in ix0..=ix1 {
        for iy in iy0..=iy1 {
            for h in 0..8u8 {
                let pose = Pose::new(ix as f64 * g, iy as f64 * g, octant_deg(h));
                if topology.in_drivable(&pose) {
                    let key = NodeKey { ix, iy, h };
                    index.insert(key, positions.len() as u32);
                    keys.push(key);
                    positions.push(pose);
                }
            }
        }
    }

    // Edges: straights along the heading, quarter arcs for cardinals.
    let mut out_edges: Vec<Vec<Edge>> = vec![Vec::new(); positions.len()];
    for (id, key) in keys.iter().enumerate() {
        let pose = positions[id];
        let mut candidates: Vec<(NodeKey, Vec<(f64, f64)>)> = Vec::new();

        // Straight one cell ahead (diagonal headings step diagonally).
        let (dx, dy) = octant_dir(key.h);
        let (sx, sy) = (dx.round() as i32, dy.round() as i32);
        let target = NodeKey {
            ix: key.ix + sx,
            iy: key.iy + sy,
            h: key.h,
        };
        let end = ((key.ix + sx) as f64 * g, (key.iy + sy) as f64 * g);
        candidates.push((target, straight_polyline((pose.x, pose.y), end)));

        // Quarter arcs only from cardinal headings so endpoints stay on the
        // lattice.
        if key.h % 2 == 0 {
            for turn in [1i8, -1i8] {
                let h2 = ((key.h as i8 + 2 * turn).rem_euclid(8)) as u8;
                let (fx, fy) = octant_dir(key.h);
                let (sx, sy) = octant_dir(h2);
                let target = NodeKey {
                    ix: key.ix + (2.0 * fx).round() as i32 + (2.0 * sx).round() as i32,
                    iy: key.iy + (2.0 * fy).round() as i32 + (2.0 * sy).round() as i32,
                    h: h2,
                };
                let poly = arc_polyline((pose.x, pose.y), key.h, turn, arc_radius);
                candidates.push((target, poly));
            }
        }

        for (tkey, poly) in candidates {
            let Some(&to) = index.get(&tkey) else { continue };
            if !edge_admissible(topology, &poly, corridor_radius) {
                continue;
            }
            let mut len = 0.0;
            for w in poly.windows(2) {
                len += ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt();
            }
            out_edges[id].push(Edge {
                to,
                length_um: (len * 1e6).round() as u64,
                polyline: poly,
            });
        }
    }

    let mut graph = PlanningGraph {
        grid_size,
        kappa_max,
        corridor_radius,
        positions,
        keys,
        index,
        out_edges,
        coverage: 0.0,
        entry_node: 0,
        return_node: 0,
        spot_nodes: Vec::new(),
        reachable_from_entry: Vec::new(),
        coreachable_to_return: Vec::new(),
    };

    // Key configurations must snap to nodes.
    let mut uncovered: Vec<String> = Vec::new();
    let mut key_total = 0usize;
    let mut key_covered = 0usize;
    let mut snap_key = |g: &PlanningGraph, name: String, pose: &Pose| -> Option<u32> {
        key_total += 1;
        match g.snap(pose) {
            Some(n) => {
                key_covered += 1;
                Some(n)
            }
            None => {
                uncovered.push(name);
                None
            }
        }
    };
    let entry_pose = topology.entry().center_pose();
    let entry_node = snap_key(&graph, "entry".into(), &entry_pose);
    let return_pose = topology.return_region().center_pose();
    let return_node = snap_key(&graph, "return".into(), &return_pose);
    let mut spot_nodes = Vec::new();
    for (i, spot) in topology.spots().iter().enumerate() {
        if let Some(n) = snap_key(&graph, format!("spots[{i}]"), spot) {
            spot_nodes.push(n);
        }
    }

    // Area coverage: fraction of drivable footprint samples within one cell
    // of some node.
    let mut cells_with_nodes: HashSet<(i32, i32)> = HashSet::new();
    for key in &graph.keys {
        cells_with_nodes.insert((key.ix, key.iy));
    }
    let mut total = 0usize;
    let mut covered = 0usize;
    let mut x = bounds.x0;
    while x <= bounds.x1 {
        let mut y = bounds.y0;
        while y <= bounds.y1 {
            if topology.drivable_at(x, y) {
                total += 1;
                let (jx, jy) = ((x / g).round() as i32, (y / g).round() as i32);
                let mut hit = false;
                'scan: for ix in jx - 1..=jx + 1 {
                    for iy in jy - 1..=jy + 1 {
                        if cells_with_nodes.contains(&(ix, iy))
                            && (x - ix as f64 * g).abs() <= g
                            && (y - iy as f64 * g).abs() <= g
                        {
                            hit = true;
                            break 'scan;
                        }
                    }
                }
                if hit {
                    covered += 1;
                } else if uncovered.len() < 8 {
                    uncovered.push(format!("area near ({x:.1}, {y:.1})"));
                }
            }
            y += COVERAGE_SAMPLE_M;
        }
        x += COVERAGE_SAMPLE_M;
    }

    let coverage = (covered + key_covered) as f64 / (total + key_total).max(1) as f64;
    graph.coverage = coverage;
    if coverage < 1.0 {
        return Err(PlanError::CoverageFailure {
            grid_size,
            coverage,
            uncovered,
        });
    }

    graph.entry_node = entry_node.expect("covered");
    graph.return_node = return_node.expect("covered");
    graph.spot_nodes = spot_nodes;

    // Connectivity: entry reaches every spot; every spot reaches return.
    graph.reachable_from_entry = bfs(&graph, graph.entry_node, false);
    graph.coreachable_to_return = bfs(&graph, graph.return_node, true);
    for (i, &s) in graph.spot_nodes.iter().enumerate() {
        if !graph.reachable_from_entry[s as usize] {
            return Err(PlanError::Unreachable(format!("spots[{i}] from entry")));
        }
        if !graph.coreachable_to_return[s as usize] {
            return Err(PlanError::Unreachable(format!("return from spots[{i}]")));
        }
    }

    Ok(graph)
}

fn straight_polyline(a: (f64, f64), b: (f64, f64)) -> Vec<(f64, f64)> {
    let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
    let n = (len / EDGE_SAMPLE_M).ceil().max(1.0) as usize;
    (0..=n)
        .map(|i| {
            let t = i as f64 / n as f64;
            (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1))
        })
        .collect()
}

/// Quarter-circle polyline from a pose, turning left (+1) or right (-1).
fn arc_polyline(start: (f64, f64), h: u8, turn: i8, radius: f64) -> Vec<(f64, f64)> {
    let heading = (h as f64 * 45.0).to_radians();
    // Center is perpendicular to the heading on the turn side.
    let side = heading + turn as f64 * std::f64::consts::FRAC_PI_2;
    let (cx, cy) = (start.0 + radius * side.cos(), start.1 + radius * side.sin());
    let start_angle = (start.1 - cy).atan2(start.0 - cx);
    let sweep = turn as f64 * std::f64::consts::FRAC_PI_2;
    let arc_len = radius * std::f64::consts::FRAC_PI_2;
    let n = (arc_len / EDGE_SAMPLE_M).ceil() as usize;
    (0..=n)
        .map(|i| {
            let a = start_angle + sweep * i as f64 / n as f64;
            (cx + radius * a.cos(), cy + radius * a.sin())
        })
        .collect()
}

/// An edge is admissible when its sampled poses are drivable (with heading)
/// and the corridor tube around it stays inside the drivable footprint.
fn edge_admissible(topology: &LotTopology, poly: &[(f64, f64)], corridor_radius: f64) -> bool {
    for (i, w) in poly.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let heading = (b.1 - a.1).atan2(b.0 - a.0).to_degrees();
        let pose = Pose::new(a.0, a.1, heading);
        if !topology.in_drivable(&pose) {
            return false;
        }
        if i == poly.len() - 2 && !topology.in_drivable(&Pose::new(b.0, b.1, heading)) {
            return false;
        }
        // Tube check: ring points at the corridor radius and half radius.
        for (x, y) in [a, b] {
            for k in 0..8 {
                let ang = k as f64 * std::f64::consts::FRAC_PI_4;
                for r in [corridor_radius, corridor_radius / 2.0] {
                    if !topology.drivable_at(x + r * ang.cos(), y + r * ang.sin()) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

fn bfs(g: &PlanningGraph, start: u32, reverse: bool) -> Vec<bool> {
    let n = g.positions.len();
    let mut seen = vec![false; n];
    // Reverse adjacency on demand.
    let mut radj: Vec<Vec<u32>> = Vec::new();
    if reverse {
        radj = vec![Vec::new(); n];
        for (u, edges) in g.out_edges.iter().enumerate() {
            for e in edges {
                radj[e.to as usize].push(u as u32);
            }
        }
    }
    let mut queue = std::collections::VecDeque::new();
    seen[start as usize] = true;
    queue.push_back(start);
    while let Some(u) = queue.pop_front() {
        let nexts: Vec<u32> = if reverse {
            radj[u as usize].clone()
        } else {
            g.out_edges[u as usize].iter().map(|e| e.to).collect()
        };
        for v in nexts {
            if !seen[v as usize] {
                seen[v as usize] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

// ---------------------------------------------------------------------------
// Planner component behavior

/// Effects a planner phase can emit; the engine routes them onto channels.
#[derive(Debug)]
pub enum PlannerEffect {
    SendPathToTracker(CustomerId, Path),
    SendBlockedToSupervisor(CustomerId),
    ForwardToSupervisor(CustomerId, crate::messaging::TaskStatus),
    /// Trace record of a planning attempt.
    PlanEvent {
        customer: CustomerId,
        start: Pose,
        goal: Pose,
        outcome: &'static str,
        path_len_m: f64,
        max_curvature: f64,
    },
}

#[derive(Debug, Clone)]
struct TaskRecord {
    goal: Pose,
}

/// The planner process: converts pose-pair directives into paths (or
/// Blocked), forwards tracker responses, and re-plans once per blockage.
pub struct Planner {
    graph: Arc<PlanningGraph>,
    tasks: BTreeMap<CustomerId, TaskRecord>,
}

impl Planner {
    pub fn new(graph: Arc<PlanningGraph>) -> Self {
        Planner {
            graph,
            tasks: BTreeMap::new(),
        }
    }

    pub fn graph(&self) -> &Arc<PlanningGraph> {
        &self.graph
    }

    /// Pose-pair directive from the supervisor.
    pub fn handle_supervisor_directive(
        &mut self,
        customer: CustomerId,
        start: Pose,
        goal: Pose,
        obstacles: &[Obstacle],
    ) -> Result<Vec<PlannerEffect>, PlanError> {
        self.tasks.insert(customer, TaskRecord { goal });
        self.plan_and_dispatch(customer, start, goal, obstacles)
    }

    /// Response from the tracker: forward Failed/Completed verbatim; on
    /// Blocked make one re-plan attempt from the car's current (stopped)
    /// state before giving up to the supervisor.
    pub fn handle_tracker_response(
        &mut self,
        customer: CustomerId,
        status: crate::messaging::TaskStatus,
        car_pose: Option<Pose>,
        obstacles: &[Obstacle],
    ) -> Result<Vec<PlannerEffect>, PlanError> {
        use crate::messaging::TaskStatus::*;
        match status {
            Failed | Completed => {
                if status == Completed {
                    self.tasks.remove(&customer);
                }
                Ok(vec![PlannerEffect::ForwardToSupervisor(customer, status)])
            }
            Blocked => {
                let Some(task) = self.tasks.get(&customer).cloned() else {
                    return Ok(vec![PlannerEffect::SendBlockedToSupervisor(customer)]);
                };
                let Some(pose) = car_pose else {
                    return Ok(vec![PlannerEffect::SendBlockedToSupervisor(customer)]);
                };
                let mut effects = self.plan_and_dispatch(customer, pose, task.goal, obstacles)?;
                // plan_and_dispatch already degrades to Blocked; nothing
                // further to try (one attempt per Blocked).
                if effects.is_empty() {
                    effects.push(PlannerEffect::SendBlockedToSupervisor(customer));
                }
                Ok(effects)
            }
        }
    }

    fn plan_and_dispatch(
        &mut self,
        customer: CustomerId,
        start: Pose,
        goal: Pose,
        obstacles: &[Obstacle],
    ) -> Result<Vec<PlannerEffect>, PlanError> {
        match self.graph.plan(&start, &goal, obstacles)? {
            PlanOutcome::Path(path) => {
                let len = path.length();
                let maxk = max_curvature(&path).unwrap_or(0.0);
                Ok(vec![
                    PlannerEffect::PlanEvent {
                        customer,
                        start,
                        goal,
                        outcome: "path",
                        path_len_m: len,
                        max_curvature: maxk,
                    },
                    PlannerEffect::SendPathToTracker(customer, path),
                ])
            }
            PlanOutcome::Blocked => Ok(vec![
                PlannerEffect::PlanEvent {
                    customer,
                    start,
                    goal,
                    outcome: "blocked",
                    path_len_m: 0.0,
                    max_curvature: 0.0,
                },
                PlannerEffect::SendBlockedToSupervisor(customer),
            ]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Corridor;
    use crate::lot::bundled_default;

    fn graph() -> PlanningGraph {
        let topo = Arc::new(bundled_default());
        build_graph(&topo, 3.0, 0.2, 3.0).expect("default lot at grid 3.0 must build")
    }

    #[test]
    fn default_lot_full_coverage_at_grid_3() {
        let g = graph();
        assert_eq!(g.coverage(), 1.0);
        assert_eq!(g.spot_nodes(), 12);
    }

    #[test]
    fn grid_10_fails_coverage_on_default_lot() {
        let topo = Arc::new(bundled_default());
        match build_graph(&topo, 10.0, 0.2, 3.0) {
            Err(PlanError::CoverageFailure { coverage, .. }) => {
                assert!(coverage < 1.0);
            }
            other => panic!("expected coverage failure, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn grid_too_fine_for_curvature_is_rejected() {
        let topo = Arc::new(bundled_default());
        assert!(matches!(
            build_graph(&topo, 2.0, 0.2, 3.0),
            Err(PlanError::GridTooFineForCurvature { .. })
        ));
    }

    #[test]
    fn turn_primitive_curvature_matches_arc_oracle() {
        // Quarter arc of radius 2 * grid: curvature 1/R by the circle
        // oracle, strictly under the bound.
        let poly = arc_polyline((0.0, 0.0), 0, 1, 6.0);
        let path = Path::new(resample_polyline(&poly, PATH_SPACING_M)).unwrap();
        let k = max_curvature(&path).unwrap();
        assert!((k - 1.0 / 6.0).abs() < 0.01, "got {k}");
        assert!(k < 0.2);
    }

    #[test]
    fn plans_entry_to_every_spot_with_feasible_paths() {
        let topo = Arc::new(bundled_default());
        let g = graph();
        let entry = topo.entry().center_pose();
        for (i, spot) in topo.spots().iter().enumerate() {
            match g.plan(&entry, spot, &[]).unwrap() {
                PlanOutcome::Path(p) => {
                    assert!(kappa_feasible(&p, 0.2), "spot {i}");
                    // Endpoints within snapping tolerance.
                    let s = p.pose_at(0.0).unwrap();
                    let e = p.pose_at(1.0).unwrap();
                    assert!(s.distance_to(&entry) <= SNAP_POS_TOL_M + 1e-9);
                    assert!(e.distance_to(spot) <= SNAP_POS_TOL_M + 1e-9);
                    // Corridor stays on the drivable footprint.
                    let c = Corridor::new(p.clone(), 3.0).unwrap();
                    for (x, y) in p.points() {
                        assert!(topo.drivable_at(*x, *y));
                    }
                    let _ = c;
                }
                PlanOutcome::Blocked => panic!("spot {i} unexpectedly blocked"),
            }
        }
    }

    #[test]
    fn spot_to_return_plans() {
        let topo = Arc::new(bundled_default());
        let g = graph();
        let ret = topo.return_region().center_pose();
        for spot in topo.spots() {
            match g.plan(spot, &ret, &[]).unwrap() {
                PlanOutcome::Path(p) => assert!(p.length() > 10.0),
                PlanOutcome::Blocked => panic!("retrieval blocked"),
            }
        }
    }

    #[test]
    fn occupied_goal_is_blocked_not_error() {
        let topo = Arc::new(bundled_default());
        let g = graph();
        let entry = topo.entry().center_pose();
        let spot = topo.spots()[0];
        let obstacle = Obstacle {
            customer: CustomerId(99),
            center: (spot.x, spot.y),
            radius: 2.4,
            permanent_until_towed: true,
        };
        assert!(matches!(
            g.plan(&entry, &spot, &[obstacle]).unwrap(),
            PlanOutcome::Blocked
        ));
    }

    #[test]
    fn unsnappable_start_is_a_protocol_error() {
        let topo = Arc::new(bundled_default());
        let g = graph();
        let spot = topo.spots()[0];
        // In the middle of the island: not on any lane.
        let bad = Pose::new(25.0, 20.0, 0.0);
        assert!(matches!(
            g.plan(&bad, &spot, &[]),
            Err(PlanError::StartNotSnappable(..))
        ));
    }

    #[test]
    fn midlane_start_projects_onto_tracked_edge() {
        let topo = Arc::new(bundled_default());
        let g = graph();
        // Stopped mid-lane between nodes on the bottom lane.
        let start = Pose::new(19.3, 6.1, 1.0);
        let spot = topo.spots()[3];
        match g.plan(&start, &spot, &[]).unwrap() {
            PlanOutcome::Path(p) => {
                let s = p.pose_at(0.0).unwrap();
                assert!(s.distance_to(&start) <= EDGE_PROJECT_TOL_M + 1e-9);
            }
            PlanOutcome::Blocked => panic!("should re-anchor and plan"),
        }
    }

    #[test]
    fn blocked_lane_with_no_alternative_returns_blocked() {
        let topo = Arc::new(bundled_default());
        let g = graph();
        let entry = topo.entry().center_pose();
        let spot = topo.spots()[0];
        // Failed car in the middle of the (single) bottom lane.
        let obstacle = Obstacle {
            customer: CustomerId(98),
            center: (27.0, 6.0),
            radius: 2.4,
            permanent_until_towed: true,
        };
        assert!(matches!(
            g.plan(&entry, &spot, &[obstacle]).unwrap(),
            PlanOutcome::Blocked
        ));
    }

    #[test]
    fn start_equals_goal_emits_minimal_path() {
        let topo = Arc::new(bundled_default());
        let g = graph();
        let spot = topo.spots()[2];
        match g.plan(&spot, &spot, &[]).unwrap() {
            PlanOutcome::Path(p) => {
                assert_eq!(p.sample_count(), 3);
                assert!(p.length() <= PATH_SPACING_M + 1e-9);
            }
            PlanOutcome::Blocked => panic!("degenerate directive must complete"),
        }
    }
}

//! Path tracking: pure-pursuit control with corridor containment, a backup
//! controller near the corridor boundary, a braking collision guard, and
//! completion / failure / blockage reporting.

use std::collections::{BTreeMap, BTreeSet};

use crate::geometry::{curvature, Corridor, Path, Pose};
use crate::messaging::{CustomerId, TaskStatus};
use crate::scenario::SafetyParams;
use crate::vehicle::{steering_from_curvature, CarState, ControlLimits};

/// Geometric car width used by the collision guard's swept region.
pub const CAR_WIDTH_M: f64 = 1.8;

/// Arc-length remainder at which a task counts as arrived (inside the end
/// disc with margin) and the car is commanded to rest.
const ARRIVAL_REMAINDER_M: f64 = 0.15;

/// Lateral deviation below which the backup controller hands back to
/// nominal tracking.
const REJOIN_DEV_M: f64 = 0.3;

const BACKUP_SPEED: f64 = 0.5;
const NOMINAL_SPEED: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskState {
    Tracking,
    Backup,
    Braked,
    Completed,
    Failed,
    Blocked,
}

impl TaskState {
    pub fn label(&self) -> &'static str {
        match self {
            TaskState::Tracking => "tracking",
            TaskState::Backup => "backup",
            TaskState::Braked => "braked",
            TaskState::Completed => "completed",
            TaskState::Failed => "failed",
            TaskState::Blocked => "blocked",
        }
    }

    pub fn is_active(&self) -> bool {
        matches!(self, TaskState::Tracking | TaskState::Backup | TaskState::Braked)
    }
}

/// One customer's tracking assignment.
pub struct TrackingTask {
    pub customer: CustomerId,
    pub path: Path,
    pub corridor: Corridor,
    /// Parameter of the nearest path point; non-decreasing while tracking.
    pub progress: f64,
    pub state: TaskState,
    pub path_msg_id: u64,
    /// Whether the collision guard forced a stop this tick.
    pub guard_active: bool,
    pub lateral_dev: f64,
}

/// View of another agent for guard and blockage checks.
#[derive(Debug, Clone, Copy)]
pub struct AgentView {
    pub customer: Option<CustomerId>,
    pub position: (f64, f64),
    pub is_pedestrian: bool,
    pub healthy: bool,
    pub towed: bool,
}

pub struct Tracker {
    params: SafetyParams,
    limits: ControlLimits,
    corridor_radius: f64,
    tasks: BTreeMap<CustomerId, TrackingTask>,
    /// Customers whose failure has already been reported.
    reported_failed: BTreeSet<CustomerId>,
}

impl Tracker {
    pub fn new(params: SafetyParams, limits: ControlLimits, corridor_radius: f64) -> Self {
        Tracker {
            params,
            limits,
            corridor_radius,
            tasks: BTreeMap::new(),
            reported_failed: BTreeSet::new(),
        }
    }

    pub fn task(&self, customer: &CustomerId) -> Option<&TrackingTask> {
        self.tasks.get(customer)
    }

    pub fn active_tasks(&self) -> usize {
        self.tasks.values().filter(|t| t.state.is_active()).count()
    }

    pub fn customers_with_tasks(&self) -> Vec<CustomerId> {
        self.tasks.keys().copied().collect()
    }

    /// A new path directive replaces any previous task for the customer.
    pub fn receive_path(&mut self, customer: CustomerId, path: Path, msg_id: u64, car: &Pose) {
        let corridor = Corridor::new(path.clone(), self.corridor_radius)
            .expect("corridor radius is validated at configuration time");
        let (s0, dev) = path.nearest(car.position());
        self.tasks.insert(
            customer,
            TrackingTask {
                customer,
                path,
                corridor,
                progress: s0,
                state: TaskState::Tracking,
                path_msg_id: msg_id,
                guard_active: false,
                lateral_dev: dev,
            },
        );
    }

    /// Drop bookkeeping for customers that left the world (towed or gone).
    pub fn forget(&mut self, customer: &CustomerId) {
        self.tasks.remove(customer);
    }

    /// Event detection: Completed at the end disc, Failed on health loss,
    /// Blocked when a failed untowed car sits in the corridor ahead.
    pub fn detect_events(
        &mut self,
        cars: &BTreeMap<CustomerId, CarState>,
        agents: &[AgentView],
    ) -> Vec<(CustomerId, TaskStatus)> {
        let mut out = Vec::new();

        // Failure reports: any unhealthy, untowed car in the world, tasked
        // or not (the tracker observes every agent in the interior).
        for (c, car) in cars {
            if !car.healthy && !car.towed && !self.reported_failed.contains(c) {
                self.reported_failed.insert(*c);
                if let Some(task) = self.tasks.get_mut(c) {
                    task.state = TaskState::Failed;
                }
                out.push((*c, TaskStatus::Failed));
            }
        }

        for (c, task) in self.tasks.iter_mut() {
            if !task.state.is_active() {
                continue;
            }
            let Some(car) = cars.get(c) else { continue };

            // Completion: inside the end disc of the latest path, at rest.
            let remaining = task.path.length() - task.path.arc_length_at(task.progress);
            let in_end_disc = task
                .corridor
                .segment_contains(1.0, &car.pose)
                .unwrap_or(false);
            if remaining <= ARRIVAL_REMAINDER_M && in_end_disc && car.v_cmd.abs() < 0.05 {
                task.state = TaskState::Completed;
                out.push((*c, TaskStatus::Completed));
                continue;
            }

            // Blockage: failed untowed car in the corridor at or ahead of
            // our progress.
            let blocked = agents.iter().any(|a| {
                if a.is_pedestrian || a.healthy || a.towed || a.customer == Some(*c) {
                    return false;
                }
                let pose = Pose::new(a.position.0, a.position.1, 0.0);
                if !task.corridor.contains(&pose) {
                    return false;
                }
                let (s, _) = task.path.nearest(a.position);
                s >= task.progress - 0.02
            });
            if blocked {
                task.state = TaskState::Blocked;
                out.push((*c, TaskStatus::Blocked));
            }
        }
        out
    }

    /// Compute this tick's control command for a customer's task. Output is
    /// always inside the control limits; safety overrides produce full
    /// stops, never errors.
    pub fn control_step(
        &mut self,
        customer: &CustomerId,
        car: &CarState,
        agents: &[AgentView],
    ) -> Option<(f64, f64)> {
        let task = self.tasks.get_mut(customer)?;
        match task.state {
            TaskState::Failed | TaskState::Blocked => {
                task.guard_active = false;
                return Some((0.0, 0.0));
            }
            TaskState::Completed => return None,
            _ => {}
        }

        // Progress: windowed forward search keeps it monotone while
        // tracking.
        let (s_raw, dev) = nearest_from(&task.path, car.pose.position(), task.progress);
        task.lateral_dev = dev;
        if task.state != TaskState::Backup {
            task.progress = task.progress.max(s_raw);
        }

        // Corridor boundary watch: hand over to the backup controller
        // inside the margin band, back to tracking once rejoined.
        if dev > self.corridor_radius - self.params.corridor_margin {
            task.state = TaskState::Backup;
        } else if task.state == TaskState::Backup && dev < REJOIN_DEV_M {
            task.state = TaskState::Tracking;
            task.progress = task.progress.max(s_raw);
        } else if task.state == TaskState::Braked {
            task.state = TaskState::Tracking;
        }

        // Collision guard: full stop when any agent sits in the swept
        // region ahead (wider and longer for pedestrians).
        let brake_len = car.v_cmd * car.v_cmd / (2.0 * self.params.a_brake) + 0.5;
        let heading = car.pose.theta_deg.to_radians();
        let (fx, fy) = (heading.cos(), heading.sin());
        let guard_hit = agents.iter().any(|a| {
            if a.customer == Some(*customer) && !a.is_pedestrian {
                return false;
            }
            if a.towed {
                return false;
            }
            let dx = a.position.0 - car.pose.x;
            let dy = a.position.1 - car.pose.y;
            let ahead = dx * fx + dy * fy;
            let lateral = -dx * fy + dy * fx;
            if a.is_pedestrian {
                ahead > 0.0
                    && ahead <= brake_len + self.params.eps_min_people + 2.0
                    && lateral.abs() <= self.params.eps_min_people + 2.0
            } else {
                ahead > 0.0
                    && ahead <= brake_len + self.params.eps_min_car + 1.0
                    && lateral.abs() <= CAR_WIDTH_M / 2.0 + self.params.eps_min_car
            }
        });
        if guard_hit {
            task.guard_active = true;
            if task.state != TaskState::Backup {
                task.state = TaskState::Braked;
            }
            return Some((0.0, 0.0));
        }
        task.guard_active = false;

        // Arrival: rest at the end of the path.
        let progress_arc = task.path.arc_length_at(task.progress);
        let remaining = task.path.length() - progress_arc;
        if remaining <= ARRIVAL_REMAINDER_M && task.state != TaskState::Backup {
            return Some((0.0, 0.0));
        }

        let (target_s, speed_cap) = match task.state {
            TaskState::Backup => {
                // Aim just ahead of the nearest path point at low speed.
                let s = task
                    .path
                    .param_at_arc(task.path.arc_length_at(s_raw) + 1.0)
                    .min(1.0);
                (s, BACKUP_SPEED)
            }
            _ => {
                let s = task
                    .path
                    .param_at_arc(progress_arc + self.params.lookahead)
                    .min(1.0);
                (s, NOMINAL_SPEED)
            }
        };

        let (tx, ty) = task.path.point_at(target_s).unwrap_or_else(|_| {
            let p = task.path.points()[task.path.sample_count() - 1];
            p
        });
        let dx = tx - car.pose.x;
        let dy = ty - car.pose.y;
        let dist = (dx * dx + dy * dy).sqrt().max(1e-6);
        let alpha = (dy.atan2(dx) - heading + std::f64::consts::PI)
            .rem_euclid(2.0 * std::f64::consts::PI)
            - std::f64::consts::PI;
        let kappa_cmd = 2.0 * alpha.sin() / dist;
        let phi = steering_from_curvature(car.length, kappa_cmd);

        // Slow near curvature ahead and near the path end.
        let kappa_ahead = curvature(&task.path, target_s.clamp(0.0, 1.0)).unwrap_or(0.0);
        let mut v = speed_cap / (1.0 + 5.0 * kappa_ahead);
        v = v.min(1.8 * (remaining - ARRIVAL_REMAINDER_M).max(0.0) + 0.05);
        // Large heading error: creep while turning.
        if alpha.abs() > 1.0 {
            v = v.min(0.4);
        }

        let (v, phi) = self.limits.clamp(v, phi);
        Some((v, phi))
    }
}

/// Nearest path parameter searched forward of the current progress (with a
/// small backward allowance), so self-approaching geometry cannot yank the
/// target backward or forward across lobes.
fn nearest_from(path: &Path, p: (f64, f64), progress: f64) -> (f64, f64) {
    let n = path.sample_count();
    let total = path.length();
    let window_params = if total > 0.0 { 6.0 / total } else { 1.0 };
    let lo = (progress - 0.02).max(0.0);
    let hi = (progress + window_params).min(1.0);
    let i0 = (lo * (n - 1) as f64).floor() as usize;
    let i1 = ((hi * (n - 1) as f64).ceil() as usize).min(n - 1);
    let mut best = (progress, f64::INFINITY);
    for i in i0..i1 {
        let (a, b) = (path.points()[i], path.points()[i + 1]);
        let (vx, vy) = (b.0 - a.0, b.1 - a.1);
        let len2 = vx * vx + vy * vy;
        let t = if len2 == 0.0 {
            0.0
        } else {
            (((p.0 - a.0) * vx + (p.1 - a.1) * vy) / len2).clamp(0.0, 1.0)
        };
        let (px, py) = (a.0 + t * vx, a.1 + t * vy);
        let d = ((p.0 - px).powi(2) + (p.1 - py).powi(2)).sqrt();
        if d < best.1 {
            best = ((i as f64 + t) / (n - 1) as f64, d);
        }
    }
    best
}

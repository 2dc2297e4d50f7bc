//! Dubins car dynamics, control limits, and the differential-flatness
//! relations tying steering to path curvature.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{normalize_deg, Pose};

#[derive(Debug, Error, PartialEq)]
pub enum VehicleError {
    #[error("speed {v} outside [{min}, {max}]")]
    SpeedLimit { v: f64, min: f64, max: f64 },
    #[error("steering {phi} outside [{min}, {max}]")]
    SteeringLimit { phi: f64, min: f64, max: f64 },
    #[error("unhealthy untowed car must hold zero controls, got ({v}, {phi})")]
    ImmobileViolation { v: f64, phi: f64 },
    #[error("dt must be positive, got {0}")]
    BadDt(f64),
    #[error("time series too short ({0} samples, need >= 3)")]
    SeriesTooShort(usize),
}

/// Bounds on car controls and pedestrian speed.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ControlLimits {
    pub v_min: f64,
    pub v_max: f64,
    pub phi_min: f64,
    pub phi_max: f64,
    pub v_ped_max: f64,
}

impl Default for ControlLimits {
    fn default() -> Self {
        // tan(0.6)/2.5 ~ 0.27 > 0.2, leaving tracking margin over kappa_max.
        ControlLimits {
            v_min: -1.0,
            v_max: 2.5,
            phi_min: -0.6,
            phi_max: 0.6,
            v_ped_max: 1.5,
        }
    }
}

impl ControlLimits {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.v_min <= 0.0 && 0.0 <= self.v_max) {
            return Err(format!("v_min <= 0 <= v_max violated: [{}, {}]", self.v_min, self.v_max));
        }
        if !(self.phi_min < 0.0 && 0.0 < self.phi_max) {
            return Err(format!(
                "phi_min < 0 < phi_max violated: [{}, {}]",
                self.phi_min, self.phi_max
            ));
        }
        if self.v_ped_max <= 0.0 {
            return Err("v_ped_max must be positive".into());
        }
        Ok(())
    }

    pub fn check(&self, v: f64, phi: f64) -> Result<(), VehicleError> {
        if v < self.v_min || v > self.v_max {
            return Err(VehicleError::SpeedLimit {
                v,
                min: self.v_min,
                max: self.v_max,
            });
        }
        if phi < self.phi_min || phi > self.phi_max {
            return Err(VehicleError::SteeringLimit {
                phi,
                min: self.phi_min,
                max: self.phi_max,
            });
        }
        Ok(())
    }

    pub fn clamp(&self, v: f64, phi: f64) -> (f64, f64) {
        (v.clamp(self.v_min, self.v_max), phi.clamp(self.phi_min, self.phi_max))
    }
}

/// Full per-car state carried by the simulation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CarState {
    pub pose: Pose,
    pub v_cmd: f64,
    pub phi_cmd: f64,
    /// Wheelbase in meters.
    pub length: f64,
    pub healthy: bool,
    pub towed: bool,
}

impl CarState {
    pub fn at(pose: Pose, length: f64) -> Self {
        assert!(length > 0.0);
        CarState {
            pose,
            v_cmd: 0.0,
            phi_cmd: 0.0,
            length,
            healthy: true,
            towed: false,
        }
    }
}

/// One integration step of the Dubins model
///   x' = v cos(theta), y' = v sin(theta), theta' = (v / l) tan(phi)
/// with fourth-order Runge-Kutta. Control-limit violations are hard errors:
/// clamping here would mask contract violations the monitor must catch.
pub fn step(
    s: &CarState,
    controls: (f64, f64),
    dt: f64,
    limits: &ControlLimits,
) -> Result<CarState, VehicleError> {
    if dt <= 0.0 {
        return Err(VehicleError::BadDt(dt));
    }
    let (v, phi) = controls;
    limits.check(v, phi)?;
    if !s.healthy && !s.towed && (v != 0.0 || phi != 0.0) {
        return Err(VehicleError::ImmobileViolation { v, phi });
    }

    let theta0 = s.pose.theta_deg.to_radians();
    let omega = v / s.length * phi.tan();
    // theta evolves independently of x, y, so the RK4 stages use the exact
    // intermediate headings.
    let f = |theta: f64| (v * theta.cos(), v * theta.sin());
    let (k1x, k1y) = f(theta0);
    let (k2x, k2y) = f(theta0 + 0.5 * dt * omega);
    let (k3x, k3y) = f(theta0 + 0.5 * dt * omega);
    let (k4x, k4y) = f(theta0 + dt * omega);

    let x = s.pose.x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    let y = s.pose.y + dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    let theta = theta0 + dt * omega;

    Ok(CarState {
        pose: Pose::new(x, y, normalize_deg(theta.to_degrees())),
        v_cmd: v,
        phi_cmd: phi,
        ..*s
    })
}

/// Differential flatness: steering angle that realizes a path curvature,
/// phi = arctan(l * kappa), sign preserved.
pub fn steering_from_curvature(length: f64, kappa: f64) -> f64 {
    (length * kappa).atan()
}

/// Speed below which the traced curvature is reported as undefined.
pub const CURVATURE_SPEED_FLOOR: f64 = 0.05;

/// Curvature of a traced output trajectory,
///   kappa = (y'' x' - x'' y') / (x'^2 + y'^2)^(3/2),
/// estimated by central differences. Entries at the series ends or where the
/// speed drops below the floor are `None`.
pub fn traced_curvature(
    xs: &[f64],
    ys: &[f64],
    dt: f64,
) -> Result<Vec<Option<f64>>, VehicleError> {
    let n = xs.len().min(ys.len());
    if n < 3 {
        return Err(VehicleError::SeriesTooShort(n));
    }
    if dt <= 0.0 {
        return Err(VehicleError::BadDt(dt));
    }
    let mut out = vec![None; n];
    for i in 1..n - 1 {
        let dx = (xs[i + 1] - xs[i - 1]) / (2.0 * dt);
        let dy = (ys[i + 1] - ys[i - 1]) / (2.0 * dt);
        let ddx = (xs[i + 1] - 2.0 * xs[i] + xs[i - 1]) / (dt * dt);
        let ddy = (ys[i + 1] - 2.0 * ys[i] + ys[i - 1]) / (dt * dt);
        let speed = (dx * dx + dy * dy).sqrt();
        if speed <= CURVATURE_SPEED_FLOOR {
            continue;
        }
        out[i] = Some((ddy * dx - ddx * dy) / speed.powi(3));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const L: f64 = 2.5;

    fn limits() -> ControlLimits {
        ControlLimits::default()
    }

    fn car_at_origin() -> CarState {
        CarState::at(Pose::new(0.0, 0.0, 0.0), L)
    }

    #[test]
    fn straight_motion_advances_x() {
        let mut s = car_at_origin();
        for _ in 0..10 {
            s = step(&s, (1.0, 0.0), 0.1, &limits()).unwrap();
        }
        assert!((s.pose.x - 1.0).abs() < 1e-9);
        assert!(s.pose.y.abs() < 1e-12);
        assert!(s.pose.theta_deg.abs() < 1e-12);
    }

    #[test]
    fn zero_speed_keeps_state() {
        let s = car_at_origin();
        let s2 = step(&s, (0.0, 0.0), 1.0, &limits()).unwrap();
        assert_eq!(s2.pose, s.pose);
    }

    #[test]
    fn constant_controls_trace_the_analytic_circle() {
        // v = 1, phi = arctan(0.5): turning radius l / tan(phi) = 5 m.
        let phi = 0.5f64.atan();
        let dt = 0.01;
        let radius = L / phi.tan();
        let omega = 1.0 / radius;
        let period = 2.0 * std::f64::consts::PI / omega;
        let steps = (period / dt).ceil() as usize;

        let mut s = car_at_origin();
        let mut pts = Vec::with_capacity(steps);
        for _ in 0..steps {
            s = step(&s, (1.0, phi), dt, &limits()).unwrap();
            pts.push((s.pose.x, s.pose.y));
        }
        // Fit the circle: center is the mean of a full revolution.
        let n = pts.len() as f64;
        let cx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let cy = pts.iter().map(|p| p.1).sum::<f64>() / n;
        for (x, y) in &pts {
            let r = ((x - cx).powi(2) + (y - cy).powi(2)).sqrt();
            assert!(
                (r - radius).abs() <= 0.01 * radius,
                "radius {r} deviates from {radius}"
            );
        }
    }

    #[test]
    fn steering_from_curvature_matches_flatness() {
        assert_eq!(steering_from_curvature(L, 0.0), 0.0);
        let phi = steering_from_curvature(L, 0.2);
        assert!((phi - 0.4636).abs() < 5e-4, "got {phi}");
        let neg = steering_from_curvature(L, -0.2);
        assert!((neg + 0.4636).abs() < 5e-4);
    }

    #[test]
    fn traced_curvature_straight_circle_stationary() {
        let n = 200;
        let dt = 0.01;
        // Straight constant-speed motion.
        let xs: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
        let ys = vec![0.0; n];
        let ks = traced_curvature(&xs, &ys, dt).unwrap();
        for k in ks.iter().flatten() {
            assert!(k.abs() < 1e-9);
        }

        // Circular motion of radius 5 at 1 m/s.
        let r = 5.0;
        let xs: Vec<f64> = (0..n).map(|i| r * (i as f64 * dt / r).cos()).collect();
        let ys: Vec<f64> = (0..n).map(|i| r * (i as f64 * dt / r).sin()).collect();
        let ks = traced_curvature(&xs, &ys, dt).unwrap();
        for k in ks.iter().flatten() {
            assert!((k - 0.2).abs() <= 0.02 * 0.2, "got {k}");
        }

        // Stationary segment: undefined markers, no blow-up.
        let xs = vec![1.0; 10];
        let ys = vec![2.0; 10];
        let ks = traced_curvature(&xs, &ys, 0.1).unwrap();
        assert!(ks.iter().all(|k| k.is_none()));
    }

    #[test]
    fn flatness_round_trip_recovers_steering() {
        // Drive with a slowly varying steering profile and reconstruct phi
        // from the traced output path.
        let dt = 0.01;
        let steps = 3000;
        let mut s = car_at_origin();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut phis = Vec::new();
        for i in 0..steps {
            let phi = 0.3 * (i as f64 * dt * 0.2).sin();
            let v = 1.0;
            s = step(&s, (v, phi), dt, &limits()).unwrap();
            xs.push(s.pose.x);
            ys.push(s.pose.y);
            phis.push(phi);
        }
        let ks = traced_curvature(&xs, &ys, dt).unwrap();
        let mut checked = 0;
        for i in 0..steps {
            if let Some(k) = ks[i] {
                let phi_rec = steering_from_curvature(L, k);
                let phi_cmd = phis[i];
                if phi_cmd.abs() > 0.05 {
                    let rel = ((phi_rec - phi_cmd) / phi_cmd).abs();
                    assert!(rel <= 0.05, "tick {i}: {phi_rec} vs {phi_cmd}");
                    checked += 1;
                }
            }
        }
        assert!(checked > 1000, "round trip barely exercised: {checked}");
    }

    #[test]
    fn control_limit_violations_are_errors_not_clamps() {
        let s = car_at_origin();
        assert!(matches!(
            step(&s, (3.0, 0.0), 0.1, &limits()),
            Err(VehicleError::SpeedLimit { .. })
        ));
        assert!(matches!(
            step(&s, (1.0, 0.7), 0.1, &limits()),
            Err(VehicleError::SteeringLimit { .. })
        ));
    }

    #[test]
    fn unhealthy_untowed_car_is_pinned() {
        let mut s = car_at_origin();
        s.healthy = false;
        assert!(matches!(
            step(&s, (1.0, 0.0), 0.1, &limits()),
            Err(VehicleError::ImmobileViolation { .. })
        ));
        let s2 = step(&s, (0.0, 0.0), 0.1, &limits()).unwrap();
        assert_eq!(s2.pose, s.pose);
    }

    #[test]
    fn theta_stays_normalized() {
        let mut s = car_at_origin();
        let phi = 0.5;
        for _ in 0..5000 {
            s = step(&s, (2.0, phi), 0.1, &limits()).unwrap();
            assert!(s.pose.theta_deg > -180.0 && s.pose.theta_deg <= 180.0);
        }
    }
}

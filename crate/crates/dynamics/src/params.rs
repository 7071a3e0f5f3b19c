use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_4;

use crate::{DynamicsError, Result, THRUSTERS};

/// Mounting of a single thruster in the body frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThrusterRecord {
    #[serde(rename = "position_m")]
    pub position: [f64; 3],
    /// Unit thrust direction for a positive command.
    pub direction: [f64; 3],
}

impl ThrusterRecord {
    pub fn is_horizontal(&self) -> bool {
        self.direction[2].abs() < 1e-12
    }
}

/// Mass, inertia, damping and thruster geometry of the vehicle.
///
/// Added-mass entries keep the hydrodynamic sign convention (negative numbers);
/// the mass matrix is `diag(m - X_udot, ..., I - N_rdot)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VehicleParams {
    #[serde(rename = "dry_mass_kg")]
    pub dry_mass: f64,
    #[serde(rename = "fluid_density_kg_m3")]
    pub fluid_density: f64,
    #[serde(rename = "added_mass_linear_kg")]
    pub added_mass_linear: [f64; 3],
    #[serde(rename = "added_mass_rotational_kg_m2")]
    pub added_mass_rotational: [f64; 3],
    #[serde(rename = "rotational_inertia_kg_m2")]
    pub rotational_inertia: [f64; 3],
    #[serde(rename = "restoring_arm_z_m")]
    pub restoring_arm_z: f64,
    #[serde(rename = "max_thrust_n")]
    pub max_thrust: f64,
    #[serde(rename = "horizontal_thruster_angle_rad")]
    pub horizontal_thruster_angle: f64,
    #[serde(rename = "gravity_m_s2")]
    pub gravity: f64,
    pub thrusters: Vec<ThrusterRecord>,
    /// Linear damping per axis, N/(m/s) and N·m/(rad/s).
    pub linear_damping: [f64; 6],
    /// Quadratic damping per axis, N/(m/s)^2 and N·m/(rad/s)^2.
    pub quadratic_damping: [f64; 6],
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self::bluerov2_heavy()
    }
}

impl VehicleParams {
    /// BlueROV2 Heavy-like defaults.
    ///
    /// Horizontal thrusters are vectored at 45 degrees. T1/T3 are the front pair,
    /// T2/T4 the rear pair; T5..T8 point down. Damping values are the commonly
    /// used BlueROV2 identification results.
    pub fn bluerov2_heavy() -> Self {
        let (c, s) = (FRAC_PI_4.cos(), FRAC_PI_4.sin());
        let h = |x: f64, y: f64, dx: f64, dy: f64| ThrusterRecord {
            position: [x, y, 0.085],
            direction: [dx, dy, 0.0],
        };
        let v = |x: f64, y: f64| ThrusterRecord {
            position: [x, y, 0.0],
            direction: [0.0, 0.0, -1.0],
        };
        Self {
            dry_mass: 11.5,
            fluid_density: 1025.0,
            added_mass_linear: [-5.5, -12.7, -14.57],
            added_mass_rotational: [-0.12; 3],
            rotational_inertia: [0.16; 3],
            restoring_arm_z: 0.02,
            max_thrust: 40.0,
            horizontal_thruster_angle: FRAC_PI_4,
            gravity: 9.81,
            thrusters: vec![
                h(0.156, 0.111, c, -s),
                h(-0.156, 0.111, c, s),
                h(0.156, -0.111, c, s),
                h(-0.156, -0.111, c, -s),
                v(0.12, 0.218),
                v(0.12, -0.218),
                v(-0.12, 0.218),
                v(-0.12, -0.218),
            ],
            linear_damping: [4.03, 6.22, 5.18, 0.07, 0.07, 0.07],
            quadratic_damping: [18.18, 21.66, 36.99, 1.55, 1.55, 1.55],
        }
    }

    /// Diagonal of the mass matrix, rigid body plus added mass.
    pub fn mass_diagonal(&self) -> [f64; 6] {
        let m = self.dry_mass;
        let a = self.added_mass_linear;
        let i = self.rotational_inertia;
        let r = self.added_mass_rotational;
        [m - a[0], m - a[1], m - a[2], i[0] - r[0], i[1] - r[1], i[2] - r[2]]
    }

    /// Weight in newtons. Buoyancy is taken equal to it.
    pub fn weight(&self) -> f64 {
        self.dry_mass * self.gravity
    }

    /// Every violated invariant, not just the first.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let positive = [
            ("dry_mass_kg", self.dry_mass),
            ("fluid_density_kg_m3", self.fluid_density),
            ("max_thrust_n", self.max_thrust),
            ("gravity_m_s2", self.gravity),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                out.push(format!("{name} must be positive, got {v}"));
            }
        }
        for (k, v) in self.rotational_inertia.iter().enumerate() {
            if !(*v > 0.0) {
                out.push(format!("rotational_inertia_kg_m2[{k}] must be positive, got {v}"));
            }
        }
        for (k, v) in self.mass_diagonal().iter().enumerate() {
            if !(*v > 0.0) {
                out.push(format!("mass matrix entry {k} is not positive ({v})"));
            }
        }
        for (name, vals) in [
            ("added_mass_linear_kg", &self.added_mass_linear[..]),
            ("added_mass_rotational_kg_m2", &self.added_mass_rotational[..]),
        ] {
            if vals.iter().any(|v| *v > 0.0) {
                out.push(format!("{name} entries must be non-positive"));
            }
        }
        if self.linear_damping.iter().chain(&self.quadratic_damping).any(|d| *d < 0.0) {
            out.push("damping coefficients must be non-negative".into());
        }
        if self.thrusters.len() != THRUSTERS {
            out.push(format!("expected {THRUSTERS} thrusters, got {}", self.thrusters.len()));
        }
        for (k, t) in self.thrusters.iter().enumerate() {
            let n = t.direction.iter().map(|d| d * d).sum::<f64>().sqrt();
            if (n - 1.0).abs() > 1e-9 {
                out.push(format!("thruster {} direction is not unit length ({n})", k + 1));
            }
            if t.is_horizontal() {
                let angle = t.direction[1].atan2(t.direction[0]).abs();
                if (angle - self.horizontal_thruster_angle).abs() > 1e-9 {
                    out.push(format!(
                        "thruster {} angle {angle} differs from horizontal_thruster_angle_rad",
                        k + 1
                    ));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(DynamicsError::InvalidParams(v.join("; ")))
        }
    }
}

//! Closed-form orbit and inter-satellite link geometry for one shell.
//!
//! Spherical Earth, circular orbits. Lengths are kilometers, times seconds;
//! angles are degrees at the API boundary.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub earth_radius_km: f64,
    /// Standard gravitational parameter of the Earth, m^3/s^2.
    pub mu: f64,
    pub light_speed_km_s: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            earth_radius_km: 6371.0,
            mu: 3.986004418e14,
            light_speed_km_s: 299_792.458,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("earth_radius_km", self.earth_radius_km),
            ("mu", self.mu),
            ("light_speed_km_s", self.light_speed_km_s),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "constant {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// One constellation shell: `planes` evenly spaced orbital planes with
/// `sats_per_plane` evenly spaced satellites each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellParams {
    pub planes: usize,
    pub sats_per_plane: usize,
    pub altitude_km: f64,
    pub inclination_deg: f64,
}

impl ShellParams {
    pub fn new(
        planes: usize,
        sats_per_plane: usize,
        altitude_km: f64,
        inclination_deg: f64,
    ) -> Result<Self> {
        let shell = Self {
            planes,
            sats_per_plane,
            altitude_km,
            inclination_deg,
        };
        shell.validate()?;
        Ok(shell)
    }

    pub fn validate(&self) -> Result<()> {
        if self.planes == 0 || self.sats_per_plane == 0 {
            return Err(Error::InvalidParameter(format!(
                "shell needs at least one plane and one satellite per plane, got {}x{}",
                self.planes, self.sats_per_plane
            )));
        }
        if !(self.altitude_km.is_finite() && self.altitude_km > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "altitude must be positive, got {} km",
                self.altitude_km
            )));
        }
        if !(self.inclination_deg > 0.0 && self.inclination_deg < 180.0) {
            return Err(Error::InvalidParameter(format!(
                "inclination must lie in (0, 180) degrees, got {}",
                self.inclination_deg
            )));
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.planes * self.sats_per_plane
    }

    pub fn inclination_rad(&self) -> f64 {
        self.inclination_deg.to_radians()
    }

    pub fn orbit_radius_km(&self, consts: &PhysicalConstants) -> f64 {
        consts.earth_radius_km + self.altitude_km
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Max,
    Mean,
}

/// Hop lengths of the weighted torus: `inter_plane_km` along the plane axis,
/// `intra_plane_km` along the slot axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopWeights {
    pub inter_plane_km: f64,
    pub intra_plane_km: f64,
    pub metric: MetricKind,
}

impl HopWeights {
    pub fn new(inter_plane_km: f64, intra_plane_km: f64, metric: MetricKind) -> Result<Self> {
        let w = Self {
            inter_plane_km,
            intra_plane_km,
            metric,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.inter_plane_km.is_finite()
            && self.inter_plane_km > 0.0
            && self.intra_plane_km.is_finite()
            && self.intra_plane_km > 0.0)
        {
            return Err(Error::InvalidParameter(format!(
                "hop weights must be positive, got ({}, {})",
                self.inter_plane_km, self.intra_plane_km
            )));
        }
        Ok(())
    }

    /// Weights of the shell under the given metric: the inter-plane hop is
    /// either its maximum or its time-mean, the intra-plane hop is constant.
    pub fn for_shell(
        shell: &ShellParams,
        consts: &PhysicalConstants,
        metric: MetricKind,
    ) -> Result<Self> {
        let inter = match metric {
            MetricKind::Max => inter_plane_hop_max(shell, consts)?,
            MetricKind::Mean => inter_plane_hop_mean(shell, consts)?,
        };
        Self::new(inter, intra_plane_hop(shell, consts)?, metric)
    }
}

/// Circular-orbit period `2*pi*sqrt(a^3/mu)` in seconds.
pub fn orbital_period(shell: &ShellParams, consts: &PhysicalConstants) -> f64 {
    let a_m = shell.orbit_radius_km(consts) * 1e3;
    2.0 * PI * (a_m.powi(3) / consts.mu).sqrt()
}

/// Orbital speed in km/s.
pub fn orbital_speed(shell: &ShellParams, consts: &PhysicalConstants) -> f64 {
    2.0 * PI * shell.orbit_radius_km(consts) / orbital_period(shell, consts)
}

/// Chord between two points of a circle of `radius` separated by `2*pi/n`,
/// i.e. `radius * sqrt(2(1 - cos(2*pi/n)))`.
fn chord(radius: f64, n: usize) -> f64 {
    // 2 sin(x/2) == sqrt(2(1 - cos x)), without the cancellation near x = 0.
    radius * 2.0 * (PI / n as f64).sin()
}

/// Length of an intra-plane link; constant over time.
pub fn intra_plane_hop(shell: &ShellParams, consts: &PhysicalConstants) -> Result<f64> {
    if shell.sats_per_plane < 2 {
        return Err(Error::NoSuchLink {
            axis: "intra-plane",
            count: shell.sats_per_plane,
        });
    }
    Ok(chord(shell.orbit_radius_km(consts), shell.sats_per_plane))
}

/// Largest inter-plane link length, reached when both satellites cross the
/// equator.
pub fn inter_plane_hop_max(shell: &ShellParams, consts: &PhysicalConstants) -> Result<f64> {
    if shell.planes < 2 {
        return Err(Error::NoSuchLink {
            axis: "inter-plane",
            count: shell.planes,
        });
    }
    Ok(chord(shell.orbit_radius_km(consts), shell.planes))
}

/// Inter-plane link length at orbital phase time `t` (seconds after the
/// ascending node). Periodic in `T/2`.
pub fn inter_plane_hop_at(shell: &ShellParams, consts: &PhysicalConstants, t: f64) -> Result<f64> {
    let max = inter_plane_hop_max(shell, consts)?;
    let phase = 2.0 * PI * (t / orbital_period(shell, consts)).rem_euclid(1.0);
    let cos_i = shell.inclination_rad().cos();
    let (s, c) = phase.sin_cos();
    Ok(max * (c * c + cos_i * cos_i * s * s).sqrt())
}

/// Time-mean of [`inter_plane_hop_at`] over one period,
/// `(2/pi) * D_max * E(sin^2 i)`.
pub fn inter_plane_hop_mean(shell: &ShellParams, consts: &PhysicalConstants) -> Result<f64> {
    let max = inter_plane_hop_max(shell, consts)?;
    let sin_i = shell.inclination_rad().sin();
    let e = complete_elliptic_e((sin_i * sin_i).min(1.0))?;
    Ok(2.0 / PI * max * e)
}

/// Complete elliptic integral of the second kind in parameter form,
/// `E(m) = integral over [0, pi/2] of sqrt(1 - m sin^2 t) dt`.
///
/// Evaluated with the arithmetic-geometric mean:
/// `E(m) = K(m) * (1 - sum_n 2^(n-1) c_n^2)` with `c_0^2 = m`.
pub fn complete_elliptic_e(m: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&m) {
        return Err(Error::Domain(format!(
            "elliptic parameter m must lie in [0, 1], got {m}"
        )));
    }
    if m == 0.0 {
        return Ok(FRAC_PI_2);
    }
    if m == 1.0 {
        return Ok(1.0);
    }

    let mut a = 1.0_f64;
    let mut b = (1.0 - m).sqrt();
    let mut sum = 0.5 * m;
    let mut weight = 0.5;
    for _ in 0..64 {
        let c = 0.5 * (a - b);
        weight *= 2.0;
        sum += weight * c * c;
        let next_a = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next_a;
        if c.abs() <= f64::EPSILON * a {
            break;
        }
    }
    Ok(PI / (2.0 * a) * (1.0 - sum))
}

pub fn km_to_ms(distance_km: f64, consts: &PhysicalConstants) -> Result<f64> {
    if distance_km.is_nan() || distance_km < 0.0 {
        return Err(Error::Domain(format!(
            "distance must be non-negative, got {distance_km} km"
        )));
    }
    Ok(distance_km / consts.light_speed_km_s * 1e3)
}

pub fn ms_to_km(delay_ms: f64, consts: &PhysicalConstants) -> Result<f64> {
    if delay_ms.is_nan() || delay_ms < 0.0 {
        return Err(Error::Domain(format!(
            "delay must be non-negative, got {delay_ms} ms"
        )));
    }
    Ok(delay_ms * 1e-3 * consts.light_speed_km_s)
}

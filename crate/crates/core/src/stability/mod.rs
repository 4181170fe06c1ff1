//! Relative-coordinate platoon dynamics and their linear stability analysis.
//!
//! The state of vehicle `i` is `(d_i, α_t_i, α_v_i, V_i)`: range to its
//! predecessor, predecessor heading relative to the line of sight, own
//! heading relative to the line of sight, and speed. The lead vehicle's
//! predecessor is the virtual target, moving at `V_0 = V_1 d*/d_1` along a
//! path of curvature `κ`.

mod eigen;
mod jacobian;
mod spectrum;
mod steady;

pub use eigen::{eigenpair_residual, eigenvalues, sort_canonical};
pub use jacobian::{assemble_symbolic, compare_jacobians, jacobian_fd, BlockComparison, EntryDiscrepancy};
pub use spectrum::{
    closed_form_spectrum, cluster_tolerance, distinct_eigenvalues, extract_beta, linearize,
    match_clustered, relative_jacobian, Cluster, ClusterPair, ClosedFormSpectrum,
    LinearizationReport, SpectrumMatch, BLOCK_TOLERANCE, CLUSTER_FRACTION, SPECTRUM_TOLERANCE,
};
pub use steady::{steady_state_regular, steady_turn, OffsetMethod, SteadyState, VehicleOffset};

use crate::error::{Error, Result};
use crate::geometry::{engagement, Path, VehicleState};
use crate::guidance::{accel_from_angles, speed_commands, GuidanceLaw, GuidanceParams, MIN_RANGE};
use crate::sim::{PlatoonState, SPEED_FLOOR_FACTOR};

/// Path curvature and commanded platoon speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlInput {
    /// Signed curvature `1/R`, zero for a straight line.
    pub curvature: f64,
    pub v_c: f64,
}

impl ControlInput {
    pub fn new(curvature: f64, v_c: f64) -> Result<Self> {
        if !(v_c.is_finite() && v_c > 0.0) {
            return Err(Error::Domain(format!("V_c must be > 0, got {v_c}")));
        }
        if !curvature.is_finite() {
            return Err(Error::NonFiniteInput("curvature"));
        }
        Ok(Self { curvature, v_c })
    }

    pub fn circle(radius: f64, v_c: f64) -> Result<Self> {
        Self::new(1.0 / radius, v_c)
    }

    pub fn line(v_c: f64) -> Result<Self> {
        Self::new(0.0, v_c)
    }
}

/// Platoon state in relative coordinates, `4n` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeState(Vec<f64>);

impl RelativeState {
    pub fn from_vec(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || !values.len().is_multiple_of(4) {
            return Err(Error::Domain(format!(
                "relative state needs 4n > 0 entries, got {}",
                values.len()
            )));
        }
        Ok(Self(values))
    }

    pub fn n(&self) -> usize {
        self.0.len() / 4
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// `(d, α_t, α_v, V)` of vehicle `i` (0-based).
    pub fn vehicle(&self, i: usize) -> [f64; 4] {
        let c = &self.0[4 * i..4 * i + 4];
        [c[0], c[1], c[2], c[3]]
    }
}

/// Relative coordinates of a Cartesian platoon state following `path`.
pub fn relative_state(state: &PlatoonState, path: &Path) -> Result<RelativeState> {
    let (position, heading) = path.point(state.target_s);
    let target = VehicleState {
        position,
        heading,
        speed: state.target_speed,
    };
    let mut out = Vec::with_capacity(4 * state.vehicles.len());
    for (i, v) in state.vehicles.iter().enumerate() {
        let pred = if i == 0 { &target } else { &state.vehicles[i - 1] };
        let g = engagement(v, pred)?;
        out.extend_from_slice(&[g.d, g.alpha_t, g.alpha_v, v.speed]);
    }
    RelativeState::from_vec(out)
}

/// Time derivative of the relative state.
pub fn rhs_relative(
    x: &RelativeState,
    u: &ControlInput,
    law: GuidanceLaw,
    params: &GuidanceParams,
) -> Vec<f64> {
    rhs_slice(x.as_slice(), u, law, params)
}

pub(crate) fn rhs_slice(
    x: &[f64],
    u: &ControlInput,
    law: GuidanceLaw,
    params: &GuidanceParams,
) -> Vec<f64> {
    let n = x.len() / 4;
    let params = GuidanceParams {
        v_c: u.v_c,
        ..*params
    };
    let floor = SPEED_FLOOR_FACTOR * u.v_c;
    let d = |i: usize| x[4 * i];
    let at = |i: usize| x[4 * i + 1];
    let av = |i: usize| x[4 * i + 2];
    let v = |i: usize| x[4 * i + 3];

    let speeds: Vec<f64> = (0..n).map(v).collect();
    let gaps: Vec<f64> = (0..n).map(d).collect();
    let v_cmd = speed_commands(&speeds, &gaps, &params);

    // heading rate of vehicle i
    let turn_rate = |i: usize| {
        let s = v(i).max(floor);
        accel_from_angles(law, d(i), at(i), av(i), s) / s
    };
    let v_target = (v(0) * (params.d_star / d(0).max(MIN_RANGE))).clamp(0.0, params.speed_cap());

    let mut out = vec![0.0; 4 * n];
    for i in 0..n {
        let (v_pred, pred_turn) = if i == 0 {
            (v_target, v_target * u.curvature)
        } else {
            (v(i - 1), turn_rate(i - 1))
        };
        let (sin_t, cos_t) = at(i).sin_cos();
        let (sin_v, cos_v) = av(i).sin_cos();
        let los_rate = (v_pred * sin_t - v(i) * sin_v) / d(i).max(MIN_RANGE);
        out[4 * i] = v_pred * cos_t - v(i) * cos_v;
        out[4 * i + 1] = pred_turn - los_rate;
        out[4 * i + 2] = turn_rate(i) - los_rate;
        out[4 * i + 3] = params.k_v * (v_cmd[i] - v(i));
    }
    out
}

/// Desired on-path equilibrium: every gap `d*`, `α_t = asin(d* κ / 2)`,
/// `α_v = -α_t`, every speed `V_c`. Zero curvature gives the straight-line
/// tail chase.
pub fn equilibrium_state(n: usize, params: &GuidanceParams, curvature: f64) -> Result<RelativeState> {
    if n == 0 {
        return Err(Error::Domain("platoon must contain at least one vehicle".into()));
    }
    let half_chord = params.d_star * curvature / 2.0;
    if !(half_chord.abs() < 1.0) {
        return Err(Error::ChordTooLong {
            d_star: params.d_star,
            radius: 1.0 / curvature.abs(),
        });
    }
    let theta = half_chord.asin();
    let one = [params.d_star, theta, -theta, params.v_c];
    RelativeState::from_vec(one.iter().copied().cycle().take(4 * n).collect())
}

/// `α = sqrt(1 - (d*/2R)²)`.
pub fn alpha(params: &GuidanceParams, radius: f64) -> Result<f64> {
    params.validate_for_radius(radius)?;
    let r = params.d_star / (2.0 * radius);
    Ok((1.0 - r * r).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn highway() -> GuidanceParams {
        GuidanceParams::new(75.0, 0.5, 25.0).unwrap()
    }

    fn inf_norm(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    #[test]
    fn equilibrium_values() {
        let x = equilibrium_state(1, &highway(), 1.0 / 50.0).unwrap();
        let [d, at, av, v] = x.vehicle(0);
        assert_eq!(d, 75.0);
        assert_abs_diff_eq!(at, 0.848062, epsilon = 1e-6);
        assert_abs_diff_eq!(av, -0.848062, epsilon = 1e-6);
        assert_eq!(v, 25.0);

        let line = equilibrium_state(3, &highway(), 0.0).unwrap();
        assert_eq!(line.vehicle(2), [75.0, 0.0, 0.0, 25.0]);

        let p = GuidanceParams::new(100.0, 0.5, 25.0).unwrap();
        assert!(matches!(
            equilibrium_state(1, &p, 1.0 / 50.0),
            Err(Error::ChordTooLong { .. })
        ));
    }

    #[test]
    fn sine_equilibrium_is_stationary() {
        let p = highway();
        let u = ControlInput::circle(50.0, 25.0).unwrap();
        for n in 1..=5 {
            let x = equilibrium_state(n, &p, u.curvature).unwrap();
            assert!(inf_norm(&rhs_relative(&x, &u, GuidanceLaw::Sine, &p)) <= 1e-12);
        }
    }

    #[test]
    fn regular_equilibrium_drifts_on_circle() {
        let p = highway();
        let u = ControlInput::circle(50.0, 25.0).unwrap();
        let x = equilibrium_state(1, &p, u.curvature).unwrap();
        let f = rhs_relative(&x, &u, GuidanceLaw::Regular, &p);
        assert!(f[2].abs() > 1e-3, "alpha_v rate {}", f[2]);
    }

    #[test]
    fn regular_tail_chase_on_line_is_stationary() {
        let p = highway();
        let u = ControlInput::line(25.0).unwrap();
        let x = equilibrium_state(4, &p, 0.0).unwrap();
        assert_eq!(inf_norm(&rhs_relative(&x, &u, GuidanceLaw::Regular, &p)), 0.0);
    }

    #[test]
    fn relative_state_shape_checked() {
        assert!(RelativeState::from_vec(vec![1.0; 5]).is_err());
        assert!(RelativeState::from_vec(vec![]).is_err());
    }

    #[test]
    fn alpha_value() {
        assert_abs_diff_eq!(alpha(&highway(), 50.0).unwrap(), 0.661438, epsilon = 1e-6);
    }
}

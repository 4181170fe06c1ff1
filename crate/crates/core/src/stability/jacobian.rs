use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::guidance::GuidanceParams;

use super::alpha;

/// Central-difference Jacobian of `f` at `x0` with per-coordinate step
/// `h_j = 1e-6 · max(1, |x0_j|)`.
pub fn jacobian_fd<F>(f: F, x0: &[f64]) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let cols = x0.len();
    let rows = f(x0).len();
    let mut jac = DMatrix::zeros(rows, cols);
    let mut x = x0.to_vec();
    for j in 0..cols {
        let h = 1e-6 * x0[j].abs().max(1.0);
        x[j] = x0[j] + h;
        let fp = f(&x);
        x[j] = x0[j] - h;
        let fm = f(&x);
        x[j] = x0[j];
        if fp.len() != rows || fm.len() != rows {
            return Err(Error::Domain("right-hand side changed dimension".into()));
        }
        for i in 0..rows {
            let g = (fp[i] - fm[i]) / (2.0 * h);
            if !g.is_finite() {
                return Err(Error::NonFiniteJacobian { coordinate: j });
            }
            jac[(i, j)] = g;
        }
    }
    Ok(jac)
}

/// Staircase Jacobian of the sine-law platoon at its on-path equilibrium,
/// assembled entry by entry from the published block formulas.
///
/// Block row 0 holds `A_tt` (lead vehicle, coupled to the virtual target);
/// block row `i > 0` holds `A_vt` left of the diagonal and `A_vv` on it.
/// `A_tv` sits right of the diagonal in every block row except the last.
pub fn assemble_symbolic(n: usize, params: &GuidanceParams, radius: f64) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::Domain("platoon must contain at least one vehicle".into()));
    }
    let a = alpha(params, radius)?;
    let (vc, ds, kv, r) = (params.v_c, params.d_star, params.k_v, radius);
    let c = vc * a / ds;
    let s = vc * ds / (2.0 * r);

    #[rustfmt::skip]
    let a_tt = [
        [-c,                  -s,       -s,      0.0],
        [vc / (2.0 * r * ds), -c,        c,      0.0],
        [vc / (2.0 * r * ds), -3.0 * c, -3.0 * c, 0.0],
        [0.0,                  0.0,      0.0,    -kv],
    ];
    #[rustfmt::skip]
    let a_vv = [
        [0.0,           -s,       -s,       -a],
        [vc / (r * ds), -c,        c,       -1.0 / (2.0 * r)],
        [0.0,           -3.0 * c, -3.0 * c,  1.0 / (2.0 * r)],
        [0.0,            0.0,      0.0,     -kv],
    ];
    #[rustfmt::skip]
    let a_tv = [
        [0.0,           0.0, 0.0, 0.0],
        [0.0,           0.0, 0.0, 0.0],
        [0.0,           0.0, 0.0, 0.0],
        [-vc * kv / ds, 0.0, 0.0, kv],
    ];
    #[rustfmt::skip]
    let a_vt = [
        [0.0,            0.0,       0.0,       a],
        [-vc / (r * ds), -2.0 * c, -4.0 * c,   1.0 / (2.0 * r)],
        [0.0,            0.0,       0.0,      -1.0 / (2.0 * r)],
        [0.0,            0.0,       0.0,       0.0],
    ];

    let mut m = DMatrix::zeros(4 * n, 4 * n);
    let mut put = |bi: usize, bj: usize, block: &[[f64; 4]; 4]| {
        for (i, row) in block.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                m[(4 * bi + i, 4 * bj + j)] = *v;
            }
        }
    };
    for bi in 0..n {
        if bi == 0 {
            put(0, 0, &a_tt);
        } else {
            put(bi, bi - 1, &a_vt);
            put(bi, bi, &a_vv);
        }
        if bi + 1 < n {
            put(bi, bi + 1, &a_tv);
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryDiscrepancy {
    pub row: usize,
    pub col: usize,
    pub symbolic: f64,
    pub numeric: f64,
}

/// Elementwise comparison of an assembled Jacobian against a reference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockComparison {
    pub tolerance: f64,
    pub max_abs_difference: f64,
    /// Entries with `|symbolic - numeric| > tol · (1 + |numeric|)`.
    pub mismatches: Vec<EntryDiscrepancy>,
}

impl BlockComparison {
    pub fn agrees(&self) -> bool {
        self.mismatches.is_empty()
    }
}

pub fn compare_jacobians(symbolic: &DMatrix<f64>, numeric: &DMatrix<f64>, tol: f64) -> BlockComparison {
    assert_eq!(symbolic.shape(), numeric.shape(), "Jacobian shapes differ");
    let mut max_abs_difference = 0.0f64;
    let mut mismatches = Vec::new();
    for j in 0..symbolic.ncols() {
        for i in 0..symbolic.nrows() {
            let (s, n) = (symbolic[(i, j)], numeric[(i, j)]);
            let diff = (s - n).abs();
            max_abs_difference = max_abs_difference.max(diff);
            if diff > tol * (1.0 + n.abs()) {
                mismatches.push(EntryDiscrepancy {
                    row: i,
                    col: j,
                    symbolic: s,
                    numeric: n,
                });
            }
        }
    }
    mismatches.sort_by_key(|e| (e.row, e.col));
    BlockComparison {
        tolerance: tol,
        max_abs_difference,
        mismatches,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::guidance::GuidanceLaw;
    use crate::stability::{equilibrium_state, rhs_relative, ControlInput, RelativeState};

    #[test]
    fn recovers_linear_system() {
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[1.5, -2.0, 0.25, 0.0, 3.0, -7.5, 4.0, 1.0, -0.125],
        );
        let f = |x: &[f64]| (&m * nalgebra::DVector::from_column_slice(x)).as_slice().to_vec();
        let jac = jacobian_fd(f, &[0.3, -1.2, 4.0]).unwrap();
        assert!((&jac - &m).amax() <= 1e-9);
    }

    #[test]
    fn non_finite_probe_names_coordinate() {
        let f = |x: &[f64]| vec![x[0], if x[1] > 0.0 { f64::NAN } else { x[1] }];
        assert_eq!(
            jacobian_fd(f, &[1.0, 0.0]).unwrap_err(),
            Error::NonFiniteJacobian { coordinate: 1 }
        );
    }

    #[test]
    fn staircase_shape() {
        let p = GuidanceParams::new(75.0, 0.5, 25.0).unwrap();
        let a = assemble_symbolic(2, &p, 50.0).unwrap();
        assert_eq!(a.shape(), (8, 8));
        assert_eq!(a[(3, 3)], -0.5);
        // A_tv: upper-right block, only its last row is populated
        assert_eq!(a[(3, 4)], -25.0 * 0.5 / 75.0);
        assert_eq!(a[(3, 7)], 0.5);
        // A_vt: lower-left block
        assert!(a[(4, 3)] > 0.0);
        // information flow is asymmetric
        let tv = a.view((0, 4), (4, 4)).into_owned();
        let vt = a.view((4, 0), (4, 4)).into_owned();
        assert_ne!(tv, vt);
        assert_ne!(tv, vt.transpose());
        assert!(assemble_symbolic(2, &GuidanceParams::new(100.0, 0.5, 25.0).unwrap(), 50.0).is_err());
    }

    #[test]
    fn speed_row_of_last_vehicle() {
        let p = GuidanceParams::new(75.0, 0.5, 25.0).unwrap();
        let u = ControlInput::circle(50.0, 25.0).unwrap();
        let x0 = equilibrium_state(3, &p, u.curvature).unwrap();
        let f = |x: &[f64]| {
            rhs_relative(&RelativeState::from_vec(x.to_vec()).unwrap(), &u, GuidanceLaw::Sine, &p)
        };
        let jac = jacobian_fd(f, x0.as_slice()).unwrap();
        assert!((jac[(11, 11)] + 0.5).abs() <= 1e-6);
    }
}

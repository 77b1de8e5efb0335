//! Exact derivatives of the kinematic layer and of composed losses.
//!
//! Differentiation strategy: forward mode with all 61 parameter directions
//! carried at once (see [`crate::scalar`]). At 61 inputs by 63 outputs this
//! is cheap, needs no tape, and keeps the value pass bitwise identical to
//! the plain evaluation.

use crate::error::{Error, Result};
use crate::hand::{
    fkine_generic, JointLabel, JointSet, KinematicTopology, HandParameters, JOINT_COUNT,
    PARAM_COUNT,
};
use crate::scalar::{Dual, Real};

/// Number of rows of the kinematics Jacobian: 21 joints times 3 coordinates.
pub const JAC_ROWS: usize = JOINT_COUNT * 3;

/// Dense row-major Jacobian of the joint coordinates with respect to the
/// flattened hand parameters.
///
/// Row `3*j + c` is coordinate `c` of the joint with canonical index `j`
/// (see [`JointLabel`]); column `p` is flattened parameter `p` (see
/// [`HandParameters`] for the layout).
#[derive(Debug, Clone)]
pub struct Jacobian {
    data: Vec<f64>,
    /// Joint positions from the value pass, canonical order.
    value: JointSet,
}

impl Jacobian {
    pub fn rows(&self) -> usize {
        JAC_ROWS
    }

    pub fn cols(&self) -> usize {
        PARAM_COUNT
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * PARAM_COUNT + col]
    }

    /// Entry for (joint, coordinate, parameter).
    pub fn entry(&self, joint: JointLabel, coord: usize, param: usize) -> f64 {
        self.get(joint.index() * 3 + coord, param)
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * PARAM_COUNT..(row + 1) * PARAM_COUNT]
    }

    /// Joint locations computed during the same pass; bitwise equal to
    /// `fkine` on the same inputs.
    pub fn value(&self) -> &JointSet {
        &self.value
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Jacobian of all 63 joint coordinates with respect to all 61 parameters,
/// evaluated in a single forward-mode pass.
pub fn fkine_jacobian(params: &HandParameters, topo: &KinematicTopology) -> Result<Jacobian> {
    params.validate()?;
    Ok(fkine_jacobian_unchecked(&params.to_flat(), topo))
}

/// As [`fkine_jacobian`] but on a raw flattened vector without invariant
/// checks (training path).
pub fn fkine_jacobian_unchecked(
    lambda: &[f64; PARAM_COUNT],
    topo: &KinematicTopology,
) -> Jacobian {
    let mut seeded = [Dual::<PARAM_COUNT>::constant(0.0); PARAM_COUNT];
    for (p, s) in seeded.iter_mut().enumerate() {
        *s = Dual::variable(lambda[p], p);
    }
    let out = fkine_generic::<Dual<PARAM_COUNT>>(&seeded, topo);

    let mut data = vec![0.0; JAC_ROWS * PARAM_COUNT];
    let mut positions = [[0.0; 3]; JOINT_COUNT];
    for (j, joint) in out.iter().enumerate() {
        for c in 0..3 {
            positions[j][c] = joint[c].v;
            let row = j * 3 + c;
            data[row * PARAM_COUNT..(row + 1) * PARAM_COUNT].copy_from_slice(&joint[c].d);
        }
    }
    Jacobian {
        data,
        value: JointSet::from_positions_unchecked(positions),
    }
}

/// Central-difference Jacobian estimate of a vector function.
///
/// Column `p` is `(f(x + h_p e_p) - f(x - h_p e_p)) / (2 h_p)` with the
/// per-coordinate step `h_p = h * max(1, |x_p|)`. Returns a row-major
/// `f(x).len() x x.len()` matrix.
pub fn finite_diff_jacobian<F>(f: F, x: &[f64], h: f64) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if !(h > 0.0) {
        return Err(Error::invalid(format!("step size must be positive, got {h}")));
    }
    let n = x.len();
    let m = f(x).len();
    let mut jac = vec![vec![0.0; n]; m];
    let mut xp = x.to_vec();
    for p in 0..n {
        let step = h * x[p].abs().max(1.0);
        xp[p] = x[p] + step;
        let fp = f(&xp);
        xp[p] = x[p] - step;
        let fm = f(&xp);
        xp[p] = x[p];
        if fp.iter().chain(fm.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "finite differences produced a non-finite value in column {p}"
            )));
        }
        for r in 0..m {
            jac[r][p] = (fp[r] - fm[r]) / (2.0 * step);
        }
    }
    Ok(jac)
}

/// Gradient of the composed training loss
/// `L(lambda) = 1/2 * sum_joints ||j(lambda) - target||^2
///            + lambda_constr * sum(||min(theta - low, 0)||^2 + ||max(theta - up, 0)||^2)`
/// with respect to the flattened hand parameters.
pub fn loss_gradient(
    params: &HandParameters,
    topo: &KinematicTopology,
    target: &JointSet,
    limits: (&[f64; 25], &[f64; 25]),
    lambda_constr: f64,
) -> Result<[f64; PARAM_COUNT]> {
    params.validate()?;
    if !(lambda_constr >= 0.0) {
        return Err(Error::invalid(format!(
            "constraint weight must be non-negative, got {lambda_constr}"
        )));
    }
    if limits.0.iter().zip(limits.1.iter()).any(|(l, u)| !(l < u)) {
        return Err(Error::invalid("angle limits must satisfy low < up"));
    }
    Ok(loss_gradient_unchecked(
        &params.to_flat(),
        topo,
        target,
        limits,
        lambda_constr,
    ))
}

/// As [`loss_gradient`] without invariant checks; the training path calls
/// this directly on raw network outputs.
pub fn loss_gradient_unchecked(
    lambda: &[f64; PARAM_COUNT],
    topo: &KinematicTopology,
    target: &JointSet,
    limits: (&[f64; 25], &[f64; 25]),
    lambda_constr: f64,
) -> [f64; PARAM_COUNT] {
    let jac = fkine_jacobian_unchecked(lambda, topo);
    loss_gradient_from_jacobian(lambda, &jac, target, limits, lambda_constr)
}

/// Composes an already-computed kinematics Jacobian with the squared-error
/// joint term and the quadratic limit penalty.
pub fn loss_gradient_from_jacobian(
    lambda: &[f64; PARAM_COUNT],
    jac: &Jacobian,
    target: &JointSet,
    limits: (&[f64; 25], &[f64; 25]),
    lambda_constr: f64,
) -> [f64; PARAM_COUNT] {
    let mut grad = [0.0; PARAM_COUNT];
    let est = jac.value().positions();
    let tgt = target.positions();
    for j in 0..JOINT_COUNT {
        for c in 0..3 {
            let r = est[j][c] - tgt[j][c];
            if r == 0.0 {
                continue;
            }
            let row = jac.row(j * 3 + c);
            for p in 0..PARAM_COUNT {
                grad[p] += r * row[p];
            }
        }
    }
    // The penalty acts directly on the 25 angle slots. One-sided derivative
    // at the kink: zero from the feasible side.
    for a in 0..25 {
        let theta = lambda[36 + a];
        let low = limits.0[a];
        let up = limits.1[a];
        let mut g = 0.0;
        if theta < low {
            g += 2.0 * (theta - low);
        }
        if theta > up {
            g += 2.0 * (theta - up);
        }
        grad[36 + a] += lambda_constr * g;
    }
    grad
}

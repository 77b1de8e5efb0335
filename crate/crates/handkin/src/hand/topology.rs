//! Kinematic topology: finger enumeration, per-joint degrees of freedom,
//! fixed Denavit-Hartenberg constants, and joint-angle limits.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_8};
use std::path::Path;

use crate::error::{Error, Result};

/// Total number of joint angles across all fingers.
pub const ANGLE_COUNT: usize = 25;
/// Total number of bone lengths across all fingers.
pub const BONE_COUNT: usize = 15;
/// Denavit-Hartenberg rows per finger.
pub const ROWS_PER_FINGER: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Finger {
    Thumb,
    Index,
    Middle,
    Ring,
    Pinky,
}

pub const FINGERS: [Finger; 5] = [
    Finger::Thumb,
    Finger::Index,
    Finger::Middle,
    Finger::Ring,
    Finger::Pinky,
];

impl Finger {
    pub fn index(self) -> usize {
        match self {
            Finger::Thumb => 0,
            Finger::Index => 1,
            Finger::Middle => 2,
            Finger::Ring => 3,
            Finger::Pinky => 4,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Finger::Thumb => "T",
            Finger::Index => "I",
            Finger::Middle => "M",
            Finger::Ring => "R",
            Finger::Pinky => "P",
        }
    }
}

/// Joint types along one finger chain, proximal to distal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FingerJoint {
    Mcp,
    Pip,
    Dip,
    Tip,
}

pub const FINGER_JOINTS: [FingerJoint; 4] = [
    FingerJoint::Mcp,
    FingerJoint::Pip,
    FingerJoint::Dip,
    FingerJoint::Tip,
];

impl FingerJoint {
    pub fn index(self) -> usize {
        match self {
            FingerJoint::Mcp => 0,
            FingerJoint::Pip => 1,
            FingerJoint::Dip => 2,
            FingerJoint::Tip => 3,
        }
    }
}

/// One Denavit-Hartenberg row with its fixed constants and the limits of the
/// angle that drives it. `alpha` and `d` follow the classic convention
/// `Rz(theta) * Tz(d) * Tx(r) * Rx(alpha)`; the bone length `r` is a hand
/// parameter, not part of the topology.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DhRow {
    pub alpha_rad: f64,
    pub d_mm: f64,
    pub limit_low_rad: f64,
    pub limit_up_rad: f64,
}

/// The chain description of a single finger: how its five DH rows group into
/// MCP / PIP / DIP joints, plus the rows themselves.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FingerChain {
    /// Degrees of freedom at the MCP, PIP, and DIP joints (TIP has none).
    pub dof: [usize; 3],
    pub rows: Vec<DhRow>,
}

impl FingerChain {
    /// Rows that carry a bone length: the final DoF of each joint group.
    pub fn bone_rows(&self) -> [usize; 3] {
        [
            self.dof[0] - 1,
            self.dof[0] + self.dof[1] - 1,
            ROWS_PER_FINGER - 1,
        ]
    }

    /// Number of DH transforms from the finger base up to (and including)
    /// the proximal chain of `joint`.
    pub fn n_dh(&self, joint: FingerJoint) -> usize {
        match joint {
            FingerJoint::Mcp => 0,
            FingerJoint::Pip => self.dof[0],
            FingerJoint::Dip => self.dof[0] + self.dof[1],
            FingerJoint::Tip => self.dof[0] + self.dof[1] + self.dof[2],
        }
    }
}

/// Fixed kinematic structure shared by all hands: DH constants, DoF counts,
/// joint-angle limits, and the reference length sum used by the scale factor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KinematicTopology {
    /// Chains in finger order thumb, index, middle, ring, pinky.
    pub fingers: Vec<FingerChain>,
    /// Reference sum (mm) of the 20 hand lengths (15 bones + 5 palm vector
    /// magnitudes) of the average hand; the scale factor divides by this.
    pub reference_length_sum_mm: f64,
}

impl KinematicTopology {
    pub fn chain(&self, finger: Finger) -> &FingerChain {
        &self.fingers[finger.index()]
    }

    /// Lower and upper joint-angle limits flattened finger-major, matching
    /// the `joint_angles` layout of the parameter vector.
    pub fn angle_limits(&self) -> ([f64; ANGLE_COUNT], [f64; ANGLE_COUNT]) {
        let mut low = [0.0; ANGLE_COUNT];
        let mut up = [0.0; ANGLE_COUNT];
        for (f, chain) in self.fingers.iter().enumerate() {
            for (n, row) in chain.rows.iter().enumerate() {
                low[f * ROWS_PER_FINGER + n] = row.limit_low_rad;
                up[f * ROWS_PER_FINGER + n] = row.limit_up_rad;
            }
        }
        (low, up)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fingers.len() != 5 {
            return Err(Error::invalid(format!(
                "topology must describe 5 fingers, got {}",
                self.fingers.len()
            )));
        }
        if !(self.reference_length_sum_mm.is_finite() && self.reference_length_sum_mm > 0.0) {
            return Err(Error::invalid(
                "reference_length_sum_mm must be finite and positive",
            ));
        }
        let mut total_dof = 0;
        for (f, chain) in self.fingers.iter().enumerate() {
            if chain.rows.len() != ROWS_PER_FINGER {
                return Err(Error::invalid(format!(
                    "finger {f}: expected {ROWS_PER_FINGER} DH rows, got {}",
                    chain.rows.len()
                )));
            }
            if chain.dof.iter().any(|&d| d == 0) {
                return Err(Error::invalid(format!(
                    "finger {f}: every joint group needs at least one DoF"
                )));
            }
            let dof_sum: usize = chain.dof.iter().sum();
            if dof_sum != ROWS_PER_FINGER {
                return Err(Error::invalid(format!(
                    "finger {f}: joint DoF must sum to {ROWS_PER_FINGER}, got {dof_sum}"
                )));
            }
            total_dof += dof_sum;
            for (n, row) in chain.rows.iter().enumerate() {
                if !(row.alpha_rad.is_finite() && row.d_mm.is_finite()) {
                    return Err(Error::invalid(format!(
                        "finger {f} row {n}: non-finite DH constant"
                    )));
                }
                if !(row.limit_low_rad < row.limit_up_rad) {
                    return Err(Error::invalid(format!(
                        "finger {f} row {n}: limit_low must be below limit_up"
                    )));
                }
            }
        }
        debug_assert_eq!(total_dof, ANGLE_COUNT);
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let topo: KinematicTopology = serde_json::from_str(text)
            .map_err(|e| Error::format("<topology json>", e.to_string()))?;
        topo.validate()?;
        Ok(topo)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let topo: KinematicTopology = serde_json::from_str(&text)
            .map_err(|e| Error::format(path.display().to_string(), e.to_string()))?;
        topo.validate()?;
        Ok(topo)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("topology serializes")
    }
}

const LIMIT_SIDE: f64 = FRAC_PI_8;
const LIMIT_FLEX: f64 = FRAC_PI_2;

fn side_row(alpha: f64) -> DhRow {
    DhRow {
        alpha_rad: alpha,
        d_mm: 0.0,
        limit_low_rad: -LIMIT_SIDE,
        limit_up_rad: LIMIT_SIDE,
    }
}

fn flex_row(alpha: f64) -> DhRow {
    DhRow {
        alpha_rad: alpha,
        d_mm: 0.0,
        limit_low_rad: 0.0,
        limit_up_rad: LIMIT_FLEX,
    }
}

impl Default for KinematicTopology {
    /// The default table: four-DoF-style fingers built from three stacked
    /// revolute DoF at the MCP (twist, abduction, flexion) and single-DoF
    /// PIP/DIP flexion; the thumb uses 2+2+1 DoF. All `d` offsets are zero
    /// and every bone length rides on the final DoF of its joint group, so
    /// the zero-angle pose is a straight finger along local +x.
    fn default() -> Self {
        let non_thumb = FingerChain {
            dof: [3, 1, 1],
            rows: vec![
                side_row(FRAC_PI_2),
                side_row(-FRAC_PI_2),
                flex_row(0.0),
                flex_row(0.0),
                flex_row(0.0),
            ],
        };
        let thumb = FingerChain {
            dof: [2, 2, 1],
            rows: vec![
                side_row(FRAC_PI_2),
                flex_row(-FRAC_PI_2),
                side_row(FRAC_PI_2),
                flex_row(-FRAC_PI_2),
                flex_row(0.0),
            ],
        };
        KinematicTopology {
            fingers: vec![
                thumb,
                non_thumb.clone(),
                non_thumb.clone(),
                non_thumb.clone(),
                non_thumb,
            ],
            reference_length_sum_mm: crate::synth::HandShapeProfile::reference()
                .length_sum_mm(),
        }
    }
}

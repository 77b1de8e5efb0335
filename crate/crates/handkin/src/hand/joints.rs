//! Labeled sets of the 21 hand joint locations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::topology::{Finger, FingerJoint, FINGERS, FINGER_JOINTS};

/// Number of joints: one wrist plus four joints on each of five fingers.
pub const JOINT_COUNT: usize = 21;

/// Identifies one of the 21 joints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JointLabel {
    Wrist,
    Finger(Finger, FingerJoint),
}

impl JointLabel {
    /// Canonical storage index: wrist first, then fingers T I M R P with
    /// joints MCP, PIP, DIP, TIP each.
    pub fn index(self) -> usize {
        match self {
            JointLabel::Wrist => 0,
            JointLabel::Finger(f, j) => 1 + f.index() * 4 + j.index(),
        }
    }

    pub fn all() -> [JointLabel; JOINT_COUNT] {
        let mut labels = [JointLabel::Wrist; JOINT_COUNT];
        let mut i = 1;
        for f in FINGERS {
            for j in FINGER_JOINTS {
                labels[i] = JointLabel::Finger(f, j);
                i += 1;
            }
        }
        labels
    }

    pub fn name(self) -> String {
        match self {
            JointLabel::Wrist => "WRIST".to_string(),
            JointLabel::Finger(f, j) => format!(
                "{}_{}",
                f.short_name(),
                match j {
                    FingerJoint::Mcp => "MCP",
                    FingerJoint::Pip => "PIP",
                    FingerJoint::Dip => "DIP",
                    FingerJoint::Tip => "TIP",
                }
            ),
        }
    }
}

/// 21 labeled 3D joint locations in millimeters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSet {
    positions: [[f64; 3]; JOINT_COUNT],
}

impl JointSet {
    pub fn from_positions(positions: [[f64; 3]; JOINT_COUNT]) -> Result<Self> {
        for (i, p) in positions.iter().enumerate() {
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::invalid(format!(
                    "joint {i} has a non-finite coordinate"
                )));
            }
        }
        Ok(JointSet { positions })
    }

    pub(crate) fn from_positions_unchecked(positions: [[f64; 3]; JOINT_COUNT]) -> Self {
        JointSet { positions }
    }

    pub fn get(&self, label: JointLabel) -> [f64; 3] {
        self.positions[label.index()]
    }

    pub fn set(&mut self, label: JointLabel, p: [f64; 3]) {
        self.positions[label.index()] = p;
    }

    pub fn wrist(&self) -> [f64; 3] {
        self.positions[0]
    }

    pub fn finger(&self, f: Finger, j: FingerJoint) -> [f64; 3] {
        self.get(JointLabel::Finger(f, j))
    }

    pub fn middle_mcp(&self) -> [f64; 3] {
        self.finger(Finger::Middle, FingerJoint::Mcp)
    }

    pub fn positions(&self) -> &[[f64; 3]; JOINT_COUNT] {
        &self.positions
    }

    pub fn iter(&self) -> impl Iterator<Item = (JointLabel, [f64; 3])> + '_ {
        JointLabel::all()
            .into_iter()
            .map(move |l| (l, self.positions[l.index()]))
    }

    /// Flattened coordinates, joint-major: `[x0, y0, z0, x1, ...]` in the
    /// canonical joint order.
    pub fn to_flat(&self) -> [f64; JOINT_COUNT * 3] {
        let mut out = [0.0; JOINT_COUNT * 3];
        for (i, p) in self.positions.iter().enumerate() {
            out[3 * i..3 * i + 3].copy_from_slice(p);
        }
        out
    }

    pub fn from_flat(flat: &[f64; JOINT_COUNT * 3]) -> Result<Self> {
        let mut positions = [[0.0; 3]; JOINT_COUNT];
        for (i, p) in positions.iter_mut().enumerate() {
            p.copy_from_slice(&flat[3 * i..3 * i + 3]);
        }
        Self::from_positions(positions)
    }

    /// Applies `f` to every joint position, returning a new set.
    pub fn map(&self, mut f: impl FnMut([f64; 3]) -> [f64; 3]) -> JointSet {
        let mut positions = self.positions;
        for p in positions.iter_mut() {
            *p = f(*p);
        }
        JointSet { positions }
    }
}

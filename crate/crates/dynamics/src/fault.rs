use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::{DynamicsError, Result, Vector8, THRUSTERS};

/// A thruster fault hypothesis: failed set plus the diagonal effectiveness Gamma.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultModel {
    pub id: usize,
    /// 1-based thruster indices.
    pub failed: BTreeSet<usize>,
    pub gamma: Vector8,
}

impl FaultModel {
    pub fn healthy(id: usize) -> Self {
        Self { id, failed: BTreeSet::new(), gamma: Vector8::repeat(1.0) }
    }

    pub fn is_failed(&self, thruster: usize) -> bool {
        self.failed.contains(&thruster)
    }

    /// Short label like `T1T3`, or `healthy`.
    pub fn label(&self) -> String {
        if self.failed.is_empty() {
            return "healthy".into();
        }
        self.failed.iter().map(|i| format!("T{i}")).collect()
    }
}

/// Total failure of the listed thrusters (1-based), full effectiveness elsewhere.
pub fn fault_coefficients(failed: &[usize], id: usize) -> Result<FaultModel> {
    let mut set = BTreeSet::new();
    let mut gamma = Vector8::repeat(1.0);
    for &i in failed {
        if !(1..=THRUSTERS).contains(&i) {
            return Err(DynamicsError::ThrusterIndex(i));
        }
        set.insert(i);
        gamma[i - 1] = 0.0;
    }
    Ok(FaultModel { id, failed: set, gamma })
}

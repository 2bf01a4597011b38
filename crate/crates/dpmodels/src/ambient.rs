//! Ambient spaces over the DVR: P^3, the weighted spaces P(2,1,1,1) and
//! P(3,2,1,1), the determinantal receptacle in P^6, and affine work charts.
//! Coordinate changes, linear centers, and the elementary transformations
//! with their discrepancy bookkeeping live in `transform`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::KernelError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AmbientKind {
    P3,
    WP2111,
    WP3211,
    DeterminantalP6,
    Affine,
}

/// An ambient space: named geometric variables with positive weights. The
/// parameter t is implicit and always present as the last exponent slot.
#[derive(Debug, PartialEq, Eq)]
pub struct AmbientSpace {
    pub kind: AmbientKind,
    pub vars: Vec<String>,
    pub weights: Vec<u32>,
}

pub type Ambient = Arc<AmbientSpace>;

impl AmbientSpace {
    pub fn p3() -> Ambient {
        Arc::new(AmbientSpace {
            kind: AmbientKind::P3,
            vars: vec!["x0".into(), "x1".into(), "x2".into(), "x3".into()],
            weights: vec![1, 1, 1, 1],
        })
    }

    pub fn wp2111() -> Ambient {
        Arc::new(AmbientSpace {
            kind: AmbientKind::WP2111,
            vars: vec!["u".into(), "x1".into(), "x2".into(), "x3".into()],
            weights: vec![2, 1, 1, 1],
        })
    }

    pub fn wp3211() -> Ambient {
        Arc::new(AmbientSpace {
            kind: AmbientKind::WP3211,
            vars: vec!["u".into(), "v".into(), "x1".into(), "x2".into()],
            weights: vec![3, 2, 1, 1],
        })
    }

    pub fn determinantal_p6() -> Ambient {
        Arc::new(AmbientSpace {
            kind: AmbientKind::DeterminantalP6,
            vars: vec![
                "u".into(),
                "z1".into(),
                "z2".into(),
                "z3".into(),
                "z4".into(),
                "z5".into(),
                "z6".into(),
            ],
            weights: vec![1, 1, 1, 1, 1, 1, 1],
        })
    }

    pub fn affine(names: &[&str]) -> Ambient {
        Arc::new(AmbientSpace {
            kind: AmbientKind::Affine,
            vars: names.iter().map(|s| s.to_string()).collect(),
            weights: vec![1; names.len()],
        })
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Degree of the hypersurfaces this ambient receives, when fixed.
    pub fn expected_degree(&self) -> Option<i64> {
        match self.kind {
            AmbientKind::P3 => Some(3),
            AmbientKind::WP2111 => Some(4),
            AmbientKind::WP3211 => Some(6),
            AmbientKind::DeterminantalP6 => Some(2),
            AmbientKind::Affine => None,
        }
    }

    pub fn is_projective(&self) -> bool {
        self.kind != AmbientKind::Affine
    }
}

/// Check two polynomials live in the same ambient.
pub fn same_ambient(a: &Ambient, b: &Ambient) -> Result<(), KernelError> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(KernelError::AmbientMismatch)
    }
}

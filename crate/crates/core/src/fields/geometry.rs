use std::f64::consts::PI;

use crate::error::{Result, VltError};

const UNIT_TOL: f64 = 1e-12;
const DISTINCT_TOL: f64 = 1e-9;

/// Unit vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    d1: f64,
    d2: f64,
}

impl Direction {
    pub const E1: Direction = Direction { d1: 1.0, d2: 0.0 };
    pub const E2: Direction = Direction { d1: 0.0, d2: 1.0 };

    pub fn new(d1: f64, d2: f64) -> Result<Self> {
        if !(d1.is_finite() && d2.is_finite()) {
            return Err(VltError::InvalidDirection {
                d1,
                d2,
                reason: "components must be finite",
            });
        }
        if ((d1 * d1 + d2 * d2) - 1.0).abs() > UNIT_TOL {
            return Err(VltError::InvalidDirection {
                d1,
                d2,
                reason: "not a unit vector",
            });
        }
        Ok(Direction { d1, d2 })
    }

    /// `(cos angle, sin angle)`.
    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Direction { d1: c, d2: s }
    }

    #[inline]
    pub fn d1(&self) -> f64 {
        self.d1
    }

    #[inline]
    pub fn d2(&self) -> f64 {
        self.d2
    }

    /// Counter-clockwise normal `(-d2, d1)`.
    #[inline]
    pub fn perp(&self) -> Direction {
        Direction {
            d1: -self.d2,
            d2: self.d1,
        }
    }

    #[inline]
    pub fn dot(&self, other: &Direction) -> f64 {
        self.d1 * other.d1 + self.d2 * other.d2
    }

    /// Polar angle in `(-pi, pi]`.
    pub fn angle(&self) -> f64 {
        self.d2.atan2(self.d1)
    }
}

/// Symmetric V-line: branches `u = (u1, u2)` and `v = (-u1, u2)` with `u2 > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VLineGeometry {
    u: Direction,
    v: Direction,
}

impl VLineGeometry {
    /// Geometry with `u = (cos phi, sin phi)`.
    pub fn from_angle(phi: f64) -> Result<Self> {
        Self::from_direction(Direction::from_angle(phi))
    }

    pub fn from_direction(u: Direction) -> Result<Self> {
        if u.d2 <= 0.0 {
            return Err(VltError::InvalidGeometry(format!(
                "V-line branches must open upward (u2 > 0), got u = ({}, {})",
                u.d1, u.d2
            )));
        }
        Ok(VLineGeometry {
            u,
            v: Direction {
                d1: -u.d1,
                d2: u.d2,
            },
        })
    }

    #[inline]
    pub fn u(&self) -> Direction {
        self.u
    }

    #[inline]
    pub fn v(&self) -> Direction {
        self.v
    }

    pub fn phi(&self) -> f64 {
        self.u.angle()
    }

    #[inline]
    pub fn u1(&self) -> f64 {
        self.u.d1
    }

    #[inline]
    pub fn u2(&self) -> f64 {
        self.u.d2
    }
}

/// One branch of a star: direction and nonzero weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarBranch {
    pub direction: Direction,
    pub weight: f64,
}

/// Star with pairwise distinct branch directions and nonzero weights.
#[derive(Debug, Clone, PartialEq)]
pub struct StarGeometry {
    branches: Vec<StarBranch>,
}

impl StarGeometry {
    pub fn new(branches: Vec<StarBranch>) -> Result<Self> {
        if branches.is_empty() {
            return Err(VltError::InvalidGeometry("a star needs at least one branch".into()));
        }
        for (k, b) in branches.iter().enumerate() {
            if b.weight == 0.0 || !b.weight.is_finite() {
                return Err(VltError::InvalidGeometry(format!(
                    "branch {k} has weight {}; weights must be nonzero",
                    b.weight
                )));
            }
            for (l, other) in branches.iter().enumerate().skip(k + 1) {
                let cross = b.direction.d1 * other.direction.d2 - b.direction.d2 * other.direction.d1;
                let sep = cross.atan2(b.direction.dot(&other.direction)).abs();
                if sep <= DISTINCT_TOL {
                    return Err(VltError::InvalidGeometry(format!(
                        "branches {k} and {l} share a direction"
                    )));
                }
            }
        }
        Ok(StarGeometry { branches })
    }

    /// Branches at the given polar angles, all with weight 1.
    pub fn from_angles(angles: &[f64]) -> Result<Self> {
        Self::new(
            angles
                .iter()
                .map(|&a| StarBranch {
                    direction: Direction::from_angle(a),
                    weight: 1.0,
                })
                .collect(),
        )
    }

    /// Three unit-weight branches at polar angles 0, 2pi/3 and 4pi/3.
    pub fn three_branch() -> Self {
        Self::from_angles(&[0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0]).expect("valid geometry")
    }

    pub fn branches(&self) -> &[StarBranch] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }
}

//! Ring geometries.
//!
//! All lengths are in units of the transition wavelength λ. Atoms are labeled
//! by a 1-based global index `μ = (ring − 1)·n_phi + μ_φ`, where `μ_φ ∈
//! [1, n_phi]` is the azimuthal index on the ring. Atom `μ_φ = 1` sits at
//! azimuth 0 and the index increases counter-clockwise about ẑ.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum allowed separation between two atoms (λ units).
pub const MIN_SEPARATION: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };
    pub const X: Vec3 = Vec3 {
        x: 1.0,
        y: 0.0,
        z: 0.0,
    };
    pub const Y: Vec3 = Vec3 {
        x: 0.0,
        y: 1.0,
        z: 0.0,
    };
    pub const Z: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Rotate by `angle` radians about ẑ.
    pub fn rotate_z(self, angle: f64) -> Vec3 {
        let (s, c) = angle.sin_cos();
        Vec3::new(c * self.x - s * self.y, s * self.x + c * self.y, self.z)
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from([x, y, z]: [f64; 3]) -> Self {
        Vec3 { x, y, z }
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        self.x += o.x;
        self.y += o.y;
        self.z += o.z;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RingKind {
    Single,
    Stacked,
    Concentric,
    /// Arbitrary positions; azimuthal index equals the global index.
    Custom,
}

impl fmt::Display for RingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RingKind::Single => "single",
            RingKind::Stacked => "stacked",
            RingKind::Concentric => "concentric",
            RingKind::Custom => "custom",
        })
    }
}

impl std::str::FromStr for RingKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(RingKind::Single),
            "stacked" => Ok(RingKind::Stacked),
            "concentric" => Ok(RingKind::Concentric),
            "custom" => Ok(RingKind::Custom),
            other => Err(Error::InvalidGeometry(format!(
                "unknown ring kind `{other}`"
            ))),
        }
    }
}

/// Atom positions plus the ring metadata they were built from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomArray {
    kind: RingKind,
    n_phi: usize,
    n_rings: usize,
    r: f64,
    d_z: f64,
    d_r: f64,
    positions: Vec<Vec3>,
}

impl AtomArray {
    /// `n_phi` equidistant atoms on a ring of radius `r` in the z = 0 plane.
    pub fn single_ring(n_phi: usize, r: f64) -> Result<Self> {
        check_ring(n_phi, r)?;
        Self::assemble(RingKind::Single, n_phi, 1, r, 0.0, 0.0)
    }

    /// `n_z` copies of a single ring at heights `(k − 1)·d_z`.
    pub fn stacked_rings(n_phi: usize, n_z: usize, r: f64, d_z: f64) -> Result<Self> {
        check_ring(n_phi, r)?;
        if n_z == 0 {
            return Err(Error::InvalidGeometry("n_rings must be at least 1".into()));
        }
        if !(d_z.is_finite() && d_z >= 0.0) || (n_z > 1 && d_z <= 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "d_z must be positive for stacked rings, got {d_z}"
            )));
        }
        Self::assemble(RingKind::Stacked, n_phi, n_z, r, d_z, 0.0)
    }

    /// `n_r` coplanar rings with radii `r + (k − 1)·d_r` sharing azimuths.
    pub fn concentric_rings(n_phi: usize, n_r: usize, r: f64, d_r: f64) -> Result<Self> {
        check_ring(n_phi, r)?;
        if n_r == 0 {
            return Err(Error::InvalidGeometry("n_rings must be at least 1".into()));
        }
        if !(d_r.is_finite() && d_r >= 0.0) || (n_r > 1 && d_r <= 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "d_r must be positive for concentric rings, got {d_r}"
            )));
        }
        Self::assemble(RingKind::Concentric, n_phi, n_r, r, 0.0, d_r)
    }

    /// Arbitrary atom positions, treated as a single ring of `positions.len()`
    /// atoms for labeling purposes.
    pub fn from_positions(positions: Vec<Vec3>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidGeometry("no atoms".into()));
        }
        let r = positions
            .iter()
            .map(|p| p.x.hypot(p.y))
            .fold(0.0_f64, f64::max);
        let array = AtomArray {
            kind: RingKind::Custom,
            n_phi: positions.len(),
            n_rings: 1,
            r,
            d_z: 0.0,
            d_r: 0.0,
            positions,
        };
        array.validate()?;
        Ok(array)
    }

    fn assemble(
        kind: RingKind,
        n_phi: usize,
        n_rings: usize,
        r: f64,
        d_z: f64,
        d_r: f64,
    ) -> Result<Self> {
        let mut positions = Vec::with_capacity(n_phi * n_rings);
        for ring in 0..n_rings {
            let (radius, z) = match kind {
                RingKind::Stacked => (r, ring as f64 * d_z),
                RingKind::Concentric => (r + ring as f64 * d_r, 0.0),
                _ => (r, 0.0),
            };
            for j in 0..n_phi {
                let angle = TAU * j as f64 / n_phi as f64;
                let (s, c) = angle.sin_cos();
                positions.push(Vec3::new(radius * c, radius * s, z));
            }
        }
        let array = AtomArray {
            kind,
            n_phi,
            n_rings,
            r,
            d_z,
            d_r,
            positions,
        };
        array.validate()?;
        Ok(array)
    }

    /// Checks finiteness and the minimum pairwise separation.
    pub fn validate(&self) -> Result<()> {
        if self.positions.len() != self.n_phi * self.n_rings {
            return Err(Error::InvalidGeometry(format!(
                "{} positions for n_phi = {} and n_rings = {}",
                self.positions.len(),
                self.n_phi,
                self.n_rings
            )));
        }
        if let Some(p) = self.positions.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidGeometry(format!("non-finite position {p:?}")));
        }
        for (a, pa) in self.positions.iter().enumerate() {
            for (b, pb) in self.positions.iter().enumerate().skip(a + 1) {
                if (*pa - *pb).norm() <= MIN_SEPARATION {
                    return Err(Error::InvalidGeometry(format!(
                        "atoms {} and {} coincide",
                        a + 1,
                        b + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Uniformly rescale every length by `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "scale must be positive, got {s}"
            )));
        }
        let array = AtomArray {
            r: self.r * s,
            d_z: self.d_z * s,
            d_r: self.d_r * s,
            positions: self.positions.iter().map(|&p| p * s).collect(),
            ..*self
        };
        array.validate()?;
        Ok(array)
    }

    pub fn kind(&self) -> RingKind {
        self.kind
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn n_rings(&self) -> usize {
        self.n_rings
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn d_z(&self) -> f64 {
        self.d_z
    }

    pub fn d_r(&self) -> f64 {
        self.d_r
    }

    /// Total number of atoms `N`.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    /// Position of atom `mu` (1-based).
    pub fn position(&self, mu: usize) -> Result<Vec3> {
        self.check_index(mu)?;
        Ok(self.positions[mu - 1])
    }

    /// Azimuthal index `μ_φ ∈ [1, n_phi]` of the 1-based global index `mu`.
    pub fn azimuthal_index(&self, mu: usize) -> Result<usize> {
        self.check_index(mu)?;
        Ok((mu - 1) % self.n_phi + 1)
    }

    /// Ring index in `[1, n_rings]` of the 1-based global index `mu`.
    pub fn ring_index(&self, mu: usize) -> Result<usize> {
        self.check_index(mu)?;
        Ok((mu - 1) / self.n_phi + 1)
    }

    fn check_index(&self, mu: usize) -> Result<()> {
        if mu == 0 || mu > self.len() {
            return Err(Error::Index {
                index: mu,
                len: self.len(),
            });
        }
        Ok(())
    }

    /// Short human-readable descriptor used in output metadata.
    pub fn descriptor(&self) -> String {
        match self.kind {
            RingKind::Single => format!("single n_phi={} r={}", self.n_phi, self.r),
            RingKind::Stacked => format!(
                "stacked n_phi={} n_rings={} r={} d_z={}",
                self.n_phi, self.n_rings, self.r, self.d_z
            ),
            RingKind::Concentric => format!(
                "concentric n_phi={} n_rings={} r={} d_r={}",
                self.n_phi, self.n_rings, self.r, self.d_r
            ),
            RingKind::Custom => format!("custom n={}", self.len()),
        }
    }
}

fn check_ring(n_phi: usize, r: f64) -> Result<()> {
    if n_phi < 2 {
        return Err(Error::InvalidGeometry(format!(
            "n_phi must be at least 2, got {n_phi}"
        )));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "r must be positive, got {r}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn assert_vec_eq(a: Vec3, b: Vec3) {
        assert_abs_diff_eq!(a.x, b.x, epsilon = 1e-14);
        assert_abs_diff_eq!(a.y, b.y, epsilon = 1e-14);
        assert_abs_diff_eq!(a.z, b.z, epsilon = 1e-14);
    }

    #[test]
    fn four_atom_ring() {
        let a = AtomArray::single_ring(4, 0.2).unwrap();
        assert_eq!(a.len(), 4);
        assert_vec_eq(a.positions()[0], Vec3::new(0.2, 0.0, 0.0));
        assert_vec_eq(a.positions()[1], Vec3::new(0.0, 0.2, 0.0));
    }

    #[test]
    fn two_atom_ring() {
        let a = AtomArray::single_ring(2, 1.0).unwrap();
        assert_vec_eq(a.positions()[0], Vec3::new(1.0, 0.0, 0.0));
        assert_vec_eq(a.positions()[1], Vec3::new(-1.0, 0.0, 0.0));
    }

    #[test]
    fn twelve_atom_chord() {
        let a = AtomArray::single_ring(12, 0.2).unwrap();
        for p in a.positions() {
            assert_abs_diff_eq!(p.norm(), 0.2, epsilon = 1e-15);
        }
        let chord = (a.positions()[1] - a.positions()[0]).norm();
        assert_abs_diff_eq!(chord, 2.0 * 0.2 * (PI / 12.0).sin(), epsilon = 1e-15);
    }

    #[test]
    fn stacked() {
        let a = AtomArray::stacked_rings(8, 2, 0.2, 0.35).unwrap();
        assert_eq!(a.len(), 16);
        assert_vec_eq(a.position(9).unwrap(), Vec3::new(0.2, 0.0, 0.35));

        let one = AtomArray::stacked_rings(4, 1, 0.2, 0.35).unwrap();
        let single = AtomArray::single_ring(4, 0.2).unwrap();
        assert_eq!(one.positions(), single.positions());

        let three = AtomArray::stacked_rings(8, 3, 0.2, 0.35).unwrap();
        assert_eq!(three.len(), 24);
        let zmax = three
            .positions()
            .iter()
            .map(|p| p.z)
            .fold(f64::MIN, f64::max);
        assert_abs_diff_eq!(zmax, 0.7, epsilon = 1e-15);
    }

    #[test]
    fn concentric() {
        let a = AtomArray::concentric_rings(8, 2, 0.2, 0.2).unwrap();
        assert_eq!(a.len(), 16);
        assert_abs_diff_eq!(a.position(9).unwrap().norm(), 0.4, epsilon = 1e-15);

        let one = AtomArray::concentric_rings(8, 1, 0.2, 123.0).unwrap();
        assert_eq!(
            one.positions(),
            AtomArray::single_ring(8, 0.2).unwrap().positions()
        );

        let three = AtomArray::concentric_rings(8, 3, 0.2, 0.2).unwrap();
        for (ring, radius) in [(1, 0.2), (2, 0.4), (3, 0.6)] {
            for j in 1..=8 {
                let p = three.position((ring - 1) * 8 + j).unwrap();
                assert_abs_diff_eq!(p.norm(), radius, epsilon = 1e-14);
                assert_eq!(p.z, 0.0);
            }
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(
            AtomArray::single_ring(1, 0.2),
            Err(Error::InvalidGeometry(_))
        ));
        assert!(matches!(
            AtomArray::single_ring(4, 0.0),
            Err(Error::InvalidGeometry(_))
        ));
        assert!(matches!(
            AtomArray::single_ring(4, -1.0),
            Err(Error::InvalidGeometry(_))
        ));
        assert!(matches!(
            AtomArray::stacked_rings(4, 0, 0.2, 0.3),
            Err(Error::InvalidGeometry(_))
        ));
        assert!(matches!(
            AtomArray::stacked_rings(4, 2, 0.2, 0.0),
            Err(Error::InvalidGeometry(_))
        ));
        assert!(matches!(
            AtomArray::concentric_rings(4, 2, 0.2, 0.0),
            Err(Error::InvalidGeometry(_))
        ));
        assert!(matches!(
            AtomArray::from_positions(vec![Vec3::ZERO, Vec3::new(0.0, 0.0, 1e-12)]),
            Err(Error::InvalidGeometry(_))
        ));
    }

    #[test]
    fn azimuthal_labels() {
        let a = AtomArray::stacked_rings(8, 2, 0.2, 0.35).unwrap();
        assert_eq!(a.azimuthal_index(9).unwrap(), 1);
        assert_eq!(a.azimuthal_index(8).unwrap(), 8);
        assert_eq!(a.ring_index(9).unwrap(), 2);
        let b = AtomArray::single_ring(4, 0.2).unwrap();
        assert_eq!(b.azimuthal_index(3).unwrap(), 3);
        assert!(matches!(b.azimuthal_index(0), Err(Error::Index { .. })));
        assert!(matches!(b.azimuthal_index(5), Err(Error::Index { .. })));
        for mu in 1..=8 {
            assert_eq!(
                a.azimuthal_index(mu).unwrap(),
                a.azimuthal_index(mu + 8).unwrap()
            );
        }
    }

    #[test]
    fn rotation_invariance() {
        for n in [2, 3, 4, 7, 12] {
            let a = AtomArray::single_ring(n, 0.37).unwrap();
            let step = TAU / n as f64;
            for p in a.positions() {
                let q = p.rotate_z(step);
                let closest = a
                    .positions()
                    .iter()
                    .map(|s| (*s - q).norm())
                    .fold(f64::MAX, f64::min);
                assert!(
                    closest < 1e-12,
                    "n = {n}: rotated atom off-lattice by {closest}"
                );
            }
        }
    }

    #[test]
    fn json_shape() {
        let a = AtomArray::single_ring(2, 1.0).unwrap();
        let v: serde_json::Value = serde_json::to_value(&a).unwrap();
        assert_eq!(v["kind"], "single");
        assert_eq!(v["n_phi"], 2);
        assert_eq!(v["positions"][1][0], -1.0);
        let back: AtomArray = serde_json::from_value(v).unwrap();
        assert_eq!(back, a);
    }
}

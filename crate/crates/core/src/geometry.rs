//! Qubit geometry: Bloch vectors, Pauli observables, projectors and the
//! doublet configurations used by the entanglement and discord tests.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{ComplexMatrix, DensityMatrix, Projector, C64};

const UNIT_TOL: f64 = 1e-12;

pub type Vec3 = [f64; 3];

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

fn lin(ka: f64, a: Vec3, kb: f64, b: Vec3) -> Vec3 {
    [ka * a[0] + kb * b[0], ka * a[1] + kb * b[1], ka * a[2] + kb * b[2]]
}

/// Qubit state parameter `p` in `rho = (1 + sigma.p) / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec3", into = "Vec3")]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const ORIGIN: BlochVector = BlochVector { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = [x, y, z];
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("Bloch vector has non-finite components"));
        }
        let n = norm(v);
        if n > 1.0 + UNIT_TOL {
            return Err(Error::invalid(format!("Bloch vector norm {n} exceeds 1")));
        }
        Ok(BlochVector { x, y, z })
    }

    pub fn to_array(self) -> Vec3 {
        [self.x, self.y, self.z]
    }

    pub fn norm(self) -> f64 {
        norm(self.to_array())
    }

    /// Bloch vector of a qubit density matrix, `p_k = Tr(rho sigma_k)`.
    pub fn of_state(rho: &DensityMatrix) -> Result<Self> {
        if rho.dim() != 2 {
            return Err(Error::invalid("Bloch vector needs a qubit state"));
        }
        let m = rho.matrix();
        let x = 2.0 * m[(1, 0)].re;
        let y = 2.0 * m[(1, 0)].im;
        let z = (m[(0, 0)] - m[(1, 1)]).re;
        // Valid states can overshoot the unit ball by roundoff only.
        let n = norm([x, y, z]);
        let s = if n > 1.0 { 1.0 / n } else { 1.0 };
        Ok(BlochVector { x: x * s, y: y * s, z: z * s })
    }
}

impl TryFrom<Vec3> for BlochVector {
    type Error = Error;

    fn try_from(v: Vec3) -> Result<Self> {
        BlochVector::new(v[0], v[1], v[2])
    }
}

impl From<BlochVector> for Vec3 {
    fn from(b: BlochVector) -> Self {
        b.to_array()
    }
}

/// Direction on the unit sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec3", into = "Vec3")]
pub struct UnitVector3 {
    x: f64,
    y: f64,
    z: f64,
}

impl UnitVector3 {
    pub const X: UnitVector3 = UnitVector3 { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: UnitVector3 = UnitVector3 { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: UnitVector3 = UnitVector3 { x: 0.0, y: 0.0, z: 1.0 };

    /// Accepts only vectors already of unit length (within 1e-12).
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = [x, y, z];
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("direction has non-finite components"));
        }
        let n = norm(v);
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::invalid(format!("direction has norm {n}, expected 1")));
        }
        Ok(UnitVector3 { x, y, z })
    }

    /// Normalizes any non-zero finite vector.
    pub fn normalize(v: Vec3) -> Result<Self> {
        let n = norm(v);
        if !n.is_finite() || n < 1e-300 {
            return Err(Error::invalid("cannot normalize a zero or non-finite vector"));
        }
        Ok(UnitVector3 {
            x: v[0] / n,
            y: v[1] / n,
            z: v[2] / n,
        })
    }

    /// Direction in the xy-plane at azimuth `phi`, measured from x towards y.
    pub fn in_xy_plane(phi: f64) -> Self {
        UnitVector3 {
            x: phi.cos(),
            y: phi.sin(),
            z: 0.0,
        }
    }

    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        UnitVector3 {
            x: theta.sin() * phi.cos(),
            y: theta.sin() * phi.sin(),
            z: theta.cos(),
        }
    }

    pub fn to_array(self) -> Vec3 {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, other: UnitVector3) -> f64 {
        dot(self.to_array(), other.to_array())
    }

    pub fn neg(self) -> Self {
        UnitVector3 {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }
}

impl TryFrom<Vec3> for UnitVector3 {
    type Error = Error;

    fn try_from(v: Vec3) -> Result<Self> {
        UnitVector3::new(v[0], v[1], v[2])
    }
}

impl From<UnitVector3> for Vec3 {
    fn from(u: UnitVector3) -> Self {
        u.to_array()
    }
}

/// Eigenvalue label of a dichotomic observable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Outcome::Plus => '+',
            Outcome::Minus => '-',
        }
    }
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_fn(2, 2, |r, c| if r != c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_fn(2, 2, |r, c| match (r, c) {
        (0, 1) => C64::new(0.0, -1.0),
        (1, 0) => C64::new(0.0, 1.0),
        _ => C64::new(0.0, 0.0),
    })
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::diagonal(&[C64::new(1.0, 0.0), C64::new(-1.0, 0.0)])
}

/// `sigma . v` for an arbitrary real 3-vector.
pub fn sigma_dot(v: Vec3) -> ComplexMatrix {
    ComplexMatrix::from_fn(2, 2, |r, c| match (r, c) {
        (0, 0) => C64::new(v[2], 0.0),
        (1, 1) => C64::new(-v[2], 0.0),
        (0, 1) => C64::new(v[0], -v[1]),
        _ => C64::new(v[0], v[1]),
    })
}

/// The qubit state `(1 + sigma.p) / 2`.
pub fn bloch_state(p: BlochVector) -> DensityMatrix {
    let m = (&ComplexMatrix::identity(2) + &sigma_dot(p.to_array())).scale_real(0.5);
    DensityMatrix::new(m).expect("a Bloch vector inside the unit ball is a valid state")
}

/// `(1 + s sigma.n) / 2` for outcome sign `s`.
pub fn qubit_projector(n: UnitVector3, outcome: Outcome) -> Projector {
    let m = (&ComplexMatrix::identity(2) + &sigma_dot(n.to_array()).scale_real(outcome.sign()))
        .scale_real(0.5);
    Projector::new(m).expect("unit direction yields a rank-1 projector")
}

/// Two directions with included angle `alpha`, symmetric about `axis`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Doublet {
    pub n1: UnitVector3,
    pub n2: UnitVector3,
    pub axis: UnitVector3,
    pub alpha: f64,
}

impl Doublet {
    pub fn projectors(&self, o1: Outcome, o2: Outcome) -> (Projector, Projector) {
        (qubit_projector(self.n1, o1), qubit_projector(self.n2, o2))
    }
}

/// How the plane of a doublet is oriented around its axis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub enum AzimuthRule {
    /// `axis x z` when the axis is far from z (`|axis.z| < 0.9`), else `y x axis`.
    #[default]
    Standard,
    /// Split along the component of the given vector orthogonal to the axis.
    Towards(UnitVector3),
}

impl AzimuthRule {
    fn direction(self, axis: UnitVector3) -> Result<UnitVector3> {
        let a = axis.to_array();
        let raw = match self {
            AzimuthRule::Standard => {
                if a[2].abs() < 0.9 {
                    cross(a, [0.0, 0.0, 1.0])
                } else {
                    cross([0.0, 1.0, 0.0], a)
                }
            }
            AzimuthRule::Towards(t) => {
                let t = t.to_array();
                lin(1.0, t, -dot(t, a), a)
            }
        };
        if norm(raw) < 1e-8 {
            return Err(Error::invalid("azimuth reference is parallel to the axis"));
        }
        UnitVector3::normalize(raw)
    }
}

/// `n_{1,2} = cos(alpha/2) axis +- sin(alpha/2) u` with `u` chosen by `rule`.
pub fn make_doublet(axis: UnitVector3, alpha: f64, rule: AzimuthRule) -> Result<Doublet> {
    if !(alpha > 0.0 && alpha < std::f64::consts::PI) {
        return Err(Error::invalid(format!("doublet angle {alpha} outside (0, pi)")));
    }
    let u = rule.direction(axis)?.to_array();
    let (s, c) = (alpha / 2.0).sin_cos();
    let a = axis.to_array();
    Ok(Doublet {
        n1: UnitVector3::normalize(lin(c, a, s, u))?,
        n2: UnitVector3::normalize(lin(c, a, -s, u))?,
        axis,
        alpha,
    })
}

/// A direction orthogonal to `n` (mutually unbiased eigenbases), picked by
/// the same rule that orients doublets.
pub fn mub_partner(n: UnitVector3) -> UnitVector3 {
    AzimuthRule::Standard
        .direction(n)
        .expect("standard azimuth rule is singularity-free")
}

/// Orthonormal frame check: pairwise orthogonal unit vectors.
pub fn check_frame(frame: &[UnitVector3; 3]) -> Result<()> {
    for i in 0..3 {
        for j in i + 1..3 {
            let d = frame[i].dot(frame[j]);
            if d.abs() > 1e-10 {
                return Err(Error::invalid(format!(
                    "frame vectors {i} and {j} are not orthogonal (dot = {d:e})"
                )));
            }
        }
    }
    let triple = dot(frame[0].to_array(), cross(frame[1].to_array(), frame[2].to_array()));
    if (triple.abs() - 1.0).abs() > 1e-10 {
        return Err(Error::invalid("frame is not orthonormal"));
    }
    Ok(())
}

pub const STANDARD_FRAME: [UnitVector3; 3] = [UnitVector3::X, UnitVector3::Y, UnitVector3::Z];

/// Six doublets (three per qubit) around two orthonormal frames.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementGeometry {
    pub alpha: f64,
    pub a_axes: [UnitVector3; 3],
    pub b_axes: [UnitVector3; 3],
    pub a_doublets: [Doublet; 3],
    pub b_doublets: [Doublet; 3],
}

pub fn make_entanglement_geometry(
    alpha: f64,
    a_frame: [UnitVector3; 3],
    b_frame: [UnitVector3; 3],
) -> Result<EntanglementGeometry> {
    check_frame(&a_frame)?;
    check_frame(&b_frame)?;
    let build = |frame: &[UnitVector3; 3]| -> Result<[Doublet; 3]> {
        Ok([
            make_doublet(frame[0], alpha, AzimuthRule::Standard)?,
            make_doublet(frame[1], alpha, AzimuthRule::Standard)?,
            make_doublet(frame[2], alpha, AzimuthRule::Standard)?,
        ])
    };
    Ok(EntanglementGeometry {
        alpha,
        a_axes: a_frame,
        b_axes: b_frame,
        a_doublets: build(&a_frame)?,
        b_doublets: build(&b_frame)?,
    })
}

impl EntanglementGeometry {
    /// Both qubits use the `x, y, z` frame.
    pub fn standard(alpha: f64) -> Result<Self> {
        make_entanglement_geometry(alpha, STANDARD_FRAME, STANDARD_FRAME)
    }
}

/// Two-qubit Werner state `(1 - eta sigma_1 . sigma_2) / 4`, `-1/3 <= eta <= 1`.
pub fn werner_state(eta: f64) -> Result<DensityMatrix> {
    if !(-1.0 / 3.0 - UNIT_TOL..=1.0 + UNIT_TOL).contains(&eta) {
        return Err(Error::invalid(format!(
            "Werner parameter {eta} outside [-1/3, 1]"
        )));
    }
    let ss = [pauli_x(), pauli_y(), pauli_z()]
        .iter()
        .map(|s| crate::operator::tensor_product(s, s).expect("2x2 factors"))
        .fold(ComplexMatrix::zeros(4, 4), |acc, m| &acc + &m);
    let m = (&ComplexMatrix::identity(4) - &ss.scale_real(eta)).scale_real(0.25);
    DensityMatrix::new(m)
}

/// `(|01> - |10>) / sqrt 2` as a density matrix.
pub fn singlet() -> DensityMatrix {
    let psi = [
        C64::new(0.0, 0.0),
        C64::new(FRAC_1_SQRT_2, 0.0),
        C64::new(-FRAC_1_SQRT_2, 0.0),
        C64::new(0.0, 0.0),
    ];
    DensityMatrix::pure(&psi).expect("normalized vector")
}

/// Rotation of `v` about unit `axis` by `angle` (Rodrigues).
pub fn rotate(v: Vec3, axis: UnitVector3, angle: f64) -> Vec3 {
    let k = axis.to_array();
    let (s, c) = angle.sin_cos();
    let kxv = cross(k, v);
    let kv = dot(k, v);
    [
        v[0] * c + kxv[0] * s + k[0] * kv * (1.0 - c),
        v[1] * c + kxv[1] * s + k[1] * kv * (1.0 - c),
        v[2] * c + kxv[2] * s + k[2] * kv * (1.0 - c),
    ]
}

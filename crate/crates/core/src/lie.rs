//! Linear-algebra and Lie-theoretic primitives for so(3), SO(3), se(3) and SE(3).
//!
//! Rotations are kept as plain 3×3 matrices. Nothing in this crate
//! re-orthonormalizes a matrix after construction, so manifold drift during
//! long rollouts stays observable.
//!
//! Momenta in se(3)* are written as pairs `(A, B)` of angular and linear
//! parts; algebra elements as `(a, b)`. The pairing is `a·A + b·B`.

use crate::error::{Error, Result};
use nalgebra::{Matrix3, Matrix4, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Tolerance on `‖RᵀR − I‖_F` and `|det R − 1|` accepted by [`Rotation::new`].
pub const ROTATION_TOL: f64 = 1e-12;

/// Below this angle Rodrigues' coefficients switch to their Taylor series.
const SMALL_ANGLE: f64 = 1e-8;

/// Skew-symmetric matrix with `hat(v) * w == v × w`.
#[inline]
pub fn hat(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`hat`], extended to arbitrary matrices through their
/// antisymmetric part `(M − Mᵀ)/2`.
#[inline]
pub fn vee(m: &Mat3) -> Vec3 {
    Vec3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    )
}

/// Adjoint of [`vee`] under the Frobenius product: `g · vee(M) == vee_adjoint(g) : M`.
#[inline]
pub fn vee_adjoint(g: &Vec3) -> Mat3 {
    hat(g) * 0.5
}

/// `‖MᵀM − I‖_F`.
pub fn orthogonality_defect(m: &Mat3) -> f64 {
    (m.transpose() * m - Mat3::identity()).norm()
}

/// Inverse of a matrix that stands for a rotation, or its transpose if singular.
///
/// Layers divide by the stored orientation rather than transposing it, so the
/// Casimirs stay exact even after rounding has moved it slightly off SO(3).
#[inline]
pub fn rotation_inverse(q: &Mat3) -> Mat3 {
    q.try_inverse().unwrap_or_else(|| q.transpose())
}

/// Rotation about the coordinate axis `axis ∈ {0, 1, 2}` by `angle`.
#[inline]
pub fn basis_rotation(axis: usize, angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    match axis {
        0 => Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c),
        1 => Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c),
        2 => Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
        _ => panic!("basis axis out of range: {axis}"),
    }
}

/// Rotation about a coordinate axis, applied as `x + (R - I) x`.
///
/// Near the identity this rounds far less than a plain matrix product, since
/// `cos θ - 1` is formed as `-2 sin²(θ/2)` and never passes through `cos θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRotation {
    j: usize,
    k: usize,
    s: f64,
    cm1: f64,
}

impl AxisRotation {
    pub fn new(axis: usize, angle: f64) -> Self {
        assert!(axis < 3, "basis axis out of range: {axis}");
        let h = (0.5 * angle).sin();
        AxisRotation { j: (axis + 1) % 3, k: (axis + 2) % 3, s: angle.sin(), cm1: -2.0 * h * h }
    }

    #[inline]
    fn pair(&self, a: f64, b: f64) -> (f64, f64) {
        (a + self.cm1.mul_add(a, -(self.s * b)), b + self.cm1.mul_add(b, self.s * a))
    }

    /// `R v`.
    pub fn apply(&self, v: &Vec3) -> Vec3 {
        let mut o = *v;
        (o[self.j], o[self.k]) = self.pair(v[self.j], v[self.k]);
        o
    }

    /// `R m`.
    pub fn left_mul(&self, m: &Mat3) -> Mat3 {
        let mut o = *m;
        for c in 0..3 {
            (o[(self.j, c)], o[(self.k, c)]) = self.pair(m[(self.j, c)], m[(self.k, c)]);
        }
        o
    }

    /// `m Rᵀ`.
    pub fn right_mul_transpose(&self, m: &Mat3) -> Mat3 {
        let mut o = *m;
        for r in 0..3 {
            (o[(r, self.j)], o[(r, self.k)]) = self.pair(m[(r, self.j)], m[(r, self.k)]);
        }
        o
    }
}

/// Unit coordinate vector `e_axis`.
#[inline]
pub fn basis(axis: usize) -> Vec3 {
    let mut e = Vec3::zeros();
    e[axis] = 1.0;
    e
}

/// An element of SO(3) stored as a matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Mat3);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Mat3::identity())
    }

    /// Validates orthogonality and orientation to [`ROTATION_TOL`].
    pub fn new(m: Mat3) -> Result<Self> {
        let orthogonality = orthogonality_defect(&m);
        let det = m.determinant();
        if !(orthogonality <= ROTATION_TOL) || !((det - 1.0).abs() <= ROTATION_TOL) {
            return Err(Error::NotARotation { orthogonality, det });
        }
        Ok(Rotation(m))
    }

    /// Wraps a matrix produced by composing rotations, without re-checking it.
    pub(crate) fn from_matrix_unchecked(m: Mat3) -> Self {
        Rotation(m)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn into_inner(self) -> Mat3 {
        self.0
    }

    pub fn transpose(&self) -> Self {
        Rotation(self.0.transpose())
    }

    pub fn compose(&self, other: &Rotation) -> Self {
        Rotation(self.0 * other.0)
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }
}

/// Rodrigues rotation about `axis` by `angle` radians.
///
/// The axis is normalized when its length is off by more than 1e-9. A zero
/// axis is only accepted together with a zero angle.
pub fn rot(axis: &Vec3, angle: f64) -> Result<Rotation> {
    let norm = axis.norm();
    if norm == 0.0 || !norm.is_finite() {
        if angle == 0.0 {
            return Ok(Rotation::identity());
        }
        return Err(Error::ZeroAxis(angle));
    }
    let unit = if (norm - 1.0).abs() > 1e-9 { axis / norm } else { *axis };
    let k = hat(&unit);
    let (s, one_minus_c) = if angle.abs() < SMALL_ANGLE {
        (angle, 0.5 * angle * angle)
    } else {
        let h = (0.5 * angle).sin();
        (angle.sin(), 2.0 * h * h)
    };
    Ok(Rotation(Mat3::identity() + k * s + k * k * one_minus_c))
}

/// Element `(Q, v)` of SE(3), acting as `x ↦ Qx + v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SE3Element {
    pub rot: Rotation,
    pub trans: Vec3,
}

impl SE3Element {
    pub fn new(rot: Rotation, trans: Vec3) -> Self {
        SE3Element { rot, trans }
    }

    pub fn identity() -> Self {
        SE3Element::new(Rotation::identity(), Vec3::zeros())
    }

    /// Homogeneous 4×4 representation.
    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(self.rot.matrix());
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.trans);
        m
    }
}

/// `g1 · g2 = (Q1 Q2, Q1 v2 + v1)`.
pub fn se3_compose(g1: &SE3Element, g2: &SE3Element) -> SE3Element {
    SE3Element {
        rot: g1.rot.compose(&g2.rot),
        trans: g1.rot.apply(&g2.trans) + g1.trans,
    }
}

/// `g⁻¹ = (Qᵀ, −Qᵀ v)`.
pub fn se3_inverse(g: &SE3Element) -> SE3Element {
    let qt = g.rot.transpose();
    SE3Element {
        trans: -qt.apply(&g.trans),
        rot: qt,
    }
}

/// Algebra bracket `ad_(a,b)(c,d) = (a×c, a×d − c×b)`.
pub fn ad_se3(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> (Vec3, Vec3) {
    (a.cross(c), a.cross(d) - c.cross(b))
}

/// Coadjoint algebra action `ad*_(a,b)(A,B) = (−a×A − b×B, −a×B)`.
pub fn ad_star_se3(a: &Vec3, b: &Vec3, big_a: &Vec3, big_b: &Vec3) -> (Vec3, Vec3) {
    (-a.cross(big_a) - b.cross(big_b), -a.cross(big_b))
}

/// Group adjoint `Ad_g(a,b) = (Qa, Qb + v×Qa)`.
pub fn adjoint_se3(g: &SE3Element, a: &Vec3, b: &Vec3) -> (Vec3, Vec3) {
    let qa = g.rot.apply(a);
    (qa, g.rot.apply(b) + g.trans.cross(&qa))
}

/// `Ad*_(g⁻¹)(A,B) = (QA + v×QB, QB)`, the dual of [`adjoint_se3`] at `g⁻¹`.
pub fn coad_se3_group(g: &SE3Element, big_a: &Vec3, big_b: &Vec3) -> (Vec3, Vec3) {
    let qb = g.rot.apply(big_b);
    (g.rot.apply(big_a) + g.trans.cross(&qb), qb)
}

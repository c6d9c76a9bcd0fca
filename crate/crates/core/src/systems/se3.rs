//! Two coupled SE(3) elements, reduced to `(α1, β1, α2, β2, Q, v)`.

use super::so3::write_rows;
use super::PhaseState;
use crate::error::{Error, Result};
use crate::lie::{hat, vee, Mat3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Se3State {
    pub alpha1: Vec3,
    pub beta1: Vec3,
    pub alpha2: Vec3,
    pub beta2: Vec3,
    pub q: Mat3,
    pub v: Vec3,
}

impl Se3State {
    pub fn zeros() -> Self {
        Se3State {
            alpha1: Vec3::zeros(),
            beta1: Vec3::zeros(),
            alpha2: Vec3::zeros(),
            beta2: Vec3::zeros(),
            q: Mat3::zeros(),
            v: Vec3::zeros(),
        }
    }

    /// Zero momenta at `Q = I`, `v = 0`.
    pub fn rest() -> Self {
        Se3State { q: Mat3::identity(), ..Se3State::zeros() }
    }

    pub fn scaled_add(&mut self, k: f64, o: &Se3State) {
        self.alpha1 += o.alpha1 * k;
        self.beta1 += o.beta1 * k;
        self.alpha2 += o.alpha2 * k;
        self.beta2 += o.beta2 * k;
        self.q += o.q * k;
        self.v += o.v * k;
    }
}

impl PhaseState for Se3State {
    const DIM: usize = 24;

    fn write_flat(&self, out: &mut [f64]) {
        out[0..3].copy_from_slice(self.alpha1.as_slice());
        out[3..6].copy_from_slice(self.beta1.as_slice());
        out[6..9].copy_from_slice(self.alpha2.as_slice());
        out[9..12].copy_from_slice(self.beta2.as_slice());
        write_rows(&self.q, &mut out[12..21]);
        out[21..24].copy_from_slice(self.v.as_slice());
    }

    fn read_flat(x: &[f64]) -> Result<Self> {
        super::check_len(x, Self::DIM)?;
        let v3 = |k: usize| Vec3::from_column_slice(&x[k..k + 3]);
        Ok(Se3State {
            alpha1: v3(0),
            beta1: v3(3),
            alpha2: v3(6),
            beta2: v3(9),
            q: Mat3::from_row_slice(&x[12..21]),
            v: v3(21),
        })
    }
}

/// Partial derivatives of a Hamiltonian; `dq` is the entrywise gradient `∂h/∂Q_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Se3Partials {
    pub a1: Vec3,
    pub b1: Vec3,
    pub a2: Vec3,
    pub b2: Vec3,
    pub dq: Mat3,
    pub dv: Vec3,
}

pub trait Se3Hamiltonian {
    fn energy(&self, s: &Se3State) -> Result<f64>;

    /// Central differences unless overridden.
    fn partials(&self, s: &Se3State) -> Result<Se3Partials> {
        let x = s.to_flat();
        let g = super::fd_gradient(&x, |y| self.energy(&Se3State::read_flat(y)?))?;
        let v3 = |k: usize| Vec3::from_column_slice(&g[k..k + 3]);
        Ok(Se3Partials {
            a1: v3(0),
            b1: v3(3),
            a2: v3(6),
            b2: v3(9),
            dq: Mat3::from_row_slice(&g[12..21]),
            dv: v3(21),
        })
    }
}

pub fn se3_field_from_partials(s: &Se3State, d: &Se3Partials) -> Se3State {
    let q = &s.q;
    let g = d.dq * 2.0;
    let w = d.dv;
    let qtw = q.transpose() * w;
    Se3State {
        alpha1: -d.a1.cross(&s.alpha1) - d.b1.cross(&s.beta1) + vee(&(g * q.transpose())) + s.v.cross(&w),
        beta1: -d.a1.cross(&s.beta1) + w,
        alpha2: -d.a2.cross(&s.alpha2) - d.b2.cross(&s.beta2) - vee(&(q.transpose() * g)),
        beta2: -d.a2.cross(&s.beta2) - qtw,
        q: -hat(&d.a1) * q + q * hat(&d.a2),
        v: -d.a1.cross(&s.v) - d.b1 + q * d.b2,
    }
}

pub fn se3_vector_field<H: Se3Hamiltonian + ?Sized>(h: &H, s: &Se3State) -> Result<Se3State> {
    Ok(se3_field_from_partials(s, &h.partials(s)?))
}

/// `(ᾱ·β̄, |β̄|²)` with `ᾱ = α1 + Qα2 + v×Qβ2`, `β̄ = β1 + Qβ2`.
pub fn se3_casimirs(s: &Se3State) -> (f64, f64) {
    let qb = s.q * s.beta2;
    let ab = s.alpha1 + s.q * s.alpha2 + s.v.cross(&qb);
    let bb = s.beta1 + qb;
    (ab.dot(&bb), bb.norm_squared())
}

/// Diagonal inertia, masses and quadratic potentials.
#[derive(Debug, Clone, PartialEq)]
pub struct Se3System {
    pub inertia1: Vec3,
    pub inertia2: Vec3,
    pub m1: f64,
    pub m2: f64,
    pub p_diag: Vec3,
    pub l_diag: Vec3,
}

impl Default for Se3System {
    fn default() -> Self {
        Se3System {
            inertia1: Vec3::new(1.0, 2.0, 3.0),
            inertia2: Vec3::new(2.0, 3.0, 4.0),
            m1: 1.0,
            m2: 1.0,
            p_diag: Vec3::new(1.0, 2.0, 3.0),
            l_diag: Vec3::new(1.0, 2.0, 3.0),
        }
    }
}

impl Se3System {
    pub fn new(inertia1: Vec3, inertia2: Vec3, m1: f64, m2: f64, p_diag: Vec3, l_diag: Vec3) -> Result<Self> {
        let masses = [m1, m2];
        let mut positive = inertia1.iter().chain(inertia2.iter()).chain(masses.iter());
        if positive.any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::InvalidParameter("inertias and masses must be positive".into()));
        }
        Ok(Se3System { inertia1, inertia2, m1, m2, p_diag, l_diag })
    }
}

impl Se3Hamiltonian for Se3System {
    fn energy(&self, s: &Se3State) -> Result<f64> {
        let kin = s.alpha1.component_div(&self.inertia1).dot(&s.alpha1)
            + s.beta1.norm_squared() / self.m1
            + s.alpha2.component_div(&self.inertia2).dot(&s.alpha2)
            + s.beta2.norm_squared() / self.m2;
        let e = s.q - Mat3::identity();
        let rot = (e.transpose() * Mat3::from_diagonal(&self.p_diag) * e).trace();
        let trans = s.v.component_mul(&self.l_diag).dot(&s.v);
        Ok(0.5 * (kin + rot + trans))
    }

    fn partials(&self, s: &Se3State) -> Result<Se3Partials> {
        Ok(Se3Partials {
            a1: s.alpha1.component_div(&self.inertia1),
            b1: s.beta1 / self.m1,
            a2: s.alpha2.component_div(&self.inertia2),
            b2: s.beta2 / self.m2,
            dq: Mat3::from_diagonal(&self.p_diag) * (s.q - Mat3::identity()),
            dv: s.v.component_mul(&self.l_diag),
        })
    }
}

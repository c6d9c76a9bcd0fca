//! Planar reduction: both momenta along `e3`, relative orientation `p = Rz(Φ)`.

use super::so3::{So3Hamiltonian, So3State, So3System};
use super::PhaseState;
use crate::error::Result;
use crate::lie::{basis_rotation, Mat3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct So2State {
    pub mu1: f64,
    pub mu2: f64,
    pub phi: f64,
}

impl So2State {
    pub fn new(mu1: f64, mu2: f64, phi: f64) -> Self {
        So2State { mu1, mu2, phi }
    }

    pub fn zeros() -> Self {
        So2State::new(0.0, 0.0, 0.0)
    }

    /// The corresponding point of the full system.
    pub fn embed(&self) -> So3State {
        So3State::new(Vec3::new(0.0, 0.0, self.mu1), Vec3::new(0.0, 0.0, self.mu2), p_of_phi(self.phi))
    }

    pub fn scaled_add(&mut self, k: f64, o: &So2State) {
        self.mu1 += k * o.mu1;
        self.mu2 += k * o.mu2;
        self.phi += k * o.phi;
    }
}

pub fn p_of_phi(phi: f64) -> Mat3 {
    basis_rotation(2, phi)
}

impl PhaseState for So2State {
    const DIM: usize = 3;

    fn write_flat(&self, out: &mut [f64]) {
        out[0] = self.mu1;
        out[1] = self.mu2;
        out[2] = self.phi;
    }

    fn read_flat(x: &[f64]) -> Result<Self> {
        super::check_len(x, Self::DIM)?;
        Ok(So2State::new(x[0], x[1], x[2]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct So2Partials {
    pub dmu1: f64,
    pub dmu2: f64,
    pub dphi: f64,
}

pub trait So2Hamiltonian {
    fn energy(&self, s: &So2State) -> Result<f64>;

    fn partials(&self, s: &So2State) -> Result<So2Partials> {
        let g = super::fd_gradient(&s.to_flat(), |y| self.energy(&So2State::read_flat(y)?))?;
        Ok(So2Partials { dmu1: g[0], dmu2: g[1], dphi: g[2] })
    }
}

pub fn so2_field_from_partials(d: &So2Partials) -> So2State {
    So2State {
        mu1: d.dphi,
        mu2: -d.dphi,
        phi: -(d.dmu1 - d.dmu2),
    }
}

pub fn so2_vector_field<H: So2Hamiltonian + ?Sized>(h: &H, s: &So2State) -> Result<So2State> {
    Ok(so2_field_from_partials(&h.partials(s)?))
}

/// `μ1 + μ2`.
pub fn so2_casimir(s: &So2State) -> f64 {
    s.mu1 + s.mu2
}

/// Planar restriction of an [`So3System`]. Only the `e3` inertias enter.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct So2System {
    pub base: So3System,
}

impl So2System {
    pub fn new(base: So3System) -> Self {
        So2System { base }
    }

    /// Coulomb torque about `e3` on body 1.
    pub fn torque(&self, phi: f64) -> Result<f64> {
        Ok(self.base.force_on_body1(&p_of_phi(phi))?.z)
    }
}

impl So2Hamiltonian for So2System {
    fn energy(&self, s: &So2State) -> Result<f64> {
        self.base.energy(&s.embed())
    }

    fn partials(&self, s: &So2State) -> Result<So2Partials> {
        Ok(So2Partials {
            dmu1: s.mu1 / self.base.inertia1.z,
            dmu2: s.mu2 / self.base.inertia2.z,
            dphi: self.torque(s.phi)?,
        })
    }
}

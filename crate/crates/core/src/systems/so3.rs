//! Two rigid bodies coupled through point charges, reduced to `(μ1, μ2, p)`.

use super::PhaseState;
use crate::error::{Error, Result};
use crate::lie::{hat, vee, Mat3, Vec3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct So3State {
    pub mu1: Vec3,
    pub mu2: Vec3,
    /// Relative orientation `R1ᵀ R2`.
    pub p: Mat3,
}

impl So3State {
    pub fn new(mu1: Vec3, mu2: Vec3, p: Mat3) -> Self {
        So3State { mu1, mu2, p }
    }

    pub fn zeros() -> Self {
        So3State::new(Vec3::zeros(), Vec3::zeros(), Mat3::zeros())
    }

    pub fn scaled_add(&mut self, k: f64, other: &So3State) {
        self.mu1 += other.mu1 * k;
        self.mu2 += other.mu2 * k;
        self.p += other.p * k;
    }
}

impl PhaseState for So3State {
    const DIM: usize = 15;

    fn write_flat(&self, out: &mut [f64]) {
        out[0..3].copy_from_slice(self.mu1.as_slice());
        out[3..6].copy_from_slice(self.mu2.as_slice());
        write_rows(&self.p, &mut out[6..15]);
    }

    fn read_flat(x: &[f64]) -> Result<Self> {
        super::check_len(x, Self::DIM)?;
        Ok(So3State {
            mu1: Vec3::from_column_slice(&x[0..3]),
            mu2: Vec3::from_column_slice(&x[3..6]),
            p: Mat3::from_row_slice(&x[6..15]),
        })
    }
}

pub(crate) fn write_rows(m: &Mat3, out: &mut [f64]) {
    for i in 0..3 {
        for j in 0..3 {
            out[3 * i + j] = m[(i, j)];
        }
    }
}

/// Partial derivatives of a Hamiltonian. `dp` is the plain entrywise gradient `∂h/∂p_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct So3Partials {
    pub dmu1: Vec3,
    pub dmu2: Vec3,
    pub dp: Mat3,
}

pub trait So3Hamiltonian {
    fn energy(&self, s: &So3State) -> Result<f64>;

    /// Central differences unless overridden.
    fn partials(&self, s: &So3State) -> Result<So3Partials> {
        let x = s.to_flat();
        let g = super::fd_gradient(&x, |y| self.energy(&So3State::read_flat(y)?))?;
        Ok(So3Partials {
            dmu1: Vec3::from_column_slice(&g[0..3]),
            dmu2: Vec3::from_column_slice(&g[3..6]),
            dp: Mat3::from_row_slice(&g[6..15]),
        })
    }
}

/// Coupled equations for an arbitrary Hamiltonian given its partials.
pub fn so3_field_from_partials(s: &So3State, d: &So3Partials) -> So3State {
    let w1 = d.dmu1;
    let w2 = d.dmu2;
    // The matrix pairing is ½Tr(AᵀB), so the force term carries 2·∂h/∂p.
    let g = d.dp * 2.0;
    So3State {
        mu1: -w1.cross(&s.mu1) + vee(&(g * s.p.transpose())),
        mu2: -w2.cross(&s.mu2) - vee(&(s.p.transpose() * g)),
        p: -hat(&w1) * s.p + s.p * hat(&w2),
    }
}

pub fn so3_vector_field<H: So3Hamiltonian + ?Sized>(h: &H, s: &So3State) -> Result<So3State> {
    Ok(so3_field_from_partials(s, &h.partials(s)?))
}

/// `|μ1 + p μ2|²`.
pub fn so3_casimir(s: &So3State) -> f64 {
    (s.mu1 + s.p * s.mu2).norm_squared()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Charge {
    pub q: f64,
    pub xi: [f64; 3],
}

impl Charge {
    pub fn new(q: f64, xi: Vec3) -> Self {
        Charge { q, xi: xi.into() }
    }

    pub fn position(&self) -> Vec3 {
        Vec3::from(self.xi)
    }
}

/// Inertia and charge layout of the two bodies.
#[derive(Debug, Clone, PartialEq)]
pub struct So3System {
    pub inertia1: Vec3,
    pub inertia2: Vec3,
    pub charges1: Vec<Charge>,
    pub charges2: Vec<Charge>,
}

impl Default for So3System {
    fn default() -> Self {
        let dipole = |s: f64| {
            vec![
                Charge::new(-0.25, Vec3::new(s, 0.0, 0.0)),
                Charge::new(0.25, Vec3::new(-s, 0.0, 0.0)),
            ]
        };
        So3System {
            inertia1: Vec3::new(1.0, 2.0, 3.0),
            inertia2: Vec3::new(2.0, 3.0, 4.0),
            charges1: dipole(1.0),
            charges2: dipole(3.0),
        }
    }
}

impl So3System {
    pub fn new(inertia1: Vec3, inertia2: Vec3, charges1: Vec<Charge>, charges2: Vec<Charge>) -> Result<Self> {
        if inertia1.iter().chain(inertia2.iter()).any(|&i| !(i > 0.0) || !i.is_finite()) {
            return Err(Error::InvalidParameter("inertia entries must be positive".into()));
        }
        if charges1.is_empty() || charges2.is_empty() {
            return Err(Error::InvalidParameter("each body needs at least one charge".into()));
        }
        Ok(So3System { inertia1, inertia2, charges1, charges2 })
    }

    pub fn kinetic(&self, s: &So3State) -> f64 {
        0.5 * (s.mu1.component_div(&self.inertia1).dot(&s.mu1)
            + s.mu2.component_div(&self.inertia2).dot(&s.mu2))
    }

    /// Coulomb sum over all body-1/body-2 charge pairs.
    pub fn potential(&self, p: &Mat3) -> Result<f64> {
        let mut u = 0.0;
        for (i, c1) in self.charges1.iter().enumerate() {
            for (j, c2) in self.charges2.iter().enumerate() {
                let d = (c1.position() - p * c2.position()).norm();
                if d < 1e-12 {
                    return Err(Error::SingularConfiguration { body1: i, body2: j });
                }
                u += c1.q * c2.q / d;
            }
        }
        Ok(u)
    }

    /// `∂U/∂p = Σ q1 q2 (ξ1 − pξ2) ξ2ᵀ / d³`.
    pub fn potential_gradient(&self, p: &Mat3) -> Result<Mat3> {
        let mut g = Mat3::zeros();
        for (i, c1) in self.charges1.iter().enumerate() {
            for (j, c2) in self.charges2.iter().enumerate() {
                let xi2 = c2.position();
                let r = c1.position() - p * xi2;
                let d = r.norm();
                if d < 1e-12 {
                    return Err(Error::SingularConfiguration { body1: i, body2: j });
                }
                g += r * xi2.transpose() * (c1.q * c2.q / (d * d * d));
            }
        }
        Ok(g)
    }

    /// Force acting on body 1, expressed in its frame. Body 2 feels `−pᵀ` of it.
    pub fn force_on_body1(&self, p: &Mat3) -> Result<Vec3> {
        let g = self.potential_gradient(p)? * 2.0;
        Ok(vee(&(g * p.transpose())))
    }
}

impl So3Hamiltonian for So3System {
    fn energy(&self, s: &So3State) -> Result<f64> {
        Ok(self.kinetic(s) + self.potential(&s.p)?)
    }

    fn partials(&self, s: &So3State) -> Result<So3Partials> {
        Ok(So3Partials {
            dmu1: s.mu1.component_div(&self.inertia1),
            dmu2: s.mu2.component_div(&self.inertia2),
            dp: self.potential_gradient(&s.p)?,
        })
    }
}

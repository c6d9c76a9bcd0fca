//! Reference systems: Hamiltonians, vector fields and Casimirs.

pub mod se3;
pub mod so2;
pub mod so3;

pub use se3::{se3_casimirs, se3_field_from_partials, se3_vector_field, Se3Hamiltonian, Se3Partials, Se3State, Se3System};
pub use so2::{so2_casimir, so2_field_from_partials, so2_vector_field, So2Hamiltonian, So2Partials, So2State, So2System};
pub use so3::{so3_casimir, so3_field_from_partials, so3_vector_field, Charge, So3Hamiltonian, So3Partials, So3State, So3System};

use crate::error::{Error, Result};
use crate::lie::{coad_se3_group, Rotation, SE3Element, Vec3};
use crate::Case;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// A point of phase space with a fixed flattening order.
pub trait PhaseState: Sized {
    const DIM: usize;

    fn write_flat(&self, out: &mut [f64]);

    fn read_flat(x: &[f64]) -> Result<Self>;

    fn to_flat(&self) -> Vec<f64> {
        let mut out = vec![0.0; Self::DIM];
        self.write_flat(&mut out);
        out
    }
}

pub(crate) fn check_len(x: &[f64], expected: usize) -> Result<()> {
    if x.len() == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got: x.len() })
    }
}

/// Central-difference step for an entry of size `x`.
pub fn fd_step(x: f64) -> f64 {
    1e-6 * (1.0 + x.abs())
}

pub(crate) fn fd_gradient(x: &[f64], mut f: impl FnMut(&[f64]) -> Result<f64>) -> Result<Vec<f64>> {
    let mut y = x.to_vec();
    let mut g = vec![0.0; x.len()];
    for k in 0..x.len() {
        let h = fd_step(x[k]);
        y[k] = x[k] + h;
        let fp = f(&y)?;
        y[k] = x[k] - h;
        let fm = f(&y)?;
        y[k] = x[k];
        g[k] = (fp - fm) / (2.0 * h);
    }
    Ok(g)
}

/// Any of the three state types.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum State {
    So2(So2State),
    So3(So3State),
    Se3(Se3State),
}

impl State {
    pub fn case(&self) -> Case {
        match self {
            State::So2(_) => Case::So2,
            State::So3(_) => Case::So3,
            State::Se3(_) => Case::Se3,
        }
    }

    pub fn zeros(case: Case) -> State {
        match case {
            Case::So2 => State::So2(So2State::zeros()),
            Case::So3 => State::So3(So3State::zeros()),
            Case::Se3 => State::Se3(Se3State::zeros()),
        }
    }

    pub fn from_flat(case: Case, x: &[f64]) -> Result<State> {
        Ok(match case {
            Case::So2 => State::So2(So2State::read_flat(x)?),
            Case::So3 => State::So3(So3State::read_flat(x)?),
            Case::Se3 => State::Se3(Se3State::read_flat(x)?),
        })
    }

    pub fn write_flat(&self, out: &mut [f64]) {
        match self {
            State::So2(s) => s.write_flat(out),
            State::So3(s) => s.write_flat(out),
            State::Se3(s) => s.write_flat(out),
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.case().dim()];
        self.write_flat(&mut out);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.to_flat().iter().all(|x| x.is_finite())
    }

    /// Casimir values of the state's case.
    pub fn casimirs(&self) -> Vec<f64> {
        match self {
            State::So2(s) => vec![so2_casimir(s)],
            State::So3(s) => vec![so3_casimir(s)],
            State::Se3(s) => {
                let (c1, c2) = se3_casimirs(s);
                vec![c1, c2]
            }
        }
    }

    /// The group element, for cases that carry one.
    pub fn orientation(&self) -> Option<&crate::Mat3> {
        match self {
            State::So2(_) => None,
            State::So3(s) => Some(&s.p),
            State::Se3(s) => Some(&s.q),
        }
    }
}

/// Evaluates `C(μ1 + Ad*_(p⁻¹) μ2)` for a Casimir `C` of the single-group bracket.
///
/// `base` receives the combined momentum: one entry for SO(2), three for
/// SO(3) and six (angular then linear) for SE(3).
pub fn casimir_from_algebra(base: impl Fn(&[f64]) -> f64, state: &State) -> f64 {
    match state {
        State::So2(s) => base(&[s.mu1 + s.mu2]),
        State::So3(s) => {
            let u = s.mu1 + s.p * s.mu2;
            base(u.as_slice())
        }
        State::Se3(s) => {
            let g = SE3Element::new(Rotation::from_matrix_unchecked(s.q), s.v);
            let (a, b) = coad_se3_group(&g, &s.alpha2, &s.beta2);
            let a = s.alpha1 + a;
            let b = s.beta1 + b;
            base(&[a.x, a.y, a.z, b.x, b.y, b.z])
        }
    }
}

/// `1 − tanh²(ζh)`, the factor relating the altered field to the base field.
pub fn altered_scale(zeta: f64, h: f64) -> f64 {
    let t = (zeta * h).tanh();
    1.0 - t * t
}

/// `tanh(ζh)/ζ`.
pub fn altered_energy(zeta: f64, h: f64) -> f64 {
    (zeta * h).tanh() / zeta
}

/// Field of `tanh(ζh)/ζ` built from the base field and energy.
pub fn altered_field<S, F, H>(zeta: f64, base_field: F, base_hamiltonian: H) -> impl Fn(&S) -> Result<S>
where
    S: Copy,
    F: Fn(&S) -> Result<S>,
    H: Fn(&S) -> Result<f64>,
    S: Scale,
{
    move |s| {
        let k = altered_scale(zeta, base_hamiltonian(s)?);
        Ok(base_field(s)?.scale(k))
    }
}

pub trait Scale {
    fn scale(self, k: f64) -> Self;
}

impl Scale for So2State {
    fn scale(mut self, k: f64) -> Self {
        let o = self;
        self.scaled_add(k - 1.0, &o);
        self
    }
}

impl Scale for So3State {
    fn scale(self, k: f64) -> Self {
        So3State::new(self.mu1 * k, self.mu2 * k, self.p * k)
    }
}

impl Scale for Se3State {
    fn scale(self, k: f64) -> Self {
        let mut out = Se3State::zeros();
        out.scaled_add(k, &self);
        out
    }
}

/// Wraps a Hamiltonian `h` as `tanh(ζh)/ζ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Altered<H> {
    pub base: H,
    pub zeta: f64,
}

impl<H> Altered<H> {
    pub fn new(base: H, zeta: f64) -> Result<Self> {
        if !(zeta > 0.0) || !zeta.is_finite() {
            return Err(Error::InvalidParameter(format!("zeta must be positive, got {zeta}")));
        }
        Ok(Altered { base, zeta })
    }
}

impl<H: So2Hamiltonian> So2Hamiltonian for Altered<H> {
    fn energy(&self, s: &So2State) -> Result<f64> {
        Ok(altered_energy(self.zeta, self.base.energy(s)?))
    }

    fn partials(&self, s: &So2State) -> Result<So2Partials> {
        let k = altered_scale(self.zeta, self.base.energy(s)?);
        let d = self.base.partials(s)?;
        Ok(So2Partials { dmu1: k * d.dmu1, dmu2: k * d.dmu2, dphi: k * d.dphi })
    }
}

impl<H: So3Hamiltonian> So3Hamiltonian for Altered<H> {
    fn energy(&self, s: &So3State) -> Result<f64> {
        Ok(altered_energy(self.zeta, self.base.energy(s)?))
    }

    fn partials(&self, s: &So3State) -> Result<So3Partials> {
        let k = altered_scale(self.zeta, self.base.energy(s)?);
        let d = self.base.partials(s)?;
        Ok(So3Partials { dmu1: d.dmu1 * k, dmu2: d.dmu2 * k, dp: d.dp * k })
    }
}

impl<H: Se3Hamiltonian> Se3Hamiltonian for Altered<H> {
    fn energy(&self, s: &Se3State) -> Result<f64> {
        Ok(altered_energy(self.zeta, self.base.energy(s)?))
    }

    fn partials(&self, s: &Se3State) -> Result<Se3Partials> {
        let k = altered_scale(self.zeta, self.base.energy(s)?);
        let d = self.base.partials(s)?;
        Ok(Se3Partials {
            a1: d.a1 * k,
            b1: d.b1 * k,
            a2: d.a2 * k,
            b2: d.b2 * k,
            dq: d.dq * k,
            dv: d.dv * k,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SystemKind {
    So2(So2System),
    So3(So3System),
    Se3(Se3System),
}

/// One of the reference systems, optionally with the altered Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct System {
    pub kind: SystemKind,
    pub zeta: Option<f64>,
}

impl System {
    pub fn default_for(case: Case) -> System {
        let kind = match case {
            Case::So2 => SystemKind::So2(So2System::default()),
            Case::So3 => SystemKind::So3(So3System::default()),
            Case::Se3 => SystemKind::Se3(Se3System::default()),
        };
        System { kind, zeta: None }
    }

    pub fn with_zeta(mut self, zeta: Option<f64>) -> Result<System> {
        if let Some(z) = zeta {
            if !(z > 0.0) || !z.is_finite() {
                return Err(Error::InvalidParameter(format!("zeta must be positive, got {z}")));
            }
        }
        self.zeta = zeta;
        Ok(self)
    }

    pub fn case(&self) -> Case {
        match self.kind {
            SystemKind::So2(_) => Case::So2,
            SystemKind::So3(_) => Case::So3,
            SystemKind::Se3(_) => Case::Se3,
        }
    }

    pub fn dim(&self) -> usize {
        self.case().dim()
    }

    fn base_energy(&self, state: &State) -> Result<f64> {
        match (&self.kind, state) {
            (SystemKind::So2(h), State::So2(s)) => h.energy(s),
            (SystemKind::So3(h), State::So3(s)) => h.energy(s),
            (SystemKind::Se3(h), State::Se3(s)) => h.energy(s),
            _ => Err(self.mismatch(state)),
        }
    }

    fn mismatch(&self, state: &State) -> Error {
        Error::CaseMismatch { expected: self.case().name().into(), found: state.case().name().into() }
    }

    /// Hamiltonian at a structured state (altered when `zeta` is set).
    pub fn energy_of(&self, state: &State) -> Result<f64> {
        let h = self.base_energy(state)?;
        Ok(match self.zeta {
            Some(z) => altered_energy(z, h),
            None => h,
        })
    }

    pub fn energy(&self, x: &[f64]) -> Result<f64> {
        self.energy_of(&State::from_flat(self.case(), x)?)
    }

    /// Time derivative at a structured state.
    pub fn field_of(&self, state: &State) -> Result<State> {
        let k = match self.zeta {
            Some(z) => altered_scale(z, self.base_energy(state)?),
            None => 1.0,
        };
        Ok(match (&self.kind, state) {
            (SystemKind::So2(h), State::So2(s)) => State::So2(so2_vector_field(h, s)?.scale(k)),
            (SystemKind::So3(h), State::So3(s)) => State::So3(so3_vector_field(h, s)?.scale(k)),
            (SystemKind::Se3(h), State::Se3(s)) => State::Se3(se3_vector_field(h, s)?.scale(k)),
            _ => return Err(self.mismatch(state)),
        })
    }

    /// Flat-vector form of [`System::field_of`], as used by the integrator.
    pub fn field(&self, x: &[f64], dx: &mut [f64]) -> Result<()> {
        check_len(dx, self.dim())?;
        self.field_of(&State::from_flat(self.case(), x)?)?.write_flat(dx);
        Ok(())
    }

    pub fn casimirs(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(State::from_flat(self.case(), x)?.casimirs())
    }

    pub fn to_config(&self) -> SystemConfig {
        let mut c = SystemConfig { case: self.case(), zeta: self.zeta, ..SystemConfig::default() };
        let so3 = |c: &mut SystemConfig, s: &So3System| {
            c.inertia1 = Some(s.inertia1.into());
            c.inertia2 = Some(s.inertia2.into());
            c.charges = Some(ChargeSets { body1: s.charges1.clone(), body2: s.charges2.clone() });
        };
        match &self.kind {
            SystemKind::So2(s) => so3(&mut c, &s.base),
            SystemKind::So3(s) => so3(&mut c, s),
            SystemKind::Se3(s) => {
                c.inertia1 = Some(s.inertia1.into());
                c.inertia2 = Some(s.inertia2.into());
                c.masses = Some([s.m1, s.m2]);
                c.p_diag = Some(s.p_diag.into());
                c.l_diag = Some(s.l_diag.into());
            }
        }
        c
    }

    pub fn from_config(c: &SystemConfig) -> Result<System> {
        let def = System::default_for(c.case);
        let v = |x: Option<[f64; 3]>, d: Vec3| x.map(Vec3::from).unwrap_or(d);
        let kind = match def.kind {
            SystemKind::So2(So2System { base }) | SystemKind::So3(base) => {
                let (c1, c2) = match &c.charges {
                    Some(cs) => (cs.body1.clone(), cs.body2.clone()),
                    None => (base.charges1.clone(), base.charges2.clone()),
                };
                let s = So3System::new(v(c.inertia1, base.inertia1), v(c.inertia2, base.inertia2), c1, c2)?;
                if c.case == Case::So2 {
                    SystemKind::So2(So2System::new(s))
                } else {
                    SystemKind::So3(s)
                }
            }
            SystemKind::Se3(base) => {
                let [m1, m2] = c.masses.unwrap_or([base.m1, base.m2]);
                SystemKind::Se3(Se3System::new(
                    v(c.inertia1, base.inertia1),
                    v(c.inertia2, base.inertia2),
                    m1,
                    m2,
                    v(c.p_diag, base.p_diag),
                    v(c.l_diag, base.l_diag),
                )?)
            }
        };
        System { kind, zeta: None }.with_zeta(c.zeta)
    }

    pub fn load(path: &Path) -> Result<System> {
        let c: SystemConfig = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        System::from_config(&c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeSets {
    pub body1: Vec<Charge>,
    pub body2: Vec<Charge>,
}

/// JSON form of system parameters. Missing entries take the defaults of `case`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub case: Case,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inertia1: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inertia2: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charges: Option<ChargeSets>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masses: Option<[f64; 2]>,
    #[serde(rename = "P_diag", default, skip_serializing_if = "Option::is_none")]
    pub p_diag: Option<[f64; 3]>,
    #[serde(rename = "L_diag", default, skip_serializing_if = "Option::is_none")]
    pub l_diag: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            case: Case::So3,
            inertia1: None,
            inertia2: None,
            charges: None,
            masses: None,
            p_diag: None,
            l_diag: None,
            zeta: None,
        }
    }
}

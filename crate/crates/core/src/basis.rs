//! Modal basis families per coupling kind and boundary case.
//!
//! Each of the three state blocks (displacement, velocity, temperature) is
//! spanned by a family of scaled sine or cosine modes on (0, pi). All inner
//! products among such modes and their derivatives have closed-form values,
//! so Gram matrices downstream are exact.

use crate::model::{BoundaryCase, CouplingKind, CouplingModel, ModelError};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrigKind {
    Sin,
    Cos,
}

/// One basis function `amplitude * trig(freq * x)` on [0, pi].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeShape {
    pub kind: TrigKind,
    pub amplitude: f64,
    pub freq: u32,
}

impl ModeShape {
    pub fn eval(&self, x: f64) -> f64 {
        let arg = self.freq as f64 * x;
        self.amplitude
            * match self.kind {
                TrigKind::Sin => arg.sin(),
                TrigKind::Cos => arg.cos(),
            }
    }

    /// First derivative, again a `ModeShape`.
    pub fn derivative(&self) -> ModeShape {
        let f = self.freq as f64;
        match self.kind {
            TrigKind::Sin => ModeShape {
                kind: TrigKind::Cos,
                amplitude: self.amplitude * f,
                freq: self.freq,
            },
            TrigKind::Cos => ModeShape {
                kind: TrigKind::Sin,
                amplitude: -self.amplitude * f,
                freq: self.freq,
            },
        }
    }

    pub fn eval_derivative(&self, x: f64) -> f64 {
        self.derivative().eval(x)
    }
}

/// Exact L2(0, pi) inner product of two mode shapes.
///
/// Uses orthogonality of equal-kind families and the odd/even parity rule for
/// the mixed sine-cosine product.
pub fn l2_inner(a: &ModeShape, b: &ModeShape) -> f64 {
    let c = a.amplitude * b.amplitude;
    let (i, j) = (a.freq as i64, b.freq as i64);
    match (a.kind, b.kind) {
        (TrigKind::Sin, TrigKind::Sin) => {
            if i == j {
                if i == 0 {
                    0.0
                } else {
                    c * PI / 2.0
                }
            } else {
                0.0
            }
        }
        (TrigKind::Cos, TrigKind::Cos) => {
            if i == j {
                if i == 0 {
                    c * PI
                } else {
                    c * PI / 2.0
                }
            } else {
                0.0
            }
        }
        (TrigKind::Sin, TrigKind::Cos) => c * mixed_integral(i, j),
        (TrigKind::Cos, TrigKind::Sin) => c * mixed_integral(j, i),
    }
}

/// int_0^pi sin(i x) cos(j x) dx = i (1 - (-1)^{i+j}) / (i^2 - j^2) for i != j,
/// zero for i = j.
fn mixed_integral(i: i64, j: i64) -> f64 {
    if i == j {
        return 0.0;
    }
    if i == 0 {
        return 0.0;
    }
    if (i + j) % 2 == 0 {
        0.0
    } else {
        2.0 * i as f64 / ((i * i - j * j) as f64)
    }
}

/// The three mode families for one (coupling kind, boundary case) pair.
#[derive(Debug, Clone)]
pub struct ModalBasis {
    pub n: usize,
    pub phi: Vec<ModeShape>,
    pub psi: Vec<ModeShape>,
    pub xi: Vec<ModeShape>,
}

/// Eigenfunction families of the uncoupled (gamma = 0) system.
///
/// The velocity family is sin in every case; the displacement family follows
/// the displacement end condition (sin for clamped, cos for stress-free), and
/// the temperature family follows the temperature condition. The displacement
/// amplitude carries the 1/j scaling that normalizes its gradient, except for
/// the weak DD family where the modes enter unscaled.
pub fn build_basis(
    model: &CouplingModel,
    bc: BoundaryCase,
    n: usize,
) -> Result<ModalBasis, ModelError> {
    if n < 1 {
        return Err(ModelError::InvalidModeCount(n));
    }
    let amp = (2.0 / PI).sqrt();
    let phi_kind = if bc.displacement_dirichlet() {
        TrigKind::Sin
    } else {
        TrigKind::Cos
    };
    let xi_kind = if bc.temperature_dirichlet() {
        TrigKind::Sin
    } else {
        TrigKind::Cos
    };
    let phi_inv_j = !(model.kind == CouplingKind::Weak && bc == BoundaryCase::DD);

    let phi = (1..=n as u32)
        .map(|j| ModeShape {
            kind: phi_kind,
            amplitude: if phi_inv_j { amp / j as f64 } else { amp },
            freq: j,
        })
        .collect();
    let psi = (1..=n as u32)
        .map(|j| ModeShape {
            kind: TrigKind::Sin,
            amplitude: amp,
            freq: j,
        })
        .collect();
    let xi = (1..=n as u32)
        .map(|j| ModeShape {
            kind: xi_kind,
            amplitude: amp,
            freq: j,
        })
        .collect();
    Ok(ModalBasis { n, phi, psi, xi })
}

//! Time-domain experiments: projection of initial data, contractive time
//! stepping, grid-field reconstruction, energies, and decay-rate fits.

use crate::basis::{l2_inner, ModalBasis, ModeShape, TrigKind};
use crate::fitting::linear_fit;
use crate::generator::{build_generator_assembled, inv_lower, GeneratorMatrix};
use crate::gram::assemble_gram;
use crate::model::{BoundaryCase, CouplingModel, ModelError};
use ndarray::{s, Array1, Array2};
use ndarray_linalg::{c64, Eig, Factorize, Solve, SVD};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One scalar field on (0, pi).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FieldSpec {
    Zero,
    SineMode { j: u32 },
    CosineMode { j: u32 },
    /// values[k] on (breaks[k-1], breaks[k]) with implicit endpoints 0, pi.
    PiecewiseConstant { breaks: Vec<f64>, values: Vec<f64> },
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec::Zero
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    #[serde(default)]
    pub u0: FieldSpec,
    #[serde(default)]
    pub v0: FieldSpec,
    #[serde(default)]
    pub theta0: FieldSpec,
}

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("initial data incompatible with the boundary case: {0}")]
    IncompatibleData(String),
    #[error("energy must be strictly positive on the fit window")]
    NonPositiveEnergy,
    #[error("linear solve failed during time stepping: {0}")]
    SolveFailure(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl FieldSpec {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if let FieldSpec::PiecewiseConstant { breaks, values } = self {
            if values.len() != breaks.len() + 1 {
                return Err(DynamicsError::IncompatibleData(
                    "piecewise data needs one more value than breakpoints".into(),
                ));
            }
            let mut prev = 0.0;
            for &b in breaks {
                if b <= prev || b >= std::f64::consts::PI {
                    return Err(DynamicsError::IncompatibleData(
                        "breakpoints must be strictly increasing within (0, pi)".into(),
                    ));
                }
                prev = b;
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            FieldSpec::Zero => 0.0,
            FieldSpec::SineMode { j } => (*j as f64 * x).sin(),
            FieldSpec::CosineMode { j } => (*j as f64 * x).cos(),
            FieldSpec::PiecewiseConstant { breaks, values } => {
                let k = breaks.iter().take_while(|&&b| x >= b).count();
                values[k]
            }
        }
    }

    /// Exact L2(0, pi) inner product with a sin/cos mode shape.
    fn inner_with_mode(&self, mode: &ModeShape) -> f64 {
        match self {
            FieldSpec::Zero => 0.0,
            FieldSpec::SineMode { j } => l2_inner(
                &ModeShape { kind: TrigKind::Sin, amplitude: 1.0, freq: *j },
                mode,
            ),
            FieldSpec::CosineMode { j } => l2_inner(
                &ModeShape { kind: TrigKind::Cos, amplitude: 1.0, freq: *j },
                mode,
            ),
            FieldSpec::PiecewiseConstant { breaks, values } => {
                // Antiderivative of amp*trig(f x) evaluated on each segment.
                let f = mode.freq as f64;
                let anti = |x: f64| match mode.kind {
                    TrigKind::Sin => -mode.amplitude * (f * x).cos() / f,
                    TrigKind::Cos => mode.amplitude * (f * x).sin() / f,
                };
                let mut total = 0.0;
                let mut left = 0.0;
                for (k, &v) in values.iter().enumerate() {
                    let right = breaks.get(k).copied().unwrap_or(std::f64::consts::PI);
                    total += v * (anti(right) - anti(left));
                    left = right;
                }
                total
            }
        }
    }
}

/// Project the three fields onto the orthonormalized modal frame. The block
/// coordinate is y = (L^t)^{-1} c where c holds the load inner products: the
/// gradient pairing for the displacement block, the plain L2 pairing for
/// velocity and temperature. Dirichlet fields with nonzero boundary trace are
/// rejected.
pub fn project_initial(
    data: &InitialData,
    basis: &ModalBasis,
    model: &CouplingModel,
    bc: BoundaryCase,
) -> Result<Array1<f64>, DynamicsError> {
    for f in [&data.u0, &data.v0, &data.theta0] {
        f.validate()?;
    }
    if bc.displacement_dirichlet() {
        for (name, f) in [("u0", &data.u0), ("v0", &data.v0)] {
            if matches!(f, FieldSpec::CosineMode { .. }) {
                return Err(DynamicsError::IncompatibleData(format!(
                    "{name} has nonzero boundary trace under a clamped end"
                )));
            }
        }
    }
    if bc.temperature_dirichlet() {
        if matches!(data.theta0, FieldSpec::CosineMode { .. }) {
            return Err(DynamicsError::IncompatibleData(
                "theta0 has nonzero boundary trace under a held-temperature end".into(),
            ));
        }
    }
    if matches!(data.u0, FieldSpec::PiecewiseConstant { .. }) {
        return Err(DynamicsError::IncompatibleData(
            "piecewise-constant displacement has no square-integrable gradient".into(),
        ));
    }

    let n = basis.n;
    let gram = assemble_gram(basis, model, bc)?;
    let mut y = Array1::zeros(3 * n);

    // Displacement block: gradient pairing (d_x u0, d_x phi_i).
    let du0 = match &data.u0 {
        FieldSpec::Zero => None,
        FieldSpec::SineMode { j } => Some(ModeShape {
            kind: TrigKind::Cos,
            amplitude: *j as f64,
            freq: *j,
        }),
        FieldSpec::CosineMode { j } => Some(ModeShape {
            kind: TrigKind::Sin,
            amplitude: -(*j as f64),
            freq: *j,
        }),
        FieldSpec::PiecewiseConstant { .. } => unreachable!("rejected above"),
    };
    if let Some(du0) = du0 {
        let c = Array1::from_iter(basis.phi.iter().map(|p| l2_inner(&du0, &p.derivative())));
        y.slice_mut(s![0..n]).assign(&inv_lower(gram.l1.view()).t().dot(&c));
    }
    let cv = Array1::from_iter(basis.psi.iter().map(|p| data.v0.inner_with_mode(p)));
    y.slice_mut(s![n..2 * n])
        .assign(&inv_lower(gram.l2.view()).t().dot(&cv));
    let ct = Array1::from_iter(basis.xi.iter().map(|p| data.theta0.inner_with_mode(p)));
    y.slice_mut(s![2 * n..3 * n])
        .assign(&inv_lower(gram.l3.view()).t().dot(&ct));
    Ok(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Cayley step (I - dt/2 A)^{-1} (I + dt/2 A): contractive for
    /// dissipative A.
    TrapezoidalImplicit,
    /// Reference path from the dense eigendecomposition.
    EigenExpansion,
}

/// Eigenbasis condition number above which the expansion path falls back to
/// the trapezoidal scheme.
pub const EIGENBASIS_COND_LIMIT: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Array1<f64>>,
    pub energy_modal: Vec<f64>,
    pub model: CouplingModel,
    pub bc: BoundaryCase,
    pub n: usize,
    pub dt: f64,
    pub scheme_requested: Scheme,
    pub scheme_used: Scheme,
    /// Set when the eigen-expansion path was refused for conditioning.
    pub fallback: bool,
}

/// (1/2) ||y||^2 in the orthonormalized frame.
pub fn modal_energy(y: &Array1<f64>) -> f64 {
    0.5 * y.dot(y)
}

/// Integrate dy/dt = A y from y0 over [0, T] with uniform steps.
pub fn integrate(
    a: &GeneratorMatrix,
    y0: &Array1<f64>,
    t_final: f64,
    dt: f64,
    scheme: Scheme,
) -> Result<Trajectory, DynamicsError> {
    assert!(t_final > 0.0 && dt > 0.0 && dt <= t_final);
    let steps = (t_final / dt).round() as usize;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();

    let (states, used, fallback) = match scheme {
        Scheme::EigenExpansion => match eigen_states(a, y0, &times) {
            Some(states) => (states, Scheme::EigenExpansion, false),
            None => (
                trapezoidal_states(a, y0, dt, steps)?,
                Scheme::TrapezoidalImplicit,
                true,
            ),
        },
        Scheme::TrapezoidalImplicit => (
            trapezoidal_states(a, y0, dt, steps)?,
            Scheme::TrapezoidalImplicit,
            false,
        ),
    };
    let energy_modal = states.iter().map(modal_energy).collect();
    Ok(Trajectory {
        times,
        states,
        energy_modal,
        model: a.model,
        bc: a.bc,
        n: a.n,
        dt,
        scheme_requested: scheme,
        scheme_used: used,
        fallback,
    })
}

fn trapezoidal_states(
    a: &GeneratorMatrix,
    y0: &Array1<f64>,
    dt: f64,
    steps: usize,
) -> Result<Vec<Array1<f64>>, DynamicsError> {
    let dim = a.entries.nrows();
    let eye = Array2::<f64>::eye(dim);
    let minus = &eye - &(0.5 * dt * &a.entries);
    let plus = &eye + &(0.5 * dt * &a.entries);
    let lu = minus
        .factorize()
        .map_err(|e| DynamicsError::SolveFailure(e.to_string()))?;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(y0.clone());
    let mut y = y0.clone();
    for _ in 0..steps {
        let rhs = plus.dot(&y);
        y = lu
            .solve(&rhs)
            .map_err(|e| DynamicsError::SolveFailure(e.to_string()))?;
        states.push(y.clone());
    }
    Ok(states)
}

/// Dense-eigendecomposition states, or `None` when cond(V) exceeds the limit.
fn eigen_states(a: &GeneratorMatrix, y0: &Array1<f64>, times: &[f64]) -> Option<Vec<Array1<f64>>> {
    let (vals, vecs) = a.entries.eig().ok()?;
    let (_, sv, _) = vecs.svd(false, false).ok()?;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if smax / smin > EIGENBASIS_COND_LIMIT {
        return None;
    }
    let y0c = y0.mapv(|x| c64::new(x, 0.0));
    let coef = vecs.solve(&y0c).ok()?;
    Some(
        times
            .iter()
            .map(|&t| {
                let amp =
                    Array1::from_iter(vals.iter().zip(coef.iter()).map(|(l, c)| (l * t).exp() * c));
                vecs.dot(&amp).mapv(|z| z.re)
            })
            .collect(),
    )
}

/// Reconstructed grid fields at x_j = j h, h = pi/n_grid, j = 0..n_grid.
pub struct GridFields {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub theta: Vec<f64>,
}

/// Undo the triangular frame (z = L^{-1} y per block) and sum the basis
/// functions; boundary values come straight from the basis, which already
/// satisfies the case.
pub fn reconstruct_fields(
    y: &Array1<f64>,
    basis: &ModalBasis,
    model: &CouplingModel,
    bc: BoundaryCase,
    n_grid: usize,
) -> Result<GridFields, ModelError> {
    assert!(n_grid >= 2);
    let n = basis.n;
    let gram = assemble_gram(basis, model, bc)?;
    let z1 = inv_lower(gram.l1.view()).dot(&y.slice(s![0..n]));
    let z2 = inv_lower(gram.l2.view()).dot(&y.slice(s![n..2 * n]));
    let z3 = inv_lower(gram.l3.view()).dot(&y.slice(s![2 * n..3 * n]));
    let h = std::f64::consts::PI / n_grid as f64;
    let eval = |shapes: &[ModeShape], z: &Array1<f64>, x: f64| {
        shapes
            .iter()
            .zip(z.iter())
            .map(|(s, &c)| c * s.eval(x))
            .sum::<f64>()
    };
    let xs: Vec<f64> = (0..=n_grid).map(|j| j as f64 * h).collect();
    Ok(GridFields {
        u: xs.iter().map(|&x| eval(&basis.phi, &z1, x)).collect(),
        v: xs.iter().map(|&x| eval(&basis.psi, &z2, x)).collect(),
        theta: xs.iter().map(|&x| eval(&basis.xi, &z3, x)).collect(),
    })
}

/// Discrete energy (h/2) sum_j { |(u_{j+1}-u_j)/h|^2 + |v_j|^2 + |theta_j|^2 }
/// with x_j = j h, h = pi/n_grid, and the sum over j = 0..n_grid-1.
pub fn grid_energy_of_fields(f: &GridFields, n_grid: usize) -> f64 {
    let h = std::f64::consts::PI / n_grid as f64;
    let mut e = 0.0;
    for j in 0..n_grid {
        let du = (f.u[j + 1] - f.u[j]) / h;
        e += du * du + f.v[j] * f.v[j] + f.theta[j] * f.theta[j];
    }
    0.5 * h * e
}

/// Per-time grid energies of a trajectory.
pub fn grid_energy(
    traj: &Trajectory,
    basis: &ModalBasis,
    n_grid: usize,
) -> Result<Vec<f64>, ModelError> {
    traj.states
        .iter()
        .map(|y| {
            let f = reconstruct_fields(y, basis, &traj.model, traj.bc, n_grid)?;
            Ok(grid_energy_of_fields(&f, n_grid))
        })
        .collect()
}

fn window_points<'a>(
    times: &'a [f64],
    e: &'a [f64],
    window: (f64, f64),
) -> Vec<(f64, f64)> {
    times
        .iter()
        .zip(e.iter())
        .filter(|(&t, _)| t >= window.0 && t <= window.1)
        .map(|(&t, &v)| (t, v))
        .collect()
}

/// Least-squares rate of ln E(t) on the window; rate = -slope.
pub fn fit_exponential_rate(
    times: &[f64],
    e: &[f64],
    window: (f64, f64),
) -> Result<(f64, f64), DynamicsError> {
    let pts = window_points(times, e, window);
    if pts.len() < 2 || pts.iter().any(|&(_, v)| v <= 0.0) {
        return Err(DynamicsError::NonPositiveEnergy);
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let (slope, _, r2) = linear_fit(&xs, &ys);
    Ok((-slope, r2))
}

/// Least-squares slope of ln E against ln t on the window.
pub fn fit_polynomial_rate(
    times: &[f64],
    e: &[f64],
    window: (f64, f64),
) -> Result<(f64, f64), DynamicsError> {
    assert!(window.0 >= 1.0, "log-log fit needs window start >= 1");
    let pts = window_points(times, e, window);
    if pts.len() < 2 || pts.iter().any(|&(_, v)| v <= 0.0) {
        return Err(DynamicsError::NonPositiveEnergy);
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let (slope, _, r2) = linear_fit(&xs, &ys);
    Ok((slope, r2))
}

/// Per-step check of the discrete balance: under the Cayley step the exact
/// identity E_{k+1} - E_k = dt <A y_mid, y_mid> holds at the midpoint state
/// y_mid = (y_k + y_{k+1})/2, and -<A y, y> equals the reconstructed
/// temperature-gradient functional (G z3, z3) with z3 = L3^{-1} y3. Returns
/// the max relative mismatch between -dE/dt and that functional over steps
/// whose midpoint time lies in the window.
pub fn dissipation_identity_max_err(
    traj: &Trajectory,
    window: (f64, f64),
) -> Result<f64, DynamicsError> {
    let basis = crate::basis::build_basis(&traj.model, traj.bc, traj.n)?;
    let gram = assemble_gram(&basis, &traj.model, traj.bc)?;
    let l3_inv = inv_lower(gram.l3.view());
    let n = traj.n;
    let mut worst = 0.0_f64;
    for k in 0..traj.states.len() - 1 {
        let t_mid = 0.5 * (traj.times[k] + traj.times[k + 1]);
        if t_mid < window.0 || t_mid > window.1 {
            continue;
        }
        let mid = 0.5 * (&traj.states[k] + &traj.states[k + 1]);
        let z3 = l3_inv.dot(&mid.slice(s![2 * n..3 * n]));
        let functional = z3.dot(&gram.g.dot(&z3));
        let lhs = (traj.energy_modal[k] - traj.energy_modal[k + 1]) / traj.dt;
        let scale = functional.abs().max(lhs.abs()).max(1e-300);
        worst = worst.max((lhs - functional).abs() / scale);
    }
    Ok(worst)
}

/// One run of the smoothness experiment: v0 = sin(j x), u0 = theta0 = 0.
pub struct SweepRun {
    pub j: u32,
    pub traj: Trajectory,
    pub terminal_energy: f64,
}

pub fn smoothness_sweep(
    model: &CouplingModel,
    bc: BoundaryCase,
    n: usize,
    js: &[u32],
    t_final: f64,
    dt: f64,
) -> Result<Vec<SweepRun>, DynamicsError> {
    assert!(!js.is_empty());
    let basis = crate::basis::build_basis(model, bc, n)?;
    let a = build_generator_assembled(model, bc, n)?;
    js.iter()
        .map(|&j| {
            let data = InitialData {
                v0: FieldSpec::SineMode { j },
                ..Default::default()
            };
            let y0 = project_initial(&data, &basis, model, bc)?;
            let traj = integrate(&a, &y0, t_final, dt, Scheme::TrapezoidalImplicit)?;
            let terminal_energy = *traj.energy_modal.last().unwrap();
            Ok(SweepRun {
                j,
                traj,
                terminal_energy,
            })
        })
        .collect()
}

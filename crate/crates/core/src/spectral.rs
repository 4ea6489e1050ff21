//! Spectra, branch classification, resolvent norms and scans, and the
//! uniform stability diagnostics built on them.

use crate::fitting::linear_fit;
use crate::generator::GeneratorMatrix;
use crate::model::{BoundaryCase, CouplingKind, CouplingModel, ModelError};
use ndarray::{Array1, Array2};
use ndarray_linalg::{c64, Eig, Eigh, Factorize, Inverse, Solve, UPLO, SVD};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Branch thresholds (configuration constants, not claims about the model):
/// parabolic means |Im| <= 0.5 and Re <= -1.
pub const BRANCH_IM_THRESHOLD: f64 = 0.5;
pub const BRANCH_RE_THRESHOLD: f64 = -1.0;

/// Relative backward-error bound the eigensolver must meet.
pub const EIG_RESIDUAL_TOL: f64 = 1e-9;

/// Matrix dimension above which sigma_min switches from full SVD to inverse
/// iteration.
pub const SVD_DIM_LIMIT: usize = 192;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("eigensolver failed for {kind}/{bc} n={n}: {detail}")]
    NoConvergence {
        kind: CouplingKind,
        bc: BoundaryCase,
        n: usize,
        detail: String,
    },
    #[error("eigen residual {residual:.3e} exceeds {tol:.3e} for {kind}/{bc} n={n}")]
    ResidualTooLarge {
        kind: CouplingKind,
        bc: BoundaryCase,
        n: usize,
        residual: f64,
        tol: f64,
    },
    #[error("shift {lambda} is numerically in the spectrum (sigma_min = {sigma_min:.3e})")]
    SingularShift { lambda: c64, sigma_min: f64 },
    #[error("matrix is numerically singular")]
    SingularMatrix,
    #[error("only {found} hyperbolic eigenvalues with |Im| >= {im_min} (need {needed})")]
    InsufficientBranch {
        found: usize,
        needed: usize,
        im_min: f64,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// Wave-like, weakly damped (lambda ~ i k).
    Hyperbolic,
    /// Heat-like, strongly damped (lambda ~ -k^2).
    Parabolic,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Branch::Hyperbolic => write!(f, "hyperbolic"),
            Branch::Parabolic => write!(f, "parabolic"),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BranchLabel {
    pub branch: Branch,
    /// Set when the eigenvalue matches neither threshold rule.
    pub low_confidence: bool,
}

/// Eigenvalues with branch labels and axis-distance statistics.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub n: usize,
    pub eigenvalues: Vec<c64>,
    pub branches: Vec<BranchLabel>,
    /// max Re(lambda).
    pub abscissa: f64,
    /// min(-Re(lambda)).
    pub min_distance: f64,
}

fn frobenius(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn c64_norm(v: &Array1<c64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// All 3n eigenvalues, residual-checked against the computed eigenvectors
/// (||A v - lambda v|| <= tol * ||A||) and sorted by (Re, Im).
pub fn eigenvalues(a: &GeneratorMatrix) -> Result<Vec<c64>, SpectrumError> {
    let (vals, vecs) = a.entries.eig().map_err(|e| SpectrumError::NoConvergence {
        kind: a.model.kind,
        bc: a.bc,
        n: a.n,
        detail: e.to_string(),
    })?;
    let scale = frobenius(&a.entries).max(1e-300);
    let ac = a.entries.mapv(|x| c64::new(x, 0.0));
    let mut worst = 0.0_f64;
    for (k, &lam) in vals.iter().enumerate() {
        let v = vecs.column(k).to_owned();
        let vnorm = c64_norm(&v);
        if vnorm == 0.0 {
            continue;
        }
        let r = &ac.dot(&v) - &v.mapv(|z| z * lam);
        worst = worst.max(c64_norm(&r) / (vnorm * scale));
    }
    if worst > EIG_RESIDUAL_TOL {
        return Err(SpectrumError::ResidualTooLarge {
            kind: a.model.kind,
            bc: a.bc,
            n: a.n,
            residual: worst * scale,
            tol: EIG_RESIDUAL_TOL * scale,
        });
    }
    let mut out: Vec<c64> = vals.to_vec();
    out.sort_by(|x, y| {
        x.re.partial_cmp(&y.re)
            .unwrap()
            .then(x.im.partial_cmp(&y.im).unwrap())
    });
    Ok(out)
}

/// Threshold classification; `gamma` is echoed for context only.
pub fn classify_branches(eigs: &[c64], _gamma: f64) -> Vec<BranchLabel> {
    eigs.iter()
        .map(|lam| {
            if lam.im.abs() <= BRANCH_IM_THRESHOLD && lam.re <= BRANCH_RE_THRESHOLD {
                BranchLabel {
                    branch: Branch::Parabolic,
                    low_confidence: false,
                }
            } else if lam.im.abs() >= BRANCH_IM_THRESHOLD {
                BranchLabel {
                    branch: Branch::Hyperbolic,
                    low_confidence: false,
                }
            } else {
                BranchLabel {
                    branch: Branch::Hyperbolic,
                    low_confidence: true,
                }
            }
        })
        .collect()
}

pub fn spectrum_report(a: &GeneratorMatrix) -> Result<SpectrumReport, SpectrumError> {
    let eigs = eigenvalues(a)?;
    let branches = classify_branches(&eigs, a.model.gamma);
    let abscissa = eigs.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(SpectrumReport {
        n: a.n,
        min_distance: -abscissa,
        eigenvalues: eigs,
        branches,
        abscissa,
    })
}

/// Smallest singular value of a complex matrix: full SVD up to
/// `SVD_DIM_LIMIT`, inverse iteration on the normal equations above it.
pub fn sigma_min(m: &Array2<c64>) -> Result<f64, SpectrumError> {
    if m.nrows() <= SVD_DIM_LIMIT {
        let (_, s, _) = m.svd(false, false).map_err(|_| SpectrumError::SingularMatrix)?;
        Ok(s.iter().cloned().fold(f64::INFINITY, f64::min))
    } else {
        sigma_min_inverse_iteration(m)
    }
}

/// Block inverse iteration on M^H M via one LU factorization of M, with a
/// Rayleigh-Ritz extraction: robust when the smallest singular values
/// cluster (conjugate-symmetric spectra produce near-double sigma_min).
pub fn sigma_min_inverse_iteration(m: &Array2<c64>) -> Result<f64, SpectrumError> {
    const BLOCK: usize = 3;
    let f = m.factorize().map_err(|_| SpectrumError::SingularMatrix)?;
    let dim = m.nrows();
    // Deterministic, mutually independent start vectors.
    let mut block: Vec<Array1<c64>> = (0..BLOCK)
        .map(|b| {
            Array1::from_shape_fn(dim, |k| {
                c64::new(
                    1.0 + ((k * (b + 2)) % 7) as f64,
                    0.5 + ((k * (b + 3)) % 5) as f64,
                )
            })
        })
        .collect();
    let mut sigma_prev = f64::INFINITY;
    for iter in 0..2000 {
        // v <- M^{-1} M^{-H} v per column.
        for v in block.iter_mut() {
            *v = f
                .solve_h(v)
                .and_then(|w| f.solve(&w))
                .map_err(|_| SpectrumError::SingularMatrix)?;
        }
        // Modified Gram-Schmidt.
        for i in 0..BLOCK {
            for j in 0..i {
                let proj: c64 = block[j]
                    .iter()
                    .zip(block[i].iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let bj = block[j].clone();
                block[i].zip_mut_with(&bj, |x, y| *x -= proj * y);
            }
            let norm = c64_norm(&block[i]);
            block[i] /= c64::new(norm.max(1e-300), 0.0);
        }
        // Ritz values of M^H M on the block: T = (MV)^H (MV).
        let mv: Vec<Array1<c64>> = block.iter().map(|v| m.dot(v)).collect();
        let mut t = Array2::<c64>::zeros((BLOCK, BLOCK));
        for i in 0..BLOCK {
            for j in 0..BLOCK {
                t[(i, j)] = mv[i].iter().zip(mv[j].iter()).map(|(a, b)| a.conj() * b).sum();
            }
        }
        let (ritz, _) = t.eigh(UPLO::Upper).map_err(|_| SpectrumError::SingularMatrix)?;
        let sigma = ritz.iter().cloned().fold(f64::INFINITY, f64::min).max(0.0).sqrt();
        if iter > 3 && (sigma - sigma_prev).abs() <= 1e-12 * sigma {
            return Ok(sigma);
        }
        sigma_prev = sigma;
    }
    Ok(sigma_prev)
}

fn shifted(a: &GeneratorMatrix, lambda: c64) -> Array2<c64> {
    let dim = a.entries.nrows();
    let mut m = a.entries.mapv(|x| c64::new(-x, 0.0));
    for k in 0..dim {
        m[(k, k)] += lambda;
    }
    m
}

/// ||(lambda I - A)^{-1}||_2 = 1/sigma_min(lambda I - A).
pub fn resolvent_norm(a: &GeneratorMatrix, lambda: c64) -> Result<f64, SpectrumError> {
    let m = shifted(a, lambda);
    let smin = sigma_min(&m)?;
    let scale = frobenius(&a.entries).max(1.0);
    if smin < 1e-14 * scale {
        return Err(SpectrumError::SingularShift {
            lambda,
            sigma_min: smin,
        });
    }
    Ok(1.0 / smin)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScanSample {
    /// Real frequency; the shift is i s.
    pub s: f64,
    pub norm: f64,
    /// norm * |s|^-alpha.
    pub scaled: f64,
    /// Set when the shift was numerically singular and skipped.
    pub flagged: bool,
}

#[derive(Debug, Clone)]
pub struct ResolventScan {
    pub alpha: f64,
    pub samples: Vec<ScanSample>,
    pub supremum: f64,
    pub argsup: f64,
}

/// Default scan density: points per decade of frequency.
pub const SCAN_POINTS_PER_DECADE: usize = 64;

/// Sample ||R(is, A)|| on a symmetric log grid over +/-[s_min, s_max] with
/// `num` points per side, refined near each eigenvalue's |Im| (3 extra points
/// within one grid step) so resolvent peaks are not missed. `alpha` scales
/// the reported values by |s|^-alpha.
pub fn resolvent_scan(
    a: &GeneratorMatrix,
    s_min: f64,
    s_max: f64,
    num: usize,
    alpha: f64,
) -> Result<ResolventScan, SpectrumError> {
    assert!(num >= 2 && s_min > 0.0 && s_min < s_max);
    if alpha > 0.0 {
        assert!(s_min >= 1.0, "polynomial criterion samples |s| >= 1");
    }
    let (lg_min, lg_max) = (s_min.log10(), s_max.log10());
    let step = (lg_max - lg_min) / (num - 1) as f64;
    let mut freqs: Vec<f64> = (0..num)
        .map(|k| 10f64.powf(lg_min + step * k as f64))
        .collect();
    // Eigenvalue-guided refinement.
    for lam in eigenvalues(a)? {
        let t = lam.im.abs();
        if t >= s_min && t <= s_max {
            freqs.push(t);
            freqs.push(10f64.powf(t.log10() - 0.5 * step).clamp(s_min, s_max));
            freqs.push(10f64.powf(t.log10() + 0.5 * step).clamp(s_min, s_max));
        }
    }
    let mut signed: Vec<f64> = freqs.iter().flat_map(|&f| [f, -f]).collect();
    signed.sort_by(|x, y| x.partial_cmp(y).unwrap());
    signed.dedup();

    let samples: Vec<ScanSample> = signed
        .par_iter()
        .map(|&s| match resolvent_norm(a, c64::new(0.0, s)) {
            Ok(norm) => {
                let scaled = norm * s.abs().powf(-alpha);
                ScanSample {
                    s,
                    norm,
                    scaled,
                    flagged: false,
                }
            }
            Err(_) => ScanSample {
                s,
                norm: f64::INFINITY,
                scaled: f64::INFINITY,
                flagged: true,
            },
        })
        .collect();

    let (supremum, argsup) = samples
        .iter()
        .filter(|p| !p.flagged)
        .fold((0.0_f64, 0.0_f64), |(sup, arg), p| {
            if p.scaled > sup {
                (p.scaled, p.s)
            } else {
                (sup, arg)
            }
        });
    Ok(ResolventScan {
        alpha,
        samples,
        supremum,
        argsup,
    })
}

/// Per-n distance of the spectrum to the imaginary axis.
pub fn abscissa_table(
    model: &CouplingModel,
    bc: BoundaryCase,
    ns: &[usize],
) -> Result<Vec<(usize, f64)>, SpectrumError> {
    assert!(!ns.is_empty());
    ns.iter()
        .map(|&n| {
            let a = crate::generator::build_generator_assembled(model, bc, n)?;
            Ok((n, spectrum_report(&a)?.min_distance))
        })
        .collect()
}

/// ||A^{-1}||_inf (max absolute row sum of the inverse).
pub fn inverse_inf_norm(a: &GeneratorMatrix) -> Result<f64, SpectrumError> {
    let inv = a.entries.inv().map_err(|_| SpectrumError::SingularMatrix)?;
    Ok(inv
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max))
}

/// Slope of log|Re lambda| against log|Im lambda| over hyperbolic-branch
/// eigenvalues with |Im| >= `im_min` (at least 5 required).
pub fn hyperbolic_slope_from_eigs(eigs: &[c64], im_min: f64) -> Result<(f64, f64), SpectrumError> {
    let pts: Vec<(f64, f64)> = eigs
        .iter()
        .filter(|l| l.im >= im_min && l.re < 0.0)
        .map(|l| (l.im.ln(), l.re.abs().ln()))
        .collect();
    if pts.len() < 5 {
        return Err(SpectrumError::InsufficientBranch {
            found: pts.len(),
            needed: 5,
            im_min,
        });
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (slope, _, r2) = linear_fit(&xs, &ys);
    Ok((slope, r2))
}

/// Fitted decay exponent of the hyperbolic branch for a weak model
/// (expected near -2).
pub fn polynomial_order_fit(
    model: &CouplingModel,
    bc: BoundaryCase,
    n: usize,
) -> Result<f64, SpectrumError> {
    assert_eq!(model.kind, CouplingKind::Weak);
    let a = crate::generator::build_generator_assembled(model, bc, n)?;
    let eigs = eigenvalues(&a)?;
    let (slope, _) = hyperbolic_slope_from_eigs(&eigs, 2.0)?;
    Ok(slope)
}

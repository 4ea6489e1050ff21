//! Generator matrices of the modal system, built two ways: from the
//! closed-form block displays and from the Gram/Cholesky assembly pipeline.

use crate::basis::build_basis;
use crate::gram::assemble_gram;
use crate::model::{BoundaryCase, CouplingKind, CouplingModel, ModelError, Provenance};
use ndarray::{s, Array1, Array2, ArrayView2};
use ndarray_linalg::{Eigh, Solve, UPLO};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

/// Dense (3n) x (3n) generator of the modal dynamics dy/dt = A y, with the
/// state ordered as (u-block, v-block, theta-block).
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    pub model: CouplingModel,
    pub bc: BoundaryCase,
    pub n: usize,
    pub entries: Array2<f64>,
    pub provenance: Provenance,
}

impl GeneratorMatrix {
    pub fn dim(&self) -> usize {
        3 * self.n
    }

    /// JSON envelope with metadata and row-major entries.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<f64>> = self
            .entries
            .rows()
            .into_iter()
            .map(|r| r.to_vec())
            .collect();
        serde_json::json!({
            "kind": self.model.kind.to_string(),
            "bc": self.bc.to_string(),
            "n": self.n,
            "gamma": self.model.gamma,
            "provenance": self.provenance.to_string(),
            "entries": rows,
        })
    }
}

/// One entry of a closed-form block whose stated condition fails to exclude a
/// zero denominator.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct UndefinedEntry {
    pub block: &'static str,
    /// 1-based indices.
    pub i: usize,
    pub j: usize,
}

/// Closed-form build together with the entries its formulas leave undefined
/// (set to zero in `matrix`).
#[derive(Debug, Clone)]
pub struct PrintedBuild {
    pub matrix: GeneratorMatrix,
    pub undefined: Vec<UndefinedEntry>,
}

/// Entry of the off-diagonal blocks -(4/pi) i j / (i^2 - j^2) on the stated
/// parity; `None` when the condition admits i = j (zero denominator).
fn parity_entry(i: usize, j: usize, odd: bool) -> Option<f64> {
    let diff_odd = (i + j) % 2 == 1;
    if diff_odd != odd {
        return Some(0.0);
    }
    if i == j {
        return None;
    }
    let (fi, fj) = (i as f64, j as f64);
    Some(-(4.0 / PI) * fi * fj / (fi * fi - fj * fj))
}

fn diag(n: usize, f: impl Fn(usize) -> f64) -> Array2<f64> {
    Array2::from_diag(&Array1::from_iter((1..=n).map(f)))
}

/// Fill an n x n block from a per-entry formula; undefined entries become 0
/// and are recorded.
fn fill_block(
    n: usize,
    label: &'static str,
    undefined: &mut Vec<UndefinedEntry>,
    f: impl Fn(usize, usize) -> Option<f64>,
) -> Array2<f64> {
    let mut out = Array2::zeros((n, n));
    for i in 1..=n {
        for j in 1..=n {
            match f(i, j) {
                Some(v) => out[(i - 1, j - 1)] = v,
                None => undefined.push(UndefinedEntry { block: label, i, j }),
            }
        }
    }
    out
}

/// Assemble [[0, T], [-T^t, ...]] style 3x3 block layout:
/// rows (u, v, theta) with blocks uv, vu, vtheta, thetav, thetatheta.
fn block_matrix(
    n: usize,
    uv: &Array2<f64>,
    vu: &Array2<f64>,
    vt: &Array2<f64>,
    tv: &Array2<f64>,
    tt: &Array2<f64>,
) -> Array2<f64> {
    let mut a = Array2::zeros((3 * n, 3 * n));
    a.slice_mut(s![0..n, n..2 * n]).assign(uv);
    a.slice_mut(s![n..2 * n, 0..n]).assign(vu);
    a.slice_mut(s![n..2 * n, 2 * n..3 * n]).assign(vt);
    a.slice_mut(s![2 * n..3 * n, n..2 * n]).assign(tv);
    a.slice_mut(s![2 * n..3 * n, 2 * n..3 * n]).assign(tt);
    a
}

/// Closed-form generator, recording formula entries that divide by zero.
pub fn build_generator_printed_lenient(
    model: &CouplingModel,
    bc: BoundaryCase,
    n: usize,
) -> Result<PrintedBuild, ModelError> {
    if n < 1 {
        return Err(ModelError::InvalidModeCount(n));
    }
    let g = model.gamma;
    let mut undefined = Vec::new();
    let d_plain = diag(n, |k| k as f64);

    let entries = match (model.kind, bc) {
        (CouplingKind::Strong, BoundaryCase::DD) => {
            let f = fill_block(n, "F", &mut undefined, |i, j| parity_entry(i, j, true));
            let d2 = diag(n, |k| (k * k) as f64);
            block_matrix(n, &d_plain, &(-&d_plain), &(-g * &f), &(g * &f.t()), &(-d2))
        }
        (CouplingKind::Strong, BoundaryCase::DN) | (CouplingKind::Weak, BoundaryCase::DN) => {
            let d2 = diag(n, |k| (k * k) as f64);
            block_matrix(
                n,
                &d_plain,
                &(-&d_plain),
                &(g * &d_plain),
                &(-g * &d_plain),
                &(-d2),
            )
        }
        (CouplingKind::Strong, BoundaryCase::ND) => {
            let d = fill_block(n, "D", &mut undefined, |i, j| parity_entry(i, j, false));
            let f = fill_block(n, "F", &mut undefined, |i, j| parity_entry(i, j, true));
            let gblk = diag(n, |k| (2.0 / PI) * (k * k) as f64);
            block_matrix(
                n,
                &d.t().to_owned(),
                &(-&d),
                &(-g * &f),
                &(g * &f.t()),
                &(-gblk),
            )
        }
        (CouplingKind::Strong, BoundaryCase::NN) => {
            let d = fill_block(n, "D", &mut undefined, |i, j| parity_entry(i, j, false));
            let f = diag(n, |k| k as f64);
            let gblk = diag(n, |k| (2.0 / PI) * k as f64);
            block_matrix(
                n,
                &d.t().to_owned(),
                &(-&d),
                &(-g * &f),
                &(g * &f.t()),
                &(-gblk),
            )
        }
        (CouplingKind::Weak, BoundaryCase::DD) => {
            let eye = Array2::eye(n);
            let d2 = diag(n, |k| (k * k) as f64);
            block_matrix(n, &d_plain, &(-&d_plain), &(-g * &eye), &(g * &eye), &(-d2))
        }
        (CouplingKind::Weak, BoundaryCase::ND) => {
            let d = fill_block(n, "D", &mut undefined, |i, j| parity_entry(i, j, false));
            let f = diag(n, |k| k as f64);
            let f2 = diag(n, |k| (k * k) as f64);
            block_matrix(
                n,
                &d.t().to_owned(),
                &(-&d),
                &(-g * &f),
                &(g * &f.t()),
                &(-f2),
            )
        }
        (CouplingKind::Weak, BoundaryCase::NN) => {
            let d = fill_block(n, "D", &mut undefined, |i, j| parity_entry(i, j, false));
            // F_ij = -(4/pi) i / (j^2 - i^2) for |i-j| even, zero denominator at i = j.
            let f = fill_block(n, "F", &mut undefined, |i, j| {
                if (i + j) % 2 == 1 {
                    Some(0.0)
                } else if i == j {
                    None
                } else {
                    let (fi, fj) = (i as f64, j as f64);
                    Some(-(4.0 / PI) * fi / (fj * fj - fi * fi))
                }
            });
            let gblk = diag(n, |k| (2.0 / PI) * (k * k) as f64);
            block_matrix(
                n,
                &d.t().to_owned(),
                &(-&d),
                &(-g * &f),
                &(g * &f.t()),
                &(-gblk),
            )
        }
    };

    Ok(PrintedBuild {
        matrix: GeneratorMatrix {
            model: *model,
            bc,
            n,
            entries,
            provenance: Provenance::Printed,
        },
        undefined,
    })
}

/// Closed-form generator; rejects any case whose formulas divide by zero.
pub fn build_generator_printed(
    model: &CouplingModel,
    bc: BoundaryCase,
    n: usize,
) -> Result<GeneratorMatrix, ModelError> {
    let build = build_generator_printed_lenient(model, bc, n)?;
    if let Some(u) = build.undefined.first() {
        return Err(ModelError::UndefinedEntry {
            kind: model.kind,
            bc,
            block: u.block,
            i: u.i,
            j: u.j,
        });
    }
    Ok(build.matrix)
}

/// Inverse of a lower-triangular matrix by forward substitution.
pub(crate) fn inv_lower(l: ArrayView2<f64>) -> Array2<f64> {
    let n = l.nrows();
    let mut inv = Array2::<f64>::zeros((n, n));
    for col in 0..n {
        for i in col..n {
            let mut v = if i == col { 1.0 } else { 0.0 };
            for k in col..i {
                v -= l[(i, k)] * inv[(k, col)];
            }
            inv[(i, col)] = v / l[(i, i)];
        }
    }
    inv
}

/// Generator from the variational Gram blocks, orthonormalized by the
/// triangular factors: blocks (L1^t)^-1 Dt^t L2^-1 and friends.
pub fn build_generator_assembled(
    model: &CouplingModel,
    bc: BoundaryCase,
    n: usize,
) -> Result<GeneratorMatrix, ModelError> {
    let basis = build_basis(model, bc, n)?;
    let gb = assemble_gram(&basis, model, bc)?;
    let g = model.gamma;

    let l1_inv = inv_lower(gb.l1.view());
    let l2_inv = inv_lower(gb.l2.view());
    let l3_inv = inv_lower(gb.l3.view());
    let l1_t_inv = l1_inv.t().to_owned();
    let l2_t_inv = l2_inv.t().to_owned();
    let l3_t_inv = l3_inv.t().to_owned();

    let uv = l1_t_inv.dot(&gb.dtilde.t()).dot(&l2_inv);
    let vu = -l2_t_inv.dot(&gb.dtilde).dot(&l1_inv);
    let vt = -g * l2_t_inv.dot(&gb.ftilde).dot(&l3_inv);
    let tv = g * l3_t_inv.dot(&gb.ftilde.t()).dot(&l2_inv);
    let tt = -l3_t_inv.dot(&gb.g).dot(&l3_inv);

    Ok(GeneratorMatrix {
        model: *model,
        bc,
        n,
        entries: block_matrix(n, &uv, &vu, &vt, &tv, &tt),
        provenance: Provenance::Assembled,
    })
}

/// Dissipativity evidence: sampled Rayleigh quotients and the certified
/// largest eigenvalue of the symmetric part.
#[derive(Debug, Clone, Serialize)]
pub struct DissipativityReport {
    pub max_rayleigh: f64,
    pub sym_max_eigenvalue: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Max of Re<Ay, y> over random unit vectors, plus the top eigenvalue of
/// (A + A^t)/2 as a bound valid for every vector.
pub fn dissipativity_defect(a: &GeneratorMatrix, trials: usize, seed: u64) -> DissipativityReport {
    assert!(trials >= 1);
    let dim = a.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_rayleigh = f64::NEG_INFINITY;
    for _ in 0..trials {
        let mut y: Array1<f64> = Array1::from_shape_fn(dim, |_| rng.gen_range(-1.0..1.0));
        let norm = y.dot(&y).sqrt();
        if norm == 0.0 {
            continue;
        }
        y /= norm;
        let q = y.dot(&a.entries.dot(&y));
        max_rayleigh = max_rayleigh.max(q);
    }
    let sym = 0.5 * (&a.entries + &a.entries.t());
    let (eigs, _) = sym.eigh(UPLO::Upper).expect("symmetric eigensolve");
    let sym_max = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    DissipativityReport {
        max_rayleigh,
        sym_max_eigenvalue: sym_max,
        trials,
        seed,
    }
}

/// Machine-readable comparison of the closed-form and assembled builds for
/// one case.
#[derive(Debug, Clone, Serialize)]
pub struct DiscrepancyEntry {
    pub kind: String,
    pub bc: String,
    pub n: usize,
    pub gamma: f64,
    /// Max |printed - assembled| over entries the closed form defines.
    pub max_abs_diff: f64,
    /// Scaled by the max absolute printed entry.
    pub rel_diff: f64,
    pub undefined_entries: Vec<UndefinedEntry>,
    pub agrees: bool,
}

/// Relative agreement threshold between the two builds.
pub const PRINTED_ASSEMBLED_TOL: f64 = 1e-10;

/// Compare closed-form and assembled generators entrywise; entries the closed
/// form leaves undefined are excluded from the diff but listed.
pub fn discrepancy_entry(
    model: &CouplingModel,
    bc: BoundaryCase,
    n: usize,
) -> Result<DiscrepancyEntry, ModelError> {
    let printed = build_generator_printed_lenient(model, bc, n)?;
    let assembled = build_generator_assembled(model, bc, n)?;
    let mut mask = Array2::<bool>::from_elem((3 * n, 3 * n), true);
    for u in &printed.undefined {
        // Lenient fill order: blocks named D sit at (v,u) and transposed at
        // (u,v); F at (v,theta) and transposed at (theta,v).
        let (i, j) = (u.i - 1, u.j - 1);
        match u.block {
            "D" => {
                mask[(n + i, j)] = false;
                mask[(j, n + i)] = false;
            }
            "F" => {
                mask[(n + i, 2 * n + j)] = false;
                mask[(2 * n + j, n + i)] = false;
            }
            _ => unreachable!("unknown block label"),
        }
    }
    let mut max_abs_diff = 0.0_f64;
    let mut scale = 0.0_f64;
    for ((idx, &p), &a) in printed
        .matrix
        .entries
        .indexed_iter()
        .zip(assembled.entries.iter())
    {
        scale = scale.max(p.abs());
        if mask[idx] {
            max_abs_diff = max_abs_diff.max((p - a).abs());
        }
    }
    let rel_diff = if scale > 0.0 { max_abs_diff / scale } else { 0.0 };
    Ok(DiscrepancyEntry {
        kind: model.kind.to_string(),
        bc: bc.to_string(),
        n,
        gamma: model.gamma,
        max_abs_diff,
        rel_diff,
        undefined_entries: printed.undefined,
        agrees: rel_diff <= PRINTED_ASSEMBLED_TOL,
    })
}

/// Discrepancy report over every (kind, case) pair at one size.
pub fn discrepancy_report(gamma: f64, n: usize) -> Result<Vec<DiscrepancyEntry>, ModelError> {
    let mut out = Vec::new();
    for kind in [CouplingKind::Strong, CouplingKind::Weak] {
        for bc in BoundaryCase::ALL {
            let model = CouplingModel::new(kind, gamma)?;
            out.push(discrepancy_entry(&model, bc, n)?);
        }
    }
    Ok(out)
}

/// Solve A x = b; the weak-model invertibility check goes through here.
pub fn solve_linear(a: &GeneratorMatrix, b: &Array1<f64>) -> Result<Array1<f64>, String> {
    a.entries.solve(b).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
        (a - b).iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    #[test]
    fn printed_weak_dd_rows() {
        let model = CouplingModel::weak(0.1).unwrap();
        let a = build_generator_printed(&model, BoundaryCase::DD, 2).unwrap();
        let expected = ndarray::array![
            [0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 2.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0, 0.0, -0.1, 0.0],
            [0.0, -2.0, 0.0, 0.0, 0.0, -0.1],
            [0.0, 0.0, 0.1, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, 0.1, 0.0, -4.0],
        ];
        assert_relative_eq!(a.entries, expected, epsilon = 1e-15);
    }

    #[test]
    fn printed_strong_dd_coupling_entry() {
        let model = CouplingModel::strong(1.0).unwrap();
        let a = build_generator_printed(&model, BoundaryCase::DD, 2).unwrap();
        // (v-row 1, theta-col 2) = -gamma * F_12 = -(-(4/pi)*2/(1-4)) = -8/(3 pi)
        assert_relative_eq!(a.entries[(2, 5)], -8.0 / (3.0 * PI), epsilon = 1e-15);
    }

    #[test]
    fn printed_gamma_zero_block_diagonal() {
        let model = CouplingModel::with_gamma_unchecked(CouplingKind::Strong, 0.0);
        let a = build_generator_printed(&model, BoundaryCase::DD, 3).unwrap();
        let n = 3;
        for i in 0..2 * n {
            for j in 2 * n..3 * n {
                assert_eq!(a.entries[(i, j)], 0.0);
                assert_eq!(a.entries[(j, i)], 0.0);
            }
        }
    }

    #[test]
    fn assembled_matches_printed_strong_dd() {
        let model = CouplingModel::strong(0.05).unwrap();
        let p = build_generator_printed(&model, BoundaryCase::DD, 4).unwrap();
        let a = build_generator_assembled(&model, BoundaryCase::DD, 4).unwrap();
        assert!(max_abs_diff(&p.entries, &a.entries) < 1e-12);
    }

    #[test]
    fn assembled_matches_printed_weak_dd() {
        let model = CouplingModel::weak(0.5).unwrap();
        let p = build_generator_printed(&model, BoundaryCase::DD, 4).unwrap();
        let a = build_generator_assembled(&model, BoundaryCase::DD, 4).unwrap();
        assert!(max_abs_diff(&p.entries, &a.entries) < 1e-12);
    }

    #[test]
    fn strict_printed_rejects_zero_denominator_cases() {
        let model = CouplingModel::strong(0.05).unwrap();
        assert!(matches!(
            build_generator_printed(&model, BoundaryCase::ND, 3),
            Err(ModelError::UndefinedEntry { block: "D", i: 1, j: 1, .. })
        ));
        let weak = CouplingModel::weak(0.05).unwrap();
        assert!(build_generator_printed(&weak, BoundaryCase::NN, 3).is_err());
    }

    #[test]
    fn gamma_linearity_exact() {
        for kind in [CouplingKind::Strong, CouplingKind::Weak] {
            for bc in BoundaryCase::ALL {
                let build = |g: f64| {
                    build_generator_assembled(
                        &CouplingModel::with_gamma_unchecked(kind, g),
                        bc,
                        5,
                    )
                    .unwrap()
                    .entries
                };
                let lhs = build(0.8) - 2.0 * build(0.4) + build(0.0);
                assert_eq!(lhs.iter().fold(0.0_f64, |m, v| m.max(v.abs())), 0.0);
            }
        }
    }

    #[test]
    fn assembled_dissipative_all_cases() {
        for kind in [CouplingKind::Strong, CouplingKind::Weak] {
            for bc in BoundaryCase::ALL {
                let model = CouplingModel::new(kind, 0.3).unwrap();
                let a = build_generator_assembled(&model, bc, 6).unwrap();
                let rep = dissipativity_defect(&a, 50, 42);
                assert!(rep.max_rayleigh <= 1e-12, "{kind}/{bc}: {}", rep.max_rayleigh);
                assert!(
                    rep.sym_max_eigenvalue <= 1e-12,
                    "{kind}/{bc}: {}",
                    rep.sym_max_eigenvalue
                );
            }
        }
    }

    #[test]
    fn symmetric_part_support_in_theta_block() {
        let model = CouplingModel::strong(0.5).unwrap();
        let a = build_generator_assembled(&model, BoundaryCase::NN, 4).unwrap();
        let sym = 0.5 * (&a.entries + &a.entries.t());
        for i in 0..8 {
            for j in 0..12 {
                assert!(sym[(i, j)].abs() < 1e-13);
                assert!(sym[(j, i)].abs() < 1e-13);
            }
        }
    }

    #[test]
    fn weak_model_invertible() {
        for n in [2usize, 8, 32] {
            let model = CouplingModel::weak(0.1).unwrap();
            let a = build_generator_assembled(&model, BoundaryCase::DD, n).unwrap();
            for k in 0..3 * n {
                let mut e = Array1::zeros(3 * n);
                e[k] = 1.0;
                let x = solve_linear(&a, &e).unwrap();
                let r = &a.entries.dot(&x) - &e;
                assert!(r.iter().all(|v| v.abs() < 1e-8));
            }
        }
    }

    #[test]
    fn discrepancy_report_flags_known_conflicts() {
        let report = discrepancy_report(0.05, 4).unwrap();
        let find = |kind: &str, bc: &str| {
            report
                .iter()
                .find(|e| e.kind == kind && e.bc == bc)
                .unwrap()
        };
        assert!(find("strong", "DD").agrees);
        assert!(find("weak", "DD").agrees);
        assert!(!find("strong", "ND").undefined_entries.is_empty());
        // The closed-form weak/DN display coincides with the strong/DN matrix
        // and disagrees with its own inner-product definitions.
        assert!(!find("weak", "DN").agrees);
    }

    #[test]
    fn dissipativity_defect_identity() {
        let model = CouplingModel::weak(0.1).unwrap();
        let a = GeneratorMatrix {
            model,
            bc: BoundaryCase::DD,
            n: 1,
            entries: -Array2::eye(3),
            provenance: Provenance::Printed,
        };
        let rep = dissipativity_defect(&a, 20, 7);
        assert_relative_eq!(rep.max_rayleigh, -1.0, epsilon = 1e-12);
        assert_relative_eq!(rep.sym_max_eigenvalue, -1.0, epsilon = 1e-12);
    }
}

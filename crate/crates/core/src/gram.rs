//! Gram blocks of the variational system and their Cholesky-type factors.

use crate::basis::{l2_inner, ModalBasis};
use crate::model::{BoundaryCase, CouplingKind, CouplingModel, ModelError};
use ndarray::{Array2, ArrayView2};
use std::f64::consts::PI;

/// Relative pivot threshold for rejecting a non-SPD Gram block.
const PIVOT_THRESHOLD: f64 = 1e-14;

/// The n x n blocks of the mass matrix and the stiffness/coupling blocks,
/// together with factors L_i (lower triangular, M_i = L_i^T L_i).
#[derive(Debug, Clone)]
pub struct GramBlocks {
    pub m1: Array2<f64>,
    pub m2: Array2<f64>,
    pub m3: Array2<f64>,
    pub dtilde: Array2<f64>,
    pub ftilde: Array2<f64>,
    pub g: Array2<f64>,
    pub l1: Array2<f64>,
    pub l2: Array2<f64>,
    pub l3: Array2<f64>,
}

/// Assemble every Gram block from exact trigonometric integrals.
///
/// The mass blocks use the gradient product for the displacement family and
/// the plain L2 product for velocity and temperature. The coupling block
/// depends on the model kind: the strong system couples through the
/// temperature gradient, the weak system through the temperature itself.
pub fn assemble_gram(
    basis: &ModalBasis,
    model: &CouplingModel,
    _bc: BoundaryCase,
) -> Result<GramBlocks, ModelError> {
    let n = basis.n;
    let dphi: Vec<_> = basis.phi.iter().map(|s| s.derivative()).collect();
    let dpsi: Vec<_> = basis.psi.iter().map(|s| s.derivative()).collect();
    let dxi: Vec<_> = basis.xi.iter().map(|s| s.derivative()).collect();

    let mat = |f: &dyn Fn(usize, usize) -> f64| {
        Array2::from_shape_fn((n, n), |(i, j)| f(i, j))
    };
    let m1 = mat(&|i, j| l2_inner(&dphi[i], &dphi[j]));
    let m2 = mat(&|i, j| l2_inner(&basis.psi[i], &basis.psi[j]));
    let m3 = mat(&|i, j| l2_inner(&basis.xi[i], &basis.xi[j]));
    let dtilde = mat(&|i, j| l2_inner(&dphi[i], &dpsi[j]));
    let ftilde = match model.kind {
        CouplingKind::Strong => mat(&|i, j| l2_inner(&dxi[i], &basis.psi[j])),
        CouplingKind::Weak => mat(&|i, j| l2_inner(&basis.xi[i], &basis.psi[j])),
    };
    let g = mat(&|i, j| l2_inner(&dxi[i], &dxi[j]));

    let l1 = cholesky_lt(m1.view()).map_err(|pivot| ModelError::GramNotSpd { block: 1, pivot })?;
    let l2 = cholesky_lt(m2.view()).map_err(|pivot| ModelError::GramNotSpd { block: 2, pivot })?;
    let l3 = cholesky_lt(m3.view()).map_err(|pivot| ModelError::GramNotSpd { block: 3, pivot })?;

    Ok(GramBlocks { m1, m2, m3, dtilde, ftilde, g, l1, l2, l3 })
}

/// Lower-triangular L with M = L^T L.
///
/// This is the reverse-ordered Cholesky factorization: permuting rows and
/// columns of M by the index reversal P turns it into the ordinary C C^T
/// problem, and L = P C^T P is lower triangular. Fails (returning the bad
/// pivot) if any pivot drops below `PIVOT_THRESHOLD` times the largest
/// diagonal entry of M.
pub fn cholesky_lt(m: ArrayView2<f64>) -> Result<Array2<f64>, f64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let max_diag = (0..n).map(|i| m[(i, i)]).fold(0.0_f64, f64::max);
    let threshold = PIVOT_THRESHOLD * max_diag;

    // Factor the reversed matrix M'[i,j] = M[n-1-i, n-1-j] as C C^T.
    let mut c = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut sum = m[(n - 1 - i, n - 1 - j)];
            for k in 0..j {
                sum -= c[(i, k)] * c[(j, k)];
            }
            if i == j {
                if sum < threshold {
                    return Err(sum);
                }
                c[(i, j)] = sum.sqrt();
            } else {
                c[(i, j)] = sum / c[(j, j)];
            }
        }
    }
    // L = P C^T P
    Ok(Array2::from_shape_fn((n, n), |(i, j)| c[(n - 1 - j, n - 1 - i)]))
}

/// Composite Gauss-Legendre quadrature of `f * g` over (0, pi), resolved for
/// integrands whose highest frequency is `max_freq`. Cross-check path only;
/// production assembly uses the exact integrals.
pub fn quadrature_inner(f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64, max_freq: u32) -> f64 {
    // 8-point rule per subinterval, 4 subintervals per unit frequency:
    // about 64 nodes per wavelength on (0, pi).
    const NODES: [f64; 8] = [
        -0.960_289_856_497_536_2,
        -0.796_666_477_413_626_7,
        -0.525_532_409_916_329,
        -0.183_434_642_495_649_8,
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_2,
    ];
    const WEIGHTS: [f64; 8] = [
        0.101_228_536_290_376_26,
        0.222_381_034_453_374_47,
        0.313_706_645_877_887_3,
        0.362_683_783_378_362,
        0.362_683_783_378_362,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_47,
        0.101_228_536_290_376_26,
    ];
    let nsub = 4 * max_freq.max(1) as usize;
    let h = PI / nsub as f64;
    let mut total = 0.0;
    for s in 0..nsub {
        let mid = (s as f64 + 0.5) * h;
        let mut acc = 0.0;
        for (t, w) in NODES.iter().zip(WEIGHTS.iter()) {
            let x = mid + 0.5 * h * t;
            acc += w * f(x) * g(x);
        }
        total += acc * 0.5 * h;
    }
    total
}

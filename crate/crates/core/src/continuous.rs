//! Characteristic equations of the weakly coupled system on (0, pi):
//! quartic roots, 4x4 boundary matrices, closed-form determinants, and
//! Newton root searches along both spectral branches.

use crate::model::BoundaryCase;
use ndarray_linalg::c64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// The four roots +/-a, +/-b of X^4 - l(l+1) X^2 + l(l^2 + g^2) = 0 with the
/// principal square-root branch.
#[derive(Debug, Clone, Copy)]
pub struct QuarticRoots {
    pub lambda: c64,
    pub gamma: f64,
    pub a: c64,
    pub b: c64,
    pub discriminant: c64,
}

pub fn roots_ab(lambda: c64, gamma: f64) -> QuarticRoots {
    let g2 = c64::new(gamma * gamma, 0.0);
    let p = lambda * (lambda + 1.0);
    let d = p * p - 4.0 * lambda * (lambda * lambda + g2);
    let sd = d.sqrt();
    let mut a = ((p + sd) / 2.0).sqrt();
    let mut b = ((p - sd) / 2.0).sqrt();
    // Principal square roots can deliver the pair in either order; relabel so
    // that b carries the heat-like root (b^2 near lambda). Every determinant
    // downstream is symmetric under the swap.
    if (b * b - lambda).norm() > (a * a - lambda).norm() {
        std::mem::swap(&mut a, &mut b);
    }
    QuarticRoots {
        lambda,
        gamma,
        a,
        b,
        discriminant: d,
    }
}

impl QuarticRoots {
    /// Residual of X^4 - l(l+1)X^2 + l(l^2+g^2) at X, scaled by max(1, |l|^4).
    pub fn quartic_residual(&self, x: c64) -> f64 {
        let g2 = c64::new(self.gamma * self.gamma, 0.0);
        let r = x.powu(4) - self.lambda * (self.lambda + 1.0) * x * x
            + self.lambda * (self.lambda * self.lambda + g2);
        r.norm() / self.lambda.norm().powi(4).max(1.0)
    }

    /// l = a (a^2 - lambda^2).
    pub fn l(&self) -> c64 {
        self.a * (self.a * self.a - self.lambda * self.lambda)
    }

    /// m = b (b^2 - lambda^2).
    pub fn m(&self) -> c64 {
        self.b * (self.b * self.b - self.lambda * self.lambda)
    }

    /// l* = a^2 - lambda^2.
    pub fn lstar(&self) -> c64 {
        self.a * self.a - self.lambda * self.lambda
    }

    /// m* = b^2 - lambda^2.
    pub fn mstar(&self) -> c64 {
        self.b * self.b - self.lambda * self.lambda
    }
}

/// Boundary matrix exactly as displayed: columns multiply the coefficients
/// of (e^{ax}, e^{-ax}, e^{bx}, e^{-bx}). Overflows for large Re a; use
/// `boundary_matrix_scaled` for evaluation.
pub fn boundary_matrix(r: &QuarticRoots, bc: BoundaryCase) -> [[c64; 4]; 4] {
    boundary_matrix_with_scale(r, bc, c64::new(1.0, 0.0), c64::new(1.0, 0.0))
}

/// Boundary matrix with columns 1 and 3 rescaled by e^{-a pi}, e^{-b pi}
/// (the basis e^{a(x-pi)}, e^{b(x-pi)}): every entry stays bounded when
/// Re a, Re b >= 0, and det_scaled = det * e^{-(a+b) pi}.
pub fn boundary_matrix_scaled(r: &QuarticRoots, bc: BoundaryCase) -> [[c64; 4]; 4] {
    let ea = (-r.a * PI).exp();
    let eb = (-r.b * PI).exp();
    boundary_matrix_with_scale(r, bc, ea, eb)
}

fn boundary_matrix_with_scale(r: &QuarticRoots, bc: BoundaryCase, ea: c64, eb: c64) -> [[c64; 4]; 4] {
    // Row values at x = 0 and x = pi for each of the four exponentials,
    // with the first/third columns carrying the extra factors ea/eb.
    let one = c64::new(1.0, 0.0);
    let (a, b) = (r.a, r.b);
    let eap = (a * PI).exp() * ea; // e^{a pi} scaled
    let ean = (-a * PI).exp(); // e^{-a pi}
    let ebp = (b * PI).exp() * eb;
    let ebn = (-b * PI).exp();
    let (l, m) = (r.l(), r.m());
    let (ls, ms) = (r.lstar(), r.mstar());
    let a2 = a * a;
    let b2 = b * b;
    match bc {
        BoundaryCase::DD => [
            [ea, one, eb, one],
            [eap, ean, ebp, ebn],
            [a2 * ea, a2, b2 * eb, b2],
            [a2 * eap, a2 * ean, b2 * ebp, b2 * ebn],
        ],
        BoundaryCase::DN => [
            [ea, one, eb, one],
            [eap, ean, ebp, ebn],
            [l * ea, -l, m * eb, -m],
            [l * eap, -l * ean, m * ebp, -m * ebn],
        ],
        BoundaryCase::ND => [
            [a * ea, -a, b * eb, -b],
            [a * eap, -a * ean, b * ebp, -b * ebn],
            [ls * ea, ls, ms * eb, ms],
            [ls * eap, ls * ean, ms * ebp, ms * ebn],
        ],
        BoundaryCase::NN => [
            [a * ea, -a, b * eb, -b],
            [a * eap, -a * ean, b * ebp, -b * ebn],
            [l * ea, -l, m * eb, -m],
            [l * eap, -l * ean, m * ebp, -m * ebn],
        ],
    }
}

/// 4x4 determinant by Gaussian elimination with partial pivoting.
pub fn det4(m: &[[c64; 4]; 4]) -> c64 {
    let mut a = *m;
    let mut det = c64::new(1.0, 0.0);
    for col in 0..4 {
        let (pivot, _) = (col..4)
            .map(|r| (r, a[r][col].norm()))
            .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col];
        if p.norm() == 0.0 {
            return c64::new(0.0, 0.0);
        }
        det *= p;
        for r in (col + 1)..4 {
            let f = a[r][col] / p;
            for c in col..4 {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

/// Both determinant evaluations, in the scaled gauge (common factor
/// e^{-(a+b) pi} removed from the printed closed forms as well).
#[derive(Debug, Clone, Copy)]
pub struct CharDet {
    pub det_direct: c64,
    pub det_closed: c64,
}

/// Row-ordering orientation of the closed forms relative to the direct
/// determinant of the displayed matrix.
fn orientation(bc: BoundaryCase) -> f64 {
    match bc {
        BoundaryCase::DD | BoundaryCase::NN => 1.0,
        BoundaryCase::DN | BoundaryCase::ND => -1.0,
    }
}

pub fn char_det(lambda: c64, gamma: f64, bc: BoundaryCase) -> CharDet {
    let r = roots_ab(lambda, gamma);
    let det_direct = det4(&boundary_matrix_scaled(&r, bc));
    CharDet {
        det_direct,
        det_closed: orientation(bc) * char_det_closed_scaled(&r, bc),
    }
}

/// Printed closed forms multiplied through by e^{-(a+b) pi}: e.g. the DD
/// product (e^{a pi}-e^{-a pi})(e^{b pi}-e^{-b pi}) becomes
/// (1-e^{-2 a pi})(1-e^{-2 b pi}).
pub fn char_det_closed_scaled(r: &QuarticRoots, bc: BoundaryCase) -> c64 {
    let (a, b) = (r.a, r.b);
    let e2a = (-2.0 * a * PI).exp();
    let e2b = (-2.0 * b * PI).exp();
    let eab = (-(a + b) * PI).exp();
    match bc {
        BoundaryCase::DD => {
            (a - b).powu(2) * (a + b).powu(2) * (c64::new(1.0, 0.0) - e2a) * (c64::new(1.0, 0.0) - e2b)
        }
        BoundaryCase::DN => {
            let (l, m) = (r.l(), r.m());
            8.0 * l * m * eab + (l - m).powu(2) * (1.0 + eab * eab)
                - (l + m).powu(2) * (e2b + e2a)
        }
        BoundaryCase::ND => {
            let (ls, ms) = (r.lstar(), r.mstar());
            8.0 * a * b * ls * ms * eab + (b * ls - a * ms).powu(2) * (1.0 + eab * eab)
                - (b * ls + a * ms).powu(2) * (e2b + e2a)
        }
        BoundaryCase::NN => {
            let (l, m) = (r.l(), r.m());
            (a * m - b * l).powu(2) * (1.0 + eab * eab - e2b - e2a)
        }
    }
}

/// Result of a damped Newton search on the scaled determinant.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RootResult {
    pub re: f64,
    pub im: f64,
    pub converged: bool,
    pub iterations: usize,
    pub det_abs: f64,
}

impl RootResult {
    pub fn lambda(&self) -> c64 {
        c64::new(self.re, self.im)
    }
}

/// Newton objective: the direct determinant divided by a b. The determinant
/// is odd under either sign flip a -> -a or b -> -b (a column-pair swap), so
/// this quotient is even in both roots, hence a single-valued holomorphic
/// function of lambda that the square-root branch cuts cannot break.
pub fn char_det_smooth(lambda: c64, gamma: f64, bc: BoundaryCase) -> c64 {
    let r = roots_ab(lambda, gamma);
    det4(&boundary_matrix(&r, bc)) / (r.a * r.b)
}

/// Damped Newton on the smooth determinant quotient: central-difference
/// derivative with step 1e-6 max(1, |lambda|), step halving while the
/// determinant fails to decrease, at most 100 iterations. Convergence:
/// |det| below `tol` times the determinant magnitude at the seed.
pub fn find_eigen_near(seed: c64, gamma: f64, bc: BoundaryCase, tol: f64) -> RootResult {
    assert!(tol > 0.0);
    let f = |z: c64| char_det_smooth(z, gamma, bc);
    let mut z = seed;
    let mut fz = f(z);
    let scale = fz.norm().max(1e-300);
    for iter in 0..100 {
        if fz.norm() <= tol * scale {
            return RootResult {
                re: z.re,
                im: z.im,
                converged: true,
                iterations: iter,
                det_abs: fz.norm(),
            };
        }
        let h = 1e-6 * z.norm().max(1.0);
        let d = (f(z + h) - f(z - h)) / (2.0 * h);
        if d.norm() == 0.0 {
            break;
        }
        let mut step = fz / d;
        // Damping: halve until the residual decreases.
        let mut accepted = false;
        for _ in 0..40 {
            let cand = z - step;
            let fc = f(cand);
            if fc.norm() < fz.norm() {
                z = cand;
                fz = fc;
                accepted = true;
                break;
            }
            step /= 2.0;
        }
        if !accepted {
            break;
        }
    }
    RootResult {
        re: z.re,
        im: z.im,
        converged: fz.norm() <= tol * scale,
        iterations: 100,
        det_abs: fz.norm(),
    }
}

/// One row of the hyperbolic-branch asymptotics table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BranchRow {
    pub k: u32,
    pub re: f64,
    pub im: f64,
    pub converged: bool,
    /// |Re lambda| k^2, expected bounded above and below across k.
    pub re_k2: f64,
}

/// Roots seeded at i k for each integer k in the range, with |Re lambda| k^2.
pub fn branch_asymptotics_check(
    gamma: f64,
    bc: BoundaryCase,
    k_lo: u32,
    k_hi: u32,
) -> Vec<BranchRow> {
    assert!((5..=60).contains(&k_lo) && k_lo <= k_hi && k_hi <= 60);
    (k_lo..=k_hi)
        .into_par_iter()
        .map(|k| {
            let root = find_eigen_near(c64::new(0.0, k as f64), gamma, bc, 1e-9);
            BranchRow {
                k,
                re: root.re,
                im: root.im,
                converged: root.converged,
                re_k2: root.re.abs() * (k as f64).powi(2),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lambda_minus_one_closed_form() {
        let gamma = 0.3;
        let r = roots_ab(c64::new(-1.0, 0.0), gamma);
        let q = (1.0 + gamma * gamma).powf(0.25);
        assert_relative_eq!(r.discriminant.re, 4.0 * (1.0 + gamma * gamma), epsilon = 1e-12);
        assert!((r.a - c64::new(q, 0.0)).norm() < 1e-12);
        assert!((r.b - c64::new(0.0, q)).norm() < 1e-12);
        for x in [r.a, -r.a, r.b, -r.b] {
            assert!(r.quartic_residual(x) < 1e-12);
        }
    }

    #[test]
    fn root_invariants_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..1000 {
            let radius = 10f64.powf(rng.gen_range(0.0..2.0));
            let angle = rng.gen_range(0.0..2.0 * PI);
            let lam = c64::from_polar(radius, angle);
            let r = roots_ab(lam, 0.05);
            let sum = r.a * r.a + r.b * r.b;
            let prod = r.a * r.a * r.b * r.b;
            let p = lam * (lam + 1.0);
            let q = lam * (lam * lam + 0.05 * 0.05);
            assert!((sum - p).norm() <= 1e-10 * p.norm().max(1.0));
            assert!((prod - q).norm() <= 1e-10 * q.norm().max(1.0));
            for x in [r.a, -r.a, r.b, -r.b] {
                assert!(r.quartic_residual(x) <= 1e-9);
            }
        }
    }

    #[test]
    fn asymptotic_rates_along_imaginary_axis() {
        // |b^2 - lambda| |lambda|, |a + b - lambda| / |lambda|^{1/2}, and
        // |a - b - lambda| / |lambda|^{1/2} stay bounded by 10.
        let mut t = 10.0;
        while t <= 1e4 {
            let lam = c64::new(0.0, t);
            let r = roots_ab(lam, 0.05);
            let b2 = (r.b * r.b - lam).norm() * lam.norm();
            let apb = (r.a + r.b - lam).norm() / lam.norm().sqrt();
            let amb = (r.a - r.b - lam).norm() / lam.norm().sqrt();
            assert!(b2 <= 10.0, "t={t}: {b2}");
            assert!(apb.min((r.a + r.b + lam).norm() / lam.norm().sqrt()) <= 10.0);
            assert!(amb.min((r.a - r.b + lam).norm() / lam.norm().sqrt()) <= 10.0);
            t *= 1.5;
        }
    }

    #[test]
    fn boundary_rows_match_displays() {
        let r = QuarticRoots {
            lambda: c64::new(0.0, 1.0),
            gamma: 0.05,
            a: c64::new(1.0, 0.0),
            b: c64::new(2.0, 0.0),
            discriminant: c64::new(0.0, 0.0),
        };
        let dd = boundary_matrix(&r, BoundaryCase::DD);
        for (got, want) in dd[2].iter().zip([1.0, 1.0, 4.0, 4.0]) {
            assert!((got - c64::new(want, 0.0)).norm() < 1e-14);
        }
        let dn = boundary_matrix(&r, BoundaryCase::DN);
        let l = r.l();
        let m = r.m();
        for (got, want) in dn[2].iter().zip([l, -l, m, -m]) {
            assert!((got - want).norm() < 1e-14);
        }
    }

    #[test]
    fn closed_form_zero_at_integer_modes() {
        // DD with a = 3i: the sinh factor vanishes.
        let r = QuarticRoots {
            lambda: c64::new(0.0, 2.0),
            gamma: 0.05,
            a: c64::new(0.0, 3.0),
            b: c64::new(1.0, 0.5),
            discriminant: c64::new(0.0, 0.0),
        };
        assert!(char_det_closed_scaled(&r, BoundaryCase::DD).norm() < 1e-12);
        assert!(char_det_closed_scaled(&r, BoundaryCase::NN).norm() < 1e-10);
    }

    #[test]
    fn direct_matches_closed_on_random_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for bc in BoundaryCase::ALL {
            for _ in 0..200 {
                let radius = 10f64.powf(rng.gen_range(0.0..50f64.log10()));
                let angle = rng.gen_range(0.0..2.0 * PI);
                let lam = c64::from_polar(radius, angle);
                let cd = char_det(lam, 0.05, bc);
                let scale = cd.det_direct.norm().max(cd.det_closed.norm());
                if scale < 1e-12 {
                    continue;
                }
                assert!(
                    (cd.det_direct - cd.det_closed).norm() <= 1e-6 * scale,
                    "{bc} lambda={lam}: {} vs {}",
                    cd.det_direct,
                    cd.det_closed
                );
            }
        }
    }

    #[test]
    fn nd_excluded_points_kill_lm() {
        for lam in [c64::new(0.0, 0.0), c64::new(0.0, 0.05), c64::new(0.0, -0.05)] {
            let r = roots_ab(lam, 0.05);
            assert!((r.l() * r.m()).norm() < 1e-10, "lambda={lam}");
        }
    }

    #[test]
    fn newton_finds_hyperbolic_root() {
        let root = find_eigen_near(c64::new(0.0, 10.0), 0.05, BoundaryCase::DD, 1e-9);
        assert!(root.converged);
        assert!((root.im - root.im.round()).abs() <= 0.05);
        assert!(root.re.abs() <= 1e-3);

        let nn = find_eigen_near(c64::new(0.0, 15.0), 0.05, BoundaryCase::NN, 1e-9);
        assert!(nn.converged && nn.re.abs() <= 1e-3);
    }

    #[test]
    fn newton_finds_parabolic_root() {
        let root = find_eigen_near(c64::new(-100.0, 0.0), 0.05, BoundaryCase::DD, 1e-9);
        assert!(root.converged);
        assert!(root.im.abs() < 1e-6);
        // Near -k^2 for some k in [9, 11].
        let k = (-root.re).sqrt();
        assert!((9.0..=11.0).contains(&(k.round())), "root {}", root.re);
        assert!((k - k.round()).abs() < 0.05);
    }

    #[test]
    fn branch_table_bounded() {
        let rows = branch_asymptotics_check(0.05, BoundaryCase::DD, 10, 20);
        assert!(rows.iter().all(|r| r.converged));
        let max = rows.iter().map(|r| r.re_k2).fold(0.0, f64::max);
        let min = rows.iter().map(|r| r.re_k2).fold(f64::INFINITY, f64::min);
        assert!(max / min <= 4.0, "ratio {}", max / min);
    }
}

//! Property-based checks of structural invariants across randomly drawn
//! models, cases, sizes, and coupling constants.

use proptest::prelude::*;
use thermoelastic::basis::build_basis;
use thermoelastic::dynamics::{integrate, modal_energy, project_initial, FieldSpec, InitialData, Scheme};
use thermoelastic::generator::build_generator_assembled;
use thermoelastic::model::{BoundaryCase, CouplingKind, CouplingModel};
use thermoelastic::spectral::eigenvalues;

fn kinds() -> impl Strategy<Value = CouplingKind> {
    prop_oneof![Just(CouplingKind::Strong), Just(CouplingKind::Weak)]
}

fn cases() -> impl Strategy<Value = BoundaryCase> {
    prop_oneof![
        Just(BoundaryCase::DD),
        Just(BoundaryCase::DN),
        Just(BoundaryCase::ND),
        Just(BoundaryCase::NN),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// The generator depends linearly on gamma: only the coupling blocks
    /// carry it, so A(g1) - A(g2) must equal ((g1-g2)/g3)(A(g3) - A(0+)).
    #[test]
    fn generator_is_affine_in_gamma(
        kind in kinds(),
        bc in cases(),
        n in 1usize..6,
        g1 in 0.01f64..10.0,
        g2 in 0.01f64..10.0,
    ) {
        let a1 = build_generator_assembled(&CouplingModel::new(kind, g1).unwrap(), bc, n).unwrap();
        let a2 = build_generator_assembled(&CouplingModel::new(kind, g2).unwrap(), bc, n).unwrap();
        let a0 = build_generator_assembled(
            &CouplingModel::with_gamma_unchecked(kind, 0.0), bc, n).unwrap();
        let lhs = &a1.entries - &a0.entries;
        let rhs = (g1 / g2) * (&a2.entries - &a0.entries);
        let diff = (&lhs - &rhs).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let scale = a1.entries.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(diff <= 1e-10 * scale.max(1.0), "max diff {diff}");
    }

    /// Real matrices have conjugation-symmetric spectra.
    #[test]
    fn spectrum_closed_under_conjugation(
        kind in kinds(),
        bc in cases(),
        n in 1usize..8,
        gamma in 0.01f64..2.0,
    ) {
        let a = build_generator_assembled(&CouplingModel::new(kind, gamma).unwrap(), bc, n).unwrap();
        let eigs = eigenvalues(&a).unwrap();
        for lam in &eigs {
            let d = eigs.iter().map(|m| (m - lam.conj()).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(d <= 1e-7 * (1.0 + lam.norm()), "conjugate of {lam} missing by {d}");
        }
    }

    /// The trapezoidal step never increases modal energy on a dissipative
    /// generator, for any admissible step size.
    #[test]
    fn trapezoidal_energy_never_grows(
        kind in kinds(),
        bc in cases(),
        n in 2usize..8,
        gamma in 0.01f64..2.0,
        dt in 0.01f64..1.0,
        j in 1u32..4,
    ) {
        let model = CouplingModel::new(kind, gamma).unwrap();
        let basis = build_basis(&model, bc, n).unwrap();
        let a = build_generator_assembled(&model, bc, n).unwrap();
        let data = InitialData { v0: FieldSpec::SineMode { j }, ..Default::default() };
        let y0 = project_initial(&data, &basis, &model, bc).unwrap();
        prop_assume!(modal_energy(&y0) > 0.0);
        let traj = integrate(&a, &y0, 10.0 * dt, dt, Scheme::TrapezoidalImplicit).unwrap();
        for w in traj.energy_modal.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12, "energy grew: {} -> {}", w[0], w[1]);
        }
    }

    /// Piecewise-constant velocity data: exact-antiderivative projection
    /// agrees with the basis-expansion energy, which can never exceed the
    /// datum's own L2 energy (Bessel).
    #[test]
    fn piecewise_projection_bessel_bound(
        brk in 0.3f64..2.8,
        v_left in -3.0f64..3.0,
        v_right in -3.0f64..3.0,
        n in 2usize..40,
    ) {
        let model = CouplingModel::new(CouplingKind::Weak, 0.05).unwrap();
        let basis = build_basis(&model, BoundaryCase::DD, n).unwrap();
        let data = InitialData {
            v0: FieldSpec::PiecewiseConstant { breaks: vec![brk], values: vec![v_left, v_right] },
            ..Default::default()
        };
        let y = project_initial(&data, &basis, &model, BoundaryCase::DD).unwrap();
        let datum_energy = 0.5 * (v_left * v_left * brk
            + v_right * v_right * (std::f64::consts::PI - brk));
        prop_assert!(modal_energy(&y) <= datum_energy + 1e-10,
            "projected energy {} exceeds datum energy {}", modal_energy(&y), datum_energy);
    }
}

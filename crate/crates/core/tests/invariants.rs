use std::f64::consts::PI;

use proptest::prelude::*;

use mzscatter::fringe::{phase_shift, FringeModel, Mode};
use mzscatter::physics::{LaserGeometry, Setup};
use mzscatter::scattering::{amplitudes_from_transfer, transfer_from_amplitudes, Channel};
use mzscatter::transfer::{compose_interferometer, laser_matrices, max_abs, reconstruct_wavefunction, single_laser_transfer};

prop_compose! {
    fn open_setup()(
        width in 2e-6f64..5e-5,
        log_kxl in 10f64.ln()..500f64.ln(),
        log_gap in 1e-4f64.ln()..0.1f64.ln(),
        area in 0.3f64..(2.0 * PI),
        frac in -0.9f64..1.5,
        phases in [-PI..PI, -PI..PI, -PI..PI],
    ) -> Setup {
        let mut s = Setup { geometry: LaserGeometry { width, gap: log_gap.exp() }, ..Setup::reference() }
            .with_kx_l(log_kxl.exp());
        s.omega = area / s.transit_time();
        s.with_delta(frac * s.omega).with_phases(phases)
    }
}

fn is_open(s: &Setup) -> bool {
    s.kinematics().is_ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn composed_system_conserves_flux(s in open_setup().prop_filter("open", is_open)) {
        let kin = s.kinematics().unwrap();
        let total = compose_interferometer(&s.geometry, &s.drive().unwrap(), &kin).unwrap();
        let set = amplitudes_from_transfer(&total).unwrap();
        prop_assert!((set.flux_balance(Channel::G, &kin) - 1.0).abs() < 1e-10);
        prop_assert!((set.flux_balance(Channel::E, &kin) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn conversions_are_mutual_inverses(s in open_setup().prop_filter("open", is_open), n in 0usize..3) {
        let kin = s.kinematics().unwrap();
        let (x1, x2) = s.geometry.span(n);
        let t = single_laser_transfer(x1, x2, s.phases[n], &kin).unwrap();
        let back = transfer_from_amplitudes(&amplitudes_from_transfer(&t).unwrap()).unwrap();
        prop_assert!(max_abs(&(back.matrix - t.matrix)) / max_abs(&t.matrix) < 1e-10);
    }

    #[test]
    fn flux_normalized_reciprocity(s in open_setup().prop_filter("open", is_open), n in 0usize..3) {
        let kin = s.kinematics().unwrap();
        let lasers = laser_matrices(&s.geometry, &s.drive().unwrap(), &kin).unwrap();
        let set = amplitudes_from_transfer(&lasers[n]).unwrap();
        let weight = |c: Channel| if c == Channel::G { 1.0 } else { kin.flux_weight() };
        for i in [Channel::G, Channel::E] {
            for j in [Channel::G, Channel::E] {
                let left = set.t_l[(i, j)].norm() * (weight(j) / weight(i)).sqrt();
                let right = set.t_r[(j, i)].norm() * (weight(i) / weight(j)).sqrt();
                prop_assert!((left - right).abs() < 1e-10, "{:?}{:?}: {} vs {}", i, j, left, right);
            }
        }
    }

    #[test]
    fn wavefunction_is_smooth(s in open_setup().prop_filter("open", is_open)) {
        let kin = s.kinematics().unwrap();
        let wf = reconstruct_wavefunction(&s.geometry, &s.drive().unwrap(), &kin).unwrap();
        prop_assert!(wf.matching_residual() < 1e-9);
    }

    #[test]
    fn probabilities_are_bounded_and_periodic(s in open_setup().prop_filter("open", is_open), phi in -PI..PI) {
        for mode in Mode::ALL {
            let model = FringeModel::new(&s, mode).unwrap();
            let p = model.probability(phi).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&p), "{} {}", mode, p);
            prop_assert!((model.probability(phi + 2.0 * PI).unwrap() - p).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn shift_methods_agree(kx_l in 20f64..500.0, eps in -0.3f64..0.3, frac in -0.2f64..0.2) {
        let s = Setup::reference().with_kx_l(kx_l).with_pulse_offset(eps);
        let s = s.with_delta(frac * s.omega);
        for mode in [Mode::QuantumMz, Mode::QuantumDirect] {
            let shift = phase_shift(&s, mode).unwrap();
            prop_assert!((shift.arg_ratio.unwrap() - shift.numeric).abs() < 1e-6, "{}: {:?}", mode, shift);
            prop_assert!(shift.delta_phi.abs() <= PI);
            prop_assert!((0.0..=1.0).contains(&shift.visibility));
        }
    }
}

use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use qmirror::coincidence::CoincidenceHistogram;
use qmirror::geometry::{sqm_image_distance, thin_lens_image, ScanAxis};
use qmirror::harness::parse_config;
use qmirror::kinematics::{check_coherence, emission_angles};
use qmirror::wavemix::{compare_with_ode, TwmParams};
use qmirror::{CrystalMedium, DispersionTable, Units};

fn medium(points: Vec<(f64, f64)>) -> CrystalMedium {
    CrystalMedium::new(DispersionTable::new(points).unwrap(), Complex64::new(0.0, 0.0), 1.0, Units::Natural).unwrap()
}

fn histogram(counts: &[u64]) -> CoincidenceHistogram {
    let scan = ScanAxis::symmetric(1.0, counts.len()).unwrap();
    let d1: Vec<u64> = counts.iter().map(|c| c + 5).collect();
    let d2: Vec<u64> = counts.iter().map(|c| c + 3).collect();
    CoincidenceHistogram::from_counts(scan, counts.to_vec(), d1, d2, counts.iter().sum::<u64>() + 100).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn coherence_is_phase_velocity_ordering(
        n0 in 1.3f64..2.0, n1 in 1.3f64..2.0, n2 in 1.3f64..2.0,
        wp in 0.1f64..3.0, wf in 0.1f64..3.0,
    ) {
        let m = medium(vec![(0.1, n0), (1.5, n1), (3.0, n2)]);
        let coherent = check_coherence(&m, wp, wf).unwrap();
        let vp = m.phase_velocity(wp).unwrap();
        let vf = m.phase_velocity(wf).unwrap();
        prop_assert_eq!(coherent, vf <= vp);
    }

    #[test]
    fn emission_angles_close_the_momentum_triangle(
        k_s in 0.1f64..3.0, k_i in 0.1f64..3.0, opening in 0.0f64..3.1f64,
    ) {
        // Build k_p as the resultant of k_s and k_i separated by `opening`.
        let k_p = (k_s * k_s + k_i * k_i + 2.0 * k_s * k_i * opening.cos()).sqrt();
        prop_assume!(k_p > 1e-3);
        let (tps, tpi) = emission_angles(k_p, k_s, k_i).unwrap();
        let x = k_s * tps.sin() - k_i * tpi.sin();
        let z = k_s * tps.cos() + k_i * tpi.cos();
        prop_assert!(x.abs() < 1e-9 * k_p);
        prop_assert!((z - k_p).abs() < 1e-9 * k_p);
    }

    #[test]
    fn thin_lens_is_an_involution(f in 0.05f64..2.0, ratio in 1.05f64..20.0) {
        let s = f * ratio;
        let image = thin_lens_image(s, f).unwrap();
        prop_assert!(image > 0.0);
        assert_relative_eq!(thin_lens_image(image, f).unwrap(), s, max_relative = 1e-10);
    }

    #[test]
    fn degenerate_quantum_mirror_is_a_classical_mirror(
        radius in 0.2f64..5.0, ratio in 0.1f64..10.0, omega in 0.1f64..10.0,
    ) {
        let z_s = radius * ratio;
        prop_assume!((z_s - radius / 2.0).abs() > 1e-3 * radius);
        let im = sqm_image_distance(z_s, omega, omega, radius, 0.0).unwrap();
        let classical = thin_lens_image(z_s, radius / 2.0).unwrap();
        assert_relative_eq!(im.distance, classical, max_relative = 1e-12);
    }

    #[test]
    fn twm_closed_form_matches_integrator(
        g_abs in 0.05f64..3.0, phase in -std::f64::consts::PI..std::f64::consts::PI, dk in 0.0f64..20.0, length in 0.2f64..2.0,
    ) {
        let p = TwmParams::new(Complex64::from_polar(g_abs / length, phase), dk / length, length);
        let row = compare_with_ode(&p).unwrap();
        prop_assert!(row.ode_rel_err < 1e-6, "rel err {}", row.ode_rel_err);
        prop_assert!(row.manley_rowe_drift < 1e-9, "drift {}", row.manley_rowe_drift);
    }

    #[test]
    fn histogram_merge_is_associative_and_commutative(
        a in prop::collection::vec(0u64..1000, 8),
        b in prop::collection::vec(0u64..1000, 8),
        c in prop::collection::vec(0u64..1000, 8),
    ) {
        let (ha, hb, hc) = (histogram(&a), histogram(&b), histogram(&c));
        let mut left = ha.clone();
        left.merge(&hb).unwrap();
        left.merge(&hc).unwrap();
        let mut bc = hb.clone();
        bc.merge(&hc).unwrap();
        let mut right = bc;
        right.merge(&ha).unwrap();
        prop_assert_eq!(&left, &right);
        prop_assert!(left.check_invariants().is_ok());
    }

    #[test]
    fn config_round_trips_through_toml(
        seed in any::<u64>(), trials in 1u64..10_000_000, waist in 1e-3f64..0.1, shards in 1usize..16,
    ) {
        let text = format!(
            "kind = \"ghost-diffract\"\nseed = {seed}\n\
             [source]\npump_wavelength = 351e-9\nsigma_theta = 0.02\npump_waist = {waist:e}\n\
             [monte_carlo]\ntrials = {trials}\nshards = {shards}\n\
             [[layout.element]]\ntype = \"mask\"\nposition = 0.0\nmask = {{ pitch = 4e-4, cells = [1.0] }}\n\
             [[layout.element]]\ntype = \"mirror\"\nposition = 0.5\nkind = \"planar\"\npump_omega = 5.36658e15\n\
             [[layout.element]]\ntype = \"detector\"\nposition = 1.0\nscan = {{ min = -4e-3, max = 4e-3, bins = 51 }}\n"
        );
        let cfg = parse_config(&text).unwrap();
        let again = parse_config(&cfg.to_toml_string()).unwrap();
        prop_assert_eq!(cfg, again);
    }
}

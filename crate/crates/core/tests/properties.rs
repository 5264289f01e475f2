use std::collections::HashMap;

use emimo::corrupt::{classify_precoder, corrupt_statistics, DifferenceSpectrum};
use emimo::detection::{exhaustive_list, ml_detect, sphere_list, DetectionProblem};
use emimo::harness::{convert_snr, Experiment, ExperimentConfig, Manifest, Scheme};
use emimo::information::{mutual_information, MiConfig, PointCloud};
use emimo::ldpc::{build_code, decode_sum_product, parse_alist, realize, write_alist, Construction, DegreeDistributions, Interleaver};
use emimo::linalg::CMatrix;
use emimo::modulation::{build_qam, build_vector_alphabet};
use emimo::precoding::{make_schedule, precode, ScheduleKind};
use emimo::randmat::{effective_map, sample_channel, sample_haar_unitary};
use emimo::rng::{complex_normal, SeedStream};
use emimo::toy::{toy_mutual_information, ToyChannel};
use num_complex::Complex64;
use proptest::prelude::*;

fn qam_order() -> impl Strategy<Value = usize> {
    prop_oneof![Just(2usize), Just(4), Just(16), Just(64)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn haar_samples_are_unitary(n in 1usize..5, seed: u64) {
        let u = sample_haar_unitary(n, &mut SeedStream::new(seed).rng()).unwrap();
        prop_assert!(u.unitarity_deviation() < 1e-12);
    }

    #[test]
    fn haar_maps_distinct_vectors_apart(n in 1usize..5, seed: u64) {
        let mut rng = SeedStream::new(seed).rng();
        let u = sample_haar_unitary(n, &mut rng).unwrap();
        let b1: Vec<Complex64> = (0..n).map(|_| complex_normal(&mut rng)).collect();
        let b2: Vec<Complex64> = (0..n).map(|_| complex_normal(&mut rng)).collect();
        let sep = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(sep(&u.mul_vec(&b1), &u.mul_vec(&b2)) > 1e-12 * sep(&b1, &b2));
    }

    #[test]
    fn channel_decomposition_holds(n_t in 1usize..4, n_r in 1usize..4, seed: u64) {
        let ch = sample_channel(n_t, n_r, &mut SeedStream::new(seed).rng()).unwrap();
        prop_assert!(ch.reconstruction_error() < 1e-10);
        prop_assert!(ch.v.unitarity_deviation() < 1e-10);
        prop_assert_eq!(ch.sigma.len(), n_t.min(n_r));
        prop_assert!(ch.sigma.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(ch.sigma.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn bits_round_trip(m in qam_order(), n_t in 1usize..3, pick: u64) {
        let a = build_vector_alphabet(build_qam(m).unwrap(), n_t, n_t).unwrap();
        let idx = (pick % a.len() as u64) as usize;
        prop_assert_eq!(a.index_of_bits(&a.bits_of_index(idx)).unwrap(), idx);
    }

    #[test]
    fn alphabet_energy_is_n_t(m in qam_order(), n_t in 1usize..4) {
        let a = build_vector_alphabet(build_qam(m).unwrap(), n_t, n_t).unwrap();
        prop_assert!((a.average_energy() - n_t as f64).abs() < 1e-9);
    }

    #[test]
    fn schedules_are_unitary_and_preserve_energy(n_t in 1usize..4, segments in 1usize..12, n_c in 1usize..40, seed: u64, pick: u64) {
        let a = build_vector_alphabet(build_qam(4).unwrap(), n_t, n_t).unwrap();
        for kind in [ScheduleKind::Identity, ScheduleKind::FixedRandom, ScheduleKind::EmiN(segments.min(n_c)), ScheduleKind::Emi] {
            let s = make_schedule(kind, n_t, n_c, SeedStream::new(seed)).unwrap();
            let t = (pick % n_c as u64) as usize;
            prop_assert!(s.matrix(t).unwrap().unitarity_deviation() < 1e-12);
            let z = a.vector((pick % a.len() as u64) as usize);
            let x = precode(&s, t, z).unwrap();
            let e = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>();
            prop_assert!((e(&x) - e(z)).abs() < 1e-12);
        }
    }

    #[test]
    fn full_capacity_list_is_the_sorted_alphabet(m in prop_oneof![Just(4usize), Just(16)], seed: u64, cap_extra in 0usize..4) {
        let a = build_vector_alphabet(build_qam(m).unwrap(), 2, 2).unwrap();
        let mut rng = SeedStream::new(seed).rng();
        let h = CMatrix::from_fn(2, 2, |_, _| complex_normal(&mut rng));
        let y: Vec<Complex64> = (0..2).map(|_| complex_normal(&mut rng).scale(3.0)).collect();
        let p = DetectionProblem::new(&y, &h, &a).unwrap();
        prop_assert_eq!(sphere_list(&p, a.len() + cap_extra), exhaustive_list(&p));
    }

    #[test]
    fn truncated_list_is_the_smallest_metrics(seed: u64, cap in 1usize..64) {
        let a = build_vector_alphabet(build_qam(16).unwrap(), 2, 2).unwrap();
        let mut rng = SeedStream::new(seed).rng();
        let h = CMatrix::from_fn(2, 2, |_, _| complex_normal(&mut rng));
        let y: Vec<Complex64> = (0..2).map(|_| complex_normal(&mut rng).scale(3.0)).collect();
        let p = DetectionProblem::new(&y, &h, &a).unwrap();
        let full = exhaustive_list(&p);
        let list = sphere_list(&p, cap);
        prop_assert_eq!(list.entries.len(), cap);
        for (got, want) in list.entries.iter().zip(&full.entries) {
            prop_assert!((got.1 - want.1).abs() <= 1e-9 * want.1.max(1.0));
        }
    }

    #[test]
    fn ml_detection_ignores_common_scaling(seed: u64, c in 0.01f64..100.0) {
        let a = build_vector_alphabet(build_qam(16).unwrap(), 2, 2).unwrap();
        let mut rng = SeedStream::new(seed).rng();
        let h = CMatrix::from_fn(2, 2, |_, _| complex_normal(&mut rng));
        let y: Vec<Complex64> = (0..2).map(|_| complex_normal(&mut rng).scale(2.0)).collect();
        let ys: Vec<Complex64> = y.iter().map(|v| v * c).collect();
        let hs = h.scale(c);
        let p = DetectionProblem::new(&y, &h, &a).unwrap();
        let q = DetectionProblem::new(&ys, &hs, &a).unwrap();
        prop_assert_eq!(ml_detect(&p).unwrap(), ml_detect(&q).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mutual_information_stays_in_range(m in prop_oneof![Just(2usize), Just(4)], log_gamma in -4.0f64..6.0, seed: u64) {
        let a = build_vector_alphabet(build_qam(m).unwrap(), 2, 2).unwrap();
        let mut rng = SeedStream::new(seed).rng();
        let ch = sample_channel(2, 2, &mut rng).unwrap();
        let v = sample_haar_unitary(2, &mut rng).unwrap();
        let cfg = MiConfig { noise_samples: 16, sphere_capacity: 0, seed };
        let mi = mutual_information(&ch.sigma, &v, &a, 10f64.powf(log_gamma), &cfg).unwrap();
        prop_assert!(mi >= -1e-6 && mi <= a.bits() as f64 + 1e-6, "{}", mi);
    }

    #[test]
    fn mutual_information_ignores_alphabet_order(seed: u64, gamma in 0.5f64..50.0) {
        let a = build_vector_alphabet(build_qam(4).unwrap(), 2, 2).unwrap();
        let mut rng = SeedStream::new(seed).rng();
        let v = sample_haar_unitary(2, &mut rng).unwrap();
        let h = effective_map(&[1.2, 0.5], &v, gamma);
        let cloud = PointCloud::from_map(&h, &a).unwrap();
        let mut order: Vec<usize> = (0..cloud.len()).collect();
        order.reverse();
        order.rotate_left((seed % 16) as usize);
        let coords: Vec<f64> = order.iter().flat_map(|&k| cloud.point(k).to_vec()).collect();
        let shuffled = PointCloud::new(cloud.dim(), coords).unwrap();
        let bank = emimo::information::NoiseBank::new(cloud.dim(), 16, SeedStream::new(seed ^ 1));
        let d = cloud.mutual_information(&bank).unwrap() - shuffled.mutual_information(&bank).unwrap();
        prop_assert!(d.abs() < 1e-10, "{}", d);
    }

    #[test]
    fn sigma_and_gamma_trade_exactly(seed: u64, c in 0.1f64..10.0, gamma in 0.5f64..100.0) {
        let a = build_vector_alphabet(build_qam(4).unwrap(), 2, 2).unwrap();
        let mut rng = SeedStream::new(seed).rng();
        let ch = sample_channel(2, 2, &mut rng).unwrap();
        let v = sample_haar_unitary(2, &mut rng).unwrap();
        let cfg = MiConfig { noise_samples: 16, sphere_capacity: 0, seed };
        let scaled: Vec<f64> = ch.sigma.iter().map(|s| s * c).collect();
        let base = mutual_information(&ch.sigma, &v, &a, gamma, &cfg).unwrap();
        let other = mutual_information(&scaled, &v, &a, gamma / (c * c), &cfg).unwrap();
        prop_assert!((base - other).abs() < 1e-9);
    }

    #[test]
    fn toy_mi_quarter_turn_symmetry(b1 in 0.05f64..3.0, b2 in 0.05f64..3.0, theta in 0.0f64..1.5, gamma in 1.0f64..100.0) {
        let cfg = MiConfig { noise_samples: 64, sphere_capacity: 0, seed: 5 };
        let base = toy_mutual_information(&ToyChannel::new([b1, b2], theta, gamma).unwrap(), &cfg).unwrap();
        let turned = toy_mutual_information(&ToyChannel::new([b1, b2], theta + std::f64::consts::FRAC_PI_2, gamma).unwrap(), &cfg).unwrap();
        prop_assert!((base - turned).abs() < 1e-9);
    }

    #[test]
    fn no_haar_precoder_zeroes_a_difference(n_t in 2usize..4, seed: u64) {
        let a = build_vector_alphabet(build_qam(4).unwrap(), n_t, n_t).unwrap();
        let spectrum = DifferenceSpectrum::new(&a);
        let v = sample_haar_unitary(n_t, &mut SeedStream::new(seed).rng()).unwrap();
        let st = corrupt_statistics(&v, &spectrum, n_t).unwrap();
        prop_assert!(st.all_components > 1e-9);
    }

    #[test]
    fn bad_rotations_are_in_s_c3(k in 0u32..8, seed: u64) {
        let a = build_vector_alphabet(build_qam(4).unwrap(), 2, 2).unwrap();
        let theta = k as f64 * std::f64::consts::FRAC_PI_4;
        let s = make_schedule(ScheduleKind::ToyRotation(theta), 2, 1, SeedStream::new(seed)).unwrap();
        let verdict = classify_precoder(&s.matrix(0).unwrap(), &a, 2, 1e6, 2.0, 1e-9).unwrap();
        prop_assert!(verdict.is_bad);
        prop_assert!(verdict.in_s_c3);
    }

    #[test]
    fn interleaver_inverse_composes_to_identity(n in 1usize..2000, seed: u64) {
        let il = Interleaver::new(n, seed);
        let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
        prop_assert_eq!(il.invert(&il.apply(&x)), x);
    }

    #[test]
    fn degree_sequences_track_the_distribution(
        dv in prop::collection::btree_map(2usize..12, 0.05f64..1.0, 1..4),
        dc in 4usize..20,
        n in 200usize..2000,
    ) {
        let total: f64 = dv.values().sum();
        let lambda: Vec<(usize, f64)> = dv.iter().map(|(&d, &w)| (d, w / total)).collect();
        let dd = DegreeDistributions::new(&lambda, &[(dc, 1.0)]).unwrap();
        let seq = realize(&dd, n).unwrap();
        prop_assert_eq!(seq.var_degrees.len(), n);
        prop_assert_eq!(seq.var_degrees.iter().sum::<usize>(), seq.check_degrees.iter().sum::<usize>());
        let norm: f64 = lambda.iter().map(|(d, w)| w / *d as f64).sum();
        let mut counts: HashMap<usize, usize> = HashMap::new();
        for &d in &seq.var_degrees {
            *counts.entry(d).or_default() += 1;
        }
        for (d, w) in &lambda {
            let target = n as f64 * (w / *d as f64) / norm;
            let got = counts.get(d).copied().unwrap_or(0) as f64;
            prop_assert!((got - target).abs() < 1.0 + 1e-9, "degree {}: {} vs {}", d, got, target);
        }
        prop_assert!(seq.check_degrees.iter().filter(|&&d| d != dc).count() <= 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn codes_encode_decode_and_round_trip(seed: u64, info_seed: u64) {
        let code = build_code(240, &DegreeDistributions::regular(3, 6).unwrap(), seed, Construction::Peg).unwrap();
        let mut rng = SeedStream::new(info_seed).rng();
        let info: Vec<u8> = (0..code.k()).map(|_| rand::Rng::random::<bool>(&mut rng) as u8).collect();
        let c = code.encode(&info).unwrap();
        prop_assert!(code.graph.is_codeword(&c));
        prop_assert_eq!(code.encoder.extract(&c), info);
        // decoding a codeword's own sign pattern returns it
        let llr: Vec<f64> = c.iter().map(|&b| if b == 0 { 2.0 } else { -2.0 }).collect();
        let out = decode_sum_product(&code.graph, &llr, 20).unwrap();
        prop_assert!(out.converged);
        prop_assert_eq!(out.bits, c);
        prop_assert_eq!(parse_alist(&write_alist(&code.graph)).unwrap(), code.graph);
    }

    #[test]
    fn scheme_display_round_trips(n in 1usize..10_000, deg in -720.0f64..720.0) {
        for s in [Scheme::EmiN(n), Scheme::Rotation(deg)] {
            prop_assert_eq!(s.to_string().parse::<Scheme>().unwrap(), s);
        }
    }

    #[test]
    fn snr_conversion_is_linear(db in -10.0f64..40.0, rate in 0.1f64..10.0, n_t in 1usize..5, n_r in 1usize..5) {
        let g = convert_snr(db, rate, n_t, n_r).unwrap();
        let g10 = convert_snr(db + 10.0, rate, n_t, n_r).unwrap();
        prop_assert!((g10 / g - 10.0).abs() < 1e-9);
        prop_assert!((g * (n_t * n_r) as f64 / rate - 10f64.powf(db / 10.0)).abs() < 1e-9 * g.max(1.0) * (n_t * n_r) as f64);
    }

    #[test]
    fn manifests_round_trip(seed: u64, n_trials in 1u64..1_000_000, workers in 0usize..16, start in -5.0f64..20.0, steps in 1usize..6) {
        let config = ExperimentConfig {
            seed,
            n_trials,
            workers,
            snr_grid: (0..steps).map(|i| start + 1.5 * i as f64).collect(),
            ..ExperimentConfig::for_experiment(Experiment::Outage)
        };
        let m = Manifest { config, version: "0.1.0".into(), rows: steps };
        let back = Manifest::from_json(&serde_json::to_string(&m).unwrap()).unwrap();
        prop_assert_eq!(back, m);
    }
}

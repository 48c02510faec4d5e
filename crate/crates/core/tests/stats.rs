use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use safeprime_prng::stats::kernels::*;
use safeprime_prng::stats::special::{ad_inf_sf, chi2_sf, erfc, kolmogorov_sf};
use safeprime_prng::stats::*;
use safeprime_prng::Execution;

const V128: &str = "ad7140d92cc291348bae6b90ba3dede2";
const V640: &str = "e4ec67bd4f7efe09cf6de88e6fa53cf68b9af76aef24ae2f26ff3d69cbf446505ac1100686b7f3a851c972bc5ba1164fa21107d454aba6bd82073a29974e4f8a7b48b9a9ceae829026479f2fc4a7ce3a";
const V1024: &str = "61bea6fc1c65cfd83733a5be55ecf37db3cffe4a130bf2ebf6d01edf336750519197c51a6c06fce4c193892d437bc8f5c923752d5083da7a6726f84aa06005c595680290a0094d0eca0f56c580d47336a92e5eeef9a69640506f7b79b481e5557282c160d72e90b4b30d774d0f585d4e3c8b3e5e453454306eb3db347161a1ad";

fn bits(h: &str) -> BitSeq {
    BitSeq::from_bytes(&hex::decode(h).unwrap())
}

fn close(got: f64, want: f64, rel: f64) {
    assert!((got - want).abs() <= rel * want.abs(), "got {got:e}, want {want:e}");
}

fn chacha_bits(seed: u64, n: usize) -> BitSeq {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut bytes = vec![0u8; n / 8];
    rng.fill_bytes(&mut bytes);
    BitSeq::from_bytes(&bytes)
}

#[test]
fn erfc_table() {
    let table = [
        (0.5, 0.47950012218695348),
        (1.0, 0.15729920705028513),
        (std::f64::consts::SQRT_2, 0.045500263896358396),
        (2.0, 0.0046777349810472662),
        (3.0, 2.2090496998585441e-5),
        (5.0, 1.5374597944280349e-12),
        (10.0, 2.0884875837625449e-45),
    ];
    for (x, want) in table {
        close(erfc(x), want, 1e-13);
    }
}

#[test]
fn kolmogorov_table() {
    let table = [
        (0.5, 0.9639452436648751),
        (0.8, 0.5441424115741981),
        (1.0, 0.26999967167735456),
        (1.2, 0.11224966667072497),
        (2.0, 0.0006709252557796953),
    ];
    for (l, want) in table {
        close(kolmogorov_sf(l), want, 1e-10);
    }
}

#[test]
fn chi2_table() {
    close(chi2_sf(30.0, 9.0), 0.00043872177097947936, 1e-10);
}

#[test]
fn anderson_darling_table() {
    let series = [
        (0.5, 0.74681437353034448),
        (1.0, 0.35726667321401909),
        (1.933, 0.099994623208223499),
        (2.492, 0.050022186359607866),
        (3.0, 0.027364788334026359),
        (3.857, 0.01024115322986121),
        (5.0, 0.0028744213045860724),
        (7.0, 0.0003301668020420604),
        (7.9, 0.00012655723321100797),
    ];
    for (z, want) in series {
        close(ad_inf_sf(z), want, 1e-9);
    }
    let tail = [
        (12.0, 1.71028699932212e-6),
        (14.0, 2.14632917570451e-7),
        (20.0, 4.46507153831192e-10),
        (30.0, 1.65954895277832e-14),
        (40.0, 6.53412644147596e-19),
    ];
    for (z, want) in tail {
        close(ad_inf_sf(z), want, 1e-5);
    }
}

#[test]
fn kernel_oracles() {
    let v = bits(V128);
    assert_eq!(v.len(), 128);
    close(monobit(&v).unwrap(), 0.8596837951986662, 1e-12);
    assert_eq!(1 + v.lag_xor_count(1), 72);
    close(runs_test(&v).unwrap(), 0.15638888651764196, 1e-12);
    assert_eq!(v.lag_xor_count(1), 71);
    close(autocorrelation(&v, 1).unwrap(), 0.18317757236168963, 1e-12);

    let v = bits(V640);
    assert_eq!(v.block_weights(32).len(), 20);
    close(hamming_weight_blocks(&v, 32).unwrap(), 0.13613256174819288, 1e-10);

    let v = bits(V1024);
    close(hamming_correlation(&v, 32).unwrap(), 0.16010537883984977, 1e-10);
    close(hamming_weight_blocks(&v, 32).unwrap(), 0.9268500495928548, 1e-10);
    assert_eq!(v.lag_xor_count(3), 484);
    close(autocorrelation(&v, 3).unwrap(), 0.0971799909294056, 1e-12);
}

#[test]
fn degenerate_streams() {
    let zeros = BitSeq::from_bools(std::iter::repeat(false).take(100));
    assert!(monobit(&zeros).unwrap() < 1e-20);
    assert!(matches!(runs_test(&zeros), Err(StatsError::Prerequisite(_))));
    let sixty = BitSeq::from_bools((0..100).map(|i| i < 60));
    close(monobit(&sixty).unwrap(), 0.0455002638963584, 1e-12);
    let balanced = BitSeq::from_bools((0..200).map(|i| i % 2 == 0));
    assert_eq!(monobit(&balanced).unwrap(), 1.0);
    let alternating = BitSeq::from_bools((0..1000).map(|i| i % 2 == 1));
    assert!(runs_test(&alternating).unwrap() < 1e-10);
    assert!(matches!(monobit(&BitSeq::from_bools([true; 99])), Err(StatsError::InsufficientData { .. })));

    for d in [3usize, 8] {
        let periodic = BitSeq::from_bools((0..1000).map(|i| i % d == 0));
        assert_eq!(periodic.lag_xor_count(d), 0);
        assert!(autocorrelation(&periodic, d).unwrap() < 1e-10);
    }
    let anti = BitSeq::from_bools((0..1000).map(|i| (i / 2) % 2 == 0));
    assert_eq!(anti.lag_xor_count(2), 998);
    assert!(autocorrelation(&anti, 2).unwrap() < 1e-10);
    assert!(matches!(autocorrelation(&anti, 1000), Err(StatsError::Domain(_))));
    assert!(matches!(autocorrelation(&anti, 0), Err(StatsError::Domain(_))));

    let full = BitSeq::from_bools(std::iter::repeat(true).take(32 * 40));
    assert!(hamming_weight_blocks(&full, 32).unwrap() < 1e-10);
    assert!(matches!(hamming_weight_blocks(&full, 65), Err(StatsError::Domain(_))));
    assert!(matches!(hamming_correlation(&full, 32), Err(StatsError::Undefined(_))));
    let seesaw = BitSeq::from_bools((0..32 * 64).map(|i| (i / 32) % 2 == 0 || (i % 32) < 8));
    assert!(hamming_correlation(&seesaw, 32).unwrap() < 1e-10);
}

#[test]
fn exact_binomial_histogram() {
    // 160 blocks of 4 bits in the exact proportions 1:4:6:4:1.
    assert_eq!(weight_chi2(&[10, 40, 60, 40, 10], 4).unwrap(), 1.0);
    let probs = binomial_half(4);
    close(probs[2], 6.0 / 16.0, 1e-15);
    assert_eq!(pooled_cells(&probs, 160), vec![0, 1, 2, 3, 4]);
    // Tails pool once expected counts drop below five.
    assert_eq!(pooled_cells(&probs, 40), vec![0, 2, 3]);
}

#[test]
fn pass_ratio_rules() {
    let ok = vec![0.5; 1000];
    let r = pass_ratio(&ok, 0.001).unwrap();
    assert_eq!((r.ratio, r.passed), (1.0, true));
    let mut one_bad = ok.clone();
    one_bad[17] = 0.0001;
    let r = pass_ratio(&one_bad, 0.001).unwrap();
    assert_eq!((r.passes, r.ratio, r.passed), (999, 0.999, false));
    assert!(matches!(pass_ratio(&[], 0.001), Err(StatsError::Empty)));
}

#[test]
fn uniformity_examples() {
    let grid: Vec<f64> = (0..10).map(|i| 0.05 + 0.1 * i as f64).collect();
    let u = uniformity_tests(&grid).unwrap();
    assert!(u.chi2 > 0.999999);
    let flat = vec![0.5; 50];
    assert!(uniformity_tests(&flat).unwrap().ks < 1e-6);
    assert!(uniformity_tests(&grid[..9]).is_err());
    let mut rng = ChaCha20Rng::seed_from_u64(1000);
    let sample: Vec<f64> = (0..1000).map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64).collect();
    let u = uniformity_tests(&sample).unwrap();
    assert!(u.accepted(0.01), "{u:?}");
}

#[test]
fn verdict_boundaries() {
    assert_eq!(Verdict::classify(1e-10, 0.001), Verdict::Failure);
    assert_eq!(Verdict::classify(2e-10, 0.001), Verdict::Suspicious);
    assert_eq!(Verdict::classify(0.001, 0.001), Verdict::Pass);
    assert_eq!(Verdict::classify(f64::NAN, 0.001), Verdict::Failure);
    assert_eq!(Verdict::classify_tail(1.0 - 1e-10, 0.001, Tail::Both), Verdict::Failure);
    assert_eq!(Verdict::classify_tail(0.9995, 0.001, Tail::Both), Verdict::Suspicious);
    assert_eq!(Verdict::classify_tail(0.9995, 0.001, Tail::Lower), Verdict::Pass);
}

#[test]
fn null_p_values_are_uniform() {
    let config = BatteryConfig::default();
    let kernels = config.kernels();
    let streams: Vec<BitSeq> = (0..500).map(|s| chacha_bits(0x5eed_0000 + s, 1 << 16)).collect();
    for kernel in &kernels {
        let ps: Vec<f64> = streams.iter().filter_map(|b| kernel.evaluate(b).ok()).collect();
        assert!(ps.len() >= 490, "{}: {} usable", kernel.id(), ps.len());
        let d = ks_statistic_of(&ps);
        let p = safeprime_prng::stats::special::ks_sf(d, ps.len());
        assert!(p >= 0.001, "{}: KS p = {p}", kernel.id());
    }
}

fn ks_statistic_of(ps: &[f64]) -> f64 {
    safeprime_prng::stats::uniformity::ks_statistic(ps)
}

#[test]
fn counter_stream_fails() {
    let config = BatteryConfig::default();
    let mut seq = BitSeq::new();
    let mut i = 0u64;
    while seq.len() < config.min_stream_bits() {
        seq.push_word(i & 0xffff_ffff, 32);
        i += 1;
    }
    let report = run_battery(&seq, &config).unwrap();
    assert!(report.failed_tests().len() >= 3, "{:?}", report.failed_tests());
    assert!(!report.passed());
}

#[test]
fn battery_on_reference_stream() {
    let config = BatteryConfig::default();
    let seq = chacha_bits(42, config.min_stream_bits());
    let report = run_battery(&seq, &config).unwrap();
    assert_eq!(report.results.len(), 9 * 64);
    assert_eq!(report.failures(), 0);
    let sequential = run_battery(&seq, &BatteryConfig { exec: Execution::Sequential, ..config.clone() }).unwrap();
    assert_eq!(report, sequential);
    let text = report.to_text();
    assert_eq!(TestReport::parse(&text).unwrap(), report);
    assert!(text.starts_with("#BATTERY\t"));
    let too_short = chacha_bits(1, config.min_stream_bits() - 8);
    assert!(matches!(run_battery(&too_short, &config), Err(StatsError::InsufficientData { .. })));
}

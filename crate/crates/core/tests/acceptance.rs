//! Exit criteria. Every test prints one `[PASS]`/`[FAIL]` line; run with
//! `cargo test -p stia-core --test acceptance -- --nocapture` to see them.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use num_rational::Ratio;
use stia_core::analysis::{
    baseline_zf_mat, baseline_zf_tdma, estimate_dof_slope, tradeoff_k3, SimScheme, SimulationSetup,
};
use stia_core::channel::{coherence_time_estimate, kmh_to_mps, DelayConfig, FadingProcess};
use stia_core::numerics::{self, DEFAULT_RANK_TOL, SINGULAR_CONDITION_LIMIT};
use stia_core::precoding::PrecoderSet;
use stia_core::protocol::{self, PowerPolicy, RoundChannels, RoundConfig, SymbolBlock};
use stia_core::rng::{derive_seed, stream_rng};
use stia_core::scheduler::{account_dof, build_plan_general, build_plan_k3, StiaRound};
use stia_core::{Error, Fraction};

const SEED: u64 = 20_240_101;
const ROUNDS_PER_K: usize = 1000;
const USERS: [usize; 4] = [3, 4, 5, 6];

fn report(id: &str, passed: bool, detail: impl AsRef<str>) {
    println!("[{}] {id}: {}", if passed { "PASS" } else { "FAIL" }, detail.as_ref());
}

fn frac(n: i64, d: i64) -> Fraction {
    Ratio::new(n, d)
}

struct Round {
    channels: RoundChannels,
    precoders: Vec<PrecoderSet>,
}

/// Random rounds laid out like round 1 of the `K`-user plan; ill-conditioned
/// draws are redrawn and counted.
fn random_rounds(users: usize, count: usize, salt: u64) -> (Vec<Round>, u64) {
    let plan = build_plan_general(users, 1).unwrap();
    let geometry = &plan.stia_rounds[0];
    let mut resamples = 0;
    let rounds = (0..count as u64)
        .map(|i| {
            for attempt in 0.. {
                let p = FadingProcess::new(users, users - 1, users as u64, derive_seed(SEED, &[salt, users as u64, i, attempt]))
                    .unwrap();
                let channels = RoundChannels {
                    reference_slot: geometry.reference_slot,
                    reference: p.channels_at(geometry.reference_slot).to_vec(),
                    phase_two_slots: geometry.phase_two_slots.clone(),
                    phase_two: geometry.phase_two_slots.iter().map(|&s| p.channels_at(s).to_vec()).collect(),
                };
                match protocol::round_precoders(&channels) {
                    Ok(precoders) => return Round { channels, precoders },
                    Err(Error::IllConditionedChannel { .. }) => resamples += 1,
                    Err(e) => panic!("{e}"),
                }
            }
            unreachable!()
        })
        .collect();
    (rounds, resamples)
}

/// Coefficient that user `k` sees on interferer `i`'s symbol `q` after
/// subtracting the reference slot, relative to `||h^(k)[ref]||_inf`. Written
/// out term by term.
fn leakage(round: &Round, k: usize) -> f64 {
    let users = round.channels.users();
    let h_ref = &round.channels.reference[k - 1].entries;
    let scale = h_ref.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut worst = 0.0f64;
    for (now, set) in round.channels.phase_two.iter().zip(&round.precoders) {
        let h_now = &now[k - 1].entries;
        for i in (1..=users).filter(|&i| i != k) {
            let v = set.for_user(i);
            for q in 0..users - 1 {
                let mut coeff = Complex64::new(0.0, 0.0);
                for a in 0..users - 1 {
                    coeff += h_now[a] * v[(a, q)];
                }
                worst = worst.max((coeff - h_ref[q]).norm() / scale);
            }
        }
    }
    worst
}

#[test]
fn ac1_alignment_exactness() {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for users in USERS {
        let (rounds, resamples) = random_rounds(users, ROUNDS_PER_K, 1);
        let worst = rounds
            .iter()
            .flat_map(|r| (1..=users).map(move |k| leakage(r, k)))
            .fold(0.0, f64::max);
        ok &= worst <= 1e-9;
        parts.push(format!("K={users}: max leakage {worst:.2e} ({resamples} resampled)"));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(10);
    report("AC1 alignment", ok, format!("{}; {:.2?}", parts.join(", "), elapsed));
    assert!(ok);
}

#[test]
fn ac2_noise_free_decoding() {
    let mut ok = true;
    let mut parts = Vec::new();
    for users in USERS {
        let (rounds, _) = random_rounds(users, ROUNDS_PER_K, 2);
        let mut worst = 0.0f64;
        let mut delivered = 0;
        for (i, r) in rounds.iter().enumerate() {
            let mut rng = stream_rng(derive_seed(SEED, &[2, users as u64, i as u64]), 0);
            let s = SymbolBlock::random_gaussian(users, &mut rng);
            let out = protocol::run_stia_round_with(&r.channels, &r.precoders, &s, RoundConfig::noise_free(), &mut rng)
                .expect("noise-free round decodes");
            assert_eq!(out.symbols_delivered, users * (users - 1));
            assert_eq!(out.slots_used, users);
            delivered += out.symbols_delivered;
            for (got, want) in out.decoded.per_user.iter().zip(&s.per_user) {
                for (a, b) in got.iter().zip(want) {
                    worst = worst.max((a - b).norm() / b.norm().max(1.0));
                }
            }
        }
        ok &= worst <= 1e-8 && delivered == ROUNDS_PER_K * users * (users - 1);
        parts.push(format!("K={users}: {delivered} symbols, max error {worst:.2e}"));
    }
    report("AC2 decoding", ok, parts.join(", "));
    assert!(ok);
}

#[test]
fn ac3_effective_channel_rank() {
    let mut ok = true;
    let mut parts = Vec::new();
    for users in USERS {
        let (rounds, _) = random_rounds(users, ROUNDS_PER_K, 3);
        for k in 1..=users {
            let mut full = 0;
            let mut unflagged = 0;
            for r in &rounds {
                let eff = protocol::effective_channel(k, &r.channels, &r.precoders);
                if numerics::rank_with_tol(&eff.matrix, DEFAULT_RANK_TOL) == users - 1 {
                    full += 1;
                } else if numerics::condition_estimate(&eff.matrix) <= SINGULAR_CONDITION_LIMIT {
                    unflagged += 1;
                }
            }
            ok &= full >= 999 && unflagged == 0;
            if k == 1 || full < ROUNDS_PER_K {
                parts.push(format!("K={users} user {k}: {full}/{ROUNDS_PER_K}"));
            }
        }
    }
    report("AC3 rank", ok, parts.join(", "));
    assert!(ok);
}

#[test]
fn ac4_dof_slopes() {
    let start = Instant::now();
    let grid = [40.0, 50.0, 60.0];
    let trials = 10_000;
    let rounds = 24;
    let cases = [
        ("STIA K=3 gamma=1/3", SimScheme::Stia, 3, (3, 1), 1.85, 2.05),
        ("ZF-TDMA K=3 gamma=1/3", SimScheme::ZfTdma, 3, (3, 1), 1.57, 1.77),
        ("TDMA K=3", SimScheme::Tdma, 3, (3, 1), 0.95, 1.05),
        ("ZF K=3 gamma=0", SimScheme::Zf, 3, (3, 0), 1.90, 2.10),
        ("STIA K=4 gamma=1/4", SimScheme::Stia, 4, (4, 1), 2.80, 3.10),
    ];
    let mut ok = true;
    for (name, scheme, users, (tc, tfb), lo, hi) in cases {
        let setup = SimulationSetup {
            scheme,
            users,
            delay: DelayConfig::new(tc, tfb).unwrap(),
            rounds,
        };
        let est = estimate_dof_slope(&setup, &grid, trials, SEED).unwrap();
        let pass = (lo..=hi).contains(&est.slope);
        ok &= pass;
        report(
            &format!("AC4 slope {name}"),
            pass,
            format!(
                "slope {:.4} +- {:.4} in [{lo}, {hi}], {} resampled",
                est.slope, est.confidence_halfwidth, est.resamples
            ),
        );
    }
    let elapsed = start.elapsed();
    let fast = elapsed < Duration::from_secs(120);
    report("AC4 runtime", fast, format!("{elapsed:.2?} (< 120 s)"));
    assert!(ok && fast);
}

#[test]
fn ac5_scheduler_golden_values() {
    let plan = build_plan_k3(3).unwrap();
    let sets: Vec<Vec<u64>> = plan.stia_rounds.iter().map(StiaRound::slots).collect();
    let mut ok = sets == vec![vec![1, 6, 8], vec![4, 9, 11], vec![7, 12, 14]];
    ok &= plan.zf_slots.iter().copied().collect::<Vec<_>>() == vec![2, 3, 5, 15];
    ok &= plan.tdma_slots.iter().copied().collect::<Vec<_>>() == vec![10, 13];
    for n in 1..=100i64 {
        ok &= account_dof(&build_plan_k3(n as u64).unwrap()).dof == frac(6 * n + 10, 3 * n + 6);
    }
    let big = account_dof(&build_plan_k3(10_000).unwrap()).dof;
    let big_f = *big.numer() as f64 / *big.denom() as f64;
    ok &= (big_f - 2.0).abs() <= 1e-3;
    report(
        "AC5 scheduler",
        ok,
        format!("n=3 sets {sets:?}, ZF {:?}, TDMA {:?}; n=1e4 dof {big} = {big_f:.6}", plan.zf_slots, plan.tdma_slots),
    );
    assert!(ok);
}

#[test]
fn ac6_tradeoff_curve() {
    let points = [
        (frac(0, 1), frac(2, 1)),
        (frac(1, 3), frac(2, 1)),
        (frac(2, 3), frac(7, 4)),
        (frac(1, 1), frac(3, 2)),
        (frac(3, 2), frac(3, 2)),
    ];
    let mut ok = points.iter().all(|&(g, d)| tradeoff_k3(g).unwrap() == d);
    let third = frac(1, 3);
    let zf_tdma = baseline_zf_tdma(third).unwrap();
    let zf_mat = baseline_zf_mat(third).unwrap();
    let stia = tradeoff_k3(third).unwrap();
    ok &= zf_tdma == frac(5, 3) && zf_mat == frac(11, 6);
    ok &= stia - zf_tdma == frac(1, 3) && stia - zf_mat == frac(1, 6);
    report(
        "AC6 trade-off",
        ok,
        format!("d(1/3)={stia}, ZF-TDMA {zf_tdma}, ZF-MAT {zf_mat}, gaps {} and {}", stia - zf_tdma, stia - zf_mat),
    );
    assert!(ok);
}

#[test]
fn ac7_coherence_time_example() {
    let t = coherence_time_estimate(2.1e9, kmh_to_mps(3.0)).unwrap();
    let ok = (t - 21.4e-3).abs() <= 0.1e-3;
    report("AC7 coherence time", ok, format!("{:.3} ms", t * 1e3));
    assert!(ok);
}

#[test]
fn ac8_property_suites() {
    // Partitions.
    let mut partitions_ok = true;
    for users in 3..=6 {
        for n in 1..=50 {
            partitions_ok &= build_plan_general(users, n).unwrap().validate().is_ok();
        }
    }
    report("AC8 partitions", partitions_ok, "K in 3..=6, n in 1..=50");

    // Determinism: bit-identical reruns, including on a different pool size.
    let setup = SimulationSetup {
        scheme: SimScheme::Stia,
        users: 3,
        delay: DelayConfig::new(3, 1).unwrap(),
        rounds: 4,
    };
    let grid = [40.0, 50.0, 60.0];
    let a = estimate_dof_slope(&setup, &grid, 1000, 99).unwrap();
    let b = estimate_dof_slope(&setup, &grid, 1000, 99).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let c = pool.install(|| estimate_dof_slope(&setup, &grid, 1000, 99).unwrap());
    let bits = |e: &stia_core::DofEstimate| {
        let mut v: Vec<u64> = e.mean_sum_rates.iter().map(|x| x.to_bits()).collect();
        v.push(e.slope.to_bits());
        v.push(e.confidence_halfwidth.to_bits());
        v
    };
    let deterministic = a == b && bits(&a) == bits(&b) && bits(&a) == bits(&c);
    report("AC8 determinism", deterministic, format!("slope bits {:#x}", a.slope.to_bits()));

    // Power audit: E||x||^2 = P within 2% for every slot type.
    let power = 10.0;
    let draws = 10_000u64;
    let mut rng = stream_rng(SEED, 8);
    let (mut p1, mut p2, mut zf, mut tdma) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..draws {
        let proc_ = FadingProcess::new(3, 2, 3, derive_seed(SEED, &[8, i])).unwrap();
        let reference = proc_.sample_block(1).to_vec();
        let now = proc_.sample_block(2).to_vec();
        let s = SymbolBlock::random_gaussian(3, &mut rng);
        let energy = |x: &[Complex64]| x.iter().map(|z| z.norm_sqr()).sum::<f64>();
        p1 += energy(&protocol::phase_one_transmit(&s, 1, PowerPolicy::Total(power)).signal);
        if let Ok(set) = stia_core::build_stia_precoders(&now, &reference, 5) {
            p2 += energy(&protocol::phase_two_transmit(&s, &set, PowerPolicy::Total(power)).signal);
        }
        let w = stia_core::build_zf_precoder(&now, &[1, 2]).unwrap();
        zf += energy(&protocol::zf_transmit(&w, &s.per_user[0], power));
        tdma += energy(&protocol::tdma_transmit(2, s.per_user[1][0], power));
    }
    let mut power_ok = true;
    let mut parts = Vec::new();
    for (name, total) in [("phase one", p1), ("phase two", p2), ("ZF", zf), ("TDMA", tdma)] {
        let mean = total / draws as f64;
        power_ok &= (mean - power).abs() <= 0.02 * power;
        parts.push(format!("{name} {mean:.3}"));
    }
    report("AC8 power audit", power_ok, format!("P = {power}: {}", parts.join(", ")));
    assert!(partitions_ok && deterministic && power_ok);
}

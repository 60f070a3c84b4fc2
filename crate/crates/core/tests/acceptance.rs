//! Acceptance runner: one PASS/FAIL line per criterion.
//!
//! The simulation criteria share one sweep at 18 and 20 dB with 50 devices
//! per cell; it is run twice (parallel, then sequential) and the two result
//! files must be byte-identical.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{elbo_check, gradient_suite, rng, Graph, FD_TOL};
use ssl_channel::channel::{
    random_symbols, sample_beta52, sample_device, transmit_block, ChannelParams, Constellation, K,
};
use ssl_channel::harness::{
    run_experiment, write_results, ExperimentConfig, ExperimentOutput, Method, SerRecord,
};
use ssl_channel::nnkit::ops::argmax;
use ssl_channel::par::Execution;
use ssl_channel::ssl::gumbel::{gumbel_softmax_relax, gumbel_vector};
use ssl_channel::ssl::{tau_schedule, GammaSchedule};

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, name: &str, pass: bool, detail: String) {
        if !pass {
            self.failed += 1;
        }
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

fn gradients(rep: &mut Report) {
    let mut pass = true;
    let mut parts = Vec::new();
    for graph in Graph::ALL {
        let (worst, replaced) = gradient_suite(graph, 20, 1000);
        pass &= worst < FD_TOL;
        parts.push(format!(
            "{graph:?} {worst:.1e} ({replaced} kink points redrawn)"
        ));
    }
    rep.line(
        "gradient correctness",
        pass,
        format!("max rel err < 1e-5 at 20 points: {}", parts.join(", ")),
    );
}

fn elbo(rep: &mut Report) {
    let (mut gap, mut violation) = (0.0f64, f64::NEG_INFINITY);
    for seed in 0..50 {
        let (g, v) = elbo_check(seed, 100);
        gap = gap.max(g);
        violation = violation.max(v);
    }
    rep.line(
        "ELBO",
        gap < 1e-10 && violation <= 0.0,
        format!("50 models: max |gap| at posterior {gap:.1e} (< 1e-10), max elbo(q) - log p(y) over 100 q each {violation:.2e} (<= 0)"),
    );
}

fn gumbel(rep: &mut Report) {
    const DRAWS: usize = 100_000;
    let raw: [f64; K] = std::array::from_fn(|k| 1.0 + (k as f64 * 1.3).sin() + 0.1 * k as f64);
    let total: f64 = raw.iter().sum();
    let q = raw.map(|v| v / total);
    let log_q = q.map(f64::ln);
    let c = Constellation::qam16();
    let mut r = rng(2024);
    let mut counts = [0usize; K];
    let mut simplex = 0.0f64;
    for _ in 0..DRAWS {
        let s = gumbel_softmax_relax(&log_q, &gumbel_vector(&mut r), 0.01, &c);
        let sum: f64 = s.stilde.iter().sum();
        let negative = s.stilde.iter().any(|&v| v < 0.0);
        simplex = simplex.max(if negative {
            f64::INFINITY
        } else {
            (sum - 1.0).abs()
        });
        counts[argmax(&s.stilde)] += 1;
    }
    let worst_z = (0..K)
        .map(|k| {
            let f = counts[k] as f64 / DRAWS as f64;
            (f - q[k]).abs() / (q[k] * (1.0 - q[k]) / DRAWS as f64).sqrt()
        })
        .fold(0.0f64, f64::max);
    rep.line(
        "Gumbel-softmax distribution",
        worst_z < 3.0 && simplex <= 1e-12,
        format!("tau = 0.01, 1e5 draws: worst class deviation {worst_z:.2} SE (< 3), simplex error {simplex:.1e} (<= 1e-12)"),
    );
}

fn schedules(rep: &mut Report) {
    let s = GammaSchedule::new(1024, 16, 100).unwrap();
    let g1 = s.gamma(1);
    let g_inf = s.gamma(1_000_000);
    let t1 = tau_schedule(1, 100);
    let t_floor = tau_schedule(1_000_000, 100);
    let mut monotone = true;
    let mut held = true;
    for l in 1..20_000 {
        monotone &=
            s.gamma(l + 1) <= s.gamma(l) && tau_schedule(l + 1, 100) <= tau_schedule(l, 100);
        if l % 100 != 0 {
            held &=
                s.gamma(l + 1) == s.gamma(l) && tau_schedule(l + 1, 100) == tau_schedule(l, 100);
        }
    }
    let floor_ok = (1..20_000).all(|l| tau_schedule(l, 100) >= 0.5);
    let pass = (g1 - 1.0 / 3.0).abs() < 1e-15
        && (g_inf - 1.0 / 41.0).abs() < 1e-15
        && t1 == 1.0
        && t_floor == 0.5
        && floor_ok
        && monotone
        && held;
    rep.line(
        "schedules",
        pass,
        format!(
            "gamma_1 = {g1:.6}, gamma_inf = {g_inf:.6} (1/41 = {:.6}), tau_1 = {t1}, tau floor = {t_floor}, monotone = {monotone}, windowed = {held}",
            1.0 / 41.0
        ),
    );
}

fn channel_statistics(rep: &mut Report) {
    const DRAWS: usize = 1_000_000;
    let mut r = rng(11);
    let beta_mean = (0..DRAWS).map(|_| sample_beta52(&mut r)).sum::<f64>() / DRAWS as f64;
    let mut r = rng(12);
    let power = (0..DRAWS)
        .map(|_| {
            let h = sample_device(&mut r, 20.0).unwrap().h;
            h[0] * h[0] + h[1] * h[1]
        })
        .sum::<f64>()
        / DRAWS as f64;
    let mut params = ChannelParams::new(0.0, 0.0, [1.0, 0.0], 15.0).unwrap();
    params.h = [0.0, 0.0];
    let block = transmit_block(
        &params,
        &Constellation::qam16(),
        random_symbols(&mut rng(13), DRAWS),
        0,
        &mut rng(14),
    )
    .unwrap();
    let noise = block
        .outputs()
        .iter()
        .map(|y| y[0] * y[0] + y[1] * y[1])
        .sum::<f64>()
        / DRAWS as f64;
    let noise_rel = noise / params.sigma2 - 1.0;
    rep.line(
        "channel statistics",
        (power - 1.0).abs() < 0.005 && noise_rel.abs() < 0.02 && (beta_mean - 5.0 / 7.0).abs() < 0.001,
        format!(
            "1e6 draws each: E|h|^2 = {power:.4} (1 +- 0.005), noise variance rel. err {:+.3}% (< 2%), Beta(5,2) mean {beta_mean:.5} (5/7 +- 0.001)",
            100.0 * noise_rel
        ),
    );
}

/// All methods at N = 1024 for the ordering claims.
fn ordering_config() -> ExperimentConfig {
    ExperimentConfig {
        snr_db: vec![18.0, 20.0],
        n_symbols: vec![1024],
        n_pilots: 16,
        methods: vec![
            Method::Optimal,
            Method::AllPilots,
            Method::Sdd,
            Method::Mcem,
            Method::ViterbiEm,
            Method::Vae,
        ],
        devices: 50,
        seed: 7,
        ..Default::default()
    }
}

/// The VAE at the shorter block lengths, same devices and seed.
fn saturation_config() -> ExperimentConfig {
    ExperimentConfig {
        n_symbols: vec![128, 512],
        methods: vec![Method::Vae],
        ..ordering_config()
    }
}

fn sweep(exec: Execution) -> ExperimentOutput {
    let mut out = run_experiment(&ordering_config(), exec).expect("sweep");
    let more = run_experiment(&saturation_config(), exec).expect("sweep");
    out.cells.extend(more.cells);
    out.records.extend(more.records);
    out.excluded.extend(more.excluded);
    out
}

fn find(out: &ExperimentOutput, method: Method, snr: f64, n: usize) -> &SerRecord {
    out.records
        .iter()
        .find(|r| r.method == method && r.snr_db == snr && r.n_symbols == n)
        .expect("cell present")
}

fn combined_se(a: &SerRecord, b: &SerRecord) -> f64 {
    a.stderr.hypot(b.stderr)
}

fn ordering(rep: &mut Report, out: &ExperimentOutput) {
    for snr in [18.0, 20.0] {
        let get = |m| find(out, m, snr, 1024);
        let opt = get(Method::Optimal);
        let sdd = get(Method::Sdd);
        let mut pass = true;
        let mut notes = Vec::new();
        for m in [
            Method::AllPilots,
            Method::Sdd,
            Method::Mcem,
            Method::ViterbiEm,
            Method::Vae,
        ] {
            let r = get(m);
            notes.push(format!("{m} {:.4}+-{:.4}", r.ser, r.stderr));
            if m != Method::AllPilots {
                // reference only: trained on the labels it is scored on
                pass &= opt.ser <= r.ser;
            }
        }
        for m in [Method::Vae, Method::Mcem, Method::ViterbiEm] {
            let r = get(m);
            pass &= sdd.ser - r.ser > 2.0 * combined_se(sdd, r);
        }
        let vae = get(Method::Vae);
        for m in [Method::Mcem, Method::ViterbiEm] {
            let r = get(m);
            pass &= vae.ser <= r.ser + 2.0 * combined_se(vae, r);
        }
        rep.line(
            &format!("ordering at {snr} dB, N = 1024"),
            pass,
            format!("optimal {:.4}; {}", opt.ser, notes.join(", ")),
        );
    }
}

fn saturation(rep: &mut Report, out: &ExperimentOutput) {
    for snr in [18.0, 20.0] {
        let [a, b, c] = [128, 512, 1024].map(|n| find(out, Method::Vae, snr, n));
        let flat = (c.ser - b.ser).abs() <= 2.0 * combined_se(b, c);
        let drop = a.ser - b.ser > 2.0 * combined_se(a, b);
        rep.line(
            &format!("VAE saturation at {snr} dB"),
            flat && drop,
            format!(
                "SER N=128 {:.4}+-{:.4}, N=512 {:.4}+-{:.4}, N=1024 {:.4}+-{:.4}; 512 vs 128 drop {:.4} (> {:.4}), |1024 - 512| {:.4} (<= {:.4})",
                a.ser,
                a.stderr,
                b.ser,
                b.stderr,
                c.ser,
                c.stderr,
                a.ser - b.ser,
                2.0 * combined_se(a, b),
                (c.ser - b.ser).abs(),
                2.0 * combined_se(b, c)
            ),
        );
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut rep = Report { failed: 0 };
    gradients(&mut rep);
    elbo(&mut rep);
    gumbel(&mut rep);
    schedules(&mut rep);
    channel_statistics(&mut rep);

    let devices = ordering_config().devices;
    let dir = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).expect("scratch directory");
    let first = sweep(Execution::Parallel);
    let second = sweep(Execution::Sequential);
    let paths = [dir.join("run1.csv"), dir.join("run2.csv")];
    write_results(&first.records, &paths[0]).expect("write");
    write_results(&second.records, &paths[1]).expect("write");

    ordering(&mut rep, &first);
    saturation(&mut rep, &first);

    let bytes = paths
        .each_ref()
        .map(|p| std::fs::read(p).expect("read back"));
    rep.line(
        "determinism",
        bytes[0] == bytes[1],
        format!(
            "{} cells x {} devices, parallel and sequential runs: {} byte results files {}",
            first.records.len(),
            devices,
            bytes[0].len(),
            if bytes[0] == bytes[1] {
                "identical"
            } else {
                "differ"
            }
        ),
    );
    rep.line(
        "no divergence",
        first.total_excluded() == 0,
        format!(
            "{} of {} device runs excluded (worst cell {})",
            first.total_excluded(),
            first.records.len() * devices,
            first.excluded.iter().max().copied().unwrap_or(0)
        ),
    );

    println!("results: {}", paths[0].display());
    println!(
        "{} criteria failed, {:.0} s",
        rep.failed,
        start.elapsed().as_secs_f64()
    );
    if rep.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

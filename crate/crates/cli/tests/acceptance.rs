//! Acceptance checks, one verdict line per criterion.
//!
//! Runs without the libtest harness so the verdicts are always printed.
//! Exits nonzero if any criterion fails.

use std::collections::HashMap;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sqz::adaptive::{decode_stream, encode_stream, encode_with_lengths, LengthHint};
use sqz::bounded::{one_pass_decode, one_pass_encode, quantize, BoundedParams, Lambda, Slack, CALIBRATED_C};
use sqz::bwt::{bwt, ibwt, pipeline_compress, pipeline_decompress};
use sqz::comparison_sorter::sort_counting;
use sqz::harness::{run_one_pass, BoundedProcessor};
use sqz::online_sorter::sort_permutation;
use sqz::text_stats::{gen_debruijn, gen_periodic};
use sqz::Symbol;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

// ---- oracles ----

fn entropy_of_counts<'a>(counts: impl IntoIterator<Item = &'a u64>) -> f64 {
    let counts: Vec<u64> = counts.into_iter().copied().filter(|&c| c > 0).collect();
    let n: u64 = counts.iter().sum();
    counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.log2()
        })
        .sum()
}

fn h0(s: &[Symbol]) -> f64 {
    let mut counts: HashMap<Symbol, u64> = HashMap::new();
    for &c in s {
        *counts.entry(c).or_default() += 1;
    }
    entropy_of_counts(counts.values())
}

/// Order-k empirical entropy per symbol of `s`, averaged over all `n` positions.
fn hk(s: &[Symbol], k: usize) -> f64 {
    let mut by_context: HashMap<&[Symbol], HashMap<Symbol, u64>> = HashMap::new();
    for i in k..s.len() {
        *by_context.entry(&s[i - k..i]).or_default().entry(s[i]).or_default() += 1;
    }
    let total: f64 = by_context
        .values()
        .map(|m| {
            let len: u64 = m.values().sum();
            len as f64 * entropy_of_counts(m.values())
        })
        .sum();
    total / s.len() as f64
}

fn stable_sort_permutation(s: &[Symbol]) -> Vec<u64> {
    let mut idx: Vec<u64> = (1..=s.len() as u64).collect();
    idx.sort_by_key(|&i| s[i as usize - 1]);
    idx
}

/// Smallest `l` with `2^l * den >= num`.
fn ceil_log2_ratio(num: u64, den: u64) -> u32 {
    let mut l = 0;
    while (den as u128) << l < num as u128 {
        l += 1;
    }
    l
}

// ---- corpora ----

fn uniform(rng: &mut ChaCha8Rng, sigma: u32, n: usize) -> Vec<Symbol> {
    (0..n).map(|_| rng.gen_range(0..sigma)).collect()
}

/// Zipf-like source with exponent `a`.
fn skewed(rng: &mut ChaCha8Rng, sigma: u32, n: usize, a: f64) -> Vec<Symbol> {
    let weights: Vec<f64> = (1..=sigma).map(|r| (r as f64).powf(-a)).collect();
    let dist = WeightedIndex::new(&weights).unwrap();
    (0..n).map(|_| dist.sample(rng) as Symbol).collect()
}

fn random_source(rng: &mut ChaCha8Rng, sigma: u32, n: usize, run: usize) -> Vec<Symbol> {
    match run % 3 {
        0 => uniform(rng, sigma, n),
        1 => skewed(rng, sigma, n, 1.0),
        _ => skewed(rng, sigma, n, 2.0),
    }
}

fn debruijn_power(k: u32, n: usize) -> Vec<Symbol> {
    let d: Vec<Symbol> = gen_debruijn(k).unwrap().into_iter().map(Symbol::from).collect();
    gen_periodic(&d, n)
}

/// Mixed corpus as `(sigma, string)` pairs.
fn corpus(rng: &mut ChaCha8Rng) -> Vec<(u32, Vec<Symbol>)> {
    let mut out = Vec::new();
    for sigma in [2u32, 4, 26, 256] {
        for n in [0usize, 1, 2, 100, 5000] {
            out.push((sigma, uniform(rng, sigma, n)));
            out.push((sigma, skewed(rng, sigma, n, 1.5)));
        }
        out.push((sigma, vec![sigma - 1; 20_000]));
        let pattern = uniform(rng, sigma, 7);
        out.push((sigma, gen_periodic(&pattern, 20_000)));
    }
    for k in [3, 6, 8] {
        out.push((2, debruijn_power(k, 1 << 14)));
    }
    let text: Vec<Symbol> = b"the quick brown fox jumps over the lazy dog; ".repeat(200).into_iter().map(Symbol::from).collect();
    out.push((256, text));
    out
}

// ---- criteria ----

fn adaptive_length_bound() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let n = 100_000usize;
    let lg = (n as f64).log2();
    let period = (lg * lg).floor() as u64;
    let mut worst_c: f64 = f64::NEG_INFINITY;
    let mut violations = 0u64;
    for sigma in [4u32, 16, 64] {
        for run in 0..50 {
            let s = random_source(&mut rng, sigma, n, run);
            let (bits, lengths) = encode_with_lengths(&s, sigma as usize, LengthHint::Known(n as u64)).unwrap();
            let c = (bits.len() as f64 - (h0(&s) + 1.0) * n as f64) / (sigma as f64 * lg.powi(3));
            worst_c = worst_c.max(c);
            let mut occ = vec![0u64; sigma as usize];
            for (idx, (&sym, &len)) in s.iter().zip(&lengths).enumerate() {
                occ[sym as usize] += 1;
                let i = idx as u64 + 1;
                let bound = ceil_log2_ratio(i + sigma as u64, occ[sym as usize].saturating_sub(period).max(1));
                violations += (len > bound) as u64;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst_c <= 8.0 && violations == 0 && secs <= 30.0,
        format!("max c = {worst_c:.3} (<= 8), per-position violations = {violations}, runtime {secs:.1}s (<= 30s)"),
    )
}

fn adaptive_round_trip() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let mut runs = 0;
    let mut failures = 0;
    for (sigma, s) in corpus(&mut rng) {
        for hint in [LengthHint::Known(s.len() as u64), LengthHint::Unknown] {
            let bits = encode_stream(&s, sigma as usize, hint).unwrap();
            runs += 1;
            if decode_stream(&bits, sigma as usize, s.len() as u64, hint).ok() != Some(s.clone()) {
                failures += 1;
            }
        }
    }
    verdict(failures == 0, format!("{runs} round trips, {failures} failures"))
}

fn online_sorter() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let mut mismatches = 0;
    for run in 0..1000 {
        let n = rng.gen_range(1..=10_000);
        let sigma = rng.gen_range(1..=300);
        let s = random_source(&mut rng, sigma, n, run);
        let lists = sort_permutation(&s).unwrap();
        if lists.permutation().unwrap() != stable_sort_permutation(&s) {
            mismatches += 1;
        }
    }
    let abra: Vec<Symbol> = b"abracadabra".iter().map(|&b| Symbol::from(b)).collect();
    let abra_ok = sort_permutation(&abra).unwrap().permutation().unwrap() == vec![1, 4, 6, 8, 11, 2, 9, 5, 7, 3, 10];

    let mut worst_c: f64 = 0.0;
    for sigma in [4u32, 16, 64, 256] {
        for n in [10_000usize, 100_000] {
            for run in 0..3 {
                let s = random_source(&mut rng, sigma, n, run);
                let lists = sort_permutation(&s).unwrap();
                let scale = h0(&s) * n as f64 + sigma as f64 * (n as f64).log2();
                worst_c = worst_c.max(lists.encoding_size_bits() as f64 / scale);
            }
        }
    }
    verdict(
        mismatches == 0 && abra_ok && worst_c <= 6.0,
        format!("1000 multisets, {mismatches} mismatches; abracadabra exact: {abra_ok}; memory fit c = {worst_c:.3} (<= 6)"),
    )
}

fn comparison_sorter() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1004);
    let n = 100_000usize;
    let mut worst_c: f64 = f64::NEG_INFINITY;
    let mut mismatches = 0;
    for sigma in [4u32, 16] {
        for run in 0..50 {
            let s = random_source(&mut rng, sigma, n, run);
            let (perm, comparisons) = sort_counting(s.iter().copied());
            if perm != stable_sort_permutation(&s) {
                mismatches += 1;
            }
            let c = (comparisons as f64 - (h0(&s) + 1.0) * n as f64) / ((sigma * sigma) as f64 * (n as f64).log2());
            worst_c = worst_c.max(c);
        }
    }
    verdict(
        worst_c <= 8.0 && mismatches == 0,
        format!("max c = {worst_c:.3} (<= 8), oracle mismatches = {mismatches}"),
    )
}

fn random_counts(rng: &mut ChaCha8Rng, sigma: usize) -> Vec<u64> {
    let shape = rng.gen_range(0..4);
    let mut counts: Vec<u64> = (0..sigma)
        .map(|i| match shape {
            0 => rng.gen_range(1..1000),
            1 => (1e6 * (-(rng.gen::<f64>().max(1e-300)).ln()).powi(3)) as u64,
            2 => (1e6 / (i as f64 + 1.0).powf(rng.gen_range(0.5..3.0))) as u64,
            _ => {
                if rng.gen_bool(0.1) {
                    rng.gen_range(1..100_000)
                } else {
                    0
                }
            }
        })
        .collect();
    if counts.iter().all(|&c| c == 0) {
        counts[0] = 1;
    }
    counts
}

fn quantization_bound() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1005);
    let mut checks = 0u64;
    let mut violations = 0u64;
    let mut tightest = f64::INFINITY;
    for _ in 0..1000 {
        for sigma in [16usize, 256] {
            let counts = random_counts(&mut rng, sigma);
            let h = entropy_of_counts(&counts);
            let total: u64 = counts.iter().sum();
            for lambda in [1.0, 2.0] {
                for mu in [0.5, 1.0, 2.0] {
                    let q = quantize(&counts, Lambda::from_f64(lambda).unwrap(), Slack::from_f64(mu).unwrap()).unwrap();
                    let d: f64 = counts
                        .iter()
                        .enumerate()
                        .filter(|&(_, &c)| c > 0)
                        .map(|(i, &c)| {
                            let p = c as f64 / total as f64;
                            let qi = q.q(i as Symbol) as f64 / 2f64.powi(q.precision_bits() as i32);
                            p * (p / qi).log2()
                        })
                        .sum();
                    let bound = (lambda - 1.0) * h + mu;
                    checks += 1;
                    violations += (d >= bound) as u64;
                    tightest = tightest.min(bound - d);
                }
            }
        }
    }
    verdict(
        violations == 0,
        format!("{checks} checks, {violations} violations, smallest margin {tightest:.4} bits"),
    )
}

fn bounded_length() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1006);
    let n = 100_000usize;
    let mut worst_c: f64 = f64::NEG_INFINITY;
    let mut failures = 0;
    let mut runs = 0;
    for sigma in [4u32, 16] {
        let sources = [
            uniform(&mut rng, sigma, n),
            skewed(&mut rng, sigma, n, 1.5),
            gen_periodic(&uniform(&mut rng, sigma, 5), n),
            gen_periodic(&uniform(&mut rng, sigma, 37), n),
        ];
        for s in &sources {
            for k in [0u32, 1] {
                let h = hk(s, k as usize);
                for lambda in [1.0, 2.0] {
                    for mu in [1.0, 2.0] {
                        let params = BoundedParams::new(sigma, lambda, k, mu).unwrap();
                        let bits = one_pass_encode(s, params).unwrap();
                        let mut src = bits.reader();
                        runs += 1;
                        if one_pass_decode(&mut src, params, n as u64).ok().as_ref() != Some(s) {
                            failures += 1;
                        }
                        let scale = (sigma as f64).powf(k as f64 + 1.0 / lambda) * (sigma as f64).log2();
                        let c = (bits.len() as f64 - (lambda * h + mu) * n as f64) / scale;
                        worst_c = worst_c.max(c);
                    }
                }
            }
        }
    }
    verdict(
        worst_c <= CALIBRATED_C as f64 && failures == 0,
        format!("{runs} runs, max c = {worst_c:.3} (<= {CALIBRATED_C}), round-trip failures = {failures}"),
    )
}

fn memory_independence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1007);
    let mut details = Vec::new();
    let mut pass = true;
    for (sigma, k, lambda, mu) in [(4u32, 1u32, 1.0, 1.0), (16, 0, 2.0, 2.0), (16, 1, 1.0, 0.5)] {
        let params = BoundedParams::new(sigma, lambda, k, mu).unwrap();
        let peaks: Vec<u64> = [10_000usize, 100_000, 1_000_000]
            .iter()
            .map(|&n| {
                let s = skewed(&mut rng, sigma, n, 1.0);
                run_one_pass(BoundedProcessor::new(params), s).unwrap().1.peak_state_bits
            })
            .collect();
        pass &= peaks.windows(2).all(|w| w[0] == w[1]);
        details.push(format!("({sigma},{k},{lambda},{mu}): {peaks:?}"));
    }
    verdict(pass, format!("peak_state_bits for n = 1e4, 1e5, 1e6: {}", details.join("; ")))
}

/// Least-squares fit `y = a x + b`.
fn fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let a = sxy / sxx;
    (a, my - a * mx)
}

fn bwt_pipeline() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1008);
    let mut failures = 0;
    let mut runs = 0;
    for (sigma, s) in corpus(&mut rng) {
        runs += 1;
        let t = bwt(&s, sigma).unwrap();
        let bits = pipeline_compress(&s, sigma).unwrap();
        if ibwt(&t).ok().as_ref() != Some(&s) || pipeline_decompress(&bits, sigma, s.len() as u64).ok().as_ref() != Some(&s) {
            failures += 1;
        }
    }
    let mut worst_residual: f64 = 0.0;
    let mut details = Vec::new();
    for k in [6u32, 8] {
        let ns: Vec<usize> = (14..=17).map(|e| 1usize << e).collect();
        let sizes: Vec<f64> = ns
            .iter()
            .map(|&n| pipeline_compress(&debruijn_power(k, n), 2).unwrap().len() as f64)
            .collect();
        let xs: Vec<f64> = ns.iter().map(|&n| (1u64 << k) as f64 * (n as f64).log2()).collect();
        let (c1, c2) = fit(&xs, &sizes);
        for (x, y) in xs.iter().zip(&sizes) {
            worst_residual = worst_residual.max(((c1 * x + c2) - y).abs() / y);
        }
        details.push(format!("k={k}: sizes {sizes:?}, c1 = {c1:.3}, c2 = {c2:.1}"));
    }
    verdict(
        failures == 0 && worst_residual < 0.10,
        format!(
            "{runs} round trips, {failures} failures; max relative residual {:.2}% (< 10%); {}",
            100.0 * worst_residual,
            details.join("; ")
        ),
    )
}

fn interoperability() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_sqz");
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1009);
    let input = dir.path().join("input");
    let packed = dir.path().join("packed");
    let output = dir.path().join("output");
    let data: Vec<u8> = skewed(&mut rng, 16, 6000, 1.2).into_iter().map(|c| c as u8).collect();
    fs::write(&input, &data).unwrap();

    let mut configs: Vec<Vec<String>> = vec![
        vec!["--codec".into(), "adaptive".into()],
        vec!["--codec".into(), "adaptive".into(), "--unknown-length".into()],
        vec!["--codec".into(), "bwt".into()],
        vec!["--codec".into(), "gaplists".into()],
    ];
    for lambda in ["1", "2"] {
        for k in ["0", "1"] {
            for mu in ["0.5", "1", "2"] {
                configs.push(
                    ["--codec", "bounded", "--lambda", lambda, "--k", k, "--mu", mu]
                        .iter()
                        .map(|s| s.to_string())
                        .collect(),
                );
            }
        }
    }

    let run = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let (inp, pk, out) = (input.to_str().unwrap(), packed.to_str().unwrap(), output.to_str().unwrap());
    let mut round_trip_failures = 0;
    let mut flips = 0;
    let mut detected = 0;
    let mut silent = 0;
    let mut silent_header = 0;
    for config in &configs {
        let mut args: Vec<&str> = vec!["encode", "--sigma", "16"];
        args.extend(config.iter().map(String::as_str));
        args.extend([inp, pk]);
        if !run(&args).status.success() {
            round_trip_failures += 1;
            continue;
        }
        let ok = run(&["decode", pk, out]);
        if !ok.status.success() || fs::read(&output).unwrap() != data {
            round_trip_failures += 1;
        }
        // 100 flips per codec family: the four fixed configs and the first bounded one
        if configs.iter().position(|c| c == config).unwrap() > 4 {
            continue;
        }
        let original = fs::read(&packed).unwrap();
        let header_len = 22 + u32::from_le_bytes(original[18..22].try_into().unwrap()) as usize;
        for _ in 0..100 {
            let bit = rng.gen_range(0..original.len() * 8);
            let mut damaged = original.clone();
            damaged[bit / 8] ^= 0x80 >> (bit % 8);
            fs::write(&packed, &damaged).unwrap();
            let _ = fs::remove_file(&output);
            let result = run(&["decode", pk, out]);
            flips += 1;
            if result.status.code() == Some(4) {
                detected += 1;
            } else if result.status.success() {
                let got = fs::read(&output).unwrap_or_default();
                if got != data {
                    silent += 1;
                    if bit / 8 < header_len {
                        silent_header += 1;
                    }
                }
            }
        }
    }
    verdict(
        round_trip_failures == 0 && silent == 0 && silent_header == 0,
        format!(
            "{} configurations, {round_trip_failures} round-trip failures; {flips} bit flips, {detected} rejected with exit 4, \
             {silent} silent wrong outputs ({silent_header} in header/parameters)",
            configs.len()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("adaptive coder length bound", adaptive_length_bound),
        ("adaptive coder round trip", adaptive_round_trip),
        ("online sorter correctness and memory", online_sorter),
        ("comparison sorter bound", comparison_sorter),
        ("quantization bound", quantization_bound),
        ("bounded coder length", bounded_length),
        ("memory independence", memory_independence),
        ("bwt pipeline", bwt_pipeline),
        ("codec interoperability", interoperability),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        failed += !v.pass as usize;
        println!(
            "criterion {}: {} {name}: {} [{:.1}s]",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}

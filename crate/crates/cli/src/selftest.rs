//! Randomized consistency checks between independent code paths.

use liar_core::game::{solve_adaptive, solve_two_batch};
use liar_core::{Channel, Lie, LieString, Limits, Result, Variant, Winner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Default, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: usize,
    pub failed: usize,
    pub first_failure: Option<String>,
}

impl Check {
    fn record(&mut self, ok: bool, context: impl FnOnce() -> String) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(context());
            }
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub seed: u64,
    pub cases: usize,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn failures(&self) -> usize {
        self.checks.iter().map(|c| c.failed).sum()
    }

    pub fn summary(&self) -> String {
        let mut out: Vec<String> = self
            .checks
            .iter()
            .map(|c| {
                let status = if c.failed == 0 { "ok" } else { "FAIL" };
                let mut line = format!("{status:4} {} ({} passed, {} failed)", c.name, c.passed, c.failed);
                if let Some(f) = &c.first_failure {
                    line.push_str(&format!("\n     first failure: {f}"));
                }
                line
            })
            .collect();
        out.push(format!("seed {} cases {}", self.seed, self.cases));
        out.join("\n")
    }
}

/// A random channel over a binary or ternary alphabet with strings of
/// length at most two.
fn random_channel(rng: &mut ChaCha8Rng) -> Channel {
    let t = if rng.gen_bool(0.75) { 2 } else { 3 };
    let lies: Vec<Lie> = Lie::all(t).collect();
    let mut pool = vec![LieString::empty()];
    for &a in &lies {
        pool.push(LieString::new(vec![a]));
        for &b in &lies {
            pool.push(LieString::new(vec![a, b]));
        }
    }
    loop {
        let size = rng.gen_range(1..=5);
        let strings: Vec<LieString> = pool.choose_multiple(rng, size).cloned().collect();
        if let Ok(c) = Channel::new(t, strings) {
            return c;
        }
    }
}

pub fn run(seed: u64, cases: usize, limits: &Limits) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut round_trip = Check { name: "channel json round trip", ..Check::default() };
    let mut monotone = Check { name: "winner monotone in n", ..Check::default() };
    let mut batches = Check { name: "two-batch win implies adaptive win", ..Check::default() };
    let mut verified = Check { name: "two-batch strategies verify", ..Check::default() };

    for _ in 0..cases {
        let channel = random_channel(&mut rng);
        let back = Channel::from_json(&channel.to_json())?;
        round_trip.record(back == channel, || channel.to_json());

        let variant = if rng.gen_bool(0.5) { Variant::Original } else { Variant::Pathological };
        let q = rng.gen_range(0..=if channel.t() == 2 { 4 } else { 3 });
        let n = rng.gen_range(1..=6u64);
        let here = solve_adaptive(&channel, n, q, variant, limits)?.winner;
        // Original: fewer elements never hurt Paul. Pathological: more never do.
        let m = match variant {
            Variant::Original => n - 1,
            Variant::Pathological => n + 1,
        };
        let there = solve_adaptive(&channel, m, q, variant, limits)?.winner;
        monotone.record(here != Winner::Paul || there == Winner::Paul, || {
            format!("{} {variant} q={q} n={n} vs n={m}", channel.to_json())
        });

        let q1 = rng.gen_range(0..=q);
        let two = solve_two_batch(&channel, n, q1, q - q1, variant, limits)?;
        batches.record(two.winner != Winner::Paul || here == Winner::Paul, || {
            format!("{} {variant} q={q} q1={q1} n={n}", channel.to_json())
        });
        if let Some(s) = &two.strategy {
            let v = s.verify(&channel, variant, limits)?;
            verified.record(v.valid, || format!("{} {variant} q1={q1} n={n}: {:?}", channel.to_json(), v.reason));
        }
    }
    Ok(Report { seed, cases, checks: vec![round_trip, monotone, batches, verified] })
}

//! Acceptance criteria, one pass/fail line each. Runs with its own `main`
//! so the report is printed even when everything passes.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::Instant;

use liar_core::bounds::{paul_original_ratio, varshamov_lower, BoundConstants};
use liar_core::channel::presets;
use liar_core::code::varshamov_code;
use liar_core::game::{degenerate_witness, optimal_n, solve_adaptive, solve_two_batch, Play, Threshold};
use liar_core::numeric::{rational_from_f64, Enclosure, Truth, DEFAULT_PREC};
use liar_core::pack_cover::{find_placement, Mode, PlacementProblem};
use liar_core::synth::{build_d_packing, nondegen_witness, sweep, synth_original, synth_pathological, SweepGrid, SynthParams};
use liar_core::word::{
    all_words, apply_lie_string, ball_size, g_bound_enclosure, h_bound_enclosure, preimage_lie_string, r_tolerance,
    shadow, shadow_preimage, TolExponent,
};
use liar_core::{BalanceSpec, Channel, Lie, LieString, Limits, Variant, Winner, Word};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::oracle_maxn;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

const VARIANTS: [Variant; 2] = [Variant::Original, Variant::Pathological];

fn limits() -> Limits {
    Limits::default()
}

// ---------------------------------------------------------------------------
// One-batch games against packings and coverings.

/// Every multiset of `n` stems from `T^len`, as nondecreasing index lists.
fn multisets(size: usize, n: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    fn rec(size: usize, n: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if cur.len() == n {
            return f(cur);
        }
        for i in start..size {
            cur.push(i);
            if rec(size, n, i, cur, f) {
                return true;
            }
            cur.pop();
        }
        false
    }
    rec(size, n, 0, &mut Vec::new(), f)
}

/// Brute-force existence of `n` pairwise disjoint (or jointly covering)
/// shadows of `C` in `T^len`.
fn brute_placement(channel: &Channel, len: usize, n: usize, mode: Mode) -> bool {
    let words: Vec<Word> = all_words(channel.t(), len).collect();
    let index: BTreeMap<&Word, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let shadows: Vec<Vec<usize>> = words.iter().map(|w| shadow(w, channel).iter().map(|x| index[x]).collect()).collect();
    multisets(words.len(), n, &mut |stems| {
        let mut hits = vec![0u32; words.len()];
        for &s in stems {
            for &c in &shadows[s] {
                hits[c] += 1;
            }
        }
        match mode {
            Mode::Packing => hits.iter().all(|&h| h <= 1),
            Mode::Covering => hits.iter().all(|&h| h >= 1),
        }
    })
}

fn one_batch_equivalence() -> Outcome {
    let names = ["sym1", "sym2", "z1", "rz1", "unidir2", "forced"];
    let mut cases = 0;
    let mut mismatches = Vec::new();
    for name in names {
        let channel = presets::by_name(name).expect("preset");
        let family = channel.family();
        for q in 1..=4 {
            for n in 0..=6u64 {
                for variant in VARIANTS {
                    cases += 1;
                    let mode = Mode::for_variant(variant);
                    let game = solve_two_batch(&channel, n, q, 0, variant, &limits()).expect("solve").winner == Winner::Paul;
                    let problem = PlacementProblem::root(&family, q, n, mode);
                    let search = find_placement(&family, &problem, &limits()).expect("search").is_some();
                    let brute = brute_placement(&channel, q, n as usize, mode);
                    if game != search || search != brute {
                        mismatches.push(format!("{name} Q={q} n={n} {variant}: game {game} search {search} brute {brute}"));
                    }
                }
            }
        }
    }
    outcome(
        mismatches.is_empty(),
        format!("{}/{cases} cases agree (game, placement search, brute force){}", cases - mismatches.len(), first(&mismatches)),
    )
}

fn first(v: &[String]) -> String {
    v.first().map(|s| format!("; first mismatch: {s}")).unwrap_or_default()
}

// ---------------------------------------------------------------------------

fn degenerate_forced_lie() -> Outcome {
    let channel = presets::forced_lie();
    let mut bad = Vec::new();
    let mut cases = 0;
    for q in 0..=4 {
        for n in 0..=16 {
            for (variant, expect) in [(Variant::Original, Winner::Paul), (Variant::Pathological, Winner::Carole)] {
                cases += 1;
                let got = solve_adaptive(&channel, n, q, variant, &limits()).expect("solve").winner;
                if got != expect {
                    bad.push(format!("q={q} n={n} {variant}: {got}"));
                }
            }
        }
    }
    let w = degenerate_witness(&channel, Variant::Pathological);
    let witness_ok = w.map(|w| w.winner == Winner::Carole).unwrap_or(false);
    if !witness_ok {
        bad.push("no constant-answer witness for the pathological variant".into());
    }
    outcome(bad.is_empty(), format!("{}/{cases} games as expected{}", cases - bad.len().min(cases), first(&bad)))
}

// ---------------------------------------------------------------------------

fn balance_count() -> Outcome {
    let mut bad = Vec::new();
    let mut cases = 0;
    let mut tightest = 0.0f64;
    for q in 1..=14usize {
        for m in 1..=3usize.min(q) {
            for i in 1..=2u32 {
                cases += 1;
                let spec = BalanceSpec::from_exponent(q, m, 2, TolExponent::Bits(i)).expect("spec");
                let count = spec.count_unbalanced(limits().max_space).expect("count");
                // Independent recount from the per-section cap.
                let cap = ((q.div_ceil(m) as f64) / 2.0 + r_tolerance(q, m, 2, i as f64)).floor() as usize;
                let secs = sections(q, m);
                let recount = (0..1u64 << q)
                    .filter(|bits| {
                        let mut start = 0;
                        secs.iter().any(|&l| {
                            let ones = (start..start + l).filter(|p| bits >> p & 1 == 1).count();
                            start += l;
                            ones > cap || l - ones > cap
                        })
                    })
                    .count() as u64;
                // count < 2^Q 2^-i, without rounding the right side.
                tightest = tightest.max((count << i) as f64 / (1u64 << q) as f64);
                if count != recount || count << i >= 1u64 << q {
                    bad.push(format!("Q={q} M={m} i={i}: count {count} recount {recount}"));
                }
            }
        }
    }
    outcome(bad.is_empty(), format!("{}/{cases} below 2^Q 2^-i (largest ratio {tightest:.3}){}", cases - bad.len(), first(&bad)))
}

fn sections(q: usize, m: usize) -> Vec<usize> {
    (0..m).map(|i| if i < q % m { q / m + 1 } else { q / m }).collect()
}

// ---------------------------------------------------------------------------

fn random_word_balanced(rng: &mut ChaCha8Rng, spec: &BalanceSpec) -> Option<Word> {
    let t = spec.t() as usize;
    let mut letters = Vec::new();
    for &l in spec.sections() {
        if l > t * spec.cap() {
            return None;
        }
        let mut counts = vec![0usize; t];
        for _ in 0..l {
            let open: Vec<usize> = (0..t).filter(|&c| counts[c] < spec.cap()).collect();
            let c = open[rng.gen_range(0..open.len())];
            counts[c] += 1;
            letters.push(c as u8);
        }
    }
    Some(Word::new(letters))
}

fn random_lie_string(rng: &mut ChaCha8Rng, t: u8, len: usize) -> LieString {
    LieString::new(
        (0..len)
            .map(|_| {
                let a = rng.gen_range(0..t);
                let b = (a + rng.gen_range(1..t)) % t;
                Lie::new(a, b).expect("distinct")
            })
            .collect(),
    )
}

fn shadow_bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_4);
    let mut bad = Vec::new();
    let mut done = 0;
    while done < 1000 {
        let t: u8 = rng.gen_range(2..=3);
        let k: usize = rng.gen_range(1..=2);
        let q: usize = rng.gen_range(2..=12);
        let m: usize = rng.gen_range(1..=3usize.min(q));
        let r = if rng.gen_bool(0.5) {
            r_tolerance(q, m, t, rng.gen_range(1..=2) as f64)
        } else {
            rng.gen_range(0.0..(q as f64 / t as f64))
        };
        let r = rational_from_f64(r);
        let spec = BalanceSpec::new(q, m, t, r.clone()).expect("spec");
        let Some(mut w) = random_word_balanced(&mut rng, &spec) else { continue };
        // Move up to k letters away from balance.
        let mut letters = w.letters().to_vec();
        for _ in 0..rng.gen_range(0..=k) {
            let p = rng.gen_range(0..q);
            letters[p] = rng.gen_range(0..t);
        }
        w = Word::new(letters);
        if spec.distance_to_balanced(&w).expect("distance").is_none_or(|d| d > k) {
            continue;
        }
        let mut strings: BTreeSet<LieString> = BTreeSet::new();
        strings.insert(random_lie_string(&mut rng, t, k));
        for _ in 0..rng.gen_range(0..4) {
            let j = rng.gen_range(0..=k);
            strings.insert(random_lie_string(&mut rng, t, j));
        }
        let channel = Channel::new(t, strings.iter().cloned()).expect("channel");
        let u = strings.iter().nth(rng.gen_range(0..strings.len())).expect("nonempty").clone();
        done += 1;

        let r_enc = Enclosure::exact(r.clone());
        let g = |j: usize| g_bound_enclosure(q, m, t, &r_enc, j, k);
        let h = |j: usize| h_bound_enclosure(q, m, t, &r_enc, j, k);
        let within = |lo: &Enclosure, x: usize, hi: &Enclosure| {
            let x = Enclosure::from_int(x as i64);
            lo.le(&x) == Truth::True && x.le(hi) == Truth::True
        };
        let fwd = apply_lie_string(&w, &u).len();
        let back = preimage_lie_string(&w, &u).len();
        let (sum_h, sum_g) = strings.iter().fold((Enclosure::zero(), Enclosure::zero()), |(a, b), s| {
            (&a + &h(s.len()), &b + &g(s.len()))
        });
        let sh = shadow(&w, &channel).len();
        let shp = shadow_preimage(&w, &channel).len();
        let ok = within(&h(u.len()), fwd, &g(u.len()))
            && within(&h(u.len()), back, &g(u.len()))
            && within(&sum_h, sh, &sum_g)
            && within(&sum_h, shp, &sum_g);
        if !ok {
            bad.push(format!(
                "t={t} Q={q} M={m} r={} w={w} u={u}: image {fwd} preimage {back} shadow {sh}/{shp}",
                r.to_f64().unwrap_or(f64::NAN)
            ));
        }
    }
    outcome(bad.is_empty(), format!("{} violations in 1000 cases{}", bad.len(), first(&bad)))
}

// ---------------------------------------------------------------------------

/// Balls of radius `radius` around the words are pairwise disjoint.
fn balls_disjoint(t: u8, len: usize, radius: usize, words: &[Word]) -> bool {
    let size = (t as usize).pow(len as u32);
    let mut seen = vec![false; size];
    let ball = presets::symmetric(t, radius);
    for w in words {
        for x in shadow(w, &ball) {
            let i = x.index(t);
            if seen[i] {
                return false;
            }
            seen[i] = true;
        }
    }
    true
}

fn varshamov() -> Outcome {
    let mut bad = Vec::new();
    let c = varshamov_code(2, 7, 1, &limits()).expect("code");
    let pairwise = c.words.iter().enumerate().all(|(i, a)| {
        c.words[i + 1..].iter().all(|b| a.letters().iter().zip(b.letters()).filter(|(x, y)| x != y).count() >= 3)
    });
    if c.size() < 16 || !pairwise {
        bad.push(format!("(2,7,1): size {} pairwise distance >= 3: {pairwise}", c.size()));
    }
    let mut cases = 0;
    for t in 2..=5u8 {
        for len in 1..=10usize {
            for radius in 0..=2usize {
                cases += 1;
                let wide = Limits { max_space: 1 << 24, ..limits() };
                let code = varshamov_code(t, len, radius, &wide).expect("code");
                let lower = varshamov_lower(t, len, radius).expect("prime power");
                let size = num_rational::BigRational::from_integer(code.size().into());
                let distinct = code.words.iter().collect::<BTreeSet<_>>().len() == code.size();
                if size < lower || !distinct || (radius > 0 && !balls_disjoint(t, len, radius, &code.words)) {
                    bad.push(format!("t={t} Q={len} R={radius}: size {} lower {lower}", code.size()));
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("(2,7,1) has {} words; {}/{cases} codes meet the lower bound with disjoint balls{}", c.size(), cases - bad.len(), first(&bad)),
    )
}

// ---------------------------------------------------------------------------
// Classic one-lie game.

fn classic_one_lie() -> Outcome {
    let channel = presets::symmetric(2, 1);
    let mut bad = Vec::new();
    let mut found = Vec::new();
    for q in 3..=8usize {
        let got = match optimal_n(&channel, q, Variant::Original, Play::Adaptive, &limits(), 1 << 20).expect("solve") {
            Threshold::Exact(n) => n,
            other => {
                bad.push(format!("q={q}: {other:?}"));
                continue;
            }
        };
        found.push(got);
        let sphere = (1u64 << q) / (q as u64 + 1);
        if got > sphere + 1 {
            bad.push(format!("q={q}: {got} exceeds sphere region {}", sphere + 1));
        }
        if q <= 6 {
            let oracle = oracle_maxn(&channel, q);
            if oracle != got {
                bad.push(format!("q={q}: solver {got} brute force {oracle}"));
            }
        }
    }
    outcome(bad.is_empty(), format!("maxn for q=3..8: {found:?}{}", first(&bad)))
}

// ---------------------------------------------------------------------------

fn synthesis_round_trip() -> Outcome {
    let mut bad = Vec::new();
    let (mut originals, mut pathologicals) = (0usize, 0usize);
    for (name, q_max) in [("sym1", 14), ("z1", 10), ("rz1", 10)] {
        let channel = presets::by_name(name).expect("preset");
        let grid = SweepGrid { q_max, ..SweepGrid::default() };
        for hit in sweep(&channel, &grid, &limits()).expect("sweep") {
            for (variant, holds, n) in [
                (Variant::Original, hit.original, hit.capacity_original),
                (Variant::Pathological, hit.pathological, hit.min_n_pathological),
            ] {
                if !holds {
                    continue;
                }
                match variant {
                    Variant::Original => originals += 1,
                    Variant::Pathological => pathologicals += 1,
                }
                let built = match variant {
                    Variant::Original => synth_original(&channel, n, &hit.params, &limits()),
                    Variant::Pathological => synth_pathological(&channel, n, &hit.params, &limits()),
                };
                let ok = built
                    .and_then(|s| s.verify(&channel, variant, &limits()))
                    .map(|v| v.valid && v.responses_checked == 1 << hit.params.q1)
                    .unwrap_or(false);
                if !ok {
                    bad.push(format!("{name} {variant} {:?} n={n}", hit.params));
                }
            }
        }
    }
    let fallback = fallback_suite();
    if let Err(e) = &fallback {
        bad.push(format!("fallback: {e}"));
    }
    let total = originals + pathologicals;
    outcome(
        bad.is_empty() && total > 0,
        format!(
            "{} original and {} pathological strategies verified over every first-batch response; fallback suite {}{}",
            originals,
            pathologicals,
            if fallback.is_ok() { "passes" } else { "fails" },
            first(&bad)
        ),
    )
}

/// Building blocks checked on their own at second-batch lengths up to 8.
fn fallback_suite() -> Result<(), String> {
    for k in 1..=2usize {
        for q2 in 1..=8usize {
            let Ok(d) = build_d_packing(q2, k, 2, None, &limits()) else { continue };
            let mut all = Vec::new();
            for rho in 1..=k {
                let ball = presets::symmetric(2, rho);
                for z in d.centers(rho) {
                    all.extend(shadow(z, &ball));
                }
            }
            let distinct = all.iter().collect::<BTreeSet<_>>().len();
            if distinct != all.len() {
                return Err(format!("D-packing k={k} q2={q2} overlaps"));
            }
            for rho in 1..=k {
                let expect = ball_size(q2, 2, rho).to_usize().unwrap_or(usize::MAX);
                for z in d.centers(rho) {
                    if shadow(z, &presets::symmetric(2, rho)).len() != expect {
                        return Err(format!("clipped ball at k={k} q2={q2}"));
                    }
                }
            }
        }
    }
    // Witnesses for unbalanced words: pathological partners reach w through u.
    for name in ["sym1", "z1", "rz1", "sym2", "unidir2"] {
        let channel = presets::by_name(name).expect("preset");
        let k = channel.order();
        for variant in VARIANTS {
            if !channel.is_nondegenerate(variant) {
                continue;
            }
            for len in (2 * (k - 1) + 1).max(1)..=8 {
                for w in all_words(2, len) {
                    let (u, partner) = nondegen_witness(&w, &channel, variant).map_err(|e| e.to_string())?;
                    let linked = match variant {
                        Variant::Original => apply_lie_string(&w, &u).contains(&partner),
                        Variant::Pathological => apply_lie_string(&partner, &u).contains(&w),
                    };
                    if !channel.contains(&u) || !linked {
                        return Err(format!("{name} {variant} witness for {w}"));
                    }
                }
            }
        }
    }
    // Completion with epsilon-shadows: every cell covered after synthesis.
    let channel = presets::symmetric(2, 1);
    for q2 in 2..=8usize {
        let q1 = 4;
        let params = SynthParams {
            q1,
            q2,
            m1: 1,
            m2: 1,
            eta1: 1.0,
            eta2: 1.0,
            alpha: 1,
            alpha_prime: 1u64 << q2,
        };
        let n = params.alpha_prime + params.alpha;
        let n = n * (1 << q1);
        let s = synth_pathological(&channel, n, &params, &limits()).map_err(|e| e.to_string())?;
        let v = s.verify(&channel, Variant::Pathological, &limits()).map_err(|e| e.to_string())?;
        if !v.valid {
            return Err(format!("covering incomplete at q2={q2}"));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------

fn bound_convergence() -> Outcome {
    // Smallest admissible constants: c2 > c10 > tk(k+1) sqrt(k+2)/sqrt(2).
    let floor = 2.0 * 2.0 * 3f64.sqrt() / 2f64.sqrt();
    let c10 = floor * (1.0 + 1e-9);
    let c2 = c10 * (1.0 + 1e-9);
    let constants = BoundConstants { c2: Some(c2), c10: Some(c10), ..Default::default() };
    if let Err(e) = constants.validate(2, 1, 2) {
        return outcome(false, format!("constants rejected: {e}"));
    }
    let mut ratios: Vec<(usize, Enclosure)> = Vec::new();
    for e in 6..=16u32 {
        let q = 1usize << e;
        let q2 = (q as f64).sqrt().floor() as usize;
        ratios.push((q, paul_original_ratio(q, q2, c2, DEFAULT_PREC)));
    }
    let monotone = ratios.windows(2).all(|w| w[0].1.lt(&w[1].1) == Truth::True);
    let last = &ratios.last().expect("nonempty").1;
    let high = last.gt(&Enclosure::exact(rational_from_f64(0.9))) == Truth::True;
    outcome(
        monotone && high,
        format!(
            "c2 = {c2:.6}: ratio {:.4} at q=2^6 to {:.4} at q=2^16; increasing: {monotone}; above 0.9: {high}",
            ratios[0].1.mid_f64(),
            last.mid_f64()
        ),
    )
}

// ---------------------------------------------------------------------------

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("one-batch games match packing/covering existence", one_batch_equivalence),
        ("forced-lie channel is decided by the trivial strategies", degenerate_forced_lie),
        ("unbalanced words are fewer than t^Q 2^-i", balance_count),
        ("shadow sizes lie between H and G", shadow_bounds),
        ("Varshamov construction", varshamov),
        ("classic one-lie game optimum", classic_one_lie),
        ("synthesized two-batch strategies verify", synthesis_round_trip),
        ("Paul's original threshold approaches the sphere bound", bound_convergence),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("{status} {name} [{:.1}s]: {}", start.elapsed().as_secs_f64(), o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::f64::consts::E;
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use seq_outlier::distributions::{bhattacharyya, entropy, relative_entropy, total_variation, Distribution};
use seq_outlier::exponents::{
    alpha, alpha_bar, alpha_bar_objective, alpha_objective, distinct_exponent, eta, eta_bar,
};
use seq_outlier::harness::{sweep, write_sweep_csv, DataModel, Provenance, SweepResult, TrialPlan};
use seq_outlier::hypothesis::{gl_score_typ, gl_score_univ, Hypothesis, HypothesisSpace, Model};
use seq_outlier::sequential::{Knowledge, TestConfig};
use seq_outlier::spam::{fit_quantizer, load_corpus, run_spam_experiment, FeatureSelector, Label, QuantizerStrategy, SpamExperiment};

const PRIMITIVE_TOL: f64 = 1e-10;
const GRID_STEP: f64 = 1e-3;
const GRID_TOL: f64 = 1e-5;
const GRID_INSTANCES: usize = 100;
const ALPHA_PAIRS: usize = 20;
const ALPHA_TV_FLOOR: f64 = 1e-3;
const MC_TRIALS: u64 = 5000;
const MSPRT_SLOPE_TOL: f64 = 0.30;
const NULL_CONSISTENCY: f64 = 0.95;
const STOPPING_SLACK: f64 = 1.5;
const DISTINCT_SLOPE_TOL: f64 = 0.35;
const CONVERGENCE_PAIRS: usize = 20;
const CONVERGENCE_M: usize = 200;
const CONVERGENCE_TOL: f64 = 0.02;
const IDENTITY_SAMPLES: usize = 100;
const IDENTITY_TOL: f64 = 1e-8;
const TIE_TOL: f64 = 1e-9;
const SPAM_ROWS: usize = 1813;
const SPAM_THRESHOLDS: [f64; 4] = [3.98, 4.0, 4.05, 4.1];
const SEED: u64 = 20_240_601;
const ENTRY_FLOOR: f64 = 0.05;

fn d(p: &[f64]) -> Distribution {
    Distribution::new(p.to_vec()).unwrap()
}

/// Dirichlet(1) draw shifted so that every entry is at least `ENTRY_FLOOR`.
fn random_dist(rng: &mut ChaCha8Rng, a: usize) -> Distribution {
    let e: Vec<f64> = (0..a).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    let scale = 1.0 - ENTRY_FLOOR * a as f64;
    Distribution::normalized(e.iter().map(|x| ENTRY_FLOOR + scale * x / s).collect()).unwrap()
}

fn random_pair(rng: &mut ChaCha8Rng, a: usize) -> (Distribution, Distribution) {
    (random_dist(rng, a), random_dist(rng, a))
}

/// `sum_y p ln(p/q)` term by term.
fn kl_direct(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (x, y) in p.iter().zip(q) {
        if *x > 0.0 {
            if *y == 0.0 {
                return f64::INFINITY;
            }
            total += x * (x / y).ln();
        }
    }
    total
}

fn bhatt_direct(p: &[f64], q: &[f64]) -> f64 {
    -p.iter().zip(q).map(|(x, y)| (x * y).sqrt()).sum::<f64>().ln()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn criterion_1() -> Outcome {
    let re_cases: [(&[f64], &[f64], f64); 4] = [
        (&[0.3, 0.7], &[0.3, 0.7], 0.0),
        (&[0.5, 0.5], &[0.25, 0.75], 0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln()),
        (&[1.0, 0.0], &[0.5, 0.5], 2f64.ln()),
        (&[0.5, 0.5], &[1.0, 0.0], f64::INFINITY),
    ];
    let b_cases: [(&[f64], &[f64], f64); 3] = [
        (&[0.2, 0.3, 0.5], &[0.2, 0.3, 0.5], 0.0),
        (&[0.9, 0.1], &[0.1, 0.9], -(0.6f64).ln()),
        (&[1.0, 0.0], &[0.5, 0.5], -(0.5f64.sqrt()).ln()),
    ];
    let mut worst = 0.0f64;
    let mut pass = true;
    for (p, q, hand) in re_cases {
        let oracle = kl_direct(p, q);
        let got = relative_entropy(&d(p), &d(q)).unwrap();
        if hand.is_infinite() {
            pass &= got.is_infinite() && oracle.is_infinite();
        } else {
            worst = worst.max((got - hand).abs()).max((got - oracle).abs());
        }
    }
    for (p, q, hand) in b_cases {
        let oracle = bhatt_direct(p, q);
        let got = bhattacharyya(&d(p), &d(q)).unwrap();
        worst = worst.max((got - hand).abs()).max((got - oracle).abs());
    }
    pass &= worst <= PRIMITIVE_TOL;
    Outcome {
        pass,
        detail: format!("7 examples, max abs error {worst:.2e} (tol {PRIMITIVE_TOL:e})"),
    }
}

/// Exhaustive grid minimum of `sum_i c_i D(q_i || p)` over the simplex.
fn grid_minimum(components: &[(f64, &Distribution)], grid: &[Vec<f64>]) -> f64 {
    let a = components[0].1.len();
    let neg_entropy: f64 = components
        .iter()
        .map(|(c, q)| c * q.probs().iter().filter(|x| **x > 0.0).map(|x| x * x.ln()).sum::<f64>())
        .sum();
    let mut w = vec![0.0; a];
    for (c, q) in components {
        for (wy, qy) in w.iter_mut().zip(q.probs()) {
            *wy += c * qy;
        }
    }
    let mut best = f64::INFINITY;
    for ln_p in grid {
        let cross: f64 = w.iter().zip(ln_p).map(|(wy, l)| wy * l).sum();
        best = best.min(neg_entropy - cross);
    }
    best
}

fn simplex_grid(a: usize) -> Vec<Vec<f64>> {
    let steps = (1.0 / GRID_STEP).round() as usize;
    let mut out = Vec::new();
    match a {
        2 => {
            for i in 1..steps {
                let p = i as f64 * GRID_STEP;
                out.push(vec![p.ln(), (1.0 - p).ln()]);
            }
        }
        3 => {
            for i in 1..steps {
                for j in 1..steps - i {
                    let p0 = i as f64 * GRID_STEP;
                    let p1 = j as f64 * GRID_STEP;
                    let p2 = (steps - i - j) as f64 * GRID_STEP;
                    out.push(vec![p0.ln(), p1.ln(), p2.ln()]);
                }
            }
        }
        _ => unreachable!(),
    }
    out
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let grids = [simplex_grid(2), simplex_grid(3)];
    let (m, k) = (6usize, 2usize);
    let mut worst = 0.0f64;
    for inst in 0..GRID_INSTANCES {
        let a = 2 + inst % 2;
        let grid = &grids[a - 2];
        let (mu, pi) = random_pair(&mut rng, a);
        let mut checks = Vec::new();
        for s in 1..=2usize {
            checks.push((eta(s, &mu, &pi).unwrap(), grid_minimum(&[(s as f64, &mu), (1.0, &pi)], grid)));
            let w = (m - k - s) as f64;
            checks.push((eta_bar(s, m, k, &mu, &pi).unwrap(), grid_minimum(&[(1.0, &mu), (w, &pi)], grid)));
        }
        let univ = distinct_exponent(&[mu.clone(), mu.clone()], &pi, m, k, Knowledge::Universal).unwrap();
        checks.push((univ, grid_minimum(&[(1.0, &mu), ((m - 2 * k) as f64, &pi)], grid)));
        for (closed, oracle) in checks {
            // the grid can only overshoot the true minimum
            if oracle < closed - 1e-12 {
                worst = f64::INFINITY;
            }
            worst = worst.max((closed - oracle).abs());
        }
    }
    Outcome {
        pass: worst <= GRID_TOL,
        detail: format!(
            "{GRID_INSTANCES} instances, |Y| in {{2,3}}, grid step {GRID_STEP:e}: max |closed - grid| = {worst:.3e} (tol {GRID_TOL:e})"
        ),
    }
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let mut mismatches = 0usize;
    let mut literal_worst = 0.0f64;
    let mut nonpositive = 0usize;
    let mut cases = 0usize;
    for pair in 0..ALPHA_PAIRS {
        let (mu, pi) = random_pair(&mut rng, 2 + pair % 2);
        let tv = total_variation(&mu, &pi).unwrap();
        for m in 3..=8usize {
            for k in (1..).take_while(|k| 2 * k < m) {
                for s in 1..=k {
                    cases += 1;
                    let truth: Vec<usize> = (0..s).collect();
                    let mut sub_a = f64::INFINITY;
                    let mut sub_ab = f64::INFINITY;
                    for mask in 1u32..(1 << m) {
                        let members: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
                        if members.len() > k || members == truth {
                            continue;
                        }
                        let a = members.iter().filter(|&&i| i < s).count();
                        let b = members.len() - a;
                        let va = alpha_objective(a, b, s, &mu, &pi);
                        let vb = alpha_bar_objective(a, b, s, m, &mu, &pi);
                        let (la, lb) = literal_objectives(&members, s, m, &mu, &pi);
                        literal_worst = literal_worst.max((va - la).abs()).max((vb - lb).abs());
                        sub_a = sub_a.min(va);
                        sub_ab = sub_ab.min(vb);
                    }
                    let pa = alpha(s, m, k, &mu, &pi).unwrap();
                    let pb = alpha_bar(s, m, k, &mu, &pi).unwrap();
                    if pa != sub_a || pb != sub_ab {
                        mismatches += 1;
                    }
                    if tv > ALPHA_TV_FLOOR && !(pa > 0.0 && pb > 0.0) {
                        nonpositive += 1;
                    }
                }
            }
        }
    }
    Outcome {
        pass: mismatches == 0 && nonpositive == 0 && literal_worst < 1e-12,
        detail: format!(
            "{cases} (pair, M, K, |S|) cases: {mismatches} reduction mismatches, {nonpositive} non-positive, per-subset objective error {literal_worst:.1e}"
        ),
    }
}

/// Objectives evaluated sequence by sequence for competitor `members`
/// when the truth is `{0, .., s-1}`.
fn literal_objectives(members: &[usize], s: usize, m: usize, mu: &Distribution, pi: &Distribution) -> (f64, f64) {
    let law = |i: usize| if i < s { mu.probs() } else { pi.probs() };
    let avg = |idx: &[usize]| -> Vec<f64> {
        let mut acc = vec![0.0; mu.len()];
        for &i in idx {
            for (a, p) in acc.iter_mut().zip(law(i)) {
                *a += p / idx.len() as f64;
            }
        }
        acc
    };
    let rest: Vec<usize> = (0..m).filter(|i| !members.contains(i)).collect();
    let m1 = avg(members);
    let m2 = avg(&rest);
    let inside: f64 = members.iter().map(|&i| kl_direct(law(i), &m1)).sum();
    let known: f64 = rest.iter().map(|&j| kl_direct(law(j), pi.probs())).sum();
    let pooled: f64 = rest.iter().map(|&j| kl_direct(law(j), &m2)).sum();
    (inside + known, inside + pooled)
}

fn largest_positive(r: &SweepResult) -> Option<&seq_outlier::harness::ThresholdResult> {
    r.results.iter().rev().find(|t| t.p_max > 0.0)
}

fn criterion_4() -> Outcome {
    let mu = d(&[0.8, 0.2]);
    let pi = d(&[0.2, 0.8]);
    let ts = [E.powi(2), E.powi(4), E.powi(6)];
    let config = TestConfig::universal(5, 2, Model::Identical, 2, ts[0]).with_mu_pi(mu.clone(), pi.clone());
    let plan = TrialPlan::new(config, DataModel::Identical { mu: mu.clone(), pi: pi.clone() }, MC_TRIALS, SEED + 4);
    let r = sweep(&plan, &ts, 1).unwrap();
    let forward = relative_entropy(&mu, &pi).unwrap();
    let backward = relative_entropy(&pi, &mu).unwrap();
    let Some(at) = largest_positive(&r) else {
        return Outcome { pass: false, detail: "no threshold with positive error rate".into() };
    };
    let full = at.class(2).unwrap().slope;
    let null = at.class(0).unwrap().slope;
    let rel_full = (full - forward).abs() / forward;
    let rel_null = (null - backward).abs() / backward;
    let trail: Vec<String> = r
        .results
        .iter()
        .map(|t| format!("T=e^{:.0}: P={:.4} s2={:.3} s0={:.3}", t.threshold.ln(), t.p_max, t.class(2).unwrap().slope, t.class(0).unwrap().slope))
        .collect();
    Outcome {
        pass: rel_full <= MSPRT_SLOPE_TOL && rel_null <= MSPRT_SLOPE_TOL,
        detail: format!(
            "at T=e^{:.0}: slope|S|=2 {full:.4} vs {forward:.4} ({:.1}% off), slope null {null:.4} vs {backward:.4} ({:.1}% off), tol {:.0}% [{}]",
            at.threshold.ln(),
            100.0 * rel_full,
            100.0 * rel_null,
            100.0 * MSPRT_SLOPE_TOL,
            trail.join("; ")
        ),
    }
}

fn criterion_5() -> Outcome {
    let mu = d(&[0.8, 0.2]);
    let pi = d(&[0.2, 0.8]);
    let ts = [E.powi(2), E.powi(4), E.powi(6)];
    let config = TestConfig::universal(5, 2, Model::Identical, 2, ts[0]);
    let plan = TrialPlan::new(config, DataModel::Identical { mu: mu.clone(), pi: pi.clone() }, MC_TRIALS, SEED + 5);
    let r = sweep(&plan, &ts, 1).unwrap();
    let last = r.results.last().unwrap();
    let p: Vec<f64> = r.results.iter().map(|t| t.p_max).collect();
    let a = p.windows(2).all(|w| w[1] < w[0]);
    let null_rate = 1.0 - last.stats(&Hypothesis::null()).unwrap().error_rate;
    let b = null_rate >= NULL_CONSISTENCY;
    let (s1, s2) = (last.class(1).unwrap(), last.class(2).unwrap());
    let c = s2.slope > s1.slope;
    let mut dd = true;
    let mut d_detail = Vec::new();
    for class in [s1, s2] {
        let ab = alpha_bar(class.size, 5, 2, &mu, &pi).unwrap();
        let bound = STOPPING_SLACK * last.threshold.ln() / ab;
        dd &= class.mean_n <= bound;
        d_detail.push(format!("|S|={}: E[N]={:.1} vs {:.1}", class.size, class.mean_n, bound));
    }
    let mark = |x: bool| if x { "ok" } else { "FAIL" };
    Outcome {
        pass: a && b && c && dd,
        detail: format!(
            "(a) P_max {:?} strictly decreasing: {}; (b) null-correct {null_rate:.4} >= {NULL_CONSISTENCY}: {}; (c) slope|S|=2 {:.5} > slope|S|=1 {:.5}{}: {}; (d) {}: {}",
            p,
            mark(a),
            mark(b),
            s2.slope,
            s1.slope,
            if last.rule_of_three { " (rule-of-three lower bounds)" } else { "" },
            mark(c),
            d_detail.join(", "),
            mark(dd)
        ),
    }
}

fn criterion_6() -> Outcome {
    let mus = vec![d(&[0.9, 0.1]), d(&[0.7, 0.3])];
    let pi = d(&[0.3, 0.7]);
    let ts = [E.powi(2), E.powi(4), E.powi(6)];
    let target = distinct_exponent(&mus, &pi, 6, 2, Knowledge::PiKnown).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for knowledge in [Knowledge::PiKnown, Knowledge::Universal] {
        let mut config = TestConfig::universal(6, 2, Model::Distinct, 2, ts[0]);
        if knowledge == Knowledge::PiKnown {
            config = config.with_pi(pi.clone());
        }
        let plan = TrialPlan::new(config, DataModel::Distinct { mus: mus.clone(), pi: pi.clone() }, MC_TRIALS, SEED + 6);
        let r = sweep(&plan, &ts, 1).unwrap();
        let truncations: f64 = r.results.iter().flat_map(|t| &t.hypotheses).map(|s| s.truncation_rate).sum();
        let p: Vec<f64> = r.results.iter().map(|t| t.p_max).collect();
        let monotone = p.windows(2).all(|w| w[1] <= w[0]);
        pass &= truncations == 0.0 && monotone;
        let last = r.results.last().unwrap();
        let slope = last.class(2).unwrap().slope;
        let mut note = format!(
            "{knowledge:?}: truncations {truncations}, P_max {p:?} non-increasing {monotone}, slope {slope:.4}{}",
            if last.rule_of_three { " (rule-of-three lower bound)" } else { "" }
        );
        if knowledge == Knowledge::PiKnown {
            let rel = (slope - target).abs() / target;
            pass &= rel <= DISTINCT_SLOPE_TOL;
            note.push_str(&format!(" vs {target:.4} ({:.1}% off, tol {:.0}%)", 100.0 * rel, 100.0 * DISTINCT_SLOPE_TOL));
        }
        parts.push(note);
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    let k = 2usize;
    let mut worst_gap = 0.0f64;
    let mut monotone = true;
    for pair in 0..CONVERGENCE_PAIRS {
        let a = 2 + pair % 2;
        let (mu, pi) = random_pair(&mut rng, a);
        let mu2 = random_dist(&mut rng, a);
        let target = relative_entropy(&mu, &pi).unwrap();
        let mus = [mu.clone(), mu2];
        let known = distinct_exponent(&mus, &pi, 5, k, Knowledge::PiKnown).unwrap();
        let mut prev = (0.0, 0.0);
        for m in 5..=CONVERGENCE_M {
            let e = eta_bar(k, m, k, &mu, &pi).unwrap();
            let u = distinct_exponent(&mus, &pi, m, k, Knowledge::Universal).unwrap();
            monotone &= e >= prev.0 && u >= prev.1 && e <= target && u <= known;
            prev = (e, u);
        }
        worst_gap = worst_gap.max((target - prev.0) / target).max((known - prev.1) / known);
    }
    Outcome {
        pass: monotone && worst_gap <= CONVERGENCE_TOL,
        detail: format!(
            "{CONVERGENCE_PAIRS} pairs: monotone {monotone}, max relative deficit at M={CONVERGENCE_M} {:.3}% (tol {:.0}%)",
            100.0 * worst_gap,
            100.0 * CONVERGENCE_TOL
        ),
    }
}

fn first_min(values: &[f64]) -> usize {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    values.iter().position(|&v| v <= min + TIE_TOL).unwrap()
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 8);
    let mut worst = 0.0f64;
    let mut disagreements = 0usize;
    for _ in 0..IDENTITY_SAMPLES {
        let m = rng.random_range(3..=5usize);
        let a = rng.random_range(2..=4usize);
        let n = rng.random_range(1..=20usize);
        let samples: Vec<Vec<usize>> = (0..m).map(|_| (0..n).map(|_| rng.random_range(0..a)).collect()).collect();
        let pi = random_dist(&mut rng, a);
        let gammas: Vec<Distribution> = samples
            .iter()
            .map(|s| {
                let mut c = vec![0.0; a];
                for &y in s {
                    c[y] += 1.0;
                }
                Distribution::normalized(c).unwrap()
            })
            .collect();
        let h_sum: f64 = gammas.iter().map(entropy).sum();
        let space = HypothesisSpace::enumerate(m, (m - 1) / 2, Model::Identical).unwrap();
        let mut raw_typ = Vec::new();
        let mut raw_univ = Vec::new();
        let mut sc_typ = Vec::new();
        let mut sc_univ = Vec::new();
        for s in space.hypotheses().iter().filter(|s| !s.is_null()) {
            let avg = |inside: bool| -> Vec<f64> {
                let idx: Vec<usize> = (0..m).filter(|i| s.contains(*i) == inside).collect();
                let mut acc = vec![0.0; a];
                for &i in &idx {
                    for &y in &samples[i] {
                        acc[y] += 1.0 / (idx.len() * n) as f64;
                    }
                }
                acc
            };
            let (mu_hat, pi_hat) = (avg(true), avg(false));
            let product = |outside: &[f64]| -> f64 {
                let mut p = 1.0f64;
                for (i, seq) in samples.iter().enumerate() {
                    for &y in seq {
                        p *= if s.contains(i) { mu_hat[y] } else { outside[y] };
                    }
                }
                p.ln()
            };
            let lt = product(pi.probs());
            let lu = product(&pi_hat);
            let st = gl_score_typ(s, &gammas, &pi).unwrap();
            let su = gl_score_univ(s, &gammas).unwrap();
            worst = worst
                .max((lt + n as f64 * (h_sum + st)).abs())
                .max((lu + n as f64 * (h_sum + su)).abs());
            raw_typ.push(-lt);
            raw_univ.push(-lu);
            sc_typ.push(st);
            sc_univ.push(su);
        }
        if first_min(&raw_typ) != first_min(&sc_typ) || first_min(&raw_univ) != first_min(&sc_univ) {
            disagreements += 1;
        }
    }
    Outcome {
        pass: worst <= IDENTITY_TOL && disagreements == 0,
        detail: format!(
            "{IDENTITY_SAMPLES} samples: max |ln GL + n(H + score)| = {worst:.2e} (tol {IDENTITY_TOL:e}), argmax/argmin disagreements {disagreements}"
        ),
    }
}

fn spambase_path() -> PathBuf {
    std::env::var_os("SPAMBASE_PATH")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/spambase.csv"))
}

fn criterion_9() -> Outcome {
    let path = spambase_path();
    let corpus = match load_corpus(&path, &FeatureSelector::default()) {
        Ok(c) => c,
        Err(e) => return Outcome { pass: false, detail: format!("cannot load {}: {e}", path.display()) },
    };
    let spam_rows = corpus.count(Label::Spam);
    let rows_ok = spam_rows == SPAM_ROWS;
    let quantizer = fit_quantizer(&corpus, 5, QuantizerStrategy::ZeroInflated).unwrap();
    let experiment = SpamExperiment {
        thresholds: SPAM_THRESHOLDS.to_vec(),
        trials_per_hypothesis: MC_TRIALS,
        seed: 7,
        strategy: QuantizerStrategy::ZeroInflated,
        swap_pools: false,
    };
    let out = run_spam_experiment(&corpus, &quantizer, &experiment, 1).unwrap();
    let s1: Vec<f64> = out.sweep.results.iter().map(|r| r.class(1).unwrap().slope).collect();
    let s2: Vec<f64> = out.sweep.results.iter().map(|r| r.class(2).unwrap().slope).collect();
    let ordered = s1.iter().zip(&s2).all(|(a, b)| b > a);
    let increasing = s1.windows(2).all(|w| w[1] > w[0]) && s2.windows(2).all(|w| w[1] > w[0]);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ");
    Outcome {
        pass: rows_ok && ordered && increasing,
        detail: format!(
            "{}: {} rows, {spam_rows} spam (expected {SPAM_ROWS}): {}; slopes |S|=1 [{}] |S|=2 [{}]: |S|=2 > |S|=1 {}, strictly increasing {}",
            path.display(),
            corpus.len(),
            if rows_ok { "ok" } else { "FAIL" },
            fmt(&s1),
            fmt(&s2),
            ordered,
            increasing
        ),
    }
}

fn criterion_10() -> Outcome {
    let mu = d(&[0.7, 0.3]);
    let pi = d(&[0.3, 0.7]);
    let config = TestConfig::universal(5, 2, Model::Identical, 2, 10.0);
    let plan = TrialPlan::new(config, DataModel::Identical { mu, pi }, 60, SEED + 10);
    let ts = [10.0, 100.0, 1000.0];
    let prov = Provenance::new(plan.seed, serde_json::to_value(&plan).unwrap());
    let mut outputs = Vec::new();
    for jobs in [1usize, 2, 4, 1] {
        let r = sweep(&plan, &ts, jobs).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &r, &prov).unwrap();
        outputs.push(buf);
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    Outcome {
        pass: same,
        detail: format!("jobs 1,2,4,1: {} byte CSVs identical {same}", outputs[0].len()),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("distribution primitives", criterion_1),
        ("simplex minimizers vs grid", criterion_2),
        ("alpha / alpha_bar reduction", criterion_3),
        ("MSPRT slopes", criterion_4),
        ("universal identical-model test", criterion_5),
        ("distinct-model tests", criterion_6),
        ("convergence in M", criterion_7),
        ("GL / likelihood identity", criterion_8),
        ("spam experiment", criterion_9),
        ("determinism across jobs", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<32} {}  ({:.1}s) {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {} passed, {} failed", criteria.len() - failed, failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

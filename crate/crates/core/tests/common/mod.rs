//! Generators and reference implementations shared by the integration tests
//! and the acceptance runner. Nothing in here calls into the library for the
//! value it is checking.

#![allow(dead_code)]

use gamwb_core::data::{Column, Dataset};
use gamwb_core::model::{CategoricalShape, ContinuousShape, GamModel, Link, Shape, Task};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn continuous(name: &str, edges: Vec<f64>, scores: Vec<f64>, counts: Vec<u64>) -> Shape {
    Shape::Continuous(ContinuousShape::new(name, edges, scores, counts, None).unwrap())
}

pub fn categorical(name: &str, levels: &[&str], scores: Vec<f64>, counts: Vec<u64>) -> Shape {
    let levels = levels.iter().map(|s| s.to_string()).collect();
    Shape::Categorical(CategoricalShape::new(name, levels, scores, counts, None).unwrap())
}

fn random_edges(rng: &mut ChaCha8Rng, bins: usize) -> Vec<f64> {
    let mut x: f64 = rng.random_range(-50.0..50.0);
    (0..bins)
        .map(|_| {
            let e = x;
            x += rng.random_range(0.05..10.0);
            e
        })
        .collect()
}

fn random_counts(rng: &mut ChaCha8Rng, n: usize) -> Vec<u64> {
    let mut counts: Vec<u64> = (0..n)
        .map(|_| if rng.random_bool(0.15) { 0 } else { rng.random_range(1..500) })
        .collect();
    if counts.iter().all(|&c| c == 0) {
        counts[rng.random_range(0..n)] = 1;
    }
    counts
}

/// Random model with up to `max_features` features of up to `max_bins`
/// bins each. Every feature carries some training mass.
pub fn random_model(rng: &mut ChaCha8Rng, task: Task, max_features: usize, max_bins: usize) -> GamModel {
    let features = rng.random_range(1..=max_features);
    let shapes = (0..features)
        .map(|f| {
            let n = rng.random_range(1..=max_bins);
            let scores: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let counts = random_counts(rng, n);
            if rng.random_bool(0.5) {
                Shape::Continuous(
                    ContinuousShape::new(format!("c{f}"), random_edges(rng, n), scores, counts, None)
                        .unwrap(),
                )
            } else {
                let levels = (0..n).map(|i| format!("L{i}")).collect();
                Shape::Categorical(
                    CategoricalShape::new(format!("k{f}"), levels, scores, counts, None).unwrap(),
                )
            }
        })
        .collect();
    GamModel::new(task, Link::for_task(task), rng.random_range(-2.0..2.0), shapes, vec![]).unwrap()
}

/// Column values covering every bin (and a margin below the first edge).
/// Categorical columns draw only model levels unless `unknown_rate > 0`.
pub fn random_columns(
    rng: &mut ChaCha8Rng,
    model: &GamModel,
    n: usize,
    unknown_rate: f64,
) -> Vec<(String, Column)> {
    model
        .shapes()
        .iter()
        .map(|shape| {
            let col = match shape {
                Shape::Continuous(s) => {
                    let lo = s.bin_edges()[0] - 1.0;
                    let hi = s.bin_edges()[s.bin_edges().len() - 1] + 5.0;
                    Column::Continuous((0..n).map(|_| rng.random_range(lo..hi)).collect())
                }
                Shape::Categorical(s) => Column::Categorical(
                    (0..n)
                        .map(|_| {
                            if unknown_rate > 0.0 && rng.random_bool(unknown_rate) {
                                "??".to_string()
                            } else {
                                s.levels().choose(rng).unwrap().clone()
                            }
                        })
                        .collect(),
                ),
            };
            (shape.name().to_string(), col)
        })
        .collect()
}

pub fn random_labels(rng: &mut ChaCha8Rng, task: Task, n: usize) -> Vec<f64> {
    match task {
        Task::Classification => (0..n).map(|_| if rng.random_bool(0.4) { 1.0 } else { 0.0 }).collect(),
        Task::Regression => (0..n).map(|_| rng.random_range(-5.0..5.0)).collect(),
    }
}

pub fn random_dataset(rng: &mut ChaCha8Rng, model: &GamModel, n: usize) -> Dataset {
    let columns = random_columns(rng, model, n, 0.0);
    let labels = random_labels(rng, model.task(), n);
    Dataset::new(model.task(), columns, labels).unwrap()
}

/// Largest `i` with `edges[i] <= v`, clamped at 0, by linear scan.
pub fn scan_bin(edges: &[f64], v: f64) -> usize {
    let mut bin = 0;
    for (i, &e) in edges.iter().enumerate() {
        if e <= v {
            bin = i;
        }
    }
    bin
}

/// Pairwise ROC AUC: P(s+ > s-) + 0.5 P(s+ = s-).
pub fn pairwise_auc(scores: &[f64], labels: &[f64]) -> Option<f64> {
    let pos: Vec<f64> = scores.iter().zip(labels).filter(|(_, &y)| y == 1.0).map(|(&s, _)| s).collect();
    let neg: Vec<f64> = scores.iter().zip(labels).filter(|(_, &y)| y == 0.0).map(|(&s, _)| s).collect();
    if pos.is_empty() || neg.is_empty() {
        return None;
    }
    let mut wins = 0u64; // doubled to stay integral
    for &p in &pos {
        for &q in &neg {
            wins += if p > q { 2 } else if p == q { 1 } else { 0 };
        }
    }
    Some(wins as f64 / (2.0 * pos.len() as f64 * neg.len() as f64))
}

pub const MAX_BRUTE_FORCE: usize = 12;

/// Optimal non-decreasing fit by enumerating every partition into
/// contiguous blocks. Returns (minimal SSE, fitted values at the optimum);
/// zero-weight positions take their block's value.
pub fn brute_force_isotonic(values: &[f64], weights: &[f64]) -> (f64, Vec<f64>) {
    let n = values.len();
    let uniform = weights.iter().all(|&w| w == 0.0);
    let w = |i: usize| if uniform { 1.0 } else { weights[i] };
    // prefix sums of w, w*v, v and w*v*v
    assert!(n <= MAX_BRUTE_FORCE, "brute force is limited to {MAX_BRUTE_FORCE} values");
    let mut pw = [0.0; MAX_BRUTE_FORCE + 1];
    let mut pwv = [0.0; MAX_BRUTE_FORCE + 1];
    let mut pv = [0.0; MAX_BRUTE_FORCE + 1];
    let mut pwvv = [0.0; MAX_BRUTE_FORCE + 1];
    for i in 0..n {
        pw[i + 1] = pw[i] + w(i);
        pwv[i + 1] = pwv[i] + w(i) * values[i];
        pv[i + 1] = pv[i] + values[i];
        pwvv[i + 1] = pwvv[i] + w(i) * values[i] * values[i];
    }
    let block_mean = |a: usize, b: usize| {
        let sw = pw[b] - pw[a];
        if sw > 0.0 {
            ((pwv[b] - pwv[a]) / sw, true)
        } else {
            ((pv[b] - pv[a]) / (b - a) as f64, false)
        }
    };
    let mut best = (f64::INFINITY, 0u32);
    // bit k of `cuts` set: a block ends after position k
    'partitions: for cuts in 0u32..(1 << (n - 1)) {
        let mut start = 0;
        let mut last_mean = f64::NEG_INFINITY;
        let mut sse = 0.0;
        for end in 1..=n {
            if end < n && cuts & (1 << (end - 1)) == 0 {
                continue;
            }
            let (mean, massive) = block_mean(start, end);
            if massive {
                if mean < last_mean {
                    continue 'partitions;
                }
                last_mean = mean;
                let sw = pw[end] - pw[start];
                sse += (pwvv[end] - pwvv[start]) - 2.0 * mean * (pwv[end] - pwv[start]) + mean * mean * sw;
            }
            start = end;
        }
        if sse < best.0 - 1e-12 {
            best = (sse, cuts);
        }
    }
    let mut fit = vec![0.0; n];
    let mut start = 0;
    for end in 1..=n {
        if end < n && best.1 & (1 << (end - 1)) == 0 {
            continue;
        }
        let (mean, _) = block_mean(start, end);
        fit[start..end].fill(mean);
        start = end;
    }
    (weighted_sse(values, weights, &fit), fit)
}

pub fn weighted_sse(values: &[f64], weights: &[f64], fit: &[f64]) -> f64 {
    let uniform = weights.iter().all(|&w| w == 0.0);
    values
        .iter()
        .zip(weights)
        .zip(fit)
        .map(|((v, w), r)| if uniform { 1.0 } else { *w } * (v - r) * (v - r))
        .sum()
}

/// Plain-text SHA-256, written out from the FIPS 180-4 description so commit
/// ids can be checked without the hashing crate the library uses.
pub fn sha256(message: &[u8]) -> [u8; 32] {
    const K: [u32; 64] = [
        0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
        0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
        0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
        0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
        0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
        0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
        0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
        0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
        0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
        0xc67178f2,
    ];
    let mut h: [u32; 8] = [
        0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a, 0x510e527f, 0x9b05688c, 0x1f83d9ab,
        0x5be0cd19,
    ];
    let mut data = message.to_vec();
    let bit_len = (message.len() as u64) * 8;
    data.push(0x80);
    while data.len() % 64 != 56 {
        data.push(0);
    }
    data.extend_from_slice(&bit_len.to_be_bytes());
    for chunk in data.chunks(64) {
        let mut w = [0u32; 64];
        for i in 0..16 {
            w[i] = u32::from_be_bytes(chunk[4 * i..4 * i + 4].try_into().unwrap());
        }
        for i in 16..64 {
            let s0 = w[i - 15].rotate_right(7) ^ w[i - 15].rotate_right(18) ^ (w[i - 15] >> 3);
            let s1 = w[i - 2].rotate_right(17) ^ w[i - 2].rotate_right(19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16].wrapping_add(s0).wrapping_add(w[i - 7]).wrapping_add(s1);
        }
        let [mut a, mut b, mut c, mut d, mut e, mut f, mut g, mut hh] = h;
        for i in 0..64 {
            let s1 = e.rotate_right(6) ^ e.rotate_right(11) ^ e.rotate_right(25);
            let ch = (e & f) ^ (!e & g);
            let t1 = hh.wrapping_add(s1).wrapping_add(ch).wrapping_add(K[i]).wrapping_add(w[i]);
            let s0 = a.rotate_right(2) ^ a.rotate_right(13) ^ a.rotate_right(22);
            let maj = (a & b) ^ (a & c) ^ (b & c);
            let t2 = s0.wrapping_add(maj);
            hh = g;
            g = f;
            f = e;
            e = d.wrapping_add(t1);
            d = c;
            c = b;
            b = a;
            a = t1.wrapping_add(t2);
        }
        for (x, y) in h.iter_mut().zip([a, b, c, d, e, f, g, hh]) {
            *x = x.wrapping_add(y);
        }
    }
    let mut out = [0u8; 32];
    for (i, word) in h.iter().enumerate() {
        out[4 * i..4 * i + 4].copy_from_slice(&word.to_be_bytes());
    }
    out
}

pub fn short_hex(digest: &[u8]) -> String {
    digest[..4].iter().map(|b| format!("{b:02x}")).collect()
}

/// A small valid model document used as the base for malformed variants.
pub const VALID_MODEL: &str = r#"{"version":1,"task":"classification","link":"logit","intercept":-0.5,
 "features":[
  {"name":"age","type":"continuous","bin_edges":[18,30,45,65,80],"scores":[-0.4,-0.1,0.2,0.5,0.9],"counts":[120,200,180,90,30]},
  {"name":"asthma","type":"categorical","levels":["yes","no"],"scores":[-0.2,0.05],"counts":[40,580],"stderr":[0.03,null]}],
 "interactions":[
  {"feature_i":"age","feature_j":"asthma","axis_i":{"bin_edges":[18,50]},"axis_j":{"levels":["yes","no"]},
   "score_matrix":[[0.01,-0.01],[0.02,0.0]]}]}"#;

/// Malformed documents paired with the JSON path their diagnostic must name.
/// Each is the valid document with one JSON pointer replaced or removed.
pub fn malformed_corpus() -> Vec<(&'static str, serde_json::Value, &'static str)> {
    use serde_json::json;
    let base: serde_json::Value = serde_json::from_str(VALID_MODEL).unwrap();
    let set = |ptr: &str, v: serde_json::Value| {
        let mut doc = base.clone();
        *doc.pointer_mut(ptr).unwrap() = v;
        doc
    };
    let remove = |parent: &str, key: &str| {
        let mut doc = base.clone();
        doc.pointer_mut(parent).unwrap().as_object_mut().unwrap().remove(key);
        doc
    };
    let add = |parent: &str, key: &str, v: serde_json::Value| {
        let mut doc = base.clone();
        doc.pointer_mut(parent).unwrap().as_object_mut().unwrap().insert(key.into(), v);
        doc
    };
    vec![
        ("missing version", remove("", "version"), "version"),
        ("future version", set("/version", json!(2)), "version"),
        ("unknown task", set("/task", json!("ranking")), "task"),
        ("link mismatch", set("/link", json!("identity")), "link"),
        ("string intercept", set("/intercept", json!("0")), "intercept"),
        ("unknown top-level key", add("", "bias", json!(0)), "bias"),
        ("features not an array", set("/features", json!({})), "features"),
        ("no features", set("/features", json!([])), "features"),
        ("missing name", remove("/features/0", "name"), "features[0].name"),
        ("bad feature type", set("/features/1/type", json!("ordinal")), "features[1].type"),
        ("unsorted edges", set("/features/0/bin_edges/2", json!(10)), "features[0].bin_edges"),
        ("string edge", set("/features/0/bin_edges/1", json!("30")), "features[0].bin_edges[1]"),
        ("short scores", set("/features/0/scores", json!([0, 0])), "features[0].scores"),
        ("short counts", set("/features/1/counts", json!([1])), "features[1].counts"),
        ("negative count", set("/features/0/counts/3", json!(-4)), "features[0].counts[3]"),
        ("fractional count", set("/features/0/counts/0", json!(1.5)), "features[0].counts[0]"),
        ("null score", set("/features/1/scores/0", json!(null)), "features[1].scores[0]"),
        ("duplicate level", set("/features/1/levels/1", json!("yes")), "features[1].levels[1]"),
        ("negative stderr", set("/features/1/stderr/0", json!(-1)), "features[1].stderr[0]"),
        ("short stderr", set("/features/1/stderr", json!([0.1])), "features[1].stderr"),
        ("duplicate feature", set("/features/1/name", json!("age")), "features[1].name"),
        ("unknown feature key", add("/features/0", "monotone", json!(true)), "features[0].monotone"),
        ("interaction unknown feature", set("/interactions/0/feature_j", json!("bmi")), "interactions[0].feature_j"),
        ("interaction axis kind", set("/interactions/0/axis_j", json!({"bin_edges": [0]})), "interactions[0].axis_j"),
        ("interaction axis both keys", set("/interactions/0/axis_i", json!({"bin_edges": [0], "levels": ["a"]})), "interactions[0].axis_i"),
        ("interaction ragged matrix", set("/interactions/0/score_matrix/1", json!([0.0])), "interactions[0].score_matrix[1]"),
        ("interaction string score", set("/interactions/0/score_matrix/0/1", json!("x")), "interactions[0].score_matrix[0][1]"),
    ]
}

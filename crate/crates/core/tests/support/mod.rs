//! Independent reference implementations used as test oracles. Nothing
//! here calls into the code under test except for plain data types.
#![allow(dead_code)]

use std::collections::HashMap;

/// Minimal RFC-4180 reader: quoted fields, doubled quotes, embedded commas
/// and line breaks. Returns raw records including the header.
pub fn parse_rfc4180(text: &str) -> Vec<Vec<String>> {
    let mut records = Vec::new();
    let mut record = Vec::new();
    let mut field = String::new();
    let mut in_quotes = false;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if in_quotes {
            if c == '"' {
                if chars.peek() == Some(&'"') {
                    field.push('"');
                    chars.next();
                } else {
                    in_quotes = false;
                }
            } else {
                field.push(c);
            }
            continue;
        }
        match c {
            '"' => in_quotes = true,
            ',' => record.push(std::mem::take(&mut field)),
            '\r' => {}
            '\n' => {
                record.push(std::mem::take(&mut field));
                records.push(std::mem::take(&mut record));
            }
            _ => field.push(c),
        }
    }
    if !field.is_empty() || !record.is_empty() {
        record.push(field);
        records.push(record);
    }
    records
}

/// Survivors of "drop later exact copies" by pairwise comparison.
pub fn dedup_oracle(bodies: &[String]) -> Vec<usize> {
    (0..bodies.len()).filter(|&i| (0..i).all(|j| bodies[j] != bodies[i])).collect()
}

/// Per-document drop reason under inclusive bounds, first failing rule wins.
/// 0 = kept, 1 = short, 2 = long, 3 = few sentences, 4 = many sentences.
pub fn threshold_oracle(body: &str, bounds: (usize, usize, usize, usize)) -> u8 {
    let chars = body.chars().count();
    let dots = body.chars().filter(|&c| c == '.').count();
    let (min_c, max_c, min_s, max_s) = bounds;
    if chars < min_c {
        1
    } else if chars > max_c {
        2
    } else if dots < min_s {
        3
    } else if dots > max_s {
        4
    } else {
        0
    }
}

/// mean, sample std, min, p25, p50, p75, max by naive loops. Percentiles are
/// computed by locating the two order statistics around rank q(n-1) with a
/// counting search instead of a sort.
pub fn describe_oracle(values: &[f64]) -> [f64; 7] {
    let n = values.len();
    let mut mean = 0.0;
    for v in values {
        mean += v;
    }
    mean /= n as f64;
    let mut ss = 0.0;
    for v in values {
        ss += (v - mean) * (v - mean);
    }
    let std = if n > 1 { (ss / (n as f64 - 1.0)).sqrt() } else { 0.0 };
    let kth = |k: usize| -> f64 {
        // the value v with #{< v} <= k < #{<= v}
        for &v in values {
            let below = values.iter().filter(|&&w| w < v).count();
            let at_most = values.iter().filter(|&&w| w <= v).count();
            if below <= k && k < at_most {
                return v;
            }
        }
        unreachable!()
    };
    let pct = |q: f64| {
        let pos = q * (n - 1) as f64;
        let lo = pos.floor();
        let a = kth(lo as usize);
        let b = kth(pos.ceil() as usize);
        a + (b - a) * (pos - lo)
    };
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    [mean, std, min, pct(0.25), pct(0.5), pct(0.75), max]
}

/// Multinomial NB log-joint for every class by direct Bayes-rule arithmetic:
/// P(c) * prod_t P(t | c)^x_t, with each occurrence multiplied in one at a
/// time, then logged. `docs` are (class, term-count vector) pairs.
pub fn nb_log_joint_oracle(docs: &[(usize, Vec<u32>)], n_classes: usize, vocab: usize, alpha: f64, x: &[u32]) -> Vec<f64> {
    let n = docs.len() as f64;
    (0..n_classes)
        .map(|c| {
            let mut term_totals = vec![0.0; vocab];
            let mut class_docs = 0.0;
            for (label, counts) in docs {
                if *label == c {
                    class_docs += 1.0;
                    for t in 0..vocab {
                        term_totals[t] += counts[t] as f64;
                    }
                }
            }
            let total: f64 = term_totals.iter().sum();
            let mut joint = class_docs / n;
            let mut log_acc = 0.0;
            for t in 0..vocab {
                let p = (term_totals[t] + alpha) / (total + alpha * vocab as f64);
                for _ in 0..x[t] {
                    joint *= p;
                    // renormalize to avoid underflow on longer inputs
                    if joint < 1e-200 {
                        log_acc += joint.ln();
                        joint = 1.0;
                    }
                }
            }
            log_acc + joint.ln()
        })
        .collect()
}

/// Index of the maximum, first wins.
pub fn first_argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for i in 0..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

/// Central finite-difference gradient of `f` at `x`.
pub fn central_difference<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let up = f(&probe);
            probe[i] = orig - h;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Largest per-component relative error, with magnitudes below `floor`
/// compared absolutely.
pub fn max_relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(floor)).fold(0.0, f64::max)
}

/// Word counts by dictionary.
pub fn tally<'a>(words: impl IntoIterator<Item = &'a str>) -> HashMap<&'a str, usize> {
    let mut m = HashMap::new();
    for w in words {
        *m.entry(w).or_insert(0) += 1;
    }
    m
}

/// The 6x6 confusion matrix of the reference SVM run (rows true, columns
/// predicted).
pub const REFERENCE_MATRIX: [[u64; 6]; 6] = [
    [584, 2, 7, 2, 7, 4],
    [4, 128, 1, 0, 2, 2],
    [7, 0, 684, 1, 13, 12],
    [1, 0, 1, 67, 5, 9],
    [7, 6, 16, 3, 365, 29],
    [9, 1, 12, 4, 11, 620],
];

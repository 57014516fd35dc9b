#![allow(dead_code)]

use rand::Rng;
use sigcum::experiments::DiscreteMixtureModel;
use sigcum::moment_cumulant::TupleFamily;
use sigcum::path_signatures::PiecewiseLinearPath;
use sigcum::{Rational, Word};

pub fn w(s: &str) -> Word {
    s.parse().unwrap()
}

/// Compositions of `total` into positive parts.
pub fn compositions(total: usize) -> Vec<Vec<usize>> {
    if total == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 1..=total {
        for mut rest in compositions(total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Non-increasing integer partitions of `total`.
pub fn chain_shapes(total: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=left.min(max)).rev() {
            cur.push(p);
            rec(left - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, total, &mut Vec::new(), &mut out);
    out
}

/// Every word of the given length over letters `1..=d`.
pub fn words_of_len(d: usize, len: usize) -> Vec<Word> {
    Word::all(d, len).into_iter().filter(|w| w.len() == len).collect()
}

/// Every tuple family over `1..=d` with total length in `1..=max_total`.
pub fn tuple_families(d: usize, max_total: usize) -> Vec<TupleFamily> {
    let mut out = Vec::new();
    for total in 1..=max_total {
        for shape in compositions(total) {
            let mut acc: Vec<Vec<Word>> = vec![vec![]];
            for &len in &shape {
                let mut next = Vec::new();
                for prefix in &acc {
                    for word in words_of_len(d, len) {
                        let mut p = prefix.clone();
                        p.push(word);
                        next.push(p);
                    }
                }
                acc = next;
            }
            out.extend(acc.into_iter().map(|t| TupleFamily::new(t).unwrap()));
        }
    }
    out
}

/// One tuple family per composition of each total up to `max_total`, with
/// random letters.
pub fn sampled_tuple_families<R: Rng>(rng: &mut R, d: usize, max_total: usize) -> Vec<TupleFamily> {
    let mut out = Vec::new();
    for total in 1..=max_total {
        for shape in compositions(total) {
            let tuples = shape
                .iter()
                .map(|&len| Word::new((0..len).map(|_| rng.random_range(1..=d as u16)).collect()))
                .collect();
            out.push(TupleFamily::new(tuples).unwrap());
        }
    }
    out
}

pub fn random_path<R: Rng>(rng: &mut R, d: usize, points: usize) -> PiecewiseLinearPath<f64> {
    let pts = (0..points)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    PiecewiseLinearPath::new(pts, None).unwrap()
}

/// Mixture of signatures of lattice paths with rational increments and
/// weights, so that all expectations are exact.
pub fn rational_mixture<R: Rng>(rng: &mut R, atoms: usize, d: usize, depth: usize) -> DiscreteMixtureModel<Rational> {
    let raw: Vec<i64> = (0..atoms).map(|_| rng.random_range(1..=3)).collect();
    let total: i64 = raw.iter().sum();
    let paths: Vec<_> = raw
        .iter()
        .map(|&wt| {
            let mut pt = vec![Rational::from_integer(0.into()); d];
            let mut pts = vec![pt.clone()];
            for _ in 0..rng.random_range(1..=2) {
                for x in pt.iter_mut() {
                    *x += Rational::new(rng.random_range(-2..=2i64).into(), 2.into());
                }
                pts.push(pt.clone());
            }
            (
                PiecewiseLinearPath::new(pts, None).unwrap(),
                Rational::new(wt.into(), total.into()),
            )
        })
        .collect();
    DiscreteMixtureModel::from_paths(&paths, depth).unwrap()
}

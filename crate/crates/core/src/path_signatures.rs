//! Signatures of piecewise-linear paths.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor_algebra::{shuffle_words, FreeTensor, Word};

/// A path visiting `points` in order, linearly interpolated between them.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinearPath<S> {
    points: Vec<Vec<S>>,
    timestamps: Option<Vec<S>>,
}

impl<S: Scalar> PiecewiseLinearPath<S> {
    pub fn new(points: Vec<Vec<S>>, timestamps: Option<Vec<S>>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::InvalidPath("path has no points".into()))?;
        let d = first.len();
        if let Some(k) = points.iter().position(|p| p.len() != d) {
            return Err(Error::InvalidPath(format!(
                "point {k} has dimension {} instead of {d}",
                points[k].len()
            )));
        }
        if let Some(ts) = &timestamps {
            if ts.len() != points.len() {
                return Err(Error::InvalidPath(format!(
                    "{} timestamps for {} points",
                    ts.len(),
                    points.len()
                )));
            }
            if let Some(k) = (1..ts.len()).find(|&k| ts[k] <= ts[k - 1]) {
                return Err(Error::InvalidPath(format!(
                    "timestamps not strictly increasing at point {k}"
                )));
            }
        }
        Ok(PiecewiseLinearPath { points, timestamps })
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<S>] {
        &self.points
    }

    pub fn timestamps(&self) -> Option<&[S]> {
        self.timestamps.as_deref()
    }

    pub fn increments(&self) -> impl Iterator<Item = Vec<S>> + '_ {
        self.points.windows(2).map(|w| {
            w[1].iter()
                .zip(&w[0])
                .map(|(b, a)| b.clone() - a.clone())
                .collect()
        })
    }

    /// The same points visited in reverse order.
    pub fn reversed(&self) -> Self {
        let points = self.points.iter().rev().cloned().collect();
        let timestamps = self.timestamps.as_ref().map(|ts| {
            let end = ts.last().cloned().expect("nonempty");
            let start = ts[0].clone();
            ts.iter()
                .rev()
                .map(|t| start.clone() + end.clone() - t.clone())
                .collect()
        });
        PiecewiseLinearPath { points, timestamps }
    }

    /// Splits at point `k`, which belongs to both halves.
    pub fn split_at(&self, k: usize) -> Result<(Self, Self)> {
        if k >= self.len() {
            return Err(Error::InvalidArgument(format!(
                "split point {k} outside 0..{}",
                self.len()
            )));
        }
        let ts = |r: std::ops::Range<usize>| self.timestamps.as_ref().map(|t| t[r].to_vec());
        Ok((
            PiecewiseLinearPath {
                points: self.points[..=k].to_vec(),
                timestamps: ts(0..k + 1),
            },
            PiecewiseLinearPath {
                points: self.points[k..].to_vec(),
                timestamps: ts(k..self.len()),
            },
        ))
    }
}

/// Signature stored level by level in dense row-major form: level `m` holds
/// `d^m` coefficients indexed by the base-`d` digits of the word.
#[derive(Clone, Debug)]
pub struct DenseSignature<S> {
    dim: usize,
    levels: Vec<Vec<S>>,
    inv: Vec<S>,
    buf: (Vec<S>, Vec<S>),
}

impl<S: PartialEq> PartialEq for DenseSignature<S> {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.levels == other.levels
    }
}

impl<S: Scalar> DenseSignature<S> {
    pub fn identity(dim: usize, depth: usize) -> Self {
        let levels = (0..=depth)
            .map(|m| {
                let mut v = vec![S::zero(); dim.pow(m as u32)];
                if m == 0 {
                    v[0] = S::one();
                }
                v
            })
            .collect();
        let inv = (0..=depth)
            .map(|k| S::one() / S::from_usize(k.max(1)).expect("small integer"))
            .collect();
        let cap = dim.pow(depth as u32);
        DenseSignature {
            dim,
            levels,
            inv,
            buf: (Vec::with_capacity(cap), Vec::with_capacity(cap)),
        }
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, m: usize) -> &[S] {
        &self.levels[m]
    }

    /// Right-multiplies by `exp(delta)` (one linear segment), using the
    /// Horner form `Σ_k S_k ⊗ δ^{m-k}/(m-k)!` per level, top level first.
    pub fn push_increment(&mut self, delta: &[S]) {
        debug_assert_eq!(delta.len(), self.dim);
        if delta.iter().all(|x| x.is_zero()) {
            return;
        }
        let (mut acc, mut next) = std::mem::take(&mut self.buf);
        for m in (1..self.levels.len()).rev() {
            acc.clear();
            acc.push(self.levels[0][0].clone());
            for j in 1..=m {
                let inv = &self.inv[m - j + 1];
                let lv = &self.levels[j];
                next.clear();
                for (a, chunk) in acc.iter().zip(lv.chunks_exact(self.dim)) {
                    let s = a.clone() * inv.clone();
                    for (x, l) in delta.iter().zip(chunk) {
                        next.push(s.clone() * x.clone() + l.clone());
                    }
                }
                std::mem::swap(&mut acc, &mut next);
            }
            self.levels[m].clone_from_slice(&acc);
        }
        self.buf = (acc, next);
    }

    pub fn to_tensor(&self) -> FreeTensor<S> {
        let depth = self.depth();
        let mut t = FreeTensor::zero(self.dim, depth);
        for (m, lv) in self.levels.iter().enumerate() {
            for (idx, c) in lv.iter().enumerate() {
                t.add_term(index_to_word(idx, m, self.dim), c.clone());
            }
        }
        t
    }
}

fn index_to_word(mut idx: usize, m: usize, d: usize) -> Word {
    let mut letters = vec![0u16; m];
    for k in (0..m).rev() {
        letters[k] = (idx % d) as u16 + 1;
        idx /= d;
    }
    Word::new(letters)
}

/// Truncated signature `exp(Δx_1) ⊗ .. ⊗ exp(Δx_n)` of a piecewise-linear path.
pub fn signature<S: Scalar>(path: &PiecewiseLinearPath<S>, depth: usize) -> FreeTensor<S> {
    let mut sig = DenseSignature::identity(path.dim(), depth);
    for inc in path.increments() {
        sig.push_increment(&inc);
    }
    sig.to_tensor()
}

/// Chen concatenation of two signatures.
pub fn chen_concat<S: Scalar>(s1: &FreeTensor<S>, s2: &FreeTensor<S>) -> Result<FreeTensor<S>> {
    s1.concat_product(s2)
}

/// Appends time as an extra last coordinate; without timestamps a uniform
/// grid on `[0, 1]` is used.
pub fn time_augment<S: Scalar>(path: &PiecewiseLinearPath<S>) -> PiecewiseLinearPath<S> {
    let n = path.len();
    let times: Vec<S> = match path.timestamps() {
        Some(ts) => ts.to_vec(),
        None if n == 1 => vec![S::zero()],
        None => (0..n)
            .map(|k| S::from_usize(k).unwrap() / S::from_usize(n - 1).unwrap())
            .collect(),
    };
    let points = path
        .points()
        .iter()
        .zip(&times)
        .map(|(p, t)| {
            let mut q = p.clone();
            q.push(t.clone());
            q
        })
        .collect();
    PiecewiseLinearPath {
        points,
        timestamps: path.timestamps.clone(),
    }
}

/// Drops the last coordinate (inverse of [`time_augment`] on points).
pub fn drop_last_coordinate<S: Scalar>(path: &PiecewiseLinearPath<S>) -> PiecewiseLinearPath<S> {
    PiecewiseLinearPath {
        points: path
            .points()
            .iter()
            .map(|p| p[..p.len() - 1].to_vec())
            .collect(),
        timestamps: path.timestamps.clone(),
    }
}

/// Checks `⟨t, e_f ⧢ e_g⟩ = ⟨t, e_f⟩⟨t, e_g⟩` for all nonempty words with
/// `|f| + |g| ≤ depth`, with tolerance `tol · (1 + |rhs|)`.
pub fn is_grouplike<S: Scalar>(t: &FreeTensor<S>, tol: f64) -> bool {
    if (t.level0().as_f64() - 1.0).abs() > tol {
        return false;
    }
    let words = Word::all(t.dim(), t.depth());
    for f in words.iter().skip(1) {
        for g in words.iter().skip(1) {
            if g < f {
                continue;
            }
            if f.len() + g.len() > t.depth() {
                break;
            }
            let lhs = t.pair_counts(&shuffle_words(f, g)).as_f64();
            let rhs = t.coeff(f).as_f64() * t.coeff(g).as_f64();
            if (lhs - rhs).abs() > tol * (1.0 + rhs.abs()) {
                return false;
            }
        }
    }
    true
}

/// Parses a path CSV. Columns are `x1..xd` or `t,x1..xd`; a header line is
/// detected when the first row is not numeric, and a time column is
/// recognized only through a header named `t`. `source` prefixes error
/// messages.
pub fn parse_path_csv(text: &str, source: &str) -> Result<PiecewiseLinearPath<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let err = |line: u64, msg: String| Error::InvalidPath(format!("{source}:{line}: {msg}"));
    let mut header: Option<Vec<String>> = None;
    let mut width: Option<usize> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::InvalidPath(format!("{source}: {e}")))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(k as u64 + 1);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: Vec<Option<f64>> = rec.iter().map(|f| f.parse::<f64>().ok()).collect();
        if rows.is_empty() && header.is_none() && parsed.iter().any(Option::is_none) {
            header = Some(rec.iter().map(str::to_string).collect());
            width = Some(rec.len());
            continue;
        }
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            return Err(err(line, format!("expected {w} columns, found {}", rec.len())));
        }
        let mut row = Vec::with_capacity(w);
        for (f, v) in rec.iter().zip(parsed) {
            match v {
                Some(x) if x.is_finite() => row.push(x),
                _ => return Err(err(line, format!("invalid number {f:?}"))),
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::InvalidPath(format!("{source}: no data rows")));
    }
    let has_time = header
        .as_ref()
        .is_some_and(|h| h.first().is_some_and(|c| c.eq_ignore_ascii_case("t")));
    if has_time && rows[0].len() < 2 {
        return Err(Error::InvalidPath(format!("{source}: no coordinate columns")));
    }
    let (ts, points): (Option<Vec<f64>>, Vec<Vec<f64>>) = if has_time {
        (
            Some(rows.iter().map(|r| r[0]).collect()),
            rows.iter().map(|r| r[1..].to_vec()).collect(),
        )
    } else {
        (None, rows)
    };
    PiecewiseLinearPath::new(points, ts).map_err(|e| Error::InvalidPath(format!("{source}: {e}")))
}

use crate::error::{Error, Result};

/// A finite poset on `{0, .., n-1}` with display labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledPoset {
    labels: Vec<String>,
    /// `lt[x][y]` iff `x < y`.
    lt: Vec<Vec<bool>>,
}

impl LabeledPoset {
    /// Builds a poset from a full `≤` matrix, checking the partial order axioms.
    pub fn from_leq(labels: Vec<String>, leq: Vec<Vec<bool>>) -> Result<Self> {
        let n = labels.len();
        if leq.len() != n || leq.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidPoset("relation matrix has wrong shape".into()));
        }
        for x in 0..n {
            if !leq[x][x] {
                return Err(Error::InvalidPoset(format!("not reflexive at {}", labels[x])));
            }
            for y in 0..n {
                if x != y && leq[x][y] && leq[y][x] {
                    return Err(Error::InvalidPoset(format!(
                        "not antisymmetric: {} and {}",
                        labels[x], labels[y]
                    )));
                }
                for z in 0..n {
                    if leq[x][y] && leq[y][z] && !leq[x][z] {
                        return Err(Error::InvalidPoset(format!(
                            "not transitive: {} ≤ {} ≤ {}",
                            labels[x], labels[y], labels[z]
                        )));
                    }
                }
            }
        }
        let lt = (0..n)
            .map(|x| (0..n).map(|y| x != y && leq[x][y]).collect())
            .collect();
        Ok(LabeledPoset { labels, lt })
    }

    /// Builds the poset generated by the strict relations `x < y` in `pairs`
    /// (transitive closure). Fails if the relations contain a cycle.
    pub fn from_relations(labels: Vec<String>, pairs: &[(usize, usize)]) -> Result<Self> {
        let n = labels.len();
        let mut leq = vec![vec![false; n]; n];
        for (x, row) in leq.iter_mut().enumerate() {
            row[x] = true;
        }
        for &(x, y) in pairs {
            if x >= n || y >= n {
                return Err(Error::InvalidPoset(format!("relation ({x},{y}) out of range")));
            }
            leq[x][y] = true;
        }
        for k in 0..n {
            for x in 0..n {
                if leq[x][k] {
                    for y in 0..n {
                        if leq[k][y] {
                            leq[x][y] = true;
                        }
                    }
                }
            }
        }
        Self::from_leq(labels, leq)
    }

    pub fn antichain(n: usize) -> Self {
        Self::from_relations((1..=n).map(|i| format!("x{i}")).collect(), &[])
            .expect("antichain is a poset")
    }

    pub fn chain(n: usize) -> Self {
        ChainFamily::new(vec![n]).expect("chain").poset().clone()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn lt(&self, x: usize, y: usize) -> bool {
        self.lt[x][y]
    }

    pub fn leq(&self, x: usize, y: usize) -> bool {
        x == y || self.lt[x][y]
    }

    pub fn comparable(&self, x: usize, y: usize) -> bool {
        self.leq(x, y) || self.leq(y, x)
    }

    /// Elements in an order compatible with `<` (a linear extension).
    pub fn linear_extension(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&x| (0..self.len()).filter(|&y| self.lt(y, x)).count());
        order
    }
}

/// The poset `P_(n1,..,nk)`: `k` mutually incomparable chains. Element
/// `(i, p)` (both 1-based) has index `n1 + .. + n_{i-1} + p - 1` and label
/// `c<i>.<p>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainFamily {
    lengths: Vec<usize>,
    offsets: Vec<usize>,
    poset: LabeledPoset,
}

impl ChainFamily {
    pub fn new(lengths: Vec<usize>) -> Result<Self> {
        if lengths.iter().any(|&n| n == 0) {
            return Err(Error::InvalidPoset("chains must be nonempty".into()));
        }
        let mut offsets = Vec::with_capacity(lengths.len());
        let mut labels = Vec::new();
        let mut pairs = Vec::new();
        for (i, &n) in lengths.iter().enumerate() {
            let off = labels.len();
            offsets.push(off);
            for p in 0..n {
                labels.push(format!("c{}.{}", i + 1, p + 1));
                if p > 0 {
                    pairs.push((off + p - 1, off + p));
                }
            }
        }
        let poset = LabeledPoset::from_relations(labels, &pairs)?;
        Ok(ChainFamily {
            lengths,
            offsets,
            poset,
        })
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    pub fn poset(&self) -> &LabeledPoset {
        &self.poset
    }

    pub fn len(&self) -> usize {
        self.poset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poset.is_empty()
    }

    pub fn num_chains(&self) -> usize {
        self.lengths.len()
    }

    /// Element index of `(chain, position)`, both 0-based.
    pub fn element(&self, chain: usize, pos: usize) -> usize {
        self.offsets[chain] + pos
    }

    /// `(chain, position)` of an element, both 0-based.
    pub fn locate(&self, e: usize) -> (usize, usize) {
        let chain = self.offsets.iter().rposition(|&o| o <= e).expect("valid element");
        (chain, e - self.offsets[chain])
    }

    /// Element indices of each chain, in chain order.
    pub fn chains(&self) -> Vec<Vec<usize>> {
        self.lengths
            .iter()
            .zip(&self.offsets)
            .map(|(&n, &o)| (o..o + n).collect())
            .collect()
    }
}

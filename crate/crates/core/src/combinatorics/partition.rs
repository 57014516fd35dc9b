use std::fmt;

use crate::error::{Error, Result};

/// Default cap on the ground-set size for exhaustive partition enumeration.
pub const DEFAULT_CAP: usize = 12;

/// A set partition of `{0, .., n-1}` stored as a canonical restricted-growth
/// string: `rgs[e]` is the block index of `e`, and blocks are numbered in
/// order of their minimal element.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetPartition {
    rgs: Vec<u8>,
    blocks: u8,
}

impl SetPartition {
    /// Canonicalizes an arbitrary block labelling.
    pub fn from_labels<T: PartialEq + Copy>(labels: &[T]) -> Self {
        let mut seen: Vec<T> = Vec::new();
        let rgs = labels
            .iter()
            .map(|l| match seen.iter().position(|s| s == l) {
                Some(k) => k as u8,
                None => {
                    seen.push(*l);
                    (seen.len() - 1) as u8
                }
            })
            .collect();
        SetPartition {
            rgs,
            blocks: seen.len() as u8,
        }
    }

    /// Builds a partition of `{0, .., n-1}` from explicit blocks.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut owner = vec![usize::MAX; n];
        for (k, b) in blocks.iter().enumerate() {
            if b.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for &e in b {
                if e >= n {
                    return Err(Error::InvalidPartition(format!("element {e} outside 0..{n}")));
                }
                if owner[e] != usize::MAX {
                    return Err(Error::InvalidPartition(format!("element {e} in two blocks")));
                }
                owner[e] = k;
            }
        }
        if let Some(e) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::InvalidPartition(format!("element {e} not covered")));
        }
        Ok(Self::from_labels(&owner))
    }

    pub fn singletons(n: usize) -> Self {
        SetPartition {
            rgs: (0..n as u8).collect(),
            blocks: n as u8,
        }
    }

    pub fn one_block(n: usize) -> Self {
        SetPartition {
            rgs: vec![0; n],
            blocks: (n > 0) as u8,
        }
    }

    /// Size of the ground set.
    pub fn ground_size(&self) -> usize {
        self.rgs.len()
    }

    /// Number of blocks `|a|`.
    pub fn len(&self) -> usize {
        self.blocks as usize
    }

    pub fn is_empty(&self) -> bool {
        self.blocks == 0
    }

    pub fn block_of(&self, e: usize) -> usize {
        self.rgs[e] as usize
    }

    pub fn rgs(&self) -> &[u8] {
        &self.rgs
    }

    /// Blocks in canonical order, each sorted increasingly.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.len()];
        for (e, &b) in self.rgs.iter().enumerate() {
            out[b as usize].push(e);
        }
        out
    }

    pub fn same_block(&self, x: usize, y: usize) -> bool {
        self.rgs[x] == self.rgs[y]
    }

    /// `self ≤ other` in refinement order.
    pub fn refines(&self, other: &SetPartition) -> Result<bool> {
        if self.ground_size() != other.ground_size() {
            return Err(Error::InvalidPartition(format!(
                "ground sets differ: {} vs {}",
                self.ground_size(),
                other.ground_size()
            )));
        }
        let mut image = vec![u8::MAX; self.len()];
        for (e, &b) in self.rgs.iter().enumerate() {
            let slot = &mut image[b as usize];
            if *slot == u8::MAX {
                *slot = other.rgs[e];
            } else if *slot != other.rgs[e] {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Restriction `a ∩ U` to the listed elements, renumbered `0..|U|`.
    pub fn restrict(&self, elems: &[usize]) -> SetPartition {
        let labels: Vec<u8> = elems.iter().map(|&e| self.rgs[e]).collect();
        Self::from_labels(&labels)
    }

    /// Coarsening obtained by grouping the blocks of `self` according to
    /// `grouping`, a partition of the block indices.
    pub fn coarsen(&self, grouping: &SetPartition) -> SetPartition {
        let labels: Vec<u8> = self.rgs.iter().map(|&b| grouping.rgs[b as usize]).collect();
        Self::from_labels(&labels)
    }

    /// For `self ≤ coarse`: the sizes `#{blocks of self inside B}` for each
    /// block `B` of `coarse`.
    pub fn interval_type(&self, coarse: &SetPartition) -> Vec<usize> {
        let mut counted = vec![false; self.len()];
        let mut out = vec![0usize; coarse.len()];
        for (e, &b) in self.rgs.iter().enumerate() {
            if !counted[b as usize] {
                counted[b as usize] = true;
                out[coarse.rgs[e] as usize] += 1;
            }
        }
        out
    }

    /// Renders blocks with the given element labels: `"a,b|c"`.
    pub fn render(&self, labels: &[String]) -> String {
        self.blocks()
            .iter()
            .map(|b| {
                b.iter()
                    .map(|&e| labels[e].as_str())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join("|")
    }

    /// Parses the `"a,b|c"` text format against a label list.
    pub fn parse(text: &str, labels: &[String]) -> Result<Self> {
        let mut blocks = Vec::new();
        for part in text.split('|') {
            let mut block = Vec::new();
            for tok in part.split(',') {
                let tok = tok.trim();
                let e = labels.iter().position(|l| l == tok).ok_or_else(|| {
                    Error::InvalidPartition(format!("unknown element label {tok:?}"))
                })?;
                block.push(e);
            }
            blocks.push(block);
        }
        Self::from_blocks(labels.len(), &blocks)
    }
}

impl fmt::Debug for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = (0..self.ground_size()).map(|e| e.to_string()).collect();
        write!(f, "{{{}}}", self.render(&labels))
    }
}

/// Calls `f` on every partition of `{0, .., n-1}` in lexicographic RGS order.
pub fn for_each_partition(n: usize, mut f: impl FnMut(&SetPartition)) {
    fn rec(rgs: &mut SetPartition, i: usize, f: &mut dyn FnMut(&SetPartition)) {
        if i == rgs.rgs.len() {
            f(rgs);
            return;
        }
        let used = rgs.blocks;
        for v in 0..=used {
            if i == 0 && v > 0 {
                break;
            }
            rgs.rgs[i] = v;
            rgs.blocks = used.max(v + 1);
            rec(rgs, i + 1, f);
        }
        rgs.blocks = used;
    }
    let mut p = SetPartition {
        rgs: vec![0; n],
        blocks: 0,
    };
    rec(&mut p, 0, &mut f);
}

/// All partitions of `{0, .., n-1}` with the default size cap.
pub fn enumerate_partitions(n: usize) -> Result<Vec<SetPartition>> {
    enumerate_partitions_capped(n, DEFAULT_CAP)
}

pub fn enumerate_partitions_capped(n: usize, cap: usize) -> Result<Vec<SetPartition>> {
    if n > cap {
        return Err(Error::CapExceeded { size: n, cap });
    }
    let mut out = Vec::new();
    for_each_partition(n, |p| out.push(p.clone()));
    Ok(out)
}

/// All `b ≤ a`: products of partitions of each block of `a`.
pub fn refinements(a: &SetPartition) -> Vec<SetPartition> {
    let blocks = a.blocks();
    let mut labels: Vec<(usize, u8)> = vec![(0, 0); a.ground_size()];
    let mut out = Vec::new();
    fn rec(
        k: usize,
        blocks: &[Vec<usize>],
        labels: &mut Vec<(usize, u8)>,
        out: &mut Vec<SetPartition>,
    ) {
        if k == blocks.len() {
            out.push(SetPartition::from_labels(labels));
            return;
        }
        for_each_partition(blocks[k].len(), |p| {
            for (i, &e) in blocks[k].iter().enumerate() {
                labels[e] = (k, p.rgs[i]);
            }
            rec(k + 1, blocks, labels, out);
        });
    }
    rec(0, &blocks, &mut labels, &mut out);
    out.sort();
    out
}

/// All `b ≥ a`, obtained by partitioning the blocks of `a`.
pub fn coarsenings(a: &SetPartition) -> Vec<SetPartition> {
    let mut out = Vec::new();
    for_each_partition(a.len(), |g| out.push(a.coarsen(g)));
    out.sort();
    out
}

pub fn bell_number(n: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = vec![*row.last().unwrap()];
        for x in &row {
            let v = next.last().unwrap() + x;
            next.push(v);
        }
        row = next;
    }
    row[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_counts() {
        for n in 0..=7 {
            assert_eq!(enumerate_partitions(n).unwrap().len() as u64, bell_number(n), "n={n}");
        }
        assert_eq!(enumerate_partitions(3).unwrap().len(), 5);
        assert_eq!(enumerate_partitions(4).unwrap().len(), 15);
        assert_eq!(enumerate_partitions(1).unwrap().len(), 1);
    }

    #[test]
    fn enumeration_is_sorted_and_distinct() {
        let all = enumerate_partitions(6).unwrap();
        assert!(all.windows(2).all(|w| w[0].rgs < w[1].rgs));
    }

    #[test]
    fn cap_is_enforced() {
        assert_eq!(
            enumerate_partitions(13),
            Err(Error::CapExceeded { size: 13, cap: 12 })
        );
    }

    #[test]
    fn refinement_order() {
        let s = SetPartition::singletons(3);
        let one = SetPartition::one_block(3);
        let a = SetPartition::from_blocks(3, &[vec![0, 1], vec![2]]).unwrap();
        let b = SetPartition::from_blocks(3, &[vec![0, 2], vec![1]]).unwrap();
        assert!(s.refines(&a).unwrap());
        assert!(a.refines(&one).unwrap());
        assert!(!a.refines(&b).unwrap());
        assert!(!b.refines(&a).unwrap());
        assert!(a.refines(&SetPartition::one_block(4)).is_err());
    }

    #[test]
    fn refinements_and_coarsenings_count() {
        let a = SetPartition::from_blocks(5, &[vec![0, 1, 2], vec![3, 4]]).unwrap();
        assert_eq!(refinements(&a).len(), 5 * 2);
        assert_eq!(coarsenings(&a).len(), 2);
        for b in refinements(&a) {
            assert!(b.refines(&a).unwrap());
        }
    }

    #[test]
    fn text_round_trip() {
        let labels: Vec<String> = ["x1", "x2", "y1", "y2"].iter().map(|s| s.to_string()).collect();
        let p = SetPartition::parse("x1,y1|x2,y2", &labels).unwrap();
        assert_eq!(p.render(&labels), "x1,y1|x2,y2");
        assert!(SetPartition::parse("x1|x2", &labels).is_err());
        assert!(SetPartition::parse("x1,x1|x2,y1,y2", &labels).is_err());
    }
}

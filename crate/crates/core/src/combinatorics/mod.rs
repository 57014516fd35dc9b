//! Posets, set partitions, ordered partitions and their statistics, in exact
//! integer and rational arithmetic.

pub mod moebius;
pub mod ordered;
pub mod partition;
pub mod poset;

pub use moebius::{moebius, moebius_closed_form};
pub use ordered::{
    antichain_ancestry, boundary_weight, enumerate_orp, is_ordered, order_polynomial,
    orp_factorial, orp_table, OrderPolynomial, OrderedPartition, OrpEntry,
};
pub use partition::{enumerate_partitions, SetPartition};
pub use poset::{ChainFamily, LabeledPoset};

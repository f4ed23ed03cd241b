//! Inputs shared by the benchmarks in `benches/`.

use relhyp_core::{SubgroupCollection, Word};

/// `⟨(ab)^k a⟩`: a cyclic subgroup whose core is a loop of length `2k + 1`.
pub fn long_loop(k: usize) -> Vec<Word> {
    let ab: Word = "ab".parse().unwrap();
    vec![ab.pow(k as i64).multiply(&"a".parse().unwrap())]
}

/// A malnormal pair used across the quotient and BCI benches.
pub fn pair() -> SubgroupCollection {
    SubgroupCollection::from_generators(2, &[&["a"], &["bab"]]).unwrap()
}

use std::collections::BTreeSet;
use std::fmt;

use crate::measures::BinaryString;

/// A finite set of strings in canonical order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StringSet {
    members: BTreeSet<BinaryString>,
}

impl StringSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, w: BinaryString) -> bool {
        self.members.insert(w)
    }

    pub fn contains(&self, w: &BinaryString) -> bool {
        self.members.contains(w)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &BinaryString> {
        self.members.iter()
    }

    pub fn max_len(&self) -> Option<usize> {
        self.members.iter().next_back().map(BinaryString::len)
    }

    pub fn is_subset(&self, other: &StringSet) -> bool {
        self.members.is_subset(&other.members)
    }

    pub fn union(&self, other: &StringSet) -> StringSet {
        self.members.union(&other.members).cloned().collect()
    }

    /// Number of proper prefixes of `w` that are members.
    pub fn proper_prefixes_in(&self, w: &BinaryString) -> usize {
        (0..w.len()).filter(|&n| self.contains(&w.prefix(n))).count()
    }

    /// No member is a proper prefix of another.
    pub fn is_prefix_set(&self) -> bool {
        self.members.iter().all(|w| self.proper_prefixes_in(w) == 0)
    }
}

impl FromIterator<BinaryString> for StringSet {
    fn from_iter<I: IntoIterator<Item = BinaryString>>(iter: I) -> Self {
        StringSet {
            members: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a StringSet {
    type Item = &'a BinaryString;
    type IntoIter = std::collections::btree_set::Iter<'a, BinaryString>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

impl fmt::Display for StringSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (j, w) in self.members.iter().enumerate() {
            if j > 0 {
                f.write_str(",")?;
            }
            write!(f, "{w}")?;
        }
        f.write_str("}")
    }
}

/// Splits `U` into `V_0, V_1, …` where `V_i` holds the members with exactly
/// `i` proper prefixes in `U`. Trailing empty classes are omitted.
pub fn partition_prefix_sets(u: &StringSet) -> Vec<StringSet> {
    let mut parts: Vec<StringSet> = Vec::new();
    for w in u {
        let i = u.proper_prefixes_in(w);
        if parts.len() <= i {
            parts.resize_with(i + 1, StringSet::new);
        }
        parts[i].insert(w.clone());
    }
    debug_assert!(parts.iter().all(StringSet::is_prefix_set));
    debug_assert_eq!(parts.iter().map(StringSet::len).sum::<usize>(), u.len());
    parts
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(words: &[&str]) -> StringSet {
        words.iter().map(|w| w.parse().unwrap()).collect()
    }

    #[test]
    fn partition_examples() {
        assert_eq!(partition_prefix_sets(&set(&["-"])), vec![set(&["-"])]);
        assert_eq!(
            partition_prefix_sets(&set(&["-", "0", "00"])),
            vec![set(&["-"]), set(&["0"]), set(&["00"])]
        );
        assert_eq!(
            partition_prefix_sets(&set(&["0", "1", "01"])),
            vec![set(&["0", "1"]), set(&["01"])]
        );
        assert!(partition_prefix_sets(&StringSet::new()).is_empty());
    }

    fn arb_set() -> impl Strategy<Value = StringSet> {
        prop::collection::vec((0usize..=6, any::<u64>()), 0..30).prop_map(|v| {
            v.into_iter()
                .map(|(len, idx)| BinaryString::from_index(len, idx & ((1u64 << len) - 1)))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn partition_is_disjoint_cover_of_prefix_sets(u in arb_set()) {
            let parts = partition_prefix_sets(&u);
            let mut seen = StringSet::new();
            for (i, v) in parts.iter().enumerate() {
                prop_assert!(v.is_prefix_set());
                for w in v {
                    prop_assert_eq!(u.proper_prefixes_in(w), i);
                    prop_assert!(seen.insert(w.clone()));
                }
            }
            prop_assert_eq!(seen, u);
        }
    }
}

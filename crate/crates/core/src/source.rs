use std::fmt;

/// Largest K a [`SourceSet`] can hold.
pub const MAX_SOURCES: usize = 64;

/// A subset of source indices `1..=K`, stored as a bitmask (bit `k-1` for source `k`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct SourceSet(u64);

impl SourceSet {
    pub const EMPTY: SourceSet = SourceSet(0);

    /// Every source `1..=k`.
    pub fn full(k: usize) -> Self {
        assert!(k <= MAX_SOURCES);
        if k == MAX_SOURCES {
            SourceSet(u64::MAX)
        } else {
            SourceSet((1u64 << k) - 1)
        }
    }

    pub fn singleton(k: usize) -> Self {
        let mut s = SourceSet::EMPTY;
        s.insert(k);
        s
    }

    pub fn insert(&mut self, k: usize) -> bool {
        assert!((1..=MAX_SOURCES).contains(&k), "source index {k} out of range");
        let bit = 1u64 << (k - 1);
        let fresh = self.0 & bit == 0;
        self.0 |= bit;
        fresh
    }

    pub fn contains(self, k: usize) -> bool {
        (1..=MAX_SOURCES).contains(&k) && self.0 & (1u64 << (k - 1)) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Self) -> Self {
        SourceSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        SourceSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        SourceSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Ascending source indices.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let tz = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(tz + 1)
        })
    }

    /// Largest member, if any.
    pub fn max(self) -> Option<usize> {
        (self.0 != 0).then(|| 64 - self.0.leading_zeros() as usize)
    }
}

impl FromIterator<usize> for SourceSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = SourceSet::EMPTY;
        for k in iter {
            s.insert(k);
        }
        s
    }
}

/// Label syntax of the graph format: `-` or `1,3`.
impl fmt::Display for SourceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("-");
        }
        let mut first = true;
        for k in self.iter() {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{k}")?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for SourceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

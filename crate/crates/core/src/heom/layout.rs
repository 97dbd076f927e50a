/// Flat indexing of `(n1, n2)` with `n1 + n2 <= depth`: ordered by level
/// `n1 + n2`, then by `n1`. Level `L` occupies `offset(L) .. offset(L + 1)`,
/// so both lower neighbours of an entry sit at the same position shifted by
/// one level, and both upper neighbours likewise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HierarchyLayout {
    depth: usize,
}

impl HierarchyLayout {
    pub const fn new(depth: usize) -> Self {
        HierarchyLayout { depth }
    }

    /// `(d + 1)(d + 2) / 2`.
    pub const fn size(depth: usize) -> usize {
        (depth + 1) * (depth + 2) / 2
    }

    /// First flat index of level `n1 + n2 = level`.
    pub const fn offset(level: usize) -> usize {
        level * (level + 1) / 2
    }

    pub const fn index_of(n1: usize, n2: usize) -> usize {
        Self::offset(n1 + n2) + n1
    }

    pub const fn depth(&self) -> usize {
        self.depth
    }

    pub const fn len(&self) -> usize {
        Self::size(self.depth)
    }

    pub const fn is_empty(&self) -> bool {
        false
    }

    /// `(n1, n2)` stored at flat index `idx`.
    pub fn indices(&self, idx: usize) -> (usize, usize) {
        assert!(idx < self.len(), "index {idx} outside hierarchy of depth {}", self.depth);
        let mut level = 0;
        while Self::offset(level + 1) <= idx {
            level += 1;
        }
        let n1 = idx - Self::offset(level);
        (n1, level - n1)
    }

    pub fn index(&self, n1: usize, n2: usize) -> Option<usize> {
        (n1 + n2 <= self.depth).then(|| Self::index_of(n1, n2))
    }
}

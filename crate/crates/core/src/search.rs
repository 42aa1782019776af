//! Breadth-first search that discovers nodes in shortlex order of their
//! least access strings.
//!
//! Several nodes can share one access string (a string reaches many states).
//! A plain FIFO queue expands them node by node, which can produce `p·b`
//! before `p·a`. Here nodes first reached by the same string form a group,
//! and a group is expanded symbol by symbol across all its members.

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

pub(crate) struct ShortlexBfs<K> {
    index: HashMap<K, usize>,
    pub(crate) keys: Vec<K>,
    parent: Vec<Option<(usize, usize)>>,
    groups: VecDeque<Vec<usize>>,
    pending: Vec<usize>,
}

impl<K: Clone + Eq + Hash> ShortlexBfs<K> {
    pub(crate) fn new() -> Self {
        ShortlexBfs {
            index: HashMap::new(),
            keys: Vec::new(),
            parent: Vec::new(),
            groups: VecDeque::new(),
            pending: Vec::new(),
        }
    }

    fn insert(&mut self, key: K, parent: Option<(usize, usize)>) -> (usize, bool) {
        if let Some(&i) = self.index.get(&key) {
            return (i, false);
        }
        let i = self.keys.len();
        self.index.insert(key.clone(), i);
        self.keys.push(key);
        self.parent.push(parent);
        self.pending.push(i);
        (i, true)
    }

    /// A node reached by the empty string. Call [`Self::seal`] after the last root.
    pub(crate) fn root(&mut self, key: K) -> (usize, bool) {
        self.insert(key, None)
    }

    /// A node reached from `parent` by symbol index `symbol`.
    pub(crate) fn discover(&mut self, key: K, parent: usize, symbol: usize) -> (usize, bool) {
        self.insert(key, Some((parent, symbol)))
    }

    /// Ends the group of nodes discovered since the previous call.
    pub(crate) fn seal(&mut self) {
        if !self.pending.is_empty() {
            self.groups.push_back(std::mem::take(&mut self.pending));
        }
    }

    pub(crate) fn next_group(&mut self) -> Option<Vec<usize>> {
        self.groups.pop_front()
    }

    pub(crate) fn len(&self) -> usize {
        self.keys.len()
    }

    pub(crate) fn parent(&self, node: usize) -> Option<(usize, usize)> {
        self.parent[node]
    }

    /// Symbol indices along the access string of `node`.
    pub(crate) fn path(&self, mut node: usize) -> Vec<usize> {
        let mut rev = Vec::new();
        while let Some((p, k)) = self.parent[node] {
            rev.push(k);
            node = p;
        }
        rev.reverse();
        rev
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_expand_symbol_major() {
        // Two roots; root 1 has an `a` child, root 0 a `b` child. The `a`
        // child must come first.
        let mut bfs = ShortlexBfs::new();
        bfs.root(0u32);
        bfs.root(1u32);
        bfs.seal();
        let group = bfs.next_group().unwrap();
        for k in 0..2 {
            for &i in &group {
                let key = bfs.keys[i];
                if (key, k) == (1, 0) {
                    bfs.discover(10, i, k);
                }
                if (key, k) == (0, 1) {
                    bfs.discover(20, i, k);
                }
            }
            bfs.seal();
        }
        assert_eq!(bfs.keys, [0, 1, 10, 20]);
        assert_eq!(bfs.path(2), [0]);
        assert_eq!(bfs.path(3), [1]);
    }
}

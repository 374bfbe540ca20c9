//! Constant-time set over `0..n` backed by an array-embedded doubly linked
//! list. Membership flags and the link arrays share slots, so insert, remove
//! and contains are O(1) and iteration is O(len).

const NIL: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct IndexList {
    next: Vec<u32>,
    prev: Vec<u32>,
    member: Vec<bool>,
    head: u32,
    len: usize,
}

impl IndexList {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity < NIL as usize, "index list capacity too large");
        Self {
            next: vec![NIL; capacity],
            prev: vec![NIL; capacity],
            member: vec![false; capacity],
            head: NIL,
            len: 0,
        }
    }

    #[inline]
    pub fn capacity(&self) -> usize {
        self.member.len()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.member[i]
    }

    /// Pushes `i` at the front. Returns false if it was already present.
    #[inline]
    pub fn insert(&mut self, i: usize) -> bool {
        if self.member[i] {
            return false;
        }
        let iu = i as u32;
        self.member[i] = true;
        self.prev[i] = NIL;
        self.next[i] = self.head;
        if self.head != NIL {
            self.prev[self.head as usize] = iu;
        }
        self.head = iu;
        self.len += 1;
        true
    }

    #[inline]
    pub fn remove(&mut self, i: usize) -> bool {
        if !self.member[i] {
            return false;
        }
        let (p, n) = (self.prev[i], self.next[i]);
        if p == NIL {
            self.head = n;
        } else {
            self.next[p as usize] = n;
        }
        if n != NIL {
            self.prev[n as usize] = p;
        }
        self.member[i] = false;
        self.next[i] = NIL;
        self.prev[i] = NIL;
        self.len -= 1;
        true
    }

    #[inline]
    pub fn set(&mut self, i: usize, present: bool) {
        if present {
            self.insert(i);
        } else {
            self.remove(i);
        }
    }

    /// Empties the set in O(len).
    pub fn clear(&mut self) {
        let mut cur = self.head;
        while cur != NIL {
            let c = cur as usize;
            cur = self.next[c];
            self.member[c] = false;
            self.next[c] = NIL;
            self.prev[c] = NIL;
        }
        self.head = NIL;
        self.len = 0;
    }

    /// Iterates in list order (most recently inserted first).
    pub fn iter(&self) -> Iter<'_> {
        Iter {
            list: self,
            cur: self.head,
        }
    }

    pub fn to_sorted_vec(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.iter().collect();
        v.sort_unstable();
        v
    }

    /// Copies the members into `out` (cleared first) in list order.
    pub fn collect_into(&self, out: &mut Vec<usize>) {
        out.clear();
        out.extend(self.iter());
    }
}

pub struct Iter<'a> {
    list: &'a IndexList,
    cur: u32,
}

impl Iterator for Iter<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.cur == NIL {
            return None;
        }
        let c = self.cur as usize;
        self.cur = self.list.next[c];
        Some(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn basic_ops() {
        let mut l = IndexList::new(5);
        assert!(l.is_empty());
        assert!(l.insert(3));
        assert!(!l.insert(3));
        assert!(l.insert(0));
        assert!(l.insert(4));
        assert_eq!(l.iter().collect::<Vec<_>>(), vec![4, 0, 3]);
        assert!(l.remove(0));
        assert!(!l.remove(0));
        assert_eq!(l.iter().collect::<Vec<_>>(), vec![4, 3]);
        l.clear();
        assert_eq!(l.len(), 0);
        assert!(!l.contains(4));
        assert!(l.insert(4));
        assert_eq!(l.to_sorted_vec(), vec![4]);
    }

    proptest! {
        #[test]
        fn matches_btreeset(ops in proptest::collection::vec((0usize..32, any::<bool>()), 0..200)) {
            let mut l = IndexList::new(32);
            let mut model = BTreeSet::new();
            for (i, add) in ops {
                if add {
                    prop_assert_eq!(l.insert(i), model.insert(i));
                } else {
                    prop_assert_eq!(l.remove(i), model.remove(&i));
                }
                prop_assert_eq!(l.len(), model.len());
                prop_assert_eq!(l.to_sorted_vec(), model.iter().copied().collect::<Vec<_>>());
            }
            for i in 0..32 {
                prop_assert_eq!(l.contains(i), model.contains(&i));
            }
        }
    }
}

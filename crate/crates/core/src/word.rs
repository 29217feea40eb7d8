//! Words in the free group on `g` generators.
//!
//! Letters are signed generator indices `±1..=±g`; `-i` is the inverse of `i`.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct GroupWord(Vec<i8>);

/// Total order on letters used for canonical rotations: `1 < -1 < 2 < -2 < ...`.
fn letter_key(l: i8) -> (u8, bool) {
    (l.unsigned_abs(), l < 0)
}

fn cmp_letters(a: &[i8], b: &[i8]) -> Ordering {
    a.iter().map(|&l| letter_key(l)).cmp(b.iter().map(|&l| letter_key(l)))
}

fn free_reduce(letters: impl IntoIterator<Item = i8>) -> Vec<i8> {
    let mut out: Vec<i8> = Vec::new();
    for l in letters {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

impl GroupWord {
    pub fn identity() -> Self {
        GroupWord(Vec::new())
    }

    pub fn letter(l: i8) -> Self {
        assert!(l != 0);
        GroupWord(vec![l])
    }

    /// Freely reduces `letters`, rejecting indices outside `±1..=±g`.
    pub fn reduce(letters: &[i32], g: usize) -> Result<Self> {
        let mut checked = Vec::with_capacity(letters.len());
        for &l in letters {
            if l == 0 || l.unsigned_abs() as usize > g {
                return Err(Error::Input(format!("letter {l} outside ±1..=±{g}")));
            }
            checked.push(l as i8);
        }
        Ok(GroupWord(free_reduce(checked)))
    }

    pub fn letters(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<i8> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<i8> {
        self.0.last().copied()
    }

    pub fn inverse(&self) -> Self {
        GroupWord(self.0.iter().rev().map(|l| -l).collect())
    }

    /// Reduced product `self * other`.
    pub fn concat(&self, other: &Self) -> Self {
        GroupWord(free_reduce(self.0.iter().chain(&other.0).copied()))
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut acc = Self::identity();
        for _ in 0..k {
            acc = acc.concat(self);
        }
        acc
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.0.len() < 2 || self.0[0] != -self.0[self.0.len() - 1]
    }

    /// Returns `(c, w)` with `self = c * w * c^{-1}` and `w` cyclically reduced.
    pub fn cyclic_reduce(&self) -> (Self, Self) {
        let l = &self.0;
        let mut k = 0;
        while 2 * k + 1 < l.len() && l[k] == -l[l.len() - 1 - k] {
            k += 1;
        }
        (GroupWord(l[..k].to_vec()), GroupWord(l[k..l.len() - k].to_vec()))
    }

    pub fn rotate(&self, k: usize) -> Self {
        let mut v = self.0.clone();
        if !v.is_empty() {
            let k = k % v.len();
            v.rotate_left(k);
        }
        GroupWord(v)
    }

    /// Minimal rotation under the letter order `1 < -1 < 2 < -2 < ...`.
    pub fn canonical_rotation(&self) -> Self {
        (0..self.len().max(1))
            .map(|k| self.rotate(k))
            .min_by(|a, b| cmp_letters(&a.0, &b.0))
            .unwrap()
    }

    /// Not a proper power of a shorter word.
    pub fn is_primitive(&self) -> bool {
        let n = self.0.len();
        if n == 0 {
            return false;
        }
        (1..n).filter(|d| n % d == 0).all(|d| (d..n).any(|i| self.0[i] != self.0[i - d]))
    }

    /// Letter count per generator, ignoring signs.
    pub fn letter_counts(&self, g: usize) -> Vec<usize> {
        let mut c = vec![0; g];
        for &l in &self.0 {
            c[l.unsigned_abs() as usize - 1] += 1;
        }
        c
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, l) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "]")
    }
}

fn letters(g: usize) -> Vec<i8> {
    (1..=g as i8).flat_map(|i| [i, -i]).collect()
}

/// All reduced words of length `<= max_len`, shortest first, identity included.
pub fn enumerate_reduced_words(g: usize, max_len: usize) -> Vec<GroupWord> {
    let alphabet = letters(g);
    let mut out = vec![GroupWord::identity()];
    let mut frontier = vec![GroupWord::identity()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for &l in &alphabet {
                if w.last() == Some(-l) {
                    continue;
                }
                let mut v = w.0.clone();
                v.push(l);
                next.push(GroupWord(v));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Representatives of `Γ / ⟨γ_i⟩`: reduced words whose last letter is not `±i`.
pub fn enumerate_coset_reps(g: usize, i: usize, max_len: usize) -> Vec<GroupWord> {
    let i = i as i8;
    enumerate_reduced_words(g, max_len)
        .into_iter()
        .filter(|w| w.last().is_none_or(|l| l.abs() != i))
        .collect()
}

/// A conjugacy class of primitive elements, stored by its canonical word.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PrimitiveClass {
    pub word: GroupWord,
}

impl PrimitiveClass {
    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }
}

/// Canonical class word of a cyclically reduced word, optionally merged with its inverse.
pub fn canonical_class_word(w: &GroupWord, identify_inverses: bool) -> GroupWord {
    let c = w.canonical_rotation();
    if identify_inverses {
        let ci = w.inverse().canonical_rotation();
        if cmp_letters(&ci.0, &c.0) == Ordering::Less {
            return ci;
        }
    }
    c
}

/// Primitive conjugacy classes of non-trivial elements with cyclic length `<= max_len`.
pub fn enumerate_primitive_classes(g: usize, max_len: usize, identify_inverses: bool) -> Vec<PrimitiveClass> {
    enumerate_reduced_words(g, max_len)
        .into_iter()
        .filter(|w| !w.is_empty() && w.is_cyclically_reduced() && w.is_primitive())
        .filter(|w| canonical_class_word(w, identify_inverses) == *w)
        .map(|word| PrimitiveClass { word })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stack_reduce(v: &[i32]) -> Vec<i8> {
        let mut st: Vec<i32> = Vec::new();
        for &l in v {
            if st.last().is_some_and(|&t| t == -l) {
                st.pop();
            } else {
                st.push(l);
            }
        }
        st.into_iter().map(|l| l as i8).collect()
    }

    #[test]
    fn reduction_examples() {
        assert!(GroupWord::reduce(&[1, -1], 2).unwrap().is_empty());
        assert_eq!(GroupWord::reduce(&[1, 2, -2, 1], 2).unwrap().letters(), &[1, 1]);
        assert!(GroupWord::reduce(&[3], 2).is_err());
        assert!(GroupWord::reduce(&[0], 2).is_err());
    }

    #[test]
    fn word_counts() {
        for g in 1..=3 {
            let words = enumerate_reduced_words(g, 4);
            for l in 1..=4 {
                let count = words.iter().filter(|w| w.len() == l).count();
                assert_eq!(count, 2 * g * (2 * g - 1).pow(l as u32 - 1));
            }
        }
    }

    #[test]
    fn coset_reps_small() {
        let reps = enumerate_coset_reps(2, 1, 1);
        let got: Vec<_> = reps.iter().map(|w| w.letters().to_vec()).collect();
        assert_eq!(got, vec![vec![], vec![2], vec![-2]]);
    }

    #[test]
    fn class_examples() {
        assert_eq!(enumerate_primitive_classes(1, 6, false).len(), 2);
        assert_eq!(enumerate_primitive_classes(1, 6, true).len(), 1);
        let c = enumerate_primitive_classes(2, 1, false);
        assert_eq!(c.len(), 4);
        assert_eq!(enumerate_primitive_classes(2, 1, true).len(), 2);
    }

    proptest! {
        #[test]
        fn reduce_matches_stack_oracle(v in proptest::collection::vec(prop_oneof![-3i32..=-1, 1i32..=3], 0..20)) {
            let w = GroupWord::reduce(&v, 3).unwrap();
            let expected = stack_reduce(&v);
            prop_assert_eq!(w.letters(), expected.as_slice());
            let again: Vec<i32> = w.letters().iter().map(|&l| l as i32).collect();
            prop_assert_eq!(GroupWord::reduce(&again, 3).unwrap(), w);
        }

        #[test]
        fn cyclic_reduction_conjugates(v in proptest::collection::vec(prop_oneof![-2i32..=-1, 1i32..=2], 0..12)) {
            let w = GroupWord::reduce(&v, 2).unwrap();
            let (c, core) = w.cyclic_reduce();
            prop_assert!(core.is_cyclically_reduced());
            prop_assert_eq!(c.concat(&core).concat(&c.inverse()), w);
        }
    }
}

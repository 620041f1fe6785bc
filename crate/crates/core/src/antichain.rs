//! Antichains of maximal elements representing downward-closed sets.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Antichain<T> {
    elems: Vec<T>,
}

impl<T> Default for Antichain<T> {
    fn default() -> Self {
        Antichain { elems: Vec::new() }
    }
}

impl<T> Antichain<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elements(&self) -> &[T] {
        &self.elems
    }

    /// `x` lies in the downward closure.
    pub fn contains_below(&self, x: &T, leq: impl Fn(&T, &T) -> bool) -> bool {
        self.elems.iter().any(|e| leq(x, e))
    }

    /// Index of the first element dominating `x`.
    pub fn find_above(&self, x: &T, leq: impl Fn(&T, &T) -> bool) -> Option<usize> {
        self.elems.iter().position(|e| leq(x, e))
    }

    /// Inserts `x` unless it is already covered; drops elements it covers.
    /// Returns whether the closure grew.
    pub fn insert(&mut self, x: T, leq: impl Fn(&T, &T) -> bool) -> bool {
        if self.contains_below(&x, &leq) {
            return false;
        }
        self.elems.retain(|e| !leq(e, &x));
        self.elems.push(x);
        true
    }

    /// No element lies below another.
    pub fn is_canonical(&self, leq: impl Fn(&T, &T) -> bool) -> bool {
        self.elems.iter().enumerate().all(|(i, a)| {
            self.elems
                .iter()
                .enumerate()
                .all(|(j, b)| i == j || !leq(a, b))
        })
    }
}

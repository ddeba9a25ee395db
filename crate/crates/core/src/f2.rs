//! Dense vectors over F2 packed into machine words, and an incremental echelon
//! basis whose rows carry a tag recording the input combination they came from.

use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect();
        write!(f, "Bits({s})")
    }
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Bits { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut b = Self::zeros(len);
        b.set(i, true);
        b
    }

    pub fn from_indices(len: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut b = Self::zeros(len);
        for i in idx {
            b.flip(i);
        }
        b
    }

    pub fn from_bools(v: &[bool]) -> Self {
        Self::from_indices(v.len(), v.iter().enumerate().filter(|(_, &x)| x).map(|(i, _)| i))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len);
        let m = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &Bits) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &Bits) -> Bits {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Lowest set index at or after `from`.
    pub fn next_one(&self, from: usize) -> Option<usize> {
        if from >= self.len {
            return None;
        }
        let mut wi = from / 64;
        let mut w = self.words[wi] & (!0u64 << (from % 64));
        loop {
            if w != 0 {
                let i = wi * 64 + w.trailing_zeros() as usize;
                return (i < self.len).then_some(i);
            }
            wi += 1;
            if wi == self.words.len() {
                return None;
            }
            w = self.words[wi];
        }
    }

    pub fn first_one(&self) -> Option<usize> {
        self.next_one(0)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        let mut cur = self.next_one(0);
        std::iter::from_fn(move || {
            let i = cur?;
            cur = self.next_one(i + 1);
            Some(i)
        })
    }

    pub fn dot(&self, other: &Bits) -> bool {
        let ones: u32 = self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones()).sum();
        ones % 2 == 1
    }
}

/// A linear map F2^cols -> F2^rows stored by the images of basis vectors.
#[derive(Clone, Debug)]
pub struct F2Map {
    pub rows: usize,
    pub images: Vec<Bits>,
}

impl F2Map {
    pub fn new(rows: usize, images: Vec<Bits>) -> Self {
        debug_assert!(images.iter().all(|b| b.len() == rows));
        F2Map { rows, images }
    }

    pub fn identity(n: usize) -> Self {
        F2Map { rows: n, images: (0..n).map(|i| Bits::unit(n, i)).collect() }
    }

    pub fn cols(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, v: &Bits) -> Bits {
        let mut out = Bits::zeros(self.rows);
        for i in v.ones() {
            out.xor_assign(&self.images[i]);
        }
        out
    }

    pub fn compose(&self, inner: &F2Map) -> F2Map {
        F2Map { rows: self.rows, images: inner.images.iter().map(|v| self.apply(v)).collect() }
    }

    pub fn add(&self, other: &F2Map) -> F2Map {
        F2Map {
            rows: self.rows,
            images: self.images.iter().zip(&other.images).map(|(a, b)| a.xor(b)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.images.iter().all(|v| v.is_zero())
    }

    pub fn rank(&self) -> usize {
        let mut e = Echelon::new(self.rows, 0);
        for v in &self.images {
            e.insert(v.clone(), Bits::zeros(0));
        }
        e.rank()
    }

    /// Basis of the kernel.
    pub fn kernel(&self) -> Vec<Bits> {
        let n = self.cols();
        let mut e = Echelon::new(self.rows, n);
        let mut out = Vec::new();
        for (i, v) in self.images.iter().enumerate() {
            if let Some(dep) = e.insert(v.clone(), Bits::unit(n, i)) {
                out.push(dep);
            }
        }
        out
    }

    /// Some preimage of `y`, if `y` lies in the image.
    pub fn solve(&self, y: &Bits) -> Option<Bits> {
        let n = self.cols();
        let mut e = Echelon::new(self.rows, n);
        for (i, v) in self.images.iter().enumerate() {
            e.insert(v.clone(), Bits::unit(n, i));
        }
        e.express(y)
    }
}

/// Echelon basis with pivot = lowest set bit. Every stored row remembers the
/// tag of the combination of inserted vectors it equals.
#[derive(Clone, Debug)]
pub struct Echelon {
    dim: usize,
    tag_len: usize,
    rows: Vec<(Bits, Bits)>,
    pivot_row: Vec<Option<usize>>,
}

impl Echelon {
    pub fn new(dim: usize, tag_len: usize) -> Self {
        Echelon { dim, tag_len, rows: Vec::new(), pivot_row: vec![None; dim] }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Reduce `v` against the basis, accumulating the tags of used rows into `t`.
    pub fn reduce(&self, v: &mut Bits, t: &mut Bits) {
        let mut from = 0;
        while let Some(p) = v.next_one(from) {
            if let Some(r) = self.pivot_row[p] {
                let (row, tag) = &self.rows[r];
                v.xor_assign(row);
                t.xor_assign(tag);
            }
            from = p + 1;
        }
    }

    /// Insert `v` with tag `t`. Returns the accumulated tag when `v` is
    /// already in the span (a linear dependency), otherwise `None`.
    pub fn insert(&mut self, mut v: Bits, mut t: Bits) -> Option<Bits> {
        debug_assert_eq!(v.len(), self.dim);
        debug_assert_eq!(t.len(), self.tag_len);
        self.reduce(&mut v, &mut t);
        match v.first_one() {
            None => Some(t),
            Some(p) => {
                self.pivot_row[p] = Some(self.rows.len());
                self.rows.push((v, t));
                None
            }
        }
    }

    pub fn contains(&self, v: &Bits) -> bool {
        let mut w = v.clone();
        let mut t = Bits::zeros(self.tag_len);
        self.reduce(&mut w, &mut t);
        w.is_zero()
    }

    /// Tag of a combination equal to `y`, if `y` is in the span.
    pub fn express(&self, y: &Bits) -> Option<Bits> {
        let mut w = y.clone();
        let mut t = Bits::zeros(self.tag_len);
        self.reduce(&mut w, &mut t);
        w.is_zero().then_some(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_ops_cross_word_boundaries() {
        let mut b = Bits::zeros(130);
        b.set(3, true);
        b.set(64, true);
        b.set(129, true);
        assert_eq!(b.ones().collect::<Vec<_>>(), vec![3, 64, 129]);
        assert_eq!(b.next_one(4), Some(64));
        assert_eq!(b.count_ones(), 3);
        b.flip(64);
        assert_eq!(b.next_one(4), Some(129));
    }

    #[test]
    fn kernel_and_solve() {
        // images: e0 -> 11, e1 -> 01, e2 -> 10
        let m = F2Map::new(
            2,
            vec![Bits::from_indices(2, [0, 1]), Bits::unit(2, 1), Bits::unit(2, 0)],
        );
        assert_eq!(m.rank(), 2);
        let k = m.kernel();
        assert_eq!(k.len(), 1);
        assert!(m.apply(&k[0]).is_zero());
        let y = Bits::unit(2, 0);
        let x = m.solve(&y).unwrap();
        assert_eq!(m.apply(&x), y);
    }
}

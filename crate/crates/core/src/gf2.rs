//! Small GF(2) linear algebra over packed bit rows.

/// Packed bit row.
pub type BitRow = Vec<u64>;

#[inline]
pub fn get(row: &[u64], i: usize) -> bool {
    (row[i >> 6] >> (i & 63)) & 1 == 1
}

#[inline]
pub fn set(row: &mut [u64], i: usize, v: bool) {
    let m = 1u64 << (i & 63);
    if v {
        row[i >> 6] |= m;
    } else {
        row[i >> 6] &= !m;
    }
}

#[inline]
pub fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

pub fn is_zero(row: &[u64]) -> bool {
    row.iter().all(|&w| w == 0)
}

pub fn zeros(bits: usize) -> BitRow {
    vec![0; bits.div_ceil(64)]
}

/// Echelon basis built incrementally. Pivot columns are searched in
/// `order`, so columns early in `order` are eliminated first.
#[derive(Debug, Clone)]
pub struct RowSpace {
    order: Vec<usize>,
    basis: Vec<(usize, BitRow)>,
}

impl RowSpace {
    pub fn new(bits: usize) -> Self {
        Self::with_order((0..bits).collect())
    }

    pub fn with_order(order: Vec<usize>) -> Self {
        Self {
            order,
            basis: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Reduces `row` against the basis in place.
    pub fn reduce(&self, row: &mut [u64]) {
        for (pivot, b) in &self.basis {
            if get(row, *pivot) {
                xor_into(row, b);
            }
        }
    }

    pub fn contains(&self, row: &[u64]) -> bool {
        let mut r = row.to_vec();
        self.reduce(&mut r);
        is_zero(&r)
    }

    /// Adds `row` to the span; returns false if it was already in it.
    pub fn insert(&mut self, row: &[u64]) -> bool {
        let mut r = row.to_vec();
        self.reduce(&mut r);
        let Some(&pivot) = self.order.iter().find(|&&c| get(&r, c)) else {
            return false;
        };
        for (_, b) in self.basis.iter_mut() {
            if get(b, pivot) {
                xor_into(b, &r);
            }
        }
        self.basis.push((pivot, r));
        true
    }

    pub fn rows(&self) -> impl Iterator<Item = &BitRow> {
        self.basis.iter().map(|(_, r)| r)
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.basis.iter().map(|(p, _)| *p)
    }
}

/// Combinations of `rows` that vanish on every column in `kill`, returned as
/// a basis of that subspace.
pub fn vanishing_on(rows: &[BitRow], bits: usize, kill: &[usize]) -> Vec<BitRow> {
    let mut order: Vec<usize> = kill.to_vec();
    let mut is_kill = vec![false; bits];
    for &k in kill {
        is_kill[k] = true;
    }
    order.extend((0..bits).filter(|&c| !is_kill[c]));
    let mut space = RowSpace::with_order(order);
    for r in rows {
        space.insert(r);
    }
    space
        .rows()
        .filter(|r| kill.iter().all(|&k| !get(r, k)))
        .cloned()
        .collect()
}

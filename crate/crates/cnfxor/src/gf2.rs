//! Dense bit-packed linear algebra over GF(2).
//!
//! An affine system holds rows of the form `x_a ⊕ x_b ⊕ … = rhs`. Rows are
//! packed one machine word per 64 columns; reduction brings the system to
//! reduced row-echelon form so forced columns can be read off directly and
//! the solution space enumerated over the free columns.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

/// Enumeration refuses to walk solution spaces with more free columns than this.
pub const ENUMERATION_GUARD: usize = 30;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("free dimension {free_dim} exceeds enumeration guard {max}")]
    GuardExceeded { free_dim: usize, max: usize },
    #[error("system is inconsistent; there are no solutions to enumerate")]
    Inconsistent,
}

/// Fixed-width bit vector packed into 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    /// Low `len` bits of `word` (`len` ≤ 64).
    pub fn from_u64(len: usize, word: u64) -> Self {
        assert!(len <= 64);
        let mask = if len == 64 { !0 } else { (1u64 << len) - 1 };
        BitVec {
            words: if len == 0 { vec![] } else { vec![word & mask] },
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w ^= o;
        }
    }

    /// Clears every bit that is set in `mask`.
    pub fn clear_masked(&mut self, mask: &BitVec) {
        debug_assert_eq!(self.len, mask.len);
        for (w, m) in self.words.iter_mut().zip(&mask.words) {
            *w &= !m;
        }
    }

    /// Parity of the AND with `other` (dot product over GF(2)).
    pub fn dot(&self, other: &BitVec) -> bool {
        debug_assert_eq!(self.len, other.len);
        let mut acc = 0u64;
        for (w, o) in self.words.iter().zip(&other.words) {
            acc ^= w & o;
        }
        acc.count_ones() % 2 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn first_set(&self) -> Option<usize> {
        for (i, w) in self.words.iter().enumerate() {
            if *w != 0 {
                return Some(i * 64 + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    pub fn any(&self) -> bool {
        self.words.iter().any(|w| *w != 0)
    }
}

/// One affine constraint: XOR of the flagged columns equals `rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf2Row {
    pub bits: BitVec,
    pub rhs: bool,
}

impl Gf2Row {
    pub fn zero(n: usize) -> Self {
        Gf2Row {
            bits: BitVec::zeros(n),
            rhs: false,
        }
    }

    pub fn from_cols(n: usize, cols: impl IntoIterator<Item = usize>, rhs: bool) -> Self {
        let mut bits = BitVec::zeros(n);
        for c in cols {
            // repeated columns cancel over GF(2)
            bits.toggle(c);
        }
        Gf2Row { bits, rhs }
    }

    /// Clone-from that reuses the existing word buffer.
    fn copy_from(&mut self, other: &Gf2Row) {
        self.bits.words.clone_from(&other.bits.words);
        self.bits.len = other.bits.len;
        self.rhs = other.rhs;
    }

    fn xor_assign(&mut self, other: &Gf2Row) {
        self.bits.xor_assign(&other.bits);
        self.rhs ^= other.rhs;
    }
}

/// Affine system over `n` columns, prior to reduction.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Gf2System {
    n: usize,
    rows: Vec<Gf2Row>,
}

impl Gf2System {
    pub fn new(n: usize) -> Self {
        Gf2System { n, rows: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Gf2Row] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push_row(&mut self, row: Gf2Row) {
        assert_eq!(row.bits.len(), self.n, "row width must equal system width");
        self.rows.push(row);
    }

    pub fn push_cols(&mut self, cols: impl IntoIterator<Item = usize>, rhs: bool) {
        let row = Gf2Row::from_cols(self.n, cols, rhs);
        self.rows.push(row);
    }

    /// Substitutes fixed columns: for every column flagged in `fixed`, its
    /// value is taken from `values` and folded into the right-hand sides.
    /// The returned system keeps width `n` with those columns zeroed.
    pub fn substitute(&self, fixed: &BitVec, values: &BitVec) -> Gf2System {
        assert_eq!(fixed.len(), self.n);
        assert_eq!(values.len(), self.n);
        let mut out = Gf2System::new(self.n);
        for row in &self.rows {
            let mut bits = row.bits.clone();
            let mut true_mask = bits.clone();
            // parity of assigned-true columns appearing in the row
            for (t, (f, v)) in true_mask
                .words
                .iter_mut()
                .zip(fixed.words.iter().zip(&values.words))
            {
                *t &= f & v;
            }
            let parity = true_mask.words.iter().fold(0u64, |a, w| a ^ w).count_ones() % 2 == 1;
            bits.clear_masked(fixed);
            out.rows.push(Gf2Row {
                bits,
                rhs: row.rhs ^ parity,
            });
        }
        out
    }

    /// Allocation-light residual propagation for search loops: substitutes
    /// the partial assignment, eliminates in place on `scratch`, and appends
    /// every forced `(column, value)` pair. Returns false when the residual
    /// system is infeasible. `scratch` is reused across calls.
    pub fn reduce_residual_into(
        &self,
        fixed: &BitVec,
        values: &BitVec,
        scratch: &mut Vec<Gf2Row>,
        forced: &mut Vec<(usize, bool)>,
    ) -> bool {
        debug_assert_eq!(fixed.len(), self.n);
        debug_assert_eq!(values.len(), self.n);
        scratch.resize(self.rows.len(), Gf2Row::zero(self.n));
        for (dst, src) in scratch.iter_mut().zip(&self.rows) {
            dst.copy_from(src);
            let mut parity = 0u64;
            for (b, (f, v)) in dst
                .bits
                .words
                .iter_mut()
                .zip(fixed.words.iter().zip(&values.words))
            {
                parity ^= *b & f & v;
                *b &= !f;
            }
            dst.rhs ^= parity.count_ones() % 2 == 1;
        }
        let mut rank = 0usize;
        for col in 0..self.n {
            let Some(pivot) = (rank..scratch.len()).find(|&i| scratch[i].bits.get(col)) else {
                continue;
            };
            scratch.swap(rank, pivot);
            let (head, tail) = scratch.split_at_mut(rank + 1);
            let pivot_row = &head[rank];
            for row in head[..rank].iter_mut().chain(tail.iter_mut()) {
                if row.bits.get(col) {
                    row.bits.xor_assign(&pivot_row.bits);
                    row.rhs ^= pivot_row.rhs;
                }
            }
            rank += 1;
            if rank == scratch.len() {
                break;
            }
        }
        for row in &scratch[rank..] {
            if row.rhs {
                return false;
            }
        }
        for row in &scratch[..rank] {
            if row.bits.count_ones() == 1 {
                forced.push((row.bits.first_set().unwrap(), row.rhs));
            }
        }
        true
    }

    /// Gauss-Jordan elimination to reduced row-echelon form.
    pub fn row_reduce(&self) -> ReducedSystem {
        let mut rows = self.rows.clone();
        let mut pivot_cols = Vec::new();
        let mut rank = 0usize;
        for col in 0..self.n {
            let Some(pivot) = (rank..rows.len()).find(|&i| rows[i].bits.get(col)) else {
                continue;
            };
            rows.swap(rank, pivot);
            let pivot_row = rows[rank].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != rank && row.bits.get(col) {
                    row.xor_assign(&pivot_row);
                }
            }
            pivot_cols.push(col);
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        let consistent = rows[rank..].iter().all(|r| !r.rhs);
        ReducedSystem {
            n: self.n,
            rows,
            rank,
            pivot_cols,
            consistent,
        }
    }
}

/// Result of `row_reduce`: rows in reduced row-echelon form (all-zero rows
/// at the bottom), the rank, and whether the system has any solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedSystem {
    n: usize,
    rows: Vec<Gf2Row>,
    rank: usize,
    pivot_cols: Vec<usize>,
    consistent: bool,
}

impl ReducedSystem {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_consistent(&self) -> bool {
        self.consistent
    }

    pub fn rows(&self) -> &[Gf2Row] {
        &self.rows
    }

    pub fn pivot_cols(&self) -> &[usize] {
        &self.pivot_cols
    }

    /// Columns not used as pivots, ascending.
    pub fn free_cols(&self) -> Vec<usize> {
        let mut pivots = vec![false; self.n];
        for &c in &self.pivot_cols {
            pivots[c] = true;
        }
        (0..self.n).filter(|&c| !pivots[c]).collect()
    }

    /// Rows constraining exactly one column, as `(column, value)` pairs.
    pub fn unit_rows(&self) -> impl Iterator<Item = (usize, bool)> + '_ {
        self.rows[..self.rank].iter().filter_map(|r| {
            if r.bits.count_ones() == 1 {
                Some((r.bits.first_set().unwrap(), r.rhs))
            } else {
                None
            }
        })
    }

    /// Reinterprets the reduced rows as a plain system (e.g. to re-reduce).
    pub fn as_system(&self) -> Gf2System {
        Gf2System {
            n: self.n,
            rows: self.rows.clone(),
        }
    }

    /// Exact number of solutions: 0 if inconsistent, else 2^(n − rank).
    pub fn solution_count(&self) -> BigUint {
        if !self.consistent {
            BigUint::zero()
        } else {
            BigUint::one() << (self.n - self.rank)
        }
    }

    /// One solution with every free column set to false. Only valid on a
    /// consistent system.
    pub fn particular_solution(&self) -> Result<BitVec, Gf2Error> {
        if !self.consistent {
            return Err(Gf2Error::Inconsistent);
        }
        let mut out = BitVec::zeros(self.n);
        for (row, &col) in self.rows.iter().zip(&self.pivot_cols) {
            out.set(col, row.rhs);
        }
        Ok(out)
    }

    /// Visits every satisfying assignment exactly once, walking the free
    /// columns in Gray-code order so consecutive solutions differ by one
    /// free column flip.
    pub fn for_each_solution<F: FnMut(&BitVec)>(&self, mut visit: F) -> Result<(), Gf2Error> {
        if !self.consistent {
            return Err(Gf2Error::Inconsistent);
        }
        let free = self.free_cols();
        let d = free.len();
        if d > ENUMERATION_GUARD {
            return Err(Gf2Error::GuardExceeded {
                free_dim: d,
                max: ENUMERATION_GUARD,
            });
        }
        // Flipping free column f toggles f itself plus every pivot column
        // whose row depends on f.
        let masks: Vec<BitVec> = free
            .iter()
            .map(|&f| {
                let mut m = BitVec::zeros(self.n);
                m.set(f, true);
                for (row, &col) in self.rows.iter().zip(&self.pivot_cols) {
                    if row.bits.get(f) {
                        m.toggle(col);
                    }
                }
                m
            })
            .collect();
        let mut current = self.particular_solution()?;
        visit(&current);
        for t in 1..(1u64 << d) {
            let j = t.trailing_zeros() as usize;
            current.xor_assign(&masks[j]);
            visit(&current);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn random_system(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Gf2System {
        let mut sys = Gf2System::new(n);
        for _ in 0..m {
            let cols: Vec<usize> = (0..n).filter(|_| rng.random::<bool>()).collect();
            sys.push_cols(cols, rng.random::<bool>());
        }
        sys
    }

    /// Textbook elimination on Vec<Vec<bool>>, for cross-checking rank and
    /// consistency without any bit packing.
    fn naive_reduce(n: usize, sys: &Gf2System) -> (usize, bool) {
        let mut rows: Vec<(Vec<bool>, bool)> = sys
            .rows()
            .iter()
            .map(|r| ((0..n).map(|c| r.bits.get(c)).collect(), r.rhs))
            .collect();
        let mut rank = 0;
        for col in 0..n {
            let Some(p) = (rank..rows.len()).find(|&i| rows[i].0[col]) else {
                continue;
            };
            rows.swap(rank, p);
            for i in 0..rows.len() {
                if i != rank && rows[i].0[col] {
                    let (pivot, rest) = if i < rank {
                        let (a, b) = rows.split_at_mut(rank);
                        (&b[0], &mut a[i])
                    } else {
                        let (a, b) = rows.split_at_mut(i);
                        (&a[rank], &mut b[0])
                    };
                    for c in 0..n {
                        rest.0[c] ^= pivot.0[c];
                    }
                    rest.1 ^= pivot.1;
                }
            }
            rank += 1;
        }
        let consistent = rows.iter().all(|(bits, rhs)| bits.iter().any(|&b| b) || !rhs);
        (rank, consistent)
    }

    fn satisfies(sys: &Gf2System, assignment: &BitVec) -> bool {
        sys.rows().iter().all(|r| r.bits.dot(assignment) == r.rhs)
    }

    #[test]
    fn forced_two_variable_system() {
        let mut sys = Gf2System::new(2);
        sys.push_cols([0, 1], true); // x1 ⊕ x2 = 1
        sys.push_cols([1], false); // x2 = 0
        let red = sys.row_reduce();
        assert_eq!(red.rank(), 2);
        assert!(red.is_consistent());
        let sol = red.particular_solution().unwrap();
        assert!(sol.get(0));
        assert!(!sol.get(1));
    }

    #[test]
    fn contradictory_rows_are_inconsistent() {
        let mut sys = Gf2System::new(1);
        sys.push_cols([0], true);
        sys.push_cols([0], false);
        let red = sys.row_reduce();
        assert!(!red.is_consistent());
        assert_eq!(red.solution_count(), BigUint::zero());
    }

    #[test]
    fn rank_matches_naive_elimination() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let sys = random_system(&mut rng, 20, 50);
            let red = sys.row_reduce();
            let (rank, consistent) = naive_reduce(20, &sys);
            assert_eq!(red.rank(), rank);
            assert_eq!(red.is_consistent(), consistent);
        }
    }

    #[test]
    fn empty_system_counts_all_assignments() {
        let sys = Gf2System::new(3);
        let red = sys.row_reduce();
        assert_eq!(red.solution_count(), BigUint::from(8u32));
    }

    #[test]
    fn single_constraint_halves_the_space() {
        let mut sys = Gf2System::new(2);
        sys.push_cols([0, 1], true);
        let red = sys.row_reduce();
        assert_eq!(red.solution_count(), BigUint::from(2u32));
    }

    #[test]
    fn count_matches_exhaustive_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let n = 1 + rng.random_range(0..12usize);
            let m = rng.random_range(0..=n + 3);
            let sys = random_system(&mut rng, n, m);
            let red = sys.row_reduce();
            let mut expected = 0u64;
            for bits in 0..(1u64 << n) {
                let mut a = BitVec::zeros(n);
                for i in 0..n {
                    a.set(i, bits >> i & 1 == 1);
                }
                if satisfies(&sys, &a) {
                    expected += 1;
                }
            }
            assert_eq!(red.solution_count(), BigUint::from(expected));
        }
    }

    #[test]
    fn row_reduce_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let sys = random_system(&mut rng, 16, 12);
            let red = sys.row_reduce();
            let again = red.as_system().row_reduce();
            assert_eq!(red, again);
        }
    }

    #[test]
    fn appending_a_row_never_gains_solutions() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..200 {
            let n = 1 + rng.random_range(0..10usize);
            let m = rng.random_range(0..=n);
            let mut sys = random_system(&mut rng, n, m);
            let before = sys.row_reduce().solution_count();
            let cols: Vec<usize> = (0..n).filter(|_| rng.random::<bool>()).collect();
            sys.push_cols(cols, rng.random::<bool>());
            let after = sys.row_reduce().solution_count();
            assert!(after <= before);
        }
    }

    #[test]
    fn enumeration_of_single_unit_row() {
        let mut sys = Gf2System::new(2);
        sys.push_cols([0], true); // x1 = 1
        let red = sys.row_reduce();
        let mut seen = Vec::new();
        red.for_each_solution(|a| seen.push((a.get(0), a.get(1)))).unwrap();
        seen.sort();
        assert_eq!(seen, vec![(true, false), (true, true)]);
    }

    #[test]
    fn enumeration_of_inconsistent_system_is_an_error() {
        let mut sys = Gf2System::new(1);
        sys.push_cols([0], true);
        sys.push_cols([0], false);
        let red = sys.row_reduce();
        let err = red.for_each_solution(|_| {}).unwrap_err();
        assert_eq!(err, Gf2Error::Inconsistent);
    }

    #[test]
    fn enumeration_matches_exhaustive_filter() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..40 {
            let n = 10;
            let m = rng.random_range(0..=6);
            let sys = random_system(&mut rng, n, m);
            let red = sys.row_reduce();
            if !red.is_consistent() {
                continue;
            }
            let mut visited = HashSet::new();
            red.for_each_solution(|a| {
                let key: Vec<bool> = (0..n).map(|i| a.get(i)).collect();
                assert!(visited.insert(key), "solution visited twice");
            })
            .unwrap();
            let mut expected = HashSet::new();
            for bits in 0..(1u64 << n) {
                let mut a = BitVec::zeros(n);
                for i in 0..n {
                    a.set(i, bits >> i & 1 == 1);
                }
                if satisfies(&sys, &a) {
                    expected.insert((0..n).map(|i| a.get(i)).collect::<Vec<bool>>());
                }
            }
            assert_eq!(visited, expected);
        }
    }

    #[test]
    fn enumeration_guard_trips() {
        let sys = Gf2System::new(40);
        let red = sys.row_reduce();
        let err = red.for_each_solution(|_| {}).unwrap_err();
        assert_eq!(
            err,
            Gf2Error::GuardExceeded {
                free_dim: 40,
                max: ENUMERATION_GUARD
            }
        );
    }

    #[test]
    fn substitute_folds_fixed_columns_into_rhs() {
        // x1 ⊕ x2 ⊕ x3 = 1 with x1=1, x3=0 fixed leaves x2 = 0.
        let mut sys = Gf2System::new(3);
        sys.push_cols([0, 1, 2], true);
        let mut fixed = BitVec::zeros(3);
        fixed.set(0, true);
        fixed.set(2, true);
        let mut values = BitVec::zeros(3);
        values.set(0, true);
        let residual = sys.substitute(&fixed, &values);
        let red = residual.row_reduce();
        let forced: Vec<(usize, bool)> = red.unit_rows().collect();
        assert_eq!(forced, vec![(1, false)]);
    }
}

//! Difference-count kernels for sumsets of descendant heights.
//!
//! Both kernels count, for every `k` in a range `[lo, hi]`, the ordered
//! pairs `(x, y)` of `(A + S) x (B + S)` with `x - y = k`, where
//! `S = H_c + ... + H_{N-1}` is a sumset of offset sets. The sweep
//! materialises both sets; the stage convolution never does, and instead
//! convolves per-stage difference counts from the top stage down, dropping
//! partial sums that the remaining stages can no longer bring into the window.
//!
//! The kernels are generic over the key type so that prefixes whose heights
//! fit comfortably in `i128` avoid big-integer arithmetic.

use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;
use std::ops::{Add, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub(crate) trait Key:
    Clone + Ord + Hash + Debug + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self>
{
    fn from_big(x: &BigInt) -> Option<Self>;
    fn to_big(&self) -> BigInt;
    fn origin() -> Self;
}

/// Magnitudes below this bound keep every intermediate sum far from `i128` overflow.
const I128_SAFE: i128 = 1 << 100;

impl Key for i128 {
    fn from_big(x: &BigInt) -> Option<Self> {
        x.to_i128().filter(|v| v.abs() < I128_SAFE)
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn origin() -> Self {
        0
    }
}

impl Key for BigInt {
    fn from_big(x: &BigInt) -> Option<Self> {
        Some(x.clone())
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn origin() -> Self {
        BigInt::zero()
    }
}

pub(crate) trait Count: Clone + Debug {
    fn nil() -> Self;
    fn unit() -> Self;
    fn add_mul(&mut self, other: &Self, m: u64);
    fn to_big(&self) -> BigUint;
}

impl Count for u128 {
    fn nil() -> Self {
        0
    }
    fn unit() -> Self {
        1
    }
    fn add_mul(&mut self, other: &Self, m: u64) {
        *self += other * m as u128;
    }
    fn to_big(&self) -> BigUint {
        BigUint::from(*self)
    }
}

impl Count for BigUint {
    fn nil() -> Self {
        BigUint::zero()
    }
    fn unit() -> Self {
        BigUint::one()
    }
    fn add_mul(&mut self, other: &Self, m: u64) {
        if m == 1 {
            *self += other;
        } else {
            *self += other * m;
        }
    }
    fn to_big(&self) -> BigUint {
        self.clone()
    }
}

pub(crate) fn convert<K: Key>(xs: &[BigInt]) -> Option<Vec<K>> {
    xs.iter().map(K::from_big).collect()
}

/// Sorted `(difference, multiplicity)` list of `X - Y`.
pub(crate) fn difference_counts<K: Key>(xs: &[K], ys: &[K]) -> Vec<(K, u64)> {
    let mut map: HashMap<K, u64> = HashMap::new();
    for x in xs {
        for y in ys {
            *map.entry(x.clone() - y.clone()).or_insert(0) += 1;
        }
    }
    let mut v: Vec<_> = map.into_iter().collect();
    v.sort();
    v
}

/// Sorted sumset `base + H_0 + H_1 + ...`; the caller guarantees distinct sums.
pub(crate) fn sumset<K: Key>(base: &[K], stages: &[Vec<K>]) -> Vec<K> {
    let mut cur: Vec<K> = base.to_vec();
    for offs in stages {
        let mut next = Vec::with_capacity(cur.len() * offs.len());
        for x in &cur {
            for t in offs {
                next.push(x.clone() + t.clone());
            }
        }
        cur = next;
    }
    cur.sort();
    cur
}

/// Number of pairs `(x, y)` with `lo <= x - y <= hi`, for sorted inputs.
pub(crate) fn pairs_in_range<K: Key>(xs: &[K], ys: &[K], lo: &K, hi: &K) -> u128 {
    xs.iter()
        .map(|x| {
            let start = ys.partition_point(|y| *y < x.clone() - hi.clone());
            let end = ys.partition_point(|y| *y <= x.clone() - lo.clone());
            end.saturating_sub(start) as u128
        })
        .sum()
}

/// Direct sweep over sorted `xs`, `ys`: counts of `x - y` in `[lo, hi]`.
pub(crate) fn sweep<K: Key>(xs: &[K], ys: &[K], lo: &K, hi: &K, budget: u64) -> Result<Vec<(K, u64)>> {
    let pairs = pairs_in_range(xs, ys, lo, hi);
    if pairs > budget as u128 {
        return Err(Error::PairBudget { required: pairs.to_string(), budget });
    }
    let mut map: HashMap<K, u64> = HashMap::new();
    for x in xs {
        let start = ys.partition_point(|y| *y < x.clone() - hi.clone());
        for y in &ys[start..] {
            let d = x.clone() - y.clone();
            if d < *lo {
                break;
            }
            *map.entry(d).or_insert(0) += 1;
        }
    }
    let mut v: Vec<_> = map.into_iter().collect();
    v.sort();
    Ok(v)
}

/// Pruned top-down convolution of per-stage difference counts.
///
/// `base` holds the difference counts of the operand heights, `stages` the
/// offset sets from the lowest stage up. Only differences in `[lo, hi]` are
/// returned.
pub(crate) fn stage_convolution<K: Key, C: Count>(
    base: &[(K, u64)],
    stages: &[Vec<K>],
    lo: &K,
    hi: &K,
) -> Vec<(K, C)> {
    let stage_counts: Vec<Vec<(K, u64)>> = stages.iter().map(|h| difference_counts(h, h)).collect();
    // [below_lo[i], below_hi[i]]: range reachable by the base plus stages below i
    let base_lo = base.first().map(|b| b.0.clone()).unwrap_or_else(K::origin);
    let base_hi = base.last().map(|b| b.0.clone()).unwrap_or_else(K::origin);
    let mut below_lo = vec![base_lo];
    let mut below_hi = vec![base_hi];
    for h in stages {
        let m = h.last().cloned().unwrap_or_else(K::origin);
        below_lo.push(below_lo.last().unwrap().clone() - m.clone());
        below_hi.push(below_hi.last().unwrap().clone() + m);
    }
    let mut states: HashMap<K, C> = HashMap::new();
    states.insert(K::origin(), C::unit());
    for i in (0..stages.len()).rev() {
        let reach_lo = below_lo[i].clone();
        let reach_hi = below_hi[i].clone();
        let mut next: HashMap<K, C> = HashMap::with_capacity(states.len() * 2);
        for (s, c) in &states {
            for (d, m) in &stage_counts[i] {
                let t = s.clone() + d.clone();
                // keep t only if t + [reach_lo, reach_hi] meets [lo, hi]
                if t.clone() + reach_hi.clone() < *lo || t.clone() + reach_lo.clone() > *hi {
                    continue;
                }
                next.entry(t).or_insert_with(C::nil).add_mul(c, *m);
            }
        }
        states = next;
    }
    let mut out: HashMap<K, C> = HashMap::new();
    for (s, c) in &states {
        for (d, m) in base {
            let t = s.clone() + d.clone();
            if t < *lo || t > *hi {
                continue;
            }
            out.entry(t).or_insert_with(C::nil).add_mul(c, *m);
        }
    }
    let mut v: Vec<_> = out.into_iter().collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn offsets_strategy() -> impl Strategy<Value = Vec<Vec<i128>>> {
        prop::collection::vec(prop::collection::btree_set(1i128..40, 1..3), 0..4).prop_map(|stages| {
            stages
                .into_iter()
                .map(|s| std::iter::once(0).chain(s).collect::<Vec<_>>())
                .collect()
        })
    }

    #[test]
    fn hk_sweep_counts() {
        let d = sumset::<i128>(&[0], &[vec![0, 1], vec![0, 4]]);
        assert_eq!(d, vec![0, 1, 4, 5]);
        let counts = sweep(&d, &d, &-5, &5, 1 << 20).unwrap();
        assert_eq!(counts, vec![(-5, 1), (-4, 2), (-3, 1), (-1, 2), (0, 4), (1, 2), (3, 1), (4, 2), (5, 1)]);
        assert!(matches!(sweep(&d, &d, &-5, &5, 15), Err(Error::PairBudget { .. })));
    }

    proptest! {
        // multiset sums may repeat here; both kernels count pairs of index tuples
        #[test]
        fn convolution_matches_sweep(stages in offsets_strategy(), a in prop::collection::btree_set(0i128..10, 1..3),
                                     b in prop::collection::btree_set(0i128..10, 1..3), lo in -120i128..120, len in 0i128..120) {
            let hi = lo + len;
            let a: Vec<i128> = a.into_iter().collect();
            let b: Vec<i128> = b.into_iter().collect();
            let xs = sumset(&a, &stages);
            let ys = sumset(&b, &stages);
            let direct = sweep(&xs, &ys, &lo, &hi, u64::MAX).unwrap();
            let base = difference_counts(&a, &b);
            let conv: Vec<(i128, u128)> = stage_convolution(&base, &stages, &lo, &hi);
            let conv_big: Vec<(BigInt, BigUint)> = stage_convolution(
                &base.iter().map(|(k, m)| (BigInt::from(*k), *m)).collect::<Vec<_>>(),
                &stages.iter().map(|h| h.iter().map(|&x| BigInt::from(x)).collect()).collect::<Vec<_>>(),
                &BigInt::from(lo),
                &BigInt::from(hi),
            );
            let direct: Vec<(i128, u128)> = direct.into_iter().map(|(k, c)| (k, c as u128)).collect();
            prop_assert_eq!(&conv, &direct);
            let conv_big: Vec<(i128, u128)> = conv_big.into_iter().map(|(k, c)| (k.to_i128().unwrap(), c.to_u128().unwrap())).collect();
            prop_assert_eq!(conv_big, direct);
        }
    }
}

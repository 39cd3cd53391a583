//! Test-side oracles, written against the stage lists only.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rankone::construction::StageSpec;

/// One explicit column: entry `i` is 1 + the level of the starting column, or 0 for a spacer.
pub fn stack(stages: &[StageSpec], from_height: usize, from: usize, to: usize) -> Vec<u32> {
    let mut col: Vec<u32> = (1..=from_height as u32).collect();
    for st in &stages[from..to] {
        let mut next = Vec::new();
        for s in st.spacers() {
            next.extend_from_slice(&col);
            next.extend(std::iter::repeat_n(0, s.to_usize().unwrap()));
        }
        col = next;
    }
    col
}

pub fn heights(stages: &[StageSpec]) -> Vec<BigInt> {
    let mut h = vec![BigInt::from(1)];
    for st in stages {
        let last = h.last().unwrap().clone();
        let spacers: BigInt = st.spacers().iter().sum();
        h.push(last * st.cuts() + spacers);
    }
    h
}

/// `mu(A ∩ T^k B)` by listing columns, for sets given as (column, heights).
/// Returns `None` when no column within `budget` levels settles the shift.
pub fn naive_correlation(
    stages: &[StageSpec],
    a: (usize, &[u64]),
    b: (usize, &[u64]),
    k: i64,
    budget: usize,
) -> Option<BigRational> {
    let h = heights(stages);
    let from = a.0.max(b.0);
    let top_height = h[from].to_usize()?;
    // which levels of C_from lie in A and in B
    let mark = |(col, hs): (usize, &[u64])| -> Option<Vec<bool>> {
        let sim = stack(stages, h[col].to_usize()?, col, from);
        Some(sim.iter().map(|&l| l != 0 && hs.contains(&(l as u64 - 1))).collect())
    };
    let (in_a, in_b) = (mark(a)?, mark(b)?);
    let mut width = BigRational::new(1.into(), 1.into());
    for st in &stages[..from] {
        width /= BigRational::from_integer(st.cuts().into());
    }
    for stage in from..=stages.len() {
        if h[stage] > BigInt::from(budget) {
            return None;
        }
        let col = stack(stages, top_height, from, stage);
        let pa: Vec<usize> = (0..col.len()).filter(|&i| col[i] != 0 && in_a[col[i] as usize - 1]).collect();
        let pb: Vec<usize> = (0..col.len()).filter(|&i| col[i] != 0 && in_b[col[i] as usize - 1]).collect();
        let highest = pa.last().copied().max(pb.last().copied()).unwrap_or(0);
        if highest + (k.unsigned_abs() as usize) < col.len() {
            let count = pa.iter().filter(|&&p| {
                let q = p as i64 - k;
                q >= 0 && pb.binary_search(&(q as usize)).is_ok()
            }).count();
            return Some(width * BigRational::from_integer(count.into()));
        }
        if stage < stages.len() {
            width /= BigRational::from_integer(stages[stage].cuts().into());
        }
    }
    None
}

/// All sums `sum c_t x_t` with `c_t` in `-c..=c`.
pub fn signed_sums(xs: &[BigInt], c: i64) -> Vec<BigInt> {
    let mut sums = vec![BigInt::zero()];
    for x in xs {
        sums = sums.iter().flat_map(|s| (-c..=c).map(move |t| s + x * t)).collect();
    }
    sums
}

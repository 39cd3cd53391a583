//! Explicit column simulation, used to check the sumset formulas.
//!
//! The column `C_N` is built as a vector of levels by literally cutting,
//! adding spacers and stacking, starting from a chosen column `C_c`. Each
//! entry records which level of `C_c` it came from, or that it is a spacer
//! added later. Nothing here uses offset sets or sumsets.
//!
//! [`windowed_oracle`] stacks the same way but keeps only the first and last
//! `W` levels of each column together with the pair counts at offsets up to
//! `W`, which is enough to concatenate columns exactly. It reaches columns
//! far too tall to list.

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};

use crate::arith::{rat_int, Rational};
use crate::descendants::LevelSet;
use crate::error::{Error, Result};
use crate::geometry::TowerGeometry;

const SPACER: u32 = 0;

#[derive(Clone, Debug)]
pub struct ColumnSimulation {
    from: usize,
    stage: usize,
    // 1 + height in C_from, or SPACER
    labels: Vec<u32>,
}

impl ColumnSimulation {
    /// Builds `C_stage` from `C_from`; `budget` caps the number of simulated levels.
    pub fn build(geom: &TowerGeometry, from: usize, stage: usize, budget: u64) -> Result<Self> {
        if from > stage || stage > geom.depth() {
            return Err(Error::Precondition(format!(
                "simulation needs column {from} <= stage {stage} <= depth {}",
                geom.depth()
            )));
        }
        let levels = geom.height(stage);
        if levels > &BigInt::from(budget) {
            return Err(Error::SizeBudget { required: levels.to_string(), budget });
        }
        let base = geom.height(from).to_u32().ok_or_else(|| Error::SizeBudget {
            required: geom.height(from).to_string(),
            budget,
        })?;
        let mut labels: Vec<u32> = (1..=base).collect();
        for n in from..stage {
            let spec = &geom.stages()[n];
            let mut next = Vec::with_capacity(levels.to_usize().unwrap_or(0));
            for s in spec.spacers() {
                next.extend_from_slice(&labels);
                next.resize(next.len() + s.to_usize().unwrap(), SPACER);
            }
            labels = next;
        }
        Ok(ColumnSimulation { from, stage, labels })
    }

    pub fn from_column(&self) -> usize {
        self.from
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Marks the levels of `C_stage` lying inside the given levels of `C_from`.
    pub fn membership(&self, heights: &[BigInt]) -> Vec<bool> {
        let mut wanted = vec![false; self.labels.iter().copied().max().unwrap_or(0) as usize + 1];
        for h in heights {
            if let Some(i) = h.to_usize() {
                if i + 1 < wanted.len() {
                    wanted[i + 1] = true;
                }
            }
        }
        self.labels.iter().map(|&l| l != SPACER && wanted[l as usize]).collect()
    }

    pub fn positions(&self, heights: &[BigInt]) -> Vec<usize> {
        self.membership(heights)
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect()
    }
}

/// `mu(A ∩ T^k B)` read off the simulated column `C_N`.
pub fn oracle_correlation(
    geom: &TowerGeometry,
    a: &LevelSet,
    b: &LevelSet,
    k: &BigInt,
    stage: usize,
    budget: u64,
) -> Result<Rational> {
    let sim_a = ColumnSimulation::build(geom, a.column(), stage, budget)?;
    let pos_a = sim_a.positions(a.heights());
    let in_b = if b.column() == a.column() {
        sim_a.membership(b.heights())
    } else {
        ColumnSimulation::build(geom, b.column(), stage, budget)?.membership(b.heights())
    };
    let top = sim_a.len() as u64 - 1;
    let highest = pos_a
        .last()
        .copied()
        .max(in_b.iter().rposition(|&m| m))
        .unwrap_or(0) as u64;
    let limit = top.saturating_sub(highest);
    let shift = k.to_i64().filter(|s| s.unsigned_abs() <= limit).ok_or_else(|| Error::OracleRange {
        k: k.to_string(),
        max: limit.to_string(),
        column: stage,
    })?;
    // x in A at position p lies in T^k B iff T^{-k} x, at position p - k, lies in B
    let hits = pos_a
        .iter()
        .filter(|&&p| {
            let q = p as i64 - shift;
            q >= 0 && in_b[q as usize]
        })
        .count();
    Ok(geom.width(stage) * rat_int(hits as i64))
}

const IN_A: u8 = 1;
const IN_B: u8 = 2;

/// A column seen through windows of `w` levels at each end.
#[derive(Clone, Debug)]
struct Windowed {
    len: BigInt,
    head: Vec<u8>,
    tail: Vec<u8>,
    /// `counts[k + w]` = #{(p, q) : p - q = k, p in A, q in B}.
    counts: Vec<BigUint>,
}

impl Windowed {
    fn from_flags(flags: &[u8], w: usize) -> Self {
        let mut counts = vec![BigUint::zero(); 2 * w + 1];
        for (p, &fp) in flags.iter().enumerate() {
            if fp & IN_A == 0 {
                continue;
            }
            let lo = p.saturating_sub(w);
            let hi = (p + w).min(flags.len() - 1);
            for (q, &fq) in flags.iter().enumerate().take(hi + 1).skip(lo) {
                if fq & IN_B != 0 {
                    counts[p + w - q] += 1u32;
                }
            }
        }
        let n = flags.len().min(w);
        Windowed {
            len: BigInt::from(flags.len()),
            head: flags[..n].to_vec(),
            tail: flags[flags.len() - n..].to_vec(),
            counts,
        }
    }

    fn spacer(s: &BigInt, w: usize) -> Self {
        let n = s.to_usize().map_or(w, |x| x.min(w));
        Windowed { len: s.clone(), head: vec![0; n], tail: vec![0; n], counts: vec![BigUint::zero(); 2 * w + 1] }
    }

    fn concat(&self, other: &Windowed, w: usize) -> Windowed {
        let mut counts: Vec<BigUint> = self.counts.iter().zip(&other.counts).map(|(a, b)| a + b).collect();
        // the tail of self ends right before the head of other
        let t = self.tail.len();
        for (i, &x) in self.tail.iter().enumerate() {
            for (j, &y) in other.head.iter().enumerate() {
                let d = j + t - i;
                if d > w {
                    break;
                }
                if y & IN_A != 0 && x & IN_B != 0 {
                    counts[w + d] += 1u32;
                }
                if x & IN_A != 0 && y & IN_B != 0 {
                    counts[w - d] += 1u32;
                }
            }
        }
        let mut head = self.head.clone();
        if head.len() < w {
            head.extend(other.head.iter().take(w - head.len()));
        }
        let mut tail = other.tail.clone();
        if tail.len() < w {
            let need = (w - tail.len()).min(self.tail.len());
            let mut t = self.tail[self.tail.len() - need..].to_vec();
            t.extend(tail);
            tail = t;
        }
        Windowed { len: &self.len + &other.len, head, tail, counts }
    }

    /// No level of A or B among the top `w` levels.
    fn settled(&self, w: usize) -> bool {
        self.tail.len() == w && self.len > BigInt::from(w) && self.tail.iter().all(|&f| f == 0)
    }
}

/// `mu(A ∩ T^k B)` for `|k| <= window`, by stacking windowed columns from
/// the deeper of the two columns until the top `window` levels avoid `A` and `B`.
/// Returns the stage reached and the values for `k = -window..=window`.
pub fn windowed_oracle(
    geom: &TowerGeometry,
    a: &LevelSet,
    b: &LevelSet,
    window: usize,
    budget: u64,
) -> Result<(usize, Vec<Rational>)> {
    let need = (window as u128 + 1) * (window as u128 + 1);
    if need > budget as u128 {
        return Err(Error::SizeBudget { required: need.to_string(), budget });
    }
    let from = a.column().max(b.column());
    let base_len = geom.height(from).to_usize().filter(|&h| h as u64 <= budget).ok_or_else(|| Error::SizeBudget {
        required: geom.height(from).to_string(),
        budget,
    })?;
    let mark = |set: &LevelSet| -> Result<Vec<bool>> {
        Ok(ColumnSimulation::build(geom, set.column(), from, budget)?.membership(set.heights()))
    };
    let (in_a, in_b) = (mark(a)?, mark(b)?);
    let flags: Vec<u8> = (0..base_len).map(|i| (in_a[i] as u8 * IN_A) | (in_b[i] as u8 * IN_B)).collect();
    let mut col = Windowed::from_flags(&flags, window);
    let mut stage = from;
    while !col.settled(window) {
        if stage >= geom.depth() {
            return Err(Error::PrefixTooShallow {
                deepest: geom.depth(),
                detail: format!("windowed stacking still has A or B among the top {window} levels"),
            });
        }
        let mut next: Option<Windowed> = None;
        for s in geom.stages()[stage].spacers() {
            let piece = col.concat(&Windowed::spacer(s, window), window);
            next = Some(match next {
                None => piece,
                Some(acc) => acc.concat(&piece, window),
            });
        }
        col = next.expect("stages have at least two subcolumns");
        stage += 1;
    }
    let w = geom.width(stage);
    Ok((stage, col.counts.iter().map(|c| w * crate::arith::rat_from_uint(c)).collect()))
}

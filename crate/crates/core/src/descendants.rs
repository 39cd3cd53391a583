//! Descendant height sets, difference histograms and exact correlations.
//!
//! A level `J` of `C_j` is the union of the levels of `C_N` at heights
//! `h(J) + H_j + ... + H_{N-1}`. Once every such height leaves room for the
//! shift below the top of `C_N`, `mu(A ∩ T^k B)` is `w_N` times the number of
//! descendant pairs at distance `k`.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{rat_from_uint, to_pq, Rational};
use crate::cache::HistogramCache;
use crate::error::{Error, Result};
use crate::geometry::TowerGeometry;
use crate::kernel::{self, Count, Key};
use crate::oracle;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Level {
    column: usize,
    height: BigInt,
}

impl Level {
    pub fn new(column: usize, height: BigInt) -> Result<Self> {
        if height.is_negative() {
            return Err(Error::InvalidLevel(format!("negative height {height}")));
        }
        Ok(Level { column, height })
    }

    /// The unit interval, the only level of `C_0`.
    pub fn unit() -> Self {
        Level { column: 0, height: BigInt::zero() }
    }

    pub fn bottom(column: usize) -> Self {
        Level { column, height: BigInt::zero() }
    }

    pub fn column(&self) -> usize {
        self.column
    }

    pub fn height(&self) -> &BigInt {
        &self.height
    }

    pub fn check(&self, geom: &TowerGeometry) -> Result<()> {
        LevelSet::from(self.clone()).check(geom)
    }
}

/// A finite union of levels of one column.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LevelSet {
    column: usize,
    heights: Vec<BigInt>,
}

impl LevelSet {
    pub fn new(column: usize, mut heights: Vec<BigInt>) -> Result<Self> {
        if heights.is_empty() {
            return Err(Error::InvalidLevel("empty level set".into()));
        }
        heights.sort();
        if heights[0].is_negative() {
            return Err(Error::InvalidLevel(format!("negative height {}", heights[0])));
        }
        if heights.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidLevel("repeated height".into()));
        }
        Ok(LevelSet { column, heights })
    }

    pub fn unit() -> Self {
        Level::unit().into()
    }

    pub fn bottom(column: usize) -> Self {
        Level::bottom(column).into()
    }

    /// `[0, 1/2)` and `[1/2, 1)` when the first stage cuts `I` in two.
    pub fn halves_of_unit(geom: &TowerGeometry) -> Result<(Self, Self)> {
        if geom.depth() == 0 || geom.cuts(0) != 2 {
            return Err(Error::Precondition("halves of I need a first stage with two cuts".into()));
        }
        let h = geom.offsets(0);
        Ok((LevelSet::new(1, vec![h[0].clone()])?, LevelSet::new(1, vec![h[1].clone()])?))
    }

    pub fn column(&self) -> usize {
        self.column
    }

    pub fn heights(&self) -> &[BigInt] {
        &self.heights
    }

    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }

    pub fn levels(&self) -> impl Iterator<Item = Level> + '_ {
        self.heights.iter().map(move |h| Level { column: self.column, height: h.clone() })
    }

    pub fn measure(&self, geom: &TowerGeometry) -> Rational {
        geom.width(self.column) * Rational::from_integer(BigInt::from(self.len()))
    }

    pub fn check(&self, geom: &TowerGeometry) -> Result<()> {
        if self.column > geom.depth() {
            return Err(Error::DepthExceeded { requested: self.column, available: geom.depth() });
        }
        let top = self.heights.last().unwrap();
        if top >= geom.height(self.column) {
            return Err(Error::InvalidLevel(format!(
                "height {top} outside column {} of height {}",
                self.column,
                geom.height(self.column)
            )));
        }
        Ok(())
    }

    /// The same set written as levels of the deeper column `C_column`.
    pub fn lift(&self, geom: &TowerGeometry, column: usize, budget: u64) -> Result<Self> {
        if column < self.column || column > geom.depth() {
            return Err(Error::Precondition(format!("cannot lift column {} to {column}", self.column)));
        }
        check_size(geom, self.len(), self.column, column, budget)?;
        let stages: Vec<Vec<BigInt>> = (self.column..column).map(|n| geom.offsets(n).to_vec()).collect();
        Ok(LevelSet { column, heights: kernel::sumset(&self.heights, &stages) })
    }

    fn describe(&self) -> String {
        let hs: Vec<String> = self.heights.iter().map(|h| h.to_string()).collect();
        format!("C{}[{}]", self.column, hs.join(" "))
    }
}

impl From<Level> for LevelSet {
    fn from(l: Level) -> Self {
        LevelSet { column: l.column, heights: vec![l.height] }
    }
}

impl fmt::Display for LevelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

fn check_size(geom: &TowerGeometry, base: usize, from: usize, to: usize, budget: u64) -> Result<()> {
    let size = geom.cut_product(from, to) * BigInt::from(base);
    if size > BigInt::from(budget) {
        return Err(Error::SizeBudget { required: size.to_string(), budget });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DescendantSet {
    base: Level,
    stage: usize,
    heights: Vec<BigInt>,
}

impl DescendantSet {
    pub fn base(&self) -> &Level {
        &self.base
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    /// Sorted ascending.
    pub fn heights(&self) -> &[BigInt] {
        &self.heights
    }

    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }

    pub fn max(&self) -> &BigInt {
        self.heights.last().unwrap()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelChoice {
    /// Sweep when both sets and the pair count fit the budgets, otherwise convolve.
    #[default]
    Auto,
    PairSweep,
    StageConvolution,
}

/// Counts `|D_A ∩ (k + D_B)|` for `k` in `[lo, hi]` at stage `N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffHistogram {
    a: LevelSet,
    b: LevelSet,
    stage: usize,
    lo: BigInt,
    hi: BigInt,
    width: Rational,
    counts: Vec<(BigInt, BigUint)>,
    kernel: KernelChoice,
}

impl DiffHistogram {
    pub fn operands(&self) -> (&LevelSet, &LevelSet) {
        (&self.a, &self.b)
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn range(&self) -> (&BigInt, &BigInt) {
        (&self.lo, &self.hi)
    }

    /// `w_N`.
    pub fn width(&self) -> &Rational {
        &self.width
    }

    /// Kernel that produced the counts; `Auto` marks a cache hit.
    pub fn kernel(&self) -> KernelChoice {
        self.kernel
    }

    /// Nonzero counts, sorted by `k`.
    pub fn counts(&self) -> &[(BigInt, BigUint)] {
        &self.counts
    }

    pub fn count(&self, k: &BigInt) -> BigUint {
        match self.counts.binary_search_by(|(x, _)| x.cmp(k)) {
            Ok(i) => self.counts[i].1.clone(),
            Err(_) => BigUint::zero(),
        }
    }

    pub fn mu(&self, k: &BigInt) -> Rational {
        &self.width * rat_from_uint(&self.count(k))
    }

    pub fn total(&self) -> BigUint {
        self.counts.iter().map(|(_, c)| c).sum()
    }

    /// `sum of mu(k)` over `lo <= k <= hi`.
    pub fn mu_sum(&self, lo: &BigInt, hi: &BigInt) -> Rational {
        let start = self.counts.partition_point(|(k, _)| k < lo);
        let total: BigUint = self.counts[start..].iter().take_while(|(k, _)| k <= hi).map(|(_, c)| c).sum();
        &self.width * rat_from_uint(&total)
    }

    /// Rows `k,count,mu_p,mu_q` including zero counts inside the range.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,count,mu_p,mu_q\n");
        let mut k = self.lo.clone();
        let mut it = self.counts.iter().peekable();
        if (&self.hi - &self.lo).to_u64().is_none_or(|span| span > 1 << 22) {
            // sparse output for very wide ranges
            for (k, c) in &self.counts {
                push_row(&mut out, k, c, &self.width);
            }
            return out;
        }
        while k <= self.hi {
            let c = match it.peek() {
                Some((x, c)) if *x == k => {
                    it.next();
                    c.clone()
                }
                _ => BigUint::zero(),
            };
            push_row(&mut out, &k, &c, &self.width);
            k += 1;
        }
        out
    }

    pub(crate) fn from_parts(key_parts: (&LevelSet, &LevelSet, usize, &BigInt, &BigInt), width: Rational, counts: Vec<(BigInt, BigUint)>) -> Self {
        let (a, b, stage, lo, hi) = key_parts;
        DiffHistogram {
            a: a.clone(),
            b: b.clone(),
            stage,
            lo: lo.clone(),
            hi: hi.clone(),
            width,
            counts,
            kernel: KernelChoice::Auto,
        }
    }
}

fn push_row(out: &mut String, k: &BigInt, c: &BigUint, width: &Rational) {
    let mu = width * rat_from_uint(c);
    let pq = to_pq(&mu);
    let (p, q) = pq.split_once('/').unwrap();
    out.push_str(&format!("{k},{c},{p},{q}\n"));
}

/// What a cached histogram depends on, apart from the stage prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct CacheKey {
    pub(crate) text: String,
}

impl CacheKey {
    fn new(a: &LevelSet, b: &LevelSet, stage: usize, lo: &BigInt, hi: &BigInt) -> Self {
        CacheKey { text: format!("a={a};b={b};N={stage};lo={lo};hi={hi}") }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    /// Largest descendant set materialised.
    pub set_size: u64,
    /// Largest number of pairs visited by the sweep.
    pub pairs: u64,
    /// Largest column simulated by the oracle.
    pub oracle_levels: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { set_size: 1 << 22, pairs: 1 << 24, oracle_levels: 1 << 24 }
    }
}

/// Correlation engine over one geometry.
#[derive(Clone, Debug)]
pub struct Correlator<'a> {
    geom: &'a TowerGeometry,
    budgets: Budgets,
    kernel: KernelChoice,
    cache: Option<&'a HistogramCache>,
}

impl<'a> Correlator<'a> {
    pub fn new(geom: &'a TowerGeometry) -> Self {
        Correlator { geom, budgets: Budgets::default(), kernel: KernelChoice::Auto, cache: None }
    }

    pub fn with_budgets(mut self, budgets: Budgets) -> Self {
        self.budgets = budgets;
        self
    }

    pub fn with_kernel(mut self, kernel: KernelChoice) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn with_cache(mut self, cache: &'a HistogramCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn geometry(&self) -> &'a TowerGeometry {
        self.geom
    }

    pub fn budgets(&self) -> Budgets {
        self.budgets
    }

    pub fn descendants(&self, j: &Level, stage: usize) -> Result<DescendantSet> {
        j.check(self.geom)?;
        if stage < j.column || stage > self.geom.depth() {
            return Err(Error::Precondition(format!(
                "descendants need column {} <= N = {stage} <= depth {}",
                j.column,
                self.geom.depth()
            )));
        }
        let lifted = LevelSet::from(j.clone()).lift(self.geom, stage, self.budgets.set_size)?;
        Ok(DescendantSet { base: j.clone(), stage, heights: lifted.heights })
    }

    /// Smallest `N` with `max D(J, N) <= h_N - window`.
    pub fn min_valid_n(&self, j: &Level, window: &BigInt) -> Result<usize> {
        self.min_valid_n_sets(&[&LevelSet::from(j.clone())], window)
    }

    /// Smallest `N` valid for every level of every given set.
    pub fn min_valid_n_sets(&self, sets: &[&LevelSet], window: &BigInt) -> Result<usize> {
        if !window.is_positive() {
            return Err(Error::Precondition("window must be at least 1".into()));
        }
        let start = sets.iter().map(|s| s.column).max().unwrap_or(0);
        for s in sets {
            s.check(self.geom)?;
        }
        let mut last = String::new();
        for n in start..=self.geom.depth() {
            let max_d = sets
                .iter()
                .map(|s| s.heights.last().unwrap() + self.geom.big_m(n) - self.geom.big_m(s.column))
                .max()
                .unwrap();
            let room = self.geom.height(n) - window;
            if max_d <= room {
                return Ok(n);
            }
            last = format!("max D = {max_d} > h_N - window = {room}");
        }
        Err(Error::PrefixTooShallow { deepest: self.geom.depth(), detail: last })
    }

    /// Counts for `k` in `[-window, window]` at the smallest stage valid for all of them.
    pub fn correlation_series(&self, a: &LevelSet, b: &LevelSet, window: &BigInt) -> Result<DiffHistogram> {
        if window.is_negative() {
            return Err(Error::Precondition("window must be nonnegative".into()));
        }
        let n = self.min_valid_n_sets(&[a, b], &(window + 1))?;
        self.histogram_at(a, b, &-window, window, n)
    }

    /// Counts for `k` in `[lo, hi]` at the smallest stage valid for all of them.
    pub fn correlation_range(&self, a: &LevelSet, b: &LevelSet, lo: &BigInt, hi: &BigInt) -> Result<DiffHistogram> {
        let reach = lo.abs().max(hi.abs());
        let n = self.min_valid_n_sets(&[a, b], &(reach + 1))?;
        self.histogram_at(a, b, lo, hi, n)
    }

    /// `mu(A ∩ T^k B)`.
    pub fn correlation(&self, a: &LevelSet, b: &LevelSet, k: &BigInt) -> Result<Rational> {
        let n = self.min_valid_n_sets(&[a, b], &(k.abs() + 1))?;
        self.correlation_at(a, b, k, n)
    }

    /// Pair count at stage `N` times `w_N`; equals `mu(A ∩ T^k B)` once `N` is valid for `|k| + 1`.
    pub fn correlation_at(&self, a: &LevelSet, b: &LevelSet, k: &BigInt, stage: usize) -> Result<Rational> {
        Ok(self.histogram_at(a, b, k, k, stage)?.mu(k))
    }

    pub fn oracle_correlation(&self, a: &LevelSet, b: &LevelSet, k: &BigInt, stage: usize) -> Result<Rational> {
        a.check(self.geom)?;
        b.check(self.geom)?;
        oracle::oracle_correlation(self.geom, a, b, k, stage, self.budgets.oracle_levels)
    }

    /// Oracle values for `k = -window..=window` from windowed stacking, with the stage it settled at.
    pub fn windowed_oracle(&self, a: &LevelSet, b: &LevelSet, window: usize) -> Result<(usize, Vec<Rational>)> {
        a.check(self.geom)?;
        b.check(self.geom)?;
        oracle::windowed_oracle(self.geom, a, b, window, self.budgets.oracle_levels)
    }

    /// Descendant pair counts at stage `N` for differences in `[lo, hi]`.
    pub fn histogram_at(&self, a: &LevelSet, b: &LevelSet, lo: &BigInt, hi: &BigInt, stage: usize) -> Result<DiffHistogram> {
        a.check(self.geom)?;
        b.check(self.geom)?;
        let column = a.column.max(b.column);
        if stage < column || stage > self.geom.depth() {
            return Err(Error::Precondition(format!(
                "histogram needs common column {column} <= N = {stage} <= depth {}",
                self.geom.depth()
            )));
        }
        if lo > hi {
            return Err(Error::Precondition(format!("empty range [{lo}, {hi}]")));
        }
        let key = CacheKey::new(a, b, stage, lo, hi);
        let prefix = &self.geom.stages()[..stage];
        if let Some(cache) = self.cache {
            if let Some(counts) = cache.load(prefix, &key)? {
                return Ok(DiffHistogram::from_parts((a, b, stage, lo, hi), self.geom.width(stage).clone(), counts));
            }
        }
        let a_up = a.lift(self.geom, column, self.budgets.set_size)?;
        let b_up = b.lift(self.geom, column, self.budgets.set_size)?;
        let (counts, used) = self.run(&a_up, &b_up, stage, lo, hi)?;
        let hist = DiffHistogram {
            a: a.clone(),
            b: b.clone(),
            stage,
            lo: lo.clone(),
            hi: hi.clone(),
            width: self.geom.width(stage).clone(),
            counts,
            kernel: used,
        };
        if let Some(cache) = self.cache {
            cache.store(prefix, &key, &hist.counts)?;
        }
        Ok(hist)
    }

    fn run(&self, a: &LevelSet, b: &LevelSet, stage: usize, lo: &BigInt, hi: &BigInt) -> Result<(Vec<(BigInt, BigUint)>, KernelChoice)> {
        let g = self.geom;
        let column = a.column;
        let fits_i128 = [g.height(stage), lo, hi].iter().all(|x| <i128 as Key>::from_big(x).is_some());
        let branching = g.cut_product(column, stage);
        let max_count = &branching * &branching * BigInt::from(a.len() * b.len());
        let small_counts = max_count.bits() < 120;
        macro_rules! go {
            ($k:ty, $c:ty) => {
                self.run_typed::<$k, $c>(a, b, stage, lo, hi)
            };
        }
        match (fits_i128, small_counts) {
            (true, true) => go!(i128, u128),
            (true, false) => go!(i128, BigUint),
            (false, true) => go!(BigInt, u128),
            (false, false) => go!(BigInt, BigUint),
        }
    }

    fn run_typed<K: Key, C: Count>(&self, a: &LevelSet, b: &LevelSet, stage: usize, lo: &BigInt, hi: &BigInt) -> Result<(Vec<(BigInt, BigUint)>, KernelChoice)> {
        let g = self.geom;
        let column = a.column;
        let conv = |xs: &[BigInt]| kernel::convert::<K>(xs).expect("key range checked");
        let (klo, khi) = (K::from_big(lo).unwrap(), K::from_big(hi).unwrap());
        let stages: Vec<Vec<K>> = (column..stage).map(|n| conv(g.offsets(n))).collect();
        let (ka, kb) = (conv(&a.heights), conv(&b.heights));
        let branching = g.cut_product(column, stage);
        let sizes_fit = [a.len(), b.len()]
            .iter()
            .all(|&n| &branching * BigInt::from(n) <= BigInt::from(self.budgets.set_size));
        let sweep = |xs: &[K], ys: &[K]| -> Result<Vec<(BigInt, BigUint)>> {
            Ok(kernel::sweep(xs, ys, &klo, &khi, self.budgets.pairs)?
                .into_iter()
                .map(|(k, c)| (k.to_big(), BigUint::from(c)))
                .collect())
        };
        let convolve = || -> Result<Vec<(BigInt, BigUint)>> {
            let base_pairs = (a.len() * b.len()) as u64;
            if base_pairs > self.budgets.pairs {
                return Err(Error::PairBudget { required: base_pairs.to_string(), budget: self.budgets.pairs });
            }
            let base = kernel::difference_counts(&ka, &kb);
            Ok(kernel::stage_convolution::<K, C>(&base, &stages, &klo, &khi)
                .into_iter()
                .map(|(k, c)| (k.to_big(), c.to_big()))
                .collect())
        };
        match self.kernel {
            KernelChoice::StageConvolution => Ok((convolve()?, KernelChoice::StageConvolution)),
            KernelChoice::PairSweep => {
                if !sizes_fit {
                    check_size(g, a.len().max(b.len()), column, stage, self.budgets.set_size)?;
                }
                let xs = kernel::sumset(&ka, &stages);
                let ys = kernel::sumset(&kb, &stages);
                Ok((sweep(&xs, &ys)?, KernelChoice::PairSweep))
            }
            KernelChoice::Auto => {
                if sizes_fit {
                    let xs = kernel::sumset(&ka, &stages);
                    let ys = kernel::sumset(&kb, &stages);
                    if kernel::pairs_in_range(&xs, &ys, &klo, &khi) <= self.budgets.pairs as u128 {
                        return Ok((sweep(&xs, &ys)?, KernelChoice::PairSweep));
                    }
                }
                Ok((convolve()?, KernelChoice::StageConvolution))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use crate::construction::{build_family, ParamMap};
    use serde_json::json;

    fn geom(name: &str, params: serde_json::Value, depth: usize) -> TowerGeometry {
        let params: ParamMap = serde_json::from_value(params).unwrap();
        build_family(name, &params).unwrap().geometry(depth).unwrap()
    }

    fn ints(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn descendant_examples() {
        let chacon = geom("chacon", json!({}), 4);
        let c = Correlator::new(&chacon);
        assert_eq!(c.descendants(&Level::unit(), 2).unwrap().heights(), ints(&[0, 1, 3, 4]));
        assert_eq!(c.descendants(&Level::unit(), 0).unwrap().heights(), ints(&[0]));
        let power = geom("power", json!({"c": 2}), 3);
        let p = Correlator::new(&power);
        assert_eq!(p.descendants(&Level::unit(), 2).unwrap().heights(), ints(&[0, 1, 3, 9, 10, 12, 19, 20, 22]));
        let tiny = Correlator::new(&power).with_budgets(Budgets { set_size: 8, ..Budgets::default() });
        assert!(matches!(tiny.descendants(&Level::unit(), 2), Err(Error::SizeBudget { .. })));
    }

    #[test]
    fn min_valid_examples() {
        let hk = geom("hk", json!({}), 5);
        let c = Correlator::new(&hk);
        assert_eq!(c.min_valid_n(&Level::unit(), &big(6)).unwrap(), 2);
        assert_eq!(c.min_valid_n(&Level::unit(), &big(1)).unwrap(), 0);
        let chacon = geom("chacon", json!({}), 4);
        let c = Correlator::new(&chacon);
        // max D(I,1) = 1 <= h_1 - 2 = 1 already holds at N = 1
        assert_eq!(c.min_valid_n(&Level::unit(), &big(2)).unwrap(), 1);
        assert!(matches!(c.min_valid_n(&Level::unit(), &big(100)), Err(Error::PrefixTooShallow { deepest: 4, .. })));
    }

    #[test]
    fn correlation_examples() {
        let chacon = geom("chacon", json!({}), 6);
        let c = Correlator::new(&chacon);
        let i = LevelSet::unit();
        assert_eq!(c.correlation(&i, &i, &big(1)).unwrap(), rat(1, 2));
        assert_eq!(c.correlation_at(&i, &i, &big(1), 2).unwrap(), rat(1, 2));
        assert_eq!(c.correlation(&i, &i, &big(0)).unwrap(), rat(1, 1));
        let series = c.correlation_series(&i, &i, &big(1)).unwrap();
        assert_eq!(series.stage(), 1);
        assert_eq!(series.count(&big(0)), BigUint::from(2u32));
        assert_eq!(series.mu(&big(0)), rat(1, 1));

        let hk = geom("hk", json!({}), 6);
        let c = Correlator::new(&hk);
        assert_eq!(c.correlation(&i, &i, &big(3)).unwrap(), rat(1, 4));
        assert_eq!(c.oracle_correlation(&i, &i, &big(3), 2).unwrap(), rat(1, 4));
        let h = c.histogram_at(&i, &i, &big(-5), &big(5), 2).unwrap();
        let expect: Vec<(BigInt, BigUint)> = [(-5, 1u32), (-4, 2), (-3, 1), (-1, 2), (0, 4), (1, 2), (3, 1), (4, 2), (5, 1)]
            .iter()
            .map(|&(k, n)| (big(k), BigUint::from(n)))
            .collect();
        assert_eq!(h.counts(), &expect[..]);
        assert!(h.to_csv().starts_with("k,count,mu_p,mu_q\n-5,1,1,4\n-4,2,1,2\n-3,1,1,4\n-2,0,0,1\n"));

        let power = geom("power", json!({"c": 2}), 4);
        let c = Correlator::new(&power);
        assert_eq!(c.histogram_at(&i, &i, &big(1), &big(1), 1).unwrap().count(&big(1)), BigUint::from(1u32));
        let n = c.min_valid_n(&Level::unit(), &big(2)).unwrap();
        assert_eq!(c.correlation(&i, &i, &big(1)).unwrap(), c.oracle_correlation(&i, &i, &big(1), n).unwrap());
    }

    #[test]
    fn kernels_agree_and_budget_is_reported() {
        let hk = geom("hk", json!({}), 8);
        let i = LevelSet::unit();
        let sweep = Correlator::new(&hk).with_kernel(KernelChoice::PairSweep);
        let conv = Correlator::new(&hk).with_kernel(KernelChoice::StageConvolution);
        let w = hk.big_m(6).clone();
        let s = sweep.histogram_at(&i, &i, &-&w, &w, 6).unwrap();
        let v = conv.histogram_at(&i, &i, &-&w, &w, 6).unwrap();
        assert_eq!(s.counts(), v.counts());
        assert_eq!(s.kernel(), KernelChoice::PairSweep);
        assert_eq!(v.kernel(), KernelChoice::StageConvolution);
        let tight = Budgets { pairs: 100, ..Budgets::default() };
        assert!(matches!(
            sweep.clone().with_budgets(tight).histogram_at(&i, &i, &-&w, &w, 6),
            Err(Error::PairBudget { .. })
        ));
        let auto = Correlator::new(&hk).with_budgets(tight).histogram_at(&i, &i, &-&w, &w, 6).unwrap();
        assert_eq!(auto.kernel(), KernelChoice::StageConvolution);
        assert_eq!(auto.counts(), s.counts());
    }

    #[test]
    fn sets_in_different_columns() {
        let hk = geom("hk", json!({}), 7);
        let c = Correlator::new(&hk);
        let i = LevelSet::unit();
        let b2 = LevelSet::bottom(2);
        for k in -10..=10 {
            let k = big(k);
            let n = c.min_valid_n_sets(&[&i, &b2], &(k.abs() + 1)).unwrap();
            assert_eq!(c.correlation(&i, &b2, &k).unwrap(), c.oracle_correlation(&i, &b2, &k, n).unwrap());
            assert_eq!(c.correlation(&i, &b2, &k).unwrap(), c.correlation(&b2, &i, &-&k).unwrap());
        }
        let (l, r) = LevelSet::halves_of_unit(&hk).unwrap();
        assert_eq!(l.measure(&hk) + r.measure(&hk), rat(1, 1));
    }
}

//! Signed digit patterns of descendant differences in the power family.
//!
//! In towers with `H_i = {0, h_i, 2h_i + 1}` and `h_{i+1}` far above
//! `2h_i + 1`, every descendant height of the bottom level of `C_j` has a
//! unique digit expansion. A pair `(d, d')` maps to the vector of digit
//! differences after rounding `2h_i + 1` down to `2h_i`; the multiplicity
//! function of a vector counts the pairs mapping to it, by difference.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::arith::{binomial, pow_uint, rat_from_uint, Rational};
use crate::descendants::{Correlator, Level, LevelSet};
use crate::error::{Error, Result};
use crate::geometry::TowerGeometry;

pub const DEFAULT_EPS_CAP: usize = 6;

/// Entries `eps_i` in `-2..=2` for stages `j <= i < m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EpsilonVector {
    j: usize,
    entries: Vec<i8>,
}

impl EpsilonVector {
    pub fn new(j: usize, entries: Vec<i8>) -> Result<Self> {
        if let Some(e) = entries.iter().find(|e| !(-2..=2).contains(*e)) {
            return Err(Error::InvalidParameter { name: "epsilon".into(), reason: format!("entry {e} outside -2..=2") });
        }
        Ok(EpsilonVector { j, entries })
    }

    pub fn base(&self) -> usize {
        self.j
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `a_p`, the number of entries equal to `p`.
    pub fn count(&self, p: i8) -> usize {
        self.entries.iter().filter(|&&e| e == p).count()
    }

    /// `a_1 + a_{-1}`.
    pub fn odd_count(&self) -> usize {
        self.count(1) + self.count(-1)
    }

    /// All `5^len` vectors, in lexicographic order of entries.
    pub fn all(j: usize, len: usize) -> impl Iterator<Item = EpsilonVector> {
        let total = 5usize.pow(len as u32);
        (0..total).map(move |mut code| {
            let mut entries = vec![0i8; len];
            for e in entries.iter_mut().rev() {
                *e = (code % 5) as i8 - 2;
                code /= 5;
            }
            EpsilonVector { j, entries }
        })
    }
}

impl fmt::Display for EpsilonVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|e| e.to_string()).collect();
        f.write_str(&parts.join(";"))
    }
}

/// Checks that stages `j..m` have offset sets `{0, h_i, 2h_i + 1}` with greedy digits.
pub fn check_power_tower(geom: &TowerGeometry, j: usize, m: usize) -> Result<()> {
    if j > m || m > geom.depth() {
        return Err(Error::Precondition(format!("need j = {j} <= m = {m} <= depth {}", geom.depth())));
    }
    let mut below = BigInt::zero();
    for i in j..m {
        let h = geom.height(i);
        let expected = [BigInt::zero(), h.clone(), h * 2 + 1];
        if geom.offsets(i) != expected {
            return Err(Error::Precondition(format!("stage {i}: H_i is not {{0, h_i, 2h_i + 1}}")));
        }
        if &below >= h {
            return Err(Error::Precondition(format!("stage {i}: digits below h_i reach h_i")));
        }
        below += &expected[2];
    }
    Ok(())
}

fn check_cap(len: usize, cap: usize) -> Result<()> {
    if len > cap {
        return Err(Error::EnumerationCap { span: len, cap });
    }
    Ok(())
}

/// Digit indices (0, 1, 2 for `0, h_i, 2h_i + 1`) of `d` in `D(J, m)`, stage `j` first.
pub fn digits(geom: &TowerGeometry, j: usize, m: usize, d: &BigInt) -> Result<Vec<u8>> {
    check_power_tower(geom, j, m)?;
    let mut rest = d.clone();
    let mut out = vec![0u8; m - j];
    for i in (j..m).rev() {
        for idx in (0..3).rev() {
            let t = &geom.offsets(i)[idx];
            if &rest >= t {
                rest -= t;
                out[i - j] = idx as u8;
                break;
            }
        }
    }
    if !rest.is_zero() {
        return Err(Error::InvalidLevel(format!("{d} is not a descendant height of the bottom of C_{j} in C_{m}")));
    }
    Ok(out)
}

/// `eps_i = (rep(d_i) - rep(d'_i)) / h_i` with `rep(2h_i + 1) = 2h_i`.
pub fn g_map(geom: &TowerGeometry, j: usize, m: usize, d: &BigInt, d2: &BigInt) -> Result<EpsilonVector> {
    let a = digits(geom, j, m, d)?;
    let b = digits(geom, j, m, d2)?;
    let entries = a.iter().zip(&b).map(|(&x, &y)| x as i8 - y as i8).collect();
    EpsilonVector::new(j, entries)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicityFn {
    eps: EpsilonVector,
    /// Sorted `(k, eps~(k))`, positive values only.
    support: Vec<(BigInt, BigUint)>,
}

impl MultiplicityFn {
    pub fn epsilon(&self) -> &EpsilonVector {
        &self.eps
    }

    pub fn support(&self) -> &[(BigInt, BigUint)] {
        &self.support
    }

    pub fn value(&self, k: &BigInt) -> BigUint {
        match self.support.binary_search_by(|(x, _)| x.cmp(k)) {
            Ok(i) => self.support[i].1.clone(),
            Err(_) => BigUint::zero(),
        }
    }

    pub fn min(&self) -> &BigInt {
        &self.support[0].0
    }

    pub fn total(&self) -> BigUint {
        self.support.iter().map(|(_, c)| c).sum()
    }
}

/// Digit index pairs `(x, x')` with `x - x' = e`, for `e` in `-2..=2`.
fn digit_pairs(e: i8) -> &'static [(u8, u8)] {
    match e {
        -2 => &[(0, 2)],
        -1 => &[(0, 1), (1, 2)],
        0 => &[(0, 0), (1, 1), (2, 2)],
        1 => &[(1, 0), (2, 1)],
        2 => &[(2, 0)],
        _ => unreachable!("entries are range checked"),
    }
}

/// `eps~` by enumerating the digit choices consistent with `eps`.
pub fn multiplicity(geom: &TowerGeometry, m: usize, eps: &EpsilonVector, cap: usize) -> Result<MultiplicityFn> {
    let j = eps.j;
    if j + eps.len() != m {
        return Err(Error::Precondition(format!("vector of length {} does not span stages {j}..{m}", eps.len())));
    }
    check_power_tower(geom, j, m)?;
    check_cap(eps.len(), cap)?;
    let mut counts: BTreeMap<BigInt, BigUint> = BTreeMap::new();
    counts.insert(BigInt::zero(), BigUint::one());
    for (idx, &e) in eps.entries.iter().enumerate() {
        let h = geom.offsets(j + idx);
        let mut next: BTreeMap<BigInt, BigUint> = BTreeMap::new();
        for (k, c) in &counts {
            for &(x, y) in digit_pairs(e) {
                *next.entry(k + &h[x as usize] - &h[y as usize]).or_default() += c;
            }
        }
        counts = next;
    }
    Ok(MultiplicityFn { eps: eps.clone(), support: counts.into_iter().collect() })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lemma62Report {
    pub j: usize,
    pub m: usize,
    pub vectors: usize,
    /// Ks where `sum_eps eps~(k)` differs from the descendant histogram.
    pub a_mismatches: Vec<BigInt>,
    /// Vectors whose total differs from `3^{a_0} 2^{a_1 + a_{-1}}`.
    pub b_mismatches: Vec<EpsilonVector>,
    /// Grouping all descendant pairs by `g` reproduces every multiplicity function.
    pub g_consistent: bool,
    /// Every descendant height survives the digit round trip.
    pub digits_round_trip: bool,
}

impl Lemma62Report {
    pub fn holds(&self) -> bool {
        self.a_mismatches.is_empty() && self.b_mismatches.is_empty() && self.g_consistent && self.digits_round_trip
    }
}

pub fn lemma62_check(c: &Correlator, j: usize, m: usize, cap: usize) -> Result<Lemma62Report> {
    let g = c.geometry();
    check_power_tower(g, j, m)?;
    check_cap(m - j, cap)?;
    let fns: Vec<MultiplicityFn> =
        EpsilonVector::all(j, m - j).map(|e| multiplicity(g, m, &e, cap)).collect::<Result<_>>()?;

    let mut summed: BTreeMap<BigInt, BigUint> = BTreeMap::new();
    for f in &fns {
        for (k, v) in &f.support {
            *summed.entry(k.clone()).or_default() += v;
        }
    }
    let bottom = LevelSet::bottom(j);
    let top = summed.keys().next_back().unwrap().clone();
    let hist = c.histogram_at(&bottom, &bottom, &-&top, &top, m)?;
    let mut a_mismatches: Vec<BigInt> = summed.iter().filter(|(k, v)| hist.count(k) != **v).map(|(k, _)| k.clone()).collect();
    a_mismatches.extend(hist.counts().iter().filter(|(k, _)| !summed.contains_key(k)).map(|(k, _)| k.clone()));

    let b_mismatches = fns
        .iter()
        .filter(|f| f.total() != pow_uint(3, f.eps.count(0) as u64) * pow_uint(2, f.eps.odd_count() as u64))
        .map(|f| f.eps.clone())
        .collect();

    let d = c.descendants(&Level::bottom(j), m)?;
    let mut digits_round_trip = true;
    let mut expansions = Vec::with_capacity(d.len());
    for h in d.heights() {
        let ds = digits(g, j, m, h)?;
        let back: BigInt = ds.iter().enumerate().map(|(i, &x)| g.offsets(j + i)[x as usize].clone()).sum();
        digits_round_trip &= &back == h;
        expansions.push(ds);
    }
    let mut grouped: BTreeMap<Vec<i8>, BTreeMap<BigInt, BigUint>> = BTreeMap::new();
    for (x, dx) in d.heights().iter().zip(&expansions) {
        for (y, dy) in d.heights().iter().zip(&expansions) {
            let key: Vec<i8> = dx.iter().zip(dy).map(|(&a, &b)| a as i8 - b as i8).collect();
            *grouped.entry(key).or_default().entry(x - y).or_default() += 1u32;
        }
    }
    let g_consistent = fns.len() == grouped.len()
        && fns.iter().all(|f| {
            grouped
                .get(&f.eps.entries)
                .is_some_and(|m| m.iter().map(|(k, v)| (k.clone(), v.clone())).eq(f.support.iter().cloned()))
        });

    Ok(Lemma62Report { j, m, vectors: fns.len(), a_mismatches, b_mismatches, g_consistent, digits_round_trip })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinomialReport {
    /// Smallest `k` with `eps~(k) > 0`.
    pub a: BigInt,
    /// `a` assembled from the minimising digit choices.
    pub a_predicted: BigInt,
    /// `a_1 + a_{-1}`.
    pub n: usize,
    /// `eps~(a + k) = 3^{a_0} C(n, k)` for `0 <= k <= n` and zero elsewhere.
    pub matches: bool,
}

pub fn binomial_profile_check(geom: &TowerGeometry, mf: &MultiplicityFn) -> BinomialReport {
    let eps = &mf.eps;
    let n = eps.odd_count();
    let a = mf.min().clone();
    let scale = pow_uint(3, eps.count(0) as u64);
    let matches = mf.support.len() == n + 1
        && mf.support.iter().enumerate().all(|(k, (x, v))| {
            *x == &a + BigInt::from(k) && *v == &scale * binomial(n as u64, k as u64)
        });
    // eps_i = 1 as (h, 0), eps_i = -1 as (h, 2h + 1), eps_i = +-2 as (2h + 1, 0) or (0, 2h + 1)
    let a_predicted = eps
        .entries
        .iter()
        .enumerate()
        .map(|(i, &e)| -> BigInt {
            let h: &BigInt = geom.height(eps.j + i);
            match e {
                2 => h * 2i32 + 1i32,
                1 => h.clone(),
                -1 => -(h + 1i32),
                -2 => -(h * 2i32 + 1i32),
                _ => BigInt::zero(),
            }
        })
        .sum();
    BinomialReport { a, a_predicted, n, matches }
}

#[derive(Clone, Debug, PartialEq)]
pub struct REpsilonReport {
    pub n: usize,
    pub r: Rational,
    /// `2 C(2l, l) / 4^l`, which `R` attains at `n = 2l - 1` and `n = 2l`.
    pub derived: Rational,
    /// The explicit odd-case bound `(1/2^n) 2 sum_{k<=l} C(2l,k)(l-k)/l`, for `n = 2l - 1`.
    pub intermediate: Option<Rational>,
    /// The compact odd-case form `C(2l, l+1) / 4^l`, for `n = 2l - 1`.
    pub compact: Option<Rational>,
}

impl REpsilonReport {
    /// The bound that holds at every finite size: the intermediate one for odd `n`, the derived one for even `n`.
    pub fn bound(&self) -> &Rational {
        self.intermediate.as_ref().unwrap_or(&self.derived)
    }

    pub fn within_bound(&self) -> bool {
        &self.r <= self.bound()
    }
}

/// `R(eps) = sum_k |eps~(k) - eps~(k+1)| / sum_k eps~(k)`.
pub fn r_epsilon(mf: &MultiplicityFn) -> REpsilonReport {
    let mut variation = BigUint::zero();
    let mut prev: Option<(&BigInt, &BigUint)> = None;
    for (k, v) in &mf.support {
        match prev {
            Some((pk, pv)) if &(pk + 1) == k => variation += if pv > v { pv - v } else { v - pv },
            Some((_, pv)) => variation += pv + v,
            None => variation += v,
        }
        prev = Some((k, v));
    }
    if let Some((_, v)) = prev {
        variation += v;
    }
    let r = rat_from_uint(&variation) / rat_from_uint(&mf.total());
    let n = mf.eps.odd_count();
    let l = n.div_ceil(2) as u64;
    let four_l = rat_from_uint(&pow_uint(4, l));
    let derived = rat_from_uint(&(binomial(2 * l, l) * 2u32)) / &four_l;
    let (intermediate, compact) = if n % 2 == 1 {
        let inner: Rational = (0..=l)
            .map(|k| rat_from_uint(&binomial(2 * l, k)) * Rational::new(BigInt::from(l - k), BigInt::from(l)))
            .sum();
        let inter = inner * Rational::from_integer(BigInt::from(2)) / rat_from_uint(&pow_uint(2, n as u64));
        (Some(inter), Some(rat_from_uint(&binomial(2 * l, l + 1)) / &four_l))
    } else {
        (None, None)
    };
    REpsilonReport { n, r, derived, intermediate, compact }
}

/// `sum_{k<=l} C(2l,k)(l-k)/l` and `((l+1)/(2l)) C(2l, l+1)`.
pub fn binomial_identity(l: u64) -> (Rational, Rational) {
    assert!(l >= 1, "identity needs l >= 1");
    let lhs = (0..=l)
        .map(|k| rat_from_uint(&binomial(2 * l, k)) * Rational::new(BigInt::from(l - k), BigInt::from(l)))
        .sum();
    let rhs = Rational::new(BigInt::from(l + 1), BigInt::from(2 * l)) * rat_from_uint(&binomial(2 * l, l + 1));
    (lhs, rhs)
}

/// `d(N, m)` as a function of `len = m - j`: `sum_{t<N} C(len,t) 4^t 5^{len-t} / 9^len`.
pub fn d_ratio(len: usize, n: usize) -> Rational {
    let len = len as u64;
    let num: BigUint = (0..(n as u64).min(len + 1))
        .map(|t| binomial(len, t) * pow_uint(4, t) * pow_uint(5, len - t))
        .sum();
    rat_from_uint(&num) / rat_from_uint(&pow_uint(9, len))
}

/// `2^N (7/9)^len`.
pub fn d_bound(len: usize, n: usize) -> Rational {
    rat_from_uint(&(pow_uint(2, n as u64) * pow_uint(7, len as u64))) / rat_from_uint(&pow_uint(9, len as u64))
}

/// `d(N, m)` from enumerated multiplicity functions.
pub fn d_ratio_enumerated(geom: &TowerGeometry, j: usize, m: usize, n: usize, cap: usize) -> Result<Rational> {
    check_power_tower(geom, j, m)?;
    check_cap(m - j, cap)?;
    let mut num = BigUint::zero();
    let mut den = BigUint::zero();
    for e in EpsilonVector::all(j, m - j) {
        let total = multiplicity(geom, m, &e, cap)?.total();
        if e.odd_count() < n {
            num += &total;
        }
        den += total;
    }
    Ok(rat_from_uint(&num) / rat_from_uint(&den))
}

/// Rows `epsilon,a0,a1_plus_am1,min_support,r_p,r_q` for every vector.
pub fn epsilon_csv(geom: &TowerGeometry, j: usize, m: usize, cap: usize) -> Result<String> {
    let mut out = String::from("epsilon,a0,a1_plus_am1,min_support,r_p,r_q\n");
    for e in EpsilonVector::all(j, m.saturating_sub(j)) {
        let mf = multiplicity(geom, m, &e, cap)?;
        let r = r_epsilon(&mf).r;
        out.push_str(&format!("{e},{},{},{},{},{}\n", e.count(0), e.odd_count(), mf.min(), r.numer(), r.denom()));
    }
    Ok(out)
}

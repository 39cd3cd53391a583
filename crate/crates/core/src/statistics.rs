//! Ergodic statistics built on exact correlations: intrinsic weights, the
//! weak rational ergodicity quotient, the rational weak mixing deficit,
//! Renyi ratios, P/Q/R sums, zero-type decay, double ergodicity witnesses
//! and the adaptive construction of a subsequence rationally weakly mixing
//! prefix.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{rat_from_uint, rat_int, Rational};
use crate::construction::StageSpec;
use crate::descendants::{Budgets, Correlator, DiffHistogram, Level, LevelSet};
use crate::error::{Error, Result};
use crate::geometry::TowerGeometry;
use crate::oracle::ColumnSimulation;

/// `u_k(F) = mu(F ∩ T^k F) / mu(F)^2` for `k < n` and the partial sums `a_1..a_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSeries {
    pub f: LevelSet,
    pub u: Vec<Rational>,
    pub a: Vec<Rational>,
}

impl WeightSeries {
    /// `a_n(F)`; `a_0 = 0`.
    pub fn a_n(&self, n: usize) -> Rational {
        if n == 0 {
            Rational::zero()
        } else {
            self.a[n - 1].clone()
        }
    }
}

pub fn weights(c: &Correlator, f: &LevelSet, n: usize) -> Result<WeightSeries> {
    if n == 0 {
        return Ok(WeightSeries { f: f.clone(), u: vec![], a: vec![] });
    }
    let hist = c.correlation_range(f, f, &BigInt::zero(), &BigInt::from(n - 1))?;
    let mu_f = f.measure(c.geometry());
    let norm = &mu_f * &mu_f;
    let u: Vec<Rational> = (0..n).map(|k| hist.mu(&BigInt::from(k)) / &norm).collect();
    let mut acc = Rational::zero();
    let a = u
        .iter()
        .map(|x| {
            acc += x;
            acc.clone()
        })
        .collect();
    Ok(WeightSeries { f: f.clone(), u, a })
}

/// `a_n(I)` for a possibly huge `n`, summed over the histogram support only.
pub fn a_n_unit(c: &Correlator, n: &BigInt) -> Result<Rational> {
    if !n.is_positive() {
        return Ok(Rational::zero());
    }
    let i = LevelSet::unit();
    let last = n - 1;
    Ok(c.correlation_range(&i, &i, &BigInt::zero(), &last)?.mu_sum(&BigInt::zero(), &last))
}

/// Left side of the weak rational ergodicity or rational weak mixing limit at one `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeficitReport {
    pub a: LevelSet,
    pub b: LevelSet,
    pub n: BigInt,
    pub value: Rational,
    pub target: Rational,
    pub a_n: Rational,
}

impl DeficitReport {
    pub fn deviation(&self) -> Rational {
        (&self.value - &self.target).abs()
    }
}

/// `(1/a_n(I)) sum_{k<n} mu(A ∩ T^k B)`, target `mu(A) mu(B)`.
pub fn wre_quotient(c: &Correlator, a: &LevelSet, b: &LevelSet, n: &BigInt) -> Result<DeficitReport> {
    if !n.is_positive() {
        return Err(Error::Precondition("n must be at least 1".into()));
    }
    let last = n - 1;
    let sum = c.correlation_range(a, b, &BigInt::zero(), &last)?.mu_sum(&BigInt::zero(), &last);
    let a_n = a_n_unit(c, n)?;
    let g = c.geometry();
    Ok(DeficitReport {
        a: a.clone(),
        b: b.clone(),
        n: n.clone(),
        value: sum / &a_n,
        target: a.measure(g) * b.measure(g),
        a_n,
    })
}

/// `phi_n(A, B) = (1/a_n(I)) sum_{k<n} |mu(A ∩ T^k B) - mu(A) mu(B) u_k(I)|`, target 0.
pub fn rwm_deficit(c: &Correlator, a: &LevelSet, b: &LevelSet, n: &BigInt) -> Result<DeficitReport> {
    if !n.is_positive() {
        return Err(Error::Precondition("n must be at least 1".into()));
    }
    let last = n - 1;
    let zero = BigInt::zero();
    let i = LevelSet::unit();
    let ab = c.correlation_range(a, b, &zero, &last)?;
    let ii = c.correlation_range(&i, &i, &zero, &last)?;
    let g = c.geometry();
    let weight = a.measure(g) * b.measure(g);
    let keys: BTreeSet<&BigInt> = ab.counts().iter().chain(ii.counts()).map(|(k, _)| k).collect();
    let mut total = Rational::zero();
    for k in keys {
        total += (ab.mu(k) - &weight * ii.mu(k)).abs();
    }
    let a_n = ii.mu_sum(&zero, &last);
    Ok(DeficitReport { a: a.clone(), b: b.clone(), n: n.clone(), value: total / &a_n, target: Rational::zero(), a_n })
}

/// Supports of `k -> mu(J_1 ∩ T^k J_1)` and `k -> mu(J_1 ∩ T^k J_2)` over `|k| <= window`.
#[derive(Clone, Debug, PartialEq)]
pub struct DisjointSupportReport {
    pub j: usize,
    pub window: BigInt,
    pub disjoint: bool,
    pub violations: Vec<BigInt>,
    /// `sum |u_k(J_1) - u_k(J_1, J_2)|`.
    pub deficit_sum: Rational,
    /// `sum u_k(J_1)`.
    pub weight_sum: Rational,
    /// `|u_k(J_1) - u_k(J_1, J_2)| >= u_k(J_1)` for every `k`.
    pub termwise: bool,
}

/// Halves of the bottom level of `C_j`, as levels of `C_{j+1}`.
pub fn bottom_halves(geom: &TowerGeometry, j: usize) -> Result<(LevelSet, LevelSet)> {
    if j >= geom.depth() || geom.cuts(j) != 2 {
        return Err(Error::Precondition(format!("stage {j} must exist and cut in two")));
    }
    Ok((LevelSet::bottom(j + 1), LevelSet::new(j + 1, vec![geom.offsets(j)[1].clone()])?))
}

pub fn disjoint_support_check(c: &Correlator, j: usize, window: &BigInt) -> Result<DisjointSupportReport> {
    let g = c.geometry();
    let (j1, j2) = bottom_halves(g, j)?;
    let lo = -window;
    let h11 = c.correlation_range(&j1, &j1, &lo, window)?;
    let h12 = c.correlation_range(&j1, &j2, &lo, window)?;
    for n in j..h11.stage().max(h12.stage()) {
        let st = &g.stages()[n];
        if st.cuts() != 2 || !st.spacers()[0].is_zero() || st.spacers()[1] < g.height(n) * 2 {
            return Err(Error::Precondition(format!(
                "stage {n} is not a half cut with s_0 = 0 and s_1 >= 2 h_n"
            )));
        }
    }
    let mu1 = j1.measure(g);
    let mu2 = j2.measure(g);
    let keys: BTreeSet<&BigInt> = h11.counts().iter().chain(h12.counts()).map(|(k, _)| k).collect();
    let mut violations = Vec::new();
    let mut deficit_sum = Rational::zero();
    let mut weight_sum = Rational::zero();
    let mut termwise = true;
    for k in keys {
        let a = h11.mu(k);
        let b = h12.mu(k);
        if !a.is_zero() && !b.is_zero() {
            violations.push(k.clone());
        }
        let u1 = &a / (&mu1 * &mu1);
        let u12 = &b / (&mu1 * &mu2);
        let diff = (&u1 - &u12).abs();
        termwise &= diff >= u1;
        deficit_sum += diff;
        weight_sum += u1;
    }
    Ok(DisjointSupportReport {
        j,
        window: window.clone(),
        disjoint: violations.is_empty(),
        violations,
        deficit_sum,
        weight_sum,
        termwise,
    })
}

/// First stage below `m` where `2 s_{n, r_n - 1} >= h_{n+1}` fails.
pub fn exponential_growth_failure(geom: &TowerGeometry, m: usize) -> Option<usize> {
    (0..m.min(geom.depth())).find(|&n| geom.stages()[n].last_spacer() * 2 < *geom.height(n + 1))
}

fn require_exponential_growth(geom: &TowerGeometry, m: usize) -> Result<()> {
    if m > geom.depth() {
        return Err(Error::DepthExceeded { requested: m, available: geom.depth() });
    }
    match exponential_growth_failure(geom, m) {
        Some(n) => Err(Error::Precondition(format!("not exponentially growing at stage {n}"))),
        None => Ok(()),
    }
}

/// `S_n(1_I)` on each level of `I`, read off a simulated column deep enough
/// that no orbit segment of length `n` leaves it. Returns the level width and
/// the values, bottom level first.
fn simulated_visits(geom: &TowerGeometry, n: &BigInt, from: usize, budget: u64) -> Result<(Rational, Vec<u64>)> {
    let n = n.to_usize().ok_or_else(|| Error::SizeBudget { required: n.to_string(), budget })?;
    for stage in from..=geom.depth() {
        let sim = ColumnSimulation::build(geom, 0, stage, budget)?;
        let inside = sim.membership(&[BigInt::zero()]);
        let top = inside.iter().rposition(|&b| b).unwrap_or(0);
        if top + n > sim.len() {
            continue;
        }
        let mut prefix = Vec::with_capacity(inside.len() + 1);
        prefix.push(0u64);
        for &b in &inside {
            prefix.push(prefix.last().unwrap() + b as u64);
        }
        let values = (0..inside.len())
            .filter(|&p| inside[p])
            .map(|p| prefix[p + n] - prefix[p])
            .collect();
        return Ok((geom.width(stage).clone(), values));
    }
    Err(Error::PrefixTooShallow {
        deepest: geom.depth(),
        detail: format!("no simulated column holds orbit segments of length {n}"),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenyiReport {
    pub m: usize,
    pub n: BigInt,
    /// `N = |D(I, m)|`.
    pub size: usize,
    /// `N sum l^2 / (sum l)^2`.
    pub closed_form: Rational,
    /// `int_I S_n^2 / (int_I S_n)^2` from the simulated column.
    pub oracle: Rational,
    /// The descendant ranks give `S_n = N + 1 - l` on the `l`-th lowest descendant.
    pub ranks_match: bool,
}

/// Renyi ratio at `n = M_m + 1`.
pub fn renyi_ratio(c: &Correlator, m: usize) -> Result<RenyiReport> {
    let g = c.geometry();
    require_exponential_growth(g, m)?;
    let d = c.descendants(&Level::unit(), m)?;
    let n: BigInt = g.big_m(m) + 1;
    let big_n = d.len();
    let hs = d.heights();
    let ranks_match = hs.iter().enumerate().all(|(l, h)| {
        let end = hs.partition_point(|x| *x < h + &n);
        end - l == big_n - l
    });
    let sum_l: BigInt = (1..=big_n).map(BigInt::from).sum();
    let sum_l2: BigInt = (1..=big_n).map(|l| BigInt::from(l) * l).sum();
    let closed_form = Rational::new(BigInt::from(big_n) * sum_l2, &sum_l * &sum_l);
    let (w, values) = simulated_visits(g, &n, m, c.budgets().oracle_levels)?;
    let s1: BigInt = values.iter().map(|&v| BigInt::from(v)).sum();
    let s2: BigInt = values.iter().map(|&v| BigInt::from(v) * v).sum();
    let oracle = (&w * rat_int(s2)) / ((&w * rat_int(s1.clone())) * (&w * rat_int(s1)));
    Ok(RenyiReport { m, n, size: big_n, closed_form, oracle, ranks_match })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupNormPoint {
    pub m: usize,
    pub n: BigInt,
    /// `sup_I S_n(1_I)` from the simulated column.
    pub sup: u64,
    /// `|D(I, m)|`.
    pub size: usize,
    pub a_n: Rational,
    pub ratio: Rational,
}

/// `sup S_n(1_I) / a_n(I)` along `n = M_{m'} + 1` for `m' = 0..=m`.
pub fn sup_norm_profile(c: &Correlator, m: usize) -> Result<Vec<SupNormPoint>> {
    let g = c.geometry();
    require_exponential_growth(g, m)?;
    (0..=m)
        .map(|mm| {
            let n: BigInt = g.big_m(mm) + 1;
            let (_, values) = simulated_visits(g, &n, mm, c.budgets().oracle_levels)?;
            let sup = values.iter().copied().max().unwrap_or(0);
            let a_n = a_n_unit(c, &n)?;
            let ratio = rat_int(sup) / &a_n;
            Ok(SupNormPoint { m: mm, n, sup, size: c.descendants(&Level::unit(), mm)?.len(), a_n, ratio })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PqrTriple {
    pub m: usize,
    pub j: usize,
    pub d: BigInt,
    pub p: Rational,
    pub q: Rational,
    pub r: Rational,
}

/// The sums `P_m` and `Q_m` over `|k| <= M_m` for `J_1` the bottom level of `C_{j+1}`.
pub fn pqr(c: &Correlator, j: usize, d: &BigInt, m: usize) -> Result<PqrTriple> {
    let g = c.geometry();
    if m > g.depth() {
        return Err(Error::DepthExceeded { requested: m, available: g.depth() });
    }
    let j1 = LevelSet::bottom(j + 1);
    let big_m = g.big_m(m).clone();
    let neg = -&big_m;
    let lo = &neg + d.min(&BigInt::zero());
    let hi = &big_m + d.max(&BigInt::zero());
    let hist = c.correlation_range(&j1, &j1, &lo, &hi)?;
    let in_window = |k: &BigInt| *k >= neg && *k <= big_m;
    let mut keys: BTreeSet<BigInt> = BTreeSet::new();
    for (s, _) in hist.counts() {
        if in_window(s) {
            keys.insert(s.clone());
        }
        let t = s - d;
        if in_window(&t) {
            keys.insert(t);
        }
    }
    let mut diff = BigUint::zero();
    for k in &keys {
        let x = hist.count(k);
        let y = hist.count(&(k + d));
        diff += if x > y { x - y } else { y - x };
    }
    let p = hist.width() * rat_from_uint(&diff);
    let q = hist.mu_sum(&neg, &big_m);
    if q.is_zero() {
        return Err(Error::Verification("Q_m vanished".into()));
    }
    let r = &p / &q;
    Ok(PqrTriple { m, j, d: d.clone(), p, q, r })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairSetReport {
    pub stage: usize,
    pub size: usize,
    /// `r^2 - r - 2`.
    pub expected: usize,
    /// Shifts `a - b` over the set are pairwise more than `2 M_n` apart.
    pub unique: bool,
}

/// `(H_n x H_n)` minus the diagonal and minus the square on `{h_{n,0}, h_{n,0} + h_{n,1}}`.
pub fn almost_steep_pairs(geom: &TowerGeometry, n: usize) -> Result<PairSetReport> {
    if n >= geom.depth() || geom.cuts(n) < 3 {
        return Err(Error::Precondition(format!("stage {n} must exist with at least three cuts")));
    }
    let h = geom.offsets(n);
    let subs = geom.sub_heights(n);
    let excluded = [subs[0].clone(), &subs[0] + &subs[1]];
    let mut shifts = Vec::new();
    for a in h {
        for b in h {
            if a == b || (excluded.contains(a) && excluded.contains(b)) {
                continue;
            }
            shifts.push(a - b);
        }
    }
    shifts.sort();
    let gap = geom.big_m(n) * 2;
    let unique = shifts.windows(2).all(|w| &w[1] - &w[0] > gap);
    let r = geom.cuts(n);
    Ok(PairSetReport { stage: n, size: shifts.len(), expected: r * r - r - 2, unique })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroTypeRow {
    pub k: BigInt,
    pub histogram: Rational,
    pub formula: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayCheck {
    pub n: usize,
    pub bound: Rational,
    /// Largest `mu(I ∩ T^k I)` over the rows with `k > M_n`.
    pub max_beyond: Rational,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroTypeReport {
    pub m: usize,
    pub rows: Vec<ZeroTypeRow>,
    pub all_match: bool,
    pub decay: Vec<DecayCheck>,
}

/// `mu(I ∩ T^k I)` from the steep representation of `k` over `H_0..H_{m-1}`.
pub fn representation_mu(geom: &TowerGeometry, k: &BigInt, m: usize) -> Result<Rational> {
    let Some(rep) = geom.steep_decompose(k, m)? else {
        return Ok(Rational::zero());
    };
    let mut active = BTreeSet::new();
    for n in 0..m {
        let plus = rep.terms.iter().filter(|t| t.stage == n && t.coeff > 0).count();
        let minus = rep.terms.iter().filter(|t| t.stage == n && t.coeff < 0).count();
        if plus > 1 || minus > 1 {
            // not of the form x_n - x'_n with x_n, x'_n in H_n
            return Ok(Rational::zero());
        }
        if plus + minus > 0 {
            active.insert(n);
        }
    }
    let denom: BigInt = active.iter().map(|&n| BigInt::from(geom.cuts(n))).product();
    Ok(Rational::new(BigInt::one(), denom))
}

/// Compares histogram and representation values of `mu(I ∩ T^k I)` for
/// `0 <= k <= M_m`, at every `k` in `D(I,m) - D(I,m)` and at every small `k`.
pub fn zero_type_profile(c: &Correlator, m: usize) -> Result<ZeroTypeReport> {
    let g = c.geometry();
    let d = c.descendants(&Level::unit(), m)?;
    let mut ks: BTreeSet<BigInt> = BTreeSet::new();
    for x in d.heights() {
        for y in d.heights() {
            if x >= y {
                ks.insert(x - y);
            }
        }
    }
    let top = g.big_m(m).clone();
    let small = top.to_u64().unwrap_or(u64::MAX).min(256);
    ks.extend((0..=small).map(BigInt::from));
    let i = LevelSet::unit();
    let hist: DiffHistogram = c.correlation_range(&i, &i, &BigInt::zero(), &top)?;
    ks.extend(hist.counts().iter().map(|(k, _)| k.clone()));
    let mut rows = Vec::with_capacity(ks.len());
    for k in ks {
        let formula = representation_mu(g, &k, m)?;
        rows.push(ZeroTypeRow { histogram: hist.mu(&k), formula, k });
    }
    let all_match = rows.iter().all(|r| r.histogram == r.formula);
    let decay = (0..m)
        .map(|n| {
            let bound = Rational::new(BigInt::one(), BigInt::from(g.cuts(n)));
            let max_beyond = rows
                .iter()
                .filter(|r| &r.k > g.big_m(n))
                .map(|r| r.histogram.clone())
                .max()
                .unwrap_or_else(Rational::zero);
            DecayCheck { n, holds: max_beyond <= bound, bound, max_beyond }
        })
        .collect();
    Ok(ZeroTypeReport { m, rows, all_match, decay })
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessReport {
    pub j: usize,
    pub d: u64,
    pub n: BigInt,
    pub stage: usize,
    pub n_in_difference_set: bool,
    pub n_plus_d_in_difference_set: bool,
}

impl WitnessReport {
    pub fn holds(&self) -> bool {
        self.n_in_difference_set && self.n_plus_d_in_difference_set
    }
}

/// `n = h_{j+1,0} + ... + h_{j+d,0}`, checked against `D(A,N) - D(A,N)` for `A` the bottom of `C_j`.
pub fn double_ergodicity_witness(c: &Correlator, j: usize, d: u64) -> Result<WitnessReport> {
    let g = c.geometry();
    let last = j + d as usize;
    if last >= g.depth() {
        return Err(Error::DepthExceeded { requested: last + 1, available: g.depth() });
    }
    for i in j + 1..=last {
        let st = &g.stages()[i];
        if st.cuts() < 3 || !st.spacers()[0].is_zero() || !st.spacers()[1].is_one() {
            return Err(Error::Precondition(format!("stage {i} needs r >= 3, s_0 = 0 and s_1 = 1")));
        }
    }
    let n: BigInt = (j + 1..=last).map(|i| g.sub_heights(i)[0].clone()).sum();
    let a = LevelSet::bottom(j);
    let nd = &n + d;
    let hist = c.correlation_range(&a, &a, &n, &nd)?;
    let report = WitnessReport {
        j,
        d,
        stage: hist.stage(),
        n_in_difference_set: !hist.count(&n).is_zero(),
        n_plus_d_in_difference_set: !hist.count(&nd).is_zero(),
        n,
    };
    if !report.holds() {
        return Err(Error::Verification(format!(
            "witness n = {} fails at j = {j}, d = {d}: n in D-D is {}, n+d in D-D is {}",
            report.n, report.n_in_difference_set, report.n_plus_d_in_difference_set
        )));
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SrwmPhase {
    pub phase: usize,
    pub m: usize,
    pub tolerance: Rational,
    /// Largest `phi_m(A, B)` over the phase's dyadic pairs.
    pub worst_phi: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SrwmResult {
    pub stages: Vec<StageSpec>,
    pub phases: Vec<SrwmPhase>,
}

/// `1/2, 1/4, ..., 1/2^i_max`.
pub fn dyadic_schedule(i_max: usize) -> Vec<Rational> {
    (1..=i_max).map(|i| Rational::new(BigInt::one(), BigInt::one() << i)).collect()
}

fn chacon_stage() -> StageSpec {
    StageSpec::from_ints(2, &[0, 1]).expect("valid stage")
}

/// Largest `phi_m` over all pairs of levels of `D(I,1) ∪ ... ∪ D(I,i)`.
fn worst_phi(geom: &TowerGeometry, budgets: Budgets, i: usize, m: usize) -> Result<Rational> {
    let c = Correlator::new(geom).with_budgets(budgets);
    let mut sets = Vec::new();
    for q in 1..=i {
        for h in c.descendants(&Level::unit(), q)?.heights() {
            sets.push(LevelSet::new(q, vec![h.clone()])?);
        }
    }
    let n = BigInt::from(m);
    let mut worst = Rational::zero();
    for a in &sets {
        for b in &sets {
            let phi = rwm_deficit(&c, a, b, &n)?.value;
            if phi > worst {
                worst = phi;
            }
        }
    }
    Ok(worst)
}

/// Adaptive Chacon-style construction: phase `i` runs single-spacer stages
/// until `phi_m(A, B) < tolerances[i-1]` for every dyadic pair of order at
/// most `i`, then puts `2 h_m` spacers above the right subcolumn at stage `m`.
pub fn srwm_construct(tolerances: &[Rational], m_cap: usize, budgets: Budgets) -> Result<SrwmResult> {
    let mut stages: Vec<StageSpec> = Vec::new();
    let mut phases = Vec::new();
    let mut prev: Option<usize> = None;
    for (idx, tol) in tolerances.iter().enumerate() {
        let i = idx + 1;
        let mut m = prev.map_or(i, |p| (p + 1).max(i));
        let mut best: Option<Rational> = None;
        loop {
            if m > m_cap {
                return Err(Error::SearchExhausted {
                    phase: i,
                    m_cap,
                    best: best.map_or("none".into(), |b| crate::arith::to_pq(&b)),
                });
            }
            // evaluation prefix: committed stages, then single spacers
            let mut trial = stages.clone();
            trial.resize(2 * m + 8, chacon_stage());
            let geom = TowerGeometry::derive(&trial)?;
            let phi = worst_phi(&geom, budgets, i, m)?;
            if best.as_ref().is_none_or(|b| phi < *b) {
                best = Some(phi.clone());
            }
            if phi < *tol {
                stages.resize(m, chacon_stage());
                let h = geom.height(m).clone();
                stages.push(StageSpec::new(2, vec![BigInt::zero(), h * 2])?);
                phases.push(SrwmPhase { phase: i, m, tolerance: tol.clone(), worst_phi: phi });
                prev = Some(m);
                break;
            }
            m += 1;
        }
    }
    Ok(SrwmResult { stages, phases })
}

/// Rows `k, u_k(I), a_n(I), quotient_n, phi_n` with `n = k + 1`, each as p/q and decimal.
pub fn stats_series(c: &Correlator, a: &LevelSet, b: &LevelSet, n: usize) -> Result<String> {
    let mut out = String::from("k,u_k,u_k_decimal,a_n,a_n_decimal,quotient,quotient_decimal,phi_n,phi_n_decimal\n");
    if n == 0 {
        return Ok(out);
    }
    let zero = BigInt::zero();
    let last = BigInt::from(n - 1);
    let i = LevelSet::unit();
    let ab = c.correlation_range(a, b, &zero, &last)?;
    let ii = c.correlation_range(&i, &i, &zero, &last)?;
    let g = c.geometry();
    let weight = a.measure(g) * b.measure(g);
    let mut a_n = Rational::zero();
    let mut sum = Rational::zero();
    let mut deficit = Rational::zero();
    let cell = |x: &Rational| format!("{},{}", crate::arith::to_pq(x), crate::arith::to_decimal(x, 12));
    for k in 0..n {
        let k = BigInt::from(k);
        let u = ii.mu(&k);
        let m = ab.mu(&k);
        deficit += (&m - &weight * &u).abs();
        sum += m;
        a_n += &u;
        let row = format!("{k},{},{},{},{}\n", cell(&u), cell(&a_n), cell(&(&sum / &a_n)), cell(&(&deficit / &a_n)));
        out.push_str(&row);
    }
    Ok(out)
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

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn weight_examples() {
        let chacon = geom("chacon", json!({}), 8);
        let c = Correlator::new(&chacon);
        let i = LevelSet::unit();
        let w = weights(&c, &i, 2).unwrap();
        assert_eq!(w.u, vec![rat(1, 1), rat(1, 2)]);
        assert_eq!(w.a_n(2), rat(3, 2));
        let hk = geom("hk", json!({}), 8);
        let c = Correlator::new(&hk);
        assert_eq!(weights(&c, &i, 1).unwrap().a_n(1), rat(1, 1));
        let w = weights(&c, &i, 6).unwrap();
        assert_eq!(w.a_n(6), rat(5, 2));
        assert!(w.a.windows(2).all(|p| p[0] <= p[1]));
        assert_eq!(a_n_unit(&c, &big(6)).unwrap(), rat(5, 2));
    }

    #[test]
    fn quotient_examples() {
        let hk = geom("hk", json!({}), 8);
        let c = Correlator::new(&hk);
        let i = LevelSet::unit();
        let b1 = LevelSet::bottom(1);
        for n in [1, 5, 22] {
            assert_eq!(wre_quotient(&c, &i, &i, &big(n)).unwrap().value, rat(1, 1));
            assert_eq!(rwm_deficit(&c, &i, &i, &big(n)).unwrap().value, rat(0, 1));
        }
        let q = wre_quotient(&c, &b1, &b1, &big(1)).unwrap();
        assert_eq!(q.value, rat(1, 2));
        assert_eq!(q.target, rat(1, 4));
    }

    #[test]
    fn disjoint_supports_for_hk() {
        let hk = geom("hk", json!({}), 10);
        let c = Correlator::new(&hk);
        for j in 0..3 {
            let r = disjoint_support_check(&c, j, hk.big_m(3)).unwrap();
            assert!(r.disjoint && r.termwise, "j = {j}");
            assert!(r.deficit_sum >= r.weight_sum);
        }
        assert!(disjoint_support_check(&c, 0, &big(0)).unwrap().disjoint);
        let chacon = geom("chacon", json!({}), 10);
        assert!(matches!(
            disjoint_support_check(&Correlator::new(&chacon), 0, &big(3)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn renyi_examples() {
        let hk = geom("hk", json!({}), 10);
        let c = Correlator::new(&hk);
        let r = renyi_ratio(&c, 2).unwrap();
        assert_eq!((r.size, r.n.clone()), (4, big(6)));
        assert_eq!(r.closed_form, rat(6, 5));
        assert_eq!(r.oracle, r.closed_form);
        assert!(r.ranks_match);
        assert_eq!(renyi_ratio(&c, 3).unwrap().closed_form, rat(34, 27));
        let chacon = geom("chacon", json!({}), 10);
        assert!(matches!(renyi_ratio(&Correlator::new(&chacon), 2), Err(Error::Precondition(_))));
    }

    #[test]
    fn sup_norm_examples() {
        let hk = geom("hk", json!({}), 10);
        let c = Correlator::new(&hk);
        let profile = sup_norm_profile(&c, 3).unwrap();
        assert_eq!((profile[0].n.clone(), profile[0].sup, profile[0].ratio.clone()), (big(1), 1, rat(1, 1)));
        assert_eq!(profile[1].sup, 2);
        assert_eq!(profile[2].sup, 4);
        for p in &profile {
            assert_eq!(p.sup as usize, p.size);
            assert_eq!(p.a_n, rat(p.size as i64 + 1, 2));
        }
    }

    #[test]
    fn pqr_examples() {
        let power = geom("power", json!({"c": 3}), 6);
        let c = Correlator::new(&power);
        let t2 = pqr(&c, 0, &big(1), 2).unwrap();
        let t3 = pqr(&c, 0, &big(1), 3).unwrap();
        assert_eq!(t2.q, rat(3, 1) * LevelSet::bottom(1).measure(&power));
        assert_eq!(t3.q, t2.q.clone() * rat(3, 1));
        let zero = pqr(&c, 0, &big(0), 2).unwrap();
        assert!(zero.p.is_zero() && zero.r.is_zero());
    }

    #[test]
    fn pair_set_size() {
        let fam = geom("almost_steep", json!({"cuts": {"linear": {"offset": 3}}, "ratio": 4}), 5);
        for n in 0..4 {
            let r = almost_steep_pairs(&fam, n).unwrap();
            assert_eq!(r.size, r.expected);
            assert!(r.unique, "stage {n}");
        }
    }

    #[test]
    fn zero_type_examples() {
        let hk = geom("hk", json!({}), 8);
        let c = Correlator::new(&hk);
        assert_eq!(representation_mu(&hk, &big(4), 2).unwrap(), rat(1, 2));
        assert_eq!(representation_mu(&hk, &big(5), 2).unwrap(), rat(1, 4));
        assert_eq!(representation_mu(&hk, &big(2), 2).unwrap(), rat(0, 1));
        let z = zero_type_profile(&c, 3).unwrap();
        assert!(z.all_match);
        assert!(z.decay.iter().all(|d| d.holds));
    }

    #[test]
    fn witness_examples() {
        let power = geom("power", json!({"c": 3}), 6);
        let c = Correlator::new(&power);
        let w = double_ergodicity_witness(&c, 0, 1).unwrap();
        assert_eq!(w.n, big(27));
        let w = double_ergodicity_witness(&c, 0, 2).unwrap();
        assert_eq!(w.n, big(756));
        assert!(double_ergodicity_witness(&c, 0, 0).unwrap().holds());
    }

    #[test]
    fn srwm_examples() {
        let empty = srwm_construct(&[], 20, Budgets::default()).unwrap();
        assert!(empty.stages.is_empty() && empty.phases.is_empty());
        let loose = srwm_construct(&vec![rat(2, 1); 3], 20, Budgets::default()).unwrap();
        let ms: Vec<usize> = loose.phases.iter().map(|p| p.m).collect();
        assert_eq!(ms, vec![1, 2, 3]);
        let one = srwm_construct(&dyadic_schedule(1), 20, Budgets::default()).unwrap();
        assert_eq!(one.phases.len(), 1);
        assert!(one.phases[0].worst_phi < rat(1, 2));
        let m1 = one.phases[0].m;
        assert_eq!(one.stages.len(), m1 + 1);
        assert!(matches!(
            srwm_construct(&[rat(0, 1)], 3, Budgets::default()),
            Err(Error::SearchExhausted { .. })
        ));
    }

    #[test]
    fn stats_series_matches_reports() {
        let g = geom("hk", json!({}), 6);
        let c = Correlator::new(&g);
        let a = LevelSet::bottom(1);
        let csv = stats_series(&c, &a, &a, 6).unwrap();
        let last: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
        let n = big(6);
        assert_eq!(last[5], crate::arith::to_pq(&wre_quotient(&c, &a, &a, &n).unwrap().value));
        assert_eq!(last[7], crate::arith::to_pq(&rwm_deficit(&c, &a, &a, &n).unwrap().value));
        assert_eq!(csv.lines().count(), 7);
    }
}

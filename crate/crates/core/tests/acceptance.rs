//! Acceptance criteria 1-14, one line per criterion.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rankone::arith::{rat, rat_int, to_pq, Rational};
use rankone::config::named_family;
use rankone::construction::{ConstructionSpec, ParamMap};
use rankone::epsilon::{self, EpsilonVector};
use rankone::statistics::{self as st, dyadic_schedule, srwm_construct};
use rankone::suites::{run_suite, SuiteOptions, Target, TheoremId};
use rankone::{Budgets, Correlator, HistogramCache, Level, LevelSet, TowerGeometry};

type Outcome = Result<String, String>;
type Criterion = fn() -> Outcome;

fn spec(name: &str) -> ConstructionSpec {
    named_family(name, &ParamMap::new()).unwrap()
}

fn geom(name: &str, depth: usize) -> TowerGeometry {
    spec(name).geometry(depth).unwrap()
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn selectors(g: &TowerGeometry) -> Vec<(&'static str, LevelSet)> {
    let mut sets = vec![("I", LevelSet::unit()), ("C1", LevelSet::bottom(1)), ("C2", LevelSet::bottom(2))];
    // halves of I only exist when the first stage cuts in two
    if let Ok((j1, j2)) = LevelSet::halves_of_unit(g) {
        sets.push(("J1", j1));
        sets.push(("J2", j2));
    }
    sets
}

const MATRIX: [&str; 4] = ["chacon", "hk2", "power2", "power3"];

fn criterion_1() -> Outcome {
    let mut compared = 0;
    let mut naive_compared = 0;
    for fam in MATRIX {
        let g = geom(fam, 100);
        let c = Correlator::new(&g);
        let sets = selectors(&g);
        for (na, a) in &sets {
            for (nb, b) in &sets {
                let hist = c.correlation_series(a, b, &BigInt::from(64)).map_err(|e| e.to_string())?;
                let (_, oracle) = c.windowed_oracle(a, b, 64).map_err(|e| e.to_string())?;
                for k in -64i64..=64 {
                    let kb = BigInt::from(k);
                    let got = hist.mu(&kb);
                    let want = &oracle[(k + 64) as usize];
                    ensure(&got == want, format!("{fam} {na} {nb} k={k}: {} vs oracle {}", to_pq(&got), to_pq(want)))?;
                    compared += 1;
                    let hs_a: Vec<u64> = a.heights().iter().map(|h| h.to_u64().unwrap()).collect();
                    let hs_b: Vec<u64> = b.heights().iter().map(|h| h.to_u64().unwrap()).collect();
                    if let Some(v) = common::naive_correlation(g.stages(), (a.column(), &hs_a), (b.column(), &hs_b), k, 1 << 16) {
                        ensure(v == got, format!("{fam} {na} {nb} k={k}: naive oracle {}", to_pq(&v)))?;
                        naive_compared += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{compared} values equal the windowed stacking oracle, {naive_compared} also the listed-column oracle"))
}

fn criterion_2() -> Outcome {
    let mut compared = 0;
    for fam in MATRIX {
        let g = geom(fam, 100);
        let c = Correlator::new(&g);
        let sets = selectors(&g);
        let (lo, hi) = (BigInt::from(-64), BigInt::from(64));
        for (na, a) in &sets {
            for (nb, b) in &sets {
                let n = c.min_valid_n_sets(&[a, b], &BigInt::from(65)).map_err(|e| e.to_string())?;
                let h0 = c.histogram_at(a, b, &lo, &hi, n).map_err(|e| e.to_string())?;
                let h1 = c.histogram_at(a, b, &lo, &hi, n + 1).map_err(|e| e.to_string())?;
                for k in -64i64..=64 {
                    let k = BigInt::from(k);
                    ensure(h0.mu(&k) == h1.mu(&k), format!("{fam} {na} {nb} k={k} differs at N={n} and N+1"))?;
                    compared += 1;
                }
            }
        }
    }
    Ok(format!("{compared} values identical at min_valid_N and min_valid_N + 1"))
}

fn criterion_3() -> Outcome {
    let mut worst = Rational::zero();
    for fam in ["hk2", "chacon-like"] {
        let g = geom(fam, 12);
        let c = Correlator::new(&g);
        for m in 1..=8 {
            let r = st::renyi_ratio(&c, m).map_err(|e| e.to_string())?;
            ensure(r.closed_form <= rat(2, 1), format!("{fam} m={m}: ratio {}", to_pq(&r.closed_form)))?;
            ensure(r.closed_form == r.oracle, format!("{fam} m={m}: closed form {} vs oracle {}", to_pq(&r.closed_form), to_pq(&r.oracle)))?;
            ensure(r.ranks_match, format!("{fam} m={m}: rank formula"))?;
            if fam == "hk2" && m == 2 {
                ensure(r.closed_form == rat(6, 5), format!("hk2 m=2 gives {}", to_pq(&r.closed_form)))?;
            }
            worst = worst.max(r.closed_form);
        }
    }
    Ok(format!("16 ratios <= 2, closed form = oracle, hk2 m=2 is 6/5, largest {}", to_pq(&worst)))
}

fn criterion_4() -> Outcome {
    for fam in ["hk2", "chacon-like"] {
        let g = geom(fam, 12);
        let c = Correlator::new(&g);
        let i = LevelSet::unit();
        for m in 1..=8 {
            let top = g.big_m(m).clone();
            let low = -&top;
            let mass = c.correlation_range(&i, &i, &low, &top).map_err(|e| e.to_string())?.mu_sum(&low, &top);
            let size: BigInt = g.stages()[..m].iter().map(|s| BigInt::from(s.cuts())).product();
            ensure(mass == rat_int(size.clone()), format!("{fam} m={m}: mass {} vs |D| {size}", to_pq(&mass)))?;
        }
    }
    Ok("sum over |k| <= M_m equals |D(I,m)| for m = 1..8 on hk2 and chacon-like".into())
}

fn criterion_5() -> Outcome {
    let mut finals = Vec::new();
    for fam in ["chacon", "hk2"] {
        let g = geom(fam, 1100);
        let c = Correlator::new(&g);
        let a = LevelSet::bottom(1);
        let mut prev: Option<Rational> = None;
        let mut last = None;
        for m in 3..=9 {
            let n: BigInt = g.big_m(m) + 1;
            let q = st::wre_quotient(&c, &a, &a, &n).map_err(|e| e.to_string())?;
            let dev = q.deviation();
            if let Some(p) = &prev {
                ensure(&dev <= p, format!("{fam} m={m}: deviation rose to {}", to_pq(&dev)))?;
            }
            prev = Some(dev);
            last = Some(q);
        }
        let q = last.unwrap();
        let rel = q.deviation() / &q.target;
        ensure(rel < rat(1, 10), format!("{fam}: final relative deviation {}", rankone::arith::to_decimal(&rel, 6)))?;
        finals.push(format!("{fam} {}", rankone::arith::to_decimal(&rel, 4)));
    }
    Ok(format!("trend non-increasing over m = 3..9, final relative deviation: {}", finals.join(", ")))
}

fn criterion_6() -> Outcome {
    let mut runs = 0;
    for fam in ["hk2", "hk2p1", "hk3"] {
        let g = geom(fam, 12);
        let c = Correlator::new(&g);
        let window = g.big_m(5).clone();
        for j in 0..=2 {
            let r = st::disjoint_support_check(&c, j, &window).map_err(|e| e.to_string())?;
            ensure(r.disjoint, format!("{fam} j={j}: overlapping shifts {:?}", r.violations))?;
            ensure(r.termwise && r.deficit_sum >= r.weight_sum, format!("{fam} j={j}: deficit below weights"))?;
            runs += 1;
        }
    }
    Ok(format!("disjoint supports and termwise deficit >= weight in {runs} runs, window M_5"))
}

fn criterion_7() -> Outcome {
    let hk = geom("hk2", 6).ordered_h(6).map_err(|e| e.to_string())?;
    ensure(hk.len() == 6, format!("|H| = {}", hk.len()))?;
    let mut sums = common::signed_sums(&hk, 1);
    sums.sort();
    sums.dedup();
    ensure(sums.len() == 729, format!("{} distinct of 729", sums.len()))?;
    let r5 = geom("steep-r5", 5).ordered_h(5).map_err(|e| e.to_string())?;
    ensure(r5.windows(2).all(|w| w[1] >= &w[0] * 5), "steep-r5 offsets grow by less than 5")?;
    let mut sums5 = common::signed_sums(&r5, 2);
    sums5.sort();
    sums5.dedup();
    ensure(sums5.len() == 3125, format!("{} distinct of 3125", sums5.len()))?;
    Ok("3^6 sums over hk2 and 5^5 sums over steep-r5 all distinct".into())
}

fn criterion_8() -> Outcome {
    let g = geom("almost-steep-n3", 10);
    let c = Correlator::new(&g);
    let d = BigInt::from(1);
    let mut cur = st::pqr(&c, 0, &d, 1).map_err(|e| e.to_string())?;
    for m in 1..=4 {
        let next = st::pqr(&c, 0, &d, m + 1).map_err(|e| e.to_string())?;
        let r = g.cuts(m) as i64;
        ensure(next.q == &cur.q * rat_int(r), format!("Q_{} != r_{m} Q_{m}", m + 1))?;
        let factor = rat(1, 1) - rat(1, r) - rat(2, r * r);
        ensure(next.r >= factor * &cur.r, format!("R_{} = {} below the recursion", m + 1, to_pq(&next.r)))?;
        // |A_m| straight from the definition
        let h = g.offsets(m);
        let (x0, x1) = (g.sub_heights(m)[0].clone(), &g.sub_heights(m)[0] + &g.sub_heights(m)[1]);
        let excluded = |x: &BigInt| *x == x0 || *x == x1;
        let size = h.iter().flat_map(|a| h.iter().map(move |b| (a, b))).filter(|(a, b)| a != b && !(excluded(a) && excluded(b))).count();
        ensure(size as i64 == r * r - r - 2, format!("|A_{m}| = {size}, r = {r}"))?;
        let pairs = st::almost_steep_pairs(&g, m).map_err(|e| e.to_string())?;
        ensure(pairs.size == size && pairs.unique, format!("A_{m} shifts not separated"))?;
        cur = next;
    }
    Ok("Q recursion exact, R recursion holds, |A_m| = r^2 - r - 2 for m = 1..4 (r_n = n + 3)".into())
}

fn criterion_9() -> Outcome {
    let g = geom("power3", 6);
    let c = Correlator::new(&g);
    let mut seen = Vec::new();
    for j in 0..=1 {
        for d in 1..=2u64 {
            let w = st::double_ergodicity_witness(&c, j, d).map_err(|e| e.to_string())?;
            ensure(w.holds(), format!("j={j} d={d}"))?;
            // independent membership check on the explicit descendant sets
            let a = Level::bottom(j);
            let ds = c.descendants(&a, w.stage).map_err(|e| e.to_string())?;
            let hs = ds.heights();
            let has = |t: &BigInt| hs.iter().any(|x| hs.binary_search(&(x - t)).is_ok());
            ensure(has(&w.n) && has(&(&w.n + d)), format!("j={j} d={d}: brute force disagrees"))?;
            if j == 0 && d == 1 {
                ensure(w.n == BigInt::from(27), format!("j=0 d=1 gives n = {}", w.n))?;
            }
            seen.push(format!("(j={j},d={d}) n={}", w.n));
        }
    }
    Ok(format!("n and n + d in D - D: {}", seen.join(" ")))
}

fn criterion_10() -> Outcome {
    let g = geom("steep-n2", 8);
    let c = Correlator::new(&g);
    let r = st::zero_type_profile(&c, 4).map_err(|e| e.to_string())?;
    let d3 = c.descendants(&Level::unit(), 3).map_err(|e| e.to_string())?;
    let mut needed = 0;
    for x in d3.heights() {
        for y in d3.heights() {
            if x >= y {
                let k = x - y;
                let row = r.rows.iter().find(|row| row.k == k).ok_or(format!("k={k} missing"))?;
                ensure(row.histogram == row.formula, format!("k={k}: histogram {} vs formula {}", to_pq(&row.histogram), to_pq(&row.formula)))?;
                needed += 1;
            }
        }
    }
    ensure(r.all_match, "representation differs somewhere in D(I,4) - D(I,4)")?;
    for dc in &r.decay {
        ensure(dc.holds, format!("n={}: {} > 1/r_n", dc.n, to_pq(&dc.max_beyond)))?;
    }
    ensure(r.decay.len() == 4, "decay for n = 0..3")?;
    Ok(format!("formula = histogram on {needed} pairs of D(I,3), {} shifts overall; decay <= 1/r_n for n <= 3", r.rows.len()))
}

fn criterion_11() -> Outcome {
    let g = geom("power2", 6);
    let c = Correlator::new(&g);
    for len in 1..=5 {
        let r = epsilon::lemma62_check(&c, 0, len, 6).map_err(|e| e.to_string())?;
        ensure(r.holds(), format!("m - j = {len}: {r:?}"))?;
        ensure(r.vectors == 5usize.pow(len as u32), "vector count")?;
        for e in EpsilonVector::all(0, len) {
            let mf = epsilon::multiplicity(&g, len, &e, 6).map_err(|e| e.to_string())?;
            let b = epsilon::binomial_profile_check(&g, &mf);
            ensure(b.matches && b.a == b.a_predicted, format!("binomial profile fails for {e}"))?;
        }
    }
    let one = epsilon::multiplicity(&g, 1, &EpsilonVector::new(0, vec![1]).unwrap(), 6).map_err(|e| e.to_string())?;
    let pairs: Vec<(i64, u64)> = one.support().iter().map(|(k, v)| (k.to_i64().unwrap(), v.to_u64().unwrap())).collect();
    ensure(pairs == vec![(1, 1), (2, 1)], format!("eps = (1) gives {pairs:?}"))?;
    Ok("(a), (b) and the binomial profile exact for m - j = 1..5; eps = (1) gives {1:1, 2:1}".into())
}

fn criterion_12() -> Outcome {
    let g = geom("power2", 6);
    for len in 1..=6 {
        for n in 0..=3 {
            let d = epsilon::d_ratio(len, n);
            ensure(d <= epsilon::d_bound(len, n), format!("d(N={n}, m-j={len}) = {} above bound", to_pq(&d)))?;
            let e = epsilon::d_ratio_enumerated(&g, 0, len, n, 6).map_err(|e| e.to_string())?;
            ensure(d == e, format!("closed form {} vs enumeration {}", to_pq(&d), to_pq(&e)))?;
        }
    }
    ensure(epsilon::d_ratio(1, 1) == rat(5, 9), "d(1, 1) != 5/9")?;
    for l in 1..=12 {
        let (a, b) = epsilon::binomial_identity(l);
        ensure(a == b, format!("identity fails at l = {l}"))?;
    }
    Ok("d <= 2^N (7/9)^(m-j) for N <= 3, m-j <= 6, enumeration agrees, d(1,1) = 5/9, identity for l <= 12".into())
}

fn criterion_13() -> Outcome {
    let res = srwm_construct(&dyadic_schedule(1), 20, Budgets::default()).map_err(|e| e.to_string())?;
    let p = &res.phases[0];
    ensure(p.worst_phi < rat(1, 2), "phase 1 tolerance not met")?;
    Ok(format!("m_1 = {}, max phi over D_1 pairs = {}", p.m, to_pq(&p.worst_phi)))
}

fn all_suites_json(cache: Option<&HistogramCache>) -> Result<String, String> {
    let mut out = String::new();
    for id in TheoremId::ALL {
        for t in Target::defaults(id).map_err(|e| e.to_string())? {
            let r = run_suite(id, &t, &SuiteOptions::default(), cache).map_err(|e| e.to_string())?;
            ensure(r.passed(), format!("{id} on {} failed", t.label))?;
            out.push_str(&serde_json::to_string(&r).unwrap());
            out.push('\n');
        }
    }
    Ok(out)
}

fn criterion_14() -> Outcome {
    let first = all_suites_json(None)?;
    let second = all_suites_json(None)?;
    ensure(first == second, "two runs differ")?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cache = HistogramCache::open(dir.path()).map_err(|e| e.to_string())?;
    let cold = all_suites_json(Some(&cache))?;
    let files = std::fs::read_dir(dir.path()).map_err(|e| e.to_string())?.count();
    let warm = all_suites_json(Some(&cache))?;
    ensure(cold == first && warm == first, "cached runs differ from uncached")?;
    Ok(format!("full suite JSON identical across 2 plain runs, a cold and a warm cached run ({files} cache files)"))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 14] = [
        ("oracle equivalence", criterion_1),
        ("N-stability", criterion_2),
        ("Renyi ratio", criterion_3),
        ("full-mass identity", criterion_4),
        ("WRE trend", criterion_5),
        ("disjoint supports", criterion_6),
        ("steep uniqueness", criterion_7),
        ("P/Q/R recursion", criterion_8),
        ("double ergodicity witness", criterion_9),
        ("zero-type formula and decay", criterion_10),
        ("multiplicity functions", criterion_11),
        ("d(N,m) bound", criterion_12),
        ("srwm phase 1", criterion_13),
        ("reproducibility", criterion_14),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail} ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} of 14 criteria pass", 14 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

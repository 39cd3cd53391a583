//! Exact tower quantities derived from a stage prefix.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::arith::{to_pq, Rational};
use crate::construction::StageSpec;
use crate::error::{Error, Result};

/// Heights, widths, subcolumn heights, offset sets `H_n` and maxima `M_n` for a prefix.
///
/// Column quantities (`h_n`, `w_n`, `M_n`) are indexed `0..=depth`; stage
/// quantities (`h_{n,k}`, `H_n`) are indexed `0..depth`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerGeometry {
    stages: Vec<StageSpec>,
    heights: Vec<BigInt>,
    widths: Vec<Rational>,
    sub_heights: Vec<Vec<BigInt>>,
    offsets: Vec<Vec<BigInt>>,
    maxima: Vec<BigInt>,
}

impl TowerGeometry {
    pub fn derive(stages: &[StageSpec]) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::Precondition("geometry needs a nonempty stage list".into()));
        }
        let mut heights = vec![BigInt::one()];
        let mut widths = vec![Rational::one()];
        let mut maxima = vec![BigInt::zero()];
        let mut sub_heights = Vec::with_capacity(stages.len());
        let mut offsets = Vec::with_capacity(stages.len());
        for st in stages {
            let h = heights.last().unwrap().clone();
            let subs: Vec<BigInt> = st.spacers().iter().map(|s| &h + s).collect();
            let mut offs = Vec::with_capacity(st.cuts());
            let mut acc = BigInt::zero();
            offs.push(acc.clone());
            for sub in &subs[..st.cuts() - 1] {
                acc += sub;
                offs.push(acc.clone());
            }
            let next_h: BigInt = subs.iter().sum();
            maxima.push(maxima.last().unwrap() + &acc);
            widths.push(widths.last().unwrap() / Rational::from_integer(BigInt::from(st.cuts())));
            heights.push(next_h);
            sub_heights.push(subs);
            offsets.push(offs);
        }
        Ok(TowerGeometry { stages: stages.to_vec(), heights, widths, sub_heights, offsets, maxima })
    }

    /// Number of stages in the prefix; columns `C_0..=C_depth` are available.
    pub fn depth(&self) -> usize {
        self.stages.len()
    }

    pub fn stages(&self) -> &[StageSpec] {
        &self.stages
    }

    pub fn cuts(&self, n: usize) -> usize {
        self.stages[n].cuts()
    }

    pub fn height(&self, n: usize) -> &BigInt {
        &self.heights[n]
    }

    pub fn width(&self, n: usize) -> &Rational {
        &self.widths[n]
    }

    /// `h_{n,k}` for `k < r_n`.
    pub fn sub_heights(&self, n: usize) -> &[BigInt] {
        &self.sub_heights[n]
    }

    /// `H_n`, sorted ascending with `H_n[0] = 0`.
    pub fn offsets(&self, n: usize) -> &[BigInt] {
        &self.offsets[n]
    }

    pub fn max_offset(&self, n: usize) -> &BigInt {
        self.offsets[n].last().unwrap()
    }

    /// `M_n = sum_{j<n} max H_j`.
    pub fn big_m(&self, n: usize) -> &BigInt {
        &self.maxima[n]
    }

    /// `prod_{from <= i < to} r_i`.
    pub fn cut_product(&self, from: usize, to: usize) -> BigInt {
        (from..to).map(|i| BigInt::from(self.cuts(i))).product()
    }

    /// The union of `H_0 \ {0}, ..., H_{m-1} \ {0}` in stage order.
    pub fn ordered_h(&self, m: usize) -> Result<Vec<BigInt>> {
        self.check_depth(m)?;
        Ok((0..m).flat_map(|n| self.offsets[n][1..].iter().cloned()).collect())
    }

    fn check_depth(&self, m: usize) -> Result<()> {
        if m > self.depth() {
            return Err(Error::PrefixTooShallow {
                deepest: self.depth(),
                detail: format!("stage count {m} requested"),
            });
        }
        Ok(())
    }

    /// Signed-digit representation `k = sum c_t t` over `ordered_h(m)` with `c_t` in `{-1, 0, 1}`.
    ///
    /// Greedy from the largest element: `t` is used exactly when the
    /// remainder exceeds the sum of all smaller elements. For a ratio-4 steep
    /// prefix every element is larger than twice the sum below it, so the
    /// greedy choice is forced and the representation, when it exists, is
    /// unique. Rejects prefixes that are not steep.
    pub fn steep_decompose(&self, k: &BigInt, m: usize) -> Result<Option<SteepRepresentation>> {
        let h = self.ordered_h(m)?;
        if let Some(i) = (1..h.len()).find(|&i| h[i] < &h[i - 1] * 4) {
            return Err(Error::Precondition(format!(
                "prefix is not steep: {} < 4 * {}",
                h[i],
                h[i - 1]
            )));
        }
        let mut index = Vec::with_capacity(h.len());
        for n in 0..m {
            for pos in 1..self.offsets[n].len() {
                index.push((n, pos));
            }
        }
        let mut below: Vec<BigInt> = Vec::with_capacity(h.len());
        let mut acc = BigInt::zero();
        for t in &h {
            below.push(acc.clone());
            acc += t;
        }
        let mut rem = k.clone();
        let mut terms = Vec::new();
        for i in (0..h.len()).rev() {
            if rem.abs() > below[i] {
                let coeff: i8 = if rem.is_positive() { 1 } else { -1 };
                if coeff > 0 {
                    rem -= &h[i];
                } else {
                    rem += &h[i];
                }
                terms.push(SteepTerm { stage: index[i].0, position: index[i].1, value: h[i].clone(), coeff });
            }
        }
        if !rem.is_zero() {
            return Ok(None);
        }
        terms.reverse();
        Ok(Some(SteepRepresentation { target: k.clone(), terms }))
    }

    /// CSV dump: `stage,h_n,w_n,H_n,M_n`, offsets separated by spaces.
    ///
    /// Column rows run `0..=depth`; the last row has an empty `H_n`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("stage,h_n,w_n,H_n,M_n\n");
        for n in 0..=self.depth() {
            let offs = self
                .offsets
                .get(n)
                .map(|o| o.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "))
                .unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{},{}", n, self.heights[n], to_pq(&self.widths[n]), offs, self.maxima[n]);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SteepTerm {
    pub stage: usize,
    /// Index of the element inside `H_stage` (`>= 1`).
    pub position: usize,
    pub value: BigInt,
    pub coeff: i8,
}

/// Nonzero terms of `k = sum c_t t`, ascending in `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SteepRepresentation {
    pub target: BigInt,
    pub terms: Vec<SteepTerm>,
}

impl SteepRepresentation {
    pub fn value(&self) -> BigInt {
        self.terms.iter().map(|t| &t.value * BigInt::from(t.coeff)).sum()
    }

    pub fn coeff_of(&self, t: &BigInt) -> i8 {
        self.terms.iter().find(|x| &x.value == t).map_or(0, |x| x.coeff)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use crate::construction::{build_family, ParamMap};
    use num_traits::ToPrimitive;
    use proptest::prelude::*;
    use serde_json::json;

    fn geom(name: &str, p: serde_json::Value, m: usize) -> TowerGeometry {
        build_family(name, &serde_json::from_value::<ParamMap>(p).unwrap()).unwrap().geometry(m).unwrap()
    }

    fn ints(v: &[BigInt]) -> Vec<i64> {
        v.iter().map(|x| x.to_i64().unwrap()).collect()
    }

    #[test]
    fn chacon_geometry() {
        let g = geom("chacon_classic", json!({}), 2);
        assert_eq!(ints(&g.heights), vec![1, 3, 7]);
        assert_eq!(g.widths, vec![rat(1, 1), rat(1, 2), rat(1, 4)]);
        assert_eq!(ints(g.offsets(0)), vec![0, 1]);
        assert_eq!(ints(g.offsets(1)), vec![0, 3]);
        assert_eq!(g.big_m(2), &BigInt::from(4));
    }

    #[test]
    fn power_geometry() {
        let g = geom("power_family", json!({"c": 2}), 2);
        assert_eq!(ints(g.offsets(0)), vec![0, 1, 3]);
        assert_eq!(ints(g.offsets(1)), vec![0, 9, 19]);
        assert_eq!(g.big_m(2), &BigInt::from(22));
        assert_eq!(ints(&g.ordered_h(2).unwrap()), vec![1, 3, 9, 19]);
    }

    #[test]
    fn hk_geometry() {
        let g = geom("hajian_kakutani", json!({}), 3);
        assert_eq!(ints(g.offsets(0)), vec![0, 1]);
        assert_eq!(ints(g.offsets(1)), vec![0, 4]);
        assert_eq!(g.width(2), &rat(1, 4));
        assert_eq!(g.big_m(2), &BigInt::from(5));
        assert_eq!(ints(&g.ordered_h(3).unwrap()), vec![1, 4, 16]);
        assert!(g.ordered_h(0).unwrap().is_empty());
        assert!(g.ordered_h(4).is_err());
    }

    #[test]
    fn empty_prefix_is_rejected() {
        assert!(TowerGeometry::derive(&[]).is_err());
    }

    #[test]
    fn steep_decomposition_examples() {
        let g = geom("hajian_kakutani", json!({}), 3);
        let r = g.steep_decompose(&BigInt::from(5), 3).unwrap().unwrap();
        assert_eq!((r.coeff_of(&4.into()), r.coeff_of(&1.into())), (1, 1));
        let r = g.steep_decompose(&BigInt::from(3), 3).unwrap().unwrap();
        assert_eq!((r.coeff_of(&4.into()), r.coeff_of(&1.into())), (1, -1));
        let r = g.steep_decompose(&BigInt::zero(), 3).unwrap().unwrap();
        assert!(r.terms.is_empty());
        // 2 = 4 - 1 - 1 needs a repeated digit
        assert!(g.steep_decompose(&BigInt::from(2), 3).unwrap().is_none());
        assert!(g.steep_decompose(&BigInt::from(22), 3).unwrap().is_none());
        let chacon = geom("chacon_classic", json!({}), 3);
        assert!(chacon.steep_decompose(&BigInt::one(), 3).is_err());
    }

    #[test]
    fn csv_dump() {
        let g = geom("chacon_classic", json!({}), 2);
        assert_eq!(g.to_csv(), "stage,h_n,w_n,H_n,M_n\n0,1,1/1,0 1,0\n1,3,1/2,0 3,1\n2,7,1/4,,4\n");
    }

    fn brute_representations(h: &[i64], digits: &[i64]) -> std::collections::HashMap<i64, u32> {
        let mut sums = std::collections::HashMap::new();
        let total = digits.len().pow(h.len() as u32);
        for code in 0..total {
            let mut c = code;
            let mut s = 0;
            for &t in h {
                s += digits[c % digits.len()] * t;
                c /= digits.len();
            }
            *sums.entry(s).or_insert(0) += 1;
        }
        sums
    }

    #[test]
    fn steep_uniqueness_brute_force() {
        let g = geom("hajian_kakutani", json!({}), 3);
        let h = ints(&g.ordered_h(3).unwrap());
        let sums = brute_representations(&h, &[-1, 0, 1]);
        assert_eq!(sums.len(), 27);
        let g5 = geom("steep_hk", json!({"ratio": 5}), 3);
        let h5 = ints(&g5.ordered_h(3).unwrap());
        assert_eq!(h5, vec![1, 5, 25]);
        assert_eq!(brute_representations(&h5, &[-2, -1, 0, 1, 2]).len(), 125);
    }

    fn family_strategy() -> impl Strategy<Value = (String, serde_json::Value)> {
        prop_oneof![
            Just(("chacon_classic".to_string(), json!({}))),
            (2i64..5, 0i64..4).prop_map(|(m, a)| ("hajian_kakutani".to_string(), json!({"sigma": {"mul": m, "add": a}}))),
            (3i64..5, 1i64..4).prop_map(|(m, a)| ("chacon_like".to_string(), json!({"sigma": {"mul": m, "add": a}}))),
            (2u64..4).prop_map(|c| ("power_family".to_string(), json!({"c": c}))),
            (2usize..4, 4u32..6).prop_map(|(r, q)| ("steep_hk".to_string(), json!({"cuts": r, "ratio": q}))),
        ]
    }

    proptest! {
        #[test]
        fn geometry_invariants((name, p) in family_strategy(), m in 1usize..7) {
            let g = geom(&name, p, m);
            for n in 0..m {
                let st = &g.stages()[n];
                prop_assert_eq!(g.height(n + 1), &st.next_height(g.height(n)));
                prop_assert_eq!(g.offsets(n).len(), g.cuts(n));
                prop_assert!(g.offsets(n).windows(2).all(|w| w[0] < w[1]));
                prop_assert_eq!(g.big_m(n + 1), &(g.big_m(n) + g.max_offset(n)));
            }
            // mass conservation
            prop_assert_eq!(g.width(m) * Rational::from_integer(g.cut_product(0, m)), Rational::one());
        }

        #[test]
        fn steep_greedy_matches_brute_force(m in 1usize..5, q in 4u32..6, k in -400i64..400) {
            let g = geom("steep_hk", json!({"cuts": 2, "ratio": q}), m);
            let h = ints(&g.ordered_h(m).unwrap());
            let brute: Vec<Vec<i64>> = (0..3usize.pow(h.len() as u32))
                .filter_map(|code| {
                    let mut c = code;
                    let coeffs: Vec<i64> = h.iter().map(|_| { let d = (c % 3) as i64 - 1; c /= 3; d }).collect();
                    (coeffs.iter().zip(&h).map(|(a, b)| a * b).sum::<i64>() == k).then_some(coeffs)
                })
                .collect();
            prop_assert!(brute.len() <= 1);
            let rep = g.steep_decompose(&BigInt::from(k), m).unwrap();
            match (rep, brute.first()) {
                (None, None) => {}
                (Some(r), Some(coeffs)) => {
                    prop_assert_eq!(r.value(), BigInt::from(k));
                    for (t, c) in h.iter().zip(coeffs) {
                        prop_assert_eq!(r.coeff_of(&BigInt::from(*t)) as i64, *c);
                    }
                }
                (r, b) => prop_assert!(false, "greedy {:?} vs brute {:?}", r, b),
            }
        }
    }
}

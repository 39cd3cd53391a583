//! Stage programs for rank-one cutting-and-stacking constructions.
//!
//! A construction is a sequence of stages; stage `n` cuts column `C_n` into
//! `r_n` subcolumns and stacks `s_{n,k}` spacers above subcolumn `k`. Stage
//! indices start at 0, with `C_0` the unit interval. Named families generate
//! their stages from closed-form spacer rules so that expansion is
//! deterministic.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::arith::{rat_big, Rational};
use crate::error::{Error, Result};
use crate::geometry::TowerGeometry;

/// Depth hint used by named families when none is given.
pub const DEFAULT_FAMILY_DEPTH: usize = 4096;

/// One cutting-and-stacking step: `cuts` subcolumns, `spacers[k]` spacers above subcolumn `k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StageSpec {
    cuts: usize,
    spacers: Vec<BigInt>,
}

impl StageSpec {
    pub fn new(cuts: usize, spacers: Vec<BigInt>) -> Result<Self> {
        let stage = StageSpec { cuts, spacers };
        stage.validate(0)?;
        Ok(stage)
    }

    pub fn from_ints(cuts: usize, spacers: &[i64]) -> Result<Self> {
        Self::new(cuts, spacers.iter().map(|&s| BigInt::from(s)).collect())
    }

    fn validate(&self, stage: usize) -> Result<()> {
        if self.cuts < 2 {
            return Err(Error::InvalidStage { stage, reason: format!("r = {} < 2", self.cuts) });
        }
        if self.spacers.len() != self.cuts {
            return Err(Error::InvalidStage {
                stage,
                reason: format!("{} spacer counts for r = {}", self.spacers.len(), self.cuts),
            });
        }
        if let Some(k) = self.spacers.iter().position(|s| s.is_negative()) {
            return Err(Error::InvalidStage { stage, reason: format!("s[{k}] = {} < 0", self.spacers[k]) });
        }
        Ok(())
    }

    pub fn cuts(&self) -> usize {
        self.cuts
    }

    pub fn spacers(&self) -> &[BigInt] {
        &self.spacers
    }

    pub fn last_spacer(&self) -> &BigInt {
        &self.spacers[self.cuts - 1]
    }

    /// Height of the next column given the height `h` of this one.
    pub fn next_height(&self, h: &BigInt) -> BigInt {
        h * BigInt::from(self.cuts) + self.spacers.iter().sum::<BigInt>()
    }
}

impl fmt::Display for StageSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},(", self.cuts)?;
        for (i, s) in self.spacers.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "))")
    }
}

/// Closed-form spacer count for a stage.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpacerRule {
    /// `mul * h_n + add`.
    Affine { mul: i64, add: i64 },
    /// Explicit per-stage values.
    Table(Vec<i64>),
}

impl SpacerRule {
    pub fn affine(mul: i64, add: i64) -> Self {
        SpacerRule::Affine { mul, add }
    }

    fn eval(&self, n: usize, h: &BigInt) -> Option<BigInt> {
        match self {
            SpacerRule::Affine { mul, add } => Some(h * BigInt::from(*mul) + BigInt::from(*add)),
            SpacerRule::Table(t) => t.get(n).map(|&v| BigInt::from(v)),
        }
    }

    fn len_limit(&self) -> Option<usize> {
        match self {
            SpacerRule::Affine { .. } => None,
            SpacerRule::Table(t) => Some(t.len()),
        }
    }
}

/// Number of subcolumns as a function of the stage index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutsRule {
    Constant(usize),
    /// `r_n = n + offset`.
    Linear { offset: usize },
}

impl CutsRule {
    pub fn at(&self, n: usize) -> usize {
        match *self {
            CutsRule::Constant(r) => r,
            CutsRule::Linear { offset } => n + offset,
        }
    }

    fn is_bounded(&self) -> bool {
        matches!(self, CutsRule::Constant(_))
    }
}

/// Named families of constructions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    /// `r = 2`, `s = (0, 1)`.
    ChaconClassic,
    /// `r = 2`, `s = (0, sigma(n))` with `sigma(n) >= 2 h_n`.
    HajianKakutani { sigma: SpacerRule },
    /// `r = 3`, `s = (0, 1, sigma(n))` with `sigma(n) >= 3 h_n + 1`.
    ChaconLike { sigma: SpacerRule },
    /// Offsets of `H` grow by exactly `ratio` (`ratio >= 4`); the top
    /// subcolumn gets `(ratio - 2)` times the last offset. With two cuts and
    /// ratio 4 this is the Hajian-Kakutani construction with `sigma = 2 h_n`.
    SteepHk { cuts: CutsRule, ratio: u32 },
    /// `s_{n,0} = 0`, `s_{n,1} = 1`, and later partial sums grow by `ratio`.
    AlmostSteep { cuts: CutsRule, ratio: u32 },
    /// Chacon-like with `h_{n+1} = 3^c h_n`.
    Power { c: u32 },
}

impl Family {
    pub fn id(&self) -> &'static str {
        match self {
            Family::ChaconClassic => "chacon_classic",
            Family::HajianKakutani { .. } => "hajian_kakutani",
            Family::ChaconLike { .. } => "chacon_like",
            Family::SteepHk { .. } => "steep_hk",
            Family::AlmostSteep { .. } => "almost_steep",
            Family::Power { .. } => "power_family",
        }
    }

    /// Asymptotic attributes that follow from the closed-form rule.
    pub fn attributes(&self) -> FamilyAttributes {
        let bounded = match self {
            Family::SteepHk { cuts, .. } | Family::AlmostSteep { cuts, .. } => cuts.is_bounded(),
            _ => true,
        };
        // every family places at least one spacer above its last subcolumn
        FamilyAttributes { normal: true, bounded_cuts: bounded }
    }

    fn limit(&self) -> Option<usize> {
        match self {
            Family::HajianKakutani { sigma } | Family::ChaconLike { sigma } => sigma.len_limit(),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyAttributes {
    pub normal: bool,
    pub bounded_cuts: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Generator {
    Explicit(Vec<StageSpec>),
    Family(Family),
}

/// A finite-prefix view of a (possibly infinite) construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructionSpec {
    generator: Generator,
    depth_hint: usize,
}

impl ConstructionSpec {
    pub fn explicit(stages: Vec<StageSpec>) -> Result<Self> {
        for (n, s) in stages.iter().enumerate() {
            s.validate(n)?;
        }
        let depth_hint = stages.len();
        Ok(ConstructionSpec { generator: Generator::Explicit(stages), depth_hint })
    }

    pub fn family(family: Family, depth_hint: usize) -> Result<Self> {
        validate_family(&family)?;
        let depth_hint = family.limit().map_or(depth_hint, |l| l.min(depth_hint));
        Ok(ConstructionSpec { generator: Generator::Family(family), depth_hint })
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn depth_hint(&self) -> usize {
        self.depth_hint
    }

    pub fn with_depth_hint(mut self, depth_hint: usize) -> Self {
        if let Generator::Family(f) = &self.generator {
            self.depth_hint = f.limit().map_or(depth_hint, |l| l.min(depth_hint));
        } else {
            self.depth_hint = self.depth_hint.min(depth_hint);
        }
        self
    }

    pub fn family_attributes(&self) -> Option<FamilyAttributes> {
        match &self.generator {
            Generator::Family(f) => Some(f.attributes()),
            Generator::Explicit(_) => None,
        }
    }

    pub fn name(&self) -> String {
        match &self.generator {
            Generator::Family(f) => f.id().to_string(),
            Generator::Explicit(_) => "explicit".to_string(),
        }
    }

    /// The first `m` stages.
    pub fn expand(&self, m: usize) -> Result<Vec<StageSpec>> {
        if m > self.depth_hint {
            return Err(Error::DepthExceeded { requested: m, available: self.depth_hint });
        }
        match &self.generator {
            Generator::Explicit(stages) => Ok(stages[..m].to_vec()),
            Generator::Family(f) => expand_family(f, m),
        }
    }

    pub fn geometry(&self, m: usize) -> Result<TowerGeometry> {
        TowerGeometry::derive(&self.expand(m)?)
    }
}

fn validate_family(f: &Family) -> Result<()> {
    match f {
        Family::SteepHk { cuts, ratio } | Family::AlmostSteep { cuts, ratio } => {
            if *ratio < 4 {
                return Err(Error::InvalidParameter { name: "ratio".into(), reason: format!("{ratio} < 4") });
            }
            let min_cuts = if matches!(f, Family::AlmostSteep { .. }) { 3 } else { 2 };
            if cuts.at(0) < min_cuts {
                return Err(Error::InvalidParameter {
                    name: "cuts".into(),
                    reason: format!("r_0 = {} < {min_cuts}", cuts.at(0)),
                });
            }
        }
        Family::Power { c } if *c < 2 => {
            return Err(Error::InvalidParameter { name: "c".into(), reason: format!("c = {c} < 2") });
        }
        _ => {}
    }
    Ok(())
}

fn expand_family(f: &Family, m: usize) -> Result<Vec<StageSpec>> {
    let mut out = Vec::with_capacity(m);
    let mut h = BigInt::one();
    // largest element of H_{n-1}, zero before the first stage
    let mut prev_max = BigInt::zero();
    for n in 0..m {
        let stage = family_stage(f, n, &h, &prev_max)?;
        stage.validate(n)?;
        let offsets_max: BigInt =
            (0..stage.cuts - 1).map(|k| &h + &stage.spacers[k]).sum();
        prev_max = offsets_max;
        h = stage.next_height(&h);
        out.push(stage);
    }
    Ok(out)
}

fn eval_sigma(sigma: &SpacerRule, n: usize, h: &BigInt) -> Result<BigInt> {
    sigma.eval(n, h).ok_or(Error::DepthExceeded { requested: n + 1, available: n })
}

fn family_stage(f: &Family, n: usize, h: &BigInt, prev_max: &BigInt) -> Result<StageSpec> {
    let zero = BigInt::zero;
    let one = BigInt::one;
    let stage = match f {
        Family::ChaconClassic => StageSpec { cuts: 2, spacers: vec![zero(), one()] },
        Family::HajianKakutani { sigma } => {
            let s = eval_sigma(sigma, n, h)?;
            if s < h * 2 {
                return Err(Error::SpacerBound {
                    stage: n,
                    inequality: format!("sigma(n) = {s} >= 2 h_n = {}", h * 2),
                });
            }
            StageSpec { cuts: 2, spacers: vec![zero(), s] }
        }
        Family::ChaconLike { sigma } => {
            let s = eval_sigma(sigma, n, h)?;
            let bound = h * 3 + 1;
            if s < bound {
                return Err(Error::SpacerBound {
                    stage: n,
                    inequality: format!("sigma(n) = {s} >= 3 h_n + 1 = {bound}"),
                });
            }
            StageSpec { cuts: 3, spacers: vec![zero(), one(), s] }
        }
        Family::Power { c } => {
            let mult = BigInt::from(3).pow(*c) - 3;
            StageSpec { cuts: 3, spacers: vec![zero(), one(), h * mult - 1] }
        }
        Family::SteepHk { cuts, ratio } => {
            let r = cuts.at(n);
            let q = BigInt::from(*ratio);
            let mut spacers = Vec::with_capacity(r);
            let first = (&q * prev_max - h).max(zero());
            let mut partial = h + &first;
            spacers.push(first);
            for _ in 1..r - 1 {
                let s = (&q - 1) * &partial - h;
                partial = &partial + h + &s;
                spacers.push(s);
            }
            spacers.push((&q - 2) * &partial);
            StageSpec { cuts: r, spacers }
        }
        Family::AlmostSteep { cuts, ratio } => {
            let r = cuts.at(n);
            let q = BigInt::from(*ratio);
            let mut spacers = vec![zero(), one()];
            let mut partial = h * 2 + 1;
            for _ in 2..r {
                let s = (&q - 1) * &partial - h;
                partial = &partial + h + &s;
                spacers.push(s);
            }
            StageSpec { cuts: r, spacers }
        }
    };
    Ok(stage)
}

/// Canonical text of an expanded prefix; two specs with equal prefixes have equal text.
pub fn canonical_prefix(stages: &[StageSpec]) -> String {
    let mut s = String::new();
    for st in stages {
        s.push_str(&st.cuts.to_string());
        s.push(':');
        for (i, x) in st.spacers.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(&x.to_string());
        }
        s.push(';');
    }
    s
}

/// SHA-256 of the canonical prefix, hex encoded.
pub fn prefix_hash(stages: &[StageSpec]) -> String {
    hex::encode(Sha256::digest(canonical_prefix(stages).as_bytes()))
}

pub type ParamMap = BTreeMap<String, Value>;

/// Build a named family from a parameter map.
///
/// Recognised names: `chacon_classic`, `hajian_kakutani` (`sigma`),
/// `chacon_like` (`sigma`), `steep_hk` (`cuts`, `ratio`), `almost_steep`
/// (`cuts`, `ratio`), `power_family` (`c`) and `explicit` (`stages`). A
/// `depth` entry overrides the depth hint.
pub fn build_family(name: &str, params: &ParamMap) -> Result<ConstructionSpec> {
    let depth = match params.get("depth") {
        Some(v) => v.as_u64().ok_or_else(|| bad_param("depth", "expected a nonnegative integer"))? as usize,
        None => DEFAULT_FAMILY_DEPTH,
    };
    let family = match name {
        "chacon_classic" | "chacon" => Family::ChaconClassic,
        "hajian_kakutani" | "hk" => Family::HajianKakutani { sigma: sigma_param(params, SpacerRule::affine(2, 0))? },
        "chacon_like" => Family::ChaconLike { sigma: sigma_param(params, SpacerRule::affine(3, 1))? },
        "steep_hk" => Family::SteepHk { cuts: cuts_param(params, 2)?, ratio: ratio_param(params)? },
        "almost_steep" => Family::AlmostSteep { cuts: cuts_param(params, 3)?, ratio: ratio_param(params)? },
        "power_family" | "power" => {
            let c = params
                .get("c")
                .ok_or_else(|| bad_param("c", "required"))?
                .as_u64()
                .ok_or_else(|| bad_param("c", "expected an integer"))?;
            Family::Power { c: u32::try_from(c).map_err(|_| bad_param("c", "too large"))? }
        }
        "explicit" => {
            let stages = params.get("stages").ok_or_else(|| bad_param("stages", "required"))?;
            let spec = ConstructionSpec::explicit(stages_from_json(stages)?)?;
            return Ok(spec.with_depth_hint(depth));
        }
        other => return Err(Error::UnknownFamily(other.to_string())),
    };
    ConstructionSpec::family(family, depth)
}

fn bad_param(name: &str, reason: &str) -> Error {
    Error::InvalidParameter { name: name.into(), reason: reason.into() }
}

fn sigma_param(params: &ParamMap, default: SpacerRule) -> Result<SpacerRule> {
    match params.get("sigma") {
        None => Ok(default),
        Some(v) => serde_json::from_value(v.clone())
            .map_err(|e| bad_param("sigma", &format!("expected {{mul, add}} or a list: {e}"))),
    }
}

fn cuts_param(params: &ParamMap, default: usize) -> Result<CutsRule> {
    match params.get("cuts") {
        None => Ok(CutsRule::Constant(default)),
        Some(Value::Number(n)) => {
            Ok(CutsRule::Constant(n.as_u64().ok_or_else(|| bad_param("cuts", "expected an integer"))? as usize))
        }
        Some(v) => serde_json::from_value(v.clone())
            .map_err(|e| bad_param("cuts", &format!("expected an integer or {{linear: {{offset}}}}: {e}"))),
    }
}

fn ratio_param(params: &ParamMap) -> Result<u32> {
    match params.get("ratio") {
        None => Ok(4),
        Some(v) => v
            .as_u64()
            .and_then(|r| u32::try_from(r).ok())
            .ok_or_else(|| bad_param("ratio", "expected an integer")),
    }
}

/// Parse `[[r, [s0, s1, ...]], ...]`; spacer counts may be integers or decimal strings.
pub fn stages_from_json(v: &Value) -> Result<Vec<StageSpec>> {
    let arr = v.as_array().ok_or_else(|| bad_param("stages", "expected a list"))?;
    arr.iter()
        .enumerate()
        .map(|(n, item)| {
            let pair = item.as_array().filter(|p| p.len() == 2).ok_or_else(|| Error::InvalidStage {
                stage: n,
                reason: "expected [r, [spacers...]]".into(),
            })?;
            let r = pair[0].as_u64().ok_or_else(|| Error::InvalidStage { stage: n, reason: "r must be an integer".into() })?;
            let sp = pair[1].as_array().ok_or_else(|| Error::InvalidStage { stage: n, reason: "spacers must be a list".into() })?;
            let spacers = sp
                .iter()
                .map(|x| match x {
                    Value::Number(num) => num.as_i64().map(BigInt::from),
                    Value::String(s) => s.parse::<BigInt>().ok(),
                    _ => None,
                })
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::InvalidStage { stage: n, reason: "spacer counts must be integers".into() })?;
            let st = StageSpec { cuts: r as usize, spacers };
            st.validate(n)?;
            Ok(st)
        })
        .collect()
}

pub fn stages_to_json(stages: &[StageSpec]) -> Value {
    Value::Array(
        stages
            .iter()
            .map(|s| {
                let sp = s
                    .spacers
                    .iter()
                    .map(|x| match x.to_i64() {
                        Some(v) if v.unsigned_abs() < (1u64 << 53) => Value::from(v),
                        _ => Value::from(x.to_string()),
                    })
                    .collect();
                Value::Array(vec![Value::from(s.cuts as u64), Value::Array(sp)])
            })
            .collect(),
    )
}

/// Whether a verdict was checked on the built prefix or follows from the family rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Prefix,
    Asymptotic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum Verdict {
    Holds,
    Fails { stage: usize },
    Undetermined,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Flag {
    pub verdict: Verdict,
    pub stages: Range<usize>,
    pub scope: Scope,
}

impl Flag {
    fn prefix(verdict: Verdict, m: usize) -> Self {
        Flag { verdict, stages: 0..m, scope: Scope::Prefix }
    }

    pub fn holds(&self) -> bool {
        self.verdict.holds()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundedCutsFlag {
    pub flag: Flag,
    pub sup_cuts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SteepFlag {
    pub flag: Flag,
    pub threshold: u32,
    /// Smallest ratio `t_{i+1}/t_i` over the prefix, `None` when `H` has fewer than two elements.
    #[serde(serialize_with = "ser_opt_rat")]
    pub min_ratio: Option<Rational>,
}

fn ser_opt_rat<S: serde::Serializer>(v: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(r) => s.serialize_str(&crate::arith::to_pq(r)),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyFlags {
    pub normal: Flag,
    pub exponential_growth: Flag,
    pub bounded_cuts: BoundedCutsFlag,
    pub steep: SteepFlag,
    pub almost_steep: Flag,
    pub asymptotic: Option<FamilyAttributes>,
}

pub fn classify(spec: &ConstructionSpec, m: usize) -> Result<PropertyFlags> {
    classify_with_threshold(spec, m, 4)
}

pub fn classify_with_threshold(spec: &ConstructionSpec, m: usize, threshold: u32) -> Result<PropertyFlags> {
    if m == 0 {
        return Err(Error::Precondition("classify needs at least one stage".into()));
    }
    let geom = spec.geometry(m)?;
    let stages = geom.stages();

    let first_fail = |pred: &dyn Fn(usize) -> bool| (0..m).find(|&n| !pred(n));
    let verdict_of = |f: Option<usize>| f.map_or(Verdict::Holds, |stage| Verdict::Fails { stage });

    let normal = Flag::prefix(verdict_of(first_fail(&|n| stages[n].last_spacer().is_positive())), m);
    let exponential_growth = Flag::prefix(
        verdict_of(first_fail(&|n| stages[n].last_spacer() * 2 >= *geom.height(n + 1))),
        m,
    );

    let sup_cuts = stages.iter().map(StageSpec::cuts).max().unwrap_or(0);
    let bounded_cuts = BoundedCutsFlag {
        flag: match spec.family_attributes() {
            Some(a) => Flag {
                verdict: if a.bounded_cuts { Verdict::Holds } else { Verdict::Fails { stage: m } },
                stages: 0..m,
                scope: Scope::Asymptotic,
            },
            None => Flag::prefix(Verdict::Undetermined, m),
        },
        sup_cuts,
    };

    let steep = steep_flag(&geom, m, threshold);

    let almost = first_fail(&|n| {
        let st = &stages[n];
        if st.cuts < 3 || !st.spacers[0].is_zero() || !st.spacers[1].is_one() {
            return false;
        }
        let subs = geom.sub_heights(n);
        let mut partial = &subs[0] + &subs[1];
        for sub in &subs[2..] {
            let next = &partial + sub;
            if next < &partial * 4 {
                return false;
            }
            partial = next;
        }
        true
    });

    Ok(PropertyFlags {
        normal,
        exponential_growth,
        bounded_cuts,
        steep,
        almost_steep: Flag::prefix(verdict_of(almost), m),
        asymptotic: spec.family_attributes(),
    })
}

fn steep_flag(geom: &TowerGeometry, m: usize, threshold: u32) -> SteepFlag {
    let mut stage_of = Vec::new();
    let mut values = Vec::new();
    for n in 0..m {
        for t in geom.offsets(n).iter().skip(1) {
            stage_of.push(n);
            values.push(t.clone());
        }
    }
    let mut min_ratio: Option<Rational> = None;
    let mut fail = None;
    let thr = BigInt::from(threshold);
    for i in 1..values.len() {
        let ratio = rat_big(values[i].clone(), values[i - 1].clone());
        if min_ratio.as_ref().is_none_or(|r| ratio < *r) {
            min_ratio = Some(ratio);
        }
        if fail.is_none() && values[i] < &thr * &values[i - 1] {
            fail = Some(stage_of[i]);
        }
    }
    SteepFlag {
        flag: Flag::prefix(fail.map_or(Verdict::Holds, |stage| Verdict::Fails { stage }), m),
        threshold,
        min_ratio,
    }
}

//! Construction documents, family shorthands and level selectors.
//!
//! A construction document is JSON, either `{"family": name, "params": {..}, "depth": m}`
//! or `{"stages": [[r, [s0, ..]], ..]}`. Family names may be shorthands such
//! as `hk2` or `power3`.

use std::collections::BTreeMap;
use std::path::Path;

use num_bigint::BigInt;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::construction::{build_family, canonical_prefix, stages_from_json, ConstructionSpec, ParamMap, StageSpec};
use crate::descendants::LevelSet;
use crate::error::{Error, Result};
use crate::geometry::TowerGeometry;

/// Shorthand names accepted wherever a family is expected.
pub const SHORTHANDS: &[(&str, &str)] = &[
    ("chacon", "r = 2, s = (0, 1)"),
    ("hk2", "r = 2, s = (0, 2h)"),
    ("hk2p1", "r = 2, s = (0, 2h + 1)"),
    ("hk3", "r = 2, s = (0, 3h)"),
    ("chacon-like", "r = 3, s = (0, 1, 3h + 1)"),
    ("power2", "power family, h_{n+1} = 9 h_n"),
    ("power3", "power family, h_{n+1} = 27 h_n"),
    ("steep-n2", "steep, r_n = n + 2, offset ratio 4"),
    ("steep-r5", "steep, r = 2, offset ratio 5"),
    ("almost-steep-n3", "almost steep, r_n = n + 3, offset ratio 4"),
];

fn shorthand_doc(name: &str) -> Option<(&'static str, Value)> {
    let doc = match name {
        "chacon" => ("chacon_classic", json!({})),
        "hk2" => ("hajian_kakutani", json!({ "sigma": { "mul": 2, "add": 0 } })),
        "hk2p1" => ("hajian_kakutani", json!({ "sigma": { "mul": 2, "add": 1 } })),
        "hk3" => ("hajian_kakutani", json!({ "sigma": { "mul": 3, "add": 0 } })),
        "chacon-like" => ("chacon_like", json!({})),
        "power2" => ("power_family", json!({ "c": 2 })),
        "power3" => ("power_family", json!({ "c": 3 })),
        "steep-n2" => ("steep_hk", json!({ "cuts": { "linear": { "offset": 2 } }, "ratio": 4 })),
        "steep-r5" => ("steep_hk", json!({ "cuts": 2, "ratio": 5 })),
        "almost-steep-n3" => ("almost_steep", json!({ "cuts": { "linear": { "offset": 3 } }, "ratio": 4 })),
        _ => return None,
    };
    Some(doc)
}

fn params_of(v: &Value) -> Result<ParamMap> {
    match v {
        Value::Object(m) => Ok(m.iter().map(|(k, v)| (k.clone(), v.clone())).collect()),
        Value::Null => Ok(ParamMap::new()),
        _ => Err(Error::Config("`params` must be an object".into())),
    }
}

/// A named construction: shorthand or family name with parameters.
pub fn named_family(name: &str, extra: &ParamMap) -> Result<ConstructionSpec> {
    match shorthand_doc(name) {
        Some((family, base)) => {
            let mut params = params_of(&base)?;
            params.extend(extra.iter().map(|(k, v)| (k.clone(), v.clone())));
            build_family(family, &params)
        }
        None => build_family(name, extra),
    }
}

/// Parses a construction document.
pub fn parse_construction(doc: &Value) -> Result<ConstructionSpec> {
    let obj = doc.as_object().ok_or_else(|| Error::Config("construction must be a JSON object".into()))?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "family" | "params" | "depth" | "stages") {
            return Err(Error::Config(format!("unknown key `{key}`")));
        }
    }
    let depth = match obj.get("depth") {
        None => None,
        Some(v) => Some(v.as_u64().ok_or_else(|| Error::Config("`depth` must be a nonnegative integer".into()))? as usize),
    };
    let spec = match (obj.get("family"), obj.get("stages")) {
        (Some(_), Some(_)) => return Err(Error::Config("give either `family` or `stages`, not both".into())),
        (None, None) => return Err(Error::Config("missing `family` or `stages`".into())),
        (None, Some(stages)) => ConstructionSpec::explicit(stages_from_json(stages)?)?,
        (Some(f), None) => {
            let name = f.as_str().ok_or_else(|| Error::Config("`family` must be a string".into()))?;
            named_family(name, &params_of(obj.get("params").unwrap_or(&Value::Null))?)?
        }
    };
    Ok(match depth {
        Some(d) => spec.with_depth_hint(d),
        None => spec,
    })
}

/// Parses JSON text, reading it from a file first when `arg` names one.
pub fn load_json_arg(arg: &str) -> Result<Value> {
    let text = if Path::new(arg).is_file() {
        std::fs::read_to_string(arg).map_err(|e| Error::Config(format!("{arg}: {e}")))?
    } else {
        arg.to_string()
    };
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("invalid JSON: {e}")))
}

/// A `--family` argument: a shorthand, a family name, a document or a path to one.
pub fn resolve_family(arg: &str) -> Result<(String, ConstructionSpec)> {
    let trimmed = arg.trim_start();
    if !trimmed.starts_with('{') && !Path::new(arg).is_file() {
        return Ok((arg.to_string(), named_family(arg, &ParamMap::new())?));
    }
    let doc = load_json_arg(arg)?;
    let spec = parse_construction(&doc)?;
    let label = doc.get("family").and_then(Value::as_str).map_or_else(|| spec.name(), str::to_string);
    Ok((label, spec))
}

/// A `--stages` argument: `[[r, [s..]], ..]` inline or in a file.
pub fn resolve_stages(arg: &str) -> Result<(String, ConstructionSpec)> {
    let stages = stages_from_json(&load_json_arg(arg)?)?;
    Ok(("explicit".to_string(), ConstructionSpec::explicit(stages)?))
}

/// Stable key for an operation on an expanded prefix. Only the stages and
/// the parameters enter, so equal prefixes share keys however they were specified.
pub fn cache_key(stages: &[StageSpec], params: &BTreeMap<String, String>) -> String {
    let mut text = canonical_prefix(stages);
    for (k, v) in params {
        text.push_str(&format!("|{k}={v}"));
    }
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Level selectors: `I`, `J1`/`J2` (halves of `I`), `C<c>` (bottom of `C_c`),
/// `C<c>[h ..]` (explicit heights in `C_c`), `C<c>:h` (one level).
pub fn parse_level_set(s: &str, geom: &TowerGeometry) -> Result<LevelSet> {
    let bad = || Error::Config(format!("bad level selector `{s}`"));
    let set = match s.trim() {
        "I" => LevelSet::unit(),
        "J1" => LevelSet::halves_of_unit(geom)?.0,
        "J2" => LevelSet::halves_of_unit(geom)?.1,
        t => {
            let rest = t.strip_prefix('C').ok_or_else(bad)?;
            if let Some((col, hs)) = rest.split_once('[') {
                let hs = hs.strip_suffix(']').ok_or_else(bad)?;
                let heights = hs
                    .split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|x| !x.is_empty())
                    .map(|x| x.parse::<BigInt>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>>>()?;
                LevelSet::new(col.parse().map_err(|_| bad())?, heights)?
            } else if let Some((col, h)) = rest.split_once(':') {
                LevelSet::new(col.parse().map_err(|_| bad())?, vec![h.parse().map_err(|_| bad())?])?
            } else {
                LevelSet::bottom(rest.parse().map_err(|_| bad())?)
            }
        }
    };
    set.check(geom)?;
    Ok(set)
}

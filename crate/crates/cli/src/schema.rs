//! Minimal structural schemas for the JSON documents the CLI writes.

use serde_json::Value;

use newton_osc::SCHEMA;

#[derive(Clone, Copy, Debug)]
enum Kind {
    Str,
    Int,
    Num,
    /// Number, or null for a non-finite value.
    NumOrNull,
    Bool,
    Arr,
    Obj,
}

impl Kind {
    fn accepts(self, v: &Value) -> bool {
        match self {
            Kind::Str => v.is_string(),
            Kind::Int => v.is_u64() || v.is_i64(),
            Kind::Num => v.is_number(),
            Kind::NumOrNull => v.is_number() || v.is_null(),
            Kind::Bool => v.is_boolean(),
            Kind::Arr => v.is_array(),
            Kind::Obj => v.is_object(),
        }
    }
}

use Kind::*;

const COMMON: &[(&str, Kind)] = &[
    ("schema", Str),
    ("command", Str),
    ("provenance", Obj),
    ("provenance/threads", Int),
    ("provenance/version", Str),
];

const SAMPLE: &[(&str, Kind)] = &[
    ("lambda", Num),
    ("n", Int),
    ("norm", Num),
    ("conv_err", NumOrNull),
    ("iterations", Int),
    ("converged", Bool),
];

fn fields(command: &str) -> Option<&'static [(&'static str, Kind)]> {
    Some(match command {
        "analyze" => &[
            ("F", Str),
            ("polygon/vertices", Arr),
            ("polygon/edges", Arr),
            ("polygon/A", Int),
            ("polygon/B", Int),
            ("decay/t0", Str),
            ("decay/delta", Str),
            ("decay/edges", Arr),
            ("decay/boundary_crossing", Str),
            ("decay/degeneracy/kind", Str),
            ("branches/branches", Arr),
            ("branches/total_multiplicity", Int),
            ("mixed_input", Bool),
        ],
        "norm" => &[("S", Str), ("rho", Num), ("sample", Obj)],
        "sweep" => &[
            ("S", Str),
            ("rho", Num),
            ("samples", Arr),
            ("fit_window", Arr),
            ("slope", NumOrNull),
            ("stderr", NumOrNull),
            ("predicted", Str),
            ("predicted_value", Num),
            ("tol_slope", Num),
            ("verdict", Str),
            ("degeneracy/kind", Str),
            ("all_valid", Bool),
        ],
        "blocks" => &[
            ("S", Str),
            ("lambda", Num),
            ("d", Num),
            ("blocks", Arr),
            ("worst_ratio", Obj),
            ("worst_gap_ratio", NumOrNull),
            ("gap_pass", Bool),
            ("errors", Arr),
        ],
        "dyadpol" => &[
            ("r", Arr),
            ("C", Num),
            ("intervals", Arr),
            ("B", Num),
            ("B_prime", Int),
            ("min_observed", NumOrNull),
            ("threshold", Num),
            ("pass", Bool),
        ],
        _ => return None,
    })
}

fn lookup<'a>(v: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('/').try_fold(v, |cur, key| cur.get(key))
}

fn check(v: &Value, spec: &[(&str, Kind)], prefix: &str) -> Result<(), String> {
    for &(path, kind) in spec {
        match lookup(v, path) {
            Some(x) if kind.accepts(x) => {}
            Some(x) => return Err(format!("{prefix}{path}: expected {kind:?}, found {x}")),
            None => return Err(format!("{prefix}{path}: missing")),
        }
    }
    Ok(())
}

/// Checks `doc` against the schema for `command`.
pub fn validate(command: &str, doc: &Value) -> Result<(), String> {
    check(doc, COMMON, "")?;
    if doc["schema"] != SCHEMA || doc["command"] != command {
        return Err(format!(
            "header mismatch: {} / {}",
            doc["schema"], doc["command"]
        ));
    }
    let spec = fields(command).ok_or_else(|| format!("no schema for command {command}"))?;
    check(doc, spec, "")?;
    let samples = match command {
        "norm" => vec![&doc["sample"]],
        "sweep" => doc["samples"]
            .as_array()
            .map(|a| a.iter().collect())
            .unwrap_or_default(),
        _ => Vec::new(),
    };
    for (i, s) in samples.into_iter().enumerate() {
        check(s, SAMPLE, &format!("sample[{i}]/"))?;
    }
    Ok(())
}

/// Validates `doc`, then re-parses its serialized `text` and validates again,
/// requiring the two to be identical.
pub fn round_trip(command: &str, doc: &Value, text: &str) -> Result<(), String> {
    validate(command, doc)?;
    let back: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    validate(command, &back)?;
    if &back != doc {
        return Err("document changed after a serialization round trip".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn header(command: &str) -> Value {
        json!({
            "schema": SCHEMA,
            "command": command,
            "provenance": { "threads": 1, "seed": 0, "version": "0" },
        })
    }

    #[test]
    fn dyadpol_document() {
        let mut d = header("dyadpol");
        for (k, v) in [
            ("r", json!([0, 6])),
            ("C", json!(1.0)),
            ("intervals", json!([])),
            ("B", json!(4096.0)),
            ("B_prime", json!(4)),
            ("min_observed", json!(0.5)),
            ("threshold", json!(1.0 / 4096.0)),
            ("pass", json!(true)),
        ] {
            d[k] = v;
        }
        let text = serde_json::to_string(&d).unwrap();
        assert_eq!(round_trip("dyadpol", &d, &text), Ok(()));
        d["pass"] = json!("yes");
        assert!(validate("dyadpol", &d).unwrap_err().starts_with("pass"));
        d.as_object_mut().unwrap().remove("pass");
        assert_eq!(validate("dyadpol", &d), Err("pass: missing".into()));
    }

    #[test]
    fn header_must_match() {
        assert!(validate("norm", &header("sweep")).is_err());
        assert!(validate("nope", &header("nope")).is_err());
    }
}

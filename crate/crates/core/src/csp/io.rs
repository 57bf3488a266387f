//! JSON problem files.
//!
//! ```json
//! {"variables": ["x", "y"],
//!  "domains": {"x": [1, 2], "y": [1, 2]},
//!  "constraints": [{"scope": ["x", "y"], "kind": "extensional", "tuples": [[1, 2]]},
//!                  {"scope": ["x", "y"], "kind": "not_equal"}]}
//! ```

use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::csp::{Problem, Relation, Value};
use crate::error::{CspError, Result};

#[derive(Serialize, Deserialize, Debug)]
struct ProblemFile {
    variables: Vec<String>,
    domains: Domains,
    constraints: Vec<ConstraintFile>,
}

/// Domains keyed by variable name, written in variable order.
#[derive(Debug, Default)]
struct Domains(Vec<(String, Vec<Value>)>);

impl Serialize for Domains {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Domains {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Domains;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from variable name to value list")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut m: A) -> std::result::Result<Domains, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = m.next_entry::<String, Vec<Value>>()? {
                    out.push((k, v));
                }
                Ok(Domains(out))
            }
        }
        d.deserialize_map(V)
    }
}

#[derive(Serialize, Deserialize, Debug)]
struct ConstraintFile {
    scope: Vec<String>,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tuples: Option<Vec<Vec<Value>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<LetterParams>,
}

#[derive(Serialize, Deserialize, Debug, Clone, Copy)]
struct LetterParams {
    #[serde(rename = "posA")]
    pos_a: usize,
    #[serde(rename = "posB")]
    pos_b: usize,
}

pub fn to_json(problem: &Problem) -> String {
    let file = ProblemFile {
        variables: problem.variables().to_vec(),
        domains: Domains(
            problem
                .var_ids()
                .map(|v| (problem.name(v).to_owned(), problem.domain(v).to_vec()))
                .collect(),
        ),
        constraints: problem
            .constraints()
            .iter()
            .map(|c| {
                let scope = c.scope().iter().map(|&v| problem.name(v).to_owned()).collect();
                match c.relation() {
                    Relation::Extensional(set) => ConstraintFile {
                        scope,
                        kind: "extensional".into(),
                        tuples: Some(
                            set.iter()
                                .map(|t| {
                                    t.iter()
                                        .zip(c.scope())
                                        .map(|(a, v)| problem.value(*v, *a).clone())
                                        .collect()
                                })
                                .collect(),
                        ),
                        params: None,
                    },
                    Relation::NotEqual => {
                        ConstraintFile { scope, kind: "not_equal".into(), tuples: None, params: None }
                    }
                    Relation::LetterEquality { pos_a, pos_b } => ConstraintFile {
                        scope,
                        kind: "letter_equality".into(),
                        tuples: None,
                        params: Some(LetterParams { pos_a: *pos_a, pos_b: *pos_b }),
                    },
                }
            })
            .collect(),
    };
    serde_json::to_string(&file).expect("problem serialization cannot fail")
}

pub fn from_json(text: &str) -> Result<Problem> {
    let file: ProblemFile =
        serde_json::from_str(text).map_err(|e| CspError::Parse(e.to_string()))?;
    let mut b = Problem::builder();
    for name in &file.variables {
        let values = file
            .domains
            .0
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| CspError::Parse(format!("no domain for `{name}`")))?;
        b.variable(name.clone(), values)?;
    }
    for (k, _) in &file.domains.0 {
        if b.var(k).is_none() {
            return Err(CspError::UnknownVariable(k.clone()));
        }
    }
    for c in file.constraints {
        let scope = c
            .scope
            .iter()
            .map(|n| b.var(n).ok_or_else(|| CspError::UnknownVariable(n.clone())))
            .collect::<Result<Vec<_>>>()?;
        match c.kind.as_str() {
            "extensional" => {
                b.extensional(&scope, c.tuples.unwrap_or_default())?;
            }
            "not_equal" => {
                if scope.len() != 2 {
                    return Err(CspError::Arity { arity: 2, got: scope.len() });
                }
                b.not_equal(scope[0], scope[1])?;
            }
            "letter_equality" => {
                if scope.len() != 2 {
                    return Err(CspError::Arity { arity: 2, got: scope.len() });
                }
                let p = c
                    .params
                    .ok_or_else(|| CspError::Parse("letter_equality needs params".into()))?;
                b.letter_equality(scope[0], scope[1], p.pos_a, p.pos_b)?;
            }
            other => return Err(CspError::Parse(format!("unknown constraint kind `{other}`"))),
        }
    }
    Ok(b.build())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::problems_equal;

    #[test]
    fn round_trip_mixed_kinds() {
        let mut b = Problem::builder();
        let x = b.variable("x", [1, 2]).unwrap();
        let y = b.variable("y", [1, 2]).unwrap();
        let u = b.variable("u", ["ab", "ba"]).unwrap();
        let w = b.variable("w", ["ab", "bb"]).unwrap();
        b.extensional(&[x, y], vec![vec![1, 2], vec![2, 1]]).unwrap();
        b.not_equal(x, y).unwrap();
        b.letter_equality(u, w, 0, 1).unwrap();
        let p = b.build();
        let text = to_json(&p);
        assert!(text.starts_with(r#"{"variables":["x","y","u","w"],"domains":{"x":[1,2]"#));
        assert!(text.contains(r#""params":{"posA":0,"posB":1}"#));
        let q = from_json(&text).unwrap();
        assert!(problems_equal(&p, &q));
        assert_eq!(to_json(&q), text);
    }

    #[test]
    fn rejects_unknown_kind_and_missing_domain() {
        let bad = r#"{"variables":["x"],"domains":{"x":[1]},"constraints":[{"scope":["x"],"kind":"lt"}]}"#;
        assert!(from_json(bad).is_err());
        let bad = r#"{"variables":["x"],"domains":{},"constraints":[]}"#;
        assert!(from_json(bad).is_err());
        let bad = r#"{"variables":["x"],"domains":{"x":[1]},"constraints":[{"scope":["x"],"kind":"extensional","tuples":[[2]]}]}"#;
        assert!(matches!(from_json(bad), Err(CspError::ValueNotInDomain { .. })));
    }
}

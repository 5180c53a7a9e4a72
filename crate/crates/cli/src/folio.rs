//! Conversion of FOLIO-style premise records into the story schema.
//!
//! FOLIO-like datasets pair natural-language premises with first-order
//! formulas; only the formula side is ingested here. The converter is a
//! thin mapping, not a general translator: it transliterates the Unicode
//! connectives, inserts the `.` our quantifier syntax expects, and derives
//! the signature by scanning applications. Anything outside the finite
//! monadic/dyadic fragment — function terms, equality, xor, predicates of
//! three or more arguments — is rejected with an error naming the premise.
//!
//! Field mapping: a record's formulas are read from `premises-FOL` (an
//! array of strings); the story id comes from `story_id` or `example_id`
//! when present, otherwise the record index.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::Value;

use scld_core::story::{StoryFile, StoryPredicate};

pub fn convert_file(path: &Path, record: usize) -> Result<StoryFile> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let records = parse_records(&text)
        .with_context(|| format!("parsing {}", path.display()))?;
    let rec = records
        .get(record)
        .ok_or_else(|| anyhow!("record {record} out of range: file has {}", records.len()))?;
    convert_record(rec, record).map(|mut story| {
        story.source = Some(format!("folio:{}", path.display()));
        story
    })
}

/// Accepts a JSON array of records, a single record object, or JSONL.
fn parse_records(text: &str) -> Result<Vec<Value>> {
    if let Ok(v) = serde_json::from_str::<Value>(text) {
        return match v {
            Value::Array(items) => Ok(items),
            obj @ Value::Object(_) => Ok(vec![obj]),
            other => bail!("expected records, found {other}"),
        };
    }
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| serde_json::from_str(l).map_err(Into::into))
        .collect()
}

pub fn convert_record(rec: &Value, index: usize) -> Result<StoryFile> {
    let premises = rec
        .get("premises-FOL")
        .and_then(Value::as_array)
        .ok_or_else(|| anyhow!("record {index}: missing \"premises-FOL\" array"))?;
    if premises.is_empty() {
        bail!("record {index}: \"premises-FOL\" is empty");
    }
    let id = ["story_id", "example_id"]
        .iter()
        .find_map(|k| rec.get(k))
        .map(|v| match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        })
        .unwrap_or_else(|| format!("folio-{index}"));

    let mut sentences = Vec::with_capacity(premises.len());
    for (i, p) in premises.iter().enumerate() {
        let text = p
            .as_str()
            .ok_or_else(|| anyhow!("record {index}: premise {i} is not a string"))?;
        let converted = transliterate(text).with_context(|| format!("premise {i} ({text:?})"))?;
        sentences.push(converted);
    }

    let (predicates, entities) = derive_signature(&sentences)?;
    Ok(StoryFile {
        id,
        predicates,
        entities,
        sentences,
        hypotheses: None,
        source: None,
    })
}

/// Maps the Unicode connectives onto the ASCII grammar and inserts the
/// `.` after each quantified variable.
fn transliterate(text: &str) -> Result<String> {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '∀' => out.push_str(" forall "),
            '∃' => out.push_str(" exists "),
            '¬' => out.push('~'),
            '∧' => out.push('&'),
            '∨' => out.push('|'),
            '→' => out.push_str(" -> "),
            '↔' => out.push_str(" <-> "),
            '⊕' => bail!("exclusive-or (⊕) has no counterpart in the story grammar"),
            '=' | '≠' => bail!("equality is not supported"),
            c if c.is_ascii() => out.push(c),
            other => bail!("unsupported symbol {other:?}"),
        }
    }
    Ok(insert_quantifier_dots(&out)?.trim().to_string())
}

fn insert_quantifier_dots(text: &str) -> Result<String> {
    let mut out = String::with_capacity(text.len() + 4);
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let quantifier = word == "forall" || word == "exists";
            out.push_str(&word);
            if quantifier {
                out.push(' ');
                while i < chars.len() && chars[i].is_whitespace() {
                    i += 1;
                }
                let vstart = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                if vstart == i {
                    bail!("quantifier without a variable");
                }
                out.extend(&chars[vstart..i]);
                while i < chars.len() && chars[i].is_whitespace() {
                    i += 1;
                }
                if i >= chars.len() || chars[i] != '.' {
                    out.push_str(". ");
                }
            }
        } else {
            out.push(c);
            i += 1;
        }
    }
    Ok(out)
}

/// Scans converted sentences for `Name(args)` applications; arguments
/// bound by a quantifier in the same sentence are variables, everything
/// else is an entity.
fn derive_signature(sentences: &[String]) -> Result<(Vec<StoryPredicate>, Vec<String>)> {
    let mut arities: BTreeMap<String, u8> = BTreeMap::new();
    let mut entities: BTreeSet<String> = BTreeSet::new();
    for s in sentences {
        let bound = bound_variables(s);
        let chars: Vec<char> = s.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            if !chars[i].is_ascii_alphabetic() {
                i += 1;
                continue;
            }
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if word == "forall" || word == "exists" {
                // Skip the bound variable so it is not read as an entity.
                while i < chars.len() && chars[i] != '.' {
                    i += 1;
                }
                continue;
            }
            let mut j = i;
            while j < chars.len() && chars[j].is_whitespace() {
                j += 1;
            }
            if j >= chars.len() || chars[j] != '(' {
                continue;
            }
            // A predicate application: collect its arguments.
            let close = chars[j..]
                .iter()
                .position(|&c| c == ')')
                .map(|p| j + p)
                .ok_or_else(|| anyhow!("unclosed application of {word}"))?;
            let arg_text: String = chars[j + 1..close].iter().collect();
            if arg_text.contains('(') {
                bail!("function terms are not supported (in application of {word})");
            }
            let args: Vec<String> =
                arg_text.split(',').map(|a| a.trim().to_string()).collect();
            if args.iter().any(String::is_empty) {
                bail!("empty argument in application of {word}");
            }
            let arity = args.len();
            if !(1..=2).contains(&arity) {
                bail!(
                    "predicate {word} has {arity} arguments; only monadic and dyadic \
                     predicates are supported"
                );
            }
            match arities.get(&word) {
                Some(&a) if a as usize != arity => {
                    bail!("predicate {word} used with both {a} and {arity} arguments")
                }
                _ => {
                    arities.insert(word.clone(), arity as u8);
                }
            }
            for a in &args {
                if !bound.contains(a) {
                    entities.insert(a.clone());
                }
            }
            i = close + 1;
        }
    }
    if entities.is_empty() {
        bail!("no entities found: every argument is quantified");
    }
    let predicates = arities
        .into_iter()
        .map(|(name, arity)| StoryPredicate { name, arity })
        .collect();
    Ok((predicates, entities.into_iter().collect()))
}

fn bound_variables(s: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for kw in ["forall", "exists"] {
        let mut rest = s;
        while let Some(pos) = rest.find(kw) {
            let after = &rest[pos + kw.len()..];
            let var: String = after
                .trim_start()
                .chars()
                .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
                .collect();
            if !var.is_empty() {
                out.insert(var);
            }
            rest = after;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn converts_a_simple_record() {
        let rec = json!({
            "story_id": "folio-demo",
            "premises-FOL": [
                "∀x (Drinks(x) → Dependent(x))",
                "Drinks(Rina) ∧ ¬Jokes(Rina)",
                "∃y (Jokes(y) ∨ Drinks(y))"
            ]
        });
        let story = convert_record(&rec, 0).unwrap();
        assert_eq!(story.id, "folio-demo");
        assert_eq!(story.entities, vec!["Rina"]);
        let names: Vec<&str> = story.predicates.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, vec!["Dependent", "Drinks", "Jokes"]);
        assert!(story.predicates.iter().all(|p| p.arity == 1));
        assert_eq!(story.sentences[0], "forall x. (Drinks(x)  ->  Dependent(x))");
    }

    #[test]
    fn dyadic_predicates_and_mixed_arguments_work() {
        let rec = json!({
            "premises-FOL": ["∀x (Knows(x, Ada) → Greets(x, Ada))", "Knows(Ben, Ada)"]
        });
        let story = convert_record(&rec, 3).unwrap();
        assert_eq!(story.id, "folio-3");
        assert_eq!(story.entities, vec!["Ada", "Ben"]);
        assert!(story.predicates.iter().all(|p| p.arity == 2));
    }

    #[test]
    fn clear_failures_for_unsupported_fragments() {
        let cases = [
            (json!({"premises-FOL": ["A(x) ⊕ B(x)"]}), "exclusive-or"),
            (json!({"premises-FOL": ["Age(Ada) = Age(Ben)"]}), "equality"),
            (json!({"premises-FOL": ["Gives(Ada, Ben, Book)"]}), "3 arguments"),
            (json!({"premises-FOL": ["Tall(father(Ada))"]}), "function terms"),
            (json!({"premises-FOL": ["Likes(Ada)", "Likes(Ada, Ben)"]}), "both 1 and 2"),
            (json!({"premises-FOL": ["∀x Happy(x)"]}), "no entities"),
            (json!({"premises": ["no fol side"]}), "premises-FOL"),
        ];
        for (rec, needle) in cases {
            let err = convert_record(&rec, 0).unwrap_err();
            let msg = format!("{err:#}");
            assert!(msg.contains(needle), "{msg:?} should mention {needle:?}");
        }
    }

    #[test]
    fn jsonl_and_array_files_both_parse() {
        let array = r#"[{"premises-FOL": ["P(a)"]}, {"premises-FOL": ["Q(b)"]}]"#;
        assert_eq!(parse_records(array).unwrap().len(), 2);
        let jsonl = "{\"premises-FOL\": [\"P(a)\"]}\n{\"premises-FOL\": [\"Q(b)\"]}\n";
        assert_eq!(parse_records(jsonl).unwrap().len(), 2);
    }
}

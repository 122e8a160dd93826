//! Recognizer for the two statement shapes the emitter produces:
//!
//! ```text
//! MERGE (:Label {id: "id", name: "text"});
//! MATCH (a {id: "id"}), (b {id: "id"}) MERGE (a)-[:REL]->(b);
//! MATCH (a {id: "id"}), (b {id: "id"}) MERGE (a)-[:REL {distance: 1.234567}]->(b);
//! ```
//!
//! Ids match `[a-z][a-z0-9]*`; strings allow only `\\` and `\"` escapes and no
//! line breaks; distances have exactly six decimals and are present exactly
//! on embedding relations.

const LABELS: &[&str] = &["Concept", "Synonym", "Definition"];
const STRUCTURAL: &[&str] = &["HAS_SYNONYM", "HAS_DEFINITION"];
const EMBEDDING: &[&str] = &["embedding_match_cluster", "embedding_match_node"];

struct Cursor<'a> {
    rest: &'a str,
}

impl<'a> Cursor<'a> {
    fn lit(&mut self, s: &str) -> Result<(), String> {
        match self.rest.strip_prefix(s) {
            Some(r) => {
                self.rest = r;
                Ok(())
            }
            None => Err(format!("expected `{s}` at `{}`", preview(self.rest))),
        }
    }

    fn word(&mut self, allowed: &[&str]) -> Result<&'a str, String> {
        let end = self
            .rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(self.rest.len());
        let (w, r) = self.rest.split_at(end);
        if allowed.contains(&w) {
            self.rest = r;
            Ok(w)
        } else {
            Err(format!("unexpected word `{w}`"))
        }
    }

    fn id(&mut self) -> Result<&'a str, String> {
        self.lit("\"")?;
        let end = self.rest.find('"').ok_or("unterminated id")?;
        let (id, r) = self.rest.split_at(end);
        let mut chars = id.chars();
        let ok = chars.next().is_some_and(|c| c.is_ascii_lowercase())
            && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit());
        if !ok {
            return Err(format!("bad id `{id}`"));
        }
        self.rest = &r[1..];
        Ok(id)
    }

    fn string(&mut self) -> Result<(), String> {
        self.lit("\"")?;
        let mut chars = self.rest.char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '"' => {
                    self.rest = &self.rest[i + 1..];
                    return Ok(());
                }
                '\\' => match chars.next() {
                    Some((_, '\\' | '"')) => {}
                    other => return Err(format!("bad escape {other:?}")),
                },
                '\n' | '\r' => return Err("line break inside string".into()),
                _ => {}
            }
        }
        Err("unterminated string".into())
    }

    fn distance(&mut self) -> Result<(), String> {
        let end = self
            .rest
            .find(|c: char| !(c.is_ascii_digit() || c == '.'))
            .unwrap_or(self.rest.len());
        let (num, r) = self.rest.split_at(end);
        let ok = match num.split_once('.') {
            Some((int, frac)) => !int.is_empty() && frac.len() == 6 && !frac.contains('.'),
            None => false,
        };
        if !ok {
            return Err(format!("bad distance `{num}`"));
        }
        self.rest = r;
        Ok(())
    }
}

fn preview(s: &str) -> &str {
    &s[..s.char_indices().nth(30).map_or(s.len(), |(i, _)| i)]
}

fn node(c: &mut Cursor) -> Result<(), String> {
    c.lit("MERGE (:")?;
    c.word(LABELS)?;
    c.lit(" {id: ")?;
    c.id()?;
    c.lit(", name: ")?;
    c.string()?;
    c.lit("});")
}

fn edge(c: &mut Cursor) -> Result<(), String> {
    c.lit("MATCH (a {id: ")?;
    let from = c.id()?;
    c.lit("}), (b {id: ")?;
    let to = c.id()?;
    if from == to {
        return Err(format!("self loop on `{from}`"));
    }
    c.lit("}) MERGE (a)-[:")?;
    let all: Vec<&str> = STRUCTURAL.iter().chain(EMBEDDING).copied().collect();
    let rel = c.word(&all)?;
    if EMBEDDING.contains(&rel) {
        c.lit(" {distance: ")?;
        c.distance()?;
        c.lit("}")?;
    }
    c.lit("]->(b);")
}

/// Checks one statement (without its trailing newline).
pub fn check_statement(line: &str) -> Result<(), String> {
    let mut c = Cursor { rest: line };
    if line.starts_with("MERGE") {
        node(&mut c)?;
    } else {
        edge(&mut c)?;
    }
    if c.rest.is_empty() {
        Ok(())
    } else {
        Err(format!("trailing input `{}`", preview(c.rest)))
    }
}

/// Checks a whole script: LF-terminated statements, nothing else.
pub fn check_script(script: &str) -> Result<usize, String> {
    if script.is_empty() {
        return Ok(0);
    }
    let body = script
        .strip_suffix('\n')
        .ok_or("script does not end with a newline")?;
    let mut n = 0;
    for (i, line) in body.split('\n').enumerate() {
        check_statement(line).map_err(|e| format!("statement {}: {e}", i + 1))?;
        n += 1;
    }
    Ok(n)
}

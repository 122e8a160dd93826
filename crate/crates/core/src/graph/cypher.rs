use std::io::Write;

use super::{GraphError, KnowledgeGraph};

/// Quotes-safe string literal body: `\` and `"` are backslash-escaped and
/// every line break becomes a single space.
fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\r' => {
                if chars.peek() == Some(&'\n') {
                    chars.next();
                }
                out.push(' ');
            }
            '\n' => out.push(' '),
            c => out.push(c),
        }
    }
    out
}

/// Writes the graph as a Cypher script: node `MERGE`s sorted by (kind, id),
/// then edge `MATCH ... MERGE`s sorted by (rel, from, to), one statement per
/// line. Returns the number of bytes written.
pub fn emit_cypher<W: Write>(g: &KnowledgeGraph, mut out: W) -> Result<u64, GraphError> {
    let mut nodes: Vec<_> = g.nodes().collect();
    nodes.sort_by(|a, b| (a.kind, &a.id).cmp(&(b.kind, &b.id)));

    let mut written = 0u64;
    let mut emit = |line: String| -> Result<(), GraphError> {
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
        written += line.len() as u64 + 1;
        Ok(())
    };

    for node in nodes {
        emit(format!(
            "MERGE (:{} {{id: \"{}\", name: \"{}\"}});",
            node.kind.label(),
            node.id,
            escape(&node.display_text)
        ))?;
    }
    for edge in g.edges() {
        let props = match edge.distance {
            Some(d) => format!(" {{distance: {d:.6}}}"),
            None => String::new(),
        };
        emit(format!(
            "MATCH (a {{id: \"{}\"}}), (b {{id: \"{}\"}}) MERGE (a)-[:{}{}]->(b);",
            edge.from, edge.to, edge.rel, props
        ))?;
    }
    out.flush()?;
    Ok(written)
}

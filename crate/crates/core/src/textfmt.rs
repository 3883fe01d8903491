//! Sectioned text documents: `[name arg ...]` headers followed by free-form bodies.

use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {msg}")]
pub struct FormatError {
    pub line: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub name: String,
    pub args: Vec<String>,
    pub body: String,
    pub line: usize,
}

impl Section {
    pub fn new(name: &str, args: &[String], body: String) -> Section {
        Section { name: name.to_string(), args: args.to_vec(), body, line: 0 }
    }

    /// `key: value` lines of the body.
    pub fn fields(&self) -> Vec<(String, String)> {
        self.body
            .lines()
            .filter_map(|l| l.split_once(':'))
            .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
            .collect()
    }

    pub fn field(&self, key: &str) -> Option<String> {
        self.fields().into_iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

/// Parses a document; `#` starts a comment line.
pub fn parse(text: &str) -> Result<Vec<Section>, FormatError> {
    let mut out: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(h) = line.strip_prefix('[') {
            let h = h
                .strip_suffix(']')
                .ok_or_else(|| FormatError { line: idx + 1, msg: "unterminated section header".into() })?;
            let mut words = h.split_whitespace().map(str::to_string);
            let name = words.next().ok_or_else(|| FormatError { line: idx + 1, msg: "empty section header".into() })?;
            out.push(Section { name, args: words.collect(), body: String::new(), line: idx + 1 });
            continue;
        }
        let cur = out
            .last_mut()
            .ok_or_else(|| FormatError { line: idx + 1, msg: "content before the first section".into() })?;
        cur.body.push_str(line);
        cur.body.push('\n');
    }
    Ok(out)
}

pub fn render(sections: &[Section]) -> String {
    let mut s = String::new();
    for sec in sections {
        if sec.args.is_empty() {
            let _ = writeln!(s, "[{}]", sec.name);
        } else {
            let _ = writeln!(s, "[{} {}]", sec.name, sec.args.join(" "));
        }
        s.push_str(&sec.body);
        if !sec.body.ends_with('\n') && !sec.body.is_empty() {
            s.push('\n');
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let secs = vec![
            Section::new("shape", &[], "dims: 1 2\nlabels: a b\n".into()),
            Section::new("delta", &["b".into(), "0".into(), "1".into()], "block a b\n  1 0\n  0 1\n".into()),
        ];
        let text = render(&secs);
        let back = parse(&text).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].args, vec!["b", "0", "1"]);
        assert_eq!(back[0].field("labels").as_deref(), Some("a b"));
        assert_eq!(back[1].body, "block a b\n1 0\n0 1\n");
    }

    #[test]
    fn rejects_orphan_content() {
        assert!(parse("dims: 1\n").is_err());
        assert!(parse("[shape\n").is_err());
    }
}

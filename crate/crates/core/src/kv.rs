//! Line-oriented `key = value` parsing shared by the config and
//! synthetic-spec file formats.

/// One `key = value` assignment with its 1-based line number.
pub(crate) struct KvLine {
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// Splits a flat key-value document into assignments.
///
/// Blank lines and lines starting with `#` are skipped; everything else
/// must contain a single `=`.
pub(crate) fn parse_kv_lines(text: &str) -> Result<Vec<KvLine>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(format!(
                "line {line}: expected `key = value`, got `{trimmed}`"
            ));
        };
        out.push(KvLine {
            key: key.trim().to_string(),
            value: value.trim().to_string(),
            line,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skips_comments_and_blanks() {
        let lines = parse_kv_lines("# header\n\na = 1\n  b=2  \n").unwrap();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].key, "a");
        assert_eq!(lines[0].value, "1");
        assert_eq!(lines[1].key, "b");
        assert_eq!(lines[1].line, 4);
    }

    #[test]
    fn rejects_missing_equals() {
        assert!(parse_kv_lines("just words\n").is_err());
    }
}

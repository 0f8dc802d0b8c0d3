//! Golden trace comparison.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Match,
    /// First differing 1-based line; `None` means that side ended first.
    Mismatch {
        line: usize,
        expected: Option<String>,
        actual: Option<String>,
    },
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |s: &Option<String>| s.clone().unwrap_or_else(|| "<end of trace>".into());
        match self {
            Verdict::Match => f.write_str("traces match"),
            Verdict::Mismatch { line, expected, actual } => write!(
                f,
                "first difference at line {}\n  expected: {}\n  actual:   {}",
                line,
                side(expected),
                side(actual)
            ),
        }
    }
}

/// LF line endings and exactly one trailing newline.
pub fn normalize(text: &str) -> String {
    let mut s = text.replace("\r\n", "\n");
    let trimmed = s.trim_end_matches('\n').len();
    s.truncate(trimmed);
    s.push('\n');
    s
}

pub fn compare_traces(actual: &str, golden: &str) -> Verdict {
    let (a, g) = (normalize(actual), normalize(golden));
    if a == g {
        return Verdict::Match;
    }
    let mut al = a.lines();
    let mut gl = g.lines();
    let mut line = 0;
    loop {
        line += 1;
        match (gl.next(), al.next()) {
            (Some(x), Some(y)) if x == y => continue,
            (None, None) => unreachable!("normalized texts differ"),
            (expected, actual) => {
                return Verdict::Mismatch {
                    line,
                    expected: expected.map(String::from),
                    actual: actual.map(String::from),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts() {
        assert_eq!(compare_traces("a\nb\n", "a\nb\n"), Verdict::Match);
        assert_eq!(compare_traces("a\nb", "a\r\nb\r\n\r\n"), Verdict::Match);
        assert_eq!(
            compare_traces("a\nb\nc\n", "a\nb\nX\n"),
            Verdict::Mismatch {
                line: 3,
                expected: Some("X".into()),
                actual: Some("c".into())
            }
        );
        assert_eq!(
            compare_traces("a\n", "a\nb\n"),
            Verdict::Mismatch {
                line: 2,
                expected: Some("b".into()),
                actual: None
            }
        );
    }
}

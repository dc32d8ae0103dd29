//! Line-oriented text formats.
//!
//! * codebooks: one binary word per line, all of equal length;
//! * outer words: comma-separated symbols, one word per line;
//! * deletion patterns: comma-separated 1-based indices, one per line
//!   (an empty line is the empty pattern).
//!
//! Lines starting with `#` are comments in codebooks and outer-word files.

use crate::construction::OuterWord;
use crate::error::{Error, Result};
use crate::words::{DeletionPattern, Word};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_codebook(text: &str) -> Result<Vec<Word>> {
    let mut words: Vec<Word> = Vec::new();
    for (line, s) in content_lines(text) {
        let w: Word = s.parse().map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse { line, message },
            other => other,
        })?;
        if let Some(first) = words.first() {
            if first.len() != w.len() {
                return Err(Error::Parse {
                    line,
                    message: format!("codeword length {} differs from {}", w.len(), first.len()),
                });
            }
        }
        words.push(w);
    }
    Ok(words)
}

pub fn format_codebook(words: &[Word]) -> String {
    words.iter().map(|w| format!("{w}\n")).collect()
}

pub fn parse_outer_words(text: &str, k: u32) -> Result<Vec<OuterWord>> {
    content_lines(text)
        .map(|(line, s)| {
            let symbols = s
                .split(',')
                .map(|t| {
                    t.trim().parse::<u32>().map_err(|e| Error::Parse {
                        line,
                        message: format!("bad symbol {t:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            OuterWord::new(symbols, k).map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn format_outer_words(words: &[OuterWord]) -> String {
    words.iter().map(|w| format!("{w}\n")).collect()
}

/// Parses one pattern per line. Blank lines are empty patterns; `#` lines
/// are skipped.
pub fn parse_patterns(text: &str, word_length: usize) -> Result<Vec<DeletionPattern>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim_start().starts_with('#'))
        .map(|(i, l)| parse_pattern_line(l, word_length).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        }))
        .collect()
}

pub fn parse_pattern_line(line: &str, word_length: usize) -> Result<DeletionPattern> {
    let line = line.trim();
    if line.is_empty() {
        return Ok(DeletionPattern::empty(word_length));
    }
    let indices = line
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| Error::InvalidPattern(format!("bad index {t:?}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    DeletionPattern::from_unsorted(word_length, indices)
}

pub fn format_patterns(patterns: &[DeletionPattern]) -> String {
    patterns.iter().map(|p| format!("{p}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codebook_round_trip() {
        let text = "# toy code\n0011\n\n1100\n";
        let words = parse_codebook(text).unwrap();
        assert_eq!(words.len(), 2);
        assert_eq!(format_codebook(&words), "0011\n1100\n");
        assert!(matches!(parse_codebook("01\n011\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_codebook("01\n0a\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn outer_round_trip() {
        let words = parse_outer_words("1,2,3\n# c\n3, 3, 1\n", 3).unwrap();
        assert_eq!(words[1].0, vec![3, 3, 1]);
        assert_eq!(format_outer_words(&words), "1,2,3\n3,3,1\n");
        assert!(parse_outer_words("1,4\n", 3).is_err());
        assert!(parse_outer_words("1,x\n", 3).is_err());
    }

    #[test]
    fn pattern_round_trip() {
        let ps = parse_patterns("1,3\n\n4\n", 4).unwrap();
        assert_eq!(ps.len(), 3);
        assert!(ps[1].is_empty());
        assert_eq!(format_patterns(&ps), "1,3\n\n4\n");
        assert!(parse_patterns("5\n", 4).is_err());
    }
}

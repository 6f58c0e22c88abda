//! Line-oriented text format for instances.
//!
//! ```text
//! # comment
//! p qubo <n>
//! o <offset>
//! l <i> <value>
//! q <i> <j> <value>
//! ```
//!
//! `q` lines may list a pair in either order; the pair is stored canonically.
//! A repeated `l` variable, canonical `q` pair or `o` line is rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::model::{canonical, Coeff, QuboInstance};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing `p qubo <n>` header")]
    MissingHeader,
    #[error("cannot access {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn parse_err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_instance(text: &str) -> Result<QuboInstance, FormatError> {
    let mut n: Option<usize> = None;
    let mut offset: Option<Coeff> = None;
    let mut linear: BTreeMap<usize, Coeff> = BTreeMap::new();
    let mut quadratic: BTreeMap<(usize, usize), Coeff> = BTreeMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let Some(n) = n else {
            match fields.as_slice() {
                ["p", "qubo", count] => {
                    n = Some(parse_num(count, line_no)?);
                    continue;
                }
                _ => return Err(parse_err(line_no, "expected `p qubo <n>` header")),
            }
        };
        let var = |s: &str| -> Result<usize, FormatError> {
            let v: usize = parse_num(s, line_no)?;
            if v == 0 || v > n {
                return Err(parse_err(line_no, format!("variable {v} outside 1..={n}")));
            }
            Ok(v)
        };
        match fields.as_slice() {
            ["o", value] => {
                if offset.is_some() {
                    return Err(parse_err(line_no, "duplicate offset line"));
                }
                offset = Some(parse_num(value, line_no)?);
            }
            ["l", i, value] => {
                let i = var(i)?;
                let value: Coeff = parse_num(value, line_no)?;
                if linear.insert(i, value).is_some() {
                    return Err(parse_err(line_no, format!("duplicate linear term for {i}")));
                }
            }
            ["q", i, j, value] => {
                let (i, j) = (var(i)?, var(j)?);
                if i == j {
                    return Err(parse_err(
                        line_no,
                        format!("quadratic term ({i}, {i}) on the diagonal; use an `l` line"),
                    ));
                }
                let value: Coeff = parse_num(value, line_no)?;
                let key = canonical(i, j);
                if quadratic.insert(key, value).is_some() {
                    return Err(parse_err(
                        line_no,
                        format!("duplicate quadratic pair ({}, {})", key.0, key.1),
                    ));
                }
            }
            ["p", ..] => return Err(parse_err(line_no, "second header line")),
            _ => return Err(parse_err(line_no, format!("unrecognized line `{line}`"))),
        }
    }

    let n = n.ok_or(FormatError::MissingHeader)?;
    let mut lin = vec![0; n];
    for (i, v) in linear {
        lin[i - 1] = v;
    }
    Ok(QuboInstance::from_parts(
        lin,
        quadratic,
        offset.unwrap_or(0),
    ))
}

fn parse_num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T, FormatError> {
    s.parse()
        .map_err(|_| parse_err(line, format!("invalid number `{s}`")))
}

/// Canonical text: header, offset, ascending `l` lines, ascending `q` lines.
pub fn format_instance(instance: &QuboInstance) -> String {
    format_instance_with_comments(instance, &[])
}

pub fn format_instance_with_comments(instance: &QuboInstance, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        for line in c.lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    let _ = writeln!(out, "p qubo {}", instance.n());
    let _ = writeln!(out, "o {}", instance.offset());
    for (k, &c) in instance.linear_coeffs().iter().enumerate() {
        if c != 0 {
            let _ = writeln!(out, "l {} {}", k + 1, c);
        }
    }
    for (i, j, d) in instance.edges() {
        let _ = writeln!(out, "q {i} {j} {d}");
    }
    out
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<QuboInstance, FormatError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_instance(&text)
}

pub fn write_instance(instance: &QuboInstance, path: impl AsRef<Path>) -> Result<(), FormatError> {
    write_instance_with_comments(instance, &[], path)
}

pub fn write_instance_with_comments(
    instance: &QuboInstance,
    comments: &[String],
    path: impl AsRef<Path>,
) -> Result<(), FormatError> {
    let path = path.as_ref();
    fs::write(path, format_instance_with_comments(instance, comments)).map_err(|source| {
        FormatError::Io {
            path: path.display().to_string(),
            source,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_small() {
        let q = QuboInstance::from_triplets(2, [(1, 1, 3), (2, 2, -2), (1, 2, 2)]).unwrap();
        let text = format_instance(&q);
        assert_eq!(text, "p qubo 2\no 0\nl 1 3\nl 2 -2\nq 1 2 2\n");
        assert_eq!(parse_instance(&text).unwrap(), q);
    }

    #[test]
    fn reversed_pair_is_canonicalized() {
        let q = parse_instance("p qubo 2\nq 2 1 5\n").unwrap();
        assert_eq!(q.quadratic(1, 2), 5);
        assert_eq!(q.edges().collect::<Vec<_>>(), vec![(1, 2, 5)]);
    }

    #[test]
    fn out_of_range_reports_line() {
        let err = parse_instance("# hi\np qubo 2\nl 1 4\nq 1 3 2\n").unwrap_err();
        match err {
            FormatError::Parse { line, message } => {
                assert_eq!(line, 4);
                assert!(message.contains('3'));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_canonical_pair_rejected() {
        let err = parse_instance("p qubo 3\nq 1 2 1\nq 2 1 4\n").unwrap_err();
        assert!(matches!(err, FormatError::Parse { line: 3, .. }));
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(
            parse_instance("l 1 2\n"),
            Err(FormatError::Parse { line: 1, .. })
        ));
        assert!(matches!(parse_instance("# only\n"), Err(FormatError::MissingHeader)));
        assert!(parse_instance("p qubo 2\nl 1 x\n").is_err());
        assert!(parse_instance("p qubo 2\nq 1 1 3\n").is_err());
        assert!(parse_instance("p qubo 2\no 1\no 2\n").is_err());
    }

    #[test]
    fn comments_and_zero_values() {
        let q = parse_instance("# header\np qubo 3 # trailing\no -4\nl 2 0\nq 1 3 0\n").unwrap();
        assert_eq!(q.offset(), -4);
        assert_eq!(q.num_edges(), 0);
        assert_eq!(q.nonzero_linear(), 0);
        let text = format_instance_with_comments(&q, &["seed 7".to_string()]);
        assert!(text.starts_with("# seed 7\np qubo 3\n"));
    }
}

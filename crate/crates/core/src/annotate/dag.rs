//! The per-sentence morpheme DAG and its text serialization.
//!
//! ```text
//! #sentence 1
//! 4
//! 0	1	짐승	짐승	co
//! 1	2	만	만	npost+au=lim
//! ...
//! ```
//!
//! Line two is the node count; arc lines are `from to surface base tag`,
//! tab separated. Node ids are topologically ordered: every arc goes from
//! a lower id to a higher one. Tabs, newlines and backslashes inside
//! fields are escaped as `\t`, `\n`, `\\` so separator arcs stay on one
//! line.

// The example above uses real tabs on purpose: it shows the exact format.
#![allow(clippy::tabs_in_doc_comments)]

use crate::error::{Error, ParseError, Result};

pub const TAG_SEPARATOR: &str = "SEP";
pub const TAG_PUNCT: &str = "PUNCT";
pub const TAG_UNKNOWN: &str = "UNK";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DagArc {
    pub from: u32,
    pub to: u32,
    pub surface: String,
    pub base: String,
    pub tag: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorphemeDag {
    /// 1-based sentence number within the annotated text.
    pub sentence: u64,
    pub node_count: u32,
    pub arcs: Vec<DagArc>,
}

impl MorphemeDag {
    /// Nodes every source-to-sink path passes through, ascending. With
    /// topological ids these are exactly the ids no arc jumps over.
    pub fn backbone(&self) -> Vec<u32> {
        (0..self.node_count)
            .filter(|&n| !self.arcs.iter().any(|a| a.from < n && n < a.to))
            .collect()
    }

    pub fn write(&self, out: &mut String) {
        out.push_str(&format!("#sentence {}\n{}\n", self.sentence, self.node_count));
        for arc in &self.arcs {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                arc.from,
                arc.to,
                escape(&arc.surface),
                escape(&arc.base),
                escape(&arc.tag)
            ));
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out);
        out
    }
}

fn escape(field: &str) -> String {
    let mut out = String::with_capacity(field.len());
    for c in field.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            other => out.push(other),
        }
    }
    out
}

fn unescape(field: &str) -> std::result::Result<String, String> {
    let mut out = String::with_capacity(field.len());
    let mut chars = field.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            other => return Err(format!("bad escape \\{}", other.unwrap_or(' '))),
        }
    }
    Ok(out)
}

/// Parse a whole annotated file back into DAGs.
pub fn parse_dags(text: &str) -> Result<Vec<MorphemeDag>> {
    let mut dags: Vec<MorphemeDag> = Vec::new();
    let mut errors = Vec::new();
    let mut expect_count = false;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("#sentence ") {
            match rest.trim().parse::<u64>() {
                Ok(n) => {
                    dags.push(MorphemeDag { sentence: n, node_count: 0, arcs: Vec::new() });
                    expect_count = true;
                }
                Err(_) => errors.push(ParseError::new(lineno, "bad sentence number")),
            }
            continue;
        }
        let Some(dag) = dags.last_mut() else {
            errors.push(ParseError::new(lineno, "content before #sentence header"));
            continue;
        };
        if expect_count {
            match line.trim().parse::<u32>() {
                Ok(n) => dag.node_count = n,
                Err(_) => errors.push(ParseError::new(lineno, "bad node count")),
            }
            expect_count = false;
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            errors.push(ParseError::new(
                lineno,
                format!("expected 5 tab-separated fields, found {}", fields.len()),
            ));
            continue;
        }
        let endpoints = (fields[0].parse::<u32>(), fields[1].parse::<u32>());
        let (Ok(from), Ok(to)) = endpoints else {
            errors.push(ParseError::new(lineno, "bad arc node id"));
            continue;
        };
        let mut texts = Vec::with_capacity(3);
        let mut bad = false;
        for field in &fields[2..] {
            match unescape(field) {
                Ok(t) => texts.push(t),
                Err(message) => {
                    errors.push(ParseError::new(lineno, message));
                    bad = true;
                    break;
                }
            }
        }
        if bad {
            continue;
        }
        if from >= to || to >= dag.node_count {
            errors.push(ParseError::new(lineno, "arc endpoints out of order or range"));
            continue;
        }
        dag.arcs.push(DagArc {
            from,
            to,
            surface: texts[0].clone(),
            base: texts[1].clone(),
            tag: texts[2].clone(),
        });
    }
    if errors.is_empty() {
        Ok(dags)
    } else {
        Err(Error::Parse(errors))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(from: u32, to: u32, s: &str, b: &str, t: &str) -> DagArc {
        DagArc { from, to, surface: s.into(), base: b.into(), tag: t.into() }
    }

    #[test]
    fn write_parse_round_trip() {
        let dag = MorphemeDag {
            sentence: 3,
            node_count: 4,
            arcs: vec![
                arc(0, 1, "짐승", "짐승", "co"),
                arc(1, 2, " \t", " \t", TAG_SEPARATOR),
                arc(2, 3, ".", ".", TAG_PUNCT),
            ],
        };
        let parsed = parse_dags(&dag.render()).unwrap();
        assert_eq!(parsed, vec![dag]);
    }

    #[test]
    fn backbone_skips_parallel_paths() {
        // Two parallel analyses between 1 and 4, one passing through 2,
        // one through 3.
        let dag = MorphemeDag {
            sentence: 1,
            node_count: 5,
            arcs: vec![
                arc(0, 1, "a", "a", "x"),
                arc(1, 2, "b", "b", "x"),
                arc(2, 4, "c", "c", "x"),
                arc(1, 3, "b", "b", "y"),
                arc(3, 4, "c", "c", "y"),
            ],
        };
        assert_eq!(dag.backbone(), vec![0, 1, 4]);
    }

    #[test]
    fn newline_separator_survives() {
        let dag = MorphemeDag {
            sentence: 1,
            node_count: 2,
            arcs: vec![arc(0, 1, "\n", "\n", TAG_SEPARATOR)],
        };
        let rendered = dag.render();
        assert_eq!(rendered.lines().count(), 3);
        assert_eq!(parse_dags(&rendered).unwrap()[0], dag);
    }

    #[test]
    fn malformed_arc_reports_line() {
        let err = parse_dags("#sentence 1\n2\n0\t1\tonly four fields\n").unwrap_err();
        let Error::Parse(errors) = err else { panic!() };
        assert_eq!(errors[0].line, 3);
    }

    #[test]
    fn arc_order_enforced() {
        assert!(parse_dags("#sentence 1\n2\n1\t0\ta\ta\tx\n").is_err());
        assert!(parse_dags("#sentence 1\n2\n0\t5\ta\ta\tx\n").is_err());
    }
}

//! Directly maintainable resources: the tagset declaration, the
//! compatibility-symbol list, stem lexicons and the bundle manifest.
//!
//! File formats are line oriented so the resources stay diffable and
//! editable by hand. `#` starts a comment, blank lines are ignored, all
//! files are UTF-8.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, ParseError, Result};
use crate::hangul::{compose, decompose, LetterString};

/// Maximum number of features a structured tag may carry.
pub const MAX_FEATURES: usize = 4;

/// A structured tag: a general category plus up to four feature=value pairs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag {
    pub general: String,
    pub features: Vec<(String, String)>,
}

impl Tag {
    pub fn new(general: impl Into<String>) -> Self {
        Tag {
            general: general.into(),
            features: Vec::new(),
        }
    }

    pub fn with_feature(mut self, name: impl Into<String>, value: impl Into<String>) -> Self {
        self.features.push((name.into(), value.into()));
        self
    }

    /// Parse the textual form `general+feat=val+feat=val`.
    pub fn parse(text: &str) -> std::result::Result<Tag, String> {
        let mut parts = text.split('+');
        let general = parts.next().unwrap_or("").trim();
        if general.is_empty() {
            return Err("empty tag".to_string());
        }
        if !is_name(general) {
            return Err(format!("invalid general tag {general:?}"));
        }
        let mut tag = Tag::new(general);
        for part in parts {
            let (name, value) = part
                .split_once('=')
                .ok_or_else(|| format!("feature {part:?} is not of the form name=value"))?;
            if !is_name(name) || !is_name(value) {
                return Err(format!("invalid feature {part:?}"));
            }
            if tag.features.iter().any(|(n, _)| n == name) {
                return Err(format!("feature {name:?} appears twice"));
            }
            tag.features.push((name.to_string(), value.to_string()));
        }
        if tag.features.len() > MAX_FEATURES {
            return Err(format!(
                "tag has {} features; at most {} allowed",
                tag.features.len(),
                MAX_FEATURES
            ));
        }
        Ok(tag)
    }

    pub fn render(&self) -> String {
        let mut out = self.general.clone();
        for (name, value) in &self.features {
            out.push('+');
            out.push_str(name);
            out.push('=');
            out.push_str(value);
        }
        out
    }
}

impl std::fmt::Display for Tag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.render())
    }
}

/// The declared inventory of general tags, features and feature values.
#[derive(Debug, Clone, Default)]
pub struct Tagset {
    pub generals: Vec<String>,
    pub features: BTreeMap<String, Vec<String>>,
}

impl Tagset {
    pub fn general_count(&self) -> usize {
        self.generals.len()
    }

    pub fn feature_count(&self) -> usize {
        self.features.len()
    }

    pub fn value_count(&self) -> usize {
        self.features.values().map(|v| v.len()).sum()
    }

    /// Check a tag against the declared inventory.
    pub fn validate(&self, tag: &Tag) -> std::result::Result<(), String> {
        if !self.generals.iter().any(|g| g == &tag.general) {
            return Err(format!("unknown general tag {:?}", tag.general));
        }
        for (name, value) in &tag.features {
            match self.features.get(name) {
                None => return Err(format!("unknown feature {name:?}")),
                Some(values) if !values.iter().any(|v| v == value) => {
                    return Err(format!("unknown value {value:?} for feature {name:?}"))
                }
                Some(_) => {}
            }
        }
        Ok(())
    }
}

/// Parse a tagset declaration file.
///
/// Lines are `tag NAME` or `feature NAME VALUE...`.
pub fn parse_tagset(text: &str) -> Result<Tagset> {
    let mut tagset = Tagset::default();
    let mut errors = Vec::new();
    let mut saw_declaration = false;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        saw_declaration = true;
        let mut words = line.split_whitespace();
        match words.next() {
            Some("tag") => {
                let Some(name) = words.next() else {
                    errors.push(ParseError::new(lineno, "tag declaration without a name"));
                    continue;
                };
                if words.next().is_some() {
                    errors.push(ParseError::new(lineno, "trailing text after tag name"));
                    continue;
                }
                if !is_name(name) {
                    errors.push(ParseError::new(lineno, format!("invalid tag name {name:?}")));
                } else if tagset.generals.iter().any(|g| g == name) {
                    errors.push(ParseError::new(lineno, format!("duplicate tag {name:?}")));
                } else {
                    tagset.generals.push(name.to_string());
                }
            }
            Some("feature") => {
                let Some(name) = words.next() else {
                    errors.push(ParseError::new(lineno, "feature declaration without a name"));
                    continue;
                };
                let values: Vec<String> = words.map(str::to_string).collect();
                if !is_name(name) || values.iter().any(|v| !is_name(v)) {
                    errors.push(ParseError::new(lineno, "invalid feature or value name"));
                } else if values.is_empty() {
                    errors.push(ParseError::new(lineno, format!("feature {name:?} has no values")));
                } else if tagset.features.contains_key(name) {
                    errors.push(ParseError::new(lineno, format!("duplicate feature {name:?}")));
                } else {
                    tagset.features.insert(name.to_string(), values);
                }
            }
            Some(other) => {
                errors.push(ParseError::new(
                    lineno,
                    format!("expected `tag` or `feature`, found {other:?}"),
                ));
            }
            None => unreachable!(),
        }
    }
    if !saw_declaration {
        errors.push(ParseError::new(0, "empty tagset"));
    }
    if errors.is_empty() {
        Ok(tagset)
    } else {
        Err(Error::Parse(errors))
    }
}

/// A compatibility symbol: the label that selects which suffix sequences a
/// stem or stem allomorph accepts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CompatibilitySymbol(pub String);

impl CompatibilitySymbol {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for CompatibilitySymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Parse a compatibility-symbol list, one name per line.
pub fn parse_cs_list(text: &str) -> Result<Vec<CompatibilitySymbol>> {
    let mut list = Vec::new();
    let mut errors = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        if !is_name(line) {
            errors.push(ParseError::new(lineno, format!("invalid CS name {line:?}")));
        } else if list.iter().any(|c: &CompatibilitySymbol| c.0 == line) {
            errors.push(ParseError::new(lineno, format!("duplicate CS {line:?}")));
        } else {
            list.push(CompatibilitySymbol(line.to_string()));
        }
    }
    if errors.is_empty() {
        Ok(list)
    } else {
        Err(Error::Parse(errors))
    }
}

/// One stem lexicon entry.
///
/// Base-form entries have `surface == base`; entries generated by the
/// allomorph and derivation transducers may differ. The optional graph list
/// names the allomorph/derivation transducers that apply to this stem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StemEntry {
    pub surface: LetterString,
    pub base: LetterString,
    pub tag: Tag,
    pub cs: CompatibilitySymbol,
    pub graphs: Vec<String>,
}

impl StemEntry {
    /// Render back to the lexicon line format.
    pub fn to_line(&self) -> String {
        let mut line = format!(
            "{},{}.{}/{}",
            compose(&self.surface),
            compose(&self.base),
            self.tag.render(),
            self.cs
        );
        for graph in &self.graphs {
            line.push_str(" @");
            line.push_str(graph);
        }
        line
    }
}

/// Parse one stem lexicon file.
///
/// Line format: `surface,base.TAG/CS [@graph ...]`. Surfaces and bases are
/// written in syllabic spelling and decomposed on load. Parsing continues
/// past bad lines so every error in the file is reported at once.
pub fn parse_stem_lexicon(
    text: &str,
    tagset: &Tagset,
    cs_list: &[CompatibilitySymbol],
) -> (Vec<StemEntry>, Vec<ParseError>) {
    let mut entries = Vec::new();
    let mut errors = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        match parse_stem_line(line, tagset, cs_list) {
            Ok(entry) => entries.push(entry),
            Err(message) => errors.push(ParseError::new(lineno, message)),
        }
    }
    (entries, errors)
}

fn parse_stem_line(
    line: &str,
    tagset: &Tagset,
    cs_list: &[CompatibilitySymbol],
) -> std::result::Result<StemEntry, String> {
    let mut fields = line.split_whitespace();
    let head = fields.next().ok_or("empty entry")?;
    let mut graphs = Vec::new();
    for extra in fields {
        let Some(name) = extra.strip_prefix('@') else {
            return Err(format!("unexpected token {extra:?} (graph names start with @)"));
        };
        if !is_name(name) {
            return Err(format!("invalid graph name {name:?}"));
        }
        graphs.push(name.to_string());
    }

    let (forms, rest) = head
        .split_once('.')
        .ok_or("missing `.` between forms and tag")?;
    let (surface_text, base_text) = forms
        .split_once(',')
        .ok_or("missing `,` between surface and base")?;
    let (tag_text, cs_text) = rest.split_once('/').ok_or("missing `/CS` after tag")?;

    if surface_text.is_empty() {
        return Err("empty surface".to_string());
    }
    if base_text.is_empty() {
        return Err("empty base".to_string());
    }
    check_form(surface_text)?;
    check_form(base_text)?;

    let tag = Tag::parse(tag_text)?;
    tagset.validate(&tag)?;
    if !cs_list.iter().any(|c| c.0 == cs_text) {
        return Err(format!("unknown CS {cs_text:?}"));
    }

    Ok(StemEntry {
        surface: decompose(surface_text),
        base: decompose(base_text),
        tag,
        cs: CompatibilitySymbol(cs_text.to_string()),
        graphs,
    })
}

/// Characters with structural meaning in resource files; forms may not
/// contain them so that every rendering stays unambiguous.
const RESERVED: &[char] = &[',', '.', '/', '+', '=', '@', '#', '{', '}', '(', ')', '<', '>'];

fn check_form(text: &str) -> std::result::Result<(), String> {
    for c in text.chars() {
        if c.is_whitespace() || RESERVED.contains(&c) {
            return Err(format!("form {text:?} contains reserved character {c:?}"));
        }
    }
    Ok(())
}

pub(crate) fn is_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => line[..pos].trim(),
        None => line.trim(),
    }
}

/// The bundle manifest: one declarative file naming every member resource
/// by role. Paths are relative to the manifest's directory.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleManifest {
    pub tagset: PathBuf,
    pub cs_list: PathBuf,
    #[serde(default)]
    pub stem_lexicons: Vec<PathBuf>,
    #[serde(default)]
    pub allomorph_graphs: Vec<PathBuf>,
    #[serde(default)]
    pub derivation_graphs: Vec<PathBuf>,
    #[serde(default)]
    pub suffix_rtns: Vec<PathBuf>,
    #[serde(default)]
    pub subgraphs: Vec<PathBuf>,
    pub downgrade_map: Option<PathBuf>,
    #[serde(default = "default_unroll_bound")]
    pub unroll_bound: u32,
    pub output: Option<PathBuf>,
}

fn default_unroll_bound() -> u32 {
    1
}

impl BundleManifest {
    /// Parse a manifest file and resolve all member paths against its
    /// directory. Fails if any referenced file is missing.
    pub fn load(path: &Path) -> Result<BundleManifest> {
        let text = std::fs::read_to_string(path)?;
        let mut manifest: BundleManifest = toml::from_str(&text)
            .map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or_else(|| Path::new("."));
        manifest.resolve(dir);
        manifest.check_files_exist()?;
        if manifest.unroll_bound == 0 {
            return Err(Error::Manifest("unroll_bound must be at least 1".into()));
        }
        Ok(manifest)
    }

    fn resolve(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&p);
            }
        };
        fix(&mut self.tagset);
        fix(&mut self.cs_list);
        for p in self
            .stem_lexicons
            .iter_mut()
            .chain(self.allomorph_graphs.iter_mut())
            .chain(self.derivation_graphs.iter_mut())
            .chain(self.suffix_rtns.iter_mut())
            .chain(self.subgraphs.iter_mut())
        {
            fix(p);
        }
        if let Some(p) = self.downgrade_map.as_mut() {
            fix(p);
        }
        if let Some(p) = self.output.as_mut() {
            if p.is_relative() {
                *p = dir.join(&p);
            }
        }
    }

    fn check_files_exist(&self) -> Result<()> {
        for (role, path) in self.member_files() {
            if !path.exists() {
                return Err(Error::Manifest(format!(
                    "{role} file {} does not exist",
                    path.display()
                )));
            }
        }
        Ok(())
    }

    /// All member files with their role names, in pipeline order.
    pub fn member_files(&self) -> Vec<(&'static str, &Path)> {
        let mut files: Vec<(&'static str, &Path)> = vec![
            ("tagset", &self.tagset),
            ("cs_list", &self.cs_list),
        ];
        files.extend(self.stem_lexicons.iter().map(|p| ("stem_lexicon", p.as_path())));
        files.extend(self.allomorph_graphs.iter().map(|p| ("allomorph_graph", p.as_path())));
        files.extend(self.derivation_graphs.iter().map(|p| ("derivation_graph", p.as_path())));
        files.extend(self.suffix_rtns.iter().map(|p| ("suffix_rtn", p.as_path())));
        files.extend(self.subgraphs.iter().map(|p| ("subgraph", p.as_path())));
        if let Some(p) = &self.downgrade_map {
            files.push(("downgrade_map", p));
        }
        files
    }
}

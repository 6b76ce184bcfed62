//! Bundle compilation: the sequential steps that turn a manifest of text
//! resources into one linked word lexicon.
//!
//! Steps, in order: load the tagset and compatibility-symbol list; parse
//! stem lexicons and all graph files; expand stems into their variant
//! lexicon; enumerate each suffix network into ending entries (the file
//! stem of an RTN file names the compatibility symbol it serves); build
//! the minimal stem and ending automata; link them. Every intermediate
//! ordering is fixed, so recompiling identical inputs yields identical
//! bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::allomorph::{generate_variant_lexicon, GraphRole, VariantOptions};
use crate::error::{Error, Result};
use crate::graph::{parse_graph, TransducerGraph};
use crate::hangul::LetterString;
use crate::lexicon::{compile, link, CompiledLexicon, StemPayload};
use crate::resource::{
    is_name, parse_cs_list, parse_stem_lexicon, parse_tagset, BundleManifest, StemEntry,
};
use crate::rtn::{enumerate, Morpheme};

/// Switches that vary a compilation run without editing the bundle.
#[derive(Debug, Clone)]
pub struct CompileOptions {
    /// Apply allomorph graphs of derived stems to the derived forms.
    pub chain_allomorphy: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { chain_allomorphy: true }
    }
}

/// Per-step entry counts and the size of the final machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileReport {
    pub stem_entries: usize,
    pub variant_entries: usize,
    /// (compatibility symbol, distinct ending count), list order.
    pub endings_per_cs: Vec<(String, usize)>,
    pub stem_states: usize,
    pub stem_transitions: usize,
    pub ending_states: usize,
    pub ending_transitions: usize,
    pub warnings: Vec<String>,
}

impl CompileReport {
    /// Fixed key=value rendering, one pair per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("stem_entries={}\n", self.stem_entries));
        out.push_str(&format!("variant_entries={}\n", self.variant_entries));
        for (cs, n) in &self.endings_per_cs {
            out.push_str(&format!("endings.{cs}={n}\n"));
        }
        out.push_str(&format!("stem_states={}\n", self.stem_states));
        out.push_str(&format!("stem_transitions={}\n", self.stem_transitions));
        out.push_str(&format!("ending_states={}\n", self.ending_states));
        out.push_str(&format!("ending_transitions={}\n", self.ending_transitions));
        out
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn graph_name(path: &Path) -> Result<String> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::Manifest(format!("bad graph file name {}", path.display())))?;
    if !is_name(stem) {
        return Err(Error::Manifest(format!(
            "graph file name {stem:?} is not a plain identifier"
        )));
    }
    Ok(stem.to_string())
}

/// Runs the whole compilation and returns the linked lexicon with its
/// report. Writing the output file is left to the caller.
pub fn compile_bundle(
    manifest: &BundleManifest,
    options: &CompileOptions,
) -> Result<(CompiledLexicon, CompileReport)> {
    let tagset = parse_tagset(&read(&manifest.tagset)?).map_err(|e| e.in_file(&manifest.tagset))?;
    let cs_list = parse_cs_list(&read(&manifest.cs_list)?).map_err(|e| e.in_file(&manifest.cs_list))?;

    let mut stems: Vec<StemEntry> = Vec::new();
    for path in &manifest.stem_lexicons {
        let (entries, errors) = parse_stem_lexicon(&read(path)?, &tagset, &cs_list);
        if !errors.is_empty() {
            return Err(Error::Parse(errors).in_file(path));
        }
        stems.extend(entries);
    }

    let mut graphs: BTreeMap<String, TransducerGraph> = BTreeMap::new();
    let mut roles: BTreeMap<String, GraphRole> = BTreeMap::new();
    let mut warnings: Vec<String> = Vec::new();
    let groups: [(&[std::path::PathBuf], Option<GraphRole>); 4] = [
        (&manifest.allomorph_graphs, Some(GraphRole::Allomorph)),
        (&manifest.derivation_graphs, Some(GraphRole::Derivation)),
        (&manifest.subgraphs, Some(GraphRole::Subgraph)),
        (&manifest.suffix_rtns, None),
    ];
    for (paths, role) in groups {
        for path in paths {
            let name = graph_name(path)?;
            let (graph, graph_warnings) =
                parse_graph(&name, &read(path)?).map_err(|e| e.in_file(path))?;
            warnings.extend(graph_warnings.into_iter().map(|w| format!("{name}: {w}")));
            if graphs.insert(name.clone(), graph).is_some() {
                return Err(Error::Graph {
                    graph: name,
                    message: "declared by more than one file".into(),
                });
            }
            if let Some(role) = role {
                roles.insert(name.clone(), role);
            }
        }
    }

    let (variants, variant_warnings) = generate_variant_lexicon(
        &stems,
        &graphs,
        &roles,
        &tagset,
        &cs_list,
        VariantOptions { chain_allomorphy: options.chain_allomorphy },
    )?;
    warnings.extend(variant_warnings);

    // The file stem of each suffix network file names the compatibility
    // symbol whose endings it defines.
    let mut ending_entries: BTreeMap<String, Vec<crate::rtn::EndingEntry>> = BTreeMap::new();
    for path in &manifest.suffix_rtns {
        let name = graph_name(path)?;
        if !cs_list.iter().any(|c| c.as_str() == name) {
            return Err(Error::Manifest(format!(
                "suffix network file {name:?} does not match any declared compatibility symbol"
            )));
        }
        let root = &graphs[&name];
        let entries = enumerate(root, &graphs, &tagset, manifest.unroll_bound)?;
        ending_entries.insert(name, entries);
    }

    // Intern annotations and stem payloads into sorted tables, so that
    // identifiers depend only on content.
    let mut annotation_set: BTreeSet<Vec<Morpheme>> = BTreeSet::new();
    for entries in ending_entries.values() {
        for e in entries {
            annotation_set.insert(e.annotation.clone());
        }
    }
    let annotations: Vec<Vec<Morpheme>> = annotation_set.into_iter().collect();
    let annotation_id = |a: &Vec<Morpheme>| -> u32 {
        annotations.binary_search(a).expect("interned annotation") as u32
    };

    let cs_index = |e: &StemEntry| -> u32 {
        cs_list
            .iter()
            .position(|c| *c == e.cs)
            .expect("validated compatibility symbol") as u32
    };
    let mut payload_set: BTreeMap<(LetterString, String, u32), &StemEntry> = BTreeMap::new();
    for entry in &variants {
        payload_set
            .entry((entry.base.clone(), entry.tag.render(), cs_index(entry)))
            .or_insert(entry);
    }
    let stem_payloads: Vec<StemPayload> = payload_set
        .values()
        .map(|e| StemPayload {
            base: e.base.clone(),
            tag: e.tag.clone(),
            cs: cs_index(e),
        })
        .collect();
    let payload_keys: Vec<&(LetterString, String, u32)> = payload_set.keys().collect();
    let payload_id = |e: &StemEntry| -> u32 {
        let key = (e.base.clone(), e.tag.render(), cs_index(e));
        payload_keys
            .binary_search_by(|k| (**k).cmp(&key))
            .expect("interned payload") as u32
    };

    let mut stem_surfaces: BTreeMap<LetterString, BTreeSet<u32>> = BTreeMap::new();
    for entry in &variants {
        stem_surfaces
            .entry(entry.surface.clone())
            .or_default()
            .insert(payload_id(entry));
    }
    let stem_input: Vec<(LetterString, Vec<u32>)> = stem_surfaces
        .into_iter()
        .map(|(s, ids)| (s, ids.into_iter().collect()))
        .collect();
    let stem_automaton = compile(&stem_input)?;

    let mut endings = Vec::new();
    let mut endings_per_cs = Vec::new();
    let mut ending_states = 0usize;
    let mut ending_transitions = 0usize;
    for cs in &cs_list {
        match ending_entries.get(cs.as_str()) {
            None => endings.push(None),
            Some(entries) => {
                let mut by_surface: BTreeMap<LetterString, BTreeSet<u32>> = BTreeMap::new();
                for e in entries {
                    by_surface
                        .entry(e.surface.clone())
                        .or_default()
                        .insert(annotation_id(&e.annotation));
                }
                let input: Vec<(LetterString, Vec<u32>)> = by_surface
                    .into_iter()
                    .map(|(s, ids)| (s, ids.into_iter().collect()))
                    .collect();
                let automaton = compile(&input)?;
                ending_states += automaton.state_count();
                ending_transitions += automaton.edges.len();
                endings_per_cs.push((cs.as_str().to_string(), entries.len()));
                endings.push(Some(automaton));
            }
        }
    }

    let report = CompileReport {
        stem_entries: stems.len(),
        variant_entries: variants.len(),
        endings_per_cs,
        stem_states: stem_automaton.state_count(),
        stem_transitions: stem_automaton.edges.len(),
        ending_states,
        ending_transitions,
        warnings,
    };
    let cs_names: Vec<String> = cs_list.iter().map(|c| c.as_str().to_string()).collect();
    let lexicon = link(stem_automaton, stem_payloads, endings, cs_names, annotations)?;
    Ok((lexicon, report))
}

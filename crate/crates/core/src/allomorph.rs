//! Stem variant generation: allomorph and derived-stem lexicons.
//!
//! An allomorph or derivation graph is a transducer whose accepting paths
//! each describe one edit program: a sequence of `<R>` (remove the last
//! letter) and `<E>/x` (append letter x) steps, closed by exactly one
//! output token `{TAG/CS}`. Applying a program to a stem entry edits its
//! surface; the allomorph role keeps the entry's base unchanged, while
//! the derivation role extends the base with the program's appended
//! letters, so derived bases keep the source base as a prefix.
//!
//! Derivation tokens may name follow-up allomorph graphs,
//! `{TAG/CS@g1,g2}`, which then apply to the derived stem (needed for
//! contractions like 하 to 해 on derived verb stems). A switch turns this
//! chaining off.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{Label, StateId, TransducerGraph};
use crate::resource::{CompatibilitySymbol, StemEntry, Tag, Tagset};
use crate::rtn::reachable_graphs;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditInstr {
    RemoveLast,
    Append(crate::hangul::Letter),
}

/// One accepting path of an edit graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditProgram {
    pub instructions: Vec<EditInstr>,
    pub tag: Tag,
    pub cs: CompatibilitySymbol,
    /// Follow-up allomorph graphs, honored only in the derivation role.
    pub chained: Vec<String>,
}

impl EditProgram {
    pub fn appended(&self) -> Vec<crate::hangul::Letter> {
        self.instructions
            .iter()
            .filter_map(|i| match i {
                EditInstr::Append(l) => Some(*l),
                EditInstr::RemoveLast => None,
            })
            .collect()
    }
}

/// Enumerate the edit programs of one allomorph or derivation graph,
/// expanding sub-graph calls. The flattened graph must be acyclic: any
/// cycle, whether of plain arcs or through calls, means an unbounded
/// variant set and is rejected.
pub fn enumerate_edit_programs(
    root: &TransducerGraph,
    graphs: &BTreeMap<String, TransducerGraph>,
    tagset: &Tagset,
    cs_list: &[CompatibilitySymbol],
) -> Result<Vec<EditProgram>> {
    let reachable = reachable_graphs(root, graphs)?;
    for graph in &reachable {
        if graph.find_state_cycle(true).is_some() {
            return Err(Error::CyclicEditGraph(graph.name.clone()));
        }
    }
    let sub: BTreeMap<String, TransducerGraph> = reachable
        .iter()
        .map(|g| (g.name.clone(), (*g).clone()))
        .collect();
    let call_graph = crate::graph::build_call_graph(&sub)?;
    if let Some(name) = call_graph.cyclic_names().into_iter().next() {
        return Err(Error::CyclicEditGraph(name));
    }

    let mut walker = ProgramWalker {
        graphs,
        tagset,
        cs_list,
        instructions: Vec::new(),
        payload: None,
        programs: Vec::new(),
    };
    walker.walk(root, root.initial, &mut Vec::new())?;
    Ok(walker.programs)
}

struct ProgramWalker<'a> {
    graphs: &'a BTreeMap<String, TransducerGraph>,
    tagset: &'a Tagset,
    cs_list: &'a [CompatibilitySymbol],
    instructions: Vec<EditInstr>,
    payload: Option<(Tag, CompatibilitySymbol, Vec<String>)>,
    programs: Vec<EditProgram>,
}

impl<'a> ProgramWalker<'a> {
    fn walk(
        &mut self,
        graph: &'a TransducerGraph,
        state: StateId,
        conts: &mut Vec<(&'a TransducerGraph, StateId)>,
    ) -> Result<()> {
        if graph.finals.contains(&state) {
            match conts.pop() {
                Some((caller, resume)) => {
                    self.walk(caller, resume, conts)?;
                    conts.push((caller, resume));
                }
                None => {
                    let Some((tag, cs, chained)) = self.payload.clone() else {
                        return Err(Error::Graph {
                            graph: graph.name.clone(),
                            message: "accepting path without an output token".into(),
                        });
                    };
                    self.programs.push(EditProgram {
                        instructions: self.instructions.clone(),
                        tag,
                        cs,
                        chained,
                    });
                }
            }
        }
        for arc in graph.arcs_from(state) {
            if self.payload.is_some() && !matches!(arc.label, Label::Epsilon) {
                return Err(Error::Graph {
                    graph: graph.name.clone(),
                    message: "output token must end the path".into(),
                });
            }
            match &arc.label {
                Label::Epsilon => self.walk(graph, arc.to, conts)?,
                Label::RemoveLast => {
                    self.instructions.push(EditInstr::RemoveLast);
                    self.walk(graph, arc.to, conts)?;
                    self.instructions.pop();
                }
                Label::Pair { input: None, output: Some(l) } => {
                    self.instructions.push(EditInstr::Append(*l));
                    self.walk(graph, arc.to, conts)?;
                    self.instructions.pop();
                }
                Label::Pair { .. } => {
                    return Err(Error::Graph {
                        graph: graph.name.clone(),
                        message: format!(
                            "edit graphs consume no input; arc label {} not allowed",
                            arc.label
                        ),
                    });
                }
                Label::Token(text) => {
                    let payload = parse_program_token(text, self.tagset, self.cs_list)
                        .map_err(|message| Error::Graph {
                            graph: graph.name.clone(),
                            message,
                        })?;
                    self.payload = Some(payload);
                    self.walk(graph, arc.to, conts)?;
                    self.payload = None;
                }
                Label::Call(name) => {
                    let callee = &self.graphs[name.as_str()];
                    conts.push((graph, arc.to));
                    self.walk(callee, callee.initial, conts)?;
                    conts.pop();
                }
            }
        }
        Ok(())
    }
}

/// Parse `TAG/CS` or `TAG/CS@g1,g2` from an output token.
fn parse_program_token(
    text: &str,
    tagset: &Tagset,
    cs_list: &[CompatibilitySymbol],
) -> std::result::Result<(Tag, CompatibilitySymbol, Vec<String>), String> {
    let (tag_text, rest) = text
        .split_once('/')
        .ok_or_else(|| format!("token {{{text}}} is not of the form TAG/CS"))?;
    let (cs_text, chained) = match rest.split_once('@') {
        Some((cs, list)) => {
            let names: Vec<String> = list.split(',').map(str::to_string).collect();
            for name in &names {
                if !crate::resource::is_name(name) {
                    return Err(format!("invalid chained graph name {name:?}"));
                }
            }
            (cs, names)
        }
        None => (rest, Vec::new()),
    };
    let tag = Tag::parse(tag_text)?;
    tagset.validate(&tag)?;
    if !cs_list.iter().any(|c| c.0 == cs_text) {
        return Err(format!("unknown CS {cs_text:?}"));
    }
    Ok((tag, CompatibilitySymbol(cs_text.to_string()), chained))
}

/// Run a program's instructions over a surface. `None` means the program
/// does not apply (removal from an exhausted or fully consumed surface).
fn edit_surface(surface: &[crate::hangul::Letter], program: &EditProgram) -> Option<Vec<crate::hangul::Letter>> {
    let mut out = surface.to_vec();
    for instr in &program.instructions {
        match instr {
            EditInstr::RemoveLast => {
                out.pop()?;
            }
            EditInstr::Append(l) => out.push(*l),
        }
    }
    if out.is_empty() {
        return None;
    }
    Some(out)
}

/// Allomorph role: edited surface, base kept.
pub fn apply_allomorph(entry: &StemEntry, program: &EditProgram) -> Option<StemEntry> {
    let surface = edit_surface(&entry.surface, program)?;
    Some(StemEntry {
        surface,
        base: entry.base.clone(),
        tag: program.tag.clone(),
        cs: program.cs.clone(),
        graphs: Vec::new(),
    })
}

/// Derivation role: edited surface, base extended by the appended letters.
pub fn apply_derivation(entry: &StemEntry, program: &EditProgram) -> Option<StemEntry> {
    let surface = edit_surface(&entry.surface, program)?;
    let mut base = entry.base.clone();
    base.extend(program.appended());
    Some(StemEntry {
        surface,
        base,
        tag: program.tag.clone(),
        cs: program.cs.clone(),
        graphs: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct VariantOptions {
    /// Apply the follow-up allomorph graphs named on derivation tokens to
    /// the derived stems.
    pub chain_allomorphy: bool,
}

impl Default for VariantOptions {
    fn default() -> Self {
        VariantOptions { chain_allomorphy: true }
    }
}

/// Which role each graph name plays. Subgraphs are callable from either
/// role but cannot be named on a stem entry directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphRole {
    Allomorph,
    Derivation,
    Subgraph,
}

/// Expand a base-form stem lexicon into the full variant lexicon: each
/// input entry, then its allomorphs and derived stems, in input order,
/// then graph order, then path order. Inapplicable programs are skipped
/// with a warning.
pub fn generate_variant_lexicon(
    stems: &[StemEntry],
    graphs: &BTreeMap<String, TransducerGraph>,
    roles: &BTreeMap<String, GraphRole>,
    tagset: &Tagset,
    cs_list: &[CompatibilitySymbol],
    options: VariantOptions,
) -> Result<(Vec<StemEntry>, Vec<String>)> {
    // Programs are enumerated once per graph, not once per stem.
    let mut programs: BTreeMap<&str, Vec<EditProgram>> = BTreeMap::new();
    for (name, role) in roles {
        if matches!(role, GraphRole::Allomorph | GraphRole::Derivation) {
            let root = graphs.get(name.as_str()).ok_or_else(|| Error::UnknownGraph {
                caller: "variant generation".into(),
                callee: name.clone(),
            })?;
            programs.insert(name, enumerate_edit_programs(root, graphs, tagset, cs_list)?);
        }
    }

    let mut out = Vec::new();
    let mut warnings = Vec::new();
    for entry in stems {
        out.push(entry.clone());
        for graph_name in &entry.graphs {
            let role = roles.get(graph_name.as_str()).copied().ok_or_else(|| {
                Error::UnknownGraph {
                    caller: format!("stem {}", entry.to_line()),
                    callee: graph_name.clone(),
                }
            })?;
            match role {
                GraphRole::Subgraph => {
                    return Err(Error::Graph {
                        graph: graph_name.clone(),
                        message: format!(
                            "subgraph named directly on stem {}",
                            entry.to_line()
                        ),
                    })
                }
                GraphRole::Allomorph => {
                    for program in &programs[graph_name.as_str()] {
                        match apply_allomorph(entry, program) {
                            Some(variant) => out.push(variant),
                            None => warnings.push(inapplicable(entry, graph_name)),
                        }
                    }
                }
                GraphRole::Derivation => {
                    for program in &programs[graph_name.as_str()] {
                        let Some(derived) = apply_derivation(entry, program) else {
                            warnings.push(inapplicable(entry, graph_name));
                            continue;
                        };
                        out.push(derived.clone());
                        if !options.chain_allomorphy {
                            continue;
                        }
                        for chained_name in &program.chained {
                            let chained_programs =
                                programs.get(chained_name.as_str()).ok_or_else(|| {
                                    Error::UnknownGraph {
                                        caller: graph_name.clone(),
                                        callee: chained_name.clone(),
                                    }
                                })?;
                            if roles.get(chained_name.as_str())
                                != Some(&GraphRole::Allomorph)
                            {
                                return Err(Error::Graph {
                                    graph: graph_name.clone(),
                                    message: format!(
                                        "chained graph {chained_name} is not an allomorph graph"
                                    ),
                                });
                            }
                            for chained_program in chained_programs {
                                match apply_allomorph(&derived, chained_program) {
                                    Some(variant) => out.push(variant),
                                    None => {
                                        warnings.push(inapplicable(&derived, chained_name))
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok((out, warnings))
}

fn inapplicable(entry: &StemEntry, graph: &str) -> String {
    format!(
        "program of {graph} inapplicable to {}: removal exhausts the surface",
        crate::hangul::compose(&entry.surface)
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_graph;
    use crate::hangul::{decompose, Letter};
    use crate::resource::{parse_cs_list, parse_stem_lexicon, parse_tagset};

    fn tagset() -> Tagset {
        parse_tagset("tag aj\ntag vb\ntag ad\nfeature al vd\n").unwrap()
    }

    fn cs_list() -> Vec<CompatibilitySymbol> {
        parse_cs_list("E00\nA01\nA02\nD01\n").unwrap()
    }

    fn graphs(files: &[(&str, &str)]) -> BTreeMap<String, TransducerGraph> {
        files
            .iter()
            .map(|(name, text)| (name.to_string(), parse_graph(name, text).unwrap().0))
            .collect()
    }

    /// Drop the final 다 syllable (two letters) of a citation form.
    const DROP_TA: &str = "state 0 initial\nstate 1\nstate 2\nstate 3 final\n\
                           0 -> 1 : <R>\n1 -> 2 : <R>\n2 -> 3 : {aj/A01}\n";

    #[test]
    fn single_path_single_program() {
        let g = graphs(&[("drop_ta", DROP_TA)]);
        let programs =
            enumerate_edit_programs(&g["drop_ta"], &g, &tagset(), &cs_list()).unwrap();
        assert_eq!(programs.len(), 1);
        assert_eq!(
            programs[0].instructions,
            vec![EditInstr::RemoveLast, EditInstr::RemoveLast]
        );
        assert_eq!(programs[0].tag.render(), "aj");
        assert_eq!(programs[0].cs.as_str(), "A01");
    }

    #[test]
    fn two_branches_two_programs() {
        let g = graphs(&[(
            "both",
            "state 0 initial\nstate 1\nstate 2 final\n\
             0 -> 1 : <R>\n1 -> 2 : {aj/A01}\n\
             0 -> 3 : <E>/ㅏ\nstate 3\n3 -> 2 : {vb/A02}\n",
        )]);
        let programs = enumerate_edit_programs(&g["both"], &g, &tagset(), &cs_list()).unwrap();
        assert_eq!(programs.len(), 2);
        assert_eq!(programs[0].instructions, vec![EditInstr::RemoveLast]);
        assert_eq!(programs[1].instructions, vec![EditInstr::Append(Letter('ㅏ'))]);
    }

    #[test]
    fn cyclic_edit_graph_rejected() {
        let g = graphs(&[(
            "loop",
            "state 0 initial\nstate 1 final\n0 -> 0 : <E>/ㅏ\n0 -> 1 : {aj/A01}\n",
        )]);
        assert!(matches!(
            enumerate_edit_programs(&g["loop"], &g, &tagset(), &cs_list()),
            Err(Error::CyclicEditGraph(_))
        ));
    }

    #[test]
    fn call_cycle_rejected() {
        let g = graphs(&[
            (
                "a",
                "state 0 initial\nstate 1 final\n0 -> 1 : CALL(b)\n",
            ),
            (
                "b",
                "state 0 initial\nstate 1 final\n0 -> 1 : CALL(a)\n0 -> 1 : {aj/A01}\n",
            ),
        ]);
        assert!(matches!(
            enumerate_edit_programs(&g["a"], &g, &tagset(), &cs_list()),
            Err(Error::CyclicEditGraph(_))
        ));
    }

    #[test]
    fn token_must_end_path() {
        let g = graphs(&[(
            "bad",
            "state 0 initial\nstate 1\nstate 2 final\n\
             0 -> 1 : {aj/A01}\n1 -> 2 : <R>\n",
        )]);
        let err = enumerate_edit_programs(&g["bad"], &g, &tagset(), &cs_list()).unwrap_err();
        assert!(err.to_string().contains("must end the path"));
    }

    #[test]
    fn path_without_token_rejected() {
        let g = graphs(&[(
            "bare",
            "state 0 initial\nstate 1 final\n0 -> 1 : <R>\n",
        )]);
        let err = enumerate_edit_programs(&g["bare"], &g, &tagset(), &cs_list()).unwrap_err();
        assert!(err.to_string().contains("without an output token"));
    }

    fn program(instrs: Vec<EditInstr>, tag: &str, cs: &str, chained: Vec<&str>) -> EditProgram {
        EditProgram {
            instructions: instrs,
            tag: Tag::parse(tag).unwrap(),
            cs: CompatibilitySymbol(cs.to_string()),
            chained: chained.into_iter().map(str::to_string).collect(),
        }
    }

    fn entry(line: &str) -> StemEntry {
        let (mut entries, errors) = parse_stem_lexicon(line, &tagset(), &cs_list());
        assert!(errors.is_empty(), "{errors:?}");
        entries.remove(0)
    }

    #[test]
    fn vowel_drop_allomorph_keeps_base() {
        // 크 minus ㅡ leaves the bare lead ㅋ; the base stays 크다.
        let e = StemEntry {
            surface: decompose("크"),
            base: decompose("크다"),
            tag: Tag::new("aj"),
            cs: CompatibilitySymbol("A01".into()),
            graphs: Vec::new(),
        };
        let p = program(vec![EditInstr::RemoveLast], "aj+al=vd", "A02", vec![]);
        let variant = apply_allomorph(&e, &p).unwrap();
        assert_eq!(variant.surface, vec![Letter('ㅋ')]);
        assert_eq!(variant.base, decompose("크다"));
        assert_eq!(variant.tag.render(), "aj+al=vd");
        assert_eq!(variant.cs.as_str(), "A02");
    }

    #[test]
    fn empty_program_is_identity_on_surface() {
        let e = entry("크다,크다.aj/E00\n");
        let p = program(vec![], "aj", "A01", vec![]);
        let variant = apply_allomorph(&e, &p).unwrap();
        assert_eq!(variant.surface, e.surface);
    }

    #[test]
    fn removal_past_start_inapplicable() {
        let e = StemEntry {
            surface: vec![Letter('ㅋ')],
            base: decompose("크다"),
            tag: Tag::new("aj"),
            cs: CompatibilitySymbol("A01".into()),
            graphs: Vec::new(),
        };
        let p = program(
            vec![EditInstr::RemoveLast, EditInstr::RemoveLast],
            "aj",
            "A01",
            vec![],
        );
        assert!(apply_allomorph(&e, &p).is_none());
    }

    #[test]
    fn derivation_extends_base_with_appended_letters() {
        let e = entry("공부,공부.vb/E00\n");
        let p = program(
            vec![EditInstr::Append(Letter('ㅎ')), EditInstr::Append(Letter('ㅏ'))],
            "vb",
            "A02",
            vec![],
        );
        let derived = apply_derivation(&e, &p).unwrap();
        assert_eq!(derived.surface, decompose("공부하"));
        assert_eq!(derived.base, decompose("공부하"));
    }

    #[test]
    fn variant_lexicon_counts_and_order() {
        // One stem, one two-branch allomorph graph: base + 2 variants.
        let g = graphs(&[(
            "pair",
            "state 0 initial\nstate 1 final\nstate 2\nstate 3\n\
             0 -> 2 : <R>\n2 -> 1 : {aj/A01}\n0 -> 3 : <E>/ㅎ\n3 -> 1 : {aj/A02}\n",
        )]);
        let roles = BTreeMap::from([("pair".to_string(), GraphRole::Allomorph)]);
        let stems = vec![entry("크다,크다.aj/E00 @pair\n")];
        let (out, warnings) = generate_variant_lexicon(
            &stems,
            &g,
            &roles,
            &tagset(),
            &cs_list(),
            VariantOptions::default(),
        )
        .unwrap();
        assert!(warnings.is_empty());
        assert_eq!(out.len(), 3);
        assert_eq!(out[0], stems[0]);
        assert_eq!(out[1].surface, decompose("큳"));
        assert_eq!(out[2].surface, decompose("크닿"));
    }

    #[test]
    fn no_graphs_identity() {
        let stems = vec![entry("크다,크다.aj/E00\n")];
        let (out, warnings) = generate_variant_lexicon(
            &stems,
            &BTreeMap::new(),
            &BTreeMap::new(),
            &tagset(),
            &cs_list(),
            VariantOptions::default(),
        )
        .unwrap();
        assert!(warnings.is_empty());
        assert_eq!(out, stems);
    }

    #[test]
    fn missing_graph_reference_fails() {
        let stems = vec![entry("크다,크다.aj/E00 @nowhere\n")];
        assert!(matches!(
            generate_variant_lexicon(
                &stems,
                &BTreeMap::new(),
                &BTreeMap::new(),
                &tagset(),
                &cs_list(),
                VariantOptions::default(),
            ),
            Err(Error::UnknownGraph { .. })
        ));
    }

    #[test]
    fn chained_allomorphy_on_derived_stem() {
        // Derive 공부하 from 공부, then contract 하 to 해.
        let g = graphs(&[
            (
                "to_haverb",
                "state 0 initial\nstate 1\nstate 2\nstate 3 final\n\
                 0 -> 1 : <E>/ㅎ\n1 -> 2 : <E>/ㅏ\n2 -> 3 : {vb/A01@contract_ha}\n",
            ),
            (
                "contract_ha",
                "state 0 initial\nstate 1\nstate 2\nstate 3 final\n\
                 0 -> 1 : <R>\n1 -> 2 : <E>/ㅐ\n2 -> 3 : {vb+al=vd/A02}\n",
            ),
        ]);
        let roles = BTreeMap::from([
            ("to_haverb".to_string(), GraphRole::Derivation),
            ("contract_ha".to_string(), GraphRole::Allomorph),
        ]);
        let stems = vec![entry("공부,공부.vb/E00 @to_haverb\n")];
        let (out, warnings) = generate_variant_lexicon(
            &stems,
            &g,
            &roles,
            &tagset(),
            &cs_list(),
            VariantOptions::default(),
        )
        .unwrap();
        assert!(warnings.is_empty(), "{warnings:?}");
        assert_eq!(out.len(), 3);
        assert_eq!(out[1].surface, decompose("공부하"));
        assert_eq!(out[1].base, decompose("공부하"));
        assert_eq!(out[2].surface, decompose("공부해"));
        assert_eq!(out[2].base, decompose("공부하"));
        assert_eq!(out[2].tag.render(), "vb+al=vd");

        let (without, _) = generate_variant_lexicon(
            &stems,
            &g,
            &roles,
            &tagset(),
            &cs_list(),
            VariantOptions { chain_allomorphy: false },
        )
        .unwrap();
        assert_eq!(without.len(), 2);
    }

    #[test]
    fn inapplicable_program_warns_and_continues() {
        let g = graphs(&[(
            "deep",
            "state 0 initial\nstate 1\nstate 2\nstate 3 final\n\
             0 -> 1 : <R>\n1 -> 2 : <R>\n2 -> 3 : {aj/A01}\n",
        )]);
        let roles = BTreeMap::from([("deep".to_string(), GraphRole::Allomorph)]);
        let one_letter = StemEntry {
            surface: vec![Letter('ㅋ')],
            base: vec![Letter('ㅋ')],
            tag: Tag::new("aj"),
            cs: CompatibilitySymbol("E00".into()),
            graphs: vec!["deep".into()],
        };
        let (out, warnings) = generate_variant_lexicon(
            std::slice::from_ref(&one_letter),
            &g,
            &roles,
            &tagset(),
            &cs_list(),
            VariantOptions::default(),
        )
        .unwrap();
        assert_eq!(out, vec![one_letter]);
        assert_eq!(warnings.len(), 1);
    }
}

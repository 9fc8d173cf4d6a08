//! Compound segmentation: loads a precomputed segmentation dictionary,
//! applies hyphen splitting and linking-element merging, and orients
//! components so the head is generated first.
//!
//! Segmentation is a single fixed analysis per word type, independent of
//! context. The dictionary marks linking elements explicitly with a `+`
//! prefix; the tool never infers them. Word-internal hyphens are additional
//! split points in any word, listed or not, and the hyphen itself is dropped
//! as a separator.

use std::io::{BufRead, Read, Write};
use std::path::Path;

use rustc_hash::FxHashMap;

use crate::corpus::{Vocabulary, WordId, BOS_ID, EOS_ID, UNK_ID};
use crate::error::{Error, Result};
use crate::io::{BinReader, BinWriter};

/// How a linking element is merged onto an adjacent component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkerScheme {
    /// Onto the preceding component in surface order (küche +n tisch → küchen·tisch).
    MergeLeft,
    /// Onto the following component (küche +n tisch → küche·ntisch).
    MergeRight,
    /// Dropped entirely (küche·tisch).
    Delete,
}

impl LinkerScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkerScheme::MergeLeft => "merge-left",
            LinkerScheme::MergeRight => "merge-right",
            LinkerScheme::Delete => "delete",
        }
    }
}

/// Component generation order: `Ling` generates the true (rightmost) head
/// first and the remaining components right-to-left, ending with the word
/// start; `Inv` generates left-to-right, ending at the right boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Ling,
    Inv,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Ling => "ling",
            Direction::Inv => "inv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub text: String,
    pub is_linker: bool,
}

/// A loaded segmentation dictionary plus the scheme/direction it is applied
/// with. Immutable after load.
#[derive(Debug, Clone)]
pub struct SegmentationDictionary {
    entries: FxHashMap<String, Vec<Segment>>,
    pub scheme: LinkerScheme,
    pub direction: Direction,
}

impl SegmentationDictionary {
    /// An empty dictionary: every word is a single component (modulo hyphens).
    pub fn empty(scheme: LinkerScheme, direction: Direction) -> Self {
        SegmentationDictionary {
            entries: FxHashMap::default(),
            scheme,
            direction,
        }
    }

    /// Loads the TSV format: `surface<TAB>seg1 seg2 ...` where linker
    /// segments carry a leading `+`. Lines starting with `#` are comments.
    /// The concatenation of all segments (linkers included, `+` stripped)
    /// must reproduce the surface exactly.
    pub fn load(path: &Path, scheme: LinkerScheme, direction: Direction) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(std::io::BufReader::new(file), path, scheme, direction)
    }

    pub fn read<R: BufRead>(
        reader: R,
        path: &Path,
        scheme: LinkerScheme,
        direction: Direction,
    ) -> Result<Self> {
        let mut entries = FxHashMap::default();
        for (lineno, line) in reader.lines().enumerate() {
            let lineno = lineno + 1;
            let line = line.map_err(|e| {
                if e.kind() == std::io::ErrorKind::InvalidData {
                    Error::format(path, lineno, "invalid UTF-8")
                } else {
                    Error::io(path, e)
                }
            })?;
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (surface, rest) = line
                .split_once('\t')
                .ok_or_else(|| Error::format(path, lineno, "expected `surface<TAB>segments`"))?;
            let mut segments = Vec::new();
            for raw in rest.split_whitespace() {
                let (text, is_linker) = match raw.strip_prefix('+') {
                    Some(t) => (t, true),
                    None => (raw, false),
                };
                if text.is_empty() {
                    return Err(Error::format(path, lineno, "empty segment"));
                }
                segments.push(Segment {
                    text: text.to_string(),
                    is_linker,
                });
            }
            if segments.is_empty() {
                return Err(Error::format(path, lineno, "no segments"));
            }
            let concat: String = segments.iter().map(|s| s.text.as_str()).collect();
            if concat != surface {
                return Err(Error::format(
                    path,
                    lineno,
                    format!("segments '{concat}' do not concatenate to surface '{surface}'"),
                ));
            }
            entries.insert(surface.to_string(), segments);
        }
        Ok(SegmentationDictionary {
            entries,
            scheme,
            direction,
        })
    }

    pub fn entry(&self, surface: &str) -> Option<&[Segment]> {
        self.entries.get(surface).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Splits a surface form into component strings: dictionary segments (or
    /// the whole word), hyphen splitting, then linker merging per the scheme.
    /// Total over arbitrary strings; the result is never empty and contains
    /// no empty strings.
    pub fn split(&self, surface: &str) -> Vec<String> {
        let mut segments: Vec<Segment> = match self.entries.get(surface) {
            Some(segs) => segs.clone(),
            None => vec![Segment {
                text: surface.to_string(),
                is_linker: false,
            }],
        };

        // Hyphens split non-linker segments further; the separator is dropped.
        let mut split_segs = Vec::with_capacity(segments.len());
        for seg in segments.drain(..) {
            if !seg.is_linker && seg.text.contains('-') {
                for part in seg.text.split('-').filter(|p| !p.is_empty()) {
                    split_segs.push(Segment {
                        text: part.to_string(),
                        is_linker: false,
                    });
                }
            } else {
                split_segs.push(seg);
            }
        }
        if split_segs.iter().all(|s| s.is_linker || s.text.is_empty()) || split_segs.is_empty() {
            // Nothing but linkers or hyphens: keep the word whole.
            return vec![surface.to_string()];
        }

        // Merge linking elements onto an adjacent component so that no
        // component is a bare linker. A linker with no component on the
        // preferred side attaches to the other side.
        let mut components: Vec<String> = Vec::new();
        let mut pending: String = String::new(); // linker text awaiting a right neighbor
        for seg in split_segs {
            if seg.is_linker {
                match self.scheme {
                    LinkerScheme::Delete => {}
                    LinkerScheme::MergeLeft => {
                        if let Some(last) = components.last_mut() {
                            last.push_str(&seg.text);
                        } else {
                            pending.push_str(&seg.text);
                        }
                    }
                    LinkerScheme::MergeRight => pending.push_str(&seg.text),
                }
            } else {
                let mut comp = std::mem::take(&mut pending);
                comp.push_str(&seg.text);
                components.push(comp);
            }
        }
        if !pending.is_empty() {
            // Trailing linker under merge-right: no right neighbor, attach left.
            match components.last_mut() {
                Some(last) => last.push_str(&pending),
                None => components.push(pending),
            }
        }
        components
    }

    /// Whether the surface analyzes into two or more components.
    pub fn is_compound(&self, surface: &str) -> bool {
        self.split(surface).len() >= 2
    }

    pub(crate) fn write_bin<W: Write>(&self, w: &mut BinWriter<W>) -> std::io::Result<()> {
        w.put_u8(match self.scheme {
            LinkerScheme::MergeLeft => 0,
            LinkerScheme::MergeRight => 1,
            LinkerScheme::Delete => 2,
        })?;
        w.put_u8(match self.direction {
            Direction::Ling => 0,
            Direction::Inv => 1,
        })?;
        let mut surfaces: Vec<&String> = self.entries.keys().collect();
        surfaces.sort();
        w.put_usize(surfaces.len())?;
        for surface in surfaces {
            w.put_str(surface)?;
            let segs = &self.entries[surface];
            w.put_usize(segs.len())?;
            for seg in segs {
                w.put_str(&seg.text)?;
                w.put_u8(seg.is_linker as u8)?;
            }
        }
        Ok(())
    }

    pub(crate) fn read_bin<R: Read>(r: &mut BinReader<R>) -> Result<Self> {
        let scheme = match r.get_u8()? {
            0 => LinkerScheme::MergeLeft,
            1 => LinkerScheme::MergeRight,
            _ => LinkerScheme::Delete,
        };
        let direction = match r.get_u8()? {
            0 => Direction::Ling,
            _ => Direction::Inv,
        };
        let n = r.get_usize()?;
        let mut entries = FxHashMap::default();
        for _ in 0..n {
            let surface = r.get_str()?;
            let k = r.get_usize()?;
            let mut segs = Vec::with_capacity(k);
            for _ in 0..k {
                let text = r.get_str()?;
                let is_linker = r.get_u8()? != 0;
                segs.push(Segment { text, is_linker });
            }
            entries.insert(surface, segs);
        }
        Ok(SegmentationDictionary {
            entries,
            scheme,
            direction,
        })
    }
}

/// The end-of-word marker used by the modifier model: always component id 3.
pub const END_MARK: &str = "</w>";

/// A word analyzed into component ids plus the generation-order permutation:
/// `lambda[0]` is the surface position of the head.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompoundWord {
    pub components: Vec<WordId>,
    pub lambda: Vec<u32>,
}

impl CompoundWord {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        false // always at least one component
    }

    pub fn is_compound(&self) -> bool {
        self.components.len() >= 2
    }

    pub fn head(&self) -> WordId {
        self.components[self.lambda[0] as usize]
    }

    /// Component ids in generation order (head first).
    pub fn generation_order(&self) -> impl Iterator<Item = WordId> + '_ {
        self.lambda.iter().map(|&i| self.components[i as usize])
    }
}

/// Fixed decompositions for every word in a vocabulary, plus the component
/// inventory they live in. The component vocabulary reserves `</w>` (id 3)
/// as the end-of-word marker; it is not part of the head/modifier support.
#[derive(Debug, Clone)]
pub struct DecompositionTable {
    pub components: Vocabulary,
    entries: Vec<CompoundWord>,
    end_id: WordId,
}

impl DecompositionTable {
    pub fn build(vocab: &Vocabulary, dict: &SegmentationDictionary) -> Self {
        let mut components = Vocabulary::from_symbols([END_MARK.to_string()]);
        let end_id = components.encode_or_unk(END_MARK);
        debug_assert_eq!(end_id, 3);
        let mut entries = Vec::with_capacity(vocab.len());
        for (id, surface) in vocab.symbols() {
            let comp_ids = match id {
                UNK_ID => vec![UNK_ID],
                BOS_ID => vec![BOS_ID],
                EOS_ID => vec![EOS_ID],
                _ => dict
                    .split(surface)
                    .into_iter()
                    .map(|c| components.intern(&c))
                    .collect(),
            };
            let len = comp_ids.len() as u32;
            let lambda: Vec<u32> = match dict.direction {
                Direction::Ling => (0..len).rev().collect(),
                Direction::Inv => (0..len).collect(),
            };
            entries.push(CompoundWord {
                components: comp_ids,
                lambda,
            });
        }
        DecompositionTable {
            components,
            entries,
            end_id: 3,
        }
    }

    pub fn decompose(&self, word: WordId) -> &CompoundWord {
        &self.entries[word as usize]
    }

    pub fn end_id(&self) -> WordId {
        self.end_id
    }

    pub fn is_compound(&self, word: WordId) -> bool {
        self.entries[word as usize].is_compound()
    }

    /// Size of the component inventory available as heads/modifiers: every
    /// component symbol except the begin marker and `</w>`.
    pub fn component_support(&self) -> u64 {
        self.components.len() as u64 - 2
    }

    pub(crate) fn write_bin<W: Write>(&self, w: &mut BinWriter<W>) -> std::io::Result<()> {
        self.components.write_bin(w)?;
        w.put_usize(self.entries.len())?;
        for e in &self.entries {
            w.put_usize(e.components.len())?;
            for &c in &e.components {
                w.put_u32(c)?;
            }
        }
        Ok(())
    }

    pub(crate) fn read_bin<R: Read>(r: &mut BinReader<R>, direction: Direction) -> Result<Self> {
        let components = Vocabulary::read_bin(r)?;
        let n = r.get_usize()?;
        let mut entries = Vec::with_capacity(n);
        for _ in 0..n {
            let k = r.get_usize()?;
            let mut comp_ids = Vec::with_capacity(k);
            for _ in 0..k {
                comp_ids.push(r.get_u32()?);
            }
            let lambda: Vec<u32> = match direction {
                Direction::Ling => (0..k as u32).rev().collect(),
                Direction::Inv => (0..k as u32).collect(),
            };
            entries.push(CompoundWord {
                components: comp_ids,
                lambda,
            });
        }
        Ok(DecompositionTable {
            components,
            entries,
            end_id: 3,
        })
    }
}

impl Vocabulary {
    /// Interns a component surface, allocating a fresh id on first sight.
    /// Reserved surfaces fold into the unknown component.
    pub(crate) fn intern(&mut self, surface: &str) -> WordId {
        if surface == crate::corpus::UNK
            || surface == crate::corpus::BOS
            || surface == crate::corpus::EOS
        {
            return UNK_ID;
        }
        if let Some(&id) = self.index_get(surface) {
            return id;
        }
        self.push_symbol(surface)
    }

    pub(crate) fn encode_or_unk(&self, surface: &str) -> WordId {
        self.index_get(surface).copied().unwrap_or(UNK_ID)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dict_from(
        lines: &str,
        scheme: LinkerScheme,
        direction: Direction,
    ) -> SegmentationDictionary {
        SegmentationDictionary::read(
            std::io::Cursor::new(lines),
            Path::new("test.tsv"),
            scheme,
            direction,
        )
        .unwrap()
    }

    const KUECHE: &str = "küchentisch\tküche +n tisch\n";

    #[test]
    fn merge_left_attaches_linker_to_preceding() {
        let dict = dict_from(KUECHE, LinkerScheme::MergeLeft, Direction::Ling);
        assert_eq!(dict.split("küchentisch"), vec!["küchen", "tisch"]);
    }

    #[test]
    fn merge_right_attaches_linker_to_following() {
        let dict = dict_from(KUECHE, LinkerScheme::MergeRight, Direction::Inv);
        assert_eq!(dict.split("küchentisch"), vec!["küche", "ntisch"]);
    }

    #[test]
    fn delete_drops_linker() {
        let dict = dict_from(KUECHE, LinkerScheme::Delete, Direction::Ling);
        assert_eq!(dict.split("küchentisch"), vec!["küche", "tisch"]);
    }

    #[test]
    fn unlisted_hyphenated_word_splits_on_hyphen() {
        let dict = SegmentationDictionary::empty(LinkerScheme::MergeLeft, Direction::Ling);
        assert_eq!(dict.split("awe-inspiring"), vec!["awe", "inspiring"]);
        assert_eq!(dict.split("ki--moon"), vec!["ki", "moon"]);
        assert_eq!(dict.split("-"), vec!["-"]);
        assert_eq!(dict.split("plain"), vec!["plain"]);
    }

    #[test]
    fn concat_mismatch_is_a_load_error_with_line_number() {
        let err = SegmentationDictionary::read(
            std::io::Cursor::new("# comment\nfoo\tf oo\nbad\tb a\n"),
            Path::new("d.tsv"),
            LinkerScheme::Delete,
            Direction::Ling,
        )
        .unwrap_err();
        match err {
            Error::Format { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn malformed_line_is_a_load_error() {
        let err = SegmentationDictionary::read(
            std::io::Cursor::new("no-tab-here\n"),
            Path::new("d.tsv"),
            LinkerScheme::Delete,
            Direction::Ling,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Format { line: 1, .. }));
    }

    #[test]
    fn scheme_changes_component_material_but_not_count() {
        for scheme in [
            LinkerScheme::MergeLeft,
            LinkerScheme::MergeRight,
            LinkerScheme::Delete,
        ] {
            let dict = dict_from(KUECHE, scheme, Direction::Ling);
            let comps = dict.split("küchentisch");
            assert_eq!(comps.len(), 2, "{scheme:?}");
            // Non-linker material is always preserved.
            let joined = comps.concat();
            assert!(joined.contains("küche") && joined.contains("tisch"));
        }
    }

    fn table_for(
        words: &[&str],
        dict_lines: &str,
        scheme: LinkerScheme,
        direction: Direction,
    ) -> (Vocabulary, DecompositionTable) {
        let sentences: Vec<Vec<String>> = vec![words.iter().map(|s| s.to_string()).collect()];
        let vocab = Vocabulary::build(sentences, 1);
        let dict = dict_from(dict_lines, scheme, direction);
        let table = DecompositionTable::build(&vocab, &dict);
        (vocab, table)
    }

    #[test]
    fn ling_direction_generates_head_last_component_first() {
        let (vocab, table) = table_for(
            &["eisenbahn"],
            "eisenbahn\teisen bahn\n",
            LinkerScheme::MergeLeft,
            Direction::Ling,
        );
        let cw = table.decompose(vocab.encode("eisenbahn"));
        assert_eq!(cw.lambda, vec![1, 0]);
        let order: Vec<&str> = cw
            .generation_order()
            .map(|c| table.components.decode(c))
            .collect();
        assert_eq!(order, vec!["bahn", "eisen"]);
    }

    #[test]
    fn three_part_compound_orientation() {
        let lines = "regenschirmhersteller\tregen schirm hersteller\n";
        let (vocab, table) = table_for(
            &["regenschirmhersteller"],
            lines,
            LinkerScheme::MergeLeft,
            Direction::Ling,
        );
        let cw = table.decompose(vocab.encode("regenschirmhersteller"));
        assert_eq!(cw.lambda, vec![2, 1, 0]);
        assert_eq!(table.components.decode(cw.head()), "hersteller");

        let (vocab, table) = table_for(
            &["regenschirmhersteller"],
            lines,
            LinkerScheme::MergeRight,
            Direction::Inv,
        );
        let cw = table.decompose(vocab.encode("regenschirmhersteller"));
        assert_eq!(cw.lambda, vec![0, 1, 2]);
        assert_eq!(table.components.decode(cw.head()), "regen");
    }

    #[test]
    fn component_vocabulary_is_a_union_over_word_types() {
        let (vocab, table) = table_for(
            &["eisenbahn", "bahn", "zug"],
            "eisenbahn\teisen bahn\n",
            LinkerScheme::MergeLeft,
            Direction::Ling,
        );
        // specials + </w> + {eisen, bahn, zug}
        assert_eq!(table.components.len(), 4 + 3);
        assert_eq!(table.component_support(), 5); // unk, eos, eisen, bahn, zug
        for comp in ["eisen", "bahn", "zug"] {
            assert!(table.components.contains(comp), "{comp}");
        }
        let _ = vocab;
    }

    #[test]
    fn empty_dictionary_mirrors_word_vocabulary() {
        let (vocab, table) = table_for(
            &["der", "alte", "schulhof"],
            "",
            LinkerScheme::MergeLeft,
            Direction::Ling,
        );
        // One component per regular word type, all single-component.
        assert_eq!(table.component_support(), vocab.support_size());
        for (id, _) in vocab.symbols() {
            assert!(!table.is_compound(id));
        }
    }

    #[test]
    fn merge_left_and_merge_right_yield_different_inventories() {
        let words = ["küchentisch", "küchenstuhl", "küche", "tisch", "stuhl"];
        let lines = "küchentisch\tküche +n tisch\nküchenstuhl\tküche +n stuhl\n";
        let (_, left) = table_for(&words, lines, LinkerScheme::MergeLeft, Direction::Ling);
        let (_, right) = table_for(&words, lines, LinkerScheme::MergeRight, Direction::Inv);
        assert_ne!(left.component_support(), right.component_support());
    }

    #[test]
    fn unk_is_a_single_component_word() {
        let (_, table) = table_for(&["x"], "", LinkerScheme::MergeLeft, Direction::Ling);
        let cw = table.decompose(UNK_ID);
        assert_eq!(cw.components, vec![UNK_ID]);
        assert!(!cw.is_compound());
    }

    #[test]
    fn direction_affects_only_orientation_not_segment_count() {
        let lines = "küchentisch\tküche +n tisch\n";
        let (va, a) = table_for(
            &["küchentisch"],
            lines,
            LinkerScheme::Delete,
            Direction::Ling,
        );
        let (vb, b) = table_for(
            &["küchentisch"],
            lines,
            LinkerScheme::Delete,
            Direction::Inv,
        );
        let ca = a.decompose(va.encode("küchentisch"));
        let cb = b.decompose(vb.encode("küchentisch"));
        assert_eq!(ca.len(), cb.len());
        assert_ne!(ca.lambda, cb.lambda);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn entry_strategy() -> impl Strategy<Value = (Vec<(String, bool)>, String)> {
            proptest::collection::vec(("[a-zäöü]{2,6}", proptest::bool::ANY), 2..5)
                .prop_filter("at least one non-linker", |segs| {
                    segs.iter().any(|(_, linker)| !linker)
                })
                .prop_map(|segs| {
                    let surface: String = segs.iter().map(|(t, _)| t.as_str()).collect();
                    (segs, surface)
                })
        }

        proptest! {
            /// Merging preserves all non-linker character material under
            /// every scheme; deletion drops exactly the linker text; the
            /// number of components never depends on the scheme.
            #[test]
            fn schemes_preserve_material((segs, surface) in entry_strategy()) {
                let line = format!(
                    "{surface}\t{}\n",
                    segs.iter()
                        .map(|(t, l)| if *l { format!("+{t}") } else { t.clone() })
                        .collect::<Vec<_>>()
                        .join(" ")
                );
                let non_linker: String = segs
                    .iter()
                    .filter(|(_, l)| !l)
                    .map(|(t, _)| t.as_str())
                    .collect();
                let mut counts = Vec::new();
                for scheme in [
                    LinkerScheme::MergeLeft,
                    LinkerScheme::MergeRight,
                    LinkerScheme::Delete,
                ] {
                    let dict = SegmentationDictionary::read(
                        std::io::Cursor::new(line.as_str()),
                        Path::new("prop.tsv"),
                        scheme,
                        Direction::Ling,
                    )
                    .unwrap();
                    let comps = dict.split(&surface);
                    prop_assert!(!comps.is_empty());
                    prop_assert!(comps.iter().all(|c| !c.is_empty()));
                    let joined = comps.concat();
                    match scheme {
                        LinkerScheme::Delete => prop_assert_eq!(&joined, &non_linker),
                        _ => prop_assert_eq!(&joined, &surface),
                    }
                    counts.push(comps.len());
                }
                prop_assert!(counts.windows(2).all(|w| w[0] == w[1]));
            }

            /// Λ is always a permutation with the head first: the last
            /// surface component under ling, the first under inv.
            #[test]
            fn lambda_is_a_head_first_permutation(
                (segs, surface) in entry_strategy(),
                inv in proptest::bool::ANY,
            ) {
                let line = format!(
                    "{surface}\t{}\n",
                    segs.iter()
                        .map(|(t, l)| if *l { format!("+{t}") } else { t.clone() })
                        .collect::<Vec<_>>()
                        .join(" ")
                );
                let direction = if inv { Direction::Inv } else { Direction::Ling };
                let dict = SegmentationDictionary::read(
                    std::io::Cursor::new(line.as_str()),
                    Path::new("prop.tsv"),
                    LinkerScheme::Delete,
                    direction,
                )
                .unwrap();
                let sentences = vec![vec![surface.clone()]];
                let vocab = Vocabulary::build(sentences, 1);
                let table = DecompositionTable::build(&vocab, &dict);
                let cw = table.decompose(vocab.encode(&surface));
                let l = cw.components.len() as u32;
                let mut sorted = cw.lambda.clone();
                sorted.sort_unstable();
                prop_assert_eq!(sorted, (0..l).collect::<Vec<u32>>());
                match direction {
                    Direction::Ling => prop_assert_eq!(cw.lambda[0], l - 1),
                    Direction::Inv => prop_assert_eq!(cw.lambda[0], 0),
                }
            }
        }
    }

    #[test]
    fn dictionary_bin_round_trip() {
        let dict = dict_from(KUECHE, LinkerScheme::MergeLeft, Direction::Ling);
        let mut w = BinWriter::new(Vec::new());
        dict.write_bin(&mut w).unwrap();
        let buf = w.finish().unwrap();
        let mut r = BinReader::new(&buf[..], Path::new("mem"));
        let back = SegmentationDictionary::read_bin(&mut r).unwrap();
        assert_eq!(back.split("küchentisch"), dict.split("küchentisch"));
        assert_eq!(back.scheme, dict.scheme);
    }
}

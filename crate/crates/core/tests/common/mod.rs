//! Deterministic generator for German-like test corpora with productive
//! compounding, plus the matching segmentation dictionary.
//!
//! Sentences are built from templates whose noun slots carry a semantic
//! frame. Each frame prefers certain heads, each head prefers certain
//! modifiers, and each modifier carries a fixed linking element, so the
//! generated statistics have exactly the structure the compound models
//! target: heads correlate with sentence context, modifiers with the head.

#![allow(dead_code)]

use rand::seq::IndexedRandom;
use rand::Rng as _;
use rustc_hash::FxHashMap;

use pylm::{seeded_rng, Rng};

const DETERMINERS: &[&str] = &["der", "die", "das", "dem", "den", "ein", "eine", "einem"];

const PREPOSITIONS: &[&str] = &[
    "auf", "in", "an", "bei", "mit", "von", "nach", "über", "unter", "vor", "hinter", "neben",
];

const ADJECTIVES: &[&str] = &[
    "alte", "neue", "grosse", "kleine", "schöne", "stille", "dunkle", "helle", "rote", "grüne",
    "kalte", "warme", "lange", "kurze", "junge", "weite", "hohe", "tiefe", "graue", "frische",
];

const VERBS: &[&str] = &[
    "steht", "liegt", "bleibt", "wächst", "fällt", "glänzt", "ruht", "wartet", "brennt", "klingt",
    "fährt", "hält", "sinkt", "steigt", "trägt", "zieht", "wirkt", "bricht",
];

const ADVERBS: &[&str] = &[
    "dort", "hier", "heute", "morgen", "immer", "selten", "leise", "langsam", "schnell", "kaum",
];

const HEADS: &[&str] = &[
    "hof", "haus", "tisch", "platz", "markt", "bahn", "wagen", "schirm", "schule", "kraft", "werk",
    "zeug", "weg", "brücke", "mühle", "turm", "burg", "dorf", "feld", "wald", "berg", "see",
    "garten", "halle", "kammer", "laden", "saal", "tor", "hütte", "stube", "bank", "pfad",
    "quelle", "wiese", "teich", "graben", "damm", "steg", "speicher", "meister",
];

/// Modifier stems with their fixed linking elements (possibly empty).
const MODIFIERS: &[(&str, &str)] = &[
    ("schul", ""),
    ("fried", ""),
    ("regen", ""),
    ("eisen", ""),
    ("küche", "n"),
    ("sonne", "n"),
    ("winter", ""),
    ("sommer", ""),
    ("wasser", ""),
    ("feuer", ""),
    ("holz", ""),
    ("stein", ""),
    ("sand", ""),
    ("schnee", ""),
    ("blume", "n"),
    ("obst", ""),
    ("stadt", ""),
    ("land", ""),
    ("kirche", "n"),
    ("fisch", ""),
    ("vogel", ""),
    ("pferde", ""),
    ("hunde", ""),
    ("katze", "n"),
    ("königs", ""),
    ("regierung", "s"),
    ("arbeit", "s"),
    ("hochzeit", "s"),
    ("geburt", "s"),
    ("liebe", "s"),
    ("kinder", ""),
    ("männer", ""),
    ("frauen", ""),
    ("glocke", "n"),
    ("mühle", "n"),
    ("garten", ""),
    ("ernte", ""),
    ("herbst", ""),
    ("nacht", ""),
    ("morgen", ""),
];

/// Number of semantic frames steering head choice.
const FRAMES: usize = 8;

pub struct GeneratedCorpus {
    /// One sentence per line, whitespace-tokenized.
    pub lines: Vec<String>,
    /// Segmentation TSV lines for every compound type that occurred.
    pub dictionary_lines: Vec<String>,
    pub token_count: usize,
}

impl GeneratedCorpus {
    pub fn text(&self) -> String {
        let mut s = self.lines.join("\n");
        s.push('\n');
        s
    }

    pub fn dictionary_text(&self) -> String {
        let mut lines = self.dictionary_lines.clone();
        lines.sort();
        let mut s = lines.join("\n");
        s.push('\n');
        s
    }

    pub fn sentences(&self) -> Vec<Vec<String>> {
        self.lines
            .iter()
            .map(|l| l.split_whitespace().map(str::to_string).collect())
            .collect()
    }
}

/// Zipf-style pick from a slice: rank r drawn with weight 1/(r+1)^1.2.
fn zipf_pick<'a, T>(items: &'a [T], rng: &mut Rng) -> &'a T {
    let total: f64 = (0..items.len())
        .map(|r| 1.0 / (r as f64 + 1.0).powf(1.2))
        .sum();
    let mut u = rng.random::<f64>() * total;
    for (r, item) in items.iter().enumerate() {
        u -= 1.0 / (r as f64 + 1.0).powf(1.2);
        if u < 0.0 {
            return item;
        }
    }
    items.last().unwrap()
}

/// Deterministic per-key preference list: a seeded shuffle of the pool,
/// truncated to `keep`. The key seeds the shuffle so every frame/head gets
/// its own stable ranking.
fn preference_list<T: Copy>(pool: &[T], key: u64, keep: usize) -> Vec<T> {
    let mut rng = seeded_rng(0xC0FFEE ^ key.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut items: Vec<T> = pool.to_vec();
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
    items.truncate(keep);
    items
}

struct Generator {
    rng: Rng,
    /// frame -> ranked heads
    frame_heads: Vec<Vec<usize>>,
    /// head -> ranked modifiers
    head_modifiers: Vec<Vec<usize>>,
    compound_rate: f64,
    dictionary: FxHashMap<String, String>,
}

impl Generator {
    fn new(seed: u64, compound_rate: f64) -> Self {
        let head_indices: Vec<usize> = (0..HEADS.len()).collect();
        let modifier_indices: Vec<usize> = (0..MODIFIERS.len()).collect();
        Generator {
            rng: seeded_rng(seed),
            frame_heads: (0..FRAMES)
                .map(|f| preference_list(&head_indices, f as u64 + 1, 12))
                .collect(),
            head_modifiers: (0..HEADS.len())
                .map(|h| preference_list(&modifier_indices, 1000 + h as u64, 10))
                .collect(),
            compound_rate,
            dictionary: FxHashMap::default(),
        }
    }

    /// Produces a noun for the frame: either the bare head or a compound
    /// whose modifier is drawn conditioned on the head.
    fn noun(&mut self, frame: usize) -> String {
        let head_idx = *zipf_pick(&self.frame_heads[frame], &mut self.rng);
        let head = HEADS[head_idx];
        if self.rng.random::<f64>() >= self.compound_rate {
            return head.to_string();
        }
        let &mod_idx = zipf_pick(&self.head_modifiers[head_idx], &mut self.rng);
        let (stem, linker) = MODIFIERS[mod_idx];
        // A second modifier occasionally nests the compound one level deeper.
        let (prefix, prefix_entry) = if self.rng.random::<f64>() < 0.06 {
            let &second = zipf_pick(&self.head_modifiers[head_idx], &mut self.rng);
            let (stem2, linker2) = MODIFIERS[second];
            if second != mod_idx {
                (
                    format!("{stem2}{linker2}"),
                    Some((stem2.to_string(), linker2.to_string())),
                )
            } else {
                (String::new(), None)
            }
        } else {
            (String::new(), None)
        };
        let surface = format!("{prefix}{stem}{linker}{head}");
        if !self.dictionary.contains_key(&surface) {
            let mut segs = Vec::new();
            if let Some((stem2, linker2)) = &prefix_entry {
                segs.push(stem2.clone());
                if !linker2.is_empty() {
                    segs.push(format!("+{linker2}"));
                }
            }
            segs.push(stem.to_string());
            if !linker.is_empty() {
                segs.push(format!("+{linker}"));
            }
            segs.push(head.to_string());
            self.dictionary
                .insert(surface.clone(), format!("{surface}\t{}", segs.join(" ")));
        }
        surface
    }

    fn sentence(&mut self) -> String {
        let frame = self.rng.random_range(0..FRAMES);
        let template = self.rng.random_range(0..5u32);
        let det = *DETERMINERS.choose(&mut self.rng).unwrap();
        let adj = *zipf_pick(ADJECTIVES, &mut self.rng);
        let verb = *zipf_pick(VERBS, &mut self.rng);
        let noun = self.noun(frame);
        match template {
            0 => format!("{det} {adj} {noun} {verb}"),
            1 => {
                let prep = PREPOSITIONS[frame % PREPOSITIONS.len()];
                let adv = *zipf_pick(ADVERBS, &mut self.rng);
                format!("{prep} {det} {noun} {verb} {adv}")
            }
            2 => {
                let frame2 = self.rng.random_range(0..FRAMES);
                let noun2 = self.noun(frame2);
                let prep = PREPOSITIONS[frame2 % PREPOSITIONS.len()];
                format!("{det} {noun} {verb} {prep} {det} {noun2}")
            }
            3 => {
                let adv = *zipf_pick(ADVERBS, &mut self.rng);
                format!("{det} {adj} {noun} {verb} {adv}")
            }
            _ => {
                let prep = PREPOSITIONS[frame % PREPOSITIONS.len()];
                format!("{prep} {det} {adj} {noun} {verb}")
            }
        }
    }
}

/// Generates at least `target_tokens` tokens of German-like text with the
/// given compound rate, together with the segmentation dictionary of every
/// compound type produced.
pub fn german_corpus(target_tokens: usize, seed: u64, compound_rate: f64) -> GeneratedCorpus {
    let mut generator = Generator::new(seed, compound_rate);
    let mut lines = Vec::new();
    let mut token_count = 0;
    while token_count < target_tokens {
        let line = generator.sentence();
        token_count += line.split_whitespace().count();
        lines.push(line);
    }
    let dictionary_lines = generator.dictionary.values().cloned().collect();
    GeneratedCorpus {
        lines,
        dictionary_lines,
        token_count,
    }
}

/// Writes the corpus and dictionary into a directory, returning the paths.
pub fn write_corpus(
    dir: &std::path::Path,
    name: &str,
    corpus: &GeneratedCorpus,
) -> (std::path::PathBuf, std::path::PathBuf) {
    let corpus_path = dir.join(format!("{name}.txt"));
    let dict_path = dir.join(format!("{name}.seg.tsv"));
    std::fs::write(&corpus_path, corpus.text()).unwrap();
    std::fs::write(&dict_path, corpus.dictionary_text()).unwrap();
    (corpus_path, dict_path)
}

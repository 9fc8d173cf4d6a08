//! Corpus ingestion: vocabulary construction with frequency pruning, token
//! encoding with an unknown-word symbol, and boundary-padded n-gram events.
//!
//! Input text is taken as-is: one sentence per line, whitespace-tokenized,
//! UTF-8. Normalization (tokenization, casing) happens upstream. Blank lines
//! are skipped.

use std::io::{BufRead, Read, Write};
use std::path::Path;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::io::{BinReader, BinWriter};

pub type WordId = u32;

pub const UNK: &str = "<unk>";
pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";

/// Bidirectional word/id map with unknown, begin, and end symbols.
///
/// The three specials are always present, even for an empty corpus, and no
/// regular symbol may share their surface strings: input tokens spelled like
/// a special are treated as out-of-vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    symbols: Vec<String>,
    index: FxHashMap<String, WordId>,
    counts: Vec<u64>,
    min_count: u64,
}

pub const UNK_ID: WordId = 0;
pub const BOS_ID: WordId = 1;
pub const EOS_ID: WordId = 2;

impl Vocabulary {
    fn with_specials() -> Self {
        let symbols = vec![UNK.to_string(), BOS.to_string(), EOS.to_string()];
        let mut index = FxHashMap::default();
        for (i, s) in symbols.iter().enumerate() {
            index.insert(s.clone(), i as WordId);
        }
        Vocabulary {
            symbols,
            index,
            counts: vec![0, 0, 0],
            min_count: 1,
        }
    }

    /// Builds a vocabulary over every type whose corpus frequency reaches
    /// `min_count`; all other tokens encode to [`UNK_ID`]. Ids follow first
    /// occurrence order, so construction is deterministic.
    pub fn build<S, T>(sentences: S, min_count: u64) -> Self
    where
        S: IntoIterator<Item = T>,
        T: AsRef<[String]>,
    {
        let min_count = min_count.max(1);
        let mut freq: FxHashMap<&str, u64> = FxHashMap::default();
        let mut order: Vec<&str> = Vec::new();
        let mut unk_mass = 0u64;
        let mut sentence_count = 0u64;
        let sentences: Vec<T> = sentences.into_iter().collect();
        for sent in &sentences {
            sentence_count += 1;
            for tok in sent.as_ref() {
                let tok = tok.as_str();
                if tok == UNK || tok == BOS || tok == EOS {
                    unk_mass += 1;
                    continue;
                }
                let e = freq.entry(tok).or_insert(0);
                if *e == 0 {
                    order.push(tok);
                }
                *e += 1;
            }
        }

        let mut vocab = Self::with_specials();
        vocab.min_count = min_count;
        for tok in order {
            let c = freq[tok];
            if c >= min_count {
                let id = vocab.symbols.len() as WordId;
                vocab.symbols.push(tok.to_string());
                vocab.index.insert(tok.to_string(), id);
                vocab.counts.push(c);
            } else {
                unk_mass += c;
            }
        }
        vocab.counts[UNK_ID as usize] = unk_mass;
        vocab.counts[EOS_ID as usize] = sentence_count;
        vocab
    }

    /// A vocabulary with the given regular symbols, in order. Used for
    /// component inventories; counts are zero.
    pub fn from_symbols<I: IntoIterator<Item = String>>(symbols: I) -> Self {
        let mut vocab = Self::with_specials();
        for s in symbols {
            debug_assert!(!vocab.index.contains_key(&s), "duplicate symbol {s}");
            let id = vocab.symbols.len() as WordId;
            vocab.index.insert(s.clone(), id);
            vocab.symbols.push(s);
            vocab.counts.push(0);
        }
        vocab
    }

    pub fn encode(&self, token: &str) -> WordId {
        match self.index.get(token) {
            Some(&id) if id != BOS_ID && id != EOS_ID && id != UNK_ID => id,
            _ => UNK_ID,
        }
    }

    pub fn decode(&self, id: WordId) -> &str {
        &self.symbols[id as usize]
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the specials are always present
    }

    /// Number of types a model must assign probability to: everything except
    /// the begin symbol, which is never a prediction target.
    pub fn support_size(&self) -> u64 {
        self.symbols.len() as u64 - 1
    }

    /// Ids of all predictable types (everything except BOS).
    pub fn support_ids(&self) -> impl Iterator<Item = WordId> + '_ {
        (0..self.symbols.len() as WordId).filter(|&id| id != BOS_ID)
    }

    pub fn count(&self, id: WordId) -> u64 {
        self.counts[id as usize]
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn symbols(&self) -> impl Iterator<Item = (WordId, &str)> {
        self.symbols
            .iter()
            .enumerate()
            .map(|(i, s)| (i as WordId, s.as_str()))
    }

    /// One `token<TAB>id<TAB>count` line per type, sorted by id.
    pub fn dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (id, sym) in self.symbols.iter().enumerate() {
            writeln!(out, "{sym}\t{id}\t{}", self.counts[id])?;
        }
        Ok(())
    }

    pub(crate) fn index_get(&self, s: &str) -> Option<&WordId> {
        self.index.get(s)
    }

    pub(crate) fn push_symbol(&mut self, s: &str) -> WordId {
        let id = self.symbols.len() as WordId;
        self.symbols.push(s.to_string());
        self.index.insert(s.to_string(), id);
        self.counts.push(0);
        id
    }

    pub(crate) fn write_bin<W: Write>(&self, w: &mut BinWriter<W>) -> std::io::Result<()> {
        w.put_u64(self.min_count)?;
        w.put_usize(self.symbols.len())?;
        for (sym, count) in self.symbols.iter().zip(&self.counts) {
            w.put_str(sym)?;
            w.put_u64(*count)?;
        }
        Ok(())
    }

    pub(crate) fn read_bin<R: Read>(r: &mut BinReader<R>) -> Result<Self> {
        let min_count = r.get_u64()?;
        let len = r.get_usize()?;
        let mut symbols = Vec::with_capacity(len);
        let mut counts = Vec::with_capacity(len);
        let mut index = FxHashMap::default();
        for i in 0..len {
            let sym = r.get_str()?;
            counts.push(r.get_u64()?);
            index.insert(sym.clone(), i as WordId);
            symbols.push(sym);
        }
        Ok(Vocabulary {
            symbols,
            index,
            counts,
            min_count,
        })
    }
}

/// A corpus encoded against a vocabulary. Sentences hold regular token ids
/// only; boundary symbols are added by the n-gram event stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub sentences: Vec<Vec<WordId>>,
    token_count: usize,
    type_count: usize,
}

impl Corpus {
    pub fn encode<S, T>(vocab: &Vocabulary, sentences: S) -> Self
    where
        S: IntoIterator<Item = T>,
        T: AsRef<[String]>,
    {
        let mut encoded = Vec::new();
        let mut token_count = 0;
        let mut seen = vec![false; vocab.len()];
        for sent in sentences {
            let ids: Vec<WordId> = sent.as_ref().iter().map(|t| vocab.encode(t)).collect();
            token_count += ids.len();
            for &id in &ids {
                seen[id as usize] = true;
            }
            encoded.push(ids);
        }
        let type_count = seen.iter().filter(|&&s| s).count();
        Corpus {
            sentences: encoded,
            token_count,
            type_count,
        }
    }

    /// Tokens excluding boundary padding; end symbols are counted separately
    /// by the event stream.
    pub fn token_count(&self) -> usize {
        self.token_count
    }

    pub fn type_count(&self) -> usize {
        self.type_count
    }

    pub fn sentence_count(&self) -> usize {
        self.sentences.len()
    }

    /// Total prediction events: one per token plus one end symbol per sentence.
    pub fn event_count(&self) -> usize {
        self.token_count + self.sentences.len()
    }
}

/// Reads a text corpus: one sentence per line, whitespace-tokenized.
/// Blank lines are skipped; invalid UTF-8 is a format error.
pub fn read_sentences(path: &Path) -> Result<Vec<Vec<String>>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = std::io::BufReader::new(file);
    let mut sentences = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| {
            if e.kind() == std::io::ErrorKind::InvalidData {
                Error::format(path, lineno + 1, "invalid UTF-8")
            } else {
                Error::io(path, e)
            }
        })?;
        let toks: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        if !toks.is_empty() {
            sentences.push(toks);
        }
    }
    Ok(sentences)
}

/// All n-gram prediction events of a corpus, packed as `order` ids per event:
/// `order - 1` context words (left-padded with BOS) followed by the target.
/// Each sentence of length L yields L + 1 events; the last target is EOS.
#[derive(Debug, Clone)]
pub struct NgramEvents {
    order: usize,
    flat: Vec<WordId>,
}

impl NgramEvents {
    pub fn from_corpus(corpus: &Corpus, order: usize) -> Self {
        assert!(order >= 1, "n-gram order must be at least 1");
        let mut flat = Vec::with_capacity(corpus.event_count() * order);
        let ctx_len = order - 1;
        let mut window: Vec<WordId> = Vec::with_capacity(ctx_len);
        for sent in &corpus.sentences {
            window.clear();
            window.resize(ctx_len, BOS_ID);
            for i in 0..=sent.len() {
                let target = if i < sent.len() { sent[i] } else { EOS_ID };
                flat.extend_from_slice(&window);
                flat.push(target);
                if ctx_len > 0 && i < sent.len() {
                    window.rotate_left(1);
                    window[ctx_len - 1] = sent[i];
                }
            }
        }
        NgramEvents { order, flat }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.flat.len() / self.order
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    /// Context and target of event `i`.
    pub fn get(&self, i: usize) -> (&[WordId], WordId) {
        let start = i * self.order;
        let ngram = &self.flat[start..start + self.order];
        (&ngram[..self.order - 1], ngram[self.order - 1])
    }

    /// Full n-gram (context followed by target) of event `i`.
    pub fn ngram(&self, i: usize) -> &[WordId] {
        &self.flat[i * self.order..(i + 1) * self.order]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[WordId], WordId)> {
        (0..self.len()).map(move |i| self.get(i))
    }
}

/// Occurrence sets of all surface k-grams (k = 1..=order) of a training
/// corpus, over the same padded, unknown-mapped event stream the models
/// score. Answers hit-length queries: the largest k such that the k-gram
/// formed by the last k-1 context words plus the target occurred.
#[derive(Debug, Clone)]
pub struct NgramIndex {
    order: usize,
    sets: Vec<rustc_hash::FxHashSet<Box<[WordId]>>>,
}

impl NgramIndex {
    pub fn build(events: &NgramEvents) -> Self {
        let order = events.order();
        let mut sets = vec![rustc_hash::FxHashSet::default(); order];
        for i in 0..events.len() {
            let ngram = events.ngram(i);
            for k in 1..=order {
                let suffix = &ngram[order - k..];
                if !sets[k - 1].contains(suffix) {
                    sets[k - 1].insert(suffix.to_vec().into_boxed_slice());
                }
            }
        }
        NgramIndex { order, sets }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn contains(&self, kgram: &[WordId]) -> bool {
        !kgram.is_empty() && kgram.len() <= self.order && self.sets[kgram.len() - 1].contains(kgram)
    }

    /// h = largest k whose surface k-gram occurred in training; at least 1.
    pub fn hit_length(&self, ctx: &[WordId], target: WordId) -> usize {
        let mut kgram = Vec::with_capacity(self.order);
        kgram.push(target);
        let mut h = 1;
        for k in 2..=self.order.min(ctx.len() + 1) {
            kgram.insert(0, ctx[ctx.len() - (k - 1)]);
            // an observed k-gram implies its (k-1)-suffix was observed, so
            // the first miss ends the search
            if self.sets[k - 1].contains(kgram.as_slice()) {
                h = k;
            } else {
                break;
            }
        }
        h
    }

    pub(crate) fn write_bin<W: Write>(&self, w: &mut BinWriter<W>) -> std::io::Result<()> {
        w.put_usize(self.order)?;
        for set in &self.sets {
            let mut grams: Vec<&Box<[WordId]>> = set.iter().collect();
            grams.sort();
            w.put_usize(grams.len())?;
            for gram in grams {
                for &id in gram.iter() {
                    w.put_u32(id)?;
                }
            }
        }
        Ok(())
    }

    pub(crate) fn read_bin<R: Read>(r: &mut BinReader<R>) -> Result<Self> {
        let order = r.get_usize()?;
        let mut sets = Vec::with_capacity(order);
        for k in 1..=order {
            let n = r.get_usize()?;
            let mut set = rustc_hash::FxHashSet::default();
            set.reserve(n);
            for _ in 0..n {
                let mut gram = Vec::with_capacity(k);
                for _ in 0..k {
                    gram.push(r.get_u32()?);
                }
                set.insert(gram.into_boxed_slice());
            }
            sets.push(set);
        }
        Ok(NgramIndex { order, sets })
    }
}

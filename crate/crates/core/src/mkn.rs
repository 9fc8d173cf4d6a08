//! Interpolated modified Kneser-Ney smoothing with three discount levels.
//!
//! The highest order discounts raw n-gram counts; every lower order uses
//! continuation counts (the number of distinct one-word left extensions of
//! the gram at the next order up). Discounts come from counts-of-counts via
//! the Chen-Goodman estimates, clipped to [0, m], with fixed defaults when a
//! required count-of-count is zero. Back-off weights are set so every
//! context's conditional distribution sums to one, and the unigram level
//! interpolates with the uniform distribution over the vocabulary.

use std::io::{Read, Write};

use rustc_hash::FxHashMap;

use crate::corpus::{Corpus, NgramEvents, NgramIndex, Vocabulary, WordId, BOS_ID};
use crate::error::Result;
use crate::io::{BinReader, BinWriter};

type Gram = Box<[WordId]>;

/// Per-order estimation tables. At order k, `counts` maps k-grams to the
/// counts used there, `denom` and `gamma_num` map (k-1)-gram contexts to
/// their count total and total applied discount mass.
#[derive(Debug, Clone, Default)]
struct OrderTable {
    counts: FxHashMap<Gram, u64>,
    denom: FxHashMap<Gram, u64>,
    gamma_num: FxHashMap<Gram, f64>,
    discounts: [f64; 3],
}

impl OrderTable {
    fn discount_for(&self, count: u64) -> f64 {
        match count {
            0 => 0.0,
            1 => self.discounts[0],
            2 => self.discounts[1],
            _ => self.discounts[2],
        }
    }
}

/// Fallback discounts when counts-of-counts degenerate.
const FALLBACK_DISCOUNTS: [f64; 3] = [0.5, 1.0, 1.5];

/// Chen-Goodman discount estimates from counts-of-counts n1..n4, per level
/// m in {1, 2, 3+}: D_m = m - (m+1)·Y·n_{m+1}/n_m with Y = n1/(n1+2·n2),
/// clipped to [0, m]. A level with n_m = 0 (or no usable Y) takes the
/// fallback default.
fn estimate_discounts(cc: [u64; 4]) -> [f64; 3] {
    let [n1, n2, _n3, _n4] = cc;
    let mut out = FALLBACK_DISCOUNTS;
    if n1 == 0 {
        return out;
    }
    let y = n1 as f64 / (n1 as f64 + 2.0 * n2 as f64);
    for m in 1..=3usize {
        let n_m = cc[m - 1];
        if n_m == 0 {
            continue; // keep fallback
        }
        let raw = m as f64 - (m as f64 + 1.0) * y * cc[m] as f64 / n_m as f64;
        out[m - 1] = raw.clamp(0.0, m as f64);
    }
    out
}

/// A frozen interpolated modified Kneser-Ney model.
#[derive(Debug, Clone)]
pub struct MknModel {
    pub vocab: Vocabulary,
    order: usize,
    /// tables[k-1] holds order k.
    tables: Vec<OrderTable>,
    hits: NgramIndex,
}

impl MknModel {
    pub fn estimate(vocab: &Vocabulary, corpus: &Corpus, order: usize) -> Self {
        Self::estimate_impl(vocab, corpus, order, None)
    }

    /// `top_discount_override` replaces the highest order's discounts; used
    /// by diagnostics to verify that zero discounting reduces the top-order
    /// numerator to the maximum-likelihood estimate.
    fn estimate_impl(
        vocab: &Vocabulary,
        corpus: &Corpus,
        order: usize,
        top_discount_override: Option<[f64; 3]>,
    ) -> Self {
        assert!(order >= 1);
        let events = NgramEvents::from_corpus(corpus, order);
        let hits = NgramIndex::build(&events);

        // Raw suffix k-gram counts for every order.
        let mut raw: Vec<FxHashMap<Gram, u64>> = vec![FxHashMap::default(); order];
        for i in 0..events.len() {
            let ngram = events.ngram(i);
            for k in 1..=order {
                let suffix = &ngram[order - k..];
                match raw[k - 1].get_mut(suffix) {
                    Some(c) => *c += 1,
                    None => {
                        raw[k - 1].insert(suffix.to_vec().into_boxed_slice(), 1);
                    }
                }
            }
        }

        let mut tables: Vec<OrderTable> = Vec::with_capacity(order);
        for k in 1..=order {
            let counts: FxHashMap<Gram, u64> = if k == order {
                std::mem::take(&mut raw[k - 1])
            } else {
                // Continuation counts: distinct left extensions at order k+1.
                let mut cont: FxHashMap<Gram, u64> = FxHashMap::default();
                for gram in raw[k].keys() {
                    let suffix = &gram[1..];
                    match cont.get_mut(suffix) {
                        Some(c) => *c += 1,
                        None => {
                            cont.insert(suffix.to_vec().into_boxed_slice(), 1);
                        }
                    }
                }
                cont
            };

            let mut cc = [0u64; 4];
            for &c in counts.values() {
                if (1..=4).contains(&c) {
                    cc[(c - 1) as usize] += 1;
                }
            }
            let discounts = match (k == order, top_discount_override) {
                (true, Some(d)) => d,
                _ => estimate_discounts(cc),
            };

            let mut table = OrderTable {
                discounts,
                ..Default::default()
            };
            for (gram, &c) in &counts {
                let ctx = &gram[..k - 1];
                match table.denom.get_mut(ctx) {
                    Some(t) => *t += c,
                    None => {
                        table.denom.insert(ctx.to_vec().into_boxed_slice(), c);
                    }
                }
                let d = match c {
                    0 => 0.0,
                    1 => discounts[0],
                    2 => discounts[1],
                    _ => discounts[2],
                };
                match table.gamma_num.get_mut(ctx) {
                    Some(t) => *t += d,
                    None => {
                        table.gamma_num.insert(ctx.to_vec().into_boxed_slice(), d);
                    }
                }
            }
            table.counts = counts;
            tables.push(table);
        }

        MknModel {
            vocab: vocab.clone(),
            order,
            tables,
            hits,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn discounts(&self, order: usize) -> [f64; 3] {
        self.tables[order - 1].discounts
    }

    /// Interpolated conditional probability, recursing from the highest
    /// order down to the uniform-interpolated unigram. Unseen contexts pass
    /// straight through to the next lower order.
    pub fn prob(&self, ctx: &[WordId], w: WordId) -> f64 {
        debug_assert!(ctx.len() >= self.order - 1);
        self.prob_order(self.order, ctx, w)
    }

    fn prob_order(&self, k: usize, ctx: &[WordId], w: WordId) -> f64 {
        let table = &self.tables[k - 1];
        let mut key: Vec<WordId> = Vec::with_capacity(k);
        key.extend_from_slice(&ctx[ctx.len() - (k - 1)..]);
        let denom = table.denom.get(key.as_slice()).copied().unwrap_or(0);

        let lower = if k == 1 {
            1.0 / self.vocab.support_size() as f64
        } else {
            self.prob_order(k - 1, ctx, w)
        };
        if denom == 0 {
            return lower;
        }

        key.push(w);
        let count = table.counts.get(key.as_slice()).copied().unwrap_or(0);
        key.pop();
        let alpha = (count as f64 - table.discount_for(count)).max(0.0) / denom as f64;
        let gamma = table.gamma_num[key.as_slice()] / denom as f64;
        alpha + gamma * lower
    }

    pub fn hit_length(&self, ctx: &[WordId], w: WordId) -> usize {
        self.hits.hit_length(ctx, w)
    }

    /// ARPA-style text export for cross-checking: probabilities and back-off
    /// weights in log10. Each order lists every gram carrying counts at that
    /// order plus any context gram with back-off mass; grams ending in the
    /// begin symbol take the conventional -99 placeholder probability.
    pub fn write_arpa<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut sections: Vec<Vec<Gram>> = Vec::with_capacity(self.order);
        for k in 1..=self.order {
            let table = &self.tables[k - 1];
            let mut grams: Vec<Gram> = table.counts.keys().cloned().collect();
            if k < self.order {
                for ctx in self.tables[k].denom.keys() {
                    if !table.counts.contains_key(ctx) {
                        grams.push(ctx.clone());
                    }
                }
            }
            grams.sort();
            grams.dedup();
            sections.push(grams);
        }

        writeln!(out, "\\data\\")?;
        for (i, grams) in sections.iter().enumerate() {
            writeln!(out, "ngram {}={}", i + 1, grams.len())?;
        }
        for (i, grams) in sections.iter().enumerate() {
            let k = i + 1;
            writeln!(out)?;
            writeln!(out, "\\{k}-grams:")?;
            for gram in grams {
                let target = gram[k - 1];
                let log_p = if target == BOS_ID {
                    -99.0
                } else {
                    self.prob_order(k, &gram[..k - 1], target).log10()
                };
                let words: Vec<&str> = gram.iter().map(|&id| self.vocab.decode(id)).collect();
                let bow = if k < self.order {
                    let table = &self.tables[k];
                    table
                        .denom
                        .get(gram)
                        .map(|&d| (table.gamma_num[gram.as_ref()] / d as f64).log10())
                } else {
                    None
                };
                match bow {
                    Some(b) => writeln!(out, "{log_p}\t{}\t{b}", words.join(" "))?,
                    None => writeln!(out, "{log_p}\t{}", words.join(" "))?,
                }
            }
        }
        writeln!(out)?;
        writeln!(out, "\\end\\")
    }

    pub(crate) fn write_bin<W: Write>(&self, w: &mut BinWriter<W>) -> std::io::Result<()> {
        self.vocab.write_bin(w)?;
        w.put_usize(self.order)?;
        for table in &self.tables {
            for d in table.discounts {
                w.put_f64(d)?;
            }
            write_gram_map(w, &table.counts, |w, &v| w.put_u64(v))?;
            write_gram_map(w, &table.denom, |w, &v| w.put_u64(v))?;
            write_gram_map(w, &table.gamma_num, |w, &v| w.put_f64(v))?;
        }
        self.hits.write_bin(w)
    }

    pub(crate) fn read_bin<R: Read>(r: &mut BinReader<R>) -> Result<Self> {
        let vocab = Vocabulary::read_bin(r)?;
        let order = r.get_usize()?;
        let mut tables = Vec::with_capacity(order);
        for _ in 0..order {
            let mut discounts = [0.0; 3];
            for d in &mut discounts {
                *d = r.get_f64()?;
            }
            let counts = read_gram_map(r, BinReader::get_u64)?;
            let denom = read_gram_map(r, BinReader::get_u64)?;
            let gamma_num = read_gram_map(r, BinReader::get_f64)?;
            tables.push(OrderTable {
                counts,
                denom,
                gamma_num,
                discounts,
            });
        }
        let hits = NgramIndex::read_bin(r)?;
        Ok(MknModel {
            vocab,
            order,
            tables,
            hits,
        })
    }
}

fn write_gram_map<W: Write, V>(
    w: &mut BinWriter<W>,
    map: &FxHashMap<Gram, V>,
    put: impl Fn(&mut BinWriter<W>, &V) -> std::io::Result<()>,
) -> std::io::Result<()> {
    let mut entries: Vec<(&Gram, &V)> = map.iter().collect();
    entries.sort_by(|a, b| a.0.cmp(b.0));
    w.put_usize(entries.len())?;
    for (gram, v) in entries {
        w.put_usize(gram.len())?;
        for &id in gram.iter() {
            w.put_u32(id)?;
        }
        put(w, v)?;
    }
    Ok(())
}

fn read_gram_map<R: Read, V>(
    r: &mut BinReader<R>,
    get: impl Fn(&mut BinReader<R>) -> Result<V>,
) -> Result<FxHashMap<Gram, V>> {
    let n = r.get_usize()?;
    let mut map = FxHashMap::default();
    map.reserve(n);
    for _ in 0..n {
        let len = r.get_usize()?;
        let mut gram = Vec::with_capacity(len);
        for _ in 0..len {
            gram.push(r.get_u32()?);
        }
        let v = get(r)?;
        map.insert(gram.into_boxed_slice(), v);
    }
    Ok(map)
}

//! Perplexity evaluation with per-token records, subset breakdowns by
//! hit-length and compound status, and per-event probability margins
//! between two reports.
//!
//! Reports use log base 2 so that perplexity is 2^(cross-entropy). Every
//! target is scored, including the end symbol of each sentence;
//! out-of-vocabulary targets are scored as the unknown symbol and flagged.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::corpus::{Vocabulary, WordId, BOS_ID, EOS_ID, UNK_ID};
use crate::error::{Error, Result};
use crate::model::LanguageModel;
use crate::segmentation::SegmentationDictionary;

/// One scored prediction event.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenRecord {
    pub sentence: u32,
    pub position: u32,
    pub target: WordId,
    pub log2_prob: f64,
    pub hit_length: u8,
    pub is_compound: bool,
    pub is_oov: bool,
}

/// Evaluation result over a test corpus.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub records: Vec<TokenRecord>,
    pub cross_entropy: f64,
    pub perplexity: f64,
    pub oov_count: usize,
    pub order: usize,
    /// Set for unnormalized compound-model reports: probabilities range
    /// over an extended event space, so comparisons against word-model
    /// reports bound the compound model from above.
    pub extended_event_space: bool,
}

impl EvalReport {
    pub fn token_count(&self) -> usize {
        self.records.len()
    }

    /// Recomputes the cross-entropy from the per-token records; must agree
    /// with the stored aggregate.
    pub fn recompute_cross_entropy(&self) -> f64 {
        let total: f64 = self.records.iter().map(|r| r.log2_prob).sum();
        -total / self.records.len() as f64
    }

    /// Line-oriented export: `sent pos token log2p h is_compound is_oov`
    /// tab-separated, with a summary footer.
    pub fn write_tsv<W: Write>(&self, vocab: &Vocabulary, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# pylm report v1 order={}{}",
            self.order,
            if self.extended_event_space {
                " event-space=extended"
            } else {
                ""
            }
        )?;
        for r in &self.records {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.sentence,
                r.position,
                vocab.decode(r.target),
                r.log2_prob,
                r.hit_length,
                r.is_compound as u8,
                r.is_oov as u8
            )?;
        }
        writeln!(
            out,
            "# tokens={} oov={} xent={} ppl={}",
            self.records.len(),
            self.oov_count,
            self.cross_entropy,
            self.perplexity
        )
    }

    pub fn to_report_file(&self, vocab: &Vocabulary) -> ReportFile {
        ReportFile {
            order: self.order,
            records: self
                .records
                .iter()
                .map(|r| FileRecord {
                    sentence: r.sentence,
                    position: r.position,
                    token: vocab.decode(r.target).to_string(),
                    log2_prob: r.log2_prob,
                    hit_length: r.hit_length,
                    is_compound: r.is_compound,
                    is_oov: r.is_oov,
                })
                .collect(),
        }
    }
}

/// Evaluates every prediction event of the test text: each sentence of
/// length L yields L+1 events ending in the end symbol. A non-positive or
/// non-finite probability is a hard error; smoothed models never produce
/// one. `threads` > 1 parallelizes over sentence chunks with identical
/// output.
pub fn evaluate<M: LanguageModel + ?Sized>(
    model: &M,
    sentences: &[Vec<String>],
    threads: usize,
) -> Result<EvalReport> {
    let vocab = model.vocab();
    let order = model.order();
    let threads = threads.max(1).min(sentences.len().max(1));

    let eval_sentence = |s: usize, records: &mut Vec<TokenRecord>| -> Result<()> {
        let raw = &sentences[s];
        let ids: Vec<WordId> = raw.iter().map(|t| vocab.encode(t)).collect();
        let mut window: Vec<WordId> = vec![BOS_ID; order - 1];
        for pos in 0..=ids.len() {
            let (target, is_oov) = if pos < ids.len() {
                (ids[pos], ids[pos] == UNK_ID)
            } else {
                (EOS_ID, false)
            };
            let p = model.prob(&window, target);
            if p.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || !p.is_finite() {
                let token = if pos < raw.len() {
                    raw[pos].clone()
                } else {
                    crate::corpus::EOS.to_string()
                };
                return Err(Error::ZeroProbability {
                    token,
                    sentence: s,
                    position: pos,
                    prob: p,
                });
            }
            records.push(TokenRecord {
                sentence: s as u32,
                position: pos as u32,
                target,
                log2_prob: p.log2(),
                hit_length: model.hit_length(&window, target) as u8,
                is_compound: model.is_compound_word(target),
                is_oov,
            });
            if order > 1 && pos < ids.len() {
                window.rotate_left(1);
                window[order - 2] = ids[pos];
            }
        }
        Ok(())
    };

    let mut records: Vec<TokenRecord> = Vec::new();
    if threads <= 1 {
        for s in 0..sentences.len() {
            eval_sentence(s, &mut records)?;
        }
    } else {
        let chunk = sentences.len().div_ceil(threads);
        let results: Vec<Result<Vec<TokenRecord>>> = std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for t in 0..threads {
                let eval_sentence = &eval_sentence;
                handles.push(scope.spawn(move || {
                    let lo = t * chunk;
                    let hi = ((t + 1) * chunk).min(sentences.len());
                    let mut out = Vec::new();
                    for s in lo..hi {
                        eval_sentence(s, &mut out)?;
                    }
                    Ok(out)
                }));
            }
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        for result in results {
            records.extend(result?);
        }
    }

    if records.is_empty() {
        return Err(Error::Config("empty test corpus".into()));
    }
    let oov_count = records.iter().filter(|r| r.is_oov).count();
    let cross_entropy = {
        let total: f64 = records.iter().map(|r| r.log2_prob).sum();
        -total / records.len() as f64
    };
    Ok(EvalReport {
        perplexity: cross_entropy.exp2(),
        cross_entropy,
        oov_count,
        records,
        order,
        extended_event_space: model.extended_event_space(),
    })
}

/// A report as stored on disk: token surfaces instead of ids, so it can be
/// re-partitioned against any segmentation dictionary.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportFile {
    pub records: Vec<FileRecord>,
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FileRecord {
    pub sentence: u32,
    pub position: u32,
    pub token: String,
    pub log2_prob: f64,
    pub hit_length: u8,
    pub is_compound: bool,
    pub is_oov: bool,
}

impl ReportFile {
    pub fn read(path: &Path) -> Result<ReportFile> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let reader = std::io::BufReader::new(file);
        let mut records = Vec::new();
        let mut order = 0usize;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() || line.starts_with('#') {
                if let Some(rest) = line.split("order=").nth(1) {
                    let digits: String = rest.chars().take_while(char::is_ascii_digit).collect();
                    order = digits.parse().unwrap_or(0);
                }
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 7 {
                return Err(Error::format(path, lineno + 1, "expected 7 fields"));
            }
            let parse_err = |what: &str| Error::format(path, lineno + 1, format!("bad {what}"));
            records.push(FileRecord {
                sentence: fields[0].parse().map_err(|_| parse_err("sentence"))?,
                position: fields[1].parse().map_err(|_| parse_err("position"))?,
                token: fields[2].to_string(),
                log2_prob: fields[3].parse().map_err(|_| parse_err("log2p"))?,
                hit_length: fields[4].parse().map_err(|_| parse_err("hit length"))?,
                is_compound: fields[5] == "1",
                is_oov: fields[6] == "1",
            });
        }
        if order == 0 {
            // older report without the order marker: infer from hit lengths
            order = records
                .iter()
                .map(|r| r.hit_length as usize)
                .max()
                .unwrap_or(1);
        }
        Ok(ReportFile { records, order })
    }

    pub fn cross_entropy(&self) -> f64 {
        let total: f64 = self.records.iter().map(|r| r.log2_prob).sum();
        -total / self.records.len() as f64
    }

    /// Re-derives compound flags from a segmentation dictionary, for
    /// reports produced by models that do not carry one.
    pub fn apply_segmentation(&mut self, seg: &SegmentationDictionary) {
        for r in &mut self.records {
            r.is_compound = !r.is_oov && r.token != crate::corpus::EOS && seg.is_compound(&r.token);
        }
    }

    fn check_aligned(&self, other: &ReportFile) -> Result<()> {
        if self.records.len() != other.records.len() {
            return Err(Error::ReportMismatch(format!(
                "{} vs {} records",
                self.records.len(),
                other.records.len()
            )));
        }
        for (a, b) in self.records.iter().zip(&other.records) {
            if a.sentence != b.sentence || a.position != b.position || a.token != b.token {
                return Err(Error::ReportMismatch(format!(
                    "event mismatch at sentence {} position {}: '{}' vs '{}'",
                    a.sentence, a.position, a.token, b.token
                )));
            }
        }
        Ok(())
    }
}

/// One subset of the breakdown: tokens with a given hit length and compound
/// status, or the out-of-vocabulary overlay row.
#[derive(Debug, Clone)]
pub struct BreakdownRow {
    pub label: String,
    pub token_count: usize,
    pub cross_entropy: Option<f64>,
    pub perplexity: Option<f64>,
    /// Percentage relative cross-entropy change against the baseline
    /// report; negative is an improvement.
    pub relative_delta: Option<f64>,
}

/// Partitions tokens into hit-length × compound-status cells (plus an OOV
/// overlay row). Cell counts over the h × status grid partition the report
/// exactly. With a baseline report on the identical event sequence, each
/// row also carries the relative cross-entropy delta.
pub fn breakdown(
    report: &ReportFile,
    baseline: Option<&ReportFile>,
    order: usize,
) -> Result<Vec<BreakdownRow>> {
    if let Some(b) = baseline {
        report.check_aligned(b)?;
    }
    let cell = |h: u8, compound: bool| -> (Vec<f64>, Vec<f64>) {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (i, r) in report.records.iter().enumerate() {
            if r.hit_length == h && r.is_compound == compound {
                a.push(r.log2_prob);
                if let Some(base) = baseline {
                    b.push(base.records[i].log2_prob);
                }
            }
        }
        (a, b)
    };

    let xent = |vals: &[f64]| -> Option<f64> {
        if vals.is_empty() {
            None
        } else {
            Some(-vals.iter().sum::<f64>() / vals.len() as f64)
        }
    };

    let mut rows = Vec::new();
    for h in 1..=order as u8 {
        for compound in [false, true] {
            let (a, b) = cell(h, compound);
            let xa = xent(&a);
            let xb = xent(&b);
            rows.push(BreakdownRow {
                label: format!(
                    "h={h} {}",
                    if compound { "compound" } else { "non-compound" }
                ),
                token_count: a.len(),
                cross_entropy: xa,
                perplexity: xa.map(f64::exp2),
                relative_delta: match (baseline, xa, xb) {
                    (Some(_), Some(xa), Some(xb)) if xb != 0.0 => Some(100.0 * (xa - xb) / xb),
                    _ => None,
                },
            });
        }
    }

    // OOV overlay (these tokens also live in the grid rows above).
    let oov: Vec<f64> = report
        .records
        .iter()
        .filter(|r| r.is_oov)
        .map(|r| r.log2_prob)
        .collect();
    let oov_base: Vec<f64> = match baseline {
        Some(base) => base
            .records
            .iter()
            .zip(&report.records)
            .filter(|(_, r)| r.is_oov)
            .map(|(b, _)| b.log2_prob)
            .collect(),
        None => Vec::new(),
    };
    let xa = xent(&oov);
    let xb = xent(&oov_base);
    rows.push(BreakdownRow {
        label: "oov".to_string(),
        token_count: oov.len(),
        cross_entropy: xa,
        perplexity: xa.map(f64::exp2),
        relative_delta: match (baseline, xa, xb) {
            (Some(_), Some(xa), Some(xb)) if xb != 0.0 => Some(100.0 * (xa - xb) / xb),
            _ => None,
        },
    });
    Ok(rows)
}

pub fn write_breakdown_tsv<W: Write>(rows: &[BreakdownRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "subset\ttokens\txent\tppl\trel_delta_pct")?;
    let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| x.to_string());
    for row in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            row.label,
            row.token_count,
            fmt(row.cross_entropy),
            fmt(row.perplexity),
            fmt(row.relative_delta)
        )?;
    }
    Ok(())
}

/// One entry of a probability-margin ranking between two reports.
#[derive(Debug, Clone)]
pub struct MarginEntry {
    pub sentence: u32,
    pub position: u32,
    pub token: String,
    pub prob_a: f64,
    pub prob_b: f64,
    pub delta: f64,
}

/// Ranks identical events by the probability margin Δ = p_a - p_b,
/// descending. With `compounds_only`, restricts to events whose target is
/// flagged as a compound in the first report.
pub fn margin_ranking(
    a: &ReportFile,
    b: &ReportFile,
    compounds_only: bool,
) -> Result<Vec<MarginEntry>> {
    a.check_aligned(b)?;
    let mut entries: Vec<MarginEntry> = a
        .records
        .iter()
        .zip(&b.records)
        .filter(|(ra, _)| !compounds_only || ra.is_compound)
        .map(|(ra, rb)| {
            let pa = ra.log2_prob.exp2();
            let pb = rb.log2_prob.exp2();
            MarginEntry {
                sentence: ra.sentence,
                position: ra.position,
                token: ra.token.clone(),
                prob_a: pa,
                prob_b: pb,
                delta: pa - pb,
            }
        })
        .collect();
    entries.sort_by(|x, y| {
        y.delta
            .partial_cmp(&x.delta)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| (x.sentence, x.position).cmp(&(y.sentence, y.position)))
    });
    Ok(entries)
}

pub fn write_margin_tsv<W: Write>(entries: &[MarginEntry], mut out: W) -> std::io::Result<()> {
    writeln!(out, "sent\tpos\ttoken\tprob_a\tprob_b\tdelta")?;
    for e in entries {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            e.sentence, e.position, e.token, e.prob_a, e.prob_b, e.delta
        )?;
    }
    Ok(())
}

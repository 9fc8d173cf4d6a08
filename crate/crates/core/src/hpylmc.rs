//! The compound-aware extension: word-level restaurants H_u whose base
//! distribution is the product of a head model G (a context tree over
//! components, conditioned on the word context) and a head-conditioned
//! modifier bigram model F with an end-of-word symbol.
//!
//! Predicting word w̃ after context u decomposes w̃ into components ordered
//! head-first: the head is drawn from G_u, each further component from
//! F(· | previous component), then the end symbol. Opening a table in H_u
//! sends one head customer into G and the modifier/end customers into F, so
//! the three structures stay consistent under insertion and removal.
//! Context words are surface forms; only the predicted word is decomposed.

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use rustc_hash::FxHashMap;

use crate::corpus::{Corpus, NgramEvents, NgramIndex, Vocabulary, WordId};
use crate::crp::{PypParams, Restaurant, SeatingSummary};
use crate::error::Result;
use crate::hpylm::{ContextTree, TrainConfig, TrainStats, TreeSnapshot};
use crate::io::{BinReader, BinWriter};
use crate::segmentation::{CompoundWord, DecompositionTable, SegmentationDictionary};
use crate::slice::resample_params;

/// One posterior sample of the seating state across H, G, and F.
#[derive(Debug, Clone)]
struct CompoundState {
    /// Word-level restaurants, one per full-length context.
    h: FxHashMap<Box<[WordId]>, Restaurant>,
    h_params: PypParams,
    /// Head model over components, conditioned on word contexts.
    g: ContextTree,
    /// Modifier bigram model over components plus the end symbol.
    f: ContextTree,
}

impl CompoundState {
    fn new(order: usize, component_support: u64) -> Self {
        CompoundState {
            h: FxHashMap::default(),
            h_params: PypParams::new(0.5, 1.0).unwrap(),
            g: ContextTree::with_uniform_params(order, component_support),
            f: ContextTree::with_uniform_params(2, component_support + 1),
        }
    }

    fn base_prob(&self, ctx: &[WordId], word: &CompoundWord, end_id: WordId) -> f64 {
        let mut prev = word.head();
        let mut p = self.g.prob(ctx, prev);
        for i in 1..word.lambda.len() {
            let c = word.components[word.lambda[i] as usize];
            p *= self.f.prob(&[prev], c);
            prev = c;
        }
        p * self.f.prob(&[prev], end_id)
    }

    fn prob(&self, ctx: &[WordId], word: &CompoundWord, w: WordId, end_id: WordId) -> f64 {
        let base = self.base_prob(ctx, word, end_id);
        match self.h.get(ctx) {
            Some(rest) => rest.predictive(w, base, self.h_params),
            None => base,
        }
    }

    fn insert<R: Rng + ?Sized>(
        &mut self,
        ctx: &[WordId],
        w: WordId,
        word: &CompoundWord,
        end_id: WordId,
        rng: &mut R,
    ) {
        let base = self.base_prob(ctx, word, end_id);
        let params = self.h_params;
        let rest = match self.h.get_mut(ctx) {
            Some(rest) => rest,
            None => self.h.entry(ctx.to_vec().into_boxed_slice()).or_default(),
        };
        if rest.seat(w, base, params, rng) {
            let mut prev = word.head();
            self.g.insert(ctx, prev, rng);
            for i in 1..word.lambda.len() {
                let c = word.components[word.lambda[i] as usize];
                self.f.insert(&[prev], c, rng);
                prev = c;
            }
            self.f.insert(&[prev], end_id, rng);
        }
    }

    /// Random-seating insertion for sampler initialization; table choices
    /// are uniform at H and at every level the propagation reaches.
    fn insert_random<R: Rng + ?Sized>(
        &mut self,
        ctx: &[WordId],
        w: WordId,
        word: &CompoundWord,
        end_id: WordId,
        rng: &mut R,
    ) {
        let rest = match self.h.get_mut(ctx) {
            Some(rest) => rest,
            None => self.h.entry(ctx.to_vec().into_boxed_slice()).or_default(),
        };
        if rest.seat_random(w, rng) {
            let mut prev = word.head();
            self.g.insert_random(ctx, prev, rng);
            for i in 1..word.lambda.len() {
                let c = word.components[word.lambda[i] as usize];
                self.f.insert_random(&[prev], c, rng);
                prev = c;
            }
            self.f.insert_random(&[prev], end_id, rng);
        }
    }

    fn remove<R: Rng + ?Sized>(
        &mut self,
        ctx: &[WordId],
        w: WordId,
        word: &CompoundWord,
        end_id: WordId,
        rng: &mut R,
    ) {
        let rest = self
            .h
            .get_mut(ctx)
            .unwrap_or_else(|| panic!("removing event with untracked context"));
        let table_removed = rest.unseat(w, rng);
        if rest.is_empty() {
            self.h.remove(ctx);
        }
        if table_removed {
            let mut prev = word.head();
            self.g.remove(ctx, prev, rng);
            for i in 1..word.lambda.len() {
                let c = word.components[word.lambda[i] as usize];
                self.f.remove(&[prev], c, rng);
                prev = c;
            }
            self.f.remove(&[prev], end_id, rng);
        }
    }

    fn h_summary(&self) -> SeatingSummary {
        let mut summary = SeatingSummary::default();
        for rest in self.h.values() {
            rest.accumulate_summary(&mut summary);
        }
        summary
    }

    fn joint_log_likelihood(&self) -> f64 {
        self.h_summary().log_likelihood(self.h_params)
            + self.g.joint_log_likelihood()
            + self.f.joint_log_likelihood()
    }

    fn resample_hyperparameters<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.g.resample_hyperparameters(rng);
        self.f.resample_hyperparameters(rng);
        self.h_params = resample_params(self.h_params, &self.h_summary(), rng);
    }

    /// Cross-model consistency: every table in H labeled w̃ contributes one
    /// head customer to G's leaf at the same context and one customer per
    /// modifier/end transition to F's conditional restaurants; G and F must
    /// hold exactly those customers at their data levels, and their own
    /// hierarchies must audit clean.
    fn audit(
        &self,
        decomp: &DecompositionTable,
        end_id: WordId,
    ) -> std::result::Result<(), String> {
        let mut expected_g: FxHashMap<(Vec<WordId>, WordId), u64> = FxHashMap::default();
        let mut expected_f: FxHashMap<(WordId, WordId), u64> = FxHashMap::default();
        for (ctx, rest) in &self.h {
            rest.check_invariants()
                .map_err(|e| format!("H[{ctx:?}]: {e}"))?;
            if rest.is_empty() {
                return Err(format!("H[{ctx:?}]: empty restaurant not removed"));
            }
            for dish in rest.dish_ids() {
                let tables = rest.dish_tables(dish);
                let word = decomp.decompose(dish);
                let mut prev = word.head();
                *expected_g.entry((ctx.to_vec(), prev)).or_insert(0) += tables;
                for i in 1..word.lambda.len() {
                    let c = word.components[word.lambda[i] as usize];
                    *expected_f.entry((prev, c)).or_insert(0) += tables;
                    prev = c;
                }
                *expected_f.entry((prev, end_id)).or_insert(0) += tables;
            }
        }

        let g_leaf_depth = self.g.order() - 1;
        let mut seen_g = 0u64;
        for (ctx, rest_snap) in self.g.snapshot() {
            if ctx.len() != g_leaf_depth {
                continue;
            }
            for (dish, hist) in &rest_snap {
                let have: u64 = hist.iter().map(|&(t, c)| t as u64 * c as u64).sum();
                let want = expected_g.get(&(ctx.clone(), *dish)).copied().unwrap_or(0);
                if have != want {
                    return Err(format!(
                        "G[{ctx:?}] dish {dish}: {have} customers, H implies {want}"
                    ));
                }
                seen_g += have;
            }
        }
        let want_g: u64 = expected_g.values().sum();
        if seen_g != want_g {
            return Err(format!(
                "G data level holds {seen_g} customers, H implies {want_g}"
            ));
        }

        let mut seen_f = 0u64;
        for (ctx, rest_snap) in self.f.snapshot() {
            if ctx.len() != 1 {
                continue;
            }
            for (dish, hist) in &rest_snap {
                let have: u64 = hist.iter().map(|&(t, c)| t as u64 * c as u64).sum();
                let want = expected_f.get(&(ctx[0], *dish)).copied().unwrap_or(0);
                if have != want {
                    return Err(format!(
                        "F[{}] dish {dish}: {have} customers, H implies {want}",
                        ctx[0]
                    ));
                }
                seen_f += have;
            }
        }
        let want_f: u64 = expected_f.values().sum();
        if seen_f != want_f {
            return Err(format!(
                "F data level holds {seen_f} customers, H implies {want_f}"
            ));
        }

        self.g.audit().map_err(|e| format!("G: {e}"))?;
        self.f.audit().map_err(|e| format!("F: {e}"))?;
        Ok(())
    }

    fn snapshot(&self) -> CompoundSnapshot {
        let mut h: HSnapshot = self
            .h
            .iter()
            .map(|(ctx, rest)| (ctx.to_vec(), rest.snapshot()))
            .collect();
        h.sort_by(|a, b| a.0.cmp(&b.0));
        CompoundSnapshot {
            h,
            g: self.g.snapshot(),
            f: self.f.snapshot(),
        }
    }

    fn write_bin<W: Write>(&self, w: &mut BinWriter<W>) -> std::io::Result<()> {
        w.put_f64(self.h_params.discount)?;
        w.put_f64(self.h_params.strength)?;
        let mut contexts: Vec<&Box<[WordId]>> = self.h.keys().collect();
        contexts.sort();
        w.put_usize(contexts.len())?;
        for ctx in contexts {
            w.put_usize(ctx.len())?;
            for &c in ctx.iter() {
                w.put_u32(c)?;
            }
            self.h[ctx].write_bin(w)?;
        }
        self.g.write_bin(w)?;
        self.f.write_bin(w)
    }

    fn read_bin<R: Read>(r: &mut BinReader<R>) -> Result<Self> {
        let discount = r.get_f64()?;
        let strength = r.get_f64()?;
        let n = r.get_usize()?;
        let mut h = FxHashMap::default();
        for _ in 0..n {
            let len = r.get_usize()?;
            let mut ctx = Vec::with_capacity(len);
            for _ in 0..len {
                ctx.push(r.get_u32()?);
            }
            let rest = Restaurant::read_bin(r)?;
            h.insert(ctx.into_boxed_slice(), rest);
        }
        let g = ContextTree::read_bin(r)?;
        let f = ContextTree::read_bin(r)?;
        Ok(CompoundState {
            h,
            h_params: PypParams { discount, strength },
            g,
            f,
        })
    }
}

/// Sorted (context, restaurant snapshot) pairs of the word-level layer.
pub type HSnapshot = Vec<(Vec<WordId>, Vec<(WordId, Vec<(u32, u32)>)>)>;

/// Canonical state of one posterior sample, for exact equality checks.
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundSnapshot {
    h: HSnapshot,
    g: TreeSnapshot,
    f: TreeSnapshot,
}

/// A frozen compound-aware hierarchical Pitman-Yor model.
#[derive(Debug, Clone)]
pub struct CompoundModel {
    pub vocab: Vocabulary,
    pub seg: SegmentationDictionary,
    decomp: DecompositionTable,
    states: Vec<CompoundState>,
    hits: NgramIndex,
    order: usize,
}

impl CompoundModel {
    pub fn train<R: Rng + ?Sized>(
        vocab: &Vocabulary,
        corpus: &Corpus,
        seg: &SegmentationDictionary,
        cfg: &TrainConfig,
        rng: &mut R,
        mut on_sweep: impl FnMut(usize, f64),
    ) -> (Self, TrainStats) {
        let decomp = DecompositionTable::build(vocab, seg);
        let end_id = decomp.end_id();
        let events = NgramEvents::from_corpus(corpus, cfg.order);
        let hits = NgramIndex::build(&events);
        let mut state = CompoundState::new(cfg.order, decomp.component_support());
        let mut order_idx: Vec<u32> = (0..events.len() as u32).collect();

        // Random seating assignments in a shuffled event order.
        order_idx.shuffle(rng);
        for &i in &order_idx {
            let (ctx, w) = events.get(i as usize);
            state.insert_random(ctx, w, decomp.decompose(w), end_id, rng);
        }

        let mut stats = TrainStats {
            initial_log_likelihood: state.joint_log_likelihood(),
            ..Default::default()
        };
        on_sweep(0, stats.initial_log_likelihood);

        let mut states = Vec::new();
        let total_sweeps = cfg.burn_in
            + if cfg.samples > 1 {
                (cfg.samples - 1) * cfg.sample_lag
            } else {
                0
            };
        for sweep in 1..=total_sweeps {
            order_idx.shuffle(rng);
            for &i in &order_idx {
                let (ctx, w) = events.get(i as usize);
                let word = decomp.decompose(w);
                state.remove(ctx, w, word, end_id, rng);
                state.insert(ctx, w, word, end_id, rng);
            }
            if cfg.resample_hyperparameters {
                state.resample_hyperparameters(rng);
            }
            let ll = state.joint_log_likelihood();
            stats.sweep_log_likelihoods.push(ll);
            on_sweep(sweep, ll);
            if sweep >= cfg.burn_in && cfg.samples > 1 {
                let due = (sweep - cfg.burn_in).is_multiple_of(cfg.sample_lag);
                if due && states.len() < cfg.samples {
                    states.push(state.clone());
                }
            }
        }
        stats.final_log_likelihood = stats
            .sweep_log_likelihoods
            .last()
            .copied()
            .unwrap_or(stats.initial_log_likelihood);
        if states.is_empty() {
            states.push(state);
        }
        (
            CompoundModel {
                vocab: vocab.clone(),
                seg: seg.clone(),
                decomp,
                states,
                hits,
                order: cfg.order,
            },
            stats,
        )
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn decompositions(&self) -> &DecompositionTable {
        &self.decomp
    }

    pub fn sample_count(&self) -> usize {
        self.states.len()
    }

    pub fn is_compound_word(&self, w: WordId) -> bool {
        self.decomp.is_compound(w)
    }

    /// Base probability of the word under the product distribution
    /// G_u(head) · Π F(component | previous) · F(end | last), averaged over
    /// posterior samples.
    pub fn base_prob(&self, ctx: &[WordId], w: WordId) -> f64 {
        let word = self.decomp.decompose(w);
        let end = self.decomp.end_id();
        let total: f64 = self
            .states
            .iter()
            .map(|s| s.base_prob(ctx, word, end))
            .sum();
        total / self.states.len() as f64
    }

    /// Predictive probability: H_u smoothing over the product base. The
    /// model distributes mass over the countably infinite set of component
    /// sequences, so summing over the finite word vocabulary strictly
    /// undershoots one whenever non-words are reachable.
    pub fn prob(&self, ctx: &[WordId], w: WordId) -> f64 {
        let word = self.decomp.decompose(w);
        let end = self.decomp.end_id();
        let total: f64 = self.states.iter().map(|s| s.prob(ctx, word, w, end)).sum();
        total / self.states.len() as f64
    }

    /// Probability renormalized over the finite word vocabulary, making
    /// reports directly comparable with the word-based models.
    pub fn renormalized_prob(&self, ctx: &[WordId], w: WordId) -> f64 {
        self.prob(ctx, w) / self.normalizer(ctx)
    }

    /// Σ over the finite vocabulary of `prob(ctx, ·)`.
    pub fn normalizer(&self, ctx: &[WordId]) -> f64 {
        self.vocab.support_ids().map(|v| self.prob(ctx, v)).sum()
    }

    pub fn hit_length(&self, ctx: &[WordId], w: WordId) -> usize {
        self.hits.hit_length(ctx, w)
    }

    /// Inserts a single event into the first sample's state via the seating
    /// rule, with full cross-model propagation. Exposed for consistency
    /// fuzzing; training drives the same path internally.
    pub fn gibbs_insert<R: Rng + ?Sized>(&mut self, ctx: &[WordId], w: WordId, rng: &mut R) {
        let end = self.decomp.end_id();
        let word = self.decomp.decompose(w);
        self.states[0].insert(ctx, w, word, end, rng);
    }

    /// Removes a single previously inserted event from the first sample's
    /// state. Panics on untracked events.
    pub fn gibbs_remove<R: Rng + ?Sized>(&mut self, ctx: &[WordId], w: WordId, rng: &mut R) {
        let end = self.decomp.end_id();
        let word = self.decomp.decompose(w);
        self.states[0].remove(ctx, w, word, end, rng);
    }

    pub fn joint_log_likelihood(&self) -> f64 {
        self.states[0].joint_log_likelihood()
    }

    /// Hyperparameters of the first retained sample: per-depth pairs for
    /// the head tree G and modifier tree F, and the word-level pair for H.
    pub fn hyperparameters(&self) -> (Vec<PypParams>, Vec<PypParams>, PypParams) {
        let s = &self.states[0];
        let g = (0..s.g.order()).map(|d| s.g.params(d)).collect();
        let f = (0..s.f.order()).map(|d| s.f.params(d)).collect();
        (g, f, s.h_params)
    }

    pub fn audit(&self) -> std::result::Result<(), String> {
        for state in &self.states {
            state.audit(&self.decomp, self.decomp.end_id())?;
        }
        Ok(())
    }

    pub fn snapshot(&self) -> Vec<CompoundSnapshot> {
        self.states.iter().map(CompoundState::snapshot).collect()
    }

    pub(crate) fn write_bin<W: Write>(&self, w: &mut BinWriter<W>) -> std::io::Result<()> {
        self.vocab.write_bin(w)?;
        self.seg.write_bin(w)?;
        self.decomp.write_bin(w)?;
        w.put_usize(self.order)?;
        w.put_usize(self.states.len())?;
        for state in &self.states {
            state.write_bin(w)?;
        }
        self.hits.write_bin(w)
    }

    pub(crate) fn read_bin<R: Read>(r: &mut BinReader<R>) -> Result<Self> {
        let vocab = Vocabulary::read_bin(r)?;
        let seg = SegmentationDictionary::read_bin(r)?;
        let decomp = DecompositionTable::read_bin(r, seg.direction)?;
        let order = r.get_usize()?;
        let n = r.get_usize()?;
        let mut states = Vec::with_capacity(n);
        for _ in 0..n {
            states.push(CompoundState::read_bin(r)?);
        }
        let hits = NgramIndex::read_bin(r)?;
        Ok(CompoundModel {
            vocab,
            seg,
            decomp,
            states,
            hits,
            order,
        })
    }
}

//! The versioned model container and the common scoring interface shared by
//! all model families.

use std::io::{BufReader, BufWriter};
use std::path::Path;
use std::sync::Mutex;

use rustc_hash::FxHashMap;

use crate::corpus::{Vocabulary, WordId};
use crate::error::{Error, Result};
use crate::hpylm::HpylmModel;
use crate::hpylmc::CompoundModel;
use crate::io::{write_header, BinReader, BinWriter};
use crate::mkn::MknModel;

/// Common scoring surface: conditional probability of a target after a
/// BOS-padded context, plus the training-data hit length used by report
/// breakdowns. Frozen models are immutable, so queries may run concurrently.
pub trait LanguageModel: Send + Sync {
    fn order(&self) -> usize;
    fn vocab(&self) -> &Vocabulary;
    /// P(w | ctx); `ctx` holds at least `order - 1` ids, the last ones used.
    fn prob(&self, ctx: &[WordId], w: WordId) -> f64;
    fn hit_length(&self, ctx: &[WordId], w: WordId) -> usize;
    fn is_compound_word(&self, _w: WordId) -> bool {
        false
    }
    /// True when probabilities range over more events than the finite word
    /// vocabulary, making perplexities an upper bound relative to word
    /// models; reports carry this flag.
    fn extended_event_space(&self) -> bool {
        false
    }
}

impl LanguageModel for MknModel {
    fn order(&self) -> usize {
        self.order()
    }
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }
    fn prob(&self, ctx: &[WordId], w: WordId) -> f64 {
        self.prob(ctx, w)
    }
    fn hit_length(&self, ctx: &[WordId], w: WordId) -> usize {
        self.hit_length(ctx, w)
    }
}

impl LanguageModel for HpylmModel {
    fn order(&self) -> usize {
        self.order()
    }
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }
    fn prob(&self, ctx: &[WordId], w: WordId) -> f64 {
        self.prob(&ctx[ctx.len() - (self.order() - 1)..], w)
    }
    fn hit_length(&self, ctx: &[WordId], w: WordId) -> usize {
        self.hit_length(ctx, w)
    }
}

impl LanguageModel for CompoundModel {
    fn order(&self) -> usize {
        self.order()
    }
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }
    fn prob(&self, ctx: &[WordId], w: WordId) -> f64 {
        self.prob(&ctx[ctx.len() - (self.order() - 1)..], w)
    }
    fn hit_length(&self, ctx: &[WordId], w: WordId) -> usize {
        self.hit_length(ctx, w)
    }
    fn is_compound_word(&self, w: WordId) -> bool {
        self.is_compound_word(w)
    }
    fn extended_event_space(&self) -> bool {
        true
    }
}

/// Compound-model scores renormalized over the finite word vocabulary, so
/// its reports share an event space with the word-based models. Context
/// normalizers are cached; the sum over the vocabulary makes this costly on
/// large vocabularies.
pub struct Renormalized<'a> {
    model: &'a CompoundModel,
    cache: Mutex<FxHashMap<Box<[WordId]>, f64>>,
}

impl<'a> Renormalized<'a> {
    pub fn new(model: &'a CompoundModel) -> Self {
        Renormalized {
            model,
            cache: Mutex::new(FxHashMap::default()),
        }
    }
}

impl LanguageModel for Renormalized<'_> {
    fn order(&self) -> usize {
        self.model.order()
    }
    fn vocab(&self) -> &Vocabulary {
        &self.model.vocab
    }
    fn prob(&self, ctx: &[WordId], w: WordId) -> f64 {
        let ctx = &ctx[ctx.len() - (self.model.order() - 1)..];
        let z = {
            let cache = self.cache.lock().unwrap();
            cache.get(ctx).copied()
        };
        let z = match z {
            Some(z) => z,
            None => {
                let z = self.model.normalizer(ctx);
                self.cache
                    .lock()
                    .unwrap()
                    .insert(ctx.to_vec().into_boxed_slice(), z);
                z
            }
        };
        self.model.prob(ctx, w) / z
    }
    fn hit_length(&self, ctx: &[WordId], w: WordId) -> usize {
        self.model.hit_length(ctx, w)
    }
    fn is_compound_word(&self, w: WordId) -> bool {
        self.model.is_compound_word(w)
    }
}

const KIND_MKN: u8 = 1;
const KIND_HPYLM: u8 = 2;
const KIND_HPYLMC: u8 = 3;

/// A trained model of any family, as stored in a model file.
#[derive(Debug, Clone)]
pub enum Model {
    Mkn(MknModel),
    Hpylm(HpylmModel),
    Hpylmc(CompoundModel),
}

impl Model {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Model::Mkn(_) => "mkn",
            Model::Hpylm(_) => "hpylm",
            Model::Hpylmc(_) => "hpylmc",
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BinWriter::new(BufWriter::new(file));
        let io_err = |e| Error::io(path, e);
        match self {
            Model::Mkn(m) => {
                write_header(&mut w, KIND_MKN).map_err(io_err)?;
                m.write_bin(&mut w).map_err(io_err)?;
            }
            Model::Hpylm(m) => {
                write_header(&mut w, KIND_HPYLM).map_err(io_err)?;
                m.write_bin(&mut w).map_err(io_err)?;
            }
            Model::Hpylmc(m) => {
                write_header(&mut w, KIND_HPYLMC).map_err(io_err)?;
                m.write_bin(&mut w).map_err(io_err)?;
            }
        }
        w.finish().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Model> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BinReader::new(BufReader::new(file), path);
        let kind = r.read_header()?;
        match kind {
            KIND_MKN => Ok(Model::Mkn(MknModel::read_bin(&mut r)?)),
            KIND_HPYLM => Ok(Model::Hpylm(HpylmModel::read_bin(&mut r)?)),
            KIND_HPYLMC => Ok(Model::Hpylmc(CompoundModel::read_bin(&mut r)?)),
            other => Err(Error::CorruptModel {
                path: path.to_path_buf(),
                message: format!("unknown model kind tag {other}"),
            }),
        }
    }

    pub fn as_language_model(&self) -> &dyn LanguageModel {
        match self {
            Model::Mkn(m) => m,
            Model::Hpylm(m) => m,
            Model::Hpylmc(m) => m,
        }
    }

    pub fn as_hpylmc(&self) -> Option<&CompoundModel> {
        match self {
            Model::Hpylmc(m) => Some(m),
            _ => None,
        }
    }
}

impl LanguageModel for Model {
    fn order(&self) -> usize {
        self.as_language_model().order()
    }
    fn vocab(&self) -> &Vocabulary {
        self.as_language_model().vocab()
    }
    fn prob(&self, ctx: &[WordId], w: WordId) -> f64 {
        self.as_language_model().prob(ctx, w)
    }
    fn hit_length(&self, ctx: &[WordId], w: WordId) -> usize {
        self.as_language_model().hit_length(ctx, w)
    }
    fn is_compound_word(&self, w: WordId) -> bool {
        self.as_language_model().is_compound_word(w)
    }
    fn extended_event_space(&self) -> bool {
        self.as_language_model().extended_event_space()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Corpus;
    use crate::hpylm::TrainConfig;
    use crate::seeded_rng;

    fn sents(text: &[&str]) -> Vec<Vec<String>> {
        text.iter()
            .map(|s| s.split_whitespace().map(str::to_string).collect())
            .collect()
    }

    #[test]
    fn save_load_round_trip_all_kinds() {
        let dir = tempfile::tempdir().unwrap();
        let text = sents(&["der hof ist gross", "der hof ist alt"]);
        let vocab = Vocabulary::build(text.clone(), 1);
        let corpus = Corpus::encode(&vocab, text);

        let mkn = Model::Mkn(MknModel::estimate(&vocab, &corpus, 2));
        let cfg = TrainConfig {
            order: 2,
            burn_in: 2,
            ..Default::default()
        };
        let mut rng = seeded_rng(1);
        let (hp, _) = HpylmModel::train(&vocab, &corpus, &cfg, &mut rng, |_, _| {});
        let hpylm = Model::Hpylm(hp);

        for (name, model) in [("m.pylm", mkn), ("h.pylm", hpylm)] {
            let path = dir.path().join(name);
            model.save(&path).unwrap();
            let back = Model::load(&path).unwrap();
            assert_eq!(back.kind_name(), model.kind_name());
            assert_eq!(back.order(), model.order());
            let ctx = vec![crate::corpus::BOS_ID; model.order() - 1];
            for w in vocab.support_ids() {
                assert_eq!(back.prob(&ctx, w), model.prob(&ctx, w));
            }
        }
    }

    #[test]
    fn garbage_file_is_a_clean_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("garbage.pylm");
        std::fs::write(&path, b"not a model").unwrap();
        assert!(matches!(
            Model::load(&path),
            Err(Error::CorruptModel { .. })
        ));
    }
}

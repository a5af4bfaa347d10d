//! Pair/sentence classifier: encoder, linear projection, one tanh hidden
//! layer and a softmax output.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::SentenceExample;
use crate::embed::{EmbeddingTable, OovPolicy};
use crate::error::{Error, Result};
use crate::nn::{
    adadelta_step, affine_backward, affine_forward, bilstm_backward, bilstm_encode,
    max_pool_time, max_pool_time_backward, softmax, softmax_xent, Activation, BiLstmCache,
    Checkpoint, LstmCellParams, Matrix, OptimizerConfig, Parameter,
};
use crate::rng::{derived, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderKind {
    /// Mean of the token vectors.
    Bow,
    /// Verb and preposition vectors side by side; pairs only.
    Concat,
    /// BiLSTM states max-pooled over time.
    Bilstm,
}

impl EncoderKind {
    pub const ALL: [EncoderKind; 3] = [EncoderKind::Bow, EncoderKind::Concat, EncoderKind::Bilstm];

    pub fn as_str(self) -> &'static str {
        match self {
            EncoderKind::Bow => "bow",
            EncoderKind::Concat => "concat",
            EncoderKind::Bilstm => "bilstm",
        }
    }
}

impl fmt::Display for EncoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EncoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bow" => Ok(EncoderKind::Bow),
            "concat" | "concatenation" => Ok(EncoderKind::Concat),
            "bilstm" => Ok(EncoderKind::Bilstm),
            other => Err(Error::validation(format!("unknown encoder `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    pub encoder: EncoderKind,
    /// Name of the embedding source, recorded for provenance.
    pub embedding: String,
    pub proj_dim: usize,
    pub hidden_dim: usize,
    pub num_classes: usize,
    /// Hidden size of each LSTM direction.
    pub lstm_hidden: usize,
    pub seed: u64,
    pub max_epochs: usize,
    pub patience: usize,
    pub optimizer: OptimizerConfig,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            encoder: EncoderKind::Bilstm,
            embedding: String::new(),
            proj_dim: 512,
            hidden_dim: 512,
            num_classes: 2,
            lstm_hidden: 256,
            seed: 0,
            max_epochs: 100,
            patience: 10,
            optimizer: OptimizerConfig::default(),
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if self.proj_dim == 0 || self.hidden_dim == 0 || self.lstm_hidden == 0 {
            return Err(Error::validation("layer sizes must be positive"));
        }
        if !(2..=3).contains(&self.num_classes) {
            return Err(Error::validation(format!(
                "num_classes must be 2 or 3, got {}",
                self.num_classes
            )));
        }
        if self.patience == 0 {
            return Err(Error::validation("patience must be at least 1"));
        }
        self.optimizer.validate()
    }

    /// Width of the encoder output before projection.
    pub fn encoder_dim(&self, input_dim: usize) -> usize {
        match self.encoder {
            EncoderKind::Bow => input_dim,
            EncoderKind::Concat => 2 * input_dim,
            EncoderKind::Bilstm => 2 * self.lstm_hidden,
        }
    }
}

/// Word vectors for one example.
#[derive(Debug, Clone, PartialEq)]
pub enum EncoderInput {
    /// The two-token sequence ⟨verb, prep⟩.
    Pair { verb: Vec<f64>, prep: Vec<f64> },
    /// A whole sentence, one row per token.
    Sentence(Matrix),
}

impl EncoderInput {
    pub fn dim(&self) -> usize {
        match self {
            EncoderInput::Pair { verb, .. } => verb.len(),
            EncoderInput::Sentence(m) => m.cols(),
        }
    }

    pub fn tokens(&self) -> Matrix {
        match self {
            EncoderInput::Pair { verb, prep } => {
                Matrix::from_rows(&[verb.as_slice(), prep.as_slice()]).expect("equal widths")
            }
            EncoderInput::Sentence(m) => m.clone(),
        }
    }

    /// Sentence examples use every token; pair-only examples use the pair.
    pub fn from_example(
        ex: &SentenceExample,
        table: &EmbeddingTable,
        policy: OovPolicy,
    ) -> Result<Self> {
        if ex.has_sentence() {
            let rows = ex
                .tokens
                .iter()
                .map(|t| table.lookup(t, policy))
                .collect::<Result<Vec<_>>>()?;
            Ok(EncoderInput::Sentence(Matrix::from_rows(&rows)?))
        } else {
            Ok(EncoderInput::Pair {
                verb: table.lookup(ex.verb.as_str(), policy)?,
                prep: table.lookup(ex.prep.as_str(), policy)?,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledInput {
    pub input: EncoderInput,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierParams {
    /// Encoder output to projection, no bias.
    pub w_proj: Parameter,
    pub w_h: Parameter,
    pub b_h: Parameter,
    pub w_o: Parameter,
    pub b_o: Parameter,
    /// Forward and reverse cells for the BiLSTM encoder.
    pub lstm: Option<(LstmCellParams, LstmCellParams)>,
}

impl ClassifierParams {
    pub fn init(config: &ClassifierConfig, input_dim: usize, rng: &mut Rng) -> Result<Self> {
        config.validate()?;
        if input_dim == 0 {
            return Err(Error::validation("input dimension must be positive"));
        }
        let lstm = (config.encoder == EncoderKind::Bilstm).then(|| {
            (
                LstmCellParams::init("lstm_fwd", input_dim, config.lstm_hidden, rng),
                LstmCellParams::init("lstm_bwd", input_dim, config.lstm_hidden, rng),
            )
        });
        let e = config.encoder_dim(input_dim);
        Ok(ClassifierParams {
            w_proj: Parameter::glorot("w_proj", e, config.proj_dim, rng),
            w_h: Parameter::glorot("w_h", config.proj_dim, config.hidden_dim, rng),
            b_h: Parameter::zeros("b_h", 1, config.hidden_dim),
            w_o: Parameter::glorot("w_o", config.hidden_dim, config.num_classes, rng),
            b_o: Parameter::zeros("b_o", 1, config.num_classes),
            lstm,
        })
    }

    pub fn parameters(&self) -> Vec<&Parameter> {
        let mut out = vec![&self.w_proj, &self.w_h, &self.b_h, &self.w_o, &self.b_o];
        if let Some((f, b)) = &self.lstm {
            out.extend(f.parameters());
            out.extend(b.parameters());
        }
        out
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Parameter> {
        let mut out = vec![
            &mut self.w_proj,
            &mut self.w_h,
            &mut self.b_h,
            &mut self.w_o,
            &mut self.b_o,
        ];
        if let Some((f, b)) = &mut self.lstm {
            out.extend(f.parameters_mut());
            out.extend(b.parameters_mut());
        }
        out
    }

    pub fn zero_grad(&mut self) {
        for p in self.parameters_mut() {
            p.zero_grad();
        }
    }

    pub fn to_checkpoint(&self, config: &ClassifierConfig) -> Result<Checkpoint> {
        Ok(Checkpoint {
            params: self
                .parameters()
                .into_iter()
                .map(|p| (p.name.clone(), p.value.clone()))
                .collect(),
            config: serde_json::to_value(config)?,
        })
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<(ClassifierConfig, Self)> {
        let config: ClassifierConfig = serde_json::from_value(ck.config.clone())?;
        config.validate()?;
        let get = |name: &str| -> Result<Parameter> {
            ck.get(name)
                .map(|m| Parameter::new(name, m.clone()))
                .ok_or_else(|| Error::format(format!("checkpoint has no parameter `{name}`")))
        };
        let cell = |prefix: &str| -> Result<LstmCellParams> {
            Ok(LstmCellParams {
                w_x: get(&format!("{prefix}.w_x"))?,
                w_h: get(&format!("{prefix}.w_h"))?,
                bias: get(&format!("{prefix}.bias"))?,
            })
        };
        let lstm = if config.encoder == EncoderKind::Bilstm {
            Some((cell("lstm_fwd")?, cell("lstm_bwd")?))
        } else {
            None
        };
        let params = ClassifierParams {
            w_proj: get("w_proj")?,
            w_h: get("w_h")?,
            b_h: get("b_h")?,
            w_o: get("w_o")?,
            b_o: get("b_o")?,
            lstm,
        };
        params.check(&config)?;
        Ok((config, params))
    }

    /// Token vector width the parameters expect.
    pub fn input_dim(&self, config: &ClassifierConfig) -> usize {
        match (&self.lstm, config.encoder) {
            (Some((f, _)), _) => f.input_dim(),
            (None, EncoderKind::Concat) => self.w_proj.value.rows() / 2,
            (None, _) => self.w_proj.value.rows(),
        }
    }

    fn check(&self, config: &ClassifierConfig) -> Result<()> {
        let d = self.input_dim(config);
        let ok = self.w_proj.shape() == (config.encoder_dim(d), config.proj_dim)
            && self.w_h.shape() == (config.proj_dim, config.hidden_dim)
            && self.b_h.shape() == (1, config.hidden_dim)
            && self.w_o.shape() == (config.hidden_dim, config.num_classes)
            && self.b_o.shape() == (1, config.num_classes)
            && self.lstm.is_some() == (config.encoder == EncoderKind::Bilstm);
        if ok {
            Ok(())
        } else {
            Err(Error::shape("classifier parameters do not match the configuration"))
        }
    }
}

enum EncodeCache {
    Plain,
    Lstm {
        cache: BiLstmCache,
        argmax: Vec<usize>,
        steps: usize,
    },
}

fn pre_encode(
    config: &ClassifierConfig,
    params: &ClassifierParams,
    input: &EncoderInput,
) -> Result<(Vec<f64>, EncodeCache)> {
    let d = params.input_dim(config);
    if input.dim() != d {
        return Err(Error::shape(format!(
            "token vectors have width {}, the classifier expects {d}",
            input.dim()
        )));
    }
    match config.encoder {
        EncoderKind::Bow => {
            let tokens = input.tokens();
            if tokens.rows() == 0 {
                return Err(Error::shape("empty token sequence"));
            }
            let n = tokens.rows() as f64;
            let mean = tokens.sum_rows().as_slice().iter().map(|v| v / n).collect();
            Ok((mean, EncodeCache::Plain))
        }
        EncoderKind::Concat => match input {
            EncoderInput::Pair { verb, prep } => {
                let mut v = verb.clone();
                v.extend_from_slice(prep);
                Ok((v, EncodeCache::Plain))
            }
            EncoderInput::Sentence(_) => Err(Error::Unsupported(
                "the concatenation encoder takes {verb, prep} pairs, not sentences".into(),
            )),
        },
        EncoderKind::Bilstm => {
            let (fwd, bwd) = params.lstm.as_ref().expect("checked by config");
            let tokens = input.tokens();
            let (states, cache) = bilstm_encode(&tokens, fwd, bwd)?;
            let (pooled, argmax) = max_pool_time(&states)?;
            Ok((
                pooled.into_vec(),
                EncodeCache::Lstm {
                    cache,
                    argmax,
                    steps: tokens.rows(),
                },
            ))
        }
    }
}

/// `V_vp`: the projected encoding of one pair (or of `extra_tokens`, the full
/// sentence, when given).
pub fn encode_pair(
    config: &ClassifierConfig,
    params: &ClassifierParams,
    verb_vec: &[f64],
    prep_vec: &[f64],
    extra_tokens: Option<&Matrix>,
) -> Result<Matrix> {
    if verb_vec.len() != prep_vec.len() {
        return Err(Error::shape("verb and preposition vectors differ in width"));
    }
    let input = match extra_tokens {
        Some(m) => EncoderInput::Sentence(m.clone()),
        None => EncoderInput::Pair {
            verb: verb_vec.to_vec(),
            prep: prep_vec.to_vec(),
        },
    };
    let (pre, _) = pre_encode(config, params, &input)?;
    Ok(Matrix::row_vector(&pre).matmul(&params.w_proj.value))
}

struct Forward {
    pre: Matrix,
    caches: Vec<EncodeCache>,
    projected: Matrix,
    hidden: Matrix,
    logits: Matrix,
}

fn forward(
    config: &ClassifierConfig,
    params: &ClassifierParams,
    inputs: &[&EncoderInput],
) -> Result<Forward> {
    let mut rows = Vec::with_capacity(inputs.len());
    let mut caches = Vec::with_capacity(inputs.len());
    for input in inputs {
        let (row, cache) = pre_encode(config, params, input)?;
        rows.push(row);
        caches.push(cache);
    }
    let pre = Matrix::from_rows(&rows)?;
    let projected = pre.matmul(&params.w_proj.value);
    let hidden = Activation::Tanh.forward(&affine_forward(
        &projected,
        &params.w_h.value,
        &params.b_h.value,
    )?);
    let logits = affine_forward(&hidden, &params.w_o.value, &params.b_o.value)?;
    Ok(Forward {
        pre,
        caches,
        projected,
        hidden,
        logits,
    })
}

/// Accumulates parameter gradients for `d_logits`.
fn backward(params: &mut ClassifierParams, fwd: Forward, d_logits: &Matrix) -> Result<()> {
    let g_o = affine_backward(&fwd.hidden, &params.w_o.value, d_logits)?;
    params.w_o.accumulate(&g_o.dw);
    params.b_o.accumulate(&g_o.db);
    let d_act = Activation::Tanh.backward(&fwd.hidden, &g_o.dx)?;
    let g_h = affine_backward(&fwd.projected, &params.w_h.value, &d_act)?;
    params.w_h.accumulate(&g_h.dw);
    params.b_h.accumulate(&g_h.db);
    params.w_proj.accumulate(&fwd.pre.t_matmul(&g_h.dx));
    if let Some((f, b)) = &mut params.lstm {
        let d_pre = g_h.dx.matmul_t(&params.w_proj.value);
        for (r, cache) in fwd.caches.iter().enumerate() {
            if let EncodeCache::Lstm {
                cache,
                argmax,
                steps,
            } = cache
            {
                let d_states = max_pool_time_backward(argmax, *steps, &d_pre.row_matrix(r))?;
                bilstm_backward(cache, f, b, &d_states)?;
            }
        }
    }
    Ok(())
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Class probabilities and the argmax label (lowest index on exact ties).
pub fn classify(
    config: &ClassifierConfig,
    params: &ClassifierParams,
    input: &EncoderInput,
) -> Result<(usize, Vec<f64>)> {
    Ok(predict(config, params, std::slice::from_ref(input))?.remove(0))
}

pub fn predict(
    config: &ClassifierConfig,
    params: &ClassifierParams,
    inputs: &[EncoderInput],
) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut out = Vec::with_capacity(inputs.len());
    for chunk in inputs.chunks(256) {
        let refs: Vec<&EncoderInput> = chunk.iter().collect();
        let probs = softmax(&forward(config, params, &refs)?.logits);
        for r in 0..probs.rows() {
            let p = probs.row(r).to_vec();
            out.push((argmax(&p), p));
        }
    }
    Ok(out)
}

pub fn accuracy(
    config: &ClassifierConfig,
    params: &ClassifierParams,
    data: &[LabeledInput],
) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::validation("accuracy of an empty set"));
    }
    let inputs: Vec<EncoderInput> = data.iter().map(|d| d.input.clone()).collect();
    let preds = predict(config, params, &inputs)?;
    let hits = preds
        .iter()
        .zip(data)
        .filter(|((l, _), d)| *l == d.label)
        .count();
    Ok(hits as f64 / data.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxEpochs,
    Patience,
    NonFinite(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub initial_dev_accuracy: f64,
    pub best_epoch: usize,
    pub best_dev_accuracy: f64,
    pub stop: StopReason,
    pub epochs: Vec<EpochLog>,
}

impl TrainingLog {
    /// One JSON object per epoch.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for e in &self.epochs {
            serde_json::to_writer(&mut w, e)?;
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Mini-batch Adadelta training with best-dev checkpoint selection.
///
/// A non-finite loss stops training; the best parameters so far are returned
/// and the log records [`StopReason::NonFinite`].
pub fn train_classifier(
    train: &[LabeledInput],
    dev: &[LabeledInput],
    config: &ClassifierConfig,
) -> Result<(ClassifierParams, TrainingLog)> {
    config.validate()?;
    if train.is_empty() || dev.is_empty() {
        return Err(Error::validation("training and dev sets must be non-empty"));
    }
    if let Some(bad) = train.iter().chain(dev).find(|d| d.label >= config.num_classes) {
        return Err(Error::validation(format!(
            "label {} is out of range for {} classes",
            bad.label, config.num_classes
        )));
    }
    let d = train[0].input.dim();
    let mut params = ClassifierParams::init(config, d, &mut derived(config.seed, 0))?;
    let initial = accuracy(config, &params, dev)?;
    let mut log = TrainingLog {
        initial_dev_accuracy: initial,
        best_epoch: 0,
        best_dev_accuracy: initial,
        stop: StopReason::MaxEpochs,
        epochs: Vec::new(),
    };
    let mut best = params.clone();
    let mut stale = 0;
    let mut order: Vec<usize> = (0..train.len()).collect();
    'epochs: for epoch in 1..=config.max_epochs {
        order.sort_unstable();
        order.shuffle(&mut derived(config.seed, epoch as u64));
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.optimizer.batch_size) {
            let inputs: Vec<&EncoderInput> = batch.iter().map(|&i| &train[i].input).collect();
            let labels: Vec<usize> = batch.iter().map(|&i| train[i].label).collect();
            let fwd = forward(config, &params, &inputs)?;
            let (loss, d_logits) = softmax_xent(&fwd.logits, &labels)?;
            if !loss.is_finite() {
                log.stop = StopReason::NonFinite(format!("loss {loss} in epoch {epoch}"));
                break 'epochs;
            }
            loss_sum += loss * batch.len() as f64;
            backward(&mut params, fwd, &d_logits)?;
            if let Err(e) = adadelta_step(&mut params.parameters_mut(), &config.optimizer) {
                log.stop = StopReason::NonFinite(e.to_string());
                break 'epochs;
            }
        }
        let dev_accuracy = accuracy(config, &params, dev)?;
        log.epochs.push(EpochLog {
            epoch,
            train_loss: loss_sum / train.len() as f64,
            dev_accuracy,
        });
        log::debug!("epoch {epoch}: loss {:.6} dev {dev_accuracy:.4}", loss_sum / train.len() as f64);
        if dev_accuracy > log.best_dev_accuracy {
            log.best_dev_accuracy = dev_accuracy;
            log.best_epoch = epoch;
            best = params.clone();
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                log.stop = StopReason::Patience;
                break;
            }
        }
    }
    if let StopReason::NonFinite(why) = &log.stop {
        log::warn!("training aborted: {why}; returning epoch {} parameters", log.best_epoch);
    }
    best.zero_grad();
    for p in best.parameters_mut() {
        p.accum_sq_grad.fill(0.0);
        p.accum_sq_update.fill(0.0);
    }
    Ok((best, log))
}

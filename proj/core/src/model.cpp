#include "titlegen/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "titlegen/errors.hpp"

namespace titlegen {

void ModelConfig::validate() const {
  if (vocab_size < static_cast<int64_t>(Vocabulary::kNumSpecials)) {
    throw ConfigError("model: vocab_size must cover the special tokens");
  }
  if (d_model <= 0 || n_heads <= 0 || d_model % n_heads != 0) {
    throw ConfigError("model: d_model must be a positive multiple of n_heads");
  }
  if (n_encoder_layers <= 0 || n_decoder_layers <= 0 || feedforward_dim <= 0) {
    throw ConfigError("model: layer counts and feedforward_dim must be positive");
  }
  if (dropout_prob < 0.0 || dropout_prob >= 1.0) {
    throw ConfigError("model: dropout_prob must lie in [0, 1)");
  }
  if (max_source_len < 2 || max_target_len < 2) {
    throw ConfigError("model: sequence maxima must allow the wrapper tokens");
  }
  if (label_smoothing < 0.0 || label_smoothing >= 1.0) {
    throw ConfigError("model: label_smoothing must lie in [0, 1)");
  }
}

ExtendedVocab ExtendedVocab::build(const TokenSequence& source, int64_t vocab_size) {
  ExtendedVocab ext;
  ext.base_size = vocab_size;
  ext.position_ext_ids.resize(source.size(), -1);
  for (size_t i = 0; i < source.size(); ++i) {
    int64_t id = source.ids[i];
    if (id == Vocabulary::kPad || id == Vocabulary::kCls || id == Vocabulary::kSep) {
      continue;
    }
    if (id != Vocabulary::kUnk) {
      ext.position_ext_ids[i] = id;
    } else {
      const std::string& surface = source.tokens[i];
      auto it = ext.oov_to_ext.find(surface);
      int64_t ext_id;
      if (it == ext.oov_to_ext.end()) {
        ext_id = ext.base_size + static_cast<int64_t>(ext.oov_tokens.size());
        ext.oov_tokens.push_back(surface);
        ext.oov_to_ext.emplace(surface, ext_id);
      } else {
        ext_id = it->second;
      }
      ext.position_ext_ids[i] = ext_id;
    }
    ext.copyable_positions += 1;
  }
  return ext;
}

int64_t ExtendedVocab::ext_id_for(const std::string& surface, int64_t vocab_id) const {
  if (vocab_id != Vocabulary::kUnk) return vocab_id;
  auto it = oov_to_ext.find(surface);
  return it == oov_to_ext.end() ? Vocabulary::kUnk : it->second;
}

std::string ExtendedVocab::token_of(int64_t ext_id, const Vocabulary& vocab) const {
  if (ext_id < base_size) return vocab.token_of(ext_id);
  int64_t idx = ext_id - base_size;
  if (idx >= static_cast<int64_t>(oov_tokens.size())) {
    throw Error("extended id out of range: " + std::to_string(ext_id));
  }
  return oov_tokens[static_cast<size_t>(idx)];
}

Tensor mixture_distribution(const Tensor& copy_attention, const Tensor& p_vocab,
                            const Tensor& p_copy,
                            const std::vector<int64_t>& position_ext_ids,
                            int64_t extended_size) {
  if (copy_attention.numel() != static_cast<int64_t>(position_ext_ids.size())) {
    throw ShapeMismatch("mixture: attention " + shape_string(copy_attention.shape()) +
                        " vs " + std::to_string(position_ext_ids.size()) +
                        " source positions");
  }
  int64_t vocab_size = p_vocab.numel();
  if (extended_size < vocab_size) {
    throw ShapeMismatch("mixture: extended size smaller than vocabulary");
  }
  Tensor one = Tensor::scalar(1.0);
  Tensor keep = ops::sub(one, p_copy);
  Tensor flat_vocab =
      p_vocab.rank() == 1 ? p_vocab : ops::reshape(p_vocab, {vocab_size});
  Tensor base = ops::mul(flat_vocab, keep);
  if (extended_size > vocab_size) {
    base = ops::concat({base, Tensor::zeros({extended_size - vocab_size})}, 0);
  }
  Tensor flat_attn = copy_attention.rank() == 1
                         ? copy_attention
                         : ops::reshape(copy_attention, {copy_attention.numel()});
  Tensor copy_part = ops::scatter_add(ops::mul(flat_attn, p_copy),
                                      position_ext_ids, extended_size);
  return ops::add(base, copy_part);
}

Tensor mixture_distribution(const Tensor& copy_attention, const Tensor& p_vocab,
                            const Tensor& p_copy,
                            const std::vector<std::string>& source_tokens,
                            const Vocabulary& vocab) {
  std::vector<int64_t> position_ext_ids(source_tokens.size());
  std::unordered_map<std::string, int64_t> oov;
  int64_t next_ext = vocab.size();
  for (size_t i = 0; i < source_tokens.size(); ++i) {
    int64_t id = vocab.id_of(source_tokens[i]);
    if (id != Vocabulary::kUnk) {
      position_ext_ids[i] = id;
    } else {
      auto [it, inserted] = oov.try_emplace(source_tokens[i], next_ext);
      if (inserted) ++next_ext;
      position_ext_ids[i] = it->second;
    }
  }
  return mixture_distribution(copy_attention, p_vocab, p_copy, position_ext_ids,
                              next_ext);
}

TitleModel::TitleModel(ModelConfig cfg)
    : cfg_(cfg),
      store_(cfg.seed),
      dropout_rng_(cfg.seed ^ 0x9e3779b97f4a7c15ull) {
  cfg_.validate();
  int64_t d = cfg_.d_model;
  token_embedding_ = store_.normal("embedding.token", {cfg_.vocab_size, d});
  pos_src_ = store_.normal("embedding.pos_src", {cfg_.max_source_len, d});
  pos_tgt_ = store_.normal("embedding.pos_tgt", {cfg_.max_target_len, d});

  for (int i = 0; i < cfg_.n_encoder_layers; ++i) {
    std::string base = "encoder." + std::to_string(i);
    EncoderLayerParams layer{
        MultiHeadAttention::create(store_, base + ".attn", d, cfg_.n_heads),
        FeedForward::create(store_, base + ".ff", d, cfg_.feedforward_dim),
        LayerNorm::create(store_, base + ".ln1", d),
        LayerNorm::create(store_, base + ".ln2", d),
    };
    encoder_layers_.push_back(std::move(layer));
  }
  for (int i = 0; i < cfg_.n_decoder_layers; ++i) {
    std::string base = "decoder." + std::to_string(i);
    DecoderLayerParams layer{
        MultiHeadAttention::create(store_, base + ".self", d, cfg_.n_heads),
        MultiHeadAttention::create(store_, base + ".cross", d, cfg_.n_heads),
        FeedForward::create(store_, base + ".ff", d, cfg_.feedforward_dim),
        LayerNorm::create(store_, base + ".ln1", d),
        LayerNorm::create(store_, base + ".ln2", d),
        LayerNorm::create(store_, base + ".ln3", d),
    };
    decoder_layers_.push_back(std::move(layer));
  }
  copy_query_ = Linear::create(store_, "copy.query", 2 * d, d);
  copy_key_ = Linear::create(store_, "copy.key", d, d);
  vocab_proj_ = Linear::create(store_, "output.vocab", 2 * d, cfg_.vocab_size);
  copy_gate_ = Linear::create(store_, "copy.gate", 3 * d, 1);
}

std::vector<std::pair<std::string, Tensor>>& TitleModel::parameters() {
  return store_.entries();
}
const std::vector<std::pair<std::string, Tensor>>& TitleModel::parameters() const {
  return store_.entries();
}

Tensor TitleModel::dropout(const Tensor& x) {
  return ops::dropout(x, cfg_.dropout_prob, dropout_rng_, training_);
}

namespace {
std::vector<int64_t> iota_ids(int64_t n) {
  std::vector<int64_t> ids(static_cast<size_t>(n));
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}
}  // namespace

EncoderOutput TitleModel::encode(const TokenSequence& source, size_t pad_to) {
  if (source.size() < 2 || source.ids.front() != Vocabulary::kCls ||
      source.ids.back() != Vocabulary::kSep) {
    throw Error("encode: source must be wrapped as [CLS] ... [SEP]");
  }
  TokenSequence padded = source;
  while (padded.size() < pad_to) {
    padded.tokens.push_back(Vocabulary::specials()[Vocabulary::kPad]);
    padded.ids.push_back(Vocabulary::kPad);
  }
  int64_t length = static_cast<int64_t>(padded.size());
  if (length > cfg_.max_source_len) {
    throw SequenceTooLong("encode: source length " + std::to_string(length) +
                          " exceeds max_source_len " +
                          std::to_string(cfg_.max_source_len));
  }

  EncoderOutput out;
  out.pad_mask.assign(padded.size(), 0);
  for (size_t i = source.size(); i < padded.size(); ++i) out.pad_mask[i] = 1;

  Tensor x = ops::add(ops::embedding_lookup(token_embedding_, padded.ids),
                      ops::embedding_lookup(pos_src_, iota_ids(length)));
  for (const auto& layer : encoder_layers_) {
    Tensor attn = layer.attn(x, x, out.pad_mask, /*causal=*/false);
    x = layer.ln1(ops::add(x, dropout(attn)));
    Tensor ff = layer.ff(x);
    x = layer.ln2(ops::add(x, dropout(ff)));
  }
  out.hidden = x;
  out.extended = ExtendedVocab::build(padded, cfg_.vocab_size);
  out.source = std::move(padded);
  return out;
}

Tensor TitleModel::decoder_states(const EncoderOutput& enc,
                                  const std::vector<int64_t>& ids) {
  int64_t length = static_cast<int64_t>(ids.size());
  if (length == 0 || ids.front() != Vocabulary::kSos) {
    throw Error("decoder: prefix must start with SOS");
  }
  if (length > cfg_.max_target_len) {
    throw SequenceTooLong("decoder: prefix length " + std::to_string(length) +
                          " exceeds max_target_len " +
                          std::to_string(cfg_.max_target_len));
  }
  Tensor x = ops::add(ops::embedding_lookup(token_embedding_, ids),
                      ops::embedding_lookup(pos_tgt_, iota_ids(length)));
  for (const auto& layer : decoder_layers_) {
    Tensor self = layer.self_attn(x, x, {}, /*causal=*/true);
    x = layer.ln1(ops::add(x, dropout(self)));
    Tensor cross = layer.cross_attn(x, enc.hidden, enc.pad_mask, /*causal=*/false);
    x = layer.ln2(ops::add(x, dropout(cross)));
    Tensor ff = layer.ff(x);
    x = layer.ln3(ops::add(x, dropout(ff)));
  }
  return x;
}

TitleModel::CopyHeadRows TitleModel::copy_head(const EncoderOutput& enc,
                                               const Tensor& states,
                                               const Tensor& token_embeddings) {
  int64_t lt = states.dim(0);
  int64_t ls = enc.hidden.dim(0);
  int64_t d = cfg_.d_model;

  Tensor queries = copy_query_(ops::concat({states, token_embeddings}, 1));
  Tensor keys = copy_key_(enc.hidden);
  Tensor scores = ops::scale(ops::matmul(queries, ops::transpose(keys)),
                             1.0 / std::sqrt(static_cast<double>(d)));

  std::vector<uint8_t> ctx_mask(static_cast<size_t>(lt * ls), 0);
  std::vector<uint8_t> copy_mask(static_cast<size_t>(lt * ls), 0);
  for (int64_t j = 0; j < ls; ++j) {
    bool pad = enc.pad_mask[static_cast<size_t>(j)] != 0;
    bool uncopyable = enc.extended.position_ext_ids[static_cast<size_t>(j)] < 0;
    for (int64_t i = 0; i < lt; ++i) {
      if (pad) ctx_mask[static_cast<size_t>(i * ls + j)] = 1;
      if (uncopyable) copy_mask[static_cast<size_t>(i * ls + j)] = 1;
    }
  }

  CopyHeadRows rows;
  // CLS/SEP stay attendable for the context; the copy distribution
  // renormalizes over copyable positions so the mixture still sums to 1.
  rows.ctx_attn = ops::softmax(ops::masked_fill(scores, ctx_mask, -1e30), 1);
  rows.context = ops::matmul(rows.ctx_attn, enc.hidden);
  rows.p_vocab = ops::softmax(vocab_proj_(ops::concat({rows.context, states}, 1)), 1);
  if (cfg_.copy_enabled && enc.extended.copyable_positions > 0) {
    rows.copy_attn = ops::softmax(ops::masked_fill(scores, copy_mask, -1e30), 1);
    rows.p_copy = ops::sigmoid(copy_gate_(
        ops::concat({rows.context, states, token_embeddings}, 1)));
  }
  return rows;
}

StepOutput TitleModel::decode_step(const EncoderOutput& enc,
                                   const std::vector<int64_t>& prefix_ids) {
  Tensor token_emb = ops::embedding_lookup(token_embedding_, prefix_ids);
  Tensor states = decoder_states(enc, prefix_ids);
  CopyHeadRows rows = copy_head(enc, states, token_emb);

  int64_t last = states.dim(0) - 1;
  int64_t ls = enc.hidden.dim(0);

  StepOutput out;
  out.v_next = ops::slice(states, 0, last, 1);
  out.context_attention = ops::reshape(ops::slice(rows.ctx_attn, 0, last, 1), {ls});
  out.context = ops::slice(rows.context, 0, last, 1);
  out.p_vocab =
      ops::reshape(ops::slice(rows.p_vocab, 0, last, 1), {cfg_.vocab_size});
  bool copying = cfg_.copy_enabled && enc.extended.copyable_positions > 0;
  if (copying) {
    out.copy_attention = ops::reshape(ops::slice(rows.copy_attn, 0, last, 1), {ls});
    out.p_copy = ops::reshape(ops::slice(rows.p_copy, 0, last, 1), {1});
    out.mixture =
        mixture_distribution(out.copy_attention, out.p_vocab, out.p_copy,
                             enc.extended.position_ext_ids, enc.extended.size());
  } else {
    out.mixture = out.p_vocab;
  }
  return out;
}

Tensor TitleModel::nll_loss(const TokenSequence& source, const TokenSequence& target) {
  if (target.size() < 2 || target.ids.front() != Vocabulary::kSos ||
      target.ids.back() != Vocabulary::kEos) {
    throw Error("nll_loss: target must be wrapped as [SOS] ... [EOS]");
  }
  EncoderOutput enc = encode(source);

  std::vector<int64_t> input_ids(target.ids.begin(), target.ids.end() - 1);
  Tensor token_emb = ops::embedding_lookup(token_embedding_, input_ids);
  Tensor states = decoder_states(enc, input_ids);
  CopyHeadRows rows = copy_head(enc, states, token_emb);

  int64_t steps = static_cast<int64_t>(input_ids.size());
  int64_t ls = enc.hidden.dim(0);
  int64_t v = cfg_.vocab_size;
  bool copying = cfg_.copy_enabled && enc.extended.copyable_positions > 0;

  // ext id -> flat copy-attention indices, per step offset added below.
  std::unordered_map<int64_t, std::vector<int64_t>> copy_positions;
  if (copying) {
    for (size_t i = 0; i < enc.extended.position_ext_ids.size(); ++i) {
      int64_t ext_id = enc.extended.position_ext_ids[i];
      if (ext_id >= 0) copy_positions[ext_id].push_back(static_cast<int64_t>(i));
    }
  }

  Tensor one = Tensor::scalar(1.0);
  std::vector<Tensor> position_losses;
  position_losses.reserve(static_cast<size_t>(steps));
  for (int64_t k = 0; k < steps; ++k) {
    const std::string& surface = target.tokens[static_cast<size_t>(k + 1)];
    int64_t vocab_id = target.ids[static_cast<size_t>(k + 1)];

    Tensor prob;
    if (!copying) {
      prob = ops::gather(rows.p_vocab, {k * v + vocab_id});
    } else {
      int64_t ext_id = enc.extended.ext_id_for(surface, vocab_id);
      Tensor p_copy_k = ops::gather(rows.p_copy, {k});
      Tensor vocab_term, copy_term;
      if (ext_id < v) {
        Tensor pv = ops::gather(rows.p_vocab, {k * v + ext_id});
        vocab_term = ops::mul(ops::sub(one, p_copy_k), pv);
      }
      auto it = copy_positions.find(ext_id);
      if (it != copy_positions.end()) {
        std::vector<int64_t> flat;
        flat.reserve(it->second.size());
        for (int64_t i : it->second) flat.push_back(k * ls + i);
        Tensor attn_sum = ops::sum(ops::gather(rows.copy_attn, flat));
        copy_term = ops::mul(p_copy_k, attn_sum);
      }
      if (vocab_term.defined() && copy_term.defined()) {
        prob = ops::add(vocab_term, copy_term);
      } else if (vocab_term.defined()) {
        prob = vocab_term;
      } else if (copy_term.defined()) {
        prob = copy_term;
      } else {
        // Unreachable: ext_id_for falls back to UNK which is in-vocabulary.
        prob = ops::gather(rows.p_vocab, {k * v + Vocabulary::kUnk});
      }
    }
    Tensor log_p = ops::log(ops::clamp_min(prob, 1e-12));
    Tensor loss_k = ops::neg(log_p);
    if (cfg_.label_smoothing > 0.0) {
      Tensor row = ops::slice(rows.p_vocab, 0, k, 1);
      Tensor smooth = ops::neg(ops::mean(ops::log(ops::clamp_min(row, 1e-12))));
      loss_k = ops::add(ops::scale(loss_k, 1.0 - cfg_.label_smoothing),
                        ops::scale(smooth, cfg_.label_smoothing));
    }
    position_losses.push_back(loss_k);
  }
  return ops::mean(ops::concat(position_losses, 0));
}

std::vector<double> TitleModel::next_token_distribution(
    const EncoderOutput& enc, const std::vector<int64_t>& prefix_ids) {
  NoGradGuard no_grad;
  bool was_training = training_;
  training_ = false;
  StepOutput out = decode_step(enc, prefix_ids);
  training_ = was_training;
  return out.mixture.data();
}

ModelScorer::ModelScorer(TitleModel& model, const Vocabulary& vocab,
                         EncoderOutput enc)
    : model_(&model), vocab_(&vocab), enc_(std::move(enc)) {}

int64_t ModelScorer::extended_size() const {
  return model_->config().copy_enabled ? enc_.extended.size()
                                       : model_->config().vocab_size;
}

std::string ModelScorer::token_of(int64_t ext_id) const {
  return enc_.extended.token_of(ext_id, *vocab_);
}

std::vector<double> ModelScorer::next_log_probs(
    const std::vector<int64_t>& prefix_ext_ids) {
  std::vector<int64_t> ids;
  ids.reserve(prefix_ext_ids.size() + 1);
  ids.push_back(Vocabulary::kSos);
  for (int64_t ext : prefix_ext_ids) {
    ids.push_back(ext < model_->config().vocab_size ? ext : Vocabulary::kUnk);
  }
  std::vector<double> dist = model_->next_token_distribution(enc_, ids);
  for (double& p : dist) p = std::log(p);
  return dist;
}

}  // namespace titlegen

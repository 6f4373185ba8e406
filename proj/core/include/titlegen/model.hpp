#pragma once

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "titlegen/decode.hpp"
#include "titlegen/nn.hpp"
#include "titlegen/tensor.hpp"
#include "titlegen/tokenizer.hpp"

namespace titlegen {

struct ModelConfig {
  int64_t vocab_size = 0;
  int64_t d_model = 64;
  int n_heads = 4;
  int n_encoder_layers = 2;
  int n_decoder_layers = 2;
  int64_t feedforward_dim = 256;
  double dropout_prob = 0.1;
  int64_t max_source_len = 256;
  int64_t max_target_len = 32;
  bool copy_enabled = true;
  double label_smoothing = 0.0;
  uint64_t seed = 0;

  void validate() const;
};

/// Per-example copy vocabulary: out-of-vocabulary source surface tokens get
/// temporary ids appended after the base vocabulary, in order of first
/// occurrence. CLS/SEP/PAD positions are not copyable. OOV-ness is read off
/// the sequence ids (UNK-mapped), so no Vocabulary handle is needed here.
struct ExtendedVocab {
  int64_t base_size = 0;
  std::vector<std::string> oov_tokens;
  std::vector<int64_t> position_ext_ids;  // per source position; -1 = not copyable
  std::unordered_map<std::string, int64_t> oov_to_ext;
  size_t copyable_positions = 0;

  static ExtendedVocab build(const TokenSequence& source, int64_t vocab_size);

  int64_t size() const { return base_size + static_cast<int64_t>(oov_tokens.size()); }
  /// Extended id of a target token given its (possibly UNK) vocabulary id:
  /// the vocabulary id itself, this source's OOV extended id, or UNK.
  int64_t ext_id_for(const std::string& surface, int64_t vocab_id) const;
  std::string token_of(int64_t ext_id, const Vocabulary& vocab) const;
};

struct EncoderOutput {
  Tensor hidden;  // (source_len, d_model), CLS/SEP rows included
  TokenSequence source;
  std::vector<uint8_t> pad_mask;  // 1 = padding position
  ExtendedVocab extended;
};

/// Outputs of one decoding step (the last target position).
struct StepOutput {
  Tensor v_next;             // (1, d_model)
  Tensor copy_attention;     // (source_len): attention renormalized over copyable positions
  Tensor context_attention;  // (source_len): attention over all non-pad positions
  Tensor context;            // (1, d_model)
  Tensor p_vocab;            // (vocab_size)
  Tensor p_copy;             // (1); undefined when the copy layer is disabled
  Tensor mixture;            // (extended size); equals p_vocab when copy is disabled
};

/// P(t) = p_copy * sum_{i: x_i = t} a_i + (1 - p_copy) * P_vocab(t) over the
/// extended vocabulary. position_ext_ids aligns with copy_attention; index -1
/// drops a position. With p_copy = 0 the result equals p_vocab exactly.
Tensor mixture_distribution(const Tensor& copy_attention, const Tensor& p_vocab,
                            const Tensor& p_copy,
                            const std::vector<int64_t>& position_ext_ids,
                            int64_t extended_size);

/// Convenience overload: every source position is copyable and the extended
/// vocabulary is derived from the given surface tokens.
Tensor mixture_distribution(const Tensor& copy_attention, const Tensor& p_vocab,
                            const Tensor& p_copy,
                            const std::vector<std::string>& source_tokens,
                            const Vocabulary& vocab);

/// Transformer encoder-decoder with a copy attention layer on top. The
/// encoder is bidirectional; the decoder is causal; the copy layer mixes a
/// pointing distribution over source positions into the output distribution.
class TitleModel {
 public:
  explicit TitleModel(ModelConfig cfg);

  const ModelConfig& config() const { return cfg_; }
  std::vector<std::pair<std::string, Tensor>>& parameters();
  const std::vector<std::pair<std::string, Tensor>>& parameters() const;

  void set_training(bool training) { training_ = training; }
  bool training() const { return training_; }

  /// Runs the encoder. pad_to extends the sequence with PAD tokens (masked
  /// out of attention) up to the given length. Throws SequenceTooLong.
  EncoderOutput encode(const TokenSequence& source, size_t pad_to = 0);

  /// One decoding step given the gold/generated prefix (vocabulary ids,
  /// starting with SOS). Throws SequenceTooLong.
  StepOutput decode_step(const EncoderOutput& enc,
                         const std::vector<int64_t>& prefix_ids);

  /// Teacher-forced mean negative log-likelihood of the wrapped target
  /// ([SOS] ... [EOS]) given the source.
  Tensor nll_loss(const TokenSequence& source, const TokenSequence& target);

  /// Distribution over the extended vocabulary for the next token after the
  /// prefix; plain values, no tape. Used by decoding.
  std::vector<double> next_token_distribution(const EncoderOutput& enc,
                                              const std::vector<int64_t>& prefix_ids);

 private:
  struct DecoderLayerParams {
    MultiHeadAttention self_attn;
    MultiHeadAttention cross_attn;
    FeedForward ff;
    LayerNorm ln1, ln2, ln3;
  };
  struct EncoderLayerParams {
    MultiHeadAttention attn;
    FeedForward ff;
    LayerNorm ln1, ln2;
  };

  /// Decoder hidden states for all positions of the input prefix.
  Tensor decoder_states(const EncoderOutput& enc, const std::vector<int64_t>& ids);

  struct CopyHeadRows {
    Tensor copy_attn;  // (L_t, L_s)
    Tensor ctx_attn;   // (L_t, L_s)
    Tensor context;    // (L_t, d)
    Tensor p_vocab;    // (L_t, V)
    Tensor p_copy;     // (L_t, 1)
  };
  CopyHeadRows copy_head(const EncoderOutput& enc, const Tensor& states,
                         const Tensor& token_embeddings);

  Tensor dropout(const Tensor& x);

  ModelConfig cfg_;
  ParamStore store_;
  bool training_ = false;
  std::mt19937_64 dropout_rng_;

  Tensor token_embedding_;  // shared by encoder and decoder inputs
  Tensor pos_src_;
  Tensor pos_tgt_;
  std::vector<EncoderLayerParams> encoder_layers_;
  std::vector<DecoderLayerParams> decoder_layers_;
  Linear copy_query_;   // (2 d_model -> d_model), query = [v; e]
  Linear copy_key_;     // (d_model -> d_model) over H
  Linear vocab_proj_;   // (2 d_model -> V) over [context; v]
  Linear copy_gate_;    // (3 d_model -> 1) over [context; v; e]
};

/// Adapts a frozen model + encoded source to the decoding interface.
class ModelScorer final : public StepScorer {
 public:
  ModelScorer(TitleModel& model, const Vocabulary& vocab, EncoderOutput enc);

  int64_t extended_size() const override;
  std::string token_of(int64_t ext_id) const override;
  const ExtendedVocab& extended() const { return enc_.extended; }

  /// log P over the extended vocabulary given previously generated extended
  /// ids (SOS is implied; copied OOV tokens are fed back as UNK).
  std::vector<double> next_log_probs(
      const std::vector<int64_t>& prefix_ext_ids) override;

 private:
  TitleModel* model_;
  const Vocabulary* vocab_;
  EncoderOutput enc_;
};

}  // namespace titlegen

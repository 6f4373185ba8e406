#include "titlegen/config.hpp"

#include <cstdlib>

#include <json.hpp>

#include "titlegen/errors.hpp"
#include "titlegen/util.hpp"

namespace titlegen {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

void parse_filter(const json& j, FilterConfig& f) {
  maybe(j, "min_score", f.min_score);
  maybe(j, "require_accepted", f.require_accepted);
  maybe(j, "require_open", f.require_open);
  if (j.contains("allowed_tags")) {
    auto v = j.at("allowed_tags").get<std::vector<std::string>>();
    f.allowed_tags = {v.begin(), v.end()};
  }
  if (j.contains("excluded_tags")) {
    auto v = j.at("excluded_tags").get<std::vector<std::string>>();
    f.excluded_tags = {v.begin(), v.end()};
  }
  maybe(j, "require_bimodal", f.require_bimodal);
  maybe(j, "interrogative_constraint", f.interrogative_constraint);
  maybe(j, "max_body_tokens", f.max_body_tokens);
  maybe(j, "max_title_tokens", f.max_title_tokens);
  maybe(j, "code_only", f.code_only);
}

json filter_json(const FilterConfig& f) {
  ordered_json j;
  j["min_score"] = f.min_score;
  j["require_accepted"] = f.require_accepted;
  j["require_open"] = f.require_open;
  j["allowed_tags"] = std::vector<std::string>(f.allowed_tags.begin(),
                                               f.allowed_tags.end());
  j["excluded_tags"] = std::vector<std::string>(f.excluded_tags.begin(),
                                                f.excluded_tags.end());
  j["require_bimodal"] = f.require_bimodal;
  j["interrogative_constraint"] = f.interrogative_constraint;
  j["max_body_tokens"] = f.max_body_tokens;
  j["max_title_tokens"] = f.max_title_tokens;
  j["code_only"] = f.code_only;
  return j;
}

}  // namespace

RunConfig RunConfig::from_json(const std::string& text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    throw ConfigError("config is not a JSON object");
  }
  RunConfig cfg;
  if (j.contains("paths")) {
    const auto& p = j.at("paths");
    maybe(p, "corpus", cfg.corpus_path);
    maybe(p, "workdir", cfg.workdir);
  }
  if (j.contains("filter")) parse_filter(j.at("filter"), cfg.filter);
  if (j.contains("split")) {
    const auto& s = j.at("split");
    maybe(s, "validation_count", cfg.split.validation_count);
    maybe(s, "test_count", cfg.split.test_count);
  }
  if (j.contains("vocab")) {
    const auto& v = j.at("vocab");
    maybe(v, "max_size", cfg.vocab.max_size);
    maybe(v, "min_count", cfg.vocab.min_count);
  }
  if (j.contains("model")) {
    const auto& m = j.at("model");
    maybe(m, "d_model", cfg.model.d_model);
    maybe(m, "n_heads", cfg.model.n_heads);
    maybe(m, "n_encoder_layers", cfg.model.n_encoder_layers);
    maybe(m, "n_decoder_layers", cfg.model.n_decoder_layers);
    maybe(m, "feedforward_dim", cfg.model.feedforward_dim);
    maybe(m, "dropout_prob", cfg.model.dropout_prob);
    maybe(m, "max_source_len", cfg.model.max_source_len);
    maybe(m, "max_target_len", cfg.model.max_target_len);
    maybe(m, "copy_enabled", cfg.model.copy_enabled);
    maybe(m, "label_smoothing", cfg.model.label_smoothing);
  }
  if (j.contains("trainer")) {
    const auto& t = j.at("trainer");
    maybe(t, "epochs", cfg.trainer.epochs);
    maybe(t, "batch_size", cfg.trainer.batch_size);
    if (t.contains("max_steps")) cfg.trainer.max_steps = t.at("max_steps").get<int64_t>();
    maybe(t, "lr", cfg.trainer.lr);
    maybe(t, "beta1", cfg.trainer.beta1);
    maybe(t, "beta2", cfg.trainer.beta2);
    maybe(t, "epsilon", cfg.trainer.epsilon);
    maybe(t, "warmup_fraction", cfg.trainer.warmup_fraction);
    maybe(t, "grad_clip", cfg.trainer.grad_clip);
    maybe(t, "weight_decay", cfg.trainer.weight_decay);
  }
  if (j.contains("decode")) {
    const auto& d = j.at("decode");
    maybe(d, "beam_size", cfg.decode.beam_size);
    maybe(d, "max_len", cfg.decode.max_len);
    maybe(d, "length_normalize", cfg.decode.length_normalize);
  }
  if (j.contains("metrics")) {
    const auto& m = j.at("metrics");
    maybe(m, "lowercase", cfg.metrics.lowercase);
    maybe(m, "strict_rouge_l", cfg.metrics.strict_rouge_l);
  }
  maybe(j, "fraction", cfg.fraction);
  maybe(j, "seed", cfg.seed);
  cfg.model.seed = cfg.seed;
  return cfg;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  return from_json(read_file(path));
}

std::string RunConfig::to_json() const {
  ordered_json j;
  j["paths"] = ordered_json{{"corpus", corpus_path}, {"workdir", workdir}};
  j["filter"] = filter_json(filter);
  j["split"] = ordered_json{{"validation_count", split.validation_count},
                            {"test_count", split.test_count}};
  j["vocab"] = ordered_json{{"max_size", vocab.max_size},
                            {"min_count", vocab.min_count}};
  ordered_json m;
  m["d_model"] = model.d_model;
  m["n_heads"] = model.n_heads;
  m["n_encoder_layers"] = model.n_encoder_layers;
  m["n_decoder_layers"] = model.n_decoder_layers;
  m["feedforward_dim"] = model.feedforward_dim;
  m["dropout_prob"] = model.dropout_prob;
  m["max_source_len"] = model.max_source_len;
  m["max_target_len"] = model.max_target_len;
  m["copy_enabled"] = model.copy_enabled;
  m["label_smoothing"] = model.label_smoothing;
  j["model"] = m;
  ordered_json t;
  t["epochs"] = trainer.epochs;
  t["batch_size"] = trainer.batch_size;
  if (trainer.max_steps) t["max_steps"] = *trainer.max_steps;
  t["lr"] = trainer.lr;
  t["beta1"] = trainer.beta1;
  t["beta2"] = trainer.beta2;
  t["epsilon"] = trainer.epsilon;
  t["warmup_fraction"] = trainer.warmup_fraction;
  t["grad_clip"] = trainer.grad_clip;
  t["weight_decay"] = trainer.weight_decay;
  j["trainer"] = t;
  j["decode"] = ordered_json{{"beam_size", decode.beam_size},
                             {"max_len", decode.max_len},
                             {"length_normalize", decode.length_normalize}};
  j["metrics"] = ordered_json{{"lowercase", metrics.lowercase},
                              {"strict_rouge_l", metrics.strict_rouge_l}};
  j["fraction"] = fraction;
  j["seed"] = seed;
  return j.dump(2);
}

uint64_t RunConfig::content_hash() const { return fnv1a64(to_json()); }

void RunConfig::validate() const {
  if (filter.max_body_tokens <= filter.max_title_tokens ||
      filter.max_title_tokens == 0) {
    throw ConfigError("filter: max_body_tokens must exceed max_title_tokens > 0");
  }
  if (fraction != 1 && fraction != 2 && fraction != 4 && fraction != 8) {
    throw ConfigError("fraction must be one of 1, 2, 4, 8");
  }
  if (vocab.max_size == 0) {
    throw ConfigError("vocab.max_size must be positive");
  }
  if (decode.max_len + 1 > static_cast<size_t>(model.max_target_len)) {
    throw ConfigError("decode.max_len must leave room for SOS within max_target_len");
  }
  // Model shape checks run on a throwaway copy with a plausible vocab size.
  ModelConfig m = model;
  m.vocab_size = static_cast<int64_t>(Vocabulary::kNumSpecials) + 1;
  m.validate();
}

void RunConfig::apply_env_overrides() {
  if (const char* corpus = std::getenv("TITLEGEN_CORPUS")) corpus_path = corpus;
  if (const char* workdir = std::getenv("TITLEGEN_WORKDIR")) this->workdir = workdir;
}

}  // namespace titlegen

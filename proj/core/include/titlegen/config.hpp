#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "titlegen/corpus.hpp"
#include "titlegen/model.hpp"

namespace titlegen {

struct SplitConfig {
  size_t validation_count = 10;
  size_t test_count = 10;
};

struct VocabConfig {
  size_t max_size = 8000;
  size_t min_count = 1;
};

struct TrainerSettings {
  int epochs = 10;
  int batch_size = 32;
  std::optional<int64_t> max_steps;
  double lr = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double warmup_fraction = 0.1;
  double grad_clip = 0.0;
  double weight_decay = 0.0;
};

struct DecodeSettings {
  size_t beam_size = 10;
  size_t max_len = 25;
  bool length_normalize = true;
};

struct MetricSettings {
  bool lowercase = true;
  bool strict_rouge_l = false;
};

/// One declarative file drives all subcommands. Environment variables
/// TITLEGEN_CORPUS and TITLEGEN_WORKDIR override the two paths (paths only).
struct RunConfig {
  std::string corpus_path;
  std::string workdir = "work";
  FilterConfig filter;
  SplitConfig split;
  VocabConfig vocab;
  ModelConfig model;  // vocab_size is filled from the vocabulary artifact
  TrainerSettings trainer;
  DecodeSettings decode;
  MetricSettings metrics;
  int fraction = 1;  // train-set divisor: 1, 2, 4 or 8
  uint64_t seed = 1234;

  static RunConfig from_json(const std::string& text);
  static RunConfig from_json_file(const std::string& path);
  /// Canonical serialization (stable key order); its hash identifies the run.
  std::string to_json() const;
  uint64_t content_hash() const;
  void validate() const;
  void apply_env_overrides();
};

}  // namespace titlegen

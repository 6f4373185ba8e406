#pragma once

#include <optional>
#include <vector>

#include "titlegen/checkpoint.hpp"
#include "titlegen/model.hpp"
#include "titlegen/optimizer.hpp"
#include "titlegen/tokenizer.hpp"

namespace titlegen {

struct TrainingExample {
  TokenSequence source;
  TokenSequence target;  // [SOS] ... [EOS]
};

struct TrainOptions {
  int epochs = 10;
  int batch_size = 32;
  std::optional<int64_t> max_steps;  // hard cap across epochs
  uint64_t shuffle_seed = 0;
  AdamOptions adam;  // total_steps is filled in by the trainer
};

struct TrainLogRow {
  int64_t step = 0;
  double lr = 0;
  double train_loss = 0;
  std::optional<double> val_loss;  // present at epoch boundaries
};

struct TrainResult {
  std::vector<TrainLogRow> log;
  double final_train_loss = 0;
  double best_val_loss = 0;
  int64_t best_step = -1;
  /// Parameter snapshot at the best validation loss (final parameters when
  /// there is no validation set).
  std::vector<NamedTensorData> best_parameters;
};

/// Deterministic for a fixed seed: epoch shuffles, dropout and batch order
/// are all driven by seeded generators. One optimizer step per batch; the
/// batch loss is the mean of per-example losses.
TrainResult train_model(TitleModel& model, const std::vector<TrainingExample>& train,
                        const std::vector<TrainingExample>& validation,
                        const TrainOptions& opts);

/// Mean NLL over a dataset without recording gradients.
double evaluate_loss(TitleModel& model, const std::vector<TrainingExample>& examples);

}  // namespace titlegen

#include "titlegen/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "titlegen/errors.hpp"

namespace titlegen {

double evaluate_loss(TitleModel& model, const std::vector<TrainingExample>& examples) {
  if (examples.empty()) return 0.0;
  NoGradGuard no_grad;
  bool was_training = model.training();
  model.set_training(false);
  double total = 0.0;
  for (const auto& ex : examples) {
    total += model.nll_loss(ex.source, ex.target).item();
  }
  model.set_training(was_training);
  return total / static_cast<double>(examples.size());
}

TrainResult train_model(TitleModel& model, const std::vector<TrainingExample>& train,
                        const std::vector<TrainingExample>& validation,
                        const TrainOptions& opts) {
  if (train.empty()) throw Error("train_model: empty training set");
  if (opts.batch_size <= 0 || opts.epochs < 0) {
    throw ConfigError("train_model: bad batch_size/epochs");
  }

  int64_t batches_per_epoch =
      (static_cast<int64_t>(train.size()) + opts.batch_size - 1) / opts.batch_size;
  int64_t planned = batches_per_epoch * opts.epochs;
  if (opts.max_steps) planned = std::min(planned, *opts.max_steps);

  AdamOptions adam_opts = opts.adam;
  adam_opts.total_steps = planned;
  Adam optimizer(model.parameters(), adam_opts);

  TrainResult result;
  result.best_val_loss = std::numeric_limits<double>::infinity();

  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(opts.shuffle_seed);

  model.set_training(true);
  int64_t step = 0;
  bool done = planned == 0;
  for (int epoch = 0; epoch < opts.epochs && !done; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (int64_t b = 0; b < batches_per_epoch && !done; ++b) {
      size_t begin = static_cast<size_t>(b) * opts.batch_size;
      size_t end = std::min(begin + opts.batch_size, train.size());

      Tape::active().clear();
      Tensor batch_sum;
      for (size_t i = begin; i < end; ++i) {
        const auto& ex = train[order[i]];
        Tensor loss = model.nll_loss(ex.source, ex.target);
        batch_sum = batch_sum.defined() ? ops::add(batch_sum, loss) : loss;
      }
      Tensor batch_loss =
          ops::scale(batch_sum, 1.0 / static_cast<double>(end - begin));

      optimizer.zero_grad();
      Tape::active().backward(batch_loss);
      optimizer.step();
      ++step;

      TrainLogRow row;
      row.step = step;
      row.lr = optimizer.current_lr();
      row.train_loss = batch_loss.item();
      result.final_train_loss = row.train_loss;

      bool epoch_end = b + 1 == batches_per_epoch;
      done = step >= planned;
      if ((epoch_end || done) && !validation.empty()) {
        row.val_loss = evaluate_loss(model, validation);
        if (*row.val_loss < result.best_val_loss) {
          result.best_val_loss = *row.val_loss;
          result.best_step = step;
          result.best_parameters = snapshot_parameters(model.parameters());
        }
      }
      result.log.push_back(row);
    }
  }
  model.set_training(false);

  if (validation.empty() || result.best_parameters.empty()) {
    result.best_parameters = snapshot_parameters(model.parameters());
    result.best_step = step;
    result.best_val_loss = result.final_train_loss;
  }
  return result;
}

}  // namespace titlegen

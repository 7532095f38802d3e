#pragma once

// Joint training loop with periodic validation, best-checkpoint tracking and
// patience-based early stopping, plus the two-phase learning-rate search and
// the per-group training driver.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "data.hpp"
#include "model.hpp"

namespace mtg {

struct TrainingConfig {
  int batch_size = 64;
  int64_t max_steps = 1920000;
  int64_t validate_every = 16000;
  int patience = 25;          // validation rounds without strict improvement
  double learning_rate = 0.1;
  uint64_t seed = 0;
  int threads = 1;            // batch-parallel workers inside one training

  void validate() const;
  std::string to_json() const;
  static TrainingConfig from_json(const std::string& json_text);
};

enum class StopReason { patience_exhausted, max_steps_reached };
const char* stop_reason_name(StopReason r);

struct TrainingLog {
  struct Entry {
    int64_t step;
    double loss;  // validation loss: sum over heads of mean BCE
  };
  std::vector<Entry> entries;
  int64_t best_step = 0;
  double best_loss = 0;
  int64_t final_step = 0;
  StopReason stop = StopReason::max_steps_reached;
  double learning_rate = 0;
  uint64_t effective_seed = 0;
  double wall_seconds = 0;  // informational; not written to files

  std::string to_tsv() const;
};

struct TrainResult {
  Model model;  // parameters of the best validation checkpoint
  TrainingLog log;
};

// True once the newest `patience` validation rounds all failed to strictly
// improve on the best loss seen so far.
bool early_stop_check(const TrainingLog& log, int patience);

// Trains a model over a subset of the dataset's tasks (one head per subset
// task, subset sorted ascending). The model is built from a seed derived
// from (config.seed, subset), so the same subset always trains identically,
// whether requested directly or as a group.
TrainResult train_joint(const ModelSpec& spec, const TaskDataset& ds, std::span<const int> tasks,
                        const TrainingConfig& cfg);

// The underlying loop on a caller-provided model; model.source_tasks selects
// the dataset columns. stream_seed drives batch shuffling.
TrainResult train_model(Model model, const TaskDataset& ds, const TrainingConfig& cfg,
                        uint64_t stream_seed);

enum class LrMode { single_task, joint };

struct LrProbe {
  double lr;
  double loss;
};

// Joint mode: evaluates train_fn on the coarse grid 0.05, 0.10, ... 0.35,
// then on best-so-far +/- 0.025, and returns the overall winner (ties to the
// smaller rate). Single-task mode returns the fixed rate 0.01 without
// evaluating. Non-finite losses lose; all-non-finite is a numeric error.
double lr_search(const std::function<double(double)>& train_fn, LrMode mode,
                 std::vector<LrProbe>* probes = nullptr);

struct GroupTrainResult {
  int group = 0;
  std::vector<int> tasks;
  TrainResult result;
};

// Trains one model per group, in parallel across `workers` (each training
// additionally uses cfg.threads). `groups` must partition the dataset's
// tasks exactly.
std::vector<GroupTrainResult> run_grouping_mode(const ModelSpec& spec, const TaskDataset& ds,
                                                const std::vector<std::vector<int>>& groups,
                                                const TrainingConfig& cfg, int workers = 1);

}  // namespace mtg

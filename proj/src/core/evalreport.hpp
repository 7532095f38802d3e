#pragma once

// F1 scoring and comparison artifacts: per-task score tables, baseline
// improvement tables (per stratum), pairwise scatter records with
// negative-transfer fractions, and a machine-readable run summary.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "data.hpp"
#include "model.hpp"

namespace mtg {

struct TaskScore {
  std::string task_id;
  double f1 = 0;
  double precision = 0;
  double recall = 0;
  int64_t tp = 0, fp = 0, fn = 0, tn = 0;
  int64_t positives_in_test = 0;  // tp + fn
  int64_t examples = 0;
};

// Confusion counts at the threshold; F1 = 2PR/(P+R), defined as 0 when the
// denominator is 0 (precision and recall likewise). Empty input is an error.
TaskScore f1_score(std::span<const float> probabilities, std::span<const uint8_t> labels,
                   double threshold = 0.5);

struct ScoreSet {
  std::string method;  // STL, SMTL, EMTL, CMTL, KMTL, ...
  std::vector<TaskScore> scores;

  double mean_f1() const;
  int find(const std::string& task_id) const;  // index, -1 when absent

  void save_tsv(const std::string& path) const;
  static ScoreSet load_tsv(const std::string& path);
};

// Scores every head of the model on one split of the dataset. Head task ids
// must exist in the dataset; the result rows follow the model's head order.
ScoreSet evaluate_model(const Model& model, const TaskDataset& ds, Split split,
                        const std::string& method, double threshold = 0.5, int threads = 1);

// Combines per-group score sets (e.g. one per trained group) into one set
// covering the union of their tasks. Duplicate task ids are an error.
ScoreSet merge_scores(const std::string& method, std::span<const ScoreSet> parts);

struct ImprovementRow {
  std::string stratum;  // "all" or a metadata value
  int num_tasks = 0;
  double reference_mean = 0;
  double baseline_mean = 0;
  double percent = 0;  // 100 * (reference_mean - baseline_mean) / baseline_mean
};

// Mean-F1 improvement of `reference` over `baseline`, overall and per stratum.
// `stratum_of_task` maps task_id -> stratum label; tasks missing from the map
// only count toward "all". Both sets must cover the same tasks; a stratum with
// zero baseline mean is a numeric error.
std::vector<ImprovementRow> improvement_table(
    const ScoreSet& reference, const ScoreSet& baseline,
    const std::map<std::string, std::string>& stratum_of_task = {});

struct PairwiseRecord {
  std::string task_id;
  double f1_a = 0, f1_b = 0;
};

struct PairwiseComparison {
  std::string method_a, method_b;
  std::vector<PairwiseRecord> records;   // one per task, in method_a's order
  double frac_a_below_b = 0;             // |{t : f1_a < f1_b}| / T
  double frac_b_below_a = 0;
};

PairwiseComparison pairwise_comparison(const ScoreSet& a, const ScoreSet& b);

// Builds a task_id -> metadata[key] map for stratified improvement tables.
std::map<std::string, std::string> strata_from_metadata(const TaskDataset& ds,
                                                        const std::string& key);

// Writes the full comparison bundle into `dir`:
//   scores.tsv       every method's per-task scores (long format)
//   pairwise.tsv     per-task F1, one column per method
//   improvement.tsv  every method vs `baseline_method` (when non-empty)
//   summary.json     means, improvements, pairwise fractions, and
//                    negative-transfer fractions vs the method named "STL"
//                    (case-insensitive) when one is present
// Output is a pure function of the inputs: method order as given, stable
// ordering everywhere, no timestamps.
void write_report(const std::string& dir, std::span<const ScoreSet> methods,
                  const std::string& baseline_method = "",
                  const std::map<std::string, std::string>& stratum_of_task = {});

}  // namespace mtg

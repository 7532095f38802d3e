#pragma once

// Dataset layer: genomic ingest (FASTA + peak BEDs -> tiled, labeled windows)
// and the synthetic generator with planted task groups. Both produce the same
// TaskDataset container, which stores sequences as small integer codes and
// one binary label per task per example.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rng.hpp"

namespace mtg {

enum class Split : uint8_t { train = 0, validation = 1, test = 2 };
const char* split_name(Split s);

// base codes: A=0 C=1 G=2 T=3, N=4
inline constexpr uint8_t kCodeN = 4;

struct TaskInfo {
  std::string id;
  std::map<std::string, std::string> metadata;
};

struct BinCoord {
  int32_t chrom = -1;  // index into TaskDataset::chrom_names
  int64_t start = 0;   // bin start, 0-based
};

class TaskDataset {
 public:
  int window_length = 0;
  std::vector<TaskInfo> tasks;
  std::vector<std::string> chrom_names;  // empty for synthetic data

  std::vector<uint8_t> seq;     // num_examples * window_length codes
  std::vector<uint8_t> labels;  // num_examples * num_tasks, values 0/1
  std::vector<Split> split;     // per example
  std::vector<BinCoord> coords; // per example; empty when not genomic

  int num_tasks() const { return int(tasks.size()); }
  int64_t num_examples() const { return int64_t(split.size()); }
  bool has_coords() const { return !coords.empty(); }

  std::span<const uint8_t> seq_of(int64_t i) const {
    return {seq.data() + i * window_length, size_t(window_length)};
  }
  uint8_t label(int64_t i, int t) const { return labels[size_t(i) * size_t(num_tasks()) + size_t(t)]; }

  std::vector<int64_t> indices_of(Split s) const;
  int64_t count_of(Split s) const;
  int64_t positive_count(int task, Split s) const;
  int task_index(const std::string& id) const;  // -1 when absent

  // Container invariants: parallel array sizes, label values, unique task
  // ids, at least one positive label per example. Raises invalid_argument.
  void validate() const;

  void save(const std::string& path) const;
  static TaskDataset load(const std::string& path);
};

// ---- sequence encoding ----------------------------------------------------

// ACGT (either case) to codes 0..3, N/n to kCodeN. Any other character is a
// parse error naming the offending position; `where` prefixes the message.
std::vector<uint8_t> encode_sequence(std::string_view s, const std::string& where = "sequence");

// Writes a [4, L] one-hot block: unit rows for ACGT, 0.25 in every row for N.
void codes_to_onehot(std::span<const uint8_t> codes, float* out);

// ---- genomic ingest -------------------------------------------------------

struct GenomeStore {
  std::vector<std::string> names;
  std::vector<std::string> seqs;  // raw characters, encoded lazily at tiling
  static GenomeStore load_fasta(const std::string& path);
  int index_of(const std::string& name) const;  // -1 when absent
};

struct PeakSet {
  struct Interval {
    std::string chrom;
    int64_t start = 0, end = 0;  // 0-based half-open
  };
  std::vector<Interval> intervals;
  static PeakSet load_bed(const std::string& path);
};

struct IngestManifestRow {
  std::string task_id;
  std::string peaks_path;
  std::map<std::string, std::string> metadata;
};

// Tab-separated rows: task_id, BED path, optional "key=value;key=value".
// '#' lines are comments. Relative BED paths resolve against the manifest's
// directory.
std::vector<IngestManifestRow> load_ingest_manifest(const std::string& path);

struct TileConfig {
  int bin = 200;
  int window = 1001;      // must be odd and >= bin
  int min_overlap = 50;   // peak bases inside the bin needed for a positive
};

// Tiles every chromosome into fixed bins, labels each bin per task by total
// peak overlap (union of that task's intervals), keeps only bins with at
// least one positive task, and extracts the window centered on each kept bin.
// Bins whose window would cross a chromosome end are dropped.
TaskDataset tile_and_label(const GenomeStore& genome, const std::vector<PeakSet>& peaks,
                           const std::vector<TaskInfo>& tasks, const TileConfig& cfg);

struct RegionSplit {
  std::vector<std::string> test_chroms;
  std::string validation_chrom;
  int64_t validation_begin = 0, validation_end = 0;  // bin-start range, half-open
};

// Assigns splits by genomic region: whole chromosomes to test, a coordinate
// range of one chromosome to validation, the rest to train.
void split_by_region(TaskDataset& ds, const RegionSplit& rs);

// Full ingest: FASTA + task manifest -> tiled, labeled, split dataset.
TaskDataset ingest_dataset(const std::string& fasta_path, const std::string& manifest_path,
                           const TileConfig& tile, const RegionSplit& split);

// ---- synthetic generator --------------------------------------------------

struct SynthConfig {
  int groups = 4;
  int tasks_per_group = 6;
  int seq_length = 201;
  int64_t num_examples = 20000;
  int motif_length = 8;
  int own_motifs_per_group = 2;   // motifs only the group's tasks respond to
  int shared_motifs = 2;          // motifs every group responds to, sign per group
  double conflict_strength = 0.5; // scales the shared-motif effects
  double positive_rate = 0.30;    // per-task positive fraction after filtering
  double rate_spread = 0.08;      // small per-group spread around positive_rate
  double label_noise = 0.05;      // label flip probability
  double implant_prob = 0.25;     // independent implant chance per motif
  double validation_fraction = 0.15;
  double test_fraction = 0.15;
  int num_modalities = 3;         // cosmetic metadata for metadata grouping
  uint64_t seed = 0;

  std::string to_json() const;
  static SynthConfig from_json(const std::string& json_text);
  void validate() const;
};

// Ground truth behind a generated dataset, enough to reconstruct the exact
// label distribution of any example from its motif presences.
struct SynthTruth {
  std::vector<std::vector<std::string>> own_motifs;  // [group][k]
  std::vector<std::string> shared_motifs;
  std::vector<std::vector<int>> polarity;            // [group][shared], +1 or -1
  std::vector<double> shared_amp;                    // per shared motif, descending
  double implant_prob = 0;
  double clamp_lo = 0, clamp_hi = 0;

  struct TaskRule {
    int group = 0;
    double base = 0;       // calibrated offset
    double own_amp = 0;    // effect of the group's own motifs
    double noise = 0;      // label flip probability
    double target_rate = 0;
  };
  std::vector<TaskRule> rules;

  // P(label=1) for a task given which motif families are present (0/1 flags:
  // own_any per group, shared_present per shared motif).
  double prob_positive(int task, std::span<const uint8_t> own_any,
                       std::span<const uint8_t> shared_present) const;
};

// Deterministic in the config (seed included). Examples where every task drew
// a negative label are rejected and redrawn, and the per-task base rates are
// calibrated so the post-rejection positive rates land on their targets.
TaskDataset synth_generate(const SynthConfig& cfg, SynthTruth* truth_out = nullptr);

}  // namespace mtg

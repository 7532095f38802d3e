// Acceptance gate. Each numbered criterion prints exactly one PASS/FAIL line;
// the process exits 0 only when every criterion it ran passed. Run with no
// arguments for all eight, or pass criterion numbers to run a subset.
//
// Tolerances and budgets are pinned here, next to the checks that use them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "core/clustering.hpp"
#include "core/data.hpp"
#include "core/embedding.hpp"
#include "core/error.hpp"
#include "core/evalreport.hpp"
#include "core/linalg.hpp"
#include "core/model.hpp"
#include "core/rng.hpp"
#include "core/trainer.hpp"
#include "fd_check.hpp"

using namespace mtg;
namespace fs = std::filesystem;

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point origin = clock::now();
  return std::chrono::duration<double>(clock::now() - origin).count();
}

std::string read_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f.good()) return "<missing:" + path + ">";
  return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

std::string fresh_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("mtg_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

char buf[256];
std::string fmt(const char* f, ...) {
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double median3(double a, double b, double c) {
  return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

// ---- criterion 1: gradients ------------------------------------------------
// every layer, analytic vs central finite differences (step 1e-3, float64
// references), 100 random configurations, worst relative error <= 1e-4,
// wall under 2 minutes

bool criterion_gradients(std::string& detail) {
  constexpr double kTol = 1e-4;
  constexpr double kBudgetSec = 120.0;
  double t0 = now_seconds();
  double worst = 0;
  for (uint64_t seed = 1; seed <= 100; ++seed)
    worst = std::max(worst, fdcheck::check_all_layers(seed));
  double wall = now_seconds() - t0;
  detail = fmt("worst rel err %.3g over 100 configs, %.1fs", worst, wall);
  return worst <= kTol && wall < kBudgetSec;
}

// ---- criterion 2: k-means optimality ---------------------------------------
// 50 random instances (T <= 10, d <= 3, K <= 3), 20 restarts, matches the
// exhaustively enumerated SSE optimum within 1e-6 in >= 95% of instances,
// and no Lloyd iteration ever increases the SSE

double exhaustive_kmeans_sse(const Matrix& pts, int k) {
  int n = pts.rows(), d = pts.cols();
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> assign(size_t(n), 0);
  int64_t combos = 1;
  for (int i = 0; i < n; ++i) combos *= k;
  for (int64_t code = 0; code < combos; ++code) {
    int64_t c = code;
    for (int i = 0; i < n; ++i) {
      assign[size_t(i)] = int(c % k);
      c /= k;
    }
    Matrix mean(k, d);
    std::vector<int> count(size_t(k), 0);
    for (int i = 0; i < n; ++i) {
      ++count[size_t(assign[size_t(i)])];
      for (int j = 0; j < d; ++j) mean.at(assign[size_t(i)], j) += pts.at(i, j);
    }
    for (int g = 0; g < k; ++g)
      if (count[size_t(g)])
        for (int j = 0; j < d; ++j) mean.at(g, j) /= count[size_t(g)];
    double sse = 0;
    for (int i = 0; i < n; ++i) sse += squared_distance(pts.row(i), mean.row(assign[size_t(i)]), d);
    best = std::min(best, sse);
  }
  return best;
}

bool criterion_kmeans_optimality(std::string& detail) {
  constexpr double kOptTol = 1e-6;
  constexpr double kMonotoneSlack = 1e-12;  // fp rounding only
  constexpr int kInstances = 50;
  int solved = 0;
  int64_t increases = 0, iterations = 0;
  for (int inst = 0; inst < kInstances; ++inst) {
    Rng rng(9000 + uint64_t(inst));
    int n = 4 + int(rng.index(7));  // 4..10 tasks
    int d = 1 + int(rng.index(3));  // 1..3 dims
    int k = 2 + int(rng.index(2));  // 2..3 groups
    Matrix pts(n, d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) pts.at(i, j) = rng.uniform() * 4.0 - 2.0;

    KmeansParams p;
    p.k = k;
    p.seed = 77 + uint64_t(inst);
    p.restarts = 20;
    KmeansResult km = kmeans(pts, p);
    if (km.sse <= exhaustive_kmeans_sse(pts, k) + kOptTol) ++solved;
    for (const std::vector<double>& hist : km.sse_history)
      for (size_t i = 1; i < hist.size(); ++i) {
        ++iterations;
        if (hist[i] > hist[i - 1] + kMonotoneSlack) ++increases;
      }
  }
  detail = fmt("optimum attained in %d/%d instances, %lld/%lld non-increasing steps", solved,
               kInstances, (long long)(iterations - increases), (long long)iterations);
  return solved >= int(std::ceil(0.95 * kInstances)) && increases == 0;
}

// ---- criterion 3: clustering oracles ---------------------------------------
// spectral separates two disconnected blobs exactly; SSC keeps cross-block
// affinity mass below 1e-6 on two planted 1-D subspaces in R^3; DBSCAN calls
// a distance-10 outlier (eps=1) noise; the ARI hand case is -0.5 exactly

bool criterion_clustering_oracles(std::string& detail) {
  constexpr double kCrossMassTol = 1e-6;

  // spectral: blobs of side ~1 separated by 50
  std::vector<int> planted;
  Rng rng(31);
  int per_side = 8;
  Matrix blobs(2 * per_side, 2);
  for (int i = 0; i < 2 * per_side; ++i) {
    double cx = i < per_side ? 0.0 : 50.0;
    blobs.at(i, 0) = cx + rng.uniform() - 0.5;
    blobs.at(i, 1) = cx + rng.uniform() - 0.5;
    planted.push_back(i < per_side ? 0 : 1);
  }
  Grouping sp = spectral_cluster(blobs, 2, 5);
  double spectral_ari = adjusted_rand_index(sp.assignments, planted);

  // ssc: points on the x-axis and on the y-axis in R^3
  Matrix lines(12, 3);
  for (int i = 0; i < 6; ++i) {
    double c = (i + 1) * 0.5 * (i % 2 ? 1.0 : -1.0);
    lines.at(i, 0) = c;      // block 0: x-axis
    lines.at(6 + i, 1) = c;  // block 1: y-axis
  }
  SscParams sscp;
  sscp.k = 2;
  sscp.lambda = 0.05;
  SscResult sr = ssc(lines, sscp);
  double cross = 0, total = 0;
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) {
      double w = std::fabs(sr.coefficients.at(i, j));
      total += w;
      if ((i < 6) != (j < 6)) cross += w;
    }
  double cross_mass = total > 0 ? cross / total : 1.0;

  // dbscan: tight cluster plus one far outlier
  Matrix pts(7, 2);
  Rng rng2(47);
  for (int i = 0; i < 6; ++i) {
    pts.at(i, 0) = rng2.uniform() * 0.6;
    pts.at(i, 1) = rng2.uniform() * 0.6;
  }
  pts.at(6, 0) = 10.0;
  pts.at(6, 1) = 0.0;
  Grouping db = dbscan(pts, 1.0, 3);
  bool outlier_is_noise = db.raw_labels.size() == 7 && db.raw_labels[6] == -1;

  // ari hand case
  std::vector<int> a{0, 0, 1, 1}, b{0, 1, 0, 1};
  double ari = adjusted_rand_index(a, b);

  detail = fmt("spectral ARI %g, ssc cross mass %.2g, outlier %s, hand ARI %g", spectral_ari,
               cross_mass, outlier_is_noise ? "noise" : "NOT noise", ari);
  return spectral_ari == 1.0 && cross_mass < kCrossMassTol && outlier_is_noise && ari == -0.5;
}

// ---- criterion 4: planted-group recovery -----------------------------------
// pinned suite: G=4 groups x 6 tasks, sequence length 201, 20,000 examples,
// two conv blocks (32/64 filters) + 32-unit heads; joint training, head
// embeddings, kmeans(K=4); median ARI over 3 seeds >= 0.9, inside the wall
// budget (45 min on 8 cores; measured here on whatever this host has)

bool criterion_planted_recovery(std::string& detail) {
  constexpr double kAriFloor = 0.9;
  constexpr double kBudgetSec = 45.0 * 60.0;
  double t0 = now_seconds();

  std::vector<double> aris;
  for (uint64_t s = 1; s <= 3; ++s) {
    SynthConfig c;  // defaults are the pinned suite: 4x6 tasks, L=201, 20k examples
    c.seed = 1000 + s;
    TaskDataset ds = synth_generate(c);

    ModelSpec spec;
    spec.input_length = 201;
    spec.blocks = {{32, 8, 4}, {64, 8, 4}};
    spec.head_hidden = 32;
    spec.num_tasks = ds.num_tasks();

    TrainingConfig cfg;
    cfg.batch_size = 64;
    cfg.max_steps = 6000;
    cfg.validate_every = 500;
    cfg.patience = 6;
    cfg.learning_rate = 0.15;
    cfg.seed = 2000 + s;

    std::vector<int> tasks(size_t(ds.num_tasks()));
    for (int t = 0; t < ds.num_tasks(); ++t) tasks[size_t(t)] = t;
    TrainResult r = train_joint(spec, ds, tasks, cfg);

    TaskEmbedding emb = extract_embeddings(r.model);
    KmeansParams kp;
    kp.k = 4;
    kp.seed = 0;
    kp.restarts = 20;
    Grouping g = kmeans(emb.values, kp).grouping;

    std::vector<int> planted(size_t(ds.num_tasks()));
    for (int t = 0; t < ds.num_tasks(); ++t) planted[size_t(t)] = t / 6;
    aris.push_back(adjusted_rand_index(g.assignments, planted));
  }
  double wall = now_seconds() - t0;
  double med = median3(aris[0], aris[1], aris[2]);
  detail = fmt("ARI %.3f/%.3f/%.3f, median %.3f, %.0fs", aris[0], aris[1], aris[2], med, wall);
  return med >= kAriFloor && wall <= kBudgetSec;
}

// ---- criterion 5: negative-transfer reduction ------------------------------
// conflict_strength 0.8 suite; grouped training (KMTL via the pipeline's own
// joint->embed->kmeans grouping) must reach mean test F1 >= SMTL, and strictly
// fewer tasks below their STL score than SMTL (medians over 3 seeds)

struct TransferOutcome {
  double kmtl_mean, smtl_mean;
  double kmtl_below, smtl_below;
};

TransferOutcome transfer_run(uint64_t seed) {
  SynthConfig c;
  c.groups = 2;
  c.tasks_per_group = 4;
  c.seq_length = 40;
  c.num_examples = 4000;
  c.motif_length = 6;
  c.own_motifs_per_group = 1;
  c.shared_motifs = 2;
  c.conflict_strength = 0.8;
  c.positive_rate = 0.40;
  c.rate_spread = 0.04;
  c.label_noise = 0.02;
  c.implant_prob = 0.5;
  c.validation_fraction = 0.2;
  c.test_fraction = 0.2;
  c.seed = 3000 + seed;
  TaskDataset ds = synth_generate(c);
  int T = ds.num_tasks();

  ModelSpec spec;
  spec.input_length = 40;
  spec.blocks = {{10, 7, 4}};
  spec.head_hidden = 8;
  spec.num_tasks = T;

  TrainingConfig cfg;
  cfg.batch_size = 32;
  cfg.max_steps = 1200;
  cfg.validate_every = 100;
  cfg.patience = 6;
  cfg.learning_rate = 0.15;
  cfg.seed = 4000 + seed;

  std::vector<int> all(size_t(T), 0);
  for (int t = 0; t < T; ++t) all[size_t(t)] = t;

  // SMTL: everything in one model; its heads also provide the embedding
  TrainResult smtl = train_joint(spec, ds, all, cfg);
  ScoreSet smtl_scores = evaluate_model(smtl.model, ds, Split::test, "SMTL");

  // STL: one model per task, same protocol
  std::vector<double> stl_f1(size_t(T), 0.0);
  for (int t = 0; t < T; ++t) {
    std::vector<int> one{t};
    TrainResult r = train_joint(spec, ds, one, cfg);
    stl_f1[size_t(t)] = evaluate_model(r.model, ds, Split::test, "STL").scores[0].f1;
  }

  // KMTL: kmeans on the joint model's head rows, then per-group retraining
  TaskEmbedding emb = extract_embeddings(smtl.model);
  KmeansParams kp;
  kp.k = 2;
  kp.seed = 0;
  kp.restarts = 20;
  Grouping g = kmeans(emb.values, kp).grouping;
  std::vector<GroupTrainResult> grouped = run_grouping_mode(spec, ds, g.groups(), cfg);
  std::map<std::string, double> kmtl_f1;
  for (const GroupTrainResult& gr : grouped) {
    ScoreSet s = evaluate_model(gr.result.model, ds, Split::test, "KMTL");
    for (const TaskScore& ts : s.scores) kmtl_f1[ts.task_id] = ts.f1;
  }

  TransferOutcome out{};
  int kmtl_below = 0, smtl_below = 0;
  double kmtl_sum = 0;
  for (int t = 0; t < T; ++t) {
    const std::string& id = ds.tasks[size_t(t)].id;
    double smtl_t = smtl_scores.scores[size_t(t)].f1;
    double kmtl_t = kmtl_f1.at(id);
    kmtl_sum += kmtl_t;
    if (kmtl_t < stl_f1[size_t(t)]) ++kmtl_below;
    if (smtl_t < stl_f1[size_t(t)]) ++smtl_below;
  }
  out.kmtl_mean = kmtl_sum / T;
  out.smtl_mean = smtl_scores.mean_f1();
  out.kmtl_below = double(kmtl_below) / T;
  out.smtl_below = double(smtl_below) / T;
  return out;
}

bool criterion_negative_transfer(std::string& detail) {
  std::vector<TransferOutcome> runs;
  for (uint64_t s = 1; s <= 3; ++s) runs.push_back(transfer_run(s));
  double kmtl_mean = median3(runs[0].kmtl_mean, runs[1].kmtl_mean, runs[2].kmtl_mean);
  double smtl_mean = median3(runs[0].smtl_mean, runs[1].smtl_mean, runs[2].smtl_mean);
  double kmtl_below = median3(runs[0].kmtl_below, runs[1].kmtl_below, runs[2].kmtl_below);
  double smtl_below = median3(runs[0].smtl_below, runs[1].smtl_below, runs[2].smtl_below);
  detail = fmt("median mean F1: KMTL %.4f vs SMTL %.4f; below-STL fraction: KMTL %.3f vs SMTL %.3f",
               kmtl_mean, smtl_mean, kmtl_below, smtl_below);
  return kmtl_mean >= smtl_mean && kmtl_below < smtl_below;
}

// ---- criterion 6: protocol fidelity ----------------------------------------
// defaults match the training protocol; early stopping halts exactly at
// best_step + patience * validate_every; a singleton grouping reproduces the
// single-task models bit for bit; the two-phase LR grid is exact

bool criterion_protocol(std::string& detail) {
  TrainingConfig defaults;
  bool defaults_ok = defaults.patience == 25 && defaults.batch_size == 64 &&
                     defaults.validate_every == 16000 && defaults.max_steps == 1920000;

  // a small learnable suite that converges and then stalls
  SynthConfig c;
  c.groups = 2;
  c.tasks_per_group = 2;
  c.seq_length = 40;
  c.num_examples = 3000;
  c.motif_length = 6;
  c.own_motifs_per_group = 1;
  c.shared_motifs = 0;
  c.conflict_strength = 0.0;
  c.positive_rate = 0.50;
  c.rate_spread = 0.04;
  c.label_noise = 0.02;
  c.implant_prob = 0.5;
  c.validation_fraction = 0.2;
  c.test_fraction = 0.1;
  c.seed = 77;
  TaskDataset ds = synth_generate(c);

  ModelSpec spec;
  spec.input_length = 40;
  spec.blocks = {{12, 7, 4}};
  spec.head_hidden = 8;
  spec.num_tasks = 4;

  TrainingConfig cfg;
  cfg.batch_size = 32;
  cfg.max_steps = 8000;
  cfg.validate_every = 200;
  cfg.patience = 4;
  cfg.learning_rate = 0.1;
  cfg.seed = 11;

  std::vector<int> all{0, 1, 2, 3};
  TrainResult r = train_joint(spec, ds, all, cfg);
  bool halt_exact = r.log.stop == StopReason::patience_exhausted &&
                    r.log.final_step == r.log.best_step + cfg.patience * cfg.validate_every;

  // singleton grouping vs direct single-task runs, compared as saved bytes
  std::string dir = fresh_dir("c6");
  std::vector<std::vector<int>> singles{{0}, {1}, {2}, {3}};
  TrainingConfig quick = cfg;
  quick.max_steps = 600;
  std::vector<GroupTrainResult> grouped = run_grouping_mode(spec, ds, singles, quick);
  bool bit_identical = true;
  for (int t = 0; t < 4; ++t) {
    std::vector<int> one{t};
    TrainResult direct = train_joint(spec, ds, one, quick);
    std::string pa = dir + "/direct" + std::to_string(t);
    std::string pb = dir + "/grouped" + std::to_string(t);
    direct.model.save(pa);
    grouped[size_t(t)].result.model.save(pb);
    if (read_bytes(pa) != read_bytes(pb)) bit_identical = false;
  }

  // two-phase grid: 0.05..0.35 by 0.05, then best +/- 0.025
  std::vector<LrProbe> probes;
  double winner = lr_search([](double lr) { return std::fabs(lr - 0.20); }, LrMode::joint, &probes);
  std::vector<double> expected{0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.175, 0.225};
  bool grid_ok = winner == 0.20 && probes.size() == expected.size();
  if (grid_ok)
    for (size_t i = 0; i < expected.size(); ++i)
      if (std::fabs(probes[i].lr - expected[i]) > 1e-12) grid_ok = false;
  std::vector<LrProbe> stl_probes;
  double stl_rate = lr_search([](double) { return 0.0; }, LrMode::single_task, &stl_probes);
  bool stl_ok = stl_rate == 0.01 && stl_probes.empty();

  detail = fmt("defaults %s; halt %lld == best %lld + %lld; singletons %s; joint grid %s; stl %g",
               defaults_ok ? "ok" : "WRONG", (long long)r.log.final_step,
               (long long)r.log.best_step, (long long)(cfg.patience * cfg.validate_every),
               bit_identical ? "bit-identical" : "DIFFER", grid_ok ? "exact" : "WRONG", stl_rate);
  return defaults_ok && halt_exact && bit_identical && grid_ok && stl_ok;
}

// ---- criterion 7: data-layer fidelity --------------------------------------
// the 50/49 overlap boundary, all-negative-bin exclusion, and split
// membership, recounted by an independent interval oracle over > 10,000
// random bins

struct OracleBin {
  int chrom;
  int64_t start;
  std::vector<uint8_t> labels;
  int split;  // 0 train, 1 validation, 2 test
};

bool criterion_data_layer(std::string& detail) {
  // hand boundary: overlap 50 is positive, 49 leaves the bin all-negative
  Rng rng(123);
  auto random_seq = [&rng](int64_t n) {
    std::string s(size_t(n), 'A');
    const char* b = "ACGT";
    for (auto& ch : s) ch = b[rng.index(4)];
    return s;
  };
  {
    GenomeStore genome;
    genome.names = {"chrA"};
    genome.seqs = {random_seq(3000)};
    PeakSet fifty, anchor;
    fifty.intervals.push_back({"chrA", 1150, 1300});   // 50 bases inside [1000,1200)
    anchor.intervals.push_back({"chrA", 600, 800});    // keeps its own bin positive
    TileConfig tile;  // bin 200, window 1001, min_overlap 50
    TaskDataset t50 = tile_and_label(genome, {fifty, anchor},
                                     {TaskInfo{"near", {}}, TaskInfo{"anchor", {}}}, tile);
    PeakSet fortynine;
    fortynine.intervals.push_back({"chrA", 1151, 1300});  // 49 bases inside the bin
    TaskDataset t49 = tile_and_label(genome, {fortynine, anchor},
                                     {TaskInfo{"near", {}}, TaskInfo{"anchor", {}}}, tile);
    auto find_bin = [](const TaskDataset& ds, int64_t start) {
      for (int64_t i = 0; i < ds.num_examples(); ++i)
        if (ds.coords[size_t(i)].start == start) return i;
      return int64_t(-1);
    };
    int64_t i50 = find_bin(t50, 1000), i49 = find_bin(t49, 1000);
    bool boundary_ok = i50 >= 0 && t50.label(i50, 0) == 1 &&  // 50 -> positive
                       i49 < 0;                               // 49 -> all-negative, excluded
    if (!boundary_ok) {
      detail = "overlap boundary: 50/49 bases handled wrong";
      return false;
    }
  }

  // randomized recount: 5 chromosomes, ~13k candidate bins, 3 tasks
  constexpr int kBin = 200, kWindow = 1001, kMinOverlap = 50;
  GenomeStore genome;
  std::vector<int64_t> lens{520000, 515000, 508000, 512000, 504000};
  for (int c = 0; c < 5; ++c) {
    genome.names.push_back("chr" + std::to_string(c + 1));
    genome.seqs.push_back(random_seq(lens[size_t(c)]));
  }
  std::vector<PeakSet> peaks(3);
  std::vector<TaskInfo> tasks;
  for (int t = 0; t < 3; ++t) {
    tasks.push_back(TaskInfo{"task" + std::to_string(t), {}});
    for (int c = 0; c < 5; ++c)
      for (int i = 0; i < 220; ++i) {
        int64_t len = 60 + int64_t(rng.index(400));
        int64_t start = int64_t(rng.index(int(lens[size_t(c)] - len)));
        peaks[size_t(t)].intervals.push_back({genome.names[size_t(c)], start, start + len});
      }
  }
  TileConfig tile;
  RegionSplit rs;
  rs.test_chroms = {"chr4", "chr5"};
  rs.validation_chrom = "chr1";
  rs.validation_begin = 100000;
  rs.validation_end = 300000;
  TaskDataset ds = tile_and_label(genome, peaks, tasks, tile);
  split_by_region(ds, rs);

  // plain-loop oracle: merge intervals, count overlap per bin, keep a bin
  // only when its window fits and some task clears the overlap threshold
  std::vector<OracleBin> expect;
  int64_t candidates = 0;
  for (int c = 0; c < 5; ++c) {
    std::vector<std::vector<std::pair<int64_t, int64_t>>> merged(3);
    for (int t = 0; t < 3; ++t) {
      std::vector<std::pair<int64_t, int64_t>> ivs;
      for (const auto& iv : peaks[size_t(t)].intervals)
        if (iv.chrom == genome.names[size_t(c)]) ivs.push_back({iv.start, iv.end});
      std::sort(ivs.begin(), ivs.end());
      for (const auto& iv : ivs) {
        if (!merged[size_t(t)].empty() && iv.first <= merged[size_t(t)].back().second)
          merged[size_t(t)].back().second = std::max(merged[size_t(t)].back().second, iv.second);
        else
          merged[size_t(t)].push_back(iv);
      }
    }
    for (int64_t bs = 0; bs + kBin <= lens[size_t(c)]; bs += kBin) {
      ++candidates;
      int64_t center = bs + kBin / 2;
      int64_t ws = center - (kWindow - 1) / 2;
      if (ws < 0 || ws + kWindow > lens[size_t(c)]) continue;
      std::vector<uint8_t> labels(3, 0);
      bool any = false;
      for (int t = 0; t < 3; ++t) {
        int64_t overlap = 0;
        for (const auto& iv : merged[size_t(t)])
          overlap += std::max<int64_t>(
              0, std::min(iv.second, bs + kBin) - std::max(iv.first, bs));
        labels[size_t(t)] = overlap >= kMinOverlap ? 1 : 0;
        any = any || labels[size_t(t)];
      }
      if (!any) continue;
      int split = 0;
      if (c == 3 || c == 4) split = 2;
      else if (c == 0 && bs >= rs.validation_begin && bs < rs.validation_end) split = 1;
      expect.push_back({c, bs, labels, split});
    }
  }

  bool agree = ds.num_examples() == int64_t(expect.size());
  int64_t mismatches = agree ? 0 : -1;
  if (agree) {
    mismatches = 0;
    for (int64_t i = 0; i < ds.num_examples(); ++i) {
      const OracleBin& e = expect[size_t(i)];
      bool same = ds.coords[size_t(i)].chrom == e.chrom && ds.coords[size_t(i)].start == e.start &&
                  int(ds.split[size_t(i)]) == e.split;
      for (int t = 0; t < 3 && same; ++t) same = ds.label(i, t) == e.labels[size_t(t)];
      if (!same) ++mismatches;
    }
    agree = mismatches == 0;
  }
  detail = fmt("boundary ok; %lld candidate bins, %lld kept, %s", (long long)candidates,
               (long long)ds.num_examples(),
               agree ? "oracle agrees exactly" : fmt("%lld mismatches", (long long)mismatches).c_str());
  return candidates >= 10000 && agree;
}

// ---- criterion 8: end-to-end reproducibility -------------------------------
// the full synthetic pipeline, run twice through the command-line binary with
// identical seeds, produces byte-identical grouping files and score tables

#ifndef MTG_CLI_PATH
#define MTG_CLI_PATH "mtg"
#endif

bool criterion_reproducibility(std::string& detail) {
  auto shell = [](const std::string& cmd) {
    int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
    return rc == 0;
  };
  std::string base = fresh_dir("c8");
  std::string synth_cfg = base + "/synth.json";
  std::string spec_cfg = base + "/spec.json";
  {
    std::ofstream(synth_cfg)
        << R"({"groups":2,"tasks_per_group":2,"seq_length":40,"num_examples":600,
               "motif_length":6,"own_motifs_per_group":1,"shared_motifs":0,
               "conflict_strength":0.0,"positive_rate":0.50,"rate_spread":0.04,
               "label_noise":0.05,"implant_prob":0.5,"validation_fraction":0.2,
               "test_fraction":0.2,"seed":9})";
    std::ofstream(spec_cfg)
        << R"({"input_length":40,"blocks":[{"filters":6,"width":5,"pool":4}],"head_hidden":6})";
  }
  std::string train_flags =
      " --batch-size 16 --max-steps 100 --validate-every 20 --patience 3 --lr 0.1 --seed 5";

  for (const char* run : {"a", "b"}) {
    std::string dir = base + "/" + run;
    std::string cli = std::string(MTG_CLI_PATH) + " --out-dir " + dir + " ";
    bool ok = shell(cli + "synth --config " + synth_cfg) &&
              shell(cli + "train-joint --model-spec " + spec_cfg + train_flags) &&
              shell(cli + "embed") &&
              shell(cli + "cluster --algo kmeans --k 2 --seed 1") &&
              shell(cli + "train-groups --grouping grouping-kmeans-k2 --model-spec " + spec_cfg +
                    train_flags) &&
              shell(cli + "report --method SMTL=model-joint \"--method=KMTL=model-kmeans-k2-g*\""
                          " --baseline SMTL");
    if (!ok) {
      detail = std::string("pipeline run ") + run + " failed";
      return false;
    }
  }
  std::vector<std::string> files{"grouping-kmeans-k2.tsv", "report/scores.tsv",
                                 "report/pairwise.tsv", "report/improvement.tsv",
                                 "report/summary.json"};
  std::vector<std::string> differ;
  for (const std::string& f : files)
    if (read_bytes(base + "/a/" + f) != read_bytes(base + "/b/" + f)) differ.push_back(f);
  if (differ.empty()) {
    detail = fmt("%zu grouping/score files byte-identical across reruns", files.size());
    return true;
  }
  detail = "files differ between reruns:";
  for (const std::string& f : differ) detail += " " + f;
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  struct Entry {
    int id;
    const char* name;
    std::function<bool(std::string&)> fn;
  };
  std::vector<Entry> entries{
      {1, "gradient suite", criterion_gradients},
      {2, "k-means optimality", criterion_kmeans_optimality},
      {3, "clustering oracles", criterion_clustering_oracles},
      {4, "planted-group recovery", criterion_planted_recovery},
      {5, "negative-transfer reduction", criterion_negative_transfer},
      {6, "protocol fidelity", criterion_protocol},
      {7, "data-layer fidelity", criterion_data_layer},
      {8, "end-to-end reproducibility", criterion_reproducibility},
  };

  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

  int failures = 0, ran = 0;
  for (const Entry& e : entries) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), e.id) == wanted.end()) continue;
    ++ran;
    std::string detail;
    bool pass = false;
    try {
      pass = e.fn(detail);
    } catch (const Error& ex) {
      detail = std::string("unexpected error: ") + ex.what();
    } catch (const std::exception& ex) {
      detail = std::string("unexpected exception: ") + ex.what();
    }
    std::printf("criterion %d %s %s: %s\n", e.id, pass ? "PASS" : "FAIL", e.name, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  }
  std::printf("acceptance: %d/%d criteria passed\n", ran - failures, ran);
  return failures == 0 ? 0 : 1;
}

#include "trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <utility>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "parallel.hpp"

namespace mtg {

using nlohmann::json;

void TrainingConfig::validate() const {
  if (batch_size < 1) fail(Errc::invalid_argument, "batch_size must be >= 1");
  if (max_steps < 1) fail(Errc::invalid_argument, "max_steps must be >= 1");
  if (validate_every < 1) fail(Errc::invalid_argument, "validate_every must be >= 1");
  if (patience < 1) fail(Errc::invalid_argument, "patience must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    fail(Errc::invalid_argument, "learning_rate must be finite and > 0");
  if (threads < 1 || threads > 256)
    fail(Errc::invalid_argument, "threads must be in [1,256]");
}

std::string TrainingConfig::to_json() const {
  json j;
  j["batch_size"] = batch_size;
  j["max_steps"] = max_steps;
  j["validate_every"] = validate_every;
  j["patience"] = patience;
  j["learning_rate"] = learning_rate;
  j["seed"] = seed;
  j["threads"] = threads;
  return j.dump(2);
}

TrainingConfig TrainingConfig::from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(Errc::parse, std::string("training config: ") + e.what());
  }
  TrainingConfig c;
  try {
    if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<int>();
    if (j.contains("max_steps")) c.max_steps = j["max_steps"].get<int64_t>();
    if (j.contains("validate_every")) c.validate_every = j["validate_every"].get<int64_t>();
    if (j.contains("patience")) c.patience = j["patience"].get<int>();
    if (j.contains("learning_rate")) c.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
    if (j.contains("threads")) c.threads = j["threads"].get<int>();
  } catch (const json::exception& e) {
    fail(Errc::parse, std::string("training config: ") + e.what());
  }
  c.validate();
  return c;
}

const char* stop_reason_name(StopReason r) {
  return r == StopReason::patience_exhausted ? "patience_exhausted" : "max_steps_reached";
}

std::string TrainingLog::to_tsv() const {
  char buf[64];
  std::string s;
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  s += "# learning_rate\t" + num(learning_rate) + "\n";
  s += "# effective_seed\t" + std::to_string(effective_seed) + "\n";
  s += "# best_step\t" + std::to_string(best_step) + "\n";
  s += "# best_loss\t" + num(best_loss) + "\n";
  s += "# final_step\t" + std::to_string(final_step) + "\n";
  s += "# stop\t" + std::string(stop_reason_name(stop)) + "\n";
  s += "step\tvalidation_loss\n";
  for (const Entry& e : entries) s += std::to_string(e.step) + "\t" + num(e.loss) + "\n";
  return s;
}

bool early_stop_check(const TrainingLog& log, int patience) {
  if (patience < 1) fail(Errc::invalid_argument, "patience must be >= 1");
  if (log.entries.empty()) return false;
  size_t best = 0;
  for (size_t i = 1; i < log.entries.size(); ++i)
    if (log.entries[i].loss < log.entries[best].loss) best = i;
  return log.entries.size() - 1 - best >= size_t(patience);
}

namespace {

// One training worker: a model fork plus reusable per-shard input buffers.
struct Worker {
  Model model;
  std::vector<Tensor*> params;
  Tensor x;                     // [shard, 4, L]
  std::vector<Tensor> y;        // per head [shard, 1]
  std::vector<Tensor> preds;
  Tape tape;
  double loss_sum = 0;          // summed BCE over this shard, all heads
};

void fill_batch(const TaskDataset& ds, std::span<const int64_t> rows, std::span<const int> cols,
                Tensor& x, std::vector<Tensor>& y) {
  int L = ds.window_length;
  int n = int(rows.size());
  for (int k = 0; k < n; ++k) {
    codes_to_onehot(ds.seq_of(rows[size_t(k)]), x.data() + int64_t(k) * 4 * L);
    for (size_t h = 0; h < cols.size(); ++h)
      y[h].data()[k] = float(ds.label(rows[size_t(k)], cols[h]));
  }
}

// Validation loss: sum over heads of the mean BCE over the validation split.
// Threaded over examples; per-worker partials are combined in worker order.
double validation_loss(const Model& m, const TaskDataset& ds, std::span<const int64_t> idx,
                       int threads) {
  int H = m.num_heads();
  int L = ds.window_length;
  int64_t n = int64_t(idx.size());
  if (threads > 8 && n / threads < 16) threads = std::max(1, int(n / 16));
  std::vector<std::vector<double>> partial(size_t(std::max(threads, 1)),
                                           std::vector<double>(size_t(H), 0.0));
  parallel_shards(n, threads, [&](int w, int64_t lo, int64_t hi) {
    const int kChunk = 256;
    Tensor x({kChunk, 4, L});
    std::vector<float> target(size_t(kChunk), 0.0f);
    std::vector<int> heads(size_t(H), 0);
    for (int h = 0; h < H; ++h) heads[size_t(h)] = h;
    for (int64_t at = lo; at < hi; at += kChunk) {
      int nb = int(std::min<int64_t>(kChunk, hi - at));
      Tensor xb = nb == kChunk ? x : Tensor({nb, 4, L});
      for (int k = 0; k < nb; ++k)
        codes_to_onehot(ds.seq_of(idx[size_t(at + k)]), xb.data() + int64_t(k) * 4 * L);
      Tensor probs = m.forward_heads(xb, heads);  // [nb, H]
      for (int h = 0; h < H; ++h) {
        double s = 0;
        for (int k = 0; k < nb; ++k) {
          float p = probs.data()[int64_t(k) * H + h];
          float t = float(ds.label(idx[size_t(at + k)], m.source_tasks[size_t(h)]));
          s += bce_sum(&p, &t, 1);
        }
        partial[size_t(w)][size_t(h)] += s;
      }
    }
  });
  double total = 0;
  for (int h = 0; h < H; ++h) {
    double s = 0;
    for (int w = 0; w < int(partial.size()); ++w) s += partial[size_t(w)][size_t(h)];
    total += s / double(n);
  }
  return total;
}

}  // namespace

TrainResult train_model(Model master, const TaskDataset& ds, const TrainingConfig& cfg,
                        uint64_t stream_seed) {
  cfg.validate();
  ds.validate();
  const std::vector<int>& cols = master.source_tasks;
  if (cols.empty()) fail(Errc::invalid_argument, "model selects no tasks");
  for (int c : cols)
    if (c < 0 || c >= ds.num_tasks())
      fail(Errc::invalid_argument, "model task column " + std::to_string(c) +
                                       " out of range for dataset with " +
                                       std::to_string(ds.num_tasks()) + " tasks");
  if (ds.window_length != master.spec().input_length)
    fail(Errc::shape_mismatch, "model expects windows of length " +
                                   std::to_string(master.spec().input_length) +
                                   ", dataset has " + std::to_string(ds.window_length));

  std::vector<int64_t> train_idx = ds.indices_of(Split::train);
  std::vector<int64_t> val_idx = ds.indices_of(Split::validation);
  if (train_idx.empty()) fail(Errc::invalid_argument, "training split is empty");
  if (val_idx.empty()) fail(Errc::invalid_argument, "validation split is empty");
  if (int64_t(cfg.batch_size) > int64_t(train_idx.size()))
    fail(Errc::invalid_argument, "batch_size " + std::to_string(cfg.batch_size) +
                                     " exceeds training split size " +
                                     std::to_string(train_idx.size()));

  int H = master.num_heads();
  int L = ds.window_length;
  int B = cfg.batch_size;
  int W = std::min(cfg.threads, B);

  // fixed shard boundaries over the batch
  std::vector<std::pair<int, int>> shards;
  {
    int base = B / W, extra = B % W, at = 0;
    for (int w = 0; w < W; ++w) {
      int len = base + (w < extra ? 1 : 0);
      shards.emplace_back(at, at + len);
      at += len;
    }
  }

  std::vector<Worker> workers(static_cast<size_t>(W));
  std::vector<int> heads(size_t(H), 0);
  for (int h = 0; h < H; ++h) heads[size_t(h)] = h;
  for (int w = 0; w < W; ++w) {
    workers[size_t(w)].model = master.fork();
    workers[size_t(w)].params = workers[size_t(w)].model.parameters();
    int n = shards[size_t(w)].second - shards[size_t(w)].first;
    workers[size_t(w)].x = Tensor({n, 4, L});
    for (int h = 0; h < H; ++h) workers[size_t(w)].y.emplace_back(std::vector<int>{n, 1});
  }
  std::vector<Tensor*> master_params = master.parameters();
  std::vector<Tensor> master_view;  // handles share storage with master_params
  for (Tensor* mp : master_params) master_view.push_back(*mp);

  Rng shuffle_rng(splitmix64(stream_seed ^ 0x736875666665ULL));
  std::vector<int64_t> order = train_idx;
  shuffle_rng.shuffle(order);
  size_t pos = 0;

  TrainingLog log;
  log.learning_rate = cfg.learning_rate;
  log.effective_seed = stream_seed;
  double best = std::numeric_limits<double>::infinity();
  int64_t best_step = 0;
  std::vector<Tensor> best_snap;
  auto t0 = std::chrono::steady_clock::now();

  auto validate_now = [&](int64_t step) {
    double vloss = validation_loss(master, ds, val_idx, cfg.threads);
    if (!std::isfinite(vloss))
      fail(Errc::numeric, "non-finite validation loss at step " + std::to_string(step));
    log.entries.push_back({step, vloss});
    if (vloss < best) {
      best = vloss;
      best_step = step;
      best_snap = master.parameter_snapshot();
    }
  };

  int64_t step = 0;
  for (step = 1; step <= cfg.max_steps; ++step) {
    if (pos + size_t(B) > order.size()) {
      shuffle_rng.shuffle(order);
      pos = 0;
    }
    std::span<const int64_t> batch(order.data() + pos, size_t(B));
    pos += size_t(B);

    parallel_shards(W, W, [&](int, int64_t wlo, int64_t whi) {
      for (int64_t wi = wlo; wi < whi; ++wi) {
        Worker& wk = workers[size_t(wi)];
        auto [lo, hi] = shards[size_t(wi)];
        fill_batch(ds, batch.subspan(size_t(lo), size_t(hi - lo)), cols, wk.x, wk.y);
        for (Tensor* p : wk.params) p->zero_grad();
        wk.tape.reset();
        wk.preds = wk.model.forward_tape(wk.tape, wk.x, heads);
        std::vector<Tensor> terms;
        wk.loss_sum = 0;
        for (int h = 0; h < H; ++h) {
          terms.push_back(wk.tape.bce_sum_loss(wk.preds[size_t(h)], wk.y[size_t(h)]));
          wk.loss_sum += bce_sum(wk.preds[size_t(h)].data(), wk.y[size_t(h)].data(),
                                 wk.preds[size_t(h)].size());
        }
        Tensor total = wk.tape.add_scalars(terms);
        wk.tape.backward(total, 1.0f / float(B));
      }
    });

    double train_loss = 0;
    for (int w = 0; w < W; ++w) train_loss += workers[size_t(w)].loss_sum;
    train_loss /= double(B);
    if (!std::isfinite(train_loss))
      fail(Errc::numeric, "non-finite training loss at step " + std::to_string(step));

    // reduce worker gradients into the master parameters, in worker order
    for (size_t pi = 0; pi < master_params.size(); ++pi) {
      Tensor* mp = master_params[pi];
      float* g = mp->grad();
      int64_t n = mp->size();
      std::memset(g, 0, size_t(n) * sizeof(float));
      for (int w = 0; w < W; ++w) {
        const float* wg = std::as_const(*workers[size_t(w)].params[pi]).grad();
        if (!wg) continue;
        for (int64_t i = 0; i < n; ++i) g[i] += wg[i];
      }
    }
    sgd_step(master_view, float(cfg.learning_rate));

    if (step % cfg.validate_every == 0) {
      validate_now(step);
      if (early_stop_check(log, cfg.patience)) {
        log.stop = StopReason::patience_exhausted;
        break;
      }
    }
  }

  if (step > cfg.max_steps) {
    // ran to the step budget; make sure the log covers the end
    log.stop = StopReason::max_steps_reached;
    step = cfg.max_steps;
    if (log.entries.empty() || log.entries.back().step != step) {
      validate_now(step);
    }
  }
  log.final_step = step;
  log.best_step = best_step;
  log.best_loss = best;
  log.wall_seconds =
      std::chrono::duration_cast<std::chrono::duration<double>>(std::chrono::steady_clock::now() - t0)
          .count();

  master.load_parameter_snapshot(best_snap);
  return {std::move(master), std::move(log)};
}

TrainResult train_joint(const ModelSpec& spec, const TaskDataset& ds, std::span<const int> tasks,
                        const TrainingConfig& cfg) {
  if (tasks.empty()) fail(Errc::invalid_argument, "task subset is empty");
  std::vector<int> subset(tasks.begin(), tasks.end());
  std::sort(subset.begin(), subset.end());
  for (size_t i = 0; i < subset.size(); ++i) {
    if (subset[i] < 0 || subset[i] >= ds.num_tasks())
      fail(Errc::invalid_argument, "task index " + std::to_string(subset[i]) +
                                       " out of range for dataset with " +
                                       std::to_string(ds.num_tasks()) + " tasks");
    if (i > 0 && subset[i] == subset[i - 1])
      fail(Errc::invalid_argument, "task index " + std::to_string(subset[i]) +
                                       " appears twice in the subset");
  }
  uint64_t es = derive_seed(cfg.seed, subset);
  ModelSpec ms = spec;
  ms.input_length = ds.window_length;
  ms.in_channels = 4;
  ms.num_tasks = int(subset.size());
  Model m = Model::build(ms, es);
  m.source_tasks = subset;
  for (size_t i = 0; i < subset.size(); ++i)
    m.task_ids[i] = ds.tasks[size_t(subset[i])].id;
  return train_model(std::move(m), ds, cfg, es);
}

double lr_search(const std::function<double(double)>& train_fn, LrMode mode,
                 std::vector<LrProbe>* probes) {
  if (mode == LrMode::single_task) {
    // fixed setting; no search
    if (probes) probes->push_back({0.01, std::numeric_limits<double>::quiet_NaN()});
    return 0.01;
  }
  std::vector<LrProbe> all;
  auto probe = [&](double lr) {
    double loss = train_fn(lr);
    all.push_back({lr, loss});
  };
  for (int i = 1; i <= 7; ++i) probe(double(5 * i) / 100.0);
  auto best_of = [&]() -> const LrProbe* {
    const LrProbe* best = nullptr;
    for (const LrProbe& p : all) {
      if (!std::isfinite(p.loss)) continue;
      if (!best || p.loss < best->loss || (p.loss == best->loss && p.lr < best->lr)) best = &p;
    }
    return best;
  };
  const LrProbe* coarse = best_of();
  if (!coarse) {
    std::string msg = "every learning rate diverged:";
    for (const LrProbe& p : all)
      msg += " (" + std::to_string(p.lr) + " -> " + std::to_string(p.loss) + ")";
    if (probes) *probes = all;
    fail(Errc::numeric, msg);
  }
  double center = coarse->lr;
  double delta = 25.0 / 1000.0;
  if (center - delta > 0) probe(center - delta);
  probe(center + delta);
  const LrProbe* final_best = best_of();
  if (probes) *probes = all;
  return final_best->lr;
}

std::vector<GroupTrainResult> run_grouping_mode(const ModelSpec& spec, const TaskDataset& ds,
                                                const std::vector<std::vector<int>>& groups,
                                                const TrainingConfig& cfg, int workers) {
  if (groups.empty()) fail(Errc::invalid_argument, "no groups to train");
  std::vector<int> seen(size_t(ds.num_tasks()), 0);
  for (const std::vector<int>& g : groups) {
    if (g.empty()) fail(Errc::invalid_argument, "a group is empty");
    for (int t : g) {
      if (t < 0 || t >= ds.num_tasks())
        fail(Errc::invalid_argument, "group task index " + std::to_string(t) + " out of range");
      if (seen[size_t(t)]++)
        fail(Errc::invalid_argument, "task " + std::to_string(t) + " appears in two groups");
    }
  }
  for (int t = 0; t < ds.num_tasks(); ++t)
    if (!seen[size_t(t)])
      fail(Errc::invalid_argument, "task " + std::to_string(t) + " is missing from the grouping");

  std::vector<GroupTrainResult> results(groups.size());
  parallel_jobs(int(groups.size()), workers, [&](int gi) {
    GroupTrainResult r;
    r.group = gi;
    r.tasks = groups[size_t(gi)];
    std::sort(r.tasks.begin(), r.tasks.end());
    r.result = train_joint(spec, ds, r.tasks, cfg);
    results[size_t(gi)] = std::move(r);
  });
  return results;
}

}  // namespace mtg

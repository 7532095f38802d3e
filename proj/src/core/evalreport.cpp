#include "evalreport.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "io.hpp"
#include "parallel.hpp"

namespace mtg {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string lower(std::string s) {
  for (char& c : s) c = char(std::tolower(uint8_t(c)));
  return s;
}

void require_same_tasks(const ScoreSet& a, const ScoreSet& b) {
  if (a.scores.size() != b.scores.size())
    fail(Errc::invalid_argument, "score sets '" + a.method + "' and '" + b.method +
                                     "' cover " + std::to_string(a.scores.size()) + " vs " +
                                     std::to_string(b.scores.size()) + " tasks");
  for (const TaskScore& s : a.scores)
    if (b.find(s.task_id) < 0)
      fail(Errc::invalid_argument, "task '" + s.task_id + "' present in '" + a.method +
                                       "' but missing from '" + b.method + "'");
}

TaskScore score_from_counts(int64_t tp, int64_t fp, int64_t fn, int64_t tn) {
  TaskScore s;
  s.tp = tp;
  s.fp = fp;
  s.fn = fn;
  s.tn = tn;
  s.positives_in_test = tp + fn;
  s.examples = tp + fp + fn + tn;
  s.precision = tp + fp > 0 ? double(tp) / double(tp + fp) : 0.0;
  s.recall = tp + fn > 0 ? double(tp) / double(tp + fn) : 0.0;
  s.f1 = s.precision + s.recall > 0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

}  // namespace

TaskScore f1_score(std::span<const float> probabilities, std::span<const uint8_t> labels,
                   double threshold) {
  if (probabilities.empty()) fail(Errc::invalid_argument, "empty test set");
  if (probabilities.size() != labels.size())
    fail(Errc::shape_mismatch, "got " + std::to_string(probabilities.size()) +
                                   " predictions for " + std::to_string(labels.size()) +
                                   " labels");
  int64_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (size_t i = 0; i < probabilities.size(); ++i) {
    if (labels[i] > 1)
      fail(Errc::invalid_argument, "label at position " + std::to_string(i) + " is " +
                                       std::to_string(int(labels[i])) + ", expected 0 or 1");
    bool pred = double(probabilities[i]) >= threshold;
    bool pos = labels[i] == 1;
    if (pred && pos) ++tp;
    else if (pred) ++fp;
    else if (pos) ++fn;
    else ++tn;
  }
  return score_from_counts(tp, fp, fn, tn);
}

double ScoreSet::mean_f1() const {
  if (scores.empty()) fail(Errc::invalid_argument, "score set '" + method + "' is empty");
  double sum = 0;
  for (const TaskScore& s : scores) sum += s.f1;
  return sum / double(scores.size());
}

int ScoreSet::find(const std::string& task_id) const {
  for (size_t i = 0; i < scores.size(); ++i)
    if (scores[i].task_id == task_id) return int(i);
  return -1;
}

void ScoreSet::save_tsv(const std::string& path) const {
  std::string out;
  out += "# method\t" + method + "\n";
  out += "task_id\tf1\tprecision\trecall\ttp\tfp\tfn\ttn\tpositives_in_test\texamples\n";
  for (const TaskScore& s : scores) {
    out += s.task_id + "\t" + fmt(s.f1) + "\t" + fmt(s.precision) + "\t" + fmt(s.recall) + "\t" +
           std::to_string(s.tp) + "\t" + std::to_string(s.fp) + "\t" + std::to_string(s.fn) +
           "\t" + std::to_string(s.tn) + "\t" + std::to_string(s.positives_in_test) + "\t" +
           std::to_string(s.examples) + "\n";
  }
  write_text_file(path, out);
}

ScoreSet ScoreSet::load_tsv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  ScoreSet set;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# method\t", 0) == 0) {
      set.method = line.substr(9);
      continue;
    }
    if (line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // column header
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, '\t')) cells.push_back(cell);
    if (cells.size() != 10)
      fail(Errc::parse, path + ":" + std::to_string(lineno) + ": expected 10 columns, got " +
                            std::to_string(cells.size()));
    TaskScore s;
    s.task_id = cells[0];
    try {
      s.f1 = std::stod(cells[1]);
      s.precision = std::stod(cells[2]);
      s.recall = std::stod(cells[3]);
      s.tp = std::stoll(cells[4]);
      s.fp = std::stoll(cells[5]);
      s.fn = std::stoll(cells[6]);
      s.tn = std::stoll(cells[7]);
      s.positives_in_test = std::stoll(cells[8]);
      s.examples = std::stoll(cells[9]);
    } catch (const std::exception&) {
      fail(Errc::parse, path + ":" + std::to_string(lineno) + ": non-numeric score cell");
    }
    set.scores.push_back(std::move(s));
  }
  if (set.scores.empty()) fail(Errc::parse, path + ": no score rows");
  return set;
}

ScoreSet evaluate_model(const Model& model, const TaskDataset& ds, Split split,
                        const std::string& method, double threshold, int threads) {
  if (model.num_heads() < 1) fail(Errc::invalid_argument, "model has no heads");
  if (model.spec().input_length != ds.window_length)
    fail(Errc::shape_mismatch, "model expects windows of length " +
                                   std::to_string(model.spec().input_length) +
                                   ", dataset has " + std::to_string(ds.window_length));
  if (!(threshold > 0.0 && threshold < 1.0))
    fail(Errc::invalid_argument, "threshold must be in (0,1)");
  int H = model.num_heads();
  std::vector<int> task_cols(size_t(H), 0);
  for (int h = 0; h < H; ++h) {
    const std::string& id = model.task_ids[size_t(h)];
    int col = ds.task_index(id);
    if (col < 0)
      fail(Errc::invalid_argument, "model task '" + id + "' not present in the dataset");
    task_cols[size_t(h)] = col;
  }
  std::vector<int64_t> idx = ds.indices_of(split);
  if (idx.empty())
    fail(Errc::invalid_argument, std::string("empty test set: no examples in split '") +
                                     split_name(split) + "'");

  int L = ds.window_length;
  int workers = std::max(1, threads);
  workers = int(std::min<int64_t>(workers, int64_t(idx.size())));
  // per worker, per head: tp fp fn tn
  std::vector<std::vector<int64_t>> counts(size_t(workers),
                                           std::vector<int64_t>(size_t(H) * 4, 0));
  parallel_shards(int64_t(idx.size()), workers, [&](int w, int64_t begin, int64_t end) {
    constexpr int64_t kChunk = 256;
    std::vector<int64_t>& cnt = counts[size_t(w)];
    for (int64_t cb = begin; cb < end; cb += kChunk) {
      int64_t ce = std::min(end, cb + kChunk);
      int b = int(ce - cb);
      Tensor x({b, 4, L});
      for (int64_t r = cb; r < ce; ++r)
        codes_to_onehot(ds.seq_of(idx[size_t(r)]), x.data() + (r - cb) * 4 * L);
      Tensor probs = model.forward_all_heads(x);
      const float* pv = probs.data();
      for (int r = 0; r < b; ++r) {
        int64_t ex = idx[size_t(cb + r)];
        for (int h = 0; h < H; ++h) {
          bool pred = double(pv[r * H + h]) >= threshold;
          bool pos = ds.label(ex, task_cols[size_t(h)]) == 1;
          int slot = pred ? (pos ? 0 : 1) : (pos ? 2 : 3);
          ++cnt[size_t(h) * 4 + size_t(slot)];
        }
      }
    }
  });

  ScoreSet set;
  set.method = method;
  for (int h = 0; h < H; ++h) {
    int64_t c[4] = {0, 0, 0, 0};
    for (int w = 0; w < workers; ++w)
      for (int s = 0; s < 4; ++s) c[s] += counts[size_t(w)][size_t(h) * 4 + size_t(s)];
    TaskScore s = score_from_counts(c[0], c[1], c[2], c[3]);
    s.task_id = model.task_ids[size_t(h)];
    set.scores.push_back(std::move(s));
  }
  return set;
}

ScoreSet merge_scores(const std::string& method, std::span<const ScoreSet> parts) {
  if (parts.empty()) fail(Errc::invalid_argument, "no score sets to merge");
  ScoreSet out;
  out.method = method;
  std::set<std::string> seen;
  for (const ScoreSet& p : parts)
    for (const TaskScore& s : p.scores) {
      if (!seen.insert(s.task_id).second)
        fail(Errc::invalid_argument, "task '" + s.task_id + "' scored more than once");
      out.scores.push_back(s);
    }
  if (out.scores.empty()) fail(Errc::invalid_argument, "merged score set is empty");
  return out;
}

std::vector<ImprovementRow> improvement_table(
    const ScoreSet& reference, const ScoreSet& baseline,
    const std::map<std::string, std::string>& stratum_of_task) {
  if (reference.scores.empty()) fail(Errc::invalid_argument, "reference score set is empty");
  require_same_tasks(reference, baseline);

  std::vector<std::string> strata{"all"};
  {
    std::set<std::string> distinct;
    for (const TaskScore& s : reference.scores) {
      auto it = stratum_of_task.find(s.task_id);
      if (it != stratum_of_task.end()) distinct.insert(it->second);
    }
    strata.insert(strata.end(), distinct.begin(), distinct.end());
  }

  std::vector<ImprovementRow> rows;
  for (const std::string& stratum : strata) {
    double ref_sum = 0, base_sum = 0;
    int n = 0;
    for (const TaskScore& s : reference.scores) {
      if (stratum != "all") {
        auto it = stratum_of_task.find(s.task_id);
        if (it == stratum_of_task.end() || it->second != stratum) continue;
      }
      ref_sum += s.f1;
      base_sum += baseline.scores[size_t(baseline.find(s.task_id))].f1;
      ++n;
    }
    ImprovementRow row;
    row.stratum = stratum;
    row.num_tasks = n;
    row.reference_mean = ref_sum / n;
    row.baseline_mean = base_sum / n;
    if (row.baseline_mean == 0)
      fail(Errc::numeric, "baseline mean F1 is zero in stratum '" + stratum +
                              "'; improvement is undefined");
    row.percent = 100.0 * (row.reference_mean - row.baseline_mean) / row.baseline_mean;
    rows.push_back(row);
  }
  return rows;
}

PairwiseComparison pairwise_comparison(const ScoreSet& a, const ScoreSet& b) {
  if (a.scores.empty()) fail(Errc::invalid_argument, "score set '" + a.method + "' is empty");
  require_same_tasks(a, b);
  PairwiseComparison cmp;
  cmp.method_a = a.method;
  cmp.method_b = b.method;
  int64_t a_below = 0, b_below = 0;
  for (const TaskScore& s : a.scores) {
    const TaskScore& t = b.scores[size_t(b.find(s.task_id))];
    cmp.records.push_back({s.task_id, s.f1, t.f1});
    if (s.f1 < t.f1) ++a_below;
    if (t.f1 < s.f1) ++b_below;
  }
  cmp.frac_a_below_b = double(a_below) / double(a.scores.size());
  cmp.frac_b_below_a = double(b_below) / double(a.scores.size());
  return cmp;
}

std::map<std::string, std::string> strata_from_metadata(const TaskDataset& ds,
                                                        const std::string& key) {
  std::map<std::string, std::string> out;
  for (const TaskInfo& t : ds.tasks) {
    auto it = t.metadata.find(key);
    if (it != t.metadata.end()) out[t.id] = it->second;
  }
  return out;
}

void write_report(const std::string& dir, std::span<const ScoreSet> methods,
                  const std::string& baseline_method,
                  const std::map<std::string, std::string>& stratum_of_task) {
  if (methods.empty()) fail(Errc::invalid_argument, "no score sets to report");
  for (const ScoreSet& m : methods)
    if (m.scores.empty())
      fail(Errc::invalid_argument, "score set '" + m.method + "' is empty");
  {
    std::set<std::string> names;
    for (const ScoreSet& m : methods)
      if (!names.insert(m.method).second)
        fail(Errc::invalid_argument, "duplicate method label '" + m.method + "'");
  }
  for (size_t i = 1; i < methods.size(); ++i) require_same_tasks(methods[0], methods[i]);

  const ScoreSet* baseline = nullptr;
  if (!baseline_method.empty()) {
    for (const ScoreSet& m : methods)
      if (m.method == baseline_method) baseline = &m;
    if (!baseline)
      fail(Errc::invalid_argument, "baseline method '" + baseline_method +
                                       "' is not among the score sets");
  }
  const ScoreSet* stl = nullptr;
  for (const ScoreSet& m : methods)
    if (lower(m.method) == "stl") stl = &m;

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(Errc::io, "cannot create report directory " + dir + ": " + ec.message());
  auto at = [&](const char* name) { return (std::filesystem::path(dir) / name).string(); };

  // scores.tsv: long format, one row per method x task
  {
    std::string out =
        "method\ttask_id\tf1\tprecision\trecall\ttp\tfp\tfn\ttn\tpositives_in_test\texamples\n";
    for (const ScoreSet& m : methods)
      for (const TaskScore& s : m.scores)
        out += m.method + "\t" + s.task_id + "\t" + fmt(s.f1) + "\t" + fmt(s.precision) + "\t" +
               fmt(s.recall) + "\t" + std::to_string(s.tp) + "\t" + std::to_string(s.fp) + "\t" +
               std::to_string(s.fn) + "\t" + std::to_string(s.tn) + "\t" +
               std::to_string(s.positives_in_test) + "\t" + std::to_string(s.examples) + "\n";
    write_text_file(at("scores.tsv"), out);
  }

  // pairwise.tsv: wide per-task F1, one column per method
  {
    std::string out = "task_id";
    for (const ScoreSet& m : methods) out += "\t" + m.method;
    out += "\n";
    for (const TaskScore& s : methods[0].scores) {
      out += s.task_id;
      for (const ScoreSet& m : methods) out += "\t" + fmt(m.scores[size_t(m.find(s.task_id))].f1);
      out += "\n";
    }
    write_text_file(at("pairwise.tsv"), out);
  }

  // improvement.tsv: every method against the chosen baseline
  if (baseline) {
    std::string out =
        "reference\tbaseline\tstratum\tnum_tasks\treference_mean_f1\tbaseline_mean_f1\t"
        "improvement_percent\n";
    for (const ScoreSet& m : methods) {
      if (&m == baseline) continue;
      for (const ImprovementRow& r : improvement_table(m, *baseline, stratum_of_task))
        out += m.method + "\t" + baseline->method + "\t" + r.stratum + "\t" +
               std::to_string(r.num_tasks) + "\t" + fmt(r.reference_mean) + "\t" +
               fmt(r.baseline_mean) + "\t" + fmt(r.percent) + "\n";
    }
    write_text_file(at("improvement.tsv"), out);
  }

  // summary.json: everything machine-readable in one document
  {
    nlohmann::json doc;
    doc["num_tasks"] = methods[0].scores.size();
    nlohmann::json marr = nlohmann::json::array();
    for (const ScoreSet& m : methods) {
      nlohmann::json jm;
      jm["method"] = m.method;
      jm["mean_f1"] = m.mean_f1();
      marr.push_back(jm);
    }
    doc["methods"] = marr;

    if (baseline) {
      doc["baseline"] = baseline->method;
      nlohmann::json iarr = nlohmann::json::array();
      for (const ScoreSet& m : methods) {
        if (&m == baseline) continue;
        for (const ImprovementRow& r : improvement_table(m, *baseline, stratum_of_task)) {
          nlohmann::json jr;
          jr["reference"] = m.method;
          jr["stratum"] = r.stratum;
          jr["num_tasks"] = r.num_tasks;
          jr["reference_mean_f1"] = r.reference_mean;
          jr["baseline_mean_f1"] = r.baseline_mean;
          jr["improvement_percent"] = r.percent;
          iarr.push_back(jr);
        }
      }
      doc["improvement_vs_baseline"] = iarr;
    }

    nlohmann::json parr = nlohmann::json::array();
    for (size_t i = 0; i < methods.size(); ++i)
      for (size_t j = i + 1; j < methods.size(); ++j) {
        PairwiseComparison cmp = pairwise_comparison(methods[i], methods[j]);
        nlohmann::json jc;
        jc["method_a"] = cmp.method_a;
        jc["method_b"] = cmp.method_b;
        jc["frac_a_below_b"] = cmp.frac_a_below_b;
        jc["frac_b_below_a"] = cmp.frac_b_below_a;
        parr.push_back(jc);
      }
    doc["pairwise"] = parr;

    if (stl) {
      nlohmann::json narr = nlohmann::json::array();
      for (const ScoreSet& m : methods) {
        if (&m == stl) continue;
        PairwiseComparison cmp = pairwise_comparison(m, *stl);
        nlohmann::json jn;
        jn["method"] = m.method;
        jn["fraction_below_stl"] = cmp.frac_a_below_b;
        narr.push_back(jn);
      }
      doc["negative_transfer_vs_stl"] = narr;
    }

    write_text_file(at("summary.json"), doc.dump(2) + "\n");
  }
}

}  // namespace mtg

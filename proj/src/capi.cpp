// C API shim: thin translation between the C handle surface in include/mtg.h
// and the C++ core. Every entry point catches exceptions and maps them to a
// status code; messages land in a per-thread buffer for mtg_last_error().

#include "mtg.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <map>
#include <new>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "core/clustering.hpp"
#include "core/data.hpp"
#include "core/digest.hpp"
#include "core/embedding.hpp"
#include "core/error.hpp"
#include "core/evalreport.hpp"
#include "core/model.hpp"
#include "core/trainer.hpp"

using nlohmann::json;

struct mtg_dataset { mtg::TaskDataset v; };
struct mtg_model { mtg::Model v; };
struct mtg_embedding { mtg::TaskEmbedding v; };
struct mtg_grouping { mtg::Grouping v; };
struct mtg_scores { mtg::ScoreSet v; };

namespace {

thread_local std::string tl_error;

mtg_status set_error(mtg_status s, const std::string& msg) {
  tl_error = msg;
  return s;
}

template <typename Fn>
mtg_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    return MTG_OK;
  } catch (const mtg::Error& e) {
    return set_error(static_cast<mtg_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::exception& e) {
    return set_error(MTG_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(MTG_ERR_INTERNAL, "unknown failure");
  }
}

void need(bool cond, const char* msg) {
  if (!cond) mtg::fail(mtg::Errc::invalid_argument, msg);
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

// accessor guard: handles the NULL case for calls that cannot return a status
bool accessor_ok(const void* handle, const char* what) {
  if (handle) return true;
  set_error(MTG_ERR_INVALID_ARGUMENT, std::string(what) + " handle is NULL");
  return false;
}

mtg::Split to_split(int32_t s) {
  if (s < 0 || s > 2)
    mtg::fail(mtg::Errc::invalid_argument,
              "split must be 0 (train), 1 (validation) or 2 (test), got " + std::to_string(s));
  return static_cast<mtg::Split>(s);
}

json parse_object(const char* text, const char* what) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    mtg::fail(mtg::Errc::parse, std::string(what) + ": " + e.what());
  }
  if (!j.is_object()) mtg::fail(mtg::Errc::parse, std::string(what) + ": expected a JSON object");
  return j;
}

mtg::ModelSpec parse_spec(const char* text, int num_tasks) {
  json j = parse_object(text, "model spec");
  j["num_tasks"] = num_tasks;
  return mtg::ModelSpec::from_json(j.dump());
}

// learning_rate 0 is not a trainable rate; it requests the search
mtg::TrainingConfig parse_training_config(const char* text, bool* search_lr) {
  json j = parse_object(text, "training config");
  *search_lr = false;
  if (j.contains("learning_rate") && j["learning_rate"].is_number() &&
      j["learning_rate"].get<double>() == 0.0) {
    *search_lr = true;
    j.erase("learning_rate");
  }
  return mtg::TrainingConfig::from_json(j.dump());
}

mtg::TrainingConfig resolve_learning_rate(const mtg::ModelSpec& spec, const mtg::TaskDataset& ds,
                                          std::span<const int> subset, mtg::TrainingConfig cfg) {
  mtg::LrMode mode = subset.size() == 1 ? mtg::LrMode::single_task : mtg::LrMode::joint;
  cfg.learning_rate = mtg::lr_search(
      [&](double lr) {
        mtg::TrainingConfig probe = cfg;
        probe.learning_rate = lr;
        return mtg::train_joint(spec, ds, subset, probe).log.best_loss;
      },
      mode);
  return cfg;
}

void check_param_keys(const json& j, const std::string& algo, const std::set<std::string>& allowed) {
  for (const auto& item : j.items())
    if (!allowed.count(item.key()))
      mtg::fail(mtg::Errc::invalid_argument,
                "cluster params: unknown key \"" + item.key() + "\" for algorithm " + algo);
}

double get_num(const json& j, const char* key) {
  if (!j.at(key).is_number())
    mtg::fail(mtg::Errc::parse, std::string("cluster params: \"") + key + "\" must be a number");
  return j.at(key).get<double>();
}

int require_k(const json& j, const std::string& algo) {
  if (!j.contains("k"))
    mtg::fail(mtg::Errc::invalid_argument, "cluster params: algorithm " + algo + " requires \"k\"");
  double k = get_num(j, "k");
  if (k != std::floor(k))
    mtg::fail(mtg::Errc::invalid_argument, "cluster params: \"k\" must be an integer");
  return int(k);
}

}  // namespace

extern "C" {

const char* mtg_version(void) { return "1.0.0"; }

const char* mtg_status_name(mtg_status s) {
  if (s == MTG_OK) return "ok";
  int c = static_cast<int>(s);
  if (c < 1 || c > 8) return "unknown";
  return mtg::errc_name(static_cast<mtg::Errc>(c));
}

const char* mtg_last_error(void) { return tl_error.c_str(); }

void mtg_string_free(char* s) { std::free(s); }

mtg_status mtg_sha256_file(const char* path, char out65[65]) {
  return guarded([&] {
    need(path, "path is NULL");
    need(out65, "out65 is NULL");
    std::string hex = mtg::sha256_file_hex(path);
    std::memcpy(out65, hex.c_str(), 65);
  });
}

/* ---- datasets ----------------------------------------------------------- */

mtg_status mtg_dataset_synth(const char* config_json, mtg_dataset** out) {
  return guarded([&] {
    need(config_json, "config_json is NULL");
    need(out, "out is NULL");
    mtg::SynthConfig cfg = mtg::SynthConfig::from_json(config_json);
    *out = new mtg_dataset{mtg::synth_generate(cfg)};
  });
}

mtg_status mtg_dataset_ingest(const char* genome_fasta, const char* manifest_tsv,
                              int bin, int window, int min_overlap,
                              const char* test_chroms_csv, const char* validation_chrom,
                              int64_t validation_begin, int64_t validation_end,
                              mtg_dataset** out) {
  return guarded([&] {
    need(genome_fasta, "genome_fasta is NULL");
    need(manifest_tsv, "manifest_tsv is NULL");
    need(validation_chrom, "validation_chrom is NULL");
    need(out, "out is NULL");
    mtg::TileConfig tile;
    tile.bin = bin;
    tile.window = window;
    tile.min_overlap = min_overlap;
    mtg::RegionSplit rs;
    if (test_chroms_csv) {
      std::string csv = test_chroms_csv;
      size_t pos = 0;
      while (pos <= csv.size()) {
        size_t comma = csv.find(',', pos);
        if (comma == std::string::npos) comma = csv.size();
        std::string name = csv.substr(pos, comma - pos);
        if (!name.empty()) rs.test_chroms.push_back(name);
        pos = comma + 1;
      }
    }
    rs.validation_chrom = validation_chrom;
    rs.validation_begin = validation_begin;
    rs.validation_end = validation_end;
    *out = new mtg_dataset{mtg::ingest_dataset(genome_fasta, manifest_tsv, tile, rs)};
  });
}

mtg_status mtg_dataset_load(const char* path, mtg_dataset** out) {
  return guarded([&] {
    need(path, "path is NULL");
    need(out, "out is NULL");
    *out = new mtg_dataset{mtg::TaskDataset::load(path)};
  });
}

mtg_status mtg_dataset_save(const mtg_dataset* ds, const char* path) {
  return guarded([&] {
    need(ds, "dataset handle is NULL");
    need(path, "path is NULL");
    ds->v.save(path);
  });
}

void mtg_dataset_free(mtg_dataset* ds) { delete ds; }

int32_t mtg_dataset_num_tasks(const mtg_dataset* ds) {
  if (!accessor_ok(ds, "dataset")) return -1;
  return ds->v.num_tasks();
}

int64_t mtg_dataset_num_examples(const mtg_dataset* ds) {
  if (!accessor_ok(ds, "dataset")) return -1;
  return ds->v.num_examples();
}

int32_t mtg_dataset_window_length(const mtg_dataset* ds) {
  if (!accessor_ok(ds, "dataset")) return -1;
  return ds->v.window_length;
}

const char* mtg_dataset_task_id(const mtg_dataset* ds, int32_t task) {
  if (!accessor_ok(ds, "dataset")) return nullptr;
  if (task < 0 || task >= ds->v.num_tasks()) {
    set_error(MTG_ERR_INVALID_ARGUMENT, "task index " + std::to_string(task) + " out of range");
    return nullptr;
  }
  return ds->v.tasks[size_t(task)].id.c_str();
}

int32_t mtg_dataset_task_index(const mtg_dataset* ds, const char* task_id) {
  if (!accessor_ok(ds, "dataset")) return -1;
  if (!task_id) {
    set_error(MTG_ERR_INVALID_ARGUMENT, "task_id is NULL");
    return -1;
  }
  return ds->v.task_index(task_id);
}

const char* mtg_dataset_task_metadata(const mtg_dataset* ds, int32_t task, const char* key) {
  if (!accessor_ok(ds, "dataset")) return nullptr;
  if (task < 0 || task >= ds->v.num_tasks()) {
    set_error(MTG_ERR_INVALID_ARGUMENT, "task index " + std::to_string(task) + " out of range");
    return nullptr;
  }
  if (!key) {
    set_error(MTG_ERR_INVALID_ARGUMENT, "key is NULL");
    return nullptr;
  }
  const auto& md = ds->v.tasks[size_t(task)].metadata;
  auto it = md.find(key);
  return it == md.end() ? nullptr : it->second.c_str();
}

int64_t mtg_dataset_split_count(const mtg_dataset* ds, int32_t split) {
  if (!accessor_ok(ds, "dataset")) return -1;
  if (split < 0 || split > 2) {
    set_error(MTG_ERR_INVALID_ARGUMENT, "split must be 0, 1 or 2");
    return -1;
  }
  return ds->v.count_of(static_cast<mtg::Split>(split));
}

int64_t mtg_dataset_positive_count(const mtg_dataset* ds, int32_t task, int32_t split) {
  if (!accessor_ok(ds, "dataset")) return -1;
  if (task < 0 || task >= ds->v.num_tasks()) {
    set_error(MTG_ERR_INVALID_ARGUMENT, "task index " + std::to_string(task) + " out of range");
    return -1;
  }
  if (split < 0 || split > 2) {
    set_error(MTG_ERR_INVALID_ARGUMENT, "split must be 0, 1 or 2");
    return -1;
  }
  return ds->v.positive_count(task, static_cast<mtg::Split>(split));
}

/* ---- training ----------------------------------------------------------- */

mtg_status mtg_train(const mtg_dataset* ds, const char* model_spec_json,
                     const char* training_config_json, const int32_t* tasks,
                     int32_t num_tasks, mtg_model** out_model, char** out_log_tsv) {
  return guarded([&] {
    need(ds, "dataset handle is NULL");
    need(model_spec_json, "model_spec_json is NULL");
    need(training_config_json, "training_config_json is NULL");
    need(tasks, "tasks is NULL");
    need(num_tasks >= 1, "num_tasks must be >= 1");
    need(out_model, "out_model is NULL");
    mtg::ModelSpec spec = parse_spec(model_spec_json, num_tasks);
    bool search = false;
    mtg::TrainingConfig cfg = parse_training_config(training_config_json, &search);
    std::vector<int> subset(tasks, tasks + num_tasks);
    if (search) cfg = resolve_learning_rate(spec, ds->v, subset, cfg);
    mtg::TrainResult r = mtg::train_joint(spec, ds->v, subset, cfg);
    if (out_log_tsv) *out_log_tsv = dup_string(r.log.to_tsv());
    *out_model = new mtg_model{std::move(r.model)};
  });
}

mtg_status mtg_train_groups(const mtg_dataset* ds, const char* model_spec_json,
                            const char* training_config_json, const mtg_grouping* grouping,
                            int32_t workers, mtg_model*** out_models, int32_t* out_count) {
  return guarded([&] {
    need(ds, "dataset handle is NULL");
    need(model_spec_json, "model_spec_json is NULL");
    need(training_config_json, "training_config_json is NULL");
    need(grouping, "grouping handle is NULL");
    need(workers >= 1, "workers must be >= 1");
    need(out_models, "out_models is NULL");
    need(out_count, "out_count is NULL");
    mtg::ModelSpec spec = parse_spec(model_spec_json, std::max(1, ds->v.num_tasks()));
    bool search = false;
    mtg::TrainingConfig cfg = parse_training_config(training_config_json, &search);
    std::vector<std::vector<int>> groups = grouping->v.groups();
    // grouping rows may be ordered differently from the dataset's task list;
    // when the grouping carries ids, map through them instead of positions
    if (!grouping->v.task_ids.empty()) {
      for (std::vector<int>& grp : groups)
        for (int& t : grp) {
          const std::string& id = grouping->v.task_ids[size_t(t)];
          int idx = ds->v.task_index(id);
          if (idx < 0)
            mtg::fail(mtg::Errc::invalid_argument,
                      "grouping task id \"" + id + "\" is not in the dataset");
          t = idx;
        }
    }
    if (search) {
      // resolve once on the whole task set, then reuse the rate per group
      std::vector<int> all(size_t(ds->v.num_tasks()));
      for (int t = 0; t < ds->v.num_tasks(); ++t) all[size_t(t)] = t;
      cfg = resolve_learning_rate(spec, ds->v, all, cfg);
    }
    std::vector<mtg::GroupTrainResult> results =
        mtg::run_grouping_mode(spec, ds->v, groups, cfg, workers);
    mtg_model** arr = static_cast<mtg_model**>(std::calloc(results.size(), sizeof(mtg_model*)));
    if (!arr) throw std::bad_alloc();
    for (size_t i = 0; i < results.size(); ++i)
      arr[i] = new mtg_model{std::move(results[i].result.model)};
    *out_models = arr;
    *out_count = int32_t(results.size());
  });
}

void mtg_model_array_free(mtg_model** models, int32_t count) {
  if (!models) return;
  for (int32_t i = 0; i < count; ++i) delete models[i];
  std::free(models);
}

/* ---- models ------------------------------------------------------------- */

mtg_status mtg_model_save(const mtg_model* m, const char* path) {
  return guarded([&] {
    need(m, "model handle is NULL");
    need(path, "path is NULL");
    m->v.save(path);
  });
}

mtg_status mtg_model_load(const char* path, mtg_model** out) {
  return guarded([&] {
    need(path, "path is NULL");
    need(out, "out is NULL");
    *out = new mtg_model{mtg::Model::load(path)};
  });
}

void mtg_model_free(mtg_model* m) { delete m; }

int32_t mtg_model_num_heads(const mtg_model* m) {
  if (!accessor_ok(m, "model")) return -1;
  return m->v.num_heads();
}

const char* mtg_model_task_id(const mtg_model* m, int32_t head) {
  if (!accessor_ok(m, "model")) return nullptr;
  if (head < 0 || head >= m->v.num_heads()) {
    set_error(MTG_ERR_INVALID_ARGUMENT, "head index " + std::to_string(head) + " out of range");
    return nullptr;
  }
  return m->v.task_ids[size_t(head)].c_str();
}

mtg_status mtg_model_spec_json(const mtg_model* m, char** out_json) {
  return guarded([&] {
    need(m, "model handle is NULL");
    need(out_json, "out_json is NULL");
    *out_json = dup_string(m->v.spec().to_json());
  });
}

/* ---- task embeddings ---------------------------------------------------- */

mtg_status mtg_embed(const mtg_model* m, mtg_embedding** out) {
  return guarded([&] {
    need(m, "model handle is NULL");
    need(out, "out is NULL");
    *out = new mtg_embedding{mtg::extract_embeddings(m->v)};
  });
}

mtg_status mtg_embedding_load_tsv(const char* path, mtg_embedding** out) {
  return guarded([&] {
    need(path, "path is NULL");
    need(out, "out is NULL");
    *out = new mtg_embedding{mtg::TaskEmbedding::load_tsv(path)};
  });
}

mtg_status mtg_embedding_save_tsv(const mtg_embedding* e, const char* path) {
  return guarded([&] {
    need(e, "embedding handle is NULL");
    need(path, "path is NULL");
    e->v.save_tsv(path);
  });
}

void mtg_embedding_free(mtg_embedding* e) { delete e; }

int32_t mtg_embedding_num_tasks(const mtg_embedding* e) {
  if (!accessor_ok(e, "embedding")) return -1;
  return e->v.num_tasks();
}

int32_t mtg_embedding_dims(const mtg_embedding* e) {
  if (!accessor_ok(e, "embedding")) return -1;
  return e->v.dims();
}

double mtg_embedding_value(const mtg_embedding* e, int32_t task, int32_t dim) {
  if (!accessor_ok(e, "embedding")) return std::numeric_limits<double>::quiet_NaN();
  if (task < 0 || task >= e->v.num_tasks() || dim < 0 || dim >= e->v.dims()) {
    set_error(MTG_ERR_INVALID_ARGUMENT, "embedding index (" + std::to_string(task) + ", " +
                                            std::to_string(dim) + ") out of range");
    return std::numeric_limits<double>::quiet_NaN();
  }
  return e->v.values.at(task, dim);
}

const char* mtg_embedding_task_id(const mtg_embedding* e, int32_t task) {
  if (!accessor_ok(e, "embedding")) return nullptr;
  if (task < 0 || task >= e->v.num_tasks()) {
    set_error(MTG_ERR_INVALID_ARGUMENT, "task index " + std::to_string(task) + " out of range");
    return nullptr;
  }
  return e->v.task_ids[size_t(task)].c_str();
}

mtg_status mtg_embedding_normalize_rows(mtg_embedding* e) {
  return guarded([&] {
    need(e, "embedding handle is NULL");
    mtg::Matrix& m = e->v.values;
    for (int i = 0; i < m.rows(); ++i) {
      double ss = 0;
      for (int j = 0; j < m.cols(); ++j) ss += m.at(i, j) * m.at(i, j);
      if (!std::isfinite(ss))
        mtg::fail(mtg::Errc::numeric, "row " + std::to_string(i) + " has non-finite entries");
      if (ss == 0) continue;
      double inv = 1.0 / std::sqrt(ss);
      for (int j = 0; j < m.cols(); ++j) m.at(i, j) *= inv;
    }
  });
}

mtg_status mtg_embedding_pca(const mtg_embedding* e, int32_t n_components,
                             const char* components_tsv, const char* projections_tsv) {
  return guarded([&] {
    need(e, "embedding handle is NULL");
    need(components_tsv, "components_tsv is NULL");
    need(projections_tsv, "projections_tsv is NULL");
    mtg::PcaResult p = mtg::pca(e->v.values, n_components);
    mtg::save_pca_tsv(p, e->v.task_ids, components_tsv, projections_tsv);
  });
}

/* ---- clustering --------------------------------------------------------- */

mtg_status mtg_cluster(const mtg_embedding* e, const char* algo, const char* params_json,
                       mtg_grouping** out) {
  return guarded([&] {
    need(e, "embedding handle is NULL");
    need(algo, "algo is NULL");
    need(params_json, "params_json is NULL");
    need(out, "out is NULL");
    json j = parse_object(params_json, "cluster params");
    std::string name = algo;
    mtg::Grouping g;
    if (name == "kmeans") {
      check_param_keys(j, name, {"k", "seed", "restarts", "max_iters"});
      mtg::KmeansParams p;
      p.k = require_k(j, name);
      if (j.contains("seed")) p.seed = uint64_t(get_num(j, "seed"));
      if (j.contains("restarts")) p.restarts = int(get_num(j, "restarts"));
      if (j.contains("max_iters")) p.max_iters = int(get_num(j, "max_iters"));
      g = mtg::kmeans(e->v.values, p).grouping;
    } else if (name == "ward") {
      check_param_keys(j, name, {"k"});
      g = mtg::ward_linkage(e->v.values, require_k(j, name));
    } else if (name == "spectral") {
      check_param_keys(j, name, {"k", "seed"});
      uint64_t seed = j.contains("seed") ? uint64_t(get_num(j, "seed")) : 0;
      g = mtg::spectral_cluster(e->v.values, require_k(j, name), seed);
    } else if (name == "dbscan") {
      check_param_keys(j, name, {"eps", "min_pts"});
      if (!j.contains("eps") || !j.contains("min_pts"))
        mtg::fail(mtg::Errc::invalid_argument,
                  "cluster params: dbscan requires \"eps\" and \"min_pts\"");
      g = mtg::dbscan(e->v.values, get_num(j, "eps"), int(get_num(j, "min_pts")));
    } else if (name == "ssc") {
      check_param_keys(j, name, {"k", "seed", "lambda", "tol", "max_sweeps"});
      mtg::SscParams p;
      p.k = require_k(j, name);
      if (j.contains("seed")) p.seed = uint64_t(get_num(j, "seed"));
      if (j.contains("lambda")) p.lambda = get_num(j, "lambda");
      if (j.contains("tol")) p.tol = get_num(j, "tol");
      if (j.contains("max_sweeps")) p.max_sweeps = int(get_num(j, "max_sweeps"));
      g = mtg::ssc(e->v.values, p).grouping;
    } else {
      mtg::fail(mtg::Errc::invalid_argument,
                "unknown clustering algorithm \"" + name +
                    "\"; expected kmeans, ward, spectral, dbscan or ssc");
    }
    g.task_ids = e->v.task_ids;
    *out = new mtg_grouping{std::move(g)};
  });
}

mtg_status mtg_cluster_metadata(const mtg_dataset* ds, const char* key, mtg_grouping** out) {
  return guarded([&] {
    need(ds, "dataset handle is NULL");
    need(key, "key is NULL");
    need(out, "out is NULL");
    *out = new mtg_grouping{mtg::metadata_grouping(ds->v, key)};
  });
}

mtg_status mtg_grouping_singletons(int32_t num_tasks, mtg_grouping** out) {
  return guarded([&] {
    need(out, "out is NULL");
    *out = new mtg_grouping{mtg::singleton_grouping(num_tasks)};
  });
}

mtg_status mtg_grouping_all_in_one(int32_t num_tasks, mtg_grouping** out) {
  return guarded([&] {
    need(out, "out is NULL");
    *out = new mtg_grouping{mtg::all_in_one_grouping(num_tasks)};
  });
}

mtg_status mtg_grouping_load_tsv(const char* path, mtg_grouping** out) {
  return guarded([&] {
    need(path, "path is NULL");
    need(out, "out is NULL");
    *out = new mtg_grouping{mtg::Grouping::load_tsv(path)};
  });
}

mtg_status mtg_grouping_save_tsv(const mtg_grouping* g, const char* path) {
  return guarded([&] {
    need(g, "grouping handle is NULL");
    need(path, "path is NULL");
    g->v.save_tsv(path);
  });
}

void mtg_grouping_free(mtg_grouping* g) { delete g; }

int32_t mtg_grouping_num_tasks(const mtg_grouping* g) {
  if (!accessor_ok(g, "grouping")) return -1;
  return g->v.num_tasks();
}

int32_t mtg_grouping_num_groups(const mtg_grouping* g) {
  if (!accessor_ok(g, "grouping")) return -1;
  return g->v.num_groups;
}

int32_t mtg_grouping_assignment(const mtg_grouping* g, int32_t task) {
  if (!accessor_ok(g, "grouping")) return -1;
  if (task < 0 || task >= g->v.num_tasks()) {
    set_error(MTG_ERR_INVALID_ARGUMENT, "task index " + std::to_string(task) + " out of range");
    return -1;
  }
  return g->v.assignments[size_t(task)];
}

const char* mtg_grouping_task_id(const mtg_grouping* g, int32_t task) {
  if (!accessor_ok(g, "grouping")) return nullptr;
  if (task < 0 || task >= int32_t(g->v.task_ids.size())) {
    set_error(MTG_ERR_INVALID_ARGUMENT, "task index " + std::to_string(task) + " out of range");
    return nullptr;
  }
  return g->v.task_ids[size_t(task)].c_str();
}

const char* mtg_grouping_algorithm(const mtg_grouping* g) {
  if (!accessor_ok(g, "grouping")) return nullptr;
  return g->v.algorithm.c_str();
}

double mtg_grouping_objective(const mtg_grouping* g) {
  if (!accessor_ok(g, "grouping")) return std::numeric_limits<double>::quiet_NaN();
  return g->v.objective;
}

mtg_status mtg_adjusted_rand_index(const int32_t* a, const int32_t* b, int32_t n, double* out) {
  return guarded([&] {
    need(a, "a is NULL");
    need(b, "b is NULL");
    need(out, "out is NULL");
    need(n >= 0, "n must be >= 0");
    std::vector<int> va(a, a + n), vb(b, b + n);
    *out = mtg::adjusted_rand_index(va, vb);
  });
}

/* ---- evaluation --------------------------------------------------------- */

mtg_status mtg_evaluate(const mtg_model* m, const mtg_dataset* ds, int32_t split,
                        const char* method, double threshold, int32_t threads,
                        mtg_scores** out) {
  return guarded([&] {
    need(m, "model handle is NULL");
    need(ds, "dataset handle is NULL");
    need(method, "method is NULL");
    need(out, "out is NULL");
    *out = new mtg_scores{
        mtg::evaluate_model(m->v, ds->v, to_split(split), method, threshold, threads)};
  });
}

mtg_status mtg_scores_merge(const char* method, const mtg_scores* const* parts,
                            int32_t count, mtg_scores** out) {
  return guarded([&] {
    need(method, "method is NULL");
    need(parts, "parts is NULL");
    need(count >= 1, "count must be >= 1");
    need(out, "out is NULL");
    std::vector<mtg::ScoreSet> sets;
    sets.reserve(size_t(count));
    for (int32_t i = 0; i < count; ++i) {
      need(parts[i], "parts contains a NULL handle");
      sets.push_back(parts[i]->v);
    }
    *out = new mtg_scores{mtg::merge_scores(method, sets)};
  });
}

mtg_status mtg_scores_load_tsv(const char* path, mtg_scores** out) {
  return guarded([&] {
    need(path, "path is NULL");
    need(out, "out is NULL");
    *out = new mtg_scores{mtg::ScoreSet::load_tsv(path)};
  });
}

mtg_status mtg_scores_save_tsv(const mtg_scores* s, const char* path) {
  return guarded([&] {
    need(s, "scores handle is NULL");
    need(path, "path is NULL");
    s->v.save_tsv(path);
  });
}

void mtg_scores_free(mtg_scores* s) { delete s; }

int32_t mtg_scores_num_tasks(const mtg_scores* s) {
  if (!accessor_ok(s, "scores")) return -1;
  return int32_t(s->v.scores.size());
}

const char* mtg_scores_task_id(const mtg_scores* s, int32_t i) {
  if (!accessor_ok(s, "scores")) return nullptr;
  if (i < 0 || i >= int32_t(s->v.scores.size())) {
    set_error(MTG_ERR_INVALID_ARGUMENT, "score index " + std::to_string(i) + " out of range");
    return nullptr;
  }
  return s->v.scores[size_t(i)].task_id.c_str();
}

double mtg_scores_f1(const mtg_scores* s, int32_t i) {
  if (!accessor_ok(s, "scores")) return std::numeric_limits<double>::quiet_NaN();
  if (i < 0 || i >= int32_t(s->v.scores.size())) {
    set_error(MTG_ERR_INVALID_ARGUMENT, "score index " + std::to_string(i) + " out of range");
    return std::numeric_limits<double>::quiet_NaN();
  }
  return s->v.scores[size_t(i)].f1;
}

double mtg_scores_mean_f1(const mtg_scores* s) {
  if (!accessor_ok(s, "scores")) return std::numeric_limits<double>::quiet_NaN();
  if (s->v.scores.empty()) {
    set_error(MTG_ERR_STATE, "score set is empty");
    return std::numeric_limits<double>::quiet_NaN();
  }
  return s->v.mean_f1();
}

const char* mtg_scores_method(const mtg_scores* s) {
  if (!accessor_ok(s, "scores")) return nullptr;
  return s->v.method.c_str();
}

/* ---- reports ------------------------------------------------------------ */

mtg_status mtg_report(const char* dir, const mtg_scores* const* sets, int32_t count,
                      const char* baseline_method, const mtg_dataset* ds,
                      const char* strata_key) {
  return guarded([&] {
    need(dir, "dir is NULL");
    need(sets, "sets is NULL");
    need(count >= 1, "count must be >= 1");
    std::vector<mtg::ScoreSet> all;
    all.reserve(size_t(count));
    for (int32_t i = 0; i < count; ++i) {
      need(sets[i], "sets contains a NULL handle");
      all.push_back(sets[i]->v);
    }
    std::map<std::string, std::string> strata;
    if (strata_key) {
      need(ds, "strata_key given but dataset handle is NULL");
      strata = mtg::strata_from_metadata(ds->v, strata_key);
    }
    mtg::write_report(dir, all, baseline_method ? baseline_method : "", strata);
  });
}

}  // extern "C"

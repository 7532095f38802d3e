// Pipeline driver over the C API. Every stage reads and writes one run
// directory: artifacts land next to a manifest (mtg-manifest.json) that
// records their SHA-256, and each downstream stage re-hashes what it consumes
// and refuses to run on bytes that no longer match the manifest.
//
// Errors print one line to stderr: "mtg: error: <category>: <message>", and
// the exit code is the numeric value of the category (see mtg_status).

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include "CLI11.hpp"

#include "mtg.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void die(mtg_status s, const std::string& msg) {
  std::fprintf(stderr, "mtg: error: %s: %s\n", mtg_status_name(s), msg.c_str());
  std::exit(int(s));
}

void ok_or_die(mtg_status s) {
  if (s != MTG_OK) die(s, mtg_last_error());
}

std::string file_digest(const std::string& path) {
  char hex[65];
  ok_or_die(mtg_sha256_file(path.c_str(), hex));
  return hex;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f.good()) die(MTG_ERR_IO, "cannot open " + path + " for writing");
  f << content;
  f.close();
  if (!f.good()) die(MTG_ERR_IO, "write failed: " + path);
}

std::string now_iso() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos <= s.size()) {
    size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    std::string piece = s.substr(pos, comma - pos);
    if (!piece.empty()) out.push_back(piece);
    pos = comma + 1;
  }
  return out;
}

// ---- run manifest ----------------------------------------------------------

struct Manifest {
  fs::path dir;
  json j;

  static Manifest open(const std::string& out_dir) {
    Manifest m;
    m.dir = out_dir;
    std::error_code ec;
    fs::create_directories(m.dir, ec);
    if (ec) die(MTG_ERR_IO, "cannot create " + out_dir + ": " + ec.message());
    fs::path p = m.dir / "mtg-manifest.json";
    if (fs::exists(p)) {
      std::ifstream f(p);
      try {
        m.j = json::parse(f);
      } catch (const json::exception& e) {
        die(MTG_ERR_PARSE, p.string() + ": " + e.what());
      }
      if (!m.j.is_object() || !m.j.contains("artifacts") || !m.j["artifacts"].is_object())
        die(MTG_ERR_PARSE, p.string() + ": not a run manifest");
    } else {
      m.j = json{{"version", 1}, {"artifacts", json::object()}};
    }
    return m;
  }

  std::string path_of(const std::string& rel) const { return (dir / rel).string(); }

  void save() const {
    write_file((dir / "mtg-manifest.json").string(), j.dump(2) + "\n");
  }

  // hashes the freshly written file and records it under `name`
  void record(const std::string& name, const std::string& rel, const std::string& stage,
              json extra = json::object()) {
    json e{{"path", rel},
           {"stage", stage},
           {"sha256", file_digest(path_of(rel))},
           {"created", now_iso()}};
    e.update(extra);
    j["artifacts"][name] = std::move(e);
    save();
  }

  bool has(const std::string& name) const { return j["artifacts"].contains(name); }

  std::string digest_of(const std::string& name) const {
    return j["artifacts"][name]["sha256"].get<std::string>();
  }

  // digest-checked absolute path of a recorded artifact
  std::string require(const std::string& name) const {
    if (!has(name))
      die(MTG_ERR_STATE, "no artifact \"" + name + "\" in " + (dir / "mtg-manifest.json").string() +
                             "; run the stage that produces it first");
    const json& e = j["artifacts"][name];
    std::string p = path_of(e["path"].get<std::string>());
    if (!fs::exists(p)) die(MTG_ERR_IO, "artifact \"" + name + "\" missing on disk: " + p);
    std::string actual = file_digest(p);
    std::string recorded = e["sha256"].get<std::string>();
    if (actual != recorded)
      die(MTG_ERR_DIGEST_MISMATCH, "artifact \"" + name + "\" (" + p + "): manifest records " +
                                       recorded + ", file is " + actual);
    return p;
  }

  std::vector<std::string> names_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& item : j["artifacts"].items())
      if (item.key().rfind(prefix, 0) == 0) out.push_back(item.key());
    std::sort(out.begin(), out.end());
    return out;
  }
};

// ---- configs ---------------------------------------------------------------

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream f(path);
  if (!f.good()) die(MTG_ERR_IO, "cannot open config " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    die(MTG_ERR_PARSE, "config " + path + ": " + e.what());
  }
  if (!j.is_object()) die(MTG_ERR_PARSE, "config " + path + ": expected a JSON object");
  return j;
}

// training options shared by train-joint and train-groups; flags the user set
// override the config file
struct TrainOpts {
  std::string config_path;
  int batch = 0;
  int64_t max_steps = 0;
  int64_t validate_every = 0;
  int patience = 0;
  double lr = -1;
  uint64_t seed = 0;
  int threads = 0;
  CLI::Option *o_batch = nullptr, *o_max_steps = nullptr, *o_validate_every = nullptr,
              *o_patience = nullptr, *o_lr = nullptr, *o_seed = nullptr, *o_threads = nullptr;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "training config JSON file");
    o_batch = cmd->add_option("--batch-size", batch, "examples per step");
    o_max_steps = cmd->add_option("--max-steps", max_steps, "hard step budget");
    o_validate_every = cmd->add_option("--validate-every", validate_every,
                                       "steps between validation passes");
    o_patience = cmd->add_option("--patience", patience,
                                 "validation rounds without improvement before stopping");
    o_lr = cmd->add_option("--lr", lr, "learning rate; 0 selects it by the validation grid search");
    o_seed = cmd->add_option("--seed", seed, "training seed");
    o_threads = cmd->add_option("--threads", threads, "batch-parallel workers inside a training");
  }

  json effective() const {
    json cfg = load_config(config_path);
    if (o_batch->count()) cfg["batch_size"] = batch;
    if (o_max_steps->count()) cfg["max_steps"] = max_steps;
    if (o_validate_every->count()) cfg["validate_every"] = validate_every;
    if (o_patience->count()) cfg["patience"] = patience;
    if (o_lr->count()) cfg["learning_rate"] = lr;
    if (o_seed->count()) cfg["seed"] = seed;
    if (o_threads->count()) cfg["threads"] = threads;
    return cfg;
  }
};

std::string model_spec_or_default(const std::string& path, int window) {
  if (!path.empty()) return load_config(path).dump();
  json spec{{"input_length", window},
            {"blocks", json::array({json{{"filters", 32}, {"width", 8}, {"pool", 4}},
                                    json{{"filters", 64}, {"width", 8}, {"pool", 4}},
                                    json{{"filters", 96}, {"width", 8}, {"pool", 4}}})},
            {"head_hidden", 32}};
  return spec.dump();
}

std::vector<int32_t> parse_task_list(const std::string& s, int32_t num_tasks) {
  std::vector<int32_t> out;
  if (s == "all") {
    out.resize(size_t(num_tasks));
    for (int32_t t = 0; t < num_tasks; ++t) out[size_t(t)] = t;
    return out;
  }
  for (const std::string& piece : split_csv(s)) {
    try {
      size_t used = 0;
      int v = std::stoi(piece, &used);
      if (used != piece.size()) throw std::invalid_argument(piece);
      out.push_back(v);
    } catch (const std::exception&) {
      die(MTG_ERR_INVALID_ARGUMENT, "--tasks: cannot parse \"" + piece + "\"");
    }
  }
  if (out.empty()) die(MTG_ERR_INVALID_ARGUMENT, "--tasks: empty task list");
  for (int32_t t : out)
    if (t < 0 || t >= num_tasks)
      die(MTG_ERR_INVALID_ARGUMENT,
          "--tasks: index " + std::to_string(t) + " out of range [0," +
              std::to_string(num_tasks) + ")");
  return out;
}

std::string task_tag(const std::string& tasks_flag, std::vector<int32_t> tasks) {
  if (tasks_flag == "all") return "joint";
  std::sort(tasks.begin(), tasks.end());
  std::string tag = "tasks";
  for (int32_t t : tasks) tag += "-" + std::to_string(t);
  return tag;
}

double log_learning_rate(const std::string& log_tsv) {
  // first line: "# learning_rate\t<value>"
  size_t tab = log_tsv.find('\t');
  size_t nl = log_tsv.find('\n');
  if (tab == std::string::npos || nl == std::string::npos || tab > nl) return -1;
  return std::atof(log_tsv.substr(tab + 1, nl - tab - 1).c_str());
}

// ---- stage helpers ---------------------------------------------------------

mtg_dataset* open_dataset(const Manifest& m) {
  std::string path = m.require("dataset");
  mtg_dataset* ds = nullptr;
  ok_or_die(mtg_dataset_load(path.c_str(), &ds));
  return ds;
}

void print_dataset_summary(const mtg_dataset* ds) {
  std::printf("dataset: %d tasks, %lld examples (train %lld, validation %lld, test %lld)\n",
              mtg_dataset_num_tasks(ds), (long long)mtg_dataset_num_examples(ds),
              (long long)mtg_dataset_split_count(ds, MTG_SPLIT_TRAIN),
              (long long)mtg_dataset_split_count(ds, MTG_SPLIT_VALIDATION),
              (long long)mtg_dataset_split_count(ds, MTG_SPLIT_TEST));
}

struct TrainedFiles {
  std::string model_name;
  std::string log_name;
};

// trains one subset, writes model + log, records both
TrainedFiles run_training(Manifest& m, const mtg_dataset* ds, const std::string& tag,
                          const std::string& spec_json, const json& cfg,
                          const std::vector<int32_t>& tasks, const json& upstream) {
  mtg_model* model = nullptr;
  char* log = nullptr;
  ok_or_die(mtg_train(ds, spec_json.c_str(), cfg.dump().c_str(), tasks.data(),
                      int32_t(tasks.size()), &model, &log));
  std::string model_rel = "model-" + tag + ".mtgm";
  std::string log_rel = "train-log-" + tag + ".tsv";
  ok_or_die(mtg_model_save(model, m.path_of(model_rel).c_str()));
  write_file(m.path_of(log_rel), log);
  double lr = log_learning_rate(log);
  std::printf("model-%s: %d heads, learning rate %g -> %s\n", tag.c_str(),
              mtg_model_num_heads(model), lr, model_rel.c_str());
  mtg_string_free(log);
  mtg_model_free(model);
  json extra{{"upstream", upstream}};
  m.record("model-" + tag, model_rel, "train", extra);
  m.record("train-log-" + tag, log_rel, "train", extra);
  return {"model-" + tag, "train-log-" + tag};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"task-grouping pipeline: dataset -> joint training -> task embeddings -> "
               "clustering -> per-group training -> report"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mtg_version()));

  std::string out_dir = ".";
  app.add_option("--out-dir", out_dir, "run directory (artifacts + mtg-manifest.json)")
      ->capture_default_str();

  // ---- synth ----
  auto* c_synth = app.add_subcommand("synth", "generate a synthetic dataset with planted groups");
  std::string synth_config;
  uint64_t synth_seed = 0;
  c_synth->add_option("--config", synth_config, "generator config JSON file");
  auto* o_synth_seed = c_synth->add_option("--seed", synth_seed, "generator seed");
  c_synth->callback([&] {
    Manifest m = Manifest::open(out_dir);
    json cfg = load_config(synth_config);
    if (o_synth_seed->count()) cfg["seed"] = synth_seed;
    std::string cfg_text = cfg.dump(2) + "\n";
    mtg_dataset* ds = nullptr;
    ok_or_die(mtg_dataset_synth(cfg.dump().c_str(), &ds));
    write_file(m.path_of("synth-config.json"), cfg_text);
    ok_or_die(mtg_dataset_save(ds, m.path_of("dataset.mtgd").c_str()));
    m.record("synth-config", "synth-config.json", "synth");
    m.record("dataset", "dataset.mtgd", "synth",
             json{{"upstream", json{{"synth-config", m.digest_of("synth-config")}}}});
    print_dataset_summary(ds);
    mtg_dataset_free(ds);
  });

  // ---- ingest ----
  auto* c_ingest = app.add_subcommand("ingest", "tile a genome and label bins from peak files");
  std::string ing_config, ing_genome, ing_manifest, ing_test_chroms, ing_val_chrom;
  int ing_bin = 0, ing_window = 0, ing_min_overlap = 0;
  int64_t ing_val_begin = 0, ing_val_end = 0;
  c_ingest->add_option("--config", ing_config, "ingest config JSON file");
  auto* o_genome = c_ingest->add_option("--genome", ing_genome, "FASTA file");
  auto* o_manifest = c_ingest->add_option("--manifest", ing_manifest,
                                          "task manifest TSV (task_id, BED path, metadata)");
  auto* o_bin = c_ingest->add_option("--bin", ing_bin, "bin size in bases");
  auto* o_window = c_ingest->add_option("--window", ing_window, "input window length (odd)");
  auto* o_overlap = c_ingest->add_option("--min-overlap", ing_min_overlap,
                                         "peak bases inside a bin needed for a positive");
  auto* o_test_chroms = c_ingest->add_option("--test-chroms", ing_test_chroms,
                                             "comma-separated chromosomes held out for test");
  auto* o_val_chrom = c_ingest->add_option("--val-chrom", ing_val_chrom, "validation chromosome");
  auto* o_val_begin = c_ingest->add_option("--val-begin", ing_val_begin,
                                           "validation range start (bin start, 0-based)");
  auto* o_val_end = c_ingest->add_option("--val-end", ing_val_end,
                                         "validation range end (exclusive)");
  c_ingest->callback([&] {
    Manifest m = Manifest::open(out_dir);
    json cfg = load_config(ing_config);
    if (o_genome->count()) cfg["genome"] = ing_genome;
    if (o_manifest->count()) cfg["manifest"] = ing_manifest;
    if (o_bin->count()) cfg["bin"] = ing_bin;
    if (o_window->count()) cfg["window"] = ing_window;
    if (o_overlap->count()) cfg["min_overlap"] = ing_min_overlap;
    if (o_test_chroms->count()) cfg["test_chroms"] = split_csv(ing_test_chroms);
    if (o_val_chrom->count()) cfg["validation_chrom"] = ing_val_chrom;
    if (o_val_begin->count()) cfg["validation_begin"] = ing_val_begin;
    if (o_val_end->count()) cfg["validation_end"] = ing_val_end;
    for (const char* req : {"genome", "manifest"})
      if (!cfg.contains(req))
        die(MTG_ERR_INVALID_ARGUMENT, std::string("ingest needs --") + req + " (or the config key)");
    std::string test_csv;
    for (const auto& c : cfg.value("test_chroms", std::vector<std::string>{}))
      test_csv += (test_csv.empty() ? "" : ",") + c;
    mtg_dataset* ds = nullptr;
    ok_or_die(mtg_dataset_ingest(
        cfg["genome"].get<std::string>().c_str(), cfg["manifest"].get<std::string>().c_str(),
        cfg.value("bin", 200), cfg.value("window", 1001), cfg.value("min_overlap", 50),
        test_csv.c_str(), cfg.value("validation_chrom", std::string()).c_str(),
        cfg.value("validation_begin", int64_t(0)), cfg.value("validation_end", int64_t(0)), &ds));
    write_file(m.path_of("ingest-config.json"), cfg.dump(2) + "\n");
    ok_or_die(mtg_dataset_save(ds, m.path_of("dataset.mtgd").c_str()));
    m.record("ingest-config", "ingest-config.json", "ingest");
    m.record("dataset", "dataset.mtgd", "ingest",
             json{{"upstream", json{{"ingest-config", m.digest_of("ingest-config")}}}});
    print_dataset_summary(ds);
    mtg_dataset_free(ds);
  });

  // ---- train-joint ----
  auto* c_train = app.add_subcommand("train-joint",
                                     "train one shared model over a task subset");
  std::string tj_tasks = "all", tj_spec_path;
  TrainOpts tj_opts;
  c_train->add_option("--tasks", tj_tasks, "\"all\" or comma-separated task indices")
      ->capture_default_str();
  c_train->add_option("--model-spec", tj_spec_path, "architecture JSON file");
  tj_opts.attach(c_train);
  c_train->callback([&] {
    Manifest m = Manifest::open(out_dir);
    mtg_dataset* ds = open_dataset(m);
    std::vector<int32_t> tasks = parse_task_list(tj_tasks, mtg_dataset_num_tasks(ds));
    std::string tag = task_tag(tj_tasks, tasks);
    std::string spec = model_spec_or_default(tj_spec_path, mtg_dataset_window_length(ds));
    json cfg = tj_opts.effective();
    write_file(m.path_of("train-config-" + tag + ".json"), cfg.dump(2) + "\n");
    m.record("train-config-" + tag, "train-config-" + tag + ".json", "train");
    json upstream{{"dataset", m.digest_of("dataset")},
                  {"train-config-" + tag, m.digest_of("train-config-" + tag)}};
    run_training(m, ds, tag, spec, cfg, tasks, upstream);
    mtg_dataset_free(ds);
  });

  // ---- embed ----
  auto* c_embed = app.add_subcommand("embed", "export per-task representation rows from a model");
  std::string em_model = "model-joint";
  int em_pca = 0;
  c_embed->add_option("--model", em_model, "model artifact to read")->capture_default_str();
  auto* o_pca = c_embed->add_option("--pca", em_pca, "also write a PCA with this many components");
  c_embed->callback([&] {
    Manifest m = Manifest::open(out_dir);
    std::string mpath = m.require(em_model);
    mtg_model* model = nullptr;
    ok_or_die(mtg_model_load(mpath.c_str(), &model));
    mtg_embedding* e = nullptr;
    ok_or_die(mtg_embed(model, &e));
    ok_or_die(mtg_embedding_save_tsv(e, m.path_of("embedding.tsv").c_str()));
    json upstream{{em_model, m.digest_of(em_model)}};
    m.record("embedding", "embedding.tsv", "embed", json{{"upstream", upstream}});
    std::printf("embedding: %d tasks x %d dims -> embedding.tsv\n", mtg_embedding_num_tasks(e),
                mtg_embedding_dims(e));
    if (o_pca->count()) {
      ok_or_die(mtg_embedding_pca(e, em_pca, m.path_of("pca-components.tsv").c_str(),
                                  m.path_of("pca-projections.tsv").c_str()));
      m.record("pca-components", "pca-components.tsv", "embed", json{{"upstream", upstream}});
      m.record("pca-projections", "pca-projections.tsv", "embed", json{{"upstream", upstream}});
      std::printf("pca: %d components -> pca-components.tsv, pca-projections.tsv\n", em_pca);
    }
    mtg_embedding_free(e);
    mtg_model_free(model);
  });

  // ---- cluster ----
  auto* c_cluster = app.add_subcommand("cluster", "partition tasks from their embedding rows");
  std::string cl_algo, cl_key, cl_embedding = "embedding", cl_sweep;
  int cl_k = 0, cl_min_pts = 0, cl_restarts = 0;
  double cl_eps = 0, cl_lambda = 0;
  uint64_t cl_seed = 0;
  bool cl_normalize = false;
  c_cluster->add_option("--algo", cl_algo,
                        "kmeans | ward | spectral | dbscan | ssc | metadata")->required();
  auto* o_k = c_cluster->add_option("--k", cl_k, "number of groups");
  auto* o_sweep = c_cluster->add_option("--k-sweep", cl_sweep,
                                        "lo:hi, write one grouping per k in the range");
  auto* o_key = c_cluster->add_option("--key", cl_key, "metadata key (algo metadata)");
  auto* o_eps = c_cluster->add_option("--eps", cl_eps, "dbscan neighborhood radius");
  auto* o_min_pts = c_cluster->add_option("--min-pts", cl_min_pts, "dbscan density threshold");
  auto* o_restarts = c_cluster->add_option("--restarts", cl_restarts, "kmeans restarts");
  auto* o_lambda = c_cluster->add_option("--lambda", cl_lambda, "ssc sparsity weight");
  auto* o_cl_seed = c_cluster->add_option("--seed", cl_seed, "clustering seed");
  c_cluster->add_flag("--normalize", cl_normalize,
                      "L2-normalize embedding rows first (off by default)");
  c_cluster->callback([&] {
    Manifest m = Manifest::open(out_dir);
    if (cl_algo == "metadata") {
      if (!o_key->count()) die(MTG_ERR_INVALID_ARGUMENT, "--algo metadata needs --key");
      if (cl_normalize) die(MTG_ERR_INVALID_ARGUMENT, "--normalize applies to embedding-based algorithms");
      mtg_dataset* ds = open_dataset(m);
      mtg_grouping* g = nullptr;
      ok_or_die(mtg_cluster_metadata(ds, cl_key.c_str(), &g));
      std::string tag = "metadata-" + cl_key;
      ok_or_die(mtg_grouping_save_tsv(g, m.path_of("grouping-" + tag + ".tsv").c_str()));
      m.record("grouping-" + tag, "grouping-" + tag + ".tsv", "cluster",
               json{{"upstream", json{{"dataset", m.digest_of("dataset")}}},
                    {"params", json{{"key", cl_key}}}});
      std::printf("grouping-%s: %d groups over %d tasks\n", tag.c_str(),
                  mtg_grouping_num_groups(g), mtg_grouping_num_tasks(g));
      mtg_grouping_free(g);
      mtg_dataset_free(ds);
      return;
    }

    std::string epath = m.require(cl_embedding);
    mtg_embedding* e = nullptr;
    ok_or_die(mtg_embedding_load_tsv(epath.c_str(), &e));
    if (cl_normalize) ok_or_die(mtg_embedding_normalize_rows(e));
    json upstream{{cl_embedding, m.digest_of(cl_embedding)}};
    std::string base_tag = cl_algo + (cl_normalize ? "-norm" : "");

    auto run_one = [&](int k) {
      json params = json::object();
      if (cl_algo == "dbscan") {
        if (!o_eps->count() || !o_min_pts->count())
          die(MTG_ERR_INVALID_ARGUMENT, "dbscan needs --eps and --min-pts");
        if (o_k->count() || o_sweep->count())
          die(MTG_ERR_INVALID_ARGUMENT, "dbscan chooses its own group count; drop --k");
        params["eps"] = cl_eps;
        params["min_pts"] = cl_min_pts;
      } else {
        params["k"] = k;
        if (cl_algo != "ward" && o_cl_seed->count()) params["seed"] = cl_seed;
        if (cl_algo == "kmeans" && o_restarts->count()) params["restarts"] = cl_restarts;
        if (cl_algo == "ssc" && o_lambda->count()) params["lambda"] = cl_lambda;
      }
      mtg_grouping* g = nullptr;
      ok_or_die(mtg_cluster(e, cl_algo.c_str(), params.dump().c_str(), &g));
      std::string tag = base_tag + (cl_algo == "dbscan" ? "" : "-k" + std::to_string(k));
      ok_or_die(mtg_grouping_save_tsv(g, m.path_of("grouping-" + tag + ".tsv").c_str()));
      m.record("grouping-" + tag, "grouping-" + tag + ".tsv", "cluster",
               json{{"upstream", upstream}, {"params", params}});
      double obj = mtg_grouping_objective(g);
      if (obj == obj)
        std::printf("grouping-%s: %d groups, objective %.6g\n", tag.c_str(),
                    mtg_grouping_num_groups(g), obj);
      else
        std::printf("grouping-%s: %d groups\n", tag.c_str(), mtg_grouping_num_groups(g));
      mtg_grouping_free(g);
    };

    if (o_sweep->count()) {
      if (o_k->count()) die(MTG_ERR_INVALID_ARGUMENT, "--k and --k-sweep are mutually exclusive");
      size_t colon = cl_sweep.find(':');
      int lo = 0, hi = 0;
      try {
        if (colon == std::string::npos) throw std::invalid_argument(cl_sweep);
        lo = std::stoi(cl_sweep.substr(0, colon));
        hi = std::stoi(cl_sweep.substr(colon + 1));
      } catch (const std::exception&) {
        die(MTG_ERR_INVALID_ARGUMENT, "--k-sweep: expected lo:hi, got \"" + cl_sweep + "\"");
      }
      if (lo < 1 || hi < lo)
        die(MTG_ERR_INVALID_ARGUMENT, "--k-sweep: need 1 <= lo <= hi");
      for (int k = lo; k <= hi; ++k) run_one(k);
    } else if (cl_algo == "dbscan") {
      run_one(0);
    } else {
      if (!o_k->count()) die(MTG_ERR_INVALID_ARGUMENT, "--algo " + cl_algo + " needs --k or --k-sweep");
      run_one(cl_k);
    }
    mtg_embedding_free(e);
  });

  // ---- train-groups ----
  auto* c_groups = app.add_subcommand("train-groups", "train one model per group of a grouping");
  std::string tg_grouping, tg_spec_path;
  int tg_workers = 1;
  TrainOpts tg_opts;
  c_groups->add_option("--grouping", tg_grouping,
                       "grouping artifact name, or \"singletons\" / \"all-in-one\"")->required();
  c_groups->add_option("--workers", tg_workers, "groups trained in parallel")->capture_default_str();
  c_groups->add_option("--model-spec", tg_spec_path, "architecture JSON file");
  tg_opts.attach(c_groups);
  c_groups->callback([&] {
    Manifest m = Manifest::open(out_dir);
    mtg_dataset* ds = open_dataset(m);
    int32_t T = mtg_dataset_num_tasks(ds);

    std::string gname = tg_grouping;
    mtg_grouping* g = nullptr;
    if (tg_grouping == "singletons" || tg_grouping == "all-in-one") {
      if (tg_grouping == "singletons")
        ok_or_die(mtg_grouping_singletons(T, &g));
      else
        ok_or_die(mtg_grouping_all_in_one(T, &g));
      gname = "grouping-" + tg_grouping;
      ok_or_die(mtg_grouping_save_tsv(g, m.path_of(gname + ".tsv").c_str()));
      m.record(gname, gname + ".tsv", "cluster",
               json{{"upstream", json{{"dataset", m.digest_of("dataset")}}}});
    } else {
      std::string gpath = m.require(gname);
      ok_or_die(mtg_grouping_load_tsv(gpath.c_str(), &g));
    }

    // "grouping-kmeans-k4" -> models named model-kmeans-k4-g<i>
    std::string short_tag = gname.rfind("grouping-", 0) == 0 ? gname.substr(9) : gname;
    std::string spec = model_spec_or_default(tg_spec_path, mtg_dataset_window_length(ds));
    json cfg = tg_opts.effective();
    write_file(m.path_of("train-config-" + short_tag + ".json"), cfg.dump(2) + "\n");
    m.record("train-config-" + short_tag, "train-config-" + short_tag + ".json", "train-groups");
    json upstream{{"dataset", m.digest_of("dataset")},
                  {gname, m.digest_of(gname)},
                  {"train-config-" + short_tag, m.digest_of("train-config-" + short_tag)}};

    mtg_model** models = nullptr;
    int32_t count = 0;
    ok_or_die(mtg_train_groups(ds, spec.c_str(), cfg.dump().c_str(), g, tg_workers, &models,
                               &count));
    for (int32_t i = 0; i < count; ++i) {
      std::string tag = short_tag + "-g" + std::to_string(i);
      std::string rel = "model-" + tag + ".mtgm";
      ok_or_die(mtg_model_save(models[i], m.path_of(rel).c_str()));
      m.record("model-" + tag, rel, "train-groups", json{{"upstream", upstream}});
      std::printf("model-%s: %d heads -> %s\n", tag.c_str(), mtg_model_num_heads(models[i]),
                  rel.c_str());
    }
    mtg_model_array_free(models, count);
    mtg_grouping_free(g);
    mtg_dataset_free(ds);
  });

  // ---- report ----
  auto* c_report = app.add_subcommand("report", "score models per task and write comparison tables");
  std::vector<std::string> rp_methods;
  std::string rp_baseline, rp_split = "test", rp_strata, rp_name = "report";
  double rp_threshold = 0.5;
  int rp_threads = 1;
  c_report->add_option("--method", rp_methods,
                       "LABEL=model-artifact[,...]; a trailing * expands by prefix, e.g. "
                       "KMTL=model-kmeans-k4-g*")->required();
  c_report->add_option("--baseline", rp_baseline, "method label improvements are measured against");
  c_report->add_option("--split", rp_split, "train | validation | test")->capture_default_str();
  c_report->add_option("--strata-key", rp_strata, "metadata key for per-stratum improvement rows");
  c_report->add_option("--threshold", rp_threshold, "positive-call probability threshold")
      ->capture_default_str();
  c_report->add_option("--threads", rp_threads, "evaluation workers");
  c_report->add_option("--name", rp_name, "report directory name inside the run directory")
      ->capture_default_str();
  c_report->callback([&] {
    Manifest m = Manifest::open(out_dir);
    mtg_dataset* ds = open_dataset(m);
    int32_t split = rp_split == "train"        ? MTG_SPLIT_TRAIN
                    : rp_split == "validation" ? MTG_SPLIT_VALIDATION
                    : rp_split == "test"       ? MTG_SPLIT_TEST
                                               : -1;
    if (split < 0) die(MTG_ERR_INVALID_ARGUMENT, "--split must be train, validation or test");

    std::vector<mtg_scores*> sets;
    std::vector<std::string> labels;
    json upstream{{"dataset", m.digest_of("dataset")}};
    for (const std::string& spec : rp_methods) {
      size_t eq = spec.find('=');
      if (eq == std::string::npos || eq == 0)
        die(MTG_ERR_INVALID_ARGUMENT, "--method: expected LABEL=artifacts, got \"" + spec + "\"");
      std::string label = spec.substr(0, eq);
      std::vector<std::string> names;
      for (const std::string& piece : split_csv(spec.substr(eq + 1))) {
        if (!piece.empty() && piece.back() == '*') {
          std::vector<std::string> hits = m.names_with_prefix(piece.substr(0, piece.size() - 1));
          // a log artifact is not a model; keep the expansion to model files
          for (const std::string& h : hits)
            if (h.rfind("model-", 0) == 0) names.push_back(h);
        } else {
          names.push_back(piece);
        }
      }
      if (names.empty())
        die(MTG_ERR_STATE, "--method " + label + ": no model artifacts match \"" +
                               spec.substr(eq + 1) + "\"");
      std::vector<mtg_scores*> parts;
      for (const std::string& name : names) {
        std::string path = m.require(name);
        upstream[name] = m.digest_of(name);
        mtg_model* model = nullptr;
        ok_or_die(mtg_model_load(path.c_str(), &model));
        mtg_scores* s = nullptr;
        ok_or_die(mtg_evaluate(model, ds, split, label.c_str(), rp_threshold, rp_threads, &s));
        parts.push_back(s);
        mtg_model_free(model);
      }
      mtg_scores* merged = nullptr;
      ok_or_die(mtg_scores_merge(label.c_str(),
                                 const_cast<const mtg_scores* const*>(parts.data()),
                                 int32_t(parts.size()), &merged));
      for (mtg_scores* p : parts) mtg_scores_free(p);
      sets.push_back(merged);
      labels.push_back(label);
      std::printf("%s: mean F1 %.4f over %d tasks\n", label.c_str(), mtg_scores_mean_f1(merged),
                  mtg_scores_num_tasks(merged));
    }

    std::string rdir = m.path_of(rp_name);
    ok_or_die(mtg_report(rdir.c_str(), const_cast<const mtg_scores* const*>(sets.data()),
                         int32_t(sets.size()), rp_baseline.empty() ? "" : rp_baseline.c_str(),
                         ds, rp_strata.empty() ? nullptr : rp_strata.c_str()));
    json extra{{"upstream", upstream}, {"split", rp_split}};
    m.record(rp_name + "-scores", rp_name + "/scores.tsv", "report", extra);
    m.record(rp_name + "-pairwise", rp_name + "/pairwise.tsv", "report", extra);
    if (!rp_baseline.empty())
      m.record(rp_name + "-improvement", rp_name + "/improvement.tsv", "report", extra);
    m.record(rp_name + "-summary", rp_name + "/summary.json", "report", extra);
    std::printf("report -> %s\n", rdir.c_str());
    for (mtg_scores* s : sets) mtg_scores_free(s);
    mtg_dataset_free(ds);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "mtg: error: invalid_argument: %s\n", e.what());
    return int(MTG_ERR_INVALID_ARGUMENT);
  }
  return 0;
}

// Exercises the shared-library boundary: handles, status codes, thread error
// messages, and the JSON-over-C configuration paths. Substance of each
// algorithm is covered by the C++ unit suites; here the point is that the C
// surface forwards faithfully and fails loudly.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "mtg.h"

namespace {

std::string temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("mtg_capi_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

std::string write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  f << content;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

// small planted-group dataset reused by the pipeline-shaped cases
mtg_dataset* quad_dataset(uint64_t seed) {
  std::string cfg = R"({"groups":2,"tasks_per_group":2,"seq_length":40,"num_examples":400,
    "motif_length":6,"own_motifs_per_group":1,"shared_motifs":0,"conflict_strength":0.0,
    "positive_rate":0.50,"rate_spread":0.04,"label_noise":0.05,"implant_prob":0.5,
    "validation_fraction":0.2,"test_fraction":0.2,"seed":)" + std::to_string(seed) + "}";
  mtg_dataset* ds = nullptr;
  REQUIRE(mtg_dataset_synth(cfg.c_str(), &ds) == MTG_OK);
  REQUIRE(ds != nullptr);
  return ds;
}

const char* kTinySpec =
    R"({"input_length":40,"blocks":[{"filters":4,"width":5,"pool":4}],"head_hidden":4})";
const char* kTinyTrain =
    R"({"batch_size":16,"max_steps":60,"validate_every":20,"patience":3,
        "learning_rate":0.1,"seed":5})";

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(mtg_version()) == "1.0.0");
  CHECK(std::string(mtg_status_name(MTG_OK)) == "ok");
  CHECK(std::string(mtg_status_name(MTG_ERR_INVALID_ARGUMENT)) == "invalid_argument");
  CHECK(std::string(mtg_status_name(MTG_ERR_SHAPE_MISMATCH)) == "shape_mismatch");
  CHECK(std::string(mtg_status_name(MTG_ERR_STATE)) == "state");
  CHECK(std::string(mtg_status_name(MTG_ERR_IO)) == "io");
  CHECK(std::string(mtg_status_name(MTG_ERR_PARSE)) == "parse");
  CHECK(std::string(mtg_status_name(MTG_ERR_NUMERIC)) == "numeric");
  CHECK(std::string(mtg_status_name(MTG_ERR_DIGEST_MISMATCH)) == "digest_mismatch");
  CHECK(std::string(mtg_status_name(MTG_ERR_INTERNAL)) == "internal");
  CHECK(std::string(mtg_status_name(static_cast<mtg_status>(99))) == "unknown");
}

TEST_CASE("sha256 of a file matches the published test vector") {
  std::string dir = temp_dir("sha");
  std::string path = write_file(dir + "/abc.txt", "abc");
  char hex[65];
  REQUIRE(mtg_sha256_file(path.c_str(), hex) == MTG_OK);
  CHECK(std::string(hex) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");

  CHECK(mtg_sha256_file((dir + "/absent").c_str(), hex) == MTG_ERR_IO);
  CHECK(std::string(mtg_last_error()).size() > 0);
  CHECK(mtg_sha256_file(nullptr, hex) == MTG_ERR_INVALID_ARGUMENT);
}

TEST_CASE("synthetic dataset accessors") {
  mtg_dataset* ds = quad_dataset(3);
  CHECK(mtg_dataset_num_tasks(ds) == 4);
  CHECK(mtg_dataset_window_length(ds) == 40);
  CHECK(mtg_dataset_num_examples(ds) == 400);

  int64_t total = 0;
  for (int32_t s = 0; s < 3; ++s) {
    int64_t c = mtg_dataset_split_count(ds, s);
    CHECK(c > 0);
    total += c;
  }
  CHECK(total == 400);

  CHECK(std::string(mtg_dataset_task_id(ds, 0)) == "g0_t0");
  CHECK(std::string(mtg_dataset_task_id(ds, 3)) == "g1_t3");
  CHECK(mtg_dataset_task_index(ds, "g1_t2") == 2);
  CHECK(mtg_dataset_task_index(ds, "nope") == -1);

  CHECK(mtg_dataset_task_metadata(ds, 0, "planted_group") != nullptr);
  CHECK(std::string(mtg_dataset_task_metadata(ds, 3, "planted_group")) == "1");
  CHECK(mtg_dataset_task_metadata(ds, 0, "no_such_key") == nullptr);

  for (int32_t t = 0; t < 4; ++t) {
    int64_t pos = mtg_dataset_positive_count(ds, t, MTG_SPLIT_TRAIN);
    CHECK(pos >= 0);
    CHECK(pos <= mtg_dataset_split_count(ds, MTG_SPLIT_TRAIN));
  }

  CHECK(mtg_dataset_task_id(ds, 9) == nullptr);
  CHECK(std::string(mtg_last_error()).find("out of range") != std::string::npos);
  CHECK(mtg_dataset_positive_count(ds, 0, 7) == -1);
  mtg_dataset_free(ds);
}

TEST_CASE("dataset failure modes") {
  mtg_dataset* ds = nullptr;
  CHECK(mtg_dataset_synth("{not json", &ds) == MTG_ERR_PARSE);
  CHECK(mtg_dataset_synth(R"({"groups":0})", &ds) == MTG_ERR_INVALID_ARGUMENT);
  CHECK(mtg_dataset_synth(nullptr, &ds) == MTG_ERR_INVALID_ARGUMENT);
  CHECK(mtg_dataset_synth("{}", nullptr) == MTG_ERR_INVALID_ARGUMENT);
  CHECK(mtg_dataset_load("/no/such/file.mtgd", &ds) == MTG_ERR_IO);
  CHECK(ds == nullptr);

  CHECK(mtg_dataset_num_tasks(nullptr) == -1);
  CHECK(std::string(mtg_last_error()).find("NULL") != std::string::npos);
}

TEST_CASE("dataset save and load round trip") {
  std::string dir = temp_dir("ds_rt");
  mtg_dataset* ds = quad_dataset(11);
  std::string path = dir + "/ds.mtgd";
  REQUIRE(mtg_dataset_save(ds, path.c_str()) == MTG_OK);

  mtg_dataset* back = nullptr;
  REQUIRE(mtg_dataset_load(path.c_str(), &back) == MTG_OK);
  CHECK(mtg_dataset_num_tasks(back) == mtg_dataset_num_tasks(ds));
  CHECK(mtg_dataset_num_examples(back) == mtg_dataset_num_examples(ds));
  for (int32_t t = 0; t < 4; ++t) {
    CHECK(std::string(mtg_dataset_task_id(back, t)) == mtg_dataset_task_id(ds, t));
    CHECK(mtg_dataset_positive_count(back, t, MTG_SPLIT_TEST) ==
          mtg_dataset_positive_count(ds, t, MTG_SPLIT_TEST));
  }
  mtg_dataset_free(back);
  mtg_dataset_free(ds);
}

TEST_CASE("training returns a model and a log") {
  mtg_dataset* ds = quad_dataset(7);
  int32_t tasks[2] = {0, 1};
  mtg_model* model = nullptr;
  char* log = nullptr;
  REQUIRE(mtg_train(ds, kTinySpec, kTinyTrain, tasks, 2, &model, &log) == MTG_OK);
  REQUIRE(model != nullptr);
  REQUIRE(log != nullptr);

  CHECK(mtg_model_num_heads(model) == 2);
  CHECK(std::string(mtg_model_task_id(model, 0)) == "g0_t0");
  CHECK(std::string(mtg_model_task_id(model, 1)) == "g0_t1");

  std::string text = log;
  CHECK(text.find("# learning_rate\t0.1") != std::string::npos);
  CHECK(text.find("# best_step\t") != std::string::npos);
  CHECK(text.find("step\tvalidation_loss\n") != std::string::npos);
  mtg_string_free(log);

  char* spec_json = nullptr;
  REQUIRE(mtg_model_spec_json(model, &spec_json) == MTG_OK);
  CHECK(std::string(spec_json).find("\"input_length\": 40") != std::string::npos);
  CHECK(std::string(spec_json).find("\"num_tasks\": 2") != std::string::npos);
  mtg_string_free(spec_json);

  mtg_model_free(model);
  mtg_dataset_free(ds);
}

TEST_CASE("training failure modes") {
  mtg_dataset* ds = quad_dataset(7);
  int32_t tasks[2] = {0, 1};
  mtg_model* model = nullptr;
  CHECK(mtg_train(ds, "{bad", kTinyTrain, tasks, 2, &model, nullptr) == MTG_ERR_PARSE);
  CHECK(mtg_train(ds, kTinySpec, "[1,2]", tasks, 2, &model, nullptr) == MTG_ERR_PARSE);
  CHECK(std::string(mtg_last_error()).find("JSON object") != std::string::npos);
  CHECK(mtg_train(ds, kTinySpec, kTinyTrain, tasks, 0, &model, nullptr) ==
        MTG_ERR_INVALID_ARGUMENT);
  int32_t bad[1] = {17};
  CHECK(mtg_train(ds, kTinySpec, kTinyTrain, bad, 1, &model, nullptr) == MTG_ERR_INVALID_ARGUMENT);
  CHECK(model == nullptr);
  mtg_dataset_free(ds);
}

TEST_CASE("model save and load round trip") {
  std::string dir = temp_dir("model_rt");
  mtg_dataset* ds = quad_dataset(19);
  int32_t tasks[2] = {2, 3};
  mtg_model* model = nullptr;
  REQUIRE(mtg_train(ds, kTinySpec, kTinyTrain, tasks, 2, &model, nullptr) == MTG_OK);

  std::string path = dir + "/m.mtgm";
  REQUIRE(mtg_model_save(model, path.c_str()) == MTG_OK);
  mtg_model* back = nullptr;
  REQUIRE(mtg_model_load(path.c_str(), &back) == MTG_OK);
  CHECK(mtg_model_num_heads(back) == 2);
  CHECK(std::string(mtg_model_task_id(back, 0)) == "g1_t2");

  mtg_embedding* e1 = nullptr;
  mtg_embedding* e2 = nullptr;
  REQUIRE(mtg_embed(model, &e1) == MTG_OK);
  REQUIRE(mtg_embed(back, &e2) == MTG_OK);
  for (int32_t t = 0; t < 2; ++t)
    for (int32_t d = 0; d < mtg_embedding_dims(e1); ++d)
      CHECK(mtg_embedding_value(e1, t, d) == mtg_embedding_value(e2, t, d));

  mtg_embedding_free(e1);
  mtg_embedding_free(e2);
  mtg_model_free(back);
  mtg_model_free(model);
  mtg_dataset_free(ds);

  CHECK(mtg_model_load((dir + "/absent.mtgm").c_str(), &back) == MTG_ERR_IO);
}

TEST_CASE("embedding accessors, normalization, files") {
  std::string dir = temp_dir("emb");
  mtg_dataset* ds = quad_dataset(23);
  int32_t tasks[4] = {0, 1, 2, 3};
  mtg_model* model = nullptr;
  REQUIRE(mtg_train(ds, kTinySpec, kTinyTrain, tasks, 4, &model, nullptr) == MTG_OK);

  mtg_embedding* e = nullptr;
  REQUIRE(mtg_embed(model, &e) == MTG_OK);
  CHECK(mtg_embedding_num_tasks(e) == 4);
  CHECK(mtg_embedding_dims(e) == 4);  // head_hidden of the tiny spec
  CHECK(std::string(mtg_embedding_task_id(e, 2)) == "g1_t2");
  for (int32_t t = 0; t < 4; ++t)
    for (int32_t d = 0; d < 4; ++d) CHECK(std::isfinite(mtg_embedding_value(e, t, d)));
  CHECK(std::isnan(mtg_embedding_value(e, 4, 0)));

  std::string path = dir + "/emb.tsv";
  REQUIRE(mtg_embedding_save_tsv(e, path.c_str()) == MTG_OK);
  mtg_embedding* back = nullptr;
  REQUIRE(mtg_embedding_load_tsv(path.c_str(), &back) == MTG_OK);
  for (int32_t t = 0; t < 4; ++t)
    for (int32_t d = 0; d < 4; ++d)
      CHECK(mtg_embedding_value(back, t, d) == mtg_embedding_value(e, t, d));

  REQUIRE(mtg_embedding_normalize_rows(back) == MTG_OK);
  for (int32_t t = 0; t < 4; ++t) {
    double ss = 0;
    for (int32_t d = 0; d < 4; ++d) ss += mtg_embedding_value(back, t, d) *
                                          mtg_embedding_value(back, t, d);
    CHECK(std::sqrt(ss) == doctest::Approx(1.0).epsilon(1e-12));
  }
  mtg_embedding_free(back);

  std::string comp = dir + "/components.tsv";
  std::string proj = dir + "/projections.tsv";
  REQUIRE(mtg_embedding_pca(e, 2, comp.c_str(), proj.c_str()) == MTG_OK);
  CHECK(slurp(comp).find("component\t") == 0);
  CHECK(slurp(proj).find("task_id\t") == 0);
  CHECK(mtg_embedding_pca(e, 9, comp.c_str(), proj.c_str()) == MTG_ERR_INVALID_ARGUMENT);

  mtg_embedding_free(e);
  mtg_model_free(model);
  mtg_dataset_free(ds);
}

TEST_CASE("clustering through the C surface") {
  std::string dir = temp_dir("cluster");
  // two tight clumps, far apart
  std::string tsv =
      "dim\ta\tb\tc\td\n"
      "0\t1\t1.1\t6\t6.1\n"
      "1\t0\t0\t0\t0.1\n";
  std::string path = write_file(dir + "/points.tsv", tsv);
  mtg_embedding* e = nullptr;
  REQUIRE(mtg_embedding_load_tsv(path.c_str(), &e) == MTG_OK);

  mtg_grouping* g = nullptr;
  REQUIRE(mtg_cluster(e, "kmeans", R"({"k":2,"seed":1})", &g) == MTG_OK);
  CHECK(mtg_grouping_num_tasks(g) == 4);
  CHECK(mtg_grouping_num_groups(g) == 2);
  CHECK(mtg_grouping_assignment(g, 0) == mtg_grouping_assignment(g, 1));
  CHECK(mtg_grouping_assignment(g, 2) == mtg_grouping_assignment(g, 3));
  CHECK(mtg_grouping_assignment(g, 0) != mtg_grouping_assignment(g, 2));
  CHECK(std::string(mtg_grouping_algorithm(g)) == "kmeans");
  CHECK(std::isfinite(mtg_grouping_objective(g)));
  CHECK(std::string(mtg_grouping_task_id(g, 3)) == "d");

  std::string gpath = dir + "/grouping.tsv";
  REQUIRE(mtg_grouping_save_tsv(g, gpath.c_str()) == MTG_OK);
  mtg_grouping* back = nullptr;
  REQUIRE(mtg_grouping_load_tsv(gpath.c_str(), &back) == MTG_OK);
  for (int32_t t = 0; t < 4; ++t)
    CHECK(mtg_grouping_assignment(back, t) == mtg_grouping_assignment(g, t));
  mtg_grouping_free(back);
  mtg_grouping_free(g);

  // the other algorithms accept the same surface
  REQUIRE(mtg_cluster(e, "ward", R"({"k":2})", &g) == MTG_OK);
  CHECK(mtg_grouping_num_groups(g) == 2);
  mtg_grouping_free(g);
  REQUIRE(mtg_cluster(e, "spectral", R"({"k":2,"seed":4})", &g) == MTG_OK);
  CHECK(mtg_grouping_num_groups(g) == 2);
  mtg_grouping_free(g);
  REQUIRE(mtg_cluster(e, "dbscan", R"({"eps":0.5,"min_pts":2})", &g) == MTG_OK);
  CHECK(mtg_grouping_num_groups(g) == 2);
  mtg_grouping_free(g);
  REQUIRE(mtg_cluster(e, "ssc", R"({"k":2,"lambda":0.05})", &g) == MTG_OK);
  CHECK(mtg_grouping_num_tasks(g) == 4);
  mtg_grouping_free(g);

  g = nullptr;
  CHECK(mtg_cluster(e, "qmeans", "{}", &g) == MTG_ERR_INVALID_ARGUMENT);
  CHECK(std::string(mtg_last_error()).find("unknown clustering algorithm") != std::string::npos);
  CHECK(mtg_cluster(e, "kmeans", "{}", &g) == MTG_ERR_INVALID_ARGUMENT);
  CHECK(std::string(mtg_last_error()).find("requires \"k\"") != std::string::npos);
  CHECK(mtg_cluster(e, "kmeans", R"({"k":2,"epz":1})", &g) == MTG_ERR_INVALID_ARGUMENT);
  CHECK(std::string(mtg_last_error()).find("unknown key \"epz\"") != std::string::npos);
  CHECK(mtg_cluster(e, "dbscan", R"({"eps":0.5})", &g) == MTG_ERR_INVALID_ARGUMENT);
  CHECK(mtg_cluster(e, "kmeans", R"({"k":2.5})", &g) == MTG_ERR_INVALID_ARGUMENT);
  CHECK(mtg_cluster(e, "kmeans", "null", &g) == MTG_ERR_PARSE);
  CHECK(g == nullptr);

  mtg_embedding_free(e);
}

TEST_CASE("metadata grouping and rand index") {
  mtg_dataset* ds = quad_dataset(29);
  mtg_grouping* g = nullptr;
  REQUIRE(mtg_cluster_metadata(ds, "planted_group", &g) == MTG_OK);
  CHECK(mtg_grouping_num_groups(g) == 2);

  int32_t got[4], planted[4] = {0, 0, 1, 1};
  for (int32_t t = 0; t < 4; ++t) got[t] = mtg_grouping_assignment(g, t);
  double ari = 0;
  REQUIRE(mtg_adjusted_rand_index(got, planted, 4, &ari) == MTG_OK);
  CHECK(ari == 1.0);
  mtg_grouping_free(g);

  CHECK(mtg_cluster_metadata(ds, "no_such_key", &g) == MTG_ERR_INVALID_ARGUMENT);

  int32_t a[4] = {0, 0, 1, 1}, b[4] = {0, 1, 0, 1};
  REQUIRE(mtg_adjusted_rand_index(a, b, 4, &ari) == MTG_OK);
  CHECK(ari == -0.5);
  CHECK(mtg_adjusted_rand_index(a, b, 0, &ari) == MTG_ERR_INVALID_ARGUMENT);
  CHECK(mtg_adjusted_rand_index(nullptr, b, 4, &ari) == MTG_ERR_INVALID_ARGUMENT);

  mtg_grouping* s = nullptr;
  REQUIRE(mtg_grouping_singletons(4, &s) == MTG_OK);
  CHECK(mtg_grouping_num_groups(s) == 4);
  mtg_grouping_free(s);
  REQUIRE(mtg_grouping_all_in_one(4, &s) == MTG_OK);
  CHECK(mtg_grouping_num_groups(s) == 1);
  mtg_grouping_free(s);
  CHECK(mtg_grouping_singletons(0, &s) == MTG_ERR_INVALID_ARGUMENT);

  mtg_dataset_free(ds);
}

TEST_CASE("group training, evaluation, merge, report") {
  std::string dir = temp_dir("report");
  mtg_dataset* ds = quad_dataset(31);

  mtg_grouping* pairs = nullptr;
  REQUIRE(mtg_cluster_metadata(ds, "planted_group", &pairs) == MTG_OK);

  mtg_model** models = nullptr;
  int32_t count = 0;
  REQUIRE(mtg_train_groups(ds, kTinySpec, kTinyTrain, pairs, 2, &models, &count) == MTG_OK);
  REQUIRE(count == 2);
  CHECK(mtg_model_num_heads(models[0]) == 2);
  CHECK(mtg_model_num_heads(models[1]) == 2);

  // per-group scores merge into one method-level table
  mtg_scores* part0 = nullptr;
  mtg_scores* part1 = nullptr;
  REQUIRE(mtg_evaluate(models[0], ds, MTG_SPLIT_TEST, "KMTL", 0.5, 1, &part0) == MTG_OK);
  REQUIRE(mtg_evaluate(models[1], ds, MTG_SPLIT_TEST, "KMTL", 0.5, 1, &part1) == MTG_OK);
  CHECK(mtg_scores_num_tasks(part0) == 2);
  CHECK(std::string(mtg_scores_method(part0)) == "KMTL");
  double f1 = mtg_scores_f1(part0, 0);
  CHECK(f1 >= 0.0);
  CHECK(f1 <= 1.0);

  const mtg_scores* parts[2] = {part0, part1};
  mtg_scores* kmtl = nullptr;
  REQUIRE(mtg_scores_merge("KMTL", parts, 2, &kmtl) == MTG_OK);
  CHECK(mtg_scores_num_tasks(kmtl) == 4);
  CHECK(std::string(mtg_scores_task_id(kmtl, 0)) == "g0_t0");
  CHECK(std::isfinite(mtg_scores_mean_f1(kmtl)));

  std::string spath = dir + "/kmtl.tsv";
  REQUIRE(mtg_scores_save_tsv(kmtl, spath.c_str()) == MTG_OK);
  mtg_scores* back = nullptr;
  REQUIRE(mtg_scores_load_tsv(spath.c_str(), &back) == MTG_OK);
  CHECK(mtg_scores_mean_f1(back) == mtg_scores_mean_f1(kmtl));
  mtg_scores_free(back);

  // a second method over the same tasks: one shared model for all four
  mtg_model* joint = nullptr;
  int32_t all_tasks[4] = {0, 1, 2, 3};
  REQUIRE(mtg_train(ds, kTinySpec, kTinyTrain, all_tasks, 4, &joint, nullptr) == MTG_OK);
  mtg_scores* smtl = nullptr;
  REQUIRE(mtg_evaluate(joint, ds, MTG_SPLIT_TEST, "SMTL", 0.5, 1, &smtl) == MTG_OK);

  const mtg_scores* sets[2] = {smtl, kmtl};
  std::string rdir = dir + "/out";
  REQUIRE(mtg_report(rdir.c_str(), sets, 2, "SMTL", ds, "modality") == MTG_OK);
  CHECK(std::filesystem::exists(rdir + "/scores.tsv"));
  CHECK(std::filesystem::exists(rdir + "/pairwise.tsv"));
  CHECK(std::filesystem::exists(rdir + "/improvement.tsv"));
  CHECK(std::filesystem::exists(rdir + "/summary.json"));
  CHECK(slurp(rdir + "/summary.json").find("\"baseline\": \"SMTL\"") != std::string::npos);

  CHECK(mtg_report(rdir.c_str(), sets, 2, "", ds, "no_such_key") == MTG_OK);  // empty strata fine
  CHECK(mtg_report(rdir.c_str(), sets, 2, "", nullptr, "modality") == MTG_ERR_INVALID_ARGUMENT);
  CHECK(mtg_report(rdir.c_str(), sets, 0, "", nullptr, nullptr) == MTG_ERR_INVALID_ARGUMENT);

  mtg_scores_free(smtl);
  mtg_model_free(joint);
  mtg_scores_free(kmtl);
  mtg_scores_free(part0);
  mtg_scores_free(part1);
  mtg_model_array_free(models, count);
  mtg_grouping_free(pairs);
  mtg_dataset_free(ds);
}

TEST_CASE("evaluation failure modes") {
  mtg_dataset* ds = quad_dataset(37);
  int32_t tasks[1] = {0};
  mtg_model* m = nullptr;
  REQUIRE(mtg_train(ds, kTinySpec, kTinyTrain, tasks, 1, &m, nullptr) == MTG_OK);

  mtg_scores* s = nullptr;
  CHECK(mtg_evaluate(m, ds, 5, "STL", 0.5, 1, &s) == MTG_ERR_INVALID_ARGUMENT);
  CHECK(mtg_evaluate(m, ds, MTG_SPLIT_TEST, "STL", 0.0, 1, &s) == MTG_ERR_INVALID_ARGUMENT);
  CHECK(mtg_evaluate(nullptr, ds, MTG_SPLIT_TEST, "STL", 0.5, 1, &s) == MTG_ERR_INVALID_ARGUMENT);
  CHECK(s == nullptr);

  CHECK(std::isnan(mtg_scores_mean_f1(nullptr)));
  CHECK(mtg_scores_merge("x", nullptr, 1, &s) == MTG_ERR_INVALID_ARGUMENT);

  mtg_model_free(m);
  mtg_dataset_free(ds);
}

#pragma once

// Task grouping: partitions of the task set produced by cluster analysis of
// the embedding rows (k-means, Ward linkage, spectral, DBSCAN, sparse
// self-representation) or taken from task metadata.

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "data.hpp"
#include "linalg.hpp"

namespace mtg {

struct Grouping {
  std::vector<int> assignments;      // dense group ids 0..num_groups-1
  int num_groups = 0;
  std::vector<std::string> task_ids; // parallel to assignments
  std::string algorithm;
  uint64_t seed = 0;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<int> raw_labels;       // pre-repair labels (DBSCAN noise = -1)
  std::string note;

  int num_tasks() const { return int(assignments.size()); }
  std::vector<std::vector<int>> groups() const;  // ascending task indices per group

  void validate() const;
  void save_tsv(const std::string& path) const;
  static Grouping load_tsv(const std::string& path);
};

// ---- k-means --------------------------------------------------------------

struct KmeansParams {
  int k = 2;
  uint64_t seed = 0;
  int restarts = 20;
  int max_iters = 200;
};

struct KmeansResult {
  Grouping grouping;
  Matrix centroids;                             // of the winning restart
  std::vector<std::vector<double>> sse_history; // per restart, per iteration
  double sse = 0;
  int best_restart = 0;
};

// Lloyd iterations from a distance-weighted (k-means++) init, several
// restarts, lowest final SSE wins (ties to the earlier restart). Empty
// clusters are re-seeded on the point farthest from its centroid.
KmeansResult kmeans(const Matrix& points, const KmeansParams& p);

// ---- agglomerative (Ward) -------------------------------------------------

// Bottom-up merging, always joining the pair with the smallest increase in
// within-cluster variance, until k clusters remain. Group ids follow the
// smallest task index in each cluster. merge_costs (optional) receives the
// cost of every merge in order.
Grouping ward_linkage(const Matrix& points, int k, std::vector<double>* merge_costs = nullptr);

// ---- spectral -------------------------------------------------------------

// RBF affinity with the median pairwise distance as bandwidth, symmetric
// normalized Laplacian, k smallest eigenvectors (row-normalized), then
// k-means on the embedding.
Grouping spectral_cluster(const Matrix& points, int k, uint64_t seed);

// Same pipeline starting from a caller-supplied symmetric affinity.
Grouping spectral_on_affinity(const Matrix& affinity, int k, uint64_t seed,
                              const std::string& algo_name);

// ---- DBSCAN ---------------------------------------------------------------

// Standard density clustering (a point's eps-neighborhood includes itself).
// Noise points keep label -1 in raw_labels and are then attached to the
// nearest cluster centroid so the result is a full partition.
Grouping dbscan(const Matrix& points, double eps, int min_pts);

// ---- sparse self-representation ------------------------------------------

struct SscParams {
  double lambda = 0.1;
  int k = 2;
  uint64_t seed = 0;
  double tol = 1e-8;
  int max_sweeps = 10000;
};

struct SscResult {
  Grouping grouping;
  Matrix coefficients;  // row i: lasso representation of point i, diagonal 0
};

// Each point is expressed as a sparse combination of the others (coordinate
// descent lasso); |C| + |C^T| is clustered spectrally.
SscResult ssc(const Matrix& points, const SscParams& p,
              std::vector<std::vector<double>>* sweep_objectives = nullptr);

// ---- agreement and fixed partitions ---------------------------------------

double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

// Groups tasks by a metadata value; group ids follow the sorted distinct
// values. Missing keys are an error naming the task.
Grouping metadata_grouping(const TaskDataset& ds, const std::string& key);

Grouping all_in_one_grouping(int num_tasks);
Grouping singleton_grouping(int num_tasks);

}  // namespace mtg

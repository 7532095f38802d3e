#pragma once

// Task representations: one row per task, taken from the final classification
// layer of a jointly trained model, plus the PCA used to inspect them.

#include <string>
#include <vector>

#include "linalg.hpp"
#include "model.hpp"

namespace mtg {

struct TaskEmbedding {
  std::vector<std::string> task_ids;  // row labels
  Matrix values;                      // tasks x dims

  int num_tasks() const { return values.rows(); }
  int dims() const { return values.cols(); }

  void save_tsv(const std::string& path) const;
  static TaskEmbedding load_tsv(const std::string& path);
};

// One row per head: the head's final-layer weight vector.
TaskEmbedding extract_embeddings(const Model& model);

struct PcaResult {
  Matrix components;                      // n_components x dims, unit rows
  Matrix projected;                       // tasks x n_components
  std::vector<double> explained_variance; // descending eigenvalues
};

// PCA on centered rows. Component signs follow a fixed convention: the entry
// with the largest magnitude in each component is made positive (first such
// entry on ties), so repeated runs produce identical output files.
PcaResult pca(const Matrix& rows, int n_components);

void save_pca_tsv(const PcaResult& pca, const std::vector<std::string>& task_ids,
                  const std::string& components_path, const std::string& projection_path);

}  // namespace mtg

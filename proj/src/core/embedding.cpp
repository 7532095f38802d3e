#include "embedding.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "error.hpp"
#include "io.hpp"

namespace mtg {

namespace {
std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

TaskEmbedding extract_embeddings(const Model& model) {
  if (model.num_heads() < 1) fail(Errc::invalid_argument, "model has no heads");
  TaskEmbedding e;
  e.task_ids = model.task_ids;
  int d = model.spec().head_hidden;
  e.values = Matrix(model.num_heads(), d);
  for (int h = 0; h < model.num_heads(); ++h) {
    std::vector<float> w = model.head_weight_vector(h);
    for (int j = 0; j < d; ++j) e.values.at(h, j) = double(w[size_t(j)]);
  }
  return e;
}

// Tab-separated with a header row of task ids: each column is one task, each
// data row one embedding dimension.
void TaskEmbedding::save_tsv(const std::string& path) const {
  if (int(task_ids.size()) != values.rows())
    fail(Errc::shape_mismatch, "embedding has " + std::to_string(values.rows()) + " rows but " +
                                   std::to_string(task_ids.size()) + " task ids");
  std::string out = "dim";
  for (const std::string& id : task_ids) out += "\t" + id;
  out += "\n";
  for (int j = 0; j < values.cols(); ++j) {
    out += std::to_string(j);
    for (int t = 0; t < values.rows(); ++t) out += "\t" + fmt(values.at(t, j));
    out += "\n";
  }
  write_text_file(path, out);
}

TaskEmbedding TaskEmbedding::load_tsv(const std::string& path) {
  std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail(Errc::parse, path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  TaskEmbedding e;
  {
    std::istringstream hs(line);
    std::string cell;
    bool first = true;
    while (std::getline(hs, cell, '\t')) {
      if (first) {
        if (cell != "dim") fail(Errc::parse, path + ": expected header starting with 'dim'");
        first = false;
      } else {
        e.task_ids.push_back(cell);
      }
    }
    if (e.task_ids.empty()) fail(Errc::parse, path + ": header names no tasks");
  }
  std::vector<std::vector<double>> dims;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> row;
    bool first = true;
    while (std::getline(ls, cell, '\t')) {
      if (first) {
        first = false;
        continue;  // dimension index column
      }
      try {
        size_t p;
        row.push_back(std::stod(cell, &p));
        if (p != cell.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        fail(Errc::parse, path + ":" + std::to_string(lineno) + ": non-numeric value '" + cell + "'");
      }
    }
    if (row.size() != e.task_ids.size())
      fail(Errc::parse, path + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(e.task_ids.size()) + " values, got " +
                            std::to_string(row.size()));
    dims.push_back(std::move(row));
  }
  if (dims.empty()) fail(Errc::parse, path + ": no embedding rows");
  e.values = Matrix(int(e.task_ids.size()), int(dims.size()));
  for (size_t j = 0; j < dims.size(); ++j)
    for (size_t t = 0; t < e.task_ids.size(); ++t) e.values.at(int(t), int(j)) = dims[j][t];
  return e;
}

PcaResult pca(const Matrix& rows, int n_components) {
  int n = rows.rows(), d = rows.cols();
  if (n < 2) fail(Errc::invalid_argument, "pca needs at least 2 rows, got " + std::to_string(n));
  if (n_components < 1 || n_components > std::min(n, d))
    fail(Errc::invalid_argument, "n_components must be in [1," +
                                     std::to_string(std::min(n, d)) + "], got " +
                                     std::to_string(n_components));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      if (!std::isfinite(rows.at(i, j)))
        fail(Errc::invalid_argument, "pca: non-finite value at row " + std::to_string(i) +
                                         ", column " + std::to_string(j));
  Matrix xc = rows;
  for (int j = 0; j < d; ++j) {
    double mean = 0;
    for (int i = 0; i < n; ++i) mean += xc.at(i, j);
    mean /= n;
    for (int i = 0; i < n; ++i) xc.at(i, j) -= mean;
  }
  Matrix cov(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      double s = 0;
      for (int i = 0; i < n; ++i) s += xc.at(i, a) * xc.at(i, b);
      s /= (n - 1);
      cov.at(a, b) = s;
      cov.at(b, a) = s;
    }
  EigenSym eig = jacobi_eigen_sym(cov);

  PcaResult out;
  out.components = Matrix(n_components, d);
  out.explained_variance.resize(size_t(n_components));
  for (int k = 0; k < n_components; ++k) {
    int src = d - 1 - k;  // eigenpairs come sorted ascending
    out.explained_variance[size_t(k)] = std::max(0.0, eig.values[size_t(src)]);
    // sign convention: largest-magnitude loading positive, first wins ties
    int arg = 0;
    double best = -1;
    for (int j = 0; j < d; ++j) {
      double m = std::abs(eig.vectors.at(j, src));
      if (m > best) {
        best = m;
        arg = j;
      }
    }
    double flip = eig.vectors.at(arg, src) < 0 ? -1.0 : 1.0;
    for (int j = 0; j < d; ++j) out.components.at(k, j) = flip * eig.vectors.at(j, src);
  }
  out.projected = Matrix(n, n_components);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n_components; ++k)
      out.projected.at(i, k) = dot(xc.row(i), out.components.row(k), d);
  return out;
}

void save_pca_tsv(const PcaResult& p, const std::vector<std::string>& task_ids,
                  const std::string& components_path, const std::string& projection_path) {
  std::string comp = "component\texplained_variance";
  for (int j = 0; j < p.components.cols(); ++j) comp += "\tloading_" + std::to_string(j);
  comp += "\n";
  for (int k = 0; k < p.components.rows(); ++k) {
    comp += "pc" + std::to_string(k) + "\t" + fmt(p.explained_variance[size_t(k)]);
    for (int j = 0; j < p.components.cols(); ++j) comp += "\t" + fmt(p.components.at(k, j));
    comp += "\n";
  }
  write_text_file(components_path, comp);

  if (int(task_ids.size()) != p.projected.rows())
    fail(Errc::shape_mismatch, "projection rows do not match task id count");
  std::string proj = "task_id";
  for (int k = 0; k < p.projected.cols(); ++k) proj += "\tpc" + std::to_string(k);
  proj += "\n";
  for (int i = 0; i < p.projected.rows(); ++i) {
    proj += task_ids[size_t(i)];
    for (int k = 0; k < p.projected.cols(); ++k) proj += "\t" + fmt(p.projected.at(i, k));
    proj += "\n";
  }
  write_text_file(projection_path, proj);
}

}  // namespace mtg

#include "clustering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "error.hpp"
#include "io.hpp"
#include "rng.hpp"

namespace mtg {

namespace {
std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void require_finite(const Matrix& m, const std::string& who) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (!std::isfinite(m.at(i, j)))
        fail(Errc::invalid_argument, who + ": non-finite value at row " + std::to_string(i) +
                                         ", column " + std::to_string(j));
}
}  // namespace

// ---- Grouping -------------------------------------------------------------

std::vector<std::vector<int>> Grouping::groups() const {
  validate();
  std::vector<std::vector<int>> g(static_cast<size_t>(num_groups));
  for (size_t t = 0; t < assignments.size(); ++t)
    g[size_t(assignments[t])].push_back(int(t));
  return g;
}

void Grouping::validate() const {
  if (assignments.empty()) fail(Errc::invalid_argument, "grouping has no tasks");
  if (num_groups < 1) fail(Errc::invalid_argument, "grouping has no groups");
  std::vector<int> seen(size_t(num_groups), 0);
  for (size_t t = 0; t < assignments.size(); ++t) {
    int a = assignments[t];
    if (a < 0 || a >= num_groups)
      fail(Errc::invalid_argument, "task " + std::to_string(t) + " assigned to group " +
                                       std::to_string(a) + ", outside [0," +
                                       std::to_string(num_groups) + ")");
    seen[size_t(a)] = 1;
  }
  for (int gid = 0; gid < num_groups; ++gid)
    if (!seen[size_t(gid)])
      fail(Errc::invalid_argument, "group " + std::to_string(gid) + " is empty");
  if (!task_ids.empty() && task_ids.size() != assignments.size())
    fail(Errc::invalid_argument, "task id list does not match assignment count");
  if (!raw_labels.empty() && raw_labels.size() != assignments.size())
    fail(Errc::invalid_argument, "raw label list does not match assignment count");
}

void Grouping::save_tsv(const std::string& path) const {
  validate();
  std::string out;
  out += "# algorithm\t" + (algorithm.empty() ? std::string("unknown") : algorithm) + "\n";
  out += "# num_groups\t" + std::to_string(num_groups) + "\n";
  out += "# seed\t" + std::to_string(seed) + "\n";
  if (std::isfinite(objective)) out += "# objective\t" + fmt(objective) + "\n";
  if (!raw_labels.empty()) {
    out += "# raw_labels\t";
    for (size_t i = 0; i < raw_labels.size(); ++i)
      out += (i ? "," : "") + std::to_string(raw_labels[i]);
    out += "\n";
  }
  if (!note.empty()) out += "# note\t" + note + "\n";
  out += "task_id\tgroup\n";
  for (size_t t = 0; t < assignments.size(); ++t) {
    std::string id = t < task_ids.size() ? task_ids[t] : "task" + std::to_string(t);
    out += id + "\t" + std::to_string(assignments[t]) + "\n";
  }
  write_text_file(path, out);
}

Grouping Grouping::load_tsv(const std::string& path) {
  std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  Grouping g;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      size_t tab = line.find('\t');
      if (tab == std::string::npos) continue;
      std::string key = line.substr(2, tab - 2);
      std::string val = line.substr(tab + 1);
      try {
        if (key == "algorithm") g.algorithm = val;
        else if (key == "num_groups") g.num_groups = std::stoi(val);
        else if (key == "seed") g.seed = std::stoull(val);
        else if (key == "objective") g.objective = std::stod(val);
        else if (key == "note") g.note = val;
        else if (key == "raw_labels") {
          std::istringstream rs(val);
          std::string cell;
          while (std::getline(rs, cell, ',')) g.raw_labels.push_back(std::stoi(cell));
        }
      } catch (const std::exception&) {
        fail(Errc::parse, path + ":" + std::to_string(lineno) + ": bad metadata value '" + val + "'");
      }
      continue;
    }
    if (!header_seen) {
      if (line != "task_id\tgroup")
        fail(Errc::parse, path + ":" + std::to_string(lineno) + ": expected 'task_id<TAB>group'");
      header_seen = true;
      continue;
    }
    size_t tab = line.find('\t');
    if (tab == std::string::npos)
      fail(Errc::parse, path + ":" + std::to_string(lineno) + ": expected task_id<TAB>group");
    g.task_ids.push_back(line.substr(0, tab));
    try {
      g.assignments.push_back(std::stoi(line.substr(tab + 1)));
    } catch (const std::exception&) {
      fail(Errc::parse, path + ":" + std::to_string(lineno) + ": non-numeric group id");
    }
  }
  if (!header_seen) fail(Errc::parse, path + ": missing 'task_id\tgroup' header");
  if (g.num_groups == 0)
    for (int a : g.assignments) g.num_groups = std::max(g.num_groups, a + 1);
  try {
    g.validate();
  } catch (const Error& e) {
    fail(Errc::parse, path + ": " + e.what());
  }
  return g;
}

// ---- k-means --------------------------------------------------------------

KmeansResult kmeans(const Matrix& points, const KmeansParams& p) {
  int n = points.rows(), d = points.cols();
  if (n < 1) fail(Errc::invalid_argument, "k-means: no points");
  if (p.k < 1 || p.k > n)
    fail(Errc::invalid_argument, "k-means: k must be in [1," + std::to_string(n) + "], got " +
                                     std::to_string(p.k));
  if (p.restarts < 1) fail(Errc::invalid_argument, "k-means: restarts must be >= 1");
  if (p.max_iters < 1) fail(Errc::invalid_argument, "k-means: max_iters must be >= 1");
  require_finite(points, "k-means");
  int k = p.k;

  KmeansResult best;
  double best_sse = std::numeric_limits<double>::infinity();

  for (int restart = 0; restart < p.restarts; ++restart) {
    Rng rng(splitmix64(p.seed ^ (0x6b6d65616e73ULL + uint64_t(restart) * 0x9e3779b97f4a7c15ULL)));
    Matrix cent(k, d);
    std::vector<double> dist2(size_t(n), 0.0);

    // distance-weighted seeding
    {
      int first = rng.index(n);
      std::copy(points.row(first), points.row(first) + d, cent.row(0));
      for (int i = 0; i < n; ++i) dist2[size_t(i)] = squared_distance(points.row(i), cent.row(0), d);
      for (int j = 1; j < k; ++j) {
        double total = 0;
        for (double v : dist2) total += v;
        int pick = -1;
        if (total > 0) {
          double u = rng.uniform() * total, cum = 0;
          for (int i = 0; i < n; ++i) {
            if (dist2[size_t(i)] <= 0) continue;
            pick = i;
            cum += dist2[size_t(i)];
            if (cum > u) break;
          }
        } else {
          pick = rng.index(n);  // all remaining points coincide
        }
        std::copy(points.row(pick), points.row(pick) + d, cent.row(j));
        for (int i = 0; i < n; ++i)
          dist2[size_t(i)] = std::min(dist2[size_t(i)], squared_distance(points.row(i), cent.row(j), d));
      }
    }

    std::vector<int> assign(size_t(n), -1), prev(size_t(n), -2);
    std::vector<double> history;
    for (int iter = 0; iter < p.max_iters; ++iter) {
      double sse = 0;
      for (int i = 0; i < n; ++i) {
        int arg = 0;
        double bd = squared_distance(points.row(i), cent.row(0), d);
        for (int j = 1; j < k; ++j) {
          double dj = squared_distance(points.row(i), cent.row(j), d);
          if (dj < bd) { bd = dj; arg = j; }
        }
        assign[size_t(i)] = arg;
        sse += bd;
      }
      history.push_back(sse);
      if (assign == prev) break;
      prev = assign;

      std::vector<int> count(size_t(k), 0);
      Matrix sums(k, d);
      for (int i = 0; i < n; ++i) {
        int a = assign[size_t(i)];
        ++count[size_t(a)];
        const double* pr = points.row(i);
        double* sr = sums.row(a);
        for (int j = 0; j < d; ++j) sr[j] += pr[j];
      }
      for (int j = 0; j < k; ++j)
        if (count[size_t(j)] > 0)
          for (int c = 0; c < d; ++c) cent.at(j, c) = sums.at(j, c) / count[size_t(j)];
      // empty clusters grab the point farthest from its centroid
      for (int j = 0; j < k; ++j) {
        if (count[size_t(j)] > 0) continue;
        int far = -1;
        double fd = -1;
        for (int i = 0; i < n; ++i) {
          double di = squared_distance(points.row(i), cent.row(assign[size_t(i)]), d);
          if (di > fd) { fd = di; far = i; }
        }
        std::copy(points.row(far), points.row(far) + d, cent.row(j));
        assign[size_t(far)] = j;
        count[size_t(j)] = 1;
      }
    }

    double sse = history.back();
    best.sse_history.push_back(history);
    if (sse < best_sse) {
      best_sse = sse;
      best.grouping.assignments = assign;
      best.centroids = cent;
      best.best_restart = restart;
    }
  }

  // relabel to dense ids in case a cluster died (possible only when fewer
  // distinct points than k)
  std::vector<int> remap(size_t(k), -1);
  int next = 0;
  for (int a : best.grouping.assignments)
    if (remap[size_t(a)] < 0) remap[size_t(a)] = next++;
  for (int& a : best.grouping.assignments) a = remap[size_t(a)];
  Matrix dense_cent(next, points.cols());
  for (int j = 0; j < k; ++j)
    if (remap[size_t(j)] >= 0)
      std::copy(best.centroids.row(j), best.centroids.row(j) + d, dense_cent.row(remap[size_t(j)]));
  best.centroids = dense_cent;
  best.grouping.num_groups = next;
  if (next < k)
    best.grouping.note = "only " + std::to_string(next) + " of " + std::to_string(k) +
                         " clusters survived (duplicate points)";
  best.grouping.algorithm = "kmeans";
  best.grouping.seed = p.seed;
  best.grouping.objective = best_sse;
  best.sse = best_sse;
  return best;
}

// ---- Ward linkage ---------------------------------------------------------

Grouping ward_linkage(const Matrix& points, int k, std::vector<double>* merge_costs) {
  int n = points.rows(), d = points.cols();
  if (n < 1) fail(Errc::invalid_argument, "ward: no points");
  if (k < 1 || k > n)
    fail(Errc::invalid_argument, "ward: k must be in [1," + std::to_string(n) + "], got " +
                                     std::to_string(k));
  require_finite(points, "ward");
  std::vector<bool> alive(size_t(n), true);
  std::vector<int> size(size_t(n), 1);
  Matrix cent = points;
  std::vector<int> smallest(size_t(n), 0);  // smallest original index per cluster
  for (int i = 0; i < n; ++i) smallest[size_t(i)] = i;
  std::vector<int> member_of(size_t(n), 0);
  for (int i = 0; i < n; ++i) member_of[size_t(i)] = i;

  if (merge_costs) merge_costs->clear();
  auto cost = [&](int a, int b) {
    double na = size[size_t(a)], nb = size[size_t(b)];
    return na * nb / (na + nb) * squared_distance(cent.row(a), cent.row(b), d);
  };

  for (int merges = 0; merges < n - k; ++merges) {
    int bi = -1, bj = -1;
    double bc = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (!alive[size_t(i)]) continue;
      for (int j = i + 1; j < n; ++j) {
        if (!alive[size_t(j)]) continue;
        double c = cost(i, j);
        if (c < bc) { bc = c; bi = i; bj = j; }
      }
    }
    if (merge_costs) merge_costs->push_back(bc);
    // merge bj into bi: centroid is the size-weighted mean
    double na = size[size_t(bi)], nb = size[size_t(bj)];
    for (int c = 0; c < d; ++c)
      cent.at(bi, c) = (na * cent.at(bi, c) + nb * cent.at(bj, c)) / (na + nb);
    size[size_t(bi)] += size[size_t(bj)];
    smallest[size_t(bi)] = std::min(smallest[size_t(bi)], smallest[size_t(bj)]);
    alive[size_t(bj)] = false;
    for (int i = 0; i < n; ++i)
      if (member_of[size_t(i)] == bj) member_of[size_t(i)] = bi;
  }

  // dense ids ordered by each surviving cluster's smallest member
  std::vector<std::pair<int, int>> survivors;  // (smallest member, cluster idx)
  for (int i = 0; i < n; ++i)
    if (alive[size_t(i)]) survivors.emplace_back(smallest[size_t(i)], i);
  std::sort(survivors.begin(), survivors.end());
  std::vector<int> id_of(size_t(n), -1);
  for (size_t gi = 0; gi < survivors.size(); ++gi) id_of[size_t(survivors[gi].second)] = int(gi);

  Grouping g;
  g.assignments.resize(size_t(n));
  for (int i = 0; i < n; ++i) g.assignments[size_t(i)] = id_of[size_t(member_of[size_t(i)])];
  g.num_groups = int(survivors.size());
  g.algorithm = "ward";
  return g;
}

// ---- spectral -------------------------------------------------------------

namespace {

Grouping spectral_core(const Matrix& affinity, int k, uint64_t seed, const std::string& name) {
  int n = affinity.rows();
  if (k < 2 || k > n)
    fail(Errc::invalid_argument, name + ": k must be in [2," + std::to_string(n) + "], got " +
                                     std::to_string(k));
  std::vector<double> dsum(size_t(n), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      if (j != i) dsum[size_t(i)] += affinity.at(i, j);
    if (dsum[size_t(i)] <= 0)
      fail(Errc::numeric, name + ": point " + std::to_string(i) +
                              " has zero affinity to every other point; an isolated vertex "
                              "cannot be embedded");
  }
  std::vector<double> isq(size_t(n), 0.0);
  for (int i = 0; i < n; ++i) isq[size_t(i)] = 1.0 / std::sqrt(dsum[size_t(i)]);
  Matrix lap(n, n);
  for (int i = 0; i < n; ++i) {
    lap.at(i, i) = 1.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      lap.at(i, j) = -affinity.at(i, j) * isq[size_t(i)] * isq[size_t(j)];
    }
  }
  EigenSym eig = jacobi_eigen_sym(lap);
  Matrix emb(n, k);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < k; ++c) emb.at(i, c) = eig.vectors.at(i, c);  // k smallest
    double nrm = norm2(emb.row(i), k);
    if (nrm > 0)
      for (int c = 0; c < k; ++c) emb.at(i, c) /= nrm;
  }
  KmeansParams kp;
  kp.k = k;
  kp.seed = splitmix64(seed ^ 0x7370656374ULL);
  kp.restarts = 10;
  KmeansResult km = kmeans(emb, kp);
  Grouping g = km.grouping;
  g.algorithm = name;
  g.seed = seed;
  return g;
}

}  // namespace

Grouping spectral_cluster(const Matrix& points, int k, uint64_t seed) {
  int n = points.rows(), d = points.cols();
  if (n < 2) fail(Errc::invalid_argument, "spectral: need at least 2 points");
  require_finite(points, "spectral");
  std::vector<double> dists;
  dists.reserve(size_t(n) * size_t(n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      dists.push_back(std::sqrt(squared_distance(points.row(i), points.row(j), d)));
  std::nth_element(dists.begin(), dists.begin() + ptrdiff_t(dists.size() / 2), dists.end());
  double sigma = dists[dists.size() / 2];
  if (!(sigma > 0))
    fail(Errc::numeric, "spectral: degenerate affinity, median pairwise distance is zero "
                        "(points coincide)");
  Matrix aff(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double d2 = squared_distance(points.row(i), points.row(j), d);
      aff.at(i, j) = std::exp(-d2 / (2.0 * sigma * sigma));
    }
  return spectral_core(aff, k, seed, "spectral");
}

Grouping spectral_on_affinity(const Matrix& affinity, int k, uint64_t seed,
                              const std::string& algo_name) {
  if (affinity.rows() != affinity.cols())
    fail(Errc::shape_mismatch, "affinity matrix must be square, got " +
                                   std::to_string(affinity.rows()) + "x" +
                                   std::to_string(affinity.cols()));
  for (int i = 0; i < affinity.rows(); ++i)
    for (int j = 0; j < affinity.cols(); ++j)
      if (!std::isfinite(affinity.at(i, j)) || affinity.at(i, j) < 0)
        fail(Errc::invalid_argument, "affinity entries must be non-negative and finite");
  return spectral_core(affinity, k, seed, algo_name);
}

// ---- DBSCAN ---------------------------------------------------------------

Grouping dbscan(const Matrix& points, double eps, int min_pts) {
  int n = points.rows(), d = points.cols();
  if (n < 1) fail(Errc::invalid_argument, "dbscan: no points");
  if (!(eps > 0)) fail(Errc::invalid_argument, "dbscan: eps must be > 0");
  if (min_pts < 1) fail(Errc::invalid_argument, "dbscan: min_pts must be >= 1");
  require_finite(points, "dbscan");
  double eps2 = eps * eps;
  std::vector<std::vector<int>> nbr(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (squared_distance(points.row(i), points.row(j), d) <= eps2) nbr[size_t(i)].push_back(j);

  std::vector<int> label(size_t(n), -2);  // -2 unvisited, -1 noise
  int cluster = 0;
  for (int i = 0; i < n; ++i) {
    if (label[size_t(i)] != -2) continue;
    if (int(nbr[size_t(i)].size()) < min_pts) {
      label[size_t(i)] = -1;
      continue;
    }
    int cid = cluster++;
    label[size_t(i)] = cid;
    std::vector<int> queue = nbr[size_t(i)];
    for (size_t qi = 0; qi < queue.size(); ++qi) {
      int q = queue[qi];
      if (label[size_t(q)] == -1) label[size_t(q)] = cid;  // border point
      if (label[size_t(q)] != -2) continue;
      label[size_t(q)] = cid;
      if (int(nbr[size_t(q)].size()) >= min_pts)
        queue.insert(queue.end(), nbr[size_t(q)].begin(), nbr[size_t(q)].end());
    }
  }

  if (cluster == 0)
    fail(Errc::invalid_argument,
         "dbscan: every point is noise; increase eps or decrease min_pts");

  Grouping g;
  g.raw_labels = label;
  g.assignments = label;
  g.num_groups = cluster;
  g.algorithm = "dbscan";

  // attach noise to the nearest cluster centroid
  int noise = 0;
  Matrix cent(cluster, d);
  std::vector<int> count(size_t(cluster), 0);
  for (int i = 0; i < n; ++i) {
    if (label[size_t(i)] < 0) { ++noise; continue; }
    ++count[size_t(label[size_t(i)])];
    const double* pr = points.row(i);
    double* cr = cent.row(label[size_t(i)]);
    for (int c = 0; c < d; ++c) cr[c] += pr[c];
  }
  for (int j = 0; j < cluster; ++j)
    for (int c = 0; c < d; ++c) cent.at(j, c) /= count[size_t(j)];
  if (noise > 0) {
    for (int i = 0; i < n; ++i) {
      if (label[size_t(i)] >= 0) continue;
      int arg = 0;
      double bd = squared_distance(points.row(i), cent.row(0), d);
      for (int j = 1; j < cluster; ++j) {
        double dj = squared_distance(points.row(i), cent.row(j), d);
        if (dj < bd) { bd = dj; arg = j; }
      }
      g.assignments[size_t(i)] = arg;
    }
    g.note = std::to_string(noise) + " noise point" + (noise == 1 ? "" : "s") +
             " reassigned to the nearest cluster centroid";
  }
  return g;
}

// ---- sparse self-representation ------------------------------------------

SscResult ssc(const Matrix& points, const SscParams& p,
              std::vector<std::vector<double>>* sweep_objectives) {
  int n = points.rows(), d = points.cols();
  if (n < 2) fail(Errc::invalid_argument, "ssc: need at least 2 points");
  if (!(p.lambda > 0)) fail(Errc::invalid_argument, "ssc: lambda must be > 0");
  if (!(p.tol > 0)) fail(Errc::invalid_argument, "ssc: tol must be > 0");
  if (p.max_sweeps < 1) fail(Errc::invalid_argument, "ssc: max_sweeps must be >= 1");
  require_finite(points, "ssc");

  std::vector<double> gram_diag(size_t(n), 0.0);
  for (int j = 0; j < n; ++j) gram_diag[size_t(j)] = dot(points.row(j), points.row(j), d);

  Matrix C(n, n);
  if (sweep_objectives) sweep_objectives->assign(size_t(n), {});
  std::vector<double> r(size_t(d), 0.0);
  for (int i = 0; i < n; ++i) {
    std::copy(points.row(i), points.row(i) + d, r.begin());
    double* ci = C.row(i);
    for (int sweep = 0; sweep < p.max_sweeps; ++sweep) {
      double max_delta = 0;
      for (int j = 0; j < n; ++j) {
        if (j == i || gram_diag[size_t(j)] == 0) continue;
        double theta = dot(points.row(j), r.data(), d) + gram_diag[size_t(j)] * ci[j];
        double half = p.lambda / 2.0;
        double cnew = 0;
        if (theta > half) cnew = (theta - half) / gram_diag[size_t(j)];
        else if (theta < -half) cnew = (theta + half) / gram_diag[size_t(j)];
        double delta = cnew - ci[j];
        if (delta != 0) {
          const double* xj = points.row(j);
          for (int c = 0; c < d; ++c) r[size_t(c)] -= delta * xj[c];
          ci[j] = cnew;
        }
        max_delta = std::max(max_delta, std::abs(delta));
      }
      if (sweep_objectives) {
        double obj = dot(r.data(), r.data(), d);
        for (int j = 0; j < n; ++j) obj += p.lambda * std::abs(ci[j]);
        (*sweep_objectives)[size_t(i)].push_back(obj);
      }
      if (max_delta < p.tol) break;
    }
  }

  Matrix aff(n, n);
  double max_aff = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double v = std::abs(C.at(i, j)) + std::abs(C.at(j, i));
      aff.at(i, j) = v;
      max_aff = std::max(max_aff, v);
    }
  if (max_aff < 1e-12)
    fail(Errc::numeric, "ssc: every self-representation coefficient is zero; lambda " +
                            fmt(p.lambda) + " is too large for this data scale");

  SscResult out;
  out.coefficients = C;
  out.grouping = spectral_on_affinity(aff, p.k, p.seed, "ssc");
  double total_obj = 0;
  for (int i = 0; i < n; ++i) {
    std::copy(points.row(i), points.row(i) + d, r.begin());
    for (int j = 0; j < n; ++j)
      if (C.at(i, j) != 0) {
        const double* xj = points.row(j);
        for (int c = 0; c < d; ++c) r[size_t(c)] -= C.at(i, j) * xj[c];
      }
    total_obj += dot(r.data(), r.data(), d);
    for (int j = 0; j < n; ++j) total_obj += p.lambda * std::abs(C.at(i, j));
  }
  out.grouping.objective = total_obj;
  out.grouping.seed = p.seed;
  return out;
}

// ---- agreement ------------------------------------------------------------

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size())
    fail(Errc::invalid_argument, "adjusted_rand_index: partitions label " +
                                     std::to_string(a.size()) + " and " + std::to_string(b.size()) +
                                     " items");
  if (a.empty()) fail(Errc::invalid_argument, "adjusted_rand_index: empty partitions");
  std::map<int, int> amap, bmap;
  for (int v : a) amap.emplace(v, int(amap.size()));
  for (int v : b) bmap.emplace(v, int(bmap.size()));
  int ka = int(amap.size()), kb = int(bmap.size());
  std::vector<int64_t> table(size_t(ka) * size_t(kb), 0);
  std::vector<int64_t> asum(size_t(ka), 0), bsum(size_t(kb), 0);
  for (size_t i = 0; i < a.size(); ++i) {
    int ai = amap[a[i]], bi = bmap[b[i]];
    ++table[size_t(ai) * size_t(kb) + size_t(bi)];
    ++asum[size_t(ai)];
    ++bsum[size_t(bi)];
  }
  // every term is a sum of binomial pair counts, so clearing the fractions
  // leaves one exact division: (2 T I - 2 Sa Sb) / (T (Sa + Sb) - 2 Sa Sb)
  auto c2 = [](int64_t x) { return double(x) * double(x - 1) / 2.0; };
  double index = 0;
  for (int64_t v : table) index += c2(v);
  double sa = 0, sb = 0;
  for (int64_t v : asum) sa += c2(v);
  for (int64_t v : bsum) sb += c2(v);
  double total = c2(int64_t(a.size()));
  double num = 2.0 * total * index - 2.0 * sa * sb;
  double den = total * (sa + sb) - 2.0 * sa * sb;
  if (den == 0) return 1.0;  // both partitions trivial and identical in structure
  return num / den;
}

// ---- fixed partitions -----------------------------------------------------

Grouping metadata_grouping(const TaskDataset& ds, const std::string& key) {
  if (ds.num_tasks() < 1) fail(Errc::invalid_argument, "dataset has no tasks");
  std::vector<std::string> values(size_t(ds.num_tasks()));
  std::set<std::string> distinct;
  for (int t = 0; t < ds.num_tasks(); ++t) {
    auto it = ds.tasks[size_t(t)].metadata.find(key);
    if (it == ds.tasks[size_t(t)].metadata.end())
      fail(Errc::invalid_argument, "task " + ds.tasks[size_t(t)].id + " has no metadata key '" +
                                       key + "'");
    values[size_t(t)] = it->second;
    distinct.insert(it->second);
  }
  std::map<std::string, int> id_of;
  for (const std::string& v : distinct) id_of.emplace(v, int(id_of.size()));
  Grouping g;
  g.num_groups = int(distinct.size());
  g.algorithm = "metadata";
  g.note = "key=" + key;
  for (int t = 0; t < ds.num_tasks(); ++t) {
    g.assignments.push_back(id_of[values[size_t(t)]]);
    g.task_ids.push_back(ds.tasks[size_t(t)].id);
  }
  return g;
}

Grouping all_in_one_grouping(int num_tasks) {
  if (num_tasks < 1) fail(Errc::invalid_argument, "need at least one task");
  Grouping g;
  g.assignments.assign(size_t(num_tasks), 0);
  g.num_groups = 1;
  g.algorithm = "all_in_one";
  return g;
}

Grouping singleton_grouping(int num_tasks) {
  if (num_tasks < 1) fail(Errc::invalid_argument, "need at least one task");
  Grouping g;
  g.assignments.resize(size_t(num_tasks));
  for (int t = 0; t < num_tasks; ++t) g.assignments[size_t(t)] = t;
  g.num_groups = num_tasks;
  g.algorithm = "singletons";
  return g;
}

}  // namespace mtg

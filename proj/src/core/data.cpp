#include "data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "io.hpp"

namespace mtg {

using nlohmann::json;

const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "?";
}

// ---- TaskDataset ----------------------------------------------------------

std::vector<int64_t> TaskDataset::indices_of(Split s) const {
  std::vector<int64_t> idx;
  for (int64_t i = 0; i < num_examples(); ++i)
    if (split[size_t(i)] == s) idx.push_back(i);
  return idx;
}

int64_t TaskDataset::count_of(Split s) const {
  int64_t n = 0;
  for (Split v : split) n += (v == s);
  return n;
}

int64_t TaskDataset::positive_count(int task, Split s) const {
  int64_t n = 0;
  for (int64_t i = 0; i < num_examples(); ++i)
    if (split[size_t(i)] == s && label(i, task)) ++n;
  return n;
}

int TaskDataset::task_index(const std::string& id) const {
  for (size_t t = 0; t < tasks.size(); ++t)
    if (tasks[t].id == id) return int(t);
  return -1;
}

void TaskDataset::validate() const {
  if (window_length < 1) fail(Errc::invalid_argument, "dataset window_length must be >= 1");
  if (tasks.empty()) fail(Errc::invalid_argument, "dataset has no tasks");
  int64_t n = num_examples();
  int T = num_tasks();
  if (int64_t(seq.size()) != n * window_length)
    fail(Errc::invalid_argument, "sequence store holds " + std::to_string(seq.size()) +
                                     " codes, expected " + std::to_string(n * window_length));
  if (int64_t(labels.size()) != n * T)
    fail(Errc::invalid_argument, "label store holds " + std::to_string(labels.size()) +
                                     " values, expected " + std::to_string(n * T));
  if (!coords.empty() && int64_t(coords.size()) != n)
    fail(Errc::invalid_argument, "coordinate store size does not match example count");
  std::set<std::string> ids;
  for (const TaskInfo& t : tasks) {
    if (t.id.empty()) fail(Errc::invalid_argument, "empty task id");
    if (!ids.insert(t.id).second) fail(Errc::invalid_argument, "duplicate task id " + t.id);
  }
  for (uint8_t c : seq)
    if (c > kCodeN) fail(Errc::invalid_argument, "sequence code out of range");
  for (int64_t i = 0; i < n; ++i) {
    bool any = false;
    for (int t = 0; t < T; ++t) {
      uint8_t v = label(i, t);
      if (v > 1) fail(Errc::invalid_argument, "label value out of range at example " + std::to_string(i));
      any = any || v;
    }
    if (!any)
      fail(Errc::invalid_argument,
           "example " + std::to_string(i) + " has no positive label for any task");
  }
  if (!coords.empty()) {
    for (const BinCoord& c : coords) {
      if (c.chrom < 0 || c.chrom >= int32_t(chrom_names.size()))
        fail(Errc::invalid_argument, "coordinate references unknown chromosome index");
      if (c.start < 0) fail(Errc::invalid_argument, "negative bin coordinate");
    }
  }
}

namespace {
constexpr char kDataMagic[4] = {'M', 'T', 'G', 'D'};
constexpr uint32_t kDataVersion = 1;
}  // namespace

void TaskDataset::save(const std::string& path) const {
  validate();
  BinWriter w(path);
  w.bytes(kDataMagic, 4);
  w.u32(kDataVersion);
  w.i32(window_length);
  w.i32(num_tasks());
  w.i64(num_examples());
  w.u8(coords.empty() ? 0 : 1);
  w.u32(uint32_t(chrom_names.size()));
  for (const std::string& c : chrom_names) w.str(c);
  for (const TaskInfo& t : tasks) {
    w.str(t.id);
    w.u32(uint32_t(t.metadata.size()));
    for (const auto& [k, v] : t.metadata) {
      w.str(k);
      w.str(v);
    }
  }
  int64_t n = num_examples();
  int L = window_length, T = num_tasks();
  size_t packed_len = size_t((L + 3) / 4), mask_len = size_t((L + 7) / 8);
  size_t lab_len = size_t((T + 7) / 8);
  std::vector<uint8_t> packed(packed_len), mask(mask_len), lab(lab_len);
  for (int64_t i = 0; i < n; ++i) {
    std::fill(packed.begin(), packed.end(), 0);
    std::fill(mask.begin(), mask.end(), 0);
    std::fill(lab.begin(), lab.end(), 0);
    const uint8_t* row = seq.data() + i * L;
    for (int j = 0; j < L; ++j) {
      uint8_t c = row[j];
      if (c == kCodeN) {
        mask[size_t(j) / 8] |= uint8_t(1u << (j % 8));
      } else {
        packed[size_t(j) / 4] |= uint8_t(c << (2 * (j % 4)));
      }
    }
    for (int t = 0; t < T; ++t)
      if (label(i, t)) lab[size_t(t) / 8] |= uint8_t(1u << (t % 8));
    w.bytes(packed.data(), packed_len);
    w.bytes(mask.data(), mask_len);
    w.bytes(lab.data(), lab_len);
    w.u8(uint8_t(split[size_t(i)]));
    if (!coords.empty()) {
      w.i32(coords[size_t(i)].chrom);
      w.i64(coords[size_t(i)].start);
    }
  }
  w.close();
}

TaskDataset TaskDataset::load(const std::string& path) {
  BinReader r(path);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kDataMagic, 4) != 0)
    fail(Errc::parse, path + ": not a dataset file (bad magic)");
  uint32_t ver = r.u32();
  if (ver != kDataVersion)
    fail(Errc::parse, path + ": unsupported dataset version " + std::to_string(ver));
  TaskDataset ds;
  ds.window_length = r.i32();
  int T = r.i32();
  int64_t n = r.i64();
  if (ds.window_length < 1 || ds.window_length > (1 << 24))
    fail(Errc::parse, path + ": bad window length");
  if (T < 1 || T > (1 << 20)) fail(Errc::parse, path + ": bad task count");
  if (n < 0 || n > (int64_t(1) << 40)) fail(Errc::parse, path + ": bad example count");
  bool has_coords = r.u8() != 0;
  uint32_t nchrom = r.u32();
  if (nchrom > (1u << 20)) fail(Errc::parse, path + ": bad chromosome count");
  for (uint32_t i = 0; i < nchrom; ++i) ds.chrom_names.push_back(r.str(1 << 16));
  for (int t = 0; t < T; ++t) {
    TaskInfo ti;
    ti.id = r.str(1 << 16);
    uint32_t nm = r.u32();
    if (nm > (1u << 16)) fail(Errc::parse, path + ": bad metadata count");
    for (uint32_t j = 0; j < nm; ++j) {
      std::string k = r.str(1 << 16);
      ti.metadata[k] = r.str(1 << 20);
    }
    ds.tasks.push_back(std::move(ti));
  }
  int L = ds.window_length;
  size_t packed_len = size_t((L + 3) / 4), mask_len = size_t((L + 7) / 8);
  size_t lab_len = size_t((T + 7) / 8);
  ds.seq.resize(size_t(n) * size_t(L));
  ds.labels.resize(size_t(n) * size_t(T));
  ds.split.resize(size_t(n));
  if (has_coords) ds.coords.resize(size_t(n));
  std::vector<uint8_t> packed(packed_len), mask(mask_len), lab(lab_len);
  for (int64_t i = 0; i < n; ++i) {
    r.bytes(packed.data(), packed_len);
    r.bytes(mask.data(), mask_len);
    r.bytes(lab.data(), lab_len);
    uint8_t* row = ds.seq.data() + i * L;
    for (int j = 0; j < L; ++j) {
      if (mask[size_t(j) / 8] & (1u << (j % 8)))
        row[j] = kCodeN;
      else
        row[j] = (packed[size_t(j) / 4] >> (2 * (j % 4))) & 3;
    }
    for (int t = 0; t < T; ++t)
      ds.labels[size_t(i) * size_t(T) + size_t(t)] = (lab[size_t(t) / 8] >> (t % 8)) & 1;
    uint8_t sv = r.u8();
    if (sv > 2) fail(Errc::parse, path + ": bad split value at example " + std::to_string(i));
    ds.split[size_t(i)] = Split(sv);
    if (has_coords) {
      ds.coords[size_t(i)].chrom = r.i32();
      ds.coords[size_t(i)].start = r.i64();
    }
  }
  ds.validate();
  return ds;
}

// ---- sequence encoding ----------------------------------------------------

std::vector<uint8_t> encode_sequence(std::string_view s, const std::string& where) {
  std::vector<uint8_t> out(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    switch (s[i]) {
      case 'A': case 'a': out[i] = 0; break;
      case 'C': case 'c': out[i] = 1; break;
      case 'G': case 'g': out[i] = 2; break;
      case 'T': case 't': out[i] = 3; break;
      case 'N': case 'n': out[i] = kCodeN; break;
      default:
        fail(Errc::parse, where + ": unexpected character '" + std::string(1, s[i]) +
                              "' at position " + std::to_string(i));
    }
  }
  return out;
}

void codes_to_onehot(std::span<const uint8_t> codes, float* out) {
  size_t L = codes.size();
  std::memset(out, 0, 4 * L * sizeof(float));
  for (size_t j = 0; j < L; ++j) {
    uint8_t c = codes[j];
    if (c == kCodeN) {
      out[0 * L + j] = 0.25f;
      out[1 * L + j] = 0.25f;
      out[2 * L + j] = 0.25f;
      out[3 * L + j] = 0.25f;
    } else {
      out[size_t(c) * L + j] = 1.0f;
    }
  }
}

// ---- FASTA / BED / manifest ----------------------------------------------

GenomeStore GenomeStore::load_fasta(const std::string& path) {
  std::string text = read_text_file(path);
  GenomeStore g;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '>') {
      size_t sp = line.find_first_of(" \t");
      std::string name = line.substr(1, sp == std::string::npos ? std::string::npos : sp - 1);
      if (name.empty()) fail(Errc::parse, path + ":" + std::to_string(lineno) + ": empty sequence name");
      if (g.index_of(name) >= 0)
        fail(Errc::parse, path + ":" + std::to_string(lineno) + ": duplicate sequence " + name);
      g.names.push_back(name);
      g.seqs.emplace_back();
    } else {
      if (g.names.empty())
        fail(Errc::parse, path + ":" + std::to_string(lineno) + ": sequence data before any header");
      g.seqs.back() += line;
    }
  }
  if (g.names.empty()) fail(Errc::parse, path + ": no sequences found");
  return g;
}

int GenomeStore::index_of(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return int(i);
  return -1;
}

PeakSet PeakSet::load_bed(const std::string& path) {
  std::string text = read_text_file(path);
  PeakSet ps;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("track", 0) == 0 || line.rfind("browser", 0) == 0) continue;
    std::istringstream ls(line);
    std::string chrom, s_str, e_str;
    if (!(ls >> chrom >> s_str >> e_str))
      fail(Errc::parse, path + ":" + std::to_string(lineno) + ": expected at least 3 columns");
    int64_t s, e;
    try {
      size_t p1, p2;
      s = std::stoll(s_str, &p1);
      e = std::stoll(e_str, &p2);
      if (p1 != s_str.size() || p2 != e_str.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      fail(Errc::parse, path + ":" + std::to_string(lineno) + ": non-numeric interval bounds");
    }
    if (s < 0 || e <= s)
      fail(Errc::parse, path + ":" + std::to_string(lineno) + ": bad interval [" +
                            std::to_string(s) + "," + std::to_string(e) + ")");
    ps.intervals.push_back({chrom, s, e});
  }
  return ps;
}

std::vector<IngestManifestRow> load_ingest_manifest(const std::string& path) {
  std::string text = read_text_file(path);
  std::vector<IngestManifestRow> rows;
  std::set<std::string> seen;
  std::filesystem::path base = std::filesystem::path(path).parent_path();
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    size_t start = 0;
    for (;;) {
      size_t tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() < 2)
      fail(Errc::parse, path + ":" + std::to_string(lineno) +
                            ": expected task_id<TAB>peaks_path[<TAB>metadata]");
    IngestManifestRow row;
    row.task_id = cols[0];
    if (row.task_id.empty())
      fail(Errc::parse, path + ":" + std::to_string(lineno) + ": empty task id");
    if (!seen.insert(row.task_id).second)
      fail(Errc::parse, path + ":" + std::to_string(lineno) + ": duplicate task id " + row.task_id);
    std::filesystem::path p(cols[1]);
    row.peaks_path = p.is_absolute() ? p.string() : (base / p).string();
    if (cols.size() >= 3 && !cols[2].empty()) {
      std::istringstream ms(cols[2]);
      std::string pair;
      while (std::getline(ms, pair, ';')) {
        if (pair.empty()) continue;
        size_t eq = pair.find('=');
        if (eq == std::string::npos)
          fail(Errc::parse, path + ":" + std::to_string(lineno) +
                                ": metadata entry '" + pair + "' is not key=value");
        row.metadata[pair.substr(0, eq)] = pair.substr(eq + 1);
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(Errc::parse, path + ": no tasks in manifest");
  return rows;
}

// ---- tiling ---------------------------------------------------------------

TaskDataset tile_and_label(const GenomeStore& genome, const std::vector<PeakSet>& peaks,
                           const std::vector<TaskInfo>& tasks, const TileConfig& cfg) {
  if (tasks.empty()) fail(Errc::invalid_argument, "tile_and_label: no tasks");
  if (peaks.size() != tasks.size())
    fail(Errc::invalid_argument, "tile_and_label: " + std::to_string(peaks.size()) +
                                     " peak sets for " + std::to_string(tasks.size()) + " tasks");
  if (cfg.bin < 1) fail(Errc::invalid_argument, "bin size must be >= 1");
  if (cfg.window < cfg.bin || cfg.window % 2 == 0)
    fail(Errc::invalid_argument, "window must be odd and >= bin, got window " +
                                     std::to_string(cfg.window) + " bin " + std::to_string(cfg.bin));
  if (cfg.min_overlap < 1 || cfg.min_overlap > cfg.bin)
    fail(Errc::invalid_argument, "min_overlap must be in [1, bin], got " +
                                     std::to_string(cfg.min_overlap));

  int T = int(tasks.size());
  int nchrom = int(genome.names.size());
  // merged interval lists per task per chromosome
  struct Iv { int64_t s, e; };
  std::vector<std::vector<std::vector<Iv>>> merged(
      size_t(T), std::vector<std::vector<Iv>>(static_cast<size_t>(nchrom)));
  for (int t = 0; t < T; ++t) {
    std::vector<std::vector<Iv>> by_chrom(static_cast<size_t>(nchrom));
    for (const PeakSet::Interval& iv : peaks[size_t(t)].intervals) {
      int ci = genome.index_of(iv.chrom);
      if (ci < 0)
        fail(Errc::invalid_argument, "task " + tasks[size_t(t)].id + ": peak chromosome " +
                                         iv.chrom + " is not in the genome");
      int64_t clen = int64_t(genome.seqs[size_t(ci)].size());
      if (iv.end > clen)
        fail(Errc::invalid_argument, "task " + tasks[size_t(t)].id + ": interval [" +
                                         std::to_string(iv.start) + "," + std::to_string(iv.end) +
                                         ") exceeds " + iv.chrom + " length " + std::to_string(clen));
      by_chrom[size_t(ci)].push_back({iv.start, iv.end});
    }
    for (int c = 0; c < nchrom; ++c) {
      auto& v = by_chrom[size_t(c)];
      std::sort(v.begin(), v.end(), [](const Iv& a, const Iv& b) {
        return a.s != b.s ? a.s < b.s : a.e < b.e;
      });
      std::vector<Iv>& out = merged[size_t(t)][size_t(c)];
      for (const Iv& iv : v) {
        if (!out.empty() && iv.s <= out.back().e)
          out.back().e = std::max(out.back().e, iv.e);
        else
          out.push_back(iv);
      }
    }
  }

  TaskDataset ds;
  ds.window_length = cfg.window;
  ds.tasks = tasks;
  ds.chrom_names = genome.names;
  int half = (cfg.window - 1) / 2;
  std::vector<uint8_t> row_labels(size_t(T), 0);
  std::vector<size_t> cursor(size_t(T), 0);
  for (int c = 0; c < nchrom; ++c) {
    const std::string& chrom_seq = genome.seqs[size_t(c)];
    int64_t clen = int64_t(chrom_seq.size());
    std::fill(cursor.begin(), cursor.end(), 0);
    for (int64_t bs = 0; bs + cfg.bin <= clen; bs += cfg.bin) {
      int64_t be = bs + cfg.bin;
      int64_t center = bs + cfg.bin / 2;
      int64_t ws = center - half, we = center + half + 1;
      bool any = false;
      for (int t = 0; t < T; ++t) {
        const std::vector<Iv>& ivs = merged[size_t(t)][size_t(c)];
        size_t& cur = cursor[size_t(t)];
        while (cur < ivs.size() && ivs[cur].e <= bs) ++cur;
        int64_t overlap = 0;
        for (size_t j = cur; j < ivs.size() && ivs[j].s < be; ++j)
          overlap += std::min(ivs[j].e, be) - std::max(ivs[j].s, bs);
        uint8_t lab = overlap >= cfg.min_overlap ? 1 : 0;
        row_labels[size_t(t)] = lab;
        any = any || lab;
      }
      if (!any) continue;
      if (ws < 0 || we > clen) continue;  // window would cross the chromosome end
      std::vector<uint8_t> codes = encode_sequence(
          std::string_view(chrom_seq.data() + ws, size_t(cfg.window)),
          genome.names[size_t(c)] + ":" + std::to_string(ws));
      ds.seq.insert(ds.seq.end(), codes.begin(), codes.end());
      ds.labels.insert(ds.labels.end(), row_labels.begin(), row_labels.end());
      ds.split.push_back(Split::train);
      ds.coords.push_back({int32_t(c), bs});
    }
  }
  if (ds.split.empty())
    fail(Errc::invalid_argument, "tiling produced no labeled bins (no peak overlaps any bin)");
  ds.validate();
  return ds;
}

void split_by_region(TaskDataset& ds, const RegionSplit& rs) {
  if (!ds.has_coords())
    fail(Errc::state, "region split needs genomic coordinates; this dataset has none");
  auto chrom_index = [&](const std::string& name) -> int {
    for (size_t i = 0; i < ds.chrom_names.size(); ++i)
      if (ds.chrom_names[i] == name) return int(i);
    fail(Errc::invalid_argument, "split references chromosome " + name +
                                     " which is not in the dataset");
  };
  std::set<int> test_idx;
  for (const std::string& c : rs.test_chroms) test_idx.insert(chrom_index(c));
  int val_idx = -1;
  if (!rs.validation_chrom.empty()) {
    val_idx = chrom_index(rs.validation_chrom);
    if (test_idx.count(val_idx))
      fail(Errc::invalid_argument, "validation chromosome " + rs.validation_chrom +
                                       " is also a test chromosome");
    if (rs.validation_begin >= rs.validation_end)
      fail(Errc::invalid_argument, "empty validation range [" +
                                       std::to_string(rs.validation_begin) + "," +
                                       std::to_string(rs.validation_end) + ")");
  }
  for (int64_t i = 0; i < ds.num_examples(); ++i) {
    const BinCoord& bc = ds.coords[size_t(i)];
    if (test_idx.count(int(bc.chrom)))
      ds.split[size_t(i)] = Split::test;
    else if (bc.chrom == val_idx && bc.start >= rs.validation_begin && bc.start < rs.validation_end)
      ds.split[size_t(i)] = Split::validation;
    else
      ds.split[size_t(i)] = Split::train;
  }
}

TaskDataset ingest_dataset(const std::string& fasta_path, const std::string& manifest_path,
                           const TileConfig& tile, const RegionSplit& split) {
  GenomeStore genome = GenomeStore::load_fasta(fasta_path);
  std::vector<IngestManifestRow> rows = load_ingest_manifest(manifest_path);
  std::vector<PeakSet> peaks;
  std::vector<TaskInfo> tasks;
  for (const IngestManifestRow& r : rows) {
    peaks.push_back(PeakSet::load_bed(r.peaks_path));
    tasks.push_back({r.task_id, r.metadata});
  }
  TaskDataset ds = tile_and_label(genome, peaks, tasks, tile);
  split_by_region(ds, split);
  return ds;
}

// ---- synthetic generator --------------------------------------------------

void SynthConfig::validate() const {
  if (groups < 1) fail(Errc::invalid_argument, "groups must be >= 1");
  if (tasks_per_group < 1) fail(Errc::invalid_argument, "tasks_per_group must be >= 1");
  if (motif_length < 2) fail(Errc::invalid_argument, "motif_length must be >= 2");
  if (own_motifs_per_group < 0 || shared_motifs < 0)
    fail(Errc::invalid_argument, "motif counts must be >= 0");
  if (own_motifs_per_group == 0 && shared_motifs == 0)
    fail(Errc::invalid_argument, "need at least one motif family");
  int bank = groups * own_motifs_per_group + shared_motifs;
  if (int64_t(bank) * motif_length > seq_length)
    fail(Errc::invalid_argument,
         "cannot pack " + std::to_string(bank) + " motifs of length " +
             std::to_string(motif_length) + " into sequences of length " +
             std::to_string(seq_length));
  if (groups + shared_motifs > 20)
    fail(Errc::invalid_argument, "groups + shared_motifs too large for exact rate calibration");
  if (num_examples < 1) fail(Errc::invalid_argument, "num_examples must be >= 1");
  if (!(conflict_strength >= 0.0 && conflict_strength <= 1.0))
    fail(Errc::invalid_argument, "conflict_strength must be in [0,1]");
  if (!(positive_rate > 0.0 && positive_rate < 1.0))
    fail(Errc::invalid_argument, "positive_rate must be in (0,1)");
  if (!(rate_spread >= 0.0 && rate_spread < 0.5))
    fail(Errc::invalid_argument, "rate_spread must be in [0,0.5)");
  if (!(label_noise >= 0.0 && label_noise < 0.5))
    fail(Errc::invalid_argument, "label_noise must be in [0,0.5)");
  if (!(implant_prob > 0.0 && implant_prob < 1.0))
    fail(Errc::invalid_argument, "implant_prob must be in (0,1)");
  if (!(validation_fraction >= 0.0 && test_fraction >= 0.0 &&
        validation_fraction + test_fraction < 1.0))
    fail(Errc::invalid_argument, "validation_fraction + test_fraction must be < 1");
  if (num_modalities < 1) fail(Errc::invalid_argument, "num_modalities must be >= 1");
}

std::string SynthConfig::to_json() const {
  json j;
  j["groups"] = groups;
  j["tasks_per_group"] = tasks_per_group;
  j["seq_length"] = seq_length;
  j["num_examples"] = num_examples;
  j["motif_length"] = motif_length;
  j["own_motifs_per_group"] = own_motifs_per_group;
  j["shared_motifs"] = shared_motifs;
  j["conflict_strength"] = conflict_strength;
  j["positive_rate"] = positive_rate;
  j["rate_spread"] = rate_spread;
  j["label_noise"] = label_noise;
  j["implant_prob"] = implant_prob;
  j["validation_fraction"] = validation_fraction;
  j["test_fraction"] = test_fraction;
  j["num_modalities"] = num_modalities;
  j["seed"] = seed;
  return j.dump(2);
}

SynthConfig SynthConfig::from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(Errc::parse, std::string("synth config: ") + e.what());
  }
  SynthConfig c;
  try {
    if (j.contains("groups")) c.groups = j["groups"].get<int>();
    if (j.contains("tasks_per_group")) c.tasks_per_group = j["tasks_per_group"].get<int>();
    if (j.contains("seq_length")) c.seq_length = j["seq_length"].get<int>();
    if (j.contains("num_examples")) c.num_examples = j["num_examples"].get<int64_t>();
    if (j.contains("motif_length")) c.motif_length = j["motif_length"].get<int>();
    if (j.contains("own_motifs_per_group"))
      c.own_motifs_per_group = j["own_motifs_per_group"].get<int>();
    if (j.contains("shared_motifs")) c.shared_motifs = j["shared_motifs"].get<int>();
    if (j.contains("conflict_strength")) c.conflict_strength = j["conflict_strength"].get<double>();
    if (j.contains("positive_rate")) c.positive_rate = j["positive_rate"].get<double>();
    if (j.contains("rate_spread")) c.rate_spread = j["rate_spread"].get<double>();
    if (j.contains("label_noise")) c.label_noise = j["label_noise"].get<double>();
    if (j.contains("implant_prob")) c.implant_prob = j["implant_prob"].get<double>();
    if (j.contains("validation_fraction"))
      c.validation_fraction = j["validation_fraction"].get<double>();
    if (j.contains("test_fraction")) c.test_fraction = j["test_fraction"].get<double>();
    if (j.contains("num_modalities")) c.num_modalities = j["num_modalities"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
  } catch (const json::exception& e) {
    fail(Errc::parse, std::string("synth config: ") + e.what());
  }
  c.validate();
  return c;
}

double SynthTruth::prob_positive(int task, std::span<const uint8_t> own_any,
                                 std::span<const uint8_t> shared_present) const {
  const TaskRule& r = rules[size_t(task)];
  double raw = r.base;
  if (!own_any.empty() && own_any[size_t(r.group)]) raw += r.own_amp;
  for (size_t s = 0; s < shared_present.size(); ++s)
    if (shared_present[s]) raw += shared_amp[s] * double(polarity[size_t(r.group)][s]);
  double sig = std::clamp(raw, clamp_lo, clamp_hi);
  return r.noise + (1.0 - 2.0 * r.noise) * sig;
}

namespace {

std::string random_motif(Rng& rng, int len) {
  static const char bases[4] = {'A', 'C', 'G', 'T'};
  std::string m(size_t(len), 'A');
  for (int i = 0; i < len; ++i) m[size_t(i)] = bases[rng.index(4)];
  return m;
}

int hamming(const std::string& a, const std::string& b) {
  int d = 0;
  for (size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

// P(label=1) marginal for one task under the implant distribution, given the
// shared-motif effect already folded into SynthTruth.
double marginal_rate(const SynthTruth& truth, int task, double p_own_any, int n_shared,
                     double implant_prob) {
  double rate = 0;
  std::vector<uint8_t> own(truth.own_motifs.size(), 0);
  std::vector<uint8_t> shared(size_t(n_shared), 0);
  int g = truth.rules[size_t(task)].group;
  for (int ob = 0; ob < 2; ++ob) {
    double p_own = ob ? p_own_any : 1.0 - p_own_any;
    if (p_own == 0.0) continue;
    own.assign(truth.own_motifs.size(), 0);
    if (ob) own[size_t(g)] = 1;
    for (uint32_t m = 0; m < (1u << n_shared); ++m) {
      double p = p_own;
      for (int s = 0; s < n_shared; ++s) {
        bool bit = (m >> s) & 1;
        shared[size_t(s)] = bit ? 1 : 0;
        p *= bit ? implant_prob : 1.0 - implant_prob;
      }
      rate += p * truth.prob_positive(task, own, shared);
    }
  }
  return rate;
}

// P(every task draws 0) under the implant distribution.
double reject_rate(const SynthTruth& truth, int groups, int n_shared, double p_own_any,
                   double implant_prob) {
  double reject = 0;
  std::vector<uint8_t> own(size_t(groups), 0), shared(size_t(n_shared), 0);
  int bits = groups + n_shared;
  for (uint32_t m = 0; m < (1u << bits); ++m) {
    double p = 1.0;
    for (int g = 0; g < groups; ++g) {
      bool bit = (m >> g) & 1;
      own[size_t(g)] = bit ? 1 : 0;
      p *= bit ? p_own_any : 1.0 - p_own_any;
    }
    for (int s = 0; s < n_shared; ++s) {
      bool bit = (m >> (groups + s)) & 1;
      shared[size_t(s)] = bit ? 1 : 0;
      p *= bit ? implant_prob : 1.0 - implant_prob;
    }
    if (p == 0.0) continue;
    double allneg = 1.0;
    for (size_t t = 0; t < truth.rules.size() && allneg > 0; ++t)
      allneg *= 1.0 - truth.prob_positive(int(t), own, shared);
    reject += p * allneg;
  }
  return reject;
}

}  // namespace

TaskDataset synth_generate(const SynthConfig& cfg, SynthTruth* truth_out) {
  cfg.validate();
  Rng rng(splitmix64(cfg.seed ^ 0x73796e7468676eULL));
  int G = cfg.groups, S = cfg.shared_motifs, M = cfg.motif_length;
  int T = G * cfg.tasks_per_group;
  int L = cfg.seq_length;

  // motif bank: all motifs pairwise distinct by a minimum Hamming distance
  int min_dist = std::max(2, M / 4);
  std::vector<std::string> bank;
  int bank_size = G * cfg.own_motifs_per_group + S;
  int tries = 0;
  while (int(bank.size()) < bank_size) {
    std::string m = random_motif(rng, M);
    bool ok = true;
    for (const std::string& b : bank)
      if (hamming(m, b) < min_dist) { ok = false; break; }
    if (ok) bank.push_back(std::move(m));
    if (++tries > 10000 * bank_size)
      fail(Errc::numeric, "cannot draw a motif bank with the required spacing");
  }

  SynthTruth truth;
  truth.implant_prob = cfg.implant_prob;
  truth.clamp_lo = 0.02;
  truth.clamp_hi = 0.98;
  int at = 0;
  for (int g = 0; g < G; ++g) {
    std::vector<std::string> own;
    for (int k = 0; k < cfg.own_motifs_per_group; ++k) own.push_back(bank[size_t(at++)]);
    truth.own_motifs.push_back(std::move(own));
  }
  for (int s = 0; s < S; ++s) truth.shared_motifs.push_back(bank[size_t(at++)]);
  for (int s = 0; s < S; ++s) truth.shared_amp.push_back(0.40 / (1.0 + 0.6 * s));
  for (int g = 0; g < G; ++g) {
    std::vector<int> pol(size_t(S), 0);
    for (int s = 0; s < S; ++s) pol[size_t(s)] = ((g >> s) & 1) ? -1 : +1;
    truth.polarity.push_back(std::move(pol));
  }
  for (int t = 0; t < T; ++t) {
    SynthTruth::TaskRule r;
    r.group = t / cfg.tasks_per_group;
    r.own_amp = cfg.own_motifs_per_group > 0 ? 0.55 + 0.10 * rng.uniform() : 0.0;
    r.noise = cfg.label_noise;
    r.target_rate =
        cfg.positive_rate + cfg.rate_spread * ((double(r.group) + 0.5) / double(G) - 0.5);
    // shared-motif effects scale with conflict_strength
    r.base = 0;
    truth.rules.push_back(r);
  }
  for (double& a : truth.shared_amp) a *= cfg.conflict_strength;

  double p_own_any =
      cfg.own_motifs_per_group > 0 ? 1.0 - std::pow(1.0 - cfg.implant_prob, cfg.own_motifs_per_group)
                                   : 0.0;

  // Calibrate per-task bases so that the positive rate AFTER dropping
  // all-negative examples matches each task's target. The rejection rate
  // depends on the bases, so alternate solving and re-estimating.
  double reject = 0.0;
  for (int iter = 0; iter < 60; ++iter) {
    for (int t = 0; t < T; ++t) {
      double want = truth.rules[size_t(t)].target_rate * (1.0 - reject);
      double lo = -3.0, hi = 3.0;
      for (int b = 0; b < 80; ++b) {
        double mid = 0.5 * (lo + hi);
        truth.rules[size_t(t)].base = mid;
        if (marginal_rate(truth, t, p_own_any, S, cfg.implant_prob) < want)
          lo = mid;
        else
          hi = mid;
      }
      truth.rules[size_t(t)].base = 0.5 * (lo + hi);
    }
    double r2 = reject_rate(truth, G, S, p_own_any, cfg.implant_prob);
    if (std::abs(r2 - reject) < 1e-12) { reject = r2; break; }
    reject = r2;
  }
  for (int t = 0; t < T; ++t) {
    double cond = marginal_rate(truth, t, p_own_any, S, cfg.implant_prob) / (1.0 - reject);
    if (std::abs(cond - truth.rules[size_t(t)].target_rate) > 1e-3)
      fail(Errc::numeric, "cannot calibrate task " + std::to_string(t) + " to positive rate " +
                              std::to_string(truth.rules[size_t(t)].target_rate) +
                              " (reached " + std::to_string(cond) +
                              "); rates this extreme are not reachable with these effects");
  }

  TaskDataset ds;
  ds.window_length = L;
  for (int t = 0; t < T; ++t) {
    TaskInfo ti;
    int g = truth.rules[size_t(t)].group;
    ti.id = "g" + std::to_string(g) + "_t" + std::to_string(t);
    ti.metadata["planted_group"] = std::to_string(g);
    ti.metadata["modality"] = "mod" + std::to_string(t % cfg.num_modalities);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", truth.rules[size_t(t)].target_rate);
    ti.metadata["positive_rate"] = buf;
    ds.tasks.push_back(std::move(ti));
  }

  // motifs pre-encoded to codes; chosen holds (group-or-shared, encoded) pairs
  std::vector<std::vector<std::vector<uint8_t>>> own_codes(static_cast<size_t>(G));
  for (int g = 0; g < G; ++g)
    for (const std::string& m : truth.own_motifs[size_t(g)])
      own_codes[size_t(g)].push_back(encode_sequence(m));
  std::vector<std::vector<uint8_t>> shared_codes;
  for (const std::string& m : truth.shared_motifs) shared_codes.push_back(encode_sequence(m));

  ds.seq.reserve(size_t(cfg.num_examples) * size_t(L));
  ds.labels.reserve(size_t(cfg.num_examples) * size_t(T));
  std::vector<uint8_t> codes(size_t(L), 0);
  std::vector<uint8_t> labs(size_t(T), 0);
  std::vector<uint8_t> own_any(size_t(G), 0), shared_present(size_t(S), 0);
  std::vector<char> occupied(size_t(L), 0);
  std::vector<int> slots;
  std::vector<const std::vector<uint8_t>*> chosen;
  int64_t attempts = 0, max_attempts = 200 * cfg.num_examples + 10000;

  for (int64_t i = 0; i < cfg.num_examples;) {
    if (++attempts > max_attempts)
      fail(Errc::numeric,
           "synthetic labels reject nearly every example; positive rates are too low");
    // background
    for (int j = 0; j < L; ++j) codes[size_t(j)] = uint8_t(rng.index(4));
    // implant decisions
    std::fill(own_any.begin(), own_any.end(), uint8_t(0));
    std::fill(shared_present.begin(), shared_present.end(), uint8_t(0));
    chosen.clear();
    for (int g = 0; g < G; ++g)
      for (const std::vector<uint8_t>& m : own_codes[size_t(g)])
        if (rng.bernoulli(cfg.implant_prob)) {
          chosen.push_back(&m);
          own_any[size_t(g)] = 1;
        }
    for (int s = 0; s < S; ++s)
      if (rng.bernoulli(cfg.implant_prob)) {
        chosen.push_back(&shared_codes[size_t(s)]);
        shared_present[size_t(s)] = 1;
      }
    // placement without overlap, uniform over the free slots left for each
    bool placed = false;
    for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
      std::fill(occupied.begin(), occupied.end(), 0);
      placed = true;
      for (const std::vector<uint8_t>* m : chosen) {
        slots.clear();
        int run = 0;
        for (int p = 0; p < L; ++p) {
          run = occupied[size_t(p)] ? 0 : run + 1;
          if (run >= M) slots.push_back(p - M + 1);
        }
        if (slots.empty()) { placed = false; break; }
        int pos = slots[size_t(rng.index(int(slots.size())))];
        for (int k = 0; k < M; ++k) {
          occupied[size_t(pos + k)] = 1;
          codes[size_t(pos + k)] = (*m)[size_t(k)];
        }
      }
    }
    if (!placed)
      fail(Errc::numeric, "motif placement failed repeatedly; sequences too crowded");
    // labels
    bool any = false;
    for (int t = 0; t < T; ++t) {
      double p = truth.prob_positive(t, own_any, shared_present);
      labs[size_t(t)] = rng.bernoulli(p) ? 1 : 0;
      any = any || labs[size_t(t)];
    }
    if (!any) continue;  // redraw: mirrors dropping unlabeled genome bins
    ds.seq.insert(ds.seq.end(), codes.begin(), codes.end());
    ds.labels.insert(ds.labels.end(), labs.begin(), labs.end());
    double u = rng.uniform();
    Split sp = u < cfg.test_fraction
                   ? Split::test
                   : (u < cfg.test_fraction + cfg.validation_fraction ? Split::validation
                                                                      : Split::train);
    ds.split.push_back(sp);
    ++i;
  }
  ds.validate();
  if (truth_out) *truth_out = truth;
  return ds;
}

}  // namespace mtg

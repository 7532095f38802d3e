#include "model.hpp"

#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "io.hpp"
#include "rng.hpp"

namespace mtg {

using nlohmann::json;

std::vector<int> ModelSpec::length_chain() const {
  std::vector<int> chain{input_length};
  auto collapse = [&chain](size_t i) {
    std::string msg = "model spec collapses the sequence at block " + std::to_string(i) +
                      ": length chain so far";
    for (int v : chain) msg += " " + std::to_string(v);
    fail(Errc::invalid_argument, msg);
  };
  int len = input_length;
  for (size_t i = 0; i < blocks.size(); ++i) {
    const ConvBlockSpec& b = blocks[i];
    len = len - b.width + 1;
    chain.push_back(len);
    if (len <= 0) collapse(i);
    len = len >= b.pool ? (len - b.pool) / b.pool + 1 : 0;
    chain.push_back(len);
    if (len <= 0) collapse(i);
  }
  return chain;
}

int ModelSpec::feature_count() const {
  std::vector<int> chain = length_chain();
  return chain.back() * blocks.back().filters;
}

void ModelSpec::validate() const {
  if (input_length < 1) fail(Errc::invalid_argument, "input_length must be >= 1");
  if (in_channels < 1) fail(Errc::invalid_argument, "in_channels must be >= 1");
  if (blocks.empty()) fail(Errc::invalid_argument, "model needs at least one conv block");
  for (const ConvBlockSpec& b : blocks) {
    if (b.filters < 1 || b.width < 1 || b.pool < 1)
      fail(Errc::invalid_argument, "conv block fields must be >= 1 (filters " +
                                       std::to_string(b.filters) + ", width " +
                                       std::to_string(b.width) + ", pool " + std::to_string(b.pool) +
                                       ")");
  }
  if (head_hidden < 1) fail(Errc::invalid_argument, "head_hidden must be >= 1");
  if (num_tasks < 1) fail(Errc::invalid_argument, "num_tasks must be >= 1");
  length_chain();
}

std::string ModelSpec::to_json() const {
  json j;
  j["input_length"] = input_length;
  j["in_channels"] = in_channels;
  j["blocks"] = json::array();
  for (const ConvBlockSpec& b : blocks)
    j["blocks"].push_back({{"filters", b.filters}, {"width", b.width}, {"pool", b.pool}});
  j["head_hidden"] = head_hidden;
  j["num_tasks"] = num_tasks;
  return j.dump(2);
}

ModelSpec ModelSpec::from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(Errc::parse, std::string("model spec: ") + e.what());
  }
  ModelSpec s;
  try {
    if (j.contains("input_length")) s.input_length = j["input_length"].get<int>();
    if (j.contains("in_channels")) s.in_channels = j["in_channels"].get<int>();
    if (j.contains("blocks")) {
      s.blocks.clear();
      for (const auto& e : j["blocks"]) {
        ConvBlockSpec b;
        if (e.contains("filters")) b.filters = e["filters"].get<int>();
        if (e.contains("width")) b.width = e["width"].get<int>();
        if (e.contains("pool")) b.pool = e["pool"].get<int>();
        s.blocks.push_back(b);
      }
    }
    if (j.contains("head_hidden")) s.head_hidden = j["head_hidden"].get<int>();
    if (j.contains("num_tasks")) s.num_tasks = j["num_tasks"].get<int>();
  } catch (const json::exception& e) {
    fail(Errc::parse, std::string("model spec: ") + e.what());
  }
  s.validate();
  return s;
}

namespace {

Tensor uniform_tensor(std::vector<int> shape, float bound, Rng& rng, const std::string& name) {
  Tensor t(std::move(shape));
  float* p = t.data();
  for (int64_t i = 0; i < t.size(); ++i) p[i] = rng.uniformf(-bound, bound);
  t.require_grad();
  t.set_name(name);
  return t;
}

Tensor zero_tensor(std::vector<int> shape, const std::string& name) {
  Tensor t(std::move(shape));
  t.require_grad();
  t.set_name(name);
  return t;
}

}  // namespace

Model Model::build(const ModelSpec& spec, uint64_t seed) {
  spec.validate();
  Model m;
  m.spec_ = spec;
  Rng rng(seed);
  int cin = spec.in_channels;
  for (size_t i = 0; i < spec.blocks.size(); ++i) {
    const ConvBlockSpec& b = spec.blocks[i];
    float bound = std::sqrt(6.0f / float(cin * b.width));
    std::string tag = "conv" + std::to_string(i);
    m.conv_w_.push_back(uniform_tensor({b.filters, cin, b.width}, bound, rng, tag + ".w"));
    m.conv_b_.push_back(zero_tensor({b.filters}, tag + ".b"));
    cin = b.filters;
  }
  int feats = spec.feature_count();
  for (int h = 0; h < spec.num_tasks; ++h) {
    // each head draws its own slice of the stream: no two heads start equal
    std::string tag = "head" + std::to_string(h);
    HeadParams hp;
    hp.fc1_w = uniform_tensor({spec.head_hidden, feats}, std::sqrt(6.0f / float(feats)), rng,
                              tag + ".fc1_w");
    hp.fc1_b = zero_tensor({spec.head_hidden}, tag + ".fc1_b");
    hp.fc2_w = uniform_tensor({1, spec.head_hidden}, std::sqrt(6.0f / float(spec.head_hidden)), rng,
                              tag + ".fc2_w");
    hp.fc2_b = zero_tensor({1}, tag + ".fc2_b");
    m.heads_.push_back(std::move(hp));
  }
  m.task_ids.resize(size_t(spec.num_tasks));
  m.source_tasks.resize(size_t(spec.num_tasks));
  for (int h = 0; h < spec.num_tasks; ++h) {
    m.task_ids[size_t(h)] = "task" + std::to_string(h);
    m.source_tasks[size_t(h)] = h;
  }
  return m;
}

Tensor Model::features_inference(const Tensor& x) const {
  if (x.ndim() != 3 || x.dim(1) != spec_.in_channels || x.dim(2) != spec_.input_length)
    fail(Errc::shape_mismatch, "model input must be [B," + std::to_string(spec_.in_channels) + "," +
                                   std::to_string(spec_.input_length) + "], got " +
                                   shape_str(x.shape()));
  int B = x.dim(0);
  Tensor cur = x;
  int cin = spec_.in_channels;
  int len = spec_.input_length;
  for (size_t i = 0; i < spec_.blocks.size(); ++i) {
    const ConvBlockSpec& b = spec_.blocks[i];
    int conv_len = len - b.width + 1;
    Tensor conv({B, b.filters, conv_len});
    conv1d_forward(cur.data(), conv_w_[i].data(), conv_b_[i].data(), conv.data(), B, cin, len,
                   b.filters, b.width);
    relu_forward(conv.data(), conv.data(), conv.size());
    int pool_len = (conv_len - b.pool) / b.pool + 1;
    Tensor pooled({B, b.filters, pool_len});
    std::vector<int32_t> argmax(size_t(int64_t(B) * b.filters * pool_len));
    maxpool1d_forward(conv.data(), pooled.data(), argmax.data(), B, b.filters, conv_len, b.pool,
                      b.pool);
    cur = pooled;
    cin = b.filters;
    len = pool_len;
  }
  return cur;  // [B, filters, len]; flattens row-contiguously
}

Tensor Model::forward_all_heads(const Tensor& x) const {
  std::vector<int> all(heads_.size());
  std::iota(all.begin(), all.end(), 0);
  return forward_heads(x, all);
}

Tensor Model::forward_heads(const Tensor& x, std::span<const int> heads) const {
  if (heads.empty()) fail(Errc::invalid_argument, "forward_heads: empty head selection");
  Tensor feats = features_inference(x);
  int B = x.dim(0);
  int F = spec_.feature_count();
  Tensor out({B, int(heads.size())});
  Tensor hidden({B, spec_.head_hidden});
  Tensor logit({B, 1});
  for (size_t hi = 0; hi < heads.size(); ++hi) {
    int h = heads[hi];
    if (h < 0 || h >= num_heads())
      fail(Errc::invalid_argument, "head index " + std::to_string(h) + " out of range [0," +
                                       std::to_string(num_heads()) + ")");
    const HeadParams& hp = heads_[size_t(h)];
    fc_forward(feats.data(), hp.fc1_w.data(), hp.fc1_b.data(), hidden.data(), B, F,
               spec_.head_hidden);
    relu_forward(hidden.data(), hidden.data(), hidden.size());
    fc_forward(hidden.data(), hp.fc2_w.data(), hp.fc2_b.data(), logit.data(), B, spec_.head_hidden,
               1);
    sigmoid_forward(logit.data(), logit.data(), logit.size());
    for (int n = 0; n < B; ++n) out.data()[int64_t(n) * int64_t(heads.size()) + int64_t(hi)] = logit.data()[n];
  }
  return out;
}

std::vector<Tensor> Model::forward_tape(Tape& tape, const Tensor& x,
                                        std::span<const int> heads) const {
  if (heads.empty()) fail(Errc::invalid_argument, "forward_tape: empty head selection");
  Tensor cur = x;
  for (size_t i = 0; i < spec_.blocks.size(); ++i) {
    cur = tape.conv1d(cur, conv_w_[i], conv_b_[i]);
    cur = tape.relu(cur);
    cur = tape.maxpool1d(cur, spec_.blocks[i].pool, spec_.blocks[i].pool);
  }
  Tensor feats = tape.flatten(cur);
  std::vector<Tensor> outs;
  outs.reserve(heads.size());
  for (int h : heads) {
    if (h < 0 || h >= num_heads())
      fail(Errc::invalid_argument, "head index " + std::to_string(h) + " out of range [0," +
                                       std::to_string(num_heads()) + ")");
    const HeadParams& hp = heads_[size_t(h)];
    Tensor z = tape.fully_connected(feats, hp.fc1_w, hp.fc1_b);
    z = tape.relu(z);
    z = tape.fully_connected(z, hp.fc2_w, hp.fc2_b);
    outs.push_back(tape.sigmoid(z));
  }
  return outs;
}

std::vector<float> Model::head_weight_vector(int head) const {
  if (head < 0 || head >= num_heads())
    fail(Errc::invalid_argument, "head index " + std::to_string(head) + " out of range [0," +
                                     std::to_string(num_heads()) + ")");
  const Tensor& w = heads_[size_t(head)].fc2_w;
  return std::vector<float>(w.data(), w.data() + w.size());
}

std::vector<Tensor*> Model::parameters() {
  std::vector<Tensor*> ps;
  for (size_t i = 0; i < conv_w_.size(); ++i) {
    ps.push_back(&conv_w_[i]);
    ps.push_back(&conv_b_[i]);
  }
  for (HeadParams& h : heads_) {
    ps.push_back(&h.fc1_w);
    ps.push_back(&h.fc1_b);
    ps.push_back(&h.fc2_w);
    ps.push_back(&h.fc2_b);
  }
  return ps;
}

std::vector<Tensor> Model::parameter_snapshot() const {
  std::vector<Tensor> snap;
  Model& self = const_cast<Model&>(*this);
  for (Tensor* p : self.parameters()) snap.push_back(p->clone());
  return snap;
}

void Model::load_parameter_snapshot(const std::vector<Tensor>& snap) {
  std::vector<Tensor*> ps = parameters();
  if (snap.size() != ps.size())
    fail(Errc::shape_mismatch, "snapshot has " + std::to_string(snap.size()) +
                                   " tensors, model has " + std::to_string(ps.size()));
  for (size_t i = 0; i < ps.size(); ++i) {
    if (snap[i].size() != ps[i]->size())
      fail(Errc::shape_mismatch, "snapshot tensor " + std::to_string(i) + " has " +
                                     std::to_string(snap[i].size()) + " values, expected " +
                                     std::to_string(ps[i]->size()));
    std::copy(snap[i].data(), snap[i].data() + snap[i].size(), ps[i]->data());
  }
}

Model Model::fork() const {
  Model m;
  m.spec_ = spec_;
  m.task_ids = task_ids;
  m.source_tasks = source_tasks;
  for (const Tensor& t : conv_w_) m.conv_w_.push_back(t.fork());
  for (const Tensor& t : conv_b_) m.conv_b_.push_back(t.fork());
  for (const HeadParams& h : heads_) {
    HeadParams f;
    f.fc1_w = h.fc1_w.fork();
    f.fc1_b = h.fc1_b.fork();
    f.fc2_w = h.fc2_w.fork();
    f.fc2_b = h.fc2_b.fork();
    m.heads_.push_back(std::move(f));
  }
  return m;
}

namespace {
constexpr char kModelMagic[4] = {'M', 'T', 'G', 'M'};
constexpr uint32_t kModelVersion = 1;

void write_tensor(BinWriter& w, const Tensor& t) {
  w.u32(uint32_t(t.ndim()));
  for (int i = 0; i < t.ndim(); ++i) w.i32(t.dim(i));
  w.bytes(t.data(), size_t(t.size()) * sizeof(float));
}

Tensor read_tensor(BinReader& r, const std::string& name) {
  uint32_t nd = r.u32();
  if (nd > 4) fail(Errc::parse, r.path() + ": tensor rank " + std::to_string(nd) + " out of range");
  std::vector<int> shape;
  for (uint32_t i = 0; i < nd; ++i) {
    int d = r.i32();
    if (d <= 0 || d > (1 << 28)) fail(Errc::parse, r.path() + ": bad tensor dimension");
    shape.push_back(d);
  }
  Tensor t(shape);
  r.bytes(t.data(), size_t(t.size()) * sizeof(float));
  t.require_grad();
  t.set_name(name);
  return t;
}
}  // namespace

void Model::save(const std::string& path) const {
  BinWriter w(path);
  w.bytes(kModelMagic, 4);
  w.u32(kModelVersion);
  w.i32(spec_.input_length);
  w.i32(spec_.in_channels);
  w.u32(uint32_t(spec_.blocks.size()));
  for (const ConvBlockSpec& b : spec_.blocks) {
    w.i32(b.filters);
    w.i32(b.width);
    w.i32(b.pool);
  }
  w.i32(spec_.head_hidden);
  w.i32(int32_t(heads_.size()));
  for (size_t h = 0; h < heads_.size(); ++h) {
    w.str(task_ids.size() > h ? task_ids[h] : "");
    w.i32(source_tasks.size() > h ? source_tasks[h] : int(h));
  }
  for (size_t i = 0; i < conv_w_.size(); ++i) {
    write_tensor(w, conv_w_[i]);
    write_tensor(w, conv_b_[i]);
  }
  for (const HeadParams& h : heads_) {
    write_tensor(w, h.fc1_w);
    write_tensor(w, h.fc1_b);
    write_tensor(w, h.fc2_w);
    write_tensor(w, h.fc2_b);
  }
  w.close();
}

Model Model::load(const std::string& path) {
  BinReader r(path);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kModelMagic, 4) != 0)
    fail(Errc::parse, path + ": not a model checkpoint (bad magic)");
  uint32_t ver = r.u32();
  if (ver != kModelVersion)
    fail(Errc::parse, path + ": unsupported checkpoint version " + std::to_string(ver));
  ModelSpec s;
  s.input_length = r.i32();
  s.in_channels = r.i32();
  uint32_t nb = r.u32();
  if (nb == 0 || nb > 64) fail(Errc::parse, path + ": bad block count");
  s.blocks.clear();
  for (uint32_t i = 0; i < nb; ++i) {
    ConvBlockSpec b;
    b.filters = r.i32();
    b.width = r.i32();
    b.pool = r.i32();
    s.blocks.push_back(b);
  }
  s.head_hidden = r.i32();
  s.num_tasks = r.i32();
  s.validate();

  Model m;
  m.spec_ = s;
  for (int h = 0; h < s.num_tasks; ++h) {
    m.task_ids.push_back(r.str(1 << 16));
    m.source_tasks.push_back(r.i32());
  }
  for (uint32_t i = 0; i < nb; ++i) {
    std::string tag = "conv" + std::to_string(i);
    m.conv_w_.push_back(read_tensor(r, tag + ".w"));
    m.conv_b_.push_back(read_tensor(r, tag + ".b"));
  }
  for (int h = 0; h < s.num_tasks; ++h) {
    std::string tag = "head" + std::to_string(h);
    HeadParams hp;
    hp.fc1_w = read_tensor(r, tag + ".fc1_w");
    hp.fc1_b = read_tensor(r, tag + ".fc1_b");
    hp.fc2_w = read_tensor(r, tag + ".fc2_w");
    hp.fc2_b = read_tensor(r, tag + ".fc2_b");
    m.heads_.push_back(std::move(hp));
  }

  // shape audit against the spec
  int cin = s.in_channels;
  for (size_t i = 0; i < s.blocks.size(); ++i) {
    const Tensor& w = m.conv_w_[i];
    if (w.dim(0) != s.blocks[i].filters || w.dim(1) != cin || w.dim(2) != s.blocks[i].width)
      fail(Errc::parse, path + ": conv tensor " + std::to_string(i) + " has shape " +
                            shape_str(w.shape()) + ", inconsistent with its spec");
    cin = s.blocks[i].filters;
  }
  int feats = s.feature_count();
  for (const HeadParams& hp : m.heads_) {
    if (hp.fc1_w.dim(0) != s.head_hidden || hp.fc1_w.dim(1) != feats ||
        hp.fc2_w.dim(1) != s.head_hidden)
      fail(Errc::parse, path + ": head tensors inconsistent with the spec header");
  }
  return m;
}

}  // namespace mtg

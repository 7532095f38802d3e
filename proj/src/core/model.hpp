#pragma once

// Hard-parameter-sharing sequence model: a shared stack of conv+relu+maxpool
// blocks feeding one small two-layer classification head per task. All heads
// read the same flattened feature vector; nothing downstream of the trunk is
// shared between heads.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace mtg {

struct ConvBlockSpec {
  int filters = 64;
  int width = 8;   // filter size, stride fixed at 1
  int pool = 4;    // maxpool window == stride
};

struct ModelSpec {
  int input_length = 1001;
  int in_channels = 4;
  std::vector<ConvBlockSpec> blocks{{64, 8, 4}, {128, 8, 4}, {256, 8, 4}};
  int head_hidden = 128;
  int num_tasks = 1;

  // Sequence lengths after each conv and pool stage, starting from
  // input_length. Raises invalid_argument (with the full chain so far) if a
  // stage would produce an empty output.
  std::vector<int> length_chain() const;
  int feature_count() const;  // flattened trunk output width

  std::string to_json() const;
  static ModelSpec from_json(const std::string& json_text);

  void validate() const;
};

struct HeadParams {
  Tensor fc1_w, fc1_b;  // [hidden, features], [hidden]
  Tensor fc2_w, fc2_b;  // [1, hidden], [1]
};

class Model {
 public:
  Model() = default;

  // Fresh parameters from the given seed; same spec + seed always produces
  // bit-identical parameters.
  static Model build(const ModelSpec& spec, uint64_t seed);

  const ModelSpec& spec() const { return spec_; }
  int num_heads() const { return int(heads_.size()); }

  // Inference forward for a one-hot batch x [B, in_channels, input_length].
  // Returns per-task probabilities [B, num_heads] (or the selected heads, in
  // the order given).
  Tensor forward_all_heads(const Tensor& x) const;
  Tensor forward_heads(const Tensor& x, std::span<const int> heads) const;

  // Training forward recorded on a tape: per-head sigmoid outputs [B, 1],
  // one tensor per selected head.
  std::vector<Tensor> forward_tape(Tape& tape, const Tensor& x, std::span<const int> heads) const;

  // Final-layer weight vector of a head (fc2 weights, bias excluded): the
  // task representation used for grouping.
  std::vector<float> head_weight_vector(int head) const;

  std::vector<Tensor*> parameters();  // declaration order: trunk, then heads
  std::vector<Tensor> parameter_snapshot() const;
  void load_parameter_snapshot(const std::vector<Tensor>& snap);

  Model fork() const;  // shares parameter values, fresh gradient buffers

  void save(const std::string& path) const;
  static Model load(const std::string& path);

  std::vector<HeadParams>& heads() { return heads_; }
  const std::vector<HeadParams>& heads() const { return heads_; }

  // Task labels carried with the model: task_ids[h] names the dataset task
  // head h was built for; source_tasks[h] is its column in that dataset.
  std::vector<std::string> task_ids;
  std::vector<int> source_tasks;

 private:
  Tensor features_inference(const Tensor& x) const;
  ModelSpec spec_;
  std::vector<Tensor> conv_w_, conv_b_;
  std::vector<HeadParams> heads_;
};

}  // namespace mtg

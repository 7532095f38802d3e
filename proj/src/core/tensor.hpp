#pragma once

// Dense float32 tensors with reverse-mode gradients for the fixed layer set
// the sequence models need: conv1d (stride 1, no padding), maxpool1d, fully
// connected, relu, sigmoid, binary cross-entropy.
//
// Tensors are cheap handles. A copy shares both values and gradient buffer,
// clone() deep-copies the values, and fork() shares the values while taking a
// fresh gradient buffer. fork() is what data-parallel training workers use:
// every worker sees parameter updates instantly but accumulates its own
// gradients, which the trainer then reduces in a fixed worker order.

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mtg {

inline constexpr float kBceEpsilon = 1e-7f;

std::string shape_str(std::span<const int> shape);

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);
  Tensor(std::vector<int> shape, std::vector<float> values);

  bool defined() const { return v_ != nullptr; }
  const std::vector<int>& shape() const { return shape_; }
  int ndim() const { return int(shape_.size()); }
  int dim(int i) const { return shape_[size_t(i)]; }
  int64_t size() const { return v_ ? int64_t(v_->size()) : 0; }

  float* data() { return v_->data(); }
  const float* data() const { return v_->data(); }
  std::span<const float> values() const { return {v_->data(), v_->size()}; }

  float item() const;  // scalar tensors only

  void require_grad(bool on = true) { slot_->want = on; }
  bool requires_grad() const { return slot_ && slot_->want; }
  bool grad_allocated() const { return slot_ && !slot_->g.empty(); }
  float* grad();                // allocates zeroed buffer on first use
  const float* grad() const;    // null when not allocated
  void zero_grad();

  Tensor clone() const;  // deep copy of values, own fresh gradient buffer
  Tensor fork() const;   // shares values, own fresh gradient buffer

  void set_name(std::string n) { name_ = std::make_shared<const std::string>(std::move(n)); }
  const std::string& name() const;

  bool shares_values_with(const Tensor& o) const { return v_ == o.v_; }

 private:
  struct GradSlot {
    std::vector<float> g;
    bool want = false;
  };
  std::vector<int> shape_;
  std::shared_ptr<std::vector<float>> v_;
  std::shared_ptr<GradSlot> slot_;
  std::shared_ptr<const std::string> name_;
};

// ---- raw kernels ----------------------------------------------------------
// Backward kernels accumulate (+=) into the destination gradients; null
// destinations are skipped.

// x [B,Cin,L], w [Cout,Cin,W], b [Cout] -> y [B,Cout,L-W+1]
void conv1d_forward(const float* x, const float* w, const float* b, float* y, int B, int Cin,
                    int L, int Cout, int W);
void conv1d_backward(const float* x, const float* w, const float* dy, float* dx, float* dw,
                     float* db, int B, int Cin, int L, int Cout, int W);

// x [B,C,L] -> y [B,C,P] with P = (L-window)/stride + 1; argmax records, per
// output, the winning offset within its channel row (first maximum on ties).
void maxpool1d_forward(const float* x, float* y, int32_t* argmax, int B, int C, int L, int window,
                       int stride);
void maxpool1d_backward(const float* dy, const int32_t* argmax, float* dx, int B, int C, int L,
                        int P);

// x [B,N], w [M,N], b [M] -> y [B,M], y = x w^T + b
void fc_forward(const float* x, const float* w, const float* b, float* y, int B, int N, int M);
void fc_backward(const float* x, const float* w, const float* dy, float* dx, float* dw, float* db,
                 int B, int N, int M);

void relu_forward(const float* x, float* y, int64_t n);
void relu_backward(const float* x, const float* dy, float* dx, int64_t n);

void sigmoid_forward(const float* x, float* y, int64_t n);
void sigmoid_backward(const float* y, const float* dy, float* dx, int64_t n);

// Sum over elements of -[t*log(p) + (1-t)*log(1-p)] with p clamped away from
// 0 and 1 by kBceEpsilon. Accumulates in double. The gradient is evaluated at
// the clamped probability and passed straight through the clamp, so saturated
// predictions still push back toward the target.
double bce_sum(const float* p, const float* t, int64_t n);
void bce_backward(const float* p, const float* t, float scale, float* dp, int64_t n);

// ---- tape -----------------------------------------------------------------

// Records one forward pass and replays it in reverse. Outputs are fresh
// tensors each call; backward() may run once per recorded pass.
class Tape {
 public:
  Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b);
  Tensor maxpool1d(const Tensor& x, int window, int stride);
  Tensor fully_connected(const Tensor& x, const Tensor& w, const Tensor& b);
  Tensor relu(const Tensor& x);
  Tensor sigmoid(const Tensor& x);
  Tensor flatten(const Tensor& x);  // [B, ...] -> [B, rest]

  // mean binary cross-entropy over all elements; scalar output
  Tensor bce_loss(const Tensor& pred, const Tensor& target);
  // summed (not averaged) binary cross-entropy; combined with a backward
  // seed of 1/batch this lets sharded workers reproduce an exact batch mean
  Tensor bce_sum_loss(const Tensor& pred, const Tensor& target);
  // sum of scalar losses
  Tensor add_scalars(const std::vector<Tensor>& terms);
  // dot of a tensor with fixed coefficients; scalar output
  Tensor weighted_sum(const Tensor& x, std::vector<float> coeffs);

  // Seeds d(output) = seed and propagates to every tensor that wants a
  // gradient. One backward per recorded forward; a second call without new
  // recordings is a state error.
  void backward(const Tensor& output, float seed = 1.0f);

  void reset();
  size_t num_ops() const { return nodes_.size(); }

 private:
  void push(std::function<void()> back);
  std::vector<std::function<void()>> nodes_;
  bool consumed_ = false;
};

// p <- p - lr * grad for every parameter whose gradient is allocated.
// lr must be finite and >= 0 (0 leaves parameters unchanged). A non-finite
// gradient entry raises a numeric error naming the parameter.
void sgd_step(std::span<Tensor> params, float lr);

}  // namespace mtg

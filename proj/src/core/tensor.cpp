#include "tensor.hpp"

#include <cmath>
#include <cstring>

#include "error.hpp"

namespace mtg {

namespace {

int64_t shape_count(std::span<const int> shape) {
  int64_t n = 1;
  for (int d : shape) {
    if (d <= 0) fail(Errc::invalid_argument, "non-positive dimension in shape " + shape_str(shape));
    n *= d;
  }
  return n;
}

void check_same_size(const Tensor& a, const Tensor& b, const char* op) {
  if (a.size() != b.size())
    fail(Errc::shape_mismatch, std::string(op) + ": operand shapes " + shape_str(a.shape()) +
                                   " and " + shape_str(b.shape()) + " differ in element count");
}

}  // namespace

std::string shape_str(std::span<const int> shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(std::vector<int> shape)
    : shape_(std::move(shape)),
      v_(std::make_shared<std::vector<float>>(size_t(shape_count(shape_)), 0.0f)),
      slot_(std::make_shared<GradSlot>()) {}

Tensor::Tensor(std::vector<int> shape, std::vector<float> values) : Tensor(std::move(shape)) {
  if (int64_t(values.size()) != size())
    fail(Errc::shape_mismatch, "value count " + std::to_string(values.size()) +
                                   " does not fill shape " + shape_str(shape_));
  *v_ = std::move(values);
}

float Tensor::item() const {
  if (size() != 1) fail(Errc::shape_mismatch, "item() on non-scalar tensor " + shape_str(shape_));
  return (*v_)[0];
}

float* Tensor::grad() {
  if (!slot_) fail(Errc::state, "gradient access on an undefined tensor");
  if (slot_->g.empty()) slot_->g.assign(v_->size(), 0.0f);
  return slot_->g.data();
}

const float* Tensor::grad() const {
  if (!slot_ || slot_->g.empty()) return nullptr;
  return slot_->g.data();
}

void Tensor::zero_grad() {
  if (slot_ && !slot_->g.empty()) std::memset(slot_->g.data(), 0, slot_->g.size() * sizeof(float));
}

Tensor Tensor::clone() const {
  Tensor t;
  t.shape_ = shape_;
  t.v_ = std::make_shared<std::vector<float>>(*v_);
  t.slot_ = std::make_shared<GradSlot>();
  t.slot_->want = slot_ && slot_->want;
  t.name_ = name_;
  return t;
}

Tensor Tensor::fork() const {
  Tensor t;
  t.shape_ = shape_;
  t.v_ = v_;
  t.slot_ = std::make_shared<GradSlot>();
  t.slot_->want = slot_ && slot_->want;
  t.name_ = name_;
  return t;
}

const std::string& Tensor::name() const {
  static const std::string empty;
  return name_ ? *name_ : empty;
}

// ---- kernels --------------------------------------------------------------

void conv1d_forward(const float* x, const float* w, const float* b, float* y, int B, int Cin,
                    int L, int Cout, int W) {
  int P = L - W + 1;
  for (int n = 0; n < B; ++n) {
    const float* xn = x + int64_t(n) * Cin * L;
    float* yn = y + int64_t(n) * Cout * P;
    for (int co = 0; co < Cout; ++co) {
      float* yc = yn + int64_t(co) * P;
      for (int p = 0; p < P; ++p) yc[p] = b[co];
      const float* wc = w + int64_t(co) * Cin * W;
      for (int ci = 0; ci < Cin; ++ci) {
        const float* xc = xn + int64_t(ci) * L;
        const float* wk = wc + int64_t(ci) * W;
        for (int k = 0; k < W; ++k) {
          float wv = wk[k];
          const float* xs = xc + k;
          for (int p = 0; p < P; ++p) yc[p] += wv * xs[p];
        }
      }
    }
  }
}

void conv1d_backward(const float* x, const float* w, const float* dy, float* dx, float* dw,
                     float* db, int B, int Cin, int L, int Cout, int W) {
  int P = L - W + 1;
  for (int n = 0; n < B; ++n) {
    const float* xn = x + int64_t(n) * Cin * L;
    const float* dyn = dy + int64_t(n) * Cout * P;
    float* dxn = dx ? dx + int64_t(n) * Cin * L : nullptr;
    for (int co = 0; co < Cout; ++co) {
      const float* dyc = dyn + int64_t(co) * P;
      if (db) {
        float s = 0;
        for (int p = 0; p < P; ++p) s += dyc[p];
        db[co] += s;
      }
      const float* wc = w + int64_t(co) * Cin * W;
      float* dwc = dw ? dw + int64_t(co) * Cin * W : nullptr;
      for (int ci = 0; ci < Cin; ++ci) {
        const float* xc = xn + int64_t(ci) * L;
        for (int k = 0; k < W; ++k) {
          if (dwc) {
            const float* xs = xc + k;
            float s = 0;
            for (int p = 0; p < P; ++p) s += xs[p] * dyc[p];
            dwc[int64_t(ci) * W + k] += s;
          }
          if (dxn) {
            float wv = wc[int64_t(ci) * W + k];
            float* dxs = dxn + int64_t(ci) * L + k;
            for (int p = 0; p < P; ++p) dxs[p] += wv * dyc[p];
          }
        }
      }
    }
  }
}

void maxpool1d_forward(const float* x, float* y, int32_t* argmax, int B, int C, int L, int window,
                       int stride) {
  int P = (L - window) / stride + 1;
  int64_t out = 0;
  for (int n = 0; n < B; ++n) {
    for (int c = 0; c < C; ++c) {
      const float* xc = x + (int64_t(n) * C + c) * L;
      for (int p = 0; p < P; ++p, ++out) {
        int s = p * stride;
        float best = xc[s];
        int bi = s;
        for (int k = 1; k < window; ++k) {
          if (xc[s + k] > best) {
            best = xc[s + k];
            bi = s + k;
          }
        }
        y[out] = best;
        argmax[out] = int32_t(bi);  // offset within the channel row, first max on ties
      }
    }
  }
}

void maxpool1d_backward(const float* dy, const int32_t* argmax, float* dx, int B, int C, int L,
                        int P) {
  int64_t out = 0;
  for (int n = 0; n < B; ++n)
    for (int c = 0; c < C; ++c) {
      float* dxc = dx + (int64_t(n) * C + c) * L;
      for (int p = 0; p < P; ++p, ++out) dxc[argmax[out]] += dy[out];
    }
}

void fc_forward(const float* x, const float* w, const float* b, float* y, int B, int N, int M) {
  for (int n = 0; n < B; ++n) {
    const float* xn = x + int64_t(n) * N;
    float* yn = y + int64_t(n) * M;
    for (int m = 0; m < M; ++m) {
      const float* wm = w + int64_t(m) * N;
      float s = b[m];
      for (int i = 0; i < N; ++i) s += xn[i] * wm[i];
      yn[m] = s;
    }
  }
}

void fc_backward(const float* x, const float* w, const float* dy, float* dx, float* dw, float* db,
                 int B, int N, int M) {
  for (int n = 0; n < B; ++n) {
    const float* xn = x + int64_t(n) * N;
    const float* dyn = dy + int64_t(n) * M;
    float* dxn = dx ? dx + int64_t(n) * N : nullptr;
    for (int m = 0; m < M; ++m) {
      float g = dyn[m];
      if (g == 0.0f) continue;
      if (db) db[m] += g;
      const float* wm = w + int64_t(m) * N;
      float* dwm = dw ? dw + int64_t(m) * N : nullptr;
      if (dwm)
        for (int i = 0; i < N; ++i) dwm[i] += g * xn[i];
      if (dxn)
        for (int i = 0; i < N; ++i) dxn[i] += g * wm[i];
    }
  }
}

void relu_forward(const float* x, float* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_backward(const float* x, const float* dy, float* dx, int64_t n) {
  for (int64_t i = 0; i < n; ++i)
    if (x[i] > 0.0f) dx[i] += dy[i];
}

void sigmoid_forward(const float* x, float* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = 1.0f / (1.0f + std::exp(-x[i]));
}

void sigmoid_backward(const float* y, const float* dy, float* dx, int64_t n) {
  for (int64_t i = 0; i < n; ++i) dx[i] += dy[i] * y[i] * (1.0f - y[i]);
}

double bce_sum(const float* p, const float* t, int64_t n) {
  double s = 0;
  for (int64_t i = 0; i < n; ++i) {
    float pc = p[i];
    if (pc < kBceEpsilon) pc = kBceEpsilon;
    if (pc > 1.0f - kBceEpsilon) pc = 1.0f - kBceEpsilon;
    s -= double(t[i]) * std::log(double(pc)) + (1.0 - double(t[i])) * std::log(1.0 - double(pc));
  }
  return s;
}

void bce_backward(const float* p, const float* t, float scale, float* dp, int64_t n) {
  for (int64_t i = 0; i < n; ++i) {
    float pc = p[i];
    if (pc < kBceEpsilon) pc = kBceEpsilon;
    if (pc > 1.0f - kBceEpsilon) pc = 1.0f - kBceEpsilon;
    // d/dp of -[t log p + (1-t) log(1-p)] at the clamped point
    dp[i] += scale * (pc - t[i]) / (pc * (1.0f - pc));
  }
}

// ---- tape -----------------------------------------------------------------

void Tape::push(std::function<void()> back) {
  consumed_ = false;
  nodes_.push_back(std::move(back));
}

Tensor Tape::conv1d(const Tensor& x, const Tensor& w, const Tensor& b) {
  if (x.ndim() != 3 || w.ndim() != 3 || b.ndim() != 1)
    fail(Errc::shape_mismatch, "conv1d: expected input [B,C,L], filters [F,C,W], bias [F]; got " +
                                   shape_str(x.shape()) + ", " + shape_str(w.shape()) + ", " +
                                   shape_str(b.shape()));
  int B = x.dim(0), Cin = x.dim(1), L = x.dim(2);
  int Cout = w.dim(0), Wk = w.dim(2);
  if (w.dim(1) != Cin)
    fail(Errc::shape_mismatch, "conv1d: input channels " + std::to_string(Cin) + " (input " +
                                   shape_str(x.shape()) + ") do not match filter channels " +
                                   std::to_string(w.dim(1)) + " (filters " + shape_str(w.shape()) +
                                   ")");
  if (b.dim(0) != Cout)
    fail(Errc::shape_mismatch, "conv1d: bias " + shape_str(b.shape()) + " does not match filter count " +
                                   std::to_string(Cout));
  if (Wk > L)
    fail(Errc::shape_mismatch, "conv1d: filter width " + std::to_string(Wk) +
                                   " exceeds input length " + std::to_string(L));
  int P = L - Wk + 1;
  Tensor y({B, Cout, P});
  conv1d_forward(x.data(), w.data(), b.data(), y.data(), B, Cin, L, Cout, Wk);
  y.require_grad();
  push([x, w, b, y, B, Cin, L, Cout, Wk]() mutable {
    Tensor xm = x, wm = w, bm = b;
    conv1d_backward(x.data(), w.data(), y.grad(),
                    x.requires_grad() ? xm.grad() : nullptr,
                    w.requires_grad() ? wm.grad() : nullptr,
                    b.requires_grad() ? bm.grad() : nullptr, B, Cin, L, Cout, Wk);
  });
  return y;
}

Tensor Tape::maxpool1d(const Tensor& x, int window, int stride) {
  if (x.ndim() != 3)
    fail(Errc::shape_mismatch, "maxpool1d: expected input [B,C,L], got " + shape_str(x.shape()));
  if (window < 1 || stride < 1)
    fail(Errc::invalid_argument, "maxpool1d: window and stride must be >= 1, got window " +
                                     std::to_string(window) + " stride " + std::to_string(stride));
  int B = x.dim(0), C = x.dim(1), L = x.dim(2);
  if (window > L)
    fail(Errc::shape_mismatch, "maxpool1d: window " + std::to_string(window) +
                                   " exceeds input length " + std::to_string(L) +
                                   " (output would be empty)");
  int P = (L - window) / stride + 1;
  Tensor y({B, C, P});
  auto argmax = std::make_shared<std::vector<int32_t>>(size_t(int64_t(B) * C * P));
  maxpool1d_forward(x.data(), y.data(), argmax->data(), B, C, L, window, stride);
  y.require_grad();
  push([x, y, argmax, B, C, L, P]() mutable {
    if (!x.requires_grad()) return;
    Tensor xm = x;
    maxpool1d_backward(y.grad(), argmax->data(), xm.grad(), B, C, L, P);
  });
  return y;
}

Tensor Tape::fully_connected(const Tensor& x, const Tensor& w, const Tensor& b) {
  if (x.ndim() != 2 || w.ndim() != 2 || b.ndim() != 1)
    fail(Errc::shape_mismatch, "fully_connected: expected input [B,N], weights [M,N], bias [M]; got " +
                                   shape_str(x.shape()) + ", " + shape_str(w.shape()) + ", " +
                                   shape_str(b.shape()));
  int B = x.dim(0), N = x.dim(1), M = w.dim(0);
  if (w.dim(1) != N)
    fail(Errc::shape_mismatch, "fully_connected: input width " + std::to_string(N) + " (input " +
                                   shape_str(x.shape()) + ") does not match weight width " +
                                   std::to_string(w.dim(1)) + " (weights " + shape_str(w.shape()) +
                                   ")");
  if (b.dim(0) != M)
    fail(Errc::shape_mismatch, "fully_connected: bias " + shape_str(b.shape()) +
                                   " does not match output width " + std::to_string(M));
  Tensor y({B, M});
  fc_forward(x.data(), w.data(), b.data(), y.data(), B, N, M);
  y.require_grad();
  push([x, w, b, y, B, N, M]() mutable {
    Tensor xm = x, wm = w, bm = b;
    fc_backward(x.data(), w.data(), y.grad(),
                x.requires_grad() ? xm.grad() : nullptr,
                w.requires_grad() ? wm.grad() : nullptr,
                b.requires_grad() ? bm.grad() : nullptr, B, N, M);
  });
  return y;
}

Tensor Tape::relu(const Tensor& x) {
  Tensor y(x.shape());
  relu_forward(x.data(), y.data(), x.size());
  y.require_grad();
  push([x, y]() mutable {
    if (!x.requires_grad()) return;
    Tensor xm = x;
    relu_backward(x.data(), y.grad(), xm.grad(), x.size());
  });
  return y;
}

Tensor Tape::sigmoid(const Tensor& x) {
  Tensor y(x.shape());
  sigmoid_forward(x.data(), y.data(), x.size());
  y.require_grad();
  push([x, y]() mutable {
    if (!x.requires_grad()) return;
    Tensor xm = x;
    sigmoid_backward(y.data(), y.grad(), xm.grad(), x.size());
  });
  return y;
}

Tensor Tape::flatten(const Tensor& x) {
  if (x.ndim() < 2)
    fail(Errc::shape_mismatch, "flatten: expected at least 2 dimensions, got " + shape_str(x.shape()));
  int B = x.dim(0);
  int64_t rest = x.size() / B;
  Tensor y({B, int(rest)}, std::vector<float>(x.data(), x.data() + x.size()));
  y.require_grad();
  push([x, y]() mutable {
    if (!x.requires_grad()) return;
    Tensor xm = x;
    float* dx = xm.grad();
    const float* dy = y.grad();
    for (int64_t i = 0; i < x.size(); ++i) dx[i] += dy[i];
  });
  return y;
}

Tensor Tape::bce_loss(const Tensor& pred, const Tensor& target) {
  check_same_size(pred, target, "bce_loss");
  int64_t n = pred.size();
  if (n == 0) fail(Errc::invalid_argument, "bce_loss: empty input");
  Tensor loss({1});
  loss.data()[0] = float(bce_sum(pred.data(), target.data(), n) / double(n));
  loss.require_grad();
  push([pred, target, loss, n]() mutable {
    if (!pred.requires_grad()) return;
    Tensor pm = pred;
    bce_backward(pred.data(), target.data(), loss.grad()[0] / float(n), pm.grad(), n);
  });
  return loss;
}

Tensor Tape::bce_sum_loss(const Tensor& pred, const Tensor& target) {
  check_same_size(pred, target, "bce_sum_loss");
  int64_t n = pred.size();
  if (n == 0) fail(Errc::invalid_argument, "bce_sum_loss: empty input");
  Tensor loss({1});
  loss.data()[0] = float(bce_sum(pred.data(), target.data(), n));
  loss.require_grad();
  push([pred, target, loss, n]() mutable {
    if (!pred.requires_grad()) return;
    Tensor pm = pred;
    bce_backward(pred.data(), target.data(), loss.grad()[0], pm.grad(), n);
  });
  return loss;
}

Tensor Tape::add_scalars(const std::vector<Tensor>& terms) {
  if (terms.empty()) fail(Errc::invalid_argument, "add_scalars: no terms");
  double s = 0;
  for (const Tensor& t : terms) {
    if (t.size() != 1)
      fail(Errc::shape_mismatch, "add_scalars: non-scalar term " + shape_str(t.shape()));
    s += double(t.values()[0]);
  }
  Tensor y({1});
  y.data()[0] = float(s);
  y.require_grad();
  push([terms, y]() mutable {
    float g = y.grad()[0];
    for (const Tensor& t : terms) {
      if (!t.requires_grad()) continue;
      Tensor tm = t;
      tm.grad()[0] += g;
    }
  });
  return y;
}

Tensor Tape::weighted_sum(const Tensor& x, std::vector<float> coeffs) {
  if (int64_t(coeffs.size()) != x.size())
    fail(Errc::shape_mismatch, "weighted_sum: " + std::to_string(coeffs.size()) +
                                   " coefficients for tensor " + shape_str(x.shape()));
  if (x.size() == 0) fail(Errc::invalid_argument, "weighted_sum: empty input");
  double s = 0;
  const float* xv = x.data();
  for (int64_t i = 0; i < x.size(); ++i) s += double(coeffs[size_t(i)]) * double(xv[i]);
  Tensor y({1});
  y.data()[0] = float(s);
  y.require_grad();
  push([x, y, c = std::move(coeffs)]() mutable {
    if (!x.requires_grad()) return;
    Tensor xm = x;
    float* dx = xm.grad();
    float g = y.grad()[0];
    for (int64_t i = 0; i < x.size(); ++i) dx[i] += g * c[size_t(i)];
  });
  return y;
}

void Tape::backward(const Tensor& output, float seed) {
  if (nodes_.empty())
    fail(Errc::state, "backward without a recorded forward pass");
  if (consumed_)
    fail(Errc::state, "backward called twice on the same forward pass; run a new forward first");
  if (output.size() != 1)
    fail(Errc::shape_mismatch, "backward expects a scalar output, got " + shape_str(output.shape()));
  if (!output.requires_grad())
    fail(Errc::state, "backward output does not track gradients (was it produced by this tape?)");
  Tensor out = output;
  out.grad()[0] += seed;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
  consumed_ = true;
}

void Tape::reset() {
  nodes_.clear();
  consumed_ = false;
}

void sgd_step(std::span<Tensor> params, float lr) {
  if (!(lr >= 0.0f) || !std::isfinite(lr))
    fail(Errc::invalid_argument, "sgd_step: learning rate must be finite and >= 0, got " +
                                     std::to_string(lr));
  for (Tensor& p : params) {
    const float* g = std::as_const(p).grad();
    if (!g) continue;
    float* v = p.data();
    int64_t n = p.size();
    for (int64_t i = 0; i < n; ++i) {
      if (!std::isfinite(g[i]))
        fail(Errc::numeric, "non-finite gradient in parameter " +
                                (p.name().empty() ? std::string("<unnamed>") : p.name()));
      v[i] -= lr * g[i];
    }
  }
}

}  // namespace mtg

#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"

#include "core/error.hpp"
#include "core/tensor.hpp"
#include "fd_check.hpp"

using namespace mtg;

namespace {

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::internal;
}

}  // namespace

TEST_CASE("tensor copies share, clones deep-copy, forks share values only") {
  Tensor a({2, 2}, {1, 2, 3, 4});
  a.require_grad();

  Tensor copy = a;
  CHECK(copy.shares_values_with(a));
  copy.data()[0] = 9;
  CHECK(a.data()[0] == 9);
  copy.grad()[1] = 5;
  CHECK(std::as_const(a).grad()[1] == 5);

  Tensor deep = a.clone();
  CHECK(!deep.shares_values_with(a));
  deep.data()[0] = 7;
  CHECK(a.data()[0] == 9);
  CHECK(std::as_const(deep).grad() == nullptr);  // fresh, unallocated

  Tensor fork = a.fork();
  CHECK(fork.shares_values_with(a));
  fork.data()[2] = 8;
  CHECK(a.data()[2] == 8);
  fork.grad()[0] = 3;  // fork's own slot; a's gradient is untouched
  CHECK(std::as_const(a).grad()[0] == 0);
  CHECK(std::as_const(a).grad()[1] == 5);
}

TEST_CASE("conv1d hand cases") {
  // (1,2,3) * (1,1) -> (3,5)
  Tensor x({1, 1, 3}, {1, 2, 3});
  Tensor w({1, 1, 2}, {1, 1});
  Tensor b({1}, {0});
  Tape tape;
  Tensor y = tape.conv1d(x, w, b);
  REQUIRE(y.shape() == std::vector<int>{1, 1, 2});
  CHECK(y.data()[0] == doctest::Approx(3));
  CHECK(y.data()[1] == doctest::Approx(5));

  // full-width filter collapses to one output
  Tensor x8({1, 1, 8}, std::vector<float>(8, 1.0f));
  Tensor w8({1, 1, 8}, std::vector<float>(8, 0.5f));
  Tensor y8 = tape.conv1d(x8, w8, b);
  REQUIRE(y8.shape() == std::vector<int>{1, 1, 1});
  CHECK(y8.data()[0] == doctest::Approx(4.0));

  // zero input, zero bias -> zero output
  Tensor xz({1, 1, 5});
  Tensor yz = tape.conv1d(xz, w, b);
  for (float v : yz.values()) CHECK(v == 0.0f);
}

TEST_CASE("conv1d shape errors name both shapes") {
  Tape tape;
  Tensor x({1, 2, 5}), w({1, 3, 2}), b({1});
  std::string msg = message_of([&] { tape.conv1d(x, w, b); });
  CHECK(msg.find("[1,2,5]") != std::string::npos);
  CHECK(msg.find("[1,3,2]") != std::string::npos);
  CHECK(code_of([&] { tape.conv1d(x, w, b); }) == Errc::shape_mismatch);

  Tensor wwide({1, 2, 9});
  CHECK_THROWS_AS(tape.conv1d(x, wwide, b), Error);
}

TEST_CASE("maxpool1d hand cases") {
  Tape tape;
  Tensor x({1, 1, 8}, {1, 5, 2, 8, 3, 3, 3, 9});
  Tensor y = tape.maxpool1d(x, 4, 4);
  REQUIRE(y.shape() == std::vector<int>{1, 1, 2});
  CHECK(y.data()[0] == 8.0f);
  CHECK(y.data()[1] == 9.0f);

  // constant input stays constant
  Tensor xc({1, 2, 8}, std::vector<float>(16, 2.5f));
  Tensor yc = tape.maxpool1d(xc, 4, 4);
  for (float v : yc.values()) CHECK(v == 2.5f);

  // trailing remainder dropped: length 9, window 4, stride 4 -> 2 outputs
  Tensor x9({1, 1, 9}, {0, 0, 0, 1, 0, 0, 0, 2, 99});
  Tensor y9 = tape.maxpool1d(x9, 4, 4);
  REQUIRE(y9.shape() == std::vector<int>{1, 1, 2});
  CHECK(y9.data()[1] == 2.0f);

  // window longer than the row is an error
  Tensor xs({1, 1, 3});
  CHECK_THROWS_AS(tape.maxpool1d(xs, 4, 4), Error);
}

TEST_CASE("maxpool backward routes to the first maximum on ties") {
  Tensor x({1, 1, 4}, {5, 5, 1, 1});
  x.require_grad();
  Tape tape;
  Tensor y = tape.maxpool1d(x, 4, 4);
  Tensor loss = tape.weighted_sum(y, {1.0f});
  tape.backward(loss);
  const float* g = std::as_const(x).grad();
  REQUIRE(g != nullptr);
  CHECK(g[0] == 1.0f);
  CHECK(g[1] == 0.0f);
}

TEST_CASE("fully connected hand case") {
  // y = x w^T + b
  Tensor x({1, 2}, {1, 2});
  Tensor w({2, 2}, {1, 1, 0, 1});  // rows: (1,1), (0,1)
  Tensor b({2}, {0.5f, -0.5f});
  Tape tape;
  Tensor y = tape.fully_connected(x, w, b);
  REQUIRE(y.shape() == std::vector<int>{1, 2});
  CHECK(y.data()[0] == doctest::Approx(3.5));
  CHECK(y.data()[1] == doctest::Approx(1.5));
}

TEST_CASE("relu and sigmoid hand values") {
  Tape tape;
  Tensor x({4}, {-1, 0, 0.5f, 2});
  Tensor r = tape.relu(x);
  CHECK(r.data()[0] == 0.0f);
  CHECK(r.data()[1] == 0.0f);
  CHECK(r.data()[2] == 0.5f);
  CHECK(r.data()[3] == 2.0f);

  Tensor s = tape.sigmoid(Tensor({3}, {0, -100, 100}));
  CHECK(s.data()[0] == doctest::Approx(0.5));
  CHECK(s.data()[1] == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(s.data()[2] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("bce values, clamping, and the sum/mean relationship") {
  Tape tape;
  Tensor p({1}, {0.5f}), t({1}, {1.0f});
  Tensor loss = tape.bce_loss(p, t);
  CHECK(loss.item() == doctest::Approx(std::log(2.0)));

  // saturated predictions are clamped to finite loss
  Tensor p0({1}, {0.0f}), t1({1}, {1.0f});
  Tensor l0 = tape.bce_loss(p0, t1);
  CHECK(std::isfinite(l0.item()));
  CHECK(l0.item() == doctest::Approx(-std::log(double(kBceEpsilon))).epsilon(1e-3));

  Tensor pv({4}, {0.2f, 0.7f, 0.4f, 0.9f});
  Tensor tv({4}, {0, 1, 1, 0});
  Tensor mean = tape.bce_loss(pv, tv);
  Tensor sum = tape.bce_sum_loss(pv, tv);
  CHECK(sum.item() == doctest::Approx(4.0 * mean.item()));

  CHECK_THROWS_AS(tape.bce_loss(Tensor({0}), Tensor({0})), Error);
}

TEST_CASE("bce_sum_loss with a 1/n backward seed reproduces bce_loss gradients") {
  std::vector<float> probs{0.2f, 0.7f, 0.4f, 0.9f};
  std::vector<float> targs{0, 1, 1, 0};

  Tensor p1({4}, probs), t1({4}, targs);
  p1.require_grad();
  Tape tape1;
  tape1.backward(tape1.bce_loss(p1, t1));

  Tensor p2({4}, probs), t2({4}, targs);
  p2.require_grad();
  Tape tape2;
  tape2.backward(tape2.bce_sum_loss(p2, t2), 1.0f / 4.0f);

  const float* g1 = std::as_const(p1).grad();
  const float* g2 = std::as_const(p2).grad();
  for (int i = 0; i < 4; ++i) CHECK(g1[i] == doctest::Approx(g2[i]).epsilon(1e-6));
}

TEST_CASE("weighted_sum and add_scalars") {
  Tape tape;
  Tensor x({3}, {1, 2, 3});
  x.require_grad();
  Tensor s = tape.weighted_sum(x, {0.5f, 1.0f, -1.0f});
  CHECK(s.item() == doctest::Approx(0.5 + 2 - 3));
  tape.backward(s);
  const float* g = std::as_const(x).grad();
  CHECK(g[0] == 0.5f);
  CHECK(g[2] == -1.0f);

  CHECK_THROWS_AS(tape.weighted_sum(x, {1.0f}), Error);

  Tape tape2;
  Tensor a({1}, {2}), b({1}, {3});
  a.require_grad();
  b.require_grad();
  Tensor sa = tape2.weighted_sum(a, {1.0f});
  Tensor sb = tape2.weighted_sum(b, {1.0f});
  Tensor total = tape2.add_scalars({sa, sb});
  CHECK(total.item() == 5.0f);
  tape2.backward(total);
  CHECK(std::as_const(a).grad()[0] == 1.0f);
  CHECK(std::as_const(b).grad()[0] == 1.0f);
}

TEST_CASE("tape state errors") {
  Tape tape;
  CHECK(code_of([&] { tape.backward(Tensor({1}, {0.0f})); }) == Errc::state);

  Tensor x({2}, {1, 2});
  x.require_grad();
  Tensor s = tape.weighted_sum(x, {1.0f, 1.0f});
  tape.backward(s);
  CHECK(code_of([&] { tape.backward(s); }) == Errc::state);
  std::string msg = message_of([&] { tape.backward(s); });
  CHECK(msg.find("new forward") != std::string::npos);

  Tape tape2;
  Tensor y = tape2.relu(x);  // non-scalar
  CHECK(code_of([&] { tape2.backward(y); }) == Errc::shape_mismatch);

  // output that the tape never produced
  Tape tape3;
  tape3.relu(x);
  Tensor foreign({1}, {0.5f});
  CHECK(code_of([&] { tape3.backward(foreign); }) == Errc::state);
}

TEST_CASE("sgd_step guards") {
  Tensor p({2}, {1, 2});
  p.set_name("conv0.w");
  p.require_grad();
  p.grad()[0] = 0.5f;
  p.grad()[1] = -0.5f;
  std::vector<Tensor> params{p};

  CHECK_THROWS_AS(sgd_step(params, -0.1f), Error);
  CHECK_THROWS_AS(sgd_step(params, std::numeric_limits<float>::quiet_NaN()), Error);

  sgd_step(params, 0.0f);  // lr 0 leaves values alone
  CHECK(p.data()[0] == 1.0f);

  sgd_step(params, 1.0f);
  CHECK(p.data()[0] == doctest::Approx(0.5));
  CHECK(p.data()[1] == doctest::Approx(2.5));

  p.grad()[0] = std::numeric_limits<float>::infinity();
  std::string msg = message_of([&] { sgd_step(params, 0.1f); });
  CHECK(code_of([&] { sgd_step(params, 0.1f); }) == Errc::numeric);
  CHECK(msg.find("conv0.w") != std::string::npos);
}

TEST_CASE("analytic gradients match central differences, layer by layer") {
  for (int i = 0; i < 10; ++i) {
    CAPTURE(i);
    CHECK(fdcheck::check_all_layers(1000 + uint64_t(i)) <= 1e-4);
  }
}

TEST_CASE("analytic gradients match central differences through a full chain") {
  // conv -> relu -> pool -> flatten -> fc -> relu -> fc -> sigmoid -> bce,
  // double-precision reference, step 1e-4. Configurations whose activations
  // sit too close to a relu kink, a pooling tie, or probability saturation
  // are redrawn: finite differences are meaningless across those boundaries.
  const int B = 2, Cin = 2, L = 16, C1 = 3, W1 = 3, hidden = 4;
  const int Lo = L - W1 + 1;       // 14
  const int P = (Lo - 2) / 2 + 1;  // pool window 2 stride 2 -> 7
  const int flat = C1 * P;
  const double margin = 5e-3;

  std::vector<float> xv, w1, b1, w2, b2, w3, b3, tv;
  std::vector<double> X, W1d, B1d, W2d, B2d, W3d, B3d, T;

  auto forward = [&](std::vector<double>* probs_out) {
    std::vector<double> y1 = fdcheck::conv1d_ref(X, W1d, B1d, B, Cin, L, C1, W1);
    std::vector<double> r1 = fdcheck::relu_ref(y1);
    std::vector<double> p1 = fdcheck::maxpool1d_ref(r1, B, C1, Lo, 2, 2);
    std::vector<double> h = fdcheck::fc_ref(p1, W2d, B2d, B, flat, hidden);
    std::vector<double> rh = fdcheck::relu_ref(h);
    std::vector<double> o = fdcheck::fc_ref(rh, W3d, B3d, B, hidden, 1);
    std::vector<double> s = fdcheck::sigmoid_ref(o);
    if (probs_out) *probs_out = s;
    return fdcheck::bce_mean_ref(s, T);
  };

  auto margins_ok = [&]() {
    std::vector<double> y1 = fdcheck::conv1d_ref(X, W1d, B1d, B, Cin, L, C1, W1);
    for (double z : y1)
      if (std::abs(z) < margin) return false;
    std::vector<double> r1 = fdcheck::relu_ref(y1);
    for (int bi = 0; bi < B; ++bi)
      for (int c = 0; c < C1; ++c)
        for (int p = 0; p < P; ++p) {
          const double* row = r1.data() + (size_t(bi) * C1 + size_t(c)) * size_t(Lo);
          double m1 = std::max(row[2 * p], row[2 * p + 1]);
          double m2 = std::min(row[2 * p], row[2 * p + 1]);
          if (m1 > 1e-12 && m1 - m2 < margin) return false;
        }
    std::vector<double> p1 = fdcheck::maxpool1d_ref(r1, B, C1, Lo, 2, 2);
    std::vector<double> h = fdcheck::fc_ref(p1, W2d, B2d, B, flat, hidden);
    for (double z : h)
      if (std::abs(z) < margin) return false;
    std::vector<double> probs;
    forward(&probs);
    for (double p : probs)
      if (p < 1e-3 || p > 1.0 - 1e-3) return false;
    return true;
  };

  bool found = false;
  for (uint64_t attempt = 0; attempt < 80 && !found; ++attempt) {
    Rng rng(splitmix64(0xc4a1 + attempt));
    xv = fdcheck::rand_floats(rng, int64_t(B) * Cin * L, -1, 1);
    w1 = fdcheck::rand_floats(rng, int64_t(C1) * Cin * W1, -0.7, 0.7);
    b1 = fdcheck::rand_floats(rng, C1, -0.3, 0.3);
    w2 = fdcheck::rand_floats(rng, int64_t(hidden) * flat, -0.2, 0.2);
    b2 = fdcheck::rand_floats(rng, hidden, -0.3, 0.3);
    w3 = fdcheck::rand_floats(rng, int64_t(1) * hidden, -0.5, 0.5);
    b3 = fdcheck::rand_floats(rng, 1, -0.3, 0.3);
    tv.assign(size_t(B), 0.0f);
    for (float& t : tv) t = rng.bernoulli(0.5) ? 1.0f : 0.0f;
    X = fdcheck::widen(xv);
    W1d = fdcheck::widen(w1);
    B1d = fdcheck::widen(b1);
    W2d = fdcheck::widen(w2);
    B2d = fdcheck::widen(b2);
    W3d = fdcheck::widen(w3);
    B3d = fdcheck::widen(b3);
    T = fdcheck::widen(tv);
    found = margins_ok();
  }
  REQUIRE(found);

  Tensor x({B, Cin, L}, xv);
  Tensor cw({C1, Cin, W1}, w1), cb({C1}, b1);
  Tensor fw1({hidden, flat}, w2), fb1({hidden}, b2);
  Tensor fw2({1, hidden}, w3), fb2({1}, b3);
  Tensor targ({B, 1}, tv);
  for (Tensor* t : {&x, &cw, &cb, &fw1, &fb1, &fw2, &fb2}) t->require_grad();

  Tape tape;
  Tensor t1 = tape.relu(tape.conv1d(x, cw, cb));
  Tensor t2 = tape.flatten(tape.maxpool1d(t1, 2, 2));
  Tensor t3 = tape.relu(tape.fully_connected(t2, fw1, fb1));
  Tensor t4 = tape.sigmoid(tape.fully_connected(t3, fw2, fb2));
  Tensor loss = tape.bce_loss(t4, targ);
  tape.backward(loss);

  Rng pick(7);
  auto eval = [&]() { return forward(nullptr); };
  const double tol = 5e-4, h = 1e-4;
  CHECK(fdcheck::fd_tensor(pick, 0, std::as_const(x).grad(), X, eval, h) <= tol);
  CHECK(fdcheck::fd_tensor(pick, 0, std::as_const(cw).grad(), W1d, eval, h) <= tol);
  CHECK(fdcheck::fd_tensor(pick, 0, std::as_const(cb).grad(), B1d, eval, h) <= tol);
  CHECK(fdcheck::fd_tensor(pick, 0, std::as_const(fw1).grad(), W2d, eval, h) <= tol);
  CHECK(fdcheck::fd_tensor(pick, 0, std::as_const(fb1).grad(), B2d, eval, h) <= tol);
  CHECK(fdcheck::fd_tensor(pick, 0, std::as_const(fw2).grad(), W3d, eval, h) <= tol);
  CHECK(fdcheck::fd_tensor(pick, 0, std::as_const(fb2).grad(), B3d, eval, h) <= tol);
}

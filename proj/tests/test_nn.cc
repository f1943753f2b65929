// tests/test_nn.cc

// Copyright 2026  The MLSD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>
#include <set>

#include "mlsd/nn.h"
#include "mlsd/softmax.h"
#include "test_util.h"

using namespace mlsd;
using mlsd::test::error_code;

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  std::vector<double> p{1.5, -2}, g{0, 0};
  AdamState<double> s;
  adam_step<double>({std::span<double>(p)}, {std::span<double>(g)}, s, 0.1);
  CHECK(p == std::vector<double>{1.5, -2});
  CHECK(s.t == 1);
}

TEST_CASE("adam: first step has magnitude lr") {
  std::vector<double> p{0}, g{1};
  AdamState<double> s;
  adam_step<double>({std::span<double>(p)}, {std::span<double>(g)}, s, 1e-3);
  // lr * g / (|g| + eps) for the bias-corrected first moments.
  CHECK(p[0] == doctest::Approx(-1e-3 / (1 + 1e-8)).epsilon(1e-12));
}

TEST_CASE("adam: constant gradient moves monotonically with steps near lr") {
  std::vector<double> p{0}, g{0.37};
  AdamState<double> s;
  double prev = 0;
  for (int t = 0; t < 100; ++t) {
    adam_step<double>({std::span<double>(p)}, {std::span<double>(g)}, s, 1e-3);
    const double step = prev - p[0];
    CHECK(step > 0);
    CHECK(step == doctest::Approx(1e-3).epsilon(1e-6));
    prev = p[0];
  }
  CHECK(p[0] == doctest::Approx(-0.1).epsilon(1e-6));
}

TEST_CASE("adam: shape errors") {
  std::vector<double> p{0, 1}, g{1};
  AdamState<double> s;
  CHECK(error_code([&] { adam_step<double>({std::span<double>(p)}, {std::span<double>(g)}, s, 1e-3); }) ==
        "SHAPE_MISMATCH");
}

TEST_CASE("train/validation split") {
  const auto s = split_train_val(100, 0.1, 3);
  CHECK(s.val.size() == 10);
  CHECK(s.train.size() == 90);
  std::set<size_t> all(s.train.begin(), s.train.end());
  all.insert(s.val.begin(), s.val.end());
  CHECK(all.size() == 100);
  CHECK(split_train_val(100, 0.1, 3).val == s.val);
  CHECK_FALSE(split_train_val(100, 0.1, 4).val == s.val);
  CHECK(split_train_val(2, 0.1, 1).val.size() == 1);
  CHECK(split_train_val(3, 0.9, 1).train.size() == 1);
  CHECK(error_code([] { split_train_val(1, 0.1, 1); }) == "TOO_FEW_EXAMPLES");
}

TEST_CASE("early stopping restores the best epoch") {
  // Scripted validation losses; the "model" is the epoch counter.
  const std::vector<double> val{5, 4, 3, 3.5, 3.2, 1};
  int model = 0;
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.patience = 2;
  std::vector<size_t> tr{0, 1, 2}, va{0};
  auto eval = [&](const int &m, const std::vector<size_t> &idx) { return idx.size() == 1 ? val[m] : 1.0; };
  auto step = [&](int &m, const std::vector<size_t> &) {
    ++m;
    return 1.0;
  };
  cfg.batch_size = 3;
  const auto h = train_with_early_stopping(model, tr, va, cfg, eval, step);
  CHECK(h.best_epoch == 2);
  CHECK(h.epochs.size() == 5);
  CHECK(h.stopped_early);
  CHECK(model == 2);

  int diverging = 0;
  auto bad = [&](const int &m, const std::vector<size_t> &) { return m > 1 ? NAN : 1.0; };
  CHECK(error_code([&] { train_with_early_stopping(diverging, tr, va, cfg, bad, step); }) == "NON_FINITE_LOSS");
}

TEST_CASE("softmax") {
  const std::vector<double> z{1000, 1000};
  CHECK(softmax(z) == std::vector<double>{0.5, 0.5});
  const auto p = softmax(std::vector<double>{0, 2});
  CHECK(p[0] == doctest::Approx(0.119202922022118).epsilon(1e-12));
  CHECK(p[0] + p[1] == doctest::Approx(1.0));
}

TEST_CASE("softmax classifier gradient matches finite differences") {
  for (size_t hidden : {size_t{0}, size_t{4}}) {
    auto c = init_softmax<double>(3, hidden, 3, 7);
    Rng rng(3);
    Matrix<double> x(5, 3);
    for (double &v : x.data) v = rng.normal();
    const std::vector<size_t> y{0, 2, 1, 1, 0};
    SoftmaxClassifier<double> grad;
    cross_entropy_gradient(c, x, std::span<const size_t>(y), grad, Exec::Serial);
    auto ct = tensors(c);
    auto gt = tensors(grad);
    for (size_t t = 0; t < ct.size(); ++t)
      for (size_t i = 0; i < ct[t].size(); ++i) {
        const double orig = ct[t][i];
        ct[t][i] = orig + 1e-6;
        const double up = cross_entropy(c, x, std::span<const size_t>(y), Exec::Serial);
        ct[t][i] = orig - 1e-6;
        const double down = cross_entropy(c, x, std::span<const size_t>(y), Exec::Serial);
        ct[t][i] = orig;
        CHECK(gt[t][i] == doctest::Approx((up - down) / 2e-6).epsilon(1e-5));
      }
  }
}

TEST_CASE("predict breaks ties toward the lowest class") {
  SoftmaxClassifier<float> c;
  c.out = {Matrix<float>(3, 1), {1, 1, 0}};
  const auto p = predict(c, Matrix<float>(2, 1), Exec::Serial);
  CHECK(p == std::vector<size_t>{0, 0});
}

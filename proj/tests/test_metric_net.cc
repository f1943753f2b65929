// tests/test_metric_net.cc

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

#include "fd_check.h"
#include "mlsd/metric_net.h"
#include "mlsd/synthetic.h"
#include "mlsd/triplet_miner.h"
#include "test_util.h"

using namespace mlsd;
using mlsd::test::error_code;
using mlsd::test::read_file;
using mlsd::test::TempDir;

namespace {

ProjectionParams<double> params_2x2(std::vector<double> w1, std::vector<double> b1, std::vector<double> w2,
                                    std::vector<double> b2) {
  ProjectionParams<double> p;
  p.layer1 = {Matrix<double>(2, 2, std::move(w1)), std::move(b1)};
  p.layer2 = {Matrix<double>(2, 2, std::move(w2)), std::move(b2)};
  return p;
}

}  // namespace

TEST_CASE("forward pass") {
  const std::vector<double> x{1, -1};
  const auto zero = params_2x2({0, 0, 0, 0}, {0, 0}, {0, 0, 0, 0}, {0, 0});
  CHECK(forward_project<double>(x, zero) == std::vector<double>{0, 0});

  const auto identity = params_2x2({1, 0, 0, 1}, {0, 0}, {1, 0, 0, 1}, {0, 0});
  const std::vector<double> pos{0.5, 3};
  CHECK(forward_project<double>(pos, identity) == pos);

  // relu(W1 x + b1) = relu(-0.5, 3.5) = (0, 3.5); W2 h + b2 = (-2.5, 3.5)
  const auto fixed = params_2x2({1, 2, 3, -1}, {0.5, -0.5}, {2, -1, 0.5, 1}, {1, 0});
  CHECK(forward_project<double>(x, fixed) == std::vector<double>{-2.5, 3.5});

  CHECK(error_code([&] { forward_project<double>(std::vector<double>{1, 2, 3}, fixed); }) == "DIM_MISMATCH");
}

TEST_CASE("triplet loss values") {
  const std::vector<double> a{0, 0}, p{3, 4}, n{1, 0};
  CHECK(triplet_loss<double>(a, p, n, 1.0) == 5.0);
  const std::vector<double> n2{2, 0};
  CHECK(triplet_loss<double>(a, a, n2, 1.0) == 0.0);
  CHECK(triplet_loss<double>(a, a, a, 1.0) == 1.0);
  CHECK(triplet_loss<double>(a, a, a, 0.0) == 0.0);
}

TEST_CASE("inactive hinge gives exactly zero gradients") {
  Rng rng(4);
  const auto params = init_projection<double>(4, 3, 2, 1);
  const std::vector<double> a{0.1, 0.2, 0.3, 0.4};
  const std::vector<double> n{-50, 40, -30, 20};
  const auto g = grad_triplet<double>(a, a, n, params, 0.5);
  REQUIRE(g.loss == 0.0);
  auto grad = g.grad;
  for (auto t : tensors(grad))
    for (double v : t) CHECK(v == 0.0);
}

TEST_CASE("gradients match central finite differences") {
  Rng rng(21);
  for (int i = 0; i < 20; ++i) {
    const auto c = mlsd::test::random_fd_case(rng, 4, 3, 2);
    CHECK(mlsd::test::fd_check(c).rel_error < 1e-4);
  }
  for (int i = 0; i < 5; ++i) {
    const auto c = mlsd::test::random_fd_case(rng, 7, 5, 3);
    CHECK(mlsd::test::fd_check(c).rel_error < 1e-4);
  }
}

TEST_CASE("batch gradient is the mean of per-triplet gradients") {
  Rng rng(8);
  const auto params = init_projection<double>(5, 4, 3, 2);
  Matrix<double> a(6, 5), p(6, 5), n(6, 5);
  for (auto *m : {&a, &p, &n})
    for (double &v : m->data) v = rng.normal();
  const auto batch = triplet_batch_gradient(a, p, n, params, 1.5, Exec::Serial);
  auto mean = zeros_like(params);
  double loss = 0;
  for (size_t i = 0; i < 6; ++i) {
    auto g = grad_triplet<double>(a.row(i), p.row(i), n.row(i), params, 1.5);
    loss += g.loss / 6;
    auto mt = tensors(mean);
    auto gt = tensors(g.grad);
    for (size_t t = 0; t < mt.size(); ++t)
      for (size_t k = 0; k < mt[t].size(); ++k) mt[t][k] += gt[t][k] / 6;
  }
  CHECK(batch.loss == doctest::Approx(loss).epsilon(1e-12));
  auto bg = batch.grad;
  auto bt = tensors(bg);
  auto mt = tensors(mean);
  for (size_t t = 0; t < bt.size(); ++t)
    for (size_t k = 0; k < bt[t].size(); ++k) CHECK(bt[t][k] == doctest::Approx(mt[t][k]).epsilon(1e-10));
  CHECK(triplet_batch_loss(a, p, n, params, 1.5, Exec::Serial) == doctest::Approx(loss).epsilon(1e-12));

  const auto par = triplet_batch_gradient(a, p, n, params, 1.5, Exec::Parallel);
  CHECK(par.loss == batch.loss);
  CHECK(par.grad == batch.grad);
}

TEST_CASE("source probability") {
  CHECK(source_probability(0.3, 0.3) == 0.5);
  CHECK(source_probability(0, 2) == doctest::Approx(0.119202922022118).epsilon(1e-12));
  for (double z : {-100.0, -3.0, 0.0, 7.5, 500.0})
    CHECK(source_probability(z, z + 1.25) == doctest::Approx(source_probability(0, 1.25)).epsilon(1e-12));
  CHECK(source_probability(1000, 0) == 1.0);
  CHECK(source_probability(0, 1000) >= 0.0);
}

TEST_CASE("degenerate triplets: zero loss stops after one epoch, parameters unchanged") {
  const EmbeddingStore store(3, {0, 1, 2}, {1, 2, 3, 4, 5, 6, -1, 0, 1});
  std::vector<Triplet> t;
  for (uint64_t i = 0; i < 3; ++i)
    for (int k = 0; k < 4; ++k) t.push_back({i, i, i});
  TrainConfig cfg;
  cfg.margin = 0;
  cfg.hidden_dim = 4;
  cfg.proj_dim = 2;
  cfg.seed = 3;
  const auto r = train_metric(t, store, cfg);
  REQUIRE(r.history.epochs.size() == 2);
  CHECK(r.history.epochs[1].epoch == 1);
  CHECK(r.history.epochs[1].train_loss == 0.0);
  CHECK(r.history.best_val_loss == 0.0);
  CHECK(r.params == init_projection<float>(3, 4, 2, 3));
}

TEST_CASE("metric training on separable clusters") {
  SeparationParams sp;
  sp.dim = 8;
  sp.n_source = 120;
  sp.n_noise = 120;
  sp.n_test = 60;
  sp.seed = 5;
  const auto c = make_separation_benchmark(sp);
  const auto train = [&](const char *tag) { return filter_split(filter_target(c.dataset, tag), Split::Train); };
  const auto test = [&](const char *tag) { return filter_split(filter_target(c.dataset, tag), Split::Test); };
  const auto triplets = build_triplets(train("SRC"), train("NOI"), c.store, {5, 3, 1});
  TrainConfig cfg;
  cfg.lr = 1e-3;
  cfg.epochs = 15;
  cfg.hidden_dim = 32;
  cfg.proj_dim = 16;
  cfg.seed = 9;
  const auto r = train_metric(triplets, c.store, cfg);
  CHECK(r.history.epochs.back().train_loss < r.history.epochs.front().train_loss);
  CHECK(r.history.best_val_loss <= r.history.epochs.front().val_loss);

  const auto held_out = build_triplets(test("SRC"), test("NOI"), c.store, {5, 3, 2});
  double dap = 0, dan = 0;
  for (const auto &t : held_out) {
    const auto za = forward_project<float>(c.store.at(t.anchor), r.params);
    const auto zp = forward_project<float>(c.store.at(t.positive), r.params);
    const auto zn = forward_project<float>(c.store.at(t.negative), r.params);
    dap += euclidean_distance(za, zp);
    dan += euclidean_distance(za, zn);
  }
  CHECK(dap < dan);

  SUBCASE("same seed gives bit-identical parameters, whichever executor") {
    CHECK(train_metric(triplets, c.store, cfg, Exec::Serial).params == r.params);
  }
  SUBCASE("head separates the projections") {
    std::vector<uint64_t> ids = train("SRC").ids();
    const auto noise_ids = train("NOI").ids();
    ids.insert(ids.end(), noise_ids.begin(), noise_ids.end());
    std::vector<uint8_t> lab(train("SRC").size(), 1);
    lab.resize(ids.size(), 0);
    const Matrix<float> raw(ids.size(), c.store.dim(), c.store.gather(ids));
    TrainConfig hc = cfg;
    hc.epochs = 30;
    hc.lr = 1e-2;
    const auto head = train_classifier_head(project_batch(raw, r.params, Exec::Serial), lab, hc);
    std::vector<uint64_t> tid = test("SRC").ids();
    const auto tn = test("NOI").ids();
    tid.insert(tid.end(), tn.begin(), tn.end());
    std::vector<uint8_t> tl(test("SRC").size(), 1);
    tl.resize(tid.size(), 0);
    const Matrix<float> traw(tid.size(), c.store.dim(), c.store.gather(tid));
    const double acc = eval_binary_accuracy(traw, tl, r.params, head.head);
    CHECK(acc >= 0.95);
    std::vector<uint8_t> flipped(tl);
    for (auto &v : flipped) v = 1 - v;
    CHECK(eval_binary_accuracy(traw, flipped, r.params, head.head) == doctest::Approx(1 - acc).epsilon(1e-12));
    CHECK(error_code([&] { train_classifier_head(project_batch(raw, r.params, Exec::Serial),
                                                 std::vector<uint8_t>(ids.size(), 1), hc); }) == "SINGLE_CLASS");
  }
}

TEST_CASE("head accuracy on indistinguishable classes is near chance") {
  Rng rng(12);
  Matrix<float> z(400, 2);
  for (float &v : z.data) v = static_cast<float>(rng.normal());
  std::vector<uint8_t> lab(400);
  for (size_t i = 0; i < 400; ++i) lab[i] = i % 2;
  TrainConfig cfg;
  cfg.lr = 1e-2;
  cfg.epochs = 20;
  cfg.seed = 1;
  Matrix<float> train_x(300, 2, std::vector<float>(z.data.begin(), z.data.begin() + 600));
  const auto head = train_classifier_head(train_x, std::span<const uint8_t>(lab.data(), 300), cfg);
  // Identity projection so eval_binary_accuracy sees the raw test points.
  ProjectionParams<float> id;
  id.layer1 = {Matrix<float>(2, 2, std::vector<float>{1, 0, 0, 1}), {0, 0}};
  id.layer2 = {Matrix<float>(2, 2, std::vector<float>{1, 0, 0, 1}), {0, 0}};
  Matrix<float> test_x(100, 2, std::vector<float>(z.data.begin() + 600, z.data.end()));
  // ReLU clips negatives; shift the points into the positive quadrant first.
  for (float &v : test_x.data) v += 10;
  for (auto &b : id.layer2.b) b = -10;
  const double acc = eval_binary_accuracy(test_x, std::span<const uint8_t>(lab.data() + 300, 100), id, head.head);
  CHECK(std::abs(acc - 0.5) <= 0.1);
}

TEST_CASE("checkpoint round trip") {
  TempDir dir("ckpt");
  MetricModel m;
  m.projection = init_projection<float>(6, 5, 3, 4);
  Rng rng(1);
  m.head = init_dense<float>(3, 2, rng);
  m.metric_config.lr = 1e-3;
  m.metric_config.hidden_dim = 5;
  m.metric_config.proj_dim = 3;
  m.head_config.epochs = 7;
  m.metric_history.epochs = {{0, 1.5, 1.4}, {1, 1.0, 1.1}};
  m.metric_history.best_epoch = 1;
  m.metric_history.best_val_loss = 1.1;
  save_checkpoint(m, dir / "ck", {{"config_hash", "abc"}});
  const MetricModel back = load_checkpoint(dir / "ck");
  CHECK(back.projection == m.projection);
  CHECK(back.head == m.head);
  CHECK(back.metric_config.lr == 1e-3);
  CHECK(back.head_config.epochs == 7);
  save_checkpoint(back, dir / "ck2", {{"config_hash", "abc"}});
  CHECK(read_file(dir / "ck.bin") == read_file(dir / "ck2.bin"));
  CHECK(error_code([&] { load_checkpoint(dir / "missing"); }) == "MISSING_CHECKPOINT");
  mlsd::test::write_file(dir / "bad.json", "{}");
  mlsd::test::write_file(dir / "bad.bin", "");
  CHECK(error_code([&] { load_checkpoint(dir / "bad"); }) == "BAD_CHECKPOINT");
}

TEST_CASE("train config JSON") {
  TrainConfig c;
  c.lr = 0.01;
  c.batch_size = 7;
  const TrainConfig back = train_config_from_json(to_json(c));
  CHECK(back.lr == 0.01);
  CHECK(back.batch_size == 7);
  CHECK(back.epochs == 10);
  CHECK(error_code([] { train_config_from_json({{"learning_rate", 1}}); }) == "BAD_CONFIG");
  CHECK(error_code([] { TrainConfig bad; bad.lr = 0; bad.validate(); }) == "BAD_CONFIG");
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "aqcnn/train.hpp"
#include "doctest.h"

using namespace aqcnn;

namespace {

std::mt19937_64 rng(991);

double uniform_angle() {
  return 2.0 * std::numbers::pi * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

std::vector<TrainSample> random_batch(const ModelSpec& spec, int count) {
  std::vector<TrainSample> batch(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    batch[i].features.resize(static_cast<std::size_t>(spec.num_qubits));
    for (double& f : batch[i].features) f = uniform_angle() / 2.0;
    batch[i].label = static_cast<int>(i % 2);
    batch[i].target = class_code(batch[i].label, 2, spec.num_qubits - 1);
  }
  return batch;
}

std::vector<double> random_params(const ModelSpec& spec) {
  std::vector<double> p(static_cast<std::size_t>(spec.total_params));
  for (double& x : p) x = uniform_angle();
  return p;
}

std::vector<double> fd_gradient(const ModelSpec& spec,
                                std::span<const double> params,
                                std::span<const TrainSample> batch, double h) {
  std::vector<double> g(params.size());
  for (std::size_t j = 0; j < params.size(); ++j) {
    std::vector<double> pp(params.begin(), params.end());
    std::vector<double> pm(params.begin(), params.end());
    pp[j] += h;
    pm[j] -= h;
    g[j] = (batch_loss(spec, pp, batch) - batch_loss(spec, pm, batch)) / (2 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("class_code extends the binary index cyclically") {
  // [TRIVIAL] binary labels fill all bits with the label.
  CHECK(class_code(0, 2, 7).bits == std::vector<std::uint8_t>(7, 0));
  CHECK(class_code(1, 2, 7).bits == std::vector<std::uint8_t>(7, 1));
  // [DERIVED] 10 classes need 4 bits; class 6 = 0110 repeats as 0110011
  // (most significant bit first, cycle period 4).
  const TargetBits t = class_code(6, 10, 7);
  CHECK(t.bits == std::vector<std::uint8_t>{0, 1, 1, 0, 0, 1, 1});
  CHECK_THROWS_AS(class_code(10, 10, 7), std::invalid_argument);
}

TEST_CASE("bce_loss matches a hand-computed value") {
  // [DERIVED] target bit 1 scores -log2(p0), bit 0 scores -log2(1 - p0):
  // -(log2(0.8) + log2(0.3)) / 2.
  TargetBits t;
  t.bits = {1, 0};
  const std::vector<double> p = {0.8, 0.7};  // p is P(|0>)
  CHECK(bce_loss(p, t) ==
        doctest::Approx(-(std::log2(0.8) + std::log2(0.3)) / 2).epsilon(1e-12));
  // Clamping keeps extreme probabilities finite.
  const std::vector<double> extreme = {0.0, 1.0};
  CHECK(std::isfinite(bce_loss(extreme, t)));
}

TEST_CASE("freeze plan marks the last m layers trainable") {
  const ModelSpec spec = build_model(ModelVariant::G, 3);
  const FreezePlan plan = make_freeze_plan(spec, 1);
  int frozen = 0, open = 0;
  for (int j = 0; j < spec.total_params; ++j) {
    (plan.trainable[static_cast<std::size_t>(j)] ? open : frozen)++;
  }
  CHECK(frozen == 2 * 21);
  CHECK(open == 21);
  // Trainable block is exactly the last layer's slice.
  for (int j = spec.layer_offsets[2]; j < spec.total_params; ++j) {
    CHECK(plan.trainable[static_cast<std::size_t>(j)] == 1);
  }
  CHECK_THROWS_AS(make_freeze_plan(spec, 4), std::invalid_argument);
}

TEST_CASE("parameter-shift gradients match finite differences") {
  for (ModelVariant v : {ModelVariant::N, ModelVariant::Z, ModelVariant::G}) {
    const ModelSpec spec = detail::build_model_unchecked(v, 2);
    const std::vector<double> params = random_params(spec);
    const std::vector<TrainSample> batch = random_batch(spec, 3);
    const FreezePlan all = make_freeze_plan(spec, spec.n_layers);
    const std::vector<double> grad = gradients(spec, params, batch, all);
    const std::vector<double> fd = fd_gradient(spec, params, batch, 1e-4);
    for (std::size_t j = 0; j < grad.size(); ++j) {
      CHECK(grad[j] ==
            doctest::Approx(fd[j]).epsilon(1e-5).scale(
                std::max(1.0, std::abs(fd[j]))));
    }
  }
}

TEST_CASE("frozen parameters get zero gradient") {
  const ModelSpec spec = detail::build_model_unchecked(ModelVariant::Z, 2);
  const std::vector<double> params = random_params(spec);
  const std::vector<TrainSample> batch = random_batch(spec, 2);
  const FreezePlan one = make_freeze_plan(spec, 1);
  const std::vector<double> grad = gradients(spec, params, batch, one);
  for (int j = 0; j < spec.layer_offsets[1]; ++j) {
    CHECK(grad[static_cast<std::size_t>(j)] == 0.0);
  }
  // And at least one later-layer entry is nonzero.
  double later = 0.0;
  for (int j = spec.layer_offsets[1]; j < spec.total_params; ++j) {
    later += std::abs(grad[static_cast<std::size_t>(j)]);
  }
  CHECK(later > 0.0);
}

TEST_CASE("adam_step leaves frozen entries and their moments untouched") {
  const ModelSpec spec = detail::build_model_unchecked(ModelVariant::N, 2);
  std::vector<double> params = random_params(spec);
  const std::vector<double> before = params;
  std::vector<double> grads(params.size(), 0.5);
  AdamState st{0, std::vector<double>(params.size(), 0.0),
               std::vector<double>(params.size(), 0.0)};
  const FreezePlan one = make_freeze_plan(spec, 1);
  TrainConfig cfg;
  adam_step(params, grads, st, cfg, one);
  for (std::size_t j = 0; j < params.size(); ++j) {
    if (!one.trainable[j]) {
      CHECK(params[j] == before[j]);
      CHECK(st.m[j] == 0.0);
    } else {
      CHECK(params[j] != before[j]);
    }
  }
  // [DERIVED] First bias-corrected Adam step moves by lr exactly when
  // grad is constant and eps is negligible.
  CHECK(before[params.size() - 1] - params[params.size() - 1] ==
        doctest::Approx(cfg.learning_rate).epsilon(1e-6));
}

TEST_CASE("fit reduces the loss and is bitwise deterministic") {
  const ModelSpec spec = detail::build_model_unchecked(ModelVariant::Z, 2);
  const std::vector<TrainSample> data = random_batch(spec, 8);
  std::vector<double> init = random_params(spec);
  TrainConfig cfg;
  cfg.epochs = 12;
  cfg.seed = 5;
  const FreezePlan all = make_freeze_plan(spec, spec.n_layers);
  const FitResult a = fit(spec, init, data, cfg, all);
  CHECK(a.loss_history.size() == 12);
  CHECK(a.loss_history.back() < a.loss_history.front());
  const FitResult b = fit(spec, init, data, cfg, all);
  CHECK(a.params == b.params);
  CHECK(a.loss_history == b.loss_history);
}

TEST_CASE("fit with m layers open only changes those layers") {
  const ModelSpec spec = detail::build_model_unchecked(ModelVariant::G, 2);
  const std::vector<TrainSample> data = random_batch(spec, 4);
  std::vector<double> init = random_params(spec);
  TrainConfig cfg;
  cfg.epochs = 3;
  const FitResult r = fit(spec, init, data, cfg, make_freeze_plan(spec, 1));
  for (int j = 0; j < spec.layer_offsets[1]; ++j) {
    CHECK(r.params[static_cast<std::size_t>(j)] ==
          init[static_cast<std::size_t>(j)]);
  }
}

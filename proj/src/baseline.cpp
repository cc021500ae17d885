#include "aqcnn/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace aqcnn {

namespace {
const double kLn2 = std::log(2.0);

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// CCNN fits use the scalar-target form of the loss: T = 1, so a sample's
// target is the first bit of its code.
double scalar_target(const TrainSample& s) {
  return s.target.bits.empty() ? static_cast<double>(s.label & 1)
                               : static_cast<double>(s.target.bits[0]);
}

struct ForwardTrace {
  std::vector<std::vector<double>> activations;  // per layer, incl. input
  double output = 0.0;
};

ForwardTrace run_forward(const CcnnSpec& spec, std::span<const double> w,
                         std::span<const double> features) {
  if (features.size() != static_cast<std::size_t>(spec.sizes.front())) {
    throw std::invalid_argument("ccnn feature length mismatch");
  }
  ForwardTrace trace;
  trace.activations.emplace_back(features.begin(), features.end());
  std::size_t off = 0;
  const std::size_t n_layers = spec.sizes.size() - 1;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int in = spec.sizes[l];
    const int out = spec.sizes[l + 1];
    const std::vector<double>& x = trace.activations.back();
    std::vector<double> z(static_cast<std::size_t>(out));
    for (int o = 0; o < out; ++o) {
      double s = 0.0;
      for (int i = 0; i < in; ++i) {
        s += w[off + static_cast<std::size_t>(o * in + i)] *
             x[static_cast<std::size_t>(i)];
      }
      s += w[off + static_cast<std::size_t>(out * in + o)];
      z[static_cast<std::size_t>(o)] =
          (l + 1 == n_layers) ? sigmoid(s) : std::tanh(s);
    }
    off += static_cast<std::size_t>(out) * (in + 1);
    trace.activations.push_back(std::move(z));
  }
  trace.output = trace.activations.back()[0];
  return trace;
}
}  // namespace

CcnnSpec build_ccnn(char variant, int n) {
  if ((variant != 'A' && variant != 'B') || (n != 3 && n != 4)) {
    throw std::invalid_argument("ccnn variant must be A/B with n in {3,4}");
  }
  CcnnSpec spec;
  spec.variant = variant;
  spec.n = n;
  if (variant == 'A') {
    spec.sizes = n == 3 ? std::vector<int>{8, 4, 2, 1}
                        : std::vector<int>{16, 8, 4, 2, 1};
    spec.budget = n == 3 ? 49 : 185;
  } else {
    spec.sizes = n == 3 ? std::vector<int>{8, 99, 109, 1}
                        : std::vector<int>{16, 64, 124, 102, 1};
    spec.budget = n == 3 ? 11901 : 22001;
  }
  const int n_layers = static_cast<int>(spec.sizes.size()) - 1;
  for (int l = 0; l < n_layers; ++l) {
    const int count = spec.sizes[static_cast<std::size_t>(l + 1)] *
                      (spec.sizes[static_cast<std::size_t>(l)] + 1);
    // One freeze group per layer; layer count equals n for every shape.
    for (int i = 0; i < count; ++i) spec.param_group.push_back(l);
    spec.total_params += count;
  }
  if (spec.total_params != spec.budget) {
    throw std::logic_error("ccnn parameter count " +
                           std::to_string(spec.total_params) +
                           " misses budget " + std::to_string(spec.budget));
  }
  return spec;
}

std::vector<double> ccnn_init(const CcnnSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> w(static_cast<std::size_t>(spec.total_params));
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < spec.sizes.size(); ++l) {
    const int in = spec.sizes[l];
    const int out = spec.sizes[l + 1];
    const double scale = std::sqrt(6.0 / (in + out));
    for (int i = 0; i < out * (in + 1); ++i) {
      const double u =
          static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
      w[off++] = (2.0 * u - 1.0) * scale;
    }
  }
  return w;
}

FreezePlan ccnn_freeze_plan(const CcnnSpec& spec, int m) {
  if (m < 0 || m > spec.n) {
    throw std::invalid_argument("retraining depth m must be in 0..n");
  }
  FreezePlan plan;
  plan.m = m;
  plan.trainable.resize(static_cast<std::size_t>(spec.total_params));
  const int first_trainable = spec.n - m;
  for (std::size_t i = 0; i < plan.trainable.size(); ++i) {
    plan.trainable[i] = spec.param_group[i] >= first_trainable ? 1 : 0;
  }
  return plan;
}

double ccnn_forward(const CcnnSpec& spec, std::span<const double> weights,
                    std::span<const double> features) {
  return run_forward(spec, weights, features).output;
}

double ccnn_loss(const CcnnSpec& spec, std::span<const double> weights,
                 std::span<const TrainSample> batch) {
  double sum = 0.0;
  for (const TrainSample& s : batch) {
    const double p = std::clamp(ccnn_forward(spec, weights, s.features),
                                tol::kProbClamp, 1.0 - tol::kProbClamp);
    const double y = scalar_target(s);
    sum -= y * std::log2(p) + (1.0 - y) * std::log2(1.0 - p);
  }
  return sum / static_cast<double>(batch.size());
}

std::vector<double> ccnn_gradients(const CcnnSpec& spec,
                                   std::span<const double> weights,
                                   std::span<const TrainSample> batch,
                                   const FreezePlan& freeze) {
  std::vector<double> grad(weights.size(), 0.0);
  const std::size_t n_layers = spec.sizes.size() - 1;

  // Flat offsets per layer.
  std::vector<std::size_t> offsets(n_layers);
  std::size_t off = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    offsets[l] = off;
    off += static_cast<std::size_t>(spec.sizes[l + 1]) * (spec.sizes[l] + 1);
  }

  for (const TrainSample& s : batch) {
    const ForwardTrace trace = run_forward(spec, weights, s.features);
    const double p =
        std::clamp(trace.output, tol::kProbClamp, 1.0 - tol::kProbClamp);
    const double y = scalar_target(s);
    // d(BCE2)/dz for sigmoid output: (p - y) / ln 2.
    std::vector<double> delta{(p - y) / kLn2};

    for (std::size_t l = n_layers; l-- > 0;) {
      const int in = spec.sizes[l];
      const int out = spec.sizes[l + 1];
      const std::vector<double>& x = trace.activations[l];
      std::vector<double> prev_delta(static_cast<std::size_t>(in), 0.0);
      for (int o = 0; o < out; ++o) {
        const double d = delta[static_cast<std::size_t>(o)];
        for (int i = 0; i < in; ++i) {
          grad[offsets[l] + static_cast<std::size_t>(o * in + i)] +=
              d * x[static_cast<std::size_t>(i)];
          prev_delta[static_cast<std::size_t>(i)] +=
              d * weights[offsets[l] + static_cast<std::size_t>(o * in + i)];
        }
        grad[offsets[l] + static_cast<std::size_t>(out * in + o)] += d;
      }
      if (l > 0) {
        // tanh'(z) = 1 - a^2 on the previous layer's activations.
        for (int i = 0; i < in; ++i) {
          const double a = x[static_cast<std::size_t>(i)];
          prev_delta[static_cast<std::size_t>(i)] *= 1.0 - a * a;
        }
      }
      delta = std::move(prev_delta);
    }
  }

  const double inv = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < grad.size(); ++i) {
    grad[i] = freeze.trainable[i] ? grad[i] * inv : 0.0;
  }
  return grad;
}

FitResult ccnn_fit(const CcnnSpec& spec, std::vector<double> init_weights,
                   std::span<const TrainSample> dataset, const TrainConfig& cfg,
                   const FreezePlan& freeze) {
  if (dataset.empty()) {
    throw std::invalid_argument("fit requires a nonempty dataset");
  }
  FitResult result;
  result.params = std::move(init_weights);
  AdamState opt;
  std::mt19937_64 rng(cfg.seed);

  const std::size_t n = dataset.size();
  const std::size_t batch =
      n <= 40 ? n : static_cast<std::size_t>(cfg.batch_size);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::vector<TrainSample> minibatch;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(start + batch, n);
      minibatch.clear();
      for (std::size_t k = start; k < stop; ++k) {
        minibatch.push_back(dataset[order[k]]);
      }
      const std::vector<double> grad =
          ccnn_gradients(spec, result.params, minibatch, freeze);
      adam_step(result.params, grad, opt, cfg, freeze);
    }
    const double loss = ccnn_loss(spec, result.params, dataset);
    if (!std::isfinite(loss)) {
      throw std::runtime_error("non-finite ccnn loss at epoch " +
                               std::to_string(epoch));
    }
    result.loss_history.push_back(loss);
  }
  return result;
}

int ccnn_classify(const CcnnSpec& spec, std::span<const double> weights,
                  std::span<const double> features) {
  return ccnn_forward(spec, weights, features) >= 0.5 ? 1 : 0;
}

}  // namespace aqcnn

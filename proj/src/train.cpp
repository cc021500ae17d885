#include "aqcnn/train.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace aqcnn {

namespace {
constexpr double kHalfPi = std::numbers::pi / 2.0;
const double kLn2 = std::log(2.0);

double clamp_p(double p) {
  return std::clamp(p, tol::kProbClamp, 1.0 - tol::kProbClamp);
}
}  // namespace

TargetBits class_code(int label, int num_classes, int T) {
  if (label < 0 || label >= num_classes) {
    throw std::invalid_argument("label out of range");
  }
  int bits_needed = 1;
  while ((1 << bits_needed) < num_classes) ++bits_needed;
  TargetBits code;
  code.bits.resize(static_cast<std::size_t>(T));
  for (int i = 0; i < T; ++i) {
    code.bits[static_cast<std::size_t>(i)] =
        static_cast<std::uint8_t>((label >> (i % bits_needed)) & 1);
  }
  return code;
}

FreezePlan make_freeze_plan(const ModelSpec& spec, int m) {
  if (m < 0 || m > spec.n_layers) {
    throw std::invalid_argument("retraining depth m must be in 0..n");
  }
  FreezePlan plan;
  plan.m = m;
  plan.trainable.assign(static_cast<std::size_t>(spec.total_params), 0);
  const int first_trainable_layer = spec.n_layers - m;
  for (int layer = first_trainable_layer; layer < spec.n_layers; ++layer) {
    const int off = spec.layer_offsets[static_cast<std::size_t>(layer)];
    const int w = spec.layer_widths[static_cast<std::size_t>(layer)];
    for (int i = off; i < off + w; ++i) {
      plan.trainable[static_cast<std::size_t>(i)] = 1;
    }
  }
  return plan;
}

double bce_loss(std::span<const double> p, const TargetBits& target) {
  if (p.size() != target.bits.size()) {
    throw std::invalid_argument("probability/target length mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = clamp_p(p[i]);
    sum -= target.bits[i] ? std::log2(pi) : std::log2(1.0 - pi);
  }
  return sum / static_cast<double>(p.size());
}

std::vector<double> measured_probs(const ModelSpec& spec,
                                   std::span<const double> params,
                                   std::span<const double> features) {
  const StateVector state = forward(spec, params, features);
  std::vector<double> p;
  p.reserve(spec.measured.size());
  for (int q : spec.measured) p.push_back(marginal_p0(state, q));
  return p;
}

double batch_loss(const ModelSpec& spec, std::span<const double> params,
                  std::span<const TrainSample> batch) {
  double sum = 0.0;
  for (const TrainSample& s : batch) {
    sum += bce_loss(measured_probs(spec, params, s.features), s.target);
  }
  return sum / static_cast<double>(batch.size());
}

namespace {
// Matrices for one shared parameter slice: the composed gate, its adjoint,
// and the exact derivative with respect to each local parameter. The
// derivative is assembled from +-pi/2 parameter shifts at the elementary
// rotations carrying the parameter, which is exact for half-angle gates.
struct GateDerivs {
  Unitary4 u;
  Unitary4 u_dag;
  std::vector<Unitary4> du;  // one per local parameter
};

Unitary4 adjoint(const Unitary4& u) {
  Unitary4 out;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) out.at(r, c) = std::conj(u.at(c, r));
  }
  return out;
}

GateDerivs build_derivs(const AnsatzDef& def, std::span<const double> theta) {
  GateDerivs d;
  d.u = def.matrix(theta);
  d.u_dag = adjoint(d.u);
  d.du.resize(static_cast<std::size_t>(def.arity));
  for (int loc = 0; loc < def.arity; ++loc) {
    Unitary4 sum{};
    for (const auto& [site, coeff] : def.sites_of(loc)) {
      // At the matrix level the exact rotation derivative comes from +-pi
      // shifts: R(a + pi) - R(a - pi) = -2i P R(a), so dR/da is a quarter
      // of the difference. (The familiar +-pi/2 rule holds only after the
      // bilinear contraction into probabilities.)
      const Unitary4 plus = def.matrix_shifted(theta, site, std::numbers::pi);
      const Unitary4 minus = def.matrix_shifted(theta, site, -std::numbers::pi);
      for (std::size_t k = 0; k < 16; ++k) {
        sum.m[k] += coeff * (plus.m[k] - minus.m[k]) / 4.0;
      }
    }
    d.du[static_cast<std::size_t>(loc)] = sum;
  }
  return d;
}

// <lhs| M_local |rhs> where M acts on the (q_a, q_b) pair, q_a high bit.
cplx local_sandwich(const StateVector& lhs, const StateVector& rhs, int q_a,
                    int q_b, const Unitary4& m) {
  const std::size_t sa = std::size_t{1} << (lhs.num_qubits - 1 - q_a);
  const std::size_t sb = std::size_t{1} << (lhs.num_qubits - 1 - q_b);
  const std::size_t dim = lhs.amps.size();
  cplx acc{0.0, 0.0};
  for (std::size_t idx = 0; idx < dim; ++idx) {
    if ((idx & sa) || (idx & sb)) continue;
    const std::size_t i[4] = {idx, idx | sb, idx | sa, idx | sa | sb};
    for (int r = 0; r < 4; ++r) {
      cplx row{0.0, 0.0};
      for (int c = 0; c < 4; ++c) {
        row += m.m[static_cast<std::size_t>(r * 4 + c)]
               * rhs.amps[i[c]];
      }
      acc += std::conj(lhs.amps[i[r]]) * row;
    }
  }
  return acc;
}
}  // namespace

std::vector<double> gradients(const ModelSpec& spec,
                              std::span<const double> params,
                              std::span<const TrainSample> batch,
                              const FreezePlan& freeze) {
  if (params.size() != static_cast<std::size_t>(spec.total_params) ||
      freeze.trainable.size() != params.size()) {
    throw std::invalid_argument("gradient shape mismatch");
  }
  std::vector<double> grad(params.size(), 0.0);
  if (batch.empty()) return grad;

  // Gate matrices and derivatives per shared parameter slice, reused for
  // every instance and every sample in the batch.
  std::map<int, GateDerivs> derivs;
  for (const GateInstance& g : spec.gates) {
    if (derivs.count(g.param_offset)) continue;
    const AnsatzDef& def = spec.def_for(g);
    derivs.emplace(g.param_offset,
                   build_derivs(def, params.subspan(
                                         static_cast<std::size_t>(g.param_offset),
                                         static_cast<std::size_t>(def.arity))));
  }
  // First gate index whose suffix still contains a trainable instance: the
  // backward pass can stop once everything earlier is frozen.
  std::size_t first_needed = spec.gates.size();
  for (std::size_t gi = 0; gi < spec.gates.size(); ++gi) {
    const GateInstance& g = spec.gates[gi];
    const AnsatzDef& def = spec.def_for(g);
    for (int loc = 0; loc < def.arity; ++loc) {
      if (freeze.trainable[static_cast<std::size_t>(g.param_offset + loc)]) {
        first_needed = std::min(first_needed, gi);
        break;
      }
    }
  }

  std::vector<double> dldp(spec.measured.size());
  for (const TrainSample& sample : batch) {
    // Forward pass to the final state |psi>.
    StateVector phi = init_state(spec.num_qubits);
    for (int q = 0; q < spec.num_qubits; ++q) {
      apply_single(phi, q, ry(sample.features[static_cast<std::size_t>(q)]));
    }
    for (const GateInstance& g : spec.gates) {
      apply_two(phi, g.q_a, g.q_b, derivs.at(g.param_offset).u);
    }

    // dL/dp_i, then the effective observable O = sum_i dL/dp_i |0><0|_i,
    // which is diagonal: lambda = O |psi> needs one weighted copy.
    const double T = static_cast<double>(spec.measured.size());
    for (std::size_t i = 0; i < spec.measured.size(); ++i) {
      const double pi = clamp_p(marginal_p0(phi, spec.measured[i]));
      const double b = sample.target.bits[i] ? 1.0 : 0.0;
      dldp[i] = -(b / pi - (1.0 - b) / (1.0 - pi)) / (T * kLn2);
    }
    StateVector lambda = phi;
    for (std::size_t idx = 0; idx < lambda.amps.size(); ++idx) {
      double w = 0.0;
      for (std::size_t i = 0; i < spec.measured.size(); ++i) {
        const std::size_t bit = std::size_t{1}
                                << (spec.num_qubits - 1 - spec.measured[i]);
        if (!(idx & bit)) w += dldp[i];
      }
      lambda.amps[idx] *= w;
    }

    // Adjoint backward sweep: before gate g, phi is the pre-gate state and
    // lambda carries (suffix)^dag O |psi>; the contribution of each local
    // parameter is 2 Re <lambda| dU |phi>. This reproduces the
    // parameter-shift values exactly (the shifts live inside dU).
    for (std::size_t gi = spec.gates.size(); gi-- > first_needed;) {
      const GateInstance& g = spec.gates[gi];
      const GateDerivs& d = derivs.at(g.param_offset);
      apply_two(phi, g.q_a, g.q_b, d.u_dag);
      const AnsatzDef& def = spec.def_for(g);
      for (int loc = 0; loc < def.arity; ++loc) {
        const std::size_t global =
            static_cast<std::size_t>(g.param_offset + loc);
        if (!freeze.trainable[global]) continue;
        grad[global] +=
            2.0 * local_sandwich(lambda, phi, g.q_a, g.q_b,
                                 d.du[static_cast<std::size_t>(loc)])
                      .real();
      }
      if (gi > first_needed) apply_two(lambda, g.q_a, g.q_b, d.u_dag);
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& g : grad) g *= inv;
  return grad;
}

void adam_step(std::vector<double>& params, std::span<const double> grads,
               AdamState& state, const TrainConfig& cfg,
               const FreezePlan& freeze) {
  if (grads.size() != params.size()) {
    throw std::invalid_argument("adam shape mismatch");
  }
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  ++state.t;
  const double bc1 = 1.0 - std::pow(cfg.beta1, state.t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, state.t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!freeze.trainable[i]) continue;
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
  }
}

FitResult fit(const ModelSpec& spec, std::vector<double> init_params,
              std::span<const TrainSample> dataset, const TrainConfig& cfg,
              const FreezePlan& freeze) {
  if (dataset.empty()) {
    throw std::invalid_argument("fit requires a nonempty dataset");
  }
  FitResult result;
  result.params = std::move(init_params);
  AdamState opt;
  std::mt19937_64 rng(cfg.seed);

  const std::size_t n = dataset.size();
  const std::size_t batch = n <= 40
                                ? n
                                : static_cast<std::size_t>(cfg.batch_size);
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
          gradients(spec, result.params, minibatch, freeze);
      adam_step(result.params, grad, opt, cfg, freeze);
    }
    const double loss = batch_loss(spec, result.params, dataset);
    if (!std::isfinite(loss)) {
      std::ostringstream msg;
      msg << "non-finite loss at epoch " << epoch << " (seed " << cfg.seed
          << ", lr " << cfg.learning_rate << ")";
      throw std::runtime_error(msg.str());
    }
    result.loss_history.push_back(loss);
  }
  return result;
}

}  // namespace aqcnn

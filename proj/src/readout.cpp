#include "aqcnn/readout.hpp"

#include <cmath>

namespace aqcnn {

namespace {
constexpr cplx kI{0.0, 1.0};

double dot(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

double norm(const std::array<double, 3>& a) { return std::sqrt(dot(a, a)); }
}  // namespace

std::vector<std::pair<BlochVector, int>> extract_bloch(
    const ModelSpec& spec, std::span<const double> params,
    std::span<const TrainSample> samples) {
  std::vector<std::pair<BlochVector, int>> out;
  out.reserve(samples.size());
  for (const TrainSample& s : samples) {
    const StateVector state = forward(spec, params, s.features);
    out.emplace_back(bloch_vector(state, spec.survivor), s.label);
  }
  return out;
}

std::pair<std::array<double, 3>, double> fit_linear_svm(
    std::span<const BlochVector> points, std::span<const int> labels,
    double c) {
  if (points.size() != labels.size() || points.empty()) {
    throw std::invalid_argument("svm input shape mismatch");
  }
  bool has_pos = false, has_neg = false;
  for (int y : labels) (y > 0 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) {
    throw std::invalid_argument("svm requires both classes present");
  }

  // Class-mean difference as a warm start keeps the descent deterministic
  // and well-conditioned on the unit ball.
  std::array<double, 3> w{0.0, 0.0, 0.0};
  double b = 0.0;
  {
    std::array<double, 3> mp{0, 0, 0}, mn{0, 0, 0};
    int np = 0, nn = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const BlochVector& r = points[i];
      std::array<double, 3> x{r.x, r.y, r.z};
      if (labels[i] > 0) {
        for (int k = 0; k < 3; ++k) mp[k] += x[k];
        ++np;
      } else {
        for (int k = 0; k < 3; ++k) mn[k] += x[k];
        ++nn;
      }
    }
    for (int k = 0; k < 3; ++k) {
      w[k] = mp[k] / np - mn[k] / nn;
      b -= 0.5 * w[k] * (mp[k] / np + mn[k] / nn);
    }
  }

  // Objective: (1/N) sum hinge + lambda/2 ||w||^2 with lambda = 1/(c*N).
  const int iters = 5000;
  const double n_inv = 1.0 / static_cast<double>(points.size());
  const double lambda = n_inv / c;
  for (int t = 1; t <= iters; ++t) {
    std::array<double, 3> gw{lambda * w[0], lambda * w[1], lambda * w[2]};
    double gb = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const BlochVector& r = points[i];
      const std::array<double, 3> x{r.x, r.y, r.z};
      const double y = labels[i] > 0 ? 1.0 : -1.0;
      if (y * (dot(w, x) + b) < 1.0) {
        for (int k = 0; k < 3; ++k) gw[k] -= n_inv * y * x[k];
        gb -= n_inv * y;
      }
    }
    const double eta = 0.5 / std::sqrt(static_cast<double>(t));
    for (int k = 0; k < 3; ++k) w[k] -= eta * gw[k];
    b -= eta * gb;
  }
  if (norm(w) == 0.0) w = {0.0, 0.0, 1.0};
  return {w, b};
}

Unitary2 hyperplane_to_rotation(const std::array<double, 3>& w) {
  const double wn = norm(w);
  if (wn == 0.0) {
    throw std::invalid_argument("hyperplane normal must be nonzero");
  }
  const std::array<double, 3> wh{w[0] / wn, w[1] / wn, w[2] / wn};
  const double cz = std::clamp(wh[2], -1.0, 1.0);
  std::array<double, 3> axis{wh[1], -wh[0], 0.0};  // w x z
  const double an = norm(axis);
  if (an < 1e-14) {
    // w parallel to +-z: identity, or a pi flip about x.
    if (cz > 0.0) return identity2();
    return rx(std::numbers::pi);
  }
  for (double& a : axis) a /= an;
  const double angle = std::acos(cz);
  // exp(-i * angle * (axis . sigma) / 2)
  Unitary2 u;
  const double ch = std::cos(angle / 2.0), sh = std::sin(angle / 2.0);
  u.at(0, 0) = cplx{ch, -sh * axis[2]};
  u.at(0, 1) = cplx{-sh * axis[1], -sh * axis[0]};
  u.at(1, 0) = cplx{sh * axis[1], -sh * axis[0]};
  u.at(1, 1) = cplx{ch, sh * axis[2]};
  return u;
}

DecisionRule make_decision_rule(std::span<const BlochVector> points,
                                std::span<const int> labels, double c) {
  DecisionRule rule;
  auto [w, b] = fit_linear_svm(points, labels, c);
  rule.w = w;
  rule.b = b;
  rule.rotation = hyperplane_to_rotation(w);
  const double wn = norm(w);
  const std::array<double, 3> wh{w[0] / wn, w[1] / wn, w[2] / wn};
  rule.angle = std::acos(std::clamp(wh[2], -1.0, 1.0));
  std::array<double, 3> axis{wh[1], -wh[0], 0.0};
  const double an = norm(axis);
  rule.axis = an < 1e-14 ? std::array<double, 3>{1.0, 0.0, 0.0}
                         : std::array<double, 3>{axis[0] / an, axis[1] / an, 0.0};
  return rule;
}

BlochVector rotate_bloch(const Unitary2& u, const BlochVector& r) {
  // rho = (I + r . sigma) / 2 conjugated by u.
  const cplx rho00{(1.0 + r.z) / 2.0, 0.0};
  const cplx rho01{r.x / 2.0, -r.y / 2.0};
  const cplx rho10 = std::conj(rho01);
  const cplx rho11{(1.0 - r.z) / 2.0, 0.0};
  std::array<cplx, 4> rho{rho00, rho01, rho10, rho11};
  std::array<cplx, 4> tmp{}, out{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        tmp[static_cast<std::size_t>(i * 2 + j)] +=
            u.at(i, k) * rho[static_cast<std::size_t>(k * 2 + j)];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        out[static_cast<std::size_t>(i * 2 + j)] +=
            tmp[static_cast<std::size_t>(i * 2 + k)] * std::conj(u.at(j, k));
  BlochVector s;
  s.x = 2.0 * out[1].real();
  s.y = -2.0 * out[1].imag();
  s.z = (out[0] - out[3]).real();
  return s;
}

int classify_bloch(const DecisionRule& rule, const BlochVector& r) {
  const double score = rule.w[0] * r.x + rule.w[1] * r.y + rule.w[2] * r.z +
                       rule.b;
  return score >= 0.0 ? 1 : 0;
}

int classify(const ModelSpec& spec, std::span<const double> params,
             const DecisionRule& rule, std::span<const double> features) {
  const StateVector state = forward(spec, params, features);
  return classify_bloch(rule, bloch_vector(state, spec.survivor));
}

}  // namespace aqcnn

#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "aqcnn/train.hpp"

namespace aqcnn {

struct DecisionRule {
  std::array<double, 3> w{0.0, 0.0, 1.0};
  double b = 0.0;
  std::array<double, 3> axis{1.0, 0.0, 0.0};  // alignment rotation axis
  double angle = 0.0;                         // alignment rotation angle
  Unitary2 rotation = identity2();
};

std::vector<std::pair<BlochVector, int>> extract_bloch(
    const ModelSpec& spec, std::span<const double> params,
    std::span<const TrainSample> samples);

// Soft-margin linear SVM on Bloch-sphere points via deterministic full-batch
// subgradient descent on the primal hinge objective. labels are +-1.
std::pair<std::array<double, 3>, double> fit_linear_svm(
    std::span<const BlochVector> points, std::span<const int> labels,
    double c = 1.0);

// Single-qubit rotation whose Bloch-sphere action maps w/|w| onto +z.
Unitary2 hyperplane_to_rotation(const std::array<double, 3>& w);

DecisionRule make_decision_rule(std::span<const BlochVector> points,
                                std::span<const int> labels, double c = 1.0);

// Bloch vector of the state U|psi> restricted to one qubit, used to check
// the rotation against the sign rule.
BlochVector rotate_bloch(const Unitary2& u, const BlochVector& r);

int classify_bloch(const DecisionRule& rule, const BlochVector& r);
int classify(const ModelSpec& spec, std::span<const double> params,
             const DecisionRule& rule, std::span<const double> features);

}  // namespace aqcnn

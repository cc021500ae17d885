#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "aqcnn/ansatz.hpp"

namespace aqcnn {

// One target bit per measured qubit (T = num_qubits - 1).
struct TargetBits {
  std::vector<std::uint8_t> bits;
};

// Binary labels set every bit to the label; multi-class labels use the
// class's binary index cyclically extended to length T.
TargetBits class_code(int label, int num_classes, int T);

struct TrainSample {
  std::vector<double> features;
  TargetBits target;
  int label = 0;
};

// m = number of retrained (later) layers; the first n - m layers are frozen.
struct FreezePlan {
  int m = 0;
  std::vector<std::uint8_t> trainable;
};

FreezePlan make_freeze_plan(const ModelSpec& spec, int m);

struct TrainConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 32;
  int epochs = 30;
  std::uint64_t seed = 0;
};

// Mean base-2 binary cross-entropy; p[i] is the probability of measuring
// |0> on qubit i and a target bit of 1 scores -log2(p[i]): label 1 drives
// the measured qubits toward |0>, label 0 toward |1>.
double bce_loss(std::span<const double> p, const TargetBits& target);

// Probabilities of |0> on each measured qubit after the full circuit.
std::vector<double> measured_probs(const ModelSpec& spec,
                                   std::span<const double> params,
                                   std::span<const double> features);

double batch_loss(const ModelSpec& spec, std::span<const double> params,
                  std::span<const TrainSample> batch);

// Parameter-shift gradient of the mean batch loss. Probabilities are
// differentiated with +-pi/2 shifts on each rotation carrying the parameter
// (exact for half-angle gates) and combined through the loss analytically.
std::vector<double> gradients(const ModelSpec& spec,
                              std::span<const double> params,
                              std::span<const TrainSample> batch,
                              const FreezePlan& freeze);

struct AdamState {
  int t = 0;
  std::vector<double> m;
  std::vector<double> v;
};

void adam_step(std::vector<double>& params, std::span<const double> grads,
               AdamState& state, const TrainConfig& cfg,
               const FreezePlan& freeze);

struct FitResult {
  std::vector<double> params;
  std::vector<double> loss_history;
};

FitResult fit(const ModelSpec& spec, std::vector<double> init_params,
              std::span<const TrainSample> dataset, const TrainConfig& cfg,
              const FreezePlan& freeze);

}  // namespace aqcnn

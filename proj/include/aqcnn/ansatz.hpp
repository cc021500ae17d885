#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aqcnn/statevec.hpp"

namespace aqcnn {

enum class ModelVariant { N, Z, G };

std::string variant_name(ModelVariant v);
ModelVariant variant_from_name(const std::string& name);
int pooling_width(ModelVariant v);  // 0, 2 or 6

// One elementary operation inside a two-qubit ansatz. Wire 0 is the first
// qubit handed to apply_two (the high bit of the local basis index).
struct AnsatzOp {
  enum class Kind { Rot, Cnot, Fixed } kind = Kind::Rot;
  // Rot: angle = sum(coeff_i * theta[param_i]) + offset, about `axis`.
  int wire = 0;
  char axis = 'z';
  std::vector<std::pair<int, double>> terms;  // (param index, coefficient)
  double offset = 0.0;
  // Cnot: control/target wires.
  int control = 0, target = 1;
  // Fixed: parameter-free single-qubit unitary on `wire`.
  Unitary2 fixed;

  double angle(std::span<const double> theta) const;
};

// A parameterized two-qubit circuit given as an ordered elementary-gate list.
// Keeping the elementary structure (rather than only the composed matrix)
// lets gradients shift individual rotation angles by +-pi/2, which is exact
// for half-angle rotations even when a parameter feeds several rotations.
struct AnsatzDef {
  int arity = 0;
  std::vector<AnsatzOp> ops;

  Unitary4 matrix(std::span<const double> theta) const;
  // Same as matrix() with `shift` added to the angle of ops[site].
  Unitary4 matrix_shifted(std::span<const double> theta, int site,
                          double shift) const;
  // All (op index, coefficient) pairs through which `param` enters.
  std::vector<std::pair<int, double>> sites_of(int param) const;
};

const AnsatzDef& conv_ansatz_def();
const AnsatzDef& zx_pooling_def();
const AnsatzDef& gen_pooling_def();

Unitary4 conv_ansatz(std::span<const double> theta);
Unitary4 zx_pooling(std::span<const double> theta);
Unitary4 gen_pooling(std::span<const double> theta);

// One gate placement in the assembled circuit. Instances within a layer
// share parameters: param_offset points at the layer's slice of the flat
// parameter vector.
struct GateInstance {
  int layer = 0;
  bool is_pooling = false;
  int q_a = 0, q_b = 0;
  int param_offset = 0;
};

struct ModelSpec {
  ModelVariant variant = ModelVariant::N;
  int n_layers = 0;
  int num_qubits = 0;
  std::vector<GateInstance> gates;            // circuit order
  std::vector<std::vector<int>> active_sets;  // active qubits entering layer k
  std::vector<std::vector<std::pair<int, int>>> pooling_pairs;  // (ctl, tgt)
  int survivor = 0;
  std::vector<int> measured;
  std::vector<int> layer_offsets;
  std::vector<int> layer_widths;
  int total_params = 0;

  const AnsatzDef& def_for(const GateInstance& g) const;
  std::string to_json() const;
};

ModelSpec build_model(ModelVariant variant, int n);

namespace detail {
// Same wiring rules without the n range check; reduced instances (n = 2)
// keep oracle tests cheap.
ModelSpec build_model_unchecked(ModelVariant variant, int n);
}  // namespace detail

StateVector forward(const ModelSpec& spec, std::span<const double> params,
                    std::span<const double> features);

}  // namespace aqcnn

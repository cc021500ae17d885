#include "aqcnn/ansatz.hpp"

#include <cmath>
#include <numbers>

#include "json.hpp"

namespace aqcnn {

namespace {
constexpr double kPi = std::numbers::pi;

AnsatzOp rot(char axis, int wire, std::vector<std::pair<int, double>> terms,
             double offset = 0.0) {
  AnsatzOp op;
  op.kind = AnsatzOp::Kind::Rot;
  op.axis = axis;
  op.wire = wire;
  op.terms = std::move(terms);
  op.offset = offset;
  return op;
}

AnsatzOp cnot(int control, int target) {
  AnsatzOp op;
  op.kind = AnsatzOp::Kind::Cnot;
  op.control = control;
  op.target = target;
  return op;
}

AnsatzOp fixed1(int wire, const Unitary2& u) {
  AnsatzOp op;
  op.kind = AnsatzOp::Kind::Fixed;
  op.wire = wire;
  op.fixed = u;
  return op;
}

Unitary2 hadamard() {
  Unitary2 u;
  const double s = 1.0 / std::sqrt(2.0);
  u.at(0, 0) = s;
  u.at(0, 1) = s;
  u.at(1, 0) = s;
  u.at(1, 1) = -s;
  return u;
}

Unitary4 cnot4(int control) {
  // control 0: |1x> -> |1, x^1>; control 1: |x1> -> |x^1, 1>.
  Unitary4 u;
  if (control == 0) {
    u.at(0, 0) = u.at(1, 1) = 1.0;
    u.at(2, 3) = u.at(3, 2) = 1.0;
  } else {
    u.at(0, 0) = u.at(3, 1) = 1.0;
    u.at(1, 3) = u.at(2, 2) = 1.0;
  }
  return u;
}

Unitary4 embed1(int wire, const Unitary2& u) {
  return wire == 0 ? kron(u, identity2()) : kron(identity2(), u);
}

// General single-qubit Euler rotation: circuit order Rz(a), Ry(b), Rz(c),
// acting on `wire` with parameter indices pa, pb, pc.
void append_euler(std::vector<AnsatzOp>& ops, int wire, int pa, int pb,
                  int pc) {
  ops.push_back(rot('z', wire, {{pa, 1.0}}));
  ops.push_back(rot('y', wire, {{pb, 1.0}}));
  ops.push_back(rot('z', wire, {{pc, 1.0}}));
}

// Controlled-Rz with control on wire 0 and a single parameter entering with
// coefficient `c`: block-diag(I, Rz(c * theta[param])).
void append_crz(std::vector<AnsatzOp>& ops, int param, double c) {
  ops.push_back(cnot(0, 1));
  ops.push_back(rot('z', 1, {{param, -0.5 * c}}));
  ops.push_back(cnot(0, 1));
  ops.push_back(rot('z', 1, {{param, 0.5 * c}}));
}

// Controlled-U on control = |1>, U = Rz(theta[pc]) Ry(theta[pb]) Rz(theta[pa])
// as a matrix (circuit order Rz(a), Ry(b), Rz(c)). ABC decomposition with two
// CNOTs; U is special-unitary so no control phase is needed.
void append_controlled_euler(std::vector<AnsatzOp>& ops, int pa, int pb,
                             int pc) {
  ops.push_back(rot('z', 1, {{pa, 0.5}, {pc, -0.5}}));
  ops.push_back(cnot(0, 1));
  ops.push_back(rot('z', 1, {{pa, -0.5}, {pc, -0.5}}));
  ops.push_back(rot('y', 1, {{pb, -0.5}}));
  ops.push_back(cnot(0, 1));
  ops.push_back(rot('y', 1, {{pb, 0.5}}));
  ops.push_back(rot('z', 1, {{pc, 1.0}}));
}

AnsatzDef make_conv_def() {
  AnsatzDef def;
  def.arity = 15;
  // Shende-Bullock-Markov style universal SU(4) circuit: general rotations
  // on both wires, a 3-parameter core with 3 CNOTs, general rotations again.
  append_euler(def.ops, 0, 0, 1, 2);
  append_euler(def.ops, 1, 3, 4, 5);
  def.ops.push_back(cnot(1, 0));
  def.ops.push_back(rot('z', 0, {{6, 1.0}}));
  def.ops.push_back(rot('y', 1, {{7, 1.0}}));
  def.ops.push_back(cnot(0, 1));
  def.ops.push_back(rot('y', 1, {{8, 1.0}}));
  def.ops.push_back(cnot(1, 0));
  append_euler(def.ops, 0, 9, 10, 11);
  append_euler(def.ops, 1, 12, 13, 14);
  return def;
}

AnsatzDef make_zx_def() {
  AnsatzDef def;
  def.arity = 2;
  // Rz(theta0) on the target when the control is |1>.
  append_crz(def.ops, 0, 1.0);
  // Rx(theta1) on the target when the control is |0>: X-conjugate the
  // control, H-conjugate the target around a controlled-Rz.
  def.ops.push_back(fixed1(0, pauli_x()));
  def.ops.push_back(fixed1(1, hadamard()));
  append_crz(def.ops, 1, 1.0);
  def.ops.push_back(fixed1(1, hadamard()));
  def.ops.push_back(fixed1(0, pauli_x()));
  return def;
}

AnsatzDef make_gen_def() {
  AnsatzDef def;
  def.arity = 6;
  // Arbitrary SU(2) on the target for control |1> (theta 0..2), then for
  // control |0> (theta 3..5).
  append_controlled_euler(def.ops, 0, 1, 2);
  def.ops.push_back(fixed1(0, pauli_x()));
  append_controlled_euler(def.ops, 3, 4, 5);
  def.ops.push_back(fixed1(0, pauli_x()));
  return def;
}
}  // namespace

double AnsatzOp::angle(std::span<const double> theta) const {
  double a = offset;
  for (const auto& [p, c] : terms) a += c * theta[static_cast<std::size_t>(p)];
  return a;
}

Unitary4 AnsatzDef::matrix(std::span<const double> theta) const {
  return matrix_shifted(theta, -1, 0.0);
}

Unitary4 AnsatzDef::matrix_shifted(std::span<const double> theta, int site,
                                   double shift) const {
  if (theta.size() != static_cast<std::size_t>(arity)) {
    throw std::invalid_argument("ansatz expects " + std::to_string(arity) +
                                " parameters, got " +
                                std::to_string(theta.size()));
  }
  Unitary4 u = identity4();
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const AnsatzOp& op = ops[i];
    Unitary4 g;
    switch (op.kind) {
      case AnsatzOp::Kind::Cnot:
        g = cnot4(op.control);
        break;
      case AnsatzOp::Kind::Fixed:
        g = embed1(op.wire, op.fixed);
        break;
      case AnsatzOp::Kind::Rot: {
        double a = op.angle(theta);
        if (static_cast<int>(i) == site) a += shift;
        Unitary2 r;
        switch (op.axis) {
          case 'x': r = rx(a); break;
          case 'y': r = ry(a); break;
          default: r = rz(a); break;
        }
        g = embed1(op.wire, r);
        break;
      }
    }
    u = matmul(g, u);
  }
  return u;
}

std::vector<std::pair<int, double>> AnsatzDef::sites_of(int param) const {
  std::vector<std::pair<int, double>> sites;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    for (const auto& [p, c] : ops[i].terms) {
      if (p == param) sites.emplace_back(static_cast<int>(i), c);
    }
  }
  return sites;
}

const AnsatzDef& conv_ansatz_def() {
  static const AnsatzDef def = make_conv_def();
  return def;
}

const AnsatzDef& zx_pooling_def() {
  static const AnsatzDef def = make_zx_def();
  return def;
}

const AnsatzDef& gen_pooling_def() {
  static const AnsatzDef def = make_gen_def();
  return def;
}

Unitary4 conv_ansatz(std::span<const double> theta) {
  return conv_ansatz_def().matrix(theta);
}

Unitary4 zx_pooling(std::span<const double> theta) {
  return zx_pooling_def().matrix(theta);
}

Unitary4 gen_pooling(std::span<const double> theta) {
  return gen_pooling_def().matrix(theta);
}

std::string variant_name(ModelVariant v) {
  switch (v) {
    case ModelVariant::N: return "qcnn-n";
    case ModelVariant::Z: return "qcnn-z";
    case ModelVariant::G: return "qcnn-g";
  }
  return "?";
}

ModelVariant variant_from_name(const std::string& name) {
  if (name == "qcnn-n") return ModelVariant::N;
  if (name == "qcnn-z") return ModelVariant::Z;
  if (name == "qcnn-g") return ModelVariant::G;
  throw std::invalid_argument("unknown QCNN variant: " + name);
}

int pooling_width(ModelVariant v) {
  switch (v) {
    case ModelVariant::N: return 0;
    case ModelVariant::Z: return 2;
    case ModelVariant::G: return 6;
  }
  return 0;
}

const AnsatzDef& ModelSpec::def_for(const GateInstance& g) const {
  if (!g.is_pooling) return conv_ansatz_def();
  return variant == ModelVariant::Z ? zx_pooling_def() : gen_pooling_def();
}

namespace {
ModelSpec build_model_any(ModelVariant variant, int n) {
  ModelSpec spec;
  spec.variant = variant;
  spec.n_layers = n;
  spec.num_qubits = 1 << n;
  const int pool_w = pooling_width(variant);
  const int layer_w = 15 + pool_w;

  std::vector<int> active(static_cast<std::size_t>(spec.num_qubits));
  for (int q = 0; q < spec.num_qubits; ++q) active[static_cast<std::size_t>(q)] = q;

  for (int layer = 0; layer < n; ++layer) {
    spec.active_sets.push_back(active);
    spec.layer_offsets.push_back(layer * layer_w);
    spec.layer_widths.push_back(layer_w);
    const int conv_off = layer * layer_w;
    const int pool_off = conv_off + 15;
    const std::size_t sz = active.size();

    // Sublayer 1: consecutive disjoint pairs.
    for (std::size_t i = 0; i + 1 < sz; i += 2) {
      spec.gates.push_back({layer, false, active[i], active[i + 1], conv_off});
    }
    // Sublayer 2: shifted ring, wrapping back to the first active qubit.
    for (std::size_t i = 1; i < sz; i += 2) {
      spec.gates.push_back(
          {layer, false, active[i], active[(i + 1) % sz], conv_off});
    }
    // Pooling pairs reuse sublayer 1 with (control, target) roles; the
    // control is discarded afterwards. QCNN-N discards without a gate.
    std::vector<std::pair<int, int>> pairs;
    std::vector<int> next;
    for (std::size_t i = 0; i + 1 < sz; i += 2) {
      pairs.emplace_back(active[i], active[i + 1]);
      next.push_back(active[i + 1]);
      if (variant != ModelVariant::N) {
        spec.gates.push_back({layer, true, active[i], active[i + 1], pool_off});
      }
    }
    spec.pooling_pairs.push_back(std::move(pairs));
    active = std::move(next);
  }

  spec.survivor = active.front();
  for (int q = 0; q < spec.num_qubits; ++q) {
    if (q != spec.survivor) spec.measured.push_back(q);
  }
  spec.total_params = n * layer_w;
  return spec;
}
}  // namespace

ModelSpec build_model(ModelVariant variant, int n) {
  if (n != 3 && n != 4) {
    throw std::invalid_argument("n must be 3 or 4, got " + std::to_string(n));
  }
  return build_model_any(variant, n);
}

namespace detail {
ModelSpec build_model_unchecked(ModelVariant variant, int n) {
  return build_model_any(variant, n);
}
}  // namespace detail

StateVector forward(const ModelSpec& spec, std::span<const double> params,
                    std::span<const double> features) {
  if (params.size() != static_cast<std::size_t>(spec.total_params)) {
    throw std::invalid_argument("parameter vector length mismatch");
  }
  if (features.size() != static_cast<std::size_t>(spec.num_qubits)) {
    throw std::invalid_argument("feature vector length mismatch");
  }
  StateVector state = init_state(spec.num_qubits);
  for (int q = 0; q < spec.num_qubits; ++q) {
    apply_single(state, q, ry(features[static_cast<std::size_t>(q)]));
  }
  // Shared parameters: the composed matrix is identical for every instance
  // with the same param_offset, so compose once per (layer, kind).
  int cached_off = -1;
  bool cached_pool = false;
  Unitary4 cached;
  for (const GateInstance& g : spec.gates) {
    if (g.param_offset != cached_off || g.is_pooling != cached_pool) {
      const AnsatzDef& def = spec.def_for(g);
      cached = def.matrix(params.subspan(
          static_cast<std::size_t>(g.param_offset),
          static_cast<std::size_t>(def.arity)));
      cached_off = g.param_offset;
      cached_pool = g.is_pooling;
    }
    apply_two(state, g.q_a, g.q_b, cached);
  }
  return state;
}

std::string ModelSpec::to_json() const {
  nlohmann::json j;
  j["variant"] = variant_name(variant);
  j["n_layers"] = n_layers;
  j["num_qubits"] = num_qubits;
  j["total_params"] = total_params;
  j["survivor"] = survivor;
  j["measured"] = measured;
  j["layer_offsets"] = layer_offsets;
  j["layer_widths"] = layer_widths;
  j["active_sets"] = active_sets;
  j["pooling_pairs"] = pooling_pairs;
  nlohmann::json gs = nlohmann::json::array();
  for (const GateInstance& g : gates) {
    gs.push_back({{"layer", g.layer},
                  {"pooling", g.is_pooling},
                  {"qubits", {g.q_a, g.q_b}},
                  {"param_offset", g.param_offset}});
  }
  j["gates"] = gs;
  return j.dump(2);
}

}  // namespace aqcnn

#include "aqcnn/statevec.hpp"

#include <cmath>

namespace aqcnn {

namespace {
constexpr cplx kI{0.0, 1.0};

void check_qubit(const StateVector& state, int qubit) {
  if (qubit < 0 || qubit >= state.num_qubits) {
    throw std::invalid_argument("qubit index " + std::to_string(qubit) +
                                " out of range for " +
                                std::to_string(state.num_qubits) + " qubits");
  }
}
}  // namespace

Unitary2 matmul(const Unitary2& a, const Unitary2& b) {
  Unitary2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      cplx s = 0.0;
      for (int k = 0; k < 2; ++k) s += a.at(i, k) * b.at(k, j);
      r.at(i, j) = s;
    }
  return r;
}

Unitary4 matmul(const Unitary4& a, const Unitary4& b) {
  Unitary4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      cplx s = 0.0;
      for (int k = 0; k < 4; ++k) s += a.at(i, k) * b.at(k, j);
      r.at(i, j) = s;
    }
  return r;
}

Unitary4 kron(const Unitary2& a, const Unitary2& b) {
  Unitary4 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          r.at(i * 2 + k, j * 2 + l) = a.at(i, j) * b.at(k, l);
  return r;
}

namespace {
template <typename U, int N>
bool is_unitary_impl(const U& u, double tol) {
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      cplx s = 0.0;
      for (int k = 0; k < N; ++k) s += std::conj(u.at(k, i)) * u.at(k, j);
      if (std::abs(s - (i == j ? 1.0 : 0.0)) > tol) return false;
    }
  return true;
}
}  // namespace

bool is_unitary(const Unitary2& u, double tol) {
  return is_unitary_impl<Unitary2, 2>(u, tol);
}
bool is_unitary(const Unitary4& u, double tol) {
  return is_unitary_impl<Unitary4, 4>(u, tol);
}

Unitary2 identity2() {
  Unitary2 u;
  u.at(0, 0) = u.at(1, 1) = 1.0;
  return u;
}

Unitary4 identity4() {
  Unitary4 u;
  for (int i = 0; i < 4; ++i) u.at(i, i) = 1.0;
  return u;
}

Unitary2 rx(double theta) {
  Unitary2 u;
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  u.at(0, 0) = c;
  u.at(0, 1) = -kI * s;
  u.at(1, 0) = -kI * s;
  u.at(1, 1) = c;
  return u;
}

Unitary2 ry(double theta) {
  Unitary2 u;
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  u.at(0, 0) = c;
  u.at(0, 1) = -s;
  u.at(1, 0) = s;
  u.at(1, 1) = c;
  return u;
}

Unitary2 rz(double theta) {
  Unitary2 u;
  u.at(0, 0) = std::exp(-kI * (theta / 2));
  u.at(1, 1) = std::exp(kI * (theta / 2));
  return u;
}

Unitary2 pauli_x() {
  Unitary2 u;
  u.at(0, 1) = u.at(1, 0) = 1.0;
  return u;
}

double StateVector::norm_sq() const {
  double s = 0.0;
  for (const cplx& a : amps) s += std::norm(a);
  return s;
}

StateVector init_state(int num_qubits) {
  if (num_qubits < 1 || num_qubits > 16) {
    throw std::invalid_argument("num_qubits must be in 1..16, got " +
                                std::to_string(num_qubits));
  }
  StateVector st;
  st.num_qubits = num_qubits;
  st.amps.assign(std::size_t{1} << num_qubits, cplx{0.0, 0.0});
  st.amps[0] = 1.0;
  return st;
}

void apply_single(StateVector& state, int qubit, const Unitary2& u) {
  check_qubit(state, qubit);
  const std::size_t stride = std::size_t{1}
                             << (state.num_qubits - 1 - qubit);
  const std::size_t dim = state.amps.size();
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) {
      const cplx a0 = state.amps[i];
      const cplx a1 = state.amps[i + stride];
      state.amps[i] = u.m[0] * a0 + u.m[1] * a1;
      state.amps[i + stride] = u.m[2] * a0 + u.m[3] * a1;
    }
  }
}

void apply_two(StateVector& state, int q_a, int q_b, const Unitary4& u) {
  check_qubit(state, q_a);
  check_qubit(state, q_b);
  if (q_a == q_b) {
    throw std::invalid_argument("apply_two requires distinct qubits");
  }
  const std::size_t sa = std::size_t{1} << (state.num_qubits - 1 - q_a);
  const std::size_t sb = std::size_t{1} << (state.num_qubits - 1 - q_b);
  const std::size_t dim = state.amps.size();
  for (std::size_t idx = 0; idx < dim; ++idx) {
    if ((idx & sa) || (idx & sb)) continue;
    const std::size_t i00 = idx;
    const std::size_t i01 = idx | sb;
    const std::size_t i10 = idx | sa;
    const std::size_t i11 = idx | sa | sb;
    const cplx a0 = state.amps[i00];
    const cplx a1 = state.amps[i01];
    const cplx a2 = state.amps[i10];
    const cplx a3 = state.amps[i11];
    state.amps[i00] = u.m[0] * a0 + u.m[1] * a1 + u.m[2] * a2 + u.m[3] * a3;
    state.amps[i01] = u.m[4] * a0 + u.m[5] * a1 + u.m[6] * a2 + u.m[7] * a3;
    state.amps[i10] = u.m[8] * a0 + u.m[9] * a1 + u.m[10] * a2 + u.m[11] * a3;
    state.amps[i11] = u.m[12] * a0 + u.m[13] * a1 + u.m[14] * a2 + u.m[15] * a3;
  }
}

double marginal_p0(const StateVector& state, int qubit) {
  check_qubit(state, qubit);
  const std::size_t bit = std::size_t{1} << (state.num_qubits - 1 - qubit);
  double p0 = 0.0;
  for (std::size_t i = 0; i < state.amps.size(); ++i) {
    if (!(i & bit)) p0 += std::norm(state.amps[i]);
  }
  return p0;
}

BlochVector bloch_vector(const StateVector& state, int qubit) {
  check_qubit(state, qubit);
  const std::size_t bit = std::size_t{1} << (state.num_qubits - 1 - qubit);
  // Reduced density matrix entries rho00, rho01 (rho11 = 1 - rho00).
  double rho00 = 0.0;
  cplx rho01 = 0.0;
  for (std::size_t i = 0; i < state.amps.size(); ++i) {
    if (i & bit) continue;
    rho00 += std::norm(state.amps[i]);
    rho01 += state.amps[i] * std::conj(state.amps[i | bit]);
  }
  BlochVector b;
  b.x = 2.0 * rho01.real();
  b.y = -2.0 * rho01.imag();
  b.z = 2.0 * rho00 - 1.0;
  return b;
}

}  // namespace aqcnn

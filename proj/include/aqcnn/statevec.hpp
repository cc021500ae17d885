#pragma once

#include <array>
#include <vector>

#include "aqcnn/common.hpp"

namespace aqcnn {

// Row-major 2x2 complex matrix.
struct Unitary2 {
  std::array<cplx, 4> m{};
  cplx& at(int r, int c) { return m[static_cast<std::size_t>(r) * 2 + c]; }
  cplx at(int r, int c) const { return m[static_cast<std::size_t>(r) * 2 + c]; }
};

// Row-major 4x4 complex matrix. The two-qubit basis is |q_a q_b>: the first
// qubit argument of apply_two is the high bit of the local index.
struct Unitary4 {
  std::array<cplx, 16> m{};
  cplx& at(int r, int c) { return m[static_cast<std::size_t>(r) * 4 + c]; }
  cplx at(int r, int c) const { return m[static_cast<std::size_t>(r) * 4 + c]; }
};

Unitary2 matmul(const Unitary2& a, const Unitary2& b);
Unitary4 matmul(const Unitary4& a, const Unitary4& b);
Unitary4 kron(const Unitary2& a, const Unitary2& b);
bool is_unitary(const Unitary2& u, double tol = tol::kUnitary);
bool is_unitary(const Unitary4& u, double tol = tol::kUnitary);

Unitary2 identity2();
Unitary4 identity4();
// Half-angle rotation convention: R_a(theta) = exp(-i * theta * A / 2).
Unitary2 rx(double theta);
Unitary2 ry(double theta);
Unitary2 rz(double theta);
Unitary2 pauli_x();

// Dense statevector over up to 16 qubits. Qubit 0 is the most significant
// bit of the basis index.
struct StateVector {
  int num_qubits = 0;
  std::vector<cplx> amps;

  double norm_sq() const;
};

StateVector init_state(int num_qubits);
void apply_single(StateVector& state, int qubit, const Unitary2& u);
void apply_two(StateVector& state, int q_a, int q_b, const Unitary4& u);
double marginal_p0(const StateVector& state, int qubit);

struct BlochVector {
  double x = 0.0, y = 0.0, z = 0.0;
};

BlochVector bloch_vector(const StateVector& state, int qubit);

}  // namespace aqcnn

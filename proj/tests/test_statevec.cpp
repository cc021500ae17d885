#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "aqcnn/statevec.hpp"
#include "doctest.h"

using namespace aqcnn;

namespace {

// Independent dense oracle: embed a local gate into the full 2^n x 2^n
// operator and apply it by matrix-vector product. Qubit 0 is the most
// significant bit of the basis index.
int bit_of(int index, int qubit, int n) { return (index >> (n - 1 - qubit)) & 1; }

std::vector<cplx> dense_single(const std::vector<cplx>& amps, int n, int qubit,
                               const Unitary2& u) {
  const int dim = 1 << n;
  std::vector<cplx> out(amps.size(), cplx{0.0, 0.0});
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      if ((r & ~(1 << (n - 1 - qubit))) != (c & ~(1 << (n - 1 - qubit)))) {
        continue;
      }
      out[r] += u.at(bit_of(r, qubit, n), bit_of(c, qubit, n)) * amps[c];
    }
  }
  return out;
}

std::vector<cplx> dense_two(const std::vector<cplx>& amps, int n, int q_a,
                            int q_b, const Unitary4& u) {
  const int dim = 1 << n;
  const int mask = (1 << (n - 1 - q_a)) | (1 << (n - 1 - q_b));
  std::vector<cplx> out(amps.size(), cplx{0.0, 0.0});
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      if ((r & ~mask) != (c & ~mask)) continue;
      const int lr = (bit_of(r, q_a, n) << 1) | bit_of(r, q_b, n);
      const int lc = (bit_of(c, q_a, n) << 1) | bit_of(c, q_b, n);
      out[r] += u.at(lr, lc) * amps[c];
    }
  }
  return out;
}

std::mt19937_64 rng(12345);

double uniform_angle() {
  return 2.0 * std::numbers::pi * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

StateVector random_state(int n) {
  StateVector s = init_state(n);
  std::normal_distribution<double> g(0.0, 1.0);
  double norm = 0.0;
  for (cplx& a : s.amps) {
    a = cplx{g(rng), g(rng)};
    norm += std::norm(a);
  }
  norm = std::sqrt(norm);
  for (cplx& a : s.amps) a /= norm;
  return s;
}

Unitary2 random_rotation() {
  switch (rng() % 3) {
    case 0:
      return rx(uniform_angle());
    case 1:
      return ry(uniform_angle());
    default:
      return rz(uniform_angle());
  }
}

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max(d, std::abs(a[i] - b[i]));
  }
  return d;
}

}  // namespace

TEST_CASE("init_state is |0...0> and rejects bad sizes") {
  const StateVector s = init_state(3);
  CHECK(s.amps.size() == 8);
  CHECK(std::abs(s.amps[0] - cplx{1.0, 0.0}) == 0.0);  // [TRIVIAL]
  CHECK(s.norm_sq() == doctest::Approx(1.0));
  CHECK_THROWS_AS(init_state(0), std::invalid_argument);
  CHECK_THROWS_AS(init_state(17), std::invalid_argument);
}

TEST_CASE("rotation matrices use the half-angle convention") {
  // [DERIVED] Ry(pi)|0> = |1> exactly (no global phase) in this convention.
  const Unitary2 u = ry(std::numbers::pi);
  CHECK(std::abs(u.at(1, 0) - cplx{1.0, 0.0}) < 1e-15);
  CHECK(std::abs(u.at(0, 0)) < 1e-15);
  // [DERIVED] Rz(theta) = diag(e^{-i theta/2}, e^{+i theta/2}).
  const double th = 0.731;
  const Unitary2 z = rz(th);
  CHECK(std::abs(z.at(0, 0) - std::exp(cplx{0.0, -th / 2})) < 1e-15);
  CHECK(std::abs(z.at(1, 1) - std::exp(cplx{0.0, th / 2})) < 1e-15);
  CHECK(std::abs(z.at(0, 1)) == 0.0);
}

TEST_CASE("kron matches element-wise definition") {
  const Unitary2 a = rx(0.3), b = ry(1.1);
  const Unitary4 k = kron(a, b);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      const cplx want = a.at(r >> 1, c >> 1) * b.at(r & 1, c & 1);
      CHECK(std::abs(k.at(r, c) - want) < 1e-15);
    }
  }
}

TEST_CASE("apply_single matches the dense oracle on 1..4 qubits") {
  for (int n = 1; n <= 4; ++n) {
    for (int rep = 0; rep < 8; ++rep) {
      StateVector s = random_state(n);
      const std::vector<cplx> before = s.amps;
      const int q = static_cast<int>(rng() % n);
      const Unitary2 u = random_rotation();
      const std::vector<cplx> want = dense_single(before, n, q, u);
      apply_single(s, q, u);
      CHECK(max_diff(s.amps, want) < tol::kOracle);
    }
  }
}

TEST_CASE("apply_two matches the dense oracle for all qubit pairs") {
  for (int n = 2; n <= 4; ++n) {
    for (int q_a = 0; q_a < n; ++q_a) {
      for (int q_b = 0; q_b < n; ++q_b) {
        if (q_a == q_b) continue;
        StateVector s = random_state(n);
        const std::vector<cplx> before = s.amps;
        std::vector<double> th(15);
        Unitary4 u = kron(random_rotation(), random_rotation());
        // Mix in entangling structure: conjugate by a CNOT-like permutation.
        Unitary4 cx{};
        cx.at(0, 0) = cx.at(1, 1) = cx.at(2, 3) = cx.at(3, 2) = 1.0;
        u = matmul(cx, matmul(u, cx));
        const std::vector<cplx> want = dense_two(before, n, q_a, q_b, u);
        apply_two(s, q_a, q_b, u);
        CHECK(max_diff(s.amps, want) < tol::kOracle);
      }
    }
  }
}

TEST_CASE("first apply_two argument is the high bit of the local index") {
  // Flip only qubit 1 of 3: X on wire 0 of pair (1, 2) must send
  // |000> -> |010>.
  StateVector s = init_state(3);
  Unitary4 x_high{};  // X (x) I in the |q_a q_b> basis
  x_high.at(0, 2) = x_high.at(2, 0) = 1.0;
  x_high.at(1, 3) = x_high.at(3, 1) = 1.0;
  apply_two(s, 1, 2, x_high);
  CHECK(std::abs(s.amps[2] - cplx{1.0, 0.0}) < 1e-15);  // index 0b010
}

TEST_CASE("norm drift stays below 1e-10 over 100 gates at 16 qubits") {
  StateVector s = init_state(16);
  for (int q = 0; q < 16; ++q) apply_single(s, q, ry(uniform_angle()));
  for (int g = 0; g < 100; ++g) {
    const int q_a = static_cast<int>(rng() % 16);
    int q_b = static_cast<int>(rng() % 16);
    if (q_b == q_a) q_b = (q_b + 1) % 16;
    std::vector<double> th(15);
    for (double& t : th) t = uniform_angle();
    Unitary4 u = kron(random_rotation(), random_rotation());
    apply_two(s, q_a, q_b, u);
  }
  CHECK(std::abs(s.norm_sq() - 1.0) < tol::kNorm);
}

TEST_CASE("marginal_p0 and bloch_vector agree") {
  for (int rep = 0; rep < 10; ++rep) {
    StateVector s = random_state(4);
    for (int q = 0; q < 4; ++q) {
      const BlochVector r = bloch_vector(s, q);
      // [DERIVED] p0 = (1 + <Z>)/2.
      CHECK(marginal_p0(s, q) == doctest::Approx((1.0 + r.z) / 2).epsilon(1e-12));
      CHECK(r.x * r.x + r.y * r.y + r.z * r.z <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("bloch_vector reproduces known single-qubit states") {
  StateVector s = init_state(1);
  BlochVector r = bloch_vector(s, 0);
  CHECK(r.z == doctest::Approx(1.0));  // [TRIVIAL] |0> is +z
  apply_single(s, 0, ry(std::numbers::pi / 2));
  r = bloch_vector(s, 0);
  // [DERIVED] Ry(pi/2)|0> = (|0> + |1>)/sqrt2, Bloch +x.
  CHECK(r.x == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.z == doctest::Approx(0.0).epsilon(1e-12));
}

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "svqe/ansatz.hpp"
#include "svqe/pauli.hpp"

namespace svqe {

struct StateVector {
  int n_qubits = 0;
  std::vector<complexd> amps;

  static StateVector zero(int n) {
    StateVector s;
    s.n_qubits = n;
    s.amps.assign(1ull << n, complexd{0, 0});
    s.amps[0] = 1.0;
    return s;
  }

  double norm() const {
    double acc = 0;
    for (const auto& a : amps) acc += std::norm(a);
    return std::sqrt(acc);
  }
};

// Per-qubit measurement axes; axes[q] is one of 'X', 'Y', 'Z'.
struct MeasurementBasis {
  std::string axes;

  int n_qubits() const { return static_cast<int>(axes.size()); }
  std::uint64_t axis_mask(char axis) const {
    std::uint64_t m = 0;
    for (std::size_t q = 0; q < axes.size(); ++q)
      if (axes[q] == axis) m |= 1ull << q;
    return m;
  }
  // True when every non-identity qubit of p matches this basis's axis.
  bool covers(const PauliString& p) const {
    std::uint64_t px = p.x_mask & ~p.z_mask, py = p.x_mask & p.z_mask,
                  pz = p.z_mask & ~p.x_mask;
    return (px & ~axis_mask('X')) == 0 && (py & ~axis_mask('Y')) == 0 &&
           (pz & ~axis_mask('Z')) == 0;
  }
};

namespace gates {

inline void apply_1q(std::vector<complexd>& amps, int q, complexd g00, complexd g01,
                     complexd g10, complexd g11) {
  const std::uint64_t step = 1ull << q, dim = amps.size();
  for (std::uint64_t base = 0; base < dim; base += 2 * step) {
    for (std::uint64_t i = base; i < base + step; ++i) {
      const complexd a0 = amps[i], a1 = amps[i + step];
      amps[i] = g00 * a0 + g01 * a1;
      amps[i + step] = g10 * a0 + g11 * a1;
    }
  }
}

inline void apply_ry(std::vector<complexd>& amps, int q, double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  const std::uint64_t step = 1ull << q, dim = amps.size();
  for (std::uint64_t base = 0; base < dim; base += 2 * step) {
    for (std::uint64_t i = base; i < base + step; ++i) {
      const complexd a0 = amps[i], a1 = amps[i + step];
      amps[i] = c * a0 - s * a1;
      amps[i + step] = s * a0 + c * a1;
    }
  }
}

inline void apply_rz(std::vector<complexd>& amps, int q, double theta) {
  const complexd e0 = std::polar(1.0, -theta / 2), e1 = std::polar(1.0, theta / 2);
  const std::uint64_t step = 1ull << q, dim = amps.size();
  for (std::uint64_t base = 0; base < dim; base += 2 * step) {
    for (std::uint64_t i = base; i < base + step; ++i) {
      amps[i] *= e0;
      amps[i + step] *= e1;
    }
  }
}

inline void apply_rx(std::vector<complexd>& amps, int q, double theta) {
  const complexd c{std::cos(theta / 2), 0}, s{0, -std::sin(theta / 2)};
  apply_1q(amps, q, c, s, s, c);
}

inline void apply_h(std::vector<complexd>& amps, int q) {
  const double r = 1.0 / std::sqrt(2.0);
  apply_1q(amps, q, {r, 0}, {r, 0}, {r, 0}, {-r, 0});
}

inline void apply_cz(std::vector<complexd>& amps, int q1, int q2) {
  const std::uint64_t both = (1ull << q1) | (1ull << q2);
  for (std::uint64_t c = 0; c < amps.size(); ++c)
    if ((c & both) == both) amps[c] = -amps[c];
}

}  // namespace gates

inline StateVector apply_circuit(const AnsatzSpec& ansatz, const std::vector<double>& theta) {
  if (static_cast<int>(theta.size()) != ansatz.parameter_count())
    throw std::invalid_argument(
        "apply_circuit: expected " + std::to_string(ansatz.parameter_count()) +
        " parameters, got " + std::to_string(theta.size()));
  StateVector s = StateVector::zero(ansatz.n_qubits);
  for (int layer = 0; layer <= ansatz.depth; ++layer) {
    for (int q = 0; q < ansatz.n_qubits; ++q) {
      gates::apply_ry(s.amps, q, theta[static_cast<std::size_t>(ansatz.ry_index(layer, q))]);
      gates::apply_rz(s.amps, q, theta[static_cast<std::size_t>(ansatz.rz_index(layer, q))]);
    }
    if (layer < ansatz.depth)
      for (auto [a, b] : ansatz.entangler) gates::apply_cz(s.amps, a, b);
  }
  return s;
}

inline double exact_expectation(const StateVector& state, const PauliSum& h) {
  if (state.n_qubits != h.n_qubits())
    throw std::invalid_argument("exact_expectation: qubit-count mismatch");
  return h.expectation(state.amps);
}

// Outcome distribution after the per-qubit basis pre-rotations
// U_X = Hadamard, U_Y = Rx(pi/2), U_Z = identity.
inline std::vector<double> rotated_distribution(const StateVector& state,
                                                const MeasurementBasis& basis) {
  if (basis.n_qubits() != state.n_qubits)
    throw std::invalid_argument("rotated_distribution: basis length mismatch");
  std::vector<complexd> amps = state.amps;
  for (int q = 0; q < state.n_qubits; ++q) {
    if (basis.axes[static_cast<std::size_t>(q)] == 'X') gates::apply_h(amps, q);
    else if (basis.axes[static_cast<std::size_t>(q)] == 'Y') gates::apply_rx(amps, q, M_PI / 2);
  }
  std::vector<double> p(amps.size());
  for (std::size_t c = 0; c < amps.size(); ++c) p[c] = std::norm(amps[c]);
  return p;
}

}  // namespace svqe

#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "svqe/rng.hpp"

namespace svqe {

// Hardware-efficient layout: depth+1 rotation layers (Ry then Rz on every
// qubit, 2 parameters each), with a CZ nearest-neighbour ring layer between
// consecutive rotation layers.  Parameter k of layer l on qubit q lives at
// index 2*(l*n_qubits + q) (+1 for the Rz angle).
struct AnsatzSpec {
  int n_qubits = 0;
  int depth = 0;
  std::vector<std::pair<int, int>> entangler;  // one ring layer, frozen order

  int parameter_count() const { return 2 * n_qubits * (depth + 1); }
  int ry_index(int layer, int qubit) const { return 2 * (layer * n_qubits + qubit); }
  int rz_index(int layer, int qubit) const { return ry_index(layer, qubit) + 1; }
};

inline AnsatzSpec build_ansatz(int n_qubits, int depth) {
  if (n_qubits < 2) throw std::invalid_argument("build_ansatz: need n_qubits >= 2");
  if (depth < 0) throw std::invalid_argument("build_ansatz: need depth >= 0");
  AnsatzSpec spec;
  spec.n_qubits = n_qubits;
  spec.depth = depth;
  // CZ gates commute; the even/odd/wrap order is frozen for reproducibility.
  for (int i = 0; i + 1 < n_qubits; i += 2) spec.entangler.emplace_back(i, i + 1);
  for (int i = 1; i + 1 < n_qubits; i += 2) spec.entangler.emplace_back(i, i + 1);
  if (n_qubits > 2) spec.entangler.emplace_back(n_qubits - 1, 0);
  return spec;
}

inline std::vector<double> init_params(int count, double scale, std::uint64_t seed) {
  if (scale <= 0) throw std::invalid_argument("init_params: scale must be positive");
  Rng rng(seed);
  std::vector<double> theta(static_cast<std::size_t>(count));
  for (double& t : theta) t = rng.uniform(-scale, scale);
  return theta;
}

// Wrap every angle into (-pi, pi]; rotations are 2*pi-periodic up to a global
// phase, so the circuit state is unchanged.
inline double wrap_angle(double x) {
  double r = std::remainder(x, 2.0 * M_PI);
  if (r <= -M_PI) r += 2.0 * M_PI;
  return r;
}

inline std::vector<double> wrap_angles(std::vector<double> theta) {
  for (double& t : theta) t = wrap_angle(t);
  return theta;
}

}  // namespace svqe

#pragma once

// Shared oracle helpers for the test suite.  Everything here is built from
// first principles (dense kron products, explicit gate matrices) so it stays
// independent of the library implementations it is used to check.

#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

namespace oracle {

using complexd = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

inline MatrixXcd pauli_i() { return MatrixXcd::Identity(2, 2); }
inline MatrixXcd pauli_x() {
  MatrixXcd m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
inline MatrixXcd pauli_y() {
  MatrixXcd m(2, 2);
  m << complexd(0, 0), complexd(0, -1), complexd(0, 1), complexd(0, 0);
  return m;
}
inline MatrixXcd pauli_z() {
  MatrixXcd m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

// Tensor product with qubit 0 as the least-significant index bit: the operator
// on qubit k appears leftmost in the kron chain.
inline MatrixXcd kron_lsb(const std::vector<MatrixXcd>& per_qubit_ops) {
  MatrixXcd acc = per_qubit_ops.front();
  for (std::size_t q = 1; q < per_qubit_ops.size(); ++q)
    acc = Eigen::kroneckerProduct(per_qubit_ops[q], acc).eval();
  return acc;
}

inline MatrixXcd dense_from_label(const std::string& label) {
  std::vector<MatrixXcd> ops;
  for (char c : label) {
    switch (c) {
      case 'I': ops.push_back(pauli_i()); break;
      case 'X': ops.push_back(pauli_x()); break;
      case 'Y': ops.push_back(pauli_y()); break;
      case 'Z': ops.push_back(pauli_z()); break;
    }
  }
  return kron_lsb(ops);
}

// Embed a single-qubit gate on the given qubit of an n-qubit register.
inline MatrixXcd embed_1q(const MatrixXcd& g, int qubit, int n) {
  std::vector<MatrixXcd> ops;
  for (int q = 0; q < n; ++q) ops.push_back(q == qubit ? g : pauli_i());
  return kron_lsb(ops);
}

inline MatrixXcd ry(double theta) {
  MatrixXcd m(2, 2);
  m << std::cos(theta / 2), -std::sin(theta / 2), std::sin(theta / 2), std::cos(theta / 2);
  return m;
}

inline MatrixXcd rz(double theta) {
  MatrixXcd m = MatrixXcd::Zero(2, 2);
  m(0, 0) = std::exp(complexd(0, -theta / 2));
  m(1, 1) = std::exp(complexd(0, theta / 2));
  return m;
}

inline MatrixXcd rx(double theta) {
  MatrixXcd m(2, 2);
  m << std::cos(theta / 2), complexd(0, -std::sin(theta / 2)),
      complexd(0, -std::sin(theta / 2)), std::cos(theta / 2);
  return m;
}

inline MatrixXcd hadamard() {
  MatrixXcd m(2, 2);
  m << 1, 1, 1, -1;
  return m / std::sqrt(2.0);
}

inline MatrixXcd cz(int q1, int q2, int n) {
  const long dim = 1l << n;
  MatrixXcd m = MatrixXcd::Identity(dim, dim);
  for (long c = 0; c < dim; ++c)
    if (((c >> q1) & 1) && ((c >> q2) & 1)) m(c, c) = -1;
  return m;
}

// Embed a 4x4 operator on adjacent sites (i, i+1) of an n-qubit register.
inline MatrixXcd embed_2q(const MatrixXcd& m4, int site, int n) {
  const long low = 1l << site, high = 1l << (n - site - 2);
  MatrixXcd inner = Eigen::kroneckerProduct(m4, MatrixXcd::Identity(low, low));
  return Eigen::kroneckerProduct(MatrixXcd::Identity(high, high), inner);
}

inline VectorXcd random_state(int n, std::mt19937_64& gen) {
  const long dim = 1l << n;
  std::normal_distribution<double> nd;
  VectorXcd v(dim);
  for (long i = 0; i < dim; ++i) v(i) = complexd(nd(gen), nd(gen));
  return v / v.norm();
}

inline std::vector<complexd> to_std(const VectorXcd& v) {
  return {v.data(), v.data() + v.size()};
}

inline VectorXcd to_eigen(const std::vector<complexd>& v) {
  VectorXcd out(static_cast<long>(v.size()));
  for (long i = 0; i < out.size(); ++i) out(i) = v[static_cast<std::size_t>(i)];
  return out;
}

}  // namespace oracle

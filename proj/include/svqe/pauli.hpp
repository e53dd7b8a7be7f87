#pragma once

#include <bit>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace svqe {

using complexd = std::complex<double>;

inline constexpr double coeff_prune_tol = 1e-12;
inline constexpr double hermiticity_tol = 1e-10;
inline constexpr int dense_qubit_limit = 12;

// N-qubit Pauli string in symplectic form: qubit j carries X iff bit j of
// x_mask, Z iff bit j of z_mask, Y iff both, I iff neither.
struct PauliString {
  int n_qubits = 0;
  std::uint64_t x_mask = 0;
  std::uint64_t z_mask = 0;

  bool is_identity() const { return x_mask == 0 && z_mask == 0; }
  std::uint64_t support() const { return x_mask | z_mask; }

  bool operator==(const PauliString& o) const {
    return x_mask == o.x_mask && z_mask == o.z_mask;
  }
  bool operator<(const PauliString& o) const {
    return std::tie(x_mask, z_mask) < std::tie(o.x_mask, o.z_mask);
  }

  // Label with index 0 = qubit 0.
  std::string label() const {
    std::string s(static_cast<std::size_t>(n_qubits), 'I');
    for (int j = 0; j < n_qubits; ++j) {
      bool x = (x_mask >> j) & 1, z = (z_mask >> j) & 1;
      s[static_cast<std::size_t>(j)] = x ? (z ? 'Y' : 'X') : (z ? 'Z' : 'I');
    }
    return s;
  }

  static PauliString from_label(const std::string& label) {
    PauliString p;
    p.n_qubits = static_cast<int>(label.size());
    if (p.n_qubits > 64) throw std::invalid_argument("pauli label longer than 64 qubits");
    for (int j = 0; j < p.n_qubits; ++j) {
      switch (label[static_cast<std::size_t>(j)]) {
        case 'I': break;
        case 'X': p.x_mask |= 1ull << j; break;
        case 'Y': p.x_mask |= 1ull << j; p.z_mask |= 1ull << j; break;
        case 'Z': p.z_mask |= 1ull << j; break;
        default: throw std::invalid_argument("invalid pauli label character");
      }
    }
    return p;
  }
};

// Result of multiplying two strings: phase i^phase_exponent times product.
struct PauliProduct {
  int phase_exponent;  // mod 4
  PauliString product;
};

// With the convention P(x,z) = i^{|x&z|} X^x Z^z every string is Hermitian,
// and products carry the phase i^{k} with
//   k = |x1&z1| + |x2&z2| - |x3&z3| + 2|z1&x2|  (mod 4),  x3=x1^x2, z3=z1^z2.
inline PauliProduct pauli_multiply(const PauliString& a, const PauliString& b) {
  if (a.n_qubits != b.n_qubits)
    throw std::invalid_argument("pauli_multiply: qubit-count mismatch");
  PauliString out{a.n_qubits, a.x_mask ^ b.x_mask, a.z_mask ^ b.z_mask};
  int k = std::popcount(a.x_mask & a.z_mask) + std::popcount(b.x_mask & b.z_mask) -
          std::popcount(out.x_mask & out.z_mask) +
          2 * std::popcount(a.z_mask & b.x_mask);
  return {((k % 4) + 4) % 4, out};
}

inline complexd phase_value(int exponent) {
  static const complexd table[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return table[((exponent % 4) + 4) % 4];
}

// Outcome sign m(q) = prod_{j in supp} (-1)^{q_j}; the caller guarantees q was
// measured in a basis that covers the string.
inline int eval_string(const PauliString& p, std::uint64_t q) {
  return std::popcount(q & p.support()) & 1 ? -1 : 1;
}

// Real-weighted Hermitian Pauli sum.  The identity component is kept apart so
// stored terms are always non-identity with coefficients above the prune
// threshold.
class PauliSum {
 public:
  using TermMap = std::map<PauliString, double>;

  PauliSum() = default;
  explicit PauliSum(int n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 1 || n_qubits > 64)
      throw std::invalid_argument("PauliSum: qubit count out of range [1,64]");
  }

  int n_qubits() const { return n_qubits_; }
  double identity_coefficient() const { return id_coeff_; }
  void set_identity_coefficient(double c) { id_coeff_ = c; }
  const TermMap& terms() const { return terms_; }
  std::size_t term_count() const { return terms_.size(); }

  void add_term(const PauliString& p, double coeff) {
    if (p.n_qubits != n_qubits_)
      throw std::invalid_argument("PauliSum::add_term: qubit-count mismatch");
    if (p.is_identity()) {
      id_coeff_ += coeff;
      return;
    }
    double& slot = terms_[p];
    slot += coeff;
    if (std::abs(slot) < coeff_prune_tol) terms_.erase(p);
  }

  void add(const PauliSum& other, double scale = 1.0) {
    if (other.n_qubits_ != n_qubits_)
      throw std::invalid_argument("PauliSum::add: qubit-count mismatch");
    id_coeff_ += scale * other.id_coeff_;
    for (const auto& [p, c] : other.terms_) add_term(p, scale * c);
  }

  void scale(double s) {
    id_coeff_ *= s;
    for (auto it = terms_.begin(); it != terms_.end();) {
      it->second *= s;
      it = std::abs(it->second) < coeff_prune_tol ? terms_.erase(it) : std::next(it);
    }
  }

  double coefficient(const PauliString& p) const {
    if (p.is_identity()) return id_coeff_;
    auto it = terms_.find(p);
    return it == terms_.end() ? 0.0 : it->second;
  }

  // |out> += P|in> scaled: P|c> = i^{|x&z|} (-1)^{|c&z|} |c^x>.
  static void apply_string_add(const PauliString& p, complexd coeff,
                               const std::vector<complexd>& in,
                               std::vector<complexd>& out) {
    const complexd c0 = coeff * phase_value(std::popcount(p.x_mask & p.z_mask));
    const std::uint64_t x = p.x_mask, z = p.z_mask;
    for (std::uint64_t c = 0; c < in.size(); ++c) {
      double sign = std::popcount(c & z) & 1 ? -1.0 : 1.0;
      out[c ^ x] += c0 * sign * in[c];
    }
  }

  std::vector<complexd> apply(const std::vector<complexd>& in) const {
    check_dim(in.size());
    std::vector<complexd> out(in.size(), complexd{0, 0});
    if (id_coeff_ != 0.0)
      for (std::uint64_t c = 0; c < in.size(); ++c) out[c] = id_coeff_ * in[c];
    for (const auto& [p, c] : terms_) apply_string_add(p, complexd{c, 0}, in, out);
    return out;
  }

  // <psi| this |psi>, guaranteed real for Hermitian sums.
  double expectation(const std::vector<complexd>& psi) const {
    check_dim(psi.size());
    double acc = 0.0;
    for (std::uint64_t c = 0; c < psi.size(); ++c) acc += std::norm(psi[c]);
    acc *= id_coeff_;
    for (const auto& [p, coeff] : terms_) {
      const complexd c0 = phase_value(std::popcount(p.x_mask & p.z_mask));
      const std::uint64_t x = p.x_mask, z = p.z_mask;
      complexd e{0, 0};
      for (std::uint64_t c = 0; c < psi.size(); ++c) {
        double sign = std::popcount(c & z) & 1 ? -1.0 : 1.0;
        e += std::conj(psi[c ^ x]) * (c0 * sign * psi[c]);
      }
      acc += coeff * e.real();
    }
    return acc;
  }

  Eigen::MatrixXcd to_dense() const {
    if (n_qubits_ > dense_qubit_limit)
      throw std::domain_error("to_dense: " + std::to_string(n_qubits_) +
                              " qubits exceeds dense limit " +
                              std::to_string(dense_qubit_limit));
    const std::uint64_t dim = 1ull << n_qubits_;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<long>(dim), static_cast<long>(dim));
    for (std::uint64_t c = 0; c < dim; ++c) m(static_cast<long>(c), static_cast<long>(c)) = id_coeff_;
    for (const auto& [p, coeff] : terms_) {
      const complexd c0 = coeff * phase_value(std::popcount(p.x_mask & p.z_mask));
      for (std::uint64_t c = 0; c < dim; ++c) {
        double sign = std::popcount(c & p.z_mask) & 1 ? -1.0 : 1.0;
        m(static_cast<long>(c ^ p.x_mask), static_cast<long>(c)) += c0 * sign;
      }
    }
    return m;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["n"] = n_qubits_;
    j["id_coeff"] = id_coeff_;
    j["terms"] = nlohmann::ordered_json::array();
    for (const auto& [p, c] : terms_) j["terms"].push_back({{"label", p.label()}, {"coeff", c}});
    return j;
  }

  static PauliSum from_json(const nlohmann::json& j) {
    PauliSum s(j.at("n").get<int>());
    s.id_coeff_ = j.value("id_coeff", 0.0);
    for (const auto& t : j.at("terms"))
      s.add_term(PauliString::from_label(t.at("label").get<std::string>()),
                 t.at("coeff").get<double>());
    return s;
  }

 private:
  void check_dim(std::size_t dim) const {
    if (dim != (1ull << n_qubits_))
      throw std::invalid_argument("PauliSum: state dimension mismatch");
  }

  int n_qubits_ = 1;
  double id_coeff_ = 0.0;
  TermMap terms_;
};

// Pauli expansion of h*h.  Anticommuting cross terms carry phase +-i and must
// cancel pairwise for Hermitian input; the residual imaginary mass is checked.
inline PauliSum square_sum(const PauliSum& h) {
  struct Acc { double re = 0.0, im = 0.0; };
  std::map<PauliString, Acc> acc;
  const double id = h.identity_coefficient();
  PauliSum out(h.n_qubits());
  out.set_identity_coefficient(id * id);
  for (const auto& [p, c] : h.terms()) out.add_term(p, 2.0 * id * c);
  for (const auto& [pa, ca] : h.terms()) {
    for (const auto& [pb, cb] : h.terms()) {
      auto [k, prod] = pauli_multiply(pa, pb);
      complexd w = ca * cb * phase_value(k);
      Acc& slot = acc[prod];
      slot.re += w.real();
      slot.im += w.imag();
    }
  }
  double imag_mass = 0.0;
  for (const auto& [p, a] : acc) {
    imag_mass += std::abs(a.im);
    if (p.is_identity())
      out.set_identity_coefficient(out.identity_coefficient() + a.re);
    else if (std::abs(a.re) >= coeff_prune_tol)
      out.add_term(p, a.re);
  }
  if (imag_mass > hermiticity_tol)
    throw std::runtime_error("square_sum: non-Hermitian input (imaginary residue " +
                             std::to_string(imag_mass) + ")");
  return out;
}

// Expand a dense Hermitian k-site operator in the Pauli basis and embed it at
// the given (ordered, distinct) global sites: coeff_P = Tr[P m] / 2^k.
inline PauliSum decompose_local(const Eigen::MatrixXcd& m, const std::vector<int>& sites,
                                int n_qubits) {
  const int k = static_cast<int>(sites.size());
  const std::uint64_t dim = 1ull << k;
  if (m.rows() != static_cast<long>(dim) || m.cols() != static_cast<long>(dim))
    throw std::invalid_argument("decompose_local: matrix dimension != 2^k");
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > hermiticity_tol)
    throw std::invalid_argument("decompose_local: input not Hermitian within 1e-10");
  for (int s : sites)
    if (s < 0 || s >= n_qubits)
      throw std::invalid_argument("decompose_local: site index out of range");

  PauliSum out(n_qubits);
  for (std::uint64_t xl = 0; xl < dim; ++xl) {
    for (std::uint64_t zl = 0; zl < dim; ++zl) {
      // Tr[P m] with P's single nonzero per row: P[d^x, d] = i^{|x&z|}(-1)^{|d&z|}.
      const complexd c0 = phase_value(std::popcount(xl & zl));
      complexd tr{0, 0};
      for (std::uint64_t d = 0; d < dim; ++d) {
        double sign = std::popcount(d & zl) & 1 ? -1.0 : 1.0;
        tr += c0 * sign * m(static_cast<long>(d), static_cast<long>(d ^ xl));
      }
      complexd coeff = tr / static_cast<double>(dim);
      if (std::abs(coeff) < coeff_prune_tol) continue;
      PauliString p{n_qubits, 0, 0};
      for (int j = 0; j < k; ++j) {
        if ((xl >> j) & 1) p.x_mask |= 1ull << sites[static_cast<std::size_t>(j)];
        if ((zl >> j) & 1) p.z_mask |= 1ull << sites[static_cast<std::size_t>(j)];
      }
      out.add_term(p, coeff.real());
    }
  }
  return out;
}

}  // namespace svqe

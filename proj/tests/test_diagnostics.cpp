#include "svqe/diagnostics.hpp"

#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "svqe/scar_models.hpp"
#include "test_util.hpp"

using namespace svqe;
using oracle::complexd;

TEST_CASE("fidelity basics") {
  auto zero = StateVector::zero(1);
  StateVector one{1, {0.0, 1.0}};
  const double r = 1 / std::sqrt(2.0);
  StateVector plus{1, {complexd{r, 0}, complexd{r, 0}}};
  CHECK(fidelity(zero, zero) == Catch::Approx(1.0));
  CHECK(fidelity(zero, one) == Catch::Approx(0.0).margin(1e-15));
  CHECK(fidelity(plus, zero) == Catch::Approx(0.5));
  // global-phase invariance
  StateVector phased{1, {complexd{0, 1}, 0.0}};
  CHECK(fidelity(phased, zero) == Catch::Approx(1.0));
  CHECK_THROWS_AS(fidelity(zero, StateVector::zero(2)), std::invalid_argument);
}

TEST_CASE("entanglement entropy") {
  SECTION("product states carry none") {
    std::mt19937_64 gen(2);
    auto a = oracle::random_state(1, gen), b = oracle::random_state(1, gen),
         c = oracle::random_state(1, gen);
    StateVector prod{3, {}};
    prod.amps.resize(8);
    for (int i = 0; i < 8; ++i)
      prod.amps[static_cast<std::size_t>(i)] = a(i & 1) * b((i >> 1) & 1) * c(i >> 2);
    for (int cut : {1, 2}) CHECK(entanglement_entropy(prod, cut) < 1e-12);
  }
  SECTION("Bell pair gives ln 2") {
    const double r = 1 / std::sqrt(2.0);
    StateVector bell{2, {complexd{r, 0}, 0.0, 0.0, complexd{r, 0}}};
    CHECK(entanglement_entropy(bell, 1) == Catch::Approx(std::log(2.0)).margin(1e-12));
  }
  SECTION("Schmidt symmetry: both sides of the cut agree") {
    std::mt19937_64 gen(4);
    StateVector sv{4, oracle::to_std(oracle::random_state(4, gen))};
    for (int cut : {1, 2, 3}) {
      auto rho_a = reduced_density(sv, {0, 1, 2, 3});  // full, sanity
      std::vector<int> a_sites, b_sites;
      for (int q = 0; q < cut; ++q) a_sites.push_back(q);
      for (int q = cut; q < 4; ++q) b_sites.push_back(q);
      auto entropy_of = [](const Eigen::MatrixXcd& rho) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
        double s = 0;
        for (long i = 0; i < es.eigenvalues().size(); ++i)
          if (es.eigenvalues()(i) > 1e-12)
            s -= es.eigenvalues()(i) * std::log(es.eigenvalues()(i));
        return s;
      };
      double sa = entropy_of(reduced_density(sv, a_sites));
      double sb = entropy_of(reduced_density(sv, b_sites));
      CHECK(sa == Catch::Approx(sb).margin(1e-10));
      CHECK(entanglement_entropy(sv, cut) == Catch::Approx(sa).margin(1e-10));
    }
  }
  SECTION("invalid cuts rejected") {
    auto s = StateVector::zero(3);
    CHECK_THROWS_AS(entanglement_entropy(s, 0), std::invalid_argument);
    CHECK_THROWS_AS(entanglement_entropy(s, 3), std::invalid_argument);
  }
}

TEST_CASE("eigendecompose") {
  SECTION("single Z") {
    PauliSum z(1);
    z.add_term(PauliString::from_label("Z"), 1.0);
    auto r = eigendecompose(z);
    CHECK(r.eigenvalues(0) == Catch::Approx(-1.0));
    CHECK(r.eigenvalues(1) == Catch::Approx(1.0));
  }
  SECTION("residuals of a random 3-qubit sum") {
    std::mt19937_64 gen(6);
    PauliSum h(3);
    std::uniform_int_distribution<std::uint64_t> mask(0, 7);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 8; ++t) h.add_term(PauliString{3, mask(gen), mask(gen)}, nd(gen));
    auto r = eigendecompose(h);
    auto dense = h.to_dense();
    for (long k = 0; k < 8; ++k)
      CHECK((dense * r.eigenvectors.col(k) - r.eigenvalues(k) * r.eigenvectors.col(k))
                .norm() < 1e-8);
    for (long k = 1; k < 8; ++k) CHECK(r.eigenvalues(k) >= r.eigenvalues(k - 1));
  }
  SECTION("SM spectrum isolates the product scar at E = 0") {
    SMModelSpec spec;
    spec.n_qubits = 6;
    spec.seed = 21;
    auto model = build_sm_model(spec);
    auto r = eigendecompose(model.hamiltonian);
    int low_entropy_near_zero = 0;
    for (long k = 0; k < r.eigenvalues.size(); ++k)
      if (std::abs(r.eigenvalues(k)) < 1e-6 &&
          r.entropies[static_cast<std::size_t>(k)] < 1e-8)
        ++low_entropy_near_zero;
    CHECK(low_entropy_near_zero == 1);
  }
}

TEST_CASE("gap ratio statistics") {
  SECTION("equally spaced spectrum gives 1") {
    Eigen::VectorXd e(50);
    for (int i = 0; i < 50; ++i) e(i) = i;
    CHECK(gap_ratio(e) == Catch::Approx(1.0));
  }
  SECTION("Poisson gaps match the 2 ln 2 - 1 reference") {
    std::mt19937_64 gen(123);
    std::exponential_distribution<double> exp_dist(1.0);
    Eigen::VectorXd e(20000);
    double acc = 0;
    for (int i = 0; i < 20000; ++i) {
      acc += exp_dist(gen);
      e(i) = acc;
    }
    CHECK(gap_ratio(e) == Catch::Approx(2 * std::log(2.0) - 1).margin(0.01));
  }
  SECTION("degenerate gaps are skipped") {
    Eigen::VectorXd e(20);
    for (int i = 0; i < 20; ++i) e(i) = i;
    e(10) = e(9);  // exact degeneracy mid-spectrum
    int skipped = 0;
    double r = gap_ratio(e, &skipped);
    CHECK(skipped == 2);
    CHECK(std::isfinite(r));
  }
  SECTION("too-small spectra rejected") {
    Eigen::VectorXd e(2);
    e << 0.0, 1.0;
    CHECK_THROWS_AS(gap_ratio(e), std::invalid_argument);
  }
}

TEST_CASE("spectrum CSV export") {
  PauliSum z(2);
  z.add_term(PauliString::from_label("ZI"), 1.0);
  auto csv = spectrum_csv(eigendecompose(z));
  CHECK(csv.rfind("index,energy,half_cut_entropy\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);  // header + 4 eigenstates
}

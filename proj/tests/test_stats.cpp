#include <cmath>
#include <random>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "svqe/stats.hpp"

using namespace svqe;
using Catch::Approx;

TEST_CASE("summary helpers", "[stats]") {
  std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  CHECK(mean(x) == Approx(2.5));
  CHECK(sample_variance(x) == Approx(5.0 / 3.0));
  CHECK(standard_error(x) == Approx(std::sqrt(5.0 / 3.0) / 2.0));
  CHECK_THROWS_AS(mean(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(sample_variance(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("average ranks handle ties", "[stats]") {
  auto r = average_ranks({3.0, 1.0, 4.0, 1.0, 5.0});
  REQUIRE(r.size() == 5);
  CHECK(r[0] == Approx(3.0));
  CHECK(r[1] == Approx(1.5));
  CHECK(r[2] == Approx(4.0));
  CHECK(r[3] == Approx(1.5));
  CHECK(r[4] == Approx(5.0));

  auto all_tied = average_ranks({2.0, 2.0, 2.0});
  for (double v : all_tied) CHECK(v == Approx(2.0));
}

TEST_CASE("incomplete beta against reference values", "[stats]") {
  // I_x(1, b) = 1 - (1-x)^b in closed form
  CHECK(incomplete_beta(1.0, 1.0, 0.5) == Approx(0.5).margin(1e-12));
  CHECK(incomplete_beta(1.0, 3.0, 0.2) == Approx(1.0 - std::pow(0.8, 3.0)).margin(1e-12));
  // reference values from an independent implementation
  CHECK(incomplete_beta(2.0, 3.0, 0.25) == Approx(0.26171875).margin(1e-10));
  CHECK(incomplete_beta(0.5, 4.5, 0.7) == Approx(0.9986770494157323).margin(1e-10));
  CHECK(incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(incomplete_beta(2.0, 3.0, 1.0) == 1.0);
}

TEST_CASE("student t cdf against reference values", "[stats]") {
  CHECK(student_t_cdf(0.0, 5.0) == Approx(0.5).margin(1e-12));
  // df = 1 is the Cauchy distribution: CDF(1) = 3/4
  CHECK(student_t_cdf(1.0, 1.0) == Approx(0.75).margin(1e-10));
  CHECK(student_t_cdf(-2.5, 7.0) == Approx(0.020496109292876437).margin(1e-10));
  CHECK(student_t_cdf(0.3, 14.0) == Approx(0.615707308425497).margin(1e-10));
  // symmetry
  CHECK(student_t_cdf(1.7, 9.0) + student_t_cdf(-1.7, 9.0) == Approx(1.0).margin(1e-12));
}

TEST_CASE("spearman correlation", "[stats]") {
  SECTION("perfect monotone sequences") {
    std::vector<double> x{1, 2, 3, 4, 5, 6};
    std::vector<double> up{2, 4, 9, 16, 33, 50};
    std::vector<double> down{50, 33, 16, 9, 4, 2};
    CHECK(spearman(x, up).rho == Approx(1.0));
    CHECK(spearman(x, down).rho == Approx(-1.0));
    CHECK(spearman(x, down).p_negative == Approx(0.0).margin(1e-12));
    CHECK(spearman(x, up).p_negative == Approx(1.0).margin(1e-12));
  }

  SECTION("reference values with ties") {
    std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<double> y{3, 1, 4, 1, 5, 9, 2, 6};
    auto r = spearman(x, y);
    CHECK(r.rho == Approx(0.5030030300035688).margin(1e-12));
    CHECK(r.p_negative == Approx(0.8980616589957839).margin(1e-10));

    std::vector<double> xb{1, 2, 3, 4, 5};
    std::vector<double> yb{5, 6, 7, 8, 7};
    CHECK(spearman(xb, yb).rho == Approx(0.8207826816681233).margin(1e-12));
  }

  SECTION("constant input carries no information") {
    std::vector<double> x{1, 2, 3, 4};
    std::vector<double> y{7, 7, 7, 7};
    auto r = spearman(x, y);
    CHECK(r.rho == 0.0);
    CHECK(r.p_negative == 1.0);
  }

  CHECK_THROWS_AS(spearman({1, 2}, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(spearman({1, 2, 3}, {1, 2}), std::invalid_argument);
}

TEST_CASE("two-sample KS", "[stats]") {
  SECTION("identical samples") {
    std::vector<double> a{0.1, 0.4, 0.9, 0.2};
    auto r = ks_two_sample(a, a);
    CHECK(r.statistic == Approx(0.0).margin(1e-15));
    CHECK(r.p_value == Approx(1.0));
  }

  SECTION("reference statistic") {
    std::vector<double> a{0.22, 0.87, 0.33, 0.42, 0.55, 0.61, 0.29, 0.70, 0.15, 0.95};
    std::vector<double> b{0.45, 0.62, 0.78, 0.81, 0.59, 0.91,
                          0.66, 0.74, 0.53, 0.88, 0.35, 0.99};
    auto r = ks_two_sample(a, b);
    CHECK(r.statistic == Approx(0.4166666666666667).margin(1e-12));
    // small-sample-corrected asymptotic p; compare loosely to the plain
    // asymptotic reference value 0.2669
    CHECK(r.p_value == Approx(0.2669).margin(0.08));
  }

  SECTION("clearly separated samples reject") {
    std::mt19937_64 gen(7);
    std::normal_distribution<double> n0(0.0, 1.0), n1(1.2, 1.0);
    std::vector<double> a, b;
    for (int i = 0; i < 60; ++i) a.push_back(n0(gen));
    for (int i = 0; i < 70; ++i) b.push_back(n1(gen));
    auto r = ks_two_sample(a, b);
    CHECK(r.statistic > 0.3);
    CHECK(r.p_value < 1e-4);
  }

  SECTION("same distribution accepts") {
    std::mt19937_64 gen(11);
    std::normal_distribution<double> n0(0.0, 1.0);
    std::vector<double> a, b;
    for (int i = 0; i < 200; ++i) a.push_back(n0(gen));
    for (int i = 0; i < 220; ++i) b.push_back(n0(gen));
    auto r = ks_two_sample(a, b);
    CHECK(r.p_value > 0.05);
  }
}

#include <cmath>
#include <random>
#include <string>

#include "cvmdi/gaussian.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace cvmdi;

TEST_CASE("entropy_term values") {
  CHECK(entropy_term(1.0) == 0.0);
  CHECK(entropy_term(3.0) == 2.0);

  const double x = 1e6;
  const double asymptote = std::log2(std::exp(1.0) * x / 2.0);
  CHECK(std::abs(entropy_term(x) - asymptote) / asymptote < 1e-6);

  // h(2) = 1.5 log2 1.5 - 0.5 log2 0.5
  CHECK(entropy_term(2.0) == doctest::Approx(1.5 * std::log2(1.5) + 0.5).epsilon(1e-15));
}

TEST_CASE("entropy_term rejects x < 1 and names the value") {
  CHECK_THROWS_AS(entropy_term(0.5), DomainError);
  try {
    entropy_term(0.25);
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("0.25") != std::string::npos);
  }
  CHECK_THROWS_AS(entropy_term(std::nan("")), DomainError);
}

TEST_CASE("entropy_term is increasing on a 100-point grid") {
  double previous = -1.0;
  for (int i = 0; i < 100; ++i) {
    const double x = std::pow(10.0, 6.0 * i / 99.0);
    const double h = entropy_term(x);
    CHECK(h > previous);
    previous = h;
  }
}

TEST_CASE("symplectic eigenvalues of reference states") {
  const auto vacuum = symplectic_eigenvalues(CovMatrixd::identity(2));
  REQUIRE(vacuum.size() == 2);
  CHECK(vacuum[0] == doctest::Approx(1.0));
  CHECK(vacuum[1] == doctest::Approx(1.0));

  const auto tmsv = symplectic_eigenvalues(tmsv_cm(5.0));
  CHECK(std::abs(tmsv[0] - 1.0) < 1e-9);
  CHECK(std::abs(tmsv[1] - 1.0) < 1e-9);

  CovMatrixd::Matrix thermal = CovMatrixd::Matrix::Identity(4, 4) * 1.5;
  const auto eve = symplectic_eigenvalues(CovMatrixd(thermal));
  CHECK(eve[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(eve[1] == doctest::Approx(1.5).epsilon(1e-12));

  CovMatrixd::Matrix single(2, 2);
  single << 2.0, 0.5, 0.5, 3.0;
  CHECK(symplectic_eigenvalues(CovMatrixd(single))[0] == doctest::Approx(std::sqrt(5.75)));
}

TEST_CASE("three-mode spectrum goes through the eigensolver and is sorted") {
  CovMatrixd::Matrix v = CovMatrixd::Matrix::Zero(6, 6);
  v.diagonal() << 1.2, 1.2, 3.0, 3.0, 2.0, 2.0;
  const auto nu = symplectic_eigenvalues(CovMatrixd(v));
  REQUIRE(nu.size() == 3);
  CHECK(nu[0] == doctest::Approx(3.0));
  CHECK(nu[1] == doctest::Approx(2.0));
  CHECK(nu[2] == doctest::Approx(1.2));
}

TEST_CASE("two-mode invariant formula agrees with i*Omega*V moduli on 1000 random physical CMs") {
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 1000; ++trial) {
    double nu1 = 0, nu2 = 0;
    const CovMatrixd cm(test::random_physical_cm(rng, nu1, nu2));
    const auto by_invariants = symplectic_eigenvalues(cm);
    const auto by_solver = symplectic_spectrum_eigensolver(cm);
    CHECK(std::abs(by_invariants[0] - by_solver[0]) < 1e-9);
    CHECK(std::abs(by_invariants[1] - by_solver[1]) < 1e-9);
    CHECK(by_invariants[0] == doctest::Approx(std::max(nu1, nu2)).epsilon(1e-9));
    CHECK(cm.is_physical());
  }
}

TEST_CASE("entropy is invariant under symplectic transformations") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    double nu1 = 0, nu2 = 0;
    const test::Mat v = test::random_physical_cm(rng, nu1, nu2);
    const test::Mat s = test::random_symplectic(rng);
    test::Mat transformed = s * v * s.transpose();
    transformed = (transformed + transformed.transpose()) / 2.0;
    const double before = von_neumann_entropy(CovMatrixd(v));
    const double after = von_neumann_entropy(CovMatrixd(transformed));
    CHECK(std::abs(before - after) < 1e-8);
    CHECK(before == doctest::Approx(entropy_term(nu1) + entropy_term(nu2)).epsilon(1e-9));
  }
}

TEST_CASE("von Neumann entropy") {
  CHECK(std::abs(von_neumann_entropy(tmsv_cm(10.0))) < 1e-8);

  CovMatrixd::Matrix thermal(2, 2);
  thermal << 3.0, 0.0, 0.0, 3.0;
  CHECK(von_neumann_entropy(CovMatrixd(thermal)) == 2.0);
  CHECK(von_neumann_entropy(CovMatrixd::identity(1)) == 0.0);

  CovMatrixd::Matrix squeezed_too_far(2, 2);
  squeezed_too_far << 0.5, 0.0, 0.0, 0.5;
  CHECK_THROWS_AS(von_neumann_entropy(CovMatrixd(squeezed_too_far)), PhysicalityError);
  CHECK_FALSE(CovMatrixd(squeezed_too_far).is_physical());

  CovMatrixd::Matrix almost(2, 2);
  almost << 1.0 - 5e-10, 0.0, 0.0, 1.0 - 5e-10;
  CHECK(von_neumann_entropy(CovMatrixd(almost)) == 0.0);

  CHECK(physicality_tolerance(CovMatrixd(almost)) == kPhysicalityTolerance);
  CHECK(physicality_tolerance(tmsv_cm(1e4)) > 1e-7);
  CHECK(physicality_tolerance(tmsv_cm(1e4)) < 1e-5);
}

TEST_CASE("tmsv_cm") {
  CHECK(tmsv_cm(1.0).matrix().isApprox(Eigen::MatrixXd::Identity(4, 4)));

  const auto two = tmsv_cm(2.0);
  CHECK(two(0, 2) == doctest::Approx(std::sqrt(3.0)));
  CHECK(two(1, 3) == doctest::Approx(-std::sqrt(3.0)));
  CHECK(two(0, 0) == 2.0);
  CHECK(two(0, 1) == 0.0);

  for (double mu : {1.0, 1.5, 2.0, 10.0, 100.0, 1e3}) {
    const auto nu = symplectic_eigenvalues(tmsv_cm(mu));
    CHECK(std::abs(nu[0] - 1.0) < 1e-9);
    CHECK(std::abs(nu[1] - 1.0) < 1e-9);
  }
  CHECK_THROWS_AS(tmsv_cm(0.99), DomainError);
}

TEST_CASE("near-degenerate two-mode spectra stay accurate") {
  std::mt19937_64 rng(3);
  for (double mu : {1e2, 1e3, 1e4, 1e5}) {
    // Rounding sqrt(mu^2 - 1) alone moves the spectrum by ~ eps mu^2.
    const double tol = std::max(1e-9, 1e-15 * mu * mu);
    const auto nu = symplectic_eigenvalues(tmsv_cm(mu));
    CHECK(std::abs(nu[0] - 1.0) < tol);
    CHECK(std::abs(nu[1] - 1.0) < tol);
    CHECK(std::abs(von_neumann_entropy(tmsv_cm(mu))) < 1e-6);
  }
  for (int trial = 0; trial < 100; ++trial) {
    const test::Mat s = test::random_symplectic(rng, 1.0);
    const test::Mat thermal = 1.7 * s * s.transpose();
    const auto nu = symplectic_eigenvalues(CovMatrixd((thermal + thermal.transpose()) / 2.0));
    CHECK(nu[0] == doctest::Approx(1.7).epsilon(1e-9));
    CHECK(nu[1] == doctest::Approx(1.7).epsilon(1e-9));
  }
}

TEST_CASE("CovMatrix construction checks") {
  Eigen::MatrixXd odd = Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(CovMatrixd{odd}, DomainError);
  Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(2, 2);
  asym(0, 1) = 1e-6;
  CHECK_THROWS_AS(CovMatrixd{asym}, DomainError);
  asym(1, 0) = 1e-6;
  CHECK_NOTHROW(CovMatrixd{asym});
}

TEST_CASE("scalar type is a template parameter") {
  const auto cm = tmsv_cm<long double>(3.0L);
  const auto nu = symplectic_eigenvalues(cm);
  CHECK(std::abs(static_cast<double>(nu[0]) - 1.0) < 1e-12);
  CHECK(entropy_term<float>(3.0f) == 2.0f);
}

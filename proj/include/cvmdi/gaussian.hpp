#pragma once

// Gaussian-state linear algebra in shot-noise units (vacuum variance = 1).
// Quadratures are interleaved as (q1, p1, q2, p2, ...).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "cvmdi/errors.hpp"

namespace cvmdi {

/// Tolerance below 1 within which a symplectic eigenvalue is treated as 1.
inline constexpr double kPhysicalityTolerance = 1e-9;
/// Absolute (scaled by the largest entry when it exceeds 1) symmetry tolerance.
inline constexpr double kSymmetryTolerance = 1e-12;
/// Relative discriminant below which the two-mode invariant formula is ill-conditioned.
inline constexpr double kDegenerateDiscriminant = 1e-6;

namespace detail {

template <typename Scalar>
std::string format_value(Scalar x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace detail

/// Real symmetric covariance matrix of an n-mode Gaussian state.
template <typename Scalar>
class CovMatrix {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  explicit CovMatrix(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols() || entries_.rows() == 0 || entries_.rows() % 2 != 0) {
      throw DomainError("covariance matrix must be square with even, non-zero dimension; got " +
                        std::to_string(entries_.rows()) + "x" + std::to_string(entries_.cols()));
    }
    using std::abs;
    const Scalar scale = std::max<Scalar>(Scalar(1), entries_.cwiseAbs().maxCoeff());
    const Scalar asym = (entries_ - entries_.transpose()).cwiseAbs().maxCoeff();
    if (!(asym <= Scalar(kSymmetryTolerance) * scale)) {
      throw DomainError("covariance matrix is not symmetric (max |V - V^T| = " +
                        detail::format_value(asym) + ")");
    }
  }

  static CovMatrix identity(Eigen::Index modes) { return CovMatrix(Matrix::Identity(2 * modes, 2 * modes)); }

  const Matrix& matrix() const { return entries_; }
  Eigen::Index dimension() const { return entries_.rows(); }
  Eigen::Index modes() const { return entries_.rows() / 2; }
  Scalar operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

  /// 2x2 block coupling modes i and j.
  Eigen::Matrix<Scalar, 2, 2> block(Eigen::Index i, Eigen::Index j) const {
    return entries_.template block<2, 2>(2 * i, 2 * j);
  }

  bool is_physical(Scalar tolerance = Scalar(kPhysicalityTolerance)) const;

 private:
  Matrix entries_;
};

using CovMatrixd = CovMatrix<double>;

/// Block-diagonal symplectic form Omega = (+) [[0, 1], [-1, 0]].
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> symplectic_form(Eigen::Index modes) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> omega =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(2 * modes, 2 * modes);
  for (Eigen::Index k = 0; k < modes; ++k) {
    omega(2 * k, 2 * k + 1) = Scalar(1);
    omega(2 * k + 1, 2 * k) = Scalar(-1);
  }
  return omega;
}

/// Symplectic spectrum from the moduli of the eigenvalues of i*Omega*V (any n), descending.
template <typename Scalar>
std::vector<Scalar> symplectic_spectrum_eigensolver(const CovMatrix<Scalar>& cm) {
  using Matrix = typename CovMatrix<Scalar>::Matrix;
  const Eigen::Index n = cm.modes();
  const Matrix omega_v = symplectic_form<Scalar>(n) * cm.matrix();
  Eigen::EigenSolver<Matrix> solver(omega_v, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigen-decomposition of Omega*V did not converge");
  }
  std::vector<Scalar> moduli;
  moduli.reserve(static_cast<std::size_t>(2 * n));
  for (Eigen::Index k = 0; k < 2 * n; ++k) moduli.push_back(std::abs(solver.eigenvalues()(k)));
  std::sort(moduli.begin(), moduli.end(), std::greater<>());
  // Eigenvalues come in pairs +-i*nu; average each pair.
  std::vector<Scalar> nu;
  nu.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) nu.push_back((moduli[2 * k] + moduli[2 * k + 1]) / Scalar(2));
  return nu;
}

/// Symplectic eigenvalues in descending order.
///
/// One mode: sqrt(det V). Two modes: nu_pm^2 = (D +- sqrt(D^2 - 4 det V)) / 2 with
/// D = det A + det B + 2 det C for V = [[A, C], [C^T, B]]. More modes fall back to
/// symplectic_spectrum_eigensolver, as do two-mode states whose eigenvalues nearly coincide.
template <typename Scalar>
std::vector<Scalar> symplectic_eigenvalues(const CovMatrix<Scalar>& cm) {
  using std::sqrt;
  const Eigen::Index n = cm.modes();
  if (n == 1) {
    const Scalar det = cm.matrix().determinant();
    if (det < Scalar(0)) {
      throw NumericalError("single-mode covariance matrix has negative determinant " + detail::format_value(det));
    }
    return {sqrt(det)};
  }
  if (n == 2) {
    const Scalar det_a = cm.block(0, 0).determinant();
    const Scalar det_b = cm.block(1, 1).determinant();
    const Scalar det_c = cm.block(0, 1).determinant();
    const Scalar det_v = cm.matrix().determinant();
    const Scalar delta = det_a + det_b + Scalar(2) * det_c;
    const Scalar disc = delta * delta - Scalar(4) * det_v;
    // D^2 and 4 det V cancel exactly for equal eigenvalues; sqrt(disc) then amplifies
    // rounding in det V (including slightly negative values), the eigensolver does not.
    const Scalar disc_scale = std::max<Scalar>(Scalar(1), delta * delta);
    if (disc < Scalar(kDegenerateDiscriminant) * disc_scale) return symplectic_spectrum_eigensolver(cm);
    const Scalar root = sqrt(disc);
    const Scalar plus_sq = (delta + root) / Scalar(2);
    Scalar minus_sq = (delta - root) / Scalar(2);
    if (minus_sq < Scalar(0)) {
      if (minus_sq < -Scalar(kPhysicalityTolerance) * disc_scale) {
        throw NumericalError("two-mode invariant gives negative nu_-^2 = " + detail::format_value(minus_sq));
      }
      minus_sq = Scalar(0);
    }
    return {sqrt(plus_sq), sqrt(minus_sq)};
  }
  return symplectic_spectrum_eigensolver(cm);
}

template <typename Scalar>
bool CovMatrix<Scalar>::is_physical(Scalar tolerance) const {
  try {
    const auto nu = symplectic_eigenvalues(*this);
    return nu.back() >= Scalar(1) - tolerance;
  } catch (const NumericalError&) {
    return false;
  }
}

/// h(x) = ((x+1)/2) log2((x+1)/2) - ((x-1)/2) log2((x-1)/2), in bits. h(1) = 0.
template <typename Scalar>
Scalar entropy_term(Scalar x) {
  using std::log2;
  if (!(x >= Scalar(1))) {
    throw DomainError("entropy_term requires a symplectic eigenvalue >= 1, got " + detail::format_value(x));
  }
  const Scalar plus = (x + Scalar(1)) / Scalar(2);
  const Scalar minus = (x - Scalar(1)) / Scalar(2);
  // 0 log 0 = 0
  const Scalar minus_term = minus > Scalar(0) ? minus * log2(minus) : Scalar(0);
  return plus * log2(plus) - minus_term;
}

/// Snaps eigenvalues within tolerance below 1 up to 1; larger violations are errors.
template <typename Scalar>
Scalar clamp_symplectic_eigenvalue(Scalar nu, Scalar tolerance = Scalar(kPhysicalityTolerance)) {
  if (nu >= Scalar(1)) return nu;
  if (nu >= Scalar(1) - tolerance) return Scalar(1);
  throw PhysicalityError("unphysical covariance matrix: symplectic eigenvalue " + detail::format_value(nu) +
                         " < 1");
}

/// Physicality tolerance for a given matrix: kPhysicalityTolerance, widened to the size of the
/// rounding error of strongly squeezed states, which grows like eps * max|V_ij|^2.
template <typename Scalar>
Scalar physicality_tolerance(const CovMatrix<Scalar>& cm) {
  const Scalar scale = cm.matrix().cwiseAbs().maxCoeff();
  const Scalar rounding = Scalar(64) * std::numeric_limits<Scalar>::epsilon() * scale * scale;
  return std::max(Scalar(kPhysicalityTolerance), rounding);
}

/// Von Neumann entropy in bits, sum of h over the symplectic spectrum.
template <typename Scalar>
Scalar von_neumann_entropy(const CovMatrix<Scalar>& cm) {
  const Scalar tolerance = physicality_tolerance(cm);
  Scalar total(0);
  for (Scalar nu : symplectic_eigenvalues(cm)) total += entropy_term(clamp_symplectic_eigenvalue(nu, tolerance));
  return total;
}

/// Two-mode squeezed vacuum with local variance mu: [[mu I, sqrt(mu^2-1) Z], [sqrt(mu^2-1) Z, mu I]].
template <typename Scalar = double>
CovMatrix<Scalar> tmsv_cm(Scalar mu) {
  using std::sqrt;
  if (!(mu >= Scalar(1))) {
    throw DomainError("tmsv_cm requires mu >= 1, got " + detail::format_value(mu));
  }
  const Scalar c = sqrt(mu * mu - Scalar(1));
  typename CovMatrix<Scalar>::Matrix v(4, 4);
  v << mu, 0, c, 0,
       0, mu, 0, -c,
       c, 0, mu, 0,
       0, -c, 0, mu;
  return CovMatrix<Scalar>(std::move(v));
}

}  // namespace cvmdi

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace cvmdi::test {

using Mat = Eigen::MatrixXd;

// Elementary two-mode symplectic maps in (q1, p1, q2, p2) ordering.
inline Mat rotation(double a, double b) {
  Mat s = Mat::Zero(4, 4);
  s.block<2, 2>(0, 0) << std::cos(a), std::sin(a), -std::sin(a), std::cos(a);
  s.block<2, 2>(2, 2) << std::cos(b), std::sin(b), -std::sin(b), std::cos(b);
  return s;
}

inline Mat squeezers(double r1, double r2) {
  Mat s = Mat::Zero(4, 4);
  s.diagonal() << std::exp(-r1), std::exp(r1), std::exp(-r2), std::exp(r2);
  return s;
}

inline Mat beam_splitter(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  Mat m = Mat::Zero(4, 4);
  m << c, 0, s, 0,
       0, c, 0, s,
      -s, 0, c, 0,
       0, -s, 0, c;
  return m;
}

/// Random two-mode symplectic matrix with bounded squeezing.
inline Mat random_symplectic(std::mt19937_64& rng, double max_squeeze = 1.0) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> sq(-max_squeeze, max_squeeze);
  return rotation(angle(rng), angle(rng)) * squeezers(sq(rng), sq(rng)) * beam_splitter(angle(rng)) *
         rotation(angle(rng), angle(rng)) * squeezers(sq(rng), sq(rng)) * beam_splitter(angle(rng));
}

/// Random physical two-mode CM with known symplectic spectrum (nu1, nu2).
inline Mat random_physical_cm(std::mt19937_64& rng, double& nu1, double& nu2) {
  std::uniform_real_distribution<double> thermal(1.0, 20.0);
  nu1 = thermal(rng);
  nu2 = thermal(rng);
  Mat d = Mat::Zero(4, 4);
  d.diagonal() << nu1, nu1, nu2, nu2;
  const Mat s = random_symplectic(rng);
  Mat v = s * d * s.transpose();
  return (v + v.transpose()) / 2.0;
}

}  // namespace cvmdi::test

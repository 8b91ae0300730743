#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>

namespace stvs {

using cplx = std::complex<double>;
using CMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;
using CVector = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr cplx kJ{0.0, 1.0};

// Unit phasor e^{j theta}.
inline cplx unit_phasor(double theta) { return std::polar(1.0, theta); }

// Index of the smallest |U_kk| of an LU factor; used to name the pivot row
// when a factorization is (numerically) singular.
template <typename Lu>
Eigen::Index weakest_pivot(const Lu& lu) {
  const auto& m = lu.matrixLU();
  Eigen::Index worst = 0;
  double smallest = std::abs(m(0, 0));
  for (Eigen::Index k = 1; k < m.rows(); ++k) {
    if (std::abs(m(k, k)) < smallest) {
      smallest = std::abs(m(k, k));
      worst = k;
    }
  }
  return worst;
}

}  // namespace stvs

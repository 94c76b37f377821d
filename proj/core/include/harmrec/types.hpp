#pragma once

#include <complex>

#include <Eigen/Core>

namespace harmrec {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using Index = Eigen::Index;

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace harmrec

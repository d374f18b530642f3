#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <limits>
#include <string>

namespace subell {

using Real = double;
using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Vector2 = Eigen::Vector2d;
using SparseMatrix = Eigen::SparseMatrix<Real>;

inline constexpr Real kInfinity = std::numeric_limits<Real>::infinity();
inline constexpr Real kNaN = std::numeric_limits<Real>::quiet_NaN();

inline const std::string kVersion = "subell 0.1.0";

} // namespace subell

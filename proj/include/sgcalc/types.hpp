#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace sgcalc {

/// A real function on the vertex set.
using Field = Eigen::VectorXd;

/// Several fields stored column-wise (vertex x column).
using Block = Eigen::MatrixXd;

using Vertex = std::int32_t;

}  // namespace sgcalc

#pragma once

#include <Eigen/Dense>

namespace prelu {

template <class S> using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S> using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;

using Scalar = double;
using Matrix = MatX<Scalar>;
using Vector = VecX<Scalar>;
using VectorI = VecX<int>;
using Index = Eigen::Index;

} // namespace prelu

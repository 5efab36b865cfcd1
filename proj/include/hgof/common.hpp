#ifndef HGOF_COMMON_HPP
#define HGOF_COMMON_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hgof {

inline constexpr const char* kVersion = "1.0.0";

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

/// Raised when a factorization or other numeric step fails in a way that is
/// not a caller error (singular matrix, solver breakdown, ...).
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// exp with the argument clamped from below; keeps extreme statistics finite
// and avoids denormal-heavy inner loops.
template <typename Scalar>
inline Scalar safe_exp(Scalar x) {
  return std::exp(std::max(x, Scalar(-745)));
}

}  // namespace hgof

#endif  // HGOF_COMMON_HPP

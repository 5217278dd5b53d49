#ifndef PSHAPLEY_TYPES_HPP
#define PSHAPLEY_TYPES_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pshapley {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Row-major so that gathering a coalition's rows copies contiguous memory.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using LabelVector = Eigen::VectorXd;

using PointId = std::int64_t;
using Index = Eigen::Index;

// Every failure the library reports carries a short machine-readable code
// ("invalid_argument", "io", "parse", ...) next to the human message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

inline void require(bool condition, const std::string& message,
                    const char* code = "invalid_argument") {
  if (!condition) throw Error(code, message);
}

}  // namespace pshapley

#endif  // PSHAPLEY_TYPES_HPP

#include "multicoh/matrix.hpp"

#include <cmath>

#include "multicoh/errors.hpp"

namespace multicoh {

BlockMatrix::BlockMatrix(
    std::initializer_list<std::initializer_list<double>> rows)
    : k_(rows.size()) {
  data_.reserve(k_ * k_);
  for (const auto& row : rows) {
    if (row.size() != k_) throw ConfigError("block matrix must be square");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

bool BlockMatrix::is_symmetric(double tol) const {
  for (std::size_t a = 0; a < k_; ++a) {
    for (std::size_t b = a + 1; b < k_; ++b) {
      if (std::abs((*this)(a, b) - (*this)(b, a)) > tol) return false;
    }
  }
  return true;
}

}  // namespace multicoh

#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace multicoh {

// Dense row-major K x K matrix used for block parameters and estimates.
class BlockMatrix {
 public:
  BlockMatrix() = default;
  explicit BlockMatrix(std::size_t k, double fill = 0.0)
      : k_(k), data_(k * k, fill) {}
  BlockMatrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t size() const { return k_; }
  double& operator()(std::size_t a, std::size_t b) { return data_[a * k_ + b]; }
  double operator()(std::size_t a, std::size_t b) const {
    return data_[a * k_ + b];
  }

  bool is_symmetric(double tol = 0.0) const;

  friend bool operator==(const BlockMatrix&, const BlockMatrix&) = default;

 private:
  std::size_t k_ = 0;
  std::vector<double> data_;
};

}  // namespace multicoh

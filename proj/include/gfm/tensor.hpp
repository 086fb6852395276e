#ifndef GFM_TENSOR_HPP
#define GFM_TENSOR_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gfm/common.hpp"

namespace gfm {

// Dense row-major tensor of 64-bit floats. Plain value type: copyable,
// comparable, no views. All numeric state in the library lives in these.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int64_t> dims)
      : dims_(std::move(dims)), data_(checked_numel(dims_), 0.0) {}

  Tensor(std::vector<int64_t> dims, std::vector<double> data)
      : dims_(std::move(dims)), data_(std::move(data)) {
    if (checked_numel(dims_) != static_cast<int64_t>(data_.size()))
      throw_shape("tensor: dims product " + std::to_string(numel()) +
                  " != data length " + std::to_string(data_.size()));
  }

  static Tensor zeros(std::vector<int64_t> dims) { return Tensor(std::move(dims)); }

  static Tensor full(std::vector<int64_t> dims, double v) {
    Tensor t(std::move(dims));
    std::fill(t.data_.begin(), t.data_.end(), v);
    return t;
  }

  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  static Tensor row(std::vector<double> v) {
    auto n = static_cast<int64_t>(v.size());
    return Tensor({n}, std::move(v));
  }

  static Tensor matrix(int64_t r, int64_t c, std::vector<double> v) {
    return Tensor({r, c}, std::move(v));
  }

  int64_t numel() const { return static_cast<int64_t>(data_.size()); }
  int rank() const { return static_cast<int>(dims_.size()); }
  int64_t dim(int i) const { return dims_[static_cast<size_t>(i)]; }
  const std::vector<int64_t>& dims() const { return dims_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> span() { return {data_.data(), data_.size()}; }
  std::span<const double> span() const { return {data_.data(), data_.size()}; }

  double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  // Rank-2 accessors.
  double& at(int64_t i, int64_t j) { return data_[static_cast<size_t>(i * dims_[1] + j)]; }
  double at(int64_t i, int64_t j) const { return data_[static_cast<size_t>(i * dims_[1] + j)]; }

  bool same_dims(const Tensor& o) const { return dims_ == o.dims_; }

  bool bit_equal(const Tensor& o) const {
    if (dims_ != o.dims_) return false;
    for (size_t i = 0; i < data_.size(); ++i) {
      // Bitwise comparison; distinguishes -0.0 from 0.0 and never treats
      // NaN as equal to itself by accident.
      if (std::bit_cast<uint64_t>(data_[i]) != std::bit_cast<uint64_t>(o.data_[i]))
        return false;
    }
    return true;
  }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  std::string dims_str() const {
    std::string s = "[";
    for (size_t i = 0; i < dims_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(dims_[i]);
    }
    return s + "]";
  }

 private:
  static int64_t checked_numel(const std::vector<int64_t>& dims) {
    int64_t n = 1;
    for (int64_t d : dims) {
      if (d <= 0) throw_shape("tensor: non-positive dim " + std::to_string(d));
      n *= d;
    }
    return n;
  }

  std::vector<int64_t> dims_;
  std::vector<double> data_;
};

}  // namespace gfm

#endif  // GFM_TENSOR_HPP

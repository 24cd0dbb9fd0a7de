#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace wk {

using cplx = std::complex<double>;
constexpr double kPi = 3.141592653589793238462643383279502884;

struct GridError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ScaleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense complex tensor, row-major.
class NdArray {
 public:
  NdArray() = default;
  explicit NdArray(std::vector<int> shape) : shape_(std::move(shape)) {
    std::size_t n = 1;
    for (int s : shape_) n *= static_cast<std::size_t>(s);
    data_.assign(n, cplx{0.0, 0.0});
    init_strides();
  }

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  std::size_t size() const { return data_.size(); }
  cplx* data() { return data_.data(); }
  const cplx* data() const { return data_.data(); }
  cplx& operator[](std::size_t i) { return data_[i]; }
  const cplx& operator[](std::size_t i) const { return data_[i]; }

  std::size_t stride(int axis) const { return strides_[axis]; }

  std::size_t flat(const std::vector<int>& idx) const {
    std::size_t f = 0;
    for (int a = 0; a < rank(); ++a) f += static_cast<std::size_t>(idx[a]) * strides_[a];
    return f;
  }
  cplx& at(const std::vector<int>& idx) { return data_[flat(idx)]; }
  const cplx& at(const std::vector<int>& idx) const { return data_[flat(idx)]; }

  double max_abs() const {
    double m = 0.0;
    for (const cplx& z : data_) m = std::max(m, std::abs(z));
    return m;
  }
  double norm2() const {  // plain l2 of entries
    double s = 0.0;
    for (const cplx& z : data_) s += std::norm(z);
    return std::sqrt(s);
  }

  NdArray& operator*=(cplx a) {
    for (cplx& z : data_) z *= a;
    return *this;
  }
  NdArray& operator+=(const NdArray& o) {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  NdArray& operator-=(const NdArray& o) {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }

 private:
  void init_strides() {
    strides_.assign(shape_.size(), 1);
    for (int a = rank() - 2; a >= 0; --a)
      strides_[a] = strides_[a + 1] * static_cast<std::size_t>(shape_[a + 1]);
  }
  std::vector<int> shape_;
  std::vector<std::size_t> strides_;
  std::vector<cplx> data_;
};

inline double rel_diff(const NdArray& a, const NdArray& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

// Thread count used by parallel_for; 0 = hardware default.
int& thread_count();

// Deterministic by construction: each worker writes disjoint index ranges,
// there is no cross-thread reduction.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace wk

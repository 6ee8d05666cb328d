#pragma once

#include "coulomb/fields.hpp"

#include <complex>
#include <memory>
#include <vector>

namespace coulomb {

// Aperiodic discrete convolution with the cell-integrated Coulomb kernel on a
// fixed grid geometry, evaluated by zero-padded FFTs. Result at cell i is
// sum_j K(i - j) f_j with K(m) the exact integral of g over the offset cell
// when |m_a| <= 1 on every axis and K(m) = |cell| g(m h) otherwise.
class CoulombConvolver {
 public:
  explicit CoulombConvolver(const GridSpec& grid);
  ~CoulombConvolver();
  CoulombConvolver(const CoulombConvolver&) = delete;
  CoulombConvolver& operator=(const CoulombConvolver&) = delete;

  const GridSpec& grid() const { return grid_; }
  void apply(const double* f, double* out) const;
  std::vector<double> apply(const std::vector<double>& f) const;
  // Convolution with a different kernel on the same geometry (used for the
  // gradient kernels); `kernel(offset)` gives the weight of a cell offset,
  // `self` the weight of the zero offset.
  static std::unique_ptr<CoulombConvolver> with_kernel(
      const GridSpec& grid, const std::function<double(const Vec&)>& kernel, double self);

 private:
  CoulombConvolver(const GridSpec& grid, bool);
  void build(const std::function<double(const Vec&)>& kernel, double self);

  GridSpec grid_;
  std::array<int, 3> padded_{1, 1, 1};
  std::size_t real_size_ = 0;
  std::size_t complex_size_ = 0;
  std::vector<std::complex<double>> kernel_hat_;
  void* forward_ = nullptr;
  void* backward_ = nullptr;
};

}  // namespace coulomb

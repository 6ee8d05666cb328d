#include "coulomb/convolution.hpp"

#include "coulomb/quadrature.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <stdexcept>

namespace coulomb {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t bytes) : p(fftw_malloc(bytes)) {
    if (!p) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(p); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  double* real() { return static_cast<double*>(p); }
  fftw_complex* cplx() { return static_cast<fftw_complex*>(p); }
  void* p;
};

// Cells whose index offset from the target is at most one in every axis use
// the exact box integral of g.
bool in_near_block(const std::array<int, 3>& off) {
  return std::abs(off[0]) <= 1 && std::abs(off[1]) <= 1 && std::abs(off[2]) <= 1;
}

}  // namespace

CoulombConvolver::CoulombConvolver(const GridSpec& grid, bool) : grid_(grid) {
  if (grid.size() == 0) throw std::invalid_argument("CoulombConvolver: empty grid");
}

CoulombConvolver::CoulombConvolver(const GridSpec& grid) : CoulombConvolver(grid, true) {
  const int d = grid.dim;
  Vec h = Vec::Zero();
  for (int a = 0; a < d; ++a) h[a] = grid.h(a);
  const double vol = grid.cell_volume();
  const Vec half = 0.5 * h;
  auto kernel = [&](const Vec& off) {
    std::array<int, 3> m{0, 0, 0};
    for (int a = 0; a < d; ++a) m[a] = int(std::lround(off[a] / h[a]));
    if (in_near_block(m)) {
      Vec lo = off - half, hi = off + half;
      return box_integral_g(Vec::Zero(), lo, hi, d);
    }
    return vol * coulomb_g(off.norm(), d);
  };
  const double self = box_integral_g(Vec::Zero(), -half, half, d);
  build(kernel, self);
}

std::unique_ptr<CoulombConvolver> CoulombConvolver::with_kernel(
    const GridSpec& grid, const std::function<double(const Vec&)>& kernel, double self) {
  std::unique_ptr<CoulombConvolver> c(new CoulombConvolver(grid, true));
  c->build(kernel, self);
  return c;
}

CoulombConvolver::~CoulombConvolver() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (forward_) fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  if (backward_) fftw_destroy_plan(static_cast<fftw_plan>(backward_));
}

void CoulombConvolver::build(const std::function<double(const Vec&)>& kernel, double self) {
  const GridSpec& g = grid_;
  for (int a = 0; a < 3; ++a) padded_[a] = (a < g.dim) ? 2 * g.n[a] : 1;
  real_size_ = std::size_t(padded_[0]) * padded_[1] * padded_[2];
  complex_size_ = std::size_t(padded_[0] / 2 + 1) * padded_[1] * padded_[2];

  FftwBuffer rbuf(sizeof(double) * real_size_);
  FftwBuffer cbuf(sizeof(fftw_complex) * complex_size_);

  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    // FFTW is row-major (last index fastest); our first axis is fastest.
    int dims[3];
    int rank = g.dim;
    for (int a = 0; a < rank; ++a) dims[a] = padded_[rank - 1 - a];
    forward_ = fftw_plan_dft_r2c(rank, dims, rbuf.real(), cbuf.cplx(), FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r(rank, dims, cbuf.cplx(), rbuf.real(), FFTW_ESTIMATE);
    if (!forward_ || !backward_) throw std::runtime_error("CoulombConvolver: FFTW planning failed");
  }

  double* kr = rbuf.real();
  std::memset(kr, 0, sizeof(double) * real_size_);
  const int nz = (g.dim == 3) ? g.n[2] : 1;
  for (int k = -(nz - 1); k <= nz - 1; ++k)
    for (int j = -(g.n[1] - 1); j <= g.n[1] - 1; ++j)
      for (int i = -(g.n[0] - 1); i <= g.n[0] - 1; ++i) {
        const int pi = (i + padded_[0]) % padded_[0];
        const int pj = (j + padded_[1]) % padded_[1];
        const int pk = (k + padded_[2]) % padded_[2];
        const std::size_t idx =
            std::size_t(pi) + std::size_t(padded_[0]) * (std::size_t(pj) + std::size_t(padded_[1]) * pk);
        if (i == 0 && j == 0 && k == 0) {
          kr[idx] = self;
        } else {
          const Vec off(i * g.h(0), j * g.h(1), g.dim == 3 ? k * g.h(2) : 0.0);
          kr[idx] = kernel(off);
        }
      }
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_), kr, cbuf.cplx());
  kernel_hat_.resize(complex_size_);
  const double scale = 1.0 / double(real_size_);
  for (std::size_t c = 0; c < complex_size_; ++c)
    kernel_hat_[c] = std::complex<double>(cbuf.cplx()[c][0], cbuf.cplx()[c][1]) * scale;
}

void CoulombConvolver::apply(const double* f, double* out) const {
  const GridSpec& g = grid_;
  FftwBuffer rbuf(sizeof(double) * real_size_);
  FftwBuffer cbuf(sizeof(fftw_complex) * complex_size_);
  double* r = rbuf.real();
  std::memset(r, 0, sizeof(double) * real_size_);
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j) {
      const std::size_t src = g.index(0, j, k);
      const std::size_t dst = std::size_t(padded_[0]) * (j + std::size_t(padded_[1]) * k);
      std::memcpy(r + dst, f + src, sizeof(double) * g.n[0]);
    }
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_), r, cbuf.cplx());
  fftw_complex* c = cbuf.cplx();
  for (std::size_t q = 0; q < complex_size_; ++q) {
    const std::complex<double> v = std::complex<double>(c[q][0], c[q][1]) * kernel_hat_[q];
    c[q][0] = v.real();
    c[q][1] = v.imag();
  }
  fftw_execute_dft_c2r(static_cast<fftw_plan>(backward_), c, r);
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j) {
      const std::size_t dst = g.index(0, j, k);
      const std::size_t src = std::size_t(padded_[0]) * (j + std::size_t(padded_[1]) * k);
      std::memcpy(out + dst, r + src, sizeof(double) * g.n[0]);
    }
}

std::vector<double> CoulombConvolver::apply(const std::vector<double>& f) const {
  if (f.size() != grid_.size()) throw std::invalid_argument("CoulombConvolver: size mismatch");
  std::vector<double> out(f.size());
  apply(f.data(), out.data());
  return out;
}

// ---------------------------------------------------------------------------
// CoulombPotential

CoulombPotential::CoulombPotential(const GridDensity& mu) : mu_(mu) {
  if (mu.size() == 0) throw std::invalid_argument("convolve_g: empty grid");
  nodal_ = convolve_g_nodal(mu);
  grad_ = stencil_gradient(nodal_);
}

double CoulombPotential::value(const Vec& x) const {
  const GridSpec& g = mu_.grid();
  const int d = g.dim;
  const auto c = g.locate(x);
  const double vol = g.cell_volume();
  std::vector<double> row(g.n[0]);
  std::vector<double> partial;
  partial.reserve(std::size_t(g.n[1]) * g.n[2]);
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j) {
      const double dy = g.lo[1] + (j + 0.5) * g.h(1) - x[1];
      const double dz = (d == 3) ? g.lo[2] + (k + 0.5) * g.h(2) - x[2] : 0.0;
      const double tr2 = dy * dy + dz * dz;
      const bool near_jk = std::abs(j - c[1]) <= 1 && (d == 2 || std::abs(k - c[2]) <= 1);
      const std::size_t base = g.index(0, j, k);
      for (int i = 0; i < g.n[0]; ++i) {
        const double m = mu_[base + i];
        if (m == 0.0) {
          row[i] = 0.0;
          continue;
        }
        if (near_jk && std::abs(i - c[0]) <= 1) {
          Vec lo, hi;
          g.cell_box(base + i, lo, hi);
          row[i] = m * box_integral_g(x, lo, hi, d);
        } else {
          const double dx = g.lo[0] + (i + 0.5) * g.h(0) - x[0];
          const double r2 = dx * dx + tr2;
          row[i] = m * vol * (d == 2 ? -0.5 * std::log(r2) : 1.0 / std::sqrt(r2));
        }
      }
      partial.push_back(tree_sum(row));
    }
  return tree_sum(partial);
}

double CoulombPotential::value_with_exact_ball(const Vec& x, const Vec& near, double radius) const {
  const GridSpec& g = mu_.grid();
  const int d = g.dim;
  const double vol = g.cell_volume();
  const double r2max = radius * radius;
  std::vector<double> terms(g.size(), 0.0);
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const double m = mu_[idx];
    if (m == 0.0) continue;
    const Vec c = g.center(idx);
    if ((c - near).squaredNorm() <= r2max) {
      Vec lo, hi;
      g.cell_box(idx, lo, hi);
      terms[idx] = m * box_integral_g(x, lo, hi, d);
    } else {
      terms[idx] = m * vol * coulomb_g((c - x).norm(), d);
    }
  }
  return tree_sum(terms);
}

double CoulombPotential::self_energy() const { return integrate_product(nodal_, mu_); }

Vec CoulombPotential::do_gradient(const Vec& x) const {
  Vec v = Vec::Zero();
  for (int a = 0; a < dim(); ++a) v[a] = grad_[a].interpolate(x, Interp::linear);
  return v;
}

Mat CoulombPotential::do_hessian(const Vec&) const {
  throw std::domain_error("CoulombPotential: hessian not available");
}

CoulombPotential convolve_g(const GridDensity& mu) { return CoulombPotential(mu); }

GridFunction convolve_g_nodal(const GridFunction& f) {
  if (f.size() == 0) throw std::invalid_argument("convolve_g: empty grid");
  const CoulombConvolver conv(f.grid());
  return GridFunction(f.grid(), conv.apply(f.values()));
}

}  // namespace coulomb

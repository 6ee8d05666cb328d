#pragma once

#include "coulomb/kernel.hpp"

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace coulomb {

// ---------------------------------------------------------------------------
// Grids

struct GridSpec {
  int dim = 2;
  std::array<int, 3> n{1, 1, 1};
  Vec lo = Vec::Zero();
  Vec hi = Vec::Zero();

  GridSpec() = default;
  GridSpec(int d, int cells_per_axis, const Vec& lo, const Vec& hi);
  GridSpec(int d, std::array<int, 3> n, const Vec& lo, const Vec& hi);

  // Cube [-half, half]^d with `cells` cells per axis.
  static GridSpec cube(int d, double half, int cells);

  std::size_t size() const { return std::size_t(n[0]) * n[1] * n[2]; }
  double h(int axis) const { return (hi[axis] - lo[axis]) / n[axis]; }
  double cell_volume() const;
  std::size_t index(int i, int j, int k = 0) const {
    return std::size_t(i) + std::size_t(n[0]) * (std::size_t(j) + std::size_t(n[1]) * k);
  }
  std::array<int, 3> unravel(std::size_t idx) const;
  Vec center(std::size_t idx) const;
  Vec center(int i, int j, int k = 0) const;
  void cell_box(std::size_t idx, Vec& clo, Vec& chi) const;
  bool contains(const Vec& x) const;
  // Cell holding x (clamped to the grid).
  std::array<int, 3> locate(const Vec& x) const;
  bool same_geometry(const GridSpec& o) const;
  // Same box, `factor` times more cells per axis.
  GridSpec refined(int factor) const;
  GridSpec coarsened(int factor) const;
};

enum class Interp { linear, cubic };

class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(const GridSpec& g, double fill = 0.0) : grid_(g), v_(g.size(), fill) {}
  GridFunction(const GridSpec& g, std::vector<double> values);

  const GridSpec& grid() const { return grid_; }
  int dim() const { return grid_.dim; }
  std::size_t size() const { return v_.size(); }
  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }
  const std::vector<double>& values() const { return v_; }
  std::vector<double>& values() { return v_; }
  double at(int i, int j, int k = 0) const { return v_[grid_.index(i, j, k)]; }

  // Interpolation between cell centres; constant extrapolation past the outermost centres.
  double interpolate(const Vec& x, Interp mode = Interp::linear) const;

  double integral() const;
  double max_abs() const;

 private:
  GridSpec grid_;
  std::vector<double> v_;
};

class GridDensity : public GridFunction {
 public:
  GridDensity() = default;
  // Rejects negative or non-finite values.
  GridDensity(const GridSpec& g, std::vector<double> values);
  explicit GridDensity(const GridFunction& f);

  double mass() const { return integral(); }
  GridDensity normalized() const;
  // Piecewise-constant refinement: the same density on a finer grid.
  GridDensity upsampled(int factor) const;
  // Point evaluation (multilinear interpolation of cell values).
  double value_at(const Vec& x) const { return interpolate(x, Interp::linear); }
};

// ---------------------------------------------------------------------------
// Closed-form and grid-backed fields

class ScalarField {
 public:
  virtual ~ScalarField() = default;
  virtual int dim() const = 0;
  // Declared number of available derivatives.
  virtual int order() const = 0;
  virtual double value(const Vec& x) const = 0;

  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const;
  double laplacian(const Vec& x) const;

 protected:
  virtual Vec do_gradient(const Vec& x) const = 0;
  virtual Mat do_hessian(const Vec& x) const = 0;
  virtual double do_laplacian(const Vec& x) const;
  void require_order(int k) const;
};

using FieldPtr = std::shared_ptr<const ScalarField>;

class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> c) : c_(std::move(c)) {}
  static Polynomial binomial_bump(int p);  // (1 - s)^p

  double operator()(double s) const;
  Polynomial derivative() const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator+(const Polynomial& o) const;
  Polynomial scaled(double a) const;
  const std::vector<double>& coeffs() const { return c_; }
  int degree() const { return int(c_.size()) - 1; }

 private:
  std::vector<double> c_;
};

// f(x) = P(|x - c|^2 / scale^2), optionally cut to zero where the argument exceeds 1.
class RadialPolynomial : public ScalarField {
 public:
  RadialPolynomial(int d, Vec center, double scale, Polynomial p, bool cutoff, int order);

  int dim() const override { return d_; }
  int order() const override { return order_; }
  double value(const Vec& x) const override;

  // k-th derivative of t -> f(x + t e) at t = 0.
  double directional_derivative(const Vec& x, const Vec& e, int k) const;
  // Laplacian as a field of the same family.
  RadialPolynomial laplacian_field() const;
  // Profile r -> f(center + r e) and its r-derivatives.
  double profile(double r, int k = 0) const;

  const Vec& center() const { return c_; }
  double scale() const { return scale_; }
  const Polynomial& polynomial() const { return p_; }
  bool has_cutoff() const { return cutoff_; }

 protected:
  Vec do_gradient(const Vec& x) const override;
  Mat do_hessian(const Vec& x) const override;
  double do_laplacian(const Vec& x) const override;

 private:
  double arg(const Vec& x) const;
  int d_;
  Vec c_;
  double scale_;
  Polynomial p_;
  bool cutoff_;
  int order_;
};

// xi(x) = (1 - |x - x0|^2 / ell^2)_+^p.
class BumpFamily : public RadialPolynomial {
 public:
  BumpFamily(int d, Vec x0, double ell, int p);
  double ell() const { return ell_; }
  int exponent() const { return p_; }
  // Measured sup over x of the k-th derivative tensor norm.
  double sup_derivative(int k) const;
  // M with |xi|_{C^k} <= M ell^{-k} for all k <= kmax.
  double derivative_constant(int kmax) const;

 private:
  double ell_;
  int p_;
};

class ConstantField : public ScalarField {
 public:
  ConstantField(int d, double c) : d_(d), c_(c) {}
  int dim() const override { return d_; }
  int order() const override { return 1000; }
  double value(const Vec&) const override { return c_; }

 protected:
  Vec do_gradient(const Vec&) const override { return Vec::Zero(); }
  Mat do_hessian(const Vec&) const override { return Mat::Zero(); }

 private:
  int d_;
  double c_;
};

// Interpolated grid values; derivatives from second-order stencils.
class GridScalarField : public ScalarField {
 public:
  explicit GridScalarField(GridFunction f, Interp mode = Interp::linear);
  int dim() const override { return f_.dim(); }
  int order() const override { return 2; }
  double value(const Vec& x) const override { return f_.interpolate(x, mode_); }
  const GridFunction& grid_values() const { return f_; }

 protected:
  Vec do_gradient(const Vec& x) const override;
  Mat do_hessian(const Vec& x) const override;

 private:
  GridFunction f_;
  std::array<GridFunction, 3> grad_;
  std::array<std::array<GridFunction, 3>, 3> hess_;
  Interp mode_;
};

class VectorFieldSpec {
 public:
  VectorFieldSpec() = default;
  explicit VectorFieldSpec(std::vector<FieldPtr> comps);
  int dim() const { return int(comps_.size()); }
  Vec value(const Vec& x) const;
  Mat jacobian(const Vec& x) const;  // row a is the gradient of component a
  double divergence(const Vec& x) const;
  const ScalarField& component(int a) const { return *comps_[a]; }
  const std::vector<FieldPtr>& components() const { return comps_; }
  bool empty() const { return comps_.empty(); }
  VectorFieldSpec scaled(double a) const;

 private:
  std::vector<FieldPtr> comps_;
};

// Potentials: a|x|^2, a|x|^2 + b|x|^4, and radial polynomials sum_k c_k |x|^{2k}.
std::shared_ptr<RadialPolynomial> quadratic_potential(int d, double a = 1.0);
std::shared_ptr<RadialPolynomial> quartic_potential(int d, double a, double b);
std::shared_ptr<RadialPolynomial> radial_polynomial_potential(int d, std::vector<double> coeffs);
// Parses "quad", "quad:a", "quartic:a,b", "poly:c0,c1,...".
std::shared_ptr<RadialPolynomial> parse_potential(const std::string& spec, int d);

// ---------------------------------------------------------------------------
// Grid operations

GridFunction sample(const ScalarField& f, const GridSpec& g);
std::array<GridFunction, 3> stencil_gradient(const GridFunction& f);
GridFunction stencil_laplacian(const GridFunction& f);
GridFunction stencil_divergence(const std::array<GridFunction, 3>& u);
double integrate(const ScalarField& f, const GridSpec& g);
double integrate(const GridFunction& f);
double integrate_product(const GridFunction& a, const GridFunction& b);

// ---------------------------------------------------------------------------
// Coulomb potential of a grid density

class CoulombConvolver;

class CoulombPotential : public ScalarField {
 public:
  explicit CoulombPotential(const GridDensity& mu);

  int dim() const override { return mu_.dim(); }
  int order() const override { return 1; }
  // Direct cell sum: exact cell integrals on the 3^d block around x, midpoint elsewhere.
  double value(const Vec& x) const override;
  // Same sum with exact integrals on every cell whose centre lies within `radius` of `near`.
  double value_with_exact_ball(const Vec& x, const Vec& near, double radius) const;
  // Cubic interpolation of the nodal values.
  double interpolated(const Vec& x) const { return nodal_.interpolate(x, Interp::cubic); }
  // g*mu at the cell centres (self cell exact, midpoint elsewhere).
  const GridFunction& nodal() const { return nodal_; }
  const GridDensity& density() const { return mu_; }
  // Integral of g * mu against mu with the same quadrature.
  double self_energy() const;

 protected:
  Vec do_gradient(const Vec& x) const override;
  Mat do_hessian(const Vec& x) const override;

 private:
  GridDensity mu_;
  GridFunction nodal_;
  std::array<GridFunction, 3> grad_;
};

CoulombPotential convolve_g(const GridDensity& mu);
// Nodal g*f for a signed grid function (self cell exact).
GridFunction convolve_g_nodal(const GridFunction& f);

using Mask = std::vector<unsigned char>;

double energy_EV(const GridDensity& mu, const ScalarField& V);
// Throws if mu vanishes on a cell flagged in `bulk`.
double energy_EthetaV(const GridDensity& mu, const ScalarField& V, double theta,
                      const Mask* bulk = nullptr);
double entropy_integral(const GridDensity& mu, const Mask* bulk = nullptr);  // int mu log mu

}  // namespace coulomb

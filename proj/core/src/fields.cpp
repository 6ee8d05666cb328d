#include "coulomb/fields.hpp"

#include "coulomb/convolution.hpp"
#include "coulomb/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace coulomb {

// ---------------------------------------------------------------------------
// GridSpec

GridSpec::GridSpec(int d, int cells, const Vec& lo_, const Vec& hi_)
    : GridSpec(d, std::array<int, 3>{cells, cells, d == 3 ? cells : 1}, lo_, hi_) {}

GridSpec::GridSpec(int d, std::array<int, 3> n_, const Vec& lo_, const Vec& hi_)
    : dim(d), n(n_), lo(lo_), hi(hi_) {
  if (d != 2 && d != 3) throw std::invalid_argument("GridSpec: dimension must be 2 or 3");
  if (d == 2) {
    n[2] = 1;
    lo[2] = -0.5;
    hi[2] = 0.5;
  }
  for (int a = 0; a < d; ++a) {
    if (n[a] < 1) throw std::invalid_argument("GridSpec: empty grid");
    if (!(hi[a] > lo[a])) throw std::invalid_argument("GridSpec: degenerate box");
  }
}

GridSpec GridSpec::cube(int d, double half, int cells) {
  return GridSpec(d, cells, Vec::Constant(-half), Vec::Constant(half));
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= h(a);
  return v;
}

std::array<int, 3> GridSpec::unravel(std::size_t idx) const {
  const int i = int(idx % n[0]);
  idx /= n[0];
  const int j = int(idx % n[1]);
  const int k = int(idx / n[1]);
  return {i, j, k};
}

Vec GridSpec::center(int i, int j, int k) const {
  Vec c;
  c[0] = lo[0] + (i + 0.5) * h(0);
  c[1] = lo[1] + (j + 0.5) * h(1);
  c[2] = dim == 3 ? lo[2] + (k + 0.5) * h(2) : 0.0;
  return c;
}

Vec GridSpec::center(std::size_t idx) const {
  const auto m = unravel(idx);
  return center(m[0], m[1], m[2]);
}

void GridSpec::cell_box(std::size_t idx, Vec& clo, Vec& chi) const {
  const auto m = unravel(idx);
  clo = Vec::Zero();
  chi = Vec::Zero();
  for (int a = 0; a < dim; ++a) {
    clo[a] = lo[a] + m[a] * h(a);
    chi[a] = clo[a] + h(a);
  }
}

bool GridSpec::contains(const Vec& x) const {
  for (int a = 0; a < dim; ++a)
    if (x[a] < lo[a] || x[a] > hi[a]) return false;
  return true;
}

std::array<int, 3> GridSpec::locate(const Vec& x) const {
  std::array<int, 3> m{0, 0, 0};
  for (int a = 0; a < dim; ++a) {
    const int i = int(std::floor((x[a] - lo[a]) / h(a)));
    m[a] = std::clamp(i, 0, n[a] - 1);
  }
  return m;
}

bool GridSpec::same_geometry(const GridSpec& o) const {
  if (dim != o.dim) return false;
  for (int a = 0; a < dim; ++a) {
    if (n[a] != o.n[a]) return false;
    if (std::abs(lo[a] - o.lo[a]) > 1e-12 * (1 + std::abs(lo[a]))) return false;
    if (std::abs(hi[a] - o.hi[a]) > 1e-12 * (1 + std::abs(hi[a]))) return false;
  }
  return true;
}

GridSpec GridSpec::refined(int factor) const {
  std::array<int, 3> m = n;
  for (int a = 0; a < dim; ++a) m[a] *= factor;
  return GridSpec(dim, m, lo, hi);
}

GridSpec GridSpec::coarsened(int factor) const {
  std::array<int, 3> m = n;
  for (int a = 0; a < dim; ++a) {
    if (n[a] % factor != 0) throw std::invalid_argument("GridSpec::coarsened: not divisible");
    m[a] /= factor;
  }
  return GridSpec(dim, m, lo, hi);
}

// ---------------------------------------------------------------------------
// GridFunction

GridFunction::GridFunction(const GridSpec& g, std::vector<double> values)
    : grid_(g), v_(std::move(values)) {
  if (v_.size() != g.size()) throw std::invalid_argument("GridFunction: size mismatch");
}

namespace {

struct AxisWeights {
  int idx[4];
  double w[4];
  int count;
};

AxisWeights axis_weights(double x, double lo, double h, int n, Interp mode) {
  AxisWeights aw{};
  if (n == 1) {
    aw.idx[0] = 0;
    aw.w[0] = 1.0;
    aw.count = 1;
    return aw;
  }
  double t = (x - lo) / h - 0.5;
  t = std::clamp(t, 0.0, double(n - 1));
  int i0 = int(std::floor(t));
  if (i0 >= n - 1) i0 = n - 2;
  const double f = t - i0;
  if (mode == Interp::linear) {
    aw.idx[0] = i0;
    aw.idx[1] = i0 + 1;
    aw.w[0] = 1.0 - f;
    aw.w[1] = f;
    aw.count = 2;
    return aw;
  }
  const double f2 = f * f, f3 = f2 * f;
  const double w[4] = {0.5 * (-f3 + 2 * f2 - f), 0.5 * (3 * f3 - 5 * f2 + 2),
                       0.5 * (-3 * f3 + 4 * f2 + f), 0.5 * (f3 - f2)};
  for (int k = 0; k < 4; ++k) {
    aw.idx[k] = std::clamp(i0 - 1 + k, 0, n - 1);
    aw.w[k] = w[k];
  }
  aw.count = 4;
  return aw;
}

}  // namespace

double GridFunction::interpolate(const Vec& x, Interp mode) const {
  const GridSpec& g = grid_;
  AxisWeights ax[3];
  for (int a = 0; a < 3; ++a)
    ax[a] = (a < g.dim) ? axis_weights(x[a], g.lo[a], g.h(a), g.n[a], mode)
                        : axis_weights(0.0, 0.0, 1.0, 1, mode);
  double s = 0.0;
  for (int c = 0; c < ax[2].count; ++c)
    for (int b = 0; b < ax[1].count; ++b) {
      const double wbc = ax[1].w[b] * ax[2].w[c];
      const std::size_t base = g.index(0, ax[1].idx[b], ax[2].idx[c]);
      for (int a = 0; a < ax[0].count; ++a) s += ax[0].w[a] * wbc * v_[base + ax[0].idx[a]];
    }
  return s;
}

double GridFunction::integral() const { return tree_sum(v_) * grid_.cell_volume(); }

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double v : v_) m = std::max(m, std::abs(v));
  return m;
}

// ---------------------------------------------------------------------------
// GridDensity

GridDensity::GridDensity(const GridSpec& g, std::vector<double> values)
    : GridFunction(g, std::move(values)) {
  for (double v : this->values())
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("GridDensity: values must be finite and nonnegative");
}

GridDensity::GridDensity(const GridFunction& f) : GridDensity(f.grid(), f.values()) {}

GridDensity GridDensity::normalized() const {
  const double m = mass();
  if (!(m > 0.0)) throw std::domain_error("GridDensity::normalized: zero mass");
  std::vector<double> v = values();
  for (double& x : v) x /= m;
  return GridDensity(grid(), std::move(v));
}

GridDensity GridDensity::upsampled(int factor) const {
  const GridSpec fine = grid().refined(factor);
  std::vector<double> v(fine.size());
  for (std::size_t idx = 0; idx < fine.size(); ++idx) {
    auto m = fine.unravel(idx);
    for (int a = 0; a < grid().dim; ++a) m[a] /= factor;
    v[idx] = (*this)[grid().index(m[0], m[1], m[2])];
  }
  return GridDensity(fine, std::move(v));
}

// ---------------------------------------------------------------------------
// ScalarField

void ScalarField::require_order(int k) const {
  if (order() < k) {
    std::ostringstream os;
    os << "field provides " << order() << " derivatives, " << k << " requested";
    throw std::domain_error(os.str());
  }
}

Vec ScalarField::gradient(const Vec& x) const {
  require_order(1);
  return do_gradient(x);
}

Mat ScalarField::hessian(const Vec& x) const {
  require_order(2);
  return do_hessian(x);
}

double ScalarField::laplacian(const Vec& x) const {
  require_order(2);
  return do_laplacian(x);
}

double ScalarField::do_laplacian(const Vec& x) const { return do_hessian(x).trace(); }

// ---------------------------------------------------------------------------
// Polynomial

Polynomial Polynomial::binomial_bump(int p) {
  std::vector<double> c(p + 1);
  double b = 1.0;
  for (int k = 0; k <= p; ++k) {
    c[k] = (k % 2 ? -b : b);
    b = b * (p - k) / (k + 1);
  }
  return Polynomial(std::move(c));
}

double Polynomial::operator()(double s) const {
  double v = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) v = v * s + *it;
  return v;
}

Polynomial Polynomial::derivative() const {
  if (c_.size() <= 1) return Polynomial({0.0});
  std::vector<double> d(c_.size() - 1);
  for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = k * c_[k];
  return Polynomial(std::move(d));
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (c_.empty() || o.c_.empty()) return Polynomial({0.0});
  std::vector<double> r(c_.size() + o.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < c_.size(); ++i)
    for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
  return Polynomial(std::move(r));
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  std::vector<double> r(std::max(c_.size(), o.c_.size()), 0.0);
  for (std::size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
  for (std::size_t i = 0; i < o.c_.size(); ++i) r[i] += o.c_[i];
  return Polynomial(std::move(r));
}

Polynomial Polynomial::scaled(double a) const {
  std::vector<double> r = c_;
  for (double& x : r) x *= a;
  return Polynomial(std::move(r));
}

// ---------------------------------------------------------------------------
// RadialPolynomial

RadialPolynomial::RadialPolynomial(int d, Vec center, double scale, Polynomial p, bool cutoff,
                                   int order)
    : d_(d), c_(std::move(center)), scale_(scale), p_(std::move(p)), cutoff_(cutoff),
      order_(order) {
  if (d == 2) c_[2] = 0.0;
  if (!(scale > 0.0)) throw std::invalid_argument("RadialPolynomial: scale must be positive");
}

double RadialPolynomial::arg(const Vec& x) const {
  double s = 0.0;
  for (int a = 0; a < d_; ++a) s += (x[a] - c_[a]) * (x[a] - c_[a]);
  return s / (scale_ * scale_);
}

double RadialPolynomial::value(const Vec& x) const {
  const double s = arg(x);
  if (cutoff_ && s >= 1.0) return 0.0;
  return p_(s);
}

Vec RadialPolynomial::do_gradient(const Vec& x) const {
  const double s = arg(x);
  if (cutoff_ && s >= 1.0) return Vec::Zero();
  Vec u = x - c_;
  if (d_ == 2) u[2] = 0.0;
  return p_.derivative()(s) * 2.0 * u / (scale_ * scale_);
}

Mat RadialPolynomial::do_hessian(const Vec& x) const {
  const double s = arg(x);
  if (cutoff_ && s >= 1.0) return Mat::Zero();
  Vec u = x - c_;
  if (d_ == 2) u[2] = 0.0;
  const Polynomial d1 = p_.derivative();
  const double s2 = scale_ * scale_;
  Mat id = Mat::Identity();
  if (d_ == 2) id(2, 2) = 0.0;
  return 4.0 * d1.derivative()(s) * (u * u.transpose()) / (s2 * s2) + 2.0 * d1(s) * id / s2;
}

double RadialPolynomial::do_laplacian(const Vec& x) const {
  const double s = arg(x);
  if (cutoff_ && s >= 1.0) return 0.0;
  const Polynomial d1 = p_.derivative();
  return (2.0 * d_ * d1(s) + 4.0 * s * d1.derivative()(s)) / (scale_ * scale_);
}

double RadialPolynomial::directional_derivative(const Vec& x, const Vec& e, int k) const {
  if (k > order_) require_order(k);
  const double s = arg(x);
  if (cutoff_ && s >= 1.0) return 0.0;
  double ue = 0.0, ee = 0.0, uu = 0.0;
  for (int a = 0; a < d_; ++a) {
    ue += (x[a] - c_[a]) * e[a];
    ee += e[a] * e[a];
    uu += (x[a] - c_[a]) * (x[a] - c_[a]);
  }
  const double s2 = scale_ * scale_;
  const Polynomial q({uu / s2, 2.0 * ue / s2, ee / s2});
  // Horner composition P(q(t)).
  Polynomial comp({0.0});
  const auto& c = p_.coeffs();
  for (auto it = c.rbegin(); it != c.rend(); ++it) comp = comp * q + Polynomial({*it});
  const auto& cc = comp.coeffs();
  if (k >= int(cc.size())) return 0.0;
  double fact = 1.0;
  for (int i = 2; i <= k; ++i) fact *= i;
  return fact * cc[k];
}

RadialPolynomial RadialPolynomial::laplacian_field() const {
  const Polynomial d1 = p_.derivative();
  const Polynomial lap =
      (d1.scaled(2.0 * d_) + Polynomial({0.0, 1.0}) * d1.derivative().scaled(4.0))
          .scaled(1.0 / (scale_ * scale_));
  return RadialPolynomial(d_, c_, scale_, lap, cutoff_, std::max(order_ - 2, 0));
}

double RadialPolynomial::profile(double r, int k) const {
  const double s = r * r / (scale_ * scale_);
  if (cutoff_ && s >= 1.0) return 0.0;
  // P(r^2 / scale^2) as a polynomial in r.
  const auto& c = p_.coeffs();
  std::vector<double> rc(2 * c.size() - 1, 0.0);
  double f = 1.0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    rc[2 * j] = c[j] * f;
    f /= scale_ * scale_;
  }
  Polynomial pr(std::move(rc));
  for (int i = 0; i < k; ++i) pr = pr.derivative();
  return pr(r);
}

// ---------------------------------------------------------------------------
// BumpFamily

BumpFamily::BumpFamily(int d, Vec x0, double ell, int p)
    : RadialPolynomial(d, std::move(x0), ell, Polynomial::binomial_bump(p), true, p - 1),
      ell_(ell), p_(p) {
  if (p < 1) throw std::invalid_argument("BumpFamily: exponent must be at least 1");
}

double BumpFamily::sup_derivative(int k) const {
  double m = 0.0;
  const int nr = 401, na = 181;
  for (int i = 0; i < nr; ++i) {
    const double r = ell_ * i / (nr - 1);
    Vec x = center();
    x[0] += r;
    for (int j = 0; j < na; ++j) {
      const double a = std::numbers::pi * j / (na - 1);
      const Vec e(std::cos(a), std::sin(a), 0.0);
      m = std::max(m, std::abs(directional_derivative(x, e, k)));
    }
  }
  return m;
}

double BumpFamily::derivative_constant(int kmax) const {
  double m = 0.0;
  for (int k = 0; k <= kmax; ++k) m = std::max(m, sup_derivative(k) * std::pow(ell_, k));
  return m;
}

// ---------------------------------------------------------------------------
// GridScalarField

GridScalarField::GridScalarField(GridFunction f, Interp mode) : f_(std::move(f)), mode_(mode) {
  grad_ = stencil_gradient(f_);
  for (int a = 0; a < f_.dim(); ++a) hess_[a] = stencil_gradient(grad_[a]);
}

Vec GridScalarField::do_gradient(const Vec& x) const {
  Vec g = Vec::Zero();
  for (int a = 0; a < f_.dim(); ++a) g[a] = grad_[a].interpolate(x, mode_);
  return g;
}

Mat GridScalarField::do_hessian(const Vec& x) const {
  Mat h = Mat::Zero();
  for (int a = 0; a < f_.dim(); ++a)
    for (int b = 0; b < f_.dim(); ++b) h(a, b) = hess_[a][b].interpolate(x, mode_);
  return 0.5 * (h + h.transpose());
}

// ---------------------------------------------------------------------------
// VectorFieldSpec

VectorFieldSpec::VectorFieldSpec(std::vector<FieldPtr> comps) : comps_(std::move(comps)) {
  for (const auto& c : comps_)
    if (!c || c->dim() != int(comps_.size()))
      throw std::invalid_argument("VectorFieldSpec: need d components of dimension d");
}

Vec VectorFieldSpec::value(const Vec& x) const {
  Vec v = Vec::Zero();
  for (std::size_t a = 0; a < comps_.size(); ++a) v[a] = comps_[a]->value(x);
  return v;
}

Mat VectorFieldSpec::jacobian(const Vec& x) const {
  Mat j = Mat::Zero();
  for (std::size_t a = 0; a < comps_.size(); ++a) j.row(a) = comps_[a]->gradient(x).transpose();
  return j;
}

double VectorFieldSpec::divergence(const Vec& x) const { return jacobian(x).trace(); }

namespace {

class ScaledField : public ScalarField {
 public:
  ScaledField(FieldPtr f, double a) : f_(std::move(f)), a_(a) {}
  int dim() const override { return f_->dim(); }
  int order() const override { return f_->order(); }
  double value(const Vec& x) const override { return a_ * f_->value(x); }

 protected:
  Vec do_gradient(const Vec& x) const override { return a_ * f_->gradient(x); }
  Mat do_hessian(const Vec& x) const override { return a_ * f_->hessian(x); }

 private:
  FieldPtr f_;
  double a_;
};

}  // namespace

VectorFieldSpec VectorFieldSpec::scaled(double a) const {
  std::vector<FieldPtr> c;
  for (const auto& f : comps_) c.push_back(std::make_shared<ScaledField>(f, a));
  return VectorFieldSpec(std::move(c));
}

// ---------------------------------------------------------------------------
// Potentials

std::shared_ptr<RadialPolynomial> radial_polynomial_potential(int d, std::vector<double> coeffs) {
  if (coeffs.empty()) throw std::invalid_argument("potential: no coefficients");
  return std::make_shared<RadialPolynomial>(d, Vec::Zero(), 1.0, Polynomial(std::move(coeffs)),
                                            false, 1000);
}

std::shared_ptr<RadialPolynomial> quadratic_potential(int d, double a) {
  if (!(a > 0.0)) throw std::invalid_argument("quadratic potential: a must be positive");
  return radial_polynomial_potential(d, {0.0, a});
}

std::shared_ptr<RadialPolynomial> quartic_potential(int d, double a, double b) {
  if (!(a > 0.0) || b < 0.0) throw std::invalid_argument("quartic potential: need a > 0, b >= 0");
  return radial_polynomial_potential(d, {0.0, a, b});
}

std::shared_ptr<RadialPolynomial> parse_potential(const std::string& spec, int d) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos) {
    std::stringstream ss(spec.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) args.push_back(std::stod(tok));
  }
  if (kind == "quad" || kind == "quadratic") return quadratic_potential(d, args.empty() ? 1.0 : args[0]);
  if (kind == "quartic") {
    if (args.size() != 2) throw std::invalid_argument("quartic potential needs a,b");
    return quartic_potential(d, args[0], args[1]);
  }
  if (kind == "poly") return radial_polynomial_potential(d, args);
  throw std::invalid_argument("unknown potential '" + spec + "' (quad, quartic:a,b, poly:c0,c1,...)");
}

// ---------------------------------------------------------------------------
// Grid operations

GridFunction sample(const ScalarField& f, const GridSpec& g) {
  GridFunction out(g);
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = f.value(g.center(i));
  return out;
}

namespace {

std::size_t stride(const GridSpec& g, int a) {
  if (a == 0) return 1;
  if (a == 1) return std::size_t(g.n[0]);
  return std::size_t(g.n[0]) * g.n[1];
}

}  // namespace

std::array<GridFunction, 3> stencil_gradient(const GridFunction& f) {
  const GridSpec& g = f.grid();
  std::array<GridFunction, 3> out{GridFunction(g), GridFunction(g), GridFunction(g)};
  for (int a = 0; a < g.dim; ++a) {
    const std::size_t s = stride(g, a);
    const int n = g.n[a];
    const double h = g.h(a);
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
      const int i = g.unravel(idx)[a];
      double d;
      if (n < 3) {
        d = 0.0;
      } else if (i == 0) {
        d = (-3 * f[idx] + 4 * f[idx + s] - f[idx + 2 * s]) / (2 * h);
      } else if (i == n - 1) {
        d = (3 * f[idx] - 4 * f[idx - s] + f[idx - 2 * s]) / (2 * h);
      } else {
        d = (f[idx + s] - f[idx - s]) / (2 * h);
      }
      out[a][idx] = d;
    }
  }
  return out;
}

GridFunction stencil_laplacian(const GridFunction& f) {
  const GridSpec& g = f.grid();
  GridFunction out(g);
  for (int a = 0; a < g.dim; ++a) {
    const std::size_t s = stride(g, a);
    const int n = g.n[a];
    const double h2 = g.h(a) * g.h(a);
    if (n < 4) continue;
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
      const int i = g.unravel(idx)[a];
      double d;
      if (i == 0) {
        d = 2 * f[idx] - 5 * f[idx + s] + 4 * f[idx + 2 * s] - f[idx + 3 * s];
      } else if (i == n - 1) {
        d = 2 * f[idx] - 5 * f[idx - s] + 4 * f[idx - 2 * s] - f[idx - 3 * s];
      } else {
        d = f[idx + s] - 2 * f[idx] + f[idx - s];
      }
      out[idx] += d / h2;
    }
  }
  return out;
}

GridFunction stencil_divergence(const std::array<GridFunction, 3>& u) {
  const GridSpec& g = u[0].grid();
  GridFunction out(g);
  for (int a = 0; a < g.dim; ++a) {
    const auto d = stencil_gradient(u[a]);
    for (std::size_t i = 0; i < g.size(); ++i) out[i] += d[a][i];
  }
  return out;
}

double integrate(const ScalarField& f, const GridSpec& g) {
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = f.value(g.center(i));
  return tree_sum(v) * g.cell_volume();
}

double integrate(const GridFunction& f) { return f.integral(); }

double integrate_product(const GridFunction& a, const GridFunction& b) {
  if (!a.grid().same_geometry(b.grid())) throw std::invalid_argument("integrate_product: grids differ");
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i] * b[i];
  return tree_sum(v) * a.grid().cell_volume();
}

// ---------------------------------------------------------------------------
// Energies

double entropy_integral(const GridDensity& mu, const Mask* bulk) {
  std::vector<double> v(mu.size(), 0.0);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double m = mu[i];
    if (m > 0.0) {
      v[i] = m * std::log(m);
    } else if (bulk && (*bulk)[i]) {
      throw std::domain_error("entropy: density vanishes inside the bulk");
    }
  }
  return tree_sum(v) * mu.grid().cell_volume();
}

double energy_EV(const GridDensity& mu, const ScalarField& V) {
  const CoulombPotential pot(mu);
  const GridFunction vg = sample(V, mu.grid());
  return 0.5 * pot.self_energy() + integrate_product(vg, mu);
}

double energy_EthetaV(const GridDensity& mu, const ScalarField& V, double theta, const Mask* bulk) {
  if (!(theta > 0.0)) throw std::invalid_argument("energy_EthetaV: theta must be positive");
  return energy_EV(mu, V) + entropy_integral(mu, bulk) / theta;
}

}  // namespace coulomb

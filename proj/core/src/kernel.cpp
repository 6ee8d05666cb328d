#include "coulomb/kernel.hpp"

#include "coulomb/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace coulomb {

namespace {

void check_dim(int d) {
  if (d < 2) throw std::invalid_argument("dimension must be at least 2, got " + std::to_string(d));
}

// Antiderivative of log(x^2 + y^2) in both variables.
double log_prim_2d(double x, double y) {
  double v = 0.0;
  const double r2 = x * x + y * y;
  if (x != 0.0 && y != 0.0) v += x * y * (std::log(r2) - 3.0);
  if (x != 0.0) v += x * x * std::atan(y / x);
  if (y != 0.0) v += y * y * std::atan(x / y);
  return v;
}

// log(a + r) with r = sqrt(a^2 + b2), stable for negative a.
double log_a_plus_r(double a, double b2, double r) {
  if (a >= 0.0) return std::log(a + r);
  return std::log(b2 / (r - a));
}

// Antiderivative of 1/|u| in all three variables.
double inv_r_prim_3d(double x, double y, double z) {
  const double r = std::sqrt(x * x + y * y + z * z);
  if (r == 0.0) return 0.0;
  double v = 0.0;
  if (y != 0.0 && z != 0.0) v += y * z * log_a_plus_r(x, y * y + z * z, r);
  if (x != 0.0 && z != 0.0) v += x * z * log_a_plus_r(y, x * x + z * z, r);
  if (x != 0.0 && y != 0.0) v += x * y * log_a_plus_r(z, x * x + y * y, r);
  if (x != 0.0) v -= 0.5 * x * x * std::atan(y * z / (x * r));
  if (y != 0.0) v -= 0.5 * y * y * std::atan(x * z / (y * r));
  if (z != 0.0) v -= 0.5 * z * z * std::atan(x * y / (z * r));
  return v;
}

}  // namespace

double unit_sphere_area(int d) {
  check_dim(d);
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

double coulomb_cd(int d) {
  check_dim(d);
  if (d == 2) return 2.0 * std::numbers::pi;
  return (d - 2) * unit_sphere_area(d);
}

double coulomb_g(double r, int d) {
  check_dim(d);
  if (!(r > 0.0)) throw std::domain_error("coulomb_g: r must be positive");
  if (d == 2) return -std::log(r);
  if (d == 3) return 1.0 / r;
  return std::pow(r, 2.0 - d);
}

Kernel::Kernel(int d) : dim(d), cd(coulomb_cd(d)) {}

double Kernel::g(double r) const { return coulomb_g(r, dim); }

Vec Kernel::grad(const Vec& z) const {
  const double r2 = z.squaredNorm();
  if (dim == 2) return -z / r2;
  const double r = std::sqrt(r2);
  return -(dim - 2) * z / std::pow(r, dim);
}

Mat Kernel::hessian(const Vec& z) const {
  const double r2 = z.squaredNorm();
  const double r = std::sqrt(r2);
  const double k = (dim == 2) ? 1.0 : dim - 2.0;
  const double rd = std::pow(r, dim);
  Mat h = -k * (Mat::Identity() / rd - dim * (z * z.transpose()) / (rd * r2));
  if (dim == 2) {
    h(2, 2) = 0.0;
  }
  return h;
}

double ExtendedReal::value() const {
  if (infinite_) throw std::domain_error("ExtendedReal: value of the infinite variant");
  return v_;
}

ExtendedReal f_eta_radial(double r, double eta, int d) {
  if (!(eta > 0.0)) throw std::domain_error("f_eta: eta must be positive");
  if (r >= eta) return ExtendedReal::finite(0.0);
  if (r <= 0.0) return ExtendedReal::infinite();
  return ExtendedReal::finite(coulomb_g(r, d) - coulomb_g(eta, d));
}

ExtendedReal f_eta(const Vec& x, double eta, int d) { return f_eta_radial(x.norm(), eta, d); }

double g_eta_radial(double r, double eta, int d) {
  if (!(eta > 0.0)) throw std::domain_error("g_eta: eta must be positive");
  if (r <= eta) return coulomb_g(eta, d);
  return coulomb_g(r, d);
}

double g_eta(const Vec& x, double eta, int d) { return g_eta_radial(x.norm(), eta, d); }

double box_integral_g(const Vec& x, const Vec& lo, const Vec& hi, int d) {
  if (d == 2) {
    const double a1 = lo[0] - x[0], b1 = hi[0] - x[0];
    const double a2 = lo[1] - x[1], b2 = hi[1] - x[1];
    const double s = log_prim_2d(b1, b2) - log_prim_2d(a1, b2) - log_prim_2d(b1, a2) +
                     log_prim_2d(a1, a2);
    return -0.5 * s;
  }
  if (d == 3) {
    const double a[3] = {lo[0] - x[0], lo[1] - x[1], lo[2] - x[2]};
    const double b[3] = {hi[0] - x[0], hi[1] - x[1], hi[2] - x[2]};
    double s = 0.0;
    for (int m = 0; m < 8; ++m) {
      const bool u = m & 1, v = m & 2, w = m & 4;
      const int lower = (!u) + (!v) + (!w);
      const double f = inv_r_prim_3d(u ? b[0] : a[0], v ? b[1] : a[1], w ? b[2] : a[2]);
      s += (lower % 2 == 0) ? f : -f;
    }
    return s;
  }
  throw std::invalid_argument("box_integral_g: only d = 2, 3");
}

GaussRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = beta;
    J(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double half = 0.5 * (b - a);
  for (int k = 0; k < n; ++k) {
    const double v0 = es.eigenvectors()(0, k);
    rule.nodes[k] = a + half * (es.eigenvalues()[k] + 1.0);
    rule.weights[k] = 2.0 * v0 * v0 * half;
  }
  return rule;
}

double tree_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t m = n / 2;
  return tree_sum(x, m) + tree_sum(x + m, n - m);
}

SphereRule SphereRule::make(int d, int order) {
  SphereRule rule;
  if (order < 1) throw std::invalid_argument("SphereRule: order must be positive");
  if (d == 2) {
    for (int k = 0; k < order; ++k) {
      const double a = 2.0 * std::numbers::pi * k / order;
      rule.nodes.emplace_back(std::cos(a), std::sin(a), 0.0);
      rule.weights.push_back(1.0 / order);
    }
    return rule;
  }
  if (d != 3) throw std::invalid_argument("SphereRule: only d = 2, 3");
  if (order == 26) {
    const double s2 = 1.0 / std::sqrt(2.0), s3 = 1.0 / std::sqrt(3.0);
    for (int ax = 0; ax < 3; ++ax)
      for (int sg : {-1, 1}) {
        Vec v = Vec::Zero();
        v[ax] = sg;
        rule.nodes.push_back(v);
        rule.weights.push_back(1.0 / 21.0);
      }
    for (int ax = 0; ax < 3; ++ax)
      for (int s1 : {-1, 1})
        for (int s2g : {-1, 1}) {
          Vec v = Vec::Zero();
          v[(ax + 1) % 3] = s1 * s2;
          v[(ax + 2) % 3] = s2g * s2;
          rule.nodes.push_back(v);
          rule.weights.push_back(4.0 / 105.0);
        }
    for (int s1 : {-1, 1})
      for (int s2g : {-1, 1})
        for (int s3g : {-1, 1}) {
          rule.nodes.emplace_back(s1 * s3, s2g * s3, s3g * s3);
          rule.weights.push_back(9.0 / 280.0);
        }
    return rule;
  }
  const GaussRule gl = gauss_legendre(order);
  const int nphi = 2 * order;
  for (int i = 0; i < order; ++i) {
    const double c = gl.nodes[i];
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (int k = 0; k < nphi; ++k) {
      const double a = 2.0 * std::numbers::pi * (k + 0.5) / nphi;
      rule.nodes.emplace_back(s * std::cos(a), s * std::sin(a), c);
      rule.weights.push_back(0.5 * gl.weights[i] / nphi);
    }
  }
  return rule;
}

SphereRule SphereRule::make_default(int d) { return make(d, d == 2 ? 64 : 26); }

double sphere_average(const std::function<double(const Vec&)>& f, const Vec& center, double eta,
                      const SphereRule& rule) {
  double s = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k)
    s += rule.weights[k] * f(center + eta * rule.nodes[k]);
  return s;
}

double sphere_average(const std::function<double(const Vec&)>& f, const Vec& center, double eta,
                      int d) {
  return sphere_average(f, center, eta, SphereRule::make_default(d));
}

}  // namespace coulomb

#pragma once

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace coulomb {

// Points live in 3-vectors; in dimension 2 the last coordinate is zero.
using Vec = Eigen::Vector3d;
using Mat = Eigen::Matrix3d;

double unit_sphere_area(int d);

struct Kernel {
  int dim = 2;
  double cd = 0.0;

  explicit Kernel(int d);

  double g(double r) const;
  // gradient and Hessian of x -> g(|x|)
  Vec grad(const Vec& z) const;
  Mat hessian(const Vec& z) const;
};

double coulomb_g(double r, int d);
double coulomb_cd(int d);

// A value that is either finite or +infinity, kept out of floating arithmetic.
class ExtendedReal {
 public:
  static ExtendedReal finite(double v) { return ExtendedReal(v, false); }
  static ExtendedReal infinite() { return ExtendedReal(0.0, true); }

  bool is_infinite() const { return infinite_; }
  double value() const;  // throws on the infinite variant

 private:
  ExtendedReal(double v, bool inf) : v_(v), infinite_(inf) {}
  double v_;
  bool infinite_;
};

ExtendedReal f_eta(const Vec& x, double eta, int d);
ExtendedReal f_eta_radial(double r, double eta, int d);
double g_eta(const Vec& x, double eta, int d);
double g_eta_radial(double r, double eta, int d);

// Integral of g(x - y) over y in the box [lo, hi] (d = 2 or 3).
double box_integral_g(const Vec& x, const Vec& lo, const Vec& hi, int d);

struct SphereRule {
  std::vector<Vec> nodes;  // unit vectors
  std::vector<double> weights;  // sum to one

  // d = 2: `order` equispaced angles. d = 3: order 26 gives the degree-7
  // Lebedev rule, otherwise a Gauss-Legendre x trapezoid product rule with
  // `order` polar nodes and 2*order azimuthal nodes.
  static SphereRule make(int d, int order);
  static SphereRule make_default(int d);
};

double sphere_average(const std::function<double(const Vec&)>& f, const Vec& center, double eta,
                      const SphereRule& rule);
double sphere_average(const std::function<double(const Vec&)>& f, const Vec& center, double eta,
                      int d);

}  // namespace coulomb

#include "coulomb/equilibrium.hpp"

#include "coulomb/convolution.hpp"
#include "coulomb/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace coulomb {

// ---------------------------------------------------------------------------
// Scale parameters

double chi_beta(double beta, int d) {
  if (!(beta > 0.0)) throw std::invalid_argument("chi: beta must be positive");
  if (d >= 3) return 1.0;
  return 1.0 + std::max(-std::log(beta), 0.0);
}

ScaleParameters ScaleParameters::make(double beta, int N, int d, double C_rho, double C_d0) {
  if (N < 1) throw std::invalid_argument("ScaleParameters: N must be positive");
  if (d < 2) throw std::invalid_argument("ScaleParameters: d must be at least 2");
  if (!(beta > 0.0)) throw std::invalid_argument("ScaleParameters: beta must be positive");
  ScaleParameters p;
  p.beta = beta;
  p.N = N;
  p.d = d;
  p.C_rho = C_rho;
  p.C_d0 = C_d0;
  const double n = N;
  p.theta = beta * std::pow(n, 2.0 / d);
  p.chi = chi_beta(beta, d);
  double r = std::max(1.0, std::sqrt(p.chi / beta));
  if (d >= 5) r = std::max(r, std::pow(beta, 1.0 / (d - 2) - 1.0));
  p.rho_beta = C_rho * r;
  double m = p.chi * std::pow(n, 1.0 / (d + 2));
  m = std::max(m, p.chi * std::pow(beta, -1.0 - 1.0 / d) * std::pow(p.rho_beta, -double(d)));
  m = std::max(m, std::pow(n, 1.0 / (3.0 * d)) * std::pow(beta, -1.0 / 3.0));
  if (d == 2) m = std::max(m, 1.0 / std::sqrt(beta));
  p.d0 = C_d0 * std::pow(n, -1.0 / d) * m;
  return p;
}

double ScaleParameters::d0_floor() const { return C_d0 * std::pow(theta, -1.0 / 3.0); }

std::string Admissibility::message() const {
  std::ostringstream os;
  os << (ok ? "satisfied: " : "violated: ") << inequality << " (lhs " << lhs << ", rhs " << rhs << ")";
  return os.str();
}

Admissibility ell_admissible(const ScaleParameters& p, double ell, double ell_max) {
  Admissibility a;
  const double lower = p.rho_beta * std::pow(double(p.N), -1.0 / p.d);
  if (!(lower < ell)) {
    a.ok = false;
    a.inequality = "rho_beta N^{-1/d} < ell";
    a.lhs = lower;
    a.rhs = ell;
    return a;
  }
  a.inequality = "ell <= ell_max";
  a.lhs = ell;
  a.rhs = ell_max;
  a.ok = ell <= ell_max;
  return a;
}

// ---------------------------------------------------------------------------
// mu_infinity

MuInfinity mu_infinity_quadratic(double a, int d) {
  if (!(a > 0.0)) throw std::invalid_argument("mu_infinity_quadratic: a must be positive");
  return mu_infinity_radial(*quadratic_potential(d, a));
}

MuInfinity mu_infinity_radial(const RadialPolynomial& V) {
  const int d = V.dim();
  const double target = coulomb_cd(d) / unit_sphere_area(d);
  auto flux = [&](double r) { return std::pow(r, d - 1) * V.profile(r, 1); };
  double hi = 1.0;
  int guard = 0;
  while (flux(hi) < target) {
    hi *= 2.0;
    if (++guard > 60) throw std::domain_error("mu_infinity_radial: potential does not confine");
  }
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (flux(mid) < target) lo = mid; else hi = mid;
  }
  MuInfinity m;
  m.radius = 0.5 * (lo + hi);
  // Delta V / c_d rewritten in s = |x|^2 / R^2 with a cutoff at s = 1.
  const RadialPolynomial lap = V.laplacian_field();
  const double cd = coulomb_cd(d);
  std::vector<double> c = lap.polynomial().coeffs();
  double f = 1.0;
  const double k = (m.radius * m.radius) / (lap.scale() * lap.scale());
  for (double& x : c) {
    x *= f / cd;
    f *= k;
  }
  auto dens = std::make_shared<RadialPolynomial>(d, lap.center(), m.radius, Polynomial(c), true,
                                                 lap.order());
  m.density_at_center = dens->value(lap.center());
  m.density = dens;
  return m;
}

GridSpec default_box(const RadialPolynomial& V, double theta, int cells, double inflate) {
  const MuInfinity m = mu_infinity_radial(V);
  const double half = m.radius + inflate / std::sqrt(theta);
  Vec lo = V.center() - Vec::Constant(half), hi = V.center() + Vec::Constant(half);
  return GridSpec(V.dim(), cells, lo, hi);
}

// ---------------------------------------------------------------------------
// Solver

namespace {

class FixedPoint {
 public:
  FixedPoint(const ScalarField& V, const GridSpec& g, double theta, double floor)
      : g_(g), conv_(g), theta_(theta), floor_(floor), vol_(g.cell_volume()) {
    vg_ = sample(V, g).values();
  }

  const GridSpec& grid() const { return g_; }
  double theta() const { return theta_; }
  void set_theta(double t) { theta_ = t; }

  // mu(u) and the Lagrange constant C.
  std::vector<double> density(const std::vector<double>& u, double& C) const {
    const std::size_t n = u.size();
    double smin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) smin = std::min(smin, theta_ * (u[i] + vg_[i]));
    std::vector<double> e(n);
    for (std::size_t i = 0; i < n; ++i) e[i] = std::exp(smin - theta_ * (u[i] + vg_[i]));
    const double z = tree_sum(e) * vol_;
    for (double& x : e) x = std::max(x / z, floor_);
    C = (smin - std::log(z)) / theta_;
    // exp(-theta(u+V))/Z = exp(theta (C - u - V)) with Z = exp(-smin) z.
    return e;
  }

  std::vector<double> residual(const std::vector<double>& u, std::vector<double>& mu, double& C) const {
    mu = density(u, C);
    std::vector<double> gm = conv_.apply(mu);
    for (std::size_t i = 0; i < u.size(); ++i) gm[i] = u[i] - gm[i];
    return gm;
  }

  std::vector<double> convolve(const std::vector<double>& f) const { return conv_.apply(f); }

  // J v = v + theta G [mu (v - <mu, v>)]
  std::vector<double> jacobian(const std::vector<double>& mu, const std::vector<double>& v) const {
    std::vector<double> w(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) w[i] = mu[i] * v[i];
    const double m = tree_sum(w) * vol_;
    for (std::size_t i = 0; i < v.size(); ++i) w[i] = mu[i] * (v[i] - m);
    std::vector<double> gw = conv_.apply(w);
    for (std::size_t i = 0; i < v.size(); ++i) gw[i] = v[i] + theta_ * gw[i];
    return gw;
  }

  const std::vector<double>& potential_values() const { return vg_; }

 private:
  GridSpec g_;
  CoulombConvolver conv_;
  double theta_;
  double floor_;
  double vol_;
  std::vector<double> vg_;
};

// Dense Jacobian on a coarse grid; z = r + P (J_c^{-1} - I) R r.
class TwoLevel {
 public:
  TwoLevel(const GridSpec& fine, int factor) : fine_(fine), factor_(factor) {
    coarse_ = fine.coarsened(factor);
    const std::size_t nc = coarse_.size();
    G_.resize(nc, nc);
    const int d = coarse_.dim;
    for (std::size_t i = 0; i < nc; ++i) {
      const Vec xi = coarse_.center(i);
      for (std::size_t j = 0; j < nc; ++j) {
        Vec lo, hi;
        coarse_.cell_box(j, lo, hi);
        const auto a = coarse_.unravel(i), b = coarse_.unravel(j);
        bool nearb = true;
        for (int k = 0; k < d; ++k) nearb = nearb && std::abs(a[k] - b[k]) <= 1;
        G_(i, j) = nearb ? box_integral_g(xi, lo, hi, d)
                         : coarse_.cell_volume() * coulomb_g((coarse_.center(j) - xi).norm(), d);
      }
    }
  }

  void update(const std::vector<double>& mu, double theta) {
    const std::vector<double> mc = restrict(mu);
    const std::size_t nc = mc.size();
    const double vol = coarse_.cell_volume();
    Eigen::Map<const Eigen::VectorXd> m(mc.data(), Eigen::Index(nc));
    // S = diag(mu) - mu mu^T vol
    Eigen::MatrixXd J = G_ * m.asDiagonal();
    J.noalias() -= (G_ * m) * (m.transpose() * vol);
    J *= theta;
    J.diagonal().array() += 1.0;
    lu_.compute(J);
  }

  std::vector<double> apply(const std::vector<double>& r) const {
    const std::vector<double> rc = restrict(r);
    Eigen::Map<const Eigen::VectorXd> rv(rc.data(), Eigen::Index(rc.size()));
    const Eigen::VectorXd zc = lu_.solve(rv) - rv;
    std::vector<double> z = r;
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += zc[Eigen::Index(parent(i))];
    return z;
  }

  int factor() const { return factor_; }

 private:
  std::size_t parent(std::size_t i) const {
    auto m = fine_.unravel(i);
    for (int a = 0; a < fine_.dim; ++a) m[a] /= factor_;
    return coarse_.index(m[0], m[1], m[2]);
  }
  std::vector<double> restrict(const std::vector<double>& f) const {
    std::vector<double> c(coarse_.size(), 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) c[parent(i)] += f[i];
    const double w = double(coarse_.size()) / double(fine_.size());
    for (double& x : c) x *= w;
    return c;
  }

  GridSpec fine_;
  GridSpec coarse_;
  int factor_;
  Eigen::MatrixXd G_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> p(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) p[i] = a[i] * b[i];
  return tree_sum(p);
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

double sup_norm(const std::vector<double>& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

// Right-preconditioned restarted GMRES for A x = b, x0 = 0.
template <class Op, class Prec>
std::vector<double> gmres(const Op& A, const Prec& M, const std::vector<double>& b, double rtol,
                          int restart, int max_iter, int& iters) {
  const std::size_t n = b.size();
  std::vector<double> x(n, 0.0);
  const double bnorm = norm2(b);
  iters = 0;
  if (bnorm == 0.0) return x;
  std::vector<double> r = b;
  while (iters < max_iter) {
    const double beta = norm2(r);
    if (beta <= rtol * bnorm) break;
    std::vector<std::vector<double>> Vb, Z;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(restart + 1, restart);
    std::vector<double> cs(restart), sn(restart), s(restart + 1, 0.0);
    s[0] = beta;
    Vb.push_back(r);
    for (double& v : Vb[0]) v /= beta;
    int k = 0;
    for (; k < restart && iters < max_iter; ++k, ++iters) {
      Z.push_back(M(Vb[k]));
      std::vector<double> w = A(Z[k]);
      for (int j = 0; j <= k; ++j) {
        H(j, k) = dot(w, Vb[j]);
        for (std::size_t i = 0; i < n; ++i) w[i] -= H(j, k) * Vb[j][i];
      }
      H(k + 1, k) = norm2(w);
      for (int j = 0; j < k; ++j) {
        const double t = cs[j] * H(j, k) + sn[j] * H(j + 1, k);
        H(j + 1, k) = -sn[j] * H(j, k) + cs[j] * H(j + 1, k);
        H(j, k) = t;
      }
      const double den = std::hypot(H(k, k), H(k + 1, k));
      cs[k] = H(k, k) / den;
      sn[k] = H(k + 1, k) / den;
      const double hk1 = H(k + 1, k);
      H(k, k) = den;
      H(k + 1, k) = 0.0;
      s[k + 1] = -sn[k] * s[k];
      s[k] = cs[k] * s[k];
      if (hk1 != 0.0) {
        for (double& v : w) v /= hk1;
      }
      Vb.push_back(std::move(w));
      if (std::abs(s[k + 1]) <= rtol * bnorm) {
        ++k;
        ++iters;
        break;
      }
    }
    std::vector<double> y(k, 0.0);
    for (int i = k - 1; i >= 0; --i) {
      double t = s[i];
      for (int j = i + 1; j < k; ++j) t -= H(i, j) * y[j];
      y[i] = t / H(i, i);
    }
    for (int j = 0; j < k; ++j)
      for (std::size_t i = 0; i < n; ++i) x[i] += y[j] * Z[j][i];
    const std::vector<double> ax = A(x);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ax[i];
    if (std::abs(s[k]) <= rtol * bnorm) break;
  }
  return x;
}

int coarse_factor(const GridSpec& g, double theta) {
  // Resolve wavenumbers up to sqrt(theta c_d mu_max) with mu_max ~ 1.
  const double len = g.hi[0] - g.lo[0];
  const double kcut = std::sqrt(theta * coulomb_cd(g.dim) * 1.0);
  const int nmin = (g.dim == 2) ? 24 : 8;
  const int nmax = (g.dim == 2) ? 48 : 14;
  const int want = std::clamp(int(std::ceil(1.5 * len * kcut / std::numbers::pi)), nmin, nmax);
  for (int f = 1; f <= g.n[0]; ++f) {
    bool divides = true;
    for (int a = 0; a < g.dim; ++a) divides = divides && g.n[a] % f == 0;
    if (!divides) continue;
    if (g.n[0] / f <= want) return f;
  }
  return g.n[0];
}

struct Iterate {
  std::vector<double> u;
  int iterations = 0;
};

void newton(FixedPoint& fp, std::vector<double>& u, const EquilibriumOptions& opt, int& iters,
            bool final_stage) {
  TwoLevel pre(fp.grid(), coarse_factor(fp.grid(), fp.theta()));
  std::vector<double> mu;
  double C;
  std::vector<double> F = fp.residual(u, mu, C);
  double fn = norm2(F);
  for (int it = 0; it < opt.max_iter; ++it) {
    if (sup_norm(F) <= (final_stage ? opt.tol : std::max(opt.tol, 1e-8))) return;
    ++iters;
    pre.update(mu, fp.theta());
    auto A = [&](const std::vector<double>& v) { return fp.jacobian(mu, v); };
    auto M = [&](const std::vector<double>& v) { return pre.apply(v); };
    std::vector<double> rhs(F.size());
    for (std::size_t i = 0; i < F.size(); ++i) rhs[i] = -F[i];
    int gi = 0;
    const double eta = std::clamp(fn, 1e-10, 1e-3);
    const std::vector<double> du = gmres(A, M, rhs, eta, opt.gmres_restart, opt.gmres_max_iter, gi);
    double lambda = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      std::vector<double> trial = u;
      for (std::size_t i = 0; i < u.size(); ++i) trial[i] += lambda * du[i];
      std::vector<double> mut;
      double Ct;
      std::vector<double> Ft = fp.residual(trial, mut, Ct);
      const double ftn = norm2(Ft);
      if (std::isfinite(ftn) && ftn <= (1.0 - 1e-4 * lambda) * fn) {
        u = std::move(trial);
        F = std::move(Ft);
        mu = std::move(mut);
        fn = ftn;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      if (sup_norm(F) <= 10.0 * opt.tol) return;
      throw NonConvergence("solve_mu_theta: line search failed", sup_norm(F));
    }
  }
  if (sup_norm(F) > opt.tol)
    throw NonConvergence("solve_mu_theta: Newton iteration limit reached", sup_norm(F));
}

void picard(FixedPoint& fp, std::vector<double>& u, const EquilibriumOptions& opt, int& iters) {
  double C;
  std::vector<double> mu = fp.density(u, C);
  double s = opt.damping;
  double last = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opt.max_iter; ++it) {
    ++iters;
    u = fp.convolve(mu);
    const std::vector<double> target = fp.density(u, C);
    std::vector<double> gm = fp.convolve(target);
    double res = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) res = std::max(res, std::abs(gm[i] - u[i]));
    for (std::size_t i = 0; i < mu.size(); ++i) {
      mu[i] = (1.0 - s) * mu[i] + s * target[i];
      if (!std::isfinite(mu[i]) || mu[i] < 0.0)
        throw NonConvergence("solve_mu_theta: invalid density during Picard iteration", res);
    }
    if (res <= opt.tol) {
      u = gm;
      return;
    }
    if (res > last) s *= 0.5;
    last = res;
  }
  throw NonConvergence("solve_mu_theta: Picard iteration limit reached", last);
}

std::vector<double> prolong(const std::vector<double>& uc, const GridSpec& coarse, const GridSpec& fine) {
  const GridFunction f(coarse, uc);
  std::vector<double> u(fine.size());
  for (std::size_t i = 0; i < fine.size(); ++i) u[i] = f.interpolate(fine.center(i), Interp::cubic);
  return u;
}

std::vector<double> solve_level(const ScalarField& V, double theta, const GridSpec& g,
                                const EquilibriumOptions& opt, int& iters, bool final_stage) {
  FixedPoint fp(V, g, theta, opt.density_floor);
  std::vector<double> u;
  const bool can_nest = opt.nested && g.n[0] % 2 == 0 && g.n[1] % 2 == 0 &&
                        (g.dim == 2 || g.n[2] % 2 == 0) && g.n[0] / 2 >= opt.nested_min_cells;
  if (can_nest) {
    const GridSpec coarse = g.coarsened(2);
    const std::vector<double> uc = solve_level(V, theta, coarse, opt, iters, false);
    u = prolong(uc, coarse, g);
    newton(fp, u, opt, iters, final_stage);
    return u;
  }
  // Coarsest grid: continuation in theta.
  u.assign(g.size(), 0.0);
  double t = std::min(theta, opt.theta_start);
  while (true) {
    fp.set_theta(t);
    newton(fp, u, opt, iters, final_stage && t == theta);
    if (t == theta) break;
    t = std::min(theta, t * opt.theta_factor);
  }
  return u;
}

}  // namespace

EquilibriumSolution solve_mu_theta(const ScalarField& V, double theta, const GridSpec& grid,
                                   const EquilibriumOptions& opt, const Mask* region) {
  if (!(theta > 0.0)) throw std::invalid_argument("solve_mu_theta: theta must be positive");
  if (grid.size() == 0) throw std::invalid_argument("solve_mu_theta: empty grid");
  EquilibriumSolution sol;
  sol.theta = theta;
  std::vector<double> u;
  if (opt.method == SolverMethod::picard) {
    FixedPoint fp(V, grid, theta, opt.density_floor);
    u.assign(grid.size(), 0.0);
    picard(fp, u, opt, sol.iterations);
  } else {
    u = solve_level(V, theta, grid, opt, sol.iterations, true);
  }
  FixedPoint fp(V, grid, theta, opt.density_floor);
  double C;
  std::vector<double> mu = fp.density(u, C);
  for (double m : mu)
    if (!std::isfinite(m) || m < 0.0) throw NonConvergence("solve_mu_theta: invalid density", 0.0);
  sol.mu = GridDensity(grid, mu);
  sol.potential = GridFunction(grid, fp.convolve(mu));
  sol.C = C;
  if (region) {
    sol.residual_region = *region;
  } else {
    const double mmax = *std::max_element(mu.begin(), mu.end());
    sol.residual_region.assign(grid.size(), 0);
    for (std::size_t i = 0; i < mu.size(); ++i) sol.residual_region[i] = mu[i] >= 0.5 * mmax;
  }
  const auto& vg = fp.potential_values();
  double res = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (sol.residual_region[i])
      res = std::max(res, std::abs(sol.potential[i] + vg[i] + std::log(mu[i]) / theta - C));
  sol.residual = res;
  if (!(res <= std::max(opt.tol, 1e-13) * 10.0))
    throw NonConvergence("solve_mu_theta: residual above tolerance", res);
  return sol;
}

double log_mu_theta_at(const EquilibriumSolution& s, const CoulombPotential& pot, const ScalarField& V,
                       const Vec& x) {
  return s.theta * (s.C - V.value(x) - pot.value(x));
}

double fixed_point_residual(const GridDensity& mu, const ScalarField& V, double theta, double C,
                            const Mask& region) {
  const GridFunction gm = convolve_g_nodal(mu);
  double res = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!region[i]) continue;
    if (!(mu[i] > 0.0)) throw std::domain_error("fixed_point_residual: density vanishes in region");
    const double v = V.value(mu.grid().center(i));
    res = std::max(res, std::abs(gm[i] + v + std::log(mu[i]) / theta - C));
  }
  return res;
}

// ---------------------------------------------------------------------------
// f_k ladder

double f1_value(const RadialPolynomial& V, double theta, const Vec& x) {
  const double cd = coulomb_cd(V.dim());
  const RadialPolynomial lap = V.laplacian_field();
  const double f0 = lap.value(x) / cd;
  if (!(f0 > 0.0)) throw std::domain_error("f_k ladder: Delta V must be positive");
  const Vec g = lap.gradient(x) / cd;
  const double l = lap.laplacian(x) / cd;
  const double dlog = l / f0 - g.squaredNorm() / (f0 * f0);
  return f0 + dlog / (theta * cd);
}

GridFunction f_k_ladder(const RadialPolynomial& V, double theta, int k, const GridSpec& grid,
                        const Mask& bulk) {
  if (k < 0) throw std::invalid_argument("f_k_ladder: k must be nonnegative");
  if (bulk.size() != grid.size()) throw std::invalid_argument("f_k_ladder: mask size mismatch");
  const double cd = coulomb_cd(V.dim());
  const RadialPolynomial lap = V.laplacian_field();
  GridFunction f0(grid), f(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec x = grid.center(i);
    f0[i] = lap.value(x) / cd;
    f[i] = (k >= 1) ? f1_value(V, theta, x) : f0[i];
  }
  for (int j = 2; j <= k; ++j) {
    GridFunction lf(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!(f[i] > 0.0)) throw std::domain_error("f_k_ladder: f_j is not positive");
      lf[i] = std::log(f[i]);
    }
    const GridFunction dl = stencil_laplacian(lf);
    for (std::size_t i = 0; i < grid.size(); ++i) f[i] = f0[i] + dl[i] / (theta * cd);
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!bulk[i]) {
      f[i] = 0.0;
      continue;
    }
    if (!(f[i] > 0.0)) throw std::domain_error("f_k_ladder: f_k is not positive on the bulk");
  }
  return f;
}

// ---------------------------------------------------------------------------
// Bulk

Mask bulk_mask(const GridSpec& grid, double support_radius, double d0) {
  if (d0 < 0.0) throw std::invalid_argument("bulk_mask: negative margin");
  if (d0 >= support_radius)
    throw std::domain_error("bulk_mask: margin d0 exceeds the support radius (empty bulk)");
  const double r = support_radius - d0;
  Mask m(grid.size(), 0);
  bool any = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    m[i] = grid.center(i).norm() <= r;
    any = any || m[i];
  }
  if (!any) throw std::domain_error("bulk_mask: no grid cell inside the bulk");
  return m;
}

double estimated_support_radius(const GridDensity& mu) {
  const double mmax = *std::max_element(mu.values().begin(), mu.values().end());
  double area = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu[i] >= 0.5 * mmax) area += mu.grid().cell_volume();
  const int d = mu.dim();
  // volume of the unit ball
  const double omega = unit_sphere_area(d) / d;
  return std::pow(area / omega, 1.0 / d);
}

Mask bulk_mask(const EquilibriumSolution& s, const ScaleParameters& p, const RadialPolynomial* V) {
  const double R = V ? mu_infinity_radial(*V).radius : estimated_support_radius(s.mu);
  return bulk_mask(s.mu.grid(), R, p.d0);
}

}  // namespace coulomb

#include "coulomb/radial.hpp"

#include "coulomb/equilibrium.hpp"
#include "coulomb/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace coulomb {

double RadialSolution::mass() const {
  std::vector<double> m(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) m[i] = mu[i] * shell[i];
  return tree_sum(m);
}

double RadialSolution::mass_outside(double R) const {
  // Control volume i covers [r_i - h/2, r_i + h/2]; split the one containing R.
  std::vector<double> m;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double a = std::max(0.0, r[i] - 0.5 * h), b = r[i] + 0.5 * h;
    if (b <= R) continue;
    const double frac = (a >= R) ? 1.0 : (b - R) / (b - a);
    m.push_back(mu[i] * shell[i] * frac);
  }
  return tree_sum(m);
}

RadialEquilibrium::RadialEquilibrium(const RadialPolynomial& V, RadialOptions opt)
    : V_(V), d_(V.dim()), cd_(coulomb_cd(V.dim())), opt_(opt) {
  if (V.center().norm() != 0.0) throw std::invalid_argument("RadialEquilibrium: V must be centred at 0");
  R_ = mu_infinity_radial(V).radius;
  if (opt_.nodes < 16) throw std::invalid_argument("RadialEquilibrium: too few nodes");
  if (!(opt_.r_max > 0.0)) opt_.r_max = R_ + 1.5;
  const int n = opt_.nodes;
  h_ = opt_.r_max / n;
  const double area = unit_sphere_area(d_);
  const int deg = 2 * V.polynomial().degree();
  r_.resize(n + 1);
  v_.resize(n + 1);
  dv_.assign(n + 1, 0.0);
  shell_.resize(n + 1);
  ap_.assign(n + 1, 0.0);
  am_.assign(n + 1, 0.0);
  for (int i = 0; i <= n; ++i) {
    r_[i] = i * h_;
    v_[i] = V.profile(r_[i]);
    // V(r_{i+1}) - V(r_i) by its finite Taylor series, free of cancellation.
    double fact = 1.0, hp = 1.0;
    for (int j = 1; j <= deg; ++j) {
      fact *= j;
      hp *= h_;
      dv_[i] += V.profile(r_[i], j) * hp / fact;
    }
    const double rp = (i + 0.5) * h_, rm = std::max(0.0, (i - 0.5) * h_);
    const double vol = (std::pow(rp, d_) - std::pow(rm, d_)) / d_;
    shell_[i] = area * vol;
    // Delta_h f_i = ap (f_{i+1} - f_i) - am (f_i - f_{i-1})
    ap_[i] = std::pow(rp, d_ - 1) / (h_ * vol);
    am_[i] = (i == 0) ? 0.0 : std::pow(rm, d_ - 1) / (h_ * vol);
  }
  lapv_.assign(n + 1, 0.0);
  for (int i = 0; i < n; ++i) lapv_[i] = ap_[i] * dv_[i] - (i == 0 ? 0.0 : am_[i] * dv_[i - 1]);
}

std::vector<double> RadialEquilibrium::laplacian(const std::vector<double>& f) const {
  const int n = opt_.nodes;
  std::vector<double> out(n + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    const double up = ap_[i] * (f[i + 1] - f[i]);
    const double dn = (i == 0) ? 0.0 : am_[i] * (f[i] - f[i - 1]);
    out[i] = up - dn;
  }
  return out;
}

std::vector<double> RadialEquilibrium::f0() const {
  std::vector<double> out(r_.size());
  const RadialPolynomial lap = V_.laplacian_field();
  for (std::size_t i = 0; i < r_.size(); ++i) out[i] = lap.profile(r_[i]) / cd_;
  return out;
}

std::vector<double> RadialEquilibrium::f1(double theta) const {
  std::vector<double> out(r_.size());
  for (std::size_t i = 0; i < r_.size(); ++i) out[i] = f1_value(V_, theta, Vec(r_[i], 0.0, 0.0));
  return out;
}

void RadialEquilibrium::newton(RadialSolution& s, double theta) const {
  const int n = opt_.nodes;
  const double wn = coulomb_g(r_[n], d_) + v_[n];
  // s.u holds lambda during the iteration.
  std::vector<double>& lam = s.u;
  auto residual = [&](const std::vector<double>& l, double C, std::vector<double>& F) {
    F.assign(n + 1, 0.0);
    std::vector<double> ext = l;
    ext[n] = theta * (C - wn);
    const std::vector<double> dl = laplacian(ext);
    std::vector<double> m(n);
    double sup = 0.0;
    for (int i = 0; i < n; ++i) {
      const double e = std::exp(l[i]);
      F[i] = dl[i] / theta - cd_ * e + lapv_[i];
      m[i] = shell_[i] * e;
      sup = std::max(sup, std::abs(F[i]));
    }
    F[n] = tree_sum(m) - 1.0;
    return std::max(sup, std::abs(F[n]));
  };
  auto thomas = [&](const std::vector<double>& l, const std::vector<double>& b) {
    std::vector<double> c(n, 0.0), dd(n, 0.0);
    for (int i = 0; i < n; ++i) {
      const double diag = -(ap_[i] + am_[i]) / theta - cd_ * std::exp(l[i]);
      const double lower = (i == 0) ? 0.0 : am_[i] / theta;
      const double upper = (i == n - 1) ? 0.0 : ap_[i] / theta;
      const double den = diag - lower * (i == 0 ? 0.0 : c[i - 1]);
      c[i] = upper / den;
      dd[i] = (b[i] - lower * (i == 0 ? 0.0 : dd[i - 1])) / den;
    }
    std::vector<double> x(n);
    x[n - 1] = dd[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = dd[i] - c[i] * x[i + 1];
    return x;
  };

  std::vector<double> F;
  double fn = residual(lam, s.C, F);
  for (int it = 0; it < opt_.max_iter; ++it) {
    ++s.iterations;
    std::vector<double> rhs(n), bcol(n, 0.0);
    for (int i = 0; i < n; ++i) rhs[i] = -F[i];
    bcol[n - 1] = -ap_[n - 1];
    const std::vector<double> x1 = thomas(lam, rhs);
    const std::vector<double> x2 = thomas(lam, bcol);
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      const double w = shell_[i] * std::exp(lam[i]);
      a[i] = w * x1[i];
      b[i] = w * x2[i];
    }
    const double dC = (-F[n] - tree_sum(a)) / tree_sum(b);
    std::vector<double> dl(n + 1, 0.0);
    double step = std::abs(dC);
    for (int i = 0; i < n; ++i) {
      dl[i] = x1[i] + dC * x2[i];
      step = std::max(step, std::abs(dl[i]) / theta);
    }
    double lambda = 1.0;
    bool ok = false;
    for (int ls = 0; ls < 40; ++ls) {
      std::vector<double> lt = lam;
      for (int i = 0; i < n; ++i) lt[i] += lambda * dl[i];
      const double Ct = s.C + lambda * dC;
      std::vector<double> Ft;
      const double ft = residual(lt, Ct, Ft);
      if (std::isfinite(ft) && (ft < fn * (1.0 - 1e-4 * lambda) || lambda * step <= opt_.tol)) {
        lam = std::move(lt);
        s.C = Ct;
        F = std::move(Ft);
        fn = ft;
        ok = true;
        break;
      }
      lambda *= 0.5;
    }
    // Convergence is judged by the increment in u = C - V - lambda/theta.
    if (!ok || lambda * step <= opt_.tol) break;
  }
  s.residual = fn;
  double lmax = 1.0;
  for (int i = 0; i < n; ++i) lmax = std::max(lmax, std::abs(lam[i]));
  const double rounding = 1e3 * std::numeric_limits<double>::epsilon() * lmax * 4.0 / (h_ * h_ * theta);
  if (!(fn <= rounding + 1e-9))
  {
    char buf[160];
    std::snprintf(buf, sizeof buf, "RadialEquilibrium: Newton did not converge at theta %g (residual %.3e)",
                  theta, fn);
    throw std::runtime_error(buf);
  }
}

std::vector<RadialSolution> RadialEquilibrium::solve_ladder(const std::vector<double>& thetas) const {
  std::vector<RadialSolution> out;
  const int n = opt_.nodes;
  RadialSolution s;
  s.h = h_;
  s.r = r_;
  s.shell = shell_;
  std::vector<double> f(r_.size());
  for (int i = 0; i <= n; ++i) f[i] = lapv_[i] / cd_;
  double t = std::min(opt_.theta_start, thetas.empty() ? 1.0 : thetas.front());
  // Initial guess from mu_infinity: log f0 inside the support, the exterior
  // potential g(r) continued outside.
  const std::size_t iR = std::min<std::size_t>(n - 1, std::size_t(R_ / h_));
  s.C = coulomb_g(R_, d_) + v_[iR] + std::log(f[iR]) / t;
  s.u.assign(n + 1, 0.0);
  for (int i = 0; i < n; ++i)
    s.u[i] = (r_[i] < R_ && f[i] > 0.0) ? std::log(f[i])
                                         : t * (s.C - coulomb_g(std::max(r_[i], R_), d_) - v_[i]);
  for (double target : thetas) {
    if (target < t) throw std::invalid_argument("RadialEquilibrium: thetas must increase");
    while (true) {
      // rescale lambda = theta (C - u - V) to the new theta at fixed u
      newton(s, t);
      if (t >= target) break;
      const double tn = std::min(target, t * opt_.theta_factor);
      for (int i = 0; i < n; ++i) s.u[i] *= tn / t;
      t = tn;
    }
    RadialSolution o = s;
    o.theta = target;
    o.mu.resize(n + 1);
    std::vector<double> u(n + 1);
    const double wn = coulomb_g(r_[n], d_) + v_[n];
    for (int i = 0; i <= n; ++i) {
      const double l = (i < n) ? s.u[i] : target * (s.C - wn);
      o.mu[i] = (i < n) ? std::exp(l) : 0.0;
      u[i] = s.C - v_[i] - l / target;
    }
    o.u = std::move(u);
    out.push_back(std::move(o));
  }
  return out;
}

RadialSolution RadialEquilibrium::solve(double theta) const { return solve_ladder({theta}).front(); }

}  // namespace coulomb

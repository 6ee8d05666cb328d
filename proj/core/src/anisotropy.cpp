#include "coulomb/quadrature.hpp"
#include "coulomb/transport.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace coulomb {

namespace {

constexpr int kChunks = 64;
constexpr double kPi = 3.14159265358979323846;

double g_of(const Vec& z, int d) {
  const double r = z.norm();
  return d == 2 ? -std::log(r) : 1.0 / r;
}

// (1/k!) D^k g(z)[v]^k
double taylor_kernel(const Vec& z, const Vec& v, int d, int k) {
  const double r2 = z.squaredNorm();
  const double rd = d == 2 ? r2 : r2 * std::sqrt(r2);
  const double zv = z.dot(v);
  if (k == 1) return -zv / rd;
  return 0.5 * (-v.squaredNorm() / rd + d * zv * zv / (rd * r2));
}

// Density of the direction of x - y for x, y uniform in a cell with sides h,
// weighted by |x - y|^{-1} in d = 3 (times the area element of the unit sphere).
double direction_density(const Vec& e, const Vec& h, int d) {
  double R = std::numeric_limits<double>::infinity();
  for (int a = 0; a < d; ++a)
    if (std::abs(e[a]) > 0.0) R = std::min(R, h[a] / std::abs(e[a]));
  if (d == 2) {
    const double a = std::abs(e[0]), b = std::abs(e[1]);
    const double v = h[0] * h[1];
    return (v * R * R / 2 - (a * h[1] + b * h[0]) * R * R * R / 3 + a * b * R * R * R * R / 4) / (v * v);
  }
  const double a = std::abs(e[0]), b = std::abs(e[1]), c = std::abs(e[2]);
  const double p0 = h[0] * h[1] * h[2];
  const double p1 = a * h[1] * h[2] + b * h[0] * h[2] + c * h[0] * h[1];
  const double p2 = a * b * h[2] + a * c * h[1] + b * c * h[0];
  const double p3 = a * b * c;
  const double R2 = R * R;
  return (p0 * R2 / 2 - p1 * R2 * R / 3 + p2 * R2 * R2 / 4 - p3 * R2 * R2 * R / 5) / (p0 * p0);
}

bool nonzero(const Vec& v) { return v[0] != 0.0 || v[1] != 0.0 || v[2] != 0.0; }

}  // namespace

TransportQuadrature::TransportQuadrature(const PointConfiguration& X, const GridDensity& mu, double prune)
    : d_(X.dim()), N_(X.size()), x_(X.points()) {
  const GridSpec& g = mu.grid();
  if (g.dim != d_) throw std::invalid_argument("TransportQuadrature: dimension mismatch");
  double mmax = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) mmax = std::max(mmax, mu[i]);
  const double vol = g.cell_volume();
  for (std::size_t i = 0; i < g.size(); ++i)
    if (mu[i] > prune * mmax) bb_.push_back({g.center(i), mu[i] * vol});

  cell_h_ = Vec::Zero();
  for (int a = 0; a < d_; ++a) cell_h_[a] = g.h(a);

  const int split = 4;
  int nsub = 1;
  for (int a = 0; a < d_; ++a) nsub *= split;
  near_.resize(x_.size());
  for (std::size_t i = 0; i < x_.size(); ++i) {
    NearField& nf = near_[i];
    for (std::size_t b = 0; b < bb_.size(); ++b) {
      bool close = true;
      for (int a = 0; a < d_; ++a)
        if (std::abs(bb_[b].z[a] - x_[i][a]) > 3.0 * cell_h_[a]) close = false;
      if (!close) continue;
      nf.replaced.push_back(b);
      for (int s = 0; s < nsub; ++s) {
        Vec z = bb_[b].z;
        int r = s;
        for (int a = 0; a < d_; ++a) {
          const int k = r % split;
          r /= split;
          z[a] += ((k + 0.5) / split - 0.5) * cell_h_[a];
        }
        nf.sub.push_back({z, bb_[b].w / nsub});
      }
    }
  }

  if (d_ == 2) {
    const int n = 720;
    double radial = 0.0;
    const GaussRule gl = gauss_legendre(24, 0.0, 1.0);
    for (int k = 0; k < n; ++k) {
      const double phi = 2.0 * kPi * (k + 0.5) / n;
      const Vec e(std::cos(phi), std::sin(phi), 0.0);
      dirs_.push_back(e);
      dir_w_.push_back(direction_density(e, cell_h_, 2) * 2.0 * kPi / n);
      const double R = std::min(std::abs(e[0]) > 0 ? cell_h_[0] / std::abs(e[0]) : 1e300,
                                std::abs(e[1]) > 0 ? cell_h_[1] / std::abs(e[1]) : 1e300);
      double s = 0.0;
      for (std::size_t m = 0; m < gl.nodes.size(); ++m) {
        const double r = R * gl.nodes[m];
        const double p = (cell_h_[0] - std::abs(e[0]) * r) * (cell_h_[1] - std::abs(e[1]) * r);
        s += gl.weights[m] * R * p * (-std::log(r)) * r;
      }
      radial += s / std::pow(cell_h_[0] * cell_h_[1], 2) * 2.0 * kPi / n;
    }
    self_radial_ = radial;
  } else {
    const SphereRule rule = SphereRule::make(3, 24);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      dirs_.push_back(rule.nodes[k]);
      dir_w_.push_back(4.0 * kPi * rule.weights[k] * direction_density(rule.nodes[k], cell_h_, 3));
    }
  }
}

template <class PairKernel, class SelfKernel>
double TransportQuadrature::assemble(const VectorFieldSpec& psi, const PairKernel& pair,
                                     const SelfKernel& self) const {
  const std::size_t M = bb_.size();
  std::vector<Vec> pv(M);
  std::vector<char> mb(M);
  std::vector<std::size_t> moving;
  for (std::size_t a = 0; a < M; ++a) {
    pv[a] = psi.value(bb_[a].z);
    mb[a] = nonzero(pv[a]);
    if (mb[a]) moving.push_back(a);
  }
  const std::size_t n = x_.size();
  std::vector<Vec> px(n);
  std::vector<char> mx(n);
  for (std::size_t i = 0; i < n; ++i) {
    px[i] = psi.value(x_[i]);
    mx[i] = nonzero(px[i]);
  }

  std::vector<double> pp_part(kChunks, 0.0), pb_part(kChunks, 0.0), bb_part(kChunks, 0.0),
      self_part(kChunks, 0.0);
  detail::for_chunks(kChunks, [&](int c) {
    for (std::size_t i = std::size_t(c); i < n; i += kChunks) {
      for (std::size_t j = i + 1; j < n; ++j)
        if (mx[i] || mx[j]) pp_part[c] += pair(x_[i] - x_[j], px[i] - px[j]);

      const NearField& nf = near_[i];
      double s = 0.0;
      auto term = [&](std::size_t b) {
        if (std::binary_search(nf.replaced.begin(), nf.replaced.end(), b)) return;
        s += bb_[b].w * pair(x_[i] - bb_[b].z, px[i] - pv[b]);
      };
      if (mx[i])
        for (std::size_t b = 0; b < M; ++b) term(b);
      else
        for (std::size_t b : moving) term(b);
      for (const Node& sn : nf.sub) {
        const Vec v = psi.value(sn.z);
        if (mx[i] || nonzero(v)) s += sn.w * pair(x_[i] - sn.z, px[i] - v);
      }
      pb_part[c] += s;
    }
    for (std::size_t m = std::size_t(c); m < moving.size(); m += kChunks) {
      const std::size_t a = moving[m];
      double s = 0.0;
      for (std::size_t b = 0; b < M; ++b) {
        if (b == a || (mb[b] && b < a)) continue;
        s += bb_[b].w * pair(bb_[a].z - bb_[b].z, pv[a] - pv[b]);
      }
      bb_part[c] += bb_[a].w * s;
      self_part[c] += bb_[a].w * bb_[a].w * self(psi.jacobian(bb_[a].z));
    }
  });
  const double Nd = double(N_);
  return tree_sum(pp_part) - Nd * tree_sum(pb_part) + Nd * Nd * (tree_sum(bb_part) + 0.5 * tree_sum(self_part));
}

double TransportQuadrature::moving_energy(const VectorFieldSpec& psi, double t) const {
  const int d = d_;
  auto pair = [d, t](const Vec& z, const Vec& v) { return g_of(z + t * v, d); };
  auto self = [this, d, t](const Mat& A) {
    double s = d == 2 ? self_radial_ : 0.0;
    for (std::size_t k = 0; k < dirs_.size(); ++k) {
      const Vec me = dirs_[k] + t * (A * dirs_[k]);
      s += dir_w_[k] * (d == 2 ? -std::log(me.norm()) : 1.0 / me.norm());
    }
    return s;
  };
  return assemble(psi, pair, self);
}

double TransportQuadrature::anisotropy(const VectorFieldSpec& psi, int k) const {
  if (k != 1 && k != 2) throw std::invalid_argument("anisotropy: k must be 1 or 2");
  const int d = d_;
  auto pair = [d, k](const Vec& z, const Vec& v) { return taylor_kernel(z, v, d, k); };
  auto self = [this, d, k](const Mat& A) {
    double s = 0.0;
    for (std::size_t j = 0; j < dirs_.size(); ++j) {
      const Vec& e = dirs_[j];
      const Vec ae = A * e;
      const double eae = e.dot(ae);
      s += dir_w_[j] * (k == 1 ? -eae : 0.5 * (-ae.squaredNorm() + d * eae * eae));
    }
    return s;
  };
  return assemble(psi, pair, self);
}

double anisotropy_A1(const PointConfiguration& X, const GridDensity& mu, const VectorFieldSpec& psi) {
  return TransportQuadrature(X, mu).anisotropy(psi, 1);
}

double anisotropy_A2(const PointConfiguration& X, const GridDensity& mu, const VectorFieldSpec& psi) {
  return TransportQuadrature(X, mu).anisotropy(psi, 2);
}

A1BoundInputs a1_bound_inputs(const PointConfiguration& X, const GridDensity& mu, const TransportBundle& b,
                              double ell) {
  const GridSpec& g = mu.grid();
  const int d = g.dim;
  Box U;
  U.lo = Vec::Constant(std::numeric_limits<double>::infinity());
  U.hi = Vec::Constant(-std::numeric_limits<double>::infinity());
  bool any = false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    bool nz = false;
    for (int a = 0; a < d; ++a) nz = nz || b.psi_grid[a][i] != 0.0;
    if (!nz) continue;
    any = true;
    Vec lo, hi;
    g.cell_box(i, lo, hi);
    U.lo = U.lo.cwiseMin(lo);
    U.hi = U.hi.cwiseMax(hi);
  }
  A1BoundInputs in;
  in.N = X.size();
  in.d = d;
  if (!any) return in;
  for (int a = 0; a < d; ++a) {
    U.lo[a] -= ell;
    U.hi[a] += ell;
  }
  for (int a = d; a < 3; ++a) U.lo[a] = U.hi[a] = 0.0;
  in.a1 = anisotropy_A1(X, mu, b.psi);
  in.psi_c1 = psi_c1(b.psi, g);
  in.count = int(X.indices_in(U).size());
  in.F_window = in.count > 0 ? localized_energy(X, mu, U) : 0.0;
  return in;
}

BoundCheck a1_bound_check(const A1BoundInputs& in, double C, double C0) {
  BoundCheck r;
  r.lhs = std::abs(in.a1);
  const double N = double(in.N);
  double bracket = in.F_window + C0 * in.count * std::pow(N, 1.0 - 2.0 / in.d);
  if (in.d == 2) bracket += 0.25 * in.count * std::log(N);
  r.rhs = C * in.psi_c1 * bracket;
  r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : (r.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  return r;
}

}  // namespace coulomb

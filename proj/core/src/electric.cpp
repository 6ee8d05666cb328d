#include "coulomb/energy.hpp"

#include "coulomb/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace coulomb {

namespace {

constexpr double kPi = std::numbers::pi;

// Cutoff profile: 1 on [0, 1/2], 0 on [1, inf), quintic smoothstep between.
double cutoff(double s) {
  if (s <= 0.5) return 1.0;
  if (s >= 1.0) return 0.0;
  const double t = 2.0 * s - 1.0;
  return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}
double cutoff_d1(double s) {
  if (s <= 0.5 || s >= 1.0) return 0.0;
  const double t = 2.0 * s - 1.0;
  return -2.0 * 30.0 * t * t * (1.0 - t) * (1.0 - t);
}
double cutoff_d2(double s) {
  if (s <= 0.5 || s >= 1.0) return 0.0;
  const double t = 2.0 * s - 1.0;
  return -4.0 * 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
}

struct Patch {
  Vec x;
  double rho;
};

// Regular part of the potential: sum_j (1 - w_j) g(. - x_j) - N g*mu.
double regular_point_part(const std::vector<Patch>& patches, const Vec& z) {
  double s = 0.0;
  for (const Patch& p : patches) {
    const double r = (z - p.x).norm();
    const double w = cutoff(r / p.rho);
    if (w < 1.0) s += (1.0 - w) * -std::log(r);
  }
  return s;
}

}  // namespace

double f_eta_integral_rays(const GridDensity& mu, const Vec& p, double eta, int rays) {
  const GridSpec& g = mu.grid();
  if (g.dim != 2) throw std::invalid_argument("f_eta_integral_rays: d = 2 only");
  // Antiderivative of -r log(r/eta).
  auto prim = [eta](double r) { return r == 0.0 ? 0.0 : -0.5 * r * r * std::log(r / eta) + 0.25 * r * r; };
  std::vector<double> per_ray(std::size_t(rays), 0.0);
  std::vector<double> cuts;
  for (int k = 0; k < rays; ++k) {
    const double phi = 2.0 * kPi * (k + 0.5) / rays;
    const double c = std::cos(phi), s = std::sin(phi);
    cuts.assign({0.0, eta});
    for (int a = 0; a < 2; ++a) {
      const double dir = (a == 0) ? c : s;
      if (std::abs(dir) < 1e-300) continue;
      const double h = g.h(a);
      const double t0 = (p[a] - g.lo[a]) / h;
      const double t1 = (p[a] + eta * dir - g.lo[a]) / h;
      const long lo = long(std::ceil(std::min(t0, t1))), hi = long(std::floor(std::max(t0, t1)));
      for (long m = lo; m <= hi; ++m) {
        const double r = (g.lo[a] + m * h - p[a]) / dir;
        if (r > 0.0 && r < eta) cuts.push_back(r);
      }
    }
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    for (std::size_t q = 0; q + 1 < cuts.size(); ++q) {
      const double a = cuts[q], b = cuts[q + 1];
      if (b <= a) continue;
      const double rm = 0.5 * (a + b);
      const Vec z(p[0] + rm * c, p[1] + rm * s, 0.0);
      if (!g.contains(z)) continue;
      const auto cell = g.locate(z);
      acc += mu.at(cell[0], cell[1]) * (prim(b) - prim(a));
    }
    per_ray[std::size_t(k)] = acc;
  }
  return tree_sum(per_ray) * 2.0 * kPi / rays;
}

double circle_average_potential(const GridDensity& mu, const Vec& p, double radius, double exact_radius) {
  const GridSpec& g = mu.grid();
  if (g.dim != 2) throw std::invalid_argument("circle_average_potential: d = 2 only");
  const double vol = g.cell_volume();
  std::vector<std::size_t> near, far;
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    if (mu[idx] == 0.0) continue;
    ((g.center(idx) - p).norm() <= exact_radius ? near : far).push_back(idx);
  }
  // Far cells give a harmonic function inside the exact disk: few nodes suffice.
  const int m_far = 96, m_near = 2048;
  std::vector<double> vals(static_cast<std::size_t>(m_far)), terms(far.size());
  for (int k = 0; k < m_far; ++k) {
    const double phi = 2.0 * kPi * k / m_far;
    const Vec z = p + radius * Vec(std::cos(phi), std::sin(phi), 0.0);
    for (std::size_t q = 0; q < far.size(); ++q) {
      const std::size_t idx = far[q];
      terms[q] = mu[idx] * vol * -std::log((g.center(idx) - z).norm());
    }
    vals[std::size_t(k)] = tree_sum(terms);
  }
  const double far_part = tree_sum(vals) / m_far;
  std::vector<double> near_terms(near.size());
  std::vector<double> ring(static_cast<std::size_t>(m_near));
  for (std::size_t q = 0; q < near.size(); ++q) {
    Vec lo, hi;
    g.cell_box(near[q], lo, hi);
    for (int k = 0; k < m_near; ++k) {
      const double phi = 2.0 * kPi * (k + 0.5) / m_near;
      ring[std::size_t(k)] = box_integral_g(p + radius * Vec(std::cos(phi), std::sin(phi), 0.0), lo, hi, 2);
    }
    near_terms[q] = mu[near[q]] * tree_sum(ring) / m_near;
  }
  return far_part + tree_sum(near_terms);
}

ElectricEnergy electric_energy_oracle(const PointConfiguration& X, const GridDensity& mu,
                                      const std::vector<double>& eta, const GridSpec& field_grid) {
  if (X.dim() != 2 || mu.dim() != 2) throw std::invalid_argument("electric_energy_oracle: d = 2 only");
  const int N = X.size();
  if (int(eta.size()) != N) throw std::invalid_argument("electric_energy_oracle: one radius per point");
  const GridSpec& mg = mu.grid();
  int factor = 0;
  for (int f = 1; f <= 64; ++f)
    if (mg.refined(f).same_geometry(field_grid)) factor = f;
  if (factor == 0)
    throw std::invalid_argument("electric_energy_oracle: field grid must refine the grid of mu");
  const double h = std::max(field_grid.h(0), field_grid.h(1));
  const auto& r = X.radii();
  double eta_min = eta[0];
  std::vector<Patch> patches;
  for (int i = 0; i < N; ++i) {
    if (!(eta[std::size_t(i)] > 0.0) || eta[std::size_t(i)] > r[std::size_t(i)] * (1.0 + 1e-12))
      throw std::invalid_argument("electric_energy_oracle: eta_i must lie in (0, r_i]");
    eta_min = std::min(eta_min, eta[std::size_t(i)]);
    patches.push_back({X[i], 2.0 * r[std::size_t(i)]});
    for (int a = 0; a < 2; ++a)
      if (X[i][a] - 2.0 * r[std::size_t(i)] < field_grid.lo[a] || X[i][a] + 2.0 * r[std::size_t(i)] > field_grid.hi[a])
        throw std::invalid_argument("electric_energy_oracle: patch leaves the grid");
  }
  if (h > eta_min / 4.0) throw std::invalid_argument("electric_energy_oracle: grid too coarse (h > min eta / 4)");

  const double n = N;
  const GridFunction nodal = convolve_g_nodal(factor == 1 ? mu : mu.upsampled(factor));

  // Regular remainder B at the cell centres of the field grid.
  const GridSpec& fg = field_grid;
  std::vector<double> B(fg.size());
  for (std::size_t idx = 0; idx < fg.size(); ++idx)
    B[idx] = regular_point_part(patches, fg.center(idx)) - n * nodal[idx];

  // int |grad B|^2 over the hull of the centres: staggered differences,
  // trapezoid weights across the hull boundary.
  ElectricEnergy out;
  {
    const int nx = fg.n[0], ny = fg.n[1];
    const double hx = fg.h(0), hy = fg.h(1);
    std::vector<double> rows;
    for (int j = 0; j < ny; ++j) {
      const double wy = (j == 0 || j == ny - 1) ? 0.5 : 1.0;
      std::vector<double> t;
      for (int i = 0; i + 1 < nx; ++i) {
        const double d = (B[fg.index(i + 1, j)] - B[fg.index(i, j)]) / hx;
        t.push_back(wy * d * d);
      }
      rows.push_back(tree_sum(t));
    }
    for (int i = 0; i < nx; ++i) {
      const double wx = (i == 0 || i == nx - 1) ? 0.5 : 1.0;
      std::vector<double> t;
      for (int j = 0; j + 1 < ny; ++j) {
        const double d = (B[fg.index(i, j + 1)] - B[fg.index(i, j)]) / hy;
        t.push_back(wx * d * d);
      }
      rows.push_back(tree_sum(t));
    }
    out.grid_part = tree_sum(rows) * hx * hy;

    // Exterior: B is harmonic there, int_ext |grad B|^2 = -oint B dB/dn (outward from the hull).
    std::vector<double> edge;
    auto side = [&](int count, double step, auto at) {
      std::vector<double> t(static_cast<std::size_t>(count));
      for (int q = 0; q < count; ++q) {
        const double b0 = at(q, 0), b1 = at(q, 1), b2 = at(q, 2);
        const double dn = (3.0 * b0 - 4.0 * b1 + b2) / (2.0 * step);
        const double w = (q == 0 || q == count - 1) ? 0.5 : 1.0;
        t[std::size_t(q)] = w * b0 * dn;
      }
      return tree_sum(t);
    };
    edge.push_back(hy * side(ny, hx, [&](int q, int k) { return B[fg.index(k, q)]; }));
    edge.push_back(hy * side(ny, hx, [&](int q, int k) { return B[fg.index(nx - 1 - k, q)]; }));
    edge.push_back(hx * side(nx, hy, [&](int q, int k) { return B[fg.index(q, k)]; }));
    edge.push_back(hx * side(nx, hy, [&](int q, int k) { return B[fg.index(q, ny - 1 - k)]; }));
    out.tail_part = -tree_sum(edge);
  }

  // Patch terms: 2 pi log(rho / (2 eta)) + int_{rho/2}^{rho} |(w g)'|^2 2 pi r dr
  // + 4 pi Bbar(eta) - 2 int_{rho/2}^{rho} q(r) Bbar(r) dr, with q = (2 pi r (w g)')'.
  const GaussRule gl = gauss_legendre(32, 0.5, 1.0);
  const int m_ang = 256;
  std::vector<double> patch(static_cast<std::size_t>(N)), f_terms(static_cast<std::size_t>(N)), self(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    const Patch& P = patches[std::size_t(i)];
    const double rho = P.rho, e = eta[std::size_t(i)];
    double tw = 0.0, qb = 0.0;
    for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
      const double s = gl.nodes[k], rr = rho * s, lr = std::log(rr);
      const double dwg = cutoff_d1(s) / rho * -lr - cutoff(s) / rr;
      tw += gl.weights[k] * rho * dwg * dwg * 2.0 * kPi * rr;
      const double q = -2.0 * kPi / rho * (cutoff_d1(s) * (lr + 2.0) + s * cutoff_d2(s) * lr);
      std::vector<double> ring(static_cast<std::size_t>(m_ang));
      for (int a = 0; a < m_ang; ++a) {
        const double phi = 2.0 * kPi * (a + 0.5) / m_ang;
        const Vec z = P.x + rr * Vec(std::cos(phi), std::sin(phi), 0.0);
        ring[std::size_t(a)] = regular_point_part(patches, z) - n * nodal.interpolate(z, Interp::cubic);
      }
      qb += gl.weights[k] * rho * q * tree_sum(ring) / m_ang;
    }
    // Bbar(eta): the other points by their circle averages, g*mu by exact-near quadrature.
    std::vector<double> others;
    for (int j = 0; j < N; ++j)
      if (j != i) others.push_back(sphere_average([&](const Vec& z) { return -std::log((z - X[j]).norm()); }, P.x, e, 2));
    const double exact_radius = r[std::size_t(i)] + 4.0 * std::max(mg.h(0), mg.h(1));
    const double bbar = tree_sum(others) - n * circle_average_potential(mu, P.x, e, exact_radius);
    patch[std::size_t(i)] = 2.0 * kPi * std::log(rho / (2.0 * e)) + tw + 4.0 * kPi * bbar - 2.0 * qb;
    f_terms[std::size_t(i)] = f_eta_integral_rays(mu, P.x, e);
    self[std::size_t(i)] = -std::log(e);
  }
  out.patch_part = tree_sum(patch);
  const double cd = 2.0 * kPi;
  out.value = (out.grid_part + out.tail_part + out.patch_part) / (2.0 * cd) - 0.5 * tree_sum(self) -
              n * tree_sum(f_terms);
  return out;
}

}  // namespace coulomb

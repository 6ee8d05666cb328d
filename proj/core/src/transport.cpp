#include "coulomb/transport.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace coulomb {

namespace {

GridFunction divide_by_cd_mu(const GridFunction& lap, const GridDensity& mu, double floor) {
  if (!lap.grid().same_geometry(mu.grid())) throw std::invalid_argument("apply_L: grid mismatch");
  const double cd = coulomb_cd(mu.dim());
  GridFunction out(mu.grid());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (lap[i] == 0.0) continue;
    if (mu[i] < floor)
      throw std::domain_error("apply_L: mu below floor " + std::to_string(floor) + " on the support of f");
    out[i] = lap[i] / (cd * mu[i]);
  }
  return out;
}

double op_norm(const Mat& J) {
  Eigen::JacobiSVD<Mat> svd(J);
  return svd.singularValues()(0);
}

}  // namespace

GridFunction apply_L(const ScalarField& f, const GridDensity& mu, double floor) {
  GridFunction lap(mu.grid());
  for (std::size_t i = 0; i < lap.size(); ++i) lap[i] = f.laplacian(mu.grid().center(i));
  return divide_by_cd_mu(lap, mu, floor);
}

GridFunction apply_L(const GridFunction& f, const GridDensity& mu, double floor) {
  return divide_by_cd_mu(stencil_laplacian(f), mu, floor);
}

GridFunction L_pow(const ScalarField& f, const GridDensity& mu, int k, double floor) {
  if (k < 0) throw std::invalid_argument("L_pow: negative power");
  if (k == 0) return sample(f, mu.grid());
  GridFunction out = apply_L(f, mu, floor);
  for (int j = 1; j < k; ++j) out = apply_L(out, mu, floor);
  return out;
}

// ---------------------------------------------------------------------------

TransportBundle TransportBundle::make(std::shared_ptr<const ScalarField> xi, int q, double theta,
                                      std::shared_ptr<const GridDensity> mu) {
  if (!xi || !mu) throw std::invalid_argument("TransportBundle: missing xi or mu");
  if (q < 0) throw std::invalid_argument("TransportBundle: q must be nonnegative");
  if (xi->order() < 2 * q + 2)
    throw std::invalid_argument("TransportBundle: xi has " + std::to_string(xi->order()) +
                                " derivatives, q = " + std::to_string(q) + " needs " +
                                std::to_string(2 * q + 2));
  TransportBundle b;
  b.xi = xi;
  b.q = q;
  b.theta = theta;
  b.mu = mu;
  const GridSpec& g = mu->grid();
  const int d = g.dim;
  const double cd = coulomb_cd(d);

  b.L_iterates.push_back(sample(*xi, g));
  b.L_iterates.push_back(apply_L(*xi, *mu));
  for (int k = 1; k <= q; ++k) b.L_iterates.push_back(apply_L(b.L_iterates.back(), *mu));

  std::array<GridFunction, 3> bracket;
  for (int a = 0; a < 3; ++a) bracket[a] = GridFunction(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec gx = xi->gradient(g.center(i));
    for (int a = 0; a < d; ++a) bracket[a][i] = gx[a];
  }
  for (int k = 1; k <= q; ++k) {
    const auto grad = stencil_gradient(b.L_iterates[std::size_t(k)]);
    const double w = std::pow(theta, -k);
    for (int a = 0; a < d; ++a)
      for (std::size_t i = 0; i < g.size(); ++i) bracket[a][i] += w * grad[a][i];
  }
  std::vector<FieldPtr> comps;
  for (int a = 0; a < d; ++a) {
    b.psi_grid[a] = GridFunction(g);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (bracket[a][i] != 0.0) b.psi_grid[a][i] = -bracket[a][i] / (cd * (*mu)[i]);
    comps.push_back(std::make_shared<GridScalarField>(b.psi_grid[a], Interp::cubic));
  }
  b.psi = VectorFieldSpec(std::move(comps));

  double mu_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.size(); ++i)
    if (b.L_iterates[0][i] != 0.0) mu_min = std::min(mu_min, (*mu)[i]);
  b.alpha = std::isfinite(mu_min) ? 2.0 * cd * mu_min : 0.0;
  return b;
}

GridFunction TransportBundle::f_t(double t) const {
  GridFunction f(mu->grid());
  for (int k = 0; k <= q; ++k) {
    const double w = t * std::pow(theta, -k);
    const GridFunction& L = L_iterates[std::size_t(k + 1)];
    for (std::size_t i = 0; i < f.size(); ++i) f[i] += w * L[i];
  }
  return f;
}

GridDensity TransportBundle::nu_t(double t) const {
  GridFunction f = f_t(t);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = (*mu)[i] * (1.0 + f[i]);
  return GridDensity(f);
}

GridFunction TransportBundle::minus_div_psi_mu() const {
  GridFunction f = f_t(1.0);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] *= (*mu)[i];
  return f;
}

Admissibility nu_positivity(const TransportBundle& b, double t) {
  const double cd = coulomb_cd(b.mu->dim());
  const GridFunction f = b.f_t(t);
  double sup = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sup = std::max(sup, std::abs(cd * (*b.mu)[i] * f[i]));
  Admissibility a;
  a.inequality = "||t sum_k Delta L^k xi / theta^k||_inf < alpha/4";
  a.lhs = sup;
  a.rhs = b.alpha / 4.0;
  a.ok = a.lhs < a.rhs;
  return a;
}

Admissibility psi_smallness(const TransportBundle& b, double t) {
  const double cd = coulomb_cd(b.mu->dim());
  const GridSpec& g = b.mu->grid();
  Admissibility a;
  a.inequality = "||t (1/mu) sum_k grad L^k xi / theta^k|| < alpha/(2 c_d) in L^inf and C^1";
  a.lhs = std::abs(t) * cd * std::max(psi_sup(b.psi, g), psi_c1(b.psi, g));
  a.rhs = b.alpha / (2.0 * cd);
  a.ok = a.lhs < a.rhs;
  return a;
}

// ---------------------------------------------------------------------------

double psi_sup(const VectorFieldSpec& psi, const GridSpec& grid) {
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) s = std::max(s, psi.value(grid.center(i)).norm());
  return s;
}

double psi_c1(const VectorFieldSpec& psi, const GridSpec& grid) {
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Mat J = psi.jacobian(grid.center(i));
    if (J.isZero(0.0)) continue;
    s = std::max(s, op_norm(J));
  }
  return s;
}

GridDensity push_forward(const GridDensity& mu, const VectorFieldSpec& psi, double t) {
  const GridSpec& g = mu.grid();
  const int d = g.dim;
  if (t == 0.0) return mu;
  const double c1 = psi_c1(psi, g);
  if (!(std::abs(t) * c1 < 0.5)) {
    Admissibility a;
    a.ok = false;
    a.inequality = "t |psi|_{C^1} < 1/2";
    a.lhs = std::abs(t) * c1;
    a.rhs = 0.5;
    throw AdmissibilityError(a);
  }
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec y = g.center(i);
    Vec x = y;
    Mat M = Mat::Identity();
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
      const Vec r = x + t * psi.value(x) - y;
      M = Mat::Identity() + t * psi.jacobian(x);
      if (d == 2) M(2, 2) = 1.0;
      if (r.norm() <= 1e-14 * (1.0 + y.norm())) {
        converged = true;
        break;
      }
      const Eigen::PartialPivLU<Mat> lu(M);
      x -= lu.solve(r);
    }
    if (!converged) throw NonConvergence("push_forward: Newton iteration did not converge", 0.0);
    const double det = M.determinant();
    if (!(det > 0.0)) throw NonConvergence("push_forward: singular Jacobian", det);
    out[i] = std::max(0.0, mu.interpolate(x, Interp::cubic)) / det;
  }
  return GridDensity(g, std::move(out));
}

GapNorms linearization_gap(const GridDensity& mu, const VectorFieldSpec& psi, double t) {
  const GridSpec& g = mu.grid();
  const GridDensity pf = push_forward(mu, psi, t);
  std::array<GridFunction, 3> flux;
  for (int a = 0; a < 3; ++a) flux[a] = GridFunction(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec p = psi.value(g.center(i));
    for (int a = 0; a < g.dim; ++a) flux[a][i] = p[a] * mu[i];
  }
  const GridFunction div = stencil_divergence(flux);
  GridFunction gap(g);
  for (std::size_t i = 0; i < g.size(); ++i) gap[i] = pf[i] - (mu[i] - t * div[i]);
  GapNorms n;
  n.sup = gap.max_abs();
  const auto grad = stencil_gradient(gap);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double s = 0.0;
    for (int a = 0; a < g.dim; ++a) s += grad[a][i] * grad[a][i];
    n.c1 = std::max(n.c1, std::sqrt(s));
  }
  return n;
}

GridFunction epsilon_t(const TransportBundle& b, double t) {
  const GridFunction f = b.f_t(t);
  const GridFunction& Lq = b.L_iterates[std::size_t(b.q + 1)];
  const double w = t * std::pow(b.theta, -(b.q + 1));
  GridFunction eps(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(1.0 + f[i] > 0.0)) throw std::domain_error("epsilon_t: 1 + f is not positive");
    eps[i] = (std::log1p(f[i]) - f[i]) / b.theta + w * Lq[i];
  }
  return eps;
}

// ---------------------------------------------------------------------------

namespace {

// Midpoint antiderivative with the linear correction that makes it vanish at both ends.
void preimage_line(const double* f, std::size_t stride, int n, double h, double* u, std::size_t ustride) {
  double total = 0.0;
  for (int j = 0; j < n; ++j) total += f[std::size_t(j) * stride];
  total *= h;
  const double len = n * h;
  double run = 0.0;
  for (int j = 0; j < n; ++j) {
    const double fj = f[std::size_t(j) * stride];
    const double x = (j + 0.5) * h;
    u[std::size_t(j) * ustride] = run + 0.5 * h * fj - (x / len) * total;
    run += h * fj;
  }
}

// Values of f on an n[0] x ... x n[d-1] array (first index fastest); fills
// comps[0..d-1] with a field of divergence f.
void preimage_rec(const std::vector<double>& f, int d, const std::array<int, 3>& n, const std::array<double, 3>& h,
                  std::array<std::vector<double>, 3>& comps) {
  std::size_t inner = 1;
  for (int a = 0; a < d - 1; ++a) inner *= std::size_t(n[a]);
  const int nl = n[d - 1];
  const double len = nl * h[d - 1];
  comps[d - 1].assign(f.size(), 0.0);
  std::vector<double> avg(inner, 0.0);
  for (std::size_t c = 0; c < inner; ++c) {
    preimage_line(f.data() + c, inner, nl, h[d - 1], comps[d - 1].data() + c, inner);
    double s = 0.0;
    for (int j = 0; j < nl; ++j) s += f[c + inner * std::size_t(j)];
    avg[c] = s * h[d - 1] / len;
  }
  if (d == 1) return;
  std::array<std::vector<double>, 3> sub;
  preimage_rec(avg, d - 1, n, h, sub);
  for (int a = 0; a < d - 1; ++a) {
    comps[a].assign(f.size(), 0.0);
    for (int j = 0; j < nl; ++j)
      for (std::size_t c = 0; c < inner; ++c) comps[a][c + inner * std::size_t(j)] = sub[a][c];
  }
}

void check_mean(double integral, double abs_integral, double tol) {
  if (std::abs(integral) > tol * std::max(1.0, abs_integral))
    throw std::invalid_argument("divergence_preimage: f has nonzero mean " + std::to_string(integral));
}

}  // namespace

std::vector<double> divergence_preimage_1d(const std::vector<double>& f, double lo, double hi,
                                           double mean_tolerance) {
  if (f.empty() || !(hi > lo)) throw std::invalid_argument("divergence_preimage_1d: empty interval");
  const double h = (hi - lo) / double(f.size());
  double s = 0.0, sa = 0.0;
  for (double v : f) {
    s += v * h;
    sa += std::abs(v) * h;
  }
  check_mean(s, sa, mean_tolerance);
  std::vector<double> u(f.size());
  preimage_line(f.data(), 1, int(f.size()), h, u.data(), 1);
  return u;
}

std::array<GridFunction, 3> divergence_preimage_grid(const GridFunction& f, double mean_tolerance) {
  const GridSpec& g = f.grid();
  double sa = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sa += std::abs(f[i]) * g.cell_volume();
  check_mean(f.integral(), sa, mean_tolerance);
  const std::array<double, 3> h{g.h(0), g.h(1), g.dim == 3 ? g.h(2) : 1.0};
  std::array<std::vector<double>, 3> comps;
  preimage_rec(f.values(), g.dim, g.n, h, comps);
  std::array<GridFunction, 3> out;
  for (int a = 0; a < 3; ++a)
    out[a] = a < g.dim ? GridFunction(g, std::move(comps[a])) : GridFunction(g);
  return out;
}

VectorFieldSpec divergence_preimage(const GridFunction& f, double mean_tolerance) {
  auto grid = divergence_preimage_grid(f, mean_tolerance);
  std::vector<FieldPtr> comps;
  for (int a = 0; a < f.dim(); ++a) comps.push_back(std::make_shared<GridScalarField>(grid[a], Interp::cubic));
  return VectorFieldSpec(std::move(comps));
}

}  // namespace coulomb

#pragma once

#include "coulomb/energy.hpp"
#include "coulomb/equilibrium.hpp"

#include <memory>
#include <vector>

namespace coulomb {

// ---------------------------------------------------------------------------
// The operator L = Delta / (c_d mu)

// L f on the grid of mu; Delta f from analytic derivatives. Throws when mu
// falls below `floor` where Delta f does not vanish.
GridFunction apply_L(const ScalarField& f, const GridDensity& mu, double floor = 1e-12);
// Same for grid values (five/seven-point Laplacian).
GridFunction apply_L(const GridFunction& f, const GridDensity& mu, double floor = 1e-12);
// L^k f: first application analytic, later ones by stencil.
GridFunction L_pow(const ScalarField& f, const GridDensity& mu, int k, double floor = 1e-12);

// ---------------------------------------------------------------------------
// Transport of mu_theta

struct TransportBundle {
  std::shared_ptr<const ScalarField> xi;
  int q = 0;
  double theta = 1.0;
  std::shared_ptr<const GridDensity> mu;
  std::vector<GridFunction> L_iterates;  // L^k xi for k = 0..q+1
  VectorFieldSpec psi;                   // -(1/(c_d mu)) sum_k grad L^k xi / theta^k
  std::array<GridFunction, 3> psi_grid;  // the same on the grid
  double alpha = 0.0;                    // 2 c_d min of mu on supp xi

  // Requires xi to have at least 2q + 2 derivatives.
  static TransportBundle make(std::shared_ptr<const ScalarField> xi, int q, double theta,
                              std::shared_ptr<const GridDensity> mu);

  // f = t sum_{k<=q} L^{k+1} xi / theta^k
  GridFunction f_t(double t) const;
  // nu_t = mu + (t/c_d) sum_k Delta L^k xi / theta^k = mu (1 + f_t)
  GridDensity nu_t(double t) const;
  // -(div(psi mu)) reference: sum_k Delta L^k xi / (c_d theta^k) = mu sum_k L^{k+1} xi / theta^k.
  GridFunction minus_div_psi_mu() const;
};

// Admissibility of the perturbation size t.
Admissibility nu_positivity(const TransportBundle& b, double t);  // ||t sum Delta L^k xi/theta^k|| < alpha/4
Admissibility psi_smallness(const TransportBundle& b, double t);  // c_d |t| max(sup |psi|, |psi|_{C^1}) < alpha/(2 c_d)

// (mu o Phi^{-1}) / det(I + t D psi) o Phi^{-1} at the grid nodes, Phi = Id + t psi,
// with Phi^{-1} by Newton iteration and mu by cubic interpolation.
GridDensity push_forward(const GridDensity& mu, const VectorFieldSpec& psi, double t);

struct GapNorms {
  double sup = 0.0;
  double c1 = 0.0;  // sup of the stencil gradient
};
// Phi_t # mu - (mu - t div(psi mu)), div by stencil.
GapNorms linearization_gap(const GridDensity& mu, const VectorFieldSpec& psi, double t);

// eps_t = (1/theta)(log(1 + f) - f) + (t / theta^{q+1}) L^{q+1} xi.
GridFunction epsilon_t(const TransportBundle& b, double t);

// Sup over the grid of |psi| and of |D psi| (stencil).
double psi_sup(const VectorFieldSpec& psi, const GridSpec& grid);
double psi_c1(const VectorFieldSpec& psi, const GridSpec& grid);

// ---------------------------------------------------------------------------
// Anisotropy

// Quadrature of mu used along the transport: cell centres, with cells within
// 3h of a point split into 4^d sub-cells for the point-background terms, and a
// radial-angular rule for the diagonal cell-cell terms. Cells with mu below
// `prune` times its maximum are dropped.
class TransportQuadrature {
 public:
  TransportQuadrature(const PointConfiguration& X, const GridDensity& mu, double prune = 1e-14);

  // Discrete F_N(Phi_t X, Phi_t # mu) restricted to the terms that move with
  // t (pairs with at least one member in the support of psi).
  double moving_energy(const VectorFieldSpec& psi, double t) const;
  // k-th Taylor coefficient (k = 1, 2) at t = 0 of the same discrete energy.
  double anisotropy(const VectorFieldSpec& psi, int k) const;

  int N() const { return N_; }

 private:
  struct Node {
    Vec z;
    double w;
  };
  struct NearField {
    std::vector<std::size_t> replaced;  // bb nodes within 3h, sorted
    std::vector<Node> sub;              // their sub-cell centres
  };
  template <class PairKernel, class SelfKernel>
  double assemble(const VectorFieldSpec& psi, const PairKernel& pair, const SelfKernel& self) const;

  int d_;
  int N_;
  std::vector<Vec> x_;
  std::vector<Node> bb_;         // cell centres
  std::vector<NearField> near_;  // per point
  Vec cell_h_;
  std::vector<Vec> dirs_;        // angular rule for the diagonal terms
  std::vector<double> dir_w_;
  double self_radial_ = 0.0;     // E[-log|x - y|] for x, y uniform in one cell (d = 2)
};

// A_k(X, mu, psi): Taylor coefficients (1/k! d^k/dt^k at 0) of F_N(Phi_t X, Phi_t # mu).
double anisotropy_A1(const PointConfiguration& X, const GridDensity& mu, const VectorFieldSpec& psi);
double anisotropy_A2(const PointConfiguration& X, const GridDensity& mu, const VectorFieldSpec& psi);

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;  // with unit C
  double ratio = 0.0;
};

// |A_1| against |psi|_{C^1} (F^{U} + [d = 2] #I log(N)/4 + C0 #I N^{1 - 2/d}), U the
// bounding box of supp psi grown by ell.
struct A1BoundInputs {
  double a1 = 0.0;
  double psi_c1 = 0.0;
  double F_window = 0.0;
  int count = 0;
  int N = 0;
  int d = 2;
};
A1BoundInputs a1_bound_inputs(const PointConfiguration& X, const GridDensity& mu, const TransportBundle& b,
                              double ell);
BoundCheck a1_bound_check(const A1BoundInputs& in, double C, double C0);

// ---------------------------------------------------------------------------
// Divergence preimage

// U with div U = f on the box of the grid of f (f of zero mean, supported in
// the box): slice averages recursively, last component
// u(x) = int_0^{x_d} f ds - (x_d / l_d) int_0^{l_d} f ds.
VectorFieldSpec divergence_preimage(const GridFunction& f, double mean_tolerance = 1e-10);
std::array<GridFunction, 3> divergence_preimage_grid(const GridFunction& f, double mean_tolerance = 1e-10);
// One-dimensional case on a uniform grid of cell values over [lo, hi].
std::vector<double> divergence_preimage_1d(const std::vector<double>& f, double lo, double hi,
                                           double mean_tolerance = 1e-10);

}  // namespace coulomb

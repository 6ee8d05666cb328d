#pragma once

#include <vector>

namespace coulomb {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule on [a, b] (Golub-Welsch).
GaussRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

// Pairwise (tree) summation; the reduction order depends only on the length.
double tree_sum(const double* x, std::size_t n);
inline double tree_sum(const std::vector<double>& x) { return tree_sum(x.data(), x.size()); }

}  // namespace coulomb

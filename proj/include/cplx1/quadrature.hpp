#pragma once

#include <functional>
#include <vector>

namespace cplx1 {

struct GaussLegendre {
  std::vector<double> node;    // on (-1, 1)
  std::vector<double> weight;
  explicit GaussLegendre(int n);
};

// Composite Gauss-Legendre: `order` nodes per panel, panels of width
// (b-a)/panels.
double integrate(const std::function<double(double)>& f, double a, double b, int panels, int order = 16);

// Nodes and weights for the same composite rule, for reuse across integrands.
void composite_nodes(double a, double b, int panels, int order, std::vector<double>& xs,
                     std::vector<double>& ws);

}  // namespace cplx1

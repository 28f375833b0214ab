#include "cplx1/quadrature.hpp"

#include <cmath>

namespace cplx1 {

GaussLegendre::GaussLegendre(int n) : node(n), weight(n) {
  for (int i = 0; i < n; ++i) {
    // Newton iteration from the Chebyshev-angle initial guess
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (x * p1 - p0) / (x * x - 1.0);
    node[n - 1 - i] = x;
    weight[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

void composite_nodes(double a, double b, int panels, int order, std::vector<double>& xs,
                     std::vector<double>& ws) {
  GaussLegendre gl(order);
  xs.clear();
  ws.clear();
  double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    double lo = a + p * h;
    for (int i = 0; i < order; ++i) {
      xs.push_back(lo + 0.5 * h * (gl.node[i] + 1.0));
      ws.push_back(0.5 * h * gl.weight[i]);
    }
  }
}

double integrate(const std::function<double(double)>& f, double a, double b, int panels, int order) {
  std::vector<double> xs, ws;
  composite_nodes(a, b, panels, order, xs, ws);
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) s += ws[i] * f(xs[i]);
  return s;
}

}  // namespace cplx1

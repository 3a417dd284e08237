#include "tmkd/autodiff.hpp"

namespace tmkd {

double grad_check(const GradCheckBuilder& build, std::vector<double> point, double h) {
  if (h <= 0) throw std::invalid_argument("grad_check: h must be positive");

  auto eval = [&](const std::vector<double>& p, Graph<double>& g) {
    NodeId root = build(g, p);
    if (!g.is_scalar(root))
      throw std::invalid_argument("grad_check: builder must return a scalar root");
    return root;
  };

  // Analytic pass. The builder registers parameters in the order it consumes
  // the flat point vector, so concatenating param grads restores that layout.
  Graph<double> g;
  NodeId root = eval(point, g);
  g.backward(root);
  std::vector<double> analytic;
  analytic.reserve(point.size());
  for (NodeId p : g.params()) {
    const std::vector<double>& gp = g.param_grad(p);
    analytic.insert(analytic.end(), gp.begin(), gp.end());
  }
  if (analytic.size() != point.size())
    throw std::logic_error("grad_check: builder consumed " + std::to_string(analytic.size()) +
                           " parameters, point has " + std::to_string(point.size()));

  double max_rel = 0.0;
  for (std::size_t i = 0; i < point.size(); ++i) {
    double saved = point[i];
    point[i] = saved + h;
    Graph<double> gp;
    double fp = gp.scalar(eval(point, gp));
    point[i] = saved - h;
    Graph<double> gm;
    double fm = gm.scalar(eval(point, gm));
    point[i] = saved;
    double fd = (fp - fm) / (2.0 * h);
    double denom = std::max({1.0, std::abs(analytic[i]), std::abs(fd)});
    max_rel = std::max(max_rel, std::abs(analytic[i] - fd) / denom);
  }
  return max_rel;
}

}  // namespace tmkd

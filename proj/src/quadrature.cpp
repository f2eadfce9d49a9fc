#include "resonance/quadrature.hpp"

#include <map>
#include <mutex>

#include <Eigen/Eigenvalues>

namespace resonance {

namespace {

GaussRule build(int n) {
  // Jacobi matrix of the Legendre recurrence.
  Eigen::MatrixXd jm = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    double b = i / std::sqrt(4.0 * i * i - 1.0);
    jm(i, i - 1) = jm(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jm);
  GaussRule r;
  r.nodes = es.eigenvalues();
  r.weights = 2.0 * es.eigenvectors().row(0).array().square().transpose();

  // Barycentric weights for Lagrange interpolation on the nodes.
  Eigen::VectorXd bw(n);
  for (int j = 0; j < n; ++j) {
    double p = 1.0;
    for (int m = 0; m < n; ++m)
      if (m != j) p *= r.nodes(j) - r.nodes(m);
    bw(j) = 1.0 / p;
  }
  auto basis_at = [&](double t) {
    Eigen::VectorXd l(n);
    for (int j = 0; j < n; ++j) {
      if (t == r.nodes(j)) {
        l.setZero();
        l(j) = 1.0;
        return l;
      }
      l(j) = bw(j) / (t - r.nodes(j));
    }
    return Eigen::VectorXd(l / l.sum());
  };

  // Degree n - 1 basis polynomials are integrated exactly by the same rule.
  r.tail.resize(n, n);
  for (int i = 0; i < n; ++i) {
    double a = r.nodes(i), h = 0.5 * (1.0 - a);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
    for (int q = 0; q < n; ++q) acc += r.weights(q) * basis_at(a + h * (r.nodes(q) + 1.0));
    r.tail.row(i) = h * acc.transpose();
  }
  return r;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build(n)).first;
  return it->second;
}

}  // namespace resonance

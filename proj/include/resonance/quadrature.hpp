#pragma once

#include <Eigen/Dense>

namespace resonance {

// n-point Gauss-Legendre rule on [-1, 1] (Golub-Welsch), nodes ascending.
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
  // tail(i, j) = integral from nodes(i) to 1 of the j-th Lagrange basis polynomial,
  // so tail * f approximates the integrals of f from each node to the right end.
  Eigen::MatrixXd tail;
};

// Cached per n; thread-safe after first use.
const GaussRule& gauss_legendre(int n);

}  // namespace resonance

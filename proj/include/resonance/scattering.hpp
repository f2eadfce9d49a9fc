#pragma once

#include <complex>

#include <Eigen/Dense>

#include "resonance/potential.hpp"

namespace resonance {

template <typename Scalar>
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;
template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

using Mat2c = Mat2<Complex>;
using Vec2c = Vec2<Complex>;

// Value of a matrix function of k together with its k-derivative.
template <typename Scalar>
struct MatJet {
  Mat2<Scalar> value;
  Mat2<Scalar> dk;
};

// Maps (psi, psi') at x to (psi, psi') at x + d across a piece of constant height v.
// d may be negative, which gives the inverse map.
template <typename Scalar>
Mat2<Scalar> segment_matrix(Scalar k, double v, double d);
template <typename Scalar>
MatJet<Scalar> segment_matrix_jet(Scalar k, double v, double d);

// Jump psi'(x+) = psi'(x-) + alpha psi(x).
template <typename Scalar>
Mat2<Scalar> delta_matrix(double alpha) {
  Mat2<Scalar> m;
  m << Scalar(1), Scalar(0), Scalar(alpha), Scalar(1);
  return m;
}

enum class Side { left, right };

struct JostFrame {
  Complex psi;
  Complex dpsi;
  double x;
  Side side;
};

// Frame plus d/dk of psi and psi'.
struct JostJet {
  JostFrame frame;
  Complex psi_k;
  Complex dpsi_k;
};

// psi_1 = e^{-ikx} left of the support; returned at sup supp V (right limit).
JostFrame jost_left(const Potential& v, Complex k);
JostFrame jost_left(const Potential& v, Complex k, double x, Side side);
JostJet jost_left_jet(const Potential& v, Complex k, double x, Side side);
// psi_2 = e^{ikx} right of the support; returned at inf supp V (left limit).
JostFrame jost_right(const Potential& v, Complex k);
JostFrame jost_right(const Potential& v, Complex k, double x, Side side);
JostJet jost_right_jet(const Potential& v, Complex k, double x, Side side);

// Transfer matrix across the whole support, from its left edge to its right edge.
Mat2c transfer_matrix(const Potential& v, Complex k);

// W = psi_1' psi_2 - psi_1 psi_2'. With this orientation the resolvent kernel is
// psi_1(x<) psi_2(x>) / W and two deltas of strength alpha at distance L give
// W(0) = L alpha^2 + 2 alpha. The free value is W = -2ik.
Complex wronskian(const Potential& v, Complex k);
Complex wronskian_at(const Potential& v, Complex k, double x);
// Returns {W, dW/dk}.
std::pair<Complex, Complex> wronskian_jet(const Potential& v, Complex k);

// Numerator and denominator of a Mobius factor, with k-derivatives.
struct MobiusData {
  Complex num;
  Complex den;
  Complex num_k;
  Complex den_k;
};

// f1 = (-ik psi_1(0) + psi_1'(0+)) / (ik psi_1(0) + psi_1'(0+)); requires supp V1 in (-inf, 0].
MobiusData left_factor_data(const Potential& v1, Complex k);
// f2 = (ik psi_2(0) + psi_2'(0-)) / (-ik psi_2(0) + psi_2'(0-)); requires supp V2 in [0, inf).
MobiusData right_factor_data(const Potential& v2, Complex k);

struct FactorValue {
  Complex value;           // meaningless when pole is set
  bool pole = false;       // denominator vanished to 1e-13 relative
  double den_residual = 0; // |denominator|
};

FactorValue f1(const Potential& v1, Complex k);
FactorValue f2(const Potential& v2, Complex k);
FactorValue f(const Potential& v1, const Potential& v2, Complex k);

// R(k) = e^{-2ikL} N1 N2 - D1 D2 for the composite V1 + V2(. - L). The composite
// Wronskian is e^{2ikL} R(k) / (2ik), so R vanishes where e^{2ikL} = f(k) (and at k = 0),
// and stays representable for large L in the lower half plane where W overflows.
// Returns {value, d/dk}.
std::pair<Complex, Complex> composite_residual(const Potential& v1, const Potential& v2, double L,
                                               Complex k);

}  // namespace resonance

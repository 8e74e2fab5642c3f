// qlrs: QLRS-CDMA simulation and likelihood ascent search detection
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include "qlrs/channel.hpp"

namespace qlrs::test {

// Orthogonal channel fixture: Walsh-Hadamard columns over chips = 4^m so the
// chip value 1/sqrt(chips) is an exact power of two and R comes out as the
// identity with no rounding at all.
inline Eigen::MatrixXd hadamard_columns(int chips, int bits) {
  Eigen::MatrixXd h(1, 1);
  h(0, 0) = 1.0;
  while (h.rows() < chips) {
    const Eigen::MatrixXd prev = h;
    h.resize(prev.rows() * 2, prev.cols() * 2);
    h.topLeftCorner(prev.rows(), prev.cols()) = prev;
    h.topRightCorner(prev.rows(), prev.cols()) = prev;
    h.bottomLeftCorner(prev.rows(), prev.cols()) = prev;
    h.bottomRightCorner(prev.rows(), prev.cols()) = -prev;
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(chips));
  return h.leftCols(bits) * scale;
}

inline ChannelInstance orthogonal_instance(int bits, double sigma = 0.0,
                                           Eigen::VectorXd amplitudes = {}) {
  int chips = 1;
  while (chips < bits) chips *= 4;
  if (amplitudes.size() == 0) amplitudes = Eigen::VectorXd::Ones(bits);
  return make_instance_from_s(hadamard_columns(chips, bits), amplitudes, sigma);
}

// Two-user instance with an exactly representable crosscorrelation rho,
// built at the Gram level (no spreading matrix behind it).
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> two_user_gram(double rho) {
  Eigen::MatrixXd r(2, 2);
  r << 1.0, rho, rho, 1.0;
  return {r, r};  // equal unit powers: H == R
}

}  // namespace qlrs::test

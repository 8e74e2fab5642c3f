// qlrs: QLRS-CDMA simulation and likelihood ascent search detection
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace qlrs {

enum class LimitDetector { SingleUser, Mf, Decorrelator, Mmse, TanakaGml };

std::string limit_detector_name(LimitDetector d);

/// One point of a large-system limit curve.
struct LimitPoint {
  double alpha = 0.0;
  double snr_db = 0.0;
  LimitDetector detector = LimitDetector::SingleUser;
  double ber = 0.5;
  double sir = 0.0;               // effective SIR behind the Q evaluation
  int multiplicity = 1;           // number of fixed-point solutions found
  bool defined = true;            // false e.g. for the decorrelator at load >= 1
  bool experimental = false;      // true for the replica-symmetric GML curve
  std::vector<double> all_bers;   // every solution, ascending BER
  std::vector<double> all_sirs;   // matching effective SIRs
};

/// Gaussian tail probability Q(x) = P(Z > x), relative error <= 1e-12.
double q_function(double x);

/// Q(10^(snr_db/20)) under the equal-power convention sigma = 10^(-snr/20).
double single_user_ber(double snr_db);

/// Matched filter limit: SIR = 1 / (sigma^2 + alpha).
LimitPoint mf_limit_ber(double alpha, double snr_db);

/// Decorrelator limit: SIR = (1 - alpha) / sigma^2, undefined for alpha >= 1.
LimitPoint decorr_limit_ber(double alpha, double snr_db);

/// MMSE limit: the unique positive root of
///   beta = 1 / (sigma^2 + alpha / (1 + beta)),
/// bisected until the fixed-point residual is <= 1e-12.
LimitPoint mmse_limit_ber(double alpha, double snr_db);

/// Residual of the MMSE fixed-point equation at beta (diagnostic).
double mmse_fixed_point_residual(double alpha, double snr_db, double beta);

/// Replica-symmetric large-system BER of exact maximum-likelihood detection:
/// every root u of
///   u = 1 / sqrt(sigma^2 + 4 alpha Q(u))
/// is a fixed point with BER = Q(u). A sweep over u brackets all roots
/// (multiplicity can exceed 1 at high load); the reported `ber` is the root
/// minimizing the scalar potential whose stationary points are exactly these
/// fixed points. Flagged experimental.
LimitPoint tanaka_gml_limit_ber(double alpha, double snr_db);

}  // namespace qlrs

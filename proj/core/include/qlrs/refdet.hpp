// qlrs: QLRS-CDMA simulation and likelihood ascent search detection
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace qlrs {

enum class DetectorKind {
  MatchedFilter,
  Decorrelator,
  Mmse,
  MmseDf,
  Sic,
  GmlExhaustive,
  Wslas,
  Slas,
};

std::string detector_name(DetectorKind kind);
DetectorKind detector_from_name(const std::string& name);

/// sign(y) componentwise with sign(0) := +1.
Eigen::VectorXd mf_detect(const Eigen::VectorXd& y);

/// Cached linear filter: decorrelator (pseudo-inverse of R, eigenvalue
/// cutoff 1e-10 * lambda_max) or MMSE ((R + sigma^2 A^-2)^-1). Building one
/// costs O(K^3); applying it costs O(K^2), which is what the Monte Carlo
/// loop amortizes in short-sequence mode.
class LinearDetector {
 public:
  static LinearDetector decorrelator(const Eigen::MatrixXd& R);
  static LinearDetector mmse(const Eigen::MatrixXd& R, const Eigen::VectorXd& A,
                             double sigma);

  Eigen::VectorXd filter(const Eigen::VectorXd& y) const { return P_ * y; }
  Eigen::VectorXd detect(const Eigen::VectorXd& y) const;
  const Eigen::MatrixXd& matrix() const { return P_; }
  bool rank_deficient() const { return rank_deficient_; }
  int rank() const { return rank_; }

 private:
  Eigen::MatrixXd P_;
  bool rank_deficient_ = false;
  int rank_ = 0;
};

Eigen::VectorXd decorrelator_detect(const Eigen::VectorXd& y,
                                    const Eigen::MatrixXd& R);
Eigen::VectorXd mmse_detect(const Eigen::VectorXd& y, const Eigen::MatrixXd& R,
                            const Eigen::VectorXd& A, double sigma);

/// MMSE with decision feedback: users are decided in decreasing-amplitude
/// order (ascending index on ties); each step applies the MMSE filter of the
/// undetected subsystem to the interference-cancelled statistic, decides one
/// bit and subtracts its reconstructed contribution. The shrinking inverse
/// is maintained by Schur-complement downdates, O(K^3) per call overall.
/// `prepared_inverse` may pass the full (R + sigma^2 A^-2)^-1 to skip the
/// initial factorization.
Eigen::VectorXd mmse_df_detect(const Eigen::VectorXd& y,
                               const Eigen::MatrixXd& R,
                               const Eigen::VectorXd& A, double sigma,
                               const Eigen::MatrixXd* prepared_inverse = nullptr);

/// Matched-filter successive interference cancellation in
/// decreasing-amplitude order.
Eigen::VectorXd sic_detect(const Eigen::VectorXd& y, const Eigen::MatrixXd& R,
                           const Eigen::VectorXd& A);

/// Exhaustive maximizer of Omega(b) = 2 b^T A y - b^T H b over {-1,+1}^K via
/// a Gray-code walk; ties broken toward the lexicographically smallest
/// vector (-1 before +1). Refuses K above `cap`.
Eigen::VectorXd gml_exhaustive(const Eigen::VectorXd& y,
                               const Eigen::VectorXd& A,
                               const Eigen::MatrixXd& H, int cap = 20);

struct MlStructure {
  Eigen::VectorXd gml;
  std::vector<Eigen::VectorXd> lml_points;
};

/// One Gray-code walk collecting both the exhaustive maximizer and every
/// vector satisfying the single-flip fixed-point condition.
MlStructure ml_structure(const Eigen::VectorXd& y, const Eigen::VectorXd& A,
                         const Eigen::MatrixXd& H, int cap = 20);

}  // namespace qlrs

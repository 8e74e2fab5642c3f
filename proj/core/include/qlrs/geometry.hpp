// qlrs: QLRS-CDMA simulation and likelihood ascent search detection
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

namespace qlrs {

/// Threshold load 1/2 - 1/(4 ln 2) below which local-maximum detection
/// asymptotically matches exhaustive detection.
double alpha_star();

/// Sparse error vector: entries in {-1, 0, +1} stored as (support, signs).
struct ErrorVector {
  std::vector<int> support;      // sorted ascending
  std::vector<std::int8_t> signs;  // +-1, aligned with support

  int weight() const { return static_cast<int>(support.size()); }
  bool touches(int user) const;
  Eigen::VectorXd dense(int dim) const;
  static ErrorVector from_dense(const Eigen::VectorXd& e);
};

/// Distance from the transmitted signal to the optimal separating
/// hyperplane: sqrt(eps^T H eps), negative round-off clamped to zero.
double d_gml(const ErrorVector& e, const Eigen::MatrixXd& H);

/// Distance bound for the single-flip fixed-point regions:
///   eps^T (2H - A^2) eps / sqrt(eps^T H eps).
/// May be negative. Weight-1 vectors reduce exactly to d_gml. A degenerate
/// quadratic form (eps^T H eps <= 0) returns -infinity.
double d_lml(const ErrorVector& e, const Eigen::MatrixXd& H,
             const Eigen::VectorXd& A);

/// Same quadratic form evaluated straight from the spreading matrix,
/// |S A eps|^2; independent route used to cross-check d_gml.
double d_gml_sq_from_s(const ErrorVector& e, const Eigen::MatrixXd& S,
                       const Eigen::VectorXd& A);

/// True iff no bipartition of the support into nonempty halves has a
/// nonnegative cross term eps_1^T H eps_2 (such a split makes the squared
/// distance superadditive, i.e. the vector decomposes). Checks all
/// 2^(w-1) - 1 bipartitions; rejects weight above `cap`.
bool is_indecomposable(const ErrorVector& e, const Eigen::MatrixXd& H,
                       int cap = 16);

struct AmeReport {
  int user = 0;
  double gml_ame = 1.0;      // min d_gml^2 / A_k^2 over eps touching k, <= 1
  double lml_ame_lb = 1.0;   // min ([d_lml]^+ / A_k)^2 over indecomposable eps
  ErrorVector gml_argmin;
  ErrorVector lml_argmin;
  long long enumerated = 0;
  long long degenerate_skipped = 0;
};

/// Exact minima over all error vectors with eps_k != 0 and weight <=
/// max_weight (sign of the k-th entry fixed to +1; distances are symmetric
/// under global negation). Enumeration is refused above 2^26 candidates.
AmeReport ame_report(const Eigen::MatrixXd& H, const Eigen::VectorXd& A,
                     int user, int max_weight);

/// Column source for the distance experiments; Orthogonal substitutes
/// orthonormal columns (a test hook making every distance exactly sqrt(w)).
enum class ColumnSource { Random, Orthogonal };

struct Thm1Row {
  int users = 0;
  int spreading = 0;
  long long trials = 0;
  long long violations = 0;
  double freq = 0.0;
  double se = 0.0;
};

/// Samples nested support pairs w(eps1) <= M1 < w(eps2) <= M2 on fresh
/// random columns and reports how often the inner distance fails to be
/// strictly smaller.
std::vector<Thm1Row> thm1_experiment(double alpha, std::span<const int> K_list,
                                     int M1, int M2, long long trials,
                                     std::uint64_t seed, int workers = 0,
                                     ColumnSource source = ColumnSource::Random);

struct Thm2Row {
  int users = 0;
  int spreading = 0;
  int weight = 0;
  long long n = 0;
  double mean_ratio_err = 0.0;  // mean |d_lml/d_gml - 1|
  double max_ratio_err = 0.0;
  double se = 0.0;
};

struct Thm2TailRow {
  int users = 0;
  int spreading = 0;
  long long sampled = 0;
  long long indecomposable = 0;
  double min_dlml = 0.0;
};

struct Thm2Result {
  double alpha_star_value = 0.0;
  std::vector<Thm2Row> rows;        // part (i), one row per (K, weight)
  std::vector<Thm2TailRow> tail;    // part (ii), only when alpha < alpha_star
};

Thm2Result thm2_experiment(double alpha, std::span<const int> K_list, int M,
                           long long trials, std::uint64_t seed,
                           int workers = 0,
                           ColumnSource source = ColumnSource::Random);

struct Thm4Row {
  int users = 0;
  int spreading = 0;
  double sigma = 0.0;
  long long trials = 0;
  double freq_lml_unique_gml = 0.0;  // LML point set == {GML point}
  double freq_wslas_eq_gml = 0.0;
  double se = 0.0;
};

/// Runs noisy trials at sigma = c / sqrt(N), enumerates every
/// single-flip-stable vector exhaustively and checks coincidence with the
/// exhaustive maximizer. Requires alpha < alpha_star and K within the
/// exhaustive cap.
std::vector<Thm4Row> thm4_experiment(double alpha, double c,
                                     std::span<const int> K_list,
                                     long long trials, std::uint64_t seed,
                                     int workers = 0, int gml_cap = 20);

}  // namespace qlrs

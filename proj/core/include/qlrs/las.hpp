// qlrs: QLRS-CDMA simulation and likelihood ascent search detection
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "qlrs/channel.hpp"
#include "qlrs/rng.hpp"

namespace qlrs {

/// Search state of a likelihood ascent over b in {-1,+1}^K maximizing the
/// ML metric Omega(b) = 2 b^T A y - b^T H b. The residual correlation
/// z = A y - H b is kept incrementally so that the metric change of any
/// flip pattern costs O(|pattern|^2) instead of O(K^2).
struct LikelihoodState {
  Eigen::VectorXd b;         // current decisions, entries +-1
  Eigen::VectorXd z;         // A y - H b
  double omega = 0.0;        // current metric value
  long long flips = 0;       // accepted single-bit flips, pattern-weighted
  long long additions = 0;   // |pattern| * K charged per accepted pattern
};

LikelihoodState make_state(const Eigen::VectorXd& y, const Eigen::VectorXd& b0,
                           const Eigen::VectorXd& A, const Eigen::MatrixXd& H);

/// Metric change for negating the bits in flip_set:
///   delta = 4 * (-sum_i eps_i z_i - sum_{i,j} eps_i H_ij eps_j)
/// with eps equal to the current b on flip_set and zero elsewhere. Flipping
/// is advantageous iff the returned value is > 0. No side effects.
double delta_likelihood(const LikelihoodState& st, std::span<const int> flip_set,
                        const Eigen::MatrixXd& H);

/// Negates b on flip_set and updates z, omega and the counters. The z update
/// is the rank-|flip_set| correction z += 2 H eps, charged as |flip_set| * K
/// additions.
void apply_flip(LikelihoodState& st, std::span<const int> flip_set,
                const Eigen::MatrixXd& H);

/// True iff no single-bit flip improves the metric: -b_k z_k <= H_kk for all
/// k. This is the fixed-point condition of the final cascade stage.
bool is_lml_point(const Eigen::VectorXd& b, const Eigen::VectorXd& z,
                  const Eigen::MatrixXd& H);

/// Convenience overload recomputing z from scratch.
bool is_lml_point(const Eigen::VectorXd& b, const Eigen::VectorXd& y,
                  const Eigen::VectorXd& A, const Eigen::MatrixXd& H);

/// Consistency diagnostic: inf-norm error between the incremental z and a
/// full recompute, relative to max(1, |z|_inf).
double z_recompute_error(const LikelihoodState& st, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& A, const Eigen::MatrixXd& H);

enum class InitialPolicy { MatchedFilter, Random, Given };

/// Group update rule for one group visit.
///
/// Parallel: flip all bits of the group whose individual flip improves the
/// metric, simultaneously, provided their joint change still improves it;
/// otherwise the group is skipped for this visit. This is the group-by-group
/// parallel update of the detector family and the default.
///
/// BestSubset: evaluate all 2^J - 1 nonempty flip patterns inside the group
/// and apply the one with maximal metric change (a strictly stronger but
/// exponentially costlier per-visit search).
///
/// Both rules accept a pattern only when its metric change is > 0, so every
/// accepted pattern strictly ascends and every run terminates at a
/// single-flip-stable point after the final size-1 stage.
enum class GroupRule { Parallel, BestSubset };

/// Cascade schedule. Stages run in order, each initialized with the previous
/// stage's output; the last stage must have group size 1 so the output is a
/// local-maximum-likelihood point.
struct Schedule {
  std::vector<int> stages{8, 4, 2, 1};
  InitialPolicy initial = InitialPolicy::MatchedFilter;
  GroupRule rule = GroupRule::Parallel;

  void validate() const;  // throws std::invalid_argument

  static Schedule wslas(InitialPolicy init = InitialPolicy::MatchedFilter,
                        GroupRule r = GroupRule::Parallel) {
    return Schedule{{8, 4, 2, 1}, init, r};
  }
  static Schedule slas(InitialPolicy init = InitialPolicy::MatchedFilter,
                       GroupRule r = GroupRule::Parallel) {
    return Schedule{{1}, init, r};
  }
};

/// Runs one group stage to its fixed point: sweeps the contiguous groups
/// cyclically, applying the rule's pattern per group visit (ties broken
/// toward the lexicographically smallest index set). Terminates when a full
/// sweep accepts no flip. Returns the flips accepted in this stage. If
/// omega_trace is given, the metric value after each accepted pattern is
/// appended.
long long gplas_stage(LikelihoodState& st, int group_size,
                      const Eigen::MatrixXd& H,
                      std::vector<double>* omega_trace = nullptr,
                      GroupRule rule = GroupRule::Parallel);

struct StageTrace {
  int group_size = 0;
  long long flips = 0;
  long long additions = 0;
  double omega_after = 0.0;
  Eigen::VectorXd b_after;
};

struct DetectionResult {
  Eigen::VectorXd b;
  std::vector<StageTrace> stages;
  long long flips = 0;
  long long additions = 0;
  bool lml = false;
};

/// Runs the full cascade on the matched-filter statistic y. `rng` is
/// required for the Random initial policy, `given_initial` for Given.
DetectionResult run_las(const Eigen::VectorXd& y, const Eigen::VectorXd& A,
                        const Eigen::MatrixXd& H, const Schedule& schedule,
                        const Eigen::VectorXd* given_initial = nullptr,
                        RngStream* rng = nullptr,
                        std::vector<double>* omega_trace = nullptr);

inline DetectionResult run_las(const Eigen::VectorXd& y,
                               const ChannelInstance& inst,
                               const Schedule& schedule,
                               const Eigen::VectorXd* given_initial = nullptr,
                               RngStream* rng = nullptr,
                               std::vector<double>* omega_trace = nullptr) {
  return run_las(y, inst.A, inst.H, schedule, given_initial, rng, omega_trace);
}

}  // namespace qlrs

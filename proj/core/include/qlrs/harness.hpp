// qlrs: QLRS-CDMA simulation and likelihood ascent search detection
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qlrs/channel.hpp"
#include "qlrs/las.hpp"
#include "qlrs/refdet.hpp"
#include "qlrs/report.hpp"

namespace qlrs {

struct StopRule {
  long long min_errors = 200;
  long long max_bits = 50'000'000;  // per-detector budget
};

/// One Monte Carlo run: a channel configuration, the detectors to compare
/// and the stopping discipline. A trial transmits one full bit vector
/// through one channel realization; all detectors see the same statistic.
struct TrialPlan {
  SystemConfig config;
  std::vector<DetectorKind> detectors{DetectorKind::MatchedFilter,
                                      DetectorKind::Wslas, DetectorKind::Slas};
  Schedule schedule = Schedule::wslas();  // cascade stages + initial policy
  StopRule stop;
  int sample_count = 5;  // short-sequence samples; long mode runs one
  int workers = 0;       // 0 = hardware concurrency
  int gml_cap = 20;
};

/// Accumulated statistics of one reported series (a detector, or one cascade
/// stage) within one sequence sample. sample == 0 denotes the across-sample
/// average row.
struct SeriesStats {
  std::string detector;
  int sample = 0;
  long long bits = 0;
  long long errors = 0;
  long long flips = 0;
  long long additions = 0;
  double ber = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double bfr = 0.0;
  double additions_per_bit = 0.0;
  bool flagged = false;  // bit budget exhausted before min_errors
};

struct McSummary {
  QlrsDims dims;
  int samples = 1;
  std::vector<SeriesStats> series;
  std::vector<double> sample_wall_seconds;
  double wall_seconds = 0.0;
  bool flagged = false;

  const SeriesStats* find(const std::string& detector, int sample) const;
  /// The across-sample average, or the single sample when only one ran.
  const SeriesStats* find_avg(const std::string& detector) const;
};

/// Runs trials per sample until the slowest detector collects
/// stop.min_errors bit errors or exhausts stop.max_bits. Results are
/// bit-identical for a fixed seed regardless of worker count: trials land in
/// per-index slots merged in order, and stopping is evaluated only at fixed
/// batch boundaries.
McSummary run_trials(const TrialPlan& plan);

// ---------------------------------------------------------------------------
// Figure-level experiment drivers.

struct FigPoint {
  double alpha = 0.0;
  double snr_db = 0.0;
  long long bk = 0;
  int users = 0;
  int extend = 0;
  int spreading = 0;
  McSummary summary;
};

struct FigResult {
  std::vector<FigPoint> points;
  std::vector<ResultRow> rows;
  bool flagged = false;
};

struct Fig1Options {
  std::vector<long long> bk_ladder{8, 128, 512};
  int users = 8;
  double alpha = 0.8;
  double snr_db = 11.0;
  InitialPolicy initial = InitialPolicy::MatchedFilter;
  GroupRule group_rule = GroupRule::Parallel;
  std::vector<DetectorKind> detectors{
      DetectorKind::MatchedFilter, DetectorKind::Wslas, DetectorKind::Slas,
      DetectorKind::MmseDf, DetectorKind::Sic};
  StopRule stop;
  int sample_count = 5;
  int workers = 0;
  std::uint64_t seed = 0;
  bool with_tanaka = true;
};

/// BER/BFR versus BK at fixed load and SNR. Long sequences for BK <= 128,
/// short (sample_count samples) above.
FigResult fig1_driver(const Fig1Options& opt);

struct Fig2Options {
  std::vector<double> snr_ladder{4, 5, 6, 7, 8, 9, 10, 11, 12};
  long long bk = 1024;
  int users = 8;
  double alpha = 0.8;
  InitialPolicy initial = InitialPolicy::Random;
  GroupRule group_rule = GroupRule::Parallel;
  std::vector<DetectorKind> detectors{
      DetectorKind::MatchedFilter, DetectorKind::Wslas, DetectorKind::Slas,
      DetectorKind::MmseDf, DetectorKind::Sic};
  StopRule stop;
  int sample_count = 5;
  int workers = 0;
  std::uint64_t seed = 0;
  bool with_tanaka = true;
};

/// BER/BFR versus SNR at fixed load and BK; co-emits the limit curves.
FigResult fig2_driver(const Fig2Options& opt);

struct Fig3Options {
  std::vector<double> alpha_ladder{0.2, 0.5, 0.8, 1.0, 1.1, 1.2, 1.3};
  int users = 8;
  double snr_db = 11.0;
  InitialPolicy initial = InitialPolicy::MatchedFilter;
  GroupRule group_rule = GroupRule::Parallel;
  std::vector<DetectorKind> detectors{
      DetectorKind::MatchedFilter, DetectorKind::Wslas, DetectorKind::Slas,
      DetectorKind::MmseDf, DetectorKind::Sic};
  StopRule stop;
  int sample_count = 5;
  int workers = 0;
  std::uint64_t seed = 0;
  long long bk_cap = 1024;  // desk profile scales the full BK schedule down
  bool with_tanaka = true;
};

/// BER/BFR versus load; the per-load BK schedule follows fig3_schedule_bk,
/// proportionally scaled so its largest entry is bk_cap.
FigResult fig3_driver(const Fig3Options& opt);

/// Reference BK schedule per load value: larger loads get more bits so
/// every point stays in the quasi-large regime (unscaled).
long long fig3_schedule_bk(double alpha);

}  // namespace qlrs

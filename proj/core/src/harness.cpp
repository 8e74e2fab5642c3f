// qlrs: QLRS-CDMA simulation and likelihood ascent search detection
// SPDX-License-Identifier: Apache-2.0
#include "qlrs/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "qlrs/asymptotics.hpp"
#include "qlrs/parallel.hpp"

namespace qlrs {

namespace {

constexpr long long kBatchTrials = 32;  // stopping is evaluated here only

struct SeriesDef {
  std::string label;
  DetectorKind kind;
  int stage = -1;  // cascade stage index, -1 = detector output
};

struct KindPlan {
  DetectorKind kind;
  std::vector<int> series;  // indices into the series table
  int gate = -1;            // series whose errors drive the stop rule
};

struct TrialCell {
  int errors = 0;
  long long flips = 0;
  long long additions = 0;
};

struct Prepared {
  std::optional<LinearDetector> decorr;
  std::optional<LinearDetector> mmse;
  const Eigen::MatrixXd* mmse_inverse = nullptr;
};

int count_errors(const Eigen::VectorXd& decided, const Eigen::VectorXd& truth) {
  int n = 0;
  for (int i = 0; i < decided.size(); ++i) {
    if (decided[i] * truth[i] < 0.0) ++n;
  }
  return n;
}

Schedule slas_schedule(const Schedule& base) {
  return Schedule::slas(base.initial, base.rule);
}

}  // namespace

const SeriesStats* McSummary::find(const std::string& detector,
                                   int sample) const {
  for (const SeriesStats& s : series) {
    if (s.detector == detector && s.sample == sample) return &s;
  }
  return nullptr;
}

const SeriesStats* McSummary::find_avg(const std::string& detector) const {
  if (const SeriesStats* s = find(detector, 0)) return s;
  return find(detector, 1);
}

McSummary run_trials(const TrialPlan& plan) {
  const auto t_start = std::chrono::steady_clock::now();
  plan.config.validate();
  plan.schedule.validate();
  if (plan.stop.min_errors < 1)
    throw std::invalid_argument("run_trials: min_errors must be >= 1");
  const QlrsDims dims = build_qlrs(plan.config);
  if (plan.stop.max_bits < dims.total_bits)
    throw std::invalid_argument("run_trials: max_bits below one trial");
  if (plan.detectors.empty())
    throw std::invalid_argument("run_trials: no detectors");

  // Expand detectors into reported series; the cascade reports each stage
  // plus the whole detector.
  std::vector<SeriesDef> series;
  std::vector<KindPlan> kinds;
  for (const DetectorKind kind : plan.detectors) {
    KindPlan kp;
    kp.kind = kind;
    if (kind == DetectorKind::Wslas) {
      for (std::size_t i = 0; i < plan.schedule.stages.size(); ++i) {
        kp.series.push_back(static_cast<int>(series.size()));
        series.push_back({"wslas:j" + std::to_string(plan.schedule.stages[i]),
                          kind, static_cast<int>(i)});
      }
      kp.series.push_back(static_cast<int>(series.size()));
      series.push_back({"wslas", kind, -1});
    } else {
      kp.series.push_back(static_cast<int>(series.size()));
      series.push_back({detector_name(kind), kind, -1});
    }
    kp.gate = kp.series.back();
    if (kind == DetectorKind::GmlExhaustive && dims.total_bits > plan.gml_cap)
      throw std::invalid_argument("run_trials: exhaustive detector above cap");
    kinds.push_back(std::move(kp));
  }
  const int n_series = static_cast<int>(series.size());

  const bool short_mode = plan.config.mode == SequenceMode::Short;
  const int n_samples = short_mode ? std::max(1, plan.sample_count) : 1;
  const Schedule slas = slas_schedule(plan.schedule);

  McSummary summary;
  summary.dims = dims;
  summary.samples = n_samples;

  for (int sample = 0; sample < n_samples; ++sample) {
    const auto t_sample = std::chrono::steady_clock::now();

    std::optional<ChannelInstance> shared_inst;
    Prepared shared_prep;
    bool need_decorr = false, need_mmse = false, need_mmse_inv = false;
    for (const KindPlan& kp : kinds) {
      need_decorr |= kp.kind == DetectorKind::Decorrelator;
      need_mmse |= kp.kind == DetectorKind::Mmse;
      need_mmse_inv |= kp.kind == DetectorKind::MmseDf;
    }
    if (short_mode) {
      RngStream spread(plan.config.seed, sample, 0, StreamPurpose::Spreading);
      shared_inst = make_instance(plan.config, spread);
      if (need_decorr)
        shared_prep.decorr = LinearDetector::decorrelator(shared_inst->R);
      if (need_mmse || need_mmse_inv) {
        shared_prep.mmse = LinearDetector::mmse(shared_inst->R, shared_inst->A,
                                                shared_inst->sigma);
        shared_prep.mmse_inverse = &shared_prep.mmse->matrix();
      }
    }

    std::vector<TrialCell> totals(n_series);
    std::vector<bool> active(kinds.size(), true);
    std::vector<bool> flagged(kinds.size(), false);
    std::vector<long long> kind_bits(kinds.size(), 0);
    long long next_trial = 0;

    auto any_active = [&]() {
      return std::any_of(active.begin(), active.end(), [](bool a) { return a; });
    };

    std::vector<TrialCell> slots;
    while (any_active()) {
      const long long batch = kBatchTrials;
      slots.assign(static_cast<std::size_t>(batch) * n_series, TrialCell{});

      parallel_for(batch, plan.workers, [&](long long bi, int) {
        const long long t = next_trial + bi;
        ChannelInstance local_inst;
        const ChannelInstance* inst = nullptr;
        Prepared local_prep;
        const Prepared* prep = &shared_prep;
        if (short_mode) {
          inst = &*shared_inst;
        } else {
          RngStream spread(plan.config.seed, sample, t,
                           StreamPurpose::Spreading);
          local_inst = make_instance(plan.config, spread);
          inst = &local_inst;
          if (need_decorr)
            local_prep.decorr = LinearDetector::decorrelator(inst->R);
          if (need_mmse || need_mmse_inv) {
            local_prep.mmse =
                LinearDetector::mmse(inst->R, inst->A, inst->sigma);
            local_prep.mmse_inverse = &local_prep.mmse->matrix();
          }
          prep = &local_prep;
        }
        RngStream bit_rng(plan.config.seed, sample, t, StreamPurpose::Bits);
        RngStream noise_rng(plan.config.seed, sample, t, StreamPurpose::Noise);
        const Eigen::VectorXd b = random_bits(bit_rng, dims.total_bits);
        const TransmitRecord rec = transmit(*inst, b, noise_rng);

        TrialCell* cells = slots.data() + bi * n_series;
        for (std::size_t kd = 0; kd < kinds.size(); ++kd) {
          if (!active[kd]) continue;
          const KindPlan& kp = kinds[kd];
          switch (kp.kind) {
            case DetectorKind::MatchedFilter:
              cells[kp.series[0]].errors = count_errors(mf_detect(rec.y), b);
              break;
            case DetectorKind::Decorrelator:
              cells[kp.series[0]].errors =
                  count_errors(prep->decorr->detect(rec.y), b);
              break;
            case DetectorKind::Mmse:
              cells[kp.series[0]].errors =
                  count_errors(prep->mmse->detect(rec.y), b);
              break;
            case DetectorKind::MmseDf:
              cells[kp.series[0]].errors = count_errors(
                  mmse_df_detect(rec.y, inst->R, inst->A, inst->sigma,
                                 prep->mmse_inverse),
                  b);
              break;
            case DetectorKind::Sic:
              cells[kp.series[0]].errors =
                  count_errors(sic_detect(rec.y, inst->R, inst->A), b);
              break;
            case DetectorKind::GmlExhaustive:
              cells[kp.series[0]].errors = count_errors(
                  gml_exhaustive(rec.y, inst->A, inst->H, plan.gml_cap), b);
              break;
            case DetectorKind::Wslas: {
              RngStream init_rng(plan.config.seed, sample, t,
                                 StreamPurpose::Initial);
              const DetectionResult det =
                  run_las(rec.y, *inst, plan.schedule, nullptr, &init_rng);
              for (std::size_t st = 0; st < det.stages.size(); ++st) {
                TrialCell& cell = cells[kp.series[st]];
                cell.errors = count_errors(det.stages[st].b_after, b);
                cell.flips = det.stages[st].flips;
                cell.additions = det.stages[st].additions;
              }
              TrialCell& whole = cells[kp.series.back()];
              whole.errors = count_errors(det.b, b);
              whole.flips = det.flips;
              whole.additions = det.additions;
              break;
            }
            case DetectorKind::Slas: {
              RngStream init_rng(plan.config.seed, sample, t,
                                 StreamPurpose::Initial);
              const DetectionResult det =
                  run_las(rec.y, *inst, slas, nullptr, &init_rng);
              TrialCell& cell = cells[kp.series[0]];
              cell.errors = count_errors(det.b, b);
              cell.flips = det.flips;
              cell.additions = det.additions;
              break;
            }
          }
        }
      });

      // Deterministic merge in trial order.
      for (long long bi = 0; bi < batch; ++bi) {
        const TrialCell* cells = slots.data() + bi * n_series;
        for (std::size_t kd = 0; kd < kinds.size(); ++kd) {
          if (!active[kd]) continue;
          for (const int si : kinds[kd].series) {
            totals[si].errors += cells[si].errors;
            totals[si].flips += cells[si].flips;
            totals[si].additions += cells[si].additions;
          }
          kind_bits[kd] += dims.total_bits;
        }
      }
      next_trial += batch;

      for (std::size_t kd = 0; kd < kinds.size(); ++kd) {
        if (!active[kd]) continue;
        if (totals[kinds[kd].gate].errors >= plan.stop.min_errors) {
          active[kd] = false;
        } else if (kind_bits[kd] >= plan.stop.max_bits) {
          active[kd] = false;
          flagged[kd] = true;
        }
      }
    }

    for (std::size_t kd = 0; kd < kinds.size(); ++kd) {
      for (const int si : kinds[kd].series) {
        SeriesStats st;
        st.detector = series[si].label;
        st.sample = sample + 1;
        st.bits = kind_bits[kd];
        st.errors = totals[si].errors;
        st.flips = totals[si].flips;
        st.additions = totals[si].additions;
        st.ber = st.bits > 0 ? static_cast<double>(st.errors) / st.bits : 0.0;
        std::tie(st.ci_lo, st.ci_hi) = wilson_interval(st.errors, st.bits);
        st.bfr = st.bits > 0 ? static_cast<double>(st.flips) / st.bits : 0.0;
        st.additions_per_bit =
            st.bits > 0 ? static_cast<double>(st.additions) / st.bits : 0.0;
        st.flagged = flagged[kd];
        summary.flagged |= st.flagged;
        summary.series.push_back(std::move(st));
      }
    }
    summary.sample_wall_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      t_sample)
            .count());
  }

  // Across-sample averages: arithmetic mean of the sample BERs with a
  // normal-combination interval (samples may have tested different bit
  // counts, so the pooled proportion is not the reported estimator).
  if (n_samples > 1) {
    std::vector<SeriesStats> avgs;
    for (const SeriesStats& st : summary.series) {
      if (st.sample != 1) continue;
      SeriesStats avg;
      avg.detector = st.detector;
      avg.sample = 0;
      double ber_sum = 0.0;
      double var_sum = 0.0;
      int n = 0;
      for (const SeriesStats& s : summary.series) {
        if (s.detector != st.detector || s.sample == 0) continue;
        avg.bits += s.bits;
        avg.errors += s.errors;
        avg.flips += s.flips;
        avg.additions += s.additions;
        avg.flagged |= s.flagged;
        ber_sum += s.ber;
        if (s.bits > 0) var_sum += s.ber * (1.0 - s.ber) / s.bits;
        ++n;
      }
      avg.ber = n > 0 ? ber_sum / n : 0.0;
      const double half = 1.959963984540054 * std::sqrt(var_sum) / std::max(1, n);
      avg.ci_lo = std::max(0.0, avg.ber - half);
      avg.ci_hi = std::min(1.0, avg.ber + half);
      avg.bfr = avg.bits > 0 ? static_cast<double>(avg.flips) / avg.bits : 0.0;
      avg.additions_per_bit =
          avg.bits > 0 ? static_cast<double>(avg.additions) / avg.bits : 0.0;
      avgs.push_back(std::move(avg));
    }
    summary.series.insert(summary.series.end(), avgs.begin(), avgs.end());
  }

  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return summary;
}

// ---------------------------------------------------------------------------

namespace {

void append_summary_rows(std::vector<ResultRow>& rows, const McSummary& sm,
                         const std::string& experiment, double alpha,
                         double snr_db, long long bk, int users, int extend,
                         std::uint64_t seed) {
  for (const SeriesStats& st : sm.series) {
    ResultRow r;
    r.experiment = experiment;
    r.alpha = alpha;
    r.snr_db = snr_db;
    r.bk = bk;
    r.extend = extend;
    r.users = users;
    r.detector = st.detector;
    r.sample = st.sample == 0 ? "avg" : std::to_string(st.sample);
    r.ber = st.ber;
    r.ber_ci95_lo = st.ci_lo;
    r.ber_ci95_hi = st.ci_hi;
    r.bfr = st.bfr;
    r.additions_per_bit = st.additions_per_bit;
    r.bits = st.bits;
    r.errors = st.errors;
    r.seed = seed;
    rows.push_back(std::move(r));
  }
}

void append_limit_rows(std::vector<ResultRow>& rows,
                       const std::string& experiment, double alpha,
                       double snr_db, long long bk, int users, int extend,
                       std::uint64_t seed, bool with_tanaka) {
  std::vector<LimitPoint> pts;
  LimitPoint su;
  su.alpha = alpha;
  su.snr_db = snr_db;
  su.detector = LimitDetector::SingleUser;
  su.ber = single_user_ber(snr_db);
  pts.push_back(su);
  pts.push_back(mf_limit_ber(alpha, snr_db));
  pts.push_back(decorr_limit_ber(alpha, snr_db));
  pts.push_back(mmse_limit_ber(alpha, snr_db));
  if (with_tanaka) pts.push_back(tanaka_gml_limit_ber(alpha, snr_db));
  for (const LimitPoint& p : pts) {
    ResultRow r;
    r.experiment = experiment;
    r.alpha = alpha;
    r.snr_db = snr_db;
    r.bk = bk;
    r.extend = extend;
    r.users = users;
    r.detector = "limit:" + limit_detector_name(p.detector);
    r.sample = "";
    if (p.defined) r.ber = p.ber;
    r.seed = seed;
    rows.push_back(std::move(r));
  }
}

SystemConfig grid_config(int users, int spreading, int extend, double snr_db,
                         std::uint64_t seed, SequenceMode mode) {
  SystemConfig cfg;
  cfg.users = users;
  cfg.spreading = spreading;
  cfg.extend = extend;
  cfg.snr_db = snr_db;
  cfg.mode = mode;
  cfg.seed = seed;
  return cfg;
}

int bk_to_extend(long long bk, int users) {
  if (bk <= 0 || users <= 0 || bk % users != 0) {
    throw std::invalid_argument("BK must be a positive multiple of K");
  }
  return static_cast<int>(bk / users);
}

int spreading_for(double alpha, int users) {
  const int n = static_cast<int>(std::lround(users / alpha));
  if (n < 1) throw std::invalid_argument("load too high for this user count");
  return n;
}

}  // namespace

FigResult fig1_driver(const Fig1Options& opt) {
  FigResult result;
  const int n = spreading_for(opt.alpha, opt.users);
  for (const long long bk : opt.bk_ladder) {
    const int extend = bk_to_extend(bk, opt.users);
    const SequenceMode mode =
        bk <= 128 ? SequenceMode::Long : SequenceMode::Short;
    TrialPlan plan;
    plan.config = grid_config(opt.users, n, extend, opt.snr_db, opt.seed, mode);
    plan.detectors = opt.detectors;
    plan.schedule = Schedule::wslas(opt.initial, opt.group_rule);
    plan.stop = opt.stop;
    plan.sample_count = opt.sample_count;
    plan.workers = opt.workers;

    FigPoint point;
    point.alpha = static_cast<double>(opt.users) / n;
    point.snr_db = opt.snr_db;
    point.bk = bk;
    point.users = opt.users;
    point.extend = extend;
    point.spreading = n;
    point.summary = run_trials(plan);
    result.flagged |= point.summary.flagged;
    append_summary_rows(result.rows, point.summary, "fig1", point.alpha,
                        opt.snr_db, bk, opt.users, extend, opt.seed);
    append_limit_rows(result.rows, "fig1", point.alpha, opt.snr_db, bk,
                      opt.users, extend, opt.seed, opt.with_tanaka);
    result.points.push_back(std::move(point));
  }
  return result;
}

FigResult fig2_driver(const Fig2Options& opt) {
  FigResult result;
  const int n = spreading_for(opt.alpha, opt.users);
  const int extend = bk_to_extend(opt.bk, opt.users);
  const SequenceMode mode =
      opt.bk <= 128 ? SequenceMode::Long : SequenceMode::Short;
  for (const double snr : opt.snr_ladder) {
    TrialPlan plan;
    plan.config = grid_config(opt.users, n, extend, snr, opt.seed, mode);
    plan.detectors = opt.detectors;
    plan.schedule = Schedule::wslas(opt.initial, opt.group_rule);
    plan.stop = opt.stop;
    plan.sample_count = opt.sample_count;
    plan.workers = opt.workers;

    FigPoint point;
    point.alpha = static_cast<double>(opt.users) / n;
    point.snr_db = snr;
    point.bk = opt.bk;
    point.users = opt.users;
    point.extend = extend;
    point.spreading = n;
    point.summary = run_trials(plan);
    result.flagged |= point.summary.flagged;
    append_summary_rows(result.rows, point.summary, "fig2", point.alpha, snr,
                        opt.bk, opt.users, extend, opt.seed);
    append_limit_rows(result.rows, "fig2", point.alpha, snr, opt.bk, opt.users,
                      extend, opt.seed, opt.with_tanaka);
    result.points.push_back(std::move(point));
  }
  return result;
}

long long fig3_schedule_bk(double alpha) {
  // 1136, 1600, 1960, 2264, 2536, 2784, 3000 for alpha = 0.1 .. 0.7,
  // 3328 from 0.8 on.
  static const long long table[] = {1136, 1600, 1960, 2264, 2536, 2784, 3000};
  if (alpha >= 0.75) return 3328;
  const int bucket = std::clamp(static_cast<int>(std::lround(alpha * 10.0)), 1, 7);
  return table[bucket - 1];
}

FigResult fig3_driver(const Fig3Options& opt) {
  FigResult result;
  if (opt.bk_cap < opt.users)
    throw std::invalid_argument("fig3: bk_cap below one bit per user");
  const double scale =
      std::min(1.0, static_cast<double>(opt.bk_cap) / 3328.0);
  for (const double alpha : opt.alpha_ladder) {
    const int n = spreading_for(alpha, opt.users);
    const double target_bk = fig3_schedule_bk(alpha) * scale;
    const int extend =
        std::max(1, static_cast<int>(std::lround(target_bk / opt.users)));
    const long long bk = static_cast<long long>(extend) * opt.users;
    const SequenceMode mode =
        bk <= 128 ? SequenceMode::Long : SequenceMode::Short;
    TrialPlan plan;
    plan.config = grid_config(opt.users, n, extend, opt.snr_db, opt.seed, mode);
    plan.detectors = opt.detectors;
    plan.schedule = Schedule::wslas(opt.initial, opt.group_rule);
    plan.stop = opt.stop;
    plan.sample_count = opt.sample_count;
    plan.workers = opt.workers;

    FigPoint point;
    point.alpha = static_cast<double>(opt.users) / n;
    point.snr_db = opt.snr_db;
    point.bk = bk;
    point.users = opt.users;
    point.extend = extend;
    point.spreading = n;
    point.summary = run_trials(plan);
    result.flagged |= point.summary.flagged;
    append_summary_rows(result.rows, point.summary, "fig3", point.alpha,
                        opt.snr_db, bk, opt.users, extend, opt.seed);
    append_limit_rows(result.rows, "fig3", point.alpha, opt.snr_db, bk,
                      opt.users, extend, opt.seed, opt.with_tanaka);
    result.points.push_back(std::move(point));
  }
  return result;
}

}  // namespace qlrs

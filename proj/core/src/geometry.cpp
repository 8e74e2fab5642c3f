// qlrs: QLRS-CDMA simulation and likelihood ascent search detection
// SPDX-License-Identifier: Apache-2.0
#include "qlrs/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qlrs/channel.hpp"
#include "qlrs/las.hpp"
#include "qlrs/parallel.hpp"
#include "qlrs/refdet.hpp"
#include "qlrs/rng.hpp"

namespace qlrs {

double alpha_star() { return 0.5 - 1.0 / (4.0 * std::log(2.0)); }

bool ErrorVector::touches(int user) const {
  return std::binary_search(support.begin(), support.end(), user);
}

Eigen::VectorXd ErrorVector::dense(int dim) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
  for (std::size_t i = 0; i < support.size(); ++i) {
    out[support[i]] = signs[i];
  }
  return out;
}

ErrorVector ErrorVector::from_dense(const Eigen::VectorXd& e) {
  ErrorVector out;
  for (int i = 0; i < e.size(); ++i) {
    if (e[i] == 0.0) continue;
    if (e[i] != 1.0 && e[i] != -1.0)
      throw std::invalid_argument("ErrorVector: entries must be in {-1,0,+1}");
    out.support.push_back(i);
    out.signs.push_back(e[i] > 0 ? 1 : -1);
  }
  return out;
}

namespace {

double quad_form(const ErrorVector& e, const Eigen::MatrixXd& H) {
  double acc = 0.0;
  for (std::size_t a = 0; a < e.support.size(); ++a) {
    const int i = e.support[a];
    const double si = e.signs[a];
    acc += H(i, i);
    for (std::size_t c = 0; c < a; ++c) {
      acc += 2.0 * si * e.signs[c] * H(i, e.support[c]);
    }
  }
  return acc;
}

double amp_sq(const ErrorVector& e, const Eigen::VectorXd& A) {
  double acc = 0.0;
  for (const int i : e.support) acc += A[i] * A[i];
  return acc;
}

void require_weight(const ErrorVector& e) {
  if (e.weight() < 1)
    throw std::invalid_argument("error vector must have weight >= 1");
}

}  // namespace

double d_gml(const ErrorVector& e, const Eigen::MatrixXd& H) {
  require_weight(e);
  const double g = quad_form(e, H);
  return g > 0.0 ? std::sqrt(g) : 0.0;
}

double d_lml(const ErrorVector& e, const Eigen::MatrixXd& H,
             const Eigen::VectorXd& A) {
  require_weight(e);
  if (e.weight() == 1) {
    // Weight-1 vectors reduce to the GML distance identically; routing
    // through the quotient would only add round-off.
    return d_gml(e, H);
  }
  const double g = quad_form(e, H);
  if (g <= 0.0) return -std::numeric_limits<double>::infinity();
  return (2.0 * g - amp_sq(e, A)) / std::sqrt(g);
}

double d_gml_sq_from_s(const ErrorVector& e, const Eigen::MatrixXd& S,
                       const Eigen::VectorXd& A) {
  require_weight(e);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(S.rows());
  for (std::size_t a = 0; a < e.support.size(); ++a) {
    const int i = e.support[a];
    v.noalias() += (A[i] * static_cast<double>(e.signs[a])) * S.col(i);
  }
  return v.squaredNorm();
}

bool is_indecomposable(const ErrorVector& e, const Eigen::MatrixXd& H,
                       int cap) {
  require_weight(e);
  const int w = e.weight();
  if (w > cap)
    throw std::invalid_argument("is_indecomposable: weight above cap");
  if (w == 1) return true;
  // Element 0 stays in the first part; the mask selects the second part.
  const unsigned n = 1u << (w - 1);
  for (unsigned mask = 1; mask < n; ++mask) {
    double cross = 0.0;
    for (int a = 0; a < w; ++a) {
      const bool a_in_second = a > 0 && ((mask >> (a - 1)) & 1u);
      if (a_in_second) continue;
      for (int c = 1; c < w; ++c) {
        if (((mask >> (c - 1)) & 1u) == 0) continue;
        cross += static_cast<double>(e.signs[a]) * e.signs[c] *
                 H(e.support[a], e.support[c]);
      }
    }
    if (cross >= 0.0) return false;
  }
  return true;
}

AmeReport ame_report(const Eigen::MatrixXd& H, const Eigen::VectorXd& A,
                     int user, int max_weight) {
  const int k = static_cast<int>(H.rows());
  if (user < 0 || user >= k) throw std::invalid_argument("ame_report: bad user");
  if (max_weight < 1 || max_weight > k)
    throw std::invalid_argument("ame_report: bad max_weight");
  if (max_weight > 16)
    throw std::invalid_argument("ame_report: max_weight above bipartition cap");
  // Enumeration budget: sum_w C(k-1, w-1) 2^(w-1).
  double budget = 0.0;
  for (int w = 1; w <= max_weight; ++w) {
    double comb = 1.0;
    for (int i = 0; i < w - 1; ++i) comb = comb * (k - 1 - i) / (i + 1);
    budget += comb * std::pow(2.0, w - 1);
  }
  if (budget > static_cast<double>(1 << 26))
    throw std::invalid_argument("ame_report: enumeration budget exceeded");

  AmeReport report;
  report.user = user;
  const double ak_sq = A[user] * A[user];
  double best_gml = std::numeric_limits<double>::infinity();
  double best_lml = std::numeric_limits<double>::infinity();

  std::vector<int> others;
  for (int i = 0; i < k; ++i) {
    if (i != user) others.push_back(i);
  }

  ErrorVector e;
  for (int w = 1; w <= max_weight; ++w) {
    // Choose w-1 companions of `user`, then every sign pattern on them with
    // the user's sign fixed to +1.
    std::vector<int> idx(w - 1);
    for (int i = 0; i < w - 1; ++i) idx[i] = i;
    const int m = static_cast<int>(others.size());
    if (w - 1 > m) break;
    for (;;) {
      const unsigned sign_count = 1u << (w - 1);
      for (unsigned smask = 0; smask < sign_count; ++smask) {
        e.support.clear();
        e.signs.clear();
        for (int i = 0; i < w - 1; ++i) e.support.push_back(others[idx[i]]);
        e.support.push_back(user);
        std::sort(e.support.begin(), e.support.end());
        e.signs.assign(w, 1);
        int bit = 0;
        for (int i = 0; i < w; ++i) {
          if (e.support[i] == user) continue;
          if ((smask >> bit) & 1u) e.signs[i] = -1;
          ++bit;
        }
        ++report.enumerated;

        const double g = quad_form(e, H);
        const double gml_ratio = std::max(0.0, g) / ak_sq;
        if (gml_ratio < best_gml) {
          best_gml = gml_ratio;
          report.gml_argmin = e;
        }
        if (is_indecomposable(e, H)) {
          if (g <= 0.0) {
            ++report.degenerate_skipped;
          } else {
            const double dl = (w == 1) ? std::sqrt(g)
                                       : (2.0 * g - amp_sq(e, A)) / std::sqrt(g);
            const double plus = std::max(0.0, dl);
            const double ratio = (plus / A[user]) * (plus / A[user]);
            if (ratio < best_lml) {
              best_lml = ratio;
              report.lml_argmin = e;
            }
          }
        }
      }
      // next combination
      int i = w - 2;
      while (i >= 0 && idx[i] == m - (w - 1) + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < w - 1; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  report.gml_ame = std::min(1.0, best_gml);
  report.lml_ame_lb = std::min(1.0, best_lml);
  return report;
}

namespace {

// Draws `w` fresh unit-norm +-1/sqrt(N) columns (or orthonormal ones for the
// Orthogonal source) and returns them as an N x w matrix.
Eigen::MatrixXd draw_columns(RngStream& rng, int n, int w, ColumnSource source) {
  if (source == ColumnSource::Orthogonal) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, w);
    for (int j = 0; j < w && j < n; ++j) s(j, j) = 1.0;
    return s;
  }
  return gen_spreading(rng, n, w);
}

double dist_sq(const Eigen::MatrixXd& cols, std::span<const double> signs) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(cols.rows());
  for (int j = 0; j < cols.cols(); ++j) v.noalias() += signs[j] * cols.col(j);
  return v.squaredNorm();
}

}  // namespace

std::vector<Thm1Row> thm1_experiment(double alpha, std::span<const int> K_list,
                                     int M1, int M2, long long trials,
                                     std::uint64_t seed, int workers,
                                     ColumnSource source) {
  if (M1 < 1 || M2 <= M1)
    throw std::invalid_argument("thm1_experiment: need 1 <= M1 < M2");
  if (alpha <= 0.0) throw std::invalid_argument("thm1_experiment: alpha <= 0");
  if (trials < 1) throw std::invalid_argument("thm1_experiment: trials < 1");

  std::vector<Thm1Row> rows;
  for (std::size_t ki = 0; ki < K_list.size(); ++ki) {
    const int k = K_list[ki];
    const int n = std::max(1, static_cast<int>(std::lround(k / alpha)));
    if (M2 > k) throw std::invalid_argument("thm1_experiment: M2 > K");
    std::vector<std::uint8_t> violated(trials, 0);
    parallel_for(trials, workers, [&](long long t, int) {
      RngStream rng(seed, static_cast<std::uint32_t>(ki), t,
                    StreamPurpose::Experiment);
      const int w1 = 1 + static_cast<int>(rng.below(M1));
      const int w2 = M1 + 1 + static_cast<int>(rng.below(M2 - M1));
      Eigen::MatrixXd cols = draw_columns(rng, n, w2, source);
      std::vector<double> s2(w2), s1(w1);
      for (double& s : s2) s = rng.sign();
      // The inner support is a random w1-subset of the outer one, with its
      // own independent signs.
      std::vector<int> pick(w2);
      for (int i = 0; i < w2; ++i) pick[i] = i;
      for (int i = 0; i < w1; ++i) {
        const int j = i + static_cast<int>(rng.below(w2 - i));
        std::swap(pick[i], pick[j]);
      }
      Eigen::MatrixXd inner(n, w1);
      for (int i = 0; i < w1; ++i) inner.col(i) = cols.col(pick[i]);
      for (double& s : s1) s = rng.sign();
      const double d2_outer = dist_sq(cols, s2);
      const double d2_inner = dist_sq(inner, s1);
      violated[t] = d2_inner >= d2_outer ? 1 : 0;
    });
    Thm1Row row;
    row.users = k;
    row.spreading = n;
    row.trials = trials;
    for (auto v : violated) row.violations += v;
    row.freq = static_cast<double>(row.violations) / trials;
    row.se = std::sqrt(std::max(row.freq * (1.0 - row.freq), 0.0) / trials);
    rows.push_back(row);
  }
  return rows;
}

Thm2Result thm2_experiment(double alpha, std::span<const int> K_list, int M,
                           long long trials, std::uint64_t seed, int workers,
                           ColumnSource source) {
  if (M < 1) throw std::invalid_argument("thm2_experiment: M < 1");
  if (alpha <= 0.0) throw std::invalid_argument("thm2_experiment: alpha <= 0");
  if (trials < 1) throw std::invalid_argument("thm2_experiment: trials < 1");

  Thm2Result result;
  result.alpha_star_value = alpha_star();
  const bool run_tail = alpha < alpha_star();

  for (std::size_t ki = 0; ki < K_list.size(); ++ki) {
    const int k = K_list[ki];
    const int n = std::max(1, static_cast<int>(std::lround(k / alpha)));

    // Part (i): ratio errors per weight.
    for (int w = 1; w <= std::min(M, k); ++w) {
      std::vector<double> err(trials, 0.0);
      std::vector<std::uint8_t> ok(trials, 0);
      parallel_for(trials, workers, [&](long long t, int) {
        RngStream rng(seed + 1, static_cast<std::uint32_t>(ki * 64 + w), t,
                      StreamPurpose::Experiment);
        Eigen::MatrixXd cols = draw_columns(rng, n, w, source);
        std::vector<double> signs(w);
        for (double& s : signs) s = rng.sign();
        const double g = dist_sq(cols, signs);
        if (g <= 0.0) return;  // degenerate draw, skipped
        const double dg = std::sqrt(g);
        const double dl = (w == 1) ? dg : (2.0 * g - w) / dg;
        err[t] = std::abs(dl / dg - 1.0);
        ok[t] = 1;
      });
      Thm2Row row;
      row.users = k;
      row.spreading = n;
      row.weight = w;
      double sum = 0.0, sum_sq = 0.0;
      for (long long t = 0; t < trials; ++t) {
        if (!ok[t]) continue;
        ++row.n;
        sum += err[t];
        sum_sq += err[t] * err[t];
        row.max_ratio_err = std::max(row.max_ratio_err, err[t]);
      }
      if (row.n > 0) {
        row.mean_ratio_err = sum / row.n;
        const double var =
            std::max(0.0, sum_sq / row.n - row.mean_ratio_err * row.mean_ratio_err);
        row.se = std::sqrt(var / row.n);
      }
      result.rows.push_back(row);
    }

    // Part (ii): minimum d_lml over sampled indecomposable high-weight
    // vectors, meaningful below the threshold load.
    if (run_tail) {
      const int w_lo = std::max(2, M);
      const int w_hi = std::min({2 * w_lo, 16, k});
      std::vector<double> dmin(trials,
                               std::numeric_limits<double>::infinity());
      std::vector<std::uint8_t> indec(trials, 0);
      parallel_for(trials, workers, [&](long long t, int) {
        RngStream rng(seed + 2, static_cast<std::uint32_t>(ki), t,
                      StreamPurpose::Experiment);
        const int w = w_lo + static_cast<int>(rng.below(w_hi - w_lo + 1));
        Eigen::MatrixXd cols = draw_columns(rng, n, w, source);
        Eigen::VectorXd a = Eigen::VectorXd::Ones(w);
        Eigen::MatrixXd h = cols.transpose() * cols;
        h.diagonal().setOnes();
        ErrorVector e;
        e.support.resize(w);
        e.signs.resize(w);
        for (int i = 0; i < w; ++i) {
          e.support[i] = i;
          e.signs[i] = rng.sign() > 0 ? 1 : -1;
        }
        if (!is_indecomposable(e, h)) return;
        const double d = d_lml(e, h, a);
        if (!std::isfinite(d)) return;  // degenerate draw
        indec[t] = 1;
        dmin[t] = d;
      });
      Thm2TailRow row;
      row.users = k;
      row.spreading = n;
      row.sampled = trials;
      double best = std::numeric_limits<double>::infinity();
      for (long long t = 0; t < trials; ++t) {
        if (!indec[t]) continue;
        ++row.indecomposable;
        best = std::min(best, dmin[t]);
      }
      row.min_dlml = row.indecomposable > 0 ? best : 0.0;
      result.tail.push_back(row);
    }
  }
  return result;
}

std::vector<Thm4Row> thm4_experiment(double alpha, double c,
                                     std::span<const int> K_list,
                                     long long trials, std::uint64_t seed,
                                     int workers, int gml_cap) {
  if (!(alpha > 0.0) || alpha >= alpha_star())
    throw std::invalid_argument("thm4_experiment: requires 0 < alpha < alpha*");
  if (!(c > 0.0)) throw std::invalid_argument("thm4_experiment: c must be > 0");
  if (trials < 1) throw std::invalid_argument("thm4_experiment: trials < 1");

  std::vector<Thm4Row> rows;
  for (std::size_t ki = 0; ki < K_list.size(); ++ki) {
    const int k = K_list[ki];
    if (k > gml_cap)
      throw std::invalid_argument("thm4_experiment: K above exhaustive cap");
    const int n = std::max(1, static_cast<int>(std::lround(k / alpha)));
    const double sigma = c / std::sqrt(static_cast<double>(n));

    std::vector<std::uint8_t> unique_hit(trials, 0);
    std::vector<std::uint8_t> wslas_hit(trials, 0);
    parallel_for(trials, workers, [&](long long t, int) {
      RngStream spread(seed, static_cast<std::uint32_t>(ki), t,
                       StreamPurpose::Spreading);
      RngStream bits(seed, static_cast<std::uint32_t>(ki), t,
                     StreamPurpose::Bits);
      RngStream noise(seed, static_cast<std::uint32_t>(ki), t,
                      StreamPurpose::Noise);
      ChannelInstance inst = make_instance_from_s(
          gen_spreading(spread, n, k), Eigen::VectorXd::Ones(k), sigma);
      const Eigen::VectorXd b = random_bits(bits, k);
      const TransmitRecord rec = transmit(inst, b, noise);
      const MlStructure ml = ml_structure(rec.y, inst.A, inst.H, gml_cap);
      const DetectionResult las = run_las(rec.y, inst, Schedule::wslas());
      unique_hit[t] =
          (ml.lml_points.size() == 1 && ml.lml_points[0] == ml.gml) ? 1 : 0;
      wslas_hit[t] = (las.b == ml.gml) ? 1 : 0;
    });

    Thm4Row row;
    row.users = k;
    row.spreading = n;
    row.sigma = sigma;
    row.trials = trials;
    long long nu = 0, nw = 0;
    for (long long t = 0; t < trials; ++t) {
      nu += unique_hit[t];
      nw += wslas_hit[t];
    }
    row.freq_lml_unique_gml = static_cast<double>(nu) / trials;
    row.freq_wslas_eq_gml = static_cast<double>(nw) / trials;
    row.se = std::sqrt(std::max(row.freq_wslas_eq_gml *
                                    (1.0 - row.freq_wslas_eq_gml),
                                0.0) /
                       trials);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace qlrs

// qlrs: QLRS-CDMA simulation and likelihood ascent search detection
// SPDX-License-Identifier: Apache-2.0
#include "qlrs/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qlrs {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;

double snr_sigma_sq(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

double clamp_ber(double p) { return std::clamp(p, 0.0, 0.5); }

}  // namespace

std::string limit_detector_name(LimitDetector d) {
  switch (d) {
    case LimitDetector::SingleUser: return "single_user";
    case LimitDetector::Mf: return "mf";
    case LimitDetector::Decorrelator: return "decorrelator";
    case LimitDetector::Mmse: return "mmse";
    case LimitDetector::TanakaGml: return "gml_tanaka";
  }
  return "unknown";
}

double q_function(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("q_function: x not finite");
  return 0.5 * std::erfc(x / kSqrt2);
}

double single_user_ber(double snr_db) {
  return q_function(std::pow(10.0, snr_db / 20.0));
}

LimitPoint mf_limit_ber(double alpha, double snr_db) {
  if (alpha < 0.0) throw std::invalid_argument("mf_limit_ber: alpha < 0");
  LimitPoint p;
  p.alpha = alpha;
  p.snr_db = snr_db;
  p.detector = LimitDetector::Mf;
  if (alpha == 0.0) {
    p.sir = 1.0 / snr_sigma_sq(snr_db);
    p.ber = single_user_ber(snr_db);
  } else {
    p.sir = 1.0 / (snr_sigma_sq(snr_db) + alpha);
    p.ber = clamp_ber(q_function(std::sqrt(p.sir)));
  }
  p.all_bers = {p.ber};
  p.all_sirs = {p.sir};
  return p;
}

LimitPoint decorr_limit_ber(double alpha, double snr_db) {
  if (alpha < 0.0) throw std::invalid_argument("decorr_limit_ber: alpha < 0");
  LimitPoint p;
  p.alpha = alpha;
  p.snr_db = snr_db;
  p.detector = LimitDetector::Decorrelator;
  if (alpha == 0.0) {
    p.sir = 1.0 / snr_sigma_sq(snr_db);
    p.ber = single_user_ber(snr_db);
  } else if (alpha >= 1.0) {
    p.defined = false;
    p.ber = 0.5;
    p.sir = 0.0;
  } else {
    p.sir = (1.0 - alpha) / snr_sigma_sq(snr_db);
    p.ber = clamp_ber(q_function(std::sqrt(p.sir)));
  }
  p.all_bers = {p.ber};
  p.all_sirs = {p.sir};
  return p;
}

double mmse_fixed_point_residual(double alpha, double snr_db, double beta) {
  const double s2 = snr_sigma_sq(snr_db);
  return beta - 1.0 / (s2 + alpha / (1.0 + beta));
}

LimitPoint mmse_limit_ber(double alpha, double snr_db) {
  if (alpha < 0.0) throw std::invalid_argument("mmse_limit_ber: alpha < 0");
  LimitPoint p;
  p.alpha = alpha;
  p.snr_db = snr_db;
  p.detector = LimitDetector::Mmse;
  const double s2 = snr_sigma_sq(snr_db);
  if (alpha == 0.0) {
    p.sir = 1.0 / s2;
    p.ber = single_user_ber(snr_db);
    p.all_bers = {p.ber};
    p.all_sirs = {p.sir};
    return p;
  }
  // f(beta) = beta - 1/(s2 + alpha/(1+beta)) is increasing and changes sign
  // exactly once on (0, 1/s2].
  double lo = 0.0;
  double hi = 1.0 / s2;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mmse_fixed_point_residual(alpha, snr_db, mid) >= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
    if (std::abs(mmse_fixed_point_residual(alpha, snr_db, hi)) <= 1e-12) break;
  }
  p.sir = hi;
  p.ber = clamp_ber(q_function(std::sqrt(p.sir)));
  p.all_bers = {p.ber};
  p.all_sirs = {p.sir};
  return p;
}

namespace {

// Fixed-point residual for the replica-symmetric ML curve, in terms of the
// effective noise variance t = 1/u^2: f(t) = t - sigma^2 - 4 alpha Q(1/sqrt(t)).
double tanaka_residual_t(double t, double alpha, double s2) {
  return t - s2 - 4.0 * alpha * q_function(1.0 / std::sqrt(t));
}

double tanaka_residual_u(double u, double alpha, double s2) {
  return u - 1.0 / std::sqrt(s2 + 4.0 * alpha * q_function(u));
}

// Composite-Simpson integral of the residual between two fixed points. The
// potential differences rank the solutions; the integrand is smooth.
double potential_increment(double t0, double t1, double alpha, double s2) {
  const int n = 2000;  // even
  const double h = (t1 - t0) / n;
  double acc = tanaka_residual_t(t0, alpha, s2) + tanaka_residual_t(t1, alpha, s2);
  for (int i = 1; i < n; ++i) {
    const double w = (i % 2 == 1) ? 4.0 : 2.0;
    acc += w * tanaka_residual_t(t0 + i * h, alpha, s2);
  }
  return acc * h / 3.0;
}

}  // namespace

LimitPoint tanaka_gml_limit_ber(double alpha, double snr_db) {
  if (alpha < 0.0) throw std::invalid_argument("tanaka_gml_limit_ber: alpha < 0");
  LimitPoint p;
  p.alpha = alpha;
  p.snr_db = snr_db;
  p.detector = LimitDetector::TanakaGml;
  p.experimental = true;
  const double s2 = snr_sigma_sq(snr_db);
  if (alpha == 0.0) {
    p.sir = 1.0 / s2;
    p.ber = single_user_ber(snr_db);
    p.all_bers = {p.ber};
    p.all_sirs = {p.sir};
    return p;
  }

  // All roots live in [1/sqrt(s2 + 2 alpha), 1/sigma]; sweep u on a log grid
  // and bisect every sign change.
  const double u_lo = 0.999 / std::sqrt(s2 + 2.0 * alpha);
  const double u_hi = 1.001 / std::sqrt(s2);
  const int grid = 8000;
  std::vector<double> roots;
  double prev_u = u_lo;
  double prev_f = tanaka_residual_u(prev_u, alpha, s2);
  const double ratio = std::pow(u_hi / u_lo, 1.0 / grid);
  for (int i = 1; i <= grid; ++i) {
    const double u = u_lo * std::pow(ratio, i);
    const double f = tanaka_residual_u(u, alpha, s2);
    if (prev_f == 0.0) {
      roots.push_back(prev_u);
    } else if (prev_f * f < 0.0) {
      double a = prev_u, b = u;
      for (int it = 0; it < 200 && (b - a) > 1e-13 * b; ++it) {
        const double mid = 0.5 * (a + b);
        if (tanaka_residual_u(mid, alpha, s2) * prev_f > 0.0) {
          a = mid;
        } else {
          b = mid;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    prev_u = u;
    prev_f = f;
  }
  // Merge near-tangent duplicates.
  std::sort(roots.begin(), roots.end());
  std::vector<double> merged;
  for (double r : roots) {
    if (merged.empty() || r - merged.back() > 1e-7 * r) merged.push_back(r);
  }
  if (merged.empty()) {
    p.defined = false;  // non-convergent sweep, excluded from acceptance
    p.ber = 0.5;
    return p;
  }

  p.multiplicity = static_cast<int>(merged.size());
  // Rank solutions by the scalar potential; integrate the residual between
  // consecutive fixed points in t = 1/u^2 (ascending t = descending u).
  std::vector<double> ts;
  for (double u : merged) ts.push_back(1.0 / (u * u));
  std::sort(ts.begin(), ts.end());
  std::vector<double> pot(ts.size(), 0.0);
  for (std::size_t i = 1; i < ts.size(); ++i) {
    pot[i] = pot[i - 1] + potential_increment(ts[i - 1], ts[i], alpha, s2);
  }
  std::size_t pick = 0;
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (pot[i] < pot[pick]) pick = i;
  }
  const double u_sel = 1.0 / std::sqrt(ts[pick]);
  p.sir = u_sel * u_sel;
  p.ber = clamp_ber(q_function(u_sel));
  for (auto it = merged.rbegin(); it != merged.rend(); ++it) {
    p.all_bers.push_back(clamp_ber(q_function(*it)));
    p.all_sirs.push_back(*it * *it);
  }
  std::sort(p.all_bers.begin(), p.all_bers.end());
  std::sort(p.all_sirs.rbegin(), p.all_sirs.rend());
  return p;
}

}  // namespace qlrs

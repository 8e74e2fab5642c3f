// qlrs: QLRS-CDMA simulation and likelihood ascent search detection
// SPDX-License-Identifier: Apache-2.0
#include "qlrs/las.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace qlrs {

namespace {

constexpr int kMaxGroupSize = 20;  // 2^J pattern tables; beyond this is absurd

// Lexicographic order on index sets encoded as bitmasks: {0} < {0,1} < {1}.
bool lex_less(unsigned a, unsigned b) {
  while (a != 0 && b != 0) {
    const int ia = std::countr_zero(a);
    const int ib = std::countr_zero(b);
    if (ia != ib) return ia < ib;
    a &= a - 1;
    b &= b - 1;
  }
  return a == 0 && b != 0;
}

// Scratch for one stage: pattern tables indexed by group bitmask.
struct GroupScratch {
  std::vector<double> lin;    // sum of b_i z_i over the pattern
  std::vector<double> quad;   // sum of H_ij b_i b_j over the pattern
  std::vector<unsigned> visit_order;  // masks in lexicographic set order
  std::vector<int> flip_indices;
  double field[kMaxGroupSize];
  double coup[kMaxGroupSize][kMaxGroupSize];

  void prepare(int len) {
    const std::size_t n = std::size_t{1} << len;
    lin.resize(n);
    quad.resize(n);
    visit_order.clear();
    visit_order.reserve(n - 1);
    for (unsigned m = 1; m < n; ++m) visit_order.push_back(m);
    std::sort(visit_order.begin(), visit_order.end(), lex_less);
  }
};

// Best nonempty flip pattern within [g, g+len): returns the mask with
// maximal metric change if that change is > 0, else 0. delta_out receives
// the metric change of the returned mask.
unsigned best_pattern(const LikelihoodState& st, const Eigen::MatrixXd& H,
                      int g, int len, GroupScratch& ws, double* delta_out) {
  for (int t = 0; t < len; ++t) {
    const double bt = st.b[g + t];
    ws.field[t] = bt * st.z[g + t];
    for (int u = 0; u <= t; ++u) {
      const double v = H(g + t, g + u) * bt * st.b[g + u];
      ws.coup[t][u] = v;
      ws.coup[u][t] = v;
    }
  }
  const unsigned n = 1u << len;
  ws.lin[0] = 0.0;
  ws.quad[0] = 0.0;
  for (unsigned m = 1; m < n; ++m) {
    const int t = std::countr_zero(m);
    const unsigned rest = m & (m - 1);
    ws.lin[m] = ws.lin[rest] + ws.field[t];
    double cross = 0.0;
    for (unsigned r = rest; r != 0; r &= r - 1) {
      cross += ws.coup[t][std::countr_zero(r)];
    }
    ws.quad[m] = ws.quad[rest] + ws.coup[t][t] + 2.0 * cross;
  }
  unsigned best = 0;
  double best_delta = 0.0;
  for (const unsigned m : ws.visit_order) {
    const double delta = 4.0 * (-ws.lin[m] - ws.quad[m]);
    if (delta > best_delta) {
      best_delta = delta;
      best = m;
    }
  }
  *delta_out = best_delta;
  return best;
}

}  // namespace

LikelihoodState make_state(const Eigen::VectorXd& y, const Eigen::VectorXd& b0,
                           const Eigen::VectorXd& A, const Eigen::MatrixXd& H) {
  if (y.size() != b0.size() || y.size() != A.size() || H.rows() != y.size() ||
      H.cols() != y.size()) {
    throw std::invalid_argument("make_state: dimension mismatch");
  }
  for (int i = 0; i < b0.size(); ++i) {
    if (b0[i] != 1.0 && b0[i] != -1.0)
      throw std::invalid_argument("make_state: initial bits must be +-1");
  }
  LikelihoodState st;
  st.b = b0;
  const Eigen::VectorXd ay = A.cwiseProduct(y);
  st.z = ay;
  st.z.noalias() -= H * b0;
  st.omega = b0.dot(ay) + b0.dot(st.z);
  return st;
}

double delta_likelihood(const LikelihoodState& st,
                        std::span<const int> flip_set,
                        const Eigen::MatrixXd& H) {
  double lin = 0.0;
  double quad = 0.0;
  for (std::size_t a = 0; a < flip_set.size(); ++a) {
    const int i = flip_set[a];
    const double ei = st.b[i];
    lin += ei * st.z[i];
    quad += H(i, i);
    for (std::size_t c = 0; c < a; ++c) {
      const int j = flip_set[c];
      quad += 2.0 * ei * st.b[j] * H(i, j);
    }
  }
  return 4.0 * (-lin - quad);
}

void apply_flip(LikelihoodState& st, std::span<const int> flip_set,
                const Eigen::MatrixXd& H) {
  if (flip_set.empty()) return;
  const double delta = delta_likelihood(st, flip_set, H);
  const auto k = st.b.size();
  for (const int i : flip_set) {
    st.z.noalias() += (2.0 * st.b[i]) * H.col(i);
  }
  for (const int i : flip_set) st.b[i] = -st.b[i];
  st.omega += delta;
  st.flips += static_cast<long long>(flip_set.size());
  st.additions += static_cast<long long>(flip_set.size()) * k;
}

bool is_lml_point(const Eigen::VectorXd& b, const Eigen::VectorXd& z,
                  const Eigen::MatrixXd& H) {
  for (int k = 0; k < b.size(); ++k) {
    if (-b[k] * z[k] > H(k, k)) return false;
  }
  return true;
}

bool is_lml_point(const Eigen::VectorXd& b, const Eigen::VectorXd& y,
                  const Eigen::VectorXd& A, const Eigen::MatrixXd& H) {
  Eigen::VectorXd z = A.cwiseProduct(y);
  z.noalias() -= H * b;
  return is_lml_point(b, z, H);
}

double z_recompute_error(const LikelihoodState& st, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& A, const Eigen::MatrixXd& H) {
  Eigen::VectorXd zt = A.cwiseProduct(y);
  zt.noalias() -= H * st.b;
  const double scale = std::max(1.0, zt.lpNorm<Eigen::Infinity>());
  return (st.z - zt).lpNorm<Eigen::Infinity>() / scale;
}

void Schedule::validate() const {
  if (stages.empty())
    throw std::invalid_argument("schedule: at least one stage required");
  for (int j : stages) {
    if (j < 1) throw std::invalid_argument("schedule: group sizes must be >= 1");
    if (j > kMaxGroupSize)
      throw std::invalid_argument("schedule: group size too large");
  }
  if (stages.back() != 1)
    throw std::invalid_argument("schedule: last stage must have group size 1");
}

namespace {

// Parallel rule: the group's individually improving bits, flipped together
// when their joint change still ascends; otherwise the group is left
// untouched this visit. A later (smaller-group) stage resolves the bits the
// joint check refused.
void parallel_pattern(const LikelihoodState& st, const Eigen::MatrixXd& H,
                      int g, int len, std::vector<int>& out) {
  out.clear();
  for (int t = 0; t < len; ++t) {
    const int i = g + t;
    if (-st.b[i] * st.z[i] > H(i, i)) out.push_back(i);
  }
  if (out.size() <= 1) return;
  if (delta_likelihood(st, out, H) > 0.0) return;
  out.clear();
}

}  // namespace

long long gplas_stage(LikelihoodState& st, int group_size,
                      const Eigen::MatrixXd& H,
                      std::vector<double>* omega_trace, GroupRule rule) {
  const int k = static_cast<int>(st.b.size());
  if (group_size < 1 || group_size > kMaxGroupSize)
    throw std::invalid_argument("gplas_stage: bad group size");
  GroupScratch full;
  GroupScratch ragged;
  if (rule == GroupRule::BestSubset) {
    full.prepare(std::min(group_size, k));
    const int tail = k % group_size;
    if (tail != 0 && group_size < k) ragged.prepare(tail);
  }

  std::vector<int> flip_indices;
  long long stage_flips = 0;
  bool flipped = true;
  while (flipped) {
    flipped = false;
    for (int g = 0; g < k; g += group_size) {
      const int len = std::min(group_size, k - g);
      if (rule == GroupRule::BestSubset) {
        GroupScratch& ws = (len == std::min(group_size, k)) ? full : ragged;
        double delta = 0.0;
        const unsigned mask = best_pattern(st, H, g, len, ws, &delta);
        if (mask == 0) continue;
        flip_indices.clear();
        for (unsigned m = mask; m != 0; m &= m - 1) {
          flip_indices.push_back(g + std::countr_zero(m));
        }
      } else {
        parallel_pattern(st, H, g, len, flip_indices);
        if (flip_indices.empty()) continue;
      }
      apply_flip(st, flip_indices, H);
      stage_flips += static_cast<long long>(flip_indices.size());
      if (omega_trace != nullptr) omega_trace->push_back(st.omega);
      flipped = true;
    }
  }
  return stage_flips;
}

DetectionResult run_las(const Eigen::VectorXd& y, const Eigen::VectorXd& A,
                        const Eigen::MatrixXd& H, const Schedule& schedule,
                        const Eigen::VectorXd* given_initial, RngStream* rng,
                        std::vector<double>* omega_trace) {
  schedule.validate();
  const int k = static_cast<int>(y.size());
  Eigen::VectorXd b0(k);
  switch (schedule.initial) {
    case InitialPolicy::MatchedFilter:
      for (int i = 0; i < k; ++i) b0[i] = (y[i] >= 0.0) ? 1.0 : -1.0;
      break;
    case InitialPolicy::Random:
      if (rng == nullptr)
        throw std::invalid_argument("run_las: random initial needs an rng");
      for (int i = 0; i < k; ++i) b0[i] = rng->sign();
      break;
    case InitialPolicy::Given:
      if (given_initial == nullptr || given_initial->size() != k)
        throw std::invalid_argument("run_las: missing or mismatched initial");
      b0 = *given_initial;
      break;
  }

  LikelihoodState st = make_state(y, b0, A, H);
  DetectionResult result;
  result.stages.reserve(schedule.stages.size());
  for (const int j : schedule.stages) {
    const long long flips_before = st.flips;
    const long long adds_before = st.additions;
    gplas_stage(st, j, H, omega_trace, schedule.rule);
    StageTrace trace;
    trace.group_size = j;
    trace.flips = st.flips - flips_before;
    trace.additions = st.additions - adds_before;
    trace.omega_after = st.omega;
    trace.b_after = st.b;
    result.stages.push_back(std::move(trace));
  }
  result.b = st.b;
  result.flips = st.flips;
  result.additions = st.additions;
  result.lml = is_lml_point(st.b, st.z, H);
  return result;
}

}  // namespace qlrs

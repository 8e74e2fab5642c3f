// qlrs: QLRS-CDMA simulation and likelihood ascent search detection
// SPDX-License-Identifier: Apache-2.0
#include "qlrs/refdet.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace qlrs {

namespace {

inline double sign_of(double v) { return (v >= 0.0) ? 1.0 : -1.0; }

Eigen::VectorXd sign_vector(const Eigen::VectorXd& v) {
  Eigen::VectorXd out(v.size());
  for (int i = 0; i < v.size(); ++i) out[i] = sign_of(v[i]);
  return out;
}

// Detection order: decreasing amplitude, ascending index on ties.
std::vector<int> amplitude_order(const Eigen::VectorXd& A) {
  std::vector<int> order(A.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return A[a] > A[b]; });
  return order;
}

bool lex_less_vec(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

}  // namespace

std::string detector_name(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::MatchedFilter: return "mf";
    case DetectorKind::Decorrelator: return "decorrelator";
    case DetectorKind::Mmse: return "mmse";
    case DetectorKind::MmseDf: return "mmse_df";
    case DetectorKind::Sic: return "sic";
    case DetectorKind::GmlExhaustive: return "gml";
    case DetectorKind::Wslas: return "wslas";
    case DetectorKind::Slas: return "slas";
  }
  return "unknown";
}

DetectorKind detector_from_name(const std::string& name) {
  if (name == "mf") return DetectorKind::MatchedFilter;
  if (name == "decorrelator" || name == "decorr")
    return DetectorKind::Decorrelator;
  if (name == "mmse") return DetectorKind::Mmse;
  if (name == "mmse_df") return DetectorKind::MmseDf;
  if (name == "sic") return DetectorKind::Sic;
  if (name == "gml") return DetectorKind::GmlExhaustive;
  if (name == "wslas") return DetectorKind::Wslas;
  if (name == "slas") return DetectorKind::Slas;
  throw std::invalid_argument("unknown detector: " + name);
}

Eigen::VectorXd mf_detect(const Eigen::VectorXd& y) { return sign_vector(y); }

LinearDetector LinearDetector::decorrelator(const Eigen::MatrixXd& R) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(R);
  const Eigen::VectorXd& vals = eig.eigenvalues();
  const double cutoff = 1e-10 * vals.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv(vals.size());
  LinearDetector det;
  det.rank_ = 0;
  for (int i = 0; i < vals.size(); ++i) {
    if (vals[i] > cutoff) {
      inv[i] = 1.0 / vals[i];
      ++det.rank_;
    } else {
      inv[i] = 0.0;
    }
  }
  det.rank_deficient_ = det.rank_ < vals.size();
  det.P_ = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
  return det;
}

LinearDetector LinearDetector::mmse(const Eigen::MatrixXd& R,
                                    const Eigen::VectorXd& A, double sigma) {
  if (sigma <= 0.0) return decorrelator(R);  // noiseless limit
  Eigen::MatrixXd m = R;
  for (int i = 0; i < A.size(); ++i) {
    m(i, i) += sigma * sigma / (A[i] * A[i]);
  }
  LinearDetector det;
  det.P_ = m.ldlt().solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
  det.rank_ = static_cast<int>(m.rows());
  det.rank_deficient_ = false;
  return det;
}

Eigen::VectorXd LinearDetector::detect(const Eigen::VectorXd& y) const {
  return sign_vector(P_ * y);
}

Eigen::VectorXd decorrelator_detect(const Eigen::VectorXd& y,
                                    const Eigen::MatrixXd& R) {
  return LinearDetector::decorrelator(R).detect(y);
}

Eigen::VectorXd mmse_detect(const Eigen::VectorXd& y, const Eigen::MatrixXd& R,
                            const Eigen::VectorXd& A, double sigma) {
  return LinearDetector::mmse(R, A, sigma).detect(y);
}

Eigen::VectorXd mmse_df_detect(const Eigen::VectorXd& y,
                               const Eigen::MatrixXd& R,
                               const Eigen::VectorXd& A, double sigma,
                               const Eigen::MatrixXd* prepared_inverse) {
  const int k = static_cast<int>(y.size());
  const std::vector<int> order = amplitude_order(A);

  Eigen::MatrixXd minv;
  if (prepared_inverse != nullptr) {
    minv = *prepared_inverse;
  } else {
    minv = LinearDetector::mmse(R, A, sigma).matrix();
  }

  // Compact the working copies so the active subsystem always occupies the
  // leading m rows/columns.
  Eigen::MatrixXd m = minv;
  Eigen::VectorXd u = y;
  std::vector<int> global(k);   // global index at each position
  std::vector<int> position(k); // position of each global index
  std::iota(global.begin(), global.end(), 0);
  std::iota(position.begin(), position.end(), 0);

  Eigen::VectorXd b(k);
  int active = k;
  for (const int target : order) {
    const int p = position[target];
    const double stat = m.row(p).head(active).dot(u.head(active));
    const double decided = sign_of(stat);
    b[target] = decided;
    // Cancel the decided user's contribution from the remaining statistic.
    const double scale = A[target] * decided;
    for (int q = 0; q < active; ++q) {
      if (q != p) u[q] -= R(global[q], target) * scale;
    }
    // Downdate the inverse to the subsystem without `target`.
    const double pivot = m(p, p);
    if (pivot > 1e-300) {
      const Eigen::VectorXd col = m.col(p).head(active);
      m.topLeftCorner(active, active).noalias() -=
          (col * col.transpose()) / pivot;
    }
    // Swap the removed position to the end and shrink.
    const int last = active - 1;
    if (p != last) {
      m.row(p).head(active).swap(m.row(last).head(active));
      m.col(p).head(active).swap(m.col(last).head(active));
      std::swap(u[p], u[last]);
      position[global[last]] = p;
      position[global[p]] = last;
      std::swap(global[p], global[last]);
    }
    --active;
  }
  return b;
}

Eigen::VectorXd sic_detect(const Eigen::VectorXd& y, const Eigen::MatrixXd& R,
                           const Eigen::VectorXd& A) {
  Eigen::VectorXd u = y;
  Eigen::VectorXd b(y.size());
  for (const int kk : amplitude_order(A)) {
    b[kk] = sign_of(u[kk]);
    u.noalias() -= (A[kk] * b[kk]) * R.col(kk);
  }
  return b;
}

namespace {

// Shared Gray-code walk over {-1,+1}^K maintaining z = A y - H b and the
// metric incrementally. `visit` is called for every vector.
template <typename Visitor>
void gray_walk(const Eigen::VectorXd& y, const Eigen::VectorXd& A,
               const Eigen::MatrixXd& H, int cap, Visitor&& visit) {
  const int k = static_cast<int>(y.size());
  if (k > cap) {
    throw std::invalid_argument(
        "exhaustive enumeration refused: K exceeds cap");
  }
  if (k >= 63) throw std::invalid_argument("exhaustive enumeration: K too big");
  Eigen::VectorXd b = Eigen::VectorXd::Ones(k);
  const Eigen::VectorXd ay = A.cwiseProduct(y);
  Eigen::VectorXd z = ay;
  z.noalias() -= H * b;
  double omega = b.dot(ay) + b.dot(z);
  visit(b, z, omega);
  const std::uint64_t n = std::uint64_t{1} << k;
  for (std::uint64_t i = 1; i < n; ++i) {
    const int flip = std::countr_zero(i);
    const double eps = b[flip];
    omega += 4.0 * (-eps * z[flip] - H(flip, flip));
    z.noalias() += (2.0 * eps) * H.col(flip);
    b[flip] = -eps;
    visit(b, z, omega);
  }
}

}  // namespace

Eigen::VectorXd gml_exhaustive(const Eigen::VectorXd& y,
                               const Eigen::VectorXd& A,
                               const Eigen::MatrixXd& H, int cap) {
  Eigen::VectorXd best;
  double best_omega = 0.0;
  bool first = true;
  gray_walk(y, A, H, cap,
            [&](const Eigen::VectorXd& b, const Eigen::VectorXd&, double omega) {
              if (first || omega > best_omega ||
                  (omega == best_omega && lex_less_vec(b, best))) {
                best = b;
                best_omega = omega;
                first = false;
              }
            });
  return best;
}

MlStructure ml_structure(const Eigen::VectorXd& y, const Eigen::VectorXd& A,
                         const Eigen::MatrixXd& H, int cap) {
  MlStructure out;
  double best_omega = 0.0;
  bool first = true;
  gray_walk(y, A, H, cap,
            [&](const Eigen::VectorXd& b, const Eigen::VectorXd& z,
                double omega) {
              bool lml = true;
              for (int kk = 0; kk < b.size(); ++kk) {
                if (-b[kk] * z[kk] > H(kk, kk)) {
                  lml = false;
                  break;
                }
              }
              if (lml) out.lml_points.push_back(b);
              if (first || omega > best_omega ||
                  (omega == best_omega && lex_less_vec(b, out.gml))) {
                out.gml = b;
                best_omega = omega;
                first = false;
              }
            });
  return out;
}

}  // namespace qlrs

// qlrs: QLRS-CDMA simulation and likelihood ascent search detection
// SPDX-License-Identifier: Apache-2.0
#include "qlrs/channel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qlrs {

void SystemConfig::validate() const {
  if (users <= 0) throw std::invalid_argument("config: users must be > 0");
  if (spreading <= 0)
    throw std::invalid_argument("config: spreading must be > 0");
  if (extend <= 0) throw std::invalid_argument("config: extend must be > 0");
  if (!multiplex.empty()) {
    if (static_cast<int>(multiplex.size()) != users)
      throw std::invalid_argument("config: multiplex size must equal users");
    long long total = 0;
    for (int bk : multiplex) {
      if (bk < 0)
        throw std::invalid_argument("config: multiplex counts must be >= 0");
      total += bk;
    }
    if (total == 0)
      throw std::invalid_argument("config: no bits to send (all B_k = 0)");
  }
  if (!amplitudes.empty()) {
    if (static_cast<int>(amplitudes.size()) != users)
      throw std::invalid_argument("config: amplitudes size must equal users");
    for (double a : amplitudes) {
      if (!(a > 0.0) || !std::isfinite(a))
        throw std::invalid_argument(
            "config: amplitudes must be positive and finite");
      if (amp_lower > 0.0 && a < amp_lower)
        throw std::invalid_argument("config: amplitude below amp_lower");
      if (amp_upper > 0.0 && a > amp_upper)
        throw std::invalid_argument("config: amplitude above amp_upper");
    }
  }
  if (!std::isfinite(snr_db))
    throw std::invalid_argument("config: snr_db must be finite");
}

double SystemConfig::noise_sigma() const {
  return std::pow(10.0, -snr_db / 20.0);
}

QlrsDims build_qlrs(const SystemConfig& cfg) {
  cfg.validate();
  QlrsDims dims;
  long long total_bits = 0;
  for (int k = 0; k < cfg.users; ++k) {
    total_bits += cfg.multiplex.empty() ? cfg.extend : cfg.multiplex[k];
  }
  if (total_bits == 0) throw std::invalid_argument("build_qlrs: no bits");
  dims.total_bits = static_cast<int>(total_bits);
  dims.total_chips = cfg.extend * cfg.spreading;
  // Load per the construction: (1/N) * sum_k B_k / B.
  dims.load = static_cast<double>(total_bits) /
              (static_cast<double>(cfg.extend) * cfg.spreading);
  dims.bit_amplitudes.resize(dims.total_bits);
  dims.bit_user.resize(dims.total_bits);
  int j = 0;
  for (int k = 0; k < cfg.users; ++k) {
    const int bk = cfg.multiplex.empty() ? cfg.extend : cfg.multiplex[k];
    const double ak = cfg.amplitudes.empty() ? 1.0 : cfg.amplitudes[k];
    for (int i = 0; i < bk; ++i, ++j) {
      dims.bit_amplitudes[j] = ak;
      dims.bit_user[j] = k;
    }
  }
  return dims;
}

Eigen::MatrixXd gen_spreading(RngStream& rng, int chips, int bits) {
  if (chips <= 0 || bits <= 0)
    throw std::invalid_argument("gen_spreading: dimensions must be positive");
  const double scale = 1.0 / std::sqrt(static_cast<double>(chips));
  Eigen::MatrixXd s(chips, bits);
  for (int j = 0; j < bits; ++j) {
    for (int i = 0; i < chips; ++i) {
      s(i, j) = rng.sign() * scale;
    }
  }
  return s;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> gram(const Eigen::MatrixXd& S,
                                                 const Eigen::VectorXd& A) {
  // Blocked matrix products are not bitwise symmetric; build both matrices
  // from one triangle. The diagonal is pinned to its analytic value (unit
  // column norms), so H_kk equals A_k^2 exactly.
  Eigen::MatrixXd r = S.transpose() * S;
  const auto n = r.rows();
  Eigen::MatrixXd h(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r(i, i) = 1.0;
    h(i, i) = A[i] * A[i];
    for (Eigen::Index j = 0; j < i; ++j) {
      r(j, i) = r(i, j);
      const double hij = A[i] * r(i, j) * A[j];
      h(i, j) = hij;
      h(j, i) = hij;
    }
  }
  return {std::move(r), std::move(h)};
}

ChannelInstance make_instance(const SystemConfig& cfg, RngStream& rng) {
  const QlrsDims dims = build_qlrs(cfg);
  ChannelInstance inst;
  inst.S = gen_spreading(rng, dims.total_chips, dims.total_bits);
  inst.A = dims.bit_amplitudes;
  inst.sigma = cfg.noise_sigma();
  std::tie(inst.R, inst.H) = gram(inst.S, inst.A);
  return inst;
}

ChannelInstance make_instance_from_s(Eigen::MatrixXd S, Eigen::VectorXd A,
                                     double sigma) {
  if (S.cols() != A.size())
    throw std::invalid_argument("make_instance_from_s: A size mismatch");
  if (sigma < 0.0)
    throw std::invalid_argument("make_instance_from_s: sigma must be >= 0");
  ChannelInstance inst;
  inst.S = std::move(S);
  inst.A = std::move(A);
  inst.sigma = sigma;
  std::tie(inst.R, inst.H) = gram(inst.S, inst.A);
  return inst;
}

Eigen::VectorXd random_bits(RngStream& rng, int n) {
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) b[i] = rng.sign();
  return b;
}

TransmitRecord transmit(const ChannelInstance& inst, const Eigen::VectorXd& b,
                        RngStream& rng) {
  if (b.size() != inst.bits())
    throw std::invalid_argument("transmit: bit vector size mismatch");
  for (int i = 0; i < b.size(); ++i) {
    if (b[i] != 1.0 && b[i] != -1.0)
      throw std::invalid_argument("transmit: bits must be exactly +-1");
  }
  TransmitRecord rec;
  rec.b = b;
  rec.r.noalias() = inst.S * inst.A.cwiseProduct(b);
  if (inst.sigma > 0.0) {
    for (int i = 0; i < rec.r.size(); ++i) {
      rec.r[i] += inst.sigma * rng.normal();
    }
  }
  rec.y.noalias() = inst.S.transpose() * rec.r;
  return rec;
}

}  // namespace qlrs

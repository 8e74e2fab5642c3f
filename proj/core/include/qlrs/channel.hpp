// qlrs: QLRS-CDMA simulation and likelihood ascent search detection
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "qlrs/rng.hpp"

namespace qlrs {

enum class SequenceMode {
  Short,  // one spreading matrix per sample index, reused across trials
  Long,   // fresh spreading matrix per trial
};

/// Dimensioning of one synchronous CDMA experiment. K users spread over N
/// chips per bit period; each user multiplexes multiplex[k] bits that are
/// extended over `extend` bit periods, so one transmission carries
/// sum(multiplex) bits on extend*N chips while the channel load stays
/// sum(multiplex[k]/extend)/N.
struct SystemConfig {
  int users = 8;                    // K
  int spreading = 10;               // N, chips per bit period
  int extend = 1;                   // B, bit-extension factor
  std::vector<int> multiplex;       // B_k; empty means all equal to extend
  std::vector<double> amplitudes;   // A_k; empty means all 1.0
  double snr_db = 11.0;             // per-user SNR = A^2 / sigma^2 at A = 1
  SequenceMode mode = SequenceMode::Long;
  std::uint64_t seed = 0;
  double amp_lower = 0.0;           // optional amplitude bounds; 0/inf = off
  double amp_upper = 0.0;

  void validate() const;            // throws std::invalid_argument

  /// Noise standard deviation implied by snr_db: sigma = 10^(-snr_db/20).
  double noise_sigma() const;
};

/// Effective dimensions of the bit extending/multiplexing construction.
struct QlrsDims {
  int total_bits = 0;               // sum of multiplex counts
  int total_chips = 0;              // extend * spreading
  double load = 0.0;                // bits per second per Hz
  Eigen::VectorXd bit_amplitudes;   // amplitude carried by each bit
  std::vector<int> bit_user;        // owning user of each bit
};

QlrsDims build_qlrs(const SystemConfig& cfg);

/// One realized random-spreading channel. Immutable after construction and
/// safe to share read-only across worker threads.
struct ChannelInstance {
  Eigen::MatrixXd S;   // chips x bits, entries +-1/sqrt(chips), unit columns
  Eigen::VectorXd A;   // per-bit amplitudes
  double sigma = 0.0;  // per-chip noise standard deviation
  Eigen::MatrixXd R;   // S^T S with the analytic unit diagonal enforced
  Eigen::MatrixXd H;   // A R A

  int bits() const { return static_cast<int>(S.cols()); }
  int chips() const { return static_cast<int>(S.rows()); }
};

/// i.i.d. equiprobable +-1/sqrt(chips) entries; every column has unit norm.
Eigen::MatrixXd gen_spreading(RngStream& rng, int chips, int bits);

/// Crosscorrelation and Gram matrices. R's diagonal is set to its analytic
/// value 1 so that H's diagonal equals the squared amplitudes exactly.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> gram(const Eigen::MatrixXd& S,
                                                 const Eigen::VectorXd& A);

ChannelInstance make_instance(const SystemConfig& cfg, RngStream& rng);
ChannelInstance make_instance_from_s(Eigen::MatrixXd S, Eigen::VectorXd A,
                                     double sigma);

struct TransmitRecord {
  Eigen::VectorXd b;  // transmitted bits, +-1
  Eigen::VectorXd r;  // received chip vector S A b + noise
  Eigen::VectorXd y;  // matched-filter statistic S^T r
};

/// i.i.d. equiprobable +-1 bit vector of length n.
Eigen::VectorXd random_bits(RngStream& rng, int n);

/// Sends b through the instance with fresh Gaussian noise from `rng`.
/// Rejects b entries outside {-1, +1}.
TransmitRecord transmit(const ChannelInstance& inst, const Eigen::VectorXd& b,
                        RngStream& rng);

}  // namespace qlrs

// qlrs: QLRS-CDMA simulation and likelihood ascent search detection
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace qlrs {

/// One emitted result line. Optional fields render as empty CSV cells and
/// JSON nulls (limit-curve rows carry no counters, undefined limits carry no
/// ber).
struct ResultRow {
  std::string experiment;
  double alpha = 0.0;
  double snr_db = 0.0;
  long long bk = 0;
  int extend = 0;       // B
  int users = 0;        // K
  std::string detector;
  std::string sample;   // "1".."n", "avg", or "" for limit rows
  std::optional<double> ber;
  std::optional<double> ber_ci95_lo;
  std::optional<double> ber_ci95_hi;
  std::optional<double> bfr;
  std::optional<double> additions_per_bit;
  std::optional<long long> bits;
  std::optional<long long> errors;
  std::uint64_t seed = 0;
};

/// Header kept in one place so tests can pin the schema.
std::string result_row_header();

/// Deterministic number formatting: values below 1e-3 in magnitude are
/// written in explicit exponent form.
std::string format_number(double v);

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows);

/// JSON mirror of the CSV: an object with `config` (resolved key=value
/// pairs) and `rows` carrying identical values.
void write_json(std::ostream& os, const std::vector<ResultRow>& rows,
                const std::vector<std::pair<std::string, std::string>>& config);

/// Wilson 95% score interval for a binomial proportion.
std::pair<double, double> wilson_interval(long long successes, long long total);

}  // namespace qlrs

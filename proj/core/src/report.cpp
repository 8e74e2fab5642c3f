// qlrs: QLRS-CDMA simulation and likelihood ascent search detection
// SPDX-License-Identifier: Apache-2.0
#include "qlrs/report.hpp"

#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

namespace qlrs {

std::string result_row_header() {
  return "experiment,alpha,snr_db,bk,B,K,detector,sample,ber,ber_ci95_lo,"
         "ber_ci95_hi,bfr,additions_per_bit,bits,errors,seed";
}

std::string format_number(double v) {
  char buf[64];
  if (v == 0.0) return "0";
  if (std::abs(v) < 1e-3) {
    std::snprintf(buf, sizeof(buf), "%.9e", v);
  } else {
    std::snprintf(buf, sizeof(buf), "%.9g", v);
  }
  return buf;
}

namespace {

std::string cell(const std::optional<double>& v) {
  return v.has_value() ? format_number(*v) : std::string();
}

std::string cell(const std::optional<long long>& v) {
  return v.has_value() ? std::to_string(*v) : std::string();
}

}  // namespace

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << result_row_header() << "\n";
  for (const ResultRow& r : rows) {
    os << r.experiment << ',' << format_number(r.alpha) << ','
       << format_number(r.snr_db) << ',' << r.bk << ',' << r.extend << ','
       << r.users << ',' << r.detector << ',' << r.sample << ',' << cell(r.ber)
       << ',' << cell(r.ber_ci95_lo) << ',' << cell(r.ber_ci95_hi) << ','
       << cell(r.bfr) << ',' << cell(r.additions_per_bit) << ',' << cell(r.bits)
       << ',' << cell(r.errors) << ',' << r.seed << "\n";
  }
}

void write_json(std::ostream& os, const std::vector<ResultRow>& rows,
                const std::vector<std::pair<std::string, std::string>>& config) {
  nlohmann::ordered_json doc;
  auto& cfg = doc["config"];
  cfg = nlohmann::ordered_json::object();
  for (const auto& [key, value] : config) cfg[key] = value;
  auto& out = doc["rows"];
  out = nlohmann::ordered_json::array();
  for (const ResultRow& r : rows) {
    nlohmann::ordered_json j;
    j["experiment"] = r.experiment;
    j["alpha"] = r.alpha;
    j["snr_db"] = r.snr_db;
    j["bk"] = r.bk;
    j["B"] = r.extend;
    j["K"] = r.users;
    j["detector"] = r.detector;
    j["sample"] = r.sample;
    auto set = [&j](const char* name, const auto& opt) {
      if (opt.has_value()) {
        j[name] = *opt;
      } else {
        j[name] = nullptr;
      }
    };
    set("ber", r.ber);
    set("ber_ci95_lo", r.ber_ci95_lo);
    set("ber_ci95_hi", r.ber_ci95_hi);
    set("bfr", r.bfr);
    set("additions_per_bit", r.additions_per_bit);
    set("bits", r.bits);
    set("errors", r.errors);
    j["seed"] = r.seed;
    out.push_back(std::move(j));
  }
  os << doc.dump(2) << "\n";
}

std::pair<double, double> wilson_interval(long long successes, long long total) {
  if (total <= 0) return {0.0, 1.0};
  const double z = 1.959963984540054;  // 97.5% normal quantile
  const double n = static_cast<double>(total);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  const double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = successes == total ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

}  // namespace qlrs

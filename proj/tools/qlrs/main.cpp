// qlrs: QLRS-CDMA simulation and likelihood ascent search detection
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Subcommands run the figure-level sweeps, the
// theorem experiments, single-trial traces and the limit curves, emitting
// CSV (stdout or --out) with an optional JSON mirror (--json).
// Exit codes: 0 ok, 1 usage error, 2 flagged results (bit budget exhausted
// or undefined points), 3 internal error.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qlrs/asymptotics.hpp"
#include "qlrs/geometry.hpp"
#include "qlrs/harness.hpp"
#include "qlrs/las.hpp"
#include "qlrs/report.hpp"

namespace {

using qlrs::format_number;

constexpr std::uint64_t kDefaultSeed = 20250811;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("QLRS_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw CLI::ValidationError("QLRS_SEED", "not a valid integer");
    }
  }
  return kDefaultSeed;
}

// Grid syntax: either a comma list "4,7,10" or a range "4:12:1" (inclusive).
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    double start = 0, stop = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream is(text);
    if (!(is >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' ||
        step <= 0) {
      throw CLI::ValidationError("grid", "expected start:stop:step with step>0");
    }
    for (double v = start; v <= stop + 1e-9 * step; v += step) out.push_back(v);
    return out;
  }
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  if (out.empty()) throw CLI::ValidationError("grid", "empty grid");
  return out;
}

std::vector<long long> parse_grid_int(const std::string& text) {
  std::vector<long long> out;
  for (double v : parse_grid(text)) out.push_back(std::llround(v));
  return out;
}

std::vector<qlrs::DetectorKind> parse_detectors(const std::string& text) {
  std::vector<qlrs::DetectorKind> out;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    if (!item.empty()) out.push_back(qlrs::detector_from_name(item));
  }
  if (out.empty()) throw CLI::ValidationError("detectors", "empty list");
  return out;
}

qlrs::InitialPolicy parse_initial(const std::string& text) {
  if (text == "mf") return qlrs::InitialPolicy::MatchedFilter;
  if (text == "random") return qlrs::InitialPolicy::Random;
  throw CLI::ValidationError("initial", "expected mf or random");
}

qlrs::GroupRule parse_group_rule(const std::string& text) {
  if (text == "parallel") return qlrs::GroupRule::Parallel;
  if (text == "best-subset") return qlrs::GroupRule::BestSubset;
  throw CLI::ValidationError("group-rule", "expected parallel or best-subset");
}

struct CommonOpts {
  std::uint64_t seed = default_seed();
  int workers = 0;
  std::string out_path;
  std::string json_path;
  long long min_errors = 200;
  long long max_bits = 50'000'000;
  int samples = 5;
  std::string config_path;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--seed", opts.seed,
                  "Master seed (falls back to QLRS_SEED, then a fixed default)");
  cmd->add_option("--workers", opts.workers, "Worker threads, 0 = auto");
  cmd->add_option("--out", opts.out_path, "Write CSV here instead of stdout");
  cmd->add_option("--json", opts.json_path, "Also write a JSON mirror");
  cmd->add_option("--min-errors", opts.min_errors,
                  "Stop a detector after this many bit errors");
  cmd->add_option("--max-bits", opts.max_bits, "Per-detector bit budget");
  cmd->add_option("--samples", opts.samples, "Short-sequence sample count");
  cmd->add_option("--config", opts.config_path,
                  "Line-based key=value defaults; explicit flags win");
}

// Merges a key=value config file into the argument list: every key the user
// did not pass explicitly becomes a trailing --key value pair.
std::vector<std::string> merge_config_file(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  if (path.empty()) return args;
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot read config file " + path);
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    const std::string flag = "--" + key;
    bool given = false;
    for (const std::string& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) {
        given = true;
        break;
      }
    }
    if (!given) {
      args.push_back(flag);
      args.push_back(value);
    }
  }
  return args;
}

using ConfigLog = std::vector<std::pair<std::string, std::string>>;

void log_config(const ConfigLog& cfg) {
  std::ostringstream os;
  os << "# config:";
  for (const auto& [k, v] : cfg) os << ' ' << k << '=' << v;
  std::cerr << os.str() << "\n";
}

void log_common(ConfigLog& cfg, const CommonOpts& c) {
  cfg.emplace_back("seed", std::to_string(c.seed));
  cfg.emplace_back("workers", std::to_string(c.workers));
  cfg.emplace_back("min_errors", std::to_string(c.min_errors));
  cfg.emplace_back("max_bits", std::to_string(c.max_bits));
  cfg.emplace_back("samples", std::to_string(c.samples));
}

int emit(const std::vector<qlrs::ResultRow>& rows, const CommonOpts& common,
         const ConfigLog& cfg, bool flagged) {
  if (common.out_path.empty()) {
    qlrs::write_csv(std::cout, rows);
  } else {
    std::ofstream os(common.out_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + common.out_path);
    qlrs::write_csv(os, rows);
  }
  if (!common.json_path.empty()) {
    std::ofstream os(common.json_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + common.json_path);
    qlrs::write_json(os, rows, cfg);
  }
  return flagged ? 2 : 0;
}

// ---------------------------------------------------------------------------

int run_fig1(const CommonOpts& common, const std::string& bk_text, int users,
             double alpha, double snr, const std::string& initial,
             const std::string& group_rule, const std::string& detectors,
             bool tanaka) {
  qlrs::Fig1Options opt;
  opt.bk_ladder = parse_grid_int(bk_text);
  opt.users = users;
  opt.alpha = alpha;
  opt.snr_db = snr;
  opt.initial = parse_initial(initial);
  opt.group_rule = parse_group_rule(group_rule);
  opt.detectors = parse_detectors(detectors);
  opt.stop = {common.min_errors, common.max_bits};
  opt.sample_count = common.samples;
  opt.workers = common.workers;
  opt.seed = common.seed;
  opt.with_tanaka = tanaka;

  ConfigLog cfg;
  cfg.emplace_back("cmd", "fig1");
  cfg.emplace_back("bk", bk_text);
  cfg.emplace_back("K", std::to_string(users));
  cfg.emplace_back("alpha", format_number(alpha));
  cfg.emplace_back("snr_db", format_number(snr));
  cfg.emplace_back("initial", initial);
  cfg.emplace_back("group_rule", group_rule);
  cfg.emplace_back("detectors", detectors);
  cfg.emplace_back("tanaka", tanaka ? "1" : "0");
  log_common(cfg, common);
  log_config(cfg);

  const qlrs::FigResult res = qlrs::fig1_driver(opt);
  return emit(res.rows, common, cfg, res.flagged);
}

int run_fig2(const CommonOpts& common, const std::string& snr_text,
             long long bk, int users, double alpha, const std::string& initial,
             const std::string& group_rule, const std::string& detectors,
             bool tanaka) {
  qlrs::Fig2Options opt;
  opt.snr_ladder = parse_grid(snr_text);
  opt.bk = bk;
  opt.users = users;
  opt.alpha = alpha;
  opt.initial = parse_initial(initial);
  opt.group_rule = parse_group_rule(group_rule);
  opt.detectors = parse_detectors(detectors);
  opt.stop = {common.min_errors, common.max_bits};
  opt.sample_count = common.samples;
  opt.workers = common.workers;
  opt.seed = common.seed;
  opt.with_tanaka = tanaka;

  ConfigLog cfg;
  cfg.emplace_back("cmd", "fig2");
  cfg.emplace_back("snr", snr_text);
  cfg.emplace_back("bk", std::to_string(bk));
  cfg.emplace_back("K", std::to_string(users));
  cfg.emplace_back("alpha", format_number(alpha));
  cfg.emplace_back("initial", initial);
  cfg.emplace_back("group_rule", group_rule);
  cfg.emplace_back("detectors", detectors);
  cfg.emplace_back("tanaka", tanaka ? "1" : "0");
  log_common(cfg, common);
  log_config(cfg);

  const qlrs::FigResult res = qlrs::fig2_driver(opt);
  return emit(res.rows, common, cfg, res.flagged);
}

int run_fig3(const CommonOpts& common, const std::string& alpha_text, int users,
             double snr, const std::string& initial,
             const std::string& group_rule, const std::string& detectors,
             long long bk_cap, bool extended, bool tanaka) {
  qlrs::Fig3Options opt;
  opt.alpha_ladder = parse_grid(alpha_text);
  opt.users = users;
  opt.snr_db = snr;
  opt.initial = parse_initial(initial);
  opt.group_rule = parse_group_rule(group_rule);
  opt.detectors = parse_detectors(detectors);
  opt.stop = {common.min_errors, common.max_bits};
  opt.sample_count = common.samples;
  opt.workers = common.workers;
  opt.seed = common.seed;
  opt.bk_cap = extended ? 3328 : bk_cap;
  opt.with_tanaka = tanaka;

  ConfigLog cfg;
  cfg.emplace_back("cmd", "fig3");
  cfg.emplace_back("alpha", alpha_text);
  cfg.emplace_back("K", std::to_string(users));
  cfg.emplace_back("snr_db", format_number(snr));
  cfg.emplace_back("initial", initial);
  cfg.emplace_back("group_rule", group_rule);
  cfg.emplace_back("detectors", detectors);
  cfg.emplace_back("bk_cap", std::to_string(opt.bk_cap));
  cfg.emplace_back("tanaka", tanaka ? "1" : "0");
  log_common(cfg, common);
  log_config(cfg);

  const qlrs::FigResult res = qlrs::fig3_driver(opt);
  return emit(res.rows, common, cfg, res.flagged);
}

// ---------------------------------------------------------------------------

void write_plain_csv(const CommonOpts& common, const std::string& header,
                     const std::vector<std::string>& lines) {
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!common.out_path.empty()) {
    file.open(common.out_path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open " + common.out_path);
    os = &file;
  }
  *os << header << "\n";
  for (const std::string& line : lines) *os << line << "\n";
}

// JSON mirror for the table-style commands: one object per CSV row, keyed by
// the header columns; numeric cells become JSON numbers, empty cells null.
void write_plain_json(const CommonOpts& common, const ConfigLog& cfg,
                      const std::string& header,
                      const std::vector<std::string>& lines) {
  if (common.json_path.empty()) return;
  std::ofstream os(common.json_path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + common.json_path);
  auto split = [](const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, ',')) out.push_back(item);
    if (!text.empty() && text.back() == ',') out.emplace_back();
    return out;
  };
  const std::vector<std::string> keys = split(header);
  os << "{\n  \"config\": {";
  bool first = true;
  for (const auto& [k, v] : cfg) {
    os << (first ? "" : ", ") << '"' << k << "\": \"" << v << '"';
    first = false;
  }
  os << "},\n  \"rows\": [\n";
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::vector<std::string> cells = split(lines[i]);
    os << "    {";
    for (std::size_t c = 0; c < keys.size(); ++c) {
      const std::string cell = c < cells.size() ? cells[c] : std::string();
      os << (c > 0 ? ", " : "") << '"' << keys[c] << "\": ";
      char* end = nullptr;
      const double v = cell.empty() ? 0.0 : std::strtod(cell.c_str(), &end);
      if (cell.empty()) {
        os << "null";
      } else if (end != nullptr && *end == '\0' && std::isfinite(v)) {
        os << cell;  // already a valid JSON number literal
      } else {
        os << '"' << cell << '"';
      }
    }
    os << (i + 1 < lines.size() ? "},\n" : "}\n");
  }
  os << "  ]\n}\n";
}

int run_theorems(const CommonOpts& common, const std::string& which,
                 double alpha, const std::string& k_text, int m1, int m2, int m,
                 double c, long long trials) {
  std::vector<int> ks;
  for (long long v : parse_grid_int(k_text)) ks.push_back(static_cast<int>(v));

  ConfigLog cfg;
  cfg.emplace_back("cmd", "theorems");
  cfg.emplace_back("which", which);
  cfg.emplace_back("alpha", format_number(alpha));
  cfg.emplace_back("K", k_text);
  cfg.emplace_back("trials", std::to_string(trials));
  log_common(cfg, common);

  if (which == "thm1") {
    if (m1 >= m2) {
      throw CLI::ValidationError("--M1/--M2", "thm1 requires M1 < M2");
    }
    cfg.emplace_back("M1", std::to_string(m1));
    cfg.emplace_back("M2", std::to_string(m2));
    log_config(cfg);
    const auto rows = qlrs::thm1_experiment(alpha, ks, m1, m2, trials,
                                            common.seed, common.workers);
    std::vector<std::string> lines;
    for (const auto& r : rows) {
      std::ostringstream os;
      os << r.users << ',' << r.spreading << ',' << r.trials << ','
         << r.violations << ',' << format_number(r.freq) << ','
         << format_number(r.se);
      lines.push_back(os.str());
    }
    const std::string header = "K,N,trials,violations,violation_freq,se";
    write_plain_csv(common, header, lines);
    write_plain_json(common, cfg, header, lines);
    return 0;
  }
  if (which == "thm2") {
    cfg.emplace_back("M", std::to_string(m));
    cfg.emplace_back("alpha_star", format_number(qlrs::alpha_star()));
    log_config(cfg);
    const auto result = qlrs::thm2_experiment(alpha, ks, m, trials,
                                              common.seed, common.workers);
    std::vector<std::string> lines;
    for (const auto& r : result.rows) {
      std::ostringstream os;
      os << "ratio," << r.users << ',' << r.spreading << ',' << r.weight << ','
         << r.n << ',' << format_number(r.mean_ratio_err) << ','
         << format_number(r.max_ratio_err) << ',' << format_number(r.se);
      lines.push_back(os.str());
    }
    for (const auto& r : result.tail) {
      std::ostringstream os;
      os << "tail_min," << r.users << ',' << r.spreading << ",," << r.sampled
         << ',' << format_number(r.min_dlml) << ",,"
         << format_number(static_cast<double>(r.indecomposable));
      lines.push_back(os.str());
    }
    const std::string header =
        "part,K,N,weight,n,mean_ratio_err,max_ratio_err,se";
    write_plain_csv(common, header, lines);
    write_plain_json(common, cfg, header, lines);
    return 0;
  }
  if (which == "thm4") {
    if (!(alpha < qlrs::alpha_star())) {
      throw CLI::ValidationError(
          "--alpha", "thm4 requires alpha < alpha* = " +
                          format_number(qlrs::alpha_star()));
    }
    cfg.emplace_back("c", format_number(c));
    log_config(cfg);
    const auto rows = qlrs::thm4_experiment(alpha, c, ks, trials, common.seed,
                                            common.workers);
    std::vector<std::string> lines;
    for (const auto& r : rows) {
      std::ostringstream os;
      os << r.users << ',' << r.spreading << ',' << format_number(r.sigma)
         << ',' << r.trials << ',' << format_number(r.freq_lml_unique_gml)
         << ',' << format_number(r.freq_wslas_eq_gml) << ','
         << format_number(r.se);
      lines.push_back(os.str());
    }
    const std::string header =
        "K,N,sigma,trials,freq_lml_unique_gml,freq_wslas_eq_gml,se";
    write_plain_csv(common, header, lines);
    write_plain_json(common, cfg, header, lines);
    return 0;
  }
  throw CLI::ValidationError("--which", "expected thm1, thm2 or thm4");
}

// ---------------------------------------------------------------------------

int run_single(const CommonOpts& common, int users, int spreading, int extend,
               double snr, const std::string& initial,
               const std::string& stages_text) {
  qlrs::SystemConfig config;
  config.users = users;
  config.spreading = spreading;
  config.extend = extend;
  config.snr_db = snr;
  config.mode = qlrs::SequenceMode::Long;
  config.seed = common.seed;

  qlrs::Schedule schedule;
  schedule.stages.clear();
  for (long long v : parse_grid_int(stages_text)) {
    schedule.stages.push_back(static_cast<int>(v));
  }
  schedule.initial = parse_initial(initial);
  schedule.validate();

  ConfigLog cfg;
  cfg.emplace_back("cmd", "single");
  cfg.emplace_back("K", std::to_string(users));
  cfg.emplace_back("N", std::to_string(spreading));
  cfg.emplace_back("B", std::to_string(extend));
  cfg.emplace_back("snr_db", format_number(snr));
  cfg.emplace_back("initial", initial);
  cfg.emplace_back("schedule", stages_text);
  log_common(cfg, common);
  log_config(cfg);

  qlrs::RngStream spread(common.seed, 0, 0, qlrs::StreamPurpose::Spreading);
  qlrs::RngStream bits(common.seed, 0, 0, qlrs::StreamPurpose::Bits);
  qlrs::RngStream noise(common.seed, 0, 0, qlrs::StreamPurpose::Noise);
  qlrs::RngStream init(common.seed, 0, 0, qlrs::StreamPurpose::Initial);

  const qlrs::ChannelInstance inst = qlrs::make_instance(config, spread);
  const Eigen::VectorXd b = qlrs::random_bits(bits, inst.bits());
  const qlrs::TransmitRecord rec = qlrs::transmit(inst, b, noise);

  std::vector<double> omega_trace;
  const qlrs::DetectionResult det =
      qlrs::run_las(rec.y, inst, schedule, nullptr, &init, &omega_trace);

  std::cout << "trial: K=" << users << " N=" << spreading << " B=" << extend
            << " bits=" << inst.bits() << " snr_db=" << format_number(snr)
            << " seed=" << common.seed << "\n";
  std::size_t shown = 0;
  for (const double om : omega_trace) {
    if (shown >= 200) {
      std::cout << "  ... (" << omega_trace.size() - shown
                << " more accepted flips)\n";
      break;
    }
    std::cout << "  flip " << shown + 1 << "  Omega=" << format_number(om)
              << "\n";
    ++shown;
  }
  for (const auto& st : det.stages) {
    int errs = 0;
    for (int i = 0; i < b.size(); ++i) {
      if (st.b_after[i] * b[i] < 0) ++errs;
    }
    std::cout << "stage J=" << st.group_size << "  flips=" << st.flips
              << "  additions=" << st.additions
              << "  Omega=" << format_number(st.omega_after)
              << "  errors=" << errs << "\n";
  }
  int errors = 0;
  for (int i = 0; i < b.size(); ++i) {
    if (det.b[i] * b[i] < 0) ++errors;
  }
  std::cout << "flips: " << det.flips << ", errors: " << errors
            << ", BER: " << format_number(static_cast<double>(errors) / b.size())
            << ", LML: " << (det.lml ? "true" : "false") << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

int run_limits(const CommonOpts& common, const std::string& alpha_text,
               const std::string& snr_text, bool tanaka) {
  ConfigLog cfg;
  cfg.emplace_back("cmd", "limits");
  cfg.emplace_back("alpha", alpha_text);
  cfg.emplace_back("snr", snr_text);
  cfg.emplace_back("tanaka", tanaka ? "1" : "0");
  log_common(cfg, common);
  log_config(cfg);

  bool flagged = false;
  std::vector<std::string> lines;
  for (const double alpha : parse_grid(alpha_text)) {
    for (const double snr : parse_grid(snr_text)) {
      std::vector<qlrs::LimitPoint> pts;
      qlrs::LimitPoint su;
      su.alpha = alpha;
      su.snr_db = snr;
      su.detector = qlrs::LimitDetector::SingleUser;
      su.ber = qlrs::single_user_ber(snr);
      su.sir = std::pow(10.0, snr / 10.0);
      su.all_bers = {su.ber};
      su.all_sirs = {su.sir};
      pts.push_back(su);
      pts.push_back(qlrs::mf_limit_ber(alpha, snr));
      pts.push_back(qlrs::decorr_limit_ber(alpha, snr));
      pts.push_back(qlrs::mmse_limit_ber(alpha, snr));
      if (tanaka) pts.push_back(qlrs::tanaka_gml_limit_ber(alpha, snr));
      for (const qlrs::LimitPoint& p : pts) {
        const int n_solutions =
            p.defined ? std::max<std::size_t>(1, p.all_bers.size()) : 1;
        for (int s = 0; s < n_solutions; ++s) {
          std::ostringstream os;
          os << format_number(alpha) << ',' << format_number(snr) << ','
             << "limit:" << qlrs::limit_detector_name(p.detector) << ','
             << (s + 1) << ',' << p.multiplicity << ',';
          if (p.defined) {
            os << format_number(p.all_sirs.empty() ? p.sir : p.all_sirs[s])
               << ','
               << format_number(p.all_bers.empty() ? p.ber : p.all_bers[s]);
          } else {
            os << ',';
          }
          os << ',';
          if (!p.defined) {
            os << "undefined";
            flagged = true;
          } else if (p.experimental) {
            os << "experimental";
          }
          lines.push_back(os.str());
        }
      }
    }
  }
  const std::string header =
      "alpha,snr_db,detector,solution,multiplicity,sir,ber,flag";
  write_plain_csv(common, header, lines);
  write_plain_json(common, cfg, header, lines);
  return flagged ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QLRS-CDMA Monte Carlo simulator and LAS detector family"};
  app.require_subcommand(1);

  try {
    // fig1
    CommonOpts c1;
    std::string f1_bk = "8,128,512", f1_initial = "mf";
    std::string f1_rule = "parallel";
    std::string f1_detectors = "mf,wslas,slas,mmse_df,sic";
    int f1_users = 8;
    double f1_alpha = 0.8, f1_snr = 11.0;
    bool f1_tanaka = true;
    CLI::App* fig1 = app.add_subcommand("fig1", "BER/BFR versus BK");
    add_common(fig1, c1);
    fig1->add_option("--bk", f1_bk, "BK ladder (list or range)");
    fig1->add_option("--k", f1_users, "User count K");
    fig1->add_option("--alpha", f1_alpha, "Channel load");
    fig1->add_option("--snr", f1_snr, "SNR in dB");
    fig1->add_option("--initial", f1_initial, "Initial detector: mf|random");
    fig1->add_option("--group-rule", f1_rule,
                     "Group update: parallel|best-subset");
    fig1->add_option("--detectors", f1_detectors, "Comma list of detectors");
    fig1->add_flag("--tanaka,!--no-tanaka", f1_tanaka,
                   "Emit the replica GML limit row");

    // fig2
    CommonOpts c2;
    std::string f2_snr = "4:12:1", f2_initial = "random";
    std::string f2_rule = "parallel";
    std::string f2_detectors = "mf,wslas,slas,mmse_df,sic";
    long long f2_bk = 1024;
    int f2_users = 8;
    double f2_alpha = 0.8;
    bool f2_tanaka = true;
    CLI::App* fig2 = app.add_subcommand("fig2", "BER/BFR versus SNR");
    add_common(fig2, c2);
    fig2->add_option("--snr", f2_snr, "SNR grid (list or range)");
    fig2->add_option("--bk", f2_bk, "Total bits BK");
    fig2->add_option("--k", f2_users, "User count K");
    fig2->add_option("--alpha", f2_alpha, "Channel load");
    fig2->add_option("--initial", f2_initial, "Initial detector: mf|random");
    fig2->add_option("--group-rule", f2_rule,
                     "Group update: parallel|best-subset");
    fig2->add_option("--detectors", f2_detectors, "Comma list of detectors");
    fig2->add_flag("--tanaka,!--no-tanaka", f2_tanaka,
                   "Emit the replica GML limit rows");

    // fig3
    CommonOpts c3;
    std::string f3_alpha = "0.2,0.5,0.8,1.0,1.1,1.2,1.3", f3_initial = "mf";
    std::string f3_rule = "parallel";
    std::string f3_detectors = "mf,wslas,slas,mmse_df,sic";
    int f3_users = 8;
    double f3_snr = 11.0;
    long long f3_bk_cap = 1024;
    bool f3_extended = false, f3_tanaka = true;
    CLI::App* fig3 = app.add_subcommand("fig3", "BER/BFR versus load");
    add_common(fig3, c3);
    fig3->add_option("--alpha", f3_alpha, "Load grid (list or range)");
    fig3->add_option("--k", f3_users, "User count K");
    fig3->add_option("--snr", f3_snr, "SNR in dB");
    fig3->add_option("--initial", f3_initial, "Initial detector: mf|random");
    fig3->add_option("--group-rule", f3_rule,
                     "Group update: parallel|best-subset");
    fig3->add_option("--detectors", f3_detectors, "Comma list of detectors");
    fig3->add_option("--bk-cap", f3_bk_cap,
                     "Scale the reference BK schedule to this maximum");
    fig3->add_flag("--extended", f3_extended,
                   "Use the full reference BK schedule (multi-minute)");
    fig3->add_flag("--tanaka,!--no-tanaka", f3_tanaka,
                   "Emit the replica GML limit rows");

    // theorems
    CommonOpts c4;
    std::string t_which, t_k = "32,128,512";
    double t_alpha = 0.8, t_c = 2.5;
    int t_m1 = 1, t_m2 = 2, t_m = 3;
    long long t_trials = 20000;
    CLI::App* theorems =
        app.add_subcommand("theorems", "Distance-geometry experiments");
    add_common(theorems, c4);
    theorems->add_option("--which", t_which, "thm1|thm2|thm4")->required();
    theorems->add_option("--alpha", t_alpha, "Channel load");
    theorems->add_option("--K", t_k, "User-count ladder");
    theorems->add_option("--M1", t_m1, "thm1 inner weight bound");
    theorems->add_option("--M2", t_m2, "thm1 outer weight bound");
    theorems->add_option("--M", t_m, "thm2 weight bound");
    theorems->add_option("--c", t_c, "thm4 noise scale: sigma = c/sqrt(N)");
    theorems->add_option("--trials", t_trials, "Trials per ladder point");

    // single
    CommonOpts c5;
    int s_users = 8, s_spreading = 10, s_extend = 1;
    double s_snr = 11.0;
    std::string s_initial = "mf", s_stages = "8,4,2,1";
    CLI::App* single =
        app.add_subcommand("single", "Trace one trial of the cascade");
    add_common(single, c5);
    single->add_option("--k", s_users, "User count K");
    single->add_option("--n", s_spreading, "Spreading factor N");
    single->add_option("--b", s_extend, "Extension factor B");
    single->add_option("--snr", s_snr, "SNR in dB");
    single->add_option("--initial", s_initial, "Initial detector: mf|random");
    single->add_option("--schedule", s_stages, "Cascade group sizes");

    // limits
    CommonOpts c6;
    std::string l_alpha = "0,0.2,0.4,0.6,0.8,1,1.2,1.4";
    std::string l_snr = "11";
    bool l_tanaka = true;
    CLI::App* limits =
        app.add_subcommand("limits", "Large-system limit curves only");
    add_common(limits, c6);
    limits->add_option("--alpha", l_alpha, "Load grid (list or range)");
    limits->add_option("--snr", l_snr, "SNR grid (list or range)");
    limits->add_flag("--tanaka,!--no-tanaka", l_tanaka,
                     "Include the replica GML curve");

    std::vector<std::string> args =
        merge_config_file(std::vector<std::string>(argv + 1, argv + argc));
    std::reverse(args.begin(), args.end());  // CLI11's vector parse order
    app.parse(std::move(args));

    if (fig1->parsed())
      return run_fig1(c1, f1_bk, f1_users, f1_alpha, f1_snr, f1_initial,
                      f1_rule, f1_detectors, f1_tanaka);
    if (fig2->parsed())
      return run_fig2(c2, f2_snr, f2_bk, f2_users, f2_alpha, f2_initial,
                      f2_rule, f2_detectors, f2_tanaka);
    if (fig3->parsed())
      return run_fig3(c3, f3_alpha, f3_users, f3_snr, f3_initial, f3_rule,
                      f3_detectors, f3_bk_cap, f3_extended, f3_tanaka);
    if (theorems->parsed())
      return run_theorems(c4, t_which, t_alpha, t_k, t_m1, t_m2, t_m, t_c,
                          t_trials);
    if (single->parsed())
      return run_single(c5, s_users, s_spreading, s_extend, s_snr, s_initial,
                        s_stages);
    if (limits->parsed()) return run_limits(c6, l_alpha, l_snr, l_tanaka);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}

// qlrs: QLRS-CDMA simulation and likelihood ascent search detection
// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "qlrs/channel.hpp"
#include "qlrs/las.hpp"
#include "qlrs/refdet.hpp"

namespace {

using namespace qlrs;

struct Fixture {
  ChannelInstance inst;
  TransmitRecord rec;
};

Fixture make_fixture(int users, int spreading, int extend, double snr_db) {
  SystemConfig cfg;
  cfg.users = users;
  cfg.spreading = spreading;
  cfg.extend = extend;
  cfg.snr_db = snr_db;
  RngStream spread(1, 0, 0, StreamPurpose::Spreading);
  RngStream bits(1, 0, 0, StreamPurpose::Bits);
  RngStream noise(1, 0, 0, StreamPurpose::Noise);
  Fixture f{make_instance(cfg, spread), {}};
  f.rec = transmit(f.inst, random_bits(bits, f.inst.bits()), noise);
  return f;
}

void BM_WslasTrial(benchmark::State& state) {
  const int extend = static_cast<int>(state.range(0)) / 8;
  const Fixture f = make_fixture(8, 10, extend, 11.0);
  const Schedule sched = Schedule::wslas();
  long long flips = 0;
  for (auto _ : state) {
    const DetectionResult det = run_las(f.rec.y, f.inst, sched);
    flips += det.flips;
    benchmark::DoNotOptimize(det.b.data());
  }
  state.counters["flips/trial"] =
      benchmark::Counter(static_cast<double>(flips) / state.iterations());
  state.SetItemsProcessed(state.iterations() * f.inst.bits());
}
BENCHMARK(BM_WslasTrial)->Arg(128)->Arg(512)->Arg(1024);

void BM_TransmitMatchedFilter(benchmark::State& state) {
  const int extend = static_cast<int>(state.range(0)) / 8;
  const Fixture f = make_fixture(8, 10, extend, 11.0);
  RngStream noise(2, 0, 0, StreamPurpose::Noise);
  for (auto _ : state) {
    const TransmitRecord rec = transmit(f.inst, f.rec.b, noise);
    benchmark::DoNotOptimize(rec.y.data());
  }
  state.SetItemsProcessed(state.iterations() * f.inst.bits());
}
BENCHMARK(BM_TransmitMatchedFilter)->Arg(512)->Arg(1024);

void BM_GplasStageSweep(benchmark::State& state) {
  const Fixture f = make_fixture(8, 10, 64, 11.0);
  const Eigen::VectorXd b0 = mf_detect(f.rec.y);
  for (auto _ : state) {
    LikelihoodState st = make_state(f.rec.y, b0, f.inst.A, f.inst.H);
    gplas_stage(st, static_cast<int>(state.range(0)), f.inst.H);
    benchmark::DoNotOptimize(st.omega);
  }
}
BENCHMARK(BM_GplasStageSweep)->Arg(1)->Arg(4)->Arg(8);

void BM_MmseDf(benchmark::State& state) {
  const int extend = static_cast<int>(state.range(0)) / 8;
  const Fixture f = make_fixture(8, 10, extend, 11.0);
  const LinearDetector mmse =
      LinearDetector::mmse(f.inst.R, f.inst.A, f.inst.sigma);
  const Eigen::MatrixXd& prep = mmse.matrix();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        mmse_df_detect(f.rec.y, f.inst.R, f.inst.A, f.inst.sigma, &prep)
            .data());
  }
}
BENCHMARK(BM_MmseDf)->Arg(128)->Arg(512);

void BM_GmlExhaustive(benchmark::State& state) {
  const int users = static_cast<int>(state.range(0));
  SystemConfig cfg;
  cfg.users = users;
  cfg.spreading = users * 10;
  cfg.snr_db = 14.0;
  RngStream spread(3, 0, 0, StreamPurpose::Spreading);
  RngStream bits(3, 0, 0, StreamPurpose::Bits);
  RngStream noise(3, 0, 0, StreamPurpose::Noise);
  const ChannelInstance inst = make_instance(cfg, spread);
  const TransmitRecord rec =
      transmit(inst, random_bits(bits, users), noise);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        gml_exhaustive(rec.y, inst.A, inst.H, users).data());
  }
}
BENCHMARK(BM_GmlExhaustive)->Arg(12)->Arg(16);

}  // namespace

BENCHMARK_MAIN();

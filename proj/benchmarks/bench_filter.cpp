// Cost of the per-step filter kernels.
#include <benchmark/benchmark.h>

#include <random>

#include "dvlnav/error_dynamics.hpp"
#include "dvlnav/sim.hpp"

using namespace dvlnav;

namespace {

NavState moving_state() {
  NavState s;
  s.time = 10.0;
  s.pos = Geodetic{30.0 * kDeg, 120.0 * kDeg, 30.0};
  s.vel_ned = Vec3(3.0, 1.0, 0.1);
  s.c_bn = dcm_from_euler(0.01, -0.02, 0.4);
  return s;
}

ImuSample sample() { return ImuSample{10.01, Vec3(1e-3, -2e-3, 0.05), Vec3(0.1, 0.05, -9.79)}; }

StateMat spd(unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  StateMat a;
  for (int i = 0; i < kStateDim; ++i)
    for (int j = 0; j < kStateDim; ++j) a(i, j) = u(gen);
  return a * a.transpose() + StateMat::Identity();
}

FilterState filter_state() {
  FilterState fs;
  fs.nav = moving_state();
  fs.err.P = 1e-4 * spd(3);
  return fs;
}

void BM_Mechanize(benchmark::State& st) {
  NavState s = moving_state();
  ImuSample imu = sample();
  for (auto _ : st) {
    imu.time = s.time + 0.01;
    s = mechanize(s, imu, 0.01);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_Mechanize);

void BM_BuildAndDiscretize(benchmark::State& st) {
  const NavState s = moving_state();
  const ProcessNoiseSpec q = process_noise_from(NoiseSpec::table_one());
  for (auto _ : st) {
    const ContinuousModel m = build_FG(s, sample());
    benchmark::DoNotOptimize(discretize(m.F, m.G, q.psd(), 0.01));
  }
}
BENCHMARK(BM_BuildAndDiscretize);

void BM_CongruenceStructured(benchmark::State& st) {
  const ContinuousModel m = build_FG(moving_state(), sample());
  const StateMat Phi = StateMat::Identity() + m.F * 0.01;
  const StateMat P = spd(1);
  for (auto _ : st) benchmark::DoNotOptimize(congruence(Phi, P));
}
BENCHMARK(BM_CongruenceStructured);

void BM_CongruenceDense(benchmark::State& st) {
  const ContinuousModel m = build_FG(moving_state(), sample());
  const StateMat Phi = StateMat::Identity() + m.F * 0.01;
  const StateMat P = spd(1);
  for (auto _ : st) {
    StateMat out = Phi * P * Phi.transpose();
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_CongruenceDense);

void BM_ExpectationTerm(benchmark::State& st) {
  const Mat3 A = Vec3(1e-4, 2e-4, 3e-4).asDiagonal();
  const Mat3 P = spd(2).topLeftCorner<3, 3>() * 1e-6;
  for (auto _ : st) benchmark::DoNotOptimize(attitude_expectation_term(A, P));
}
BENCHMARK(BM_ExpectationTerm);

void BM_Observe(benchmark::State& st) {
  const FilterState fs = filter_state();
  const DvlSample d{10.0, Vec3(3.1, 0.2, 0.1), Vec3::Constant(0.04)};
  const Vec3 lever(0.8, 0.0, 0.4);
  const auto v = static_cast<VariantId>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(observe(v, fs, sample(), d, lever));
}
BENCHMARK(BM_Observe)->DenseRange(0, 3);

void BM_Update(benchmark::State& st) {
  const FilterState fs = filter_state();
  const DvlSample d{10.0, Vec3(3.1, 0.2, 0.1), Vec3::Constant(0.04)};
  const ObservationBundle ob = observe(VariantId::kAECP, fs, sample(), d, Vec3(0.8, 0, 0.4));
  for (auto _ : st) benchmark::DoNotOptimize(update(fs, ob.z, ob.H, ob.R));
}
BENCHMARK(BM_Update);

}  // namespace
BENCHMARK_MAIN();

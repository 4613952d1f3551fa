#include <gtest/gtest.h>

#include <numeric>

#include "dvlnav/sim.hpp"
#include "test_support.hpp"

using namespace dvlnav;

namespace {

Segment seg(SegmentType type, double duration, double target = 0.0) {
  Segment s;
  s.type = type;
  s.duration = duration;
  s.target_speed = target;
  return s;
}

ScenarioConfig short_config(std::vector<Segment> segments, double align = 10.0) {
  ScenarioConfig cfg = ScenarioConfig::paper_default();
  cfg.align_duration = align;
  cfg.profile.segments = std::move(segments);
  cfg.duration = align + cfg.profile.total_duration();
  return cfg;
}

NoiseSpec silent(NoiseSpec n) {
  n.gyro_bias = n.gyro_arw = n.gyro_sf = 0.0;
  n.accel_bias = n.accel_vrw = n.accel_sf = 0.0;
  return n;
}

std::size_t index_at(const std::vector<TruthSample>&, double t) {
  return static_cast<std::size_t>(std::llround(t * 100.0));
}

}  // namespace

TEST(Truth, StraightSegmentDisplacement) {
  // Cardinal headings keep the flat local projection exact to first order.
  for (const double heading : {0.0, kPi / 2}) {
    ScenarioConfig cfg = short_config({seg(SegmentType::kAccelerate, 10.0, 2.0),
                                       seg(SegmentType::kStraight, 100.0)});
    cfg.initial_heading = heading;
    const auto truth = generate_truth(cfg);
    ASSERT_EQ(truth.size(), 12001u);
    const TruthSample& a = truth[index_at(truth, 20.0)];
    const TruthSample& b = truth.back();
    const Vec3 d = local_ned(a.nav.pos, b.nav.pos);
    const Vec3 expect = 200.0 * Vec3(std::cos(heading), std::sin(heading), 0);
    EXPECT_LT((d - expect).norm(), 1e-6 * 200.0) << heading;
    EXPECT_NEAR(b.nav.vel_ned.norm(), 2.0, 1e-12);
    EXPECT_NEAR(wrap_pi(b.euler.z() - heading), 0.0, 1e-12);
  }
}

TEST(Truth, FullTurnClosesTheCircle) {
  Segment turn = seg(SegmentType::kCoordinatedTurn, 120.0);
  turn.turn_rate = 3.0 * kDeg;
  const ScenarioConfig cfg =
      short_config({seg(SegmentType::kAccelerate, 10.0, 2.0), turn, seg(SegmentType::kStraight, 1)});
  const auto truth = generate_truth(cfg);
  const TruthSample& a = truth[index_at(truth, 20.0)];
  const TruthSample& b = truth[index_at(truth, 140.0)];
  EXPECT_LT(local_ned(a.nav.pos, b.nav.pos).norm(), 0.01);
  EXPECT_NEAR(wrap_pi(b.euler.z() - a.euler.z()), 0.0, 1e-9);
  // Halfway round the heading is reversed and the vehicle sits one diameter east.
  const TruthSample& h = truth[index_at(truth, 80.0)];
  EXPECT_NEAR(std::abs(wrap_pi(h.euler.z() - a.euler.z())), kPi, 1e-9);
  const double diameter = 2.0 * 2.0 / (3.0 * kDeg);
  EXPECT_NEAR(local_ned(a.nav.pos, h.nav.pos).y(), diameter, 0.01);
}

TEST(Truth, StaticAlignmentIsStatic) {
  const ScenarioConfig cfg = short_config({seg(SegmentType::kStatic, 5.0)}, 30.0);
  const auto truth = generate_truth(cfg);
  for (const TruthSample& s : truth) {
    EXPECT_EQ(s.nav.vel_ned, Vec3::Zero());
    EXPECT_EQ(s.nav.c_bn, truth.front().nav.c_bn);
    EXPECT_EQ(s.nav.pos, cfg.origin);
  }
}

TEST(Truth, DepthChangesOnlyInDives) {
  ScenarioConfig cfg = ScenarioConfig::paper_default();
  cfg.duration = 1200.0;
  const auto truth = generate_truth(cfg);
  const double dive_end = cfg.align_duration + 100.0;
  EXPECT_NEAR(truth[index_at(truth, dive_end)].nav.pos.depth, 30.0, 1e-6);
  for (std::size_t k = index_at(truth, dive_end); k < truth.size(); ++k) {
    EXPECT_NEAR(truth[k].nav.pos.depth, 30.0, 1e-6);
    EXPECT_NEAR(truth[k].euler.y(), 0.0, 1e-15);
  }
  EXPECT_EQ(truth[index_at(truth, cfg.align_duration)].nav.pos.depth, 0.0);
}

TEST(Truth, ProfileValidation) {
  Segment jump = seg(SegmentType::kStraight, 10.0);
  jump.speed = 3.0;
  EXPECT_THROW(generate_truth(short_config({seg(SegmentType::kAccelerate, 10, 2), jump})),
               ProfileDiscontinuity);
  EXPECT_THROW(check_profile({{seg(SegmentType::kAccelerate, 10, 2),
                               seg(SegmentType::kStatic, 10)}},
                             0.0),
               ProfileDiscontinuity);
  EXPECT_THROW(check_profile({{seg(SegmentType::kDecelerate, 10, 1)}}, 0.0),
               std::invalid_argument);
  EXPECT_THROW(check_profile({{seg(SegmentType::kStraight, 0.0)}}, 0.0), std::invalid_argument);
  Segment stuck = seg(SegmentType::kDive, 10.0);
  stuck.depth_change = 5.0;
  EXPECT_THROW(check_profile({{stuck}}, 0.0), std::invalid_argument);
  EXPECT_NO_THROW(check_profile(default_profile(3400.0), 0.0));

  ScenarioConfig cfg = short_config({seg(SegmentType::kStraight, 10.0)});
  cfg.align_duration = cfg.duration;
  EXPECT_THROW(generate_truth(cfg), std::invalid_argument);
  cfg = short_config({seg(SegmentType::kStraight, 10.0)});
  cfg.duration += 5.0;
  EXPECT_THROW(generate_truth(cfg), std::invalid_argument);
}

TEST(Truth, DefaultProfileCoversNavigationPhase) {
  const ScenarioConfig cfg = ScenarioConfig::paper_default();
  EXPECT_DOUBLE_EQ(cfg.profile.total_duration(), 3400.0);
  EXPECT_DOUBLE_EQ(extend_profile(cfg.profile, 3500.0).total_duration(), 3500.0);
  EXPECT_EQ(extend_profile(cfg.profile, 3400.0).segments.size(), cfg.profile.segments.size());
  EXPECT_EQ(segment_type_name(SegmentType::kCoordinatedTurn), "coordinated_turn");
  EXPECT_EQ(parse_segment_type("dive"), SegmentType::kDive);
}

TEST(Imu, StaticOutputIsGravityReactionAndEarthRate) {
  ScenarioConfig cfg = short_config({seg(SegmentType::kStatic, 1.0)});
  cfg.initial_heading = 1.1;
  const auto truth = generate_truth(cfg);
  const auto imu = synthesize_imu(truth, silent(cfg.noise), 1);
  ASSERT_EQ(imu.size(), truth.size() - 1);
  const Mat3& c = truth.front().nav.c_bn;
  const EarthQuantities e = earth_model(cfg.origin, Vec3::Zero());
  for (const ImuSample& s : imu) {
    EXPECT_LT((s.accel + c.transpose() * e.gravity_n).norm(), 1e-12);
    EXPECT_LT((s.gyro - c.transpose() * e.omega_ie_n).norm(), 1e-15);
  }
}

TEST(Imu, BiasMeanWithinSamplingBound) {
  ScenarioConfig cfg = short_config({seg(SegmentType::kStatic, 990.0)});
  const auto truth = generate_truth(cfg);
  NoiseSpec n = silent(cfg.noise);
  n.gyro_bias = 1e-4;
  n.gyro_arw = cfg.noise.gyro_arw * 100.0;
  const auto ideal = synthesize_imu(truth, silent(n), 3);
  const auto noisy = synthesize_imu(truth, n, 3);
  Vec3 sum = Vec3::Zero();
  for (std::size_t k = 0; k < noisy.size(); ++k) sum += noisy[k].gyro - ideal[k].gyro;
  const double N = static_cast<double>(noisy.size());
  const double sigma = n.gyro_arw * std::sqrt(n.imu_rate);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(sum(i) / N, n.gyro_bias, 3.0 * sigma / std::sqrt(N));
}

TEST(Imu, MechanizationRoundTrip) {
  ScenarioConfig cfg = ScenarioConfig::paper_default();
  cfg.align_duration = 0.0;
  cfg.duration = 100.0;
  Segment turn = seg(SegmentType::kCoordinatedTurn, 50.0);
  turn.turn_rate = 3.0 * kDeg;
  Segment dive = seg(SegmentType::kDive, 30.0, 3.0);
  dive.depth_change = 10.0;
  cfg.profile.segments = {dive, turn, seg(SegmentType::kStraight, 20.0)};
  const auto truth = generate_truth(cfg);
  const auto imu = synthesize_imu(truth, silent(cfg.noise), 1);
  NavState s = truth.front().nav;
  double worst = 0.0;
  for (std::size_t k = 0; k < imu.size(); ++k) {
    s = mechanize(s, imu[k], imu[k].time - s.time);
    worst = std::max(worst, local_ned(truth[k + 1].nav.pos, s.pos).norm());
  }
  EXPECT_LT(worst, 0.05);
}

TEST(Dvl, ZeroLeverNoiseFreeProjection) {
  ScenarioConfig cfg = short_config({seg(SegmentType::kAccelerate, 10.0, 2.0),
                                     seg(SegmentType::kStraight, 20.0)});
  cfg.initial_heading = 0.7;
  const auto truth = generate_truth(cfg);
  NoiseSpec n = cfg.noise;
  n.dvl_pct = 0.0;
  n.dvl_floor = 0.0;
  const auto dvl = synthesize_dvl(truth, Vec3::Zero(), n, 1);
  ASSERT_EQ(dvl.size(), 80u);
  for (const DvlSample& d : dvl) {
    const TruthSample& t = truth[index_at(truth, d.time)];
    EXPECT_EQ(d.time, t.nav.time);
    if (d.time > 20.0) {
      EXPECT_LT((d.vel_b - t.nav.c_bn.transpose() * t.nav.vel_ned).norm(), 1e-15);
    }
  }
}

TEST(Dvl, ReportedSigmaAtTwoMetresPerSecond) {
  const ScenarioConfig cfg = short_config({seg(SegmentType::kAccelerate, 10.0, 2.0),
                                           seg(SegmentType::kStraight, 20.0)});
  const auto truth = generate_truth(cfg);
  const auto dvl = synthesize_dvl(truth, Vec3::Zero(), cfg.noise, 1);
  const DvlSample& d = dvl.back();
  EXPECT_NEAR(d.sigma_b.x(), 0.0115 * 2.0 + 0.002, 1e-12);
  EXPECT_EQ(d.sigma_b.x(), d.sigma_b.y());
  EXPECT_EQ(d.sigma_b.x(), d.sigma_b.z());

  NoiseSpec comp = cfg.noise;
  comp.dvl_sigma = NoiseSpec::DvlSigma::kComponent;
  const DvlSample c = synthesize_dvl(truth, Vec3::Zero(), comp, 1).back();
  EXPECT_NEAR(c.sigma_b.x(), 0.025, 1e-12);
  EXPECT_NEAR(c.sigma_b.y(), 0.002, 1e-12);
}

TEST(Dvl, EmpiricalVarianceMatchesReportedSigma) {
  ScenarioConfig cfg = short_config({seg(SegmentType::kAccelerate, 20.0, 2.0),
                                     seg(SegmentType::kStraight, 1000.0)});
  cfg.noise.dvl_rate = 100.0;
  const auto truth = generate_truth(cfg);
  NoiseSpec quiet = cfg.noise;
  quiet.dvl_pct = 0.0;
  quiet.dvl_floor = 0.0;
  const auto clean = synthesize_dvl(truth, cfg.lever, quiet, 9);
  const auto noisy = synthesize_dvl(truth, cfg.lever, cfg.noise, 9);
  ASSERT_EQ(clean.size(), noisy.size());
  Vec3 ss = Vec3::Zero(), s2 = Vec3::Zero();
  std::size_t n = 0;
  for (std::size_t k = 0; k < noisy.size(); ++k) {
    if (noisy[k].time <= 30.0) continue;
    const Vec3 e = noisy[k].vel_b - clean[k].vel_b;
    ss += e.cwiseAbs2();
    s2 += noisy[k].sigma_b.cwiseAbs2();
    ++n;
  }
  ASSERT_GE(n, 99000u);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(ss(i) / s2(i), 1.0, 0.02);
}

TEST(Scenario, NoiseFreeRunStaysOnTruth) {
  // Perfect sensors; the DVL still reports a small sigma so R is invertible.
  ScenarioConfig cfg = ScenarioConfig::paper_default();
  cfg.duration = 1500.0;
  cfg.noise = silent(cfg.noise);
  cfg.noise.dvl_pct = 0.0;
  cfg.noise.dvl_floor = 0.0;
  cfg.inject_initial_error = false;
  const auto truth = generate_truth(cfg);
  SensorStreams s = synthesize_sensors(cfg, truth);
  for (DvlSample& d : s.dvl) d.sigma_b = Vec3::Constant(1e-3);
  cfg.noise.dvl_floor = 1e-3;
  const ScenarioResult r = run_scenario(cfg, truth, s);
  ASSERT_EQ(r.variants.size(), 4u);
  for (const VariantResult& v : r.variants) {
    ASSERT_FALSE(v.errors.pos.empty());
    double worst = 0.0;
    for (const Vec3& e : v.errors.pos) worst = std::max(worst, e.norm());
    EXPECT_LT(worst, 1e-3) << variant_name(v.variant);
  }
}

TEST(Scenario, DeterministicAndFair) {
  ScenarioConfig cfg = ScenarioConfig::paper_default();
  cfg.duration = 700.0;
  cfg.seed = 11;
  const auto truth = generate_truth(cfg);
  const SensorStreams s1 = synthesize_sensors(cfg, truth);
  const SensorStreams s2 = synthesize_sensors(cfg, truth);
  ASSERT_EQ(s1.imu.size(), s2.imu.size());
  for (std::size_t k = 0; k < s1.imu.size(); ++k) {
    ASSERT_EQ(s1.imu[k].gyro, s2.imu[k].gyro);
    ASSERT_EQ(s1.imu[k].accel, s2.imu[k].accel);
  }
  const ScenarioResult a = run_scenario(cfg, truth, s1);
  const ScenarioResult b = run_scenario(cfg);
  ASSERT_EQ(a.variants.size(), b.variants.size());
  for (std::size_t i = 0; i < a.variants.size(); ++i) {
    const auto& ea = a.variants[i].errors;
    const auto& eb = b.variants[i].errors;
    ASSERT_EQ(ea.size(), eb.size());
    for (std::size_t k = 0; k < ea.size(); ++k) {
      ASSERT_EQ(ea.pos[k], eb.pos[k]);
      ASSERT_EQ(ea.att[k], eb.att[k]);
    }
  }
  cfg.seed = 12;
  const SensorStreams s3 = synthesize_sensors(cfg, truth);
  EXPECT_NE(s3.imu[5].gyro, s1.imu[5].gyro);
}

TEST(Scenario, InitialErrorInjection) {
  ScenarioConfig cfg = ScenarioConfig::paper_default();
  const NavState truth = make_truth(600.0, cfg.origin, Vec3::Zero(), Vec3(0, 0, 0.3)).nav;
  cfg.inject_initial_error = false;
  const NavState same = initial_nav_state(cfg, truth);
  EXPECT_EQ(same.c_bn, truth.c_bn);
  cfg.inject_initial_error = true;
  double pos2 = 0.0;
  const int n = 400;
  for (int s = 1; s <= n; ++s) {
    cfg.seed = static_cast<std::uint64_t>(s);
    const NavState est = initial_nav_state(cfg, truth);
    pos2 += local_ned(truth.pos, est.pos).squaredNorm();
  }
  // Three axes of 1 m each.
  EXPECT_NEAR(pos2 / n, 3.0, 0.5);
}

TEST(Scenario, ReplayWithoutTruthNeedsInitialState) {
  ScenarioConfig cfg = ScenarioConfig::paper_default();
  EXPECT_THROW(run_variant(VariantId::kBaseline, cfg, SensorStreams{}, nullptr),
               std::invalid_argument);
}

TEST(Scenario, InitialCovarianceMatchesSpec) {
  const ScenarioConfig cfg = ScenarioConfig::paper_default();
  const StateMat P = initial_covariance(cfg.initial_error, cfg.noise);
  EXPECT_DOUBLE_EQ(P(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(P(idx::kVel, idx::kVel), 0.01);
  EXPECT_DOUBLE_EQ(P(idx::kAtt + 2, idx::kAtt + 2), std::pow(0.5 * kDeg, 2));
  EXPECT_DOUBLE_EQ(P(idx::kGyroBias, idx::kGyroBias), std::pow(cfg.noise.gyro_bias, 2));
  EXPECT_TRUE((P - StateMat(P.diagonal().asDiagonal())).isZero(0.0));
  const ProcessNoiseSpec q = process_noise_from(cfg.noise);
  EXPECT_DOUBLE_EQ(q.gyro_arw, cfg.noise.gyro_arw);
  EXPECT_DOUBLE_EQ(q.gyro_bias_rw * q.gyro_bias_rw, 1e-12 * cfg.noise.gyro_bias * cfg.noise.gyro_bias);
}

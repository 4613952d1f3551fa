#include "dvlnav/sim.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace dvlnav {

namespace {

constexpr double kTimeEps = 1e-9;

enum class Stream : std::uint32_t { kImu = 1, kDvl = 2, kInit = 3, kBias = 4 };

std::mt19937_64 make_rng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

Vec3 gaussian3(std::mt19937_64& rng, std::normal_distribution<double>& n) {
  const double a = n(rng);
  const double b = n(rng);
  const double c = n(rng);
  return {a, b, c};
}

struct CompiledSegment {
  Segment seg;
  double t0 = 0.0;
  double u0 = 0.0;
  double psi0 = 0.0;
  double pitch_peak = 0.0;  // dive only, signed [rad]
};

struct Kinematics {
  double speed;
  double heading;
  double pitch;
};

double speed_at(const CompiledSegment& s, double tau) {
  switch (s.seg.type) {
    case SegmentType::kStatic: return 0.0;
    case SegmentType::kAccelerate:
    case SegmentType::kDecelerate:
    case SegmentType::kDive:
      return s.u0 + (s.seg.target_speed - s.u0) * tau / s.seg.duration;
    default: return s.u0;
  }
}

Kinematics kinematics_at(const CompiledSegment& s, double tau) {
  Kinematics k{speed_at(s, tau), s.psi0, 0.0};
  if (s.seg.type == SegmentType::kCoordinatedTurn) k.heading = s.psi0 + s.seg.turn_rate * tau;
  if (s.seg.type == SegmentType::kDive) {
    const double w = std::sin(kPi * tau / s.seg.duration);
    k.pitch = -s.pitch_peak * w * w;
  }
  return k;
}

Vec3 velocity_of(const Kinematics& k) {
  const double cp = std::cos(k.pitch);
  // + 0.0 keeps static samples at +0 rather than -0.
  return k.speed * Vec3(cp * std::cos(k.heading), cp * std::sin(k.heading), -std::sin(k.pitch)) +
         Vec3::Zero();
}

// Depth gained over a dive with the given peak pitch (positive = nose down).
double dive_depth(const CompiledSegment& s, double peak) {
  constexpr int kIntervals = 2000;
  const double h = s.seg.duration / kIntervals;
  double sum = 0.0;
  for (int i = 0; i <= kIntervals; ++i) {
    const double tau = i * h;
    const double w = std::sin(kPi * tau / s.seg.duration);
    const double f = speed_at(s, tau) * std::sin(peak * w * w);
    const double weight = (i == 0 || i == kIntervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    sum += weight * f;
  }
  return sum * h / 3.0;
}

double solve_dive_pitch(const CompiledSegment& s) {
  const double target = s.seg.depth_change;
  if (target == 0.0) return 0.0;
  constexpr double kMaxPitch = 1.2;
  const double sign = target > 0.0 ? 1.0 : -1.0;
  if (std::abs(dive_depth(s, sign * kMaxPitch)) < std::abs(target)) {
    throw std::invalid_argument("dive segment cannot reach the requested depth change");
  }
  double lo = 0.0, hi = kMaxPitch;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (std::abs(dive_depth(s, sign * mid)) < std::abs(target)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return sign * 0.5 * (lo + hi);
}

// Segment indices in error messages are positions within `profile`.
std::vector<CompiledSegment> compile_profile(const TrajectoryProfile& profile,
                                             double initial_heading, double t_start) {
  std::vector<CompiledSegment> out;
  double t = t_start, u = 0.0, psi = initial_heading;
  for (std::size_t i = 0; i < profile.segments.size(); ++i) {
    const Segment& seg = profile.segments[i];
    const std::string where = "segment " + std::to_string(i) + " (" +
                              std::string(segment_type_name(seg.type)) + ")";
    if (!(seg.duration > 0.0) || !std::isfinite(seg.duration)) {
      throw std::invalid_argument(where + " must have a positive duration");
    }
    CompiledSegment c{seg, t, u, psi, 0.0};
    const double asserted =
        seg.speed ? *seg.speed : (seg.type == SegmentType::kStatic ? 0.0 : u);
    if (std::abs(asserted - u) > 1e-9) {
      std::ostringstream os;
      os << "velocity jump of " << std::abs(asserted - u) << " m/s entering " << where;
      throw ProfileDiscontinuity(os.str());
    }
    if (seg.target_speed < 0.0 || !std::isfinite(seg.target_speed)) {
      throw std::invalid_argument(where + " target speed must be non-negative");
    }
    if (seg.type == SegmentType::kAccelerate && !(seg.target_speed > u)) {
      throw std::invalid_argument(where + " target speed must exceed the entry speed");
    }
    if (seg.type == SegmentType::kDecelerate && !(seg.target_speed < u)) {
      throw std::invalid_argument(where + " target speed must be below the entry speed");
    }
    if (seg.type == SegmentType::kDive) {
      if (u == 0.0 && seg.target_speed == 0.0 && seg.depth_change != 0.0) {
        throw std::invalid_argument(where + " cannot change depth at zero speed");
      }
      c.pitch_peak = solve_dive_pitch(c);
    }
    const Kinematics end = kinematics_at(c, seg.duration);
    t += seg.duration;
    u = end.speed;
    psi = end.heading;
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string_view segment_type_name(SegmentType t) {
  switch (t) {
    case SegmentType::kStatic: return "static";
    case SegmentType::kStraight: return "straight";
    case SegmentType::kAccelerate: return "accelerate";
    case SegmentType::kDecelerate: return "decelerate";
    case SegmentType::kCoordinatedTurn: return "coordinated_turn";
    case SegmentType::kDive: return "dive";
  }
  return "?";
}

std::optional<SegmentType> parse_segment_type(std::string_view s) {
  for (auto t : {SegmentType::kStatic, SegmentType::kStraight, SegmentType::kAccelerate,
                 SegmentType::kDecelerate, SegmentType::kCoordinatedTurn, SegmentType::kDive}) {
    if (segment_type_name(t) == s) return t;
  }
  return std::nullopt;
}

double TrajectoryProfile::total_duration() const {
  double sum = 0.0;
  for (const Segment& s : segments) sum += s.duration;
  return sum;
}

NoiseSpec NoiseSpec::table_one() {
  constexpr double kG = 9.80665;
  NoiseSpec n;
  n.gyro_bias = 0.01 * kDeg / 3600.0;
  n.gyro_arw = 0.01 * kDeg / 60.0;
  n.gyro_sf = 100e-6;
  n.accel_bias = 50e-6 * kG;
  n.accel_vrw = 10e-6 * kG;
  n.accel_sf = 100e-6;
  n.dvl_pct = 0.0115;
  n.dvl_floor = 0.002;
  n.imu_rate = 100.0;
  n.dvl_rate = 2.0;
  return n;
}

TrajectoryProfile default_profile(double nav_duration) {
  TrajectoryProfile p;
  auto add = [&p](SegmentType type, double dur) -> Segment& {
    Segment s;
    s.type = type;
    s.duration = dur;
    p.segments.push_back(s);
    return p.segments.back();
  };
  Segment& dive = add(SegmentType::kDive, 100.0);
  dive.target_speed = 2.0;
  dive.depth_change = 30.0;
  add(SegmentType::kAccelerate, 200.0).target_speed = 4.0;
  constexpr double kTurnRate = 3.0 * kDeg;
  const double turn_time = 90.0 / 3.0;
  for (int i = 0; i < 4; ++i) {
    add(SegmentType::kCoordinatedTurn, turn_time).turn_rate = kTurnRate;
    if (i < 3) add(SegmentType::kStraight, 500.0);
  }
  add(SegmentType::kDecelerate, 200.0).target_speed = 2.0;
  const double rest = nav_duration - p.total_duration();
  if (rest > 0.0) add(SegmentType::kStraight, rest);
  return p;
}

void check_profile(const TrajectoryProfile& profile, double initial_heading) {
  (void)compile_profile(profile, initial_heading, 0.0);
}

TrajectoryProfile extend_profile(TrajectoryProfile profile, double nav_duration) {
  const double rest = nav_duration - profile.total_duration();
  if (rest > 1e-9) {
    Segment s;
    s.type = SegmentType::kStraight;
    s.duration = rest;
    profile.segments.push_back(s);
  }
  return profile;
}

ScenarioConfig ScenarioConfig::paper_default() {
  ScenarioConfig c;
  c.duration = 4000.0;
  c.align_duration = 600.0;
  c.origin = Geodetic{30.0 * kDeg, 120.0 * kDeg, 0.0};
  c.initial_heading = 0.0;
  c.profile = default_profile(c.duration - c.align_duration);
  c.lever = Vec3(0.8, 0.0, 0.4);
  c.noise = NoiseSpec::table_one();
  return c;
}

TruthSample make_truth(double t, const Geodetic& pos, const Vec3& vel, const Vec3& euler) {
  TruthSample s;
  s.nav.time = t;
  s.nav.pos = pos;
  s.nav.vel_ned = vel;
  s.euler = euler;
  s.nav.c_bn = dcm_from_euler(euler.x(), euler.y(), euler.z());
  return s;
}

std::vector<TruthSample> generate_truth(const ScenarioConfig& cfg) {
  const double rate = cfg.noise.imu_rate;
  if (!(cfg.align_duration >= 0.0) || !(cfg.align_duration < cfg.duration)) {
    throw std::invalid_argument("alignment must be shorter than the scenario");
  }
  if (cfg.profile.total_duration() < cfg.duration - cfg.align_duration - 1e-6) {
    throw std::invalid_argument("profile is shorter than the navigation phase");
  }
  std::vector<CompiledSegment> segs;
  if (cfg.align_duration > 0.0) {
    Segment align;
    align.type = SegmentType::kStatic;
    align.duration = cfg.align_duration;
    segs.push_back(CompiledSegment{align, 0.0, 0.0, cfg.initial_heading, 0.0});
  }
  for (const CompiledSegment& c :
       compile_profile(cfg.profile, cfg.initial_heading, cfg.align_duration)) {
    segs.push_back(c);
  }
  const auto n = static_cast<std::size_t>(std::llround(cfg.duration * rate));

  std::vector<TruthSample> truth;
  truth.reserve(n + 1);
  std::size_t si = 0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) / rate;
    while (si + 1 < segs.size() && t > segs[si].t0 + segs[si].seg.duration + kTimeEps) ++si;
    const CompiledSegment& s = segs[si];
    const double tau = std::min(std::max(t - s.t0, 0.0), s.seg.duration);
    const Kinematics kin = kinematics_at(s, tau);
    const Vec3 vel = velocity_of(kin);
    const Vec3 euler(0.0, kin.pitch, wrap_pi(kin.heading));
    Geodetic pos = cfg.origin;
    if (k > 0) {
      const NavState& prev = truth.back().nav;
      pos = integrate_position(prev.pos, prev.vel_ned, vel, t - prev.time);
    }
    truth.push_back(make_truth(t, pos, vel, euler));
  }
  return truth;
}

ImuSample ideal_imu(const NavState& prev, const NavState& cur) {
  const double dt = cur.time - prev.time;
  const EarthQuantities earth = earth_model(prev.pos, prev.vel_ned);
  const Vec3 theta_in = earth.omega_in_n() * dt;
  const Vec3 theta_ib =
      rotation_log(prev.c_bn.transpose() * rotation_exp(theta_in) * cur.c_bn);
  const Mat3 c_mid = midpoint_attitude(prev.c_bn, theta_in, theta_ib);
  const Vec3 coriolis = (2.0 * earth.omega_ie_n + earth.omega_en_n).cross(prev.vel_ned);
  ImuSample s;
  s.time = cur.time;
  s.gyro = theta_ib / dt;
  s.accel = c_mid.transpose() * ((cur.vel_ned - prev.vel_ned) / dt - earth.gravity_n + coriolis);
  return s;
}

std::vector<ImuSample> synthesize_imu(const std::vector<TruthSample>& truth, const NoiseSpec& noise,
                                      std::uint64_t seed) {
  std::mt19937_64 rng = make_rng(seed, Stream::kImu);
  std::normal_distribution<double> normal(0.0, 1.0);

  Vec3 gyro_bias = Vec3::Constant(noise.gyro_bias);
  Vec3 accel_bias = Vec3::Constant(noise.accel_bias);
  Vec3 gyro_sf = Vec3::Constant(noise.gyro_sf);
  Vec3 accel_sf = Vec3::Constant(noise.accel_sf);
  if (noise.redraw_bias) {
    std::mt19937_64 brng = make_rng(seed, Stream::kBias);
    gyro_bias = noise.gyro_bias * gaussian3(brng, normal);
    accel_bias = noise.accel_bias * gaussian3(brng, normal);
    gyro_sf = noise.gyro_sf * gaussian3(brng, normal);
    accel_sf = noise.accel_sf * gaussian3(brng, normal);
  }
  const double gyro_sigma = noise.gyro_arw * std::sqrt(noise.imu_rate);
  const double accel_sigma = noise.accel_vrw * std::sqrt(noise.imu_rate);

  std::vector<ImuSample> out;
  out.reserve(truth.size());
  for (std::size_t k = 1; k < truth.size(); ++k) {
    ImuSample s = ideal_imu(truth[k - 1].nav, truth[k].nav);
    const Vec3 wg = gaussian3(rng, normal);
    const Vec3 wa = gaussian3(rng, normal);
    s.gyro = (Vec3::Ones() + gyro_sf).cwiseProduct(s.gyro) + gyro_bias + gyro_sigma * wg;
    s.accel = (Vec3::Ones() + accel_sf).cwiseProduct(s.accel) + accel_bias + accel_sigma * wa;
    out.push_back(s);
  }
  return out;
}

std::vector<DvlSample> synthesize_dvl(const std::vector<TruthSample>& truth, const Vec3& lever,
                                      const NoiseSpec& noise, std::uint64_t seed) {
  std::mt19937_64 rng = make_rng(seed, Stream::kDvl);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<DvlSample> out;
  if (truth.size() < 2) return out;
  const double t_end = truth.back().nav.time;
  for (std::size_t j = 1;; ++j) {
    const double t = static_cast<double>(j) / noise.dvl_rate;
    if (t > t_end + kTimeEps) break;
    const auto k = static_cast<std::size_t>(std::llround(t * noise.imu_rate));
    if (k == 0 || k >= truth.size()) continue;
    const NavState& cur = truth[k].nav;
    const ImuSample rates = ideal_imu(truth[k - 1].nav, cur);
    const Vec3 omega_in = earth_model(cur.pos, cur.vel_ned).omega_in_n();
    const Vec3 v_center = dvl_center_velocity(cur.vel_ned, cur.c_bn, omega_in, rates.gyro, lever);
    const Vec3 v_b = cur.c_bn.transpose() * v_center;
    DvlSample d;
    d.time = cur.time;
    if (noise.dvl_sigma == NoiseSpec::DvlSigma::kSpeed) {
      d.sigma_b = Vec3::Constant(noise.dvl_pct * v_b.norm() + noise.dvl_floor);
    } else {
      d.sigma_b = (noise.dvl_pct * v_b.cwiseAbs()).array() + noise.dvl_floor;
    }
    d.vel_b = v_b + d.sigma_b.cwiseProduct(gaussian3(rng, normal));
    out.push_back(d);
  }
  return out;
}

SensorStreams synthesize_sensors(const ScenarioConfig& cfg, const std::vector<TruthSample>& truth) {
  SensorStreams s;
  s.imu = synthesize_imu(truth, cfg.noise, cfg.seed);
  s.dvl = synthesize_dvl(truth, cfg.lever, cfg.noise, cfg.seed);
  return s;
}

ProcessNoiseSpec process_noise_from(const NoiseSpec& noise) {
  // Bias and scale-factor states are random constants; the 1e-12 relative
  // driving PSD only keeps their covariance from collapsing to zero.
  constexpr double kConditioning = 1e-6;
  ProcessNoiseSpec q;
  q.gyro_arw = noise.gyro_arw;
  q.accel_vrw = noise.accel_vrw;
  q.gyro_bias_rw = kConditioning * noise.gyro_bias;
  q.accel_bias_rw = kConditioning * noise.accel_bias;
  q.gyro_scale_rw = kConditioning * noise.gyro_sf;
  q.accel_scale_rw = kConditioning * noise.accel_sf;
  return q;
}

StateMat initial_covariance(const InitialErrorSpec& init, const NoiseSpec& noise) {
  StateVec d;
  d.segment<3>(idx::kPos).setConstant(init.pos_sigma * init.pos_sigma);
  d.segment<3>(idx::kVel).setConstant(init.vel_sigma * init.vel_sigma);
  d.segment<3>(idx::kAtt) = init.att_sigma.cwiseAbs2();
  d.segment<3>(idx::kGyroBias).setConstant(noise.gyro_bias * noise.gyro_bias);
  d.segment<3>(idx::kAccelBias).setConstant(noise.accel_bias * noise.accel_bias);
  d.segment<3>(idx::kGyroScale).setConstant(noise.gyro_sf * noise.gyro_sf);
  d.segment<3>(idx::kAccelScale).setConstant(noise.accel_sf * noise.accel_sf);
  return d.asDiagonal();
}

Vec3 local_ned(const Geodetic& origin, const Geodetic& p) {
  const EarthQuantities e = earth_model(origin, Vec3::Zero());
  return {(p.latitude - origin.latitude) * (e.r_meridian - origin.depth),
          wrap_pi(p.longitude - origin.longitude) * (e.r_normal - origin.depth) *
              std::cos(origin.latitude),
          p.depth - origin.depth};
}

NavState initial_nav_state(const ScenarioConfig& cfg, const NavState& truth_at_start) {
  NavState nav = truth_at_start;
  if (!cfg.inject_initial_error) return nav;
  std::mt19937_64 rng = make_rng(cfg.seed, Stream::kInit);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Vec3 dr = cfg.initial_error.pos_sigma * gaussian3(rng, normal);
  const Vec3 dv = cfg.initial_error.vel_sigma * gaussian3(rng, normal);
  const Vec3 phi = cfg.initial_error.att_sigma.cwiseProduct(gaussian3(rng, normal));
  const EarthQuantities e = earth_model(nav.pos, nav.vel_ned);
  nav.pos.latitude += dr.x() / (e.r_meridian - nav.pos.depth);
  nav.pos.longitude = wrap_pi(nav.pos.longitude + dr.y() / ((e.r_normal - nav.pos.depth) *
                                                            std::cos(nav.pos.latitude)));
  nav.pos.depth += dr.z();
  nav.vel_ned += dv;
  nav.c_bn = rotation_exp(-phi) * nav.c_bn;
  return nav;
}

namespace {

Vec3 attitude_error_deg(const Mat3& est, const Vec3& truth_euler) {
  const Vec3 e = euler_from_dcm(est);
  return Vec3(wrap_pi(e.x() - truth_euler.x()), wrap_pi(e.y() - truth_euler.y()),
              wrap_pi(e.z() - truth_euler.z())) /
         kDeg;
}

}  // namespace

VariantResult run_variant(VariantId variant, const ScenarioConfig& cfg,
                          const SensorStreams& sensors, const std::vector<TruthSample>* truth) {
  const double rate = cfg.noise.imu_rate;
  const double half_step = 0.5 / rate;
  const NoiseVec q = process_noise_from(cfg.noise).psd();
  ObservationOptions obs = cfg.observation;
  obs.max_time_skew = 0.5 / cfg.noise.dvl_rate;
  if (obs.gyro_lever_noise && obs.gyro_white_variance == 0.0) {
    obs.gyro_white_variance = cfg.noise.gyro_arw * cfg.noise.gyro_arw * rate;
  }

  std::size_t ti = 0;
  NavState start;
  if (truth != nullptr && !truth->empty()) {
    while (ti + 1 < truth->size() && (*truth)[ti].nav.time < cfg.align_duration - half_step) ++ti;
    start = initial_nav_state(cfg, (*truth)[ti].nav);
  } else if (cfg.initial_state) {
    start = *cfg.initial_state;
    truth = nullptr;
  } else {
    throw std::invalid_argument("run_variant: need truth or an explicit initial state");
  }

  FilterState fs;
  fs.nav = start;
  fs.err.P = initial_covariance(cfg.initial_error, cfg.noise);
  fs.last_update_time = start.time;

  VariantResult result;
  result.variant = variant;

  std::size_t di = 0;
  const auto& dvl = sensors.dvl;
  double epoch = fs.nav.time;
  try {
    for (const ImuSample& raw : sensors.imu) {
      if (raw.time <= fs.nav.time + half_step) continue;
      if (raw.time > cfg.duration + half_step) break;
      epoch = raw.time;
      const double dt = raw.time - fs.nav.time;
      const ImuSample imu = fs.comp.apply(raw);

      const ContinuousModel model = build_FG(fs.nav, imu);
      fs.nav = mechanize(fs.nav, imu, dt);
      const DiscreteModel d = discretize(model.F, model.G, q, dt);
      fs = predict(fs, d.Phi, d.Qd);

      while (di < dvl.size() && dvl[di].time < fs.nav.time - half_step) ++di;
      if (di >= dvl.size() || std::abs(dvl[di].time - fs.nav.time) > half_step) continue;

      const ObservationBundle ob = observe(variant, fs, imu, dvl[di], cfg.lever, obs);
      fs = update(fs, ob.z, ob.H, ob.R);
      fs = feedback(fs);
      ++di;

      result.epochs.push_back(fs.nav.time);
      result.estimates.push_back(fs.nav);
      if (truth != nullptr) {
        while (ti + 1 < truth->size() && (*truth)[ti].nav.time < fs.nav.time - half_step) ++ti;
        const TruthSample& tr = (*truth)[ti];
        result.errors.push_back(fs.nav.time,
                                local_ned(cfg.origin, fs.nav.pos) - local_ned(cfg.origin, tr.nav.pos),
                                fs.nav.vel_ned - tr.nav.vel_ned,
                                attitude_error_deg(fs.nav.c_bn, tr.euler));
      }
    }
  } catch (const std::exception& ex) {
    std::ostringstream os;
    os << variant_name(variant) << " failed at t=" << epoch << ": " << ex.what();
    throw FilterFailure(os.str(), epoch);
  }
  return result;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::vector<TruthSample>& truth,
                            const SensorStreams& sensors) {
  ScenarioResult r;
  for (VariantId v : cfg.variants) r.variants.push_back(run_variant(v, cfg, sensors, &truth));
  return r;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  const std::vector<TruthSample> truth = generate_truth(cfg);
  const SensorStreams sensors = synthesize_sensors(cfg, truth);
  return run_scenario(cfg, truth, sensors);
}

}  // namespace dvlnav

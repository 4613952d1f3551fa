// Trajectory simulation, sensor synthesis and scenario execution.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dvlnav/dvl_observation.hpp"
#include "dvlnav/metrics.hpp"

namespace dvlnav {

/// Sensor error model, SI units.
struct NoiseSpec {
  double gyro_bias = 0.0;   // [rad/s]
  double gyro_arw = 0.0;    // [rad/sqrt(s)]
  double gyro_sf = 0.0;     // [-]
  double accel_bias = 0.0;  // [m/s^2]
  double accel_vrw = 0.0;   // [m/s/sqrt(s)]
  double accel_sf = 0.0;    // [-]
  double dvl_pct = 0.0;     // proportional DVL error [-]
  double dvl_floor = 0.002; // [m/s]
  double imu_rate = 100.0;  // [Hz]
  double dvl_rate = 2.0;    // [Hz]
  bool redraw_bias = false; // draw biases/scale factors per seed instead of fixing them
  // sigma_i = dvl_pct * |v| + floor (speed) or dvl_pct * |v_i| + floor (component).
  enum class DvlSigma { kSpeed, kComponent } dvl_sigma = DvlSigma::kSpeed;

  /// Simulation grade IMU and DVL used for the reference scenario.
  static NoiseSpec table_one();
};

enum class SegmentType { kStatic, kStraight, kAccelerate, kDecelerate, kCoordinatedTurn, kDive };

std::string_view segment_type_name(SegmentType t);
std::optional<SegmentType> parse_segment_type(std::string_view s);

struct Segment {
  SegmentType type = SegmentType::kStraight;
  double duration = 0.0;               // [s]
  std::optional<double> speed;         // asserted entry speed [m/s]
  double target_speed = 0.0;           // accelerate/decelerate/dive exit speed [m/s]
  double turn_rate = 0.0;              // coordinated_turn [rad/s], positive clockwise from above
  double depth_change = 0.0;           // dive [m], positive down
};

/// Motion after the static alignment. Truth generation prepends the
/// alignment as a static segment and cuts the profile at the scenario end.
struct TrajectoryProfile {
  std::vector<Segment> segments;
  double total_duration() const;
};

struct InitialErrorSpec {
  double pos_sigma = 1.0;                                      // [m]
  double vel_sigma = 0.1;                                      // [m/s]
  Vec3 att_sigma = Vec3(0.1 * kDeg, 0.1 * kDeg, 0.5 * kDeg);   // [rad]
};

struct ScenarioConfig {
  double duration = 4000.0;        // [s], includes alignment
  double align_duration = 600.0;   // [s]
  Geodetic origin{30.0 * kDeg, 120.0 * kDeg, 0.0};
  double initial_heading = 0.0;    // [rad]
  TrajectoryProfile profile;
  Vec3 lever = Vec3::Zero();       // IMU -> DVL phase center, body frame [m]
  std::uint64_t seed = 1;
  std::vector<VariantId> variants{kAllVariants.begin(), kAllVariants.end()};
  NoiseSpec noise;
  InitialErrorSpec initial_error;
  ObservationOptions observation;
  bool inject_initial_error = true;
  // Navigation start state when no truth is available (replay of field logs).
  std::optional<NavState> initial_state;

  /// Reference scenario: 4000 s, 600 s alignment, default profile.
  static ScenarioConfig paper_default();
};

/// Default navigation-phase profile: dive, accelerate, four 90 degree turns
/// separated by straights, decelerate, then straight for the remainder.
TrajectoryProfile default_profile(double nav_duration);

/// Appends a straight segment so the profile covers `nav_duration`.
TrajectoryProfile extend_profile(TrajectoryProfile profile, double nav_duration);

class ProfileDiscontinuity : public std::invalid_argument {
 public:
  explicit ProfileDiscontinuity(const std::string& w) : std::invalid_argument(w) {}
};

/// Compiles the profile as generate_truth would (entering from rest) and
/// throws ProfileDiscontinuity or std::invalid_argument on bad segments.
void check_profile(const TrajectoryProfile& profile, double initial_heading);

/// Ground-truth sample. nav.c_bn is always dcm_from_euler(euler).
struct TruthSample {
  NavState nav;
  Vec3 euler = Vec3::Zero();  // roll, pitch, yaw [rad]
};

/// Makes a truth sample whose DCM is derived from the Euler angles.
TruthSample make_truth(double t, const Geodetic& pos, const Vec3& vel, const Vec3& euler);

/// Truth at the IMU rate, t = k / imu_rate for k = 0..N.
std::vector<TruthSample> generate_truth(const ScenarioConfig& cfg);

/// Error-free IMU sample that makes mechanize(prev) land on `cur`.
ImuSample ideal_imu(const NavState& prev, const NavState& cur);

/// IMU stream (one sample per truth step after the first), corrupted per `noise`.
std::vector<ImuSample> synthesize_imu(const std::vector<TruthSample>& truth, const NoiseSpec& noise,
                                      std::uint64_t seed);

/// DVL stream at dvl_rate with per-axis sigma per noise.dvl_sigma.
std::vector<DvlSample> synthesize_dvl(const std::vector<TruthSample>& truth, const Vec3& lever,
                                      const NoiseSpec& noise, std::uint64_t seed);

struct SensorStreams {
  std::vector<ImuSample> imu;
  std::vector<DvlSample> dvl;
};

struct VariantResult {
  VariantId variant = VariantId::kBaseline;
  ErrorSeries errors;              // empty when no truth was supplied
  std::vector<double> epochs;
  std::vector<NavState> estimates; // at each DVL update epoch
};

struct ScenarioResult {
  std::vector<VariantResult> variants;
};

class FilterFailure : public std::runtime_error {
 public:
  FilterFailure(const std::string& w, double epoch) : std::runtime_error(w), epoch_(epoch) {}
  double epoch() const { return epoch_; }

 private:
  double epoch_;
};

ProcessNoiseSpec process_noise_from(const NoiseSpec& noise);
StateMat initial_covariance(const InitialErrorSpec& init, const NoiseSpec& noise);

/// Post-alignment navigation state: the truth sample perturbed by errors
/// drawn from cfg.initial_error (when enabled).
NavState initial_nav_state(const ScenarioConfig& cfg, const NavState& truth_at_start);

/// Runs one variant over recorded or synthesized streams. Truth is optional;
/// without it no error series is produced and cfg.initial_state is required.
VariantResult run_variant(VariantId variant, const ScenarioConfig& cfg,
                          const SensorStreams& sensors, const std::vector<TruthSample>* truth);

/// Generates truth and sensors from cfg and runs every configured variant on
/// the same streams.
ScenarioResult run_scenario(const ScenarioConfig& cfg);
ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::vector<TruthSample>& truth,
                            const SensorStreams& sensors);

SensorStreams synthesize_sensors(const ScenarioConfig& cfg, const std::vector<TruthSample>& truth);

/// Local NED coordinates of `p` relative to `origin` [m].
Vec3 local_ned(const Geodetic& origin, const Geodetic& p);

}  // namespace dvlnav

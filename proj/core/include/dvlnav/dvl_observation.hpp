// DVL velocity observation: innovation Z, observation matrix H and noise R
// for the four estimator variants.
//
//   BASELINE  conventional loosely coupled model: the DVL projection is taken
//             as exact (no attitude term in H) and the body-frame variances are
//             used unrotated.
//   AE        adds the attitude-error terms of the projected DVL velocity and
//             of the lever-arm transfer to H.
//   CP        propagates the body-frame noise covariance through the estimated
//             attitude, including the expected effect of attitude uncertainty.
//   AE_CP     both.
#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dvlnav/eskf.hpp"

namespace dvlnav {

struct DvlSample {
  double time = 0.0;             // [s]
  Vec3 vel_b = Vec3::Zero();     // measured velocity, body frame [m/s]
  Vec3 sigma_b = Vec3::Ones();   // per-axis standard deviation [m/s]
};

enum class VariantId { kBaseline, kAE, kCP, kAECP };

inline constexpr std::array<VariantId, 4> kAllVariants = {VariantId::kBaseline, VariantId::kAE,
                                                          VariantId::kCP, VariantId::kAECP};

std::string_view variant_name(VariantId v);
std::optional<VariantId> parse_variant(std::string_view name);

inline bool models_attitude_error(VariantId v) {
  return v == VariantId::kAE || v == VariantId::kAECP;
}
inline bool propagates_covariance(VariantId v) {
  return v == VariantId::kCP || v == VariantId::kAECP;
}

/// Noise model for the variants that do not propagate covariance.
enum class BaselineNoise {
  kUnrotated,    // diag(sigma_b^2)
  kRotatedCov,   // C diag(sigma_b^2) C^T
  kSigmaVector,  // diag((C sigma_b)^2): the standard-deviation vector rotated as a vector
};

std::string_view baseline_noise_name(BaselineNoise m);
std::optional<BaselineNoise> parse_baseline_noise(std::string_view s);

struct ObservationOptions {
  BaselineNoise baseline_noise = BaselineNoise::kUnrotated;
  // Adds the lever-arm-coupled gyro white noise C(l x) Q_g (l x)^T C^T to R.
  bool gyro_lever_noise = false;
  double gyro_white_variance = 0.0;  // per-axis variance of one gyro sample [rad^2/s^2]
  // Diagnostic: CP variants use P_phiphi = 0.
  bool zero_attitude_cov = false;
  // Maximum |nav.time - dvl.time| accepted [s].
  double max_time_skew = 0.25;
};

struct ObservationBundle {
  Vec3 z = Vec3::Zero();
  ObsMat H = ObsMat::Zero();
  Mat3 R = Mat3::Zero();
};

class StaleMeasurement : public std::runtime_error {
 public:
  explicit StaleMeasurement(const std::string& w) : std::runtime_error(w) {}
};

/// Z = v_hat_DVL^n - C_hat v_DVL^b. Identical for every variant.
/// `imu` is the compensated IMU sample at the DVL epoch.
Vec3 innovation(const FilterState& fs, const ImuSample& imu, const DvlSample& dvl,
                const Vec3& lever, double max_time_skew = 0.25);

ObsMat build_H(VariantId variant, const FilterState& fs, const ImuSample& imu,
               const DvlSample& dvl, const Vec3& lever);

/// C diag(sigma^2) C^T.
Mat3 rotate_cov_naive(const Vec3& sigma_b, const Mat3& c_bn);

/// E[(phi x) A (phi x)^T] for phi ~ (0, P_phiphi):
/// sum_ij (P_phiphi)_ij S_i A S_j^T with S_i = skew(e_i).
Mat3 attitude_expectation_term(const Mat3& A, const Mat3& p_phiphi);

Mat3 build_R(VariantId variant, const DvlSample& dvl, const FilterState& fs, const Vec3& lever,
             const ImuSample& imu, const ObservationOptions& opts = {});

/// Per-axis noise standard deviation sqrt(diag(R)), for reporting.
Vec3 noise_sigma(const Mat3& R);

ObservationBundle observe(VariantId variant, const FilterState& fs, const ImuSample& imu,
                          const DvlSample& dvl, const Vec3& lever,
                          const ObservationOptions& opts = {});

}  // namespace dvlnav

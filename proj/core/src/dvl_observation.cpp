#include "dvlnav/dvl_observation.hpp"

#include <cmath>
#include <sstream>

namespace dvlnav {

std::string_view variant_name(VariantId v) {
  switch (v) {
    case VariantId::kBaseline: return "BASELINE";
    case VariantId::kAE: return "AE";
    case VariantId::kCP: return "CP";
    case VariantId::kAECP: return "AE_CP";
  }
  return "?";
}

std::optional<VariantId> parse_variant(std::string_view name) {
  for (VariantId v : kAllVariants) {
    if (variant_name(v) == name) return v;
  }
  if (name == "AE+CP") return VariantId::kAECP;
  return std::nullopt;
}

std::string_view baseline_noise_name(BaselineNoise m) {
  switch (m) {
    case BaselineNoise::kUnrotated: return "unrotated";
    case BaselineNoise::kRotatedCov: return "rotated_cov";
    case BaselineNoise::kSigmaVector: return "sigma_vector";
  }
  return "?";
}

std::optional<BaselineNoise> parse_baseline_noise(std::string_view s) {
  for (BaselineNoise m : {BaselineNoise::kUnrotated, BaselineNoise::kRotatedCov,
                          BaselineNoise::kSigmaVector}) {
    if (baseline_noise_name(m) == s) return m;
  }
  return std::nullopt;
}

Vec3 innovation(const FilterState& fs, const ImuSample& imu, const DvlSample& dvl,
                const Vec3& lever, double max_time_skew) {
  if (std::abs(fs.nav.time - dvl.time) > max_time_skew) {
    std::ostringstream os;
    os << "DVL sample at t=" << dvl.time << " is stale for filter epoch t=" << fs.nav.time;
    throw StaleMeasurement(os.str());
  }
  return dvl_center_velocity(fs.nav, imu, lever) - fs.nav.c_bn * dvl.vel_b;
}

ObsMat build_H(VariantId variant, const FilterState& fs, const ImuSample& imu,
               const DvlSample& dvl, const Vec3& lever) {
  const Mat3& c = fs.nav.c_bn;
  const Mat3 lx = skew(lever);

  ObsMat H = ObsMat::Zero();
  H.block<3, 3>(0, idx::kVel) = Mat3::Identity();

  // Lever-arm transfer, present in every variant.
  Mat3 h_phi = -skew(c * lever.cross(imu.gyro));
  if (models_attitude_error(variant)) {
    // The printed form of this block reads
    //   -(w_in x)(C l x) - {[C (l x w_in)] x} - C v_IMU^b,
    // but linearizing (phi x) u = -(u x) phi term by term gives
    //   -(w_in x)(C l x) - [C (l x w_ib)] x - (C v_DVL^b) x,
    // which is what is implemented here.
    const Vec3 omega_in = earth_model(fs.nav.pos, fs.nav.vel_ned).omega_in_n();
    h_phi += -skew(omega_in) * skew(c * lever) - skew(c * dvl.vel_b);
  }
  H.block<3, 3>(0, idx::kAtt) = h_phi;
  H.block<3, 3>(0, idx::kGyroBias) = -c * lx;
  H.block<3, 3>(0, idx::kGyroScale) = -c * lx * imu.gyro.asDiagonal();
  return H;
}

Mat3 rotate_cov_naive(const Vec3& sigma_b, const Mat3& c_bn) {
  return c_bn * sigma_b.cwiseAbs2().asDiagonal() * c_bn.transpose();
}

Mat3 attitude_expectation_term(const Mat3& A, const Mat3& p_phiphi) {
  std::array<Mat3, 3> s;
  std::array<Mat3, 3> s_a;
  for (int i = 0; i < 3; ++i) {
    s[i] = skew(Vec3::Unit(i));
    s_a[i] = s[i] * A;
  }
  Mat3 out = Mat3::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (p_phiphi(i, j) != 0.0) out += p_phiphi(i, j) * s_a[i] * s[j].transpose();
    }
  }
  return 0.5 * (out + out.transpose());
}

Mat3 build_R(VariantId variant, const DvlSample& dvl, const FilterState& fs, const Vec3& lever,
             const ImuSample& imu, const ObservationOptions& opts) {
  (void)imu;
  Mat3 R;
  if (propagates_covariance(variant)) {
    const Mat3 A = rotate_cov_naive(dvl.sigma_b, fs.nav.c_bn);
    const Mat3 p_phiphi = opts.zero_attitude_cov ? Mat3::Zero() : fs.err.attitude_cov();
    R = A + attitude_expectation_term(A, p_phiphi);
  } else {
    switch (opts.baseline_noise) {
      case BaselineNoise::kUnrotated:
        R = dvl.sigma_b.cwiseAbs2().asDiagonal();
        break;
      case BaselineNoise::kRotatedCov:
        R = rotate_cov_naive(dvl.sigma_b, fs.nav.c_bn);
        break;
      case BaselineNoise::kSigmaVector:
        R = (fs.nav.c_bn * dvl.sigma_b).cwiseAbs2().asDiagonal();
        break;
    }
  }
  if (opts.gyro_lever_noise) {
    const Mat3 cl = fs.nav.c_bn * skew(lever);
    R += opts.gyro_white_variance * cl * cl.transpose();
  }
  return 0.5 * (R + R.transpose());
}

Vec3 noise_sigma(const Mat3& R) { return R.diagonal().cwiseSqrt(); }

ObservationBundle observe(VariantId variant, const FilterState& fs, const ImuSample& imu,
                          const DvlSample& dvl, const Vec3& lever,
                          const ObservationOptions& opts) {
  ObservationBundle b;
  b.z = innovation(fs, imu, dvl, lever, opts.max_time_skew);
  b.H = build_H(variant, fs, imu, dvl, lever);
  b.R = build_R(variant, dvl, fs, lever, imu, opts);
  return b;
}

}  // namespace dvlnav

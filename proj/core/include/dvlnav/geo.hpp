// Rotation algebra and WGS-84 Earth model.
//
// Frames: navigation frame is local North-East-Down, body frame is
// Front-Right-Down. C_bn maps body vectors into NED. Depth is positive down.
#pragma once

#include <Eigen/Dense>

namespace dvlnav {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

namespace wgs84 {
inline constexpr double kSemiMajor = 6378137.0;            // a [m]
inline constexpr double kFlattening = 1.0 / 298.257223563;  // f
inline constexpr double kEcc2 = kFlattening * (2.0 - kFlattening);
inline constexpr double kEarthRate = 7.292115e-5;  // [rad/s]
inline constexpr double kGm = 3.986004418e14;      // [m^3/s^2]
inline constexpr double kGravityEquator = 9.7803253359;  // [m/s^2]
inline constexpr double kGravityPole = 9.8321849378;     // [m/s^2]
}  // namespace wgs84

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDeg = kPi / 180.0;

struct Geodetic {
  double latitude = 0.0;   // [rad]
  double longitude = 0.0;  // [rad], wrapped to (-pi, pi]
  double depth = 0.0;      // [m], positive down

  bool operator==(const Geodetic&) const = default;
};

/// Wraps an angle to (-pi, pi].
double wrap_pi(double angle);

/// Returns M with M * u == v x u.
Mat3 skew(const Vec3& v);

/// Inverse of skew() for the antisymmetric part of M.
Vec3 unskew(const Mat3& m);

/// Body(FRD) -> NED rotation for ZYX (yaw, pitch, roll) Euler angles.
Mat3 dcm_from_euler(double roll, double pitch, double yaw);

/// Euler angles (roll, pitch, yaw) of a body->NED DCM, ZYX convention.
Vec3 euler_from_dcm(const Mat3& c_bn);

/// Rodrigues exponential: rotation by angle |v| about v.
Mat3 rotation_exp(const Vec3& v);

/// Rotation vector of a proper rotation matrix (inverse of rotation_exp).
Vec3 rotation_log(const Mat3& r);

/// First-order attitude error model: [I - (phi x)] * C.
///
/// The result is not re-orthonormalized. Inputs with |phi| above
/// kSmallAngleLimit leave the regime where the first-order model is
/// trustworthy; see small_angle_ok().
Mat3 apply_small_angle(const Mat3& c, const Vec3& phi);

inline constexpr double kSmallAngleLimit = 0.1;  // [rad]
inline bool small_angle_ok(const Vec3& phi) { return phi.norm() <= kSmallAngleLimit; }

/// One symmetric orthonormalization step, C (3I - C^T C) / 2.
Mat3 orthonormalize(const Mat3& c);

/// Largest entry of |C^T C - I|.
double orthonormality_error(const Mat3& c);

struct EarthQuantities {
  Vec3 omega_ie_n;  // earth rate in NED [rad/s]
  Vec3 omega_en_n;  // transport rate [rad/s]
  Vec3 gravity_n;   // plumb-bob gravity, (0, 0, g) [m/s^2]
  double r_meridian = 0.0;  // R_M [m]
  double r_normal = 0.0;    // R_N [m]

  Vec3 omega_in_n() const { return omega_ie_n + omega_en_n; }
};

double gravity_magnitude(double latitude, double depth);

EarthQuantities earth_model(const Geodetic& p, const Vec3& v_ned);

}  // namespace dvlnav

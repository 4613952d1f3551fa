#include "dvlnav/geo.hpp"

#include <cmath>

namespace dvlnav {

double wrap_pi(double angle) {
  double a = std::remainder(angle, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Vec3 unskew(const Mat3& m) {
  return 0.5 * Vec3(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
}

Mat3 dcm_from_euler(double roll, double pitch, double yaw) {
  const double cr = std::cos(roll), sr = std::sin(roll);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  Mat3 c;
  c << cp * cy, -cr * sy + sr * sp * cy, sr * sy + cr * sp * cy,
       cp * sy, cr * cy + sr * sp * sy, -sr * cy + cr * sp * sy,
       -sp, sr * cp, cr * cp;
  return c;
}

Vec3 euler_from_dcm(const Mat3& c) {
  const double pitch = std::atan2(-c(2, 0), std::hypot(c(2, 1), c(2, 2)));
  const double roll = std::atan2(c(2, 1), c(2, 2));
  const double yaw = std::atan2(c(1, 0), c(0, 0));
  return {roll, pitch, yaw};
}

Mat3 rotation_exp(const Vec3& v) {
  const double angle = v.norm();
  const Mat3 k = skew(v);
  if (angle < 1e-8) {
    // Taylor series; accurate to machine precision in this range.
    return Mat3::Identity() + k + 0.5 * k * k;
  }
  return Mat3::Identity() + (std::sin(angle) / angle) * k +
         ((1.0 - std::cos(angle)) / (angle * angle)) * k * k;
}

Vec3 rotation_log(const Mat3& r) {
  const Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

Mat3 apply_small_angle(const Mat3& c, const Vec3& phi) {
  return (Mat3::Identity() - skew(phi)) * c;
}

Mat3 orthonormalize(const Mat3& c) {
  return 0.5 * c * (3.0 * Mat3::Identity() - c.transpose() * c);
}

double orthonormality_error(const Mat3& c) {
  return (c.transpose() * c - Mat3::Identity()).cwiseAbs().maxCoeff();
}

double gravity_magnitude(double latitude, double depth) {
  using namespace wgs84;
  const double s2 = std::sin(latitude) * std::sin(latitude);
  const double b = kSemiMajor * (1.0 - kFlattening);
  // Somigliana closed form on the ellipsoid.
  const double k = (b * kGravityPole) / (kSemiMajor * kGravityEquator) - 1.0;
  const double g0 = kGravityEquator * (1.0 + k * s2) / std::sqrt(1.0 - kEcc2 * s2);
  // Free-air correction, second order in height. Height is -depth.
  const double h = -depth;
  const double m = kEarthRate * kEarthRate * kSemiMajor * kSemiMajor * b / kGm;
  return g0 * (1.0 - 2.0 / kSemiMajor * (1.0 + kFlattening + m - 2.0 * kFlattening * s2) * h +
               3.0 * h * h / (kSemiMajor * kSemiMajor));
}

EarthQuantities earth_model(const Geodetic& p, const Vec3& v_ned) {
  using namespace wgs84;
  const double sl = std::sin(p.latitude), cl = std::cos(p.latitude);
  const double w = 1.0 - kEcc2 * sl * sl;
  EarthQuantities e;
  e.r_meridian = kSemiMajor * (1.0 - kEcc2) / (w * std::sqrt(w));
  e.r_normal = kSemiMajor / std::sqrt(w);
  const double rmh = e.r_meridian - p.depth;
  const double rnh = e.r_normal - p.depth;
  e.omega_ie_n = Vec3(kEarthRate * cl, 0.0, -kEarthRate * sl);
  e.omega_en_n = Vec3(v_ned.y() / rnh, -v_ned.x() / rmh, -v_ned.y() * sl / (cl * rnh));
  e.gravity_n = Vec3(0.0, 0.0, gravity_magnitude(p.latitude, p.depth));
  return e;
}

}  // namespace dvlnav

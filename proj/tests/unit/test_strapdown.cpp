#include <gtest/gtest.h>

#include "dvlnav/sim.hpp"
#include "dvlnav/strapdown.hpp"
#include "test_support.hpp"

using namespace dvlnav;
using dvlnav::tk::random_vec;

namespace {

NavState static_state(double lat, const Mat3& c) {
  NavState s;
  s.pos = Geodetic{lat, 0.3, 10.0};
  s.c_bn = c;
  return s;
}

// IMU output of a vehicle at rest in the navigation frame.
ImuSample static_imu(const NavState& s, double t) {
  const EarthQuantities e = earth_model(s.pos, Vec3::Zero());
  ImuSample imu;
  imu.time = t;
  imu.gyro = s.c_bn.transpose() * e.omega_ie_n;
  imu.accel = -s.c_bn.transpose() * e.gravity_n;
  return imu;
}

}  // namespace

TEST(Mechanize, StaticEquilibriumOneStep) {
  const NavState s = static_state(0.5, tk::random_dcm());
  const NavState n = mechanize(s, static_imu(s, 0.01), 0.01);
  EXPECT_DOUBLE_EQ(n.time, 0.01);
  EXPECT_LT(n.vel_ned.norm(), 1e-9);
  EXPECT_LT((n.c_bn - s.c_bn).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT(std::abs(n.pos.latitude - s.pos.latitude), 1e-15);
  EXPECT_LT(std::abs(n.pos.depth - s.pos.depth), 1e-9);
}

TEST(Mechanize, RestAtThePoleStaysAtRest) {
  // Specific force exactly balances gravity; the pole has no horizontal Coriolis.
  NavState s = static_state(kPi / 2, Mat3::Identity());
  for (int k = 1; k <= 10000; ++k) s = mechanize(s, static_imu(s, 0.01 * k), 0.01);
  EXPECT_LT(s.vel_ned.norm(), 1e-6);
  EXPECT_NEAR(s.time, 100.0, 1e-9);
}

TEST(Mechanize, SingleAxisYaw) {
  NavState s = static_state(0.0, Mat3::Identity());
  const double w = 0.2, dt = 0.01;
  ImuSample imu;
  imu.gyro = Vec3(0, 0, w);
  imu.accel = Vec3(0, 0, -gravity_magnitude(0.0, s.pos.depth));
  const MechanizationOptions no_earth{false};
  for (int k = 1; k <= 10; ++k) {
    imu.time = k * dt;
    s = mechanize(s, imu, dt, no_earth);
    EXPECT_NEAR(euler_from_dcm(s.c_bn).z(), w * dt * k, 1e-12);
  }
  EXPECT_LT(s.vel_ned.norm(), 1e-12);
}

TEST(Mechanize, CircleMatchesClosedForm) {
  // Constant speed v, constant yaw rate w, level: body specific force is the
  // centripetal term to the right plus the gravity reaction.
  const double v = 2.0, w = 3.0 * kDeg, dt = 0.01, lat = 30.0 * kDeg;
  NavState s;
  s.pos = Geodetic{lat, 120.0 * kDeg, 30.0};
  s.vel_ned = Vec3(v, 0, 0);
  const Geodetic origin = s.pos;
  const MechanizationOptions no_earth{false};
  double worst = 0.0;
  for (int k = 1; k <= 10000; ++k) {
    ImuSample imu;
    imu.time = k * dt;
    imu.gyro = Vec3(0, 0, w);
    imu.accel = Vec3(0, v * w, -gravity_magnitude(s.pos.latitude, s.pos.depth));
    s = mechanize(s, imu, dt, no_earth);
    const double t = k * dt, r = v / w;
    const Vec3 expect(r * std::sin(w * t), r * (1.0 - std::cos(w * t)), 0.0);
    worst = std::max(worst, (local_ned(origin, s.pos) - expect).norm());
  }
  EXPECT_LT(worst, 0.05);
}

TEST(Mechanize, OrthonormalityOverAMillionSteps) {
  NavState s = static_state(0.7, tk::random_dcm());
  ImuSample imu;
  double t = 0.0;
  for (int k = 0; k < 1000000; ++k) {
    t = (k + 1) * 0.01;
    imu.time = t;
    if (k % 1000 == 0) imu.gyro = random_vec(0.5);
    imu.accel = -s.c_bn.transpose() * earth_model(s.pos, s.vel_ned).gravity_n;
    s = mechanize(s, imu, 0.01);
    s.vel_ned.setZero();  // keep the position bounded; attitude is the subject here
  }
  EXPECT_LT(orthonormality_error(s.c_bn), 1e-10);
}

TEST(Mechanize, RejectsNonAdvancingTime) {
  NavState s = static_state(0.1, Mat3::Identity());
  s.time = 5.0;
  ImuSample imu = static_imu(s, 5.0);
  EXPECT_THROW(mechanize(s, imu, 0.01), NonMonotonicTime);
  imu.time = 4.99;
  EXPECT_THROW(mechanize(s, imu, 0.01), NonMonotonicTime);
  imu.time = 5.01;
  EXPECT_THROW(mechanize(s, imu, 0.2), std::invalid_argument);
  EXPECT_THROW(mechanize(s, imu, 0.0), std::invalid_argument);
  EXPECT_NO_THROW(mechanize(s, imu, 0.01));
}

TEST(DvlCenterVelocity, ZeroLever) {
  NavState s = static_state(0.4, tk::random_dcm());
  s.vel_ned = Vec3(1.0, -2.0, 0.1);
  ImuSample imu;
  imu.gyro = random_vec(0.3);
  EXPECT_EQ(dvl_center_velocity(s, imu, Vec3::Zero()), s.vel_ned);
}

TEST(DvlCenterVelocity, NoRotation) {
  const Vec3 v(1.0, 2.0, 3.0);
  EXPECT_EQ(dvl_center_velocity(v, tk::random_dcm(), Vec3::Zero(), Vec3::Zero(),
                                Vec3(0.8, 0.1, 0.4)),
            v);
}

TEST(DvlCenterVelocity, DirectFormulaAndLinearity) {
  for (int i = 0; i < 200; ++i) {
    const Vec3 v = random_vec(5.0), w_in = random_vec(1e-4), w_ib = random_vec(0.5);
    const Vec3 l = random_vec(2.0), l2 = random_vec(2.0);
    const Mat3 c = tk::random_dcm();
    const Vec3 cl = c * l;
    const Vec3 lxw(l.y() * w_ib.z() - l.z() * w_ib.y(), l.z() * w_ib.x() - l.x() * w_ib.z(),
                   l.x() * w_ib.y() - l.y() * w_ib.x());
    const Vec3 w_cl(w_in.y() * cl.z() - w_in.z() * cl.y(), w_in.z() * cl.x() - w_in.x() * cl.z(),
                    w_in.x() * cl.y() - w_in.y() * cl.x());
    const Vec3 expected = v - w_cl - c * lxw;
    EXPECT_LT((dvl_center_velocity(v, c, w_in, w_ib, l) - expected).norm(), 1e-13);

    const Vec3 base = dvl_center_velocity(v, c, w_in, w_ib, Vec3::Zero());
    const Vec3 a = dvl_center_velocity(v, c, w_in, w_ib, l) - base;
    const Vec3 b = dvl_center_velocity(v, c, w_in, w_ib, l2) - base;
    const Vec3 ab = dvl_center_velocity(v, c, w_in, w_ib, 2.0 * l + l2) - base;
    EXPECT_LT((ab - (2.0 * a + b)).norm(), 1e-13);
  }
}

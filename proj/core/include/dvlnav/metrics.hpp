// Error statistics: RMSE/max summaries and box-plot statistics.
#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dvlnav/geo.hpp"

namespace dvlnav {

/// Per-epoch errors of one estimator: position [m, local NED], velocity
/// [m/s, NED], attitude [deg, roll/pitch/yaw].
struct ErrorSeries {
  std::vector<double> epochs;
  std::vector<Vec3> pos;
  std::vector<Vec3> vel;
  std::vector<Vec3> att;

  std::size_t size() const { return epochs.size(); }
  void push_back(double t, const Vec3& p, const Vec3& v, const Vec3& a);
};

class EmptySeries : public std::invalid_argument {
 public:
  explicit EmptySeries(const std::string& w) : std::invalid_argument(w) {}
};
class TooFewSamples : public std::invalid_argument {
 public:
  explicit TooFewSamples(const std::string& w) : std::invalid_argument(w) {}
};

enum class NormMode { kComponent, kMagnitude };

struct ErrorStats {
  NormMode mode = NormMode::kMagnitude;
  // Magnitude mode: RMSE and max of the per-epoch Euclidean norm in x();
  // component mode: per-axis RMSE and max |e_i|.
  Vec3 rmse = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  double magnitude_rmse() const { return rmse.x(); }
  double magnitude_max() const { return max.x(); }
};

ErrorStats rmse(std::span<const Vec3> values, NormMode mode);

/// Euclidean norm of each error vector.
std::vector<double> magnitudes(std::span<const Vec3> values);

struct BoxStats {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  std::vector<double> outliers;  // ascending
  std::size_t count = 0;
};

/// Linear interpolation between order statistics (Hyndman-Fan type 7).
double quantile_type7(std::span<const double> sorted, double p);

/// Quartiles per quantile_type7, Tukey 1.5 IQR whiskers.
BoxStats box_stats(std::span<const double> values);

}  // namespace dvlnav

#include "dvlnav/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace dvlnav {

void ErrorSeries::push_back(double t, const Vec3& p, const Vec3& v, const Vec3& a) {
  epochs.push_back(t);
  pos.push_back(p);
  vel.push_back(v);
  att.push_back(a);
}

ErrorStats rmse(std::span<const Vec3> values, NormMode mode) {
  if (values.empty()) throw EmptySeries("rmse: empty error series");
  ErrorStats s;
  s.mode = mode;
  const double n = static_cast<double>(values.size());
  if (mode == NormMode::kMagnitude) {
    double sum = 0.0, mx = 0.0;
    for (const Vec3& e : values) {
      const double sq = e.squaredNorm();
      sum += sq;
      mx = std::max(mx, std::sqrt(sq));
    }
    s.rmse = Vec3(std::sqrt(sum / n), 0.0, 0.0);
    s.max = Vec3(mx, 0.0, 0.0);
  } else {
    Vec3 sum = Vec3::Zero(), mx = Vec3::Zero();
    for (const Vec3& e : values) {
      sum += e.cwiseAbs2();
      mx = mx.cwiseMax(e.cwiseAbs());
    }
    s.rmse = (sum / n).cwiseSqrt();
    s.max = mx;
  }
  return s;
}

std::vector<double> magnitudes(std::span<const Vec3> values) {
  std::vector<double> out;
  out.reserve(values.size());
  for (const Vec3& e : values) out.push_back(e.norm());
  return out;
}

double quantile_type7(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw EmptySeries("quantile: empty input");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BoxStats box_stats(std::span<const double> values) {
  if (values.size() < 4) throw TooFewSamples("box_stats: need at least 4 values");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());

  BoxStats b;
  b.count = v.size();
  b.q1 = quantile_type7(v, 0.25);
  b.median = quantile_type7(v, 0.5);
  b.q3 = quantile_type7(v, 0.75);
  b.iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * b.iqr;
  const double hi_fence = b.q3 + 1.5 * b.iqr;
  b.whisker_low = b.q1;
  b.whisker_high = b.q3;
  for (double x : v) {
    if (x < lo_fence || x > hi_fence) {
      b.outliers.push_back(x);
    } else {
      b.whisker_low = std::min(b.whisker_low, x);
      b.whisker_high = std::max(b.whisker_high, x);
    }
  }
  return b;
}

}  // namespace dvlnav

// CSV logs and result files.
//
// All files are UTF-8 with LF line endings and a header row. Numbers are
// written with 17 significant digits, so write -> read is bit-exact.
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dvlnav/sim.hpp"

namespace dvlnav {

class SchemaViolation : public std::runtime_error {
 public:
  SchemaViolation(const std::string& what, std::string file, std::size_t line)
      : std::runtime_error(what), file_(std::move(file)), line_(line) {}
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

namespace csv {
inline constexpr std::string_view kImuHeader = "t,gx,gy,gz,ax,ay,az";
inline constexpr std::string_view kDvlHeader = "t,vx,vy,vz,sx,sy,sz";
inline constexpr std::string_view kTruthHeader = "t,lat,lon,depth,vn,ve,vd,roll,pitch,yaw";
inline constexpr std::string_view kErrorsHeader = "t,variant,dpn,dpe,dpd,dvn,dve,dvd,dr,dp,dy";
inline constexpr std::string_view kEstimatesHeader =
    "t,variant,lat,lon,depth,vn,ve,vd,roll,pitch,yaw";
inline constexpr std::string_view kSummaryHeader = "variant,metric,axis,rmse,max";
inline constexpr std::string_view kBoxHeader =
    "variant,metric,count,median,q1,q3,iqr,whisker_low,whisker_high,n_outliers,outliers";
}  // namespace csv

/// Shortest-safe decimal text: 17 significant digits.
std::string format_double(double v);

/// Parses the whole of `s` as a double; std::nullopt on any leftover text.
std::optional<double> parse_double(std::string_view s);

struct SensorLog {
  SensorStreams sensors;
  std::optional<std::vector<TruthSample>> truth;
};

void write_imu(const std::filesystem::path& path, const std::vector<ImuSample>& imu);
void write_dvl(const std::filesystem::path& path, const std::vector<DvlSample>& dvl);
void write_truth(const std::filesystem::path& path, const std::vector<TruthSample>& truth);

/// Readers check the header, the field count and type of every row, and that
/// time strictly increases (NonMonotonicTime carries the offending line).
std::vector<ImuSample> read_imu(const std::filesystem::path& path);
std::vector<DvlSample> read_dvl(const std::filesystem::path& path);
std::vector<TruthSample> read_truth(const std::filesystem::path& path);

/// imu.csv and dvl.csv from `dir`, plus truth.csv when present.
SensorLog read_log(const std::filesystem::path& dir);
void write_log(const std::filesystem::path& dir, const SensorStreams& sensors,
               const std::vector<TruthSample>* truth);

struct SummaryRow {
  std::string variant;
  std::string metric;  // pos | vel | att
  std::string axis;    // norm, or N/E/D, or roll/pitch/yaw
  double rmse = 0.0;
  double max = 0.0;
};

struct BoxRow {
  std::string variant;
  std::string metric;
  BoxStats stats;
};

void write_errors(const std::filesystem::path& path, const std::vector<VariantResult>& results);
void write_estimates(const std::filesystem::path& path, const std::vector<VariantResult>& results);
void write_summary(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> read_summary(const std::filesystem::path& path);
void write_boxstats(const std::filesystem::path& path, const std::vector<BoxRow>& rows);

}  // namespace dvlnav

#include "dvlnav/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dvlnav {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end || s.empty()) return std::nullopt;
  return v;
}

namespace {

class Writer {
 public:
  Writer(const fs::path& path, std::string_view header) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out_ << header << '\n';
  }
  Writer& num(double v) {
    sep();
    out_ << format_double(v);
    return *this;
  }
  Writer& text(std::string_view s) {
    sep();
    out_ << s;
    return *this;
  }
  Writer& vec(const Vec3& v) { return num(v.x()).num(v.y()).num(v.z()); }
  void end() {
    out_ << '\n';
    first_ = true;
  }
  ~Writer() noexcept(false) {
    out_.flush();
    if (!out_ && std::uncaught_exceptions() == 0) {
      throw std::runtime_error("write failed: " + path_.string());
    }
  }

 private:
  void sep() {
    if (!first_) out_ << ',';
    first_ = false;
  }
  fs::path path_;
  std::ofstream out_;
  bool first_ = true;
};

struct Row {
  std::size_t line = 0;
  std::vector<std::string_view> fields;
};

// Splits a CSV file into rows after validating the header. Keeps the
// backing text alive in `storage`.
std::vector<Row> load_rows(const fs::path& path, std::string_view header, std::string& storage) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaViolation("cannot open file", path.string(), 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  storage = ss.str();

  std::vector<Row> rows;
  std::string_view text(storage);
  std::size_t line_no = 0;
  bool saw_header = false;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!saw_header) {
      if (line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
      if (line != header) {
        throw SchemaViolation("expected header '" + std::string(header) + "'", path.string(),
                              line_no);
      }
      saw_header = true;
      continue;
    }
    if (line.empty()) {
      if (text.empty()) break;
      throw SchemaViolation("empty line", path.string(), line_no);
    }
    Row r;
    r.line = line_no;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      r.fields.push_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(r));
  }
  if (!saw_header) throw SchemaViolation("missing header", path.string(), 1);
  return rows;
}

std::size_t column_count(std::string_view header) {
  std::size_t n = 1;
  for (char c : header) n += c == ',';
  return n;
}

// Numeric view of a row whose every field is a finite double.
std::vector<double> numeric_row(const Row& r, std::size_t ncol, const fs::path& path) {
  if (r.fields.size() != ncol) {
    std::ostringstream os;
    os << "expected " << ncol << " fields, got " << r.fields.size();
    throw SchemaViolation(os.str(), path.string(), r.line);
  }
  std::vector<double> v;
  v.reserve(ncol);
  for (std::size_t i = 0; i < ncol; ++i) {
    const auto d = parse_double(r.fields[i]);
    if (!d || !std::isfinite(*d)) {
      throw SchemaViolation("field " + std::to_string(i + 1) + " is not a finite number: '" +
                                std::string(r.fields[i]) + "'",
                            path.string(), r.line);
    }
    v.push_back(*d);
  }
  return v;
}

// Reads a purely numeric log with strictly increasing first column.
template <typename F>
void read_numeric_log(const fs::path& path, std::string_view header, F&& on_row) {
  std::string storage;
  const std::vector<Row> rows = load_rows(path, header, storage);
  const std::size_t ncol = column_count(header);
  double prev_t = -INFINITY;
  for (const Row& r : rows) {
    const std::vector<double> v = numeric_row(r, ncol, path);
    if (!(v[0] > prev_t)) {
      std::ostringstream os;
      os << path.string() << ":" << r.line << ": time " << format_double(v[0])
         << " does not increase";
      throw NonMonotonicTime(os.str(), r.line);
    }
    prev_t = v[0];
    on_row(v, r.line);
  }
}

Vec3 v3(const std::vector<double>& v, std::size_t i) { return Vec3(v[i], v[i + 1], v[i + 2]); }

}  // namespace

void write_imu(const fs::path& path, const std::vector<ImuSample>& imu) {
  Writer w(path, csv::kImuHeader);
  for (const ImuSample& s : imu) {
    w.num(s.time).vec(s.gyro).vec(s.accel);
    w.end();
  }
}

void write_dvl(const fs::path& path, const std::vector<DvlSample>& dvl) {
  Writer w(path, csv::kDvlHeader);
  for (const DvlSample& s : dvl) {
    w.num(s.time).vec(s.vel_b).vec(s.sigma_b);
    w.end();
  }
}

void write_truth(const fs::path& path, const std::vector<TruthSample>& truth) {
  Writer w(path, csv::kTruthHeader);
  for (const TruthSample& s : truth) {
    w.num(s.nav.time).num(s.nav.pos.latitude).num(s.nav.pos.longitude).num(s.nav.pos.depth);
    w.vec(s.nav.vel_ned).vec(s.euler);
    w.end();
  }
}

std::vector<ImuSample> read_imu(const fs::path& path) {
  std::vector<ImuSample> out;
  read_numeric_log(path, csv::kImuHeader, [&](const std::vector<double>& v, std::size_t) {
    out.push_back(ImuSample{v[0], v3(v, 1), v3(v, 4)});
  });
  return out;
}

std::vector<DvlSample> read_dvl(const fs::path& path) {
  std::vector<DvlSample> out;
  read_numeric_log(path, csv::kDvlHeader, [&](const std::vector<double>& v, std::size_t line) {
    DvlSample d;
    d.time = v[0];
    d.vel_b = v3(v, 1);
    d.sigma_b = v3(v, 4);
    if (!(d.sigma_b.array() > 0.0).all()) {
      throw SchemaViolation("sigma components must be positive", path.string(), line);
    }
    out.push_back(d);
  });
  return out;
}

std::vector<TruthSample> read_truth(const fs::path& path) {
  std::vector<TruthSample> out;
  read_numeric_log(path, csv::kTruthHeader, [&](const std::vector<double>& v, std::size_t) {
    out.push_back(make_truth(v[0], Geodetic{v[1], v[2], v[3]}, v3(v, 4), v3(v, 7)));
  });
  return out;
}

SensorLog read_log(const fs::path& dir) {
  SensorLog log;
  log.sensors.imu = read_imu(dir / "imu.csv");
  log.sensors.dvl = read_dvl(dir / "dvl.csv");
  if (fs::exists(dir / "truth.csv")) log.truth = read_truth(dir / "truth.csv");
  return log;
}

void write_log(const fs::path& dir, const SensorStreams& sensors,
               const std::vector<TruthSample>* truth) {
  fs::create_directories(dir);
  write_imu(dir / "imu.csv", sensors.imu);
  write_dvl(dir / "dvl.csv", sensors.dvl);
  if (truth != nullptr) write_truth(dir / "truth.csv", *truth);
}

void write_errors(const fs::path& path, const std::vector<VariantResult>& results) {
  Writer w(path, csv::kErrorsHeader);
  for (const VariantResult& r : results) {
    const std::string_view name = variant_name(r.variant);
    for (std::size_t i = 0; i < r.errors.size(); ++i) {
      w.num(r.errors.epochs[i]).text(name).vec(r.errors.pos[i]).vec(r.errors.vel[i]).vec(
          r.errors.att[i]);
      w.end();
    }
  }
}

void write_estimates(const fs::path& path, const std::vector<VariantResult>& results) {
  Writer w(path, csv::kEstimatesHeader);
  for (const VariantResult& r : results) {
    const std::string_view name = variant_name(r.variant);
    for (const NavState& s : r.estimates) {
      w.num(s.time).text(name).num(s.pos.latitude).num(s.pos.longitude).num(s.pos.depth);
      w.vec(s.vel_ned).vec(euler_from_dcm(s.c_bn));
      w.end();
    }
  }
}

void write_summary(const fs::path& path, const std::vector<SummaryRow>& rows) {
  Writer w(path, csv::kSummaryHeader);
  for (const SummaryRow& r : rows) {
    w.text(r.variant).text(r.metric).text(r.axis).num(r.rmse).num(r.max);
    w.end();
  }
}

std::vector<SummaryRow> read_summary(const fs::path& path) {
  std::string storage;
  const std::vector<Row> rows = load_rows(path, csv::kSummaryHeader, storage);
  std::vector<SummaryRow> out;
  for (const Row& r : rows) {
    if (r.fields.size() != 5) {
      throw SchemaViolation("expected 5 fields", path.string(), r.line);
    }
    const auto rm = parse_double(r.fields[3]);
    const auto mx = parse_double(r.fields[4]);
    if (!rm || !mx) throw SchemaViolation("rmse/max must be numeric", path.string(), r.line);
    out.push_back(SummaryRow{std::string(r.fields[0]), std::string(r.fields[1]),
                             std::string(r.fields[2]), *rm, *mx});
  }
  return out;
}

void write_boxstats(const fs::path& path, const std::vector<BoxRow>& rows) {
  Writer w(path, csv::kBoxHeader);
  for (const BoxRow& r : rows) {
    const BoxStats& b = r.stats;
    w.text(r.variant).text(r.metric).num(static_cast<double>(b.count));
    w.num(b.median).num(b.q1).num(b.q3).num(b.iqr).num(b.whisker_low).num(b.whisker_high);
    w.num(static_cast<double>(b.outliers.size()));
    std::string list;
    for (std::size_t i = 0; i < b.outliers.size(); ++i) {
      if (i) list += ';';
      list += format_double(b.outliers[i]);
    }
    w.text(list);
    w.end();
  }
}

}  // namespace dvlnav

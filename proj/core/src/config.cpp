#include "dvlnav/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dvlnav/io.hpp"

namespace dvlnav {

namespace {

std::string describe(const std::string& field, const std::string& message, std::size_t line) {
  std::ostringstream os;
  if (line > 0) os << "line " << line << ": ";
  if (!field.empty()) os << field << ": ";
  os << message;
  return os.str();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool valid_key(std::string_view k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  }
  return true;
}

// Drops a trailing `#` comment that is not inside a string.
std::string_view strip_comment(std::string_view line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_str && c == '\\') {
      ++i;
    } else if (c == '"') {
      in_str = !in_str;
    } else if (c == '#' && !in_str) {
      return line.substr(0, i);
    }
  }
  return line;
}

class ValueParser {
 public:
  ValueParser(std::string_view text, std::string field, std::size_t line)
      : s_(text), field_(std::move(field)), line_(line) {}

  ConfigValue parse() {
    ConfigValue v;
    v.line = line_;
    skip_ws();
    if (peek() == '[') {
      v.data = parse_array();
    } else if (peek() == '"') {
      v.data = parse_string();
    } else {
      const std::string_view word = scalar_token();
      if (word == "true") {
        v.data = true;
      } else if (word == "false") {
        v.data = false;
      } else {
        v.data = parse_number(word);
      }
    }
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected text after value");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& m) const { throw ConfigError(field_, m, line_); }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  std::string_view scalar_token() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != ' ' &&
           s_[pos_] != '\t') {
      ++pos_;
    }
    return s_.substr(start, pos_ - start);
  }

  double parse_number(std::string_view word) const {
    std::string_view w = word;
    if (!w.empty() && w.front() == '+') w.remove_prefix(1);
    const auto d = parse_double(w);
    if (!d || !std::isfinite(*d)) fail("expected a finite number, got '" + std::string(word) + "'");
    return *d;
  }

  std::string parse_string() {
    ++pos_;  // opening quote
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c == '\\') {
        if (pos_ >= s_.size()) break;
        const char e = s_[pos_++];
        switch (e) {
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      }
      out += c;
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;  // closing quote
    return out;
  }

  ConfigValue::Array parse_array() {
    ++pos_;  // [
    ConfigValue::Array out;
    skip_ws();
    if (peek() == ']') {
      ++pos_;
      return out;
    }
    while (true) {
      skip_ws();
      if (peek() == '"') {
        out.emplace_back(parse_string());
      } else if (peek() == '[') {
        fail("nested arrays are not supported");
      } else {
        out.emplace_back(parse_number(scalar_token()));
      }
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        skip_ws();
        if (peek() == ']') {  // trailing comma
          ++pos_;
          return out;
        }
        continue;
      }
      if (peek() == ']') {
        ++pos_;
        return out;
      }
      fail("expected ',' or ']' in array");
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::string field_;
  std::size_t line_;
};

// ---------------------------------------------------------------------------
// Typed access with field-path errors and unknown-key detection.

class TableReader {
 public:
  TableReader(const ConfigTable* table, std::string prefix)
      : table_(table), prefix_(std::move(prefix)) {}

  std::string path(const std::string& key) const {
    return prefix_.empty() ? key : prefix_ + "." + key;
  }

  const ConfigValue* find(const std::string& key) {
    used_.insert(key);
    if (table_ == nullptr) return nullptr;
    const auto it = table_->values.find(key);
    return it == table_->values.end() ? nullptr : &it->second;
  }

  void number(const std::string& key, double& out, double scale = 1.0) {
    if (const ConfigValue* v = find(key)) out = as_number(*v, key) * scale;
  }

  std::optional<double> optional_number(const std::string& key) {
    if (const ConfigValue* v = find(key)) return as_number(*v, key);
    return std::nullopt;
  }

  void boolean(const std::string& key, bool& out) {
    if (const ConfigValue* v = find(key)) {
      const bool* b = std::get_if<bool>(&v->data);
      if (b == nullptr) throw ConfigError(path(key), "expected true or false", v->line);
      out = *b;
    }
  }

  std::optional<std::string> string(const std::string& key) {
    if (const ConfigValue* v = find(key)) {
      const std::string* s = std::get_if<std::string>(&v->data);
      if (s == nullptr) throw ConfigError(path(key), "expected a quoted string", v->line);
      return *s;
    }
    return std::nullopt;
  }

  void vec3(const std::string& key, Vec3& out, double scale = 1.0) {
    if (const ConfigValue* v = find(key)) {
      const auto* arr = std::get_if<ConfigValue::Array>(&v->data);
      if (arr == nullptr || arr->size() != 3) {
        throw ConfigError(path(key), "expected an array of 3 numbers", v->line);
      }
      for (int i = 0; i < 3; ++i) {
        const double* d = std::get_if<double>(&(*arr)[static_cast<std::size_t>(i)]);
        if (d == nullptr) throw ConfigError(path(key), "expected an array of 3 numbers", v->line);
        out[i] = *d * scale;
      }
    }
  }

  std::optional<std::vector<std::string>> strings(const std::string& key) {
    if (const ConfigValue* v = find(key)) {
      const auto* arr = std::get_if<ConfigValue::Array>(&v->data);
      if (arr == nullptr) throw ConfigError(path(key), "expected an array of strings", v->line);
      std::vector<std::string> out;
      for (const auto& e : *arr) {
        const std::string* s = std::get_if<std::string>(&e);
        if (s == nullptr) throw ConfigError(path(key), "expected an array of strings", v->line);
        out.push_back(*s);
      }
      return out;
    }
    return std::nullopt;
  }

  std::size_t line_of(const std::string& key) const {
    if (table_ == nullptr) return 0;
    const auto it = table_->values.find(key);
    return it == table_->values.end() ? table_->line : it->second.line;
  }

  void reject_unknown() const {
    if (table_ == nullptr) return;
    for (const auto& [key, value] : table_->values) {
      if (!used_.count(key)) throw ConfigError(path(key), "unknown key", value.line);
    }
  }

 private:
  double as_number(const ConfigValue& v, const std::string& key) const {
    const double* d = std::get_if<double>(&v.data);
    if (d == nullptr) throw ConfigError(path(key), "expected a number", v.line);
    return *d;
  }

  const ConfigTable* table_;
  std::string prefix_;
  std::set<std::string> used_;
};

const ConfigTable* table_or_null(const ConfigDocument& doc, const std::string& name) {
  const auto it = doc.tables.find(name);
  return it == doc.tables.end() ? nullptr : &it->second;
}

constexpr double kG0 = 9.80665;

}  // namespace

ConfigError::ConfigError(std::string field, const std::string& message, std::size_t line)
    : std::runtime_error(describe(field, message, line)), field_(std::move(field)), line_(line) {}

ConfigDocument parse_config_text(const std::string& text) {
  ConfigDocument doc;
  ConfigTable* current = &doc.tables[""];
  std::string current_name;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(strip_comment(raw));
    if (line_no == 1 && line.substr(0, 3) == "\xEF\xBB\xBF") line = trim(line.substr(3));
    if (line.empty()) continue;

    if (line.substr(0, 2) == "[[") {
      if (line.size() < 4 || line.substr(line.size() - 2) != "]]") {
        throw ConfigError("", "malformed array-of-tables header", line_no);
      }
      const std::string name(trim(line.substr(2, line.size() - 4)));
      if (!valid_key(name)) throw ConfigError(name, "invalid table name", line_no);
      if (doc.tables.count(name)) {
        throw ConfigError(name, "already defined as a table", line_no);
      }
      auto& list = doc.arrays[name];
      list.emplace_back();
      list.back().line = line_no;
      current = &list.back();
      current_name = name + "[" + std::to_string(list.size() - 1) + "]";
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("", "malformed table header", line_no);
      const std::string name(trim(line.substr(1, line.size() - 2)));
      if (!valid_key(name)) throw ConfigError(name, "invalid table name", line_no);
      if (doc.tables.count(name) || doc.arrays.count(name)) {
        throw ConfigError(name, "table defined twice", line_no);
      }
      current = &doc.tables[name];
      current->line = line_no;
      current_name = name;
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(current_name, "expected 'key = value'", line_no);
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string field = current_name.empty() ? key : current_name + "." + key;
    if (!valid_key(key)) throw ConfigError(field, "invalid key", line_no);
    if (current->values.count(key)) throw ConfigError(field, "duplicate key", line_no);
    current->values[key] = ValueParser(trim(line.substr(eq + 1)), field, line_no).parse();
  }
  if (doc.tables[""].values.empty()) doc.tables.erase("");
  return doc;
}

ConfigDocument parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

ScenarioConfig scenario_from_document(const ConfigDocument& doc) {
  static const std::set<std::string> kTables{"scenario", "origin",  "imu",          "dvl",
                                             "initial_error", "filter", "initial_state"};
  for (const auto& [name, table] : doc.tables) {
    if (!kTables.count(name)) {
      throw ConfigError(name.empty() ? table.values.begin()->first : name,
                        name.empty() ? "keys must be inside a table" : "unknown table",
                        table.line);
    }
  }
  for (const auto& [name, list] : doc.arrays) {
    if (name != "segment") throw ConfigError(name, "unknown array of tables", list.front().line);
  }

  ScenarioConfig cfg = ScenarioConfig::paper_default();

  TableReader sc(table_or_null(doc, "scenario"), "scenario");
  sc.number("duration_s", cfg.duration);
  sc.number("align_duration_s", cfg.align_duration);
  if (const auto seed = sc.optional_number("seed")) {
    if (!(*seed >= 0.0) || *seed != std::floor(*seed) || *seed > 9007199254740992.0) {
      throw ConfigError(sc.path("seed"), "must be a non-negative integer", sc.line_of("seed"));
    }
    cfg.seed = static_cast<std::uint64_t>(*seed);
  }
  if (const auto names = sc.strings("variants")) {
    cfg.variants.clear();
    for (const std::string& n : *names) {
      const auto v = parse_variant(n);
      if (!v) throw ConfigError(sc.path("variants"), "unknown variant '" + n + "'",
                                sc.line_of("variants"));
      cfg.variants.push_back(*v);
    }
  }
  sc.vec3("lever_m", cfg.lever);
  sc.number("initial_heading_deg", cfg.initial_heading, kDeg);
  sc.reject_unknown();

  TableReader org(table_or_null(doc, "origin"), "origin");
  org.number("latitude_deg", cfg.origin.latitude, kDeg);
  org.number("longitude_deg", cfg.origin.longitude, kDeg);
  org.number("depth_m", cfg.origin.depth);
  org.reject_unknown();

  NoiseSpec& n = cfg.noise;
  TableReader imu(table_or_null(doc, "imu"), "imu");
  imu.number("rate_hz", n.imu_rate);
  imu.number("gyro_bias_deg_per_h", n.gyro_bias, kDeg / 3600.0);
  imu.number("gyro_arw_deg_per_sqrt_h", n.gyro_arw, kDeg / 60.0);
  imu.number("gyro_scale_ppm", n.gyro_sf, 1e-6);
  imu.number("accel_bias_ug", n.accel_bias, 1e-6 * kG0);
  imu.number("accel_vrw_ug_per_sqrt_hz", n.accel_vrw, 1e-6 * kG0);
  imu.number("accel_scale_ppm", n.accel_sf, 1e-6);
  imu.boolean("redraw_bias", n.redraw_bias);
  imu.reject_unknown();

  TableReader dvl(table_or_null(doc, "dvl"), "dvl");
  dvl.number("rate_hz", n.dvl_rate);
  dvl.number("velocity_error_pct", n.dvl_pct, 0.01);
  dvl.number("noise_floor_m_s", n.dvl_floor);
  if (const auto mode = dvl.string("sigma_mode")) {
    if (*mode == "speed") {
      n.dvl_sigma = NoiseSpec::DvlSigma::kSpeed;
    } else if (*mode == "component") {
      n.dvl_sigma = NoiseSpec::DvlSigma::kComponent;
    } else {
      throw ConfigError(dvl.path("sigma_mode"), "expected \"speed\" or \"component\"",
                        dvl.line_of("sigma_mode"));
    }
  }
  dvl.reject_unknown();

  TableReader ie(table_or_null(doc, "initial_error"), "initial_error");
  ie.number("position_m", cfg.initial_error.pos_sigma);
  ie.number("velocity_m_s", cfg.initial_error.vel_sigma);
  ie.vec3("attitude_deg", cfg.initial_error.att_sigma, kDeg);
  ie.boolean("inject", cfg.inject_initial_error);
  ie.reject_unknown();

  TableReader fl(table_or_null(doc, "filter"), "filter");
  if (const auto mode = fl.string("baseline_noise")) {
    const auto m = parse_baseline_noise(*mode);
    if (!m) {
      throw ConfigError(fl.path("baseline_noise"),
                        "expected \"unrotated\", \"rotated_cov\" or \"sigma_vector\"",
                        fl.line_of("baseline_noise"));
    }
    cfg.observation.baseline_noise = *m;
  }
  fl.boolean("gyro_lever_noise", cfg.observation.gyro_lever_noise);
  fl.reject_unknown();

  if (const ConfigTable* st = table_or_null(doc, "initial_state")) {
    TableReader is(st, "initial_state");
    NavState s;
    is.number("time_s", s.time);
    is.number("latitude_deg", s.pos.latitude, kDeg);
    is.number("longitude_deg", s.pos.longitude, kDeg);
    is.number("depth_m", s.pos.depth);
    is.vec3("velocity_ned_m_s", s.vel_ned);
    Vec3 euler = Vec3::Zero();
    is.vec3("euler_deg", euler, kDeg);
    s.c_bn = dcm_from_euler(euler.x(), euler.y(), euler.z());
    is.reject_unknown();
    cfg.initial_state = s;
  }

  const auto seg_it = doc.arrays.find("segment");
  if (seg_it != doc.arrays.end()) {
    cfg.profile.segments.clear();
    for (std::size_t i = 0; i < seg_it->second.size(); ++i) {
      const ConfigTable& t = seg_it->second[i];
      TableReader sr(&t, "segment[" + std::to_string(i) + "]");
      Segment seg;
      const auto type = sr.string("type");
      if (!type) throw ConfigError(sr.path("type"), "missing", t.line);
      const auto st = parse_segment_type(*type);
      if (!st) throw ConfigError(sr.path("type"), "unknown segment type '" + *type + "'",
                                 sr.line_of("type"));
      seg.type = *st;
      if (!sr.find("duration_s")) throw ConfigError(sr.path("duration_s"), "missing", t.line);
      sr.number("duration_s", seg.duration);
      seg.speed = sr.optional_number("speed_m_s");
      const bool needs_target = seg.type == SegmentType::kAccelerate ||
                                seg.type == SegmentType::kDecelerate;
      if (needs_target && !sr.find("target_speed_m_s")) {
        throw ConfigError(sr.path("target_speed_m_s"), "missing", t.line);
      }
      if (seg.type == SegmentType::kCoordinatedTurn && !sr.find("turn_rate_deg_s")) {
        throw ConfigError(sr.path("turn_rate_deg_s"), "missing", t.line);
      }
      if (seg.type == SegmentType::kDive && !sr.find("depth_change_m")) {
        throw ConfigError(sr.path("depth_change_m"), "missing", t.line);
      }
      // Dive exit speed defaults to the entry speed.
      if (seg.type == SegmentType::kDive && !sr.find("target_speed_m_s")) {
        seg.target_speed = -1.0;
      }
      sr.number("target_speed_m_s", seg.target_speed);
      sr.number("turn_rate_deg_s", seg.turn_rate, kDeg);
      sr.number("depth_change_m", seg.depth_change);
      // Keys that do not apply to the segment type are rejected.
      auto reject = [&](const char* key, bool applies) {
        if (!applies && t.values.count(key)) {
          throw ConfigError(sr.path(key), "not valid for a " + *type + " segment", sr.line_of(key));
        }
      };
      reject("target_speed_m_s", needs_target || seg.type == SegmentType::kDive);
      reject("turn_rate_deg_s", seg.type == SegmentType::kCoordinatedTurn);
      reject("depth_change_m", seg.type == SegmentType::kDive);
      sr.reject_unknown();
      cfg.profile.segments.push_back(seg);
    }
    // Resolve dive exit speeds that default to the entry speed.
    double u = 0.0;
    for (Segment& seg : cfg.profile.segments) {
      if (seg.speed) u = *seg.speed;
      if (seg.type == SegmentType::kStatic) u = 0.0;
      if (seg.type == SegmentType::kDive && seg.target_speed < 0.0) seg.target_speed = u;
      if (seg.type == SegmentType::kAccelerate || seg.type == SegmentType::kDecelerate ||
          seg.type == SegmentType::kDive) {
        u = seg.target_speed;
      }
    }
  } else {
    cfg.profile = default_profile(cfg.duration - cfg.align_duration);
  }

  // Explicit segments must fill the navigation window exactly; the built-in
  // profile is cut at the scenario end.
  if (seg_it != doc.arrays.end()) {
    const double nav = cfg.duration - cfg.align_duration;
    const double total = cfg.profile.total_duration();
    if (std::abs(total - nav) > 1e-6) {
      std::ostringstream os;
      os << "durations sum to " << total << " s but scenario.duration_s - align_duration_s = "
         << nav << " s";
      throw ConfigError("segment", os.str(), seg_it->second.front().line);
    }
  }
  validate_scenario(cfg);
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  return scenario_from_document(parse_config_file(path));
}

void validate_scenario(const ScenarioConfig& cfg) {
  auto require = [](bool ok, const char* field, const std::string& msg) {
    if (!ok) throw ConfigError(field, msg);
  };
  require(cfg.duration > 0.0 && std::isfinite(cfg.duration), "scenario.duration_s",
          "must be positive");
  require(cfg.align_duration >= 0.0, "scenario.align_duration_s", "must be non-negative");
  require(cfg.align_duration < cfg.duration, "scenario.align_duration_s",
          "must be shorter than scenario.duration_s");
  require(!cfg.variants.empty(), "scenario.variants", "must list at least one variant");
  {
    std::set<VariantId> seen(cfg.variants.begin(), cfg.variants.end());
    require(seen.size() == cfg.variants.size(), "scenario.variants", "contains duplicates");
  }
  require(cfg.lever.allFinite(), "scenario.lever_m", "must be finite");
  require(std::abs(cfg.origin.latitude) < 89.0 * kDeg, "origin.latitude_deg",
          "must be within +-89 degrees");

  const NoiseSpec& n = cfg.noise;
  require(n.imu_rate >= 1.0 / kMaxMechanizationStep && std::isfinite(n.imu_rate), "imu.rate_hz",
          "must be at least 10 Hz");
  require(n.dvl_rate > 0.0 && n.dvl_rate <= n.imu_rate, "dvl.rate_hz",
          "must be positive and not above imu.rate_hz");
  require(n.gyro_bias >= 0.0, "imu.gyro_bias_deg_per_h", "must be non-negative");
  require(n.gyro_arw >= 0.0, "imu.gyro_arw_deg_per_sqrt_h", "must be non-negative");
  require(n.gyro_sf >= 0.0, "imu.gyro_scale_ppm", "must be non-negative");
  require(n.accel_bias >= 0.0, "imu.accel_bias_ug", "must be non-negative");
  require(n.accel_vrw >= 0.0, "imu.accel_vrw_ug_per_sqrt_hz", "must be non-negative");
  require(n.accel_sf >= 0.0, "imu.accel_scale_ppm", "must be non-negative");
  require(n.dvl_pct >= 0.0, "dvl.velocity_error_pct", "must be non-negative");
  require(n.dvl_floor > 0.0, "dvl.noise_floor_m_s", "must be positive");

  require(cfg.initial_error.pos_sigma > 0.0, "initial_error.position_m", "must be positive");
  require(cfg.initial_error.vel_sigma > 0.0, "initial_error.velocity_m_s", "must be positive");
  require((cfg.initial_error.att_sigma.array() > 0.0).all(), "initial_error.attitude_deg",
          "must be positive");
  require((3.0 * cfg.initial_error.att_sigma.array() < kSmallAngleLimit).all(),
          "initial_error.attitude_deg", "3-sigma must stay within the small-angle limit");

  const double nav = cfg.duration - cfg.align_duration;
  const double total = cfg.profile.total_duration();
  if (total < nav - 1e-6) {
    std::ostringstream os;
    os << "profile covers " << total << " s but scenario.duration_s - align_duration_s = "
       << nav << " s";
    throw ConfigError("segment", os.str());
  }
  try {
    check_profile(cfg.profile, cfg.initial_heading);
  } catch (const std::invalid_argument& ex) {
    // Messages name the segment as "segment <i> (<type>)".
    std::string what = ex.what();
    std::string field = "segment";
    const std::size_t p = what.find("segment ");
    if (p != std::string::npos) {
      std::size_t q = p + 8;
      std::string digits;
      while (q < what.size() && std::isdigit(static_cast<unsigned char>(what[q]))) digits += what[q++];
      if (!digits.empty()) field = "segment[" + digits + "]";
    }
    throw ConfigError(field, what);
  }
}

}  // namespace dvlnav

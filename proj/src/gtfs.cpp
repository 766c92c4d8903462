#include "micronav/gtfs.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <set>

#include <json.hpp>

#include "micronav/csv.hpp"
#include "micronav/errors.hpp"
#include "micronav/io.hpp"

namespace micronav::gtfs {

namespace {

std::string trimmed(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_coord(const std::string& raw, const char* what, double lo, double hi,
                   std::size_t line) {
  const std::string s = trimmed(raw);
  if (s.empty()) {
    throw DataError(std::string("line ") + std::to_string(line) + ": blank " + what);
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    throw DataError(std::string("line ") + std::to_string(line) + ": unparseable " +
                    what + " '" + raw + "'");
  }
  if (value < lo || value > hi) {
    throw DataError(std::string("line ") + std::to_string(line) + ": " + what + " " +
                    s + " out of range [" + std::to_string(lo) + ", " +
                    std::to_string(hi) + "]");
  }
  return value;
}

std::size_t require_column(const std::vector<std::string>& header, const std::string& name) {
  auto idx = find_column(header, name);
  if (!idx) throw DataError("missing required column: " + name);
  return *idx;
}

std::string field_at(const std::vector<std::string>& row, std::size_t idx) {
  return idx < row.size() ? row[idx] : std::string();
}

}  // namespace

void StopRegistry::insert(StopRecord rec) {
  if (rec.stop_id.empty()) throw DataError("stop_id must be non-empty");
  auto [it, inserted] = index_.emplace(rec.stop_id, records_.size());
  if (!inserted) throw DataError("duplicate stop_id: " + rec.stop_id);
  records_.push_back(std::move(rec));
}

const StopRecord* StopRegistry::find(const std::string& stop_id) const {
  auto it = index_.find(stop_id);
  return it == index_.end() ? nullptr : &records_[it->second];
}

StopRegistry parse_stops(std::istream& stops_csv) {
  CsvReader reader(stops_csv);
  auto header = reader.next();
  if (!header) throw DataError("empty stops input: missing header row");

  const std::size_t id_col = require_column(*header, "stop_id");
  const std::size_t name_col = require_column(*header, "stop_name");
  const std::size_t lat_col = require_column(*header, "stop_lat");
  const std::size_t lon_col = require_column(*header, "stop_lon");

  StopRegistry registry;
  while (auto row = reader.next()) {
    const std::size_t line = reader.record_line();
    StopRecord rec;
    rec.stop_id = trimmed(field_at(*row, id_col));
    if (rec.stop_id.empty()) {
      throw DataError("line " + std::to_string(line) + ": blank stop_id");
    }
    rec.stop_name = field_at(*row, name_col);
    rec.mapped.lat_deg = parse_coord(field_at(*row, lat_col), "stop_lat", -90.0, 90.0, line);
    rec.mapped.lon_deg = parse_coord(field_at(*row, lon_col), "stop_lon", -180.0, 180.0, line);
    registry.insert(std::move(rec));
  }
  return registry;
}

std::vector<GroundTruthRecord> parse_ground_truth(std::istream& csv) {
  CsvReader reader(csv);
  auto header = reader.next();
  if (!header) throw DataError("empty ground-truth input: missing header row");

  const std::size_t id_col = require_column(*header, "stop_id");
  const std::size_t lat_col = require_column(*header, "lat");
  const std::size_t lon_col = require_column(*header, "lon");
  const std::size_t hdg_col = require_column(*header, "heading_deg");

  std::vector<GroundTruthRecord> out;
  std::set<std::string> seen;
  while (auto row = reader.next()) {
    const std::size_t line = reader.record_line();
    GroundTruthRecord rec;
    rec.stop_id = trimmed(field_at(*row, id_col));
    if (rec.stop_id.empty()) {
      throw DataError("line " + std::to_string(line) + ": blank stop_id");
    }
    if (!seen.insert(rec.stop_id).second) {
      throw DataError("duplicate stop_id in ground truth: " + rec.stop_id);
    }
    rec.surveyed.lat_deg = parse_coord(field_at(*row, lat_col), "lat", -90.0, 90.0, line);
    rec.surveyed.lon_deg = parse_coord(field_at(*row, lon_col), "lon", -180.0, 180.0, line);
    rec.travel_heading_deg =
        parse_coord(field_at(*row, hdg_col), "heading_deg", 0.0, 360.0, line);
    if (rec.travel_heading_deg == 360.0) {
      throw DataError("line " + std::to_string(line) + ": heading_deg must be in [0, 360)");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

AuditReport audit_mapping(const StopRegistry& registry,
                          const std::vector<GroundTruthRecord>& truth,
                          const std::vector<double>& thresholds_m) {
  for (double t : thresholds_m) {
    if (!(t > 0.0)) throw ConfigError("audit thresholds must be positive");
  }

  AuditReport report;
  std::set<std::string> matched_ids;
  for (const auto& gt : truth) {
    const StopRecord* rec = registry.find(gt.stop_id);
    if (rec == nullptr) {
      report.unmatched_ids.push_back(gt.stop_id);
      continue;
    }
    matched_ids.insert(gt.stop_id);
    report.per_stop_error_m[gt.stop_id] =
        geo::haversine_distance(rec->mapped, gt.surveyed);
  }
  for (const auto& rec : registry.records()) {
    if (!matched_ids.count(rec.stop_id)) report.unmatched_ids.push_back(rec.stop_id);
  }
  std::sort(report.unmatched_ids.begin(), report.unmatched_ids.end());

  if (report.per_stop_error_m.empty()) {
    throw DataError("audit join is empty: no stop_id matches between registry and ground truth");
  }

  const double n = static_cast<double>(report.per_stop_error_m.size());
  double sum = 0.0;
  for (const auto& [id, err] : report.per_stop_error_m) {
    sum += err;
    report.max_m = std::max(report.max_m, err);
  }
  report.mean_m = sum / n;
  if (n >= 2) {
    double ss = 0.0;
    for (const auto& [id, err] : report.per_stop_error_m) {
      const double d = err - report.mean_m;
      ss += d * d;
    }
    report.sd_m = std::sqrt(ss / (n - 1.0));
  }
  for (double t : thresholds_m) {
    std::size_t count = 0;
    for (const auto& [id, err] : report.per_stop_error_m) {
      if (err > t) count++;
    }
    report.fraction_exceeding[t] = static_cast<double>(count) / n;
  }
  return report;
}

std::string audit_csv(const AuditReport& report) {
  std::string out = "stop_id,error_m\n";
  for (const auto& [id, err] : report.per_stop_error_m) {
    out += csv_join({id, format_double(err, 3)});
    out += '\n';
  }
  return out;
}

std::string audit_json(const AuditReport& report) {
  nlohmann::json j;
  j["matched_stops"] = report.per_stop_error_m.size();
  j["mean_m"] = report.mean_m;
  j["sd_m"] = report.sd_m;
  j["max_m"] = report.max_m;
  nlohmann::json fractions = nlohmann::json::object();
  for (const auto& [t, f] : report.fraction_exceeding) {
    fractions[format_double(t, 3)] = f;
  }
  j["fraction_exceeding"] = fractions;
  j["unmatched_count"] = report.unmatched_ids.size();
  j["unmatched_ids"] = report.unmatched_ids;
  return j.dump(2) + "\n";
}

}  // namespace micronav::gtfs

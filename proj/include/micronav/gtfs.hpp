#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "micronav/geo.hpp"

namespace micronav::gtfs {

struct StopRecord {
  std::string stop_id;
  std::string stop_name;
  geo::GeoPoint mapped;
};

// stop_id unique; insertion order preserved for deterministic output.
class StopRegistry {
 public:
  void insert(StopRecord rec);  // throws DataError on duplicate or empty id
  const StopRecord* find(const std::string& stop_id) const;
  const std::vector<StopRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

 private:
  std::vector<StopRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct GroundTruthRecord {
  std::string stop_id;
  geo::GeoPoint surveyed;
  double travel_heading_deg = 0.0;  // [0, 360)
};

struct AuditReport {
  std::map<std::string, double> per_stop_error_m;  // matched stops only
  double mean_m = 0.0;
  double sd_m = 0.0;  // sample sd, n-1 denominator; 0 when n < 2
  double max_m = 0.0;
  std::map<double, double> fraction_exceeding;  // threshold_m -> fraction
  std::vector<std::string> unmatched_ids;       // from either side, sorted
};

// stops.txt subset: stop_id, stop_name, stop_lat, stop_lon located by header
// name; any other GTFS columns are ignored.
StopRegistry parse_stops(std::istream& stops_csv);

// header: stop_id,lat,lon,heading_deg
std::vector<GroundTruthRecord> parse_ground_truth(std::istream& csv);

AuditReport audit_mapping(const StopRegistry& registry,
                          const std::vector<GroundTruthRecord>& truth,
                          const std::vector<double>& thresholds_m);

std::string audit_csv(const AuditReport& report);   // stop_id,error_m
std::string audit_json(const AuditReport& report);  // summary document

}  // namespace micronav::gtfs

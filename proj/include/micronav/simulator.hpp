#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "micronav/geo.hpp"
#include "micronav/guidance.hpp"
#include "micronav/perception.hpp"
#include "micronav/rng.hpp"

namespace micronav::sim {

inline constexpr double kTickHz = 10.0;  // engine frame rate
inline constexpr double kHundredFeetM = 30.48;
inline constexpr double kMaxSimSeconds = 600.0;

struct AgentProfile {
  std::string name;
  double walk_speed_mps = 1.3;
  double scan_half_angle_deg = 30.0;
  double scan_period_s = 4.0;
  bool residual_vision = false;
  double residual_vision_range_m = 0.0;
  bool retrace_allowed = true;

  void validate() const;
};

struct MappingErrorDist {
  double p_tail = 0.0;     // probability of a gross mapping error
  double body_sd_m = 0.0;  // isotropic gaussian sd of the common case
  double tail_min_m = 0.0;
  double tail_max_m = 0.0;  // tail magnitude uniform in [tail_min, tail_max]
};

struct SiteModel {
  std::string label;  // "City" | "Suburb"
  double gps_bias_sd_m = 0.0;   // slowly varying offset, redrawn per trial
  double gps_noise_sd_m = 0.0;  // per-fix jitter
  double reroute_prob = 0.0;    // catastrophic navigation failure
  MappingErrorDist mapping_error_dist;
  double sign_slant_prob = 0.0;
  double occlusion_miss_prob = 0.0;

  void validate() const;
};

// Engine tuning shared by every trial; not site specific.
struct SimTuning {
  double arrival_radius_m = 5.0;  // GPS-follow perceived arrival threshold
  double gps_fix_period_s = 1.0;
  double walk_budget_extra_m = 30.0;  // keep searching this far past the sign
  double retrace_back_m = 15.0;       // retrace walks back this far, then forward
  double retrace_budget_m = 60.0;     // total retrace walk before giving up
  double slanted_sign_extra_deg = 75.0;  // facing rotation when the slant draw fires
  double px_jitter_sd = 0.0;
  double slant_cutoff_deg = 60.0;
  double max_detect_range_m = 60.0;
  double false_positive_prob = 0.0;
};

struct Scenario {
  std::string stop_id;
  geo::LocalVec sign_pos;
  double sign_facing_deg = 0.0;
  double travel_heading_deg = 0.0;
  double start_distance_m = 40.0;  // [30, 50]
  SiteModel site;
  AgentProfile agent;
  perception::CameraIntrinsics cam;
  perception::SignSpec sign;
  guidance::GuidanceConfig guidance;
  SimTuning tuning;

  void validate() const;  // throws ConfigError
};

enum class Policy { VisionGuided, GpsFollow };

enum class FailureReason {
  None,
  MapOver100Ft,
  Reroute,
  NeverConfirmed,
  LostAfterRetrace,
  Timeout,
};

struct TrialOutcome {
  Policy policy = Policy::VisionGuided;
  bool success = false;
  std::optional<double> gap_m;  // present iff success
  FailureReason failure_reason = FailureReason::None;
};

struct SiteErrors {
  geo::LocalVec gps_bias;
  geo::LocalVec mapping_offset;
  bool reroute = false;
};

// Instrumentation for tests: captures the per-trial draws shared by the two
// policies plus a few walk facts.
struct TrialDebug {
  SiteErrors errors;
  bool sign_slanted = false;
  double stop_true_distance_m = -1.0;
  double stop_est_distance_m = -1.0;  // guidance estimate the stop fired on
  bool retraced = false;
};

// Draw order: gps_bias east, north (gaussians); tail-vs-body uniform; then
// either tail magnitude + direction uniforms or body east, north gaussians;
// reroute bernoulli.
SiteErrors sample_site_errors(const SiteModel& site, Rng& rng);

TrialOutcome run_trial(const Scenario& scn, Policy policy, std::uint64_t seed,
                       TrialDebug* debug = nullptr);

struct TrialRow {
  std::int64_t trial_id = 0;
  std::string stop_id;
  std::string site;
  std::string vision_class;  // "residual" | "blind"
  std::uint64_t seed = 0;
  TrialOutcome vision;
  TrialOutcome gps;
};

struct TrialTable {
  std::vector<TrialRow> rows;
};

struct StopSpec {
  std::string stop_id;
  std::string site;
  geo::LocalVec sign_pos;
  double sign_facing_deg = 0.0;
  double travel_heading_deg = 0.0;
  double start_distance_m = 40.0;
};

struct ExperimentConfig {
  std::uint64_t master_seed = 0;
  int repetitions = 1;
  perception::CameraIntrinsics camera;
  perception::SignSpec sign;
  guidance::GuidanceConfig guidance;
  SimTuning tuning;
  std::map<std::string, SiteModel> site_models;
  std::vector<AgentProfile> agents;
  std::vector<StopSpec> scenarios;
  // optional cap per site label; sites absent from the map are unlimited
  std::map<std::string, std::int64_t> trials_per_site;
};

// Per-trial seed derivation, fixed for reproducibility across runs.
inline std::uint64_t trial_seed(std::uint64_t master_seed, std::int64_t trial_id) {
  return derive_seed(master_seed, static_cast<std::uint64_t>(trial_id));
}

// Called once per trial with the finished row and both policies' debug
// captures; lets tests assert paired-draw and stopping-rule invariants.
using TrialObserver =
    std::function<void(const TrialRow&, const TrialDebug& vision, const TrialDebug& gps)>;

// Enumerates repetition -> stop -> agent in config order, capping per site,
// and runs BOTH policies of each trial on the same seed so they share the
// mapping and GPS-bias draws (paired design).
TrialTable run_experiment(const ExperimentConfig& cfg, const TrialObserver& observer = {});

const char* policy_name(Policy policy);
const char* failure_reason_name(FailureReason reason);

// trial_id,stop_id,site,vision_class,seed,policy,success,gap_m,failure_reason
std::string trial_table_csv(const TrialTable& table);
TrialTable parse_trial_table(std::istream& csv);  // enforces pairing

}  // namespace micronav::sim

#include "micronav/simulator.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <map>

#include "micronav/csv.hpp"
#include "micronav/errors.hpp"
#include "micronav/io.hpp"

namespace micronav::sim {

namespace {

constexpr double kDt = 1.0 / kTickHz;

void check_prob(double p, const char* what) {
  if (p < 0.0 || p > 1.0) throw ConfigError(std::string(what) + " must be in [0, 1]");
}

void check_nonneg(double v, const char* what) {
  if (v < 0.0) throw ConfigError(std::string(what) + " must be >= 0");
}

geo::LocalVec gaussian2(Rng& rng, double sd) {
  const double e = rng.gaussian(0.0, sd);
  const double n = rng.gaussian(0.0, sd);
  return {e, n};
}

// triangle sweep between -half and +half with the given period
double sweep_yaw_deg(double t_s, double half_angle_deg, double period_s) {
  if (half_angle_deg <= 0.0 || period_s <= 0.0) return 0.0;
  const double phase = std::fmod(t_s, period_s) / period_s;
  return half_angle_deg * (4.0 * std::abs(phase - 0.5) - 1.0);
}

TrialOutcome make_failure(Policy policy, FailureReason reason) {
  TrialOutcome out;
  out.policy = policy;
  out.success = false;
  out.failure_reason = reason;
  return out;
}

TrialOutcome make_success(Policy policy, double gap_m) {
  TrialOutcome out;
  out.policy = policy;
  out.success = true;
  out.gap_m = gap_m;
  out.failure_reason = FailureReason::None;
  return out;
}

TrialOutcome run_gps_follow(const Scenario& scn, const SiteErrors& errs, Rng& rng) {
  if (geo::norm(errs.mapping_offset) > kHundredFeetM) {
    return make_failure(Policy::GpsFollow, FailureReason::MapOver100Ft);
  }
  if (errs.reroute) {
    return make_failure(Policy::GpsFollow, FailureReason::Reroute);
  }

  const geo::LocalVec unit = geo::heading_unit(scn.travel_heading_deg);
  const geo::LocalVec mapped = scn.sign_pos + errs.mapping_offset;
  geo::LocalVec pos = scn.sign_pos - unit * scn.start_distance_m;
  double heading = scn.travel_heading_deg;

  const int fix_ticks =
      std::max(1, static_cast<int>(std::lround(scn.tuning.gps_fix_period_s * kTickHz)));
  geo::LocalVec fix_noise{0.0, 0.0};

  for (std::int64_t tick = 0;; ++tick) {
    const double t = static_cast<double>(tick) * kDt;
    if (t > kMaxSimSeconds) return make_failure(Policy::GpsFollow, FailureReason::Timeout);

    if (tick % fix_ticks == 0) fix_noise = gaussian2(rng, scn.site.gps_noise_sd_m);
    const geo::LocalVec perceived = pos + errs.gps_bias + fix_noise;

    if (geo::norm(mapped - perceived) < scn.tuning.arrival_radius_m) {
      return make_success(Policy::GpsFollow,
                          geo::signed_gap(scn.sign_pos, pos, scn.travel_heading_deg));
    }
    heading = geo::azimuth_deg(mapped - perceived);
    pos = pos + geo::heading_unit(heading) * (scn.agent.walk_speed_mps * kDt);
  }
}

TrialOutcome run_vision_guided(const Scenario& scn, const SiteErrors& errs,
                               bool sign_slanted, Rng& rng, TrialDebug* debug) {
  const geo::LocalVec unit = geo::heading_unit(scn.travel_heading_deg);
  const geo::LocalVec mapped = scn.sign_pos + errs.mapping_offset;
  const double sign_facing =
      geo::wrap360(scn.sign_facing_deg +
                   (sign_slanted ? scn.tuning.slanted_sign_extra_deg : 0.0));

  perception::PerceptionNoise noise;
  noise.miss_prob = scn.site.occlusion_miss_prob;
  noise.slant_cutoff_deg = scn.tuning.slant_cutoff_deg;
  noise.px_jitter_sd = scn.tuning.px_jitter_sd;
  noise.max_range_m = scn.tuning.max_detect_range_m;
  noise.false_positive_prob = scn.tuning.false_positive_prob;

  geo::LocalVec pos = scn.sign_pos - unit * scn.start_distance_m;
  double heading = scn.travel_heading_deg;
  guidance::GuidanceState gstate = guidance::Inactive{};
  const guidance::DeviceAttitude upright{90.0, 0.0};

  const int fix_ticks =
      std::max(1, static_cast<int>(std::lround(scn.tuning.gps_fix_period_s * kTickHz)));
  geo::LocalVec fix_noise{0.0, 0.0};

  const double pass_budget_m = scn.start_distance_m + scn.tuning.walk_budget_extra_m;
  const double step_m = scn.agent.walk_speed_mps * kDt;
  bool ever_locked = false;
  bool retracing = false;
  int retraces_left = scn.agent.retrace_allowed ? 1 : 0;
  double walked_m = 0.0;
  double retrace_walked_m = 0.0;

  for (std::int64_t tick = 0;; ++tick) {
    const double t = static_cast<double>(tick) * kDt;
    if (t > kMaxSimSeconds) return make_failure(Policy::VisionGuided, FailureReason::Timeout);

    if (tick % fix_ticks == 0) fix_noise = gaussian2(rng, scn.site.gps_noise_sd_m);
    const geo::LocalVec perceived = pos + errs.gps_bias + fix_noise;

    // camera stays on the sign once locked; otherwise keep sweeping
    const double cam_yaw = std::holds_alternative<guidance::Locked>(gstate)
                               ? 0.0
                               : sweep_yaw_deg(t, scn.agent.scan_half_angle_deg,
                                               scn.agent.scan_period_s);

    const auto det = perception::synth_project(tick, {pos, heading}, cam_yaw,
                                               scn.sign_pos, sign_facing, scn.cam,
                                               scn.sign, noise, rng);
    std::optional<perception::RangedDetection> obs;
    if (det) obs = perception::estimate_distance(*det, scn.cam, scn.sign);

    const bool was_lost = std::holds_alternative<guidance::Lost>(gstate);
    auto [next_state, event] = guidance::step(gstate, upright, obs, scn.guidance);
    gstate = next_state;

    if (event.kind == guidance::AudioKind::Continuous &&
        event.level == guidance::ToneLevel::level4) {
      const double true_d = geo::norm(scn.sign_pos - pos);
      double gap = geo::signed_gap(scn.sign_pos, pos, scn.travel_heading_deg);
      if (scn.agent.residual_vision && true_d <= scn.agent.residual_vision_range_m) {
        gap = 0.0;  // close enough to spot or touch the pole
      }
      if (debug) {
        debug->stop_true_distance_m = true_d;
        debug->stop_est_distance_m = std::get<guidance::Locked>(gstate).last_distance_m;
      }
      return make_success(Policy::VisionGuided, gap);
    }

    if (std::holds_alternative<guidance::Locked>(gstate)) {
      ever_locked = true;
      retracing = false;
      heading = geo::wrap360(heading + cam_yaw + obs->bearing_deg);
    } else if (std::holds_alternative<guidance::Lost>(gstate)) {
      // keep walking toward where the sign was, hoping to re-acquire
    } else {
      const bool lock_expired = was_lost;  // Lost -> Scanning: grace ran out
      const bool budget_out = retracing
                                  ? retrace_walked_m >= scn.tuning.retrace_budget_m
                                  : walked_m >= pass_budget_m;
      if (lock_expired || budget_out) {
        if (!ever_locked) {
          return make_failure(Policy::VisionGuided, FailureReason::NeverConfirmed);
        }
        if (retraces_left > 0 && !retracing) {
          retraces_left--;
          retracing = true;
          retrace_walked_m = 0.0;
          if (debug) debug->retraced = true;
          heading = geo::wrap360(scn.travel_heading_deg + 180.0);
        } else {
          return make_failure(Policy::VisionGuided, FailureReason::LostAfterRetrace);
        }
      } else if (retracing) {
        // back toward the last point of contact, then try the approach again
        heading = retrace_walked_m < scn.tuning.retrace_back_m
                      ? geo::wrap360(scn.travel_heading_deg + 180.0)
                      : scn.travel_heading_deg;
      } else if (geo::norm(mapped - perceived) > scn.tuning.arrival_radius_m) {
        heading = geo::azimuth_deg(mapped - perceived);
      } else {
        heading = scn.travel_heading_deg;  // GPS says arrived: search on along the path
      }
    }

    pos = pos + geo::heading_unit(heading) * step_m;
    walked_m += step_m;
    if (retracing) retrace_walked_m += step_m;
  }
}

}  // namespace

void AgentProfile::validate() const {
  if (!(walk_speed_mps > 0.0)) throw ConfigError("walk_speed_mps must be positive");
  if (scan_half_angle_deg < 0.0 || scan_half_angle_deg > 90.0) {
    throw ConfigError("scan_half_angle_deg must be in [0, 90]");
  }
  if (!(scan_period_s > 0.0)) throw ConfigError("scan_period_s must be positive");
  check_nonneg(residual_vision_range_m, "residual_vision_range_m");
}

void SiteModel::validate() const {
  check_nonneg(gps_bias_sd_m, "gps_bias_sd_m");
  check_nonneg(gps_noise_sd_m, "gps_noise_sd_m");
  check_prob(reroute_prob, "reroute_prob");
  check_prob(mapping_error_dist.p_tail, "mapping_error.p_tail");
  check_nonneg(mapping_error_dist.body_sd_m, "mapping_error.body_sd_m");
  check_nonneg(mapping_error_dist.tail_min_m, "mapping_error.tail_min_m");
  if (mapping_error_dist.tail_min_m > mapping_error_dist.tail_max_m) {
    throw ConfigError("mapping_error tail_min_m must be <= tail_max_m");
  }
  check_prob(sign_slant_prob, "sign_slant_prob");
  check_prob(occlusion_miss_prob, "occlusion_miss_prob");
}

void Scenario::validate() const {
  if (stop_id.empty()) throw ConfigError("scenario stop_id must be non-empty");
  if (start_distance_m < 30.0 || start_distance_m > 50.0) {
    throw ConfigError("start_distance_m must be in [30, 50]");
  }
  site.validate();
  agent.validate();
  guidance.validate();
  if (!(cam.focal_px > 0.0) || !(cam.image_width_px > 0.0) ||
      !(cam.image_height_px > 0.0)) {
    throw ConfigError("camera intrinsics must be positive");
  }
  if (!(sign.physical_width_m > 0.0)) {
    throw ConfigError("sign physical_width_m must be positive");
  }
  if (!(tuning.arrival_radius_m > 0.0)) {
    throw ConfigError("arrival_radius_m must be positive");
  }
}

SiteErrors sample_site_errors(const SiteModel& site, Rng& rng) {
  SiteErrors out;
  out.gps_bias = gaussian2(rng, site.gps_bias_sd_m);

  const auto& dist = site.mapping_error_dist;
  if (rng.uniform01() < dist.p_tail) {
    const double magnitude = rng.uniform(dist.tail_min_m, dist.tail_max_m);
    const double angle = rng.uniform(0.0, 360.0);
    out.mapping_offset = geo::heading_unit(angle) * magnitude;
  } else {
    out.mapping_offset = gaussian2(rng, dist.body_sd_m);
  }
  out.reroute = rng.bernoulli(site.reroute_prob);
  return out;
}

TrialOutcome run_trial(const Scenario& scn, Policy policy, std::uint64_t seed,
                       TrialDebug* debug) {
  scn.validate();

  // stream 0 is shared between the two policies of a paired trial
  Rng shared(derive_seed(seed, 0));
  const SiteErrors errs = sample_site_errors(scn.site, shared);
  const bool slanted = shared.bernoulli(scn.site.sign_slant_prob);
  if (debug) {
    debug->errors = errs;
    debug->sign_slanted = slanted;
  }

  if (policy == Policy::GpsFollow) {
    Rng rng(derive_seed(seed, 2));
    return run_gps_follow(scn, errs, rng);
  }
  Rng rng(derive_seed(seed, 1));
  return run_vision_guided(scn, errs, slanted, rng, debug);
}

TrialTable run_experiment(const ExperimentConfig& cfg, const TrialObserver& observer) {
  if (cfg.scenarios.empty()) throw ConfigError("experiment has no scenarios");
  if (cfg.agents.empty()) throw ConfigError("experiment has no agents");
  if (cfg.repetitions < 1) throw ConfigError("repetitions must be >= 1");
  for (const auto& stop : cfg.scenarios) {
    if (!cfg.site_models.count(stop.site)) {
      throw ConfigError("scenario " + stop.stop_id + " references unknown site: " +
                        stop.site);
    }
  }

  std::map<std::string, std::int64_t> remaining = cfg.trials_per_site;

  TrialTable table;
  std::int64_t trial_id = 0;
  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    for (const auto& stop : cfg.scenarios) {
      for (const auto& agent : cfg.agents) {
        auto cap = remaining.find(stop.site);
        if (cap != remaining.end()) {
          if (cap->second <= 0) continue;
          cap->second--;
        }

        Scenario scn;
        scn.stop_id = stop.stop_id;
        scn.sign_pos = stop.sign_pos;
        scn.sign_facing_deg = stop.sign_facing_deg;
        scn.travel_heading_deg = stop.travel_heading_deg;
        scn.start_distance_m = stop.start_distance_m;
        scn.site = cfg.site_models.at(stop.site);
        scn.agent = agent;
        scn.cam = cfg.camera;
        scn.sign = cfg.sign;
        scn.guidance = cfg.guidance;
        scn.tuning = cfg.tuning;

        TrialRow row;
        row.trial_id = trial_id;
        row.stop_id = stop.stop_id;
        row.site = stop.site;
        row.vision_class = agent.residual_vision ? "residual" : "blind";
        row.seed = trial_seed(cfg.master_seed, trial_id);
        TrialDebug vision_debug, gps_debug;
        row.vision = run_trial(scn, Policy::VisionGuided, row.seed,
                               observer ? &vision_debug : nullptr);
        row.gps = run_trial(scn, Policy::GpsFollow, row.seed,
                            observer ? &gps_debug : nullptr);
        if (observer) observer(row, vision_debug, gps_debug);
        table.rows.push_back(std::move(row));
        trial_id++;
      }
    }
  }
  return table;
}

const char* policy_name(Policy policy) {
  return policy == Policy::VisionGuided ? "VisionGuided" : "GpsFollow";
}

const char* failure_reason_name(FailureReason reason) {
  switch (reason) {
    case FailureReason::None: return "NONE";
    case FailureReason::MapOver100Ft: return "MAP_OVER_100FT";
    case FailureReason::Reroute: return "REROUTE";
    case FailureReason::NeverConfirmed: return "NEVER_CONFIRMED";
    case FailureReason::LostAfterRetrace: return "LOST_AFTER_RETRACE";
    case FailureReason::Timeout: return "TIMEOUT";
  }
  return "NONE";
}

namespace {

FailureReason failure_reason_from(const std::string& name, std::size_t line) {
  for (FailureReason r : {FailureReason::None, FailureReason::MapOver100Ft,
                          FailureReason::Reroute, FailureReason::NeverConfirmed,
                          FailureReason::LostAfterRetrace, FailureReason::Timeout}) {
    if (name == failure_reason_name(r)) return r;
  }
  throw DataError("line " + std::to_string(line) + ": unknown failure_reason '" + name +
                  "'");
}

double parse_csv_num(const std::string& s, const char* what, std::size_t line) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    throw DataError("line " + std::to_string(line) + ": unparseable " + what + " '" +
                    s + "'");
  }
  return value;
}

}  // namespace

std::string trial_table_csv(const TrialTable& table) {
  std::string out =
      "trial_id,stop_id,site,vision_class,seed,policy,success,gap_m,failure_reason\n";
  auto emit = [&out](const TrialRow& row, const TrialOutcome& outcome) {
    out += csv_join({std::to_string(row.trial_id), row.stop_id, row.site,
                     row.vision_class, std::to_string(row.seed),
                     policy_name(outcome.policy), outcome.success ? "1" : "0",
                     outcome.gap_m ? format_double(*outcome.gap_m, 6) : std::string(),
                     failure_reason_name(outcome.failure_reason)});
    out += '\n';
  };
  for (const auto& row : table.rows) {
    emit(row, row.vision);
    emit(row, row.gps);
  }
  return out;
}

TrialTable parse_trial_table(std::istream& csv) {
  CsvReader reader(csv);
  auto header = reader.next();
  if (!header) throw DataError("empty trial table: missing header row");

  const char* names[] = {"trial_id", "stop_id", "site",  "vision_class", "seed",
                         "policy",   "success", "gap_m", "failure_reason"};
  std::size_t col[9];
  for (int i = 0; i < 9; ++i) {
    auto idx = find_column(*header, names[i]);
    if (!idx) throw DataError(std::string("missing required column: ") + names[i]);
    col[i] = *idx;
  }

  TrialTable table;
  std::map<std::int64_t, std::size_t> row_index;
  std::map<std::int64_t, int> policies_seen;

  while (auto row = reader.next()) {
    const std::size_t line = reader.record_line();
    auto get = [&](int i) -> std::string {
      return col[i] < row->size() ? (*row)[col[i]] : std::string();
    };

    const auto trial_id =
        static_cast<std::int64_t>(parse_csv_num(get(0), "trial_id", line));
    TrialOutcome outcome;
    const std::string policy = get(5);
    if (policy == policy_name(Policy::VisionGuided)) {
      outcome.policy = Policy::VisionGuided;
    } else if (policy == policy_name(Policy::GpsFollow)) {
      outcome.policy = Policy::GpsFollow;
    } else {
      throw DataError("line " + std::to_string(line) + ": unknown policy '" + policy +
                      "'");
    }
    const std::string success = get(6);
    if (success != "0" && success != "1") {
      throw DataError("line " + std::to_string(line) + ": success must be 0 or 1");
    }
    outcome.success = success == "1";
    const std::string gap = get(7);
    if (!gap.empty()) outcome.gap_m = parse_csv_num(gap, "gap_m", line);
    outcome.failure_reason = failure_reason_from(get(8), line);

    if (outcome.success != outcome.gap_m.has_value() ||
        outcome.success != (outcome.failure_reason == FailureReason::None)) {
      throw DataError("line " + std::to_string(line) +
                      ": success, gap_m and failure_reason are inconsistent");
    }

    auto it = row_index.find(trial_id);
    if (it == row_index.end()) {
      TrialRow tr;
      tr.trial_id = trial_id;
      tr.stop_id = get(1);
      tr.site = get(2);
      tr.vision_class = get(3);
      tr.seed = static_cast<std::uint64_t>(parse_csv_num(get(4), "seed", line));
      it = row_index.emplace(trial_id, table.rows.size()).first;
      table.rows.push_back(std::move(tr));
    }
    TrialRow& tr = table.rows[it->second];
    const int bit = outcome.policy == Policy::VisionGuided ? 1 : 2;
    if (policies_seen[trial_id] & bit) {
      throw DataError("line " + std::to_string(line) + ": duplicate " + policy +
                      " row for trial " + std::to_string(trial_id));
    }
    policies_seen[trial_id] |= bit;
    if (outcome.policy == Policy::VisionGuided) tr.vision = outcome;
    else tr.gps = outcome;
  }

  for (const auto& row : table.rows) {
    if (policies_seen[row.trial_id] != 3) {
      throw DataError("trial " + std::to_string(row.trial_id) +
                      " is unpaired: missing one policy row");
    }
  }
  return table;
}

}  // namespace micronav::sim

#include "micronav/config.hpp"

#include <json.hpp>

#include "micronav/errors.hpp"

namespace micronav::config {

namespace {

using nlohmann::json;

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

const json& require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(std::string("missing config key: ") + key);
  return *it;
}

double num(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number()) throw ConfigError(std::string("config key must be a number: ") + key);
  return v.get<double>();
}

double num_or(const json& j, const char* key, double fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number()) throw ConfigError(std::string("config key must be a number: ") + key);
  return it->get<double>();
}

bool bool_or(const json& j, const char* key, bool fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_boolean()) throw ConfigError(std::string("config key must be a bool: ") + key);
  return it->get<bool>();
}

std::string str(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_string()) throw ConfigError(std::string("config key must be a string: ") + key);
  return v.get<std::string>();
}

perception::CameraIntrinsics camera_from(const json& j) {
  perception::CameraIntrinsics cam;
  cam.focal_px = num(j, "focal_px");
  cam.image_width_px = num(j, "image_width_px");
  cam.image_height_px = num(j, "image_height_px");
  return cam;
}

perception::SignSpec sign_from(const json& j) {
  perception::SignSpec sign;
  sign.physical_width_m = num(j, "physical_width_m");
  sign.mount_center_height_m = num_or(j, "mount_center_height_m", 2.4);
  return sign;
}

guidance::GuidanceConfig guidance_from(const json& j) {
  guidance::GuidanceConfig cfg;
  cfg.band_deg = num_or(j, "band_deg", cfg.band_deg);
  cfg.k_confirm = static_cast<int>(num_or(j, "k_confirm", cfg.k_confirm));
  if (auto it = j.find("thresholds_m"); it != j.end()) {
    if (!it->is_array() || it->size() != 3) {
      throw ConfigError("thresholds_m must be an array of three numbers");
    }
    for (int i = 0; i < 3; ++i) cfg.thresholds_m[i] = (*it)[i].get<double>();
  }
  cfg.lost_grace_frames =
      static_cast<int>(num_or(j, "lost_grace_frames", cfg.lost_grace_frames));
  cfg.distance_smoothing = num_or(j, "distance_smoothing", cfg.distance_smoothing);
  cfg.validate();
  return cfg;
}

sim::SimTuning tuning_from(const json& j) {
  sim::SimTuning t;
  t.arrival_radius_m = num_or(j, "arrival_radius_m", t.arrival_radius_m);
  t.gps_fix_period_s = num_or(j, "gps_fix_period_s", t.gps_fix_period_s);
  t.walk_budget_extra_m = num_or(j, "walk_budget_extra_m", t.walk_budget_extra_m);
  t.retrace_budget_m = num_or(j, "retrace_budget_m", t.retrace_budget_m);
  t.slanted_sign_extra_deg = num_or(j, "slanted_sign_extra_deg", t.slanted_sign_extra_deg);
  t.px_jitter_sd = num_or(j, "px_jitter_sd", t.px_jitter_sd);
  t.slant_cutoff_deg = num_or(j, "slant_cutoff_deg", t.slant_cutoff_deg);
  t.max_detect_range_m = num_or(j, "max_detect_range_m", t.max_detect_range_m);
  t.false_positive_prob = num_or(j, "false_positive_prob", t.false_positive_prob);
  return t;
}

sim::SiteModel site_from(const std::string& label, const json& j) {
  sim::SiteModel site;
  site.label = label;
  site.gps_bias_sd_m = num(j, "gps_bias_sd_m");
  site.gps_noise_sd_m = num(j, "gps_noise_sd_m");
  site.reroute_prob = num(j, "reroute_prob");
  const json& me = require(j, "mapping_error");
  site.mapping_error_dist.p_tail = num(me, "p_tail");
  site.mapping_error_dist.body_sd_m = num(me, "body_sd_m");
  site.mapping_error_dist.tail_min_m = num(me, "tail_min_m");
  site.mapping_error_dist.tail_max_m = num(me, "tail_max_m");
  site.sign_slant_prob = num(j, "sign_slant_prob");
  site.occlusion_miss_prob = num(j, "occlusion_miss_prob");
  site.validate();
  return site;
}

sim::AgentProfile agent_from(const json& j) {
  sim::AgentProfile agent;
  agent.name = str(j, "name");
  agent.walk_speed_mps = num(j, "walk_speed_mps");
  agent.scan_half_angle_deg = num(j, "scan_half_angle_deg");
  agent.scan_period_s = num(j, "scan_period_s");
  agent.residual_vision = bool_or(j, "residual_vision", false);
  agent.residual_vision_range_m = num_or(j, "residual_vision_range_m", 0.0);
  agent.retrace_allowed = bool_or(j, "retrace_allowed", true);
  agent.validate();
  return agent;
}

sim::StopSpec stop_from(const json& j) {
  sim::StopSpec stop;
  stop.stop_id = str(j, "stop_id");
  stop.site = str(j, "site");
  stop.sign_pos.east_m = num(j, "sign_east_m");
  stop.sign_pos.north_m = num(j, "sign_north_m");
  stop.sign_facing_deg = num(j, "sign_facing_deg");
  stop.travel_heading_deg = num(j, "travel_heading_deg");
  stop.start_distance_m = num(j, "start_distance_m");
  return stop;
}

}  // namespace

sim::ExperimentConfig experiment_from_json_text(const std::string& text) {
  const json j = parse(text);
  sim::ExperimentConfig cfg;
  cfg.master_seed = require(j, "master_seed").get<std::uint64_t>();
  cfg.repetitions = static_cast<int>(num_or(j, "repetitions", 1));
  cfg.camera = camera_from(require(j, "camera"));
  cfg.sign = sign_from(require(j, "sign"));
  cfg.guidance = guidance_from(require(j, "guidance"));
  if (auto it = j.find("tuning"); it != j.end()) cfg.tuning = tuning_from(*it);

  const json& sites = require(j, "site_models");
  if (!sites.is_object() || sites.empty()) {
    throw ConfigError("site_models must be a non-empty object");
  }
  for (auto it = sites.begin(); it != sites.end(); ++it) {
    cfg.site_models.emplace(it.key(), site_from(it.key(), it.value()));
  }

  const json& agents = require(j, "agents");
  if (!agents.is_array() || agents.empty()) {
    throw ConfigError("agents must be a non-empty array");
  }
  for (const auto& a : agents) cfg.agents.push_back(agent_from(a));

  const json& scenarios = require(j, "scenarios");
  if (!scenarios.is_array() || scenarios.empty()) {
    throw ConfigError("scenarios must be a non-empty array");
  }
  for (const auto& s : scenarios) cfg.scenarios.push_back(stop_from(s));

  if (auto it = j.find("trials_per_site"); it != j.end()) {
    for (auto t = it->begin(); t != it->end(); ++t) {
      cfg.trials_per_site[t.key()] = t->get<std::int64_t>();
    }
  }
  return cfg;
}

ReplayConfig replay_from_json_text(const std::string& text) {
  const json j = parse(text);
  ReplayConfig cfg;
  cfg.guidance = guidance_from(require(j, "guidance"));
  cfg.camera = camera_from(require(j, "camera"));
  cfg.sign = sign_from(require(j, "sign"));
  return cfg;
}

std::string experiment_to_json_text(const sim::ExperimentConfig& cfg) {
  json j;
  j["master_seed"] = cfg.master_seed;
  j["repetitions"] = cfg.repetitions;
  j["camera"] = {{"focal_px", cfg.camera.focal_px},
                 {"image_width_px", cfg.camera.image_width_px},
                 {"image_height_px", cfg.camera.image_height_px}};
  j["sign"] = {{"physical_width_m", cfg.sign.physical_width_m},
               {"mount_center_height_m", cfg.sign.mount_center_height_m}};
  j["guidance"] = {{"band_deg", cfg.guidance.band_deg},
                   {"k_confirm", cfg.guidance.k_confirm},
                   {"thresholds_m", cfg.guidance.thresholds_m},
                   {"lost_grace_frames", cfg.guidance.lost_grace_frames},
                   {"distance_smoothing", cfg.guidance.distance_smoothing}};
  j["tuning"] = {{"arrival_radius_m", cfg.tuning.arrival_radius_m},
                 {"gps_fix_period_s", cfg.tuning.gps_fix_period_s},
                 {"walk_budget_extra_m", cfg.tuning.walk_budget_extra_m},
                 {"retrace_budget_m", cfg.tuning.retrace_budget_m},
                 {"slanted_sign_extra_deg", cfg.tuning.slanted_sign_extra_deg},
                 {"px_jitter_sd", cfg.tuning.px_jitter_sd},
                 {"slant_cutoff_deg", cfg.tuning.slant_cutoff_deg},
                 {"max_detect_range_m", cfg.tuning.max_detect_range_m},
                 {"false_positive_prob", cfg.tuning.false_positive_prob}};
  json sites = json::object();
  for (const auto& [label, site] : cfg.site_models) {
    sites[label] = {{"gps_bias_sd_m", site.gps_bias_sd_m},
                    {"gps_noise_sd_m", site.gps_noise_sd_m},
                    {"reroute_prob", site.reroute_prob},
                    {"mapping_error",
                     {{"p_tail", site.mapping_error_dist.p_tail},
                      {"body_sd_m", site.mapping_error_dist.body_sd_m},
                      {"tail_min_m", site.mapping_error_dist.tail_min_m},
                      {"tail_max_m", site.mapping_error_dist.tail_max_m}}},
                    {"sign_slant_prob", site.sign_slant_prob},
                    {"occlusion_miss_prob", site.occlusion_miss_prob}};
  }
  j["site_models"] = sites;
  j["agents"] = json::array();
  for (const auto& agent : cfg.agents) {
    j["agents"].push_back({{"name", agent.name},
                           {"walk_speed_mps", agent.walk_speed_mps},
                           {"scan_half_angle_deg", agent.scan_half_angle_deg},
                           {"scan_period_s", agent.scan_period_s},
                           {"residual_vision", agent.residual_vision},
                           {"residual_vision_range_m", agent.residual_vision_range_m},
                           {"retrace_allowed", agent.retrace_allowed}});
  }
  j["scenarios"] = json::array();
  for (const auto& stop : cfg.scenarios) {
    j["scenarios"].push_back({{"stop_id", stop.stop_id},
                              {"site", stop.site},
                              {"sign_east_m", stop.sign_pos.east_m},
                              {"sign_north_m", stop.sign_pos.north_m},
                              {"sign_facing_deg", stop.sign_facing_deg},
                              {"travel_heading_deg", stop.travel_heading_deg},
                              {"start_distance_m", stop.start_distance_m}});
  }
  if (!cfg.trials_per_site.empty()) {
    json caps = json::object();
    for (const auto& [site, n] : cfg.trials_per_site) caps[site] = n;
    j["trials_per_site"] = caps;
  }
  return j.dump(2) + "\n";
}

}  // namespace micronav::config

#include "micronav/guidance.hpp"

#include <cmath>

#include "micronav/csv.hpp"
#include "micronav/errors.hpp"
#include "micronav/io.hpp"

namespace micronav::guidance {

namespace {

AudioEvent silence() { return {AudioKind::Silence, std::nullopt}; }
AudioEvent blip(ToneLevel lv) { return {AudioKind::Blip, lv}; }
AudioEvent continuous(ToneLevel lv) { return {AudioKind::Continuous, lv}; }

}  // namespace

void GuidanceConfig::validate() const {
  if (!(band_deg > 0.0)) throw ConfigError("band_deg must be positive");
  if (k_confirm < 1) throw ConfigError("k_confirm must be >= 1");
  if (!(thresholds_m[0] < thresholds_m[1] && thresholds_m[1] < thresholds_m[2])) {
    throw ConfigError("tone thresholds must be strictly ascending");
  }
  if (thresholds_m[0] != 2.0) {
    throw ConfigError("nearest tone threshold is fixed at 2.0 m");
  }
  if (lost_grace_frames < 0) throw ConfigError("lost_grace_frames must be >= 0");
  if (distance_smoothing < 0.0 || distance_smoothing >= 1.0) {
    throw ConfigError("distance_smoothing must be in [0, 1)");
  }
}

bool upright_gate(const DeviceAttitude& att, double band_deg) {
  if (!(band_deg > 0.0)) throw ConfigError("band_deg must be positive");
  return std::abs(att.pitch_deg - 90.0) <= band_deg;
}

ToneLevel tone_level(double est_distance_m, const std::array<double, 3>& thresholds_m) {
  if (!(thresholds_m[0] < thresholds_m[1] && thresholds_m[1] < thresholds_m[2])) {
    throw ConfigError("tone thresholds must be strictly ascending");
  }
  if (est_distance_m <= thresholds_m[0]) return ToneLevel::level4;
  if (est_distance_m <= thresholds_m[1]) return ToneLevel::level3;
  if (est_distance_m <= thresholds_m[2]) return ToneLevel::level2;
  return ToneLevel::level1;
}

StepResult step(const GuidanceState& state, const DeviceAttitude& att,
                const std::optional<perception::RangedDetection>& obs,
                const GuidanceConfig& cfg) {
  cfg.validate();

  if (!upright_gate(att, cfg.band_deg)) return {Inactive{}, silence()};

  const bool hit = obs.has_value();
  const double obs_d = hit ? obs->est_distance_m : 0.0;

  if (const auto* locked = std::get_if<Locked>(&state)) {
    if (!hit) {
      if (cfg.lost_grace_frames < 1) return {Scanning{0}, silence()};
      return {Lost{1}, silence()};
    }
    double d = obs_d;
    if (cfg.distance_smoothing > 0.0) {
      d = cfg.distance_smoothing * locked->last_distance_m +
          (1.0 - cfg.distance_smoothing) * obs_d;
    }
    const ToneLevel lv = tone_level(d, cfg.thresholds_m);
    return {Locked{lv, d}, continuous(lv)};
  }

  if (const auto* lost = std::get_if<Lost>(&state)) {
    if (hit) {  // re-lock without re-confirmation
      const ToneLevel lv = tone_level(obs_d, cfg.thresholds_m);
      return {Locked{lv, obs_d}, continuous(lv)};
    }
    if (lost->frames_since_loss + 1 > cfg.lost_grace_frames) {
      return {Scanning{0}, silence()};
    }
    return {Lost{lost->frames_since_loss + 1}, silence()};
  }

  // Inactive or Scanning: counting consecutive hits toward confirmation
  int run = 0;
  if (const auto* scanning = std::get_if<Scanning>(&state)) run = scanning->run_length;

  if (!hit) return {Scanning{0}, silence()};
  run++;
  const ToneLevel lv = tone_level(obs_d, cfg.thresholds_m);
  if (run >= cfg.k_confirm) return {Locked{lv, obs_d}, continuous(lv)};
  return {Scanning{run}, blip(lv)};
}

std::string state_name(const GuidanceState& state) {
  if (std::holds_alternative<Inactive>(state)) return "Inactive";
  if (std::holds_alternative<Scanning>(state)) return "Scanning";
  if (std::holds_alternative<Locked>(state)) return "Locked";
  return "Lost";
}

std::string audio_kind_name(AudioKind kind) {
  switch (kind) {
    case AudioKind::Silence: return "SILENCE";
    case AudioKind::Blip: return "BLIP";
    case AudioKind::Continuous: return "CONTINUOUS";
  }
  return "SILENCE";
}

std::string timeline_csv(const std::vector<TimelineRow>& rows) {
  std::string out = "frame_index,state,event_kind,level,est_distance_m\n";
  for (const auto& row : rows) {
    out += csv_join({std::to_string(row.frame_index), row.state, row.event_kind,
                     row.level ? std::to_string(*row.level) : std::string(),
                     row.est_distance_m ? format_double(*row.est_distance_m, 3)
                                        : std::string()});
    out += '\n';
  }
  return out;
}

}  // namespace micronav::guidance

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "micronav/perception.hpp"

namespace micronav::guidance {

struct DeviceAttitude {
  double pitch_deg = 90.0;  // 90 = screen vertical, camera level
  double roll_deg = 0.0;
};

// Four proximity bands; level4 is the highest frequency and means the sign is
// within the nearest threshold (2 m).
enum class ToneLevel : int { level1 = 1, level2 = 2, level3 = 3, level4 = 4 };

inline int tone_level_int(ToneLevel lv) { return static_cast<int>(lv); }

struct GuidanceConfig {
  double band_deg = 25.0;  // upright tolerance around vertical
  int k_confirm = 3;
  // upper bound of levels 4, 3, 2; level 1 beyond. thresholds_m[0] is the
  // fixed 2 m arrival band.
  std::array<double, 3> thresholds_m = {2.0, 6.0, 15.0};
  int lost_grace_frames = 10;      // re-lock window after losing the sign
  double distance_smoothing = 0.0;  // weight on previous smoothed value; 0 = off

  void validate() const;  // throws ConfigError
};

struct Inactive {};
struct Scanning {
  int run_length = 0;
};
struct Locked {
  ToneLevel level = ToneLevel::level1;
  double last_distance_m = 0.0;
};
struct Lost {
  int frames_since_loss = 1;
};

using GuidanceState = std::variant<Inactive, Scanning, Locked, Lost>;

enum class AudioKind { Silence, Blip, Continuous };

struct AudioEvent {
  AudioKind kind = AudioKind::Silence;
  std::optional<ToneLevel> level;  // present iff kind != Silence
};

bool upright_gate(const DeviceAttitude& att, double band_deg);

// thresholds must be strictly ascending with thresholds[0] == 2.0; boundaries
// are inclusive downward (d == threshold maps to the nearer band).
ToneLevel tone_level(double est_distance_m, const std::array<double, 3>& thresholds_m);

struct StepResult {
  GuidanceState state;
  AudioEvent event;
};

// Total transition function. Not upright => Inactive + Silence regardless of
// the observation; unconfirmed hits blip while Scanning; the k_confirm-th
// consecutive hit locks with a continuous tone; losing the sign from Locked
// silences immediately and allows re-lock within lost_grace_frames.
StepResult step(const GuidanceState& state, const DeviceAttitude& att,
                const std::optional<perception::RangedDetection>& obs,
                const GuidanceConfig& cfg);

std::string state_name(const GuidanceState& state);
std::string audio_kind_name(AudioKind kind);

struct TimelineRow {
  std::int64_t frame_index = 0;
  std::string state;
  std::string event_kind;
  std::optional<int> level;
  std::optional<double> est_distance_m;
};

// frame_index,state,event_kind,level,est_distance_m
std::string timeline_csv(const std::vector<TimelineRow>& rows);

}  // namespace micronav::guidance

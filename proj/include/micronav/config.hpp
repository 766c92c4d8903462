#pragma once

#include <string>

#include "micronav/guidance.hpp"
#include "micronav/perception.hpp"
#include "micronav/simulator.hpp"

namespace micronav::config {

// Bundle consumed by the replay driver: guidance parameters plus the camera
// and sign geometry needed to range raw bounding boxes.
struct ReplayConfig {
  guidance::GuidanceConfig guidance;
  perception::CameraIntrinsics camera;
  perception::SignSpec sign;
};

// Throw ConfigError naming the offending key on any schema problem.
sim::ExperimentConfig experiment_from_json_text(const std::string& text);
ReplayConfig replay_from_json_text(const std::string& text);

std::string experiment_to_json_text(const sim::ExperimentConfig& cfg);

}  // namespace micronav::config

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "micronav/geo.hpp"
#include "micronav/rng.hpp"

namespace micronav::perception {

struct CameraIntrinsics {
  double focal_px = 1000.0;
  double image_width_px = 1440.0;
  double image_height_px = 1920.0;

  double hfov_deg() const {
    return 2.0 * geo::rad2deg(std::atan(image_width_px / (2.0 * focal_px)));
  }
};

struct SignSpec {
  double physical_width_m = 0.3048;  // 12 in placard, agency-configurable
  double mount_center_height_m = 2.4;
};

struct Detection {
  std::int64_t frame_index = 0;
  double bbox_center_x_px = 0.0;
  double bbox_center_y_px = 0.0;
  double bbox_width_px = 0.0;
  double bbox_height_px = 0.0;
  double confidence = 1.0;
};

struct RangedDetection {
  Detection detection;
  double est_distance_m = 0.0;
  double bearing_deg = 0.0;  // relative to optical axis, positive right
};

struct PerceptionNoise {
  double miss_prob = 0.0;          // per-frame false negative, independent
  double slant_cutoff_deg = 60.0;  // max viewing incidence still detectable
  double px_jitter_sd = 0.0;       // gaussian noise on bbox width
  double max_range_m = 60.0;
  double false_positive_prob = 0.0;  // spurious bbox when the sign is not seen
};

// Known-size pinhole ranging: d = focal_px * physical_width_m / bbox_width_px.
// Throws DataError for non-positive width or a center outside the image.
RangedDetection estimate_distance(const Detection& det, const CameraIntrinsics& cam,
                                  const SignSpec& sign);

// Simulation oracle inverting the pinhole model. Returns nullopt when the sign
// is outside the horizontal FOV, beyond max range, viewed past the slant
// cutoff, clipped by the image border, or dropped by the miss draw.
// camera_yaw_deg is relative to the agent heading. Per call the rng consumes,
// in order: one miss draw, one width-jitter gaussian, one false-positive draw
// (plus three bbox draws only when a false positive fires).
std::optional<Detection> synth_project(std::int64_t frame_index, const geo::Pose2D& agent,
                                       double camera_yaw_deg, const geo::LocalVec& sign_pos,
                                       double sign_facing_deg, const CameraIntrinsics& cam,
                                       const SignSpec& sign, const PerceptionNoise& noise,
                                       Rng& rng);

enum class ConfirmKind { Confirmed, Lost };

struct ConfirmEvent {
  std::int64_t frame_index = 0;
  ConfirmKind kind = ConfirmKind::Confirmed;
};

// Run-length confirmation: Confirmed fires on the k-th consecutive hit, Lost
// on the first miss after a confirmed run; any miss resets the run.
class ConfirmationFilter {
 public:
  explicit ConfirmationFilter(int k_confirm);  // throws ConfigError when < 1
  std::optional<ConfirmEvent> feed(std::int64_t frame_index, bool hit);

 private:
  int k_;
  int run_ = 0;
  bool confirmed_ = false;
  std::optional<std::int64_t> last_frame_;
};

std::vector<ConfirmEvent> confirm_stream(
    const std::vector<std::pair<std::int64_t, bool>>& frames, int k_confirm);

// Replay log: frame_index,t_s,agent_east_m,agent_north_m,heading_deg,
// device_pitch_deg,cam_yaw_deg,bbox_cx,bbox_cy,bbox_w,bbox_h,confidence.
// Empty bbox fields mean "no detection".
struct ReplayFrame {
  std::int64_t frame_index = 0;
  double t_s = 0.0;
  geo::Pose2D agent;
  double device_pitch_deg = 90.0;
  double cam_yaw_deg = 0.0;
  std::optional<Detection> detection;
};

std::vector<ReplayFrame> read_replay_log(std::istream& csv);

}  // namespace micronav::perception

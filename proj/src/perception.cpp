#include "micronav/perception.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <string>

#include "micronav/csv.hpp"
#include "micronav/errors.hpp"

namespace micronav::perception {

namespace {

constexpr double kSynthBoxAspect = 1.6;  // bbox height/width for the synthetic sign

double parse_num(const std::string& s, const char* what, std::size_t line) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    throw DataError("line " + std::to_string(line) + ": unparseable " + what + " '" +
                    s + "'");
  }
  return value;
}

}  // namespace

RangedDetection estimate_distance(const Detection& det, const CameraIntrinsics& cam,
                                  const SignSpec& sign) {
  if (!(det.bbox_width_px > 0.0)) {
    throw DataError("invalid detection: bbox_width_px must be positive");
  }
  if (det.bbox_center_x_px < 0.0 || det.bbox_center_x_px > cam.image_width_px) {
    throw DataError("invalid detection: bbox center outside image");
  }
  RangedDetection out;
  out.detection = det;
  out.est_distance_m = cam.focal_px * sign.physical_width_m / det.bbox_width_px;
  out.bearing_deg = geo::rad2deg(
      std::atan((det.bbox_center_x_px - cam.image_width_px / 2.0) / cam.focal_px));
  return out;
}

std::optional<Detection> synth_project(std::int64_t frame_index, const geo::Pose2D& agent,
                                       double camera_yaw_deg, const geo::LocalVec& sign_pos,
                                       double sign_facing_deg, const CameraIntrinsics& cam,
                                       const SignSpec& sign, const PerceptionNoise& noise,
                                       Rng& rng) {
  const geo::LocalVec delta = sign_pos - agent.position;
  const double distance = geo::norm(delta);

  bool visible = distance > 1e-6 && distance <= noise.max_range_m;

  const double cam_abs_deg = geo::wrap360(agent.heading_deg + camera_yaw_deg);
  const double bearing_deg = geo::wrap180(geo::azimuth_deg(delta) - cam_abs_deg);
  if (std::abs(bearing_deg) > cam.hfov_deg() / 2.0) visible = false;

  // incidence: angle between the sign plane's normal and the sign->agent ray;
  // the placard is printed on both faces, so the nearer normal counts
  const double view_az = geo::azimuth_deg(agent.position - sign_pos);
  const double front = std::abs(geo::wrap180(view_az - sign_facing_deg));
  const double incidence_deg = std::min(front, 180.0 - front);
  if (incidence_deg > noise.slant_cutoff_deg) visible = false;

  // fixed draw order per frame regardless of visibility
  const bool missed = rng.bernoulli(noise.miss_prob);
  const double width_jitter = rng.gaussian(0.0, noise.px_jitter_sd);
  const bool fp_fired = rng.bernoulli(noise.false_positive_prob);

  if (visible && !missed) {
    Detection det;
    det.frame_index = frame_index;
    const double clean_width = cam.focal_px * sign.physical_width_m *
                               std::cos(geo::deg2rad(incidence_deg)) / distance;
    det.bbox_width_px = clean_width + width_jitter;
    det.bbox_height_px = det.bbox_width_px * kSynthBoxAspect;
    det.bbox_center_x_px =
        cam.image_width_px / 2.0 + cam.focal_px * std::tan(geo::deg2rad(bearing_deg));
    det.bbox_center_y_px = cam.image_height_px / 2.0;
    det.confidence = 1.0;
    if (det.bbox_width_px < 1.0) return std::nullopt;
    if (det.bbox_center_x_px - det.bbox_width_px / 2.0 < 0.0 ||
        det.bbox_center_x_px + det.bbox_width_px / 2.0 > cam.image_width_px ||
        det.bbox_center_y_px - det.bbox_height_px / 2.0 < 0.0 ||
        det.bbox_center_y_px + det.bbox_height_px / 2.0 > cam.image_height_px) {
      return std::nullopt;  // clipped by the image border: no usable box
    }
    return det;
  }

  if (fp_fired) {
    Detection det;
    det.frame_index = frame_index;
    det.bbox_width_px = rng.uniform(10.0, 60.0);
    det.bbox_height_px = det.bbox_width_px * kSynthBoxAspect;
    det.bbox_center_x_px = rng.uniform(det.bbox_width_px / 2.0,
                                       cam.image_width_px - det.bbox_width_px / 2.0);
    det.bbox_center_y_px = rng.uniform(det.bbox_height_px / 2.0,
                                       cam.image_height_px - det.bbox_height_px / 2.0);
    det.confidence = 0.5;
    return det;
  }
  return std::nullopt;
}

ConfirmationFilter::ConfirmationFilter(int k_confirm) : k_(k_confirm) {
  if (k_confirm < 1) throw ConfigError("k_confirm must be >= 1");
}

std::optional<ConfirmEvent> ConfirmationFilter::feed(std::int64_t frame_index, bool hit) {
  if (last_frame_ && frame_index <= *last_frame_) {
    throw DataError("confirm stream: frame_index must be strictly increasing");
  }
  last_frame_ = frame_index;

  if (hit) {
    run_++;
    if (!confirmed_ && run_ == k_) {
      confirmed_ = true;
      return ConfirmEvent{frame_index, ConfirmKind::Confirmed};
    }
    return std::nullopt;
  }
  run_ = 0;
  if (confirmed_) {
    confirmed_ = false;
    return ConfirmEvent{frame_index, ConfirmKind::Lost};
  }
  return std::nullopt;
}

std::vector<ConfirmEvent> confirm_stream(
    const std::vector<std::pair<std::int64_t, bool>>& frames, int k_confirm) {
  ConfirmationFilter filter(k_confirm);
  std::vector<ConfirmEvent> events;
  for (const auto& [frame, hit] : frames) {
    if (auto ev = filter.feed(frame, hit)) events.push_back(*ev);
  }
  return events;
}

std::vector<ReplayFrame> read_replay_log(std::istream& csv) {
  CsvReader reader(csv);
  auto header = reader.next();
  if (!header) throw DataError("empty replay log: missing header row");

  const char* names[] = {"frame_index", "t_s",       "agent_east_m", "agent_north_m",
                         "heading_deg", "device_pitch_deg", "cam_yaw_deg",
                         "bbox_cx",     "bbox_cy",   "bbox_w",       "bbox_h",
                         "confidence"};
  std::size_t col[12];
  for (int i = 0; i < 12; ++i) {
    auto idx = find_column(*header, names[i]);
    if (!idx) throw DataError(std::string("missing required column: ") + names[i]);
    col[i] = *idx;
  }

  std::vector<ReplayFrame> out;
  while (auto row = reader.next()) {
    const std::size_t line = reader.record_line();
    auto get = [&](int i) -> std::string {
      return col[i] < row->size() ? (*row)[col[i]] : std::string();
    };
    ReplayFrame fr;
    fr.frame_index = static_cast<std::int64_t>(parse_num(get(0), names[0], line));
    fr.t_s = parse_num(get(1), names[1], line);
    fr.agent.position.east_m = parse_num(get(2), names[2], line);
    fr.agent.position.north_m = parse_num(get(3), names[3], line);
    fr.agent.heading_deg = parse_num(get(4), names[4], line);
    fr.device_pitch_deg = parse_num(get(5), names[5], line);
    fr.cam_yaw_deg = parse_num(get(6), names[6], line);

    const bool any_bbox = !get(7).empty() || !get(8).empty() || !get(9).empty() ||
                          !get(10).empty() || !get(11).empty();
    if (any_bbox) {
      Detection det;
      det.frame_index = fr.frame_index;
      det.bbox_center_x_px = parse_num(get(7), names[7], line);
      det.bbox_center_y_px = parse_num(get(8), names[8], line);
      det.bbox_width_px = parse_num(get(9), names[9], line);
      det.bbox_height_px = parse_num(get(10), names[10], line);
      det.confidence = parse_num(get(11), names[11], line);
      fr.detection = det;
    }
    out.push_back(std::move(fr));
  }
  return out;
}

}  // namespace micronav::perception

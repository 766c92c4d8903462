#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "micronav/errors.hpp"
#include "micronav/perception.hpp"
#include "micronav/rng.hpp"

using namespace micronav;
using namespace micronav::perception;
using micronav::geo::LocalVec;
using micronav::geo::Pose2D;

namespace {

CameraIntrinsics test_cam() { return {1000.0, 1440.0, 1920.0}; }
SignSpec test_sign() { return {0.30, 2.4}; }

Detection centered_detection(double width_px) {
  Detection d;
  d.frame_index = 0;
  d.bbox_center_x_px = 720.0;
  d.bbox_center_y_px = 960.0;
  d.bbox_width_px = width_px;
  d.bbox_height_px = width_px * 1.6;
  return d;
}

}  // namespace

TEST_CASE("estimate_distance pinhole identity") {
  // d = f * W / w = 1000 * 0.30 / 100 = 3.00
  const auto ranged = estimate_distance(centered_detection(100.0), test_cam(), test_sign());
  CHECK(ranged.est_distance_m == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(ranged.bearing_deg == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("estimate_distance doubling bbox width halves the distance") {
  const auto near = estimate_distance(centered_detection(200.0), test_cam(), test_sign());
  const auto far = estimate_distance(centered_detection(100.0), test_cam(), test_sign());
  CHECK(near.est_distance_m == doctest::Approx(far.est_distance_m / 2.0).epsilon(1e-12));
}

TEST_CASE("estimate_distance strictly decreasing in width") {
  double prev = 1e300;
  for (double w = 20.0; w <= 400.0; w += 7.0) {
    const auto ranged = estimate_distance(centered_detection(w), test_cam(), test_sign());
    CHECK(ranged.est_distance_m < prev);
    prev = ranged.est_distance_m;
  }
}

TEST_CASE("estimate_distance validates the detection") {
  Detection bad = centered_detection(0.0);
  CHECK_THROWS_AS(estimate_distance(bad, test_cam(), test_sign()), DataError);
  Detection outside = centered_detection(50.0);
  outside.bbox_center_x_px = 2000.0;
  CHECK_THROWS_AS(estimate_distance(outside, test_cam(), test_sign()), DataError);
}

TEST_CASE("synth_project dead ahead with zero noise") {
  Rng rng(1);
  const Pose2D agent{{0.0, 0.0}, 0.0};
  // sign 3 m due north, facing back south at the agent
  const auto det = synth_project(0, agent, 0.0, {0.0, 3.0}, 180.0, test_cam(),
                                 test_sign(), {}, rng);
  REQUIRE(det.has_value());
  CHECK(det->bbox_width_px == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(det->bbox_center_x_px == doctest::Approx(720.0).epsilon(1e-12));
}

TEST_CASE("synth_project misses") {
  Rng rng(2);
  const Pose2D agent{{0.0, 0.0}, 0.0};
  SUBCASE("sign behind the agent") {
    CHECK_FALSE(synth_project(0, agent, 0.0, {0.0, -3.0}, 0.0, test_cam(), test_sign(),
                              {}, rng));
  }
  SUBCASE("beyond max detectable range") {
    PerceptionNoise noise;
    noise.max_range_m = 60.0;
    CHECK_FALSE(synth_project(0, agent, 0.0, {0.0, 61.0}, 180.0, test_cam(), test_sign(),
                              noise, rng));
  }
  SUBCASE("incidence past the slant cutoff") {
    PerceptionNoise noise;
    noise.slant_cutoff_deg = 60.0;
    // sign 10 m north, plane normal rotated 80 deg away from the line of sight
    CHECK_FALSE(synth_project(0, agent, 0.0, {0.0, 10.0}, 180.0 + 80.0, test_cam(),
                              test_sign(), noise, rng));
  }
  SUBCASE("miss_prob one drops every frame") {
    PerceptionNoise noise;
    noise.miss_prob = 1.0;
    CHECK_FALSE(synth_project(0, agent, 0.0, {0.0, 3.0}, 180.0, test_cam(), test_sign(),
                              noise, rng));
  }
}

TEST_CASE("synth_project foreshortens slanted signs") {
  Rng rng(3);
  const Pose2D agent{{0.0, 0.0}, 0.0};
  const double incidence = 40.0;
  const auto det = synth_project(0, agent, 0.0, {0.0, 3.0}, 180.0 + incidence,
                                 test_cam(), test_sign(), {}, rng);
  REQUIRE(det.has_value());
  CHECK(det->bbox_width_px ==
        doctest::Approx(100.0 * std::cos(geo::deg2rad(incidence))).epsilon(1e-12));
}

TEST_CASE("synth_project is deterministic for a fixed seed") {
  PerceptionNoise noise;
  noise.miss_prob = 0.3;
  noise.px_jitter_sd = 4.0;
  const Pose2D agent{{0.0, 0.0}, 0.0};
  for (std::uint64_t seed : {7ULL, 8ULL, 9ULL}) {
    Rng a(seed), b(seed);
    for (int frame = 0; frame < 50; ++frame) {
      const auto da = synth_project(frame, agent, 0.0, {1.0, 10.0}, 180.0, test_cam(),
                                    test_sign(), noise, a);
      const auto db = synth_project(frame, agent, 0.0, {1.0, 10.0}, 180.0, test_cam(),
                                    test_sign(), noise, b);
      CHECK(da.has_value() == db.has_value());
      if (da && db) {
        CHECK(da->bbox_width_px == db->bbox_width_px);
        CHECK(da->bbox_center_x_px == db->bbox_center_x_px);
      }
    }
  }
}

TEST_CASE("round trip: synth_project then estimate_distance recovers the truth") {
  Rng rng(4);
  Rng draws(5);
  const CameraIntrinsics cam = test_cam();
  const SignSpec sign = test_sign();
  int produced = 0;
  for (int i = 0; i < 500; ++i) {
    const double true_distance = draws.uniform(1.0, 60.0);
    const double heading = draws.uniform(0.0, 360.0);
    const double cam_yaw = draws.uniform(-20.0, 20.0);
    const double bearing = draws.uniform(-25.0, 25.0);
    const Pose2D agent{{draws.uniform(-50, 50), draws.uniform(-50, 50)}, heading};
    const double world_dir = geo::wrap360(heading + cam_yaw + bearing);
    const LocalVec sign_pos = agent.position + geo::heading_unit(world_dir) * true_distance;
    const double facing = geo::wrap360(world_dir + 180.0);  // incidence zero

    const auto det = synth_project(i, agent, cam_yaw, sign_pos, facing, cam, sign, {}, rng);
    if (!det) continue;  // clipped at the border for near+wide poses
    produced++;
    const auto ranged = estimate_distance(*det, cam, sign);
    CHECK(std::abs(ranged.est_distance_m - true_distance) / true_distance < 1e-9);
    CHECK(std::abs(ranged.bearing_deg - geo::wrap180(bearing)) < 1e-9);
  }
  CHECK(produced > 450);
}

TEST_CASE("confirm_stream examples") {
  using Frames = std::vector<std::pair<std::int64_t, bool>>;
  SUBCASE("confirmed at the k-th consecutive hit") {
    const auto events = confirm_stream(Frames{{1, true}, {2, true}, {3, true}}, 3);
    REQUIRE(events.size() == 1);
    CHECK(events[0].frame_index == 3);
    CHECK(events[0].kind == ConfirmKind::Confirmed);
  }
  SUBCASE("a miss resets the run") {
    const auto events =
        confirm_stream(Frames{{1, true}, {2, false}, {3, true}, {4, true}, {5, true}}, 3);
    REQUIRE(events.size() == 1);
    CHECK(events[0].frame_index == 5);
  }
  SUBCASE("lost fires on the first miss after confirmation") {
    const auto events = confirm_stream(
        Frames{{1, true}, {2, true}, {3, true}, {4, true}, {5, false}}, 3);
    REQUIRE(events.size() == 2);
    CHECK(events[1].frame_index == 5);
    CHECK(events[1].kind == ConfirmKind::Lost);
  }
  SUBCASE("empty stream yields no events") {
    CHECK(confirm_stream({}, 3).empty());
  }
  SUBCASE("non-monotonic frame index throws") {
    ConfirmationFilter filter(2);
    filter.feed(5, true);
    CHECK_THROWS_AS(filter.feed(5, true), DataError);
    CHECK_THROWS_AS(filter.feed(4, false), DataError);
  }
  SUBCASE("k_confirm below one is rejected") {
    CHECK_THROWS_AS(ConfirmationFilter(0), ConfigError);
  }
}

TEST_CASE("confirm_stream matches a brute-force run-length oracle") {
  Rng rng(6);
  for (int trial = 0; trial < 300; ++trial) {
    const int k = 1 + static_cast<int>(rng.uniform01() * 4.0);
    const int len = 1 + static_cast<int>(rng.uniform01() * 24.0);
    std::vector<std::pair<std::int64_t, bool>> frames;
    frames.reserve(static_cast<std::size_t>(len));
    for (int i = 0; i < len; ++i) frames.push_back({i, rng.bernoulli(0.6)});

    // oracle: scan runs directly
    std::vector<ConfirmEvent> expected;
    int run = 0;
    bool confirmed = false;
    for (const auto& [frame, hit] : frames) {
      if (hit) {
        run++;
        if (!confirmed && run == k) {
          confirmed = true;
          expected.push_back({frame, ConfirmKind::Confirmed});
        }
      } else {
        run = 0;
        if (confirmed) {
          confirmed = false;
          expected.push_back({frame, ConfirmKind::Lost});
        }
      }
    }

    const auto actual = confirm_stream(frames, k);
    REQUIRE(actual.size() == expected.size());
    for (std::size_t i = 0; i < actual.size(); ++i) {
      CHECK(actual[i].frame_index == expected[i].frame_index);
      CHECK(actual[i].kind == expected[i].kind);
    }
    // no confirmation ever fires with fewer than k consecutive hits behind it
    for (const auto& ev : actual) {
      if (ev.kind != ConfirmKind::Confirmed) continue;
      int consecutive = 0;
      for (const auto& [frame, hit] : frames) {
        if (frame > ev.frame_index) break;
        consecutive = hit ? consecutive + 1 : 0;
        if (frame == ev.frame_index) CHECK(consecutive >= k);
      }
    }
  }
}

TEST_CASE("replay log reader") {
  const char* text =
      "frame_index,t_s,agent_east_m,agent_north_m,heading_deg,device_pitch_deg,"
      "cam_yaw_deg,bbox_cx,bbox_cy,bbox_w,bbox_h,confidence\n"
      "0,0.0,1.0,2.0,90.0,90.0,-5.0,720,960,100,160,0.9\n"
      "1,0.1,1.1,2.0,90.0,90.0,-4.0,,,,,\n";
  std::istringstream in(text);
  const auto frames = read_replay_log(in);
  REQUIRE(frames.size() == 2);
  CHECK(frames[0].detection.has_value());
  CHECK(frames[0].detection->bbox_width_px == doctest::Approx(100.0));
  CHECK(frames[0].cam_yaw_deg == doctest::Approx(-5.0));
  CHECK_FALSE(frames[1].detection.has_value());

  SUBCASE("partially empty bbox group is an error") {
    std::istringstream bad(
        "frame_index,t_s,agent_east_m,agent_north_m,heading_deg,device_pitch_deg,"
        "cam_yaw_deg,bbox_cx,bbox_cy,bbox_w,bbox_h,confidence\n"
        "0,0.0,1.0,2.0,90.0,90.0,-5.0,720,,100,160,0.9\n");
    CHECK_THROWS_AS(read_replay_log(bad), DataError);
  }
  SUBCASE("missing column is named") {
    std::istringstream bad("frame_index,t_s\n0,0.0\n");
    CHECK_THROWS_WITH_AS(read_replay_log(bad), doctest::Contains("agent_east_m"),
                         DataError);
  }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <optional>
#include <vector>

#include "micronav/errors.hpp"
#include "micronav/guidance.hpp"
#include "micronav/rng.hpp"

using namespace micronav;
using namespace micronav::guidance;

namespace {

std::optional<perception::RangedDetection> obs_at(double distance_m) {
  perception::RangedDetection ranged;
  ranged.detection.bbox_center_x_px = 720.0;
  ranged.detection.bbox_width_px = 100.0;
  ranged.est_distance_m = distance_m;
  ranged.bearing_deg = 0.0;
  return ranged;
}

const DeviceAttitude kUpright{90.0, 0.0};
const DeviceAttitude kFlat{0.0, 0.0};

}  // namespace

TEST_CASE("upright gate") {
  CHECK(upright_gate({90.0, 0.0}, 25.0));
  CHECK_FALSE(upright_gate({0.0, 0.0}, 25.0));
  CHECK_FALSE(upright_gate({64.0, 0.0}, 25.0));  // just outside the default band
  CHECK(upright_gate({65.0, 0.0}, 25.0));
  CHECK(upright_gate({115.0, 0.0}, 25.0));
}

TEST_CASE("tone levels") {
  const std::array<double, 3> thresholds = {2.0, 6.0, 15.0};
  CHECK(tone_level(1.5, thresholds) == ToneLevel::level4);
  CHECK(tone_level(2.0, thresholds) == ToneLevel::level4);  // inclusive boundary
  CHECK(tone_level(2.0001, thresholds) == ToneLevel::level3);
  CHECK(tone_level(6.0, thresholds) == ToneLevel::level3);
  CHECK(tone_level(15.0, thresholds) == ToneLevel::level2);
  CHECK(tone_level(30.0, thresholds) == ToneLevel::level1);
  CHECK_THROWS_AS(tone_level(1.0, {2.0, 2.0, 15.0}), ConfigError);
}

TEST_CASE("tone level monotone non-increasing over the whole range") {
  const std::array<double, 3> thresholds = {2.0, 6.0, 15.0};
  int prev = 4;
  for (double d = 0.1; d <= 60.0; d += 0.1) {
    const int level = tone_level_int(tone_level(d, thresholds));
    CHECK(level <= prev);
    prev = level;
  }
}

TEST_CASE("guidance config validation") {
  GuidanceConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.thresholds_m = {2.5, 6.0, 15.0};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);  // the 2 m arrival band is fixed
  cfg.thresholds_m = {2.0, 6.0, 15.0};
  cfg.k_confirm = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("step: confirmation path") {
  GuidanceConfig cfg;  // k_confirm 3, thresholds (2, 6, 15)

  SUBCASE("third consecutive hit locks with a continuous tone") {
    const auto result = step(Scanning{2}, kUpright, obs_at(10.0), cfg);
    REQUIRE(std::holds_alternative<Locked>(result.state));
    CHECK(std::get<Locked>(result.state).level == ToneLevel::level2);
    CHECK(result.event.kind == AudioKind::Continuous);
    CHECK(result.event.level == ToneLevel::level2);
  }
  SUBCASE("earlier hits blip") {
    const auto result = step(Scanning{0}, kUpright, obs_at(10.0), cfg);
    REQUIRE(std::holds_alternative<Scanning>(result.state));
    CHECK(std::get<Scanning>(result.state).run_length == 1);
    CHECK(result.event.kind == AudioKind::Blip);
  }
  SUBCASE("k_confirm of one locks on the first hit") {
    cfg.k_confirm = 1;
    const auto result = step(Inactive{}, kUpright, obs_at(1.0), cfg);
    CHECK(std::holds_alternative<Locked>(result.state));
    CHECK(result.event.level == ToneLevel::level4);
  }
  SUBCASE("a miss resets the run") {
    const auto result = step(Scanning{2}, kUpright, std::nullopt, cfg);
    REQUIRE(std::holds_alternative<Scanning>(result.state));
    CHECK(std::get<Scanning>(result.state).run_length == 0);
    CHECK(result.event.kind == AudioKind::Silence);
  }
}

TEST_CASE("step: loss and re-lock") {
  GuidanceConfig cfg;

  SUBCASE("losing the sign silences immediately") {
    const auto result = step(Locked{ToneLevel::level4, 1.5}, kUpright, std::nullopt, cfg);
    REQUIRE(std::holds_alternative<Lost>(result.state));
    CHECK(result.event.kind == AudioKind::Silence);
  }
  SUBCASE("re-lock within the grace window needs no re-confirmation") {
    const auto result = step(Lost{3}, kUpright, obs_at(4.0), cfg);
    REQUIRE(std::holds_alternative<Locked>(result.state));
    CHECK(result.event.kind == AudioKind::Continuous);
    CHECK(result.event.level == ToneLevel::level3);
  }
  SUBCASE("grace expiry falls back to scanning") {
    const auto result = step(Lost{cfg.lost_grace_frames}, kUpright, std::nullopt, cfg);
    CHECK(std::holds_alternative<Scanning>(result.state));
  }
  SUBCASE("zero grace skips the lost state entirely") {
    cfg.lost_grace_frames = 0;
    const auto result = step(Locked{ToneLevel::level4, 1.5}, kUpright, std::nullopt, cfg);
    CHECK(std::holds_alternative<Scanning>(result.state));
  }
}

TEST_CASE("step: upright gating wins over everything") {
  GuidanceConfig cfg;
  for (const GuidanceState& state :
       {GuidanceState{Inactive{}}, GuidanceState{Scanning{2}},
        GuidanceState{Locked{ToneLevel::level4, 1.0}}, GuidanceState{Lost{2}}}) {
    const auto with_obs = step(state, kFlat, obs_at(1.0), cfg);
    CHECK(std::holds_alternative<Inactive>(with_obs.state));
    CHECK(with_obs.event.kind == AudioKind::Silence);
    const auto without = step(state, kFlat, std::nullopt, cfg);
    CHECK(std::holds_alternative<Inactive>(without.state));
    CHECK(without.event.kind == AudioKind::Silence);
  }
}

TEST_CASE("step: distance smoothing updates the locked estimate") {
  GuidanceConfig cfg;
  cfg.distance_smoothing = 0.5;
  const auto result = step(Locked{ToneLevel::level2, 10.0}, kUpright, obs_at(6.0), cfg);
  REQUIRE(std::holds_alternative<Locked>(result.state));
  CHECK(std::get<Locked>(result.state).last_distance_m == doctest::Approx(8.0));
}

TEST_CASE("replaying a frame log is deterministic") {
  GuidanceConfig cfg;
  Rng rng(21);
  std::vector<std::optional<perception::RangedDetection>> log;
  for (int i = 0; i < 400; ++i) {
    if (rng.bernoulli(0.6)) log.push_back(obs_at(rng.uniform(0.5, 40.0)));
    else log.push_back(std::nullopt);
  }
  auto run = [&] {
    std::vector<std::pair<std::string, std::string>> timeline;
    GuidanceState state = Inactive{};
    for (const auto& obs : log) {
      auto [next, event] = step(state, kUpright, obs, cfg);
      state = next;
      timeline.emplace_back(state_name(state), audio_kind_name(event.kind));
    }
    return timeline;
  };
  CHECK(run() == run());
}

// brute force over every upright hit/miss string: the machine must agree with
// a three-counter oracle and never emit a tone it should not
TEST_CASE("model check against a counter oracle") {
  for (int k = 1; k <= 4; ++k) {
    GuidanceConfig cfg;
    cfg.k_confirm = k;
    cfg.lost_grace_frames = 2;
    for (int len = 1; len <= 12; ++len) {
      for (unsigned mask = 0; mask < (1u << len); ++mask) {
        GuidanceState state = Inactive{};
        int run = 0, miss_streak = 0;
        bool confirmed = false;
        for (int i = 0; i < len; ++i) {
          const bool hit = (mask >> i) & 1u;
          auto [next, event] = step(state, kUpright, hit ? obs_at(5.0) : std::nullopt, cfg);
          state = next;

          AudioKind expected;
          if (hit) {
            if (!confirmed) {
              run++;
              if (run >= k) confirmed = true;
              expected = confirmed ? AudioKind::Continuous : AudioKind::Blip;
            } else {
              expected = AudioKind::Continuous;
            }
            miss_streak = 0;
          } else {
            if (confirmed) {
              miss_streak++;
              if (miss_streak > cfg.lost_grace_frames) {
                confirmed = false;
                run = 0;
                miss_streak = 0;
              }
            } else {
              run = 0;
            }
            expected = AudioKind::Silence;
          }
          REQUIRE(event.kind == expected);
          // continuous output only ever together with a locked state
          if (event.kind == AudioKind::Continuous) {
            REQUIRE(std::holds_alternative<Locked>(state));
          }
        }
      }
    }
  }
}

TEST_CASE("timeline csv shape") {
  std::vector<TimelineRow> rows;
  rows.push_back({0, "Scanning", "BLIP", 2, 10.0});
  rows.push_back({1, "Scanning", "SILENCE", std::nullopt, std::nullopt});
  const std::string csv = timeline_csv(rows);
  CHECK(csv == "frame_index,state,event_kind,level,est_distance_m\n"
               "0,Scanning,BLIP,2,10.000\n"
               "1,Scanning,SILENCE,,\n");
}

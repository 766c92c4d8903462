#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "micronav/simulator.hpp"

namespace micronav::stats {

struct ProportionCI {
  std::int64_t successes = 0;
  std::int64_t total = 0;
  double p_hat = 0.0;
  double lo = 0.0;  // Wilson score 95%
  double hi = 0.0;
};

struct GapSummary {
  std::int64_t n = 0;
  double mean_m = 0.0;
  double sd_m = 0.0;  // sample sd, n-1 denominator; 0 when n < 2
  double ci_lo_m = 0.0;  // percentile bootstrap 95%
  double ci_hi_m = 0.0;
};

struct JointTable2x2 {
  std::int64_t both_success = 0;
  std::int64_t a_only = 0;  // vision succeeded, gps failed
  std::int64_t g_only = 0;  // gps succeeded, vision failed
  std::int64_t both_fail = 0;

  std::int64_t total() const { return both_success + a_only + g_only + both_fail; }
};

struct BootParams {
  int n_resamples = 10000;
  std::uint64_t seed = 427031;
};

using RowFilter = std::function<bool(const sim::TrialRow&)>;

ProportionCI wilson_interval(std::int64_t successes, std::int64_t total);

// Throws DataError when the filtered subset is empty.
ProportionCI success_rate_ci(const sim::TrialTable& trials, sim::Policy policy,
                             const RowFilter& filter = {});

// Over gaps of successful trials only. Throws DataError when none succeed.
GapSummary gap_summary(const sim::TrialTable& trials, sim::Policy policy,
                       const RowFilter& filter, const BootParams& boot);

JointTable2x2 joint_table(const sim::TrialTable& trials, const RowFilter& filter = {});

// Fraction of the policy's successes whose gap is negative (overshoot).
double overshoot_fraction(const sim::TrialTable& trials, sim::Policy policy,
                          const RowFilter& filter = {});

struct GroupStats {
  std::string site;    // "Both" or a site label
  std::string vision;  // "all" or a vision class
  std::string policy;
  ProportionCI success;
  std::optional<GapSummary> gap;  // absent when the group has no successes
};

struct JointStats {
  std::string site;
  JointTable2x2 table;
};

struct OvershootStats {
  std::string site;
  std::string policy;
  std::int64_t successes = 0;
  std::int64_t negative = 0;
  double fraction = 0.0;
};

struct Report {
  std::vector<GroupStats> groups;
  std::vector<JointStats> joints;
  std::vector<OvershootStats> overshoots;
  std::vector<std::string> warnings;  // one per omitted empty group
};

Report make_report(const sim::TrialTable& trials, const BootParams& boot = {});

std::string report_text(const Report& report);
std::string report_csv(const Report& report);
std::string report_json(const Report& report);

}  // namespace micronav::stats

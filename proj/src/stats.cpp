#include "micronav/stats.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "micronav/errors.hpp"
#include "micronav/io.hpp"
#include "micronav/rng.hpp"

namespace micronav::stats {

namespace {

constexpr double kZ95 = 1.959963984540054;  // 97.5th normal percentile

const sim::TrialOutcome& outcome_for(const sim::TrialRow& row, sim::Policy policy) {
  return policy == sim::Policy::VisionGuided ? row.vision : row.gps;
}

std::vector<const sim::TrialRow*> filtered_rows(const sim::TrialTable& trials,
                                                const RowFilter& filter) {
  std::vector<const sim::TrialRow*> out;
  for (const auto& row : trials.rows) {
    if (!filter || filter(row)) out.push_back(&row);
  }
  return out;
}

double percentile_of_sorted(const std::vector<double>& sorted, double q) {
  const auto n = sorted.size();
  const auto idx = static_cast<std::size_t>(
      std::lround(q * static_cast<double>(n - 1)));
  return sorted[std::min(idx, n - 1)];
}

}  // namespace

ProportionCI wilson_interval(std::int64_t successes, std::int64_t total) {
  if (total <= 0) throw DataError("wilson interval: total must be positive");
  if (successes < 0 || successes > total) {
    throw DataError("wilson interval: successes out of range");
  }
  ProportionCI ci;
  ci.successes = successes;
  ci.total = total;
  const double n = static_cast<double>(total);
  const double p = static_cast<double>(successes) / n;
  ci.p_hat = p;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      kZ95 * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  ci.lo = std::max(0.0, center - half);
  ci.hi = std::min(1.0, center + half);
  return ci;
}

ProportionCI success_rate_ci(const sim::TrialTable& trials, sim::Policy policy,
                             const RowFilter& filter) {
  const auto rows = filtered_rows(trials, filter);
  if (rows.empty()) throw DataError("success_rate_ci: empty group");
  std::int64_t successes = 0;
  for (const auto* row : rows) {
    if (outcome_for(*row, policy).success) successes++;
  }
  return wilson_interval(successes, static_cast<std::int64_t>(rows.size()));
}

GapSummary gap_summary(const sim::TrialTable& trials, sim::Policy policy,
                       const RowFilter& filter, const BootParams& boot) {
  if (boot.n_resamples < 1) throw ConfigError("bootstrap resamples must be >= 1");

  std::vector<double> gaps;
  for (const auto* row : filtered_rows(trials, filter)) {
    const auto& outcome = outcome_for(*row, policy);
    if (outcome.success) gaps.push_back(*outcome.gap_m);
  }
  if (gaps.empty()) throw DataError("gap_summary: no successful trials in group");

  GapSummary out;
  out.n = static_cast<std::int64_t>(gaps.size());
  const double n = static_cast<double>(gaps.size());
  double sum = 0.0;
  for (double g : gaps) sum += g;
  out.mean_m = sum / n;
  if (gaps.size() >= 2) {
    double ss = 0.0;
    for (double g : gaps) {
      const double d = g - out.mean_m;
      ss += d * d;
    }
    out.sd_m = std::sqrt(ss / (n - 1.0));
  }

  Rng rng(boot.seed);
  std::vector<double> means(static_cast<std::size_t>(boot.n_resamples));
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
      const auto pick = static_cast<std::size_t>(rng.uniform01() * n);
      s += gaps[std::min(pick, gaps.size() - 1)];
    }
    m = s / n;
  }
  std::sort(means.begin(), means.end());
  out.ci_lo_m = percentile_of_sorted(means, 0.025);
  out.ci_hi_m = percentile_of_sorted(means, 0.975);
  return out;
}

JointTable2x2 joint_table(const sim::TrialTable& trials, const RowFilter& filter) {
  JointTable2x2 t;
  for (const auto* row : filtered_rows(trials, filter)) {
    const bool a = row->vision.success;
    const bool g = row->gps.success;
    if (a && g) t.both_success++;
    else if (a) t.a_only++;
    else if (g) t.g_only++;
    else t.both_fail++;
  }
  return t;
}

double overshoot_fraction(const sim::TrialTable& trials, sim::Policy policy,
                          const RowFilter& filter) {
  std::int64_t successes = 0;
  std::int64_t negative = 0;
  for (const auto* row : filtered_rows(trials, filter)) {
    const auto& outcome = outcome_for(*row, policy);
    if (!outcome.success) continue;
    successes++;
    if (*outcome.gap_m < 0.0) negative++;
  }
  if (successes == 0) throw DataError("overshoot_fraction: no successful trials in group");
  return static_cast<double>(negative) / static_cast<double>(successes);
}

Report make_report(const sim::TrialTable& trials, const BootParams& boot) {
  if (trials.rows.empty()) throw DataError("report: trial table is empty");

  std::set<std::string> site_set;
  std::set<std::string> vision_set;
  for (const auto& row : trials.rows) {
    site_set.insert(row.site);
    vision_set.insert(row.vision_class);
  }
  std::vector<std::string> sites = {"Both"};
  sites.insert(sites.end(), site_set.begin(), site_set.end());
  std::vector<std::string> visions = {"all"};
  visions.insert(visions.end(), vision_set.begin(), vision_set.end());

  auto filter_for = [](const std::string& site, const std::string& vision) {
    return [site, vision](const sim::TrialRow& row) {
      if (site != "Both" && row.site != site) return false;
      if (vision != "all" && row.vision_class != vision) return false;
      return true;
    };
  };

  Report report;
  for (const auto& site : sites) {
    for (const auto& vision : visions) {
      const RowFilter filter = filter_for(site, vision);
      for (sim::Policy policy : {sim::Policy::VisionGuided, sim::Policy::GpsFollow}) {
        GroupStats gs;
        gs.site = site;
        gs.vision = vision;
        gs.policy = sim::policy_name(policy);
        try {
          gs.success = success_rate_ci(trials, policy, filter);
        } catch (const DataError&) {
          report.warnings.push_back("group omitted (no trials): site=" + site +
                                    " vision=" + vision);
          break;  // the paired policy group is empty too
        }
        try {
          gs.gap = gap_summary(trials, policy, filter, boot);
        } catch (const DataError&) {
          gs.gap = std::nullopt;  // zero successes; success row still reported
        }
        report.groups.push_back(std::move(gs));
      }
    }
  }

  for (const auto& site : sites) {
    JointStats js;
    js.site = site;
    js.table = joint_table(trials, filter_for(site, "all"));
    if (js.table.total() == 0) continue;
    report.joints.push_back(js);

    for (sim::Policy policy : {sim::Policy::VisionGuided, sim::Policy::GpsFollow}) {
      OvershootStats os;
      os.site = site;
      os.policy = sim::policy_name(policy);
      for (const auto& row : trials.rows) {
        if (site != "Both" && row.site != site) continue;
        const auto& outcome = policy == sim::Policy::VisionGuided ? row.vision : row.gps;
        if (!outcome.success) continue;
        os.successes++;
        if (*outcome.gap_m < 0.0) os.negative++;
      }
      if (os.successes == 0) {
        report.warnings.push_back("overshoot omitted (no successes): site=" + site +
                                  " policy=" + os.policy);
        continue;
      }
      os.fraction = static_cast<double>(os.negative) / static_cast<double>(os.successes);
      report.overshoots.push_back(os);
    }
  }
  return report;
}

std::string report_text(const Report& report) {
  char buf[256];
  std::string out;
  out += "Success rate and gap distance by site, vision class and policy\n";
  std::snprintf(buf, sizeof(buf), "%-8s %-10s %-13s %6s %6s %7s %7s %7s %6s %9s %8s %8s %8s\n",
                "site", "vision", "policy", "n", "succ", "rate", "lo95", "hi95",
                "gap_n", "gap_mean", "gap_sd", "ci_lo", "ci_hi");
  out += buf;
  for (const auto& g : report.groups) {
    std::string gap_n = "-", gap_mean = "-", gap_sd = "-", ci_lo = "-", ci_hi = "-";
    if (g.gap) {
      gap_n = std::to_string(g.gap->n);
      gap_mean = format_double(g.gap->mean_m, 3);
      gap_sd = format_double(g.gap->sd_m, 3);
      ci_lo = format_double(g.gap->ci_lo_m, 3);
      ci_hi = format_double(g.gap->ci_hi_m, 3);
    }
    std::snprintf(buf, sizeof(buf), "%-8s %-10s %-13s %6lld %6lld %7.4f %7.4f %7.4f %6s %9s %8s %8s %8s\n",
                  g.site.c_str(), g.vision.c_str(), g.policy.c_str(),
                  static_cast<long long>(g.success.total),
                  static_cast<long long>(g.success.successes), g.success.p_hat,
                  g.success.lo, g.success.hi, gap_n.c_str(), gap_mean.c_str(),
                  gap_sd.c_str(), ci_lo.c_str(), ci_hi.c_str());
    out += buf;
  }

  out += "\nJoint outcomes over paired trials (vision vs gps)\n";
  std::snprintf(buf, sizeof(buf), "%-8s %12s %12s %12s %12s %8s\n", "site",
                "both_success", "vision_only", "gps_only", "both_fail", "total");
  out += buf;
  for (const auto& j : report.joints) {
    std::snprintf(buf, sizeof(buf), "%-8s %12lld %12lld %12lld %12lld %8lld\n",
                  j.site.c_str(), static_cast<long long>(j.table.both_success),
                  static_cast<long long>(j.table.a_only),
                  static_cast<long long>(j.table.g_only),
                  static_cast<long long>(j.table.both_fail),
                  static_cast<long long>(j.table.total()));
    out += buf;
  }

  out += "\nOvershoot (successes stopping past the sign)\n";
  std::snprintf(buf, sizeof(buf), "%-8s %-13s %10s %10s %10s\n", "site", "policy",
                "successes", "negative", "fraction");
  out += buf;
  for (const auto& o : report.overshoots) {
    std::snprintf(buf, sizeof(buf), "%-8s %-13s %10lld %10lld %10.4f\n", o.site.c_str(),
                  o.policy.c_str(), static_cast<long long>(o.successes),
                  static_cast<long long>(o.negative), o.fraction);
    out += buf;
  }

  for (const auto& w : report.warnings) {
    out += "warning: " + w + "\n";
  }
  return out;
}

std::string report_csv(const Report& report) {
  std::string out =
      "site,vision,policy,trials,successes,success_rate,wilson_lo,wilson_hi,"
      "gap_n,gap_mean_m,gap_sd_m,gap_ci_lo_m,gap_ci_hi_m\n";
  for (const auto& g : report.groups) {
    out += g.site + "," + g.vision + "," + g.policy + "," +
           std::to_string(g.success.total) + "," + std::to_string(g.success.successes) +
           "," + format_double(g.success.p_hat, 6) + "," +
           format_double(g.success.lo, 6) + "," + format_double(g.success.hi, 6);
    if (g.gap) {
      out += "," + std::to_string(g.gap->n) + "," + format_double(g.gap->mean_m, 6) +
             "," + format_double(g.gap->sd_m, 6) + "," +
             format_double(g.gap->ci_lo_m, 6) + "," + format_double(g.gap->ci_hi_m, 6);
    } else {
      out += ",,,,,";
    }
    out += '\n';
  }
  out += "\nsite,both_success,vision_only,gps_only,both_fail,total\n";
  for (const auto& j : report.joints) {
    out += j.site + "," + std::to_string(j.table.both_success) + "," +
           std::to_string(j.table.a_only) + "," + std::to_string(j.table.g_only) + "," +
           std::to_string(j.table.both_fail) + "," + std::to_string(j.table.total()) +
           "\n";
  }
  out += "\nsite,policy,successes,negative_gaps,overshoot_fraction\n";
  for (const auto& o : report.overshoots) {
    out += o.site + "," + o.policy + "," + std::to_string(o.successes) + "," +
           std::to_string(o.negative) + "," + format_double(o.fraction, 6) + "\n";
  }
  for (const auto& w : report.warnings) {
    out += "# warning: " + w + "\n";
  }
  return out;
}

std::string report_json(const Report& report) {
  nlohmann::json j;
  j["groups"] = nlohmann::json::array();
  for (const auto& g : report.groups) {
    nlohmann::json gj;
    gj["site"] = g.site;
    gj["vision"] = g.vision;
    gj["policy"] = g.policy;
    gj["trials"] = g.success.total;
    gj["successes"] = g.success.successes;
    gj["success_rate"] = g.success.p_hat;
    gj["wilson_lo"] = g.success.lo;
    gj["wilson_hi"] = g.success.hi;
    if (g.gap) {
      gj["gap"] = {{"n", g.gap->n},
                   {"mean_m", g.gap->mean_m},
                   {"sd_m", g.gap->sd_m},
                   {"ci_lo_m", g.gap->ci_lo_m},
                   {"ci_hi_m", g.gap->ci_hi_m}};
    }
    j["groups"].push_back(gj);
  }
  j["joint"] = nlohmann::json::array();
  for (const auto& jt : report.joints) {
    j["joint"].push_back({{"site", jt.site},
                          {"both_success", jt.table.both_success},
                          {"vision_only", jt.table.a_only},
                          {"gps_only", jt.table.g_only},
                          {"both_fail", jt.table.both_fail},
                          {"total", jt.table.total()}});
  }
  j["overshoot"] = nlohmann::json::array();
  for (const auto& o : report.overshoots) {
    j["overshoot"].push_back({{"site", o.site},
                              {"policy", o.policy},
                              {"successes", o.successes},
                              {"negative", o.negative},
                              {"fraction", o.fraction}});
  }
  j["warnings"] = report.warnings;
  return j.dump(2) + "\n";
}

}  // namespace micronav::stats

// micronav: bus-stop micro-navigation toolkit.
// Subcommands: audit (GTFS stop mapping errors), simulate (paired-policy field
// trials), replay (drive the guidance engine from a detection log), report
// (aggregate a trial table).

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "micronav/config.hpp"
#include "micronav/errors.hpp"
#include "micronav/gtfs.hpp"
#include "micronav/guidance.hpp"
#include "micronav/io.hpp"
#include "micronav/simulator.hpp"
#include "micronav/stats.hpp"

namespace {

using namespace micronav;

int cmd_audit(const std::string& stops_path, const std::string& truth_path,
              double bus_length_m, std::vector<double> thresholds,
              const std::string& out_csv, const std::string& out_json) {
  if (thresholds.empty()) {
    thresholds = {bus_length_m, 2.0 * bus_length_m};
  }
  std::istringstream stops_in(read_text_file(stops_path));
  std::istringstream truth_in(read_text_file(truth_path));
  const auto registry = gtfs::parse_stops(stops_in);
  const auto truth = gtfs::parse_ground_truth(truth_in);
  const auto report = gtfs::audit_mapping(registry, truth, thresholds);

  if (!out_csv.empty()) write_file_atomic(out_csv, gtfs::audit_csv(report));
  const std::string summary = gtfs::audit_json(report);
  if (!out_json.empty()) write_file_atomic(out_json, summary);
  else std::cout << summary;
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 std::optional<std::uint64_t> master_seed) {
  auto cfg = config::experiment_from_json_text(read_text_file(config_path));
  if (master_seed) cfg.master_seed = *master_seed;
  const auto table = sim::run_experiment(cfg);
  write_file_atomic(out_path, sim::trial_table_csv(table));
  return 0;
}

int cmd_replay(const std::string& log_path, const std::string& config_path,
               const std::string& out_path) {
  const auto cfg = config::replay_from_json_text(read_text_file(config_path));
  std::istringstream log_in(read_text_file(log_path));
  const auto frames = perception::read_replay_log(log_in);

  guidance::GuidanceState state = guidance::Inactive{};
  std::vector<guidance::TimelineRow> rows;
  rows.reserve(frames.size());
  for (const auto& frame : frames) {
    std::optional<perception::RangedDetection> obs;
    if (frame.detection) {
      obs = perception::estimate_distance(*frame.detection, cfg.camera, cfg.sign);
    }
    const guidance::DeviceAttitude att{frame.device_pitch_deg, 0.0};
    auto [next, event] = guidance::step(state, att, obs, cfg.guidance);
    state = next;

    guidance::TimelineRow row;
    row.frame_index = frame.frame_index;
    row.state = guidance::state_name(state);
    row.event_kind = guidance::audio_kind_name(event.kind);
    if (event.level) row.level = guidance::tone_level_int(*event.level);
    if (obs) row.est_distance_m = obs->est_distance_m;
    rows.push_back(std::move(row));
  }
  write_file_atomic(out_path, guidance::timeline_csv(rows));
  return 0;
}

int cmd_report(const std::string& trials_path, const std::string& format,
               const std::string& out_path, int boot_resamples,
               std::uint64_t boot_seed) {
  std::istringstream trials_in(read_text_file(trials_path));
  const auto table = sim::parse_trial_table(trials_in);
  stats::BootParams boot;
  boot.n_resamples = boot_resamples;
  boot.seed = boot_seed;
  const auto report = stats::make_report(table, boot);

  std::string rendered;
  if (format == "csv") rendered = stats::report_csv(report);
  else if (format == "json") rendered = stats::report_json(report);
  else rendered = stats::report_text(report);

  if (!out_path.empty()) write_file_atomic(out_path, rendered);
  else std::cout << rendered;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bus-stop micro-navigation toolkit"};
  app.require_subcommand(1);

  auto* audit = app.add_subcommand("audit", "audit GTFS stop coordinates against surveyed ground truth");
  std::string stops_path, truth_path, audit_csv_path, audit_json_path;
  double bus_length_m = 12.0;
  std::vector<double> thresholds;
  audit->add_option("--stops", stops_path, "GTFS stops.txt")->required();
  audit->add_option("--truth", truth_path, "ground truth CSV (stop_id,lat,lon,heading_deg)")->required();
  audit->add_option("--bus-length-m", bus_length_m, "bus length used for default thresholds");
  audit->add_option("--thresholds", thresholds, "explicit thresholds in meters");
  audit->add_option("--out-csv", audit_csv_path, "write per-stop errors CSV here");
  audit->add_option("--out-json", audit_json_path, "write the JSON summary here instead of stdout");

  auto* simulate = app.add_subcommand("simulate", "run the paired-policy trial experiment");
  std::string sim_config_path, sim_out_path;
  std::optional<std::uint64_t> master_seed;
  simulate->add_option("--config", sim_config_path, "experiment config JSON")->required();
  simulate->add_option("--out", sim_out_path, "trial table CSV output")->required();
  simulate->add_option("--master-seed", master_seed, "override the config master seed");

  auto* replay = app.add_subcommand("replay", "drive the guidance engine from a detection log");
  std::string log_path, replay_config_path, replay_out_path;
  replay->add_option("--log", log_path, "replay log CSV")->required();
  replay->add_option("--guidance-config", replay_config_path, "guidance config JSON")->required();
  replay->add_option("--out", replay_out_path, "event timeline CSV output")->required();

  auto* report = app.add_subcommand("report", "aggregate a trial table");
  std::string trials_path, report_out_path;
  std::string format = "text";
  int boot_resamples = 10000;
  std::uint64_t boot_seed = 427031;
  report->add_option("--trials", trials_path, "trial table CSV")->required();
  report->add_option("--format", format, "csv, text or json")
      ->check(CLI::IsMember({"csv", "text", "json"}));
  report->add_option("--out", report_out_path, "write here instead of stdout");
  report->add_option("--boot-resamples", boot_resamples, "bootstrap resample count");
  report->add_option("--boot-seed", boot_seed, "bootstrap seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (audit->parsed()) {
      return cmd_audit(stops_path, truth_path, bus_length_m, thresholds,
                       audit_csv_path, audit_json_path);
    }
    if (simulate->parsed()) return cmd_simulate(sim_config_path, sim_out_path, master_seed);
    if (replay->parsed()) return cmd_replay(log_path, replay_config_path, replay_out_path);
    if (report->parsed()) {
      return cmd_report(trials_path, format, report_out_path, boot_resamples, boot_seed);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

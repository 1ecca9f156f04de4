#include "fleetopt/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "fleetopt/anneal.hpp"
#include "fleetopt/csv.hpp"
#include "fleetopt/exact.hpp"
#include "fleetopt/feasibility.hpp"
#include "fleetopt/generator.hpp"
#include "fleetopt/greedy.hpp"
#include "fleetopt/gtfs.hpp"
#include "fleetopt/io.hpp"
#include "fleetopt/milp.hpp"
#include "fleetopt/pipeline/matching.hpp"
#include "fleetopt/pipeline/regression.hpp"
#include "fleetopt/pipeline/samples.hpp"

namespace fleetopt::cli {

namespace {

using json = nlohmann::json;
namespace pl = pipeline;

// Raised by a subcommand for a failure that maps to exit code 1.
class CommandFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_st>(err);
  auto logger = std::make_shared<spdlog::logger>("fleetopt", sink);
  logger->set_pattern("[%l] %v");
  const char* env = std::getenv("FLEETOPT_LOG");
  const std::string level = env ? env : "error";
  if (level == "debug") {
    logger->set_level(spdlog::level::debug);
  } else if (level == "info") {
    logger->set_level(spdlog::level::info);
  } else {
    logger->set_level(spdlog::level::err);
  }
  return logger;
}

struct Output {
  std::string path;  // empty: the command's stdout

  void write(std::ostream& out, const std::string& text) const {
    if (path.empty()) {
      out << text;
    } else {
      write_text_file(path, text);
    }
  }
};

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

std::vector<pl::Geofence> load_garages(const std::string& path) {
  std::vector<pl::Geofence> fences;
  if (path.empty()) return fences;
  for (const auto& ring : read_json_file(path)) {
    pl::Geofence fence;
    for (const auto& p : ring) fence.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    fences.push_back(std::move(fence));
  }
  return fences;
}

std::vector<pl::LatLon> locations_of(const pl::TelemetryTrace& trace) {
  std::vector<pl::LatLon> out;
  out.reserve(trace.size());
  for (const auto& p : trace) out.push_back({p.lat, p.lon});
  return out;
}

struct SolveArgs {
  std::string instance;
  Output output;
  std::string algo;
  GreedyConfig greedy;
  AnnealConfig anneal;
  int restarts = 1;
  double time_limit_s = 60.0;
  std::string trace;
  bool timing = false;
};

int run_solve(const SolveArgs& a, std::ostream& out, spdlog::logger& log) {
  const Instance inst = load_instance(a.instance);
  log.info("loaded {}: {} trips, {} vehicles", a.instance, inst.trip_count(), inst.vehicle_count());
  const auto t0 = std::chrono::steady_clock::now();

  Solution sol;
  SolutionMeta meta;
  meta.algorithm = a.algo;
  int code = kExitOk;
  if (a.algo == "greedy") {
    sol = greedy_assign(inst, a.greedy);
  } else if (a.algo == "sa") {
    AnnealResult r = anneal_restarts(inst, a.anneal, a.greedy, a.restarts);
    log.info("sa: start cost {:.6f}, best cost {:.6f}", r.start_cost, r.best_cost);
    if (!a.trace.empty()) write_text_file(a.trace, trace_csv(r.trace));
    sol = std::move(r.best);
    meta.seed = a.anneal.seed;
  } else {
    ExactResult r = solve_exact(inst, a.time_limit_s);
    log.info("exact: {} after {} nodes", to_string(r.status), r.certificate.nodes_explored);
    if (!r.solution) throw CommandFailed(std::string("exact solver: ") + to_string(r.status));
    if (r.status != ExactStatus::optimal) {
      log.error("time limit reached; writing the incumbent without an optimality certificate");
      code = kExitFailure;
    }
    sol = std::move(*r.solution);
    meta.certificate = certificate_to_json(r.certificate);
  }
  if (a.timing) meta.wall_time_ms = elapsed_ms(t0);

  const ValidationReport report = validate_solution(inst, sol);
  if (!report.empty()) throw std::logic_error("solver produced an infeasible solution: " + report.front().detail);
  a.output.write(out, json_text(solution_to_json(inst, sol, meta)));
  return code;
}

struct ReportArgs {
  std::vector<std::string> instances;
  std::vector<int> lines;
  int seed_from = 1;
  int seed_to = 0;
  GreedyConfig greedy;
  AnnealConfig anneal;
  double time_limit_s = 60.0;
  Output output;
};

int run_report(const ReportArgs& a, std::ostream& out, spdlog::logger& log) {
  std::vector<std::pair<std::string, Instance>> cases;
  for (const auto& path : a.instances) cases.emplace_back(path, load_instance(path));
  for (int lines : a.lines) {
    for (int seed = a.seed_from; seed <= a.seed_to; ++seed) {
      GeneratorParams p;
      p.lines = lines;
      p.seed = static_cast<std::uint64_t>(seed);
      cases.emplace_back("generated:lines=" + std::to_string(lines) + ":seed=" + std::to_string(seed),
                         Instance(generate_instance(p)));
    }
  }
  if (cases.empty()) throw CLI::ValidationError("report", "no instances given");

  std::ostringstream csv_out;
  csv_out << "instance,exact_status,exact_cost,greedy_cost,sa_cost,greedy_pct,sa_pct\n";
  for (const auto& [name, inst] : cases) {
    log.info("report: {}", name);
    const double g = solution_cost(inst, greedy_assign(inst, a.greedy));
    const double s = anneal_run(inst, a.anneal, a.greedy).best_cost;
    const ExactResult e = solve_exact(inst, a.time_limit_s);
    const bool optimal = e.status == ExactStatus::optimal;
    const double x = optimal ? solution_cost(inst, *e.solution) : 0.0;
    const auto pct = [&](double c) { return optimal && x > 0.0 ? csv::fmt6(100.0 * c / x) : std::string(); };
    csv_out << name << ',' << to_string(e.status) << ',' << (optimal ? csv::fmt6(x) : "") << ',' << csv::fmt6(g)
            << ',' << csv::fmt6(s) << ',' << pct(g) << ',' << pct(s) << '\n';
  }
  a.output.write(out, csv_out.str());
  return kExitOk;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) values.push_back(csv::parse_double(item, "list item"));
  return values;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto logger = make_logger(err);
  spdlog::logger& log = *logger;

  CLI::App app{"Mixed-fleet transit assignment, charging and energy estimation", "fleetopt"};
  app.require_subcommand(1);
  std::function<int()> action;

  // generate
  GeneratorParams gen;
  Output gen_out;
  auto* generate = app.add_subcommand("generate", "Write a synthetic instance");
  generate->add_option("--lines", gen.lines)->check(CLI::PositiveNumber);
  generate->add_option("--trips-per-line", gen.trips_per_line)->check(CLI::PositiveNumber);
  generate->add_option("--evs", gen.evs)->check(CLI::NonNegativeNumber);
  generate->add_option("--icev-factor", gen.icev_factor)->check(CLI::NonNegativeNumber);
  generate->add_option("--seed", gen.seed);
  generate->add_option("-o,--output", gen_out.path);
  generate->callback([&] {
    action = [&] {
      gen_out.write(out, dump_instance(generate_instance(gen)));
      return kExitOk;
    };
  });

  // ingest-gtfs
  std::string gtfs_dir, fleet_path, deadhead = "haversine";
  std::vector<std::string> calibrations;
  Output gtfs_out;
  auto* ingest = app.add_subcommand("ingest-gtfs", "Build an instance from a GTFS feed and a fleet file");
  ingest->add_option("feed", gtfs_dir, "GTFS directory")->required()->check(CLI::ExistingDirectory);
  ingest->add_option("--fleet", fleet_path, "Fleet JSON")->required()->check(CLI::ExistingFile);
  ingest->add_option("--deadhead", deadhead, "Duration matrix CSV, or 'haversine'");
  ingest->add_option("--calibration", calibrations, "MODEL=energy_model.json, repeatable");
  ingest->add_option("-o,--output", gtfs_out.path);
  ingest->callback([&] {
    action = [&] {
      GtfsOptions opt;
      opt.dir = gtfs_dir;
      if (deadhead != "haversine") opt.deadhead_matrix = deadhead;
      for (const auto& c : calibrations) {
        const auto eq = c.find('=');
        if (eq == std::string::npos || eq == 0) {
          throw CLI::ValidationError("--calibration", "expected MODEL=FILE, got " + c);
        }
        opt.calibrations[c.substr(0, eq)] = pl::load_model(c.substr(eq + 1));
      }
      gtfs_out.write(out, dump_instance(ingest_gtfs(opt, fleet_from_json(read_json_file(fleet_path)))));
      return kExitOk;
    };
  });

  // solve
  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "Assign trips and charging");
  solve->add_option("instance", solve_args.instance)->required()->check(CLI::ExistingFile);
  solve->add_option("--algo", solve_args.algo)->required()->check(CLI::IsMember({"greedy", "sa", "exact"}));
  solve->add_option("-o,--output", solve_args.output.path);
  solve->add_option("--alpha", solve_args.greedy.alpha, "Layover weight in the biased cost");
  solve->add_option("--floor", solve_args.greedy.charging_safety_floor_kwh, "Battery floor used by charging repair");
  auto* k_max = solve->add_option("--k-max", solve_args.anneal.k_max);
  auto* p_start = solve->add_option("--p-start", solve_args.anneal.p_start);
  auto* p_end = solve->add_option("--p-end", solve_args.anneal.p_end);
  auto* p_swap = solve->add_option("--p-swap", solve_args.anneal.p_swap);
  auto* seed = solve->add_option("--seed", solve_args.anneal.seed);
  auto* restarts = solve->add_option("--restarts", solve_args.restarts)->check(CLI::PositiveNumber);
  auto* retry = solve->add_option("--retry-limit", solve_args.anneal.neighbor_retry_limit);
  auto* trace = solve->add_option("--trace", solve_args.trace, "Write the annealing trace CSV here");
  auto* check = solve->add_flag("--debug-validate", solve_args.anneal.validate_each_acceptance);
  auto* time_limit = solve->add_option("--time-limit", solve_args.time_limit_s)->check(CLI::PositiveNumber);
  solve->add_flag("--timing", solve_args.timing, "Record wall time in the output (breaks byte stability)");
  solve->callback([&] {
    const bool sa = solve_args.algo == "sa";
    for (auto* opt : {k_max, p_start, p_end, p_swap, seed, restarts, retry, trace, check}) {
      if (!sa && opt->count() > 0) throw CLI::ValidationError(opt->get_name(), "only applies to --algo sa");
    }
    if (solve_args.algo != "exact" && time_limit->count() > 0) {
      throw CLI::ValidationError("--time-limit", "only applies to --algo exact");
    }
    if (sa) solve_args.anneal.check();
    action = [&] { return run_solve(solve_args, out, log); };
  });

  // validate
  std::string val_instance, val_solution;
  Output val_out;
  auto* validate = app.add_subcommand("validate", "Check a solution against an instance");
  validate->add_option("instance", val_instance)->required()->check(CLI::ExistingFile);
  validate->add_option("solution", val_solution)->required()->check(CLI::ExistingFile);
  validate->add_option("-o,--output", val_out.path);
  validate->callback([&] {
    action = [&] {
      const Instance inst = load_instance(val_instance);
      const ValidationReport report = validate_solution(inst, load_solution(inst, val_solution));
      val_out.write(out, json_text(report_to_json(inst, report)));
      return report.empty() ? kExitOk : kExitFailure;
    };
  });

  // export-lp
  std::string lp_instance;
  std::size_t var_cap = kDefaultMilpVarCap;
  Output lp_out;
  auto* export_cmd = app.add_subcommand("export-lp", "Write the MILP in CPLEX LP format");
  export_cmd->add_option("instance", lp_instance)->required()->check(CLI::ExistingFile);
  export_cmd->add_option("--var-cap", var_cap);
  export_cmd->add_option("-o,--output", lp_out.path);
  export_cmd->callback([&] {
    action = [&] {
      lp_out.write(out, lp_text(build_milp(load_instance(lp_instance), var_cap)));
      return kExitOk;
    };
  });

  // match
  std::string match_network, match_trace;
  pl::MatchOptions match_opt;
  Output match_out;
  auto* match = app.add_subcommand("match", "Map-match a telemetry trace");
  match->add_option("network", match_network)->required()->check(CLI::ExistingFile);
  match->add_option("trace", match_trace)->required()->check(CLI::ExistingFile);
  match->add_option("--radius", match_opt.radius_m)->check(CLI::PositiveNumber);
  match->add_option("--window", match_opt.window)->check(CLI::NonNegativeNumber);
  match->add_option("-o,--output", match_out.path);
  match->callback([&] {
    action = [&] {
      const pl::RoadNetwork net = pl::load_network(match_network);
      const auto locs = locations_of(pl::read_trace_csv(match_trace));
      const pl::MatchResult m = pl::map_match(net, locs, match_opt);
      std::ostringstream s;
      s << "index,segment_id\n";
      for (std::size_t i = 0; i < m.size(); ++i) s << i << ',' << (m[i] ? std::to_string(*m[i]) : "") << '\n';
      match_out.write(out, s.str());
      return kExitOk;
    };
  });

  // match-eval
  std::string eval_network, sigmas;
  pl::EvaluationOptions eval_opt;
  Output eval_out;
  auto* match_eval = app.add_subcommand("match-eval", "Matching accuracy against noise level on synthetic routes");
  match_eval->add_option("--network", eval_network, "Network JSON (default: 25 x 25 street grid)")
      ->check(CLI::ExistingFile);
  match_eval->add_option("--sigmas", sigmas, "Comma-separated noise levels in meters");
  match_eval->add_option("--routes", eval_opt.routes)->check(CLI::PositiveNumber);
  match_eval->add_option("--points", eval_opt.points_per_route)->check(CLI::PositiveNumber);
  match_eval->add_option("--seed", eval_opt.seed);
  match_eval->add_option("--radius", eval_opt.match.radius_m)->check(CLI::PositiveNumber);
  match_eval->add_option("--window", eval_opt.match.window)->check(CLI::NonNegativeNumber);
  match_eval->add_option("-o,--output", eval_out.path);
  match_eval->callback([&] {
    if (!sigmas.empty()) eval_opt.sigmas_m = parse_list(sigmas);
    action = [&] {
      const pl::RoadNetwork net =
          eval_network.empty() ? pl::RoadNetwork(pl::make_grid_network(25, 25, 200.0)) : pl::load_network(eval_network);
      const auto acc = pl::evaluate_matching(net, eval_opt);
      std::ostringstream s;
      s << "sigma_m,accuracy\n";
      for (std::size_t i = 0; i < acc.size(); ++i) s << csv::fmt6(eval_opt.sigmas_m[i]) << ',' << csv::fmt6(acc[i]) << '\n';
      eval_out.write(out, s.str());
      return kExitOk;
    };
  });

  // samples
  std::string smp_network, smp_trace, smp_kind = "electric", weather, traffic, garages;
  pl::LabelOptions label_opt;
  pl::MatchOptions smp_match;
  Output smp_out;
  auto* samples = app.add_subcommand("samples", "Turn a telemetry trace into per-segment energy samples");
  samples->add_option("network", smp_network)->required()->check(CLI::ExistingFile);
  samples->add_option("trace", smp_trace)->required()->check(CLI::ExistingFile);
  samples->add_option("--kind", smp_kind)->check(CLI::IsMember({"electric", "liquid_fuel"}));
  samples->add_option("--weather", weather, "Weather CSV")->check(CLI::ExistingFile);
  samples->add_option("--traffic", traffic, "Traffic CSV")->check(CLI::ExistingFile);
  samples->add_option("--garages", garages, "JSON list of [lat, lon] rings")->check(CLI::ExistingFile);
  samples->add_option("--kwh-per-gallon", label_opt.kwh_per_gallon)->check(CLI::PositiveNumber);
  samples->add_option("--radius", smp_match.radius_m)->check(CLI::PositiveNumber);
  samples->add_option("--window", smp_match.window)->check(CLI::NonNegativeNumber);
  samples->add_option("-o,--output", smp_out.path);
  samples->callback([&] {
    action = [&] {
      const pl::RoadNetwork net = pl::load_network(smp_network);
      const pl::TelemetryTrace trace_pts = pl::read_trace_csv(smp_trace);
      label_opt.garages = load_garages(garages);
      const auto labels = pl::clean_and_label(trace_pts, vehicle_kind_from_string(smp_kind), label_opt);
      std::vector<pl::LatLon> kept;
      kept.reserve(labels.size());
      for (const auto& l : labels) kept.push_back({trace_pts[l.index].lat, trace_pts[l.index].lon});
      const pl::MatchResult matched = pl::map_match(net, kept, smp_match);
      pl::FeatureSources features;
      if (!weather.empty()) features.weather = pl::read_weather_csv(weather);
      if (!traffic.empty()) features.traffic = pl::read_traffic_csv(traffic);
      const auto rows = pl::make_samples(net, trace_pts, labels, matched, features);
      log.info("samples: {} points kept, {} samples", labels.size(), rows.size());
      smp_out.write(out, pl::samples_csv(rows));
      return kExitOk;
    };
  });

  // calibrate
  std::vector<std::string> cal_inputs;
  Output cal_out;
  auto* calibrate = app.add_subcommand("calibrate", "Fit the linear energy model");
  calibrate->add_option("samples", cal_inputs, "Sample CSVs")->required()->check(CLI::ExistingFile);
  calibrate->add_option("-o,--output", cal_out.path);
  calibrate->callback([&] {
    action = [&] {
      std::vector<pl::EnergySample> all;
      for (const auto& path : cal_inputs) {
        auto part = pl::read_samples_csv(path);
        all.insert(all.end(), part.begin(), part.end());
      }
      const pl::LinearModel model = pl::fit_ols(all);
      log.info("calibrate: {} samples, mse {:.6f}", all.size(), model.mse);
      cal_out.write(out, json_text(pl::model_to_json(model)));
      return kExitOk;
    };
  });

  // predict
  std::string pred_model, pred_samples;
  Output pred_out;
  auto* predict = app.add_subcommand("predict", "Predict trip energy from segment samples");
  predict->add_option("model", pred_model)->required()->check(CLI::ExistingFile);
  predict->add_option("samples", pred_samples)->required()->check(CLI::ExistingFile);
  predict->add_option("-o,--output", pred_out.path);
  predict->callback([&] {
    action = [&] {
      const pl::LinearModel model = pl::load_model(pred_model);
      const auto segs = pl::read_samples_csv(pred_samples);
      std::ostringstream s;
      s << "segment_id,predicted_kwh\n";
      for (const auto& seg : segs) s << seg.segment_id << ',' << csv::fmt6(pl::predict(model, seg)) << '\n';
      s << "total," << csv::fmt6(pl::predict_trip_energy(model, segs)) << '\n';
      pred_out.write(out, s.str());
      return kExitOk;
    };
  });

  // report
  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "Greedy and annealing cost as a percentage of the exact optimum");
  report->add_option("instances", report_args.instances)->check(CLI::ExistingFile);
  report->add_option("--lines", report_args.lines, "Generate instances with these line counts")->delimiter(',');
  report->add_option("--seed-from", report_args.seed_from);
  report->add_option("--seed-to", report_args.seed_to);
  report->add_option("--alpha", report_args.greedy.alpha);
  report->add_option("--k-max", report_args.anneal.k_max);
  report->add_option("--seed", report_args.anneal.seed, "Annealing seed");
  report->add_option("--time-limit", report_args.time_limit_s)->check(CLI::PositiveNumber);
  report->add_option("-o,--output", report_args.output.path);
  report->callback([&] {
    report_args.anneal.check();
    action = [&] { return run_report(report_args, out, log); };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    return action();
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    log.error("{}", e.what());
    return kExitFailure;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace fleetopt::cli

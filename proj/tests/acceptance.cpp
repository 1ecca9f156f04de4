// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "fleetopt/anneal.hpp"
#include "fleetopt/cli.hpp"
#include "fleetopt/exact.hpp"
#include "fleetopt/generator.hpp"
#include "fleetopt/gtfs.hpp"
#include "fleetopt/io.hpp"
#include "fleetopt/milp.hpp"
#include "fleetopt/pipeline/matching.hpp"
#include "fleetopt/pipeline/regression.hpp"
#include "fleetopt/pipeline/telemetry.hpp"
#include "oracle.hpp"

using namespace fleetopt;
namespace pl = fleetopt::pipeline;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

Instance generated(int lines, std::uint64_t seed) {
  GeneratorParams p;
  p.lines = lines;
  p.seed = seed;
  p.icev_factor = 5;
  p.evs = 3;
  p.trips_per_line = 10;
  return Instance(generate_instance(p));
}

Verdict optimality_gap() {
  int greedy_ok = 0;
  int sa_ok = 0;
  int sa_not_worse = 0;
  int solved = 0;
  double slowest = 0.0;
  double worst_greedy = 0.0;
  double worst_sa = 0.0;
  const int n = 20;
  for (int seed = 1; seed <= n; ++seed) {
    const Instance inst = generated(seed <= 10 ? 1 : 2, static_cast<std::uint64_t>(seed));
    const auto t0 = Clock::now();
    const ExactResult exact = solve_exact(inst, 60.0);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    slowest = std::max(slowest, secs);
    if (exact.status != ExactStatus::optimal || secs > 60.0) continue;
    ++solved;
    const double x = solution_cost(inst, *exact.solution);
    const double g = solution_cost(inst, greedy_assign(inst));
    const double s = anneal_run(inst, AnnealConfig{}).best_cost;
    greedy_ok += g / x <= 1.6;
    sa_ok += s / x <= 1.6;
    sa_not_worse += s <= g + 1e-9;
    worst_greedy = std::max(worst_greedy, g / x);
    worst_sa = std::max(worst_sa, s / x);
  }
  std::ostringstream d;
  d << "exact optimal " << solved << "/" << n << " (slowest " << fmt("%.1f", slowest) << " s); greedy <= 1.6 on "
    << greedy_ok << "/" << n << " (worst " << fmt("%.3f", worst_greedy) << "); sa <= 1.6 on " << sa_ok << "/" << n
    << " (worst " << fmt("%.3f", worst_sa) << "); sa <= greedy on " << sa_not_worse << "/" << n;
  const int need = (9 * n + 9) / 10;
  return {solved == n && greedy_ok >= need && sa_ok >= need && sa_not_worse == n, d.str()};
}

Verdict pruning_soundness() {
  int matched = 0;
  int feasible = 0;
  int mismatched = 0;
  for (std::uint64_t seed = 1; feasible < 10 && seed < 200; ++seed) {
    const Instance inst = testing::random_tiny(seed);
    const auto oracle = testing::brute_force_optimum(inst);
    const ExactResult r = solve_exact(inst, 60.0);
    if (!oracle) {
      mismatched += r.status != ExactStatus::infeasible;
      continue;
    }
    ++feasible;
    const bool same = r.status == ExactStatus::optimal &&
                      std::abs(solution_cost(inst, *r.solution) - *oracle) <= 1e-9 * std::max(1.0, *oracle);
    matched += same;
    mismatched += !same;
  }
  return {feasible == 10 && matched == 10 && mismatched == 0,
          std::to_string(matched) + "/10 feasible instances match enumeration, " + std::to_string(mismatched) +
              " disagreements"};
}

// Each mutation returns nullopt when it does not apply to the solution at hand.
using Mutation = std::function<std::optional<Solution>(const Instance&, const Solution&, Rng&)>;

std::optional<Solution> drop_trip(const Instance&, const Solution& s, Rng& rng) {
  Solution m = s;
  m.trips.erase(m.trips.begin() + static_cast<std::ptrdiff_t>(rng.below(m.trips.size())));
  return m;
}

std::optional<Solution> double_assign(const Instance& inst, const Solution& s, Rng& rng) {
  Solution m = s;
  const TripAssignment a = m.trips[rng.below(m.trips.size())];
  auto other = static_cast<VehicleIdx>(rng.below(inst.vehicle_count() - 1));
  if (other >= a.vehicle) ++other;
  m.trips.push_back({other, a.trip});
  return m;
}

std::optional<Solution> overlap(const Instance& inst, const Solution& s, Rng& rng) {
  // Move a trip onto a vehicle already running a trip it cannot follow or precede.
  std::vector<std::pair<std::size_t, VehicleIdx>> options;
  for (std::size_t i = 0; i < s.trips.size(); ++i) {
    for (const auto& b : s.trips) {
      if (b.vehicle == s.trips[i].vehicle) continue;
      Task x = Task::for_trip(s.trips[i].trip);
      Task y = Task::for_trip(b.trip);
      if (task_before(inst, y, x)) std::swap(x, y);
      if (!pair_feasible(inst, x, y)) options.emplace_back(i, b.vehicle);
    }
  }
  if (options.empty()) return std::nullopt;
  const auto [i, v] = options[rng.below(options.size())];
  Solution m = s;
  m.trips[i].vehicle = v;
  return m;
}

std::optional<Solution> drain_battery(const Instance&, const Solution& s, Rng& rng) {
  // Strip every charging slot of one electric vehicle that needed charging.
  std::vector<VehicleIdx> charged;
  for (const auto& c : s.charges) {
    if (std::find(charged.begin(), charged.end(), c.vehicle) == charged.end()) charged.push_back(c.vehicle);
  }
  if (charged.empty()) return std::nullopt;
  const VehicleIdx v = charged[rng.below(charged.size())];
  Solution m = s;
  std::erase_if(m.charges, [&](const ChargeAssignment& c) { return c.vehicle == v; });
  return m;
}

Verdict constraint_suite() {
  const std::vector<std::pair<ViolationKind, Mutation>> kinds{{ViolationKind::unassigned_trip, drop_trip},
                                                               {ViolationKind::double_assigned_trip, double_assign},
                                                               {ViolationKind::time_infeasible_pair, overlap},
                                                               {ViolationKind::battery_underflow, drain_battery}};
  std::vector<int> tried(kinds.size(), 0);
  std::vector<int> caught(kinds.size(), 0);
  int total = 0;
  int bases = 0;
  Rng rng(2024);
  for (std::uint64_t seed = 1; total < 1000; ++seed) {
    const Instance inst = generated(1 + static_cast<int>(seed % 3), seed);
    Solution base = greedy_assign(inst);
    for (int step = 0; step < 10 && total < 1000; ++step) {
      if (!validate_solution(inst, base).empty()) return {false, "base solution infeasible"};
      ++bases;
      for (std::size_t k = 0; k < kinds.size() && total < 1000; ++k) {
        const auto mutated = kinds[k].second(inst, base, rng);
        if (!mutated) continue;
        ++tried[k];
        ++total;
        caught[k] += has_violation(validate_solution(inst, *mutated), kinds[k].first);
      }
      base = random_neighbor(inst, base, 0.05, rng);
    }
  }
  std::ostringstream d;
  bool pass = total == 1000;
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    d << (k ? ", " : "") << to_string(kinds[k].first) << " " << caught[k] << "/" << tried[k];
    pass = pass && tried[k] > 0 && caught[k] == tried[k];
  }
  d << " over " << bases << " feasible bases";
  return {pass, d.str()};
}

Verdict schedule_math() {
  const AnnealConfig c;
  const Schedule s = Schedule::from(c);
  const double t1 = -1.0 / std::log(0.7);
  const double tk = -1.0 / std::log(0.001);
  const auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  const bool taus = rel(s.tau(1), t1) <= 1e-9 && rel(s.tau(c.k_max), tk) <= 1e-9 && std::abs(t1 - 2.80367) < 5e-6 &&
                    std::abs(tk - 0.14476) < 5e-6;
  const bool probs = accept_probability(0.0, 1.0, 1.0) == 1.0 &&
                     rel(accept_probability(1.7, 1.7, 1.0), std::exp(-1.0)) <= 1e-12 &&
                     rel(accept_probability(2.0, 1.0, 0.5), std::exp(-4.0)) <= 1e-12;
  return {taus && probs, "tau_1 = " + fmt("%.9f", s.tau(1)) + ", tau_kmax = " + fmt("%.9f", s.tau(c.k_max)) +
                             ", p(0) = 1, p(avg, 1) = e^-1, p(2, 1, 0.5) = e^-4"};
}

Verdict matching_curve() {
  const pl::RoadNetwork net(pl::make_grid_network(25, 25, 200.0));
  pl::EvaluationOptions opt;
  opt.sigmas_m = {1.1, 20, 60, 100, 140};
  std::vector<double> mean(opt.sigmas_m.size(), 0.0);
  const int runs = 10;
  for (int r = 1; r <= runs; ++r) {
    opt.seed = static_cast<std::uint64_t>(r);
    const auto acc = pl::evaluate_matching(net, opt);
    for (std::size_t i = 0; i < acc.size(); ++i) mean[i] += acc[i] / runs;
  }
  bool pass = net.segments().size() == 50 && mean[0] >= 0.98;
  std::ostringstream d;
  d << "mean accuracy";
  for (std::size_t i = 0; i < mean.size(); ++i) {
    d << " " << fmt("%.4f", mean[i]) << "@" << opt.sigmas_m[i];
    if (i > 0) pass = pass && mean[i] <= mean[i - 1] + 0.02;
  }
  return {pass, d.str()};
}

Verdict label_unbiasedness() {
  // One hour of 1 Hz discharge; SoC follows the true continuous draw,
  // reported to 0.01 %.
  const double capacity_kwh = 300.0;
  const auto current = [](double t) { return 120.0 + 60.0 * std::sin(2.0 * std::numbers::pi * t / 300.0); };
  const auto voltage = [&](double t) { return 620.0 - 0.08 * current(t); };
  pl::TelemetryTrace trace;
  double true_kwh = 0.0;
  for (int i = 0; i <= 3600; ++i) {
    const double t = i;
    if (i > 0) {
      const int sub = 100;
      for (int k = 0; k < sub; ++k) {
        const double a = t - 1.0 + static_cast<double>(k) / sub;
        const double b = a + 1.0 / sub;
        true_kwh += 0.5 * (current(a) * voltage(a) + current(b) * voltage(b)) * (b - a) / 3.6e6;
      }
    }
    pl::TelemetryPoint p;
    p.ts_s = t;
    p.current_a = current(t);
    p.voltage_v = voltage(t);
    p.cable = 0;
    p.soc_pct = std::round((90.0 - 100.0 * true_kwh / capacity_kwh) * 100.0) / 100.0;
    trace.push_back(p);
  }
  double labeled = 0.0;
  for (const auto& l : pl::clean_and_label(trace, VehicleKind::electric)) labeled += l.energy_kwh;
  const double soc_kwh = (*trace.front().soc_pct - *trace.back().soc_pct) / 100.0 * capacity_kwh;
  const double err = std::abs(labeled - soc_kwh) / soc_kwh;
  return {err <= 0.01, "labels " + fmt("%.4f", labeled) + " kWh vs SoC " + fmt("%.4f", soc_kwh) +
                           " kWh, relative gap " + fmt("%.5f", err)};
}

pl::EnergySample synthetic_segment(Rng& rng) {
  pl::EnergySample s;
  s.distance_m = rng.uniform(80, 900);
  s.elevation_delta_m = rng.uniform(-6, 6);
  s.temp_c = rng.uniform(0, 35);
  s.humidity_pct = rng.uniform(20, 95);
  s.visibility_km = rng.uniform(2, 16);
  s.precip_mm = rng.uniform(0, 3);
  s.wind_ms = rng.uniform(0, 10);
  s.speed_ratio = rng.uniform(0.5, 1.1);
  s.road_class = rng.uniform() < 0.5 ? "primary" : "secondary";
  return s;
}

double true_energy(const pl::EnergySample& s) {
  return 0.0012 * s.distance_m + 0.025 * s.elevation_delta_m + 0.004 * std::abs(s.temp_c - 20.0) +
         0.001 * s.humidity_pct - 0.005 * s.visibility_km + 0.05 * s.precip_mm + 0.01 * s.wind_ms -
         0.3 * s.speed_ratio + (s.road_class == "secondary" ? 0.08 : 0.0) + 0.45;
}

Verdict ols_correctness() {
  Rng rng(7);
  // Exact linear data.
  std::vector<pl::EnergySample> exact;
  for (int i = 0; i < 60; ++i) {
    pl::EnergySample s = synthetic_segment(rng);
    s.energy_kwh = 0.0012 * s.distance_m + 0.025 * s.elevation_delta_m - 0.004 * s.temp_c + 0.001 * s.humidity_pct -
                   0.005 * s.visibility_km + 0.05 * s.precip_mm + 0.01 * s.wind_ms - 0.3 * s.speed_ratio +
                   (s.road_class == "secondary" ? 0.08 : 0.0) + 0.45;
    exact.push_back(s);
  }
  const pl::LinearModel m = pl::fit_ols(exact);
  const std::vector<double> want{0.0012, 0.025, -0.004, 0.001, -0.005, 0.05, 0.01, -0.3, 0.08};
  double coef_err = std::abs(m.intercept - 0.45);
  for (std::size_t k = 0; k < want.size(); ++k) coef_err = std::max(coef_err, std::abs(m.coefficients[k] - want[k]));

  // Noisy data: residuals orthogonal to every column and to the intercept.
  std::vector<pl::EnergySample> noisy;
  for (int i = 0; i < 400; ++i) {
    pl::EnergySample s = synthetic_segment(rng);
    s.energy_kwh = true_energy(s) + 0.15 * rng.normal();
    noisy.push_back(s);
  }
  const pl::LinearModel fit = pl::fit_ols(noisy);
  Eigen::VectorXd dots = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fit.features.size()) + 1);
  for (const auto& s : noisy) {
    const double r = s.energy_kwh - pl::predict(fit, s);
    dots.head(dots.size() - 1) += r * pl::encode(fit, s);
    dots(dots.size() - 1) += r;
  }
  const double ortho = dots.cwiseAbs().maxCoeff();

  // Trip-level error against trip length.
  std::vector<std::pair<int, double>> trips;
  for (int t = 0; t < 50; ++t) {
    const int segments = 2 + static_cast<int>(rng.below(39));
    std::vector<pl::EnergySample> legs;
    double truth = 0.0;
    for (int k = 0; k < segments; ++k) {
      pl::EnergySample s = synthetic_segment(rng);
      truth += true_energy(s) + 0.15 * rng.normal();
      legs.push_back(s);
    }
    truth = std::max(truth, 1e-6);
    trips.emplace_back(segments, std::abs(pl::predict_trip_energy(fit, legs) - truth) / truth);
  }
  std::sort(trips.begin(), trips.end());
  double short_err = 0.0;
  double long_err = 0.0;
  for (std::size_t i = 0; i < trips.size(); ++i) (i < trips.size() / 2 ? short_err : long_err) += trips[i].second;
  short_err /= static_cast<double>(trips.size() / 2);
  long_err /= static_cast<double>(trips.size() - trips.size() / 2);

  const bool pass = coef_err <= 1e-6 && ortho <= 1e-6 && long_err <= short_err;
  return {pass, "max coefficient error " + fmt("%.2e", coef_err) + ", max |X^T r| " + fmt("%.2e", ortho) +
                    ", mean relative error short " + fmt("%.4f", short_err) + " long " + fmt("%.4f", long_err)};
}

std::string cli_output(const std::vector<std::string>& args, const fs::path& out_file) {
  std::ostringstream out;
  std::ostringstream err;
  std::vector<std::string> full = args;
  if (!out_file.empty()) {
    full.push_back("-o");
    full.push_back(out_file.string());
  }
  const int code = cli::run(full, out, err);
  std::string text = std::to_string(code) + "\n" + out.str();
  if (!out_file.empty()) {
    std::ifstream in(out_file, std::ios::binary);
    text += std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return text;
}

Verdict determinism() {
  const fs::path dir = fs::temp_directory_path() / "fleetopt_acceptance";
  fs::create_directories(dir);
  const auto data = testing::data_dir();
  const std::string inst = (dir / "inst.json").string();
  const std::string sol = (dir / "sol.json").string();
  const std::string net = (dir / "net.json").string();
  const std::string trace = (dir / "trace.csv").string();
  const std::string samples = (dir / "samples.csv").string();
  const std::string model = (dir / "model.json").string();

  // Fixed inputs for the pipeline commands.
  write_text_file(net, pl::network_to_json(pl::make_grid_network(6, 6, 200.0)).dump());
  {
    const pl::RoadNetwork road(pl::make_grid_network(6, 6, 200.0));
    const auto route = pl::random_route(road, pl::default_bus_classes(), 400, 15.0, 5);
    pl::TelemetryTrace t;
    Rng rng(5);
    for (std::size_t i = 0; i < route.points.size(); ++i) {
      pl::TelemetryPoint p;
      p.ts_s = 2.0 * static_cast<double>(i);
      p.lat = route.points[i].lat;
      p.lon = route.points[i].lon;
      p.current_a = rng.uniform(40, 160);
      p.voltage_v = 600;
      p.cable = 0;
      t.push_back(p);
    }
    write_text_file(trace, pl::trace_csv(t));
  }
  cli_output({"generate", "--lines", "2", "--seed", "11"}, inst);
  cli_output({"solve", "--algo", "greedy", inst}, sol);
  cli_output({"samples", net, trace}, samples);
  cli_output({"calibrate", samples}, model);

  const std::vector<std::vector<std::string>> commands{
      {"generate", "--lines", "3", "--seed", "5"},
      {"ingest-gtfs", (data / "gtfs_small").string(), "--fleet", (data / "fleet.json").string()},
      {"solve", "--algo", "greedy", inst},
      {"solve", "--algo", "sa", "--seed", "1", inst},
      {"solve", "--algo", "sa", "--seed", "3", "--restarts", "4", "--k-max", "3000", inst},
      {"solve", "--algo", "exact", inst},
      {"validate", inst, sol},
      {"export-lp", inst},
      {"match", net, trace},
      {"match-eval", "--seed", "2", "--routes", "3"},
      {"samples", net, trace},
      {"calibrate", samples},
      {"predict", model, samples},
      {"report", "--lines", "1", "--seed-from", "3", "--seed-to", "3", "--k-max", "1000"},
  };
  int stable = 0;
  std::string unstable;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    const fs::path a = dir / ("run_a_" + std::to_string(i));
    const fs::path b = dir / ("run_b_" + std::to_string(i));
    const std::string first = cli_output(commands[i], a);
    const std::string second = cli_output(commands[i], b);
    if (first == second && first.starts_with("0\n")) {
      ++stable;
    } else {
      unstable += " " + commands[i][0];
    }
  }
  return {stable == static_cast<int>(commands.size()),
          std::to_string(stable) + "/" + std::to_string(commands.size()) + " commands byte-stable" +
              (unstable.empty() ? "" : ";" + unstable + " differ or failed")};
}

Verdict lp_round_trip() {
  const auto data = testing::data_dir();
  std::vector<std::pair<std::string, Instance>> golden;
  golden.emplace_back("line3", load_instance(data / "line3.json"));
  golden.emplace_back("line1-seed1", generated(1, 1));
  {
    GtfsOptions opt;
    opt.dir = data / "gtfs_small";
    golden.emplace_back("gtfs_small", Instance(ingest_gtfs(opt, fleet_from_json(read_json_file(data / "fleet.json")))));
  }
  const fs::path dir = fs::temp_directory_path() / "fleetopt_acceptance";
  fs::create_directories(dir);
  int equal = 0;
  std::ostringstream d;
  for (const auto& [name, inst] : golden) {
    const MilpModel m = build_milp(inst);
    const fs::path path = dir / (name + ".lp");
    export_lp(m, path);
    const bool same = same_model(m, read_lp(path));
    equal += same;
    if (!d.str().empty()) d << "; ";
    d << name << " (" << m.vars.size() << " vars, " << m.constraints.size() << " rows) " << (same ? "equal" : "DIFFER");
  }
  return {equal == static_cast<int>(golden.size()), d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"optimality-gap envelope", optimality_gap}, {"pruning soundness", pruning_soundness},
      {"constraint suite", constraint_suite},      {"SA schedule math", schedule_math},
      {"map-matching curve", matching_curve},      {"energy-label unbiasedness", label_unbiasedness},
      {"OLS correctness", ols_correctness},        {"determinism", determinism},
      {"LP round trip", lp_round_trip},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("criterion %zu %-26s %s  %s [%.1f s]\n", i + 1, criteria[i].first.c_str(), v.pass ? "PASS" : "FAIL",
                v.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed == 0 ? 0 : 1;
}

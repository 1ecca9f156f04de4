// Wall-clock comparison of the OpenMP kernels against their serial references.
//
//   fleetopt_bench [--quick]
#include <chrono>
#include <cstdio>
#include <cstring>

#include <omp.h>

#include "fleetopt/generator.hpp"
#include "fleetopt/greedy.hpp"
#include "fleetopt/pipeline/matching.hpp"
#include "fleetopt/rng.hpp"

using namespace fleetopt;
namespace pl = fleetopt::pipeline;

template <typename F>
double best_ms(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

int main(int argc, char** argv) {
  const bool quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
  const int reps = quick ? 1 : 3;
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-34s %12s %12s %8s %s\n", "kernel", "parallel_ms", "serial_ms", "speedup", "same");

  {
    const pl::RoadNetwork net(pl::make_grid_network(25, 25, 200.0));
    const auto route = pl::random_route(net, pl::default_bus_classes(), quick ? 500 : 5000, 15.0, 1);
    Rng rng(1);
    std::vector<pl::LatLon> noisy;
    for (const auto& p : route.points) {
      auto xy = net.projection().to_xy(p.lat, p.lon);
      xy.x += 20.0 * rng.normal();
      xy.y += 20.0 * rng.normal();
      pl::LatLon q;
      net.projection().to_latlon(xy, q.lat, q.lon);
      noisy.push_back(q);
    }
    const pl::MatchOptions opt;
    const pl::SegmentIndex index(net, opt.bus_classes);
    pl::MatchResult fast;
    pl::MatchResult slow;
    const double a = best_ms(reps, [&] { fast = pl::map_match(index, noisy, opt); });
    const double b = best_ms(reps, [&] { slow = pl::map_match_reference(net, noisy, opt); });
    std::printf("%-34s %12.2f %12.2f %8.2f %s\n", ("map_match, " + std::to_string(noisy.size()) + " points").c_str(), a,
                b, b / a, fast == slow ? "yes" : "NO");
  }

  for (int lines : quick ? std::vector<int>{2} : std::vector<int>{4, 8, 12}) {
    GeneratorParams p;
    p.lines = lines;
    const Instance inst(generate_instance(p));
    Solution par;
    Solution ser;
    const double a = best_ms(reps, [&] { par = greedy_assign(inst, {}, Execution::parallel); });
    const double b = best_ms(reps, [&] { ser = greedy_assign(inst, {}, Execution::serial); });
    std::printf("%-34s %12.2f %12.2f %8.2f %s\n", ("greedy_assign, " + std::to_string(lines) + " lines").c_str(), a, b,
                b / a, par == ser ? "yes" : "NO");
  }
  return 0;
}

#include <doctest.h>

#include <fstream>
#include <json.hpp>

#include "fleetopt/generator.hpp"
#include "fleetopt/gtfs.hpp"
#include "fleetopt/io.hpp"
#include "support.hpp"

using namespace fleetopt;
using fleetopt::testing::Builder;
using fleetopt::testing::data_dir;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("fleetopt_test_" + name);
  std::ofstream(path) << text;
  return path;
}

const char* kMinimal = R"({
  "models": [{"id": "diesel", "kind": "liquid_fuel", "battery_capacity_kwh": 0}],
  "vehicles": [{"id": "V1", "model": "diesel", "initial_charge_kwh": 0}],
  "locations": [{"id": "A", "lat": 35.0, "lon": -85.0}, {"id": "B", "lat": 35.1, "lon": -85.0}],
  "trips": [{"id": "T1", "origin": "A", "destination": "B", "start_s": 3600, "end_s": 7200}],
  "charging_poles": [],
  "slot_grid": {"day_start_s": 0, "day_end_s": 86400, "slot_length_s": 3600},
  "deadhead": [{"from": "A", "to": "B", "duration_s": 600, "energy_kwh": {"diesel": 4.0}},
               {"from": "B", "to": "A", "duration_s": 600, "energy_kwh": {"diesel": 4.0}}],
  "trip_energy": [{"trip": "T1", "model": "diesel", "energy_kwh": 20.0}],
  "costs": {"k_gas": 1.0, "k_elec": 0.5}
})";

}  // namespace

TEST_SUITE("instance_model") {
  TEST_CASE("minimal file loads") {
    const Instance inst = load_instance(temp_file("minimal.json", kMinimal));
    CHECK(inst.vehicle_count() == 1);
    CHECK(inst.trip_count() == 1);
    CHECK(inst.trip_energy(0, 0) == 20.0);
  }

  TEST_CASE("unknown location is named in the error") {
    auto j = nlohmann::json::parse(kMinimal);
    j["trips"][0]["origin"] = "X";
    const auto path = temp_file("unknown_loc.json", j.dump());
    CHECK_THROWS_WITH_AS(load_instance(path), doctest::Contains("'X'"), ValidationError);
  }

  TEST_CASE("malformed json is a parse error") {
    CHECK_THROWS_AS(load_instance(temp_file("broken.json", "{\"models\": [")), ParseError);
  }

  TEST_CASE("golden line3 snapshot") {
    const Instance inst = load_instance(data_dir() / "line3.json");
    CHECK(inst.trip_count() == 30);
    int evs = 0;
    int icevs = 0;
    for (VehicleIdx v = 0; v < inst.vehicle_count(); ++v) (inst.is_electric(v) ? evs : icevs)++;
    CHECK(evs == 3);
    CHECK(icevs == 15);

    GeneratorParams p;
    p.lines = 3;
    p.seed = 7;
    std::ifstream in(data_dir() / "line3.json");
    const std::string golden((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(dump_instance(generate_instance(p)) == golden);
  }

  TEST_CASE("generator sizes") {
    GeneratorParams p;
    const Instance one(generate_instance(p));
    CHECK(one.trip_count() == 10);
    int evs = 0;
    for (VehicleIdx v = 0; v < one.vehicle_count(); ++v) evs += one.is_electric(v);
    CHECK(evs == 3);
    CHECK(one.vehicle_count() == 8);

    p.lines = 12;
    const Instance big(generate_instance(p));
    CHECK(big.trip_count() == 120);
    CHECK(big.vehicle_count() == 3 + kMaxGeneratedIcevs);
  }

  TEST_CASE("generator is deterministic in the seed") {
    GeneratorParams p;
    p.lines = 2;
    p.seed = 42;
    CHECK(dump_instance(generate_instance(p)) == dump_instance(generate_instance(p)));
    GeneratorParams q = p;
    q.seed = 43;
    CHECK(dump_instance(generate_instance(p)) != dump_instance(generate_instance(q)));
  }

  TEST_CASE("serialization round trip") {
    GeneratorParams p;
    p.lines = 2;
    const InstanceData d = generate_instance(p);
    CHECK(instance_from_json(instance_to_json(d)) == d);
  }

  TEST_CASE("deadhead lookup") {
    const Instance inst = load_instance(temp_file("minimal_dh.json", kMinimal));
    CHECK(deadhead_duration(inst, "A", "A") == 0);
    CHECK(deadhead_duration(inst, "B", "A") == 600);

    auto j = nlohmann::json::parse(kMinimal);
    j["deadhead"].erase(1);
    const Instance partial(instance_from_json(j));
    CHECK_THROWS_AS(deadhead_duration(partial, "B", "A"), MissingDeadhead);

    const Instance golden = load_instance(data_dir() / "line3.json");
    const auto raw = read_json_file(data_dir() / "line3.json");
    const auto& entry = raw.at("deadhead").at(5);
    CHECK(deadhead_duration(golden, entry.at("from"), entry.at("to")) == entry.at("duration_s").get<Seconds>());
  }

  TEST_CASE("invariants are enforced") {
    SUBCASE("trip must start before it ends") {
      Builder b;
      b.location("A").diesel("V").trip("T", "A", "A", 100, 100, 1, 1);
      CHECK_THROWS_AS(b.build(), ValidationError);
    }
    SUBCASE("initial charge within capacity") {
      Builder b(50.0);
      b.location("A").ev("E", 60.0).trip("T", "A", "A", 0, 100, 1, 1);
      CHECK_THROWS_AS(b.build(), ValidationError);
    }
    SUBCASE("self deadhead is zero") {
      Builder b;
      b.location("A").diesel("V").trip("T", "A", "A", 0, 100, 1, 1).deadhead("A", "A", 5, 0, 0);
      CHECK_THROWS_AS(b.build(), ValidationError);
    }
    SUBCASE("missing trip energy") {
      Builder b;
      b.location("A").diesel("V").trip("T", "A", "A", 0, 100, 1, 1);
      b.data().trip_energy.erase({"T", "ev"});
      CHECK_THROWS_AS(b.build(), ValidationError);
    }
    SUBCASE("grid must divide evenly") {
      Builder b;
      b.location("A").diesel("V").trip("T", "A", "A", 0, 100, 1, 1).grid(0, 5000, 3600);
      CHECK_THROWS_AS(b.build(), ValidationError);
    }
  }

  TEST_CASE("slot_of books an event against the slot it completes in") {
    const SlotGrid g{0, 4 * 3600, 3600};
    CHECK(g.slot_of(0) == 0);
    CHECK(g.slot_of(3600) == 0);
    CHECK(g.slot_of(3601) == 1);
    CHECK(g.slot_of(-50) == 0);
    CHECK(g.slot_of(99999) == 3);
  }
}

TEST_SUITE("gtfs") {
  TEST_CASE("time parsing") {
    CHECK(parse_gtfs_time("07:00:00") == 25200);
    CHECK(parse_gtfs_time("25:10:05") == 25 * 3600 + 605);
    CHECK_THROWS_AS(parse_gtfs_time("7:60:00"), ParseError);
    CHECK_THROWS_AS(parse_gtfs_time("noon"), ParseError);
  }

  TEST_CASE("fixture feed") {
    const FleetConfig fleet = fleet_from_json(read_json_file(data_dir() / "fleet.json"));
    GtfsOptions opt;
    opt.dir = data_dir() / "gtfs_small";
    const Instance inst(ingest_gtfs(opt, fleet));
    REQUIRE(inst.trip_count() == 2);
    CHECK(inst.trip(0).id == "T1");
    CHECK(inst.trip(0).start_s == 7 * 3600);
    CHECK(inst.trip(0).end_s == 7 * 3600 + 45 * 60);
    CHECK(inst.trip(1).start_s == 8 * 3600 + 40 * 60);
    CHECK(inst.trip(0).destination == "C");

    // Stops A and C lie 25 km apart on a meridian.
    CHECK(deadhead_duration(inst, "A", "C") == 3600);
    const auto a = *inst.find_location("A");
    const auto c = *inst.find_location("C");
    const VehicleIdx ev = *inst.find_vehicle("EV01");
    CHECK(inst.deadhead_energy(ev, a, c) == doctest::Approx(1.25 * 25.0).epsilon(1e-6));
  }

  TEST_CASE("duration matrix replaces the haversine estimate") {
    const FleetConfig fleet = fleet_from_json(read_json_file(data_dir() / "fleet.json"));
    GtfsOptions opt;
    opt.dir = data_dir() / "gtfs_small";
    opt.deadhead_matrix = data_dir() / "deadhead_matrix.csv";
    const Instance inst(ingest_gtfs(opt, fleet));
    CHECK(deadhead_duration(inst, "A", "C") == 1800);
    CHECK(deadhead_duration(inst, "C", "A") == 1700);
    CHECK_THROWS_AS(deadhead_duration(inst, "A", "B"), MissingDeadhead);
  }

  TEST_CASE("a trip with one stop has no destination") {
    const FleetConfig fleet = fleet_from_json(read_json_file(data_dir() / "fleet.json"));
    GtfsOptions opt;
    opt.dir = data_dir() / "gtfs_single_stop";
    CHECK_THROWS_WITH_AS(ingest_gtfs(opt, fleet), doctest::Contains("T2"), ValidationError);
  }

  TEST_CASE("missing feed file") {
    const FleetConfig fleet = fleet_from_json(read_json_file(data_dir() / "fleet.json"));
    GtfsOptions opt;
    opt.dir = data_dir();
    CHECK_THROWS_AS(ingest_gtfs(opt, fleet), ParseError);
  }
}

#include "orca/config.hpp"
#include "orca/error.hpp"
#include "orca/io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

using namespace orca;
using nlohmann::json;

TEST_SUITE("config") {

TEST_CASE("empty document gives the operating point") {
    const auto c = config::from_json(json::object());
    CHECK(c.atomic.field_mt == 169.0);
    CHECK(c.atomic.intermediate_detuning_ghz == -8.0);
    CHECK(c.vapour.temperature_c == 85.0);
    CHECK(c.vapour.cell_length_mm == 6.0);
    CHECK(c.cavity.r1 == 0.6);
    CHECK(c.cavity.r2 == 0.9998);
    CHECK(c.cavity.zeta_rt == 0.135);
    CHECK(c.cavity.fsr_ghz == 8.3);
    CHECK(c.pulses.storage_time_ns == 12.5);

    const auto m = c.memory_config(c.constants());
    CHECK(m.cooperativity == 3800.0);
    CHECK(m.intermediate_detuning_ghz == -8.0);
    CHECK(m.doppler_width.ghz() == doctest::Approx(0.5586).epsilon(2e-3));
    CHECK(c.parameter_space().size() == 8);
}

TEST_CASE("unknown keys and wrong types are rejected") {
    CHECK_THROWS_AS(config::from_json(json{{"bogus", 1}}), ConfigError);
    CHECK_THROWS_AS(config::from_json(json{{"cavity", {{"r3", 0.5}}}}), ConfigError);
    CHECK_THROWS_AS(config::from_json(json{{"cavity", {{"r1", "high"}}}}), ConfigError);
    CHECK_THROWS_AS(config::from_json(json{{"memory", 5}}), ConfigError);
    CHECK_THROWS_AS(config::from_json(json{{"optimizer", {{"parameters", {1, 2}}}}}), ConfigError);
    CHECK_THROWS_AS(config::from_json(json::array()), ConfigError);
}

TEST_CASE("out-of-range values surface as config errors") {
    CHECK_THROWS_AS(config::from_json(json{{"cavity", {{"zeta_rt", 1.5}}}}), ConfigError);
    CHECK_THROWS_AS(config::from_json(json{{"optimizer", {{"population", 3}}}}), ConfigError);
    CHECK_THROWS_AS(config::from_json(json{{"pulses", {{"write_fwhm_ns", -1}}}}), ConfigError);
    CHECK_THROWS_AS(config::from_json(json{{"optimizer", {{"parameters", {"nope"}}}}}), ConfigError);
}

TEST_CASE("round trip through JSON") {
    json j{{"atomic", {{"field_mt", 250.0}}},
           {"vapour", {{"optical_depth", 150.0}}},
           {"memory", {{"cooperativity", 1000.0}, {"doppler_width_ghz", 0.6}}},
           {"pulses", {{"write_energy_nj", 0.31}}},
           {"optimizer", {{"seed", 77}, {"parameters", {"write_energy_nj", "control_detuning_ghz"}}}}};
    const auto c = config::from_json(j);
    const auto back = config::to_json(c);
    CHECK(config::to_json(config::from_json(back)) == back);
    CHECK(back["atomic"]["field_mt"] == 250.0);
    CHECK(back["vapour"]["optical_depth"] == 150.0);
    CHECK(back["vapour"]["field_inhomogeneity_mhz"].is_null());
    CHECK(back["optimizer"]["seed"] == 77);
    CHECK(c.parameter_space().size() == 2);
    CHECK(c.memory_config(c.constants()).doppler_width.ghz() == doctest::Approx(0.6));
}

TEST_CASE("load from disk with comments") {
    const auto dir = std::filesystem::temp_directory_path() / "orca_config_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "c.json";
    {
        std::ofstream f(path);
        f << "{\n  // cooler cell\n  \"vapour\": {\"temperature_c\": 70}\n}\n";
    }
    CHECK(config::load(path).vapour.temperature_c == 70.0);
    CHECK_THROWS_AS(config::load(dir / "missing.json"), ConfigError);
    {
        std::ofstream f(path);
        f << "{ not json";
    }
    CHECK_THROWS_AS(config::load(path), ConfigError);
}

}

TEST_SUITE("io") {

TEST_CASE("csv round trip is exact") {
    io::Table t;
    t.columns = {"x", "y", "z"};
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.0, 1e3);
    for (int i = 0; i < 100; ++i) t.add_row({n(rng), n(rng) * 1e-12, std::ldexp(n(rng), 200)});
    t.add_row({0.1, -0.0, std::numeric_limits<double>::denorm_min()});
    const auto back = io::parse_csv(io::to_csv(t));
    CHECK(back.columns == t.columns);
    CHECK(back.rows == t.rows);

    const auto path = std::filesystem::temp_directory_path() / "orca_io_test" / "sub" / "t.csv";
    io::write_csv(path, t);
    CHECK(io::read_csv(path).rows == t.rows);
    CHECK(back.column("y") == t.column(1));
}

TEST_CASE("csv errors") {
    io::Table t;
    t.columns = {"a", "b"};
    CHECK_THROWS_AS(t.add_row({1.0}), DomainError);
    CHECK_THROWS_AS(t.column_index("c"), ConfigError);
    CHECK_THROWS_AS(io::parse_csv("a,b\n1,2,3\n"), ConfigError);
    CHECK_THROWS_AS(io::parse_csv("a,b\n1,x\n"), ConfigError);
    CHECK_THROWS_AS(io::parse_csv(""), ConfigError);
    const auto ok = io::parse_csv("# note\na,b\n\n1,2\n# tail\n3,4\n");
    CHECK(ok.rows.size() == 2);
    CHECK(ok.column("b") == std::vector<double>{2.0, 4.0});
}

TEST_CASE("config hash") {
    CHECK(io::fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(io::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    const json a = config::to_json(config::from_json(json::object()));
    const auto h = io::config_hash(a);
    CHECK(h.size() == 16);
    CHECK(io::config_hash(a) == h);
    json b = a;
    b["atomic"]["field_mt"] = 170.0;
    CHECK(io::config_hash(b) != h);
    const auto p = io::provenance(a);
    CHECK(p["config_hash"] == h);
    CHECK(p["version"] == io::version());
}

}

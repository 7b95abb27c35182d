#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "wot/config.hpp"
#include "wot/csv.hpp"
#include "wot/error.hpp"
#include "wot/experiments.hpp"

using namespace wot;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "wot_unit" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("every experiment resolves with its defaults") {
    for (const auto& name : experiment_names()) {
      const ExperimentConfig cfg = resolve_config(name, Json::object());
      CHECK(cfg.experiment == name);
      CHECK(cfg.seed() == 1);
      CHECK(cfg.out_dir() == "out/" + name);
      CHECK_FALSE(cfg.reproducible());
    }
    CHECK(experiment_names().size() == 6);
    CHECK_THROWS_AS(experiment_defaults("nope"), ConfigError);
  }

  TEST_CASE("full-scale defaults") {
    const Json q = experiment_defaults("earthquake");
    CHECK(q["train"]["epochs"] == 10000);
    CHECK(q["train"]["batch"] == 100);
    CHECK(q["train"]["hidden"] == 4);
    CHECK(q["train"]["width"] == 20);
    CHECK(q["train"]["lr"] == 0.001);
    CHECK(q["train"]["window"] == 100);
    CHECK(q["cost"]["p"] == 2.0);
    const Json b = experiment_defaults("bull-spread");
    CHECK(b["payoff"]["k1"] == 0.9);
    CHECK(b["payoff"]["k2"] == 1.2);
    CHECK(b["cost"]["transform_t"] == 1.0 / 12);
  }

  TEST_CASE("key = value text") {
    const Json j = parse_config_text(
        "# comment line\n"
        "seed = 7\n"
        "cost.t = 1/12   # trailing comment\n"
        "payoff.type = max_call\n"
        "measure.spot = [1.0]\n"
        "reproducible = true\n");
    CHECK(j["seed"] == 7);
    CHECK(j["cost"]["t"].get<double>() == doctest::Approx(1.0 / 12));
    CHECK(j["payoff"]["type"] == "max_call");
    CHECK(j["measure"]["spot"][0] == 1.0);
    CHECK(j["reproducible"] == true);
    CHECK_THROWS_AS(parse_config_text("seed 7\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("a = 1\na = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("a..b = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("{ broken"), ConfigError);
  }

  TEST_CASE("json text") {
    const Json j = parse_config_text("  {\"seed\": 3, \"train\": {\"epochs\": 50}}");
    const ExperimentConfig cfg = resolve_config("earthquake", j);
    CHECK(cfg.seed() == 3);
    CHECK(cfg.values["train"]["epochs"] == 50);
    CHECK(cfg.values["train"]["window"] == 50);
  }

  TEST_CASE("unknown keys and type mismatches fail fast") {
    CHECK_THROWS_AS(resolve_config("earthquake", Json{{"bogus", 1}}), ConfigError);
    CHECK_THROWS_AS(resolve_config("earthquake", Json{{"train", {{"epochz", 1}}}}), ConfigError);
    CHECK_THROWS_AS(resolve_config("earthquake", Json{{"train", {{"epochs", "many"}}}}), ConfigError);
    CHECK_THROWS_AS(resolve_config("bull-spread", Json{{"payoff", {{"strike", 1.0}}}}), ConfigError);
    CHECK_THROWS_AS(resolve_config("bull-spread", Json{{"experiment", "max-call"}}), ConfigError);
    CHECK_THROWS_AS(resolve_config("bull-spread", Json{{"seed", -1}}), ConfigError);
    CHECK_THROWS_AS(resolve_config("bull-spread", Json{{"cost", {{"t_list", {0.5, 0.25}}}}}), ConfigError);
    CHECK_THROWS_AS(resolve_config("bull-spread", Json{{"method", "guess"}}), ConfigError);
    CHECK_THROWS_AS(resolve_config("max-call", Json{{"measure", {{"sigma", {{1.0}}}}}}), ConfigError);
    CHECK_THROWS_AS(resolve_config("earthquake", Json{{"measure", {{"cov", {{1.0, 2.0}, {2.0, 1.0}}}}}}),
                    ConfigError);
  }

  TEST_CASE("changing a payoff type replaces the section") {
    const ExperimentConfig cfg =
        resolve_config("bull-spread", Json{{"payoff", {{"type", "affine"}, {"slope", {1.0}}}}});
    CHECK_FALSE(cfg.values["payoff"].contains("k1"));
    const Payoff f = build_payoff(cfg.values["payoff"], 1);
    CHECK(f.eval(std::vector<double>{2.0}) == 2.0);
    CHECK_THROWS_AS(resolve_config("bull-spread", Json{{"payoff", {{"type", "affine"}, {"k1", 1.0}}}}),
                    ConfigError);
    const ExperimentConfig c2 = resolve_config("earthquake", Json{{"payoff", {{"type", "constant"}, {"value", 0.5}}}});
    CHECK(build_payoff(c2.values["payoff"], 2).dim() == 2);
  }

  TEST_CASE("command-line overrides") {
    RunOptions o;
    o.seed = 99;
    o.out = "/tmp/somewhere";
    o.reproducible = true;
    o.epochs = 20;
    const ExperimentConfig cfg = resolve_config("earthquake", Json::object(), o);
    CHECK(cfg.seed() == 99);
    CHECK(cfg.out_dir() == "/tmp/somewhere");
    CHECK(cfg.reproducible());
    CHECK(cfg.values["train"]["epochs"] == 20);
    CHECK(cfg.values["train"]["window"] == 20);
    RunOptions bad;
    bad.epochs = 5;
    CHECK_THROWS_AS(resolve_config("ctransform-grid", Json::object(), bad), ConfigError);
  }

  TEST_CASE("builders") {
    const auto mu = build_measure(Json{{"type", "dirac"}, {"point", {1.0, 2.0}}});
    CHECK(mu.dim() == 2);
    CHECK_THROWS_AS(build_measure(Json{{"type", "cauchy"}}), ConfigError);
    const CostSpec c = build_cost(Json{{"p", 3.0}, {"t", 0.25}});
    CHECK(c.cost(1.0) == doctest::Approx(2.0));
    CHECK_THROWS_AS(build_cost(Json{{"p", 0.2}}), ConfigError);
    const auto axes = build_axes(Json{{"axes", {{0.0, 1.0, 5}}}});
    REQUIRE(axes.size() == 1);
    CHECK(axes[0].count == 5);
    CHECK_THROWS_AS(build_axes(Json{{"axes", {{0.0, 1.0}}}}), ConfigError);
  }

  TEST_CASE("instruments from a list and from csv") {
    const fs::path dir = scratch("instruments");
    write_text(dir / "quotes.csv", "name,strike,bid,ask\nA,1.0,0.05,0.07\nB,1.1,0.02,0.03\n");
    Json spec = experiment_defaults("moment-bounds")["moments"];
    spec["instruments"] = Json::array({Json{{"name", "Z"}, {"strike", 0.9}, {"bid", 0.1}, {"ask", 0.12}}});
    spec["instruments_csv"] = (dir / "quotes.csv").string();
    const auto inst = build_instruments(spec, 1);
    REQUIRE(inst.size() == 3);
    CHECK(inst[0].name == "Z");
    CHECK(inst[1].name == "A");
    CHECK(inst[2].ask == 0.03);
    CHECK(inst[2].payoff.eval(std::vector<double>{1.5}) == doctest::Approx(0.4));
    write_text(dir / "bad.csv", "A,1.0,0.08,0.07\n");
    spec["instruments_csv"] = (dir / "bad.csv").string();
    CHECK_THROWS_AS(build_instruments(spec, 1), ConfigError);
    spec["instruments_csv"] = (dir / "missing.csv").string();
    CHECK_THROWS_AS(build_instruments(spec, 1), ConfigError);
  }

  TEST_CASE("config files") {
    const fs::path dir = scratch("files");
    write_text(dir / "c.conf", "seed = 5\ngrid.axes = [[0, 3, 7]]\n");
    const ExperimentConfig cfg = load_config("ctransform-grid", (dir / "c.conf").string());
    CHECK(cfg.seed() == 5);
    CHECK_THROWS_AS(load_config("ctransform-grid", (dir / "none.conf").string()), ConfigError);
  }
}

TEST_SUITE("csv") {
  TEST_CASE("number formatting round-trips") {
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1.0 / 3.0) == "0.3333333333333333");
    CHECK(format_number(-2.5e-10) == "-2.5e-10");
    for (double v : {1.0 / 7.0, 123456.789, -1e300, 5e-324}) CHECK(std::strtod(format_number(v).c_str(), nullptr) == v);
  }

  TEST_CASE("writers emit their headers") {
    const fs::path dir = scratch("csv");
    write_surface_csv((dir / "s.csv").string(), {{0.0, 1.0}, {0.5, 1.0}}, {0.1, 0.2}, {0.3, 0.4});
    const CsvTable s = read_csv((dir / "s.csv").string());
    CHECK(s.header == std::vector<std::string>{"x1", "x2", "f", "f_C"});
    REQUIRE(s.rows.size() == 2);
    CHECK(s.rows[1] == std::vector<std::string>{"0.5", "1", "0.2", "0.4"});

    write_training_csv((dir / "t.csv").string(), {1.0, 2.0}, {1.0, 1.5});
    const CsvTable t = read_csv((dir / "t.csv").string());
    CHECK(t.header == std::vector<std::string>{"epoch", "raw", "ma100"});
    CHECK(t.rows[0][0] == "1");
    CHECK(t.rows[1] == std::vector<std::string>{"2", "2", "1.5"});

    PriceBounds pb;
    pb.t = 0.25;
    write_bounds_csv((dir / "b.csv").string(), {pb});
    CHECK(read_csv((dir / "b.csv").string()).header ==
          std::vector<std::string>{"t", "lower", "lower_se", "reference", "reference_se", "upper", "upper_se"});

    write_dim_sweep_csv((dir / "d.csv").string(), {{2, "max_call", 0.3, 0.01, 1.5}});
    const CsvTable d = read_csv((dir / "d.csv").string());
    CHECK(d.header == std::vector<std::string>{"d", "option", "upper", "se", "wall_seconds"});
    CHECK(d.rows[0][1] == "max_call");

    CHECK_THROWS_AS(write_surface_csv("/nonexistent/dir/s.csv", {}, {}, {}), IoError);
    CHECK_THROWS_AS(read_csv((dir / "none.csv").string()), IoError);
  }
}

TEST_SUITE("experiments") {
  TEST_CASE("ctransform grid run writes a feasible surface") {
    const fs::path dir = scratch("grid");
    RunOptions o;
    o.out = dir.string();
    o.reproducible = true;
    const ExperimentConfig cfg = resolve_config("ctransform-grid", Json{{"grid", {{"axes", {{0.0, 3.0, 13}}}}}}, o);
    const RunResult res = run_experiment(cfg);
    CHECK(res.exit_code == 0);
    const CsvTable t = read_csv((dir / "surface.csv").string());
    CHECK(t.header == std::vector<std::string>{"x1", "f", "f_C"});
    REQUIRE(t.rows.size() == 13);
    for (const auto& row : t.rows) CHECK(std::stod(row[2]) >= std::stod(row[1]));
    CHECK(fs::exists(dir / "ctransform_grid.json"));
  }

  TEST_CASE("moment bounds run reports infeasible quotes") {
    const fs::path dir = scratch("moments");
    RunOptions o;
    o.out = dir.string();
    Json user = {{"moments",
                  {{"instruments", Json::array({Json{{"strike", 0.8}, {"bid", 0.05}, {"ask", 0.1}}})},
                   {"starts", 2},
                   {"iterations_per_stage", 200}}}};
    const RunResult res = run_experiment(resolve_config("moment-bounds", user, o));
    CHECK(res.exit_code == 4);
    CHECK(res.summary["status"] == "infeasible");
  }

  TEST_CASE("equicorrelated diffusion") {
    const auto mu = equicorrelated_diffusion(3, 1.0, 0.2, 0.5, 1.0);
    const auto& d = std::get<DiffusionMeasure>(mu.variant());
    const Eigen::MatrixXd cov = d.sigma * d.sigma.transpose();
    CHECK(cov(0, 0) == doctest::Approx(0.04));
    CHECK(cov(0, 2) == doctest::Approx(0.02));
    CHECK(d.x0 == Eigen::VectorXd::Ones(3));
  }
}

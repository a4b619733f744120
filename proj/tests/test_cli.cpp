#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "contractionkit/commands.hpp"
#include "contractionkit/runconfig.hpp"
#include "support.hpp"

#include <nlohmann/json.hpp>

#include <string>

using namespace contractionkit;
using testsupport::make_temp_dir;
using testsupport::read_file;
using testsupport::run_cli;
using testsupport::write_file;

namespace {

const char* kCertifyPass = R"({
  "system": {"label": "example1"},
  "weight": {"kind": "example1_claim", "q": 1.5},
  "diffusion": {"d": [1, 1]},
  "sweep": {"counts": [60, 60], "windows": [[0, 10], [0, 1]], "seed": 1}
})";

const char* kCertifyDiagonal = R"({
  "system": {"label": "example1"},
  "weight": {"kind": "diagonal", "diag": [1, 2]},
  "diffusion": {"d": [1, 1]},
  "sweep": {"counts": [100, 100], "windows": [[0, 10], [0, 1]], "seed": 1}
})";

const char* kCounterexample = R"({
  "system": {"label": "example2"},
  "sweep": {"counts": [80, 400], "windows": [[0, 50], [0, 50]], "seed": 1},
  "counterexample": {"lambda": 1.0, "mu": 0.25, "p_seed": 3}
})";

const char* kCounterexampleLinear = R"({
  "system": {"label": "linear", "matrix": [[-1, 0], [0, -1]]},
  "sweep": {"counts": [10, 200], "seed": 1},
  "counterexample": {"lambda": 1.0, "mu": 0.25, "p_matrix": [[1, 0], [0, 1]]}
})";

const char* kCounterexampleWeakRate = R"({
  "system": {"label": "example2", "params": {"delta": 0.99}},
  "sweep": {"counts": [80, 400], "windows": [[0, 50], [0, 50]], "seed": 1},
  "counterexample": {"lambda": 1.0, "mu": 0.5, "p_seed": 3}
})";

const char* kSimulateTemplate = R"({
  "system": {"label": "example1"},
  "weight": {"kind": "example1_claim", "q": 1.5},
  "diffusion": {"d": [1, 1]},
  "topology": {"kind": "neumann1d", "nodes": 8, "length": 1.0},
  "sweep": {"counts": [50, 50], "windows": [[0, 10], [0, 1]], "seed": 1},
  "sim": {
    "t_end": 0.5, "dt": 0.002, "output_stride": 25, "seed": 7,
    "initial": {"kind": "random_window", "window": [[0.2, 2.0], [0.1, 0.9]]},
    "lipschitz_hint": 5.0%EXTRA%
  }
})";

const char* kSweepGrid = R"({
  "system": {"label": "example1"},
  "weight": {"kind": "example1_claim", "q": 1.5},
  "diffusion": {"d": [1, 1]},
  "sweep": {"counts": [100, 100], "windows": [[0, 10], [0, 1]], "seed": 1},
  "sweep_grid": {"axes": [{"param": "weight.q", "values": [1.05, 1.15, 1.2, 1.3, 1.5]}]}
})";

std::string simulate_config(const std::string& extra) {
    std::string text = kSimulateTemplate;
    const std::string token = "%EXTRA%";
    text.replace(text.find(token), token.size(), extra);
    return text;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        const std::size_t end = text.find('\n', start);
        if (end == std::string::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

}  // namespace

TEST_CASE("config diagnostics name the offending field or line") {
    CHECK_THROWS_WITH_AS(parse_run_config("{ not json", "."),
                         doctest::Contains("line 1"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_run_config("{}", "."),
                         doctest::Contains("config.system"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_run_config(R"({"system": {"label": "example1"}, "sim": {"t_end": "x"}})", "."),
        doctest::Contains("sim.t_end"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_run_config(R"({"system": {"label": "unknown_system"}})", "."),
        doctest::Contains("system.label"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_run_config(
            R"({"system": {"label": "example1"},
                "topology": {"kind": "graph", "adjacency_file": "missing_adjacency.json"}})",
            "."),
        doctest::Contains("adjacency_file"), ConfigError);
}

TEST_CASE("weight builders") {
    WeightConfig claim;
    claim.kind = WeightConfig::Kind::example1_q;
    claim.q = 1.5;
    const Weight w = build_weight(claim);
    CHECK(w.q()(1, 1) == doctest::Approx(1.5));

    WeightConfig margin;
    margin.kind = WeightConfig::Kind::example1_margin;
    margin.delta = 1.0;
    margin.k1 = 1.0;
    margin.margin = 0.25;
    CHECK(build_weight(margin).q()(1, 1) == doctest::Approx(1.5));

    WeightConfig diag;
    diag.kind = WeightConfig::Kind::diagonal;
    diag.diag = Vector::Ones(2);
    CHECK(build_diag_weight(diag).diag()(0) == doctest::Approx(1.0));

    WeightConfig full;
    full.kind = WeightConfig::Kind::explicit_q;
    full.q_matrix = Matrix::Identity(2, 2);
    CHECK_THROWS_AS(build_diag_weight(full), ConfigError);
}

#ifdef CONTRACTIONKIT_CLI_PATH

TEST_CASE("cli: certify exit codes and certificate document") {
    const auto dir = make_temp_dir("certify");
    write_file(dir / "pass.json", kCertifyPass);
    write_file(dir / "diag.json", kCertifyDiagonal);

    CHECK(run_cli("certify --config " + (dir / "pass.json").string() + " --out " +
                  (dir / "out_pass").string()) == 0);
    const auto doc = nlohmann::json::parse(read_file(dir / "out_pass" / "certificate.json"));
    CHECK(doc["verdict"] == "pass");
    CHECK(doc["mu_sup"].get<double>() < 0.0);

    CHECK(run_cli("certify --config " + (dir / "diag.json").string() + " --out " +
                  (dir / "out_diag").string()) == 2);
    const auto failed = nlohmann::json::parse(read_file(dir / "out_diag" / "certificate.json"));
    CHECK(failed["verdict"] == "fail");
    CHECK(failed["mu_sup"].get<double>() >= 0.0);
}

TEST_CASE("cli: config errors exit 1") {
    const auto dir = make_temp_dir("badconfig");
    write_file(dir / "syntax.json", "{ nope");
    CHECK(run_cli("certify --config " + (dir / "syntax.json").string()) == 1);

    write_file(dir / "missing_adjacency.json", R"({
      "system": {"label": "example1"},
      "weight": {"kind": "example1_claim", "q": 1.5},
      "topology": {"kind": "graph", "adjacency_file": "nowhere.json"},
      "sweep": {"counts": [10, 10], "windows": [[0, 10], [0, 1]]}
    })");
    CHECK(run_cli("certify --config " + (dir / "missing_adjacency.json").string()) == 1);

    CHECK(run_cli("certify --config " + (dir / "does_not_exist.json").string()) == 1);
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("certify") == 1);  // missing --config
}

TEST_CASE("cli: counterexample reproduces the measure-comparison pattern") {
    const auto dir = make_temp_dir("counterexample");
    write_file(dir / "repro.json", kCounterexample);
    CHECK(run_cli("counterexample --config " + (dir / "repro.json").string() + " --out " +
                  (dir / "out").string()) == 0);
    const auto witness = nlohmann::json::parse(read_file(dir / "out" / "witness.json"));
    CHECK(witness["verdict"] == "reproduced");
    CHECK(witness["conditions"]["condition1"]["pass"].get<bool>());
    CHECK(witness["indefinite_point"]["y"].get<double>() <= 1e4);

    write_file(dir / "linear.json", kCounterexampleLinear);
    CHECK(run_cli("counterexample --config " + (dir / "linear.json").string() + " --out " +
                  (dir / "out_linear").string()) == 2);
    const auto none = nlohmann::json::parse(read_file(dir / "out_linear" / "witness.json"));
    CHECK(none["indefinite_point"].is_null());

    write_file(dir / "weak.json", kCounterexampleWeakRate);
    CHECK(run_cli("counterexample --config " + (dir / "weak.json").string() + " --out " +
                  (dir / "out_weak").string()) == 2);
    const auto weak = nlohmann::json::parse(read_file(dir / "out_weak" / "witness.json"));
    CHECK_FALSE(weak["conditions"]["condition1"]["pass"].get<bool>());
    CHECK(weak["conditions"]["condition1"]["worst_margin"].get<double>() ==
          doctest::Approx(-0.01));
}

TEST_CASE("cli: simulate verdicts and the stability gate") {
    const auto dir = make_temp_dir("simulate");
    write_file(dir / "ok.json", simulate_config(""));
    CHECK(run_cli("simulate --config " + (dir / "ok.json").string() + " --out " +
                  (dir / "out_ok").string()) == 0);
    const std::string csv = read_file(dir / "out_ok" / "trajectory.csv");
    CHECK(csv.rfind("t,norm,phi,clamps\n", 0) == 0);

    // A deliberately too-strong rate must be reported as a violation.
    write_file(dir / "wrong_mu.json", simulate_config(", \"mu_override\": -10.0"));
    CHECK(run_cli("simulate --config " + (dir / "wrong_mu.json").string() + " --out " +
                  (dir / "out_wrong").string()) == 2);

    // dt above the stability gate is a usage error, caught before integration.
    std::string too_fast = simulate_config("");
    const std::string needle = "\"dt\": 0.002";
    too_fast.replace(too_fast.find(needle), needle.size(), "\"dt\": 1.0");
    write_file(dir / "fast.json", too_fast);
    CHECK(run_cli("simulate --config " + (dir / "fast.json").string() + " --out " +
                  (dir / "out_fast").string()) == 1);
}

TEST_CASE("cli: simulate output is byte-identical across reruns") {
    const auto dir = make_temp_dir("determinism");
    write_file(dir / "run.json", simulate_config(""));
    CHECK(run_cli("simulate --config " + (dir / "run.json").string() + " --out " +
                  (dir / "a").string()) == 0);
    CHECK(run_cli("simulate --config " + (dir / "run.json").string() + " --out " +
                  (dir / "b").string()) == 0);
    const std::string a = read_file(dir / "a" / "trajectory.csv");
    const std::string b = read_file(dir / "b" / "trajectory.csv");
    REQUIRE_FALSE(a.empty());
    CHECK(a == b);
}

TEST_CASE("cli: sweep grid reproduces the threshold flip") {
    const auto dir = make_temp_dir("sweep");
    write_file(dir / "grid.json", kSweepGrid);
    CHECK(run_cli("sweep --config " + (dir / "grid.json").string() + " --out " +
                  (dir / "out").string() + " --jobs 2") == 0);
    const std::string csv = read_file(dir / "out" / "sweep.csv");
    const std::vector<std::string> lines = split_lines(csv);
    REQUIRE(lines.size() >= 6);
    CHECK(lines[0] == "index,weight.q,mu_sup,diffusion_ok,diffusion_lambda_min,verdict");
    const std::vector<std::string> expected = {"fail", "fail", "fail", "pass", "pass"};
    for (std::size_t row = 0; row < expected.size(); ++row) {
        CHECK(lines[row + 1].substr(lines[row + 1].rfind(',') + 1) == expected[row]);
    }

    write_file(dir / "empty.json", R"({
      "system": {"label": "example1"},
      "weight": {"kind": "example1_claim", "q": 1.5},
      "sweep": {"counts": [10, 10], "windows": [[0, 10], [0, 1]]},
      "sweep_grid": {"axes": []}
    })");
    CHECK(run_cli("sweep --config " + (dir / "empty.json").string()) == 1);
}

#endif  // CONTRACTIONKIT_CLI_PATH

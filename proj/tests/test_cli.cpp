#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "hedgehog/plots.hpp"

namespace {

// the build puts the binary next to the test executables
const char* kBin = "./hedgehog";

struct CmdResult {
    int rc = -1;
    std::string out;
};

CmdResult run_cmd(const std::string& args) {
    const std::string cmd = std::string(kBin) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return {};
    CmdResult res;
    char buf[4096];
    while (std::fgets(buf, sizeof(buf), p)) res.out += buf;
    const int status = pclose(p);
    res.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("binary is present") {
    std::ifstream bin(kBin);
    REQUIRE_MESSAGE(bin.good(), "expected ", kBin,
                    " next to the test executable; run from the build tree");
}

TEST_CASE("thresholds prints the table and mirrors it as json") {
    const CmdResult r = run_cmd("thresholds --json cli_thr.json");
    CHECK(r.rc == 0);
    CHECK(r.out.find("tau_2") != std::string::npos);
    CHECK(r.out.find("989") != std::string::npos);
    CHECK(r.out.find("note:") != std::string::npos);

    const nlohmann::json doc = load_json("cli_thr.json");
    const auto& rows = doc["thresholds"];
    REQUIRE(rows.size() == 5);
    const double pi = std::numbers::pi;
    CHECK(rows[0]["value"].get<double>() ==
          doctest::Approx(std::exp(4.0 * pi * pi / 23.0)).epsilon(1e-14));
    CHECK(rows[1]["value"].get<double>() ==
          doctest::Approx(std::exp(2.0 * pi / std::sqrt(23.0))).epsilon(1e-14));
    CHECK(rows[2]["value"].get<double>() ==
          doctest::Approx(1.0 + pi / std::sqrt(6.0)).epsilon(1e-14));
    CHECK(rows[3]["value"].get<double>() ==
          doctest::Approx(2.2004201660045393).epsilon(1e-10));
    CHECK(rows[4]["value"] == 989);
    CHECK(rows[4]["exact"] == true);
    CHECK(doc["note"].is_string());
    std::remove("cli_thr.json");
}

TEST_CASE("solve writes profile csv with summary and validates flags") {
    const CmdResult ok =
        run_cmd("solve --R 1.5 --t 5 --nr 257 --out cli_prof.csv");
    CHECK(ok.rc == 0);
    const std::string csv = slurp("cli_prof.csv");
    CHECK(csv.rfind("r,h,dh,eta,bound_sqrt\n", 0) == 0);

    const nlohmann::json doc = load_json("cli_prof.json");
    CHECK(doc["command"] == "solve");
    CHECK(doc["config"]["R"] == 1.5);
    CHECK(doc["config"]["nr"] == 257);
    CHECK(doc["min_h"].get<double>() > 0.6);
    CHECK(doc["min_h"].get<double>() < 1.0);
    CHECK(doc["bounds"]["ok"] == true);
    CHECK(doc["residual"].get<double>() < 1e-11);

    CHECK(run_cmd("solve --R 0.9").rc == 2);
    CHECK(run_cmd("solve --t -1").rc == 2);
    CHECK(run_cmd("solve --no-such-flag 1").rc == 2);
    CHECK(run_cmd("bogus-subcommand").rc == 2);
    std::remove("cli_prof.csv");
    std::remove("cli_prof.json");
}

TEST_CASE("config file fills defaults and flags override it") {
    spit("cli_solve.cfg", "R=2.0\nt=1\n# narrow grid for the test\nnr=129\n");
    const CmdResult a =
        run_cmd("solve --config cli_solve.cfg --out cli_cfg.csv");
    CHECK(a.rc == 0);
    const nlohmann::json da = load_json("cli_cfg.json");
    CHECK(da["config"]["R"] == 2.0);
    CHECK(da["config"]["t"] == 1.0);
    CHECK(da["config"]["nr"] == 129);

    const CmdResult b =
        run_cmd("solve --config cli_solve.cfg --R 1.3 --out cli_cfg.csv");
    CHECK(b.rc == 0);
    CHECK(load_json("cli_cfg.json")["config"]["R"] == 1.3);

    spit("cli_bad.cfg", "not_an_option=3\n");
    CHECK(run_cmd("solve --config cli_bad.cfg").rc == 2);
    CHECK(run_cmd("solve --config cli_missing.cfg").rc == 2);
    spit("cli_noeq.cfg", "just words\n");
    CHECK(run_cmd("solve --config cli_noeq.cfg").rc == 2);

    std::remove("cli_solve.cfg");
    std::remove("cli_bad.cfg");
    std::remove("cli_noeq.cfg");
    std::remove("cli_cfg.csv");
    std::remove("cli_cfg.json");
}

TEST_CASE("spectrum reports a stable verdict at the narrow shell") {
    const CmdResult r = run_cmd(
        "spectrum --R 1.5 --t 0 --mode-nodes 401 --full-nr 12 "
        "--full-ntheta 6 --full-nphi 12 --out cli_stab.csv");
    CHECK(r.rc == 0);
    CHECK(r.out.find("stable") != std::string::npos);

    const std::string csv = slurp("cli_stab.csv");
    CHECK(csv.rfind("R,t,lambda_min_i0,", 0) == 0);
    CHECK(csv.find(",stable\n") != std::string::npos);

    const nlohmann::json doc = load_json("cli_stab.json");
    CHECK(doc["command"] == "spectrum");
    REQUIRE(doc["rows"].size() == 1);
    const auto& row = doc["rows"][0];
    const double lr = std::log(1.5);
    const double pi = std::numbers::pi;
    CHECK(row["hardy_corrected"].get<double>() ==
          doctest::Approx(pi * pi / (lr * lr) + 0.25).epsilon(1e-14));
    CHECK(row["hardy_printed"].get<double>() ==
          doctest::Approx(pi * pi / lr + 0.25).epsilon(1e-14));
    CHECK(row["verdict"] == "stable");
    CHECK(doc["hardy_note"].is_string());
    std::remove("cli_stab.csv");
    std::remove("cli_stab.json");
}

TEST_CASE("spectrum sweeps feed the verdict map") {
    const CmdResult r = run_cmd(
        "spectrum --R-min 1.3 --R-max 2.0 --R-steps 3 --t-min 0 --t-max 50 "
        "--t-steps 2 --no-full --mode-nodes 301 --out cli_sweep.csv");
    CHECK(r.rc == 0);

    const std::string csv = slurp("cli_sweep.csv");
    std::size_t lines = 0;
    for (char c : csv)
        if (c == '\n') ++lines;
    CHECK(lines == 7);  // header + 3 x 2 rows

    // skipped 3D eigensolve shows up as null in the json twin
    const nlohmann::json doc = load_json("cli_sweep.json");
    CHECK(doc["rows"].size() == 6);
    CHECK(doc["rows"][0]["full_dsq_min"].is_null());

    const CmdResult map =
        run_cmd("plot --kind map --in cli_sweep.csv --ascii --out cli_map.txt");
    CHECK(map.rc == 0);
    const std::string art = slurp("cli_map.txt");
    CHECK(art.find('#') != std::string::npos);
    CHECK(art.find("R: 1.3 .. 2") != std::string::npos);

    CHECK(run_cmd("spectrum --R-min 0.9 --R-max 2 --R-steps 3").rc == 2);
    CHECK(run_cmd("spectrum --R-min 2 --R-max 1.5 --R-steps 3").rc == 2);
    CHECK(run_cmd("plot --kind map --in cli_nosuch.csv").rc == 2);

    std::remove("cli_sweep.csv");
    std::remove("cli_sweep.json");
    std::remove("cli_map.txt");
}

TEST_CASE("verify-lemmas passes and reports exact certificates") {
    const CmdResult r =
        run_cmd("verify-lemmas --samples 20000 --seed 3 --out cli_lem.json");
    CHECK(r.rc == 0);
    CHECK(r.out.find("pass") != std::string::npos);
    CHECK(r.out.find("FAIL") == std::string::npos);

    const nlohmann::json doc = load_json("cli_lem.json");
    CHECK(doc["all_pass"] == true);
    CHECK(doc["lemmas"].size() >= 10);
    CHECK(doc["exact"]["y2_at_h1_matches"] == true);
    CHECK(doc["exact"]["x_branch_disc_all_negative"] == true);
    CHECK(doc["exact"]["g_zero_at_minus1_and_0"] == true);
    CHECK(doc["config"]["samples"] == 20000);
    CHECK(run_cmd("verify-lemmas --samples 0").rc == 2);
    std::remove("cli_lem.json");
}

TEST_CASE("minimize reports converged runs and repeats byte for byte") {
    const std::string flags =
        "minimize --R 1.5 --t 5 --runs 2 --seed 11 --nr 12 --ntheta 6 "
        "--nphi 12 --out cli_min.json";
    const CmdResult a = run_cmd(flags);
    CHECK(a.rc == 0);
    const std::string first = slurp("cli_min.json");
    const CmdResult b = run_cmd(flags);
    CHECK(b.rc == 0);
    CHECK(first == slurp("cli_min.json"));

    const nlohmann::json doc = nlohmann::json::parse(first);
    CHECK(doc["summary"]["all_converged"] == true);
    CHECK(doc["summary"]["max_gap"].get<double>() < 1e-4);
    CHECK(doc["runs"].size() == 2);
    CHECK(doc["runs"][0]["seed"] == 11);
    CHECK(doc["runs"][1]["seed"] == 12);

    CHECK(run_cmd("minimize --runs 0").rc == 2);
    CHECK(run_cmd("minimize --R 1.5 --nr 2 --runs 1").rc == 2);
    std::remove("cli_min.json");
}

TEST_CASE("plot emits the envelope curve with its two zeros marked") {
    const CmdResult svg =
        run_cmd("plot --kind G --eps-max 3 --out cli_g.svg");
    CHECK(svg.rc == 0);
    const std::string body = slurp("cli_g.svg");
    CHECK(body.find("<svg") == 0);
    CHECK(body.find("polyline") != std::string::npos);
    std::size_t circles = 0;
    for (std::size_t at = body.find("<circle"); at != std::string::npos;
         at = body.find("<circle", at + 1))
        ++circles;
    CHECK(circles == 2);

    const CmdResult ascii = run_cmd("plot --kind G --ascii");
    CHECK(ascii.rc == 0);
    CHECK(ascii.out.find("G(eps)") != std::string::npos);

    CHECK(run_cmd("plot --kind nope").rc == 2);
    CHECK(run_cmd("plot").rc == 2);
    CHECK(run_cmd("plot --kind G --eps-max -2").rc == 2);
    std::remove("cli_g.svg");
}

TEST_CASE("plot overlays the profile with its comparison curve") {
    const CmdResult r = run_cmd(
        "plot --kind profile --R 1.5 --t 5 --nr 257 --out cli_ph.svg");
    CHECK(r.rc == 0);
    const std::string body = slurp("cli_ph.svg");
    CHECK(body.find("h(r)") != std::string::npos);
    CHECK(body.find("eta(r)") != std::string::npos);
    std::remove("cli_ph.svg");
}

TEST_CASE("chart helpers reject malformed input") {
    using namespace hedgehog::plots;
    Series bad;
    bad.name = "bad";
    bad.x = {0.0, 1.0};
    bad.y = {0.0};
    CHECK_THROWS_AS(svg_chart({bad}, ChartOptions{}), std::invalid_argument);
    CHECK_THROWS_AS(ascii_chart({bad}), std::invalid_argument);
    CHECK_THROWS_AS(svg_map({}, ChartOptions{}), std::invalid_argument);
    CHECK_THROWS_AS(ascii_map({}), std::invalid_argument);

    const std::vector<MapCell> one = {{1.5, 0.0, true}};
    const std::string svg = svg_map(one, ChartOptions{});
    CHECK(svg.find("#2e8b57") != std::string::npos);
    const std::vector<MapCell> two = {{1.5, 0.0, true}, {2.5, 0.0, false}};
    const std::string art = ascii_map(two);
    CHECK(art.find('#') != std::string::npos);
    CHECK(art.find('.') != std::string::npos);
}

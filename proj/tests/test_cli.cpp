#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kornlab/experiments.hpp"

#include <filesystem>
#include <fstream>

using namespace kornlab;
namespace fs = std::filesystem;

namespace {

std::string fresh_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("kornlab_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

} // namespace

TEST_CASE("catalog lists the six experiments") {
    const auto& cat = experiment_catalog();
    REQUIRE(cat.size() == 6);
    std::vector<std::string> names;
    for (const auto& e : cat) names.push_back(e.name);
    for (const char* want : {"ansatz_sweep", "korn2_scaling", "lemma2d_suite", "lemma44_sweep",
                             "subdivision", "extension"})
        CHECK(std::find(names.begin(), names.end(), want) != names.end());
}

TEST_CASE("config validation reports field paths") {
    nlohmann::json j;
    j["experiment"] = "ansatz_sweep";
    j["p"] = 1.0;
    CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("p must lie in (1, ∞)"),
                         usage_error);

    j["p"] = 2.0;
    j["experiment"] = "frobnicate";
    CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("experiment"), usage_error);

    j["experiment"] = "ansatz_sweep";
    j["h_ladder"] = {0.01, 0.05};
    CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("h_ladder"), usage_error);

    j["h_ladder"] = {0.5, 0.1}; // exceeds h_max on the default... plate has none; use cylinder
    j["surface"] = {{"kind", "cylinder"}, {"params", {{"R", 1.0}, {"length", 1.0}}}};
    CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("h_max"), usage_error);

    nlohmann::json missing;
    CHECK_THROWS_WITH_AS(config_from_json(missing), doctest::Contains("experiment"), usage_error);
}

TEST_CASE("config round-trips through JSON") {
    nlohmann::json j;
    j["experiment"] = "lemma44_sweep";
    j["seed"] = 99;
    j["p"] = 2.5;
    const ExperimentConfig cfg = config_from_json(j);
    const nlohmann::json echo = config_to_json(cfg);
    CHECK(echo["experiment"] == "lemma44_sweep");
    CHECK(echo["seed"] == 99);
    CHECK(echo["p"] == 2.5);
    CHECK(config_from_json(echo).seed == 99);
}

TEST_CASE("reruns with the same config and seed are byte-identical") {
    nlohmann::json j;
    j["experiment"] = "lemma44_sweep";
    j["seed"] = 7;

    ExperimentConfig a = config_from_json(j);
    a.out_dir = fresh_dir("det_a");
    ExperimentConfig b = config_from_json(j);
    b.out_dir = fresh_dir("det_b");

    const RunReport ra = run(a);
    const RunReport rb = run(b);
    CHECK(ra.all_pass());
    CHECK(rb.all_pass());
    CHECK(slurp(a.out_dir + "/lemma44_sweep_results.csv") ==
          slurp(b.out_dir + "/lemma44_sweep_results.csv"));

    // A different seed must change the random cases.
    ExperimentConfig c = config_from_json(j);
    c.seed = 8;
    c.out_dir = fresh_dir("det_c");
    run(c);
    CHECK(slurp(a.out_dir + "/lemma44_sweep_results.csv") !=
          slurp(c.out_dir + "/lemma44_sweep_results.csv"));
}

TEST_CASE("thread count does not change the output bytes") {
    nlohmann::json j;
    j["experiment"] = "lemma44_sweep";
    j["seed"] = 13;
    ExperimentConfig a = config_from_json(j);
    a.out_dir = fresh_dir("thr_1");
    a.threads = 1;
    ExperimentConfig b = config_from_json(j);
    b.out_dir = fresh_dir("thr_4");
    b.threads = 4;
    run(a);
    run(b);
    CHECK(slurp(a.out_dir + "/lemma44_sweep_results.csv") ==
          slurp(b.out_dir + "/lemma44_sweep_results.csv"));
}

TEST_CASE("CSV output is RFC-4180 shaped") {
    nlohmann::json j;
    j["experiment"] = "extension";
    j["seed"] = 4;
    ExperimentConfig cfg = config_from_json(j);
    cfg.out_dir = fresh_dir("csv");
    run(cfg);
    const std::string text = slurp(cfg.out_dir + "/extension_results.csv");
    CHECK(text.find("\r\n") != std::string::npos);
    CHECK(text.rfind("seed,case,lambda,p,lhs,rhs,c_obs\r\n", 0) == 0);
    // every data row echoes the seed
    std::size_t rows = 0, pos = 0;
    while ((pos = text.find("\r\n4,", pos)) != std::string::npos) {
        ++rows;
        ++pos;
    }
    CHECK(rows >= 4);
}

TEST_CASE("run writes a report with the config echo and assertions") {
    nlohmann::json j;
    j["experiment"] = "extension";
    j["seed"] = 21;
    ExperimentConfig cfg = config_from_json(j);
    cfg.out_dir = fresh_dir("report");
    const RunReport rep = run(cfg);
    CHECK(rep.all_pass());
    CHECK(!rep.assertions.empty());
    for (const auto& a : rep.assertions) CHECK(!a.detail.empty());

    const nlohmann::json parsed = nlohmann::json::parse(slurp(cfg.out_dir + "/report.json"));
    CHECK(parsed["config"]["experiment"] == "extension");
    CHECK(parsed["seed"] == 21);
    CHECK(parsed["all_pass"] == true);
    CHECK(parsed["assertions"].is_array());
}

TEST_CASE("plot data needs scaling samples") {
    RunReport empty;
    CHECK_THROWS_AS(emit_plotdata(empty, "/tmp"), usage_error);
}

TEST_CASE("plot data for an exact power law passes through the points") {
    RunReport rep;
    rep.config.experiment = "korn2_scaling";
    rep.config.seed = 5;
    for (Real h : {0.1, 0.05, 0.025, 0.0125}) rep.scaling_samples.emplace_back(h, 5.0 / h);
    rep.fit = fit_scaling(rep.scaling_samples);
    rep.has_fit = true;
    CHECK(rep.fit.residual <= 1e-12);
    for (const auto& [h, C] : rep.scaling_samples)
        CHECK(std::log(C) ==
              doctest::Approx(std::log(rep.fit.c) - rep.fit.alpha * std::log(h)).epsilon(1e-12));

    const std::string dir = fresh_dir("plot");
    emit_plotdata(rep, dir);
    CHECK(fs::exists(dir + "/plot_points.csv"));
    CHECK(fs::exists(dir + "/plot_fit.csv"));
    const std::string svg = slurp(dir + "/scaling.svg");
    CHECK(std::count(svg.begin(), svg.end(), '\n') > 4);
    std::size_t circles = 0, pos = 0;
    while ((pos = svg.find("<circle", pos)) != std::string::npos) {
        ++circles;
        ++pos;
    }
    CHECK(circles == 4);
    CHECK(svg.find("<line") != std::string::npos);
}

TEST_CASE("ansatz field dump is written when requested") {
    nlohmann::json j;
    j["experiment"] = "ansatz_sweep";
    j["seed"] = 2;
    j["h_ladder"] = {0.05, 0.025};
    ExperimentConfig cfg = config_from_json(j);
    cfg.out_dir = fresh_dir("dump");
    cfg.dump_fields = true;
    run(cfg);
    const std::string text = slurp(cfg.out_dir + "/field_dump.csv");
    CHECK(text.rfind("seed,t,theta,z,g11,", 0) == 0);
}

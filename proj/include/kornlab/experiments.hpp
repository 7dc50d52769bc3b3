#pragma once

#include "kornlab/geometry.hpp"
#include "kornlab/korn_constants.hpp"
#include "kornlab/quadrature.hpp"
#include "kornlab/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace kornlab {

struct ExperimentInfo {
    std::string name, description;
};
const std::vector<ExperimentInfo>& experiment_catalog();

struct ExperimentConfig {
    std::string experiment;

    SurfaceKind surface_kind = SurfaceKind::plate;
    SurfaceParams surface_params{{"Lx", 1.0}, {"Ly", 1.0}};
    ThicknessProfile profile = ThicknessProfile::constant;
    Real c1 = 2.0, c2 = 1.0;

    Real p = 2.0;
    std::vector<Real> h_ladder; // empty -> per-experiment default

    GridResolution resolution{};
    int n_s = 16, n_y = 256; // planar solver grid

    std::uint64_t seed = 0;
    std::string out_dir = "kornlab-out";
    int threads = 1;
    Real resolution_scale = 1.0;
    bool dump_fields = false;
};

/// Parses and validates; throws usage_error naming the offending field.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);

struct Assertion {
    std::string name;
    bool pass = false;
    Real lhs = 0, rhs = 0; // the two sides of the checked inequality
    std::string detail;
};

struct RunReport {
    ExperimentConfig config;
    std::vector<Assertion> assertions;
    nlohmann::json cases = nlohmann::json::array();
    std::vector<std::pair<Real, Real>> scaling_samples; // (h, C) when the run produces them
    ScalingFit fit;
    bool has_fit = false;
    Real wall_time_s = 0;
    std::vector<std::string> output_files;

    bool all_pass() const;
    nlohmann::json to_json() const;
};

/// Runs the configured experiment, writes its CSV results and report.json
/// under config.out_dir, and returns the in-memory report.
RunReport run(const ExperimentConfig& cfg);

/// Writes (log h, log C) scatter points, fitted-line samples and an SVG
/// rendering for a report that carries scaling samples.
void emit_plotdata(const RunReport& report, const std::string& out_dir);

} // namespace kornlab

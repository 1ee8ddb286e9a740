#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sampsize/classify.hpp"
#include "sampsize/validate.hpp"

namespace sampsize {

// Learning-curve study on a synthetic simplex problem. Read from a config
// file or from the JSON manifest an earlier run wrote.
struct ScenarioConfig {
    std::uint64_t seed = 1;
    unsigned threads = 1;

    // [problem]
    int classes = 5;
    int dim = 20;
    double separation = 2.0;
    bool shared_cov = true;
    std::vector<std::string> labels;  // empty: c1..cK

    // [curve]
    std::vector<std::size_t> sizes;
    std::vector<CurveView> views{CurveView::population, CurveView::growing_truth, CurveView::growing_cv};
    int n_datasets = 100;
    std::size_t large_test_per_class = 2000;
    std::size_t pool_per_class = 0;  // retrospective pool; 0: four times the largest size

    // [cv]
    int folds = 5;
    int iterations = 100;
    bool stratified = true;

    // [model]
    ModelConfig model;

    // [output]
    std::string csv;
    std::string manifest;
    int precision = 4;

    // Fills defaults (labels, pool size) and checks ranges.
    void resolve();
    // Covers every field that changes results; threads and output paths excluded.
    std::uint64_t hash() const;
};

CurveView parse_curve_view(std::string_view name);

ScenarioConfig parse_scenario(std::istream& in);
ScenarioConfig load_scenario_file(const std::filesystem::path& path);

std::string manifest_json(const ScenarioConfig& config, double elapsed_seconds);
ScenarioConfig parse_manifest(std::istream& in);
// Dispatches on content: a leading '{' means manifest.
ScenarioConfig load_scenario_or_manifest(const std::filesystem::path& path);

struct ScenarioResult {
    std::vector<LearningCurve> curves;
    double elapsed_seconds = 0.0;
};

ScenarioResult run_scenario(const ScenarioConfig& config);

void write_scenario_csv(std::ostream& out, const ScenarioConfig& config, const ScenarioResult& result);

}  // namespace sampsize

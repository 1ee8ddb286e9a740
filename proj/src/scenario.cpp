#include "sampsize/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <limits>
#include <optional>
#include <chrono>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "sampsize/config.hpp"
#include "sampsize/dataset.hpp"
#include "sampsize/error.hpp"
#include "sampsize/simgen.hpp"

namespace sampsize {

namespace {

using nlohmann::json;

std::size_t to_size(std::int64_t v, const char* name) {
    if (v < 1) throw ConfigError(std::string(name) + " must be positive", 0);
    return static_cast<std::size_t>(v);
}

int to_int(std::int64_t v, const char* name) {
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw ConfigError(std::string(name) + " out of range", 0);
    }
    return static_cast<int>(v);
}

PriorMode parse_priors(std::string_view name) {
    if (name == "equal") return PriorMode::equal;
    if (name == "empirical") return PriorMode::empirical;
    throw DomainError("unknown priors '" + std::string(name) + "' (expected equal or empirical)");
}

std::string_view to_string(PriorMode p) { return p == PriorMode::equal ? "equal" : "empirical"; }

// Line-aware wrapper: errors from value checks point at the key's line.
template <typename Fn>
auto keyed(const ConfigDocument& doc, const std::string& section, const std::string& key, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        if (e.line() > 0) throw;
        throw ConfigError(std::string(section.empty() ? "" : section + ".") + key + ": " + e.what(),
                          doc.at(section, key).line);
    } catch (const DomainError& e) {
        throw ConfigError(std::string(section.empty() ? "" : section + ".") + key + ": " + e.what(),
                          doc.at(section, key).line);
    }
}

}  // namespace

CurveView parse_curve_view(std::string_view name) {
    for (auto v : {CurveView::population, CurveView::growing_truth, CurveView::growing_cv, CurveView::retrospective}) {
        if (name == to_string(v)) return v;
    }
    throw DomainError("unknown view '" + std::string(name) +
                      "' (expected population, growing_truth, growing_cv or retrospective)");
}

void ScenarioConfig::resolve() {
    if (classes < 2) throw DomainError("problem needs at least two classes");
    if (dim < 1) throw DomainError("problem dimension must be positive");
    if (!(separation >= 0.0)) throw DomainError("separation must be non-negative");
    if (labels.empty()) {
        for (int c = 1; c <= classes; ++c) labels.push_back("c" + std::to_string(c));
    }
    if (labels.size() != static_cast<std::size_t>(classes)) throw DomainError("labels must name every class");
    if (sizes.empty()) throw DomainError("at least one size is required");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] < 1 || (i > 0 && sizes[i] <= sizes[i - 1])) {
            throw DomainError("sizes must be positive and strictly ascending");
        }
    }
    if (views.empty()) throw DomainError("at least one view is required");
    if (n_datasets < 1) throw DomainError("n_datasets must be positive");
    if (large_test_per_class < 1) throw DomainError("large_test_per_class must be positive");
    if (pool_per_class == 0) pool_per_class = 4 * sizes.back();
    if (pool_per_class < sizes.back()) throw DomainError("pool_per_class is smaller than the largest size");
    if (folds < 2) throw DomainError("cv folds must be at least 2");
    if (iterations < 1) throw DomainError("cv iterations must be positive");
    if (static_cast<std::size_t>(folds) > sizes.front() * static_cast<std::size_t>(classes)) {
        throw DomainError("cv folds exceed the rows of the smallest dataset");
    }
    if (model.latent_variables < 1) throw DomainError("latent_variables must be positive");
    if (!(model.ridge >= 0.0)) throw DomainError("ridge must be non-negative");
    if (precision < 0 || precision > 17) throw DomainError("precision must lie in 0..17");
    if (threads < 1) threads = 1;
}

std::uint64_t ScenarioConfig::hash() const {
    std::ostringstream s;
    s << "seed=" << seed << ";classes=" << classes << ";dim=" << dim << ";sep=" << format_shortest(separation)
      << ";shared=" << shared_cov << ";labels=";
    for (const auto& l : labels) s << l << ',';
    s << ";sizes=";
    for (auto n : sizes) s << n << ',';
    s << ";views=";
    for (auto v : views) s << to_string(v) << ',';
    s << ";n_datasets=" << n_datasets << ";large_test=" << large_test_per_class << ";pool=" << pool_per_class
      << ";folds=" << folds << ";iterations=" << iterations << ";stratified=" << stratified
      << ";model=" << model.hash() << ";precision=" << precision;
    return fnv1a(s.str());
}

ScenarioConfig parse_scenario(std::istream& in) {
    const ConfigDocument doc = ConfigDocument::parse(in);
    doc.check_schema({
        {"", {"seed", "threads"}},
        {"problem", {"classes", "dim", "separation", "shared_cov", "labels"}},
        {"curve", {"sizes", "views", "n_datasets", "large_test_per_class", "pool_per_class"}},
        {"cv", {"folds", "iterations", "stratified"}},
        {"model", {"kind", "latent_variables", "ridge", "priors"}},
        {"output", {"csv", "manifest", "precision"}},
    });

    ScenarioConfig c;
    c.seed = keyed(doc, "", "seed", [&] {
        const auto v = doc.get_int("", "seed");
        if (v < 0) throw ConfigError("seed must be non-negative", 0);
        return static_cast<std::uint64_t>(v);
    });
    if (doc.has("", "threads")) {
        c.threads = keyed(doc, "", "threads", [&] { return static_cast<unsigned>(to_size(doc.get_int("", "threads"), "threads")); });
    }

    c.classes = keyed(doc, "problem", "classes", [&] { return to_int(doc.get_int("problem", "classes"), "classes"); });
    c.dim = keyed(doc, "problem", "dim", [&] { return to_int(doc.get_int("problem", "dim"), "dim"); });
    c.separation = doc.get_double("problem", "separation");
    if (doc.has("problem", "shared_cov")) c.shared_cov = doc.get_bool("problem", "shared_cov");
    if (doc.has("problem", "labels")) c.labels = doc.get_string_list("problem", "labels");

    c.sizes.clear();
    keyed(doc, "curve", "sizes", [&] {
        for (auto v : doc.get_int_list("curve", "sizes")) c.sizes.push_back(to_size(v, "sizes"));
        return 0;
    });
    if (doc.has("curve", "views")) {
        c.views.clear();
        keyed(doc, "curve", "views", [&] {
            for (const auto& v : doc.get_string_list("curve", "views")) c.views.push_back(parse_curve_view(v));
            return 0;
        });
    }
    if (doc.has("curve", "n_datasets")) {
        c.n_datasets = keyed(doc, "curve", "n_datasets", [&] { return to_int(doc.get_int("curve", "n_datasets"), "n_datasets"); });
    }
    if (doc.has("curve", "large_test_per_class")) {
        c.large_test_per_class = keyed(doc, "curve", "large_test_per_class", [&] {
            return to_size(doc.get_int("curve", "large_test_per_class"), "large_test_per_class");
        });
    }
    if (doc.has("curve", "pool_per_class")) {
        c.pool_per_class = keyed(doc, "curve", "pool_per_class", [&] {
            return to_size(doc.get_int("curve", "pool_per_class"), "pool_per_class");
        });
    }

    if (doc.has("cv", "folds")) c.folds = keyed(doc, "cv", "folds", [&] { return to_int(doc.get_int("cv", "folds"), "folds"); });
    if (doc.has("cv", "iterations")) {
        c.iterations = keyed(doc, "cv", "iterations", [&] { return to_int(doc.get_int("cv", "iterations"), "iterations"); });
    }
    if (doc.has("cv", "stratified")) c.stratified = doc.get_bool("cv", "stratified");

    if (doc.has("model", "kind")) {
        c.model.kind = keyed(doc, "model", "kind", [&] { return parse_model_kind(doc.get_string("model", "kind")); });
    }
    if (doc.has("model", "latent_variables")) {
        c.model.latent_variables = keyed(doc, "model", "latent_variables", [&] {
            return to_int(doc.get_int("model", "latent_variables"), "latent_variables");
        });
    }
    if (doc.has("model", "ridge")) c.model.ridge = doc.get_double("model", "ridge");
    if (doc.has("model", "priors")) {
        c.model.priors = keyed(doc, "model", "priors", [&] { return parse_priors(doc.get_string("model", "priors")); });
    }

    if (doc.has("output", "csv")) c.csv = doc.get_string("output", "csv");
    if (doc.has("output", "manifest")) c.manifest = doc.get_string("output", "manifest");
    if (doc.has("output", "precision")) {
        c.precision = keyed(doc, "output", "precision", [&] { return to_int(doc.get_int("output", "precision"), "precision"); });
    }

    try {
        c.resolve();
    } catch (const DomainError& e) {
        throw ConfigError(e.what(), 0);
    }
    return c;
}

ScenarioConfig load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    return parse_scenario(in);
}

std::string manifest_json(const ScenarioConfig& c, double elapsed_seconds) {
    json views = json::array();
    for (auto v : c.views) views.push_back(std::string(to_string(v)));
    char hash[17];
    const auto res = std::to_chars(hash, hash + 16, c.hash(), 16);
    json j = {
        {"format", "sampsize-manifest"},
        {"version", 1},
        {"config_hash", std::string(hash, res.ptr)},
        {"elapsed_seconds", elapsed_seconds},
        {"seed", c.seed},
        {"threads", c.threads},
        {"problem", {{"classes", c.classes}, {"dim", c.dim}, {"separation", c.separation},
                     {"shared_cov", c.shared_cov}, {"labels", c.labels}}},
        {"curve", {{"sizes", c.sizes}, {"views", views}, {"n_datasets", c.n_datasets},
                   {"large_test_per_class", c.large_test_per_class}, {"pool_per_class", c.pool_per_class}}},
        {"cv", {{"folds", c.folds}, {"iterations", c.iterations}, {"stratified", c.stratified}}},
        {"model", {{"kind", std::string(to_string(c.model.kind))}, {"latent_variables", c.model.latent_variables},
                   {"ridge", c.model.ridge}, {"priors", std::string(to_string(c.model.priors))}}},
        {"output", {{"csv", c.csv}, {"manifest", c.manifest}, {"precision", c.precision}}},
    };
    return j.dump(2) + "\n";
}

ScenarioConfig parse_manifest(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
        if (j.value("format", "") != "sampsize-manifest") throw ConfigError("not a sampsize manifest", 0);
        if (j.at("version").get<int>() != 1) throw ConfigError("unsupported manifest version", 0);
        ScenarioConfig c;
        c.seed = j.at("seed").get<std::uint64_t>();
        c.threads = j.value("threads", 1u);
        const auto& p = j.at("problem");
        c.classes = p.at("classes").get<int>();
        c.dim = p.at("dim").get<int>();
        c.separation = p.at("separation").get<double>();
        c.shared_cov = p.at("shared_cov").get<bool>();
        c.labels = p.at("labels").get<std::vector<std::string>>();
        const auto& cu = j.at("curve");
        c.sizes = cu.at("sizes").get<std::vector<std::size_t>>();
        c.views.clear();
        for (const auto& v : cu.at("views")) c.views.push_back(parse_curve_view(v.get<std::string>()));
        c.n_datasets = cu.at("n_datasets").get<int>();
        c.large_test_per_class = cu.at("large_test_per_class").get<std::size_t>();
        c.pool_per_class = cu.at("pool_per_class").get<std::size_t>();
        const auto& cv = j.at("cv");
        c.folds = cv.at("folds").get<int>();
        c.iterations = cv.at("iterations").get<int>();
        c.stratified = cv.at("stratified").get<bool>();
        const auto& m = j.at("model");
        c.model.kind = parse_model_kind(m.at("kind").get<std::string>());
        c.model.latent_variables = m.at("latent_variables").get<int>();
        c.model.ridge = m.at("ridge").get<double>();
        c.model.priors = parse_priors(m.at("priors").get<std::string>());
        const auto& o = j.at("output");
        c.csv = o.at("csv").get<std::string>();
        c.manifest = o.at("manifest").get<std::string>();
        c.precision = o.at("precision").get<int>();
        c.resolve();
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("manifest: ") + e.what(), 0);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("manifest: ") + e.what(), 0);
    }
}

ScenarioConfig load_scenario_or_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    in >> std::ws;
    if (in.peek() == '{') return parse_manifest(in);
    return parse_scenario(in);
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
    ScenarioConfig c = config;
    c.resolve();
    const auto start = std::chrono::steady_clock::now();
    const RngSeed root{c.seed, 0};

    const Population population(make_problem(c.classes, c.dim, c.separation, c.shared_cov, root.child(1), c.labels));
    const LabeledDataset large_test = population.sample(c.large_test_per_class, root.child(2));
    const auto wants = [&](CurveView v) { return std::find(c.views.begin(), c.views.end(), v) != c.views.end(); };

    ScenarioResult result;
    std::optional<GrowingCurves> growing;
    if (wants(CurveView::growing_cv) || wants(CurveView::growing_truth)) {
        CvSpec cv{c.folds, c.iterations, root.child(4), c.stratified};
        growing = learning_curve_growing(population, c.sizes, cv, c.model, large_test, c.threads);
    }
    for (auto v : c.views) {
        switch (v) {
            case CurveView::population:
                result.curves.push_back(learning_curve_population(population, c.sizes, c.n_datasets, c.model,
                                                                  large_test, root.child(3), c.threads));
                break;
            case CurveView::growing_truth: result.curves.push_back(growing->truth); break;
            case CurveView::growing_cv: result.curves.push_back(growing->cv); break;
            case CurveView::retrospective: {
                const LabeledDataset pool = population.sample(c.pool_per_class, root.child(5));
                result.curves.push_back(
                    retrospective_curve(pool, c.sizes, c.n_datasets, c.model, large_test, root.child(6), c.threads));
                break;
            }
        }
    }
    result.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

void write_scenario_csv(std::ostream& out, const ScenarioConfig& config, const ScenarioResult& result) {
    ScenarioConfig c = config;
    c.resolve();
    write_curves_csv(out, result.curves, RngSeed{c.seed, 0}, c.hash(), c.precision);
}

}  // namespace sampsize

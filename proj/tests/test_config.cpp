#include <doctest.h>

#include <sstream>

#include "sampsize/config.hpp"
#include "sampsize/error.hpp"
#include "sampsize/scenario.hpp"

using namespace sampsize;

namespace {

ConfigDocument doc_of(const std::string& text) {
    std::istringstream in(text);
    return ConfigDocument::parse(in);
}

int error_line(const std::string& text) {
    try {
        doc_of(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}

ScenarioConfig scenario_of(const std::string& text) {
    std::istringstream in(text);
    return parse_scenario(in);
}

int scenario_error_line(const std::string& text) {
    try {
        scenario_of(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}

const char* kScenario = R"(# small study
seed = 42
threads = 2

[problem]
classes = 3
dim = 4
separation = 2.5
labels = ["x", "y", "z"]

[curve]
sizes = [4, 8, 1_2]
views = ["population", "growing_cv"]
n_datasets = 7

[cv]
folds = 4
iterations = 3

[model]
kind = "lda"
ridge = 1e-6

[output]
csv = "out/curves.csv"
precision = 6
)";

}  // namespace

TEST_SUITE("config") {
    TEST_CASE("scalar and array values") {
        const auto d = doc_of(
            "top = 1\n"
            "[a]\n"
            "s = \"he said \\\"hi\\\"\\n\"  # trailing comment\n"
            "t = true\n"
            "f = false\n"
            "i = -1_000\n"
            "x = 2.5e-3\n"
            "ints = [1, 2, 3]\n"
            "names = [\"p\", \"q\"]\n"
            "empty = []\n"
            "hash = \"a#b\"\n");
        CHECK(d.get_int("", "top") == 1);
        CHECK(d.get_string("a", "s") == "he said \"hi\"\n");
        CHECK(d.get_bool("a", "t"));
        CHECK_FALSE(d.get_bool("a", "f"));
        CHECK(d.get_int("a", "i") == -1000);
        CHECK(d.get_double("a", "x") == 2.5e-3);
        CHECK(d.get_double("a", "i") == -1000.0);
        CHECK(d.get_int_list("a", "ints") == std::vector<std::int64_t>{1, 2, 3});
        CHECK(d.get_string_list("a", "names") == std::vector<std::string>{"p", "q"});
        CHECK(d.get_int_list("a", "empty").empty());
        CHECK(d.get_string("a", "hash") == "a#b");
        CHECK(d.at("a", "x").line == 7);
        CHECK(d.has("a", "t"));
        CHECK_FALSE(d.has("a", "missing"));
        CHECK_FALSE(d.has("b", "t"));
    }

    TEST_CASE("syntax errors name the line") {
        CHECK(error_line("a = 1\nb 2\n") == 2);
        CHECK(error_line("a = 1\n[sec\n") == 2);
        CHECK(error_line("[s]\nx = 1\nx = 2\n") == 3);
        CHECK(error_line("[s]\n[t]\n[s]\n") == 3);
        CHECK(error_line("x = \"open\n") == 1);
        CHECK(error_line("\n\nx = [1, 2\n") == 3);
        CHECK(error_line("x = 1.2.3\n") == 1);
        CHECK(error_line("x = yes\n") == 1);
        CHECK(error_line("x = 1 junk\n") == 1);
        CHECK(error_line("= 1\n") == 1);
    }

    TEST_CASE("type errors name the line") {
        const auto d = doc_of("[s]\n\nn = \"five\"\nb = 1\nl = [1, \"a\"]\nv = [1]\nf = 1.5\n");
        auto line_of = [](auto&& fn) {
            try {
                fn();
            } catch (const ConfigError& e) {
                return e.line();
            }
            return -1;
        };
        CHECK(line_of([&] { d.get_int("s", "n"); }) == 3);
        CHECK(line_of([&] { d.get_bool("s", "b"); }) == 4);
        CHECK(line_of([&] { d.get_int_list("s", "l"); }) == 5);
        CHECK(line_of([&] { d.get_int("s", "v"); }) == 6);
        CHECK(line_of([&] { d.get_int("s", "f"); }) == 7);
        CHECK(line_of([&] { d.get_int("s", "absent"); }) == 1);
    }

    TEST_CASE("schema") {
        const auto d = doc_of("a = 1\n[s]\nk = 2\n[t]\nz = 3\n");
        CHECK_NOTHROW(d.check_schema({{"", {"a"}}, {"s", {"k"}}, {"t", {"z"}}}));
        try {
            d.check_schema({{"", {"a"}}, {"s", {"k"}}});
            FAIL("expected unknown section");
        } catch (const ConfigError& e) {
            CHECK(e.line() == 4);
            CHECK(std::string(e.what()).find("[t]") != std::string::npos);
        }
        try {
            d.check_schema({{"", {"a"}}, {"s", {"other"}}, {"t", {"z"}}});
            FAIL("expected unknown key");
        } catch (const ConfigError& e) {
            CHECK(e.line() == 3);
        }
    }

    TEST_CASE("scenario file") {
        const auto c = scenario_of(kScenario);
        CHECK(c.seed == 42);
        CHECK(c.threads == 2);
        CHECK(c.classes == 3);
        CHECK(c.dim == 4);
        CHECK(c.separation == 2.5);
        CHECK(c.labels == std::vector<std::string>{"x", "y", "z"});
        CHECK(c.sizes == std::vector<std::size_t>{4, 8, 12});
        CHECK(c.views == std::vector<CurveView>{CurveView::population, CurveView::growing_cv});
        CHECK(c.n_datasets == 7);
        CHECK(c.large_test_per_class == 2000);
        CHECK(c.pool_per_class == 48);
        CHECK(c.folds == 4);
        CHECK(c.iterations == 3);
        CHECK(c.stratified);
        CHECK(c.model.kind == ModelKind::lda);
        CHECK(c.model.ridge == 1e-6);
        CHECK(c.model.latent_variables == 10);
        CHECK(c.csv == "out/curves.csv");
        CHECK(c.precision == 6);
    }

    TEST_CASE("scenario errors") {
        CHECK(scenario_error_line("seed = 1\n[problem]\nclasses = 3\ndim = 4\nseparation = 1.0\ncolour = 2\n"
                                  "[curve]\nsizes = [4]\n") == 6);
        CHECK(scenario_error_line("seed = 1\n[problem]\nclasses = 3\ndim = 4\nseparation = 1.0\n"
                                  "[curve]\nsizes = [4]\nviews = [\"sideways\"]\n") == 8);
        CHECK(scenario_error_line("seed = 1\n[problem]\nclasses = 3\ndim = 4\nseparation = 1.0\n"
                                  "[curve]\nsizes = [4, 0]\n") == 7);
        CHECK(scenario_error_line("seed = 1\n[problem]\nclasses = 3\ndim = 4\nseparation = 1.0\n"
                                  "[curve]\nsizes = [4]\n[model]\nkind = \"forest\"\n") == 9);
        // Missing key points at its section.
        CHECK(scenario_error_line("seed = 1\n[problem]\nclasses = 3\nseparation = 1.0\n[curve]\nsizes = [4]\n") == 2);
        CHECK_THROWS_AS(scenario_of("seed = 1\n[problem]\nclasses = 3\ndim = 4\nseparation = 1.0\n"
                                    "[curve]\nsizes = [8, 4]\n"),
                        ConfigError);
        CHECK_THROWS_AS(scenario_of("seed = 1\n[problem]\nclasses = 2\ndim = 4\nseparation = 1.0\n"
                                    "[curve]\nsizes = [2]\n[cv]\nfolds = 5\n"),
                        ConfigError);
    }

    TEST_CASE("manifest round trip") {
        const auto c = scenario_of(kScenario);
        std::istringstream in(manifest_json(c, 1.5));
        const auto back = parse_manifest(in);
        CHECK(back.hash() == c.hash());
        CHECK(back.threads == c.threads);
        CHECK(back.csv == c.csv);
        CHECK(back.labels == c.labels);
        CHECK(back.views == c.views);
        CHECK(back.model.ridge == c.model.ridge);
        CHECK(manifest_json(back, 1.5) == manifest_json(c, 1.5));

        std::istringstream bad("{\"format\": \"other\"}");
        CHECK_THROWS_AS(parse_manifest(bad), ConfigError);
        std::istringstream broken("{\"format\": ");
        CHECK_THROWS_AS(parse_manifest(broken), ConfigError);
    }

    TEST_CASE("hash covers results, not execution") {
        const auto base = scenario_of(kScenario);
        auto c = base;
        c.threads = 7;
        c.csv = "elsewhere.csv";
        c.manifest = "m.json";
        CHECK(c.hash() == base.hash());
        for (auto change : std::vector<void (*)(ScenarioConfig&)>{
                 [](ScenarioConfig& s) { s.seed += 1; },
                 [](ScenarioConfig& s) { s.separation = 2.5000001; },
                 [](ScenarioConfig& s) { s.iterations += 1; },
                 [](ScenarioConfig& s) { s.model.latent_variables = 3; },
                 [](ScenarioConfig& s) { s.precision = 3; },
                 [](ScenarioConfig& s) { s.sizes.push_back(20); },
             }) {
            auto d = base;
            change(d);
            CHECK(d.hash() != base.hash());
        }
    }

    TEST_CASE("shipped configs parse") {
        CHECK_NOTHROW(load_scenario_file(SAMPSIZE_SOURCE_DIR "/configs/fig3-desk.toml"));
        CHECK_NOTHROW(load_scenario_file(SAMPSIZE_SOURCE_DIR "/configs/smoke.toml"));
        CHECK_THROWS_AS(load_scenario_file(SAMPSIZE_SOURCE_DIR "/configs/does-not-exist.toml"), IoError);
    }
}

#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "sampsize/binom_ci.hpp"
#include "sampsize/power.hpp"

namespace fs = std::filesystem;
using namespace sampsize;

namespace {

struct Run {
    int status;
    std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " SAMPSIZE_CLI " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
    const int raw = pclose(pipe);
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::istringstream in(line);
    for (std::string f; std::getline(in, f, sep);) out.push_back(f);
    return out;
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("sampsize-cli-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const char* kTinyScenario = R"(seed = 11
[problem]
classes = 3
dim = 4
separation = 3.0
[curve]
sizes = [3, 6]
views = ["population", "growing_truth", "growing_cv"]
n_datasets = 6
large_test_per_class = 100
[cv]
folds = 3
iterations = 4
[model]
kind = "pls-lda"
latent_variables = 2
)";

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("ci and ntest") {
        const auto ci = run("--format json ci --k 90 --n 100");
        CHECK(ci.status == 0);
        const auto j = nlohmann::json::parse(ci.out);
        const auto lib = hpd_interval({90, 100});
        CHECK(j["lower"].get<double>() == doctest::Approx(lib.lower).epsilon(1e-4));
        CHECK(j["upper"].get<double>() == doctest::Approx(lib.upper).epsilon(1e-4));
        CHECK(j["method"] == "hpd");

        const auto text = run("ci --k 100 --n 100 --precision 4");
        CHECK(text.out.find("lower 0.9708") != std::string::npos);

        CHECK(run("ntest --p-hat 1 --width 0.05").out == "58\n");
        CHECK(run("ntest --p-hat 0.9 --width 0.1").out == "138\n");
        CHECK(run("ntest --p-hat 0.9 --width 0.1 --method equal-tailed").out == "141\n");
    }

    TEST_CASE("power commands") {
        const auto plan = nlohmann::json::parse(run("--format json samsize --p1 0.75 --p2 0.9").out);
        CHECK(plan["n1"].get<double>() == doctest::Approx(99.54).epsilon(1e-4));
        CHECK(plan["n2"].get<double>() == doctest::Approx(99.54).epsilon(1e-4));

        CHECK(run("--format csv n-new --p-old 0.75 --n-old 25 --p-new 0.975 --alpha 0.1 --power 0.9").out ==
              "n_new\n63\n");
        const auto nn = run("n-new --p-old 0.75 --n-old 25 --p-new 0.96 --alpha 0.1 --power 0.9");
        CHECK(nn.status == 0);
        CHECK(nn.out.find("117") != std::string::npos);

        const auto pw = nlohmann::json::parse(run("--format json power --p1 0.75 --p2 0.9 --n1 25 --n2 100000").out);
        CHECK(pw["power"].get<double>() ==
              doctest::Approx(max_power_vs_infinite_test(0.75, 25, 0.9, 0.05)).epsilon(1e-4));

        const auto a = run("--format json power-sim --p1 0.75 --p2 0.9 --n1 25 --n2 100000 --reps 2000 --seed 5");
        const auto b = run("--format json power-sim --p1 0.75 --p2 0.9 --n1 25 --n2 100000 --reps 2000 --seed 5");
        CHECK(a.status == 0);
        CHECK(a.out == b.out);
        const auto sim = nlohmann::json::parse(a.out);
        CHECK(sim["ci_lower"].get<double>() <= sim["power"].get<double>());
        CHECK(sim["power"].get<double>() <= sim["ci_upper"].get<double>());
    }

    TEST_CASE("exit codes") {
        CHECK(run("").status == 1);
        CHECK(run("ci --k 5").status == 1);
        CHECK(run("ci --k 5 --n 3").status == 1);
        CHECK(run("--format xml ci --k 1 --n 2").status == 1);
        CHECK(run("ntest --p-hat 1.5 --width 0.1").status == 1);
        CHECK(run("n-new --p-old 0.75 --n-old 25 --p-new 0.93 --alpha 0.1 --power 0.9").status == 2);
        CHECK(run("samsize --p1 0.8 --p2 0.8").status == 2);
        CHECK(run("ntest --p-hat 0.5 --width 0.001 --cap 100").status == 2);
        CHECK(run("learning-curve /nonexistent/config.toml").status == 3);
        CHECK(run("-o /nonexistent/dir/out.csv ci --k 1 --n 2").status == 3);

        const auto dir = scratch("bad");
        std::ofstream(dir / "bad.toml") << "seed = 1\n[problem]\nclasses = \"three\"\n";
        CHECK(run("learning-curve " + (dir / "bad.toml").string()).status == 1);
    }

    TEST_CASE("interval table") {
        const auto t = run("--format csv ci-table");
        CHECK(t.status == 0);
        const auto lines = lines_of(t.out);
        REQUIRE(lines.size() == 3001);
        CHECK(lines[0] == "p_hat,n,lower,upper,width");
        CHECK(lines[1] == "0.5000,1,0.0608,0.9392,0.8783");
        // Width shrinks with n for each observed proportion.
        std::string previous_p;
        double previous_width = 2.0;
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto f = split(lines[i]);
            REQUIRE(f.size() == 5);
            const double width = std::stod(f[4]);
            if (f[0] != previous_p) {
                previous_p = f[0];
                previous_width = 2.0;
            }
            CHECK(width <= previous_width + 1e-4);
            previous_width = width;
        }

        const auto dir = scratch("table");
        CHECK(run("--format csv -o " + (dir / "t.csv").string() + " ci-table --p-hat 0.9 --n-max 20").status == 0);
        CHECK(lines_of(slurp(dir / "t.csv")).size() == 21);
    }

    TEST_CASE("simulate") {
        const auto a = run("--format csv simulate --classes 2 --dim 3 --n-per-class 4 --seed 9");
        const auto b = run("--format csv simulate --classes 2 --dim 3 --n-per-class 4 --seed 9");
        CHECK(a.status == 0);
        CHECK(a.out == b.out);
        const auto lines = lines_of(a.out);
        REQUIRE(lines.size() == 9);
        CHECK(lines[0] == "label,f1,f2,f3");
        CHECK(run("--format csv simulate --classes 2 --dim 3 --n-per-class 4 --seed 10").out != a.out);
    }

    TEST_CASE("learning curve reruns") {
        const auto dir = scratch("curve");
        const auto config = dir / "tiny.toml";
        std::ofstream(config) << kTinyScenario;

        const auto first = run("learning-curve " + config.string() + " --csv " + (dir / "a.csv").string());
        REQUIRE(first.status == 0);
        const std::string a = slurp(dir / "a.csv");
        const auto lines = lines_of(a);
        CHECK(lines[0] == "view,class,train_size_per_class,statistic,value,seed,config_hash");
        // 3 views x 2 sizes x 3 classes x 3 statistics.
        CHECK(lines.size() == 1 + 54);
        REQUIRE(fs::exists(dir / "a.csv.manifest.json"));

        run("learning-curve " + config.string() + " --csv " + (dir / "b.csv").string());
        CHECK(slurp(dir / "b.csv") == a);

        run("--threads 3 learning-curve " + config.string() + " --csv " + (dir / "c.csv").string());
        CHECK(slurp(dir / "c.csv") == a);
        run("learning-curve " + config.string() + " --csv " + (dir / "e.csv").string(), "SAMPSIZE_THREADS=2");
        CHECK(slurp(dir / "e.csv") == a);

        const auto rerun = run("learning-curve " + (dir / "a.csv.manifest.json").string() + " --csv " +
                               (dir / "d.csv").string() + " --manifest " + (dir / "d.json").string());
        CHECK(rerun.status == 0);
        CHECK(slurp(dir / "d.csv") == a);
        const auto m1 = nlohmann::json::parse(slurp(dir / "a.csv.manifest.json"));
        const auto m2 = nlohmann::json::parse(slurp(dir / "d.json"));
        CHECK(m1["config_hash"] == m2["config_hash"]);
        CHECK(m1["format"] == "sampsize-manifest");

        const auto to_stdout = run("learning-curve " + config.string() + " --csv -");
        CHECK(to_stdout.out == a);
    }

    TEST_CASE("bundled desk scenario shows masking at the smallest size") {
        const auto dir = scratch("desk");
        const auto csv = dir / "desk.csv";
        REQUIRE(run("learning-curve " SAMPSIZE_SOURCE_DIR "/configs/fig3-desk.toml --csv " + csv.string()).status == 0);
        std::map<std::string, double> width;  // view -> summed p95 - p5 at the smallest size
        for (const auto& line : lines_of(slurp(csv))) {
            const auto f = split(line);
            if (f[0] == "view" || f[2] != "1.6") continue;
            if (f[3] == "p95") width[f[0]] += std::stod(f[4]);
            if (f[3] == "p5") width[f[0]] -= std::stod(f[4]);
        }
        REQUIRE(width.count("growing_cv") == 1);
        REQUIRE(width.count("growing_truth") == 1);
        CHECK(width["growing_cv"] > width["growing_truth"]);
        CHECK(fs::exists(dir / "desk.csv.manifest.json"));
    }

    TEST_CASE("single table row agrees with ci") {
        const auto row = lines_of(run("--format csv ci-table --p-hat 0.9 --n-min 40 --n-max 40").out);
        REQUIRE(row.size() == 2);
        const auto f = split(row[1]);
        const auto ci = nlohmann::json::parse(run("--format json ci --k 36 --n 40").out);
        CHECK(std::stod(f[2]) == doctest::Approx(ci["lower"].get<double>()));
        CHECK(std::stod(f[3]) == doctest::Approx(ci["upper"].get<double>()));
    }

    TEST_CASE("simulated power at the reference setting") {
        const auto sim = nlohmann::json::parse(
            run("--format json power-sim --p1 0.75 --p2 0.9 --n1 25 --n2 100000 --reps 100000 --seed 1").out);
        CHECK(sim["power"].get<double>() == doctest::Approx(0.622).epsilon(0.01 / 0.622));
    }

    TEST_CASE("single-size scenario") {
        const auto dir = scratch("single");
        std::string text = kTinyScenario;
        text.replace(text.find("sizes = [3, 6]"), 14, "sizes = [6]");
        std::ofstream(dir / "one.toml") << text;
        const auto out = run("learning-curve " + (dir / "one.toml").string() + " --csv -");
        CHECK(out.status == 0);
        CHECK(lines_of(out.out).size() == 1 + 27);
    }
}

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "sampsize/binom_ci.hpp"
#include "sampsize/error.hpp"
#include "sampsize/power.hpp"
#include "sampsize/scenario.hpp"
#include "sampsize/simgen.hpp"

namespace {

using namespace sampsize;
using Field = std::variant<double, std::int64_t, std::string>;
using Record = std::vector<std::pair<std::string, Field>>;

enum ExitCode { ok = 0, usage = 1, infeasible = 2, io = 3 };

struct Globals {
    int precision = 4;
    unsigned threads = 1;
    std::string format = "text";
    std::string output;
};

std::string fixed(double v, int precision) {
    char buf[512];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
    return std::string(buf, res.ptr);
}

std::string field_text(const Field& f, int precision) {
    if (const auto* d = std::get_if<double>(&f)) return fixed(*d, precision);
    if (const auto* i = std::get_if<std::int64_t>(&f)) return std::to_string(*i);
    return std::get<std::string>(f);
}

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_.open(path);
            if (!file_) throw IoError("cannot open output file " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
    void close() {
        if (file_.is_open()) {
            file_.close();
            if (file_.fail()) throw IoError("write failed");
        } else if (!std::cout.flush()) {
            throw IoError("write to stdout failed");
        }
    }

private:
    std::ofstream file_;
};

void emit(const Globals& g, const Record& record) {
    Output out(g.output);
    auto& os = out.stream();
    if (g.format == "json") {
        nlohmann::ordered_json j;
        for (const auto& [key, value] : record) {
            // Rounded like the other formats so every format agrees.
            if (const auto* d = std::get_if<double>(&value)) {
                j[key] = std::stod(fixed(*d, g.precision));
            } else if (const auto* i = std::get_if<std::int64_t>(&value)) {
                j[key] = *i;
            } else {
                j[key] = std::get<std::string>(value);
            }
        }
        os << j.dump() << '\n';
    } else if (g.format == "csv") {
        for (std::size_t i = 0; i < record.size(); ++i) os << (i ? "," : "") << record[i].first;
        os << '\n';
        for (std::size_t i = 0; i < record.size(); ++i) os << (i ? "," : "") << field_text(record[i].second, g.precision);
        os << '\n';
    } else {
        for (const auto& [key, value] : record) os << key << ' ' << field_text(value, g.precision) << '\n';
    }
    out.close();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out || !(out << text)) throw IoError("cannot write " + path);
}

unsigned default_threads() {
    if (const char* env = std::getenv("SAMPSIZE_THREADS")) {
        unsigned v = 0;
        const std::string_view s(env);
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec == std::errc() && res.ptr == s.data() + s.size() && v > 0) return v;
        std::cerr << "warning: ignoring invalid SAMPSIZE_THREADS='" << env << "'\n";
    }
    return 1;
}

// ---- subcommands ----

struct CiArgs {
    double k = 0.0;
    double n = 0.0;
    double level = 0.95;
    double prior_a = 1.0;
    double prior_b = 1.0;
    std::string method = "hpd";
};

void run_ci(const Globals& g, const CiArgs& a) {
    const BinomialObservation obs{a.k, a.n};
    const PriorSpec prior{a.prior_a, a.prior_b};
    const auto ci = interval(parse_interval_method(a.method), obs, a.level, prior);
    emit(g, {{"lower", ci.lower},
             {"upper", ci.upper},
             {"mean", posterior(obs, prior).mean()},
             {"width", ci.width()},
             {"level", a.level},
             {"method", std::string(to_string(ci.method))}});
}

struct NtestArgs {
    double p_hat = 0.5;
    double width = 0.1;
    double level = 0.95;
    double prior_a = 1.0;
    double prior_b = 1.0;
    std::string method = "hpd";
    std::int64_t cap = 1'000'000;
};

NtestOptions ntest_options(const NtestArgs& a) {
    return {a.level, {a.prior_a, a.prior_b}, parse_interval_method(a.method), a.cap};
}

void run_ntest(const Globals& g, const NtestArgs& a) {
    const auto n = min_ntest_for_width(a.p_hat, a.width, ntest_options(a));
    if (g.format == "text") {
        Output out(g.output);
        out.stream() << n << '\n';
        out.close();
    } else {
        emit(g, {{"p_hat", a.p_hat}, {"width", a.width}, {"level", a.level}, {"n", n}});
    }
}

struct TableArgs {
    std::vector<double> p_hat{0.5, 0.75, 0.9, 0.95, 0.975, 1.0};
    std::int64_t n_min = 1;
    std::int64_t n_max = 500;
    double level = 0.95;
    double prior_a = 1.0;
    double prior_b = 1.0;
    std::string method = "hpd";
};

void run_ci_table(const Globals& g, const TableArgs& a) {
    if (a.n_min < 1 || a.n_max < a.n_min) throw DomainError("need 1 <= n-min <= n-max");
    const auto method = parse_interval_method(a.method);
    const PriorSpec prior{a.prior_a, a.prior_b};
    Output out(g.output);
    auto& os = out.stream();
    os << "p_hat,n,lower,upper,width\n";
    for (double p : a.p_hat) {
        for (std::int64_t n = a.n_min; n <= a.n_max; ++n) {
            const double trials = static_cast<double>(n);
            const auto ci = interval(method, {p * trials, trials}, a.level, prior);
            os << fixed(p, g.precision) << ',' << n << ',' << fixed(ci.lower, g.precision) << ','
               << fixed(ci.upper, g.precision) << ',' << fixed(ci.width(), g.precision) << '\n';
        }
    }
    out.close();
}

struct PowerArgs {
    double p1 = 0.5;
    double p2 = 0.5;
    double n1 = 1.0;
    double n2 = 1.0;
    double alpha = 0.05;
    std::int64_t reps = 100'000;
    std::uint64_t seed = 1;
};

void run_power(const Globals& g, const PowerArgs& a) {
    const TwoProportionSpec spec{a.p1, a.p2, a.n1, a.n2, a.alpha};
    emit(g, {{"power", analytic_power(spec)}});
}

void run_power_sim(const Globals& g, const PowerArgs& a) {
    const TwoProportionSpec spec{a.p1, a.p2, a.n1, a.n2, a.alpha};
    const auto r = simulated_power(spec, a.reps, RngSeed{a.seed, 0}, g.threads);
    if (r.sizes_rounded) std::cerr << "note: non-integer sample sizes were rounded\n";
    emit(g, {{"power", r.estimate},
             {"ci_lower", r.ci_lower},
             {"ci_upper", r.ci_upper},
             {"replicates", r.replicates},
             {"seed", static_cast<std::int64_t>(a.seed)}});
}

struct SamsizeArgs {
    double p1 = 0.5;
    double p2 = 0.5;
    double alpha = 0.05;
    double power = 0.8;
    double fraction = 0.5;
};

void run_samsize(const Globals& g, const SamsizeArgs& a) {
    if (a.fraction == 0.5) {
        const double n = equal_allocation_samsize(a.p1, a.p2, a.alpha, a.power);
        emit(g, {{"n1", n}, {"n2", n}});
    } else {
        const auto plan = allocation_samsize(a.p1, a.p2, a.fraction, a.alpha, a.power);
        emit(g, {{"n1", plan.n1}, {"n2", plan.n2}});
    }
}

struct NNewArgs {
    double p_old = 0.5;
    std::int64_t n_old = 1;
    double p_new = 0.5;
    double alpha = 0.05;
    double power = 0.8;
};

void run_n_new(const Globals& g, const NNewArgs& a) {
    const auto n = n_new_for_fixed_n_old(a.p_old, a.n_old, a.p_new, a.alpha, a.power);
    if (g.format == "text") {
        Output out(g.output);
        out.stream() << n << '\n';
        out.close();
    } else {
        emit(g, {{"n_new", n}});
    }
}

struct SimulateArgs {
    int classes = 2;
    int dim = 20;
    double separation = 2.0;
    bool heteroscedastic = false;
    std::size_t n_per_class = 25;
    std::uint64_t seed = 1;
    std::string labels;
    bool binary = false;
};

void run_simulate(const Globals& g, const SimulateArgs& a) {
    std::vector<std::string> labels;
    if (!a.labels.empty()) {
        std::stringstream ss(a.labels);
        for (std::string item; std::getline(ss, item, ',');) labels.push_back(item);
    }
    const RngSeed root{a.seed, 0};
    const Population population(make_problem(a.classes, a.dim, a.separation, !a.heteroscedastic, root.child(1), labels));
    const LabeledDataset data = population.sample(a.n_per_class, root.child(2));
    if (a.binary) {
        if (g.output.empty() || g.output == "-") throw DomainError("--binary needs --output FILE");
        std::ofstream out(g.output, std::ios::binary);
        if (!out) throw IoError("cannot open output file " + g.output);
        write_dataset_binary(out, data);
        if (!out.flush()) throw IoError("write failed: " + g.output);
    } else {
        Output out(g.output);
        write_dataset_csv(out.stream(), data);
        out.close();
    }
}

struct CurveArgs {
    std::string config;
    std::string csv;
    std::string manifest;
    int precision = -1;
};

void run_learning_curve(const Globals& g, const CurveArgs& a, bool threads_given) {
    ScenarioConfig config = load_scenario_or_manifest(a.config);
    if (threads_given || config.threads <= 1) config.threads = g.threads;
    if (!a.csv.empty()) config.csv = a.csv;
    if (!g.output.empty()) config.csv = g.output;
    if (!a.manifest.empty()) config.manifest = a.manifest;
    if (a.precision >= 0) config.precision = a.precision;
    if (config.manifest.empty() && !config.csv.empty() && config.csv != "-") config.manifest = config.csv + ".manifest.json";
    config.resolve();

    std::cerr << "learning-curve: " << config.sizes.size() << " sizes, " << config.views.size() << " views, "
              << config.threads << " thread(s)\n";
    const ScenarioResult result = run_scenario(config);

    Output out(config.csv);
    write_scenario_csv(out.stream(), config, result);
    out.close();
    if (!config.manifest.empty()) {
        write_text_file(config.manifest, manifest_json(config, result.elapsed_seconds));
    } else {
        std::cerr << "note: no manifest path (CSV went to stdout); pass --manifest to record the run\n";
    }
    std::cerr << "learning-curve: elapsed " << fixed(result.elapsed_seconds, 1) << " s\n";
}

template <typename T>
CLI::Option* add_required(CLI::App* app, const std::string& name, T& value, const std::string& help) {
    return app->add_option(name, value, help)->required();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sample size planning for classifier validation"};
    app.require_subcommand(1);
    Globals g;
    g.threads = default_threads();
    app.add_option("--precision", g.precision, "Decimals for proportions and rates")
        ->check(CLI::Range(0, 17))
        ->capture_default_str();
    auto* threads_opt = app.add_option("--threads", g.threads, "Worker threads (default: $SAMPSIZE_THREADS or 1)")
                            ->check(CLI::PositiveNumber);
    app.add_option("--format", g.format, "Output format")
        ->check(CLI::IsMember({"text", "csv", "json"}))
        ->capture_default_str();
    app.add_option("-o,--output", g.output, "Output file (default stdout)");
    app.fallthrough();

    CiArgs ci;
    auto* cmd_ci = app.add_subcommand("ci", "Interval for k successes out of n tests");
    add_required(cmd_ci, "--k", ci.k, "Successes");
    add_required(cmd_ci, "--n", ci.n, "Tested cases");
    cmd_ci->add_option("--level", ci.level, "Interval mass")->capture_default_str();
    cmd_ci->add_option("--prior-a", ci.prior_a, "Beta prior a")->capture_default_str();
    cmd_ci->add_option("--prior-b", ci.prior_b, "Beta prior b")->capture_default_str();
    cmd_ci->add_option("--method", ci.method, "hpd | equal-tailed | clopper-pearson")->capture_default_str();

    NtestArgs nt;
    auto* cmd_ntest = app.add_subcommand("ntest", "Test cases needed for a maximal interval width");
    add_required(cmd_ntest, "--p-hat", nt.p_hat, "Expected observed proportion");
    add_required(cmd_ntest, "--width", nt.width, "Maximal interval width");
    cmd_ntest->add_option("--level", nt.level, "Interval mass")->capture_default_str();
    cmd_ntest->add_option("--prior-a", nt.prior_a, "Beta prior a")->capture_default_str();
    cmd_ntest->add_option("--prior-b", nt.prior_b, "Beta prior b")->capture_default_str();
    cmd_ntest->add_option("--method", nt.method, "hpd | equal-tailed | clopper-pearson")->capture_default_str();
    cmd_ntest->add_option("--cap", nt.cap, "Largest n searched")->capture_default_str();

    TableArgs table;
    auto* cmd_table = app.add_subcommand("ci-table", "CSV of intervals over observed proportions and n");
    cmd_table->add_option("--p-hat", table.p_hat, "Observed proportions")->delimiter(',')->capture_default_str();
    cmd_table->add_option("--n-min", table.n_min, "Smallest n")->capture_default_str();
    cmd_table->add_option("--n-max", table.n_max, "Largest n")->capture_default_str();
    cmd_table->add_option("--level", table.level, "Interval mass")->capture_default_str();
    cmd_table->add_option("--prior-a", table.prior_a, "Beta prior a")->capture_default_str();
    cmd_table->add_option("--prior-b", table.prior_b, "Beta prior b")->capture_default_str();
    cmd_table->add_option("--method", table.method, "hpd | equal-tailed | clopper-pearson")->capture_default_str();

    PowerArgs pw;
    auto* cmd_power = app.add_subcommand("power", "Normal-approximation power of the two-proportion test");
    auto* cmd_power_sim = app.add_subcommand("power-sim", "Monte Carlo power of the two-proportion test");
    for (auto* cmd : {cmd_power, cmd_power_sim}) {
        add_required(cmd, "--p1", pw.p1, "Proportion of the established classifier");
        add_required(cmd, "--p2", pw.p2, "Proportion of the new classifier");
        add_required(cmd, "--n1", pw.n1, "Test cases of the established classifier");
        add_required(cmd, "--n2", pw.n2, "Test cases of the new classifier");
        cmd->add_option("--alpha", pw.alpha, "Two-sided type I error")->capture_default_str();
    }
    cmd_power_sim->add_option("--reps", pw.reps, "Replicates (>= 1000)")->capture_default_str();
    cmd_power_sim->add_option("--seed", pw.seed, "Random seed")->capture_default_str();

    SamsizeArgs ss;
    auto* cmd_samsize = app.add_subcommand("samsize", "Sample sizes for comparing two proportions");
    add_required(cmd_samsize, "--p1", ss.p1, "Proportion of the established classifier");
    add_required(cmd_samsize, "--p2", ss.p2, "Proportion of the new classifier");
    cmd_samsize->add_option("--alpha", ss.alpha, "Two-sided type I error")->capture_default_str();
    cmd_samsize->add_option("--power", ss.power, "Target power")->capture_default_str();
    cmd_samsize->add_option("--fraction", ss.fraction, "n1 / (n1 + n2)")->capture_default_str();

    NNewArgs nn;
    auto* cmd_n_new = app.add_subcommand("n-new", "Test cases for a new classifier against a fixed old test");
    add_required(cmd_n_new, "--p-old", nn.p_old, "Proportion of the established classifier");
    add_required(cmd_n_new, "--n-old", nn.n_old, "Test cases of the established classifier");
    add_required(cmd_n_new, "--p-new", nn.p_new, "Expected proportion of the new classifier");
    cmd_n_new->add_option("--alpha", nn.alpha, "Two-sided type I error")->capture_default_str();
    cmd_n_new->add_option("--power", nn.power, "Target power")->capture_default_str();

    SimulateArgs sim;
    auto* cmd_sim = app.add_subcommand("simulate", "Draw a synthetic Gaussian classification data set");
    cmd_sim->add_option("--classes", sim.classes, "Number of classes")->capture_default_str();
    cmd_sim->add_option("--dim", sim.dim, "Feature dimension")->capture_default_str();
    cmd_sim->add_option("--separation", sim.separation, "Pairwise distance of class means")->capture_default_str();
    cmd_sim->add_flag("--heteroscedastic", sim.heteroscedastic, "Random covariance per class");
    cmd_sim->add_option("--n-per-class", sim.n_per_class, "Rows per class")->capture_default_str();
    cmd_sim->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
    cmd_sim->add_option("--labels", sim.labels, "Comma separated class labels");
    cmd_sim->add_flag("--binary", sim.binary, "Write the binary container instead of CSV");

    CurveArgs curve;
    auto* cmd_curve = app.add_subcommand("learning-curve", "Run a learning-curve scenario from a config or manifest");
    cmd_curve->add_option("config", curve.config, "Scenario config (.toml) or manifest (.json)")->required();
    cmd_curve->add_option("--csv", curve.csv, "Result CSV (overrides the config)");
    cmd_curve->add_option("--manifest", curve.manifest, "Manifest path (overrides the config)");
    cmd_curve->add_option("--curve-precision", curve.precision, "Decimals in the result CSV (overrides the config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        if (*cmd_ci) run_ci(g, ci);
        else if (*cmd_ntest) run_ntest(g, nt);
        else if (*cmd_table) run_ci_table(g, table);
        else if (*cmd_power) run_power(g, pw);
        else if (*cmd_power_sim) run_power_sim(g, pw);
        else if (*cmd_samsize) run_samsize(g, ss);
        else if (*cmd_n_new) run_n_new(g, nn);
        else if (*cmd_sim) run_simulate(g, sim);
        else if (*cmd_curve) run_learning_curve(g, curve, threads_opt->count() > 0 || std::getenv("SAMPSIZE_THREADS"));
        return ok;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return infeasible;
    } catch (const SolverError& e) {
        std::cerr << "solver failed: " << e.what() << '\n';
        return infeasible;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return io;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return usage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return usage;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << '\n';
        return usage;
    }
}

// esaccel: run extremum-seeking scenarios and write traces, charts and summaries.

#include <esaccel/perturbation.hpp>
#include <esaccel/report.hpp>
#include <esaccel/scenarios.hpp>

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fs = std::filesystem;
using namespace esaccel;

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kParse = 2, kNumeric = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunOptions {
    std::string scenario;
    std::string out_dir = ".";
    bool svg = false;
    std::optional<std::uint64_t> seed;
    std::optional<int> step_divisor;
};

ScenarioConfig load_with_overrides(const RunOptions& o) {
    fs::path path;
    try {
        path = resolve_scenario(o.scenario);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    auto config = load_scenario(path);
    if (o.seed) {
        if (!config.noise) throw UsageError("--seed needs a noisy scenario");
        config.noise->seed = *o.seed;
    }
    if (o.step_divisor) {
        if (*o.step_divisor <= 0) throw UsageError("--step-divisor must be positive");
        config.step_divisor = *o.step_divisor;
    }
    return config;
}

std::vector<double> parse_values(const std::string& list) {
    std::vector<double> values;
    std::string_view rest = list;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        auto item = rest.substr(0, comma);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
            throw UsageError("--values: cannot read '" + std::string(item) + "' as a number");
        }
        values.push_back(v);
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    if (values.empty()) throw UsageError("--values: empty list");
    return values;
}

// All outputs are rendered before anything touches the disk.
void write_files(const fs::path& dir, const std::vector<std::pair<fs::path, std::string>>& files) {
    fs::create_directories(dir);
    for (const auto& [name, body] : files) {
        const fs::path path = dir / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << body;
        if (!out) throw std::runtime_error("cannot write " + path.string());
    }
}

std::string file_stem(const ScenarioConfig& c) { return c.name; }

int cmd_run(const RunOptions& o) {
    const auto config = load_with_overrides(o);
    const auto result = run_scenario(config);
    const std::string csv = trace_csv(result);
    std::vector<std::pair<fs::path, std::string>> files{{file_stem(config) + ".csv", csv}};
    if (o.svg) files.emplace_back(file_stem(config) + ".svg", svg_from_csv(csv, config.name));
    write_files(o.out_dir, files);

    std::cout << "scenario = " << config.name << "\n" << summary_text(result.summary);
    for (const auto& f : files) std::cout << "wrote = " << (fs::path(o.out_dir) / f.first).string() << "\n";
    return kOk;
}

int cmd_sweep(const RunOptions& o, const std::string& axis, const std::string& value_list) {
    const auto config = load_with_overrides(o);
    const auto values = parse_values(value_list);
    {
        ScenarioConfig probe = config;
        try {
            set_numeric_field(probe, axis, values.front());
        } catch (const ScenarioParseError& e) {
            throw UsageError("--axis: " + std::string(e.what()));
        }
    }
    const auto entries = sweep(config, axis, values);

    std::string axis_tag = axis;
    for (char& c : axis_tag) {
        if (c == '.') c = '_';
    }
    const std::string stem = file_stem(config) + "-" + axis_tag;
    std::vector<std::pair<fs::path, std::string>> files;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!entries[i].result) continue;
        const std::string csv = trace_csv(*entries[i].result);
        const std::string name = stem + "-" + std::to_string(i);
        files.emplace_back(name + ".csv", csv);
        if (o.svg) {
            files.emplace_back(name + ".svg",
                               svg_from_csv(csv, config.name + " " + axis + " = " + format_number(entries[i].value)));
        }
    }
    const std::string table = sweep_table_csv(axis, entries);
    files.emplace_back(stem + "-sweep.csv", table);
    write_files(o.out_dir, files);

    std::cout << table;
    bool any_failed = false;
    for (const auto& e : entries) any_failed = any_failed || !e.result;
    return any_failed ? kNumeric : kOk;
}

int cmd_basel(int n) {
    if (n < 1) throw UsageError("basel: n must be >= 1");
    const double s = partial_sum_basel(n);
    const double acc = richardson_accelerate(partial_sum_basel, n);
    const double limit = std::numbers::pi * std::numbers::pi / 6.0;
    std::printf("%-8s %-12s %-12s %-12s\n", "n", "S_n", "S_acc_n", "pi^2/6");
    std::printf("%-8d %-12.6f %-12.6f %-12.6f\n", n, s, acc, limit);
    return kOk;
}

int cmd_gamma(const DriftParams& p) {
    if (!(p.delta > 0.0)) throw UsageError("gamma: --delta must be positive");
    const auto r = gamma_criterion(p);
    std::cout << "gamma = " << format_number(r.gamma) << "\n"
              << "c_const = " << format_number(r.c_const) << "\n"
              << "alpha0 = " << format_number(r.alpha0) << "\n"
              << "horizon = " << format_number(r.horizon) << "\n"
              << "convergent = " << (r.convergent ? "true" : "false") << "\n";
    return kOk;
}

int cmd_presets_list() {
    const auto dir = preset_directory();
    const auto names = list_presets();
    if (names.empty()) {
        std::cerr << "no presets found in " << dir.string() << "\n";
        return kUsage;
    }
    for (const auto& n : names) std::cout << n << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Accelerated extremum-seeking simulator"};
    app.require_subcommand(1);

    RunOptions run_opts;
    auto add_common = [](CLI::App* sub, RunOptions& o) {
        sub->add_option("scenario", o.scenario, "Scenario file or preset name")->required();
        sub->add_option("--out", o.out_dir, "Output directory");
        sub->add_flag("--svg", o.svg, "Also write an SVG chart");
        sub->add_option("--seed", o.seed, "Override the noise seed");
        sub->add_option("--step-divisor", o.step_divisor, "Integration steps per period");
    };

    auto* run = app.add_subcommand("run", "Run one scenario");
    add_common(run, run_opts);

    RunOptions sweep_opts;
    std::string axis, values;
    auto* sw = app.add_subcommand("sweep", "Run a scenario over a list of parameter values");
    add_common(sw, sweep_opts);
    sw->add_option("--axis", axis, "Scenario key to vary, e.g. loop.delta")->required();
    sw->add_option("--values", values, "Comma-separated values")->required();

    int basel_n = 10;
    auto* basel = app.add_subcommand("basel", "Partial sums of 1/j^2 with and without acceleration");
    basel->add_option("n", basel_n, "Number of terms");

    DriftParams gamma_params;
    auto* gamma = app.add_subcommand("gamma", "Convergence criterion of the drift perturbation series");
    gamma->add_option("--epsilon", gamma_params.epsilon, "Dither amplitude");
    gamma->add_option("--delta", gamma_params.delta, "Drift rate");
    gamma->add_option("--q0", gamma_params.q0, "Drift amplitude");
    gamma->add_option("--period", gamma_params.period, "Dither period T");
    gamma->add_option("--z-init", gamma_params.z_init, "z(0) = 1 / (x(0) - L - q0)");

    auto* presets = app.add_subcommand("presets", "Bundled scenarios");
    presets->require_subcommand(1);
    auto* presets_list = presets->add_subcommand("list", "List preset names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*run) return cmd_run(run_opts);
        if (*sw) return cmd_sweep(sweep_opts, axis, values);
        if (*basel) return cmd_basel(basel_n);
        if (*gamma) return cmd_gamma(gamma_params);
        if (*presets_list) return cmd_presets_list();
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const ScenarioParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kParse;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumeric;
    }
    return kUsage;
}

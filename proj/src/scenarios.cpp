#include <esaccel/perturbation.hpp>
#include <esaccel/scenarios.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#ifndef ESACCEL_PRESET_DIR
#define ESACCEL_PRESET_DIR "presets"
#endif

namespace esaccel {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::string_view kScenarioExtension = ".scenario";

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void parse_fail(std::string_view source, std::string_view key, int line,
                             const std::string& msg) {
    std::ostringstream os;
    os << source << ":" << line << ": " << (key.empty() ? "" : "'" + std::string(key) + "': ") << msg;
    throw ScenarioParseError(std::string(key), line, os.str());
}

template <class T>
bool parse_number(std::string_view text, T& out) {
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc() && ptr == end;
}

std::string format_shortest(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string_view extraction_text(ExtractionMode m) {
    switch (m) {
        case ExtractionMode::instant_theta: return "instant-theta";
        case ExtractionMode::exact_theta: return "exact-theta";
        case ExtractionMode::averaged_theta: return "averaged-theta";
        case ExtractionMode::drift_zeroth: return "drift-zeroth";
        case ExtractionMode::drift_first: return "drift-first";
    }
    return "?";
}

bool is_drift_mode(ExtractionMode m) {
    return m == ExtractionMode::drift_zeroth || m == ExtractionMode::drift_first;
}

struct Context {
    std::string_view source;
    int line;
};

// Applies one key; `model` must already be final.
void assign(ScenarioConfig& c, std::string_view key, std::string_view value, const Context& ctx) {
    auto real = [&](double& field) {
        double v = 0.0;
        if (!parse_number(value, v) || !std::isfinite(v)) {
            parse_fail(ctx.source, key, ctx.line, "expected a real number, got '" + std::string(value) + "'");
        }
        field = v;
    };
    auto positive_int = [&](auto& field) {
        long long v = 0;
        if (!parse_number(value, v) || v <= 0 || v > std::numeric_limits<int>::max()) {
            parse_fail(ctx.source, key, ctx.line, "expected a positive integer, got '" + std::string(value) + "'");
        }
        field = static_cast<std::remove_reference_t<decltype(field)>>(v);
    };

    const bool drift = is_drift(c.model);
    if (key == "name") {
        if (value.empty()) parse_fail(ctx.source, key, ctx.line, "empty name");
        c.name = std::string(value);
        return;
    }
    if (key == "t_end") return real(c.t_end);
    if (key == "step_divisor") return positive_int(c.step_divisor);
    if (key == "sample_stride") return positive_int(c.sample_stride);

    if (key.starts_with("loop.")) {
        const auto field = key.substr(5);
        if (field == "epsilon") return real(drift ? c.drift.epsilon : c.loop.epsilon);
        if (field == "period") return real(drift ? c.drift.period : c.loop.period);
        if (field == "l_true") return real(drift ? c.drift.l_true : c.loop.l_true);
        if (!drift) {
            if (field == "b") return real(c.loop.b);
            if (field == "x_init") return real(c.loop.x_init);
        } else {
            if (field == "delta") return real(c.drift.delta);
            if (field == "q0") return real(c.drift.q0);
            if (field == "z_init") return real(c.drift.z_init);
        }
        parse_fail(ctx.source, key, ctx.line,
                   "not a field of the " + std::string(model_name(c.model)) + " loop");
    }

    if (key.starts_with("noise.")) {
        if (!c.noise) {
            parse_fail(ctx.source, key, ctx.line,
                       "noise settings need a noisy model (basic-noisy or drift-noisy)");
        }
        const auto field = key.substr(6);
        if (field == "amplitude") return real(c.noise->amplitude);
        if (field == "hold_interval") return real(c.noise->hold_interval);
        if (field == "offset") return real(c.noise->offset);
        if (field == "seed") {
            std::uint64_t v = 0;
            if (!parse_number(value, v)) {
                // Sweeps pass integral reals such as "42" or "1e3".
                double d = 0.0;
                if (!parse_number(value, d) || d < 0.0 || d != std::floor(d) || d >= 0x1p64) {
                    parse_fail(ctx.source, key, ctx.line, "expected an unsigned 64-bit integer");
                }
                v = static_cast<std::uint64_t>(d);
            }
            c.noise->seed = v;
            return;
        }
        parse_fail(ctx.source, key, ctx.line, "unknown noise field");
    }

    if (key == "extraction") {
        if (value == "instant-theta") {
            c.extraction = ExtractionMode::instant_theta;
        } else if (value == "exact-theta") {
            c.extraction = ExtractionMode::exact_theta;
        } else if (value == "drift-zeroth") {
            c.extraction = ExtractionMode::drift_zeroth;
        } else if (value == "drift-first") {
            c.extraction = ExtractionMode::drift_first;
        } else if (value.starts_with("averaged-theta(") && value.ends_with(")")) {
            const auto inner = trim(value.substr(15, value.size() - 16));
            int k = 0;
            if (!parse_number(inner, k) || k <= 0) {
                parse_fail(ctx.source, key, ctx.line, "averaged-theta needs a positive period count");
            }
            c.extraction = ExtractionMode::averaged_theta;
            c.average_periods = k;
        } else {
            parse_fail(ctx.source, key, ctx.line, "unknown extraction scheme '" + std::string(value) + "'");
        }
        if (is_drift_mode(c.extraction) != drift) {
            parse_fail(ctx.source, key, ctx.line,
                       "scheme does not apply to the " + std::string(model_name(c.model)) + " model");
        }
        return;
    }

    if (key == "outputs") {
        std::vector<std::string> cols;
        std::string_view rest = value;
        while (true) {
            const auto comma = rest.find(',');
            const auto item = trim(rest.substr(0, comma));
            const auto& known = known_columns();
            if (std::find(known.begin(), known.end(), item) == known.end()) {
                parse_fail(ctx.source, key, ctx.line, "unknown output column '" + std::string(item) + "'");
            }
            if (std::find(cols.begin(), cols.end(), item) != cols.end()) {
                parse_fail(ctx.source, key, ctx.line, "duplicate output column '" + std::string(item) + "'");
            }
            cols.emplace_back(item);
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
        c.outputs = std::move(cols);
        return;
    }

    parse_fail(ctx.source, key, ctx.line, "unknown key");
}

ExtractionSeries extract(const ScenarioConfig& c, const Trajectory& traj) {
    const ExtractionWindow window{0.0, std::nullopt, c.sample_stride};
    switch (c.extraction) {
        case ExtractionMode::instant_theta: return accelerate_basic(traj, window);
        case ExtractionMode::exact_theta:
            return accelerate_basic_fixed_theta(traj, c.loop.theta(), window);
        case ExtractionMode::averaged_theta: {
            const auto instant = accelerate_basic(traj, window);
            const double theta = average_theta(instant, c.loop.period, c.average_periods);
            return accelerate_basic_fixed_theta(traj, theta, window);
        }
        case ExtractionMode::drift_zeroth: return accelerate_drift_zeroth(traj, c.drift, window);
        case ExtractionMode::drift_first: return accelerate_drift_first(traj, c.drift, window);
    }
    throw std::logic_error("unhandled extraction mode");
}

Trajectory simulate(const ScenarioConfig& c) {
    if (is_drift(c.model)) return simulate_drift(c.drift, c.noise, c.t_end, c.step_divisor);
    return simulate_basic(c.loop, c.noise, c.t_end, c.step_divisor);
}

}  // namespace

std::string_view model_name(Model m) noexcept {
    switch (m) {
        case Model::basic: return "basic";
        case Model::basic_noisy: return "basic-noisy";
        case Model::drift: return "drift";
        case Model::drift_noisy: return "drift-noisy";
    }
    return "?";
}

bool is_drift(Model m) noexcept { return m == Model::drift || m == Model::drift_noisy; }

const std::vector<std::string>& known_columns() {
    static const std::vector<std::string> cols{"t",     "x_classical", "g",        "theta_hat",
                                               "l_hat", "valid",       "residual", "drift"};
    return cols;
}

const std::vector<std::string>& default_columns() {
    static const std::vector<std::string> cols{"t", "x_classical", "g", "theta_hat", "l_hat", "valid"};
    return cols;
}

int ScenarioConfig::stencil_periods() const noexcept {
    switch (extraction) {
        case ExtractionMode::drift_zeroth: return 2;
        case ExtractionMode::drift_first: return 5;
        default: return 3;
    }
}

void ScenarioConfig::validate() const {
    if (is_drift(model)) {
        drift.validate();
    } else {
        loop.validate();
    }
    const bool noisy = model == Model::basic_noisy || model == Model::drift_noisy;
    if (noisy != noise.has_value()) throw std::invalid_argument("noise settings do not match the model");
    if (noise) noise->validate();
    if (is_drift_mode(extraction) != is_drift(model)) {
        throw std::invalid_argument("extraction scheme does not match the model");
    }
    if (step_divisor <= 0 || sample_stride == 0) {
        throw std::invalid_argument("step_divisor and sample_stride must be positive");
    }
    // Samples up to t + stencil T plus one period of extraction grid.
    const double need = (stencil_periods() + 1) * period();
    if (!(t_end >= need - 1e-12 * need)) {
        std::ostringstream os;
        os << "t_end = " << t_end << " is shorter than the " << stencil_periods() + 1
           << " periods this scheme needs (" << need << ")";
        throw std::invalid_argument(os.str());
    }
    if (outputs.empty()) throw std::invalid_argument("no output columns");
}

namespace {

ScenarioConfig parse_impl(std::string_view text, std::string_view source, bool& named) {
    struct Entry {
        std::string key;
        std::string value;
        int line;
    };
    std::vector<Entry> entries;
    int line_no = 0;
    std::string_view rest = text;
    while (!rest.empty()) {
        ++line_no;
        const auto nl = rest.find('\n');
        std::string_view line = rest.substr(0, nl);
        rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) parse_fail(source, "", line_no, "expected 'key = value'");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) parse_fail(source, "", line_no, "missing key");
        if (value.empty()) parse_fail(source, key, line_no, "missing value");
        for (const auto& e : entries) {
            if (e.key == key) {
                parse_fail(source, key, line_no, "duplicate key (first set on line " + std::to_string(e.line) + ")");
            }
        }
        entries.push_back({std::string(key), std::string(value), line_no});
    }

    ScenarioConfig c;
    const auto model_it = std::find_if(entries.begin(), entries.end(), [](const Entry& e) { return e.key == "model"; });
    if (model_it == entries.end()) parse_fail(source, "model", 0, "missing required key");
    const auto& mv = model_it->value;
    if (mv == "basic") {
        c.model = Model::basic;
    } else if (mv == "basic-noisy") {
        c.model = Model::basic_noisy;
    } else if (mv == "drift") {
        c.model = Model::drift;
    } else if (mv == "drift-noisy") {
        c.model = Model::drift_noisy;
    } else {
        parse_fail(source, "model", model_it->line, "unknown model '" + mv + "'");
    }
    if (c.model == Model::basic_noisy || c.model == Model::drift_noisy) c.noise = NoiseSpec{};
    c.extraction = is_drift(c.model) ? ExtractionMode::drift_zeroth : ExtractionMode::instant_theta;
    if (is_drift(c.model)) c.t_end = 36.0;

    named = false;
    for (const auto& e : entries) {
        if (e.key == "model") continue;
        named = named || e.key == "name";
        assign(c, e.key, e.value, {source, e.line});
    }
    try {
        c.validate();
    } catch (const std::invalid_argument& err) {
        const bool horizon = std::string_view(err.what()).starts_with("t_end");
        int line = 0;
        for (const auto& e : entries) {
            if (horizon && e.key == "t_end") line = e.line;
        }
        parse_fail(source, horizon ? "t_end" : "", line, err.what());
    }
    return c;
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view text, std::string_view source) {
    bool named = false;
    return parse_impl(text, source, named);
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioParseError("", 0, "cannot open scenario file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    bool named = false;
    auto config = parse_impl(buf.str(), path.string(), named);
    if (!named) config.name = path.stem().string();
    return config;
}

std::string format_scenario(const ScenarioConfig& c) {
    std::ostringstream os;
    os << "name = " << c.name << "\n";
    os << "model = " << model_name(c.model) << "\n";
    if (is_drift(c.model)) {
        os << "loop.epsilon = " << format_shortest(c.drift.epsilon) << "\n"
           << "loop.delta = " << format_shortest(c.drift.delta) << "\n"
           << "loop.q0 = " << format_shortest(c.drift.q0) << "\n"
           << "loop.period = " << format_shortest(c.drift.period) << "\n"
           << "loop.l_true = " << format_shortest(c.drift.l_true) << "\n"
           << "loop.z_init = " << format_shortest(c.drift.z_init) << "\n";
    } else {
        os << "loop.epsilon = " << format_shortest(c.loop.epsilon) << "\n"
           << "loop.b = " << format_shortest(c.loop.b) << "\n"
           << "loop.period = " << format_shortest(c.loop.period) << "\n"
           << "loop.l_true = " << format_shortest(c.loop.l_true) << "\n"
           << "loop.x_init = " << format_shortest(c.loop.x_init) << "\n";
    }
    if (c.noise) {
        os << "noise.amplitude = " << format_shortest(c.noise->amplitude) << "\n"
           << "noise.hold_interval = " << format_shortest(c.noise->hold_interval) << "\n"
           << "noise.offset = " << format_shortest(c.noise->offset) << "\n"
           << "noise.seed = " << c.noise->seed << "\n";
    }
    os << "t_end = " << format_shortest(c.t_end) << "\n"
       << "step_divisor = " << c.step_divisor << "\n"
       << "sample_stride = " << c.sample_stride << "\n"
       << "extraction = " << extraction_text(c.extraction);
    if (c.extraction == ExtractionMode::averaged_theta) os << "(" << c.average_periods << ")";
    os << "\noutputs = ";
    for (std::size_t i = 0; i < c.outputs.size(); ++i) os << (i ? ", " : "") << c.outputs[i];
    os << "\n";
    return os.str();
}

std::filesystem::path preset_directory() {
    if (const char* env = std::getenv("ES_ACCEL_PRESETS"); env && *env) return env;
    return ESACCEL_PRESET_DIR;
}

std::vector<std::string> list_presets() {
    std::vector<std::string> names;
    const auto dir = preset_directory();
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
        if (entry.is_regular_file() && entry.path().extension() == kScenarioExtension) {
            names.push_back(entry.path().stem().string());
        }
    }
    std::sort(names.begin(), names.end());
    return names;
}

std::filesystem::path resolve_scenario(std::string_view arg) {
    namespace fs = std::filesystem;
    const fs::path direct(arg);
    std::error_code ec;
    if (fs::is_regular_file(direct, ec)) return direct;
    fs::path with_ext = direct;
    with_ext += kScenarioExtension;
    if (fs::is_regular_file(with_ext, ec)) return with_ext;
    fs::path preset = preset_directory() / direct.filename();
    preset += kScenarioExtension;
    if (fs::is_regular_file(preset, ec)) return preset;
    throw std::invalid_argument("no scenario file or preset named '" + std::string(arg) + "'");
}

void set_numeric_field(ScenarioConfig& config, std::string_view key, double value) {
    if (key == "model" || key == "name" || key == "extraction" || key == "outputs") {
        throw ScenarioParseError(std::string(key), 0, "'" + std::string(key) + "' is not a numeric field");
    }
    assign(config, key, format_shortest(value), {"sweep", 0});
}

RunSummary summarize(const ScenarioConfig& c, const Trajectory& traj, const ExtractionSeries& s) {
    RunSummary r;
    const double l_true = c.l_true();
    r.theta_exact = is_drift(c.model) ? kNaN : c.loop.theta();
    if (is_drift(c.model)) r.gamma = gamma_criterion(c.drift).gamma;

    r.theta_extracted_final = kNaN;
    std::size_t clamped = 0, valid = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!std::isnan(s.theta_hat[i])) r.theta_extracted_final = s.theta_hat[i];
        clamped += s.clamped_flags[i] ? 1 : 0;
        valid += s.valid(i) ? 1 : 0;
    }
    const double n = static_cast<double>(std::max<std::size_t>(s.size(), 1));
    r.clamp_fraction = static_cast<double>(clamped) / n;
    r.valid_fraction = static_cast<double>(valid) / n;

    r.l_residual_max_tail = kNaN;
    r.classical_residual_max_tail = 0.0;
    if (s.size() > 0) {
        const double t_first = s.t_grid.front();
        const double t_last = s.t_grid.back();
        const double tail_start = t_first + (1.0 - kTailFraction) * (t_last - t_first);
        bool any_valid = false;
        double worst = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s.t_grid[i] < tail_start) continue;
            r.classical_residual_max_tail =
                std::max(r.classical_residual_max_tail, std::abs(traj.at(s.t_grid[i]) - l_true));
            if (s.valid(i)) {
                any_valid = true;
                worst = std::max(worst, std::abs(s.l_hat[i] - l_true));
            }
        }
        if (any_valid) r.l_residual_max_tail = worst;
    }
    const double acc = r.l_residual_max_tail;
    const double cls = r.classical_residual_max_tail;
    r.dominant = !std::isnan(acc) && acc < kDominanceFactor * cls;
    r.breakdown = std::isnan(acc) || acc >= kBreakdownFactor * cls;
    return r;
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
    try {
        config.validate();
        auto traj = simulate(config);
        auto series = extract(config, traj);
        auto summary = summarize(config, traj, series);
        return {config, std::move(traj), std::move(series), summary};
    } catch (const Error& e) {
        std::throw_with_nested(ScenarioRunError(config.name, "scenario '" + config.name + "': " + e.what()));
    } catch (const std::invalid_argument& e) {
        std::throw_with_nested(ScenarioRunError(config.name, "scenario '" + config.name + "': " + e.what()));
    }
}

std::vector<SweepEntry> sweep(const ScenarioConfig& base, std::string_view axis,
                              const std::vector<double>& values) {
    std::vector<SweepEntry> out(values.size());
    if (values.empty()) return out;
    {
        ScenarioConfig probe = base;
        set_numeric_field(probe, axis, values.front());  // rejects bad axes up front
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < values.size(); i = next++) {
            out[i].value = values[i];
            try {
                ScenarioConfig variant = base;
                set_numeric_field(variant, axis, values[i]);
                out[i].result = run_scenario(variant);
            } catch (const std::exception& e) {
                out[i].error = e.what();
            }
        }
    };
    const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t n_threads = std::min(hw, values.size());
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    return out;  // jthreads join on scope exit before the return value is read
}

std::vector<NoiseLevelReport> noise_breakdown_study(const ScenarioConfig& base) {
    if (base.model != Model::basic_noisy || !base.noise) {
        throw std::invalid_argument("noise_breakdown_study: needs a basic-noisy scenario");
    }
    const double eps = base.loop.epsilon;
    const std::vector<std::pair<std::string, double>> levels{
        {"eps^(5/2)", std::pow(eps, 2.5)}, {"eps^2", eps * eps}, {"eps", eps}};
    std::vector<NoiseLevelReport> reports;
    for (const auto& [label, amplitude] : levels) {
        ScenarioConfig c = base;
        c.noise->amplitude = amplitude;
        c.extraction = ExtractionMode::instant_theta;
        c.validate();
        const auto traj = simulate(c);
        NoiseLevelReport rep{label, amplitude, {}, {}};
        const auto instant = extract(c, traj);
        rep.instant = summarize(c, traj, instant);
        for (int k = 1; k <= 3; ++k) {
            ScenarioConfig ck = c;
            ck.extraction = ExtractionMode::averaged_theta;
            ck.average_periods = k;
            const double theta = average_theta(instant, c.loop.period, k);
            const auto series = accelerate_basic_fixed_theta(
                traj, theta, ExtractionWindow{0.0, std::nullopt, c.sample_stride});
            rep.averaged.push_back(summarize(ck, traj, series));
        }
        reports.push_back(std::move(rep));
    }
    return reports;
}

}  // namespace esaccel

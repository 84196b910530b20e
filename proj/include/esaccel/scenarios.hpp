#pragma once

// Declarative experiment definitions and their execution.
//
// A scenario file is a flat list of `key = value` lines; `#` starts a
// comment. Nested fields use dotted keys:
//
//   model        = basic | basic-noisy | drift | drift-noisy
//   loop.*       = epsilon b period l_true x_init        (basic models)
//                  epsilon delta q0 period l_true z_init (drift models)
//   noise.*      = amplitude hold_interval offset seed   (noisy models only)
//   t_end, step_divisor, sample_stride
//   extraction   = instant-theta | exact-theta | averaged-theta(k)
//                | drift-zeroth | drift-first
//   outputs      = comma-separated trace columns
//   name         = label used for output files
//
// Unknown keys, keys that do not apply to the model, duplicates and
// malformed values are rejected with the key and line number.

#include <esaccel/dynamics.hpp>
#include <esaccel/extraction.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace esaccel {

enum class Model { basic, basic_noisy, drift, drift_noisy };
enum class ExtractionMode { instant_theta, exact_theta, averaged_theta, drift_zeroth, drift_first };

[[nodiscard]] std::string_view model_name(Model m) noexcept;
[[nodiscard]] bool is_drift(Model m) noexcept;

/// Every trace column the runner can emit.
[[nodiscard]] const std::vector<std::string>& known_columns();
/// Columns written when a scenario does not list its own.
[[nodiscard]] const std::vector<std::string>& default_columns();

struct ScenarioConfig {
    std::string name = "scenario";
    Model model = Model::basic;
    LoopParams loop;
    DriftParams drift;
    std::optional<NoiseSpec> noise;  // set exactly for the noisy models
    double t_end = 39.0;
    int step_divisor = kDefaultStepDivisor;
    std::size_t sample_stride = 1;   // extraction grid = every n-th integration step
    ExtractionMode extraction = ExtractionMode::instant_theta;
    int average_periods = 3;         // k of averaged-theta(k)
    std::vector<std::string> outputs = default_columns();

    [[nodiscard]] double period() const noexcept { return is_drift(model) ? drift.period : loop.period; }
    [[nodiscard]] double l_true() const noexcept { return is_drift(model) ? drift.l_true : loop.l_true; }
    /// Number of whole periods the extraction stencil reaches ahead.
    [[nodiscard]] int stencil_periods() const noexcept;
    /// Throws std::invalid_argument on inconsistent settings.
    void validate() const;
};

/// Parses scenario text; `source` labels diagnostics. Throws ScenarioParseError.
[[nodiscard]] ScenarioConfig parse_scenario(std::string_view text, std::string_view source = "<text>");
[[nodiscard]] ScenarioConfig load_scenario(const std::filesystem::path& path);
/// Serialises a config back to scenario text (round-trips through parse_scenario).
[[nodiscard]] std::string format_scenario(const ScenarioConfig& config);

/// ES_ACCEL_PRESETS if set, else the bundled preset directory.
[[nodiscard]] std::filesystem::path preset_directory();
/// Preset names (file stems) in preset_directory(), sorted.
[[nodiscard]] std::vector<std::string> list_presets();
/// A path to an existing file, the same with ".scenario" appended, or a preset name.
/// Throws std::invalid_argument when none exists.
[[nodiscard]] std::filesystem::path resolve_scenario(std::string_view arg);

/// Assigns a numeric field addressed by its scenario key (e.g. "loop.delta").
void set_numeric_field(ScenarioConfig& config, std::string_view key, double value);

struct RunSummary {
    double theta_exact = 0.0;            // NaN for the drift models
    double theta_extracted_final = 0.0;  // theta used at the last valid grid point
    double l_residual_max_tail = 0.0;    // max |L_hat - L| over the last quarter of the grid
    double classical_residual_max_tail = 0.0;  // max |x - L| over the same points
    std::optional<double> gamma;         // drift models only
    double clamp_fraction = 0.0;
    double valid_fraction = 0.0;
    bool dominant = false;   // accelerated residual < 0.05 x classical
    bool breakdown = false;  // accelerated residual >= 0.5 x classical (or no valid tail)
};

inline constexpr double kDominanceFactor = 0.05;
inline constexpr double kBreakdownFactor = 0.5;
inline constexpr double kTailFraction = 0.25;

struct ScenarioResult {
    ScenarioConfig config;
    Trajectory trajectory;
    ExtractionSeries series;
    RunSummary summary;
};

/// Simulate, extract and summarise. Failures surface as ScenarioRunError
/// with the library error nested inside.
[[nodiscard]] ScenarioResult run_scenario(const ScenarioConfig& config);

/// Summary statistics of an extraction series against trajectory samples.
[[nodiscard]] RunSummary summarize(const ScenarioConfig& config, const Trajectory& traj,
                                   const ExtractionSeries& series);

struct SweepEntry {
    double value;
    std::optional<ScenarioResult> result;
    std::string error;  // empty on success
};

/// One run per value of `axis`, possibly in parallel; results keep the order
/// of `values` and failures are recorded per entry.
[[nodiscard]] std::vector<SweepEntry> sweep(const ScenarioConfig& base, std::string_view axis,
                                            const std::vector<double>& values);

struct NoiseLevelReport {
    std::string label;     // "eps^(5/2)", "eps^2", "eps"
    double amplitude;
    RunSummary instant;
    std::vector<RunSummary> averaged;  // k = 1, 2, 3
};

/// The noisy basic loop at N0 in {eps^(5/2), eps^2, eps}, each with instant
/// and averaged theta.
[[nodiscard]] std::vector<NoiseLevelReport> noise_breakdown_study(const ScenarioConfig& base);

}  // namespace esaccel

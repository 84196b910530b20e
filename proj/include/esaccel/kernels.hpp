#pragma once

// Batch extraction kernels over period-shifted sample columns.
//
// Every kernel has a scalar reference implementation and an AVX2 variant
// that evaluates the same expressions in the same order without fused
// multiply-add, so both produce bit-identical output. The dispatching entry
// points pick the variant once at startup from CPUID; tests may pin one.
//
// Invalid results are written as quiet NaN; kernels never throw.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace esaccel::kernels {

/// Denominators at or below this fraction of the sample magnitude count as zero.
inline constexpr double kDegeneracyTolerance = 1e-12;
inline constexpr double kGUpper = 1.0 / 3.0;
inline constexpr double kGLower = -1.0;

enum class Isa { scalar, avx2 };

[[nodiscard]] std::string_view isa_name(Isa isa) noexcept;
/// Best variant this CPU can execute.
[[nodiscard]] Isa detected_isa() noexcept;
/// Variant the dispatchers currently use.
[[nodiscard]] Isa active_isa() noexcept;
/// Pin the dispatchers to `isa`; requests the CPU cannot honour fall back to scalar.
void set_active_isa(Isa isa) noexcept;

struct QuadrupleColumns {
    std::span<const double> x0, x1, x2, x3;
};

struct BasicExtractionOut {
    std::span<double> g;               // clamped cross-ratio
    std::span<std::uint8_t> clamped;   // 1 when g was cut to [-1, 1/3]
    std::span<double> theta;           // NaN when clamped or outside (0, 1)
    std::span<double> l;               // NaN when theta or the denominator is invalid
};

// All columns must have equal length; output spans at least that long.
void extract_basic(const QuadrupleColumns& in, const BasicExtractionOut& out);
void extract_l_fixed_theta(std::span<const double> x0, std::span<const double> x1,
                           std::span<const double> x2, double theta, std::span<double> l);
void extract_drift_zeroth(std::span<const double> h0, std::span<const double> h1,
                          std::span<const double> h2, double growth, std::span<double> l);

namespace scalar {
void extract_basic(const QuadrupleColumns& in, const BasicExtractionOut& out);
void extract_l_fixed_theta(std::span<const double> x0, std::span<const double> x1,
                           std::span<const double> x2, double theta, std::span<double> l);
void extract_drift_zeroth(std::span<const double> h0, std::span<const double> h1,
                          std::span<const double> h2, double growth, std::span<double> l);
}  // namespace scalar

namespace avx2 {
[[nodiscard]] bool compiled() noexcept;
void extract_basic(const QuadrupleColumns& in, const BasicExtractionOut& out);
void extract_l_fixed_theta(std::span<const double> x0, std::span<const double> x1,
                           std::span<const double> x2, double theta, std::span<double> l);
void extract_drift_zeroth(std::span<const double> h0, std::span<const double> h1,
                          std::span<const double> h2, double growth, std::span<double> l);
}  // namespace avx2

}  // namespace esaccel::kernels

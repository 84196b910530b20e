#include <esaccel/kernels.hpp>

#include <atomic>

namespace esaccel::kernels {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Isa probe() noexcept { return (avx2::compiled() && cpu_has_avx2()) ? Isa::avx2 : Isa::scalar; }

std::atomic<Isa>& active() noexcept {
    static std::atomic<Isa> isa{probe()};
    return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::avx2: return "avx2";
        case Isa::scalar: break;
    }
    return "scalar";
}

Isa detected_isa() noexcept {
    static const Isa isa = probe();
    return isa;
}

Isa active_isa() noexcept { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) noexcept {
    if (isa == Isa::avx2 && detected_isa() != Isa::avx2) isa = Isa::scalar;
    active().store(isa, std::memory_order_relaxed);
}

void extract_basic(const QuadrupleColumns& in, const BasicExtractionOut& out) {
    if (active_isa() == Isa::avx2) {
        avx2::extract_basic(in, out);
    } else {
        scalar::extract_basic(in, out);
    }
}

void extract_l_fixed_theta(std::span<const double> x0, std::span<const double> x1,
                           std::span<const double> x2, double theta, std::span<double> l) {
    if (active_isa() == Isa::avx2) {
        avx2::extract_l_fixed_theta(x0, x1, x2, theta, l);
    } else {
        scalar::extract_l_fixed_theta(x0, x1, x2, theta, l);
    }
}

void extract_drift_zeroth(std::span<const double> h0, std::span<const double> h1,
                          std::span<const double> h2, double growth, std::span<double> l) {
    if (active_isa() == Isa::avx2) {
        avx2::extract_drift_zeroth(h0, h1, h2, growth, l);
    } else {
        scalar::extract_drift_zeroth(h0, h1, h2, growth, l);
    }
}

}  // namespace esaccel::kernels

#include "geoval/shift.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace geoval::shift {

namespace {

constexpr double pi = std::numbers::pi;

// Geometry of the two 3-sigma circles with sigma_s = 1, mu_s = 0:
// radii R = 3 and r = 3*tau, centers (0,0) and mu_t*(1,1), so the center
// distance is sqrt(2)*mu_t = 6*delta.
struct Circles {
    double R, r, d;
    explicit Circles(const ShiftSpec& s) : R(3.0), r(3.0 * s.tau), d(6.0 * s.delta) {}
};

// Circle-circle lens area; only valid in the partial configuration.
double lens_area(const Circles& c) {
    const double c1_arg = (c.d * c.d + c.R * c.R - c.r * c.r) / (2.0 * c.d * c.R);
    const double c2_arg = (c.d * c.d + c.r * c.r - c.R * c.R) / (2.0 * c.d * c.r);
    const double c1 = c.R * c.R * std::acos(std::clamp(c1_arg, -1.0, 1.0));
    const double c2 = c.r * c.r * std::acos(std::clamp(c2_arg, -1.0, 1.0));
    const double sq = (c.R + c.r) * (c.R + c.r) - c.d * c.d;
    const double sq2 = c.d * c.d - (c.R - c.r) * (c.R - c.r);
    if (sq < 0.0 || sq2 < 0.0)
        throw std::logic_error("lens_area: called outside the partial configuration");
    const double c3 = 0.5 * std::sqrt(sq * sq2);
    return c1 + c2 - c3;
}

// |A intersect B| across all three configurations.
double intersection_area(const ShiftSpec& shift) {
    const Circles c(shift);
    switch (classify(shift)) {
        case ShiftConfig::inside:
            return pi * c.r * c.r;  // target circle fully contained
        case ShiftConfig::outside:
            return 0.0;
        case ShiftConfig::partial:
            return lens_area(c);
    }
    return 0.0;
}

}  // namespace

ShiftConfig classify(const ShiftSpec& shift) {
    if (2.0 * shift.delta <= 1.0 - shift.tau) return ShiftConfig::inside;
    if (2.0 * shift.delta >= 1.0 + shift.tau) return ShiftConfig::outside;
    return ShiftConfig::partial;
}

double kl(const ShiftSpec& shift) {
    if (!(shift.tau > 0.0)) throw std::invalid_argument("kl: tau must be > 0");
    const double d = shift.delta, t = shift.tau;
    return d * d + t * t - std::log(t * t * t * t) - 1.0;
}

double jaccard(const ShiftSpec& shift) {
    const Circles c(shift);
    const double area_a = pi * c.R * c.R;
    const double area_b = pi * c.r * c.r;
    const double inter = intersection_area(shift);
    const double uni = area_a + area_b - inter;
    // clamp away sub-ulp excursions at the configuration boundaries
    return std::clamp(1.0 - inter / uni, 0.0, 1.0);
}

double novelty(const ShiftSpec& shift) {
    const Circles c(shift);
    const double area_b = pi * c.r * c.r;
    const double inter = intersection_area(shift);
    // N(B/A) = (|B - A∩B| - |A∩B|) / |B|, mapped from [-1, 1] to [0, 1].
    const double n = (area_b - 2.0 * inter) / area_b;
    return std::clamp((n + 1.0) / 2.0, 0.0, 1.0);
}

std::string to_string(ShiftConfig config) {
    switch (config) {
        case ShiftConfig::inside: return "inside";
        case ShiftConfig::partial: return "partial";
        case ShiftConfig::outside: return "outside";
    }
    return "?";
}

}  // namespace geoval::shift

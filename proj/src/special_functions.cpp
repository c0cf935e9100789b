#include "genefilter/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace genefilter::stats {

namespace {

// Continued fraction for I_x(a, b), modified Lentz evaluation.
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIterations = 1000;
    constexpr double kEpsilon = 1e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEpsilon) return h;
    }
    return h;
}

// I_x(a, b) given both x and y = 1 - x, so callers can supply y without cancellation.
double incomplete_beta_xy(double a, double b, double x, double y) {
    if (x <= 0.0) return 0.0;
    if (y <= 0.0) return 1.0;
    const double log_front = a * std::log(x) + b * std::log(y) - log_beta(a, b);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - std::exp(log_front) * beta_continued_fraction(b, a, y) / b;
}

} // namespace

double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("incomplete_beta: shape parameters must be positive");
    if (std::isnan(x) || x < 0.0 || x > 1.0) throw std::domain_error("incomplete_beta: x outside [0, 1]");
    return incomplete_beta_xy(a, b, x, 1.0 - x);
}

double student_t_two_sided(double t, double dof) {
    if (!(dof > 0.0)) throw std::domain_error("student_t_two_sided: degrees of freedom must be positive");
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return 0.0;
    const double t2 = t * t;
    const double p = incomplete_beta_xy(0.5 * dof, 0.5, dof / (dof + t2), t2 / (dof + t2));
    return std::clamp(p, 0.0, 1.0);
}

double f_upper_tail(double f, double d1, double d2) {
    if (!(d1 > 0.0) || !(d2 > 0.0)) throw std::domain_error("f_upper_tail: degrees of freedom must be positive");
    if (std::isnan(f)) return std::numeric_limits<double>::quiet_NaN();
    if (f <= 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    const double denom = d2 + d1 * f;
    return std::clamp(incomplete_beta_xy(0.5 * d2, 0.5 * d1, d2 / denom, d1 * f / denom), 0.0, 1.0);
}

double normal_two_sided(double z) {
    if (std::isnan(z)) return std::numeric_limits<double>::quiet_NaN();
    return std::clamp(std::erfc(std::fabs(z) / std::sqrt(2.0)), 0.0, 1.0);
}

} // namespace genefilter::stats

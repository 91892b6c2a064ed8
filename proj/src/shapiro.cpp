// Shapiro-Wilk W and its p-value after Royston (AS R94).
#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "newsrank/error.hpp"
#include "newsrank/stats.hpp"

namespace newsrank::stats {

namespace {

template <std::size_t N>
double poly(const std::array<double, N>& c, double x) {
    double r = c[N - 1];
    for (std::size_t i = N - 1; i-- > 0;) r = r * x + c[i];
    return r;
}

constexpr std::array<double, 2> kG{-2.273, 0.459};
constexpr std::array<double, 6> kC1{0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
constexpr std::array<double, 6> kC2{0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
constexpr std::array<double, 4> kC3{0.544, -0.39978, 0.025054, -6.714e-4};
constexpr std::array<double, 4> kC4{1.3822, -0.77857, 0.062767, -0.0020322};
constexpr std::array<double, 4> kC5{-1.5861, -0.31082, -0.083751, 0.0038915};
constexpr std::array<double, 3> kC6{-0.4803, -0.082676, 0.0030302};

// Positive half of the antisymmetric coefficient vector, a_1 >= a_2 >= ...
std::vector<double> coefficients(std::size_t n) {
    const std::size_t half = n / 2;
    std::vector<double> a(half);
    if (n == 3) {
        a[0] = std::sqrt(0.5);
        return a;
    }
    const boost::math::normal std_normal;
    const double an = static_cast<double>(n);
    std::vector<double> m(half);
    double summ2 = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
        m[i] = boost::math::quantile(std_normal, (static_cast<double>(i + 1) - 0.375) / (an + 0.25));
        summ2 += m[i] * m[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    const double a1 = poly(kC1, rsn) - m[0] / ssumm2;

    std::size_t first = 1;
    double fac = 0.0;
    if (n > 5) {
        first = 2;
        const double a2 = -m[1] / ssumm2 + poly(kC2, rsn);
        fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
        a[1] = a2;
    } else {
        fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
    }
    a[0] = a1;
    for (std::size_t i = first; i < half; ++i) a[i] = -m[i] / fac;
    return a;
}

} // namespace

ShapiroResult shapiro_wilk(std::span<const double> sample) {
    const std::size_t n = sample.size();
    if (n < 3) throw InvalidArgument("Shapiro-Wilk needs at least 3 values");
    if (n > 5000) throw InvalidArgument("Shapiro-Wilk supports at most 5000 values");
    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());
    const double range = x.back() - x.front();
    if (!(range > 0.0)) throw InvalidArgument("Shapiro-Wilk undefined for a constant sample");

    const double centre = mean(x);
    double ss = 0.0;
    for (auto& v : x) {
        v = (v - centre) / range;
        ss += v * v;
    }
    const std::vector<double> a = coefficients(n);
    double num = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) num += a[i] * (x[n - 1 - i] - x[i]);

    ShapiroResult r;
    r.w = std::min(1.0, num * num / ss);
    if (n == 3) {
        r.w = std::max(r.w, 0.75);
        const double pi6 = 6.0 / M_PI;
        const double stqr = M_PI / 3.0;
        r.p_value = std::clamp(pi6 * (std::asin(std::sqrt(r.w)) - stqr), 0.0, 1.0);
        return r;
    }
    if (r.w >= 1.0) {
        r.p_value = 1.0;
        return r;
    }

    const double an = static_cast<double>(n);
    double y = std::log(1.0 - r.w);
    double mu = 0.0;
    double sigma = 1.0;
    if (n <= 11) {
        const double gamma = poly(kG, an);
        if (y >= gamma) {
            r.p_value = 1e-99;
            return r;
        }
        y = -std::log(gamma - y);
        mu = poly(kC3, an);
        sigma = std::exp(poly(kC4, an));
    } else {
        const double ln = std::log(an);
        mu = poly(kC5, ln);
        sigma = std::exp(poly(kC6, ln));
    }
    r.p_value = std::clamp(0.5 * std::erfc((y - mu) / (sigma * std::sqrt(2.0))), 0.0, 1.0);
    return r;
}

} // namespace newsrank::stats

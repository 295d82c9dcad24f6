#include "rswave/noise.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "rswave/error.hpp"

namespace rswave {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t path_seed(std::uint64_t base, std::uint64_t index) {
    return mix64(mix64(base) + index);
}

namespace {
double to_unit_open(std::uint64_t bits) {
    // 53 random bits mapped into (0, 1), never 0.
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}
}  // namespace

double standard_normal(std::uint64_t seed, std::uint64_t counter) {
    const std::uint64_t key = mix64(seed ^ 0x632be59bd9b4e019ULL);
    const double u1 = to_unit_open(mix64(key + 2 * counter));
    const double u2 = to_unit_open(mix64(key + 2 * counter + 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double BrownianPath::value_at(int k) const {
    double w = 0.0;
    for (int i = 0; i < k; ++i) w += increments[i];
    return w;
}

BrownianPath sample_path(std::uint64_t seed, double dt, int steps) {
    if (steps < 1) throw ContractViolation("sample_path: steps must be at least 1");
    if (!(dt > 0.0)) throw ContractViolation("sample_path: dt must be positive");
    BrownianPath p;
    p.seed = seed;
    p.dt = dt;
    p.increments.resize(static_cast<std::size_t>(steps));
    const double s = std::sqrt(dt);
    for (int k = 0; k < steps; ++k) p.increments[k] = s * standard_normal(seed, static_cast<std::uint64_t>(k));
    return p;
}

double IncrementCursor::take(int k) {
    if (k != next_)
        throw ContractViolation("increment " + std::to_string(k) + " requested while step " +
                                std::to_string(next_) + " is pending");
    ++next_;
    if (!path_) return 0.0;
    if (k >= path_->steps()) throw ContractViolation("increment beyond the end of the path");
    return path_->increments[k];
}

void RunningStats::add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
}

void RunningStats::merge(const RunningStats& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
        *this = o;
        return;
    }
    const double na = static_cast<double>(n_), nb = static_cast<double>(o.n_);
    const double n = na + nb;
    const double d = o.mean_ - mean_;
    mean_ += d * nb / n;
    m2_ += o.m2_ + d * d * na * nb / n;
    n_ += o.n_;
}

double RunningStats::variance() const {
    return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
}

McEstimate to_estimate(const RunningStats& s) {
    McEstimate e;
    e.mean = s.mean();
    e.count = s.count();
    e.ci_halfwidth = s.count() < 2 ? 0.0 : 1.96 * std::sqrt(s.variance() / static_cast<double>(s.count()));
    return e;
}

McEstimate mc_mean(std::span<const double> values) {
    if (values.size() < 2) throw ContractViolation("mc_mean needs at least two samples");
    RunningStats s;
    for (double v : values) s.add(v);
    return to_estimate(s);
}

}  // namespace rswave

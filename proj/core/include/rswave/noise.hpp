#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rswave {

/// Brownian increments of one path; increment k covers [t_k, t_{k+1}].
struct BrownianPath {
    std::uint64_t seed = 0;
    double dt = 0.0;
    std::vector<double> increments;

    int steps() const { return static_cast<int>(increments.size()); }
    /// W(t_k) by summation of the first k increments.
    double value_at(int k) const;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Seed of path `index` in an ensemble with base seed `base`. Distinct indices
/// give distinct seeds because mix64 is a bijection.
std::uint64_t path_seed(std::uint64_t base, std::uint64_t index);

/// Counter-based standard normal draw for (seed, counter).
double standard_normal(std::uint64_t seed, std::uint64_t counter);

/// Throws ContractViolation unless steps >= 1 and dt > 0.
BrownianPath sample_path(std::uint64_t seed, double dt, int steps);

/// Enforces the adapted reading order of increments: step k may only be read
/// after steps 0..k-1. Violations throw ContractViolation.
class IncrementCursor {
public:
    explicit IncrementCursor(const BrownianPath* path) : path_(path) {}

    /// Increment for step k; zero when no path is attached.
    double take(int k);
    int next_step() const { return next_; }

private:
    const BrownianPath* path_;
    int next_ = 0;
};

/// Streaming mean/variance accumulator (Welford) with pairwise merge.
class RunningStats {
public:
    void add(double x);
    void merge(const RunningStats& other);

    std::uint64_t count() const { return n_; }
    double mean() const { return mean_; }
    /// Unbiased sample variance; zero for fewer than two samples.
    double variance() const;
    double sum_sq_dev() const { return m2_; }

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

struct McEstimate {
    double mean = 0.0;
    double ci_halfwidth = 0.0;  ///< 1.96 s / sqrt(M)
    std::uint64_t count = 0;
};

McEstimate to_estimate(const RunningStats& s);

/// Throws ContractViolation for fewer than two values.
McEstimate mc_mean(std::span<const double> values);

}  // namespace rswave

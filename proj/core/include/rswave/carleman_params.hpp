#pragma once

#include "rswave/geometry.hpp"

namespace rswave {

/// Weight parameters. `alpha` is carried here so that tests can perturb it.
struct CarlemanParams {
    double beta = 2.0;
    double lambda = 1.0;
    double mu = 1.0;
    double alpha = 0.0;
    double c0 = 0.0;
    double c0_tilde = 0.0;
    double c1 = 0.0;
    double eps = 0.0;
    double delta = 0.0;
    double r2 = 0.0;
    /// Multiplier found by the search (beta = C0 (1 + r2)); zero when beta was forced.
    double C0 = 0.0;
};

struct BetaSearchOptions {
    double beta_cap = 1e7;
    double lambda = 1.0;
    double mu = 1.0;
    int max_halvings = 400;
};

struct ConditionReport {
    bool cond1 = false;
    bool cond2 = false;
    bool cond3 = false;
    bool inclusions = false;
    double margin1 = 0.0;  ///< min over G of alpha T^2/4 - max_i d_i^2
    double margin2 = 0.0;  ///< min over {sigma > 0} of min_i d_i^2 - n alpha^2 tau^2 - c0
    double margin3 = 0.0;  ///< 4 c0 beta^2 + 2 beta (1 - alpha) - 4 r2 beta T - c0_tilde

    bool all() const { return cond1 && cond2 && cond3; }
};

/// Fills c0, c0_tilde, c1, alpha for a given beta and tries to fix eps, delta.
/// eps = delta = 0 when the inclusion chain cannot be established.
CarlemanParams params_for_beta(const GeometrySpec& geom, double beta, double r2,
                               const BetaSearchOptions& opts = {});

/// Smallest beta = 2^k (1 + r2), k >= 1, passing all three conditions.
/// Throws ConditionError when kappa T <= T* or when beta would exceed the cap.
CarlemanParams choose_beta(const GeometrySpec& geom, double r2, const BetaSearchOptions& opts = {});

ConditionReport verify_conditions(const CarlemanParams& p, const GeometrySpec& geom);

/// Checks Q0 ⊂ Q(c1+2δ) ⊂ Q(c1+δ) ⊂ Q(c1) ⊂ Q1 on the dense search grid.
bool inclusions_hold(const CarlemanParams& p, const GeometrySpec& geom);

/// log of sum_i exp(beta (x_i - x0_i)^2), stable for large beta.
double log_spatial_sum(const CarlemanParams& p, const GeometrySpec& geom, std::span<const double> x);

/// sigma(t, x) > b evaluated without forming sigma (safe for any beta).
bool level_set_membership(const CarlemanParams& p, const GeometrySpec& geom, double b, double t,
                          std::span<const double> x);

}  // namespace rswave

#include "rswave/carleman_params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rswave/error.hpp"

namespace rswave {

namespace {

struct Extremes {
    double min_d2 = std::numeric_limits<double>::infinity();      // min_x min_i
    double min_max_d2 = std::numeric_limits<double>::infinity();  // min_x max_i
    double max_d2 = 0.0;                                          // max_x max_i
    double c1 = std::numeric_limits<double>::infinity();
};

Extremes scan(const GeometrySpec& geom) {
    Extremes e;
    const int n = geom.dim();
    for_each_search_point(geom, [&](std::span<const double> x) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0, s = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d2 = (x[i] - geom.x0[i]) * (x[i] - geom.x0[i]);
            lo = std::min(lo, d2);
            hi = std::max(hi, d2);
            s += std::exp(d2);
        }
        e.min_d2 = std::min(e.min_d2, lo);
        e.min_max_d2 = std::min(e.min_max_d2, hi);
        e.max_d2 = std::max(e.max_d2, hi);
        e.c1 = std::min(e.c1, s - n);
    });
    return e;
}

double log_add_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

// sigma > b given L = log sum_i e^{beta d_i^2} and the time term log(n E).
bool exceeds(double L, double log_nE, double b) {
    if (b > 0.0) return L > log_add_exp(log_nE, std::log(b));
    if (b == 0.0) return L > log_nE;
    // b < 0: sum > nE + b; when nE + b <= 0 the left side (positive) always wins.
    const double nE = std::exp(log_nE);
    if (nE + b <= 0.0) return true;
    return L > std::log(nE + b);
}

}  // namespace

double log_spatial_sum(const CarlemanParams& p, const GeometrySpec& geom, std::span<const double> x) {
    double m = -std::numeric_limits<double>::infinity();
    double terms[2];
    for (int i = 0; i < geom.dim(); ++i) {
        const double d = x[i] - geom.x0[i];
        terms[i] = p.beta * d * d;
        m = std::max(m, terms[i]);
    }
    double s = 0.0;
    for (int i = 0; i < geom.dim(); ++i) s += std::exp(terms[i] - m);
    return m + std::log(s);
}

bool level_set_membership(const CarlemanParams& p, const GeometrySpec& geom, double b, double t,
                          std::span<const double> x) {
    const double tau = t - geom.T / 2.0;
    const double log_nE = std::log(static_cast<double>(geom.dim())) + p.alpha * p.beta * tau * tau;
    return exceeds(log_spatial_sum(p, geom, x), log_nE, b);
}

bool inclusions_hold(const CarlemanParams& p, const GeometrySpec& geom) {
    if (!(p.eps > 0.0) || !(p.delta > 0.0) || p.eps >= geom.T / 2.0) return false;
    const double logn = std::log(static_cast<double>(geom.dim()));
    const double tau_in = p.eps;                 // |t - T/2| at the edge of Q0
    const double tau_out = geom.T / 2.0 - p.eps;  // |t - T/2| at t = eps
    const double log_nE_in = logn + p.alpha * p.beta * tau_in * tau_in;
    const double log_nE_out = logn + p.alpha * p.beta * tau_out * tau_out;
    bool ok = true;
    for_each_search_point(geom, [&](std::span<const double> x) {
        if (!ok) return;
        const double L = log_spatial_sum(p, geom, x);
        // sigma is maximal at t = T/2 and decreasing in |t - T/2|.
        if (!exceeds(L, log_nE_in, p.c1 + 2.0 * p.delta)) ok = false;
        if (exceeds(L, log_nE_out, p.c1)) ok = false;
    });
    return ok;
}

CarlemanParams params_for_beta(const GeometrySpec& geom, double beta, double r2,
                               const BetaSearchOptions& opts) {
    const ControlTimeReport rep = compute_report(geom);
    const Extremes ex = scan(geom);
    const double k2 = geom.kappa * geom.kappa;
    CarlemanParams p;
    p.beta = beta;
    p.lambda = opts.lambda;
    p.mu = opts.mu;
    p.alpha = rep.alpha;
    p.r2 = r2;
    p.c0 = (1.0 - k2) / 2.0 * ex.min_d2;
    p.c0_tilde = (1.0 - k2) / (2.0 * k2) * ex.min_max_d2;
    p.c1 = ex.c1;

    double start = std::exp(-std::min(beta, 700.0));
    p.eps = p.delta = start;
    for (int k = 0; k < opts.max_halvings; ++k) {
        if (inclusions_hold(p, geom)) return p;
        p.eps *= 0.5;
        p.delta *= 0.5;
    }
    p.eps = p.delta = 0.0;
    return p;
}

ConditionReport verify_conditions(const CarlemanParams& p, const GeometrySpec& geom) {
    ConditionReport r;
    const int n = geom.dim();
    const double T = geom.T;
    double m1 = std::numeric_limits<double>::infinity();
    double m2 = std::numeric_limits<double>::infinity();
    const double logn = std::log(static_cast<double>(n));
    for_each_search_point(geom, [&](std::span<const double> x) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d2 = (x[i] - geom.x0[i]) * (x[i] - geom.x0[i]);
            lo = std::min(lo, d2);
            hi = std::max(hi, d2);
        }
        m1 = std::min(m1, p.alpha * T * T / 4.0 - hi);
        // On {sigma > 0} at fixed x: alpha beta tau^2 < log((1/n) sum e^{beta d^2}).
        // The worst point of the slice is its supremum in |tau|, capped by T/2.
        const double bound = (log_spatial_sum(p, geom, x) - logn) / (p.alpha * p.beta);
        if (bound <= 0.0) return;  // empty slice
        const double tau2 = std::min(bound, T * T / 4.0);
        m2 = std::min(m2, lo - n * p.alpha * p.alpha * tau2 - p.c0);
    });
    r.margin1 = m1;
    r.margin2 = m2;
    r.margin3 = 4.0 * p.c0 * p.beta * p.beta + 2.0 * p.beta * (1.0 - p.alpha) -
                4.0 * p.r2 * p.beta * T - p.c0_tilde;
    r.cond1 = m1 > 0.0;
    r.cond2 = m2 > 0.0;
    r.cond3 = r.margin3 > 0.0;
    r.inclusions = inclusions_hold(p, geom);
    return r;
}

CarlemanParams choose_beta(const GeometrySpec& geom, double r2, const BetaSearchOptions& opts) {
    const ControlTimeReport rep = compute_report(geom);
    if (!(geom.kappa * geom.T > rep.Tstar)) {
        std::ostringstream os;
        os << "kappa*T = " << geom.kappa * geom.T << " does not exceed T* = " << rep.Tstar
           << "; condition (1) cannot hold";
        throw ConditionError(os.str());
    }
    if (!(r2 >= 0.0)) throw ConditionError("r2 must be non-negative");
    for (double c0 = 2.0;; c0 *= 2.0) {
        const double beta = c0 * (1.0 + r2);
        if (beta > opts.beta_cap) {
            std::ostringstream os;
            os << "no beta = C0 (1 + r2) below the cap " << opts.beta_cap
               << " satisfies all conditions";
            throw ConditionError(os.str());
        }
        CarlemanParams p = params_for_beta(geom, beta, r2, opts);
        const ConditionReport rep2 = verify_conditions(p, geom);
        if (rep2.all() && rep2.inclusions) {
            p.C0 = c0;
            return p;
        }
    }
}

}  // namespace rswave

#pragma once

#include <array>
#include <functional>
#include <map>
#include <string>

#include "rswave/expression.hpp"
#include "rswave/grid.hpp"

namespace rswave {

/// Deterministic space-time scalar coefficient a(t, x, y).
class Coefficient {
public:
    using Fn = std::function<double(double t, double x, double y)>;

    Coefficient();
    static Coefficient constant(double c);
    static Coefficient expression(const std::string& text);
    static Coefficient function(Fn fn, bool time_dependent, std::string label = "<function>");

    double operator()(double t, double x, double y = 0.0) const { return fn_(t, x, y); }
    bool time_dependent() const { return time_dependent_; }
    bool is_zero() const { return zero_; }
    const std::string& label() const { return label_; }

    /// Values on every node of `g` at time t.
    Field sample(const Grid& g, double t) const;

private:
    Fn fn_;
    bool time_dependent_ = false;
    bool zero_ = false;
    std::string label_;
};

/// The five coefficients of the controlled system: a1 y and a4 g in the velocity
/// drift, a2 y in the velocity diffusion, a3 y in the displacement diffusion,
/// a5 f in the displacement drift.
struct CoefficientSet {
    Coefficient a1, a2, a3, a4, a5;
    /// Marks ω-dependent coefficients; only the forward solver accepts them
    /// (and treats them as given realisations).
    bool random = false;

    static CoefficientSet zero() { return {}; }
    const Coefficient& get(int i) const;

    /// Throws ConfigError if a4 does not vanish on the boundary of `g`.
    void validate(const Grid& g) const;
};

struct CoefficientSizes {
    double r1 = 0.0;  ///< sum_{k=1..3} |a_k|_inf^2
    double r2 = 0.0;  ///< r1 + |a5|_inf^2 + |a4|_{W^{1,inf}}^2
};

/// Grid sup-norms over all nodes and time levels; |a|_{W^{1,inf}} = |a|_inf + |∇a|_inf
/// with the gradient by centered differences (one-sided on the boundary).
CoefficientSizes coefficient_sizes(const CoefficientSet& c, const Grid& g);

/// Caches node samples of time-independent coefficients.
class SampledCoefficients {
public:
    SampledCoefficients(const CoefficientSet& c, const Grid& g) : coeffs_(&c), grid_(&g) {}

    /// a_i on all nodes at time t (i in 1..5). Empty field when a_i is identically zero.
    const Field& at(int i, double t);

private:
    const CoefficientSet* coeffs_;
    const Grid* grid_;
    std::map<int, Field> fixed_;
    std::array<std::pair<double, Field>, 6> last_{};
    std::array<bool, 6> have_last_{};
};

}  // namespace rswave

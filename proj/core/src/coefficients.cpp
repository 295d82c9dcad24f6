#include "rswave/coefficients.hpp"

#include <cmath>
#include <sstream>

#include "rswave/error.hpp"

namespace rswave {

Coefficient::Coefficient()
    : fn_([](double, double, double) { return 0.0; }), zero_(true), label_("0") {}

Coefficient Coefficient::constant(double c) {
    Coefficient a = function([c](double, double, double) { return c; }, false);
    a.zero_ = c == 0.0;
    std::ostringstream os;
    os << c;
    a.label_ = os.str();
    return a;
}

Coefficient Coefficient::expression(const std::string& text) {
    Expression e = Expression::parse(text);
    if (e.is_constant()) {
        Coefficient a = constant(e.eval(0.0, 0.0, 0.0));
        a.label_ = text;
        return a;
    }
    const bool td = e.depends_on_t();
    return function([e](double t, double x, double y) { return e.eval(t, x, y); }, td, text);
}

Coefficient Coefficient::function(Fn fn, bool time_dependent, std::string label) {
    Coefficient a;
    a.fn_ = std::move(fn);
    a.time_dependent_ = time_dependent;
    a.zero_ = false;
    a.label_ = std::move(label);
    return a;
}

Field Coefficient::sample(const Grid& g, double t) const {
    Field out(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) {
        const auto p = g.point(n);
        out[n] = fn_(t, p[0], p[1]);
    }
    return out;
}

const Coefficient& CoefficientSet::get(int i) const {
    switch (i) {
        case 1: return a1;
        case 2: return a2;
        case 3: return a3;
        case 4: return a4;
        case 5: return a5;
        default: throw ConfigError("coefficient index must be 1..5");
    }
}

void CoefficientSet::validate(const Grid& g) const {
    if (a4.is_zero()) return;
    const int levels = a4.time_dependent() ? g.steps() + 1 : 1;
    for (int k = 0; k < levels; ++k) {
        const Field v = a4.sample(g, g.time(k));
        double scale = 1.0;
        for (double x : v) scale = std::max(scale, std::abs(x));
        for (std::size_t n = 0; n < g.size(); ++n)
            if (g.is_boundary(n) && std::abs(v[n]) > 1e-12 * scale)
                throw ConfigError("a4 must vanish on the boundary (a4 = " + a4.label() + ")");
    }
}

namespace {

double sup_sq(const Coefficient& a, const Grid& g) {
    if (a.is_zero()) return 0.0;
    const int levels = a.time_dependent() ? g.steps() + 1 : 1;
    double m = 0.0;
    for (int k = 0; k < levels; ++k)
        for (double v : a.sample(g, g.time(k))) m = std::max(m, std::abs(v));
    return m * m;
}

double w1inf(const Coefficient& a, const Grid& g) {
    if (a.is_zero()) return 0.0;
    const int levels = a.time_dependent() ? g.steps() + 1 : 1;
    double sup = 0.0, grad = 0.0;
    for (int k = 0; k < levels; ++k) {
        const Field v = a.sample(g, g.time(k));
        for (std::size_t n = 0; n < g.size(); ++n) {
            sup = std::max(sup, std::abs(v[n]));
            const auto mi = g.multi_index(n);
            double norm2 = 0.0;
            for (int ax = 0; ax < g.dim(); ++ax) {
                auto at = [&](int shift) {
                    auto m = mi;
                    m[ax] += shift;
                    return v[g.index(m[0], m[1])];
                };
                double d;
                if (g.cells(ax) < 2) d = mi[ax] == 0 ? (at(1) - at(0)) / g.h(ax) : (at(0) - at(-1)) / g.h(ax);
                else if (mi[ax] == 0) d = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * g.h(ax));
                else if (mi[ax] == g.cells(ax)) d = (3.0 * at(0) - 4.0 * at(-1) + at(-2)) / (2.0 * g.h(ax));
                else d = (at(1) - at(-1)) / (2.0 * g.h(ax));
                norm2 += d * d;
            }
            grad = std::max(grad, std::sqrt(norm2));
        }
    }
    return sup + grad;
}

}  // namespace

CoefficientSizes coefficient_sizes(const CoefficientSet& c, const Grid& g) {
    CoefficientSizes s;
    s.r1 = sup_sq(c.a1, g) + sup_sq(c.a2, g) + sup_sq(c.a3, g);
    const double w = w1inf(c.a4, g);
    s.r2 = s.r1 + sup_sq(c.a5, g) + w * w;
    return s;
}

const Field& SampledCoefficients::at(int i, double t) {
    static const Field empty;
    const Coefficient& a = coeffs_->get(i);
    if (a.is_zero()) return empty;
    if (!a.time_dependent()) {
        auto it = fixed_.find(i);
        if (it == fixed_.end()) it = fixed_.emplace(i, a.sample(*grid_, 0.0)).first;
        return it->second;
    }
    if (!have_last_[i] || last_[i].first != t) {
        last_[i] = {t, a.sample(*grid_, t)};
        have_last_[i] = true;
    }
    return last_[i].second;
}

}  // namespace rswave

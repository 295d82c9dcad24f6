#include "rswave_cli/presets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rswave/error.hpp"
#include "rswave/expression.hpp"

namespace rswave::cli {

namespace {

constexpr double kPi = std::numbers::pi;

double unit(const Grid& g, int axis, double x) { return (x - g.lo(axis)) / (g.hi(axis) - g.lo(axis)); }

int sine_index(const std::string& name) {
    if (name.rfind("sine", 0) != 0 || name.size() == 4) return 0;
    int k = 0;
    for (std::size_t i = 4; i < name.size(); ++i) {
        if (name[i] < '0' || name[i] > '9') return 0;
        k = 10 * k + (name[i] - '0');
        if (k > 100000) return 0;
    }
    return k;
}

}  // namespace

Field expression_field(const Grid& g, const std::string& text, double t) {
    const Expression e = Expression::parse(text);
    Field u(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) {
        const auto p = g.point(n);
        u[n] = e.eval(t, p[0], p[1]);
    }
    return u;
}

bool is_named_datum(const std::string& name) {
    return name == "bump" || name == "wave" || sine_index(name) > 0;
}

TerminalData named_datum(const Grid& g, const std::string& name) {
    TerminalData d{g.zeros(), g.zeros()};
    if (const int k = sine_index(name); k > 0) {
        for (std::size_t n = 0; n < g.size(); ++n) {
            const auto p = g.point(n);
            double v = 1.0;
            for (int a = 0; a < g.dim(); ++a) v *= std::sin(k * kPi * unit(g, a, p[a]));
            d.zT[n] = v;
        }
    } else if (name == "bump" || name == "wave") {
        double side = g.hi(0) - g.lo(0);
        for (int a = 1; a < g.dim(); ++a) side = std::min(side, g.hi(a) - g.lo(a));
        const double radius = 0.25 * side;
        for (std::size_t n = 0; n < g.size(); ++n) {
            const auto p = g.point(n);
            double r2 = 0.0;
            for (int a = 0; a < g.dim(); ++a) {
                const double s = (p[a] - 0.5 * (g.lo(a) + g.hi(a))) / radius;
                r2 += s * s;
            }
            if (r2 >= 1.0) continue;
            d.zT[n] = std::pow(1.0 - r2, 6);
            if (name == "wave") {
                const double s0 = (p[0] - 0.5 * (g.lo(0) + g.hi(0))) / radius;
                d.zhatT[n] = 12.0 * std::pow(1.0 - r2, 5) * s0 / radius;
            }
        }
    } else {
        throw ConfigError("unknown terminal datum '" + name + "'");
    }
    for (std::size_t n = 0; n < g.size(); ++n)
        if (g.is_boundary(n)) d.zT[n] = d.zhatT[n] = 0.0;
    return d;
}

TerminalData terminal_datum(const Grid& g, const std::string& zT, const std::string& zhatT) {
    if (is_named_datum(zT)) {
        if (zhatT != "0") throw ConfigError("zhatT must be 0 when zT names a preset");
        return named_datum(g, zT);
    }
    TerminalData d{expression_field(g, zT, g.T()), expression_field(g, zhatT, g.T())};
    for (std::size_t n = 0; n < g.size(); ++n)
        if (g.is_boundary(n)) d.zT[n] = d.zhatT[n] = 0.0;
    return d;
}

ManufacturedCase manufactured_case(const Grid& g, double amplitude) {
    ManufacturedCase c;
    Field shape(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) {
        const auto p = g.point(n);
        double v = 1.0;
        for (int a = 0; a < g.dim(); ++a) {
            const double s = unit(g, a, p[a]);
            v *= s * (1.0 - s);
        }
        shape[n] = v;
    }
    const double mid = 0.5 * g.T();
    for (int k = 0; k <= g.steps(); ++k) {
        const double t = g.time(k);
        const double b = std::exp(-(t - mid) * (t - mid));
        const double amp = t * b, amp_t = b - 2.0 * t * (t - mid) * b;
        Field m(g.size()), mt(g.size());
        for (std::size_t n = 0; n < g.size(); ++n) {
            m[n] = amp * shape[n];
            mt[n] = amp_t * shape[n];
        }
        c.m.push_back(std::move(m));
        c.m_t.push_back(std::move(mt));
    }
    c.q = shape;
    for (double& v : c.q) v *= amplitude;
    return c;
}

}  // namespace rswave::cli

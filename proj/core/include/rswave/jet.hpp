#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace rswave {

/// Truncated multivariate Taylor polynomial in V variables up to total degree N.
/// Coefficients are Taylor coefficients (partial derivative / multi-index factorial).
template <int V, int N>
class Jet {
public:
    using Exponent = std::array<int, V>;

    static std::size_t size() { return table().exps.size(); }

    Jet() : c_(size(), 0.0) {}
    explicit Jet(double value) : Jet() { c_[0] = value; }

    /// The jet of the coordinate function x_v around `at`.
    static Jet variable(int v, double at) {
        Jet j(at);
        Exponent e{};
        e[v] = 1;
        j.c_[index_of(e)] = 1.0;
        return j;
    }

    double value() const { return c_[0]; }

    /// Partial derivative of the represented function (multi-index `e`) at the origin.
    double partial(const Exponent& e) const {
        double fact = 1.0;
        for (int v = 0; v < V; ++v)
            for (int k = 2; k <= e[v]; ++k) fact *= k;
        return c_[index_of(e)] * fact;
    }

    /// d/dx_v; the result is exact up to degree N - 1.
    Jet derivative(int v) const {
        Jet out;
        const auto& t = table();
        for (std::size_t m = 0; m < t.exps.size(); ++m) {
            const auto& e = t.exps[m];
            if (e[v] == 0) continue;
            Exponent lower = e;
            --lower[v];
            out.c_[index_of(lower)] += e[v] * c_[m];
        }
        return out;
    }

    Jet& operator+=(const Jet& o) {
        for (std::size_t m = 0; m < c_.size(); ++m) c_[m] += o.c_[m];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        for (std::size_t m = 0; m < c_.size(); ++m) c_[m] -= o.c_[m];
        return *this;
    }
    Jet& operator*=(double s) {
        for (double& v : c_) v *= s;
        return *this;
    }
    Jet& operator+=(double s) {
        c_[0] += s;
        return *this;
    }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator+(Jet a, double s) { return a += s; }
    friend Jet operator-(Jet a, double s) { return a += -s; }
    friend Jet operator*(Jet a, double s) { return a *= s; }
    friend Jet operator*(double s, Jet a) { return a *= s; }
    friend Jet operator-(Jet a) { return a *= -1.0; }

    friend Jet operator*(const Jet& a, const Jet& b) {
        Jet out;
        for (const auto& [i, j, k] : table().products) out.c_[k] += a.c_[i] * b.c_[j];
        return out;
    }

    friend Jet exp(const Jet& a) {
        // e^{a0 + g} = e^{a0} sum_k g^k / k!, g nilpotent beyond degree N.
        Jet g = a;
        g.c_[0] = 0.0;
        Jet sum(1.0), term(1.0);
        for (int k = 1; k <= N; ++k) {
            term = term * g;
            term *= 1.0 / k;
            sum += term;
        }
        return sum * std::exp(a.c_[0]);
    }

private:
    struct Table {
        std::vector<Exponent> exps;
        std::vector<std::array<std::size_t, 3>> products;
    };

    static int degree(const Exponent& e) {
        int d = 0;
        for (int x : e) d += x;
        return d;
    }

    static std::size_t encode(const Exponent& e) {
        std::size_t code = 0;
        for (int v = 0; v < V; ++v) code = code * (N + 1) + static_cast<std::size_t>(e[v]);
        return code;
    }

    static const Table& table() {
        static const Table t = [] {
            Table tb;
            std::size_t total = 1;
            for (int v = 0; v < V; ++v) total *= N + 1;
            for (int d = 0; d <= N; ++d)
                for (std::size_t code = 0; code < total; ++code) {
                    Exponent e{};
                    std::size_t c = code;
                    for (int v = V - 1; v >= 0; --v) {
                        e[v] = static_cast<int>(c % (N + 1));
                        c /= N + 1;
                    }
                    if (degree(e) == d) tb.exps.push_back(e);
                }
            for (std::size_t i = 0; i < tb.exps.size(); ++i)
                for (std::size_t j = 0; j < tb.exps.size(); ++j) {
                    Exponent s{};
                    for (int v = 0; v < V; ++v) s[v] = tb.exps[i][v] + tb.exps[j][v];
                    if (degree(s) > N) continue;
                    for (std::size_t k = 0; k < tb.exps.size(); ++k)
                        if (tb.exps[k] == s) tb.products.push_back({i, j, k});
                }
            return tb;
        }();
        return t;
    }

    static std::size_t index_of(const Exponent& e) {
        static const std::vector<std::ptrdiff_t> lookup = [] {
            std::size_t total = 1;
            for (int v = 0; v < V; ++v) total *= N + 1;
            std::vector<std::ptrdiff_t> l(total, -1);
            const auto& t = table();
            for (std::size_t m = 0; m < t.exps.size(); ++m)
                l[encode(t.exps[m])] = static_cast<std::ptrdiff_t>(m);
            return l;
        }();
        return static_cast<std::size_t>(lookup[encode(e)]);
    }

    std::vector<double> c_;
};

}  // namespace rswave

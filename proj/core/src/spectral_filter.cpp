#include "rswave/spectral_filter.hpp"

#include <cmath>
#include <numbers>

#include "rswave/error.hpp"

namespace rswave {

SpectralFilter::SpectralFilter(const Grid& g, double fraction) : grid_(&g) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("filter fraction must lie in (0, 1]");
    for (int a = 0; a < g.dim(); ++a) {
        const int N = g.cells(a);
        const int cut = std::max(1, std::min(N - 1, static_cast<int>(std::floor(fraction * N))));
        cut_.push_back(cut);
        std::vector<double> b(static_cast<std::size_t>(cut) * (N - 1));
        for (int m = 1; m <= cut; ++m)
            for (int i = 1; i < N; ++i)
                b[(m - 1) * (N - 1) + (i - 1)] = std::sin(std::numbers::pi * m * i / N);
        basis_.push_back(std::move(b));
    }
}

void SpectralFilter::apply_axis(Field& u, int axis) const {
    const Grid& g = *grid_;
    const int N = g.cells(axis);
    const int cut = cut_[axis];
    const auto& b = basis_[axis];
    const int other = g.dim() == 2 ? g.cells(1 - axis) : 2;
    std::vector<double> line(static_cast<std::size_t>(N - 1)), coef(static_cast<std::size_t>(cut));
    for (int j = 1; j < other; ++j) {
        auto node = [&](int i) { return axis == 0 ? g.index(i, g.dim() == 2 ? j : 0) : g.index(j, i); };
        for (int i = 1; i < N; ++i) line[i - 1] = u[node(i)];
        for (int m = 0; m < cut; ++m) {
            double s = 0.0;
            for (int i = 0; i < N - 1; ++i) s += b[m * (N - 1) + i] * line[i];
            coef[m] = s * 2.0 / N;
        }
        for (int i = 0; i < N - 1; ++i) {
            double s = 0.0;
            for (int m = 0; m < cut; ++m) s += b[m * (N - 1) + i] * coef[m];
            u[node(i + 1)] = s;
        }
    }
}

Field SpectralFilter::apply(const Field& u) const {
    Field out(u.size(), 0.0);
    for (std::size_t n : grid_->interior()) out[n] = u[n];
    for (int a = 0; a < grid_->dim(); ++a) apply_axis(out, a);
    return out;
}

}  // namespace rswave

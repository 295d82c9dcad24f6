#pragma once

#include <vector>

#include "rswave/grid.hpp"

namespace rswave {

/// Orthogonal projection of interior values onto the discrete Dirichlet sine
/// modes sin(m π i / N) with m <= fraction * N on every axis. Symmetric in the
/// grid inner product and commutes with the discrete Laplacian.
class SpectralFilter {
public:
    SpectralFilter(const Grid& g, double fraction);

    Field apply(const Field& u) const;
    int cutoff(int axis) const { return cut_[axis]; }

private:
    void apply_axis(Field& u, int axis) const;

    const Grid* grid_;
    std::vector<int> cut_;
    std::vector<std::vector<double>> basis_;  // per axis: (cut x (N-1)) sine table
};

}  // namespace rswave

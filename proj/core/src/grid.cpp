#include "rswave/grid.hpp"

#include <cmath>
#include <numeric>

#include "rswave/error.hpp"

namespace rswave {

Scheme parse_scheme(const std::string& name) {
    if (name == "midpoint") return Scheme::Midpoint;
    if (name == "leapfrog") return Scheme::Leapfrog;
    throw ConfigError("unknown scheme '" + name + "' (expected midpoint or leapfrog)");
}

std::string to_string(Scheme s) {
    return s == Scheme::Midpoint ? "midpoint" : "leapfrog";
}

std::string to_string(const Face& f) {
    static const char* axes[] = {"x", "y"};
    return std::string(axes[f.axis]) + (f.side == Side::Low ? "=lo" : "=hi");
}

Grid::Grid(std::vector<double> lo, std::vector<double> hi, std::vector<int> cells,
           double T, int steps, Scheme scheme)
    : lo_(std::move(lo)), hi_(std::move(hi)), cells_(std::move(cells)), T_(T),
      steps_(steps), scheme_(scheme) {
    const std::size_t n = lo_.size();
    if (n < 1 || n > 2) throw ConfigError("grid dimension must be 1 or 2");
    if (hi_.size() != n || cells_.size() != n)
        throw ConfigError("grid bounds and cell counts disagree in dimension");
    if (!(T_ > 0.0) || steps_ < 1) throw ConfigError("time grid needs T > 0 and steps >= 1");
    h_.resize(n);
    size_ = 1;
    for (std::size_t a = 0; a < n; ++a) {
        if (!(hi_[a] > lo_[a])) throw GeometryError("degenerate box along axis " + std::to_string(a));
        if (cells_[a] < 2) throw ConfigError("need at least 2 cells per axis");
        h_[a] = (hi_[a] - lo_[a]) / cells_[a];
        volume_ *= h_[a];
        size_ *= static_cast<std::size_t>(cells_[a] + 1);
    }
    dt_ = T_ / steps_;

    boundary_flag_.assign(size_, 0);
    for (std::size_t node = 0; node < size_; ++node) {
        const auto mi = multi_index(node);
        bool b = false;
        for (int a = 0; a < dim(); ++a) b = b || mi[a] == 0 || mi[a] == cells_[a];
        boundary_flag_[node] = b ? 1 : 0;
        if (!b) interior_.push_back(node);
    }

    face_nodes_.resize(2 * n);
    for (int a = 0; a < dim(); ++a) {
        for (int s = 0; s < 2; ++s) {
            auto& list = face_nodes_[2 * a + s];
            const int fixed = s == 0 ? 0 : cells_[a];
            const int inward = s == 0 ? 1 : -1;
            if (dim() == 1) {
                list.push_back({index(fixed), index(fixed + inward), index(fixed + 2 * inward)});
                continue;
            }
            const int other = 1 - a;
            for (int j = 1; j < cells_[other]; ++j) {
                auto at = [&](int along) {
                    return a == 0 ? index(along, j) : index(j, along);
                };
                list.push_back({at(fixed), at(fixed + inward), at(fixed + 2 * inward)});
            }
        }
    }
}

Grid Grid::with_time_step(std::vector<double> lo, std::vector<double> hi,
                          std::vector<int> cells, double T, double dt, Scheme scheme) {
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    const int steps = static_cast<int>(std::ceil(T / dt - 1e-9));
    return Grid(std::move(lo), std::move(hi), std::move(cells), T, std::max(steps, 1), scheme);
}

double Grid::min_h() const {
    double m = h_[0];
    for (double v : h_) m = std::min(m, v);
    return m;
}

std::size_t Grid::index(int i, int j) const {
    return static_cast<std::size_t>(i) +
           (dim() == 2 ? static_cast<std::size_t>(j) * static_cast<std::size_t>(cells_[0] + 1) : 0);
}

std::array<int, 2> Grid::multi_index(std::size_t node) const {
    const auto nx = static_cast<std::size_t>(cells_[0] + 1);
    if (dim() == 1) return {static_cast<int>(node), 0};
    return {static_cast<int>(node % nx), static_cast<int>(node / nx)};
}

std::array<double, 2> Grid::point(std::size_t node) const {
    const auto mi = multi_index(node);
    std::array<double, 2> p{0.0, 0.0};
    for (int a = 0; a < dim(); ++a) p[a] = coord(a, mi[a]);
    return p;
}

double Grid::face_weight(const Face& f) const {
    return dim() == 1 ? 1.0 : h_[1 - f.axis];
}

std::vector<Face> Grid::faces() const {
    std::vector<Face> out;
    for (int a = 0; a < dim(); ++a) {
        out.push_back({a, Side::Low});
        out.push_back({a, Side::High});
    }
    return out;
}

const std::vector<FaceNode>& Grid::face_nodes(const Face& f) const {
    return face_nodes_[2 * f.axis + (f.side == Side::Low ? 0 : 1)];
}

int Grid::step_of(double t) const {
    const double k = t / dt_;
    const long r = std::lround(k);
    if (std::abs(k - static_cast<double>(r)) > 1e-8 || r < 0 || r > steps_)
        throw ConfigError("time " + std::to_string(t) + " is not on the time grid");
    return static_cast<int>(r);
}

Grid Grid::with_horizon(double T, int steps) const {
    return Grid(lo_, hi_, cells_, T, steps, scheme_);
}

}  // namespace rswave

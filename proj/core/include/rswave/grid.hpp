#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rswave {

/// Values over every node of a spatial grid (boundary nodes included).
using Field = std::vector<double>;

enum class Scheme { Midpoint, Leapfrog };

Scheme parse_scheme(const std::string& name);
std::string to_string(Scheme s);

enum class Side { Low, High };

/// One face of the box: the set {x_axis = lo} or {x_axis = hi}.
struct Face {
    int axis = 0;
    Side side = Side::High;

    friend bool operator==(const Face&, const Face&) = default;
};

std::string to_string(const Face& f);

/// A face node together with the two nodes entering its one-sided normal stencil.
struct FaceNode {
    std::size_t boundary;   ///< node on the face
    std::size_t first;      ///< first interior neighbour along the inward normal
    std::size_t second;     ///< second neighbour along the inward normal
};

/// Uniform tensor-product grid on a box in R^n (n = 1 or 2) with a uniform
/// time grid on [0, T].
class Grid {
public:
    /// `cells[i]` intervals on [lo[i], hi[i]]; `steps` time steps on [0, T].
    Grid(std::vector<double> lo, std::vector<double> hi, std::vector<int> cells,
         double T, int steps, Scheme scheme = Scheme::Midpoint);

    /// Builds the time grid from a target step: steps = ceil(T / dt).
    static Grid with_time_step(std::vector<double> lo, std::vector<double> hi,
                               std::vector<int> cells, double T, double dt,
                               Scheme scheme = Scheme::Midpoint);

    int dim() const { return static_cast<int>(lo_.size()); }
    int cells(int axis) const { return cells_[axis]; }
    int nodes(int axis) const { return cells_[axis] + 1; }
    double h(int axis) const { return h_[axis]; }
    double min_h() const;
    double lo(int axis) const { return lo_[axis]; }
    double hi(int axis) const { return hi_[axis]; }
    double coord(int axis, int i) const { return lo_[axis] + h_[axis] * i; }

    std::size_t size() const { return size_; }
    std::size_t index(int i, int j = 0) const;
    std::array<int, 2> multi_index(std::size_t node) const;
    /// Coordinates of a node; unused trailing entries are zero.
    std::array<double, 2> point(std::size_t node) const;
    bool is_boundary(std::size_t node) const { return boundary_flag_[node] != 0; }
    const std::vector<std::size_t>& interior() const { return interior_; }

    /// Product of spacings: quadrature weight of one node.
    double cell_volume() const { return volume_; }
    /// Quadrature weight of a face node (product of tangential spacings, 1 in 1D).
    double face_weight(const Face& f) const;
    /// Normal spacing of a face.
    double face_spacing(const Face& f) const { return h_[f.axis]; }

    std::vector<Face> faces() const;
    /// Face nodes excluding box corners (corners never enter the 2n+1 stencil).
    const std::vector<FaceNode>& face_nodes(const Face& f) const;

    double T() const { return T_; }
    int steps() const { return steps_; }
    double dt() const { return dt_; }
    double time(int k) const { return dt_ * k; }
    Scheme scheme() const { return scheme_; }

    /// Step index of a time on the grid; throws unless `t` is a grid time.
    int step_of(double t) const;

    /// Same space grid, new horizon and step count.
    Grid with_horizon(double T, int steps) const;

    Field zeros() const { return Field(size_, 0.0); }

private:
    std::vector<double> lo_, hi_, h_;
    std::vector<int> cells_;
    std::size_t size_ = 0;
    double volume_ = 1.0;
    double T_ = 0.0;
    int steps_ = 0;
    double dt_ = 0.0;
    Scheme scheme_ = Scheme::Midpoint;
    std::vector<unsigned char> boundary_flag_;
    std::vector<std::size_t> interior_;
    std::vector<std::vector<FaceNode>> face_nodes_;  // indexed 2*axis + side
};

/// Samples f(x) (or f(x, y)) on every node.
template <class F>
Field sample(const Grid& g, F&& f) {
    Field u(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) {
        const auto p = g.point(n);
        u[n] = f(std::span<const double>(p.data(), static_cast<std::size_t>(g.dim())));
    }
    return u;
}

}  // namespace rswave

#pragma once

#include <string>
#include <vector>

#include "rswave/adjoint.hpp"
#include "rswave/grid.hpp"

namespace rswave::cli {

/// Field sampled from an expression in (t, x, y) at time t.
Field expression_field(const Grid& g, const std::string& text, double t = 0.0);

/// Named terminal data. "sine<k>": product of sin(k π x̃) over the axes (x̃ the
/// coordinate rescaled to [0, 1]), ẑ = 0. "bump": (1 - r²)⁶ with r the distance
/// to the box centre over a quarter of the shortest side, ẑ = 0. "wave": the
/// bump with ẑ = -∂bump/∂x; backward in time this pulse moves towards the low
/// side of axis 0.
bool is_named_datum(const std::string& name);
TerminalData named_datum(const Grid& g, const std::string& name);

/// Named datum when `zT` names one (then `zhatT` must be "0"), expressions otherwise.
TerminalData terminal_datum(const Grid& g, const std::string& zT, const std::string& zhatT);

/// Manufactured process m(t, x) = t e^{-(t - T/2)²} Π x̃(1 - x̃) and its time
/// derivative on every level; q = amplitude Π x̃(1 - x̃).
struct ManufacturedCase {
    std::vector<Field> m;
    std::vector<Field> m_t;
    Field q;
};

ManufacturedCase manufactured_case(const Grid& g, double amplitude = 1.0);

}  // namespace rswave::cli

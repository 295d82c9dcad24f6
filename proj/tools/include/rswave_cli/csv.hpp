#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace rswave::cli {

/// 17 significant digits, general notation.
std::string format_double(double v);

using CsvCell = std::variant<double, long, std::string>;

/// Writes "# config_hash=<hex>,seed=<n>", a header row, then data rows.
class CsvWriter {
public:
    CsvWriter(const std::string& path, std::uint64_t config_hash, std::uint64_t seed,
              const std::vector<std::string>& columns);

    void row(const std::vector<CsvCell>& cells);
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ofstream out_;
    std::size_t columns_ = 0;
};

std::string hex64(std::uint64_t v);

}  // namespace rswave::cli

#include "rswave_cli/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "rswave/error.hpp"

namespace rswave::cli {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, std::uint64_t config_hash, std::uint64_t seed,
                     const std::vector<std::string>& columns)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), columns_(columns.size()) {
    if (!out_) throw ConfigError("cannot write '" + path + "'");
    out_ << "# config_hash=" << hex64(config_hash) << ",seed=" << seed << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << '\n';
}

void CsvWriter::row(const std::vector<CsvCell>& cells) {
    if (cells.size() != columns_) throw ContractViolation("csv row width does not match header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        std::visit(
            [this](const auto& c) {
                using C = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<C, double>) out_ << format_double(c);
                else out_ << c;
            },
            cells[i]);
    }
    out_ << '\n';
    if (!out_) throw ConfigError("write to '" + path_ + "' failed");
}

}  // namespace rswave::cli

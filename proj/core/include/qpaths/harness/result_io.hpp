#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "qpaths/harness/experiment.hpp"

namespace qpaths::harness {

inline constexpr std::string_view kCsvHeader =
    "mode,q,T,seed,log_lower,log_upper,z_estimate,ess,n_invalid,wall_ms";
inline constexpr std::string_view kDensityGridHeader = "q,beta,z,log_density";

/// Shortest representation that parses back to the same double; NaN is an empty field.
std::string format_double(double v);
/// Inverse of format_double. Throws std::invalid_argument on malformed text.
double parse_double(std::string_view text);

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);
/// Throws std::invalid_argument naming the line on a malformed file.
std::vector<ResultRow> read_csv(std::istream& in);

/// One JSON object per row, keys matching the CSV header; NaN becomes null.
void write_jsonl(std::ostream& out, const std::vector<ResultRow>& rows);

void write_density_grid_csv(std::ostream& out, const std::vector<DensityGridRow>& rows);

}  // namespace qpaths::harness

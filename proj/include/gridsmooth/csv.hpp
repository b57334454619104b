#pragma once

#include <string>

#include "gridsmooth/datagen.hpp"

namespace gridsmooth {

/// Parse a CSV file (one curve per row, optional header, '.' decimal,
/// LF/CRLF endings) into a batch. Ragged rows and non-numeric cells raise
/// parse_error with row/column context.
CurveBatch read_curves(const std::string& path);

/// Write curves as CSV with 17 significant digits; optional "t1,...,td"
/// header row. Rewriting the same data produces identical bytes.
void write_curves(const std::string& path, const CurveBatch& batch,
                  bool with_header = true);

/// Format a double with 17 significant digits (shared by all writers).
std::string format_double(double v);

}  // namespace gridsmooth

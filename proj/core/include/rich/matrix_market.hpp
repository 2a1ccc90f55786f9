#pragma once

#include "rich/sparse.hpp"

#include <iosfwd>
#include <string>

namespace rich {

struct LoadReport {
    bool had_explicit_zeros = false;
    bool symmetric = false;
};

/// Reads a Matrix Market coordinate file (real, integer or pattern field;
/// general or symmetric). Symmetric inputs are expanded to full storage,
/// duplicates are summed. Complex matrices are rejected.
/// Throws parse_error with the offending 1-based line number.
SparseMatrix load_matrix_market(const std::string& path, LoadReport* report = nullptr);
SparseMatrix load_matrix_market(std::istream& in, LoadReport* report = nullptr);

} // namespace rich

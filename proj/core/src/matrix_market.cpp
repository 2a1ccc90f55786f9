#include "rich/matrix_market.hpp"

#include "rich/errors.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace rich {
namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

} // namespace

SparseMatrix load_matrix_market(const std::string& path, LoadReport* report) {
    std::ifstream in(path);
    if (!in) throw parse_error(1, "cannot open file: " + path);
    return load_matrix_market(in, report);
}

SparseMatrix load_matrix_market(std::istream& in, LoadReport* report) {
    long lineno = 0;
    std::string line;

    if (!std::getline(in, line)) throw parse_error(1, "empty file");
    ++lineno;
    std::istringstream banner(line);
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    if (tag != "%%MatrixMarket" || lower(object) != "matrix" || lower(format) != "coordinate") {
        throw parse_error(lineno, "malformed Matrix Market banner");
    }
    field = lower(field);
    symmetry = lower(symmetry);
    if (field == "complex") throw parse_error(lineno, "complex matrices are not supported");
    if (field != "real" && field != "integer" && field != "pattern") {
        throw parse_error(lineno, "unsupported field type: " + field);
    }
    const bool pattern = field == "pattern";
    bool symmetric = false;
    if (symmetry == "symmetric") {
        symmetric = true;
    } else if (symmetry != "general") {
        throw parse_error(lineno, "unsupported symmetry type: " + symmetry);
    }

    // size line, after comments and blank lines
    std::size_t nrows = 0, ncols = 0, nentries = 0;
    for (;;) {
        if (!std::getline(in, line)) throw parse_error(lineno + 1, "missing size line");
        ++lineno;
        if (line.empty() || line[0] == '%') continue;
        std::istringstream sz(line);
        if (!(sz >> nrows >> ncols >> nentries)) {
            throw parse_error(lineno, "malformed size line");
        }
        break;
    }

    std::vector<std::tuple<std::size_t, std::size_t, double>> triplets;
    triplets.reserve(symmetric ? 2 * nentries : nentries);
    bool explicit_zero = false;
    for (std::size_t e = 0; e < nentries; ++e) {
        if (!std::getline(in, line)) throw parse_error(lineno + 1, "unexpected end of file");
        ++lineno;
        if (line.empty() || line[0] == '%') {
            --e;
            continue;
        }
        std::istringstream entry(line);
        std::size_t i = 0, j = 0;
        double v = 1.0;
        if (!(entry >> i >> j)) throw parse_error(lineno, "malformed entry");
        if (!pattern && !(entry >> v)) throw parse_error(lineno, "missing value");
        if (i < 1 || i > nrows || j < 1 || j > ncols) {
            throw parse_error(lineno, "entry index out of range");
        }
        if (v == 0.0) explicit_zero = true;
        triplets.emplace_back(i - 1, j - 1, v);
        if (symmetric && i != j) triplets.emplace_back(j - 1, i - 1, v);
    }

    if (report) {
        report->had_explicit_zeros = explicit_zero;
        report->symmetric = symmetric;
    }
    return SparseMatrix::from_triplets(nrows, ncols, std::move(triplets));
}

} // namespace rich

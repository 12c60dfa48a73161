#include <cmath>
#include <ostream>

#include "ddempc/dataset_csv.hpp"
#include "ddempc/lp.hpp"

namespace ddempc {

namespace {

// LP-format identifiers may not contain brackets or start with a digit.
std::string sanitize(const std::string& name, Index j) {
    if (name.empty()) return "x" + std::to_string(j);
    std::string out;
    for (char ch : name) {
        const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.';
        out += ok ? ch : '_';
    }
    if (std::isdigit(static_cast<unsigned char>(out.front()))) out = "v" + out;
    return out + "_" + std::to_string(j);
}

void write_term(std::ostream& os, double coeff, const std::string& var) {
    os << (coeff < 0 ? " - " : " + ") << format_number(std::abs(coeff)) << ' ' << var;
}

}  // namespace

void write_lp_dump(std::ostream& os, const LinearProgram& lp) {
    std::vector<std::string> names;
    for (Index j = 0; j < lp.variables(); ++j)
        names.push_back(sanitize(lp.names.empty() ? "" : lp.names[static_cast<std::size_t>(j)], j));

    os << "\\ dumped by ddempc: " << lp.variables() << " variables, " << lp.rows() << " rows\n";
    os << "Minimize\n obj:";
    bool any = false;
    for (Index j = 0; j < lp.variables(); ++j)
        if (lp.c(j) != 0.0) {
            write_term(os, lp.c(j), names[static_cast<std::size_t>(j)]);
            any = true;
        }
    if (!any) os << " 0 " << (names.empty() ? "x0" : names[0]);
    os << "\nSubject To\n";

    const Eigen::SparseMatrix<double, Eigen::RowMajor> rows = lp.A_eq;
    for (Index i = 0; i < rows.outerSize(); ++i) {
        os << " r" << i << ':';
        bool empty = true;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rows, i); it; ++it) {
            write_term(os, it.value(), names[static_cast<std::size_t>(it.col())]);
            empty = false;
        }
        if (empty) os << " 0 " << names[0];
        os << " = " << format_number(lp.b_eq(i)) << '\n';
    }

    os << "Bounds\n";
    for (Index j = 0; j < lp.variables(); ++j) {
        const auto& v = names[static_cast<std::size_t>(j)];
        const double lo = lp.lower(j), hi = lp.upper(j);
        if (std::isinf(lo) && std::isinf(hi)) os << ' ' << v << " free\n";
        else if (lo == hi) os << ' ' << v << " = " << format_number(lo) << '\n';
        else {
            os << ' ' << (std::isinf(lo) ? "-inf" : format_number(lo)) << " <= " << v << " <= "
               << (std::isinf(hi) ? "+inf" : format_number(hi)) << '\n';
        }
    }
    os << "End\n";
}

}  // namespace ddempc

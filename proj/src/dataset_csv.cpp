#include "ddempc/dataset_csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace ddempc {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_dataset_csv(std::ostream& os, const DataTrajectoryd& data) {
    os << "k";
    for (Index i = 0; i < data.inputs(); ++i) os << ",u_" << i + 1;
    for (Index i = 0; i < data.outputs(); ++i) os << ",y_" << i + 1;
    if (data.has_cost()) os << ",l";
    os << '\n';
    for (Index k = 0; k < data.length(); ++k) {
        os << k;
        for (Index i = 0; i < data.inputs(); ++i) os << ',' << format_number(data.u()(i, k));
        for (Index i = 0; i < data.outputs(); ++i) os << ',' << format_number(data.y()(i, k));
        if (data.has_cost()) os << ',' << format_number(data.cost()(k));
        os << '\n';
    }
}

void write_dataset_csv(const std::string& path, const DataTrajectoryd& data) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path + " for writing");
    write_dataset_csv(f, data);
    if (!f) throw IoError("write failed: " + path);
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        if (!field.empty() && field.back() == '\r') field.pop_back();
        out.push_back(field);
    }
    return out;
}

double parse_double(const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw IoError("dataset: not a number: '" + s + "'");
    }
    if (used != s.size()) throw IoError("dataset: trailing characters in '" + s + "'");
    return v;
}

}  // namespace

DataTrajectoryd read_dataset_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("dataset: missing header");
    const auto header = split(line);
    if (header.empty() || header[0] != "k") throw IoError("dataset: header must start with 'k'");
    Index m = 0, p = 0;
    bool cost = false;
    for (std::size_t i = 1; i < header.size(); ++i) {
        const auto& h = header[i];
        const auto expect = [&](const std::string& name) {
            if (h != name) throw IoError("dataset: unexpected column '" + h + "', wanted '" + name + "'");
        };
        if (h.rfind("u_", 0) == 0 && p == 0 && !cost) {
            expect("u_" + std::to_string(m + 1));
            ++m;
        } else if (h.rfind("y_", 0) == 0 && !cost) {
            expect("y_" + std::to_string(p + 1));
            ++p;
        } else if (h == "l" && !cost && i + 1 == header.size()) {
            cost = true;
        } else {
            throw IoError("dataset: unexpected column '" + h + "'");
        }
    }
    if (m == 0 || p == 0) throw IoError("dataset: need at least one input and one output column");

    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        const auto fields = split(line);
        if (fields.size() != header.size())
            throw IoError("dataset: row " + std::to_string(rows.size()) + " has wrong field count");
        if (parse_double(fields[0]) != static_cast<double>(rows.size()))
            throw IoError("dataset: rows must be numbered 0, 1, 2, ...");
        std::vector<double> r;
        for (std::size_t i = 1; i < fields.size(); ++i) r.push_back(parse_double(fields[i]));
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw IoError("dataset: no samples");

    const Index N = static_cast<Index>(rows.size());
    Signald u(m, N), y(p, N);
    Vecd l(N);
    for (Index k = 0; k < N; ++k) {
        const auto& r = rows[static_cast<std::size_t>(k)];
        for (Index i = 0; i < m; ++i) u(i, k) = r[static_cast<std::size_t>(i)];
        for (Index i = 0; i < p; ++i) y(i, k) = r[static_cast<std::size_t>(m + i)];
        if (cost) l(k) = r[static_cast<std::size_t>(m + p)];
    }
    if (cost) return {std::move(u), std::move(y), std::move(l)};
    return {std::move(u), std::move(y)};
}

DataTrajectoryd read_dataset_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open dataset " + path);
    return read_dataset_csv(f);
}

std::uint64_t dataset_fingerprint(const DataTrajectoryd& data) {
    std::ostringstream os;
    write_dataset_csv(os, data);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : os.str()) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace ddempc

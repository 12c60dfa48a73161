#include "ddempc/json_io.hpp"

#include <cmath>

namespace ddempc {

using nlohmann::json;

json vector_to_json(const Vecd& v) {
    json j = json::array();
    for (Index i = 0; i < v.size(); ++i) {
        if (std::isfinite(v(i))) j.push_back(v(i));
        else j.push_back(nullptr);
    }
    return j;
}

Vecd vector_from_json(const json& j, double null_value) {
    if (!j.is_array()) throw ConfigError("expected a JSON array of numbers");
    Vecd v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (j[i].is_null()) v(static_cast<Index>(i)) = null_value;
        else if (j[i].is_number()) v(static_cast<Index>(i)) = j[i].get<double>();
        else throw ConfigError("expected a number, got " + j[i].dump());
    }
    return v;
}

json matrix_to_json(const Matd& m) {
    json j = json::array();
    for (Index r = 0; r < m.rows(); ++r) j.push_back(vector_to_json(m.row(r).transpose()));
    return j;
}

Matd matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("expected a nonempty array of rows");
    const Index rows = static_cast<Index>(j.size());
    const Index cols = static_cast<Index>(j[0].size());
    Matd m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        const Vecd row = vector_from_json(j[static_cast<std::size_t>(r)]);
        if (row.size() != cols) throw ConfigError("ragged matrix rows");
        m.row(r) = row.transpose();
    }
    return m;
}

void to_json(json& j, const BoxSet& box) {
    j = json{{"lower", vector_to_json(box.lower)}, {"upper", vector_to_json(box.upper)}};
}

void from_json(const json& j, BoxSet& box) {
    box = BoxSet(vector_from_json(j.at("lower"), -kInf), vector_from_json(j.at("upper"), kInf));
}

void to_json(json& j, const LinearCost& cost) {
    j = json{{"l_u", vector_to_json(cost.l_u)}, {"l_y", vector_to_json(cost.l_y)}};
}

void from_json(const json& j, LinearCost& cost) {
    cost.l_u = vector_from_json(j.at("l_u"));
    cost.l_y = vector_from_json(j.at("l_y"));
}

const char* to_string(CostMode mode) {
    return mode == CostMode::known ? "known" : "data_driven";
}

CostMode cost_mode_from_string(const std::string& s) {
    if (s == "known") return CostMode::known;
    if (s == "data_driven") return CostMode::data_driven;
    throw ConfigError("unknown cost mode '" + s + "' (expected known or data_driven)");
}

void to_json(json& j, const EmpcConfig& cfg) {
    j = json{{"L", cfg.horizon},
             {"n", cfg.order},
             {"beta", cfg.beta},
             {"alpha_reg", cfg.alpha_reg},
             {"input_box", cfg.input_box},
             {"output_box", cfg.output_box},
             {"cost_mode", to_string(cfg.cost_mode)},
             {"cost", cfg.cost},
             {"pe_tol", cfg.pe_tol},
             {"feas_tol", cfg.lp.feas_tol},
             {"opt_tol", cfg.lp.opt_tol}};
    j["l_bar0"] = cfg.l_bar0 ? json(*cfg.l_bar0) : json("auto");
}

void from_json(const json& j, EmpcConfig& cfg) {
    cfg.horizon = j.at("L").get<Index>();
    cfg.order = j.at("n").get<Index>();
    cfg.beta = j.value("beta", 1.0);
    cfg.alpha_reg = j.value("alpha_reg", 1e-2);
    cfg.input_box = j.at("input_box").get<BoxSet>();
    cfg.output_box = j.at("output_box").get<BoxSet>();
    cfg.cost_mode = cost_mode_from_string(j.value("cost_mode", std::string("known")));
    cfg.cost = j.at("cost").get<LinearCost>();
    cfg.pe_tol = j.value("pe_tol", 1e-8);
    cfg.lp.feas_tol = j.value("feas_tol", 1e-9);
    cfg.lp.opt_tol = j.value("opt_tol", 1e-9);
    cfg.l_bar0.reset();
    if (j.contains("l_bar0")) {
        const auto& lb = j.at("l_bar0");
        if (lb.is_number()) cfg.l_bar0 = lb.get<double>();
        else if (!(lb.is_string() && lb.get<std::string>() == "auto"))
            throw ConfigError("l_bar0 must be a number or \"auto\"");
    }
}

}  // namespace ddempc

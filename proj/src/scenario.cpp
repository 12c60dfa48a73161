#include "ddempc/scenario.hpp"

#include <filesystem>
#include <fstream>

#include "ddempc/builtin_plants.hpp"
#include "ddempc/dataset_csv.hpp"
#include "ddempc/json_io.hpp"

namespace ddempc {

using nlohmann::json;

StateSpaced PlantSpec::resolve() const {
    if (model) return *model;
    if (auto p = builtin_plant(builtin)) return *p;
    throw ConfigError("unknown builtin plant '" + builtin + "' (known: reactor, scalar_test)");
}

std::vector<double> Scenario::betas() const {
    return beta_sweep.empty() ? std::vector<double>{controller.beta} : beta_sweep;
}

void Scenario::validate() const {
    const auto sys = plant.resolve();
    controller.validate(sys.inputs(), sys.outputs());
    if (steps < 1) throw ConfigError("scenario: T must be at least 1");
    for (double b : beta_sweep)
        if (!(b > 0)) throw ConfigError("scenario: every swept beta must be positive");
    if (data.file.empty() && !data.generate)
        throw ConfigError("scenario: data needs either a file or a generation recipe");
    if (data.generate && data.generate->input_box.channels() != sys.inputs())
        throw DimensionError("scenario: data input box does not match the plant");
    if (controller.cost.l_u.size() != sys.inputs() || controller.cost.l_y.size() != sys.outputs())
        throw DimensionError("scenario: stage cost does not match the plant");
    const auto& in = initial;
    if (in.xi && (in.x0 || in.warmup))
        throw ConfigError("scenario: give either an explicit xi or a warm-up, not both");
    if (in.x0 && in.x0->size() != sys.states())
        throw DimensionError("scenario: x0 does not match the plant state");
    if (in.warmup && (in.warmup->rows() != sys.inputs() || in.warmup->cols() < controller.order))
        throw DimensionError("scenario: warm-up inputs must be m x k with k >= n");
    if (in.xi && (in.xi->u.rows() != sys.inputs() || in.xi->y.rows() != sys.outputs() ||
                  in.xi->order() != controller.order || in.xi->y.cols() != controller.order))
        throw DimensionError("scenario: explicit xi must hold n samples per channel");
}

namespace {

// Signals are stored as one array per channel.
json signal_to_json(const Signald& s) { return matrix_to_json(s); }
Signald signal_from_json(const json& j) { return matrix_from_json(j); }

}  // namespace

void to_json(json& j, const Scenario& s) {
    j = json::object();
    j["name"] = s.name;
    if (s.plant.model) {
        const auto& m = *s.plant.model;
        j["plant"] = {{"A", matrix_to_json(m.A)}, {"B", matrix_to_json(m.B)},
                      {"C", matrix_to_json(m.C)}, {"D", matrix_to_json(m.D)}};
    } else {
        j["plant"] = {{"builtin", s.plant.builtin}};
    }
    json data = json::object();
    if (!s.data.file.empty()) data["file"] = s.data.file;
    if (s.data.generate) {
        const auto& g = *s.data.generate;
        data["generate"] = {{"N", g.length}, {"seed", g.seed}, {"input_box", g.input_box},
                            {"cost_column", g.cost_column}};
    }
    j["data"] = data;
    j["controller"] = s.controller;
    j["T"] = s.steps;
    j["sweep"] = {{"beta", s.beta_sweep}};
    json init = json::object();
    if (s.initial.x0) init["x0"] = vector_to_json(*s.initial.x0);
    if (s.initial.warmup) init["warmup"] = signal_to_json(*s.initial.warmup);
    if (s.initial.xi) init["xi"] = {{"u", signal_to_json(s.initial.xi->u)}, {"y", signal_to_json(s.initial.xi->y)}};
    j["initial"] = init;
    j["output_dir"] = s.output_dir;
}

void from_json(const json& j, Scenario& s) {
    s = Scenario{};
    s.name = j.value("name", std::string());
    const auto& p = j.at("plant");
    if (p.contains("builtin")) {
        s.plant.builtin = p.at("builtin").get<std::string>();
    } else {
        s.plant.model = StateSpaced(matrix_from_json(p.at("A")), matrix_from_json(p.at("B")),
                                    matrix_from_json(p.at("C")), matrix_from_json(p.at("D")));
    }
    const auto& d = j.at("data");
    s.data.file = d.value("file", std::string());
    if (d.contains("generate")) {
        const auto& g = d.at("generate");
        DataRecipe r;
        r.length = g.at("N").get<Index>();
        r.seed = g.value("seed", std::uint64_t{1});
        r.input_box = g.at("input_box").get<BoxSet>();
        r.cost_column = g.value("cost_column", false);
        s.data.generate = r;
    }
    s.controller = j.at("controller").get<EmpcConfig>();
    s.steps = j.value("T", Index{100});
    if (j.contains("sweep")) s.beta_sweep = j.at("sweep").value("beta", std::vector<double>{});
    if (j.contains("initial")) {
        const auto& in = j.at("initial");
        if (in.contains("x0")) s.initial.x0 = vector_from_json(in.at("x0"));
        if (in.contains("warmup")) s.initial.warmup = signal_from_json(in.at("warmup"));
        if (in.contains("xi"))
            s.initial.xi = ExtendedState{signal_from_json(in.at("xi").at("u")),
                                         signal_from_json(in.at("xi").at("y"))};
    }
    s.output_dir = j.value("output_dir", std::string("out"));
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("scenario " + path + ": " + e.what());
    }
    Scenario s;
    try {
        s = j.get<Scenario>();
    } catch (const json::exception& e) {
        throw ConfigError("scenario " + path + ": " + e.what());
    }
    namespace fs = std::filesystem;
    if (!s.data.file.empty() && fs::path(s.data.file).is_relative())
        s.data.file = (fs::path(path).parent_path() / s.data.file).lexically_normal().string();
    return s;
}

DataTrajectoryd load_dataset(const Scenario& s) {
    const bool dd = s.controller.cost_mode == CostMode::data_driven;
    if (!s.data.file.empty()) {
        auto data = read_dataset_csv(s.data.file);
        if (dd && !data.has_cost())
            throw ConfigError("data-driven cost mode needs a dataset with an l column");
        return data;
    }
    if (!s.data.generate) throw ConfigError("scenario: no data source");
    const auto& g = *s.data.generate;
    auto data = generate_pe_data(s.plant.resolve(), g.length, g.input_box, g.seed);
    if (g.cost_column || dd) {
        const LinearCost& l = s.controller.cost;
        data = data.with_cost([&](const auto& u, const auto& y) { return l(u, y); });
    }
    return data;
}

PlantStart initial_condition(const Scenario& s, const StateSpaced& plant) {
    const Index n = s.controller.order;
    if (s.initial.xi) return {*s.initial.xi, reconstruct_state(plant, s.initial.xi->u, s.initial.xi->y)};
    const Vecd x0 = s.initial.x0 ? *s.initial.x0 : Vecd::Zero(plant.states());
    const Signald u = s.initial.warmup ? *s.initial.warmup : Signald::Zero(plant.inputs(), n);
    return warm_up(plant, x0, u, n);
}

}  // namespace ddempc

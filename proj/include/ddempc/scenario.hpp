#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ddempc/empc.hpp"
#include "ddempc/receding_horizon.hpp"

namespace ddempc {

/// Either a builtin plant name or inline matrices.
struct PlantSpec {
    std::string builtin;
    std::optional<StateSpaced> model;

    StateSpaced resolve() const;
};

/// Open-loop experiment that produces the dataset.
struct DataRecipe {
    Index length = 100;
    std::uint64_t seed = 1;
    BoxSet input_box;
    /// Record l(u_k, y_k) with the controller's stage cost as a cost column.
    bool cost_column = false;
};

struct DataSpec {
    std::string file;  ///< dataset CSV; takes precedence over the recipe when set
    std::optional<DataRecipe> generate;
};

/// How xi_0 is obtained: an explicit window, or an open-loop warm-up from x0.
struct InitialSpec {
    std::optional<Vecd> x0;          ///< default: zero state
    std::optional<Signald> warmup;   ///< m x k inputs, k >= n; default: n zero inputs
    std::optional<ExtendedState> xi; ///< explicit window; the plant state is reconstructed
};

struct Scenario {
    std::string name;
    PlantSpec plant;
    DataSpec data;
    EmpcConfig controller;
    Index steps = 100;  ///< closed-loop length T
    std::vector<double> beta_sweep;
    InitialSpec initial;
    std::string output_dir = "out";

    /// Betas to run: the sweep list, or the single controller beta.
    std::vector<double> betas() const;

    /// Structural checks that do not touch the file system.
    void validate() const;
};

void to_json(nlohmann::json& j, const Scenario& s);
void from_json(const nlohmann::json& j, Scenario& s);

/// Reads a scenario file; a relative data path is resolved against the scenario's directory.
Scenario load_scenario(const std::string& path);

/// Reads or generates the dataset. In data-driven mode a generated dataset always carries the
/// cost column; a file dataset must already have one.
DataTrajectoryd load_dataset(const Scenario& s);

PlantStart initial_condition(const Scenario& s, const StateSpaced& plant);

}  // namespace ddempc

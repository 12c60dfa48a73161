#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ddempc/commands.hpp"
#include "ddempc/json_io.hpp"

using namespace ddempc;

namespace {

// Command-line values that override scenario fields when given.
struct Overrides {
    std::vector<double> beta;
    std::optional<Index> steps, horizon, order, length;
    std::optional<std::uint64_t> seed;
    std::optional<double> alpha_reg, l_bar0;
    std::optional<std::string> cost_mode, data_file, output_dir;

    void attach(CLI::App* app) {
        app->add_option("--beta", beta, "Beta values to sweep (replaces the scenario sweep)");
        app->add_option("--T", steps, "Closed-loop length");
        app->add_option("--L", horizon, "Prediction horizon");
        app->add_option("--n", order, "System order upper bound");
        app->add_option("--N", length, "Number of generated data samples");
        app->add_option("--seed", seed, "Data generation seed");
        app->add_option("--alpha-reg", alpha_reg, "l1 weight on alpha");
        app->add_option("--l-bar0", l_bar0, "Initial terminal-cost bound (default: optimal achievable cost)");
        app->add_option("--cost-mode", cost_mode, "known or data_driven")
            ->check(CLI::IsMember({"known", "data_driven"}));
        app->add_option("--data", data_file, "Dataset CSV to use instead of generating one");
        app->add_option("--output-dir", output_dir, "Directory for run outputs");
    }

    void apply(Scenario& s) const {
        if (!beta.empty()) s.beta_sweep = beta;
        if (steps) s.steps = *steps;
        if (horizon) s.controller.horizon = *horizon;
        if (order) s.controller.order = *order;
        if (alpha_reg) s.controller.alpha_reg = *alpha_reg;
        if (l_bar0) s.controller.l_bar0 = *l_bar0;
        if (cost_mode) s.controller.cost_mode = cost_mode_from_string(*cost_mode);
        if (data_file) s.data.file = *data_file;
        if (output_dir) s.output_dir = *output_dir;
        if ((length || seed) && !s.data.generate)
            throw ConfigError("--N and --seed need a scenario with a generation recipe");
        if (length) s.data.generate->length = *length;
        if (seed) s.data.generate->seed = *seed;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Data-driven economic MPC experiments"};
    app.require_subcommand(1);

    std::string scenario_path;
    Overrides ov;
    const auto scenario_verb = [&](const std::string& name, const std::string& help) {
        auto* cmd = app.add_subcommand(name, help);
        cmd->add_option("scenario", scenario_path, "Scenario JSON file")->required();
        ov.attach(cmd);
        return cmd;
    };

    std::string out_path;
    auto* gen = scenario_verb("gen-data", "Generate the scenario dataset and check its excitation");
    gen->add_option("-o,--out", out_path, "Dataset CSV path (default: <output_dir>/data.csv)");

    std::optional<Index> pe_order;
    auto* pe = scenario_verb("check-pe", "Excitation report of the scenario dataset");
    pe->add_option("--order", pe_order, "Excitation order (default: L + 2n + 1)");

    std::optional<double> l_bar;
    auto* once = scenario_verb("solve-once", "Solve one EMPC problem from the initial condition");
    once->add_option("--l-bar", l_bar, "Terminal-cost bound for this solve");

    auto* run = scenario_verb("run", "Closed-loop runs over the beta sweep");

    CLI11_PARSE(app, argc, argv);

    return guarded(
        [&]() -> int {
            Scenario s = load_scenario(scenario_path);
            ov.apply(s);
            if (gen->parsed()) {
                if (out_path.empty()) out_path = (std::filesystem::path(s.output_dir) / "data.csv").string();
                return cmd_gen_data(s, out_path, std::cout);
            }
            if (pe->parsed()) {
                s.validate();
                return cmd_check_pe(load_dataset(s), pe_order.value_or(s.controller.required_pe_order()),
                                    s.controller.pe_tol, std::cout);
            }
            if (once->parsed()) return cmd_solve_once(s, l_bar, std::cout);
            if (run->parsed()) return cmd_run(s, std::cout);
            return kExitUsage;
        },
        std::cerr);
}

#include "ddempc/commands.hpp"

#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>
#include <vector>

#include "ddempc/dataset_csv.hpp"
#include "ddempc/json_io.hpp"

namespace ddempc {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    f << text;
    if (!f) throw IoError("write failed for " + path.string());
}

void print_pe(const PeReport& r, Index length, Index m, std::ostream& out) {
    out << "persistency of excitation, order " << r.order << ": "
        << (r.exciting ? "PASS" : "FAIL") << "\n"
        << "  rank " << r.rank << " of " << r.required_rank << "\n"
        << "  sigma_max " << format_number(r.sigma_max) << ", sigma_" << r.required_rank << " "
        << format_number(r.sigma_required) << ", margin " << format_number(r.gap) << "\n";
    const Index needed = (m + 1) * r.order - 1;
    if (length < needed)
        out << "  N = " << length << " is below (m + 1) * " << r.order << " - 1 = " << needed
            << ": the Hankel matrix has fewer columns than the required rank\n";
    if (!r.exciting) out << "  deficient order: " << r.order << "\n";
}

}  // namespace

std::string beta_tag(double beta) { return format_number(beta); }

int cmd_gen_data(const Scenario& s, const std::string& path, std::ostream& out) {
    s.validate();
    const auto data = load_dataset(s);
    if (auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
    write_dataset_csv(path, data);
    out << "wrote " << data.length() << " samples to " << path << " (rng " << kDataRngName << ")\n";
    const auto r = is_persistently_exciting(data.u(), s.controller.required_pe_order(), s.controller.pe_tol);
    print_pe(r, data.length(), data.inputs(), out);
    return r.exciting ? kExitOk : kExitFailure;
}

int cmd_check_pe(const DataTrajectoryd& data, Index order, double tol, std::ostream& out) {
    const auto r = is_persistently_exciting(data.u(), order, tol);
    print_pe(r, data.length(), data.inputs(), out);
    return r.exciting ? kExitOk : kExitFailure;
}

int cmd_solve_once(const Scenario& s, std::optional<double> l_bar, std::ostream& out) {
    s.validate();
    const auto plant = s.plant.resolve();
    const auto data = load_dataset(s);
    EmpcConfig cfg = s.controller;
    cfg.beta = s.betas().front();
    const auto start = initial_condition(s, plant);
    const double lb = l_bar ? *l_bar
                            : cfg.l_bar0 ? *cfg.l_bar0 : optimal_achievable_cost(data, start.xi, cfg);

    const auto sol = solve_empc(data, start.xi, lb, cfg);
    out << "status " << to_string(sol.status) << " after " << sol.iterations << " iterations\n"
        << "l_bar " << format_number(lb) << "\n";
    if (!sol.optimal()) {
        if (sol.status == LpStatus::infeasible)
            out << "first infeasible constraint family: "
                << to_string(diagnose_infeasibility(data, start.xi, lb, cfg)) << "\n";
        return kExitFailure;
    }
    const auto list = [](const Vecd& v) {
        std::string r;
        for (Index i = 0; i < v.size(); ++i) r += (i ? " " : "") + format_number(v(i));
        return r;
    };
    out << "u_e " << list(sol.ue) << "\n"
        << "y_e " << list(sol.ye) << "\n"
        << "terminal_cost " << format_number(sol.terminal_cost) << "\n"
        << "objective " << format_number(sol.objective) << "\n"
        << "objective_with_reg " << format_number(sol.objective_with_reg) << "\n"
        << "alpha_l1 " << format_number(sol.alpha.lpNorm<1>()) << "\n"
        << "u_0 " << list(sol.first_input()) << "\n";

    const double tol = 1e-7;
    Index active = 0;
    const auto report = [&](const char* sig, Index k, Index j, double v, const BoxSet& box) {
        const char* side = std::abs(v - box.lower(j)) <= tol ? "lower"
                           : std::abs(v - box.upper(j)) <= tol ? "upper" : nullptr;
        if (!side) return;
        out << "  active " << sig << "[" << k << "," << j << "] at " << side << " bound\n";
        ++active;
    };
    for (Index k = 0; k <= cfg.horizon; ++k) {
        const Index c = k + cfg.order;
        for (Index j = 0; j < sol.u.rows(); ++j) report("u", k, j, sol.u(j, c), cfg.input_box);
        for (Index j = 0; j < sol.y.rows(); ++j) report("y", k, j, sol.y(j, c), cfg.output_box);
    }
    out << "active box constraints " << active << "\n";
    return kExitOk;
}

int cmd_run(const Scenario& s, std::ostream& out) {
    s.validate();
    const auto plant = s.plant.resolve();
    const auto data = load_dataset(s);
    const auto start = initial_condition(s, plant);
    const auto betas = s.betas();

    struct Outcome {
        std::optional<ClosedLoopLog> log;
        std::string error;
    };
    std::vector<std::future<Outcome>> jobs;
    for (double beta : betas) {
        jobs.push_back(std::async(std::launch::async, [&, beta] {
            EmpcConfig cfg = s.controller;
            cfg.beta = beta;
            try {
                return Outcome{run_closed_loop(plant, data, start, cfg, s.steps), {}};
            } catch (const Error& e) {
                return Outcome{std::nullopt, e.what()};
            }
        }));
    }
    std::vector<Outcome> results;
    for (auto& j : jobs) results.push_back(j.get());

    const fs::path dir = s.output_dir;
    fs::create_directories(dir);
    nlohmann::json summary;
    summary["scenario"] = s.name;
    summary["runs"] = nlohmann::json::array();
    bool ok = true;
    for (std::size_t i = 0; i < betas.size(); ++i) {
        const auto& r = results[i];
        nlohmann::json run;
        run["beta"] = betas[i];
        if (!r.log) {
            ok = false;
            run["error"] = r.error;
            out << "beta " << beta_tag(betas[i]) << ": FAILED: " << r.error << "\n";
        } else {
            std::ostringstream csv;
            write_log_csv(csv, *r.log);
            const std::string file = "log_beta_" + beta_tag(betas[i]) + ".csv";
            write_text(dir / file, csv.str());
            run["log"] = file;
            run["summary"] = summary_json(*r.log);
            const auto mono = monotonicity_audit(*r.log);
            const double viol = max_constraint_violation(*r.log);
            const bool run_ok = mono.ok && viol <= 1e-8 && run["summary"]["all_optimal"].get<bool>();
            ok = ok && run_ok;
            out << "beta " << beta_tag(betas[i]) << ": tail average "
                << format_number(average_performance(*r.log, kDefaultTail)) << ", final terminal cost "
                << format_number(r.log->steps.back().terminal_cost) << ", audits "
                << (run_ok ? "pass" : "FAIL") << "\n";
        }
        summary["runs"].push_back(run);
    }
    summary["all_ok"] = ok;

    std::ostringstream plot;
    plot << 't';
    for (double b : betas) plot << ",beta_" << beta_tag(b);
    plot << '\n';
    for (Index t = 0; t < s.steps; ++t) {
        plot << t;
        for (const auto& r : results) {
            plot << ',';
            if (r.log && t < r.log->size()) plot << format_number(r.log->steps[static_cast<std::size_t>(t)].stage_cost);
        }
        plot << '\n';
    }
    write_text(dir / "plot_data.csv", plot.str());
    write_text(dir / "summary.json", summary.dump(2) + "\n");
    out << "outputs in " << dir.string() << "\n";
    return ok ? kExitOk : kExitFailure;
}

int guarded(const std::function<int()>& verb, std::ostream& err) {
    try {
        return verb();
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ExcitationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    } catch (const InitialInfeasibilityError& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    } catch (const InvariantViolationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

}  // namespace ddempc

#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include "ddempc/scenario.hpp"

namespace ddempc {

/// Process exit codes of the command-line verbs.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,  ///< non-optimal solve, failed audit or insufficient excitation
    kExitUsage = 2,    ///< invalid scenario or arguments
    kExitIo = 3
};

/// Writes the scenario's dataset to `path` and prints the excitation report.
int cmd_gen_data(const Scenario& s, const std::string& path, std::ostream& out);

/// Excitation report of the inputs at the given order.
int cmd_check_pe(const DataTrajectoryd& data, Index order, double tol, std::ostream& out);

/// One EMPC solve from the scenario's initial condition. Without `l_bar` the controller's
/// l_bar0 (or l°(xi_0, L)) is used.
int cmd_solve_once(const Scenario& s, std::optional<double> l_bar, std::ostream& out);

/**
 * @brief Closed-loop run for every beta of the sweep, executed concurrently.
 *
 * Writes log_beta_<beta>.csv per run, plot_data.csv (t and one stage-cost column per beta)
 * and summary.json into s.output_dir.
 */
int cmd_run(const Scenario& s, std::ostream& out);

/// Runs a verb and maps library exceptions to exit codes, reporting them on `err`.
int guarded(const std::function<int()>& verb, std::ostream& err);

/// File-name tag of a beta value, e.g. 1000 -> "1000", 0.5 -> "0.5".
std::string beta_tag(double beta);

}  // namespace ddempc

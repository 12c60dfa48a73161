#include "ddempc/lp.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

#include "ddempc/errors.hpp"

namespace ddempc {

void LinearProgram::validate() const {
    const Index n = c.size();
    if (lower.size() != n || upper.size() != n || A_eq.cols() != n || A_eq.rows() != b_eq.size())
        throw DimensionError("LinearProgram: inconsistent dimensions");
    if (!names.empty() && static_cast<Index>(names.size()) != n)
        throw DimensionError("LinearProgram: name map size differs from variable count");
    for (Index j = 0; j < n; ++j) {
        if (!(lower(j) <= upper(j)))
            throw ConfigError("LinearProgram: lower bound exceeds upper bound for variable " +
                              std::to_string(j));
        if (lower(j) == kInf || upper(j) == -kInf)
            throw ConfigError("LinearProgram: bound on the wrong side of infinity");
    }
    if (!c.allFinite() || !b_eq.allFinite())
        throw ConfigError("LinearProgram: non-finite cost or right-hand side");
}

Index LpBuilder::add_variable(std::string name, double lower, double upper, double cost) {
    names_.push_back(std::move(name));
    lower_.push_back(lower);
    upper_.push_back(upper);
    cost_.push_back(cost);
    return variables() - 1;
}

Index LpBuilder::add_variables(Index count, const std::string& prefix, double lower, double upper,
                               double cost) {
    const Index first = variables();
    for (Index i = 0; i < count; ++i)
        add_variable(prefix + "[" + std::to_string(i) + "]", lower, upper, cost);
    return first;
}

Index LpBuilder::add_row(const std::vector<std::pair<Index, double>>& terms, double rhs) {
    const Index row = add_empty_row(rhs);
    for (const auto& [col, v] : terms) add_entry(row, col, v);
    return row;
}

Index LpBuilder::add_empty_row(double rhs) {
    rhs_.push_back(rhs);
    return rows() - 1;
}

void LpBuilder::add_entry(Index row, Index col, double value) {
    if (value != 0.0) entries_.emplace_back(row, col, value);
}

void LpBuilder::set_bounds(Index col, double lower, double upper) {
    lower_[static_cast<std::size_t>(col)] = lower;
    upper_[static_cast<std::size_t>(col)] = upper;
}

LinearProgram LpBuilder::build() const {
    LinearProgram lp;
    const Index n = variables();
    lp.c = Eigen::Map<const Vecd>(cost_.data(), n);
    lp.lower = Eigen::Map<const Vecd>(lower_.data(), n);
    lp.upper = Eigen::Map<const Vecd>(upper_.data(), n);
    lp.b_eq = Eigen::Map<const Vecd>(rhs_.data(), rows());
    lp.A_eq.resize(rows(), n);
    lp.A_eq.setFromTriplets(entries_.begin(), entries_.end());
    lp.A_eq.makeCompressed();
    lp.names = names_;
    lp.validate();
    return lp;
}

const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::unbounded: return "unbounded";
        case LpStatus::numerical_failure: return "numerical-failure";
    }
    return "unknown";
}

LpCheck check_solution(const LinearProgram& lp, const Vecd& x) {
    LpCheck chk;
    if (lp.rows() > 0) chk.primal_residual = (lp.A_eq * x - lp.b_eq).cwiseAbs().maxCoeff();
    for (Index j = 0; j < x.size(); ++j) {
        chk.bound_violation = std::max(chk.bound_violation, lp.lower(j) - x(j));
        chk.bound_violation = std::max(chk.bound_violation, x(j) - lp.upper(j));
    }
    chk.objective = lp.c.dot(x);
    return chk;
}

namespace {

enum class VarState : unsigned char { basic, at_lower, at_upper, free_zero };

class Simplex {
public:
    Simplex(const LinearProgram& lp, const LpOptions& opt, double harris_scale = 0.5)
        : lp_(lp), opt_(opt), harris_scale_(harris_scale), m_(lp.rows()), ns_(lp.variables()),
          nt_(ns_ + m_) {}

    LpResult run();

private:
    // Columns ns_ .. nt_-1 are artificials, one per row, with coefficient art_sign_(row).
    template <typename Fn>
    void for_column(Index j, Fn&& fn) const {
        if (j < ns_) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(lp_.A_eq, j); it; ++it)
                fn(it.row(), it.value());
        } else {
            fn(j - ns_, art_sign_(j - ns_));
        }
    }

    double column_dot(Index j, const Vecd& v) const {
        double s = 0.0;
        for_column(j, [&](Index i, double a) { s += a * v(i); });
        return s;
    }

    void initialize();
    bool refactor();
    void recompute_basic_values();
    enum class PhaseOutcome { optimal, unbounded, iteration_limit, singular };
    PhaseOutcome iterate(const Vecd& cost);

    const LinearProgram& lp_;
    const LpOptions& opt_;
    double harris_scale_;
    const Index m_, ns_, nt_;

    Vecd lo_, up_, x_, art_sign_;
    std::vector<VarState> state_;
    std::vector<Index> head_;
    Matd binv_;
    Index iterations_ = 0;
    Index max_iterations_ = 0;
    Index since_refactor_ = 0;
    double dual_infeasibility_ = 0.0;
};

void Simplex::initialize() {
    lo_.resize(nt_);
    up_.resize(nt_);
    x_.setZero(nt_);
    state_.assign(static_cast<std::size_t>(nt_), VarState::at_lower);
    lo_.head(ns_) = lp_.lower;
    up_.head(ns_) = lp_.upper;

    for (Index j = 0; j < ns_; ++j) {
        auto& st = state_[static_cast<std::size_t>(j)];
        if (std::isfinite(lo_(j))) {
            x_(j) = lo_(j);
            st = VarState::at_lower;
        } else if (std::isfinite(up_(j))) {
            x_(j) = up_(j);
            st = VarState::at_upper;
        } else {
            x_(j) = 0.0;
            st = VarState::free_zero;
        }
    }

    Vecd residual = lp_.b_eq - lp_.A_eq * x_.head(ns_);

    // Crash: a column with a single nonzero can absorb its row's residual if the
    // resulting value respects its bounds. Remaining rows get an artificial.
    std::vector<Index> singleton(static_cast<std::size_t>(m_), -1);
    for (Index j = 0; j < ns_; ++j) {
        if (lp_.A_eq.col(j).nonZeros() != 1) continue;
        Eigen::SparseMatrix<double>::InnerIterator it(lp_.A_eq, j);
        const Index row = it.row();
        const double v = x_(j) + residual(row) / it.value();
        if (singleton[static_cast<std::size_t>(row)] < 0 && v >= lo_(j) && v <= up_(j) &&
            std::abs(it.value()) >= 1e-3)
            singleton[static_cast<std::size_t>(row)] = j;
    }

    art_sign_.resize(m_);
    head_.assign(static_cast<std::size_t>(m_), -1);
    binv_.setZero(m_, m_);
    for (Index i = 0; i < m_; ++i) {
        const Index a = ns_ + i;
        const Index j = singleton[static_cast<std::size_t>(i)];
        art_sign_(i) = residual(i) >= 0 ? 1.0 : -1.0;
        if (j >= 0) {
            const double coeff = lp_.A_eq.coeff(i, j);
            x_(j) += residual(i) / coeff;
            state_[static_cast<std::size_t>(j)] = VarState::basic;
            head_[static_cast<std::size_t>(i)] = j;
            binv_(i, i) = 1.0 / coeff;
            lo_(a) = 0.0;
            up_(a) = 0.0;
            x_(a) = 0.0;
            state_[static_cast<std::size_t>(a)] = VarState::at_lower;
        } else {
            x_(a) = std::abs(residual(i));
            lo_(a) = 0.0;
            up_(a) = kInf;
            state_[static_cast<std::size_t>(a)] = VarState::basic;
            head_[static_cast<std::size_t>(i)] = a;
            binv_(i, i) = art_sign_(i);
        }
    }
}

bool Simplex::refactor() {
    since_refactor_ = 0;
    if (m_ == 0) return true;
    Matd basis = Matd::Zero(m_, m_);
    for (Index i = 0; i < m_; ++i)
        for_column(head_[static_cast<std::size_t>(i)], [&](Index r, double a) { basis(r, i) = a; });
    Eigen::PartialPivLU<Matd> lu(basis);
    if (!(lu.rcond() > 1e-14)) return false;
    binv_ = lu.inverse();
    recompute_basic_values();
    return true;
}

void Simplex::recompute_basic_values() {
    Vecd rhs = lp_.b_eq;
    for (Index j = 0; j < nt_; ++j) {
        if (state_[static_cast<std::size_t>(j)] == VarState::basic || x_(j) == 0.0) continue;
        const double xj = x_(j);
        for_column(j, [&](Index r, double a) { rhs(r) -= a * xj; });
    }
    const Vecd xb = binv_ * rhs;
    for (Index i = 0; i < m_; ++i) x_(head_[static_cast<std::size_t>(i)]) = xb(i);
}

Simplex::PhaseOutcome Simplex::iterate(const Vecd& cost) {
    const double cscale = std::max(1.0, cost.cwiseAbs().maxCoeff());
    const double dtol = opt_.opt_tol * cscale;
    const double ptol = 1e-9;      // smallest usable pivot magnitude
    const double rel_ptol = 1e-7;  // smallest pivot relative to the largest column entry
    const double harris = harris_scale_ * opt_.feas_tol;
    Index degenerate_run = 0;
    bool fresh = false;
    std::vector<char> rejected(static_cast<std::size_t>(nt_), 0);
    bool any_rejected = false;
    bool accept_small = false;

    Vecd y(m_), w(m_), cb(m_);
    for (;;) {
        if (iterations_ >= max_iterations_) return PhaseOutcome::iteration_limit;
        if (since_refactor_ >= opt_.refactor_interval) {
            if (!refactor()) return PhaseOutcome::singular;
        }

        for (Index i = 0; i < m_; ++i) cb(i) = cost(head_[static_cast<std::size_t>(i)]);
        y.noalias() = binv_.transpose() * cb;

        const bool bland = degenerate_run >= opt_.degenerate_threshold;
        Index entering = -1;
        double best = 0.0;
        int dir = 0;
        double worst_dual = 0.0;
        for (Index j = 0; j < nt_; ++j) {
            const auto st = state_[static_cast<std::size_t>(j)];
            if (st == VarState::basic || lo_(j) == up_(j)) continue;
            const double d = cost(j) - column_dot(j, y);
            int jdir = 0;
            if ((st == VarState::at_lower || st == VarState::free_zero) && d < -dtol) jdir = 1;
            else if ((st == VarState::at_upper || st == VarState::free_zero) && d > dtol) jdir = -1;
            const double viol = st == VarState::free_zero ? std::abs(d)
                                : st == VarState::at_lower ? -d : d;
            worst_dual = std::max(worst_dual, viol);
            if (jdir == 0 || rejected[static_cast<std::size_t>(j)]) continue;
            if (bland) {
                entering = j;
                dir = jdir;
                break;
            }
            if (std::abs(d) > best) {
                best = std::abs(d);
                entering = j;
                dir = jdir;
            }
        }
        dual_infeasibility_ = std::max(0.0, worst_dual) / cscale;

        if (entering < 0 && any_rejected) {
            // Only rejected candidates remain: refactor for accuracy and take the small pivot.
            if (!refactor()) return PhaseOutcome::singular;
            std::fill(rejected.begin(), rejected.end(), 0);
            any_rejected = false;
            accept_small = true;
            continue;
        }
        if (entering < 0) {
            if (fresh || since_refactor_ == 0) return PhaseOutcome::optimal;
            if (!refactor()) return PhaseOutcome::singular;
            fresh = true;
            continue;
        }
        fresh = false;

        w.setZero();
        for_column(entering, [&](Index r, double a) { w.noalias() += a * binv_.col(r); });

        // Basic variable i moves at rate g_i = -dir * w_i per unit step.
        Index leave_row = -1;
        double theta = kInf;
        if (!bland) {
            double theta_max = kInf;
            for (Index i = 0; i < m_; ++i) {
                const double g = -dir * w(i);
                if (std::abs(g) <= ptol) continue;
                const Index b = head_[static_cast<std::size_t>(i)];
                const double xb = x_(b);
                double r = kInf;
                if (g < 0 && std::isfinite(lo_(b))) r = (xb - lo_(b) + harris) / -g;
                else if (g > 0 && std::isfinite(up_(b))) r = (up_(b) - xb + harris) / g;
                theta_max = std::min(theta_max, r);
            }
            if (std::isfinite(theta_max)) {
                double best_piv = -1.0;
                for (Index i = 0; i < m_; ++i) {
                    const double g = -dir * w(i);
                    if (std::abs(g) <= ptol) continue;
                    const Index b = head_[static_cast<std::size_t>(i)];
                    double r = kInf;
                    if (g < 0 && std::isfinite(lo_(b))) r = (x_(b) - lo_(b)) / -g;
                    else if (g > 0 && std::isfinite(up_(b))) r = (up_(b) - x_(b)) / g;
                    if (r > theta_max) continue;
                    const bool better =
                        std::abs(g) > best_piv ||
                        (std::abs(g) == best_piv && b < head_[static_cast<std::size_t>(leave_row)]);
                    if (better) {
                        best_piv = std::abs(g);
                        leave_row = i;
                        theta = std::max(0.0, r);
                    }
                }
            }
        } else {
            for (Index i = 0; i < m_; ++i) {
                const double g = -dir * w(i);
                if (std::abs(g) <= ptol) continue;
                const Index b = head_[static_cast<std::size_t>(i)];
                double r = kInf;
                if (g < 0 && std::isfinite(lo_(b))) r = std::max(0.0, (x_(b) - lo_(b)) / -g);
                else if (g > 0 && std::isfinite(up_(b))) r = std::max(0.0, (up_(b) - x_(b)) / g);
                if (!std::isfinite(r)) continue;
                const bool better =
                    leave_row < 0 || r < theta - 1e-12 ||
                    (r <= theta + 1e-12 && b < head_[static_cast<std::size_t>(leave_row)]);
                if (better) {
                    leave_row = i;
                    theta = r;
                }
            }
        }

        const double flip = up_(entering) - lo_(entering);
        const bool bound_flip = std::isfinite(flip) && flip <= theta;
        if (leave_row < 0 && !bound_flip) return PhaseOutcome::unbounded;
        if (bound_flip) theta = flip;

        // A pivot that is tiny next to the rest of the column would leave a nearly singular
        // basis. Skip this entering candidate for now and try the others.
        if (!bound_flip && !accept_small &&
            std::abs(w(leave_row)) < rel_ptol * w.cwiseAbs().maxCoeff()) {
            rejected[static_cast<std::size_t>(entering)] = 1;
            any_rejected = true;
            ++iterations_;
            continue;
        }
        accept_small = false;
        if (theta > 1e-12 && any_rejected) {
            std::fill(rejected.begin(), rejected.end(), 0);
            any_rejected = false;
        }

        ++iterations_;
        ++since_refactor_;
        degenerate_run = theta <= 1e-12 ? degenerate_run + 1 : 0;

        if (theta > 0) {
            x_(entering) += dir * theta;
            for (Index i = 0; i < m_; ++i) x_(head_[static_cast<std::size_t>(i)]) -= dir * theta * w(i);
        }

        auto& est = state_[static_cast<std::size_t>(entering)];
        if (bound_flip) {
            est = dir > 0 ? VarState::at_upper : VarState::at_lower;
            x_(entering) = dir > 0 ? up_(entering) : lo_(entering);
            continue;
        }

        const Index leaving = head_[static_cast<std::size_t>(leave_row)];
        const double g = -dir * w(leave_row);
        if (g < 0) {
            x_(leaving) = lo_(leaving);
            state_[static_cast<std::size_t>(leaving)] = VarState::at_lower;
        } else {
            x_(leaving) = up_(leaving);
            state_[static_cast<std::size_t>(leaving)] =
                lo_(leaving) == up_(leaving) ? VarState::at_lower : VarState::at_upper;
        }
        est = VarState::basic;
        head_[static_cast<std::size_t>(leave_row)] = entering;

        const double piv = w(leave_row);
        binv_.row(leave_row) /= piv;
        for (Index i = 0; i < m_; ++i) {
            if (i == leave_row || w(i) == 0.0) continue;
            binv_.row(i).noalias() -= w(i) * binv_.row(leave_row);
        }
    }
}

LpResult Simplex::run() {
    LpResult res;
    max_iterations_ = opt_.max_iterations > 0 ? opt_.max_iterations : 50 * (m_ + nt_) + 1000;
    initialize();

    const auto finish = [&](LpStatus status) {
        res.status = status;
        res.iterations = iterations_;
        res.dual_infeasibility = dual_infeasibility_;
        res.x = x_.head(ns_);
        const auto chk = check_solution(lp_, res.x);
        res.primal_residual = chk.primal_residual;
        res.bound_violation = chk.bound_violation;
        res.objective = chk.objective;
        if (status == LpStatus::optimal &&
            (chk.primal_residual > opt_.feas_tol || chk.bound_violation > opt_.feas_tol))
            res.status = LpStatus::numerical_failure;
        return res;
    };

    bool needs_phase1 = false;
    for (Index i = 0; i < m_; ++i)
        if (head_[static_cast<std::size_t>(i)] >= ns_) needs_phase1 = true;

    if (needs_phase1) {
        Vecd phase1_cost = Vecd::Zero(nt_);
        phase1_cost.tail(m_).setOnes();
        const auto out = iterate(phase1_cost);
        if (out == PhaseOutcome::singular || out == PhaseOutcome::iteration_limit)
            return finish(LpStatus::numerical_failure);
        if (!refactor()) return finish(LpStatus::numerical_failure);
        double infeas = 0.0;
        for (Index i = 0; i < m_; ++i) infeas = std::max(infeas, std::abs(x_(ns_ + i)));
        if (infeas > opt_.feas_tol) return finish(LpStatus::infeasible);
        for (Index i = 0; i < m_; ++i) {
            lo_(ns_ + i) = 0.0;
            up_(ns_ + i) = 0.0;
            if (state_[static_cast<std::size_t>(ns_ + i)] != VarState::basic) x_(ns_ + i) = 0.0;
        }
    }

    Vecd phase2_cost = Vecd::Zero(nt_);
    phase2_cost.head(ns_) = lp_.c;
    switch (iterate(phase2_cost)) {
        case PhaseOutcome::optimal: break;
        case PhaseOutcome::unbounded: return finish(LpStatus::unbounded);
        default: return finish(LpStatus::numerical_failure);
    }
    return finish(LpStatus::optimal);
}

}  // namespace

LpResult solve_lp(const LinearProgram& lp, const LpOptions& options) {
    lp.validate();
    auto res = Simplex(lp, options).run();
    if (res.status != LpStatus::numerical_failure) return res;
    // Retry with Bland pricing and a tighter ratio-test tolerance.
    LpOptions careful = options;
    careful.degenerate_threshold = 0;
    auto again = Simplex(lp, careful, 0.05).run();
    again.iterations += res.iterations;
    return again;
}

LinearProgram l1_epigraph_augment(const LinearProgram& lp, Index first, Index count,
                                  double weight) {
    if (weight < 0) throw ConfigError("l1_epigraph_augment: weight must be nonnegative");
    if (first < 0 || count < 0 || first + count > lp.variables())
        throw DimensionError("l1_epigraph_augment: variable block out of range");
    const Index n0 = lp.variables(), m0 = lp.rows();
    const Index n1 = n0 + 3 * count, m1 = m0 + 2 * count;

    LinearProgram out;
    out.c = Vecd::Zero(n1);
    out.c.head(n0) = lp.c;
    out.c.segment(n0, count).setConstant(weight);
    out.lower = Vecd::Zero(n1);
    out.upper = Vecd::Constant(n1, kInf);
    out.lower.head(n0) = lp.lower;
    out.upper.head(n0) = lp.upper;
    out.b_eq = Vecd::Zero(m1);
    out.b_eq.head(m0) = lp.b_eq;

    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(lp.A_eq.nonZeros() + 6 * count));
    for (Index j = 0; j < lp.A_eq.outerSize(); ++j)
        for (Eigen::SparseMatrix<double>::InnerIterator it(lp.A_eq, j); it; ++it)
            t.emplace_back(it.row(), it.col(), it.value());
    for (Index i = 0; i < count; ++i) {
        const Index a = first + i, s = n0 + i, w1 = n0 + count + i, w2 = n0 + 2 * count + i;
        const Index r1 = m0 + 2 * i, r2 = r1 + 1;
        t.emplace_back(r1, a, 1.0);
        t.emplace_back(r1, s, -1.0);
        t.emplace_back(r1, w1, 1.0);
        t.emplace_back(r2, a, -1.0);
        t.emplace_back(r2, s, -1.0);
        t.emplace_back(r2, w2, 1.0);
    }
    out.A_eq.resize(m1, n1);
    out.A_eq.setFromTriplets(t.begin(), t.end());
    out.A_eq.makeCompressed();

    out.names = lp.names;
    if (out.names.empty())
        for (Index j = 0; j < n0; ++j) out.names.push_back("x[" + std::to_string(j) + "]");
    out.names.resize(static_cast<std::size_t>(n1));
    for (Index i = 0; i < count; ++i) {
        const auto& base = out.names[static_cast<std::size_t>(first + i)];
        out.names[static_cast<std::size_t>(n0 + i)] = "abs_" + base;
        out.names[static_cast<std::size_t>(n0 + count + i)] = "ubslack_" + base;
        out.names[static_cast<std::size_t>(n0 + 2 * count + i)] = "lbslack_" + base;
    }
    return out;
}

}  // namespace ddempc

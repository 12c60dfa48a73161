#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "ddempc/hankel.hpp"
#include "ddempc/lti_plant.hpp"

using namespace ddempc;

TEST_CASE("build_hankel") {
    SUBCASE("scalar signal") {
        const Signald s = (Signald(1, 4) << 1, 2, 3, 4).finished();
        const auto h = build_hankel(s, 2);
        const Matd expect = (Matd(2, 3) << 1, 2, 3, 2, 3, 4).finished();
        CHECK(h.entries == expect);
        CHECK(h.cols() == 3);
    }
    SUBCASE("depth equal to length gives one stacked column") {
        const Signald s = Signald::Random(2, 5);
        const auto h = build_hankel(s, 5);
        CHECK(h.cols() == 1);
        CHECK(h.entries.col(0) == stack(s));
    }
    SUBCASE("vector-valued signal is laid out blockwise") {
        const Signald s = (Signald(2, 3) << 1, 0, 1,
                                            0, 1, 1).finished();
        const auto h = build_hankel(s, 2);
        const Matd expect = (Matd(4, 2) << 1, 0,
                                           0, 1,
                                           0, 1,
                                           1, 1).finished();
        CHECK(h.entries == expect);
    }
    SUBCASE("block (i, j) is sample i + j") {
        const Signald s = Signald::Random(3, 9);
        const auto h = build_hankel(s, 4);
        for (Index i = 0; i < 4; ++i)
            for (Index j = 0; j < h.cols(); ++j) CHECK(h.block(i, j) == s.col(i + j));
    }
    SUBCASE("window too long") {
        CHECK_THROWS_AS(build_hankel(Signald::Ones(1, 3), 4), WindowTooLongError);
        CHECK_THROWS_AS(build_hankel(Signald::Ones(1, 3), 0), WindowTooLongError);
    }
}

TEST_CASE("is_persistently_exciting") {
    const Signald impulse_first = (Signald(1, 5) << 1, 0, 0, 0, 0).finished();
    CHECK_FALSE(is_persistently_exciting(impulse_first, 2).exciting);
    CHECK(is_persistently_exciting(impulse_first, 2).rank == 1);

    const Signald u = (Signald(1, 4) << 0, 1, 0, 0).finished();
    const auto r = is_persistently_exciting(u, 2);
    CHECK(r.exciting);
    CHECK(r.rank == 2);
    CHECK(r.gap == doctest::Approx(1.0));

    SUBCASE("too few columns") {
        const auto short_r = is_persistently_exciting(Signald::Random(1, 5), 4);
        CHECK_FALSE(short_r.exciting);
        CHECK(short_r.rank == 2);
        CHECK(short_r.sigma_required == 0.0);
        CHECK(short_r.required_rank == 4);
    }
    SUBCASE("invariant under nonzero scaling") {
        std::mt19937_64 gen(17);
        for (int trial = 0; trial < 10; ++trial) {
            Signald s = Signald::Random(2, 30);
            if (trial % 3 == 0) s.row(1) = s.row(0);  // deficient
            for (double scale : {1e-3, -2.0, 1e4}) {
                const Signald t = scale * s;
                CHECK(is_persistently_exciting(t, 6).exciting == is_persistently_exciting(s, 6).exciting);
                CHECK(is_persistently_exciting(t, 6).rank == is_persistently_exciting(s, 6).rank);
            }
        }
    }
}

TEST_CASE("stacked_predictor") {
    const auto sys = ddempc::StateSpaced(Matd::Constant(1, 1, 0.5), Matd::Ones(1, 1), Matd::Ones(1, 1),
                                         Matd::Zero(1, 1));
    SUBCASE("N = L + n + 1 yields the stacked data as one column") {
        const auto d = generate_pe_data(sys, 5, BoxSet::symmetric(1, 1), 2);
        const auto p = stacked_predictor(d, 3, 1, false);
        CHECK(p.cols() == 1);
        CHECK(p.inputs().col(0) == stack(d.u()));
        CHECK(p.outputs().col(0) == stack(d.y()));
    }
    SUBCASE("row ordering inputs, outputs, cost") {
        const auto d = generate_pe_data(sys, 12, BoxSet::symmetric(1, 1), 2)
                           .with_cost([](const auto& u, const auto& y) { return 2 * u(0) - y(0); });
        const auto p = stacked_predictor(d, 3, 1, true);
        CHECK(p.matrix.rows() == 15);
        CHECK(p.cols() == 12 - 3 - 1);
        CHECK(p.costs() == build_hankel(d.cost().transpose(), 5).entries);
    }
    SUBCASE("errors") {
        const auto d = generate_pe_data(sys, 6, BoxSet::symmetric(1, 1), 2);
        CHECK_THROWS_AS(stacked_predictor(d, 5, 1, false), DataTooShortError);
        CHECK_THROWS_AS(stacked_predictor(d, 3, 1, true), ConfigError);
    }
}

TEST_CASE("Fundamental Lemma on random minimal systems") {
    std::mt19937_64 gen(2024);
    for (int trial = 0; trial < 30; ++trial) {
        const Index n = 1 + trial % 4, m = 1 + trial % 2, p = 1 + (trial / 3) % 2, L = 3 + trial % 3;
        const auto sys = oracle::random_minimal_system(gen, n, m, p);
        const Index depth = L + n + 1;
        const Index N = (m + 1) * (depth + n) + 10;
        const auto d = generate_pe_data(sys, N, BoxSet::symmetric(m, 1.0), gen());
        REQUIRE(is_persistently_exciting(d.u(), depth + n).exciting);
        const auto pred = stacked_predictor(d, L, n, false);

        // Forward: every alpha gives a trajectory.
        const Vecd alpha = Vecd::Random(pred.cols());
        const Vecd w = pred.matrix * alpha;
        const Signald u = unstack(w.head(pred.input_rows), m), y = unstack(w.tail(pred.output_rows), p);
        CHECK(trajectory_residual(sys, u, y) < 1e-8);

        // Reverse: every trajectory has an alpha.
        const auto sim = simulate(sys, Vecd::Random(n), Signald::Random(m, depth));
        Vecd target(pred.matrix.rows());
        target << stack(sim.u), stack(sim.y);
        const Vecd a = pred.matrix.completeOrthogonalDecomposition().solve(target);
        CHECK((pred.matrix * a - target).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("cost rows reproduce a linear stage cost") {
    std::mt19937_64 gen(4);
    const auto sys = oracle::random_minimal_system(gen, 2, 1, 2);
    const Vecd lu = Vecd::Constant(1, 0.3), ly = (Vecd(2) << -1, 0.5).finished();
    const auto d = generate_pe_data(sys, 40, BoxSet::symmetric(1, 1), 9)
                       .with_cost([&](const auto& u, const auto& y) { return lu.dot(u) + ly.dot(y); });
    const auto pred = stacked_predictor(d, 4, 2, true);
    const Vecd alpha = Vecd::Random(pred.cols());
    const Signald u = unstack((pred.inputs() * alpha).eval(), 1);
    const Signald y = unstack((pred.outputs() * alpha).eval(), 2);
    const Vecd l = pred.costs() * alpha;
    for (Index k = 0; k < pred.depth; ++k)
        CHECK(std::abs(l(k) - (lu.dot(u.col(k)) + ly.dot(y.col(k)))) < 1e-10);
}

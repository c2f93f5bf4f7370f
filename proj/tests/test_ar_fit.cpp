#include <doctest.h>

#include <cmath>

#include "kmodels/ar_fit.hpp"
#include "kmodels/errors.hpp"
#include "support.hpp"

using namespace kmodels;

namespace {

Dataset one(std::vector<double> v, std::string id = "x") { return Dataset({TimeSeries(std::move(id), std::move(v))}); }

Dataset random_cluster(Rng& rng, std::size_t p, std::size_t n, std::size_t T) {
    const auto phi = testing::random_stationary(rng, p);
    return testing::arma_cluster(phi, {}, n, T, rng.next_u64());
}

}  // namespace

TEST_CASE("design matrix stacks lags") {
    auto d = build_design(one({1, 2, 3, 4}), 1);
    CHECK(d.response.size() == 3);
    CHECK(d.response(0) == 2);
    CHECK(d.response(2) == 4);
    CHECK(d.lags(0, 0) == 1);
    CHECK(d.lags(2, 0) == 3);

    d = build_design(one({1, 2, 3, 4}), 2);
    CHECK(d.response.size() == 2);
    CHECK(d.response(0) == 3);
    CHECK(d.lags(0, 0) == 2);
    CHECK(d.lags(0, 1) == 1);
    CHECK(d.lags(1, 0) == 3);
    CHECK(d.lags(1, 1) == 2);

    d = build_design(Dataset({TimeSeries("a", {1, 2, 3}), TimeSeries("b", {1, 2, 3})}), 1);
    CHECK(d.response.size() == 4);
    CHECK(d.response(2) == 2);
    CHECK(d.lags(2, 0) == 1);
    CHECK(d.lags(3, 0) == 2);
}

TEST_CASE("design rejects short series and p = 0") {
    try {
        (void)build_design(Dataset({TimeSeries("ok", {1, 2, 3}), TimeSeries("short", {1, 2})}), 2);
        FAIL("expected TooShortSeries");
    } catch (const TooShortSeries& e) {
        CHECK(e.series_id() == "short");
    }
    CHECK_THROWS_AS(build_design(one({1, 2, 3}), 0), InvalidArgument);
}

TEST_CASE("noise-free recursion is fitted exactly") {
    std::vector<double> x{1};
    for (int t = 1; t < 8; ++t) x.push_back(0.5 * x.back());
    CHECK(fit_ar(one(x), 1, LossKind::L2).phi[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(fit_ar(one(x), 1, LossKind::L1).phi[0] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("ar_loss examples") {
    const ArModel m{{0.5}};
    CHECK(ar_loss(TimeSeries("x", {1, 0.5, 0.25}), m, LossKind::L2) == 0.0);
    CHECK(ar_loss(TimeSeries("x", {1, 1, 1}), m, LossKind::L2) == doctest::Approx(0.5));
    CHECK(ar_loss(TimeSeries("x", {1, 1, 1}), m, LossKind::L1) == doctest::Approx(1.0));
    const auto r = ar_residuals(TimeSeries("x", {1, 1, 1}), m);
    CHECK(r == std::vector<double>{0.5, 0.5});
}

TEST_CASE("rank-deficient design is a degenerate fit") {
    CHECK_THROWS_AS(fit_ar(one({0, 0, 0, 0, 0}), 1, LossKind::L2), DegenerateFit);
    CHECK_THROWS_AS(fit_ar(one({1, 1, 1, 1, 1, 1}), 2, LossKind::L2), DegenerateFit);
    CHECK_THROWS_AS(fit_ar(one({1, 1, 1, 1, 1, 1}), 2, LossKind::L1), DegenerateFit);
}

TEST_CASE("L2 fit matches the normal equations") {
    Rng rng(101);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t p = 1 + rng.below(4);
        const Dataset c = random_cluster(rng, p, 1 + rng.below(6), 20 + rng.below(200));
        const auto oracle = testing::normal_equations(build_design(c, p));
        const auto fit = fit_ar(c, p, LossKind::L2);
        for (std::size_t i = 0; i < p; ++i) CHECK(std::abs(fit.phi[i] - oracle(static_cast<Eigen::Index>(i))) < 1e-8);
    }
}

TEST_CASE("L1 fit reaches the LP optimum on small instances") {
    Rng rng(202);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t p = 1 + rng.below(3);
        std::vector<TimeSeries> s;
        const std::size_t n = 1 + rng.below(3);
        for (std::size_t i = 0; i < n; ++i) s.emplace_back("s" + std::to_string(i), testing::normals(rng, p + 3 + rng.below(8)));
        const Dataset c(std::move(s));
        const auto d = build_design(c, p);
        const auto fit = fit_ar(c, p, LossKind::L1);
        Eigen::VectorXd beta(p);
        for (std::size_t i = 0; i < p; ++i) beta(static_cast<Eigen::Index>(i)) = fit.phi[i];
        CHECK(testing::l1_objective(d, beta) <= testing::lad_oracle(d) + 1e-6);
    }
}

TEST_CASE("L1 objective never exceeds the L1 objective of the L2 fit") {
    Rng rng(303);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t p = 1 + rng.below(3);
        const Dataset c = random_cluster(rng, p, 1 + rng.below(4), 30 + rng.below(100));
        double l1 = 0, l2 = 0;
        const auto f1 = fit_ar(c, p, LossKind::L1), f2 = fit_ar(c, p, LossKind::L2);
        for (const auto& s : c) {
            l1 += ar_loss(s, f1, LossKind::L1);
            l2 += ar_loss(s, f2, LossKind::L1);
        }
        CHECK(l1 <= l2 + 1e-9);
    }
}

TEST_CASE("fits are local minimizers under coefficient perturbation") {
    Rng rng(404);
    for (const auto loss : {LossKind::L2, LossKind::L1}) {
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t p = 1 + rng.below(3);
            const Dataset c = random_cluster(rng, p, 3, 80);
            const auto fit = fit_ar(c, p, loss);
            auto total = [&](const ArModel& m) {
                double t = 0;
                for (const auto& s : c) t += ar_loss(s, m, loss);
                return t;
            };
            const double base = total(fit);
            for (std::size_t i = 0; i < p; ++i) {
                for (double h : {-1e-3, 1e-3}) {
                    ArModel alt = fit;
                    alt.phi[i] += h;
                    CHECK(base <= total(alt) + 1e-9 * base);
                }
            }
        }
    }
}

TEST_CASE("series order does not change the fit") {
    Rng rng(505);
    const Dataset c = random_cluster(rng, 2, 5, 60);
    const std::size_t rev[] = {4, 3, 2, 1, 0};
    const Dataset r = c.subset(rev);
    for (const auto loss : {LossKind::L2, LossKind::L1}) {
        const auto a = fit_ar(c, 2, loss), b = fit_ar(r, 2, loss);
        for (std::size_t i = 0; i < 2; ++i) CHECK(a.phi[i] == doctest::Approx(b.phi[i]).epsilon(1e-7));
    }
}

TEST_CASE("LAD estimate of a long AR(2) cluster is consistent") {
    const Dataset c = testing::arma_cluster({0.7, 0.25}, {}, 25, 1000, 77);
    const auto fit = fit_ar(c, 2, LossKind::L1);
    CHECK(std::abs(fit.phi[0] - 0.7) < 0.05);
    CHECK(std::abs(fit.phi[1] - 0.25) < 0.05);
}

TEST_CASE("L1 warm start is honored and never worsens the objective") {
    Rng rng(606);
    const Dataset c = random_cluster(rng, 2, 4, 50);
    const auto cold = fit_ar(c, 2, LossKind::L1);
    const auto warm = fit_ar(c, 2, LossKind::L1, cold);
    double a = 0, b = 0;
    for (const auto& s : c) {
        a += ar_loss(s, cold, LossKind::L1);
        b += ar_loss(s, warm, LossKind::L1);
    }
    CHECK(b <= a + 1e-12);
}

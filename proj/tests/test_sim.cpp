#include <doctest.h>

#include <cmath>
#include <vector>

#include "growth/sim.hpp"
#include "demo_params.hpp"

using namespace growth;
using growth_test::rel_err;

namespace {

SimulationPlan logistic_plan() {
    SimulationPlan plan;
    plan.model = {Parent::Logistic, Variation::ConstantParams};
    plan.params.r0 = 0.3;
    plan.params.K = 100;
    plan.params.x0 = 10;
    plan.grid = {0.0, 1.0, 8};
    plan.n = 4;
    plan.cov = {0.001, 0.1};
    plan.seed = 42;
    return plan;
}

} // namespace

TEST_CASE("stationary covariance matrix has the geometric-decay structure") {
    SUBCASE("zero correlation gives a diagonal matrix") {
        const Eigen::MatrixXd s = koopman_matrix({0.25, 0.0}, 4);
        CHECK(s.rows() == 4);
        CHECK((s - 0.25 * Eigen::MatrixXd::Identity(4, 4)).norm() <= 1e-15);
    }
    SUBCASE("two-point matrix written out") {
        const Eigen::MatrixXd s = koopman_matrix({2.0, 0.3}, 2);
        CHECK(s(0, 0) == doctest::Approx(2.0));
        CHECK(s(1, 1) == doctest::Approx(2.0));
        CHECK(s(0, 1) == doctest::Approx(0.6));
        CHECK(s(1, 0) == doctest::Approx(0.6));
    }
    SUBCASE("entries follow sigma2 * rho^|i-j| and the matrix is symmetric") {
        const double sigma2 = 0.7, rho = -0.4;
        const Eigen::MatrixXd s = koopman_matrix({sigma2, rho}, 5);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) {
                CHECK(s(i, j) ==
                      doctest::Approx(sigma2 * std::pow(rho, std::abs(i - j))));
                CHECK(s(i, j) == s(j, i));
            }
    }
    SUBCASE("invalid inputs are rejected") {
        CHECK_THROWS_AS(koopman_matrix({0.0, 0.1}, 3), DomainError);
        CHECK_THROWS_AS(koopman_matrix({-1.0, 0.1}, 3), DomainError);
        CHECK_THROWS_AS(koopman_matrix({1.0, 1.0}, 3), DomainError);
        CHECK_THROWS_AS(koopman_matrix({1.0, -1.5}, 3), DomainError);
        CHECK_THROWS_AS(koopman_matrix({1.0, 0.1}, 0), DomainError);
    }
}

TEST_CASE("simulated rows collapse to the mean curve when noise vanishes") {
    SimulationPlan plan = logistic_plan();
    plan.cov.sigma2 = 1e-30;
    const TrajectoryMatrix data = simulate(plan);
    const std::vector<double> mu =
        mean_profile(plan.model, plan.params, plan.grid);
    REQUIRE(data.n() == plan.n);
    REQUIRE(data.q() == plan.grid.q);
    for (long i = 0; i < data.n(); ++i)
        for (int j = 0; j < data.q(); ++j)
            CHECK(rel_err(data.x(i, j), mu[static_cast<size_t>(j)]) < 1e-12);
    CHECK(data.nonpositive_draws == 0);
}

TEST_CASE("simulation is a pure function of seed and replication index") {
    const SimulationPlan plan = logistic_plan();
    const TrajectoryMatrix a = simulate(plan, 0);
    const TrajectoryMatrix b = simulate(plan, 0);
    CHECK(a.x == b.x);  // bitwise

    const TrajectoryMatrix c = simulate(plan, 1);
    CHECK(a.x != c.x);

    SimulationPlan other = plan;
    other.seed = 43;
    const TrajectoryMatrix d = simulate(other, 0);
    CHECK(a.x != d.x);

    CHECK_THROWS_AS(simulate(plan, -1), DomainError);
}

TEST_CASE("large samples reproduce the requested first two moments") {
    SimulationPlan plan = logistic_plan();
    plan.n = 10000;
    plan.grid = {0.0, 1.0, 6};
    plan.cov = {1.0, 0.5};
    const TrajectoryMatrix data = simulate(plan);
    const std::vector<double> mu =
        mean_profile(plan.model, plan.params, plan.grid);

    // Column means: 5 standard errors of the mean, sd = 1, n = 10000.
    const Eigen::VectorXd means = data.col_means();
    for (int j = 0; j < plan.grid.q; ++j)
        CHECK(std::abs(means(j) - mu[static_cast<size_t>(j)]) < 5.0 / 100.0);

    // Sample covariance close to the target in relative Frobenius norm.
    std::vector<int> cols(static_cast<size_t>(plan.grid.q));
    for (int j = 0; j < plan.grid.q; ++j) cols[static_cast<size_t>(j)] = j;
    const Eigen::MatrixXd sample = data.sample_cov(cols);
    const Eigen::MatrixXd target = koopman_matrix(plan.cov, plan.grid.q);
    CHECK((sample - target).norm() / target.norm() < 0.1);

    // Lag-one correlation of the residuals.
    const double corr =
        sample(0, 1) / std::sqrt(sample(0, 0) * sample(1, 1));
    CHECK(std::abs(corr - plan.cov.rho) < 0.03);
}

TEST_CASE("draws below zero are counted, not censored") {
    SimulationPlan plan = logistic_plan();
    plan.params.x0 = 0.5;  // mean curve starts near zero
    plan.cov = {4.0, 0.1};
    plan.n = 200;
    const TrajectoryMatrix data = simulate(plan);
    CHECK(data.nonpositive_draws > 0);
    long below = 0;
    for (long i = 0; i < data.n(); ++i)
        for (int j = 0; j < data.q(); ++j)
            if (data.x(i, j) <= 0) ++below;
    CHECK(below == data.nonpositive_draws);
}

TEST_CASE("replicated estimation summarizes the sampling distribution") {
    SimulationPlan plan = logistic_plan();
    plan.n = 50;
    plan.replications = 40;
    const ReplicationReport report = replicate_isrp(plan, Target::r);

    const int m = plan.grid.q - 2;  // three-point windows
    CHECK(report.parent == Parent::Logistic);
    CHECK(report.target == Target::r);
    CHECK(report.samples.rows() == plan.replications);
    CHECK(report.samples.cols() == m);
    REQUIRE(static_cast<int>(report.intervals.size()) == m);

    for (const auto& s : report.intervals) {
        CHECK(s.count + s.failures == plan.replications);
        CHECK(s.count > 0);
        // The estimator recovers the constant intrinsic rate up to noise.
        CHECK(std::abs(s.mean - plan.params.r0) < 0.05);
        CHECK(s.variance > 0);
        CHECK(s.q05 <= s.q25);
        CHECK(s.q25 <= s.q50);
        CHECK(s.q50 <= s.q75);
        CHECK(s.q75 <= s.q95);
        CHECK(std::isfinite(s.delta_var));
        CHECK(s.delta_var > 0);
        // Empirical variance agrees with the first-order prediction loosely.
        CHECK(s.variance < 10 * s.delta_var);
        CHECK(s.variance > s.delta_var / 10);
    }
}

TEST_CASE("replicated estimation is invariant to the thread count") {
    SimulationPlan plan = logistic_plan();
    plan.n = 20;
    plan.replications = 16;
    const ReplicationReport one = replicate_isrp(plan, Target::K, 1);
    const ReplicationReport four = replicate_isrp(plan, Target::K, 4);
    CHECK(one.samples == four.samples);  // bitwise
    REQUIRE(one.intervals.size() == four.intervals.size());
    for (size_t j = 0; j < one.intervals.size(); ++j) {
        CHECK(one.intervals[j].mean == four.intervals[j].mean);
        CHECK(one.intervals[j].variance == four.intervals[j].variance);
    }
}

TEST_CASE("replicated estimation rejects impossible requests") {
    SimulationPlan plan = logistic_plan();
    plan.model = {Parent::Exponential, Variation::ConstantParams};
    plan.params = ParameterSet{};
    plan.params.r0 = 0.3;
    plan.params.x0 = 10;
    CHECK_THROWS_AS(replicate_isrp(plan, Target::K), DomainError);

    SimulationPlan tiny = logistic_plan();
    tiny.grid.q = 2;
    CHECK_THROWS_AS(replicate_isrp(tiny, Target::r), DimensionMismatch);
}

TEST_CASE("plans round-trip through their JSON form") {
    SimulationPlan plan;
    plan.model = {Parent::ThetaLogistic, Variation::PowerRate};
    plan.params.r0 = 0.1;
    plan.params.c = 1.5;
    plan.params.K = 100;
    plan.params.theta = 2;
    plan.params.x0 = 10;
    plan.grid = {1.0, 0.5, 12};
    plan.n = 37;
    plan.cov = {0.25, -0.2};
    plan.replications = 5;
    plan.seed = 987654321;

    const SimulationPlan back = plan_from_json(plan_json(plan));
    CHECK(back.model.parent == plan.model.parent);
    CHECK(back.model.variation == plan.model.variation);
    CHECK(back.params.r0 == plan.params.r0);
    CHECK(back.params.c == plan.params.c);
    CHECK(back.params.K == plan.params.K);
    CHECK(back.params.theta == plan.params.theta);
    CHECK(back.params.x0 == plan.params.x0);
    CHECK(back.grid.t0 == plan.grid.t0);
    CHECK(back.grid.h == plan.grid.h);
    CHECK(back.grid.q == plan.grid.q);
    CHECK(back.n == plan.n);
    CHECK(back.cov.sigma2 == plan.cov.sigma2);
    CHECK(back.cov.rho == plan.cov.rho);
    CHECK(back.replications == plan.replications);
    CHECK(back.seed == plan.seed);

    CHECK_THROWS_AS(plan_from_json("not json"), DataError);
    CHECK_THROWS_AS(plan_from_json("{\"n\": 3}"), DataError);
}

TEST_CASE("replication reports serialize to well-formed CSV") {
    SimulationPlan plan = logistic_plan();
    plan.n = 10;
    plan.replications = 6;
    const ReplicationReport report = replicate_isrp(plan, Target::r);

    const std::string summary = replication_report_csv(report);
    const std::string samples = replication_samples_csv(report);

    auto count_lines = [](const std::string& s) {
        long n = 0;
        for (char ch : s)
            if (ch == '\n') ++n;
        return n;
    };
    const int m = plan.grid.q - 2;
    CHECK(count_lines(summary) == 1 + m);
    CHECK(count_lines(samples) == 1 + plan.replications * m);
    CHECK(summary.rfind("j,t,count,failures,mean,", 0) == 0);
    CHECK(samples.rfind("replicate,j,estimate\n", 0) == 0);
}

#include <doctest.h>

#include <cmath>
#include <vector>

#include "growth/fit.hpp"
#include "growth/models.hpp"
#include "growth/sim.hpp"
#include "demo_params.hpp"

using namespace growth;
using growth_test::rel_err;

namespace {

// Logistic curve with beta = (r, K, x0).
double logistic_curve(double t, const Eigen::VectorXd& b) {
    return b(1) / (1.0 + (b(1) / b(2) - 1.0) * std::exp(-b(0) * t));
}

FitProblem logistic_problem(double r = 0.3, double K = 100, double x0 = 10,
                            int q = 15) {
    FitProblem p;
    p.curve = logistic_curve;
    for (int j = 0; j < q; ++j) {
        p.t.push_back(j);
        p.y.push_back(K / (1.0 + (K / x0 - 1.0) * std::exp(-r * j)));
    }
    p.init = Eigen::Vector3d(r * 1.5, K * 1.4, x0 * 0.6);
    p.names = {"r", "K", "x0"};
    return p;
}

} // namespace

TEST_CASE("least squares recovers parameters of noiseless data") {
    const FitProblem p = logistic_problem();
    const FitResult fit = nls_fit(p);
    CHECK(fit.converged);
    CHECK(rel_err(fit.estimates(0), 0.3) < 1e-6);
    CHECK(rel_err(fit.estimates(1), 100.0) < 1e-6);
    CHECK(rel_err(fit.estimates(2), 10.0) < 1e-6);
    CHECK(fit.rss < 1e-12);
    CHECK(fit.rmse == doctest::Approx(std::sqrt(fit.rss / 15)));
    for (int i = 0; i < 3; ++i) CHECK(std::isfinite(fit.se(i)));
}

TEST_CASE("bounds clamp the search region") {
    FitProblem p = logistic_problem();
    p.lower = Eigen::Vector3d(1e-9, 1e-9, 1e-9);
    p.upper = Eigen::Vector3d(1.0, 90.0, 50.0);  // true K = 100 excluded
    const FitResult fit = nls_fit(p);
    CHECK(fit.estimates(1) <= 90.0 + 1e-12);
}

TEST_CASE("information criterion formula") {
    // rss = m makes the log term vanish: m ln(2 pi) + m + 2 (k+1).
    const long m = 20;
    CHECK(aic(static_cast<double>(m), m, 0) ==
          doctest::Approx(m * std::log(2 * M_PI) + m + 2).epsilon(1e-12));
    CHECK(aic(static_cast<double>(m), m, 3) ==
          doctest::Approx(m * std::log(2 * M_PI) + m + 8).epsilon(1e-12));
    // Adding a parameter at equal rss costs exactly 2.
    CHECK(aic(5.0, 10, 2) - aic(5.0, 10, 1) == doctest::Approx(2.0));
    CHECK(rmse(9.0, 4) == doctest::Approx(1.5));
}

TEST_CASE("difference-in-criterion rule") {
    SUBCASE("large separation is decisive") {
        const DeltaAicVerdict v = delta_aic_rule({-27.85451, -14.5925});
        CHECK(v.index == 0);
        CHECK(v.strength == "decisive");
    }
    SUBCASE("tie is weak and picks the first") {
        const DeltaAicVerdict v = delta_aic_rule({5.0, 5.0});
        CHECK(v.index == 0);
        CHECK(v.strength == "weak");
    }
    SUBCASE("small separation is weak") {
        const DeltaAicVerdict v = delta_aic_rule({100.0, 95.0});
        CHECK(v.index == 1);
        CHECK(v.strength == "weak");
    }
}

TEST_CASE("undefined initial point is rejected up front") {
    FitProblem p = logistic_problem();
    p.curve = [](double, const Eigen::VectorXd&) {
        return std::numeric_limits<double>::quiet_NaN();
    };
    CHECK_THROWS_AS(nls_fit(p), DomainError);
}

TEST_CASE("ill-posed problems fail loudly, not silently") {
    FitProblem p = logistic_problem();
    p.init = Eigen::VectorXd();
    CHECK_THROWS_AS(nls_fit(p), DomainError);

    FitProblem q = logistic_problem();
    q.y.pop_back();
    CHECK_THROWS_AS(nls_fit(q), DimensionMismatch);

    // Flat curve: Jacobian has a zero column, so the standard error for the
    // dead parameter cannot be finite, but the fit still reports.
    FitProblem flat = logistic_problem();
    flat.curve = [](double, const Eigen::VectorXd& b) { return b(1); };
    const FitResult fit = nls_fit(flat);
    CHECK(fit.iterations >= 0);
}

TEST_CASE("bootstrap with a single candidate gives it every win") {
    SimulationPlan plan;
    plan.model = {Parent::Logistic, Variation::ConstantParams};
    plan.params.r0 = 0.3;
    plan.params.K = 100;
    plan.params.x0 = 10;
    plan.grid = {0.0, 1.0, 12};
    plan.n = 30;
    plan.cov = {0.01, 0.1};
    plan.seed = 7;
    const TrajectoryMatrix data = simulate(plan);

    CandidateModel cand;
    cand.name = "Logistic/ConstantParams";
    cand.problem = logistic_problem();
    cand.problem.t = data.grid.times();
    cand.problem.y.assign(cand.problem.t.size(), 0.0);

    const long B = 25;
    const BootstrapReport report = bootstrap_select(data, {cand}, B, 99);
    REQUIRE(report.names.size() == 1);
    CHECK(report.B == B);
    CHECK(report.wins[0] + report.failed_replicates == B);
    CHECK(report.wins[0] > 0);
    CHECK(report.aics.rows() == B);
    CHECK(report.aics.cols() == 1);
}

TEST_CASE("bootstrap is reproducible and thread-count invariant") {
    SimulationPlan plan;
    plan.model = {Parent::Logistic, Variation::ConstantParams};
    plan.params.r0 = 0.3;
    plan.params.K = 100;
    plan.params.x0 = 10;
    plan.grid = {0.0, 1.0, 10};
    plan.n = 25;
    plan.cov = {0.05, 0.2};
    plan.seed = 11;
    const TrajectoryMatrix data = simulate(plan);

    // Two shapes that both can represent the data: the generating curve and
    // a confined-exponential approach to a ceiling.
    CandidateModel logi;
    logi.name = "Logistic/ConstantParams";
    logi.problem = logistic_problem();
    logi.problem.t = data.grid.times();
    logi.problem.y.assign(logi.problem.t.size(), 0.0);

    CandidateModel conf;
    conf.name = "ConfinedExponential/ConstantParams";
    conf.problem.curve = [](double t, const Eigen::VectorXd& b) {
        return b(1) - (b(1) - b(2)) * std::exp(-b(0) * t);
    };
    conf.problem.t = data.grid.times();
    conf.problem.y.assign(conf.problem.t.size(), 0.0);
    conf.problem.init = Eigen::Vector3d(0.2, 110.0, 8.0);
    conf.problem.names = {"r", "K", "x0"};

    const std::vector<CandidateModel> cands = {logi, conf};
    const BootstrapReport a = bootstrap_select(data, cands, 20, 555, 1);
    const BootstrapReport b = bootstrap_select(data, cands, 20, 555, 4);
    CHECK(a.aics == b.aics);  // bitwise across thread counts
    CHECK(a.wins == b.wins);
    CHECK(a.wins[0] + a.wins[1] + a.failed_replicates == 20);

    const BootstrapReport c = bootstrap_select(data, cands, 20, 556, 1);
    CHECK(a.aics != c.aics);  // different seed, different resamples
}

TEST_CASE("fit reports serialize to JSON with parameter names") {
    const FitResult fit = nls_fit(logistic_problem());
    const std::string text = fit_result_json(fit, {"r", "K", "x0"});
    CHECK(text.find("\"r\"") != std::string::npos);
    CHECK(text.find("\"aic\"") != std::string::npos);
    CHECK(text.find("\"converged\": true") != std::string::npos);
}

TEST_CASE("bootstrap reports serialize to JSON and CSV") {
    SimulationPlan plan;
    plan.model = {Parent::Logistic, Variation::ConstantParams};
    plan.params.r0 = 0.3;
    plan.params.K = 100;
    plan.params.x0 = 10;
    plan.grid = {0.0, 1.0, 10};
    plan.n = 10;
    plan.cov = {0.01, 0.1};
    const TrajectoryMatrix data = simulate(plan);

    CandidateModel cand;
    cand.name = "Logistic/ConstantParams";
    cand.problem = logistic_problem();
    cand.problem.t = data.grid.times();
    cand.problem.y.assign(cand.problem.t.size(), 0.0);

    const BootstrapReport report = bootstrap_select(data, {cand}, 8, 3);
    const std::string json = bootstrap_report_json(report);
    CHECK(json.find("\"wins\"") != std::string::npos);
    CHECK(json.find("Logistic/ConstantParams") != std::string::npos);

    const std::string csv = bootstrap_samples_csv(report);
    long lines = 0;
    for (char ch : csv)
        if (ch == '\n') ++lines;
    CHECK(lines == 1 + 8);
    CHECK(csv.rfind("replicate,", 0) == 0);
}

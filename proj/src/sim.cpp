#include "growth/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>

#include <Eigen/Cholesky>
#include <json.hpp>

#include "growth/io.hpp"
#include "growth/parallel.hpp"
#include "growth/rng.hpp"

namespace growth {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Linear-interpolated quantile of an already sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double p) {
    const size_t c = sorted.size();
    if (c == 0) return kNaN;
    if (c == 1) return sorted[0];
    const double pos = p * static_cast<double>(c - 1);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, c - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

} // namespace

Eigen::MatrixXd koopman_matrix(const KoopmanCov& cov, int q) {
    cov.validate();
    if (q < 1) throw DomainError("q must be >= 1");
    Eigen::MatrixXd s(q, q);
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j)
            s(i, j) = cov.sigma2 * std::pow(cov.rho, std::abs(i - j));
    return s;
}

TrajectoryMatrix simulate(const SimulationPlan& plan, int replication) {
    plan.validate();
    if (replication < 0) throw DomainError("replication index must be >= 0");
    const int q = plan.grid.q;

    const std::vector<double> mean = mean_profile(plan.model, plan.params, plan.grid);
    Eigen::VectorXd mu(q);
    for (int j = 0; j < q; ++j) mu(j) = mean[static_cast<size_t>(j)];

    const Eigen::MatrixXd sigma = koopman_matrix(plan.cov, q);
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw NumericalBlowup("covariance matrix is not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();

    TrajectoryMatrix out;
    out.grid = plan.grid;
    out.x.resize(plan.n, q);
    long nonpositive = 0;
    Eigen::VectorXd z(q);
    for (long i = 0; i < plan.n; ++i) {
        // One stream per (replication, row): identical output for any thread
        // count or row order.
        const std::uint64_t index =
            (static_cast<std::uint64_t>(replication) << 32) |
            static_cast<std::uint64_t>(i);
        NormalSampler normal(stream_seed(plan.seed, index));
        for (int j = 0; j < q; ++j) z(j) = normal();
        out.x.row(i) = (mu + L * z).transpose();
        for (int j = 0; j < q; ++j)
            if (out.x(i, j) <= 0) ++nonpositive;
    }
    out.nonpositive_draws = nonpositive;
    return out;
}

ReplicationReport replicate_isrp(const SimulationPlan& plan, Target target,
                                 int threads) {
    plan.validate();
    const Parent parent = plan.model.parent;
    if (target == Target::K && parent == Parent::Exponential)
        throw DomainError("exponential model has no carrying capacity");
    const int q = plan.grid.q;
    const int window = (parent == Parent::Exponential && target == Target::r) ? 2 : 3;
    if (q < window)
        throw DimensionMismatch("grid too short for the estimator window");
    const int m = q - window + 1;
    const double theta = parent == Parent::ThetaLogistic ? plan.params.theta : 1.0;

    ReplicationReport report;
    report.parent = parent;
    report.target = target;
    report.samples.resize(plan.replications, m);
    report.samples.setConstant(kNaN);

    ProfileOptions popts;
    popts.theta = theta;
    popts.sigma = SigmaSource::None;  // point estimates only per replication

    std::vector<long> nonpos(static_cast<size_t>(plan.replications), 0);
    std::atomic<bool> failed{false};
    std::string failure_message;
    std::mutex failure_mutex;

    parallel_for(static_cast<size_t>(plan.replications), threads, [&](size_t rep) {
        if (failed.load(std::memory_order_relaxed)) return;
        try {
            const TrajectoryMatrix data = simulate(plan, static_cast<int>(rep));
            nonpos[rep] = data.nonpositive_draws;
            const IsrpSeries series = isrp_profile(data, parent, target, popts);
            for (const auto& e : series.estimates)
                if (e.ok())
                    report.samples(static_cast<long>(rep), e.j) = e.value;
        } catch (const Error& err) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            failed = true;
            failure_message = err.what();
        }
    });
    if (failed) throw NumericalBlowup("replication failed: " + failure_message);
    for (long v : nonpos) report.nonpositive_draws += v;

    // Theoretical first-order variance at the exact mean vector and the
    // plan's exact covariance, one value per interval.
    const std::vector<double> xbar = mean_profile(plan.model, plan.params, plan.grid);
    ProfileOptions dopts;
    dopts.theta = theta;
    dopts.sigma = SigmaSource::Koopman;
    dopts.sigma2 = plan.cov.sigma2;
    dopts.rho = plan.cov.rho;
    TrajectoryMatrix exact;
    exact.grid = plan.grid;
    exact.x.resize(1, q);
    for (int j = 0; j < q; ++j) exact.x(0, j) = xbar[static_cast<size_t>(j)];
    std::vector<double> delta(static_cast<size_t>(m), kNaN);
    try {
        IsrpSeries ds = isrp_profile(exact, parent, target, dopts);
        for (const auto& e : ds.estimates) {
            // the profile was computed on a 1-row matrix; rescale to plan.n
            if (e.ok() && std::isfinite(e.variance))
                delta[static_cast<size_t>(e.j)] =
                    e.variance / static_cast<double>(plan.n);
        }
    } catch (const Error&) {
        // leave NaN: the exact means themselves were inadmissible
    }

    report.intervals.reserve(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j) {
        ReplicationSummary s;
        s.j = j;
        s.t = plan.grid.t(j);
        std::vector<double> vals;
        vals.reserve(static_cast<size_t>(plan.replications));
        for (int r = 0; r < plan.replications; ++r) {
            const double v = report.samples(r, j);
            if (std::isfinite(v))
                vals.push_back(v);
            else
                ++s.failures;
        }
        s.count = static_cast<long>(vals.size());
        s.delta_var = delta[static_cast<size_t>(j)];
        if (!vals.empty()) {
            double sum = 0;
            for (double v : vals) sum += v;
            s.mean = sum / static_cast<double>(vals.size());
            double m2 = 0, m3 = 0;
            for (double v : vals) {
                const double d = v - s.mean;
                m2 += d * d;
                m3 += d * d * d;
            }
            const double c = static_cast<double>(vals.size());
            s.variance = vals.size() > 1 ? m2 / (c - 1.0) : 0.0;
            const double pop_m2 = m2 / c;
            s.skewness = pop_m2 > 0 ? (m3 / c) / std::pow(pop_m2, 1.5) : 0.0;
            std::sort(vals.begin(), vals.end());
            s.q05 = quantile_sorted(vals, 0.05);
            s.q25 = quantile_sorted(vals, 0.25);
            s.q50 = quantile_sorted(vals, 0.50);
            s.q75 = quantile_sorted(vals, 0.75);
            s.q95 = quantile_sorted(vals, 0.95);
        } else {
            s.mean = s.variance = s.skewness = kNaN;
            s.q05 = s.q25 = s.q50 = s.q75 = s.q95 = kNaN;
        }
        report.intervals.push_back(std::move(s));
    }
    return report;
}

std::string plan_json(const SimulationPlan& plan) {
    nlohmann::json j;
    j["model"] = {{"parent", to_string(plan.model.parent)},
                  {"variation", to_string(plan.model.variation)}};
    j["params"] = {{"r0", plan.params.r0},       {"c", plan.params.c},
                   {"omega", plan.params.omega}, {"K", plan.params.K},
                   {"K0", plan.params.K0},       {"theta", plan.params.theta},
                   {"gamma", plan.params.gamma}, {"x0", plan.params.x0}};
    j["grid"] = {{"t0", plan.grid.t0}, {"h", plan.grid.h}, {"q", plan.grid.q}};
    j["n"] = plan.n;
    j["cov"] = {{"sigma2", plan.cov.sigma2}, {"rho", plan.cov.rho}};
    j["replications"] = plan.replications;
    j["seed"] = plan.seed;
    return j.dump(2) + "\n";
}

SimulationPlan plan_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("plan JSON parse error: ") + e.what());
    }
    SimulationPlan plan;
    try {
        plan.model.parent = parent_from_string(j.at("model").at("parent"));
        plan.model.variation =
            variation_from_string(j.at("model").at("variation"));
        const auto& p = j.at("params");
        auto get = [&p](const char* key, double dflt) {
            return p.contains(key) ? p.at(key).get<double>() : dflt;
        };
        plan.params.r0 = get("r0", 0);
        plan.params.c = get("c", 0);
        plan.params.omega = get("omega", 0);
        plan.params.K = get("K", 0);
        plan.params.K0 = get("K0", 0);
        plan.params.theta = get("theta", 0);
        plan.params.gamma = get("gamma", 0);
        plan.params.x0 = get("x0", 0);
        const auto& g = j.at("grid");
        plan.grid.t0 = g.contains("t0") ? g.at("t0").get<double>() : 0.0;
        plan.grid.h = g.at("h").get<double>();
        plan.grid.q = g.at("q").get<int>();
        plan.n = j.at("n").get<long>();
        plan.cov.sigma2 = j.at("cov").at("sigma2").get<double>();
        plan.cov.rho = j.at("cov").at("rho").get<double>();
        if (j.contains("replications"))
            plan.replications = j.at("replications").get<int>();
        if (j.contains("seed")) plan.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("plan JSON missing field: ") + e.what());
    }
    return plan;
}

std::string replication_report_csv(const ReplicationReport& report) {
    std::ostringstream os;
    os << "j,t,count,failures,mean,variance,skewness,q05,q25,q50,q75,q95,"
          "delta_var\n";
    auto cell = [](double v) { return std::isfinite(v) ? format_double(v) : ""; };
    for (const auto& s : report.intervals) {
        os << s.j << ',' << format_double(s.t) << ',' << s.count << ','
           << s.failures << ',' << cell(s.mean) << ',' << cell(s.variance)
           << ',' << cell(s.skewness) << ',' << cell(s.q05) << ','
           << cell(s.q25) << ',' << cell(s.q50) << ',' << cell(s.q75) << ','
           << cell(s.q95) << ',' << cell(s.delta_var) << '\n';
    }
    return os.str();
}

std::string replication_samples_csv(const ReplicationReport& report) {
    std::ostringstream os;
    os << "replicate,j,estimate\n";
    for (long r = 0; r < report.samples.rows(); ++r)
        for (int j = 0; j < report.samples.cols(); ++j) {
            const double v = report.samples(r, j);
            os << r << ',' << j << ','
               << (std::isfinite(v) ? format_double(v) : "") << '\n';
        }
    return os.str();
}

} // namespace growth

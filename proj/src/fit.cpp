#include "growth/fit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <json.hpp>

#include "growth/io.hpp"
#include "growth/parallel.hpp"
#include "growth/rng.hpp"

namespace growth {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd clamp_box(Eigen::VectorXd beta, const Eigen::VectorXd& lo,
                          const Eigen::VectorXd& hi) {
    if (lo.size() == beta.size())
        for (long p = 0; p < beta.size(); ++p)
            beta(p) = std::max(beta(p), lo(p));
    if (hi.size() == beta.size())
        for (long p = 0; p < beta.size(); ++p)
            beta(p) = std::min(beta(p), hi(p));
    return beta;
}

// y - f(t; beta); false if any prediction is non-finite or throws.
bool residuals(const FitProblem& prob, const Eigen::VectorXd& beta,
               Eigen::VectorXd& out) {
    const long m = prob.m();
    out.resize(m);
    for (long i = 0; i < m; ++i) {
        double f;
        try {
            f = prob.curve(prob.t[static_cast<size_t>(i)], beta);
        } catch (const Error&) {
            return false;
        }
        if (!std::isfinite(f)) return false;
        out(i) = prob.y[static_cast<size_t>(i)] - f;
    }
    return true;
}

// Forward-difference Jacobian of f (not of the residuals).
bool jacobian(const FitProblem& prob, const Eigen::VectorXd& beta,
              const Eigen::VectorXd& resid, Eigen::MatrixXd& J) {
    const long m = prob.m();
    const int k = prob.k();
    J.resize(m, k);
    for (int p = 0; p < k; ++p) {
        double step = 1e-7 * (1.0 + std::abs(beta(p)));
        if (prob.upper.size() == beta.size() && beta(p) + step > prob.upper(p))
            step = -step;  // differentiate inward at an active upper bound
        Eigen::VectorXd shifted = beta;
        shifted(p) += step;
        Eigen::VectorXd r2;
        if (!residuals(prob, shifted, r2)) return false;
        // resid = y - f, so (f2 - f)/step = (resid - r2)/step
        J.col(p) = (resid - r2) / step;
    }
    return true;
}

} // namespace

void FitProblem::validate() const {
    if (!curve) throw DomainError("no curve to fit");
    if (t.size() != y.size())
        throw DimensionMismatch("t and y lengths differ");
    if (m() < 2) throw DomainError("need at least two data points");
    if (k() < 1) throw DomainError("need at least one free parameter");
    if (m() <= k())
        throw DomainError("need more data points than free parameters");
    if (lower.size() != 0 && lower.size() != init.size())
        throw DimensionMismatch("lower bound length != parameter count");
    if (upper.size() != 0 && upper.size() != init.size())
        throw DimensionMismatch("upper bound length != parameter count");
}

double aic(double rss, long m, int k) {
    if (!(rss > 0)) throw DomainError("aic needs rss > 0");
    if (m <= 0) throw DomainError("aic needs m > 0");
    const double md = static_cast<double>(m);
    return md * std::log(2.0 * M_PI * rss / md) + md + 2.0 * (k + 1);
}

double rmse(double rss, long m) {
    if (m <= 0) throw DomainError("rmse needs m > 0");
    return std::sqrt(rss / static_cast<double>(m));
}

DeltaAicVerdict delta_aic_rule(const std::vector<double>& aics) {
    if (aics.size() < 2) throw DomainError("need at least two AIC values");
    DeltaAicVerdict v;
    v.index = static_cast<int>(
        std::min_element(aics.begin(), aics.end()) - aics.begin());
    double runner_up = kInf;
    for (size_t i = 0; i < aics.size(); ++i)
        if (static_cast<int>(i) != v.index)
            runner_up = std::min(runner_up, aics[i]);
    v.strength = (runner_up - aics[static_cast<size_t>(v.index)] > 10.0)
                     ? "decisive"
                     : "weak";
    return v;
}

FitResult nls_fit(const FitProblem& problem) {
    problem.validate();
    const long m = problem.m();
    const int k = problem.k();

    Eigen::VectorXd beta = clamp_box(problem.init, problem.lower, problem.upper);
    Eigen::VectorXd resid;
    if (!residuals(problem, beta, resid))
        throw DomainError("curve undefined at the initial parameters");
    double rss = resid.squaredNorm();

    FitResult result;
    result.estimates = beta;
    result.rss = rss;
    double lambda = 1e-3;
    const int max_iter = 500;
    int iter = 0;
    bool converged = false;
    std::string message;

    Eigen::MatrixXd J;
    while (iter < max_iter) {
        ++iter;
        if (!jacobian(problem, beta, resid, J)) {
            message = "curve undefined while differentiating";
            break;
        }
        const Eigen::VectorXd Jtr = J.transpose() * resid;
        if (Jtr.lpNorm<Eigen::Infinity>() < 1e-8) {
            converged = true;
            break;
        }
        const Eigen::MatrixXd JtJ = J.transpose() * J;

        bool stepped = false;
        for (int attempt = 0; attempt < 50; ++attempt) {
            Eigen::MatrixXd aug = JtJ;
            for (int p = 0; p < k; ++p)
                aug(p, p) += lambda * std::max(JtJ(p, p), 1e-12);
            const Eigen::LDLT<Eigen::MatrixXd> ldlt(aug);
            if (ldlt.info() != Eigen::Success) {
                lambda = std::min(lambda * 10.0, 1e14);
                continue;
            }
            const Eigen::VectorXd delta = ldlt.solve(Jtr);
            if (!delta.allFinite()) {
                lambda = std::min(lambda * 10.0, 1e14);
                continue;
            }
            const Eigen::VectorXd cand =
                clamp_box(beta + delta, problem.lower, problem.upper);
            Eigen::VectorXd cand_resid;
            if (residuals(problem, cand, cand_resid)) {
                const double cand_rss = cand_resid.squaredNorm();
                if (cand_rss <= rss) {
                    const double decrease = rss - cand_rss;
                    beta = cand;
                    resid = std::move(cand_resid);
                    const double old_rss = rss;
                    rss = cand_rss;
                    lambda = std::max(lambda / 10.0, 1e-12);
                    stepped = true;
                    if (decrease < 1e-10 * std::max(old_rss, 1e-300))
                        converged = true;
                    break;
                }
            }
            lambda = std::min(lambda * 10.0, 1e14);
            if (lambda >= 1e14) break;
        }
        if (!stepped) {
            // Damping exhausted without an acceptable step: the current point
            // is a numerical stationary point.
            converged = true;
            break;
        }
        if (converged) break;
    }
    if (iter >= max_iter && !converged)
        message = "iteration cap reached; returning best point so far";

    result.estimates = beta;
    result.rss = rss;
    result.converged = converged;
    result.iterations = iter;
    result.message = message;
    result.rmse = rmse(rss, m);
    result.aic = rss > 0 ? aic(rss, m, k) : -kInf;

    // Standard errors from the final Jacobian: (J'J)^{-1} rss/(m-k).
    result.se = Eigen::VectorXd::Constant(k, kNaN);
    if (m > k && jacobian(problem, beta, resid, J)) {
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(JtJ);
        if (lu.isInvertible()) {
            const Eigen::MatrixXd cov =
                lu.inverse() * (rss / static_cast<double>(m - k));
            for (int p = 0; p < k; ++p)
                result.se(p) = cov(p, p) >= 0 ? std::sqrt(cov(p, p)) : kNaN;
        }
    }
    return result;
}

BootstrapReport bootstrap_select(const TrajectoryMatrix& data,
                                 const std::vector<CandidateModel>& candidates,
                                 long B, std::uint64_t seed, int threads) {
    data.validate();
    if (B < 1) throw DomainError("B must be >= 1");
    if (candidates.empty()) throw DomainError("need at least one candidate");
    if (data.n() < 2)
        throw DomainError("bootstrap needs at least two rows to resample");
    const long n = data.n();
    const int q = data.q();
    const int nc = static_cast<int>(candidates.size());
    for (const auto& c : candidates)
        if (static_cast<int>(c.problem.t.size()) != q)
            throw DimensionMismatch("candidate '" + c.name +
                                    "' time grid != data columns");

    BootstrapReport report;
    report.B = B;
    report.seed = seed;
    for (const auto& c : candidates) report.names.push_back(c.name);
    report.aics.resize(B, nc);
    report.aics.setConstant(kNaN);

    parallel_for(static_cast<size_t>(B), threads, [&](size_t b) {
        std::mt19937_64 eng(stream_seed(seed, b));
        Eigen::VectorXd ybar = Eigen::VectorXd::Zero(q);
        for (long i = 0; i < n; ++i) {
            const long row = static_cast<long>(eng() % static_cast<std::uint64_t>(n));
            ybar += data.x.row(row).transpose();
        }
        ybar /= static_cast<double>(n);
        for (int c = 0; c < nc; ++c) {
            FitProblem prob = candidates[static_cast<size_t>(c)].problem;
            prob.y.assign(ybar.data(), ybar.data() + q);
            try {
                const FitResult fr = nls_fit(prob);
                report.aics(static_cast<long>(b), c) = fr.aic;
            } catch (const Error&) {
                // per-replicate fit failure: recorded as NaN
            }
        }
    });

    report.wins.assign(static_cast<size_t>(nc), 0);
    for (long b = 0; b < B; ++b) {
        int best = -1;
        double best_aic = kInf;
        for (int c = 0; c < nc; ++c) {
            const double a = report.aics(b, c);
            if (std::isfinite(a) && a < best_aic) {
                best_aic = a;
                best = c;
            }
        }
        if (best >= 0)
            ++report.wins[static_cast<size_t>(best)];
        else
            ++report.failed_replicates;
    }
    return report;
}

std::string fit_result_json(const FitResult& result,
                            const std::vector<std::string>& names) {
    nlohmann::json j;
    nlohmann::json est = nlohmann::json::object();
    nlohmann::json se = nlohmann::json::object();
    for (long p = 0; p < result.estimates.size(); ++p) {
        const std::string name = p < static_cast<long>(names.size())
                                     ? names[static_cast<size_t>(p)]
                                     : "b" + std::to_string(p);
        est[name] = result.estimates(p);
        if (p < result.se.size() && std::isfinite(result.se(p)))
            se[name] = result.se(p);
        else
            se[name] = nullptr;
    }
    j["estimates"] = est;
    j["se"] = se;
    j["rss"] = result.rss;
    j["aic"] = std::isfinite(result.aic) ? nlohmann::json(result.aic)
                                         : nlohmann::json(nullptr);
    j["rmse"] = result.rmse;
    j["converged"] = result.converged;
    j["iterations"] = result.iterations;
    if (!result.message.empty()) j["message"] = result.message;
    return j.dump(2) + "\n";
}

std::string bootstrap_report_json(const BootstrapReport& report) {
    nlohmann::json j;
    j["B"] = report.B;
    j["seed"] = report.seed;
    j["failed_replicates"] = report.failed_replicates;
    nlohmann::json wins = nlohmann::json::object();
    for (size_t c = 0; c < report.names.size(); ++c)
        wins[report.names[c]] = report.wins[c];
    j["wins"] = wins;
    return j.dump(2) + "\n";
}

std::string bootstrap_samples_csv(const BootstrapReport& report) {
    std::ostringstream os;
    os << "replicate";
    for (const auto& name : report.names) os << ',' << name;
    os << '\n';
    for (long b = 0; b < report.aics.rows(); ++b) {
        os << b;
        for (long c = 0; c < report.aics.cols(); ++c) {
            const double a = report.aics(b, c);
            os << ',' << (std::isfinite(a) ? format_double(a) : "");
        }
        os << '\n';
    }
    return os.str();
}

} // namespace growth

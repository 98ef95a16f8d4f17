#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "growth/data.hpp"

namespace growth {

// Curve under fit: predicted value at time t given parameter vector beta.
// Return NaN (or throw DomainError) where undefined; the optimizer treats
// that as a rejected step.
using CurveFn = std::function<double(double t, const Eigen::VectorXd& beta)>;

struct FitProblem {
    CurveFn curve;
    std::vector<double> t;
    std::vector<double> y;
    Eigen::VectorXd init;
    Eigen::VectorXd lower;  // size 0 = unbounded; else per-parameter clamp
    Eigen::VectorXd upper;
    std::vector<std::string> names;  // parameter labels for reports

    long m() const { return static_cast<long>(t.size()); }
    int k() const { return static_cast<int>(init.size()); }
    void validate() const;
};

struct FitResult {
    Eigen::VectorXd estimates;
    double rss = 0;
    double aic = 0;
    double rmse = 0;
    Eigen::VectorXd se;  // per-parameter standard errors (NaN if singular)
    bool converged = false;
    int iterations = 0;
    std::string message;
};

// Damped (Levenberg-Marquardt) least squares with forward-difference
// Jacobian.  Never throws on a rough landscape: returns best-so-far with
// converged=false; throws DomainError only if the curve is undefined at the
// initial point, SingularJacobian if the normal equations are unusable.
FitResult nls_fit(const FitProblem& problem);

// Gaussian AIC counting the error variance as a parameter:
//   m ln(2 pi rss/m) + m + 2 (k+1)
double aic(double rss, long m, int k);
double rmse(double rss, long m);

struct DeltaAicVerdict {
    int index = 0;               // argmin AIC (ties: first)
    std::string strength;        // "decisive" if runner-up is >10 above, else "weak"
};
DeltaAicVerdict delta_aic_rule(const std::vector<double>& aics);

// A candidate for bootstrap selection: the problem's t grid and inits are
// fixed; y is replaced by each resample's column means.
struct CandidateModel {
    std::string name;
    FitProblem problem;
};

struct BootstrapReport {
    long B = 0;
    std::vector<std::string> names;
    Eigen::MatrixXd aics;        // B x candidates, NaN where the fit failed
    std::vector<long> wins;      // per candidate
    long failed_replicates = 0;  // replicates where every candidate failed
    std::uint64_t seed = 0;
};

BootstrapReport bootstrap_select(const TrajectoryMatrix& data,
                                 const std::vector<CandidateModel>& candidates,
                                 long B, std::uint64_t seed, int threads = 1);

std::string fit_result_json(const FitResult& result,
                            const std::vector<std::string>& names);
std::string bootstrap_report_json(const BootstrapReport& report);
std::string bootstrap_samples_csv(const BootstrapReport& report);

} // namespace growth

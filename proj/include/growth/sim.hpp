#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "growth/data.hpp"
#include "growth/isrp.hpp"
#include "growth/models.hpp"

namespace growth {

// Stationary AR(1)-style covariance on the uniform grid.
struct KoopmanCov {
    double sigma2 = 0.001;
    double rho = 0.1;

    void validate() const {
        if (!(sigma2 > 0)) throw DomainError("sigma2 must be positive");
        if (!(std::abs(rho) < 1)) throw DomainError("|rho| must be < 1");
    }
};

Eigen::MatrixXd koopman_matrix(const KoopmanCov& cov, int q);

struct SimulationPlan {
    ModelId model{Parent::Logistic, Variation::ConstantParams};
    ParameterSet params;
    TimeGrid grid;
    long n = 1;             // trajectories per dataset
    KoopmanCov cov;
    int replications = 1;   // independent datasets
    std::uint64_t seed = 0;

    void validate() const {
        growth::validate(model, params);
        grid.validate();
        cov.validate();
        if (n < 1) throw DomainError("n must be >= 1");
        if (replications < 1) throw DomainError("replications must be >= 1");
    }
};

// One dataset: n rows of mu + L z, z standard normal, L lower Cholesky.
// Deterministic given (plan.seed, replication); rows are seed-streamed so the
// matrix is identical regardless of threading.
TrajectoryMatrix simulate(const SimulationPlan& plan, int replication = 0);

// Per-interval empirical summary of the ISRP sampling distribution across
// plan.replications independent datasets.
struct ReplicationSummary {
    int j = 0;
    double t = 0;
    long count = 0;           // successful estimates
    long failures = 0;        // flagged windows
    double mean = 0;
    double variance = 0;      // empirical, divisor count-1
    double skewness = 0;
    double q05 = 0, q25 = 0, q50 = 0, q75 = 0, q95 = 0;
    double delta_var = 0;     // first-order variance at the plan's exact Sigma
};

struct ReplicationReport {
    Parent parent = Parent::Logistic;
    Target target = Target::r;
    std::vector<ReplicationSummary> intervals;
    Eigen::MatrixXd samples;  // replications x intervals, NaN where flagged
    long nonpositive_draws = 0;
};

ReplicationReport replicate_isrp(const SimulationPlan& plan, Target target,
                                 int threads = 1);

std::string plan_json(const SimulationPlan& plan);
SimulationPlan plan_from_json(const std::string& text);
std::string replication_report_csv(const ReplicationReport& report);
std::string replication_samples_csv(const ReplicationReport& report);

} // namespace growth

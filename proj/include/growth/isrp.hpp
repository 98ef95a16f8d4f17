#pragma once

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "growth/data.hpp"
#include "growth/models.hpp"

namespace growth {

// Consecutive mean sizes feeding one interval-specific estimate.  t_j is the
// elapsed time of the left point measured from the baseline column (the
// power t_j/h in the K estimator counts intervals since the baseline).
struct MeanPair {
    double mu_j = 0, mu_j1 = 0;
    double t_j = 0, h = 1;
};

struct MeanTriplet {
    double mu_j = 0, mu_j1 = 0, mu_j2 = 0;
    double t_j = 0, h = 1;
};

enum class IntervalStatus {
    Ok,
    NonPositiveLogArgument,
    DegenerateDenominator,
    NonPositiveBase,
};
std::string to_string(IntervalStatus s);

struct IsrpEstimate {
    int j = 0;                 // left column index of the window
    double t = 0;              // absolute time of the left point
    double value = std::numeric_limits<double>::quiet_NaN();
    double variance = std::numeric_limits<double>::quiet_NaN();  // NaN = n/a
    double ci_lo = std::numeric_limits<double>::quiet_NaN();
    double ci_hi = std::numeric_limits<double>::quiet_NaN();
    IntervalStatus status = IntervalStatus::Ok;
    std::string message;

    bool ok() const { return status == IntervalStatus::Ok; }
};

enum class Target { r, K };
std::string to_string(Target t);

struct IsrpSeries {
    Parent parent = Parent::Logistic;
    Target target = Target::r;
    std::vector<IsrpEstimate> estimates;  // ordered by j
    long n_rows = 0;                      // trajectories behind the means
};

// Point estimators.  xbar is the full mean-size sequence; the window starts
// at column j.  Exponential r uses two points, everything else three.
double isrp_r(Parent parent, const std::vector<double>& xbar, int j, double h,
              double theta = 1.0);
double isrp_K(Parent parent, const std::vector<double>& xbar, double x0bar,
              int j, double h, double t_j, double theta = 1.0);

// Analytic gradients of the estimators at the mean vector (for the delta
// method).  grad_r: 2 components for the exponential parent, 3 otherwise.
// grad_K: 3 components (window means); the baseline sensitivity is separate.
Eigen::VectorXd grad_r(Parent parent, const MeanTriplet& mu, double theta = 1.0);
Eigen::VectorXd grad_K(Parent parent, const MeanTriplet& mu, double x0bar,
                       double theta = 1.0);
double grad_K_baseline(Parent parent, const MeanTriplet& mu, double x0bar,
                       double theta = 1.0);

// First-order variance of a mean-based statistic: (grad' Sigma grad)/n.
double delta_variance(const Eigen::VectorXd& grad,
                      const Eigen::MatrixXd& sigma_sub, long n);

// Covariance source for profile variances.
enum class SigmaSource {
    Sample,   // sample covariance of the window columns (needs n >= 2)
    Koopman,  // sigma2 * rho^|i-j| with supplied parameters
    Zero,     // no noise: variances are exactly zero
    None,     // point estimates only; variances reported as NaN
};

struct ProfileOptions {
    double theta = 1.0;
    SigmaSource sigma = SigmaSource::Sample;
    double sigma2 = 0.0;  // used when sigma == Koopman
    double rho = 0.0;
};

// Full profile over all admissible windows; inadmissible windows are carried
// as flagged estimates, never dropped.
IsrpSeries isrp_profile(const TrajectoryMatrix& data, Parent parent,
                        Target target, const ProfileOptions& opts = {});

std::string isrp_series_csv(const IsrpSeries& series);
std::string isrp_series_json(const IsrpSeries& series);

} // namespace growth

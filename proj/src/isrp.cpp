#include "growth/isrp.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "growth/io.hpp"

namespace growth {

namespace {

constexpr double kZ95 = 1.959964;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool near_integer(double v) { return std::abs(v - std::round(v)) < 1e-9; }

struct TryValue {
    double value = kNaN;
    IntervalStatus status = IntervalStatus::Ok;
    std::string message;
};

TryValue fail(IntervalStatus s, std::string msg) {
    return {kNaN, s, std::move(msg)};
}

// zeta = A^{T+2} / (B^T (A - B)), evaluated as A / (rho^T (1 - rho)) with
// rho = B/A so large T never overflows the intermediate powers.
TryValue zeta_ratio(double A, double B, double T) {
    if (A == 0 || B == 0)
        return fail(IntervalStatus::DegenerateDenominator,
                    "zero consecutive difference in the window");
    const double rho = B / A;
    if (rho == 1.0)
        return fail(IntervalStatus::DegenerateDenominator,
                    "equal consecutive differences (A - B = 0)");
    double powT;
    if (rho > 0) {
        powT = std::exp(T * std::log(rho));
    } else if (near_integer(T)) {
        powT = std::pow(rho, std::round(T));
    } else {
        return fail(IntervalStatus::NonPositiveBase,
                    "negative difference ratio under a fractional power");
    }
    const double z = A / (powT * (1.0 - rho));
    if (!std::isfinite(z))
        return fail(IntervalStatus::DegenerateDenominator,
                    "window statistic overflowed");
    return {z, IntervalStatus::Ok, {}};
}

void check_window(Parent parent, const std::vector<double>& xbar, int j,
                  double h, bool pair_only) {
    if (h <= 0) throw DomainError("step h must be positive");
    const int need = (parent == Parent::Exponential && pair_only) ? 1 : 2;
    if (j < 0 || j + need >= static_cast<int>(xbar.size()))
        throw DimensionMismatch("window [j, j+" + std::to_string(need) +
                                "] outside the mean sequence");
}

TryValue try_isrp_r(Parent parent, const std::vector<double>& xbar, int j,
                    double h, double theta) {
    const size_t u = static_cast<size_t>(j);
    switch (parent) {
        case Parent::Exponential: {
            const double x = xbar[u], y = xbar[u + 1];
            if (x == 0)
                return fail(IntervalStatus::DegenerateDenominator, "zero mean size");
            const double arg = y / x;
            if (!(arg > 0))
                return fail(IntervalStatus::NonPositiveLogArgument,
                            "mean ratio not positive");
            return {std::log(arg) / h, IntervalStatus::Ok, {}};
        }
        case Parent::Logistic: {
            const double x = xbar[u], y = xbar[u + 1], z = xbar[u + 2];
            if (x == 0 || y == 0 || z == 0)
                return fail(IntervalStatus::DegenerateDenominator, "zero mean size");
            const double A = 1.0 / x - 1.0 / y;
            const double B = 1.0 / y - 1.0 / z;
            if (A == 0 || B == 0)
                return fail(IntervalStatus::DegenerateDenominator,
                            "flat window (equal reciprocal means)");
            const double arg = A / B;
            if (!(arg > 0))
                return fail(IntervalStatus::NonPositiveLogArgument,
                            "reciprocal differences changed sign");
            return {std::log(arg) / h, IntervalStatus::Ok, {}};
        }
        case Parent::ThetaLogistic: {
            if (theta == 0) throw DomainError("theta must be nonzero");
            const double x = xbar[u], y = xbar[u + 1], z = xbar[u + 2];
            if (!(x > 0 && y > 0 && z > 0))
                return fail(IntervalStatus::NonPositiveBase,
                            "mean size not positive under a real power");
            const double A = std::pow(x, -theta) - std::pow(y, -theta);
            const double B = std::pow(y, -theta) - std::pow(z, -theta);
            if (A == 0 || B == 0)
                return fail(IntervalStatus::DegenerateDenominator,
                            "flat window (equal transformed means)");
            const double arg = A / B;
            if (!(arg > 0))
                return fail(IntervalStatus::NonPositiveLogArgument,
                            "transformed differences changed sign");
            return {std::log(arg) / (theta * h), IntervalStatus::Ok, {}};
        }
        case Parent::ConfinedExponential: {
            const double x = xbar[u], y = xbar[u + 1], z = xbar[u + 2];
            const double A = y - x;
            const double B = z - y;
            if (A == 0 || B == 0)
                return fail(IntervalStatus::DegenerateDenominator,
                            "flat window (equal consecutive means)");
            const double arg = A / B;
            if (!(arg > 0))
                return fail(IntervalStatus::NonPositiveLogArgument,
                            "consecutive differences changed sign");
            return {std::log(arg) / h, IntervalStatus::Ok, {}};
        }
    }
    throw DomainError("unknown parent");
}

TryValue try_isrp_K(Parent parent, const std::vector<double>& xbar,
                    double x0bar, int j, double h, double t_j, double theta) {
    const size_t u = static_cast<size_t>(j);
    const double T = t_j / h;
    switch (parent) {
        case Parent::Exponential:
            throw DomainError("exponential model has no carrying capacity");
        case Parent::Logistic: {
            const double x = xbar[u], y = xbar[u + 1], z = xbar[u + 2];
            if (x == 0 || y == 0 || z == 0 || x0bar == 0)
                return fail(IntervalStatus::DegenerateDenominator, "zero mean size");
            const double A = 1.0 / x - 1.0 / y;
            const double B = 1.0 / y - 1.0 / z;
            TryValue zeta = zeta_ratio(A, B, T);
            if (zeta.status != IntervalStatus::Ok) return zeta;
            const double eta = 1.0 / x0bar - zeta.value;
            if (eta == 0)
                return fail(IntervalStatus::DegenerateDenominator,
                            "baseline cancels the window statistic");
            const double psi = 1.0 / eta;
            if (!std::isfinite(psi))
                return fail(IntervalStatus::DegenerateDenominator,
                            "capacity estimate overflowed");
            return {psi, IntervalStatus::Ok, {}};
        }
        case Parent::ThetaLogistic: {
            if (theta == 0) throw DomainError("theta must be nonzero");
            const double x = xbar[u], y = xbar[u + 1], z = xbar[u + 2];
            if (!(x > 0 && y > 0 && z > 0 && x0bar > 0))
                return fail(IntervalStatus::NonPositiveBase,
                            "mean size not positive under a real power");
            const double A = std::pow(x, -theta) - std::pow(y, -theta);
            const double B = std::pow(y, -theta) - std::pow(z, -theta);
            TryValue zeta = zeta_ratio(A, B, T);
            if (zeta.status != IntervalStatus::Ok) return zeta;
            const double eta = std::pow(x0bar, -theta) - zeta.value;
            if (eta == 0)
                return fail(IntervalStatus::DegenerateDenominator,
                            "baseline cancels the window statistic");
            if (eta < 0 && !near_integer(1.0 / theta))
                return fail(IntervalStatus::NonPositiveBase,
                            "negative base under the 1/theta power");
            const double psi = eta < 0
                                   ? std::pow(eta, -std::round(1.0 / theta))
                                   : std::pow(eta, -1.0 / theta);
            if (!std::isfinite(psi))
                return fail(IntervalStatus::DegenerateDenominator,
                            "capacity estimate overflowed");
            return {psi, IntervalStatus::Ok, {}};
        }
        case Parent::ConfinedExponential: {
            const double x = xbar[u], y = xbar[u + 1], z = xbar[u + 2];
            TryValue zeta = zeta_ratio(y - x, z - y, T);
            if (zeta.status != IntervalStatus::Ok) return zeta;
            const double psi = x0bar + zeta.value;
            if (!std::isfinite(psi))
                return fail(IntervalStatus::DegenerateDenominator,
                            "capacity estimate overflowed");
            return {psi, IntervalStatus::Ok, {}};
        }
    }
    throw DomainError("unknown parent");
}

[[noreturn]] void raise(const TryValue& tv) {
    switch (tv.status) {
        case IntervalStatus::NonPositiveLogArgument:
            throw NonPositiveLogArgument(tv.message);
        case IntervalStatus::DegenerateDenominator:
            throw DegenerateDenominator(tv.message);
        case IntervalStatus::NonPositiveBase:
            throw NonPositiveBase(tv.message);
        case IntervalStatus::Ok:
            break;
    }
    throw Error("unreachable");
}

double zeta_or_throw(double A, double B, double T) {
    TryValue z = zeta_ratio(A, B, T);
    if (z.status != IntervalStatus::Ok) raise(z);
    return z.value;
}

} // namespace

std::string to_string(IntervalStatus s) {
    switch (s) {
        case IntervalStatus::Ok:                     return "ok";
        case IntervalStatus::NonPositiveLogArgument: return "nonpositive_log_argument";
        case IntervalStatus::DegenerateDenominator:  return "degenerate_denominator";
        case IntervalStatus::NonPositiveBase:        return "nonpositive_base";
    }
    return "?";
}

std::string to_string(Target t) { return t == Target::r ? "r" : "K"; }

double isrp_r(Parent parent, const std::vector<double>& xbar, int j, double h,
              double theta) {
    check_window(parent, xbar, j, h, true);
    TryValue tv = try_isrp_r(parent, xbar, j, h, theta);
    if (tv.status != IntervalStatus::Ok) raise(tv);
    return tv.value;
}

double isrp_K(Parent parent, const std::vector<double>& xbar, double x0bar,
              int j, double h, double t_j, double theta) {
    if (parent == Parent::Exponential)
        throw DomainError("exponential model has no carrying capacity");
    check_window(parent, xbar, j, h, false);
    if (!(x0bar > 0)) throw DomainError("baseline mean must be positive");
    TryValue tv = try_isrp_K(parent, xbar, x0bar, j, h, t_j, theta);
    if (tv.status != IntervalStatus::Ok) raise(tv);
    return tv.value;
}

Eigen::VectorXd grad_r(Parent parent, const MeanTriplet& mu, double theta) {
    const double h = mu.h;
    if (h <= 0) throw DomainError("step h must be positive");
    const double x = mu.mu_j, y = mu.mu_j1, z = mu.mu_j2;
    switch (parent) {
        case Parent::Exponential: {
            if (x == 0 || y == 0)
                throw DegenerateDenominator("zero mean size");
            Eigen::VectorXd g(2);
            g << -1.0 / (h * x), 1.0 / (h * y);
            return g;
        }
        case Parent::Logistic: {
            if (x == 0 || y == 0 || z == 0)
                throw DegenerateDenominator("zero mean size");
            const double A = 1.0 / x - 1.0 / y;
            const double B = 1.0 / y - 1.0 / z;
            if (A == 0 || B == 0) throw DegenerateDenominator("flat window");
            Eigen::VectorXd g(3);
            g << -1.0 / (h * A * x * x),
                (1.0 / A + 1.0 / B) / (h * y * y),
                -1.0 / (h * B * z * z);
            return g;
        }
        case Parent::ThetaLogistic: {
            if (theta == 0) throw DomainError("theta must be nonzero");
            if (!(x > 0 && y > 0 && z > 0))
                throw NonPositiveBase("mean size not positive");
            const double A = std::pow(x, -theta) - std::pow(y, -theta);
            const double B = std::pow(y, -theta) - std::pow(z, -theta);
            if (A == 0 || B == 0) throw DegenerateDenominator("flat window");
            Eigen::VectorXd g(3);
            g << -std::pow(x, -theta - 1.0) / (h * A),
                std::pow(y, -theta - 1.0) * (1.0 / A + 1.0 / B) / h,
                -std::pow(z, -theta - 1.0) / (h * B);
            return g;
        }
        case Parent::ConfinedExponential: {
            const double A = y - x;
            const double B = z - y;
            if (A == 0 || B == 0) throw DegenerateDenominator("flat window");
            Eigen::VectorXd g(3);
            g << -1.0 / (h * A), (1.0 / A + 1.0 / B) / h, -1.0 / (h * B);
            return g;
        }
    }
    throw DomainError("unknown parent");
}

Eigen::VectorXd grad_K(Parent parent, const MeanTriplet& mu, double x0bar,
                       double theta) {
    const double h = mu.h;
    if (h <= 0) throw DomainError("step h must be positive");
    if (!(x0bar > 0)) throw DomainError("baseline mean must be positive");
    const double x = mu.mu_j, y = mu.mu_j1, z = mu.mu_j2;
    const double T = mu.t_j / h;
    Eigen::VectorXd g(3);
    switch (parent) {
        case Parent::Exponential:
            throw DomainError("exponential model has no carrying capacity");
        case Parent::Logistic: {
            if (x == 0 || y == 0 || z == 0)
                throw DegenerateDenominator("zero mean size");
            const double A = 1.0 / x - 1.0 / y;
            const double B = 1.0 / y - 1.0 / z;
            const double zeta = zeta_or_throw(A, B, T);
            const double eta = 1.0 / x0bar - zeta;
            if (eta == 0) throw DegenerateDenominator("eta = 0");
            const double pref = zeta / (eta * eta);
            const double dyx = y - x, dzy = z - y;
            const double D = y * (x + z) - 2.0 * x * z;
            if (dyx == 0 || dzy == 0 || D == 0)
                throw DegenerateDenominator("flat window");
            g << pref * (-(T + 2.0) / dyx - (T + 1.0) / x + (2.0 * z - y) / D),
                pref * ((T + 2.0) / dyx + T / dzy - 1.0 / y - (x + z) / D),
                pref * ((T + 1.0) / z - T / dzy + (2.0 * x - y) / D);
            return g;
        }
        case Parent::ThetaLogistic: {
            if (theta == 0) throw DomainError("theta must be nonzero");
            if (!(x > 0 && y > 0 && z > 0))
                throw NonPositiveBase("mean size not positive");
            const double A = std::pow(x, -theta) - std::pow(y, -theta);
            const double B = std::pow(y, -theta) - std::pow(z, -theta);
            const double zeta = zeta_or_throw(A, B, T);
            const double eta = std::pow(x0bar, -theta) - zeta;
            if (eta == 0) throw DegenerateDenominator("eta = 0");
            if (eta < 0)
                throw NonPositiveBase("negative base under the 1/theta power");
            const double C = A - B;
            const double pref =
                zeta / (theta * std::pow(eta, (theta + 1.0) / theta));
            g << pref * (-theta * std::pow(x, -theta - 1.0)) *
                     ((T + 2.0) / A - 1.0 / C),
                pref * (theta * std::pow(y, -theta - 1.0)) *
                    ((T + 2.0) / A + T / B - 2.0 / C),
                pref * (theta * std::pow(z, -theta - 1.0)) * (1.0 / C - T / B);
            return g;
        }
        case Parent::ConfinedExponential: {
            const double A = y - x;
            const double B = z - y;
            const double zeta = zeta_or_throw(A, B, T);
            const double C = A - B;
            g << zeta * (-(T + 2.0) / A + 1.0 / C),
                zeta * ((T + 2.0) / A + T / B - 2.0 / C),
                zeta * (-T / B + 1.0 / C);
            return g;
        }
    }
    throw DomainError("unknown parent");
}

double grad_K_baseline(Parent parent, const MeanTriplet& mu, double x0bar,
                       double theta) {
    const double h = mu.h;
    if (h <= 0) throw DomainError("step h must be positive");
    if (!(x0bar > 0)) throw DomainError("baseline mean must be positive");
    const double x = mu.mu_j, y = mu.mu_j1, z = mu.mu_j2;
    const double T = mu.t_j / h;
    switch (parent) {
        case Parent::Exponential:
            throw DomainError("exponential model has no carrying capacity");
        case Parent::Logistic: {
            if (x == 0 || y == 0 || z == 0)
                throw DegenerateDenominator("zero mean size");
            const double A = 1.0 / x - 1.0 / y;
            const double B = 1.0 / y - 1.0 / z;
            const double zeta = zeta_or_throw(A, B, T);
            const double eta = 1.0 / x0bar - zeta;
            if (eta == 0) throw DegenerateDenominator("eta = 0");
            return 1.0 / (eta * eta * x0bar * x0bar);
        }
        case Parent::ThetaLogistic: {
            if (theta == 0) throw DomainError("theta must be nonzero");
            if (!(x > 0 && y > 0 && z > 0))
                throw NonPositiveBase("mean size not positive");
            const double A = std::pow(x, -theta) - std::pow(y, -theta);
            const double B = std::pow(y, -theta) - std::pow(z, -theta);
            const double zeta = zeta_or_throw(A, B, T);
            const double eta = std::pow(x0bar, -theta) - zeta;
            if (eta == 0) throw DegenerateDenominator("eta = 0");
            if (eta < 0)
                throw NonPositiveBase("negative base under the 1/theta power");
            return std::pow(eta, -(theta + 1.0) / theta) *
                   std::pow(x0bar, -(theta + 1.0));
        }
        case Parent::ConfinedExponential:
            return 1.0;
    }
    throw DomainError("unknown parent");
}

double delta_variance(const Eigen::VectorXd& grad,
                      const Eigen::MatrixXd& sigma_sub, long n) {
    if (n < 1) throw DomainError("n must be >= 1");
    if (sigma_sub.rows() != grad.size() || sigma_sub.cols() != grad.size())
        throw DimensionMismatch("covariance dimension != gradient length");
    const double scale = std::max(1.0, sigma_sub.cwiseAbs().maxCoeff());
    if ((sigma_sub - sigma_sub.transpose()).cwiseAbs().maxCoeff() >
        1e-8 * scale)
        throw DomainError("covariance submatrix must be symmetric");
    const double v = grad.dot(sigma_sub * grad) / static_cast<double>(n);
    return v < 0 ? 0.0 : v;
}

IsrpSeries isrp_profile(const TrajectoryMatrix& data, Parent parent,
                        Target target, const ProfileOptions& opts) {
    data.validate();
    if (target == Target::K && parent == Parent::Exponential)
        throw DomainError("exponential model has no carrying capacity");
    const int q = data.q();
    const bool pair_est = (parent == Parent::Exponential);
    const int window = (pair_est && target == Target::r) ? 2 : 3;
    if (q < window)
        throw DimensionMismatch("need at least " + std::to_string(window) +
                                " columns");
    const double h = data.grid.h;
    const Eigen::VectorXd means = data.col_means();
    const std::vector<double> xbar(means.data(), means.data() + means.size());

    IsrpSeries series;
    series.parent = parent;
    series.target = target;
    series.n_rows = data.n();

    auto koopman_sub = [&](const std::vector<int>& idx) {
        const int k = static_cast<int>(idx.size());
        Eigen::MatrixXd s(k, k);
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b)
                s(a, b) = opts.sigma2 *
                          std::pow(opts.rho,
                                   std::abs(idx[static_cast<size_t>(a)] -
                                            idx[static_cast<size_t>(b)]));
        return s;
    };

    for (int j = 0; j + window - 1 < q; ++j) {
        IsrpEstimate e;
        e.j = j;
        e.t = data.grid.t(j);
        const double elapsed = j * h;  // time since the baseline column
        MeanTriplet mu;
        mu.mu_j = xbar[static_cast<size_t>(j)];
        mu.mu_j1 = xbar[static_cast<size_t>(j) + 1];
        mu.mu_j2 = window == 3 ? xbar[static_cast<size_t>(j) + 2] : 0.0;
        mu.t_j = elapsed;
        mu.h = h;

        TryValue tv = target == Target::r
                          ? try_isrp_r(parent, xbar, j, h, opts.theta)
                          : try_isrp_K(parent, xbar, xbar[0], j, h, elapsed,
                                       opts.theta);
        e.value = tv.value;
        e.status = tv.status;
        e.message = tv.message;

        if (e.ok()) {
            try {
                if (opts.sigma == SigmaSource::Zero) {
                    e.variance = 0.0;
                    e.ci_lo = e.ci_hi = e.value;
                } else if (opts.sigma != SigmaSource::None) {
                    Eigen::VectorXd g;
                    std::vector<int> idx;
                    if (target == Target::r) {
                        g = grad_r(parent, mu, opts.theta);
                        idx = window == 2 ? std::vector<int>{j, j + 1}
                                          : std::vector<int>{j, j + 1, j + 2};
                    } else {
                        // The baseline mean enters the capacity estimator, so
                        // its sampling noise belongs in the variance.
                        const Eigen::VectorXd g3 =
                            grad_K(parent, mu, xbar[0], opts.theta);
                        const double g0 =
                            grad_K_baseline(parent, mu, xbar[0], opts.theta);
                        if (j == 0) {
                            g = g3;
                            g(0) += g0;
                            idx = {0, 1, 2};
                        } else {
                            g.resize(4);
                            g << g0, g3(0), g3(1), g3(2);
                            idx = {0, j, j + 1, j + 2};
                        }
                    }
                    if (opts.sigma == SigmaSource::Koopman) {
                        e.variance = delta_variance(g, koopman_sub(idx), data.n());
                    } else if (data.n() >= 2) {
                        e.variance =
                            delta_variance(g, data.sample_cov(idx), data.n());
                    } else {
                        e.message = "variance unavailable (single trajectory)";
                    }
                    if (std::isfinite(e.variance)) {
                        const double half = kZ95 * std::sqrt(e.variance);
                        e.ci_lo = e.value - half;
                        e.ci_hi = e.value + half;
                    }
                }
            } catch (const Error& err) {
                e.message = std::string("variance unavailable: ") + err.what();
            }
        }
        series.estimates.push_back(std::move(e));
    }
    return series;
}

std::string isrp_series_csv(const IsrpSeries& series) {
    std::ostringstream os;
    os << "j,t,estimate,variance,ci_lo,ci_hi,status\n";
    auto cell = [](double v) { return std::isfinite(v) ? format_double(v) : ""; };
    for (const auto& e : series.estimates) {
        os << e.j << ',' << format_double(e.t) << ',' << cell(e.value) << ','
           << cell(e.variance) << ',' << cell(e.ci_lo) << ',' << cell(e.ci_hi)
           << ',' << to_string(e.status) << '\n';
    }
    return os.str();
}

std::string isrp_series_json(const IsrpSeries& series) {
    nlohmann::json root;
    root["parent"] = to_string(series.parent);
    root["target"] = to_string(series.target);
    root["n_rows"] = series.n_rows;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : series.estimates) {
        nlohmann::json item;
        item["j"] = e.j;
        item["t"] = e.t;
        item["status"] = to_string(e.status);
        auto put = [&item](const char* key, double v) {
            if (std::isfinite(v))
                item[key] = v;
            else
                item[key] = nullptr;
        };
        put("estimate", e.value);
        put("variance", e.variance);
        put("ci_lo", e.ci_lo);
        put("ci_hi", e.ci_hi);
        if (!e.message.empty()) item["message"] = e.message;
        arr.push_back(std::move(item));
    }
    root["estimates"] = std::move(arr);
    return root.dump(2) + "\n";
}

} // namespace growth

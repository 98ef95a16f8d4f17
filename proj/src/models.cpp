#include "growth/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace growth {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_integer(double v) { return std::abs(v - std::round(v)) < 1e-12; }

[[noreturn]] void bad_model(const ModelId& id) {
    throw DomainError("no catalog row for (" + to_string(id.parent) + ", " +
                      to_string(id.variation) + ")");
}

void require(bool cond, const char* msg) {
    if (!cond) throw DomainError(msg);
}

// ---- time-varying rate laws shared across parents ---------------------------
// r(t) for the pure time-dependent variation tags.
double rate_law(Variation v, const ParameterSet& p, double t) {
    switch (v) {
        case Variation::ConstantParams:
        case Variation::ThetaUnit:      return p.r0;
        case Variation::LinearGrowthRate: return p.r0 * (1.0 + p.c * t);
        case Variation::LinearDecayRate:  return p.r0 * (1.0 - p.c * t);
        case Variation::PowerRate:        return p.r0 * std::pow(t, p.c - 1.0);
        case Variation::ExpDecayRate:     return p.r0 * std::exp(-p.c * t);
        case Variation::ExpGrowthRate:    return p.r0 * std::exp(p.c * t);
        case Variation::HyperbolicRate:   return p.r0 / (1.0 + p.c * t);
        case Variation::SelfSaturatingRate: return p.r0 / (1.0 + p.r0 * t);
        case Variation::BlowupRate:       return p.r0 / (1.0 - p.r0 * t);
        case Variation::SineRate:   return p.r0 + p.c * std::sin(p.omega * t);
        case Variation::CosineRate: return p.r0 + p.c * std::cos(p.omega * t);
        case Variation::HumpRate:   return p.r0 * std::pow(t, p.theta) * std::exp(-p.c * t);
        default: break;
    }
    throw DomainError("rate_law: not a time-varying rate tag");
}

// R(t) = int_0^t r(s) ds for the same tags (HumpRate only for integer theta).
double rate_integral(Variation v, const ParameterSet& p, double t) {
    switch (v) {
        case Variation::ConstantParams:
        case Variation::ThetaUnit:      return p.r0 * t;
        case Variation::LinearGrowthRate: return p.r0 * t * (1.0 + p.c * t / 2.0);
        case Variation::LinearDecayRate:  return p.r0 * t * (1.0 - p.c * t / 2.0);
        case Variation::PowerRate:        return p.r0 * std::pow(t, p.c) / p.c;
        case Variation::ExpDecayRate:     return p.r0 / p.c * (1.0 - std::exp(-p.c * t));
        case Variation::ExpGrowthRate:    return p.r0 / p.c * (std::exp(p.c * t) - 1.0);
        case Variation::HyperbolicRate:   return p.r0 / p.c * std::log1p(p.c * t);
        case Variation::SelfSaturatingRate: return std::log1p(p.r0 * t);
        case Variation::BlowupRate:       return -std::log1p(-p.r0 * t);
        case Variation::SineRate:
            return p.r0 * t + p.c / p.omega * (1.0 - std::cos(p.omega * t));
        case Variation::CosineRate:
            return p.r0 * t + p.c / p.omega * std::sin(p.omega * t);
        case Variation::HumpRate: {
            // int_0^t r0 s^m e^{-cs} ds = r0 m!/c^{m+1} (1 - e^{-ct} sum_{i<=m} (ct)^i/i!)
            const int m = static_cast<int>(std::llround(p.theta));
            double fact = 1.0, sum = 1.0, term = 1.0;
            for (int i = 1; i <= m; ++i) {
                fact *= i;
                term *= p.c * t / i;
                sum += term;
            }
            return p.r0 * fact / std::pow(p.c, m + 1) * (1.0 - std::exp(-p.c * t) * sum);
        }
        default: break;
    }
    throw DomainError("rate_integral: not a time-varying rate tag");
}

bool is_time_rate_tag(Variation v) {
    switch (v) {
        case Variation::LinearGrowthRate:
        case Variation::LinearDecayRate:
        case Variation::PowerRate:
        case Variation::ExpDecayRate:
        case Variation::ExpGrowthRate:
        case Variation::HyperbolicRate:
        case Variation::SelfSaturatingRate:
        case Variation::BlowupRate:
        case Variation::SineRate:
        case Variation::CosineRate:
        case Variation::HumpRate:
            return true;
        default:
            return false;
    }
}

// K(t) for the carrying-capacity variation tags.  The logistic "Exponential
// Model" row grows K at the intrinsic rate itself; the confined-exponential
// counterpart uses the separate coefficient c.
double capacity_law(Parent parent, Variation v, const ParameterSet& p, double t) {
    switch (v) {
        case Variation::ExpGrowthK:
            return p.K0 * std::exp((parent == Parent::Logistic ? p.r0 : p.c) * t);
        case Variation::ExpDecayK:      return p.K0 * std::exp(-p.c * t);
        case Variation::LinearGrowthK:  return p.K0 * (1.0 + p.c * t);
        case Variation::HyperbolicDecayK: return p.K0 / (1.0 + p.c * t);
        default: break;
    }
    throw DomainError("capacity_law: not a K(t) tag");
}

bool is_capacity_tag(Variation v) {
    return v == Variation::ExpGrowthK || v == Variation::ExpDecayK ||
           v == Variation::LinearGrowthK || v == Variation::HyperbolicDecayK;
}

double logistic_curve(double R, double K, double x0) {
    return K / (1.0 + (K / x0 - 1.0) * std::exp(-R));
}

} // namespace

// ---- enum names --------------------------------------------------------------

std::string to_string(Parent p) {
    switch (p) {
        case Parent::Exponential:         return "Exponential";
        case Parent::Logistic:            return "Logistic";
        case Parent::ThetaLogistic:       return "ThetaLogistic";
        case Parent::ConfinedExponential: return "ConfinedExponential";
    }
    return "?";
}

std::string to_string(Variation v) {
    switch (v) {
        case Variation::ConstantParams:     return "ConstantParams";
        case Variation::LinearGrowthRate:   return "LinearGrowthRate";
        case Variation::LinearDecayRate:    return "LinearDecayRate";
        case Variation::PowerRate:          return "PowerRate";
        case Variation::ExpDecayRate:       return "ExpDecayRate";
        case Variation::ExpGrowthRate:      return "ExpGrowthRate";
        case Variation::HyperbolicRate:     return "HyperbolicRate";
        case Variation::SelfSaturatingRate: return "SelfSaturatingRate";
        case Variation::BlowupRate:         return "BlowupRate";
        case Variation::SineRate:           return "SineRate";
        case Variation::CosineRate:         return "CosineRate";
        case Variation::HumpRate:           return "HumpRate";
        case Variation::ThetaUnit:          return "ThetaUnit";
        case Variation::GompertzLimit:      return "GompertzLimit";
        case Variation::PowerGompertzLimit: return "PowerGompertzLimit";
        case Variation::VonBertalanffy:     return "VonBertalanffy";
        case Variation::GeneralizedVonBertalanffy: return "GeneralizedVonBertalanffy";
        case Variation::GeneralizedGompertz: return "GeneralizedGompertz";
        case Variation::CrescenzoSpina:     return "CrescenzoSpina";
        case Variation::SqrtLogLimit:       return "SqrtLogLimit";
        case Variation::Cooperation:        return "Cooperation";
        case Variation::MarusicBajzer:      return "MarusicBajzer";
        case Variation::DensityLinearRate:  return "DensityLinearRate";
        case Variation::ExpGrowthK:         return "ExpGrowthK";
        case Variation::ExpDecayK:          return "ExpDecayK";
        case Variation::LinearGrowthK:      return "LinearGrowthK";
        case Variation::HyperbolicDecayK:   return "HyperbolicDecayK";
    }
    return "?";
}

Parent parent_from_string(const std::string& s) {
    for (Parent p : {Parent::Exponential, Parent::Logistic, Parent::ThetaLogistic,
                     Parent::ConfinedExponential})
        if (to_string(p) == s) return p;
    throw DomainError("unknown parent: " + s);
}

Variation variation_from_string(const std::string& s) {
    for (Variation v : {Variation::ConstantParams, Variation::LinearGrowthRate,
                        Variation::LinearDecayRate, Variation::PowerRate,
                        Variation::ExpDecayRate, Variation::ExpGrowthRate,
                        Variation::HyperbolicRate, Variation::SelfSaturatingRate,
                        Variation::BlowupRate, Variation::SineRate,
                        Variation::CosineRate, Variation::HumpRate,
                        Variation::ThetaUnit, Variation::GompertzLimit,
                        Variation::PowerGompertzLimit, Variation::VonBertalanffy,
                        Variation::GeneralizedVonBertalanffy,
                        Variation::GeneralizedGompertz, Variation::CrescenzoSpina,
                        Variation::SqrtLogLimit, Variation::Cooperation,
                        Variation::MarusicBajzer, Variation::DensityLinearRate,
                        Variation::ExpGrowthK, Variation::ExpDecayK,
                        Variation::LinearGrowthK, Variation::HyperbolicDecayK})
        if (to_string(v) == s) return v;
    throw DomainError("unknown variation: " + s);
}

// ---- catalog -----------------------------------------------------------------

const std::vector<CatalogEntry>& catalog() {
    using P = Parent;
    using V = Variation;
    static const std::vector<CatalogEntry> rows = {
        // Exponential parent: X = x0 exp(int r)
        {{P::Exponential, V::LinearDecayRate},   {"r0", "c", "x0"}, "2.1", true,  "Normal Distribution"},
        {{P::Exponential, V::HyperbolicRate},    {"r0", "c", "x0"}, "2.2", true,  "Power Law Exponential"},
        {{P::Exponential, V::SelfSaturatingRate},{"r0", "x0"},      "2.3", true,  "Linear Model"},
        {{P::Exponential, V::BlowupRate},        {"r0", "x0"},      "2.4", true,  "Hyperbolic Model"},
        {{P::Exponential, V::ExpDecayRate},      {"r0", "c", "x0"}, "2.5", true,  "Gompertz Model"},
        {{P::Exponential, V::PowerRate},         {"r0", "c", "x0"}, "2.6", true,  "Korf Model"},
        {{P::Exponential, V::LinearGrowthRate},  {"r0", "c", "x0"}, "2.7", true,  "Linearly Increasing r"},
        {{P::Exponential, V::SineRate},   {"r0", "c", "omega", "x0"}, "2.8", true, "Periodically Varying r (sine)"},
        {{P::Exponential, V::CosineRate}, {"r0", "c", "omega", "x0"}, "2.9", true, "Periodically Varying r (cosine)"},
        // Pulse-shaped rate used by the two-stage workflow on size profiles
        // whose RGR rises then decays; closed form for integer exponent.
        {{P::Exponential, V::HumpRate},   {"r0", "c", "theta", "x0"}, "x.1", true, "Extended Gompertz Model"},

        // Logistic parent
        {{P::Logistic, V::ExpGrowthK},       {"r0", "K0", "x0"},     "3.1", true, "Exponential Model"},
        {{P::Logistic, V::HyperbolicDecayK}, {"r0", "c", "K0", "x0"},"3.2", true, "Hyperbolically Varying K"},
        {{P::Logistic, V::LinearGrowthRate}, {"r0", "c", "K", "x0"}, "3.3", true, "Linearly Growing r"},
        {{P::Logistic, V::LinearDecayRate},  {"r0", "c", "K", "x0"}, "3.4", true, "Linearly Decaying r"},
        {{P::Logistic, V::PowerRate},        {"r0", "c", "K", "x0"}, "3.5", true, "Extended Logistic Model"},
        {{P::Logistic, V::ExpDecayRate},     {"r0", "c", "K", "x0"}, "3.6", true, "Exponentially Decaying r"},
        {{P::Logistic, V::ExpGrowthRate},    {"r0", "c", "K", "x0"}, "3.7", true, "Exponentially Growing r"},
        {{P::Logistic, V::HyperbolicRate},   {"r0", "c", "K", "x0"}, "3.8", true, "Hyperbolically Varying r"},
        {{P::Logistic, V::SineRate},   {"r0", "c", "omega", "K", "x0"}, "3.9", true,  "Periodically Varying r (sine)"},
        {{P::Logistic, V::CosineRate}, {"r0", "c", "omega", "K", "x0"}, "3.10", true, "Periodically Varying r (cosine)"},
        {{P::Logistic, V::LinearGrowthK}, {"r0", "c", "K0", "x0"},   "6.1", false, "Linearly Varying K"},

        // Theta-logistic parent
        {{P::ThetaLogistic, V::ThetaUnit},      {"r0", "K", "x0"},          "4.1", true, "Logistic Model"},
        {{P::ThetaLogistic, V::GompertzLimit},  {"r0", "K", "x0"},          "4.2", true, "Gompertz Model"},
        {{P::ThetaLogistic, V::ConstantParams}, {"r0", "K", "theta", "x0"}, "4.3", true, "Richards Model"},
        {{P::ThetaLogistic, V::PowerRate},      {"r0", "c", "K", "theta", "x0"}, "4.4", true, "Koya-Goshu Model"},
        {{P::ThetaLogistic, V::LinearGrowthRate}, {"r0", "c", "K", "theta", "x0"}, "4.5", true, "Linearly Increasing r"},
        {{P::ThetaLogistic, V::LinearDecayRate},  {"r0", "c", "K", "theta", "x0"}, "4.6", true, "Linearly Decreasing r"},
        {{P::ThetaLogistic, V::PowerGompertzLimit}, {"r0", "c", "K", "x0"}, "4.7", true, "Extended Gompertz Model"},
        {{P::ThetaLogistic, V::VonBertalanffy}, {"r0", "K", "x0"},          "4.8", true, "Von Bertalanffy Model"},
        {{P::ThetaLogistic, V::GeneralizedVonBertalanffy}, {"r0", "K", "theta", "x0"}, "4.9", true, "Generalized Von Bertalanffy Model"},
        {{P::ThetaLogistic, V::GeneralizedGompertz}, {"r0", "c", "K", "x0"}, "4.10", true, "Generalized Gompertz Model"},
        {{P::ThetaLogistic, V::CrescenzoSpina},  {"r0", "c", "K", "x0"},    "4.11", true, "Crescenzo-Spina Model"},
        {{P::ThetaLogistic, V::SqrtLogLimit},    {"r0", "K", "x0"},         "4.12", true, "Second-order Exponential Polynomial"},
        {{P::ThetaLogistic, V::Cooperation},   {"r0", "K", "theta", "gamma", "x0"}, "6.2", false, "Co-operation Model"},
        {{P::ThetaLogistic, V::MarusicBajzer}, {"r0", "K", "theta", "gamma", "x0"}, "6.3", false, "Marusic-Bajzer Model"},
        {{P::ThetaLogistic, V::ExpGrowthRate}, {"r0", "c", "K", "theta", "x0"},     "6.4", false, "Exponentially Increasing r"},

        // Confined-exponential parent: X = K - (K - x0) exp(-int r)
        {{P::ConfinedExponential, V::ExpGrowthRate},   {"r0", "c", "K", "x0"}, "5.1", true, "Extreme Minimal Value Distribution"},
        {{P::ConfinedExponential, V::PowerRate},       {"r0", "c", "K", "x0"}, "5.2", true, "Weibull Distribution"},
        {{P::ConfinedExponential, V::DensityLinearRate},{"r0", "K", "x0"},     "5.3", true, "Logistic Model"},
        {{P::ConfinedExponential, V::LinearDecayRate}, {"r0", "c", "K", "x0"}, "5.4", true, "Linearly Decaying r"},
        {{P::ConfinedExponential, V::LinearGrowthRate},{"r0", "c", "K", "x0"}, "5.5", true, "Linearly Increasing r"},
        {{P::ConfinedExponential, V::ExpDecayRate},    {"r0", "c", "K", "x0"}, "5.6", true, "Exponentially Decaying r"},
        {{P::ConfinedExponential, V::HyperbolicRate},  {"r0", "c", "K", "x0"}, "5.7", true, "Hyperbolically Varying r"},
        {{P::ConfinedExponential, V::SineRate},   {"r0", "c", "omega", "K", "x0"}, "5.8", true, "Periodically Varying r (sine)"},
        {{P::ConfinedExponential, V::CosineRate}, {"r0", "c", "omega", "K", "x0"}, "5.9", true, "Periodically Varying r (cosine)"},
        {{P::ConfinedExponential, V::LinearGrowthK}, {"r0", "c", "K0", "x0"}, "5.10", true, "Linearly Increasing K"},
        {{P::ConfinedExponential, V::ExpGrowthK},    {"r0", "c", "K0", "x0"}, "5.11", true, "Exponentially Increasing K"},
        {{P::ConfinedExponential, V::ExpDecayK},     {"r0", "c", "K0", "x0"}, "5.12", true, "Exponentially Decaying K"},
    };
    return rows;
}

const CatalogEntry& catalog_entry(const ModelId& id) {
    for (const auto& e : catalog())
        if (e.id == id) return e;
    bad_model(id);
}

bool is_implemented(const ModelId& id) {
    if (id.variation == Variation::ConstantParams) return true;  // any parent
    for (const auto& e : catalog())
        if (e.id == id) return true;
    return false;
}

// ---- validation ---------------------------------------------------------------

void validate(const ModelId& id, const ParameterSet& p) {
    using P = Parent;
    using V = Variation;
    const V v = id.variation;

    require(p.x0 > 0, "x0 must be positive");
    if (!is_implemented(id)) bad_model(id);

    // rate-coefficient positivity shared by every row
    require(p.r0 > 0, "r0 must be positive");

    // c > 0 wherever the row reads it
    switch (v) {
        case V::LinearGrowthRate: case V::LinearDecayRate: case V::PowerRate:
        case V::ExpDecayRate: case V::ExpGrowthRate: case V::HyperbolicRate:
        case V::SineRate: case V::CosineRate: case V::HumpRate:
        case V::PowerGompertzLimit: case V::GeneralizedGompertz:
        case V::CrescenzoSpina: case V::ExpDecayK: case V::LinearGrowthK:
        case V::HyperbolicDecayK:
            require(p.c > 0, "c must be positive");
            break;
        case V::ExpGrowthK:
            if (id.parent == P::ConfinedExponential)
                require(p.c > 0, "c must be positive");
            break;
        default:
            break;
    }
    if (v == V::SineRate || v == V::CosineRate)
        require(p.omega > 0, "omega must be positive");

    // capacity positivity
    if (is_capacity_tag(v)) {
        require(p.K0 > 0, "K0 must be positive");
    } else if (id.parent != P::Exponential) {
        require(p.K > 0, "K must be positive");
    }

    // theta-logistic shape restrictions
    if (id.parent == P::ThetaLogistic) {
        switch (v) {
            case V::ConstantParams:  // Richards
                require(p.theta >= -1.0 && p.theta != 0.0,
                        "theta must lie in [-1,0) or (0,inf)");
                break;
            case V::LinearGrowthRate:
            case V::LinearDecayRate:
                require(p.theta >= -1.0 && p.theta != 0.0,
                        "theta must lie in [-1,0) or (0,inf)");
                break;
            case V::PowerRate:  // Koya-Goshu
            case V::Cooperation:
            case V::MarusicBajzer:
            case V::ExpGrowthRate:
                require(p.theta > 0, "theta must be positive");
                break;
            case V::VonBertalanffy:
                require(std::abs(p.theta - 1.0 / 3.0) < 1e-9,
                        "Von Bertalanffy requires theta = 1/3");
                break;
            case V::GeneralizedVonBertalanffy:
                require(p.theta > 0 && p.theta < 1, "theta must lie in (0,1)");
                break;
            case V::GeneralizedGompertz:
                require(std::abs(p.c - 1.0) > 1e-12,
                        "c = 1 degenerates to the Gompertz limit row");
                require(p.x0 < p.K, "x0 < K required (log-power rate)");
                break;
            case V::CrescenzoSpina:
            case V::SqrtLogLimit:
                require(p.x0 < p.K, "x0 < K required (log-power rate)");
                break;
            case V::ThetaUnit:
            case V::GompertzLimit:
            case V::PowerGompertzLimit:
                break;
            default:
                bad_model(id);
        }
        if (v == V::Cooperation || v == V::MarusicBajzer)
            require(p.gamma >= 0, "gamma must be nonnegative");
    }

    if (v == V::HumpRate) require(p.theta >= 0, "exponent theta must be >= 0");
    if (id.parent == P::ConfinedExponential && v == V::ExpDecayK)
        require(std::abs(p.r0 - p.c) > 1e-12, "requires r0 != c");
}

// ---- rate / capacity / ODE -----------------------------------------------------

double rate(const ModelId& id, const ParameterSet& p, double t, double x) {
    validate(id, p);
    using P = Parent;
    using V = Variation;
    const V v = id.variation;

    auto need_x = [&]() {
        if (!(x > 0)) throw DomainError("density-dependent rate needs x > 0");
    };

    if (is_capacity_tag(v)) return p.r0;  // K varies; r is the constant r0

    if (id.parent == P::ThetaLogistic) {
        switch (v) {
            case V::GompertzLimit:      return p.r0;
            case V::PowerGompertzLimit: return p.r0 * std::pow(t, p.c - 1.0);
            case V::VonBertalanffy:
            case V::GeneralizedVonBertalanffy:
                need_x();
                return p.r0 * std::pow(p.K / x, p.theta);
            case V::GeneralizedGompertz:
                need_x();
                require(x < p.K, "x < K required");
                return p.r0 * std::pow(std::log(p.K / x), p.c - 1.0);
            case V::CrescenzoSpina:
                need_x();
                require(x < p.K, "x < K required");
                return p.r0 * std::pow(std::log(p.K / x), p.c);
            case V::SqrtLogLimit:
                need_x();
                require(x < p.K, "x < K required");
                return p.r0 * std::pow(std::log(p.K / x), -0.5);
            case V::Cooperation:
                need_x();
                return p.r0 * std::pow(x, p.gamma);
            case V::MarusicBajzer:
                need_x();
                return p.r0 * std::pow(x / p.K, p.gamma);
            default:
                break;
        }
    }
    if (v == V::DensityLinearRate) {
        need_x();
        return p.r0 / p.K * x;
    }
    if (v == V::ConstantParams || v == V::ThetaUnit) return p.r0;
    if (is_time_rate_tag(v)) {
        if (v == V::BlowupRate)
            require(t < 1.0 / p.r0, "rate undefined at and beyond t = 1/r0");
        return rate_law(v, p, t);
    }
    bad_model(id);
}

double ode_rhs(const ModelId& id, const ParameterSet& p, double t, double x) {
    using P = Parent;
    using V = Variation;
    const V v = id.variation;

    switch (id.parent) {
        case P::Exponential:
            return rate_law(v == V::ConstantParams ? V::ConstantParams : v, p, t) * x;

        case P::Logistic: {
            const double K = is_capacity_tag(v) ? capacity_law(P::Logistic, v, p, t) : p.K;
            const double r = is_capacity_tag(v) || v == V::ConstantParams
                                 ? p.r0
                                 : rate_law(v, p, t);
            return r * x * (1.0 - x / K);
        }

        case P::ThetaLogistic: {
            switch (v) {
                case V::GompertzLimit:
                    return x <= 0 ? 0.0 : p.r0 * x * std::log(p.K / x);
                case V::PowerGompertzLimit:
                    return x <= 0 ? 0.0
                                  : p.r0 * std::pow(t, p.c - 1.0) * x * std::log(p.K / x);
                case V::GeneralizedGompertz: {
                    if (x <= 0 || x >= p.K) return 0.0;
                    return p.r0 * x * std::pow(std::log(p.K / x), p.c);
                }
                case V::CrescenzoSpina: {
                    if (x <= 0 || x >= p.K) return 0.0;
                    return p.r0 * x * std::pow(std::log(p.K / x), p.c + 1.0);
                }
                case V::SqrtLogLimit: {
                    if (x <= 0 || x >= p.K) return 0.0;
                    return p.r0 * x * std::sqrt(std::log(p.K / x));
                }
                case V::VonBertalanffy:
                case V::GeneralizedVonBertalanffy:
                    return p.r0 * x * (std::pow(p.K / x, p.theta) - 1.0);
                case V::Cooperation:
                    return p.r0 * std::pow(x, p.gamma + 1.0) *
                           (1.0 - std::pow(x / p.K, p.theta));
                case V::MarusicBajzer:
                    return p.r0 * x * std::pow(x / p.K, p.gamma) *
                           (1.0 - std::pow(x / p.K, p.theta));
                default: {
                    const double theta = v == V::ThetaUnit ? 1.0 : p.theta;
                    const double r = (v == V::ConstantParams || v == V::ThetaUnit)
                                         ? p.r0
                                         : rate_law(v, p, t);
                    return r * x * (1.0 - std::pow(x / p.K, theta));
                }
            }
        }

        case P::ConfinedExponential: {
            if (v == V::DensityLinearRate) return p.r0 / p.K * x * (p.K - x);
            const double K = is_capacity_tag(v)
                                 ? capacity_law(P::ConfinedExponential, v, p, t)
                                 : p.K;
            const double r = is_capacity_tag(v) || v == V::ConstantParams
                                 ? p.r0
                                 : rate_law(v, p, t);
            return r * (K - x);
        }
    }
    bad_model(id);
}

// ---- closed-form size curves ----------------------------------------------------

double size(const ModelId& id, const ParameterSet& p, double t) {
    validate(id, p);
    require(t >= 0, "t must be nonnegative");
    const CatalogEntry* entry = nullptr;
    if (id.variation != Variation::ConstantParams ||
        id.parent == Parent::ThetaLogistic)
        entry = &catalog_entry(id);
    if (entry && !entry->has_closed_form)
        throw UnsupportedClosedForm("model '" + entry->label +
                                    "' has no closed-form size curve; use integrate()");

    using P = Parent;
    using V = Variation;
    const V v = id.variation;

    switch (id.parent) {
        case P::Exponential: {
            if (v == V::BlowupRate)
                require(t < 1.0 / p.r0, "size undefined at and beyond t = 1/r0");
            if (v == V::HumpRate && !is_integer(p.theta))
                throw UnsupportedClosedForm(
                    "pulse rate has a closed-form size only for integer exponents");
            return p.x0 * std::exp(rate_integral(v == V::ConstantParams
                                                     ? V::ConstantParams
                                                     : v,
                                                 p, t));
        }

        case P::Logistic: {
            switch (v) {
                case V::ExpGrowthK:
                    // K(t) = K0 e^{r t}:  X = K0 e^{rt} / (K0/x0 + r t)
                    return p.K0 * std::exp(p.r0 * t) / (p.K0 / p.x0 + p.r0 * t);
                case V::HyperbolicDecayK:
                    // K(t) = K0/(1+ct)
                    return p.K0 / ((1.0 + p.c * t - p.c / p.r0) +
                                   (p.K0 / p.x0 - 1.0 + p.c / p.r0) *
                                       std::exp(-p.r0 * t));
                default:
                    return logistic_curve(rate_integral(v, p, t), p.K, p.x0);
            }
        }

        case P::ThetaLogistic: {
            switch (v) {
                case V::ThetaUnit:
                    return logistic_curve(p.r0 * t, p.K, p.x0);
                case V::GompertzLimit:
                    return p.K * std::exp(std::exp(-p.r0 * t) * std::log(p.x0 / p.K));
                case V::PowerGompertzLimit:
                    return p.K * std::exp(std::exp(-p.r0 * std::pow(t, p.c) / p.c) *
                                          std::log(p.x0 / p.K));
                case V::ConstantParams:
                case V::PowerRate:
                case V::LinearGrowthRate:
                case V::LinearDecayRate: {
                    // X = K [1 + ((K/x0)^theta - 1) e^{-theta R(t)}]^{-1/theta}
                    const double R = rate_integral(
                        v == V::ConstantParams ? V::ConstantParams : v, p, t);
                    const double b = std::pow(p.K / p.x0, p.theta) - 1.0;
                    const double bracket = 1.0 + b * std::exp(-p.theta * R);
                    require(bracket > 0, "size curve left its domain (bracket <= 0)");
                    return p.K * std::pow(bracket, -1.0 / p.theta);
                }
                case V::VonBertalanffy:
                case V::GeneralizedVonBertalanffy: {
                    // X = K [1 + ((x0/K)^theta - 1) e^{-r0 theta t}]^{1/theta}
                    const double b = std::pow(p.x0 / p.K, p.theta) - 1.0;
                    return p.K * std::pow(1.0 + b * std::exp(-p.r0 * p.theta * t),
                                          1.0 / p.theta);
                }
                case V::GeneralizedGompertz: {
                    // u = ln(K/X):  u^{1-c} = u0^{1-c} + (c-1) r0 t
                    const double u0 = std::log(p.K / p.x0);
                    const double w = std::pow(u0, 1.0 - p.c) + (p.c - 1.0) * p.r0 * t;
                    if (p.c < 1.0 && w <= 0) return p.K;  // reached the ceiling
                    return p.K * std::exp(-std::pow(w, 1.0 / (1.0 - p.c)));
                }
                case V::CrescenzoSpina: {
                    // u^{-c} = u0^{-c} + c r0 t
                    const double u0 = std::log(p.K / p.x0);
                    const double w = std::pow(u0, -p.c) + p.c * p.r0 * t;
                    return p.K * std::exp(-std::pow(w, -1.0 / p.c));
                }
                case V::SqrtLogLimit: {
                    // sqrt(u) = sqrt(u0) - r0 t / 2, frozen at u = 0
                    const double s = std::sqrt(std::log(p.K / p.x0)) - 0.5 * p.r0 * t;
                    if (s <= 0) return p.K;
                    return p.K * std::exp(-s * s);
                }
                default:
                    bad_model(id);
            }
        }

        case P::ConfinedExponential: {
            switch (v) {
                case V::DensityLinearRate:
                    return logistic_curve(p.r0 * t, p.K, p.x0);
                case V::LinearGrowthK: {
                    // X = x0 e^{-rt} + K0[(1+ct-c/r) - (1-c/r) e^{-rt}]
                    const double e = std::exp(-p.r0 * t);
                    return p.x0 * e + p.K0 * ((1.0 + p.c * t - p.c / p.r0) -
                                              (1.0 - p.c / p.r0) * e);
                }
                case V::ExpGrowthK: {
                    const double e = std::exp(-p.r0 * t);
                    return p.x0 * e + p.r0 * p.K0 / (p.r0 + p.c) *
                                          (std::exp(p.c * t) - e);
                }
                case V::ExpDecayK: {
                    const double e = std::exp(-p.r0 * t);
                    return p.x0 * e + p.r0 * p.K0 / (p.r0 - p.c) *
                                          (std::exp(-p.c * t) - e);
                }
                default:
                    return p.K - (p.K - p.x0) *
                                     std::exp(-rate_integral(
                                         v == V::ConstantParams ? V::ConstantParams : v,
                                         p, t));
            }
        }
    }
    bad_model(id);
}

double rgr(const ModelId& id, const ParameterSet& p, double t) {
    const double x = size(id, p, t);
    if (!(x > 0)) throw DomainError("rgr undefined at nonpositive size");
    return ode_rhs(id, p, t, x) / x;
}

// ---- asymptotic classification ---------------------------------------------------

AsymptoticSize asymptotic_size(const ModelId& id, const ParameterSet& p) {
    validate(id, p);
    using P = Parent;
    using V = Variation;
    const V v = id.variation;
    auto fin = [](double value) {
        return AsymptoticSize{AsymptoticSize::Kind::Finite, value};
    };
    const AsymptoticSize zero{AsymptoticSize::Kind::Zero, 0.0};
    const AsymptoticSize inf{AsymptoticSize::Kind::Infinite, kInf};
    const AsymptoticSize ninf{AsymptoticSize::Kind::NegInfinite, -kInf};

    switch (id.parent) {
        case P::Exponential:
            switch (v) {
                case V::LinearDecayRate: return zero;
                case V::ExpDecayRate:    return fin(p.x0 * std::exp(p.r0 / p.c));
                case V::HumpRate:
                    return fin(p.x0 * std::exp(p.r0 * std::tgamma(p.theta + 1.0) /
                                               std::pow(p.c, p.theta + 1.0)));
                default: return inf;  // the remaining rows all grow without bound
            }

        case P::Logistic:
            switch (v) {
                case V::ExpGrowthK:
                case V::LinearGrowthK:    return inf;
                case V::HyperbolicDecayK: return zero;
                case V::LinearDecayRate:  return zero;
                case V::ExpDecayRate:
                    return fin(p.K / (1.0 + (p.K / p.x0 - 1.0) *
                                                std::exp(-p.r0 / p.c)));
                default: return fin(p.K);
            }

        case P::ThetaLogistic:
            switch (v) {
                case V::ConstantParams:
                case V::LinearGrowthRate:
                    return p.theta > 0 ? fin(p.K) : zero;
                case V::LinearDecayRate:
                    return p.theta > 0 ? zero : fin(p.K);
                default: return fin(p.K);
            }

        case P::ConfinedExponential:
            switch (v) {
                case V::LinearDecayRate:
                    if (p.x0 < p.K) return ninf;
                    return p.x0 > p.K ? inf : fin(p.K);
                case V::ExpDecayRate:
                    return fin(p.K - (p.K - p.x0) * std::exp(-p.r0 / p.c));
                case V::LinearGrowthK:
                case V::ExpGrowthK: return inf;
                case V::ExpDecayK:  return zero;
                default: return fin(p.K);
            }
    }
    bad_model(id);
}

// ---- RK4 integration --------------------------------------------------------------

namespace {

// One trajectory pass over the grid with `sub` substeps per grid interval.
std::vector<double> rk4_pass(const ModelId& id, const ParameterSet& p,
                             const TimeGrid& grid, int sub, double bound) {
    std::vector<double> out(static_cast<size_t>(grid.q));
    double x = p.x0;
    out[0] = x;
    for (int j = 0; j + 1 < grid.q; ++j) {
        const double t0 = grid.t(j);
        const double dt = grid.h / sub;
        for (int s = 0; s < sub; ++s) {
            const double t = t0 + s * dt;
            const double k1 = ode_rhs(id, p, t, x);
            const double k2 = ode_rhs(id, p, t + dt / 2, x + dt / 2 * k1);
            const double k3 = ode_rhs(id, p, t + dt / 2, x + dt / 2 * k2);
            const double k4 = ode_rhs(id, p, t + dt, x + dt * k3);
            x += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
            if (!std::isfinite(x) || x <= 0 || std::abs(x) > bound)
                throw NumericalBlowup("integration left (0, bound) near t = " +
                                      std::to_string(t + dt));
        }
        out[static_cast<size_t>(j) + 1] = x;
    }
    return out;
}

} // namespace

std::vector<double> integrate(const ModelId& id, const ParameterSet& p,
                              const TimeGrid& grid) {
    validate(id, p);
    grid.validate();
    const double scale =
        std::max({p.x0, p.K, p.K0, 1.0});
    const double bound = 1e12 * scale;

    int sub = 16;
    std::vector<double> prev = rk4_pass(id, p, grid, sub, bound);
    for (int iter = 0; iter < 12; ++iter) {
        sub *= 2;
        std::vector<double> next = rk4_pass(id, p, grid, sub, bound);
        double rel = 0;
        for (int j = 0; j < grid.q; ++j) {
            const size_t k = static_cast<size_t>(j);
            rel = std::max(rel, std::abs(next[k] - prev[k]) /
                                    (1.0 + std::abs(next[k])));
        }
        if (rel <= 1e-8) return next;
        prev = std::move(next);
    }
    throw NumericalBlowup("RK4 refinement did not converge");
}

std::vector<double> mean_profile(const ModelId& id, const ParameterSet& p,
                                 const TimeGrid& grid) {
    grid.validate();
    bool closed = true;
    if (id.variation != Variation::ConstantParams ||
        id.parent == Parent::ThetaLogistic) {
        const auto& e = catalog_entry(id);
        closed = e.has_closed_form;
    }
    if (id.parent == Parent::Exponential && id.variation == Variation::HumpRate &&
        !is_integer(p.theta))
        closed = false;
    if (!closed) return integrate(id, p, grid);
    std::vector<double> out(static_cast<size_t>(grid.q));
    for (int j = 0; j < grid.q; ++j)
        out[static_cast<size_t>(j)] = size(id, p, grid.t(j));
    return out;
}

// ---- serialization -----------------------------------------------------------------

std::string catalog_json() {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : catalog()) {
        arr.push_back({{"parent", to_string(e.id.parent)},
                       {"variation", to_string(e.id.variation)},
                       {"params", e.params},
                       {"ref", e.ref},
                       {"has_closed_form", e.has_closed_form},
                       {"label", e.label}});
    }
    return arr.dump(2) + "\n";
}

std::string catalog_dot() {
    std::ostringstream os;
    os << "digraph catalog {\n  rankdir=LR;\n";
    for (Parent p : {Parent::Exponential, Parent::Logistic, Parent::ThetaLogistic,
                     Parent::ConfinedExponential})
        os << "  \"" << to_string(p) << "\" [shape=box, style=bold];\n";
    for (const auto& e : catalog()) {
        os << "  \"" << e.ref << "\" [label=\"" << e.label << "\"];\n";
        os << "  \"" << to_string(e.id.parent) << "\" -> \"" << e.ref
           << "\" [label=\"" << to_string(e.id.variation) << "\"];\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace growth

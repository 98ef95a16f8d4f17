#pragma once

#include <string>
#include <vector>

#include "growth/errors.hpp"

namespace growth {

// The four parent growth laws.  Every other catalog model arises from one of
// them by letting a parameter vary continuously with time or density.
enum class Parent {
    Exponential,          // dX/dt = r X
    Logistic,             // dX/dt = r X (1 - X/K)
    ThetaLogistic,        // dX/dt = r X (1 - (X/K)^theta)
    ConfinedExponential,  // dX/dt = r (K - X)
};

// How the parent's parameter is allowed to vary.  Tags are shared across
// parents where the functional form is the same; a (Parent, Variation) pair
// identifies one catalog row.
enum class Variation {
    ConstantParams,     // parent as-is (for ThetaLogistic this is the Richards model)

    // --- time-varying intrinsic rate r(t) ---
    LinearGrowthRate,   // r0 (1 + c t)
    LinearDecayRate,    // r0 (1 - c t)
    PowerRate,          // r0 t^{c-1}
    ExpDecayRate,       // r0 e^{-c t}
    ExpGrowthRate,      // r0 e^{c t}
    HyperbolicRate,     // r0 / (1 + c t)
    SelfSaturatingRate, // r0 / (1 + r0 t)   (linear size growth)
    BlowupRate,         // r0 / (1 - r0 t)   (finite-time singularity at 1/r0)
    SineRate,           // r0 + c sin(omega t)
    CosineRate,         // r0 + c cos(omega t)
    HumpRate,           // r0 t^{theta} e^{-c t} (rise-then-decay pulse; integer theta
                        // has a closed-form size curve)

    // --- limiting / shape variants of the theta-logistic ---
    ThetaUnit,              // theta = 1 (plain logistic written as a theta row)
    GompertzLimit,          // r = r0/theta, theta -> 0
    PowerGompertzLimit,     // r = (r0/theta) t^{c-1}, theta -> 0
    VonBertalanffy,         // r = r0 (K/X)^theta with theta = 1/3
    GeneralizedVonBertalanffy, // r = r0 (K/X)^theta, 0 < theta < 1
    GeneralizedGompertz,    // r = (r0/theta) (ln(K/X))^{c-1}, theta -> 0
    CrescenzoSpina,         // r = (r0/theta) (ln(K/X))^{c},   theta -> 0
    SqrtLogLimit,           // r = (r0/theta) (ln(K/X))^{-1/2}, theta -> 0
    Cooperation,            // r = r0 X^{gamma}
    MarusicBajzer,          // r = r0 (X/K)^{gamma}

    // --- density-dependent rate of the confined-exponential parent ---
    DensityLinearRate,  // r = (r0/K) X  (reproduces the logistic curve)

    // --- time-varying carrying capacity K(t) ---
    ExpGrowthK,         // Logistic: K0 e^{r t}; ConfinedExponential: K0 e^{c t}
    ExpDecayK,          // K0 e^{-c t}
    LinearGrowthK,      // K0 (1 + c t)
    HyperbolicDecayK,   // K0 / (1 + c t)
};

struct ModelId {
    Parent parent;
    Variation variation;

    bool operator==(const ModelId&) const = default;
};

// Union of all parameters used anywhere in the catalog.  Each row reads only
// the fields listed in its catalog entry.
struct ParameterSet {
    double r0 = 0;     // (initial) intrinsic rate
    double c = 0;      // variation coefficient of r(t) or K(t)
    double omega = 0;  // angular frequency of the periodic rate forms
    double K = 0;      // carrying capacity
    double K0 = 0;     // initial carrying capacity of the K(t) rows
    double theta = 0;  // shape/density exponent
    double gamma = 0;  // density exponent of the cooperation-type rows
    double x0 = 0;     // initial size
};

// Uniform observation grid: t_j = t0 + j h, j = 0..q-1.
struct TimeGrid {
    double t0 = 0;
    double h = 1;
    int q = 0;

    double t(int j) const { return t0 + h * j; }
    std::vector<double> times() const {
        std::vector<double> v(static_cast<size_t>(q));
        for (int j = 0; j < q; ++j) v[static_cast<size_t>(j)] = t(j);
        return v;
    }
    void validate() const {
        if (!(h > 0)) throw DomainError("TimeGrid: step h must be positive");
        if (q < 1) throw DomainError("TimeGrid: need at least one point");
    }
};

// Limit classification of X(t) as t grows (over the model's valid domain).
struct AsymptoticSize {
    enum class Kind { Finite, Zero, Infinite, NegInfinite } kind;
    double value = 0;  // meaningful only when kind == Finite
};

struct CatalogEntry {
    ModelId id;
    std::vector<std::string> params;  // names of the ParameterSet fields the row reads
    std::string ref;                  // catalog table reference, e.g. "3.5"
    bool has_closed_form = true;
    std::string label;                // identification, e.g. "Korf Model"
};

// --- catalog operations ------------------------------------------------------

// Closed-form size X(t).  Throws UnsupportedClosedForm when the row has none
// and DomainError when params or t are outside the row's domain.
double size(const ModelId& id, const ParameterSet& p, double t);

// Rate-parameter value r(t) or r(t, x).  Density-dependent rows need x.
// The theta->0 limit rows report the finite limiting coefficient of the
// Gompertz-type ODE they solve.
double rate(const ModelId& id, const ParameterSet& p, double t,
            double x = -1.0);

// ODE right-hand side dX/dt at (t, x).
double ode_rhs(const ModelId& id, const ParameterSet& p, double t, double x);

// Relative growth rate (1/X) dX/dt evaluated at X = size(t).
double rgr(const ModelId& id, const ParameterSet& p, double t);

// Limit classification of the size curve.
AsymptoticSize asymptotic_size(const ModelId& id, const ParameterSet& p);

// Classical fixed-step RK4 with internal substeps (<= h/16, refined x2 until
// two refinements agree to 1e-8 relative).  Starts at X(grid.t0) = x0.
std::vector<double> integrate(const ModelId& id, const ParameterSet& p,
                              const TimeGrid& grid);

// Mean size profile on the grid: closed form when available, RK4 otherwise.
std::vector<double> mean_profile(const ModelId& id, const ParameterSet& p,
                                 const TimeGrid& grid);

// Validate params for the row; throws DomainError with a reason.
void validate(const ModelId& id, const ParameterSet& p);

// The full model catalog.
const std::vector<CatalogEntry>& catalog();

// Look up a catalog entry (throws DomainError if the pair is not listed).
const CatalogEntry& catalog_entry(const ModelId& id);

// True if the (parent, variation) pair is implemented (catalog row or a
// constant-parameter parent).
bool is_implemented(const ModelId& id);

// Serialization of the catalog and of its parent->row relation graph.
std::string catalog_json();
std::string catalog_dot();

// Enum <-> string helpers (names match the enumerators).
std::string to_string(Parent p);
std::string to_string(Variation v);
Parent parent_from_string(const std::string& s);
Variation variation_from_string(const std::string& s);

} // namespace growth

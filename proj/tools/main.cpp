// Command-line front end: catalog listing, trajectory simulation, interval
// rate profiles, curve fitting, two-stage model selection, and bootstrap
// model-selection frequencies.  Exit codes: 0 ok, 2 config error, 3 data
// error, 4 numerical failure.
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "growth/fit.hpp"
#include "growth/io.hpp"
#include "growth/isrp.hpp"
#include "growth/models.hpp"
#include "growth/select.hpp"
#include "growth/sim.hpp"

using namespace growth;

namespace {

// Configuration mistakes (flags, config file, model/plan setup) exit with 2;
// growth::DataError with 3; anything else from the computation with 4.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string one_line(std::string s) {
    for (char& ch : s)
        if (ch == '\n' || ch == '\r') ch = ';';
    return s;
}

struct Cfg {
    std::string input;
    std::string layout = "wide";      // wide | long | series | owid
    std::string parent = "Logistic";
    std::string variation = "ConstantParams";
    std::string target = "r";         // r | K
    std::string format = "table";     // catalog: table | json | dot
    std::string out_dir = ".";
    std::string sigma_source = "auto";  // auto | sample | koopman | zero | none
    std::string location;             // owid layout
    std::string start_date;
    int n_days = 0;
    int smooth = 1;                   // odd moving-average window for series

    double r0 = 0.1, c = 0, omega = 0, K = 0, K0 = 0, theta = 1, gamma = 0,
           x0 = 1;
    double t0 = 0, h = 1;
    int q = 20;
    long n = 1;
    double sigma2 = 0.001, rho = 0.1;
    int replications = 1;
    int replication = 0;
    long B = 200;
    std::uint64_t seed = 0;
    int threads = 1;

    bool periodic = false, hump = false, early_half = false;
    double competitive_delta = 10.0;
    std::vector<std::string> candidates;  // "Parent/Variation" strings
    std::vector<std::string> inits;       // "name=value" overrides for fit
};

void apply_config_json(Cfg& cfg, const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const std::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    try {
        for (const auto& [key, val] : j.items()) {
            if (key == "input") cfg.input = val.get<std::string>();
            else if (key == "layout") cfg.layout = val.get<std::string>();
            else if (key == "parent") cfg.parent = val.get<std::string>();
            else if (key == "variation") cfg.variation = val.get<std::string>();
            else if (key == "target") cfg.target = val.get<std::string>();
            else if (key == "format") cfg.format = val.get<std::string>();
            else if (key == "out_dir") cfg.out_dir = val.get<std::string>();
            else if (key == "sigma_source") cfg.sigma_source = val.get<std::string>();
            else if (key == "location") cfg.location = val.get<std::string>();
            else if (key == "start_date") cfg.start_date = val.get<std::string>();
            else if (key == "n_days") cfg.n_days = val.get<int>();
            else if (key == "smooth") cfg.smooth = val.get<int>();
            else if (key == "r0") cfg.r0 = val.get<double>();
            else if (key == "c") cfg.c = val.get<double>();
            else if (key == "omega") cfg.omega = val.get<double>();
            else if (key == "K") cfg.K = val.get<double>();
            else if (key == "K0") cfg.K0 = val.get<double>();
            else if (key == "theta") cfg.theta = val.get<double>();
            else if (key == "gamma") cfg.gamma = val.get<double>();
            else if (key == "x0") cfg.x0 = val.get<double>();
            else if (key == "t0") cfg.t0 = val.get<double>();
            else if (key == "h") cfg.h = val.get<double>();
            else if (key == "q") cfg.q = val.get<int>();
            else if (key == "n") cfg.n = val.get<long>();
            else if (key == "sigma2") cfg.sigma2 = val.get<double>();
            else if (key == "rho") cfg.rho = val.get<double>();
            else if (key == "replications") cfg.replications = val.get<int>();
            else if (key == "replication") cfg.replication = val.get<int>();
            else if (key == "B") cfg.B = val.get<long>();
            else if (key == "seed") cfg.seed = val.get<std::uint64_t>();
            else if (key == "threads") cfg.threads = val.get<int>();
            else if (key == "periodic") cfg.periodic = val.get<bool>();
            else if (key == "hump") cfg.hump = val.get<bool>();
            else if (key == "early_half") cfg.early_half = val.get<bool>();
            else if (key == "competitive_delta") cfg.competitive_delta = val.get<double>();
            else if (key == "candidates") cfg.candidates = val.get<std::vector<std::string>>();
            else if (key == "init") {
                if (!val.is_object()) throw ConfigError("config init must be an object");
                for (const auto& [name, v] : val.items())
                    cfg.inits.push_back(name + "=" + format_double(v.get<double>()));
            } else {
                throw ConfigError("unknown config key: " + key);
            }
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
}

ParameterSet params_from(const Cfg& cfg) {
    ParameterSet p;
    p.r0 = cfg.r0;
    p.c = cfg.c;
    p.omega = cfg.omega;
    p.K = cfg.K;
    p.K0 = cfg.K0;
    p.theta = cfg.theta;
    p.gamma = cfg.gamma;
    p.x0 = cfg.x0;
    return p;
}

ModelId model_from(const Cfg& cfg) {
    try {
        ModelId id{parent_from_string(cfg.parent),
                   variation_from_string(cfg.variation)};
        if (!is_implemented(id))
            throw ConfigError("no catalog row for " + cfg.parent + "/" +
                              cfg.variation);
        return id;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

SimulationPlan plan_from(const Cfg& cfg) {
    SimulationPlan plan;
    plan.model = model_from(cfg);
    plan.params = params_from(cfg);
    plan.grid = TimeGrid{cfg.t0, cfg.h, cfg.q};
    plan.n = cfg.n;
    plan.cov = KoopmanCov{cfg.sigma2, cfg.rho};
    plan.replications = cfg.replications;
    plan.seed = cfg.seed;
    try {
        plan.validate();
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return plan;
}

std::vector<std::pair<double, double>> load_series(const Cfg& cfg) {
    std::vector<std::pair<double, double>> series;
    if (cfg.layout == "series") {
        series = read_series_csv(cfg.input);
    } else if (cfg.layout == "owid") {
        if (cfg.location.empty() || cfg.start_date.empty() || cfg.n_days < 1)
            throw ConfigError("owid layout needs location, start_date, n_days");
        series = load_owid_csv(cfg.input, cfg.location, cfg.start_date, cfg.n_days);
    } else {
        throw ConfigError("unknown series layout: " + cfg.layout);
    }
    if (cfg.smooth > 1) series = moving_average(series, cfg.smooth);
    return series;
}

TrajectoryMatrix load_data(const Cfg& cfg) {
    if (cfg.input.empty()) throw ConfigError("no input file given");
    if (cfg.layout == "wide") return read_wide_csv(cfg.input);
    if (cfg.layout == "long") return read_long_csv(cfg.input);
    if (cfg.layout == "series" || cfg.layout == "owid")
        return series_to_matrix(load_series(cfg));
    throw ConfigError("unknown layout: " + cfg.layout);
}

// Fields the row fits.  Shape exponents (theta, gamma) stay fixed at their
// configured values; the constant-parameter parents have no catalog row of
// their own.
std::vector<std::string> model_params(const ModelId& id) {
    if (id.variation == Variation::ConstantParams &&
        id.parent != Parent::ThetaLogistic) {
        if (id.parent == Parent::Exponential)
            return {"r0", "x0"};
        return {"r0", "K", "x0"};
    }
    return catalog_entry(id).params;
}

std::vector<std::string> free_params(const ModelId& id) {
    std::vector<std::string> out;
    for (const auto& name : model_params(id))
        if (name != "theta" && name != "gamma") out.push_back(name);
    return out;
}

double& param_field(ParameterSet& p, const std::string& name) {
    if (name == "r0") return p.r0;
    if (name == "c") return p.c;
    if (name == "omega") return p.omega;
    if (name == "K") return p.K;
    if (name == "K0") return p.K0;
    if (name == "theta") return p.theta;
    if (name == "gamma") return p.gamma;
    if (name == "x0") return p.x0;
    throw ConfigError("unknown parameter name: " + name);
}

CurveFn build_curve(const ModelId& id, const ParameterSet& base,
                    const std::vector<std::string>& free) {
    return [id, base, free](double t, const Eigen::VectorXd& beta) {
        ParameterSet p = base;
        for (size_t i = 0; i < free.size(); ++i)
            param_field(p, free[i]) = beta(static_cast<long>(i));
        return size(id, p, t);
    };
}

// Data-driven starting values: K near the observed ceiling, r from the log
// slope of the first points, x0 at the first observation, c of order 1.
double default_init(const std::string& name, const std::vector<double>& t,
                    const std::vector<double>& y) {
    const double ymax = *std::max_element(y.begin(), y.end());
    if (name == "K" || name == "K0") return 1.05 * std::max(ymax, 1e-6);
    if (name == "x0") return std::max(y.front(), 1e-6);
    if (name == "omega")
        return 2.0 * M_PI / std::max(t.back() - t.front(), 1e-6);
    if (name == "c") return 1.0;
    if (name == "r0") {
        if (y.size() >= 3 && y[0] > 0 && y[2] > 0) {
            const double slope = (std::log(y[2]) - std::log(y[0])) / (2.0 * (t[1] - t[0]));
            if (std::isfinite(slope) && slope > 1e-6) return slope;
        }
        return 0.1;
    }
    return 1.0;
}

FitProblem make_problem(const Cfg& cfg, const ModelId& id,
                        const std::vector<double>& t,
                        const std::vector<double>& y) {
    FitProblem prob;
    const std::vector<std::string> free = free_params(id);
    ParameterSet base = params_from(cfg);
    prob.curve = build_curve(id, base, free);
    prob.t = t;
    prob.y = y;
    prob.names = free;
    prob.init.resize(static_cast<long>(free.size()));
    for (size_t i = 0; i < free.size(); ++i)
        prob.init(static_cast<long>(i)) = default_init(free[i], t, y);
    for (const std::string& ov : cfg.inits) {
        const size_t eq = ov.find('=');
        if (eq == std::string::npos)
            throw ConfigError("init override must be name=value: " + ov);
        const std::string name = ov.substr(0, eq);
        char* end = nullptr;
        const double v = std::strtod(ov.c_str() + eq + 1, &end);
        if (end != ov.c_str() + ov.size())
            throw ConfigError("bad init value in: " + ov);
        const auto it = std::find(free.begin(), free.end(), name);
        if (it == free.end())
            throw ConfigError("init name '" + name + "' is not fitted by " +
                              to_string(id.parent) + "/" + to_string(id.variation));
        prob.init(static_cast<long>(it - free.begin())) = v;
    }
    prob.lower = Eigen::VectorXd::Constant(prob.init.size(), 1e-9);
    return prob;
}

// All output content is assembled before anything touches the filesystem, so
// a failed run leaves no partial files.
struct Outputs {
    std::vector<std::pair<std::string, std::string>> files;

    void add(const std::string& dir, const std::string& name,
             const std::string& content) {
        files.emplace_back((std::filesystem::path(dir) / name).string(), content);
    }
    void flush(const std::string& dir) {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        for (const auto& [path, content] : files) {
            write_file(path, content);
            std::cout << "wrote " << path << "\n";
        }
    }
};

SigmaSource sigma_source_from(const Cfg& cfg, long n_rows) {
    if (cfg.sigma_source == "auto")
        return n_rows >= 2 ? SigmaSource::Sample : SigmaSource::None;
    if (cfg.sigma_source == "sample") return SigmaSource::Sample;
    if (cfg.sigma_source == "koopman") return SigmaSource::Koopman;
    if (cfg.sigma_source == "zero") return SigmaSource::Zero;
    if (cfg.sigma_source == "none") return SigmaSource::None;
    throw ConfigError("unknown sigma_source: " + cfg.sigma_source);
}

// ---- commands -----------------------------------------------------------------

int cmd_catalog(const Cfg& cfg) {
    std::string text;
    if (cfg.format == "json") {
        text = catalog_json();
    } else if (cfg.format == "dot") {
        text = catalog_dot();
    } else if (cfg.format == "table") {
        std::ostringstream os;
        char line[200];
        std::snprintf(line, sizeof line, "%-5s %-20s %-22s %-6s %s\n", "ref",
                      "parent", "variation", "closed", "label");
        os << line;
        for (const auto& e : catalog()) {
            std::snprintf(line, sizeof line, "%-5s %-20s %-22s %-6s %s\n",
                          e.ref.c_str(), to_string(e.id.parent).c_str(),
                          to_string(e.id.variation).c_str(),
                          e.has_closed_form ? "yes" : "no", e.label.c_str());
            os << line;
        }
        text = os.str();
    } else {
        throw ConfigError("unknown catalog format: " + cfg.format);
    }
    std::cout << text;
    return 0;
}

int cmd_simulate(const Cfg& cfg) {
    const SimulationPlan plan = plan_from(cfg);
    if (cfg.replication < 0 || cfg.replication >= plan.replications)
        throw ConfigError("replication index out of range");
    const TrajectoryMatrix data = simulate(plan, cfg.replication);
    Outputs out;
    out.add(cfg.out_dir, "trajectories.csv", wide_csv(data));
    out.add(cfg.out_dir, "plan.json", plan_json(plan));
    out.flush(cfg.out_dir);
    std::cout << "simulated " << data.n() << " trajectories at " << data.q()
              << " time points";
    if (data.nonpositive_draws > 0)
        std::cout << " (" << data.nonpositive_draws << " nonpositive draws)";
    std::cout << "\n";
    return 0;
}

int cmd_isrp(const Cfg& cfg) {
    Parent parent;
    try {
        parent = parent_from_string(cfg.parent);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    const Target target = [&] {
        if (cfg.target == "r") return Target::r;
        if (cfg.target == "K") return Target::K;
        throw ConfigError("target must be r or K");
    }();

    Outputs out;
    if (cfg.input.empty()) {
        // Replication mode: simulate plan.replications datasets and report the
        // empirical ISRP sampling distribution per interval.
        const SimulationPlan plan = plan_from(cfg);
        const ReplicationReport report = replicate_isrp(plan, target, cfg.threads);
        out.add(cfg.out_dir, "isrp_summary.csv", replication_report_csv(report));
        out.add(cfg.out_dir, "isrp_samples.csv", replication_samples_csv(report));
        out.add(cfg.out_dir, "plan.json", plan_json(plan));
        out.flush(cfg.out_dir);
        std::cout << "replications: " << plan.replications << ", intervals: "
                  << report.intervals.size() << "\n";
        return 0;
    }

    const TrajectoryMatrix data = load_data(cfg);
    ProfileOptions opts;
    opts.theta = cfg.theta;
    opts.sigma = sigma_source_from(cfg, data.n());
    opts.sigma2 = cfg.sigma2;
    opts.rho = cfg.rho;
    const IsrpSeries series = isrp_profile(data, parent, target, opts);
    out.add(cfg.out_dir, "isrp.csv", isrp_series_csv(series));
    out.add(cfg.out_dir, "isrp.json", isrp_series_json(series));
    out.flush(cfg.out_dir);
    long flagged = 0;
    for (const auto& e : series.estimates)
        if (!e.ok()) ++flagged;
    std::cout << "intervals: " << series.estimates.size() << ", flagged: "
              << flagged << "\n";
    return 0;
}

int cmd_fit(const Cfg& cfg) {
    const ModelId id = model_from(cfg);
    const TrajectoryMatrix data = load_data(cfg);
    const Eigen::VectorXd means = data.col_means();
    const std::vector<double> t = data.grid.times();
    const std::vector<double> y(means.data(), means.data() + means.size());

    FitProblem prob = make_problem(cfg, id, t, y);
    const FitResult result = nls_fit(prob);

    std::ostringstream curve;
    curve << "t,observed,fitted\n";
    for (size_t i = 0; i < t.size(); ++i)
        curve << format_double(t[i]) << ',' << format_double(y[i]) << ','
              << format_double(prob.curve(t[i], result.estimates)) << '\n';

    Outputs out;
    out.add(cfg.out_dir, "fit.json", fit_result_json(result, prob.names));
    out.add(cfg.out_dir, "fitted_curve.csv", curve.str());
    out.flush(cfg.out_dir);

    std::cout << to_string(id.parent) << "/" << to_string(id.variation) << ":";
    for (size_t i = 0; i < prob.names.size(); ++i)
        std::cout << ' ' << prob.names[i] << '='
                  << format_double(result.estimates(static_cast<long>(i)));
    std::cout << "\naic " << format_double(result.aic) << ", rmse "
              << format_double(result.rmse)
              << (result.converged ? "" : " [not converged]") << "\n";
    return 0;
}

int cmd_select(const Cfg& cfg) {
    Parent parent;
    try {
        parent = parent_from_string(cfg.parent);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    const TrajectoryMatrix data = load_data(cfg);

    DetectOptions dopts;
    dopts.theta = cfg.theta;
    dopts.early_half_only = cfg.early_half;
    const IsrpStage stage =
        detect_variation(data, parent, default_forms(cfg.periodic, cfg.hump), dopts);

    SelectOptions sopts;
    sopts.theta = cfg.theta;
    sopts.competitive_delta = cfg.competitive_delta;
    const SelectionReport report = select_model(data, parent, stage, sopts);

    std::ostringstream pts;
    pts << "t,r\n";
    for (const auto& [tv, rv] : stage.points)
        pts << format_double(tv) << ',' << format_double(rv) << '\n';

    const Eigen::VectorXd means = data.col_means();
    std::ostringstream curves;
    curves << "t";
    for (const auto& rm : report.model_stage)
        if (rm.fit_ok)
            curves << ',' << to_string(rm.id.parent) << '_'
                   << to_string(rm.id.variation);
    curves << ",mean\n";
    for (int j = 0; j < data.grid.q; ++j) {
        const double tj = data.grid.t(j);
        curves << format_double(tj);
        for (const auto& rm : report.model_stage) {
            if (!rm.fit_ok) continue;
            double v = std::numeric_limits<double>::quiet_NaN();
            try {
                v = build_curve(rm.id, rm.base, rm.free)(tj, rm.fit.estimates);
            } catch (const Error&) {
            }
            curves << ',' << (std::isfinite(v) ? format_double(v) : "");
        }
        curves << ',' << format_double(means(j)) << '\n';
    }

    Outputs out;
    out.add(cfg.out_dir, "selection.json", selection_report_json(report));
    out.add(cfg.out_dir, "selection.txt", selection_report_text(report));
    out.add(cfg.out_dir, "isrp_points.csv", pts.str());
    out.add(cfg.out_dir, "model_curves.csv", curves.str());
    out.flush(cfg.out_dir);

    std::cout << selection_report_text(report);
    return 0;
}

int cmd_bootstrap(const Cfg& cfg) {
    if (cfg.candidates.empty())
        throw ConfigError("no candidates given (Parent/Variation,...)");
    const TrajectoryMatrix data = load_data(cfg);
    const Eigen::VectorXd means = data.col_means();
    const std::vector<double> t = data.grid.times();
    const std::vector<double> y(means.data(), means.data() + means.size());

    std::vector<CandidateModel> candidates;
    for (const std::string& spec : cfg.candidates) {
        const size_t slash = spec.find('/');
        if (slash == std::string::npos)
            throw ConfigError("candidate must be Parent/Variation: " + spec);
        Cfg sub = cfg;
        sub.parent = spec.substr(0, slash);
        sub.variation = spec.substr(slash + 1);
        const ModelId id = model_from(sub);
        CandidateModel cand;
        cand.name = spec;
        cand.problem = make_problem(sub, id, t, y);
        candidates.push_back(std::move(cand));
    }

    const BootstrapReport report =
        bootstrap_select(data, candidates, cfg.B, cfg.seed, cfg.threads);

    Outputs out;
    out.add(cfg.out_dir, "bootstrap.json", bootstrap_report_json(report));
    out.add(cfg.out_dir, "bootstrap_samples.csv", bootstrap_samples_csv(report));
    out.flush(cfg.out_dir);

    for (size_t i = 0; i < report.names.size(); ++i)
        std::cout << report.names[i] << ": " << report.wins[i] << "/"
                  << report.B << " wins\n";
    if (report.failed_replicates > 0)
        std::cout << report.failed_replicates << " replicates failed entirely\n";
    return 0;
}

void add_common(CLI::App* sub, Cfg& cfg) {
    sub->add_option("--config", "JSON config file; flags override its values")
        ->type_name("FILE");
    sub->add_option("--out-dir", cfg.out_dir, "output directory");
    sub->add_option("--seed", cfg.seed,
                    "random seed (default: GROWTH_SEED env or 0)");
    sub->add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
}

void add_data(CLI::App* sub, Cfg& cfg) {
    sub->add_option("--input", cfg.input, "input data file");
    sub->add_option("--layout", cfg.layout, "wide | long | series | owid");
    sub->add_option("--smooth", cfg.smooth,
                    "odd moving-average window applied to series input");
    sub->add_option("--location", cfg.location, "owid: location to extract");
    sub->add_option("--start-date", cfg.start_date, "owid: first date (YYYY-MM-DD)");
    sub->add_option("--n-days", cfg.n_days, "owid: days to keep");
}

void add_model(CLI::App* sub, Cfg& cfg) {
    sub->add_option("--parent", cfg.parent,
                    "Exponential | Logistic | ThetaLogistic | ConfinedExponential");
    sub->add_option("--variation", cfg.variation, "catalog variation tag");
    sub->add_option("--r0", cfg.r0, "initial intrinsic rate");
    sub->add_option("-c,--c", cfg.c, "variation coefficient");
    sub->add_option("--omega", cfg.omega, "angular frequency");
    sub->add_option("-K,--K", cfg.K, "carrying capacity");
    sub->add_option("--K0", cfg.K0, "initial carrying capacity");
    sub->add_option("--theta", cfg.theta, "shape exponent (held fixed in fits)");
    sub->add_option("--gamma", cfg.gamma, "density exponent (held fixed in fits)");
    sub->add_option("--x0", cfg.x0, "initial size");
}

void add_plan(CLI::App* sub, Cfg& cfg) {
    sub->add_option("--t0", cfg.t0, "grid start");
    sub->add_option("--step", cfg.h, "grid step h");
    sub->add_option("-q,--q", cfg.q, "grid points");
    sub->add_option("-n,--n", cfg.n, "trajectories per dataset");
    sub->add_option("--sigma2", cfg.sigma2, "noise variance");
    sub->add_option("--rho", cfg.rho, "lag-1 correlation");
    sub->add_option("--replications", cfg.replications, "independent datasets");
}

} // namespace

int main(int argc, char** argv) {
    Cfg cfg;
    if (const char* env = std::getenv("GROWTH_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0') cfg.seed = v;
    }

    // The config file seeds the defaults; command-line flags then override.
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        try {
            if (arg == "--config" && i + 1 < argc)
                apply_config_json(cfg, argv[i + 1]);
            else if (arg.rfind("--config=", 0) == 0)
                apply_config_json(cfg, arg.substr(9));
        } catch (const ConfigError& e) {
            std::cerr << "error: config: " << one_line(e.what()) << "\n";
            return 2;
        } catch (const Error& e) {
            std::cerr << "error: config: " << one_line(e.what()) << "\n";
            return 2;
        }
    }

    CLI::App app{"growth-model variation analysis pipeline"};
    app.require_subcommand(1);

    CLI::App* sc_catalog = app.add_subcommand("catalog", "list the model catalog");
    sc_catalog->add_option("--format", cfg.format, "table | json | dot");

    CLI::App* sc_sim = app.add_subcommand("simulate",
                                          "draw correlated trajectories around a mean curve");
    add_common(sc_sim, cfg);
    add_model(sc_sim, cfg);
    add_plan(sc_sim, cfg);
    sc_sim->add_option("--replication", cfg.replication, "dataset index to write");

    CLI::App* sc_isrp = app.add_subcommand(
        "isrp", "interval rate profile of data (or of a simulation plan)");
    add_common(sc_isrp, cfg);
    add_data(sc_isrp, cfg);
    add_model(sc_isrp, cfg);
    add_plan(sc_isrp, cfg);
    sc_isrp->add_option("--target", cfg.target, "r | K");
    sc_isrp->add_option("--sigma-source", cfg.sigma_source,
                        "auto | sample | koopman | zero | none");

    CLI::App* sc_fit = app.add_subcommand("fit", "least-squares fit of one model");
    add_common(sc_fit, cfg);
    add_data(sc_fit, cfg);
    add_model(sc_fit, cfg);
    sc_fit->add_option("--init", cfg.inits, "starting value override name=value");

    CLI::App* sc_select = app.add_subcommand(
        "select", "two-stage variation detection and model choice");
    add_common(sc_select, cfg);
    add_data(sc_select, cfg);
    add_model(sc_select, cfg);
    sc_select->add_flag("--periodic", cfg.periodic, "include periodic rate forms");
    sc_select->add_flag("--hump", cfg.hump, "include the pulse rate form");
    sc_select->add_flag("--early-half", cfg.early_half,
                        "fit rate forms to the first half of intervals only");
    sc_select->add_option("--competitive-delta", cfg.competitive_delta,
                          "stage-2 entry cut on stage-1 AIC differences");

    CLI::App* sc_boot = app.add_subcommand(
        "bootstrap", "bootstrap model-selection frequencies");
    add_common(sc_boot, cfg);
    add_data(sc_boot, cfg);
    add_model(sc_boot, cfg);
    sc_boot->add_option("--candidates", cfg.candidates,
                        "candidate models Parent/Variation")
        ->delimiter(',');
    sc_boot->add_option("-B,--B", cfg.B, "bootstrap replicates");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: config: " << one_line(e.what()) << "\n";
        return 2;
    }

    try {
        if (sc_catalog->parsed()) return cmd_catalog(cfg);
        if (sc_sim->parsed()) return cmd_simulate(cfg);
        if (sc_isrp->parsed()) return cmd_isrp(cfg);
        if (sc_fit->parsed()) return cmd_fit(cfg);
        if (sc_select->parsed()) return cmd_select(cfg);
        if (sc_boot->parsed()) return cmd_bootstrap(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "error: config: " << one_line(e.what()) << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "error: data: " << one_line(e.what()) << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: numerical: " << one_line(e.what()) << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: numerical: " << one_line(e.what()) << "\n";
        return 4;
    }
    return 0;
}

#include "growth/select.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "growth/io.hpp"

namespace growth {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int form_k(RateFormTag tag) {
    switch (tag) {
        case RateFormTag::Constant: return 1;
        case RateFormTag::Linear:
        case RateFormTag::Power:
        case RateFormTag::ExpDecay:
        case RateFormTag::ExpGrowth:
        case RateFormTag::Hyperbolic: return 2;
        case RateFormTag::Sine:
        case RateFormTag::Cosine:
        case RateFormTag::GompertzHump: return 3;
    }
    return 0;
}

CurveFn form_curve(RateFormTag tag) {
    switch (tag) {
        case RateFormTag::Constant:
            return [](double, const Eigen::VectorXd& b) { return b(0); };
        case RateFormTag::Linear:
            return [](double t, const Eigen::VectorXd& b) {
                return b(0) * (1.0 + b(1) * t);
            };
        case RateFormTag::Power:
            return [](double t, const Eigen::VectorXd& b) {
                return b(0) * std::pow(t, b(1) - 1.0);
            };
        case RateFormTag::ExpDecay:
            return [](double t, const Eigen::VectorXd& b) {
                return b(0) * std::exp(-b(1) * t);
            };
        case RateFormTag::ExpGrowth:
            return [](double t, const Eigen::VectorXd& b) {
                return b(0) * std::exp(b(1) * t);
            };
        case RateFormTag::Hyperbolic:
            return [](double t, const Eigen::VectorXd& b) {
                return b(0) / (1.0 + b(1) * t);
            };
        case RateFormTag::Sine:
            return [](double t, const Eigen::VectorXd& b) {
                return b(0) + b(1) * std::sin(b(2) * t);
            };
        case RateFormTag::Cosine:
            return [](double t, const Eigen::VectorXd& b) {
                return b(0) + b(1) * std::cos(b(2) * t);
            };
        case RateFormTag::GompertzHump:
            return [](double t, const Eigen::VectorXd& b) {
                return b(0) * std::exp(-b(1) * t) * std::pow(t, b(2));
            };
    }
    throw DomainError("unknown rate form");
}

// Data-driven starting values and loose positivity boxes per form.
void form_init(RateFormTag tag,
               const std::vector<std::pair<double, double>>& pts,
               Eigen::VectorXd& init, Eigen::VectorXd& lo,
               Eigen::VectorXd& hi) {
    double rbar = 0, rmax = -kInf, rmin = kInf, tmax_r = 0;
    for (const auto& [t, r] : pts) {
        rbar += r;
        if (r > rmax) {
            rmax = r;
            tmax_r = t;
        }
        rmin = std::min(rmin, r);
    }
    rbar /= static_cast<double>(pts.size());
    const double first = pts.front().second;
    const double span = std::max(pts.back().first - pts.front().first, 1e-6);
    const double pos_first = std::max(first, 1e-3);

    const int k = form_k(tag);
    init.resize(k);
    lo = Eigen::VectorXd::Constant(k, -kInf);
    hi = Eigen::VectorXd::Constant(k, kInf);
    switch (tag) {
        case RateFormTag::Constant:
            init << rbar;
            break;
        case RateFormTag::Linear: {
            // Seed from the closed-form least-squares line: the b0 (1 + b1 t)
            // parameterization is singular at b0 = 0, so the start must land
            // on the correct side of that manifold.
            double st = 0, sr = 0, stt = 0, str = 0;
            for (const auto& [t, r] : pts) {
                st += t;
                sr += r;
                stt += t * t;
                str += t * r;
            }
            const double m = static_cast<double>(pts.size());
            const double den = m * stt - st * st;
            const double slope = den != 0 ? (m * str - st * sr) / den : 0.0;
            const double icept = (sr - slope * st) / m;
            if (std::abs(icept) > 1e-12)
                init << icept, slope / icept;
            else
                init << (rbar != 0 ? rbar : 1e-3), 0.0;
            break;
        }
        case RateFormTag::Power:
            init << std::max(rbar, 1e-3), 1.0;
            lo(1) = 1e-6;  // exponent restriction of the power-rate row
            hi(1) = 10.0;
            break;
        case RateFormTag::ExpDecay:
            init << pos_first, 0.1;
            lo(1) = 0.0;
            break;
        case RateFormTag::ExpGrowth:
            init << pos_first, 0.1;
            lo(1) = 0.0;
            break;
        case RateFormTag::Hyperbolic:
            init << pos_first, 0.1;
            lo(1) = 0.0;
            break;
        case RateFormTag::Sine:
        case RateFormTag::Cosine:
            init << rbar, std::max((rmax - rmin) / 2.0, 1e-3),
                2.0 * M_PI / span;
            lo(2) = 1e-6;
            break;
        case RateFormTag::GompertzHump: {
            const double tstar = tmax_r > 0 ? tmax_r : span / 4.0;
            const double b = 1.0 / tstar;
            const double a = std::max(rmax, 1e-3) * std::exp(1.0) / tstar;
            init << a, b, 1.0;
            lo << 1e-12, 1e-12, 1e-12;
            hi(2) = 20.0;
            break;
        }
    }
}

// Field lookup for building ParameterSets from fit vectors.
double& param_field(ParameterSet& p, const std::string& name) {
    if (name == "r0") return p.r0;
    if (name == "c") return p.c;
    if (name == "omega") return p.omega;
    if (name == "K") return p.K;
    if (name == "K0") return p.K0;
    if (name == "theta") return p.theta;
    if (name == "gamma") return p.gamma;
    if (name == "x0") return p.x0;
    throw DomainError("unknown parameter name: " + name);
}

struct ModelCandidate {
    ModelId id{Parent::Logistic, Variation::ConstantParams};
    std::string label;
    ParameterSet base;                // fixed fields (e.g. integer exponent)
    std::vector<std::string> free;    // fitted fields, in beta order
    Eigen::VectorXd init;
};

// Free-parameter list of the constant-parameter baseline per parent.
std::vector<std::string> constant_params(Parent parent) {
    switch (parent) {
        case Parent::Exponential: return {"r0", "x0"};
        case Parent::Logistic: return {"r0", "K", "x0"};
        case Parent::ThetaLogistic: return {"r0", "K", "x0"};  // theta held fixed
        case Parent::ConfinedExponential: return {"r0", "K", "x0"};
    }
    return {};
}

} // namespace

std::string to_string(RateFormTag tag) {
    switch (tag) {
        case RateFormTag::Constant:     return "Constant";
        case RateFormTag::Linear:       return "Linear";
        case RateFormTag::Power:        return "Power";
        case RateFormTag::ExpDecay:     return "ExpDecay";
        case RateFormTag::ExpGrowth:    return "ExpGrowth";
        case RateFormTag::Hyperbolic:   return "Hyperbolic";
        case RateFormTag::Sine:         return "Sine";
        case RateFormTag::Cosine:       return "Cosine";
        case RateFormTag::GompertzHump: return "GompertzHump";
    }
    return "?";
}

RateFormTag rate_form_from_string(const std::string& s) {
    for (RateFormTag tag :
         {RateFormTag::Constant, RateFormTag::Linear, RateFormTag::Power,
          RateFormTag::ExpDecay, RateFormTag::ExpGrowth, RateFormTag::Hyperbolic,
          RateFormTag::Sine, RateFormTag::Cosine, RateFormTag::GompertzHump})
        if (to_string(tag) == s) return tag;
    throw DomainError("unknown rate form: " + s);
}

std::vector<RateForm> default_forms(bool include_periodic, bool include_hump) {
    std::vector<RateForm> forms = {{RateFormTag::Constant},  {RateFormTag::Linear},
                                   {RateFormTag::Power},     {RateFormTag::ExpDecay},
                                   {RateFormTag::ExpGrowth}, {RateFormTag::Hyperbolic}};
    if (include_periodic) {
        forms.push_back({RateFormTag::Sine});
        forms.push_back({RateFormTag::Cosine});
    }
    if (include_hump) forms.push_back({RateFormTag::GompertzHump});
    return forms;
}

IsrpStage detect_variation(const TrajectoryMatrix& data, Parent parent,
                           const std::vector<RateForm>& forms,
                           const DetectOptions& opts) {
    if (forms.empty()) throw DomainError("no candidate rate forms");
    ProfileOptions popts;
    popts.theta = opts.theta;
    popts.sigma = SigmaSource::None;
    const IsrpSeries series = isrp_profile(data, parent, Target::r, popts);

    IsrpStage stage;
    stage.parent = parent;
    const int total = static_cast<int>(series.estimates.size());
    const int j_cut = opts.early_half_only ? (total + 1) / 2 : total;
    for (const auto& e : series.estimates) {
        if (!e.ok() || !std::isfinite(e.value)) {
            ++stage.skipped_windows;
            continue;
        }
        if (e.j >= j_cut) continue;
        stage.points.emplace_back(e.t, e.value);
    }
    if (stage.points.empty())
        throw EmptyProfile("every profile interval failed");
    if (stage.points.size() < 4)
        throw DomainError("need at least 4 usable profile intervals, have " +
                          std::to_string(stage.points.size()));

    for (const RateForm& form : forms) {
        RankedForm rf;
        rf.tag = form.tag;
        rf.k = form_k(form.tag);
        FitProblem prob;
        prob.curve = form_curve(form.tag);
        for (const auto& [t, r] : stage.points) {
            prob.t.push_back(t);
            prob.y.push_back(r);
        }
        form_init(form.tag, stage.points, prob.init, prob.lower, prob.upper);
        try {
            rf.fit = nls_fit(prob);
        } catch (const Error& err) {
            rf.fit.aic = kInf;
            rf.fit.converged = false;
            rf.fit.message = err.what();
        }
        stage.ranked.push_back(std::move(rf));
    }
    std::sort(stage.ranked.begin(), stage.ranked.end(),
              [](const RankedForm& a, const RankedForm& b) {
                  if (a.fit.aic != b.fit.aic) return a.fit.aic < b.fit.aic;
                  return static_cast<int>(a.tag) < static_cast<int>(b.tag);
              });

    const double best = stage.ranked.front().fit.aic;
    for (const auto& rf : stage.ranked)
        if (rf.tag == RateFormTag::Constant)
            stage.no_variation = rf.fit.aic - best <= 2.0;
    return stage;
}

SelectionReport select_model(const TrajectoryMatrix& data, Parent parent,
                             const IsrpStage& stage, const SelectOptions& opts) {
    if (stage.ranked.empty()) throw DomainError("empty isrp stage");
    data.validate();

    const double best_aic = stage.ranked.front().fit.aic;
    std::vector<ModelCandidate> cands;
    auto have = [&cands](const ModelId& id, const ParameterSet& base) {
        for (const auto& c : cands)
            if (c.id == id && c.base.theta == base.theta) return true;
        return false;
    };

    const Eigen::VectorXd means = data.col_means();
    const double ymax = means.maxCoeff();
    const double y0 = std::max(means(0), 1e-6);

    auto add_candidate = [&](const ModelId& id, const std::string& label,
                             ParameterSet base, std::vector<std::string> free,
                             const Eigen::VectorXd& stage_beta) {
        if (have(id, base)) return;
        ModelCandidate mc;
        mc.id = id;
        mc.label = label;
        mc.base = base;
        mc.free = std::move(free);
        mc.init.resize(static_cast<long>(mc.free.size()));
        for (size_t i = 0; i < mc.free.size(); ++i) {
            const std::string& name = mc.free[i];
            double v;
            if (name == "r0")
                v = stage_beta.size() > 0 ? std::abs(stage_beta(0)) : 0.1;
            else if (name == "c")
                v = stage_beta.size() > 1 ? std::abs(stage_beta(1)) : 0.1;
            else if (name == "omega")
                v = stage_beta.size() > 2 ? std::abs(stage_beta(2)) : 1.0;
            else if (name == "K")
                v = 1.05 * ymax;
            else if (name == "x0")
                v = y0;
            else
                v = 1.0;
            mc.init(static_cast<long>(i)) = std::max(v, 1e-6);
        }
        cands.push_back(std::move(mc));
    };

    std::ostringstream narrative;
    narrative << "stage1 best form: " << to_string(stage.ranked.front().tag)
              << " (aic " << format_double(best_aic) << ")\n";
    narrative << "no_variation: " << (stage.no_variation ? "true" : "false")
              << "\n";

    bool constant_added = false;
    for (const auto& rf : stage.ranked) {
        const bool competitive = rf.fit.aic - best_aic <= opts.competitive_delta;
        if (!competitive && rf.tag != RateFormTag::Constant) continue;
        const Eigen::VectorXd& b = rf.fit.estimates;
        ParameterSet base;
        base.theta = parent == Parent::ThetaLogistic ? opts.theta : 0.0;
        switch (rf.tag) {
            case RateFormTag::Constant: {
                add_candidate({parent, Variation::ConstantParams},
                              "constant parameters", base, constant_params(parent), b);
                constant_added = true;
                break;
            }
            case RateFormTag::Linear: {
                const bool up = b.size() < 2 || b(1) >= 0;
                auto id = ModelId{parent, up ? Variation::LinearGrowthRate
                                             : Variation::LinearDecayRate};
                auto free = constant_params(parent);
                free.insert(free.begin() + 1, "c");
                add_candidate(id, to_string(id.variation), base, free, b);
                break;
            }
            case RateFormTag::Power:
            case RateFormTag::ExpDecay:
            case RateFormTag::ExpGrowth:
            case RateFormTag::Hyperbolic: {
                Variation v = rf.tag == RateFormTag::Power ? Variation::PowerRate
                              : rf.tag == RateFormTag::ExpDecay
                                  ? Variation::ExpDecayRate
                              : rf.tag == RateFormTag::ExpGrowth
                                  ? Variation::ExpGrowthRate
                                  : Variation::HyperbolicRate;
                auto free = constant_params(parent);
                free.insert(free.begin() + 1, "c");
                add_candidate({parent, v}, to_string(v), base, free, b);
                break;
            }
            case RateFormTag::Sine:
            case RateFormTag::Cosine: {
                Variation v = rf.tag == RateFormTag::Sine ? Variation::SineRate
                                                          : Variation::CosineRate;
                auto free = constant_params(parent);
                free.insert(free.begin() + 1, "c");
                free.insert(free.begin() + 2, "omega");
                add_candidate({parent, v}, to_string(v), base, free, b);
                break;
            }
            case RateFormTag::GompertzHump: {
                if (parent != Parent::Exponential) {
                    narrative << "skipped GompertzHump: pulse-shaped rate has a "
                                 "catalog row only under the exponential parent\n";
                    break;
                }
                for (double expo : {1.0, 2.0}) {
                    ParameterSet hb;
                    hb.theta = expo;
                    add_candidate({parent, Variation::HumpRate},
                                  "pulse rate, exponent " + format_double(expo),
                                  hb, {"r0", "c", "x0"}, b);
                }
                break;
            }
        }
    }
    if (!constant_added) {
        ParameterSet base;
        base.theta = parent == Parent::ThetaLogistic ? opts.theta : 0.0;
        add_candidate({parent, Variation::ConstantParams}, "constant parameters",
                      base, constant_params(parent), Eigen::VectorXd());
    }

    SelectionReport report;
    report.isrp_stage = stage;

    for (const auto& mc : cands) {
        RankedModel rm;
        rm.id = mc.id;
        rm.note = mc.label;
        rm.base = mc.base;
        rm.free = mc.free;
        FitProblem prob;
        const ModelId id = mc.id;
        const ParameterSet base = mc.base;
        const std::vector<std::string> free = mc.free;
        prob.curve = [id, base, free](double t, const Eigen::VectorXd& beta) {
            ParameterSet p = base;
            for (size_t i = 0; i < free.size(); ++i)
                param_field(p, free[i]) = beta(static_cast<long>(i));
            return size(id, p, t);
        };
        const std::vector<double> times = data.grid.times();
        prob.t = times;
        prob.y.assign(means.data(), means.data() + means.size());
        prob.init = mc.init;
        prob.lower = Eigen::VectorXd::Constant(mc.init.size(), 1e-9);
        prob.names = mc.free;
        try {
            rm.fit = nls_fit(prob);
            rm.fit_ok = true;
        } catch (const Error& err) {
            rm.fit_ok = false;
            rm.fit.aic = kInf;
            rm.note += std::string(" [fit failed: ") + err.what() + "]";
        }
        report.model_stage.push_back(std::move(rm));
    }

    std::sort(report.model_stage.begin(), report.model_stage.end(),
              [](const RankedModel& a, const RankedModel& b) {
                  if (a.fit_ok != b.fit_ok) return a.fit_ok;
                  if (a.fit.aic != b.fit.aic) return a.fit.aic < b.fit.aic;
                  return std::make_pair(static_cast<int>(a.id.parent),
                                        static_cast<int>(a.id.variation)) <
                         std::make_pair(static_cast<int>(b.id.parent),
                                        static_cast<int>(b.id.variation));
              });
    report.chosen = report.model_stage.front().id;
    // When the rate profile showed no variation, the constant model stands
    // unless a richer fit beats it decisively; a marginal edge does not
    // justify the extra parameter the first stage found no evidence for.
    if (stage.no_variation &&
        report.chosen.variation != Variation::ConstantParams) {
        for (const auto& rm : report.model_stage) {
            if (rm.id.variation != Variation::ConstantParams || !rm.fit_ok)
                continue;
            if (rm.fit.aic - report.model_stage.front().fit.aic <= 10.0) {
                report.chosen = rm.id;
                narrative << "no rate variation detected; keeping the "
                             "constant model over a marginal refit\n";
            }
            break;
        }
    }
    narrative << "stage2 candidates: " << report.model_stage.size() << "\n";
    for (const auto& rm : report.model_stage)
        narrative << "  " << to_string(rm.id.parent) << "/"
                  << to_string(rm.id.variation) << " aic "
                  << (rm.fit_ok ? format_double(rm.fit.aic) : "failed") << "\n";
    narrative << "chosen: " << to_string(report.chosen.parent) << "/"
              << to_string(report.chosen.variation) << "\n";
    report.narrative = narrative.str();
    return report;
}

std::vector<std::pair<double, double>> moving_average(
    const std::vector<std::pair<double, double>>& series, int window) {
    if (window < 1 || window % 2 == 0)
        throw DomainError("window must be odd and >= 1");
    if (window > static_cast<int>(series.size()))
        throw WindowTooLarge("window exceeds series length");
    const int half = window / 2;
    std::vector<std::pair<double, double>> out;
    out.reserve(series.size() - static_cast<size_t>(window) + 1);
    for (size_t i = static_cast<size_t>(half);
         i + static_cast<size_t>(half) < series.size(); ++i) {
        double sum = 0;
        for (int d = -half; d <= half; ++d)
            sum += series[i + static_cast<size_t>(d)].second;
        out.emplace_back(series[i].first, sum / window);
    }
    return out;
}

std::vector<std::pair<double, double>> rgr_series(
    const std::vector<std::pair<double, double>>& series) {
    if (series.size() < 2) throw DomainError("need at least two points");
    const double h = series[1].first - series[0].first;
    if (!(h > 0)) throw DataError("time stamps must increase");
    for (size_t i = 1; i < series.size(); ++i) {
        const double d = series[i].first - series[i - 1].first;
        if (std::abs(d - h) > 1e-9 * std::max(1.0, std::abs(h)))
            throw DataError("non-uniform time spacing");
    }
    std::vector<std::pair<double, double>> out;
    out.reserve(series.size() - 1);
    for (size_t i = 0; i + 1 < series.size(); ++i) {
        const double y0 = series[i].second, y1 = series[i + 1].second;
        if (!(y0 > 0) || !(y1 > 0))
            throw NonPositiveValue("sizes must be positive for the log ratio");
        out.emplace_back(series[i].first + h / 2.0,
                         (std::log(y1) - std::log(y0)) / h);
    }
    return out;
}

std::string selection_report_json(const SelectionReport& report) {
    nlohmann::json j;
    nlohmann::json stage1 = nlohmann::json::array();
    for (const auto& rf : report.isrp_stage.ranked) {
        nlohmann::json f;
        f["form"] = to_string(rf.tag);
        f["k"] = rf.k;
        f["aic"] = std::isfinite(rf.fit.aic) ? nlohmann::json(rf.fit.aic)
                                             : nlohmann::json(nullptr);
        f["rmse"] = rf.fit.rmse;
        nlohmann::json est = nlohmann::json::array();
        for (long p = 0; p < rf.fit.estimates.size(); ++p)
            est.push_back(rf.fit.estimates(p));
        f["estimates"] = est;
        f["converged"] = rf.fit.converged;
        if (!rf.fit.message.empty()) f["message"] = rf.fit.message;
        stage1.push_back(std::move(f));
    }
    j["isrp_stage"] = std::move(stage1);
    j["no_variation"] = report.isrp_stage.no_variation;
    j["skipped_windows"] = report.isrp_stage.skipped_windows;

    nlohmann::json pts = nlohmann::json::array();
    for (const auto& [t, r] : report.isrp_stage.points)
        pts.push_back({{"t", t}, {"r", r}});
    j["isrp_points"] = std::move(pts);

    nlohmann::json stage2 = nlohmann::json::array();
    for (const auto& rm : report.model_stage) {
        nlohmann::json f;
        f["parent"] = to_string(rm.id.parent);
        f["variation"] = to_string(rm.id.variation);
        f["fit_ok"] = rm.fit_ok;
        f["aic"] = std::isfinite(rm.fit.aic) ? nlohmann::json(rm.fit.aic)
                                             : nlohmann::json(nullptr);
        f["rmse"] = rm.fit.rmse;
        nlohmann::json est = nlohmann::json::object();
        for (size_t p = 0; p < rm.free.size() &&
                           p < static_cast<size_t>(rm.fit.estimates.size());
             ++p)
            est[rm.free[p]] = rm.fit.estimates(static_cast<long>(p));
        f["estimates"] = est;
        f["note"] = rm.note;
        stage2.push_back(std::move(f));
    }
    j["model_stage"] = std::move(stage2);
    j["chosen"] = {{"parent", to_string(report.chosen.parent)},
                   {"variation", to_string(report.chosen.variation)}};
    j["narrative"] = report.narrative;
    return j.dump(2) + "\n";
}

std::string selection_report_text(const SelectionReport& report) {
    std::ostringstream os;
    os << "Rate-form stage (fit to ISRP points)\n";
    os << "  form          k  rmse          aic\n";
    for (const auto& rf : report.isrp_stage.ranked) {
        char line[160];
        std::snprintf(line, sizeof line, "  %-12s %2d  %-12g %-12g\n",
                      to_string(rf.tag).c_str(), rf.k, rf.fit.rmse, rf.fit.aic);
        os << line;
    }
    os << (report.isrp_stage.no_variation
               ? "  verdict: no detectable variation (constant competitive)\n"
               : "  verdict: parameter variation indicated\n");
    os << "\nFull-model stage (fit to mean sizes)\n";
    os << "  model                                    rmse          aic\n";
    for (const auto& rm : report.model_stage) {
        char line[200];
        std::snprintf(line, sizeof line, "  %-40s %-12g %-12g%s\n",
                      (to_string(rm.id.parent) + "/" + to_string(rm.id.variation)).c_str(),
                      rm.fit.rmse, rm.fit.aic, rm.fit_ok ? "" : "  [failed]");
        os << line;
    }
    os << "\nchosen: " << to_string(report.chosen.parent) << "/"
       << to_string(report.chosen.variation) << "\n";
    return os.str();
}

} // namespace growth

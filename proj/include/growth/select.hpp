#pragma once

#include <string>
#include <utility>
#include <vector>

#include "growth/data.hpp"
#include "growth/fit.hpp"
#include "growth/isrp.hpp"
#include "growth/models.hpp"

namespace growth {

// Candidate shapes for the rate-parameter trajectory r(t).  Linear carries a
// free signed slope and splits into the growing/decaying catalog rows when
// mapped to a full model.  GompertzHump is a e^{-bt} t^c.
enum class RateFormTag {
    Constant,
    Linear,
    Power,
    ExpDecay,
    ExpGrowth,
    Hyperbolic,
    Sine,
    Cosine,
    GompertzHump,
};
std::string to_string(RateFormTag tag);
RateFormTag rate_form_from_string(const std::string& s);

struct RateForm {
    RateFormTag tag = RateFormTag::Constant;
};

// Default candidate set; periodic shapes and the hump are opt-in.
std::vector<RateForm> default_forms(bool include_periodic = false,
                                    bool include_hump = false);

struct RankedForm {
    RateFormTag tag = RateFormTag::Constant;
    FitResult fit;
    int k = 0;  // free parameters
};

struct IsrpStage {
    Parent parent = Parent::Logistic;
    std::vector<RankedForm> ranked;                 // ascending AIC
    bool no_variation = false;                      // Constant within dAIC 2
    std::vector<std::pair<double, double>> points;  // (t_j, r_hat) fitted
    long skipped_windows = 0;                       // flagged ISRP intervals
};

struct DetectOptions {
    double theta = 1.0;
    bool early_half_only = false;  // restrict the fit to the first half of intervals
};

// Stage 1: ISRP profile of r under `parent`, each form fitted to the
// (t_j, r_hat_j) points by least squares, ranked by AIC.
IsrpStage detect_variation(const TrajectoryMatrix& data, Parent parent,
                           const std::vector<RateForm>& forms,
                           const DetectOptions& opts = {});

struct RankedModel {
    ModelId id{Parent::Logistic, Variation::ConstantParams};
    FitResult fit;
    bool fit_ok = false;
    std::string note;
    ParameterSet base;               // fixed fields (shape exponents etc.)
    std::vector<std::string> free;   // fitted fields in estimate order
};

struct SelectionReport {
    IsrpStage isrp_stage;
    std::vector<RankedModel> model_stage;  // successful fits first, by AIC
    ModelId chosen{Parent::Logistic, Variation::ConstantParams};
    std::string narrative;  // decision trail, one line per step
};

struct SelectOptions {
    double theta = 1.0;
    double competitive_delta = 10.0;  // stage-2 entry cut vs best stage-1 AIC
};

// Stage 2: map competitive forms to catalog models, fit the full size curves
// to the column means, rank, choose.
SelectionReport select_model(const TrajectoryMatrix& data, Parent parent,
                             const IsrpStage& stage,
                             const SelectOptions& opts = {});

// Centered moving average; output length = input - window + 1.
std::vector<std::pair<double, double>> moving_average(
    const std::vector<std::pair<double, double>>& series, int window);

// rgr_j = (ln y_{j+1} - ln y_j)/h at midpoint times; requires uniform spacing.
std::vector<std::pair<double, double>> rgr_series(
    const std::vector<std::pair<double, double>>& series);

std::string selection_report_json(const SelectionReport& report);
std::string selection_report_text(const SelectionReport& report);

} // namespace growth

// state_tomography.hpp — the 2n²+3n-setting measurement plan and the linear
// inversion of its results into (d_hat, V_hat).
//
// Plan layout per mode count n:
//   1 bare setting
//   2n unit displacements (q and p of each mode)
//   3 P-gate settings per mode for modes 0..n-2, 2 for the last mode
//     (its sigma_qq + sigma_pp comes from the Tr V constraint)
//   4 Q-gate settings per unordered mode pair

#pragma once

#include "pntomo/measurement.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pntomo {

// A gate parameter choice (e^r, phi); r = log(er).
struct GateParams {
    double er = 1.0;
    double phi = 0.0;
};

struct StatePlanOptions {
    // settings (i)-(iii) for intra-mode blocks; first/last two are used for
    // the reduced last mode
    std::vector<GateParams> p_settings{{std::sqrt(2.0), 0.0},
                                       {std::sqrt(3.0), 0.0},
                                       {std::sqrt(2.0), M_PI / 4.0}};
    std::vector<std::size_t> last_mode_p{0, 2};
    // settings (i)-(iv) for inter-mode blocks
    std::vector<GateParams> q_settings{{std::sqrt(2.0), 0.0},
                                       {std::sqrt(3.0), 0.0},
                                       {std::sqrt(2.0), M_PI / 2.0},
                                       {std::sqrt(3.0), M_PI / 2.0}};
    std::string label_prefix;
};

struct StatePlan {
    int n = 0;
    std::vector<MeasurementSetting> settings;
    StatePlanOptions options;
};

// Exactly 2n^2 + 3n settings with distinct labels.
StatePlan make_state_plan(int n, const StatePlanOptions& options = {});

struct StateEstimateOptions {
    bool project_physical = false;
};

struct StateEstimate {
    int n = 0;
    Vec d_hat;
    Mat v_hat;
    double n_bar = 0.0;   // bare mean-photon estimate
    double tr_v = 0.0;    // trace estimate from the displaced settings
    int settings_used = 0;
    double physicality_margin = 0.0;  // min eig of V_hat + (i/2)Omega
    std::map<std::string, double> residuals;  // |predicted - measured| per setting
    bool projected = false;
    Mat v_projected;  // filled when projected
};

using MeasurementResults = std::map<std::string, double>;

MeasurementResults run_plan(const GaussianState& state, const StatePlan& plan,
                            const ShotBudget& budget);

// Inversion sub-steps (exposed for tests).
std::pair<Vec, double> estimate_mean(const StatePlan& plan, const MeasurementResults& results);
double estimate_trace(const Vec& d_hat, double n_bar, int n);
std::vector<Mat> estimate_intra(const StatePlan& plan, const MeasurementResults& results,
                                const Vec& d_hat, double tr_v);
std::map<std::pair<int, int>, Mat> estimate_inter(const StatePlan& plan,
                                                  const MeasurementResults& results,
                                                  const Vec& d_hat,
                                                  const std::vector<Mat>& intra);

StateEstimate invert_state_results(const StatePlan& plan, const MeasurementResults& results,
                                   const StateEstimateOptions& options = {});

StateEstimate tomograph_state(const GaussianState& state, const ShotBudget& budget,
                              const StateEstimateOptions& options = {},
                              const StatePlanOptions& plan_options = {});

// Clips the symplectic eigenvalues of a (symmetrized) covariance estimate at
// 1/2; used by the optional projection post-process.
Mat project_to_physical(const Mat& v);

// Estimator-variance relations for the quadrature estimators built from the
// plan's settings (per-shot variances; divide by M for the sample average).
// axis: 0 = q, 1 = p.
double quadrature_estimator_variance(const GaussianState& state, int mode, int axis);
// Var of the q_i^2 estimator 6[X(sqrt3,0) - 2 X(sqrt2,0) + X_bare] with the
// three averages measured independently.
double quadrature_square_estimator_variance(const GaussianState& state, int mode);

} // namespace pntomo

#include "pntomo/state_tomography.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pntomo {

namespace {

std::string mode_tag(int i) {
    std::ostringstream os;
    os << "m" << i;
    return os.str();
}

// closed-form predictions on raw (d, V) without physicality validation
double predict_setting(const MeasurementSetting& s, const Vec& d, const Mat& v) {
    const int twon = static_cast<int>(d.size());
    const Mat id = Mat::Identity(twon, twon);
    switch (s.kind) {
        case MeasurementSetting::Kind::bare:
            return 0.5 * ((v - 0.5 * id).trace() + d.squaredNorm());
        case MeasurementSetting::Kind::displaced:
            return 0.5 * ((v - 0.5 * id).trace() + (d + s.displacement).squaredNorm());
        case MeasurementSetting::Kind::gated: {
            const Mat& g = s.gate.s;
            return 0.5 * ((g * v * g.transpose() - 0.5 * id).trace() + (g * d).squaredNorm());
        }
    }
    throw std::logic_error("predict_setting: unreachable");
}

double fetch(const MeasurementResults& results, const std::string& label) {
    const auto it = results.find(label);
    if (it == results.end()) {
        throw std::invalid_argument("missing measurement result for setting '" + label + "'");
    }
    return it->second;
}

// (mode, axis, amount) of a single-axis displacement setting
struct AxisDisplacement {
    int mode = -1;
    int axis = 0;
    double amount = 0.0;
};

std::optional<AxisDisplacement> axis_displacement(const MeasurementSetting& s) {
    if (s.kind != MeasurementSetting::Kind::displaced) return std::nullopt;
    AxisDisplacement a;
    int nonzero = 0;
    for (int k = 0; k < s.displacement.size(); ++k) {
        if (s.displacement(k) != 0.0) {
            ++nonzero;
            a.mode = k / 2;
            a.axis = k % 2;
            a.amount = s.displacement(k);
        }
    }
    if (nonzero != 1) return std::nullopt;
    return a;
}

} // namespace

StatePlan make_state_plan(int n, const StatePlanOptions& options) {
    if (n < 1) throw std::invalid_argument("make_state_plan: n must be >= 1");
    if (options.p_settings.size() < 3 || options.q_settings.size() < 4) {
        throw std::invalid_argument("make_state_plan: need >= 3 intra and >= 4 inter gate settings");
    }
    if (options.last_mode_p.size() != 2 || options.last_mode_p[0] >= options.p_settings.size() ||
        options.last_mode_p[1] >= options.p_settings.size()) {
        throw std::invalid_argument("make_state_plan: invalid last-mode setting choice");
    }
    StatePlan plan;
    plan.n = n;
    plan.options = options;
    const std::string& pre = options.label_prefix;

    plan.settings.push_back(MeasurementSetting::make_bare(pre + "bare"));
    for (int i = 0; i < n; ++i) {
        plan.settings.push_back(
            MeasurementSetting::make_displaced_axis(i, 0, 1.0, n, pre + "disp:" + mode_tag(i) + ":q"));
        plan.settings.push_back(
            MeasurementSetting::make_displaced_axis(i, 1, 1.0, n, pre + "disp:" + mode_tag(i) + ":p"));
    }
    for (int i = 0; i < n; ++i) {
        const bool last = (i == n - 1);
        std::vector<std::size_t> chosen;
        if (last) {
            chosen = options.last_mode_p;
        } else {
            chosen = {0, 1, 2};
        }
        for (std::size_t k : chosen) {
            const GateParams& gp = options.p_settings[k];
            std::ostringstream os;
            os << pre << "p:" << mode_tag(i) << ":s" << k;
            plan.settings.push_back(MeasurementSetting::make_gated(
                p_gate(std::log(gp.er), gp.phi), {i}, n, os.str()));
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            for (std::size_t k = 0; k < 4; ++k) {
                const GateParams& gp = options.q_settings[k];
                std::ostringstream os;
                os << pre << "q:" << mode_tag(i) << mode_tag(j) << ":s" << k;
                plan.settings.push_back(MeasurementSetting::make_gated(
                    q_gate(std::log(gp.er), gp.phi), {i, j}, n, os.str()));
            }
        }
    }
    const int expected = 2 * n * n + 3 * n;
    if (static_cast<int>(plan.settings.size()) != expected) {
        throw std::logic_error("make_state_plan: setting count mismatch");
    }
    return plan;
}

MeasurementResults run_plan(const GaussianState& state, const StatePlan& plan,
                            const ShotBudget& budget) {
    if (state.n != plan.n) throw std::invalid_argument("run_plan: dimension mismatch");
    MeasurementResults results;
    for (const auto& s : plan.settings) {
        results[s.label] = measure(state, s, budget);
    }
    return results;
}

std::pair<Vec, double> estimate_mean(const StatePlan& plan, const MeasurementResults& results) {
    double n_bar = 0.0;
    bool have_bare = false;
    Vec d_hat = Vec::Zero(2 * plan.n);
    std::vector<bool> have(static_cast<std::size_t>(2 * plan.n), false);
    for (const auto& s : plan.settings) {
        if (s.kind == MeasurementSetting::Kind::bare) {
            n_bar = fetch(results, s.label);
            have_bare = true;
        }
    }
    if (!have_bare) throw std::invalid_argument("estimate_mean: plan lacks the bare setting");
    for (const auto& s : plan.settings) {
        const auto a = axis_displacement(s);
        if (!a) continue;
        const double m = fetch(results, s.label);
        const int idx = 2 * a->mode + a->axis;
        d_hat(idx) = (m - n_bar - 0.5 * a->amount * a->amount) / a->amount;
        have[static_cast<std::size_t>(idx)] = true;
    }
    for (bool h : have) {
        if (!h) throw std::invalid_argument("estimate_mean: missing displaced settings");
    }
    return {d_hat, n_bar};
}

double estimate_trace(const Vec& d_hat, double n_bar, int n) {
    return 2.0 * n_bar - d_hat.squaredNorm() + n;
}

std::vector<Mat> estimate_intra(const StatePlan& plan, const MeasurementResults& results,
                                const Vec& d_hat, double tr_v) {
    const auto [ignored, n_bar] = estimate_mean(plan, results);
    (void)ignored;
    const int n = plan.n;
    std::vector<Mat> blocks(static_cast<std::size_t>(n));
    double partial_trace = 0.0;
    for (int i = 0; i < n; ++i) {
        const bool last = (i == n - 1);
        std::vector<Eigen::RowVector3d> rows;
        std::vector<double> rhs;
        const Eigen::Vector2d di(d_hat(2 * i), d_hat(2 * i + 1));
        for (const auto& s : plan.settings) {
            if (s.kind != MeasurementSetting::Kind::gated || s.modes != std::vector<int>{i}) continue;
            const Mat k = s.local_gate.transpose() * s.local_gate - Mat::Identity(2, 2);
            rows.emplace_back(k(0, 0), k(1, 1), 2.0 * k(0, 1));
            rhs.push_back(2.0 * (fetch(results, s.label) - n_bar) - di.dot(k * di));
        }
        if (last) {
            rows.emplace_back(1.0, 1.0, 0.0);
            rhs.push_back(tr_v - partial_trace);
        }
        if (rows.size() != 3) {
            throw std::invalid_argument("estimate_intra: need exactly 3 equations per mode");
        }
        Eigen::Matrix3d a;
        Eigen::Vector3d b;
        for (int r = 0; r < 3; ++r) {
            a.row(r) = rows[static_cast<std::size_t>(r)];
            b(r) = rhs[static_cast<std::size_t>(r)];
        }
        Eigen::FullPivLU<Eigen::Matrix3d> lu(a);
        if (!lu.isInvertible()) {
            throw std::runtime_error("estimate_intra: singular intra-mode system");
        }
        const Eigen::Vector3d sol = lu.solve(b);
        Mat block(2, 2);
        block << sol(0), sol(2), sol(2), sol(1);
        blocks[static_cast<std::size_t>(i)] = block;
        partial_trace += sol(0) + sol(1);
    }
    return blocks;
}

std::map<std::pair<int, int>, Mat> estimate_inter(const StatePlan& plan,
                                                  const MeasurementResults& results,
                                                  const Vec& d_hat,
                                                  const std::vector<Mat>& intra) {
    const auto [ignored, n_bar] = estimate_mean(plan, results);
    (void)ignored;
    const int n = plan.n;
    std::map<std::pair<int, int>, Mat> out;
    const Mat id2 = Mat::Identity(2, 2);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            std::vector<Eigen::RowVector4d> rows;
            std::vector<double> rhs;
            Eigen::Vector4d dd;
            dd << d_hat(2 * i), d_hat(2 * i + 1), d_hat(2 * j), d_hat(2 * j + 1);
            for (const auto& s : plan.settings) {
                if (s.kind != MeasurementSetting::Kind::gated ||
                    s.modes != std::vector<int>{i, j}) {
                    continue;
                }
                const Mat qq = s.local_gate.transpose() * s.local_gate;
                const Mat k = qq.block(0, 0, 2, 2);
                const Mat m = qq.block(0, 2, 2, 2);
                const Mat l = qq.block(2, 2, 2, 2);
                rows.emplace_back(m(0, 0), m(0, 1), m(1, 0), m(1, 1));
                double val = fetch(results, s.label) - n_bar;
                val -= 0.5 * ((intra[static_cast<std::size_t>(i)] * (k - id2)).trace() +
                              (intra[static_cast<std::size_t>(j)] * (l - id2)).trace());
                val -= 0.5 * dd.dot((qq - Mat::Identity(4, 4)) * dd);
                rhs.push_back(val);
            }
            if (rows.size() != 4) {
                throw std::invalid_argument("estimate_inter: need exactly 4 equations per pair");
            }
            Eigen::Matrix4d a;
            Eigen::Vector4d b;
            for (int r = 0; r < 4; ++r) {
                a.row(r) = rows[static_cast<std::size_t>(r)];
                b(r) = rhs[static_cast<std::size_t>(r)];
            }
            Eigen::FullPivLU<Eigen::Matrix4d> lu(a);
            if (!lu.isInvertible()) {
                throw std::runtime_error("estimate_inter: singular inter-mode system");
            }
            const Eigen::Vector4d g = lu.solve(b);
            Mat block(2, 2);
            block << g(0), g(1), g(2), g(3);
            out[{i, j}] = block;
        }
    }
    return out;
}

StateEstimate invert_state_results(const StatePlan& plan, const MeasurementResults& results,
                                   const StateEstimateOptions& options) {
    const int n = plan.n;
    StateEstimate est;
    est.n = n;
    auto [d_hat, n_bar] = estimate_mean(plan, results);
    est.d_hat = d_hat;
    est.n_bar = n_bar;
    est.tr_v = estimate_trace(d_hat, n_bar, n);
    const std::vector<Mat> intra = estimate_intra(plan, results, d_hat, est.tr_v);
    const auto inter = estimate_inter(plan, results, d_hat, intra);

    est.v_hat = Mat::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        est.v_hat.block(2 * i, 2 * i, 2, 2) = intra[static_cast<std::size_t>(i)];
    }
    for (const auto& [pair, block] : inter) {
        est.v_hat.block(2 * pair.first, 2 * pair.second, 2, 2) = block;
        est.v_hat.block(2 * pair.second, 2 * pair.first, 2, 2) = block.transpose();
    }
    est.v_hat = (est.v_hat + est.v_hat.transpose()) / 2.0;
    est.settings_used = static_cast<int>(plan.settings.size());
    est.physicality_margin = physicality_margin(est.v_hat);
    for (const auto& s : plan.settings) {
        est.residuals[s.label] = std::abs(predict_setting(s, est.d_hat, est.v_hat) -
                                          fetch(results, s.label));
    }
    if (options.project_physical) {
        est.projected = true;
        est.v_projected = project_to_physical(est.v_hat);
    }
    return est;
}

StateEstimate tomograph_state(const GaussianState& state, const ShotBudget& budget,
                              const StateEstimateOptions& options,
                              const StatePlanOptions& plan_options) {
    const StatePlan plan = make_state_plan(state.n, plan_options);
    return invert_state_results(plan, run_plan(state, plan, budget), options);
}

Mat project_to_physical(const Mat& v) {
    Mat sym = (v + v.transpose()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(sym);
    const double lam_min = es.eigenvalues().minCoeff();
    if (lam_min < 1e-10) {
        sym += (1e-10 - lam_min) * Mat::Identity(sym.rows(), sym.cols());
    }
    const Williamson w = williamson(sym);
    Vec clipped(2 * w.nu.size());
    for (int k = 0; k < w.nu.size(); ++k) {
        const double nu = std::max(w.nu(k), 0.5);
        clipped(2 * k) = nu;
        clipped(2 * k + 1) = nu;
    }
    Mat out = w.s * clipped.asDiagonal() * w.s.transpose();
    return (out + out.transpose()) / 2.0;
}

double quadrature_estimator_variance(const GaussianState& state, int mode, int axis) {
    if (mode < 0 || mode >= state.n) {
        throw std::invalid_argument("quadrature_estimator_variance: mode out of range");
    }
    if (axis != 0 && axis != 1) {
        throw std::invalid_argument("quadrature_estimator_variance: axis must be 0 or 1");
    }
    Vec r = Vec::Zero(2 * state.n);
    r(2 * mode + axis) = 1.0;
    return displaced_photon_variance(state, r) + photon_variance(state);
}

double quadrature_square_estimator_variance(const GaussianState& state, int mode) {
    if (mode < 0 || mode >= state.n) {
        throw std::invalid_argument("quadrature_square_estimator_variance: mode out of range");
    }
    const SymplecticGate g3 = embed(p_gate(std::log(std::sqrt(3.0)), 0.0), {mode}, state.n);
    const SymplecticGate g2 = embed(p_gate(std::log(std::sqrt(2.0)), 0.0), {mode}, state.n);
    return 36.0 * (gated_photon_variance(state, g3) + 4.0 * gated_photon_variance(state, g2) +
                   photon_variance(state));
}

} // namespace pntomo

// measurement.hpp — the experimental primitive: sample averages of the total
// photon number after an optional displacement or gate. Exact backend returns
// closed-form expectations; the finite-shot backend adds Gaussian noise with
// variance Var(N)/M from a stream keyed by (seed, setting label), so results
// are independent of evaluation order.

#pragma once

#include "pntomo/gaussian_state.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pntomo {

struct MeasurementSetting {
    enum class Kind { bare, displaced, gated };

    Kind kind = Kind::bare;
    std::string label;

    // displaced
    Vec displacement;

    // gated: full-register gate for simulation plus the local gate and its
    // target modes for estimator-side inversion
    SymplecticGate gate;
    std::vector<int> modes;
    Mat local_gate;

    static MeasurementSetting make_bare(std::string label = "bare");
    static MeasurementSetting make_displaced(const Vec& r, std::string label);
    // axis: 0 = q, 1 = p
    static MeasurementSetting make_displaced_axis(int mode, int axis, double amount, int n,
                                                  std::string label);
    static MeasurementSetting make_gated(const SymplecticGate& local, const std::vector<int>& modes,
                                         int n, std::string label);
};

struct ShotBudget {
    enum class Mode { exact, shots };
    Mode mode = Mode::exact;
    long long shots = 0;
    std::uint64_t seed = 0;

    static ShotBudget exact_budget();
    static ShotBudget shot_budget(long long m, std::uint64_t seed);
};

// Closed-form expectation of the setting's observable.
double measure_exact(const GaussianState& state, const MeasurementSetting& setting);

// Var(N) of the setting's observable (used for the CLT shot-noise model).
double setting_variance(const GaussianState& state, const MeasurementSetting& setting);

// Estimate of <N> under the setting; exact or exact + noise, per budget.
double measure(const GaussianState& state, const MeasurementSetting& setting,
               const ShotBudget& budget);

} // namespace pntomo

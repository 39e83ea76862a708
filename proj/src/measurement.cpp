#include "pntomo/measurement.hpp"

#include "pntomo/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace pntomo {

MeasurementSetting MeasurementSetting::make_bare(std::string label) {
    MeasurementSetting s;
    s.kind = Kind::bare;
    s.label = std::move(label);
    return s;
}

MeasurementSetting MeasurementSetting::make_displaced(const Vec& r, std::string label) {
    MeasurementSetting s;
    s.kind = Kind::displaced;
    s.displacement = r;
    s.label = std::move(label);
    return s;
}

MeasurementSetting MeasurementSetting::make_displaced_axis(int mode, int axis, double amount,
                                                           int n, std::string label) {
    if (mode < 0 || mode >= n) throw std::invalid_argument("make_displaced_axis: mode out of range");
    if (axis != 0 && axis != 1) throw std::invalid_argument("make_displaced_axis: axis must be 0 or 1");
    Vec r = Vec::Zero(2 * n);
    r(2 * mode + axis) = amount;
    return make_displaced(r, std::move(label));
}

MeasurementSetting MeasurementSetting::make_gated(const SymplecticGate& local,
                                                  const std::vector<int>& modes, int n,
                                                  std::string label) {
    MeasurementSetting s;
    s.kind = Kind::gated;
    s.label = std::move(label);
    s.modes = modes;
    s.local_gate = local.s;
    s.gate = embed(local, modes, n);
    return s;
}

ShotBudget ShotBudget::exact_budget() { return ShotBudget{}; }

ShotBudget ShotBudget::shot_budget(long long m, std::uint64_t seed) {
    if (m < 1) throw std::invalid_argument("ShotBudget: shots must be >= 1");
    ShotBudget b;
    b.mode = Mode::shots;
    b.shots = m;
    b.seed = seed;
    return b;
}

double measure_exact(const GaussianState& state, const MeasurementSetting& setting) {
    switch (setting.kind) {
        case MeasurementSetting::Kind::bare:
            return mean_photon(state);
        case MeasurementSetting::Kind::displaced:
            return displaced_mean_photon(state, setting.displacement);
        case MeasurementSetting::Kind::gated:
            return gated_mean_photon(state, setting.gate);
    }
    throw std::logic_error("measure_exact: unreachable");
}

double setting_variance(const GaussianState& state, const MeasurementSetting& setting) {
    switch (setting.kind) {
        case MeasurementSetting::Kind::bare:
            return photon_variance(state);
        case MeasurementSetting::Kind::displaced:
            return displaced_photon_variance(state, setting.displacement);
        case MeasurementSetting::Kind::gated:
            return gated_photon_variance(state, setting.gate);
    }
    throw std::logic_error("setting_variance: unreachable");
}

double measure(const GaussianState& state, const MeasurementSetting& setting,
               const ShotBudget& budget) {
    const double exact = measure_exact(state, setting);
    if (budget.mode == ShotBudget::Mode::exact) return exact;
    const double var = setting_variance(state, setting);
    SplitMix64 stream(stream_key(budget.seed, setting.label));
    return exact + stream.next_normal() * std::sqrt(var / static_cast<double>(budget.shots));
}

} // namespace pntomo

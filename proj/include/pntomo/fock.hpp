// fock.hpp — brute-force validator for the Gaussian closed forms: states are
// built in a truncated Fock basis via exponentials of quadratic generators,
// and photon-number moments are computed by explicit matrix algebra.
//
// States are represented as weighted ensembles of pure vectors (the thermal
// eigen-decomposition pushed through the circuit unitaries); this is a
// factored density matrix. density_matrix() materializes it for small
// cutoffs. Two-mode vectors use linear index k0 + cutoff*k1.

#pragma once

#include "pntomo/gaussian_state.hpp"

#include <string>
#include <utility>
#include <vector>

namespace pntomo::fock {

CMat ladder(int cutoff);           // annihilation operator
CMat number_operator(int cutoff);  // a† a

// Thermal photon-number weights (N/(N+1))^k / (N+1) for k < cutoff.
// Sums to 1 - (N/(N+1))^cutoff.
Vec thermal_weights(int cutoff, double n_th);

// exp(K) for anti-Hermitian K via the Hermitian eigendecomposition of iK.
// Throws if the result fails the unitarity certificate ||U†U - I||_max <= 1e-10.
CMat expm_antihermitian(const CMat& k);

CMat squeeze_unitary(int cutoff, double r);                    // exp[(r/2)(a² - a†²)]
CMat displacement_unitary(int cutoff, double q0, double p0);   // exp(α a† - α* a), α = (q0+ip0)/√2
CVec rotation_phases(int cutoff, double phi);                  // diag of exp(-i φ a†a)

// exp[θ(a†b - a b†)] is block diagonal over total photon number; blocks[t]
// acts on {|k, t-k>} with k in [max(0,t-cutoff+1), min(t,cutoff-1)].
struct BeamsplitterBlocks {
    int cutoff = 0;
    double theta = 0.0;
    std::vector<CMat> blocks;
};
BeamsplitterBlocks beamsplitter_blocks(int cutoff, double theta);
CMat beamsplitter_unitary_dense(int cutoff, double theta);  // small cutoffs; certificate tests

struct FockState {
    int n_modes = 1;
    int cutoff = 0;
    std::vector<double> weights;
    std::vector<CVec> vectors;

    double trace() const;
    CMat density_matrix() const;
};

// (<N>, Var N) of the total photon number.
std::pair<double, double> fock_mean_and_variance(const FockState& state);

// Squeezed coherent thermal state; keeps all thermal levels below `cutoff`
// and throws if the discarded tail exceeds 1e-8 ("raise cutoff").
FockState build_gaussian_fock(const SqueezedThermalParams& p, int cutoff);

// Two-mode benchmark state (thermal ⊗ thermal -> per-mode squeeze+rotation ->
// balanced beamsplitter -> displacement u on every quadrature).
FockState build_two_mode_fock(const SqueezedThermalParams& p1,
                              const SqueezedThermalParams& p2, double u, int cutoff);

FockState apply_displacement(const FockState& state, const Vec& r);
FockState apply_p_gate(const FockState& state, int mode, double r, double phi);
FockState apply_q_gate(const FockState& state, double r, double phi);  // two-mode, pair (0,1)

// ---- adaptive oracle -------------------------------------------------------

struct OracleSetting {
    enum class Kind { bare, displaced, p_gated, q_gated };
    Kind kind = Kind::bare;
    Vec displacement;  // displaced: length 2n
    int mode = 0;      // p_gated
    double r = 0.0;    // p/q gate squeeze parameter
    double phi = 0.0;  // p/q gate rotation angle
    std::string label;

    static OracleSetting bare_setting();
    static OracleSetting displaced_setting(const Vec& r);
    static OracleSetting p_setting(int mode, double r, double phi);
    static OracleSetting q_setting(double r, double phi);
};

struct OracleValue {
    double mean = 0.0;
    double variance = 0.0;
};

struct OracleRun {
    std::vector<OracleValue> values;
    int cutoff = 0;        // final rung
    double rung_delta = 0; // max |change| between the last two rungs
    bool converged = false;
};

struct OracleOptions {
    int start_cutoff = 0;  // 0 = automatic
    int max_cutoff_single = 512;
    int max_cutoff_two = 176;
    double tol_single = 1e-8;
    double tol_two = 1e-7;
};

// Evaluates all settings at increasing cutoffs (geometric ladder) until every
// tracked mean and variance moves by less than the tolerance between rungs.
OracleRun oracle_run(const SqueezedThermalParams& p,
                     const std::vector<OracleSetting>& settings,
                     const OracleOptions& options = {});
OracleRun oracle_run(const SqueezedThermalParams& p1, const SqueezedThermalParams& p2,
                     double u, const std::vector<OracleSetting>& settings,
                     const OracleOptions& options = {});

} // namespace pntomo::fock

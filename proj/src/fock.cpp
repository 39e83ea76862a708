#include "pntomo/fock.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>

namespace pntomo::fock {

namespace {

using Cx = std::complex<double>;

constexpr double kTraceTol = 1e-8;
// residual budget for dropping low-weight thermal terms, in units of the
// worst-case |contribution| to <N^2>
constexpr double kTermBudget = 3e-9;

Eigen::ArrayXd number_diag(int cutoff) {
    Eigen::ArrayXd nd(cutoff);
    for (int k = 0; k < cutoff; ++k) nd(k) = static_cast<double>(k);
    return nd;
}

} // namespace

CMat ladder(int cutoff) {
    if (cutoff < 1) throw std::invalid_argument("ladder: cutoff must be >= 1");
    CMat a = CMat::Zero(cutoff, cutoff);
    for (int k = 1; k < cutoff; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return a;
}

CMat number_operator(int cutoff) {
    CMat n = CMat::Zero(cutoff, cutoff);
    for (int k = 0; k < cutoff; ++k) n(k, k) = static_cast<double>(k);
    return n;
}

Vec thermal_weights(int cutoff, double n_th) {
    if (cutoff < 1) throw std::invalid_argument("thermal_weights: cutoff must be >= 1");
    if (n_th < 0.0) throw std::invalid_argument("thermal_weights: n_th must be >= 0");
    Vec w = Vec::Zero(cutoff);
    if (n_th == 0.0) {
        w(0) = 1.0;
        return w;
    }
    const double ratio = n_th / (n_th + 1.0);
    double wk = 1.0 / (n_th + 1.0);
    for (int k = 0; k < cutoff; ++k) {
        w(k) = wk;
        wk *= ratio;
    }
    return w;
}

CMat expm_antihermitian(const CMat& k) {
    const CMat h = Cx(0.0, 1.0) * k;
    Eigen::SelfAdjointEigenSolver<CMat> es((h + h.adjoint()) / 2.0);
    const Eigen::ArrayXd lam = es.eigenvalues().array();
    CVec phases(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) phases(i) = std::exp(Cx(0.0, -lam(i)));
    CMat u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    const double resid = (u.adjoint() * u - CMat::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
    if (resid > 1e-10) {
        throw std::runtime_error("expm_antihermitian: unitarity certificate failed");
    }
    return u;
}

CMat squeeze_unitary(int cutoff, double r) {
    const CMat a = ladder(cutoff);
    return expm_antihermitian(0.5 * r * (a * a - (a * a).adjoint()));
}

CMat displacement_unitary(int cutoff, double q0, double p0) {
    const CMat a = ladder(cutoff);
    const Cx alpha = Cx(q0, p0) / std::sqrt(2.0);
    return expm_antihermitian(alpha * a.adjoint() - std::conj(alpha) * a);
}

CVec rotation_phases(int cutoff, double phi) {
    CVec ph(cutoff);
    for (int k = 0; k < cutoff; ++k) ph(k) = std::exp(Cx(0.0, -phi * k));
    return ph;
}

BeamsplitterBlocks beamsplitter_blocks(int cutoff, double theta) {
    BeamsplitterBlocks bs;
    bs.cutoff = cutoff;
    bs.theta = theta;
    bs.blocks.reserve(static_cast<std::size_t>(2 * cutoff - 1));
    for (int t = 0; t <= 2 * (cutoff - 1); ++t) {
        const int lo = std::max(0, t - cutoff + 1);
        const int hi = std::min(t, cutoff - 1);
        const int m = hi - lo + 1;
        CMat k = CMat::Zero(m, m);
        for (int i = 0; i + 1 < m; ++i) {
            const int ka = lo + i;             // mode-A photons
            const int kb = t - ka;             // mode-B photons
            const double c = std::sqrt(static_cast<double>(ka + 1) * static_cast<double>(kb));
            k(i + 1, i) += c;   // a† b
            k(i, i + 1) -= c;   // -a b†
        }
        bs.blocks.push_back(expm_antihermitian(theta * k));
    }
    return bs;
}

CMat beamsplitter_unitary_dense(int cutoff, double theta) {
    const int dim = cutoff * cutoff;
    const CMat a1 = ladder(cutoff);
    const CMat id = CMat::Identity(cutoff, cutoff);
    CMat a = CMat::Zero(dim, dim), b = CMat::Zero(dim, dim);
    // linear index k0 + cutoff*k1; a acts on mode A (k0), b on mode B (k1)
    for (int k1 = 0; k1 < cutoff; ++k1) {
        a.block(k1 * cutoff, k1 * cutoff, cutoff, cutoff) = a1;
    }
    for (int k1 = 1; k1 < cutoff; ++k1) {
        b.block((k1 - 1) * cutoff, k1 * cutoff, cutoff, cutoff) =
            std::sqrt(static_cast<double>(k1)) * id;
    }
    return expm_antihermitian(theta * (a.adjoint() * b - a * b.adjoint()));
}

// ---- internal helpers on two-mode vectors ----------------------------------

namespace {

// value(k0, k1) at linear index k0 + C*k1; mode A = rows of the C x C view
void apply_mode_a(CVec& v, const CMat& g, int cutoff, CMat& tmp) {
    Eigen::Map<CMat> m(v.data(), cutoff, cutoff);
    tmp.noalias() = g * m;
    m = tmp;
}

void apply_mode_b(CVec& v, const CMat& g, int cutoff, CMat& tmp) {
    Eigen::Map<CMat> m(v.data(), cutoff, cutoff);
    tmp.noalias() = m * g.transpose();
    m = tmp;
}

void apply_phases_mode_a(CVec& v, const CVec& ph, int cutoff) {
    for (int k1 = 0; k1 < cutoff; ++k1) {
        v.segment(static_cast<Eigen::Index>(k1) * cutoff, cutoff).array() *= ph.array();
    }
}

void apply_phases_mode_b(CVec& v, const CVec& ph, int cutoff) {
    for (int k1 = 0; k1 < cutoff; ++k1) {
        v.segment(static_cast<Eigen::Index>(k1) * cutoff, cutoff) *= ph(k1);
    }
}

void apply_beamsplitter_vec(CVec& v, const BeamsplitterBlocks& bs) {
    const int cutoff = bs.cutoff;
    CVec gathered(cutoff), transformed(cutoff);
    for (int t = 0; t < static_cast<int>(bs.blocks.size()); ++t) {
        const int lo = std::max(0, t - cutoff + 1);
        const int m = static_cast<int>(bs.blocks[static_cast<std::size_t>(t)].rows());
        for (int i = 0; i < m; ++i) {
            const int k0 = lo + i;
            gathered(i) = v(k0 + static_cast<Eigen::Index>(cutoff) * (t - k0));
        }
        transformed.head(m).noalias() = bs.blocks[static_cast<std::size_t>(t)] * gathered.head(m);
        for (int i = 0; i < m; ++i) {
            const int k0 = lo + i;
            v(k0 + static_cast<Eigen::Index>(cutoff) * (t - k0)) = transformed(i);
        }
    }
}

// prep matrices for the two-mode benchmark pipeline with the beamsplitter
// commuted past the displacement: D(u,u,u,u) B = B D(0,0,√2u,√2u) up to a
// global phase, so mode B's matrix absorbs the displacement.
void benchmark_prep_matrices(const SqueezedThermalParams& p1, const SqueezedThermalParams& p2,
                             double u, int cutoff, CMat& m1, CMat& m2) {
    const CVec ph1 = rotation_phases(cutoff, p1.beta);
    const CVec ph2 = rotation_phases(cutoff, p2.beta);
    m1 = ph1.asDiagonal() * squeeze_unitary(cutoff, p1.s);
    m2 = ph2.asDiagonal() * squeeze_unitary(cutoff, p2.s);
    if (u != 0.0) {
        const double su = std::sqrt(2.0) * u;
        m2 = displacement_unitary(cutoff, su, su) * m2;
    }
}

} // namespace

// ---- FockState --------------------------------------------------------------

double FockState::trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        t += weights[i] * vectors[i].squaredNorm();
    }
    return t;
}

CMat FockState::density_matrix() const {
    const Eigen::Index dim = vectors.empty() ? 0 : vectors.front().size();
    CMat rho = CMat::Zero(dim, dim);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        rho.noalias() += weights[i] * vectors[i] * vectors[i].adjoint();
    }
    return rho;
}

std::pair<double, double> fock_mean_and_variance(const FockState& state) {
    const int c = state.cutoff;
    Eigen::ArrayXd nd;
    if (state.n_modes == 1) {
        nd = number_diag(c);
    } else {
        nd.resize(static_cast<Eigen::Index>(c) * c);
        for (int k1 = 0; k1 < c; ++k1) {
            for (int k0 = 0; k0 < c; ++k0) nd(k0 + static_cast<Eigen::Index>(c) * k1) = k0 + k1;
        }
    }
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < state.weights.size(); ++i) {
        const Eigen::ArrayXd pr = state.vectors[i].array().abs2();
        m1 += state.weights[i] * (pr * nd).sum();
        m2 += state.weights[i] * (pr * nd * nd).sum();
    }
    return {m1, m2 - m1 * m1};
}

FockState build_gaussian_fock(const SqueezedThermalParams& p, int cutoff) {
    if (cutoff < 8) throw std::invalid_argument("build_gaussian_fock: cutoff must be >= 8");
    if (p.n_th < 0.0) throw std::invalid_argument("build_gaussian_fock: n_th must be >= 0");
    const Vec w = thermal_weights(cutoff, p.n_th);
    if (1.0 - w.sum() > kTraceTol) {
        throw std::runtime_error("build_gaussian_fock: truncated trace below 1 - 1e-8; raise cutoff");
    }
    CMat prep = squeeze_unitary(cutoff, p.s);
    prep = rotation_phases(cutoff, p.beta).asDiagonal() * prep;
    if (p.u != 0.0) prep = displacement_unitary(cutoff, p.u, p.u) * prep;

    FockState st;
    st.n_modes = 1;
    st.cutoff = cutoff;
    for (int k = 0; k < cutoff; ++k) {
        if (w(k) <= 0.0) continue;
        st.weights.push_back(w(k));
        st.vectors.push_back(prep.col(k));
    }
    return st;
}

FockState build_two_mode_fock(const SqueezedThermalParams& p1,
                              const SqueezedThermalParams& p2, double u, int cutoff) {
    if (cutoff < 8) throw std::invalid_argument("build_two_mode_fock: cutoff must be >= 8");
    if (p1.n_th < 0.0 || p2.n_th < 0.0) {
        throw std::invalid_argument("build_two_mode_fock: n_th must be >= 0");
    }
    const Vec w1 = thermal_weights(cutoff, p1.n_th);
    const Vec w2 = thermal_weights(cutoff, p2.n_th);
    if (1.0 - w1.sum() * w2.sum() > kTraceTol) {
        throw std::runtime_error("build_two_mode_fock: truncated trace below 1 - 1e-8; raise cutoff");
    }
    CMat m1, m2;
    benchmark_prep_matrices(p1, p2, u, cutoff, m1, m2);
    const BeamsplitterBlocks bs = beamsplitter_blocks(cutoff, M_PI / 4.0);

    FockState st;
    st.n_modes = 2;
    st.cutoff = cutoff;
    for (int k1 = 0; k1 < cutoff; ++k1) {
        if (w1(k1) <= 0.0) continue;
        for (int k2 = 0; k2 < cutoff; ++k2) {
            const double w = w1(k1) * w2(k2);
            if (w < 1e-18) break;
            CVec v(static_cast<Eigen::Index>(cutoff) * cutoff);
            for (int j = 0; j < cutoff; ++j) {
                v.segment(static_cast<Eigen::Index>(j) * cutoff, cutoff) = m2(j, k2) * m1.col(k1);
            }
            apply_beamsplitter_vec(v, bs);
            st.weights.push_back(w);
            st.vectors.push_back(std::move(v));
        }
    }
    return st;
}

FockState apply_displacement(const FockState& state, const Vec& r) {
    if (r.size() != 2 * state.n_modes) {
        throw std::invalid_argument("apply_displacement: dimension mismatch");
    }
    FockState out = state;
    const int c = state.cutoff;
    if (state.n_modes == 1) {
        const CMat d = displacement_unitary(c, r(0), r(1));
        for (auto& v : out.vectors) v = d * v;
    } else {
        CMat tmp(c, c);
        if (r(0) != 0.0 || r(1) != 0.0) {
            const CMat da = displacement_unitary(c, r(0), r(1));
            for (auto& v : out.vectors) apply_mode_a(v, da, c, tmp);
        }
        if (r(2) != 0.0 || r(3) != 0.0) {
            const CMat db = displacement_unitary(c, r(2), r(3));
            for (auto& v : out.vectors) apply_mode_b(v, db, c, tmp);
        }
    }
    return out;
}

FockState apply_p_gate(const FockState& state, int mode, double r, double phi) {
    if (mode < 0 || mode >= state.n_modes) throw std::invalid_argument("apply_p_gate: bad mode");
    FockState out = state;
    const int c = state.cutoff;
    const CVec ph = rotation_phases(c, phi);
    const CMat sq = squeeze_unitary(c, r);
    if (state.n_modes == 1) {
        const CMat g = sq * CMat(ph.asDiagonal());
        for (auto& v : out.vectors) v = g * v;
    } else {
        CMat tmp(c, c);
        for (auto& v : out.vectors) {
            if (mode == 0) {
                apply_phases_mode_a(v, ph, c);
                apply_mode_a(v, sq, c, tmp);
            } else {
                apply_phases_mode_b(v, ph, c);
                apply_mode_b(v, sq, c, tmp);
            }
        }
    }
    return out;
}

FockState apply_q_gate(const FockState& state, double r, double phi) {
    if (state.n_modes != 2) throw std::invalid_argument("apply_q_gate: two-mode states only");
    FockState out = state;
    const int c = state.cutoff;
    const CVec ph = rotation_phases(c, phi);
    const CMat sq = squeeze_unitary(c, r);
    const BeamsplitterBlocks bs = beamsplitter_blocks(c, M_PI / 4.0);
    CMat tmp(c, c);
    for (auto& v : out.vectors) {
        apply_phases_mode_a(v, ph, c);
        apply_beamsplitter_vec(v, bs);
        apply_mode_a(v, sq, c, tmp);
    }
    return out;
}

// ---- adaptive oracle --------------------------------------------------------

OracleSetting OracleSetting::bare_setting() {
    OracleSetting s;
    s.kind = Kind::bare;
    s.label = "bare";
    return s;
}

OracleSetting OracleSetting::displaced_setting(const Vec& r) {
    OracleSetting s;
    s.kind = Kind::displaced;
    s.displacement = r;
    s.label = "displaced";
    return s;
}

OracleSetting OracleSetting::p_setting(int mode, double r, double phi) {
    OracleSetting s;
    s.kind = Kind::p_gated;
    s.mode = mode;
    s.r = r;
    s.phi = phi;
    s.label = "p_gated";
    return s;
}

OracleSetting OracleSetting::q_setting(double r, double phi) {
    OracleSetting s;
    s.kind = Kind::q_gated;
    s.r = r;
    s.phi = phi;
    s.label = "q_gated";
    return s;
}

namespace {

struct TermSelection {
    std::vector<double> weights;
    std::vector<std::pair<int, int>> ks;  // (kA, kB); kB = -1 for single mode
    int max_k = 0;      // max per-mode photon index kept
    int max_total = 0;  // max kA + kB kept
};

double setting_heat(const std::vector<OracleSetting>& settings) {
    double r_max = 0.0;
    for (const auto& s : settings) {
        if (s.kind == OracleSetting::Kind::p_gated || s.kind == OracleSetting::Kind::q_gated) {
            r_max = std::max(r_max, std::abs(s.r));
        }
    }
    return r_max;
}

double setting_disp(const std::vector<OracleSetting>& settings) {
    double d_max = 0.0;
    for (const auto& s : settings) {
        if (s.kind == OracleSetting::Kind::displaced) {
            d_max = std::max(d_max, s.displacement.cwiseAbs().maxCoeff());
        }
    }
    return d_max;
}

// Worst-case |contribution to <N^2>| of a thermal term with total photons t.
double impact_bound(int t, double amp, double shift) {
    const double x = amp * (t + 1) + shift;
    return x * x;
}

TermSelection select_terms_single(const SqueezedThermalParams& p, double gate_r, double disp) {
    const double amp = std::cosh(2.0 * (std::abs(p.s) + gate_r));
    const double shift = 2.0 * (std::abs(p.u) + disp) * (std::abs(p.u) + disp) + 2.0;
    const int kmax = 512;
    const Vec w = thermal_weights(kmax, p.n_th);
    std::vector<std::pair<double, int>> scored;
    for (int k = 0; k < kmax; ++k) {
        if (w(k) < 1e-18) break;
        scored.emplace_back(w(k) * impact_bound(k, amp, shift), k);
    }
    std::sort(scored.begin(), scored.end(), std::greater<>());
    double residual = 0.0;
    for (const auto& [sc, k] : scored) residual += sc;
    TermSelection sel;
    for (const auto& [sc, k] : scored) {
        if (residual < kTermBudget && !sel.weights.empty()) break;
        sel.weights.push_back(w(k));
        sel.ks.emplace_back(k, -1);
        sel.max_k = std::max(sel.max_k, k);
        residual -= sc;
    }
    sel.max_total = sel.max_k;
    return sel;
}

TermSelection select_terms_two(const SqueezedThermalParams& p1, const SqueezedThermalParams& p2,
                               double u, double gate_r, double disp) {
    const double smax = std::max(std::abs(p1.s), std::abs(p2.s));
    const double amp = std::cosh(2.0 * (smax + gate_r));
    const double shift = 2.0 * (std::abs(u) + disp) * (std::abs(u) + disp) + 2.0;
    const int kmax = 128;
    const Vec w1 = thermal_weights(kmax, p1.n_th);
    const Vec w2 = thermal_weights(kmax, p2.n_th);
    std::vector<std::pair<double, std::pair<int, int>>> scored;
    for (int ka = 0; ka < kmax; ++ka) {
        if (w1(ka) < 1e-18) break;
        for (int kb = 0; kb < kmax; ++kb) {
            const double w = w1(ka) * w2(kb);
            if (w < 1e-18) break;
            scored.emplace_back(w * impact_bound(ka + kb, amp, shift), std::make_pair(ka, kb));
        }
    }
    std::sort(scored.begin(), scored.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    double residual = 0.0;
    for (const auto& s : scored) residual += s.first;
    TermSelection sel;
    for (const auto& [sc, kk] : scored) {
        if (residual < kTermBudget && !sel.weights.empty()) break;
        sel.weights.push_back(w1(kk.first) * w2(kk.second));
        sel.ks.push_back(kk);
        sel.max_k = std::max({sel.max_k, kk.first, kk.second});
        sel.max_total = std::max(sel.max_total, kk.first + kk.second);
        residual -= sc;
    }
    return sel;
}

struct MomentAccumulator {
    double m1 = 0.0;
    double m2 = 0.0;

    void add(const CVec& col, double w, const Eigen::ArrayXd& nd) {
        const Eigen::ArrayXd pr = col.array().abs2();
        m1 += w * (pr * nd).sum();
        m2 += w * (pr * nd * nd).sum();
    }

    OracleValue value() const { return {m1, m2 - m1 * m1}; }
};

std::vector<OracleValue> evaluate_single(const SqueezedThermalParams& p,
                                         const std::vector<OracleSetting>& settings,
                                         const TermSelection& sel, int cutoff) {
    const int c = cutoff;
    CMat prep = squeeze_unitary(c, p.s);
    prep = rotation_phases(c, p.beta).asDiagonal() * prep;
    if (p.u != 0.0) prep = displacement_unitary(c, p.u, p.u) * prep;

    const int nterms = static_cast<int>(sel.weights.size());
    CMat psi(c, nterms);
    for (int t = 0; t < nterms; ++t) psi.col(t) = prep.col(sel.ks[static_cast<std::size_t>(t)].first);

    const Eigen::ArrayXd nd = number_diag(c);
    std::vector<MomentAccumulator> acc(settings.size());
    CMat scratch(c, nterms);
    for (std::size_t si = 0; si < settings.size(); ++si) {
        const OracleSetting& s = settings[si];
        const CMat* cols = &psi;
        switch (s.kind) {
            case OracleSetting::Kind::bare:
                break;
            case OracleSetting::Kind::displaced:
                scratch.noalias() = displacement_unitary(c, s.displacement(0), s.displacement(1)) * psi;
                cols = &scratch;
                break;
            case OracleSetting::Kind::p_gated: {
                CMat g = squeeze_unitary(c, s.r) * CMat(rotation_phases(c, s.phi).asDiagonal());
                scratch.noalias() = g * psi;
                cols = &scratch;
                break;
            }
            case OracleSetting::Kind::q_gated:
                throw std::invalid_argument("oracle: q_gated setting on a single-mode state");
        }
        for (int t = 0; t < nterms; ++t) {
            acc[si].add(cols->col(t), sel.weights[static_cast<std::size_t>(t)], nd);
        }
    }
    std::vector<OracleValue> out(settings.size());
    for (std::size_t si = 0; si < settings.size(); ++si) out[si] = acc[si].value();
    return out;
}

class TwoModeEvaluator {
public:
    TwoModeEvaluator(const SqueezedThermalParams& p1, const SqueezedThermalParams& p2,
                     double u, int cutoff)
        : c_(cutoff), bs_(beamsplitter_blocks(cutoff, M_PI / 4.0)) {
        benchmark_prep_matrices(p1, p2, u, cutoff, m1_, m2_);
        nd_.resize(static_cast<Eigen::Index>(c_) * c_);
        for (int k1 = 0; k1 < c_; ++k1) {
            for (int k0 = 0; k0 < c_; ++k0) nd_(k0 + static_cast<Eigen::Index>(c_) * k1) = k0 + k1;
        }
    }

    std::vector<OracleValue> evaluate(const std::vector<OracleSetting>& settings,
                                      const TermSelection& sel) {
        const Eigen::Index dim = static_cast<Eigen::Index>(c_) * c_;
        const int nterms = static_cast<int>(sel.weights.size());
        const int chunk = std::max(8, std::min(96, static_cast<int>(3000000 / dim)));

        std::vector<MomentAccumulator> acc(settings.size());
        CMat psi(dim, chunk), chi(dim, chunk), work(dim, chunk), work2(dim, chunk);
        CMat tmp(c_, c_);
        CMat gather(c_, chunk), transformed(c_, chunk);

        // q_gated settings grouped by rotation angle share a beamsplitter pass
        std::vector<std::pair<double, std::vector<std::size_t>>> q_groups;
        for (std::size_t si = 0; si < settings.size(); ++si) {
            if (settings[si].kind != OracleSetting::Kind::q_gated) continue;
            bool placed = false;
            for (auto& g : q_groups) {
                if (g.first == settings[si].phi) {
                    g.second.push_back(si);
                    placed = true;
                    break;
                }
            }
            if (!placed) q_groups.push_back({settings[si].phi, {si}});
        }

        for (int base = 0; base < nterms; base += chunk) {
            const int tc = std::min(chunk, nterms - base);
            for (int t = 0; t < tc; ++t) {
                const auto [ka, kb] = sel.ks[static_cast<std::size_t>(base + t)];
                for (int j = 0; j < c_; ++j) {
                    psi.col(t).segment(static_cast<Eigen::Index>(j) * c_, c_) = m2_(j, kb) * m1_.col(ka);
                }
            }
            beamsplitter_pass(psi, chi, tc, gather, transformed);

            for (std::size_t si = 0; si < settings.size(); ++si) {
                const OracleSetting& s = settings[si];
                switch (s.kind) {
                    case OracleSetting::Kind::bare:
                        accumulate(acc[si], chi, sel, base, tc);
                        break;
                    case OracleSetting::Kind::displaced: {
                        work.leftCols(tc) = chi.leftCols(tc);
                        if (s.displacement(0) != 0.0 || s.displacement(1) != 0.0) {
                            apply_mode_a_chunk(work, displacement_unitary(c_, s.displacement(0), s.displacement(1)),
                                               tc, work2);
                        }
                        if (s.displacement(2) != 0.0 || s.displacement(3) != 0.0) {
                            const CMat db = displacement_unitary(c_, s.displacement(2), s.displacement(3));
                            for (int t = 0; t < tc; ++t) {
                                CVec col = work.col(t);
                                apply_mode_b(col, db, c_, tmp);
                                work.col(t) = col;
                            }
                        }
                        accumulate(acc[si], work, sel, base, tc);
                        break;
                    }
                    case OracleSetting::Kind::p_gated: {
                        work.leftCols(tc) = chi.leftCols(tc);
                        const CVec ph = rotation_phases(c_, s.phi);
                        const CMat sq = squeeze_unitary(c_, s.r);
                        if (s.mode == 0) {
                            apply_phases_a_chunk(work, ph, tc);
                            apply_mode_a_chunk(work, sq, tc, work2);
                        } else {
                            for (int t = 0; t < tc; ++t) {
                                CVec col = work.col(t);
                                apply_phases_mode_b(col, ph, c_);
                                apply_mode_b(col, sq, c_, tmp);
                                work.col(t) = col;
                            }
                        }
                        accumulate(acc[si], work, sel, base, tc);
                        break;
                    }
                    case OracleSetting::Kind::q_gated:
                        break;  // handled per group below
                }
            }

            for (const auto& [phi, members] : q_groups) {
                work.leftCols(tc) = chi.leftCols(tc);
                if (phi != 0.0) apply_phases_a_chunk(work, rotation_phases(c_, phi), tc);
                beamsplitter_pass(work, work2, tc, gather, transformed);
                for (std::size_t si : members) {
                    work.leftCols(tc) = work2.leftCols(tc);
                    apply_mode_a_chunk(work, squeeze_unitary(c_, settings[si].r), tc, psi);
                    accumulate(acc[si], work, sel, base, tc);
                }
            }
        }

        std::vector<OracleValue> out(settings.size());
        for (std::size_t si = 0; si < settings.size(); ++si) out[si] = acc[si].value();
        return out;
    }

private:
    void accumulate(MomentAccumulator& acc, const CMat& cols, const TermSelection& sel,
                    int base, int tc) const {
        for (int t = 0; t < tc; ++t) {
            acc.add(cols.col(t), sel.weights[static_cast<std::size_t>(base + t)], nd_);
        }
    }

    // one C x C gemm over the whole chunk, viewing columns as stacked mode-A slices
    void apply_mode_a_chunk(CMat& buf, const CMat& g, int tc, CMat& scratch) const {
        const Eigen::Index width = static_cast<Eigen::Index>(c_) * tc;
        Eigen::Map<CMat> view(buf.data(), c_, width);
        Eigen::Map<CMat> out(scratch.data(), c_, width);
        out.noalias() = g * view;
        view = out;
    }

    void apply_phases_a_chunk(CMat& buf, const CVec& ph, int tc) const {
        for (int t = 0; t < tc; ++t) {
            for (int k1 = 0; k1 < c_; ++k1) {
                buf.col(t).segment(static_cast<Eigen::Index>(k1) * c_, c_).array() *= ph.array();
            }
        }
    }

    void beamsplitter_pass(const CMat& in, CMat& out, int tc, CMat& gather, CMat& transformed) const {
        for (int t = 0; t < static_cast<int>(bs_.blocks.size()); ++t) {
            const int lo = std::max(0, t - c_ + 1);
            const int m = static_cast<int>(bs_.blocks[static_cast<std::size_t>(t)].rows());
            for (int col = 0; col < tc; ++col) {
                for (int i = 0; i < m; ++i) {
                    const int k0 = lo + i;
                    gather(i, col) = in(k0 + static_cast<Eigen::Index>(c_) * (t - k0), col);
                }
            }
            transformed.topLeftCorner(m, tc).noalias() =
                bs_.blocks[static_cast<std::size_t>(t)] * gather.topLeftCorner(m, tc);
            for (int col = 0; col < tc; ++col) {
                for (int i = 0; i < m; ++i) {
                    const int k0 = lo + i;
                    out(k0 + static_cast<Eigen::Index>(c_) * (t - k0), col) = transformed(i, col);
                }
            }
        }
    }

    int c_;
    BeamsplitterBlocks bs_;
    CMat m1_, m2_;
    Eigen::ArrayXd nd_;
};

double max_delta(const std::vector<OracleValue>& a, const std::vector<OracleValue>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, std::abs(a[i].mean - b[i].mean));
        d = std::max(d, std::abs(a[i].variance - b[i].variance));
    }
    return d;
}

int next_rung(int c, int cap) { return std::min(cap, std::max(c + 8, (c * 4) / 3)); }

int start_rung(const TermSelection& sel, double smax, double gate_r, int requested, int cap) {
    if (requested > 0) return std::min(requested, cap);
    const double amp = std::cosh(2.0 * (smax + gate_r));
    int c = static_cast<int>(0.7 * (sel.max_total + 6) * amp);
    c = std::max(c, sel.max_k + 4);
    return std::min(std::max(c, 16), cap);
}

} // namespace

OracleRun oracle_run(const SqueezedThermalParams& p,
                     const std::vector<OracleSetting>& settings,
                     const OracleOptions& options) {
    const double gate_r = setting_heat(settings);
    const TermSelection sel = select_terms_single(p, gate_r, setting_disp(settings));
    const int cap = options.max_cutoff_single;
    int c = start_rung(sel, std::abs(p.s), gate_r, options.start_cutoff, cap);

    OracleRun run;
    std::vector<OracleValue> prev;
    for (;;) {
        std::vector<OracleValue> cur = evaluate_single(p, settings, sel, c);
        if (!prev.empty()) {
            run.rung_delta = max_delta(cur, prev);
            if (run.rung_delta <= options.tol_single) {
                run.values = std::move(cur);
                run.cutoff = c;
                run.converged = true;
                return run;
            }
        }
        if (c >= cap) {
            run.values = std::move(cur);
            run.cutoff = c;
            run.converged = false;
            return run;
        }
        prev = std::move(cur);
        c = next_rung(c, cap);
    }
}

OracleRun oracle_run(const SqueezedThermalParams& p1, const SqueezedThermalParams& p2,
                     double u, const std::vector<OracleSetting>& settings,
                     const OracleOptions& options) {
    const double gate_r = setting_heat(settings);
    const TermSelection sel = select_terms_two(p1, p2, u, gate_r, setting_disp(settings));
    const double smax = std::max(std::abs(p1.s), std::abs(p2.s));
    const int cap = options.max_cutoff_two;
    int c = start_rung(sel, smax, gate_r, options.start_cutoff, cap);

    OracleRun run;
    std::vector<OracleValue> prev;
    for (;;) {
        TwoModeEvaluator eval(p1, p2, u, c);
        std::vector<OracleValue> cur = eval.evaluate(settings, sel);
        if (!prev.empty()) {
            run.rung_delta = max_delta(cur, prev);
            if (run.rung_delta <= options.tol_two) {
                run.values = std::move(cur);
                run.cutoff = c;
                run.converged = true;
                return run;
            }
        }
        if (c >= cap) {
            run.values = std::move(cur);
            run.cutoff = c;
            run.converged = false;
            return run;
        }
        prev = std::move(cur);
        c = next_rung(c, cap);
    }
}

} // namespace pntomo::fock

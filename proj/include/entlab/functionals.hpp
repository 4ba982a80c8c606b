#pragma once

#include "entlab/geometry.hpp"

namespace entlab {

/** Ent_p = int |F|^p e^{nF} omega_X^n. */
inline double entropy_p(const SolutionState& st, double p) {
    if (!(p > 0)) throw std::invalid_argument("entropy_p: need p > 0");
    return st.integrate(Measure::EnFOmegaXn,
                        [&](std::size_t q) { return std::pow(std::abs(st.F.v[q]), p); });
}

/** E = (c^n / V_omega) int (-phi) f(lambda[h_phi])^n omega_X^n, with the
 * equation substituted for f^n. Nonnegative since sup phi = 0. */
inline double energy(const SolutionState& st) {
    if (st.phi.max() > 1e-12)
        throw std::invalid_argument("energy: phi must be sup-normalized to 0");
    double integral =
        st.integrate(Measure::EnFOmegaXn, [&](std::size_t q) { return -st.phi.v[q]; });
    return st.c_ratio() * st.c_pow_n() * integral;
}

enum class LevelDirection { Sublevel, Superlevel };

/** Level-set masses: phi(s) over Omega_s = {phi < -s} (or U_s = {u > s}),
 * and the weighted masses A_s with exponent a, scaled by c^n/V_omega. */
struct SublevelProfile {
    std::vector<double> s_values;
    std::vector<double> phi_of_s;
    std::vector<double> A_of_s;
    LevelDirection direction = LevelDirection::Sublevel;
    double a = 1.0;
};

inline SublevelProfile level_profile(const SolutionState& st, const ScalarField& height,
                                     double a, std::vector<double> s_values,
                                     LevelDirection dir) {
    if (!(a > 0)) throw std::invalid_argument("level_profile: need a > 0");
    std::sort(s_values.begin(), s_values.end());
    SublevelProfile prof;
    prof.s_values = s_values;
    prof.direction = dir;
    prof.a = a;
    double cr = st.c_ratio();
    for (double s : s_values) {
        double mass = st.integrate(Measure::EnFOmegaXn, [&](std::size_t q) {
            return height.v[q] > s ? 1.0 : 0.0;
        });
        double wmass = st.integrate(Measure::EnFOmegaXn, [&](std::size_t q) {
            double d = height.v[q] - s;
            return d > 0 ? std::pow(d, a) : 0.0;
        });
        prof.phi_of_s.push_back(mass);
        prof.A_of_s.push_back(cr * wmass);
    }
    return prof;
}

/** Sublevel masses of the state's own potential: Omega_s = {phi < -s}. */
inline SublevelProfile sublevel_profile(const SolutionState& st, double a,
                                        const std::vector<double>& s_values) {
    ScalarField neg(st.grid);
    for (std::size_t q = 0; q < neg.size(); ++q) neg.v[q] = -st.phi.v[q];
    return level_profile(st, neg, a, s_values, LevelDirection::Sublevel);
}

/** Super-level masses of a given function u: U_s = {u > s}. */
inline SublevelProfile superlevel_profile(const SolutionState& st, const ScalarField& u, double a,
                                          const std::vector<double>& s_values) {
    return level_profile(st, u, a, s_values, LevelDirection::Superlevel);
}

/** int exp(alpha (-phi)^qe) omega_X^n, accumulated in log space so large
 * exponents report an overflow flag instead of crashing. */
struct LogIntegral {
    double log_value = -std::numeric_limits<double>::infinity();
    bool overflows_double = false;
    double value() const { return std::exp(log_value); }
};

inline LogIntegral trudinger_integral(const SolutionState& st, double alpha, double qe) {
    if (!(alpha > 0) || !(qe > 0))
        throw std::invalid_argument("trudinger_integral: need alpha > 0 and q > 0");
    const double cell = st.grid.cell_volume();
    const std::size_t P = st.grid.point_count();
    std::vector<double> terms(P);
    double M = -std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < P; ++q) {
        double e = alpha * std::pow(std::max(0.0, -st.phi.v[q]), qe);
        terms[q] = e + std::log(st.det_gx_at(q) * cell);
        M = std::max(M, terms[q]);
    }
    KahanSum acc;
    for (std::size_t q = 0; q < P; ++q) acc.add(std::exp(terms[q] - M));
    LogIntegral out;
    out.log_value = M + std::log(acc.value());
    out.overflows_double = out.log_value > 709.0;
    return out;
}

/** Green's-formula L^1 bound: any admissible sup-normalized potential has
 * Delta_{omega_X} phi >= -n kappa, so int |phi| omega_X^n <= C_0 with
 * C_0 = n kappa max_x int |G(x, .)| omega_X^n. Flat constant omega_X only. */
struct GreenBound {
    double C0 = 0.0;
    double green_l1 = 0.0;   // max_x int |G(x,.)| omega_X^n
    double green_sup = 0.0;  // sup of the kernel (the tight-bound side)
};

inline GreenBound l1_green_bound(const Hermitian& omega_x, double kappa, const TorusGrid& grid,
                                 SpectralEngine* eng = nullptr) {
    std::optional<SpectralEngine> own;
    if (!eng) {
        own.emplace(grid);
        eng = &*own;
    }
    double det = omega_x.determinant().real();
    if (!(det > 0)) throw std::invalid_argument("l1_green_bound: omega_X must be positive definite");
    Hermitian W = omega_x.inverse();
    // Engine kernel normalizes by the coordinate volume; the omega_X^n
    // measure carries det(g_X), which cancels in the L1 norm.
    ScalarField G = eng->green_function(W);
    const double cell = grid.cell_volume();
    KahanSum l1;
    double sup = -std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < G.size(); ++q) {
        l1.add(std::abs(G.v[q]) * cell);
        sup = std::max(sup, G.v[q] / det);
    }
    GreenBound out;
    out.green_l1 = l1.value();
    out.green_sup = sup;
    out.C0 = grid.n * kappa * out.green_l1;
    return out;
}

}  // namespace entlab

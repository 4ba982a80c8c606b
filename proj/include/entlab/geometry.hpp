#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <optional>
#include <random>
#include <sstream>

#include "entlab/fft.hpp"
#include "entlab/grid.hpp"
#include "entlab/operators.hpp"

namespace entlab {

// ---------------------------------------------------------------------------
// Per-point generalized Hermitian eigenvalues (Cholesky reduction).

/** Eigenvalues of the pencil (A, B), B Hermitian positive definite, written
 * ascending into out[0..n). Returns false when B fails its Cholesky. */
inline bool pencil_eigenvalues_block(const cplx* A, const cplx* B, int n, double* out) {
    if (n == 1) {
        double b = B[0].real();
        if (!(b > 0.0)) return false;
        out[0] = A[0].real() / b;
        return true;
    }
    if (n == 2) {
        // Hand-rolled Cholesky reduction; this sits inside admissibility
        // bisection loops, so avoid heap traffic.
        double b00 = B[0].real(), b11 = B[3].real();
        if (!(b00 > 0.0)) return false;
        double a = std::sqrt(b00);
        cplx c = B[1] / a;
        double d2 = b11 - std::norm(c);
        if (!(d2 > 0.0)) return false;
        double d = std::sqrt(d2);
        cplx A00 = A[0], A10 = A[1], A01 = A[2], A11 = A[3];
        cplx M00 = A00 / a, M01 = A01 / a;
        cplx M10 = (A10 - c * A00 / a) / d;
        cplx M11 = (A11 - c * A01 / a) / d;
        cplx cc = std::conj(c);
        double C00 = (M00 / a).real();
        cplx C01 = -M00 * cc / (a * d) + M01 / d;
        double C11 = (-M10 * cc / (a * d) + M11 / d).real();
        double m = 0.5 * (C00 + C11);
        double h = 0.5 * (C00 - C11);
        double s = std::sqrt(h * h + std::norm(C01));
        out[0] = m - s;
        out[1] = m + s;
        return true;
    }
    Eigen::Map<const Hermitian> Am(A, n, n), Bm(B, n, n);
    Eigen::LLT<Hermitian> llt(Bm);
    if (llt.info() != Eigen::Success) return false;
    Hermitian L = llt.matrixL();
    Hermitian C = L.triangularView<Eigen::Lower>().solve(Hermitian(Am));
    C = L.triangularView<Eigen::Lower>().solve(Hermitian(C.adjoint())).adjoint();
    Eigen::SelfAdjointEigenSolver<Hermitian> es(C, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) return false;
    for (int j = 0; j < n; ++j) out[j] = es.eigenvalues()[j];
    return true;
}

/** Point-major eigenvalue field of the relative endomorphism. */
struct EigenField {
    TorusGrid grid;
    int n = 0;
    std::vector<double> lam;  // point-major, ascending per point

    const double* at(std::size_t q) const { return lam.data() + q * n; }
    double* at(std::size_t q) { return lam.data() + q * n; }
};

/** Eigenvalues lambda[h] of h = omega_X^{-1} omega_phi at every grid point;
 * real because they coincide with the Hermitian reduction's spectrum. */
inline EigenField relative_eigenvalues(const HermitianField& omega_x,
                                       const HermitianField& omega_phi) {
    const TorusGrid& g = omega_phi.grid();
    const int n = omega_phi.dim();
    if (omega_x.dim() != n) throw std::invalid_argument("relative_eigenvalues: dimension mismatch");
    EigenField out{g, n, std::vector<double>(g.point_count() * n)};
    std::atomic<long long> bad{-1};
    parallel_for(g.point_count(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t q = lo; q < hi; ++q) {
            if (!pencil_eigenvalues_block(omega_phi.block(q), omega_x.block(q), n, out.at(q))) {
                long long expect = -1;
                bad.compare_exchange_strong(expect, static_cast<long long>(q));
                return;
            }
        }
    });
    if (bad.load() >= 0) {
        std::ostringstream msg;
        msg << "relative_eigenvalues: omega_X not positive definite at point " << bad.load();
        throw std::domain_error(msg.str());
    }
    return out;
}

inline double max_generalized_eigenvalue(const HermitianField& A, const HermitianField& B) {
    EigenField ev = relative_eigenvalues(B, A);
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < ev.grid.point_count(); ++q) m = std::max(m, ev.at(q)[ev.n - 1]);
    return m;
}

/** omega = chi + t*omega_X with the smallest kappa such that
 * omega <= kappa*omega_X pointwise. */
inline std::pair<HermitianField, double> degenerate_background(const HermitianField& chi, double t,
                                                               const HermitianField& omega_x) {
    if (!(t > 0.0)) throw std::invalid_argument("degenerate_background: t must be positive");
    // chi must be positive semidefinite.
    const int n = chi.dim();
    std::size_t pts = chi.is_constant() ? 1 : chi.grid().point_count();
    for (std::size_t q = 0; q < pts; ++q) {
        Eigen::SelfAdjointEigenSolver<Hermitian> es(chi.at(q), Eigen::EigenvaluesOnly);
        double scale = std::max(1.0, chi.at(q).cwiseAbs().maxCoeff());
        if (es.eigenvalues()[0] < -1e-12 * scale)
            throw std::domain_error("degenerate_background: chi not positive semidefinite");
    }
    (void)n;
    HermitianField omega = chi + t * omega_x;
    double kappa = max_generalized_eigenvalue(omega, omega_x);
    return {omega, kappa};
}

// ---------------------------------------------------------------------------
// Solution states.

enum class Measure { OmegaXn, EnFOmegaXn, OmegaPhiN };

/** A potential with its induced eigenvalue field, density F, and the
 * normalization constants of the equation f(lambda[h_phi]) = c e^F. */
struct SolutionState {
    TorusGrid grid;
    OperatorSpec op;
    ScalarField phi;  // sup-normalized to 0
    ScalarField F;
    EigenField lambda;
    HermitianField omega;    // background form of the equation
    HermitianField omega_x;  // reference metric
    std::vector<double> det_gx;  // size 1 when omega_x is constant
    double c_omega = 1.0;
    double V_omega = 1.0;
    double V_X = 1.0;
    double kappa = 1.0;

    double c_pow_n() const { return std::pow(c_omega, op.n); }
    double c_ratio() const { return c_pow_n() / V_omega; }

    double det_gx_at(std::size_t q) const { return det_gx.size() == 1 ? det_gx[0] : det_gx[q]; }
    double det_h_at(std::size_t q) const {
        const double* l = lambda.at(q);
        double p = 1.0;
        for (int j = 0; j < op.n; ++j) p *= l[j];
        return p;
    }
    double weight(Measure m, std::size_t q, double cell) const {
        switch (m) {
            case Measure::OmegaXn:
                return det_gx_at(q) * cell;
            case Measure::EnFOmegaXn:
                return std::exp(op.n * F.v[q]) * det_gx_at(q) * cell;
            case Measure::OmegaPhiN:
                return det_h_at(q) * det_gx_at(q) * cell;
        }
        return 0.0;
    }

    /** Compensated quadrature of f(q) against the chosen measure. */
    template <class Fn>
    double integrate(Measure m, Fn&& f) const {
        const double cell = grid.cell_volume();
        KahanSum acc;
        const std::size_t P = grid.point_count();
        for (std::size_t q = 0; q < P; ++q) {
            double term = f(q) * weight(m, q, cell);
            if (!std::isfinite(term)) throw std::domain_error("integrate: non-finite integrand");
            acc.add(term);
        }
        return acc.value();
    }
    double total_mass(Measure m) const {
        return integrate(m, [](std::size_t) { return 1.0; });
    }
};

/** Induces the density F and normalization constants from a potential.
 * phi is sup-normalized (a constant shift; the Hessian is unchanged). */
inline SolutionState induce_density(const OperatorSpec& op, const ScalarField& phi_in,
                                    const HermitianField& omega, const HermitianField& omega_x,
                                    SpectralEngine* eng = nullptr) {
    const TorusGrid& g = phi_in.grid;
    std::optional<SpectralEngine> own;
    if (!eng) {
        own.emplace(g);
        eng = &*own;
    }
    SolutionState st;
    st.grid = g;
    st.op = op;
    st.phi = phi_in;
    st.phi.sup_normalize();
    st.omega = omega;
    st.omega_x = omega_x;

    HermitianField omega_phi = omega + eng->complex_hessian(st.phi);
    st.lambda = relative_eigenvalues(omega_x, omega_phi);

    const std::size_t P = g.point_count();
    if (omega_x.is_constant()) {
        st.det_gx.assign(1, omega_x.constant_matrix().determinant().real());
    } else {
        st.det_gx.resize(P);
        for (std::size_t q = 0; q < P; ++q) st.det_gx[q] = omega_x.at(q).determinant().real();
    }

    // Cone membership everywhere, reporting offenders.
    std::vector<std::size_t> offenders;
    EigenvalueVector lam(op.n);
    for (std::size_t q = 0; q < P; ++q) {
        for (int j = 0; j < op.n; ++j) lam[j] = st.lambda.at(q)[j];
        if (!cone_contains(op.cone, lam)) {
            offenders.push_back(q);
            if (offenders.size() >= 8) break;
        }
    }
    if (!offenders.empty()) {
        std::ostringstream msg;
        msg << "induce_density: eigenvalues leave the cone at " << offenders.size()
            << "+ points, first:";
        for (std::size_t q : offenders) msg << " " << q;
        throw std::domain_error(msg.str());
    }

    const double cell = g.cell_volume();
    ScalarField logf(g);
    {
        KahanSum vx, fn;
        for (std::size_t q = 0; q < P; ++q) {
            for (int j = 0; j < op.n; ++j) lam[j] = st.lambda.at(q)[j];
            double f = f_eval(op, lam);
            if (!(f > 0.0)) throw std::domain_error("induce_density: f <= 0 at a grid point");
            logf.v[q] = std::log(f);
            double w = st.det_gx_at(q) * cell;
            vx.add(w);
            fn.add(std::pow(f, op.n) * w);
        }
        st.V_X = vx.value();
        st.c_omega = std::pow(fn.value() / st.V_X, 1.0 / op.n);
    }
    st.F = ScalarField(g);
    double logc = std::log(st.c_omega);
    for (std::size_t q = 0; q < P; ++q) st.F.v[q] = logf.v[q] - logc;

    {
        KahanSum vw;
        for (std::size_t q = 0; q < P; ++q)
            vw.add(omega.at(q).determinant().real() * cell);
        st.V_omega = vw.value();
    }
    st.kappa = max_generalized_eigenvalue(omega, omega_x);
    return st;
}

// ---------------------------------------------------------------------------
// Admissible potential sampling.

/** Margin-aware cone test on a raw eigenvalue block (no allocation). */
inline bool cone_margin_ok_raw(const ConeSpec& cone, const double* lam, double margin) {
    const int n = cone.n;
    double norm2 = 0.0;
    for (int j = 0; j < n; ++j) norm2 += lam[j] * lam[j];
    double scale = std::max(std::sqrt(norm2), 1e-300);
    if (cone.kind == ConeKind::GammaK) {
        double e[5] = {1.0, 0.0, 0.0, 0.0, 0.0};
        const int k = cone.param;
        for (int i = 0; i < n; ++i)
            for (int j = std::min(k, i + 1); j >= 1; --j) e[j] += e[j - 1] * lam[i];
        double sc = 1.0;
        for (int j = 1; j <= k; ++j) {
            sc *= scale;
            if (!(e[j] >= margin * sc)) return false;
        }
        return true;
    }
    for (const auto& I : multi_indices(n, cone.param)) {
        double s = 0.0;
        for (int i : I) s += lam[i];
        if (!(s >= margin * scale)) return false;
    }
    return true;
}

/** Random real trigonometric polynomial, rescaled by bisection to the
 * largest multiple of the requested amplitude that keeps lambda[h_phi]
 * strictly inside the cone (margin 1e-6), then sup-normalized to 0.
 * Deterministic for a fixed seed. */
inline ScalarField sample_admissible_potential(const OperatorSpec& op, const HermitianField& omega,
                                               const HermitianField& omega_x, const TorusGrid& g,
                                               double amplitude, int modes, unsigned seed,
                                               SpectralEngine* eng = nullptr) {
    if (amplitude < 0) throw std::invalid_argument("sample_admissible_potential: amplitude < 0");
    ScalarField phi(g);
    if (amplitude == 0.0 || modes <= 0) return phi;

    std::optional<SpectralEngine> own;
    if (!eng) {
        own.emplace(g);
        eng = &*own;
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * 3.14159265358979323846);
    const int mmax = std::min(3, g.N / 2 - 1);
    std::uniform_int_distribution<int> freq(-mmax, mmax);
    const int axes = g.axes();
    const std::size_t P = g.point_count();

    std::vector<std::array<int, 8>> ms(static_cast<std::size_t>(modes));
    std::vector<double> amp(static_cast<std::size_t>(modes)), ph(static_cast<std::size_t>(modes));
    for (int i = 0; i < modes; ++i) {
        bool zero = true;
        while (zero) {
            for (int a = 0; a < axes; ++a) {
                ms[i][a] = freq(rng);
                if (ms[i][a] != 0) zero = false;
            }
        }
        amp[i] = gauss(rng);
        ph[i] = phase(rng);
    }
    const double two_pi = 2.0 * 3.14159265358979323846;
    parallel_for(P, [&](std::size_t lo, std::size_t hi) {
        std::array<double, 8> xy{};
        for (std::size_t q = lo; q < hi; ++q) {
            g.position(q, xy.data());
            double s = 0.0;
            for (int i = 0; i < modes; ++i) {
                double arg = ph[i];
                for (int a = 0; a < axes; ++a) arg += two_pi * ms[i][a] * xy[a];
                s += amp[i] * std::cos(arg);
            }
            phi.v[q] = s;
        }
    });
    double sup = phi.sup_abs();
    if (sup == 0.0) return ScalarField(g);
    for (double& x : phi.v) x *= amplitude / sup;

    HermitianField H = eng->complex_hessian(phi);
    const int n = g.n;
    auto admissible = [&](double mu) {
        std::atomic<bool> ok{true};
        parallel_for(P, [&](std::size_t lo, std::size_t hi) {
            double lam[4];
            cplx A[16];
            for (std::size_t q = lo; q < hi && ok.load(std::memory_order_relaxed); ++q) {
                const cplx* W = omega.block(q);
                const cplx* Hq = H.block(q);
                for (int e = 0; e < n * n; ++e) A[e] = W[e] + mu * Hq[e];
                if (!pencil_eigenvalues_block(A, omega_x.block(q), n, lam) ||
                    !cone_margin_ok_raw(op.cone, lam, 1e-6)) {
                    ok.store(false, std::memory_order_relaxed);
                    return;
                }
            }
        });
        return ok.load();
    };

    double mu = 1.0;
    if (!admissible(1.0)) {
        if (!admissible(0.0))
            throw std::runtime_error("sample_admissible_potential: background not admissible");
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 50; ++it) {
            double mid = 0.5 * (lo + hi);
            (admissible(mid) ? lo : hi) = mid;
        }
        mu = lo;
    }
    for (double& x : phi.v) x *= mu;
    phi.sup_normalize();
    return phi;
}

}  // namespace entlab

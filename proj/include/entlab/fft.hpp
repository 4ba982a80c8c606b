#pragma once

#include <fftw3.h>

#include <mutex>
#include <vector>

#include "entlab/grid.hpp"

namespace entlab {

namespace detail {
/** FFTW plan creation mutates global state; execution does not. */
inline std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

/** Spectral calculus on one torus grid: Fourier coefficients, mixed complex
 * second derivatives, constant-coefficient Kahler Laplacians and their
 * inverses, and the Green's function.
 *
 * Derivative convention: d/dz = (d/dx - i d/dy)/2, so the symbol of
 * d/dz_j on exp(2 pi i m.xi) is pi*(i m^x_j + m^y_j) and the symbol of
 * d/dzbar_k is pi*(i m^x_k - m^y_k). Modes with any axis at the Nyquist
 * frequency are dropped from derivatives; inputs are expected band-limited
 * below N/2, where the calculus is exact.
 *
 * An engine owns its buffers and is not safe to share across threads;
 * create one per worker. Plans use FFTW_ESTIMATE so results are bitwise
 * reproducible run to run. */
class SpectralEngine {
  public:
    explicit SpectralEngine(const TorusGrid& g) : grid_(g), pts_(g.point_count()) {
        buf_in_.resize(pts_);
        buf_out_.resize(pts_);
        std::vector<int> dims(static_cast<std::size_t>(g.axes()), g.N);
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        fwd_ = fftw_plan_dft(g.axes(), dims.data(),
                             reinterpret_cast<fftw_complex*>(buf_in_.data()),
                             reinterpret_cast<fftw_complex*>(buf_out_.data()),
                             FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft(g.axes(), dims.data(),
                             reinterpret_cast<fftw_complex*>(buf_in_.data()),
                             reinterpret_cast<fftw_complex*>(buf_out_.data()),
                             FFTW_BACKWARD, FFTW_ESTIMATE);
        if (!fwd_ || !bwd_) throw std::runtime_error("SpectralEngine: FFTW plan creation failed");
    }
    ~SpectralEngine() {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
    }
    SpectralEngine(const SpectralEngine&) = delete;
    SpectralEngine& operator=(const SpectralEngine&) = delete;

    const TorusGrid& grid() const { return grid_; }

    /** True Fourier coefficients phi_hat(m), m in the centered index set. */
    std::vector<cplx> to_spectrum(const ScalarField& f) {
        require_grid(f.grid);
        for (std::size_t q = 0; q < pts_; ++q) buf_in_[q] = f.v[q];
        fftw_execute(fwd_);
        std::vector<cplx> spec(pts_);
        double inv = 1.0 / static_cast<double>(pts_);
        for (std::size_t q = 0; q < pts_; ++q) spec[q] = buf_out_[q] * inv;
        return spec;
    }

    ScalarField from_spectrum_real(const std::vector<cplx>& spec) {
        std::copy(spec.begin(), spec.end(), buf_in_.begin());
        fftw_execute(bwd_);
        ScalarField f(grid_);
        for (std::size_t q = 0; q < pts_; ++q) f.v[q] = buf_out_[q].real();
        return f;
    }

    /** Mixed second derivatives d^2 phi / dz_j dzbar_k as a Hermitian field.
     * Exact (to roundoff) for trigonometric polynomials below Nyquist. */
    HermitianField complex_hessian(const ScalarField& phi) {
        require_grid(phi.grid);
        if (!phi.all_finite()) throw std::invalid_argument("complex_hessian: non-finite input");
        const int n = grid_.n;
        std::vector<cplx> spec = to_spectrum(phi);
        HermitianField H = HermitianField::varying(grid_);
        std::vector<cplx> tmp(pts_);
        std::array<int, 8> idx{};
        for (int j = 0; j < n; ++j) {
            for (int k = j; k < n; ++k) {
                for (std::size_t q = 0; q < pts_; ++q) {
                    grid_.coords(q, idx.data());
                    cplx zj, xk;
                    tmp[q] = symbols(idx.data(), j, k, zj, xk) ? zj * xk * spec[q] : cplx(0, 0);
                }
                std::copy(tmp.begin(), tmp.end(), buf_in_.begin());
                fftw_execute(bwd_);
                for (std::size_t q = 0; q < pts_; ++q) {
                    cplx v = buf_out_[q];
                    if (j == k) v = cplx(v.real(), 0.0);
                    cplx* blk = H.mutable_block(q);
                    blk[k * n + j] = v;             // (j,k), column-major
                    blk[j * n + k] = std::conj(v);  // (k,j)
                }
            }
        }
        return H;
    }

    /** Kahler Laplacian tr(W^T . Hess) for a constant Hermitian inverse
     * metric W (W = g^{-1} gives the Laplacian of the metric g). */
    ScalarField laplacian(const ScalarField& u, const Hermitian& W) {
        std::vector<cplx> spec = to_spectrum(u);
        apply_symbol(spec, W, false);
        return from_spectrum_real(spec);
    }

    /** Mean-zero solution of laplacian(u, W) = rhs (rhs mean discarded). */
    ScalarField inverse_laplacian(const ScalarField& rhs, const Hermitian& W) {
        std::vector<cplx> spec = to_spectrum(rhs);
        apply_symbol(spec, W, true);
        return from_spectrum_real(spec);
    }

    /** Green's function of the W-Laplacian: the mean-zero kernel G with
     * u(x) = mean(u) + sum_y G(x-y) laplacian(u)(y) cell for grid fields. */
    ScalarField green_function(const Hermitian& W) {
        std::vector<cplx> spec(pts_, cplx(0, 0));
        std::array<int, 8> idx{};
        for (std::size_t q = 0; q < pts_; ++q) {
            grid_.coords(q, idx.data());
            double s = laplace_symbol(idx.data(), W);
            spec[q] = (s == 0.0) ? cplx(0, 0) : cplx(1.0 / (s * grid_.domain_volume), 0.0);
        }
        return from_spectrum_real(spec);
    }

  private:
    void require_grid(const TorusGrid& g) const {
        if (!(g == grid_)) throw std::invalid_argument("SpectralEngine: field from a different grid");
    }

    /** Derivative symbols at integer frequency vector; false at Nyquist. */
    bool symbols(const int* idx, int j, int k, cplx& dz_j, cplx& dzbar_k) const {
        const int n = grid_.n;
        const double pi = 3.14159265358979323846;
        int mxj = grid_.frequency(idx[j]);
        int myj = grid_.frequency(idx[n + j]);
        int mxk = grid_.frequency(idx[k]);
        int myk = grid_.frequency(idx[n + k]);
        if (std::abs(mxj) == grid_.N / 2 || std::abs(myj) == grid_.N / 2 ||
            std::abs(mxk) == grid_.N / 2 || std::abs(myk) == grid_.N / 2)
            return false;
        dz_j = pi * cplx(myj, mxj);
        dzbar_k = pi * cplx(-myk, mxk);
        return true;
    }

    double laplace_symbol(const int* idx, const Hermitian& W) const {
        const int n = grid_.n;
        cplx acc(0, 0);
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                cplx zj, xk;
                if (!symbols(idx, j, k, zj, xk)) return 0.0;
                acc += W(k, j) * zj * xk;
            }
        }
        return acc.real();
    }

    void apply_symbol(std::vector<cplx>& spec, const Hermitian& W, bool invert) const {
        std::array<int, 8> idx{};
        for (std::size_t q = 0; q < pts_; ++q) {
            grid_.coords(q, idx.data());
            double s = laplace_symbol(idx.data(), W);
            if (invert)
                spec[q] = (s == 0.0) ? cplx(0, 0) : spec[q] / s;
            else
                spec[q] *= s;
        }
    }

    TorusGrid grid_;
    std::size_t pts_;
    std::vector<cplx> buf_in_, buf_out_;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

}  // namespace entlab

#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "entlab/numeric.hpp"

namespace entlab {

using cplx = std::complex<double>;
using Hermitian = Eigen::MatrixXcd;

/** Uniform periodic grid on the flat complex torus C^n / (Z^n + i Z^n),
 * fundamental domain [0,1)^{2n} scaled to the given volume. Real axes are
 * ordered (x_1..x_n, y_1..y_n), row-major with the last axis fastest. */
struct TorusGrid {
    int n = 2;
    int N = 16;
    double domain_volume = 1.0;

    TorusGrid() = default;
    TorusGrid(int n_, int N_, double volume = 1.0) : n(n_), N(N_), domain_volume(volume) {
        if (n < 1 || n > 4) throw std::invalid_argument("TorusGrid: complex dimension must be 1..4");
        if (N < 8 || N % 2 != 0) throw std::invalid_argument("TorusGrid: N must be even and >= 8");
        if (!(domain_volume > 0)) throw std::invalid_argument("TorusGrid: volume must be positive");
    }

    int axes() const { return 2 * n; }
    std::size_t point_count() const {
        std::size_t p = 1;
        for (int a = 0; a < axes(); ++a) p *= static_cast<std::size_t>(N);
        return p;
    }
    double cell_volume() const { return domain_volume / static_cast<double>(point_count()); }

    /** Grid indices of a flat point index, last axis fastest. */
    void coords(std::size_t q, int* idx) const {
        for (int a = axes() - 1; a >= 0; --a) {
            idx[a] = static_cast<int>(q % N);
            q /= N;
        }
    }
    /** Position in [0,1)^{2n}: first n entries x_j, last n entries y_j. */
    void position(std::size_t q, double* xy) const {
        std::array<int, 8> idx{};
        coords(q, idx.data());
        for (int a = 0; a < axes(); ++a) xy[a] = static_cast<double>(idx[a]) / N;
    }
    /** Signed integer frequency of spectral index i along one axis. */
    int frequency(int i) const { return i <= N / 2 ? i : i - N; }

    bool operator==(const TorusGrid& o) const {
        return n == o.n && N == o.N && domain_volume == o.domain_volume;
    }
};

struct ScalarField {
    TorusGrid grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const TorusGrid& g, double fill = 0.0)
        : grid(g), v(g.point_count(), fill) {}

    std::size_t size() const { return v.size(); }
    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }

    double max() const {
        double m = -std::numeric_limits<double>::infinity();
        for (double x : v) m = std::max(m, x);
        return m;
    }
    double min() const {
        double m = std::numeric_limits<double>::infinity();
        for (double x : v) m = std::min(m, x);
        return m;
    }
    double sup_abs() const { return std::max(std::abs(max()), std::abs(min())); }
    bool all_finite() const {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }
    void shift(double c) {
        for (double& x : v) x += c;
    }
    /** Normalizes to sup = 0 (grid max subtracted exactly). */
    void sup_normalize() { shift(-max()); }
};

/** Per-point n-by-n Hermitian form coefficients. Constant forms store a
 * single matrix and broadcast; grid-varying forms store point-major data. */
class HermitianField {
  public:
    HermitianField() = default;
    HermitianField(const TorusGrid& g, const Hermitian& constant)
        : grid_(g), n_(g.n), constant_(true), mat_(constant) {
        check_square(constant);
    }
    static HermitianField zero(const TorusGrid& g) {
        return HermitianField(g, Hermitian::Zero(g.n, g.n));
    }
    static HermitianField varying(const TorusGrid& g) {
        HermitianField f;
        f.grid_ = g;
        f.n_ = g.n;
        f.constant_ = false;
        f.data_.assign(g.point_count() * g.n * g.n, cplx(0, 0));
        return f;
    }

    const TorusGrid& grid() const { return grid_; }
    int dim() const { return n_; }
    bool is_constant() const { return constant_; }
    const Hermitian& constant_matrix() const {
        if (!constant_) throw std::logic_error("HermitianField: not constant");
        return mat_;
    }

    Hermitian at(std::size_t q) const {
        if (constant_) return mat_;
        return Eigen::Map<const Hermitian>(data_.data() + q * n_ * n_, n_, n_);
    }
    void set(std::size_t q, const Hermitian& m) {
        if (constant_) throw std::logic_error("HermitianField: constant field is immutable per point");
        Eigen::Map<Hermitian>(data_.data() + q * n_ * n_, n_, n_) = m;
    }
    /** Raw pointer to the n*n block at point q (column-major). */
    const cplx* block(std::size_t q) const {
        return constant_ ? mat_.data() : data_.data() + q * n_ * n_;
    }
    cplx* mutable_block(std::size_t q) {
        if (constant_) throw std::logic_error("HermitianField: constant field is immutable per point");
        return data_.data() + q * n_ * n_;
    }

    /** Worst deviation from Hermitian symmetry over all points. */
    double hermitian_defect() const {
        double worst = 0.0;
        std::size_t pts = constant_ ? 1 : grid_.point_count();
        for (std::size_t q = 0; q < pts; ++q) {
            Hermitian m = at(q);
            worst = std::max(worst, (m - m.adjoint()).cwiseAbs().maxCoeff());
        }
        return worst;
    }

    friend HermitianField operator+(const HermitianField& a, const HermitianField& b) {
        require_same(a, b);
        if (a.constant_ && b.constant_) return HermitianField(a.grid_, a.mat_ + b.mat_);
        HermitianField r = varying(a.grid_);
        std::size_t pts = a.grid_.point_count();
        parallel_for(pts, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t q = lo; q < hi; ++q) r.set(q, a.at(q) + b.at(q));
        });
        return r;
    }
    friend HermitianField operator*(double t, const HermitianField& a) {
        if (a.constant_) return HermitianField(a.grid_, t * a.mat_);
        HermitianField r = varying(a.grid_);
        std::size_t pts = a.grid_.point_count();
        parallel_for(pts, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t q = lo; q < hi; ++q) r.set(q, t * a.at(q));
        });
        return r;
    }

  private:
    static void check_square(const Hermitian& m) {
        if (m.rows() != m.cols()) throw std::invalid_argument("HermitianField: matrix must be square");
    }
    static void require_same(const HermitianField& a, const HermitianField& b) {
        if (!(a.grid_ == b.grid_) || a.n_ != b.n_)
            throw std::invalid_argument("HermitianField: grid/dimension mismatch");
    }

    TorusGrid grid_;
    int n_ = 0;
    bool constant_ = true;
    Hermitian mat_;
    std::vector<cplx> data_;
};

// ---------------------------------------------------------------------------
// Field snapshots: flat binary (little-endian 8-byte floats, row-major) with
// a fixed header carrying n and N, plus a JSON sidecar written by callers.

namespace detail {
constexpr char kFieldMagic[8] = {'E', 'N', 'T', 'F', 'L', 'D', '0', '1'};
}

inline void save_field(const ScalarField& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_field: cannot open " + path);
    out.write(detail::kFieldMagic, 8);
    std::uint32_t n = static_cast<std::uint32_t>(f.grid.n);
    std::uint32_t N = static_cast<std::uint32_t>(f.grid.N);
    std::uint64_t count = f.size();
    double volume = f.grid.domain_volume;
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&N), 4);
    out.write(reinterpret_cast<const char*>(&count), 8);
    out.write(reinterpret_cast<const char*>(&volume), 8);
    out.write(reinterpret_cast<const char*>(f.v.data()), static_cast<std::streamsize>(count * 8));
    if (!out) throw std::runtime_error("save_field: short write on " + path);
}

inline ScalarField load_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_field: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, detail::kFieldMagic, 8) != 0)
        throw std::runtime_error("load_field: bad magic in " + path);
    std::uint32_t n = 0, N = 0;
    std::uint64_t count = 0;
    double volume = 1.0;
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&N), 4);
    in.read(reinterpret_cast<char*>(&count), 8);
    in.read(reinterpret_cast<char*>(&volume), 8);
    ScalarField f(TorusGrid(static_cast<int>(n), static_cast<int>(N), volume));
    if (count != f.size()) throw std::runtime_error("load_field: header/size mismatch in " + path);
    in.read(reinterpret_cast<char*>(f.v.data()), static_cast<std::streamsize>(count * 8));
    if (!in) throw std::runtime_error("load_field: short read on " + path);
    return f;
}

}  // namespace entlab

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace entlab {

using EigenvalueVector = Eigen::VectorXd;

/** j-th elementary symmetric polynomial. The product recurrence uses only
 * additions and multiplications, so it is exact for integer-representable
 * inputs. */
inline double sigma_k(const EigenvalueVector& lambda, int k) {
    const int n = static_cast<int>(lambda.size());
    if (k < 1 || k > n) throw std::invalid_argument("sigma_k: k out of range");
    std::vector<double> e(static_cast<std::size_t>(k) + 1, 0.0);
    e[0] = 1.0;
    for (int i = 0; i < n; ++i)
        for (int j = std::min(k, i + 1); j >= 1; --j) e[j] += e[j - 1] * lambda[i];
    return e[k];
}

enum class ConeKind { GammaK, PMA };

/** Cone of admissible eigenvalue vectors: Gamma_k (sigma_1..sigma_k > 0) or
 * the p-Monge-Ampere cone (all p-fold partial sums positive). */
struct ConeSpec {
    ConeKind kind = ConeKind::GammaK;
    int param = 1;  // k for GammaK, p for PMA
    int n = 2;

    static ConeSpec gamma_k(int k, int n) {
        if (k < 1 || k > n) throw std::invalid_argument("ConeSpec: need 1 <= k <= n");
        return ConeSpec{ConeKind::GammaK, k, n};
    }
    static ConeSpec pma(int p, int n) {
        if (p < 1 || p > n) throw std::invalid_argument("ConeSpec: need 1 <= p <= n");
        return ConeSpec{ConeKind::PMA, p, n};
    }
    std::string name() const {
        if (kind == ConeKind::GammaK) return "Gamma_" + std::to_string(param);
        return "PMA_cone(p=" + std::to_string(param) + ")";
    }
};

/** All increasing multi-indices of length p in {0,..,n-1}. */
inline std::vector<std::vector<int>> multi_indices(int n, int p) {
    std::vector<std::vector<int>> out;
    std::vector<int> idx(p);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        out.push_back(idx);
        int i = p - 1;
        while (i >= 0 && idx[i] == n - p + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < p; ++j) idx[j] = idx[j - 1] + 1;
    }
    return out;
}

/** Values of the cone's defining inequalities with their homogeneity
 * degrees; membership means every value is strictly positive. */
inline void cone_inequalities(const ConeSpec& cone, const EigenvalueVector& lambda,
                              std::vector<double>& values, std::vector<int>& degrees) {
    if (lambda.size() != cone.n)
        throw std::invalid_argument("cone_inequalities: dimension mismatch");
    values.clear();
    degrees.clear();
    if (cone.kind == ConeKind::GammaK) {
        for (int j = 1; j <= cone.param; ++j) {
            values.push_back(sigma_k(lambda, j));
            degrees.push_back(j);
        }
    } else {
        for (const auto& I : multi_indices(cone.n, cone.param)) {
            double s = 0.0;
            for (int i : I) s += lambda[i];
            values.push_back(s);
            degrees.push_back(1);
        }
    }
}

inline bool cone_contains(const ConeSpec& cone, const EigenvalueVector& lambda) {
    std::vector<double> vals;
    std::vector<int> degs;
    cone_inequalities(cone, lambda, vals, degs);
    for (double v : vals)
        if (!(v > 0.0)) return false;
    return true;
}

/** Strict interior test: inequality j must clear margin * |lambda|^deg_j,
 * which keeps derivative evaluations away from the cone boundary at every
 * scale. */
inline bool cone_margin_ok(const ConeSpec& cone, const EigenvalueVector& lambda, double margin) {
    std::vector<double> vals;
    std::vector<int> degs;
    cone_inequalities(cone, lambda, vals, degs);
    double scale = std::max(lambda.norm(), 1e-300);
    for (std::size_t i = 0; i < vals.size(); ++i)
        if (!(vals[i] >= margin * std::pow(scale, degs[i]))) return false;
    return true;
}

inline constexpr double kInteriorMargin = 1e-12;

enum class OperatorKind { MongeAmpere, Hessian, PMongeAmpere };

/** A degree-1 symmetric operator f on its cone, with the structural
 * constant gamma = inf over the cone of prod_j df/dlambda_j. */
struct OperatorSpec {
    OperatorKind kind = OperatorKind::MongeAmpere;
    int n = 2;
    int param = 0;  // k for Hessian, p for PMongeAmpere
    ConeSpec cone;
    double gamma = 0.0;

    std::string name() const {
        switch (kind) {
            case OperatorKind::MongeAmpere:
                return "ma(n=" + std::to_string(n) + ")";
            case OperatorKind::Hessian:
                return "hessian(k=" + std::to_string(param) + ",n=" + std::to_string(n) + ")";
            case OperatorKind::PMongeAmpere:
                return "pma(p=" + std::to_string(param) + ",n=" + std::to_string(n) + ")";
        }
        return "?";
    }
};

inline double f_eval(const OperatorSpec& op, const EigenvalueVector& lambda) {
    if (lambda.size() != op.n) throw std::invalid_argument("f_eval: dimension mismatch");
    if (!cone_contains(op.cone, lambda))
        throw std::domain_error("f_eval: eigenvalue vector outside the cone");
    switch (op.kind) {
        case OperatorKind::MongeAmpere: {
            double logp = 0.0;
            for (int j = 0; j < op.n; ++j) logp += std::log(lambda[j]);
            return std::exp(logp / op.n);
        }
        case OperatorKind::Hessian:
            return std::pow(sigma_k(lambda, op.param), 1.0 / op.param);
        case OperatorKind::PMongeAmpere: {
            auto idx = multi_indices(op.n, op.param);
            double logp = 0.0;
            for (const auto& I : idx) {
                double s = 0.0;
                for (int i : I) s += lambda[i];
                logp += std::log(s);
            }
            // Degree-1 homogeneity forces the exponent 1/C(n,p).
            return std::exp(logp / static_cast<double>(idx.size()));
        }
    }
    throw std::logic_error("f_eval: unknown operator kind");
}

/** Closed-form partial derivatives df/dlambda_j; all positive on the cone. */
inline EigenvalueVector f_grad(const OperatorSpec& op, const EigenvalueVector& lambda) {
    if (lambda.size() != op.n) throw std::invalid_argument("f_grad: dimension mismatch");
    if (!cone_margin_ok(op.cone, lambda, kInteriorMargin))
        throw std::domain_error("f_grad: eigenvalue vector not strictly inside the cone");
    EigenvalueVector g(op.n);
    switch (op.kind) {
        case OperatorKind::MongeAmpere: {
            double f = f_eval(op, lambda);
            for (int j = 0; j < op.n; ++j) g[j] = f / (op.n * lambda[j]);
            return g;
        }
        case OperatorKind::Hessian: {
            const int k = op.param;
            double sk = sigma_k(lambda, k);
            double pref = std::pow(sk, 1.0 / k - 1.0) / k;
            for (int j = 0; j < op.n; ++j) {
                EigenvalueVector rest(op.n - 1);
                for (int i = 0, w = 0; i < op.n; ++i)
                    if (i != j) rest[w++] = lambda[i];
                double dsig = (k == 1) ? 1.0 : sigma_k(rest, k - 1);
                g[j] = pref * dsig;
            }
            return g;
        }
        case OperatorKind::PMongeAmpere: {
            auto idx = multi_indices(op.n, op.param);
            double f = f_eval(op, lambda);
            double invC = 1.0 / static_cast<double>(idx.size());
            g.setZero();
            for (const auto& I : idx) {
                double s = 0.0;
                for (int i : I) s += lambda[i];
                for (int i : I) g[i] += f * invC / s;
            }
            return g;
        }
    }
    throw std::logic_error("f_grad: unknown operator kind");
}

// ---------------------------------------------------------------------------
// Cone sampling: directions uniform on the sphere intersected with the cone
// by rejection, radii log-uniform in [1e-3, 1e3].

inline EigenvalueVector sample_cone_point(const ConeSpec& cone, std::mt19937_64& rng,
                                          double margin = 1e-9) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uni(-3.0, 3.0);
    for (int tries = 0; tries < 100000; ++tries) {
        EigenvalueVector d(cone.n);
        for (int j = 0; j < cone.n; ++j) d[j] = gauss(rng);
        d.normalize();
        if (!cone_margin_ok(cone, d, margin)) continue;
        return std::pow(10.0, uni(rng)) * d;
    }
    throw std::runtime_error("sample_cone_point: rejection sampling failed for " + cone.name());
}

/** Positive-octant sample (Gamma_n), for the nesting checks. */
inline EigenvalueVector sample_positive_point(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uni(-3.0, 3.0);
    EigenvalueVector d(n);
    for (int j = 0; j < n; ++j) d[j] = std::abs(gauss(rng)) + 1e-6;
    d.normalize();
    return std::pow(10.0, uni(rng)) * d;
}

/** Sampled infimum over the cone of the derivative product. The product is
 * homogeneous of degree zero, so only directions matter; radii still vary
 * to exercise the evaluation across scales. */
inline double gamma_lower_bound(const OperatorSpec& op, int sample_budget, unsigned seed) {
    if (sample_budget < 1) throw std::invalid_argument("gamma_lower_bound: need sample_budget >= 1");
    std::mt19937_64 rng(seed);
    double inf = std::numeric_limits<double>::infinity();
    for (int i = 0; i < sample_budget; ++i) {
        EigenvalueVector lam = sample_cone_point(op.cone, rng);
        EigenvalueVector g = f_grad(op, lam);
        double prod = 1.0;
        for (int j = 0; j < op.n; ++j) prod *= g[j];
        inf = std::min(inf, prod);
    }
    return inf;
}

/** Builds a fully populated spec. gamma is the analytically known value
 * where one exists, else the sampled infimum times a 0.9 safety factor. */
inline OperatorSpec make_operator_spec(OperatorKind kind, int n, int param = 0,
                                       int sample_budget = 4000, unsigned seed = 7) {
    OperatorSpec op;
    op.kind = kind;
    op.n = n;
    op.param = param;
    switch (kind) {
        case OperatorKind::MongeAmpere:
            op.param = 0;
            op.cone = ConeSpec::gamma_k(n, n);
            op.gamma = std::pow(static_cast<double>(n), -n);
            return op;
        case OperatorKind::Hessian:
            op.cone = ConeSpec::gamma_k(param, n);
            if (param == 1)
                op.gamma = 1.0;
            else if (param == n)
                op.gamma = std::pow(static_cast<double>(n), -n);
            else
                op.gamma = 0.9 * gamma_lower_bound(op, sample_budget, seed);
            return op;
        case OperatorKind::PMongeAmpere:
            op.cone = ConeSpec::pma(param, n);
            if (param == 1)
                op.gamma = std::pow(static_cast<double>(n), -n);
            else if (param == n)
                op.gamma = 1.0;
            else
                op.gamma = 0.9 * gamma_lower_bound(op, sample_budget, seed);
            return op;
    }
    throw std::logic_error("make_operator_spec: unknown kind");
}

// ---------------------------------------------------------------------------
// Structural-condition verification over a generic operator object, so test
// fixtures can exercise deliberately broken operators.

struct Operator {
    int n = 2;
    ConeSpec cone;
    double gamma = 0.0;
    std::string name;
    std::function<double(const EigenvalueVector&)> eval;
    std::function<EigenvalueVector(const EigenvalueVector&)> grad;
};

inline Operator make_operator(const OperatorSpec& spec) {
    Operator op;
    op.n = spec.n;
    op.cone = spec.cone;
    op.gamma = spec.gamma;
    op.name = spec.name();
    op.eval = [spec](const EigenvalueVector& l) { return f_eval(spec, l); };
    op.grad = [spec](const EigenvalueVector& l) { return f_grad(spec, l); };
    return op;
}

struct StructureReport {
    struct Entry {
        std::string condition;
        bool pass = false;
        double worst = 0.0;  // violation magnitude, 0 when clean
        std::string note;
    };
    std::vector<Entry> entries;
    double gamma_estimate = 0.0;

    bool all_pass() const {
        for (const auto& e : entries)
            if (!e.pass) return false;
        return true;
    }
    const Entry* find(const std::string& condition) const {
        for (const auto& e : entries)
            if (e.condition == condition) return &e;
        return nullptr;
    }
};

/** Numerical audit of the structural conditions: symmetry, degree-1
 * homogeneity, gradient positivity, cone nesting Gamma_n within the cone
 * within Gamma_1, and the derivative-product lower bound. Failures are
 * report entries, never exceptions. */
inline StructureReport verify_structure(const Operator& op, int sample_budget, unsigned seed) {
    StructureReport rep;
    std::mt19937_64 rng(seed);
    const int n = op.n;
    int budget = std::max(1, sample_budget);

    std::vector<EigenvalueVector> pts;
    pts.reserve(budget);
    for (int i = 0; i < budget; ++i) pts.push_back(sample_cone_point(op.cone, rng));

    // Symmetry: exhaustive permutations for n <= 4.
    double sym_worst = 0.0;
    {
        int checked = 0;
        for (const auto& lam : pts) {
            if (checked > 20000) break;
            double f0 = op.eval(lam);
            EigenvalueVector perm = lam;
            std::vector<int> order(n);
            std::iota(order.begin(), order.end(), 0);
            do {
                for (int j = 0; j < n; ++j) perm[j] = lam[order[j]];
                double fp = op.eval(perm);
                sym_worst = std::max(sym_worst, std::abs(fp - f0) / std::max(1e-300, std::abs(f0)));
                ++checked;
            } while (std::next_permutation(order.begin(), order.end()));
        }
        rep.entries.push_back({"symmetry", sym_worst <= 1e-10, sym_worst,
                               "max relative deviation over permutations"});
    }

    // Homogeneity: f(t lambda) = t f(lambda) for t in {0.5, 2, 10}.
    {
        double worst = 0.0;
        for (const auto& lam : pts) {
            double f0 = op.eval(lam);
            for (double t : {0.5, 2.0, 10.0}) {
                double ft = op.eval(t * lam);
                worst = std::max(worst, std::abs(ft - t * f0) / std::max(1e-300, std::abs(ft)));
            }
        }
        rep.entries.push_back({"homogeneity", worst <= 1e-10, worst,
                               "max relative defect of f(t*lambda) - t*f(lambda)"});
    }

    // Gradient positivity (monotonicity) and the derivative product.
    {
        double min_entry = std::numeric_limits<double>::infinity();
        double min_prod = std::numeric_limits<double>::infinity();
        for (const auto& lam : pts) {
            EigenvalueVector g = op.grad(lam);
            double prod = 1.0;
            for (int j = 0; j < n; ++j) {
                min_entry = std::min(min_entry, g[j]);
                prod *= g[j];
            }
            min_prod = std::min(min_prod, prod);
        }
        rep.entries.push_back({"monotonicity", min_entry > 0.0, std::max(0.0, -min_entry),
                               "min gradient entry " + std::to_string(min_entry)});
        rep.gamma_estimate = min_prod;
        bool ok = min_prod >= op.gamma * (1.0 - 1e-6) - 1e-12;
        rep.entries.push_back({"derivative_product", ok, std::max(0.0, op.gamma - min_prod),
                               "sampled inf " + std::to_string(min_prod) + " vs gamma " +
                                   std::to_string(op.gamma)});
    }

    // Cone nesting: Gamma_n inside the cone inside Gamma_1.
    {
        double worst = 0.0;
        ConeSpec gamma1 = ConeSpec::gamma_k(1, n);
        for (int i = 0; i < budget; ++i) {
            EigenvalueVector octant = sample_positive_point(n, rng);
            std::vector<double> vals;
            std::vector<int> degs;
            cone_inequalities(op.cone, octant, vals, degs);
            for (double v : vals) worst = std::max(worst, -v);
        }
        for (const auto& lam : pts) {
            std::vector<double> vals;
            std::vector<int> degs;
            cone_inequalities(gamma1, lam, vals, degs);
            for (double v : vals) worst = std::max(worst, -v);
        }
        rep.entries.push_back({"cone_nesting", worst <= 0.0, std::max(0.0, worst),
                               "Gamma_n subset cone subset Gamma_1 on samples"});
    }
    return rep;
}

}  // namespace entlab

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "entlab/operators.hpp"

using namespace entlab;

namespace {

EigenvalueVector vec(std::initializer_list<double> xs) {
    EigenvalueVector v(static_cast<int>(xs.size()));
    int i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

/** Brute-force elementary symmetric polynomial: sum over all k-subsets. */
double sigma_brute(const EigenvalueVector& lam, int k) {
    double total = 0.0;
    for (const auto& I : multi_indices(static_cast<int>(lam.size()), k)) {
        double p = 1.0;
        for (int i : I) p *= lam[i];
        total += p;
    }
    return total;
}

EigenvalueVector fd_gradient(const OperatorSpec& op, const EigenvalueVector& lam, double h) {
    EigenvalueVector g(op.n);
    for (int j = 0; j < op.n; ++j) {
        EigenvalueVector up = lam, dn = lam;
        up[j] += h;
        dn[j] -= h;
        g[j] = (f_eval(op, up) - f_eval(op, dn)) / (2 * h);
    }
    return g;
}

}  // namespace

TEST_CASE("sigma_k basics") {
    CHECK(sigma_k(vec({1, 2, 3}), 1) == 6.0);
    CHECK(sigma_k(vec({1, 1, 1}), 3) == 1.0);
    // brute-force oracle: 1*2 + 1*3 + 2*3
    CHECK(sigma_k(vec({1, 2, 3}), 2) == sigma_brute(vec({1, 2, 3}), 2));
    CHECK(sigma_k(vec({1, 2, 3}), 2) == 11.0);
    CHECK_THROWS_AS(sigma_k(vec({1, 2}), 3), std::invalid_argument);
    CHECK_THROWS_AS(sigma_k(vec({1, 2}), 0), std::invalid_argument);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    for (int it = 0; it < 50; ++it) {
        EigenvalueVector lam(4);
        for (int j = 0; j < 4; ++j) lam[j] = uni(rng);
        for (int k = 1; k <= 4; ++k)
            CHECK(sigma_k(lam, k) == Catch::Approx(sigma_brute(lam, k)).margin(1e-12));
    }
}

TEST_CASE("cone membership") {
    CHECK(cone_contains(ConeSpec::gamma_k(1, 2), vec({2, -1})));
    CHECK_FALSE(cone_contains(ConeSpec::gamma_k(2, 2), vec({2, -1})));
    CHECK_THROWS_AS(cone_contains(ConeSpec::gamma_k(1, 3), vec({1, 1})), std::invalid_argument);

    // PMA(p=1) membership coincides with Gamma_n.
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(-1.0, 2.0);
    for (int it = 0; it < 200; ++it) {
        EigenvalueVector lam(3);
        for (int j = 0; j < 3; ++j) lam[j] = uni(rng);
        CHECK(cone_contains(ConeSpec::pma(1, 3), lam) ==
              cone_contains(ConeSpec::gamma_k(3, 3), lam));
    }
}

TEST_CASE("f_eval closed forms") {
    auto ma2 = make_operator_spec(OperatorKind::MongeAmpere, 2);
    auto ma3 = make_operator_spec(OperatorKind::MongeAmpere, 3);
    auto h23 = make_operator_spec(OperatorKind::Hessian, 3, 2);

    CHECK(f_eval(ma2, vec({1, 1})) == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(f_eval(ma3, vec({1, 1, 1})) == Catch::Approx(1.0).epsilon(1e-14));
    // sigma_2(1,1,1) = 3 by brute force, then the k-th root.
    CHECK(f_eval(h23, vec({1, 1, 1})) ==
          Catch::Approx(std::sqrt(sigma_brute(vec({1, 1, 1}), 2))).epsilon(1e-14));

    // PMA(p=n) is sigma_1.
    auto pnn = make_operator_spec(OperatorKind::PMongeAmpere, 3, 3);
    std::mt19937_64 rng(5);
    for (int it = 0; it < 50; ++it) {
        EigenvalueVector lam = sample_cone_point(pnn.cone, rng);
        CHECK(f_eval(pnn, lam) == Catch::Approx(lam.sum()).epsilon(1e-12));
    }

    CHECK_THROWS_AS(f_eval(ma2, vec({1, -1})), std::domain_error);
}

TEST_CASE("f_grad closed forms against finite differences") {
    auto ma2 = make_operator_spec(OperatorKind::MongeAmpere, 2);
    EigenvalueVector g = f_grad(ma2, vec({1, 1}));
    CHECK(g[0] == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(g[1] == Catch::Approx(0.5).epsilon(1e-12));
    EigenvalueVector fd = fd_gradient(ma2, vec({1, 1}), 1e-6);
    CHECK(std::abs(g[0] - fd[0]) / g[0] < 1e-7);
    CHECK(std::abs(g[1] - fd[1]) / g[1] < 1e-7);

    auto h13 = make_operator_spec(OperatorKind::Hessian, 3, 1);
    EigenvalueVector g1 = f_grad(h13, vec({0.3, -0.1, 2.0}));
    for (int j = 0; j < 3; ++j) CHECK(g1[j] == 1.0);

    CHECK_THROWS_AS(f_grad(ma2, vec({1, -1})), std::domain_error);

    std::vector<OperatorSpec> ops = {
        ma2,
        make_operator_spec(OperatorKind::MongeAmpere, 3),
        make_operator_spec(OperatorKind::Hessian, 3, 2),
        make_operator_spec(OperatorKind::PMongeAmpere, 3, 2),
    };
    std::mt19937_64 rng(17);
    for (const auto& op : ops) {
        for (int it = 0; it < 40; ++it) {
            // keep scales moderate so finite differences stay well conditioned
            EigenvalueVector lam = sample_cone_point(op.cone, rng, 1e-3);
            lam *= 1.0 / lam.norm();
            EigenvalueVector g2 = f_grad(op, lam);
            EigenvalueVector fd2 = fd_gradient(op, lam, 1e-6);
            for (int j = 0; j < op.n; ++j) {
                CHECK(g2[j] > 0.0);
                CHECK(std::abs(g2[j] - fd2[j]) <= 1e-6 * std::max(1.0, std::abs(g2[j])));
            }
        }
    }
}

TEST_CASE("Euler identity for degree-1 homogeneity") {
    std::vector<OperatorSpec> ops = {
        make_operator_spec(OperatorKind::MongeAmpere, 2),
        make_operator_spec(OperatorKind::Hessian, 3, 2),
        make_operator_spec(OperatorKind::PMongeAmpere, 3, 2),
    };
    std::mt19937_64 rng(23);
    for (const auto& op : ops) {
        for (int it = 0; it < 100; ++it) {
            EigenvalueVector lam = sample_cone_point(op.cone, rng);
            double f = f_eval(op, lam);
            double dot = lam.dot(f_grad(op, lam));
            CHECK(std::abs(dot - f) <= 1e-10 * std::abs(f));
        }
    }
}

TEST_CASE("homogeneity and symmetry invariants") {
    std::vector<OperatorSpec> ops = {
        make_operator_spec(OperatorKind::MongeAmpere, 2),
        make_operator_spec(OperatorKind::Hessian, 3, 2),
        make_operator_spec(OperatorKind::PMongeAmpere, 2, 1),
        make_operator_spec(OperatorKind::PMongeAmpere, 3, 3),
    };
    std::mt19937_64 rng(29);
    for (const auto& op : ops) {
        for (int it = 0; it < 60; ++it) {
            EigenvalueVector lam = sample_cone_point(op.cone, rng);
            double f = f_eval(op, lam);
            for (double t : {0.5, 2.0, 10.0})
                CHECK(std::abs(f_eval(op, t * lam) - t * f) <= 1e-10 * f_eval(op, t * lam));
            EigenvalueVector perm = lam;
            std::vector<int> order(op.n);
            std::iota(order.begin(), order.end(), 0);
            do {
                for (int j = 0; j < op.n; ++j) perm[j] = lam[order[j]];
                CHECK(std::abs(f_eval(op, perm) - f) <= 1e-10 * std::abs(f));
            } while (std::next_permutation(order.begin(), order.end()));
        }
    }
}

TEST_CASE("gamma lower bounds") {
    auto ma2 = make_operator_spec(OperatorKind::MongeAmpere, 2);
    auto ma3 = make_operator_spec(OperatorKind::MongeAmpere, 3);
    // For Monge-Ampere the product of partials is identically n^{-n}.
    CHECK(std::abs(gamma_lower_bound(ma2, 2000, 1) - 0.25) < 1e-10);
    CHECK(std::abs(gamma_lower_bound(ma3, 2000, 1) - 1.0 / 27.0) < 1e-10);
    CHECK(std::abs(gamma_lower_bound(make_operator_spec(OperatorKind::Hessian, 3, 1), 500, 1) -
                   1.0) < 1e-12);

    // finite-difference confirmation of the constant product at random points
    std::mt19937_64 rng(31);
    for (int it = 0; it < 20; ++it) {
        EigenvalueVector lam = sample_cone_point(ma2.cone, rng, 1e-3);
        lam *= 1.0 / lam.norm();
        EigenvalueVector fd = fd_gradient(ma2, lam, 1e-6);
        CHECK(fd[0] * fd[1] == Catch::Approx(0.25).epsilon(1e-5));
    }

    CHECK_THROWS_AS(gamma_lower_bound(ma2, 0, 1), std::invalid_argument);
}

TEST_CASE("structural-condition reports") {
    auto ma2 = make_operator_spec(OperatorKind::MongeAmpere, 2);
    StructureReport rep = verify_structure(make_operator(ma2), 400, 99);
    CHECK(rep.all_pass());
    CHECK(rep.find("homogeneity")->worst <= 1e-12);
    CHECK(std::abs(rep.gamma_estimate - 0.25) < 1e-10);

    StructureReport rep2 =
        verify_structure(make_operator(make_operator_spec(OperatorKind::Hessian, 3, 2)), 400, 99);
    CHECK(rep2.all_pass());
    CHECK(rep2.gamma_estimate > 0.0);

    // Deliberately broken operator: f = lambda_1, not symmetric.
    Operator broken;
    broken.n = 2;
    broken.cone = ConeSpec::gamma_k(2, 2);
    broken.gamma = 0.0;
    broken.name = "broken-first-coordinate";
    broken.eval = [](const EigenvalueVector& l) { return l[0]; };
    broken.grad = [](const EigenvalueVector& l) {
        EigenvalueVector g(l.size());
        g.setZero();
        g[0] = 1.0;
        return g;
    };
    StructureReport rep3 = verify_structure(broken, 200, 99);
    CHECK_FALSE(rep3.all_pass());
    CHECK_FALSE(rep3.find("symmetry")->pass);
}

TEST_CASE("cone nesting of represented cones") {
    std::mt19937_64 rng(41);
    std::vector<ConeSpec> cones = {ConeSpec::gamma_k(2, 3), ConeSpec::pma(2, 3),
                                   ConeSpec::gamma_k(1, 2), ConeSpec::pma(2, 2)};
    for (const auto& cone : cones) {
        ConeSpec g1 = ConeSpec::gamma_k(1, cone.n);
        for (int it = 0; it < 300; ++it) {
            EigenvalueVector oct = sample_positive_point(cone.n, rng);
            CHECK(cone_contains(cone, oct));
            EigenvalueVector pt = sample_cone_point(cone, rng);
            CHECK(cone_contains(g1, pt));
        }
    }
}

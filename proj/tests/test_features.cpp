#include "rfsc/features.hpp"
#include "rfsc/seeding.hpp"

#include <doctest.h>

#include <functional>
#include <set>

using namespace rfsc;

namespace {

// Recursive multiset generator, independent of the library's ordering logic.
std::set<std::vector<std::size_t>> brute_multisets(std::size_t n, std::size_t m) {
    std::set<std::vector<std::size_t>> out;
    std::vector<std::size_t> cur;
    std::function<void(std::size_t)> rec = [&](std::size_t start) {
        out.insert(cur);
        if (cur.size() == m) return;
        for (std::size_t i = start; i < n; ++i) {
            cur.push_back(i);
            rec(i);
            cur.pop_back();
        }
    };
    rec(0);
    return out;
}

Eigen::MatrixXd random_unit(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd x(rows, cols);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.uniform();
    return x;
}

}  // namespace

TEST_CASE("regressor counts match the published sizes") {
    CHECK(enumerate(30, 2).size() == 496);
    CHECK(enumerate(60, 2).size() == 1891);
    CHECK(enumerate(4, 2).size() == 15);
    CHECK(enumerate(6, 2).size() == 28);
    CHECK(enumerate(13, 2).size() == 105);
    CHECK(enumerate(7, 0).size() == 1);
    CHECK(regressor_count(30, 2) == 496);
}

TEST_CASE("enumeration equals the brute-force multiset set") {
    for (std::size_t n = 1; n <= 12; ++n) {
        for (std::size_t m = 0; m <= 3; ++m) {
            CAPTURE(n);
            CAPTURE(m);
            const RegressorSet rs = enumerate(n, m);
            const auto expected = brute_multisets(n, m);
            CHECK(rs.size() == expected.size());
            CHECK(rs.size() == regressor_count(n, m));
            std::set<std::vector<std::size_t>> got;
            for (const auto& mono : rs.monomials()) got.insert(mono.factors);
            CHECK(got == expected);
            CHECK(rs[0].is_constant());
        }
    }
}

TEST_CASE("enumeration order is degree then lexicographic") {
    const RegressorSet rs = enumerate(3, 2);
    std::vector<std::string> names;
    for (const auto& m : rs.monomials()) names.push_back(m.to_string());
    CHECK(names == std::vector<std::string>{"1", "u1", "u2", "u3", "u1*u1", "u1*u2", "u1*u3", "u2*u2", "u2*u3",
                                            "u3*u3"});
    for (std::size_t j = 1; j < rs.size(); ++j) {
        const auto& a = rs[j - 1].factors;
        const auto& b = rs[j].factors;
        CHECK((a.size() < b.size() || (a.size() == b.size() && a < b)));
    }
    // stable across calls
    CHECK(enumerate(5, 3).monomials() == enumerate(5, 3).monomials());
}

TEST_CASE("enumeration over a feature subset") {
    const std::vector<std::size_t> keep{1, 4};
    const RegressorSet rs = enumerate(keep, 6, 2);
    CHECK(rs.size() == 6);
    CHECK(rs.input_width() == 6);
    CHECK(rs[1].to_string() == "u2");
    CHECK(rs[5].to_string() == "u5*u5");
}

TEST_CASE("monomial text round trip") {
    const RegressorSet rs = enumerate(4, 3);
    for (const auto& m : rs.monomials()) CHECK(Monomial::parse(m.to_string()) == m);
    CHECK(Monomial::parse("u3*u17").factors == std::vector<std::size_t>{2, 16});
    CHECK(Monomial::parse("u17*u3").factors == std::vector<std::size_t>{2, 16});
    CHECK_THROWS(Monomial::parse("x1"));
    CHECK_THROWS(Monomial::parse("u0"));
}

TEST_CASE("evaluate examples") {
    const RegressorSet rs = enumerate(3, 2);
    Eigen::VectorXd u(3);
    u << 1.0, 0.2, 0.4;
    const Eigen::VectorXd phi = rs.evaluate(u);
    CHECK(phi(0) == 1.0);
    CHECK(phi(static_cast<Eigen::Index>(rs.find(Monomial{{1, 2}}))) == doctest::Approx(0.08).epsilon(1e-15));
    u << 0.5, 0.0, 0.0;
    CHECK(rs.evaluate(u)(static_cast<Eigen::Index>(rs.find(Monomial{{0, 0}}))) == 0.25);
    CHECK(rs.find(Monomial{{0, 0, 0}}) == rs.size());
    Eigen::VectorXd wrong(2);
    CHECK_THROWS((void)rs.evaluate(wrong));
}

TEST_CASE("evaluated regressors stay in the unit interval") {
    const RegressorSet rs = enumerate(5, 3);
    const Eigen::MatrixXd x = random_unit(200, 5, 17);
    const Eigen::MatrixXd all = rs.evaluate_all(x);
    CHECK(all.minCoeff() >= 0.0);
    CHECK(all.maxCoeff() <= 1.0);
}

TEST_CASE("evaluate_subset equals slicing the full matrix") {
    const RegressorSet rs = enumerate(4, 2);
    const Eigen::MatrixXd x = random_unit(30, 4, 2);
    // oracle: product over factors, row by row
    Eigen::MatrixXd full(30, static_cast<Eigen::Index>(rs.size()));
    for (Eigen::Index k = 0; k < 30; ++k) {
        for (std::size_t j = 0; j < rs.size(); ++j) {
            double v = 1.0;
            for (auto f : rs[j].factors) v *= x(k, static_cast<Eigen::Index>(f));
            full(k, static_cast<Eigen::Index>(j)) = v;
        }
    }
    CHECK((rs.evaluate_all(x) - full).cwiseAbs().maxCoeff() == 0.0);
    const std::vector<std::size_t> sel{14, 0, 3, 7};
    const Eigen::MatrixXd sub = rs.evaluate_subset(sel, x);
    REQUIRE(sub.cols() == 4);
    for (Eigen::Index c = 0; c < 4; ++c) {
        CHECK((sub.col(c) - full.col(static_cast<Eigen::Index>(sel[static_cast<std::size_t>(c)]))).isZero(0.0));
    }
    CHECK(rs.evaluate_all(x).cols() == 15);
    CHECK(rs.evaluate_subset(std::vector<std::size_t>{}, x).cols() == 0);
}

TEST_CASE("constant-only design is a column of ones") {
    const RegressorSet rs = enumerate(3, 2);
    const Eigen::MatrixXd x = random_unit(5, 3, 9);
    const Eigen::MatrixXd d = rs.evaluate_subset(std::vector<std::size_t>{0}, x);
    CHECK(d.rows() == 5);
    CHECK(d.cols() == 1);
    CHECK((d.array() == 1.0).all());
}

TEST_CASE("design source gives the same columns materialized or lazy") {
    const RegressorSet rs = enumerate(6, 2);
    const Eigen::MatrixXd x = random_unit(50, 6, 4);
    const DesignSource eager(rs, x);
    const DesignSource lazy(rs, x, 0);
    CHECK(eager.materialized());
    CHECK_FALSE(lazy.materialized());
    const std::vector<std::size_t> sel{3, 20, 27, 0};
    CHECK((eager.columns(sel) - lazy.columns(sel)).isZero(0.0));
    CHECK((eager.columns(sel) - rs.evaluate_subset(sel, x)).isZero(0.0));
}

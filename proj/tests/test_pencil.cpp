#include <daepencil/pencil.hpp>

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "test_support.hpp"

#include <random>

using namespace daepencil;

TEST_CASE("pencil construction validates its inputs") {
    CHECK_THROWS_AS(Pencil(Matrix::Zero(2, 3), Matrix::Zero(2, 2)), NonSquareError);
    CHECK_THROWS_AS(Pencil(Matrix::Zero(2, 2), Matrix::Zero(3, 3)), DimensionMismatchError);
    Matrix bad = Matrix::Zero(2, 2);
    bad(0, 0) = kInf;
    CHECK_THROWS_AS(Pencil(bad, Matrix::Zero(2, 2)), InvalidArgumentError);
}

TEST_CASE("regularity of the worked 2x2 example") {
    const auto rep = is_regular(support::example_2x2());
    CHECK(rep.regular);
    CHECK(rep.rank == 1);
    CHECK(rep.sigma_min_b == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("full-rank m0 gives an empty corner block and a regular pencil") {
    std::mt19937_64 rng(3);
    const auto rep = is_regular(Pencil(Matrix::Identity(3, 3), support::gaussian(3, 3, rng)));
    CHECK(rep.regular);
    CHECK(rep.rank == 3);
    CHECK(rep.sigma_min_b == kInf);
}

TEST_CASE("zero m0 reduces regularity to invertibility of m1") {
    Matrix m1(2, 2);
    m1 << 1, 1, 0, 1;
    CHECK(is_regular(Pencil(Matrix::Zero(2, 2), m1)).regular);

    m1 << 1, 1, 1, 1;
    CHECK_FALSE(is_regular(Pencil(Matrix::Zero(2, 2), m1)).regular);
}

TEST_CASE("higher-index and singular pencils are rejected") {
    Matrix m0(2, 2), m1(2, 2);

    // nilpotent m0 with m1 = I: solvable only for trivial data, index two
    m0 << 0, 1, 0, 0;
    CHECK_FALSE(is_regular(Pencil(m0, Matrix::Identity(2, 2))).regular);
    CHECK_THROWS_AS(block_factorize(Pencil(m0, Matrix::Identity(2, 2))), NotRegularError);

    // det(z m0 + m1) vanishes identically
    m0 << 1, 0, 0, 0;
    m1 << 0, 1, 0, 0;
    CHECK_FALSE(is_regular(Pencil(m0, m1)).regular);
    CHECK_THROWS_AS(block_factorize(Pencil(m0, m1)), NotRegularError);
}

TEST_CASE("block factorization of the worked example") {
    const auto f = block_factorize(support::example_2x2());

    CHECK(f.rank == 1);
    REQUIRE(f.reduced_generator_a.rows() == 1);
    CHECK(std::abs(f.reduced_generator_a(0, 0) - Complex(-1.0)) < 1e-12);
    CHECK(std::abs(std::abs(f.m0_tilde(0, 0)) - 1.0) < 1e-12);
    CHECK(std::abs(std::abs(f.b(0, 0)) - 1.0) < 1e-12);

    // phase-free form of the coupling block B^{-1} C
    const Matrix coupling_op =
        f.decomp.null_m0.basis * f.b_inv_c * f.decomp.conull_m0.basis.adjoint();
    Matrix expected(2, 2);
    expected << 0, 0, 2, 0;
    CHECK((coupling_op - expected).norm() < 1e-12);

    // unit-triangular couplers carry determinant one
    CHECK(std::abs(f.v0().determinant() - Complex(1.0)) < 1e-12);
    CHECK(std::abs(f.v1().determinant() - Complex(1.0)) < 1e-12);
}

TEST_CASE("factorization reconstructs the pencil at random points") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> rad(0.0, 20.0);

    for (int inst = 0; inst < 6; ++inst) {
        const Index n = 2 + static_cast<Index>(rng() % 7);
        const Index rank = static_cast<Index>(rng() % (n + 1));
        const Pencil p = generate_regular(n, rank, 100 + inst);
        const auto f = block_factorize(p);
        const double scale = op_norm(p.m0) + op_norm(p.m1);

        for (int k = 0; k < 100; ++k) {
            const double r = rad(rng);
            const double th = angle(rng);
            const Complex z = r * Complex(std::cos(th), std::sin(th));
            CHECK((f.evaluate(z) - p.eval(z)).norm() <= 1e-10 * (1.0 + std::abs(z)) * scale);
        }
    }
}

TEST_CASE("resolvent values on worked examples") {
    // scalar pencil z + 1
    const Pencil scalar(Matrix::Identity(1, 1), Matrix::Identity(1, 1));
    CHECK(std::abs(resolvent(scalar, Complex(1.0))(0, 0) - Complex(0.5)) < 1e-14);

    // 2x2 example at z = 0 is the inverse of m1
    Matrix expected(2, 2);
    expected << 1, -1, -2, 3;
    CHECK((resolvent(support::example_2x2(), Complex(0.0)) - expected).norm() < 1e-12);
}

TEST_CASE("resolvent refuses points on the spectrum") {
    CHECK_THROWS_AS(resolvent(support::example_2x2(), Complex(-1.0)), SpectrumHitError);
}

TEST_CASE("resolvent inverts the pencil and satisfies the resolvent identity") {
    std::mt19937_64 rng(13);
    for (int inst = 0; inst < 6; ++inst) {
        const Index n = 1 + static_cast<Index>(rng() % 8);
        const Index rank = static_cast<Index>(rng() % (n + 1));
        const Pencil p = generate_regular(n, rank, 200 + inst);
        const auto f = block_factorize(p);

        const Complex z(1.5, 2.0), w(-0.25, -3.0);
        const Matrix rz = resolvent(f, z);
        const Matrix rw = resolvent(f, w);

        CHECK((p.eval(z) * rz - Matrix::Identity(n, n)).norm() < 1e-10 * (1.0 + op_norm(rz)));

        const Matrix lhs = rz - rw;
        const Matrix rhs = (w - z) * rz * p.m0 * rw;
        CHECK((lhs - rhs).norm() <= 1e-9 * (1.0 + lhs.norm()));
    }
}

TEST_CASE("spectrum of worked examples") {
    const auto rep = spectrum(support::example_2x2());
    REQUIRE(rep.eigenvalues.size() == 1);
    CHECK(std::abs(rep.eigenvalues[0] - Complex(-1.0)) < 1e-12);
    CHECK(rep.spectral_abscissa == Catch::Approx(-1.0));
    CHECK(rep.s0 == Catch::Approx(-1.0));
    CHECK(rep.imag_axis_margin == Catch::Approx(1.0));

    Eigen::Vector2d diag(1.0, 2.0);
    const Pencil p(Matrix::Identity(2, 2), diag.asDiagonal().toDenseMatrix().cast<Complex>());
    const auto rep2 = spectrum(p);
    CHECK(oracles::multiset_distance(rep2.eigenvalues, {Complex(-1.0), Complex(-2.0)}) < 1e-12);
    CHECK(rep2.spectral_abscissa == Catch::Approx(-1.0));
    CHECK(rep2.imag_axis_margin == Catch::Approx(1.0));
}

TEST_CASE("zero m0 has empty spectrum") {
    Matrix m1(2, 2);
    m1 << 1, 1, 0, 1;
    const auto rep = spectrum(Pencil(Matrix::Zero(2, 2), m1));
    CHECK(rep.eigenvalues.empty());
    CHECK(rep.spectral_abscissa == -kInf);
    CHECK(rep.imag_axis_margin == kInf);
}

TEST_CASE("spectrum agrees with the determinant-root oracle") {
    std::mt19937_64 rng(17);
    for (int inst = 0; inst < 20; ++inst) {
        const Index n = 1 + static_cast<Index>(rng() % 8);
        const Index rank = static_cast<Index>(rng() % (n + 1));
        const Pencil p = generate_regular(n, rank, 300 + inst);
        CAPTURE(n, rank, inst);

        const auto rep = spectrum(p);
        if (rank == 0) {
            CHECK(rep.eigenvalues.empty());
            continue;
        }
        const auto roots = oracles::spectrum_oracle(p.m0, p.m1);
        CHECK(oracles::multiset_distance(rep.eigenvalues, roots) < 1e-7);
    }
}

TEST_CASE("reversing the pencil negates the spectrum") {
    std::mt19937_64 rng(19);
    for (int inst = 0; inst < 5; ++inst) {
        const Index n = 1 + static_cast<Index>(rng() % 6);
        const Index rank = static_cast<Index>(rng() % (n + 1));
        const Pencil p = generate_regular(n, rank, 400 + inst);

        auto fwd = spectrum(p).eigenvalues;
        for (auto& ev : fwd) ev = -ev;
        const auto bwd = spectrum(reversed(p)).eigenvalues;
        CHECK(oracles::multiset_distance(fwd, bwd) < 1e-8);
    }
}

TEST_CASE("resolvent norm probe stays bounded at large radii") {
    Eigen::Vector2d diag(1.0, 2.0);
    const Pencil p(Matrix::Identity(2, 2), diag.asDiagonal().toDenseMatrix().cast<Complex>());
    const auto f = block_factorize(p);

    // spectrum {-1, -2}: on |z| = 6 the distance to the spectrum is at least 4
    const double probe1 = resolvent_bound_probe(f, 6.0);
    const double probe2 = resolvent_bound_probe(f, 24.0);
    CHECK(probe1 <= 0.25 + 1e-12);
    CHECK(probe2 <= 4.0 * probe1);  // no growth with the radius

    CHECK_THROWS_AS(resolvent_bound_probe(f, 2.5), InvalidArgumentError);

    // rank-deficient m0: the resolvent tends to a nonzero constant, so probes
    // far out agree within a factor of 2 in both directions
    const auto f2 = block_factorize(support::example_2x2());
    const double q1 = resolvent_bound_probe(f2, 100.0);
    const double q2 = resolvent_bound_probe(f2, 400.0);
    CHECK(q2 <= 2.0 * q1);
    CHECK(q1 <= 2.0 * q2);
}

TEST_CASE("generate_regular is deterministic in the seed") {
    const Pencil a = generate_regular(5, 3, 42);
    const Pencil b = generate_regular(5, 3, 42);
    CHECK(a.m0 == b.m0);
    CHECK(a.m1 == b.m1);

    const Pencil c = generate_regular(5, 3, 43);
    CHECK(a.m1 != c.m1);
}

TEST_CASE("generate_regular plants rank and spectrum") {
    const std::vector<Complex> hint{Complex(-2.0, 0.5), Complex(1.0, -1.0), Complex(-0.5, 0.0)};
    const Pencil p = generate_regular(6, 3, 7, hint);

    const auto rep = is_regular(p);
    CHECK(rep.regular);
    CHECK(rep.rank == 3);

    const auto spec = spectrum(p);
    CHECK(oracles::multiset_distance(spec.eigenvalues, hint) < 1e-10);

    // m0 is Hermitian positive semidefinite by construction
    CHECK((p.m0 - p.m0.adjoint()).norm() == 0.0);
}

TEST_CASE("generate_regular validates rank and hint") {
    CHECK_THROWS_AS(generate_regular(3, 4, 0), BadRankError);
    CHECK_THROWS_AS(generate_regular(0, 0, 0), BadRankError);
    CHECK_THROWS_AS(generate_regular(3, 2, 0, {Complex(1.0)}), BadRankError);
}

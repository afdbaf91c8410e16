#include <cmath>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "daepencil/expm.hpp"
#include "test_support.hpp"

using namespace daepencil;

namespace {

// Jordan block: defective, so the eigen path must refuse it.
Matrix jordan(Index n, Complex lambda) {
    Matrix j = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) j(i, i) = lambda;
    for (Index i = 0; i + 1 < n; ++i) j(i, i + 1) = Complex(1, 0);
    return j;
}

// exp(t J) for a Jordan block has the truncated power series on the
// superdiagonals; exact up to the scalar exponential factor.
Matrix jordan_exp(Index n, Complex lambda, double t) {
    Matrix e = Matrix::Zero(n, n);
    const Complex scale = std::exp(t * lambda);
    for (Index i = 0; i < n; ++i) {
        double fact = 1.0;
        for (Index k = 0; i + k < n; ++k) {
            if (k > 0) fact *= static_cast<double>(k);
            e(i, i + k) = scale * std::pow(t, static_cast<double>(k)) / fact;
        }
    }
    return e;
}

}  // namespace

TEST_CASE("expm reproduces closed forms") {
    const Matrix z = Matrix::Zero(3, 3);
    REQUIRE((expm(z).value - Matrix::Identity(3, 3)).norm() < 1e-15);

    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = Complex(-1, 0);
    d(1, 1) = Complex(2, 0);
    const Matrix ed = expm(d, 1.0).value;
    REQUIRE(std::abs(ed(0, 0) - std::exp(Complex(-1, 0))) < 1e-14);
    REQUIRE(std::abs(ed(1, 1) - std::exp(Complex(2, 0))) < 1e-14);
    REQUIRE(std::abs(ed(0, 1)) < 1e-14);

    Matrix nil = Matrix::Zero(2, 2);
    nil(0, 1) = Complex(1, 0);
    const Matrix en = expm(nil, 1.0).value;
    REQUIRE(std::abs(en(0, 0) - Complex(1, 0)) < 1e-13);
    REQUIRE(std::abs(en(0, 1) - Complex(1, 0)) < 1e-13);
    REQUIRE(std::abs(en(1, 0)) < 1e-13);
    REQUIRE(std::abs(en(1, 1) - Complex(1, 0)) < 1e-13);
}

TEST_CASE("expm validates its inputs") {
    REQUIRE_THROWS_AS(expm(Matrix::Zero(2, 3)), NonSquareError);
    REQUIRE_THROWS_AS(expm(Matrix::Identity(2, 2), std::nan("")), InvalidArgumentError);
    Matrix big = 800.0 * Matrix::Identity(2, 2);
    REQUIRE_THROWS_AS(expm(big, 1.0), OverflowError);
    const auto empty = expm(Matrix(0, 0));
    REQUIRE(empty.value.size() == 0);
}

TEST_CASE("pade path squares as often as the norm requires") {
    // A defective block forces the Pade ladder; with norm about 80 it has to
    // halve four times to get under theta_13.
    const Matrix j = jordan(4, Complex(3, 0));
    const auto r = expm(j, 20.0);
    REQUIRE(r.scaling_squaring_order == 4);
    const Matrix ref = jordan_exp(4, Complex(3, 0), 20.0);
    REQUIRE((r.value - ref).norm() < 1e-10 * ref.norm());
}

TEST_CASE("pade path is self-consistent under time splitting") {
    const Matrix j = jordan(5, Complex(-0.3, 0.7));
    const Matrix whole = expm(j, 2.0).value;
    const Matrix half = expm(j, 1.0).value;
    REQUIRE((whole - half * half).norm() < 1e-12 * (1.0 + whole.norm()));
}

TEST_CASE("normal matrices hit the eigen path and machine accuracy") {
    std::mt19937_64 rng(4242);
    for (int trial = 0; trial < 10; ++trial) {
        const Index n = 2 + static_cast<Index>(rng() % 5);
        const Matrix q = support::unitary(n, rng);
        Vector lam(n);
        for (Index i = 0; i < n; ++i) {
            lam(i) = Complex(-2.0 + 2.0 * support::uniform(rng), support::uniform(rng));
        }
        const Matrix a = q * lam.asDiagonal() * q.adjoint();
        const double t = 5.0 * support::uniform(rng);
        const auto r = expm(a, t);
        REQUIRE(r.scaling_squaring_order == 0);
        Vector el(n);
        for (Index i = 0; i < n; ++i) el(i) = std::exp(t * lam(i));
        const Matrix ref = q * el.asDiagonal() * q.adjoint();
        REQUIRE((r.value - ref).norm() < 1e-12 * (1.0 + ref.norm()));
    }
}

TEST_CASE("semigroup law on stable generators") {
    std::mt19937_64 rng(515151);
    for (int trial = 0; trial < 8; ++trial) {
        const Index n = 2 + static_cast<Index>(rng() % 4);
        Matrix a = support::gaussian(n, n, rng) * 0.4;
        a -= 1.2 * Matrix::Identity(n, n);
        const double s = 5.0 * support::uniform(rng);
        const double t = 5.0 * support::uniform(rng);
        const Matrix joint = expm(a, s + t).value;
        const Matrix split = expm(a, s).value * expm(a, t).value;
        REQUIRE((joint - split).norm() < 1e-10);
    }
}

TEST_CASE("propagator matches expm on both paths") {
    std::mt19937_64 rng(808);
    const Matrix a = support::gaussian(4, 4, rng);
    const Propagator prop(a);
    REQUIRE(prop.uses_eigen_path());
    for (double t : {0.0, 0.3, 1.7}) {
        REQUIRE((prop.at(t) - expm(a, t).value).norm() < 1e-11 * (1.0 + prop.at(t).norm()));
        const Vector x = support::gaussian_vector(4, rng);
        REQUIRE((prop.apply(t, x) - prop.at(t) * x).norm() < 1e-11 * (1.0 + x.norm()));
    }

    const Matrix j = jordan(3, Complex(0.2, 0));
    const Propagator pj(j);
    REQUIRE_FALSE(pj.uses_eigen_path());
    const Matrix ref = jordan_exp(3, Complex(0.2, 0), 1.5);
    REQUIRE((pj.at(1.5) - ref).norm() < 1e-12 * ref.norm());
    REQUIRE(pj.abscissa() == Catch::Approx(0.2).margin(1e-10));

    const Propagator empty{Matrix(0, 0)};
    REQUIRE(empty.dim() == 0);
    REQUIRE(empty.at(1.0).size() == 0);
}

#include <cmath>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "daepencil/consistent_iv.hpp"
#include "daepencil/pencil.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace daepencil;

TEST_CASE("iv space of the worked 2x2 example") {
    const Pencil p = support::example_2x2();
    const auto f = block_factorize(p);
    const auto iv = compute_iv(f);

    REQUIRE(iv.dim() == 1);
    REQUIRE(iv.ambient_dim() == 2);

    // IV = span{(1, -2)}.
    Vector v(2);
    v << Complex(1, 0), Complex(-2, 0);
    REQUIRE(subspace_contains(iv.basis, v));
    REQUIRE(std::abs(iv.basis.basis.col(0).norm() - 1.0) < 1e-14);

    // The coupling map sends x to -2x; bases carry a phase, moduli do not.
    REQUIRE(iv.coupling.rows() == 1);
    REQUIRE(iv.coupling.cols() == 1);
    REQUIRE(std::abs(std::abs(iv.coupling(0, 0)) - 2.0) < 1e-12);
    REQUIRE(std::abs(std::abs(iv.b(0, 0)) - 1.0) < 1e-12);
    REQUIRE(std::abs(std::abs(iv.c(0, 0)) - 2.0) < 1e-12);

    // G is scalar and phase-free: u(t) = e^{-t} u(0) on IV.
    REQUIRE(iv.generator_g.rows() == 1);
    REQUIRE(std::abs(iv.generator_g(0, 0) - Complex(1, 0)) < 1e-12);
    REQUIRE(std::abs(std::abs(iv.iso_k(0, 0)) - 1.0 / std::sqrt(5.0)) < 1e-12);

    const auto gen_spec = generator_spectrum(iv);
    REQUIRE(gen_spec.size() == 1);
    REQUIRE(std::abs(gen_spec[0] - Complex(-1, 0)) < 1e-12);
}

TEST_CASE("invertible m0 gives the full space and recovers m1") {
    std::mt19937_64 rng(501);
    const Matrix m0 = support::gaussian(3, 3, rng) + 4.0 * Matrix::Identity(3, 3);
    const Matrix m1 = support::gaussian(3, 3, rng);
    const auto f = block_factorize(Pencil(m0, m1));
    const auto iv = compute_iv(f);

    REQUIRE(iv.dim() == 3);
    REQUIRE(iv.coupling.rows() == 0);
    REQUIRE(iv.b.size() == 0);

    // With IV = C^n the defining relation reads M0 (iota G iota^*) = M1.
    const Matrix recovered =
        m0 * iv.basis.basis * iv.generator_g * iv.basis.basis.adjoint();
    REQUIRE((recovered - m1).norm() < 1e-10 * m1.norm());

    // K is a square isometry here.
    const Matrix k_gram = iv.iso_k.adjoint() * iv.iso_k;
    REQUIRE((k_gram - Matrix::Identity(3, 3)).norm() < 1e-12);

    const Vector any = support::gaussian_vector(3, rng);
    REQUIRE(iv_membership(iv, any));
}

TEST_CASE("vanishing coupling block leaves iv equal to the conull space") {
    Matrix m0 = Matrix::Zero(2, 2);
    m0(0, 0) = Complex(1, 0);
    const Matrix m1 = Matrix::Identity(2, 2);
    const auto f = block_factorize(Pencil(m0, m1));
    const auto iv = compute_iv(f);

    REQUIRE(iv.dim() == 1);
    REQUIRE(op_norm(iv.coupling) < 1e-14);
    Vector e1(2);
    e1 << Complex(1, 0), Complex(0, 0);
    REQUIRE(subspace_contains(iv.basis, e1));
    REQUIRE(std::abs(iv.generator_g(0, 0) - Complex(1, 0)) < 1e-14);

    // C = 0 puts all of N(M0)^perp inside IV; the intersection is the whole
    // of N(M0)^perp, so it is anything but trivial.
    const auto preds = iv_structure_predicates(f);
    REQUIRE(preds.nbot_subset_iv);
    REQUIRE_FALSE(preds.iv_meets_nbot_trivially);
}

TEST_CASE("zero m0 gives the trivial iv space") {
    const Matrix m0 = Matrix::Zero(2, 2);
    Matrix m1(2, 2);
    m1 << Complex(2, 0), Complex(1, 0), Complex(0, 0), Complex(1, 0);
    const auto f = block_factorize(Pencil(m0, m1));
    const auto iv = compute_iv(f);

    REQUIRE(iv.dim() == 0);
    REQUIRE(iv.generator_g.size() == 0);
    REQUIRE(generator_spectrum(iv).empty());

    Vector zero = Vector::Zero(2);
    Vector e1(2);
    e1 << Complex(1, 0), Complex(0, 0);
    REQUIRE(iv_membership(iv, zero));
    REQUIRE_FALSE(iv_membership(iv, e1));
}

TEST_CASE("membership on the worked example") {
    const auto f = block_factorize(support::example_2x2());
    const auto iv = compute_iv(f);

    Vector in(2), out(2);
    in << Complex(1, 0), Complex(-2, 0);
    out << Complex(1, 0), Complex(0, 0);
    REQUIRE(iv_membership(iv, in));
    REQUIRE_FALSE(iv_membership(iv, out));
    REQUIRE(iv_membership(iv, Vector::Zero(2)));

    // Near-members on the tolerance boundary resolve by the relative distance.
    Vector close = in + 1e-13 * out;
    REQUIRE(iv_membership(iv, close));

    Vector wrong_size(3);
    wrong_size.setZero();
    REQUIRE_THROWS_AS(iv_membership(iv, wrong_size), DimensionMismatchError);
    REQUIRE_THROWS_AS(iv_membership(iv, in, 0.0), DegenerateToleranceError);
}

TEST_CASE("a corrupted iv space is refused by the cross-check") {
    const auto f = block_factorize(support::example_2x2());
    auto iv = compute_iv(f);

    // Overwrite the basis with a line that is far from the true IV.  The two
    // membership routes then disagree far beyond their equivalence band.
    Matrix bogus(2, 1);
    bogus << Complex(1, 0), Complex(0, 0);
    iv.basis.basis = bogus;

    Vector probe(2);
    probe << Complex(1, 0), Complex(-2, 0);
    REQUIRE_THROWS_AS(iv_membership(iv, probe), InternalInconsistencyError);
}

TEST_CASE("structure predicates distinguish the regimes") {
    // Injective nonzero C: IV meets N(M0)^perp only in 0 but does not contain it.
    const auto f_generic = block_factorize(support::example_2x2());
    const auto p_generic = iv_structure_predicates(f_generic);
    REQUIRE_FALSE(p_generic.nbot_subset_iv);
    REQUIRE(p_generic.iv_meets_nbot_trivially);

    // Full-rank m0: C is the empty map, both predicates hold by convention.
    Matrix one(1, 1);
    one << Complex(1, 0);
    const auto f_ode = block_factorize(Pencil(one, one));
    const auto p_ode = iv_structure_predicates(f_ode);
    REQUIRE(p_ode.nbot_subset_iv);
    REQUIRE(p_ode.iv_meets_nbot_trivially);

    // Wide nonzero C: rank 2 with a single corange direction, so C has a
    // kernel by shape and is neither zero nor injective.
    Matrix m0 = Matrix::Zero(3, 3);
    m0(0, 0) = Complex(1, 0);
    m0(1, 1) = Complex(1, 0);
    Matrix m1 = Matrix::Identity(3, 3);
    m1(2, 0) = Complex(0.4, 0);
    const auto f_wide = block_factorize(Pencil(m0, m1));
    REQUIRE(f_wide.c.rows() == 1);
    REQUIRE(f_wide.c.cols() == 2);
    const auto p_wide = iv_structure_predicates(f_wide);
    REQUIRE_FALSE(p_wide.nbot_subset_iv);
    REQUIRE_FALSE(p_wide.iv_meets_nbot_trivially);
}

TEST_CASE("iv invariants hold across random regular pencils") {
    std::mt19937_64 seeder(7301);
    for (int trial = 0; trial < 24; ++trial) {
        const Index n = 1 + static_cast<Index>(seeder() % 10);
        const Index rank = static_cast<Index>(seeder() % (static_cast<std::uint64_t>(n) + 1));
        const std::uint64_t seed = seeder();
        const Pencil p = generate_regular(n, rank, seed);
        const auto f = block_factorize(p);
        const auto iv = compute_iv(f);
        const double m1_norm = op_norm(p.m1);

        REQUIRE(iv.dim() == f.rank);
        REQUIRE(std::isfinite(iv.gram_cond));

        if (iv.dim() == 0) continue;

        // Orthonormality of the returned basis.
        const Matrix gram = iv.basis.basis.adjoint() * iv.basis.basis;
        REQUIRE((gram - Matrix::Identity(iv.dim(), iv.dim())).norm() < 1e-12);

        // Graph consistency: every basis column satisfies M1 v in ran M0.
        for (Index j = 0; j < iv.dim(); ++j) {
            const Vector v = iv.basis.basis.col(j);
            const Vector defect = f.decomp.corange_m0.basis.adjoint() * (p.m1 * v);
            REQUIRE(defect.norm() <= 1e-10 * std::max(m1_norm, 1.0));
        }

        // K intertwines the two generators: K (-G) = A K.
        const Matrix lhs = iv.iso_k * (-iv.generator_g);
        const Matrix rhs = f.reduced_generator_a * iv.iso_k;
        const double scale = std::max(op_norm(f.reduced_generator_a) * op_norm(iv.iso_k), 1e-3);
        REQUIRE((lhs - rhs).norm() <= 1e-10 * scale);

        // sigma(-G) equals the pencil spectrum as a multiset.
        if (n <= 7) {
            const auto from_g = generator_spectrum(iv);
            const auto from_a = spectrum(f).eigenvalues;
            REQUIRE(oracles::multiset_distance(from_g, from_a) < 1e-8);
        }

        // Membership: combinations of basis columns are in, perturbations
        // along N(M0) are out.
        std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
        const Vector coeff = support::gaussian_vector(iv.dim(), rng);
        const Vector member = iv.basis.basis * coeff;
        REQUIRE(iv_membership(iv, member));
        if (f.rank < n && member.norm() > 1e-6) {
            const Vector off =
                member + 0.1 * member.norm() * f.decomp.null_m0.basis.col(0);
            REQUIRE_FALSE(iv_membership(iv, off));
        }
    }
}

TEST_CASE("planted spectra propagate to the generator on iv") {
    const std::vector<Complex> hint{Complex(-1, 0), Complex(-2, 1), Complex(0.5, -1)};
    const Pencil p = generate_regular(5, 3, 99, hint);
    const auto f = block_factorize(p);
    const auto iv = compute_iv(f);
    const auto got = generator_spectrum(iv);
    std::vector<Complex> want = hint;
    std::sort(want.begin(), want.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    REQUIRE(oracles::multiset_distance(got, want) < 1e-9);
}

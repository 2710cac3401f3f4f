#include <catch2/catch_amalgamated.hpp>

#include <qhier/hspec.hpp>

#include "oracles.hpp"

using namespace qhier;
using namespace qhier::hspec;

namespace {

KLocalHamiltonian random_model(Rng& rng, int n, int d, int max_k)
{
    KLocalHamiltonian h;
    h.n = n;
    h.d = d;
    int m = 1 + static_cast<int>(rng.below(5));
    for (int t = 0; t < m; ++t) {
        int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(max_k, n))));
        std::vector<int> sites;
        while (static_cast<int>(sites.size()) < k) {
            int s = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
            if (std::find(sites.begin(), sites.end(), s) == sites.end())
                sites.push_back(s);
        }
        std::int64_t dim = 1;
        for (int a = 0; a < k; ++a)
            dim *= d;
        LocalTerm term;
        term.sites = sites;
        term.matrix = random_hermitian(dim, rng);
        term.label = "t" + std::to_string(t);
        h.terms.push_back(std::move(term));
        h.k = std::max(h.k, k);
    }
    return h;
}

} // namespace

TEST_CASE("parse a single-site Pauli term")
{
    auto res = parse_spec("sites 2 2\nterm [0] Z\n");
    REQUIRE(res.ok());
    REQUIRE(res.model->terms.size() == 1);
    CHECK(res.model->n == 2);
    CHECK(res.model->d == 2);
    CHECK(res.model->k == 1);
    CHECK(res.model->terms[0].sites == std::vector<int>{0});
    CHECK(max_abs(res.model->terms[0].matrix.mat() - pauli_z().mat()) == 0.0);
}

TEST_CASE("parse a weighted two-site Pauli string")
{
    auto res = parse_spec("sites 2 2\nterm [0,1] XX 0.5\n");
    REQUIRE(res.ok());
    Matrix expect = 0.5 * oracle::kron_naive(pauli_x().mat(), pauli_x().mat());
    CHECK(max_abs(res.model->terms[0].matrix.mat() - expect) == 0.0);
    CHECK(res.model->k == 2);
}

TEST_CASE("parse a mat block with complex entries")
{
    auto res = parse_spec(
        "sites 1 2\n"
        "term [0] mat  # comment after op\n"
        "1 0.5-0.5i\n"
        "0.5+0.5i -1\n");
    REQUIRE(res.ok());
    const Operator& m = res.model->terms[0].matrix;
    CHECK(m(0, 1) == cxd(0.5, -0.5));
    CHECK(m(1, 0) == cxd(0.5, 0.5));
}

TEST_CASE("parse accepts CRLF and comments")
{
    auto res = parse_spec("# header comment\r\nsites 2 2\r\nterm [1] X 2.0\r\n");
    REQUIRE(res.ok());
    CHECK(res.model->terms[0].sites == std::vector<int>{1});
}

TEST_CASE("parse diagnostics carry positions")
{
    auto res = parse_spec("");
    REQUIRE_FALSE(res.ok());
    CHECK(res.diagnostics[0].message.find("missing sites header") != std::string::npos);

    res = parse_spec("sites 2 2\nterm [5] Z\n");
    REQUIRE_FALSE(res.ok());
    CHECK(res.diagnostics[0].line == 2);
    CHECK(res.diagnostics[0].message.find("out of range") != std::string::npos);

    res = parse_spec("sites 2 2\nterm [0] Q\n");
    REQUIRE_FALSE(res.ok());
    CHECK(res.diagnostics[0].message.find("unknown operator") != std::string::npos);

    res = parse_spec("sites 1 2\nterm [0] mat\n1 2i\n0 1\n");
    REQUIRE_FALSE(res.ok());
    CHECK(res.diagnostics[0].message.find("not hermitian") != std::string::npos);

    res = parse_spec("sites 3 3\nterm [0] X\n");
    REQUIRE_FALSE(res.ok());
    CHECK(res.diagnostics[0].message.find("d = 2") != std::string::npos);
}

TEST_CASE("render then parse reproduces the model entrywise")
{
    Rng rng = Rng(11).stream("roundtrip");
    for (int trial = 0; trial < 50; ++trial) {
        int d = 2 + static_cast<int>(rng.below(2));
        int n = 2 + static_cast<int>(rng.below(3));
        KLocalHamiltonian h = random_model(rng, n, d, 2);
        auto res = parse_spec(render(h));
        REQUIRE(res.ok());
        REQUIRE(res.model->terms.size() == h.terms.size());
        CHECK(res.model->n == h.n);
        CHECK(res.model->d == h.d);
        for (std::size_t i = 0; i < h.terms.size(); ++i) {
            CHECK(res.model->terms[i].sites == h.terms[i].sites);
            CHECK(max_abs(res.model->terms[i].matrix.mat() - h.terms[i].matrix.mat()) <
                  1e-15);
        }
    }
}

TEST_CASE("validate flags nothing on a Heisenberg chain")
{
    auto h = heisenberg_model(4, 2, chain_edges(4), {.coupling_scale = 1.0, .field_scale = 0.3});
    CHECK(validate(h).empty());
}

TEST_CASE("validate pinpoints one term per issue")
{
    auto h = heisenberg_model(3, 2, chain_edges(3));
    Matrix bad(2, 2);
    bad << 0, 1, 0, 0;
    h.terms[1].matrix = Operator(std::move(bad));
    auto issues = validate(h);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].term_index == 1);
    CHECK(issues[0].invariant == "hermitian");

    h = heisenberg_model(3, 2, chain_edges(3));
    h.terms[2].sites = {3};
    issues = validate(h);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].term_index == 2);
    CHECK(issues[0].invariant == "site_range");
}

TEST_CASE("group_by_locality partitions the terms")
{
    auto h = heisenberg_model(4, 2, chain_edges(4));
    auto groups = group_by_locality(h);
    REQUIRE(groups.size() == 2);
    CHECK(groups[1].size() == 4);
    CHECK(groups[2].size() == 3);

    auto h1 = heisenberg_model(3, 2, {});
    auto g1 = group_by_locality(h1);
    REQUIRE(g1.size() == 1);
    CHECK(g1[1].size() == 3);

    KLocalHamiltonian empty;
    empty.n = 2;
    empty.d = 2;
    CHECK(group_by_locality(empty).empty());
}

TEST_CASE("assemble_full of one Z term")
{
    auto res = parse_spec("sites 2 2\nterm [0] Z\n");
    REQUIRE(res.ok());
    Vector d0(4);
    d0 << 1, 1, -1, -1;
    CHECK(max_abs(assemble_full(*res.model).mat() - Matrix(d0.asDiagonal())) == 0.0);
}

TEST_CASE("assemble_full sums commuting 1-local terms")
{
    auto res = parse_spec("sites 2 2\nterm [0] Z\nterm [1] Z\n");
    REQUIRE(res.ok());
    Vector d(4);
    d << 2, 0, 0, -2;
    CHECK(max_abs(assemble_full(*res.model).mat() - Matrix(d.asDiagonal())) == 0.0);
}

TEST_CASE("Heisenberg n=3 ground energy matches a hand-assembled matrix")
{
    const double j = 1.0, hz = 0.4;
    auto model = heisenberg_model(3, 2, chain_edges(3),
                                  {.coupling_scale = j, .field_scale = hz});
    Operator assembled = assemble_full(model);

    // independent assembly: explicit kron chains
    Matrix i2 = Matrix::Identity(2, 2);
    Matrix x = pauli_x().mat(), y = pauli_y().mat(), z = pauli_z().mat();
    auto three = [&](const Matrix& a, const Matrix& b, const Matrix& c) {
        return oracle::kron_naive(oracle::kron_naive(a, b), c);
    };
    Matrix ref = hz * (three(z, i2, i2) + three(i2, z, i2) + three(i2, i2, z));
    ref += j * (three(x, x, i2) + three(y, y, i2) + three(z, z, i2));
    ref += j * (three(i2, x, x) + three(i2, y, y) + three(i2, z, z));

    Eigen::SelfAdjointEigenSolver<Matrix> es_lib(assembled.mat());
    Eigen::SelfAdjointEigenSolver<Matrix> es_ref(ref);
    CHECK(std::abs(es_lib.eigenvalues()(0) - es_ref.eigenvalues()(0)) < 1e-12);
    CHECK(max_abs(assembled.mat() - ref) < 1e-12);
}

TEST_CASE("assemble_full is robust to summation order")
{
    Rng rng = Rng(11).stream("sum-order");
    KLocalHamiltonian h = random_model(rng, 4, 2, 3);
    Operator direct = assemble_full(h);

    KLocalHamiltonian grouped = h;
    grouped.terms.clear();
    for (auto& [k, idxs] : group_by_locality(h))
        for (auto i : idxs)
            grouped.terms.push_back(h.terms[i]);
    CHECK(max_abs(direct.mat() - assemble_full(grouped).mat()) < 1e-12);
}

TEST_CASE("embedding a term to higher locality")
{
    LocalTerm t{{0}, pauli_z(), "z0"};
    LocalTerm lifted = embed_in_higher_locality(t, 2, {1}, 2);
    CHECK(lifted.sites == std::vector<int>{0, 1});
    CHECK(max_abs(lifted.matrix.mat() -
                  oracle::kron_naive(pauli_z().mat(), Matrix::Identity(2, 2))) == 0.0);

    // assembled Hamiltonian and energies unchanged
    SpaceShape shape = SpaceShape::uniform(3, 2);
    Rng rng = Rng(11).stream("embed-energy");
    for (int trial = 0; trial < 10; ++trial) {
        StateVector psi = random_state(8, rng);
        cxd before = expectation(psi, embed_local(t.matrix, t.sites, shape));
        cxd after = expectation(psi, embed_local(lifted.matrix, lifted.sites, shape));
        CHECK(std::abs(before - after) < 1e-12);
    }

    // double embedding equals direct embedding
    LocalTerm twice = embed_in_higher_locality(lifted, 3, {2}, 2);
    LocalTerm direct = embed_in_higher_locality(t, 3, {1, 2}, 2);
    CHECK(twice.sites == direct.sites);
    CHECK(max_abs(twice.matrix.mat() - direct.matrix.mat()) == 0.0);

    CHECK_THROWS_AS(embed_in_higher_locality(t, 2, {0}, 2), argument_error);
}

TEST_CASE("heisenberg singlet energy at n=2")
{
    auto model = heisenberg_model(2, 2, chain_edges(2));
    auto eigs = spectrum(assemble_full(model));
    CHECK(std::abs(eigs.front() - (-3.0)) < 1e-12);
}

TEST_CASE("heisenberg builder shapes")
{
    auto single = heisenberg_model(1, 2, {});
    CHECK(single.terms.size() == 1);
    CHECK(single.k == 1);

    auto ring = heisenberg_model(4, 2, chain_edges(4, true));
    auto counts = ring.locality_counts();
    CHECK(counts[1] == 4);
    CHECK(counts[2] == 4);

    CHECK_THROWS_AS(heisenberg_model(2, 3, chain_edges(2)), argument_error);
    CHECK_THROWS_AS(heisenberg_model(2, 2, {{0, 2}}), argument_error);
}

#include <catch2/catch_amalgamated.hpp>

#include <qhier/open.hpp>

#include "oracles.hpp"

using namespace qhier;
using namespace qhier::opendyn;

namespace {

Operator sigma_minus()
{
    Matrix m(2, 2);
    m << 0, 1, 0, 0; // |0><1|
    return Operator(std::move(m));
}

LindbladModel damped_qubit(double gamma, double omega = 0.0)
{
    return LindbladModel(Operator(Matrix(omega * pauli_z().mat())),
                         {{sigma_minus(), gamma}});
}

Operator excited_rho()
{
    Matrix m = Matrix::Zero(2, 2);
    m(1, 1) = 1.0;
    return Operator(std::move(m));
}

} // namespace

TEST_CASE("lindblad with no dissipators matches unitary conjugation")
{
    Rng rng = Rng(55).stream("unitary-limit");
    Operator h = random_hermitian(3, rng);
    Operator rho0 = random_density(3, 2, rng);
    LindbladModel m(h);
    const double t = 1.2;
    Operator rho = lindblad_evolve(m, rho0, t);
    Matrix u = propagator(h, t).mat();
    Matrix expect = u * rho0.mat() * u.adjoint();
    CHECK(max_abs(rho.mat() - expect) < 1e-9);
}

TEST_CASE("amplitude damping follows the closed form")
{
    const double gamma = 1.0;
    LindbladModel m = damped_qubit(gamma);
    Operator rho0 = excited_rho();
    for (double t : {0.3, 1.0, 2.5}) {
        Operator rho = lindblad_evolve(m, rho0, t);
        CHECK(std::abs(rho(1, 1).real() - std::exp(-gamma * t)) < 1e-9);
        CHECK(std::abs(rho.mat().trace().real() - 1.0) < 1e-8);
        Eigen::SelfAdjointEigenSolver<Matrix> es(rho.mat(), Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues()(0) > -1e-8);
    }

    // coherence decays at gamma/2
    Matrix plus(2, 2);
    plus << 0.5, 0.5, 0.5, 0.5;
    Operator rho_plus = lindblad_evolve(m, Operator(std::move(plus)), 1.0);
    CHECK(std::abs(rho_plus(0, 1).real() - 0.5 * std::exp(-0.5)) < 1e-8);
}

TEST_CASE("amplitude damping reaches its fixed point")
{
    LindbladModel m = damped_qubit(1.0);
    Operator rho = lindblad_evolve(m, excited_rho(), 20.0);
    Matrix ground = Matrix::Zero(2, 2);
    ground(0, 0) = 1.0;
    CHECK(max_abs(rho.mat() - ground) < 1e-6);
}

TEST_CASE("lindblad_evolve validates the input state")
{
    LindbladModel m = damped_qubit(1.0);
    Matrix bad = Matrix::Identity(2, 2); // trace 2
    CHECK_THROWS_AS(lindblad_evolve(m, Operator(std::move(bad)), 1.0), validation_error);
}

TEST_CASE("second-quantized observable lift: unitary reduction at gamma = 0")
{
    Rng rng = Rng(55).stream("lift-unitary");
    fock::FockSpace space(2, fock::Statistics::fermion);
    LindbladModel m(random_hermitian(2, rng));
    CHECK(second_quantized_lindblad_observable(m, random_hermitian(2, rng), space) <
          1e-12);
}

TEST_CASE("second-quantized observable lift for the damped qubit")
{
    fock::FockSpace space(2, fock::Statistics::fermion);
    LindbladModel m = damped_qubit(1.0, 0.5);
    CHECK(second_quantized_lindblad_observable(m, pauli_z(), space) < 1e-12);
}

TEST_CASE("second-quantized observable lift on random boson models")
{
    Rng rng = Rng(55).stream("lift-boson");
    fock::FockSpace space(3, fock::Statistics::boson, 3);
    for (int trial = 0; trial < 10; ++trial) {
        LindbladModel m(random_hermitian(3, rng),
                        {{Operator(Matrix(random_hermitian(3, rng).mat() +
                                          cxd(0, 1) * random_hermitian(3, rng).mat())),
                          0.3 + rng.uniform()}});
        CHECK(second_quantized_lindblad_observable(m, random_hermitian(3, rng), space) <
              1e-10);
    }
}

TEST_CASE("second-quantized state lift residuals")
{
    Rng rng = Rng(55).stream("state-lift");
    fock::FockSpace base(2, fock::Statistics::fermion);

    // gamma = 0 reduces to the unitary (von Neumann) identity
    {
        Vector plus(2);
        plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
        auto st = fock::second_quantize_state(StateVector(plus), base);
        LindbladModel m(pauli_z());
        CHECK(second_quantized_lindblad_state(m, st) < 1e-12);
        CHECK(fock::von_neumann_residual(st, pauli_z()).max() < 1e-12);
    }

    // pure |1> under damping
    {
        auto st = fock::second_quantize_state(StateVector::basis(2, 1), base);
        LindbladModel m = damped_qubit(0.8);
        CHECK(second_quantized_lindblad_state(m, st) < 1e-10);
    }

    // rank-2 mixed states, both statistics
    for (auto stat : {fock::Statistics::fermion, fock::Statistics::boson}) {
        fock::FockSpace b(2, stat, 2);
        auto st = fock::second_quantize_state(random_density(2, 2, rng), b);
        LindbladModel m(random_hermitian(2, rng), {{sigma_minus(), 0.7}});
        CHECK(second_quantized_lindblad_state(m, st) < 1e-10);
    }
}

TEST_CASE("kraus maps: identity, unitary, duality")
{
    Rng rng = Rng(55).stream("kraus");

    KrausMap identity({Operator::identity(3)});
    CHECK(identity.trace_preserving());
    Operator rho = random_density(3, 2, rng);
    CHECK(max_abs(kraus_apply_state(identity, rho).mat() - rho.mat()) == 0.0);

    Operator u = propagator(random_hermitian(3, rng), 0.9);
    KrausMap rotation({u});
    CHECK(rotation.trace_preserving(1e-12));
    Matrix expect = u.mat() * rho.mat() * u.mat().adjoint();
    CHECK(max_abs(kraus_apply_state(rotation, rho).mat() - expect) < 1e-14);

    // duality tr(E(rho) O) = tr(rho E^dag(O)) for a damping channel
    double p = 0.3;
    Matrix k0(2, 2), k1(2, 2);
    k0 << 1, 0, 0, std::sqrt(1.0 - p);
    k1 << 0, std::sqrt(p), 0, 0;
    KrausMap damp({Operator(std::move(k0)), Operator(std::move(k1))});
    CHECK(damp.trace_preserving(1e-12));
    for (int trial = 0; trial < 20; ++trial) {
        Operator r = random_density(2, 2, rng);
        Operator o = random_hermitian(2, rng);
        cxd lhs = (kraus_apply_state(damp, r).mat() * o.mat()).trace();
        cxd rhs = (r.mat() * kraus_apply_observable(damp, o).mat()).trace();
        CHECK(std::abs(lhs - rhs) < 1e-12);
    }

    Matrix sub(2, 2);
    sub << 0.5, 0, 0, 0.5;
    CHECK_FALSE(KrausMap({Operator(std::move(sub))}).trace_preserving());
}

TEST_CASE("kraus maps lift to the second-quantized pictures")
{
    Rng rng = Rng(55).stream("kraus-lift");
    fock::FockSpace base(2, fock::Statistics::fermion);
    Operator u = propagator(random_hermitian(2, rng), 0.4);
    KrausMap rotation({u});

    // observable picture: coefficient transforms as K^dag O K
    Operator o = random_hermitian(2, rng);
    auto oo = fock::second_quantize_observable(o, base);
    auto mapped = kraus_apply_fock_observable(rotation, oo);
    Matrix expect_coeff = u.mat().adjoint() * o.mat() * u.mat();
    CHECK(max_abs(*mapped.quadratic_source - expect_coeff) < 1e-14);

    // state picture: unitary conjugation of varrho on the joint space
    auto st = fock::second_quantize_state(random_density(2, 2, rng), base);
    Operator out = kraus_apply_varrho(rotation, st);
    CHECK(out.hermitian(1e-12));
    CHECK(std::abs(out.mat().trace().real() - st.varrho().mat().trace().real()) < 1e-10);
}

TEST_CASE("sse with gamma = 0 reproduces unitary evolution")
{
    Rng rng = Rng(55).stream("sse0");
    Operator h = random_hermitian(2, rng);
    LindbladModel m(h);
    StateVector psi0 = random_state(2, rng);
    auto ens = sse_ensemble(m, psi0, {0.5, 1.0}, 1e-3, 3, 99);
    CHECK(ens.total_jumps == 0);
    for (const auto& traj : ens.trajectories) {
        Vector exact = evolve_exact(h, psi0, 1.0).vec();
        CHECK((traj.checkpoint_states.back() - exact).cwiseAbs().maxCoeff() < 1e-5);
    }
}

TEST_CASE("sse ensemble matches the damping closed form within 3 sigma")
{
    const double gamma = 1.0;
    const int n_traj = 4000;
    LindbladModel m = damped_qubit(gamma);
    StateVector psi0 = StateVector::basis(2, 1);
    auto ens = sse_ensemble(m, psi0, {0.25, 0.5, 1.0}, 1e-3, n_traj, 7);
    for (std::size_t c = 0; c < ens.times.size(); ++c) {
        double p = std::exp(-gamma * ens.times[c]);
        double sigma = std::sqrt(p * (1.0 - p) / n_traj);
        CHECK(std::abs(ens.mean_rho[c](1, 1).real() - p) < 3.0 * sigma + 1e-6);
    }
    CHECK(ens.max_norm_deviation < 1e-8);

    auto cmp = compare_to_master(ens, m, psi0);
    CHECK(cmp.pass());
    CHECK(cmp.trace_error_max < 1e-10);
}

TEST_CASE("sse is bit-reproducible under a fixed seed")
{
    LindbladModel m = damped_qubit(0.9);
    StateVector psi0 = StateVector::basis(2, 1);
    auto a = sse_ensemble(m, psi0, {0.5}, 1e-2, 50, 1234);
    auto b = sse_ensemble(m, psi0, {0.5}, 1e-2, 50, 1234);
    REQUIRE(a.trajectories.size() == b.trajectories.size());
    CHECK(a.total_jumps == b.total_jumps);
    for (std::size_t t = 0; t < a.trajectories.size(); ++t) {
        const Vector& va = a.trajectories[t].checkpoint_states.back();
        const Vector& vb = b.trajectories[t].checkpoint_states.back();
        CHECK(max_abs(Matrix(va - vb)) == 0.0);
    }
    CHECK(max_abs(Matrix(a.mean_rho[0] - b.mean_rho[0])) == 0.0);
}

TEST_CASE("sse rejects step sizes with large jump probability")
{
    LindbladModel m = damped_qubit(30.0);
    CHECK_THROWS_AS(sse_ensemble(m, StateVector::basis(2, 1), {1.0}, 1e-2, 2, 1),
                    numeric_error);
}

// Acceptance gate: every exit criterion at its pinned tolerance, one pass/fail
// line per criterion.

#include <catch2/catch_amalgamated.hpp>

#include <qhier/eclectic.hpp>
#include <qhier/hierarchy.hpp>
#include <qhier/open.hpp>
#include <qhier/suites.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

using namespace qhier;

namespace {

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void announce(int criterion, const std::string& name, bool pass, double seconds)
{
    std::printf("[acceptance] criterion %d (%s): %s (%.2f s)\n", criterion, name.c_str(),
                pass ? "PASS" : "FAIL", seconds);
    std::fflush(stdout);
}

} // namespace

TEST_CASE("criterion 1: boson/fermion statistics residuals")
{
    Stopwatch clock;
    double car = 0.0;
    for (int d = 2; d <= 6; ++d)
        car = std::max(car,
                       fock::check_statistics(fock::FockSpace(d, fock::Statistics::fermion))
                           .max_full());
    double ccr = 0.0;
    for (int d = 2; d <= 4; ++d)
        for (int n = 2; n <= 5; ++n)
            ccr = std::max(ccr, fock::check_statistics(
                                    fock::FockSpace(d, fock::Statistics::boson, n))
                                    .max_restricted());
    double secs = clock.seconds();
    bool pass = car <= 1e-13 && ccr < 1e-13 && secs < 10.0;
    announce(1, "statistics", pass, secs);
    CHECK(car <= 1e-13);
    CHECK(ccr < 1e-13);
    CHECK(secs < 10.0);
}

TEST_CASE("criterion 2: field dynamics equivalence")
{
    Stopwatch clock;
    Rng rng = Rng(7).stream("acceptance-field");
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        int d = 2 + static_cast<int>(rng.below(3));
        worst = std::max(worst, fock::heisenberg_field_residual(
                                    fock::FockSpace(d, fock::Statistics::fermion),
                                    random_hermitian(d, rng))
                                    .restricted);
    }
    for (int trial = 0; trial < 50; ++trial) {
        int d = 2 + static_cast<int>(rng.below(2));
        int n = 3 + static_cast<int>(rng.below(3));
        worst = std::max(worst, fock::heisenberg_field_residual(
                                    fock::FockSpace(d, fock::Statistics::boson, n),
                                    random_hermitian(d, rng))
                                    .restricted);
    }
    double secs = clock.seconds();
    bool pass = worst < 1e-12 && secs < 30.0;
    announce(2, "field dynamics", pass, secs);
    CHECK(worst < 1e-12);
    CHECK(secs < 30.0);
}

TEST_CASE("criterion 3: bracket-commutator identities and Jacobi")
{
    Stopwatch clock;
    Rng rng = Rng(7).stream("acceptance-bracket");

    double classical = 0.0, cjacobi = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        std::int64_t dim = 2 + static_cast<std::int64_t>(rng.below(7));
        phase::ObservableField f(random_hermitian(dim, rng));
        phase::ObservableField g(random_hermitian(dim, rng));
        phase::ObservableField e(random_hermitian(dim, rng));
        phase::PhaseSpacePoint p(random_state(dim, rng));
        auto bv = phase::poisson_bracket_classical(f, g, p);
        classical = std::max(classical, std::abs(bv.chart - bv.commutator));
        cjacobi = std::max(cjacobi, phase::jacobi_residual_classical(f, g, e, p));
    }

    double quantum = 0.0, qjacobi = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        auto stat = trial % 2 == 0 ? fock::Statistics::boson : fock::Statistics::fermion;
        int d = 2 + static_cast<int>(rng.below(2));
        fock::FockSpace space(d, stat, 3);
        auto f = fock::second_quantize_observable(random_hermitian(d, rng), space);
        auto g = fock::second_quantize_observable(random_hermitian(d, rng), space);
        auto e = fock::second_quantize_observable(random_hermitian(d, rng), space);
        quantum = std::max(quantum, fock::bracket_identity_residual(f, g));
        Matrix jac =
            fock::quantum_poisson_bracket(f, fock::quantum_poisson_bracket(g, e))
                .matrix.mat() +
            fock::quantum_poisson_bracket(e, fock::quantum_poisson_bracket(f, g))
                .matrix.mat() +
            fock::quantum_poisson_bracket(g, fock::quantum_poisson_bracket(e, f))
                .matrix.mat();
        qjacobi = std::max(qjacobi,
                           fock::residual_on_columns(jac, space.safe_columns(2)));
    }

    double secs = clock.seconds();
    bool pass = classical < 1e-10 && quantum < 1e-10 && cjacobi < 1e-9 && qjacobi < 1e-9;
    announce(3, "bracket identities", pass, secs);
    CHECK(classical < 1e-10);
    CHECK(quantum < 1e-10);
    CHECK(cjacobi < 1e-9);
    CHECK(qjacobi < 1e-9);
}

TEST_CASE("criterion 4: hierarchy spectra and one-excitation faithfulness")
{
    Stopwatch clock;
    auto osc = hier::oscillator_demo(1.0, 5, 2);
    double ladder = -1.0, oneexc = -1.0;
    for (const auto& r : osc.residuals) {
        if (r.check == "ladder_spectrum_integer_multiples")
            ladder = r.residual;
        if (r.check.rfind("one_excitation", 0) == 0)
            oneexc = std::max(oneexc, r.residual);
    }
    auto qb = hier::qubit_demo(pauli_z());
    for (const auto& r : qb.residuals)
        if (r.check.rfind("one_excitation", 0) == 0)
            oneexc = std::max(oneexc, r.residual);
    auto pot = hier::potential_demo({0.0, 0.0, 0.0, 0.0, 1.0});
    for (const auto& r : pot.residuals)
        if (r.check.rfind("one_excitation", 0) == 0)
            oneexc = std::max(oneexc, r.residual);

    double secs = clock.seconds();
    bool pass = ladder >= 0.0 && ladder < 1e-12 && oneexc >= 0.0 && oneexc < 1e-13;
    announce(4, "hierarchy spectra", pass, secs);
    REQUIRE(ladder >= 0.0);
    REQUIRE(oneexc >= 0.0);
    CHECK(ladder < 1e-12);
    CHECK(oneexc < 1e-13);
}

TEST_CASE("criterion 5: eclectic energy identity on 100 random pairs")
{
    Stopwatch clock;
    Rng rng = Rng(7).stream("acceptance-eclectic");
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        int d = trial % 2 == 0 ? 2 : 3;
        int n_max = d == 2 ? 8 : 6;
        int n = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_max - 1)));
        int kmax = std::min(3, n);
        auto h = suites::random_bounded_model(rng, n, d, kmax);
        StateVector psi = random_state(h.full_dim(), rng);
        for (auto layout : {eclectic::EclecticLayout::padded_tensor,
                            eclectic::EclecticLayout::per_term_direct_sum}) {
            auto sys = eclectic::build_eclectic(h, layout);
            worst = std::max(worst, eclectic::verify_energy_identity(psi, sys, h).delta);
        }
    }
    double secs = clock.seconds();
    bool pass = worst < 1e-9 && secs < 120.0;
    announce(5, "eclectic energy identity", pass, secs);
    CHECK(worst < 1e-9);
    CHECK(secs < 120.0);
}

TEST_CASE("criterion 6: dimension accounting for the Heisenberg sweep")
{
    Stopwatch clock;
    bool exact = true;
    bool crossover_flagged_small_n = false;
    bool flag_cleared_large_n = false;
    for (int n = 2; n <= 14; ++n) {
        auto h = hspec::heisenberg_model(n, 2, hspec::chain_edges(n));
        auto row = eclectic::dimension_report(h);
        std::int64_t m = 2 * n - 1;
        if (row.full_dim != eclectic::int_pow(2, n) ||
            row.padded_dim != static_cast<std::int64_t>(2 * n) * (2 * n) ||
            row.direct_sum_dim != 4 * m)
            exact = false;
        if (n == 2 && row.eclectic_not_smaller)
            crossover_flagged_small_n = true;
        if (n == 14 && !row.eclectic_not_smaller)
            flag_cleared_large_n = true;
    }
    double secs = clock.seconds();
    bool pass = exact && crossover_flagged_small_n && flag_cleared_large_n;
    announce(6, "dimension accounting", pass, secs);
    CHECK(exact);
    CHECK(crossover_flagged_small_n);
    CHECK(flag_cleared_large_n);
}

TEST_CASE("criterion 7: symplectic integration drift and order")
{
    Stopwatch clock;
    Rng rng = Rng(7).stream("acceptance-symplectic");
    double edrift = 0.0, ndrift = 0.0;
    for (std::int64_t dim : {2, 4, 8}) {
        Operator h = random_hermitian(dim, rng);
        phase::ClassicalSystem sys = phase::hamiltonize(h);
        auto traj = phase::integrate_symplectic(
            sys, phase::PhaseSpacePoint(random_state(dim, rng)), 1e-3, 10000);
        double e0 = traj.energies.front();
        for (std::size_t s = 0; s < traj.times.size(); ++s) {
            edrift = std::max(edrift, std::abs(traj.energies[s] - e0));
            ndrift = std::max(ndrift, std::abs(traj.norms[s] - 1.0));
        }
    }

    Operator h = random_hermitian(4, rng);
    phase::ClassicalSystem sys = phase::hamiltonize(h);
    StateVector psi0 = random_state(4, rng);
    auto max_err = [&](double dt) {
        int steps = static_cast<int>(std::llround(2.0 / dt));
        auto traj = phase::integrate_symplectic(sys, phase::PhaseSpacePoint(psi0), dt,
                                                steps);
        double worst = 0.0;
        for (std::size_t s = 0; s < traj.times.size(); s += 100) {
            Vector exact = evolve_exact(h, psi0, traj.times[s]).vec();
            worst = std::max(worst, (traj.states[s] - exact).cwiseAbs().maxCoeff());
        }
        return worst;
    };
    double ratio = max_err(2e-3) / max_err(1e-3);

    double secs = clock.seconds();
    bool pass = edrift < 1e-8 && ndrift < 1e-8 && ratio >= 3.5 && ratio <= 4.5;
    announce(7, "symplectic integration", pass, secs);
    CHECK(edrift < 1e-8);
    CHECK(ndrift < 1e-8);
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.5);
}

TEST_CASE("criterion 8: open dynamics")
{
    Stopwatch clock;

    // amplitude damping closed form
    Matrix lower(2, 2);
    lower << 0, 1, 0, 0;
    opendyn::LindbladModel damp(Operator::zero(2), {{Operator(Matrix(lower)), 1.0}});
    Matrix e11 = Matrix::Zero(2, 2);
    e11(1, 1) = 1.0;
    Operator rho0(std::move(e11));
    double closed = 0.0;
    for (double t : {0.5, 1.0, 2.0}) {
        Operator rho = opendyn::lindblad_evolve(damp, rho0, t);
        closed = std::max(closed, std::abs(rho(1, 1).real() - std::exp(-t)));
    }

    // second-quantized lifts over 50 random models
    Rng rng = Rng(7).stream("acceptance-open");
    double lift = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        int d = 2 + static_cast<int>(rng.below(2));
        auto stat = trial % 2 == 0 ? fock::Statistics::fermion : fock::Statistics::boson;
        fock::FockSpace space(d, stat, 3);
        Matrix lmat(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                lmat(i, j) = rng.normal_complex();
        opendyn::LindbladModel m(random_hermitian(d, rng),
                                 {{Operator(std::move(lmat)), 0.2 + rng.uniform()}});
        lift = std::max(lift, opendyn::second_quantized_lindblad_observable(
                                  m, random_hermitian(d, rng), space));
        fock::FockSpace base(d, stat, 2);
        auto st = fock::second_quantize_state(random_density(d, 2, rng), base);
        lift = std::max(lift, opendyn::second_quantized_lindblad_state(m, st));
    }

    // quantum-jump ensemble, 10^4 trajectories, 5 checkpoints, fixed seed
    StateVector psi0 = StateVector::basis(2, 1);
    std::vector<double> checkpoints{0.2, 0.4, 0.6, 0.8, 1.0};
    auto ens = opendyn::sse_ensemble(damp, psi0, checkpoints, 1e-3, 10000, 7);
    double sse_worst_ratio = 0.0;
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        double p = std::exp(-checkpoints[c]);
        double sigma = std::sqrt(p * (1.0 - p) / 10000.0);
        sse_worst_ratio = std::max(sse_worst_ratio,
                                   std::abs(ens.mean_rho[c](1, 1).real() - p) /
                                       (3.0 * sigma));
    }

    double secs = clock.seconds();
    bool pass = closed < 1e-6 && lift < 1e-10 && sse_worst_ratio <= 1.0 && secs < 180.0;
    announce(8, "open dynamics", pass, secs);
    CHECK(closed < 1e-6);
    CHECK(lift < 1e-10);
    CHECK(sse_worst_ratio <= 1.0);
    CHECK(secs < 180.0);
}

TEST_CASE("criterion 9: CLI determinism and full-suite runtime")
{
    Stopwatch clock;
    auto run = [](const std::string& out_path) {
        std::string cmd = std::string(QHIER_CLI_PATH) +
                          " verify --suite all --seed 7 > " + out_path;
        int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };
    int code1 = run("/tmp/qhier_acc_all_1.json");
    int code2 = run("/tmp/qhier_acc_all_2.json");

    auto slurp = [](const char* path) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    std::string a = slurp("/tmp/qhier_acc_all_1.json");
    std::string b = slurp("/tmp/qhier_acc_all_2.json");

    double secs = clock.seconds();
    bool pass = code1 == 0 && code2 == 0 && !a.empty() && a == b && secs < 600.0;
    announce(9, "determinism", pass, secs);
    CHECK(code1 == 0);
    CHECK(code2 == 0);
    REQUIRE_FALSE(a.empty());
    CHECK(a == b);
    CHECK(secs < 600.0);
}

#include <catch2/catch_amalgamated.hpp>

#include <qhier/phase.hpp>

#include "oracles.hpp"

using namespace qhier;
using namespace qhier::phase;

namespace {

// truncated 1-mode oscillator ladder, a|n> = sqrt(n)|n-1>
Matrix osc_annihilate(int levels)
{
    Matrix a = Matrix::Zero(levels, levels);
    for (int n = 1; n < levels; ++n)
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

Vector coherent(int levels, cxd alpha)
{
    Vector v(levels);
    cxd amp = std::exp(-0.5 * std::norm(alpha));
    for (int n = 0; n < levels; ++n) {
        v(n) = amp;
        amp *= alpha / std::sqrt(static_cast<double>(n + 1));
    }
    return v / v.norm();
}

// off-shell energy H(psi, zeta) = sum (-i zeta_a) H_ab psi_b, with psi and
// zeta treated as independent Wirtinger coordinates
cxd energy_off_shell(const Matrix& h, const Vector& psi, const Vector& zeta)
{
    cxd sum = 0.0;
    for (long a = 0; a < psi.size(); ++a)
        for (long b = 0; b < psi.size(); ++b)
            sum += cxd(0.0, -1.0) * zeta(a) * h(a, b) * psi(b);
    return sum;
}

} // namespace

TEST_CASE("hamiltonize produces the energy function")
{
    ClassicalSystem sys = hamiltonize(pauli_z());
    PhaseSpacePoint p(StateVector::basis(2, 0));
    CHECK(sys.energy(p) == 1.0);

    Rng rng = Rng(31).stream("energy");
    ClassicalSystem idsys = hamiltonize(Operator::identity(3));
    Vector v(3);
    for (int i = 0; i < 3; ++i)
        v(i) = rng.normal_complex();
    CHECK(std::abs(idsys.energy(PhaseSpacePoint(Vector(v))) - v.squaredNorm()) < 1e-12);

    for (int trial = 0; trial < 20; ++trial) {
        Operator h = random_hermitian(4, rng);
        StateVector psi = random_state(4, rng);
        CHECK(std::abs(hamiltonize(h).energy(PhaseSpacePoint(psi)) -
                       expectation(psi, h).real()) < 1e-12);
    }

    Matrix notherm(2, 2);
    notherm << 0, 1, 0, 0;
    CHECK_THROWS_AS(hamiltonize(Operator(std::move(notherm))), validation_error);
}

TEST_CASE("hamilton vector field is the Schrodinger flow")
{
    ClassicalSystem sys = hamiltonize(pauli_z());
    TangentVector tv = hamilton_vector_field(sys, PhaseSpacePoint(StateVector::basis(2, 0)));
    CHECK(std::abs(tv.psi_dot(0) - cxd(0.0, -1.0)) < 1e-15);
    CHECK(std::abs(tv.psi_dot(1)) < 1e-15);

    // Richardson-extrapolated propagator difference quotient
    Rng rng = Rng(31).stream("field-fd");
    Operator h = random_hermitian(4, rng);
    StateVector psi = random_state(4, rng);
    TangentVector field = hamilton_vector_field(hamiltonize(h), PhaseSpacePoint(psi));
    auto quotient = [&](double dt) {
        return Vector((evolve_exact(h, psi, dt).vec() - psi.vec()) / dt);
    };
    Vector d1 = quotient(1e-4);
    Vector d2 = quotient(5e-5);
    Vector extrap = 2.0 * d2 - d1;
    CHECK(max_abs(Matrix(extrap - field.psi_dot)) < 1e-7);
}

TEST_CASE("vector field matches finite differences of the energy function")
{
    Rng rng = Rng(31).stream("wirtinger");
    Operator h = random_hermitian(4, rng);
    StateVector psi0 = random_state(4, rng);
    PhaseSpacePoint p(psi0);
    TangentVector field = hamilton_vector_field(hamiltonize(h), p);

    const double eps = 1e-6;
    Vector zeta = p.zeta();
    for (int i = 0; i < 4; ++i) {
        Vector ep = Vector::Zero(4);
        ep(i) = eps;
        // dH/dzeta_i -> psi_dot_i
        cxd dz = (energy_off_shell(h.mat(), p.psi, zeta + ep) -
                  energy_off_shell(h.mat(), p.psi, zeta - ep)) /
                 (2.0 * eps);
        CHECK(std::abs(dz - field.psi_dot(i)) < 1e-6);
        // -dH/dpsi_i -> zeta_dot_i
        cxd dp = (energy_off_shell(h.mat(), p.psi + ep, zeta) -
                  energy_off_shell(h.mat(), p.psi - ep, zeta)) /
                 (2.0 * eps);
        CHECK(std::abs(-dp - field.zeta_dot(i)) < 1e-6);
    }
}

TEST_CASE("implicit midpoint stays on an eigenstate orbit")
{
    ClassicalSystem sys = hamiltonize(pauli_z());
    Trajectory traj = integrate_symplectic(sys, PhaseSpacePoint(StateVector::basis(2, 0)),
                                           1e-3, 10000);
    double off = 0.0, radius = 0.0, phase = 0.0;
    for (std::size_t s = 0; s < traj.times.size(); s += 100) {
        off = std::max(off, std::abs(traj.states[s](1)));
        radius = std::max(radius, std::abs(std::abs(traj.states[s](0)) - 1.0));
        cxd expect = std::exp(cxd(0.0, -traj.times[s]));
        phase = std::max(phase, std::abs(traj.states[s](0) - expect));
    }
    CHECK(off < 1e-14);
    CHECK(radius < 1e-8);
    // phase error of an order-2 scheme: bounded by t*dt^2/12 plus slack
    CHECK(phase < 10.0 * 1e-6 / 12.0 * 1.5);
}

TEST_CASE("implicit midpoint conserves energy and norm")
{
    Rng rng = Rng(31).stream("midpoint");
    for (int trial = 0; trial < 3; ++trial) {
        Operator h = random_hermitian(4, rng);
        ClassicalSystem sys = hamiltonize(h);
        PhaseSpacePoint p0(random_state(4, rng));
        Trajectory traj = integrate_symplectic(sys, p0, 1e-3, 10000);
        double e0 = traj.energies.front();
        double drift = 0.0, ndrift = 0.0;
        for (std::size_t s = 0; s < traj.times.size(); ++s) {
            drift = std::max(drift, std::abs(traj.energies[s] - e0));
            ndrift = std::max(ndrift, std::abs(traj.norms[s] - 1.0));
        }
        CHECK(drift < 1e-8);
        CHECK(ndrift < 1e-8);
    }
}

TEST_CASE("implicit midpoint converges at order 2")
{
    Rng rng = Rng(31).stream("order2");
    Operator h = random_hermitian(4, rng);
    ClassicalSystem sys = hamiltonize(h);
    StateVector psi0 = random_state(4, rng);
    const double t_final = 2.0;

    auto max_err = [&](double dt) {
        int steps = static_cast<int>(std::llround(t_final / dt));
        Trajectory traj = integrate_symplectic(sys, PhaseSpacePoint(psi0), dt, steps);
        double worst = 0.0;
        for (std::size_t s = 0; s < traj.times.size(); s += 50) {
            Vector exact = evolve_exact(h, psi0, traj.times[s]).vec();
            worst = std::max(worst, (traj.states[s] - exact).cwiseAbs().maxCoeff());
        }
        return worst;
    };

    double e1 = max_err(2e-3);
    double e2 = max_err(1e-3);
    double ratio = e1 / e2;
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
}

TEST_CASE("leapfrog split integrator stays unitary and second order")
{
    Rng rng = Rng(31).stream("leapfrog");
    Operator h = random_hermitian(4, rng);
    ClassicalSystem sys = hamiltonize(h);
    StateVector psi0 = random_state(4, rng);
    Trajectory traj = integrate_symplectic(sys, PhaseSpacePoint(psi0), 1e-3, 2000,
                                           SymplecticMethod::leapfrog_reim);
    double e0 = traj.energies.front();
    for (std::size_t s = 0; s < traj.times.size(); s += 100) {
        CHECK(std::abs(traj.norms[s] - 1.0) < 1e-10);
        // split schemes conserve a modified energy; drift stays O(dt^2)
        CHECK(std::abs(traj.energies[s] - e0) < 1e-4);
    }
    Vector exact = evolve_exact(h, psi0, traj.times.back()).vec();
    CHECK((traj.states.back() - exact).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("nonconvergent midpoint step raises a numeric error")
{
    Rng rng = Rng(31).stream("blowup");
    Operator h = Operator(Matrix(50.0 * random_hermitian(4, rng).mat()));
    ClassicalSystem sys = hamiltonize(h);
    CHECK_THROWS_AS(integrate_symplectic(sys, PhaseSpacePoint(random_state(4, rng)), 1.0, 1),
                    numeric_error);
}

TEST_CASE("classical bracket equals the commutator expectation")
{
    PhaseSpacePoint p(StateVector::basis(2, 0));
    ObservableField fx(pauli_x()), fy(pauli_y()), fz(pauli_z());

    BracketValue same = poisson_bracket_classical(fx, fx, p);
    CHECK(same.chart == 0.0);
    CHECK(same.commutator == 0.0);

    BracketValue xy = poisson_bracket_classical(fx, fy, p);
    CHECK(std::abs(xy.commutator - 2.0) < 1e-14); // -i<0|[sx,sy]|0> = 2<0|sz|0>
    CHECK(std::abs(xy.chart - 2.0) < 1e-14);

    Rng rng = Rng(31).stream("bracket");
    for (int trial = 0; trial < 100; ++trial) {
        std::int64_t dim = 2 + static_cast<std::int64_t>(rng.below(7));
        ObservableField f(random_hermitian(dim, rng));
        ObservableField g(random_hermitian(dim, rng));
        PhaseSpacePoint pt(random_state(dim, rng));
        BracketValue bv = poisson_bracket_classical(f, g, pt);
        CHECK(std::abs(bv.chart - bv.commutator) < 1e-10);
    }
}

TEST_CASE("classical bracket is bilinear and antisymmetric")
{
    Rng rng = Rng(31).stream("bilinear");
    for (int trial = 0; trial < 20; ++trial) {
        ObservableField f(random_hermitian(4, rng));
        ObservableField g(random_hermitian(4, rng));
        ObservableField h(random_hermitian(4, rng));
        PhaseSpacePoint p(random_state(4, rng));
        double a = 2.0 * rng.uniform() - 1.0;
        double b = 2.0 * rng.uniform() - 1.0;
        ObservableField combo(Operator(Matrix(a * f.matrix.mat() + b * g.matrix.mat())));
        double lhs = poisson_bracket_classical(combo, h, p).chart;
        double rhs = a * poisson_bracket_classical(f, h, p).chart +
                     b * poisson_bracket_classical(g, h, p).chart;
        CHECK(std::abs(lhs - rhs) < 1e-12);
        CHECK(std::abs(poisson_bracket_classical(f, g, p).chart +
                       poisson_bracket_classical(g, f, p).chart) < 1e-12);
    }
}

TEST_CASE("classical Jacobi identity residuals")
{
    PhaseSpacePoint p(StateVector::basis(2, 0));
    ObservableField fx(pauli_x()), fy(pauli_y()), fz(pauli_z());
    CHECK(jacobi_residual_classical(fx, fx, fy, p) == 0.0);

    Rng rng = Rng(31).stream("jacobi");
    StateVector psi = random_state(2, rng);
    CHECK(jacobi_residual_classical(fx, fy, fz, PhaseSpacePoint(psi)) < 1e-12);

    for (int trial = 0; trial < 20; ++trial) {
        ObservableField f(random_hermitian(4, rng));
        ObservableField g(random_hermitian(4, rng));
        ObservableField e(random_hermitian(4, rng));
        CHECK(jacobi_residual_classical(f, g, e, PhaseSpacePoint(random_state(4, rng))) <
              1e-10);
    }
}

TEST_CASE("ehrenfest reduction keeps conserved quantities flat")
{
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i)
        grid.push_back(0.1 * i);
    auto series = ehrenfest_reduce(pauli_z(), StateVector::basis(2, 0),
                                   {ObservableField(pauli_z())}, grid);
    for (double v : series.values[0])
        CHECK(std::abs(v - 1.0) < 1e-12);

    Rng rng = Rng(31).stream("ehrenfest-h");
    Operator h = random_hermitian(4, rng);
    StateVector psi = random_state(4, rng);
    auto eh = ehrenfest_reduce(h, psi, {ObservableField(h)}, grid);
    double e0 = eh.values[0][0];
    for (double v : eh.values[0])
        CHECK(std::abs(v - e0) < 1e-10);
}

TEST_CASE("oscillator expectations follow the classical flow")
{
    const int levels = 41;
    const double omega = 1.0;
    Matrix a = osc_annihilate(levels);
    Operator h(Matrix(omega * (a.adjoint() * a)));
    Operator x(Matrix(0.5 * (a + a.adjoint())));
    Operator p_op(Matrix(cxd(0.0, -0.5) * (a - a.adjoint())));
    StateVector psi0{coherent(levels, cxd(0.35, 0.2))};

    // chart a = x + ip carries the form 2 dx^dp, so the flow is
    // xdot = omega p, pdot = -omega x
    auto x_at = [&](double t) {
        return expectation(evolve_exact(h, psi0, t), x).real();
    };
    auto p_at = [&](double t) {
        return expectation(evolve_exact(h, psi0, t), p_op).real();
    };
    const double fd = 1e-4;
    for (double t : {0.0, 0.5, 1.3}) {
        double dxdt = (x_at(t + fd) - x_at(t - fd)) / (2.0 * fd);
        double dpdt = (p_at(t + fd) - p_at(t - fd)) / (2.0 * fd);
        CHECK(std::abs(dxdt - omega * p_at(t)) < 1e-6);
        CHECK(std::abs(dpdt + omega * x_at(t)) < 1e-6);
    }
}

TEST_CASE("trajectory CSV has the documented header")
{
    ClassicalSystem sys = hamiltonize(pauli_z());
    Trajectory traj = integrate_symplectic(sys, PhaseSpacePoint(StateVector::basis(2, 0)),
                                           0.1, 2);
    std::string csv = trajectory_csv(traj);
    CHECK(csv.rfind("t,re_psi_0,im_psi_0,re_psi_1,im_psi_1,energy,norm\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

#pragma once

// Invariant batteries behind `qhier verify`. Deterministic under a fixed
// seed: all randomness flows through named sub-streams of the one CLI seed.

#include "qhier/eclectic.hpp"
#include "qhier/hierarchy.hpp"
#include "qhier/open.hpp"
#include "qhier/report.hpp"

namespace qhier::suites {

using report::Check;
using report::SuiteReport;
using report::ToleranceMap;

inline SuiteReport run_phase_suite(std::uint64_t seed, const ToleranceMap& tol)
{
    SuiteReport rep;
    rep.suite = "phase";
    rep.seed = seed;
    Rng root = Rng(seed).stream("phase");

    {
        Rng rng = root.stream("bracket");
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            std::int64_t dim = 2 + static_cast<std::int64_t>(rng.below(7));
            phase::ObservableField f(random_hermitian(dim, rng));
            phase::ObservableField g(random_hermitian(dim, rng));
            phase::PhaseSpacePoint p(random_state(dim, rng));
            auto bv = phase::poisson_bracket_classical(f, g, p);
            worst = std::max(worst, std::abs(bv.chart - bv.commutator));
        }
        rep.add("classical_bracket_vs_commutator", worst, tol.get("bracket_classical"));
    }
    {
        Rng rng = root.stream("bilinear");
        double worst = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            phase::ObservableField f(random_hermitian(4, rng));
            phase::ObservableField g(random_hermitian(4, rng));
            phase::ObservableField h(random_hermitian(4, rng));
            phase::PhaseSpacePoint p(random_state(4, rng));
            double a = 2.0 * rng.uniform() - 1.0;
            double b = 2.0 * rng.uniform() - 1.0;
            phase::ObservableField combo(
                Operator(Matrix(a * f.matrix.mat() + b * g.matrix.mat())));
            double lhs = phase::poisson_bracket_classical(combo, h, p).chart;
            double rhs = a * phase::poisson_bracket_classical(f, h, p).chart +
                         b * phase::poisson_bracket_classical(g, h, p).chart;
            double anti = phase::poisson_bracket_classical(f, g, p).chart +
                          phase::poisson_bracket_classical(g, f, p).chart;
            worst = std::max({worst, std::abs(lhs - rhs), std::abs(anti)});
        }
        rep.add("classical_bracket_bilinearity", worst, tol.get("bracket_bilinearity"));
    }
    {
        Rng rng = root.stream("jacobi");
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            std::int64_t dim = 2 + static_cast<std::int64_t>(rng.below(7));
            phase::ObservableField f(random_hermitian(dim, rng));
            phase::ObservableField g(random_hermitian(dim, rng));
            phase::ObservableField e(random_hermitian(dim, rng));
            worst = std::max(worst, phase::jacobi_residual_classical(
                                        f, g, e, phase::PhaseSpacePoint(
                                                     random_state(dim, rng))));
        }
        rep.add("classical_jacobi", worst, tol.get("jacobi_classical"));
    }
    {
        // analytic field vs Wirtinger finite differences of the energy function
        Rng rng = root.stream("field-fd");
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            Operator h = random_hermitian(4, rng);
            StateVector psi = random_state(4, rng);
            phase::PhaseSpacePoint p(psi);
            auto field = phase::hamilton_vector_field(phase::hamiltonize(h), p);
            Vector zeta = p.zeta();
            auto energy = [&](const Vector& ps, const Vector& zt) {
                cxd sum = 0.0;
                for (long a = 0; a < ps.size(); ++a)
                    for (long b = 0; b < ps.size(); ++b)
                        sum += cxd(0.0, -1.0) * zt(a) * h(a, b) * ps(b);
                return sum;
            };
            const double eps = 1e-6;
            for (long i = 0; i < 4; ++i) {
                Vector ep = Vector::Zero(4);
                ep(i) = eps;
                cxd dz = (energy(p.psi, zeta + ep) - energy(p.psi, zeta - ep)) / (2.0 * eps);
                cxd dp = (energy(p.psi + ep, zeta) - energy(p.psi - ep, zeta)) / (2.0 * eps);
                worst = std::max({worst, std::abs(dz - field.psi_dot(i)),
                                  std::abs(-dp - field.zeta_dot(i))});
            }
        }
        rep.add("field_identity_fd", worst, tol.get("field_identity_fd"));
    }
    {
        Rng rng = root.stream("midpoint");
        double edrift = 0.0, ndrift = 0.0;
        for (std::int64_t dim : {2, 5, 8}) {
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
        rep.add("midpoint_energy_drift", edrift, tol.get("midpoint_energy_drift"));
        rep.add("midpoint_norm_drift", ndrift, tol.get("midpoint_norm_drift"));
    }
    {
        Rng rng = root.stream("order");
        Operator h = random_hermitian(4, rng);
        phase::ClassicalSystem sys = phase::hamiltonize(h);
        StateVector psi0 = random_state(4, rng);
        auto max_err = [&](double dt) {
            int steps = static_cast<int>(std::llround(2.0 / dt));
            auto traj = phase::integrate_symplectic(sys, phase::PhaseSpacePoint(psi0),
                                                    dt, steps);
            double worst = 0.0;
            for (std::size_t s = 0; s < traj.times.size(); s += 100) {
                Vector exact = evolve_exact(h, psi0, traj.times[s]).vec();
                worst = std::max(worst, (traj.states[s] - exact).cwiseAbs().maxCoeff());
            }
            return worst;
        };
        double ratio = max_err(2e-3) / max_err(1e-3);
        rep.add("midpoint_order_deviation", std::abs(ratio - 4.0),
                tol.get("midpoint_order_deviation"));
    }
    {
        // truncated oscillator: expectations follow the chart flow
        const int levels = 41;
        fock::FockSpace osc(1, fock::Statistics::boson, levels - 1);
        const Matrix& a = osc.annihilator(0);
        Operator h(Matrix(a.adjoint() * a));
        Operator x(Matrix(0.5 * (a + a.adjoint())));
        Operator p_op(Matrix(cxd(0.0, -0.5) * (a - a.adjoint())));
        StateVector psi0 = hier::coherent_state(levels, cxd(0.35, 0.2));
        auto x_at = [&](double t) { return expectation(evolve_exact(h, psi0, t), x).real(); };
        auto p_at = [&](double t) {
            return expectation(evolve_exact(h, psi0, t), p_op).real();
        };
        const double fd = 1e-4;
        double worst = 0.0;
        for (double t : {0.0, 0.5, 1.3}) {
            double dxdt = (x_at(t + fd) - x_at(t - fd)) / (2.0 * fd);
            double dpdt = (p_at(t + fd) - p_at(t - fd)) / (2.0 * fd);
            worst = std::max({worst, std::abs(dxdt - p_at(t)), std::abs(dpdt + x_at(t))});
        }
        rep.add("ehrenfest_oscillator_flow", worst, tol.get("ehrenfest_flow"));

        std::vector<double> grid;
        for (int i = 0; i <= 10; ++i)
            grid.push_back(0.2 * i);
        auto series = phase::ehrenfest_reduce(h, psi0, {phase::ObservableField(h)}, grid);
        double drift = 0.0;
        for (double v : series.values[0])
            drift = std::max(drift, std::abs(v - series.values[0][0]));
        rep.add("ehrenfest_energy_conservation", drift, tol.get("ehrenfest_conservation"));
    }
    return rep;
}

inline SuiteReport run_fock_suite(std::uint64_t seed, const ToleranceMap& tol)
{
    SuiteReport rep;
    rep.suite = "fock";
    rep.seed = seed;
    Rng root = Rng(seed).stream("fock");

    for (int d = 2; d <= 6; ++d) {
        auto r = fock::check_statistics(fock::FockSpace(d, fock::Statistics::fermion));
        rep.add("car_full_d" + std::to_string(d), r.max_full(), tol.get("car_full"),
                "fermion", d, -1, "full");
    }
    for (auto [d, n] : std::vector<std::pair<int, int>>{{2, 5}, {3, 4}, {4, 5}}) {
        auto r = fock::check_statistics(fock::FockSpace(d, fock::Statistics::boson, n));
        rep.add("ccr_restricted_d" + std::to_string(d) + "_n" + std::to_string(n),
                r.max_restricted(), tol.get("ccr_restricted"), "boson", d, n,
                "total<=N-1");
        // the boundary violation is reported, bounded by the truncation scale
        rep.add("ccr_boundary_artifact_d" + std::to_string(d), r.max_full(),
                static_cast<double>(n + 1) + 1e-9, "boson", d, n, "full");
    }

    {
        Rng rng = root.stream("field");
        double worst_f = 0.0, worst_b = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            int d = 2 + static_cast<int>(rng.below(3));
            worst_f = std::max(worst_f,
                               fock::heisenberg_field_residual(
                                   fock::FockSpace(d, fock::Statistics::fermion),
                                   random_hermitian(d, rng))
                                   .restricted);
        }
        for (int trial = 0; trial < 50; ++trial) {
            int d = 2 + static_cast<int>(rng.below(2));
            int n = 3 + static_cast<int>(rng.below(3));
            worst_b = std::max(worst_b,
                               fock::heisenberg_field_residual(
                                   fock::FockSpace(d, fock::Statistics::boson, n),
                                   random_hermitian(d, rng))
                                   .restricted);
        }
        rep.add("field_dynamics_fermion", worst_f, tol.get("field_dynamics"), "fermion");
        rep.add("field_dynamics_boson", worst_b, tol.get("field_dynamics"), "boson", -1,
                -1, "total<=N-1");
    }

    {
        Rng rng = root.stream("bracket");
        double worst = 0.0, jworst = 0.0;
        for (auto stat : {fock::Statistics::boson, fock::Statistics::fermion}) {
            for (int trial = 0; trial < 50; ++trial) {
                int d = 2 + static_cast<int>(rng.below(2));
                fock::FockSpace space(d, stat, 3);
                auto f = fock::second_quantize_observable(random_hermitian(d, rng), space);
                auto g = fock::second_quantize_observable(random_hermitian(d, rng), space);
                auto e = fock::second_quantize_observable(random_hermitian(d, rng), space);
                worst = std::max(worst, fock::bracket_identity_residual(f, g));
                Matrix jac =
                    fock::quantum_poisson_bracket(f, fock::quantum_poisson_bracket(g, e))
                        .matrix.mat() +
                    fock::quantum_poisson_bracket(e, fock::quantum_poisson_bracket(f, g))
                        .matrix.mat() +
                    fock::quantum_poisson_bracket(g, fock::quantum_poisson_bracket(e, f))
                        .matrix.mat();
                jworst = std::max(jworst,
                                  fock::residual_on_columns(jac, space.safe_columns(2)));
            }
        }
        rep.add("bracket_quantum_identity", worst, tol.get("bracket_quantum"));
        rep.add("jacobi_quantum", jworst, tol.get("jacobi_quantum"));
    }

    {
        Rng rng = root.stream("one-exc");
        double worst = 0.0, nworst = 0.0, cworst = 0.0, rworst = 0.0;
        for (auto stat : {fock::Statistics::boson, fock::Statistics::fermion}) {
            for (int trial = 0; trial < 50; ++trial) {
                int d = 2 + static_cast<int>(rng.below(5));
                fock::FockSpace space(d, stat, 2);
                Operator h = random_hermitian(d, rng);
                auto hh = fock::second_quantize_hamiltonian(h, space);
                worst = std::max(worst,
                                 max_abs(fock::one_excitation_block(hh).mat() - h.mat()));
                Matrix nmat = fock::number_operator(space).matrix.mat();
                nworst = std::max(nworst, max_abs(hh.matrix.mat() * nmat -
                                                  nmat * hh.matrix.mat()));
                auto sec = fock::sector_spectrum(hh, 1);
                auto full = spectrum(h);
                for (std::size_t i = 0; i < sec.size(); ++i)
                    cworst = std::max(cworst, std::abs(sec[i] - full[i]));
                StateVector psi = random_state(d, rng);
                cxd lhs = expectation(psi, h);
                cxd rhs = expectation(fock::one_excitation_image(space, psi), hh.matrix);
                rworst = std::max(rworst, std::abs(lhs - rhs));
            }
        }
        rep.add("one_excitation_block", worst, tol.get("one_excitation"));
        rep.add("number_symmetry", nworst, tol.get("number_symmetry"));
        rep.add("spectrum_containment", cworst, tol.get("spectrum_containment"));
        rep.add("energy_range_equivalence", rworst, tol.get("energy_range"));
    }

    {
        Rng rng = root.stream("heis-obs");
        double worst = 0.0;
        for (auto stat : {fock::Statistics::boson, fock::Statistics::fermion}) {
            for (int trial = 0; trial < 5; ++trial) {
                int d = 2 + static_cast<int>(rng.below(2));
                fock::FockSpace space(d, stat, 3);
                worst = std::max(worst, fock::observable_heisenberg_residual(
                                            random_hermitian(d, rng),
                                            random_hermitian(d, rng), space,
                                            0.2 + rng.uniform()));
            }
        }
        rep.add("observable_heisenberg_fd", worst, tol.get("heisenberg_equation"));
    }

    {
        Rng rng = root.stream("vn");
        double worst = 0.0;
        for (auto stat : {fock::Statistics::fermion, fock::Statistics::boson}) {
            fock::FockSpace base(2, stat, 2);
            for (int trial = 0; trial < 10; ++trial) {
                auto pure = fock::second_quantize_state(random_state(2, rng), base);
                worst = std::max(worst,
                                 fock::von_neumann_residual(pure, random_hermitian(2, rng))
                                     .max());
                auto mixed = fock::second_quantize_state(random_density(2, 2, rng), base);
                worst = std::max(worst,
                                 fock::von_neumann_residual(mixed, random_hermitian(2, rng))
                                     .max());
            }
        }
        rep.add("von_neumann_residual", worst, tol.get("von_neumann"));
    }
    return rep;
}

inline SuiteReport run_hierarchy_suite(std::uint64_t seed, const ToleranceMap& tol)
{
    SuiteReport rep;
    rep.suite = "hierarchy";
    rep.seed = seed;
    Rng root = Rng(seed).stream("hierarchy");

    auto absorb = [&](const hier::DemoReport& demo, const std::string& prefix) {
        for (const auto& r : demo.residuals)
            rep.add(prefix + r.check, r.residual, r.tolerance);
    };
    absorb(hier::oscillator_demo(1.0, 5, 2), "oscillator.");
    absorb(hier::potential_demo({0.0, 0.0, 0.0, 0.0, 1.0}), "potential_x4.");
    absorb(hier::qubit_demo(pauli_z()), "qubit.");

    {
        Rng rng = root.stream("match");
        hier::HierarchyChain chain =
            hier::HierarchyChain::from_hilbert(random_hermitian(3, rng));
        chain.extend();
        chain.extend({.cutoff = 2});
        chain.extend();
        chain.extend({.cutoff = 2});
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            hier::LevelState s{0, random_state(3, rng).vec()};
            for (std::size_t l = 0; l + 1 < chain.levels().size(); ++l) {
                hier::LevelState nxt = hier::energy_match_state(chain, s);
                worst = std::max(
                    worst, std::abs(hier::level_energy(chain.levels()[s.level], s.amplitudes) -
                                    hier::level_energy(chain.levels()[nxt.level],
                                                       nxt.amplitudes)));
                s = std::move(nxt);
            }
        }
        rep.add("energy_match_random_chain", worst, tol.get("energy_match"));

        double oneexc = 0.0;
        for (std::size_t l = 1; l < chain.levels().size(); ++l) {
            const auto& lvl = chain.levels()[l];
            if (lvl.kind != hier::LevelKind::hilbert || !lvl.space)
                continue;
            fock::FockOperator hh{*lvl.space, lvl.hamiltonian, std::nullopt};
            oneexc = std::max(oneexc,
                              max_abs(fock::one_excitation_block(hh).mat() -
                                      chain.levels()[l - 2].hamiltonian.mat()));
        }
        rep.add("one_excitation_every_lift", oneexc, tol.get("one_excitation"));
    }

    {
        Rng rng = root.stream("compare");
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            int d = 2 + static_cast<int>(rng.below(3));
            Operator h = random_hermitian(d, rng);
            auto stat = trial % 2 == 0 ? fock::Statistics::boson : fock::Statistics::fermion;
            fock::FockSpace space(d, stat, 2);
            auto cmpr = hier::spectrum_compare(h, fock::second_quantize_hamiltonian(h, space));
            worst = std::max(worst, cmpr.containment_delta);
        }
        rep.add("spectrum_compare_witness", worst, tol.get("spectrum_containment"));
    }
    return rep;
}

/// Random k-local model whose eclectic dimensions stay desk-scale: class
/// counts are bounded so nbar stays small.
inline hspec::KLocalHamiltonian random_bounded_model(Rng& rng, int n, int d, int kmax)
{
    hspec::KLocalHamiltonian h;
    h.n = n;
    h.d = d;
    int m1 = 1 + static_cast<int>(rng.below(3));
    int m2 = kmax >= 2 && n >= 2 ? static_cast<int>(rng.below(4)) : 0;
    int m3 = kmax >= 3 && n >= 3 ? static_cast<int>(rng.below(3)) : 0;
    auto add_terms = [&](int count, int k) {
        for (int t = 0; t < count; ++t) {
            std::vector<int> sites;
            while (static_cast<int>(sites.size()) < k) {
                int s = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
                if (std::find(sites.begin(), sites.end(), s) == sites.end())
                    sites.push_back(s);
            }
            std::int64_t dim = 1;
            for (int a = 0; a < k; ++a)
                dim *= d;
            h.terms.push_back({sites, random_hermitian(dim, rng),
                               "k" + std::to_string(k) + "#" + std::to_string(t)});
            h.k = std::max(h.k, k);
        }
    };
    add_terms(m1, 1);
    add_terms(m2, 2);
    add_terms(m3, 3);
    if (h.terms.empty())
        add_terms(1, 1);
    return h;
}

inline SuiteReport run_eclectic_suite(std::uint64_t seed, const ToleranceMap& tol,
                                      const std::optional<hspec::KLocalHamiltonian>&
                                          user_model = std::nullopt)
{
    SuiteReport rep;
    rep.suite = "eclectic";
    rep.seed = seed;
    Rng root = Rng(seed).stream("eclectic");

    {
        Rng rng = root.stream("local");
        double eworst = 0.0, xworst = 0.0, nworst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            auto h = random_bounded_model(rng, 3, 2, 2);
            StateVector psi = random_state(h.full_dim(), rng);
            for (const auto& term : h.terms) {
                double lib = eclectic::local_energy(psi, term, h);
                double ref =
                    expectation(psi, embed_local(term.matrix, term.sites, h.shape()))
                        .real();
                eworst = std::max(eworst, std::abs(lib - ref));
                auto ex = eclectic::extract_local_state(psi, term, h);
                double matched =
                    (ex.phi.adjoint() * term.matrix.mat() * ex.phi)(0, 0).real();
                xworst = std::max(xworst, std::abs(matched - ex.energy));
                nworst = std::max(nworst,
                                  std::abs(eclectic::partial_amplitudes(psi, term, h)
                                               .normalization() -
                                           1.0));
            }
        }
        rep.add("local_energy_identity", eworst, tol.get("local_energy"));
        rep.add("extraction_energy_match", xworst, tol.get("extraction_energy"));
        rep.add("partial_amplitude_normalization", nworst,
                tol.get("partial_amplitude_norm"));
    }

    {
        // the global identity, both layouts, n <= 8, d in {2,3}, k <= 3
        Rng rng = root.stream("identity");
        double worst = 0.0, pad_worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            int d = trial % 2 == 0 ? 2 : 3;
            int n_max = d == 2 ? 8 : 6;
            int n = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_max - 1)));
            int kmax = std::min(3, n);
            auto h = random_bounded_model(rng, n, d, kmax);
            StateVector psi = random_state(h.full_dim(), rng);
            for (auto layout : {eclectic::EclecticLayout::padded_tensor,
                                eclectic::EclecticLayout::per_term_direct_sum}) {
                auto sys = eclectic::build_eclectic(h, layout);
                auto idrep = eclectic::verify_energy_identity(psi, sys, h);
                worst = std::max(worst, idrep.delta);
                if (layout == eclectic::EclecticLayout::padded_tensor)
                    for (std::size_t l = 0; l < h.terms.size(); ++l)
                        pad_worst = std::max(pad_worst,
                                             max_abs(sys.term_block(l).mat() -
                                                     h.terms[l].matrix.mat()));
            }
        }
        rep.add("energy_identity_both_layouts", worst, tol.get("eclectic_energy"));
        rep.add("padding_neutrality", pad_worst, tol.get("padding_neutrality"));
    }

    if (user_model) {
        Rng rng = root.stream("user-model");
        StateVector psi = random_state(user_model->full_dim(), rng);
        double worst = 0.0;
        for (auto layout : {eclectic::EclecticLayout::padded_tensor,
                            eclectic::EclecticLayout::per_term_direct_sum}) {
            auto sys = eclectic::build_eclectic(*user_model, layout);
            worst = std::max(worst,
                             eclectic::verify_energy_identity(psi, sys, *user_model).delta);
        }
        rep.add("energy_identity_user_model", worst, tol.get("eclectic_energy"));
    }

    {
        Rng rng = root.stream("dsum");
        auto h = random_bounded_model(rng, 3, 2, 2);
        auto sys = eclectic::build_eclectic(h, eclectic::EclecticLayout::per_term_direct_sum);
        std::vector<double> expected;
        const std::int64_t dk = eclectic::int_pow(h.d, h.k);
        for (const auto& term : h.terms) {
            auto eigs = spectrum(term.matrix);
            std::int64_t pad = dk / term.matrix.dim();
            for (double e : eigs)
                for (std::int64_t c = 0; c < pad; ++c)
                    expected.push_back(e);
        }
        auto got = spectrum(sys.hamiltonian);
        std::sort(expected.begin(), expected.end());
        double worst = 0.0;
        for (std::size_t i = 0; i < expected.size(); ++i)
            worst = std::max(worst, std::abs(expected[i] - got[i]));
        rep.add("direct_sum_spectrum", worst, tol.get("direct_sum_spectrum"));
    }

    {
        Rng rng = root.stream("klift");
        double worst = 0.0;
        auto h = random_bounded_model(rng, 4, 2, 2);
        StateVector psi = random_state(h.full_dim(), rng);
        for (const auto& term : h.terms) {
            if (term.locality() >= 2)
                continue;
            std::vector<int> partners;
            for (int s = 0; s < h.n && partners.empty(); ++s)
                if (std::find(term.sites.begin(), term.sites.end(), s) == term.sites.end())
                    partners.push_back(s);
            auto lifted = hspec::embed_in_higher_locality(term, 2, partners, h.d);
            worst = std::max(worst, std::abs(eclectic::local_energy(psi, term, h) -
                                             eclectic::local_energy(psi, lifted, h)));
        }
        rep.add("embedding_neutrality", worst, tol.get("embedding_neutrality"));
    }

    {
        Rng rng = root.stream("manybody");
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            auto h = random_bounded_model(rng, 3, 2, 2);
            StateVector psi = random_state(h.full_dim(), rng);
            auto form = eclectic::second_quantized_many_body(h);
            std::vector<eclectic::LocalStateAssignment> locals;
            for (const auto& term : h.terms)
                locals.push_back(eclectic::extract_local_state(psi, term, h));
            StateVector chi = eclectic::composite_one_excitation(form, locals);
            double e_fock =
                (chi.vec().adjoint() * form.hamiltonian.mat() * chi.vec())(0, 0).real();
            double e_full = expectation(psi, hspec::assemble_full(h)).real();
            worst = std::max(worst, std::abs(e_fock - e_full));
        }
        rep.add("many_body_energy_equivalence", worst, tol.get("many_body_equivalence"));
    }

    {
        Rng rng = root.stream("separable");
        auto h = hspec::heisenberg_model(2, 2, hspec::chain_edges(2),
                                         {.coupling_scale = 0.8, .field_scale = 0.4});
        fock::FockSpace space = eclectic::separable_space(h, 2);
        auto sep = eclectic::separable_form(h, space);
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<Vector> factors{random_state(2, rng).vec(),
                                        random_state(2, rng).vec()};
            StateVector psi = eclectic::product_state_full(factors);
            StateVector chi = eclectic::product_state_fock_image(space, factors, 2);
            double lhs = expectation(psi, hspec::assemble_full(h)).real();
            double rhs =
                (chi.vec().adjoint() * sep.matrix.mat() * chi.vec())(0, 0).real();
            worst = std::max(worst, std::abs(lhs - rhs));
        }
        rep.add("separable_product_identity", worst, tol.get("separable_product"));
    }

    {
        // Heisenberg chain dimension accounting, d = 2, k = 2, n = 2..14
        std::int64_t defect = 0;
        bool crossover_ok = true;
        for (int n = 2; n <= 14; ++n) {
            auto h = hspec::heisenberg_model(n, 2, hspec::chain_edges(n));
            auto row = eclectic::dimension_report(h);
            std::int64_t m = 2 * n - 1;
            if (row.full_dim != eclectic::int_pow(2, n))
                defect = std::max<std::int64_t>(defect, 1);
            if (row.padded_dim != static_cast<std::int64_t>(2 * n) * (2 * n))
                defect = std::max<std::int64_t>(defect, 1);
            if (row.direct_sum_dim != 4 * m)
                defect = std::max<std::int64_t>(defect, 1);
            bool expect_flag = row.padded_dim >= row.full_dim;
            if (row.eclectic_not_smaller != expect_flag)
                crossover_ok = false;
        }
        rep.add("dimension_formulas_heisenberg_sweep", static_cast<double>(defect),
                tol.get("dimension_formulas"));
        rep.add("dimension_crossover_flagged", crossover_ok ? 0.0 : 1.0,
                tol.get("dimension_formulas"));
    }
    return rep;
}

inline SuiteReport run_open_suite(std::uint64_t seed, const ToleranceMap& tol)
{
    SuiteReport rep;
    rep.suite = "open";
    rep.seed = seed;
    Rng root = Rng(seed).stream("open");

    auto sigma_minus = [] {
        Matrix m(2, 2);
        m << 0, 1, 0, 0;
        return Operator(std::move(m));
    };

    {
        Rng rng = root.stream("unitary");
        Operator h = random_hermitian(3, rng);
        Operator rho0 = random_density(3, 2, rng);
        opendyn::LindbladModel m(h);
        Operator rho = opendyn::lindblad_evolve(m, rho0, 1.5);
        Matrix u = propagator(h, 1.5).mat();
        rep.add("lindblad_unitary_limit", max_abs(rho.mat() - u * rho0.mat() * u.adjoint()),
                tol.get("lindblad_unitary_limit"));
    }

    {
        const double gamma = 1.0;
        opendyn::LindbladModel m(Operator::zero(2), {{sigma_minus(), gamma}});
        Matrix e = Matrix::Zero(2, 2);
        e(1, 1) = 1.0;
        Operator rho0(std::move(e));
        double worst = 0.0, trace_worst = 0.0, pos_worst = 0.0;
        for (double t : {0.3, 1.0, 2.5}) {
            Operator rho = opendyn::lindblad_evolve(m, rho0, t);
            worst = std::max(worst, std::abs(rho(1, 1).real() - std::exp(-gamma * t)));
            trace_worst =
                std::max(trace_worst, std::abs(rho.mat().trace().real() - 1.0));
            Eigen::SelfAdjointEigenSolver<Matrix> es(rho.mat(), Eigen::EigenvaluesOnly);
            pos_worst = std::max(pos_worst, std::max(0.0, -es.eigenvalues()(0)));
        }
        rep.add("lindblad_closed_form", worst, tol.get("lindblad_closed_form"));
        Operator fixed = opendyn::lindblad_evolve(m, rho0, 20.0);
        Matrix ground = Matrix::Zero(2, 2);
        ground(0, 0) = 1.0;
        rep.add("lindblad_fixed_point", max_abs(fixed.mat() - ground),
                tol.get("lindblad_fixed_point"));
        rep.add("lindblad_trace_drift", trace_worst, tol.get("lindblad_trace"));
        rep.add("lindblad_positivity", pos_worst, tol.get("lindblad_positivity"));
    }

    {
        // RK4 order: error against a fine reference scales ~ dt^4
        Rng rng = root.stream("rk4");
        opendyn::LindbladModel m(random_hermitian(2, rng), {{sigma_minus(), 0.8}});
        Operator rho0 = random_density(2, 2, rng);
        Operator ref = opendyn::lindblad_evolve(m, rho0, 1.0, 1.0 / 4096.0);
        auto err = [&](double dt) {
            return max_abs(opendyn::lindblad_evolve(m, rho0, 1.0, dt).mat() - ref.mat());
        };
        double ratio = err(1.0 / 64.0) / err(1.0 / 128.0);
        rep.add("rk4_order_deviation", std::abs(ratio - 16.0),
                tol.get("rk4_order_deviation"));
    }

    {
        Rng rng = root.stream("lift");
        double oworst = 0.0, sworst = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            int d = 2 + static_cast<int>(rng.below(2));
            auto stat =
                trial % 2 == 0 ? fock::Statistics::fermion : fock::Statistics::boson;
            fock::FockSpace space(d, stat, 3);
            Matrix lmat(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    lmat(i, j) = rng.normal_complex();
            opendyn::LindbladModel m(random_hermitian(d, rng),
                                     {{Operator(std::move(lmat)), 0.2 + rng.uniform()}});
            oworst = std::max(oworst, opendyn::second_quantized_lindblad_observable(
                                          m, random_hermitian(d, rng), space));
            fock::FockSpace base(d, stat, 2);
            auto st = fock::second_quantize_state(random_density(d, 2, rng), base);
            sworst = std::max(sworst, opendyn::second_quantized_lindblad_state(m, st));
        }
        rep.add("lindblad_observable_lift", oworst, tol.get("lindblad_observable_lift"));
        rep.add("lindblad_state_lift", sworst, tol.get("lindblad_state_lift"));
    }

    {
        Rng rng = root.stream("kraus");
        double p = 0.3;
        Matrix k0(2, 2), k1(2, 2);
        k0 << 1, 0, 0, std::sqrt(1.0 - p);
        k1 << 0, std::sqrt(p), 0, 0;
        opendyn::KrausMap damp({Operator(std::move(k0)), Operator(std::move(k1))});
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            Operator r = random_density(2, 2, rng);
            Operator o = random_hermitian(2, rng);
            cxd lhs = (opendyn::kraus_apply_state(damp, r).mat() * o.mat()).trace();
            cxd rhs = (r.mat() * opendyn::kraus_apply_observable(damp, o).mat()).trace();
            worst = std::max(worst, std::abs(lhs - rhs));
        }
        rep.add("kraus_duality", worst, tol.get("kraus_duality"));
    }

    {
        // quantum-jump ensemble vs master equation, fixed derived seed
        const double gamma = 1.0;
        const int n_traj = 10000;
        opendyn::LindbladModel m(Operator::zero(2), {{sigma_minus(), gamma}});
        StateVector psi0 = StateVector::basis(2, 1);
        std::vector<double> checkpoints{0.2, 0.4, 0.6, 0.8, 1.0};
        auto ens = opendyn::sse_ensemble(m, psi0, checkpoints, 1e-3, n_traj,
                                         Rng(seed).stream("sse").next_u64());
        auto cmp = opendyn::compare_to_master(ens, m, psi0);
        double l1_ratio = 0.0, bin_ratio = 0.0;
        for (const auto& row : cmp.rows)
            l1_ratio = std::max(l1_ratio, row.l1_error / row.bound);
        for (std::size_t c = 0; c < checkpoints.size(); ++c) {
            double pth = std::exp(-gamma * checkpoints[c]);
            double sigma = std::sqrt(pth * (1.0 - pth) / n_traj);
            bin_ratio = std::max(bin_ratio,
                                 std::abs(ens.mean_rho[c](1, 1).real() - pth) /
                                     (3.0 * sigma));
        }
        rep.add("sse_l1_ratio", l1_ratio, tol.get("sse_l1_ratio"));
        rep.add("sse_binomial_3sigma_ratio", bin_ratio, tol.get("sse_binomial_ratio"));

        auto again = opendyn::sse_ensemble(m, psi0, {0.5}, 1e-2, 64,
                                           Rng(seed).stream("sse-det").next_u64());
        auto again2 = opendyn::sse_ensemble(m, psi0, {0.5}, 1e-2, 64,
                                            Rng(seed).stream("sse-det").next_u64());
        rep.add("sse_determinism", max_abs(Matrix(again.mean_rho[0] - again2.mean_rho[0])),
                tol.get("sse_determinism"));
    }
    return rep;
}

inline std::vector<std::string> suite_names()
{
    return {"phase", "fock", "hierarchy", "eclectic", "open"};
}

inline SuiteReport run_suite(const std::string& name, std::uint64_t seed,
                             const ToleranceMap& tol,
                             const std::optional<hspec::KLocalHamiltonian>& model =
                                 std::nullopt)
{
    if (name == "phase")
        return run_phase_suite(seed, tol);
    if (name == "fock")
        return run_fock_suite(seed, tol);
    if (name == "hierarchy")
        return run_hierarchy_suite(seed, tol);
    if (name == "eclectic")
        return run_eclectic_suite(seed, tol, model);
    if (name == "open")
        return run_open_suite(seed, tol);
    throw argument_error("unknown suite `" + name + "`");
}

/// The `all` suite: every battery, checks prefixed by suite name.
inline SuiteReport run_all(std::uint64_t seed, const ToleranceMap& tol,
                           const std::optional<hspec::KLocalHamiltonian>& model =
                               std::nullopt)
{
    SuiteReport all;
    all.suite = "all";
    all.seed = seed;
    for (const auto& name : suite_names()) {
        SuiteReport sub = run_suite(name, seed, tol, model);
        for (auto& c : sub.checks) {
            c.check = name + "." + c.check;
            all.checks.push_back(std::move(c));
        }
    }
    return all;
}

} // namespace qhier::suites

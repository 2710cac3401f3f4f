#pragma once

// The quantization hierarchy: alternating hamiltonization (H_i -> Sigma_i)
// and quantization (Sigma_i -> H_{i+1}) steps. Each quantization step puts a
// fresh bosonic Fock space over the phase-space coordinates; its
// one-excitation block reproduces the previous Hamiltonian exactly, which is
// what keeps energies matched across levels.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qhier/fock.hpp"
#include "qhier/phase.hpp"

namespace qhier::hier {

enum class LevelKind { phase_space, hilbert };

inline std::string to_string(LevelKind k)
{
    return k == LevelKind::phase_space ? "phase_space" : "hilbert";
}

struct HierarchyLevel {
    int index = 0; // subscript in Sigma_i / H_i
    LevelKind kind = LevelKind::hilbert;
    Operator hamiltonian;                 // energy matrix of the level
    std::optional<fock::FockSpace> space; // present when produced by quantization
    std::string provenance;

    std::int64_t dim() const { return hamiltonian.dim(); }

    static HierarchyLevel hilbert_level(int index, Operator h, std::string provenance,
                                        std::optional<fock::FockSpace> space = std::nullopt)
    {
        HierarchyLevel l;
        l.index = index;
        l.kind = LevelKind::hilbert;
        l.hamiltonian = std::move(h);
        l.space = std::move(space);
        l.provenance = std::move(provenance);
        return l;
    }

    static HierarchyLevel phase_level(int index, Operator h, std::string provenance)
    {
        HierarchyLevel l;
        l.index = index;
        l.kind = LevelKind::phase_space;
        l.hamiltonian = std::move(h);
        l.provenance = std::move(provenance);
        return l;
    }

    phase::ClassicalSystem classical() const
    {
        if (kind != LevelKind::phase_space)
            throw argument_error("level is not a phase space");
        return phase::hamiltonize(hamiltonian);
    }
};

struct LiftRecord {
    LevelKind from;
    LevelKind to;
    std::int64_t from_dim = 0;
    std::int64_t to_dim = 0;
    int cutoff = -1; // -1 for hamiltonization steps
};

struct LiftOptions {
    std::optional<int> cutoff;
    fock::Statistics statistics = fock::Statistics::boson;
};

inline constexpr int kMaxLiftModes = 12;
inline constexpr int kDefaultHigherCutoff = 2;

/// One hierarchy step. hilbert -> phase_space is hamiltonization (index
/// kept); phase_space -> hilbert is second quantization on a fresh Fock space
/// whose mode count equals the phase-space complex dimension (index + 1).
inline HierarchyLevel lift(const HierarchyLevel& level, const LiftOptions& opts = {})
{
    if (level.kind == LevelKind::hilbert) {
        require_hermitian(level.hamiltonian, "lift (hamiltonization)");
        return HierarchyLevel::phase_level(
            level.index, level.hamiltonian,
            "hamiltonization of H_" + std::to_string(level.index));
    }

    const std::int64_t modes = level.dim();
    const int next = level.index + 1;
    if (next >= 2 && modes > kMaxLiftModes)
        throw resource_error("lift to H_" + std::to_string(next) + " refused: " +
                             std::to_string(modes) + " modes exceed the cap of " +
                             std::to_string(kMaxLiftModes));
    int cutoff = 0;
    if (opts.statistics == fock::Statistics::boson) {
        if (opts.cutoff)
            cutoff = *opts.cutoff;
        else if (next >= 2)
            cutoff = kDefaultHigherCutoff;
        else
            throw argument_error("lift: cutoff required for a bosonic quantization step");
    }
    fock::FockSpace space(static_cast<int>(modes), opts.statistics, cutoff);
    fock::FockOperator hh = fock::second_quantize_hamiltonian(level.hamiltonian, space);
    return HierarchyLevel::hilbert_level(
        next, hh.matrix,
        "quantization of Sigma_" + std::to_string(level.index), space);
}

class HierarchyChain {
public:
    static HierarchyChain from_hilbert(Operator h0)
    {
        HierarchyChain c;
        c.levels_.push_back(HierarchyLevel::hilbert_level(0, std::move(h0), "input"));
        return c;
    }

    static HierarchyChain from_phase(Operator h0)
    {
        HierarchyChain c;
        c.levels_.push_back(HierarchyLevel::phase_level(0, std::move(h0), "input"));
        return c;
    }

    const std::vector<HierarchyLevel>& levels() const { return levels_; }
    const std::vector<LiftRecord>& lifts() const { return lifts_; }
    const HierarchyLevel& back() const { return levels_.back(); }

    /// Lift the last level and append; dimension growth is recorded.
    const HierarchyLevel& extend(const LiftOptions& opts = {})
    {
        HierarchyLevel next = lift(levels_.back(), opts);
        lifts_.push_back({levels_.back().kind, next.kind, levels_.back().dim(),
                          next.dim(),
                          next.kind == LevelKind::hilbert && opts.cutoff ? *opts.cutoff
                                                                         : -1});
        levels_.push_back(std::move(next));
        return levels_.back();
    }

    bool alternates() const
    {
        for (std::size_t i = 1; i < levels_.size(); ++i)
            if (levels_[i].kind == levels_[i - 1].kind)
                return false;
        return true;
    }

private:
    std::vector<HierarchyLevel> levels_;
    std::vector<LiftRecord> lifts_;
};

/// A state at a chain level; both level kinds carry complex amplitudes.
struct LevelState {
    std::size_t level = 0; // index into chain.levels()
    Vector amplitudes;
};

inline double level_energy(const HierarchyLevel& level, const Vector& amplitudes)
{
    if (amplitudes.size() != level.dim())
        throw argument_error("level_energy: dimension mismatch");
    return (amplitudes.adjoint() * level.hamiltonian.mat() * amplitudes)(0, 0).real();
}

/// Map a level-i state to a level-(i+1) state of equal energy: amplitudes are
/// reused across hamiltonization, and the one-excitation image realizes the
/// quantization step. The zero vector maps to the vacuum.
inline LevelState energy_match_state(const HierarchyChain& chain, const LevelState& state)
{
    if (state.level + 1 >= chain.levels().size())
        throw argument_error("energy_match_state: no next level in the chain");
    const HierarchyLevel& here = chain.levels()[state.level];
    const HierarchyLevel& next = chain.levels()[state.level + 1];
    if (state.amplitudes.size() != here.dim())
        throw argument_error("energy_match_state: state does not match its level");

    LevelState out;
    out.level = state.level + 1;
    if (next.kind == LevelKind::phase_space) {
        out.amplitudes = state.amplitudes; // hamiltonization keeps the chart
        return out;
    }
    if (!next.space)
        throw argument_error("energy_match_state: hilbert level lacks a Fock space");
    if (state.amplitudes.norm() == 0.0) {
        Vector vac = Vector::Zero(next.dim());
        vac(next.space->vacuum_index()) = 1.0;
        out.amplitudes = std::move(vac);
        return out;
    }
    Vector chi = Vector::Zero(next.dim());
    for (int i = 0; i < next.space->modes(); ++i)
        chi(next.space->single_excitation_index(i)) = state.amplitudes(i);
    out.amplitudes = std::move(chi);
    return out;
}

struct SectorSpectrum {
    int total = 0;
    std::vector<double> energies;
};

struct SpectrumCompareReport {
    std::vector<double> h1_spectrum;
    std::vector<SectorSpectrum> sectors;
    double containment_delta = 0.0; // one-excitation sector vs spectrum(h1)
    bool h1_positive_definite = false;
    double h2_ground_energy = 0.0;
    bool vacuum_is_ground = false;
    bool ground_state_mismatch = false;
};

/// Sector-resolved comparison of a first-quantized h1 with its
/// second-quantized image h2. The one-excitation sector witnesses spectrum
/// containment; the vacuum (energy 0) is h2's ground state exactly when h1 is
/// positive semidefinite, so a positive-definite h1 has its ground state
/// shifted away from h2's.
inline SpectrumCompareReport spectrum_compare(const Operator& h1,
                                              const fock::FockOperator& h2)
{
    if (!h2.number_conserving(1e-12))
        throw validation_error("spectrum_compare: h2 must be number-conserving");
    SpectrumCompareReport report;
    report.h1_spectrum = spectrum(h1);

    const int max_total = h2.space.statistics() == fock::Statistics::boson
                              ? h2.space.cutoff()
                              : h2.space.modes();
    double ground = std::numeric_limits<double>::infinity();
    for (int n = 0; n <= max_total; ++n) {
        SectorSpectrum sec;
        sec.total = n;
        sec.energies = fock::sector_spectrum(h2, n);
        for (double e : sec.energies)
            ground = std::min(ground, e);
        report.sectors.push_back(std::move(sec));
    }
    report.h2_ground_energy = ground;

    const auto& one = report.sectors[1].energies;
    double delta = 0.0;
    for (std::size_t i = 0; i < one.size(); ++i)
        delta = std::max(delta, std::abs(one[i] - report.h1_spectrum[i]));
    report.containment_delta = delta;

    report.h1_positive_definite = report.h1_spectrum.front() > 1e-12;
    report.vacuum_is_ground = ground >= -1e-12;
    report.ground_state_mismatch = report.vacuum_is_ground && report.h1_positive_definite;
    return report;
}

// ---------------------------------------------------------------------------
// Worked examples

struct NamedResidual {
    std::string check;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct LevelInfo {
    std::string name;
    LevelKind kind = LevelKind::hilbert;
    std::int64_t dim = 0;
    std::vector<double> spectrum_head; // at most 32 values
};

struct DemoReport {
    std::string demo;
    std::vector<LevelInfo> levels;
    std::vector<NamedResidual> residuals;
    std::vector<LiftRecord> lifts;
    std::vector<std::string> notes;

    bool pass() const
    {
        for (const auto& r : residuals)
            if (!r.pass)
                return false;
        return true;
    }

    void add_residual(std::string check, double value, double tol)
    {
        residuals.push_back({std::move(check), value, tol, value <= tol});
    }
};

namespace detail {

inline std::vector<double> spectrum_head(const Operator& h, std::size_t max_values = 32)
{
    auto s = spectrum(h);
    if (s.size() > max_values)
        s.resize(max_values);
    return s;
}

inline LevelInfo level_info(const std::string& name, const HierarchyLevel& level)
{
    return {name, level.kind, level.dim(), spectrum_head(level.hamiltonian)};
}

} // namespace detail

/// Polynomial in (a*, a) with complex coefficients; exponent pair (m, n)
/// stands for (a*)^m a^n. Classical coefficients commute, so the canonical
/// collected form is unambiguous; the operator substitution below is the
/// normal-ordered one, which is what makes coherent-state expectations
/// reproduce the classical values.
class PolyAA {
public:
    static PolyAA constant(cxd v)
    {
        PolyAA p;
        if (v != cxd(0.0, 0.0))
            p.c_[{0, 0}] = v;
        return p;
    }
    static PolyAA a()
    {
        PolyAA p;
        p.c_[{0, 1}] = 1.0;
        return p;
    }
    static PolyAA a_star()
    {
        PolyAA p;
        p.c_[{1, 0}] = 1.0;
        return p;
    }

    PolyAA operator+(const PolyAA& o) const
    {
        PolyAA out = *this;
        for (const auto& [k, v] : o.c_)
            out.c_[k] += v;
        return out;
    }

    PolyAA operator*(const PolyAA& o) const
    {
        PolyAA out;
        for (const auto& [k1, v1] : c_)
            for (const auto& [k2, v2] : o.c_)
                out.c_[{k1.first + k2.first, k1.second + k2.second}] += v1 * v2;
        return out;
    }

    PolyAA scaled(cxd s) const
    {
        PolyAA out = *this;
        for (auto& [k, v] : out.c_)
            v *= s;
        return out;
    }

    PolyAA pow(int e) const
    {
        PolyAA out = constant(1.0);
        for (int i = 0; i < e; ++i)
            out = out * *this;
        return out;
    }

    int degree() const
    {
        int deg = 0;
        for (const auto& [k, v] : c_)
            if (v != cxd(0.0, 0.0))
                deg = std::max(deg, k.first + k.second);
        return deg;
    }

    cxd eval(cxd a_value) const
    {
        cxd sum = 0.0;
        for (const auto& [k, v] : c_)
            sum += v * std::pow(std::conj(a_value), k.first) * std::pow(a_value, k.second);
        return sum;
    }

    /// Normal-ordered operator sum c_mn (a^dag)^m a^n on a truncated 1-mode
    /// space with the given number of levels.
    Operator normal_ordered_matrix(int levels) const
    {
        fock::FockSpace space(1, fock::Statistics::boson, levels - 1);
        const Matrix& a = space.annihilator(0);
        Matrix acc = Matrix::Zero(levels, levels);
        for (const auto& [k, v] : c_) {
            if (v == cxd(0.0, 0.0))
                continue;
            Matrix term = Matrix::Identity(levels, levels);
            for (int m = 0; m < k.first; ++m)
                term = a.adjoint() * term;
            for (int n = 0; n < k.second; ++n)
                term = term * a;
            acc += v * term;
        }
        return Operator(std::move(acc));
    }

private:
    std::map<std::pair<int, int>, cxd> c_;
};

/// Truncated normalized coherent state |alpha> on `levels` levels.
inline StateVector coherent_state(int levels, cxd alpha)
{
    Vector v(levels);
    cxd amp = 1.0;
    v(0) = amp;
    for (int n = 1; n < levels; ++n) {
        amp *= alpha / std::sqrt(static_cast<double>(n));
        v(n) = amp;
    }
    return StateVector(Vector(v / v.norm()));
}

/// Example chain: H0 = [omega] -> Sigma0 (H0 = omega |a|^2 = omega (x^2+p^2)
/// under a = x + ip) -> H1 = omega a^dag a (no zero-point term) -> Sigma1 ->
/// H2, with every cross-level residual recorded.
inline DemoReport oscillator_demo(double omega = 1.0, int cutoff1 = 5, int cutoff2 = 2)
{
    DemoReport report;
    report.demo = "oscillator";

    Matrix h0m(1, 1);
    h0m << omega;
    HierarchyChain chain = HierarchyChain::from_hilbert(Operator(std::move(h0m)));
    chain.extend(); // Sigma_0
    chain.extend({.cutoff = cutoff1});
    chain.extend(); // Sigma_1
    chain.extend({.cutoff = cutoff2});
    report.lifts = chain.lifts();

    const auto& levels = chain.levels();
    report.levels.push_back(detail::level_info("H_0", levels[0]));
    report.levels.push_back(detail::level_info("Sigma_0", levels[1]));
    report.levels.push_back(detail::level_info("H_1", levels[2]));
    report.levels.push_back(detail::level_info("Sigma_1", levels[3]));
    report.levels.push_back(detail::level_info("H_2", levels[4]));

    // chart identity H0(a) = omega |a|^2 = omega (x^2 + p^2) for a = x + ip
    {
        phase::ClassicalSystem sigma0 = levels[1].classical();
        double worst = 0.0;
        for (int gx = 0; gx < 5; ++gx)
            for (int gp = 0; gp < 4; ++gp) {
                double x = -0.6 + 0.3 * gx;
                double p = -0.45 + 0.3 * gp;
                Vector av(1);
                av << cxd(x, p);
                double e = sigma0.energy(phase::PhaseSpacePoint(std::move(av)));
                worst = std::max(worst, std::abs(e - omega * (x * x + p * p)));
            }
        report.add_residual("chart_energy_identity", worst, 1e-12);
    }

    // classical orbit is a circle: |a(t)| constant
    {
        phase::ClassicalSystem sigma0 = levels[1].classical();
        Vector a0(1);
        a0 << cxd(0.8, 0.0);
        auto traj = phase::integrate_symplectic(sigma0, phase::PhaseSpacePoint(std::move(a0)),
                                                1e-3, 7000);
        double drift = 0.0;
        for (double n : traj.norms)
            drift = std::max(drift, std::abs(n - 0.8));
        report.add_residual("orbit_radius_drift", drift, 1e-9);
    }

    // spectrum of H1 = {0, omega, ..., cutoff1 * omega}, no zero-point shift
    {
        auto eigs = spectrum(levels[2].hamiltonian);
        double worst = 0.0;
        for (std::size_t n = 0; n < eigs.size(); ++n)
            worst = std::max(worst, std::abs(eigs[n] - omega * static_cast<double>(n)));
        report.add_residual("ladder_spectrum_integer_multiples", worst, 1e-12);
    }

    // one-excitation faithfulness of both quantization steps
    {
        fock::FockOperator h1{*levels[2].space, levels[2].hamiltonian, std::nullopt};
        fock::FockOperator h2{*levels[4].space, levels[4].hamiltonian, std::nullopt};
        double r1 = max_abs(fock::one_excitation_block(h1).mat() - levels[0].hamiltonian.mat());
        double r2 = max_abs(fock::one_excitation_block(h2).mat() - levels[2].hamiltonian.mat());
        report.add_residual("one_excitation_H1_vs_H0", r1, 1e-13);
        report.add_residual("one_excitation_H2_vs_H1", r2, 1e-13);
    }

    // cross-level energy equivalence on sample states
    {
        Rng rng(90210);
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            LevelState s{0, random_state(1, rng).vec()};
            for (std::size_t l = 0; l + 1 < levels.size(); ++l) {
                LevelState nxt = energy_match_state(chain, s);
                worst = std::max(worst,
                                 std::abs(level_energy(levels[s.level], s.amplitudes) -
                                          level_energy(levels[nxt.level], nxt.amplitudes)));
                s = std::move(nxt);
            }
        }
        report.add_residual("energy_match_along_chain", worst, 1e-12);
    }

    report.notes.push_back("H_1 spectrum has no zero-point offset");
    return report;
}

/// Example chain for H = p^2 + V(x): V enters as a polynomial in (a, a*) on
/// the chart a = x + ip, the normal-ordered substitution gives H0 on a small
/// Fock space, and coherent-state expectations reproduce the classical energy
/// on a grid of chart points.
inline DemoReport potential_demo(const std::vector<double>& v_coeffs,
                                 int chart_levels = 25, int lift_levels = 9,
                                 int cutoff1 = 2)
{
    if (v_coeffs.size() > 5)
        throw argument_error("potential_demo: V(x) degree above 4 is unsupported");

    DemoReport report;
    report.demo = "potential";

    PolyAA x = (PolyAA::a() + PolyAA::a_star()).scaled(0.5);
    PolyAA p = (PolyAA::a() + PolyAA::a_star().scaled(-1.0)).scaled(cxd(0.0, -0.5));
    PolyAA poly = p * p;
    for (std::size_t j = 0; j < v_coeffs.size(); ++j)
        if (v_coeffs[j] != 0.0)
            poly = poly + x.pow(static_cast<int>(j)).scaled(v_coeffs[j]);

    // chart consistency on a 20-point grid: <alpha| :P: |alpha> = P(alpha)
    {
        Operator h_chart = poly.normal_ordered_matrix(chart_levels);
        double worst = 0.0;
        for (int g = 0; g < 20; ++g) {
            double xx = -0.665 + 0.07 * g;
            double pp = 0.6 - 0.06 * g;
            cxd alpha(xx, pp);
            StateVector coh = coherent_state(chart_levels, alpha);
            double lhs = expectation(coh, h_chart).real();
            double rhs = poly.eval(alpha).real();
            worst = std::max(worst, std::abs(lhs - rhs));
        }
        report.add_residual("chart_consistency_grid", worst, 1e-8);
    }

    // lift once: H0 (small matrix) -> Sigma_0 -> H_1
    Operator h0 = poly.normal_ordered_matrix(lift_levels);
    Operator h0_sym(Matrix(0.5 * (h0.mat() + h0.mat().adjoint())));
    HierarchyChain chain = HierarchyChain::from_hilbert(h0_sym);
    chain.extend();
    chain.extend({.cutoff = cutoff1});
    report.lifts = chain.lifts();

    const auto& levels = chain.levels();
    report.levels.push_back(detail::level_info("H_0", levels[0]));
    report.levels.push_back(detail::level_info("Sigma_0", levels[1]));
    report.levels.push_back(detail::level_info("H_1", levels[2]));

    {
        fock::FockOperator h1{*levels[2].space, levels[2].hamiltonian, std::nullopt};
        report.add_residual(
            "one_excitation_H1_vs_H0",
            max_abs(fock::one_excitation_block(h1).mat() - levels[0].hamiltonian.mat()),
            1e-13);
    }
    {
        Rng rng(90211);
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            LevelState s{0, random_state(lift_levels, rng).vec()};
            for (std::size_t l = 0; l + 1 < levels.size(); ++l) {
                LevelState nxt = energy_match_state(chain, s);
                worst = std::max(worst,
                                 std::abs(level_energy(levels[s.level], s.amplitudes) -
                                          level_energy(levels[nxt.level], nxt.amplitudes)));
                s = std::move(nxt);
            }
        }
        report.add_residual("energy_match_along_chain", worst, 1e-12);
    }

    report.notes.push_back("normal-ordered substitution: coherent expectations "
                           "reproduce the classical chart energy");
    return report;
}

/// Example chain for a first-quantized qubit: H0 on C^2 -> Sigma_0 -> H1 on a
/// 2-mode Fock space -> Sigma_1 -> H2.
inline DemoReport qubit_demo(const Operator& h0, int cutoff1 = 2, int cutoff2 = 2)
{
    DemoReport report;
    report.demo = "qubit";

    HierarchyChain chain = HierarchyChain::from_hilbert(h0);
    chain.extend();
    chain.extend({.cutoff = cutoff1});
    chain.extend();
    chain.extend({.cutoff = cutoff2});
    report.lifts = chain.lifts();

    const auto& levels = chain.levels();
    const char* names[] = {"H_0", "Sigma_0", "H_1", "Sigma_1", "H_2"};
    for (std::size_t i = 0; i < levels.size(); ++i)
        report.levels.push_back(detail::level_info(names[i], levels[i]));

    fock::FockOperator h1{*levels[2].space, levels[2].hamiltonian, std::nullopt};
    fock::FockOperator h2{*levels[4].space, levels[4].hamiltonian, std::nullopt};
    report.add_residual(
        "one_excitation_H1_vs_H0",
        max_abs(fock::one_excitation_block(h1).mat() - levels[0].hamiltonian.mat()), 1e-13);
    report.add_residual(
        "one_excitation_H2_vs_H1",
        max_abs(fock::one_excitation_block(h2).mat() - levels[2].hamiltonian.mat()), 1e-13);

    Rng rng(90212);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        LevelState s{0, random_state(2, rng).vec()};
        for (std::size_t l = 0; l + 1 < levels.size(); ++l) {
            LevelState nxt = energy_match_state(chain, s);
            worst = std::max(worst, std::abs(level_energy(levels[s.level], s.amplitudes) -
                                             level_energy(levels[nxt.level], nxt.amplitudes)));
            s = std::move(nxt);
        }
    }
    report.add_residual("energy_match_along_chain", worst, 1e-12);
    return report;
}

} // namespace qhier::hier

#pragma once

// Machine-readable residual reports (schema qhier/1) and the named tolerance
// registry. Every threshold is pinned here; the CLI may override a named
// tolerance but never invents one.

#include <map>
#include <string>
#include <vector>

#include "qhier/core.hpp"

namespace qhier::report {

class ToleranceMap {
public:
    ToleranceMap() : values_(defaults()) {}

    double get(const std::string& name) const
    {
        auto it = values_.find(name);
        if (it == values_.end())
            throw argument_error("unknown tolerance `" + name + "`");
        return it->second;
    }

    void set(const std::string& name, double value)
    {
        if (!values_.count(name))
            throw argument_error("unknown tolerance `" + name + "`");
        if (value <= 0.0 && defaults().at(name) > 0.0)
            throw argument_error("tolerance `" + name + "` must be positive");
        values_[name] = value;
    }

    static const std::map<std::string, double>& defaults()
    {
        static const std::map<std::string, double> d = {
            {"car_full", 1e-13},
            {"ccr_restricted", 1e-13},
            {"field_dynamics", 1e-12},
            {"bracket_classical", 1e-10},
            {"bracket_bilinearity", 1e-12},
            {"jacobi_classical", 1e-9},
            {"bracket_quantum", 1e-12},
            {"jacobi_quantum", 1e-12},
            {"field_identity_fd", 1e-6},
            {"one_excitation", 1e-13},
            {"number_symmetry", 1e-12},
            {"spectrum_containment", 1e-12},
            {"energy_range", 1e-12},
            {"heisenberg_equation", 1e-6},
            {"von_neumann", 1e-10},
            {"midpoint_energy_drift", 1e-8},
            {"midpoint_norm_drift", 1e-8},
            {"midpoint_order_deviation", 0.5},
            {"ehrenfest_flow", 1e-6},
            {"ehrenfest_conservation", 1e-10},
            {"oscillator_spectrum", 1e-12},
            {"energy_match", 1e-12},
            {"chart_identity", 1e-12},
            {"orbit_drift", 1e-9},
            {"chart_grid", 1e-8},
            {"local_energy", 1e-12},
            {"extraction_energy", 1e-10},
            {"partial_amplitude_norm", 1e-12},
            {"eclectic_energy", 1e-9},
            {"padding_neutrality", 0.0},
            {"direct_sum_spectrum", 1e-10},
            {"embedding_neutrality", 1e-12},
            {"many_body_equivalence", 1e-10},
            {"separable_product", 1e-10},
            {"dimension_formulas", 0.0},
            {"lindblad_unitary_limit", 1e-9},
            {"lindblad_closed_form", 1e-6},
            {"lindblad_fixed_point", 1e-6},
            {"lindblad_trace", 1e-8},
            {"lindblad_positivity", 1e-8},
            {"lindblad_observable_lift", 1e-10},
            {"lindblad_state_lift", 1e-10},
            {"kraus_duality", 1e-12},
            {"rk4_order_deviation", 8.0},
            {"sse_l1_ratio", 1.0},
            {"sse_binomial_ratio", 1.0},
            {"sse_determinism", 0.0},
        };
        return d;
    }

private:
    std::map<std::string, double> values_;
};

struct Check {
    std::string check;
    std::string statistics; // boson | fermion | "" when not applicable
    int d = -1;
    int cutoff = -1;
    std::string sector; // e.g. "total<=N-1", "full"
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

inline json to_json(const Check& c)
{
    return json{{"check", c.check},   {"statistics", c.statistics},
                {"d", c.d},           {"cutoff", c.cutoff},
                {"sector", c.sector}, {"residual", c.residual},
                {"tolerance", c.tolerance}, {"pass", c.pass}};
}

struct SuiteReport {
    std::string suite;
    std::uint64_t seed = 0;
    std::vector<Check> checks;

    bool pass() const
    {
        for (const auto& c : checks)
            if (!c.pass)
                return false;
        return true;
    }

    void add(Check c) { checks.push_back(std::move(c)); }

    void add(const std::string& name, double residual, double tolerance,
             const std::string& statistics = "", int d = -1, int cutoff = -1,
             const std::string& sector = "")
    {
        checks.push_back({name, statistics, d, cutoff, sector, residual, tolerance,
                          residual <= tolerance});
    }

    std::vector<std::string> failing() const
    {
        std::vector<std::string> out;
        for (const auto& c : checks)
            if (!c.pass)
                out.push_back(c.check);
        return out;
    }
};

inline json to_json(const SuiteReport& r)
{
    json checks = json::array();
    for (const auto& c : r.checks)
        checks.push_back(to_json(c));
    return json{{"schema", "qhier/1"},
                {"suite", r.suite},
                {"seed", r.seed},
                {"checks", std::move(checks)},
                {"pass", r.pass()}};
}

} // namespace qhier::report

#pragma once

// HSPEC: line-oriented text format for k-local n-qudit Hamiltonians.
//
//   sites <n> <d>
//   term [<i>,<j>,...] <OP> [<coeff>]
//
// OP is either a Pauli string over {I,X,Y,Z} of length |sites| (d = 2 only)
// or the keyword `mat`, in which case the next d^{k'} lines carry d^{k'}
// complex entries each, written as `a+bi`. `#` starts a comment, the
// coefficient defaults to 1.0 and must be real, LF and CRLF both parse.

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qhier/core.hpp"

namespace qhier::hspec {

struct Diagnostic {
    int line = 0;
    int col = 0;
    std::string message;

    std::string str() const
    {
        return "line " + std::to_string(line) + ", col " + std::to_string(col) +
               ": " + message;
    }
};

struct LocalTerm {
    std::vector<int> sites; // ordered, distinct, |sites| = k' <= k
    Operator matrix;        // hermitian, dim d^{k'}
    std::string label;

    int locality() const { return static_cast<int>(sites.size()); }
};

struct KLocalHamiltonian {
    int n = 0; // site count
    int d = 0; // local dimension
    int k = 0; // max locality over terms
    std::vector<LocalTerm> terms;

    std::size_t term_count() const { return terms.size(); }
    SpaceShape shape() const { return SpaceShape::uniform(n, d); }
    std::int64_t full_dim() const { return shape().total_dim(); }

    /// m_{k'} per locality class, keyed by k'.
    std::map<int, std::size_t> locality_counts() const
    {
        std::map<int, std::size_t> counts;
        for (const auto& t : terms)
            ++counts[t.locality()];
        return counts;
    }
};

struct ParseResult {
    std::optional<KLocalHamiltonian> model;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return model.has_value() && diagnostics.empty(); }
};

namespace detail {

struct Token {
    std::string text;
    int col = 0; // 1-based start column
};

inline std::vector<Token> tokenize(const std::string& line)
{
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        if (std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
            continue;
        }
        if (line[i] == '#')
            break;
        std::size_t start = i;
        if (line[i] == '[') {
            // site list: runs to the matching ']' and may contain spaces
            while (i < line.size() && line[i] != ']')
                ++i;
            if (i < line.size())
                ++i;
        } else {
            while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) &&
                   line[i] != '#')
                ++i;
        }
        out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
    }
    return out;
}

inline bool parse_double(const std::string& s, double& out)
{
    if (s.empty())
        return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && std::isfinite(out);
}

/// Parses `a`, `bi`, `a+bi`, `a-bi`, with `i`, `+i`, `-i` meaning unit
/// imaginary parts.
inline bool parse_complex(const std::string& tok, cxd& out)
{
    if (tok.empty())
        return false;
    std::string s = tok;
    bool imag_tail = (s.back() == 'i' || s.back() == 'I');
    if (imag_tail)
        s.pop_back();

    // split point: a sign not at position 0 and not part of an exponent
    std::size_t split = std::string::npos;
    for (std::size_t i = 1; i < s.size(); ++i) {
        if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
            split = i;
            break;
        }
    }

    auto parse_signed_unit = [](const std::string& p, double& v) {
        if (p.empty() || p == "+") {
            v = 1.0;
            return true;
        }
        if (p == "-") {
            v = -1.0;
            return true;
        }
        return parse_double(p, v);
    };

    if (split == std::string::npos) {
        double v = 0.0;
        if (imag_tail) {
            if (!parse_signed_unit(s, v))
                return false;
            out = cxd(0.0, v);
        } else {
            if (!parse_double(s, v))
                return false;
            out = cxd(v, 0.0);
        }
        return true;
    }
    if (!imag_tail)
        return false; // two parts require the imaginary tail
    double re = 0.0, im = 0.0;
    if (!parse_double(s.substr(0, split), re))
        return false;
    if (!parse_signed_unit(s.substr(split), im))
        return false;
    out = cxd(re, im);
    return true;
}

inline std::string format_complex(cxd v)
{
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%.17g%+.17gi", v.real(), v.imag());
    return buf;
}

inline std::optional<Operator> pauli_matrix(char c)
{
    switch (c) {
    case 'I':
        return Operator::identity(2);
    case 'X':
        return pauli_x();
    case 'Y':
        return pauli_y();
    case 'Z':
        return pauli_z();
    default:
        return std::nullopt;
    }
}

inline std::vector<std::string> split_lines(const std::string& text)
{
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            if (!cur.empty() && cur.back() == '\r')
                cur.pop_back();
            lines.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty() && cur.back() == '\r')
        cur.pop_back();
    lines.push_back(cur);
    return lines;
}

} // namespace detail

inline ParseResult parse_spec(const std::string& text)
{
    using namespace detail;
    ParseResult result;
    auto fail = [&](int line, int col, std::string msg) {
        result.diagnostics.push_back({line, col, std::move(msg)});
    };

    auto lines = split_lines(text);
    KLocalHamiltonian model;
    bool header_seen = false;
    std::size_t li = 0;

    auto next_tokens = [&](std::vector<Token>& toks, int& lineno) {
        while (li < lines.size()) {
            toks = tokenize(lines[li]);
            lineno = static_cast<int>(li) + 1;
            ++li;
            if (!toks.empty())
                return true;
        }
        return false;
    };

    std::vector<Token> toks;
    int lineno = 0;
    if (!next_tokens(toks, lineno)) {
        fail(1, 1, "missing sites header");
        return result;
    }

    // header: sites <n> <d>
    if (toks[0].text != "sites") {
        fail(lineno, toks[0].col, "missing sites header (expected `sites <n> <d>`)");
        return result;
    }
    if (toks.size() != 3) {
        fail(lineno, toks[0].col, "sites header needs exactly two integers");
        return result;
    }
    try {
        model.n = std::stoi(toks[1].text);
        model.d = std::stoi(toks[2].text);
    } catch (const std::exception&) {
        fail(lineno, toks[1].col, "sites header fields must be integers");
        return result;
    }
    if (model.n < 1) {
        fail(lineno, toks[1].col, "site count must be positive");
        return result;
    }
    if (model.d < 2) {
        fail(lineno, toks[2].col, "local dimension must be at least 2");
        return result;
    }
    header_seen = true;
    (void)header_seen;

    while (next_tokens(toks, lineno)) {
        if (toks[0].text != "term") {
            fail(lineno, toks[0].col, "expected `term` line");
            continue;
        }
        if (toks.size() < 3) {
            fail(lineno, toks[0].col, "term line needs a site list and an operator");
            continue;
        }
        // site list
        const Token& site_tok = toks[1];
        if (site_tok.text.front() != '[' || site_tok.text.back() != ']') {
            fail(lineno, site_tok.col, "site list must look like [0,1]");
            continue;
        }
        std::vector<int> sites;
        {
            std::string inner = site_tok.text.substr(1, site_tok.text.size() - 2);
            std::stringstream ss(inner);
            std::string piece;
            bool bad = false;
            while (std::getline(ss, piece, ',')) {
                try {
                    sites.push_back(std::stoi(piece));
                } catch (const std::exception&) {
                    fail(lineno, site_tok.col, "site list entries must be integers");
                    bad = true;
                    break;
                }
            }
            if (bad)
                continue;
        }
        if (sites.empty()) {
            fail(lineno, site_tok.col, "site list must not be empty");
            continue;
        }
        bool site_ok = true;
        for (std::size_t a = 0; a < sites.size() && site_ok; ++a) {
            if (sites[a] < 0 || sites[a] >= model.n) {
                fail(lineno, site_tok.col,
                     "site " + std::to_string(sites[a]) + " out of range [0," +
                         std::to_string(model.n) + ")");
                site_ok = false;
            }
            for (std::size_t b = a + 1; b < sites.size() && site_ok; ++b)
                if (sites[a] == sites[b]) {
                    fail(lineno, site_tok.col,
                         "duplicate site " + std::to_string(sites[a]));
                    site_ok = false;
                }
        }
        if (!site_ok)
            continue;

        const Token& op_tok = toks[2];
        double coeff = 1.0;
        if (toks.size() > 4) {
            fail(lineno, toks[4].col, "unexpected trailing tokens on term line");
            continue;
        }
        if (toks.size() == 4) {
            if (!detail::parse_double(toks[3].text, coeff)) {
                fail(lineno, toks[3].col, "coefficient must be a real number");
                continue;
            }
        }

        std::int64_t sub_dim = 1;
        for (std::size_t a = 0; a < sites.size(); ++a)
            sub_dim *= model.d;

        Operator matrix;
        std::string label;
        if (op_tok.text == "mat") {
            Matrix m(sub_dim, sub_dim);
            bool bad = false;
            for (std::int64_t r = 0; r < sub_dim && !bad; ++r) {
                std::vector<Token> row;
                int row_line = 0;
                if (!next_tokens(row, row_line)) {
                    fail(lineno, op_tok.col,
                         "matrix needs " + std::to_string(sub_dim) + " rows of " +
                             std::to_string(sub_dim) + " entries");
                    bad = true;
                    break;
                }
                if (static_cast<std::int64_t>(row.size()) != sub_dim) {
                    fail(row_line, row[0].col,
                         "matrix row needs " + std::to_string(sub_dim) +
                             " entries, found " + std::to_string(row.size()));
                    bad = true;
                    break;
                }
                for (std::int64_t c = 0; c < sub_dim; ++c) {
                    cxd v;
                    if (!detail::parse_complex(row[static_cast<std::size_t>(c)].text, v)) {
                        fail(row_line, row[static_cast<std::size_t>(c)].col,
                             "cannot parse complex entry `" +
                                 row[static_cast<std::size_t>(c)].text + "`");
                        bad = true;
                        break;
                    }
                    m(r, c) = v;
                }
            }
            if (bad)
                continue;
            matrix = Operator(Matrix(coeff * m));
            label = "mat";
        } else {
            // Pauli string
            if (model.d != 2) {
                fail(lineno, op_tok.col, "Pauli shorthand requires d = 2");
                continue;
            }
            if (op_tok.text.size() != sites.size()) {
                fail(lineno, op_tok.col,
                     "Pauli string length " + std::to_string(op_tok.text.size()) +
                         " does not match site count " + std::to_string(sites.size()));
                continue;
            }
            bool bad = false;
            Operator acc;
            for (std::size_t a = 0; a < op_tok.text.size(); ++a) {
                auto p = detail::pauli_matrix(op_tok.text[a]);
                if (!p) {
                    fail(lineno, op_tok.col,
                         std::string("unknown operator name `") + op_tok.text[a] + "`");
                    bad = true;
                    break;
                }
                acc = (a == 0) ? *p : kron(acc, *p);
            }
            if (bad)
                continue;
            matrix = Operator(Matrix(coeff * acc.mat()));
            label = op_tok.text;
        }

        if (!matrix.hermitian(1e-10)) {
            fail(lineno, op_tok.col, "matrix not hermitian within 1e-10");
            continue;
        }
        model.terms.push_back({std::move(sites), std::move(matrix), std::move(label)});
    }

    for (const auto& t : model.terms)
        model.k = std::max(model.k, t.locality());

    if (result.diagnostics.empty())
        result.model = std::move(model);
    return result;
}

/// Serialize a model back to HSPEC text (always in `mat` form, 17 significant
/// digits, so parse(render(h)) reproduces the matrices).
inline std::string render(const KLocalHamiltonian& h)
{
    std::string out = "sites " + std::to_string(h.n) + " " + std::to_string(h.d) + "\n";
    for (const auto& t : h.terms) {
        out += "term [";
        for (std::size_t a = 0; a < t.sites.size(); ++a) {
            if (a)
                out += ",";
            out += std::to_string(t.sites[a]);
        }
        out += "] mat\n";
        for (std::int64_t r = 0; r < t.matrix.dim(); ++r) {
            for (std::int64_t c = 0; c < t.matrix.dim(); ++c) {
                if (c)
                    out += " ";
                out += detail::format_complex(t.matrix(r, c));
            }
            out += "\n";
        }
    }
    return out;
}

struct ValidationIssue {
    int term_index = -1; // -1 for header-level issues
    std::string invariant;
    std::string message;
};

/// Empty result iff every model invariant holds; each issue names exactly one
/// term (or the header).
inline std::vector<ValidationIssue> validate(const KLocalHamiltonian& h)
{
    std::vector<ValidationIssue> issues;
    if (h.n < 1)
        issues.push_back({-1, "site_count", "site count must be positive"});
    if (h.d < 2)
        issues.push_back({-1, "local_dimension", "local dimension must be at least 2"});
    for (std::size_t idx = 0; idx < h.terms.size(); ++idx) {
        const auto& t = h.terms[idx];
        int i = static_cast<int>(idx);
        if (t.sites.empty()) {
            issues.push_back({i, "sites_nonempty", "term has no sites"});
            continue;
        }
        if (t.locality() > h.k)
            issues.push_back({i, "locality_bound",
                              "term acts on " + std::to_string(t.locality()) +
                                  " sites, above k = " + std::to_string(h.k)});
        bool range_ok = true;
        for (int s : t.sites)
            if (s < 0 || s >= h.n) {
                issues.push_back({i, "site_range",
                                  "site " + std::to_string(s) + " out of range [0," +
                                      std::to_string(h.n) + ")"});
                range_ok = false;
            }
        for (std::size_t a = 0; a < t.sites.size(); ++a)
            for (std::size_t b = a + 1; b < t.sites.size(); ++b)
                if (t.sites[a] == t.sites[b])
                    issues.push_back({i, "sites_distinct",
                                      "duplicate site " + std::to_string(t.sites[a])});
        std::int64_t want = 1;
        for (std::size_t a = 0; a < t.sites.size(); ++a)
            want *= h.d;
        if (t.matrix.dim() != want) {
            issues.push_back({i, "matrix_dim",
                              "matrix dim " + std::to_string(t.matrix.dim()) +
                                  " does not equal d^{k'} = " + std::to_string(want)});
            continue;
        }
        if (range_ok && !t.matrix.hermitian(1e-10))
            issues.push_back({i, "hermitian", "term matrix not hermitian within 1e-10"});
    }
    return issues;
}

/// Partition of term indices by locality class, order preserved within each
/// class.
inline std::map<int, std::vector<std::size_t>> group_by_locality(const KLocalHamiltonian& h)
{
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < h.terms.size(); ++i)
        groups[h.terms[i].locality()].push_back(i);
    return groups;
}

inline Operator assemble_full(const KLocalHamiltonian& h)
{
    SpaceShape shape = h.shape();
    check_dimension(shape.total_dim(), "assemble_full");
    Matrix acc = Matrix::Zero(shape.total_dim(), shape.total_dim());
    for (const auto& t : h.terms)
        acc += embed_local(t.matrix, t.sites, shape).mat();
    return Operator(std::move(acc));
}

/// Pad a term with identity factors on `partner_sites` so it becomes
/// target_k-local without changing the assembled Hamiltonian.
inline LocalTerm embed_in_higher_locality(const LocalTerm& t, int target_k,
                                          const std::vector<int>& partner_sites, int d)
{
    if (t.locality() >= target_k)
        throw argument_error("embed_in_higher_locality: term is already " +
                             std::to_string(t.locality()) + "-local");
    if (static_cast<int>(partner_sites.size()) != target_k - t.locality())
        throw argument_error("embed_in_higher_locality: need exactly " +
                             std::to_string(target_k - t.locality()) +
                             " partner sites");
    for (int p : partner_sites)
        for (int s : t.sites)
            if (p == s)
                throw argument_error("embed_in_higher_locality: partner site " +
                                     std::to_string(p) + " overlaps the term");
    std::int64_t pad = 1;
    for (std::size_t a = 0; a < partner_sites.size(); ++a)
        pad *= d;
    LocalTerm out;
    out.sites = t.sites;
    out.sites.insert(out.sites.end(), partner_sites.begin(), partner_sites.end());
    out.matrix = kron(t.matrix, Operator::identity(pad));
    out.label = t.label;
    return out;
}

struct HeisenbergOptions {
    double coupling_scale = 1.0; // J in J*(XX+YY+ZZ)
    double field_scale = 0.0;    // h in h*Z
    std::vector<Operator> fields;    // per-site override (size n)
    std::vector<Operator> couplings; // per-edge override (size |edges|)
};

/// Heisenberg model on an arbitrary edge list: n field terms plus one
/// coupling term per edge. Defaults (h*Z fields, J*(XX+YY+ZZ) couplings)
/// exist only for d = 2; other d require explicit matrices.
inline KLocalHamiltonian heisenberg_model(int n, int d,
                                          const std::vector<std::pair<int, int>>& edges,
                                          const HeisenbergOptions& opts = {})
{
    if (n < 1)
        throw argument_error("heisenberg_model: n must be positive");
    for (auto [a, b] : edges) {
        if (a < 0 || a >= n || b < 0 || b >= n)
            throw argument_error("heisenberg_model: edge site out of range");
        if (a == b)
            throw argument_error("heisenberg_model: edge endpoints must differ");
    }
    if (!opts.fields.empty() && opts.fields.size() != static_cast<std::size_t>(n))
        throw argument_error("heisenberg_model: need one field matrix per site");
    if (!opts.couplings.empty() && opts.couplings.size() != edges.size())
        throw argument_error("heisenberg_model: need one coupling matrix per edge");
    if (d != 2 && (opts.fields.empty() || (opts.couplings.empty() && !edges.empty())))
        throw argument_error("heisenberg_model: d != 2 requires explicit matrices");

    KLocalHamiltonian h;
    h.n = n;
    h.d = d;
    h.k = edges.empty() && opts.couplings.empty() ? 1 : 2;

    Operator default_field, default_coupling;
    if (d == 2) {
        default_field = Operator(Matrix(opts.field_scale * pauli_z().mat()));
        Matrix c = kron(pauli_x(), pauli_x()).mat() + kron(pauli_y(), pauli_y()).mat() +
                   kron(pauli_z(), pauli_z()).mat();
        default_coupling = Operator(Matrix(opts.coupling_scale * c));
    }

    for (int i = 0; i < n; ++i) {
        LocalTerm t;
        t.sites = {i};
        t.matrix = opts.fields.empty() ? default_field
                                       : opts.fields[static_cast<std::size_t>(i)];
        t.label = "field " + std::to_string(i);
        h.terms.push_back(std::move(t));
    }
    for (std::size_t e = 0; e < edges.size(); ++e) {
        LocalTerm t;
        t.sites = {edges[e].first, edges[e].second};
        t.matrix = opts.couplings.empty() ? default_coupling : opts.couplings[e];
        t.label = "coupling " + std::to_string(edges[e].first) + "-" +
                  std::to_string(edges[e].second);
        h.terms.push_back(std::move(t));
    }
    if (!edges.empty() || !opts.couplings.empty())
        h.k = 2;
    return h;
}

inline std::vector<std::pair<int, int>> chain_edges(int n, bool ring = false)
{
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < n; ++i)
        edges.push_back({i, i + 1});
    if (ring && n > 2)
        edges.push_back({n - 1, 0});
    return edges;
}

} // namespace qhier::hspec

#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "orbitreg/errors.hpp"
#include "orbitreg/group_closure.hpp"
#include "orbitreg/orbit_engine.hpp"
#include "orbitreg/sampler.hpp"

namespace orbitreg {

inline constexpr const char* tool_version = "0.1.0";

// ---------------------------------------------------------------------------
// input documents
// ---------------------------------------------------------------------------
//
// Structured text with sections:
//   [field]       R | C
//   [constants]   name = value   (decimal literal or builtin: pi, sqrt(k), ...)
//   [products]    a * b = scalar-literal   (closes the span under a product)
//   [generators]  one matrix per blank-line-separated block; rows split on ';',
//                 entries on ','
//   [vectors]     name = comma-separated scalar literals
//   [options]     precision / tau / strict_exact / sampler_L / sampler_R
// Lines starting with '#' are comments.

struct ProductRule {
    std::string left, right, value;
};

struct InputDocument {
    bool real_field = false;
    std::vector<ConstantSpec> constants;  // not including the implicit unit
    std::vector<ProductRule> products;
    BasisPtr basis;
    std::vector<Mat<SymbolicComplex>> generators;
    std::vector<std::pair<std::string, std::vector<SymbolicComplex>>> vectors;
    std::vector<std::pair<std::string, std::string>> options;  // raw, in file order

    BackendConfig config() const {
        BackendConfig c;
        for (const auto& [k, v] : options)
            if (k == "precision") c.digits = std::stoi(v);
        if (c.digits < 30) throw ValidationError("precision must be at least 30 digits");
        for (const auto& [k, v] : options) {
            if (k == "precision") continue;
            if (k == "tau") {
                BigFloat t(v, bits_for_digits(c.digits));
                if (t.is_nan()) throw ValidationError("bad tau literal: " + v);
                c.tau_override = t;
            } else if (k == "strict_exact") {
                if (v != "true" && v != "false" && v != "0" && v != "1")
                    throw ValidationError("strict_exact must be true or false");
                c.strict_exact = (v == "true" || v == "1");
            } else if (k == "sampler_L") {
                c.sampler_L = std::stoi(v);
            } else if (k == "sampler_R") {
                c.sampler_R = std::stod(v);
            } else {
                throw ValidationError("unknown option: " + k);
            }
        }
        return c;
    }

    GroupSpec spec() const {
        GroupSpec s;
        s.real_field = real_field;
        s.basis = basis;
        s.gens = generators;
        s.n = generators.empty() ? 0 : generators[0].rows;
        s.cfg = config();
        return s;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

// name = value, both trimmed; throws if no '='.
inline std::pair<std::string, std::string> key_value(const std::string& line) {
    size_t eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError("expected 'name = value', got: " + line);
    return {trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
}

}  // namespace detail

inline InputDocument parse_input(const std::string& text) {
    InputDocument doc;
    auto basis = std::make_shared<ConstantBasis>();

    std::string section;
    bool field_seen = false;
    std::vector<std::vector<std::string>> cur_rows;  // pending generator rows (literals)
    std::vector<std::vector<std::vector<std::string>>> gen_rows;
    std::vector<ProductRule> products;
    std::vector<std::pair<std::string, std::string>> raw_vectors;

    auto flush_matrix = [&] {
        if (!cur_rows.empty()) {
            gen_rows.push_back(std::move(cur_rows));
            cur_rows.clear();
        }
    };

    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        line = detail::trim(line);
        if (!line.empty() && line[0] == '#') continue;
        if (line.empty()) {
            if (section == "generators") flush_matrix();
            continue;
        }
        if (line.front() == '[' && line.back() == ']') {
            if (section == "generators") flush_matrix();
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section != "field" && section != "constants" && section != "products" &&
                section != "generators" && section != "vectors" && section != "options")
                throw ValidationError("unknown section: [" + section + "]");
            continue;
        }
        if (section == "field") {
            if (line != "R" && line != "C") throw ValidationError("field must be R or C, got: " + line);
            doc.real_field = (line == "R");
            field_seen = true;
        } else if (section == "constants") {
            auto [name, value] = detail::key_value(line);
            basis->add(name, value);
            doc.constants.push_back({name, value, ""});
        } else if (section == "products") {
            auto [lhs, value] = detail::key_value(line);
            auto parts = detail::split(lhs, '*');
            if (parts.size() != 2) throw ValidationError("product rule needs 'a * b = value': " + line);
            products.push_back({parts[0], parts[1], value});
        } else if (section == "generators") {
            for (const auto& row : detail::split(line, ';')) {
                if (row.empty()) continue;
                cur_rows.push_back(detail::split(row, ','));
            }
        } else if (section == "vectors") {
            auto [name, value] = detail::key_value(line);
            raw_vectors.emplace_back(name, value);
        } else if (section == "options") {
            doc.options.push_back(detail::key_value(line));
        } else {
            throw ValidationError("content before the first section header: " + line);
        }
    }
    flush_matrix();
    if (!field_seen) throw ValidationError("missing [field] section (R or C)");

    BasisPtr bp = basis;  // shares ownership; product rules below mutate the same object
    for (const auto& pr : products) {
        auto i = basis->index_of(pr.left);
        auto j = basis->index_of(pr.right);
        if (!i || !j) throw ValidationError("product rule names an undeclared constant: " + pr.left +
                                            " * " + pr.right);
        SymbolicComplex v = parse_scalar(pr.value, bp);
        if (!v.im.is_zero()) throw ValidationError("product rule value must be real: " + pr.value);
        basis->set_product(*i, *j, v.re.coeffs());
    }
    doc.products = products;
    doc.basis = bp;

    for (const auto& rows : gen_rows) {
        size_t n = rows.size();
        Mat<SymbolicComplex> m(n, n, SymbolicComplex(bp));
        for (size_t i = 0; i < n; ++i) {
            if (rows[i].size() != n)
                throw ValidationError("generator matrix is not square: row " + std::to_string(i + 1) +
                                      " has " + std::to_string(rows[i].size()) + " of " +
                                      std::to_string(n) + " entries");
            for (size_t j = 0; j < n; ++j) m(i, j) = parse_scalar(rows[i][j], bp);
        }
        doc.generators.push_back(std::move(m));
    }
    // [generators] may be absent for closure-only inputs, where the [vectors]
    // entries are themselves the additive-group generators.
    size_t n = doc.generators.empty() ? 0 : doc.generators[0].rows;
    for (const auto& g : doc.generators)
        if (g.rows != n) throw ValidationError("generators have mixed dimensions");

    for (const auto& [name, value] : raw_vectors) {
        std::vector<SymbolicComplex> v;
        for (const auto& e : detail::split(value, ',')) v.push_back(parse_scalar(e, bp));
        if (!doc.generators.empty() && v.size() != n)
            throw ValidationError("vector " + name + " has length " + std::to_string(v.size()) +
                                  ", expected " + std::to_string(n));
        if (doc.generators.empty() && !doc.vectors.empty() && v.size() != doc.vectors[0].second.size())
            throw ValidationError("vectors have mixed lengths");
        doc.vectors.emplace_back(name, std::move(v));
    }

    doc.config();  // validate options eagerly
    return doc;
}

inline std::string print_input(const InputDocument& doc) {
    std::string out;
    out += "[field]\n";
    out += doc.real_field ? "R\n" : "C\n";
    if (!doc.constants.empty()) {
        out += "\n[constants]\n";
        for (const auto& c : doc.constants) out += c.name + " = " + c.value + "\n";
    }
    if (!doc.products.empty()) {
        out += "\n[products]\n";
        for (const auto& p : doc.products) out += p.left + " * " + p.right + " = " + p.value + "\n";
    }
    out += "\n[generators]\n";
    for (size_t k = 0; k < doc.generators.size(); ++k) {
        if (k) out += "\n";
        const auto& g = doc.generators[k];
        for (size_t i = 0; i < g.rows; ++i) {
            for (size_t j = 0; j < g.cols; ++j) out += (j ? ", " : "") + print_scalar(g(i, j));
            out += i + 1 < g.rows ? " ;\n" : "\n";
        }
    }
    if (!doc.vectors.empty()) {
        out += "\n[vectors]\n";
        for (const auto& [name, v] : doc.vectors) {
            out += name + " = ";
            for (size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + print_scalar(v[i]);
            out += "\n";
        }
    }
    if (!doc.options.empty()) {
        out += "\n[options]\n";
        for (const auto& [k, v] : doc.options) out += k + " = " + v + "\n";
    }
    return out;
}

// FNV-1a digest of the raw input bytes, for report provenance.
inline std::string digest_hex(const std::string& bytes) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

// ---------------------------------------------------------------------------
// report rendering
// ---------------------------------------------------------------------------

struct ReportDocument {
    std::string text;
};

namespace detail {

inline std::string num_str(double x) {
    if (x == 0) x = 0;  // normalize -0
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

inline std::string cplx_str(const BigComplex& z) {
    double re = z.re.to_double(), im = z.im.to_double();
    if (im == 0) return num_str(re);
    std::string s = num_str(re);
    s += im < 0 ? " - " : " + ";
    return s + num_str(std::fabs(im)) + "*i";
}

inline std::string join_sym(const std::vector<SymbolicComplex>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + print_scalar(v[i]);
    return s;
}

inline std::string sym_real_str(const SymbolicReal& x) {
    SymbolicComplex c(x.basis());
    c.re = x;
    return print_scalar(c);
}

inline std::string report_header(const std::string& command, const std::string& digest,
                                 const InputDocument& doc) {
    std::string out = "# orbitreg " + command + " report\n";
    out += std::string("version = ") + tool_version + "\n";
    out += "input_digest = " + digest + "\n";
    out += "\n[assumptions]\n";
    ConstantBasis unit;
    out += (doc.basis ? doc.basis->independence_note() : unit.independence_note()) + "\n";
    out += "tolerances: numeric relations below tau are treated as exact zero (heuristic tier)\n";
    return out;
}

inline void render_closure_body(std::string& out, const ClosureDecomposition& cd,
                                const std::string& indent = "") {
    out += indent + "ambient_dim = " + std::to_string(cd.d) + "\n";
    out += indent + "span_dim = " + std::to_string(cd.span_dim) + "\n";
    out += indent + "closure_dim = " + std::to_string(cd.dim) + "\n";
    out += indent + "lattice_rank = " + std::to_string(cd.lattice_basis.size()) + "\n";
    out += indent + std::string("heuristic = ") + (cd.heuristic ? "true" : "false") + "\n";
    for (const auto& row : cd.M) {
        out += indent + "dual_lattice_row =";
        for (const auto& z : row) out += " " + z.get_str();
        out += "\n";
    }
    for (const auto& v : cd.V_basis) {
        out += indent + "subspace_basis =";
        for (const auto& x : v) out += " " + num_str(x.to_double());
        out += "\n";
    }
    for (const auto& v : cd.lattice_basis) {
        out += indent + "lattice_basis =";
        for (const auto& x : v) out += " " + num_str(x.to_double());
        out += "\n";
    }
    if (cd.min_lattice_norm)
        out += indent + "min_lattice_norm = " + num_str(cd.min_lattice_norm->to_double()) + "\n";
}

}  // namespace detail

inline ReportDocument render_analyze(const InputDocument& doc, const std::string& digest,
                                     const std::vector<OrbitReport>& reports) {
    std::string out = detail::report_header("analyze", digest, doc);
    for (size_t v = 0; v < reports.size(); ++v) {
        const OrbitReport& r = reports[v];
        out += "\n[vector " + doc.vectors[v].first + "]\n";
        out += "u = " + detail::join_sym(r.u) + "\n";
        out += "n = " + std::to_string(r.n) + "\n";
        out += std::string("field = ") + (r.real_field ? "R" : "C") + "\n";
        out += std::string("tier = ") + (r.exact ? "exact" : "numeric") + "\n";
        out += std::string("heuristic = ") + (r.heuristic ? "true" : "false") + "\n";
        out += "r = " + std::to_string(r.r_u) + "\n";
        out += "order = " + std::to_string(r.m) + "\n";
        out += "classification = " + r.classification + "\n";
        for (size_t c = 0; c < r.E.dim; ++c) {
            out += "orbit_span_basis = ";
            if (r.E.exact && r.E.sym) {
                auto col = get_col(*r.E.sym, c);
                out += detail::join_sym(col);
            } else {
                for (size_t i = 0; i < r.E.n; ++i)
                    out += (i ? ", " : "") + detail::cplx_str(r.E.num(i, c));
            }
            out += "\n";
        }
        for (size_t k = 0; k < r.gu.num.size(); ++k) {
            out += "gu_generator = ";
            if (r.gu.sym) {
                const auto& g = (*r.gu.sym)[k];
                for (size_t i = 0; i < g.size(); ++i)
                    out += (i ? ", " : "") + detail::sym_real_str(g[i]);
            } else {
                for (size_t i = 0; i < r.gu.num[k].size(); ++i)
                    out += (i ? ", " : "") + detail::num_str(r.gu.num[k][i].to_double());
            }
            if (k < r.gu.provenance.size()) out += "   # " + r.gu.provenance[k];
            out += "\n";
        }
        if (r.closure) detail::render_closure_body(out, *r.closure);
        for (const auto& h : r.hyperplanes) {
            out += "singular_hyperplane =";
            for (const auto& z : h) out += " " + detail::cplx_str(z);
            out += "\n";
        }
        for (const auto& nt : r.notes) out += "note = " + nt + "\n";
    }
    return {std::move(out)};
}

inline ReportDocument render_normal_form(const InputDocument& doc, const std::string& digest,
                                         const NormalForm& nf) {
    std::string out = detail::report_header("normal-form", digest, doc);
    out += "\n[normal_form]\n";
    out += std::string("tier = ") + (nf.exact ? "exact" : "numeric") + "\n";
    out += "eta =";
    for (size_t e : nf.eta()) out += " " + std::to_string(e);
    out += "\n";
    auto emit_mat = [&](const std::string& key, auto const& m, auto&& entry) {
        for (size_t i = 0; i < m.rows; ++i) {
            out += key + " =";
            for (size_t j = 0; j < m.cols; ++j) out += std::string(j ? ", " : " ") + entry(m(i, j));
            out += "\n";
        }
    };
    auto sym_entry = [](const SymbolicComplex& z) { return print_scalar(z); };
    auto num_entry = [](const BigComplex& z) { return detail::cplx_str(z); };
    if (nf.exact) {
        emit_mat("P_row", nf.sym->P, sym_entry);
        emit_mat("Pinv_row", nf.sym->Pinv, sym_entry);
        for (size_t k = 0; k < nf.sym->transformed.size(); ++k) {
            out += "[transformed_generator " + std::to_string(k + 1) + "]\n";
            emit_mat("row", nf.sym->transformed[k], sym_entry);
        }
    } else {
        emit_mat("P_row", nf.num->P, num_entry);
        emit_mat("Pinv_row", nf.num->Pinv, num_entry);
        for (size_t k = 0; k < nf.num->transformed.size(); ++k) {
            out += "[transformed_generator " + std::to_string(k + 1) + "]\n";
            emit_mat("row", nf.num->transformed[k], num_entry);
        }
    }
    for (const auto& nt : nf.notes) out += "note = " + nt + "\n";
    return {std::move(out)};
}

inline ReportDocument render_closure_report(const InputDocument& doc, const std::string& digest,
                                            const ClosureDecomposition& cd) {
    std::string out = detail::report_header("closure", digest, doc);
    out += "\n[closure]\n";
    detail::render_closure_body(out, cd);
    return {std::move(out)};
}

inline ReportDocument render_sample(const InputDocument& doc, const std::string& digest,
                                    const std::vector<std::pair<std::string, OracleDiagnostic>>& diags,
                                    const std::vector<std::pair<std::string, const OrbitCloud*>>& clouds) {
    std::string out = detail::report_header("sample", digest, doc);
    for (size_t i = 0; i < diags.size(); ++i) {
        const auto& d = diags[i].second;
        out += "\n[vector " + diags[i].first + "]\n";
        const OrbitCloud* c = clouds[i].second;
        out += "points = " + std::to_string(c->points.size()) + "\n";
        out += "discarded = " + std::to_string(c->discarded) + "\n";
        out += "analytic_order = " + std::to_string(d.analytic_m) + "\n";
        out += "box_dimension_estimate = " +
               (d.estimate ? detail::num_str(*d.estimate) : std::string("none")) + "\n";
        out += "fit_residual = " + detail::num_str(d.residual) + "\n";
        out += "verdict = " + d.verdict + "\n";
        if (!d.note.empty()) out += "note = " + d.note + "\n";
    }
    return {std::move(out)};
}

}  // namespace orbitreg

// orbitreg: batch front end for orbit-regularity analysis.
//
//   orbitreg <analyze|normal-form|closure|sample> <file>
//            [--precision N] [--tau T] [--strict-exact] [--word-length L] [--export PATH]
//
// Environment overrides: ORBITREG_ + uppercased flag name (ORBITREG_PRECISION,
// ORBITREG_TAU, ORBITREG_STRICT_EXACT, ORBITREG_WORD_LENGTH, ORBITREG_EXPORT).
// Precedence: command-line flag > environment > file [options] > defaults.
//
// Exit codes: 0 success; 2 precondition/validation error; 3 tier failure under
// --strict-exact; 1 anything else.

#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "orbitreg/orbitreg.hpp"

using namespace orbitreg;

namespace {

struct CliOptions {
    std::string cmd;
    std::string path;
    std::optional<int> precision;
    std::optional<std::string> tau;
    std::optional<bool> strict_exact;
    std::optional<long> word_length;
    std::optional<std::string> export_path;
};

void usage(std::ostream& os) {
    os << "usage: orbitreg <analyze|normal-form|closure|sample> <file>\n"
          "               [--precision N] [--tau T] [--strict-exact] [--word-length L]\n"
          "               [--export PATH]\n";
}

std::optional<std::string> env_str(const char* name) {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
}

CliOptions parse_args(int argc, char** argv) {
    CliOptions o;
    std::vector<std::string> pos;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        auto need_value = [&]() -> std::string {
            if (i + 1 >= argc) throw ValidationError("flag " + a + " needs a value");
            return argv[++i];
        };
        if (a == "--precision") o.precision = std::stoi(need_value());
        else if (a == "--tau") o.tau = need_value();
        else if (a == "--strict-exact") o.strict_exact = true;
        else if (a == "--word-length") o.word_length = std::stol(need_value());
        else if (a == "--export") o.export_path = need_value();
        else if (a == "--help" || a == "-h") { usage(std::cout); std::exit(0); }
        else if (!a.empty() && a[0] == '-') throw ValidationError("unknown flag: " + a);
        else pos.push_back(a);
    }
    // environment fills anything not given on the command line
    if (!o.precision)
        if (auto v = env_str("ORBITREG_PRECISION")) o.precision = std::stoi(*v);
    if (!o.tau) o.tau = env_str("ORBITREG_TAU");
    if (!o.strict_exact)
        if (auto v = env_str("ORBITREG_STRICT_EXACT")) o.strict_exact = (*v == "1" || *v == "true");
    if (!o.word_length)
        if (auto v = env_str("ORBITREG_WORD_LENGTH")) o.word_length = std::stol(*v);
    if (!o.export_path) o.export_path = env_str("ORBITREG_EXPORT");

    if (pos.size() != 2) throw ValidationError("expected a command and an input file");
    o.cmd = pos[0];
    o.path = pos[1];
    if (o.cmd != "analyze" && o.cmd != "normal-form" && o.cmd != "closure" && o.cmd != "sample")
        throw ValidationError("unknown command: " + o.cmd);
    return o;
}

BackendConfig effective_config(const InputDocument& doc, const CliOptions& o) {
    BackendConfig cfg = doc.config();
    if (o.precision) cfg.digits = *o.precision;
    if (cfg.digits < 30) throw ValidationError("precision must be at least 30 digits");
    if (o.tau) {
        BigFloat t(*o.tau, bits_for_digits(cfg.digits));
        if (t.is_nan()) throw ValidationError("bad tau literal: " + *o.tau);
        cfg.tau_override = t;
    }
    if (o.strict_exact) cfg.strict_exact = *o.strict_exact;
    if (o.word_length) {
        if (*o.word_length < 1) throw ValidationError("word length must be at least 1");
        cfg.sampler_L = int(*o.word_length);
    }
    return cfg;
}

int cmd_analyze(const InputDocument& doc, const std::string& digest, const BackendConfig& cfg) {
    GroupSpec spec = doc.spec();
    spec.cfg = cfg;
    if (doc.vectors.empty()) throw ValidationError("analyze needs at least one entry in [vectors]");
    validate_spec(spec);
    std::vector<std::future<OrbitReport>> futs;
    for (const auto& [name, v] : doc.vectors)
        futs.push_back(std::async(std::launch::async, [&spec, &v] { return orbit_order(spec, v); }));
    std::vector<OrbitReport> reports;
    for (auto& f : futs) reports.push_back(f.get());
    std::cout << render_analyze(doc, digest, reports).text;
    return 0;
}

int cmd_normal_form(const InputDocument& doc, const std::string& digest, const BackendConfig& cfg) {
    GroupSpec spec = doc.spec();
    spec.cfg = cfg;
    NormalForm nf = build_normal_form(spec);
    std::cout << render_normal_form(doc, digest, nf).text;
    return 0;
}

int cmd_closure(const InputDocument& doc, const std::string& digest, const BackendConfig& cfg) {
    if (doc.vectors.empty())
        throw ValidationError("closure needs the additive-group generators in [vectors]");
    std::vector<std::vector<SymbolicReal>> gens;
    for (const auto& [name, v] : doc.vectors) {
        std::vector<SymbolicReal> g;
        for (const auto& z : v) {
            if (!z.im.is_zero())
                throw ValidationError("closure generators must be real; " + name + " is not");
            g.push_back(z.re);
        }
        gens.push_back(std::move(g));
    }
    RealGens rg = real_gens_from_symbolic(std::move(gens), cfg.digits);
    ClosureDecomposition cd = closure_decomposition(rg, cfg);
    std::cout << render_closure_report(doc, digest, cd).text;
    return 0;
}

int cmd_sample(const InputDocument& doc, const std::string& digest, const BackendConfig& cfg,
               const CliOptions& o) {
    GroupSpec spec = doc.spec();
    spec.cfg = cfg;
    if (doc.vectors.empty()) throw ValidationError("sample needs at least one entry in [vectors]");
    validate_spec(spec);
    std::vector<OrbitCloud> clouds;
    std::vector<std::pair<std::string, OracleDiagnostic>> diags;
    std::vector<std::pair<std::string, const OrbitCloud*>> cloud_refs;
    for (const auto& [name, v] : doc.vectors) {
        OrbitReport rep = orbit_order(spec, v);
        std::optional<BigFloat> R;
        if (cfg.sampler_R) {
            BigFloat r(cfg.work_bits());
            mpfr_set_d(r.raw(), *cfg.sampler_R, MPFR_RNDN);
            R = r;
        }
        clouds.push_back(enumerate_orbit(spec, v, cfg.sampler_L, R));
        diags.emplace_back(name, oracle_compare(rep, clouds.back()));
    }
    for (size_t i = 0; i < clouds.size(); ++i) cloud_refs.emplace_back(diags[i].first, &clouds[i]);
    if (o.export_path) {
        for (size_t i = 0; i < clouds.size(); ++i) {
            std::string path = *o.export_path;
            if (clouds.size() > 1) path += "." + diags[i].first;
            std::ofstream os(path);
            if (!os) throw ValidationError("cannot open export path: " + path);
            export_cloud(clouds[i], os);
        }
    }
    std::cout << render_sample(doc, digest, diags, cloud_refs).text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        CliOptions o = parse_args(argc, argv);
        std::ifstream in(o.path);
        if (!in) {
            std::cerr << "error: cannot read input file: " << o.path << "\n";
            return 2;
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        std::string bytes = buf.str();
        InputDocument doc = parse_input(bytes);
        std::string digest = digest_hex(bytes);
        BackendConfig cfg = effective_config(doc, o);
        if (o.cmd == "analyze") return cmd_analyze(doc, digest, cfg);
        if (o.cmd == "normal-form") return cmd_normal_form(doc, digest, cfg);
        if (o.cmd == "closure") return cmd_closure(doc, digest, cfg);
        return cmd_sample(doc, digest, cfg, o);
    } catch (const TierError& e) {
        std::cerr << "error (tier): " << e.what() << "\n";
        return 3;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: bad numeric argument: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}

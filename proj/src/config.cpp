#include "zfrate/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <set>
#include <sstream>

namespace zfrate {

ConfigError::ConfigError(const std::string& source, int line, const std::string& msg)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : "") + ": " + msg), line_(line) {}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last && std::isfinite(out);
}

bool parse_int(const std::string& s, int& out) {
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::string shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + shortest(v[i]);
    return out;
}

const std::set<std::string> kRefMethods = {"causal", "anticausal", "noncausal_plain", "noncausal_rho"};

bool valid_ref_key(const std::string& key) {
    if (key == "ref.lower") return true;
    for (const char* kind : {"ref.odd.", "ref.nonodd."}) {
        const std::string p = kind;
        if (key.rfind(p, 0) == 0 && kRefMethods.count(key.substr(p.size()))) return true;
    }
    return false;
}

}  // namespace

Causality parse_causality(const std::string& s) {
    if (s == "causal") return Causality::Causal;
    if (s == "anticausal") return Causality::Anticausal;
    if (s == "noncausal") return Causality::Noncausal;
    throw std::invalid_argument("unknown class '" + s + "' (causal, anticausal, noncausal)");
}

Framework parse_framework(const std::string& s) {
    if (s == "iqc") return Framework::Iqc;
    if (s == "rho-iqc") return Framework::RhoIqc;
    throw std::invalid_argument("unknown framework '" + s + "' (iqc, rho-iqc)");
}

Scheme parse_scheme(const std::string& s) {
    if (s == "psi1") return Scheme::Psi1;
    if (s == "psi2") return Scheme::Psi2;
    if (s == "psi3") return Scheme::Psi3;
    if (s == "psi3rho") return Scheme::Psi3Rho;
    throw std::invalid_argument("unknown scheme '" + s + "' (psi1, psi2, psi3, psi3rho)");
}

RunConfig parse_config(std::istream& in, const std::string& source) {
    RunConfig c;
    std::set<std::string> seen;
    std::string raw;
    int lineno = 0;
    auto fail = [&](const std::string& msg) { throw ConfigError(source, lineno, msg); };
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) fail("empty key");
        if (!seen.insert(key).second) fail("duplicate key '" + key + "'");

        auto num = [&]() {
            double v = 0.0;
            if (!parse_double(val, v)) fail("'" + key + "' expects a number, got '" + val + "'");
            return v;
        };
        auto integer = [&]() {
            int v = 0;
            if (!parse_int(val, v) || v < 0) fail("'" + key + "' expects a nonnegative integer, got '" + val + "'");
            return v;
        };
        auto list = [&]() {
            std::string s = val;
            std::replace(s.begin(), s.end(), ',', ' ');
            std::istringstream ss(s);
            std::vector<double> out;
            std::string tok;
            while (ss >> tok) {
                double v = 0.0;
                if (!parse_double(tok, v)) fail("'" + key + "' has a bad coefficient '" + tok + "'");
                out.push_back(v);
            }
            if (out.empty()) fail("'" + key + "' needs at least one coefficient");
            return out;
        };
        auto wrap = [&](auto&& f) {
            try {
                return f();
            } catch (const std::invalid_argument& e) {
                fail(e.what());
            }
            return decltype(f())();
        };

        if (key == "format") {
            c.format = integer();
            if (c.format != 1) fail("unsupported format " + val + " (expected 1)");
        } else if (key == "name") {
            c.name = val;
        } else if (key == "num") {
            c.num = list();
        } else if (key == "den") {
            c.den = list();
        } else if (key == "K") {
            c.K = num();
            if (!(c.K > 0.0)) fail("K must be positive");
        } else if (key == "class") {
            c.causality = wrap([&] { return parse_causality(val); });
        } else if (key == "framework") {
            c.framework = wrap([&] { return parse_framework(val); });
        } else if (key == "scheme") {
            c.scheme = wrap([&] { return parse_scheme(val); });
        } else if (key == "n_b") {
            c.n_b = integer();
        } else if (key == "n_f") {
            c.n_f = integer();
        } else if (key == "n_z") {
            c.n_z = integer();
        } else if (key == "odd") {
            if (val == "true" || val == "1")
                c.odd = true;
            else if (val == "false" || val == "0")
                c.odd = false;
            else
                fail("'odd' expects true or false");
        } else if (key == "bisect_tol") {
            c.bisect_tol = num();
            if (!(c.bisect_tol > 0.0)) fail("bisect_tol must be positive");
        } else if (key == "grid_n") {
            c.grid_n = integer();
            if (c.grid_n < 64) fail("grid_n must be at least 64");
        } else if (key == "csv") {
            c.csv = val;
        } else if (key.rfind("ref.", 0) == 0) {
            if (!valid_ref_key(key)) fail("unknown reference key '" + key + "'");
            double v = 0.0;
            if (val != "invalid" && !parse_double(val, v)) fail("'" + key + "' expects a number or 'invalid'");
            c.refs[key] = val;
        } else {
            fail("unknown key '" + key + "'");
        }
    }
    lineno = 0;
    if (!seen.count("format")) fail("missing required key 'format'");
    if (!seen.count("num")) fail("missing required key 'num'");
    if (!seen.count("den")) fail("missing required key 'den'");
    if (!seen.count("K")) fail("missing required key 'K'");
    try {
        TransferFunction tf(c.num, c.den);
        resolve_pipeline({c.causality, c.framework}, c.scheme, c.n_b, c.n_f);
    } catch (const InvalidScheme& e) {
        throw InvalidScheme(source + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "cannot open file");
    return parse_config(in, path);
}

std::string serialize(const RunConfig& c) {
    std::ostringstream os;
    os << "format=" << c.format << "\n";
    if (!c.name.empty()) os << "name=" << c.name << "\n";
    os << "num=" << join(c.num) << "\n";
    os << "den=" << join(c.den) << "\n";
    os << "K=" << shortest(c.K) << "\n";
    os << "class=" << to_string(c.causality) << "\n";
    os << "framework=" << to_string(c.framework) << "\n";
    os << "scheme=" << to_string(c.scheme) << "\n";
    os << "n_b=" << c.n_b << "\n";
    os << "n_f=" << c.n_f << "\n";
    os << "odd=" << (c.odd ? "true" : "false") << "\n";
    os << "bisect_tol=" << shortest(c.bisect_tol) << "\n";
    os << "grid_n=" << c.grid_n << "\n";
    if (!c.csv.empty()) os << "csv=" << c.csv << "\n";
    if (c.n_z > 0) os << "n_z=" << c.n_z << "\n";
    for (const auto& [k, v] : c.refs) os << k << "=" << v << "\n";
    return os.str();
}

Query to_query(const RunConfig& c) {
    Query q;
    q.plant = TransferFunction(c.num, c.den);
    q.K = c.K;
    q.cls = {c.causality, c.framework};
    q.odd = c.odd;
    q.n_b = c.n_b;
    q.n_f = c.n_f;
    q.scheme = c.scheme;
    q.bisect_tol = c.bisect_tol;
    q.grid_n = c.grid_n;
    return q;
}

std::optional<double> reference(const RunConfig& c, const std::string& key) {
    const auto it = c.refs.find(key);
    if (it == c.refs.end()) return std::nullopt;
    if (it->second == "invalid") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    parse_double(it->second, v);
    return v;
}

}  // namespace zfrate

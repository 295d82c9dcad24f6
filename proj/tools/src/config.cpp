#include "rswave_cli/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "rswave/error.hpp"
#include "rswave/parallel.hpp"

namespace rswave::cli {

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"geometry", {"lo", "hi", "x0", "kappa", "T", "search_points"}},
        {"discretization", {"nx", "dt", "scheme", "cfl"}},
        {"coefficients", {"a1", "a2", "a3", "a4", "a5"}},
        {"carleman",
         {"r2", "beta", "beta_cap", "positivity_lambdas", "positivity_mus", "positivity_samples",
          "check_zd3", "identity_case", "identity_beta", "identity_lambda", "identity_mu",
          "ladder", "ladder_steps_per_cell", "mc_nx", "mc_steps", "mc_noise", "ratio_lambdas",
          "ratio_mus", "ratio_nx", "ratio_steps_per_cell", "ratio_delta"}},
        {"mc", {"paths", "seed", "workers"}},
        {"control",
         {"zT", "zhatT", "family", "scan_T", "y0", "yhat0", "y1", "yhat1", "tol", "max_iter",
          "filter", "filter_fraction", "strict"}},
        {"output", {"dir", "prefix", "dump", "stride"}},
    };
    return s;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> parts;
    boost::split(parts, text, boost::is_any_of(","));
    for (auto& p : parts) boost::trim(p);
    parts.erase(std::remove_if(parts.begin(), parts.end(), [](const std::string& p) { return p.empty(); }),
                parts.end());
    return parts;
}

double to_double(const std::string& where, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(where + ": '" + text + "' is not a finite number");
}

long to_long(const std::string& where, const std::string& text) {
    try {
        std::size_t used = 0;
        const long v = std::stol(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(where + ": '" + text + "' is not an integer");
}

bool to_bool(const std::string& where, const std::string& text) {
    const std::string t = boost::to_lower_copy(text);
    if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
    if (t == "0" || t == "false" || t == "no" || t == "off") return false;
    throw ConfigError(where + ": '" + text + "' is not a boolean");
}

class Reader {
public:
    explicit Reader(const RawConfig& raw) : raw_(raw) {}

    bool has(const std::string& s, const std::string& k) const { return raw_.has(s, k); }
    std::string str(const std::string& s, const std::string& k, const std::string& d) const {
        return raw_.get(s, k, d);
    }
    double num(const std::string& s, const std::string& k, double d) const {
        return has(s, k) ? to_double(s + "." + k, raw_.get(s, k, "")) : d;
    }
    int integer(const std::string& s, const std::string& k, int d) const {
        return has(s, k) ? static_cast<int>(to_long(s + "." + k, raw_.get(s, k, ""))) : d;
    }
    bool flag(const std::string& s, const std::string& k, bool d) const {
        return has(s, k) ? to_bool(s + "." + k, raw_.get(s, k, "")) : d;
    }
    std::vector<double> nums(const std::string& s, const std::string& k,
                             std::vector<double> d) const {
        if (!has(s, k)) return d;
        std::vector<double> out;
        for (const auto& p : split_list(raw_.get(s, k, ""))) out.push_back(to_double(s + "." + k, p));
        if (out.empty()) throw ConfigError(s + "." + k + ": empty list");
        return out;
    }
    std::vector<int> ints(const std::string& s, const std::string& k, std::vector<int> d) const {
        if (!has(s, k)) return d;
        std::vector<int> out;
        for (const auto& p : split_list(raw_.get(s, k, "")))
            out.push_back(static_cast<int>(to_long(s + "." + k, p)));
        if (out.empty()) throw ConfigError(s + "." + k + ": empty list");
        return out;
    }
    std::vector<std::string> strs(const std::string& s, const std::string& k,
                                  std::vector<std::string> d) const {
        if (!has(s, k)) return d;
        auto out = split_list(raw_.get(s, k, ""));
        if (out.empty()) throw ConfigError(s + "." + k + ": empty list");
        return out;
    }

private:
    const RawConfig& raw_;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

}  // namespace

RawConfig RawConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return from_stream(in, path);
}

RawConfig RawConfig::from_string(const std::string& text) {
    std::istringstream in(text);
    return from_stream(in, "<string>");
}

RawConfig RawConfig::from_stream(std::istream& in, const std::string& origin) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    std::ostringstream text;
    for (const auto& [section, body] : tree) {
        const auto it = schema().find(section);
        if (it == schema().end()) throw ConfigError(origin + ": unknown section [" + section + "]");
        if (body.empty()) throw ConfigError(origin + ": key '" + section + "' outside any section");
        for (const auto& [key, value] : body) {
            if (!it->second.count(key))
                throw ConfigError(origin + ": unknown key '" + key + "' in [" + section + "]");
            text << section << '.' << key << '=' << boost::trim_copy(value.data()) << '\n';
        }
    }
    RawConfig raw;
    std::istringstream lines(text.str());
    for (std::string line; std::getline(lines, line);) {
        const auto eq = line.find('=');
        raw.values_[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return raw;
}

bool RawConfig::has(const std::string& section, const std::string& key) const {
    return values_.count(section + "." + key) != 0;
}

std::string RawConfig::get(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
    const auto it = values_.find(section + "." + key);
    return it == values_.end() ? fallback : it->second;
}

std::string RawConfig::canonical() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
    return out;
}

std::uint64_t RawConfig::hash() const {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : canonical()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

ExperimentConfig ExperimentConfig::from_raw(const RawConfig& raw) {
    const Reader r(raw);
    ExperimentConfig c;

    auto& g = c.geometry;
    g.lo = r.nums("geometry", "lo", {0.0});
    g.hi = r.nums("geometry", "hi", std::vector<double>(g.lo.size(), 1.0));
    g.x0 = r.nums("geometry", "x0", std::vector<double>(g.lo.size(), -0.1));
    g.kappa = r.num("geometry", "kappa", 0.95);
    g.T = r.num("geometry", "T", 2.5);
    g.search_points = r.integer("geometry", "search_points", 0);
    g.validate();

    auto& d = c.discretization;
    d.nx = r.ints("discretization", "nx", std::vector<int>(g.lo.size(), 100));
    if (d.nx.size() == 1 && g.dim() == 2) d.nx.push_back(d.nx[0]);
    require(static_cast<int>(d.nx.size()) == g.dim(), "discretization.nx must give one count per axis");
    for (int n : d.nx) require(n >= 2, "discretization.nx must be at least 2");
    d.scheme = parse_scheme(r.str("discretization", "scheme", "midpoint"));
    d.cfl = r.num("discretization", "cfl", 1.0);
    require(d.cfl > 0.0, "discretization.cfl must be positive");
    d.dt = r.num("discretization", "dt", 0.0);
    require(d.dt >= 0.0, "discretization.dt must be non-negative");

    for (int i = 0; i < 5; ++i)
        c.coefficients[i] = r.str("coefficients", "a" + std::to_string(i + 1), "0");

    auto& k = c.carleman;
    k.r2 = r.num("carleman", "r2", k.r2);
    k.beta = r.num("carleman", "beta", k.beta);
    k.beta_cap = r.num("carleman", "beta_cap", k.beta_cap);
    k.positivity_lambdas = r.nums("carleman", "positivity_lambdas", k.positivity_lambdas);
    k.positivity_mus = r.nums("carleman", "positivity_mus", k.positivity_mus);
    k.positivity_samples = r.integer("carleman", "positivity_samples", k.positivity_samples);
    k.check_zd3 = r.flag("carleman", "check_zd3", k.check_zd3);
    k.identity_case = r.str("carleman", "identity_case", k.identity_case);
    require(k.identity_case == "manufactured" || k.identity_case == "zero",
            "carleman.identity_case must be 'manufactured' or 'zero'");
    k.identity_beta = r.num("carleman", "identity_beta", k.identity_beta);
    k.identity_lambda = r.num("carleman", "identity_lambda", k.identity_lambda);
    k.identity_mu = r.num("carleman", "identity_mu", k.identity_mu);
    k.ladder = r.ints("carleman", "ladder", k.ladder);
    for (int n : k.ladder) require(n >= 8, "carleman.ladder entries must be at least 8");
    k.ladder_steps_per_cell = r.integer("carleman", "ladder_steps_per_cell", k.ladder_steps_per_cell);
    k.mc_nx = r.integer("carleman", "mc_nx", k.mc_nx);
    k.mc_steps = r.integer("carleman", "mc_steps", k.mc_steps);
    k.mc_noise = r.num("carleman", "mc_noise", k.mc_noise);
    k.ratio_lambdas = r.nums("carleman", "ratio_lambdas", k.ratio_lambdas);
    k.ratio_mus = r.nums("carleman", "ratio_mus", k.ratio_mus);
    k.ratio_nx = r.integer("carleman", "ratio_nx", k.ratio_nx);
    k.ratio_steps_per_cell = r.integer("carleman", "ratio_steps_per_cell", k.ratio_steps_per_cell);
    k.ratio_delta = r.num("carleman", "ratio_delta", k.ratio_delta);
    require(k.beta >= 0.0 && k.beta_cap > 0.0, "carleman.beta must be >= 0 and beta_cap > 0");
    require(k.positivity_samples >= 1, "carleman.positivity_samples must be positive");
    require(k.ladder_steps_per_cell >= 1 && k.ratio_steps_per_cell >= 1,
            "steps per cell must be positive");
    require(k.mc_nx >= 8 && k.mc_steps >= 8, "carleman.mc_nx and mc_steps must be at least 8");
    require(k.ratio_nx >= 0, "carleman.ratio_nx must be non-negative");
    require(k.ratio_delta >= 0.0, "carleman.ratio_delta must be non-negative");

    auto& m = c.mc;
    m.paths = r.integer("mc", "paths", m.paths);
    require(m.paths == 0 || m.paths >= 2, "mc.paths must be 0 (skip) or at least 2");
    const long seed = r.has("mc", "seed") ? to_long("mc.seed", raw.get("mc", "seed", "")) : 1;
    require(seed >= 0, "mc.seed must be non-negative");
    m.seed = static_cast<std::uint64_t>(seed);
    m.workers = r.integer("mc", "workers", m.workers);
    require(m.workers >= 0, "mc.workers must be non-negative");

    auto& u = c.control;
    u.zT = r.str("control", "zT", u.zT);
    u.zhatT = r.str("control", "zhatT", u.zhatT);
    u.family = r.strs("control", "family", u.family);
    u.scan_T = r.nums("control", "scan_T", u.scan_T);
    for (double T : u.scan_T) require(T > 0.0, "control.scan_T entries must be positive");
    u.y0 = r.str("control", "y0", u.y0);
    u.yhat0 = r.str("control", "yhat0", u.yhat0);
    u.y1 = r.str("control", "y1", u.y1);
    u.yhat1 = r.str("control", "yhat1", u.yhat1);
    u.tol = r.num("control", "tol", u.tol);
    u.max_iter = r.integer("control", "max_iter", u.max_iter);
    u.filter = r.flag("control", "filter", u.filter);
    u.filter_fraction = r.num("control", "filter_fraction", u.filter_fraction);
    u.strict = r.flag("control", "strict", u.strict);
    require(u.tol > 0.0 && u.max_iter >= 1, "control.tol and control.max_iter must be positive");
    require(u.filter_fraction > 0.0 && u.filter_fraction <= 1.0,
            "control.filter_fraction must lie in (0, 1]");

    auto& o = c.output;
    o.dir = r.str("output", "dir", o.dir);
    o.prefix = r.str("output", "prefix", o.prefix);
    o.dump = r.flag("output", "dump", o.dump);
    o.stride = r.integer("output", "stride", o.stride);
    require(o.stride >= 1, "output.stride must be positive");

    c.hash = raw.hash();

    // Cross-section checks that need no solve.
    const Grid grid = c.grid();
    (void)grid;
    (void)c.coefficient_set();
    return c;
}

CoefficientSet ExperimentConfig::coefficient_set() const {
    CoefficientSet c;
    Coefficient* slots[5] = {&c.a1, &c.a2, &c.a3, &c.a4, &c.a5};
    for (int i = 0; i < 5; ++i) {
        const std::string& text = coefficients[i];
        if (text != "0") *slots[i] = Coefficient::expression(text);
    }
    return c;
}

Grid ExperimentConfig::grid() const {
    const auto& d = discretization;
    double hmin = 0.0;
    for (int i = 0; i < geometry.dim(); ++i) {
        const double h = (geometry.hi[i] - geometry.lo[i]) / d.nx[i];
        hmin = i == 0 ? h : std::min(hmin, h);
    }
    double dt = d.dt;
    if (dt == 0.0) dt = d.scheme == Scheme::Leapfrog ? d.cfl * hmin : 0.5 * hmin;
    if (d.scheme == Scheme::Leapfrog && dt > d.cfl * hmin * (1.0 + 1e-12))
        throw ConfigError("discretization.dt exceeds cfl * min h for the leapfrog scheme");
    Grid g = Grid::with_time_step(geometry.lo, geometry.hi, d.nx, geometry.T, dt, d.scheme);
    coefficient_set().validate(g);
    return g;
}

double ExperimentConfig::r2() const {
    if (carleman.r2 >= 0.0) return carleman.r2;
    return coefficient_sizes(coefficient_set(), grid()).r2;
}

CarlemanParams ExperimentConfig::carleman_params() const {
    BetaSearchOptions opt;
    opt.beta_cap = carleman.beta_cap;
    if (carleman.beta > 0.0) return params_for_beta(geometry, carleman.beta, r2(), opt);
    return choose_beta(geometry, r2(), opt);
}

int ExperimentConfig::workers() const {
    if (const char* env = std::getenv("RSWAVE_WORKERS"); env && *env) return resolve_workers(0);
    return resolve_workers(mc.workers);
}

}  // namespace rswave::cli

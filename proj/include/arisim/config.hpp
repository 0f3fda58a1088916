#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace arisim {

enum class Mode { ActiveRIS, PassiveRIS, NoRIS };
enum class ChiConvention { TauC, Tau }; // denominator of the pilot-overhead factor

enum class ConfigErrorKind {
    NonSquareArray,
    PilotTooShort,
    NonPositivePower,
    InfeasiblePower,
    BadValue,
    UnknownKey,
    Io,
};

class ConfigError : public std::runtime_error {
  public:
    ConfigError(ConfigErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    ConfigErrorKind kind() const { return kind_; }

  private:
    ConfigErrorKind kind_;
};

struct GaParams {
    int population = 100;
    int elites = 5;
    int crossover = 76;
    int mutation = 19;
    double mutation_prob = 0.1;
    int max_iters = 0; // 0 means 100*N
    double stall_tol = 1e-4;
    int stall_window = 20;
};

// Full scenario description. All powers in dBm here; validate() precomputes
// the linear-watts fields everything else consumes.
struct SystemConfig {
    int M = 64;
    int N = 16;
    int K = 8;
    double delta = 1.0;
    std::vector<double> epsilon; // empty = broadcast epsilon_scalar
    double epsilon_scalar = 1.0;
    double r_UR = 20.0;
    double d_RB = 700.0;
    int tau_c = 196;
    int tau = 8;
    double sigma2_dBm = -104.0;
    double sigma_e2_dBm = -70.0;
    double v = 2.0;
    double P_total_dBm = 20.0;
    double P_SC_dBm = -10.0;
    double P_DC_dBm = -5.0;
    double xi = 0.8;
    double d_over_lambda = 0.5;
    Mode mode = Mode::ActiveRIS;
    std::uint64_t seed = 1;
    ChiConvention chi_convention = ChiConvention::TauC;
    bool leak_conj_phase_term = true; // keep the double-conjugate phasor sum in the leakage
    GaParams ga;
};

inline double dbm_to_watts(double p_dbm) {
    return std::pow(10.0, (p_dbm - 30.0) / 10.0);
}

inline double watts_to_dbm(double p_w) {
    return 10.0 * std::log10(p_w) + 30.0;
}

inline bool is_perfect_square(int x) {
    if (x <= 0) return false;
    const int r = int(std::lround(std::sqrt(double(x))));
    return r * r == x;
}

// Large-scale fading gains of the three links (users on a semicircle of
// radius r_UR around the RIS, BS at distance d_RB).
struct PathLossSet {
    std::vector<double> alpha; // user-RIS
    double beta = 0.0;         // RIS-BS
    std::vector<double> gamma; // user-BS direct
    std::vector<double> d_UB;  // user-BS distances, meters
};

struct ValidatedConfig {
    SystemConfig cfg;
    int sqrt_M = 0;
    int sqrt_N = 0;
    std::vector<double> epsilon; // resolved, length K
    double sigma2_w = 0.0;
    double sigma_e2_w = 0.0; // as configured
    double P_total_w = 0.0;
    double P_SC_w = 0.0;
    double P_DC_w = 0.0;
    // Mode-effective values: passive and no-RIS baselines run without RIS
    // thermal noise and without phase noise.
    double sigma_e2_eff = 0.0;
    double v_eff = 0.0;

    double chi() const {
        const double tc = double(cfg.tau_c), t = double(cfg.tau);
        return cfg.chi_convention == ChiConvention::TauC ? (tc - t) / tc
                                                         : (tc - t) / t;
    }
};

inline ValidatedConfig validate(const SystemConfig& cfg) {
    ValidatedConfig v;
    v.cfg = cfg;
    if (!is_perfect_square(cfg.M))
        throw ConfigError(ConfigErrorKind::NonSquareArray,
                          "M = " + std::to_string(cfg.M) + " is not a perfect square");
    if (!is_perfect_square(cfg.N))
        throw ConfigError(ConfigErrorKind::NonSquareArray,
                          "N = " + std::to_string(cfg.N) + " is not a perfect square");
    if (cfg.K < 1)
        throw ConfigError(ConfigErrorKind::BadValue, "K must be positive");
    if (cfg.tau < cfg.K)
        throw ConfigError(ConfigErrorKind::PilotTooShort,
                          "tau = " + std::to_string(cfg.tau) + " < K = " +
                              std::to_string(cfg.K) + "; orthogonal pilots impossible");
    if (cfg.tau_c < cfg.tau)
        throw ConfigError(ConfigErrorKind::BadValue, "tau_c < tau");
    if (cfg.delta < 0.0)
        throw ConfigError(ConfigErrorKind::BadValue, "delta must be nonnegative");
    if (cfg.v < 0.0)
        throw ConfigError(ConfigErrorKind::BadValue, "v must be nonnegative");
    if (!(cfg.xi > 0.0 && cfg.xi <= 1.0))
        throw ConfigError(ConfigErrorKind::BadValue, "xi must lie in (0,1]");
    if (!(cfg.d_over_lambda > 0.0))
        throw ConfigError(ConfigErrorKind::BadValue, "d_over_lambda must be positive");

    v.sqrt_M = int(std::lround(std::sqrt(double(cfg.M))));
    v.sqrt_N = int(std::lround(std::sqrt(double(cfg.N))));

    v.epsilon = cfg.epsilon;
    if (v.epsilon.empty()) v.epsilon.assign(std::size_t(cfg.K), cfg.epsilon_scalar);
    if (int(v.epsilon.size()) != cfg.K)
        throw ConfigError(ConfigErrorKind::BadValue,
                          "epsilon must have K = " + std::to_string(cfg.K) + " entries");
    for (double e : v.epsilon)
        if (e < 0.0)
            throw ConfigError(ConfigErrorKind::BadValue, "epsilon entries must be nonnegative");

    v.sigma2_w = dbm_to_watts(cfg.sigma2_dBm);
    v.sigma_e2_w = dbm_to_watts(cfg.sigma_e2_dBm);
    v.P_total_w = dbm_to_watts(cfg.P_total_dBm);
    v.P_SC_w = dbm_to_watts(cfg.P_SC_dBm);
    v.P_DC_w = dbm_to_watts(cfg.P_DC_dBm);
    for (double w : {v.sigma2_w, v.sigma_e2_w, v.P_total_w, v.P_SC_w, v.P_DC_w})
        if (!(w > 0.0) || !std::isfinite(w))
            throw ConfigError(ConfigErrorKind::NonPositivePower,
                              "dBm field does not convert to a positive power");

    if (cfg.mode == Mode::ActiveRIS) {
        v.sigma_e2_eff = v.sigma_e2_w;
        v.v_eff = cfg.v;
    } else {
        v.sigma_e2_eff = 0.0;
        v.v_eff = std::numeric_limits<double>::infinity();
    }
    return v;
}

inline PathLossSet derive_pathloss(const ValidatedConfig& v) {
    const SystemConfig& cfg = v.cfg;
    if (!(cfg.r_UR > 0.0) || !(cfg.d_RB > 0.0))
        throw ConfigError(ConfigErrorKind::BadValue, "r_UR and d_RB must be positive");
    PathLossSet pl;
    pl.beta = 1e-3 * std::pow(cfg.d_RB, -2.8);
    pl.alpha.assign(std::size_t(cfg.K), 1e-3 * std::pow(cfg.r_UR, -2.0));
    pl.gamma.resize(std::size_t(cfg.K));
    pl.d_UB.resize(std::size_t(cfg.K));
    for (int k = 1; k <= cfg.K; ++k) {
        const double ang = std::numbers::pi * double(k) / 9.0;
        const double dx = cfg.d_RB - cfg.r_UR * std::cos(ang);
        const double dy = cfg.r_UR * std::sin(ang);
        const double d = std::sqrt(dx * dx + dy * dy);
        pl.d_UB[std::size_t(k - 1)] = d;
        pl.gamma[std::size_t(k - 1)] = 1e-3 * std::pow(d, -4.2);
    }
    return pl;
}

// ---- flat key=value config text ----

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& s) {
    try {
        std::size_t used = 0;
        const double x = std::stod(s, &used);
        if (used != s.size())
            throw ConfigError(ConfigErrorKind::BadValue, key + ": bad number '" + s + "'");
        return x;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        throw ConfigError(ConfigErrorKind::BadValue, key + ": bad number '" + s + "'");
    }
}

inline long long parse_int(const std::string& key, const std::string& s) {
    try {
        std::size_t used = 0;
        const long long x = std::stoll(s, &used, 10);
        if (used != s.size())
            throw ConfigError(ConfigErrorKind::BadValue, key + ": bad integer '" + s + "'");
        return x;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        throw ConfigError(ConfigErrorKind::BadValue, key + ": bad integer '" + s + "'");
    }
}

} // namespace detail

// Applies one key=value assignment. Unknown keys are a hard error.
inline void apply_setting(SystemConfig& cfg, const std::string& key, const std::string& raw) {
    using detail::parse_double;
    using detail::parse_int;
    const std::string val = detail::trim(raw);
    if (key == "M") cfg.M = int(parse_int(key, val));
    else if (key == "N") cfg.N = int(parse_int(key, val));
    else if (key == "K") cfg.K = int(parse_int(key, val));
    else if (key == "delta") cfg.delta = parse_double(key, val);
    else if (key == "epsilon") {
        cfg.epsilon.clear();
        if (val.find(',') == std::string::npos) {
            cfg.epsilon_scalar = parse_double(key, val);
        } else {
            std::stringstream ss(val);
            std::string item;
            while (std::getline(ss, item, ','))
                cfg.epsilon.push_back(parse_double(key, detail::trim(item)));
        }
    }
    else if (key == "r_UR") cfg.r_UR = parse_double(key, val);
    else if (key == "d_RB") cfg.d_RB = parse_double(key, val);
    else if (key == "tau_c") cfg.tau_c = int(parse_int(key, val));
    else if (key == "tau") cfg.tau = int(parse_int(key, val));
    else if (key == "sigma2_dBm") cfg.sigma2_dBm = parse_double(key, val);
    else if (key == "sigma_e2_dBm") cfg.sigma_e2_dBm = parse_double(key, val);
    else if (key == "v") cfg.v = parse_double(key, val);
    else if (key == "P_total_dBm") cfg.P_total_dBm = parse_double(key, val);
    else if (key == "P_SC_dBm") cfg.P_SC_dBm = parse_double(key, val);
    else if (key == "P_DC_dBm") cfg.P_DC_dBm = parse_double(key, val);
    else if (key == "xi") cfg.xi = parse_double(key, val);
    else if (key == "d_over_lambda") cfg.d_over_lambda = parse_double(key, val);
    else if (key == "mode") {
        if (val == "ActiveRIS") cfg.mode = Mode::ActiveRIS;
        else if (val == "PassiveRIS") cfg.mode = Mode::PassiveRIS;
        else if (val == "NoRIS") cfg.mode = Mode::NoRIS;
        else throw ConfigError(ConfigErrorKind::BadValue, "mode: expected ActiveRIS|PassiveRIS|NoRIS");
    }
    else if (key == "seed") cfg.seed = std::uint64_t(parse_int(key, val));
    else if (key == "chi_convention") {
        if (val == "tau_c") cfg.chi_convention = ChiConvention::TauC;
        else if (val == "tau") cfg.chi_convention = ChiConvention::Tau;
        else throw ConfigError(ConfigErrorKind::BadValue, "chi_convention: expected tau_c|tau");
    }
    else if (key == "leak_conj_phase_term") {
        if (val == "true" || val == "1") cfg.leak_conj_phase_term = true;
        else if (val == "false" || val == "0") cfg.leak_conj_phase_term = false;
        else throw ConfigError(ConfigErrorKind::BadValue, "leak_conj_phase_term: expected true|false");
    }
    else if (key == "ga_Np") cfg.ga.population = int(parse_int(key, val));
    else if (key == "ga_Ne") cfg.ga.elites = int(parse_int(key, val));
    else if (key == "ga_Nc") cfg.ga.crossover = int(parse_int(key, val));
    else if (key == "ga_Nm") cfg.ga.mutation = int(parse_int(key, val));
    else if (key == "ga_pm") cfg.ga.mutation_prob = parse_double(key, val);
    else if (key == "ga_max_iters") cfg.ga.max_iters = int(parse_int(key, val));
    else if (key == "ga_stall_tol") cfg.ga.stall_tol = parse_double(key, val);
    else if (key == "ga_stall_window") cfg.ga.stall_window = int(parse_int(key, val));
    else throw ConfigError(ConfigErrorKind::UnknownKey, "unknown config key '" + key + "'");
}

inline void apply_setting_line(SystemConfig& cfg, const std::string& line) {
    const auto eq = line.find('=');
    if (eq == std::string::npos)
        throw ConfigError(ConfigErrorKind::BadValue, "expected key=value, got '" + line + "'");
    apply_setting(cfg, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
}

inline SystemConfig load_config_text(std::istream& in) {
    SystemConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        apply_setting_line(cfg, t);
    }
    return cfg;
}

inline SystemConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(ConfigErrorKind::Io, "cannot open config file '" + path + "'");
    return load_config_text(in);
}

// Canonical key=value dump of a resolved config; basis of the CSV stamp.
inline std::string dump_config(const ValidatedConfig& v) {
    std::ostringstream os;
    os.precision(17);
    const SystemConfig& c = v.cfg;
    os << "M=" << c.M << ";N=" << c.N << ";K=" << c.K << ";delta=" << c.delta << ";epsilon=";
    for (std::size_t i = 0; i < v.epsilon.size(); ++i)
        os << (i ? "," : "") << v.epsilon[i];
    os << ";r_UR=" << c.r_UR << ";d_RB=" << c.d_RB << ";tau_c=" << c.tau_c << ";tau=" << c.tau
       << ";sigma2_dBm=" << c.sigma2_dBm << ";sigma_e2_dBm=" << c.sigma_e2_dBm << ";v=" << c.v
       << ";P_total_dBm=" << c.P_total_dBm << ";P_SC_dBm=" << c.P_SC_dBm
       << ";P_DC_dBm=" << c.P_DC_dBm << ";xi=" << c.xi << ";d_over_lambda=" << c.d_over_lambda
       << ";mode=" << (c.mode == Mode::ActiveRIS ? "ActiveRIS"
                       : c.mode == Mode::PassiveRIS ? "PassiveRIS" : "NoRIS")
       << ";seed=" << c.seed
       << ";chi_convention=" << (c.chi_convention == ChiConvention::TauC ? "tau_c" : "tau")
       << ";leak_conj_phase_term=" << (c.leak_conj_phase_term ? "true" : "false")
       << ";ga=" << c.ga.population << "/" << c.ga.elites << "/" << c.ga.crossover << "/"
       << c.ga.mutation << "/" << c.ga.mutation_prob << "/" << c.ga.max_iters << "/"
       << c.ga.stall_tol << "/" << c.ga.stall_window;
    return os.str();
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace arisim

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "arisim/config.hpp"
#include "arisim/experiments.hpp"

using namespace arisim;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::vector<std::string> sets;
    std::string out_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 2;
};

SystemConfig resolve_config(const GlobalOpts& g) {
    SystemConfig cfg;
    if (!g.config_path.empty()) cfg = load_config_file(g.config_path);
    for (const auto& s : g.sets) apply_setting_line(cfg, s);
    if (g.seed_set) cfg.seed = g.seed;
    return cfg;
}

void emit(const GlobalOpts& g, const std::string& text) {
    if (g.out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(g.out_path, std::ios::binary);
    if (!out) throw ConfigError(ConfigErrorKind::Io, "cannot open '" + g.out_path + "'");
    out << text;
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> vals;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        vals.push_back(detail::parse_double("values", detail::trim(item)));
    return vals;
}

SweepVariable parse_variable(const std::string& s) {
    if (s == "M") return SweepVariable::M;
    if (s == "N") return SweepVariable::N;
    if (s == "P_total") return SweepVariable::P_total;
    if (s == "delta") return SweepVariable::delta;
    if (s == "epsilon") return SweepVariable::epsilon;
    if (s == "v") return SweepVariable::v;
    throw ConfigError(ConfigErrorKind::BadValue,
                      "variable must be one of M,N,P_total,delta,epsilon,v");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Active RIS-aided massive MIMO uplink: closed-form rate/NMSE "
                 "evaluation, Monte Carlo validation and phase-shift optimization"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand name

    GlobalOpts g;
    app.add_option("--config", g.config_path, "flat key=value configuration file");
    app.add_option("--set", g.sets, "override a config key, e.g. --set M=256");
    auto* seed_opt = app.add_option("--seed", g.seed, "master RNG seed");
    app.add_option("--threads", g.threads, "worker threads for Monte Carlo runs");
    app.add_option("--out", g.out_path, "output path (stdout when omitted)");

    std::string variable = "P_total";
    std::string values_csv;
    std::string modes_csv = "Active,Passive,NoRIS";
    std::string policies_csv = "optimized,random";
    std::uint64_t samples = 20000;

    auto* nmse = app.add_subcommand("nmse-sweep", "channel-estimation NMSE sweep (CSV)");
    nmse->add_option("--variable", variable, "M or N");
    nmse->add_option("--values", values_csv, "comma-separated sweep values")->required();
    nmse->add_option("--samples", samples, "Monte Carlo realizations per point");

    auto* rate = app.add_subcommand("rate-sweep", "achievable sum-rate sweep (CSV)");
    rate->add_option("--variable", variable, "M, N, P_total, delta, epsilon or v");
    rate->add_option("--values", values_csv, "comma-separated sweep values")->required();
    rate->add_option("--modes", modes_csv, "subset of Active,Passive,NoRIS");
    rate->add_option("--policies", policies_csv, "subset of optimized,random");
    rate->add_option("--samples", samples, "Monte Carlo realizations per point");

    std::string regime_s = "ric-ric";
    double exponent = 1.0;
    double eu_dbm = 10.0;
    auto* scaling = app.add_subcommand("power-scaling",
                                       "rate decay under p = E_u / M^a (CSV)");
    scaling->add_option("--regime", regime_s, "ric-ric, ric-ray or ray-ray");
    scaling->add_option("--exponent", exponent, "scaling exponent a");
    scaling->add_option("--eu-dbm", eu_dbm, "E_u in dBm");
    scaling->add_option("--values", values_csv, "comma-separated M values")->required();

    auto* optimize = app.add_subcommand("optimize", "GA phase-shift search; trace CSV");

    std::string level = "quick";
    auto* validate_cmd = app.add_subcommand("validate", "run the oracle suites");
    validate_cmd->add_option("--level", level, "quick (1e4 samples) or full (2e5)");

    CLI11_PARSE(app, argc, argv);
    g.seed_set = seed_opt->count() > 0;

    try {
        SystemConfig cfg = resolve_config(g);

        if (nmse->parsed()) {
            SweepSpec spec;
            spec.variable = parse_variable(variable);
            spec.values = parse_values(values_csv);
            spec.samples = samples;
            emit(g, run_nmse_sweep(cfg, spec, g.threads));
        } else if (rate->parsed()) {
            SweepSpec spec;
            spec.variable = parse_variable(variable);
            spec.values = parse_values(values_csv);
            spec.samples = samples;
            spec.modes.clear();
            std::stringstream ss(modes_csv);
            std::string item;
            while (std::getline(ss, item, ',')) {
                item = detail::trim(item);
                if (item == "Active") spec.modes.push_back(Mode::ActiveRIS);
                else if (item == "Passive") spec.modes.push_back(Mode::PassiveRIS);
                else if (item == "NoRIS") spec.modes.push_back(Mode::NoRIS);
                else throw ConfigError(ConfigErrorKind::BadValue, "bad mode " + item);
            }
            spec.policy_optimized = policies_csv.find("optimized") != std::string::npos;
            spec.policy_random = policies_csv.find("random") != std::string::npos;
            emit(g, run_rate_sweep(cfg, spec, g.threads));
        } else if (scaling->parsed()) {
            ScalingRegime regime;
            if (regime_s == "ric-ric") regime = ScalingRegime::RicRic;
            else if (regime_s == "ric-ray") regime = ScalingRegime::RicRay;
            else if (regime_s == "ray-ray") regime = ScalingRegime::RayRay;
            else throw ConfigError(ConfigErrorKind::BadValue, "bad regime " + regime_s);
            emit(g, run_power_scaling(cfg, regime, exponent, eu_dbm, parse_values(values_csv)));
        } else if (optimize->parsed()) {
            auto v = validate(cfg);
            auto pl = derive_pathloss(v);
            auto los = build_los_cache(v, generate_angles(cfg.seed, cfg.K));
            auto budget = power_split(v, pl);
            auto st = compute_stats(v, pl, budget);
            auto objective = [&](const PhaseVector& ph) {
                return sinr_report(v, st, los, ph, budget).min_rate;
            };
            auto res = ga_optimize(objective, cfg.N, cfg.ga, cfg.seed);
            std::ostringstream csv;
            csv << detail::stamp(v);
            csv << "generation,best_fitness,mean_fitness\n";
            for (const auto& t : res.trace)
                csv << t.generation << ',' << detail::fmt(t.best) << ','
                    << detail::fmt(t.mean) << "\n";
            emit(g, csv.str());
            std::cerr << "best min-rate " << res.best_fitness << " bits/s/Hz after "
                      << res.generations << " generations"
                      << (res.stalled ? " (stalled)" : "") << "\n";
        } else if (validate_cmd->parsed()) {
            if (level != "quick" && level != "full")
                throw ConfigError(ConfigErrorKind::BadValue, "level must be quick or full");
            std::ostringstream report;
            auto res = run_validate(cfg, level == "full", g.threads, report);
            emit(g, report.str());
            std::cerr << res.passed << " passed, " << res.failed << " failed\n";
            return res.failed == 0 ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

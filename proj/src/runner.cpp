#include "moma/runner.hpp"

#include "moma/aggregation.hpp"
#include "moma/benchmarks.hpp"
#include "moma/control.hpp"
#include "moma/errors.hpp"
#include "moma/evaluation.hpp"
#include "moma/parallel.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>

namespace moma {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// ------------------------------------------------------------ parsing helpers

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n\"");
    const auto e = s.find_last_not_of(" \t\r\n\"");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

template <class T> T parse_number(const std::string& key, const std::string& text) {
    T v{};
    const std::string t = trim(text);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError("invalid value for " + key + ": '" + text + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    std::string t = trim(text);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "true" || t == "1" || t == "yes" || t == "on")
        return true;
    if (t == "false" || t == "0" || t == "no" || t == "off")
        return false;
    throw ConfigError("invalid boolean for " + key + ": '" + text + "'");
}

std::vector<Coord> parse_coords(const std::string& key, const std::string& text) {
    std::vector<Coord> out;
    std::stringstream ss(trim(text));
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(parse_number<Coord>(key, item));
    return out;
}

// ------------------------------------------------------------ problems

const std::vector<std::string> kProblems = {"jrp_small", "jrp_large",     "hospital2",
                                            "hospital3", "hospital4",     "simple_rw",
                                            "reflecting_rw", "custom-from-file", "box"};
const std::vector<std::string> kModes = {"grid", "evaluate", "optimize", "diagnose"};

struct Problem {
    StateLattice lattice;
    std::unique_ptr<MarkovRewardProcess> mrp;
    std::unique_ptr<ControlledMdp> mdp;
    std::vector<Coord> grid_origin;
};

Problem make_problem(const RunConfig& cfg) {
    Problem p;
    const auto& name = cfg.problem;
    auto take_mdp = [&](auto params, auto tag) {
        using Mdp = typename decltype(tag)::type;
        if (cfg.alpha)
            params.discount = *cfg.alpha;
        p.grid_origin = params.grid_origin;
        p.mdp = std::make_unique<Mdp>(std::move(params));
        p.lattice = p.mdp->lattice();
    };
    struct JrpTag { using type = JrpMdp; };
    struct HospTag { using type = HospitalMdp; };
    if (name == "jrp_small")
        take_mdp(jrp_small(), JrpTag{});
    else if (name == "jrp_large")
        take_mdp(jrp_large(), JrpTag{});
    else if (name == "hospital2")
        take_mdp(hospital2(), HospTag{});
    else if (name == "hospital3")
        take_mdp(hospital3(cfg.load), HospTag{});
    else if (name == "hospital4")
        take_mdp(hospital4(), HospTag{});
    else if (name == "simple_rw") {
        p.mrp = std::make_unique<MarkovRewardProcess>(
            build_simple_rw(cfg.n ? cfg.n : 20, cfg.absorbing, cfg.alpha.value_or(0.9)));
    } else if (name == "reflecting_rw") {
        p.mrp = std::make_unique<MarkovRewardProcess>(
            build_reflecting_rw(cfg.n ? cfg.n : 100, cfg.seed, cfg.alpha.value_or(0.95)));
    } else if (name == "custom-from-file") {
        if (cfg.instance.empty())
            throw ConfigError("problem custom-from-file requires problem.instance");
        Json j = read_json_file(cfg.instance);
        if (cfg.alpha)
            j["discount"] = *cfg.alpha;
        if (j.contains("grid_origin"))
            p.grid_origin = j["grid_origin"].get<std::vector<Coord>>();
        const std::string kind = j.value("kind", "");
        if (kind == "mrp")
            p.mrp = std::make_unique<MarkovRewardProcess>(import_mrp(j));
        else
            p.mdp = import_mdp(j);
    } else if (name == "box") {
        p.lattice = StateLattice(cfg.lower, cfg.upper);
    } else {
        throw ConfigError("unknown problem '" + name + "'");
    }
    if (p.mrp)
        p.lattice = p.mrp->lattice;
    if (p.mdp)
        p.lattice = p.mdp->lattice();
    if (!cfg.grid_origin.empty())
        p.grid_origin = cfg.grid_origin;
    return p;
}

CoarseGrid make_grid(const RunConfig& cfg, const Problem& p, double alpha) {
    if (!cfg.grid_values.empty()) {
        std::vector<AxisGrid> axes;
        std::stringstream ss(cfg.grid_values);
        std::string axis;
        while (std::getline(ss, axis, ';'))
            axes.push_back(AxisGrid{parse_coords("problem.grid_values", axis)});
        try {
            return CoarseGrid::from_axes(p.lattice, std::move(axes), cfg.spacing);
        } catch (const DomainError& e) {
            throw ConfigError(std::string("problem.grid_values: ") + e.what());
        }
    }
    GridOptions opt;
    opt.origin = p.grid_origin;
    opt.discount_multiplier = cfg.discount_multiplier;
    opt.alpha = alpha;
    return build_grid(p.lattice, cfg.spacing, opt);
}

Policy load_policy(const RunConfig& cfg, const ControlledMdp& mdp, const PiOptions& opts,
                   std::optional<PiReport>& exact_report) {
    if (cfg.policy == "optimal") {
        exact_report = exact_policy_iteration(mdp, {}, opts);
        return exact_report->policy;
    }
    if (cfg.policy == "zero")
        return Policy(mdp.size(), 0);
    const Json j = read_json_file(cfg.policy);
    Policy p;
    try {
        p = j.is_object() ? j.at("actions").get<Policy>() : j.get<Policy>();
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("policy file: ") + e.what());
    }
    if (p.size() != mdp.size())
        throw ConfigError("policy file must list one action per state");
    for (std::size_t x = 0; x < p.size(); ++x)
        if (p[x] >= mdp.action_count(x))
            throw ConfigError("policy file action out of range at state " + std::to_string(x));
    return p;
}

// ------------------------------------------------------------ outputs

Json grid_json(const StateLattice& lat, const CoarseGrid& g, const Problem& p, const RunConfig& cfg) {
    Json j;
    j["lattice"]["lower"] = std::vector<Coord>(lat.lower().begin(), lat.lower().end());
    j["lattice"]["upper"] = std::vector<Coord>(lat.upper().begin(), lat.upper().end());
    j["lattice"]["size"] = lat.size();
    j["spacing_exponent"] = cfg.spacing;
    j["origin"] = p.grid_origin.empty() ? std::vector<Coord>(lat.dims(), 0) : p.grid_origin;
    j["explicit_axes"] = !cfg.grid_values.empty();
    j["discount_multiplier"] = cfg.discount_multiplier;
    Json axes = Json::array();
    for (const auto& a : g.axes())
        axes.push_back(a.values);
    j["axes"] = std::move(axes);
    j["meta_count"] = g.meta_count();
    const double bound = meta_count_bound(lat, cfg.spacing);
    j["meta_count_bound"] = bound;
    j["within_bound"] = static_cast<double>(g.meta_count()) <= bound;
    return j;
}

struct CsvColumn {
    std::string name;
    std::vector<double> values;
    bool integer = false;
};

void write_state_csv(const std::filesystem::path& path, const StateLattice& lat,
                     const std::vector<CsvColumn>& cols) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot write " + path.string());
    out << "state_index";
    for (std::size_t i = 0; i < lat.dims(); ++i)
        out << ",x" << i;
    for (const auto& c : cols)
        out << "," << c.name;
    out << "\n";
    StateVec coords(lat.dims());
    for (std::size_t x = 0; x < lat.size(); ++x) {
        lat.to_coords(x, coords);
        out << x;
        for (Coord v : coords)
            out << "," << v;
        for (const auto& c : cols) {
            out << ",";
            if (c.integer)
                out << static_cast<long long>(c.values[x]);
            else
                out << format_double(c.values[x]);
        }
        out << "\n";
    }
}

Json gap_json(const GapSummary& g) {
    Json j;
    j["mean_rel_gap"] = g.mean_rel;
    j["max_rel_gap"] = g.max_rel;
    j["mean_rel_gap_pct"] = 100.0 * g.mean_rel;
    j["max_rel_gap_pct"] = 100.0 * g.max_rel;
    j["max_abs_gap"] = g.max_abs;
    return j;
}

Json pi_timing(const PiReport& r) {
    Json j;
    double up = 0, cp = 0, ev = 0;
    for (const auto& t : r.timing) {
        up += t.update_ms;
        cp += t.compute_p_ms;
        ev += t.evaluation_ms;
    }
    const double k = std::max(1, r.iterations);
    j["iterations"] = r.iterations;
    j["update_per_iter_ms"] = up / k;
    j["compute_P_per_iter_ms"] = cp / k;
    j["evaluation_per_iter_ms"] = ev / k;
    j["full_update_ms"] = r.full_update_ms;
    j["total_ms"] = r.total_ms;
    return j;
}

Json diag_entry(const std::string& name, double value, const char* relation, double threshold) {
    Json j;
    j["name"] = name;
    j["value"] = value;
    j["relation"] = relation;
    j["threshold"] = threshold;
    const bool le = std::string(relation) == "<=";
    j["pass"] = std::isfinite(value) && (le ? value <= threshold : value >= threshold);
    return j;
}

Json info_entry(const std::string& name, double value) {
    Json j;
    j["name"] = name;
    j["value"] = value;
    return j;
}

// ------------------------------------------------------------ modes

void evaluate_mrp(const RunConfig& cfg, const MarkovRewardProcess& mrp, const AggregationScheme& scheme,
                  Json& summary, Json& timing) {
    EvaluationOptions eo;
    eo.compute_exact = cfg.exact;
    eo.solve.tolerance = cfg.tolerance;
    const auto rep = moma_evaluate(mrp, scheme, eo);
    Json ev;
    ev["aggregate_residual"] = rep.aggregate_residual;
    ev["lift_consistency"] = rep.lift_consistency;
    ev["interp_residual_moma"] = rep.interp_residual_moma;
    std::vector<CsvColumn> cols;
    if (rep.V_exact) {
        ev["gaps"] = gap_json(*rep.gaps);
        ev["interp_residual_exact"] = rep.interp_residual_exact;
        const auto bd = backtodelta_from_values(*rep.V_exact, rep.V_moma, scheme, mrp.discount);
        ev["backtodelta_lhs"] = bd.lhs;
        ev["backtodelta_rhs"] = bd.rhs;
        ev["backtodelta_slack"] = bd.slack();
        cols.push_back({"V_exact", *rep.V_exact});
        cols.push_back({"V_moma", rep.V_moma});
        cols.push_back({"abs_gap", rep.gaps->abs_gap});
        cols.push_back({"rel_gap", rep.gaps->rel_gap});
    } else {
        cols.push_back({"V_moma", rep.V_moma});
    }
    summary["evaluation"] = ev;
    timing["evaluation"] = {{"preprocess_ms", rep.time_preprocess_ms},
                            {"solve_ms", rep.time_solve_ms},
                            {"lift_ms", rep.time_lift_ms},
                            {"exact_ms", rep.time_exact_ms}};
    if (cfg.write_csv)
        write_state_csv(cfg.out_dir / "states.csv", mrp.lattice, cols);
}

void optimize_mdp(const RunConfig& cfg, const ControlledMdp& mdp, const AggregationScheme& scheme,
                  const PiOptions& opts, Json& summary, Json& timing) {
    const auto moma = moma_api(mdp, scheme, {}, opts);
    const auto br = bellman_residual(mdp, moma.policy, moma.value);
    Json s;
    s["moma_iterations"] = moma.iterations;
    s["converged"] = moma.converged;
    s["bellman_residual"] = {{"mean_pct", br.mean_percent}, {"max_pct", br.max_percent}};
    timing["moma_api"] = pi_timing(moma);

    std::vector<double> act_moma(moma.policy.begin(), moma.policy.end());
    std::vector<CsvColumn> cols;
    if (cfg.exact) {
        const auto exact = exact_policy_iteration(mdp, {}, opts);
        timing["exact_pi"] = pi_timing(exact);
        const auto t0 = Clock::now();
        const auto v_pi = exact_value(induced_mrp(mdp, moma.policy), opts.solve);
        timing["policy_value_ms"] = ms_since(t0);
        const auto gaps = optimality_gap_report(exact.value, v_pi);
        s["exact_iterations"] = exact.iterations;
        s["optimality"] = gap_json(gaps);
        std::size_t differ = 0;
        for (std::size_t x = 0; x < mdp.size(); ++x)
            differ += moma.policy[x] != exact.policy[x];
        s["actions_differing"] = differ;

        EvaluationOptions eo;
        eo.solve = opts.solve;
        const auto ev = moma_evaluate(induced_mrp(mdp, exact.policy), scheme, eo);
        s["evaluation_at_optimal"] = gap_json(*ev.gaps);

        cols.push_back({"V_exact", exact.value});
        cols.push_back({"V_moma", v_pi});
        cols.push_back({"abs_gap", gaps.abs_gap});
        cols.push_back({"rel_gap", gaps.rel_gap});
        cols.push_back({"V_approx", moma.value});
        cols.push_back({"bellman_residual_pct", br.percent});
        cols.push_back({"action_moma", act_moma, true});
        cols.push_back({"action_exact", std::vector<double>(exact.policy.begin(), exact.policy.end()), true});
    } else {
        cols.push_back({"V_approx", moma.value});
        cols.push_back({"bellman_residual_pct", br.percent});
        cols.push_back({"action_moma", act_moma, true});
    }
    summary["optimization"] = s;
    if (cfg.write_csv)
        write_state_csv(cfg.out_dir / "states.csv", mdp.lattice(), cols);
}

void diagnose_mrp(const RunConfig& cfg, const MarkovRewardProcess& mrp, const AggregationScheme& scheme,
                  Json& summary) {
    SolveOptions so;
    so.tolerance = cfg.tolerance;
    Json diags = Json::array();
    const auto sister = lifted_chain(mrp, scheme);

    diags.push_back(diag_entry("first_moment_gap", first_moment_gap(sister), "<=", 1e-9));

    const auto sm = second_moment_gap(sister, cfg.spacing);
    diags.push_back(info_entry("second_moment_max_mismatch", sm.max_mismatch));
    diags.push_back(info_entry("second_moment_max_normalized_2s", sm.max_normalized));
    diags.push_back(info_entry("second_moment_max_normalized_s", sm.max_normalized_s));

    const auto& v_tilde = sister.lifted_value();
    const auto& r = sister.aggregate_value();
    const auto uv = scheme.U.apply(v_tilde);
    double consistency = 0.0;
    for (std::size_t l = 0; l < r.size(); ++l)
        consistency = std::max(consistency, std::abs(uv[l] - r[l]));
    diags.push_back(diag_entry("lift_consistency", consistency, "<=", 1e-9));

    const auto v = exact_value(mrp, so);
    const auto bd = backtodelta_from_values(v, v_tilde, scheme, mrp.discount);
    diags.push_back(diag_entry("backtodelta_slack", bd.slack(), ">=", -1e-8));

    const double a = mrp.discount;
    const auto d_v = delta_from_images(mrp.P.apply(v), sister.apply(v)).sup;
    const auto d_vt = delta_from_images(mrp.P.apply(v_tilde), sister.apply(v_tilde)).sup;
    double lhs = 0.0;
    for (std::size_t x = 0; x < v.size(); ++x)
        lhs = std::max(lhs, std::abs(v[x] - v_tilde[x]));
    diags.push_back(diag_entry("lemma1_slack", a / (1.0 - a) * (d_v + d_vt) - lhs, ">=", -1e-8));

    try {
        diags.push_back(diag_entry("mstep_identity_m" + std::to_string(cfg.mstep),
                                   verify_mstep_identity(mrp, cfg.mstep, so, cfg.nnz_budget), "<=", 1e-8));
    } catch (const ResourceError& e) {
        Json j = info_entry("mstep_identity_m" + std::to_string(cfg.mstep), std::nan(""));
        j["skipped"] = e.what();
        diags.push_back(j);
    }

    const auto v_eps = scaled_value(mrp, cfg.epsilon, so);
    diags.push_back(info_entry("scaled_value_max_eps", max_abs(v_eps)));

    bool all = true;
    for (const auto& d : diags)
        if (d.contains("pass"))
            all = all && d["pass"].get<bool>();
    summary["diagnostics_pass"] = all;
    write_json_file(cfg.out_dir / "diagnostics.json", diags);

    if (cfg.write_csv)
        write_state_csv(cfg.out_dir / "second_moment.csv", mrp.lattice,
                        {{"mismatch", sm.mismatch},
                         {"normalized_2s", sm.normalized},
                         {"normalized_s", sm.normalized_s},
                         {"scaled_value", v_eps}});
}

} // namespace

std::string format_double(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "problem.name",       "problem.n",           "problem.absorbing",   "problem.load",
        "problem.alpha",      "problem.instance",    "problem.policy",      "problem.lower",
        "problem.upper",      "problem.grid_origin", "problem.grid_values", "solver.mode",
        "solver.spacing",     "solver.epsilon",      "solver.seed",         "solver.threads",
        "solver.tolerance",   "solver.max_iterations", "solver.discount_multiplier",
        "solver.exact",       "solver.nnz_budget",   "solver.mstep",        "output.dir",
        "output.csv"};
    return keys;
}

ConfigMap read_config_file(const std::filesystem::path& path) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config file: ") + e.what());
    }
    ConfigMap kv;
    const auto& keys = config_keys();
    for (const auto& [section, body] : tree) {
        if (body.empty())
            throw ConfigError("config key '" + section + "' must live in a section");
        for (const auto& [key, value] : body) {
            const std::string full = section + "." + key;
            if (std::find(keys.begin(), keys.end(), full) == keys.end())
                throw ConfigError("unknown config key '" + full + "'");
            kv[full] = value.get_value<std::string>();
        }
    }
    return kv;
}

void apply_env_overrides(ConfigMap& kv) {
    for (const auto& key : config_keys()) {
        std::string env = "MOMA_" + key;
        std::replace(env.begin(), env.end(), '.', '_');
        std::transform(env.begin(), env.end(), env.begin(), [](unsigned char c) { return std::toupper(c); });
        if (const char* v = std::getenv(env.c_str()))
            kv[key] = v;
    }
}

RunConfig parse_config(const ConfigMap& kv) {
    RunConfig c;
    const auto& keys = config_keys();
    for (const auto& [k, v] : kv)
        if (std::find(keys.begin(), keys.end(), k) == keys.end())
            throw ConfigError("unknown config key '" + k + "'");
    auto get = [&](const char* key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    if (auto v = get("problem.name"))
        c.problem = trim(*v);
    if (auto v = get("problem.n"))
        c.n = parse_number<std::int64_t>("problem.n", *v);
    if (auto v = get("problem.absorbing"))
        c.absorbing = parse_bool("problem.absorbing", *v);
    if (auto v = get("problem.load"))
        c.load = parse_number<double>("problem.load", *v);
    if (auto v = get("problem.alpha"))
        c.alpha = parse_number<double>("problem.alpha", *v);
    if (auto v = get("problem.instance"))
        c.instance = trim(*v);
    if (auto v = get("problem.policy"))
        c.policy = trim(*v);
    if (auto v = get("problem.lower"))
        c.lower = parse_coords("problem.lower", *v);
    if (auto v = get("problem.upper"))
        c.upper = parse_coords("problem.upper", *v);
    if (auto v = get("problem.grid_origin"))
        c.grid_origin = parse_coords("problem.grid_origin", *v);
    if (auto v = get("problem.grid_values"))
        c.grid_values = trim(*v);
    if (auto v = get("solver.mode"))
        c.mode = trim(*v);
    if (auto v = get("solver.spacing"))
        c.spacing = parse_number<double>("solver.spacing", *v);
    if (auto v = get("solver.epsilon"))
        c.epsilon = parse_number<double>("solver.epsilon", *v);
    if (auto v = get("solver.seed"))
        c.seed = parse_number<std::uint64_t>("solver.seed", *v);
    if (auto v = get("solver.threads"))
        c.threads = parse_number<int>("solver.threads", *v);
    if (auto v = get("solver.tolerance"))
        c.tolerance = parse_number<double>("solver.tolerance", *v);
    if (auto v = get("solver.max_iterations"))
        c.max_iterations = parse_number<int>("solver.max_iterations", *v);
    if (auto v = get("solver.discount_multiplier"))
        c.discount_multiplier = parse_bool("solver.discount_multiplier", *v);
    if (auto v = get("solver.exact"))
        c.exact = parse_bool("solver.exact", *v);
    if (auto v = get("solver.nnz_budget"))
        c.nnz_budget = parse_number<std::size_t>("solver.nnz_budget", *v);
    if (auto v = get("solver.mstep"))
        c.mstep = parse_number<int>("solver.mstep", *v);
    if (auto v = get("output.dir"))
        c.out_dir = trim(*v);
    if (auto v = get("output.csv"))
        c.write_csv = parse_bool("output.csv", *v);

    if (std::find(kProblems.begin(), kProblems.end(), c.problem) == kProblems.end())
        throw ConfigError("unknown problem '" + c.problem + "'");
    if (std::find(kModes.begin(), kModes.end(), c.mode) == kModes.end())
        throw ConfigError("unknown mode '" + c.mode + "'");
    if (!(c.spacing > 0.0 && c.spacing < 1.0))
        throw ConfigError("solver.spacing must lie in (0,1)");
    if (!(c.epsilon >= 0.0 && c.epsilon <= 1.0))
        throw ConfigError("solver.epsilon must lie in [0,1]");
    if (c.alpha && !(*c.alpha > 0.0 && *c.alpha < 1.0))
        throw ConfigError("problem.alpha must lie in (0,1)");
    if (!(c.tolerance > 0.0))
        throw ConfigError("solver.tolerance must be positive");
    if (c.max_iterations < 1)
        throw ConfigError("solver.max_iterations must be at least 1");
    if (c.mstep < 1)
        throw ConfigError("solver.mstep must be at least 1");
    if (c.threads < 0)
        throw ConfigError("solver.threads must be nonnegative");
    if (c.n < 0)
        throw ConfigError("problem.n must be nonnegative");
    if (c.problem == "box" && (c.lower.empty() || c.lower.size() != c.upper.size()))
        throw ConfigError("problem box requires problem.lower and problem.upper of equal length");
    if (c.problem == "box" && c.mode != "grid")
        throw ConfigError("problem box only supports mode grid");
    if (c.out_dir.empty())
        throw ConfigError("output.dir must not be empty");
    return c;
}

RunOutcome run(const RunConfig& cfg) {
    RunOutcome outcome;
    Json summary;
    Json timing;
    summary["problem"] = cfg.problem;
    summary["mode"] = cfg.mode;
    const auto start = Clock::now();
    try {
        set_thread_count(cfg.threads);
        std::error_code ec;
        std::filesystem::create_directories(cfg.out_dir, ec);
        if (ec)
            throw ConfigError("cannot create output directory " + cfg.out_dir.string());

        Problem prob;
        try {
            prob = make_problem(cfg);
        } catch (const DomainError& e) {
            throw ConfigError(std::string("invalid problem parameters: ") + e.what());
        }
        const double alpha = prob.mrp ? prob.mrp->discount : prob.mdp ? prob.mdp->discount() : 0.5;
        if (cfg.mode == "optimize" && !prob.mdp)
            throw ConfigError("mode optimize requires a controlled problem");
        if ((cfg.mode == "evaluate" || cfg.mode == "diagnose") && !prob.mrp && !prob.mdp)
            throw ConfigError("mode " + cfg.mode + " requires a process");

        auto t0 = Clock::now();
        CoarseGrid grid;
        try {
            grid = make_grid(cfg, prob, alpha);
        } catch (const DomainError& e) {
            throw ConfigError(std::string("grid: ") + e.what());
        }
        const auto& lat = prob.lattice;
        write_json_file(cfg.out_dir / "grid.json", grid_json(lat, grid, prob, cfg));
        summary["n_states"] = lat.size();
        summary["dims"] = lat.dims();
        summary["n_meta"] = grid.meta_count();
        summary["spacing_exponent"] = cfg.spacing;
        if (cfg.mode != "grid")
            summary["discount"] = alpha;

        if (cfg.mode != "grid") {
            const AggregationScheme scheme = scheme_from_grid(lat, std::move(grid));
            timing["preprocess_ms"] = ms_since(t0);
            PiOptions opts;
            opts.max_iterations = cfg.max_iterations;
            opts.solve.tolerance = cfg.tolerance;

            if (cfg.mode == "optimize") {
                optimize_mdp(cfg, *prob.mdp, scheme, opts, summary, timing);
            } else {
                const MarkovRewardProcess* mrp = prob.mrp.get();
                MarkovRewardProcess induced;
                if (!mrp) {
                    std::optional<PiReport> exact;
                    const auto t1 = Clock::now();
                    const Policy pol = load_policy(cfg, *prob.mdp, opts, exact);
                    timing["policy_ms"] = ms_since(t1);
                    summary["policy"] = cfg.policy;
                    if (exact)
                        summary["policy_iterations"] = exact->iterations;
                    induced = induced_mrp(*prob.mdp, pol);
                    mrp = &induced;
                }
                if (cfg.mode == "evaluate")
                    evaluate_mrp(cfg, *mrp, scheme, summary, timing);
                else
                    diagnose_mrp(cfg, *mrp, scheme, summary);
            }
        }
        summary["status"] = "ok";
        outcome.exit_code = 0;
    } catch (const ConfigError& e) {
        outcome.exit_code = 1;
        outcome.message = e.what();
        summary["status"] = "config_error";
        summary["error"] = e.what();
        return outcome.summary = summary, outcome;
    } catch (const NumericalError& e) {
        outcome.exit_code = 2;
        outcome.message = e.what();
        summary["status"] = "numerical_failure";
        summary["error"] = e.what();
        summary["residual"] = e.residual();
        if (const auto* it = dynamic_cast<const IterationLimitError*>(&e))
            summary["iterations"] = it->last().iterations;
    } catch (const ResourceError& e) {
        outcome.exit_code = 2;
        outcome.message = e.what();
        summary["status"] = "resource_failure";
        summary["error"] = e.what();
    } catch (const DomainError& e) {
        outcome.exit_code = 1;
        outcome.message = e.what();
        summary["status"] = "config_error";
        summary["error"] = e.what();
        return outcome.summary = summary, outcome;
    }
    timing["total_ms"] = ms_since(start);
    try {
        write_json_file(cfg.out_dir / "summary.json", summary);
        write_json_file(cfg.out_dir / "timing.json", timing);
    } catch (const ConfigError& e) {
        outcome.exit_code = 1;
        outcome.message = e.what();
    }
    outcome.summary = summary;
    return outcome;
}

} // namespace moma

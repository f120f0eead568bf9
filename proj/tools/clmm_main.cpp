// clmm: ingest event logs into daily games, solve equilibria, evaluate
// strategies, aggregate reports.
#include "CLI11.hpp"
#include "json.hpp"

#include "clmm/errors.hpp"
#include "clmm/io.hpp"
#include "clmm/pipeline.hpp"
#include "clmm/solver.hpp"
#include "clmm/strategies.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct SolverFlags {
    double omega = 0.5;
    int max_iters = 10000;
    double tol = 1e-10;
    double tol_kkt = 1e-8;
    std::uint64_t seed = 0;

    clmm::SolverOptions options() const {
        clmm::SolverOptions o;
        o.omega = omega;
        o.max_iters = max_iters;
        o.tol_profile = tol;
        o.tol_kkt = tol_kkt;
        o.seed = seed;
        return o;
    }
};

void add_solver_flags(CLI::App* cmd, SolverFlags* f) {
    cmd->add_option("--omega", f->omega, "Relaxation weight in (0, 1]");
    cmd->add_option("--max-iters", f->max_iters, "Iteration cap for the solver");
    cmd->add_option("--tol", f->tol, "Profile step tolerance at convergence");
    cmd->add_option("--tol-kkt", f->tol_kkt, "Residual bound for certification");
    cmd->add_option("--seed", f->seed, "Seed for the initial profile");
}

void dump_json(const json& j, const std::string& out_path) {
    const std::string text = j.dump(2) + "\n";
    if (out_path.empty()) std::cout << text;
    else clmm::write_file(out_path, text);
}

json prices_to_json(const clmm::PricePoint& p) {
    json j;
    j["q"] = p.q;
    j["p_x"] = p.p_x;
    j["p_y"] = p.p_y;
    return j;
}

clmm::PricePoint prices_from_json(const json& j) {
    clmm::PricePoint p;
    p.q = j.at("q").get<double>();
    p.p_x = j.at("p_x").get<double>();
    p.p_y = j.at("p_y").get<double>();
    return p;
}

struct IngestCfg {
    std::string events, prices, pool, pool_file, out;
    double gamma = -1;
    double alpha = 1.0;
    std::string from, to;
};

int run_ingest(IngestCfg cfg) {
    if (!cfg.pool_file.empty()) {
        const json header = json::parse(clmm::read_file(cfg.pool_file));
        if (cfg.pool.empty()) cfg.pool = header.at("name").get<std::string>();
        if (cfg.gamma < 0) cfg.gamma = header.at("gamma").get<double>();
    }
    if (cfg.pool.empty()) throw clmm::InputError("pool name missing: pass --pool or --pool-file");
    if (cfg.gamma < 0) throw clmm::InputError("fee rate missing: pass --gamma or --pool-file");

    std::ifstream events(cfg.events);
    if (!events) throw clmm::InputError("cannot open " + cfg.events);
    std::ifstream prices(cfg.prices);
    if (!prices) throw clmm::InputError("cannot open " + cfg.prices);

    clmm::IngestOptions opts;
    opts.alpha = cfg.alpha;
    opts.from_date = cfg.from;
    opts.to_date = cfg.to;
    const clmm::IngestResult res =
        clmm::ingest_pool(events, prices, cfg.pool, cfg.gamma, opts);

    if (!res.parse_issues.empty()) {
        for (const clmm::ParseIssue& issue : res.parse_issues)
            std::cerr << cfg.events << " line " << issue.line << ": " << issue.message
                      << "\n";
        std::cerr << "error: " << res.parse_issues.size() << " malformed event row(s)\n";
        return 2;
    }

    const fs::path pool_dir = fs::path(cfg.out) / cfg.pool;
    json days = json::array();
    for (const clmm::DailyGame& day : res.days) {
        const fs::path day_dir = pool_dir / day.date;
        fs::create_directories(day_dir);
        clmm::write_file((day_dir / "spec.json").string(),
                         clmm::spec_to_json(day.spec).dump(2) + "\n");
        clmm::write_file(
            (day_dir / "gt.json").string(),
            clmm::profile_to_json(day.gt, day.spec.player_ids()).dump(2) + "\n");
        json dj;
        dj["date"] = day.date;
        dj["open"] = prices_to_json(day.open);
        dj["close"] = prices_to_json(day.close);
        dj["retained_fraction"] = day.retained_fraction;
        dj["warnings"] = day.warnings;
        clmm::write_file((day_dir / "day.json").string(), dj.dump(2) + "\n");
        days.push_back(day.date);
    }

    json manifest;
    manifest["version"] = clmm::kVersion;
    manifest["pool"] = cfg.pool;
    manifest["gamma"] = cfg.gamma;
    manifest["alpha"] = cfg.alpha;
    manifest["days"] = std::move(days);
    manifest["warnings"] = res.warnings;
    fs::create_directories(pool_dir);
    clmm::write_file((pool_dir / "manifest.json").string(), manifest.dump(2) + "\n");

    std::cout << "wrote " << res.days.size() << " day(s) to " << pool_dir.string()
              << "\n";
    for (const std::string& w : res.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

struct SolveCfg {
    std::string spec, out, profile;
    SolverFlags solver;
    bool check_only = false;
};

int run_solve(const SolveCfg& cfg) {
    const clmm::GameSpec spec =
        clmm::spec_from_json(json::parse(clmm::read_file(cfg.spec)));
    const std::vector<std::string> problems = clmm::validate_spec(spec);
    if (!problems.empty()) {
        for (const std::string& p : problems) std::cerr << "invalid spec: " << p << "\n";
        return 2;
    }

    if (cfg.check_only) {
        if (cfg.profile.empty())
            throw clmm::InputError("--check-only needs --profile");
        const clmm::AtomicProfile prof = clmm::profile_from_json(
            json::parse(clmm::read_file(cfg.profile)), spec.player_ids());
        const clmm::KktReport report = clmm::kkt_residuals(spec, prof);
        dump_json(clmm::kkt_to_json(report), cfg.out);
        return report.max_residual() <= cfg.solver.tol_kkt ? 0 : 1;
    }

    const clmm::EquilibriumResult res = clmm::solve_ne(spec, cfg.solver.options());
    const clmm::StructureReport st = clmm::structure_checks(spec, res.profile);
    json out;
    out["equilibrium"] = clmm::result_to_json(res);
    out["checks"]["waterfill"] = st.waterfill;
    out["checks"]["dominance"] = st.dominance;
    out["checks"]["positivity"] = st.positivity;
    out["checks"]["positivity_checked"] = st.positivity_checked;
    out["checks"]["constant_utility"] = st.constant_utility;
    out["checks"]["constant_utility_checked"] = st.constant_utility_checked;
    out["checks"]["worst_violation"] = st.worst_violation;
    dump_json(out, cfg.out);
    if (!res.converged) {
        std::cerr << "error: no convergence after " << res.iterations
                  << " iterations (kkt residual "
                  << clmm::format_double(res.kkt.max_residual()) << ")\n";
        return 1;
    }
    return 0;
}

struct EvaluateCfg {
    std::string days_dir, out, pool, strategies;
    SolverFlags solver;
    double expansion = 2.0;
    double fluctuation = 1.1;
    int history = 7;
    int jobs = 1;
};

std::vector<clmm::Strategy> parse_strategies(const std::string& csv) {
    std::vector<clmm::Strategy> out;
    std::string token;
    std::istringstream in(csv);
    while (std::getline(in, token, ',')) {
        if (token.empty()) continue;
        const std::optional<clmm::Strategy> s = clmm::strategy_from_name(token);
        if (!s) throw clmm::InputError("unknown strategy '" + token + "'");
        out.push_back(*s);
    }
    return out;
}

int run_evaluate(const EvaluateCfg& cfg) {
    const fs::path days_dir = cfg.days_dir;
    const json manifest =
        json::parse(clmm::read_file((days_dir / "manifest.json").string()));

    std::vector<clmm::DailyGame> days;
    for (const json& date_j : manifest.at("days")) {
        const std::string date = date_j.get<std::string>();
        const fs::path dir = days_dir / date;
        clmm::GameSpec spec = clmm::spec_from_json(
            json::parse(clmm::read_file((dir / "spec.json").string())));
        clmm::AtomicProfile gt = clmm::profile_from_json(
            json::parse(clmm::read_file((dir / "gt.json").string())),
            spec.player_ids());
        const json dj = json::parse(clmm::read_file((dir / "day.json").string()));
        days.push_back(clmm::DailyGame{date, prices_from_json(dj.at("open")),
                                       prices_from_json(dj.at("close")),
                                       std::move(spec), std::move(gt),
                                       dj.value("retained_fraction", 1.0),
                                       {}});
    }

    clmm::SuiteOptions opts;
    opts.solver = cfg.solver.options();
    opts.strategies = parse_strategies(cfg.strategies);
    opts.expansion_e = cfg.expansion;
    opts.fluctuation_r = cfg.fluctuation;
    opts.history_days = cfg.history;
    opts.jobs = cfg.jobs;
    opts.pool = cfg.pool.empty() ? manifest.at("pool").get<std::string>() : cfg.pool;

    const std::vector<clmm::ReportRow> rows = clmm::run_strategy_suite(days, opts);

    const fs::path out_dir = cfg.out.empty() ? days_dir : fs::path(cfg.out);
    fs::create_directories(out_dir);
    clmm::write_file((out_dir / "report.csv").string(), clmm::report_csv(rows));
    json summary = clmm::summarize_report(rows);
    summary["version"] = clmm::kVersion;
    summary["pool"] = opts.pool;
    clmm::write_file((out_dir / "summary.json").string(), summary.dump(2) + "\n");

    std::cout << "wrote " << rows.size() << " report row(s) to " << out_dir.string()
              << "\n";
    return 0;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

struct ReportCfg {
    std::vector<std::string> inputs;
    std::string out;
};

int run_report(const ReportCfg& cfg) {
    std::vector<clmm::ReportRow> rows;
    for (const std::string& path : cfg.inputs) {
        std::istringstream in(clmm::read_file(path));
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty() || line_no == 1) continue;
            const std::vector<std::string> f = split_line(line);
            if (f.size() != 8)
                throw clmm::InputError(path + " line " + std::to_string(line_no) +
                                       ": expected 8 columns");
            const std::optional<clmm::Strategy> s = clmm::strategy_from_name(f[3]);
            if (!s)
                throw clmm::InputError(path + " line " + std::to_string(line_no) +
                                       ": unknown strategy '" + f[3] + "'");
            auto cell = [&](const std::string& text) -> std::optional<double> {
                if (text.empty()) return std::nullopt;
                char* end = nullptr;
                const double v = std::strtod(text.c_str(), &end);
                if (end != text.c_str() + text.size())
                    throw clmm::InputError(path + " line " + std::to_string(line_no) +
                                           ": bad number '" + text + "'");
                return v;
            };
            clmm::ReportRow row;
            row.pool = f[0];
            row.date = f[1];
            row.player = f[2];
            row.strategy = *s;
            row.overlap_gt = cell(f[4]);
            row.utility = cell(f[5]);
            row.roi = cell(f[6]);
            row.nog = cell(f[7]);
            rows.push_back(std::move(row));
        }
    }
    json summary = clmm::summarize_report(rows);
    summary["version"] = clmm::kVersion;
    dump_json(summary, cfg.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Concentrated-liquidity LP game: ingest, solve, evaluate, report"};
    app.require_subcommand(1);

    IngestCfg icfg;
    CLI::App* ingest = app.add_subcommand(
        "ingest", "Build one game per day from an event log and day-boundary prices");
    ingest->add_option("--events", icfg.events, "Event log (CSV or JSON lines)")
        ->required();
    ingest->add_option("--prices", icfg.prices, "Day-boundary prices CSV")->required();
    ingest->add_option("--pool", icfg.pool, "Pool name for outputs");
    ingest->add_option("--pool-file", icfg.pool_file,
                       "Pool header JSON {\"gamma\", \"name\"}");
    ingest->add_option("--gamma", icfg.gamma, "Pool fee rate in [0, 1)");
    ingest->add_option("--out", icfg.out, "Output directory")->required();
    ingest->add_option("--alpha-override", icfg.alpha,
                       "Fee-share exponent alpha in (0, 1]");
    ingest->add_option("--from", icfg.from, "First day (YYYY-MM-DD, inclusive)");
    ingest->add_option("--to", icfg.to, "Last day (YYYY-MM-DD, inclusive)");

    SolveCfg scfg;
    CLI::App* solve = app.add_subcommand(
        "solve", "Solve a game spec for its equilibrium and certify it");
    solve->add_option("--spec", scfg.spec, "Game spec JSON")->required();
    solve->add_option("--out", scfg.out, "Result JSON path (default: stdout)");
    solve->add_flag("--check-only", scfg.check_only,
                    "Only report KKT residuals of --profile");
    solve->add_option("--profile", scfg.profile, "Profile JSON for --check-only");
    add_solver_flags(solve, &scfg.solver);

    EvaluateCfg ecfg;
    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "Run the strategy suite over ingested days");
    evaluate->add_option("--days", ecfg.days_dir, "Ingested pool directory")
        ->required();
    evaluate->add_option("--out", ecfg.out,
                         "Report directory (default: the pool directory)");
    evaluate->add_option("--pool", ecfg.pool, "Pool label for report rows");
    evaluate->add_option("--strategies", ecfg.strategies,
                         "Comma-separated subset of gt,ne,nea,br,yday,rne,ine,ibr");
    evaluate->add_option("--expansion", ecfg.expansion,
                         "Inert-game range expansion factor E >= 1");
    evaluate->add_option("--fluctuation", ecfg.fluctuation,
                         "Reactive-game price fluctuation ratio r > 1");
    evaluate->add_option("--history", ecfg.history, "Inert-game lookback days");
    evaluate->add_option("--jobs", ecfg.jobs, "Worker threads across days");
    add_solver_flags(evaluate, &ecfg.solver);

    ReportCfg rcfg;
    CLI::App* report = app.add_subcommand(
        "report", "Aggregate one or more report CSVs into a summary JSON");
    report->add_option("--report", rcfg.inputs, "Report CSV path(s)")->required();
    report->add_option("--out", rcfg.out, "Summary JSON path (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) return run_ingest(icfg);
        if (*solve) return run_solve(scfg);
        if (*evaluate) return run_evaluate(ecfg);
        if (*report) return run_report(rcfg);
    } catch (const clmm::NoMaximizerError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 2;
}

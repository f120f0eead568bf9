// JSON / CSV serialization.
#include "clmm/io.hpp"

#include "clmm/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace clmm {
namespace {

nlohmann::json array_to_json(const Eigen::ArrayXd& a) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < a.size(); ++i) out.push_back(a(i));
    return out;
}

Eigen::ArrayXd array_from_json(const nlohmann::json& j, const char* what) {
    if (!j.is_array()) throw InputError(std::string(what) + " must be an array");
    Eigen::ArrayXd out(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number())
            throw InputError(std::string(what) + " must hold numbers");
        out(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return out;
}

nlohmann::json matrix_to_json(const Eigen::ArrayXXd& k) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < k.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < k.cols(); ++c) row.push_back(k(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::ArrayXXd matrix_from_json(const nlohmann::json& j, const char* what) {
    if (!j.is_array() || j.empty())
        throw InputError(std::string(what) + " must be a non-empty array of rows");
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    Eigen::ArrayXXd k(static_cast<Eigen::Index>(j.size()),
                      static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (!j[r].is_array() || j[r].size() != cols)
            throw InputError(std::string(what) + " rows must have equal length");
        for (std::size_t c = 0; c < cols; ++c)
            k(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                j[r][c].get<double>();
    }
    return k;
}

nlohmann::json stats(std::vector<double> v) {
    nlohmann::json out;
    out["count"] = v.size();
    if (v.empty()) return out;
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double mean = 0;
    for (double x : v) mean += x;
    mean /= n;
    double var = 0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    auto quantile = [&](double p) {
        const double h = p * (n - 1);
        const std::size_t lo = static_cast<std::size_t>(h);
        const double frac = h - static_cast<double>(lo);
        return lo + 1 < v.size() ? v[lo] + frac * (v[lo + 1] - v[lo]) : v[lo];
    };
    out["mean"] = mean;
    out["std"] = sd;
    out["min"] = v.front();
    out["q25"] = quantile(0.25);
    out["median"] = quantile(0.5);
    out["q75"] = quantile(0.75);
    out["max"] = v.back();
    return out;
}

}  // namespace

nlohmann::json spec_to_json(const GameSpec& spec) {
    nlohmann::json j;
    j["alpha"] = spec.alpha();
    j["q0"] = spec.q0();
    j["p_y0"] = spec.p_y0();
    j["ticks"] = array_to_json(spec.grid().ticks());
    j["fees"] = array_to_json(spec.fees());
    j["taus"] = array_to_json(spec.taus());
    j["chis"] = array_to_json(spec.chis());
    nlohmann::json players = nlohmann::json::array();
    for (int n = 0; n < spec.num_players(); ++n) {
        nlohmann::json p;
        p["id"] = spec.player_ids()[n];
        p["budget"] = spec.budgets()(n);
        players.push_back(std::move(p));
    }
    j["players"] = std::move(players);
    return j;
}

GameSpec spec_from_json(const nlohmann::json& j) {
    try {
        const Eigen::ArrayXd ticks = array_from_json(j.at("ticks"), "ticks");
        const auto& players = j.at("players");
        if (!players.is_array() || players.empty())
            throw InputError("players must be a non-empty array");
        std::vector<std::string> ids;
        Eigen::ArrayXd budgets(static_cast<Eigen::Index>(players.size()));
        for (std::size_t n = 0; n < players.size(); ++n) {
            ids.push_back(players[n].at("id").get<std::string>());
            budgets(static_cast<Eigen::Index>(n)) =
                players[n].at("budget").get<double>();
        }
        return GameSpec(TickGrid(ticks), j.at("alpha").get<double>(),
                        j.at("q0").get<double>(), j.at("p_y0").get<double>(),
                        array_from_json(j.at("fees"), "fees"),
                        array_from_json(j.at("taus"), "taus"),
                        array_from_json(j.at("chis"), "chis"), std::move(ids), budgets);
    } catch (const nlohmann::json::exception& ex) {
        throw InputError(std::string("bad game spec: ") + ex.what());
    }
}

nlohmann::json profile_to_json(const AtomicProfile& profile,
                               const std::vector<std::string>& player_ids) {
    if (static_cast<int>(player_ids.size()) != profile.num_players())
        throw std::invalid_argument("player ids do not match the profile");
    nlohmann::json j;
    j["players"] = player_ids;
    j["k"] = matrix_to_json(profile.k);
    return j;
}

AtomicProfile profile_from_json(const nlohmann::json& j,
                                const std::vector<std::string>& expected_ids) {
    try {
        AtomicProfile profile(matrix_from_json(j.at("k"), "k"));
        if (!expected_ids.empty()) {
            const auto ids = j.at("players").get<std::vector<std::string>>();
            if (ids != expected_ids)
                throw InputError("profile players do not match the game spec");
        }
        if (!expected_ids.empty() &&
            profile.num_players() != static_cast<int>(expected_ids.size()))
            throw InputError("profile has the wrong number of rows");
        return profile;
    } catch (const nlohmann::json::exception& ex) {
        throw InputError(std::string("bad profile: ") + ex.what());
    }
}

nlohmann::json result_to_json(const EquilibriumResult& result) {
    nlohmann::json j;
    j["k"] = matrix_to_json(result.profile.k);
    j["lambda"] = array_to_json(result.kkt.lambda);
    j["mu"] = matrix_to_json(result.kkt.mu);
    j["residuals"]["stationarity"] = result.kkt.stationarity;
    j["residuals"]["comp_slack"] = result.kkt.comp_slack;
    j["residuals"]["feasibility"] = result.kkt.feasibility;
    j["iterations"] = result.iterations;
    j["converged"] = result.converged;
    return j;
}

nlohmann::json kkt_to_json(const KktReport& report) {
    nlohmann::json j;
    j["lambda"] = array_to_json(report.lambda);
    j["mu"] = matrix_to_json(report.mu);
    j["stationarity"] = report.stationarity;
    j["comp_slack"] = report.comp_slack;
    j["feasibility"] = report.feasibility;
    j["max_residual"] = report.max_residual();
    return j;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string report_csv(const std::vector<ReportRow>& rows) {
    std::ostringstream os;
    os << "pool,date,player,strategy,overlap_gt,utility_usd,roi,nog\n";
    auto cell = [](const std::optional<double>& v) {
        return v ? format_double(*v) : std::string();
    };
    for (const ReportRow& r : rows) {
        os << r.pool << ',' << r.date << ',' << r.player << ','
           << strategy_name(r.strategy) << ',' << cell(r.overlap_gt) << ','
           << cell(r.utility) << ',' << cell(r.roi) << ',' << cell(r.nog) << '\n';
    }
    return os.str();
}

nlohmann::json summarize_report(const std::vector<ReportRow>& rows) {
    struct Columns {
        std::vector<double> overlap, utility, roi, nog;
    };
    std::map<std::string, Columns> by_strategy;
    for (const ReportRow& r : rows) {
        Columns& c = by_strategy[strategy_name(r.strategy)];
        if (r.overlap_gt) c.overlap.push_back(*r.overlap_gt);
        if (r.utility) c.utility.push_back(*r.utility);
        if (r.roi) c.roi.push_back(*r.roi);
        if (r.nog) c.nog.push_back(*r.nog);
    }
    nlohmann::json j;
    j["num_rows"] = rows.size();
    nlohmann::json strategies;
    for (auto& [name, c] : by_strategy) {
        nlohmann::json s;
        s["overlap_gt"] = stats(std::move(c.overlap));
        s["utility_usd"] = stats(std::move(c.utility));
        s["roi"] = stats(std::move(c.roi));
        s["nog"] = stats(std::move(c.nog));
        strategies[name] = std::move(s);
    }
    j["strategies"] = std::move(strategies);
    return j;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << content;
    if (!out) throw InputError("failed writing " + path);
}

}  // namespace clmm

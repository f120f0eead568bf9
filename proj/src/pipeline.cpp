// Event-log to daily-game pipeline.
#include "clmm/pipeline.hpp"

#include "clmm/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace clmm {
namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

bool positive_finite(double v) { return std::isfinite(v) && v > 0; }

// Days since 1970-01-01 for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 +
                         static_cast<unsigned>(d) - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int* y, int* m, int* d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    *d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    *m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    *y = static_cast<int>(yr + (*m <= 2));
}

double parse_number(const std::string& s, bool* ok) {
    if (s.empty()) {
        *ok = false;
        return 0;
    }
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    *ok = end == s.c_str() + s.size() && std::isfinite(v);
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
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

bool parse_bool(const std::string& s) {
    return s == "1" || s == "true" || s == "yes";
}

// Validates kind-specific fields; returns an error message or empty.
std::string finish_event(Event* e) {
    switch (e->kind) {
        case EventKind::mint:
            if (e->sender.empty()) return "mint without sender";
            if (e->position_id.empty()) return "mint without position_id";
            if (!positive_finite(e->lower) || !positive_finite(e->upper) ||
                !(e->lower < e->upper))
                return "mint needs ticks 0 < lower < upper";
            if (!positive_finite(e->liquidity)) return "mint needs positive liquidity";
            return "";
        case EventKind::burn:
            if (e->position_id.empty()) return "burn without position_id";
            if (!positive_finite(e->liquidity)) return "burn needs positive liquidity";
            return "";
        case EventKind::swap:
            if (!positive_finite(e->q_before) || !positive_finite(e->q_after))
                return "swap needs positive q_before and q_after";
            return "";
    }
    return "unknown kind";
}

}  // namespace

std::int64_t date_to_timestamp(const std::string& date) {
    int y = 0, m = 0, d = 0;
    if (std::sscanf(date.c_str(), "%4d-%2d-%2d", &y, &m, &d) != 3 || m < 1 || m > 12 ||
        d < 1 || d > 31) {
        throw InputError("bad date '" + date + "', expected YYYY-MM-DD");
    }
    return days_from_civil(y, m, d) * kSecondsPerDay;
}

std::string timestamp_to_date(std::int64_t ts) {
    int y = 0, m = 0, d = 0;
    std::int64_t days = ts / kSecondsPerDay;
    if (ts < 0 && ts % kSecondsPerDay != 0) --days;
    civil_from_days(days, &y, &m, &d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

ParsedEvents parse_events(std::istream& in) {
    ParsedEvents out;
    std::string line;
    int line_no = 0;
    bool jsonl = false;
    bool decided = false;
    std::vector<std::string> header;
    std::int64_t last_ts = 0;
    int last_line = 0;
    bool have_ts = false;

    auto accept = [&](Event e, int ln) {
        if (have_ts && e.timestamp < last_ts) {
            std::ostringstream os;
            os << "timestamp regression: line " << ln << " (t=" << e.timestamp
               << ") after line " << last_line << " (t=" << last_ts << ")";
            throw InputError(os.str());
        }
        last_ts = e.timestamp;
        last_line = ln;
        have_ts = true;
        out.events.push_back(std::move(e));
    };

    while (std::getline(in, line)) {
        ++line_no;
        std::string trimmed = line;
        while (!trimmed.empty() && (trimmed.back() == '\r' || trimmed.back() == ' '))
            trimmed.pop_back();
        if (trimmed.empty()) continue;

        if (!decided) {
            jsonl = trimmed.front() == '{';
            decided = true;
            if (!jsonl) {
                header = split_csv(trimmed);
                continue;
            }
        }

        if (jsonl) {
            nlohmann::json j = nlohmann::json::parse(trimmed, nullptr, false);
            if (j.is_discarded() || !j.is_object()) {
                out.issues.push_back({line_no, "unparseable JSON row"});
                continue;
            }
            Event e;
            try {
                const std::string kind = j.at("kind").get<std::string>();
                if (kind == "swap") e.kind = EventKind::swap;
                else if (kind == "mint") e.kind = EventKind::mint;
                else if (kind == "burn") e.kind = EventKind::burn;
                else {
                    out.issues.push_back({line_no, "unknown kind '" + kind + "'"});
                    continue;
                }
                e.timestamp = j.at("timestamp").get<std::int64_t>();
                e.sender = j.value("sender", "");
                e.position_id = j.value("position_id", "");
                if (j.contains("is_nft")) {
                    const auto& v = j.at("is_nft");
                    e.is_nft = v.is_boolean() ? v.get<bool>() : v.get<double>() != 0;
                }
                e.lower = j.value("lower", 0.0);
                e.upper = j.value("upper", 0.0);
                e.liquidity = j.value("liquidity", 0.0);
                e.q_before = j.value("q_before", 0.0);
                e.q_after = j.value("q_after", 0.0);
            } catch (const nlohmann::json::exception& ex) {
                out.issues.push_back({line_no, std::string("bad row: ") + ex.what()});
                continue;
            }
            if (std::string err = finish_event(&e); !err.empty()) {
                out.issues.push_back({line_no, err});
                continue;
            }
            accept(std::move(e), line_no);
            continue;
        }

        const std::vector<std::string> fields = split_csv(trimmed);
        auto field = [&](const char* name) -> std::string {
            for (std::size_t i = 0; i < header.size(); ++i)
                if (header[i] == name) return i < fields.size() ? fields[i] : "";
            return "";
        };
        Event e;
        const std::string kind = field("kind");
        if (kind == "swap") e.kind = EventKind::swap;
        else if (kind == "mint") e.kind = EventKind::mint;
        else if (kind == "burn") e.kind = EventKind::burn;
        else {
            out.issues.push_back({line_no, "unknown kind '" + kind + "'"});
            continue;
        }
        bool ok = false;
        const double ts = parse_number(field("timestamp"), &ok);
        if (!ok) {
            out.issues.push_back({line_no, "missing or bad timestamp"});
            continue;
        }
        e.timestamp = static_cast<std::int64_t>(ts);
        e.sender = field("sender");
        e.position_id = field("position_id");
        e.is_nft = parse_bool(field("is_nft"));
        auto num = [&](const char* name) {
            bool num_ok = false;
            const double v = parse_number(field(name), &num_ok);
            return num_ok ? v : std::nan("");
        };
        e.lower = num("lower");
        e.upper = num("upper");
        e.liquidity = num("liquidity");
        e.q_before = num("q_before");
        e.q_after = num("q_after");
        if (std::string err = finish_event(&e); !err.empty()) {
            out.issues.push_back({line_no, err});
            continue;
        }
        accept(std::move(e), line_no);
    }
    return out;
}

std::vector<DayBoundary> parse_prices(std::istream& in) {
    std::vector<DayBoundary> rows;
    std::string line;
    int line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        if (!saw_header) {
            saw_header = true;
            continue;
        }
        const std::vector<std::string> f = split_csv(line);
        if (f.size() != 4) {
            throw InputError("prices line " + std::to_string(line_no) +
                             ": expected date,q,p_x,p_y");
        }
        DayBoundary b;
        b.date = f[0];
        b.timestamp = date_to_timestamp(f[0]);
        bool ok1 = false, ok2 = false, ok3 = false;
        b.prices.q = parse_number(f[1], &ok1);
        b.prices.p_x = parse_number(f[2], &ok2);
        b.prices.p_y = parse_number(f[3], &ok3);
        if (!ok1 || !ok2 || !ok3 || !positive_finite(b.prices.q) ||
            !positive_finite(b.prices.p_x) || !positive_finite(b.prices.p_y)) {
            throw InputError("prices line " + std::to_string(line_no) +
                             ": prices must be positive numbers");
        }
        if (!rows.empty() && b.timestamp <= rows.back().timestamp) {
            throw InputError("prices line " + std::to_string(line_no) +
                             ": dates must be strictly increasing");
        }
        rows.push_back(std::move(b));
    }
    return rows;
}

std::string PoolState::apply(const Event& e) {
    if (e.kind == EventKind::swap) return "";
    auto it = positions_.find(e.position_id);
    if (e.kind == EventKind::mint) {
        if (it == positions_.end() || !it->second.open) {
            Record rec;
            rec.owner = e.sender;
            rec.pos = {e.lower, e.upper, e.liquidity};
            rec.is_nft = e.is_nft;
            rec.minted_at = e.timestamp;
            rec.open = true;
            positions_[e.position_id] = rec;
            return "";
        }
        Record& rec = it->second;
        if (rec.pos.lower != e.lower || rec.pos.upper != e.upper) {
            return "mint on position " + e.position_id + " with a different range, skipped";
        }
        rec.pos.liquidity += e.liquidity;
        return "";
    }
    // burn
    if (it == positions_.end() || !it->second.open) {
        return "burn of unknown or closed position " + e.position_id + ", skipped";
    }
    Record& rec = it->second;
    std::string warning;
    double remaining = rec.pos.liquidity - e.liquidity;
    if (remaining < -1e-9 * rec.pos.liquidity) {
        warning = "burn exceeds liquidity of position " + e.position_id + ", clamped";
    }
    if (remaining <= 1e-12 * rec.pos.liquidity) remaining = 0;
    rec.pos.liquidity = remaining;
    if (remaining == 0) rec.open = false;
    return warning;
}

PlayerSelection select_players(const PoolState& state,
                               const std::vector<std::string>& touched_ids,
                               std::int64_t day_start, const PricePoint& day_open) {
    const std::set<std::string> touched(touched_ids.begin(), touched_ids.end());
    const double p_y = shift_prices(day_open).p_y;

    struct Candidate {
        double value = 0;
        std::vector<Position> positions;
    };
    std::map<std::string, Candidate> by_owner;
    PlayerSelection sel;
    double eligible_total = 0;

    for (const auto& [id, rec] : state.positions()) {
        if (!rec.open || rec.minted_at >= day_start) continue;
        const bool eligible = rec.is_nft && touched.find(id) == touched.end();
        if (!eligible) {
            sel.nonplayer_positions.push_back(rec.pos);
            continue;
        }
        const double value =
            rec.pos.liquidity *
            liquidity_price(rec.pos.lower, rec.pos.upper, day_open.q, p_y);
        Candidate& c = by_owner[rec.owner];
        c.value += value;
        c.positions.push_back(rec.pos);
        eligible_total += value;
    }

    std::vector<std::pair<std::string, Candidate>> ranked(by_owner.begin(), by_owner.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second.value != b.second.value) return a.second.value > b.second.value;
        return a.first < b.first;
    });

    std::size_t keep = std::min<std::size_t>(ranked.size(), 30);
    if (keep < ranked.size()) {
        sel.warnings.push_back("player cut: kept top 30 of " +
                               std::to_string(ranked.size()) + " liquidity providers");
    }
    double top30_total = 0;
    for (std::size_t i = 0; i < keep; ++i) top30_total += ranked[i].second.value;
    if (top30_total > 0) {
        double acc = 0;
        for (std::size_t i = 0; i < keep; ++i) {
            acc += ranked[i].second.value;
            if (acc >= 0.99 * top30_total) {
                if (i + 1 < keep) {
                    sel.warnings.push_back(
                        "player cut: top " + std::to_string(i + 1) +
                        " providers already hold 99% of the top-30 budget");
                    keep = i + 1;
                }
                break;
            }
        }
    }

    double retained = 0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (i < keep) {
            retained += ranked[i].second.value;
            sel.players.push_back(
                {ranked[i].first, ranked[i].second.value, ranked[i].second.positions});
        } else {
            for (const Position& p : ranked[i].second.positions)
                sel.nonplayer_positions.push_back(p);
        }
    }
    sel.retained_fraction = eligible_total > 0 ? retained / eligible_total : 1.0;
    return sel;
}

TickGrid build_tick_grid(const std::vector<Position>& player_positions,
                         const std::vector<Position>& nonplayer_positions) {
    std::vector<double> ticks;
    for (const auto* list : {&player_positions, &nonplayer_positions}) {
        for (const Position& p : *list) {
            if (!positive_finite(p.lower) || !positive_finite(p.upper) ||
                !(p.lower < p.upper))
                throw InputError("position with invalid range");
            ticks.push_back(p.lower);
            ticks.push_back(p.upper);
        }
    }
    if (ticks.empty()) throw InputError("no positions to build a grid from");
    std::sort(ticks.begin(), ticks.end());
    ticks.erase(std::unique(ticks.begin(), ticks.end()), ticks.end());
    return TickGrid(ticks);
}

Eigen::ArrayXd rebucket(const std::vector<Position>& positions, const TickGrid& grid) {
    Eigen::ArrayXd k = Eigen::ArrayXd::Zero(grid.num_ranges());
    for (const Position& p : positions) {
        for (int m = 0; m < grid.num_ranges(); ++m) {
            if (p.lower <= grid.lower(m) && grid.upper(m) <= p.upper)
                k(m) += p.liquidity;
        }
    }
    return k;
}

FeeAttribution attribute_fees(const std::vector<Trade>& trades, const TickGrid& grid,
                              const Eigen::ArrayXd& player_k,
                              const Eigen::ArrayXd& nonplayer_k, double gamma,
                              const PricePoint& day_end) {
    const int m_count = grid.num_ranges();
    if (player_k.size() != m_count || nonplayer_k.size() != m_count)
        throw std::invalid_argument("liquidity arrays must match the grid");
    if (!std::isfinite(gamma) || gamma < 0 || gamma >= 1)
        throw std::invalid_argument("gamma must lie in [0, 1)");

    const PricePoint bar = shift_prices(day_end);
    FeeAttribution fa;
    fa.fees_usd = Eigen::ArrayXd::Zero(m_count);
    fa.player_fees_usd = Eigen::ArrayXd::Zero(m_count);
    fa.fees_x_tokens = Eigen::ArrayXd::Zero(m_count);
    fa.fees_y_tokens = Eigen::ArrayXd::Zero(m_count);
    std::set<int> dry;

    for (std::size_t t = 0; t < trades.size(); ++t) {
        const Trade& tr = trades[t];
        if (!positive_finite(tr.q_before) || !positive_finite(tr.q_after))
            throw InputError("trade " + std::to_string(t) + " has invalid prices");
        const double lo = std::min(tr.q_before, tr.q_after);
        const double hi = std::max(tr.q_before, tr.q_after);
        if (lo == hi) continue;
        if (lo < grid.min_tick() || hi > grid.max_tick()) {
            std::ostringstream os;
            os << "trade " << t << " (" << tr.q_before << " -> " << tr.q_after
               << ") leaves the grid hull [" << grid.min_tick() << ", "
               << grid.max_tick() << "]";
            throw InputError(os.str());
        }
        const bool rising = tr.q_after > tr.q_before;
        for (int m = 0; m < m_count; ++m) {
            const double s_lo = std::max(lo, grid.lower(m));
            const double s_hi = std::min(hi, grid.upper(m));
            if (s_hi <= s_lo) continue;
            const double j = player_k(m) + nonplayer_k(m);
            if (j <= 0) {
                dry.insert(m);
                continue;
            }
            double fee_usd = 0;
            if (rising) {
                const double fee_y = gamma * j * (std::sqrt(s_hi) - std::sqrt(s_lo));
                fa.fees_y_tokens(m) += fee_y;
                fee_usd = fee_y * bar.p_y;
            } else {
                const double fee_x =
                    gamma * j * (1.0 / std::sqrt(s_lo) - 1.0 / std::sqrt(s_hi));
                fa.fees_x_tokens(m) += fee_x;
                fee_usd = fee_x * bar.p_x;
            }
            fa.fees_usd(m) += fee_usd;
            fa.player_fees_usd(m) += fee_usd * (player_k(m) / j);
        }
    }
    fa.dry_ranges.assign(dry.begin(), dry.end());
    return fa;
}

ChiEstimate estimate_chi(double kappa_m, double fee_m, double player_fee_m) {
    if (!std::isfinite(kappa_m) || kappa_m < 0)
        throw std::invalid_argument("kappa must be non-negative");
    if (!std::isfinite(fee_m) || fee_m < 0 || !std::isfinite(player_fee_m) ||
        player_fee_m < 0)
        throw std::invalid_argument("fees must be non-negative");
    if (player_fee_m > fee_m * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "player fees " << player_fee_m << " exceed total fees " << fee_m;
        throw InputError(os.str());
    }
    ChiEstimate est;
    if (fee_m <= 0) {
        est.covered = true;  // no fees at all: chi is 0 by definition
        return est;
    }
    if (player_fee_m <= 0) return est;  // fees without player share: uncovered
    est.covered = true;
    est.chi = std::max(0.0, kappa_m * (fee_m - player_fee_m) / player_fee_m);
    return est;
}

DailyGame build_daily_game(const PoolState& state,
                           const std::vector<std::string>& touched_ids,
                           const std::vector<Trade>& trades, const std::string& date,
                           const PricePoint& day_open, const PricePoint& day_close,
                           double gamma, double alpha) {
    PlayerSelection sel = select_players(state, touched_ids,
                                         date_to_timestamp(date), day_open);
    if (sel.players.empty())
        throw InputError("no eligible players on " + date);

    std::vector<Position> player_positions;
    for (const SelectedPlayer& p : sel.players)
        player_positions.insert(player_positions.end(), p.positions.begin(),
                                p.positions.end());
    const TickGrid grid = build_tick_grid(player_positions, sel.nonplayer_positions);
    const int m_count = grid.num_ranges();

    AtomicProfile gt(static_cast<int>(sel.players.size()), m_count);
    for (std::size_t n = 0; n < sel.players.size(); ++n)
        gt.k.row(static_cast<Eigen::Index>(n)) =
            rebucket(sel.players[n].positions, grid).transpose();
    const Eigen::ArrayXd kappa = gt.k.colwise().sum().transpose();
    const Eigen::ArrayXd nonplayer = rebucket(sel.nonplayer_positions, grid);

    const FeeAttribution fees =
        attribute_fees(trades, grid, kappa, nonplayer, gamma, day_close);
    std::vector<std::string> warnings = sel.warnings;
    for (int m : fees.dry_ranges)
        warnings.push_back("range " + std::to_string(m) +
                           " crossed with zero liquidity on " + date);

    Eigen::ArrayXd chis(m_count);
    std::vector<int> uncovered;
    double covered_sum = 0;
    int covered_count = 0;
    for (int m = 0; m < m_count; ++m) {
        const ChiEstimate est = estimate_chi(kappa(m), fees.fees_usd(m),
                                             fees.player_fees_usd(m));
        if (est.covered) {
            chis(m) = est.chi;
            covered_sum += est.chi;
            ++covered_count;
        } else {
            chis(m) = -1;
            uncovered.push_back(m);
        }
    }
    const double imputed = covered_count > 0 ? covered_sum / covered_count : 0.0;
    for (int m : uncovered) {
        chis(m) = imputed;
        warnings.push_back("chi imputed on range " + std::to_string(m) + " of " + date +
                           " (fees observed but no player fees)");
    }
    if (covered_count == 0 && !uncovered.empty())
        warnings.push_back("no covered ranges on " + date + "; chi defaulted to 0");

    Eigen::ArrayXd taus(m_count);
    for (int m = 0; m < m_count; ++m)
        taus(m) = empirical_il_rate(grid.lower(m), grid.upper(m), day_open, day_close);

    std::vector<std::string> ids;
    Eigen::ArrayXd budgets(static_cast<Eigen::Index>(sel.players.size()));
    for (std::size_t n = 0; n < sel.players.size(); ++n) {
        ids.push_back(sel.players[n].id);
        budgets(static_cast<Eigen::Index>(n)) = sel.players[n].budget;
    }

    DailyGame day{date,
                  day_open,
                  day_close,
                  GameSpec(grid, alpha, day_open.q, shift_prices(day_open).p_y,
                           fees.fees_usd, taus, chis, std::move(ids), budgets),
                  std::move(gt),
                  sel.retained_fraction,
                  std::move(warnings)};
    return day;
}

GameSpec build_reactive_game(const DailyGame& prev, const DailyGame& today,
                             double fluctuation_r) {
    const TickGrid& grid = prev.spec.grid();
    const double q0 = today.open.q;
    const PriceDistribution dist = PriceDistribution::log_uniform(fluctuation_r);
    Eigen::ArrayXd taus(grid.num_ranges());
    for (int m = 0; m < grid.num_ranges(); ++m)
        taus(m) = expected_il_rate(grid.lower(m), grid.upper(m), q0, dist);
    return GameSpec(grid, today.spec.alpha(), q0, shift_prices(today.open).p_y,
                    prev.spec.fees(), taus, prev.spec.chis(), today.spec.player_ids(),
                    today.spec.budgets());
}

GameSpec build_inert_game(const std::vector<const DailyGame*>& history,
                          double expansion_e, const DailyGame& today) {
    if (history.empty()) throw InputError("inert game needs at least one prior day");
    if (!std::isfinite(expansion_e) || expansion_e < 1)
        throw std::invalid_argument("expansion factor must be >= 1");

    double t_lo = history.front()->spec.grid().min_tick();
    double t_hi = history.front()->spec.grid().max_tick();
    double fee_sum = 0, npi_sum = 0, r_sum = 0;
    for (const DailyGame* day : history) {
        t_lo = std::min(t_lo, day->spec.grid().min_tick());
        t_hi = std::max(t_hi, day->spec.grid().max_tick());
        fee_sum += day->spec.fees().sum();
        npi_sum += (day->spec.chis() * day->spec.eps()).sum();
        r_sum += std::max(day->close.q / day->open.q, day->open.q / day->close.q);
    }
    const double n_days = static_cast<double>(history.size());
    const double a = t_lo / expansion_e;
    const double b = t_hi * expansion_e;
    const double q0 = today.open.q;
    const double p_y0 = shift_prices(today.open).p_y;
    const double r = r_sum / n_days;

    Eigen::ArrayXd fees(1), taus(1), chis(1);
    fees(0) = fee_sum / n_days;
    taus(0) = r > 1.0 + 1e-12
                  ? expected_il_rate(a, b, q0, PriceDistribution::log_uniform(r))
                  : 0.0;
    chis(0) = (npi_sum / n_days) / liquidity_price(a, b, q0, p_y0);
    return GameSpec(TickGrid(std::vector<double>{a, b}), today.spec.alpha(), q0, p_y0,
                    fees, taus, chis, today.spec.player_ids(), today.spec.budgets());
}

IngestResult ingest_pool(std::istream& events_in, std::istream& prices_in,
                         const std::string& pool_name, double gamma,
                         const IngestOptions& opts) {
    IngestResult result;
    result.pool_name = pool_name;
    result.gamma = gamma;

    ParsedEvents parsed = parse_events(events_in);
    result.parse_issues = parsed.issues;
    if (parsed.events.empty())
        result.warnings.push_back("no events parsed");

    const std::vector<DayBoundary> boundaries = parse_prices(prices_in);
    if (boundaries.size() < 2) {
        result.warnings.push_back("prices cover fewer than two day boundaries");
        return result;
    }

    PoolState state;
    std::size_t next_event = 0;
    auto fold_until = [&](std::int64_t ts) {
        while (next_event < parsed.events.size() &&
               parsed.events[next_event].timestamp < ts) {
            if (std::string w = state.apply(parsed.events[next_event]); !w.empty())
                result.warnings.push_back(w);
            ++next_event;
        }
    };

    const std::int64_t from_ts =
        opts.from_date.empty() ? std::numeric_limits<std::int64_t>::min()
                               : date_to_timestamp(opts.from_date);
    const std::int64_t to_ts = opts.to_date.empty()
                                   ? std::numeric_limits<std::int64_t>::max()
                                   : date_to_timestamp(opts.to_date);

    for (std::size_t i = 0; i + 1 < boundaries.size(); ++i) {
        const DayBoundary& open = boundaries[i];
        const DayBoundary& close = boundaries[i + 1];
        if (close.timestamp != open.timestamp + kSecondsPerDay) {
            result.warnings.push_back("gap after " + open.date +
                                      "; skipping to next boundary");
            fold_until(close.timestamp);
            continue;
        }
        if (open.timestamp < from_ts || open.timestamp > to_ts) {
            fold_until(close.timestamp);
            continue;
        }

        fold_until(open.timestamp);

        // Scan the day's events for swaps and touched positions without
        // mutating the day-start snapshot yet.
        std::vector<Trade> trades;
        std::vector<std::string> touched;
        for (std::size_t e = next_event; e < parsed.events.size(); ++e) {
            const Event& ev = parsed.events[e];
            if (ev.timestamp >= close.timestamp) break;
            if (ev.kind == EventKind::swap)
                trades.push_back({ev.q_before, ev.q_after});
            else if (ev.kind == EventKind::burn)
                touched.push_back(ev.position_id);
        }

        try {
            result.days.push_back(build_daily_game(state, touched, trades, open.date,
                                                   open.prices, close.prices, gamma,
                                                   opts.alpha));
        } catch (const InputError& ex) {
            result.warnings.push_back("skipping " + open.date + ": " + ex.what());
        }
        fold_until(close.timestamp);
    }
    return result;
}

}  // namespace clmm
